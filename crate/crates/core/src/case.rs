//! Case files: a PDE, a similarity transform, the ansatz template, reference
//! window and the printed closed forms to audit.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzTemplate, Mode, ScreenContext, SolveOptions};
use crate::error::{Error, Result};
use crate::fiblucas::{Family, Variant};
use crate::grammar::{parse_expr, parse_pde};
use crate::reduction::{PdeSpec, SimilarityTransform};
use crate::symkernel::{parse_sexpr, substitute, Expr, Func, Node, Symbol};
use crate::verify::Grid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    /// `x=a:b:k,t=c:d:k`.
    pub grid: String,
    /// Values used where a branch or a caption leaves a parameter open.
    pub params: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrintedCoefficient {
    pub symbol: String,
    /// Label of the coefficient equation it is audited against, if known.
    pub equation: Option<String>,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrintedSolution {
    pub id: String,
    pub expr: String,
    /// Caption parameters; values are expressions.
    pub params: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseFile {
    pub name: String,
    pub label: String,
    /// Left-hand side in jet symbols, as an S-expression.
    pub pde: String,
    #[serde(default)]
    pub pde_text: Option<String>,
    pub variable: String,
    /// Transform definition as an S-expression in `x, t`.
    pub transform: String,
    pub family: Family,
    pub variant: Variant,
    #[serde(default)]
    pub reciprocal: bool,
    #[serde(default = "one")]
    pub order: u32,
    #[serde(default)]
    pub expected_index: Option<i64>,
    pub reference: Reference,
    #[serde(default)]
    pub printed_coefficients: Vec<PrintedCoefficient>,
    #[serde(default)]
    pub printed_free: Vec<String>,
    #[serde(default)]
    pub printed_solutions: Vec<PrintedSolution>,
}

fn one() -> u32 {
    1
}

#[derive(Clone, Debug)]
pub struct Case {
    pub file: CaseFile,
    pub pde: PdeSpec,
    pub transform: SimilarityTransform,
    pub template: AnsatzTemplate,
    pub grid: Grid,
    pub params: BTreeMap<Symbol, f64>,
}

pub const BUNDLED: [(&str, &str); 4] = [
    ("case1", include_str!("../cases/case1.json")),
    ("case2", include_str!("../cases/case2.json")),
    ("case3", include_str!("../cases/case3.json")),
    ("case4", include_str!("../cases/case4.json")),
];

fn number(text: &str) -> Result<f64> {
    let e = parse_expr(text)?;
    crate::verify::eval_expr(&e, &Default::default())
        .map_err(|_| Error::Config(format!("`{}` is not a number", text)))
}

/// Replaces unflagged radicals by the real-domain power, as transforms are
/// only used where their radicands are positive.
pub fn flag_radicals(e: &Expr) -> Expr {
    e.map_bottom_up(&mut |x: &Expr| match x.node() {
        Node::Apply(Func::Sqrt, args) => Expr::sqrt_real(args[0].clone()),
        _ => x.clone(),
    })
}

/// Parses `var = definition` (grammar) or a bare S-expression definition.
pub fn parse_transform(text: &str, default_variable: &str) -> Result<SimilarityTransform> {
    let text = text.trim();
    if text.starts_with('(') {
        return Ok(SimilarityTransform::new(default_variable, parse_sexpr(text)?));
    }
    let (var, def) = match text.split_once('=') {
        Some((v, d)) => (v.trim(), d),
        None => (default_variable, text),
    };
    if var.is_empty() || !var.chars().all(|c| c.is_ascii_alphanumeric()) {
        return Err(Error::Config(format!("invalid transform variable `{}`", var)));
    }
    Ok(SimilarityTransform::new(var, flag_radicals(&parse_expr(def)?)))
}

impl Case {
    pub fn from_file(file: CaseFile) -> Result<Case> {
        let lhs = parse_sexpr(&file.pde)?;
        if let Some(text) = &file.pde_text {
            let parsed = parse_pde(text)?;
            if parsed.lhs != lhs {
                return Err(Error::Config(format!(
                    "case {}: pde_text `{}` does not match the pde S-expression",
                    file.name, text
                )));
            }
        }
        let pde = PdeSpec::new(lhs);
        let transform = SimilarityTransform::new(&file.variable, parse_sexpr(&file.transform)?);
        if file.variant.variable() != transform.variable {
            return Err(Error::Config(format!(
                "case {}: transform variable `{}` does not match the {:?} auxiliary variable",
                file.name, transform.variable, file.variant
            )));
        }
        let template = AnsatzTemplate {
            family: file.family,
            variant: file.variant,
            reciprocal: file.reciprocal,
            order: file.order,
        };
        let grid = Grid::parse(&file.reference.grid)?;
        let mut params = BTreeMap::new();
        for (k, v) in &file.reference.params {
            params.insert(Symbol::new(k), number(v)?);
        }
        Ok(Case { file, pde, transform, template, grid, params })
    }

    /// A case built from a PDE text and a transform text, with no printed
    /// solutions to audit.
    pub fn inline(
        pde_text: &str,
        transform: &str,
        template: AnsatzTemplate,
        grid: Grid,
        params: &BTreeMap<String, f64>,
    ) -> Result<Case> {
        let pde = parse_pde(pde_text)?;
        let tf = parse_transform(transform, &template.variant.variable().to_string())?;
        let file = CaseFile {
            name: "inline".into(),
            label: pde_text.trim().to_string(),
            pde: pde.lhs.to_sexpr(),
            pde_text: Some(pde_text.to_string()),
            variable: tf.variable.to_string(),
            transform: tf.definition.to_sexpr(),
            family: template.family,
            variant: template.variant,
            reciprocal: template.reciprocal,
            order: template.order,
            expected_index: None,
            reference: Reference {
                grid: grid.spec(),
                params: params.iter().map(|(k, v)| (k.clone(), format!("{}", v))).collect(),
            },
            printed_coefficients: vec![],
            printed_free: vec![],
            printed_solutions: vec![],
        };
        Case::from_file(file)
    }

    pub fn from_json(text: &str) -> Result<Case> {
        Case::from_file(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Case> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {}", path.display(), e)))?;
        Case::from_json(&text)
    }

    pub fn bundled(name: &str) -> Result<Case> {
        let (_, text) = BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::Config(format!("no bundled case `{}`", name)))?;
        Case::from_json(text)
    }

    /// A bundled name (`case1`) or a path to a case file.
    pub fn resolve(spec: &str) -> Result<Case> {
        if BUNDLED.iter().any(|(n, _)| *n == spec) && !Path::new(spec).exists() {
            return Case::bundled(spec);
        }
        Case::load(Path::new(spec))
    }

    pub fn bundled_all() -> Result<Vec<Case>> {
        BUNDLED.iter().map(|(_, t)| Case::from_json(t)).collect()
    }

    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn screen_context(&self, mode: Mode, solve: SolveOptions, grid: Option<Grid>) -> ScreenContext {
        ScreenContext {
            transform: self.transform.clone(),
            grid: grid.unwrap_or(self.grid),
            params: self.params.clone(),
            mode,
            solve,
        }
    }

    /// Printed solution `id` in `(x, t)` with caption parameters applied,
    /// reference values for `p, q` where the caption is silent, and the
    /// similarity variable replaced by its definition.
    pub fn printed_solution(&self, id: &str) -> Result<Expr> {
        let sol = self
            .file
            .printed_solutions
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Error::Config(format!("case {} has no printed solution `{}`", self.name(), id)))?;
        let mut b: BTreeMap<Symbol, Expr> = BTreeMap::new();
        for (k, v) in &sol.params {
            b.insert(Symbol::new(k), parse_expr(v)?);
        }
        for (k, v) in &self.params {
            b.entry(k.clone()).or_insert_with(|| Expr::num(crate::verify::float_rational(*v)));
        }
        b.insert(self.transform.variable.clone(), self.transform.definition.clone());
        let e = substitute(&parse_expr(&sol.expr)?, &b);
        let unbound: Vec<String> = e
            .free_symbols()
            .into_iter()
            .filter(|s| !["x", "t", "pi"].contains(&s.name()))
            .map(|s| s.to_string())
            .collect();
        if !unbound.is_empty() {
            return Err(Error::Config(format!(
                "printed solution {} leaves {} unbound",
                id,
                unbound.join(", ")
            )));
        }
        Ok(e)
    }

    pub fn printed_ids(&self) -> Vec<String> {
        self.file.printed_solutions.iter().map(|s| s.id.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_cases_load() {
        let cases = Case::bundled_all().unwrap();
        assert_eq!(cases.len(), 4);
        let ids: Vec<String> = cases.iter().flat_map(|c| c.printed_ids()).collect();
        assert_eq!(ids, ["fig1a", "fig1b", "fig3a", "fig3b", "fig4a", "fig4b", "fig4c", "fig5"]);
        for c in &cases {
            for id in c.printed_ids() {
                let e = c.printed_solution(&id).unwrap();
                assert!(e.free_symbols().iter().all(|s| ["x", "t", "pi"].contains(&s.name())));
            }
        }
    }

    #[test]
    fn transforms_match_builtin() {
        assert_eq!(Case::bundled("case1").unwrap().transform, SimilarityTransform::eta());
        assert_eq!(Case::bundled("case4").unwrap().transform, SimilarityTransform::zeta());
        assert_eq!(parse_transform("zeta = x/sqrt(t)", "xi").unwrap(), SimilarityTransform::zeta());
        assert_eq!(parse_transform("eta = t/x^2", "xi").unwrap(), SimilarityTransform::eta());
    }

    #[test]
    fn inline_case_matches_bundled() {
        let c1 = Case::bundled("case1").unwrap();
        let mut params = BTreeMap::new();
        params.insert("p".to_string(), 1.0);
        params.insert("q".to_string(), 1.0);
        let c = Case::inline(c1.file.pde_text.as_deref().unwrap(), "eta = t/x^2", c1.template, c1.grid, &params).unwrap();
        assert_eq!(c.pde, c1.pde);
        assert_eq!(c.transform, c1.transform);
        assert_eq!(c.params, c1.params);
    }

    #[test]
    fn mismatched_pde_text_is_rejected() {
        let mut f: CaseFile = serde_json::from_str(BUNDLED[0].1).unwrap();
        f.pde_text = Some("u_t - (u^2)_xx = 0".into());
        assert!(matches!(Case::from_file(f), Err(Error::Config(_))));
    }
}
