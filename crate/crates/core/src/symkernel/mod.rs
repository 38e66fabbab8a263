//! Exact-arithmetic kernel: rationals, polynomials, rational functions and
//! expression trees.

pub mod calculus;
pub mod convert;
pub mod expr;
pub mod gcd;
pub mod poly;
pub mod ratfunc;
pub mod rational;
pub mod sexpr;
pub mod symbol;

pub use calculus::{diff, substitute, substitute1};
pub use convert::{collect, reconstruct, to_ratfunc, to_ratfunc_exact};
pub use expr::{Expr, Func, Node};
pub use poly::MultiPoly;
pub use ratfunc::RatFunc;
pub use rational::Rational;
pub use sexpr::parse_sexpr;
pub use symbol::Symbol;
