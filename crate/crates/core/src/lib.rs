//! Exact computer algebra for the quantum distribution algebras `D_{λ,N}(sl2)`
//! at an odd root of unity, their modules, the `u_λ(sl2)`-comodule structure,
//! and the truncated hyperalgebra of `SL2` in characteristic `p`.

pub mod algebra;
pub mod arith;
pub mod cache;
pub mod expr;
pub mod format;
pub mod hopf;
pub mod hyper;
pub mod linalg;
pub mod qnum;
pub mod rep;
pub mod verify;
