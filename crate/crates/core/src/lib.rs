//! Hecke eigenvalue arithmetic for level-one cusp forms and experiments on
//! sums of `λ_f(n)^4`: exact Ramanujan τ, Dirichlet characters, formal
//! Dirichlet series, k-full kernels and progression / shifted sums.

pub mod charmod;
pub mod dseries;
pub mod eigencore;
pub mod error;
pub mod kfull;
mod ntt;
pub mod numerics;
pub mod sumlab;

pub use error::{LabError, Result};
