//! Weakly self-avoiding walks on `Z^d`.
//!
//! The crate covers the Domb-Joyce path measure `exp(-beta J_n)` over simple
//! random walks: exact enumeration at small `n`, importance-reweighted and
//! pivot-MCMC sampling at moderate `n`, the self-intersection point process
//! with its cone decomposition and Palm estimators, and the analytic
//! diagnostics used to estimate the distance exponents.
//!
//! Analytic tables and fits are generic over the float type; `f64` aliases
//! are exported at the crate root.

pub mod asymptotics;
pub mod census;
pub mod cone;
pub mod ensemble;
mod error;
pub mod harness;
mod rng;
pub mod walk;

pub use error::{Error, Result};
pub use rng::SeededSource;

pub type AxTable64 = asymptotics::AxTable<f64>;
pub type RadialLaw64 = asymptotics::RadialLaw<f64>;
pub type IntegralReport64 = asymptotics::IntegralReport<f64>;
pub type ExponentFit64 = asymptotics::ExponentFit<f64>;
pub type ExponentFit32 = asymptotics::ExponentFit<f32>;
pub type Point64 = cone::Point<f64>;
