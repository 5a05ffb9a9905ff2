use serde::Serialize;

use super::Penalty;
use crate::census::{EnumerationBudget, WalkCensus};
use crate::error::Result;

/// Exact `E_0 exp(-beta J_n)`, `E_beta chi_n` and `E_beta chi_n^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExactExpectations {
    pub n: usize,
    pub dim: usize,
    pub beta: Penalty,
    pub partition: f64,
    pub mean_chi: f64,
    pub mean_chi2: f64,
}

impl ExactExpectations {
    pub fn from_census(census: &WalkCensus, beta: Penalty) -> Self {
        let weight = |j: u64| beta.weight(j);
        let z = census.weighted_sum(weight, |_| 1.0);
        let total = (2.0 * census.dim as f64).powi(census.n as i32);
        Self {
            n: census.n,
            dim: census.dim,
            beta,
            partition: z / total,
            mean_chi: census.weighted_sum(weight, |s| s.norm()) / z,
            mean_chi2: census.weighted_sum(weight, |s| s.norm_sq() as f64) / z,
        }
    }
}

/// Sums over all `(2d)^n` walks with weights `exp(-beta J_n)`.
pub fn exact_expectations(n: usize, dim: usize, beta: Penalty, budget: &EnumerationBudget) -> Result<ExactExpectations> {
    let census = WalkCensus::enumerate(n, dim, budget)?;
    Ok(ExactExpectations::from_census(&census, beta))
}
