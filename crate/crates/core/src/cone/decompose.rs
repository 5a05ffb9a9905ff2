use num_integer::Integer;
use serde::Serialize;

use super::{IntersectionProcess, TestLineSet};

/// Per-line cone masses `|C_L|`, stored exactly as `numerators[k] / denominator`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeDecomposition {
    pub n: usize,
    /// `J_n` of the source process.
    pub j: u64,
    pub lines: TestLineSet,
    pub numerators: Vec<u128>,
    /// Least common multiple of the tie sizes met while splitting atoms.
    pub denominator: u128,
}

impl ConeDecomposition {
    pub fn mass(&self, k: usize) -> f64 {
        self.numerators[k] as f64 / self.denominator as f64
    }

    pub fn masses(&self) -> Vec<f64> {
        (0..self.numerators.len()).map(|k| self.mass(k)).collect()
    }

    /// `sum_L |C_L| = J_n` in exact arithmetic.
    pub fn is_conserved(&self) -> bool {
        self.numerators.iter().sum::<u128>() == self.j as u128 * self.denominator
    }

    pub fn is_empty_line(&self, k: usize) -> bool {
        self.numerators[k] == 0
    }
}

/// Distance from `p` to the half-line from the origin along unit vector `u`.
fn ray_distance(p: (f64, f64), u: (f64, f64)) -> f64 {
    let t = p.0 * u.0 + p.1 * u.1;
    if t >= 0.0 {
        (p.0 * u.1 - p.1 * u.0).abs()
    } else {
        p.0.hypot(p.1)
    }
}

/// Assigns every atom to its nearest half-line; ties share the atom's mass
/// equally. `n` is the walk length the classes are later scaled by.
pub fn cone_decompose(process: &IntersectionProcess, lines: &TestLineSet, n: usize) -> ConeDecomposition {
    let m = lines.len();
    let mut ties: Vec<(u64, Vec<usize>)> = Vec::with_capacity(process.atoms.len());
    let mut dist = vec![0.0; m];
    let mut denominator = 1u128;
    for (site, &mult) in &process.atoms {
        let p = (site.0[0] as f64, site.0[1] as f64);
        for (k, d) in dist.iter_mut().enumerate() {
            *d = ray_distance(p, lines.unit(k));
        }
        let best = dist.iter().copied().fold(f64::INFINITY, f64::min);
        let tol = 1e-9 * (1.0 + p.0.hypot(p.1));
        let nearest: Vec<usize> = (0..m).filter(|&k| dist[k] <= best + tol).collect();
        denominator = denominator.lcm(&(nearest.len() as u128));
        ties.push((mult, nearest));
    }
    let mut numerators = vec![0u128; m];
    for (mult, nearest) in ties {
        let share = mult as u128 * (denominator / nearest.len() as u128);
        for k in nearest {
            numerators[k] += share;
        }
    }
    ConeDecomposition { n, j: process.total, lines: lines.clone(), numerators, denominator }
}
