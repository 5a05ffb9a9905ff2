use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::{EnumerationBudget, LatticeBox};
use crate::error::{invalid, Result};
use crate::walk::Site;

/// Number of walks with a given `J_n` and endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WalkCell {
    pub j: u64,
    pub endpoint: Site,
    pub count: u64,
}

/// Joint law of `(J_n, S_n)` over all `(2d)^n` walks of length `n`,
/// obtained by exhaustive depth-first enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkCensus {
    pub n: usize,
    pub dim: usize,
    /// Sorted by `(j, endpoint)`.
    pub cells: Vec<WalkCell>,
}

impl WalkCensus {
    pub fn enumerate(n: usize, dim: usize, budget: &EnumerationBudget) -> Result<Self> {
        budget.check_walks(n, dim)?;
        let lattice = LatticeBox::new(dim, n);
        let offsets = lattice.offsets();
        let j_max = n * (n + 1) / 2;
        let width = j_max + 1;
        let k = offsets.len();

        // tasks are the first two steps (or the whole walk when n < 2)
        let depth = n.min(2);
        let prefixes: Vec<Vec<usize>> = (0..k.pow(depth as u32))
            .map(|mut code| {
                (0..depth)
                    .map(|_| {
                        let d = code % k;
                        code /= k;
                        d
                    })
                    .collect()
            })
            .collect();

        let dense = prefixes
            .par_iter()
            .map(|prefix| {
                let mut visits = vec![0u16; lattice.volume()];
                let mut table = vec![0u64; lattice.volume() * width];
                let mut pos = lattice.centre;
                visits[pos] = 1;
                let mut j = 0usize;
                for &d in prefix {
                    pos = (pos as isize + offsets[d]) as usize;
                    j += visits[pos] as usize;
                    visits[pos] += 1;
                }
                let mut walker = Walker { visits: &mut visits, table: &mut table, offsets: &offsets, width, n };
                walker.descend(pos, depth, j);
                table
            })
            .reduce(
                || vec![0u64; lattice.volume() * width],
                |mut a, b| {
                    a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                    a
                },
            );

        let mut cells = Vec::new();
        for j in 0..width {
            for idx in 0..lattice.volume() {
                let count = dense[idx * width + j];
                if count > 0 {
                    cells.push(WalkCell { j: j as u64, endpoint: lattice.site(idx), count });
                }
            }
        }
        cells.sort_by(|a, b| (a.j, a.endpoint).cmp(&(b.j, b.endpoint)));
        Ok(Self { n, dim, cells })
    }

    pub fn total(&self) -> BigUint {
        self.cells.iter().map(|c| BigUint::from(c.count)).sum()
    }

    /// Marginal law of `J_n`.
    pub fn histogram(&self) -> SiltHistogram {
        let mut cells: BTreeMap<u64, BigUint> = BTreeMap::new();
        for c in &self.cells {
            *cells.entry(c.j).or_insert_with(BigUint::zero) += c.count;
        }
        SiltHistogram { n: self.n, dim: self.dim, cells }
    }

    /// Sums `count * weight(J) * f(endpoint)` over all cells.
    pub fn weighted_sum(&self, weight: impl Fn(u64) -> f64, f: impl Fn(&Site) -> f64) -> f64 {
        self.cells.iter().map(|c| c.count as f64 * weight(c.j) * f(&c.endpoint)).sum()
    }
}

struct Walker<'a> {
    visits: &'a mut [u16],
    table: &'a mut [u64],
    offsets: &'a [isize],
    width: usize,
    n: usize,
}

impl Walker<'_> {
    fn descend(&mut self, pos: usize, depth: usize, j: usize) {
        if depth == self.n {
            self.table[pos * self.width + j] += 1;
            return;
        }
        for k in 0..self.offsets.len() {
            let next = (pos as isize + self.offsets[k]) as usize;
            let m = self.visits[next];
            self.visits[next] = m + 1;
            self.descend(next, depth + 1, j + m as usize);
            self.visits[next] = m;
        }
    }
}

/// Exact distribution of `J_n` under the uniform measure on walks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SiltHistogram {
    pub n: usize,
    pub dim: usize,
    /// Sparse `J -> number of walks`.
    pub cells: BTreeMap<u64, BigUint>,
}

impl SiltHistogram {
    pub fn enumerate(n: usize, dim: usize, budget: &EnumerationBudget) -> Result<Self> {
        Ok(WalkCensus::enumerate(n, dim, budget)?.histogram())
    }

    pub fn total(&self) -> BigUint {
        self.cells.values().sum()
    }

    pub fn count(&self, j: u64) -> BigUint {
        self.cells.get(&j).cloned().unwrap_or_default()
    }

    fn total_f64(&self) -> f64 {
        (2.0 * self.dim as f64).powi(self.n as i32)
    }

    fn mass(&self, pred: impl Fn(u64) -> bool) -> f64 {
        let hits: BigUint = self.cells.iter().filter(|(j, _)| pred(**j)).map(|(_, c)| c).sum();
        hits.to_f64().unwrap_or(f64::NAN) / self.total_f64()
    }

    pub fn prob_eq(&self, j: u64) -> f64 {
        self.mass(|k| k == j)
    }

    pub fn prob_le(&self, t: f64) -> f64 {
        self.mass(|k| k as f64 <= t)
    }

    pub fn prob_gt(&self, t: f64) -> f64 {
        self.mass(|k| k as f64 > t)
    }

    /// `E_0(exp(-beta J_n) 1{pred(J_n)})`.
    pub fn penalised_mass(&self, beta: f64, pred: impl Fn(u64) -> bool) -> f64 {
        let total = self.total_f64();
        self.cells
            .iter()
            .filter(|(j, _)| pred(**j))
            .map(|(&j, c)| c.to_f64().unwrap_or(f64::NAN) * (-beta * j as f64).exp() / total)
            .sum()
    }
}

/// Exact comparison `E_0(e^{-beta J} 1{J > Bn})` against `E_0(e^{-beta J} 1{J = 0})`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiltTailReport {
    pub n: usize,
    pub beta: f64,
    pub b: f64,
    pub b_star: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs < rhs`.
    pub holds: bool,
    /// `b > b_star`; when false the comparison carries no claim.
    pub precondition_met: bool,
}

pub fn verify_silt_tail(hist: &SiltHistogram, beta: f64, b: f64, nu0: f64) -> Result<SiltTailReport> {
    if !(beta > 0.0) {
        return invalid(format!("beta must be positive, got {beta}"));
    }
    let b_star = super::threshold_bstar(beta, nu0, hist.dim)?;
    let level = b * hist.n as f64;
    let lhs = hist.penalised_mass(beta, |j| j as f64 > level);
    let rhs = hist.penalised_mass(beta, |j| j == 0);
    Ok(SiltTailReport { n: hist.n, beta, b, b_star, lhs, rhs, holds: lhs < rhs, precondition_met: b > b_star })
}
