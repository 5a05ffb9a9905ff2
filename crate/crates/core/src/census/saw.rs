use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use super::{EnumerationBudget, LatticeBox};
use crate::error::{invalid, Result};
use crate::walk::check_dim;

/// Exact SAW counts `c_0 = 1, c_1, ..., c_{n_max}` in `Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SawCountTable {
    pub dim: usize,
    pub counts: Vec<BigUint>,
}

impl SawCountTable {
    pub fn n_max(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn count(&self, n: usize) -> Option<&BigUint> {
        self.counts.get(n)
    }

    /// `d^n <= c_n <= 2d (2d-1)^(n-1)` for every `n >= 1` in the table.
    pub fn within_trivial_bounds(&self) -> bool {
        let d = BigUint::from(self.dim);
        let k = BigUint::from(2 * self.dim);
        let k1 = BigUint::from(2 * self.dim - 1);
        self.counts.iter().enumerate().skip(1).all(|(n, c)| {
            let lower = d.pow(n as u32);
            let upper = &k * k1.pow(n as u32 - 1);
            &lower <= c && c <= &upper
        })
    }

    /// Pairs `(n, m)` with `c_{n+m} > c_n c_m`. Empty when submultiplicativity holds.
    pub fn submultiplicativity_violations(&self) -> Vec<(usize, usize)> {
        let top = self.n_max();
        let mut bad = Vec::new();
        for n in 1..=top {
            for m in n..=top - n {
                if self.counts[n + m] > &self.counts[n] * &self.counts[m] {
                    bad.push((n, m));
                }
            }
        }
        bad
    }
}

/// Counts self-avoiding walks up to `n_max` steps by depth-first search.
///
/// In `d >= 2` the first step is fixed along `+e_0` and the first step off
/// that axis along `+e_1`, so `c_n = 2d (1 + 2(d-1) A_n)` where `A_n` counts
/// the reduced walks. Work is split across the first-turn positions.
pub fn enumerate_saw(n_max: usize, dim: usize, budget: &EnumerationBudget) -> Result<SawCountTable> {
    budget.check_saw(n_max, dim)?;
    let mut counts = vec![BigUint::one(); n_max + 1];
    if dim == 1 {
        for c in counts.iter_mut().skip(1) {
            *c = BigUint::from(2u32);
        }
        return Ok(SawCountTable { dim, counts });
    }
    let lattice = LatticeBox::new(dim, n_max);
    let offsets = lattice.offsets();
    // prefix e_0^k e_1 for k = 1 ..= n_max - 1
    let reduced = (1..n_max)
        .into_par_iter()
        .map(|k| {
            let mut occupied = vec![false; lattice.volume()];
            let mut pos = lattice.centre;
            occupied[pos] = true;
            for _ in 0..k {
                pos = (pos as isize + offsets[0]) as usize;
                occupied[pos] = true;
            }
            pos = (pos as isize + offsets[2]) as usize;
            occupied[pos] = true;
            let mut counts = vec![0u64; n_max + 1];
            saw_dfs(&mut occupied, pos, 2, k + 1, n_max, &offsets, &mut counts);
            counts
        })
        .reduce(|| vec![0u64; n_max + 1], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    let k = 2 * dim as u64;
    for (n, c) in counts.iter_mut().enumerate().skip(1) {
        *c = BigUint::from(k) * (BigUint::one() + BigUint::from(k - 2) * BigUint::from(reduced[n]));
    }
    Ok(SawCountTable { dim, counts })
}

/// The same census without symmetry reduction: every first step is explored.
pub fn count_saw_unreduced(n_max: usize, dim: usize, budget: &EnumerationBudget) -> Result<SawCountTable> {
    budget.check_saw(n_max, dim)?;
    let lattice = LatticeBox::new(dim, n_max);
    let offsets = lattice.offsets();
    let mut occupied = vec![false; lattice.volume()];
    occupied[lattice.centre] = true;
    let mut counts = vec![0u64; n_max + 1];
    saw_dfs(&mut occupied, lattice.centre, usize::MAX, 0, n_max, &offsets, &mut counts);
    Ok(SawCountTable { dim, counts: counts.into_iter().map(BigUint::from).collect() })
}

fn saw_dfs(
    occupied: &mut [bool],
    pos: usize,
    last: usize,
    depth: usize,
    max: usize,
    offsets: &[isize],
    counts: &mut [u64],
) {
    counts[depth] += 1;
    if depth == max {
        return;
    }
    for (dir, &off) in offsets.iter().enumerate() {
        if dir == last ^ 1 {
            continue;
        }
        let next = (pos as isize + off) as usize;
        if !occupied[next] {
            occupied[next] = true;
            saw_dfs(occupied, next, dir, depth + 1, max, offsets, counts);
            occupied[next] = false;
        }
    }
}

/// Per-`n` roots `mu_n = c_n^(1/n)` and the working connective-constant estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConnectiveEstimate {
    pub roots: Vec<(usize, f64)>,
    /// `mu_{n_max}`, the estimate of `e^{nu_0}`.
    pub mu: f64,
    /// `ln mu`.
    pub nu0: f64,
}

pub fn connective_estimate(table: &SawCountTable) -> Result<ConnectiveEstimate> {
    if table.n_max() == 0 {
        return invalid("connective estimate needs at least c_1");
    }
    let roots: Vec<(usize, f64)> = table
        .counts
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, c)| (n, c.to_f64().unwrap_or(f64::INFINITY).powf(1.0 / n as f64)))
        .collect();
    let mu = roots.last().map(|r| r.1).unwrap_or(f64::NAN);
    Ok(ConnectiveEstimate { roots, mu, nu0: mu.ln() })
}

/// `B_* = (ln(2d) - nu_0) / beta`, the SILT-per-step level above which the
/// penalised mass falls below the self-avoiding mass.
pub fn threshold_bstar(beta: f64, nu0: f64, dim: usize) -> Result<f64> {
    check_dim(dim)?;
    let ln2d = (2.0 * dim as f64).ln();
    if !(beta > 0.0 && beta.is_finite()) {
        return invalid(format!("beta must be positive and finite, got {beta}"));
    }
    if !(nu0 > 0.0 && nu0 < ln2d) {
        return invalid(format!("nu0 must lie in (0, ln {}), got {nu0}", 2 * dim));
    }
    Ok((ln2d - nu0) / beta)
}
