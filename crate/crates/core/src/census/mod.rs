//! Exact enumeration: self-avoiding walk counts and the exact law of `J_n`
//! under the uniform measure on all `(2d)^n` walks.

mod saw;
mod walks;

pub use saw::{
    connective_estimate, count_saw_unreduced, enumerate_saw, threshold_bstar, ConnectiveEstimate,
    SawCountTable,
};
pub use walks::{verify_silt_tail, SiltTailReport, SiltHistogram, WalkCell, WalkCensus};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::walk::{check_dim, Site, MAX_DIM};

/// Leaf-count limits for the exact enumerators.
///
/// The defaults admit `n <= 14` for the planar SAW census and `n <= 13` for
/// the full planar walk enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationBudget {
    /// Bound on `2d (2d-1)^(n-1)`, the non-reversing walk count.
    pub saw_leaves: u128,
    /// Bound on `(2d)^n`.
    pub walk_leaves: u128,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self { saw_leaves: 4 * 3u128.pow(13), walk_leaves: 4u128.pow(13) }
    }
}

impl EnumerationBudget {
    pub fn check_saw(&self, n: usize, dim: usize) -> Result<()> {
        check_dim(dim)?;
        let k = 2 * dim as u128;
        let leaves = if n == 0 { Some(1) } else { checked_pow(k - 1, n - 1).and_then(|p| p.checked_mul(k)) };
        match leaves {
            Some(l) if l <= self.saw_leaves => Ok(()),
            _ => Err(Error::ResourceLimit(format!(
                "SAW census to n = {n} in d = {dim} exceeds the budget of {} leaves",
                self.saw_leaves
            ))),
        }
    }

    pub fn check_walks(&self, n: usize, dim: usize) -> Result<()> {
        check_dim(dim)?;
        match checked_pow(2 * dim as u128, n) {
            Some(l) if l <= self.walk_leaves => Ok(()),
            _ => Err(Error::ResourceLimit(format!(
                "enumerating all {}^{n} walks exceeds the budget of {} leaves",
                2 * dim,
                self.walk_leaves
            ))),
        }
    }
}

fn checked_pow(base: u128, exp: usize) -> Option<u128> {
    (0..exp).try_fold(1u128, |acc, _| acc.checked_mul(base))
}

/// Dense box `[-n, n]^d` addressed by a flat index, used by the enumerators.
#[derive(Clone, Debug)]
struct LatticeBox {
    dim: usize,
    side: usize,
    strides: [usize; MAX_DIM],
    centre: usize,
}

impl LatticeBox {
    fn new(dim: usize, radius: usize) -> Self {
        let side = 2 * radius + 1;
        let mut strides = [0; MAX_DIM];
        let mut s = 1;
        for st in strides.iter_mut().take(dim) {
            *st = s;
            s *= side;
        }
        let centre = strides.iter().take(dim).map(|st| st * radius).sum();
        Self { dim, side, strides, centre }
    }

    fn volume(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    /// Signed index offset of each direction, in direction-index order.
    fn offsets(&self) -> Vec<isize> {
        (0..2 * self.dim)
            .map(|k| {
                let st = self.strides[k / 2] as isize;
                if k % 2 == 1 {
                    -st
                } else {
                    st
                }
            })
            .collect()
    }

    fn site(&self, index: usize) -> Site {
        let radius = (self.side / 2) as i32;
        let mut c = [0i32; MAX_DIM];
        let mut rest = index;
        for coord in c.iter_mut().take(self.dim) {
            *coord = (rest % self.side) as i32 - radius;
            rest /= self.side;
        }
        Site(c)
    }
}
