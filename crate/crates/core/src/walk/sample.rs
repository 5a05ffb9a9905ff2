use rand::Rng;

use super::{check_dim, check_len, Direction, LatticePath};
use crate::error::Result;
use crate::SeededSource;

/// Simple random walk of `n` steps in `Z^d`, each step uniform over the `2d`
/// unit directions.
pub fn sample_srw(n: usize, dim: usize, src: SeededSource) -> Result<LatticePath> {
    sample_srw_with(&mut src.rng(), n, dim)
}

/// [`sample_srw`] drawing from a caller-owned generator.
pub fn sample_srw_with<R: Rng + ?Sized>(rng: &mut R, n: usize, dim: usize) -> Result<LatticePath> {
    check_dim(dim)?;
    check_len(n)?;
    let k = 2 * dim as u32;
    let steps = (0..n)
        .map(|_| Direction::from_index(rng.random_range(0..k) as usize, dim))
        .collect::<Result<Vec<_>>>()?;
    LatticePath::new(dim, steps)
}
