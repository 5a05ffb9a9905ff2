//! Nearest-neighbour lattice paths on `Z^d` and their exact functionals.

mod codec;
mod functionals;
mod repetition;
mod sample;

pub use codec::PackedSteps;
pub use functionals::{endpoint_distance, hull_radius, occupancy, silt_count, silt_count_sites};
pub use repetition::insert_repetitions;
pub use sample::{sample_srw, sample_srw_with};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Largest supported lattice dimension.
pub const MAX_DIM: usize = 4;

/// Hard cap on path length. Keeps every coordinate inside `i16`, which the
/// packed site keys rely on.
pub const MAX_STEPS: usize = i16::MAX as usize;

/// A point of `Z^d`, `d <= MAX_DIM`. Unused trailing coordinates stay zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site(pub [i32; MAX_DIM]);

impl Site {
    pub const ORIGIN: Site = Site([0; MAX_DIM]);

    pub fn planar(x: i32, y: i32) -> Self {
        Site([x, y, 0, 0])
    }

    #[inline]
    pub fn step(self, dir: Direction) -> Self {
        let mut c = self.0;
        c[dir.axis()] += if dir.is_negative() { -1 } else { 1 };
        Site(c)
    }

    #[inline]
    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|&c| (c as i64) * (c as i64)).sum()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    /// Fixed-width key: 16 bits per coordinate. Injective for coordinates in
    /// `i16` range, which `MAX_STEPS` guarantees for paths from the origin.
    #[inline]
    pub fn key(&self) -> u64 {
        let c = &self.0;
        (c[0] as u16 as u64)
            | ((c[1] as u16 as u64) << 16)
            | ((c[2] as u16 as u64) << 32)
            | ((c[3] as u16 as u64) << 48)
    }

    #[inline]
    pub fn add(self, other: Site) -> Site {
        let (a, b) = (self.0, other.0);
        Site([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
    }

    #[inline]
    pub fn sub(self, other: Site) -> Site {
        let (a, b) = (self.0, other.0);
        Site([a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]])
    }

    /// The direction taking `self` to `next`, if they are lattice neighbours.
    pub fn direction_to(&self, next: &Site) -> Option<Direction> {
        let diff = next.sub(*self);
        let mut found = None;
        for (axis, &c) in diff.0.iter().enumerate() {
            match c {
                0 => {}
                1 | -1 if found.is_none() => found = Some(Direction::new(axis, c < 0)),
                _ => return None,
            }
        }
        found
    }
}

/// One of the `2d` unit steps, encoded as `2 * axis + (negative as u8)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Direction(u8);

impl Direction {
    pub const EAST: Direction = Direction(0);
    pub const WEST: Direction = Direction(1);
    pub const NORTH: Direction = Direction(2);
    pub const SOUTH: Direction = Direction(3);

    #[inline]
    pub fn new(axis: usize, negative: bool) -> Self {
        Direction((2 * axis + negative as usize) as u8)
    }

    pub fn from_index(index: usize, dim: usize) -> Result<Self> {
        if index >= 2 * dim {
            return invalid(format!("direction index {index} out of range for d = {dim}"));
        }
        Ok(Direction(index as u8))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn axis(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub fn is_negative(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn reverse(self) -> Self {
        Direction(self.0 ^ 1)
    }

    pub fn all(dim: usize) -> impl Iterator<Item = Direction> {
        (0..2 * dim as u8).map(Direction)
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return invalid(format!("dimension must be in 1..={MAX_DIM}, got {dim}"));
    }
    Ok(())
}

pub(crate) fn check_len(n: usize) -> Result<()> {
    if n > MAX_STEPS {
        return invalid(format!("path length {n} exceeds the hard cap {MAX_STEPS}"));
    }
    Ok(())
}

/// A walk `S_0 = 0, S_1, ..., S_n` stored as its step sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePath {
    dim: usize,
    steps: Vec<Direction>,
}

impl LatticePath {
    pub fn new(dim: usize, steps: Vec<Direction>) -> Result<Self> {
        check_dim(dim)?;
        check_len(steps.len())?;
        if let Some(bad) = steps.iter().find(|s| s.index() >= 2 * dim) {
            return invalid(format!("step {bad:?} is not a unit direction of Z^{dim}"));
        }
        Ok(Self { dim, steps })
    }

    /// Builds a path from its site sequence. The first site must be the
    /// origin and consecutive sites must be lattice neighbours.
    pub fn from_sites(dim: usize, sites: &[Site]) -> Result<Self> {
        check_dim(dim)?;
        match sites.first() {
            None => return invalid("a path has at least one site"),
            Some(s) if *s != Site::ORIGIN => return invalid("paths start at the origin"),
            _ => {}
        }
        let mut steps = Vec::with_capacity(sites.len() - 1);
        for (k, w) in sites.windows(2).enumerate() {
            match w[0].direction_to(&w[1]) {
                Some(d) if d.axis() < dim => steps.push(d),
                _ => return invalid(format!("sites {k} and {} are not neighbours", k + 1)),
            }
        }
        Self::new(dim, steps)
    }

    /// The zero-step path.
    pub fn trivial(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    /// Straight path of `n` steps along the positive first axis.
    pub fn straight(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, vec![Direction::EAST; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of steps `n`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[Direction] {
        &self.steps
    }

    pub fn site_iter(&self) -> impl Iterator<Item = Site> + '_ {
        std::iter::once(Site::ORIGIN).chain(self.steps.iter().scan(Site::ORIGIN, |s, &d| {
            *s = s.step(d);
            Some(*s)
        }))
    }

    /// Expands the step sequence into `S_0, ..., S_n`.
    pub fn sites(&self) -> Vec<Site> {
        self.site_iter().collect()
    }

    pub fn endpoint(&self) -> Site {
        self.steps.iter().fold(Site::ORIGIN, |s, &d| s.step(d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sites_round_trip() {
        let p = LatticePath::new(2, vec![Direction::EAST, Direction::NORTH, Direction::WEST]).unwrap();
        let sites = p.sites();
        assert_eq!(sites, vec![Site::planar(0, 0), Site::planar(1, 0), Site::planar(1, 1), Site::planar(0, 1)]);
        assert_eq!(LatticePath::from_sites(2, &sites).unwrap(), p);
        assert_eq!(p.endpoint(), Site::planar(0, 1));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(LatticePath::new(0, vec![]).is_err());
        assert!(LatticePath::new(2, vec![Direction::from_index(3, 2).unwrap(), Direction(4)]).is_err());
        assert!(LatticePath::from_sites(2, &[Site::planar(1, 0)]).is_err());
        assert!(LatticePath::from_sites(2, &[Site::ORIGIN, Site::planar(1, 1)]).is_err());
        assert!(LatticePath::from_sites(1, &[Site::ORIGIN, Site::planar(0, 1)]).is_err());
        assert!(Direction::from_index(4, 2).is_err());
    }

    #[test]
    fn key_is_injective_near_extremes() {
        let a = Site([-1, 0, 0, 0]);
        let b = Site([i16::MAX as i32, 0, 0, 0]);
        let c = Site([0, -1, 0, 0]);
        assert_ne!(a.key(), b.key());
        assert_ne!(a.key(), c.key());
        assert_ne!(Site::ORIGIN.key(), a.key());
    }
}
