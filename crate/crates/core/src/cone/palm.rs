use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rustc_hash::FxHashMap;
use serde::Serialize;

use super::{cone_decompose, IntersectionProcess, TestLineSet};
use crate::asymptotics::{from_usize, Real};
use crate::error::{invalid, Error, Result};
use crate::SeededSource;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    fn dist_sq(&self, other: &Self) -> T {
        let (dx, dy) = (self.x - other.x, self.y - other.y);
        dx * dx + dy * dy
    }
}

/// Axis-aligned box `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rect<T> {
    pub x0: T,
    pub y0: T,
    pub x1: T,
    pub y1: T,
}

impl<T: Real> Rect<T> {
    pub fn new(x0: T, y0: T, x1: T, y1: T) -> Result<Self> {
        if !(x0 <= x1 && y0 <= y1) {
            return invalid("box corners out of order");
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    pub fn area(&self) -> T {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    /// `p` lies in the box at distance at least `margin` from its boundary.
    pub fn contains_inner(&self, p: &Point<T>, margin: T) -> bool {
        p.x >= self.x0 + margin && p.x <= self.x1 - margin && p.y >= self.y0 + margin && p.y <= self.y1 - margin
    }
}

/// Uniform grid of cell size `r` over a point set.
struct CellIndex<'a, T> {
    points: &'a [Point<T>],
    r: T,
    cells: FxHashMap<(i64, i64), Vec<usize>>,
}

impl<'a, T: Real> CellIndex<'a, T> {
    fn new(points: &'a [Point<T>], r: T) -> Self {
        let mut cells: FxHashMap<(i64, i64), Vec<usize>> = FxHashMap::default();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::cell(p, r)).or_default().push(i);
        }
        Self { points, r, cells }
    }

    fn cell(p: &Point<T>, r: T) -> (i64, i64) {
        let c = |v: T| (v / r).floor().to_i64().unwrap_or(i64::MAX);
        (c(p.x), c(p.y))
    }

    /// Number of other points at distance `< r` from point `i`.
    fn neighbours(&self, i: usize) -> usize {
        let p = &self.points[i];
        let (cx, cy) = Self::cell(p, self.r);
        let r2 = self.r * self.r;
        let mut count = 0;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = self.cells.get(&(cx + dx, cy + dy)) {
                    count += bucket.iter().filter(|&&j| j != i && p.dist_sq(&self.points[j]) < r2).count();
                }
            }
        }
        count
    }
}

fn check_radius<T: Real>(r: T) -> Result<()> {
    if !(r > T::zero() && r.is_finite()) {
        return invalid(format!("radius must be positive, got {r:?}"));
    }
    Ok(())
}

/// Minus-sampled centers: points of `window` at distance `>= r` from its boundary.
fn centers<T: Real>(points: &[Point<T>], window: &Rect<T>, r: T) -> Result<Vec<usize>> {
    let inner: Vec<usize> = (0..points.len()).filter(|&i| window.contains_inner(&points[i], r)).collect();
    if inner.is_empty() {
        return Err(Error::UndefinedEstimate("no points in the minus-sampled window".into()));
    }
    Ok(inner)
}

/// Empirical Palm probability with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PalmEstimate<T> {
    pub fraction: T,
    pub centers: usize,
    pub std_err: T,
}

/// Fraction of points whose nearest other point lies at distance `>= r`.
pub fn palm_empty_ball<T: Real>(points: &[Point<T>], window: &Rect<T>, r: T) -> Result<PalmEstimate<T>> {
    check_radius(r)?;
    let inner = centers(points, window, r)?;
    let index = CellIndex::new(points, r);
    let empty = inner.iter().filter(|&&i| index.neighbours(i) == 0).count();
    let k: T = from_usize(inner.len());
    let p = from_usize::<T>(empty) / k;
    Ok(PalmEstimate { fraction: p, centers: inner.len(), std_err: (p * (T::one() - p) / k).sqrt() })
}

/// Points weighted by `exp(-beta k)` for `k` neighbours within `r`, kept
/// when `k` lies in `[s1, s2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PalmMarked<T> {
    pub sum: T,
    pub centers: usize,
    /// `sum / centers`.
    pub average: T,
    pub std_err: T,
}

pub fn palm_marked_points<T: Real>(
    points: &[Point<T>],
    window: &Rect<T>,
    r: T,
    beta: T,
    band: (usize, usize),
) -> Result<PalmMarked<T>> {
    check_radius(r)?;
    if beta < T::zero() {
        return invalid("beta must be nonnegative");
    }
    let inner = centers(points, window, r)?;
    let index = CellIndex::new(points, r);
    let marks: Vec<T> = inner
        .iter()
        .map(|&i| {
            let k = index.neighbours(i);
            if (band.0..=band.1).contains(&k) {
                (-beta * from_usize(k)).exp()
            } else {
                T::zero()
            }
        })
        .collect();
    let count: T = from_usize(marks.len());
    let sum = marks.iter().fold(T::zero(), |s, &w| s + w);
    let average = sum / count;
    let var = marks.iter().fold(T::zero(), |s, &w| s + (w - average) * (w - average)) / count;
    Ok(PalmMarked { sum, centers: marks.len(), average, std_err: (var / count).sqrt() })
}

/// `sum_{L in subset} exp(-beta |C_L|)`, zero for an empty subset.
pub fn palm_marked_lines(
    process: &IntersectionProcess,
    lines: &TestLineSet,
    subset: &[usize],
    beta: f64,
) -> Result<f64> {
    if let Some(&k) = subset.iter().find(|&&k| k >= lines.len()) {
        return invalid(format!("line {k} outside a set of {}", lines.len()));
    }
    let dec = cone_decompose(process, lines, 0);
    Ok(subset.iter().map(|&k| (-beta * dec.mass(k)).exp()).sum())
}

/// Homogeneous Poisson sample of intensity `lambda` in `window`.
pub fn poisson_points(lambda: f64, window: &Rect<f64>, src: SeededSource) -> Result<Vec<Point<f64>>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return invalid(format!("intensity must be positive, got {lambda}"));
    }
    let mean = lambda * window.area();
    if mean <= 0.0 {
        return Ok(Vec::new());
    }
    let mut rng = src.rng();
    let dist = Poisson::new(mean).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let count = dist.sample(&mut rng) as usize;
    Ok((0..count)
        .map(|_| {
            let x = window.x0 + (window.x1 - window.x0) * rng.random::<f64>();
            let y = window.y0 + (window.y1 - window.y0) * rng.random::<f64>();
            Point::new(x, y)
        })
        .collect())
}
