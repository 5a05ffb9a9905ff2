use serde::Serialize;

use super::ConeDecomposition;
use crate::error::{invalid, Error, Result};

/// Relative slack on interval ends so that boundary values computed through
/// `powf` stay inside closed intervals.
const EDGE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LineClass {
    /// `2|C_L|` in `[a1 n^(1/2 - delta), a2 n^(1/2 + delta)]`.
    HalfBand,
    /// `2|C_L|` in `(0, a1 n^(1/2 - delta))`.
    Minus,
    /// `2|C_L| > a2 n^(1/2 + delta)`.
    Plus,
    /// `|C_L| = 0`.
    Empty,
}

impl LineClass {
    pub fn label(self) -> &'static str {
        match self {
            LineClass::HalfBand => "half_band",
            LineClass::Minus => "minus",
            LineClass::Plus => "plus",
            LineClass::Empty => "empty",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LineClassification {
    pub n: usize,
    pub a1: f64,
    pub a2: f64,
    pub delta: f64,
    /// Class of every line, by line index.
    pub classes: Vec<LineClass>,
    /// `L_{1/2}`: `2|C_L|` in `[a1 n^(1/2), a2 n^(1/2)]`.
    pub half: Vec<usize>,
    twice_mass: Vec<f64>,
}

impl LineClassification {
    pub fn members(&self, class: LineClass) -> Vec<usize> {
        (0..self.classes.len()).filter(|&k| self.classes[k] == class).collect()
    }

    /// `L_r`: `2|C_L|` in `[a1 n^r, a2 n^r]`.
    pub fn class_r(&self, r: f64) -> Vec<usize> {
        let s = (self.n as f64).powf(r);
        in_closed(&self.twice_mass, self.a1 * s, self.a2 * s)
    }
}

fn in_closed(twice_mass: &[f64], lo: f64, hi: f64) -> Vec<usize> {
    (0..twice_mass.len())
        .filter(|&k| twice_mass[k] > 0.0 && twice_mass[k] >= lo * (1.0 - EDGE) && twice_mass[k] <= hi * (1.0 + EDGE))
        .collect()
}

fn check_params(a1: f64, a2: f64, delta: f64) -> Result<()> {
    if !(a1 > 0.0 && a1 < a2 && a2.is_finite()) {
        return invalid(format!("need 0 < a1 < a2, got a1 = {a1}, a2 = {a2}"));
    }
    if !(0.0..0.5).contains(&delta) {
        return invalid(format!("delta must lie in [0, 1/2), got {delta}"));
    }
    Ok(())
}

fn twice_masses(dec: &ConeDecomposition) -> Vec<f64> {
    dec.masses().into_iter().map(|c| 2.0 * c).collect()
}

pub fn classify_lines(dec: &ConeDecomposition, a1: f64, a2: f64, delta: f64) -> Result<LineClassification> {
    check_params(a1, a2, delta)?;
    let n = dec.n as f64;
    let lo = a1 * n.powf(0.5 - delta);
    let hi = a2 * n.powf(0.5 + delta);
    let twice_mass = twice_masses(dec);
    let classes = twice_mass
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            if dec.is_empty_line(k) {
                LineClass::Empty
            } else if v < lo * (1.0 - EDGE) {
                LineClass::Minus
            } else if v <= hi * (1.0 + EDGE) {
                LineClass::HalfBand
            } else {
                LineClass::Plus
            }
        })
        .collect();
    let s = n.sqrt();
    let half = in_closed(&twice_mass, a1 * s, a2 * s);
    Ok(LineClassification { n: dec.n, a1, a2, delta, classes, half, twice_mass })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShapeBand {
    pub r: f64,
    /// Bounds on `2|C_L|`; the first band is open below and the last open above.
    pub lo: f64,
    pub hi: f64,
    pub sum: f64,
    pub lines: usize,
    pub qualifies: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShapeReport {
    pub a1: f64,
    pub a2: f64,
    pub delta: f64,
    pub rho: f64,
    /// `J_n^(1 - rho) / 2`.
    pub threshold: f64,
    pub bands: Vec<ShapeBand>,
    pub circular: bool,
}

impl ShapeReport {
    /// Band starts `r` of the qualifying bands.
    pub fn shapes(&self) -> Vec<f64> {
        self.bands.iter().filter(|b| b.qualifies).map(|b| b.r).collect()
    }
}

/// Band starts `0, step, 2 step, ...` up to 1 inclusive, `step = delta`
/// (`1/2` when `delta = 0`).
fn band_grid(delta: f64) -> Vec<f64> {
    let step = if delta > 0.0 { delta } else { 0.5 };
    let k = (1.0 / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=k).map(|i| i as f64 * step).collect();
    if grid.last().is_some_and(|&r| r < 1.0 - 1e-9) {
        grid.push(1.0);
    }
    grid
}

/// Bands `[r, r + delta]` whose lines (`2|C_L|` in `[a1 n^r, a2 n^(r+delta)]`)
/// carry at least `J_n^(1 - rho) / 2` of the mass.
pub fn detect_shapes(dec: &ConeDecomposition, a1: f64, a2: f64, delta: f64, rho: f64) -> Result<ShapeReport> {
    check_params(a1, a2, delta)?;
    if !(0.0..=1.0).contains(&rho) {
        return invalid(format!("rho must lie in [0, 1], got {rho}"));
    }
    if dec.j == 0 {
        return Err(Error::Degenerate("shape of an empty intersection process".into()));
    }
    let n = dec.n as f64;
    let threshold = 0.5 * (dec.j as f64).powf(1.0 - rho);
    let twice_mass = twice_masses(dec);
    let grid = band_grid(delta);
    let last = grid.len() - 1;
    let bands: Vec<ShapeBand> = grid
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let lo = if i == 0 { 0.0 } else { a1 * n.powf(r) };
            let hi = if i == last { f64::INFINITY } else { a2 * n.powf(r + delta) };
            let members = in_closed(&twice_mass, lo, hi);
            let sum = members.iter().map(|&k| twice_mass[k] / 2.0).sum::<f64>();
            ShapeBand { r, lo, hi, sum, lines: members.len(), qualifies: sum >= threshold * (1.0 - EDGE) }
        })
        .collect();
    let circular = bands.iter().any(|b| b.qualifies && b.r <= 0.5 + 1e-12 && 0.5 <= b.r + delta + 1e-12);
    Ok(ShapeReport { a1, a2, delta, rho, threshold, bands, circular })
}

#[cfg(test)]
mod tests {
    use super::super::TestLineSet;
    use super::*;
    use proptest::prelude::*;

    fn dec(n: usize, masses: &[u128]) -> ConeDecomposition {
        ConeDecomposition {
            n,
            j: masses.iter().sum::<u128>() as u64,
            lines: TestLineSet::new(masses.len()).unwrap(),
            numerators: masses.to_vec(),
            denominator: 1,
        }
    }

    #[test]
    fn classification_examples() {
        let c = classify_lines(&dec(16, &[0, 0, 0]), 1.0, 2.0, 0.0).unwrap();
        assert!(c.classes.iter().all(|&k| k == LineClass::Empty));
        let c = classify_lines(&dec(16, &[2, 0]), 1.0, 2.0, 0.0).unwrap();
        assert_eq!(c.classes[0], LineClass::HalfBand);
        assert_eq!(c.half, vec![0]);
        let c = classify_lines(&dec(16, &[16, 1]), 1.0, 2.0, 0.1).unwrap();
        assert_eq!(c.classes, vec![LineClass::Plus, LineClass::Minus]);
        assert!(classify_lines(&dec(16, &[1]), 2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn shape_examples() {
        let s = detect_shapes(&dec(16, &[8, 8, 0, 0]), 1.0, 2.0, 0.0, 0.1).unwrap();
        assert_eq!(s.shapes(), vec![1.0]);
        assert!(!s.circular);
        // 2|C| = a1 n^(1/2) = 4 on the only line
        let s = detect_shapes(&dec(16, &[2, 0, 0]), 1.0, 2.0, 0.1, 0.1).unwrap();
        assert!(s.circular);
        let s = detect_shapes(&dec(16, &[2, 16]), 0.5, 3.0, 0.25, 0.5).unwrap();
        assert!(s.shapes().len() >= 2);
        assert!(matches!(detect_shapes(&dec(16, &[0, 0]), 1.0, 2.0, 0.1, 0.1), Err(Error::Degenerate(_))));
    }

    #[test]
    fn grids() {
        assert_eq!(band_grid(0.0), vec![0.0, 0.5, 1.0]);
        assert_eq!(band_grid(0.25).len(), 5);
        assert_eq!(*band_grid(0.3).last().unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn classes_partition(masses in proptest::collection::vec(0u128..200, 1..40), n in 1usize..5000, delta in 0.0f64..0.49) {
            let d = dec(n, &masses);
            let c = classify_lines(&d, 0.7, 2.5, delta).unwrap();
            let total: usize = [LineClass::HalfBand, LineClass::Minus, LineClass::Plus, LineClass::Empty]
                .iter()
                .map(|&k| c.members(k).len())
                .sum();
            prop_assert_eq!(total, masses.len());
            prop_assert!(c.half.iter().all(|&k| c.classes[k] == LineClass::HalfBand));
        }
    }
}
