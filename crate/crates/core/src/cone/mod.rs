//! The self-intersection point process of a planar walk, its decomposition
//! into cones around equally spaced half-lines, line classes, shapes, the
//! `a_x` profile estimator, and empirical Palm estimators.
//!
//! Cones live in the plane: atoms of walks in `d > 2` are projected on their
//! first two coordinates.

mod ax;
mod classify;
mod decompose;
mod palm;
mod process;

pub use ax::{estimate_ax, estimate_ax_from, AxOptions};
pub use classify::{classify_lines, detect_shapes, LineClass, LineClassification, ShapeBand, ShapeReport};
pub use decompose::{cone_decompose, ConeDecomposition};
pub use palm::{
    palm_empty_ball, palm_marked_lines, palm_marked_points, poisson_points, PalmEstimate, PalmMarked, Point, Rect,
};
pub use process::{extract_process, IntersectionProcess};

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{invalid, Result};

/// `m` half-lines from the origin at angles `2 pi k / m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestLineSet {
    angles: Vec<f64>,
    #[serde(skip)]
    units: Vec<(f64, f64)>,
}

impl TestLineSet {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return invalid("a test set needs at least one line");
        }
        let angles: Vec<f64> = (0..m).map(|k| TAU * k as f64 / m as f64).collect();
        let units = angles
            .iter()
            .enumerate()
            .map(|(k, &t)| exact_unit(k, m).unwrap_or((t.cos(), t.sin())))
            .collect();
        Ok(Self { angles, units })
    }

    /// `ceil(v n^(1/2))` lines.
    pub fn for_length(n: usize, v: f64) -> Result<Self> {
        if !(v > 0.0 && v.is_finite()) {
            return invalid(format!("line density must be positive, got {v}"));
        }
        Self::new(((v * (n as f64).sqrt()).ceil() as usize).max(1))
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub(crate) fn unit(&self, k: usize) -> (f64, f64) {
        self.units[k]
    }
}

// Axis directions exactly, so lattice atoms on an axis tie cleanly.
fn exact_unit(k: usize, m: usize) -> Option<(f64, f64)> {
    if (4 * k) % m != 0 {
        return None;
    }
    Some(match 4 * k / m {
        0 => (1.0, 0.0),
        1 => (0.0, 1.0),
        2 => (-1.0, 0.0),
        _ => (0.0, -1.0),
    })
}
