use serde::Serialize;

use super::{from_usize, lit, Real};
use crate::error::{invalid, Result};

/// Least-squares fit of `ln value = intercept + slope ln n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit<T> {
    pub points: Vec<(T, T)>,
    pub slope: T,
    pub intercept: T,
    /// Euclidean norm of the log-space residuals.
    pub residual_norm: T,
    pub slope_std_err: T,
    /// Two standard errors of the slope.
    pub half_width: T,
}

impl<T: Real> ExponentFit<T> {
    pub fn contains(&self, exponent: T) -> bool {
        (self.slope - exponent).abs() <= self.half_width
    }
}

pub fn fit_exponent<T: Real>(points: &[(T, T)]) -> Result<ExponentFit<T>> {
    if points.len() < 3 {
        return invalid(format!("need at least 3 points, got {}", points.len()));
    }
    if let Some(p) = points.iter().find(|p| !(p.0 > T::zero() && p.1 > T::zero())) {
        return invalid(format!("log-log fit needs positive coordinates, got {p:?}"));
    }
    let k: T = from_usize(points.len());
    let xs: Vec<T> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<T> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().fold(T::zero(), |s, &x| s + x) / k;
    let my = ys.iter().fold(T::zero(), |s, &y| s + y) / k;
    let sxx = xs.iter().fold(T::zero(), |s, &x| s + (x - mx) * (x - mx));
    if sxx <= T::zero() {
        return invalid("all abscissae coincide");
    }
    let sxy = xs.iter().zip(&ys).fold(T::zero(), |s, (&x, &y)| s + (x - mx) * (y - my));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| y - intercept - slope * x)
        .fold(T::zero(), |s, r| s + r * r);
    let dof = k - lit(2.0);
    let slope_std_err = (rss / dof / sxx).sqrt();
    Ok(ExponentFit {
        points: points.to_vec(),
        slope,
        intercept,
        residual_norm: rss.sqrt(),
        slope_std_err,
        half_width: lit::<T>(2.0) * slope_std_err,
    })
}
