use serde::Serialize;

use crate::ensemble::WeightedEnsemble;
use crate::error::{Error, Result};

/// Tail counts below this at the last grid point raise a coverage warning.
const COVERAGE_FLOOR: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HullRow {
    pub x: f64,
    /// `P(R_n >= x)`.
    pub tail_r: f64,
    /// `P(chi_n >= x)`.
    pub tail_chi: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HullReport {
    pub rows: Vec<HullRow>,
    /// `R_n >= chi_n` on every record.
    pub pathwise: bool,
    pub lower_holds: bool,
    pub upper_holds: bool,
    pub upper_limit: f64,
    pub coverage_warning: bool,
}

/// Weighted tails of `R_n` and `chi_n` on `points` equally spaced values up
/// to the `quantile` of `chi_n`, with the predicates
/// `1 <= ratio <= 2 (1 + slack)`.
pub fn report_convex_hull(ens: &WeightedEnsemble, slack: f64, points: usize, quantile: f64) -> Result<HullReport> {
    if ens.is_empty() || ens.total_weight <= 0.0 {
        return Err(Error::Degenerate("empty ensemble".into()));
    }
    if points == 0 || !(0.0..=1.0).contains(&quantile) {
        return Err(Error::InvalidArgument("need points > 0 and quantile in [0, 1]".into()));
    }
    let mut by_chi: Vec<(f64, f64)> = ens.records.iter().map(|r| (r.chi, r.weight)).collect();
    by_chi.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut acc = 0.0;
    let x_max = by_chi
        .iter()
        .find(|&&(_, w)| {
            acc += w;
            acc >= quantile * ens.total_weight
        })
        .map_or(by_chi[by_chi.len() - 1].0, |p| p.0);
    let tail = |x: f64, f: &dyn Fn(&crate::ensemble::Record) -> f64| -> (f64, usize) {
        let (mut w, mut k) = (0.0, 0);
        for r in ens.records.iter().filter(|r| f(r) >= x) {
            w += r.weight;
            k += 1;
        }
        (w / ens.total_weight, k)
    };
    let mut rows = Vec::with_capacity(points);
    let mut last_count = usize::MAX;
    for i in 1..=points {
        let x = x_max * i as f64 / points as f64;
        let (tail_r, _) = tail(x, &|r| r.r);
        let (tail_chi, k) = tail(x, &|r| r.chi);
        last_count = k;
        rows.push(HullRow { x, tail_r, tail_chi, ratio: tail_r / tail_chi });
    }
    let pathwise = ens.records.iter().all(|r| r.r >= r.chi);
    let upper_limit = 2.0 * (1.0 + slack);
    Ok(HullReport {
        lower_holds: rows.iter().all(|r| r.ratio >= 1.0),
        upper_holds: rows.iter().all(|r| r.ratio <= upper_limit),
        rows,
        pathwise,
        upper_limit,
        coverage_warning: last_count < COVERAGE_FLOOR,
    })
}
