use serde::{Deserialize, Serialize};

use super::stats::NeumaierSum;
use super::WeightedEnsemble;
use crate::asymptotics::{RadialBin, RadialLaw};
use crate::error::{invalid, Error, Result};

/// Binning of `[0, n]` for the distance law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinSpec {
    Width(f64),
    Count(usize),
    /// Width `n^(1/4)`.
    Auto,
}

impl BinSpec {
    fn width(&self, n: usize) -> Result<f64> {
        let n = n.max(1) as f64;
        let w = match *self {
            BinSpec::Width(w) => w,
            BinSpec::Count(k) if k > 0 => n / k as f64,
            BinSpec::Count(_) => return invalid("bin count must be positive"),
            BinSpec::Auto => n.powf(0.25),
        };
        if !(w > 0.0 && w.is_finite()) {
            return invalid(format!("bin width must be positive, got {w}"));
        }
        Ok(w)
    }
}

/// Weighted empirical law of `chi_n` over bins spanning `[0, n]`, with the
/// member index of every bin.
pub fn distance_law(ens: &WeightedEnsemble, bins: BinSpec) -> Result<RadialLaw<f64>> {
    if ens.is_empty() || ens.total_weight <= 0.0 {
        return Err(Error::Degenerate("ensemble has zero total weight".into()));
    }
    let n = ens.config.n;
    let width = bins.width(n)?;
    let count = ((n as f64 / width).ceil() as usize).max(1);
    let mut sums = vec![NeumaierSum::default(); count];
    let mut members = vec![Vec::new(); count];
    let (mut m1, mut m2) = (NeumaierSum::default(), NeumaierSum::default());
    for (idx, r) in ens.records.iter().enumerate() {
        let k = ((r.chi / width) as usize).min(count - 1);
        sums[k].add(r.weight);
        members[k].push(idx);
        m1.add(r.weight * r.chi);
        m2.add(r.weight * r.chi * r.chi);
    }
    let total = ens.total_weight;
    let bins = (0..count)
        .map(|k| {
            let lo = k as f64 * width;
            let hi = if k + 1 == count { n as f64 } else { (k + 1) as f64 * width };
            RadialBin {
                lo,
                hi,
                x: 0.5 * (lo + hi),
                mass: sums[k].value() / total,
                members: std::mem::take(&mut members[k]),
            }
        })
        .collect();
    Ok(RadialLaw { n, bins, mean: m1.value() / total, mean_sq: m2.value() / total })
}
