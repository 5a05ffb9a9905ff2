use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classify_lines, cone_decompose, extract_process, ConeDecomposition, TestLineSet};
use crate::asymptotics::{AxEntry, AxTable, AxValue, RadialLaw};
use crate::ensemble::WeightedEnsemble;
use crate::error::{invalid, Error, Result};

/// Class bounds and exponent for [`estimate_ax`]: lines with
/// `2|C_L|` in `[a1 n^r, a2 n^r]` enter the average.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxOptions {
    pub a1: f64,
    pub a2: f64,
    pub r: f64,
}

impl Default for AxOptions {
    fn default() -> Self {
        Self { a1: 0.5, a2: 4.0, r: 0.5 }
    }
}

/// Within-realization mean of `exp(-beta |C_L|)` over `L_r`; `None` when the
/// class is empty.
fn class_average(dec: &ConeDecomposition, beta: f64, opts: &AxOptions) -> Result<Option<f64>> {
    let class = classify_lines(dec, opts.a1, opts.a2, 0.0)?.class_r(opts.r);
    if class.is_empty() {
        return Ok(None);
    }
    let s: f64 = class.iter().map(|&k| (-beta * dec.mass(k)).exp()).sum();
    Ok(Some(s / class.len() as f64))
}

/// `a_x` from decomposed realizations: `decs[i]` and `weights[i]` belong to
/// record `i` of the law's member lists.
///
/// Realizations with an empty class enter the bin average as 0 and are
/// counted in `empty_class`.
pub fn estimate_ax_from(
    law: &RadialLaw<f64>,
    weights: &[f64],
    decs: &[ConeDecomposition],
    beta: f64,
    opts: AxOptions,
) -> Result<AxTable<f64>> {
    if !(beta > 0.0 && beta.is_finite()) {
        return invalid(format!("a_x inversion needs finite beta > 0, got {beta}"));
    }
    if !(0.0..=1.0).contains(&opts.r) {
        return invalid(format!("class exponent r must lie in [0, 1], got {}", opts.r));
    }
    if weights.len() != decs.len() {
        return invalid("one weight per decomposition");
    }
    let values: Vec<Option<f64>> =
        decs.par_iter().map(|d| class_average(d, beta, &opts)).collect::<Result<_>>()?;
    let scale = beta * (law.n as f64).powf(opts.r);
    let mut entries = Vec::with_capacity(law.bins.len());
    for bin in &law.bins {
        let (mut num, mut den, mut empty) = (0.0, 0.0, 0usize);
        for &i in &bin.members {
            let w = *weights.get(i).ok_or_else(|| Error::InvalidArgument(format!("member {i} out of range")))?;
            match values[i] {
                Some(v) => num += w * v,
                None => empty += 1,
            }
            den += w;
        }
        let value = if bin.members.is_empty() || den <= 0.0 {
            AxValue::Missing
        } else if num > 0.0 {
            AxValue::Defined(-2.0 / scale * (num / den).ln())
        } else {
            AxValue::Undefined
        };
        entries.push(AxEntry { lo: bin.lo, hi: bin.hi, x: bin.x, value, samples: bin.members.len(), empty_class: empty });
    }
    Ok(AxTable { n: law.n, beta, r: opts.r, a1: opts.a1, a2: opts.a2, entries })
}

/// Estimates the penalty profile `x -> a_x` over the bins of `law`, which
/// must be the distance law of `ens`. The ensemble must retain its paths.
pub fn estimate_ax(
    ens: &WeightedEnsemble,
    law: &RadialLaw<f64>,
    lines: &TestLineSet,
    beta: f64,
    opts: AxOptions,
) -> Result<AxTable<f64>> {
    if law.n != ens.config.n {
        return invalid("law and ensemble disagree on n");
    }
    let n = ens.config.n;
    let decs: Vec<ConeDecomposition> = ens
        .records
        .par_iter()
        .map(|r| {
            let packed = r.path.as_ref().ok_or_else(|| {
                Error::InvalidArgument("a_x estimation needs an ensemble that retains paths".into())
            })?;
            Ok(cone_decompose(&extract_process(&packed.unpack()?), lines, n))
        })
        .collect::<Result<_>>()?;
    let weights: Vec<f64> = ens.records.iter().map(|r| r.weight).collect();
    estimate_ax_from(law, &weights, &decs, beta, opts)
}
