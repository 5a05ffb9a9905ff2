use rayon::prelude::*;

use super::{Diagnostics, EnsembleConfig, Record, SamplerKind, WeightedEnsemble};
use crate::error::{invalid, Result};
use crate::walk::{endpoint_distance, hull_radius, sample_srw_with, silt_count, PackedSteps};

/// Paths per forked stream; fixes the stream layout independently of the
/// worker count.
const CHUNK: usize = 2048;

/// Draws simple random walks and attaches weight `exp(-beta J_n)`.
///
/// Walks outside the window, or with zero weight, are dropped and counted in
/// the diagnostics.
pub fn sample_reweighted(cfg: &EnsembleConfig) -> Result<WeightedEnsemble> {
    if cfg.sampler != SamplerKind::Reweight {
        return invalid("sample_reweighted needs sampler = reweight");
    }
    cfg.validate()?;
    let chunks = cfg.samples.div_ceil(CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = cfg.seed.fork(c as u64).rng();
            let count = CHUNK.min(cfg.samples - c * CHUNK);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let path = sample_srw_with(&mut rng, cfg.n, cfg.dim)?;
                let j = silt_count(&path);
                let weight = cfg.beta.weight(j);
                let inside = cfg.window.is_none_or(|w| w.contains(j, cfg.n));
                if weight > 0.0 && inside {
                    out.push(Record {
                        j,
                        chi: endpoint_distance(&path),
                        r: hull_radius(&path),
                        weight,
                        path: cfg.retain_paths.then(|| PackedSteps::pack(&path)),
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<Record> = parts.into_iter().flatten().collect();
    let diagnostics = Diagnostics {
        draws: cfg.samples as u64,
        dropped: (cfg.samples - records.len()) as u64,
        ..Diagnostics::default()
    };
    Ok(WeightedEnsemble::assemble(cfg.clone(), records, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{Penalty, Window};
    use crate::SeededSource;

    #[test]
    fn window_filter_is_exact() {
        let mut cfg = EnsembleConfig::new(10, 2, Penalty::Weak(1.0), 5000, SamplerKind::Reweight, SeededSource::new(4, 0));
        cfg.window = Some(Window::new(0.1, 1.0).unwrap());
        let ens = sample_reweighted(&cfg).unwrap();
        assert!(!ens.is_empty());
        assert!(ens.records.iter().all(|r| (1..=10).contains(&r.j)));
        assert_eq!(ens.diagnostics.dropped as usize + ens.len(), 5000);
    }

    #[test]
    fn zero_beta_has_unit_weights() {
        let cfg = EnsembleConfig::new(16, 2, Penalty::Weak(0.0), 3000, SamplerKind::Reweight, SeededSource::new(4, 0));
        let ens = sample_reweighted(&cfg).unwrap();
        assert!(ens.records.iter().all(|r| r.weight == 1.0));
        assert_eq!(ens.diagnostics.ess, 3000.0);
        let chi2 = ens.estimate(|r| r.chi * r.chi);
        assert!(chi2.z_score(16.0).abs() < 3.0, "{chi2:?}");
    }

    #[test]
    fn strict_keeps_only_saws() {
        let cfg = EnsembleConfig::new(8, 2, Penalty::Strict, 4000, SamplerKind::Reweight, SeededSource::new(5, 0));
        let ens = sample_reweighted(&cfg).unwrap();
        assert!(ens.records.iter().all(|r| r.j == 0));
    }
}
