//! Sampling and exact computation under the weakly self-avoiding measure
//! `Q^beta_n(path) ∝ exp(-beta J_n(path))` on walks of length `n`.

mod exact;
mod law;
mod mcmc;
mod persist;
mod reweight;
pub mod stats;

pub use exact::{exact_expectations, ExactExpectations};
pub use law::{distance_law, BinSpec};
pub use mcmc::{sample_mcmc, PivotChain};
pub use persist::{read_ensemble, write_ensemble};
pub use reweight::sample_reweighted;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Result};
use crate::walk::{check_dim, check_len, PackedSteps};
use crate::SeededSource;
use stats::{integrated_autocorrelation, NeumaierSum};

/// Penalty per self-intersection.
///
/// `Strict` is the `beta -> infinity` limit: only self-avoiding walks carry
/// weight. In configuration files it is written as the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Penalty {
    Weak(f64),
    Strict,
}

impl Penalty {
    pub fn from_beta(beta: f64) -> Result<Self> {
        if beta.is_infinite() && beta > 0.0 {
            Ok(Penalty::Strict)
        } else if beta >= 0.0 {
            Ok(Penalty::Weak(beta))
        } else {
            invalid(format!("beta must be >= 0, got {beta}"))
        }
    }

    pub fn beta(&self) -> f64 {
        match *self {
            Penalty::Weak(b) => b,
            Penalty::Strict => f64::INFINITY,
        }
    }

    /// `exp(-beta j)`, with `0 * inf` read as weight 1 at `j = 0`.
    #[inline]
    pub fn weight(&self, j: u64) -> f64 {
        match *self {
            Penalty::Weak(b) => (-b * j as f64).exp(),
            Penalty::Strict => (j == 0) as u8 as f64,
        }
    }
}

impl Serialize for Penalty {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Penalty::Weak(b) => s.serialize_f64(*b),
            Penalty::Strict => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Penalty {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let beta = match Raw::deserialize(d)? {
            Raw::Num(b) => b,
            Raw::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "saw") => f64::INFINITY,
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom)?,
        };
        Penalty::from_beta(beta).map_err(serde::de::Error::custom)
    }
}

/// Conditioning window `J_n ∈ [b1 n, b2 n]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub b1: f64,
    pub b2: f64,
}

impl Window {
    pub fn new(b1: f64, b2: f64) -> Result<Self> {
        if !(b1 > 0.0 && b1 < b2) {
            return invalid(format!("window needs 0 < b1 < b2, got ({b1}, {b2})"));
        }
        Ok(Self { b1, b2 })
    }

    /// `b2 = ln 4 / beta`, `b1 = b2 / 20`, so that `beta b2` does not depend on beta.
    pub fn default_for(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return invalid("the default window needs a finite beta > 0");
        }
        let b2 = 4f64.ln() / beta;
        Self::new(b2 / 20.0, b2)
    }

    /// Integer bounds `[ceil(b1 n), floor(b2 n)]`.
    pub fn bounds(&self, n: usize) -> (u64, u64) {
        let lo = (self.b1 * n as f64).ceil().max(0.0) as u64;
        let hi = (self.b2 * n as f64).floor().max(0.0) as u64;
        (lo, hi)
    }

    pub fn contains(&self, j: u64, n: usize) -> bool {
        let (lo, hi) = self.bounds(n);
        lo <= j && j <= hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Exact,
    Reweight,
    Mcmc,
}

/// Markov chain settings. Burn-in and thinning count attempted moves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcParams {
    pub burn_in: u64,
    pub thin: u64,
    /// Probability that a move is a pivot rather than a local kink/end move.
    pub pivot_fraction: f64,
    pub chains: usize,
    /// Random-walk draws tried when the window excludes the constructed start.
    pub init_attempts: usize,
}

impl Default for McmcParams {
    fn default() -> Self {
        Self { burn_in: 20_000, thin: 10, pivot_fraction: 0.8, chains: 4, init_attempts: 10_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n: usize,
    pub dim: usize,
    pub beta: Penalty,
    pub samples: usize,
    #[serde(default)]
    pub window: Option<Window>,
    pub sampler: SamplerKind,
    pub seed: SeededSource,
    #[serde(default)]
    pub mcmc: McmcParams,
    #[serde(default)]
    pub retain_paths: bool,
    /// Effective sample sizes below this raise a warning flag.
    #[serde(default = "default_ess_floor")]
    pub ess_floor: f64,
}

fn default_ess_floor() -> f64 {
    100.0
}

impl EnsembleConfig {
    pub fn new(n: usize, dim: usize, beta: Penalty, samples: usize, sampler: SamplerKind, seed: SeededSource) -> Self {
        Self {
            n,
            dim,
            beta,
            samples,
            window: None,
            sampler,
            seed,
            mcmc: McmcParams::default(),
            retain_paths: false,
            ess_floor: default_ess_floor(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.dim)?;
        check_len(self.n)?;
        if let Penalty::Weak(b) = self.beta {
            if !(b >= 0.0 && b.is_finite()) {
                return invalid(format!("beta must be >= 0, got {b}"));
            }
        }
        if let Some(w) = self.window {
            Window::new(w.b1, w.b2)?;
        }
        if self.samples == 0 {
            return invalid("samples must be positive");
        }
        let m = &self.mcmc;
        if !(0.0..=1.0).contains(&m.pivot_fraction) {
            return invalid(format!("pivot fraction {} outside [0, 1]", m.pivot_fraction));
        }
        if m.thin == 0 || m.chains == 0 {
            return invalid("thin and chains must be positive");
        }
        Ok(())
    }
}

/// One ensemble member.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub j: u64,
    pub chi: f64,
    pub r: f64,
    pub weight: f64,
    pub path: Option<PackedSteps>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Paths drawn (reweighting) or moves attempted after burn-in (MCMC).
    pub draws: u64,
    pub acceptance_rate: Option<f64>,
    pub tau_int_chi: Option<f64>,
    pub tau_int_chi2: Option<f64>,
    /// Kish size for reweighting, `N / (2 tau)` (smaller of the two observables) for MCMC.
    pub ess: f64,
    pub ess_warning: bool,
    /// Records dropped for zero weight or for leaving the window.
    pub dropped: u64,
    /// Consecutive record counts per chain, in stream order.
    pub chain_lengths: Vec<usize>,
}

/// Sampled paths with penalisation weights: the empirical stand-in for `Q^beta_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedEnsemble {
    pub config: EnsembleConfig,
    pub records: Vec<Record>,
    pub total_weight: f64,
    pub diagnostics: Diagnostics,
}

/// A point estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub ess: f64,
    pub tau_int: Option<f64>,
}

impl Estimate {
    /// Standardised distance `(mean - target) / std_err`.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target) / self.std_err
    }
}

impl WeightedEnsemble {
    pub(crate) fn assemble(config: EnsembleConfig, records: Vec<Record>, mut diagnostics: Diagnostics) -> Self {
        let mut total = NeumaierSum::default();
        records.iter().for_each(|r| total.add(r.weight));
        let total_weight = total.value();
        let unit = config.sampler == SamplerKind::Mcmc;
        let mut ens = Self { config, records, total_weight, diagnostics: Diagnostics::default() };
        if unit {
            let chi = ens.estimate(|r| r.chi);
            let chi2 = ens.estimate(|r| r.chi * r.chi);
            diagnostics.tau_int_chi = chi.tau_int;
            diagnostics.tau_int_chi2 = chi2.tau_int;
            diagnostics.ess = chi.ess.min(chi2.ess);
        } else {
            let sq: f64 = ens.records.iter().map(|r| r.weight * r.weight).sum();
            diagnostics.ess = if sq > 0.0 { ens.total_weight * ens.total_weight / sq } else { 0.0 };
        }
        diagnostics.ess_warning = diagnostics.ess < ens.config.ess_floor;
        ens.diagnostics = diagnostics;
        ens
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Estimates `E f` under the ensemble's measure.
    ///
    /// Weighted ensembles use the self-normalised estimator with its
    /// delta-method standard error. MCMC ensembles inflate the naive error by
    /// `sqrt(2 tau_int)`, with `tau_int` pooled over chains.
    pub fn estimate(&self, f: impl Fn(&Record) -> f64) -> Estimate {
        let values: Vec<f64> = self.records.iter().map(&f).collect();
        let n = values.len();
        if n == 0 || self.total_weight <= 0.0 {
            return Estimate { mean: f64::NAN, std_err: f64::NAN, ess: 0.0, tau_int: None };
        }
        if self.config.sampler == SamplerKind::Mcmc {
            let mut sum = NeumaierSum::default();
            values.iter().for_each(|&v| sum.add(v));
            let mean = sum.value() / n as f64;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let mut chains = Vec::new();
            let mut start = 0;
            let lengths = if self.diagnostics.chain_lengths.is_empty() {
                vec![n]
            } else {
                self.diagnostics.chain_lengths.clone()
            };
            for len in lengths {
                chains.push(&values[start..start + len]);
                start += len;
            }
            let tau = integrated_autocorrelation(&chains, 6.0).tau;
            let std_err = (var / n as f64 * 2.0 * tau).sqrt();
            Estimate { mean, std_err, ess: n as f64 / (2.0 * tau), tau_int: Some(tau) }
        } else {
            let w = self.total_weight;
            let mut sum = NeumaierSum::default();
            self.records.iter().zip(&values).for_each(|(r, v)| sum.add(r.weight * v));
            let mean = sum.value() / w;
            let mut var = NeumaierSum::default();
            let mut sq = 0.0;
            for (r, v) in self.records.iter().zip(&values) {
                var.add(r.weight * r.weight * (v - mean) * (v - mean));
                sq += r.weight * r.weight;
            }
            Estimate { mean, std_err: var.value().sqrt() / w, ess: w * w / sq, tau_int: None }
        }
    }
}

/// Draws an ensemble with the configured sampler.
pub fn sample(cfg: &EnsembleConfig) -> Result<WeightedEnsemble> {
    match cfg.sampler {
        SamplerKind::Reweight => sample_reweighted(cfg),
        SamplerKind::Mcmc => sample_mcmc(cfg),
        SamplerKind::Exact => invalid("the exact sampler produces expectations, not an ensemble; use exact_expectations"),
    }
}
