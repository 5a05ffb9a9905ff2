use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensemble::{BinSpec, McmcParams, Penalty, SamplerKind, Window};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    Census,
    ExactSmallN,
    SrwBaseline,
    WeaksawExponent,
    SawExponent,
    ShapeStudy,
    ConditionD,
    ConvexHull,
    PalmPoisson,
    NuTable,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Census => "census",
            StudyKind::ExactSmallN => "exact-small-n",
            StudyKind::SrwBaseline => "srw-baseline",
            StudyKind::WeaksawExponent => "weaksaw-exponent",
            StudyKind::SawExponent => "saw-exponent",
            StudyKind::ShapeStudy => "shape-study",
            StudyKind::ConditionD => "condition-d",
            StudyKind::ConvexHull => "convex-hull",
            StudyKind::PalmPoisson => "palm-poisson",
            StudyKind::NuTable => "nu-table",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub n: Vec<usize>,
    pub beta: Vec<Penalty>,
    pub d: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n: vec![33, 65, 129, 257, 513, 1025], beta: vec![Penalty::Weak(1.0)], d: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSpec {
    pub kind: SamplerKind,
    pub samples: usize,
    pub burn_in: u64,
    pub thin: u64,
    pub pivot_fraction: f64,
    pub chains: usize,
    pub init_attempts: usize,
    /// Store packed paths with persisted ensembles.
    pub retain_paths: bool,
    pub ess_floor: f64,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        let m = McmcParams::default();
        Self {
            kind: SamplerKind::Mcmc,
            samples: 20_000,
            burn_in: m.burn_in,
            thin: m.thin,
            pivot_fraction: m.pivot_fraction,
            chains: m.chains,
            init_attempts: m.init_attempts,
            retain_paths: false,
            ess_floor: 100.0,
        }
    }
}

impl SamplerSpec {
    pub fn mcmc(&self) -> McmcParams {
        McmcParams {
            burn_in: self.burn_in,
            thin: self.thin,
            pivot_fraction: self.pivot_fraction,
            chains: self.chains,
            init_attempts: self.init_attempts,
        }
    }
}

/// `J_n ∈ [b1 n, b2 n]`; `default = true` picks the per-beta default window.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowSpec {
    pub default: bool,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
}

impl WindowSpec {
    pub fn resolve(&self, beta: Penalty) -> Result<Option<Window>> {
        match (self.b1, self.b2) {
            (Some(b1), Some(b2)) => Ok(Some(Window::new(b1, b2)?)),
            (None, None) if self.default => match beta {
                Penalty::Weak(b) if b > 0.0 => Ok(Some(Window::default_for(b)?)),
                _ => Ok(None),
            },
            (None, None) => Ok(None),
            _ => invalid("window needs both b1 and b2"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CensusSpec {
    pub n_max: usize,
    /// Largest n cross-checked against the unreduced enumeration.
    pub check_max: usize,
}

impl Default for CensusSpec {
    fn default() -> Self {
        Self { n_max: 10, check_max: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExactSpec {
    /// Reweighted draws compared with each exact value; 0 skips the comparison.
    pub compare_samples: usize,
    /// Largest tolerated |z| in that comparison.
    pub z_max: f64,
}

impl Default for ExactSpec {
    fn default() -> Self {
        Self { compare_samples: 0, z_max: 3.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExponentSpec {
    /// Accepted slope range for `E chi_n`; absent skips the predicate.
    pub chi_slope: Option<(f64, f64)>,
    pub chi2_slope: Option<(f64, f64)>,
    /// Minimum effective sample size per grid point.
    pub min_ess: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConeSpec {
    /// Test-set size `ceil(v n^(1/2))`.
    pub lines_v: f64,
    pub a1: f64,
    pub a2: f64,
    pub delta: f64,
    pub rho: f64,
    /// Class exponent used by the `a_x` estimator.
    pub r: f64,
    pub bins: BinSpec,
    pub gamma: f64,
    pub epsilon: f64,
    pub rho_star: f64,
}

impl Default for ConeSpec {
    fn default() -> Self {
        Self {
            lines_v: 1.0,
            a1: 0.5,
            a2: 4.0,
            delta: 0.25,
            rho: 0.5,
            r: 0.5,
            bins: BinSpec::Auto,
            gamma: 1.0,
            epsilon: 0.1,
            rho_star: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HullSpec {
    pub slack: f64,
    pub grid_points: usize,
    pub quantile: f64,
}

impl Default for HullSpec {
    fn default() -> Self {
        Self { slack: 0.1, grid_points: 50, quantile: 0.99 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PalmSpec {
    pub intensities: Vec<f64>,
    /// Ball areas `pi r^2`.
    pub areas: Vec<f64>,
    /// Expected number of points per sample; fixes the square window side.
    pub points: f64,
    pub z_max: f64,
}

impl Default for PalmSpec {
    fn default() -> Self {
        Self { intensities: vec![1.0], areas: vec![1.0], points: 1e5, z_max: 3.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NuSpec {
    pub dims: Vec<u32>,
}

impl Default for NuSpec {
    fn default() -> Self {
        Self { dims: vec![1, 2, 3, 4] }
    }
}

/// One experiment: a study over an `(n, beta)` grid with every knob explicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub study: StudyKind,
    pub seed: u64,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub sampler: SamplerSpec,
    #[serde(default)]
    pub window: WindowSpec,
    #[serde(default)]
    pub census: CensusSpec,
    #[serde(default)]
    pub exact: ExactSpec,
    #[serde(default)]
    pub exponent: ExponentSpec,
    #[serde(default)]
    pub cone: ConeSpec,
    #[serde(default)]
    pub hull: HullSpec,
    #[serde(default)]
    pub palm: PalmSpec,
    #[serde(default)]
    pub nu: NuSpec,
}

impl ExperimentSpec {
    /// Defaults for a study, seed 1.
    pub fn new(study: StudyKind) -> Self {
        let mut spec = Self {
            study,
            seed: 1,
            threads: 0,
            out: None,
            grid: GridSpec::default(),
            sampler: SamplerSpec::default(),
            window: WindowSpec::default(),
            census: CensusSpec::default(),
            exact: ExactSpec::default(),
            exponent: ExponentSpec::default(),
            cone: ConeSpec::default(),
            hull: HullSpec::default(),
            palm: PalmSpec::default(),
            nu: NuSpec::default(),
        };
        match study {
            StudyKind::ExactSmallN => {
                spec.grid.n = vec![10];
                spec.grid.beta = [0.5, 1.0, 2.0].map(Penalty::Weak).to_vec();
            }
            StudyKind::SrwBaseline => {
                spec.grid.beta = vec![Penalty::Weak(0.0)];
                spec.exponent.chi2_slope = Some((0.97, 1.03));
            }
            StudyKind::WeaksawExponent => {
                spec.exponent.chi_slope = Some((0.70, 0.80));
                spec.exponent.chi2_slope = Some((1.44, 1.56));
            }
            StudyKind::SawExponent => {
                spec.grid.beta = vec![Penalty::Strict];
                spec.exponent.chi2_slope = Some((1.44, 1.56));
            }
            StudyKind::ShapeStudy | StudyKind::ConditionD => {
                spec.grid.n = vec![257];
                spec.grid.beta = [0.25, 0.5, 1.0, 2.0].map(Penalty::Weak).to_vec();
                spec.sampler.samples = 2_000;
            }
            StudyKind::ConvexHull => {
                spec.grid.n = vec![1024];
                spec.grid.beta = vec![Penalty::Weak(0.0)];
                spec.sampler.kind = SamplerKind::Reweight;
                spec.sampler.samples = 100_000;
            }
            _ => {}
        }
        spec
    }

    /// Parses a TOML experiment file, or the effective config echoed in a
    /// run manifest (`.json`).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let config = value.get("config").cloned().unwrap_or(value);
            return Ok(serde_json::from_value(config)?);
        }
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let needs_grid = !matches!(self.study, StudyKind::Census | StudyKind::PalmPoisson | StudyKind::NuTable);
        if needs_grid && (self.grid.n.is_empty() || self.grid.beta.is_empty()) {
            return invalid("the (n, beta) grid must be nonempty");
        }
        if self.sampler.samples == 0 {
            return invalid("sampler.samples must be positive");
        }
        if self.study == StudyKind::PalmPoisson && (self.palm.intensities.is_empty() || self.palm.areas.is_empty()) {
            return invalid("palm study needs intensities and areas");
        }
        if self.study == StudyKind::NuTable && self.nu.dims.is_empty() {
            return invalid("nu table needs dimensions");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let text = r#"
            study = "saw-exponent"
            seed = 42
            [grid]
            n = [16, 32]
            beta = ["inf", 0.5]
            [sampler]
            samples = 100
        "#;
        let spec = ExperimentSpec::from_toml(text).unwrap();
        assert_eq!(spec.grid.beta, vec![Penalty::Strict, Penalty::Weak(0.5)]);
        assert_eq!(spec.sampler.thin, McmcParams::default().thin);
        let back = ExperimentSpec::from_toml(&spec.to_toml().unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn rejects_unknown_keys_and_missing_seed() {
        assert!(ExperimentSpec::from_toml("study = \"census\"\nseed = 1\nsedd = 2").is_err());
        assert!(ExperimentSpec::from_toml("study = \"census\"").is_err());
    }

    #[test]
    fn windows() {
        let w = WindowSpec { default: true, ..Default::default() };
        assert!(w.resolve(Penalty::Weak(0.0)).unwrap().is_none());
        assert!(w.resolve(Penalty::Weak(1.0)).unwrap().is_some());
        let half = WindowSpec { b1: Some(0.1), ..Default::default() };
        assert!(half.resolve(Penalty::Weak(1.0)).is_err());
    }
}
