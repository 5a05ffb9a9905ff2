//! `weaksaw`: runs the census, sampling, exponent, cone and Palm studies.
//!
//! Exit status: 0 when every study predicate passed, 2 when one failed,
//! 1 on an execution error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use weaksaw::ensemble::{BinSpec, Penalty, SamplerKind};
use weaksaw::harness::{check_run, run_experiment, ExperimentSpec, Predicate, StudyKind};

#[derive(Parser)]
#[command(name = "weaksaw", version, about = "Weakly self-avoiding walk studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact SAW counts and connective-constant bounds.
    Census(Run),
    /// Exact expectations by full enumeration, optionally checked against the samplers.
    Exact(Run),
    /// Sample ensembles over the grid and persist them.
    Sample(Run),
    /// Distance exponents from sampled moments.
    Exponent(Run),
    /// Cone decompositions and shape detection.
    Shapes(Run),
    /// The a_x profile, radii, integrals and Condition D.
    ConditionD(Run),
    /// Tail ratio of the hull radius against the endpoint distance.
    Hull(Run),
    /// Palm estimators on Poisson samples.
    Palm(Run),
    /// The closed-form exponent table.
    Nu(Run),
    /// Re-check a finished run: artifact hashes and predicates.
    Report {
        /// Run directory or manifest file.
        run: PathBuf,
    },
}

#[derive(Args, Clone)]
struct Run {
    /// TOML experiment file, or a run manifest to repeat.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Run directory (default: $WEAKSAW_OUT/<study>-<hash>).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    set: Overrides,
}

/// Flags mirroring the configuration keys.
#[derive(Args, Clone, Default)]
struct Overrides {
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Penalty values; `inf` selects strict self-avoidance.
    #[arg(long, value_delimiter = ',', value_parser = parse_penalty)]
    beta: Option<Vec<Penalty>>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_parser = parse_sampler)]
    sampler: Option<SamplerKind>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    burn_in: Option<u64>,
    #[arg(long)]
    thin: Option<u64>,
    #[arg(long)]
    pivot_fraction: Option<f64>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    init_attempts: Option<usize>,
    #[arg(long)]
    retain_paths: bool,
    #[arg(long)]
    ess_floor: Option<f64>,
    /// Use the per-beta default SILT window.
    #[arg(long)]
    window_default: bool,
    #[arg(long)]
    b1: Option<f64>,
    #[arg(long)]
    b2: Option<f64>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    check_max: Option<usize>,
    #[arg(long)]
    compare_samples: Option<usize>,
    #[arg(long)]
    z_max: Option<f64>,
    /// Accepted slope range `lo,hi` for chi.
    #[arg(long, value_parser = parse_range)]
    chi_slope: Option<(f64, f64)>,
    /// Accepted slope range `lo,hi` for chi^2.
    #[arg(long, value_parser = parse_range)]
    chi2_slope: Option<(f64, f64)>,
    #[arg(long)]
    min_ess: Option<f64>,
    #[arg(long)]
    lines_v: Option<f64>,
    #[arg(long)]
    a1: Option<f64>,
    #[arg(long)]
    a2: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    /// Distance-bin width for the a_x table (default n^(1/4)).
    #[arg(long)]
    bin_width: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    rho_star: Option<f64>,
    #[arg(long)]
    slack: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    quantile: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    intensity: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    area: Option<Vec<f64>>,
    #[arg(long)]
    points: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<u32>>,
}

fn parse_penalty(s: &str) -> Result<Penalty, String> {
    let beta: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    Penalty::from_beta(beta).map_err(|e| e.to_string())
}

fn parse_sampler(s: &str) -> Result<SamplerKind, String> {
    match s {
        "exact" => Ok(SamplerKind::Exact),
        "reweight" => Ok(SamplerKind::Reweight),
        "mcmc" => Ok(SamplerKind::Mcmc),
        _ => Err(format!("unknown sampler {s} (exact, reweight, mcmc)")),
    }
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected lo,hi, got {s}"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t}"));
    let (lo, hi) = (num(lo)?, num(hi)?);
    if lo > hi {
        return Err(format!("empty range {lo},{hi}"));
    }
    Ok((lo, hi))
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Overrides {
    fn apply(self, spec: &mut ExperimentSpec) {
        set(&mut spec.grid.n, self.n);
        set(&mut spec.grid.beta, self.beta);
        set(&mut spec.grid.d, self.d);
        let s = &mut spec.sampler;
        set(&mut s.kind, self.sampler);
        set(&mut s.samples, self.samples);
        set(&mut s.burn_in, self.burn_in);
        set(&mut s.thin, self.thin);
        set(&mut s.pivot_fraction, self.pivot_fraction);
        set(&mut s.chains, self.chains);
        set(&mut s.init_attempts, self.init_attempts);
        set(&mut s.ess_floor, self.ess_floor);
        s.retain_paths |= self.retain_paths;
        spec.window.default |= self.window_default;
        if self.b1.is_some() {
            spec.window.b1 = self.b1;
        }
        if self.b2.is_some() {
            spec.window.b2 = self.b2;
        }
        set(&mut spec.census.n_max, self.n_max);
        set(&mut spec.census.check_max, self.check_max);
        set(&mut spec.exact.compare_samples, self.compare_samples);
        if let Some(z) = self.z_max {
            spec.exact.z_max = z;
            spec.palm.z_max = z;
        }
        set(&mut spec.exponent.chi_slope, self.chi_slope.map(Some));
        set(&mut spec.exponent.chi2_slope, self.chi2_slope.map(Some));
        if self.min_ess.is_some() {
            spec.exponent.min_ess = self.min_ess;
        }
        let c = &mut spec.cone;
        set(&mut c.lines_v, self.lines_v);
        set(&mut c.a1, self.a1);
        set(&mut c.a2, self.a2);
        set(&mut c.delta, self.delta);
        set(&mut c.rho, self.rho);
        set(&mut c.r, self.r);
        set(&mut c.bins, self.bin_width.map(BinSpec::Width));
        set(&mut c.gamma, self.gamma);
        set(&mut c.epsilon, self.epsilon);
        set(&mut c.rho_star, self.rho_star);
        set(&mut spec.hull.slack, self.slack);
        set(&mut spec.hull.grid_points, self.grid_points);
        set(&mut spec.hull.quantile, self.quantile);
        set(&mut spec.palm.intensities, self.intensity);
        set(&mut spec.palm.areas, self.area);
        set(&mut spec.palm.points, self.points);
        set(&mut spec.nu.dims, self.dims);
    }
}

/// Studies a subcommand accepts from a configuration file; the first is the default.
fn studies(cmd: &Command, betas: Option<&[Penalty]>) -> Vec<StudyKind> {
    use StudyKind::*;
    match cmd {
        Command::Census(_) => vec![Census],
        Command::Exact(_) => vec![ExactSmallN],
        Command::Sample(_) => vec![SrwBaseline],
        Command::Exponent(_) => {
            let all = |f: fn(&Penalty) -> bool| betas.is_some_and(|b| !b.is_empty() && b.iter().all(f));
            let first = if all(|b| *b == Penalty::Strict) {
                SawExponent
            } else if all(|b| *b == Penalty::Weak(0.0)) {
                SrwBaseline
            } else {
                WeaksawExponent
            };
            let mut kinds = vec![first];
            kinds.extend([WeaksawExponent, SawExponent, SrwBaseline].into_iter().filter(|&k| k != first));
            kinds
        }
        Command::Shapes(_) => vec![ShapeStudy],
        Command::ConditionD(_) => vec![ConditionD],
        Command::Hull(_) => vec![ConvexHull],
        Command::Palm(_) => vec![PalmPoisson],
        Command::Nu(_) => vec![NuTable],
        Command::Report { .. } => Vec::new(),
    }
}

fn build_spec(cmd: &Command, run: Run) -> Result<ExperimentSpec, String> {
    let allowed = studies(cmd, run.set.beta.as_deref());
    let mut spec = match &run.config {
        Some(path) => {
            let spec = ExperimentSpec::load(path).map_err(|e| format!("{}: {e}", path.display()))?;
            if !allowed.contains(&spec.study) {
                return Err(format!("config study {} does not match this subcommand", spec.study.name()));
            }
            spec
        }
        None => {
            let mut spec = ExperimentSpec::new(allowed[0]);
            let nonzero = run.set.beta.as_ref().is_some_and(|b| b.iter().any(|&p| p != Penalty::Weak(0.0)));
            if matches!(cmd, Command::Sample(_)) && nonzero {
                // the unit-slope check only describes the simple random walk
                spec.exponent.chi2_slope = None;
            }
            spec
        }
    };
    set(&mut spec.seed, run.seed);
    set(&mut spec.threads, run.threads);
    if run.out.is_some() {
        spec.out = run.out;
    }
    run.set.apply(&mut spec);
    Ok(spec)
}

fn print_predicates(predicates: &[Predicate]) {
    for p in predicates {
        println!("{} {}: {}", if p.passed { "PASS" } else { "FAIL" }, p.name, p.detail);
    }
}

fn main() -> ExitCode {
    // usage errors exit 1; 2 is reserved for failed predicates
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let command = cli.command;
    let run = match command {
        Command::Report { ref run } => {
            return match check_run(run) {
                Ok(check) => {
                    print_predicates(&check.manifest.predicates);
                    for a in &check.altered {
                        println!("FAIL artifact {a}: missing or changed");
                    }
                    if !check.manifest.complete {
                        println!("FAIL run incomplete: {}", check.manifest.error.as_deref().unwrap_or("unknown"));
                    }
                    ExitCode::from(if check.passed() { 0 } else { 2 })
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            };
        }
        Command::Census(ref r)
        | Command::Exact(ref r)
        | Command::Sample(ref r)
        | Command::Exponent(ref r)
        | Command::Shapes(ref r)
        | Command::ConditionD(ref r)
        | Command::Hull(ref r)
        | Command::Palm(ref r)
        | Command::Nu(ref r) => r.clone(),
    };
    let spec = match build_spec(&command, run) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match run_experiment(&spec) {
        Ok(manifest) => {
            print_predicates(&manifest.predicates);
            if let Ok(dir) = weaksaw::harness::run_dir(&spec) {
                println!("run directory: {}", dir.display());
            }
            ExitCode::from(if manifest.passed() { 0 } else { 2 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
