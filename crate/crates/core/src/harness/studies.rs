use rayon::prelude::*;
use serde::Serialize;

use super::{report_convex_hull, ExperimentSpec, RunWriter, StudyKind};
use crate::asymptotics::{bound_panel, condition_d, fit_exponent, integrals, nu_formula, AxValue};
use crate::census::{connective_estimate, count_saw_unreduced, enumerate_saw, EnumerationBudget};
use crate::cone::{
    cone_decompose, detect_shapes, estimate_ax, extract_process, palm_empty_ball, palm_marked_points, poisson_points,
    AxOptions, Rect, TestLineSet,
};
use crate::ensemble::{
    distance_law, exact_expectations, sample, write_ensemble, EnsembleConfig, Penalty, SamplerKind, WeightedEnsemble,
};
use crate::error::{Error, Result};
use crate::SeededSource;

pub(crate) fn run(spec: &ExperimentSpec, w: &mut RunWriter) -> Result<()> {
    match spec.study {
        StudyKind::Census => census(spec, w),
        StudyKind::ExactSmallN => exact(spec, w),
        StudyKind::SrwBaseline | StudyKind::WeaksawExponent | StudyKind::SawExponent => exponent(spec, w),
        StudyKind::ShapeStudy => shapes(spec, w),
        StudyKind::ConditionD => condition(spec, w),
        StudyKind::ConvexHull => hull(spec, w),
        StudyKind::PalmPoisson => palm(spec, w),
        StudyKind::NuTable => nu(spec, w),
    }
}

fn beta_label(beta: Penalty) -> String {
    match beta {
        Penalty::Strict => "inf".into(),
        Penalty::Weak(b) => format!("{b}"),
    }
}

/// One `(n, beta)` grid point with its random source.
#[derive(Clone, Copy)]
struct GridTask {
    n: usize,
    beta: Penalty,
    source: SeededSource,
}

impl GridTask {
    fn label(&self) -> String {
        format!("n={},beta={}", self.n, beta_label(self.beta))
    }

    fn stem(&self) -> String {
        format!("n{}_beta{}", self.n, beta_label(self.beta))
    }
}

/// Tasks in `beta`-major order, task `t` drawing from `fork(t)`.
fn grid_tasks(spec: &ExperimentSpec, w: &mut RunWriter) -> Vec<GridTask> {
    let root = SeededSource::new(spec.seed, 0);
    let mut tasks = Vec::new();
    for &beta in &spec.grid.beta {
        for &n in &spec.grid.n {
            let task = GridTask { n, beta, source: root.fork(tasks.len() as u64) };
            w.task(task.label(), task.source);
            tasks.push(task);
        }
    }
    tasks
}

fn ensemble_config(spec: &ExperimentSpec, task: &GridTask, kind: SamplerKind, retain: bool) -> Result<EnsembleConfig> {
    let s = &spec.sampler;
    let mut cfg = EnsembleConfig::new(task.n, spec.grid.d, task.beta, s.samples, kind, task.source);
    cfg.window = spec.window.resolve(task.beta)?;
    cfg.mcmc = s.mcmc();
    cfg.retain_paths = retain;
    cfg.ess_floor = s.ess_floor;
    Ok(cfg)
}

fn census(spec: &ExperimentSpec, w: &mut RunWriter) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        n: usize,
        count: String,
        root: f64,
    }
    let budget = EnumerationBudget::default();
    let d = spec.grid.d;
    let table = enumerate_saw(spec.census.n_max, d, &budget)?;
    let est = connective_estimate(&table)?;
    let rows: Vec<Row> = table
        .counts
        .iter()
        .enumerate()
        .skip(1)
        .zip(&est.roots)
        .map(|((n, c), &(_, root))| Row { n, count: c.to_string(), root })
        .collect();
    w.csv("saw_counts.csv", &rows)?;
    w.json("connective.json", &est)?;
    w.predicate("trivial-bounds", table.within_trivial_bounds(), format!("d^n <= c_n <= 2d(2d-1)^(n-1), n <= {}", table.n_max()));
    let bad = table.submultiplicativity_violations();
    w.predicate("submultiplicativity", bad.is_empty(), format!("violating pairs: {bad:?}"));
    let check = spec.census.check_max.min(spec.census.n_max);
    if check > 0 {
        let plain = count_saw_unreduced(check, d, &budget)?;
        let same = plain.counts[..] == table.counts[..=check];
        w.predicate("symmetry-reduction", same, format!("reduced and unreduced counts agree for n <= {check}"));
    }
    Ok(())
}

fn exact(spec: &ExperimentSpec, w: &mut RunWriter) -> Result<()> {
    #[derive(Serialize)]
    struct Cmp {
        n: usize,
        beta: String,
        sampler: &'static str,
        observable: &'static str,
        exact: f64,
        estimate: f64,
        std_err: f64,
        z: f64,
    }
    let tasks = grid_tasks(spec, w);
    let budget = EnumerationBudget::default();
    let values = tasks
        .iter()
        .map(|t| exact_expectations(t.n, spec.grid.d, t.beta, &budget))
        .collect::<Result<Vec<_>>>()?;
    w.csv("exact.csv", &values)?;
    if spec.exact.compare_samples == 0 {
        return Ok(());
    }
    let mut rows = Vec::new();
    for (t, ex) in tasks.iter().zip(&values) {
        for (kind, name) in [(SamplerKind::Reweight, "reweight"), (SamplerKind::Mcmc, "mcmc")] {
            let mut cfg = ensemble_config(spec, t, kind, false)?;
            cfg.samples = spec.exact.compare_samples;
            let ens = sample(&cfg)?;
            for (obs, exact, est) in [
                ("chi", ex.mean_chi, ens.estimate(|r| r.chi)),
                ("chi2", ex.mean_chi2, ens.estimate(|r| r.chi * r.chi)),
            ] {
                rows.push(Cmp {
                    n: t.n,
                    beta: beta_label(t.beta),
                    sampler: name,
                    observable: obs,
                    exact,
                    estimate: est.mean,
                    std_err: est.std_err,
                    z: est.z_score(exact),
                });
            }
        }
    }
    w.csv("sampler_check.csv", &rows)?;
    let worst = rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    w.predicate("exact-agreement", worst <= spec.exact.z_max, format!("max |z| = {worst:.3}"));
    Ok(())
}

#[derive(Serialize)]
struct EstimateRow {
    n: usize,
    beta: String,
    records: usize,
    ess: f64,
    ess_warning: bool,
    acceptance: Option<f64>,
    tau_chi: Option<f64>,
    tau_chi2: Option<f64>,
    mean_chi: f64,
    se_chi: f64,
    mean_chi2: f64,
    se_chi2: f64,
    mean_r: f64,
    mean_j: f64,
}

fn estimate_row(t: &GridTask, ens: &WeightedEnsemble) -> EstimateRow {
    let chi = ens.estimate(|r| r.chi);
    let chi2 = ens.estimate(|r| r.chi * r.chi);
    let d = &ens.diagnostics;
    EstimateRow {
        n: t.n,
        beta: beta_label(t.beta),
        records: ens.len(),
        ess: d.ess,
        ess_warning: d.ess_warning,
        acceptance: d.acceptance_rate,
        tau_chi: d.tau_int_chi,
        tau_chi2: d.tau_int_chi2,
        mean_chi: chi.mean,
        se_chi: chi.std_err,
        mean_chi2: chi2.mean,
        se_chi2: chi2.std_err,
        mean_r: ens.estimate(|r| r.r).mean,
        mean_j: ens.estimate(|r| r.j as f64).mean,
    }
}

fn exponent(spec: &ExperimentSpec, w: &mut RunWriter) -> Result<()> {
    #[derive(Serialize)]
    struct FitRow {
        beta: String,
        observable: &'static str,
        slope: f64,
        intercept: f64,
        half_width: f64,
        residual_norm: f64,
    }
    let tasks = grid_tasks(spec, w);
    let persist = spec.study == StudyKind::SrwBaseline || spec.sampler.retain_paths;
    let ensembles = tasks
        .iter()
        .map(|t| sample(&ensemble_config(spec, t, spec.sampler.kind, spec.sampler.retain_paths)?))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<EstimateRow> = tasks.iter().zip(&ensembles).map(|(t, e)| estimate_row(t, e)).collect();
    if persist {
        for (t, ens) in tasks.iter().zip(&ensembles) {
            let mut buf = Vec::new();
            write_ensemble(ens, &mut buf, spec.sampler.retain_paths)?;
            w.bytes(&format!("ensembles/{}.tsv", t.stem()), &buf)?;
        }
    }
    w.csv("estimates.csv", &rows)?;
    if let Some(floor) = spec.exponent.min_ess {
        let low: Vec<String> = rows.iter().filter(|r| r.ess < floor).map(|r| format!("n={}:{:.0}", r.n, r.ess)).collect();
        w.predicate("min-ess", low.is_empty(), format!("ESS >= {floor}; below: {low:?}"));
    }
    let mut fits = Vec::new();
    for &beta in &spec.grid.beta {
        let label = beta_label(beta);
        let pick = |f: fn(&EstimateRow) -> f64| -> Vec<(f64, f64)> {
            rows.iter().filter(|r| r.beta == label).map(|r| (r.n as f64, f(r))).collect()
        };
        if spec.grid.n.len() < 3 {
            continue;
        }
        let checks = [
            ("chi", pick(|r| r.mean_chi), spec.exponent.chi_slope),
            ("chi2", pick(|r| r.mean_chi2), spec.exponent.chi2_slope),
        ];
        for (obs, points, range) in checks {
            let fit = fit_exponent(&points)?;
            if let Some((lo, hi)) = range {
                let ok = (lo..=hi).contains(&fit.slope);
                w.predicate(format!("slope-{obs}-beta={label}"), ok, format!("slope {:.4} in [{lo}, {hi}]", fit.slope));
            }
            fits.push(FitRow {
                beta: label.clone(),
                observable: obs,
                slope: fit.slope,
                intercept: fit.intercept,
                half_width: fit.half_width,
                residual_norm: fit.residual_norm,
            });
        }
    }
    w.csv("fits.csv", &fits)?;
    Ok(())
}

fn shapes(spec: &ExperimentSpec, w: &mut RunWriter) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        n: usize,
        beta: String,
        lines: usize,
        records: usize,
        with_silt: usize,
        detected: usize,
        circular: usize,
        circular_frequency: f64,
        conserved: bool,
    }
    #[derive(Serialize)]
    struct BandRow {
        n: usize,
        beta: String,
        r: f64,
        frequency: f64,
    }
    let c = &spec.cone;
    let tasks = grid_tasks(spec, w);
    let mut rows = Vec::new();
    let mut band_rows = Vec::new();
    for t in &tasks {
        let ens = sample(&ensemble_config(spec, t, spec.sampler.kind, true)?)?;
        let lines = TestLineSet::for_length(t.n, c.lines_v)?;
        let reports = ens
            .records
            .par_iter()
            .map(|r| {
                let path = r.path.as_ref().ok_or_else(|| Error::Missing("record without path".into()))?.unpack()?;
                let dec = cone_decompose(&extract_process(&path), &lines, t.n);
                let shape = if dec.j > 0 { Some(detect_shapes(&dec, c.a1, c.a2, c.delta, c.rho)?) } else { None };
                Ok((dec.is_conserved(), shape))
            })
            .collect::<Result<Vec<_>>>()?;
        let shaped: Vec<_> = reports.iter().filter_map(|(_, s)| s.as_ref()).collect();
        let detected = shaped.iter().filter(|s| !s.shapes().is_empty()).count();
        let circular = shaped.iter().filter(|s| s.circular).count();
        let denom = shaped.len().max(1) as f64;
        if let Some(first) = shaped.first() {
            for (k, band) in first.bands.iter().enumerate() {
                let hits = shaped.iter().filter(|s| s.bands[k].qualifies).count();
                band_rows.push(BandRow { n: t.n, beta: beta_label(t.beta), r: band.r, frequency: hits as f64 / denom });
            }
        }
        rows.push(Row {
            n: t.n,
            beta: beta_label(t.beta),
            lines: lines.len(),
            records: ens.len(),
            with_silt: shaped.len(),
            detected,
            circular,
            circular_frequency: circular as f64 / denom,
            conserved: reports.iter().all(|r| r.0),
        });
    }
    w.csv("shapes.csv", &rows)?;
    w.csv("shape_bands.csv", &band_rows)?;
    let missed: usize = rows.iter().map(|r| r.with_silt - r.detected).sum();
    w.predicate("shape-exhaustive", missed == 0, format!("{missed} members with J_n > 0 and no band"));
    w.predicate("mass-conservation", rows.iter().all(|r| r.conserved), "sum_L |C_L| = J_n on every decomposition");
    Ok(())
}

fn condition(spec: &ExperimentSpec, w: &mut RunWriter) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        n: usize,
        beta: String,
        status: String,
        r1: Option<f64>,
        r2: Option<f64>,
        i_n: Option<f64>,
        g_n: Option<f64>,
        h_n: Option<f64>,
        j1: Option<f64>,
        j2: Option<f64>,
        j3: Option<f64>,
        rho_n: Option<f64>,
        satisfied: Option<bool>,
        k_n: Option<f64>,
        gh_quotient: Option<f64>,
        quotient_holds: Option<bool>,
        distance: Option<f64>,
        skipped_mass: Option<f64>,
    }
    #[derive(Serialize)]
    struct AxRow {
        lo: f64,
        hi: f64,
        x: f64,
        a_x: Option<f64>,
        status: &'static str,
        samples: usize,
        empty_class: usize,
    }
    let c = &spec.cone;
    let tasks = grid_tasks(spec, w);
    let mut rows = Vec::new();
    for t in &tasks {
        let beta = match t.beta {
            Penalty::Weak(b) if b > 0.0 => b,
            _ => return Err(Error::InvalidArgument("condition-d needs finite beta > 0".into())),
        };
        let ens = sample(&ensemble_config(spec, t, spec.sampler.kind, true)?)?;
        let law = distance_law(&ens, c.bins)?;
        let lines = TestLineSet::for_length(t.n, c.lines_v)?;
        let ax = estimate_ax(&ens, &law, &lines, beta, AxOptions { a1: c.a1, a2: c.a2, r: c.r })?;
        let ax_rows: Vec<AxRow> = ax
            .entries
            .iter()
            .map(|e| {
                let (a_x, status) = match e.value {
                    AxValue::Defined(a) => (Some(a), "defined"),
                    AxValue::Undefined => (None, "undefined"),
                    AxValue::Missing => (None, "missing"),
                };
                AxRow { lo: e.lo, hi: e.hi, x: e.x, a_x, status, samples: e.samples, empty_class: e.empty_class }
            })
            .collect();
        w.csv(&format!("ax/{}.csv", t.stem()), &ax_rows)?;
        let mut row = Row {
            n: t.n,
            beta: beta_label(t.beta),
            status: "ok".into(),
            r1: None,
            r2: None,
            i_n: None,
            g_n: None,
            h_n: None,
            j1: None,
            j2: None,
            j3: None,
            rho_n: None,
            satisfied: None,
            k_n: None,
            gh_quotient: None,
            quotient_holds: None,
            distance: None,
            skipped_mass: None,
        };
        match integrals(&law, &ax, c.gamma, c.epsilon, None) {
            Ok(rep) => {
                let d = condition_d(&rep);
                let panel = bound_panel(&law, &ax)?;
                row.r1 = Some(rep.r1);
                row.r2 = Some(rep.r2);
                row.i_n = Some(rep.i_n);
                row.g_n = Some(rep.g_n);
                row.h_n = Some(rep.h_n);
                [row.j1, row.j2, row.j3] = rep.j_parts.map(Some);
                row.rho_n = d.rho_n;
                row.satisfied = Some(d.satisfied(c.rho_star));
                row.k_n = Some(panel.k_n);
                row.gh_quotient = Some(panel.gh_quotient);
                row.quotient_holds = Some(panel.quotient_holds);
                row.distance = Some(panel.distance);
                row.skipped_mass = Some(rep.skipped_mass);
            }
            Err(Error::Degenerate(msg)) => row.status = format!("degenerate: {msg}"),
            Err(e) => return Err(e),
        }
        rows.push(row);
    }
    w.csv("condition_d.csv", &rows)?;
    Ok(())
}

fn hull(spec: &ExperimentSpec, w: &mut RunWriter) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        n: usize,
        beta: String,
        x: f64,
        tail_r: f64,
        tail_chi: f64,
        ratio: f64,
    }
    let h = &spec.hull;
    let tasks = grid_tasks(spec, w);
    let mut rows = Vec::new();
    for t in &tasks {
        let ens = sample(&ensemble_config(spec, t, spec.sampler.kind, false)?)?;
        let rep = report_convex_hull(&ens, h.slack, h.grid_points, h.quantile)?;
        let label = t.label();
        w.predicate(format!("pathwise-{label}"), rep.pathwise, "R_n >= chi_n on every record");
        w.predicate(format!("lower-{label}"), rep.lower_holds, "tail ratio >= 1");
        let worst = rep.rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let detail = format!("max ratio {worst:.4} <= {}{}", rep.upper_limit, if rep.coverage_warning { " (thin tail)" } else { "" });
        w.predicate(format!("upper-{label}"), rep.upper_holds, detail);
        rows.extend(rep.rows.iter().map(|r| Row {
            n: t.n,
            beta: beta_label(t.beta),
            x: r.x,
            tail_r: r.tail_r,
            tail_chi: r.tail_chi,
            ratio: r.ratio,
        }));
    }
    w.csv("hull_tails.csv", &rows)?;
    Ok(())
}

fn palm(spec: &ExperimentSpec, w: &mut RunWriter) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        intensity: f64,
        area: f64,
        estimator: &'static str,
        centers: usize,
        value: f64,
        std_err: f64,
        expected: f64,
        z: f64,
    }
    let p = &spec.palm;
    let root = SeededSource::new(spec.seed, 0);
    let mut rows = Vec::new();
    for &lambda in &p.intensities {
        for &area in &p.areas {
            let source = root.fork(w.tasks.len() as u64);
            w.task(format!("lambda={lambda},area={area}"), source);
            let side = (p.points / lambda).sqrt();
            let window = Rect::new(0.0, 0.0, side, side)?;
            let points = poisson_points(lambda, &window, source)?;
            let r = (area / std::f64::consts::PI).sqrt();
            let mean = lambda * area;
            let empty = palm_empty_ball(&points, &window, r)?;
            let expected = (-mean).exp();
            rows.push(Row {
                intensity: lambda,
                area,
                estimator: "empty-ball",
                centers: empty.centers,
                value: empty.fraction,
                std_err: empty.std_err,
                expected,
                z: (empty.fraction - expected) / empty.std_err,
            });
            // unit mark penalty over all neighbour counts: E exp(-K) for K ~ Poisson(mean)
            let marked = palm_marked_points(&points, &window, r, 1.0, (0, usize::MAX))?;
            let expected = (-mean * (1.0 - (-1f64).exp())).exp();
            rows.push(Row {
                intensity: lambda,
                area,
                estimator: "marked",
                centers: marked.centers,
                value: marked.average,
                std_err: marked.std_err,
                expected,
                z: (marked.average - expected) / marked.std_err,
            });
        }
    }
    w.csv("palm.csv", &rows)?;
    let worst = rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    w.predicate("poisson-oracle", worst <= p.z_max, format!("max |z| = {worst:.3}"));
    Ok(())
}

fn nu(spec: &ExperimentSpec, w: &mut RunWriter) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        d: u32,
        nu: String,
        value: f64,
    }
    let rows = spec
        .nu
        .dims
        .iter()
        .map(|&d| {
            let r = nu_formula(d)?;
            Ok(Row { d, nu: r.to_string(), value: *r.numer() as f64 / *r.denom() as f64 })
        })
        .collect::<Result<Vec<_>>>()?;
    w.csv("nu.csv", &rows)
}
