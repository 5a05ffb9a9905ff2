use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use num_rational::Ratio;
use proptest::prelude::*;
use weaksaw::cone::{
    classify_lines, cone_decompose, detect_shapes, estimate_ax, extract_process, palm_empty_ball, palm_marked_lines,
    palm_marked_points, poisson_points, AxOptions, IntersectionProcess, LineClass, Point, Rect, TestLineSet,
};
use weaksaw::asymptotics::AxValue;
use weaksaw::ensemble::{distance_law, sample, BinSpec, EnsembleConfig, Penalty, SamplerKind};
use weaksaw::walk::{sample_srw, silt_count, Site};
use weaksaw::SeededSource;

/// Cone masses by angular distance: the nearest half-line to a point is the
/// one with the smallest angle to it, ties split evenly, the origin goes to all.
fn oracle_masses(process: &IntersectionProcess, m: usize) -> Vec<Ratio<u128>> {
    let mut out = vec![Ratio::from_integer(0); m];
    for (site, &mult) in &process.atoms {
        let (x, y) = (site.0[0] as f64, site.0[1] as f64);
        let nearest: Vec<usize> = if x == 0.0 && y == 0.0 {
            (0..m).collect()
        } else {
            let phi = y.atan2(x).rem_euclid(TAU);
            let gaps: Vec<f64> = (0..m)
                .map(|k| {
                    let d = (phi - TAU * k as f64 / m as f64).rem_euclid(TAU);
                    d.min(TAU - d)
                })
                .collect();
            let best = gaps.iter().copied().fold(f64::INFINITY, f64::min);
            (0..m).filter(|&k| gaps[k] <= best + 1e-9).collect()
        };
        let share = Ratio::new(mult as u128, nearest.len() as u128);
        for k in nearest {
            out[k] += share;
        }
    }
    out
}

fn exact_masses(dec: &weaksaw::cone::ConeDecomposition) -> Vec<Ratio<u128>> {
    dec.numerators.iter().map(|&c| Ratio::new(c, dec.denominator)).collect()
}

fn process(atoms: &[((i32, i32), u64)]) -> IntersectionProcess {
    let atoms: BTreeMap<Site, u64> = atoms.iter().map(|&((x, y), m)| (Site::planar(x, y), m)).collect();
    let total = atoms.values().sum();
    IntersectionProcess { atoms, total }
}

fn atoms() -> impl Strategy<Value = IntersectionProcess> {
    prop::collection::vec(((-40i32..=40, -40i32..=40), 1u64..6), 0..40).prop_map(|v| process(&v))
}

#[test]
fn masses_match_angular_oracle_on_walks() {
    for k in 0..60u64 {
        let n = 50 + 13 * k as usize;
        let p = sample_srw(n, 2, SeededSource::new(21, k)).unwrap();
        let proc_ = extract_process(&p);
        assert_eq!(proc_.total, silt_count(&p));
        for m in [1, 2, 4, 6, 8, 12, 24] {
            let dec = cone_decompose(&proc_, &TestLineSet::new(m).unwrap(), n);
            assert_eq!(exact_masses(&dec), oracle_masses(&proc_, m), "k={k} m={m}");
        }
    }
}

#[test]
fn line_count_scales_with_root_n() {
    let lines = TestLineSet::for_length(1000, 1.0).unwrap();
    assert_eq!(lines.len(), 32);
    assert_eq!(TestLineSet::for_length(1024, 0.5).unwrap().len(), 16);
    assert!(TestLineSet::new(0).is_err());
}

#[test]
fn classes_on_a_hand_built_process() {
    // n = 100: L_{1/2} needs 2|C| in [a1 10, a2 10]
    let proc_ = process(&[((5, 0), 10), ((0, 3), 1), ((-7, 0), 200)]);
    let dec = cone_decompose(&proc_, &TestLineSet::new(4).unwrap(), 100);
    let c = classify_lines(&dec, 1.0, 4.0, 0.0).unwrap();
    assert_eq!(c.classes, vec![LineClass::HalfBand, LineClass::Minus, LineClass::Plus, LineClass::Empty]);
    assert_eq!(c.half, vec![0]);
    assert!(classify_lines(&dec, 2.0, 1.0, 0.0).is_err());
}

#[test]
fn shapes_on_typical_walks() {
    for beta in [0.25, 1.0] {
        let mut cfg =
            EnsembleConfig::new(257, 2, Penalty::Weak(beta), 400, SamplerKind::Mcmc, SeededSource::new(31, 0));
        cfg.retain_paths = true;
        let ens = sample(&cfg).unwrap();
        let lines = TestLineSet::for_length(257, 1.0).unwrap();
        for r in &ens.records {
            let dec = cone_decompose(&extract_process(&r.path.as_ref().unwrap().unpack().unwrap()), &lines, 257);
            if dec.j > 0 {
                let rep = detect_shapes(&dec, 0.5, 4.0, 0.25, 0.5).unwrap();
                assert!(!rep.shapes().is_empty());
                let total: f64 = rep.bands.iter().map(|b| b.sum).fold(0.0, f64::max);
                assert!(total <= dec.j as f64 + 1e-9);
            }
        }
    }
}

#[test]
fn shape_of_a_single_heavy_line() {
    let dec = cone_decompose(&process(&[((9, 0), 5000)]), &TestLineSet::new(8).unwrap(), 4096);
    let rep = detect_shapes(&dec, 0.5, 4.0, 0.0, 0.5).unwrap();
    // 2|C| = 10^4 >= a1 n, only the top band holds it
    assert_eq!(rep.shapes(), vec![1.0]);
    assert!(!rep.circular);
    assert!(detect_shapes(&cone_decompose(&process(&[]), &TestLineSet::new(8).unwrap(), 10), 0.5, 4.0, 0.0, 0.5)
        .is_err());
}

#[test]
fn ax_profile_from_an_ensemble() {
    let mut cfg = EnsembleConfig::new(129, 2, Penalty::Weak(1.0), 1500, SamplerKind::Mcmc, SeededSource::new(7, 0));
    cfg.retain_paths = true;
    let ens = sample(&cfg).unwrap();
    let law = distance_law(&ens, BinSpec::Auto).unwrap();
    let lines = TestLineSet::for_length(129, 1.0).unwrap();
    let ax = estimate_ax(&ens, &law, &lines, 1.0, AxOptions::default()).unwrap();
    assert_eq!(ax.entries.len(), law.bins.len());
    let mut defined = 0;
    for (e, b) in ax.entries.iter().zip(&law.bins) {
        assert_eq!(e.samples, b.members.len());
        assert!(e.empty_class <= e.samples);
        match e.value {
            AxValue::Missing => assert_eq!(e.samples, 0),
            AxValue::Defined(a) => {
                defined += 1;
                assert!(a >= 0.0 && a.is_finite());
            }
            AxValue::Undefined => assert!(e.samples > 0),
        }
    }
    assert!(defined > 0);
    let mut bare = cfg.clone();
    bare.retain_paths = false;
    let ens = sample(&bare).unwrap();
    assert!(estimate_ax(&ens, &law, &lines, 1.0, AxOptions::default()).is_err());
}

/// `P(K = k)` for `K ~ Poisson(mu)`.
fn poisson_pmf(mu: f64, k: usize) -> f64 {
    (-mu + k as f64 * mu.ln() - (1..=k).map(|i| (i as f64).ln()).sum::<f64>()).exp()
}

#[test]
fn palm_empty_ball_matches_void_probability() {
    let mut stream = 0;
    for lambda in [0.5f64, 1.0, 2.0] {
        for ball in [0.5, 1.0] {
            let side = (30_000.0 / lambda).sqrt();
            let window = Rect::new(0.0, 0.0, side, side).unwrap();
            let pts = poisson_points(lambda, &window, SeededSource::new(17, stream)).unwrap();
            stream += 1;
            let r = (ball / PI).sqrt();
            let est = palm_empty_ball(&pts, &window, r).unwrap();
            let target = (-lambda * ball).exp();
            let z = (est.fraction - target) / est.std_err;
            assert!(z.abs() <= 3.5, "lambda={lambda} area={ball}: {} vs {target} (z {z})", est.fraction);
        }
    }
}

#[test]
fn palm_marks_match_poisson_law() {
    let lambda = 1.5;
    let side = 150.0;
    let window = Rect::new(0.0, 0.0, side, side).unwrap();
    let pts = poisson_points(lambda, &window, SeededSource::new(18, 0)).unwrap();
    let r = 0.6f64;
    let mu = lambda * PI * r * r;
    for (beta, band) in [(0.0, (0, 0)), (0.7, (0, 3)), (1.2, (1, 1000))] {
        let est = palm_marked_points(&pts, &window, r, beta, band).unwrap();
        let target: f64 = (band.0..=band.1.min(200)).map(|k| (-beta * k as f64).exp() * poisson_pmf(mu, k)).sum();
        let z = (est.average - target) / est.std_err;
        assert!(z.abs() <= 3.5, "beta={beta} band={band:?}: {} vs {target}", est.average);
        assert!((est.sum / est.centers as f64 - est.average).abs() < 1e-12);
    }
}

#[test]
fn palm_rejects_bad_input() {
    let w = Rect::new(0.0, 0.0, 1.0, 1.0).unwrap();
    assert!(Rect::new(1.0, 0.0, 0.0, 1.0).is_err());
    assert!(poisson_points(0.0, &w, SeededSource::new(0, 0)).is_err());
    assert!(palm_empty_ball(&[Point::new(0.5, 0.5)], &w, 0.0).is_err());
    assert!(palm_marked_points(&[Point::new(0.5, 0.5)], &w, 0.1, -1.0, (0, 1)).is_err());
}

#[test]
fn palm_works_in_single_precision() {
    let w64 = Rect::new(0.0, 0.0, 60.0, 60.0).unwrap();
    let pts = poisson_points(1.0, &w64, SeededSource::new(19, 0)).unwrap();
    let p32: Vec<Point<f32>> = pts.iter().map(|p| Point::new(p.x as f32, p.y as f32)).collect();
    let w32 = Rect::new(0.0f32, 0.0, 60.0, 60.0).unwrap();
    let a = palm_empty_ball(&pts, &w64, 0.5).unwrap();
    let b = palm_empty_ball(&p32, &w32, 0.5f32).unwrap();
    assert!((a.fraction - b.fraction as f64).abs() < 0.01);
}

#[test]
fn marked_lines_sum() {
    let proc_ = process(&[((4, 0), 3), ((0, -2), 1)]);
    let lines = TestLineSet::new(4).unwrap();
    assert_eq!(palm_marked_lines(&proc_, &lines, &[], 1.0).unwrap(), 0.0);
    assert_eq!(palm_marked_lines(&proc_, &lines, &[0, 1, 2, 3], 0.0).unwrap(), 4.0);
    let v = palm_marked_lines(&proc_, &lines, &[0, 3], 0.5).unwrap();
    assert!((v - ((-1.5f64).exp() + (-0.5f64).exp())).abs() < 1e-15);
    assert!(palm_marked_lines(&proc_, &lines, &[4], 0.5).is_err());
}

proptest! {
    #[test]
    fn decomposition_conserves_mass(p in atoms(), m in 1usize..40) {
        let dec = cone_decompose(&p, &TestLineSet::new(m).unwrap(), 100);
        prop_assert!(dec.is_conserved());
        let total: Ratio<u128> = exact_masses(&dec).into_iter().sum();
        prop_assert_eq!(total, Ratio::from_integer(p.total as u128));
    }

    #[test]
    fn decomposition_matches_oracle(p in atoms(), m in 1usize..30) {
        let dec = cone_decompose(&p, &TestLineSet::new(m).unwrap(), 100);
        prop_assert_eq!(exact_masses(&dec), oracle_masses(&p, m));
    }

    #[test]
    fn quarter_turn_permutes_cones(p in atoms(), q in 1usize..8) {
        let m = 4 * q;
        let lines = TestLineSet::new(m).unwrap();
        let turned = process(&p.atoms.iter().map(|(s, &c)| ((-s.0[1], s.0[0]), c)).collect::<Vec<_>>());
        let a = exact_masses(&cone_decompose(&p, &lines, 100));
        let b = exact_masses(&cone_decompose(&turned, &lines, 100));
        for k in 0..m {
            prop_assert_eq!(a[k], b[(k + q) % m]);
        }
    }

    #[test]
    fn classes_partition_the_lines(p in atoms(), m in 1usize..40, n in 4usize..5000, delta in 0.0f64..0.49) {
        let dec = cone_decompose(&p, &TestLineSet::new(m).unwrap(), n);
        let c = classify_lines(&dec, 0.5, 4.0, delta).unwrap();
        let sizes: usize = [LineClass::HalfBand, LineClass::Minus, LineClass::Plus, LineClass::Empty]
            .iter()
            .map(|&k| c.members(k).len())
            .sum();
        prop_assert_eq!(sizes, m);
        for k in c.members(LineClass::Empty) {
            prop_assert!(dec.is_empty_line(k));
        }
        for k in &c.half {
            prop_assert_eq!(c.classes[*k], LineClass::HalfBand);
        }
    }

    #[test]
    fn bands_are_ordered(p in atoms(), m in 1usize..40, n in 4usize..5000) {
        prop_assume!(p.total > 0);
        let dec = cone_decompose(&p, &TestLineSet::new(m).unwrap(), n);
        let rep = detect_shapes(&dec, 0.5, 4.0, 0.25, 0.5).unwrap();
        prop_assert_eq!(rep.bands.len(), 5);
        prop_assert_eq!(rep.bands[0].lo, 0.0);
        prop_assert!(rep.bands.last().unwrap().hi.is_infinite());
        for b in &rep.bands {
            prop_assert!(b.sum <= p.total as f64 + 1e-9);
            prop_assert_eq!(b.qualifies, b.sum >= rep.threshold * (1.0 - 1e-12));
        }
    }
}
