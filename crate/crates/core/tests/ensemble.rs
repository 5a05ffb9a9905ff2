use std::collections::HashMap;
use std::io::BufReader;

use proptest::prelude::*;
use weaksaw::census::EnumerationBudget;
use weaksaw::ensemble::{
    distance_law, exact_expectations, read_ensemble, sample, write_ensemble, BinSpec, EnsembleConfig, Penalty,
    PivotChain, SamplerKind, Window,
};
use weaksaw::walk::{silt_count, silt_count_sites, LatticePath};
use weaksaw::SeededSource;

/// `(Z, E chi, E chi^2)` by direct summation over all `4^n` planar step words.
fn brute(n: usize, beta: Penalty) -> (f64, f64, f64) {
    let (mut z, mut c1, mut c2) = (0.0, 0.0, 0.0);
    for code in 0..4u64.pow(n as u32) {
        let (mut x, mut y) = (0i32, 0i32);
        let mut visits: HashMap<(i32, i32), u64> = HashMap::from([((0, 0), 1)]);
        let mut j = 0;
        let mut c = code;
        for _ in 0..n {
            match c % 4 {
                0 => x += 1,
                1 => x -= 1,
                2 => y += 1,
                _ => y -= 1,
            }
            c /= 4;
            let m = visits.entry((x, y)).or_insert(0);
            j += *m;
            *m += 1;
        }
        let w = match beta {
            Penalty::Weak(b) => (-b * j as f64).exp(),
            Penalty::Strict => (j == 0) as u8 as f64,
        };
        let r2 = (x * x + y * y) as f64;
        z += w;
        c1 += w * r2.sqrt();
        c2 += w * r2;
    }
    (z / 4f64.powi(n as i32), c1 / z, c2 / z)
}

fn cfg(n: usize, beta: Penalty, samples: usize, kind: SamplerKind, seed: u64) -> EnsembleConfig {
    EnsembleConfig::new(n, 2, beta, samples, kind, SeededSource::new(seed, 0))
}

#[test]
fn exact_expectations_match_direct_summation() {
    for beta in [Penalty::Weak(0.0), Penalty::Weak(0.3), Penalty::Weak(1.7), Penalty::Strict] {
        for n in [1, 4, 7] {
            let ex = exact_expectations(n, 2, beta, &EnumerationBudget::default()).unwrap();
            let (z, c1, c2) = brute(n, beta);
            assert!((ex.partition - z).abs() < 1e-12 * z, "{beta:?} n={n}");
            assert!((ex.mean_chi - c1).abs() < 1e-12 * c1.max(1.0));
            assert!((ex.mean_chi2 - c2).abs() < 1e-12 * c2.max(1.0));
        }
    }
}

#[test]
fn srw_second_moment_is_n() {
    let ex = exact_expectations(9, 2, Penalty::Weak(0.0), &EnumerationBudget::default()).unwrap();
    assert!((ex.mean_chi2 - 9.0).abs() < 1e-12);
    assert!((ex.partition - 1.0).abs() < 1e-12);
}

#[test]
fn samplers_agree_with_enumeration() {
    for (k, beta) in [Penalty::Weak(0.8), Penalty::Strict].into_iter().enumerate() {
        let (_, c1, c2) = brute(8, beta);
        for kind in [SamplerKind::Reweight, SamplerKind::Mcmc] {
            let ens = sample(&cfg(8, beta, 20_000, kind, 40 + k as u64)).unwrap();
            let e1 = ens.estimate(|r| r.chi);
            let e2 = ens.estimate(|r| r.chi * r.chi);
            assert!(e1.z_score(c1).abs() < 4.0, "{kind:?} {beta:?} chi {e1:?} vs {c1}");
            assert!(e2.z_score(c2).abs() < 4.0, "{kind:?} {beta:?} chi2 {e2:?} vs {c2}");
        }
    }
}

#[test]
fn strict_mcmc_yields_self_avoiding_paths() {
    let mut c = cfg(200, Penalty::Strict, 500, SamplerKind::Mcmc, 3);
    c.retain_paths = true;
    let ens = sample(&c).unwrap();
    for r in &ens.records {
        assert_eq!(r.j, 0);
        let p = r.path.as_ref().unwrap().unpack().unwrap();
        assert_eq!(silt_count(&p), 0);
        assert!((p.endpoint().norm() - r.chi).abs() < 1e-12);
    }
}

#[test]
fn windowed_ensembles_stay_in_the_window() {
    for kind in [SamplerKind::Mcmc, SamplerKind::Reweight] {
        let mut c = cfg(64, Penalty::Weak(1.0), 400, kind, 5);
        c.window = Some(Window::default_for(1.0).unwrap());
        let ens = sample(&c).unwrap();
        let (lo, hi) = c.window.unwrap().bounds(64);
        assert!(!ens.is_empty());
        assert!(ens.records.iter().all(|r| lo <= r.j && r.j <= hi), "{kind:?}");
    }
}

#[test]
fn same_seed_same_ensemble() {
    for kind in [SamplerKind::Mcmc, SamplerKind::Reweight] {
        let a = sample(&cfg(100, Penalty::Weak(0.5), 300, kind, 9)).unwrap();
        let b = sample(&cfg(100, Penalty::Weak(0.5), 300, kind, 9)).unwrap();
        let c = sample(&cfg(100, Penalty::Weak(0.5), 300, kind, 10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.records, c.records);
    }
}

#[test]
fn free_walk_mcmc_accepts_everything() {
    let ens = sample(&cfg(50, Penalty::Weak(0.0), 200, SamplerKind::Mcmc, 1)).unwrap();
    assert_eq!(ens.diagnostics.acceptance_rate, Some(1.0));
    let rw = sample(&cfg(50, Penalty::Weak(0.0), 200, SamplerKind::Reweight, 1)).unwrap();
    assert!((rw.diagnostics.ess - 200.0).abs() < 1e-9);
}

#[test]
fn persisted_ensembles_read_back() {
    let mut c = cfg(40, Penalty::Weak(0.7), 150, SamplerKind::Reweight, 2);
    c.retain_paths = true;
    let ens = sample(&c).unwrap();
    let mut buf = Vec::new();
    write_ensemble(&ens, &mut buf, true).unwrap();
    let back = read_ensemble(BufReader::new(&buf[..])).unwrap();
    assert_eq!(back, ens);
    assert!(read_ensemble(BufReader::new(&b"{}\n"[..])).is_err());
}

#[test]
fn distance_law_reproduces_moments() {
    let ens = sample(&cfg(256, Penalty::Weak(0.5), 2000, SamplerKind::Reweight, 6)).unwrap();
    let law = distance_law(&ens, BinSpec::Auto).unwrap();
    assert!((law.total_mass() - 1.0).abs() < 1e-12);
    let e1 = ens.estimate(|r| r.chi).mean;
    let e2 = ens.estimate(|r| r.chi * r.chi).mean;
    assert!((law.mean - e1).abs() < 1e-9 * e1);
    assert!((law.mean_sq - e2).abs() < 1e-9 * e2);
    let members: usize = law.bins.iter().map(|b| b.members.len()).sum();
    assert_eq!(members, ens.len());
    assert!(distance_law(&ens, BinSpec::Count(0)).is_err());
}

#[test]
fn penalty_parses_infinity() {
    #[derive(serde::Deserialize)]
    struct Holder {
        beta: Vec<Penalty>,
    }
    let h: Holder = serde_json::from_str(r#"{"beta": [0.5, "inf", 2]}"#).unwrap();
    assert_eq!(h.beta, vec![Penalty::Weak(0.5), Penalty::Strict, Penalty::Weak(2.0)]);
    assert!(Penalty::from_beta(-1.0).is_err());
    assert_eq!(Penalty::from_beta(f64::INFINITY).unwrap(), Penalty::Strict);
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(sample(&cfg(10, Penalty::Weak(1.0), 0, SamplerKind::Mcmc, 0)).is_err());
    let mut c = cfg(10, Penalty::Weak(1.0), 10, SamplerKind::Mcmc, 0);
    c.mcmc.pivot_fraction = 1.5;
    assert!(sample(&c).is_err());
    assert!(sample(&cfg(20, Penalty::Weak(1.0), 10, SamplerKind::Exact, 0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chain_tracks_silt(n in 4usize..120, beta in 0.0f64..3.0, moves in 1u64..400, seed in 0u64..10_000) {
        let c = cfg(n, Penalty::Weak(beta), 1, SamplerKind::Mcmc, seed);
        let mut chain = PivotChain::new(&c, SeededSource::new(seed, 1)).unwrap();
        chain.run(moves);
        let sites = chain.sites().to_vec();
        prop_assert_eq!(chain.silt(), silt_count_sites(&sites));
        let path = LatticePath::from_sites(2, &sites).unwrap();
        prop_assert_eq!(path.len(), n);
        prop_assert_eq!(chain.path(), path);
    }

    #[test]
    fn weights_decrease_in_silt(beta in 0.0f64..5.0, j in 0u64..1000) {
        let p = Penalty::Weak(beta);
        prop_assert!(p.weight(j + 1) <= p.weight(j));
        prop_assert!(Penalty::Strict.weight(j + 1) == 0.0);
    }

    #[test]
    fn window_bounds_bracket(b1 in 0.01f64..1.0, span in 0.01f64..3.0, n in 1usize..5000) {
        let w = Window::new(b1, b1 + span).unwrap();
        let (lo, hi) = w.bounds(n);
        prop_assert!(lo as f64 >= b1 * n as f64 - 1e-9);
        prop_assert!(hi as f64 <= (b1 + span) * n as f64 + 1e-9);
    }

    #[test]
    fn estimates_lie_in_observed_range(seed in 0u64..500) {
        let ens = sample(&cfg(30, Penalty::Weak(0.4), 50, SamplerKind::Reweight, seed)).unwrap();
        let e = ens.estimate(|r| r.chi);
        let lo = ens.records.iter().map(|r| r.chi).fold(f64::INFINITY, f64::min);
        let hi = ens.records.iter().map(|r| r.chi).fold(0.0, f64::max);
        prop_assert!(lo - 1e-9 <= e.mean && e.mean <= hi + 1e-9);
    }
}
