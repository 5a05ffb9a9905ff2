use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::{Diagnostics, EnsembleConfig, Penalty, Record, SamplerKind, WeightedEnsemble};
use crate::error::{invalid, Error, Result};
use crate::walk::{insert_repetitions, sample_srw_with, silt_count_sites, LatticePath, PackedSteps, Site, MAX_DIM};
use crate::SeededSource;

/// A signed axis permutation: `w[i] = sign[i] * v[perm[i]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Symmetry {
    perm: [usize; MAX_DIM],
    sign: [i32; MAX_DIM],
    dim: usize,
}

impl Symmetry {
    #[inline]
    fn apply(&self, v: Site) -> Site {
        let mut w = [0i32; MAX_DIM];
        for i in 0..self.dim {
            w[i] = self.sign[i] * v.0[self.perm[i]];
        }
        Site(w)
    }

    fn is_identity(&self) -> bool {
        (0..self.dim).all(|i| self.perm[i] == i && self.sign[i] == 1)
    }

    /// The `2^d d!` lattice symmetries fixing the origin, identity excluded.
    fn non_trivial(dim: usize) -> Vec<Symmetry> {
        let mut perms = Vec::new();
        permutations(&mut (0..dim).collect(), 0, &mut perms);
        let mut out = Vec::new();
        for p in perms {
            for mask in 0..(1u32 << dim) {
                let mut perm = [0; MAX_DIM];
                let mut sign = [1; MAX_DIM];
                for i in 0..dim {
                    perm[i] = p[i];
                    sign[i] = if mask >> i & 1 == 1 { -1 } else { 1 };
                }
                let g = Symmetry { perm, sign, dim };
                if !g.is_identity() {
                    out.push(g);
                }
            }
        }
        out
    }
}

fn permutations(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, out);
        items.swap(k, i);
    }
}

/// Metropolis chain on fixed-length walks targeting `exp(-beta J_n)`.
///
/// Moves are pivots (a lattice symmetry applied to the suffix after a random
/// site) and local moves (corner flips, backtrack rotations, end-step
/// redraws). All proposals are symmetric, so a move raising `J_n` by `dJ` is
/// accepted with probability `min(1, exp(-beta dJ))`. Moves leaving the
/// window are rejected. In strict mode only self-avoiding walks are visited.
pub struct PivotChain {
    n: usize,
    dim: usize,
    sites: Vec<Site>,
    j: u64,
    penalty: Penalty,
    lo: u64,
    hi: u64,
    pivot_fraction: f64,
    symmetries: Vec<Symmetry>,
    rng: ChaCha8Rng,
    scratch: Vec<Site>,
    counts: FxHashMap<u64, u32>,
    proposals: u64,
    accepted: u64,
}

impl PivotChain {
    pub fn new(cfg: &EnsembleConfig, src: SeededSource) -> Result<Self> {
        cfg.validate()?;
        if cfg.n < 4 {
            return invalid(format!("the chain needs n >= 4, got {}", cfg.n));
        }
        let (lo, hi) = match cfg.window {
            Some(w) => w.bounds(cfg.n),
            None => (0, u64::MAX),
        };
        let mut rng = src.rng();
        let start = initial_path(cfg, lo, hi, &mut rng)?;
        let sites = start.sites();
        let j = silt_count_sites(&sites);
        let mut counts = FxHashMap::default();
        counts.reserve(cfg.n + 1);
        Ok(Self {
            n: cfg.n,
            dim: cfg.dim,
            sites,
            j,
            penalty: cfg.beta,
            lo,
            hi,
            pivot_fraction: cfg.mcmc.pivot_fraction,
            symmetries: Symmetry::non_trivial(cfg.dim),
            rng,
            scratch: Vec::with_capacity(cfg.n + 1),
            counts,
            proposals: 0,
            accepted: 0,
        })
    }

    pub fn silt(&self) -> u64 {
        self.j
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            return f64::NAN;
        }
        self.accepted as f64 / self.proposals as f64
    }

    pub fn path(&self) -> LatticePath {
        LatticePath::from_sites(self.dim, &self.sites).expect("chain states are valid walks")
    }

    pub fn record(&self, retain_path: bool) -> Record {
        let end = self.sites[self.n];
        let r2 = self.sites.iter().map(|s| s.norm_sq()).max().unwrap_or(0);
        Record {
            j: self.j,
            chi: end.norm(),
            r: (r2 as f64).sqrt(),
            weight: 1.0,
            path: retain_path.then(|| PackedSteps::pack(&self.path())),
        }
    }

    /// Attempts one move; returns whether it was accepted.
    pub fn step(&mut self) -> bool {
        self.proposals += 1;
        let ok = if self.rng.random::<f64>() < self.pivot_fraction { self.pivot() } else { self.local() };
        self.accepted += ok as u64;
        ok
    }

    pub fn run(&mut self, moves: u64) {
        for _ in 0..moves {
            self.step();
        }
    }

    /// Largest `J_n` the current proposal may reach and still be accepted.
    fn ceiling(&mut self) -> u64 {
        let cap = match self.penalty {
            Penalty::Strict => 0,
            Penalty::Weak(b) if b == 0.0 => u64::MAX,
            Penalty::Weak(b) => {
                // accept iff exp(-b dJ) >= u, u uniform on (0, 1]
                let u = 1.0 - self.rng.random::<f64>();
                let slack = (-u.ln() / b).floor();
                if slack >= (u64::MAX / 2) as f64 {
                    u64::MAX
                } else {
                    self.j.saturating_add(slack as u64)
                }
            }
        };
        cap.min(self.hi)
    }

    fn pivot(&mut self) -> bool {
        let n = self.n;
        let k = self.rng.random_range(0..n);
        let g = self.symmetries[self.rng.random_range(0..self.symmetries.len())];
        let ceiling = self.ceiling();
        let centre = self.sites[k];
        self.scratch.clear();
        self.scratch.extend(self.sites[k + 1..].iter().map(|&s| centre.add(g.apply(s.sub(centre)))));

        // J = J(prefix) + J(suffix) + cross; only the cross term changes.
        let counts = &mut self.counts;
        counts.clear();
        let (prefix, suffix) = self.sites.split_at(k + 1);
        let moved = &self.scratch;
        let new_j = if prefix.len() <= suffix.len() {
            for s in prefix {
                *counts.entry(s.key()).or_insert(0) += 1;
            }
            let old_cross: u64 = if self.j == 0 {
                0
            } else {
                suffix.iter().map(|s| *counts.get(&s.key()).unwrap_or(&0) as u64).sum()
            };
            let base = self.j - old_cross;
            let mut j = base;
            for s in moved {
                if let Some(&m) = counts.get(&s.key()) {
                    j += m as u64;
                    if j > ceiling {
                        return false;
                    }
                }
            }
            j
        } else {
            let old_cross: u64 = if self.j == 0 {
                0
            } else {
                for s in suffix {
                    *counts.entry(s.key()).or_insert(0) += 1;
                }
                let c = prefix.iter().map(|s| *counts.get(&s.key()).unwrap_or(&0) as u64).sum();
                counts.clear();
                c
            };
            for s in moved {
                *counts.entry(s.key()).or_insert(0) += 1;
            }
            let base = self.j - old_cross;
            let mut j = base;
            for s in prefix {
                if let Some(&m) = counts.get(&s.key()) {
                    j += m as u64;
                    if j > ceiling {
                        return false;
                    }
                }
            }
            j
        };
        if new_j > ceiling || new_j < self.lo {
            return false;
        }
        self.sites[k + 1..].copy_from_slice(&self.scratch);
        self.j = new_j;
        true
    }

    fn local(&mut self) -> bool {
        let n = self.n;
        let i = self.rng.random_range(1..=n);
        let old = self.sites[i];
        let prev = self.sites[i - 1];
        let candidate = if i == n {
            Some(self.random_neighbour(prev))
        } else {
            let next = self.sites[i + 1];
            match next.sub(prev).norm_sq() {
                0 => Some(self.random_neighbour(prev)),
                2 => Some(prev.add(next).sub(old)),
                _ => None,
            }
        };
        let new = match candidate {
            Some(s) if s != old => s,
            // straight segment or unchanged draw: the null move
            _ => return true,
        };
        let ceiling = self.ceiling();
        let (mut with_old, mut with_new) = (0u64, 0u64);
        for (k, s) in self.sites.iter().enumerate() {
            if k != i {
                with_old += (*s == old) as u64;
                with_new += (*s == new) as u64;
            }
        }
        let new_j = self.j - with_old + with_new;
        if new_j > ceiling || new_j < self.lo {
            return false;
        }
        self.sites[i] = new;
        self.j = new_j;
        true
    }

    fn random_neighbour(&mut self, s: Site) -> Site {
        let k = self.rng.random_range(0..2 * self.dim);
        let mut c = s.0;
        c[k / 2] += if k % 2 == 1 { -1 } else { 1 };
        Site(c)
    }
}

/// Straight rod when it is admissible, otherwise a rod with backtracks
/// inserted to reach the window, otherwise random-walk draws.
fn initial_path(cfg: &EnsembleConfig, lo: u64, hi: u64, rng: &mut ChaCha8Rng) -> Result<LatticePath> {
    let n = cfg.n;
    let admissible = |j: u64| lo <= j && j <= hi && (cfg.beta != Penalty::Strict || j == 0);
    let rod = LatticePath::straight(cfg.dim, n)?;
    if admissible(0) {
        return Ok(rod);
    }
    // each backtrack adds exactly 2 to J
    let k = lo.div_ceil(2) as usize;
    if k >= 1 && 4 * k <= n + 1 && admissible(2 * k as u64) {
        let positions: Vec<usize> = (0..k).map(|t| 2 * t + 1).collect();
        return insert_repetitions(&rod, &positions);
    }
    for _ in 0..cfg.mcmc.init_attempts {
        let p = sample_srw_with(rng, n, cfg.dim)?;
        if admissible(silt_count_sites(&p.sites())) {
            return Ok(p);
        }
    }
    Err(Error::Initialization(format!(
        "no admissible start with J in [{lo}, {hi}] after {} attempts",
        cfg.mcmc.init_attempts
    )))
}

/// Runs `mcmc.chains` independent chains on forked streams and pools their
/// thinned samples in stream order.
pub fn sample_mcmc(cfg: &EnsembleConfig) -> Result<WeightedEnsemble> {
    if cfg.sampler != SamplerKind::Mcmc {
        return invalid("sample_mcmc needs sampler = mcmc");
    }
    cfg.validate()?;
    let chains = cfg.mcmc.chains.min(cfg.samples);
    let per_chain: Vec<usize> =
        (0..chains).map(|c| cfg.samples / chains + (c < cfg.samples % chains) as usize).collect();
    let runs = per_chain
        .par_iter()
        .enumerate()
        .map(|(c, &count)| {
            let mut chain = PivotChain::new(cfg, cfg.seed.fork(c as u64))?;
            chain.run(cfg.mcmc.burn_in);
            let (p0, a0) = (chain.proposals, chain.accepted);
            let mut records = Vec::with_capacity(count);
            for _ in 0..count {
                chain.run(cfg.mcmc.thin);
                records.push(chain.record(cfg.retain_paths));
            }
            Ok((records, chain.proposals - p0, chain.accepted - a0))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut diagnostics = Diagnostics::default();
    let mut records = Vec::with_capacity(cfg.samples);
    let (mut proposals, mut accepted) = (0u64, 0u64);
    for (recs, p, a) in runs {
        diagnostics.chain_lengths.push(recs.len());
        records.extend(recs);
        proposals += p;
        accepted += a;
    }
    diagnostics.draws = proposals;
    diagnostics.acceptance_rate = Some(accepted as f64 / proposals.max(1) as f64);
    Ok(WeightedEnsemble::assemble(cfg.clone(), records, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{McmcParams, Window};

    fn config(n: usize, dim: usize, beta: Penalty) -> EnsembleConfig {
        let mut cfg = EnsembleConfig::new(n, dim, beta, 200, SamplerKind::Mcmc, SeededSource::new(11, 0));
        cfg.mcmc = McmcParams { burn_in: 100, thin: 5, pivot_fraction: 0.5, chains: 2, init_attempts: 100 };
        cfg
    }

    #[test]
    fn symmetry_group_sizes() {
        assert_eq!(Symmetry::non_trivial(1).len(), 1);
        assert_eq!(Symmetry::non_trivial(2).len(), 7);
        assert_eq!(Symmetry::non_trivial(3).len(), 47);
    }

    #[test]
    fn tracked_silt_stays_exact() {
        for (dim, beta) in [(2, Penalty::Weak(0.7)), (3, Penalty::Weak(0.2)), (2, Penalty::Weak(0.0)), (2, Penalty::Strict)] {
            let cfg = config(60, dim, beta);
            let mut chain = PivotChain::new(&cfg, SeededSource::new(5, 1)).unwrap();
            for _ in 0..300 {
                chain.run(7);
                assert_eq!(chain.silt(), silt_count_sites(chain.sites()));
                // validity of the walk
                chain.path();
                if beta == Penalty::Strict {
                    assert_eq!(chain.silt(), 0);
                }
            }
        }
    }

    #[test]
    fn zero_beta_accepts_everything() {
        let mut chain = PivotChain::new(&config(30, 2, Penalty::Weak(0.0)), SeededSource::new(1, 1)).unwrap();
        chain.run(5_000);
        assert_eq!(chain.acceptance_rate(), 1.0);
    }

    #[test]
    fn window_respected() {
        let mut cfg = config(40, 2, Penalty::Weak(0.5));
        cfg.window = Some(Window::new(0.1, 0.5).unwrap());
        let ens = sample_mcmc(&cfg).unwrap();
        assert!(ens.records.iter().all(|r| (4..=20).contains(&r.j)));
    }

    #[test]
    fn deterministic_stream() {
        let cfg = config(20, 2, Penalty::Weak(1.0));
        assert_eq!(sample_mcmc(&cfg).unwrap(), sample_mcmc(&cfg).unwrap());
    }

    #[test]
    fn rejects_short_walks_and_impossible_windows() {
        assert!(PivotChain::new(&config(3, 2, Penalty::Weak(1.0)), SeededSource::new(1, 1)).is_err());
        let mut cfg = config(10, 2, Penalty::Strict);
        cfg.window = Some(Window::new(0.5, 1.0).unwrap());
        assert!(matches!(PivotChain::new(&cfg, SeededSource::new(1, 1)), Err(Error::Initialization(_))));
    }
}
