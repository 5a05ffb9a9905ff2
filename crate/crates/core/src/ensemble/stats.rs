//! Compensated sums and Markov-chain autocorrelation estimates.

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AutocorrTime {
    /// `tau_int = 1/2 + sum_{t=1}^{W} rho(t)`; equals 1/2 for uncorrelated data.
    pub tau: f64,
    pub window: usize,
}

/// Integrated autocorrelation time with the automatic windowing rule: the
/// window `W` is the first lag with `W >= c * tau_int(W)`.
///
/// Autocovariances are pooled across the given chains around the common mean.
pub fn integrated_autocorrelation(chains: &[&[f64]], c: f64) -> AutocorrTime {
    let total: usize = chains.iter().map(|ch| ch.len()).sum();
    if total < 2 {
        return AutocorrTime { tau: 0.5, window: 0 };
    }
    let mean = chains.iter().flat_map(|ch| ch.iter()).sum::<f64>() / total as f64;
    let centred: Vec<Vec<f64>> = chains.iter().map(|ch| ch.iter().map(|x| x - mean).collect()).collect();
    let var = centred.iter().flat_map(|ch| ch.iter()).map(|x| x * x).sum::<f64>() / total as f64;
    if var <= 0.0 {
        return AutocorrTime { tau: 0.5, window: 0 };
    }
    let longest = chains.iter().map(|ch| ch.len()).max().unwrap_or(0);
    let mut tau = 0.5;
    let mut lag = 1;
    while lag < longest / 2 {
        let mut acc = 0.0;
        let mut pairs = 0usize;
        for ch in &centred {
            if ch.len() > lag {
                acc += ch.iter().zip(&ch[lag..]).map(|(a, b)| a * b).sum::<f64>();
                pairs += ch.len() - lag;
            }
        }
        if pairs == 0 {
            break;
        }
        tau += acc / pairs as f64 / var;
        if lag as f64 >= c * tau {
            break;
        }
        lag += 1;
    }
    AutocorrTime { tau: tau.max(0.5), window: lag }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn compensated_sum() {
        let s: NeumaierSum = [1e16, 1.0, -1e16].into_iter().collect();
        assert_eq!(s.value(), 1.0);
    }

    #[test]
    fn white_noise_has_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let t = integrated_autocorrelation(&[&xs], 6.0);
        assert!((t.tau - 0.5).abs() < 0.05, "{t:?}");
    }

    #[test]
    fn ar1_matches_closed_form() {
        // AR(1) with coefficient a: tau_int = (1 + a) / (2 (1 - a))
        let a: f64 = 0.8;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut x = 0.0;
        let xs: Vec<f64> = (0..200_000)
            .map(|_| {
                x = a * x + (rng.random::<f64>() - 0.5);
                x
            })
            .collect();
        let t = integrated_autocorrelation(&[&xs[..100_000], &xs[100_000..]], 6.0);
        let expected = (1.0 + a) / (2.0 * (1.0 - a));
        assert!((t.tau - expected).abs() / expected < 0.1, "{t:?} vs {expected}");
    }

    #[test]
    fn constant_series() {
        let xs = [3.0; 50];
        assert_eq!(integrated_autocorrelation(&[&xs], 6.0).tau, 0.5);
    }
}
