use serde::Serialize;

use super::profile::{q_value, radii_r1_r2};
use super::{from_usize, lit, AxTable, AxValue, RadialLaw, Real};
use crate::error::{invalid, Error, Result};

/// Caller-supplied constants for the reference band
/// `gamma c(rho) beta^(1/2) n^(3/4 - eps) <= I_n / g(n) <= M beta^(1/2) n^(3/4)`.
/// Reported, never asserted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandConstants<T> {
    pub gamma_c: T,
    pub m_upper: T,
}

/// Stieltjes sums of `x q(x)`, `a_x^(1/2) q(x)` and `q(x)` against the law,
/// each split over `[0, r1]`, `(r1, r2)` and `[r2, n]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralReport<T> {
    pub n: usize,
    pub beta: T,
    pub r1: T,
    pub r2: T,
    /// `I_n = ∫ x q(x) dP`.
    pub i_n: T,
    /// `g(n) = ∫ a_x^(1/2) q(x) dP`.
    pub g_n: T,
    /// `h(n) = ∫ q(x) dP`.
    pub h_n: T,
    /// Parts of `I_n`: `J1`, `J2`, `J3`.
    pub j_parts: [T; 3],
    pub g_parts: [T; 3],
    pub h_parts: [T; 3],
    /// `I_n / g(n)`.
    pub ratio: T,
    pub band: Option<(T, T)>,
    /// Law mass sitting in bins whose `a_x` is undefined or missing.
    pub skipped_mass: T,
}

/// Integrals with the radii taken from the profile, see [`super::radii_r1_r2`].
pub fn integrals<T: Real>(
    law: &RadialLaw<T>,
    ax: &AxTable<T>,
    gamma: T,
    epsilon: T,
    band: Option<BandConstants<T>>,
) -> Result<IntegralReport<T>> {
    let (r1, r2) = radii_r1_r2(ax, gamma, epsilon)?;
    let mut report = integrals_split(law, ax, r1, r2)?;
    report.band = band.map(|b| {
        let n: T = from_usize(law.n);
        let scale = ax.beta.sqrt();
        (b.gamma_c * scale * n.powf(lit::<T>(0.75) - epsilon), b.m_upper * scale * n.powf(lit(0.75)))
    });
    Ok(report)
}

/// Integrals split at explicit radii. The law and profile must share their bins.
pub fn integrals_split<T: Real>(law: &RadialLaw<T>, ax: &AxTable<T>, r1: T, r2: T) -> Result<IntegralReport<T>> {
    if law.n != ax.n || law.bins.len() != ax.entries.len() {
        return invalid("law and a_x table must share n and bins");
    }
    let zero = T::zero();
    let mut j = [zero; 3];
    let mut g = [zero; 3];
    let mut h = [zero; 3];
    let mut skipped = zero;
    let mut used = false;
    for (bin, entry) in law.bins.iter().zip(&ax.entries) {
        let a = match entry.value {
            AxValue::Defined(a) => a,
            _ => {
                skipped = skipped + bin.mass;
                continue;
            }
        };
        used = true;
        let q = q_value(ax, a);
        let x = bin.x;
        let part = if x <= r1 {
            0
        } else if x < r2 {
            1
        } else {
            2
        };
        j[part] = j[part] + x * q * bin.mass;
        g[part] = g[part] + a.sqrt() * q * bin.mass;
        h[part] = h[part] + q * bin.mass;
    }
    if !used {
        return Err(Error::Degenerate("q(x) undefined on every bin".into()));
    }
    let sum = |p: [T; 3]| p[0] + p[1] + p[2];
    let (i_n, g_n, h_n) = (sum(j), sum(g), sum(h));
    Ok(IntegralReport {
        n: law.n,
        beta: ax.beta,
        r1,
        r2,
        i_n,
        g_n,
        h_n,
        j_parts: j,
        g_parts: g,
        h_parts: h,
        ratio: i_n / g_n,
        band: None,
        skipped_mass: skipped,
    })
}

/// `rho_n = (J2 + J3) / J1`; `None` when `J1 = 0` (infinite ratio).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConditionD<T> {
    pub rho_n: Option<T>,
}

impl<T: Real> ConditionD<T> {
    pub fn is_infinite(&self) -> bool {
        self.rho_n.is_none()
    }

    /// `rho_n >= rho_star`, true for an infinite ratio.
    pub fn satisfied(&self, rho_star: T) -> bool {
        self.rho_n.is_none_or(|r| r >= rho_star)
    }
}

pub fn condition_d<T: Real>(report: &IntegralReport<T>) -> ConditionD<T> {
    let [j1, j2, j3] = report.j_parts;
    ConditionD { rho_n: (j1 > T::zero()).then(|| (j2 + j3) / j1) }
}

/// Empirical companions of the upper and lower distance bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundPanel<T> {
    /// `K(n) = I_n / (beta^(1/2) n^(3/4) g(n))`.
    pub k_n: T,
    /// `g(n) / h(n)`.
    pub gh_quotient: T,
    pub quotient_lower: T,
    pub quotient_upper: T,
    /// `a1^(1/2) <= g/h <= a2^(1/2)`.
    pub quotient_holds: bool,
    /// `I_n / h(n)`, the penalised mean distance.
    pub distance: T,
    /// `I_n / (beta^(1/2) n^(3/4) h(n)) = K(n) g/h`.
    pub normalised_distance: T,
}

/// Bound diagnostics at the profile's `beta` over the whole range `[0, n]`.
pub fn bound_panel<T: Real>(law: &RadialLaw<T>, ax: &AxTable<T>) -> Result<BoundPanel<T>> {
    if ax.beta <= T::zero() {
        return invalid("bound panel needs beta > 0");
    }
    let n: T = from_usize(law.n);
    let rep = integrals_split(law, ax, n, n)?;
    let scale = ax.beta.sqrt() * n.powf(lit(0.75));
    let gh = rep.g_n / rep.h_n;
    let (lo, hi) = (ax.a1.sqrt(), ax.a2.sqrt());
    let tol = lit::<T>(1e-12);
    Ok(BoundPanel {
        k_n: rep.i_n / (scale * rep.g_n),
        gh_quotient: gh,
        quotient_lower: lo,
        quotient_upper: hi,
        quotient_holds: gh >= lo * (T::one() - tol) && gh <= hi * (T::one() + tol),
        distance: rep.i_n / rep.h_n,
        normalised_distance: rep.i_n / (scale * rep.h_n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniform() -> RadialLaw<f64> {
        RadialLaw::from_atoms(4, &[(1.0, 0.25), (2.0, 0.25), (3.0, 0.25), (4.0, 0.25)]).unwrap()
    }

    #[test]
    fn uniform_fixture() {
        let law = uniform();
        // beta = 0 gives q = 1 everywhere
        let ax = AxTable::constant_on(&law, 0.0, 0.5, 1.0);
        let rep = integrals_split(&law, &ax, 2.0, 2.0).unwrap();
        assert_eq!(rep.i_n, 2.5);
        assert_eq!(rep.h_n, 1.0);
        assert_eq!(rep.g_n, 1.0);
        assert_eq!(rep.j_parts[0], 0.75);
        assert_eq!(rep.j_parts[1] + rep.j_parts[2], 1.75);
        let d = condition_d(&rep);
        assert!((d.rho_n.unwrap() - 7.0 / 3.0).abs() < 1e-15);
        assert!(d.satisfied(2.0) && !d.satisfied(2.5));
    }

    #[test]
    fn condition_d_extremes() {
        let law = uniform();
        let ax = AxTable::constant_on(&law, 0.0, 0.5, 1.0);
        let below = condition_d(&integrals_split(&law, &ax, 4.0, 4.0).unwrap());
        assert_eq!(below.rho_n, Some(0.0));
        assert!(!below.satisfied(0.1));
        let above = condition_d(&integrals_split(&law, &ax, 0.5, 0.5).unwrap());
        assert!(above.is_infinite() && above.satisfied(1e9));
    }

    #[test]
    fn point_mass_at_mu_gives_unit_k() {
        let n = 256usize;
        let mu = (n as f64).powf(0.75);
        let law = RadialLaw::from_atoms(n, &[(mu, 1.0)]).unwrap();
        let ax = AxTable::constant_on(&law, 1.0, 0.5, 1.0);
        let panel = bound_panel(&law, &ax).unwrap();
        assert!((panel.k_n - 1.0).abs() < 1e-12);
        assert!(panel.quotient_holds);
    }

    #[test]
    fn mismatched_bins_rejected() {
        let law = uniform();
        let ax = AxTable::constant(4, 1.0, 0.5, 1.0, &[1.0]);
        assert!(integrals_split(&law, &ax, 1.0, 1.0).is_err());
        let mut undefined = AxTable::constant_on(&law, 1.0, 0.5, 1.0);
        undefined.entries.iter_mut().for_each(|e| e.value = AxValue::Undefined);
        assert!(matches!(integrals_split(&law, &undefined, 1.0, 1.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn band_reported() {
        let law = uniform();
        let ax = AxTable::constant_on(&law, 4.0, 0.5, 1.0);
        let rep = integrals(&law, &ax, 1.0, 0.0, Some(BandConstants { gamma_c: 0.5, m_upper: 3.0 })).unwrap();
        let (lo, hi) = rep.band.unwrap();
        let n34 = 4f64.powf(0.75);
        assert!((lo - 0.5 * 2.0 * n34).abs() < 1e-12 && (hi - 3.0 * 2.0 * n34).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn split_reassembles(
            masses in proptest::collection::vec(0.0f64..1.0, 1..30),
            a in proptest::collection::vec(0.1f64..3.0, 30),
            r1 in 0.0f64..40.0,
            dr in 0.0f64..40.0,
            beta in 0.0f64..0.2,
        ) {
            prop_assume!(masses.iter().sum::<f64>() > 0.0);
            let atoms: Vec<(f64, f64)> = masses.iter().enumerate().map(|(k, &m)| (1.5 * k as f64, m)).collect();
            let law = RadialLaw::from_atoms(50, &atoms).unwrap();
            let mut ax = AxTable::constant_on(&law, beta, 0.5, 1.0);
            for (e, &v) in ax.entries.iter_mut().zip(&a) {
                e.value = AxValue::Defined(v);
            }
            let rep = integrals_split(&law, &ax, r1, r1 + dr).unwrap();
            let parts: f64 = rep.j_parts.iter().sum();
            prop_assert!((rep.i_n - parts).abs() <= 1e-9 * rep.i_n.abs().max(1e-300));
        }

        #[test]
        fn constant_profile_quotient_is_exact(a in 0.01f64..10.0, beta in 0.01f64..2.0) {
            let law = uniform();
            let ax = AxTable::constant_on(&law, beta, 0.5, a);
            let panel = bound_panel(&law, &ax).unwrap();
            prop_assert!((panel.gh_quotient - a.sqrt()).abs() <= 1e-12 * a.sqrt());
            prop_assert!(panel.quotient_holds);
        }
    }
}
