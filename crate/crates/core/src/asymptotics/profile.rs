use super::{from_usize, lit, AxTable, AxValue, Real};
use crate::error::{invalid, Error, Result};

fn defined_at<T: Real>(ax: &AxTable<T>, x: T) -> Result<T> {
    match ax.entry_at(x).map(|e| e.value) {
        Some(AxValue::Defined(a)) => Ok(a),
        Some(_) => Err(Error::Missing(format!("a_x undefined at x = {x:?}"))),
        None => Err(Error::Missing(format!("x = {x:?} outside the table"))),
    }
}

/// Penalty factor `q(x) = exp(-beta a_x n^r / 2)`.
pub fn q_function<T: Real>(ax: &AxTable<T>, x: T) -> Result<T> {
    let a = defined_at(ax, x)?;
    Ok(q_value(ax, a))
}

#[inline]
pub(crate) fn q_value<T: Real>(ax: &AxTable<T>, a: T) -> T {
    let n: T = from_usize(ax.n);
    (-ax.beta * a * n.powf(ax.r) / lit(2.0)).exp()
}

/// Displacement scale `mu_x = (beta a_x)^(1/2) n^(3/4)`.
pub fn mu_function<T: Real>(ax: &AxTable<T>, x: T) -> Result<T> {
    let a = defined_at(ax, x)?;
    let ba = ax.beta * a;
    if ba <= T::zero() {
        return invalid(format!("beta a_x must be positive, got {ba:?}"));
    }
    Ok(mu_value(ax, a))
}

#[inline]
fn mu_value<T: Real>(ax: &AxTable<T>, a: T) -> T {
    let n: T = from_usize(ax.n);
    (ax.beta * a).max(T::zero()).sqrt() * n.powf(lit(0.75))
}

/// `r1 = sup { x : x <= gamma mu_x n^(-eps) }` over the table's defined
/// points (0 when no point qualifies), and `r2 = r1` at `eps = 0`.
pub fn radii_r1_r2<T: Real>(ax: &AxTable<T>, gamma: T, epsilon: T) -> Result<(T, T)> {
    if gamma <= T::zero() || epsilon < T::zero() {
        return invalid("radii need gamma > 0 and epsilon >= 0");
    }
    let n: T = from_usize(ax.n);
    let sup = |eps: T| {
        let shrink = n.powf(-eps);
        ax.defined()
            .filter(|&(x, a)| x <= gamma * mu_value(ax, a) * shrink)
            .map(|(x, _)| x)
            .fold(T::zero(), T::max)
    };
    Ok((sup(epsilon), sup(T::zero())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flat(n: usize, beta: f64, a: f64) -> AxTable<f64> {
        let xs: Vec<f64> = (0..=n).map(|x| x as f64).collect();
        AxTable::constant(n, beta, 0.5, a, &xs)
    }

    #[test]
    fn q_examples() {
        assert!((q_function(&flat(4, 1.0, 1.0), 2.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(q_function(&flat(4, 0.0, 3.0), 1.0).unwrap(), 1.0);
        assert!((q_function(&flat(16, 0.5, 2.0), 3.0).unwrap() - (-2f64).exp()).abs() < 1e-15);
        assert!(q_function(&flat(4, 1.0, 1.0), 9.0).is_err());
    }

    #[test]
    fn mu_examples() {
        assert!((mu_function(&flat(16, 1.0, 1.0), 0.0).unwrap() - 8.0).abs() < 1e-12);
        assert!((mu_function(&flat(16, 4.0, 1.0), 0.0).unwrap() - 16.0).abs() < 1e-12);
        assert!(mu_function(&flat(16, 0.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn radii_examples() {
        let t = flat(16, 1.0, 1.0);
        assert_eq!(radii_r1_r2(&t, 1.0, 0.0).unwrap(), (8.0, 8.0));
        // gamma mu n^-eps = 8 * 16^-3 < 1: only x = 0 qualifies
        assert_eq!(radii_r1_r2(&t, 1.0, 3.0).unwrap().0, 0.0);
        let sparse = AxTable::constant(16, 1.0, 0.5, 1.0, &[5.0, 9.0]);
        assert_eq!(radii_r1_r2(&sparse, 1.0, 2.0).unwrap().0, 0.0);
        assert!(radii_r1_r2(&t, 0.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn r2_is_r1_at_zero_eps(
            values in proptest::collection::vec(0.05f64..4.0, 1..40),
            gamma in 0.1f64..3.0,
            eps in 0.0f64..1.0,
            beta in 0.1f64..3.0,
        ) {
            let n = values.len() * 3;
            let xs: Vec<f64> = (0..values.len()).map(|k| 3.0 * k as f64 + 1.0).collect();
            let mut t = AxTable::constant(n, beta, 0.5, 1.0, &xs);
            for (e, a) in t.entries.iter_mut().zip(&values) {
                e.value = AxValue::Defined(*a);
            }
            let (_, r2) = radii_r1_r2(&t, gamma, eps).unwrap();
            prop_assert_eq!(radii_r1_r2(&t, gamma, 0.0).unwrap().0, r2);
            prop_assert!(radii_r1_r2(&t, gamma, eps).unwrap().0 <= r2);
        }

        #[test]
        fn monotone_in_a(a in 0.01f64..5.0, da in 0.0f64..5.0, beta in 0.01f64..3.0, n in 1usize..2000) {
            let lo = flat(n.min(50), beta, a);
            let hi = flat(n.min(50), beta, a + da);
            prop_assert!(q_function(&hi, 0.0).unwrap() <= q_function(&lo, 0.0).unwrap());
            prop_assert!(mu_function(&hi, 0.0).unwrap() >= mu_function(&lo, 0.0).unwrap());
        }
    }
}
