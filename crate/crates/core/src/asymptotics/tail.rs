use super::{from_usize, lit, Real};

/// `min(1, 2 exp(-x^2 / (2n)))`: the Gaussian reference for `P_0(chi_n >= x)`.
pub fn gaussian_tail_reference<T: Real>(n: usize, x: T) -> T {
    let n: T = from_usize(n.max(1));
    let v = lit::<T>(2.0) * (-(x * x) / (lit::<T>(2.0) * n)).exp();
    v.min(T::one())
}

/// Correction `xi_x` solving `p = 2 exp(-x^2 (1 + xi) / (2n))` for an
/// observed tail probability `p`.
pub fn xi_estimate<T: Real>(n: usize, x: T, p: T) -> Option<T> {
    if x <= T::zero() || p <= T::zero() {
        return None;
    }
    let n: T = from_usize(n);
    Some(-lit::<T>(2.0) * n * (p / lit(2.0)).ln() / (x * x) - T::one())
}
