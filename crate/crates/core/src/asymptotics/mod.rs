//! Analytic diagnostics over the empirical distance law: the penalty profile
//! `q(x)`, the displacement scale `mu_x`, the radii `r1`/`r2`, Condition D,
//! the integrals `I_n`, `g(n)`, `h(n)`, Gaussian tail references, power-law
//! fits and the closed-form distance exponent `nu(d)`.
//!
//! Everything here is generic over the float type.

mod fit;
mod integrals;
mod profile;
mod tail;

pub use fit::{fit_exponent, ExponentFit};
pub use integrals::{
    bound_panel, condition_d, integrals, integrals_split, BandConstants, BoundPanel, ConditionD, IntegralReport,
};
pub use profile::{mu_function, q_function, radii_r1_r2};
pub use tail::{gaussian_tail_reference, xi_estimate};

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive};
use serde::Serialize;

use crate::error::{invalid, Result};

/// Float types accepted by the analytic layer.
pub trait Real: Float + FromPrimitive + std::fmt::Debug + Send + Sync + 'static {}

impl<T: Float + FromPrimitive + std::fmt::Debug + Send + Sync + 'static> Real for T {}

#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("float literal representable")
}

#[inline]
pub(crate) fn from_usize<T: Real>(x: usize) -> T {
    T::from_usize(x).expect("count representable")
}

/// One bin of a [`RadialLaw`]: `[lo, hi)` with representative point `x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialBin<T> {
    pub lo: T,
    pub hi: T,
    pub x: T,
    pub mass: T,
    /// Indices of the ensemble records falling in this bin.
    pub members: Vec<usize>,
}

/// Binned law of the endpoint distance `chi_n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialLaw<T> {
    pub n: usize,
    pub bins: Vec<RadialBin<T>>,
    /// Weighted `E chi_n` and `E chi_n^2` from the raw samples.
    pub mean: T,
    pub mean_sq: T,
}

impl<T: Real> RadialLaw<T> {
    /// A law made of point masses, one bin per atom, normalised to unit mass.
    pub fn from_atoms(n: usize, atoms: &[(T, T)]) -> Result<Self> {
        let total = atoms.iter().fold(T::zero(), |s, a| s + a.1);
        if atoms.is_empty() || total <= T::zero() || atoms.iter().any(|a| a.1 < T::zero()) {
            return invalid("atoms need nonnegative masses with positive total");
        }
        let bins = atoms
            .iter()
            .map(|&(x, m)| RadialBin { lo: x, hi: x, x, mass: m / total, members: Vec::new() })
            .collect();
        let mean = atoms.iter().fold(T::zero(), |s, a| s + a.0 * a.1) / total;
        let mean_sq = atoms.iter().fold(T::zero(), |s, a| s + a.0 * a.0 * a.1) / total;
        Ok(Self { n, bins, mean, mean_sq })
    }

    pub fn total_mass(&self) -> T {
        self.bins.iter().fold(T::zero(), |s, b| s + b.mass)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum AxValue<T> {
    Defined(T),
    /// The bin has members but their averaged penalty is zero.
    Undefined,
    /// The bin has no members.
    Missing,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxEntry<T> {
    pub lo: T,
    pub hi: T,
    pub x: T,
    pub value: AxValue<T>,
    pub samples: usize,
    /// Members whose line class was empty.
    pub empty_class: usize,
}

/// Estimated penalty profile `x -> a_x` over distance bins.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxTable<T> {
    pub n: usize,
    pub beta: T,
    /// Class exponent: lines carry SILT of order `n^r`.
    pub r: T,
    pub a1: T,
    pub a2: T,
    pub entries: Vec<AxEntry<T>>,
}

impl<T: Real> AxTable<T> {
    /// Constant profile `a_x = a` at the given points.
    pub fn constant(n: usize, beta: T, r: T, a: T, xs: &[T]) -> Self {
        let entries = xs
            .iter()
            .map(|&x| AxEntry { lo: x, hi: x, x, value: AxValue::Defined(a), samples: 1, empty_class: 0 })
            .collect();
        Self { n, beta, r, a1: a, a2: a, entries }
    }

    /// Constant profile aligned bin-for-bin with a law.
    pub fn constant_on(law: &RadialLaw<T>, beta: T, r: T, a: T) -> Self {
        let entries = law
            .bins
            .iter()
            .map(|b| AxEntry { lo: b.lo, hi: b.hi, x: b.x, value: AxValue::Defined(a), samples: 1, empty_class: 0 })
            .collect();
        Self { n: law.n, beta, r, a1: a, a2: a, entries }
    }

    /// `zeta = beta a1`, the lower bound on `beta a_x`.
    pub fn zeta(&self) -> T {
        self.beta * self.a1
    }

    pub fn defined(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.entries.iter().filter_map(|e| match e.value {
            AxValue::Defined(a) => Some((e.x, a)),
            _ => None,
        })
    }

    /// The entry whose bin holds `x`: `lo <= x < hi`, closed for the last bin
    /// and for point bins.
    pub fn entry_at(&self, x: T) -> Option<&AxEntry<T>> {
        let last = self.entries.len().checked_sub(1)?;
        self.entries.iter().enumerate().find_map(|(k, e)| {
            let inside = (e.lo <= x && x < e.hi) || (x == e.hi && (k == last || e.lo == e.hi));
            inside.then_some(e)
        })
    }
}

/// Closed-form distance exponent: 1 for `d = 1`, `max(1/2, 1/4 + 1/d)` for `d >= 2`.
pub fn nu_formula(d: u32) -> Result<Ratio<u32>> {
    match d {
        0 => invalid("dimension must be >= 1"),
        1 => Ok(Ratio::from_integer(1)),
        _ => Ok((Ratio::new(1, 4) + Ratio::new(1, d)).max(Ratio::new(1, 2))),
    }
}
