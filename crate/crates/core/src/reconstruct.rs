//! Reconstruction from samples: the Shannon series for band-limited
//! functions, and expansions in the exponentials `e_lambda`,
//! `lambda in Lambda_4`, which form an orthonormal basis for the
//! 1/4-Cantor measure.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernel::{sinc, unit_exponential, BoundaryPoint};
use crate::linalg::{compensated_sum, C64};
use crate::measure::{cantor4_fourier, QuadMeasure};

pub const LAMBDA4_MAX_LEVEL: u32 = 20;
pub const PARSEVAL_MAX_LEVEL: u32 = 14;

/// `{ sum_i b_i 4^i : b_i in {0, 1} } ∩ [0, 4^L)`, ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lambda4Set {
    level: u32,
    members: Vec<u64>,
}

impl Lambda4Set {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, lambda: u64) -> bool {
        self.members.binary_search(&lambda).is_ok()
    }
}

/// True iff every base-4 digit of `n` is 0 or 1.
pub fn in_lambda4(mut n: u64) -> bool {
    while n > 0 {
        if n % 4 > 1 {
            return false;
        }
        n /= 4;
    }
    true
}

/// Enumerates `Lambda_4` below `4^level`. Member `k` spreads the bits of `k`
/// into base-4 digits, which keeps the list sorted.
pub fn lambda4_enumerate(level: u32) -> Result<Lambda4Set> {
    if !(1..=LAMBDA4_MAX_LEVEL).contains(&level) {
        return Err(Error::OutOfRange {
            what: "Lambda_4 level",
            value: level as i64,
            min: 1,
            max: LAMBDA4_MAX_LEVEL as i64,
        });
    }
    let members = (0..1u64 << level)
        .map(|k| {
            (0..level)
                .filter(|b| (k >> b) & 1 == 1)
                .map(|b| 1u64 << (2 * b))
                .sum()
        })
        .collect();
    Ok(Lambda4Set { level, members })
}

/// Samples `f(n)` for integers `n` in `[first, first + len)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandlimitedSamples {
    first: i64,
    values: Vec<C64>,
}

impl BandlimitedSamples {
    pub fn new(first: i64, values: Vec<C64>) -> Self {
        Self { first, values }
    }

    /// `f(n)` for `n in [-half_width, half_width]`.
    pub fn symmetric<F: Fn(i64) -> C64>(half_width: i64, f: F) -> Self {
        let values = (-half_width..=half_width).map(f).collect();
        Self {
            first: -half_width,
            values,
        }
    }

    pub fn get(&self, n: i64) -> Option<C64> {
        let idx = n.checked_sub(self.first)?;
        usize::try_from(idx)
            .ok()
            .and_then(|i| self.values.get(i).copied())
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.values.len() as i64).map(move |i| self.first + i)
    }
}

/// `sum_n f(n) sinc(t - n)` over the stored samples. At an integer `t` the
/// stored value (or zero off the support) is returned as is.
pub fn shannon_reconstruct(samples: &BandlimitedSamples, t: f64) -> C64 {
    if t.fract() == 0.0 && t.abs() < 9.0e15 {
        return samples.get(t as i64).unwrap_or(C64::new(0.0, 0.0));
    }
    compensated_sum(
        samples
            .support()
            .zip(samples.values.iter())
            .map(|(n, v)| v * sinc(t - n as f64)),
    )
}

/// Bound on the truncation error of the Shannon series with samples on
/// `[-half_width, half_width]` when the target is `sinc(· - shift)`,
/// evaluated at `t`.
pub fn sinc_tail_bound(half_width: i64, shift: f64, t: f64) -> f64 {
    let reach = shift.abs().max(t.abs()) + 1.0;
    let gap = half_width as f64 - reach;
    if gap <= 0.0 {
        return f64::INFINITY;
    }
    // each tail term is at most 1 / (pi^2 (|n| - reach)^2); two tails
    2.0 / (PI * PI * gap)
}

/// A function on the Cantor support, given either as a trigonometric
/// polynomial `sum a_k e^{i 2 pi k x}` or pointwise.
pub enum CantorIntegrand<'a> {
    Trigonometric(&'a [(i64, C64)]),
    Pointwise {
        f: &'a (dyn Fn(f64) -> C64 + Sync),
        depth: u32,
    },
}

/// `c_lambda = int F(x) e^{-i 2 pi lambda x} dmu(x)` for every `lambda` in the set.
///
/// Trigonometric polynomials are integrated exactly through the Fourier
/// transform of the measure; pointwise functions use the depth-`D` atoms.
pub fn cantor_coefficients(
    integrand: &CantorIntegrand<'_>,
    lambdas: &Lambda4Set,
) -> Result<Vec<C64>> {
    match integrand {
        CantorIntegrand::Trigonometric(terms) => Ok(lambdas
            .members()
            .iter()
            .map(|&lambda| {
                compensated_sum(
                    terms
                        .iter()
                        .map(|(k, a)| a * cantor4_fourier(*k as f64 - lambda as f64)),
                )
            })
            .collect()),
        CantorIntegrand::Pointwise { f, depth } => {
            let mu = QuadMeasure::cantor(*depth)?;
            lambdas
                .members()
                .iter()
                .map(|&lambda| {
                    mu.integrate(|b| match b {
                        BoundaryPoint::Angle(x) => {
                            Ok(f(*x) * unit_exponential(-(lambda as f64) * x))
                        }
                        _ => unreachable!("Cantor nodes are angles"),
                    })
                })
                .collect()
        }
    }
}

/// `1 - sum_{lambda in Lambda_4, lambda < 4^L} |mu^(k - lambda)|^2`.
///
/// The terms are added in ascending `lambda`, so the partial sums for
/// increasing `L` are prefixes of one another and the defect is
/// nonincreasing in `L` in floating point as well.
pub fn parseval_defect(k: i64, level: u32) -> Result<f64> {
    if !(1..=PARSEVAL_MAX_LEVEL).contains(&level) {
        return Err(Error::OutOfRange {
            what: "Parseval level",
            value: level as i64,
            min: 1,
            max: PARSEVAL_MAX_LEVEL as i64,
        });
    }
    let lambdas = lambda4_enumerate(level)?;
    let mut sum = 0.0;
    for &lambda in lambdas.members() {
        sum += cantor4_fourier(k as f64 - lambda as f64).norm_sqr();
    }
    Ok(1.0 - sum)
}

/// `<e_lambda, e_lambda'> = mu^(lambda' - lambda)` over the set.
pub fn lambda4_gram(lambdas: &Lambda4Set) -> Vec<Vec<C64>> {
    let m = lambdas.members();
    m.iter()
        .map(|&a| {
            m.iter()
                .map(|&b| cantor4_fourier(b as f64 - a as f64))
                .collect()
        })
        .collect()
}
