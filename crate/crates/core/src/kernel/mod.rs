//! Point domains, the kernel zoo, and the kernel metric.
//!
//! Every kernel here is Hermitian, `K(s, t) = conj(K(t, s))`, and positive
//! definite. Complex kernels take the conjugate in their *first* argument,
//! e.g. the Szegő kernel is `1 / (1 - conj(z) w)`.

mod extension;
mod section;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{ensure_hermitian, hermitian_eigenvalues, max_diagonal, CMatrix, C64};

pub(crate) use extension::unit_exponential;
pub use extension::{BoundaryDomain, BoundaryExtension, BoundaryPoint};
pub use section::{h_inner, h_norm_sq, pd_check, PdVerdict, RkhsElement, Section};

/// Relative PSD tolerance used when none is given.
pub const DEFAULT_PD_TOL: f64 = 1e-10;

/// Kernel distances below this count as the same point.
pub const DUPLICATE_DISTANCE: f64 = 1e-12;

/// An element of a kernel's domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Real(f64),
    Complex(C64),
    /// Index into a finite ground set.
    Index(usize),
}

impl Point {
    pub fn complex(re: f64, im: f64) -> Self {
        Point::Complex(C64::new(re, im))
    }

    fn as_complex(&self) -> Option<C64> {
        match *self {
            Point::Real(x) => Some(C64::new(x, 0.0)),
            Point::Complex(z) => Some(z),
            Point::Index(_) => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Real(x) => write!(f, "{x}"),
            Point::Complex(z) => write!(f, "{}{:+}i", z.re, z.im),
            Point::Index(i) => write!(f, "#{i}"),
        }
    }
}

/// The kernels the toolkit knows about.
#[derive(Clone, Debug, PartialEq)]
pub enum Kernel {
    /// `1 / (1 - conj(z) w)` on the open unit disk.
    Szego,
    /// `exp(conj(z) w / 2 - (|z|^2 + |w|^2) / 4)` on the plane.
    Bargmann,
    /// `prod_{l < levels} (1 + (conj(z) w)^(4^l))` on the open unit disk.
    Cantor4 { levels: u32 },
    /// `sin(pi (s - t)) / (pi (s - t))` on the real line.
    Sinc,
    /// A Hermitian PSD matrix indexed by `0..n`.
    ExplicitGram(Arc<CMatrix>),
    /// Feature rows `phi_i`; `K(i, j) = sum_k phi_i[k] conj(phi_j[k])`.
    ExplicitFeature(Arc<CMatrix>),
}

impl Kernel {
    pub fn cantor4(levels: u32) -> Result<Self> {
        if !(1..=20).contains(&levels) {
            return Err(Error::OutOfRange {
                what: "Cantor truncation level",
                value: levels as i64,
                min: 1,
                max: 20,
            });
        }
        Ok(Kernel::Cantor4 { levels })
    }

    /// Validates Hermitian symmetry and positive semidefiniteness.
    pub fn explicit_gram(gram: CMatrix) -> Result<Self> {
        ensure_hermitian(&gram, 1e-12)?;
        let min_eigenvalue = hermitian_eigenvalues(&gram).first().copied().unwrap_or(0.0);
        let threshold = -DEFAULT_PD_TOL * max_diagonal(&gram);
        if min_eigenvalue < threshold {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue,
                threshold,
            });
        }
        Ok(Kernel::ExplicitGram(Arc::new(gram)))
    }

    pub fn explicit_feature(features: CMatrix) -> Self {
        Kernel::ExplicitFeature(Arc::new(features))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Szego => "szego",
            Kernel::Bargmann => "bargmann",
            Kernel::Cantor4 { .. } => "cantor4",
            Kernel::Sinc => "sinc",
            Kernel::ExplicitGram(_) => "explicit-gram",
            Kernel::ExplicitFeature(_) => "explicit-feature",
        }
    }

    /// True when every value of the kernel is real.
    pub fn is_real(&self) -> bool {
        match self {
            Kernel::Sinc => true,
            Kernel::ExplicitGram(g) => g.iter().all(|z| z.im == 0.0),
            Kernel::ExplicitFeature(f) => f.iter().all(|z| z.im == 0.0),
            _ => false,
        }
    }

    fn ground_set_size(&self) -> Option<usize> {
        match self {
            Kernel::ExplicitGram(g) => Some(g.nrows()),
            Kernel::ExplicitFeature(f) => Some(f.nrows()),
            _ => None,
        }
    }

    fn domain_error(&self, p: &Point) -> Error {
        Error::Domain {
            kernel: self.name(),
            point: p.to_string(),
        }
    }

    pub(crate) fn disk_coordinate(&self, p: &Point) -> Result<C64> {
        match p.as_complex() {
            Some(z) if z.norm() < 1.0 => Ok(z),
            _ => Err(self.domain_error(p)),
        }
    }

    pub(crate) fn plane_coordinate(&self, p: &Point) -> Result<C64> {
        match p.as_complex() {
            Some(z) if z.re.is_finite() && z.im.is_finite() => Ok(z),
            _ => Err(self.domain_error(p)),
        }
    }

    pub(crate) fn real_coordinate(&self, p: &Point) -> Result<f64> {
        match *p {
            Point::Real(x) if x.is_finite() => Ok(x),
            _ => Err(self.domain_error(p)),
        }
    }

    pub(crate) fn index_coordinate(&self, p: &Point) -> Result<usize> {
        match (*p, self.ground_set_size()) {
            (Point::Index(i), Some(n)) if i < n => Ok(i),
            _ => Err(self.domain_error(p)),
        }
    }

    /// Checks that `p` lies in the kernel's domain.
    pub fn check_point(&self, p: &Point) -> Result<()> {
        match self {
            Kernel::Szego | Kernel::Cantor4 { .. } => self.disk_coordinate(p).map(|_| ()),
            Kernel::Bargmann => self.plane_coordinate(p).map(|_| ()),
            Kernel::Sinc => self.real_coordinate(p).map(|_| ()),
            Kernel::ExplicitGram(_) | Kernel::ExplicitFeature(_) => {
                self.index_coordinate(p).map(|_| ())
            }
        }
    }

    /// `K(s, t)`.
    pub fn eval(&self, s: &Point, t: &Point) -> Result<C64> {
        match self {
            Kernel::Szego => {
                let (z, w) = (self.disk_coordinate(s)?, self.disk_coordinate(t)?);
                Ok(C64::new(1.0, 0.0) / (C64::new(1.0, 0.0) - z.conj() * w))
            }
            Kernel::Bargmann => {
                let (z, w) = (self.plane_coordinate(s)?, self.plane_coordinate(t)?);
                Ok(bargmann(z, w))
            }
            Kernel::Cantor4 { levels } => {
                let (z, w) = (self.disk_coordinate(s)?, self.disk_coordinate(t)?);
                Ok(cantor_product(z.conj() * w, *levels))
            }
            Kernel::Sinc => {
                let (x, y) = (self.real_coordinate(s)?, self.real_coordinate(t)?);
                Ok(C64::new(sinc(x - y), 0.0))
            }
            Kernel::ExplicitGram(g) => {
                let (i, j) = (self.index_coordinate(s)?, self.index_coordinate(t)?);
                Ok(g[(i, j)])
            }
            Kernel::ExplicitFeature(f) => {
                let (i, j) = (self.index_coordinate(s)?, self.index_coordinate(t)?);
                Ok(f.row(i)
                    .iter()
                    .zip(f.row(j).iter())
                    .map(|(a, b)| a * b.conj())
                    .sum())
            }
        }
    }

    /// `dist_K(s, t) = ||K_s - K_t||`, clamped at zero.
    pub fn dist(&self, s: &Point, t: &Point) -> Result<f64> {
        let kss = self.eval(s, s)?.re;
        let ktt = self.eval(t, t)?.re;
        let kst = self.eval(s, t)?.re;
        Ok(kernel_distance(kss, ktt, kst))
    }
}

pub(crate) fn kernel_distance(kss: f64, ktt: f64, re_kst: f64) -> f64 {
    (kss + ktt - 2.0 * re_kst).max(0.0).sqrt()
}

pub(crate) fn bargmann(z: C64, w: C64) -> C64 {
    (z.conj() * w * 0.5 - (z.norm_sqr() + w.norm_sqr()) * 0.25).exp()
}

/// `prod_{l < levels} (1 + u^(4^l))`.
pub(crate) fn cantor_product(u: C64, levels: u32) -> C64 {
    let one = C64::new(1.0, 0.0);
    let mut power = u;
    let mut acc = one;
    for _ in 0..levels {
        acc *= one + power;
        let sq = power * power;
        power = sq * sq;
    }
    acc
}

/// Normalized sinc, `sin(pi x) / (pi x)`, even in `x`.
pub fn sinc(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}
