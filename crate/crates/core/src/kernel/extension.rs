use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::{cantor_product, Kernel, Point};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, PivotedCholesky, C64};
use crate::measure::{AtomicMeasure, MeasurableMap};

/// A point of a boundary space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryPoint {
    /// `x` parameterizing `e^{i 2 pi x}` on the unit circle.
    Angle(f64),
    /// A point of the complex plane.
    Plane(C64),
    /// A frequency in the band `[-1/2, 1/2]`.
    Frequency(f64),
    /// An atom of a finite boundary.
    Atom(usize),
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryPoint::Angle(x) => write!(f, "angle {x}"),
            BoundaryPoint::Plane(z) => write!(f, "plane {}{:+}i", z.re, z.im),
            BoundaryPoint::Frequency(xi) => write!(f, "frequency {xi}"),
            BoundaryPoint::Atom(k) => write!(f, "atom {k}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryDomain {
    Circle,
    CantorSupport,
    Plane,
    Band,
    Atoms(usize),
}

impl BoundaryDomain {
    pub fn name(&self) -> &'static str {
        match self {
            BoundaryDomain::Circle => "circle",
            BoundaryDomain::CantorSupport => "cantor-support",
            BoundaryDomain::Plane => "plane",
            BoundaryDomain::Band => "band",
            BoundaryDomain::Atoms(_) => "atoms",
        }
    }

    pub fn contains(&self, b: &BoundaryPoint) -> bool {
        match (self, b) {
            (BoundaryDomain::Circle | BoundaryDomain::CantorSupport, BoundaryPoint::Angle(x)) => {
                x.is_finite()
            }
            (BoundaryDomain::Plane, BoundaryPoint::Plane(z)) => {
                z.re.is_finite() && z.im.is_finite()
            }
            (BoundaryDomain::Band, BoundaryPoint::Frequency(xi)) => (-0.5..=0.5).contains(xi),
            (BoundaryDomain::Atoms(n), BoundaryPoint::Atom(k)) => k < n,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Rule {
    SzegoCircle,
    CantorCircle {
        levels: u32,
    },
    /// Bargmann kernel with the Gaussian density moved into the measure.
    GaussianPlane,
    SincBand,
    /// `values[(i, k)] = K^B(i, atom k)`.
    Table(Arc<CMatrix>),
}

/// A kernel together with its extension `K^B : S × B -> C`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryExtension {
    kernel: Kernel,
    rule: Rule,
}

/// `e^{i 2 pi x}` with the angle reduced to `[0, 1)` first.
pub(crate) fn unit_exponential(x: f64) -> C64 {
    let (s, c) = (2.0 * PI * x.rem_euclid(1.0)).sin_cos();
    C64::new(c, s)
}

impl BoundaryExtension {
    /// The extension that goes with each closed-form kernel:
    ///
    /// * Szegő: `1 / (1 - conj(z) e^{i2pi x})` on the circle;
    /// * Cantor4: `prod (1 + (conj(z) e^{i2pi x})^(4^l))` on the Cantor support;
    /// * Bargmann: `exp(conj(z) x / 2 - |z|^2 / 4)` against the standard
    ///   complex Gaussian on the plane;
    /// * Sinc: `e^{-i 2 pi t xi}` on the band `[-1/2, 1/2]`.
    pub fn canonical(kernel: &Kernel) -> Result<Self> {
        let rule = match kernel {
            Kernel::Szego => Rule::SzegoCircle,
            Kernel::Cantor4 { levels } => Rule::CantorCircle { levels: *levels },
            Kernel::Bargmann => Rule::GaussianPlane,
            Kernel::Sinc => Rule::SincBand,
            Kernel::ExplicitGram(_) | Kernel::ExplicitFeature(_) => {
                return Err(Error::InvalidArgument(format!(
                    "{} kernels have no canonical boundary; use a tabulated extension",
                    kernel.name()
                )))
            }
        };
        Ok(Self {
            kernel: kernel.clone(),
            rule,
        })
    }

    /// Extension given by an explicit table over finitely many atoms.
    pub fn tabulated(kernel: &Kernel, values: CMatrix) -> Result<Self> {
        let n = match kernel {
            Kernel::ExplicitGram(g) => g.nrows(),
            Kernel::ExplicitFeature(f) => f.nrows(),
            _ => {
                return Err(Error::InvalidArgument(
                    "tabulated extensions need an index-set kernel".into(),
                ))
            }
        };
        if values.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: values.nrows(),
            });
        }
        Ok(Self {
            kernel: kernel.clone(),
            rule: Rule::Table(Arc::new(values)),
        })
    }

    /// Feature kernel over atoms carrying `weights`:
    /// `K^B(i, k) = phi_i[k] / sqrt(w_k)`.
    pub fn feature_atoms(kernel: &Kernel, weights: &[f64]) -> Result<Self> {
        let Kernel::ExplicitFeature(features) = kernel else {
            return Err(Error::InvalidArgument(
                "feature_atoms needs an explicit-feature kernel".into(),
            ));
        };
        if features.ncols() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: features.ncols(),
                actual: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| w.is_nan() || **w <= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "atom weight {w} is not positive"
            )));
        }
        let table = CMatrix::from_fn(features.nrows(), features.ncols(), |i, k| {
            features[(i, k)] / weights[k].sqrt()
        });
        Self::tabulated(kernel, table)
    }

    /// Finite boundary built from a pivoted Cholesky factor of an explicit
    /// Gram matrix: `rank` atoms of mass `1/rank`.
    pub fn gram_factor(kernel: &Kernel) -> Result<(Self, AtomicMeasure)> {
        let Kernel::ExplicitGram(gram) = kernel else {
            return Err(Error::InvalidArgument(
                "gram_factor needs an explicit-gram kernel".into(),
            ));
        };
        let chol = PivotedCholesky::new(gram, 1e-14)?;
        if chol.rank == 0 {
            return Err(Error::InvalidArgument(
                "zero Gram matrix has no boundary".into(),
            ));
        }
        let r = chol.rank;
        let scale = (r as f64).sqrt();
        let table = CMatrix::from_fn(gram.nrows(), r, |i, k| chol.factor[(i, k)] * scale);
        let measure = AtomicMeasure::uniform(r)?;
        Ok((Self::tabulated(kernel, table)?, measure))
    }

    /// `K^B ∘ phi`: the extension over the domain of `map`.
    pub fn pullback(&self, map: &MeasurableMap) -> Result<Self> {
        let Rule::Table(values) = &self.rule else {
            return Err(Error::InvalidArgument(
                "only tabulated extensions can be pulled back".into(),
            ));
        };
        if map.codomain_len() != values.ncols() {
            return Err(Error::DimensionMismatch {
                expected: values.ncols(),
                actual: map.codomain_len(),
            });
        }
        let table = CMatrix::from_fn(values.nrows(), map.domain_len(), |i, b| {
            values[(i, map.image(b))]
        });
        Self::tabulated(&self.kernel, table)
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn domain(&self) -> BoundaryDomain {
        match &self.rule {
            Rule::SzegoCircle => BoundaryDomain::Circle,
            Rule::CantorCircle { .. } => BoundaryDomain::CantorSupport,
            Rule::GaussianPlane => BoundaryDomain::Plane,
            Rule::SincBand => BoundaryDomain::Band,
            Rule::Table(v) => BoundaryDomain::Atoms(v.ncols()),
        }
    }

    /// Truncation level when this is the Cantor extension.
    pub fn cantor_levels(&self) -> Option<u32> {
        match self.rule {
            Rule::CantorCircle { levels } => Some(levels),
            _ => None,
        }
    }

    pub fn check_boundary_point(&self, b: &BoundaryPoint) -> Result<()> {
        let domain = self.domain();
        if domain.contains(b) {
            Ok(())
        } else {
            Err(Error::BoundaryDomain {
                boundary: domain.name(),
                node: b.to_string(),
            })
        }
    }

    /// `K^B(s, b)`.
    pub fn eval(&self, s: &Point, b: &BoundaryPoint) -> Result<C64> {
        self.check_boundary_point(b)?;
        let k = &self.kernel;
        match (&self.rule, *b) {
            (Rule::SzegoCircle, BoundaryPoint::Angle(x)) => {
                let z = k.disk_coordinate(s)?;
                let one = C64::new(1.0, 0.0);
                Ok(one / (one - z.conj() * unit_exponential(x)))
            }
            (Rule::CantorCircle { levels }, BoundaryPoint::Angle(x)) => {
                let z = k.disk_coordinate(s)?;
                Ok(cantor_product(z.conj() * unit_exponential(x), *levels))
            }
            (Rule::GaussianPlane, BoundaryPoint::Plane(x)) => {
                let z = k.plane_coordinate(s)?;
                Ok((z.conj() * x * 0.5 - z.norm_sqr() * 0.25).exp())
            }
            (Rule::SincBand, BoundaryPoint::Frequency(xi)) => {
                let t = k.real_coordinate(s)?;
                Ok(unit_exponential(-t * xi))
            }
            (Rule::Table(values), BoundaryPoint::Atom(a)) => {
                let i = k.index_coordinate(s)?;
                Ok(values[(i, a)])
            }
            _ => unreachable!("boundary point checked against the domain above"),
        }
    }
}
