use super::{kernel_distance, Kernel, Point, DEFAULT_PD_TOL, DUPLICATE_DISTANCE};
use crate::error::{Error, Result};
use crate::linalg::{
    compensated_sum, ensure_hermitian, hermitian_eigenvalues, max_diagonal, CMatrix, CVector, C64,
};

/// Outcome of a positive-semidefiniteness test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdVerdict {
    pub min_eigenvalue: f64,
    /// `-tol · max diagonal`.
    pub threshold: f64,
    pub pass: bool,
}

/// Passes iff the smallest eigenvalue is at least `-tol` times the largest
/// diagonal entry.
pub fn pd_check(gram: &CMatrix, tol: f64) -> Result<PdVerdict> {
    ensure_hermitian(gram, 1e-12)?;
    let min_eigenvalue = hermitian_eigenvalues(gram).first().copied().unwrap_or(0.0);
    let threshold = -tol * max_diagonal(gram);
    Ok(PdVerdict {
        min_eigenvalue,
        threshold,
        pass: min_eigenvalue >= threshold,
    })
}

/// A finite point set with its Gram matrix `G_ij = K(s_i, s_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    kernel: Kernel,
    points: Vec<Point>,
    gram: CMatrix,
}

impl Section {
    pub fn new(kernel: &Kernel, points: Vec<Point>) -> Result<Self> {
        Self::with_tolerance(kernel, points, DEFAULT_PD_TOL)
    }

    /// Builds the Gram matrix and validates PSD (relative `pd_tol`) and
    /// pairwise separation.
    pub fn with_tolerance(kernel: &Kernel, points: Vec<Point>, pd_tol: f64) -> Result<Self> {
        for p in &points {
            kernel.check_point(p)?;
        }
        let n = points.len();
        let mut gram = CMatrix::zeros(n, n);
        for i in 0..n {
            gram[(i, i)] = C64::new(kernel.eval(&points[i], &points[i])?.re, 0.0);
            for j in (i + 1)..n {
                let v = kernel.eval(&points[i], &points[j])?;
                gram[(i, j)] = v;
                gram[(j, i)] = v.conj();
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let distance = kernel_distance(gram[(i, i)].re, gram[(j, j)].re, gram[(i, j)].re);
                if distance < DUPLICATE_DISTANCE {
                    return Err(Error::DuplicatePoints {
                        first: i,
                        second: j,
                        distance,
                    });
                }
            }
        }
        let verdict = pd_check(&gram, pd_tol)?;
        if !verdict.pass {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: verdict.min_eigenvalue,
                threshold: verdict.threshold,
            });
        }
        Ok(Self {
            kernel: kernel.clone(),
            points,
            gram,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The section on the first `m` points.
    pub fn prefix(&self, m: usize) -> Self {
        let m = m.min(self.len());
        Self {
            kernel: self.kernel.clone(),
            points: self.points[..m].to_vec(),
            gram: self.gram.view((0, 0), (m, m)).into_owned(),
        }
    }

    /// `dist_K(s_i, s_j)` read off the Gram matrix.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        let g = &self.gram;
        kernel_distance(g[(i, i)].re, g[(j, j)].re, g[(i, j)].re)
    }
}

/// `f = sum_j c_j K(s_j, ·)` over a section.
#[derive(Clone, Debug)]
pub struct RkhsElement<'a> {
    section: &'a Section,
    coeffs: CVector,
}

impl<'a> RkhsElement<'a> {
    pub fn new(section: &'a Section, coeffs: CVector) -> Result<Self> {
        if coeffs.len() != section.len() {
            return Err(Error::DimensionMismatch {
                expected: section.len(),
                actual: coeffs.len(),
            });
        }
        Ok(Self { section, coeffs })
    }

    pub fn from_slice(section: &'a Section, coeffs: &[C64]) -> Result<Self> {
        Self::new(section, CVector::from_column_slice(coeffs))
    }

    pub fn zero(section: &'a Section) -> Self {
        Self {
            section,
            coeffs: CVector::zeros(section.len()),
        }
    }

    /// `K(s_i, ·)`.
    pub fn kernel_section(section: &'a Section, i: usize) -> Result<Self> {
        if i >= section.len() {
            return Err(Error::DimensionMismatch {
                expected: section.len(),
                actual: i,
            });
        }
        let mut coeffs = CVector::zeros(section.len());
        coeffs[i] = C64::new(1.0, 0.0);
        Ok(Self { section, coeffs })
    }

    pub fn section(&self) -> &'a Section {
        self.section
    }

    pub fn coeffs(&self) -> &CVector {
        &self.coeffs
    }

    pub fn norm_sq(&self) -> f64 {
        h_norm_sq(self)
    }

    /// `f(t) = sum_j c_j K(s_j, t)`.
    pub fn evaluate(&self, t: &Point) -> Result<C64> {
        let kernel = self.section.kernel();
        let mut terms = Vec::with_capacity(self.coeffs.len());
        for (c, s) in self.coeffs.iter().zip(self.section.points()) {
            terms.push(c * kernel.eval(s, t)?);
        }
        Ok(compensated_sum(terms))
    }
}

fn same_section(a: &Section, b: &Section) -> bool {
    std::ptr::eq(a, b) || (a.points == b.points && a.kernel == b.kernel)
}

/// `<f, g> = sum_{i,j} c_i conj(d_j) G_ij`, linear in `f`.
pub fn h_inner(f: &RkhsElement<'_>, g: &RkhsElement<'_>) -> Result<C64> {
    if !same_section(f.section, g.section) {
        return Err(Error::SectionMismatch);
    }
    let gram = f.section.gram();
    let n = gram.nrows();
    let mut terms = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            terms.push(f.coeffs[i] * g.coeffs[j].conj() * gram[(i, j)]);
        }
    }
    Ok(compensated_sum(terms))
}

/// `||f||^2 = sum_{i,j} c_i conj(c_j) G_ij`.
pub fn h_norm_sq(f: &RkhsElement<'_>) -> f64 {
    h_inner(f, f).expect("an element shares its own section").re
}
