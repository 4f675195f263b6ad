//! Small dense Hermitian linear algebra used across the crate.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Neumaier-compensated accumulator for complex sums.
///
/// Summation order is the order of `add` calls, so a fixed node ordering
/// gives bit-stable totals.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: C64,
    carry: C64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: C64) {
        self.sum.re = neumaier_step(self.sum.re, x.re, &mut self.carry.re);
        self.sum.im = neumaier_step(self.sum.im, x.im, &mut self.carry.im);
    }

    pub fn total(&self) -> C64 {
        self.sum + self.carry
    }
}

#[inline]
fn neumaier_step(sum: f64, x: f64, carry: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *carry += (sum - t) + x;
    } else {
        *carry += (x - t) + sum;
    }
    t
}

/// Compensated sum of an iterator of complex values.
pub fn compensated_sum<I: IntoIterator<Item = C64>>(values: I) -> C64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

pub fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Largest |m_ij - conj(m_ji)|.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

pub fn max_diagonal(m: &CMatrix) -> f64 {
    (0..m.nrows()).fold(0.0f64, |acc, i| acc.max(m[(i, i)].re))
}

/// Rejects matrices whose Hermitian defect exceeds `rel_tol` times the
/// largest entry.
pub fn ensure_hermitian(m: &CMatrix, rel_tol: f64) -> Result<()> {
    ensure_square(m)?;
    let deviation = hermitian_deviation(m);
    if deviation > rel_tol * max_abs_entry(m).max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// `(m + m†) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Ascending eigenvalues of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    values
}

/// Rank-revealing Cholesky with diagonal pivoting: `a ≈ F F†`.
///
/// `factor` is n×n with rows in the original ordering; only the first
/// `rank` columns are nonzero. Restricted to the rows `pivots`, the factor
/// is lower triangular.
#[derive(Clone, Debug)]
pub struct PivotedCholesky {
    pub factor: CMatrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

impl PivotedCholesky {
    /// Factorizes a Hermitian PSD matrix, stopping once every remaining
    /// Schur-complement diagonal is at most `rel_tol` times the largest
    /// initial diagonal entry.
    pub fn new(a: &CMatrix, rel_tol: f64) -> Result<Self> {
        let n = ensure_square(a)?;
        let mut factor = CMatrix::zeros(n, n);
        let mut residual: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        let scale = residual.iter().fold(0.0f64, |acc, &d| acc.max(d));
        let threshold = rel_tol * scale;
        let mut chosen = vec![false; n];
        let mut pivots = Vec::with_capacity(n);

        for k in 0..n {
            let mut best: Option<(usize, f64)> = None;
            for (i, &d) in residual.iter().enumerate() {
                if !chosen[i] && best.is_none_or(|(_, b)| d > b) {
                    best = Some((i, d));
                }
            }
            let Some((p, d)) = best else { break };
            if d.is_nan() || d <= threshold || d <= 0.0 {
                break;
            }
            chosen[p] = true;
            pivots.push(p);
            let root = d.sqrt();
            factor[(p, k)] = C64::new(root, 0.0);
            for i in 0..n {
                if chosen[i] {
                    continue;
                }
                let mut acc = a[(i, p)];
                for m in 0..k {
                    acc -= factor[(i, m)] * factor[(p, m)].conj();
                }
                let l = acc / root;
                factor[(i, k)] = l;
                residual[i] -= l.norm_sqr();
            }
        }
        let rank = pivots.len();
        Ok(Self {
            factor,
            pivots,
            rank,
        })
    }

    /// `F F†`.
    pub fn reconstruct(&self) -> CMatrix {
        let f = self.factor.columns(0, self.rank);
        f * f.adjoint()
    }

    /// The r×r lower-triangular block on the pivot rows.
    pub fn pivot_block(&self) -> CMatrix {
        let r = self.rank;
        CMatrix::from_fn(r, r, |i, j| self.factor[(self.pivots[i], j)])
    }
}

/// Principal submatrix on `idx × idx`.
pub fn submatrix(m: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// Eigenvalues of the Hermitian pencil `a x = λ b x` after pruning `b` to
/// a numerically nonsingular principal block.
///
/// Returns the ascending eigenvalues and the retained indices.
pub fn pencil_eigenvalues(
    a: &CMatrix,
    b: &CMatrix,
    rel_tol: f64,
) -> Result<(Vec<f64>, Vec<usize>)> {
    let n = ensure_square(b)?;
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.nrows(),
        });
    }
    let chol = PivotedCholesky::new(b, rel_tol)?;
    if chol.rank == 0 {
        return Err(Error::SectionExhausted);
    }
    let lower = chol.pivot_block();
    let a_sub = submatrix(a, &chol.pivots);
    // C = L^{-1} A L^{-†}
    let left = lower
        .solve_lower_triangular(&a_sub)
        .ok_or_else(|| Error::Solve("triangular solve in pencil reduction".into()))?;
    let reduced_t = lower
        .solve_lower_triangular(&left.adjoint())
        .ok_or_else(|| Error::Solve("triangular solve in pencil reduction".into()))?;
    let reduced = reduced_t.adjoint();
    Ok((hermitian_eigenvalues(&reduced), chol.pivots))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let values = [c(1e16), c(1.0), c(-1e16), c(1.0)];
        assert_eq!(compensated_sum(values).re, 2.0);
    }

    #[test]
    fn pivoted_cholesky_rank_one() {
        let a = CMatrix::from_element(2, 2, c(1.0));
        let chol = PivotedCholesky::new(&a, 1e-14).unwrap();
        assert_eq!(chol.rank, 1);
        assert!((chol.reconstruct() - a).norm() < 1e-15);
        assert!(chol
            .factor
            .column(1)
            .iter()
            .all(|z| *z == C64::new(0.0, 0.0)));
    }

    #[test]
    fn pivoted_cholesky_complex_full_rank() {
        let a = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(4.0),
                C64::new(1.0, 1.0),
                C64::new(0.0, -0.5),
                C64::new(1.0, -1.0),
                c(3.0),
                c(0.2),
                C64::new(0.0, 0.5),
                c(0.2),
                c(2.0),
            ],
        );
        let chol = PivotedCholesky::new(&a, 1e-14).unwrap();
        assert_eq!(chol.rank, 3);
        assert!((chol.reconstruct() - &a).norm() < 1e-14);
        let block = chol.pivot_block();
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert_eq!(block[(i, j)], c(0.0));
            }
        }
    }

    #[test]
    fn pencil_of_scaled_matrix() {
        let b = CMatrix::from_row_slice(
            2,
            2,
            &[c(2.0), C64::new(0.5, 0.3), C64::new(0.5, -0.3), c(1.0)],
        );
        let a = &b * c(3.0);
        let (eigs, kept) = pencil_eigenvalues(&a, &b, 1e-12).unwrap();
        assert_eq!(kept.len(), 2);
        for e in eigs {
            assert!((e - 3.0).abs() < 1e-13);
        }
    }

    #[test]
    fn hermitian_check_rejects_asymmetry() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(1.0)]);
        assert!(matches!(
            ensure_hermitian(&m, 1e-12),
            Err(Error::NotHermitian { .. })
        ));
        let r = CMatrix::zeros(2, 3);
        assert!(matches!(ensure_square(&r), Err(Error::NotSquare { .. })));
    }
}
