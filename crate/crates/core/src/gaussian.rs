//! Finite-section marginals of the Gaussian process with covariance `K`.
//!
//! On a section `{s_1, ..., s_n}` the process is the centered Gaussian
//! vector with covariance `G`. Samples are `x = F zeta` where `F F† = G`
//! comes from a pivoted Cholesky factorization. Real kernels use real
//! standard normals; complex kernels use circularly-symmetric complex
//! normals with `E|zeta|^2 = 1` and `E zeta^2 = 0`, so `E x x† = G` in both
//! cases.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::kernel::{pd_check, Section, DEFAULT_PD_TOL};
use crate::linalg::{submatrix, CMatrix, PivotedCholesky, C64};

/// Pivot tolerance for the covariance square root.
const FACTOR_TOL: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct GaussianEnsemble {
    gram: CMatrix,
    factor: CMatrix,
    pivots: Vec<usize>,
    rank: usize,
    real: bool,
    seed: u64,
}

impl GaussianEnsemble {
    /// Factor `G = F F†`; rank deficiency leaves zero columns in `F`.
    pub fn new(section: &Section, seed: u64) -> Result<Self> {
        Self::from_gram(section.gram().clone(), section.kernel().is_real(), seed)
    }

    pub fn from_gram(gram: CMatrix, real: bool, seed: u64) -> Result<Self> {
        let verdict = pd_check(&gram, DEFAULT_PD_TOL)?;
        if !verdict.pass {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: verdict.min_eigenvalue,
                threshold: verdict.threshold,
            });
        }
        let chol = PivotedCholesky::new(&gram, FACTOR_TOL)?;
        let real = real && gram.iter().all(|z| z.im == 0.0);
        Ok(Self {
            gram,
            factor: chol.factor,
            pivots: chol.pivots,
            rank: chol.rank,
            real,
            seed,
        })
    }

    /// `F` (rows in section order).
    pub fn factor(&self) -> &CMatrix {
        &self.factor
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Pivot order of the factorization; `F` is lower triangular on these rows.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    /// `F F†`.
    pub fn covariance(&self) -> CMatrix {
        &self.factor * self.factor.adjoint()
    }

    /// Covariance of the marginal on `indices`, read off the factor rows.
    pub fn marginal_covariance(&self, indices: &[usize]) -> Result<CMatrix> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.dim()) {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: bad,
            });
        }
        let rows = CMatrix::from_fn(indices.len(), self.factor.ncols(), |i, k| {
            self.factor[(indices[i], k)]
        });
        Ok(&rows * rows.adjoint())
    }

    /// Sub-Gram on `indices`.
    pub fn marginal_gram(&self, indices: &[usize]) -> CMatrix {
        submatrix(&self.gram, indices)
    }

    /// `count` samples, one per column. The generator is reseeded from
    /// `seed` on every call, so equal arguments give identical batches.
    pub fn sample(&self, count: usize) -> Result<SampleBatch> {
        if count == 0 {
            return Err(Error::InvalidArgument(
                "sample count must be at least one".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let n = self.dim();
        let r = self.rank;
        let mut samples = CMatrix::zeros(n, count);
        let mut zeta = vec![C64::new(0.0, 0.0); r];
        let half = std::f64::consts::FRAC_1_SQRT_2;
        for k in 0..count {
            for z in zeta.iter_mut() {
                *z = if self.real {
                    C64::new(StandardNormal.sample(&mut rng), 0.0)
                } else {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    C64::new(re * half, im * half)
                };
            }
            for i in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for (m, z) in zeta.iter().enumerate() {
                    acc += self.factor[(i, m)] * z;
                }
                samples[(i, k)] = acc;
            }
        }
        Ok(SampleBatch { samples })
    }
}

/// Samples stored as columns of an `n × count` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub samples: CMatrix,
}

impl SampleBatch {
    pub fn count(&self) -> usize {
        self.samples.ncols()
    }

    pub fn dim(&self) -> usize {
        self.samples.nrows()
    }

    pub fn mean(&self) -> Vec<C64> {
        let count = self.count() as f64;
        (0..self.dim())
            .map(|i| self.samples.row(i).iter().sum::<C64>() / count)
            .collect()
    }
}

/// `(1/N) sum_k x_k x_k†`, exactly Hermitian.
pub fn empirical_covariance(batch: &SampleBatch) -> Result<CMatrix> {
    if batch.count() < 2 {
        return Err(Error::InvalidArgument(
            "empirical covariance needs at least two samples".into(),
        ));
    }
    let n = batch.dim();
    let count = batch.count() as f64;
    let x = &batch.samples;
    let mut cov = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..batch.count() {
                acc += x[(i, k)] * x[(j, k)].conj();
            }
            let v = acc / count;
            if i == j {
                cov[(i, i)] = C64::new(v.re, 0.0);
            } else {
                cov[(i, j)] = v;
                cov[(j, i)] = v.conj();
            }
        }
    }
    Ok(cov)
}

/// `||C_emp - G||_F / ||G||_F`; zero when `G` is zero.
pub fn covariance_defect(ensemble: &GaussianEnsemble, count: usize) -> Result<f64> {
    if count < 2 {
        return Err(Error::InvalidArgument(
            "covariance defect needs at least two samples".into(),
        ));
    }
    let gram_norm = ensemble.gram().norm();
    if gram_norm == 0.0 {
        return Ok(0.0);
    }
    let cov = empirical_covariance(&ensemble.sample(count)?)?;
    Ok((cov - ensemble.gram()).norm() / gram_norm)
}
