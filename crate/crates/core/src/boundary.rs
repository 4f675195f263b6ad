//! Boundary factorizations of a kernel and the maps they induce.
//!
//! For a section `{s_1, ..., s_n}` and a boundary measure `mu` the central
//! object is the boundary matrix
//!
//! ```text
//! N_ij = int conj(K^B(s_i, b)) K^B(s_j, b) dmu(b).
//! ```
//!
//! The extensions shipped with the kernel zoo satisfy `N = conj(G)`, where
//! `G_ij = K(s_i, s_j)`; with the norm `||f||^2 = sum c_i conj(c_j) G_ij`
//! this is exactly the statement that `f = sum c_j K(s_j, ·)` and
//! `f~ = sum c_j K^B(s_j, ·)` have the same norm. Membership, isometry and
//! Carleson checks are all phrased against `conj(G)`; for real kernels it is
//! the same as `G`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{h_norm_sq, BoundaryExtension, BoundaryPoint, Point, RkhsElement, Section};
use crate::linalg::{compensated_sum, pencil_eigenvalues, CMatrix, CVector, CompensatedSum, C64};
use crate::measure::{cantor4_fourier, fiber_masses, AtomicMeasure, MeasurableMap, QuadMeasure};
use crate::reconstruct::lambda4_enumerate;

/// Relative pivot tolerance used to prune the Gram matrix before a pencil solve.
pub const PENCIL_PRUNE_TOL: f64 = 1e-6;

/// Default tolerance for quadrature-limited checks.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// Default tolerance for algebraic identities.
pub const ALGEBRAIC_TOL: f64 = 1e-10;

/// Mass tolerance for atom-by-atom pushforward comparison.
pub const MASS_TOL: f64 = 1e-12;

const CHUNK: usize = 4096;

/// `N_ij = int conj(K^B(s_i, b)) K^B(s_j, b) dmu(b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryMatrix {
    pub matrix: CMatrix,
    /// `N` for the measure with its scale factor set to one.
    pub unscaled: CMatrix,
    pub scale: f64,
    /// `true` when `N` came from the closed-form Cantor double sum.
    pub spectral: bool,
}

impl BoundaryMatrix {
    /// `max_ij |N_ij - conj(G_ij)|`.
    pub fn defect_against(&self, section: &Section) -> f64 {
        self.matrix
            .iter()
            .zip(section.gram().iter())
            .fold(0.0f64, |acc, (n, g)| acc.max((n - g.conj()).norm()))
    }
}

fn check_kernels(ext: &BoundaryExtension, section: &Section) -> Result<()> {
    if ext.kernel() != section.kernel() {
        return Err(Error::InvalidArgument(format!(
            "extension belongs to the {} kernel but the section to the {} kernel",
            ext.kernel().name(),
            section.kernel().name()
        )));
    }
    Ok(())
}

/// Boundary matrix for `(ext, mu)` on `section`.
///
/// The Cantor extension against the Cantor measure uses the exact
/// `Lambda_4` double sum with the product formula for the Fourier transform
/// of the measure; everything else goes through the measure's nodes.
pub fn boundary_gram(
    ext: &BoundaryExtension,
    mu: &QuadMeasure,
    section: &Section,
) -> Result<BoundaryMatrix> {
    check_kernels(ext, section)?;
    match (ext.cantor_levels(), mu.cantor_depth()) {
        (Some(levels), Some(_)) => {
            let unscaled = cantor_boundary_gram_spectral(levels, section)?;
            Ok(BoundaryMatrix {
                matrix: &unscaled * C64::new(mu.scale(), 0.0),
                unscaled,
                scale: mu.scale(),
                spectral: true,
            })
        }
        _ => boundary_gram_quadrature(ext, mu, section),
    }
}

/// Boundary matrix accumulated node by node. Each entry is summed in node
/// order, so the result does not depend on the thread count.
pub fn boundary_gram_quadrature(
    ext: &BoundaryExtension,
    mu: &QuadMeasure,
    section: &Section,
) -> Result<BoundaryMatrix> {
    check_kernels(ext, section)?;
    let n = section.len();
    let points = section.points();
    let mut acc = vec![CompensatedSum::new(); n * n];
    let total = mu.len();
    for start in (0..total).step_by(CHUNK) {
        let end = (start + CHUNK).min(total);
        let rows: Result<Vec<(f64, Vec<C64>)>> = (start..end)
            .into_par_iter()
            .map(|k| {
                let (b, w) = mu.unscaled_node(k);
                let values = points
                    .iter()
                    .map(|s| ext.eval(s, &b))
                    .collect::<Result<Vec<_>>>()?;
                Ok((w, values))
            })
            .collect();
        for (w, values) in rows? {
            for i in 0..n {
                let left = values[i].conj() * w;
                for j in i..n {
                    acc[i * n + j].add(left * values[j]);
                }
            }
        }
    }
    let mut unscaled = CMatrix::zeros(n, n);
    for i in 0..n {
        unscaled[(i, i)] = C64::new(acc[i * n + i].total().re, 0.0);
        for j in (i + 1)..n {
            let v = acc[i * n + j].total();
            unscaled[(i, j)] = v;
            unscaled[(j, i)] = v.conj();
        }
    }
    Ok(BoundaryMatrix {
        matrix: &unscaled * C64::new(mu.scale(), 0.0),
        unscaled,
        scale: mu.scale(),
        spectral: false,
    })
}

/// Cantor boundary matrix from the expansion
/// `K^B(z, x) = sum_{lambda in Lambda_4, lambda < 4^L} conj(z)^lambda e_lambda(x)`:
/// `N_ij = sum_{lambda, lambda'} z_i^lambda conj(z_j)^lambda' mu^(lambda' - lambda)`.
pub fn cantor_boundary_gram_spectral(levels: u32, section: &Section) -> Result<CMatrix> {
    let lambdas = lambda4_enumerate(levels)?;
    let freqs = lambdas.members();
    let m = freqs.len();
    let kernel = section.kernel();
    let coords = section
        .points()
        .iter()
        .map(|p| kernel.disk_coordinate(p))
        .collect::<Result<Vec<_>>>()?;
    let n = coords.len();
    let powers = CMatrix::from_fn(n, m, |i, a| coords[i].powu(freqs[a] as u32));
    let transform = CMatrix::from_fn(m, m, |a, b| {
        cantor4_fourier(freqs[b] as f64 - freqs[a] as f64)
    });
    let full = &powers * transform * powers.adjoint();
    let mut matrix = CMatrix::zeros(n, n);
    for i in 0..n {
        matrix[(i, i)] = C64::new(full[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            matrix[(i, j)] = full[(i, j)];
            matrix[(j, i)] = full[(i, j)].conj();
        }
    }
    Ok(matrix)
}

/// Result of a membership test against `conj(G)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MembershipReport {
    pub defect: f64,
    pub carleson_constant: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn membership_defect(
    ext: &BoundaryExtension,
    mu: &QuadMeasure,
    section: &Section,
    tol: f64,
) -> Result<MembershipReport> {
    let boundary = boundary_gram(ext, mu, section)?;
    let defect = boundary.defect_against(section);
    let carleson = carleson_from_matrix(&boundary, section)?;
    Ok(MembershipReport {
        defect,
        carleson_constant: carleson.constant,
        tolerance: tol,
        pass: defect < tol,
    })
}

/// Largest value of `||f~||^2 / ||f||^2` over the section span.
#[derive(Clone, Debug, PartialEq)]
pub struct CarlesonEstimate {
    pub constant: f64,
    /// All generalized eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Section indices kept after pruning.
    pub retained: Vec<usize>,
}

/// Finite-section estimate of the least Carleson constant: the top
/// eigenvalue of the pencil `N x = lambda conj(G) x`.
pub fn carleson_constant(
    ext: &BoundaryExtension,
    mu: &QuadMeasure,
    section: &Section,
) -> Result<CarlesonEstimate> {
    let boundary = boundary_gram(ext, mu, section)?;
    carleson_from_matrix(&boundary, section)
}

pub fn carleson_from_matrix(
    boundary: &BoundaryMatrix,
    section: &Section,
) -> Result<CarlesonEstimate> {
    let conj_gram = section.gram().map(|z| z.conj());
    // the scale factor multiplies every eigenvalue, so it is applied last
    let (unscaled, retained) =
        pencil_eigenvalues(&boundary.unscaled, &conj_gram, PENCIL_PRUNE_TOL)?;
    let eigenvalues: Vec<f64> = unscaled.iter().map(|e| e * boundary.scale).collect();
    let constant = eigenvalues.last().copied().ok_or(Error::SectionExhausted)?;
    Ok(CarlesonEstimate {
        constant,
        eigenvalues,
        retained,
    })
}

/// `f~ = W_B f`, the function `b -> sum_j c_j K^B(s_j, b)`.
#[derive(Clone, Debug)]
pub struct BoundaryTransform<'a> {
    element: &'a RkhsElement<'a>,
    ext: &'a BoundaryExtension,
}

impl BoundaryTransform<'_> {
    pub fn eval(&self, b: &BoundaryPoint) -> Result<C64> {
        let section = self.element.section();
        let mut terms = Vec::with_capacity(section.len());
        for (c, s) in self.element.coeffs().iter().zip(section.points()) {
            terms.push(c * self.ext.eval(s, b)?);
        }
        Ok(compensated_sum(terms))
    }

    /// Values at every node of `mu`.
    pub fn sample(&self, mu: &QuadMeasure) -> Result<Vec<C64>> {
        mu.sample(|b| self.eval(b))
    }
}

pub fn boundary_transform<'a>(
    f: &'a RkhsElement<'a>,
    ext: &'a BoundaryExtension,
) -> Result<BoundaryTransform<'a>> {
    check_kernels(ext, f.section())?;
    Ok(BoundaryTransform { element: f, ext })
}

/// Both sides of the isometry identity for one element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsometryCheck {
    pub h_norm_sq: f64,
    pub l2_norm_sq: f64,
    pub defect: f64,
}

/// `||f||^2` against `int |f~|^2 dmu`, the latter by direct quadrature.
pub fn isometry_check(
    f: &RkhsElement<'_>,
    ext: &BoundaryExtension,
    mu: &QuadMeasure,
) -> Result<IsometryCheck> {
    let transform = boundary_transform(f, ext)?;
    let l2_norm_sq = mu
        .integrate(|b| transform.eval(b).map(|v| C64::new(v.norm_sqr(), 0.0)))?
        .re;
    let h = h_norm_sq(f);
    Ok(IsometryCheck {
        h_norm_sq: h,
        l2_norm_sq,
        defect: (h - l2_norm_sq).abs(),
    })
}

pub fn isometry_defect(
    f: &RkhsElement<'_>,
    ext: &BoundaryExtension,
    mu: &QuadMeasure,
) -> Result<f64> {
    isometry_check(f, ext, mu).map(|c| c.defect)
}

/// `(W_B^* F)(s) = int conj(K^B(s, b)) F(b) dmu(b)` for `F` sampled at the
/// nodes of `mu`.
pub fn adjoint_apply(
    samples: &[C64],
    ext: &BoundaryExtension,
    mu: &QuadMeasure,
    s: &Point,
) -> Result<C64> {
    if samples.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            expected: mu.len(),
            actual: samples.len(),
        });
    }
    let kernel_row = mu.sample(|b| ext.eval(s, b))?;
    let products: Vec<C64> = kernel_row
        .iter()
        .zip(samples)
        .map(|(k, f)| k.conj() * f)
        .collect();
    mu.integrate_samples(&products)
}

/// Least-squares projection of a boundary function onto the span of
/// `K^B(s_j, ·)` in `L^2(mu)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    /// `||F - P F||` by quadrature over the nodes.
    pub residual: f64,
    /// `||F||` in `L^2(mu)`.
    pub target_norm: f64,
    /// `P F = sum c_j K^B(s_j, ·)`; zero on dependent columns.
    pub coeffs: CVector,
    /// Section indices whose boundary function lies in the span of the
    /// earlier ones up to `DEPENDENCE_TOL`.
    pub dependent: Vec<usize>,
}

/// A column counts as dependent when its component orthogonal to the
/// earlier columns is below this fraction of its norm.
pub const DEPENDENCE_TOL: f64 = 1e-10;

fn weighted_dot(u: &[C64], v: &[C64]) -> C64 {
    let mut acc = CompensatedSum::new();
    for (a, b) in u.iter().zip(v) {
        acc.add(a.conj() * b);
    }
    acc.total()
}

fn l2_norm(v: &[C64]) -> f64 {
    weighted_dot(v, v).re.max(0.0).sqrt()
}

/// Orthogonalizes the weighted columns `sqrt(w_k) K^B(s_j, b_k)` in section
/// order (two Gram-Schmidt passes), projects `sqrt(w) F` onto the result,
/// and back-substitutes for the coefficients.
///
/// Because the basis for the first `m` points is a prefix of the basis for
/// the first `m + 1`, residuals over nested sections are nonincreasing.
pub fn onto_residual(
    samples: &[C64],
    ext: &BoundaryExtension,
    mu: &QuadMeasure,
    section: &Section,
) -> Result<Projection> {
    check_kernels(ext, section)?;
    if samples.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            expected: mu.len(),
            actual: samples.len(),
        });
    }
    let n = section.len();
    let roots: Vec<f64> = mu.nodes().map(|(_, w)| w.sqrt()).collect();
    let weigh =
        |values: Vec<C64>| -> Vec<C64> { values.iter().zip(&roots).map(|(v, r)| v * *r).collect() };
    let target = weigh(samples.to_vec());

    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut r = CMatrix::zeros(n, n);
    let mut kept = Vec::with_capacity(n);
    let mut dependent = Vec::new();
    for (j, s) in section.points().iter().enumerate() {
        let mut v = weigh(mu.sample(|b| ext.eval(s, b))?);
        let original = l2_norm(&v);
        for _ in 0..2 {
            for (t, q) in basis.iter().enumerate() {
                let h = weighted_dot(q, &v);
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= h * y;
                }
                r[(t, j)] += h;
            }
        }
        let remaining = l2_norm(&v);
        if remaining > DEPENDENCE_TOL * original && remaining > 0.0 {
            r[(basis.len(), j)] = C64::new(remaining, 0.0);
            basis.push(v.into_iter().map(|x| x / remaining).collect());
            kept.push(j);
        } else {
            dependent.push(j);
        }
    }

    let d: Vec<C64> = basis.iter().map(|q| weighted_dot(q, &target)).collect();
    let residual_values: Vec<C64> = (0..target.len())
        .map(|k| target[k] - compensated_sum(basis.iter().zip(&d).map(|(q, dt)| dt * q[k])))
        .collect();

    // R restricted to the kept columns is upper triangular
    let mut coeffs = CVector::zeros(n);
    for row in (0..kept.len()).rev() {
        let mut acc = d[row];
        for col in (row + 1)..kept.len() {
            acc -= r[(row, kept[col])] * coeffs[kept[col]];
        }
        coeffs[kept[row]] = acc / r[(row, kept[row])];
    }
    Ok(Projection {
        residual: l2_norm(&residual_values),
        target_norm: l2_norm(&target),
        coeffs,
        dependent,
    })
}

/// Pushforward comparison `mu_2 ∘ phi^{-1}` against `mu_1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MorphismVerdict {
    pub max_mass_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks `mu_2 ∘ phi^{-1} = mu_1` atom by atom. The sigma-algebra on the
/// domain is the preimage partition, so this is the whole condition.
pub fn morphism_check(
    mu1: &AtomicMeasure,
    mu2: &AtomicMeasure,
    phi: &MeasurableMap,
) -> Result<MorphismVerdict> {
    if phi.codomain_len() != mu1.len() {
        return Err(Error::DimensionMismatch {
            expected: mu1.len(),
            actual: phi.codomain_len(),
        });
    }
    let masses = fiber_masses(mu2, phi)?;
    let max_mass_error = masses
        .iter()
        .zip(mu1.weights())
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    Ok(MorphismVerdict {
        max_mass_error,
        tolerance: MASS_TOL,
        pass: max_mass_error <= MASS_TOL,
    })
}

/// Defects of `W_{B_2} = W_{21} W_{B_1}` on one element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagramReport {
    /// `max_{b in B_2} |(W_{B_1} f)(phi(b)) - (W_{B_2} f)(b)|`.
    pub sup_defect: f64,
    /// `| ||f~ ∘ phi||^2_{mu_2} - ||f~||^2_{mu_1} |`.
    pub w21_isometry_defect: f64,
    pub morphism: MorphismVerdict,
}

pub fn commuting_diagram_defect(
    f: &RkhsElement<'_>,
    ext1: &BoundaryExtension,
    ext2: &BoundaryExtension,
    mu1: &AtomicMeasure,
    mu2: &AtomicMeasure,
    phi: &MeasurableMap,
) -> Result<DiagramReport> {
    let morphism = morphism_check(mu1, mu2, phi)?;
    if !morphism.pass {
        return Err(Error::InvalidArgument(format!(
            "map does not push the second measure onto the first (mass error {:e})",
            morphism.max_mass_error
        )));
    }
    let section = f.section();
    let q1 = QuadMeasure::atomic(mu1.clone());
    let q2 = QuadMeasure::atomic(mu2.clone());
    for (ext, q) in [(ext1, &q1), (ext2, &q2)] {
        let report = membership_defect(ext, q, section, ALGEBRAIC_TOL)?;
        if !report.pass {
            return Err(Error::InvalidArgument(format!(
                "boundary is not a factorization of the kernel (defect {:e})",
                report.defect
            )));
        }
    }
    let g1 = boundary_transform(f, ext1)?.sample(&q1)?;
    let g2 = boundary_transform(f, ext2)?.sample(&q2)?;
    let pulled: Vec<C64> = (0..mu2.len()).map(|b| g1[phi.image(b)]).collect();
    let sup_defect = pulled
        .iter()
        .zip(&g2)
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).norm()));
    let norm_sq = |values: &[C64], q: &QuadMeasure| -> Result<f64> {
        let squares: Vec<C64> = values.iter().map(|v| C64::new(v.norm_sqr(), 0.0)).collect();
        Ok(q.integrate_samples(&squares)?.re)
    };
    let w21_isometry_defect = (norm_sq(&pulled, &q2)? - norm_sq(&g1, &q1)?).abs();
    Ok(DiagramReport {
        sup_defect,
        w21_isometry_defect,
        morphism,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Kernel;
    use crate::measure::scale_measure;
    use approx::assert_abs_diff_eq;

    fn szego_pair() -> Section {
        Section::new(&Kernel::Szego, vec![Point::Real(0.0), Point::Real(0.5)]).unwrap()
    }

    #[test]
    fn szego_two_point_boundary_matrix() {
        let section = szego_pair();
        let ext = BoundaryExtension::canonical(&Kernel::Szego).unwrap();
        let mu = QuadMeasure::periodic_uniform(2048).unwrap();
        let n = boundary_gram(&ext, &mu, &section).unwrap();
        let expected =
            CMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 4.0 / 3.0].map(|x| C64::new(x, 0.0)));
        assert!((&n.matrix - expected).norm() < 1e-10);
    }

    #[test]
    fn single_origin_point() {
        let section = Section::new(&Kernel::Szego, vec![Point::Real(0.0)]).unwrap();
        let ext = BoundaryExtension::canonical(&Kernel::Szego).unwrap();
        let mu = QuadMeasure::periodic_uniform(16).unwrap();
        let n = boundary_gram(&ext, &mu, &section).unwrap();
        assert_abs_diff_eq!(n.matrix[(0, 0)].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn scaled_measure_fails_membership() {
        let section = szego_pair();
        let ext = BoundaryExtension::canonical(&Kernel::Szego).unwrap();
        let mu = scale_measure(&QuadMeasure::periodic_uniform(512).unwrap(), 2.0).unwrap();
        let report = membership_defect(&ext, &mu, &section, 1e-8).unwrap();
        assert!(!report.pass);
        assert_abs_diff_eq!(report.defect, 4.0 / 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(report.carleson_constant, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn negative_frequency_is_annihilated() {
        let section = Section::new(
            &Kernel::Szego,
            vec![Point::complex(0.3, 0.4), Point::Real(-0.6)],
        )
        .unwrap();
        let ext = BoundaryExtension::canonical(&Kernel::Szego).unwrap();
        let mu = QuadMeasure::periodic_uniform(256).unwrap();
        let samples = mu
            .sample(|b| match b {
                BoundaryPoint::Angle(x) => Ok(crate::kernel::unit_exponential(-x)),
                _ => unreachable!(),
            })
            .unwrap();
        for s in section.points() {
            assert!(adjoint_apply(&samples, &ext, &mu, s).unwrap().norm() < 1e-14);
        }
        let zero = vec![C64::new(0.0, 0.0); mu.len()];
        assert_eq!(
            adjoint_apply(&zero, &ext, &mu, &Point::Real(0.1)).unwrap(),
            C64::new(0.0, 0.0)
        );
        let proj = onto_residual(&samples, &ext, &mu, &section).unwrap();
        assert_abs_diff_eq!(proj.residual, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn transform_of_origin_section_is_constant() {
        let section = Section::new(&Kernel::Szego, vec![Point::Real(0.0)]).unwrap();
        let f = RkhsElement::kernel_section(&section, 0).unwrap();
        let ext = BoundaryExtension::canonical(&Kernel::Szego).unwrap();
        let t = boundary_transform(&f, &ext).unwrap();
        for x in [0.0, 0.3, 0.9] {
            assert_eq!(
                t.eval(&BoundaryPoint::Angle(x)).unwrap(),
                C64::new(1.0, 0.0)
            );
        }
    }

    #[test]
    fn mismatched_kernel_is_rejected() {
        let section = szego_pair();
        let ext = BoundaryExtension::canonical(&Kernel::Bargmann).unwrap();
        let mu = QuadMeasure::gauss_hermite_plane(4).unwrap();
        assert!(boundary_gram(&ext, &mu, &section).is_err());
        let band = QuadMeasure::gauss_legendre_band(4).unwrap();
        let szego = BoundaryExtension::canonical(&Kernel::Szego).unwrap();
        assert!(matches!(
            boundary_gram(&szego, &band, &section),
            Err(Error::BoundaryDomain { .. })
        ));
    }

    #[test]
    fn morphism_examples() {
        let mu4 = AtomicMeasure::uniform(4).unwrap();
        let mu2 = AtomicMeasure::uniform(2).unwrap();
        let pairing = MeasurableMap::new(vec![0, 0, 1, 1], 2).unwrap();
        assert!(morphism_check(&mu2, &mu4, &pairing).unwrap().pass);
        assert!(
            morphism_check(&mu4, &mu4, &MeasurableMap::identity(4))
                .unwrap()
                .pass
        );
        let skewed = AtomicMeasure::on_atoms(vec![0.3, 0.7]).unwrap();
        assert!(!morphism_check(&skewed, &mu4, &pairing).unwrap().pass);
        let partial = MeasurableMap::new(vec![0, 1, 1], 2).unwrap();
        assert!(matches!(
            morphism_check(&mu2, &mu4, &partial),
            Err(Error::MapNotTotal { .. })
        ));
    }
}
