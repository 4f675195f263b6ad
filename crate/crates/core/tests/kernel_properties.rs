mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use rkhs_boundary::kernel::{h_inner, h_norm_sq, pd_check, DEFAULT_PD_TOL};
use rkhs_boundary::{CMatrix, Error, Kernel, Point, RkhsElement, Section, C64};

fn draw_point(kernel: &Kernel, rng: &mut rand_chacha::ChaCha8Rng, ground: usize) -> Point {
    match kernel {
        Kernel::Szego | Kernel::Cantor4 { .. } => disk_point(rng, 0.95),
        Kernel::Bargmann => disk_point(rng, 3.0),
        Kernel::Sinc => Point::Real(rng.gen_range(-10.0..10.0)),
        _ => Point::Index(rng.gen_range(0..ground)),
    }
}

#[test]
fn hermitian_symmetry_on_thousand_pairs() {
    for (kernel, pts) in zoo(6, 11) {
        let mut g = rng(99);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let s = draw_point(&kernel, &mut g, pts.len());
            let t = draw_point(&kernel, &mut g, pts.len());
            let forward = kernel.eval(&s, &t).unwrap();
            let backward = kernel.eval(&t, &s).unwrap();
            worst = worst.max((forward - backward.conj()).norm());
        }
        assert!(worst <= 1e-14, "{}: {worst:e}", kernel.name());
    }
}

#[test]
fn sampled_grams_are_psd() {
    for seed in 0..5 {
        for (kernel, pts) in zoo(12, 100 + seed) {
            let section = Section::new(&kernel, pts).unwrap();
            let verdict = pd_check(section.gram(), DEFAULT_PD_TOL).unwrap();
            assert!(verdict.pass, "{}: {verdict:?}", kernel.name());
        }
    }
}

#[test]
fn szego_twenty_point_gram_passes_against_independent_eigensolver() {
    let pts = disk_points(20, 0.9, 5);
    let section = Section::new(&Kernel::Szego, pts.clone()).unwrap();
    // real symmetric embedding [[A, -B], [B, A]] of G = A + iB has the
    // eigenvalues of G, each twice
    let z: Vec<C64> = pts.iter().map(unwrap_complex).collect();
    let n = z.len();
    let embed = nalgebra::DMatrix::<f64>::from_fn(2 * n, 2 * n, |r, c| {
        let g = C64::new(1.0, 0.0) / (C64::new(1.0, 0.0) - z[r % n].conj() * z[c % n]);
        match (r < n, c < n) {
            (true, true) | (false, false) => g.re,
            (true, false) => -g.im,
            (false, true) => g.im,
        }
    });
    let min_oracle = embed.symmetric_eigenvalues().min();
    let verdict = pd_check(section.gram(), 1e-10).unwrap();
    assert!(verdict.pass);
    assert!(min_oracle > 0.0);
    assert!((verdict.min_eigenvalue - min_oracle).abs() < 1e-10 * (1.0 + min_oracle.abs()));
}

#[test]
fn metric_axioms_and_triangle_inequality() {
    for (kernel, pts) in zoo(6, 21) {
        let mut g = rng(7);
        for _ in 0..1000 {
            let a = draw_point(&kernel, &mut g, pts.len());
            let b = draw_point(&kernel, &mut g, pts.len());
            let c = draw_point(&kernel, &mut g, pts.len());
            let ab = kernel.dist(&a, &b).unwrap();
            let bc = kernel.dist(&b, &c).unwrap();
            let ac = kernel.dist(&a, &c).unwrap();
            assert!(ab >= 0.0 && bc >= 0.0 && ac >= 0.0);
            assert_eq!(ab, kernel.dist(&b, &a).unwrap());
            assert!(
                ac <= ab + bc + 1e-12,
                "{}: {ac} > {ab} + {bc}",
                kernel.name()
            );
            assert_eq!(kernel.dist(&a, &a).unwrap(), 0.0);
        }
    }
}

#[test]
fn distinct_sampled_points_have_positive_distance() {
    for (kernel, pts) in zoo(8, 31) {
        let section = Section::new(&kernel, pts).unwrap();
        for i in 0..section.len() {
            for j in (i + 1)..section.len() {
                assert!(section.dist(i, j) > 0.0);
            }
        }
    }
}

#[test]
fn szego_distance_from_quadratic_form() {
    // ||K_0 - K_0.5||^2 = G_00 + G_11 - 2 Re G_01 with G = [[1, 1], [1, 4/3]]
    let d = Kernel::Szego
        .dist(&Point::Real(0.0), &Point::Real(0.5))
        .unwrap();
    assert!((d - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
}

#[test]
fn cantor_product_equals_lambda4_power_sum() {
    fn power_sum(u: C64, levels: u32) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for lambda in 0..4u64.pow(levels) {
            let mut m = lambda;
            let mut ok = true;
            while m > 0 {
                ok &= m % 4 <= 1;
                m /= 4;
            }
            if ok {
                acc += u.powu(lambda as u32);
            }
        }
        acc
    }
    let mut g = rng(3);
    for levels in 1..=5 {
        let kernel = Kernel::cantor4(levels).unwrap();
        for _ in 0..200 {
            let (s, t) = (disk_point(&mut g, 0.9), disk_point(&mut g, 0.9));
            let u = unwrap_complex(&s).conj() * unwrap_complex(&t);
            let product = kernel.eval(&s, &t).unwrap();
            assert!((product - power_sum(u, levels)).norm() < 1e-12);
        }
    }
}

#[test]
fn cantor_level_range_is_enforced() {
    assert!(matches!(Kernel::cantor4(0), Err(Error::OutOfRange { .. })));
    assert!(Kernel::cantor4(21).is_err());
    let k = Kernel::cantor4(3).unwrap();
    assert_eq!(
        k.eval(&Point::Real(0.0), &Point::complex(0.3, -0.6))
            .unwrap(),
        C64::new(1.0, 0.0)
    );
}

#[test]
fn domain_violations_are_rejected() {
    assert!(matches!(
        Kernel::Szego.eval(&Point::Real(1.0), &Point::Real(0.0)),
        Err(Error::Domain { .. })
    ));
    assert!(Kernel::Sinc
        .eval(&Point::complex(0.0, 1.0), &Point::Real(0.0))
        .is_err());
    assert!(Kernel::Bargmann
        .eval(&Point::Index(0), &Point::Real(0.0))
        .is_err());
    let feature = Kernel::explicit_feature(CMatrix::identity(2, 2));
    assert!(feature.eval(&Point::Index(2), &Point::Index(0)).is_err());
}

#[test]
fn explicit_gram_validation() {
    let bad = CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, 1.0),
            C64::new(1.0, 0.0),
        ],
    );
    assert!(matches!(
        Kernel::explicit_gram(bad),
        Err(Error::NotHermitian { .. })
    ));
    let indefinite = CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(1.0, 0.0),
            C64::new(2.0, 0.0),
            C64::new(2.0, 0.0),
            C64::new(1.0, 0.0),
        ],
    );
    assert!(matches!(
        Kernel::explicit_gram(indefinite),
        Err(Error::NotPositiveDefinite { .. })
    ));
}

type Coefficients = Vec<(f64, f64)>;

fn element_pairs() -> impl Strategy<Value = (u64, Coefficients, Coefficients)> {
    (
        any::<u64>(),
        prop::collection::vec((-2.0..2.0, -2.0..2.0), 6),
        prop::collection::vec((-2.0..2.0, -2.0..2.0), 6),
    )
}

fn to_complex(v: &[(f64, f64)]) -> Vec<C64> {
    v.iter().map(|&(a, b)| C64::new(a, b)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_product_is_conjugate_symmetric((seed, c, d) in element_pairs()) {
        for (kernel, pts) in zoo(6, seed % 1000) {
            let section = Section::new(&kernel, pts).unwrap();
            let f = RkhsElement::from_slice(&section, &to_complex(&c)).unwrap();
            let g = RkhsElement::from_slice(&section, &to_complex(&d)).unwrap();
            let fg = h_inner(&f, &g).unwrap();
            let gf = h_inner(&g, &f).unwrap();
            let scale = 1.0 + fg.norm();
            prop_assert!((fg - gf.conj()).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn norm_is_inner_with_itself_and_nonnegative((seed, c, _d) in element_pairs()) {
        for (kernel, pts) in zoo(6, seed % 1000) {
            let section = Section::new(&kernel, pts).unwrap();
            let f = RkhsElement::from_slice(&section, &to_complex(&c)).unwrap();
            let norm = h_norm_sq(&f);
            prop_assert_eq!(norm, h_inner(&f, &f).unwrap().re);
            prop_assert!(norm >= -1e-10 * section.gram().norm());
        }
    }

    #[test]
    fn norm_is_invariant_under_permutation((seed, c, _d) in element_pairs(), shift in 1usize..6) {
        let pts = disk_points(6, 0.9, seed % 1000);
        let coeffs = to_complex(&c);
        let section = Section::new(&Kernel::Szego, pts.clone()).unwrap();
        let f = RkhsElement::from_slice(&section, &coeffs).unwrap();
        let perm: Vec<usize> = (0..6).map(|i| (i * 5 + shift) % 6).collect();
        let permuted = Section::new(&Kernel::Szego, perm.iter().map(|&i| pts[i]).collect()).unwrap();
        let pc: Vec<C64> = perm.iter().map(|&i| coeffs[i]).collect();
        let g = RkhsElement::from_slice(&permuted, &pc).unwrap();
        let (a, b) = (h_norm_sq(&f), h_norm_sq(&g));
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn evaluation_at_section_point_is_gram_combination((seed, c, _d) in element_pairs(), i in 0usize..6) {
        let section = Section::new(&Kernel::Bargmann, disk_points(6, 2.0, seed % 1000)).unwrap();
        let coeffs = to_complex(&c);
        let f = RkhsElement::from_slice(&section, &coeffs).unwrap();
        let value = f.evaluate(&section.points()[i]).unwrap();
        let expected: C64 = (0..6).map(|j| coeffs[j] * section.gram()[(j, i)]).sum();
        prop_assert!((value - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
    }
}

#[test]
fn inner_product_rejects_foreign_sections() {
    let a = Section::new(&Kernel::Szego, vec![Point::Real(0.0)]).unwrap();
    let b = Section::new(&Kernel::Szego, vec![Point::Real(0.1)]).unwrap();
    let f = RkhsElement::kernel_section(&a, 0).unwrap();
    let g = RkhsElement::kernel_section(&b, 0).unwrap();
    assert!(matches!(h_inner(&f, &g), Err(Error::SectionMismatch)));
}
