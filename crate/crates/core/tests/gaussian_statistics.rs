mod common;

use common::*;
use rkhs_boundary::gaussian::{covariance_defect, empirical_covariance, GaussianEnsemble};
use rkhs_boundary::{CMatrix, Kernel, Section, C64};

fn szego_five() -> Section {
    Section::new(&Kernel::Szego, disk_points(5, 0.9, 42)).unwrap()
}

fn relative_gap(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    max_entry_diff(a, b) / scale.max(f64::MIN_POSITIVE)
}

#[test]
fn factor_reproduces_every_zoo_gram() {
    for (kernel, pts) in zoo(8, 200) {
        let section = Section::new(&kernel, pts).unwrap();
        let ensemble = GaussianEnsemble::new(&section, 1).unwrap();
        assert!(
            relative_gap(&ensemble.covariance(), section.gram()) < 1e-12,
            "{}",
            kernel.name()
        );
    }
}

#[test]
fn marginals_are_sub_blocks() {
    let section = Section::new(&Kernel::Szego, disk_points(7, 0.9, 210)).unwrap();
    let ensemble = GaussianEnsemble::new(&section, 3).unwrap();
    for indices in [vec![0, 1], vec![2, 4, 6], vec![5], vec![6, 0, 3, 1]] {
        let from_factor = ensemble.marginal_covariance(&indices).unwrap();
        let block = CMatrix::from_fn(indices.len(), indices.len(), |a, b| {
            section.gram()[(indices[a], indices[b])]
        });
        assert!(relative_gap(&from_factor, &block) < 1e-12);
        assert_eq!(ensemble.marginal_gram(&indices), block);
    }
    assert!(ensemble.marginal_covariance(&[7]).is_err());
}

#[test]
fn sample_mean_within_four_sigma() {
    let section = szego_five();
    let ensemble = GaussianEnsemble::new(&section, 42).unwrap();
    let count = 100_000;
    let batch = ensemble.sample(count).unwrap();
    for (i, m) in batch.mean().iter().enumerate() {
        let sigma = (section.gram()[(i, i)].re / count as f64).sqrt();
        assert!(m.norm() < 4.0 * sigma, "coordinate {i}: {m}");
    }
}

#[test]
fn covariance_defect_small_for_each_zoo_kernel() {
    for (kernel, pts) in zoo(5, 300) {
        let section = Section::new(&kernel, pts).unwrap();
        let ensemble = GaussianEnsemble::new(&section, 42).unwrap();
        let defect = covariance_defect(&ensemble, 100_000).unwrap();
        assert!(defect < 0.05, "{}: {defect}", kernel.name());
    }
}

#[test]
fn covariance_defect_shrinks_with_sample_count() {
    let section = szego_five();
    let mean_defect = |count: usize| -> f64 {
        (0..10u64)
            .map(|seed| {
                covariance_defect(&GaussianEnsemble::new(&section, seed).unwrap(), count).unwrap()
            })
            .sum::<f64>()
            / 10.0
    };
    let (coarse, fine) = (mean_defect(100), mean_defect(10_000));
    assert!(fine < coarse, "{fine} >= {coarse}");
    // sqrt(100) shrinkage predicted; allow a factor of three either way
    assert!(fine < coarse / 3.0);
}

#[test]
fn identity_gram_rate() {
    let ensemble = GaussianEnsemble::from_gram(CMatrix::identity(4, 4), true, 9).unwrap();
    let count = 40_000;
    let cov = empirical_covariance(&ensemble.sample(count).unwrap()).unwrap();
    let bound = 5.0 / (count as f64).sqrt();
    assert!(max_entry_diff(&cov, &CMatrix::identity(4, 4)) < bound);
}

#[test]
fn samples_are_real_for_real_kernels_and_circular_otherwise() {
    let sinc = Section::new(&Kernel::Sinc, real_points(4, 3.0, 5)).unwrap();
    let batch = GaussianEnsemble::new(&sinc, 1).unwrap().sample(50).unwrap();
    assert!(batch.samples.iter().all(|z| z.im == 0.0));

    let section = szego_five();
    let count = 100_000;
    let batch = GaussianEnsemble::new(&section, 2)
        .unwrap()
        .sample(count)
        .unwrap();
    // pseudo-covariance E x x^T vanishes for circular samples
    let x = &batch.samples;
    for i in 0..5 {
        for j in 0..5 {
            let pseudo: C64 = (0..count).map(|k| x[(i, k)] * x[(j, k)]).sum::<C64>() / count as f64;
            let scale = (section.gram()[(i, i)].re * section.gram()[(j, j)].re).sqrt();
            assert!(
                pseudo.norm() < 5.0 * scale * (2.0 / count as f64).sqrt(),
                "({i}, {j}): {pseudo}"
            );
        }
    }
}

#[test]
fn batches_are_reproducible_from_the_seed() {
    let section = szego_five();
    let a = GaussianEnsemble::new(&section, 7).unwrap();
    let b = GaussianEnsemble::new(&section, 7).unwrap();
    assert_eq!(a.sample(100).unwrap(), b.sample(100).unwrap());
    let c = GaussianEnsemble::new(&section, 8).unwrap();
    assert_ne!(a.sample(100).unwrap(), c.sample(100).unwrap());
    assert_eq!(a.seed(), 7);
}
