#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rkhs_boundary::{CMatrix, Kernel, Point, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in the disk of radius `r`.
pub fn disk_point(rng: &mut ChaCha8Rng, r: f64) -> Point {
    let rho = r * rng.gen::<f64>().sqrt();
    let theta = rng.gen::<f64>() * std::f64::consts::TAU;
    Point::complex(rho * theta.cos(), rho * theta.sin())
}

pub fn disk_points(n: usize, r: f64, seed: u64) -> Vec<Point> {
    let mut g = rng(seed);
    (0..n).map(|_| disk_point(&mut g, r)).collect()
}

pub fn real_points(n: usize, half_width: f64, seed: u64) -> Vec<Point> {
    let mut g = rng(seed);
    (0..n)
        .map(|_| Point::Real(g.gen_range(-half_width..half_width)))
        .collect()
}

pub fn complex_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

pub fn unwrap_complex(p: &Point) -> C64 {
    match *p {
        Point::Complex(z) => z,
        Point::Real(x) => C64::new(x, 0.0),
        Point::Index(_) => panic!("index point has no coordinate"),
    }
}

/// Random complex feature rows of length `dim`.
pub fn random_features(rows: usize, dim: usize, seed: u64) -> CMatrix {
    let mut g = rng(seed);
    CMatrix::from_fn(rows, dim, |_, _| {
        C64::new(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0))
    })
}

/// One representative of each closed-form kernel with points drawn from
/// its natural domain, plus an explicit feature kernel.
pub fn zoo(n: usize, seed: u64) -> Vec<(Kernel, Vec<Point>)> {
    vec![
        (Kernel::Szego, disk_points(n, 0.9, seed)),
        (Kernel::Bargmann, disk_points(n, 2.0, seed + 1)),
        (Kernel::cantor4(4).unwrap(), disk_points(n, 0.9, seed + 2)),
        (Kernel::Sinc, real_points(n, 5.0, seed + 3)),
        (
            Kernel::explicit_feature(random_features(n, n + 2, seed + 4)),
            (0..n).map(Point::Index).collect(),
        ),
    ]
}

pub fn max_entry_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}
