//! Turns the kernel, measure and points descriptors into library values.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rkhs_boundary::{AtomicMeasure, BoundaryExtension, CMatrix, Kernel, Point, QuadMeasure, C64};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

pub const DEFAULT_CANTOR_LEVEL: u32 = 6;

/// A kernel with its boundary extension and the measure that goes with it.
pub struct KernelSetup {
    pub kernel: Kernel,
    pub ext: BoundaryExtension,
    /// Atoms for kernels defined by files; `None` for closed forms.
    pub atoms: Option<AtomicMeasure>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FeatureFile {
    features: Vec<Vec<[f64; 2]>>,
    weights: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GramFile {
    gram: Vec<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
#[serde(tag = "domain", content = "points", rename_all = "lowercase")]
enum PointsFile {
    Complex(Vec<[f64; 2]>),
    Real(Vec<f64>),
    Index(Vec<usize>),
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {what} file {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("malformed {what} file {}: {e}", path.display())))
}

fn complex_matrix(rows: &[Vec<[f64; 2]>], what: &str) -> CliResult<CMatrix> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(CliError::usage(format!(
            "{what} must be a non-empty rectangular array"
        )));
    }
    Ok(CMatrix::from_fn(rows.len(), ncols, |i, j| {
        C64::new(rows[i][j][0], rows[i][j][1])
    }))
}

fn parse_number<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<T> {
    text.parse()
        .map_err(|_| CliError::usage(format!("malformed {what}: {text:?}")))
}

pub fn kernel(descriptor: &str) -> CliResult<KernelSetup> {
    let (head, tail) = match descriptor.split_once(':') {
        Some((h, t)) => (h, Some(t)),
        None => (descriptor, None),
    };
    let (kernel, atoms, ext) = match (head, tail) {
        ("szego", None) => (Kernel::Szego, None, None),
        ("bargmann", None) => (Kernel::Bargmann, None, None),
        ("sinc", None) => (Kernel::Sinc, None, None),
        ("cantor", level) => {
            let level = level.map_or(Ok(DEFAULT_CANTOR_LEVEL), |l| {
                parse_number(l, "Cantor level")
            })?;
            (Kernel::cantor4(level)?, None, None)
        }
        ("features", Some(path)) => {
            let file: FeatureFile = read_json(Path::new(path), "feature")?;
            let features = complex_matrix(&file.features, "features")?;
            let weights = file
                .weights
                .unwrap_or_else(|| vec![1.0 / features.ncols() as f64; features.ncols()]);
            let kernel = Kernel::explicit_feature(features);
            let ext = BoundaryExtension::feature_atoms(&kernel, &weights)?;
            (kernel, Some(AtomicMeasure::on_atoms(weights)?), Some(ext))
        }
        ("gram", Some(path)) => {
            let file: GramFile = read_json(Path::new(path), "Gram")?;
            let kernel = Kernel::explicit_gram(complex_matrix(&file.gram, "gram")?)?;
            let (ext, atoms) = BoundaryExtension::gram_factor(&kernel)?;
            (kernel, Some(atoms), Some(ext))
        }
        _ => {
            return Err(CliError::usage(format!(
                "unknown kernel descriptor {descriptor:?}"
            )))
        }
    };
    let ext = match ext {
        Some(e) => e,
        None => BoundaryExtension::canonical(&kernel)?,
    };
    Ok(KernelSetup { kernel, ext, atoms })
}

pub fn default_measure(setup: &KernelSetup) -> String {
    match &setup.kernel {
        Kernel::Szego => "uniform:2048".into(),
        Kernel::Bargmann => "gauss-hermite:64".into(),
        Kernel::Cantor4 { levels } => format!("cantor:{levels}"),
        Kernel::Sinc => "band:64".into(),
        Kernel::ExplicitGram(_) | Kernel::ExplicitFeature(_) => "atoms".into(),
    }
}

pub fn measure(descriptor: &str, setup: &KernelSetup, scale: f64) -> CliResult<QuadMeasure> {
    let base = match descriptor.split_once(':') {
        Some(("uniform", n)) => QuadMeasure::periodic_uniform(parse_number(n, "node count")?)?,
        Some(("gauss-hermite", n)) => {
            QuadMeasure::gauss_hermite_plane(parse_number(n, "node count")?)?
        }
        Some(("cantor", d)) => QuadMeasure::cantor(parse_number(d, "Cantor depth")?)?,
        Some(("band", n)) => QuadMeasure::gauss_legendre_band(parse_number(n, "node count")?)?,
        None if descriptor == "atoms" => match &setup.atoms {
            Some(a) => QuadMeasure::atomic(a.clone()),
            None => {
                return Err(CliError::usage(
                    "the atoms measure needs a features: or gram: kernel",
                ))
            }
        },
        _ => {
            return Err(CliError::usage(format!(
                "unknown measure descriptor {descriptor:?}"
            )))
        }
    };
    Ok(rkhs_boundary::measure::scale_measure(&base, scale)?)
}

/// Where random points and probes for a kernel are drawn from.
#[derive(Clone, Copy, Debug)]
pub enum Region {
    Disk(f64),
    Line(f64),
    Indices(usize),
}

pub fn natural_region(kernel: &Kernel) -> Region {
    match kernel {
        Kernel::Szego | Kernel::Cantor4 { .. } => Region::Disk(0.9),
        Kernel::Bargmann => Region::Disk(2.0),
        Kernel::Sinc => Region::Line(3.0),
        Kernel::ExplicitGram(g) => Region::Indices(g.nrows()),
        Kernel::ExplicitFeature(f) => Region::Indices(f.nrows()),
    }
}

pub fn default_points(kernel: &Kernel) -> String {
    match kernel {
        Kernel::Szego | Kernel::Cantor4 { .. } => "disk:10:0.9:1".into(),
        Kernel::Bargmann => "disk:6:2:1".into(),
        Kernel::Sinc => "line:5:3:1".into(),
        Kernel::ExplicitGram(_) | Kernel::ExplicitFeature(_) => "indices".into(),
    }
}

/// `count` points drawn uniformly from `region` with a seeded generator.
pub fn random_points(region: Region, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| match region {
            Region::Disk(r) => {
                let rho = r * rng.gen::<f64>().sqrt();
                let theta = rng.gen::<f64>() * std::f64::consts::TAU;
                Point::complex(rho * theta.cos(), rho * theta.sin())
            }
            Region::Line(h) => Point::Real(rng.gen_range(-h..h)),
            Region::Indices(n) => Point::Index(k % n),
        })
        .collect()
}

fn grid5(kernel: &Kernel) -> Vec<Point> {
    match natural_region(kernel) {
        Region::Disk(r) => {
            let a = r * 0.6;
            vec![
                Point::complex(0.0, 0.0),
                Point::complex(a, 0.0),
                Point::complex(0.0, a),
                Point::complex(-a, 0.0),
                Point::complex(0.0, -a),
            ]
        }
        Region::Line(_) => [-1.5, -0.75, 0.0, 0.75, 1.5].map(Point::Real).to_vec(),
        Region::Indices(n) => (0..n.min(5)).map(Point::Index).collect(),
    }
}

fn positive(text: &str, what: &str) -> CliResult<f64> {
    let value: f64 = parse_number(text, what)?;
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::usage(format!(
            "{what} must be positive, got {text}"
        )))
    }
}

pub fn points(descriptor: &str, kernel: &Kernel) -> CliResult<Vec<Point>> {
    let fields: Vec<&str> = descriptor.split(':').collect();
    match fields.as_slice() {
        ["grid5"] => Ok(grid5(kernel)),
        ["indices"] => match natural_region(kernel) {
            Region::Indices(n) => Ok((0..n).map(Point::Index).collect()),
            _ => Err(CliError::usage(
                "indices points need a features: or gram: kernel",
            )),
        },
        ["disk", n, r, seed] => Ok(random_points(
            Region::Disk(positive(r, "radius")?),
            parse_number(n, "point count")?,
            parse_number(seed, "seed")?,
        )),
        ["line", n, h, seed] => Ok(random_points(
            Region::Line(positive(h, "half-width")?),
            parse_number(n, "point count")?,
            parse_number(seed, "seed")?,
        )),
        _ => {
            let file: PointsFile = read_json(Path::new(descriptor), "points")?;
            Ok(match file {
                PointsFile::Complex(v) => v
                    .into_iter()
                    .map(|[re, im]| Point::complex(re, im))
                    .collect(),
                PointsFile::Real(v) => v.into_iter().map(Point::Real).collect(),
                PointsFile::Index(v) => v.into_iter().map(Point::Index).collect(),
            })
        }
    }
}
