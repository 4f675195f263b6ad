//! One function per subcommand. Each fills a report with scalars, the raw
//! tables its verdicts are computed from, and the verdicts themselves.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rkhs_boundary::boundary::{
    adjoint_apply, boundary_gram, boundary_transform, carleson_from_matrix,
    commuting_diagram_defect, isometry_check, morphism_check, onto_residual,
};
use rkhs_boundary::gaussian::{empirical_covariance, GaussianEnsemble};
use rkhs_boundary::kernel::{pd_check, sinc};
use rkhs_boundary::linalg::{hermitian_eigenvalues, max_diagonal};
use rkhs_boundary::measure::{cantor4_fourier, fiber_masses};
use rkhs_boundary::reconstruct::{
    lambda4_enumerate, parseval_defect, shannon_reconstruct, sinc_tail_bound, BandlimitedSamples,
};
use rkhs_boundary::{
    AtomicMeasure, BoundaryExtension, BoundaryPoint, CMatrix, Kernel, MeasurableMap, Point,
    QuadMeasure, RkhsElement, Section, C64,
};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::{CommandName, RunConfig};
use crate::error::{CliError, CliResult};
use crate::report::{Report, Table};
use crate::setup::{self, KernelSetup};

pub fn run(config: &RunConfig) -> CliResult<Report> {
    let mut report = Report::new(config);
    match config.command {
        CommandName::PdCheck => pd_check_cmd(config, &mut report)?,
        CommandName::Factorize => factorize(config, &mut report)?,
        CommandName::Isometry => isometry(config, &mut report)?,
        CommandName::Carleson => carleson(config, &mut report)?,
        CommandName::AdjointRoundtrip => adjoint_roundtrip(config, &mut report)?,
        CommandName::Project => project(config, &mut report)?,
        CommandName::Gp => gp(config, &mut report)?,
        CommandName::Shannon => shannon(config, &mut report)?,
        CommandName::CantorOnb => cantor_onb(config, &mut report)?,
        CommandName::Morphism => morphism(config, &mut report)?,
    }
    Ok(report)
}

struct Problem {
    setup: KernelSetup,
    measure: QuadMeasure,
    points: Vec<Point>,
}

fn problem(config: &RunConfig, report: &mut Report) -> CliResult<Problem> {
    let setup = setup::kernel(config.kernel_descriptor())?;
    let measure_desc = config
        .measure
        .clone()
        .unwrap_or_else(|| setup::default_measure(&setup));
    let points_desc = config
        .points
        .clone()
        .unwrap_or_else(|| setup::default_points(&setup.kernel));
    let measure = setup::measure(&measure_desc, &setup, config.scale)?;
    let points = setup::points(&points_desc, &setup.kernel)?;
    report.scalar("kernel", setup.kernel.name());
    report.scalar("measure", measure.describe());
    report.scalar("points", points_desc);
    report.scalar("section_size", points.len());
    report.scalar("total_mass", measure.total_mass());
    Ok(Problem {
        setup,
        measure,
        points,
    })
}

fn section(p: &Problem) -> CliResult<Section> {
    Ok(Section::new(&p.setup.kernel, p.points.clone())?)
}

fn re_im(z: C64) -> [Value; 2] {
    [json!(z.re), json!(z.im)]
}

fn point_cells(p: &Point) -> [Value; 2] {
    match *p {
        Point::Real(x) => [json!(x), json!(0.0)],
        Point::Complex(z) => re_im(z),
        Point::Index(i) => [json!(i), json!(0.0)],
    }
}

fn random_coeffs(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn pd_check_cmd(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let tol = config.tol.unwrap_or(1e-10);
    let setup = setup::kernel(config.kernel_descriptor())?;
    let points_desc = config
        .points
        .clone()
        .unwrap_or_else(|| setup::default_points(&setup.kernel));
    let points = setup::points(&points_desc, &setup.kernel)?;
    let kernel = &setup.kernel;
    let n = points.len();
    let mut gram = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] = kernel.eval(&points[i], &points[j])?;
        }
    }
    let verdict = pd_check(&gram, tol)?;
    let max_diag = max_diagonal(&gram);
    report.scalar("kernel", kernel.name());
    report.scalar("points", points_desc);
    report.scalar("section_size", n);
    report.scalar("max_diagonal", max_diag);
    report.scalar("min_eigenvalue", verdict.min_eigenvalue);
    let mut eig = Table::new("eigenvalues", &["index", "eigenvalue"]);
    for (k, e) in hermitian_eigenvalues(&gram).iter().enumerate() {
        eig.push(vec![json!(k), json!(e)]);
    }
    report.table(eig);
    let relative = if max_diag > 0.0 {
        verdict.min_eigenvalue / max_diag
    } else {
        0.0
    };
    report.at_least("relative_min_eigenvalue", relative, -tol);
    Ok(())
}

fn factorize(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let tol = config.tol.unwrap_or(1e-8);
    let p = problem(config, report)?;
    let section = section(&p)?;
    let boundary = boundary_gram(&p.setup.ext, &p.measure, &section)?;
    let carleson = carleson_from_matrix(&boundary, &section)?;
    let mut table = Table::new(
        "boundary_matrix",
        &[
            "i",
            "j",
            "n_re",
            "n_im",
            "conj_gram_re",
            "conj_gram_im",
            "abs_diff",
        ],
    );
    let mut defect = 0.0f64;
    for i in 0..section.len() {
        for j in i..section.len() {
            let nij = boundary.matrix[(i, j)];
            let gij = section.gram()[(i, j)].conj();
            let diff = (nij - gij).norm();
            defect = defect.max(diff);
            let [a, b] = re_im(nij);
            let [c, d] = re_im(gij);
            table.push(vec![json!(i), json!(j), a, b, c, d, json!(diff)]);
        }
    }
    report.scalar("spectral_evaluation", boundary.spectral);
    report.scalar("defect", defect);
    report.scalar("carleson_constant", carleson.constant);
    report.table(table);
    report.below("membership_defect", defect, tol);
    Ok(())
}

fn isometry(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let tol = config.tol.unwrap_or(1e-8);
    let trials = config.samples.unwrap_or(100);
    let p = problem(config, report)?;
    let section = section(&p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut table = Table::new(
        "trials",
        &[
            "trial",
            "h_norm_sq",
            "l2_norm_sq",
            "defect",
            "relative_defect",
        ],
    );
    let mut worst = 0.0f64;
    for t in 0..trials {
        let f = RkhsElement::from_slice(&section, &random_coeffs(&mut rng, section.len()))?;
        let check = isometry_check(&f, &p.setup.ext, &p.measure)?;
        let relative = check.defect / (1.0 + check.h_norm_sq);
        worst = worst.max(relative);
        table.push(vec![
            json!(t),
            json!(check.h_norm_sq),
            json!(check.l2_norm_sq),
            json!(check.defect),
            json!(relative),
        ]);
    }
    report.table(table);
    report.below("max_relative_isometry_defect", worst, tol);
    Ok(())
}

fn carleson(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let tol = config.tol.unwrap_or(1e-8);
    let target = config.target.unwrap_or(1.0);
    let p = problem(config, report)?;
    let section = section(&p)?;
    let boundary = boundary_gram(&p.setup.ext, &p.measure, &section)?;
    let estimate = carleson_from_matrix(&boundary, &section)?;
    let classification = if (estimate.constant - 1.0).abs() < tol {
        "member"
    } else {
        "non-member"
    };
    report.scalar("carleson_constant", estimate.constant);
    report.scalar("retained_points", estimate.retained.len());
    report.scalar("classification", classification);
    let mut eig = Table::new("eigenvalues", &["index", "eigenvalue"]);
    for (k, e) in estimate.eigenvalues.iter().enumerate() {
        eig.push(vec![json!(k), json!(e)]);
    }
    report.table(eig);
    report.near("carleson_constant", estimate.constant, target, tol);
    Ok(())
}

fn adjoint_roundtrip(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let tol = config.tol.unwrap_or(1e-9);
    let probes = config.samples.unwrap_or(50);
    let p = problem(config, report)?;
    let section = section(&p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let f = RkhsElement::from_slice(&section, &random_coeffs(&mut rng, section.len()))?;
    let samples = boundary_transform(&f, &p.setup.ext)?.sample(&p.measure)?;
    let region = setup::natural_region(&p.setup.kernel);
    let probe_points = setup::random_points(region, probes, config.seed.wrapping_add(1));
    let mut table = Table::new(
        "probes",
        &[
            "probe",
            "point_re",
            "point_im",
            "f_re",
            "f_im",
            "roundtrip_re",
            "roundtrip_im",
            "abs_error",
        ],
    );
    let mut worst = 0.0f64;
    for (k, s) in probe_points.iter().enumerate() {
        let direct = f.evaluate(s)?;
        let back = adjoint_apply(&samples, &p.setup.ext, &p.measure, s)?;
        let err = (direct - back).norm();
        worst = worst.max(err);
        let [a, b] = point_cells(s);
        let [c, d] = re_im(direct);
        let [e, g] = re_im(back);
        table.push(vec![json!(k), a, b, c, d, e, g, json!(err)]);
    }
    report.table(table);
    report.below("max_roundtrip_error", worst, tol);
    Ok(())
}

fn project(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let tol = config.tol.unwrap_or(1e-10);
    let frequency = config.frequency.unwrap_or(-1);
    let p = problem(config, report)?;
    let section = section(&p)?;
    let target = p
        .measure
        .nodes()
        .map(|(b, _)| match b {
            BoundaryPoint::Angle(x) => {
                Ok(C64::new(0.0, std::f64::consts::TAU * frequency as f64 * x).exp())
            }
            _ => Err(CliError::usage(
                "project needs a measure on the circle or the Cantor support",
            )),
        })
        .collect::<CliResult<Vec<_>>>()?;
    report.scalar("frequency", frequency);
    let mut table = Table::new(
        "residuals",
        &[
            "section_size",
            "residual",
            "target_norm",
            "dependent_columns",
        ],
    );
    let mut previous = f64::INFINITY;
    let mut worst_increase = 0.0f64;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut last = f64::NAN;
    let mut dependent = 0usize;
    for m in 1..=section.len() {
        let projection = onto_residual(&target, &p.setup.ext, &p.measure, &section.prefix(m))?;
        worst_increase = worst_increase.max(projection.residual - previous);
        worst_excess = worst_excess.max(projection.residual - projection.target_norm);
        previous = projection.residual;
        last = projection.residual;
        dependent = projection.dependent.len();
        table.push(vec![
            json!(m),
            json!(projection.residual),
            json!(projection.target_norm),
            json!(projection.dependent.len()),
        ]);
    }
    report.scalar("residual", last);
    report.scalar("dependent_columns", dependent);
    report.table(table);
    report.at_most("max_residual_increase", worst_increase, tol);
    report.at_most("residual_above_target_norm", worst_excess, 1e-12);
    Ok(())
}

fn gp(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let tol = config.tol.unwrap_or(0.05);
    let count = config.samples.unwrap_or(100_000);
    if count < 2 {
        return Err(CliError::usage("gp needs --samples of at least two"));
    }
    let setup = setup::kernel(config.kernel_descriptor())?;
    let points_desc = config
        .points
        .clone()
        .unwrap_or_else(|| setup::default_points(&setup.kernel));
    let section = Section::new(&setup.kernel, setup::points(&points_desc, &setup.kernel)?)?;
    let ensemble = GaussianEnsemble::new(&section, config.seed)?;
    let empirical = empirical_covariance(&ensemble.sample(count)?)?;
    let gram = section.gram();
    let gram_norm = gram.norm();
    let defect = if gram_norm == 0.0 {
        0.0
    } else {
        (&empirical - gram).norm() / gram_norm
    };
    let scale = max_diagonal(gram).max(f64::MIN_POSITIVE);
    let refactor = (ensemble.covariance() - gram)
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm()))
        / scale;
    let mut marginal = 0.0f64;
    for m in 1..=section.len() {
        let idx: Vec<usize> = (0..m).collect();
        let block = ensemble.marginal_covariance(&idx)? - ensemble.marginal_gram(&idx);
        marginal = marginal.max(block.iter().fold(0.0f64, |a, z| a.max(z.norm())) / scale);
    }
    report.scalar("kernel", setup.kernel.name());
    report.scalar("points", points_desc);
    report.scalar("section_size", section.len());
    report.scalar("samples", count);
    report.scalar("rank", ensemble.rank());
    report.scalar("covariance_defect", defect);
    let mut table = Table::new(
        "covariance",
        &[
            "i",
            "j",
            "empirical_re",
            "empirical_im",
            "gram_re",
            "gram_im",
            "abs_error",
        ],
    );
    for i in 0..section.len() {
        for j in 0..section.len() {
            let [a, b] = re_im(empirical[(i, j)]);
            let [c, d] = re_im(gram[(i, j)]);
            table.push(vec![
                json!(i),
                json!(j),
                a,
                b,
                c,
                d,
                json!((empirical[(i, j)] - gram[(i, j)]).norm()),
            ]);
        }
    }
    report.table(table);
    report.below("covariance_defect", defect, tol);
    report.below("refactorization_error", refactor, 1e-10);
    report.below("marginal_block_error", marginal, 1e-12);
    Ok(())
}

fn shannon(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let tol = config.tol.unwrap_or(1e-3);
    let half_width = config.samples.unwrap_or(1000) as i64;
    let shift = config.shift.unwrap_or(0.3);
    let samples =
        BandlimitedSamples::symmetric(half_width, |n| C64::new(sinc(n as f64 - shift), 0.0));
    let mut table = Table::new(
        "reconstruction",
        &["t", "reconstructed", "exact", "abs_error", "tail_bound"],
    );
    let mut worst = 0.0f64;
    let mut worst_integer = 0.0f64;
    for k in 0..=400 {
        let t = -2.0 + 0.01 * k as f64;
        let value = shannon_reconstruct(&samples, t);
        let exact = sinc(t - shift);
        let err = (value - C64::new(exact, 0.0)).norm();
        worst = worst.max(err);
        table.push(vec![
            json!(t),
            json!(value.re),
            json!(exact),
            json!(err),
            json!(sinc_tail_bound(half_width, shift, t)),
        ]);
    }
    for n in -half_width.min(2)..=half_width.min(2) {
        let stored = samples.get(n).unwrap_or_default();
        worst_integer =
            worst_integer.max((shannon_reconstruct(&samples, n as f64) - stored).norm());
    }
    report.scalar("half_width", half_width);
    report.scalar("shift", shift);
    report.scalar("max_error", worst);
    report.table(table);
    report.below("max_reconstruction_error", worst, tol);
    report.at_most("integer_sample_error", worst_integer, 0.0);
    Ok(())
}

fn cantor_onb(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let tol = config.tol.unwrap_or(1e-12);
    let level = config.level.unwrap_or(setup::DEFAULT_CANTOR_LEVEL);
    let frequency = config.frequency.unwrap_or(2);
    let set = lambda4_enumerate(level)?;
    let members = set.members();
    let mut rows = Table::new(
        "orthonormality",
        &["lambda", "diagonal_deviation", "max_off_diagonal"],
    );
    let (mut worst_diag, mut worst_off) = (0.0f64, 0.0f64);
    for &a in members {
        let mut off = 0.0f64;
        let mut diag = 0.0f64;
        for &b in members {
            let v = cantor4_fourier(b as f64 - a as f64);
            if a == b {
                diag = (v - C64::new(1.0, 0.0)).norm();
            } else {
                off = off.max(v.norm());
            }
        }
        worst_diag = worst_diag.max(diag);
        worst_off = worst_off.max(off);
        rows.push(vec![json!(a), json!(diag), json!(off)]);
    }
    let mut parseval = Table::new("parseval", &["level", "defect"]);
    let defects = (2..=12)
        .map(|l| parseval_defect(frequency, l).map(|d| (l, d)))
        .collect::<Result<Vec<_>, _>>()?;
    for &(l, d) in &defects {
        parseval.push(vec![json!(l), json!(d)]);
    }
    let increase = defects
        .windows(2)
        .fold(0.0f64, |m, w| m.max(w[1].1 - w[0].1));
    let lowest = defects.iter().fold(f64::INFINITY, |m, &(_, d)| m.min(d));
    let highest = defects
        .iter()
        .fold(f64::NEG_INFINITY, |m, &(_, d)| m.max(d));
    let mu_hat_one = cantor4_fourier(1.0).norm();
    report.scalar("level", level);
    report.scalar("members", set.len());
    report.scalar("parseval_frequency", frequency);
    report.scalar("mu_hat_at_one", mu_hat_one);
    report.table(rows);
    report.table(parseval);
    report.below("max_off_diagonal", worst_off, tol);
    report.below("max_diagonal_deviation", worst_diag, tol);
    report.below("mu_hat_at_one", mu_hat_one, 1e-14);
    report.at_most("parseval_max_increase", increase, 0.0);
    report.at_least("parseval_min_defect", lowest, -1e-10);
    report.at_most("parseval_max_defect", highest, 1.0);
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    mu1: Vec<f64>,
    mu2: Vec<f64>,
    map: Vec<usize>,
}

fn read_map(path: &Path) -> CliResult<MapFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read map file {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("malformed map file {}: {e}", path.display())))
}

fn morphism(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let tol = config.tol.unwrap_or(1e-12);
    let trials = config.samples.unwrap_or(20);
    let layout = match &config.map {
        Some(path) => read_map(path)?,
        None => MapFile {
            mu1: vec![0.5; 2],
            mu2: vec![0.25; 4],
            map: vec![0, 1, 0, 1],
        },
    };
    let mu1 = AtomicMeasure::on_atoms(layout.mu1)?;
    let mu2 = AtomicMeasure::on_atoms(layout.mu2)?;
    let phi = MeasurableMap::new(layout.map, mu1.len())?;
    let verdict = morphism_check(&mu1, &mu2, &phi)?;
    let mut pushed = Table::new(
        "pushforward",
        &["atom", "mu1_mass", "pushed_mass", "abs_error"],
    );
    for (j, (m1, m2)) in mu1
        .weights()
        .iter()
        .zip(fiber_masses(&mu2, &phi)?)
        .enumerate()
    {
        pushed.push(vec![json!(j), json!(m1), json!(m2), json!((m1 - m2).abs())]);
    }
    report.scalar("domain_atoms", mu2.len());
    report.scalar("codomain_atoms", mu1.len());
    report.table(pushed);
    report.at_most(
        "pushforward_mass_error",
        verdict.max_mass_error,
        verdict.tolerance,
    );
    if !verdict.pass {
        return Ok(());
    }

    let kernel = match &config.kernel {
        None => {
            // no kernel given: random features over the codomain atoms
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            Kernel::explicit_feature(CMatrix::from_fn(3, mu1.len(), |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            }))
        }
        Some(descriptor) => setup::kernel(descriptor)?.kernel,
    };
    let ext1 = BoundaryExtension::feature_atoms(&kernel, mu1.weights())?;
    let ext2 = ext1.pullback(&phi)?;
    let Kernel::ExplicitFeature(features) = &kernel else {
        return Err(CliError::usage("morphism needs a features: kernel"));
    };
    let section = Section::new(&kernel, (0..features.nrows()).map(Point::Index).collect())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut diagram = Table::new("diagram", &["trial", "sup_defect", "w21_isometry_defect"]);
    let (mut sup, mut w21) = (0.0f64, 0.0f64);
    for t in 0..trials {
        let f = RkhsElement::from_slice(&section, &random_coeffs(&mut rng, section.len()))?;
        let d = commuting_diagram_defect(&f, &ext1, &ext2, &mu1, &mu2, &phi)?;
        sup = sup.max(d.sup_defect);
        w21 = w21.max(d.w21_isometry_defect);
        diagram.push(vec![
            json!(t),
            json!(d.sup_defect),
            json!(d.w21_isometry_defect),
        ]);
    }
    report.scalar("feature_rows", features.nrows());
    report.table(diagram);
    report.below("commuting_diagram_defect", sup, tol);
    report.below("w21_isometry_defect", w21, tol);
    Ok(())
}
