//! Boundary measures realized as node/weight integrators.
//!
//! * circle: equispaced nodes, exact on trigonometric polynomials of degree
//!   below the node count;
//! * plane: tensor Gauss-Hermite rule for the standard complex Gaussian
//!   `(1/2pi) e^{-|x|^2/2} dA`;
//! * band: Gauss-Legendre on `[-1/2, 1/2]`;
//! * the 1/4-Cantor measure: `2^D` equal atoms at the left endpoints of the
//!   depth-`D` cylinders, plus the exact product formula for its Fourier
//!   transform;
//! * finite atomic measures and their pushforwards.
//!
//! Every measure carries a scale factor applied to all weights.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::BoundaryPoint;
use crate::linalg::{CompensatedSum, C64};

pub const CANTOR_MAX_DEPTH: u32 = 26;

const CHUNK: usize = 1 << 14;

/// A finite measure with strictly positive atom masses.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure {
    nodes: Vec<BoundaryPoint>,
    weights: Vec<f64>,
}

impl AtomicMeasure {
    pub fn new(nodes: Vec<BoundaryPoint>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                actual: weights.len(),
            });
        }
        if nodes.is_empty() {
            return Err(Error::InvalidArgument(
                "atomic measure needs at least one atom".into(),
            ));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "atom mass {w} is not positive"
            )));
        }
        Ok(Self { nodes, weights })
    }

    /// Masses `weights` on atoms labelled `Atom(0), Atom(1), ...`.
    pub fn on_atoms(weights: Vec<f64>) -> Result<Self> {
        let nodes = (0..weights.len()).map(BoundaryPoint::Atom).collect();
        Self::new(nodes, weights)
    }

    /// `n` atoms of mass `1/n`.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::on_atoms(vec![1.0 / n as f64; n])
    }

    pub fn nodes(&self) -> &[BoundaryPoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// A map between finite atomic spaces, `phi(b) = images[b]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurableMap {
    images: Vec<usize>,
    codomain: usize,
}

impl MeasurableMap {
    pub fn new(images: Vec<usize>, codomain: usize) -> Result<Self> {
        if let Some((atom, _)) = images.iter().enumerate().find(|(_, &i)| i >= codomain) {
            return Err(Error::MapNotTotal { atom, codomain });
        }
        Ok(Self { images, codomain })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
            codomain: n,
        }
    }

    pub fn image(&self, atom: usize) -> usize {
        self.images[atom]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn domain_len(&self) -> usize {
        self.images.len()
    }

    pub fn codomain_len(&self) -> usize {
        self.codomain
    }
}

/// Mass of each fiber `phi^{-1}(j)`, indexed by codomain atom.
pub fn fiber_masses(measure: &AtomicMeasure, map: &MeasurableMap) -> Result<Vec<f64>> {
    if map.domain_len() != measure.len() {
        let atom = map.domain_len().min(measure.len());
        return Err(Error::MapNotTotal {
            atom,
            codomain: map.codomain_len(),
        });
    }
    let mut masses = vec![0.0; map.codomain_len()];
    for (b, w) in measure.weights.iter().enumerate() {
        masses[map.image(b)] += w;
    }
    Ok(masses)
}

/// `mu ∘ phi^{-1}` on the atoms of the codomain that carry mass.
pub fn pushforward(measure: &AtomicMeasure, map: &MeasurableMap) -> Result<AtomicMeasure> {
    let masses = fiber_masses(measure, map)?;
    let (nodes, weights) = masses
        .into_iter()
        .enumerate()
        .filter(|(_, m)| *m > 0.0)
        .map(|(j, m)| (BoundaryPoint::Atom(j), m))
        .unzip();
    AtomicMeasure::new(nodes, weights)
}

#[derive(Clone, Debug, PartialEq)]
enum Rule {
    PeriodicUniform {
        nodes: usize,
    },
    GaussHermitePlane {
        per_axis: usize,
        rule: Arc<Vec<(f64, f64)>>,
    },
    GaussLegendreBand {
        rule: Arc<Vec<(f64, f64)>>,
    },
    Cantor {
        depth: u32,
    },
    Atomic(AtomicMeasure),
}

/// A boundary measure realized as an integrator.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadMeasure {
    rule: Rule,
    scale: f64,
}

impl QuadMeasure {
    /// Lebesgue measure on `[0, 1)` (the circle), `n` equispaced nodes.
    pub fn periodic_uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "periodic rule needs at least one node".into(),
            ));
        }
        Ok(Self::unscaled(Rule::PeriodicUniform { nodes: n }))
    }

    /// `(1/2pi) e^{-|x|^2/2} dA` on the plane, `n` Gauss-Hermite nodes per axis.
    pub fn gauss_hermite_plane(n: usize) -> Result<Self> {
        if n == 0 || n > 400 {
            return Err(Error::OutOfRange {
                what: "Gauss-Hermite nodes per axis",
                value: n as i64,
                min: 1,
                max: 400,
            });
        }
        let rule = gauss_hermite(n)
            .into_iter()
            .map(|(t, w)| (t * std::f64::consts::SQRT_2, w / PI.sqrt()))
            .collect();
        Ok(Self::unscaled(Rule::GaussHermitePlane {
            per_axis: n,
            rule: Arc::new(rule),
        }))
    }

    /// Lebesgue measure on the band `[-1/2, 1/2]`, `n` Gauss-Legendre nodes.
    pub fn gauss_legendre_band(n: usize) -> Result<Self> {
        if n == 0 || n > 4096 {
            return Err(Error::OutOfRange {
                what: "Gauss-Legendre nodes",
                value: n as i64,
                min: 1,
                max: 4096,
            });
        }
        let rule = gauss_legendre(n)
            .into_iter()
            .map(|(t, w)| (0.5 * t, 0.5 * w))
            .collect();
        Ok(Self::unscaled(Rule::GaussLegendreBand {
            rule: Arc::new(rule),
        }))
    }

    /// The 1/4-Cantor measure refined to depth `depth`.
    pub fn cantor(depth: u32) -> Result<Self> {
        if !(1..=CANTOR_MAX_DEPTH).contains(&depth) {
            return Err(Error::OutOfRange {
                what: "Cantor depth",
                value: depth as i64,
                min: 1,
                max: CANTOR_MAX_DEPTH as i64,
            });
        }
        Ok(Self::unscaled(Rule::Cantor { depth }))
    }

    pub fn atomic(measure: AtomicMeasure) -> Self {
        Self::unscaled(Rule::Atomic(measure))
    }

    fn unscaled(rule: Rule) -> Self {
        Self { rule, scale: 1.0 }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Depth when this is the Cantor measure.
    pub fn cantor_depth(&self) -> Option<u32> {
        match self.rule {
            Rule::Cantor { depth } => Some(depth),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        let base = match &self.rule {
            Rule::PeriodicUniform { nodes } => format!("uniform:{nodes}"),
            Rule::GaussHermitePlane { per_axis, .. } => format!("gauss-hermite:{per_axis}"),
            Rule::GaussLegendreBand { rule } => format!("band:{}", rule.len()),
            Rule::Cantor { depth } => format!("cantor:{depth}"),
            Rule::Atomic(a) => format!("atomic:{}", a.len()),
        };
        if self.scale == 1.0 {
            base
        } else {
            format!("{base}*{}", self.scale)
        }
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        match &self.rule {
            Rule::PeriodicUniform { nodes } => *nodes,
            Rule::GaussHermitePlane { rule, .. } => rule.len() * rule.len(),
            Rule::GaussLegendreBand { rule } => rule.len(),
            Rule::Cantor { depth } => 1usize << depth,
            Rule::Atomic(a) => a.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node `k` and its weight.
    pub fn node(&self, k: usize) -> (BoundaryPoint, f64) {
        let (b, w) = self.unscaled_node(k);
        (b, w * self.scale)
    }

    /// Node `k` and its weight before the scale factor is applied.
    pub fn unscaled_node(&self, k: usize) -> (BoundaryPoint, f64) {
        match &self.rule {
            Rule::PeriodicUniform { nodes } => (
                BoundaryPoint::Angle(k as f64 / *nodes as f64),
                1.0 / *nodes as f64,
            ),
            Rule::GaussHermitePlane { rule, .. } => {
                let n = rule.len();
                let (x, wx) = rule[k / n];
                let (y, wy) = rule[k % n];
                (BoundaryPoint::Plane(C64::new(x, y)), wx * wy)
            }
            Rule::GaussLegendreBand { rule } => (BoundaryPoint::Frequency(rule[k].0), rule[k].1),
            Rule::Cantor { depth } => {
                let d = *depth;
                let mut x = 0.0;
                let mut step = 0.25;
                for level in 0..d {
                    if (k >> (d - 1 - level)) & 1 == 1 {
                        x += 2.0 * step;
                    }
                    step *= 0.25;
                }
                (BoundaryPoint::Angle(x), 1.0 / (1u64 << d) as f64)
            }
            Rule::Atomic(a) => (a.nodes[k], a.weights[k]),
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = (BoundaryPoint, f64)> + '_ {
        (0..self.len()).map(move |k| self.node(k))
    }

    pub fn total_mass(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for (_, w) in self.nodes() {
            acc.add(C64::new(w, 0.0));
        }
        acc.total().re
    }

    /// Values of `f` at every node, in node order.
    pub fn sample<F>(&self, f: F) -> Result<Vec<C64>>
    where
        F: Fn(&BoundaryPoint) -> Result<C64> + Sync,
    {
        let n = self.len();
        let mut out = Vec::with_capacity(n);
        for start in (0..n).step_by(CHUNK) {
            let end = (start + CHUNK).min(n);
            let chunk: Result<Vec<C64>> = (start..end)
                .into_par_iter()
                .map(|k| f(&self.node(k).0))
                .collect();
            out.extend(chunk?);
        }
        Ok(out)
    }

    /// `sum_k w_k f(b_k)`, summed in node order with compensation.
    pub fn integrate<F>(&self, f: F) -> Result<C64>
    where
        F: Fn(&BoundaryPoint) -> Result<C64> + Sync,
    {
        let n = self.len();
        let mut acc = CompensatedSum::new();
        for start in (0..n).step_by(CHUNK) {
            let end = (start + CHUNK).min(n);
            let chunk: Result<Vec<C64>> = (start..end)
                .into_par_iter()
                .map(|k| {
                    let (b, w) = self.node(k);
                    f(&b).map(|v| v * w)
                })
                .collect();
            for v in chunk? {
                acc.add(v);
            }
        }
        Ok(acc.total())
    }

    /// `sum_k w_k F_k` for samples already taken at the nodes.
    pub fn integrate_samples(&self, samples: &[C64]) -> Result<C64> {
        if samples.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: samples.len(),
            });
        }
        let mut acc = CompensatedSum::new();
        for (k, v) in samples.iter().enumerate() {
            acc.add(v * self.node(k).1);
        }
        Ok(acc.total())
    }
}

/// Multiplies every weight by `alpha > 0`.
pub fn scale_measure(measure: &QuadMeasure, alpha: f64) -> Result<QuadMeasure> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "scale factor {alpha} must be positive"
        )));
    }
    Ok(QuadMeasure {
        rule: measure.rule.clone(),
        scale: measure.scale * alpha,
    })
}

/// Fourier transform of the 1/4-Cantor measure,
/// `int e^{i 2 pi t x} dmu(x) = prod_{j >= 0} (1 + e^{i pi t 4^{-j}}) / 2`.
///
/// Each factor is evaluated as `e^{i pi r/2} cos(pi r/2)` with
/// `r = t 4^{-j}` reduced exactly into `[-1, 1]`, so the factor at an odd
/// integer `r` is zero to rounding. Factors are taken until the remaining
/// tail perturbs the product by less than `1e-16`.
pub fn cantor4_fourier(t: f64) -> C64 {
    let mut product = C64::new(1.0, 0.0);
    let mut scaled = t;
    // tail of prod over j > J is within (pi |t| 4^{-J} / 2) * 4/3 of one
    while scaled != 0.0 && PI * scaled.abs() * (2.0 / 3.0) > 1e-17 {
        let r = scaled - 2.0 * (scaled * 0.5).round();
        let half = 0.5 * PI * r;
        let (s, c) = half.sin_cos();
        product *= C64::new(c, s) * half.cos();
        scaled *= 0.25;
    }
    product
}

/// Gauss-Hermite rule for `int e^{-t^2} g(t) dt`, ascending nodes.
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    const PIM4: f64 = 0.751_125_544_464_942_5; // pi^{-1/4}
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    let mut rule: Vec<(f64, f64)> = x.into_iter().zip(w).collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// Gauss-Legendre rule on `[-1, 1]`, ascending nodes.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = vec![(0.0, 0.0); n];
    let nf = n as f64;
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 1.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        rule[i] = (-z, w);
        rule[n - 1 - i] = (z, w);
    }
    rule
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::unit_exponential;
    use approx::assert_abs_diff_eq;

    fn one(_: &BoundaryPoint) -> Result<C64> {
        Ok(C64::new(1.0, 0.0))
    }

    fn angle(b: &BoundaryPoint) -> f64 {
        match b {
            BoundaryPoint::Angle(x) => *x,
            _ => panic!("expected an angle"),
        }
    }

    #[test]
    fn probability_measures_have_unit_mass() {
        for m in [
            QuadMeasure::periodic_uniform(8).unwrap(),
            QuadMeasure::gauss_hermite_plane(20).unwrap(),
            QuadMeasure::gauss_legendre_band(16).unwrap(),
            QuadMeasure::cantor(10).unwrap(),
        ] {
            assert_abs_diff_eq!(m.integrate(one).unwrap().re, 1.0, epsilon = 1e-13);
            assert_abs_diff_eq!(m.total_mass(), 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn periodic_rule_annihilates_low_frequencies() {
        let m = QuadMeasure::periodic_uniform(8).unwrap();
        for k in [1i32, -1, 3, 7, -7] {
            let v = m
                .integrate(|b| Ok(unit_exponential(k as f64 * angle(b))))
                .unwrap();
            assert!(v.norm() < 1e-15, "k = {k}: {v}");
        }
        let v = m
            .integrate(|b| Ok(unit_exponential(8.0 * angle(b))))
            .unwrap();
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn gauss_hermite_second_moment() {
        let m = QuadMeasure::gauss_hermite_plane(20).unwrap();
        let v = m
            .integrate(|b| match b {
                BoundaryPoint::Plane(z) => Ok(C64::new(z.norm_sqr(), 0.0)),
                _ => unreachable!(),
            })
            .unwrap();
        assert_abs_diff_eq!(v.re, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(5);
        let s: f64 = rule.iter().map(|(x, w)| w * x.powi(8)).sum();
        assert_abs_diff_eq!(s, 2.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn cantor_nodes_first_levels() {
        let m = QuadMeasure::cantor(1).unwrap();
        let nodes: Vec<_> = m.nodes().collect();
        assert_eq!(
            nodes,
            vec![
                (BoundaryPoint::Angle(0.0), 0.5),
                (BoundaryPoint::Angle(0.5), 0.5)
            ]
        );
        let m = QuadMeasure::cantor(2).unwrap();
        let xs: Vec<f64> = m.nodes().map(|(b, _)| angle(&b)).collect();
        assert_eq!(xs, vec![0.0, 0.125, 0.5, 0.625]);
        assert!(QuadMeasure::cantor(0).is_err());
        assert!(QuadMeasure::cantor(27).is_err());
    }

    #[test]
    fn cantor_fourier_values() {
        assert_eq!(cantor4_fourier(0.0), C64::new(1.0, 0.0));
        assert!(cantor4_fourier(1.0).norm() < 1e-15);
        assert!(cantor4_fourier(2.0).norm() > 0.1);
    }

    #[test]
    fn scaling() {
        let m = QuadMeasure::periodic_uniform(4).unwrap();
        assert_eq!(scale_measure(&m, 1.0).unwrap(), m);
        assert_abs_diff_eq!(
            scale_measure(&m, 2.0).unwrap().total_mass(),
            2.0,
            epsilon = 1e-15
        );
        assert!(scale_measure(&m, 0.0).is_err());
        assert!(scale_measure(&m, -1.0).is_err());
    }

    #[test]
    fn pushforward_examples() {
        let mu = AtomicMeasure::uniform(4).unwrap();
        assert_eq!(pushforward(&mu, &MeasurableMap::identity(4)).unwrap(), mu);

        let pair = MeasurableMap::new(vec![0, 0, 1, 1], 2).unwrap();
        let pushed = pushforward(&mu, &pair).unwrap();
        assert_eq!(pushed.weights(), &[0.5, 0.5]);

        let collapse = MeasurableMap::new(vec![0, 1, 1, 2], 3).unwrap();
        let pushed = pushforward(&mu, &collapse).unwrap();
        assert_eq!(pushed.weights(), &[0.25, 0.5, 0.25]);

        assert!(matches!(
            MeasurableMap::new(vec![0, 3], 2),
            Err(Error::MapNotTotal { atom: 1, .. })
        ));
        let short = MeasurableMap::new(vec![0, 1], 2).unwrap();
        assert!(matches!(
            pushforward(&mu, &short),
            Err(Error::MapNotTotal { .. })
        ));
    }
}
