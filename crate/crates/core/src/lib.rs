//! Boundary spaces for positive definite kernels, at finite resolution.
//!
//! A positive definite kernel `K` on a set `S` is factorized through a
//! measure space `(B, mu)` when there is an extension `K^B : S × B -> C`
//! whose `L^2(mu)` inner products reproduce `K`. Any such factorization makes
//! `K(s, ·) -> K^B(s, ·)` an isometry from the reproducing kernel Hilbert
//! space into `L^2(mu)`, so the measure is Carleson with constant one.
//!
//! This crate checks those statements numerically on finite sections:
//!
//! * [`kernel`]: points, the kernel zoo (Szegő, Bargmann, truncated
//!   1/4-Cantor, sinc, explicit matrices), boundary extensions, sections and
//!   RKHS elements;
//! * [`measure`]: boundary measures as integrators, the Cantor measure and
//!   its Fourier transform, pushforwards;
//! * [`boundary`]: membership defects, isometry and adjoint checks, Carleson
//!   constants, least-squares projections and morphisms between finite
//!   boundaries;
//! * [`gaussian`]: the Gaussian process with covariance `K` on a section;
//! * [`reconstruct`]: Shannon interpolation and the `Lambda_4` exponential
//!   basis.

pub mod boundary;
pub mod error;
pub mod gaussian;
pub mod kernel;
pub mod linalg;
pub mod measure;
pub mod reconstruct;

pub use error::{Error, Result};
pub use kernel::{BoundaryExtension, BoundaryPoint, Kernel, Point, RkhsElement, Section};
pub use linalg::{CMatrix, CVector, C64};
pub use measure::{AtomicMeasure, MeasurableMap, QuadMeasure};
