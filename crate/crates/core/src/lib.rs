//! Vertical-axis dynamics of the circular restricted 3- and 4-body problems.
//!
//! Two or three primaries of arbitrary positive mass move on concentric
//! circular orbits about their common center of mass (collinear for two
//! bodies, equilateral for three). A massless body is constrained to the
//! axis through the center of mass perpendicular to the orbital plane,
//! where its height `z(t)` obeys
//!
//! ```text
//! z'' = -Σ_i  m_i z / (r_i² + z²)^{3/2}
//! ```
//!
//! with `r_i` the primary radii. The crate provides:
//!
//! - [`config`] — closed-form circular configurations (radii, side length,
//!   phase angles) and their validation against Newton's equations;
//! - [`loop_space`] — truncated trigonometric representations of periodic
//!   loops in the anti-half-period and odd symmetry classes;
//! - [`action`] — the action functional, its coefficient-space gradient,
//!   and Euler–Lagrange residuals;
//! - [`optimize`] — action minimization over a symmetry class, returning
//!   certified non-trivial minimizers;
//! - [`jacobi`] — second-variation analysis of the planar rest solution
//!   `z ≡ 0`: Jacobi fields, conjugate points, and a constructive
//!   non-minimality certificate;
//! - [`ode`] — an independent fixed-step integrator used to verify that
//!   minimizers are genuine periodic solutions.
//!
//! Units use a gravitational constant `G = 1` throughout.

pub mod action;
pub mod config;
mod error;
pub mod jacobi;
pub mod loop_space;
pub mod ode;
pub mod optimize;

pub use action::{action_gradient, action_value, el_residual, ActionReport, DiscretizedAction};
pub use config::{
    three_body_phases, three_body_radii, three_body_side, two_body_radii, validate_config,
    CircularConfig, MassSystem, ValidationReport,
};
pub use error::{Error, Result};
pub use jacobi::{
    broken_second_variation, broken_variation, conjugate_scan_along, first_conjugate_point,
    jacobi_field, jacobi_frequency, jacobi_report, nonminimality_certificate,
    second_variation_coeffs, BrokenVariation, JacobiField, JacobiReport,
    NonminimalityCertificate,
};
pub use loop_space::{
    project_symmetry, random_loop, FullFourier, LoopSamples, LoopZ, SymmetryClass,
};
pub use ode::{integrate, verify_periodicity, PeriodicityCheck, Trajectory};
pub use optimize::{minimize, MinimizeOptions, MinimizerReport, TracePoint};
