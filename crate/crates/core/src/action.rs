//! The action functional over a symmetry class,
//!
//! ```text
//! f(z) = ∫₀ᵀ [ ½ z'² + Σᵢ mᵢ / √(rᵢ² + z²) ] dt,
//! ```
//!
//! its exact coefficient-space gradient, and Euler–Lagrange residuals.
//!
//! The potential has no singularity on the axis (`rᵢ > 0` keeps the
//! denominators above `rᵢ`), so no collision regularization is needed.
//! The gradient is the exact gradient of the discretized functional
//! (discretize-then-differentiate), which keeps descent directions
//! consistent for the optimizer.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::config::{CircularConfig, MassSystem};
use crate::error::{Error, Result};
use crate::loop_space::{basis_modes, default_grid_len, LoopZ, SymmetryClass};

/// Action of a loop, split into kinetic and potential parts, together
/// with the sup-norm Euler–Lagrange residual on the quadrature grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionReport {
    pub value: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub el_residual_sup: f64,
    pub grid_n: usize,
}

/// The action functional discretized on a fixed uniform grid, with
/// precomputed basis tables. Reused across evaluations by the
/// optimizer; the free functions below build one per call.
pub struct DiscretizedAction {
    masses: Vec<f64>,
    radii: Vec<f64>,
    grid_n: usize,
    weight: f64,
    /// `n × d` values of the basis functions at the grid nodes.
    phi: DMatrix<f64>,
    /// `n × d` values of the basis derivatives.
    dphi: DMatrix<f64>,
    /// Per-coefficient factor `-(2πk/T)²` for second derivatives.
    d2_factor: Vec<f64>,
}

impl DiscretizedAction {
    /// Builds the workspace for the given class and truncation order on
    /// an `n`-point uniform grid; `n` must resolve all modes.
    pub fn new(
        system: &MassSystem,
        config: &CircularConfig,
        class: SymmetryClass,
        order: usize,
        grid_n: usize,
    ) -> Result<Self> {
        let min = 2 * order + 2;
        if grid_n < min {
            return Err(Error::GridTooCoarse {
                n: grid_n,
                order,
                min,
            });
        }
        let period = system.period();
        let nu = std::f64::consts::TAU / period;
        let modes = basis_modes(class, order);
        let d = modes.len();
        let mut phi = DMatrix::zeros(grid_n, d);
        let mut dphi = DMatrix::zeros(grid_n, d);
        for j in 0..grid_n {
            let t = period * j as f64 / grid_n as f64;
            for (col, mode) in modes.iter().enumerate() {
                let k = mode.harmonic() as f64;
                let (s, c) = (nu * k * t).sin_cos();
                match mode {
                    crate::loop_space::BasisMode::Sin(_) => {
                        phi[(j, col)] = s;
                        dphi[(j, col)] = nu * k * c;
                    }
                    crate::loop_space::BasisMode::Cos(_) => {
                        phi[(j, col)] = c;
                        dphi[(j, col)] = -nu * k * s;
                    }
                }
            }
        }
        let d2_factor = modes
            .iter()
            .map(|mode| {
                let nu_k = nu * mode.harmonic() as f64;
                -nu_k * nu_k
            })
            .collect();
        Ok(Self {
            masses: system.masses().to_vec(),
            radii: config.radii.clone(),
            grid_n,
            weight: period / grid_n as f64,
            phi,
            dphi,
            d2_factor,
        })
    }

    pub fn grid_n(&self) -> usize {
        self.grid_n
    }

    pub fn dim(&self) -> usize {
        self.phi.ncols()
    }

    fn potential_at(&self, z: f64) -> f64 {
        self.masses
            .iter()
            .zip(&self.radii)
            .map(|(m, r)| m / (r * r + z * z).sqrt())
            .sum()
    }

    fn potential_dz(&self, z: f64) -> f64 {
        self.masses
            .iter()
            .zip(&self.radii)
            .map(|(m, r)| {
                let d2 = r * r + z * z;
                -m * z / (d2 * d2.sqrt())
            })
            .sum()
    }

    fn potential_dzz(&self, z: f64) -> f64 {
        self.masses
            .iter()
            .zip(&self.radii)
            .map(|(m, r)| {
                let d2 = r * r + z * z;
                m * (2.0 * z * z - r * r) / (d2 * d2 * d2.sqrt())
            })
            .sum()
    }

    /// Kinetic and potential parts of the discretized action.
    pub fn split_value(&self, coeffs: &DVector<f64>) -> (f64, f64) {
        let z = &self.phi * coeffs;
        let dz = &self.dphi * coeffs;
        let kinetic = 0.5 * self.weight * dz.dot(&dz);
        let potential = self.weight * z.iter().map(|&zj| self.potential_at(zj)).sum::<f64>();
        (kinetic, potential)
    }

    pub fn value(&self, coeffs: &DVector<f64>) -> f64 {
        let (k, p) = self.split_value(coeffs);
        k + p
    }

    /// Exact gradient of the discretized action.
    pub fn gradient(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        let z = &self.phi * coeffs;
        let dz = &self.dphi * coeffs;
        let force = DVector::from_iterator(z.len(), z.iter().map(|&zj| self.potential_dz(zj)));
        (self.dphi.tr_mul(&dz) + self.phi.tr_mul(&force)) * self.weight
    }

    pub fn value_and_gradient(&self, coeffs: &DVector<f64>) -> (f64, DVector<f64>) {
        (self.value(coeffs), self.gradient(coeffs))
    }

    /// Hessian of the discretized action,
    /// `w (Φ'ᵀΦ' + Φᵀ diag(U''(z)) Φ)`. Used by the Newton refinement.
    pub fn hessian(&self, coeffs: &DVector<f64>) -> DMatrix<f64> {
        let z = &self.phi * coeffs;
        let mut weighted = self.phi.clone();
        for (j, &zj) in z.iter().enumerate() {
            let u_zz = self.potential_dzz(zj);
            for c in 0..weighted.ncols() {
                weighted[(j, c)] *= u_zz;
            }
        }
        (self.dphi.transpose() * &self.dphi + self.phi.transpose() * weighted) * self.weight
    }

    /// Sup-norm over the grid of `z'' - U'(z)`, with `z''` from exact
    /// series differentiation.
    pub fn el_residual(&self, coeffs: &DVector<f64>) -> f64 {
        let z = &self.phi * coeffs;
        let d2_coeffs =
            DVector::from_iterator(coeffs.len(), coeffs.iter().zip(&self.d2_factor).map(|(c, f)| c * f));
        let zpp = &self.phi * d2_coeffs;
        z.iter()
            .zip(zpp.iter())
            .map(|(&zj, &zppj)| (zppj - self.potential_dz(zj)).abs())
            .fold(0.0f64, f64::max)
    }

    /// Sup-norm of `z` over the grid.
    pub fn sup_norm(&self, coeffs: &DVector<f64>) -> f64 {
        (&self.phi * coeffs)
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Full report at the given coefficients.
    pub fn report(&self, coeffs: &DVector<f64>) -> ActionReport {
        let (kinetic, potential) = self.split_value(coeffs);
        ActionReport {
            value: kinetic + potential,
            kinetic,
            potential,
            el_residual_sup: self.el_residual(coeffs),
            grid_n: self.grid_n,
        }
    }
}

fn check_period(loop_z: &LoopZ, system: &MassSystem) -> Result<()> {
    let lp = loop_z.period();
    let sp = system.period();
    if (lp - sp).abs() > 1e-12 * sp {
        return Err(Error::PeriodMismatch {
            loop_period: lp,
            system_period: sp,
        });
    }
    Ok(())
}

fn workspace_for(
    loop_z: &LoopZ,
    config: &CircularConfig,
    system: &MassSystem,
) -> Result<DiscretizedAction> {
    check_period(loop_z, system)?;
    DiscretizedAction::new(
        system,
        config,
        loop_z.class(),
        loop_z.order(),
        default_grid_len(loop_z.order()),
    )
}

/// Evaluates the action of a loop on the default quadrature grid.
pub fn action_value(
    loop_z: &LoopZ,
    config: &CircularConfig,
    system: &MassSystem,
) -> Result<ActionReport> {
    let ws = workspace_for(loop_z, config, system)?;
    Ok(ws.report(&DVector::from_column_slice(loop_z.coeffs())))
}

/// Gradient of the discretized action in coefficient space; same shape
/// as `loop_z.coeffs()`.
pub fn action_gradient(
    loop_z: &LoopZ,
    config: &CircularConfig,
    system: &MassSystem,
) -> Result<Vec<f64>> {
    let ws = workspace_for(loop_z, config, system)?;
    Ok(ws
        .gradient(&DVector::from_column_slice(loop_z.coeffs()))
        .iter()
        .cloned()
        .collect())
}

/// Sup-norm Euler–Lagrange residual of a loop on the default grid.
pub fn el_residual(loop_z: &LoopZ, config: &CircularConfig, system: &MassSystem) -> Result<f64> {
    let ws = workspace_for(loop_z, config, system)?;
    Ok(ws.el_residual(&DVector::from_column_slice(loop_z.coeffs())))
}
