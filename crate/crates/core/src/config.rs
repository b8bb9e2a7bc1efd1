//! Circular configurations of the primaries.
//!
//! For two bodies the primaries sit on opposite sides of the center of
//! mass; for three bodies they occupy the vertices of an equilateral
//! triangle (the Lagrange relative equilibrium). Radii, side length and
//! phase angles follow from the masses and the period in closed form,
//! and [`validate_config`] checks the construction against Newton's
//! equations directly.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A problem instance: the primary masses and the common orbital period.
///
/// Gravitational constant `G = 1`; two or three primaries are supported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMassSystem")]
pub struct MassSystem {
    masses: Vec<f64>,
    period: f64,
}

#[derive(Deserialize)]
struct RawMassSystem {
    masses: Vec<f64>,
    period: f64,
}

impl TryFrom<RawMassSystem> for MassSystem {
    type Error = Error;
    fn try_from(raw: RawMassSystem) -> Result<Self> {
        MassSystem::new(raw.masses, raw.period)
    }
}

impl MassSystem {
    /// Builds a validated instance. Requires 2 or 3 strictly positive
    /// masses and a strictly positive period.
    pub fn new(masses: Vec<f64>, period: f64) -> Result<Self> {
        if masses.len() != 2 && masses.len() != 3 {
            return Err(Error::InvalidInstance(format!(
                "expected 2 or 3 primaries, got {}",
                masses.len()
            )));
        }
        if let Some(m) = masses.iter().find(|m| !m.is_finite() || **m <= 0.0) {
            return Err(Error::InvalidInstance(format!(
                "masses must be strictly positive, got {m}"
            )));
        }
        if !period.is_finite() || period <= 0.0 {
            return Err(Error::InvalidInstance(format!(
                "period must be strictly positive, got {period}"
            )));
        }
        Ok(Self { masses, period })
    }

    pub fn n_primaries(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }
}

/// Radii of the two-body circular orbits.
///
/// `r₁ = (T / 2π(m₁+m₂))^{2/3} m₂` and symmetrically for `r₂`, so that
/// `m₁ r₁ = m₂ r₂` places the center of mass at the origin.
pub fn two_body_radii(m1: f64, m2: f64, period: f64) -> Result<(f64, f64)> {
    let sys = MassSystem::new(vec![m1, m2], period)?;
    let factor = (sys.period / (TAU * (m1 + m2))).powf(2.0 / 3.0);
    Ok((factor * m2, factor * m1))
}

/// Side length of the equilateral three-body configuration,
/// `l = (M T² / 4π²)^{1/3}` with `M` the total mass.
pub fn three_body_side(masses: [f64; 3], period: f64) -> Result<f64> {
    let sys = MassSystem::new(masses.to_vec(), period)?;
    let total = sys.total_mass();
    Ok((total * period * period / (4.0 * PI * PI)).cbrt())
}

/// Radii of the three-body circular orbits:
/// `r₁ = l √(m₂² + m₂m₃ + m₃²) / M` and cyclic permutations.
pub fn three_body_radii(masses: [f64; 3], period: f64) -> Result<(f64, f64, f64)> {
    let side = three_body_side(masses, period)?;
    let [m1, m2, m3] = masses;
    let total = m1 + m2 + m3;
    let r1 = side * (m2 * m2 + m2 * m3 + m3 * m3).sqrt() / total;
    let r2 = side * (m1 * m1 + m1 * m3 + m3 * m3).sqrt() / total;
    let r3 = side * (m1 * m1 + m1 * m2 + m2 * m2).sqrt() / total;
    Ok((r1, r2, r3))
}

/// Initial coordinates of the three primaries in the center-of-mass
/// frame, on an equilateral triangle of side `l`. These are the
/// coordinates the phase angles are read off from.
fn three_body_coords(masses: [f64; 3], side: f64) -> [[f64; 2]; 3] {
    let [m1, m2, m3] = masses;
    let total = m1 + m2 + m3;
    let s = side / total;
    let h = 3f64.sqrt() / 2.0;
    [
        [h * (m2 + m3) * s, 0.5 * (m3 - m2) * s],
        [-h * m1 * s, (0.5 * m1 + m3) * s],
        [-h * m1 * s, -(0.5 * m1 + m2) * s],
    ]
}

/// Phase angles `θᵢ` of the three primaries at `t = 0`, in `[0, 2π)`.
///
/// Quadrants are resolved from the signed initial coordinates rather
/// than from `tan θᵢ` alone.
pub fn three_body_phases(masses: [f64; 3]) -> Result<(f64, f64, f64)> {
    // Any positive period yields the same angles; the side length cancels.
    MassSystem::new(masses.to_vec(), 1.0)?;
    let coords = three_body_coords(masses, 1.0);
    let angle = |p: [f64; 2]| -> f64 {
        let a = p[1].atan2(p[0]);
        if a < 0.0 {
            a + TAU
        } else {
            a
        }
    };
    Ok((angle(coords[0]), angle(coords[1]), angle(coords[2])))
}

/// Derived geometry of the circular primary orbits.
///
/// `side` and `phases` are present only for three primaries; the
/// two-body phases are fixed at `θ₁ = 0`, `θ₂ = π`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircularConfig {
    pub radii: Vec<f64>,
    pub side: Option<f64>,
    pub phases: Option<Vec<f64>>,
    pub total_mass: f64,
}

impl CircularConfig {
    /// Derives the configuration for a validated mass system.
    pub fn for_system(system: &MassSystem) -> Result<Self> {
        let m = system.masses();
        let period = system.period();
        match m.len() {
            2 => {
                let (r1, r2) = two_body_radii(m[0], m[1], period)?;
                Ok(Self {
                    radii: vec![r1, r2],
                    side: None,
                    phases: None,
                    total_mass: system.total_mass(),
                })
            }
            _ => {
                let masses = [m[0], m[1], m[2]];
                let (r1, r2, r3) = three_body_radii(masses, period)?;
                let (t1, t2, t3) = three_body_phases(masses)?;
                Ok(Self {
                    radii: vec![r1, r2, r3],
                    side: Some(three_body_side(masses, period)?),
                    phases: Some(vec![t1, t2, t3]),
                    total_mass: system.total_mass(),
                })
            }
        }
    }

    pub fn min_radius(&self) -> f64 {
        self.radii.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Planar positions of the primaries at time `t`.
    pub fn positions_at(&self, system: &MassSystem, t: f64) -> Vec<[f64; 2]> {
        let rot = TAU * t / system.period();
        match &self.phases {
            None => {
                let (s, c) = rot.sin_cos();
                vec![
                    [self.radii[0] * c, self.radii[0] * s],
                    [-self.radii[1] * c, -self.radii[1] * s],
                ]
            }
            Some(phases) => self
                .radii
                .iter()
                .zip(phases)
                .map(|(r, th)| {
                    let (s, c) = (rot + th).sin_cos();
                    [r * c, r * s]
                })
                .collect(),
        }
    }

    /// Potential felt on the vertical axis, `U(z) = Σ mᵢ / √(rᵢ² + z²)`.
    pub fn axial_potential(&self, system: &MassSystem, z: f64) -> f64 {
        system
            .masses()
            .iter()
            .zip(&self.radii)
            .map(|(m, r)| m / (r * r + z * z).sqrt())
            .sum()
    }

    /// Axial acceleration `z'' = U'(z) = -Σ mᵢ z / (rᵢ² + z²)^{3/2}`.
    pub fn axial_acceleration(&self, system: &MassSystem, z: f64) -> f64 {
        system
            .masses()
            .iter()
            .zip(&self.radii)
            .map(|(m, r)| {
                let d2 = r * r + z * z;
                -m * z / (d2 * d2.sqrt())
            })
            .sum()
    }

    /// Second derivative of the axial potential,
    /// `U''(z) = Σ mᵢ (2z² - rᵢ²) / (rᵢ² + z²)^{5/2}`.
    pub fn axial_hessian(&self, system: &MassSystem, z: f64) -> f64 {
        system
            .masses()
            .iter()
            .zip(&self.radii)
            .map(|(m, r)| {
                let d2 = r * r + z * z;
                m * (2.0 * z * z - r * r) / (d2 * d2 * d2.sqrt())
            })
            .sum()
    }
}

/// Residuals of a configuration against its defining equations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `|Σ mᵢ qᵢ(0)| / Σ mᵢ rᵢ`.
    pub center_of_mass_residual: f64,
    /// Max over pairs of `| |qᵢ-qⱼ| - l | / l`; three bodies only.
    pub pairwise_distance_residual: Option<f64>,
    /// Max over bodies and a time grid of the relative defect of the
    /// circular ansatz in Newton's equations,
    /// `|q̈ᵢ - Σⱼ mⱼ (qⱼ-qᵢ)/|qⱼ-qᵢ|³| / |q̈ᵢ|`.
    pub newton_residual: f64,
}

/// Checks a configuration against center-of-mass, equilateral-distance
/// and Newtonian relations. Returns residuals rather than failing.
pub fn validate_config(config: &CircularConfig, system: &MassSystem) -> ValidationReport {
    let masses = system.masses();
    let positions = config.positions_at(system, 0.0);

    let scale: f64 = masses
        .iter()
        .zip(&config.radii)
        .map(|(m, r)| m * r)
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    let (mut cx, mut cy) = (0.0, 0.0);
    for (m, p) in masses.iter().zip(&positions) {
        cx += m * p[0];
        cy += m * p[1];
    }
    let center_of_mass_residual = cx.hypot(cy) / scale;

    let pairwise_distance_residual = config.side.map(|side| {
        let mut worst = 0.0f64;
        for i in 0..positions.len() {
            for j in i + 1..positions.len() {
                let d = (positions[i][0] - positions[j][0])
                    .hypot(positions[i][1] - positions[j][1]);
                worst = worst.max((d - side).abs() / side);
            }
        }
        worst
    });

    // Newtonian residual of the rigid rotation: q̈ᵢ = -(2π/T)² qᵢ must
    // match the gravitational acceleration at every sampled time.
    let omega2 = (TAU / system.period()).powi(2);
    let mut newton_residual = 0.0f64;
    let time_samples = 16;
    for j in 0..time_samples {
        let t = system.period() * j as f64 / time_samples as f64;
        let q = config.positions_at(system, t);
        for i in 0..q.len() {
            let (mut ax, mut ay) = (0.0, 0.0);
            for k in 0..q.len() {
                if k == i {
                    continue;
                }
                let dx = q[k][0] - q[i][0];
                let dy = q[k][1] - q[i][1];
                let d = dx.hypot(dy);
                ax += masses[k] * dx / (d * d * d);
                ay += masses[k] * dy / (d * d * d);
            }
            let rx = -omega2 * q[i][0] - ax;
            let ry = -omega2 * q[i][1] - ay;
            let denom = (omega2 * q[i][0].hypot(q[i][1])).max(f64::MIN_POSITIVE);
            newton_residual = newton_residual.max(rx.hypot(ry) / denom);
        }
    }

    ValidationReport {
        center_of_mass_residual,
        pairwise_distance_residual,
        newton_residual,
    }
}
