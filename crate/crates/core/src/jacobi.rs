//! Second-variation analysis of the planar rest solution `z ≡ 0`.
//!
//! At `z ≡ 0` the second variation of the action is
//! `∫₀ᵀ (P h'² + Q h²) dt` with `P = ½` and `Q = -Σ mᵢ / 2rᵢ³`, whose
//! Euler equation is the constant-coefficient Jacobi equation
//! `h'' + ω² h = 0`, `ω² = -Q/P`. The Jacobi field with `h(0) = 0`,
//! `h'(0) = 1` first vanishes again at `c = π/ω`, and `c < T/2` holds
//! for every choice of positive masses. Gluing the field to zero at `c`
//! and reflecting it according to the symmetry class produces a broken
//! test variation in the class whose second variation vanishes, which
//! rules out `z ≡ 0` as a local minimizer; a strict descent direction
//! `ε sin(2πt/T)` witnesses the drop directly.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::action::action_value;
use crate::config::{CircularConfig, MassSystem};
use crate::error::{Error, Result};
use crate::loop_space::{LoopZ, SymmetryClass};

/// Coefficients `(P, Q)` of the second variation at `z ≡ 0`:
/// `P = ½`, `Q = -Σ mᵢ / 2rᵢ³`.
pub fn second_variation_coeffs(system: &MassSystem, config: &CircularConfig) -> (f64, f64) {
    let q: f64 = system
        .masses()
        .iter()
        .zip(&config.radii)
        .map(|(m, r)| -m / (2.0 * r * r * r))
        .sum();
    (0.5, q)
}

/// Jacobi frequency `ω = √(-Q/P)`.
pub fn jacobi_frequency(system: &MassSystem, config: &CircularConfig) -> f64 {
    let (p, q) = second_variation_coeffs(system, config);
    (-q / p).sqrt()
}

/// A numerically integrated Jacobi field on `[0, t_end]`, sampled at
/// uniform nodes with cubic Hermite evaluation in between.
#[derive(Debug, Clone)]
pub struct JacobiField {
    pub times: Vec<f64>,
    pub h: Vec<f64>,
    pub dh: Vec<f64>,
}

impl JacobiField {
    fn step(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// Cubic Hermite interpolation of `(h, h')` at `t` within the
    /// integrated span; clamps to the last node beyond it.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let dt = self.step();
        let idx = ((t / dt).floor() as usize).min(self.times.len() - 2);
        let s = (t - self.times[idx]) / dt;
        let (h0, h1) = (self.h[idx], self.h[idx + 1]);
        let (d0, d1) = (self.dh[idx] * dt, self.dh[idx + 1] * dt);
        let s2 = s * s;
        let s3 = s2 * s;
        let h = (2.0 * s3 - 3.0 * s2 + 1.0) * h0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * h1
            + (s3 - s2) * d1;
        let dh = ((6.0 * s2 - 6.0 * s) * h0
            + (3.0 * s2 - 4.0 * s + 1.0) * d0
            + (-6.0 * s2 + 6.0 * s) * h1
            + (3.0 * s2 - 2.0 * s) * d1)
            / dt;
        (h, dh)
    }
}

/// One classical 4th-order step of `h'' = coeff(t)·h`.
fn rk4_step(coeff: &impl Fn(f64) -> f64, t: f64, h: f64, dh: f64, dt: f64) -> (f64, f64) {
    let f = |t: f64, h: f64, dh: f64| (dh, coeff(t) * h);
    let (k1h, k1v) = f(t, h, dh);
    let (k2h, k2v) = f(t + 0.5 * dt, h + 0.5 * dt * k1h, dh + 0.5 * dt * k1v);
    let (k3h, k3v) = f(t + 0.5 * dt, h + 0.5 * dt * k2h, dh + 0.5 * dt * k2v);
    let (k4h, k4v) = f(t + dt, h + dt * k3h, dh + dt * k3v);
    (
        h + dt / 6.0 * (k1h + 2.0 * k2h + 2.0 * k3h + k4h),
        dh + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )
}

fn integrate_field(coeff: &impl Fn(f64) -> f64, t_end: f64, steps: usize) -> JacobiField {
    let dt = t_end / steps as f64;
    let mut times = Vec::with_capacity(steps + 1);
    let mut h_values = Vec::with_capacity(steps + 1);
    let mut dh_values = Vec::with_capacity(steps + 1);
    let (mut h, mut dh) = (0.0, 1.0);
    times.push(0.0);
    h_values.push(h);
    dh_values.push(dh);
    for j in 0..steps {
        let t = dt * j as f64;
        let (hn, dhn) = rk4_step(coeff, t, h, dh, dt);
        h = hn;
        dh = dhn;
        times.push(dt * (j + 1) as f64);
        h_values.push(h);
        dh_values.push(dh);
    }
    JacobiField {
        times,
        h: h_values,
        dh: dh_values,
    }
}

/// Step count resolving a field of frequency `omega` over `t_end`.
fn field_steps(t_end: f64, omega: f64, per_half_cycle: usize) -> usize {
    let half_cycles = (t_end * omega / std::f64::consts::PI).max(1.0);
    ((half_cycles * per_half_cycle as f64).ceil() as usize).clamp(per_half_cycle, 1 << 20)
}

/// Integrates the Jacobi field at `z ≡ 0` over `[0, t_end]`, `t_end ≤ T`,
/// with initial values `h(0) = 0`, `h'(0) = 1`.
pub fn jacobi_field(
    system: &MassSystem,
    config: &CircularConfig,
    t_end: f64,
) -> Result<JacobiField> {
    if !t_end.is_finite() || t_end <= 0.0 || t_end > system.period() * (1.0 + 1e-12) {
        return Err(Error::InvalidInstance(format!(
            "jacobi field span must lie in (0, T], got {t_end}"
        )));
    }
    let omega = jacobi_frequency(system, config);
    let (p, q) = second_variation_coeffs(system, config);
    let coeff = move |_t: f64| q / p; // = -ω²
    Ok(integrate_field(
        &coeff,
        t_end,
        field_steps(t_end, omega, 2048),
    ))
}

/// Refines a bracketed root of `h` by bisection; each probe takes a
/// single 4th-order step from the stored left node state.
fn bisect_root(
    coeff: &impl Fn(f64) -> f64,
    t_left: f64,
    h_left: f64,
    dh_left: f64,
    mut lo: f64,
    mut hi: f64,
) -> f64 {
    let probe = |t: f64| -> f64 {
        if t == t_left {
            return h_left;
        }
        rk4_step(coeff, t_left, h_left, dh_left, t - t_left).0
    };
    let mut f_lo = probe(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = probe(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_lo > 0.0) == (f_mid > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Scans an integrated field for roots in `(0, t_end)`.
fn field_roots(coeff: &impl Fn(f64) -> f64, field: &JacobiField) -> Vec<f64> {
    let mut roots = Vec::new();
    let t_end = *field.times.last().unwrap();
    for j in 1..field.times.len() - 1 {
        let (a, b) = (field.h[j], field.h[j + 1]);
        if a == 0.0 {
            roots.push(field.times[j]);
        } else if (a > 0.0) != (b > 0.0) {
            let root = bisect_root(
                coeff,
                field.times[j],
                field.h[j],
                field.dh[j],
                field.times[j],
                field.times[j + 1],
            );
            if root < t_end * (1.0 - 1e-12) {
                roots.push(root);
            }
        }
    }
    roots
}

/// First conjugate point of `z ≡ 0`: the first positive zero of the
/// Jacobi field, found by sign-change bracketing and bisection on the
/// numerical integration. Equals `π/ω` analytically.
pub fn first_conjugate_point(system: &MassSystem, config: &CircularConfig) -> Result<f64> {
    let omega = jacobi_frequency(system, config);
    let period = system.period();
    // The root sits at π/ω; a window slightly beyond it suffices and
    // keeps the step resolved for arbitrarily extreme masses.
    let window = (1.5 * std::f64::consts::PI / omega).min(period);
    let coeff = {
        let (p, q) = second_variation_coeffs(system, config);
        move |_t: f64| q / p
    };
    let field = integrate_field(&coeff, window, field_steps(window, omega, 4096));
    field_roots(&coeff, &field)
        .first()
        .copied()
        .ok_or(Error::NoConjugatePoint { span: window })
}

/// The broken test variation built from the Jacobi field on `[0, c]`,
/// extended by zero and reflected according to the symmetry class:
/// the anti-half-period case uses `-h(t - T/2)` on `(T/2, T/2 + c]`,
/// the odd case `-h(T - t)` on `(T - c, T]`.
#[derive(Debug, Clone)]
pub struct BrokenVariation {
    pub class: SymmetryClass,
    pub period: f64,
    pub conjugate_point: f64,
    field: JacobiField,
}

impl BrokenVariation {
    /// Kink locations (derivative discontinuities) within `[0, T)`.
    pub fn kinks(&self) -> Vec<f64> {
        let (t, c) = (self.period, self.conjugate_point);
        match self.class {
            SymmetryClass::AntiHalfPeriod => vec![0.0, c, 0.5 * t, 0.5 * t + c],
            SymmetryClass::Odd => vec![0.0, c, t - c],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let period = self.period;
        let c = self.conjugate_point;
        let tau = t.rem_euclid(period);
        match self.class {
            SymmetryClass::AntiHalfPeriod => {
                if tau <= c {
                    self.field.eval(tau).0
                } else if tau > 0.5 * period && tau <= 0.5 * period + c {
                    -self.field.eval(tau - 0.5 * period).0
                } else {
                    0.0
                }
            }
            SymmetryClass::Odd => {
                if tau <= c {
                    self.field.eval(tau).0
                } else if tau > period - c {
                    -self.field.eval(period - tau).0
                } else {
                    0.0
                }
            }
        }
    }

    /// Max violation of the class membership identity over `n` nodes.
    pub fn membership_residual(&self, n: usize) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..n {
            let t = self.period * j as f64 / n as f64;
            let mirrored = match self.class {
                SymmetryClass::AntiHalfPeriod => self.eval(t + 0.5 * self.period),
                SymmetryClass::Odd => self.eval(-t),
            };
            worst = worst.max((mirrored + self.eval(t)).abs());
        }
        worst
    }
}

impl Serialize for BrokenVariation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("BrokenVariation", 4)?;
        s.serialize_field("class", &self.class)?;
        s.serialize_field("period", &self.period)?;
        s.serialize_field("conjugate_point", &self.conjugate_point)?;
        s.serialize_field("kinks", &self.kinks())?;
        s.end()
    }
}

fn broken_variation_with_steps(
    system: &MassSystem,
    config: &CircularConfig,
    class: SymmetryClass,
    steps: usize,
) -> Result<(BrokenVariation, f64)> {
    let c = first_conjugate_point(system, config)?;
    let period = system.period();
    if c >= 0.5 * period {
        return Err(Error::CertificateUnavailable(format!(
            "first conjugate point {c} does not precede T/2 = {}",
            0.5 * period
        )));
    }
    let (p, q) = second_variation_coeffs(system, config);
    let coeff = move |_t: f64| q / p;
    let field = integrate_field(&coeff, c, steps);

    // ∫₀ᵀ (P h'² + Q h²) dt over the broken variation: the two nonzero
    // pieces contribute identically, and each smooth piece is
    // integrated by trapezoid on the integration nodes themselves so
    // nothing is smeared across the kinks. The analytic value is 0.
    let dt = c / steps as f64;
    let mut acc = 0.0;
    for j in 0..=steps {
        let integrand = p * field.dh[j] * field.dh[j] + q * field.h[j] * field.h[j];
        let w = if j == 0 || j == steps { 0.5 } else { 1.0 };
        acc += w * integrand;
    }
    let second_variation = 2.0 * acc * dt;

    Ok((
        BrokenVariation {
            class,
            period,
            conjugate_point: c,
            field,
        },
        second_variation,
    ))
}

/// Default per-piece quadrature resolution for the broken variation.
const BROKEN_PIECE_STEPS: usize = 2048;

/// Builds the broken test variation for a class.
pub fn broken_variation(
    system: &MassSystem,
    config: &CircularConfig,
    class: SymmetryClass,
) -> Result<BrokenVariation> {
    broken_variation_with_steps(system, config, class, BROKEN_PIECE_STEPS).map(|(b, _)| b)
}

/// Second variation of the broken test variation, with `steps` trapezoid
/// nodes per smooth piece. Converges to the analytic value 0 as the
/// grid refines.
pub fn broken_second_variation(
    system: &MassSystem,
    config: &CircularConfig,
    class: SymmetryClass,
    steps: usize,
) -> Result<f64> {
    broken_variation_with_steps(system, config, class, steps).map(|(_, v)| v)
}

/// The constructive evidence that `z ≡ 0` is not a local minimizer on
/// the class: the broken variation with (numerically) vanishing second
/// variation, plus a strict descent witness `f(ε sin) < f(0)`.
#[derive(Debug, Clone, Serialize)]
pub struct NonminimalityCertificate {
    pub class: SymmetryClass,
    pub test_variation: BrokenVariation,
    pub second_variation_value: f64,
    pub descent_epsilon: f64,
    /// `f(ε sin(2πt/T)) - f(0)`; strictly negative.
    pub f_drop: f64,
}

/// Builds the certificate for a class. Requires `c < T/2`, which holds
/// for all positive masses.
pub fn nonminimality_certificate(
    system: &MassSystem,
    config: &CircularConfig,
    class: SymmetryClass,
) -> Result<NonminimalityCertificate> {
    let (test_variation, second_variation_value) =
        broken_variation_with_steps(system, config, class, BROKEN_PIECE_STEPS)?;

    // A certificate must certify: the broken variation has to sit in
    // its class and the quadrature of its second variation has to
    // vanish to tolerance.
    let residual = test_variation.membership_residual(256);
    if residual > 1e-13 {
        return Err(Error::CertificateUnavailable(format!(
            "broken variation violates its symmetry class (residual {residual:.2e})"
        )));
    }
    if second_variation_value.abs() > 1e-6 {
        return Err(Error::CertificateUnavailable(format!(
            "second variation of the broken variation did not vanish ({second_variation_value:.2e})"
        )));
    }

    let epsilon = 0.1 * config.min_radius();
    let direction = match class {
        SymmetryClass::AntiHalfPeriod => {
            LoopZ::new(system.period(), class, 1, vec![epsilon, 0.0])?
        }
        SymmetryClass::Odd => LoopZ::new(system.period(), class, 1, vec![epsilon])?,
    };
    let perturbed = action_value(&direction, config, system)?.value;
    let rest = action_value(&LoopZ::zero(system.period(), class, 1)?, config, system)?.value;
    if perturbed >= rest {
        return Err(Error::CertificateUnavailable(format!(
            "descent direction failed to lower the action ({perturbed} >= {rest})"
        )));
    }

    Ok(NonminimalityCertificate {
        class,
        test_variation,
        second_variation_value,
        descent_epsilon: epsilon,
        f_drop: perturbed - rest,
    })
}

/// Conjugate points along an arbitrary near-critical loop: zeros in
/// `(0, T)` of the Jacobi field of the time-dependent equation
/// `h'' = U''(z(t)) h`. An empty list is consistent with the loop
/// being a local minimizer.
pub fn conjugate_scan_along(
    loop_z: &LoopZ,
    system: &MassSystem,
    config: &CircularConfig,
) -> Result<Vec<f64>> {
    let residual = crate::action::el_residual(loop_z, config, system)?;
    if residual > 1e-5 {
        return Err(Error::InvalidInstance(format!(
            "conjugate scan needs a near-critical loop (EL residual {residual:.2e} > 1e-5)"
        )));
    }
    let omega0 = jacobi_frequency(system, config);
    let period = system.period();
    // |U''(z)| is maximized at z = 0, so ω₀ bounds the field frequency.
    let steps = field_steps(period, omega0, 1024);
    let loop_clone = loop_z.clone();
    let system_clone = system.clone();
    let config_clone = config.clone();
    let coeff = move |t: f64| {
        let (z, _) = loop_clone.evaluate(t);
        config_clone.axial_hessian(&system_clone, z)
    };
    let field = integrate_field(&coeff, period, steps);
    Ok(field_roots(&coeff, &field))
}

/// Full second-variation report for one symmetry class.
#[derive(Debug, Clone, Serialize)]
pub struct JacobiReport {
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub omega: f64,
    /// Numerically located first conjugate point.
    pub conjugate_point_c: f64,
    /// Analytic value `π/ω`.
    pub c_analytic: f64,
    /// `T/(2c) - 1`; strictly positive for all positive masses.
    pub inequality_margin: f64,
    pub certificate: NonminimalityCertificate,
}

/// Assembles the report: second-variation coefficients, conjugate
/// point, inequality margin and the class certificate.
pub fn jacobi_report(
    system: &MassSystem,
    config: &CircularConfig,
    class: SymmetryClass,
) -> Result<JacobiReport> {
    let (p, q) = second_variation_coeffs(system, config);
    let omega = jacobi_frequency(system, config);
    let c = first_conjugate_point(system, config)?;
    let certificate = nonminimality_certificate(system, config, class)?;
    Ok(JacobiReport {
        p,
        q,
        omega,
        conjugate_point_c: c,
        c_analytic: std::f64::consts::PI / omega,
        inequality_margin: system.period() / (2.0 * c) - 1.0,
        certificate,
    })
}
