//! Periodic loops `z(t)` in the two symmetry classes, represented by
//! truncated trigonometric series.
//!
//! The anti-half-period class (`z(t + T/2) = -z(t)`) is spanned by the
//! odd harmonics `sin(2πkt/T)`, `cos(2πkt/T)` with `k` odd; the odd
//! class (`z(-t) = -z(t)`) by the sine modes alone. Both restrictions
//! are exact basis restrictions, so every represented loop satisfies
//! its membership test identically and has zero mean.

use std::f64::consts::TAU;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetry class of a loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryClass {
    /// `z(t + T/2) = -z(t)`; odd harmonics, sine and cosine.
    #[serde(rename = "anti-half")]
    AntiHalfPeriod,
    /// `z(-t) = -z(t)`; sine modes only.
    #[serde(rename = "odd")]
    Odd,
}

impl SymmetryClass {
    /// Harmonic indices admitted at truncation order `order`.
    pub fn harmonics(self, order: usize) -> Vec<usize> {
        match self {
            SymmetryClass::AntiHalfPeriod => (1..=order).step_by(2).collect(),
            SymmetryClass::Odd => (1..=order).collect(),
        }
    }

    /// Number of real coefficients at truncation order `order`.
    pub fn coeff_len(self, order: usize) -> usize {
        match self {
            SymmetryClass::AntiHalfPeriod => 2 * self.harmonics(order).len(),
            SymmetryClass::Odd => order,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SymmetryClass::AntiHalfPeriod => "anti-half",
            SymmetryClass::Odd => "odd",
        }
    }
}

impl std::str::FromStr for SymmetryClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "anti-half" => Ok(SymmetryClass::AntiHalfPeriod),
            "odd" => Ok(SymmetryClass::Odd),
            other => Err(Error::InvalidInstance(format!(
                "unknown symmetry class {other:?} (expected \"anti-half\" or \"odd\")"
            ))),
        }
    }
}

/// One basis function: `sin(2πkt/T)` or `cos(2πkt/T)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BasisMode {
    Sin(usize),
    Cos(usize),
}

impl BasisMode {
    pub(crate) fn harmonic(self) -> usize {
        match self {
            BasisMode::Sin(k) | BasisMode::Cos(k) => k,
        }
    }

    fn eval(self, angle: f64) -> f64 {
        match self {
            BasisMode::Sin(_) => angle.sin(),
            BasisMode::Cos(_) => angle.cos(),
        }
    }

    fn eval_derivative(self, angle: f64, nu_k: f64) -> f64 {
        match self {
            BasisMode::Sin(_) => nu_k * angle.cos(),
            BasisMode::Cos(_) => -nu_k * angle.sin(),
        }
    }
}

/// Basis functions in coefficient order.
///
/// Odd class: `[Sin(1), Sin(2), …, Sin(K)]`. Anti-half-period class:
/// `[Sin(1), Cos(1), Sin(3), Cos(3), …]` over the odd harmonics `≤ K`.
pub(crate) fn basis_modes(class: SymmetryClass, order: usize) -> Vec<BasisMode> {
    match class {
        SymmetryClass::Odd => (1..=order).map(BasisMode::Sin).collect(),
        SymmetryClass::AntiHalfPeriod => class
            .harmonics(order)
            .into_iter()
            .flat_map(|k| [BasisMode::Sin(k), BasisMode::Cos(k)])
            .collect(),
    }
}

/// A `T`-periodic loop in a declared symmetry class.
///
/// Coefficient layout: the odd class stores the sine coefficients for
/// harmonics `1..=K`; the anti-half-period class stores interleaved
/// `[sin, cos]` pairs over the odd harmonics `<= K`. Serialized form
/// is `{"period", "class", "K", "coeffs"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLoop")]
pub struct LoopZ {
    period: f64,
    class: SymmetryClass,
    #[serde(rename = "K")]
    order: usize,
    coeffs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawLoop {
    period: f64,
    class: SymmetryClass,
    #[serde(rename = "K")]
    order: usize,
    coeffs: Vec<f64>,
}

impl TryFrom<RawLoop> for LoopZ {
    type Error = Error;
    fn try_from(raw: RawLoop) -> Result<Self> {
        LoopZ::new(raw.period, raw.class, raw.order, raw.coeffs)
    }
}

impl LoopZ {
    pub fn new(period: f64, class: SymmetryClass, order: usize, coeffs: Vec<f64>) -> Result<Self> {
        if !period.is_finite() || period <= 0.0 {
            return Err(Error::InvalidInstance(format!(
                "loop period must be strictly positive, got {period}"
            )));
        }
        if order == 0 {
            return Err(Error::InvalidInstance(
                "truncation order must be at least 1".into(),
            ));
        }
        let expected = class.coeff_len(order);
        if coeffs.len() != expected {
            return Err(Error::InvalidInstance(format!(
                "{} loop of order {order} needs {expected} coefficients, got {}",
                class.label(),
                coeffs.len()
            )));
        }
        Ok(Self {
            period,
            class,
            order,
            coeffs,
        })
    }

    pub fn zero(period: f64, class: SymmetryClass, order: usize) -> Result<Self> {
        let len = class.coeff_len(order);
        Self::new(period, class, order, vec![0.0; len])
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn class(&self) -> SymmetryClass {
        self.class
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Replaces the coefficient vector, keeping class and order.
    pub fn with_coeffs(&self, coeffs: Vec<f64>) -> Result<Self> {
        Self::new(self.period, self.class, self.order, coeffs)
    }

    /// Evaluates `(z(t), z'(t))` by exact series summation.
    pub fn evaluate(&self, t: f64) -> (f64, f64) {
        let nu = TAU / self.period;
        let mut z = 0.0;
        let mut dz = 0.0;
        for (mode, c) in basis_modes(self.class, self.order).iter().zip(&self.coeffs) {
            let k = mode.harmonic() as f64;
            let angle = nu * k * t;
            z += c * mode.eval(angle);
            dz += c * mode.eval_derivative(angle, nu * k);
        }
        (z, dz)
    }

    /// Evaluates `z''(t)`; each mode picks up `-(2πk/T)²`.
    pub fn second_derivative(&self, t: f64) -> f64 {
        let nu = TAU / self.period;
        let mut acc = 0.0;
        for (mode, c) in basis_modes(self.class, self.order).iter().zip(&self.coeffs) {
            let k = mode.harmonic() as f64;
            let nu_k = nu * k;
            acc += -nu_k * nu_k * c * mode.eval(nu_k * t);
        }
        acc
    }

    /// Samples `z` and `z'` at the uniform nodes `t_j = jT/n`.
    ///
    /// Requires `n >= 2K + 2` so that every admitted mode is resolved.
    pub fn sample_grid(&self, n: usize) -> Result<LoopSamples> {
        let min = 2 * self.order + 2;
        if n < min {
            return Err(Error::GridTooCoarse {
                n,
                order: self.order,
                min,
            });
        }
        let mut times = Vec::with_capacity(n);
        let mut z = Vec::with_capacity(n);
        let mut dz = Vec::with_capacity(n);
        for j in 0..n {
            let t = self.period * j as f64 / n as f64;
            let (zj, dzj) = self.evaluate(t);
            times.push(t);
            z.push(zj);
            dz.push(dzj);
        }
        Ok(LoopSamples { times, z, dz })
    }

    /// Default quadrature grid size for this loop, `max(256, 8K)`.
    pub fn default_grid_len(&self) -> usize {
        default_grid_len(self.order)
    }

    /// Sup-norm of `z` over the default grid.
    pub fn sup_norm(&self) -> f64 {
        let samples = self
            .sample_grid(self.default_grid_len())
            .expect("default grid resolves all modes");
        samples.z.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Max violation of the class membership identity over `n` nodes.
    pub fn membership_residual(&self, n: usize) -> f64 {
        let half = self.period / 2.0;
        let mut worst = 0.0f64;
        for j in 0..n {
            let t = self.period * j as f64 / n as f64;
            let (z, _) = self.evaluate(t);
            let mirrored = match self.class {
                SymmetryClass::AntiHalfPeriod => self.evaluate(t + half).0,
                SymmetryClass::Odd => self.evaluate(-t).0,
            };
            worst = worst.max((mirrored + z).abs());
        }
        worst
    }

    /// Expands into an unrestricted Fourier series of the same order.
    pub fn to_fourier(&self) -> FullFourier {
        let mut cos = vec![0.0; self.order];
        let mut sin = vec![0.0; self.order];
        for (mode, c) in basis_modes(self.class, self.order).iter().zip(&self.coeffs) {
            match mode {
                BasisMode::Sin(k) => sin[k - 1] += c,
                BasisMode::Cos(k) => cos[k - 1] += c,
            }
        }
        FullFourier {
            period: self.period,
            mean: 0.0,
            cos,
            sin,
        }
    }

    /// Closed-form `∫₀ᵀ z'² dt = (T/2) Σ (2πk/T)² cₖ²`, used by the
    /// Parseval consistency checks.
    pub fn derivative_norm_sq(&self) -> f64 {
        let nu = TAU / self.period;
        basis_modes(self.class, self.order)
            .iter()
            .zip(&self.coeffs)
            .map(|(mode, c)| {
                let nu_k = nu * mode.harmonic() as f64;
                0.5 * self.period * nu_k * nu_k * c * c
            })
            .sum()
    }
}

/// Uniform samples of a loop and its derivative.
#[derive(Debug, Clone, Serialize)]
pub struct LoopSamples {
    pub times: Vec<f64>,
    pub z: Vec<f64>,
    pub dz: Vec<f64>,
}

/// An unrestricted truncated Fourier series
/// `mean + Σₖ (cos[k-1] cos(2πkt/T) + sin[k-1] sin(2πkt/T))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullFourier {
    pub period: f64,
    pub mean: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FullFourier {
    pub fn evaluate(&self, t: f64) -> f64 {
        let nu = TAU / self.period;
        let mut z = self.mean;
        for (i, c) in self.cos.iter().enumerate() {
            z += c * (nu * (i + 1) as f64 * t).cos();
        }
        for (i, s) in self.sin.iter().enumerate() {
            z += s * (nu * (i + 1) as f64 * t).sin();
        }
        z
    }
}

/// Restricts a full Fourier series to a symmetry class by dropping
/// every mode outside the class basis. Idempotent by construction.
pub fn project_symmetry(raw: &FullFourier, class: SymmetryClass) -> Result<LoopZ> {
    let order = raw.cos.len().max(raw.sin.len()).max(1);
    let coeffs = basis_modes(class, order)
        .iter()
        .map(|mode| match mode {
            BasisMode::Sin(k) => raw.sin.get(k - 1).copied().unwrap_or(0.0),
            BasisMode::Cos(k) => raw.cos.get(k - 1).copied().unwrap_or(0.0),
        })
        .collect();
    LoopZ::new(raw.period, class, order, coeffs)
}

/// Default quadrature grid size for truncation order `order`.
pub fn default_grid_len(order: usize) -> usize {
    (8 * order).max(256)
}

/// Draws a seeded random loop with per-harmonic amplitude at most
/// `amplitude`, so the sup-norm is bounded by `amplitude · K`.
pub fn random_loop(
    period: f64,
    class: SymmetryClass,
    order: usize,
    amplitude: f64,
    seed: u64,
) -> Result<LoopZ> {
    if !amplitude.is_finite() || amplitude <= 0.0 {
        return Err(Error::InvalidInstance(format!(
            "amplitude must be strictly positive, got {amplitude}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = match class {
        SymmetryClass::Odd => (0..order)
            .map(|_| rng.gen_range(-amplitude..=amplitude))
            .collect(),
        SymmetryClass::AntiHalfPeriod => {
            let mut coeffs = Vec::with_capacity(class.coeff_len(order));
            for _ in class.harmonics(order) {
                // Draw each (sin, cos) pair inside the disk of radius
                // `amplitude` so the harmonic's amplitude is bounded.
                let radius = amplitude * rng.gen_range(0.0..=1.0f64);
                let angle = rng.gen_range(0.0..TAU);
                coeffs.push(radius * angle.sin());
                coeffs.push(radius * angle.cos());
            }
            coeffs
        }
    };
    LoopZ::new(period, class, order, coeffs)
}

/// Trapezoid quadrature of uniformly sampled values of a `T`-periodic
/// integrand (the wrap-around makes it the plain mean times `T`).
pub fn trapezoid_periodic(values: &[f64], period: f64) -> f64 {
    period * values.iter().sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const T: f64 = TAU;

    fn single_sine(amplitude: f64) -> LoopZ {
        let mut coeffs = vec![0.0; 4];
        coeffs[0] = amplitude;
        LoopZ::new(T, SymmetryClass::Odd, 4, coeffs).unwrap()
    }

    #[test]
    fn zero_loop_evaluates_to_zero() {
        let z = LoopZ::zero(T, SymmetryClass::AntiHalfPeriod, 8).unwrap();
        for j in 0..10 {
            let (v, dv) = z.evaluate(j as f64 * 0.37);
            assert_eq!(v, 0.0);
            assert_eq!(dv, 0.0);
        }
    }

    #[test]
    fn single_mode_calculus() {
        let a = 0.7;
        let loop_z = single_sine(a);
        let (z, _) = loop_z.evaluate(T / 4.0);
        assert_relative_eq!(z, a, max_relative = 1e-14);
        let (_, dz) = loop_z.evaluate(0.0);
        assert_relative_eq!(dz, TAU * a / T, max_relative = 1e-14);
        assert_relative_eq!(loop_z.second_derivative(T / 4.0), -a, max_relative = 1e-13);
    }

    #[test]
    fn coefficient_layouts() {
        assert_eq!(SymmetryClass::Odd.coeff_len(32), 32);
        assert_eq!(SymmetryClass::AntiHalfPeriod.coeff_len(32), 32);
        assert_eq!(SymmetryClass::AntiHalfPeriod.coeff_len(5), 6);
        assert_eq!(SymmetryClass::AntiHalfPeriod.harmonics(7), vec![1, 3, 5, 7]);
        assert!(LoopZ::new(T, SymmetryClass::Odd, 4, vec![0.0; 3]).is_err());
        assert!(LoopZ::new(T, SymmetryClass::Odd, 0, vec![]).is_err());
        assert!(LoopZ::new(-1.0, SymmetryClass::Odd, 2, vec![0.0; 2]).is_err());
    }

    #[test]
    fn sample_grid_matches_pointwise_evaluation() {
        let loop_z = random_loop(T, SymmetryClass::AntiHalfPeriod, 7, 0.3, 11).unwrap();
        let samples = loop_z.sample_grid(64).unwrap();
        for (j, &t) in samples.times.iter().enumerate() {
            let (z, dz) = loop_z.evaluate(t);
            assert!((samples.z[j] - z).abs() < 1e-13);
            assert!((samples.dz[j] - dz).abs() < 1e-13);
        }
    }

    #[test]
    fn sample_grid_rejects_aliasing() {
        let loop_z = LoopZ::zero(T, SymmetryClass::Odd, 8).unwrap();
        assert!(matches!(
            loop_z.sample_grid(16),
            Err(Error::GridTooCoarse { .. })
        ));
        assert!(loop_z.sample_grid(18).is_ok());
    }

    #[test]
    fn projection_is_idempotent_and_kills_foreign_modes() {
        let raw = FullFourier {
            period: T,
            mean: 0.4,
            cos: vec![0.1, 0.2, 0.3, 0.4],
            sin: vec![1.0, 2.0, 3.0, 4.0],
        };
        let anti = project_symmetry(&raw, SymmetryClass::AntiHalfPeriod).unwrap();
        assert_eq!(anti.coeffs(), &[1.0, 0.1, 3.0, 0.3]);
        let again = project_symmetry(&anti.to_fourier(), SymmetryClass::AntiHalfPeriod).unwrap();
        assert_eq!(anti.coeffs(), again.coeffs());

        // Even harmonics only: nothing survives the anti-half projection.
        let even = FullFourier {
            period: T,
            mean: 0.0,
            cos: vec![0.0, 0.5, 0.0, 0.25],
            sin: vec![0.0, 1.5, 0.0, 2.5],
        };
        let projected = project_symmetry(&even, SymmetryClass::AntiHalfPeriod).unwrap();
        assert!(projected.coeffs().iter().all(|c| *c == 0.0));

        // Cosine modes vanish under the odd projection.
        let cosines = FullFourier {
            period: T,
            mean: 0.0,
            cos: vec![1.0, 2.0, 3.0],
            sin: vec![0.0, 0.0, 0.0],
        };
        let projected = project_symmetry(&cosines, SymmetryClass::Odd).unwrap();
        assert!(projected.coeffs().iter().all(|c| *c == 0.0));
    }

    #[test]
    fn random_loop_is_deterministic_and_in_class() {
        for class in [SymmetryClass::AntiHalfPeriod, SymmetryClass::Odd] {
            let a = random_loop(T, class, 16, 0.25, 42).unwrap();
            let b = random_loop(T, class, 16, 0.25, 42).unwrap();
            assert_eq!(a.coeffs(), b.coeffs());
            let c = random_loop(T, class, 16, 0.25, 43).unwrap();
            assert_ne!(a.coeffs(), c.coeffs());
            assert!(a.membership_residual(100) < 1e-13);
        }
        assert!(random_loop(T, SymmetryClass::Odd, 4, 0.0, 1).is_err());
    }

    #[test]
    fn serde_round_trip_uses_spec_field_names() {
        let loop_z = random_loop(T, SymmetryClass::Odd, 3, 0.5, 9).unwrap();
        let json = serde_json::to_string(&loop_z).unwrap();
        assert!(json.contains("\"K\":3"), "{json}");
        assert!(json.contains("\"class\":\"odd\""), "{json}");
        let back: LoopZ = serde_json::from_str(&json).unwrap();
        assert_eq!(back, loop_z);
        // Wrong coefficient count must fail validation on the way in.
        assert!(serde_json::from_str::<LoopZ>(
            r#"{"period":6.0,"class":"odd","K":3,"coeffs":[1.0]}"#
        )
        .is_err());
    }

    #[test]
    fn parseval_matches_quadrature() {
        let loop_z = random_loop(T, SymmetryClass::AntiHalfPeriod, 9, 0.4, 5).unwrap();
        let samples = loop_z.sample_grid(4 * loop_z.order().max(8)).unwrap();
        let quad = trapezoid_periodic(
            &samples.dz.iter().map(|v| v * v).collect::<Vec<_>>(),
            loop_z.period(),
        );
        assert_relative_eq!(quad, loop_z.derivative_norm_sq(), max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn membership_residual_is_tiny(
            seed in 0u64..1000,
            order in 1usize..24,
            amplitude in 1e-3f64..10.0,
            odd in proptest::bool::ANY,
        ) {
            let class = if odd { SymmetryClass::Odd } else { SymmetryClass::AntiHalfPeriod };
            let loop_z = random_loop(T, class, order, amplitude, seed).unwrap();
            prop_assert!(loop_z.membership_residual(64) < 1e-12 * (1.0 + amplitude * order as f64));
        }

        #[test]
        fn poincare_wirtinger(seed in 0u64..500, order in 1usize..16) {
            let loop_z = random_loop(T, SymmetryClass::Odd, order, 1.0, seed).unwrap();
            let samples = loop_z.sample_grid(default_grid_len(order)).unwrap();
            let z2 = trapezoid_periodic(
                &samples.z.iter().map(|v| v * v).collect::<Vec<_>>(), T);
            let dz2 = trapezoid_periodic(
                &samples.dz.iter().map(|v| v * v).collect::<Vec<_>>(), T);
            let bound = T * T / (4.0 * std::f64::consts::PI * std::f64::consts::PI) * dz2;
            prop_assert!(z2 <= bound * (1.0 + 1e-12));
        }
    }
}
