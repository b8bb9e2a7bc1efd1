//! Action minimization over a symmetry class.
//!
//! A limited-memory quasi-Newton descent with backtracking (sufficient
//! decrease) line search drives the coefficient-gradient down to the
//! scale where function-value comparisons hit f64 resolution; an
//! exact-Hessian Newton refinement on the stationarity system then
//! finishes to the requested gradient tolerance. If a run collapses to
//! the planar rest solution `z ≡ 0` (a critical point but never a
//! minimizer here), it restarts from a fresh seeded loop.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::action::{ActionReport, DiscretizedAction};
use crate::config::{CircularConfig, MassSystem};
use crate::error::Result;
use crate::loop_space::{default_grid_len, random_loop, LoopZ, SymmetryClass};

/// Options for [`minimize`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimizeOptions {
    /// Truncation order `K` of the loop representation.
    pub modes: usize,
    /// Convergence tolerance on the coefficient-gradient sup-norm.
    pub gtol: f64,
    /// Iteration budget for the descent phase of a single attempt.
    pub max_iter: usize,
    /// Seed for the initial iterate's higher-mode noise.
    pub seed: u64,
    /// Amplitude of the `k = 1` sine mode of the initial iterate;
    /// defaults to `0.5 · min rᵢ` when absent.
    pub init_amplitude: Option<f64>,
    /// Restarts allowed when a run collapses to the trivial loop.
    pub max_restarts: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            modes: 32,
            gtol: 1e-9,
            max_iter: 1000,
            seed: 0,
            init_amplitude: None,
            max_restarts: 4,
        }
    }
}

/// One accepted iterate of the descent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub action: f64,
    pub grad_norm: f64,
}

/// Result of a minimization run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimizerReport {
    #[serde(rename = "loop")]
    pub loop_z: LoopZ,
    pub action: ActionReport,
    pub iterations: usize,
    pub grad_norm: f64,
    pub sup_norm_z: f64,
    pub converged: bool,
    /// False when the run ended at the planar rest solution.
    pub nontrivial: bool,
    pub restarts: usize,
    /// Present when every restart collapsed; points at the conjugate
    /// point analysis for diagnosis.
    pub diagnostic: Option<String>,
    pub trace: Vec<TracePoint>,
}

/// Sup-norm below which an iterate counts as the trivial loop `z ≡ 0`.
const TRIVIAL_SUP_NORM: f64 = 1e-8;

/// Gradient sup-norm at which the descent hands over to the Newton
/// refinement; below this scale Armijo decrease is no longer reliably
/// measurable in f64.
const REFINE_THRESHOLD: f64 = 1e-6;

struct Attempt {
    coeffs: DVector<f64>,
    value: f64,
    grad: DVector<f64>,
    iterations: usize,
    converged: bool,
    trace: Vec<TracePoint>,
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// One secant pair `(s, y, 1/sᵀy)` of the limited-memory history.
type SecantPair = (DVector<f64>, DVector<f64>, f64);

/// Two-loop recursion over the stored (s, y) pairs.
fn lbfgs_direction(grad: &DVector<f64>, history: &[SecantPair]) -> DVector<f64> {
    let mut q = grad.clone();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * s.dot(&q);
        q.axpy(-a, y, 1.0);
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.last() {
        q *= s.dot(y) / y.dot(y);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * y.dot(&q);
        q.axpy(a - b, s, 1.0);
    }
    -q
}

/// Descent phase: L-BFGS with Armijo backtracking, monotone in `f`.
/// Stops at `gtol`, at the iteration budget, or on stalling — descent
/// becomes unmeasurable in f64 once gradients are small enough, and
/// the Newton refinement takes over from there.
fn descend(ws: &DiscretizedAction, x0: DVector<f64>, gtol: f64, max_iter: usize) -> Attempt {
    const MEMORY: usize = 10;
    const ARMIJO: f64 = 1e-4;
    const STALL_WINDOW: usize = 30;

    let mut x = x0;
    let (mut f, mut g) = ws.value_and_gradient(&x);
    let mut history: Vec<SecantPair> = Vec::new();
    let mut trace = vec![TracePoint {
        iteration: 0,
        action: f,
        grad_norm: inf_norm(&g),
    }];
    let mut window_f = f;
    let mut window_g = inf_norm(&g);
    let mut since_progress = 0usize;

    let mut iterations = 0;
    while iterations < max_iter {
        let gnorm = inf_norm(&g);
        if gnorm < gtol {
            break;
        }
        let mut dir = if history.is_empty() {
            -&g
        } else {
            lbfgs_direction(&g, &history)
        };
        let mut slope = g.dot(&dir);
        if slope >= 0.0 {
            history.clear();
            dir = -&g;
            slope = g.dot(&dir);
        }
        let mut alpha = if history.is_empty() {
            (1.0 / dir.norm()).min(1.0)
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..60 {
            let candidate = &x + &dir * alpha;
            let fc = ws.value(&candidate);
            if fc <= f + ARMIJO * alpha * slope {
                accepted = Some((candidate, fc));
                break;
            }
            alpha *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((xn, fn_)) => {
                let gn = ws.gradient(&xn);
                let s = &xn - &x;
                let y = &gn - &g;
                let sy = s.dot(&y);
                if sy > 1e-10 * s.norm() * y.norm() {
                    history.push((s, y, 1.0 / sy));
                    if history.len() > MEMORY {
                        history.remove(0);
                    }
                }
                x = xn;
                f = fn_;
                g = gn;
                let gn_norm = inf_norm(&g);
                trace.push(TracePoint {
                    iteration: iterations,
                    action: f,
                    grad_norm: gn_norm,
                });
                // Progress means a decrease visible above f64 wobble or
                // a clear drop in the gradient.
                if f < window_f - 4.0 * f64::EPSILON * window_f.abs() || gn_norm < 0.5 * window_g {
                    window_f = window_f.min(f);
                    window_g = window_g.min(gn_norm);
                    since_progress = 0;
                } else {
                    since_progress += 1;
                    if since_progress >= STALL_WINDOW {
                        break;
                    }
                }
            }
            None => {
                // No measurable decrease along this direction. Retry
                // once as steepest descent; if that also fails the
                // function floor is reached.
                if history.is_empty() {
                    break;
                }
                history.clear();
            }
        }
    }

    let converged = inf_norm(&g) < gtol;
    Attempt {
        coeffs: x,
        value: f,
        grad: g,
        iterations,
        converged,
        trace,
    }
}

/// Newton refinement of the stationarity system `∇f = 0` with the
/// exact Hessian and backtracking on the residual norm. Function-value
/// changes down here are below f64 resolution, so the merit is
/// `½‖∇f‖²`, which stays well resolved.
fn refine(ws: &DiscretizedAction, attempt: &mut Attempt, gtol: f64, max_iter: usize) {
    let d = ws.dim();
    let identity = DMatrix::<f64>::identity(d, d);
    for _ in 0..max_iter {
        if inf_norm(&attempt.grad) < gtol {
            attempt.converged = true;
            return;
        }
        let hessian = ws.hessian(&attempt.coeffs);
        // Minimal Tikhonov damping: the anti-half-period class carries
        // an exact time-shift zero mode at any minimizer.
        let mut lambda = 1e-12 * hessian.trace().abs().max(1.0) / d as f64;
        let mut step = None;
        for _ in 0..40 {
            if let Some(chol) = Cholesky::new(&hessian + &identity * lambda) {
                step = Some(chol.solve(&(-&attempt.grad)));
                break;
            }
            lambda *= 100.0;
        }
        let Some(dir) = step else { return };

        let merit0 = 0.5 * attempt.grad.dot(&attempt.grad);
        let mut alpha = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let candidate = &attempt.coeffs + &dir * alpha;
            let g = ws.gradient(&candidate);
            if 0.5 * g.dot(&g) <= merit0 * (1.0 - 1e-4 * alpha) {
                attempt.coeffs = candidate;
                attempt.grad = g;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !moved {
            return;
        }
        attempt.iterations += 1;
        attempt.value = ws.value(&attempt.coeffs);
        attempt.trace.push(TracePoint {
            iteration: attempt.iterations,
            action: attempt.value,
            grad_norm: inf_norm(&attempt.grad),
        });
    }
    attempt.converged = inf_norm(&attempt.grad) < gtol;
}

/// Deterministic initial iterate: `init_amplitude` on the `k = 1` sine
/// mode plus seeded noise on the higher modes.
fn initial_loop(
    period: f64,
    class: SymmetryClass,
    opts: &MinimizeOptions,
    amplitude: f64,
    seed: u64,
) -> Result<LoopZ> {
    let noise = random_loop(period, class, opts.modes, 0.01 * amplitude, seed)?;
    let mut coeffs = noise.coeffs().to_vec();
    coeffs[0] += amplitude;
    noise.with_coeffs(coeffs)
}

/// Flips the overall sign so reports are canonical: first nonzero
/// coefficient positive in the anti-half-period class, `z'(0) >= 0` in
/// the odd class. Both `z` and `-z` always carry the same action.
fn canonicalize_sign(class: SymmetryClass, coeffs: &mut DVector<f64>) {
    let flip = match class {
        SymmetryClass::AntiHalfPeriod => coeffs
            .iter()
            .find(|c| **c != 0.0)
            .map(|c| *c < 0.0)
            .unwrap_or(false),
        // z'(0) = Σ k ν c_k: all cosine slopes at t = 0.
        SymmetryClass::Odd => {
            let slope: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| (i + 1) as f64 * c)
                .sum();
            slope < 0.0
        }
    };
    if flip {
        coeffs.neg_mut();
    }
}

/// Minimizes the action over the given symmetry class.
///
/// Exhausting `max_iter` yields an unconverged report rather than an
/// error; a run that collapses onto `z ≡ 0` restarts from a fresh
/// seeded loop up to `max_restarts` times.
pub fn minimize(
    system: &MassSystem,
    class: SymmetryClass,
    opts: &MinimizeOptions,
) -> Result<MinimizerReport> {
    let config = CircularConfig::for_system(system)?;
    let ws = DiscretizedAction::new(
        system,
        &config,
        class,
        opts.modes,
        default_grid_len(opts.modes),
    )?;
    let amplitude = opts
        .init_amplitude
        .unwrap_or_else(|| 0.5 * config.min_radius());

    let mut restarts = 0;
    let mut attempt = loop {
        let seed = opts.seed.wrapping_add(restarts as u64);
        let start = initial_loop(system.period(), class, opts, amplitude, seed)?;
        let x0 = DVector::from_column_slice(start.coeffs());
        let mut attempt = descend(&ws, x0, opts.gtol.max(REFINE_THRESHOLD), opts.max_iter);
        let budget = opts.max_iter.saturating_sub(attempt.iterations).min(100);
        refine(&ws, &mut attempt, opts.gtol, budget);
        let trivial = ws.sup_norm(&attempt.coeffs) < TRIVIAL_SUP_NORM;
        if !trivial || restarts >= opts.max_restarts {
            break attempt;
        }
        restarts += 1;
    };

    canonicalize_sign(class, &mut attempt.coeffs);
    let sup_norm_z = ws.sup_norm(&attempt.coeffs);
    let nontrivial = sup_norm_z >= TRIVIAL_SUP_NORM;
    let diagnostic = (!nontrivial).then(|| {
        "every restart collapsed onto the planar rest solution; check the Jacobi report \
         (conjugate point and inequality margin) for this instance"
            .to_string()
    });
    let loop_z = LoopZ::new(
        system.period(),
        class,
        opts.modes,
        attempt.coeffs.iter().cloned().collect(),
    )?;
    Ok(MinimizerReport {
        action: ws.report(&attempt.coeffs),
        loop_z,
        iterations: attempt.iterations,
        grad_norm: inf_norm(&attempt.grad),
        sup_norm_z,
        converged: attempt.converged,
        nontrivial,
        restarts,
        diagnostic,
        trace: attempt.trace,
    })
}
