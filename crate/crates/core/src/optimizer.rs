//! Maximization of Re a_n over atom configurations.
//!
//! The gradient is analytic: with P built in the raw gauge,
//! ∂(Re a_n)/∂λ_k = −Re P(α_k) and ∂(Re a_n)/∂θ_k = −λ_k·Im(α_k P′(α_k)).
//! Ascent is projected gradient with Armijo backtracking; weights stay above
//! a small floor (atoms pinned there get dropped), an optional total-mass
//! floor t ≥ t_min is enforced by uniform scaling, and multistart runs are
//! independent and deterministic per (seed, start index).

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{wrap_angle, AtomicConfig, TAU};
use crate::poly::build_p_from;
use crate::series::{f_series, m_n};
use crate::variational::{first_order_conditions, StationarityReport};

/// Weights are kept at or above this floor during ascent.
pub const LAMBDA_FLOOR: f64 = 1e-8;
const GRAD_TOL: f64 = 1e-8;
const MAX_ITERS: usize = 5000;
const ARMIJO_C: f64 = 1e-4;
const ARMIJO_SHRINK: f64 = 0.5;
const PIN_DROP_ITERS: usize = 20;
/// |a_n| below this leaves the rotation gauge undefined.
const GAUGE_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Rotation gauge
// ---------------------------------------------------------------------------

/// A configuration rotated so a_n is real and nonnegative, with the applied
/// shift; `degenerate` flags |a_n| too small to define the gauge, in which
/// case the configuration is returned unchanged.
#[derive(Clone, Debug)]
pub struct NormalizedConfig {
    pub config: AtomicConfig,
    pub tau: f64,
    pub degenerate: bool,
}

/// Shift every atom angle by the smallest τ ≥ 0 making a_n real positive.
/// Rotating atoms by τ sends a_j to e^{−ijτ}a_j, so τ = arg(a_n)/n wrapped
/// into [0, 2π/n).
pub fn normalize_rotation(config: &AtomicConfig) -> NormalizedConfig {
    let n = config.n();
    let a_n = f_series(config, n).coeff(n);
    if a_n.norm() <= GAUGE_TOL {
        return NormalizedConfig {
            config: config.clone(),
            tau: 0.0,
            degenerate: true,
        };
    }
    let tau = wrap_angle(a_n.arg()) / n as f64;
    NormalizedConfig {
        config: config.rotated(tau),
        tau,
        degenerate: false,
    }
}

// ---------------------------------------------------------------------------
// Objective and gradient
// ---------------------------------------------------------------------------

/// (Re a_n, ∂/∂λ_k, ∂/∂θ_k) in the raw gauge:
/// dλ_k = −Re P(α_k), dθ_k = −λ_k·Im(α_k P′(α_k)).
pub fn objective_and_gradient(config: &AtomicConfig) -> (f64, Vec<f64>, Vec<f64>) {
    let p = build_p_from(config);
    let value = p.coeff(0).re;
    let mut d_lambda = Vec::with_capacity(config.num_atoms());
    let mut d_theta = Vec::with_capacity(config.num_atoms());
    for atom in config.atoms() {
        let alpha = atom.alpha();
        let (pv, pd) = p.eval_with_derivative(alpha);
        d_lambda.push(-pv.re);
        d_theta.push(-atom.lambda * (alpha * pd).im);
    }
    (value, d_lambda, d_theta)
}

// ---------------------------------------------------------------------------
// Ascent
// ---------------------------------------------------------------------------

/// Knobs for [`maximize`]; the defaults implement the documented schedule.
#[derive(Clone, Copy, Debug)]
pub struct MaximizeOptions {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub lambda_floor: f64,
    /// Total-mass floor Σλ ≥ t_min, enforced by uniform weight scaling.
    pub t_min: Option<f64>,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        MaximizeOptions {
            max_iters: MAX_ITERS,
            grad_tol: GRAD_TOL,
            lambda_floor: LAMBDA_FLOOR,
            t_min: None,
        }
    }
}

/// Best configuration found, rotation-normalized, with the recomputed value
/// and the stationarity residuals at the optimum.
#[derive(Clone, Debug, Serialize)]
pub struct OptimizationResult {
    pub n: usize,
    pub value: f64,
    pub config: AtomicConfig,
    pub grad_norm: f64,
    pub stationarity: StationarityReport,
    pub starts: usize,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
}

impl OptimizationResult {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

struct StartOutcome {
    config: AtomicConfig,
    value: f64,
    iterations: usize,
    converged: bool,
}

fn project(atoms: &mut [(f64, f64)], floor: f64, t_min: Option<f64>) {
    for a in atoms.iter_mut() {
        a.1 = a.1.max(floor);
    }
    if let Some(tm) = t_min {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if total < tm && total > 0.0 {
            let scale = tm / total;
            for a in atoms.iter_mut() {
                a.1 *= scale;
            }
        }
    }
}

fn ascend(n: usize, mut atoms: Vec<(f64, f64)>, options: &MaximizeOptions) -> StartOutcome {
    project(&mut atoms, options.lambda_floor, options.t_min);
    let mut config = AtomicConfig::new(n, &atoms).expect("projected seed is valid");
    let init_step = 0.1 / (1.0 + n as f64);
    // The accepted step carries over and is retried at twice the size, so
    // near a quadratic optimum the effective step grows toward 1/curvature
    // and value gains stay above roundoff for as long as possible.
    let mut carry_step = init_step;
    let mut pins = vec![0usize; config.num_atoms()];

    for iter in 0..options.max_iters {
        let (value, d_lambda, d_theta) = objective_and_gradient(&config);
        let grad_sq: f64 = d_lambda.iter().chain(d_theta.iter()).map(|g| g * g).sum();
        let grad_norm = grad_sq.sqrt();
        if grad_norm < options.grad_tol {
            return StartOutcome {
                config,
                value,
                iterations: iter,
                converged: true,
            };
        }

        // Atoms pinned at the floor with the gradient still pushing down are
        // dead weight; after a grace period they are removed outright.
        if pins.len() != config.num_atoms() {
            pins = vec![0; config.num_atoms()];
        }
        for (k, atom) in config.atoms().iter().enumerate() {
            if atom.lambda <= options.lambda_floor * (1.0 + 1e-6) && d_lambda[k] <= 0.0 {
                pins[k] += 1;
            } else {
                pins[k] = 0;
            }
        }
        if config.num_atoms() > 1 && pins.iter().any(|&c| c >= PIN_DROP_ITERS) {
            let mut keep: Vec<(f64, f64)> = config
                .atoms()
                .iter()
                .zip(&pins)
                .filter(|(_, &c)| c < PIN_DROP_ITERS)
                .map(|(a, _)| (a.theta, a.lambda))
                .collect();
            if keep.is_empty() {
                // Every atom pinned: keep the one the objective resists least.
                let best_k = d_lambda
                    .iter()
                    .enumerate()
                    .max_by(|(_, a), (_, b)| a.total_cmp(b))
                    .map(|(k, _)| k)
                    .unwrap();
                let a = &config.atoms()[best_k];
                keep.push((a.theta, a.lambda));
            }
            config = AtomicConfig::new(n, &keep).expect("surviving atoms are valid");
            pins = vec![0; config.num_atoms()];
            continue;
        }

        // Backtracking on the projected step; sufficient increase is judged
        // against the inner product with the realized displacement so that
        // clamped and mass-projected moves are scored fairly.
        let base: Vec<(f64, f64)> = config.atoms().iter().map(|a| (a.theta, a.lambda)).collect();
        let mut step = (2.0 * carry_step).min(1e4);
        let mut accepted: Option<(AtomicConfig, f64)> = None;
        while step > 1e-18 {
            let mut cand: Vec<(f64, f64)> = base
                .iter()
                .enumerate()
                .map(|(k, &(theta, lambda))| {
                    (theta + step * d_theta[k], lambda + step * d_lambda[k])
                })
                .collect();
            project(&mut cand, options.lambda_floor, options.t_min);
            let ip: f64 = cand
                .iter()
                .zip(&base)
                .enumerate()
                .map(|(k, (c, b))| d_lambda[k] * (c.1 - b.1) + d_theta[k] * (c.0 - b.0))
                .sum();
            if ip > 0.0 {
                let cand_config = AtomicConfig::new(n, &cand).expect("candidate is valid");
                let cand_value = m_n(&cand_config);
                if cand_value >= value + ARMIJO_C * ip {
                    accepted = Some((cand_config, cand_value));
                    break;
                }
            }
            step *= ARMIJO_SHRINK;
        }
        match accepted {
            Some((next, _)) => {
                config = next;
                carry_step = step.max(1e-12);
            }
            None => {
                // No admissible ascent step. Either improvements have gone
                // below one ulp of the value (genuine convergence, gradient
                // at the f64-realizability floor) or the iterate sits on the
                // t_min boundary with the gradient pointing outward.
                let realizable = (f64::EPSILON * (1.0 + value.abs())).sqrt();
                return StartOutcome {
                    config,
                    value,
                    iterations: iter,
                    converged: grad_norm <= realizable.max(options.grad_tol),
                };
            }
        }
    }
    let (value, d_lambda, d_theta) = objective_and_gradient(&config);
    let grad_norm = d_lambda
        .iter()
        .chain(d_theta.iter())
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt();
    StartOutcome {
        config,
        value,
        iterations: options.max_iters,
        converged: grad_norm < options.grad_tol,
    }
}

/// Gradient as one flat vector (θ components then λ components), or None
/// if rebuilding the configuration changed the atom count (merge), which
/// invalidates the coordinate correspondence.
fn grad_vec(n: usize, atoms: &[(f64, f64)], m: usize) -> Option<Vec<f64>> {
    let config = AtomicConfig::new(n, atoms).ok()?;
    if config.num_atoms() != m {
        return None;
    }
    let (_, d_lambda, d_theta) = objective_and_gradient(&config);
    let mut g = d_theta;
    g.extend(d_lambda);
    Some(g)
}

/// Gaussian elimination with partial pivoting; None on (near) singularity.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let dim = b.len();
    for col in 0..dim {
        let pivot = (col..dim).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..dim {
            let f = a[row][col] / a[col][col];
            for k in col..dim {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; dim];
    for row in (0..dim).rev() {
        let mut acc = b[row];
        for (k, xk) in x.iter().enumerate().skip(row + 1) {
            acc -= a[row][k] * xk;
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Newton refinement of the stationarity system ∇(Re a_n) = 0 for a
/// converged ascent output. Value-based line search bottoms out once value
/// gains drop under one ulp (gradient ~1e−8); root-finding on the analytic
/// gradient with a finite-difference Jacobian pushes the residual to the
/// 1e−13 level in a few quadratic steps without comparing values at all.
fn newton_polish(n: usize, config: AtomicConfig, floor: f64) -> AtomicConfig {
    let mut current = config;
    let h = 1e-6;
    for _ in 0..8 {
        let m = current.num_atoms();
        let dim = 2 * m;
        let atoms: Vec<(f64, f64)> =
            current.atoms().iter().map(|a| (a.theta, a.lambda)).collect();
        if atoms.iter().any(|a| a.1 < floor + 2.0 * h) {
            return current;
        }
        let g = match grad_vec(n, &atoms, m) {
            Some(g) => g,
            None => return current,
        };
        let gn = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if gn < 1e-13 {
            break;
        }
        let mut jac = vec![vec![0.0; dim]; dim];
        for col in 0..dim {
            let mut up = atoms.clone();
            let mut dn = atoms.clone();
            if col < m {
                up[col].0 += h;
                dn[col].0 -= h;
            } else {
                up[col - m].1 += h;
                dn[col - m].1 -= h;
            }
            let (gp, gm) = match (grad_vec(n, &up, m), grad_vec(n, &dn, m)) {
                (Some(a), Some(b)) => (a, b),
                _ => return current,
            };
            for row in 0..dim {
                jac[row][col] = (gp[row] - gm[row]) / (2.0 * h);
            }
        }
        let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
        let delta = match solve_dense(jac, rhs) {
            Some(d) => d,
            None => return current,
        };
        let mut scale = 1.0f64;
        let mut advanced = false;
        for _ in 0..25 {
            let mut cand = atoms.clone();
            for k in 0..m {
                cand[k].0 = atoms[k].0 + scale * delta[k];
                cand[k].1 = (atoms[k].1 + scale * delta[m + k]).max(floor);
            }
            if let Some(cg) = grad_vec(n, &cand, m) {
                let cn = cg.iter().map(|x| x * x).sum::<f64>().sqrt();
                if cn < gn {
                    current = AtomicConfig::new(n, &cand).expect("validated by grad_vec");
                    advanced = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if !advanced {
            break;
        }
    }
    current
}

/// Random seed configuration for one start: angles uniform, weights from a
/// symmetric Dirichlet(4) sample (concentrated toward equal weights, where
/// the extremal candidates live), total mass mostly near 1 with a wide
/// second mixture component so single-atom optima at large t stay reachable.
fn seed_atoms(
    rng: &mut ChaCha8Rng,
    n: usize,
    n_atoms: usize,
    t_min: Option<f64>,
) -> Vec<(f64, f64)> {
    let mut t = if rng.random::<f64>() < 0.7 {
        rng.random_range(0.8..1.3)
    } else {
        rng.random_range(0.1..(2.0 * n as f64).max(1.5))
    };
    if let Some(tm) = t_min {
        t = t.max(tm);
    }
    // Gamma(4) as a sum of four exponentials; normalized Gammas are Dirichlet.
    let mut weights: Vec<f64> = (0..n_atoms)
        .map(|_| (0..4).map(|_| -f64::ln(rng.random::<f64>())).sum())
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w *= t / total;
    }
    weights
        .into_iter()
        .map(|w| (rng.random_range(0.0..TAU), w))
        .collect()
}

/// Multistart projected gradient ascent for Re a_n with N initial atoms.
/// Starts run independently (in parallel when a rayon pool is configured)
/// and the best value wins, ties broken by the lowest start index.
pub fn maximize(
    n: usize,
    n_atoms: usize,
    starts: usize,
    seed: u64,
    options: MaximizeOptions,
) -> OptimizationResult {
    assert!(n >= 1 && n_atoms >= 1 && starts >= 1);
    let outcomes: Vec<StartOutcome> = (0..starts)
        .into_par_iter()
        .map(|start| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(start as u64 + 1);
            let atoms = seed_atoms(&mut rng, n, n_atoms, options.t_min);
            ascend(n, atoms, &options)
        })
        .collect();
    let best = outcomes
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| {
            a.value
                .total_cmp(&b.value)
                .then_with(|| j.cmp(i))
        })
        .map(|(_, o)| o)
        .expect("at least one start");

    // Converged interior optima get a Newton polish on the gradient system;
    // active-t_min results stay as the projected ascent left them.
    let polish_allowed = best.converged
        && options
            .t_min
            .is_none_or(|tm| best.config.total_mass() > tm + 1e-9);
    let refined = if polish_allowed {
        newton_polish(n, best.config.clone(), options.lambda_floor)
    } else {
        best.config.clone()
    };
    let normalized = normalize_rotation(&refined);
    let config = normalized.config;
    let value = m_n(&config);
    let (_, d_lambda, d_theta) = objective_and_gradient(&config);
    let grad_norm = d_lambda
        .iter()
        .chain(d_theta.iter())
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt();
    let stationarity = first_order_conditions(&config);
    OptimizationResult {
        n,
        value,
        config,
        grad_norm,
        stationarity,
        starts,
        seed,
        iterations: best.iterations,
        converged: best.converged,
    }
}

/// [`maximize`] with the extra constraint Σλ ≥ t_min.
pub fn constrained_maximize(
    n: usize,
    n_atoms: usize,
    t_min: f64,
    starts: usize,
    seed: u64,
) -> OptimizationResult {
    assert!(t_min >= 0.0);
    let options = MaximizeOptions {
        t_min: if t_min > 0.0 { Some(t_min) } else { None },
        ..MaximizeOptions::default()
    };
    maximize(n, n_atoms, starts, seed, options)
}

// ---------------------------------------------------------------------------
// N sweep
// ---------------------------------------------------------------------------

/// One row of the per-N table.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub n_atoms: usize,
    pub best_value: f64,
    pub grad_norm: f64,
    pub starts: usize,
}

/// Best value for each atom count in the range, same seed per row.
pub fn sweep_n(
    n: usize,
    atoms_range: std::ops::RangeInclusive<usize>,
    starts: usize,
    seed: u64,
) -> Vec<SweepRow> {
    atoms_range
        .map(|n_atoms| {
            let result = maximize(n, n_atoms, starts, seed, MaximizeOptions::default());
            SweepRow {
                n_atoms,
                best_value: result.value,
                grad_norm: result.grad_norm,
                starts,
            }
        })
        .collect()
}

/// CSV with columns N, best_value, grad_norm, starts.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("N,best_value,grad_norm,starts\n");
    for row in rows {
        out.push_str(&format!(
            "{},{:.15},{:.3e},{}\n",
            row.n_atoms, row.best_value, row.grad_norm, row.starts
        ));
    }
    out
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::random_config;
    use std::f64::consts::E;
    use std::f64::consts::PI;

    #[test]
    fn normalize_reference_is_identity() {
        for n in 1..=5usize {
            let config = AtomicConfig::reference(n);
            let norm = normalize_rotation(&config);
            assert!(!norm.degenerate);
            // arg(a_n) ~ ±1e−16, so tau lands next to 0 or next to the
            // invariant rotation 2π/n; both leave the atom set fixed.
            let period = TAU / n as f64;
            let lattice_dist = norm.tau.min(period - norm.tau);
            assert!(lattice_dist < 1e-12, "n={n} tau={}", norm.tau);
            for (a, b) in norm.config.atoms().iter().zip(config.atoms()) {
                assert!(
                    crate::config::circular_distance(a.theta, b.theta) < 1e-12,
                    "n={n}: {} vs {}",
                    a.theta,
                    b.theta
                );
                assert!((a.lambda - b.lambda).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn normalize_undoes_rotation() {
        let config = AtomicConfig::reference(2).rotated(PI / 4.0);
        let norm = normalize_rotation(&config);
        assert!(!norm.degenerate);
        let a2 = f_series(&norm.config, 2).coeff(2);
        assert!(a2.im.abs() < 1e-14 && a2.re > 0.0);
        // The recovered atom set is the reference one.
        for (a, b) in norm
            .config
            .atoms()
            .iter()
            .zip(AtomicConfig::reference(2).atoms())
        {
            assert!((a.theta - b.theta).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_flags_vanishing_leading_coefficient() {
        // One atom of weight 1: a_2 = 2t(t−1)e^{−t}·phase = 0 at t = 1.
        let config = AtomicConfig::new(2, &[(0.3, 1.0)]).unwrap();
        let norm = normalize_rotation(&config);
        assert!(norm.degenerate);
        assert_eq!(norm.config, config);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let h = 1e-6;
        for trial in 0..50 {
            let n = rng.random_range(1..=5usize);
            let config = random_config(&mut rng, n, 6, 4.0);
            let (_, d_lambda, d_theta) = objective_and_gradient(&config);
            let atoms: Vec<(f64, f64)> =
                config.atoms().iter().map(|a| (a.theta, a.lambda)).collect();
            for k in 0..atoms.len() {
                let mut up = atoms.clone();
                let mut dn = atoms.clone();
                up[k].1 += h;
                dn[k].1 -= h;
                let fd = (m_n(&AtomicConfig::new(n, &up).unwrap())
                    - m_n(&AtomicConfig::new(n, &dn).unwrap()))
                    / (2.0 * h);
                assert!(
                    (d_lambda[k] - fd).abs() <= 1e-6 * (1.0 + fd.abs()),
                    "trial {trial} dλ[{k}]: {} vs fd {fd}",
                    d_lambda[k]
                );
                let mut up = atoms.clone();
                let mut dn = atoms.clone();
                up[k].0 += h;
                dn[k].0 -= h;
                let fd = (m_n(&AtomicConfig::new(n, &up).unwrap())
                    - m_n(&AtomicConfig::new(n, &dn).unwrap()))
                    / (2.0 * h);
                assert!(
                    (d_theta[k] - fd).abs() <= 1e-6 * (1.0 + fd.abs()),
                    "trial {trial} dθ[{k}]: {} vs fd {fd}",
                    d_theta[k]
                );
            }
        }
    }

    #[test]
    fn reference_is_stationary_for_gradient() {
        for n in 1..=6usize {
            let (value, d_lambda, d_theta) =
                objective_and_gradient(&AtomicConfig::reference(n));
            assert!((value - 2.0 / E).abs() < 1e-14);
            for k in 0..n {
                assert!(d_lambda[k].abs() < 1e-12, "n={n} dλ[{k}]={}", d_lambda[k]);
                assert!(d_theta[k].abs() < 1e-12, "n={n} dθ[{k}]={}", d_theta[k]);
            }
        }
    }

    #[test]
    fn single_atom_gradient_closed_form() {
        let config = AtomicConfig::new(1, &[(PI, 1.0)]).unwrap();
        let (value, d_lambda, d_theta) = objective_and_gradient(&config);
        assert!((value - 2.0 / E).abs() < 1e-15);
        assert!(d_lambda[0].abs() < 1e-14);
        assert!(d_theta[0].abs() < 1e-14);
    }

    #[test]
    fn maximize_solves_the_proven_cases() {
        let r1 = maximize(1, 1, 32, 7, MaximizeOptions::default());
        assert!(r1.converged);
        assert!((r1.value - 2.0 / E).abs() < 1e-6, "value {}", r1.value);
        assert!((r1.config.total_mass() - 1.0).abs() < 1e-4);

        let r2 = maximize(2, 2, 32, 7, MaximizeOptions::default());
        assert!(r2.converged);
        assert!((r2.value - 2.0 / E).abs() < 1e-6, "value {}", r2.value);
        assert!(r2.stationarity.max_residual < 1e-6);
        assert_eq!(r2.config.num_atoms(), 2);

        // Extremal-regime contracts on converged results.
        for run in [&r1, &r2] {
            let t = run.config.total_mass();
            assert!((-t).exp() >= (-2.0 * run.n as f64).exp());
            if run.value >= 0.7 {
                assert!(t >= -f64::ln(2.0f64.sqrt() - 1.0) - 1e-3, "t = {t}");
            }
        }
    }

    #[test]
    fn results_are_deterministic() {
        let a = maximize(2, 2, 8, 5, MaximizeOptions::default());
        let b = maximize(2, 2, 8, 5, MaximizeOptions::default());
        assert_eq!(a.to_json_string(), b.to_json_string());
    }

    #[test]
    fn gauge_preserves_leading_modulus() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        for _ in 0..20 {
            let config = random_config(&mut rng, 3, 5, 2.0);
            let before = f_series(&config, 3).coeff(3).norm();
            let norm = normalize_rotation(&config);
            if norm.degenerate {
                continue;
            }
            let after = f_series(&norm.config, 3).coeff(3);
            assert!(after.im.abs() <= 1e-12 * (1.0 + after.re.abs()));
            assert!((after.re - before).abs() < 1e-12);
        }
    }

    #[test]
    fn constrained_with_zero_floor_matches_plain() {
        let plain = maximize(1, 1, 4, 11, MaximizeOptions::default());
        let constrained = constrained_maximize(1, 1, 0.0, 4, 11);
        assert_eq!(plain.to_json_string(), constrained.to_json_string());
    }

    #[test]
    fn constrained_families_tie_at_threshold() {
        let report = crate::special::restricted_problem();
        let two = constrained_maximize(2, 2, report.t_min, 16, 9);
        let one = constrained_maximize(2, 1, report.t_min, 16, 9);
        assert!(
            (two.value - report.value).abs() < 1e-5,
            "two-atom {} vs {}",
            two.value,
            report.value
        );
        assert!(
            (one.value - report.value).abs() < 1e-5,
            "one-atom {} vs {}",
            one.value,
            report.value
        );
    }

    #[test]
    fn sweep_shows_single_atom_plateau() {
        let rows = sweep_n(3, 1..=3, 24, 13);
        assert_eq!(rows.len(), 3);
        assert!(
            (rows[0].best_value - 0.55191).abs() < 1e-4,
            "N=1 value {}",
            rows[0].best_value
        );
        for pair in rows.windows(2) {
            assert!(pair[1].best_value >= pair[0].best_value - 1e-6);
        }
        assert!((rows[2].best_value - 2.0 / E).abs() < 1e-4);
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("N,best_value,grad_norm,starts\n"));
        assert_eq!(csv.trim().lines().count(), 4);
    }
}
