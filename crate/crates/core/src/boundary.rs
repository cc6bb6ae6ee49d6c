//! Boundary phase function φ with f(e^{iθ}) = e^{iφ(θ)}, its zeros and
//! level sets, and the oscillatory-integral audit behind the lower bound
//! N ≥ c·n on the number of atoms of a near-extremal configuration.
//!
//! φ(θ) = −Σ λⱼ cot((θ−θⱼ)/2) is strictly increasing from −∞ to ∞ on each
//! arc between consecutive atoms, with φ′ > 0 convex. The audit partitions
//! the circle into K₁ = {φ′ > k₁n} and K₂ = {φ′ < k₂n}, checks the measure
//! inequality 2π ≤ ((k₁+k₂)/k₂)|K₁| + |K₂|, and bounds the oscillatory
//! integral ∫ e^{i(φ(θ)−nθ)} dθ on every K₁ arc by 2/((k₁−1)n).

use std::f64::consts::{E, PI};

use num_complex::Complex64;

use crate::config::{circular_distance, wrap_angle, AtomicConfig, TAU};
use crate::error::{Error, Result};
use crate::poly::golden_min;

/// Minimum distance from an atom at which φ may be evaluated.
pub const POLE_GUARD: f64 = 1e-12;

/// θ-tolerance for bisected level-set endpoints.
const ENDPOINT_TOL: f64 = 1e-12;

/// φ′ threshold beyond which the remaining atom-side tail of an arc is
/// bounded analytically instead of integrated.
const TAIL_CUT: f64 = 1e8;

fn half_angles(config: &AtomicConfig, theta: f64) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(config.num_atoms());
    for atom in config.atoms() {
        if circular_distance(theta, atom.theta) < POLE_GUARD {
            return Err(Error::AtomPole { theta });
        }
        out.push((0.5 * (theta - atom.theta), atom.lambda));
    }
    Ok(out)
}

/// φ(θ) = −Σ λⱼ cot((θ−θⱼ)/2).
pub fn phi(config: &AtomicConfig, theta: f64) -> Result<f64> {
    Ok(half_angles(config, theta)?
        .iter()
        .map(|&(x, lambda)| -lambda * x.cos() / x.sin())
        .sum())
}

/// φ′(θ) = Σ λⱼ / (2 sin²((θ−θⱼ)/2)) > 0.
pub fn phi_prime(config: &AtomicConfig, theta: f64) -> Result<f64> {
    Ok(half_angles(config, theta)?
        .iter()
        .map(|&(x, lambda)| {
            let s = x.sin();
            lambda / (2.0 * s * s)
        })
        .sum())
}

/// φ″(θ) = −Σ λⱼ cos((θ−θⱼ)/2) / (2 sin³((θ−θⱼ)/2)).
pub fn phi_second(config: &AtomicConfig, theta: f64) -> Result<f64> {
    Ok(half_angles(config, theta)?
        .iter()
        .map(|&(x, lambda)| {
            let s = x.sin();
            -lambda * x.cos() / (2.0 * s * s * s)
        })
        .sum())
}

/// The N arcs (θⱼ, θⱼ₊₁) between consecutive atoms, lifted so each arc is
/// an increasing real interval (the last wraps past 2π).
pub fn atom_intervals(config: &AtomicConfig) -> Vec<(f64, f64)> {
    let angles: Vec<f64> = config.atoms().iter().map(|a| a.theta).collect();
    let n = angles.len();
    (0..n)
        .map(|j| {
            let right = if j + 1 == n { angles[0] + TAU } else { angles[j + 1] };
            (angles[j], right)
        })
        .collect()
}

/// Disjoint arcs on the circle, stored on a lift where each arc is an
/// increasing interval; atoms may appear only as open endpoints.
#[derive(Clone, Debug, Default)]
pub struct IntervalSet {
    pub arcs: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn total(&self) -> f64 {
        self.arcs.iter().map(|(a, b)| b - a).sum()
    }
}

/// Shrink ε from a quarter-gap until pred(endpoint ± ε) holds; poles at the
/// interval ends guarantee termination for level/sign predicates.
fn approach(from: f64, toward: f64, pred: impl Fn(f64) -> bool) -> f64 {
    let mut eps = 0.25 * (toward - from).abs();
    let dir = (toward - from).signum();
    let mut x = from + dir * eps;
    let mut guard = 0;
    while !pred(x) && guard < 200 {
        eps *= 0.5;
        x = from + dir * eps;
        guard += 1;
    }
    x
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    debug_assert!(flo * f(hi) <= 0.0, "bisection bracket must straddle zero");
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm >= 0.0) == (flo >= 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One zero μⱼ of φ per atom interval, on the lift of `atom_intervals`
/// (so μ_N may exceed 2π). φ runs from −∞ to ∞ on each interval.
pub fn phi_zeros_lifted(config: &AtomicConfig) -> Vec<f64> {
    let eval = |theta: f64| phi(config, theta).expect("interior of interval");
    atom_intervals(config)
        .into_iter()
        .map(|(a, b)| {
            let lo = approach(a, b, |x| eval(x) < 0.0);
            let hi = approach(b, a, |x| eval(x) > 0.0);
            if lo >= hi {
                // Pathologically thin bracket; fall back to the midpoint.
                return 0.5 * (a + b);
            }
            bisect(eval, lo, hi, 1e-15 * (1.0 + b.abs()))
        })
        .collect()
}

/// Zeros of φ wrapped to [0, 2π) and sorted.
pub fn phi_zeros(config: &AtomicConfig) -> Vec<f64> {
    let mut zeros: Vec<f64> = phi_zeros_lifted(config).into_iter().map(wrap_angle).collect();
    zeros.sort_by(f64::total_cmp);
    zeros
}

/// Lebesgue measure of {θ : φ(θ) < 0}; equals Σ(μⱼ − θⱼ) because φ < 0
/// exactly between each atom and the following zero.
pub fn negativity_measure(config: &AtomicConfig) -> f64 {
    let zeros = phi_zeros_lifted(config);
    atom_intervals(config)
        .iter()
        .zip(&zeros)
        .map(|(&(a, _), &mu)| mu - a)
        .sum()
}

/// φ via the product formula t·∏sin((θ−μⱼ)/2)/∏sin((θ−θⱼ)/2) with the sign
/// calibrated against the cotangent sum at one healthy sample point.
pub fn phi_product_form(config: &AtomicConfig, theta: f64) -> Result<f64> {
    let zeros = phi_zeros_lifted(config);
    let raw = |theta: f64| -> Result<f64> {
        let mut value = config.total_mass();
        for &mu in &zeros {
            value *= (0.5 * (theta - mu)).sin();
        }
        for (x, _) in half_angles(config, theta)? {
            value /= x.sin();
        }
        Ok(value)
    };
    // Calibrate at the point maximizing distance to atoms and zeros: the
    // interleaved lift makes the sign +1, but it is measured, not assumed.
    let mut best = (0.0, -1.0);
    for k in 0..64 {
        let t = TAU * (k as f64 + 0.5) / 64.0;
        let d = config
            .atoms()
            .iter()
            .map(|a| circular_distance(t, a.theta))
            .chain(zeros.iter().map(|&mu| circular_distance(t, mu)))
            .fold(f64::INFINITY, f64::min);
        if d > best.1 {
            best = (t, d);
        }
    }
    let calibration = phi(config, best.0)? / raw(best.0)?;
    Ok(raw(theta)? * calibration.signum())
}

struct IntervalShape {
    /// Interior minimizer of the convex φ′ and the minimum value.
    min_at: f64,
    min_val: f64,
}

fn interval_shape(config: &AtomicConfig, a: f64, b: f64) -> IntervalShape {
    let dp = |x: f64| phi_prime(config, x).expect("interior of interval");
    // Search the whole interval minus a margin that keeps clear of the
    // atom poles; φ′ is convex here so golden section finds the minimum.
    let delta = ((b - a) * 1e-6).max(1e-9);
    let min_at = golden_min(dp, a + delta, b - delta, 1e-10);
    IntervalShape {
        min_at,
        min_val: dp(min_at),
    }
}

/// Level sets K₁ = {φ′ > k₁·n} (≤ 2 arcs per interval, hugging the atoms)
/// and K₂ = {φ′ < k₂·n} (≤ 1 interior arc per interval).
pub fn level_sets(config: &AtomicConfig, n: usize, k1: f64, k2: f64) -> Result<(IntervalSet, IntervalSet)> {
    if k1 <= 1.0 {
        return Err(Error::invalid_argument("level_sets requires k1 > 1"));
    }
    if !(0.0..1.0).contains(&k2) || k2 <= 0.0 {
        return Err(Error::invalid_argument("level_sets requires k2 in (0, 1)"));
    }
    let mut set1 = IntervalSet::default();
    let mut set2 = IntervalSet::default();
    let dp = |x: f64| phi_prime(config, x).expect("interior of interval");
    for (a, b) in atom_intervals(config) {
        let shape = interval_shape(config, a, b);
        let level1 = k1 * n as f64;
        let level2 = k2 * n as f64;
        if shape.min_val > level1 {
            set1.arcs.push((a, b));
        } else {
            // φ′ decreases on (a, min_at) and increases on (min_at, b),
            // diverging at both atoms, so each half crosses level1 once.
            let la = approach(a, shape.min_at, |x| dp(x) > level1);
            let x1 = bisect(|x| dp(x) - level1, la, shape.min_at, ENDPOINT_TOL);
            let lb = approach(b, shape.min_at, |x| dp(x) > level1);
            let x2 = bisect(|x| dp(x) - level1, shape.min_at, lb, ENDPOINT_TOL);
            set1.arcs.push((a, x1));
            set1.arcs.push((x2, b));
        }
        if shape.min_val < level2 {
            // Bracket points with φ′ above the level exist safely close to
            // each atom since φ′ diverges there; bisect inward from them.
            let la = approach(a, shape.min_at, |x| dp(x) > level2);
            let y1 = bisect(|x| dp(x) - level2, la, shape.min_at, ENDPOINT_TOL);
            let lb = approach(b, shape.min_at, |x| dp(x) > level2);
            let y2 = bisect(|x| dp(x) - level2, shape.min_at, lb, ENDPOINT_TOL);
            set2.arcs.push((y1, y2));
        }
    }
    Ok((set1, set2))
}

/// Slack of the measure inequality 2π ≤ ((k₁+k₂)/k₂)|K₁| + |K₂|;
/// nonnegative (within roundoff) for every configuration.
pub fn ermers_audit(config: &AtomicConfig, n: usize, k1: f64, k2: f64) -> Result<f64> {
    let (set1, set2) = level_sets(config, n, k1, k2)?;
    Ok((k1 + k2) / k2 * set1.total() + set2.total() - TAU)
}

/// One audited arc of K₁: the conservative numeric bound on
/// |∫ e^{i(φ−nθ)} dθ| (quadrature + analytic tail estimates) against the
/// stationary-phase bound 2/((k₁−1)n).
#[derive(Clone, Debug)]
pub struct VdcArc {
    pub arc: (f64, f64),
    /// |numeric integral| + tail bounds + quadrature error estimate.
    pub integral: f64,
    pub bound: f64,
}

impl VdcArc {
    pub fn passes(&self, slack: f64) -> bool {
        self.integral <= self.bound + slack
    }
}

/// K₁ arcs with whole-interval arcs split at the φ″ sign change, so the
/// phase derivative Φ′ = φ′ − n is monotone on every returned arc side.
fn k1_arcs_split(config: &AtomicConfig, n: usize, k1: f64) -> Vec<(f64, f64)> {
    let dp = |x: f64| phi_prime(config, x).expect("interior of interval");
    let mut arcs = Vec::new();
    for (a, b) in atom_intervals(config) {
        let shape = interval_shape(config, a, b);
        let level1 = k1 * n as f64;
        if shape.min_val > level1 {
            // Split at the zero of φ″, bisected between the atoms; φ″ is
            // nondecreasing since φ′ is convex.
            let d2 = |x: f64| phi_second(config, x).expect("interior");
            let la = approach(a, shape.min_at, |x| d2(x) < 0.0);
            let lb = approach(b, shape.min_at, |x| d2(x) > 0.0);
            let split = if la < lb { bisect(d2, la, lb, ENDPOINT_TOL) } else { shape.min_at };
            arcs.push((a, split));
            arcs.push((split, b));
        } else {
            let la = approach(a, shape.min_at, |x| dp(x) > level1);
            let x1 = bisect(|x| dp(x) - level1, la, shape.min_at, ENDPOINT_TOL);
            let lb = approach(b, shape.min_at, |x| dp(x) > level1);
            let x2 = bisect(|x| dp(x) - level1, shape.min_at, lb, ENDPOINT_TOL);
            arcs.push((a, x1));
            arcs.push((x2, b));
        }
    }
    arcs
}

/// Gauss–Kronrod 15(7) nodes and weights on [−1, 1] (QUADPACK constants).
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

/// Kronrod value and |K15 − G7| error estimate of ∫ f over [a, b].
fn gk15(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kronrod = Complex64::ZERO;
    let mut gauss = Complex64::ZERO;
    for (i, (&x, &wk)) in GK_NODES.iter().zip(&GK_WEIGHTS).enumerate() {
        let pair = if x == 0.0 {
            f(mid)
        } else {
            f(mid - half * x) + f(mid + half * x)
        };
        kronrod += wk * pair;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * pair;
        } else if x == 0.0 {
            // Center node belongs to both rules (index 7 is odd; unreachable)
        }
    }
    (half * kronrod, (half * (kronrod - gauss)).norm())
}

/// Adaptive panel integration of e^{iΦ(θ)} driven by the phase span:
/// panels are split until Φ varies by ≤ 1.5 rad, then GK15 is applied.
fn oscillatory_integral(
    phase: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
) -> Result<(Complex64, f64)> {
    let f = |x: f64| Complex64::from_polar(1.0, phase(x));
    let mut stack = vec![(a, b)];
    let mut value = Complex64::ZERO;
    let mut err = 0.0;
    let mut panels = 0usize;
    while let Some((x, y)) = stack.pop() {
        panels += 1;
        if panels > 4_000_000 {
            return Err(Error::QuadratureDidNotConverge {
                a,
                b,
                estimate: err,
            });
        }
        let span = (phase(y) - phase(x)).abs();
        let width = y - x;
        if span > 1.5 && width > 1e-15 {
            let mid = 0.5 * (x + y);
            stack.push((x, mid));
            stack.push((mid, y));
            continue;
        }
        let (v, e) = gk15(&f, x, y);
        if e > 1e-13 && width > 1e-14 {
            let mid = 0.5 * (x + y);
            stack.push((x, mid));
            stack.push((mid, y));
            continue;
        }
        value += v;
        err += e;
    }
    Ok((value, err))
}

/// Audit every K₁ arc: numerically integrate e^{i(φ−nθ)} away from the
/// atoms, bound the atom-side tails by the stationary-phase estimate
/// 2/Φ′(cut), and compare against 2/((k₁−1)n).
pub fn vdc_audit(config: &AtomicConfig, n: usize, k1: f64) -> Result<Vec<VdcArc>> {
    if k1 <= 1.0 {
        return Err(Error::invalid_argument("vdc_audit requires k1 > 1"));
    }
    let bound = 2.0 / ((k1 - 1.0) * n as f64);
    let dp = |x: f64| phi_prime(config, x).expect("interior of interval");
    let atom_angles: Vec<f64> = config.atoms().iter().map(|a| a.theta).collect();
    let is_atom = |x: f64| {
        atom_angles
            .iter()
            .any(|&t| circular_distance(x, t) < 1e-9)
    };
    let phase = |x: f64| phi(config, x).expect("interior") - n as f64 * x;

    let mut out = Vec::new();
    for (a, b) in k1_arcs_split(config, n, k1) {
        if (b - a).abs() < 1e-14 {
            out.push(VdcArc {
                arc: (a, b),
                integral: 0.0,
                bound,
            });
            continue;
        }
        // Cut off the divergent atom-side ends where φ′ ≥ TAIL_CUT; each
        // discarded tail contributes at most 2/(TAIL_CUT − n) since the
        // phase derivative φ′ − n is monotone and that large on it.
        let mut lo = a;
        let mut hi = b;
        let mut tail = 0.0;
        let mut whole_arc_tail = false;
        if is_atom(a) {
            let la = approach(a, b, |x| dp(x) > TAIL_CUT);
            if dp(la) > TAIL_CUT {
                // Bracket the crossing φ′ = TAIL_CUT against a probe point
                // below the cut; if none exists the whole arc is tail.
                let probe = approach(b, a, |x| dp(x) < TAIL_CUT);
                if probe > la && dp(probe) < TAIL_CUT {
                    lo = bisect(|x| dp(x) - TAIL_CUT, la, probe, ENDPOINT_TOL);
                    tail += 2.0 / (TAIL_CUT - n as f64);
                } else {
                    whole_arc_tail = true;
                }
            }
        }
        if !whole_arc_tail && is_atom(b) {
            let lb = approach(b, a, |x| dp(x) > TAIL_CUT);
            if dp(lb) > TAIL_CUT {
                let probe = approach(lo, b, |x| dp(x) < TAIL_CUT);
                if probe < lb && dp(probe) < TAIL_CUT {
                    hi = bisect(|x| dp(x) - TAIL_CUT, probe, lb, ENDPOINT_TOL);
                    tail += 2.0 / (TAIL_CUT - n as f64);
                } else {
                    whole_arc_tail = true;
                }
            }
        }
        if whole_arc_tail {
            // φ′ stays above the cut on the whole arc, so the phase
            // derivative exceeds TAIL_CUT − n throughout.
            out.push(VdcArc {
                arc: (a, b),
                integral: 2.0 / (TAIL_CUT - n as f64),
                bound,
            });
            continue;
        }
        let (value, err) = if hi > lo {
            oscillatory_integral(&phase, lo, hi)?
        } else {
            (Complex64::ZERO, 0.0)
        };
        out.push(VdcArc {
            arc: (a, b),
            integral: value.norm() + tail + err,
            bound,
        });
    }
    Ok(out)
}

/// The companion constant pair: k₂ solving k₂ = k₁/(k₁+k₂), i.e.
/// k₂ = (−k₁ + √(k₁²+4k₁))/2, and the atom-count constant
/// c = π(k₁−1)/(k₁+1)·(2/e − k₂); k₁ = 4/3 gives k₂ = 2/3 and
/// c = (2π/7)(1/e − 1/3).
pub fn theorem1_constant(k1: f64) -> (f64, f64) {
    let k2 = 0.5 * (-k1 + (k1 * k1 + 4.0 * k1).sqrt());
    let c = PI * (k1 - 1.0) / (k1 + 1.0) * (2.0 / E - k2);
    (k2, c)
}

/// Full audit bundle for one configuration, serializable for the CLI.
#[derive(Clone, Debug, serde::Serialize)]
pub struct AuditReport {
    pub k1: f64,
    pub k2: f64,
    pub c: f64,
    #[serde(rename = "K1")]
    pub set1: Vec<(f64, f64)>,
    #[serde(rename = "K2")]
    pub set2: Vec<(f64, f64)>,
    pub ermers_slack: f64,
    pub vdc: Vec<VdcEntry>,
    pub all_pass: bool,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct VdcEntry {
    pub arc: (f64, f64),
    pub integral: f64,
    pub bound: f64,
}

pub fn audit(config: &AtomicConfig, n: usize, k1: f64) -> Result<AuditReport> {
    let (k2, c) = theorem1_constant(k1);
    let (set1, set2) = level_sets(config, n, k1, k2)?;
    let slack = (k1 + k2) / k2 * set1.total() + set2.total() - TAU;
    let arcs = vdc_audit(config, n, k1)?;
    let all_pass = slack >= -1e-9 && arcs.iter().all(|a| a.passes(1e-6));
    Ok(AuditReport {
        k1,
        k2,
        c,
        set1: set1.arcs,
        set2: set2.arcs,
        ermers_slack: slack,
        vdc: arcs
            .iter()
            .map(|a| VdcEntry {
                arc: a.arc,
                integral: a.integral,
                bound: a.bound,
            })
            .collect(),
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::AtomicConfig;
    use crate::series::random_config;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn phi_single_atom_is_tangent() {
        // One atom at π with weight 1: φ(θ) = −cot((θ−π)/2) = tan(θ/2).
        let c = AtomicConfig::reference(1);
        assert!((phi(&c, FRAC_PI_2).unwrap() - 1.0).abs() < 1e-14);
        assert!(phi(&c, 0.0).unwrap().abs() < 1e-14);
        assert!((phi_prime(&c, 0.0).unwrap() - 0.5).abs() < 1e-14);
        for &theta in &[0.3, 1.0, 2.0, 4.0, 6.0] {
            assert!((phi(&c, theta).unwrap() - (theta / 2.0).tan()).abs() < 1e-11);
        }
    }

    #[test]
    fn phi_pole_at_atom_errors() {
        let c = AtomicConfig::reference(2);
        let atom = c.atoms()[0].theta;
        assert!(matches!(phi(&c, atom), Err(Error::AtomPole { .. })));
        assert!(matches!(phi_prime(&c, atom + 1e-14), Err(Error::AtomPole { .. })));
    }

    #[test]
    fn phi_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let c = random_config(&mut rng, 3, 5, 2.0);
        let h = 1e-6;
        for _ in 0..50 {
            let theta = rng.random_range(0.0..TAU);
            if c.atoms().iter().any(|a| circular_distance(theta, a.theta) < 1e-2) {
                continue;
            }
            let d_num = (phi(&c, theta + h).unwrap() - phi(&c, theta - h).unwrap()) / (2.0 * h);
            let d = phi_prime(&c, theta).unwrap();
            assert!((d_num - d).abs() < 1e-4 * (1.0 + d.abs()));
            let d2_num =
                (phi_prime(&c, theta + h).unwrap() - phi_prime(&c, theta - h).unwrap()) / (2.0 * h);
            let d2 = phi_second(&c, theta).unwrap();
            assert!((d2_num - d2).abs() < 1e-3 * (1.0 + d2.abs()));
        }
    }

    #[test]
    fn phi_zeros_reference_cases() {
        let z1 = phi_zeros(&AtomicConfig::reference(1));
        assert_eq!(z1.len(), 1);
        assert!(z1[0].abs() < 1e-10 || (z1[0] - TAU).abs() < 1e-10);

        let z2 = phi_zeros(&AtomicConfig::reference(2));
        assert_eq!(z2.len(), 2);
        assert!(z2[0].abs() < 1e-10);
        assert!((z2[1] - PI).abs() < 1e-10);
    }

    #[test]
    fn phi_zero_count_and_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        for _ in 0..20 {
            let c = random_config(&mut rng, 2, 6, 3.0);
            let zeros = phi_zeros_lifted(&c);
            assert_eq!(zeros.len(), c.num_atoms());
            let t = c.total_mass();
            for ((a, b), &mu) in atom_intervals(&c).into_iter().zip(&zeros) {
                assert!(a < mu && mu < b, "zero inside its interval");
                let gap = (mu - a).min(b - mu);
                let allowed = 1e-10 * (1.0 + t / gap);
                assert!(phi(&c, mu).unwrap().abs() <= allowed);
            }
        }
    }

    #[test]
    fn negativity_measure_is_pi() {
        let mut rng = ChaCha8Rng::seed_from_u64(107);
        for trial in 0..50 {
            let c = random_config(&mut rng, 1 + trial % 4, 6, 3.0);
            let m = negativity_measure(&c);
            assert!((m - PI).abs() < 1e-6, "measure {m} (trial {trial})");
        }
    }

    #[test]
    fn product_form_matches_cotangent_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(109);
        for n in 1..=6 {
            let c = AtomicConfig::reference(n);
            for _ in 0..200 {
                let theta = rng.random_range(0.0..TAU);
                if c.atoms().iter().any(|a| circular_distance(theta, a.theta) < 1e-3) {
                    continue;
                }
                let lhs = phi(&c, theta).unwrap();
                let rhs = phi_product_form(&c, theta).unwrap();
                assert!(
                    (lhs - rhs).abs() < 1e-8 * (1.0 + lhs.abs()),
                    "n={n} theta={theta}: {lhs} vs {rhs}"
                );
            }
        }
        for _ in 0..10 {
            let c = random_config(&mut rng, 3, 5, 2.0);
            for _ in 0..40 {
                let theta = rng.random_range(0.0..TAU);
                if c.atoms().iter().any(|a| circular_distance(theta, a.theta) < 1e-3) {
                    continue;
                }
                let lhs = phi(&c, theta).unwrap();
                let rhs = phi_product_form(&c, theta).unwrap();
                assert!((lhs - rhs).abs() < 1e-8 * (1.0 + lhs.abs()));
            }
        }
    }

    #[test]
    fn product_form_vanishes_at_zeros() {
        let c = AtomicConfig::reference(3);
        for mu in phi_zeros(&c) {
            if c.atoms().iter().all(|a| circular_distance(mu, a.theta) > 1e-6) {
                assert!(phi_product_form(&c, mu).unwrap().abs() < 1e-9);
            }
        }
    }

    #[test]
    fn phi_prime_positive_and_convex() {
        let mut rng = ChaCha8Rng::seed_from_u64(113);
        let c = random_config(&mut rng, 2, 5, 2.5);
        let intervals = atom_intervals(&c);
        for _ in 0..200 {
            let (a, b) = intervals[rng.random_range(0..intervals.len())];
            let x = rng.random_range(0.0..1.0) * (b - a) * 0.98 + a + 0.01 * (b - a);
            let y = rng.random_range(0.0..1.0) * (b - a) * 0.98 + a + 0.01 * (b - a);
            let px = phi_prime(&c, x).unwrap();
            let py = phi_prime(&c, y).unwrap();
            assert!(px > 0.0);
            let mid = phi_prime(&c, 0.5 * (x + y)).unwrap();
            assert!(mid <= 0.5 * (px + py) + 1e-10, "convexity violated");
        }
    }

    #[test]
    fn mean_value_remark_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(127);
        let c = random_config(&mut rng, 2, 4, 2.0);
        let intervals = atom_intervals(&c);
        for _ in 0..100 {
            let (a, b) = intervals[rng.random_range(0..intervals.len())];
            let x = a + rng.random_range(0.01..0.99) * (b - a);
            let y = a + rng.random_range(0.01..0.99) * (b - a);
            let lhs = (phi(&c, x).unwrap() - phi(&c, y).unwrap()).abs();
            let rhs = (x - y).abs()
                * (phi_prime(&c, x).unwrap() * phi_prime(&c, y).unwrap()).sqrt();
            assert!(lhs <= rhs + 1e-9, "{lhs} > {rhs}");
        }
    }

    #[test]
    fn level_sets_reference_congruent() {
        for n in [1usize, 2, 4] {
            let c = AtomicConfig::reference(n);
            let (set1, set2) = level_sets(&c, n, 4.0 / 3.0, 2.0 / 3.0).unwrap();
            assert!(set1.arcs.len() <= 2 * n);
            assert!(set2.arcs.len() <= n);
            // n-fold symmetry: all K2 arcs congruent.
            if set2.arcs.len() > 1 {
                let len0 = set2.arcs[0].1 - set2.arcs[0].0;
                for &(a, b) in &set2.arcs[1..] {
                    assert!((b - a - len0).abs() < 1e-9);
                }
            }
            assert!(set1.total() + set2.total() <= TAU + 1e-12);
        }
    }

    #[test]
    fn level_sets_reference_one_frozen() {
        // Single atom, λ=1, n=1: φ′ = 1/(2cos²(θ/2)); K₁ has measure
        // 2π − 4·acos(√(3/8)) and K₂ = (−π/3, π/3) has measure 2π/3.
        let c = AtomicConfig::reference(1);
        let (set1, set2) = level_sets(&c, 1, 4.0 / 3.0, 2.0 / 3.0).unwrap();
        let expected1 = TAU - 4.0 * (3.0f64 / 8.0).sqrt().acos();
        assert!((set1.total() - expected1).abs() < 1e-9, "{}", set1.total());
        assert!((set1.total() - 2.636233).abs() < 1e-5);
        assert!((set2.total() - TAU / 3.0).abs() < 1e-9);
        let slack = ermers_audit(&c, 1, 4.0 / 3.0, 2.0 / 3.0).unwrap();
        assert!((slack - 3.719909).abs() < 1e-4, "slack {slack}");
    }

    #[test]
    fn level_sets_empty_k2_when_mass_large() {
        // Single atom with t = 2: min φ′ = 1 > (2/3)·1, so K₂ is empty.
        let c = AtomicConfig::new(1, &[(PI, 2.0)]).unwrap();
        let (_, set2) = level_sets(&c, 1, 4.0 / 3.0, 2.0 / 3.0).unwrap();
        assert!(set2.arcs.is_empty());
    }

    #[test]
    fn ermers_slack_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(131);
        let slack = ermers_audit(&AtomicConfig::reference(4), 4, 4.0 / 3.0, 2.0 / 3.0).unwrap();
        assert!(slack >= -1e-9);
        for _ in 0..10 {
            let c = random_config(&mut rng, 3, 6, 2.0);
            let slack = ermers_audit(&c, 3, 4.0 / 3.0, 2.0 / 3.0).unwrap();
            assert!(slack >= -1e-9, "slack {slack}");
        }
    }

    #[test]
    fn vdc_reference_two_passes() {
        let c = AtomicConfig::reference(2);
        let arcs = vdc_audit(&c, 2, 4.0 / 3.0).unwrap();
        assert!(!arcs.is_empty());
        let n_atoms = c.num_atoms() as f64;
        let sum: f64 = arcs.iter().map(|a| a.integral).sum();
        assert!(sum <= 4.0 * n_atoms / ((4.0 / 3.0 - 1.0) * 2.0) + 1e-6);
        for arc in &arcs {
            assert!(arc.passes(1e-6), "arc {:?}: {} > {}", arc.arc, arc.integral, arc.bound);
        }
    }

    #[test]
    fn vdc_random_configs_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(137);
        for _ in 0..3 {
            let c = random_config(&mut rng, 3, 4, 2.0);
            for arc in vdc_audit(&c, 3, 4.0 / 3.0).unwrap() {
                assert!(arc.passes(1e-6), "arc {:?}: {} > {}", arc.arc, arc.integral, arc.bound);
            }
        }
    }

    #[test]
    fn theorem1_constants() {
        let (k2, c) = theorem1_constant(4.0 / 3.0);
        assert!((k2 - 2.0 / 3.0).abs() < 1e-15);
        let expected = 2.0 * PI / 7.0 * (1.0 / E - 1.0 / 3.0);
        assert!((c - expected).abs() < 1e-12);
        assert!((c - 0.0310085146).abs() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(139);
        for _ in 0..20 {
            let k1 = rng.random_range(1.01..5.0);
            let (k2, _) = theorem1_constant(k1);
            assert!(k2 > 0.0 && k2 < 1.0);
            assert!((k2 - k1 / (k1 + k2)).abs() < 1e-12, "defining equation");
        }
    }

    #[test]
    fn fourier_coefficient_ties_to_series() {
        for n in 1..=4usize {
            let c = AtomicConfig::reference(n);
            let a_n = crate::series::coefficient_via_contour(&c, n, 0.5, 4096).unwrap();
            assert!((a_n - Complex64::new(2.0 / E, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn audit_report_serializes() {
        let report = audit(&AtomicConfig::reference(1), 1, 4.0 / 3.0).unwrap();
        assert!(report.all_pass);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("ermers_slack"));
        assert!(json.contains("K1"));
    }
}
