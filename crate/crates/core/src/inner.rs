//! Blaschke-product structure of the configuration.
//!
//! With g = log f and t = Σλ_j, the function h = (t+g)/(t−g) is a Blaschke
//! product of degree N vanishing at the origin. Writing q = ∏(1−α_jz) and
//! r = q·g (a polynomial, since each pole of g is cancelled), h is the
//! rational function (tq+r)/(tq−r). This module extracts h in factored form,
//! checks the derivative identity f′ = 2tf·h′/(h+1)², detects rotational and
//! Mobius invariance of f, counts rotation orbits, and evaluates the five
//! structural conditions that characterize extremal candidates.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{circular_distance, wrap_angle, AtomicConfig, TAU};
use crate::error::{Error, Result};
use crate::poly::{roots, ComplexPoly};
use crate::series::{f_series, series_exp, PowerSeries};

/// Sup tolerance for the rational form against the factored form on the
/// circle; exceeding it means root extraction lost the function.
const RATIONAL_MATCH_TOL: f64 = 1e-8;
/// Grid tolerance for |B| = 1 on the circle in the type invariant.
const CIRCLE_GRID_TOL: f64 = 1e-9;
/// How far a stored unimodular factor may sit from the circle.
const UNIMODULUS_TOL: f64 = 1e-12;
/// Weight agreement required when matching rotated atom multisets.
const WEIGHT_MATCH_TOL: f64 = 1e-9;
/// Angle agreement required when matching rotated atom multisets.
const ANGLE_MATCH_TOL: f64 = 1e-8;
/// Relative threshold below which a low-order coefficient counts as an
/// exact zero when reading off the order of vanishing at the origin.
const ORIGIN_ORDER_REL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Finite Blaschke products
// ---------------------------------------------------------------------------

/// ξ·∏ (z−z_j)/(1−conj(z_j)z) with |ξ| = 1 and all z_j in the open disk.
#[derive(Clone, Debug)]
pub struct BlaschkeProduct {
    unimodular: Complex64,
    zeros: Vec<Complex64>,
}

impl BlaschkeProduct {
    /// Validates |ξ| = 1 within [`UNIMODULUS_TOL`] (then normalizes it
    /// exactly), requires every zero strictly inside the disk, and checks
    /// |B| = 1 on a 64-point circle grid.
    pub fn new(unimodular: Complex64, zeros: Vec<Complex64>) -> Result<Self> {
        let m = unimodular.norm();
        if (m - 1.0).abs() > UNIMODULUS_TOL {
            return Err(Error::OffCircle {
                z: unimodular,
                defect: (m - 1.0).abs(),
            });
        }
        for (k, z) in zeros.iter().enumerate() {
            if z.norm() >= 1.0 {
                return Err(Error::invalid_argument(format!(
                    "Blaschke zero {k} has modulus {} >= 1",
                    z.norm()
                )));
            }
        }
        let b = BlaschkeProduct {
            unimodular: unimodular / m,
            zeros,
        };
        for k in 0..64 {
            let theta = TAU * k as f64 / 64.0;
            let v = b.eval(Complex64::from_polar(1.0, theta)).norm();
            if (v - 1.0).abs() > CIRCLE_GRID_TOL {
                return Err(Error::OffCircle {
                    z: Complex64::from_polar(1.0, theta),
                    defect: (v - 1.0).abs(),
                });
            }
        }
        Ok(b)
    }

    pub fn unimodular(&self) -> Complex64 {
        self.unimodular
    }

    /// Zeros with multiplicity; the degree is their count.
    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    /// Product evaluation. Safe on the closed disk: every factor denominator
    /// 1 − conj(z_j)z vanishes only at 1/conj(z_j), strictly outside.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = self.unimodular;
        for &w in &self.zeros {
            acc *= (z - w) / (Complex64::ONE - w.conj() * z);
        }
        acc
    }

    /// Taylor coefficients of the product through `order`, expanding each
    /// factor as (z−w)·Σ conj(w)^k z^k.
    pub fn series(&self, order: usize) -> PowerSeries {
        let mut acc = PowerSeries::new({
            let mut c = vec![Complex64::ZERO; order + 1];
            c[0] = self.unimodular;
            c
        });
        for &w in &self.zeros {
            let wc = w.conj();
            let mut coeffs = vec![Complex64::ZERO; order + 1];
            coeffs[0] = -w;
            let scale = Complex64::ONE - w * wc;
            let mut pow = Complex64::ONE;
            for c in coeffs.iter_mut().skip(1) {
                *c = pow * scale;
                pow *= wc;
            }
            acc = acc.mul_truncated(&PowerSeries::new(coeffs), order);
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Disk automorphisms
// ---------------------------------------------------------------------------

/// Disk automorphism fixing a: ψ = ψ₋ₐ ∘ (ξ·) ∘ ψₐ with ψₐ(z) = (z−a)/(1−conj(a)z),
/// which works out to ψ(z) = ((ξ−|a|²)z + a(1−ξ)) / (conj(a)(ξ−1)z + (1−|a|²ξ)).
#[derive(Clone, Debug)]
pub struct MobiusMap {
    a: Complex64,
    xi: Complex64,
}

impl MobiusMap {
    pub fn new(a: Complex64, xi: Complex64) -> Result<Self> {
        if a.norm() >= 1.0 {
            return Err(Error::invalid_argument(format!(
                "Mobius fixed point has modulus {} >= 1",
                a.norm()
            )));
        }
        let m = xi.norm();
        if (m - 1.0).abs() > UNIMODULUS_TOL {
            return Err(Error::OffCircle {
                z: xi,
                defect: (m - 1.0).abs(),
            });
        }
        Ok(MobiusMap { a, xi: xi / m })
    }

    pub fn identity() -> Self {
        MobiusMap {
            a: Complex64::ZERO,
            xi: Complex64::ONE,
        }
    }

    /// z ↦ e^{iτ}z.
    pub fn rotation(tau: f64) -> Self {
        MobiusMap {
            a: Complex64::ZERO,
            xi: Complex64::from_polar(1.0, tau),
        }
    }

    pub fn fixed_point(&self) -> Complex64 {
        self.a
    }

    pub fn rotation_factor(&self) -> Complex64 {
        self.xi
    }

    /// Coefficients (u, v, w, s) of ψ(z) = (uz+v)/(wz+s).
    pub fn coefficients(&self) -> (Complex64, Complex64, Complex64, Complex64) {
        let asq = self.a.norm_sqr();
        let u = self.xi - asq;
        let v = self.a * (Complex64::ONE - self.xi);
        let w = self.a.conj() * (self.xi - Complex64::ONE);
        let s = Complex64::ONE - asq * self.xi;
        (u, v, w, s)
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let (u, v, w, s) = self.coefficients();
        let den = w * z + s;
        if den.norm() < 1e-12 {
            return Err(Error::SmallDenominator {
                what: "Mobius denominator",
                z,
                magnitude: den.norm(),
            });
        }
        Ok((u * z + v) / den)
    }
}

// ---------------------------------------------------------------------------
// Extraction of h
// ---------------------------------------------------------------------------

/// q(z) = ∏ (1 − α_j z).
fn q_poly(config: &AtomicConfig) -> ComplexPoly {
    let mut acc = ComplexPoly::one();
    for alpha in config.alphas() {
        acc = acc.mul(&ComplexPoly::new(vec![Complex64::ONE, -alpha]));
    }
    acc
}

/// r(z) = q(z)·g(z) = −Σ_j λ_j (1+α_j z) ∏_{k≠j} (1−α_k z), a polynomial of
/// degree N because q cancels every pole of g.
fn r_poly(config: &AtomicConfig) -> ComplexPoly {
    let alphas = config.alphas();
    let mut acc = ComplexPoly::constant(Complex64::ZERO);
    for (j, atom) in config.atoms().iter().enumerate() {
        let mut term = ComplexPoly::new(vec![Complex64::ONE, alphas[j]]);
        for (k, &alpha) in alphas.iter().enumerate() {
            if k != j {
                term = term.mul(&ComplexPoly::new(vec![Complex64::ONE, -alpha]));
            }
        }
        acc = acc.add(&term.scaled(Complex64::new(-atom.lambda, 0.0)));
    }
    acc
}

/// Numerator and denominator of h: (tq + r, tq − r). The constant term of
/// the numerator cancels exactly (both sides accumulate Σλ_j in atom order),
/// so h(0) = 0 holds to the last bit.
pub fn h_fraction(config: &AtomicConfig) -> (ComplexPoly, ComplexPoly) {
    let t = Complex64::new(config.total_mass(), 0.0);
    let q = q_poly(config);
    let r = r_poly(config);
    let tq = q.scaled(t);
    (tq.add(&r), tq.sub(&r))
}

/// Factored form of h: finds the N zeros of tq + r, reads the unimodular
/// factor off a circle sample, and cross-checks the factored form against
/// the rational form at 32 circle points.
pub fn blaschke_h(config: &AtomicConfig) -> Result<BlaschkeProduct> {
    let n_atoms = config.num_atoms();
    let (num, den) = h_fraction(config);
    let zeros = roots(&num)?;
    let inside = zeros.iter().filter(|z| z.norm() < 1.0).count();
    if inside != n_atoms {
        let worst = zeros.iter().map(|z| z.norm()).fold(0.0, f64::max);
        return Err(Error::BlaschkeDegreeMismatch {
            expected: n_atoms,
            found: inside,
            residual: worst - 1.0,
        });
    }

    // Unimodular factor from the healthiest of a few circle samples: the one
    // keeping the denominator and every product factor well away from zero.
    let mut best: Option<(f64, Complex64)> = None;
    for k in 0..17 {
        let w = Complex64::from_polar(1.0, TAU * (k as f64 + 0.37) / 17.0);
        let d = den.eval(w);
        let mut health = d.norm();
        let mut product = Complex64::ONE;
        for &z in &zeros {
            let factor_den = Complex64::ONE - z.conj() * w;
            health = health.min(factor_den.norm());
            product *= (w - z) / factor_den;
        }
        if product.norm() < 1e-12 {
            continue;
        }
        let xi = num.eval(w) / d / product;
        if best.as_ref().is_none_or(|(h, _)| health > *h) {
            best = Some((health, xi));
        }
    }
    let Some((_, xi_raw)) = best else {
        return Err(Error::invalid_argument(
            "no usable circle sample for the unimodular factor",
        ));
    };
    if (xi_raw.norm() - 1.0).abs() > RATIONAL_MATCH_TOL {
        return Err(Error::BlaschkeDegreeMismatch {
            expected: n_atoms,
            found: inside,
            residual: (xi_raw.norm() - 1.0).abs(),
        });
    }
    let b = BlaschkeProduct::new(xi_raw / xi_raw.norm(), zeros)?;

    let mut worst = 0.0f64;
    for k in 0..32 {
        let w = Complex64::from_polar(1.0, TAU * (k as f64 + 0.11) / 32.0);
        let d = den.eval(w);
        if d.norm() < 1e-9 * den.max_coeff_norm() {
            continue;
        }
        worst = worst.max((num.eval(w) / d - b.eval(w)).norm());
    }
    if worst > RATIONAL_MATCH_TOL {
        return Err(Error::BlaschkeDegreeMismatch {
            expected: n_atoms,
            found: inside,
            residual: worst,
        });
    }
    Ok(b)
}

/// Residual f′(z) − 2tf(z)h′(z)/(h(z)+1)², with f and f′ from the Taylor
/// series and h from the rational form. Accuracy degrades as |z| → 1; the
/// series order adapts to |z| and is capped at 4096 terms.
pub fn check_fprime_relation(config: &AtomicConfig, z: Complex64) -> Result<Complex64> {
    let az = z.norm();
    if az >= 1.0 {
        return Err(Error::invalid_argument(format!(
            "evaluation point has modulus {az} >= 1"
        )));
    }
    let (num, den) = h_fraction(config);
    let (a, da) = num.eval_with_derivative(z);
    let (b, db) = den.eval_with_derivative(z);
    if b.norm() < 1e-12 * den.max_coeff_norm().max(1.0) {
        return Err(Error::SmallDenominator {
            what: "tq - r",
            z,
            magnitude: b.norm(),
        });
    }
    let h = a / b;
    let h1 = h + Complex64::ONE;
    if h1.norm() < 1e-8 {
        return Err(Error::SmallDenominator {
            what: "h + 1",
            z,
            magnitude: h1.norm(),
        });
    }
    let hp = (da * b - a * db) / (b * b);

    // Tail of Σ (j+1)|z|^j below 1e-16 decides the truncation order.
    let mut order = 64usize;
    while order < 4096 && az.powi(order as i32) * (order as f64 + 2.0) / (1.0 - az) > 1e-16 {
        order *= 2;
    }
    let f = f_series(config, order);
    let lhs = f.derivative().eval(z);
    let rhs = 2.0 * config.total_mass() * f.eval(z) * hp / (h1 * h1);
    Ok(lhs - rhs)
}

// ---------------------------------------------------------------------------
// Rotational invariance
// ---------------------------------------------------------------------------

/// Whether rotating every atom angle by τ reproduces the atom multiset,
/// weights matched within [`WEIGHT_MATCH_TOL`].
fn invariant_under(config: &AtomicConfig, tau: f64) -> bool {
    let atoms = config.atoms();
    atoms.iter().all(|a| {
        let target = wrap_angle(a.theta + tau);
        atoms.iter().any(|b| {
            circular_distance(b.theta, target) <= ANGLE_MATCH_TOL
                && (b.lambda - a.lambda).abs() <= WEIGHT_MATCH_TOL
        })
    })
}

/// Rotation angles τ ∈ [0, 2π) whose rotation preserves the atom multiset,
/// sorted ascending; always starts with 0.
fn invariant_rotation_angles(config: &AtomicConfig) -> Vec<f64> {
    let atoms = config.atoms();
    let base = atoms[0];
    let mut taus = vec![0.0];
    for atom in atoms.iter().skip(1) {
        // A symmetry must send the first atom to an atom of equal weight, so
        // these differences exhaust the candidates.
        if (atom.lambda - base.lambda).abs() > WEIGHT_MATCH_TOL {
            continue;
        }
        let tau = wrap_angle(atom.theta - base.theta);
        if taus.iter().any(|&t| circular_distance(t, tau) <= 1e-9) {
            continue;
        }
        if invariant_under(config, tau) {
            taus.push(tau);
        }
    }
    taus.sort_by(f64::total_cmp);
    taus
}

/// All circle factors ξ = e^{iτ} for which the rotated atom multiset equals
/// the original; ξ = 1 is always present.
pub fn rotation_invariants(config: &AtomicConfig) -> Vec<Complex64> {
    invariant_rotation_angles(config)
        .into_iter()
        .map(|tau| Complex64::from_polar(1.0, tau))
        .collect()
}

/// Number of distinct configurations among the rotations by 2πj/n for
/// j = 1..n. The invariant j form a subgroup of Z_n, so this is n divided
/// by the count of invariant rotations.
pub fn rotation_orbit_count(config: &AtomicConfig) -> usize {
    let n = config.n();
    let fixed = (1..=n)
        .filter(|&j| invariant_under(config, TAU * j as f64 / n as f64))
        .count();
    n / fixed.max(1)
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// If the configuration has a nontrivial rotational symmetry, a nontrivially
/// invariant extremal candidate must have gcd(N, n) > 1; returns that gcd and
/// whether the requirement holds. Without such a symmetry returns (1, true).
pub fn gcd_certificate(config: &AtomicConfig) -> (usize, bool) {
    let nontrivial = invariant_rotation_angles(config)
        .iter()
        .any(|&tau| tau > 1e-9 && tau < TAU - 1e-9);
    if !nontrivial {
        return (1, true);
    }
    let g = gcd(config.num_atoms(), config.n());
    (g, g > 1)
}

// ---------------------------------------------------------------------------
// Mobius invariance of f
// ---------------------------------------------------------------------------

/// Taylor coefficients of f∘ψ through `order`. Each atom term
/// −λ(1+αψ)/(1−αψ) becomes −λ(Pz+Q)/(Cz+D) with |C/D| = 1 (the pole sits on
/// the circle), so the geometric expansion keeps unit-modulus powers and the
/// coefficients come out exact; the exponential is applied last.
pub fn compose_f_series(
    config: &AtomicConfig,
    psi: &MobiusMap,
    order: usize,
) -> Result<PowerSeries> {
    let (u, v, w, s) = psi.coefficients();
    let mut log_coeffs = vec![Complex64::ZERO; order + 1];
    for atom in config.atoms() {
        let alpha = atom.alpha();
        let p = w + alpha * u;
        let q = s + alpha * v;
        let c = w - alpha * u;
        let d = s - alpha * v;
        if d.norm() < 1e-12 {
            return Err(Error::SmallDenominator {
                what: "composed atom denominator",
                z: Complex64::ZERO,
                magnitude: d.norm(),
            });
        }
        let lambda = Complex64::new(-atom.lambda, 0.0);
        let ratio = -c / d;
        log_coeffs[0] += lambda * (q / d);
        let step = (p + q * ratio) / d;
        let mut pow = Complex64::ONE;
        for lc in log_coeffs.iter_mut().skip(1) {
            *lc += lambda * step * pow;
            pow *= ratio;
        }
    }
    Ok(series_exp(&PowerSeries::new(log_coeffs)))
}

/// Whether the Taylor coefficients of f∘ψ agree with those of f through
/// `order` within 1e−8. Callers should take `order` ≥ 2n.
pub fn mobius_invariance_check(
    config: &AtomicConfig,
    psi: &MobiusMap,
    order: usize,
) -> Result<bool> {
    let composed = compose_f_series(config, psi, order)?;
    let direct = f_series(config, order);
    let sup = (0..=order)
        .map(|j| (composed.coeff(j) - direct.coeff(j)).norm())
        .fold(0.0, f64::max);
    Ok(sup <= 1e-8)
}

// ---------------------------------------------------------------------------
// Structural conditions
// ---------------------------------------------------------------------------

/// Winding number of θ ↦ map(θ) over [0, 2π), with sample doubling until two
/// passes agree. `guard` rejects passes that step too close to the origin.
fn circle_winding<F: Fn(f64) -> Complex64>(map: F, guard: f64) -> Result<i64> {
    let mut samples = 64usize;
    let mut previous_count: Option<i64> = None;
    while samples <= (1 << 22) {
        let mut prev = map(0.0);
        if prev.norm() <= guard {
            return Err(Error::CircleVanishing {
                theta: 0.0,
                magnitude: prev.norm(),
            });
        }
        let mut total = 0.0;
        for k in 1..=samples {
            let theta = TAU * k as f64 / samples as f64;
            let v = map(theta);
            if v.norm() <= guard {
                return Err(Error::CircleVanishing {
                    theta,
                    magnitude: v.norm(),
                });
            }
            total += (v / prev).arg();
            prev = v;
        }
        let count = (total / TAU).round() as i64;
        if previous_count == Some(count) {
            return Ok(count);
        }
        previous_count = Some(count);
        samples *= 2;
    }
    Err(Error::invalid_argument(
        "winding count failed to stabilize under sample doubling",
    ))
}

/// Zeros of p in the open unit disk, counted with multiplicity by the
/// argument principle on the circle.
fn zeros_in_disk(p: &ComplexPoly) -> Result<i64> {
    let guard = 1e-10 * p.max_coeff_norm().max(1.0);
    circle_winding(|theta| p.eval(Complex64::from_polar(1.0, theta)), guard)
}

/// Order of vanishing at the origin, reading coefficients below
/// [`ORIGIN_ORDER_REL`]·max as exact zeros.
fn origin_order(p: &ComplexPoly) -> usize {
    let cut = ORIGIN_ORDER_REL * p.max_coeff_norm();
    p.coeffs()
        .iter()
        .position(|c| c.norm() > cut)
        .unwrap_or(p.coeffs().len())
}

/// Whether every zero of p inside the open disk sits at the origin: the
/// winding count must equal the order of vanishing at 0. Robust against the
/// root-cluster scatter of multiple origin zeros.
fn disk_zeros_only_at_origin(p: &ComplexPoly) -> Result<bool> {
    let trimmed = p.trimmed();
    if trimmed.degree() == 0 {
        return Ok(true);
    }
    Ok(zeros_in_disk(&trimmed)? == origin_order(&trimmed) as i64)
}

/// Degree d = n/3 rounded up from (n−2)/3: the number of leading
/// coefficients pinned by the fifth condition.
fn condition5_range(n: usize) -> usize {
    if n < 3 {
        0
    } else {
        n / 3
    }
}

/// One of the five structural conditions on an extremal candidate:
/// 1. f(e^{iθ}z) = f(z) for some θ ∈ (0, 4π/n);
/// 2. g(z) = g(0) only at z = 0, via the zeros of tq + r in the disk;
/// 3. f′ nonvanishing on the punctured disk, via the zeros of r′q − rq′;
/// 4. a_j = 0 for 1 ≤ j ≤ N−1;
/// 5. a_j = 0 for 1 ≤ j ≤ ⌈(n−2)/3⌉.
/// `tol` is the numerical-zero threshold for the coefficient checks.
pub fn krzyz_condition_check(config: &AtomicConfig, which: u8, tol: f64) -> Result<bool> {
    let n = config.n();
    match which {
        1 => {
            // The trivial rotation lifts to τ = 2π, inside (0, 4π/n) iff n = 1.
            if n == 1 {
                return Ok(true);
            }
            let limit = 2.0 * TAU / n as f64;
            Ok(invariant_rotation_angles(config)
                .iter()
                .any(|&tau| tau > 1e-9 && tau < limit))
        }
        2 => {
            let (num, _) = h_fraction(config);
            disk_zeros_only_at_origin(&num)
        }
        3 => {
            let q = q_poly(config);
            let r = r_poly(config);
            let w3 = r.derivative().mul(&q).sub(&r.mul(&q.derivative()));
            disk_zeros_only_at_origin(&w3)
        }
        4 => {
            let upper = config.num_atoms().saturating_sub(1);
            let f = f_series(config, upper);
            Ok((1..=upper).all(|j| f.coeff(j).norm() < tol))
        }
        5 => {
            let upper = condition5_range(n);
            let f = f_series(config, upper);
            Ok((1..=upper).all(|j| f.coeff(j).norm() < tol))
        }
        _ => Err(Error::invalid_argument(format!(
            "condition index {which} is not in 1..=5"
        ))),
    }
}

/// All five conditions at once.
pub fn krzyz_conditions(config: &AtomicConfig, tol: f64) -> Result<[bool; 5]> {
    let mut out = [false; 5];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = krzyz_condition_check(config, (k + 1) as u8, tol)?;
    }
    Ok(out)
}

/// Numerically-extracted degree of outer∘inner as a circle map; for finite
/// Blaschke products this equals the product of the degrees.
pub fn composition_degree(outer: &BlaschkeProduct, inner: &BlaschkeProduct) -> Result<i64> {
    circle_winding(
        |theta| outer.eval(inner.eval(Complex64::from_polar(1.0, theta))),
        1e-10,
    )
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

/// Serializable summary of the invariance structure of one configuration.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantsReport {
    /// Invariant rotation angles τ in [0, 2π), ascending.
    pub rotations: Vec<f64>,
    pub orbit_count: usize,
    pub gcd: usize,
    /// Condition index ("1".."5") to verdict.
    pub conditions: BTreeMap<String, bool>,
}

impl InvariantsReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn invariants_report(config: &AtomicConfig, tol: f64) -> Result<InvariantsReport> {
    let verdicts = krzyz_conditions(config, tol)?;
    let mut conditions = BTreeMap::new();
    for (k, &v) in verdicts.iter().enumerate() {
        conditions.insert((k + 1).to_string(), v);
    }
    Ok(InvariantsReport {
        rotations: invariant_rotation_angles(config),
        orbit_count: rotation_orbit_count(config),
        gcd: gcd_certificate(config).0,
        conditions,
    })
}

// ---------------------------------------------------------------------------
