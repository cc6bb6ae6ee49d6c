//! Coefficient identities satisfied by extremal configurations, the closed
//! rational formulas for g and zg′ in terms of P and Q, the boundary-phase
//! formulas they imply, first-order stationarity residuals, and the root
//! counting lower bound N ≥ m.
//!
//! All formulas here are gauge-fixed: they hold in the rotation where a_n
//! is real and positive, so every entry point normalizes its input first.

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{AtomicConfig, TAU};
use crate::error::{Error, Result};
use crate::optimizer::normalize_rotation;
use crate::poly::{build_p_from, build_q, roots, ComplexPoly};
use crate::series::{eval_g, eval_g_prime, f_series, g_series};

/// Which of the two §3 identity families to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IdentityKind {
    Base,
    Derivative,
}

/// b with the reflection convention b_{−j} = conj(b_j).
fn b_at(b: &[Complex64], idx: i64) -> Complex64 {
    if idx >= 0 {
        b[idx as usize]
    } else {
        b[(-idx) as usize].conj()
    }
}

/// LHS − RHS of the identity family at shift r:
///
/// base:       Σ_{j=0}^n a_{n−j} b_{r+j} = −Σ_{j=1}^n conj(a_{n−j}) b_{r−j}
///                                          − conj(a_{n−r}) b₀ · χ_{0..n}(r)
/// derivative: Σ_{j=1}^n j·a_{n−j} b_{r+j} = Σ_{j=1}^n j·conj(a_{n−j}) b_{r−j}
///                                          + r·conj(a_{n−r}) b₀ · χ_{1..n}(r)
///
/// Both vanish at stationary configurations (in the normalized gauge).
pub fn residual_identity(config: &AtomicConfig, r: usize, kind: IdentityKind) -> Complex64 {
    let config = normalize_rotation(config).config;
    let n = config.n();
    let b_series = g_series(&config, n + r);
    let b = b_series.coeffs();
    let a_series = f_series(&config, n);
    let a = a_series.coeffs();
    let ri = r as i64;

    match kind {
        IdentityKind::Base => {
            let mut lhs = Complex64::ZERO;
            for j in 0..=n {
                lhs += a[n - j] * b_at(b, ri + j as i64);
            }
            let mut rhs = Complex64::ZERO;
            for j in 1..=n {
                rhs -= a[n - j].conj() * b_at(b, ri - j as i64);
            }
            if r <= n {
                rhs -= a[n - r].conj() * b[0];
            }
            lhs - rhs
        }
        IdentityKind::Derivative => {
            let mut lhs = Complex64::ZERO;
            for j in 1..=n {
                lhs += j as f64 * a[n - j] * b_at(b, ri + j as i64);
            }
            let mut rhs = Complex64::ZERO;
            for j in 1..=n {
                rhs += j as f64 * a[n - j].conj() * b_at(b, ri - j as i64);
            }
            if (1..=n).contains(&r) {
                rhs += r as f64 * a[n - r].conj() * b[0];
            }
            lhs - rhs
        }
    }
}

/// Numerator/denominator polynomials of the rational g formula:
/// den(z) = zⁿP(1/z) + zⁿ·conj-coeff P(z), assembled coefficientwise.
fn theorem_x_parts(config: &AtomicConfig) -> (ComplexPoly, ComplexPoly, ComplexPoly, usize) {
    let normalized = normalize_rotation(config).config;
    let n = normalized.n();
    let p = build_p_from(&normalized);
    let q = build_q(&normalized);
    let num_g = q.reversed(n).sub(&q.conj_coeffs().shifted_up(n));
    let den = p.reversed(n).add(&p.conj_coeffs().shifted_up(n));
    let dp = p.derivative();
    let num_d = dp.reversed(n - 1).add(&dp.conj_coeffs().shifted_up(n + 1));
    (num_g, num_d, den, n)
}

/// g(z) from the boundary polynomials:
/// (zⁿQ(1/z) − zⁿ·conj Q(z̄)) / (zⁿP(1/z) + zⁿ·conj P(z̄)).
/// Exact at stationary configurations.
pub fn g_from_pq(config: &AtomicConfig, z: Complex64) -> Result<Complex64> {
    let (num_g, _, den, _) = theorem_x_parts(config);
    let d = den.eval(z);
    if d.norm() < 1e-12 {
        return Err(Error::SmallDenominator {
            what: "g_from_pq",
            z,
            magnitude: d.norm(),
        });
    }
    Ok(num_g.eval(z) / d)
}

/// zg′(z) = n − (z^{n−1}P′(1/z) + z^{n+1}·conj P′(z̄)) / (zⁿP(1/z) + zⁿ·conj P(z̄)).
pub fn zgprime_from_p(config: &AtomicConfig, z: Complex64) -> Result<Complex64> {
    let (_, num_d, den, n) = theorem_x_parts(config);
    let d = den.eval(z);
    if d.norm() < 1e-12 {
        return Err(Error::SmallDenominator {
            what: "zgprime_from_p",
            z,
            magnitude: d.norm(),
        });
    }
    Ok(Complex64::new(n as f64, 0.0) - num_d.eval(z) / d)
}

/// φ(θ) = Im Q(e^{−iθ}) / Re P(e^{−iθ}) at stationary configurations.
pub fn phi_from_pq(config: &AtomicConfig, theta: f64) -> Result<f64> {
    let normalized = normalize_rotation(config).config;
    let p = build_p_from(&normalized);
    let q = build_q(&normalized);
    let w = Complex64::from_polar(1.0, -theta);
    let re_p = p.eval(w).re;
    if re_p.abs() < 1e-12 {
        return Err(Error::SmallDenominator {
            what: "phi_from_pq",
            z: w,
            magnitude: re_p.abs(),
        });
    }
    Ok(q.eval(w).im / re_p)
}

/// φ′(θ) = n − Re(e^{−iθ}P′(e^{−iθ})) / Re P(e^{−iθ}).
pub fn phi_prime_from_p(config: &AtomicConfig, theta: f64) -> Result<f64> {
    let normalized = normalize_rotation(config).config;
    let n = normalized.n();
    let p = build_p_from(&normalized);
    let w = Complex64::from_polar(1.0, -theta);
    let re_p = p.eval(w).re;
    if re_p.abs() < 1e-12 {
        return Err(Error::SmallDenominator {
            what: "phi_prime_from_p",
            z: w,
            magnitude: re_p.abs(),
        });
    }
    Ok(n as f64 - (w * p.eval_with_derivative(w).1).re / re_p)
}

/// Per-atom stationarity residuals in the normalized gauge: Re P(αₖ) and
/// Im(αₖ·P′(αₖ)), both zero at extremal configurations.
#[derive(Clone, Debug, Serialize)]
pub struct StationarityReport {
    /// (Re P(αₖ), Im(αₖP′(αₖ))) per atom of the normalized config.
    pub per_atom: Vec<(f64, f64)>,
    pub max_residual: f64,
}

pub fn first_order_conditions(config: &AtomicConfig) -> StationarityReport {
    let normalized = normalize_rotation(config).config;
    let p = build_p_from(&normalized);
    let mut per_atom = Vec::with_capacity(normalized.num_atoms());
    let mut max_residual = 0.0f64;
    for alpha in normalized.alphas() {
        let (v, d) = p.eval_with_derivative(alpha);
        let re_p = v.re;
        let im_t = (alpha * d).im;
        max_residual = max_residual.max(re_p.abs()).max(im_t.abs());
        per_atom.push((re_p, im_t));
    }
    StationarityReport {
        per_atom,
        max_residual,
    }
}

/// Root-count lower bound on the number of atoms: zP′(z) has m zeros in
/// the open disk, and N ≥ m at extremal configurations.
#[derive(Clone, Debug, Serialize)]
pub struct NLowerBound {
    /// 1 (the zero of the z factor) + zeros of P′ strictly inside D.
    pub m: usize,
    /// N ≥ m.
    pub ok: bool,
    /// All n−1 zeros of P′ lie in D, the trigger for N = n.
    pub all_in_disk: bool,
    /// Some zero of P′ sits within 1e−6 of the circle; m excludes it.
    pub boundary_ambiguous: bool,
}

pub fn n_lower_bound(config: &AtomicConfig) -> Result<NLowerBound> {
    let normalized = normalize_rotation(config).config;
    let n = normalized.n();
    let dp = build_p_from(&normalized).derivative();
    let zeros = if n == 1 { Vec::new() } else { roots(&dp)? };
    let mut inside = 0usize;
    let mut boundary_ambiguous = false;
    for z in &zeros {
        let m = z.norm();
        if m < 1.0 - 1e-6 {
            inside += 1;
        } else if m < 1.0 + 1e-6 {
            boundary_ambiguous = true;
        }
    }
    let m = 1 + inside;
    Ok(NLowerBound {
        m,
        ok: normalized.num_atoms() >= m,
        all_in_disk: inside == n.saturating_sub(1),
        boundary_ambiguous,
    })
}

/// Bundled verification report for one configuration.
#[derive(Clone, Debug, Serialize)]
pub struct VariationalReport {
    pub stationarity: StationarityReport,
    pub identities: Vec<IdentityEntry>,
    pub thmx_sup_error: f64,
    pub m_lower_bound: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityEntry {
    pub r: usize,
    pub kind: IdentityKind,
    pub abs: f64,
}

/// Max deviation of the rational g and zg′ formulas from direct closed-form
/// evaluation over a deterministic set of interior sample points.
pub fn theorem_x_sup_error(config: &AtomicConfig, samples: usize) -> Result<f64> {
    let normalized = normalize_rotation(config).config;
    let (num_g, num_d, den, n) = theorem_x_parts(&normalized);
    let mut sup = 0.0f64;
    for k in 0..samples {
        let radius = 0.9 * (k as f64 + 0.5) / samples as f64;
        let angle = TAU * ((k as f64 * 0.618_033_988_749_894_8) % 1.0);
        let z = Complex64::from_polar(radius, angle);
        let d = den.eval(z);
        if d.norm() < 1e-9 {
            continue;
        }
        let g_rat = num_g.eval(z) / d;
        let g_dir = eval_g(&normalized, z);
        sup = sup.max((g_rat - g_dir).norm());
        let zg_rat = Complex64::new(n as f64, 0.0) - num_d.eval(z) / d;
        let zg_dir = z * eval_g_prime(&normalized, z);
        sup = sup.max((zg_rat - zg_dir).norm());
    }
    Ok(sup)
}

pub fn report(config: &AtomicConfig) -> Result<VariationalReport> {
    let n = config.n();
    let mut identities = Vec::new();
    for r in 0..=2 * n {
        for kind in [IdentityKind::Base, IdentityKind::Derivative] {
            identities.push(IdentityEntry {
                r,
                kind,
                abs: residual_identity(config, r, kind).norm(),
            });
        }
    }
    Ok(VariationalReport {
        stationarity: first_order_conditions(config),
        identities,
        thmx_sup_error: theorem_x_sup_error(config, 100)?,
        m_lower_bound: n_lower_bound(config)?.m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary;
    use crate::config::circular_distance;
    use crate::poly::winding_number;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{E, PI};

    fn perturbed_reference(n: usize) -> AtomicConfig {
        let mut atoms: Vec<(f64, f64)> = AtomicConfig::reference(n)
            .atoms()
            .iter()
            .map(|a| (a.theta, a.lambda))
            .collect();
        atoms[0].0 += 0.1;
        AtomicConfig::new(n, &atoms).unwrap()
    }

    #[test]
    fn identity_components_hand_values_n1() {
        // Explicit sums for the single-atom extremal: b₀=−1, bⱼ=−2(−1)ʲ,
        // a₀=1/e, a₁=2/e. Base r=1: both sides are 2/e; derivative r=1:
        // both sides are −2/e.
        let c = AtomicConfig::reference(1);
        let b = g_series(&c, 3);
        let a = f_series(&c, 1);
        let lhs_base =
            a.coeff(1) * b.coeff(1) + a.coeff(0) * b.coeff(2);
        assert!((lhs_base - Complex64::new(2.0 / E, 0.0)).norm() < 1e-13);
        let lhs_deriv = a.coeff(0) * b.coeff(2);
        assert!((lhs_deriv - Complex64::new(-2.0 / E, 0.0)).norm() < 1e-13);
        assert!(residual_identity(&c, 1, IdentityKind::Base).norm() < 1e-13);
        assert!(residual_identity(&c, 1, IdentityKind::Derivative).norm() < 1e-13);
    }

    #[test]
    fn identities_vanish_at_reference() {
        for n in 1..=6usize {
            let c = AtomicConfig::reference(n);
            for r in 0..=2 * n {
                for kind in [IdentityKind::Base, IdentityKind::Derivative] {
                    let res = residual_identity(&c, r, kind).norm();
                    assert!(res <= 1e-10, "n={n} r={r} {kind:?}: {res:.2e}");
                }
            }
        }
    }

    #[test]
    fn identities_detect_non_stationary() {
        let c = perturbed_reference(3);
        let max: f64 = (0..=6)
            .map(|r| residual_identity(&c, r, IdentityKind::Base).norm())
            .fold(0.0, f64::max);
        assert!(max > 1e-3, "identities should not be vacuous: {max:.2e}");
    }

    #[test]
    fn identities_are_gauge_fixed() {
        // A rotated extremal is still stationary; normalization inside
        // residual_identity must absorb the gauge.
        let c = AtomicConfig::reference(2).rotated(0.37);
        for r in 0..=4 {
            assert!(residual_identity(&c, r, IdentityKind::Derivative).norm() < 1e-10);
        }
    }

    #[test]
    fn g_formula_reference_one() {
        let c = AtomicConfig::reference(1);
        let g0 = g_from_pq(&c, Complex64::ZERO).unwrap();
        assert!((g0 - Complex64::new(-1.0, 0.0)).norm() < 1e-13);
        let g3 = g_from_pq(&c, Complex64::new(0.3, 0.0)).unwrap();
        assert!((g3 - Complex64::new(-7.0 / 13.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn g_formula_reference_general() {
        for n in 1..=6usize {
            let c = AtomicConfig::reference(n);
            let z = Complex64::from_polar(0.5, PI / 7.0);
            let zn = z.powu(n as u32);
            let expected = (zn - 1.0) / (zn + 1.0);
            let got = g_from_pq(&c, z).unwrap();
            assert!((got - expected).norm() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn zgprime_reference_values() {
        let c = AtomicConfig::reference(1);
        assert!(zgprime_from_p(&c, Complex64::ZERO).unwrap().norm() < 1e-13);
        let v = zgprime_from_p(&c, Complex64::new(0.5, 0.0)).unwrap();
        assert!((v - Complex64::new(4.0 / 9.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn theorem_x_matches_direct_evaluation() {
        for n in 1..=6usize {
            let c = AtomicConfig::reference(n);
            let sup = theorem_x_sup_error(&c, 100).unwrap();
            assert!(sup <= 1e-8, "n={n}: sup {sup:.2e}");
        }
    }

    #[test]
    fn zgprime_matches_series_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(211);
        let c = AtomicConfig::reference(3);
        let gs = g_series(&c, 320).derivative();
        for _ in 0..100 {
            let z = Complex64::from_polar(rng.random_range(0.0..0.9), rng.random_range(0.0..TAU));
            let rational = zgprime_from_p(&c, z).unwrap();
            let series = z * gs.eval(z);
            assert!((rational - series).norm() < 1e-8);
        }
    }

    #[test]
    fn phi_formulas_match_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(223);
        for n in 1..=6usize {
            let c = AtomicConfig::reference(n);
            let mut checked = 0;
            while checked < 200 {
                let theta = rng.random_range(0.0..TAU);
                if c.atoms().iter().any(|a| circular_distance(theta, a.theta) < 1e-2) {
                    continue;
                }
                checked += 1;
                let direct = boundary::phi(&c, theta).unwrap();
                if direct.abs() > 1e5 {
                    continue;
                }
                let from_pq = phi_from_pq(&c, theta).unwrap();
                assert!(
                    (direct - from_pq).abs() < 1e-8 * (1.0 + direct.abs()),
                    "n={n} theta={theta}: {direct} vs {from_pq}"
                );
                let dp_direct = boundary::phi_prime(&c, theta).unwrap();
                let dp_pq = phi_prime_from_p(&c, theta).unwrap();
                assert!((dp_direct - dp_pq).abs() < 1e-8 * (1.0 + dp_direct.abs()));
            }
        }
    }

    #[test]
    fn phi_from_pq_hand_values() {
        let c = AtomicConfig::reference(1);
        let v = phi_from_pq(&c, PI / 2.0).unwrap();
        assert!((v - 1.0).abs() < 1e-13);
        let d = phi_prime_from_p(&c, 0.0).unwrap();
        assert!((d - 0.5).abs() < 1e-13);
        assert!(matches!(
            phi_from_pq(&c, PI),
            Err(Error::SmallDenominator { .. })
        ));
    }

    #[test]
    fn stationarity_reference_and_perturbed() {
        for n in 1..=6usize {
            let report = first_order_conditions(&AtomicConfig::reference(n));
            assert!(report.max_residual < 1e-12, "n={n}: {}", report.max_residual);
        }
        let report = first_order_conditions(&perturbed_reference(3));
        assert!(report.max_residual > 1e-3);
    }

    #[test]
    fn n_lower_bound_reference() {
        for n in 1..=6usize {
            let b = n_lower_bound(&AtomicConfig::reference(n)).unwrap();
            assert_eq!(b.m, n);
            assert!(b.ok);
            assert!(b.all_in_disk);
            assert!(!b.boundary_ambiguous);
        }
    }

    #[test]
    fn m_matches_winding_number() {
        for n in 1..=5usize {
            let c = AtomicConfig::reference(n);
            let normalized = crate::optimizer::normalize_rotation(&c).config;
            let dp = build_p_from(&normalized).derivative();
            let m = n_lower_bound(&c).unwrap().m;
            if n == 1 {
                assert_eq!(m, 1);
                continue;
            }
            let w = winding_number(&dp, 256).unwrap();
            assert_eq!(w, m as i64, "n={n}");
        }
    }

    #[test]
    fn report_serializes() {
        let r = report(&AtomicConfig::reference(2)).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("stationarity"));
        assert!(json.contains("thmx_sup_error"));
        assert!(r.identities.iter().all(|e| e.abs < 1e-10));
    }
}
