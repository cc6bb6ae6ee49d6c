//! One-shot verification battery for a single configuration.
//!
//! Required checks are the ones a purportedly extremal configuration must
//! satisfy (stationarity, coefficient identities, the rational formulas,
//! universal series bounds); informational checks describe structure that
//! only special configurations have (symmetry conditions, representation by
//! circle zeros, annulus containment) and never gate the overall verdict.

use serde::Serialize;
use std::f64::consts::PI;

use crate::boundary::{negativity_measure, phi, phi_prime};
use crate::config::{circular_distance, AtomicConfig, TAU};
use crate::inner::{
    blaschke_h, check_fprime_relation, gcd_certificate, krzyz_condition_check,
    rotation_invariants, rotation_orbit_count,
};
use crate::poly::annulus_radius;
use crate::reconstruct::rep_zero_match;
use crate::series::{f_series, g_series};
use crate::special::mass_bounds_check;
use crate::variational::{
    first_order_conditions, residual_identity, theorem_x_sup_error, IdentityKind,
};
use num_complex::Complex64;

const IDENTITY_TOL: f64 = 1e-8;
const FORMULA_TOL: f64 = 1e-8;
const CONDITION_TOL: f64 = 1e-8;

/// Outcome of one named check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub required: bool,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, required: bool, passed: bool, detail: String) -> Self {
        CheckResult {
            name: name.to_string(),
            required,
            passed,
            detail,
        }
    }
}

/// Full battery outcome; `all_required_passed` is the process exit signal.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
    pub all_required_passed: bool,
    pub stationarity_tol: f64,
}

impl VerificationReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check_stationarity(config: &AtomicConfig, tol: f64) -> CheckResult {
    let report = first_order_conditions(config);
    CheckResult::new(
        "stationarity",
        true,
        report.max_residual <= tol,
        format!("max residual {:.3e} (tol {:.1e})", report.max_residual, tol),
    )
}

fn check_series_contracts(config: &AtomicConfig) -> CheckResult {
    let order = (4 * config.n()).max(64);
    let a = f_series(config, order);
    let t = config.total_mass();
    let a0_err = (a.coeff(0).re - (-t).exp()).abs() + a.coeff(0).im.abs();
    let mass = a.l2_norm_sq();
    let passed = a0_err <= 1e-12 * (1.0 + (-t).exp()) && mass <= 1.0 + 1e-9;
    CheckResult::new(
        "series_contracts",
        true,
        passed,
        format!("|a0 - e^-t| = {:.3e}, sum |a_j|^2 = {:.12}", a0_err, mass),
    )
}

fn check_identities(config: &AtomicConfig, kind: IdentityKind, name: &str) -> CheckResult {
    let n = config.n();
    let mut worst = 0.0f64;
    for r in 0..=2 * n {
        worst = worst.max(residual_identity(config, r, kind).norm());
    }
    CheckResult::new(
        name,
        true,
        worst <= IDENTITY_TOL,
        format!("max |residual| {:.3e} over r = 0..{}", worst, 2 * n),
    )
}

fn check_thmx(config: &AtomicConfig) -> CheckResult {
    match theorem_x_sup_error(config, 100) {
        Ok(sup) => CheckResult::new(
            "thmX",
            true,
            sup <= FORMULA_TOL,
            format!("sup error {:.3e} over 100 interior points", sup),
        ),
        Err(e) => CheckResult::new("thmX", true, false, format!("error: {e}")),
    }
}

fn check_phi_agreement(config: &AtomicConfig) -> CheckResult {
    let mut sup = 0.0f64;
    let mut compared = 0usize;
    for k in 0..128 {
        let theta = TAU * (k as f64 + 0.5) / 128.0;
        let near_atom = config
            .atoms()
            .iter()
            .any(|a| circular_distance(theta, a.theta) < 0.05);
        if near_atom {
            continue;
        }
        let (direct, from_p) = match (
            phi(config, theta),
            crate::variational::phi_from_pq(config, theta),
        ) {
            (Ok(a), Ok(b)) => (a, b),
            _ => continue,
        };
        sup = sup.max((direct - from_p).abs() / (1.0 + direct.abs()));
        if let (Ok(d1), Ok(p1)) = (
            phi_prime(config, theta),
            crate::variational::phi_prime_from_p(config, theta),
        ) {
            sup = sup.max((d1 - p1).abs() / (1.0 + d1.abs()));
        }
        compared += 1;
    }
    CheckResult::new(
        "phi_agreement",
        true,
        compared >= 32 && sup <= FORMULA_TOL,
        format!("rel sup error {:.3e} over {} boundary points", sup, compared),
    )
}

fn check_fprime(config: &AtomicConfig) -> CheckResult {
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for k in 0..16 {
        let z = Complex64::from_polar(
            0.08 + 0.05 * k as f64,
            TAU * ((k as f64 * 0.618_033_988_749_894_8) % 1.0),
        );
        match check_fprime_relation(config, z) {
            Ok(residual) => {
                worst = worst.max(residual.norm());
                checked += 1;
            }
            Err(_) => continue,
        }
    }
    CheckResult::new(
        "fprime_relation",
        true,
        checked >= 8 && worst <= FORMULA_TOL,
        format!("max |residual| {:.3e} at {} interior points", worst, checked),
    )
}

fn check_negativity(config: &AtomicConfig) -> CheckResult {
    let measure = negativity_measure(config);
    CheckResult::new(
        "negativity_measure",
        true,
        (measure - PI).abs() <= 1e-6,
        format!("measure {measure:.12} vs pi"),
    )
}

fn check_coefficient_bounds(config: &AtomicConfig) -> CheckResult {
    let n = config.n();
    let t = config.total_mass();
    let b = g_series(config, 2 * n.max(1));
    let b0_err = (b.coeff(0).re + t).abs() + b.coeff(0).im.abs();
    let mut worst_excess = f64::NEG_INFINITY;
    for k in 1..=b.order() {
        worst_excess = worst_excess.max(b.coeff(k).norm() - 2.0 * t);
    }
    let passed = b0_err <= 1e-12 * (1.0 + t) && worst_excess <= 1e-12 * (1.0 + t);
    CheckResult::new(
        "coefficient_bounds",
        true,
        passed,
        format!("|b0 + t| = {b0_err:.3e}, max |b_k| - 2t = {worst_excess:.3e}"),
    )
}

fn check_mass_bounds(config: &AtomicConfig) -> CheckResult {
    let series = f_series(config, 4);
    let mut detail = String::new();
    let mut passed = true;
    for k in 2..=4usize {
        match mass_bounds_check(&series, k) {
            Ok((sum, bound, ok)) => {
                passed &= ok;
                detail.push_str(&format!("k={k}: {sum:.3e} <= {bound:.3e}; "));
            }
            Err(e) => {
                passed = false;
                detail.push_str(&format!("k={k}: error {e}; "));
            }
        }
    }
    CheckResult::new("mass_bounds", true, passed, detail.trim_end().to_string())
}

fn check_blaschke(config: &AtomicConfig) -> CheckResult {
    match blaschke_h(config) {
        Ok(h) => {
            let degree_ok = h.degree() == config.num_atoms();
            CheckResult::new(
                "blaschke_structure",
                true,
                degree_ok,
                format!(
                    "degree {} for {} atoms, |xi| error {:.3e}",
                    h.degree(),
                    config.num_atoms(),
                    (h.unimodular().norm() - 1.0).abs()
                ),
            )
        }
        Err(e) => CheckResult::new("blaschke_structure", true, false, format!("error: {e}")),
    }
}

fn check_conditions(config: &AtomicConfig) -> Vec<CheckResult> {
    (1..=5u8)
        .map(|which| {
            let name = format!("condition_{which}");
            match krzyz_condition_check(config, which, CONDITION_TOL) {
                Ok(holds) => CheckResult::new(
                    &name,
                    false,
                    holds,
                    if holds { "holds" } else { "does not hold" }.to_string(),
                ),
                Err(e) => CheckResult::new(&name, false, false, format!("error: {e}")),
            }
        })
        .collect()
}

fn check_rep_zero(config: &AtomicConfig) -> CheckResult {
    match rep_zero_match(config) {
        Ok(report) => {
            if !report.applicable {
                CheckResult::new(
                    "rep_zero",
                    false,
                    true,
                    "not applicable (boundary part has no full circle zero set)".to_string(),
                )
            } else {
                CheckResult::new(
                    "rep_zero",
                    false,
                    report.matched && report.atoms_covered,
                    format!(
                        "applicable, atoms covered: {}, coeff sup error {:.3e}",
                        report.atoms_covered,
                        report.sup_coeff_error.unwrap_or(f64::NAN)
                    ),
                )
            }
        }
        Err(e) => CheckResult::new("rep_zero", false, false, format!("error: {e}")),
    }
}

fn check_symmetry(config: &AtomicConfig) -> Vec<CheckResult> {
    let invariants = rotation_invariants(config);
    let orbit = rotation_orbit_count(config);
    let (gcd, coprime_flag) = gcd_certificate(config);
    let nontrivial = invariants.len() > 1;
    let consistent = if nontrivial {
        gcd >= 1 && config.n() % invariants.len() == 0
    } else {
        gcd == 1 && coprime_flag
    };
    vec![
        CheckResult::new(
            "rotation_symmetry",
            false,
            true,
            format!("{} invariant rotations, {} orbits", invariants.len(), orbit),
        ),
        CheckResult::new(
            "gcd_certificate",
            false,
            consistent,
            format!("gcd {gcd}, nontrivial-common-divisor flag {coprime_flag}"),
        ),
    ]
}

fn check_annulus(config: &AtomicConfig) -> CheckResult {
    match annulus_radius(config) {
        Ok(report) => CheckResult::new(
            "annulus",
            false,
            report.contained,
            format!(
                "outer radius {:.6}, all P roots contained: {}",
                report.radius, report.contained
            ),
        ),
        Err(e) => CheckResult::new("annulus", false, false, format!("error: {e}")),
    }
}

/// Run every check. `stationarity_tol` gates the stationarity check only;
/// identity and formula tolerances are fixed properties of the algorithms.
pub fn battery(config: &AtomicConfig, stationarity_tol: f64) -> VerificationReport {
    battery_filtered(config, stationarity_tol, None)
}

/// [`battery`] restricted to checks whose name contains `only` (case
/// insensitive); `all_required_passed` is judged over the retained checks.
pub fn battery_filtered(
    config: &AtomicConfig,
    stationarity_tol: f64,
    only: Option<&str>,
) -> VerificationReport {
    let mut checks = vec![
        check_stationarity(config, stationarity_tol),
        check_series_contracts(config),
        check_identities(config, IdentityKind::Base, "identity_base"),
        check_identities(config, IdentityKind::Derivative, "identity_derivative"),
        check_thmx(config),
        check_phi_agreement(config),
        check_fprime(config),
        check_negativity(config),
        check_coefficient_bounds(config),
        check_mass_bounds(config),
        check_blaschke(config),
    ];
    checks.extend(check_conditions(config));
    checks.push(check_rep_zero(config));
    checks.extend(check_symmetry(config));
    checks.push(check_annulus(config));

    if let Some(pattern) = only {
        let needle = pattern.to_lowercase();
        checks.retain(|c| c.name.to_lowercase().contains(&needle));
    }
    let all_required_passed = checks.iter().filter(|c| c.required).all(|c| c.passed);
    VerificationReport {
        checks,
        all_required_passed,
        stationarity_tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_passes_everything() {
        for n in [1usize, 3] {
            let report = battery(&AtomicConfig::reference(n), 1e-6);
            assert!(
                report.all_required_passed,
                "n={n}: {:?}",
                report
                    .checks
                    .iter()
                    .filter(|c| c.required && !c.passed)
                    .collect::<Vec<_>>()
            );
            // Reference configs also satisfy every informational check.
            for check in &report.checks {
                assert!(check.passed, "n={n} informational {}: {}", check.name, check.detail);
            }
        }
    }

    #[test]
    fn perturbed_reference_fails_stationarity_only_among_required() {
        let mut atoms: Vec<(f64, f64)> = AtomicConfig::reference(3)
            .atoms()
            .iter()
            .map(|a| (a.theta, a.lambda))
            .collect();
        atoms[0].0 += 0.05;
        let config = AtomicConfig::new(3, &atoms).unwrap();
        let report = battery(&config, 1e-6);
        assert!(!report.all_required_passed);
        let stationarity = report
            .checks
            .iter()
            .find(|c| c.name == "stationarity")
            .unwrap();
        assert!(!stationarity.passed);
        // Universal contracts still hold on the perturbed config; the
        // stationarity-class checks (identities, rational formulas) are the
        // ones that single out extremal configurations and rightly fail.
        for name in [
            "series_contracts",
            "fprime_relation",
            "negativity_measure",
            "coefficient_bounds",
            "mass_bounds",
            "blaschke_structure",
        ] {
            let check = report.checks.iter().find(|c| c.name == name).unwrap();
            assert!(check.passed, "{name}: {}", check.detail);
        }
    }

    #[test]
    fn filter_restricts_battery() {
        let report = battery_filtered(&AtomicConfig::reference(2), 1e-6, Some("thmX"));
        assert_eq!(report.checks.len(), 1);
        assert_eq!(report.checks[0].name, "thmX");
        assert!(report.all_required_passed);
    }

    #[test]
    fn report_serializes() {
        let report = battery_filtered(&AtomicConfig::reference(1), 1e-6, Some("condition"));
        assert_eq!(report.checks.len(), 5);
        let json = report.to_json_string();
        assert!(json.contains("\"condition_1\""));
        assert!(json.contains("\"required\": false"));
    }
}
