//! Reconstruction of the leading Taylor block from circle zeros.
//!
//! When Re P vanishes at n distinct circle points z_1..z_n, the truncated
//! expansion recovers as f = a_0·∏(1−z_jz)² mod z^{n+1}, with coefficients
//! a_j = (−1)^j a_0 Σ_k e_{j−k}e_k in the elementary symmetric functions of
//! the points. Companion power-sum formulas give b_k = −(2/k)Σ z_j^k. The
//! module also matches atom points against the circle zeros of the spectral
//! factor of Re P and reports how well reconstruction closes the loop.

use num_complex::Complex64;
use serde::Serialize;

use crate::config::AtomicConfig;
use crate::error::{Error, Result};
use crate::optimizer::normalize_rotation;
use crate::poly::{build_p, fejer_riesz, TrigPolyReal};
use crate::series::{f_series, g_series, PowerSeries};

/// How close a circle zero must sit to the unit circle.
const CIRCLE_TOL: f64 = 1e-9;
/// Angular tolerance for matching atoms against circle zeros and for
/// declaring two circle zeros distinct.
const MATCH_TOL: f64 = 1e-6;
/// Coefficient agreement required for a successful reconstruction.
const RECONSTRUCT_TOL: f64 = 1e-8;

/// Where a zero set came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ZeroProvenance {
    /// Circle roots of the spectral factor of Re P.
    FactorRoots,
    /// Caller-supplied points.
    Supplied,
}

/// Distinct points on the unit circle, candidate zeros of Re P.
#[derive(Clone, Debug)]
pub struct CircleZeroSet {
    points: Vec<Complex64>,
    provenance: ZeroProvenance,
}

impl CircleZeroSet {
    /// Validates modulus within [`CIRCLE_TOL`] of 1 and pairwise angular
    /// separation above [`MATCH_TOL`].
    pub fn new(points: Vec<Complex64>, provenance: ZeroProvenance) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid_argument("empty circle zero set"));
        }
        for (k, z) in points.iter().enumerate() {
            let defect = (z.norm() - 1.0).abs();
            if defect > CIRCLE_TOL {
                return Err(Error::OffCircle { z: *z, defect });
            }
            for other in &points[..k] {
                if (z - other).norm() <= MATCH_TOL {
                    return Err(Error::invalid_argument(format!(
                        "circle zeros {other} and {z} coincide"
                    )));
                }
            }
        }
        Ok(CircleZeroSet { points, provenance })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn provenance(&self) -> ZeroProvenance {
        self.provenance
    }

    /// |∏z_j − (−1)^n|; small exactly when the set is consistent with an
    /// extremal configuration.
    pub fn product_defect(&self) -> f64 {
        let product: Complex64 = self.points.iter().product();
        let sign = if self.points.len() % 2 == 0 { 1.0 } else { -1.0 };
        (product - Complex64::new(sign, 0.0)).norm()
    }
}

/// e_0..e_n of the points, by the product recurrence for ∏(x + w_j).
pub fn elementary_symmetric(points: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::ZERO; points.len() + 1];
    e[0] = Complex64::ONE;
    for (count, &w) in points.iter().enumerate() {
        for k in (1..=count + 1).rev() {
            let lower = e[k - 1];
            e[k] += w * lower;
        }
    }
    e
}

/// Truncated expansion of a_0·∏(1−z_jz)²: coefficients
/// a_j = (−1)^j a_0 Σ_{k=0}^{j} e_{j−k}e_k for j = 0..n.
pub fn reconstruct_f_mod(points: &[Complex64], a0: f64) -> Result<PowerSeries> {
    if points.is_empty() {
        return Err(Error::invalid_argument("no points to reconstruct from"));
    }
    if a0 <= 0.0 {
        return Err(Error::invalid_argument(format!(
            "leading coefficient a0 = {a0} must be positive"
        )));
    }
    let n = points.len();
    let e = elementary_symmetric(points);
    let mut coeffs = vec![Complex64::ZERO; n + 1];
    for (j, c) in coeffs.iter_mut().enumerate() {
        let mut acc = Complex64::ZERO;
        for k in 0..=j {
            acc += e[j - k] * e[k];
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        *c = sign * a0 * acc;
    }
    Ok(PowerSeries::new(coeffs))
}

/// a_0(2 + Σ_{k=1}^{n−1}|e_k|²), the closed form for a_n valid when
/// ∏z_j = (−1)^n.
pub fn a_n_from_points(points: &[Complex64], a0: f64) -> f64 {
    let e = elementary_symmetric(points);
    let n = points.len();
    let mass: f64 = (1..n).map(|k| e[k].norm_sqr()).sum();
    a0 * (2.0 + mass)
}

/// Power-sum formula b_k = −(2/k)Σ_j z_j^k for 1 ≤ k ≤ n; the modulus is
/// bounded by 2n/k with equality only for equidistributed points.
pub fn b_from_points(points: &[Complex64], k: usize) -> Result<Complex64> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::invalid_argument(format!(
            "power-sum index {k} outside 1..={n}"
        )));
    }
    let sum: Complex64 = points.iter().map(|z| z.powu(k as u32)).sum();
    Ok(-2.0 / k as f64 * sum)
}

/// Outcome of matching a configuration's atoms against the circle zeros of
/// the spectral factor of Re P and reconstructing the leading block.
#[derive(Clone, Debug, Serialize)]
pub struct RepZeroReport {
    /// False when Re P is not factorizable or yields fewer than n distinct
    /// circle zeros; the remaining fields are then absent or vacuous.
    pub applicable: bool,
    /// Every atom point found among the circle zeros within the angular
    /// matching tolerance.
    pub atoms_covered: bool,
    /// Circle zeros as (re, im) pairs.
    pub points: Vec<(f64, f64)>,
    pub product_check: Option<f64>,
    pub a_n_formula: Option<f64>,
    #[serde(rename = "match")]
    pub matched: bool,
    pub sup_coeff_error: Option<f64>,
}

impl RepZeroReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    fn not_applicable(points: Vec<(f64, f64)>) -> Self {
        RepZeroReport {
            applicable: false,
            atoms_covered: false,
            points,
            product_check: None,
            a_n_formula: None,
            matched: false,
            sup_coeff_error: None,
        }
    }
}

/// Factor Re P, pull out its circle zeros, check the atom points appear
/// among them, and when n distinct zeros exist compare the reconstructed
/// truncation against the direct series. Failure of the nonnegativity or
/// pairing preconditions is reported as not applicable, not as an error.
pub fn rep_zero_match(config: &AtomicConfig) -> Result<RepZeroReport> {
    let normalized = normalize_rotation(config).config;
    let n = normalized.n();
    let p = build_p(&normalized);
    let factorization = match fejer_riesz(&TrigPolyReal::re_boundary(&p)) {
        Ok(f) => f,
        Err(
            Error::NotNonnegative { .. }
            | Error::UnpairedCircleRoot { .. }
            | Error::FactorizationDegree { .. },
        ) => return Ok(RepZeroReport::not_applicable(Vec::new())),
        Err(other) => return Err(other),
    };

    // Distinct circle zeros of the factor.
    let mut distinct: Vec<Complex64> = Vec::new();
    for z in factorization.circle_roots() {
        if !distinct.iter().any(|w| (w - z).norm() <= MATCH_TOL) {
            distinct.push(z);
        }
    }
    distinct.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    let point_pairs: Vec<(f64, f64)> = distinct.iter().map(|z| (z.re, z.im)).collect();
    if distinct.len() < n {
        return Ok(RepZeroReport::not_applicable(point_pairs));
    }

    let atoms_covered = normalized.alphas().iter().all(|alpha| {
        distinct
            .iter()
            .any(|z| (z - alpha).norm() <= MATCH_TOL)
    });

    let zero_set = CircleZeroSet::new(distinct, ZeroProvenance::FactorRoots)?;
    let f = f_series(&normalized, n);
    let a0 = f.coeff(0).re;
    let rebuilt = reconstruct_f_mod(zero_set.points(), a0)?;
    let mut sup = 0.0f64;
    for j in 0..=n {
        sup = sup.max((rebuilt.coeff(j) - f.coeff(j)).norm());
    }
    let g = g_series(&normalized, n);
    for k in 1..=n {
        sup = sup.max((b_from_points(zero_set.points(), k)? - g.coeff(k)).norm());
    }

    Ok(RepZeroReport {
        applicable: true,
        atoms_covered,
        points: point_pairs,
        product_check: Some(zero_set.product_defect()),
        a_n_formula: Some(a_n_from_points(zero_set.points(), a0)),
        matched: sup <= RECONSTRUCT_TOL,
        sup_coeff_error: Some(sup),
    })
}

// ---------------------------------------------------------------------------
