//! Single-atom coefficient functions and scalar bounds.
//!
//! For one atom of weight t at the distinguished angle π, the Taylor
//! coefficients of f = exp(t(z−1)/(z+1)) are β_j(t) = (−1)^j e^{−t}
//! L_j^{(−1)}(2t) in terms of generalized Laguerre polynomials. This module
//! evaluates those, maximizes |β_j| over t, computes the factorial upper
//! bound for the suprema, checks the small-index coefficient-mass bounds,
//! and solves the restricted two-index problem with a₀ pinned.

use std::f64::consts::E;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::golden_min;
use crate::series::PowerSeries;

/// Binomial with real upper argument: ∏_{i=0}^{m−1} (upper−i)/(i+1).
fn binom_real(upper: f64, m: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..m {
        acc *= (upper - i as f64) / (i as f64 + 1.0);
    }
    acc
}

/// Generalized Laguerre polynomial L_j^{(α)}(x) by its defining sum
/// Σ_k binom(j+α, j−k)(−x)^k/k!.
pub fn laguerre(j: usize, alpha: f64, x: f64) -> f64 {
    let mut term = 1.0; // (−x)^k / k!
    let mut acc = 0.0;
    for k in 0..=j {
        if k > 0 {
            term *= -x / k as f64;
        }
        acc += binom_real(j as f64 + alpha, j - k) * term;
    }
    acc
}

/// β_j(t) = (−1)^j e^{−t} L_j^{(−1)}(2t), the jth coefficient of the
/// single-atom function exp(t(z−1)/(z+1)).
///
/// Evaluated by the three-term Laguerre recurrence on the pre-damped
/// values m_k = e^{−t}L_k^{(−1)}(2t), which stay in [−1, 1]; the defining
/// alternating sum loses all accuracy once its largest term dwarfs the
/// result, which happens well inside the interesting (j, t) range.
pub fn beta(j: usize, t: f64) -> f64 {
    let damp = (-t).exp();
    if j == 0 {
        return damp;
    }
    let mut prev = damp; // m_0
    let mut curr = -2.0 * t * damp; // m_1
    for k in 2..=j {
        let next = ((2.0 * k as f64 - 2.0 - 2.0 * t) * curr - (k as f64 - 2.0) * prev) / k as f64;
        prev = curr;
        curr = next;
    }
    if j % 2 == 0 {
        curr
    } else {
        -curr
    }
}

/// Coefficient function of one index, packaging [`beta`].
#[derive(Clone, Copy, Debug)]
pub struct BetaFunction {
    pub j: usize,
}

impl BetaFunction {
    pub fn eval(&self, t: f64) -> f64 {
        beta(self.j, t)
    }
}

/// Maximizer of |β_j| over t ∈ [0, 4j]: sign-scan with 4j+8 panels brackets
/// the roots of β_j, and golden-section maximization runs between
/// consecutive roots. Returns (t*, sup value).
pub fn beta_sup(j: usize) -> (f64, f64) {
    assert!(j >= 1, "the constant coefficient has no supremum problem");
    let hi = 4.0 * j as f64;
    let panels = 4 * j + 8;
    let f = |t: f64| beta(j, t);

    let mut breaks = vec![0.0];
    let mut last = (0.0, f(0.0));
    for i in 1..=panels {
        let t = hi * i as f64 / panels as f64;
        let v = f(t);
        if last.1 != 0.0 && v != 0.0 && last.1.signum() != v.signum() {
            let (mut a, mut b) = (last.0, t);
            let fa = f(a);
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                if f(mid).signum() == fa.signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            breaks.push(0.5 * (a + b));
        }
        if v != 0.0 {
            last = (t, v);
        }
    }
    breaks.push(hi);

    let mut best = (0.0, 0.0f64);
    for pair in breaks.windows(2) {
        let t_star = golden_min(|t| -f(t).abs(), pair[0], pair[1], 1e-11);
        let value = f(t_star).abs();
        if value > best.1 {
            best = (t_star, value);
        }
    }
    best
}

/// √(2(2j)!)/(2^j j!), an upper bound for sup_t|β_j|, computed in log space;
/// the flag records whether the bound already sits below 2/e.
pub fn rooney_bound(j: usize) -> (f64, bool) {
    let ln_fact = |m: usize| (1..=m).map(|i| (i as f64).ln()).sum::<f64>();
    let ln_value =
        0.5 * (std::f64::consts::LN_2 + ln_fact(2 * j)) - j as f64 * std::f64::consts::LN_2
            - ln_fact(j);
    let value = ln_value.exp();
    (value, value < 2.0 / E)
}

/// Σ_{j=1}^{k}|a_j|² against the sharp bound for k ∈ {2, 3, 4}.
/// Returns (sum, bound, sum ≤ bound).
pub fn mass_bounds_check(series: &PowerSeries, k: usize) -> Result<(f64, f64, bool)> {
    let bound = match k {
        2 => 32.0 * (-4.0f64).exp(),
        3 => 13.5 * (-3.0f64).exp(),
        4 => {
            let s3 = 3.0f64.sqrt();
            96.0 * (33.0 - 19.0 * s3) * (2.0 * s3 - 6.0).exp()
        }
        _ => {
            return Err(Error::invalid_argument(format!(
                "coefficient-mass bound only known for k in 2..=4, got {k}"
            )))
        }
    };
    if series.order() < k {
        return Err(Error::invalid_argument(format!(
            "series order {} is below k = {k}",
            series.order()
        )));
    }
    let sum: f64 = (1..=k).map(|j| series.coeff(j).norm_sqr()).sum();
    Ok((sum, bound, sum <= bound + 1e-12))
}

/// Which one-parameter family attains the restricted supremum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RestrictedFamily {
    /// Two symmetric atoms of weight t/2: |a₂| = 2te^{−t}.
    TwoAtomSymmetric,
    /// One atom of weight t: |a₂| = |2t(t−1)e^{−t}|.
    SingleAtom,
    Tie,
}

/// Solution of the a₀-pinned problem for the second coefficient.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RestrictedReport {
    /// Threshold value of a₀ below which the single-atom family catches up.
    pub r0: f64,
    /// −log r₀, the mass floor the pin imposes.
    pub t_min: f64,
    /// Common supremum of the two families at r₀.
    pub value: f64,
    pub family: RestrictedFamily,
}

/// Supremum of |a₂| over configurations with a₀ = r fixed (so t ≥ −log r),
/// taken over the two competing families, and which family wins.
pub fn restricted_value(r: f64) -> Result<(f64, RestrictedFamily)> {
    if !(0.0..1.0).contains(&r) || r == 0.0 {
        return Err(Error::invalid_argument(format!(
            "a0 pin {r} outside (0, 1)"
        )));
    }
    let t_min = -r.ln();

    // 2te^{−t} is unimodal with peak at t = 1.
    let two_atom = if t_min <= 1.0 {
        2.0 / E
    } else {
        2.0 * t_min * (-t_min).exp()
    };

    // |2t(t−1)e^{−t}| has critical points at (3±√5)/2; the sup over
    // [t_min, ∞) is attained at one of them or at the endpoint.
    let b2 = |t: f64| (2.0 * t * (t - 1.0) * (-t).exp()).abs();
    let s5 = 5.0f64.sqrt();
    let mut single = b2(t_min);
    for critical in [(3.0 - s5) / 2.0, (3.0 + s5) / 2.0] {
        if critical >= t_min {
            single = single.max(b2(critical));
        }
    }

    let family = if (two_atom - single).abs() <= 1e-9 {
        RestrictedFamily::Tie
    } else if two_atom > single {
        RestrictedFamily::TwoAtomSymmetric
    } else {
        RestrictedFamily::SingleAtom
    };
    Ok((two_atom.max(single), family))
}

/// The threshold pin: the smallest r with r·log r = −(2+√5)e^{−(3+√5)/2},
/// where both families attain (4+2√5)e^{−(3+√5)/2}.
pub fn restricted_problem() -> RestrictedReport {
    let s5 = 5.0f64.sqrt();
    let c = (2.0 + s5) * (-(3.0 + s5) / 2.0).exp();
    // r·log r falls from 0 to −1/e on (0, 1/e]; bisect for the crossing.
    let target = -c;
    let (mut a, mut b) = (1e-12, 1.0 / E);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid * mid.ln() > target {
            a = mid;
        } else {
            b = mid;
        }
    }
    let r0 = 0.5 * (a + b);
    let (value, family) = restricted_value(r0).expect("r0 lies in (0, 1)");
    RestrictedReport {
        r0,
        t_min: -r0.ln(),
        value,
        family,
    }
}

/// CSV table of suprema: one row per index with the maximizer, the value,
/// and the factorial bound.
pub fn beta_table_csv(max_j: usize) -> String {
    let mut out = String::from("j,t_star,sup_value,rooney_bound\n");
    for j in 1..=max_j {
        let (t_star, value) = beta_sup(j);
        let (bound, _) = rooney_bound(j);
        out.push_str(&format!("{j},{t_star:.12},{value:.12},{bound:.12}\n"));
    }
    out
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::AtomicConfig;
    use crate::series::f_series;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn laguerre_closed_forms() {
        for &x in &[0.7, -2.3, 0.0, 5.1] {
            assert_abs_diff_eq!(laguerre(0, -1.0, x), 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(laguerre(0, 2.5, x), 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(laguerre(1, -1.0, x), -x, epsilon = 1e-14);
            assert_abs_diff_eq!(laguerre(2, -1.0, x), x * x / 2.0 - x, epsilon = 1e-13);
        }
    }

    #[test]
    fn beta_closed_forms() {
        for &t in &[0.0, 0.5, 1.0, 2.0, 3.7] {
            assert_abs_diff_eq!(beta(0, t), (-t).exp(), epsilon = 1e-15);
            assert_abs_diff_eq!(beta(1, t), 2.0 * t * (-t).exp(), epsilon = 1e-13);
            assert_abs_diff_eq!(
                beta(2, t),
                2.0 * t * (t - 1.0) * (-t).exp(),
                epsilon = 1e-13
            );
        }
        assert_abs_diff_eq!(beta(1, 1.0), 2.0 / E, epsilon = 1e-15);
        assert_abs_diff_eq!(BetaFunction { j: 1 }.eval(1.0), 2.0 / E, epsilon = 1e-15);
    }

    #[test]
    fn beta_matches_single_atom_series() {
        for &t in &[0.5, 1.0, 2.618, 4.0] {
            let config = AtomicConfig::new(1, &[(PI, t)]).unwrap();
            let f = f_series(&config, 12);
            for j in 0..=12 {
                let c = f.coeff(j);
                assert!(
                    (c.re - beta(j, t)).abs() < 1e-10 && c.im.abs() < 1e-10,
                    "j={j} t={t}: series {c} vs {}",
                    beta(j, t)
                );
            }
        }
    }

    #[test]
    fn beta_sup_frozen_values() {
        let s5 = 5.0f64.sqrt();
        let (t2, v2) = beta_sup(2);
        assert!((t2 - (3.0 + s5) / 2.0).abs() < 1e-6, "t* = {t2}");
        let exact = (4.0 + 2.0 * s5) * (-(3.0 + s5) / 2.0).exp();
        assert!((v2 - exact).abs() < 1e-9);
        assert!((v2 - 0.61801).abs() < 1e-5);

        let (_, v3) = beta_sup(3);
        assert!((v3 - 0.55191).abs() < 1e-5, "sup|b3| = {v3}");
        let (_, v4) = beta_sup(4);
        assert!((v4 - 0.50755).abs() < 1e-5, "sup|b4| = {v4}");
    }

    #[test]
    fn rooney_bound_values_and_monotonicity() {
        let (b1, flag1) = rooney_bound(1);
        assert_abs_diff_eq!(b1, 1.0, epsilon = 1e-12);
        assert!(!flag1);
        let (b5, flag5) = rooney_bound(5);
        assert!((b5 - 0.7015608).abs() < 1e-6, "bound {b5}");
        assert!(flag5);
        // The flag first flips between j = 4 and j = 5.
        assert!(!rooney_bound(4).1);
        let mut prev = rooney_bound(1).0;
        for j in 2..=60 {
            let (b, _) = rooney_bound(j);
            assert!(b < prev, "not decreasing at j={j}");
            prev = b;
        }
    }

    #[test]
    fn rooney_bound_dominates_beta_samples() {
        for j in 1..=20usize {
            let (bound, _) = rooney_bound(j);
            let mut t = 0.0;
            while t <= 40.0 {
                assert!(
                    beta(j, t).abs() <= bound + 1e-9,
                    "j={j} t={t}: |beta| = {} > {bound}",
                    beta(j, t).abs()
                );
                t += 0.25;
            }
        }
    }

    #[test]
    fn mass_bound_equality_at_single_atom() {
        let config = AtomicConfig::new(1, &[(PI, 2.0)]).unwrap();
        let f = f_series(&config, 4);
        let (sum, bound, ok) = mass_bounds_check(&f, 2).unwrap();
        assert!(ok);
        assert_abs_diff_eq!(sum, bound, epsilon = 1e-10);
        assert_abs_diff_eq!(bound, 32.0 / (E * E * E * E), epsilon = 1e-14);

        // 1-D oracle: 4t²e^{−2t}(1+(t−1)²) peaks at t = 2 with value 32/e⁴.
        let profile = |t: f64| 4.0 * t * t * (-2.0 * t).exp() * (1.0 + (t - 1.0) * (t - 1.0));
        let mut best = 0.0f64;
        let mut t = 0.0;
        while t <= 12.0 {
            best = best.max(profile(t));
            t += 1e-3;
        }
        assert!(best <= bound + 1e-9);
        assert!((profile(2.0) - bound).abs() < 1e-14);
    }

    #[test]
    fn mass_bounds_on_reference_and_random() {
        use crate::series::random_config;
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;

        let f = f_series(&AtomicConfig::reference(5), 4);
        let (sum, _, ok) = mass_bounds_check(&f, 2).unwrap();
        assert!(ok && sum < 1e-20);

        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..30 {
            let config = random_config(&mut rng, 4, 6, 3.0);
            let f = f_series(&config, 4);
            for k in 2..=4 {
                let (sum, bound, ok) = mass_bounds_check(&f, k).unwrap();
                assert!(ok, "k={k}: {sum} > {bound}");
            }
        }
        assert!(mass_bounds_check(&f_series(&AtomicConfig::reference(2), 4), 5).is_err());
        assert!(mass_bounds_check(&f_series(&AtomicConfig::reference(2), 1), 2).is_err());
    }

    #[test]
    fn restricted_problem_threshold() {
        let report = restricted_problem();
        assert!((report.r0 - 0.18047).abs() < 1e-5, "r0 = {}", report.r0);
        let s5 = 5.0f64.sqrt();
        let exact = (4.0 + 2.0 * s5) * (-(3.0 + s5) / 2.0).exp();
        assert!((report.value - exact).abs() < 1e-9);
        assert_eq!(report.family, RestrictedFamily::Tie);
        assert!((report.t_min + report.r0.ln()).abs() < 1e-12);
        // The defining equation holds and the root is the smaller branch.
        let c = (2.0 + s5) * (-(3.0 + s5) / 2.0).exp();
        assert!((report.r0 * report.r0.ln() + c).abs() < 1e-12);
        assert!(report.r0 < 1.0 / E);
    }

    #[test]
    fn restricted_value_above_threshold() {
        let (value, family) = restricted_value(1.0 / E).unwrap();
        assert_abs_diff_eq!(value, 2.0 / E, epsilon = 1e-12);
        assert_eq!(family, RestrictedFamily::TwoAtomSymmetric);
        assert!(restricted_value(0.0).is_err());
        assert!(restricted_value(1.0).is_err());
    }

    #[test]
    fn csv_table_shape() {
        let table = beta_table_csv(4);
        let lines: Vec<&str> = table.trim().lines().collect();
        assert_eq!(lines[0], "j,t_star,sup_value,rooney_bound");
        assert_eq!(lines.len(), 5);
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 4);
        }
    }
}
