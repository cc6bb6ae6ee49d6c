//! Truncated power series for g = log f and f itself.
//!
//! The coefficient recurrence is the single source of truth for Taylor
//! coefficients; [`coefficient_via_contour`] is an independent quadrature
//! cross-check used by tests.
//!
//! For a configuration with atoms (θ_k, λ_k) and α_k = e^{-iθ_k}:
//! b_0 = −Σλ_k, b_j = −2Σλ_k α_k^j, and exp is applied through
//! j·a_j = Σ_{k=1}^{j} k·b_k·a_{j−k} with a_0 = e^{b_0}.

use std::io::Write;

use num_complex::Complex64;

use crate::config::AtomicConfig;
use crate::error::{Error, Result};

/// Finite Taylor series c_0 + c_1 z + … + c_M z^M.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries {
    coeffs: Vec<Complex64>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "a series has at least the constant term");
        PowerSeries { coeffs }
    }

    /// Truncation degree M.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient c_j, zero beyond the truncation order.
    pub fn coeff(&self, j: usize) -> Complex64 {
        self.coeffs.get(j).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Termwise derivative, truncated at order M−1 (or the zero constant
    /// for a constant series).
    pub fn derivative(&self) -> PowerSeries {
        if self.coeffs.len() == 1 {
            return PowerSeries::new(vec![Complex64::ZERO]);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c * j as f64)
            .collect();
        PowerSeries::new(coeffs)
    }

    /// Cauchy product truncated at `order`.
    pub fn mul_truncated(&self, other: &PowerSeries, order: usize) -> PowerSeries {
        let mut coeffs = vec![Complex64::ZERO; order + 1];
        for (j, out) in coeffs.iter_mut().enumerate() {
            let mut s = Complex64::ZERO;
            for k in 0..=j {
                s += self.coeff(k) * other.coeff(j - k);
            }
            *out = s;
        }
        PowerSeries::new(coeffs)
    }

    /// Multiplicative inverse as a truncated series; requires c_0 ≠ 0.
    pub fn recip_truncated(&self, order: usize) -> Result<PowerSeries> {
        let c0 = self.coeff(0);
        if c0.norm() < 1e-300 {
            return Err(Error::ZeroPolynomial);
        }
        let mut d = vec![Complex64::ZERO; order + 1];
        d[0] = c0.inv();
        for j in 1..=order {
            let mut acc = Complex64::ZERO;
            for k in 1..=j {
                acc += self.coeff(k) * d[j - k];
            }
            d[j] = -acc / c0;
        }
        Ok(PowerSeries::new(d))
    }

    /// Σ|c_j|², the squared H² norm of the truncation.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// CSV with columns j, re, im.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "j,re,im")?;
        for (j, c) in self.coeffs.iter().enumerate() {
            writeln!(w, "{j},{:.17e},{:.17e}", c.re, c.im)?;
        }
        Ok(())
    }
}

/// Taylor coefficients of g = log f: b_0 = −t, b_j = −2Σ_k λ_k α_k^j.
///
/// Powers are taken as e^{-ijθ} directly so no phase drift accumulates.
pub fn g_series(config: &AtomicConfig, order: usize) -> PowerSeries {
    let mut coeffs = vec![Complex64::ZERO; order + 1];
    coeffs[0] = Complex64::new(-config.total_mass(), 0.0);
    for atom in config.atoms() {
        for (j, c) in coeffs.iter_mut().enumerate().skip(1) {
            let phase = Complex64::from_polar(1.0, -(j as f64) * atom.theta);
            *c -= 2.0 * atom.lambda * phase;
        }
    }
    PowerSeries::new(coeffs)
}

/// exp of a truncated series through j·a_j = Σ_{k=1}^{j} k·b_k·a_{j−k},
/// a_0 = e^{b_0}.
pub fn series_exp(s: &PowerSeries) -> PowerSeries {
    let order = s.order();
    let mut a = vec![Complex64::ZERO; order + 1];
    a[0] = s.coeff(0).exp();
    for j in 1..=order {
        let mut acc = Complex64::ZERO;
        for k in 1..=j {
            acc += k as f64 * s.coeff(k) * a[j - k];
        }
        a[j] = acc / j as f64;
    }
    PowerSeries::new(a)
}

/// Taylor coefficients a_j of f = exp(g).
pub fn f_series(config: &AtomicConfig, order: usize) -> PowerSeries {
    series_exp(&g_series(config, order))
}

/// Taylor coefficients T_j(f·g), the Cauchy product of f and g.
pub fn fg_series(config: &AtomicConfig, order: usize) -> PowerSeries {
    let f = f_series(config, order);
    let g = g_series(config, order);
    f.mul_truncated(&g, order)
}

/// The objective M_n = Re a_n.
pub fn m_n(config: &AtomicConfig) -> f64 {
    f_series(config, config.n()).coeff(config.n()).re
}

/// Closed-form g(z) = −Σλ_k (1 + α_k z)/(1 − α_k z) for |z| < 1.
pub fn eval_g(config: &AtomicConfig, z: Complex64) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for atom in config.atoms() {
        let az = atom.alpha() * z;
        acc -= atom.lambda * (1.0 + az) / (1.0 - az);
    }
    acc
}

/// Closed-form g'(z) = −Σλ_k 2α_k/(1 − α_k z)².
pub fn eval_g_prime(config: &AtomicConfig, z: Complex64) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for atom in config.atoms() {
        let a = atom.alpha();
        let d = 1.0 - a * z;
        acc -= atom.lambda * 2.0 * a / (d * d);
    }
    acc
}

/// f(z) = exp(g(z)) evaluated from the closed form.
pub fn eval_f(config: &AtomicConfig, z: Complex64) -> Complex64 {
    eval_g(config, z).exp()
}

/// Default contour parameters for a given order: radius 1/2 and a
/// power-of-two sample count ≥ max(256, 16·order), which pushes the
/// trapezoid aliasing error below 1e−12.
pub fn contour_defaults(order: usize) -> (f64, usize) {
    (0.5, 256.max(16 * order).next_power_of_two())
}

/// a_j recovered as r^{−j}·(1/S)·Σ_s f(r e^{iθ_s}) e^{−ijθ_s}; independent
/// of the recurrence (used as a test oracle).
pub fn coefficient_via_contour(
    config: &AtomicConfig,
    j: usize,
    r: f64,
    samples: usize,
) -> Result<Complex64> {
    if !(r > 0.0 && r < 1.0) || !r.is_finite() {
        return Err(Error::RadiusOutOfRange { r });
    }
    let min_samples = 64.max(8 * j);
    if samples < min_samples {
        return Err(Error::invalid_argument(format!(
            "contour needs at least {min_samples} samples for j = {j}, got {samples}"
        )));
    }
    let mut acc = Complex64::ZERO;
    for s in 0..samples {
        let theta = crate::config::TAU * s as f64 / samples as f64;
        let z = Complex64::from_polar(r, theta);
        let weight = Complex64::from_polar(1.0, -(j as f64) * theta);
        acc += eval_f(config, z) * weight;
    }
    Ok(acc / samples as f64 / r.powi(j as i32))
}

/// Random valid configuration for property tests: `max_atoms` bound, total
/// mass uniform in (0.2, max_mass), weights Dirichlet via normalized
/// exponentials, angles uniform.
#[cfg(test)]
pub(crate) fn random_config(
    rng: &mut rand_chacha::ChaCha8Rng,
    n: usize,
    max_atoms: usize,
    max_mass: f64,
) -> AtomicConfig {
    use rand::prelude::*;
    let count = rng.random_range(1..=max_atoms);
    let t = rng.random_range(0.2..max_mass);
    let mut weights: Vec<f64> = (0..count).map(|_| -f64::ln(rng.random::<f64>())).collect();
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w *= t / sum;
    }
    let atoms: Vec<(f64, f64)> = weights
        .into_iter()
        .map(|w| (rng.random_range(0.0..crate::config::TAU), w))
        .collect();
    AtomicConfig::new(n, &atoms).unwrap()
}
