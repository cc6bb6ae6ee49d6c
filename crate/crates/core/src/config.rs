//! Atom configurations: the parameter space of singular inner functions
//! `f(z) = exp(-Σ_j λ_j (1 + α_j z)/(1 - α_j z))` with finitely many atoms
//! `α_j = e^{-iθ_j}` on the unit circle and weights `λ_j > 0`, together with
//! the target coefficient index `n`.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Atoms closer than this (radians, circular distance) are merged: the
/// objective extends continuously to coincident atoms, but the product
/// representations require distinct α_j.
pub const ATOM_MERGE_TOL: f64 = 1e-9;

pub const TAU: f64 = 2.0 * PI;

/// One point mass: angle θ in [0, 2π) with α = e^{-iθ}, weight λ > 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub theta: f64,
    pub lambda: f64,
}

impl Atom {
    /// The circle point α = e^{-iθ} carried by this atom.
    pub fn alpha(&self) -> Complex64 {
        Complex64::from_polar(1.0, -self.theta)
    }
}

/// A validated configuration: atoms sorted by angle, pairwise separation
/// above [`ATOM_MERGE_TOL`], all weights positive, n ≥ 1.
///
/// N ≤ n is deliberately not enforced; the optimizer explores general N.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomicConfig {
    n: usize,
    atoms: Vec<Atom>,
}

/// Serde shadow so that deserialized configs re-enter through validation.
#[derive(Deserialize)]
struct RawConfig {
    n: usize,
    atoms: Vec<Atom>,
}

impl<'de> Deserialize<'de> for AtomicConfig {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let raw = RawConfig::deserialize(deserializer)?;
        let pairs: Vec<(f64, f64)> = raw.atoms.iter().map(|a| (a.theta, a.lambda)).collect();
        AtomicConfig::new(raw.n, &pairs).map_err(serde::de::Error::custom)
    }
}

fn check_finite(field: String, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid_config(field, format!("non-finite value {value}")))
    }
}

/// Reduce an angle to [0, 2π).
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % TAU;
    if t < 0.0 {
        t += TAU;
    }
    // `t` can equal TAU after rounding of tiny negative inputs.
    if t >= TAU {
        t = 0.0;
    }
    t
}

/// Circular distance between two angles, in [0, π].
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (wrap_angle(a) - wrap_angle(b)).abs();
    d.min(TAU - d)
}

impl AtomicConfig {
    /// Validate and canonicalize: angles reduced mod 2π, atoms sorted,
    /// near-duplicates (circular separation < [`ATOM_MERGE_TOL`]) merged with
    /// weights summed.
    pub fn new(n: usize, atoms: &[(f64, f64)]) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid_config("n", "must be at least 1"));
        }
        if atoms.is_empty() {
            return Err(Error::invalid_config("atoms", "empty atom list"));
        }
        let mut cleaned = Vec::with_capacity(atoms.len());
        for (k, &(theta, lambda)) in atoms.iter().enumerate() {
            check_finite(format!("atoms[{k}].theta"), theta)?;
            check_finite(format!("atoms[{k}].lambda"), lambda)?;
            if lambda <= 0.0 {
                return Err(Error::invalid_config(
                    format!("atoms[{k}].lambda"),
                    format!("non-positive weight {lambda}"),
                ));
            }
            cleaned.push(Atom {
                theta: wrap_angle(theta),
                lambda,
            });
        }
        cleaned.sort_by(|a, b| a.theta.total_cmp(&b.theta));

        // Merge sweeps: adjacent pairs first, then across the 0/2π seam.
        let mut merged: Vec<Atom> = Vec::with_capacity(cleaned.len());
        for atom in cleaned {
            match merged.last_mut() {
                Some(last) if atom.theta - last.theta < ATOM_MERGE_TOL => {
                    let w = last.lambda + atom.lambda;
                    last.theta = (last.theta * last.lambda + atom.theta * atom.lambda) / w;
                    last.lambda = w;
                }
                _ => merged.push(atom),
            }
        }
        if merged.len() > 1 {
            let first = merged[0];
            let last = *merged.last().unwrap();
            if (first.theta + TAU) - last.theta < ATOM_MERGE_TOL {
                // Weighted mean on the lift of the first atom, then wrapped.
                let w = first.lambda + last.lambda;
                let lifted = ((first.theta + TAU) * first.lambda + last.theta * last.lambda) / w;
                merged.pop();
                merged[0] = Atom {
                    theta: wrap_angle(lifted),
                    lambda: w,
                };
                merged.sort_by(|a, b| a.theta.total_cmp(&b.theta));
            }
        }
        Ok(AtomicConfig { n, atoms: merged })
    }

    /// The conjectured-extremal configuration for index n: N = n atoms of
    /// weight 1/n at θ_j = (2j−1)π/n, so the α_j run over the nth roots
    /// of −1 and f = exp((zⁿ−1)/(zⁿ+1)).
    pub fn reference(n: usize) -> Self {
        assert!(n >= 1, "reference config needs n >= 1");
        let atoms: Vec<(f64, f64)> = (1..=n)
            .map(|j| ((2 * j - 1) as f64 * PI / n as f64, 1.0 / n as f64))
            .collect();
        AtomicConfig::new(n, &atoms).expect("reference config is always valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    /// Total mass t = Σλ_j; f(0) = e^{−t}.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.lambda).sum()
    }

    pub fn alphas(&self) -> Vec<Complex64> {
        self.atoms.iter().map(Atom::alpha).collect()
    }

    /// Same atoms shifted by τ (angles mod 2π), same n.
    pub fn rotated(&self, tau: f64) -> Self {
        let pairs: Vec<(f64, f64)> = self
            .atoms
            .iter()
            .map(|a| (a.theta + tau, a.lambda))
            .collect();
        AtomicConfig::new(self.n, &pairs).expect("rotation preserves validity")
    }

    /// Same atoms, different target index.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        let pairs: Vec<(f64, f64)> = self.atoms.iter().map(|a| (a.theta, a.lambda)).collect();
        AtomicConfig::new(n, &pairs)
    }

    /// Smallest circular gap between consecutive atoms (2π for N = 1).
    pub fn min_gap(&self) -> f64 {
        let m = self.atoms.len();
        if m == 1 {
            return TAU;
        }
        let mut gap = f64::INFINITY;
        for k in 0..m {
            let next = if k + 1 == m {
                self.atoms[0].theta + TAU
            } else {
                self.atoms[k + 1].theta
            };
            gap = gap.min(next - self.atoms[k].theta);
        }
        gap
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn write_json_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string() + "\n")?;
        Ok(())
    }
}
