//! Complex polynomial algebra: the boundary polynomials P and Q, root
//! finding, circle winding numbers, Fejér–Riesz spectral factorization, and
//! the annulus localization of the zeros of P.
//!
//! Root finding is Aberth–Ehrlich simultaneous iteration with a complex
//! Hessenberg QR companion-matrix fallback; the exit criterion is the
//! residual bound |p(root)| ≤ 1e−8·max|coeff|, which also covers clustered
//! multiple roots where per-root accuracy is limited to ~ε^(1/m).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{AtomicConfig, TAU};
use crate::error::{Error, Result};
use crate::series::{f_series, fg_series};

/// Coefficients below this fraction of the largest coefficient are treated
/// as zero when computing degrees.
pub const COEFF_TRIM_REL: f64 = 1e-13;

/// Base residual acceptance for root finding, relative to max|coeff|. Roots
/// whose modulus makes Horner evaluation noisier than this get the rounding
/// envelope as their allowance instead; see `root_allowance`.
pub const ROOT_RESIDUAL_REL: f64 = 1e-8;

/// Roots within this distance of the unit circle are snapped onto it during
/// spectral factorization.
pub const CIRCLE_SNAP_TOL: f64 = 1e-6;

/// Polynomial c₀ + c₁z + … in ascending coefficient order.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPoly {
    coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    coeffs: Vec<(f64, f64)>,
}

impl ComplexPoly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "polynomial needs at least one coefficient");
        ComplexPoly { coeffs }
    }

    pub fn constant(c: Complex64) -> Self {
        ComplexPoly { coeffs: vec![c] }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::ONE)
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut acc = vec![Complex64::ONE];
        for &r in roots {
            let mut next = vec![Complex64::ZERO; acc.len() + 1];
            for (k, &c) in acc.iter().enumerate() {
                next[k] -= r * c;
                next[k + 1] += c;
            }
            acc = next;
        }
        ComplexPoly { coeffs: acc }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> Complex64 {
        self.coeffs.get(j).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Index of the last coefficient above the relative trim threshold
    /// (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        let cutoff = COEFF_TRIM_REL * self.max_coeff_norm();
        self.coeffs
            .iter()
            .rposition(|c| c.norm() > cutoff)
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.max_coeff_norm() == 0.0
    }

    /// Copy truncated at the trimmed degree.
    pub fn trimmed(&self) -> ComplexPoly {
        ComplexPoly::new(self.coeffs[..=self.degree()].to_vec())
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Value and derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::ZERO;
        let mut dp = Complex64::ZERO;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> ComplexPoly {
        if self.coeffs.len() == 1 {
            return ComplexPoly::constant(Complex64::ZERO);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c * j as f64)
            .collect();
        ComplexPoly::new(coeffs)
    }

    /// z^n · p(1/z) for the stated logical degree n (n ≥ trimmed degree).
    pub fn reversed(&self, n: usize) -> ComplexPoly {
        let mut coeffs = vec![Complex64::ZERO; n + 1];
        for (j, &c) in self.coeffs.iter().enumerate() {
            if j <= n {
                coeffs[n - j] = c;
            }
        }
        ComplexPoly::new(coeffs)
    }

    /// Polynomial with conjugated coefficients, i.e. z ↦ conj(p(conj z)).
    pub fn conj_coeffs(&self) -> ComplexPoly {
        ComplexPoly::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    /// Multiply by z^k.
    pub fn shifted_up(&self, k: usize) -> ComplexPoly {
        let mut coeffs = vec![Complex64::ZERO; k];
        coeffs.extend_from_slice(&self.coeffs);
        ComplexPoly::new(coeffs)
    }

    pub fn add(&self, other: &ComplexPoly) -> ComplexPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|j| self.coeff(j) + other.coeff(j)).collect();
        ComplexPoly::new(coeffs)
    }

    pub fn sub(&self, other: &ComplexPoly) -> ComplexPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|j| self.coeff(j) - other.coeff(j)).collect();
        ComplexPoly::new(coeffs)
    }

    pub fn scaled(&self, s: Complex64) -> ComplexPoly {
        ComplexPoly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &ComplexPoly) -> ComplexPoly {
        let mut coeffs = vec![Complex64::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (j, &a) in self.coeffs.iter().enumerate() {
            for (k, &b) in other.coeffs.iter().enumerate() {
                coeffs[j + k] += a * b;
            }
        }
        ComplexPoly::new(coeffs)
    }

    pub fn to_json_string(&self) -> String {
        let shadow = PolyJson {
            coeffs: self.coeffs.iter().map(|c| (c.re, c.im)).collect(),
        };
        serde_json::to_string_pretty(&shadow).expect("polynomial serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let shadow: PolyJson = serde_json::from_str(text)?;
        if shadow.coeffs.is_empty() {
            return Err(Error::invalid_argument("polynomial JSON with no coefficients"));
        }
        Ok(ComplexPoly::new(
            shadow
                .coeffs
                .into_iter()
                .map(|(re, im)| Complex64::new(re, im))
                .collect(),
        ))
    }
}

/// Real trigonometric polynomial T(θ) = c₀ + 2·Re Σ_{j≥1} c_j e^{ijθ},
/// stored through its nonnegative-frequency coefficients (Hermitian
/// symmetry makes the rest redundant).
#[derive(Clone, Debug)]
pub struct TrigPolyReal {
    half: Vec<Complex64>,
}

impl TrigPolyReal {
    /// Build from coefficients c_0..c_n; the constant term is forced real.
    pub fn from_half_coeffs(mut half: Vec<Complex64>) -> Self {
        assert!(!half.is_empty());
        half[0] = Complex64::new(half[0].re, 0.0);
        TrigPolyReal { half }
    }

    /// The boundary real part θ ↦ Re p(e^{iθ}) of a polynomial.
    pub fn re_boundary(p: &ComplexPoly) -> Self {
        let mut half = vec![Complex64::ZERO; p.degree() + 1];
        half[0] = Complex64::new(p.coeff(0).re, 0.0);
        for (j, c) in half.iter_mut().enumerate().skip(1) {
            *c = 0.5 * p.coeff(j);
        }
        TrigPolyReal { half }
    }

    pub fn half_coeffs(&self) -> &[Complex64] {
        &self.half
    }

    pub fn degree(&self) -> usize {
        let cutoff = COEFF_TRIM_REL * self.half.iter().map(|c| c.norm()).fold(0.0, f64::max);
        self.half.iter().rposition(|c| c.norm() > cutoff).unwrap_or(0)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let w = Complex64::from_polar(1.0, theta);
        let mut acc = Complex64::ZERO;
        for &c in self.half.iter().skip(1).rev() {
            acc = (acc + c) * w;
        }
        self.half[0].re + 2.0 * acc.re
    }

    pub fn eval_d1(&self, theta: f64) -> f64 {
        let w = Complex64::from_polar(1.0, theta);
        let mut acc = Complex64::ZERO;
        let mut wj = Complex64::ONE;
        for (j, &c) in self.half.iter().enumerate().skip(1) {
            wj *= w;
            acc += j as f64 * c * wj;
        }
        -2.0 * acc.im
    }

    pub fn eval_d2(&self, theta: f64) -> f64 {
        let w = Complex64::from_polar(1.0, theta);
        let mut acc = Complex64::ZERO;
        let mut wj = Complex64::ONE;
        for (j, &c) in self.half.iter().enumerate().skip(1) {
            wj *= w;
            acc += (j * j) as f64 * c * wj;
        }
        -2.0 * acc.re
    }

    /// The Laurent lift z^n·T as an ordinary polynomial of degree 2n:
    /// coefficients conj(c_n)..conj(c_1), c_0, c_1..c_n.
    pub fn laurent_lift(&self) -> ComplexPoly {
        let n = self.degree();
        let mut coeffs = vec![Complex64::ZERO; 2 * n + 1];
        for j in 0..=n {
            coeffs[n + j] = self.half[j];
            coeffs[n - j] = self.half[j].conj();
        }
        coeffs[n] = Complex64::new(self.half[0].re, 0.0);
        ComplexPoly::new(coeffs)
    }
}

/// P(z) = a_n + 2Σ_{j=1}^n a_{n−j} z^j, built from the rotation-normalized
/// config so the constant term a_n is real ≥ 0. The degree-n coefficient is
/// 2a₀ > 0, so P always has degree exactly n.
pub fn build_p(config: &AtomicConfig) -> ComplexPoly {
    build_p_from(&crate::optimizer::normalize_rotation(config).config)
}

/// P built from the config as given (no rotation normalization); this is
/// the polynomial whose boundary values drive the gradient formulas.
pub fn build_p_from(config: &AtomicConfig) -> ComplexPoly {
    let n = config.n();
    let a = f_series(config, n);
    let mut coeffs = vec![Complex64::ZERO; n + 1];
    coeffs[0] = a.coeff(n);
    for j in 1..=n {
        coeffs[j] = 2.0 * a.coeff(n - j);
    }
    ComplexPoly::new(coeffs)
}

/// Q(z) = T_n(fg) + 2Σ_{j=1}^n T_{n−j}(fg) z^j from the rotation-normalized
/// config.
pub fn build_q(config: &AtomicConfig) -> ComplexPoly {
    let normalized = crate::optimizer::normalize_rotation(config).config;
    let n = normalized.n();
    let t = fg_series(&normalized, n);
    let mut coeffs = vec![Complex64::ZERO; n + 1];
    coeffs[0] = t.coeff(n);
    for j in 1..=n {
        coeffs[j] = 2.0 * t.coeff(n - j);
    }
    ComplexPoly::new(coeffs)
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

const ABERTH_MAX_ITERS: usize = 200;
const ABERTH_STEP_TOL: f64 = 1e-13;

/// All `degree` roots with multiplicity. Aberth–Ehrlich first; companion
/// eigenvalues on stagnation; acceptance by residual, which is the right
/// criterion for clustered multiple roots. A root of modulus r is allowed
/// the larger of the coefficient-scale tolerance and the f64 rounding
/// envelope of Horner evaluation at r, since no representable point can
/// evaluate below that envelope.
pub fn roots(p: &ComplexPoly) -> Result<Vec<Complex64>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let trimmed = p.trimmed();
    let deg = trimmed.degree();
    if deg == 0 {
        return Ok(Vec::new());
    }

    // Exact zero constant terms peel off roots at the origin; tiny nonzero
    // constants are genuine near-zero roots and stay with the iteration.
    let mut origin = 0;
    let mut coeffs = trimmed.coeffs().to_vec();
    while coeffs.len() > 1 && coeffs[0] == Complex64::ZERO {
        coeffs.remove(0);
        origin += 1;
    }
    let mut found = vec![Complex64::ZERO; origin];
    if coeffs.len() == 1 {
        return Ok(found);
    }
    let reduced = ComplexPoly::new(coeffs);
    let maxc = reduced.max_coeff_norm();

    let mut best: Option<(Vec<Complex64>, f64)> = None;
    for &radius_factor in &[1.0, 0.25, 4.0] {
        let candidate = aberth(&reduced, radius_factor);
        let score = residual_score(&reduced, &candidate, maxc);
        if best.as_ref().is_none_or(|(_, b)| score < *b) {
            best = Some((candidate, score));
        }
        if best.as_ref().unwrap().1 <= 1.0 {
            break;
        }
    }
    let (mut roots_found, mut score) = best.unwrap();

    if score > 1.0 {
        let mut eigen = companion_eigenvalues(&monic_coeffs(&reduced));
        for z in &mut eigen {
            *z = newton_polish(&reduced, *z, 8);
        }
        let s = residual_score(&reduced, &eigen, maxc);
        if s < score {
            roots_found = eigen;
            score = s;
        }
    }
    if score > 1.0 {
        let (residual, tolerance) = worst_root_residual(&reduced, &roots_found, maxc);
        return Err(Error::RootsDidNotConverge {
            residual,
            tolerance,
        });
    }
    found.extend(roots_found);
    Ok(found)
}

/// Residual allowance at a candidate root: the coefficient-scale tolerance,
/// widened to the running-error bound ~2d·eps·Σ|c_k|·r^k when the root's
/// modulus makes Horner evaluation noisier than that tolerance.
fn root_allowance(p: &ComplexPoly, z: Complex64, maxc: f64) -> f64 {
    let r = z.norm();
    if !r.is_finite() {
        return ROOT_RESIDUAL_REL * maxc;
    }
    let mut envelope = 0.0;
    let mut pw = 1.0f64;
    for c in p.coeffs() {
        envelope += c.norm() * pw;
        pw *= r;
    }
    let noise = 8.0 * p.degree() as f64 * f64::EPSILON * envelope;
    (ROOT_RESIDUAL_REL * maxc).max(noise)
}

/// Worst residual over the candidate set, normalized by each root's
/// allowance; a set is acceptable when the score is at most 1.
fn residual_score(p: &ComplexPoly, roots: &[Complex64], maxc: f64) -> f64 {
    roots
        .iter()
        .map(|&z| {
            let v = p.eval(z).norm();
            if v.is_finite() {
                v / root_allowance(p, z, maxc)
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// (residual, allowance) of the worst-normalized candidate, for reporting.
fn worst_root_residual(p: &ComplexPoly, roots: &[Complex64], maxc: f64) -> (f64, f64) {
    let mut out = (0.0, ROOT_RESIDUAL_REL * maxc);
    let mut worst = -1.0f64;
    for &z in roots {
        let v = p.eval(z).norm();
        let allow = root_allowance(p, z, maxc);
        let score = if v.is_finite() { v / allow } else { f64::INFINITY };
        if score > worst {
            worst = score;
            out = (v, allow);
        }
    }
    out
}

fn monic_coeffs(p: &ComplexPoly) -> Vec<Complex64> {
    let c = p.coeffs();
    let lead = c[c.len() - 1];
    c[..c.len() - 1].iter().map(|x| x / lead).collect()
}

fn newton_polish(p: &ComplexPoly, mut z: Complex64, iters: usize) -> Complex64 {
    for _ in 0..iters {
        let (v, d) = p.eval_with_derivative(z);
        if d == Complex64::ZERO {
            break;
        }
        let step = v / d;
        if !step.is_finite() || step.norm() < 1e-17 * (1.0 + z.norm()) {
            break;
        }
        z -= step;
    }
    z
}

/// Gauss–Seidel Aberth–Ehrlich sweep from a spiral of initial guesses.
fn aberth(p: &ComplexPoly, radius_factor: f64) -> Vec<Complex64> {
    let monic = monic_coeffs(p);
    let deg = monic.len();
    let cauchy = 1.0 + monic.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let base = if monic[0] == Complex64::ZERO {
        0.5 * cauchy
    } else {
        monic[0].norm().powf(1.0 / deg as f64)
    };
    let radius = (radius_factor * base).clamp(1e-6, cauchy);

    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            let angle = TAU * k as f64 / deg as f64 + 0.93;
            Complex64::from_polar(radius * (1.0 + 0.05 * (k % 3) as f64), angle)
        })
        .collect();

    for _ in 0..ABERTH_MAX_ITERS {
        let mut max_step = 0.0f64;
        for i in 0..deg {
            let (v, d) = p.eval_with_derivative(z[i]);
            if v == Complex64::ZERO {
                continue;
            }
            let newton = if d == Complex64::ZERO {
                Complex64::new(1e-8, 1e-8)
            } else {
                v / d
            };
            let mut repulsion = Complex64::ZERO;
            for j in 0..deg {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm_sqr() < 1e-60 {
                        continue;
                    }
                    repulsion += diff.inv();
                }
            }
            let denom = Complex64::ONE - newton * repulsion;
            let step = if denom.norm_sqr() < 1e-60 {
                newton
            } else {
                newton / denom
            };
            if !step.is_finite() {
                continue;
            }
            z[i] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
        }
        if max_step < ABERTH_STEP_TOL {
            break;
        }
    }
    z
}

/// Eigenvalues of the Frobenius companion matrix of the monic polynomial
/// z^d + m_{d−1}z^{d−1} + … + m_0 by single-shift complex Hessenberg QR.
fn companion_eigenvalues(monic: &[Complex64]) -> Vec<Complex64> {
    let d = monic.len();
    let mut h = vec![Complex64::ZERO; d * d];
    for k in 0..d {
        h[k] = -monic[d - 1 - k];
    }
    for i in 1..d {
        h[i * d + i - 1] = Complex64::ONE;
    }
    hessenberg_eigenvalues(&mut h, d)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr = 0.5 * (a + d);
    let det = a * d - b * c;
    let disc = (tr * tr - det).sqrt();
    let e1 = tr + disc;
    let e2 = tr - disc;
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    if g == Complex64::ZERO {
        return (1.0, Complex64::ZERO);
    }
    if f == Complex64::ZERO {
        return (0.0, g.conj() / g.norm());
    }
    let r = (f.norm_sqr() + g.norm_sqr()).sqrt();
    let c = f.norm() / r;
    let s = (f / f.norm()) * g.conj() / r;
    (c, s)
}

fn hessenberg_eigenvalues(h: &mut [Complex64], d: usize) -> Vec<Complex64> {
    let at = |h: &[Complex64], i: usize, j: usize| h[i * d + j];
    let scale = h.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    let mut eigen = Vec::with_capacity(d);
    let mut hi = d - 1;
    let mut stagnation = 0usize;
    let mut total = 0usize;
    let budget = 60 * d + 200;

    loop {
        // Deflate negligible subdiagonals.
        for i in 0..hi {
            let local = at(h, i, i).norm() + at(h, i + 1, i + 1).norm();
            let tol = if local > 0.0 {
                f64::EPSILON * local
            } else {
                f64::EPSILON * scale
            };
            if at(h, i + 1, i).norm() <= tol {
                h[(i + 1) * d + i] = Complex64::ZERO;
            }
        }
        while hi > 0 && at(h, hi, hi - 1) == Complex64::ZERO {
            eigen.push(at(h, hi, hi));
            hi -= 1;
            stagnation = 0;
        }
        if hi == 0 {
            eigen.push(at(h, 0, 0));
            break;
        }
        let mut lo = hi;
        while lo > 0 && at(h, lo, lo - 1) != Complex64::ZERO {
            lo -= 1;
        }

        total += 1;
        stagnation += 1;
        if total > budget {
            // Give up refining; report current diagonal of the active block.
            for i in (0..=hi).rev() {
                eigen.push(at(h, i, i));
            }
            break;
        }
        let mu = if stagnation % 16 == 0 {
            at(h, hi, hi) + 0.7390851332151607 * at(h, hi, hi - 1).norm()
        } else {
            wilkinson_shift(
                at(h, hi - 1, hi - 1),
                at(h, hi - 1, hi),
                at(h, hi, hi - 1),
                at(h, hi, hi),
            )
        };

        // Explicit single-shift QR sweep on the active window [lo, hi].
        let mut rotations = Vec::with_capacity(hi - lo);
        for i in lo..=hi {
            h[i * d + i] -= mu;
        }
        for k in lo..hi {
            let (c, s) = givens(at(h, k, k), at(h, k + 1, k));
            rotations.push((c, s));
            for j in k..=hi {
                let x = at(h, k, j);
                let y = at(h, k + 1, j);
                h[k * d + j] = c * x + s * y;
                h[(k + 1) * d + j] = -s.conj() * x + c * y;
            }
        }
        for (k, &(c, s)) in rotations.iter().enumerate() {
            let k = lo + k;
            let top = if k + 2 <= hi { k + 2 } else { hi };
            for i in lo..=top {
                let x = at(h, i, k);
                let y = at(h, i, k + 1);
                h[i * d + k] = c * x + s.conj() * y;
                h[i * d + k + 1] = -s * x + c * y;
            }
        }
        for i in lo..=hi {
            h[i * d + i] += mu;
        }
    }
    eigen
}

// ---------------------------------------------------------------------------
// Winding numbers
// ---------------------------------------------------------------------------

/// Winding number of θ ↦ e^{iθ}·p(e^{iθ}) around the origin, which equals
/// the number of zeros of z·p(z) in the open disk when p has none on the
/// circle. Sample count doubles until two passes agree.
pub fn winding_number(p: &ComplexPoly, initial_samples: usize) -> Result<i64> {
    let mut samples = initial_samples.max(64).next_power_of_two();
    let mut previous: Option<i64> = None;
    while samples <= (1 << 22) {
        let w = winding_pass(p, samples)?;
        if previous == Some(w) {
            return Ok(w);
        }
        previous = Some(w);
        samples *= 2;
    }
    Err(Error::invalid_argument(
        "winding number failed to stabilize under sample doubling",
    ))
}

fn winding_pass(p: &ComplexPoly, samples: usize) -> Result<i64> {
    let guard = 1e-10 * p.max_coeff_norm().max(1.0);
    let value_at = |theta: f64| {
        let w = Complex64::from_polar(1.0, theta);
        w * p.eval(w)
    };
    let mut previous = value_at(0.0);
    if previous.norm() <= guard {
        return Err(Error::CircleVanishing {
            theta: 0.0,
            magnitude: previous.norm(),
        });
    }
    let mut total = 0.0;
    for k in 1..=samples {
        let theta = TAU * k as f64 / samples as f64;
        let v = value_at(theta);
        if v.norm() <= guard {
            return Err(Error::CircleVanishing {
                theta,
                magnitude: v.norm(),
            });
        }
        total += (v / previous).arg();
        previous = v;
    }
    let turns = total / TAU;
    Ok(turns.round() as i64)
}

// ---------------------------------------------------------------------------
// Fejér–Riesz factorization
// ---------------------------------------------------------------------------

/// Result of spectral factorization T(θ) = scale²·|factor(e^{iθ})|² with a
/// monic factor free of roots strictly inside the unit disk.
#[derive(Clone, Debug)]
pub struct SpectralFactorization {
    pub scale: f64,
    /// Monic; roots outside or on the unit circle.
    pub factor: ComplexPoly,
    /// Roots of `factor` (outside first, then polished circle roots).
    pub roots: Vec<Complex64>,
    /// sup over a 2048-point grid of |scale²·|factor|² − T|.
    pub sup_error: f64,
}

impl SpectralFactorization {
    /// Roots lying on the unit circle after snapping.
    pub fn circle_roots(&self) -> Vec<Complex64> {
        self.roots
            .iter()
            .copied()
            .filter(|w| (w.norm() - 1.0).abs() <= CIRCLE_SNAP_TOL)
            .collect()
    }
}

/// Fejér–Riesz: factor a nonnegative trigonometric polynomial. Boundary
/// roots (even multiplicity) are snapped to the circle, paired, and split
/// evenly into the factor.
pub fn fejer_riesz(t: &TrigPolyReal) -> Result<SpectralFactorization> {
    let grid = 4096;
    let mut min_val = f64::INFINITY;
    let mut min_theta = 0.0;
    for k in 0..grid {
        let theta = TAU * k as f64 / grid as f64;
        let v = t.eval(theta);
        if v < min_val {
            min_val = v;
            min_theta = theta;
        }
    }
    if min_val < -1e-9 {
        return Err(Error::NotNonnegative {
            min: min_val,
            theta: min_theta,
        });
    }

    let n = t.degree();
    if n == 0 {
        let c0 = t.half_coeffs()[0].re.max(0.0);
        return Ok(SpectralFactorization {
            scale: c0.sqrt(),
            factor: ComplexPoly::one(),
            roots: Vec::new(),
            sup_error: reconstruction_error(t, c0, &ComplexPoly::one()),
        });
    }

    let q = t.laurent_lift();
    let all = roots(&q)?;

    let mut outside = Vec::new();
    let mut inside = 0usize;
    let mut on_circle = Vec::new();
    for w in all {
        let m = w.norm();
        if m > 1.0 + CIRCLE_SNAP_TOL {
            outside.push(newton_polish(&q, w, 6));
        } else if m < 1.0 - CIRCLE_SNAP_TOL {
            inside += 1;
        } else {
            on_circle.push(w);
        }
    }
    if on_circle.len() % 2 == 1 {
        return Err(Error::UnpairedCircleRoot {
            count: on_circle.len(),
        });
    }

    let mut selected = outside.clone();
    for (angle, multiplicity) in pair_circle_roots(t, &on_circle)? {
        let w = Complex64::from_polar(1.0, angle);
        for _ in 0..multiplicity {
            selected.push(w);
        }
    }
    if selected.len() != n || inside != outside.len() {
        return Err(Error::FactorizationDegree {
            selected: selected.len(),
            expected: n,
        });
    }

    let lead = q.coeff(q.degree()).norm();
    let denom: f64 = outside.iter().map(|w| w.norm()).product();
    let scale_sq = lead / denom;
    let factor = ComplexPoly::from_roots(&selected);
    Ok(SpectralFactorization {
        scale: scale_sq.sqrt(),
        sup_error: reconstruction_error(t, scale_sq, &factor),
        factor,
        roots: selected,
    })
}

fn reconstruction_error(t: &TrigPolyReal, scale_sq: f64, factor: &ComplexPoly) -> f64 {
    let grid = 2048;
    let mut sup = 0.0f64;
    for k in 0..grid {
        let theta = TAU * k as f64 / grid as f64;
        let w = Complex64::from_polar(1.0, theta);
        let err = (scale_sq * factor.eval(w).norm_sqr() - t.eval(theta)).abs();
        sup = sup.max(err);
    }
    sup
}

/// Cluster near-circle roots into even groups and return (polished angle,
/// multiplicity-in-factor) pairs. Cluster representatives are refined by
/// Newton on T′ = 0 (double roots of the lift are minima of T).
fn pair_circle_roots(t: &TrigPolyReal, on_circle: &[Complex64]) -> Result<Vec<(f64, usize)>> {
    if on_circle.is_empty() {
        return Ok(Vec::new());
    }
    let mut angles: Vec<f64> = on_circle.iter().map(|w| crate::config::wrap_angle(w.arg())).collect();
    angles.sort_by(f64::total_cmp);

    // Rotate the list so the largest gap sits at the seam, then group.
    let m = angles.len();
    let mut cut = 0;
    let mut widest = -1.0;
    for i in 0..m {
        let next = if i + 1 == m { angles[0] + TAU } else { angles[i + 1] };
        let gap = next - angles[i];
        if gap > widest {
            widest = gap;
            cut = (i + 1) % m;
        }
    }
    let lifted: Vec<f64> = (0..m)
        .map(|i| {
            let a = angles[(cut + i) % m];
            if (cut + i) >= m { a + TAU } else { a }
        })
        .collect();

    const CLUSTER_GAP: f64 = 1e-3;
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for &a in &lifted {
        match groups.last_mut() {
            Some(g) if a - *g.last().unwrap() < CLUSTER_GAP => g.push(a),
            _ => groups.push(vec![a]),
        }
    }
    let mut out = Vec::with_capacity(groups.len());
    for g in groups {
        if g.len() % 2 == 1 {
            return Err(Error::UnpairedCircleRoot { count: g.len() });
        }
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        out.push((polish_minimum(t, mean), g.len() / 2));
    }
    Ok(out)
}

/// Newton on T′(θ) = 0 near a boundary minimum, golden-section fallback.
fn polish_minimum(t: &TrigPolyReal, mut theta: f64) -> f64 {
    let start = theta;
    for _ in 0..40 {
        let d1 = t.eval_d1(theta);
        let d2 = t.eval_d2(theta);
        if d2.abs() < 1e-300 {
            break;
        }
        let step = d1 / d2;
        theta -= step;
        if (theta - start).abs() > 2e-3 {
            // Newton escaped the cluster; fall back to a golden search.
            return golden_min(|x| t.eval(x), start - 2e-3, start + 2e-3, 1e-14);
        }
        if step.abs() < 1e-15 {
            break;
        }
    }
    if t.eval(theta) <= t.eval(start) {
        crate::config::wrap_angle(theta)
    } else {
        crate::config::wrap_angle(golden_min(|x| t.eval(x), start - 2e-3, start + 2e-3, 1e-14))
    }
}

/// Golden-section minimizer on [a, b] to the given abscissa tolerance.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

// ---------------------------------------------------------------------------
// Annulus localization
// ---------------------------------------------------------------------------

/// Zeros of P and the annulus 1 ≤ |z| ≤ r that should contain them at
/// extremal configurations, with r = (1/a₀)·√(Σ_{j<n}|a_j|² + a_n²/4).
#[derive(Clone, Debug)]
pub struct AnnulusReport {
    pub radius: f64,
    pub contained: bool,
    pub roots: Vec<Complex64>,
}

pub fn annulus_radius(config: &AtomicConfig) -> Result<AnnulusReport> {
    let normalized = crate::optimizer::normalize_rotation(config).config;
    let n = normalized.n();
    let a = f_series(&normalized, n);
    let mut sum = 0.0;
    for j in 0..n {
        sum += a.coeff(j).norm_sqr();
    }
    let an = a.coeff(n).re;
    let radius = (sum + 0.25 * an * an).sqrt() / a.coeff(0).re;
    let p_roots = roots(&build_p_from(&normalized))?;
    let contained = p_roots
        .iter()
        .all(|z| (1.0 - 1e-8..=radius + 1e-8).contains(&z.norm()));
    Ok(AnnulusReport {
        radius,
        contained,
        roots: p_roots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::AtomicConfig;
    use std::f64::consts::{E, PI};

    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: Complex64, b: Complex64, tol: f64, what: &str) {
        assert!((a - b).norm() < tol, "{what}: {a} vs {b}");
    }

    fn sort_by_arg(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        v
    }

    #[test]
    fn from_roots_and_eval() {
        let p = ComplexPoly::from_roots(&[Complex64::ONE, -Complex64::ONE]);
        assert_close(p.coeff(0), -Complex64::ONE, 1e-15, "c0");
        assert_close(p.coeff(1), Complex64::ZERO, 1e-15, "c1");
        assert_close(p.coeff(2), Complex64::ONE, 1e-15, "c2");
        assert_close(p.eval(Complex64::new(2.0, 0.0)), Complex64::new(3.0, 0.0), 1e-15, "eval");
    }

    #[test]
    fn degree_trims_relative_noise() {
        let p = ComplexPoly::new(vec![
            Complex64::ONE,
            Complex64::new(2.0, 0.0),
            Complex64::new(1e-15, 0.0),
        ]);
        assert_eq!(p.degree(), 1);
        assert_eq!(p.trimmed().coeffs().len(), 2);
    }

    #[test]
    fn build_p_reference() {
        let p1 = build_p(&AtomicConfig::reference(1));
        assert_close(p1.coeff(0), Complex64::new(2.0 / E, 0.0), 1e-14, "p0");
        assert_close(p1.coeff(1), Complex64::new(2.0 / E, 0.0), 1e-14, "p1");
        for n in 2..=6 {
            let p = build_p(&AtomicConfig::reference(n));
            assert_close(p.coeff(0), Complex64::new(2.0 / E, 0.0), 1e-13, "const");
            for j in 1..n {
                assert!(p.coeff(j).norm() < 1e-13);
            }
            assert_close(p.coeff(n), Complex64::new(2.0 / E, 0.0), 1e-13, "lead");
        }
    }

    #[test]
    fn build_q_reference() {
        for n in 1..=6 {
            let q = build_q(&AtomicConfig::reference(n));
            for j in 0..n {
                assert!(q.coeff(j).norm() < 1e-13, "q_{j} for n={n}");
            }
            assert_close(q.coeff(n), Complex64::new(-2.0 / E, 0.0), 1e-13, "q_n");
        }
    }

    #[test]
    fn p_has_degree_n_and_small_mass_continuity() {
        let c = AtomicConfig::new(3, &[(1.0, 1e-6)]).unwrap();
        let p = build_p(&c);
        assert_eq!(p.degree(), 3);
        assert!((p.coeff(3).re - 2.0 * (-1e-6f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn roots_simple_cases() {
        let r = sort_by_arg(roots(&ComplexPoly::new(vec![
            Complex64::ONE,
            Complex64::ZERO,
            Complex64::ONE,
        ]))
        .unwrap());
        assert_close(r[0], Complex64::new(0.0, -1.0), 1e-10, "-i");
        assert_close(r[1], Complex64::new(0.0, 1.0), 1e-10, "i");

        for n in 1..=8 {
            let mut coeffs = vec![Complex64::ZERO; n + 1];
            coeffs[0] = Complex64::new(2.0 / E, 0.0);
            coeffs[n] = Complex64::new(2.0 / E, 0.0);
            let rts = roots(&ComplexPoly::new(coeffs)).unwrap();
            assert_eq!(rts.len(), n);
            for z in rts {
                assert!((z.norm() - 1.0).abs() < 1e-9);
                assert!((z.powu(n as u32) + 1.0).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn roots_double_root() {
        // (1 − z)² = 1 − 2z + z².
        let p = ComplexPoly::new(vec![
            Complex64::ONE,
            Complex64::new(-2.0, 0.0),
            Complex64::ONE,
        ]);
        let r = roots(&p).unwrap();
        assert_eq!(r.len(), 2);
        for z in r {
            assert!((z - Complex64::ONE).norm() < 1e-6, "double root near 1, got {z}");
        }
    }

    #[test]
    fn roots_at_origin_are_peeled() {
        // z³(z − 2)
        let p = ComplexPoly::new(vec![
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::new(-2.0, 0.0),
            Complex64::ONE,
        ]);
        let r = roots(&p).unwrap();
        assert_eq!(r.len(), 4);
        assert_eq!(r.iter().filter(|z| z.norm() == 0.0).count(), 3);
        assert!(r.iter().any(|z| (z - Complex64::new(2.0, 0.0)).norm() < 1e-10));
    }

    #[test]
    fn roots_zero_polynomial_errors() {
        let p = ComplexPoly::new(vec![Complex64::ZERO, Complex64::ZERO]);
        assert!(matches!(roots(&p), Err(Error::ZeroPolynomial)));
    }

    #[test]
    fn roots_random_polynomials_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for trial in 0..30 {
            let deg = rng.random_range(2..=24);
            let truth: Vec<Complex64> = (0..deg)
                .map(|_| {
                    let r = rng.random_range(0.05..3.0);
                    Complex64::from_polar(r, rng.random_range(0.0..TAU))
                })
                .collect();
            let p = ComplexPoly::from_roots(&truth);
            let mut found = roots(&p).unwrap();
            assert_eq!(found.len(), deg);
            // Greedy matching: every true root has a nearby found root.
            for t in &truth {
                let (k, d) = found
                    .iter()
                    .enumerate()
                    .map(|(k, z)| (k, (z - t).norm()))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap();
                assert!(d < 1e-6 * (1.0 + t.norm()), "trial {trial}: root {t} missed by {d:.2e}");
                found.swap_remove(k);
            }
        }
    }

    fn worst_residual(p: &ComplexPoly, roots: &[Complex64]) -> f64 {
        roots
            .iter()
            .map(|&z| {
                let v = p.eval(z).norm();
                if v.is_finite() { v } else { f64::INFINITY }
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn companion_fallback_agrees_with_aberth() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..10 {
            let deg = rng.random_range(2..=12);
            let coeffs: Vec<Complex64> = (0..=deg)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let p = ComplexPoly::new(coeffs);
            if p.degree() < 1 {
                continue;
            }
            let p = p.trimmed();
            let mut eigen = companion_eigenvalues(&monic_coeffs(&p));
            for z in &mut eigen {
                *z = newton_polish(&p, *z, 10);
            }
            assert_eq!(eigen.len(), p.degree());
            let res = worst_residual(&p, &eigen);
            assert!(res <= 1e-8 * p.max_coeff_norm(), "companion residual {res:.2e}");
        }
    }

    #[test]
    fn winding_examples() {
        assert_eq!(winding_number(&ComplexPoly::one(), 64).unwrap(), 1);
        let p = ComplexPoly::new(vec![Complex64::new(-2.0, 0.0), Complex64::ONE]);
        assert_eq!(winding_number(&p, 64).unwrap(), 1);
        for n in 1..=6 {
            let dp = build_p(&AtomicConfig::reference(n)).derivative();
            assert_eq!(winding_number(&dp, 256).unwrap(), n as i64);
        }
    }

    #[test]
    fn winding_detects_circle_root() {
        let p = ComplexPoly::new(vec![-Complex64::ONE, Complex64::ONE]);
        assert!(matches!(
            winding_number(&p, 4096),
            Err(Error::CircleVanishing { .. })
        ));
    }

    #[test]
    fn winding_matches_argument_principle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let deg = rng.random_range(1..=12);
            let truth: Vec<Complex64> = (0..deg)
                .map(|_| {
                    let inside = rng.random::<bool>();
                    let r = if inside {
                        rng.random_range(0.05..0.995)
                    } else {
                        rng.random_range(1.005..3.0)
                    };
                    Complex64::from_polar(r, rng.random_range(0.0..TAU))
                })
                .collect();
            let p = ComplexPoly::from_roots(&truth);
            let in_disk = truth.iter().filter(|z| z.norm() < 1.0).count() as i64;
            let w = winding_number(&p, 256).unwrap();
            assert_eq!(w, in_disk + 1, "zp(z) has the +1 from the z factor");
        }
    }

    #[test]
    fn fejer_riesz_cardioid() {
        // T = 2 + 2cosθ = |1 + e^{iθ}|².
        let t = TrigPolyReal::from_half_coeffs(vec![Complex64::new(2.0, 0.0), Complex64::ONE]);
        let f = fejer_riesz(&t).unwrap();
        assert!((f.scale - 1.0).abs() < 1e-8);
        assert_eq!(f.factor.degree(), 1);
        assert_close(f.factor.coeff(0), Complex64::ONE, 1e-8, "root at -1 gives 1+z");
        assert!(f.sup_error < 1e-9, "sup error {:.2e}", f.sup_error);
    }

    #[test]
    fn fejer_riesz_constant() {
        let t = TrigPolyReal::from_half_coeffs(vec![Complex64::ONE]);
        let f = fejer_riesz(&t).unwrap();
        assert_eq!(f.factor.degree(), 0);
        assert!((f.scale - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fejer_riesz_reference_boundary_part() {
        for n in 1..=8usize {
            let p = build_p(&AtomicConfig::reference(n));
            let t = TrigPolyReal::re_boundary(&p);
            let f = fejer_riesz(&t).unwrap();
            assert_eq!(f.factor.degree(), n, "factor degree for n={n}");
            assert!(
                (f.scale - (-0.5f64).exp()).abs() < 1e-6,
                "scale e^(-1/2) for n={n}, got {}",
                f.scale
            );
            assert!(f.sup_error <= 1e-7, "n={n}: sup error {:.2e}", f.sup_error);
            assert_eq!(f.circle_roots().len(), n);
        }
    }

    #[test]
    fn fejer_riesz_random_strictly_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..20 {
            let deg = rng.random_range(1..=16);
            let base: Vec<Complex64> = (0..=deg)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            // T = |b(e^{iθ})|² + 0.1: autocorrelation coefficients.
            let mut half = vec![Complex64::ZERO; deg + 1];
            for j in 0..=deg {
                for k in 0..=(deg - j) {
                    half[j] += base[k + j] * base[k].conj();
                }
            }
            half[0] += 0.1;
            let t = TrigPolyReal::from_half_coeffs(half);
            let f = fejer_riesz(&t).unwrap();
            assert!(f.sup_error <= 1e-9, "sup error {:.2e}", f.sup_error);
            for w in &f.roots {
                assert!(w.norm() > 1.0 - 1e-9, "factor root inside disk: {w}");
            }
        }
    }

    #[test]
    fn fejer_riesz_rejects_negative() {
        let t = TrigPolyReal::from_half_coeffs(vec![Complex64::new(1.0, 0.0), Complex64::ONE]);
        assert!(matches!(fejer_riesz(&t), Err(Error::NotNonnegative { .. })));
    }

    #[test]
    fn annulus_reference_is_sqrt_two() {
        for n in 1..=8 {
            let report = annulus_radius(&AtomicConfig::reference(n)).unwrap();
            assert!(
                (report.radius - 2.0f64.sqrt()).abs() < 1e-12,
                "n={n}: {}",
                report.radius
            );
            assert!(report.contained, "reference roots sit on the unit circle");
        }
    }

    #[test]
    fn annulus_single_atom_example() {
        let c = AtomicConfig::new(1, &[(PI, 2.0)]).unwrap();
        let report = annulus_radius(&c).unwrap();
        assert!((report.radius - 5.0f64.sqrt()).abs() < 1e-12);
        assert!(report.contained);
        assert_eq!(report.roots.len(), 1);
        assert_close(report.roots[0], Complex64::new(-2.0, 0.0), 1e-10, "root of P");
    }

    #[test]
    fn re_p_positive_inside_disk_at_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for n in [1usize, 2, 3, 5] {
            let p = build_p(&AtomicConfig::reference(n));
            for _ in 0..1000 {
                let z = Complex64::from_polar(rng.random_range(0.0..0.999), rng.random_range(0.0..TAU));
                assert!(p.eval(z).re > 0.0, "Re P > 0 fails at {z} for n={n}");
            }
        }
    }

    #[test]
    fn poly_json_round_trip() {
        let p = ComplexPoly::new(vec![Complex64::new(1.5, -0.5), Complex64::new(0.0, 2.0)]);
        let s = p.to_json_string();
        assert!(s.contains("coeffs"));
        let back = ComplexPoly::from_json_str(&s).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn trig_poly_eval_and_derivatives() {
        // T(θ) = 2 + 2cosθ: T' = −2sinθ, T'' = −2cosθ.
        let t = TrigPolyReal::from_half_coeffs(vec![Complex64::new(2.0, 0.0), Complex64::ONE]);
        for &theta in &[0.0, 0.7, 2.0, 4.5] {
            assert!((t.eval(theta) - (2.0 + 2.0 * theta.cos())).abs() < 1e-14);
            assert!((t.eval_d1(theta) + 2.0 * theta.sin()).abs() < 1e-14);
            assert!((t.eval_d2(theta) + 2.0 * theta.cos()).abs() < 1e-14);
        }
    }
}
