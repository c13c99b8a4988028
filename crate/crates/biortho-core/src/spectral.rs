//! Hermite-function basis, Gauss-Hermite quadrature, and the ladder
//! realizations of q̂₀ = x· and p̂₀ = −i d/dx.
//!
//! The orthonormal Hermite functions satisfy the stable upward recurrence
//!
//! ```text
//! e_0(x) = π^{−1/4} e^{−x²/2}
//! e_{n+1}(x) = x √(2/(n+1)) e_n(x) − √(n/(n+1)) e_{n−1}(x)
//! ```
//!
//! and the ladder identities
//!
//! ```text
//! x e_n  = √(n/2) e_{n−1} + √((n+1)/2) e_{n+1}
//! e_n′   = √(n/2) e_{n−1} − √((n+1)/2) e_{n+1}
//! ```
//!
//! which make multiplication by x and differentiation exact tridiagonal
//! maps on coefficients. Applying either to a length-N vector produces one
//! coefficient beyond the truncation; that spill is reported, never
//! silently kept.

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("basis size mismatch: {0} vs {1}")]
    BasisMismatch(usize, usize),
    #[error("empty coefficient vector")]
    Empty,
    #[error("kernel not finite at quadrature node x = {0}")]
    NonFiniteKernel(f64),
}

/// A Schwartz-class test function as a finite Hermite expansion
/// f = Σ_{n<N} c_n e_n.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub coeffs: Vec<C64>,
}

impl TestFunction {
    pub fn new(coeffs: Vec<C64>) -> Self {
        TestFunction { coeffs }
    }

    pub fn zero(n: usize) -> Self {
        TestFunction { coeffs: vec![C64::new(0.0, 0.0); n] }
    }

    /// e_k expressed on an N-coefficient basis.
    pub fn basis_vector(n: usize, k: usize) -> Self {
        let mut f = Self::zero(n);
        f.coeffs[k] = C64::new(1.0, 0.0);
        f
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// L² norm — Parseval: ‖f‖² = Σ |c_n|².
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, a: C64) -> Self {
        TestFunction { coeffs: self.coeffs.iter().map(|c| a * c).collect() }
    }

    pub fn add(&self, g: &TestFunction) -> Result<TestFunction, SpectralError> {
        if self.len() != g.len() {
            return Err(SpectralError::BasisMismatch(self.len(), g.len()));
        }
        Ok(TestFunction {
            coeffs: self.coeffs.iter().zip(&g.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, g: &TestFunction) -> Result<TestFunction, SpectralError> {
        Ok(self.add(&g.scaled(C64::new(-1.0, 0.0)))?)
    }

    /// Pointwise value Σ c_n e_n(x).
    pub fn eval(&self, x: f64) -> C64 {
        let e = hermite_values(self.len(), x);
        self.coeffs
            .iter()
            .zip(&e)
            .map(|(c, v)| c * v)
            .sum()
    }

    /// k-th derivative at x, by k exact ladder differentiations on an
    /// extended (length N+k) vector — no truncation, no finite differences.
    pub fn eval_deriv(&self, x: f64, k: usize) -> C64 {
        let mut c = self.coeffs.clone();
        for _ in 0..k {
            c = derivative_coeffs(&c);
        }
        let e = hermite_values(c.len(), x);
        c.iter().zip(&e).map(|(cn, v)| cn * v).sum()
    }

    /// Fraction of ‖f‖² carried by the top N/8 coefficients.
    pub fn tail_mass_ratio(&self) -> f64 {
        let n = self.len();
        let total: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let start = n - n / 8;
        let tail: f64 = self.coeffs[start..].iter().map(|c| c.norm_sqr()).sum();
        tail / total
    }

    /// Zero the top `k` coefficients. Ladder applications on the result
    /// stay exactly representable (the spill guard used by commutator and
    /// weak-eigenvalue checks).
    pub fn restricted(&self, k: usize) -> TestFunction {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for v in c[n.saturating_sub(k)..].iter_mut() {
            *v = C64::new(0.0, 0.0);
        }
        TestFunction { coeffs: c }
    }
}

/// e_0(x) … e_{count−1}(x) by the normalized recurrence.
///
/// For |x| beyond the classically allowed region of the top requested mode
/// the values underflow to zero; callers that need signs out there
/// (the quadrature root finder) use the exponent-scaled variant below.
pub fn hermite_values(count: usize, x: f64) -> Vec<f64> {
    let mut e = vec![0.0; count];
    if count == 0 {
        return e;
    }
    e[0] = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
    if count > 1 {
        e[1] = std::f64::consts::SQRT_2 * x * e[0];
    }
    for n in 1..count.saturating_sub(1) {
        let nf = n as f64;
        e[n + 1] = x * (2.0 / (nf + 1.0)).sqrt() * e[n] - (nf / (nf + 1.0)).sqrt() * e[n - 1];
    }
    e
}

/// Coefficients of f′ on a one-longer vector:
/// (f′)_m = √((m+1)/2) c_{m+1} − √(m/2) c_{m−1}. Exact, untruncated.
pub fn derivative_coeffs(c: &[C64]) -> Vec<C64> {
    let n = c.len();
    let mut d = vec![C64::new(0.0, 0.0); n + 1];
    for (m, dm) in d.iter_mut().enumerate() {
        let mut v = C64::new(0.0, 0.0);
        if m + 1 < n {
            v += ((m as f64 + 1.0) / 2.0).sqrt() * c[m + 1];
        }
        if m >= 1 && m - 1 < n {
            v -= (m as f64 / 2.0).sqrt() * c[m - 1];
        }
        *dm = v;
    }
    d
}

/// Coefficients of x·f on a one-longer vector:
/// (xf)_m = √(m/2) c_{m−1} + √((m+1)/2) c_{m+1}. Exact, untruncated.
pub fn position_coeffs(c: &[C64]) -> Vec<C64> {
    let n = c.len();
    let mut d = vec![C64::new(0.0, 0.0); n + 1];
    for (m, dm) in d.iter_mut().enumerate() {
        let mut v = C64::new(0.0, 0.0);
        if m + 1 < n {
            v += ((m as f64 + 1.0) / 2.0).sqrt() * c[m + 1];
        }
        if m >= 1 && m - 1 < n {
            v += (m as f64 / 2.0).sqrt() * c[m - 1];
        }
        *dm = v;
    }
    d
}

/// q̂₀ f = x·f, truncated back to N with |spill| (the dropped coefficient
/// magnitude) reported.
pub fn apply_q0(f: &TestFunction) -> (TestFunction, f64) {
    let ext = position_coeffs(&f.coeffs);
    truncate_with_spill(ext, f.len())
}

/// p̂₀ f = −i f′, truncated back to N with |spill| reported.
pub fn apply_p0(f: &TestFunction) -> (TestFunction, f64) {
    let ext = derivative_coeffs(&f.coeffs);
    let ext: Vec<C64> = ext.into_iter().map(|c| C64::new(0.0, -1.0) * c).collect();
    truncate_with_spill(ext, f.len())
}

fn truncate_with_spill(ext: Vec<C64>, n: usize) -> (TestFunction, f64) {
    let spill = ext[n..].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    (TestFunction { coeffs: ext[..n].to_vec() }, spill)
}

/// ⟨f, g⟩ = Σ conj(c_n) d_n — antilinear in the first argument.
pub fn inner(f: &TestFunction, g: &TestFunction) -> Result<C64, SpectralError> {
    if f.len() != g.len() {
        return Err(SpectralError::BasisMismatch(f.len(), g.len()));
    }
    Ok(f.coeffs
        .iter()
        .zip(&g.coeffs)
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// Fourier transform of a Hermite expansion evaluated at a point:
/// the basis diagonalizes the transform, FT(e_n) = (−i)ⁿ e_n, so
/// (FT f)(p) = Σ c_n (−i)ⁿ e_n(p) exactly — no quadrature involved.
pub fn fourier_point(f: &TestFunction, p: f64) -> C64 {
    let e = hermite_values(f.len(), p);
    let mut acc = C64::new(0.0, 0.0);
    let mut ipow = C64::new(1.0, 0.0);
    for (c, ev) in f.coeffs.iter().zip(&e) {
        acc += c * ipow * ev;
        ipow *= C64::new(0.0, -1.0);
    }
    acc
}

/// Tail mass ratio — the numerical proxy for Schwartz-class membership.
/// Monotone under zeroing tail coefficients.
pub fn decay_metric(f: &TestFunction) -> f64 {
    f.tail_mass_ratio()
}

/// sup over quadrature nodes of |x|⁴|f(x)| — the polynomial-decay
/// diagnostic reported alongside the tail ratio.
pub fn schwartz_sup(f: &TestFunction, rule: &QuadratureRule) -> f64 {
    rule.nodes
        .iter()
        .map(|&t| t.powi(4).abs() * f.eval(t).norm())
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Gauss-Hermite quadrature in "folded" form
// ---------------------------------------------------------------------------

/// Quadrature for ∫ f(x) dx with nodes at the zeros of e_K and weights
/// folded against the Gaussian: W_i = 1/Σ_{k<K} e_k(t_i)² (Christoffel).
/// Exact for f = (polynomial of degree ≤ 2K−1)·e^{−x²}, and accurate to
/// machine precision for entire integrands decaying like e^{−x²/2}.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

// The top zeros of e_K sit where the recurrence seed e^{−x²/2} is denormal
// (x ≈ 38.7 needs e^{−749}), so signs computed naively vanish. The pair
// recurrence below carries values scaled by a power of two, renormalizing
// whenever the magnitude leaves [2^−250, 2^250]; signs and the Newton ratio
// e_K/e_K′ are scale-invariant.

fn exp2i(mut s: f64, mut e2: i64) -> f64 {
    // multiply s by 2^e2 using exact power-of-two factors
    while e2 > 500 {
        s *= 2f64.powi(500);
        e2 -= 500;
    }
    while e2 < -500 {
        s *= 2f64.powi(-500);
        e2 += 500;
    }
    s * 2f64.powi(e2 as i32)
}

/// (e_{K−1}(x), e_K(x)) up to a common positive scale 2^off.
fn hermite_pair_scaled(k: usize, x: f64) -> (f64, f64, i64) {
    let lo = 2f64.powi(-250);
    let hi = 2f64.powi(250);
    let up = 2f64.powi(500);

    let (mut em, mut off) = {
        let v = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
        if v > 0.0 && v.is_finite() {
            (v, 0i64)
        } else {
            // seed from the log form: e_0 = exp(−x²/2 − ln(π)/4)
            let lg = -x * x / 2.0 - 0.25 * std::f64::consts::PI.ln();
            let k2 = (lg / std::f64::consts::LN_2).floor() as i64 + 250;
            ((lg - k2 as f64 * std::f64::consts::LN_2).exp(), k2)
        }
    };
    let mut e = std::f64::consts::SQRT_2 * x * em;
    for n in 1..k {
        let nf = n as f64;
        let next = x * (2.0 / (nf + 1.0)).sqrt() * e - (nf / (nf + 1.0)).sqrt() * em;
        em = e;
        e = next;
        let a = em.abs().max(e.abs());
        if a != 0.0 {
            if a < lo {
                em *= up;
                e *= up;
                off -= 500;
            } else if a > hi {
                em /= up;
                e /= up;
                off += 500;
            }
        }
    }
    (em, e, off)
}

/// Σ_{k<K} e_k(x)², rescaled in step with the recurrence so the O(1)
/// result is exact even where individual early terms are denormal.
fn christoffel_sum(k: usize, x: f64) -> f64 {
    let lo = 2f64.powi(-250);
    let hi = 2f64.powi(250);
    let up = 2f64.powi(500);

    let (mut em, mut off) = {
        let v = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
        if v > 0.0 && v.is_finite() {
            (v, 0i64)
        } else {
            let lg = -x * x / 2.0 - 0.25 * std::f64::consts::PI.ln();
            let k2 = (lg / std::f64::consts::LN_2).floor() as i64 + 250;
            ((lg - k2 as f64 * std::f64::consts::LN_2).exp(), k2)
        }
    };
    let mut e = std::f64::consts::SQRT_2 * x * em;
    let mut acc = em * em + e * e; // at scale 2^(2·off)
    for n in 1..k - 1 {
        let nf = n as f64;
        let next = x * (2.0 / (nf + 1.0)).sqrt() * e - (nf / (nf + 1.0)).sqrt() * em;
        em = e;
        e = next;
        let a = em.abs().max(e.abs());
        if a != 0.0 {
            if a < lo {
                em *= up;
                e *= up;
                acc *= up * up;
                off -= 500;
            } else if a > hi {
                em /= up;
                e /= up;
                acc /= up * up;
                off += 500;
            }
        }
        acc += e * e;
    }
    exp2i(acc, 2 * off)
}

impl QuadratureRule {
    /// Build the K-point rule by sign-change bracketing on a dense scan of
    /// [0, √(2K+1)+1] followed by safeguarded Newton; then symmetrize and
    /// attach Christoffel weights.
    pub fn gauss_hermite(order: usize) -> Self {
        let k = order;
        assert!(k >= 2, "quadrature order must be at least 2");
        let r = (2.0 * k as f64 + 1.0).sqrt();
        let scan = 24 * k;
        let step = (r + 1.0) / (scan as f64 - 1.0);

        let mut vals = Vec::with_capacity(scan);
        for i in 0..scan {
            let x = i as f64 * step;
            let (_, e, _) = hermite_pair_scaled(k, x);
            vals.push(e);
        }

        let mut roots = Vec::with_capacity(k / 2 + 1);
        for i in 0..scan - 1 {
            if vals[i].signum() * vals[i + 1].signum() < 0.0 {
                let (mut a, mut b) = (i as f64 * step, (i + 1) as f64 * step);
                let mut fa = vals[i];
                let mut x = 0.5 * (a + b);
                for _ in 0..80 {
                    let (em, e, _) = hermite_pair_scaled(k, x);
                    // e_K′ = √(2K) e_{K−1} − x e_K, same scale as e
                    let d = (2.0 * k as f64).sqrt() * em - x * e;
                    let mut xn = if d != 0.0 { x - e / d } else { 0.5 * (a + b) };
                    if !(xn > a && xn < b) {
                        if e.signum() * fa.signum() < 0.0 {
                            b = x;
                        } else {
                            a = x;
                            fa = e;
                        }
                        xn = 0.5 * (a + b);
                    }
                    if (xn - x).abs() <= 1e-16 * (1.0 + xn.abs()) {
                        x = xn;
                        break;
                    }
                    x = xn;
                }
                roots.push(x);
            }
        }
        assert_eq!(
            roots.len(),
            k / 2,
            "root count mismatch at quadrature order {k}"
        );

        let mut nodes = Vec::with_capacity(k);
        for ro in roots.iter().rev() {
            nodes.push(-ro);
        }
        if k % 2 == 1 {
            nodes.push(0.0);
        }
        nodes.extend(roots.iter().copied());

        let weights: Vec<f64> = nodes.iter().map(|&t| 1.0 / christoffel_sum(k, t)).collect();
        assert!(
            weights.iter().all(|w| w.is_finite() && *w > 0.0),
            "non-finite Christoffel weight"
        );
        QuadratureRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Σ W_i f(t_i).
    pub fn integrate<F: Fn(f64) -> C64>(&self, f: F) -> C64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }

    /// Project node samples onto the first `n` Hermite modes:
    /// c_k = Σ_i W_i e_k(t_i) f(t_i).
    pub fn project(&self, n: usize, samples: &[C64]) -> TestFunction {
        assert_eq!(samples.len(), self.len());
        let mut coeffs = vec![C64::new(0.0, 0.0); n];
        for (i, &t) in self.nodes.iter().enumerate() {
            let e = hermite_values(n, t);
            let wf = self.weights[i] * samples[i];
            for (c, v) in coeffs.iter_mut().zip(&e) {
                *c += wf * v;
            }
        }
        TestFunction { coeffs }
    }
}
