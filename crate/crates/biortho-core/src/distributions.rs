//! Tempered distributions as pair-able values.
//!
//! Five variants: Delta(x₀), DeltaDeriv(x₀, k), PlaneWave(p₀) (carrying the
//! 1/√(2π) normalization), Regular (a genuine function, either a closed-form
//! kernel or a Hermite expansion), and LinearComb.
//!
//! The duality pairing ⟨F, φ⟩ is antilinear in the whole first slot: weights
//! of a LinearComb are stored ket-side exactly as the eigenstate formulas
//! print them, and `pair` conjugates them. That convention is what makes
//! ⟨T F, φ⟩ = ⟨F, T†φ⟩ come out right for complex deformation parameters;
//! it is fixed globally and every adjoint formula in this crate assumes it.
//!
//! Deltas and their derivatives are symbolic forever — pairings are exact
//! point evaluations through the Hermite ladder, and any code path that
//! would sample a delta on a grid is a defect.

use crate::spectral::{QuadratureRule, SpectralError, TestFunction};
use num_complex::Complex64 as C64;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DistributionError {
    #[error("kernel not finite at quadrature node x = {0}")]
    NonFiniteKernel(f64),
    #[error("convolution with a plane wave is not defined (kernel not integrable)")]
    PlaneWaveConvolution,
    #[error("extended inner product unsupported for variants {0} and {1}")]
    UnsupportedPair(String, String),
    #[error("uniform grid required for closed-kernel quadrature but none was supplied")]
    GridRequired,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// A closed-form kernel g(x) with at most polynomial growth, with optional
/// metadata for accurate grid quadrature: a kink (derivative jump) location
/// and the jump of d/dx conj(g) there.
#[derive(Clone)]
pub struct ClosedKernel {
    pub eval: Arc<dyn Fn(f64) -> C64 + Send + Sync>,
    pub kink: Option<(f64, C64)>,
    pub label: String,
}

impl fmt::Debug for ClosedKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClosedKernel({})", self.label)
    }
}

#[derive(Clone, Debug)]
pub enum RegularKind {
    /// Kernel given by a closed-form evaluator.
    Closed(ClosedKernel),
    /// Kernel lying in the Hermite span (an ordinary test function).
    Span(TestFunction),
}

#[derive(Clone, Debug)]
pub enum Distribution {
    Delta { x0: f64 },
    DeltaDeriv { x0: f64, order: usize },
    /// θ_{p₀}(x) = e^{i p₀ x} / √(2π).
    PlaneWave { p0: f64 },
    Regular(RegularKind),
    LinearComb(Vec<(C64, Distribution)>),
}

impl Distribution {
    pub fn regular_span(f: TestFunction) -> Self {
        Distribution::Regular(RegularKind::Span(f))
    }

    pub fn regular_closed(
        label: impl Into<String>,
        kink: Option<(f64, C64)>,
        eval: impl Fn(f64) -> C64 + Send + Sync + 'static,
    ) -> Self {
        Distribution::Regular(RegularKind::Closed(ClosedKernel {
            eval: Arc::new(eval),
            kink,
            label: label.into(),
        }))
    }

    pub fn variant_name(&self) -> String {
        match self {
            Distribution::Delta { .. } => "Delta".into(),
            Distribution::DeltaDeriv { .. } => "DeltaDeriv".into(),
            Distribution::PlaneWave { .. } => "PlaneWave".into(),
            Distribution::Regular(RegularKind::Closed(k)) => format!("Regular[{}]", k.label),
            Distribution::Regular(RegularKind::Span(_)) => "Regular[span]".into(),
            Distribution::LinearComb(_) => "LinearComb".into(),
        }
    }

    /// One-line symbolic description (used by the CLI header emitters).
    pub fn describe(&self) -> String {
        match self {
            Distribution::Delta { x0 } => format!("Delta({x0})"),
            Distribution::DeltaDeriv { x0, order } => format!("DeltaDeriv({x0},k={order})"),
            Distribution::PlaneWave { p0 } => format!("PlaneWave({p0})"),
            Distribution::Regular(RegularKind::Closed(k)) => format!("Regular[{}]", k.label),
            Distribution::Regular(RegularKind::Span(_)) => "Regular[span]".into(),
            Distribution::LinearComb(parts) => {
                let inner: Vec<String> = parts
                    .iter()
                    .map(|(w, d)| format!("({:+.6e}{:+.6e}i)*{}", w.re, w.im, d.describe()))
                    .collect();
                format!("LinearComb[{}]", inner.join(" + "))
            }
        }
    }
}

/// Uniform grid on [−L, L] with trapezoid weights, shared by kernel
/// quadrature and convolution.
#[derive(Clone, Debug)]
pub struct UniformGrid {
    pub extent: f64,
    pub points: Vec<f64>,
    pub step: f64,
}

impl UniformGrid {
    pub fn new(extent: f64, count: usize) -> Self {
        assert!(count >= 2);
        let step = 2.0 * extent / (count as f64 - 1.0);
        let points = (0..count).map(|i| -extent + i as f64 * step).collect();
        UniformGrid { extent, points, step }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Trapezoid weight of node i.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.len() - 1 {
            self.step / 2.0
        } else {
            self.step
        }
    }
}

/// Everything a pairing may need: the Gauss-Hermite rule for rapidly
/// decaying integrands and (optionally) a uniform grid for closed kernels
/// with kinks, where the trapezoid sum plus an explicit Euler-Maclaurin
/// kink correction is the accurate path.
pub struct PairingContext<'a> {
    pub rule: &'a QuadratureRule,
    pub grid: Option<&'a UniformGrid>,
}

impl<'a> PairingContext<'a> {
    pub fn new(rule: &'a QuadratureRule) -> Self {
        PairingContext { rule, grid: None }
    }

    pub fn with_grid(rule: &'a QuadratureRule, grid: &'a UniformGrid) -> Self {
        PairingContext { rule, grid: Some(grid) }
    }
}

/// ⟨F, φ⟩.
pub fn pair(f: &Distribution, phi: &TestFunction, ctx: &PairingContext) -> Result<C64, DistributionError> {
    match f {
        Distribution::Delta { x0 } => Ok(phi.eval(*x0)),
        Distribution::DeltaDeriv { x0, order } => {
            let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
            Ok(sign * phi.eval_deriv(*x0, *order))
        }
        Distribution::PlaneWave { p0 } => {
            // (1/√(2π)) ∫ e^{−i p₀ x} φ(x) dx — antilinear-first conjugates e^{i p₀ x}
            let p0 = *p0;
            let v = ctx.rule.integrate(|t| C64::from_polar(1.0, -p0 * t) * phi.eval(t));
            Ok(v / (2.0 * std::f64::consts::PI).sqrt())
        }
        Distribution::Regular(RegularKind::Span(g)) => {
            let n = g.len().max(phi.len());
            Ok(crate::spectral::inner(&pad_to(g, n), &pad_to(phi, n))?)
        }
        Distribution::Regular(RegularKind::Closed(k)) => pair_closed(k, phi, ctx),
        Distribution::LinearComb(parts) => {
            let mut acc = C64::new(0.0, 0.0);
            for (w, d) in parts {
                acc += w.conj() * pair(d, phi, ctx)?;
            }
            Ok(acc)
        }
    }
}

fn pad_to(f: &TestFunction, n: usize) -> TestFunction {
    if f.len() >= n {
        return f.clone();
    }
    let mut c = f.coeffs.clone();
    c.resize(n, C64::new(0.0, 0.0));
    TestFunction::new(c)
}

/// ∫ conj(g(x)) φ(x) dx for a closed kernel. Smooth kernels go through the
/// Gauss-Hermite rule. Kernels with a derivative kink use the uniform grid:
/// trapezoid plus the Euler-Maclaurin correction
///
///   ∫ ≈ T_h + h²/2 · B₂(θ) · Δ(d/dx conj g)·φ(ξ),  B₂(θ) = θ² − θ + 1/6,
///
/// where ξ is the kink location and θ its fractional offset inside the grid
/// cell. Battery functions vanish to double precision at ±L, so no window
/// tail is added here.
fn pair_closed(k: &ClosedKernel, phi: &TestFunction, ctx: &PairingContext) -> Result<C64, DistributionError> {
    match (k.kink, ctx.grid) {
        (Some((xi, djump)), Some(grid)) => {
            let mut acc = C64::new(0.0, 0.0);
            for (i, &x) in grid.points.iter().enumerate() {
                let gv = (k.eval)(x);
                if !gv.re.is_finite() || !gv.im.is_finite() {
                    return Err(DistributionError::NonFiniteKernel(x));
                }
                acc += grid.weight(i) * gv.conj() * phi.eval(x);
            }
            let h = grid.step;
            let theta = ((xi + grid.extent) / h).rem_euclid(1.0);
            let b2 = theta * theta - theta + 1.0 / 6.0;
            acc += h * h / 2.0 * b2 * djump * phi.eval(xi);
            Ok(acc)
        }
        (None, _) => {
            let mut acc = C64::new(0.0, 0.0);
            for (&t, &w) in ctx.rule.nodes.iter().zip(&ctx.rule.weights) {
                let gv = (k.eval)(t);
                if !gv.re.is_finite() || !gv.im.is_finite() {
                    return Err(DistributionError::NonFiniteKernel(t));
                }
                acc += w * gv.conj() * phi.eval(t);
            }
            Ok(acc)
        }
        (Some(_), None) => Err(DistributionError::GridRequired),
    }
}

/// Pointwise complex function produced by convolving a distribution with a
/// test function.
pub enum Convolved {
    /// Evaluable anywhere in closed form (delta and delta-derivative cases).
    Closed(Box<dyn Fn(f64) -> C64>),
    /// Known at uniform grid nodes (regular-kernel case); evaluation between
    /// nodes interpolates linearly.
    Grid(UniformGrid, Vec<C64>),
}

impl Convolved {
    pub fn eval(&self, x: f64) -> C64 {
        match self {
            Convolved::Closed(f) => f(x),
            Convolved::Grid(grid, vals) => {
                let pos = (x + grid.extent) / grid.step;
                let i = pos.floor().max(0.0) as usize;
                if i + 1 >= vals.len() {
                    return *vals.last().unwrap();
                }
                let t = pos - i as f64;
                vals[i] * (1.0 - t) + vals[i + 1] * t
            }
        }
    }
}

/// (F ∗ φ)(x): Delta(y₀) shifts, DeltaDeriv(y₀,k) shifts the k-th
/// derivative, Regular kernels convolve by grid quadrature. Plane waves are
/// rejected (not integrable).
pub fn convolve_with_test(
    f: &Distribution,
    phi: &TestFunction,
    grid: &UniformGrid,
) -> Result<Convolved, DistributionError> {
    match f {
        Distribution::Delta { x0 } => {
            let y0 = *x0;
            let phi = phi.clone();
            Ok(Convolved::Closed(Box::new(move |x| phi.eval(x - y0))))
        }
        Distribution::DeltaDeriv { x0, order } => {
            let y0 = *x0;
            let k = *order;
            let phi = phi.clone();
            Ok(Convolved::Closed(Box::new(move |x| phi.eval_deriv(x - y0, k))))
        }
        Distribution::Regular(RegularKind::Span(g)) => {
            convolve_samples(&|x| g.eval(x), phi, grid)
        }
        Distribution::Regular(RegularKind::Closed(k)) => {
            convolve_samples(&|x| (k.eval)(x), phi, grid)
        }
        Distribution::PlaneWave { .. } => Err(DistributionError::PlaneWaveConvolution),
        Distribution::LinearComb(_) => Err(DistributionError::UnsupportedPair(
            "LinearComb".into(),
            "convolution".into(),
        )),
    }
}

fn convolve_samples(
    kernel: &dyn Fn(f64) -> C64,
    phi: &TestFunction,
    grid: &UniformGrid,
) -> Result<Convolved, DistributionError> {
    // direct O(M²) quadrature convolution; the high-throughput FFT path
    // lives in the green map where it is applied battery-wide.  Node
    // differences x_i − x_j = (i−j)h need the kernel at 2M−1 points that are
    // not grid nodes when M is even, so sample a difference table up front.
    let m = grid.len();
    let mut diff = Vec::with_capacity(2 * m - 1);
    for d in -(m as isize - 1)..=(m as isize - 1) {
        let x = d as f64 * grid.step;
        let v = kernel(x);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(DistributionError::NonFiniteKernel(x));
        }
        diff.push(v);
    }
    let phi_vals: Vec<C64> = grid.points.iter().map(|&x| phi.eval(x)).collect();
    let mut out = vec![C64::new(0.0, 0.0); m];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (j, &pv) in phi_vals.iter().enumerate() {
            acc += grid.weight(j) * diff[(i + m - 1) - j] * pv;
        }
        *o = acc;
    }
    Ok(Convolved::Grid(grid.clone(), out))
}

/// Result of the convolution-based extended inner product ⟨F, G⟩ = (F̄ ∗ G̃)(0).
#[derive(Debug)]
pub enum ExtendedInner {
    Symbolic(Distribution),
    Value(C64),
}

/// Supported table: Delta–Delta (symbolic delta in the difference variable),
/// Delta–Regular (point value), Regular–Regular (the L² product). Everything
/// else is rejected naming both variants.
pub fn extended_inner(
    f: &Distribution,
    g: &Distribution,
    ctx: &PairingContext,
) -> Result<ExtendedInner, DistributionError> {
    match (f, g) {
        (Distribution::Delta { x0 }, Distribution::Delta { x0: y0 }) => {
            Ok(ExtendedInner::Symbolic(Distribution::Delta { x0: x0 - y0 }))
        }
        (Distribution::Delta { x0 }, Distribution::Regular(kind)) => {
            let v = match kind {
                RegularKind::Span(g) => g.eval(*x0),
                RegularKind::Closed(k) => (k.eval)(*x0),
            };
            Ok(ExtendedInner::Value(v))
        }
        (Distribution::Regular(a), Distribution::Regular(b)) => {
            let v = match (a, b) {
                (RegularKind::Span(fa), RegularKind::Span(fb)) => crate::spectral::inner(
                    &pad_to(fa, fb.len()),
                    &pad_to(fb, fa.len()),
                )?,
                _ => {
                    let eval_a = regular_eval(a);
                    let eval_b = regular_eval(b);
                    ctx.rule.integrate(|t| eval_a(t).conj() * eval_b(t))
                }
            };
            Ok(ExtendedInner::Value(v))
        }
        _ => Err(DistributionError::UnsupportedPair(
            f.variant_name(),
            g.variant_name(),
        )),
    }
}

fn regular_eval(kind: &RegularKind) -> Box<dyn Fn(f64) -> C64 + '_> {
    match kind {
        RegularKind::Span(f) => Box::new(move |x| f.eval(x)),
        RegularKind::Closed(k) => {
            let e = k.eval.clone();
            Box::new(move |x| e(x))
        }
    }
}
