//! The Green-function similarity map: T⁻¹ = 1 − i p̂₀², an unbounded
//! operator, with T realized as convolution against
//!
//!   G(x) = (i/(√2(1+i))) e^{−|x|c},   c = (√2/2)(1+i),
//!
//! and, independently, as the Fourier multiplier m(k) = 1/(1 − ik²).  Both
//! T paths are first-class and cross-validated: the kernel path is the
//! quadrature realization of the closed form, the multiplier path is its
//! engineering dual and catches convolution bugs.
//!
//! T⁻¹ and (T⁻¹)† = 1 + i p̂₀² act exactly on Hermite coefficients — two
//! ladder differentiations with untruncated intermediates — so their only
//! failure mode is truncation spill, the finite-dimensional shadow of the
//! operator's unboundedness.  T and T† act on a uniform grid: evaluate,
//! convolve (FFT, linear via zero padding), correct the kernel kink at the
//! origin by Euler-Maclaurin, re-project.  Functions that have not decayed
//! at the grid edge are rejected rather than silently wrapped.

use crate::deformation::{DeformError, SimilarityMap, SpecificCheck};
use crate::distributions::{ClosedKernel, Distribution, RegularKind, UniformGrid};
use crate::spectral::{derivative_coeffs, hermite_values, TestFunction};
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Relative spill budget for the exact-ladder legs.  This is a domain
/// guard, not an accuracy bound: convolution outputs carry an O(h⁴) ≈ 1e−9
/// top-mode noise floor from the kinked-kernel quadrature, and a deformed
/// operator leg can amplify it by √(N/2) (one ladder) times ~N (the two
/// ladders in 1 − i∂²) before it lands here, giving noise-driven spill as
/// large as ~1e−5 relative on legitimate inputs.  Inputs actually outside
/// the map's domain (top-mode-dominated functions) spill at O(1) and above,
/// so a budget of 1e−3 separates the two regimes cleanly; accuracy proper
/// is certified by the round-trip and identity residuals, not by this gate.
const SPILL_LIMIT: f64 = 1e-3;
/// Absolute bound on |f(±L)| for grid representability.
const BOUNDARY_LIMIT: f64 = 1e-10;
/// Beyond this extent the seed e_0(L) = π^{−1/4}e^{−L²/2} loses too much
/// range for the plain evaluation recurrence.
const MAX_EXTENT: f64 = 35.0;

/// A = i/(√2(1+i)) = (1+i)/(2√2), so |G(0)| = 1/2.
pub fn kernel_amplitude() -> C64 {
    C64::new(0.0, 1.0) / (C64::new(1.0, 1.0) * 2f64.sqrt())
}

/// c = (√2/2)(1+i): Re c > 0 gives |G(x)| ∝ e^{−|x|/√2}.
pub fn decay_constant() -> C64 {
    C64::new(1.0, 1.0) * (2f64.sqrt() / 2.0)
}

/// G(x) = A e^{−|x|c}.  Even in x; ∫G = 2A/c = 1 exactly.
pub fn kernel_g(x: f64) -> C64 {
    kernel_amplitude() * (-decay_constant() * x.abs()).exp()
}

/// m(k) = 1/(1 − ik²): the Fourier symbol of T, inverse of the symbol
/// 1 − i k² that T⁻¹ = 1 − i p̂₀² multiplies by.
pub fn multiplier(k: f64) -> C64 {
    C64::new(1.0, 0.0) / C64::new(1.0, -k * k)
}

/// Jump of dG/dx across the kink at the origin: G′(0⁺) − G′(0⁻) = −2cA = −i.
/// The conjugate kernel jumps by +i.
fn kink_jump() -> C64 {
    C64::new(0.0, -1.0)
}

pub struct GreenMap {
    pub basis_size: usize,
    pub grid: UniformGrid,
    /// e_m(x_i) flattened row-major per node: entry i·basis_size + m.
    e_grid: Vec<f64>,
    fft_len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// FFT of G sampled on the circular difference grid.
    spec_g: Vec<C64>,
    /// Same for conj(G) (the T† kernel).
    spec_g_dag: Vec<C64>,
}

impl GreenMap {
    pub fn new(basis_size: usize, extent: f64, points: usize) -> Result<Self, DeformError> {
        if basis_size < 4 {
            return Err(DeformError::Construction(format!(
                "basis size {basis_size} too small for the Green map (need ≥ 4)"
            )));
        }
        if !(1.0..=MAX_EXTENT).contains(&extent) {
            return Err(DeformError::Construction(format!(
                "grid extent {extent} outside the supported range [1, {MAX_EXTENT}]"
            )));
        }
        if points < 64 {
            return Err(DeformError::Construction(format!(
                "grid needs at least 64 points, got {points}"
            )));
        }
        let grid = UniformGrid::new(extent, points);
        let m = grid.len();

        let mut e_grid = Vec::with_capacity(m * basis_size);
        for &x in &grid.points {
            e_grid.extend_from_slice(&hermite_values(basis_size, x));
        }

        let fft_len = (2 * m - 1).next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(fft_len);
        let inv = planner.plan_fft_inverse(fft_len);

        // circular layout of kernel samples at offsets d·h, d ∈ [−(m−1), m−1]
        let mut base = vec![C64::new(0.0, 0.0); fft_len];
        for d in -(m as isize - 1)..=(m as isize - 1) {
            let idx = if d >= 0 { d as usize } else { (fft_len as isize + d) as usize };
            base[idx] = kernel_g(d as f64 * grid.step);
        }
        let mut spec_g = base.clone();
        fwd.process(&mut spec_g);
        let mut spec_g_dag: Vec<C64> = base.iter().map(|v| v.conj()).collect();
        fwd.process(&mut spec_g_dag);

        let map = GreenMap {
            basis_size,
            grid,
            e_grid,
            fft_len,
            fwd,
            inv,
            spec_g,
            spec_g_dag,
        };

        let mass = map.kernel_integral();
        if (mass - C64::new(1.0, 0.0)).norm() > 1e-8 {
            return Err(DeformError::Construction(format!(
                "kernel mass check failed: ∫G = {mass} differs from 1 by {:.3e}",
                (mass - C64::new(1.0, 0.0)).norm()
            )));
        }
        for &x in &map.grid.points {
            let fwd_mod = kernel_g(x).norm();
            let rev_mod = kernel_g(-x).norm();
            if (fwd_mod - rev_mod).abs() > 1e-14 * fwd_mod.max(1.0) {
                return Err(DeformError::Construction(format!(
                    "kernel modulus not even at x = {x}"
                )));
            }
        }
        Ok(map)
    }

    /// ∫ G by grid trapezoid, plus the Euler-Maclaurin kink term at the
    /// origin and the exact two-sided tail ∫_{|x|>L} G = e^{−cL}.
    pub fn kernel_integral(&self) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (i, &x) in self.grid.points.iter().enumerate() {
            acc += self.grid.weight(i) * kernel_g(x);
        }
        let h = self.grid.step;
        let theta = (self.grid.extent / h).rem_euclid(1.0);
        let b2 = theta * theta - theta + 1.0 / 6.0;
        acc += h * h / 2.0 * b2 * kink_jump();
        acc += (-decay_constant() * self.grid.extent).exp();
        acc
    }

    /// Sample a coefficient vector at every grid node.
    pub fn eval_on_grid(&self, f: &TestFunction) -> Result<Vec<C64>, DeformError> {
        if f.len() != self.basis_size {
            return Err(DeformError::Construction(format!(
                "function has {} coefficients but the map was built at basis size {}",
                f.len(),
                self.basis_size
            )));
        }
        let n = self.basis_size;
        let vals = self
            .grid
            .points
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let row = &self.e_grid[i * n..(i + 1) * n];
                f.coeffs
                    .iter()
                    .zip(row)
                    .map(|(c, &e)| c * e)
                    .sum::<C64>()
            })
            .collect();
        Ok(vals)
    }

    /// Trapezoid projection of grid samples back onto the Hermite basis.
    /// The integrands decay to double-precision zero at ±L, so the uniform
    /// trapezoid is spectrally accurate here.
    pub fn project_from_grid(&self, vals: &[C64]) -> TestFunction {
        let n = self.basis_size;
        let mut coeffs = vec![C64::new(0.0, 0.0); n];
        for (i, &v) in vals.iter().enumerate() {
            let wv = self.grid.weight(i) * v;
            let row = &self.e_grid[i * n..(i + 1) * n];
            for (c, &e) in coeffs.iter_mut().zip(row) {
                *c += wv * e;
            }
        }
        TestFunction::new(coeffs)
    }

    fn check_boundary(&self, vals: &[C64]) -> Result<(), DeformError> {
        let leak = vals[0].norm().max(vals[vals.len() - 1].norm());
        if leak > BOUNDARY_LIMIT {
            return Err(DeformError::BoundaryLeak {
                leak,
                limit: BOUNDARY_LIMIT,
            });
        }
        Ok(())
    }

    /// Linear convolution of weighted samples against a precomputed kernel
    /// spectrum, with the kink of the exponential corrected at every output
    /// node: the kink of G(x_i − y) sits exactly at the node y = x_i, where
    /// Euler-Maclaurin adds h²/12 · (kernel jump) · f(x_i).
    fn convolve(&self, vals: &[C64], spec: &[C64], jump: C64) -> Vec<C64> {
        let m = vals.len();
        let mut buf = vec![C64::new(0.0, 0.0); self.fft_len];
        for (j, &v) in vals.iter().enumerate() {
            buf[j] = self.grid.weight(j) * v;
        }
        self.fwd.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(spec) {
            *b *= s;
        }
        self.inv.process(&mut buf);
        let scale = 1.0 / self.fft_len as f64;
        let h = self.grid.step;
        (0..m)
            .map(|i| buf[i] * scale + h * h / 12.0 * jump * vals[i])
            .collect()
    }

    fn multiplier_path(&self, vals: &[C64], dagger: bool) -> Vec<C64> {
        let m = vals.len();
        let mut buf = vec![C64::new(0.0, 0.0); self.fft_len];
        buf[..m].copy_from_slice(vals);
        self.fwd.process(&mut buf);
        let dk = 2.0 * std::f64::consts::PI / (self.fft_len as f64 * self.grid.step);
        for (j, b) in buf.iter_mut().enumerate() {
            let jj = if j <= self.fft_len / 2 {
                j as f64
            } else {
                j as f64 - self.fft_len as f64
            };
            let mk = multiplier(jj * dk);
            *b *= if dagger { mk.conj() } else { mk };
        }
        self.inv.process(&mut buf);
        let scale = 1.0 / self.fft_len as f64;
        (0..m).map(|i| buf[i] * scale).collect()
    }

    /// T through the Fourier-multiplier path — the independent cross-check
    /// of the kernel convolution.
    pub fn apply_t_via_multiplier(&self, f: &TestFunction) -> Result<TestFunction, DeformError> {
        let vals = self.eval_on_grid(f)?;
        self.check_boundary(&vals)?;
        Ok(self.project_from_grid(&self.multiplier_path(&vals, false)))
    }

    pub fn apply_t_dag_via_multiplier(
        &self,
        f: &TestFunction,
    ) -> Result<TestFunction, DeformError> {
        let vals = self.eval_on_grid(f)?;
        self.check_boundary(&vals)?;
        Ok(self.project_from_grid(&self.multiplier_path(&vals, true)))
    }

    /// f ± i f″ by two ladder differentiations with untruncated
    /// intermediates; the final truncation back to N is the only loss and is
    /// gated by the spill budget.
    fn inverse_leg(&self, f: &TestFunction, sign: f64) -> Result<TestFunction, DeformError> {
        let d1 = derivative_coeffs(&f.coeffs);
        let d2 = derivative_coeffs(&d1);
        let n = f.len();
        let i_sign = C64::new(0.0, sign);
        let spill = d2[n..]
            .iter()
            .map(|c| (i_sign * c).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let limit = SPILL_LIMIT * f.norm();
        if spill > limit {
            return Err(DeformError::SpillExceeded { spill, limit });
        }
        let coeffs = f
            .coeffs
            .iter()
            .zip(&d2[..n])
            .map(|(c, d)| c + i_sign * d)
            .collect();
        Ok(TestFunction::new(coeffs))
    }

    /// Both eigenstate families at x₀ in closed form: the lower state is the
    /// shifted kernel itself (a Regular distribution), the upper one is
    /// δ_{x₀} − i δ″_{x₀}.
    pub fn eigen_q_closed(&self, x0: f64) -> (Distribution, Distribution) {
        let lower = self.dual_t(&Distribution::Delta { x0 }).unwrap();
        let upper = self.dual_t_inv_dag(&Distribution::Delta { x0 }).unwrap();
        (lower, upper)
    }
}

impl SimilarityMap for GreenMap {
    fn name(&self) -> String {
        "green".into()
    }

    fn tol(&self) -> f64 {
        1e-5
    }

    fn apply_t(&self, f: &TestFunction) -> Result<TestFunction, DeformError> {
        let vals = self.eval_on_grid(f)?;
        self.check_boundary(&vals)?;
        Ok(self.project_from_grid(&self.convolve(&vals, &self.spec_g, kink_jump())))
    }

    fn apply_t_dag(&self, f: &TestFunction) -> Result<TestFunction, DeformError> {
        let vals = self.eval_on_grid(f)?;
        self.check_boundary(&vals)?;
        Ok(self.project_from_grid(&self.convolve(
            &vals,
            &self.spec_g_dag,
            kink_jump().conj(),
        )))
    }

    fn apply_t_inv(&self, f: &TestFunction) -> Result<TestFunction, DeformError> {
        // T⁻¹ = 1 − i p̂₀²; p̂₀²f = −f″, so T⁻¹f = f + i f″
        self.inverse_leg(f, 1.0)
    }

    fn apply_t_inv_dag(&self, f: &TestFunction) -> Result<TestFunction, DeformError> {
        self.inverse_leg(f, -1.0)
    }

    fn dual_t(&self, f: &Distribution) -> Option<Distribution> {
        match f {
            Distribution::Delta { x0 } => {
                let x0 = *x0;
                Some(Distribution::Regular(RegularKind::Closed(ClosedKernel {
                    eval: Arc::new(move |x| kernel_g(x - x0)),
                    kink: Some((x0, kink_jump().conj())),
                    label: format!("G(x - {x0})"),
                })))
            }
            Distribution::PlaneWave { p0 } => Some(Distribution::LinearComb(vec![(
                multiplier(*p0),
                f.clone(),
            )])),
            _ => None,
        }
    }

    fn dual_t_inv_dag(&self, f: &Distribution) -> Option<Distribution> {
        match f {
            Distribution::Delta { x0 } => Some(Distribution::LinearComb(vec![
                (C64::new(1.0, 0.0), f.clone()),
                (
                    C64::new(0.0, -1.0),
                    Distribution::DeltaDeriv { x0: *x0, order: 2 },
                ),
            ])),
            Distribution::PlaneWave { p0 } => Some(Distribution::LinearComb(vec![(
                C64::new(1.0, p0 * p0),
                f.clone(),
            )])),
            _ => None,
        }
    }

    fn grid(&self) -> Option<&UniformGrid> {
        Some(&self.grid)
    }

    fn specific_checks(
        &self,
        battery: &[(String, TestFunction)],
    ) -> Result<Vec<SpecificCheck>, DeformError> {
        let mut out = Vec::new();

        out.push(SpecificCheck {
            name: "kernel_mass".into(),
            anchor: "∫ G = 2A/c = 1".into(),
            residual: (self.kernel_integral() - C64::new(1.0, 0.0)).norm(),
            scale: 1.0,
            tol: 1e-8,
            notes: vec![(
                "integral".into(),
                format!("{:+.16e}{:+.16e}i", self.kernel_integral().re, self.kernel_integral().im),
            )],
        });

        // Convolution by G vs. the Fourier multiplier m(k) = 1/(1 − ik²):
        // two genuinely different discretizations of the same operator.
        let mut worst = (0.0f64, 1.0f64, String::new());
        for (name, f) in battery {
            let scale = f.norm().max(1e-300);
            let legs = [
                (self.apply_t(f)?, self.apply_t_via_multiplier(f)?, "T"),
                (
                    self.apply_t_dag(f)?,
                    self.apply_t_dag_via_multiplier(f)?,
                    "Tdag",
                ),
            ];
            for (kernel, mult, tag) in legs {
                let r = kernel.sub(&mult)?.norm();
                if r / scale > worst.0 / worst.1 {
                    worst = (r, scale, format!("{name}/{tag}"));
                }
            }
        }
        out.push(SpecificCheck {
            name: "kernel_paths_agree".into(),
            anchor: "G∗f computed by quadrature = computed by m(k) on the FFT grid".into(),
            residual: worst.0,
            scale: worst.1,
            tol: 1e-6,
            notes: vec![("worst".into(), worst.2)],
        });

        // Peak value of the position eigenstate: η_{x₀}(x₀) = G(0) = A.
        let expect = C64::new(1.0, 1.0) / (2.0 * 2.0f64.sqrt());
        let mut peak = 0.0f64;
        for x0 in [-2.0, 0.0, 1.0, 3.0] {
            if let Distribution::Regular(RegularKind::Closed(k)) =
                self.dual_t(&Distribution::Delta { x0 }).unwrap()
            {
                peak = peak.max(((k.eval)(x0) - expect).norm());
            }
        }
        out.push(SpecificCheck {
            name: "eta_peak_value".into(),
            anchor: "η_{x₀}(x₀) = A = (1+i)/(2√2)".into(),
            residual: peak,
            scale: 1.0,
            tol: 1e-12,
            notes: Vec::new(),
        });

        // The momentum symbols of the two closed-form legs invert each other.
        let mut sym = 0.0f64;
        for p0 in [0.0, 1.0, 2.0] {
            sym = sym.max((C64::new(1.0, -p0 * p0) * multiplier(p0) - C64::new(1.0, 0.0)).norm());
        }
        out.push(SpecificCheck {
            name: "plane_wave_symbol".into(),
            anchor: "(1 − ip₀²)·m(p₀) = 1 with m(k) = 1/(1 − ik²)".into(),
            residual: sym,
            scale: 1.0,
            tol: 1e-14,
            notes: vec![(
                "m(1)".into(),
                format!("{:+.16e}{:+.16e}i", multiplier(1.0).re, multiplier(1.0).im),
            )],
        });

        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{pair, PairingContext};
    use crate::spectral::{inner, QuadratureRule};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Frozen suite configuration: N = 384 on [−30, 30] × 8192.
    fn full_map() -> GreenMap {
        GreenMap::new(384, 30.0, 8192).unwrap()
    }

    fn gaussian_member(map: &GreenMap, rule: &QuadratureRule, a: f64, w: f64) -> TestFunction {
        let samples: Vec<C64> = rule
            .nodes
            .iter()
            .map(|&t| c((-(t - a) * (t - a) / (2.0 * w * w)).exp(), 0.0))
            .collect();
        rule.project(map.basis_size, &samples)
    }

    #[test]
    fn kernel_mass_is_one() {
        let map = full_map();
        let mass = map.kernel_integral();
        assert!((mass - c(1.0, 0.0)).norm() < 1e-8, "∫G = {mass}");
    }

    #[test]
    fn kernel_value_and_decay_at_reference_points() {
        // G(0) = (1+i)/(2√2); |G| falls by e^{−1/√2} per unit distance
        let g0 = kernel_g(0.0);
        let expect = 1.0 / (2.0 * 2f64.sqrt());
        assert!((g0 - c(expect, expect)).norm() < 1e-15);
        let ratio = kernel_g(2.0).norm() / kernel_g(1.0).norm();
        assert!((ratio - (-1.0 / 2f64.sqrt()).exp()).abs() < 1e-13);
    }

    #[test]
    fn inverse_on_ground_state_is_the_closed_form() {
        // (T⁻¹ e_0)(x) = (1 + i(x² − 1)) e_0(x)
        let map = full_map();
        let e0 = TestFunction::basis_vector(384, 0);
        let out = map.apply_t_inv(&e0).unwrap();
        for &x in &[0.0, 0.7, -1.3, 2.5] {
            let expect = (c(1.0, 0.0) + c(0.0, 1.0) * (x * x - 1.0)) * e0.eval(x);
            assert!((out.eval(x) - expect).norm() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn inverse_second_derivative_vs_finite_differences() {
        let map = full_map();
        let e0 = TestFunction::basis_vector(384, 0);
        let out = map.apply_t_inv(&e0).unwrap();
        let h = 1e-4;
        for &x in &[0.0, 1.1] {
            let fdd = (e0.eval(x + h) + e0.eval(x - h) - 2.0 * e0.eval(x)) / (h * h);
            let expect = e0.eval(x) + c(0.0, 1.0) * fdd;
            assert!((out.eval(x) - expect).norm() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn inverse_legs_reject_top_mode_spill() {
        let map = full_map();
        let top = TestFunction::basis_vector(384, 383);
        let err = map.apply_t_inv(&top).unwrap_err();
        assert!(matches!(err, DeformError::SpillExceeded { .. }));
    }

    #[test]
    fn forward_legs_reject_boundary_leakage() {
        let map = full_map();
        let rule = QuadratureRule::gauss_hermite(768);
        let f = gaussian_member(&map, &rule, 26.0, 2.0);
        let err = map.apply_t(&f).unwrap_err();
        assert!(matches!(err, DeformError::BoundaryLeak { .. }));
    }

    #[test]
    fn round_trips_within_map_tolerance() {
        let map = full_map();
        let rule = QuadratureRule::gauss_hermite(768);
        for (a, w) in [(0.0, 1.0), (1.0, 0.7), (-2.0, 1.5)] {
            let f = gaussian_member(&map, &rule, a, w);
            let norm = f.norm();
            let fwd_back = map.apply_t_inv(&map.apply_t(&f).unwrap()).unwrap();
            assert!(
                fwd_back.sub(&f).unwrap().norm() <= 1e-5 * norm,
                "T⁻¹T at a={a}, w={w}"
            );
            let back_fwd = map.apply_t(&map.apply_t_inv(&f).unwrap()).unwrap();
            assert!(
                back_fwd.sub(&f).unwrap().norm() <= 1e-5 * norm,
                "TT⁻¹ at a={a}, w={w}"
            );
        }
    }

    #[test]
    fn kernel_and_multiplier_paths_agree() {
        let map = full_map();
        let rule = QuadratureRule::gauss_hermite(768);
        for (a, w) in [(0.0, 1.0), (3.0, 2.0), (-1.0, 0.7)] {
            let f = gaussian_member(&map, &rule, a, w);
            let by_kernel = map.apply_t(&f).unwrap();
            let by_mult = map.apply_t_via_multiplier(&f).unwrap();
            let diff = by_kernel.sub(&by_mult).unwrap().norm();
            assert!(diff <= 1e-6 * f.norm(), "a={a}, w={w}: {diff:.3e}");
            let by_kernel = map.apply_t_dag(&f).unwrap();
            let by_mult = map.apply_t_dag_via_multiplier(&f).unwrap();
            let diff = by_kernel.sub(&by_mult).unwrap().norm();
            assert!(diff <= 1e-6 * f.norm(), "dagger a={a}, w={w}: {diff:.3e}");
        }
    }

    #[test]
    fn adjoint_consistency_between_kernel_legs() {
        let map = full_map();
        let rule = QuadratureRule::gauss_hermite(768);
        let f = gaussian_member(&map, &rule, 1.0, 1.0);
        let g = gaussian_member(&map, &rule, -0.5, 0.8);
        let lhs = inner(&map.apply_t_dag(&f).unwrap(), &g).unwrap();
        let rhs = inner(&f, &map.apply_t(&g).unwrap()).unwrap();
        assert!((lhs - rhs).norm() <= 1e-10 * f.norm() * g.norm());
    }

    #[test]
    fn wide_flat_bump_is_nearly_fixed() {
        // f″ small over the window ⇒ T⁻¹f ≈ f ⇒ Tf ≈ f
        let map = full_map();
        let rule = QuadratureRule::gauss_hermite(768);
        let f = gaussian_member(&map, &rule, 0.0, 4.0);
        let tf = map.apply_t(&f).unwrap();
        let rel = tf.sub(&f).unwrap().norm() / f.norm();
        assert!(rel < 0.1, "relative deformation {rel:.3e}");
        // and much closer than for a narrow bump
        let narrow = gaussian_member(&map, &rule, 0.0, 0.7);
        let t_narrow = map.apply_t(&narrow).unwrap();
        let rel_narrow = t_narrow.sub(&narrow).unwrap().norm() / narrow.norm();
        assert!(rel < rel_narrow / 3.0);
    }

    #[test]
    fn eta_lower_is_the_shifted_kernel() {
        let map = full_map();
        let (lower, _) = map.eigen_q_closed(0.5);
        match &lower {
            Distribution::Regular(RegularKind::Closed(k)) => {
                let v = (k.eval)(0.5);
                let expect = 1.0 / (2.0 * 2f64.sqrt());
                assert!((v - c(expect, expect)).norm() < 1e-12);
                let ratio = (k.eval)(2.5).norm() / (k.eval)(1.5).norm();
                assert!((ratio - (-1.0 / 2f64.sqrt()).exp()).abs() < 1e-12);
            }
            other => panic!("wrong variant {}", other.describe()),
        }
    }

    #[test]
    fn eta_upper_pairs_as_value_plus_curvature() {
        // ⟨η^{x₀}, φ⟩ = φ(x₀) + i φ″(x₀); at φ = e_0, x₀ = 0 this is
        // π^{−1/4}(1 − i) since e_0″(0) = −π^{−1/4}
        let map = full_map();
        let rule = QuadratureRule::gauss_hermite(128);
        let ctx = PairingContext::new(&rule);
        let (_, upper) = map.eigen_q_closed(0.0);
        let e0 = TestFunction::basis_vector(384, 0);
        let v = pair(&upper, &e0, &ctx).unwrap();
        let pi4 = std::f64::consts::PI.powf(-0.25);
        assert!((v - c(pi4, -pi4)).norm() < 1e-13, "got {v}");
    }

    #[test]
    fn dual_fast_paths_respect_duality() {
        // pair(Tδ_{x₀}, φ) = (T†φ)(x₀) and pair((T⁻¹)†δ_{x₀}, φ) = (T⁻¹φ)(x₀)
        let map = full_map();
        let rule = QuadratureRule::gauss_hermite(768);
        let ctx = PairingContext::with_grid(&rule, &map.grid);
        let f = gaussian_member(&map, &rule, 1.0, 1.0);
        for &x0 in &[-2.0, 0.0, 1.0] {
            let (lower, upper) = map.eigen_q_closed(x0);
            let lhs = pair(&lower, &f, &ctx).unwrap();
            let rhs = map.apply_t_dag(&f).unwrap().eval(x0);
            assert!((lhs - rhs).norm() < 1e-6, "lower at x0 = {x0}");
            let lhs = pair(&upper, &f, &ctx).unwrap();
            let rhs = map.apply_t_inv(&f).unwrap().eval(x0);
            assert!((lhs - rhs).norm() < 1e-9, "upper at x0 = {x0}");
        }
    }

    #[test]
    fn plane_wave_symbols() {
        // T on θ_{p₀} multiplies by m(p₀): at p₀ = 1, m = (1+i)/2; the
        // (T⁻¹)† weight is 1 + ip₀²; duality closes against the ladder legs
        let map = full_map();
        assert!((multiplier(1.0) - c(0.5, 0.5)).norm() < 1e-15);
        let rule = QuadratureRule::gauss_hermite(768);
        let ctx = PairingContext::new(&rule);
        let f = gaussian_member(&map, &rule, 0.0, 1.0);
        for &p0 in &[0.0, 1.0, 2.0] {
            let wave = Distribution::PlaneWave { p0 };
            let upper = map.dual_t_inv_dag(&wave).unwrap();
            let lhs = pair(&upper, &f, &ctx).unwrap();
            let rhs = pair(&wave, &map.apply_t_inv(&f).unwrap(), &ctx).unwrap();
            assert!((lhs - rhs).norm() < 1e-10, "p0 = {p0}");
        }
    }

    #[test]
    fn construction_rejects_bad_config() {
        assert!(GreenMap::new(384, 50.0, 8192).is_err());
        assert!(GreenMap::new(2, 30.0, 8192).is_err());
        assert!(GreenMap::new(384, 30.0, 16).is_err());
    }
}
