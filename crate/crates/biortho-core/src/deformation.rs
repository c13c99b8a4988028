//! Similarity-deformed operator pairs and their distributional eigenstates.
//!
//! A similarity map is an invertible T whose four actions T, T⁻¹, T†, (T⁻¹)†
//! all send the Hermite span into itself (up to controlled truncation).  It
//! deforms the base pair into q̂ = T q̂₀ T⁻¹ and p̂ = T p̂₀ T⁻¹ — generally
//! non-self-adjoint but intertwined with q̂₀, p̂₀, hence isospectral and still
//! satisfying [q̂, p̂] = i.  Adjoints come out as q̂† = (T⁻¹)† q̂₀ T† and
//! likewise for p̂†.
//!
//! The action extends to distributions by duality, ⟨TF, φ⟩ = ⟨F, T†φ⟩ and
//! ⟨(T⁻¹)†F, φ⟩ = ⟨F, T⁻¹φ⟩, which is where the eigenstate families come
//! from: η_{x₀} = T δ_{x₀} solves q̂ η = x₀ η weakly, η^{x₀} = (T⁻¹)† δ_{x₀}
//! does the same for q̂†, and the μ families built from plane waves handle
//! p̂, p̂†.  The two families are biorthogonal, and the metric operators
//! S_η = TT† and S^η = (T⁻¹)† T⁻¹ exchange them; on test functions they are
//! mutually inverse and positive.
//!
//! Everything here is weak-form: an eigenvalue claim is only ever checked by
//! pairing against a battery of test functions, never as a pointwise identity
//! on a delta.

use crate::distributions::{Distribution, DistributionError, RegularKind, UniformGrid};
use crate::spectral::{apply_p0, apply_q0, SpectralError, TestFunction};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DeformError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error("map construction rejected: {0}")]
    Construction(String),
    #[error(
        "truncation spill {spill:.3e} exceeds {limit:.3e}; raise the basis size or \
         smooth the input"
    )]
    SpillExceeded { spill: f64, limit: f64 },
    #[error(
        "boundary leakage {leak:.3e} exceeds {limit:.3e}; enlarge the grid extent"
    )]
    BoundaryLeak { leak: f64, limit: f64 },
    #[error(
        "round-trip gate failed on battery member `{member}`: residual {residual:.3e} \
         exceeds {tol:.1e}·‖f‖"
    )]
    RoundTripGate {
        member: String,
        residual: f64,
        tol: f64,
    },
    #[error("no dual action of {action} on a {variant} distribution for this map")]
    NoDualPath {
        action: &'static str,
        variant: String,
    },
}

/// An invertible operator T with all four actions available on the Hermite
/// span.  Implementations must keep the pair (`apply_t`, `apply_t_inv`) and
/// the pair (`apply_t_dag`, `apply_t_inv_dag`) mutually inverse within
/// `tol()`, and `apply_t_dag` must be the true adjoint of `apply_t` for the
/// L² inner product.
pub trait SimilarityMap {
    fn name(&self) -> String;

    /// Per-map check tolerance: closed forms are exact up to rounding,
    /// quadrature-backed kernels carry grid error.
    fn tol(&self) -> f64;

    fn apply_t(&self, f: &TestFunction) -> Result<TestFunction, DeformError>;
    fn apply_t_inv(&self, f: &TestFunction) -> Result<TestFunction, DeformError>;
    fn apply_t_dag(&self, f: &TestFunction) -> Result<TestFunction, DeformError>;
    fn apply_t_inv_dag(&self, f: &TestFunction) -> Result<TestFunction, DeformError>;

    /// Closed-form dual action of T on a distribution, when one exists.
    fn dual_t(&self, _f: &Distribution) -> Option<Distribution> {
        None
    }

    /// Closed-form dual action of (T⁻¹)† on a distribution, when one exists.
    fn dual_t_inv_dag(&self, _f: &Distribution) -> Option<Distribution> {
        None
    }

    /// Uniform grid carried by kernel-quadrature maps; pairings against this
    /// map's closed-form kernels need it.
    fn grid(&self) -> Option<&UniformGrid> {
        None
    }

    /// Checks that only make sense for this concrete map (closed-form
    /// agreements, kernel mass, …), appended to the generic suite so the
    /// verification report stays complete per map.
    fn specific_checks(
        &self,
        _battery: &[(String, TestFunction)],
    ) -> Result<Vec<SpecificCheck>, DeformError> {
        Ok(Vec::new())
    }
}

/// A map-specific suite entry.  `residual ≤ tol·scale` is the pass rule, as
/// for the generic checks; lower-bound claims ("this norm must NOT vanish")
/// are encoded as the excess over the bound, so a healthy map reports 0.
pub struct SpecificCheck {
    pub name: String,
    pub anchor: String,
    pub residual: f64,
    pub scale: f64,
    pub tol: f64,
    pub notes: Vec<(String, String)>,
}

/// The trivial map T = 1.  Deformed operators collapse to q̂₀, p̂₀ and every
/// residual in the suite should sit at rounding level.
pub struct IdentityMap;

impl SimilarityMap for IdentityMap {
    fn name(&self) -> String {
        "identity".into()
    }

    fn tol(&self) -> f64 {
        1e-10
    }

    fn apply_t(&self, f: &TestFunction) -> Result<TestFunction, DeformError> {
        Ok(f.clone())
    }

    fn apply_t_inv(&self, f: &TestFunction) -> Result<TestFunction, DeformError> {
        Ok(f.clone())
    }

    fn apply_t_dag(&self, f: &TestFunction) -> Result<TestFunction, DeformError> {
        Ok(f.clone())
    }

    fn apply_t_inv_dag(&self, f: &TestFunction) -> Result<TestFunction, DeformError> {
        Ok(f.clone())
    }

    fn dual_t(&self, f: &Distribution) -> Option<Distribution> {
        Some(f.clone())
    }

    fn dual_t_inv_dag(&self, f: &Distribution) -> Option<Distribution> {
        Some(f.clone())
    }
}

/// q̂, p̂ and their adjoints as compositions over a similarity map.  Each
/// application reports the truncation spill of the inner ladder step.
pub struct DeformedPair<'m> {
    pub map: &'m dyn SimilarityMap,
}

impl<'m> DeformedPair<'m> {
    /// q̂ f = T(q̂₀(T⁻¹ f)).
    pub fn q(&self, f: &TestFunction) -> Result<(TestFunction, f64), DeformError> {
        let inner = self.map.apply_t_inv(f)?;
        let (mid, spill) = apply_q0(&inner);
        Ok((self.map.apply_t(&mid)?, spill))
    }

    /// p̂ f = T(p̂₀(T⁻¹ f)).
    pub fn p(&self, f: &TestFunction) -> Result<(TestFunction, f64), DeformError> {
        let inner = self.map.apply_t_inv(f)?;
        let (mid, spill) = apply_p0(&inner);
        Ok((self.map.apply_t(&mid)?, spill))
    }

    /// q̂† f = (T⁻¹)†(q̂₀(T† f)); q̂₀ is its own adjoint.
    pub fn q_dag(&self, f: &TestFunction) -> Result<(TestFunction, f64), DeformError> {
        let inner = self.map.apply_t_dag(f)?;
        let (mid, spill) = apply_q0(&inner);
        Ok((self.map.apply_t_inv_dag(&mid)?, spill))
    }

    /// p̂† f = (T⁻¹)†(p̂₀(T† f)).
    pub fn p_dag(&self, f: &TestFunction) -> Result<(TestFunction, f64), DeformError> {
        let inner = self.map.apply_t_dag(f)?;
        let (mid, spill) = apply_p0(&inner);
        Ok((self.map.apply_t_inv_dag(&mid)?, spill))
    }
}

/// Wire up the deformed pair after gating the map on its round-trip
/// invariant: ‖T⁻¹(T f) − f‖ ≤ tol·‖f‖ and the three sibling orderings, for
/// every member of `gate`.  A failure rejects construction and names the
/// worst offender.
pub fn make_deformed<'m>(
    map: &'m dyn SimilarityMap,
    gate: &[(String, TestFunction)],
) -> Result<DeformedPair<'m>, DeformError> {
    let tol = map.tol();
    let mut worst: Option<(String, f64)> = None;
    for (name, f) in gate {
        let norm = f.norm();
        let trips = [
            map.apply_t_inv(&map.apply_t(f)?)?,
            map.apply_t(&map.apply_t_inv(f)?)?,
            map.apply_t_inv_dag(&map.apply_t_dag(f)?)?,
            map.apply_t_dag(&map.apply_t_inv_dag(f)?)?,
        ];
        for trip in &trips {
            let residual = trip.sub(f)?.norm();
            if residual > tol * norm {
                let is_worse = worst.as_ref().map_or(true, |(_, w)| residual > *w);
                if is_worse {
                    worst = Some((name.clone(), residual));
                }
            }
        }
    }
    if let Some((member, residual)) = worst {
        return Err(DeformError::RoundTripGate {
            member,
            residual,
            tol,
        });
    }
    Ok(DeformedPair { map })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DualAction {
    /// Extend T by ⟨TF, φ⟩ = ⟨F, T†φ⟩.
    T,
    /// Extend (T⁻¹)† by ⟨(T⁻¹)†F, φ⟩ = ⟨F, T⁻¹φ⟩.
    TInvDag,
}

impl DualAction {
    fn label(self) -> &'static str {
        match self {
            DualAction::T => "T",
            DualAction::TInvDag => "(T⁻¹)†",
        }
    }
}

/// Apply T or (T⁻¹)† to a distribution.  Closed-form fast-paths from the map
/// win; otherwise a Regular kernel in the Hermite span gets the function
/// action directly, and a linear combination distributes (weights ride along
/// untouched — they are ket-side scalars).  Anything else is rejected.
pub fn dual_apply(
    map: &dyn SimilarityMap,
    action: DualAction,
    f: &Distribution,
) -> Result<Distribution, DeformError> {
    let fast = match action {
        DualAction::T => map.dual_t(f),
        DualAction::TInvDag => map.dual_t_inv_dag(f),
    };
    if let Some(out) = fast {
        return Ok(out);
    }
    match f {
        Distribution::Regular(RegularKind::Span(g)) => {
            let h = match action {
                DualAction::T => map.apply_t(g)?,
                DualAction::TInvDag => map.apply_t_inv_dag(g)?,
            };
            Ok(Distribution::regular_span(h))
        }
        Distribution::LinearComb(parts) => {
            let mut out = Vec::with_capacity(parts.len());
            for (w, part) in parts {
                out.push((*w, dual_apply(map, action, part)?));
            }
            Ok(Distribution::LinearComb(out))
        }
        other => Err(DeformError::NoDualPath {
            action: action.label(),
            variant: other.variant_name(),
        }),
    }
}

/// Position eigenstates: η_{x₀} = T δ_{x₀} for q̂ and η^{x₀} = (T⁻¹)† δ_{x₀}
/// for q̂†.  Eigenvalue claims are weak-form only; the verifier pairs these
/// against the battery.
pub fn eigen_q(
    map: &dyn SimilarityMap,
    x0: f64,
) -> Result<(Distribution, Distribution), DeformError> {
    let delta = Distribution::Delta { x0 };
    let lower = dual_apply(map, DualAction::T, &delta)?;
    let upper = dual_apply(map, DualAction::TInvDag, &delta)?;
    Ok((lower, upper))
}

/// Momentum eigenstates: μ_{p₀} = T θ_{p₀} and μ^{p₀} = (T⁻¹)† θ_{p₀} with
/// θ the normalized plane wave.
pub fn eigen_p(
    map: &dyn SimilarityMap,
    p0: f64,
) -> Result<(Distribution, Distribution), DeformError> {
    let wave = Distribution::PlaneWave { p0 };
    let lower = dual_apply(map, DualAction::T, &wave)?;
    let upper = dual_apply(map, DualAction::TInvDag, &wave)?;
    Ok((lower, upper))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricKind {
    /// S_η = T T†: maps the upper family onto the lower one.
    Lower,
    /// S^η = (T⁻¹)† T⁻¹: the inverse metric.
    Upper,
}

/// Apply a metric operator.  Composition order is fixed: S_η = T∘T† and
/// S^η = (T⁻¹)†∘T⁻¹, so S_η(S^η f) = T(T†((T⁻¹)†(T⁻¹ f))) cancels from the
/// inside out.
pub fn metric_apply(
    which: MetricKind,
    map: &dyn SimilarityMap,
    f: &TestFunction,
) -> Result<TestFunction, DeformError> {
    match which {
        MetricKind::Lower => map.apply_t(&map.apply_t_dag(f)?),
        MetricKind::Upper => map.apply_t_inv_dag(&map.apply_t_inv(f)?),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// The smeared eigenstate ∫ φ(x₀) η_{x₀} dx₀ collapses to Tφ (lower side)
/// or (T⁻¹)†φ (upper side).  This is the identity that turns distributional
/// biorthogonality into a function-space check.
pub fn smeared_state(
    map: &dyn SimilarityMap,
    side: Side,
    phi: &TestFunction,
) -> Result<TestFunction, DeformError> {
    match side {
        Side::Lower => map.apply_t(phi),
        Side::Upper => map.apply_t_inv_dag(phi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{pair, PairingContext};
    use crate::spectral::{inner, QuadratureRule};
    use num_complex::Complex64 as C64;

    /// T = c·1 for a complex scalar c: every action is exact, adjoints are
    /// conjugates, and all the identities of this module close by hand.
    struct ScalarMap {
        c: C64,
    }

    impl SimilarityMap for ScalarMap {
        fn name(&self) -> String {
            format!("scalar({})", self.c)
        }
        fn tol(&self) -> f64 {
            1e-10
        }
        fn apply_t(&self, f: &TestFunction) -> Result<TestFunction, DeformError> {
            Ok(f.scaled(self.c))
        }
        fn apply_t_inv(&self, f: &TestFunction) -> Result<TestFunction, DeformError> {
            Ok(f.scaled(C64::new(1.0, 0.0) / self.c))
        }
        fn apply_t_dag(&self, f: &TestFunction) -> Result<TestFunction, DeformError> {
            Ok(f.scaled(self.c.conj()))
        }
        fn apply_t_inv_dag(&self, f: &TestFunction) -> Result<TestFunction, DeformError> {
            Ok(f.scaled(C64::new(1.0, 0.0) / self.c.conj()))
        }
    }

    /// Deliberately inconsistent: T⁻¹ is not the inverse of T.
    struct BrokenMap;

    impl SimilarityMap for BrokenMap {
        fn name(&self) -> String {
            "broken".into()
        }
        fn tol(&self) -> f64 {
            1e-10
        }
        fn apply_t(&self, f: &TestFunction) -> Result<TestFunction, DeformError> {
            Ok(f.scaled(C64::new(2.0, 0.0)))
        }
        fn apply_t_inv(&self, f: &TestFunction) -> Result<TestFunction, DeformError> {
            Ok(f.clone())
        }
        fn apply_t_dag(&self, f: &TestFunction) -> Result<TestFunction, DeformError> {
            Ok(f.scaled(C64::new(2.0, 0.0)))
        }
        fn apply_t_inv_dag(&self, f: &TestFunction) -> Result<TestFunction, DeformError> {
            Ok(f.clone())
        }
    }

    fn e(n: usize) -> TestFunction {
        TestFunction::basis_vector(16, n)
    }

    #[test]
    fn identity_pair_reduces_to_base_operators() {
        let gate = vec![("e0".to_string(), e(0))];
        let pair_ops = make_deformed(&IdentityMap, &gate).unwrap();
        let (qe0, spill) = pair_ops.q(&e(0)).unwrap();
        assert_eq!(spill, 0.0);
        // q̂ e_0 = (1/√2) e_1
        let expect = e(1).scaled(C64::new(0.5f64.sqrt(), 0.0));
        assert!(qe0.sub(&expect).unwrap().norm() < 1e-15);
        let (pe0, _) = pair_ops.p(&e(0)).unwrap();
        let expect = e(1).scaled(C64::new(0.0, 0.5f64.sqrt()));
        assert!(pe0.sub(&expect).unwrap().norm() < 1e-15);
    }

    #[test]
    fn scalar_map_conjugates_in_the_dagger_legs() {
        let c = C64::new(1.0, 2.0);
        let map = ScalarMap { c };
        let pair_ops = make_deformed(&map, &[("e2".to_string(), e(2))]).unwrap();
        // q̂ = c q̂₀ c⁻¹ = q̂₀ for a scalar map; same for q̂†
        let (qf, _) = pair_ops.q(&e(2)).unwrap();
        let (q0f, _) = apply_q0(&e(2));
        assert!(qf.sub(&q0f).unwrap().norm() < 1e-14);
        let (qdf, _) = pair_ops.q_dag(&e(2)).unwrap();
        assert!(qdf.sub(&q0f).unwrap().norm() < 1e-14);
    }

    #[test]
    fn gate_rejects_inconsistent_inverse() {
        let gate = vec![("e0".to_string(), e(0))];
        let err = match make_deformed(&BrokenMap, &gate) {
            Err(e) => e,
            Ok(_) => panic!("gate accepted a non-inverse"),
        };
        match err {
            DeformError::RoundTripGate { member, residual, .. } => {
                assert_eq!(member, "e0");
                assert!((residual - 1.0).abs() < 1e-12);
            }
            other => panic!("wrong error {other:?}"),
        }
    }

    #[test]
    fn dual_apply_identity_is_transparent() {
        let d = Distribution::Delta { x0: 0.7 };
        let out = dual_apply(&IdentityMap, DualAction::T, &d).unwrap();
        match out {
            Distribution::Delta { x0 } => assert_eq!(x0, 0.7),
            other => panic!("wrong variant {}", other.variant_name()),
        }
    }

    #[test]
    fn dual_apply_regular_span_matches_duality_pairing() {
        // ⟨T g, φ⟩ must equal ⟨g, T†φ⟩ for the numeric Regular path
        let c = C64::new(0.3, -1.1);
        let map = ScalarMap { c };
        let rule = QuadratureRule::gauss_hermite(32);
        let ctx = PairingContext::new(&rule);
        let mut g = TestFunction::zero(16);
        g.coeffs[0] = C64::new(1.0, 0.5);
        g.coeffs[3] = C64::new(-0.2, 0.0);
        let phi = e(1).add(&e(0).scaled(C64::new(0.0, 0.4))).unwrap();
        let tg = dual_apply(&map, DualAction::T, &Distribution::regular_span(g.clone())).unwrap();
        let lhs = pair(&tg, &phi, &ctx).unwrap();
        let rhs = pair(
            &Distribution::regular_span(g),
            &map.apply_t_dag(&phi).unwrap(),
            &ctx,
        )
        .unwrap();
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn dual_apply_rejects_delta_without_fast_path() {
        let map = ScalarMap { c: C64::new(2.0, 0.0) };
        let err = dual_apply(&map, DualAction::T, &Distribution::Delta { x0: 0.0 }).unwrap_err();
        match err {
            DeformError::NoDualPath { action, variant } => {
                assert_eq!(action, "T");
                assert_eq!(variant, "Delta");
            }
            other => panic!("wrong error {other:?}"),
        }
    }

    #[test]
    fn dual_apply_distributes_over_linear_combinations() {
        let lc = Distribution::LinearComb(vec![
            (C64::new(0.0, 1.0), Distribution::Delta { x0: 1.0 }),
            (C64::new(2.0, 0.0), Distribution::PlaneWave { p0: 0.5 }),
        ]);
        let out = dual_apply(&IdentityMap, DualAction::TInvDag, &lc).unwrap();
        match out {
            Distribution::LinearComb(parts) => {
                assert_eq!(parts.len(), 2);
                assert_eq!(parts[0].0, C64::new(0.0, 1.0));
            }
            other => panic!("wrong variant {}", other.variant_name()),
        }
    }

    #[test]
    fn identity_weak_position_eigenvalue_at_origin() {
        // ⟨η_0, q̂†φ⟩ = (xφ)(0) = 0 = 0·⟨η_0, φ⟩ for the identity map
        let rule = QuadratureRule::gauss_hermite(32);
        let ctx = PairingContext::new(&rule);
        let (eta, _) = eigen_q(&IdentityMap, 0.0).unwrap();
        let pair_ops = DeformedPair { map: &IdentityMap };
        let phi = e(0).add(&e(2).scaled(C64::new(0.3, 0.1))).unwrap();
        let (qdag_phi, _) = pair_ops.q_dag(&phi).unwrap();
        let lhs = pair(&eta, &qdag_phi, &ctx).unwrap();
        assert!(lhs.norm() < 1e-14);
    }

    #[test]
    fn identity_momentum_eigenstates_are_plane_waves() {
        let (lower, upper) = eigen_p(&IdentityMap, 1.5).unwrap();
        for d in [&lower, &upper] {
            match d {
                Distribution::PlaneWave { p0 } => assert_eq!(*p0, 1.5),
                other => panic!("wrong variant {}", other.variant_name()),
            }
        }
    }

    #[test]
    fn scalar_metric_is_modulus_squared() {
        let c = C64::new(1.0, -3.0);
        let map = ScalarMap { c };
        let f = e(4);
        let lower = metric_apply(MetricKind::Lower, &map, &f).unwrap();
        // S_η f = c·conj(c)·f = |c|² f
        let expect = f.scaled(C64::new(c.norm_sqr(), 0.0));
        assert!(lower.sub(&expect).unwrap().norm() < 1e-13);
        let upper = metric_apply(MetricKind::Upper, &map, &lower).unwrap();
        assert!(upper.sub(&f).unwrap().norm() < 1e-13);
        // positivity: ⟨f, S_η f⟩ = |c|²‖f‖² real and nonnegative
        let ip = inner(&f, &metric_apply(MetricKind::Lower, &map, &f).unwrap()).unwrap();
        assert!(ip.im.abs() < 1e-14 && ip.re > 0.0);
    }

    #[test]
    fn smeared_states_are_the_two_map_legs() {
        let c = C64::new(0.0, 2.0);
        let map = ScalarMap { c };
        let phi = e(1);
        let lower = smeared_state(&map, Side::Lower, &phi).unwrap();
        assert!(lower.sub(&phi.scaled(c)).unwrap().norm() < 1e-15);
        let upper = smeared_state(&map, Side::Upper, &phi).unwrap();
        let expect = phi.scaled(C64::new(1.0, 0.0) / c.conj());
        assert!(upper.sub(&expect).unwrap().norm() < 1e-15);
    }
}
