//! Group-valued map families on S³ and its products.
//!
//! A [`GroupField`] is an analytic closure: a tree of products and inverses
//! over leaf [`MapSource`]s (instantons, exponentials of polynomial algebra
//! fields, rotations, embeddings). Fields are evaluated on a grid on demand;
//! their Maurer–Cartan forms come from finite differences of the leaves
//! combined through the Leibniz rule (see [`stream`]).

mod paths;
mod poly;
mod sources;
pub mod stream;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::algebra::CMat;
use crate::error::{Error, Result};
use crate::forms::{trace_cube, MatrixFormField};
use crate::geometry::{Domain, Fiber, BASEPOINT};

pub use paths::{bridge, exp_loop, path_from_target, rotation_commutator, Generator, J0Loop, Letter, PathK};
pub use poly::{AlgebraPoly, PolyForm};
pub use sources::{
    bump, smoothstep, smoothstep_deriv, Constant, ExpPoly, Instanton, Profile, Rotation, RotationMode, TimeProfile,
};
pub use stream::{collect, integrate, integrate_vec, GroupSample, Jet, JetStream, NodeCtx, PlaneCache};

/// A smooth map from (a product with) S³ into SU(n).
///
/// `x` is the ambient point of S³ ⊂ R⁴, `r ∈ [0,1]` the disk radius (1 off
/// the disk) and `tau ∈ [0,1]` the loop or path parameter.
pub trait MapSource: Send + Sync + fmt::Debug {
    fn rank(&self) -> usize;

    fn eval(&self, x: &[f64; 4], r: f64, tau: f64) -> CMat;

    /// Values over a whole fiber grid at one S³ point, `r` outer, `tau` inner.
    fn eval_fiber(&self, x: &[f64; 4], fiber: &Fiber, out: &mut [CMat]) {
        let mut k = 0;
        for &r in &fiber.r {
            for &t in &fiber.tau {
                out[k] = self.eval(x, r, t);
                k += 1;
            }
        }
    }

    fn label(&self) -> String;
}

#[derive(Clone, Debug)]
pub enum GroupField {
    Leaf(Arc<dyn MapSource>),
    Mul(Arc<GroupField>, Arc<GroupField>),
    Inv(Arc<GroupField>),
}

impl GroupField {
    pub fn leaf<S: MapSource + 'static>(s: S) -> Self {
        GroupField::Leaf(Arc::new(s))
    }

    pub fn identity(n: usize) -> Self {
        Self::leaf(Constant::identity(n))
    }

    pub fn rank(&self) -> usize {
        match self {
            GroupField::Leaf(s) => s.rank(),
            GroupField::Mul(a, _) => a.rank(),
            GroupField::Inv(a) => a.rank(),
        }
    }

    pub fn eval(&self, x: &[f64; 4], r: f64, tau: f64) -> CMat {
        match self {
            GroupField::Leaf(s) => s.eval(x, r, tau),
            GroupField::Mul(a, b) => a.eval(x, r, tau).matmul(&b.eval(x, r, tau)),
            GroupField::Inv(a) => a.eval(x, r, tau).adjoint(),
        }
    }

    pub fn eval_fiber(&self, x: &[f64; 4], fiber: &Fiber, out: &mut [CMat]) {
        match self {
            GroupField::Leaf(s) => s.eval_fiber(x, fiber, out),
            GroupField::Mul(a, b) => {
                let mut tmp = vec![CMat::zeros(self.rank()); out.len()];
                a.eval_fiber(x, fiber, out);
                b.eval_fiber(x, fiber, &mut tmp);
                for (o, t) in out.iter_mut().zip(&tmp) {
                    *o = o.matmul(t);
                }
            }
            GroupField::Inv(a) => {
                a.eval_fiber(x, fiber, out);
                for o in out.iter_mut() {
                    *o = o.adjoint();
                }
            }
        }
    }

    /// Pointwise product `self · other`.
    pub fn mul(&self, other: &GroupField) -> Result<GroupField> {
        if self.rank() != other.rank() {
            return Err(Error::RankMismatch(self.rank(), other.rank()));
        }
        Ok(GroupField::Mul(Arc::new(self.clone()), Arc::new(other.clone())))
    }

    pub fn inverse(&self) -> GroupField {
        match self {
            GroupField::Inv(a) => (**a).clone(),
            _ => GroupField::Inv(Arc::new(self.clone())),
        }
    }

    /// `c⁻¹ · self · c`.
    pub fn conjugate_by(&self, c: &GroupField) -> Result<GroupField> {
        c.inverse().mul(&self.mul(c)?)
    }

    /// The same tree with every leaf evaluated at fixed `r` and/or `tau`.
    pub fn restrict(&self, r: Option<f64>, tau: Option<f64>) -> GroupField {
        match self {
            GroupField::Leaf(s) => GroupField::leaf(sources::Restrict { inner: s.clone(), r, tau }),
            GroupField::Mul(a, b) => GroupField::Mul(Arc::new(a.restrict(r, tau)), Arc::new(b.restrict(r, tau))),
            GroupField::Inv(a) => GroupField::Inv(Arc::new(a.restrict(r, tau))),
        }
    }

    /// The S³ map x ↦ u(x, tau) (a slice of a path or loop).
    pub fn slice(&self, tau: f64) -> GroupField {
        self.restrict(Some(1.0), Some(tau))
    }

    /// Ignores the disk radius (evaluates at r = 1).
    pub fn unit_radius(&self) -> GroupField {
        self.restrict(Some(1.0), None)
    }

    pub fn label(&self) -> String {
        match self {
            GroupField::Leaf(s) => s.label(),
            GroupField::Mul(a, b) => format!("({})·({})", a.label(), b.label()),
            GroupField::Inv(a) => format!("({})⁻¹", a.label()),
        }
    }

    /// ‖u(p₀, r, τ) − I‖ over a few fiber points.
    pub fn basepoint_defect(&self) -> f64 {
        let id = CMat::identity(self.rank());
        let mut worst: f64 = 0.0;
        for &r in &[0.0, 0.3, 1.0] {
            for &t in &[0.0, 0.2, 0.5, 0.77, 1.0] {
                worst = worst.max(self.eval(&BASEPOINT, r, t).dist(&id));
            }
        }
        worst
    }

    /// Sup distance between two fields over the S³ nodes of `domain` and the
    /// given fiber.
    pub fn sup_distance(&self, other: &GroupField, domain: &Domain, fiber: &Fiber) -> f64 {
        use rayon::prelude::*;
        domain
            .s3_points()
            .par_iter()
            .map(|x| {
                let mut a = vec![CMat::zeros(self.rank()); fiber.len()];
                let mut b = vec![CMat::zeros(other.rank()); fiber.len()];
                self.eval_fiber(x, fiber, &mut a);
                other.eval_fiber(x, fiber, &mut b);
                a.iter().zip(&b).map(|(p, q)| p.dist(q)).fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// The degree-k instanton g_k = (g₁)^k on S³, with g₁ the unit quaternion.
pub fn instanton(k: i32) -> GroupField {
    GroupField::leaf(Instanton { k })
}

/// u ↦ ũ = diag(u, 1).
pub fn embed_su2_su3(u: &GroupField) -> Result<GroupField> {
    if u.rank() != 2 {
        return Err(Error::InvalidRank(u.rank()));
    }
    Ok(embed(u, 3))
}

/// Block embedding into rank `n` (identity in the lower block).
pub fn embed(u: &GroupField, n: usize) -> GroupField {
    if u.rank() == n {
        return u.clone();
    }
    GroupField::leaf(sources::Embed { inner: u.clone(), n })
}

/// The 2π rotation loop ũ_f(x,τ) = D(τ) f̃(x) D(τ)⁻¹ on S³×S¹, D = diag(1, e^{−2πiτ}, e^{2πiτ}).
pub fn rotation_loop(f: &GroupField) -> Result<GroupField> {
    rotation_field(f, RotationMode::Bulk, false)
}

/// The disk filling 𝐮_f(x,r,τ) = a(r,τ) f̃(x) a(r,τ)⁻¹ of the rotation loop.
/// On S³×S¹ (r = 1) it coincides with [`rotation_loop`].
pub fn rotation_bulk(f: &GroupField) -> Result<GroupField> {
    rotation_field(f, RotationMode::Bulk, false)
}

/// The rotation as a rank-2 loop h(τ) f h(τ)⁻¹ with h = diag(e^{iπτ}, e^{−iπτ}).
/// Its embedding is the rank-3 rotation loop.
pub fn rotation_loop_su2(f: &GroupField) -> Result<GroupField> {
    rotation_field(f, RotationMode::Su2, false)
}

fn rotation_field(f: &GroupField, mode: RotationMode, commutator: bool) -> Result<GroupField> {
    if f.rank() != 2 {
        return Err(Error::InvalidRank(f.rank()));
    }
    Ok(GroupField::leaf(Rotation { f: f.clone(), mode, reparam: false, commutator }))
}

/// Sign σ in deg g = σ/(24π²) ∫_{S³} tr(dg g⁻¹)³, fixed so that deg g₁ = +1
/// in the chart orientation (ψ,θ,φ).
pub const DEGREE_SIGN: f64 = -1.0;

/// Mapping degree by quadrature of tr(dg g⁻¹)³ over an S³ grid.
pub fn mapping_degree(g: &GroupField, s3: &Domain) -> Result<f64> {
    if s3.dim() != 3 {
        return Err(Error::DomainMismatch("mapping degree needs an S3 grid".into()));
    }
    let [v] = integrate(s3, &[g], |_, jets| {
        let j = &jets[0];
        [trace_cube(&[j.v[0], j.v[1], j.v[2]])]
    })?;
    Ok(DEGREE_SIGN * v.re / (24.0 * PI * PI))
}

/// Maurer–Cartan pullback on the grid of `domain`: left g⁻¹dg or right dg g⁻¹.
pub fn maurer_cartan(g: &GroupField, domain: &Arc<Domain>, left: bool) -> Result<MatrixFormField> {
    let s = GroupSample::new(domain.clone(), g)?;
    Ok(if left { s.left_mc() } else { s.right_mc() })
}

/// Gauge action f·A = f⁻¹Af + f⁻¹df on the grid of `a`.
pub fn gauge_transform(f: &GroupSample, a: &MatrixFormField) -> Result<MatrixFormField> {
    if f.domain().as_ref() != a.domain().as_ref() {
        return Err(Error::DomainMismatch("gauge transform on different grids".into()));
    }
    if f.rank() != a.rank() {
        return Err(Error::RankMismatch(f.rank(), a.rank()));
    }
    let dim = a.domain().dim();
    Ok(a.map(1, |node, comps| {
        let j = f.jet(node);
        let ui = j.u.adjoint();
        let left = j.left(dim);
        comps.iter().enumerate().map(|(c, m)| ui.matmul(&m.matmul(&j.u)) + left[c]).collect()
    }))
}

/// Ambient coordinates and their chart Jacobian at a node of a domain.
///
/// The ambient space is R⁴ × R² with x ∈ S³ and y = (r cos 2πτ, r sin 2πτ).
/// Returns X (6 entries) and ∂X^μ/∂c_a for each chart axis a.
pub fn ambient_jet(domain: &Domain, coords: &[f64]) -> ([f64; 6], [[f64; 6]; 5]) {
    use crate::geometry::DomainKind;
    let (sp, cp) = coords[0].sin_cos();
    let (st, ct) = coords[1].sin_cos();
    let (sf, cf) = coords[2].sin_cos();
    let mut jac = [[0.0; 6]; 5];
    jac[0][..4].copy_from_slice(&[cp * st * cf, cp * st * sf, cp * ct, -sp]);
    jac[1][..4].copy_from_slice(&[sp * ct * cf, sp * ct * sf, -sp * st, 0.0]);
    jac[2][..4].copy_from_slice(&[-sp * st * sf, sp * st * cf, 0.0, 0.0]);
    let x = [sp * st * cf, sp * st * sf, sp * ct, cp];
    let (r, ang) = match domain.kind() {
        DomainKind::S3 => (1.0, 0.0),
        DomainKind::S3xI => {
            let a = 2.0 * PI * coords[3];
            jac[3][4] = -2.0 * PI * a.sin();
            jac[3][5] = 2.0 * PI * a.cos();
            (1.0, a)
        }
        DomainKind::S3xS1 => {
            let a = coords[3];
            jac[3][4] = -a.sin();
            jac[3][5] = a.cos();
            (1.0, a)
        }
        DomainKind::S3xD2 => {
            let (r, a) = (coords[3], coords[4]);
            jac[3][4] = a.cos();
            jac[3][5] = a.sin();
            jac[4][4] = -r * a.sin();
            jac[4][5] = r * a.cos();
            (r, a)
        }
    };
    ([x[0], x[1], x[2], x[3], r * ang.cos(), r * ang.sin()], jac)
}

/// Fiber coordinates (r, τ) of a node from its chart coordinates.
pub fn fiber_coords(domain: &Domain, coords: &[f64]) -> (f64, f64) {
    use crate::geometry::DomainKind;
    match domain.kind() {
        DomainKind::S3 => (1.0, 0.0),
        DomainKind::S3xI => (1.0, coords[3]),
        DomainKind::S3xS1 => (1.0, coords[3] / (2.0 * PI)),
        DomainKind::S3xD2 => (coords[3], coords[4] / (2.0 * PI)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{defaults, DomainKind};
    use crate::algebra::C64;

    fn s3() -> Arc<Domain> {
        Arc::new(Domain::new(DomainKind::S3, &defaults::S3).unwrap())
    }

    #[test]
    fn instanton_basics() {
        let g0 = instanton(0);
        let x = crate::geometry::chart_to_ambient(0.4, 1.1, 2.0);
        assert!(g0.eval(&x, 1.0, 0.0).dist(&CMat::identity(2)) < 1e-15);
        let a = instanton(2).eval(&x, 1.0, 0.0);
        let b = instanton(-2).eval(&x, 1.0, 0.0);
        assert!(a.matmul(&b).dist(&CMat::identity(2)) < 1e-14);
        assert!(instanton(1).basepoint_defect() < 1e-15);
    }

    #[test]
    fn degree_of_instantons() {
        let d = s3();
        for k in -2..=2 {
            let deg = mapping_degree(&instanton(k), &d).unwrap();
            assert!((deg - k as f64).abs() < 0.02, "k={k} deg={deg}");
        }
    }

    #[test]
    fn embedding_preserves_degree() {
        let d = s3();
        let g = embed_su2_su3(&instanton(1)).unwrap();
        assert_eq!(g.rank(), 3);
        assert!((mapping_degree(&g, &d).unwrap() - 1.0).abs() < 0.02);
        assert!(embed_su2_su3(&g).is_err());
    }

    #[test]
    fn left_right_mc_conjugate() {
        let d = s3();
        let g = instanton(1);
        let s = GroupSample::new(d.clone(), &g).unwrap();
        let (l, r) = (s.left_mc(), s.right_mc());
        for node in (0..d.n_nodes()).step_by(97) {
            let u = s.jet(node).u;
            for c in 0..3 {
                let conj = u.matmul(&l.get(node, c)).matmul(&u.adjoint());
                assert!(conj.dist(&r.get(node, c)) < 1e-8);
            }
        }
    }

    #[test]
    fn pure_gauge_is_flat() {
        // The residual is pure discretization error; it is largest next to the
        // chart poles where the one-sided stencils act, and falls at 4th order.
        let mut res = vec![];
        for grid in [[16, 16, 32], [32, 32, 64]] {
            let d = Arc::new(Domain::new(DomainKind::S3, &grid).unwrap());
            let a = maurer_cartan(&instanton(1), &d, true).unwrap();
            res.push(a.curvature().unwrap().max_norm());
        }
        assert!(res[0] < 1e-2 && res[1] < 5e-4, "{res:?}");
        assert!(res[0] / res[1] > 8.0, "{res:?}");
    }

    #[test]
    fn rotation_a_matrix_unitary() {
        for &(r, t) in &[(0.0, 0.3), (0.5, 0.1), (1.0, 0.7)] {
            let a = sources::a_matrix(r, t);
            assert!(a.matmul(&a.adjoint()).dist(&CMat::identity(3)) < 1e-14);
            assert!((a.det() - C64::new(1.0, 0.0)).norm() < 1e-14);
        }
        let a = sources::a_matrix(1.0, 0.3);
        let ph = C64::from_polar(1.0, -2.0 * PI * 0.3);
        assert!((a.get(1, 1) - ph).norm() < 1e-15 && a.get(1, 2).norm() < 1e-15);
    }

    #[test]
    fn rotation_loop_start_and_boundary() {
        let f = instanton(1);
        let lp = rotation_loop(&f).unwrap();
        let ft = embed_su2_su3(&f).unwrap();
        let x = crate::geometry::chart_to_ambient(0.9, 0.4, 1.3);
        assert!(lp.eval(&x, 1.0, 0.0).dist(&ft.eval(&x, 1.0, 0.0)) < 1e-14);
        let su2 = embed_su2_su3(&rotation_loop_su2(&f).unwrap()).unwrap();
        for &t in &[0.1, 0.45, 0.8] {
            assert!(su2.eval(&x, 1.0, t).dist(&lp.eval(&x, 1.0, t)) < 1e-14);
        }
        let c = rotation_loop(&instanton(0)).unwrap();
        assert!(c.eval(&x, 0.4, 0.3).dist(&CMat::identity(3)) < 1e-14);
    }
}
