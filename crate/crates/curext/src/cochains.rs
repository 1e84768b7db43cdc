//! The cochains c^{p,q}, their Lie-algebra counterparts e^{1,1}, e^{2,0}, and
//! the functionals β, γ, C5, ε and ω built from them.
//!
//! Pointwise kernels work on chart components (see [`PForm`]) so that they can
//! be fed either from fully sampled fields or from the plane stream. All
//! functionals carry the level κ = ½: the prefactor of every integral is
//! κ/(24π³), so that C5 = (i/480π³)∫tr V⁵ and β = (i/48π³)∫c^{2,1}.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{project_algebra_mat, CMat, C64};
use crate::error::{Error, Result};
use crate::extension::AffineDual;
use crate::fields::{
    ambient_jet, collect, embed, integrate, integrate_vec, AlgebraPoly, ExpPoly, GroupField, GroupSample, Jet,
    NodeCtx, PolyForm, Profile,
};
use crate::forms::{ncomp, tr_wedge, tr_wedge_top, trace_fifth_power, wedge_at, MatrixFormField, ScalarForm};
use crate::geometry::{Domain, DomainKind, Fiber};

/// Level of the extension.
pub const KAPPA: f64 = 0.5;

/// κ/(24π³), the common prefactor of β, γ, ω and (with the 1/10 inside
/// c^{1,2}) of C5.
pub fn coeff() -> f64 {
    KAPPA / (24.0 * PI.powi(3))
}

const I: C64 = C64::new(0.0, 1.0);

/// Chart components of a matrix-valued p-form at one node.
#[derive(Clone, Debug)]
pub struct PForm {
    pub p: usize,
    pub c: Vec<CMat>,
}

impl PForm {
    pub fn new(p: usize, c: Vec<CMat>) -> Self {
        PForm { p, c }
    }

    pub fn one(c: &[CMat]) -> Self {
        PForm { p: 1, c: c.to_vec() }
    }

    pub fn zero(dim: usize, p: usize, n: usize) -> Self {
        PForm { p, c: vec![CMat::zeros(n); ncomp(dim, p)] }
    }

    pub fn w(&self, o: &PForm, dim: usize) -> PForm {
        PForm { p: self.p + o.p, c: wedge_at(dim, self.p, &self.c, o.p, &o.c) }
    }

    pub fn tr_w(&self, o: &PForm, dim: usize) -> Vec<C64> {
        tr_wedge(dim, self.p, &self.c, o.p, &o.c)
    }

    pub fn add(&self, o: &PForm) -> PForm {
        PForm { p: self.p, c: self.c.iter().zip(&o.c).map(|(a, b)| *a + *b).collect() }
    }

    pub fn sub(&self, o: &PForm) -> PForm {
        PForm { p: self.p, c: self.c.iter().zip(&o.c).map(|(a, b)| *a - *b).collect() }
    }

    pub fn scale(&self, s: f64) -> PForm {
        PForm { p: self.p, c: self.c.iter().map(|a| a.scale_re(s)).collect() }
    }

    /// g X g⁻¹ for unitary g.
    pub fn conj(&self, g: &CMat) -> PForm {
        let gi = g.adjoint();
        PForm { p: self.p, c: self.c.iter().map(|a| g.matmul(a).matmul(&gi)).collect() }
    }

    /// X·m and m·X for a 0-form m.
    pub fn mul_right(&self, m: &CMat) -> PForm {
        PForm { p: self.p, c: self.c.iter().map(|a| a.matmul(m)).collect() }
    }

    pub fn mul_left(&self, m: &CMat) -> PForm {
        PForm { p: self.p, c: self.c.iter().map(|a| m.matmul(a)).collect() }
    }
}

fn combine(terms: &[(f64, Vec<C64>)]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); terms[0].1.len()];
    for (s, t) in terms {
        for (o, x) in out.iter_mut().zip(t) {
            *o += x * *s;
        }
    }
    out
}

fn five(v: &[CMat]) -> [CMat; 5] {
    [v[0], v[1], v[2], v[3], v[4]]
}

/// c^{0,2}(A) = tr(AF² − ½A³F + A⁵/10) on a 5-dimensional domain.
pub fn c02_top(a: &PForm, f: &PForm) -> C64 {
    let dim = 5;
    let af = a.w(f, dim);
    let a3 = a.w(a, dim).w(a, dim);
    tr_wedge_top(dim, 3, &af.c, &f.c) - tr_wedge_top(dim, 3, &a3.c, &f.c) * 0.5
        + trace_fifth_power(&five(&a.c)) * 0.1
}

/// c^{1,2}(g) = tr(V⁵)/10, V = dg g⁻¹.
pub fn c12_top(v: &[CMat]) -> C64 {
    trace_fifth_power(&five(v)) * 0.1
}

/// c^{1,1}(g; A) = tr[−½V(AF+FA−A³) + ¼(VA)² + ½V³A] (a 4-form).
pub fn c11_form(dim: usize, v: &PForm, a: &PForm, f: &PForm) -> Vec<C64> {
    let a3 = a.w(a, dim).w(a, dim);
    let x = a.w(f, dim).add(&f.w(a, dim)).sub(&a3);
    let va = v.w(a, dim);
    let v3 = v.w(v, dim).w(v, dim);
    combine(&[(-0.5, v.tr_w(&x, dim)), (0.25, va.tr_w(&va, dim)), (0.5, v3.tr_w(a, dim))])
}

/// c^{2,1}(g₁, g₂) = c^{1,1}(g₂; g₁⁻¹dg₁), evaluated with the curvature of the
/// pure gauge set to zero: tr[½VA³ + ¼(VA)² + ½V³A], A = g₁⁻¹dg₁, V = dg₂g₂⁻¹.
pub fn c21_form(dim: usize, a1: &PForm, v2: &PForm) -> Vec<C64> {
    let a3 = a1.w(a1, dim).w(a1, dim);
    let va = v2.w(a1, dim);
    let v3 = v2.w(v2, dim).w(v2, dim);
    combine(&[(0.5, v2.tr_w(&a3, dim)), (0.25, va.tr_w(&va, dim)), (0.5, v3.tr_w(a1, dim))])
}

/// The 2-form A₁V₂ − V₂A₁ appearing in c^{2,0}.
pub fn c20_kernel(dim: usize, a1: &PForm, v2: &PForm) -> PForm {
    a1.w(v2, dim).sub(&v2.w(a1, dim))
}

/// c^{2,0}(g₁, g₂; B) = ½tr[(A₁V₂ − V₂A₁) g₁⁻¹Bg₁] (a 3-form).
pub fn c20_form(dim: usize, a1: &PForm, v2: &PForm, g1: &CMat, b: &PForm) -> Vec<C64> {
    let c = c20_kernel(dim, a1, v2);
    let bb = b.conj(&g1.adjoint());
    c.tr_w(&bb, dim).into_iter().map(|z| z * 0.5).collect()
}

/// tr[(αβ − βα)γ] for 1-forms (the su(2) trace lemma integrand).
pub fn trace_lemma_form(dim: usize, alpha: &PForm, beta: &PForm, gamma: &PForm) -> Vec<C64> {
    alpha.w(beta, dim).sub(&beta.w(alpha, dim)).tr_w(gamma, dim)
}

/// e^{1,1}(ξ; A) = ½tr[(AF+FA−A³)dξ] (a 4-form).
pub fn e11_form(dim: usize, a: &PForm, f: &PForm, dxi: &PForm) -> Vec<C64> {
    let a3 = a.w(a, dim).w(a, dim);
    let x = a.w(f, dim).add(&f.w(a, dim)).sub(&a3);
    x.tr_w(dxi, dim).into_iter().map(|z| z * 0.5).collect()
}

/// e^{2,0}(ξ, η; A) = ½tr[(dξdη − dηdξ)A] (a 3-form).
pub fn e20_form(dim: usize, dxi: &PForm, deta: &PForm, a: &PForm) -> Vec<C64> {
    dxi.w(deta, dim).sub(&deta.w(dxi, dim)).tr_w(a, dim).into_iter().map(|z| z * 0.5).collect()
}

/// Right and left Maurer–Cartan forms of a jet.
fn mc(j: &Jet, dim: usize) -> (PForm, PForm) {
    (PForm::one(&j.v[..dim]), PForm::one(&j.left(dim)[..dim]))
}

/// Connection A and curvature F = dA + A∧A of a polynomial form at a node.
pub fn poly_connection(domain: &Domain, form: &PolyForm, coords: &[f64]) -> (PForm, PForm) {
    let dim = domain.dim();
    let (a, da) = form.with_d(domain, coords);
    let a = PForm::new(1, a);
    let f = PForm::new(2, da).add(&a.w(&a, dim));
    (a, f)
}

/// Gauge transform g·A = g⁻¹Ag + g⁻¹dg and g⁻¹Fg at a node.
fn act(j: &Jet, dim: usize, a: &PForm, f: &PForm) -> (PForm, PForm) {
    let ui = j.u.adjoint();
    let (_, left) = mc(j, dim);
    (a.conj(&ui).add(&left), f.conj(&ui))
}

/// Value and analytic chart differential of an algebra polynomial at a node.
pub fn poly_jet(domain: &Domain, xi: &AlgebraPoly, coords: &[f64]) -> (CMat, PForm) {
    let (x, jac) = ambient_jet(domain, coords);
    let (v, g) = xi.eval_grad(&x);
    let d = (0..domain.dim())
        .map(|a| {
            let mut m = CMat::zeros(xi.rank());
            for (mu, gm) in g.iter().enumerate() {
                m.axpy(jac[a][mu], gm);
            }
            m
        })
        .collect();
    (v, PForm::new(1, d))
}

fn need_dim(domain: &Domain, min: usize, what: &str) -> Result<()> {
    if domain.dim() < min {
        return Err(Error::DomainMismatch(format!("{what} needs a domain of dimension ≥ {min}, got {}", domain.dim())));
    }
    Ok(())
}

fn same_grid(a: &Domain, b: &Domain) -> Result<()> {
    if a != b {
        return Err(Error::DomainMismatch("fields live on different grids".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// cochains as scalar forms on sampled fields

/// c^{1,2}(g) on a 5-dimensional grid.
pub fn c12(g: &GroupSample) -> Result<ScalarForm> {
    let d = g.domain().clone();
    if d.dim() != 5 {
        return Err(Error::DomainMismatch("c12 is a 5-form".into()));
    }
    Ok(ScalarForm::from_fn(d, 5, |n| vec![c12_top(&g.jet(n).v)]))
}

/// c^{0,2}(A) on a 5-dimensional grid (curvature by finite differences).
pub fn c02(a: &MatrixFormField) -> Result<ScalarForm> {
    let d = a.domain().clone();
    if d.dim() != 5 {
        return Err(Error::DomainMismatch("c02 is a 5-form".into()));
    }
    let f = a.curvature()?;
    Ok(ScalarForm::from_fn(d, 5, |n| vec![c02_top(&PForm::new(1, a.at(n)), &PForm::new(2, f.at(n)))]))
}

/// c^{1,1}(g; A) (curvature by finite differences).
pub fn c11(g: &GroupSample, a: &MatrixFormField) -> Result<ScalarForm> {
    let d = g.domain().clone();
    same_grid(&d, a.domain())?;
    need_dim(&d, 4, "c11")?;
    let dim = d.dim();
    let f = a.curvature()?;
    Ok(ScalarForm::from_fn(d, 4, |n| {
        let (v, _) = mc(g.jet(n), dim);
        c11_form(dim, &v, &PForm::new(1, a.at(n)), &PForm::new(2, f.at(n)))
    }))
}

pub fn c21(g1: &GroupSample, g2: &GroupSample) -> Result<ScalarForm> {
    let d = g1.domain().clone();
    same_grid(&d, g2.domain())?;
    need_dim(&d, 4, "c21")?;
    let dim = d.dim();
    Ok(ScalarForm::from_fn(d, 4, |n| {
        let (_, a1) = mc(g1.jet(n), dim);
        let (v2, _) = mc(g2.jet(n), dim);
        c21_form(dim, &a1, &v2)
    }))
}

pub fn c20(g1: &GroupSample, g2: &GroupSample, a: &MatrixFormField) -> Result<ScalarForm> {
    let d = g1.domain().clone();
    same_grid(&d, g2.domain())?;
    same_grid(&d, a.domain())?;
    let dim = d.dim();
    Ok(ScalarForm::from_fn(d, 3, |n| {
        let (_, a1) = mc(g1.jet(n), dim);
        let (v2, _) = mc(g2.jet(n), dim);
        c20_form(dim, &a1, &v2, &g1.jet(n).u, &PForm::new(1, a.at(n)))
    }))
}

/// c^{3,0}(g₁, g₂, g₃) = c^{2,0}(g₂, g₃; g₁⁻¹dg₁).
pub fn c30(g1: &GroupSample, g2: &GroupSample, g3: &GroupSample) -> Result<ScalarForm> {
    let d = g1.domain().clone();
    same_grid(&d, g2.domain())?;
    same_grid(&d, g3.domain())?;
    let dim = d.dim();
    Ok(ScalarForm::from_fn(d, 3, |n| {
        let (_, a1) = mc(g1.jet(n), dim);
        let (_, a2) = mc(g2.jet(n), dim);
        let (v3, _) = mc(g3.jet(n), dim);
        c20_form(dim, &a2, &v3, &g2.jet(n).u, &a1)
    }))
}

// ---------------------------------------------------------------------------
// β, γ

fn real_of(z: C64, what: &str) -> Result<f64> {
    let tol = 1e-8 * z.re.abs().max(1.0);
    if z.im.abs() > tol {
        let _ = what;
        return Err(Error::ImaginaryResidual(z.im));
    }
    Ok(z.re)
}

/// ∫ c^{2,1}(f, g) over a 4-dimensional domain.
pub fn c21_integral(domain: &Domain, f: &GroupField, g: &GroupField) -> Result<C64> {
    if domain.dim() != 4 {
        return Err(Error::DomainMismatch("β is an integral over a 4-dimensional domain".into()));
    }
    let [z] = integrate(domain, &[f, g], |_, j| {
        let a1 = PForm::one(&j[0].left(4)[..4]);
        let v2 = PForm::one(&j[1].v[..4]);
        [c21_form(4, &a1, &v2)[0]]
    })?;
    Ok(z)
}

/// β_M(f, g) = i·κ/(24π³) ∫_M c^{2,1}(f, g) on M = T or S³×S¹.
pub fn beta(domain: &Domain, f: &GroupField, g: &GroupField) -> Result<f64> {
    beta_with(domain, f, g, KAPPA)
}

/// β with an explicit level (used by the normalization audit).
pub fn beta_with(domain: &Domain, f: &GroupField, g: &GroupField, kappa: f64) -> Result<f64> {
    let z = c21_integral(domain, f, g)?;
    real_of(I * z * (kappa / (24.0 * PI.powi(3))), "beta")
}

/// The 2-form A_f V_g − V_g A_f of the slices f(·,τ), g(·,τ), conjugated by
/// f(·,τ), sampled on an S³ grid.
fn boundary_kernel(s3: &Arc<Domain>, f: &GroupField, g: &GroupField, tau: f64) -> Result<Vec<Vec<CMat>>> {
    let fs = f.slice(tau);
    let gs = g.slice(tau);
    Ok(collect(s3, &[&fs, &gs], |_, j| {
        let (_, a1) = mc(&j[0], 3);
        let (v2, _) = mc(&j[1], 3);
        c20_kernel(3, &a1, &v2).conj(&j[0].u).c
    }))
}

/// γ_T(f, g; A) = i·κ/(24π³)[∫_{S³×1} c^{2,0} − ∫_{S³×0} c^{2,0} + ∫_T c^{2,1}],
/// with A a connection on the S³ factor of `t`.
pub fn gamma(t: &Domain, f: &GroupField, g: &GroupField, a: &MatrixFormField) -> Result<f64> {
    if t.kind() != DomainKind::S3xI {
        return Err(Error::DomainMismatch("γ lives on T = S³×[0,1]".into()));
    }
    let s3 = a.domain();
    if s3.kind() != DomainKind::S3 || s3.resolutions()[..] != t.resolutions()[..3] {
        return Err(Error::DomainMismatch("connection grid must be the S³ factor of T".into()));
    }
    let mut boundary = C64::new(0.0, 0.0);
    for (tau, sign) in [(1.0, 1.0), (0.0, -1.0)] {
        let fs = f.slice(tau);
        let gs = g.slice(tau);
        let [z] = integrate(s3, &[&fs, &gs], |ctx, j| {
            let (_, a1) = mc(&j[0], 3);
            let (v2, _) = mc(&j[1], 3);
            [c20_form(3, &a1, &v2, &j[0].u, &PForm::new(1, a.at(ctx.node)))[0]]
        })?;
        boundary += z * sign;
    }
    let bulk = c21_integral(t, f, g)?;
    real_of(I * (boundary + bulk) * coeff(), "gamma")
}

/// γ_T(f, g; ·) as an affine functional: base β_T(f, g) and the kernel
/// i·κ/(24π³)·½[f₁C₁f₁⁻¹ − f₀C₀f₀⁻¹] with C = A_f V_g − V_g A_f on each end.
pub fn gamma_dual(t: &Domain, s3: &Arc<Domain>, f: &GroupField, g: &GroupField) -> Result<AffineDual> {
    if t.kind() != DomainKind::S3xI || s3.resolutions()[..] != t.resolutions()[..3] {
        return Err(Error::DomainMismatch("γ needs T and its S³ factor".into()));
    }
    let base = beta(t, f, g)?;
    let k1 = boundary_kernel(s3, f, g, 1.0)?;
    let k0 = boundary_kernel(s3, f, g, 0.0)?;
    let s = I * (coeff() * 0.5);
    let kernel = MatrixFormField::from_fn(s3.clone(), 2, f.rank(), |n| {
        k1[n].iter().zip(&k0[n]).map(|(x, y)| project_algebra_mat(&(*x - *y).scale(s))).collect()
    });
    AffineDual::new(base, kernel)
}

// ---------------------------------------------------------------------------
// C5, ε, Polyakov–Wiegmann

/// A value of C5 with its canonical representative in (−½, ½].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct C5Value {
    /// (i/480π³)∫ tr V⁵ before reduction mod Z.
    pub raw: f64,
    pub value: f64,
    /// Imaginary part of the normalized integral (rounding-level).
    pub imag: f64,
}

impl C5Value {
    fn new(z: C64) -> Self {
        let v = I * z * (coeff() / 10.0);
        C5Value { raw: v.re, value: canonical(v.re), imag: v.im }
    }

    /// exp(2πi C5), independent of the witness.
    pub fn phase(&self) -> C64 {
        C64::from_polar(1.0, 2.0 * PI * self.raw)
    }
}

/// Representative of x mod Z in (−½, ½].
pub fn canonical(x: f64) -> f64 {
    x - (x - 0.5).ceil()
}

/// Distance of x to the nearest integer.
pub fn integer_gap(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Sup distance between the rim r = 1 of a witness and the (embedded) loop,
/// over the S³ nodes and loop parameters of `q`.
pub fn boundary_defect(q: &Domain, lp: &GroupField, witness: &GroupField) -> f64 {
    let fiber = Fiber { r: vec![1.0], tau: q.fiber().tau.clone() };
    witness.sup_distance(&embed(lp, witness.rank()), q, &fiber)
}

/// C5 of several (loop, witness) pairs in one pass over Q = S³×D².
pub fn c5_many(q: &Domain, items: &[(&GroupField, &GroupField)]) -> Result<Vec<C5Value>> {
    if q.kind() != DomainKind::S3xD2 {
        return Err(Error::DomainMismatch("C5 is an integral over Q = S³×D²".into()));
    }
    for (lp, w) in items {
        if w.rank() < 3 {
            return Err(Error::InvalidRank(w.rank()));
        }
        let d = boundary_defect(q, lp, w);
        if d > 1e-6 {
            return Err(Error::BoundaryMismatch(d));
        }
    }
    let ws: Vec<&GroupField> = items.iter().map(|(_, w)| *w).collect();
    let k = ws.len();
    let z = integrate_vec(q, &ws, k, |_, j| j.iter().map(|x| trace_fifth_power(&five(&x.v))).collect())?;
    Ok(z.into_iter().map(C5Value::new).collect())
}

/// C5(u) = (i/480π³)∫_Q tr(d𝐮 𝐮⁻¹)⁵ for a loop u on S³×S¹ with filling 𝐮.
pub fn c5(q: &Domain, lp: &GroupField, witness: &GroupField) -> Result<C5Value> {
    Ok(c5_many(q, &[(lp, witness)])?.remove(0))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Epsilon {
    pub sign: i8,
    /// |exp 2πiC5 − sign|.
    pub distance: f64,
    pub c5: C5Value,
}

/// ε(u) = exp 2πi C5(ũ) ∈ {±1} for a loop whose filling lives in SU(3).
pub fn epsilon(q: &Domain, lp: &GroupField, witness: &GroupField) -> Result<Epsilon> {
    epsilon_of(c5(q, lp, witness)?)
}

pub fn epsilon_of(c5: C5Value) -> Result<Epsilon> {
    let ph = c5.phase();
    let dp = (ph - 1.0).norm();
    let dm = (ph + 1.0).norm();
    let (sign, distance) = if dp <= dm { (1, dp) } else { (-1, dm) };
    if distance > 0.1 {
        return Err(Error::AmbiguousSign(distance));
    }
    Ok(Epsilon { sign, distance, c5 })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PwCheck {
    pub c5_f: f64,
    pub c5_g: f64,
    pub c5_fg: f64,
    pub beta: f64,
    /// Distance of C5(fg) − C5(f) − C5(g) − β(f,g) to the nearest integer.
    pub gap: f64,
    /// The same gap with β doubled (normalization audit).
    pub gap_beta_doubled: f64,
}

/// Polyakov–Wiegmann: C5(fg) − C5(f) − C5(g) − β_M(f, g) ∈ Z for loops f, g
/// on M = S³×S¹ with fillings f_w, g_w (the product fills fg).
pub fn polyakov_wiegmann(
    m: &Domain,
    q: &Domain,
    f: (&GroupField, &GroupField),
    g: (&GroupField, &GroupField),
) -> Result<PwCheck> {
    if m.kind() != DomainKind::S3xS1 {
        return Err(Error::DomainMismatch("β_M needs M = S³×S¹".into()));
    }
    let fg = f.0.mul(g.0)?;
    let fgw = f.1.mul(g.1)?;
    let c = c5_many(q, &[f, g, (&fg, &fgw)])?;
    let b = beta(m, f.0, g.0)?;
    let d = c[2].raw - c[0].raw - c[1].raw;
    Ok(PwCheck {
        c5_f: c[0].value,
        c5_g: c[1].value,
        c5_fg: c[2].value,
        beta: b,
        gap: integer_gap(d - b),
        gap_beta_doubled: integer_gap(d - 2.0 * b),
    })
}

/// Conjugation identity for C5: C5(f₀gf₀⁻¹) − C5(g) − β_T(f₀g, f₀⁻¹) − β_T(f₀, g) ∈ Z for a
/// loop g (viewed as a path on T) with filling g_w and a map f₀ conjugating
/// it. Returns the gap to the nearest integer.
pub fn mic_c5(t: &Domain, q: &Domain, f0: &GroupField, g: &GroupField, gw: &GroupField) -> Result<f64> {
    let wr = gw.rank();
    let f0w = embed(&f0.unit_radius(), wr);
    let conj = f0.mul(g)?.mul(&f0.inverse())?;
    let conj_w = f0w.mul(gw)?.mul(&f0w.inverse())?;
    let c = c5_many(q, &[(&conj, &conj_w), (g, gw)])?;
    let b1 = beta(t, &f0.mul(g)?, &f0.inverse())?;
    let b2 = beta(t, f0, g)?;
    Ok(integer_gap(c[0].raw - c[1].raw - b1 - b2))
}

// ---------------------------------------------------------------------------
// descent equations

/// Seeded sample for the descent checks: three group fields exp(ξ_k(X)) and a
/// connection-like form A(X), all polynomial in the ambient coordinates
/// X = (x, y) so that they are smooth on every domain.
#[derive(Clone, Debug)]
pub struct DescentSample {
    pub g: [GroupField; 3],
    pub a: PolyForm,
}

impl DescentSample {
    pub fn random(rank: usize, seed: u64, amp_g: f64, amp_a: f64) -> Result<Self> {
        let mk = |s: u64| -> Result<GroupField> {
            let xi = Arc::new(AlgebraPoly::random(rank, 6, 1, seed * 7 + s, amp_g, false)?);
            Ok(GroupField::leaf(ExpPoly { xi, profile: Profile::constant(1.0) }))
        };
        Ok(DescentSample { g: [mk(1)?, mk(2)?, mk(3)?], a: PolyForm::random(rank, 6, 1, seed * 7 + 4, amp_a)? })
    }

    /// All maps the identity and A = 0.
    pub fn trivial(rank: usize) -> Self {
        let id = GroupField::identity(rank);
        DescentSample { g: [id.clone(), id.clone(), id], a: PolyForm::zero(rank, 6) }
    }
}

/// Size of one descent identity on one grid.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityResidual {
    pub name: String,
    pub grid: Vec<usize>,
    /// |∫ residual|.
    pub integral: f64,
    /// ∫ |residual|.
    pub l1: f64,
    /// ∫ Σ |terms| (the size of the individual terms).
    pub scale: f64,
    pub max_pointwise: f64,
}

impl IdentityResidual {
    /// ∫|residual| / ∫Σ|terms| (0 when every term vanishes).
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.l1 / self.scale
        }
    }
}

struct NodeTerms {
    lower: Vec<C64>,
    alg: Vec<C64>,
    scale: f64,
}

/// Collects a (dim−1)- or lower-degree form `lower` and an algebraic part of
/// one degree higher, and measures alg + d(lower) (or alg alone when `lower`
/// is empty).
fn identity_residual(
    name: &str,
    domain: Arc<Domain>,
    fields: &[&GroupField],
    degree: usize,
    kernel: impl Fn(&NodeCtx, &[Jet]) -> NodeTerms + Sync,
) -> Result<IdentityResidual> {
    let terms = collect(&domain, fields, kernel);
    let nc = ncomp(domain.dim(), degree);
    let with_d = !terms[0].lower.is_empty();
    let dl = if with_d {
        let lower: Vec<C64> = terms.iter().flat_map(|t| t.lower.iter().copied()).collect();
        Some(ScalarForm::from_raw(domain.clone(), degree - 1, lower)?.exterior_d()?)
    } else {
        None
    };
    let mut res = Vec::with_capacity(terms.len() * nc);
    let mut abs = Vec::with_capacity(terms.len());
    let mut sc = Vec::with_capacity(terms.len());
    let mut maxp: f64 = 0.0;
    for (n, t) in terms.iter().enumerate() {
        let mut a = 0.0;
        let mut s = t.scale;
        let mut r_sum = C64::new(0.0, 0.0);
        for c in 0..nc {
            let d = dl.as_ref().map(|x| x.at(n)[c]).unwrap_or_default();
            let r = t.alg[c] + d;
            a += r.norm();
            s += d.norm();
            r_sum += r;
            maxp = maxp.max(r.norm());
            res.push(r);
        }
        abs.push(a);
        sc.push(s);
        let _ = r_sum;
    }
    let vol = domain.cell_volume();
    let integral = if degree == domain.dim() {
        ScalarForm::from_raw(domain.clone(), degree, res)?.integrate()?.norm()
    } else {
        f64::NAN
    };
    Ok(IdentityResidual {
        name: name.to_string(),
        grid: domain.resolutions(),
        integral,
        l1: crate::geometry::pairwise_sum(&abs) * vol,
        scale: crate::geometry::pairwise_sum(&sc) * vol,
        max_pointwise: maxp,
    })
}

fn norms(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

fn lin(terms: &[(f64, &[C64])]) -> (Vec<C64>, f64) {
    let mut out = vec![C64::new(0.0, 0.0); terms[0].1.len()];
    let mut s = 0.0;
    for (c, t) in terms {
        s += norms(t);
        for (o, x) in out.iter_mut().zip(t.iter()) {
            *o += x * *c;
        }
    }
    (out, s)
}

/// c^{0,2}(g·A) − c^{0,2}(A) − dc^{1,1}(g; A) − c^{1,2}(g) on a 5-domain.
pub fn descent_variation(sample: &DescentSample, q: Arc<Domain>) -> Result<IdentityResidual> {
    let a = &sample.a;
    let dom = q.clone();
    identity_residual("p=1: c02(g·A) − c02(A) = dc11 + c12", q, &[&sample.g[0]], 5, move |ctx, j| {
        let (ac, fc) = poly_connection(&dom, a, &ctx.coords[..5]);
        let (ag, fg) = act(&j[0], 5, &ac, &fc);
        let (v, _) = mc(&j[0], 5);
        let x = [c02_top(&ag, &fg)];
        let y = [c02_top(&ac, &fc)];
        let z = [c12_top(&v.c)];
        let (alg, scale) = lin(&[(1.0, &x), (-1.0, &y), (-1.0, &z)]);
        let lower = c11_form(5, &v, &ac, &fc).into_iter().map(|c| -c).collect();
        NodeTerms { lower, alg, scale }
    })
}

/// dc^{2,1} + δc^{1,2} = 0 on a 5-domain.
pub fn descent_p2_top(sample: &DescentSample, q: Arc<Domain>) -> Result<IdentityResidual> {
    let [g1, g2, _] = &sample.g;
    let g12 = g1.mul(g2)?;
    identity_residual("p=2: dc21 + δc12 = 0", q, &[g1, g2, &g12], 5, |_, j| {
        let (v1, a1) = mc(&j[0], 5);
        let (v2, _) = mc(&j[1], 5);
        let (v12, _) = mc(&j[2], 5);
        let (alg, scale) =
            lin(&[(1.0, &[c12_top(&v2.c)]), (-1.0, &[c12_top(&v12.c)]), (1.0, &[c12_top(&v1.c)])]);
        NodeTerms { lower: c21_form(5, &a1, &v2), alg, scale }
    })
}

/// dc^{2,0} − δc^{1,1} + c^{2,1} = 0 on a 4-domain.
pub fn descent_p2_mixed(sample: &DescentSample, t: Arc<Domain>) -> Result<IdentityResidual> {
    let [g1, g2, _] = &sample.g;
    let g12 = g1.mul(g2)?;
    let a = &sample.a;
    let dom = t.clone();
    let dim = t.dim();
    identity_residual("p=2: dc20 − δc11 = −c21", t, &[g1, g2, &g12], dim, move |ctx, j| {
        let (ac, fc) = poly_connection(&dom, a, &ctx.coords[..dim]);
        let (v1, a1) = mc(&j[0], dim);
        let (v2, _) = mc(&j[1], dim);
        let (v12, _) = mc(&j[2], dim);
        let (a_g1, f_g1) = act(&j[0], dim, &ac, &fc);
        let t1 = c11_form(dim, &v2, &a_g1, &f_g1);
        let t2 = c11_form(dim, &v12, &ac, &fc);
        let t3 = c11_form(dim, &v1, &ac, &fc);
        let t4 = c21_form(dim, &a1, &v2);
        let (alg, scale) = lin(&[(-1.0, &t1), (1.0, &t2), (-1.0, &t3), (1.0, &t4)]);
        NodeTerms { lower: c20_form(dim, &a1, &v2, &j[0].u, &ac), alg, scale }
    })
}

/// dc^{3,0} + δc^{2,1} = 0 on a 4-domain.
pub fn descent_p3_top(sample: &DescentSample, t: Arc<Domain>) -> Result<IdentityResidual> {
    let [g1, g2, g3] = &sample.g;
    let g12 = g1.mul(g2)?;
    let g23 = g2.mul(g3)?;
    let dim = t.dim();
    identity_residual("p=3: dc30 + δc21 = 0", t, &[g1, g2, g3, &g12, &g23], dim, move |_, j| {
        let (_, a1) = mc(&j[0], dim);
        let (v2, a2) = mc(&j[1], dim);
        let (v3, _) = mc(&j[2], dim);
        let (_, a12) = mc(&j[3], dim);
        let (v23, _) = mc(&j[4], dim);
        let t1 = c21_form(dim, &a2, &v3);
        let t2 = c21_form(dim, &a12, &v3);
        let t3 = c21_form(dim, &a1, &v23);
        let t4 = c21_form(dim, &a1, &v2);
        let (alg, scale) = lin(&[(1.0, &t1), (-1.0, &t2), (1.0, &t3), (-1.0, &t4)]);
        NodeTerms { lower: c20_form(dim, &a2, &v3, &j[1].u, &a1), alg, scale }
    })
}

/// δc^{2,0} − c^{3,0} = 0 (pointwise, no derivatives of cochains).
pub fn descent_p3_mixed(sample: &DescentSample, t: Arc<Domain>) -> Result<IdentityResidual> {
    let [g1, g2, g3] = &sample.g;
    let g12 = g1.mul(g2)?;
    let g23 = g2.mul(g3)?;
    let a = &sample.a;
    let dom = t.clone();
    let dim = t.dim();
    identity_residual("p=3: δc20 = c30", t, &[g1, g2, g3, &g12, &g23], 3, move |ctx, j| {
        let (ac, fc) = poly_connection(&dom, a, &ctx.coords[..dim]);
        let (_, a1) = mc(&j[0], dim);
        let (v2, a2) = mc(&j[1], dim);
        let (v3, _) = mc(&j[2], dim);
        let (_, a12) = mc(&j[3], dim);
        let (v23, _) = mc(&j[4], dim);
        let (a_g1, _) = act(&j[0], dim, &ac, &fc);
        let t1 = c20_form(dim, &a2, &v3, &j[1].u, &a_g1);
        let t2 = c20_form(dim, &a12, &v3, &j[3].u, &ac);
        let t3 = c20_form(dim, &a1, &v23, &j[0].u, &ac);
        let t4 = c20_form(dim, &a1, &v2, &j[0].u, &ac);
        let t5 = c20_form(dim, &a2, &v3, &j[1].u, &a1);
        let (alg, scale) = lin(&[(1.0, &t1), (-1.0, &t2), (1.0, &t3), (-1.0, &t4), (-1.0, &t5)]);
        NodeTerms { lower: vec![], alg, scale }
    })
}

/// Residuals of the descent identities for chain degree p on the given grids.
#[derive(Clone, Debug, Serialize)]
pub struct DescentReport {
    pub p: usize,
    pub identities: Vec<IdentityResidual>,
}

/// Evaluates the descent identities of chain degree `p` (1..=3): 5-form
/// identities on `q` (S³×D²), 4- and 3-form identities on `t` (S³×[0,1]).
/// For p = 1 the second identity is a 6-form and vacuous on these domains.
pub fn check_descent(p: usize, sample: &DescentSample, q: &Arc<Domain>, t: &Arc<Domain>) -> Result<DescentReport> {
    if q.dim() != 5 || t.dim() != 4 {
        return Err(Error::DomainMismatch("descent needs a 5-domain and a 4-domain".into()));
    }
    let identities = match p {
        1 => vec![descent_variation(sample, q.clone())?],
        2 => vec![descent_p2_top(sample, q.clone())?, descent_p2_mixed(sample, t.clone())?],
        3 => vec![descent_p3_top(sample, t.clone())?, descent_p3_mixed(sample, t.clone())?],
        _ => return Err(Error::Config(format!("descent degree p = {p} not in 1..=3"))),
    };
    Ok(DescentReport { p, identities })
}

// ---------------------------------------------------------------------------
// Lie algebra cochains

/// e^{1,1}(ξ; A) sampled on a grid of dimension ≥ 4.
pub fn e11(domain: &Arc<Domain>, xi: &AlgebraPoly, a: &PolyForm) -> Result<ScalarForm> {
    need_dim(domain, 4, "e11")?;
    let dim = domain.dim();
    Ok(ScalarForm::from_fn(domain.clone(), 4, |n| {
        let c = domain.coords(n);
        let (ac, fc) = poly_connection(domain, a, &c);
        let (_, dxi) = poly_jet(domain, xi, &c);
        e11_form(dim, &ac, &fc, &dxi)
    }))
}

/// e^{2,0}(ξ, η; A) sampled on a grid.
pub fn e20(domain: &Arc<Domain>, xi: &AlgebraPoly, eta: &AlgebraPoly, a: &PolyForm) -> Result<ScalarForm> {
    need_dim(domain, 3, "e20")?;
    let dim = domain.dim();
    Ok(ScalarForm::from_fn(domain.clone(), 3, |n| {
        let c = domain.coords(n);
        let (ac, _) = poly_connection(domain, a, &c);
        let (_, dxi) = poly_jet(domain, xi, &c);
        let (_, deta) = poly_jet(domain, eta, &c);
        e20_form(dim, &dxi, &deta, &ac)
    }))
}

/// Pointwise δe^{1,1}(ξ, η; A) with (ξ·Φ)(A) = σ·DΦ_A[d_Aξ], d_Aξ = dξ + Aξ − ξA.
fn delta_e11(dim: usize, x: (&CMat, &PForm), y: (&CMat, &PForm), a: &PForm, f: &PForm, sigma: f64) -> Vec<C64> {
    // D_A of ½tr[(AF+FA−A³)dη] in direction b: ½tr[(bF + Fb + A db + db A + AbA)dη]
    let dir = |xi: &CMat, dxi: &PForm, deta: &PForm| -> Vec<C64> {
        let b = dxi.add(&a.mul_right(xi)).sub(&a.mul_left(xi));
        // db = dA ξ − ξ dA − A dξ − dξ A, with dA = F − A∧A
        let da = f.sub(&a.w(a, dim));
        let db = da.mul_right(xi).sub(&da.mul_left(xi)).sub(&a.w(dxi, dim)).sub(&dxi.w(a, dim));
        let x = b
            .w(f, dim)
            .add(&f.w(&b, dim))
            .add(&a.w(&db, dim))
            .add(&db.w(a, dim))
            .add(&a.w(&b, dim).w(a, dim));
        x.tr_w(deta, dim).into_iter().map(|z| z * 0.5).collect()
    };
    let t1 = dir(x.0, x.1, y.1);
    let t2 = dir(y.0, y.1, x.1);
    // d[ξ,η] = [dξ,η] + [ξ,dη]
    let dbr = x.1.mul_right(y.0).sub(&x.1.mul_left(y.0)).add(&y.1.mul_left(x.0)).sub(&y.1.mul_right(x.0));
    let t3 = e11_form(dim, a, f, &dbr);
    combine(&[(sigma, t1), (-sigma, t2), (-1.0, t3)])
}

/// Conventions for the Lie descent identity δe^{1,1} + k·de^{2,0} = 0.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LieConvention {
    /// σ in (ξ·Φ)(A) = σ·DΦ_A[d_Aξ].
    pub sigma: f64,
    /// k in δe^{1,1} + k·de^{2,0} = 0.
    pub k: f64,
}

impl LieConvention {
    /// Φ(−d_Aξ) for the infinitesimal action and δe^{1,1} = −de^{2,0}, read
    /// literally.
    pub const LITERAL: LieConvention = LieConvention { sigma: -1.0, k: 1.0 };
    /// The infinitesimal form of the group descent dc^{2,0} − δc^{1,1} + c^{2,1} = 0
    /// at g₁ = e^{sξ}, g₂ = e^{tη}: the action along g·A (σ = +1) and
    /// δe^{1,1} = 2de^{2,0}, the factor 2 coming from antisymmetrizing the
    /// mixed s,t-derivative of δc^{1,1}.
    pub const DERIVED: LieConvention = LieConvention { sigma: 1.0, k: -2.0 };
}

/// δe^{1,1} + k·de^{2,0} on a 4-domain.
pub fn lie_descent(
    t: &Arc<Domain>,
    xi: &AlgebraPoly,
    eta: &AlgebraPoly,
    a: &PolyForm,
    conv: LieConvention,
) -> Result<IdentityResidual> {
    if t.dim() != 4 {
        return Err(Error::DomainMismatch("Lie descent is a 4-form identity".into()));
    }
    let dim = 4;
    let dom = t.clone();
    // no group fields are involved; stream over a dummy identity field
    let id = GroupField::identity(xi.rank());
    let name = format!("Lie: δe11 + {}·de20 = 0 (σ = {})", conv.k, conv.sigma);
    identity_residual(&name, t.clone(), &[&id], 4, move |ctx, _| {
        let c = &ctx.coords[..dim];
        let (ac, fc) = poly_connection(&dom, a, c);
        let (x, dx) = poly_jet(&dom, xi, c);
        let (y, dy) = poly_jet(&dom, eta, c);
        let alg = delta_e11(dim, (&x, &dx), (&y, &dy), &ac, &fc, conv.sigma);
        let scale = norms(&alg);
        let lower = e20_form(dim, &dx, &dy, &ac).into_iter().map(|z| z * conv.k).collect();
        NodeTerms { lower, alg, scale }
    })
}

/// ω(ξ, η; A) = −κ/(24π³)∫_{S³} tr[(dξdη − dηdξ)A]. With anti-Hermitian
/// fields the integral is imaginary, so ω is returned as a complex number
/// (iω is real).
pub fn omega(s3: &Domain, xi: &AlgebraPoly, eta: &AlgebraPoly, a: &MatrixFormField) -> Result<C64> {
    omega_with(s3, xi, eta, |n| PForm::new(1, a.at(n)))
}

fn omega_with(s3: &Domain, xi: &AlgebraPoly, eta: &AlgebraPoly, a: impl Fn(usize) -> PForm + Sync) -> Result<C64> {
    if s3.kind() != DomainKind::S3 {
        return Err(Error::DomainMismatch("ω is an integral over S³".into()));
    }
    let vals: Vec<C64> = (0..s3.n_nodes())
        .into_par_iter()
        .map(|n| {
            let c = s3.coords(n);
            let (_, dx) = poly_jet(s3, xi, &c);
            let (_, dy) = poly_jet(s3, eta, &c);
            e20_form(3, &dx, &dy, &a(n))[0] * 2.0
        })
        .collect();
    Ok(s3.integrate_top_c(&vals)? * (-coeff()))
}

/// Kernel 2-form of ω(ξ, η; ·): ω(ξ,η;A) = ∫ tr(K∧A), K = −κ/(24π³)(dξdη − dηdξ).
pub fn omega_kernel(s3: &Arc<Domain>, xi: &AlgebraPoly, eta: &AlgebraPoly) -> MatrixFormField {
    MatrixFormField::from_fn(s3.clone(), 2, xi.rank(), |n| {
        let c = s3.coords(n);
        let (_, dx) = poly_jet(s3, xi, &c);
        let (_, dy) = poly_jet(s3, eta, &c);
        dx.w(&dy, 3).sub(&dy.w(&dx, 3)).scale(-coeff()).c
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClosednessCheck {
    pub residual: f64,
    pub scale: f64,
}

impl ClosednessCheck {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.residual / self.scale
        }
    }
}

/// (d̃ω_f)(ξ,η,ζ) = ξ·ω(η,ζ) − η·ω(ξ,ζ) + ζ·ω(ξ,η) − ω([ξ,η],ζ) + ω([ξ,ζ],η) − ω([η,ζ],ξ)
/// at A = f⁻¹df, with ξ·ω(η,ζ) = ω(η,ζ; d_Aξ) (the derivative along f e^{tξ}).
pub fn omega_closedness(s3: &Arc<Domain>, f: &GroupField, x: &AlgebraPoly, y: &AlgebraPoly, z: &AlgebraPoly) -> Result<ClosednessCheck> {
    let fs = GroupSample::new(s3.clone(), f)?;
    let nodes: Vec<(C64, f64)> = (0..s3.n_nodes())
        .into_par_iter()
        .map(|n| {
            let c = s3.coords(n);
            let a = PForm::one(&fs.jet(n).left(3)[..3]);
            let (xv, dx) = poly_jet(s3, x, &c);
            let (yv, dy) = poly_jet(s3, y, &c);
            let (zv, dz) = poly_jet(s3, z, &c);
            let cov = |v: &CMat, d: &PForm| d.add(&a.mul_right(v)).sub(&a.mul_left(v));
            let br = |u: (&CMat, &PForm), w: (&CMat, &PForm)| -> PForm {
                u.1.mul_right(w.0).sub(&u.1.mul_left(w.0)).add(&w.1.mul_left(u.0)).sub(&w.1.mul_right(u.0))
            };
            let om = |p: &PForm, q: &PForm, b: &PForm| -> C64 { e20_form(3, p, q, b)[0] * 2.0 };
            let terms = [
                om(&dy, &dz, &cov(&xv, &dx)),
                -om(&dx, &dz, &cov(&yv, &dy)),
                om(&dx, &dy, &cov(&zv, &dz)),
                -om(&br((&xv, &dx), (&yv, &dy)), &dz, &a),
                om(&br((&xv, &dx), (&zv, &dz)), &dy, &a),
                -om(&br((&yv, &dy), (&zv, &dz)), &dx, &a),
            ];
            let s: C64 = terms.iter().sum();
            (s, terms.iter().map(|t| t.norm()).sum())
        })
        .collect();
    let res: Vec<C64> = nodes.iter().map(|x| x.0).collect();
    let sc: Vec<f64> = nodes.iter().map(|x| x.1).collect();
    let k = coeff();
    Ok(ClosednessCheck {
        residual: s3.integrate_top_c(&res)?.norm() * k,
        scale: s3.integrate_top(&sc)?.abs() * k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::su_basis;
    use crate::fields::instanton;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_form(rng: &mut ChaCha8Rng, dim: usize, p: usize, n: usize) -> PForm {
        let basis = su_basis(n).unwrap();
        PForm::new(
            p,
            (0..ncomp(dim, p))
                .map(|_| {
                    let mut m = CMat::zeros(n);
                    for e in &basis {
                        m.axpy(rng.gen_range(-1.0..1.0), e.mat());
                    }
                    m
                })
                .collect(),
        )
    }

    #[test]
    fn canonical_representative() {
        assert_eq!(canonical(0.5), 0.5);
        assert_eq!(canonical(-0.5), 0.5);
        assert!((canonical(1.3) - 0.3).abs() < 1e-12);
        assert!((canonical(-0.7) - 0.3).abs() < 1e-12);
        assert!((integer_gap(2.96) - 0.04).abs() < 1e-12);
    }

    #[test]
    fn su2_trace_lemma_and_c21_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let a = rand_form(&mut rng, 4, 1, 2);
            let b = rand_form(&mut rng, 4, 1, 2);
            let c = rand_form(&mut rng, 4, 1, 2);
            assert!(norms(&trace_lemma_form(4, &a, &b, &c)) < 1e-12);
            assert!(norms(&c21_form(4, &a, &b)) < 1e-12);
        }
    }

    #[test]
    fn c21_is_not_zero_for_su3() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = rand_form(&mut rng, 4, 1, 3);
        let b = rand_form(&mut rng, 4, 1, 3);
        assert!(norms(&c21_form(4, &a, &b)) > 1e-3);
    }

    #[test]
    fn c02_of_pure_gauge_is_fifth_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = rand_form(&mut rng, 5, 1, 3);
        let f = PForm::zero(5, 2, 3);
        assert!((c02_top(&a, &f) - c12_top(&a.c)).norm() < 1e-12);
    }

    #[test]
    fn omega_antisymmetric_and_linear_in_a() {
        let s3 = Arc::new(Domain::new(DomainKind::S3, &[8, 8, 16]).unwrap());
        let x = AlgebraPoly::random(3, 4, 2, 1, 1.0, true).unwrap();
        let y = AlgebraPoly::random(3, 4, 2, 2, 1.0, true).unwrap();
        let a = PolyForm::random(3, 4, 1, 3, 1.0).unwrap().sample(&s3);
        let w1 = omega(&s3, &x, &y, &a).unwrap();
        let w2 = omega(&s3, &y, &x, &a).unwrap();
        assert!((w1 + w2).norm() < 1e-12 * w1.norm().max(1.0));
        assert!(omega(&s3, &x, &x, &a).unwrap().norm() < 1e-14);
        assert!(w1.re.abs() < 1e-12 * w1.norm().max(1e-3));
        let z = MatrixFormField::zeros(s3.clone(), 1, 3);
        assert_eq!(omega(&s3, &x, &y, &z).unwrap().norm(), 0.0);
        // ∫ tr(K∧A) reproduces ω
        let k = omega_kernel(&s3, &x, &y);
        let v: Vec<C64> = (0..s3.n_nodes()).map(|n| tr_wedge_top(3, 2, &k.at(n), &a.at(n))).collect();
        assert!((s3.integrate_top_c(&v).unwrap() - w1).norm() < 1e-12 * w1.norm());
    }

    #[test]
    fn beta_of_inverse_pair_vanishes() {
        let t = Domain::new(DomainKind::S3xI, &[8, 8, 16, 8]).unwrap();
        let s = DescentSample::random(3, 2, 0.7, 0.5).unwrap();
        let f = &s.g[0];
        assert!(beta(&t, f, &f.inverse()).unwrap().abs() < 1e-10);
        let b = beta(&t, f, &s.g[1]).unwrap();
        assert!(b.abs() > 1e-6);
    }

    #[test]
    fn instanton_c5_requires_matching_boundary() {
        let q = Domain::new(DomainKind::S3xD2, &[8, 8, 16, 8, 8]).unwrap();
        let lp = crate::fields::rotation_loop(&instanton(1)).unwrap();
        let wrong = crate::fields::rotation_bulk(&instanton(2)).unwrap();
        assert!(matches!(c5(&q, &lp, &wrong), Err(Error::BoundaryMismatch(_))));
    }
}
