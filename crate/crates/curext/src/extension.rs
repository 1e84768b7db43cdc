//! The extended group Ω̂G = K × exp 2πi𝒜₃*/J₀ and its Lie algebra.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{project_algebra_mat, CMat, C64};
use crate::cochains::{self, c20_kernel, c21_form, c5, coeff, PForm};
use crate::error::{Error, Result};
use crate::fields::{
    bridge, integrate, smoothstep, smoothstep_deriv, AlgebraPoly, Generator, GroupField, GroupSample, PathK, PolyForm,
};
use crate::forms::{tr_wedge_top, MatrixFormField};
use crate::geometry::{defaults, Domain, DomainKind};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// An affine functional on connections over S³: φ(A) = base + ∫ tr(kernel∧A).
///
/// Affinity along segments of connections is structural in this form.
#[derive(Clone, Debug)]
pub struct AffineDual {
    pub base: f64,
    pub kernel: MatrixFormField,
}

fn check_s3(d: &Domain) -> Result<()> {
    if d.kind() != DomainKind::S3 {
        return Err(Error::DomainMismatch(format!("affine duals live on S³, got {}", d.kind().name())));
    }
    Ok(())
}

impl AffineDual {
    pub fn new(base: f64, kernel: MatrixFormField) -> Result<Self> {
        check_s3(kernel.domain())?;
        if kernel.degree() != 2 {
            return Err(Error::DomainMismatch(format!("dual kernel must be a 2-form, got degree {}", kernel.degree())));
        }
        if !base.is_finite() {
            return Err(Error::NonFinite("dual base"));
        }
        Ok(AffineDual { base, kernel })
    }

    pub fn zero(s3: Arc<Domain>, rank: usize) -> Self {
        AffineDual { base: 0.0, kernel: MatrixFormField::zeros(s3, 2, rank) }
    }

    pub fn constant(s3: Arc<Domain>, rank: usize, base: f64) -> Self {
        AffineDual { base, kernel: MatrixFormField::zeros(s3, 2, rank) }
    }

    pub fn domain(&self) -> &Arc<Domain> {
        self.kernel.domain()
    }

    pub fn rank(&self) -> usize {
        self.kernel.rank()
    }

    /// D_Aφ(a) = Re ∫_{S³} tr(kernel∧a), independent of A.
    pub fn derivative(&self, a: &MatrixFormField) -> Result<f64> {
        let d = self.domain();
        if a.domain() != d || a.degree() != 1 || a.rank() != self.rank() {
            return Err(Error::DomainMismatch("connection does not match the dual's grid".into()));
        }
        let v: Vec<f64> = (0..d.n_nodes()).map(|n| tr_wedge_top(3, 2, &self.kernel.at(n), &a.at(n)).re).collect();
        d.integrate_top(&v)
    }

    pub fn eval(&self, a: &MatrixFormField) -> Result<f64> {
        Ok(self.base + self.derivative(a)?)
    }

    pub fn add(&self, o: &AffineDual) -> Result<AffineDual> {
        Ok(AffineDual { base: self.base + o.base, kernel: self.kernel.add(&o.kernel)? })
    }

    pub fn sub(&self, o: &AffineDual) -> Result<AffineDual> {
        Ok(AffineDual { base: self.base - o.base, kernel: self.kernel.sub(&o.kernel)? })
    }

    pub fn scale(&self, s: f64) -> AffineDual {
        AffineDual { base: self.base * s, kernel: self.kernel.scale(s) }
    }

    /// (f·φ)(A) = φ(f·A): base' = base + ∫tr(kernel∧f⁻¹df), kernel' = f kernel f⁻¹.
    pub fn act(&self, f: &GroupSample) -> Result<AffineDual> {
        let d = self.domain().clone();
        if f.domain() != &d {
            return Err(Error::DomainMismatch("dual_act needs f on the dual's S³ grid".into()));
        }
        let left = f.left_mc();
        let shift = self.derivative(&left)?;
        let kernel = MatrixFormField::from_fn(d, 2, self.rank(), |n| {
            let u = &f.jet(n).u;
            let ui = u.adjoint();
            self.kernel.at(n).iter().map(|k| u.matmul(k).matmul(&ui)).collect()
        });
        Ok(AffineDual { base: self.base + shift, kernel })
    }
}

/// Free-function form of [`AffineDual::act`].
pub fn dual_act(f: &GroupSample, phi: &AffineDual) -> Result<AffineDual> {
    phi.act(f)
}

/// Distance of `x` from the nearest integer: the phase of `exp(2πi x)`
/// measured in turns.
pub fn phase_distance(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Phase of a unit complex number in turns, in `[0, ½]`.
pub fn phase_turns(z: C64) -> f64 {
    z.arg().abs() / (2.0 * PI)
}

// ---------------------------------------------------------------------------
// grids and probe connections

/// Grids and probe connections shared by the group-law and Lie-algebra
/// operations.
#[derive(Clone, Debug)]
pub struct ExtContext {
    pub rank: usize,
    pub s3: Arc<Domain>,
    /// T = S³×[0,1], whose S³ factor is `s3`.
    pub t: Arc<Domain>,
    /// Q = S³×D², used for C5 of J₀ words.
    pub q: Arc<Domain>,
    /// Eight seeded polynomial connections and A = 0.
    pub probes: Vec<MatrixFormField>,
    /// Maximal sup-distance of t = 1 boundaries for equivalent elements.
    pub boundary_tol: f64,
}

impl ExtContext {
    pub fn new(rank: usize, s3_res: [usize; 3], nt: usize, disk: [usize; 2], seed: u64) -> Result<Self> {
        let s3 = Arc::new(Domain::new(DomainKind::S3, &s3_res)?);
        let t = Arc::new(Domain::new(DomainKind::S3xI, &[s3_res[0], s3_res[1], s3_res[2], nt])?);
        let q = Arc::new(Domain::new(DomainKind::S3xD2, &[s3_res[0], s3_res[1], s3_res[2], disk[0], disk[1]])?);
        let mut probes = vec![MatrixFormField::zeros(s3.clone(), 1, rank)];
        for i in 0..8 {
            probes.push(PolyForm::random(rank, 4, 2, seed.wrapping_add(1000 + i), 0.5)?.sample(&s3));
        }
        Ok(ExtContext { rank, s3, t, q, probes, boundary_tol: 1e-6 })
    }

    pub fn with_defaults(rank: usize, seed: u64) -> Result<Self> {
        Self::new(rank, defaults::S3, defaults::NT, defaults::DISK, seed)
    }

    fn check_rank(&self, r: usize) -> Result<()> {
        if r != self.rank {
            return Err(Error::RankMismatch(self.rank, r));
        }
        Ok(())
    }

    /// The t = 1 slice of a path, sampled on the S³ grid.
    pub fn end_sample(&self, p: &PathK) -> Result<GroupSample> {
        self.check_rank(p.rank())?;
        GroupSample::new(self.s3.clone(), &p.end())
    }

    /// γ_T(f, g; ·) for two paths; zero when either is the identity word.
    pub fn gamma_dual(&self, f: &PathK, g: &PathK) -> Result<AffineDual> {
        if f.is_identity() || g.is_identity() {
            return Ok(AffineDual::zero(self.s3.clone(), self.rank));
        }
        cochains::gamma_dual(&self.t, &self.s3, f.field(), g.field())
    }
}

// ---------------------------------------------------------------------------
// the group Ω̂G

/// A representative (f, λ) of a class in Ω̂G, with λ = exp 2πi·dual.
#[derive(Clone, Debug)]
pub struct ExtElement {
    pub path: PathK,
    pub dual: AffineDual,
}

impl ExtElement {
    pub fn identity(ctx: &ExtContext) -> Self {
        ExtElement { path: PathK::identity(ctx.rank), dual: AffineDual::zero(ctx.s3.clone(), ctx.rank) }
    }

    pub fn new(ctx: &ExtContext, path: PathK, dual: AffineDual) -> Result<Self> {
        ctx.check_rank(path.rank())?;
        ctx.check_rank(dual.rank())?;
        if dual.domain() != &ctx.s3 {
            return Err(Error::DomainMismatch("dual does not live on the context's S³ grid".into()));
        }
        Ok(ExtElement { path, dual })
    }

    /// (f, 1).
    pub fn from_path(ctx: &ExtContext, path: PathK) -> Result<Self> {
        Self::new(ctx, path, AffineDual::zero(ctx.s3.clone(), ctx.rank))
    }

    /// [1, λ] in the abelian subgroup.
    pub fn abelian(ctx: &ExtContext, dual: AffineDual) -> Result<Self> {
        Self::new(ctx, PathK::identity(ctx.rank), dual)
    }
}

/// (f,λ)∗(g,μ) = (fg, λ + f·μ + γ_T(f,g)), written additively in the exponent.
pub fn multiply(ctx: &ExtContext, a: &ExtElement, b: &ExtElement) -> Result<ExtElement> {
    let path = a.path.mul(&b.path)?;
    let moved = if a.path.is_identity() { b.dual.clone() } else { b.dual.act(&ctx.end_sample(&a.path)?)? };
    let dual = a.dual.add(&moved)?.add(&ctx.gamma_dual(&a.path, &b.path)?)?;
    Ok(ExtElement { path, dual })
}

/// [f, λ]⁻¹ = [f⁻¹, −f⁻¹·λ].
pub fn inverse(ctx: &ExtContext, a: &ExtElement) -> Result<ExtElement> {
    let path = a.path.inverse();
    let dual = if path.is_identity() { a.dual.scale(-1.0) } else { a.dual.act(&ctx.end_sample(&path)?)?.scale(-1.0) };
    Ok(ExtElement { path, dual })
}

/// α_T(f, j) = β_T(f, j) + C5(j) for j ∈ J₀ with disk filling `witness`.
pub fn alpha(ctx: &ExtContext, f: &PathK, j: &PathK, witness: &GroupField) -> Result<f64> {
    if j.is_identity() {
        return Ok(0.0);
    }
    let id = GroupSample::new(ctx.s3.clone(), &GroupField::identity(ctx.rank))?;
    let gap = boundary_distance(&ctx.end_sample(j)?, &id);
    if gap > ctx.boundary_tol {
        return Err(Error::NotPathK(format!("α needs its second argument in J₀ (end defect {gap:.2e})")));
    }
    let b = if f.is_identity() { 0.0 } else { cochains::beta(&ctx.t, f.field(), j.field())? };
    Ok(b + c5(&ctx.q, j.field(), witness)?.raw)
}

/// α_T(f, f⁻¹g), the exponent of χ_T(f, g).
pub fn chi_exponent(ctx: &ExtContext, f: &PathK, g: &PathK) -> Result<f64> {
    let d = ctx.end_sample(f)?;
    let e = ctx.end_sample(g)?;
    let gap = boundary_distance(&d, &e);
    if gap > ctx.boundary_tol {
        return Err(Error::BoundaryMismatch(gap));
    }
    let (w, witness) = bridge(f, g)?;
    alpha(ctx, f, &w, &witness)
}

/// χ_T(f, g) = exp 2πi α_T(f, f⁻¹g).
pub fn chi(ctx: &ExtContext, f: &PathK, g: &PathK) -> Result<C64> {
    Ok(C64::from_polar(1.0, 2.0 * PI * chi_exponent(ctx, f, g)?))
}

/// The J₀ action (f, λ) ↦ (fj, λ + α_T(f, j)), which preserves the class.
pub fn j0_act(ctx: &ExtContext, a: &ExtElement, j: &PathK) -> Result<ExtElement> {
    let path = a.path.mul(j)?;
    let (w, witness) = bridge(&a.path, &path)?;
    let shift = alpha(ctx, &a.path, &w, &witness)?;
    Ok(ExtElement { path, dual: a.dual.add(&AffineDual::constant(ctx.s3.clone(), ctx.rank, shift))? })
}

fn boundary_distance(a: &GroupSample, b: &GroupSample) -> f64 {
    a.jets().iter().zip(b.jets()).map(|(x, y)| x.u.dist(&y.u)).fold(0.0, f64::max)
}

/// Outcome of an equivalence test (f,λ) ∼ (g,μ).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Equivalence {
    /// Sup-distance of the t = 1 boundaries on the S³ grid.
    pub boundary: f64,
    /// α_T(f, f⁻¹g) (0 when the boundaries differ).
    pub alpha: f64,
    /// max over probes of |exp 2πi(μ(A) − λ(A) − α) − 1| (∞ when the
    /// boundaries differ).
    pub phase: f64,
}

impl Equivalence {
    pub fn holds(&self, boundary_tol: f64, phase_tol: f64) -> bool {
        self.boundary <= boundary_tol && self.phase <= phase_tol
    }
}

/// Compares two representatives: equal boundaries and μ = λ·χ_T(f, g) on the
/// probe connections.
pub fn equivalent(ctx: &ExtContext, a: &ExtElement, b: &ExtElement) -> Result<Equivalence> {
    let boundary = boundary_distance(&ctx.end_sample(&a.path)?, &ctx.end_sample(&b.path)?);
    if boundary > ctx.boundary_tol {
        return Ok(Equivalence { boundary, alpha: 0.0, phase: f64::INFINITY });
    }
    let (w, witness) = bridge(&a.path, &b.path)?;
    let al = alpha(ctx, &a.path, &w, &witness)?;
    let diff = b.dual.sub(&a.dual)?;
    let mut phase: f64 = 0.0;
    for p in &ctx.probes {
        phase = phase.max(phase_distance(diff.eval(p)? - al));
    }
    Ok(Equivalence { boundary, alpha: al, phase })
}

// ---------------------------------------------------------------------------
// the Lie algebra

/// A based algebra-valued 0-form on S³ together with its differential.
#[derive(Clone, Debug)]
pub struct AlgField {
    pub val: MatrixFormField,
    pub d: MatrixFormField,
}

impl AlgField {
    /// Samples a polynomial on the S³ grid, with its analytic differential.
    pub fn from_poly(s3: &Arc<Domain>, p: &AlgebraPoly) -> Result<Self> {
        check_s3(s3)?;
        if !p.spec().based {
            return Err(Error::Invariant("Lie algebra elements must vanish at the basepoint".into()));
        }
        let (val, d) = p.sample(s3);
        Ok(AlgField { val, d })
    }

    pub fn zero(s3: Arc<Domain>, rank: usize) -> Self {
        AlgField { val: MatrixFormField::zeros(s3.clone(), 0, rank), d: MatrixFormField::zeros(s3, 1, rank) }
    }

    pub fn rank(&self) -> usize {
        self.val.rank()
    }

    pub fn domain(&self) -> &Arc<Domain> {
        self.val.domain()
    }

    pub fn add(&self, o: &AlgField) -> Result<AlgField> {
        Ok(AlgField { val: self.val.add(&o.val)?, d: self.d.add(&o.d)? })
    }

    pub fn sub(&self, o: &AlgField) -> Result<AlgField> {
        Ok(AlgField { val: self.val.sub(&o.val)?, d: self.d.sub(&o.d)? })
    }

    pub fn scale(&self, s: f64) -> AlgField {
        AlgField { val: self.val.scale(s), d: self.d.scale(s) }
    }

    /// Pointwise [ξ, η] with d[ξ,η] = [dξ,η] + [ξ,dη].
    pub fn bracket(&self, o: &AlgField) -> Result<AlgField> {
        if self.domain() != o.domain() || self.rank() != o.rank() {
            return Err(Error::DomainMismatch("bracket of fields on different grids".into()));
        }
        let d = self.domain().clone();
        let val = MatrixFormField::from_fn(d.clone(), 0, self.rank(), |n| {
            let (x, y) = (self.val.get(n, 0), o.val.get(n, 0));
            vec![x.matmul(&y) - y.matmul(&x)]
        });
        let dv = MatrixFormField::from_fn(d, 1, self.rank(), |n| {
            let (x, y) = (self.val.get(n, 0), o.val.get(n, 0));
            let dx = PForm::new(1, self.d.at(n));
            let dy = PForm::new(1, o.d.at(n));
            dx.mul_right(&y).sub(&dx.mul_left(&y)).add(&dy.mul_left(&x)).sub(&dy.mul_right(&x)).c
        });
        Ok(AlgField { val, d: dv })
    }

    /// g ξ g⁻¹ with d(gξg⁻¹) = [dg g⁻¹, gξg⁻¹] + g dξ g⁻¹.
    pub fn conj(&self, g: &GroupSample) -> Result<AlgField> {
        if g.domain() != self.domain() {
            return Err(Error::DomainMismatch("conjugation by a map on another grid".into()));
        }
        let d = self.domain().clone();
        let val = MatrixFormField::from_fn(d.clone(), 0, self.rank(), |n| {
            let u = g.jet(n).u;
            vec![u.matmul(&self.val.get(n, 0)).matmul(&u.adjoint())]
        });
        let dv = MatrixFormField::from_fn(d, 1, self.rank(), |n| {
            let j = g.jet(n);
            let c = val.get(n, 0);
            let v = PForm::one(&j.v[..3]);
            PForm::new(1, self.d.at(n)).conj(&j.u).add(&v.mul_right(&c)).sub(&v.mul_left(&c)).c
        });
        Ok(AlgField { val, d: dv })
    }

    /// The covariant derivative d_Aξ = dξ + Aξ − ξA.
    pub fn covariant(&self, a: &MatrixFormField) -> Result<MatrixFormField> {
        if a.domain() != self.domain() || a.degree() != 1 {
            return Err(Error::DomainMismatch("connection does not match the algebra field".into()));
        }
        Ok(MatrixFormField::from_fn(self.domain().clone(), 1, self.rank(), |n| {
            let x = self.val.get(n, 0);
            let aa = PForm::new(1, a.at(n));
            PForm::new(1, self.d.at(n)).add(&aa.mul_right(&x)).sub(&aa.mul_left(&x)).c
        }))
    }

    pub fn max_norm(&self) -> f64 {
        self.val.max_norm()
    }
}

/// An element (ξ, l) of S³(Lie G) ⊕ 𝒜₃*.
#[derive(Clone, Debug)]
pub struct ExtAlgebraElement {
    pub xi: AlgField,
    pub dual: AffineDual,
}

impl ExtAlgebraElement {
    pub fn new(xi: AlgField, dual: AffineDual) -> Result<Self> {
        if xi.domain() != dual.domain() || xi.rank() != dual.rank() {
            return Err(Error::DomainMismatch("algebra element slots on different grids".into()));
        }
        Ok(ExtAlgebraElement { xi, dual })
    }

    pub fn from_poly(ctx: &ExtContext, xi: &AlgebraPoly, dual: AffineDual) -> Result<Self> {
        ctx.check_rank(xi.rank())?;
        Self::new(AlgField::from_poly(&ctx.s3, xi)?, dual)
    }

    pub fn zero(ctx: &ExtContext) -> Self {
        ExtAlgebraElement { xi: AlgField::zero(ctx.s3.clone(), ctx.rank), dual: AffineDual::zero(ctx.s3.clone(), ctx.rank) }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        Ok(ExtAlgebraElement { xi: self.xi.add(&o.xi)?, dual: self.dual.add(&o.dual)? })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        Ok(ExtAlgebraElement { xi: self.xi.sub(&o.xi)?, dual: self.dual.sub(&o.dual)? })
    }

    pub fn scale(&self, s: f64) -> Self {
        ExtAlgebraElement { xi: self.xi.scale(s), dual: self.dual.scale(s) }
    }
}

/// The affine functional A ↦ D_A l(d_Aξ) = ∫tr(K∧dξ) + ∫tr([ξ,K]∧A).
pub fn dual_along(l: &AffineDual, xi: &AlgField) -> Result<AffineDual> {
    if l.domain() != xi.domain() {
        return Err(Error::DomainMismatch("dual and algebra field on different grids".into()));
    }
    let base = l.derivative(&xi.d)?;
    let kernel = MatrixFormField::from_fn(l.domain().clone(), 2, l.rank(), |n| {
        let x = xi.val.get(n, 0);
        let k = PForm::new(2, l.kernel.at(n));
        k.mul_left(&x).sub(&k.mul_right(&x)).c
    });
    AffineDual::new(base, kernel)
}

/// A ↦ −iω(ξ, η; A) = i·κ/(24π³)∫tr[(dξdη − dηdξ)A].
pub fn omega_dual(xi: &AlgField, eta: &AlgField) -> Result<AffineDual> {
    let s3 = xi.domain().clone();
    let s = I * coeff();
    let kernel = MatrixFormField::from_fn(s3, 2, xi.rank(), |n| {
        let dx = PForm::new(1, xi.d.at(n));
        let dy = PForm::new(1, eta.d.at(n));
        dx.w(&dy, 3).sub(&dy.w(&dx, 3)).c.iter().map(|m| project_algebra_mat(&m.scale(s))).collect()
    });
    AffineDual::new(0.0, kernel)
}

/// [(ξ,l),(η,m)] = ([ξ,η], D m(d_Aξ) − D l(d_Aη) − iω(ξ,η;A)).
pub fn bracket_ext(x: &ExtAlgebraElement, y: &ExtAlgebraElement) -> Result<ExtAlgebraElement> {
    let xi = x.xi.bracket(&y.xi)?;
    let dual = dual_along(&y.dual, &x.xi)?.sub(&dual_along(&x.dual, &y.xi)?)?.add(&omega_dual(&x.xi, &y.xi)?)?;
    Ok(ExtAlgebraElement { xi, dual })
}

/// Relative distance between two algebra elements: first slot in sup norm,
/// second slot as max over the probes of |Δ(A)| / max |y(A)|. `dxi` compares
/// the differentials, which for finite-difference oracles carry the grid's
/// discretization error and are reported separately.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AlgDistance {
    pub xi: f64,
    pub dxi: f64,
    pub dual: f64,
}

impl AlgDistance {
    pub fn max(&self) -> f64 {
        self.xi.max(self.dual)
    }
}

pub fn alg_distance(ctx: &ExtContext, x: &ExtAlgebraElement, reference: &ExtAlgebraElement) -> Result<AlgDistance> {
    let dx = x.xi.sub(&reference.xi)?;
    let xi = rel(dx.val.max_norm(), reference.xi.val.max_norm());
    let dxi = rel(dx.d.max_norm(), reference.xi.d.max_norm());
    let diff = x.dual.sub(&reference.dual)?;
    let (mut num, mut den): (f64, f64) = (0.0, 0.0);
    for p in &ctx.probes {
        num = num.max(diff.eval(p)?.abs());
        den = den.max(reference.dual.eval(p)?.abs());
    }
    Ok(AlgDistance { xi, dxi, dual: rel(num, den) })
}

fn rel(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Jacobi identity on probes: max_A |Σ_cyc [[x,y],z](A)| relative to the
/// largest single cyclic term, and the sup norm of the first-slot sum.
pub fn jacobi_residual(ctx: &ExtContext, x: &ExtAlgebraElement, y: &ExtAlgebraElement, z: &ExtAlgebraElement) -> Result<AlgDistance> {
    let terms = [
        bracket_ext(&bracket_ext(x, y)?, z)?,
        bracket_ext(&bracket_ext(y, z)?, x)?,
        bracket_ext(&bracket_ext(z, x)?, y)?,
    ];
    let sum = terms[0].add(&terms[1])?.add(&terms[2])?;
    let xs = terms.iter().map(|t| t.xi.max_norm()).fold(0.0, f64::max);
    let ds = terms.iter().map(|t| t.xi.d.max_norm()).fold(0.0, f64::max);
    let (mut num, mut den): (f64, f64) = (0.0, 0.0);
    for p in &ctx.probes {
        num = num.max(sum.dual.eval(p)?.abs());
        for t in &terms {
            den = den.max(t.dual.eval(p)?.abs());
        }
    }
    Ok(AlgDistance { xi: rel(sum.xi.max_norm(), xs), dxi: rel(sum.xi.d.max_norm(), ds), dual: rel(num, den) })
}

/// Group-commutator check of the Lie algebra cocycle.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CommutatorCheck {
    /// Richardson-extrapolated ∂s∂tψ(0,0; A).
    pub mixed: f64,
    /// The two central estimates at steps h and h/2.
    pub raw: [f64; 2],
    /// −iω(ξ, η; A).
    pub expected: f64,
    pub relative: f64,
}

fn exp_path(xi: &AlgebraPoly, s: f64) -> Result<PathK> {
    Ok(PathK::generator(&Generator::new(0, Arc::new(xi.scaled(s)))?))
}

/// ψ(s,t;A) = γ(a,b) + γ(ab,a⁻¹) + γ(aba⁻¹,b⁻¹) for a = e^{sξ}, b = e^{tη}:
/// the exponent of the group commutator of (a,1) and (b,1).
pub fn commutator_psi(ctx: &ExtContext, xi: &AlgebraPoly, eta: &AlgebraPoly, s: f64, t: f64, a: &MatrixFormField) -> Result<f64> {
    let pa = exp_path(xi, s)?;
    let pb = exp_path(eta, t)?;
    let ab = pa.mul(&pb)?;
    let aba = ab.mul(&pa.inverse())?;
    let g = |f: &PathK, h: &PathK| cochains::gamma(&ctx.t, f.field(), h.field(), a);
    Ok(g(&pa, &pb)? + g(&ab, &pa.inverse())? + g(&aba, &pb.inverse())?)
}

/// Mixed central difference of ψ at (0,0) with Richardson over steps
/// {h, h/2}, compared with −iω(ξ, η; A).
pub fn commutator_cocycle_check(ctx: &ExtContext, xi: &AlgebraPoly, eta: &AlgebraPoly, a: &MatrixFormField, h: f64) -> Result<CommutatorCheck> {
    let est = |h: f64| -> Result<f64> {
        let p = |s, t| commutator_psi(ctx, xi, eta, s, t, a);
        Ok((p(h, h)? - p(h, -h)? - p(-h, h)? + p(-h, -h)?) / (4.0 * h * h))
    };
    let d1 = est(h)?;
    let d2 = est(h / 2.0)?;
    let mixed = (4.0 * d2 - d1) / 3.0;
    let expected = omega_dual(&AlgField::from_poly(&ctx.s3, xi)?, &AlgField::from_poly(&ctx.s3, eta)?)?.eval(a)?;
    let relative = rel((mixed - expected).abs(), expected.abs());
    Ok(CommutatorCheck { mixed, raw: [d1, d2], expected, relative })
}

// ---------------------------------------------------------------------------
// adjoint action

/// Candidate constants for the γ-derivative terms of O(ξ,l;g,ν): the κ/(24π³)
/// normalization shared with γ, or the same expression with π² in place of π³.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AdNormalization {
    Pi3,
    Pi2,
}

impl AdNormalization {
    fn factor(self) -> f64 {
        match self {
            AdNormalization::Pi3 => 1.0,
            AdNormalization::Pi2 => PI,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AdNormalization::Pi3 => "pi^3",
            AdNormalization::Pi2 => "pi^2",
        }
    }
}

/// p'(0) for a polynomial p of degree ≤ 4, exact: [8(p(h)−p(−h)) − (p(2h)−p(−2h))]/12h.
fn poly_derivative(p: impl Fn(f64) -> C64) -> C64 {
    let h = 0.5;
    ((p(h) - p(-h)) * 8.0 - (p(2.0 * h) - p(-2.0 * h))) / (12.0 * h)
}

/// The s-derivatives at s = 0 of γ_T(g, e^{sξ}) + γ_T(g e^{sξ}, g⁻¹) as an
/// affine functional, for g ∈ K⁰ and the path e^{sS(t)ξ}.
fn gamma_derivatives(ctx: &ExtContext, g: &PathK, xi: &AlgField, end: &GroupSample) -> Result<AffineDual> {
    let nt = ctx.t.axis(3).n;
    let n = ctx.rank;
    let [bulk] = integrate(&ctx.t, &[g.field()], |c, j| {
        let s3n = c.node / nt;
        let tt = c.coords[3];
        let (s, ds) = (smoothstep(tt), smoothstep_deriv(tt));
        let x = xi.val.get(s3n, 0).scale_re(s);
        let mut w: Vec<CMat> = xi.d.at(s3n).iter().map(|m| m.scale_re(s)).collect();
        w.push(xi.val.get(s3n, 0).scale_re(ds));
        let w = PForm::new(1, w);
        let ag = PForm::one(&j[0].left(4)[..4]);
        let b = w.add(&ag.mul_right(&x)).sub(&ag.mul_left(&x));
        let minus = ag.scale(-1.0);
        let t1 = poly_derivative(|h| c21_form(4, &ag, &w.scale(h))[0]);
        let t2 = poly_derivative(|h| c21_form(4, &ag.add(&b.scale(h)), &minus)[0]);
        [t1 + t2]
    })?;
    let base = real_of(I * bulk * coeff())?;
    let s = I * (0.5 * coeff());
    let kernel = MatrixFormField::from_fn(ctx.s3.clone(), 2, n, |node| {
        let j = end.jet(node);
        let ag = PForm::one(&j.left(3)[..3]);
        let dx = PForm::new(1, xi.d.at(node));
        let x = xi.val.get(node, 0);
        let b = dx.add(&ag.mul_right(&x)).sub(&ag.mul_left(&x));
        let k = c20_kernel(3, &ag, &dx).add(&c20_kernel(3, &b, &ag.scale(-1.0))).conj(&j.u);
        k.c.iter().map(|m| project_algebra_mat(&m.scale(s))).collect()
    });
    AffineDual::new(base, kernel)
}

fn real_of(z: C64) -> Result<f64> {
    if z.im.abs() > 1e-8 * z.re.abs().max(1.0) {
        return Err(Error::ImaginaryResidual(z.im));
    }
    Ok(z.re)
}

/// Ad_{(g,ν)}(ξ, l) = (gξg⁻¹, O(ξ,l;g,ν)) with
/// O = g·l − D ν(d_A(gξg⁻¹)) + ∂_s[γ_T(g,e^{sξ}) + γ_T(ge^{sξ},g⁻¹)]|₀.
pub fn adjoint_ad(ctx: &ExtContext, g: &PathK, nu: &AffineDual, x: &ExtAlgebraElement) -> Result<ExtAlgebraElement> {
    adjoint_ad_with(ctx, g, nu, x, AdNormalization::Pi3)
}

pub fn adjoint_ad_with(ctx: &ExtContext, g: &PathK, nu: &AffineDual, x: &ExtAlgebraElement, norm: AdNormalization) -> Result<ExtAlgebraElement> {
    ctx.check_rank(g.rank())?;
    if g.degree() != 0 {
        return Err(Error::NotPathK(format!("Ad needs a path in K⁰, got degree {}", g.degree())));
    }
    if g.is_identity() {
        return Ok(ExtAlgebraElement { xi: x.xi.clone(), dual: x.dual.add(nu)?.sub(nu)? });
    }
    let end = ctx.end_sample(g)?;
    let xi = x.xi.conj(&end)?;
    let dual = x
        .dual
        .act(&end)?
        .sub(&dual_along(nu, &xi)?)?
        .add(&gamma_derivatives(ctx, g, &x.xi, &end)?.scale(norm.factor()))?;
    Ok(ExtAlgebraElement { xi, dual })
}

/// Group-law oracle for Ad: the s-derivative at 0 of
/// (g,ν)∗(e^{sξ}, s·l)∗(g,ν)⁻¹ by central differences with Richardson over
/// steps {h, h/2}.
pub fn adjoint_fd(ctx: &ExtContext, g: &PathK, nu: &AffineDual, xi: &AlgebraPoly, l: &AffineDual, h: f64) -> Result<ExtAlgebraElement> {
    let a = ExtElement::new(ctx, g.clone(), nu.clone())?;
    let ainv = inverse(ctx, &a)?;
    let at = |s: f64| -> Result<(GroupSample, ExtElement)> {
        let xs = ExtElement::new(ctx, exp_path(xi, s)?, l.scale(s))?;
        let e = multiply(ctx, &multiply(ctx, &a, &xs)?, &ainv)?;
        Ok((ctx.end_sample(&e.path)?, e))
    };
    let central = |h: f64| -> Result<ExtAlgebraElement> {
        let (gp, ep) = at(h)?;
        let (gm, em) = at(-h)?;
        let val = gp.values().sub(&gm.values())?.scale(0.5 / h);
        let d = gp.right_mc().sub(&gm.right_mc())?.scale(0.5 / h);
        let dual = ep.dual.sub(&em.dual)?.scale(0.5 / h);
        Ok(ExtAlgebraElement { xi: AlgField { val, d }, dual })
    };
    let d1 = central(h)?;
    let d2 = central(h / 2.0)?;
    Ok(d2.scale(4.0 / 3.0).sub(&d1.scale(1.0 / 3.0))?)
}

/// Outcome of the Ad normalization audit.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AdAudit {
    pub selected: AdNormalization,
    pub distance_pi3: AlgDistance,
    pub distance_pi2: AlgDistance,
}

/// Evaluates both candidate constants against the group-law oracle and
/// selects the one that matches.
pub fn ad_audit(ctx: &ExtContext, g: &PathK, nu: &AffineDual, xi: &AlgebraPoly, l: &AffineDual, h: f64) -> Result<AdAudit> {
    let oracle = adjoint_fd(ctx, g, nu, xi, l, h)?;
    let x = ExtAlgebraElement::from_poly(ctx, xi, l.clone())?;
    let d3 = alg_distance(ctx, &adjoint_ad_with(ctx, g, nu, &x, AdNormalization::Pi3)?, &oracle)?;
    let d2 = alg_distance(ctx, &adjoint_ad_with(ctx, g, nu, &x, AdNormalization::Pi2)?, &oracle)?;
    let selected = if d3.max() <= d2.max() { AdNormalization::Pi3 } else { AdNormalization::Pi2 };
    Ok(AdAudit { selected, distance_pi3: d3, distance_pi2: d2 })
}

/// (d/dt)|₀ Ad_{(e^{tη}, t·m)}(x) by central differences with Richardson.
pub fn ad_from_adjoint(ctx: &ExtContext, eta: &AlgebraPoly, m: &AffineDual, x: &ExtAlgebraElement, h: f64) -> Result<ExtAlgebraElement> {
    let at = |t: f64| adjoint_ad(ctx, &exp_path(eta, t)?, &m.scale(t), x);
    let central = |h: f64| -> Result<ExtAlgebraElement> { Ok(at(h)?.sub(&at(-h)?)?.scale(0.5 / h)) };
    let d1 = central(h)?;
    let d2 = central(h / 2.0)?;
    Ok(d2.scale(4.0 / 3.0).sub(&d1.scale(1.0 / 3.0))?)
}
