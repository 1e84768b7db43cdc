use std::sync::Arc;

use crate::algebra::CMat;
use crate::error::{Error, Result};
use crate::geometry::{Domain, BASEPOINT};

use super::sources::{ExpPoly, Profile, Rotation, RotationMode};
use super::{embed, instanton, mapping_degree, AlgebraPoly, GroupField};

/// A generator target g = g_k·exp(ξ) on S³ together with its canonical path
/// v(x,t) = g_k(x)·exp(S(t)ξ(x)).
#[derive(Debug)]
pub struct Generator {
    pub k: i32,
    pub xi: Arc<AlgebraPoly>,
    rank: usize,
    path: GroupField,
    target: GroupField,
}

impl Generator {
    pub fn new(k: i32, xi: Arc<AlgebraPoly>) -> Result<Arc<Self>> {
        let rank = xi.rank();
        if k != 0 && rank < 2 {
            return Err(Error::InvalidRank(rank));
        }
        let gk = embed(&instanton(k), rank);
        let path = gk.mul(&GroupField::leaf(ExpPoly { xi: xi.clone(), profile: Profile::step(1.0) }))?;
        let target = gk.mul(&GroupField::leaf(ExpPoly { xi: xi.clone(), profile: Profile::constant(1.0) }))?;
        Ok(Arc::new(Generator { k, xi, rank, path, target }))
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn path(&self) -> &GroupField {
        &self.path
    }

    /// The S³ map g_k·exp(ξ).
    pub fn target(&self) -> &GroupField {
        &self.target
    }
}

/// A loop in J₀ (u(·,0) = u(·,1) = 1) with a disk filling.
///
/// `witness` is a map on S³×D² in rank max(n,3) whose r = 1 restriction is
/// the (embedded) loop. `seam_trivial` records that the witness is the
/// identity at the disk center, which makes conjugation by any path a valid
/// filling again.
#[derive(Debug)]
pub struct J0Loop {
    pub field: GroupField,
    pub witness: GroupField,
    pub seam_trivial: bool,
    pub label: String,
}

/// The exp-loop u(x,τ) = exp(ρ(τ)ξ(x)) with ρ a bump peaking at `peak`,
/// filled by exp(r·ρ(τ)ξ(x)).
pub fn exp_loop(xi: Arc<AlgebraPoly>, amp: f64, peak: f64) -> Result<Arc<J0Loop>> {
    let n = xi.rank();
    let field = GroupField::leaf(ExpPoly { xi: xi.clone(), profile: Profile::bump(amp, peak, false)? });
    let witness = GroupField::leaf(ExpPoly { xi: xi.clone(), profile: Profile::bump(amp, peak, true)? });
    Ok(Arc::new(J0Loop {
        field,
        witness: embed(&witness, n.max(3)),
        seam_trivial: true,
        label: format!("exp-loop[seed {}, amp {amp}]", xi.spec().seed),
    }))
}

/// The rotation-commutator loop j(x,τ) = h(S(τ)) f(x) h(S(τ))⁻¹ f(x)⁻¹ for
/// a rank-2 map f, filled in SU(3) by a(r,S(τ)) f̃ a(r,S(τ))⁻¹ f̃⁻¹. For
/// odd-degree f this loop lies in the non-trivial class of π₄(SU(2)).
pub fn rotation_commutator(f: &GroupField, rank: usize) -> Result<Arc<J0Loop>> {
    if f.rank() != 2 {
        return Err(Error::InvalidRank(f.rank()));
    }
    let su2 = GroupField::leaf(Rotation { f: f.clone(), mode: RotationMode::Su2, reparam: true, commutator: true });
    let bulk = GroupField::leaf(Rotation { f: f.clone(), mode: RotationMode::Bulk, reparam: true, commutator: true });
    Ok(Arc::new(J0Loop {
        field: embed(&su2, rank),
        witness: embed(&bulk, rank.max(3)),
        seam_trivial: false,
        label: format!("rot-comm[{}]", f.label()),
    }))
}

#[derive(Clone, Debug)]
pub enum Letter {
    Gen { gen: Arc<Generator>, inv: bool },
    Loop { lp: Arc<J0Loop>, inv: bool },
}

impl Letter {
    fn key(&self) -> (usize, bool) {
        match self {
            Letter::Gen { gen, inv } => (Arc::as_ptr(gen) as usize, *inv),
            Letter::Loop { lp, inv } => (Arc::as_ptr(lp) as usize, *inv),
        }
    }

    fn inverse(&self) -> Letter {
        match self {
            Letter::Gen { gen, inv } => Letter::Gen { gen: gen.clone(), inv: !inv },
            Letter::Loop { lp, inv } => Letter::Loop { lp: lp.clone(), inv: !inv },
        }
    }

    fn cancels(&self, other: &Letter) -> bool {
        let (a, ia) = self.key();
        let (b, ib) = other.key();
        a == b && ia != ib && matches!((self, other), (Letter::Gen { .. }, Letter::Gen { .. }) | (Letter::Loop { .. }, Letter::Loop { .. }))
    }

    fn field(&self) -> GroupField {
        match self {
            Letter::Gen { gen, inv } => {
                if *inv {
                    gen.path.inverse()
                } else {
                    gen.path.clone()
                }
            }
            Letter::Loop { lp, inv } => {
                if *inv {
                    lp.field.inverse()
                } else {
                    lp.field.clone()
                }
            }
        }
    }

    fn degree(&self) -> i32 {
        match self {
            Letter::Gen { gen, inv } => {
                if *inv {
                    -gen.k
                } else {
                    gen.k
                }
            }
            Letter::Loop { .. } => 0,
        }
    }
}

/// An element of K: a path u on S³×[0,1] with u(·,0) = g_k, flat ends and
/// u(p₀,·) = 1, represented as a reduced word in generator paths and J₀
/// loops. The pointwise product of the letters is the path.
#[derive(Clone, Debug)]
pub struct PathK {
    rank: usize,
    letters: Vec<Letter>,
    field: GroupField,
}

fn reduce(letters: Vec<Letter>) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    for l in letters {
        if out.last().is_some_and(|p| p.cancels(&l)) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

fn word_field(rank: usize, letters: &[Letter]) -> GroupField {
    let mut it = letters.iter();
    match it.next() {
        None => GroupField::identity(rank),
        Some(first) => it.fold(first.field(), |acc, l| acc.mul(&l.field()).expect("ranks checked")),
    }
}

impl PathK {
    pub fn identity(rank: usize) -> Self {
        PathK { rank, letters: vec![], field: GroupField::identity(rank) }
    }

    pub fn from_letters(rank: usize, letters: Vec<Letter>) -> Result<Self> {
        for l in &letters {
            let r = match l {
                Letter::Gen { gen, .. } => gen.rank(),
                Letter::Loop { lp, .. } => lp.field.rank(),
            };
            if r != rank {
                return Err(Error::RankMismatch(rank, r));
            }
        }
        let letters = reduce(letters);
        let field = word_field(rank, &letters);
        Ok(PathK { rank, letters, field })
    }

    pub fn generator(gen: &Arc<Generator>) -> Self {
        Self::from_letters(gen.rank(), vec![Letter::Gen { gen: gen.clone(), inv: false }]).expect("single letter")
    }

    pub fn of_loop(lp: &Arc<J0Loop>) -> Self {
        Self::from_letters(lp.field.rank(), vec![Letter::Loop { lp: lp.clone(), inv: false }]).expect("single letter")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn field(&self) -> &GroupField {
        &self.field
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// k with u(·,0) = g_k.
    pub fn degree(&self) -> i32 {
        self.letters.iter().map(Letter::degree).sum()
    }

    pub fn mul(&self, other: &PathK) -> Result<PathK> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch(self.rank, other.rank));
        }
        let mut l = self.letters.clone();
        l.extend(other.letters.iter().cloned());
        Self::from_letters(self.rank, l)
    }

    pub fn inverse(&self) -> PathK {
        let l = self.letters.iter().rev().map(Letter::inverse).collect();
        Self::from_letters(self.rank, l).expect("same rank")
    }

    /// Whether the word consists of J₀ loops only (so u(·,1) = 1).
    pub fn in_j0(&self) -> bool {
        self.letters.iter().all(|l| matches!(l, Letter::Loop { .. }))
    }

    /// The t = 1 slice u(·,1).
    pub fn end(&self) -> GroupField {
        self.field.slice(1.0)
    }

    /// Checks the defining constraints of K on the S³ nodes of `s3`:
    /// u(·,0) = g_k, flat ends and u(p₀,·) = 1. Returns the three defects.
    pub fn invariants(&self, s3: &Domain) -> Result<[f64; 3]> {
        let gk = embed(&instanton(self.degree()), self.rank);
        let d0 = self.field.slice(0.0).sup_distance(&gk, s3, &crate::geometry::Fiber::point(0.0));
        let h = 1e-4;
        let mut flat: f64 = 0.0;
        for x in s3.s3_points().iter().step_by(37) {
            for (a, b) in [(0.0, h), (1.0, 1.0 - h)] {
                let ua = self.field.eval(x, 1.0, a);
                let ub = self.field.eval(x, 1.0, b);
                flat = flat.max(ua.dist(&ub) / h);
            }
        }
        let id = CMat::identity(self.rank);
        let mut base: f64 = 0.0;
        for t in [0.0, 0.3, 0.6, 1.0] {
            base = base.max(self.field.eval(&BASEPOINT, 1.0, t).dist(&id));
        }
        if !(d0.is_finite() && flat.is_finite() && base.is_finite()) {
            return Err(Error::NonFinite("path invariants"));
        }
        Ok([d0, flat, base])
    }

    /// Degree of the time slices u(·,t) at the given times.
    pub fn slice_degrees(&self, s3: &Domain, times: &[f64]) -> Result<Vec<f64>> {
        times.iter().map(|&t| mapping_degree(&self.field.slice(t), s3)).collect()
    }
}

/// The canonical path to a generator target g = g_k·exp(ξ).
pub fn path_from_target(gen: &Arc<Generator>) -> PathK {
    PathK::generator(gen)
}

/// For f, g ∈ K with equal ends, writes f⁻¹g as a product of conjugated J₀
/// loops Π C⁻¹LC (C the suffix of the word after L) and returns it with the
/// matching disk filling Π C⁻¹𝐋C. Fails when the generator letters of f⁻¹g
/// do not cancel, or when a loop without a trivial seam would need a
/// non-empty conjugator.
pub fn bridge(f: &PathK, g: &PathK) -> Result<(PathK, GroupField)> {
    let w = f.inverse().mul(g)?;
    let gens: Vec<Letter> = w.letters.iter().filter(|l| matches!(l, Letter::Gen { .. })).cloned().collect();
    if !reduce(gens).is_empty() {
        return Err(Error::NoBridge("generator parts of f and g differ".into()));
    }
    let wrank = w.rank.max(3);
    let mut witness: Option<GroupField> = None;
    for (i, l) in w.letters.iter().enumerate() {
        let Letter::Loop { lp, inv } = l else { continue };
        // the generator letters multiply to 1, so the word is the product of
        // each loop conjugated by the generator letters to its right
        let suffix: Vec<Letter> = reduce(w.letters[i + 1..].iter().filter(|l| matches!(l, Letter::Gen { .. })).cloned().collect());
        let mut wl = if *inv { lp.witness.inverse() } else { lp.witness.clone() };
        if !suffix.is_empty() {
            if !lp.seam_trivial {
                return Err(Error::NoBridge(format!("loop {} needs a conjugator but its filling is not trivial at the center", lp.label)));
            }
            let c = embed(&word_field(w.rank, &suffix).unit_radius(), wrank);
            wl = wl.conjugate_by(&c)?;
        }
        witness = Some(match witness {
            None => wl,
            Some(acc) => acc.mul(&wl)?,
        });
    }
    let witness = witness.unwrap_or_else(|| GroupField::identity(wrank));
    Ok((w, witness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{defaults, DomainKind, Fiber};

    fn s3() -> Domain {
        Domain::new(DomainKind::S3, &defaults::S3).unwrap()
    }

    fn gen(k: i32, seed: u64, rank: usize) -> Arc<Generator> {
        Generator::new(k, Arc::new(AlgebraPoly::random(rank, 4, 3, seed, 0.8, true).unwrap())).unwrap()
    }

    #[test]
    fn generator_path_ends() {
        let d = s3();
        let g = gen(1, 3, 2);
        let p = path_from_target(&g);
        let [d0, flat, base] = p.invariants(&d).unwrap();
        assert!(d0 < 1e-12 && flat < 1e-4 && base < 1e-8, "{d0} {flat} {base}");
        let end = p.end().sup_distance(g.target(), &d, &Fiber::point(0.0));
        assert!(end < 1e-12);
    }

    #[test]
    fn slice_degree_constant() {
        let d = s3();
        let p = path_from_target(&gen(-1, 4, 3)).mul(&path_from_target(&gen(2, 5, 3))).unwrap();
        assert_eq!(p.degree(), 1);
        for deg in p.slice_degrees(&d, &[0.0, 0.4, 1.0]).unwrap() {
            assert!((deg - 1.0).abs() < 0.03, "{deg}");
        }
    }

    #[test]
    fn words_reduce() {
        let a = path_from_target(&gen(1, 1, 2));
        let id = a.mul(&a.inverse()).unwrap();
        assert!(id.is_identity());
        let lp = exp_loop(Arc::new(AlgebraPoly::random(2, 4, 2, 9, 0.5, true).unwrap()), 1.0, 0.5).unwrap();
        let j = PathK::of_loop(&lp);
        assert!(j.in_j0() && !a.in_j0());
        let aj = a.mul(&j).unwrap();
        let (w, _) = bridge(&a, &aj).unwrap();
        assert_eq!(w.letters().len(), 1);
    }

    #[test]
    fn bridge_witness_restricts_to_loop() {
        let d = Domain::new(DomainKind::S3, &[8, 8, 16]).unwrap();
        let a = path_from_target(&gen(1, 1, 3));
        let b = path_from_target(&gen(0, 2, 3));
        let lp = exp_loop(Arc::new(AlgebraPoly::random(3, 4, 2, 9, 0.5, true).unwrap()), 1.0, 0.4).unwrap();
        let f = a.mul(&b).unwrap();
        let g = a.mul(&PathK::of_loop(&lp)).unwrap().mul(&b).unwrap();
        let (w, wit) = bridge(&f, &g).unwrap();
        let fiber = Fiber { r: vec![1.0], tau: vec![0.0, 0.25, 0.6, 0.9] };
        assert!(wit.sup_distance(w.field(), &d, &fiber) < 1e-12);
        // f⁻¹g as a pointwise product agrees with the reduced word
        assert!(f.field().inverse().mul(g.field()).unwrap().sup_distance(w.field(), &d, &fiber) < 1e-12);
        let center = Fiber { r: vec![0.0], tau: vec![0.1, 0.7] };
        assert!(wit.sup_distance(&GroupField::identity(3), &d, &center) < 1e-12);
    }

    #[test]
    fn bridge_with_several_loops() {
        let d = Domain::new(DomainKind::S3, &[8, 8, 16]).unwrap();
        let a = path_from_target(&gen(1, 1, 3));
        let l1 = exp_loop(Arc::new(AlgebraPoly::random(3, 4, 2, 9, 0.5, true).unwrap()), 1.0, 0.4).unwrap();
        let l2 = exp_loop(Arc::new(AlgebraPoly::random(3, 4, 2, 10, 0.5, true).unwrap()), 1.0, 0.4).unwrap();
        let (j1, j2) = (PathK::of_loop(&l1), PathK::of_loop(&l2));
        let f = a.mul(&j1).unwrap();
        let g = a.mul(&j2).unwrap().mul(&j1).unwrap().mul(&a.inverse()).unwrap().mul(&j2).unwrap().mul(&a).unwrap();
        let (w, wit) = bridge(&f, &g).unwrap();
        let fiber = Fiber { r: vec![1.0], tau: vec![0.0, 0.25, 0.6, 0.9] };
        assert!(wit.sup_distance(w.field(), &d, &fiber) < 1e-12);
    }

    #[test]
    fn rotation_commutator_is_based_loop() {
        let d = Domain::new(DomainKind::S3, &[8, 8, 16]).unwrap();
        let lp = rotation_commutator(&instanton(1), 2).unwrap();
        let id2 = GroupField::identity(2);
        for t in [0.0, 1.0] {
            assert!(lp.field.sup_distance(&id2, &d, &Fiber::point(t)) < 1e-12);
        }
        let fiber = Fiber { r: vec![1.0], tau: vec![0.2, 0.5, 0.8] };
        assert!(lp.witness.sup_distance(&embed(&lp.field, 3), &d, &fiber) < 1e-12);
        let f = path_from_target(&gen(1, 2, 2));
        let g = f.mul(&PathK::of_loop(&lp)).unwrap();
        assert!(bridge(&f, &g).is_ok());
        assert!(matches!(bridge(&g, &f.mul(&f).unwrap()), Err(Error::NoBridge(_))));
    }
}
