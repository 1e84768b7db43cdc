//! Dense complex matrices for SU(n) and su(n), n ≤ 4.
//!
//! [`CMat`] is a small `Copy` matrix with inline storage so that the node
//! loops over 10⁵–10⁷ grid points never allocate. Entries are stored
//! row-major with stride `n`. The checked wrappers [`AlgebraElement`] and
//! [`GroupElement`] carry the su(n) / SU(n) invariants.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest supported group rank.
pub const MAX_RANK: usize = 4;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Tolerances of the su(n) / SU(n) invariants.
pub const ALGEBRA_TOL: f64 = 1e-12;
pub const GROUP_TOL: f64 = 1e-10;

#[derive(Clone, Copy, PartialEq)]
pub struct CMat {
    n: usize,
    a: [C64; 16],
}

impl std::fmt::Debug for CMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMat({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| {
                    let z = self.get(i, j);
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[inline(always)]
fn mul_fixed<const N: usize>(a: &[C64; 16], b: &[C64; 16], out: &mut [C64; 16]) {
    for i in 0..N {
        for j in 0..N {
            let mut s = ZERO;
            for k in 0..N {
                s += a[i * N + k] * b[k * N + j];
            }
            out[i * N + j] = s;
        }
    }
}

#[inline(always)]
fn tr_mul_fixed<const N: usize>(a: &[C64; 16], b: &[C64; 16]) -> C64 {
    let mut s = ZERO;
    for i in 0..N {
        for k in 0..N {
            s += a[i * N + k] * b[k * N + i];
        }
    }
    s
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        assert!((1..=MAX_RANK).contains(&n), "matrix size {n} out of range");
        CMat { n, a: [ZERO; 16] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = ONE;
        }
        m
    }

    pub fn scalar(n: usize, z: C64) -> Self {
        Self::identity(n).scale(z)
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i * n + j] = f(i, j);
            }
        }
        m
    }

    /// Builds an `n×n` matrix from `n²` row-major entries.
    pub fn from_slice(n: usize, s: &[C64]) -> Self {
        let mut m = Self::zeros(n);
        m.a[..n * n].copy_from_slice(&s[..n * n]);
        m
    }

    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| rows[i][j])
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.a[i * self.n + j] = z;
    }

    /// The `n²` row-major entries.
    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.a[..self.n * self.n]
    }

    #[inline]
    pub fn write_to(&self, out: &mut [C64]) {
        out[..self.n * self.n].copy_from_slice(self.as_slice());
    }

    #[inline]
    pub fn matmul(&self, b: &CMat) -> CMat {
        debug_assert_eq!(self.n, b.n);
        let mut out = CMat { n: self.n, a: [ZERO; 16] };
        match self.n {
            1 => out.a[0] = self.a[0] * b.a[0],
            2 => mul_fixed::<2>(&self.a, &b.a, &mut out.a),
            3 => mul_fixed::<3>(&self.a, &b.a, &mut out.a),
            _ => mul_fixed::<4>(&self.a, &b.a, &mut out.a),
        }
        out
    }

    /// `tr(self · b)` without forming the product.
    #[inline]
    pub fn trace_mul(&self, b: &CMat) -> C64 {
        debug_assert_eq!(self.n, b.n);
        match self.n {
            1 => self.a[0] * b.a[0],
            2 => tr_mul_fixed::<2>(&self.a, &b.a),
            3 => tr_mul_fixed::<3>(&self.a, &b.a),
            _ => tr_mul_fixed::<4>(&self.a, &b.a),
        }
    }

    #[inline]
    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.a[i * self.n + i]).sum()
    }

    #[inline]
    pub fn scale(&self, z: C64) -> CMat {
        let mut out = *self;
        for v in out.a[..self.n * self.n].iter_mut() {
            *v *= z;
        }
        out
    }

    #[inline]
    pub fn scale_re(&self, x: f64) -> CMat {
        let mut out = *self;
        for v in out.a[..self.n * self.n].iter_mut() {
            *v *= x;
        }
        out
    }

    /// `self += z · b`
    #[inline]
    pub fn axpy(&mut self, z: f64, b: &CMat) {
        let nn = self.n * self.n;
        for k in 0..nn {
            self.a[k] += b.a[k] * z;
        }
    }

    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn commutator(&self, b: &CMat) -> CMat {
        self.matmul(b) - b.matmul(self)
    }

    /// Largest entry modulus.
    pub fn norm_max(&self) -> f64 {
        self.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn norm_frob(&self) -> f64 {
        self.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> C64 {
        let n = self.n;
        let mut m = *self;
        let mut det = ONE;
        for c in 0..n {
            let p = (c..n)
                .max_by(|&x, &y| m.get(x, c).norm().total_cmp(&m.get(y, c).norm()))
                .unwrap();
            if m.get(p, c).norm() == 0.0 {
                return ZERO;
            }
            if p != c {
                for j in 0..n {
                    let t = m.get(c, j);
                    m.set(c, j, m.get(p, j));
                    m.set(p, j, t);
                }
                det = -det;
            }
            let piv = m.get(c, c);
            det *= piv;
            for r in c + 1..n {
                let f = m.get(r, c) / piv;
                for j in c..n {
                    let v = m.get(r, j) - f * m.get(c, j);
                    m.set(r, j, v);
                }
            }
        }
        det
    }

    /// Block embedding `diag(self, I)` into a larger matrix.
    pub fn embed(&self, n: usize) -> CMat {
        assert!(n >= self.n);
        let mut out = CMat::identity(n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(i, j, self.get(i, j));
            }
        }
        out
    }

    /// Distance `max |self − b|` entrywise.
    pub fn dist(&self, b: &CMat) -> f64 {
        (*self - *b).norm_max()
    }
}

impl Add for CMat {
    type Output = CMat;
    #[inline]
    fn add(mut self, b: CMat) -> CMat {
        self += b;
        self
    }
}

impl AddAssign for CMat {
    #[inline]
    fn add_assign(&mut self, b: CMat) {
        debug_assert_eq!(self.n, b.n);
        let nn = self.n * self.n;
        for k in 0..nn {
            self.a[k] += b.a[k];
        }
    }
}

impl Sub for CMat {
    type Output = CMat;
    #[inline]
    fn sub(mut self, b: CMat) -> CMat {
        self -= b;
        self
    }
}

impl SubAssign for CMat {
    #[inline]
    fn sub_assign(&mut self, b: CMat) {
        debug_assert_eq!(self.n, b.n);
        let nn = self.n * self.n;
        for k in 0..nn {
            self.a[k] -= b.a[k];
        }
    }
}

impl Neg for CMat {
    type Output = CMat;
    #[inline]
    fn neg(self) -> CMat {
        self.scale_re(-1.0)
    }
}

impl Mul for CMat {
    type Output = CMat;
    #[inline]
    fn mul(self, b: CMat) -> CMat {
        self.matmul(&b)
    }
}

impl Mul<&CMat> for &CMat {
    type Output = CMat;
    #[inline]
    fn mul(self, b: &CMat) -> CMat {
        self.matmul(b)
    }
}

/// An element of su(n): anti-Hermitian and traceless.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgebraElement(CMat);

impl AlgebraElement {
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite("algebra element"));
        }
        let ah = (m + m.adjoint()).norm_max();
        let tr = m.trace().norm();
        if ah > ALGEBRA_TOL || tr > ALGEBRA_TOL {
            return Err(Error::Invariant(format!(
                "not in su(n): anti-Hermitian defect {ah:.3e}, trace {tr:.3e}"
            )));
        }
        Ok(AlgebraElement(m))
    }

    pub fn zero(n: usize) -> Self {
        AlgebraElement(CMat::zeros(n))
    }

    pub fn mat(&self) -> &CMat {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn scale(&self, x: f64) -> Self {
        AlgebraElement(self.0.scale_re(x))
    }
}

impl Add for AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, b: AlgebraElement) -> AlgebraElement {
        AlgebraElement(self.0 + b.0)
    }
}

/// An element of SU(n): unitary with unit determinant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement(CMat);

impl GroupElement {
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite("group element"));
        }
        let n = m.n();
        let u = (m.matmul(&m.adjoint()) - CMat::identity(n)).norm_max();
        let d = (m.det() - ONE).norm();
        if u > GROUP_TOL || d > GROUP_TOL {
            return Err(Error::Invariant(format!(
                "not in SU(n): unitarity defect {u:.3e}, |det−1| = {d:.3e}"
            )));
        }
        Ok(GroupElement(m))
    }

    pub fn identity(n: usize) -> Self {
        GroupElement(CMat::identity(n))
    }

    pub fn mat(&self) -> &CMat {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        GroupElement(self.0.adjoint())
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;
    fn mul(self, b: GroupElement) -> GroupElement {
        GroupElement(self.0 * b.0)
    }
}

/// Orthogonal basis of su(n) under ⟨X,Y⟩ = −tr(XY), normalized to ⟨e_a,e_a⟩ = 2.
///
/// The basis is i times the generalized Gell-Mann matrices (symmetric,
/// antisymmetric, then diagonal). For n = 2 this is e_a = iσ_a, which obeys
/// the quaternionic relations e_a e_b = −ε_abc e_c and e_a² = −I.
pub fn su_basis(n: usize) -> Result<Vec<AlgebraElement>> {
    if !(2..=MAX_RANK).contains(&n) {
        return Err(Error::InvalidRank(n));
    }
    let mut out = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in j + 1..n {
            // symmetric: E_jk + E_kj
            let mut s = CMat::zeros(n);
            s.set(j, k, ONE);
            s.set(k, j, ONE);
            out.push(AlgebraElement(s.scale(I)));
            // antisymmetric: −i E_jk + i E_kj
            let mut a = CMat::zeros(n);
            a.set(j, k, -I);
            a.set(k, j, I);
            out.push(AlgebraElement(a.scale(I)));
        }
    }
    for l in 1..n {
        let c = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut d = CMat::zeros(n);
        for j in 0..l {
            d.set(j, j, C64::new(c, 0.0));
        }
        d.set(l, l, C64::new(-c * l as f64, 0.0));
        out.push(AlgebraElement(d.scale(I)));
    }
    if n == 2 {
        // generalized Gell-Mann order for n = 2 is (σx, σy, σz)
        debug_assert_eq!(out.len(), 3);
    }
    Ok(out)
}

pub fn bracket(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
    if x.n() != y.n() {
        return Err(Error::RankMismatch(x.n(), y.n()));
    }
    Ok(AlgebraElement(x.0.commutator(&y.0)))
}

/// `(M − M†)/2` with its trace removed.
pub fn project_algebra_mat(m: &CMat) -> CMat {
    let n = m.n();
    let mut p = (*m - m.adjoint()).scale_re(0.5);
    let t = p.trace() / n as f64;
    for i in 0..n {
        let v = p.get(i, i) - t;
        p.set(i, i, v);
    }
    p
}

pub fn project_algebra(m: &CMat) -> AlgebraElement {
    AlgebraElement(project_algebra_mat(m))
}

/// Spectral decomposition H = U diag(λ) U† of a Hermitian matrix by cyclic
/// complex Jacobi rotations. Eigenvalues are returned unsorted.
pub fn herm_eigen(h: &CMat) -> ([f64; MAX_RANK], CMat) {
    let n = h.n();
    let mut a = *h;
    let mut u = CMat::identity(n);
    let scale = h.norm_frob().max(f64::MIN_POSITIVE);
    for _sweep in 0..30 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a.get(p, q).norm_sqr();
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = a.get(p, q);
                let bn = b.norm();
                if bn <= 1e-300 {
                    continue;
                }
                let w = b / bn;
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let theta = (aqq - app) / (2.0 * bn);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = Φ R with Φ = diag(1, w̄) on (p, q); columns:
                // g_p = c e_p − s w̄ e_q, g_q = s e_p + c w̄ e_q
                let wc = w.conj();
                let gpp = C64::new(c, 0.0);
                let gqp = wc * (-s);
                let gpq = C64::new(s, 0.0);
                let gqq = wc * c;
                // A ← A G (columns p, q)
                for i in 0..n {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, aip * gpp + aiq * gqp);
                    a.set(i, q, aip * gpq + aiq * gqq);
                    let uip = u.get(i, p);
                    let uiq = u.get(i, q);
                    u.set(i, p, uip * gpp + uiq * gqp);
                    u.set(i, q, uip * gpq + uiq * gqq);
                }
                // A ← G† A (rows p, q)
                for j in 0..n {
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    a.set(p, j, gpp.conj() * apj + gqp.conj() * aqj);
                    a.set(q, j, gpq.conj() * apj + gqq.conj() * aqj);
                }
            }
        }
    }
    let mut lam = [0.0; MAX_RANK];
    for (i, l) in lam.iter_mut().enumerate().take(n) {
        *l = a.get(i, i).re;
    }
    (lam, u)
}

/// Precomputed spectral form of an anti-Hermitian X, giving exp(sX) for any
/// real s at the cost of one matrix product.
#[derive(Clone, Copy, Debug)]
pub struct ExpSpectral {
    lam: [f64; MAX_RANK],
    u: CMat,
    ud: CMat,
}

impl ExpSpectral {
    /// `x` must be anti-Hermitian (not checked).
    pub fn new(x: &CMat) -> Self {
        let h = x.scale(I);
        let (lam, u) = herm_eigen(&h);
        ExpSpectral { lam, u, ud: u.adjoint() }
    }

    /// exp(s·X) = U diag(e^{−isλ}) U†.
    #[inline]
    pub fn exp(&self, s: f64) -> CMat {
        let n = self.u.n();
        let mut ud = self.ud;
        for i in 0..n {
            let ph = C64::from_polar(1.0, -s * self.lam[i]);
            for j in 0..n {
                let v = ud.get(i, j) * ph;
                ud.set(i, j, v);
            }
        }
        self.u.matmul(&ud)
    }
}

/// exp of an anti-Hermitian matrix (no invariant checks).
#[inline]
pub fn exp_ah(x: &CMat) -> CMat {
    ExpSpectral::new(x).exp(1.0)
}

pub fn matrix_exp(x: &AlgebraElement) -> Result<GroupElement> {
    if !x.0.is_finite() {
        return Err(Error::NonFinite("matrix_exp input"));
    }
    Ok(GroupElement(exp_ah(&x.0)))
}

/// The unit quaternion (p,q,r,s) as the SU(2) matrix [[s+ir, −q+ip], [q+ip, s−ir]].
pub fn quaternion(p: &[f64; 4]) -> CMat {
    let [p, q, r, s] = *p;
    CMat::from_rows(&[
        &[C64::new(s, r), C64::new(-q, p)],
        &[C64::new(q, p), C64::new(s, -r)],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_algebra(n: usize, scale: f64, rng: &mut impl Rng) -> CMat {
        let basis = su_basis(n).unwrap();
        let mut m = CMat::zeros(n);
        for e in &basis {
            m.axpy(rng.gen_range(-1.0..1.0) * scale, e.mat());
        }
        m
    }

    #[test]
    fn su2_basis_quaternion_relations() {
        let e = su_basis(2).unwrap();
        let (e1, e2, e3) = (*e[0].mat(), *e[1].mat(), *e[2].mat());
        assert!((e1 * e2 + e3).norm_max() < 1e-15);
        assert!((e2 * e1 - e3).norm_max() < 1e-15);
        assert!((e2 * e3 + e1).norm_max() < 1e-15);
        assert!((e3 * e1 + e2).norm_max() < 1e-15);
        for a in [e1, e2, e3] {
            assert!((a * a + CMat::identity(2)).norm_max() < 1e-15);
        }
    }

    #[test]
    fn bracket_e1_e2() {
        // direct 2x2 products: [iσx, iσy] = −[σx,σy] = −2iσz = −2 e₃
        let e = su_basis(2).unwrap();
        let b = bracket(&e[0], &e[1]).unwrap();
        assert!((*b.mat() + e[2].mat().scale_re(2.0)).norm_max() < 1e-15);
    }

    #[test]
    fn basis_sizes_and_orthogonality() {
        for n in 2..=4 {
            let b = su_basis(n).unwrap();
            assert_eq!(b.len(), n * n - 1);
            for (i, x) in b.iter().enumerate() {
                AlgebraElement::new(*x.mat()).unwrap();
                for (j, y) in b.iter().enumerate() {
                    let ip = -(x.mat().trace_mul(y.mat()));
                    let want = if i == j { 2.0 } else { 0.0 };
                    assert!((ip - want).norm() < 1e-14, "n={n} i={i} j={j} {ip}");
                }
            }
        }
        assert!(matches!(su_basis(1), Err(Error::InvalidRank(1))));
    }

    #[test]
    fn exp_roundtrip_and_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..=4 {
            for _ in 0..50 {
                let x = random_algebra(n, 5.0 / (n as f64), &mut rng);
                let xa = AlgebraElement::new(x).unwrap();
                let g = matrix_exp(&xa).unwrap();
                let gi = matrix_exp(&xa.scale(-1.0)).unwrap();
                assert!((*g.mat() * *gi.mat() - CMat::identity(n)).norm_max() < 1e-10);
                GroupElement::new(*g.mat()).unwrap();
            }
        }
    }

    #[test]
    fn exp_matches_taylor_series() {
        // independent oracle: Taylor series with scaling and squaring
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_algebra(3, 1.5, &mut rng);
        let k = 6;
        let xs = x.scale_re(1.0 / (1u64 << k) as f64);
        let mut term = CMat::identity(3);
        let mut sum = CMat::identity(3);
        for j in 1..20 {
            term = term.matmul(&xs).scale_re(1.0 / j as f64);
            sum += term;
        }
        for _ in 0..k {
            sum = sum.matmul(&sum);
        }
        assert!((exp_ah(&x) - sum).norm_max() < 1e-12);
    }

    #[test]
    fn exp_zero_is_identity() {
        let g = matrix_exp(&AlgebraElement::zero(3)).unwrap();
        assert!((*g.mat() - CMat::identity(3)).norm_max() < 1e-15);
    }

    #[test]
    fn exp_eigenvalues_unit_circle() {
        let e = su_basis(2).unwrap();
        let g = exp_ah(&e[2].mat().scale_re(std::f64::consts::PI / 2.0));
        // exp(iπσz/2) = diag(i, −i)
        assert!((g.get(0, 0) - I).norm() < 1e-14);
        assert!((g.get(1, 1) + I).norm() < 1e-14);
    }

    #[test]
    fn projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = CMat::from_fn(3, |_, _| C64::new(rng.gen(), rng.gen()));
        let p = project_algebra(&m);
        AlgebraElement::new(*p.mat()).unwrap();
        let pp = project_algebra(p.mat());
        assert!((*pp.mat() - *p.mat()).norm_max() < 1e-15);
        assert!(project_algebra(&CMat::identity(3)).mat().norm_max() < 1e-15);
    }

    #[test]
    fn determinant_and_embedding() {
        let q = quaternion(&[0.5, 0.5, 0.5, 0.5]);
        assert!((q.det() - ONE).norm() < 1e-15);
        let e = q.embed(3);
        assert!((e.det() - ONE).norm() < 1e-15);
        assert_eq!(e.get(2, 2), ONE);
        let d = CMat::from_fn(4, |i, j| if i == j { C64::new((i + 1) as f64, 0.0) } else { ZERO });
        assert!((d.det() - C64::new(24.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn group_element_rejects_non_unitary() {
        assert!(GroupElement::new(CMat::identity(2).scale_re(2.0)).is_err());
        assert!(AlgebraElement::new(CMat::identity(2)).is_err());
    }
}
