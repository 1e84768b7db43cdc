//! Matrix-valued differential forms in chart components.
//!
//! A p-form on a d-dimensional domain has one n×n matrix per increasing
//! multi-index I = (i₁ < … < i_p) at every node. The wedge product keeps
//! matrix factors in shuffle order, so A∧A ≠ 0 for matrix-valued 1-forms.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{project_algebra_mat, CMat, C64};
use crate::error::{Error, Result};
use crate::geometry::Domain;

pub const MAX_DIM: usize = 5;

/// Multi-index bookkeeping for one dimension.
pub struct FormTables {
    pub dim: usize,
    /// `combos[p]` lists the increasing p-subsets of 0..dim in lexicographic order.
    pub combos: Vec<Vec<Vec<usize>>>,
    /// `wedge[p][q]`: (index in p-combos, index in q-combos, index in (p+q)-combos, sign).
    pub wedge: Vec<Vec<Vec<(usize, usize, usize, f64)>>>,
    /// `d[p]`: (axis j, source p-combo, target (p+1)-combo, sign of dx^j ∧ dx^I).
    pub d: Vec<Vec<(usize, usize, usize, f64)>>,
}

fn combinations(dim: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, dim: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            rec(i + 1, dim, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, dim, p, &mut Vec::new(), &mut out);
    out
}

impl FormTables {
    fn build(dim: usize) -> Self {
        let combos: Vec<Vec<Vec<usize>>> = (0..=dim).map(|p| combinations(dim, p)).collect();
        let find = |v: &[usize]| combos[v.len()].iter().position(|c| c == v).unwrap();
        let mut wedge = vec![vec![Vec::new(); dim + 1]; dim + 1];
        for p in 0..=dim {
            for q in 0..=dim - p {
                for (ia, a) in combos[p].iter().enumerate() {
                    for (ib, b) in combos[q].iter().enumerate() {
                        if a.iter().any(|x| b.contains(x)) {
                            continue;
                        }
                        let inv = a.iter().map(|x| b.iter().filter(|y| *y < x).count()).sum::<usize>();
                        let mut k: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
                        k.sort_unstable();
                        let sign = if inv % 2 == 0 { 1.0 } else { -1.0 };
                        wedge[p][q].push((ia, ib, find(&k), sign));
                    }
                }
            }
        }
        let mut d = vec![Vec::new(); dim];
        for (p, dp) in d.iter_mut().enumerate() {
            for (ii, i) in combos[p].iter().enumerate() {
                for j in 0..dim {
                    if i.contains(&j) {
                        continue;
                    }
                    let before = i.iter().filter(|x| **x < j).count();
                    let mut k = i.clone();
                    k.push(j);
                    k.sort_unstable();
                    let sign = if before % 2 == 0 { 1.0 } else { -1.0 };
                    dp.push((j, ii, find(&k), sign));
                }
            }
        }
        FormTables { dim, combos, wedge, d }
    }

    pub fn ncomp(&self, p: usize) -> usize {
        self.combos[p].len()
    }
}

/// Cached tables for `dim ≤ 5`.
pub fn tables(dim: usize) -> &'static FormTables {
    static T: OnceLock<Vec<FormTables>> = OnceLock::new();
    &T.get_or_init(|| (0..=MAX_DIM).map(FormTables::build).collect())[dim]
}

pub fn ncomp(dim: usize, p: usize) -> usize {
    tables(dim).ncomp(p)
}

/// Pointwise wedge of matrix-valued forms given by their component lists.
pub fn wedge_at(dim: usize, p: usize, a: &[CMat], q: usize, b: &[CMat]) -> Vec<CMat> {
    let t = tables(dim);
    let n = a[0].n();
    let mut out = vec![CMat::zeros(n); t.ncomp(p + q)];
    for &(ia, ib, ic, s) in &t.wedge[p][q] {
        out[ic].axpy(s, &a[ia].matmul(&b[ib]));
    }
    out
}

/// `tr(a ∧ b)` for forms of complementary degree p + q = dim (single component).
pub fn tr_wedge_top(dim: usize, p: usize, a: &[CMat], b: &[CMat]) -> C64 {
    let t = tables(dim);
    let q = dim - p;
    let mut s = C64::new(0.0, 0.0);
    for &(ia, ib, _, sg) in &t.wedge[p][q] {
        s += a[ia].trace_mul(&b[ib]) * sg;
    }
    s
}

/// Components of the traced wedge tr(a ∧ b) (a scalar (p+q)-form).
pub fn tr_wedge(dim: usize, p: usize, a: &[CMat], q: usize, b: &[CMat]) -> Vec<C64> {
    let t = tables(dim);
    let mut out = vec![C64::new(0.0, 0.0); t.ncomp(p + q)];
    for &(ia, ib, ic, s) in &t.wedge[p][q] {
        out[ic] += a[ia].trace_mul(&b[ib]) * s;
    }
    out
}

/// Pointwise sum of forms of equal degree.
pub fn add_at(a: &[CMat], b: &[CMat]) -> Vec<CMat> {
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

pub fn scale_at(a: &[CMat], s: f64) -> Vec<CMat> {
    a.iter().map(|x| x.scale_re(s)).collect()
}

/// `tr(V⁵)` for a matrix-valued 1-form on a 5-dimensional domain.
///
/// Evaluated as the iterated wedge tr(V ∧ V² ∧ V²) with V² = V∧V built from
/// commutators, and graded trace cyclicity used to pin the first factor to
/// V₀: tr V⁵ = 5 Σ_{a<b, c<d} sgn(0abcd) tr(V₀ [V_a,V_b] [V_c,V_d]) with
/// {a,b,c,d} = {1,2,3,4}. This costs 12 products instead of 120 five-fold
/// products.
#[inline]
pub fn trace_fifth_power(v: &[CMat; 5]) -> C64 {
    // pairs (a,b | c,d) partitioning {1,2,3,4} with the sign of (0 a b c d)
    const PAIRS: [((usize, usize), (usize, usize), f64); 6] = [
        ((1, 2), (3, 4), 1.0),
        ((1, 3), (2, 4), -1.0),
        ((1, 4), (2, 3), 1.0),
        ((2, 3), (1, 4), 1.0),
        ((2, 4), (1, 3), -1.0),
        ((3, 4), (1, 2), 1.0),
    ];
    let c = |a: usize, b: usize| v[a].matmul(&v[b]) - v[b].matmul(&v[a]);
    let c12 = c(1, 2);
    let c13 = c(1, 3);
    let c14 = c(1, 4);
    let c23 = c(2, 3);
    let c24 = c(2, 4);
    let c34 = c(3, 4);
    let get = |a: usize, b: usize| match (a, b) {
        (1, 2) => &c12,
        (1, 3) => &c13,
        (1, 4) => &c14,
        (2, 3) => &c23,
        (2, 4) => &c24,
        _ => &c34,
    };
    let mut s = C64::new(0.0, 0.0);
    for ((a, b), (cc, d), sg) in PAIRS {
        s += v[0].trace_mul(&get(a, b).matmul(get(cc, d))) * sg;
    }
    s * 5.0
}

/// `tr(V³)` for a matrix-valued 1-form on a 3-dimensional domain:
/// 3 tr(V₀[V₁,V₂]).
#[inline]
pub fn trace_cube(v: &[CMat; 3]) -> C64 {
    v[0].trace_mul(&(v[1].matmul(&v[2]) - v[2].matmul(&v[1]))) * 3.0
}

#[derive(Clone, Debug)]
pub struct MatrixFormField {
    domain: Arc<Domain>,
    degree: usize,
    rank: usize,
    data: Vec<C64>,
}

/// Traced forms: one complex number per component per node.
#[derive(Clone, Debug)]
pub struct ScalarForm {
    domain: Arc<Domain>,
    degree: usize,
    data: Vec<C64>,
}

impl MatrixFormField {
    pub fn zeros(domain: Arc<Domain>, degree: usize, rank: usize) -> Self {
        let len = domain.n_nodes() * ncomp(domain.dim(), degree) * rank * rank;
        MatrixFormField { domain, degree, rank, data: vec![C64::new(0.0, 0.0); len] }
    }

    /// Builds a form from a per-node function returning its components.
    pub fn from_fn<F>(domain: Arc<Domain>, degree: usize, rank: usize, f: F) -> Self
    where
        F: Fn(usize) -> Vec<CMat> + Sync,
    {
        let nc = ncomp(domain.dim(), degree);
        let blk = nc * rank * rank;
        let mut data = vec![C64::new(0.0, 0.0); domain.n_nodes() * blk];
        data.par_chunks_mut(blk).enumerate().for_each(|(node, chunk)| {
            let comps = f(node);
            debug_assert_eq!(comps.len(), nc);
            for (c, m) in comps.iter().enumerate() {
                m.write_to(&mut chunk[c * rank * rank..]);
            }
        });
        MatrixFormField { domain, degree, rank, data }
    }

    /// Wraps raw node-major data (node, component, row, column).
    pub fn from_raw(domain: Arc<Domain>, degree: usize, rank: usize, data: Vec<C64>) -> Result<Self> {
        let len = domain.n_nodes() * ncomp(domain.dim(), degree) * rank * rank;
        if data.len() != len {
            return Err(Error::SampleCount { expected: len, got: data.len() });
        }
        Ok(MatrixFormField { domain, degree, rank, data })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ncomp(&self) -> usize {
        ncomp(self.domain.dim(), self.degree)
    }

    pub fn raw(&self) -> &[C64] {
        &self.data
    }

    fn block(&self) -> usize {
        self.ncomp() * self.rank * self.rank
    }

    #[inline]
    pub fn get(&self, node: usize, comp: usize) -> CMat {
        let nn = self.rank * self.rank;
        let off = node * self.block() + comp * nn;
        CMat::from_slice(self.rank, &self.data[off..off + nn])
    }

    pub fn at(&self, node: usize) -> Vec<CMat> {
        (0..self.ncomp()).map(|c| self.get(node, c)).collect()
    }

    fn same_domain(&self, other: &MatrixFormField) -> Result<()> {
        if !Arc::ptr_eq(&self.domain, &other.domain) && *self.domain != *other.domain {
            return Err(Error::DomainMismatch("forms live on different grids".into()));
        }
        if self.rank != other.rank {
            return Err(Error::RankMismatch(self.rank, other.rank));
        }
        Ok(())
    }

    /// Pointwise map over component lists.
    pub fn map<F>(&self, degree: usize, f: F) -> MatrixFormField
    where
        F: Fn(usize, &[CMat]) -> Vec<CMat> + Sync,
    {
        MatrixFormField::from_fn(self.domain.clone(), degree, self.rank, |node| f(node, &self.at(node)))
    }

    pub fn wedge(&self, b: &MatrixFormField) -> Result<MatrixFormField> {
        self.same_domain(b)?;
        let dim = self.domain.dim();
        let (p, q) = (self.degree, b.degree);
        if p + q > dim {
            return Err(Error::DegreeOverflow { p, q, dim });
        }
        Ok(MatrixFormField::from_fn(self.domain.clone(), p + q, self.rank, |node| {
            wedge_at(dim, p, &self.at(node), q, &b.at(node))
        }))
    }

    pub fn exterior_d(&self) -> Result<MatrixFormField> {
        let dim = self.domain.dim();
        let p = self.degree;
        if p >= dim {
            return Err(Error::TopDegree);
        }
        let blk_in = self.block();
        let nn = self.rank * self.rank;
        let nc_out = ncomp(dim, p + 1);
        let mut out = vec![C64::new(0.0, 0.0); self.domain.n_nodes() * nc_out * nn];
        let derivs: Vec<Vec<C64>> = (0..dim)
            .map(|j| self.domain.chart_derivative(&self.data, blk_in, j))
            .collect::<Result<_>>()?;
        let t = tables(dim);
        out.par_chunks_mut(nc_out * nn).enumerate().for_each(|(node, chunk)| {
            for &(j, src, dst, s) in &t.d[p] {
                let from = &derivs[j][node * blk_in + src * nn..node * blk_in + (src + 1) * nn];
                for (o, v) in chunk[dst * nn..(dst + 1) * nn].iter_mut().zip(from) {
                    *o += v * s;
                }
            }
        });
        MatrixFormField::from_raw(self.domain.clone(), p + 1, self.rank, out)
    }

    pub fn trace_form(&self) -> ScalarForm {
        let nc = self.ncomp();
        let data = (0..self.domain.n_nodes())
            .into_par_iter()
            .flat_map_iter(|node| (0..nc).map(move |c| (node, c)))
            .map(|(node, c)| self.get(node, c).trace())
            .collect();
        ScalarForm { domain: self.domain.clone(), degree: self.degree, data }
    }

    /// F = dA + A∧A.
    pub fn curvature(&self) -> Result<MatrixFormField> {
        if self.degree != 1 {
            return Err(Error::Invariant("curvature needs a 1-form".into()));
        }
        self.exterior_d()?.add(&self.wedge(self)?)
    }

    pub fn add(&self, b: &MatrixFormField) -> Result<MatrixFormField> {
        self.same_domain(b)?;
        if self.degree != b.degree {
            return Err(Error::Invariant("adding forms of different degree".into()));
        }
        let data = self.data.iter().zip(&b.data).map(|(x, y)| x + y).collect();
        Ok(MatrixFormField { data, ..self.clone() })
    }

    pub fn sub(&self, b: &MatrixFormField) -> Result<MatrixFormField> {
        self.add(&b.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> MatrixFormField {
        let data = self.data.iter().map(|x| x * s).collect();
        MatrixFormField { data, ..self.clone() }
    }

    /// Per-node projection onto su(n).
    pub fn project_algebra(&self) -> MatrixFormField {
        self.map(self.degree, |_, c| c.iter().map(project_algebra_mat).collect())
    }

    /// Largest entry modulus over all nodes and components.
    pub fn max_norm(&self) -> f64 {
        self.data.par_iter().map(|z| z.norm()).reduce(|| 0.0, f64::max)
    }

    /// Largest per-node distance from su(n).
    pub fn algebra_defect(&self) -> f64 {
        (0..self.domain.n_nodes())
            .into_par_iter()
            .map(|node| {
                (0..self.ncomp())
                    .map(|c| {
                        let m = self.get(node, c);
                        (m + m.adjoint()).norm_max().max(m.trace().norm())
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn dump(&self) -> FieldDump {
        FieldDump::new(&self.domain, self.degree, self.rank, &self.data)
    }
}

impl ScalarForm {
    pub fn from_fn<F>(domain: Arc<Domain>, degree: usize, f: F) -> Self
    where
        F: Fn(usize) -> Vec<C64> + Sync,
    {
        let nc = ncomp(domain.dim(), degree);
        let data = (0..domain.n_nodes())
            .into_par_iter()
            .flat_map_iter(|node| {
                let v = f(node);
                debug_assert_eq!(v.len(), nc);
                v.into_iter()
            })
            .collect();
        ScalarForm { domain, degree, data }
    }

    /// A top-degree form from its single component per node.
    pub fn top(domain: Arc<Domain>, data: Vec<C64>) -> Result<Self> {
        if data.len() != domain.n_nodes() {
            return Err(Error::SampleCount { expected: domain.n_nodes(), got: data.len() });
        }
        let degree = domain.dim();
        Ok(ScalarForm { domain, degree, data })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn ncomp(&self) -> usize {
        ncomp(self.domain.dim(), self.degree)
    }

    pub fn at(&self, node: usize) -> &[C64] {
        let nc = self.ncomp();
        &self.data[node * nc..(node + 1) * nc]
    }

    /// ∫ over the domain of a top-degree form.
    pub fn integrate(&self) -> Result<C64> {
        if self.degree != self.domain.dim() {
            return Err(Error::Invariant(format!(
                "integrating a {}-form over a {}-dimensional domain",
                self.degree,
                self.domain.dim()
            )));
        }
        self.domain.integrate_top_c(&self.data)
    }

    /// ∫ |component| (L¹ size of a top-degree form).
    pub fn integrate_abs(&self) -> Result<f64> {
        let a: Vec<f64> = self.data.iter().map(|z| z.norm()).collect();
        Ok(self.domain.integrate_top(&a)?.abs())
    }

    /// Exterior derivative, with chart derivatives evaluated node by node
    /// (no per-axis derivative arrays are stored).
    pub fn exterior_d(&self) -> Result<ScalarForm> {
        let dim = self.domain.dim();
        let p = self.degree;
        if p >= dim {
            return Err(Error::TopDegree);
        }
        let nc = self.ncomp();
        let t = tables(dim);
        let nco = ncomp(dim, p + 1);
        let d = &self.domain;
        let strides: Vec<usize> = (0..dim).map(|a| d.stride(a)).collect();
        let mut out = vec![C64::new(0.0, 0.0); d.n_nodes() * nco];
        out.par_chunks_mut(nco).enumerate().for_each(|(node, chunk)| {
            for j in 0..dim {
                let pos = (node / strides[j]) % d.axis(j).n;
                let (idx, w) = d.stencil(j, pos);
                let base = node - pos * strides[j];
                for &(jj, src, dst, s) in &t.d[p] {
                    if jj != j {
                        continue;
                    }
                    let mut acc = C64::new(0.0, 0.0);
                    for (k, wk) in idx.iter().zip(w.iter()) {
                        if *wk != 0.0 {
                            acc += self.data[(base + k * strides[j]) * nc + src] * *wk;
                        }
                    }
                    chunk[dst] += acc * s;
                }
            }
        });
        Ok(ScalarForm { domain: self.domain.clone(), degree: p + 1, data: out })
    }

    /// A form of the given degree from node-major component data.
    pub fn from_raw(domain: Arc<Domain>, degree: usize, data: Vec<C64>) -> Result<Self> {
        let expected = domain.n_nodes() * ncomp(domain.dim(), degree);
        if data.len() != expected {
            return Err(Error::SampleCount { expected, got: data.len() });
        }
        Ok(ScalarForm { domain, degree, data })
    }

    pub fn add(&self, b: &ScalarForm) -> Result<ScalarForm> {
        if self.degree != b.degree || self.data.len() != b.data.len() {
            return Err(Error::DomainMismatch("scalar forms of different shape".into()));
        }
        let data = self.data.iter().zip(&b.data).map(|(x, y)| x + y).collect();
        Ok(ScalarForm { data, ..self.clone() })
    }

    pub fn scale(&self, s: C64) -> ScalarForm {
        let data = self.data.iter().map(|x| x * s).collect();
        ScalarForm { data, ..self.clone() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Self-describing dump of a form or group field: node-major in the domain's
/// axis order, then form multi-index (lexicographic), then matrix row, then
/// column; complex numbers as `[re, im]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldDump {
    pub kind: String,
    pub axes: Vec<String>,
    pub resolutions: Vec<usize>,
    pub orientation: f64,
    pub degree: usize,
    pub rank: usize,
    pub index_order: String,
    pub data: Vec<[f64; 2]>,
}

impl FieldDump {
    pub fn new(domain: &Domain, degree: usize, rank: usize, data: &[C64]) -> Self {
        let axes: Vec<String> = domain.axes().iter().map(|a| a.name.clone()).collect();
        FieldDump {
            kind: domain.kind().name().to_string(),
            index_order: format!("node({}), multi-index, row, column", axes.join(",")),
            axes,
            resolutions: domain.resolutions(),
            orientation: domain.orientation(),
            degree,
            rank,
            data: data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::su_basis;
    use crate::geometry::DomainKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s3(res: [usize; 3]) -> Arc<Domain> {
        Arc::new(Domain::new(DomainKind::S3, &res).unwrap())
    }

    fn scalar_mat(n: usize, x: f64) -> CMat {
        CMat::scalar(n, C64::new(x, 0.0))
    }

    /// Smooth matrix 1-form from ambient coordinates (not algebra valued).
    fn test_one_form(d: &Arc<Domain>, seed: u64) -> MatrixFormField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coef: Vec<CMat> = (0..12).map(|_| CMat::from_fn(2, |_, _| C64::new(rng.gen(), rng.gen()))).collect();
        MatrixFormField::from_fn(d.clone(), 1, 2, |node| {
            let c = d.coords(node);
            (0..3)
                .map(|i| {
                    coef[4 * i].scale_re(c[0].sin() * c[1].cos())
                        + coef[4 * i + 1].scale_re(c[2].sin())
                        + coef[4 * i + 2].scale_re((c[0] + c[2]).cos())
                        + coef[4 * i + 3].scale_re(c[1].sin())
                })
                .collect()
        })
    }

    #[test]
    fn table_sizes_and_signs() {
        let t = tables(5);
        assert_eq!(t.ncomp(2), 10);
        assert_eq!(t.ncomp(5), 1);
        // dx1 ∧ dx0 = −dx0 ∧ dx1
        let e = t.wedge[1][1].iter().find(|(a, b, _, _)| *a == 1 && *b == 0).unwrap();
        assert_eq!(e.3, -1.0);
    }

    #[test]
    fn scalar_forms_graded_commute() {
        let d = s3([8, 8, 16]);
        let a = MatrixFormField::from_fn(d.clone(), 1, 1, |node| {
            let c = d.coords(node);
            vec![scalar_mat(1, c[0].sin()), scalar_mat(1, c[1]), scalar_mat(1, c[2].cos())]
        });
        let b = MatrixFormField::from_fn(d.clone(), 2, 1, |node| {
            let c = d.coords(node);
            vec![scalar_mat(1, c[2]), scalar_mat(1, 1.0), scalar_mat(1, c[0] * c[1])]
        });
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        assert!(ab.sub(&ba).unwrap().max_norm() < 1e-13); // (−1)^{1·2} = +1
        let aa = a.wedge(&a).unwrap();
        assert!(aa.max_norm() < 1e-13);
    }

    #[test]
    fn su2_alpha_cubed_is_scalar() {
        let d = s3([8, 8, 16]);
        let basis = su_basis(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rand_alg = |rng: &mut ChaCha8Rng| {
            let mut m = CMat::zeros(2);
            for e in &basis {
                m.axpy(rng.gen_range(-1.0..1.0), e.mat());
            }
            m
        };
        let ca: Vec<CMat> = (0..9).map(|_| rand_alg(&mut rng)).collect();
        let mk = |cs: Vec<CMat>| {
            let dd = d.clone();
            MatrixFormField::from_fn(d.clone(), 1, 2, move |node| {
                let c = dd.coords(node);
                (0..3)
                    .map(|i| cs[3 * i].scale_re(c[0].cos()) + cs[3 * i + 1].scale_re(c[1].sin()) + cs[3 * i + 2].scale_re(c[2].sin()))
                    .collect()
            })
        };
        let alpha = mk(ca);
        let a3 = alpha.wedge(&alpha).unwrap().wedge(&alpha).unwrap();
        // α³ is a multiple of I for su(2)-valued α
        for node in 0..d.n_nodes() {
            let m = a3.get(node, 0);
            let off = m - CMat::scalar(2, m.trace() / 2.0);
            assert!(off.norm_max() < 1e-12);
        }
    }

    #[test]
    fn wedge_linear_in_scalar_function() {
        let d = s3([8, 8, 16]);
        let a = test_one_form(&d, 1);
        let b = test_one_form(&d, 2);
        let f = |node: usize| d.coords(node)[0].cos() + 2.0;
        let fa = a.map(1, |node, c| scale_at(c, f(node)));
        let lhs = fa.wedge(&b).unwrap();
        let rhs = a.wedge(&b).unwrap().map(2, |node, c| scale_at(c, f(node)));
        assert!(lhs.sub(&rhs).unwrap().max_norm() < 1e-12);
    }

    #[test]
    fn trace_cyclicity_graded() {
        let d = s3([8, 8, 16]);
        let a = test_one_form(&d, 3);
        let b = a.wedge(&test_one_form(&d, 4)).unwrap();
        let t1 = a.wedge(&b).unwrap().trace_form();
        let t2 = b.wedge(&a).unwrap().trace_form();
        // (−1)^{1·2} = +1
        let diff = t1.add(&t2.scale(C64::new(-1.0, 0.0))).unwrap();
        assert!(diff.max_abs() < 1e-12);
        let i = t1.integrate().unwrap();
        let j = t2.integrate().unwrap();
        assert!((i - j).norm() < 1e-10);
    }

    #[test]
    fn d_squared_small() {
        let d = s3([16, 16, 32]);
        let a = test_one_form(&d, 6);
        let dda = a.exterior_d().unwrap().exterior_d().unwrap();
        assert!(dda.max_norm() < 1e-6 * 50.0, "{}", dda.max_norm());
        let c = MatrixFormField::from_fn(d.clone(), 0, 2, |_| vec![CMat::identity(2)]);
        assert!(c.exterior_d().unwrap().max_norm() < 1e-12);
    }

    #[test]
    fn leibniz_converges() {
        let res = |r: [usize; 3]| {
            let d = s3(r);
            let a = test_one_form(&d, 7);
            let b = test_one_form(&d, 8);
            let lhs = a.wedge(&b).unwrap().exterior_d().unwrap();
            let rhs = a.exterior_d().unwrap().wedge(&b).unwrap().sub(&a.wedge(&b.exterior_d().unwrap()).unwrap()).unwrap();
            lhs.sub(&rhs).unwrap().max_norm()
        };
        let (r1, r2) = (res([8, 8, 16]), res([16, 16, 32]));
        assert!(r1 / r2 >= 4.0, "{r1} {r2}");
    }

    #[test]
    fn fifth_power_kernel_matches_iterated_wedge() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v: [CMat; 5] = std::array::from_fn(|_| CMat::from_fn(3, |_, _| C64::new(rng.gen(), rng.gen())));
        let vs: Vec<CMat> = v.to_vec();
        let v2 = wedge_at(5, 1, &vs, 1, &vs);
        let v4 = wedge_at(5, 2, &v2, 2, &v2);
        let direct = tr_wedge_top(5, 1, &vs, &v4);
        assert!((direct - trace_fifth_power(&v)).norm() < 1e-10 * direct.norm().max(1.0));
        // 120-term Levi-Civita oracle
        let mut brute = C64::new(0.0, 0.0);
        let mut perm = [0usize, 1, 2, 3, 4];
        permute(&mut perm, 0, &mut |p| {
            let mut m = CMat::identity(3);
            for &i in p {
                m = m.matmul(&v[i]);
            }
            brute += m.trace() * parity(p);
        });
        assert!((brute - direct).norm() < 1e-10 * brute.norm().max(1.0));
        let v3: [CMat; 3] = [v[0], v[1], v[2]];
        let t = tr_wedge_top(3, 1, &vs[..3], &wedge_at(3, 1, &vs[..3], 1, &vs[..3]));
        assert!((trace_cube(&v3) - t).norm() < 1e-12);
    }

    fn permute(p: &mut [usize; 5], k: usize, f: &mut impl FnMut(&[usize; 5])) {
        if k == 5 {
            f(p);
            return;
        }
        for i in k..5 {
            p.swap(k, i);
            permute(p, k + 1, f);
            p.swap(k, i);
        }
    }

    fn parity(p: &[usize; 5]) -> f64 {
        let mut inv = 0;
        for i in 0..5 {
            for j in i + 1..5 {
                if p[i] > p[j] {
                    inv += 1;
                }
            }
        }
        if inv % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    #[test]
    fn curvature_of_zero_and_trace_identity() {
        let d = s3([8, 8, 16]);
        let z = MatrixFormField::zeros(d.clone(), 1, 2);
        assert!(z.curvature().unwrap().max_norm() == 0.0);
        let id = MatrixFormField::from_fn(d.clone(), 0, 3, |_| vec![CMat::identity(3)]);
        assert!(id.trace_form().data().iter().all(|t| (t - C64::new(3.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn dump_layout() {
        let d = s3([8, 8, 16]);
        let a = test_one_form(&d, 1);
        let dump = a.dump();
        assert_eq!(dump.data.len(), d.n_nodes() * 3 * 4);
        let m = a.get(5, 2);
        let off = (5 * 3 + 2) * 4 + 1;
        assert_eq!(dump.data[off], [m.get(0, 1).re, m.get(0, 1).im]);
        let s = serde_json::to_string(&dump).unwrap();
        assert!(s.contains("\"kind\":\"S3\""));
    }
}
