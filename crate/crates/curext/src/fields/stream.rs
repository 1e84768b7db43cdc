//! Plane-streamed evaluation of group fields and their Maurer–Cartan forms.
//!
//! The 5-dimensional grids are far too large to hold a matrix field in
//! memory, so every integral is computed one ψ-plane at a time. For each leaf
//! source we keep the seven sampled planes that the ψ-stencil of the current
//! plane touches; in-plane derivatives use the other axes' stencils. Leaf
//! jets (value u and right Maurer–Cartan components V_a = ∂_a u·u⁻¹) are
//! combined into jets of products and inverses by the Leibniz rule,
//! V(ab) = V(a) + a V(b) a⁻¹ and V(a⁻¹) = −a⁻¹ V(a) a.

use std::collections::VecDeque;
use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::{project_algebra_mat, CMat, C64};
use crate::error::{Error, Result};
use crate::forms::MatrixFormField;
use crate::geometry::{pairwise_sum_c, Domain, STENCIL};

use super::{GroupField, MapSource};

/// Value and right Maurer–Cartan components of a group field at one node.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    pub u: CMat,
    pub v: [CMat; 5],
}

impl Jet {
    pub fn identity(n: usize) -> Self {
        Jet { u: CMat::identity(n), v: [CMat::zeros(n); 5] }
    }

    /// Jet of the pointwise product self·b.
    #[inline]
    pub fn mul(&self, b: &Jet, dim: usize) -> Jet {
        let ua = self.u;
        let uai = ua.adjoint();
        let mut v = self.v;
        for a in 0..dim {
            v[a] += ua.matmul(&b.v[a]).matmul(&uai);
        }
        Jet { u: ua.matmul(&b.u), v }
    }

    #[inline]
    pub fn inv(&self, dim: usize) -> Jet {
        let ui = self.u.adjoint();
        let mut v = self.v;
        for a in 0..dim {
            v[a] = -ui.matmul(&self.v[a]).matmul(&self.u);
        }
        Jet { u: ui, v }
    }

    /// Left Maurer–Cartan components u⁻¹∂_a u.
    #[inline]
    pub fn left(&self, dim: usize) -> [CMat; 5] {
        let ui = self.u.adjoint();
        let mut out = [CMat::zeros(self.u.n()); 5];
        for a in 0..dim {
            out[a] = ui.matmul(&self.v[a]).matmul(&self.u);
        }
        out
    }
}

/// Position of a node handed to stream kernels.
#[derive(Clone, Copy, Debug)]
pub struct NodeCtx {
    pub node: usize,
    pub plane: usize,
    pub offset: usize,
    pub coords: [f64; 5],
    pub dim: usize,
}

#[derive(Debug)]
enum Plan {
    Leaf(usize),
    Mul(Box<Plan>, Box<Plan>),
    Inv(Box<Plan>),
}

impl Plan {
    fn eval(&self, leaves: &[Jet], dim: usize) -> Jet {
        match self {
            Plan::Leaf(i) => leaves[*i],
            Plan::Mul(a, b) => a.eval(leaves, dim).mul(&b.eval(leaves, dim), dim),
            Plan::Inv(a) => a.eval(leaves, dim).inv(dim),
        }
    }
}

fn compile(f: &GroupField, leaves: &mut Vec<Arc<dyn MapSource>>) -> Plan {
    match f {
        GroupField::Leaf(s) => {
            let key = Arc::as_ptr(s) as *const () as usize;
            let idx = leaves
                .iter()
                .position(|l| Arc::as_ptr(l) as *const () as usize == key)
                .unwrap_or_else(|| {
                    leaves.push(s.clone());
                    leaves.len() - 1
                });
            Plan::Leaf(idx)
        }
        GroupField::Mul(a, b) => Plan::Mul(Box::new(compile(a, leaves)), Box::new(compile(b, leaves))),
        GroupField::Inv(a) => Plan::Inv(Box::new(compile(a, leaves))),
    }
}

/// A small cache of per-plane arrays, evicting the oldest entries.
pub struct PlaneCache<T> {
    cap: usize,
    entries: VecDeque<(usize, Arc<Vec<T>>)>,
}

impl<T> PlaneCache<T> {
    pub fn new(cap: usize) -> Self {
        PlaneCache { cap, entries: VecDeque::new() }
    }

    pub fn get(&mut self, i: usize, compute: impl FnOnce(usize) -> Vec<T>) -> Arc<Vec<T>> {
        if let Some((_, v)) = self.entries.iter().find(|(k, _)| *k == i) {
            return v.clone();
        }
        let v = Arc::new(compute(i));
        if self.entries.len() == self.cap {
            self.entries.pop_front();
        }
        self.entries.push_back((i, v.clone()));
        v
    }
}

/// Streams jets of several fields over the ψ-planes of a domain.
pub struct JetStream<'a> {
    domain: &'a Domain,
    leaves: Vec<Arc<dyn MapSource>>,
    plans: Vec<Plan>,
    cache: Vec<PlaneCache<CMat>>,
}

impl<'a> JetStream<'a> {
    pub fn new(domain: &'a Domain, fields: &[&GroupField]) -> Self {
        let mut leaves = Vec::new();
        let plans = fields.iter().map(|f| compile(f, &mut leaves)).collect();
        let cache = leaves.iter().map(|_| PlaneCache::new(STENCIL + 1)).collect();
        JetStream { domain, leaves, plans, cache }
    }

    pub fn domain(&self) -> &Domain {
        self.domain
    }

    fn sample_plane(domain: &Domain, leaf: &Arc<dyn MapSource>, i: usize) -> Vec<CMat> {
        let nfib = domain.n_fiber();
        let per = domain.axis(1).n * domain.axis(2).n;
        let pts = &domain.s3_points()[i * per..(i + 1) * per];
        let mut vals = vec![CMat::zeros(leaf.rank()); per * nfib];
        vals.par_chunks_mut(nfib).zip(pts.par_iter()).for_each(|(chunk, x)| {
            leaf.eval_fiber(x, domain.fiber(), chunk);
        });
        vals
    }

    /// Applies `f` to the jets of every node of ψ-plane `i`, in node order.
    pub fn plane_map<T, F>(&mut self, i: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&NodeCtx, &[Jet]) -> T + Sync,
    {
        let domain = self.domain;
        let dim = domain.dim();
        let (idx0, w0) = domain.stencil(0, i);
        let planes: Vec<Vec<Arc<Vec<CMat>>>> = self
            .leaves
            .iter()
            .zip(self.cache.iter_mut())
            .map(|(leaf, cache)| {
                idx0.iter().map(|&j| cache.get(j, |j| Self::sample_plane(domain, leaf, j))).collect()
            })
            .collect();
        let center: Vec<Arc<Vec<CMat>>> = self
            .leaves
            .iter()
            .zip(self.cache.iter_mut())
            .map(|(leaf, cache)| cache.get(i, |j| Self::sample_plane(domain, leaf, j)))
            .collect();
        let plane_len = domain.plane_len();
        let strides: Vec<usize> = (0..dim).map(|a| domain.stride(a)).collect();
        let plans = &self.plans;
        let axis0_node = domain.axis(0).node(i);
        (0..plane_len)
            .into_par_iter()
            .map(|p| {
                let node = i * plane_len + p;
                let mut coords = [0.0; 5];
                coords[0] = axis0_node;
                let mut pos = [0usize; 5];
                for a in 1..dim {
                    pos[a] = (p / strides[a]) % domain.axis(a).n;
                    coords[a] = domain.axis(a).node(pos[a]);
                }
                let ljets: Vec<Jet> = (0..planes.len())
                    .map(|l| {
                        let u = center[l][p];
                        let n = u.n();
                        let ui = u.adjoint();
                        let mut v = [CMat::zeros(n); 5];
                        let mut du = CMat::zeros(n);
                        for (k, w) in w0.iter().enumerate() {
                            if *w != 0.0 {
                                du.axpy(*w, &planes[l][k][p]);
                            }
                        }
                        v[0] = project_algebra_mat(&du.matmul(&ui));
                        for a in 1..dim {
                            let (idx, w) = domain.stencil(a, pos[a]);
                            let mut du = CMat::zeros(n);
                            for (j, wj) in idx.iter().zip(w.iter()) {
                                if *wj != 0.0 {
                                    let q = p + j * strides[a] - pos[a] * strides[a];
                                    du.axpy(*wj, &center[l][q]);
                                }
                            }
                            v[a] = project_algebra_mat(&du.matmul(&ui));
                        }
                        Jet { u, v }
                    })
                    .collect();
                let jets: Vec<Jet> = plans.iter().map(|pl| pl.eval(&ljets, dim)).collect();
                let ctx = NodeCtx { node, plane: i, offset: p, coords, dim };
                f(&ctx, &jets)
            })
            .collect()
    }
}

/// ∫ over the domain of K top-form components computed pointwise from jets.
pub fn integrate<const K: usize, F>(domain: &Domain, fields: &[&GroupField], kernel: F) -> Result<[C64; K]>
where
    F: Fn(&NodeCtx, &[Jet]) -> [C64; K] + Sync,
{
    let mut js = JetStream::new(domain, fields);
    let n0 = domain.axis(0).n;
    let mut plane_sums = vec![[C64::new(0.0, 0.0); K]; n0];
    for (i, sum) in plane_sums.iter_mut().enumerate() {
        let vals = js.plane_map(i, &kernel);
        for k in 0..K {
            let col: Vec<C64> = vals.iter().map(|v| v[k]).collect();
            sum[k] = pairwise_sum_c(&col);
        }
    }
    let scale = domain.orientation() * domain.cell_volume();
    let mut out = [C64::new(0.0, 0.0); K];
    for k in 0..K {
        let col: Vec<C64> = plane_sums.iter().map(|v| v[k]).collect();
        out[k] = pairwise_sum_c(&col) * scale;
        if !out[k].re.is_finite() || !out[k].im.is_finite() {
            return Err(Error::NonFinite("stream integral"));
        }
    }
    Ok(out)
}

/// Like [`integrate`] for a run-time number of outputs.
pub fn integrate_vec<F>(domain: &Domain, fields: &[&GroupField], k: usize, kernel: F) -> Result<Vec<C64>>
where
    F: Fn(&NodeCtx, &[Jet]) -> Vec<C64> + Sync,
{
    let mut js = JetStream::new(domain, fields);
    let n0 = domain.axis(0).n;
    let mut plane_sums = vec![vec![C64::new(0.0, 0.0); k]; n0];
    for (i, sum) in plane_sums.iter_mut().enumerate() {
        let vals = js.plane_map(i, &kernel);
        for (c, s) in sum.iter_mut().enumerate() {
            let col: Vec<C64> = vals.iter().map(|v| v[c]).collect();
            *s = pairwise_sum_c(&col);
        }
    }
    let scale = domain.orientation() * domain.cell_volume();
    let mut out = Vec::with_capacity(k);
    for c in 0..k {
        let col: Vec<C64> = plane_sums.iter().map(|v| v[c]).collect();
        let z = pairwise_sum_c(&col) * scale;
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite("stream integral"));
        }
        out.push(z);
    }
    Ok(out)
}

/// Evaluates `f` at every node, returning results in node order.
pub fn collect<T, F>(domain: &Domain, fields: &[&GroupField], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&NodeCtx, &[Jet]) -> T + Sync,
{
    let mut js = JetStream::new(domain, fields);
    let mut out = Vec::with_capacity(domain.n_nodes());
    for i in 0..domain.axis(0).n {
        out.extend(js.plane_map(i, &f));
    }
    out
}

/// A group field fully sampled on a (small) grid with its jets.
#[derive(Clone, Debug)]
pub struct GroupSample {
    domain: Arc<Domain>,
    rank: usize,
    jets: Vec<Jet>,
}

impl GroupSample {
    pub fn new(domain: Arc<Domain>, field: &GroupField) -> Result<Self> {
        Ok(Self::many(domain, &[field])?.pop().expect("one field"))
    }

    /// Samples several fields sharing leaf evaluations.
    pub fn many(domain: Arc<Domain>, fields: &[&GroupField]) -> Result<Vec<Self>> {
        let mut per: Vec<Vec<Jet>> = fields.iter().map(|_| Vec::with_capacity(domain.n_nodes())).collect();
        {
            let mut js = JetStream::new(&domain, fields);
            for i in 0..domain.axis(0).n {
                for jets in js.plane_map(i, |_, j| j.to_vec()) {
                    for (k, j) in jets.into_iter().enumerate() {
                        per[k].push(j);
                    }
                }
            }
        }
        Ok(fields
            .iter()
            .zip(per)
            .map(|(f, jets)| GroupSample { domain: domain.clone(), rank: f.rank(), jets })
            .collect())
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    #[inline]
    pub fn jet(&self, node: usize) -> &Jet {
        &self.jets[node]
    }

    pub fn jets(&self) -> &[Jet] {
        &self.jets
    }

    pub fn values(&self) -> MatrixFormField {
        MatrixFormField::from_fn(self.domain.clone(), 0, self.rank, |n| vec![self.jets[n].u])
    }

    /// dg g⁻¹.
    pub fn right_mc(&self) -> MatrixFormField {
        let dim = self.domain.dim();
        MatrixFormField::from_fn(self.domain.clone(), 1, self.rank, |n| self.jets[n].v[..dim].to_vec())
    }

    /// g⁻¹dg.
    pub fn left_mc(&self) -> MatrixFormField {
        let dim = self.domain.dim();
        MatrixFormField::from_fn(self.domain.clone(), 1, self.rank, |n| self.jets[n].left(dim)[..dim].to_vec())
    }

    /// Leibniz product sample.
    pub fn mul(&self, b: &GroupSample) -> Result<GroupSample> {
        if self.rank != b.rank {
            return Err(Error::RankMismatch(self.rank, b.rank));
        }
        let dim = self.domain.dim();
        let jets = self.jets.par_iter().zip(&b.jets).map(|(x, y)| x.mul(y, dim)).collect();
        Ok(GroupSample { domain: self.domain.clone(), rank: self.rank, jets })
    }

    pub fn inverse(&self) -> GroupSample {
        let dim = self.domain.dim();
        let jets = self.jets.par_iter().map(|x| x.inv(dim)).collect();
        GroupSample { domain: self.domain.clone(), rank: self.rank, jets }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{instanton, AlgebraPoly, ExpPoly, Profile};
    use crate::geometry::DomainKind;

    #[test]
    fn streamed_mc_matches_form_derivative() {
        let d = Arc::new(Domain::new(DomainKind::S3xI, &[8, 8, 16, 8]).unwrap());
        let xi = Arc::new(AlgebraPoly::random(3, 4, 3, 2, 1.0, true).unwrap());
        let g = GroupField::leaf(ExpPoly { xi, profile: Profile::step(1.0) });
        let s = GroupSample::new(d.clone(), &g).unwrap();
        let du = s.values().exterior_d().unwrap();
        let v = s.right_mc();
        for node in (0..d.n_nodes()).step_by(31) {
            let ui = s.jet(node).u.adjoint();
            for a in 0..4 {
                let w = project_algebra_mat(&du.get(node, a).matmul(&ui));
                assert!(w.dist(&v.get(node, a)) < 1e-13);
            }
        }
    }

    #[test]
    fn leibniz_product_close_to_direct() {
        let d = Arc::new(Domain::new(DomainKind::S3, &[16, 16, 32]).unwrap());
        let f = instanton(1);
        let g = instanton(-2);
        let fg = f.mul(&g).unwrap();
        let direct = {
            // sample the product as one opaque leaf
            let leaf = GroupField::leaf(crate::fields::sources::Embed { inner: fg.clone(), n: 2 });
            GroupSample::new(d.clone(), &leaf).unwrap()
        };
        let lp = GroupSample::new(d.clone(), &fg).unwrap();
        let mut worst: f64 = 0.0;
        for node in 0..d.n_nodes() {
            for a in 0..3 {
                worst = worst.max(direct.jet(node).v[a].dist(&lp.jet(node).v[a]));
            }
        }
        assert!(worst < 1e-2, "{worst}");
    }

    #[test]
    fn plane_cache_evicts() {
        let mut c: PlaneCache<u8> = PlaneCache::new(2);
        let mut calls = 0;
        for i in [0, 1, 0, 2, 0] {
            c.get(i, |_| {
                calls += 1;
                vec![]
            });
        }
        assert_eq!(calls, 4);
    }
}
