use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{su_basis, CMat};
use crate::error::Result;
use crate::geometry::{Domain, BASEPOINT};

use super::ambient_jet;

/// An su(n)-valued polynomial of low degree in ambient coordinates.
///
/// With `nvars = 4` the variables are x ∈ S³ ⊂ R⁴; with `nvars = 6` they are
/// x together with y = (r cos 2πτ, r sin 2πτ). Random instances are drawn
/// from a seeded generator so that every field is reproducible from
/// (seed, amplitude, rank, degree).
#[derive(Clone, Debug)]
pub struct AlgebraPoly {
    spec: PolySpec,
    monomials: Vec<Vec<usize>>,
    coef: Vec<CMat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolySpec {
    pub rank: usize,
    pub nvars: usize,
    pub degree: usize,
    pub seed: u64,
    pub amp: f64,
    pub based: bool,
}

fn monomials(nvars: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut last = vec![vec![]];
    for _ in 0..degree {
        let mut next = Vec::new();
        for m in &last {
            let start = m.last().copied().unwrap_or(0);
            for v in start..nvars {
                let mut mm: Vec<usize> = m.clone();
                mm.push(v);
                next.push(mm);
            }
        }
        out.extend(next.iter().cloned());
        last = next;
    }
    out
}

impl AlgebraPoly {
    /// Random polynomial; coefficients of degree-d monomials are uniform in
    /// [−amp/2^d, amp/2^d] along each su(n) basis direction. With `based`
    /// the constant term is shifted so that the value at p₀ (and y = (1,0))
    /// vanishes.
    pub fn random(rank: usize, nvars: usize, degree: usize, seed: u64, amp: f64, based: bool) -> Result<Self> {
        let basis = su_basis(rank)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let monos = monomials(nvars, degree);
        let coef: Vec<CMat> = monos
            .iter()
            .map(|m| {
                let s = amp / f64::powi(2.0, m.len() as i32);
                let mut c = CMat::zeros(rank);
                for e in &basis {
                    c.axpy(rng.gen_range(-s..s), e.mat());
                }
                c
            })
            .collect();
        let mut p = AlgebraPoly {
            spec: PolySpec { rank, nvars, degree, seed, amp, based },
            monomials: monos,
            coef,
        };
        if based {
            let v = p.eval(&[BASEPOINT[0], BASEPOINT[1], BASEPOINT[2], BASEPOINT[3], 1.0, 0.0]);
            p.coef[0] -= v;
        }
        Ok(p)
    }

    pub fn zero(rank: usize, nvars: usize) -> Self {
        AlgebraPoly {
            spec: PolySpec { rank, nvars, degree: 0, seed: 0, amp: 0.0, based: true },
            monomials: vec![vec![]],
            coef: vec![CMat::zeros(rank)],
        }
    }

    /// Multiplies every coefficient by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut p = self.clone();
        p.spec.amp *= s;
        for c in &mut p.coef {
            *c = c.scale_re(s);
        }
        p
    }

    pub fn spec(&self) -> &PolySpec {
        &self.spec
    }

    pub fn rank(&self) -> usize {
        self.spec.rank
    }

    pub fn nvars(&self) -> usize {
        self.spec.nvars
    }

    /// Value at ambient point X (only the first `nvars` entries are read).
    pub fn eval(&self, xs: &[f64]) -> CMat {
        let mut acc = CMat::zeros(self.spec.rank);
        for (m, c) in self.monomials.iter().zip(&self.coef) {
            let v: f64 = m.iter().map(|&i| xs[i]).product();
            acc.axpy(v, c);
        }
        acc
    }

    pub fn eval_s3(&self, x: &[f64; 4]) -> CMat {
        self.eval(&[x[0], x[1], x[2], x[3], 1.0, 0.0])
    }

    /// Value and gradient with respect to the ambient variables.
    pub fn eval_grad(&self, xs: &[f64]) -> (CMat, Vec<CMat>) {
        let n = self.spec.rank;
        let mut val = CMat::zeros(n);
        let mut grad = vec![CMat::zeros(n); self.spec.nvars];
        for (m, c) in self.monomials.iter().zip(&self.coef) {
            let v: f64 = m.iter().map(|&i| xs[i]).product();
            val.axpy(v, c);
            for k in 0..m.len() {
                let d: f64 = m.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, &i)| xs[i]).product();
                grad[m[k]].axpy(d, c);
            }
        }
        (val, grad)
    }

    /// The 0-form ξ sampled on a grid, with its chart differential dξ computed
    /// analytically from the ambient gradient.
    pub fn sample(&self, domain: &std::sync::Arc<Domain>) -> (crate::forms::MatrixFormField, crate::forms::MatrixFormField) {
        use crate::forms::MatrixFormField;
        let dim = domain.dim();
        let xi = MatrixFormField::from_fn(domain.clone(), 0, self.rank(), |node| {
            let (x, _) = ambient_jet(domain, &domain.coords(node));
            vec![self.eval(&x)]
        });
        let dxi = MatrixFormField::from_fn(domain.clone(), 1, self.rank(), |node| {
            let (x, jac) = ambient_jet(domain, &domain.coords(node));
            let (_, g) = self.eval_grad(&x);
            (0..dim)
                .map(|a| {
                    let mut m = CMat::zeros(self.rank());
                    for (mu, gm) in g.iter().enumerate() {
                        m.axpy(jac[a][mu], gm);
                    }
                    m
                })
                .collect()
        });
        (xi, dxi)
    }
}

/// An su(n)-valued 1-form Σ_μ A_μ(X) dX^μ on the ambient space, pulled back to
/// chart components. Used for probe connections on S³ and for connection-like
/// forms on the product domains.
#[derive(Clone, Debug)]
pub struct PolyForm {
    comps: Vec<AlgebraPoly>,
}

impl PolyForm {
    pub fn random(rank: usize, nvars: usize, degree: usize, seed: u64, amp: f64) -> Result<Self> {
        let comps = (0..nvars)
            .map(|mu| AlgebraPoly::random(rank, nvars, degree, seed.wrapping_mul(31).wrapping_add(mu as u64 + 1), amp, false))
            .collect::<Result<_>>()?;
        Ok(PolyForm { comps })
    }

    pub fn zero(rank: usize, nvars: usize) -> Self {
        PolyForm { comps: (0..nvars).map(|_| AlgebraPoly::zero(rank, nvars)).collect() }
    }

    pub fn scaled(&self, s: f64) -> Self {
        PolyForm { comps: self.comps.iter().map(|c| c.scaled(s)).collect() }
    }

    pub fn rank(&self) -> usize {
        self.comps[0].rank()
    }

    /// Chart components A_a at a node.
    pub fn at(&self, domain: &Domain, coords: &[f64]) -> Vec<CMat> {
        let (x, jac) = ambient_jet(domain, coords);
        let vals: Vec<CMat> = self.comps.iter().map(|p| p.eval(&x)).collect();
        (0..domain.dim())
            .map(|a| {
                let mut m = CMat::zeros(self.rank());
                for (mu, v) in vals.iter().enumerate() {
                    m.axpy(jac[a][mu], v);
                }
                m
            })
            .collect()
    }

    /// Chart components of A and of its exterior derivative dA (analytic).
    pub fn with_d(&self, domain: &Domain, coords: &[f64]) -> (Vec<CMat>, Vec<CMat>) {
        let dim = domain.dim();
        let (x, jac) = ambient_jet(domain, coords);
        let n = self.rank();
        let vg: Vec<(CMat, Vec<CMat>)> = self.comps.iter().map(|p| p.eval_grad(&x)).collect();
        let a: Vec<CMat> = (0..dim)
            .map(|c| {
                let mut m = CMat::zeros(n);
                for (mu, (v, _)) in vg.iter().enumerate() {
                    m.axpy(jac[c][mu], v);
                }
                m
            })
            .collect();
        // (dA)_{bc} = Σ_{μν} ∂_ν A_μ (J_{νb} J_{μc} − J_{νc} J_{μb})
        let t = crate::forms::tables(dim);
        let da: Vec<CMat> = t.combos[2]
            .iter()
            .map(|bc| {
                let (b, c) = (bc[0], bc[1]);
                let mut m = CMat::zeros(n);
                for (mu, (_, g)) in vg.iter().enumerate() {
                    for (nu, gn) in g.iter().enumerate() {
                        let w = jac[b][nu] * jac[c][mu] - jac[c][nu] * jac[b][mu];
                        if w != 0.0 {
                            m.axpy(w, gn);
                        }
                    }
                }
                m
            })
            .collect();
        (a, da)
    }

    /// Samples the pulled-back form on a grid.
    pub fn sample(&self, domain: &std::sync::Arc<Domain>) -> crate::forms::MatrixFormField {
        crate::forms::MatrixFormField::from_fn(domain.clone(), 1, self.rank(), |node| self.at(domain, &domain.coords(node)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainKind;
    use std::sync::Arc;

    #[test]
    fn monomial_count() {
        assert_eq!(monomials(4, 3).len(), 35);
        assert_eq!(monomials(6, 2).len(), 28);
    }

    #[test]
    fn based_poly_vanishes_at_basepoint() {
        let p = AlgebraPoly::random(3, 4, 3, 7, 1.0, true).unwrap();
        assert!(p.eval_s3(&BASEPOINT).norm_max() < 1e-15);
        let v = p.eval_s3(&[0.5, 0.5, 0.5, 0.5]);
        assert!((v + v.adjoint()).norm_max() < 1e-14 && v.trace().norm() < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let p = AlgebraPoly::random(2, 6, 3, 3, 1.0, false).unwrap();
        let x = [0.1, -0.3, 0.5, 0.2, 0.7, -0.4];
        let (_, g) = p.eval_grad(&x);
        for k in 0..6 {
            let mut a = x;
            let mut b = x;
            a[k] += 1e-6;
            b[k] -= 1e-6;
            let fd = (p.eval(&a) - p.eval(&b)).scale_re(0.5e6);
            assert!(fd.dist(&g[k]) < 1e-8);
        }
    }

    #[test]
    fn analytic_d_matches_grid_d() {
        let d = Arc::new(Domain::new(DomainKind::S3, &[16, 16, 32]).unwrap());
        let f = PolyForm::random(2, 4, 2, 1, 1.0).unwrap();
        let a = f.sample(&d);
        let da = a.exterior_d().unwrap();
        let mut worst: f64 = 0.0;
        for node in (0..d.n_nodes()).step_by(13) {
            let (_, an) = f.with_d(&d, &d.coords(node));
            for (c, m) in an.iter().enumerate() {
                worst = worst.max(m.dist(&da.get(node, c)));
            }
        }
        // one-sided edge stencils dominate the error at this resolution
        assert!(worst < 1e-2, "{worst}");
    }
}
