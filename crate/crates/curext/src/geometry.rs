//! Midpoint chart grids on S³, T = S³×[0,1], M = S³×S¹ and Q = S³×D².
//!
//! Every domain is the S³ chart grid (ψ, θ, φ) times a *fiber* grid: nothing
//! (S³), the interval t (T), the loop angle α (M), or the polar disk (r, α)
//! (Q). Nodes are stored S³-node-major, fiber index last, which is also the
//! axis order of the chart coordinates used for form components.
//!
//! The loop parameter τ ∈ [0,1] of paths and loops relates to the angle by
//! α = 2πτ; derivatives are taken in the chart coordinate itself, so the 2π
//! appears automatically.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::algebra::C64;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainKind {
    S3,
    S3xI,
    S3xS1,
    S3xD2,
}

impl DomainKind {
    pub fn name(&self) -> &'static str {
        match self {
            DomainKind::S3 => "S3",
            DomainKind::S3xI => "S3xI",
            DomainKind::S3xS1 => "S3xS1",
            DomainKind::S3xD2 => "S3xD2",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainKind::S3 => 3,
            DomainKind::S3xI | DomainKind::S3xS1 => 4,
            DomainKind::S3xD2 => 5,
        }
    }

    /// Orientation of the chart frame that the quadrature uses.
    ///
    /// Q is positively oriented in (ψ,θ,φ,r,α). Its boundary M = S³×S¹ then
    /// carries the outward-normal-first orientation, which is negative in
    /// (ψ,θ,φ,α); T uses the same sign so that ∂T = S³×{1} − S³×{0}.
    pub fn default_orientation(&self) -> f64 {
        match self {
            DomainKind::S3 | DomainKind::S3xD2 => 1.0,
            DomainKind::S3xI | DomainKind::S3xS1 => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl Axis {
    fn new(name: &str, n: usize, lo: f64, hi: f64, periodic: bool) -> Self {
        Axis { name: name.to_string(), n, lo, hi, periodic }
    }

    #[inline]
    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / self.n as f64
    }

    /// Midpoint node `lo + (i + ½)h`.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.h()
    }
}

/// Tensor grid of fiber points: `r` outer, `tau` inner.
#[derive(Clone, Debug, PartialEq)]
pub struct Fiber {
    pub r: Vec<f64>,
    pub tau: Vec<f64>,
}

impl Fiber {
    pub fn point(tau: f64) -> Self {
        Fiber { r: vec![1.0], tau: vec![tau] }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.r.len() * self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    kind: DomainKind,
    axes: Vec<Axis>,
    orientation: f64,
    fiber: Fiber,
    s3_points: Vec<[f64; 4]>,
}

/// Chart map (ψ,θ,φ) ↦ (sinψ sinθ cosφ, sinψ sinθ sinφ, sinψ cosθ, cosψ).
#[inline]
pub fn chart_to_ambient(psi: f64, theta: f64, phi: f64) -> [f64; 4] {
    let (sp, cp) = psi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let (sf, cf) = phi.sin_cos();
    [sp * st * cf, sp * st * sf, sp * ct, cp]
}

/// The basepoint p₀ = (0,0,0,1), the chart image of ψ = 0.
pub const BASEPOINT: [f64; 4] = [0.0, 0.0, 0.0, 1.0];

impl Domain {
    pub fn new(kind: DomainKind, res: &[usize]) -> Result<Self> {
        let expected = kind.dim();
        if res.len() != expected {
            return Err(Error::ResolutionCount { kind: kind.name(), expected, got: res.len() });
        }
        let mut axes = vec![
            Axis::new("psi", res[0], 0.0, PI, false),
            Axis::new("theta", res[1], 0.0, PI, false),
            Axis::new("phi", res[2], 0.0, 2.0 * PI, true),
        ];
        match kind {
            DomainKind::S3 => {}
            DomainKind::S3xI => axes.push(Axis::new("t", res[3], 0.0, 1.0, false)),
            DomainKind::S3xS1 => axes.push(Axis::new("alpha", res[3], 0.0, 2.0 * PI, true)),
            DomainKind::S3xD2 => {
                axes.push(Axis::new("r", res[3], 0.0, 1.0, false));
                axes.push(Axis::new("alpha", res[4], 0.0, 2.0 * PI, true));
            }
        }
        for a in &axes {
            if a.n < 8 {
                let name: &'static str = match a.name.as_str() {
                    "psi" => "psi",
                    "theta" => "theta",
                    "phi" => "phi",
                    "t" => "t",
                    "r" => "r",
                    _ => "alpha",
                };
                return Err(Error::ResolutionTooSmall(a.n, name));
            }
        }
        let fiber = match kind {
            DomainKind::S3 => Fiber::point(0.0),
            DomainKind::S3xI => Fiber { r: vec![1.0], tau: (0..res[3]).map(|i| axes[3].node(i)).collect() },
            DomainKind::S3xS1 => Fiber {
                r: vec![1.0],
                tau: (0..res[3]).map(|i| axes[3].node(i) / (2.0 * PI)).collect(),
            },
            DomainKind::S3xD2 => Fiber {
                r: (0..res[3]).map(|i| axes[3].node(i)).collect(),
                tau: (0..res[4]).map(|i| axes[4].node(i) / (2.0 * PI)).collect(),
            },
        };
        let mut s3_points = Vec::with_capacity(res[0] * res[1] * res[2]);
        for i in 0..res[0] {
            for j in 0..res[1] {
                for k in 0..res[2] {
                    s3_points.push(chart_to_ambient(axes[0].node(i), axes[1].node(j), axes[2].node(k)));
                }
            }
        }
        Ok(Domain { kind, axes, orientation: kind.default_orientation(), fiber, s3_points })
    }

    pub fn with_orientation(mut self, sign: f64) -> Self {
        self.orientation = sign.signum();
        self
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn resolutions(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    pub fn n_nodes(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn n_s3(&self) -> usize {
        self.s3_points.len()
    }

    pub fn fiber(&self) -> &Fiber {
        &self.fiber
    }

    pub fn n_fiber(&self) -> usize {
        self.fiber.len()
    }

    pub fn s3_points(&self) -> &[[f64; 4]] {
        &self.s3_points
    }

    /// The S³ factor with the same (ψ,θ,φ) resolutions.
    pub fn s3(&self) -> Domain {
        Domain::new(DomainKind::S3, &self.resolutions()[..3]).expect("S3 factor of a valid domain")
    }

    /// Number of nodes in one ψ-plane (all axes but the first).
    pub fn plane_len(&self) -> usize {
        self.n_nodes() / self.axes[0].n
    }

    /// Stride of `axis` in the node-major layout.
    pub fn stride(&self, axis: usize) -> usize {
        self.axes[axis + 1..].iter().map(|a| a.n).product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.h()).product()
    }

    /// Chart coordinates of a node.
    pub fn coords(&self, mut node: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.dim()];
        for (a, ax) in self.axes.iter().enumerate().rev() {
            c[a] = ax.node(node % ax.n);
            node /= ax.n;
        }
        c
    }

    /// Orientation-signed midpoint rule Σ f·ΔV for the single chart
    /// component of a top-degree form.
    pub fn integrate_top(&self, samples: &[f64]) -> Result<f64> {
        self.check_len(samples.len())?;
        Ok(self.orientation * self.cell_volume() * pairwise_sum(samples))
    }

    pub fn integrate_top_c(&self, samples: &[C64]) -> Result<C64> {
        self.check_len(samples.len())?;
        Ok(pairwise_sum_c(samples) * (self.orientation * self.cell_volume()))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_nodes() {
            return Err(Error::SampleCount { expected: self.n_nodes(), got: len });
        }
        Ok(())
    }

    /// Stencil of the first derivative at index `i` along `axis`:
    /// node indices and weights (already divided by h).
    #[inline]
    pub fn stencil(&self, axis: usize, i: usize) -> ([usize; STENCIL], [f64; STENCIL]) {
        let ax = &self.axes[axis];
        stencil(i, ax.n, ax.periodic, ax.h())
    }

    /// ∂/∂x^axis of a node-major array with `block` values per node.
    pub fn chart_derivative(&self, samples: &[C64], block: usize, axis: usize) -> Result<Vec<C64>> {
        if block == 0 || samples.len() != self.n_nodes() * block {
            return Err(Error::SampleCount { expected: self.n_nodes() * block, got: samples.len() });
        }
        let n = self.axes[axis].n;
        let inner = self.stride(axis) * block;
        let outer = samples.len() / (n * inner);
        let mut out = vec![C64::new(0.0, 0.0); samples.len()];
        for o in 0..outer {
            let base = o * n * inner;
            for i in 0..n {
                let (idx, w) = self.stencil(axis, i);
                let dst = &mut out[base + i * inner..base + (i + 1) * inner];
                for (j, wj) in idx.iter().zip(w.iter()) {
                    if *wj == 0.0 {
                        continue;
                    }
                    let src = &samples[base + j * inner..base + (j + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += s * wj;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Values on the face `axis = lo` (or `hi`) by cubic extrapolation from the
    /// four nearest midpoints (4th order). The result is laid out on the grid
    /// with that axis removed.
    pub fn extrapolate_boundary(&self, samples: &[C64], block: usize, axis: usize, upper: bool) -> Result<Vec<C64>> {
        if samples.len() != self.n_nodes() * block {
            return Err(Error::SampleCount { expected: self.n_nodes() * block, got: samples.len() });
        }
        const W: [f64; 4] = [35.0 / 16.0, -35.0 / 16.0, 21.0 / 16.0, -5.0 / 16.0];
        let n = self.axes[axis].n;
        let inner = self.stride(axis) * block;
        let outer = samples.len() / (n * inner);
        let mut out = vec![C64::new(0.0, 0.0); outer * inner];
        for o in 0..outer {
            let dst = &mut out[o * inner..(o + 1) * inner];
            for (k, w) in W.iter().enumerate() {
                let i = if upper { n - 1 - k } else { k };
                let src = &samples[o * n * inner + i * inner..o * n * inner + (i + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += s * w;
                }
            }
        }
        Ok(out)
    }
}

/// Width of the first-derivative stencils.
pub const STENCIL: usize = 7;

/// 6th-order first-derivative stencils: central in the interior and on
/// periodic axes, one-sided (7 points) at the first three and last three
/// nodes of a non-periodic axis.
#[inline]
pub fn stencil(i: usize, n: usize, periodic: bool, h: f64) -> ([usize; STENCIL], [f64; STENCIL]) {
    let c = 1.0 / (60.0 * h);
    const C: [f64; 7] = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];
    const E: [[f64; 7]; 3] = [
        [-147.0, 360.0, -450.0, 400.0, -225.0, 72.0, -10.0],
        [-10.0, -77.0, 150.0, -100.0, 50.0, -15.0, 2.0],
        [2.0, -24.0, -35.0, 80.0, -30.0, 8.0, -1.0],
    ];
    let w = |e: &[f64; 7], s: f64| e.map(|x| s * c * x);
    if periodic || (i >= 3 && i + 3 < n) {
        let m = |k: isize| ((i as isize + k).rem_euclid(n as isize)) as usize;
        return ([m(-3), m(-2), m(-1), i, m(1), m(2), m(3)], w(&C, 1.0));
    }
    if i < 3 {
        (std::array::from_fn(|k| k), w(&E[i], 1.0))
    } else {
        (std::array::from_fn(|k| n - 1 - k), w(&E[n - 1 - i], -1.0))
    }
}

const PAIRWISE_BLOCK: usize = 64;

/// Deterministic pairwise (cascade) summation.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= PAIRWISE_BLOCK {
        return x.iter().sum();
    }
    let mid = x.len() / 2;
    pairwise_sum(&x[..mid]) + pairwise_sum(&x[mid..])
}

pub fn pairwise_sum_c(x: &[C64]) -> C64 {
    if x.len() <= PAIRWISE_BLOCK {
        return x.iter().sum();
    }
    let mid = x.len() / 2;
    pairwise_sum_c(&x[..mid]) + pairwise_sum_c(&x[mid..])
}

pub fn make_domain(kind: DomainKind, res: &[usize]) -> Result<Domain> {
    Domain::new(kind, res)
}

/// Default desk-scale resolutions.
pub mod defaults {
    pub const S3: [usize; 3] = [16, 16, 32];
    pub const NT: usize = 16;
    pub const DISK: [usize; 2] = [12, 48];
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn node_counts_and_volume() {
        let d = Domain::new(DomainKind::S3, &[16, 16, 32]).unwrap();
        assert_eq!(d.n_nodes(), 8192);
        let ones = vec![1.0; d.n_nodes()];
        assert!((d.integrate_top(&ones).unwrap() - 2.0 * PI.powi(3)).abs() < 1e-11);
        let q = Domain::new(DomainKind::S3xD2, &[8, 8, 16, 8, 16]).unwrap();
        assert_eq!(q.n_nodes(), 8 * 8 * 16 * 8 * 16);
        assert_eq!(q.n_fiber(), 128);
        assert!(Domain::new(DomainKind::S3, &[4, 16, 32]).is_err());
        assert!(Domain::new(DomainKind::S3xI, &[16, 16, 32]).is_err());
    }

    #[test]
    fn basepoint_is_not_a_node() {
        let d = Domain::new(DomainKind::S3, &[8, 8, 16]).unwrap();
        for p in d.s3_points() {
            let n: f64 = p.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-14);
            assert!(p.iter().zip(BASEPOINT.iter()).map(|(a, b)| (a - b).abs()).sum::<f64>() > 1e-3);
        }
        assert_eq!(chart_to_ambient(0.0, 1.0, 2.0), [0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn odd_integrand_vanishes_and_orientation_flips() {
        let d = Domain::new(DomainKind::S3, &[16, 16, 32]).unwrap();
        let f: Vec<f64> = (0..d.n_nodes()).map(|i| d.coords(i)[2].sin() * d.coords(i)[0].sin()).collect();
        assert!(d.integrate_top(&f).unwrap().abs() < 1e-12);
        let g: Vec<f64> = (0..d.n_nodes()).map(|i| d.coords(i)[0].sin()).collect();
        let a = d.integrate_top(&g).unwrap();
        let b = d.clone().with_orientation(-1.0).integrate_top(&g).unwrap();
        assert_eq!(a, -b);
    }

    #[test]
    fn quadrature_second_order() {
        // ∫ sin²ψ sinθ e^{cos φ} over the chart box: exact = (π/2)(2)(2π I0(1))
        let exact = (PI / 2.0) * 2.0 * 2.0 * PI * 1.266_065_877_752_008_4;
        let err = |n: usize| {
            let d = Domain::new(DomainKind::S3, &[n, n, 2 * n]).unwrap();
            let f: Vec<f64> = (0..d.n_nodes())
                .map(|i| {
                    let c = d.coords(i);
                    c[0].sin().powi(2) * c[1].sin() * c[2].cos().exp()
                })
                .collect();
            (d.integrate_top(&f).unwrap() - exact).abs()
        };
        let (e1, e2) = (err(8), err(16));
        assert!(e1 / e2 >= 4.0, "{e1} {e2}");
    }

    #[test]
    fn derivative_accuracy() {
        let d = Domain::new(DomainKind::S3, &[16, 16, 32]).unwrap();
        let f: Vec<C64> = (0..d.n_nodes()).map(|i| re((2.0 * d.coords(i)[2]).sin())).collect();
        let df = d.chart_derivative(&f, 1, 2).unwrap();
        let err = (0..d.n_nodes())
            .map(|i| (df[i].re - 2.0 * (2.0 * d.coords(i)[2]).cos()).abs())
            .fold(0.0, f64::max);
        assert!(err < 2e-3, "{err}");
        let s: Vec<C64> = (0..d.n_nodes()).map(|i| re(d.coords(i)[0].cos())).collect();
        let ds = d.chart_derivative(&s, 1, 0).unwrap();
        let err = (0..d.n_nodes()).map(|i| (ds[i].re + d.coords(i)[0].sin()).abs()).fold(0.0, f64::max);
        assert!(err < 5e-4, "{err}");
        let c = vec![re(3.0); d.n_nodes()];
        assert!(d.chart_derivative(&c, 1, 0).unwrap().iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn stencils_exact_on_sextics() {
        let h = 0.1;
        for n in [8usize, 12] {
            for i in 0..n {
                let (idx, w) = stencil(i, n, false, h);
                let x = |j: usize| (j as f64 + 0.5) * h;
                let xi = x(i);
                let d: f64 = idx.iter().zip(w.iter()).map(|(j, wj)| wj * (x(*j) - 0.3).powi(6)).sum();
                assert!((d - 6.0 * (xi - 0.3).powi(5)).abs() < 1e-10, "n={n} i={i}");
            }
        }
    }

    #[test]
    fn boundary_extrapolation() {
        let d = Domain::new(DomainKind::S3xI, &[8, 8, 16, 16]).unwrap();
        let f: Vec<C64> = (0..d.n_nodes()).map(|i| re((1.0 + d.coords(i)[3]).powi(3))).collect();
        let lo = d.extrapolate_boundary(&f, 1, 3, false).unwrap();
        let hi = d.extrapolate_boundary(&f, 1, 3, true).unwrap();
        assert_eq!(lo.len(), d.n_s3());
        assert!(lo.iter().all(|z| (z.re - 1.0).abs() < 1e-12));
        assert!(hi.iter().all(|z| (z.re - 8.0).abs() < 1e-12));
    }

    #[test]
    fn pairwise_matches_naive() {
        let x: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        assert!((pairwise_sum(&x) - x.iter().sum::<f64>()).abs() < 1e-12);
    }
}
