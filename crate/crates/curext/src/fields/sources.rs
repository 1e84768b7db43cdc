use std::f64::consts::PI;
use std::sync::Arc;

use crate::algebra::{exp_ah, quaternion, CMat, ExpSpectral, C64};
use crate::error::{Error, Result};
use crate::geometry::Fiber;

use super::{AlgebraPoly, GroupField, MapSource};

/// Quintic smoothstep S(t) = 6t⁵ − 15t⁴ + 10t³ on [0,1], clamped outside.
/// S(0) = 0, S(1) = 1 and S′, S″ vanish at both ends.
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

pub fn smoothstep_deriv(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    30.0 * t * t * (t - 1.0) * (t - 1.0)
}

/// Smooth bump with ρ(0) = ρ(1) = 0, flat ends, peak ρ(c) = 1.
pub fn bump(c: f64, t: f64) -> f64 {
    if t <= c {
        smoothstep(t / c)
    } else {
        smoothstep((1.0 - t) / (1.0 - c))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeProfile {
    One,
    Step,
    Bump(f64),
}

/// Scalar factor s(r, τ) = amp · T(τ) · (r if radial).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Profile {
    pub amp: f64,
    pub time: TimeProfile,
    pub radial: bool,
}

impl Profile {
    pub fn constant(amp: f64) -> Self {
        Profile { amp, time: TimeProfile::One, radial: false }
    }

    pub fn step(amp: f64) -> Self {
        Profile { amp, time: TimeProfile::Step, radial: false }
    }

    /// A bump profile; rejects a peak outside (0,1).
    pub fn bump(amp: f64, c: f64, radial: bool) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::BumpEndpoints(format!("peak {c} not in (0,1)")));
        }
        Ok(Profile { amp, time: TimeProfile::Bump(c), radial })
    }

    #[inline]
    pub fn value(&self, r: f64, tau: f64) -> f64 {
        let t = match self.time {
            TimeProfile::One => 1.0,
            TimeProfile::Step => smoothstep(tau),
            TimeProfile::Bump(c) => bump(c, tau),
        };
        self.amp * t * if self.radial { r } else { 1.0 }
    }
}

#[derive(Clone, Debug)]
pub struct Constant {
    pub value: CMat,
}

impl Constant {
    pub fn identity(n: usize) -> Self {
        Constant { value: CMat::identity(n) }
    }
}

impl MapSource for Constant {
    fn rank(&self) -> usize {
        self.value.n()
    }

    fn eval(&self, _: &[f64; 4], _: f64, _: f64) -> CMat {
        self.value
    }

    fn label(&self) -> String {
        "const".into()
    }
}

/// g_k = (g₁)^k with g₁(p,q,r,s) = [[s+ir, −q+ip], [q+ip, s−ir]].
#[derive(Clone, Debug)]
pub struct Instanton {
    pub k: i32,
}

impl MapSource for Instanton {
    fn rank(&self) -> usize {
        2
    }

    fn eval(&self, x: &[f64; 4], _: f64, _: f64) -> CMat {
        let g = quaternion(x);
        let base = if self.k < 0 { g.adjoint() } else { g };
        let mut out = CMat::identity(2);
        for _ in 0..self.k.unsigned_abs() {
            out = out.matmul(&base);
        }
        out
    }

    fn eval_fiber(&self, x: &[f64; 4], _: &Fiber, out: &mut [CMat]) {
        let v = self.eval(x, 1.0, 0.0);
        out.fill(v);
    }

    fn label(&self) -> String {
        format!("g_{}", self.k)
    }
}

/// exp(s(r,τ)·ξ(X)).
#[derive(Clone, Debug)]
pub struct ExpPoly {
    pub xi: Arc<AlgebraPoly>,
    pub profile: Profile,
}

impl MapSource for ExpPoly {
    fn rank(&self) -> usize {
        self.xi.rank()
    }

    fn eval(&self, x: &[f64; 4], r: f64, tau: f64) -> CMat {
        let ang = 2.0 * PI * tau;
        let xs = [x[0], x[1], x[2], x[3], r * ang.cos(), r * ang.sin()];
        exp_ah(&self.xi.eval(&xs).scale_re(self.profile.value(r, tau)))
    }

    fn eval_fiber(&self, x: &[f64; 4], fiber: &Fiber, out: &mut [CMat]) {
        if self.xi.nvars() == 4 {
            // ξ depends on x only: diagonalize once per S³ point
            let sp = ExpSpectral::new(&self.xi.eval_s3(x));
            let mut k = 0;
            for &r in &fiber.r {
                for &t in &fiber.tau {
                    out[k] = sp.exp(self.profile.value(r, t));
                    k += 1;
                }
            }
        } else {
            let mut k = 0;
            for &r in &fiber.r {
                for &t in &fiber.tau {
                    out[k] = self.eval(x, r, t);
                    k += 1;
                }
            }
        }
    }

    fn label(&self) -> String {
        format!("exp({:?}·ξ[seed {}])", self.profile, self.xi.spec().seed)
    }
}

/// Block embedding diag(u, 1, …).
#[derive(Clone, Debug)]
pub struct Embed {
    pub inner: GroupField,
    pub n: usize,
}

impl MapSource for Embed {
    fn rank(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64; 4], r: f64, tau: f64) -> CMat {
        self.inner.eval(x, r, tau).embed(self.n)
    }

    fn eval_fiber(&self, x: &[f64; 4], fiber: &Fiber, out: &mut [CMat]) {
        self.inner.eval_fiber(x, fiber, out);
        for o in out.iter_mut() {
            *o = o.embed(self.n);
        }
    }

    fn label(&self) -> String {
        format!("embed{}({})", self.n, self.inner.label())
    }
}

/// Leaf evaluated with the radius and/or loop parameter frozen.
#[derive(Clone, Debug)]
pub struct Restrict {
    pub inner: Arc<dyn MapSource>,
    pub r: Option<f64>,
    pub tau: Option<f64>,
}

impl MapSource for Restrict {
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    fn eval(&self, x: &[f64; 4], r: f64, tau: f64) -> CMat {
        self.inner.eval(x, self.r.unwrap_or(r), self.tau.unwrap_or(tau))
    }

    fn eval_fiber(&self, x: &[f64; 4], fiber: &Fiber, out: &mut [CMat]) {
        let f = Fiber {
            r: fiber.r.iter().map(|&r| self.r.unwrap_or(r)).collect(),
            tau: fiber.tau.iter().map(|&t| self.tau.unwrap_or(t)).collect(),
        };
        self.inner.eval_fiber(x, &f, out)
    }

    fn label(&self) -> String {
        format!("{}|r={:?},τ={:?}", self.inner.label(), self.r, self.tau)
    }
}

/// a(r,τ) = [[1,0,0],[0, r e^{−2πiτ}, √(1−r²)],[0, −√(1−r²), r e^{2πiτ}]].
pub fn a_matrix(r: f64, tau: f64) -> CMat {
    let z = C64::from_polar(r, -2.0 * PI * tau);
    let w = C64::new((1.0 - r * r).max(0.0).sqrt(), 0.0);
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    CMat::from_rows(&[&[one, o, o], &[o, z, w], &[o, -w, z.conj()]])
}

/// Radial profile of the disk filling. Using sin(πr/2) instead of r keeps
/// every entry of a(·,τ) smooth up to the rim, where √(1−r²) alone has an
/// unbounded derivative; the boundary loop and the center are unchanged.
pub fn radial(r: f64) -> f64 {
    (0.5 * PI * r).sin()
}

fn h_matrix(tau: f64) -> CMat {
    let z = C64::from_polar(1.0, PI * tau);
    let o = C64::new(0.0, 0.0);
    CMat::from_rows(&[&[z, o], &[o, z.conj()]])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RotationMode {
    /// Rank 3: a(r,s) f̃ a(r,s)⁻¹ (equal to D(s) f̃ D(s)⁻¹ at r = 1).
    Bulk,
    /// Rank 2: h(s) f h(s)⁻¹, h(s) = diag(e^{iπs}, e^{−iπs}).
    Su2,
}

/// Rotation of a rank-2 map f in SU(3) (or inside SU(2)), with s = τ or the
/// smoothstep S(τ); with `commutator` the result is right-multiplied by f⁻¹
/// (f̃⁻¹), which turns the loop into one that starts and ends at 1.
#[derive(Clone, Debug)]
pub struct Rotation {
    pub f: GroupField,
    pub mode: RotationMode,
    pub reparam: bool,
    pub commutator: bool,
}

impl Rotation {
    fn apply(&self, fx: &CMat, r: f64, tau: f64) -> CMat {
        let s = if self.reparam { smoothstep(tau) } else { tau };
        match self.mode {
            RotationMode::Bulk => {
                let ft = fx.embed(3);
                let a = a_matrix(radial(r), s);
                let u = a.matmul(&ft).matmul(&a.adjoint());
                if self.commutator {
                    u.matmul(&ft.adjoint())
                } else {
                    u
                }
            }
            RotationMode::Su2 => {
                let h = h_matrix(s);
                let u = h.matmul(fx).matmul(&h.adjoint());
                if self.commutator {
                    u.matmul(&fx.adjoint())
                } else {
                    u
                }
            }
        }
    }
}

impl MapSource for Rotation {
    fn rank(&self) -> usize {
        match self.mode {
            RotationMode::Bulk => 3,
            RotationMode::Su2 => 2,
        }
    }

    fn eval(&self, x: &[f64; 4], r: f64, tau: f64) -> CMat {
        self.apply(&self.f.eval(x, 1.0, 0.0), r, tau)
    }

    fn eval_fiber(&self, x: &[f64; 4], fiber: &Fiber, out: &mut [CMat]) {
        let fx = self.f.eval(x, 1.0, 0.0);
        let mut k = 0;
        for &r in &fiber.r {
            for &t in &fiber.tau {
                out[k] = self.apply(&fx, r, t);
                k += 1;
            }
        }
    }

    fn label(&self) -> String {
        format!(
            "rot{}{}{}({})",
            if self.mode == RotationMode::Su2 { "2" } else { "3" },
            if self.reparam { "S" } else { "" },
            if self.commutator { "·f⁻¹" } else { "" },
            self.f.label()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_ends() {
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        assert_eq!(smoothstep_deriv(0.0), 0.0);
        assert_eq!(smoothstep_deriv(1.0), 0.0);
        let h = 1e-6;
        let fd = (smoothstep(0.3 + h) - smoothstep(0.3 - h)) / (2.0 * h);
        assert!((fd - smoothstep_deriv(0.3)).abs() < 1e-8);
    }

    #[test]
    fn bump_shape() {
        assert_eq!(bump(0.4, 0.0), 0.0);
        assert!(bump(0.4, 1.0).abs() < 1e-15);
        assert!((bump(0.4, 0.4) - 1.0).abs() < 1e-15);
        assert!(Profile::bump(1.0, 1.2, false).is_err());
    }
}
