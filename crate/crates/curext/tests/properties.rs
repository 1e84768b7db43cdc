use std::f64::consts::PI;
use std::sync::Arc;

use curext::algebra::{bracket, matrix_exp, su_basis, AlgebraElement, CMat, C64};
use curext::cochains::{c21_form, trace_lemma_form, PForm};
use curext::extension::{bracket_ext, dual_act, phase_distance, AffineDual, ExtAlgebraElement, ExtContext};
use curext::fields::{path_from_target, AlgebraPoly, Generator, GroupField, GroupSample, PolyForm};
use curext::forms::MatrixFormField;
use curext::geometry::{Domain, DomainKind};
use proptest::prelude::*;

fn element(n: usize, coeffs: &[f64]) -> AlgebraElement {
    let basis = su_basis(n).unwrap();
    basis.iter().zip(coeffs).fold(AlgebraElement::zero(n), |acc, (e, &c)| acc + e.scale(c))
}

fn coeffs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5..1.5f64, len)
}

fn one_form(n: usize, dim: usize, c: &[f64]) -> PForm {
    let k = n * n - 1;
    PForm::new(1, (0..dim).map(|a| element(n, &c[a * k..(a + 1) * k]).mat().clone()).collect())
}

fn field(rank: usize, k: i32, seed: u64) -> GroupField {
    let xi = Arc::new(AlgebraPoly::random(rank, 4, 2, seed, 0.6, true).unwrap());
    Generator::new(k, xi).unwrap().target().clone()
}

fn small_s3() -> Arc<Domain> {
    Arc::new(Domain::new(DomainKind::S3, &[8, 8, 16]).unwrap())
}

/// An affine dual whose kernel is a generic (not algebra-valued) 2-form.
fn dual(s3: &Arc<Domain>, rank: usize, seed: u64, base: f64) -> AffineDual {
    let a = PolyForm::random(rank, 4, 2, seed, 0.5).unwrap().sample(s3);
    let k = MatrixFormField::from_fn(s3.clone(), 2, rank, |n| {
        let a = a.at(n);
        vec![a[0].matmul(&a[1]), a[1].matmul(&a[2]), a[0].matmul(&a[2])]
    });
    AffineDual::new(base, k).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exp_is_special_unitary(c in coeffs(8)) {
        let x = element(3, &c);
        let g = matrix_exp(&x).unwrap();
        let u = g.mat();
        prop_assert!(u.matmul(&u.adjoint()).dist(&CMat::identity(3)) < 1e-12);
        prop_assert!((u.det() - C64::new(1.0, 0.0)).norm() < 1e-12);
        let back = matrix_exp(&x.scale(-1.0)).unwrap();
        prop_assert!(u.matmul(back.mat()).dist(&CMat::identity(3)) < 1e-12);
    }

    #[test]
    fn bracket_is_antisymmetric_and_satisfies_jacobi(a in coeffs(8), b in coeffs(8), c in coeffs(8)) {
        let (x, y, z) = (element(3, &a), element(3, &b), element(3, &c));
        let xy = bracket(&x, &y).unwrap();
        let yx = bracket(&y, &x).unwrap();
        prop_assert!((xy.clone() + yx).mat().norm_max() < 1e-12);
        let j = bracket(&x, &bracket(&y, &z).unwrap()).unwrap()
            + bracket(&y, &bracket(&z, &x).unwrap()).unwrap()
            + bracket(&z, &bracket(&x, &y).unwrap()).unwrap();
        prop_assert!(j.mat().norm_max() < 1e-12);
    }

    #[test]
    fn su2_trace_lemma_and_c21_vanish_pointwise(a in coeffs(12), b in coeffs(12), c in coeffs(12)) {
        let (al, be, ga) = (one_form(2, 4, &a), one_form(2, 4, &b), one_form(2, 4, &c));
        for z in trace_lemma_form(4, &al, &be, &ga) {
            prop_assert!(z.norm() < 1e-12);
        }
        for z in c21_form(4, &al, &be) {
            prop_assert!(z.norm() < 1e-12);
        }
    }

    #[test]
    fn trace_lemma_is_generically_nonzero_for_su3(a in coeffs(32), b in coeffs(32), c in coeffs(32)) {
        let (al, be, ga) = (one_form(3, 4, &a), one_form(3, 4, &b), one_form(3, 4, &c));
        let m = trace_lemma_form(4, &al, &be, &ga).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assume!(a.iter().chain(&b).chain(&c).map(|x| x.abs()).sum::<f64>() > 1.0);
        prop_assert!(m > 1e-8);
    }

    #[test]
    fn constant_top_form_integrates_to_chart_volume(n0 in 8usize..14, n1 in 8usize..14, n2 in 8usize..20, c in -3.0..3.0f64) {
        let d = Domain::new(DomainKind::S3, &[n0, n1, n2]).unwrap();
        let v = vec![c; d.n_nodes()];
        let expected = d.orientation() * c * 2.0 * PI.powi(3);
        prop_assert!((d.integrate_top(&v).unwrap() - expected).abs() < 1e-11 * (1.0 + expected.abs()));
    }

    #[test]
    fn phase_distance_is_periodic_and_bounded(x in -50.0..50.0f64, k in -5i32..5) {
        let p = phase_distance(x);
        prop_assert!((0.0..=0.5).contains(&p));
        prop_assert!((phase_distance(x + k as f64) - p).abs() < 1e-9);
        prop_assert!((phase_distance(-x) - p).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn affine_dual_is_affine_along_segments(seed in 0u64..1000, base in -2.0..2.0f64) {
        let s3 = small_s3();
        let phi = dual(&s3, 3, seed, base);
        let a = PolyForm::random(3, 4, 2, seed + 1, 0.5).unwrap().sample(&s3);
        let b = PolyForm::random(3, 4, 2, seed + 2, 0.5).unwrap().sample(&s3);
        let mid = a.add(&b).unwrap().scale(0.5);
        let lhs = phi.eval(&mid).unwrap();
        let rhs = 0.5 * (phi.eval(&a).unwrap() + phi.eval(&b).unwrap());
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn dual_action_composes(seed in 0u64..1000, kf in -1i32..=1, kh in -1i32..=1) {
        let s3 = small_s3();
        let (f, h) = (field(3, kf, seed), field(3, kh, seed + 7));
        let phi = dual(&s3, 3, seed + 3, 0.3);
        let fs = GroupSample::new(s3.clone(), &f).unwrap();
        let hs = GroupSample::new(s3.clone(), &h).unwrap();
        let fhs = GroupSample::new(s3.clone(), &f.mul(&h).unwrap()).unwrap();
        let two_step = dual_act(&fs, &dual_act(&hs, &phi).unwrap()).unwrap();
        let one_step = dual_act(&fhs, &phi).unwrap();
        let probe = PolyForm::random(3, 4, 2, seed + 4, 0.5).unwrap().sample(&s3);
        let (x, y) = (two_step.eval(&probe).unwrap(), one_step.eval(&probe).unwrap());
        prop_assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()), "{x} vs {y}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn extended_bracket_is_antisymmetric(seed in 0u64..1000, k in -1i32..=1) {
        let ctx = ExtContext::new(3, [8, 8, 16], 8, [8, 16], seed).unwrap();
        let f = path_from_target(&Generator::new(k, Arc::new(AlgebraPoly::random(3, 4, 2, seed, 0.6, true).unwrap())).unwrap());
        let a = ctx.end_sample(&f).unwrap().left_mc();
        let xi = AlgebraPoly::random(3, 4, 2, seed + 1, 0.5, true).unwrap();
        let eta = AlgebraPoly::random(3, 4, 2, seed + 2, 0.5, true).unwrap();
        let x = ExtAlgebraElement::from_poly(&ctx, &xi, dual(&ctx.s3, 3, seed + 3, 0.2)).unwrap();
        let y = ExtAlgebraElement::from_poly(&ctx, &eta, dual(&ctx.s3, 3, seed + 4, -0.1)).unwrap();
        let xy = bracket_ext(&x, &y).unwrap();
        let yx = bracket_ext(&y, &x).unwrap();
        let s = xy.add(&yx).unwrap();
        prop_assert!(s.xi.max_norm() < 1e-12);
        prop_assert!(s.dual.eval(&a).unwrap().abs() < 1e-12);
    }
}
