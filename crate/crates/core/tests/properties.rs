//! Property tests of the structural invariants.

use std::f64::consts::PI;

use foldvol::bm::bm_from_parts;
use foldvol::bm::{certify_folded, convex_path, factor_defining, DEFAULT_THETA, DEFAULT_TOL_ZERO};
use foldvol::desing::{build_even_profile, build_odd_profile, desingularize};
use foldvol::forms::{contract, d0, d1, pullback};
use foldvol::invariants::{folded_equivalent, modular_periods, regional_volumes};
use foldvol::primitive::{build_primitive, verify_primitive};
use foldvol::{
    CriticalSet, DiscreteMap, ExecMode, FoldedVolumeForm, SpectralField1D, SpectralField2D, TwoForm, VectorField,
};
use proptest::prelude::*;

const K: usize = 8;

/// Random real field with modes `|k| ≤ 3` and a decaying spectrum.
fn field() -> impl Strategy<Value = SpectralField2D> {
    prop::collection::vec(-1.0..1.0f64, 49).prop_map(|amps| {
        let mut f = SpectralField2D::zeros(K);
        for (i, a) in amps.into_iter().enumerate() {
            let (kx, ky) = (i as i32 % 7 - 3, i as i32 / 7 - 3);
            let decay = (1 + kx * kx + ky * ky) as f64;
            f = f.add(&SpectralField2D::cos(K, kx, ky, a / decay));
        }
        f
    })
}

fn profile() -> impl Strategy<Value = SpectralField1D> {
    prop::collection::vec(-0.2..0.2f64, 3).prop_map(|c| {
        SpectralField1D::cos(K, 1, c[0]).add(&SpectralField1D::sin(K, 2, c[1])).add(&SpectralField1D::cos(K, 3, c[2]))
    })
}

fn z2() -> CriticalSet {
    CriticalSet::with_default_collar(vec![0.0, 0.5], vec![1, -1]).unwrap()
}

/// `σ sin(2πx)(1 + q(y))`, folded on `{0, 1/2}` for small `q`.
fn modulated_sine(sigma: f64, q: &SpectralField1D) -> FoldedVolumeForm {
    let s = SpectralField2D::sin(K, 1, 0, sigma);
    let modes: Vec<_> = q.nonnegative_coeffs().iter().enumerate().skip(1).map(|(k, c)| (0, k as i32, *c)).collect();
    let coef = s.add(&s.multiply(&SpectralField2D::from_modes(K, &modes).unwrap()));
    certify_folded(&TwoForm::new(coef), &z2(), DEFAULT_THETA, DEFAULT_TOL_ZERO).unwrap()
}

fn folded() -> impl Strategy<Value = FoldedVolumeForm> {
    (0.5..2.0f64, profile()).prop_map(|(sigma, q)| modulated_sine(sigma, &q))
}

/// Two forms with equal regional volumes: `q` is mean-free.
fn equivalent_pair() -> impl Strategy<Value = (FoldedVolumeForm, FoldedVolumeForm)> {
    (0.5..2.0f64, profile(), profile()).prop_map(|(sigma, p, q)| (modulated_sine(sigma, &p), modulated_sine(sigma, &q)))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn points() -> Vec<(f64, f64)> {
    (0..200).map(|i| ((i as f64 * 0.618_034).fract(), (i as f64 * 0.414_214).fract())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fields_are_hermitian(f in field(), g in field()) {
        prop_assert!(f.symmetry_defect() <= 1e-12);
        prop_assert!(f.multiply(&g).symmetry_defect() <= 1e-12);
        prop_assert!(d1(&d0(&f)).coef.symmetry_defect() <= 1e-12);
    }

    #[test]
    fn stokes_and_strips(f in field()) {
        for axis in [foldvol::Axis::X, foldvol::Axis::Y] {
            prop_assert!(f.differentiate(axis).integrate_total().abs() <= 1e-13);
        }
        prop_assert!((f.integrate_strip(0.0, 1.0) - f.integrate_total()).abs() <= 1e-13);
    }

    #[test]
    fn product_is_pointwise(f in field(), g in field()) {
        let h = f.multiply(&g);
        for (x, y) in points() {
            prop_assert!((h.eval(x, y) - f.eval(x, y) * g.eval(x, y)).abs() <= 1e-10);
        }
    }

    #[test]
    fn d_squared_vanishes(f in field()) {
        prop_assert!(max_abs(&d1(&d0(&f)).coef.grid_samples(32)) <= 1e-13);
    }

    #[test]
    fn contraction_is_bilinear(w in field(), a in field(), b in field(), c in field(), d in field()) {
        let omega = TwoForm::new(w);
        let v = VectorField { vx: a, vy: b };
        let u = VectorField { vx: c, vy: d };
        let lhs = contract(&omega, &v.add(&u));
        let rhs = contract(&omega, &v).add(&contract(&omega, &u));
        for (x, y) in points() {
            let (p, q) = (lhs.eval(x, y), rhs.eval(x, y));
            prop_assert!((p[0] - q[0]).abs() <= 1e-12 && (p[1] - q[1]).abs() <= 1e-12);
        }
    }

    #[test]
    fn translations_compose(f in field(), t1 in (0.0..1.0f64, 0.0..1.0f64), t2 in (0.0..1.0f64, 0.0..1.0f64)) {
        let n = 32;
        let omega = TwoForm::new(f);
        let a = DiscreteMap::translation(n, t1.0, t1.1);
        let b = DiscreteMap::translation(n, t2.0, t2.1);
        let (once, _) = pullback(&omega, &a, ExecMode::Sequential).unwrap();
        let (twice, _) = pullback(&once, &b, ExecMode::Sequential).unwrap();
        let (direct, _) = pullback(&omega, &a.compose(&b, ExecMode::Sequential), ExecMode::Sequential).unwrap();
        for (x, y) in points() {
            prop_assert!((twice.eval(x, y) - direct.eval(x, y)).abs() <= 1e-8);
        }
    }

    #[test]
    fn certificate_scales(omega in folded(), c in 0.1..10.0f64) {
        let coef = omega.spectral().unwrap().coef.scale(c);
        let scaled = certify_folded(&TwoForm::new(coef), omega.critical(), DEFAULT_THETA, DEFAULT_TOL_ZERO).unwrap();
        let (a, b) = (omega.certificate(), scaled.certificate());
        prop_assert!((b.min_normal_slope - c * a.min_normal_slope).abs() <= 1e-12 * b.min_normal_slope);
        prop_assert!(b.max_abs_on_z <= c * a.max_abs_on_z + 1e-15);
    }

    #[test]
    fn collar_factor_round_trip(omega in folded()) {
        let z = omega.critical();
        for i in 0..z.len() {
            let collar = z.collar(i);
            let mu = factor_defining(&omega, &collar).unwrap();
            for j in 0..40 {
                let t = collar.width * (j as f64 / 19.5 - 1.0);
                let y = (j as f64 * 0.377).fract();
                let w = omega.eval(collar.center + t, y);
                prop_assert!((t * mu.eval_offset(t, y) - w).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn convex_path_stays_folded(a in folded(), b in folded(), s in prop::collection::vec(0.0..=1.0f64, 20)) {
        for &s in &s {
            prop_assert!(convex_path(&a, &b, s).is_ok());
        }
        let (p0, p1) = (convex_path(&a, &b, 0.0).unwrap(), convex_path(&a, &b, 1.0).unwrap());
        for (x, y) in points() {
            prop_assert_eq!(p0.eval(x, y), a.eval(x, y));
            prop_assert_eq!(p1.eval(x, y), b.eval(x, y));
        }
    }

    #[test]
    fn volumes_sum_to_total(omega in folded()) {
        let v = regional_volumes(&omega);
        prop_assert!((v.volumes.iter().sum::<f64>() - v.total).abs() <= 1e-12);
    }

    #[test]
    fn folded_equivalence_relation(a in folded(), b in folded(), c in folded()) {
        let tol = 1e-8;
        let eq = |p: &FoldedVolumeForm, q: &FoldedVolumeForm| folded_equivalent(p, q, tol).unwrap();
        prop_assert!(eq(&a, &a).equivalent);
        prop_assert_eq!(eq(&a, &b).equivalent, eq(&b, &a).equivalent);
        // chaining: defects add, so two tol/2 steps stay within tol
        let (ab, bc, ac) = (eq(&a, &b), eq(&b, &c), eq(&a, &c));
        for j in 0..2 {
            prop_assert!((ab.defects[j] + bc.defects[j] - ac.defects[j]).abs() <= 1e-14);
        }
        if ab.max_defect <= tol / 2.0 && bc.max_defect <= tol / 2.0 {
            prop_assert!(ac.equivalent);
        }
    }

    #[test]
    fn periods_are_linear(p in profile(), q in profile(), c0 in -2.0..2.0f64, c1 in -2.0..2.0f64, lam in -3.0..3.0f64) {
        let mk = |a: &SpectralField1D, c: f64| {
            let l = vec![vec![a.add(&SpectralField1D::constant(K, c)), a.clone()]; 2];
            bm_from_parts(2, z2(), l, SpectralField2D::zeros(K)).unwrap()
        };
        let (s, t) = (mk(&p, c0), mk(&q, c1));
        let sum = s.add(&t.scale(lam)).unwrap();
        let (ps, pt, psum) = (modular_periods(&s), modular_periods(&t), modular_periods(&sum));
        for r in 0..2 {
            for i in 0..2 {
                let want = ps.values[r][i] + lam * pt.values[r][i];
                prop_assert!((psum.values[r][i] - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn primitive_contract((a, b) in equivalent_pair(), lam in -3.0..3.0f64) {
        let z = z2();
        let delta = b.density().sub(a.density());
        let beta = build_primitive(&delta, &z).unwrap();
        let r = verify_primitive(&beta, &delta, &z);
        prop_assert!(r.residual <= 1e-8, "residual {}", r.residual);
        prop_assert!(r.orders.iter().all(|o| *o >= 1.9), "orders {:?}", r.orders);
        prop_assert!(r.continuity_jump <= 1e-10);
        let scaled = build_primitive(&delta.scale(lam), &z).unwrap();
        for (x, y) in points() {
            let (u, v) = (scaled.eval(x, y), beta.eval(x, y));
            prop_assert!((u[0] - lam * v[0]).abs() <= 1e-10 && (u[1] - lam * v[1]).abs() <= 1e-10);
        }
    }

    #[test]
    fn odd_profile_at_the_circle(k in 0usize..3, eps in 0.02..0.2f64) {
        let p = build_odd_profile(k, eps, 3).unwrap();
        prop_assert_eq!(p.deriv(0.0), 0.0);
        prop_assert_eq!(p.second(0.0), 2.0 / eps.powi(2 * k as i32 + 2));
        prop_assert!(p.gluing.iter().all(|g| *g <= 1e-9));
    }

    #[test]
    fn even_profile_is_increasing(k in 1usize..4, eps in 0.02..0.2f64) {
        let p = build_even_profile(k, eps, 3).unwrap();
        prop_assert!(p.min_derivative > 0.0);
        for i in 0..=400 {
            let x = eps * (i as f64 / 200.0 - 1.0);
            prop_assert!(p.deriv(x) >= p.min_derivative * (1.0 - 1e-12));
        }
        prop_assert!(p.gluing.iter().all(|g| *g <= 1e-9));
    }

    #[test]
    fn desing_is_linear(p in profile(), q in profile(), lam in 0.1..2.0f64, eps in 0.03..0.2f64) {
        let one = SpectralField1D::constant(K, 1.0);
        let s = SpectralField2D::sin(K, 1, 0, 1.0);
        let t0 = bm_from_parts(1, z2(), vec![vec![one.add(&p)], vec![one.add(&q).scale(-1.0)]], s.clone()).unwrap();
        let t1 = bm_from_parts(1, z2(), vec![vec![one.add(&q)], vec![one.add(&p).scale(-1.0)]], s).unwrap();
        let prof = build_odd_profile(0, eps, 3).unwrap();
        let d0 = desingularize(&t0, &prof).unwrap();
        let d1 = desingularize(&t1, &prof).unwrap();
        let ds = desingularize(&t0.add(&t1.scale(lam)).unwrap(), &prof).unwrap();
        for (x, y) in points() {
            let want = d0.eval(x, y) + lam * d1.eval(x, y);
            prop_assert!((ds.eval(x, y) - want).abs() <= 1e-9 * (1.0 + want.abs()));
        }
    }
}

#[test]
fn sine_volumes() {
    let omega =
        certify_folded(&TwoForm::new(SpectralField2D::sin(K, 1, 0, 1.0)), &z2(), DEFAULT_THETA, DEFAULT_TOL_ZERO)
            .unwrap();
    let v = regional_volumes(&omega).volumes;
    assert!((v[0] - 1.0 / PI).abs() < 1e-14 && (v[1] + 1.0 / PI).abs() < 1e-14);
}
