mod common;

use std::f64::consts::PI;

use common::*;
use multiroot::models::{
    model_flow, model_period, model_rhs, Component, GeneratingModel, LinearSystem, ModelError,
    ModelKind, Order, Rational,
};
use multiroot::registry::examples;
use multiroot::Complex64;
use rand::Rng;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn vdiff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, w)| (u - w).norm())
        .fold(0.0, f64::max)
}

/// Every model with a closed form that the tests exercise, with random data.
fn models_under_test() -> Vec<(String, GeneratingModel)> {
    let mut out: Vec<(String, GeneratingModel)> = examples()
        .into_iter()
        .map(|e| (e.name.to_string(), e.model))
        .collect();
    out.push((
        "rotation".into(),
        GeneratingModel::rotation(2.0 * PI, &[q(1, 2), q(-2, 3), q(3, 1)]).unwrap(),
    ));
    out.push((
        "mixed-with-frozen".into(),
        GeneratingModel::new(
            Order::Second,
            1.3,
            vec![
                Component::Frozen,
                Component::Damped { a: 0.7 },
                Component::ExpVelocity { r: q(-5, 2) },
            ],
        )
        .unwrap(),
    ));
    out
}

fn random_data(r: &mut impl Rng, m: &GeneratingModel) -> (Vec<Complex64>, Option<Vec<Complex64>>) {
    let d = m.dimension();
    let y: Vec<Complex64> = (0..d).map(|_| rand_c(r, 3.0)).collect();
    let v = (m.order() == Order::Second).then(|| (0..d).map(|_| rand_c(r, 3.0)).collect());
    (y, v)
}

#[test]
fn flow_derivatives_match_rhs() {
    let mut r = rng(41);
    for (name, m) in models_under_test() {
        let (y0, v0) = random_data(&mut r, &m);
        let t0 = r.gen_range(-1.0..1.0);
        for _ in 0..50 {
            let t = t0 + r.gen_range(-10.0..10.0);
            let at = |s: f64| model_flow(&m, t0, s, &y0, v0.as_deref()).unwrap();
            let (y, v) = at(t);
            // first derivative of y is the velocity slot (or rhs for order 1)
            let h = 1e-5;
            let (yp, vp) = at(t + h);
            let (ym, vm) = at(t - h);
            let dy: Vec<Complex64> = yp
                .iter()
                .zip(&ym)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
            let f = model_rhs(&m, t, &y, (m.order() == Order::Second).then_some(&v[..])).unwrap();
            let scale = 1.0 + norm(&y).max(norm(&v)).max(norm(&f));
            match m.order() {
                Order::First => {
                    assert!(vdiff(&dy, &f) < 1e-6 * scale, "{name} t={t}");
                    assert!(vdiff(&v, &f) < 1e-12 * scale, "{name}");
                }
                Order::Second => {
                    assert!(vdiff(&dy, &v) < 1e-6 * scale, "{name} t={t}");
                    let dv: Vec<Complex64> = vp
                        .iter()
                        .zip(&vm)
                        .map(|(a, b)| (a - b) / (2.0 * h))
                        .collect();
                    assert!(
                        vdiff(&dv, &f) < 1e-6 * scale,
                        "{name} t={t}: {}",
                        vdiff(&dv, &f)
                    );
                }
            }
        }
    }
}

#[test]
fn flow_group_property() {
    let mut r = rng(42);
    for (name, m) in models_under_test() {
        for _ in 0..20 {
            let (y0, v0) = random_data(&mut r, &m);
            let (t0, t1, t2) = (
                r.gen_range(-5.0..5.0),
                r.gen_range(-5.0..5.0),
                r.gen_range(-5.0..5.0),
            );
            let (y1, v1) = model_flow(&m, t0, t1, &y0, v0.as_deref()).unwrap();
            let v1 = (m.order() == Order::Second).then_some(v1);
            let (ya, va) = model_flow(&m, t1, t2, &y1, v1.as_deref()).unwrap();
            let (yb, vb) = model_flow(&m, t0, t2, &y0, v0.as_deref()).unwrap();
            let scale = norm(&yb).max(norm(&vb)).max(1.0);
            assert!(
                vdiff(&ya, &yb) < 1e-10 * scale,
                "{name}: {}",
                vdiff(&ya, &yb) / scale
            );
            assert!(vdiff(&va, &vb) < 1e-10 * scale, "{name}");
        }
    }
}

#[test]
fn flow_is_periodic_over_model_period() {
    let mut r = rng(43);
    for e in examples()
        .into_iter()
        .filter(|e| e.name != "two-body-damped")
    {
        let m = &e.model;
        let p = model_period(m).unwrap();
        assert!(!p.asymptotic);
        for _ in 0..10 {
            let (y0, v0) = random_data(&mut r, m);
            let t0 = r.gen_range(-3.0..3.0);
            let (y, v) = model_flow(m, t0, t0 + p.value, &y0, v0.as_deref()).unwrap();
            let scale = norm(&y0).max(norm(v0.as_deref().unwrap())).max(1.0);
            assert!(vdiff(&y, &y0) < 1e-9 * scale, "{}", e.name);
            assert!(
                vdiff(&v, v0.as_deref().unwrap()) < 1e-9 * scale,
                "{}",
                e.name
            );
        }
    }
}

#[test]
fn rhs_examples() {
    let m = GeneratingModel::exp_velocity(2.0 * PI, &[q(1, 2), q(1, 3)]).unwrap();
    let one = [c(1.0, 0.0), c(1.0, 0.0)];
    let f = model_rhs(&m, 0.0, &one, Some(&one)).unwrap();
    assert!(rel_err(f[0], c(0.0, PI)) < 1e-15);
    assert!(rel_err(f[1], c(0.0, 2.0 * PI / 3.0)) < 1e-15);

    let r1 = 1.0 / 3.0;
    let m = GeneratingModel::harmonic(2.0 * PI, &[q(1, 3), q(1, 2)]).unwrap();
    let f = model_rhs(
        &m,
        0.0,
        &[c(1.0, 0.0), c(0.0, 0.0)],
        Some(&[c(5.0, 1.0), c(-2.0, 0.0)]),
    )
    .unwrap();
    assert!(rel_err(f[0], c(-r1 * r1 * 4.0 * PI * PI, 0.0)) < 1e-15);
    assert_eq!(f[1], c(0.0, 0.0));

    let damped = examples()
        .into_iter()
        .find(|e| e.name == "two-body-damped")
        .unwrap()
        .model;
    let f = model_rhs(
        &damped,
        0.0,
        &[c(0.0, 0.0); 2],
        Some(&[c(0.0, 0.0), c(1.0, 0.0)]),
    )
    .unwrap();
    assert!(rel_err(f[1], c(-0.1, 0.0)) < 1e-15);
    assert_eq!(damped.kind(), ModelKind::DampedHarmonic);
}

#[test]
fn period_examples() {
    let p = model_period(&GeneratingModel::exp_velocity(2.0 * PI, &[q(1, 2), q(1, 3)]).unwrap())
        .unwrap();
    assert_eq!(p.multiple, q(6, 1));
    assert!((p.value - 6.0).abs() < 1e-12);
    let p =
        model_period(&GeneratingModel::harmonic(2.0 * PI, &[q(1, 3), q(1, 4)]).unwrap()).unwrap();
    assert_eq!(p.multiple, q(12, 1));
    let damped = examples()
        .into_iter()
        .find(|e| e.name == "two-body-damped")
        .unwrap()
        .model;
    let p = model_period(&damped).unwrap();
    assert!((p.value - 3.0).abs() < 1e-12);
    assert!(p.asymptotic);
    let m = GeneratingModel::rotation(PI, &[q(-3, 2), q(5, 4)]).unwrap();
    // periods (2/3)·2 and (4/5)·2 = 4/3 and 8/5: lcm = lcm(4, 8) / gcd(3, 5) = 8
    assert!((model_period(&m).unwrap().value - 8.0).abs() < 1e-12);
}

#[test]
fn rational_lcm_against_brute_force() {
    // least positive T with T r_m ω / 2π an integer for every m, searched over
    // a fine rational grid
    let mut r = rng(44);
    for _ in 0..50 {
        let k = r.gen_range(1..=3);
        let rs: Vec<Rational> = (0..k)
            .map(|_| q(r.gen_range(1..=6), r.gen_range(1..=6)))
            .collect();
        let m = GeneratingModel::harmonic(2.0 * PI, &rs).unwrap();
        let got = model_period(&m).unwrap().multiple;
        // T = n / D for D = lcm of numerators' range; 720 covers every numerator ≤ 6
        let brute = (1..=720 * 720)
            .map(|n| q(n, 720))
            .find(|t| rs.iter().all(|rm| (*t * *rm).is_integer()))
            .unwrap();
        assert_eq!(got, brute, "{rs:?}");
    }
}

#[test]
fn flow_identity_at_start() {
    let mut r = rng(45);
    for (name, m) in models_under_test() {
        let (y0, v0) = random_data(&mut r, &m);
        let (y, v) = model_flow(&m, 0.7, 0.7, &y0, v0.as_deref()).unwrap();
        assert_eq!(y, y0, "{name}");
        if let Some(v0) = v0 {
            assert_eq!(v, v0, "{name}");
        }
    }
}

#[test]
fn custom_linear_has_no_closed_form() {
    let sys = LinearSystem {
        a: vec![
            vec![c(0.0, 1.0), c(0.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, -1.0)],
        ],
        b: None,
    };
    let m = GeneratingModel::custom_linear(Order::First, sys).unwrap();
    assert!(!m.has_closed_form());
    assert_eq!(m.kind(), ModelKind::CustomLinear);
    assert!(model_period(&m).is_none());
    let y = [c(1.0, 0.0), c(2.0, 0.0)];
    assert_eq!(
        model_flow(&m, 0.0, 1.0, &y, None).unwrap_err(),
        ModelError::NoClosedForm
    );
    let f = model_rhs(&m, 0.0, &y, None).unwrap();
    assert_eq!(f, vec![c(0.0, 1.0), c(1.0, -2.0)]);
    let bad = LinearSystem {
        a: vec![vec![c(1.0, 0.0)]],
        b: Some(vec![vec![c(1.0, 0.0)]]),
    };
    assert!(GeneratingModel::custom_linear(Order::First, bad).is_err());
}

#[test]
fn parameter_domains() {
    assert!(GeneratingModel::harmonic(0.0, &[q(1, 2)]).is_err());
    assert!(GeneratingModel::exp_velocity(1.0, &[q(0, 3)]).is_err());
    assert!(GeneratingModel::new(Order::Second, 1.0, vec![Component::Damped { a: 0.0 }]).is_err());
    assert!(GeneratingModel::new(
        Order::First,
        1.0,
        vec![Component::ExpVelocity { r: q(1, 2) }]
    )
    .is_err());
    assert!(GeneratingModel::new(Order::Second, 1.0, vec![]).is_err());
}

#[test]
fn descriptors_round_trip_through_json() {
    for (name, m) in models_under_test() {
        let text = serde_json::to_string(&m).unwrap();
        let back: GeneratingModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m, "{name}");
    }
    let m: GeneratingModel =
        serde_json::from_str(r#"{"order":2,"omega":6.283185307179586,"components":[{"type":"harmonic","r":"1/3"},{"type":"damped","a":0.1}]}"#)
            .unwrap();
    assert_eq!(m.kind(), ModelKind::DampedHarmonic);
    assert!(
        serde_json::from_str::<GeneratingModel>(r#"{"order":3,"omega":1.0,"components":[]}"#)
            .is_err()
    );
}
