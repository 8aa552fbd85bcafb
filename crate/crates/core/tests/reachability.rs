use std::f64::consts::PI;

use proptest::prelude::*;
use zermelo_core::cusp::cusp_historical;
use zermelo_core::flow::{exponential_state, integrate_closed_form_historical};
use zermelo_core::lie::ExtremalKind;
use zermelo_core::ode::StepControl;
use zermelo_core::reach::*;
use zermelo_core::{make_historical, make_vortex, ExtendedState, Position};

fn dist(a: Position, b: Position) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn cfg(t_max: f64) -> ShootingConfig {
    ShootingConfig {
        t_max,
        ..Default::default()
    }
}

#[test]
fn small_sphere_is_the_hyperbolic_sector() {
    let h = make_historical();
    let sb = sphere_and_ball(&h, [0.0, 2.0], 0.3, 128).unwrap();
    assert_eq!(sb.wavefront.points.len(), 128);
    for (pt, on) in sb.wavefront.points.iter().zip(&sb.on_sphere) {
        match pt.kind {
            ExtremalKind::Hyperbolic => assert!(on, "{pt:?}"),
            _ => assert!(!on, "{pt:?}"),
        }
    }
    // the fan is closed off by the abnormal endpoints, which are sphere points
    assert_eq!(sb.abnormal_on_sphere, vec![true, true]);
    assert_eq!(sb.arcs.len(), 2);
    for (arc, pt) in sb.arcs.iter().zip(&sb.wavefront.abnormal) {
        let (t, q) = *arc.samples.last().unwrap();
        assert_eq!(t, 0.3);
        assert!(dist(q, pt.position.unwrap()) < 1e-12);
    }
}

#[test]
fn weak_sphere_is_the_whole_front() {
    let h = make_historical();
    let sb = sphere_and_ball(&h, [0.0, 0.5], 0.2, 64).unwrap();
    assert!(sb.on_sphere.iter().all(|&b| b));
    assert!(sb.arcs.is_empty());
}

#[test]
fn sphere_beyond_cusp_drops_the_cusped_abnormal() {
    let h = make_historical();
    let t = 2.2;
    let sb = sphere_and_ball(&h, [0.0, 2.0], t, 64).unwrap();
    for (pt, on) in sb.wavefront.abnormal.iter().zip(&sb.abnormal_on_sphere) {
        let s0 = ExtendedState::new(0.0, 2.0, pt.alpha0);
        let cusped = cusp_historical(&s0).unwrap().is_some_and(|c| c.t_cusp < t);
        assert_eq!(*on, !cusped, "{pt:?}");
    }
    let cusped = sb.arcs.iter().find(|a| a.cusp.is_some()).unwrap();
    assert!((cusped.samples.last().unwrap().0 - 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn balls_are_monotone() {
    let h = make_historical();
    let q0 = [0.0, 2.0];
    let inner = sphere_and_ball(&h, q0, 0.2, 48).unwrap();
    let bundle = ShootingBundle::new(&h, q0, cfg(0.35)).unwrap();
    for (pt, on) in inner.wavefront.points.iter().zip(&inner.on_sphere) {
        if *on {
            let v = bundle.value(pt.position.unwrap()).unwrap();
            assert!(v.t_min.unwrap() <= 0.35);
        }
    }
}

#[test]
fn front_points_are_upper_bounded_by_their_time() {
    let p = make_vortex(1.0).unwrap();
    let q0 = [0.6, 0.0];
    let t = 0.15;
    let wf = wavefront(&p, q0, t, 24).unwrap();
    let bundle = ShootingBundle::new(
        &p,
        q0,
        ShootingConfig {
            n_headings: 120,
            ..cfg(t)
        },
    )
    .unwrap();
    for pt in &wf.points {
        let v = bundle.value(pt.position.unwrap()).unwrap();
        assert!(v.t_min.unwrap() <= t + 1e-9, "{pt:?} {v:?}");
    }
}

#[test]
fn value_beyond_abnormal_exceeds_abnormal_time() {
    // a point just outside the cusped abnormal is only reached by a long
    // hyperbolic loop
    let h = make_historical();
    let s0 = ExtendedState::new(0.0, 2.0, -2.0 * PI / 3.0);
    let s = integrate_closed_form_historical(&s0, 0.8);
    let v = [s.c2 + s.heading.cos(), s.heading.sin()];
    let n = v[0].hypot(v[1]);
    let inside = [s.c1 - 0.01 * v[1] / n, s.c2 + 0.01 * v[0] / n];
    let outside = [s.c1 + 0.01 * v[1] / n, s.c2 - 0.01 * v[0] / n];
    let bundle = ShootingBundle::new(&h, [0.0, 2.0], cfg(6.0)).unwrap();
    let t_in = bundle.value(inside).unwrap().t_min.unwrap();
    let t_out = bundle.value(outside).unwrap().t_min.unwrap();
    assert!(t_in < 0.8, "{t_in}");
    assert!(t_out > 0.8 + 1.0, "{t_out}");
}

#[test]
fn weak_scan_is_continuous() {
    let h = make_historical();
    let scan = discontinuity_scan(&h, [0.0, 0.5], ([0.25, 0.45], [0.05, 0.75]), 60, cfg(1.0)).unwrap();
    assert_eq!(scan.samples.len(), 60);
    assert!(scan.samples.iter().all(|s| s.value.t_min.is_some()));
    assert!(scan.jumps.is_empty(), "{:?}", scan.jumps);
}

#[test]
fn cut_locus_arcs() {
    let h = make_historical();
    let c = cut_locus_estimate(&h, [0.0, 2.0], 5.0, 90).unwrap();
    assert!((c.horizon - 1.5 * 3f64.sqrt()).abs() < 1e-12);
    assert_eq!(c.arcs.len(), 2);
    let cusped = c.arcs.iter().find(|a| a.cusp.is_some()).unwrap();
    let end = cusped.samples.last().unwrap().1;
    let x_cusp = cusped.cusp.unwrap().position[0];
    assert!((end[0] - x_cusp).abs() < 1e-12 && (end[1] - 1.0).abs() < 1e-12);
    for sp in &c.separating {
        assert!(sp.t > 0.0 && sp.t <= c.horizon);
    }

    let short = cut_locus_estimate(&h, [0.0, 2.0], 0.4, 32).unwrap();
    assert_eq!(short.horizon, 0.4);
    assert!(short.arcs.iter().all(|a| a.samples.last().unwrap().0 == 0.4));
}

#[test]
fn loop_time_estimates() {
    let h = make_historical();
    let weak = loop_time_estimate(&h, [0.0, 0.5], 1.0, 64, 4).unwrap().unwrap();
    assert!(weak < 1e-6);
    assert!(loop_time_estimate(&h, [0.0, 2.0], 2.0, 64, 8).unwrap().is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn value_samples_reintegrate_onto_target(g in -PI..PI, t in 0.05f64..0.6) {
        let h = make_historical();
        let q0 = [0.0, 0.5];
        let target = integrate_closed_form_historical(&ExtendedState::new(0.0, 0.5, g), t).position();
        let c = ShootingConfig { n_headings: 180, ..cfg(0.7) };
        let v = value_function(&h, q0, target, c).unwrap();
        let tm = v.t_min.unwrap();
        prop_assert!(tm <= t + 1e-9);
        let back = exponential_state(&h, &ExtendedState::new(0.0, 0.5, v.alpha0_star.unwrap()), tm, StepControl::default()).unwrap();
        prop_assert!(dist(back.position(), target) <= c.position_tol);
    }
}
