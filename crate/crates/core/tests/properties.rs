use std::f64::consts::TAU;

use dephaser_core::dynamics::{
    propagate_single, propagate_two_time, trace_distance, trace_distance_eigen, DensityMatrix2, LiouvilleOp,
    SystemParams, TwoTimeKernelSet,
};
use dephaser_core::measures::{non_markovianity, normalized_distance, ScanWindow, Scenario, SearchMode};
use dephaser_core::response::echo_response;
use dephaser_core::{BathParams, DephasingEvaluator};
use nalgebra::Matrix4;
use num_complex::Complex64;
use proptest::prelude::*;

fn state() -> impl Strategy<Value = DensityMatrix2> {
    (0.0..=1.0f64, 0.0..=1.0f64, 0.0..TAU).prop_map(|(p, f, phase)| {
        let modulus = f * (p * (1.0 - p)).sqrt();
        DensityMatrix2::new(p, Complex64::from_polar(modulus, phase)).unwrap()
    })
}

fn figure() -> DephasingEvaluator {
    DephasingEvaluator::analytic(BathParams::figure()).unwrap()
}

proptest! {
    #[test]
    fn trace_distance_is_a_metric(a in state(), b in state(), c in state()) {
        let ab = trace_distance(&a, &b);
        prop_assert_eq!(ab, trace_distance(&b, &a));
        prop_assert!(trace_distance(&a, &c) <= ab + trace_distance(&b, &c) + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!((ab - trace_distance_eigen(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn propagation_keeps_states_valid(
        s in state(),
        t1 in 0.0..15.0f64,
        t2 in 0.0..15.0f64,
        eps in -5.0..5.0f64,
        flip in any::<bool>(),
    ) {
        let eval = figure();
        let sys = SystemParams::new(eps).unwrap();
        let op = if flip { LiouvilleOp::coherence_flip() } else { LiouvilleOp::identity() };
        let out = propagate_two_time(&s, &sys, &eval, &op, t1, t2).unwrap();
        prop_assert_eq!(out.p11(), s.p11());
        prop_assert!(out.c12().norm_sqr() <= out.p11() * out.p22() + 1e-15);
        prop_assert!(out.c12().norm() <= s.c12().norm() * (1.0 + 1e-12));
        let single = propagate_single(&s, &sys, &eval, t1).unwrap();
        prop_assert!(single.c12().norm() <= s.c12().norm());
    }

    #[test]
    fn distances_do_not_depend_on_the_gap(
        p in 0.0..=1.0f64,
        f in 0.0..=1.0f64,
        pha in 0.0..TAU,
        phb in 0.0..TAU,
        t1 in 0.0..10.0f64,
        t2 in 0.0..10.0f64,
    ) {
        let eval = figure();
        let modulus = f * (p * (1.0 - p)).sqrt();
        let a = DensityMatrix2::new(p, Complex64::from_polar(modulus, pha)).unwrap();
        let b = DensityMatrix2::new(p, Complex64::from_polar(modulus, phb)).unwrap();
        let flip = LiouvilleOp::coherence_flip();
        let d = |eps: f64| {
            let sys = SystemParams::new(eps).unwrap();
            let single = trace_distance(
                &propagate_single(&a, &sys, &eval, t2).unwrap(),
                &propagate_single(&b, &sys, &eval, t2).unwrap(),
            );
            let two = trace_distance(
                &propagate_two_time(&a, &sys, &eval, &flip, t1, t2).unwrap(),
                &propagate_two_time(&b, &sys, &eval, &flip, t1, t2).unwrap(),
            );
            (single, two)
        };
        let (s0, w0) = d(0.0);
        let (s5, w5) = d(5.0);
        prop_assert!((s0 - s5).abs() < 1e-15);
        prop_assert!((w0 - w5).abs() < 1e-15);
    }

    #[test]
    fn echo_modulus_is_symmetric_and_bounded(t1 in 0.0..20.0f64, t2 in 0.0..20.0f64) {
        let eval = figure();
        let r = echo_response(&eval, t1, t2).unwrap();
        let s = echo_response(&eval, t2, t1).unwrap();
        prop_assert!((r.norm() - s.norm()).abs() < 1e-14);
        prop_assert!(r.norm() <= 1.0);
        let k = TwoTimeKernelSet::new(&SystemParams::new(2.0).unwrap(), &eval, t1, t2).unwrap();
        prop_assert!((k.k_flip().norm() - r.norm()).abs() < 1e-14);
        let uninterrupted = (Complex64::new(0.0, -2.0 * (t1 + t2)) - eval.g(t1 + t2).unwrap()).exp();
        prop_assert!((k.k_keep() - uninterrupted).norm() < 1e-14);
    }

    #[test]
    fn perturbed_superoperators_are_rejected(i in 0usize..4, j in 0usize..4, re in 1e-9..1.0f64, im in -1.0..1.0f64) {
        let mut m = *LiouvilleOp::coherence_flip().matrix();
        m[(i, j)] += Complex64::new(re, im);
        prop_assert!(LiouvilleOp::from_matrix(m).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn measure_is_non_negative_and_telescopes(t1 in 0.0..4.0f64, t_max in 1.0..12.0f64) {
        let eval = figure();
        let scenario = Scenario::Prepared { t1 };
        let window = ScanWindow::new(t_max).with_points(2000);
        let r = non_markovianity(&SystemParams::default(), &eval, scenario, window, SearchMode::AnalyticPair).unwrap();
        prop_assert!(r.n_value >= 0.0);
        prop_assert_eq!(r.n_value == 0.0, r.growth_intervals.is_empty());
        let mut telescoped = 0.0;
        let mut last_end = f64::NEG_INFINITY;
        for iv in &r.growth_intervals {
            prop_assert!(iv.t_start > last_end || (last_end.is_infinite() && iv.t_start >= 0.0));
            prop_assert!(iv.t_start < iv.t_end && iv.t_end <= t_max);
            prop_assert!(iv.delta_d > 0.0);
            last_end = iv.t_end;
            telescoped += normalized_distance(&eval, scenario, iv.t_end).unwrap()
                - normalized_distance(&eval, scenario, iv.t_start).unwrap();
        }
        prop_assert!((r.n_value - telescoped).abs() < 1e-10);
    }
}

#[test]
fn hermiticity_breaking_matrix_rejected() {
    let mut m: Matrix4<Complex64> = Matrix4::identity();
    m[(1, 2)] = Complex64::new(0.3, 0.0);
    assert!(LiouvilleOp::from_matrix(m).is_err());
}

#[test]
fn high_temperature_correlation_decays_monotonically() {
    let eval = DephasingEvaluator::high_temperature(BathParams::figure()).unwrap();
    let l0 = eval.correlation(0.0).unwrap().re;
    let mut prev = l0;
    for i in 1..100 {
        let l = eval.correlation(0.1 * i as f64).unwrap().re;
        assert!(l > 0.0 && l < prev && l <= l0);
        prev = l;
    }
}
