use std::f64::consts::PI;

use ballwalk_core::analysis::{
    estimate_regularity, exit_measure_stats, irregularity_witness, mean_value_residual,
    puncture_capture_bound, SIGMA_THRESHOLD,
};
use ballwalk_core::{
    estimate_value, tietze_extend, BoundaryData, Domain, HarmonicOracle, Point, Serial, WalkConfig,
    WalkKind,
};

fn p(c: &[f64]) -> Point {
    Point::new(c).unwrap()
}

#[test]
fn mean_value_identity_for_first_coordinate() {
    let ball = Domain::unit_ball(2).unwrap();
    let cfg = WalkConfig::for_domain(&ball, 0.1).unwrap();
    let r = mean_value_residual(&Serial, &ball, &BoundaryData::Coordinate(0), &p(&[0.2, 0.0]), &cfg, 64, 400, 3)
        .unwrap();
    assert!(r.stderr > 0.0);
    assert!(r.within(SIGMA_THRESHOLD), "{r:?}");
}

#[test]
fn mean_value_identity_on_square_probe_set() {
    let square = Domain::unit_cube(2).unwrap();
    let data = BoundaryData::HarmonicTrace(HarmonicOracle::diagonal_quadratic(&[1.0, -1.0]).unwrap());
    let probes = [[0.5, 0.5], [0.2, 0.3], [0.8, 0.25], [0.35, 0.85], [0.9, 0.9]];
    for kind in [WalkKind::BallWalk, WalkKind::SphereWalk] {
        let cfg = WalkConfig::for_domain(&square, 0.15).unwrap().with_kind(kind);
        for (i, x) in probes.iter().enumerate() {
            let r = mean_value_residual(&Serial, &square, &data, &p(x), &cfg, 48, 300, 100 + i as u64).unwrap();
            assert!(r.within(SIGMA_THRESHOLD), "{kind:?} {x:?}: {r:?}");
        }
    }
}

#[test]
fn exit_measure_is_centred_and_isotropic_in_the_plane() {
    let ball = Domain::unit_ball(2).unwrap();
    let cfg = WalkConfig::for_domain(&ball, 0.05).unwrap();
    let s = exit_measure_stats(&Serial, &ball, &p(&[0.0, 0.0]), 0.3, &cfg, 20_000, 6).unwrap();
    for k in 0..2 {
        assert!(s.mean_direction[k].abs() < SIGMA_THRESHOLD * s.mean_direction_stderr[k]);
        let second = s.covariance(k, k) + s.mean_direction[k] * s.mean_direction[k];
        assert!((second - 0.5).abs() < SIGMA_THRESHOLD * s.covariance_diag_stderr[k]);
    }
    assert!(s.radial_overshoot.min >= 0.0 && s.radial_overshoot.max < 0.05);
}

#[test]
fn overshoot_shrinks_with_epsilon() {
    let ball = Domain::unit_ball(3).unwrap();
    let mut previous = f64::INFINITY;
    for eps in [0.1, 0.05, 0.025] {
        let cfg = WalkConfig::for_domain(&ball, eps).unwrap();
        let s = exit_measure_stats(&Serial, &ball, &p(&[0.0, 0.0, 0.0]), 0.3, &cfg, 4000, 2).unwrap();
        assert!(s.radial_overshoot.min >= 0.0);
        assert!(s.radial_overshoot.max < eps);
        assert!(s.radial_overshoot.mean < previous);
        previous = s.radial_overshoot.mean;
    }
}

#[test]
fn puncture_probes_rarely_exit_near_the_puncture() {
    let domain = Domain::punctured_ball(p(&[0.0, 0.0]), 1.0).unwrap();
    let cfg = WalkConfig::for_domain(&domain, 0.1)
        .unwrap()
        .with_stop_tolerance(1e-200)
        .unwrap();
    let report = estimate_regularity(&Serial, &domain, &p(&[0.0, 0.0]), 0.5, 1e-3, &cfg, 4, 2000, 12).unwrap();
    assert_eq!(report.probes.len(), 4);
    for probe in &report.probes {
        assert!(probe.x0.norm() < 1e-3);
    }
    assert!(report.max_probability() <= 0.05, "{report:?}");
}

#[test]
fn puncture_capture_respects_log_bound() {
    // Stopping tolerance large enough that capture is common: the estimate
    // of P(stop at the puncture) must respect ln(1/d) / ln(1/stop).
    let domain = Domain::punctured_ball(p(&[0.0, 0.0]), 1.0).unwrap();
    let stop = 1e-6;
    let cfg = WalkConfig::for_domain(&domain, 0.1).unwrap().with_stop_tolerance(stop).unwrap();
    let d = 1e-2;
    let near_puncture = BoundaryData::Combination(vec![
        (1.0, BoundaryData::Constant(1.0)),
        (-1.0, BoundaryData::DistanceTo(p(&[0.0, 0.0]))),
    ]);
    // 1 - |y| is 1 at the puncture and 0 on the unit circle.
    let e = estimate_value(&Serial, &domain, &near_puncture, &p(&[d, 0.0]), &cfg, 4000, 31).unwrap();
    let bound = puncture_capture_bound(d, stop);
    assert!((bound - 1.0 / 3.0).abs() < 1e-12);
    assert!(e.mean <= bound + SIGMA_THRESHOLD * e.stderr, "{e:?} vs {bound}");
    assert!(e.mean > 0.0);
}

#[test]
fn witness_control_on_regular_point() {
    let ball = Domain::unit_ball(2).unwrap();
    let cfg = WalkConfig::for_domain(&ball, 0.05).unwrap();
    let rows = irregularity_witness(
        &Serial,
        &ball,
        &p(&[1.0, 0.0]),
        &p(&[-1.0, 0.0]),
        &[0.05, 0.01],
        &[0.1, 0.01, 0.001],
        &cfg,
        2000,
        4,
    )
    .unwrap();
    assert_eq!(rows.len(), 6);
    for eps_rows in rows.chunks(3) {
        for pair in eps_rows.windows(2) {
            assert!(pair[1].estimate.mean < pair[0].estimate.mean);
        }
        assert!(eps_rows[2].estimate.mean < 0.05);
    }
}

#[test]
fn poisson_trace_is_reproduced_by_the_walk() {
    let m = 256;
    let values: Vec<f64> = (0..m)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / m as f64;
            (3.0 * t).cos() + 0.5 * t.sin()
        })
        .collect();
    let oracle = HarmonicOracle::poisson_disk(values).unwrap();
    let disk = Domain::unit_ball(2).unwrap();
    let cfg = WalkConfig::for_domain(&disk, 0.1).unwrap();
    let x0 = p(&[0.3, -0.4]);
    // Re(z^3) + Im(z) / 2.
    let exact = 0.3f64.powi(3) - 3.0 * 0.3 * 0.16 + 0.5 * -0.4;
    let truth = oracle.eval(&x0).unwrap();
    assert!((truth - exact).abs() < 1e-10);
    let e = estimate_value(&Serial, &disk, &BoundaryData::HarmonicTrace(oracle), &x0, &cfg, 20_000, 2).unwrap();
    // Lipschitz constant of the trace is at most 3.5 (plus interpolation).
    let bias = 4.0 * cfg.stop_tolerance + 0.5 * (2.0 * PI / m as f64).powi(2) * 9.5;
    assert!((e.mean - truth).abs() < SIGMA_THRESHOLD * e.stderr + bias, "{e:?} {truth}");
}

#[test]
fn fundamental_solution_in_three_dimensions() {
    let ball = Domain::unit_ball(3).unwrap();
    let oracle = HarmonicOracle::fundamental(p(&[1.5, 0.0, 0.0]));
    oracle.check_region(&ball).unwrap();
    let x0 = p(&[0.4, 0.2, -0.1]);
    let truth = oracle.eval(&x0).unwrap();
    for kind in [WalkKind::BallWalk, WalkKind::SphereWalk] {
        let cfg = WalkConfig::for_domain(&ball, 0.2).unwrap().with_kind(kind);
        let e = estimate_value(&Serial, &ball, &BoundaryData::HarmonicTrace(oracle.clone()), &x0, &cfg, 20_000, 9)
            .unwrap();
        // |grad 1/|x - z0|| <= 1 / 0.5^2 on the closed ball.
        let bias = 4.0 * cfg.stop_tolerance;
        assert!((e.mean - truth).abs() < SIGMA_THRESHOLD * e.stderr + bias, "{kind:?} {e:?} {truth}");
    }
}

#[test]
fn tabulated_data_recovers_its_samples_in_the_limit() {
    let points = vec![p(&[1.0, 0.0]), p(&[-1.0, 0.0]), p(&[0.0, 1.0])];
    let values = vec![2.0, -1.0, 0.5];
    for (k, target) in points.iter().enumerate() {
        let mut previous = f64::INFINITY;
        for h in [1e-1, 1e-2, 1e-3, 1e-4] {
            let x = *target * (1.0 - h);
            let err = (tietze_extend(&points, &values, &x).unwrap() - values[k]).abs();
            assert!(err <= previous);
            previous = err;
        }
        assert!(previous < 1e-2);
        assert_eq!(tietze_extend(&points, &values, target).unwrap(), values[k]);
    }
}
