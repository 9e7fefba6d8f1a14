mod common;

use common::*;
use horizon_core::dynamics::{
    check_nonresonance, eigenvalues, estimate_decay, find_horizon_equilibria, integrate, spectrum_classify,
    trace_equilibrium_curve, Classification, Controls, GapWindow, Sample, SearchSpec, StopReason, Trajectory,
};
use horizon_core::{Chart, DesingField, DirectionalChart, Error, FieldSpec, HomogeneityType, ParabolicChart, Sign};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn parabolic((f, h): (FieldSpec, HomogeneityType)) -> DesingField {
    DesingField::new(&f, &ParabolicChart::new(h).into()).unwrap()
}

fn directional((f, h): (FieldSpec, HomogeneityType), index: usize, sign: Sign) -> DesingField {
    DesingField::new(&f, &DirectionalChart::new(h, index, sign).unwrap().into()).unwrap()
}

fn no_horizon_stop(tau_max: f64) -> Controls {
    Controls {
        tau_max,
        horizon_eps: 0.0,
        ..Controls::default()
    }
}

#[test]
fn quadratic_time_converges_to_one() {
    let (f, h) = quadratic();
    let chart: Chart = ParabolicChart::new(h).into();
    let d = DesingField::new(&f, &chart).unwrap();
    let x0 = chart.embed(&[1.0]).unwrap().coords;
    let traj = integrate(&d, &x0, 0.0, &Controls::default()).unwrap();
    assert_eq!(traj.stop_reason, StopReason::HorizonReached);
    let last = traj.last();
    assert!((last.t - 1.0).abs() < 1e-9, "t = {}", last.t);
    assert!(traj.samples.windows(2).all(|w| w[1].tau > w[0].tau && w[1].t >= w[0].t));
    assert!(traj.samples.iter().all(|s| (0.0..=1.0).contains(&s.gap)));
}

#[test]
fn fixed_step_error_drops_at_fifth_order() {
    // Large tolerances with a step cap give fixed steps of size max_step.
    let d = parabolic(quadratic());
    let x0 = d.chart().embed(&[1.0]).unwrap().coords;
    let reference = integrate(
        &d,
        &x0,
        0.0,
        &Controls {
            rel_tol: 1e-13,
            abs_tol: 1e-15,
            ..no_horizon_stop(4.0)
        },
    )
    .unwrap()
    .last()
    .t;
    let err = |h: f64| {
        let c = Controls {
            rel_tol: 1.0,
            abs_tol: 1.0,
            max_step: h,
            ..no_horizon_stop(4.0)
        };
        (integrate(&d, &x0, 0.0, &c).unwrap().last().t - reference).abs()
    };
    let (e1, e2) = (err(0.4), err(0.2));
    assert!(e1 / e2 >= 8.0, "errors {e1} -> {e2}");
}

#[test]
fn painleve_horizon_is_invariant_under_the_flow() {
    let d = parabolic(painleve());
    let x0 = d.chart().to_horizon(&[0.0, 0.3, 0.9]).unwrap();
    let traj = integrate(&d, &x0, 0.0, &no_horizon_stop(50.0)).unwrap();
    assert_eq!(traj.stop_reason, StopReason::TauExhausted);
    assert!(traj.samples.iter().all(|s| s.gap.abs() < 1e-9));
    // time stands still on the horizon
    assert!(traj.samples.iter().all(|s| s.t.abs() < 1e-9));
}

#[test]
fn nonautonomous_time_stalls_at_the_horizon() {
    let d = parabolic(painleve());
    let x0 = d.chart().embed(&[0.0, 10.0, 2.0 * 10f64.powf(1.5)]).unwrap().coords;
    let traj = integrate(&d, &x0, 0.0, &Controls::default()).unwrap();
    assert_eq!(traj.stop_reason, StopReason::HorizonReached);
    assert!(traj.samples.windows(2).all(|w| w[1].t >= w[0].t));
    let last = traj.last();
    assert!(last.dt_dtau < 1e-11);
    assert!(last.dt_dtau >= 0.0);
}

#[test]
fn integration_rejects_points_outside_the_chart() {
    let d = parabolic(quadratic());
    assert!(matches!(
        integrate(&d, &[1.5], 0.0, &Controls::default()),
        Err(Error::ChartDomain(_))
    ));
    assert!(integrate(&d, &[0.5, 0.5], 0.0, &Controls::default()).is_err());
}

#[test]
fn tau_max_truncates() {
    let d = parabolic(quadratic());
    let traj = integrate(
        &d,
        &[0.1],
        0.0,
        &Controls {
            tau_max: 0.5,
            ..Controls::default()
        },
    )
    .unwrap();
    assert_eq!(traj.stop_reason, StopReason::TauExhausted);
    assert_eq!(traj.last().tau, 0.5);
}

fn painleve_oracle() -> (f64, f64) {
    // On x1^6 + x2^4 = 1, g = 0 forces x2^2 = 4 x1^3 and hence 17 x1^6 = 1.
    (17f64.powf(-1.0 / 6.0), 2.0 * 17f64.powf(-0.25))
}

#[test]
fn painleve_horizon_equilibria() {
    let d = parabolic(painleve());
    let (a, b) = painleve_oracle();
    for chi in [0.0, 2.5] {
        let eqs = find_horizon_equilibria(&d, &SearchSpec::frozen(vec![(0, chi)])).unwrap();
        let mut points: Vec<(f64, f64)> = eqs.iter().map(|e| (e.coords[1], e.coords[2])).collect();
        points.sort_by(|p, q| p.1.total_cmp(&q.1));
        assert_eq!(points.len(), 2, "{points:?}");
        for (p, sign) in points.iter().zip([-1.0, 1.0]) {
            assert!((p.0 - a).abs() < 1e-10 && (p.1 - sign * b).abs() < 1e-10);
        }
        for e in &eqs {
            assert!(e.residual < 1e-10);
            assert!(d.horizon_gap(&e.coords).abs() < 1e-12);
            assert_eq!(e.t_slice, Some(chi));
        }
    }
    // The mirrored candidates with x1 < 0 are not zeros of g.
    let g = d.eval(&[0.0, -a, b]).unwrap();
    assert!(g[1].abs() > 0.1);
}

#[test]
fn painleve_sink_spectrum() {
    let d = parabolic(painleve());
    let (a, b) = painleve_oracle();
    let eqs = find_horizon_equilibria(&d, &SearchSpec::frozen(vec![(0, 1.0)])).unwrap();
    let sink = eqs.iter().find(|e| e.coords[2] > 0.0).unwrap();
    assert!((sink.coords[1] - a).abs() < 1e-12 && (sink.coords[2] - b).abs() < 1e-12);
    let r = 17f64.powf(-1.0 / 12.0);
    let expected = [0.0, -r, -6.0 * r];
    for (e, x) in sink.eigenvalues.iter().zip(expected) {
        assert!((e.re - x).abs() <= 1e-8 * x.abs().max(1e-8), "{e} vs {x}");
        assert!(e.im.abs() < 1e-12);
    }
    let (split, class) = spectrum_classify(sink, 1).unwrap();
    assert_eq!(class, Classification::Sink);
    assert_eq!(split.tangential.len(), 1);
    assert!((split.gap - r).abs() < 1e-8);
    let source = eqs.iter().find(|e| e.coords[2] < 0.0).unwrap();
    assert_eq!(source.classification, Classification::Source);
    assert!(check_nonresonance(&[-r, -6.0 * r], 1).holds);
}

#[test]
fn kk_equilibria_and_types() {
    let d = directional(kk(0.0), 2, Sign::Plus);
    let eqs = find_horizon_equilibria(&d, &SearchSpec::frozen(vec![(0, 0.0)])).unwrap();
    let r3 = 3f64.sqrt();
    let expected = [
        -(3.0 + r3).sqrt(),
        -(3.0 - r3).sqrt(),
        (3.0 - r3).sqrt(),
        (3.0 + r3).sqrt(),
    ];
    assert_eq!(eqs.len(), 4);
    for (e, x) in eqs.iter().zip(expected) {
        assert!((e.coords[1] - x).abs() < 1e-10);
        assert!(e.coords[3].abs() < 1e-10 && e.coords[4].abs() < 1e-10);
        // normal eigenvalue ds'/ds = -x1^3 / 6
        assert!((e.jacobian[(2, 2)] + x.powi(3) / 6.0).abs() < 1e-10);
    }
    let classes: Vec<_> = eqs.iter().map(|e| e.classification).collect();
    assert_eq!(
        classes,
        vec![
            Classification::Source,
            Classification::Saddle,
            Classification::Saddle,
            Classification::Sink
        ]
    );
}

#[test]
fn selfsimilar_families() {
    let beta = -1.0;
    let d = directional(selfsimilar(-1.0, beta, -0.5), 1, Sign::Plus);
    let chi = 1.7;
    let eqs = find_horizon_equilibria(&d, &SearchSpec::frozen(vec![(0, chi)])).unwrap();
    let xs: Vec<f64> = eqs.iter().map(|e| e.coords[2]).collect();
    assert_eq!(xs.len(), 2);
    assert!(xs[0].abs() < 1e-12 && (xs[1] + beta * chi).abs() < 1e-12);
    // (chi, 0, 0) has a double zero eigenvalue: nonhyperbolic
    assert_eq!(eqs[0].classification, Classification::Nonhyperbolic);
    let e = &eqs[1];
    let expected = DMatrix::from_row_slice(
        3,
        3,
        &[0.0, 0.0, 0.0, 0.0, beta * chi, 0.0, beta * beta * chi, 0.0, beta * chi],
    );
    assert!((&e.jacobian - expected).abs().max() < 1e-12);
    assert_eq!(e.classification, Classification::Sink);
}

#[test]
fn selfsimilar_curve() {
    let beta = -1.0;
    let d = directional(selfsimilar(-1.0, beta, -0.5), 1, Sign::Plus);
    let curve = trace_equilibrium_curve(&d, (1.0, 2.0), 0.05, &[1.0, 0.0, 0.9]).unwrap();
    assert_eq!(curve.samples.len(), 21);
    for e in &curve.samples {
        let chi = e.coords[0];
        assert!((e.coords[2] - chi).abs() < 1e-12);
        let normal: Vec<f64> = e.split.stable.iter().map(|&i| e.eigenvalues[i].re).collect();
        assert_eq!(normal.len(), 2);
        assert!(normal.iter().all(|l| (l - beta * chi).abs() < 1e-8));
        assert_eq!(e.split.tangential.len(), 1);
    }
    assert!((curve.normal_spectrum_bounds.0 + 1.0).abs() < 1e-8);
    assert!((curve.normal_spectrum_bounds.1 - 1.0).abs() < 1e-8);
}

#[test]
fn painleve_curve_spectrum_is_constant() {
    let d = parabolic(painleve());
    let (a, b) = painleve_oracle();
    let curve = trace_equilibrium_curve(&d, (0.0, 5.0), 0.25, &[0.0, a, b]).unwrap();
    let first: Vec<f64> = curve.samples[0].eigenvalues.iter().map(|e| e.re).collect();
    for e in &curve.samples {
        for (x, y) in e.eigenvalues.iter().zip(&first) {
            assert!((x.re - y).abs() < 1e-10);
        }
    }
}

#[test]
fn mems_curves() {
    let (p, q) = (2.0, 1.0);
    let d = directional(mems(3.0, p, q), 1, Sign::Minus);
    let xstar = |r: f64| r.powf(q / 2.0) / ((p - 1.0) / 2.0f64).sqrt();
    let minus = trace_equilibrium_curve(&d, (1.0, 2.0), 0.1, &[1.0, 0.0, -1.3]).unwrap();
    for e in &minus.samples {
        assert!((e.coords[2] + xstar(e.coords[0])).abs() < 1e-10);
        assert_eq!(e.classification, Classification::Sink);
    }
    assert!(minus.normal_spectrum_bounds.0 < 0.0);
    let plus = trace_equilibrium_curve(&d, (1.0, 2.0), 0.1, &[1.0, 0.0, 1.3]).unwrap();
    for e in &plus.samples {
        assert!((e.coords[2] - xstar(e.coords[0])).abs() < 1e-10);
    }
    assert!(plus.normal_spectrum_bounds.0 > 0.0);
}

#[test]
fn curve_needs_a_time_variable() {
    let d = directional(kk(0.0), 2, Sign::Plus);
    assert!(trace_equilibrium_curve(&d, (0.0, 1.0), 0.1, &[0.0, 2.0, 0.0, 0.0, 0.0]).is_err());
}

#[test]
fn curve_break_is_reported() {
    let d = directional(mems(3.0, 2.0, 1.0), 1, Sign::Minus);
    assert!(matches!(
        trace_equilibrium_curve(&d, (0.5, -0.5), 0.1, &[0.5, 0.0, -1.0]),
        Err(Error::InvalidInput(_))
    ));
    // (p - 1)/2 x^2 = r^q has no real root for r < 0
    assert!(matches!(
        trace_equilibrium_curve(&d, (-0.5, -0.1), 0.1, &[-0.5, 0.0, -1.0]),
        Err(Error::CurveBreak { t }) if t == -0.5
    ));
}

fn synthetic(gap: impl Fn(f64) -> f64, tau_end: f64, step: f64) -> Trajectory {
    let d = parabolic(quadratic());
    let n = (tau_end / step).round() as usize;
    let samples = (0..=n)
        .map(|i| {
            let tau = i as f64 * step;
            Sample {
                tau,
                coords: vec![0.0],
                t: 0.0,
                dt_dtau: gap(tau),
                gap: gap(tau),
            }
        })
        .collect();
    Trajectory {
        chart: d.chart().clone(),
        samples,
        stop_reason: StopReason::HorizonReached,
    }
}

#[test]
fn decay_of_pure_exponential() {
    let traj = synthetic(|t| (-2.0 * t).exp(), 12.0, 0.05);
    let fit = estimate_decay(&traj, GapWindow::default()).unwrap();
    assert!((fit.lambda - 2.0).abs() < 1e-10);
    assert!(fit.residual_slope < 1e-10);
}

#[test]
fn decay_with_polynomial_prefactor() {
    // gap = tau e^{-tau}: deeper windows see less of the prefactor
    let traj = synthetic(|t| t * (-t).exp(), 120.0, 0.05);
    let windows = [(1e-8, 1e-3), (1e-16, 1e-8), (1e-30, 1e-16), (1e-45, 1e-30)];
    let fits: Vec<_> = windows
        .iter()
        .map(|&(lo, hi)| estimate_decay(&traj, GapWindow { lo, hi }).unwrap())
        .collect();
    for w in fits.windows(2) {
        assert!(w[1].residual_slope < w[0].residual_slope);
        assert!((w[1].lambda - 1.0).abs() < (w[0].lambda - 1.0).abs());
    }
    assert!(fits[3].residual_slope < 1e-3);
    assert!((fits[3].lambda - 1.0).abs() < 0.02);
}

#[test]
fn decay_needs_enough_samples() {
    let traj = synthetic(|t| (-t).exp(), 12.0, 1.0);
    assert!(matches!(
        estimate_decay(&traj, GapWindow::default()),
        Err(Error::InsufficientWindow { required: 20, .. })
    ));
}

/// Independent check: recursive enumeration of all multi-indices.
fn brute_force_resonant(eigs: &[f64], n: u32) -> bool {
    fn rec(eigs: &[f64], i: usize, left: u32, acc: f64, scale: f64, used: u32, n: u32) -> bool {
        if i == eigs.len() {
            if used < 2 || used > 2 * n {
                return false;
            }
            if acc.abs() <= 1e-10 * scale {
                return true;
            }
            return eigs.iter().any(|l| (l - acc).abs() <= 1e-10 * l.abs().max(acc.abs()));
        }
        (0..=left).any(|m| {
            let term = m as f64 * eigs[i];
            rec(eigs, i + 1, left - m, acc + term, scale + term.abs(), used + m, n)
        })
    }
    rec(eigs, 0, 2 * n, 0.0, 0.0, 0, n)
}

proptest! {
    #[test]
    fn nonresonance_matches_brute_force(
        eigs in prop::collection::vec(prop_oneof![(-6i32..=-1).prop_map(f64::from), -5.0f64..-0.1], 1..=4),
        n in 1u32..=2,
    ) {
        let r = check_nonresonance(&eigs, n);
        prop_assert_eq!(r.holds, !brute_force_resonant(&eigs, n));
        if let Some(m) = &r.witness {
            let total: u32 = m.iter().sum();
            prop_assert!((2..=2 * n).contains(&total));
        }
    }

    #[test]
    fn spectrum_is_permutation_invariant(
        entries in prop::collection::vec(-3.0f64..3.0, 16),
        perm in Just((0..4).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let m = DMatrix::from_row_slice(4, 4, &entries);
        let p = DMatrix::from_fn(4, 4, |i, j| if perm[i] == j { 1.0 } else { 0.0 });
        let pm = &p * &m * p.transpose();
        let a = eigenvalues(&m).unwrap();
        let b = eigenvalues(&pm).unwrap();
        for x in &a {
            let nearest = b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(nearest < 1e-10 * (1.0 + x.norm()), "{} missing", x);
        }
    }
}
