use kpp_fronts::{
    find_critical_speed, reconstruct, tail_report, wave_mass, CriticalSpeedResult, DiffusionLaw, ProfileOptions,
    ReactionLaw, SolverOptions,
};

fn solve(p: f64, mu: f64) -> (DiffusionLaw, ReactionLaw, CriticalSpeedResult) {
    let law = DiffusionLaw::p_laplacian(p).unwrap();
    let rx = ReactionLaw::double_well(mu).unwrap();
    let res = find_critical_speed(&law, &rx, &SolverOptions::default()).unwrap();
    (law, rx, res)
}

#[test]
fn mass_equals_truncated_range() {
    for (p, mu) in [(2.0, -0.25), (3.0, -0.25), (2.0, -0.1), (3.0, 0.0)] {
        let (law, rx, res) = solve(p, mu);
        let wave = reconstruct(&res, &law, &rx, &ProfileOptions::default()).unwrap();
        assert!(
            (wave_mass(&wave) - 1.9998).abs() < 1e-3,
            "p={p} mu={mu}: {}",
            wave_mass(&wave)
        );
    }
}

#[test]
fn samples_strictly_ordered_and_normalised() {
    for (p, mu) in [(1.5, -0.25), (2.0, -0.4), (3.0, -0.25)] {
        let (law, rx, res) = solve(p, mu);
        let wave = reconstruct(&res, &law, &rx, &ProfileOptions::default()).unwrap();
        assert!(wave.samples.windows(2).all(|w| w[1].x > w[0].x && w[1].q < w[0].q));
        assert!(wave.samples.iter().all(|s| s.qx < 0.0));
        assert!((wave.q_at(0.0) - mu).abs() < 1e-10, "p={p}");
        assert!(wave.residuals.ode < 1e-3, "p={p}: {}", wave.residuals.ode);
        assert!(wave.residuals.speed_identity.unwrap() < 1e-5);
    }
}

#[test]
fn translation_covariance() {
    let (law, rx, res) = solve(3.0, -0.25);
    let a = reconstruct(&res, &law, &rx, &ProfileOptions::default()).unwrap();
    let b = reconstruct(
        &res,
        &law,
        &rx,
        &ProfileOptions {
            normalize_at: Some(0.3),
            ..Default::default()
        },
    )
    .unwrap();
    let shift = b.samples[0].x - a.samples[0].x;
    for (sa, sb) in a.samples.iter().zip(&b.samples) {
        assert_eq!(sa.q, sb.q);
        assert!((sb.x - sa.x - shift).abs() < 1e-10);
    }
    assert!((b.q_at(0.0) - 0.3).abs() < 1e-10);
}

#[test]
fn refinement_is_stable_at_probe_points() {
    let (law, rx, res) = solve(2.0, -0.25);
    let coarse = reconstruct(&res, &law, &rx, &ProfileOptions::default()).unwrap();
    let fine = reconstruct(
        &res,
        &law,
        &rx,
        &ProfileOptions {
            n_samples: 8001,
            quad_tol: 5e-11,
            ..Default::default()
        },
    )
    .unwrap();
    for x in [-3.0, -1.0, -0.2, 0.0, 0.7, 2.5] {
        assert!((coarse.q_at(x) - fine.q_at(x)).abs() < 1e-6, "x={x}");
    }
}

#[test]
fn quadratic_wave_is_shifted_tanh() {
    let (law, rx, res) = solve(2.0, -0.25);
    let wave = reconstruct(
        &res,
        &law,
        &rx,
        &ProfileOptions {
            eta: 1e-3,
            ..Default::default()
        },
    )
    .unwrap();
    let x0 = (-0.25f64).atanh();
    assert!((x0 + 0.2554).abs() < 1e-4);
    let worst = wave
        .samples
        .iter()
        .map(|s| (s.q + (s.x - x0).tanh()).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn standing_wave_is_tanh() {
    let (law, rx, res) = solve(2.0, 0.0);
    assert_eq!(res.c_star, 0.0);
    let wave = reconstruct(&res, &law, &rx, &ProfileOptions::default()).unwrap();
    assert!(wave.residuals.speed_identity.is_none());
    let worst = wave
        .samples
        .iter()
        .map(|s| (s.q + s.x.tanh()).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn tails_flatten_as_truncation_shrinks() {
    for p in [2.0, 3.0] {
        let (law, rx, res) = solve(p, -0.25);
        let spans = tail_report(&res, &law, &rx, &[1e-2, 1e-3, 1e-4], &ProfileOptions::default()).unwrap();
        for w in spans.windows(2) {
            assert!(w[1].slope_left < w[0].slope_left && w[1].slope_right < w[0].slope_right);
            assert!(w[1].x_min < w[0].x_min && w[1].x_max > w[0].x_max);
        }
    }
}
