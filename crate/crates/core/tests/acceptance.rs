//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Tolerances and runtime budgets are the constants below.

mod common;

use std::time::{Duration, Instant};

use kpp_fronts::pdesim::fit_speed;
use kpp_fronts::shooting::shoot_sampled;
use kpp_fronts::{
    find_critical_speed, reconstruct, run_front, shoot, speed_identity_residual, DiffusionLaw, FrontOptions, Grid1D,
    InitialProfile, IntegratorOptions, ProfileOptions, ReactionLaw, SimState, SolverOptions, Stepper,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const SPEED_TOL: f64 = 1e-6;
const PHASE_TOL: f64 = 1e-6;
const IDENTITY_TOL: f64 = 1e-5;
const ORDER_SLACK: f64 = 1e-10;
const TANH_TOL: f64 = 1e-4;
const PDE_REL_TOL: f64 = 0.02;
const BAND_SLACK: f64 = 1e-12;
const LADDER_FINAL_GAP: f64 = 1e-4;

const MU: f64 = -0.25;

struct Outcome {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn pl(p: f64) -> DiffusionLaw {
    DiffusionLaw::p_laplacian(p).unwrap()
}

fn well(mu: f64) -> ReactionLaw {
    ReactionLaw::double_well(mu).unwrap()
}

fn tight() -> SolverOptions {
    SolverOptions {
        c_tol: 1e-12,
        z_tol: 1e-14,
        integrator: IntegratorOptions {
            rtol: 1e-13,
            atol: 1e-15,
            ..Default::default()
        },
        ..Default::default()
    }
}

/// Residual of `q'' + c q' + f(q)` for `q = −tanh(x − x₀)`, `c = −2μ`,
/// written out by hand: `q' = −sech²`, `q'' = 2 tanh sech²`.
fn tanh_wave_residual(mu: f64) -> f64 {
    let x0 = mu.atanh();
    (-400..=400)
        .map(|i| {
            let x = i as f64 * 0.02;
            let t = (x - x0).tanh();
            let sech2 = 1.0 - t * t;
            let q = -t;
            (2.0 * t * sech2 + (-2.0 * mu) * (-sech2) + common::double_well(mu, q)).abs()
        })
        .fold(0.0, f64::max)
}

fn closed_form_speed() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for mu in [-0.1, -0.25, -0.4] {
        let start = Instant::now();
        let res = find_critical_speed(&pl(2.0), &well(mu), &SolverOptions::default()).unwrap();
        let elapsed = start.elapsed();
        let err = (res.c_star + 2.0 * mu).abs();
        let f_err = (well(mu).f_total() + 8.0 * mu / 3.0).abs();
        let analytic = tanh_wave_residual(mu);
        ok &= err <= SPEED_TOL && f_err <= 1e-12 && analytic <= 1e-12 && elapsed < Duration::from_secs(1);
        parts.push(format!(
            "mu={mu}: |c*+2mu|={err:.1e} |F(1)+8mu/3|={f_err:.1e} ({elapsed:.2?})"
        ));
    }
    verdict(ok, parts.join("; "))
}

fn closed_form_phase_plane() -> Outcome {
    let start = Instant::now();
    let res = find_critical_speed(&pl(2.0), &well(MU), &SolverOptions::default()).unwrap();
    let t = &res.trajectory;
    let worst =
        t.r.iter()
            .zip(&t.z)
            .map(|(r, z)| (z - (1.0 - r * r).powi(2) / 2.0).abs())
            .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    verdict(
        worst <= PHASE_TOL && elapsed < Duration::from_secs(1),
        format!(
            "sup |z - (1-r^2)^2/2| = {worst:.2e} over {} nodes ({elapsed:.2?})",
            t.r.len()
        ),
    )
}

fn speed_identity() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [1.5, 2.0, 3.0] {
        let rx = well(MU);
        let res = find_critical_speed(&pl(p), &rx, &SolverOptions::default()).unwrap();
        let rel = speed_identity_residual(&res, &pl(p), &rx).unwrap();
        ok &= rel <= IDENTITY_TOL;
        parts.push(format!("p={p}: c*={:.8} residual={rel:.1e}", res.c_star));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(5);
    parts.push(format!("({elapsed:.2?})"));
    verdict(ok, parts.join("; "))
}

fn shooting_order() -> Outcome {
    let start = Instant::now();
    let rx = well(MU);
    let opts = IntegratorOptions::default();
    let grid: Vec<f64> = (1..200).map(|i| -1.0 + 2.0 * i as f64 / 200.0).collect();
    let mut rng = StdRng::seed_from_u64(2024);
    let mut violations = 0usize;
    let mut checked = 0usize;
    for p in [1.5, 2.0, 3.0] {
        for _ in 0..20 {
            let c2 = rng.random_range(0.0..1.5);
            let c1 = c2 + rng.random_range(1e-3..1.0);
            let a = shoot_sampled(c1, &pl(p), &rx, &opts, &grid).unwrap();
            let b = shoot_sampled(c2, &pl(p), &rx, &opts, &grid).unwrap();
            for &r in &grid {
                let z1 = a.value_at_node(r).unwrap();
                let z2 = b.value_at_node(r).unwrap();
                checked += 1;
                if z1 > z2 + ORDER_SLACK || (z1 > ORDER_SLACK && z1 >= z2) {
                    violations += 1;
                }
            }
        }
        let terminals: Vec<f64> = (0..10)
            .map(|i| shoot(i as f64 * 0.12, &pl(p), &rx, &opts).unwrap().terminal)
            .collect();
        violations += terminals.windows(2).filter(|w| w[1] > w[0] + ORDER_SLACK).count();
    }
    let elapsed = start.elapsed();
    verdict(
        violations == 0 && elapsed < Duration::from_secs(10),
        format!("{violations} violations over {checked} node comparisons and 3 ladders ({elapsed:.2?})"),
    )
}

fn stationary_profile() -> Outcome {
    let start = Instant::now();
    let (law, rx) = (pl(2.0), well(0.0));
    let res = find_critical_speed(&law, &rx, &SolverOptions::default()).unwrap();
    let wave = reconstruct(&res, &law, &rx, &ProfileOptions::default()).unwrap();
    let worst = wave
        .samples
        .iter()
        .map(|s| (s.q + s.x.tanh()).abs())
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    let (lo, hi) = wave.x_span();
    verdict(
        res.c_star == 0.0 && worst <= TANH_TOL && elapsed < Duration::from_secs(1),
        format!(
            "c*={} sup |q + tanh x| = {worst:.2e} on [{lo:.2}, {hi:.2}] ({elapsed:.2?})",
            res.c_star
        ),
    )
}

fn line_front_speed() -> (Outcome, f64) {
    let start = Instant::now();
    let law = pl(2.0).regularize(1e-3).unwrap();
    let grid = Grid1D::line(-30.0, 90.0, 6001).unwrap();
    let state = SimState::from_profile(
        grid,
        &InitialProfile::Tanh {
            center: 0.0,
            width: 1.0,
        },
        1.0,
        1e-3,
    )
    .unwrap();
    let run = run_front(&state, &law, &well(MU), &FrontOptions::default()).unwrap();
    let speed = run.trace.fitted_speed;
    let rel = (speed - 0.5).abs() / 0.5;
    let elapsed = start.elapsed();
    (
        verdict(
            rel <= PDE_REL_TOL && elapsed < Duration::from_secs(60),
            format!(
                "fitted speed {speed:.6} vs 0.5, relative error {rel:.1e}, {} steps ({elapsed:.2?})",
                run.steps
            ),
        ),
        speed,
    )
}

#[derive(Default)]
struct Tally {
    equilibria: usize,
    band: usize,
    monotone: usize,
    order: usize,
}

fn discrete_structure() -> Outcome {
    let start = Instant::now();
    let rx = well(MU);
    let alpha = 1e-3;
    let grids = [
        Grid1D::line(-10.0, 10.0, 201).unwrap(),
        Grid1D::radial(20.0, 201, 2).unwrap(),
        Grid1D::radial(20.0, 201, 3).unwrap(),
    ];
    let in_band = |u: &[f64]| u.iter().all(|v| (-1.0 - BAND_SLACK..=1.0 + BAND_SLACK).contains(v));
    let mut rng = StdRng::seed_from_u64(99);
    let mut bad = Tally::default();
    for p in [1.5, 2.0, 3.0] {
        let law = pl(p).regularize(alpha).unwrap();
        for grid in grids {
            let mut stepper = Stepper::new(&law, &rx, grid, 1.0).unwrap();
            for c in [1.0, -1.0, MU] {
                let mut s = SimState::new(grid, vec![c; grid.n], 1.0, alpha).unwrap();
                for _ in 0..50 {
                    let dt = stepper.admissible_dt(&s.u);
                    stepper.step(&mut s, dt).unwrap();
                }
                bad.equilibria += s.u.iter().filter(|&&v| v != c).count();
            }

            let mut m0: Vec<f64> = (0..grid.n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            m0.sort_by(|a, b| b.total_cmp(a));
            let mut m = SimState::new(grid, m0, 1.0, alpha).unwrap();
            for _ in 0..200 {
                let dt = stepper.admissible_dt(&m.u);
                stepper.step(&mut m, dt).unwrap();
                bad.band += usize::from(!in_band(&m.u));
                bad.monotone += m.u.windows(2).filter(|w| w[1] > w[0]).count();
            }

            for _ in 0..10 {
                let a0: Vec<f64> = (0..grid.n).map(|_| rng.random_range(-1.0..=1.0)).collect();
                let b0: Vec<f64> = a0.iter().map(|&v| (v + rng.random_range(0.0..0.5)).min(1.0)).collect();
                let mut a = SimState::new(grid, a0, 1.0, alpha).unwrap();
                let mut b = SimState::new(grid, b0, 1.0, alpha).unwrap();
                let mut sb = Stepper::new(&law, &rx, grid, 1.0).unwrap();
                for _ in 0..100 {
                    let dt = stepper.admissible_dt(&a.u).min(sb.admissible_dt(&b.u));
                    stepper.step(&mut a, dt).unwrap();
                    sb.step(&mut b, dt).unwrap();
                    bad.band += usize::from(!in_band(&a.u)) + usize::from(!in_band(&b.u));
                    bad.order += a.u.iter().zip(&b.u).filter(|(x, y)| x > y).count();
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let total = bad.equilibria + bad.band + bad.monotone + bad.order;
    verdict(
        total == 0 && elapsed < Duration::from_secs(30),
        format!(
            "violations: equilibria {}, band {}, monotone {}, comparison {} ({elapsed:.2?})",
            bad.equilibria, bad.band, bad.monotone, bad.order
        ),
    )
}

fn regularization_ladder() -> Outcome {
    let start = Instant::now();
    let rx = well(MU);
    let speeds: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&a| {
            find_critical_speed(&pl(3.0).regularize(a).unwrap(), &rx, &tight())
                .unwrap()
                .c_star
        })
        .collect();
    let gaps: Vec<f64> = speeds.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let last = *gaps.last().unwrap();
    let elapsed = start.elapsed();
    verdict(
        decreasing && last <= LADDER_FINAL_GAP && elapsed < Duration::from_secs(10),
        format!(
            "c_alpha = {speeds:.10?}, gaps = [{}] ({elapsed:.2?})",
            gaps.iter().map(|g| format!("{g:.1e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn radial_retardation(line_speed: f64) -> Outcome {
    let start = Instant::now();
    let law = pl(2.0).regularize(1e-3).unwrap();
    let grid = Grid1D::radial(100.0, 2001, 2).unwrap();
    let state = SimState::from_profile(
        grid,
        &InitialProfile::Plateau {
            radius: 20.0,
            width: 1.0,
        },
        1.0,
        1e-3,
    )
    .unwrap();
    let t_end = 140.0;
    let run = run_front(
        &state,
        &law,
        &well(MU),
        &FrontOptions {
            t_end,
            ..Default::default()
        },
    )
    .unwrap();
    let speeds: Vec<f64> = [0.25, 0.5, 0.75]
        .iter()
        .map(|f| fit_speed(&run.trace.samples, f * t_end, t_end).unwrap().0)
        .collect();
    let increasing = speeds.windows(2).all(|w| w[1] > w[0]);
    let below = speeds.iter().all(|&s| s < line_speed && s >= 0.4);
    let elapsed = start.elapsed();
    verdict(
        increasing && below && elapsed < Duration::from_secs(120),
        format!("speeds on [35,140], [70,140], [105,140] = {speeds:.5?}, line speed {line_speed:.5} ({elapsed:.2?})"),
    )
}

fn main() {
    let (c6, line_speed) = line_front_speed();
    let outcomes = [
        ("1 closed-form speed", closed_form_speed()),
        ("2 closed-form phase plane", closed_form_phase_plane()),
        ("3 speed identity", speed_identity()),
        ("4 shooting order", shooting_order()),
        ("5 stationary profile", stationary_profile()),
        ("6 line front speed", c6),
        ("7 discrete structure", discrete_structure()),
        ("8 regularization ladder", regularization_ladder()),
        ("9 radial retardation", radial_retardation(line_speed)),
    ];
    let mut failed = 0;
    for (name, o) in &outcomes {
        println!(
            "{} criterion {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
