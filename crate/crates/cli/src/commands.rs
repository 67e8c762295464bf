use std::path::Path;
use std::time::Instant;

use kpp_fronts::pdesim::SweepRow;
use kpp_fronts::{
    epsilon_sweep, find_critical_speed, reconstruct, run_front, speed_identity_residual, validate_kpp, wave_mass,
    CriticalSpeedResult, DiffusionLaw, ReactionLaw, SolverOptions, ValidationReport,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{csv_bytes, json_bytes, thin, write_atomic, Chart};
use crate::CliError;

const PLOT_POINTS: usize = 1500;

fn failure(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

fn admissible(reaction: &ReactionLaw) -> Result<ValidationReport, CliError> {
    let report = validate_kpp(reaction, false);
    if report.passed {
        Ok(report)
    } else {
        Err(CliError::Failure(format!(
            "reaction law rejected: {}",
            report.failure_reasons()
        )))
    }
}

fn finish_report(mut report: Value, cfg: &RunConfig, started: Instant) -> Value {
    if !cfg.output.deterministic {
        report["elapsed_seconds"] = json!(started.elapsed().as_secs_f64());
    }
    report
}

struct DiffusionCheck {
    name: &'static str,
    worst: f64,
    tol: f64,
}

/// Spot checks of the diffusion law on a log grid of slopes: `g` increases,
/// `ψ` inverts it, Fenchel equality holds and `H` undoes the contact map.
fn diffusion_checks(law: &DiffusionLaw) -> Result<Vec<DiffusionCheck>, CliError> {
    let slopes: Vec<f64> = (0..=50).map(|i| 10f64.powf(-3.0 + 5.0 * i as f64 / 50.0)).collect();
    let mut increasing: f64 = 0.0;
    let mut inverse: f64 = 0.0;
    let mut fenchel: f64 = 0.0;
    let mut contact: f64 = 0.0;
    let mut prev = 0.0;
    for &s in &slopes {
        let g = law.flux(s).map_err(failure)?;
        if g <= prev {
            increasing = increasing.max(prev - g + f64::MIN_POSITIVE);
        }
        prev = g;
        let back = law.inverse_flux(g).map_err(failure)?;
        inverse = inverse.max((back - s).abs() / s);
        let (phi, psi) = (law.potential(s).map_err(failure)?, law.conjugate(g).map_err(failure)?);
        fenchel = fenchel.max((phi + psi - s * g).abs() / (s * g));
        contact = contact.max((law.h(psi).map_err(failure)? - s).abs() / s);
    }
    Ok(vec![
        DiffusionCheck {
            name: "flux increasing",
            worst: increasing,
            tol: 0.0,
        },
        DiffusionCheck {
            name: "inverse flux",
            worst: inverse,
            tol: 1e-8,
        },
        DiffusionCheck {
            name: "Fenchel equality",
            worst: fenchel,
            tol: 1e-8,
        },
        DiffusionCheck {
            name: "H inverts contact",
            worst: contact,
            tol: 1e-8,
        },
    ])
}

pub fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    let law = cfg.diffusion_law()?;
    let reaction = cfg.reaction_law()?;
    let report = validate_kpp(&reaction, false);
    println!("{report}");
    let (l1, l2) = law.ellipticity();
    println!("diffusion law: ellipticity bounds ({l1}, {l2})");
    let mut ok = report.passed;
    for c in diffusion_checks(&law)? {
        let pass = c.worst <= c.tol;
        ok &= pass;
        println!(
            "[{}] {:<18} worst defect {:.2e}",
            if pass { "ok  " } else { "FAIL" },
            c.name,
            c.worst
        );
    }
    if ok {
        Ok(())
    } else if !report.passed {
        Err(CliError::Failure(format!(
            "reaction law rejected: {}",
            report.failure_reasons()
        )))
    } else {
        Err(CliError::Failure("diffusion law failed its consistency checks".into()))
    }
}

#[derive(Serialize)]
struct ZRow {
    r: f64,
    z: f64,
}

pub fn wave(cfg: &RunConfig, out: &Path, svg: bool) -> Result<(), CliError> {
    let started = Instant::now();
    let law = cfg.diffusion_law()?;
    let reaction = cfg.reaction_law()?;
    let validation = admissible(&reaction)?;
    let res = find_critical_speed(&law, &reaction, &cfg.solver).map_err(failure)?;
    let wave = reconstruct(&res, &law, &reaction, &cfg.profile).map_err(failure)?;
    let identity = if res.stationary {
        None
    } else {
        Some(speed_identity_residual(&res, &law, &reaction).map_err(failure)?)
    };

    let t = &res.trajectory;
    write_atomic(out, "speed.txt", format!("{:.10}\n", res.c_star).as_bytes())?;
    write_atomic(
        out,
        "z.csv",
        &csv_bytes(t.r.iter().zip(&t.z).map(|(&r, &z)| ZRow { r, z }))?,
    )?;
    write_atomic(out, "profile.csv", &csv_bytes(&wave.samples)?)?;
    let report = json!({
        "c_star": res.c_star,
        "bracket": res.bracket,
        "iterations": res.iterations,
        "stationary": res.stationary,
        "mu": reaction.mu(),
        "f_total": reaction.f_total(),
        "speed_identity_residual": identity,
        "profile_residuals": wave.residuals,
        "wave_mass": wave_mass(&wave),
        "x_span": wave.x_span(),
        "truncation": wave.truncation,
        "trajectory_nodes": t.r.len(),
        "early_negative_at": t.early_negative_at,
        "validation": validation,
        "config": cfg,
    });
    write_atomic(out, "report.json", &json_bytes(&finish_report(report, cfg, started)))?;
    if svg {
        let profile: Vec<(f64, f64)> = wave.samples.iter().map(|s| (s.x, s.q)).collect();
        let chart = Chart {
            title: &format!("wave profile, c* = {:.6}", res.c_star),
            x_label: "x",
            y_label: "q",
            series: vec![("q(x)", thin(&profile, PLOT_POINTS))],
        };
        write_atomic(out, "profile.svg", chart.to_svg().as_bytes())?;
        let z: Vec<(f64, f64)> = t.r.iter().copied().zip(t.z.iter().copied()).collect();
        let chart = Chart {
            title: "phase plane at the critical speed",
            x_label: "r",
            y_label: "z",
            series: vec![("z(r)", thin(&z, PLOT_POINTS))],
        };
        write_atomic(out, "z.svg", chart.to_svg().as_bytes())?;
    }
    println!("c* = {:.10}", res.c_star);
    match identity {
        Some(r) => println!("speed identity residual {r:.2e}"),
        None => println!("stationary: F(1) = 0, standing wave"),
    }
    println!("wrote {}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct SnapshotRow {
    t: f64,
    x: f64,
    u: f64,
}

/// Shooting speed for the law the simulator uses, for side-by-side reports.
fn reference_speed(
    law: &DiffusionLaw,
    reaction: &ReactionLaw,
    opts: &SolverOptions,
) -> Result<CriticalSpeedResult, CliError> {
    find_critical_speed(law, reaction, opts).map_err(failure)
}

pub fn simulate(cfg: &RunConfig, out: &Path, svg: bool) -> Result<(), CliError> {
    let started = Instant::now();
    let law = cfg.sim_law()?;
    let reaction = cfg.reaction_law()?;
    let front = cfg.front_options()?;
    let state = cfg.initial_state(&law)?;
    admissible(&reaction)?;
    let c_star = reference_speed(&law, &reaction, &cfg.solver)?.c_star;
    let run = run_front(&state, &law, &reaction, &front).map_err(failure)?;
    let trace = &run.trace;

    write_atomic(out, "front.csv", &csv_bytes(&trace.samples)?)?;
    let nodes = state.grid.nodes();
    let rows = run
        .snapshots
        .iter()
        .flat_map(|s| nodes.iter().zip(&s.u).map(move |(&x, &u)| SnapshotRow { t: s.t, x, u }));
    write_atomic(out, "snapshots.csv", &csv_bytes(rows)?)?;
    let relative_gap = (c_star > 0.0).then(|| (trace.fitted_speed - c_star) / c_star);
    let report = json!({
        "fitted_speed": trace.fitted_speed,
        "fit_window": trace.fit_window,
        "fit_residual": trace.fit_residual,
        "c_star": c_star,
        "relative_gap": relative_gap,
        "samples": trace.samples.len(),
        "steps": run.steps,
        "warnings": run.warnings,
        "geometry": cfg.geometry(),
        "grid": state.grid,
        "epsilon": state.epsilon,
        "alpha": state.alpha,
        "config": cfg,
    });
    write_atomic(out, "report.json", &json_bytes(&finish_report(report, cfg, started)))?;
    if svg {
        let pts: Vec<(f64, f64)> = trace.samples.iter().map(|s| (s.t, s.x_front)).collect();
        let chart = Chart {
            title: &format!("front position, fitted speed {:.5}", trace.fitted_speed),
            x_label: "t",
            y_label: "front",
            series: vec![("x_front(t)", thin(&pts, PLOT_POINTS))],
        };
        write_atomic(out, "front.svg", chart.to_svg().as_bytes())?;
        if !run.snapshots.is_empty() {
            let labels: Vec<String> = run.snapshots.iter().map(|s| format!("t = {}", s.t)).collect();
            let picked = thin(&(0..run.snapshots.len()).collect::<Vec<_>>(), 4);
            let series = picked
                .iter()
                .map(|&k| {
                    let pts: Vec<(f64, f64)> = nodes.iter().copied().zip(run.snapshots[k].u.iter().copied()).collect();
                    (labels[k].as_str(), thin(&pts, PLOT_POINTS))
                })
                .collect();
            let chart = Chart {
                title: "snapshots",
                x_label: "x",
                y_label: "u",
                series,
            };
            write_atomic(out, "snapshots.svg", chart.to_svg().as_bytes())?;
        }
    }
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    println!("fitted speed {:.6} (shooting c* = {c_star:.6})", trace.fitted_speed);
    println!("wrote {}", out.display());
    Ok(())
}

pub fn sweep(cfg: &RunConfig, out: &Path, svg: bool) -> Result<(), CliError> {
    let started = Instant::now();
    let setup = cfg.sweep_setup()?;
    // the initial state must be valid at ε = 1 before fanning out
    cfg.initial_state(&setup.law)?;
    admissible(&setup.reaction)?;
    let c_star = reference_speed(&setup.law, &setup.reaction, &cfg.solver)?.c_star;
    let rows: Vec<SweepRow> = epsilon_sweep(&setup, &cfg.sweep.epsilons).map_err(failure)?;
    write_atomic(out, "sweep.csv", &csv_bytes(&rows)?)?;
    let report = json!({ "rows": rows, "c_star": c_star, "config": cfg });
    write_atomic(out, "report.json", &json_bytes(&finish_report(report, cfg, started)))?;
    if svg {
        let chart = Chart {
            title: "fitted speed against epsilon",
            x_label: "epsilon",
            y_label: "speed",
            series: vec![
                ("fitted", rows.iter().map(|r| (r.epsilon, r.fitted_speed)).collect()),
                ("c*", rows.iter().map(|r| (r.epsilon, c_star)).collect()),
            ],
        };
        write_atomic(out, "sweep.svg", chart.to_svg().as_bytes())?;
    }
    for r in &rows {
        let width = r.interface_width.map_or("n/a".to_string(), |w| format!("{w:.4}"));
        println!("eps = {:<8} speed {:.6}  width {width}", r.epsilon, r.fitted_speed);
    }
    println!("wrote {}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct LadderRow {
    alpha: f64,
    c_star: f64,
    /// `|c_α − c_{next α}|`, empty on the last row.
    gap: Option<f64>,
    /// `|c_α − c*|` against the unregularized law.
    error: f64,
}

pub fn regularization_study(cfg: &RunConfig, out: &Path, svg: bool) -> Result<(), CliError> {
    let started = Instant::now();
    if cfg.diffusion.alpha.is_some() {
        return Err(CliError::Usage(
            "regularization-study ladders its own alpha values; remove diffusion.alpha".into(),
        ));
    }
    let base = cfg.diffusion_law()?;
    let reaction = cfg.reaction_law()?;
    let alphas = &cfg.regularization.alphas;
    if alphas.is_empty() {
        return Err(CliError::Usage("regularization.alphas is empty".into()));
    }
    let laws = alphas
        .iter()
        .map(|&a| {
            base.regularize(a)
                .map_err(|e| CliError::Usage(format!("regularization.alphas: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    admissible(&reaction)?;
    let opts = &cfg.regularization.solver;
    let reference = reference_speed(&base, &reaction, opts)?.c_star;
    let speeds = laws
        .par_iter()
        .map(|law| reference_speed(law, &reaction, opts).map(|r| r.c_star))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<LadderRow> = alphas
        .iter()
        .enumerate()
        .map(|(k, &alpha)| LadderRow {
            alpha,
            c_star: speeds[k],
            gap: speeds.get(k + 1).map(|next| (speeds[k] - next).abs()),
            error: (speeds[k] - reference).abs(),
        })
        .collect();
    let gaps: Vec<f64> = rows.iter().filter_map(|r| r.gap).collect();
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    write_atomic(out, "regularization.csv", &csv_bytes(&rows)?)?;
    let report = json!({
        "rows": rows,
        "c_star_unregularized": reference,
        "gaps_strictly_decreasing": decreasing,
        "config": cfg,
    });
    write_atomic(out, "report.json", &json_bytes(&finish_report(report, cfg, started)))?;
    if svg {
        let chart = Chart {
            title: "regularized speeds",
            x_label: "log10 alpha",
            y_label: "c_alpha",
            series: vec![
                ("c_alpha", rows.iter().map(|r| (r.alpha.log10(), r.c_star)).collect()),
                ("c*", rows.iter().map(|r| (r.alpha.log10(), reference)).collect()),
            ],
        };
        write_atomic(out, "regularization.svg", chart.to_svg().as_bytes())?;
    }
    for r in &rows {
        println!(
            "alpha = {:<8e} c = {:.10}  |c - c*| = {:.2e}",
            r.alpha, r.c_star, r.error
        );
    }
    println!("unregularized c* = {reference:.10}; gaps strictly decreasing: {decreasing}");
    println!("wrote {}", out.display());
    Ok(())
}
