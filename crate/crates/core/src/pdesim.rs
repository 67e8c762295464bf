//! Explicit finite-volume simulation of
//!
//! ```text
//! ∂_t u = ∂_x g_α(ε ∂_x u) + f(u) / ε
//! ```
//!
//! on a line, or of its radially symmetric form in `N` dimensions, with front
//! tracking to measure the propagation speed.
//!
//! Nodes sit at `x_i = x_min + i dx`; node `i` owns the control volume
//! between the neighbouring face midpoints (half cells at both ends), and the
//! face flux is `g_α(ε (u_{i+1} − u_i) / dx)`. Zero flux is imposed at both
//! ends. In radial geometry fluxes are weighted by the face area `r^{N−1}`,
//! which at `r = 0` reproduces the symmetric limit `N ∂_r G`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::{DiffusionLaw, FluxKernel};
use crate::error::{Error, Result};
use crate::reaction::{ReactionKind, ReactionLaw};

/// Fraction of the monotonicity limit used for the explicit step.
pub const CFL_SAFETY: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Geometry {
    Line,
    /// Radial symmetry in `dim ≥ 2` space dimensions, `x` being the radius.
    Radial {
        dim: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub dx: f64,
    pub geometry: Geometry,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize, geometry: Geometry) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!("grid needs n >= 3 nodes, got {n}")));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::Config(format!("invalid grid range [{x_min}, {x_max}]")));
        }
        if let Geometry::Radial { dim } = geometry {
            if dim < 2 {
                return Err(Error::Config(format!(
                    "radial geometry needs dimension >= 2, got {dim}"
                )));
            }
            if x_min != 0.0 {
                return Err(Error::Config(format!("radial grids start at r = 0, got {x_min}")));
            }
        }
        Ok(Self {
            x_min,
            x_max,
            n,
            dx: (x_max - x_min) / (n - 1) as f64,
            geometry,
        })
    }

    pub fn line(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        Self::new(x_min, x_max, n, Geometry::Line)
    }

    pub fn radial(r_max: f64, n: usize, dim: usize) -> Result<Self> {
        Self::new(0.0, r_max, n, Geometry::Radial { dim })
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.n - 1 {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// `(face areas, cell volumes)` of the finite-volume discretisation.
    fn metrics(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let dx = self.dx;
        match self.geometry {
            Geometry::Line => {
                let mut vol = vec![dx; n];
                vol[0] = 0.5 * dx;
                vol[n - 1] = 0.5 * dx;
                (vec![1.0; n - 1], vol)
            }
            Geometry::Radial { dim } => {
                let d = dim as i32;
                let faces: Vec<f64> = (0..n - 1).map(|j| (j as f64 + 0.5) * dx).collect();
                let area = faces.iter().map(|r| r.powi(d - 1)).collect();
                let outer = |i: usize| if i == n - 1 { self.x_max } else { faces[i] };
                let inner = |i: usize| if i == 0 { 0.0 } else { faces[i - 1] };
                let vol = (0..n)
                    .map(|i| (outer(i).powi(d) - inner(i).powi(d)) / dim as f64)
                    .collect();
                (area, vol)
            }
        }
    }
}

/// Profile at one instant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimState {
    pub grid: Grid1D,
    pub u: Vec<f64>,
    pub t: f64,
    pub epsilon: f64,
    pub alpha: f64,
}

impl SimState {
    pub fn new(grid: Grid1D, u: Vec<f64>, epsilon: f64, alpha: f64) -> Result<Self> {
        if u.len() != grid.n {
            return Err(Error::Config(format!("{} values for {} grid nodes", u.len(), grid.n)));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be > 0, got {epsilon}")));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Config(format!("alpha must be > 0, got {alpha}")));
        }
        if let Some(v) = u.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
            return Err(Error::Config(format!("initial values must lie in [-1, 1], found {v}")));
        }
        Ok(Self {
            grid,
            u,
            t: 0.0,
            epsilon,
            alpha,
        })
    }

    pub fn from_profile(grid: Grid1D, profile: &InitialProfile, epsilon: f64, alpha: f64) -> Result<Self> {
        let u = grid.nodes().into_iter().map(|x| profile.eval(x)).collect();
        Self::new(grid, u, epsilon, alpha)
    }
}

/// Decreasing initial data `−tanh((x − center) / width)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialProfile {
    Tanh {
        center: f64,
        width: f64,
    },
    /// Radial bump: near `+1` inside `radius`, `−1` outside.
    Plateau {
        radius: f64,
        width: f64,
    },
}

impl InitialProfile {
    pub fn eval(&self, x: f64) -> f64 {
        let (c, w) = match *self {
            Self::Tanh { center, width } => (center, width),
            Self::Plateau { radius, width } => (radius, width),
        };
        (-((x - c) / w).tanh()).clamp(-1.0, 1.0)
    }

    fn scaled(&self, s: f64) -> Self {
        match *self {
            Self::Tanh { center, width } => Self::Tanh {
                center,
                width: width * s,
            },
            Self::Plateau { radius, width } => Self::Plateau {
                radius,
                width: width * s,
            },
        }
    }
}

/// Precomputed metrics and scratch space for repeated explicit steps.
pub struct Stepper<'a> {
    law: &'a DiffusionLaw,
    reaction: &'a ReactionLaw,
    grid: Grid1D,
    epsilon: f64,
    area: Vec<f64>,
    vol: Vec<f64>,
    inv_vol: Vec<f64>,
    // Largest of (area_left + area_right) / volume over cells, which keeps
    // the step order preserving, and area * (1/vol_left + 1/vol_right) over
    // faces, which keeps the sign of every difference (monotone profiles
    // stay monotone, including next to the half cells at the ends).
    geometric: f64,
    flux: Vec<f64>,
    reaction_enabled: bool,
}

impl<'a> Stepper<'a> {
    pub fn new(law: &'a DiffusionLaw, reaction: &'a ReactionLaw, grid: Grid1D, epsilon: f64) -> Result<Self> {
        if !law.is_regularized() {
            return Err(Error::Config(
                "the simulator needs a regularized diffusion law (alpha > 0)".into(),
            ));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be > 0, got {epsilon}")));
        }
        let (area, vol) = grid.metrics();
        let n = grid.n;
        let geometric = (0..n)
            .map(|i| {
                let left = if i > 0 { area[i - 1] } else { 0.0 };
                let right = if i < n - 1 { area[i] } else { 0.0 };
                (left + right) / vol[i]
            })
            .chain((0..n - 1).map(|j| area[j] * (1.0 / vol[j] + 1.0 / vol[j + 1])))
            .fold(0.0, f64::max);
        Ok(Self {
            law,
            reaction,
            grid,
            epsilon,
            inv_vol: vol.iter().map(|v| 1.0 / v).collect(),
            area,
            vol,
            geometric,
            flux: vec![0.0; n - 1],
            reaction_enabled: true,
        })
    }

    /// Switches the reaction term off, leaving pure (conservative) diffusion.
    pub fn without_reaction(mut self) -> Self {
        self.reaction_enabled = false;
        self
    }

    /// Largest step keeping the update monotone for the current gradients.
    pub fn admissible_dt(&self, u: &[f64]) -> f64 {
        if let FluxKernel::Linear(_) = self.law.kernel() {
            // g' is constant, the gradient does not matter
            return self.admissible_dt_for_jump(0.0);
        }
        let max_jump = u.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        self.admissible_dt_for_jump(max_jump)
    }

    /// As [`Self::admissible_dt`] for a given bound on `|u_{i+1} − u_i|`.
    pub fn admissible_dt_for_jump(&self, max_jump: f64) -> f64 {
        let eps = self.epsilon;
        let slope = self.law.max_flux_slope(eps * max_jump / self.grid.dx);
        let reaction_rate = if self.reaction_enabled {
            self.reaction.lipschitz() / eps
        } else {
            0.0
        };
        CFL_SAFETY / (self.geometric * eps * slope / self.grid.dx + reaction_rate)
    }

    /// One explicit Euler step in place, then clamping to `[−1, 1]`.
    pub fn step(&mut self, state: &mut SimState, dt: f64) -> Result<()> {
        if state.grid != self.grid || state.epsilon != self.epsilon {
            return Err(Error::Inconsistent(
                "state does not match the stepper grid or epsilon".into(),
            ));
        }
        if self.law.alpha() != Some(state.alpha) {
            return Err(Error::Inconsistent(format!(
                "state has alpha = {} but the law is regularized with {:?}",
                state.alpha,
                self.law.alpha()
            )));
        }
        let admissible = self.admissible_dt(&state.u);
        if !(dt > 0.0 && dt <= admissible * (1.0 + 1e-12)) {
            return Err(Error::Cfl { dt, admissible });
        }
        self.advance(&mut state.u, dt);
        state.t += dt;
        Ok(())
    }

    fn advance(&mut self, u: &mut [f64], dt: f64) {
        let kernel = self.law.kernel();
        let flux = move |z: f64| kernel.eval_signed(z);
        match (self.reaction_enabled, self.reaction.kind()) {
            (false, _) => self.advance_with(u, dt, flux, |_| 0.0),
            (true, ReactionKind::DoubleWell { mu }) => {
                let mu = *mu;
                self.advance_with(u, dt, flux, move |s| 2.0 * (s - mu) * (1.0 - s) * (1.0 + s))
            }
            (true, _) => {
                let reaction = self.reaction;
                self.advance_with(u, dt, flux, move |s| reaction.f(s))
            }
        }
    }

    #[inline(always)]
    fn advance_with<G, R>(&mut self, u: &mut [f64], dt: f64, g: G, f: R)
    where
        G: Fn(f64) -> f64,
        R: Fn(f64) -> f64,
    {
        let scale = self.epsilon / self.grid.dx;
        for ((flux, a), w) in self.flux.iter_mut().zip(&self.area).zip(u.windows(2)) {
            *flux = a * g(scale * (w[1] - w[0]));
        }
        let n = u.len();
        let inv_eps = 1.0 / self.epsilon;
        let fl = &self.flux;
        let vol = &self.inv_vol;
        let update = |ui: f64, left: f64, right: f64, inv_v: f64| {
            (ui + dt * ((right - left) * inv_v + f(ui) * inv_eps)).clamp(-1.0, 1.0)
        };
        u[0] = update(u[0], 0.0, fl[0], vol[0]);
        for i in 1..n - 1 {
            u[i] = update(u[i], fl[i - 1], fl[i], vol[i]);
        }
        u[n - 1] = update(u[n - 1], fl[n - 2], 0.0, vol[n - 1]);
    }

    /// `∑ u_i V_i`, the discrete mass.
    pub fn mass(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.vol).map(|(u, v)| u * v).sum()
    }
}

/// Single explicit step; see [`Stepper`] for repeated stepping.
pub fn step(state: &SimState, law: &DiffusionLaw, reaction: &ReactionLaw, dt: f64) -> Result<SimState> {
    let mut stepper = Stepper::new(law, reaction, state.grid, state.epsilon)?;
    let mut next = state.clone();
    stepper.step(&mut next, dt)?;
    Ok(next)
}

/// Stability-limited time step for `state`.
pub fn admissible_dt(state: &SimState, law: &DiffusionLaw, reaction: &ReactionLaw) -> Result<f64> {
    Ok(Stepper::new(law, reaction, state.grid, state.epsilon)?.admissible_dt(&state.u))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontOptions {
    pub t_end: f64,
    /// Time between recorded front positions.
    pub sample_interval: f64,
    /// Trailing fraction of the samples used for the speed fit.
    pub fit_fraction: f64,
    /// Level whose crossing defines the front; `None` means `μ`.
    pub track_level: Option<f64>,
    /// Time between stored snapshots; `None` stores none.
    pub snapshot_interval: Option<f64>,
}

impl Default for FrontOptions {
    fn default() -> Self {
        Self {
            t_end: 120.0,
            sample_interval: 0.5,
            fit_fraction: 0.5,
            track_level: None,
            snapshot_interval: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontSample {
    pub t: f64,
    pub x_front: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontTrace {
    pub samples: Vec<FrontSample>,
    pub fitted_speed: f64,
    pub fit_window: (f64, f64),
    /// Root-mean-square deviation from the fitted line.
    pub fit_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontRun {
    pub trace: FrontTrace,
    pub snapshots: Vec<Snapshot>,
    pub warnings: Vec<String>,
    pub steps: usize,
    pub final_state: SimState,
}

/// Position of the largest-`x` downward crossing of `level`, by linear
/// interpolation, together with the number of crossings found.
pub fn front_position(grid: &Grid1D, u: &[f64], level: f64) -> Option<(f64, usize)> {
    let mut found = None;
    let mut count = 0;
    for i in 0..u.len() - 1 {
        if u[i] >= level && u[i + 1] < level {
            count += 1;
            let s = (u[i] - level) / (u[i] - u[i + 1]);
            found = Some(grid.x(i) + s * grid.dx);
        }
    }
    found.map(|x| (x, count))
}

/// Distance between the crossings of `level` and `−level`.
pub fn interface_width(grid: &Grid1D, u: &[f64], level: f64) -> Option<f64> {
    let (a, _) = front_position(grid, u, level)?;
    let (b, _) = front_position(grid, u, -level)?;
    Some(b - a)
}

/// Least-squares slope of `x_front` over samples with `t ∈ [t_lo, t_hi]`;
/// returns `(slope, rms residual)`.
pub fn fit_speed(samples: &[FrontSample], t_lo: f64, t_hi: f64) -> Result<(f64, f64)> {
    let pts: Vec<&FrontSample> = samples.iter().filter(|s| s.t >= t_lo && s.t <= t_hi).collect();
    if pts.len() < 2 {
        return Err(Error::Config(format!(
            "fewer than two front samples in the fit window [{t_lo}, {t_hi}]"
        )));
    }
    let m = pts.len() as f64;
    let t_mean = pts.iter().map(|s| s.t).sum::<f64>() / m;
    let x_mean = pts.iter().map(|s| s.x_front).sum::<f64>() / m;
    let stt: f64 = pts.iter().map(|s| (s.t - t_mean).powi(2)).sum();
    let stx: f64 = pts.iter().map(|s| (s.t - t_mean) * (s.x_front - x_mean)).sum();
    let slope = stx / stt;
    let rss: f64 = pts
        .iter()
        .map(|s| (s.x_front - x_mean - slope * (s.t - t_mean)).powi(2))
        .sum();
    Ok((slope, (rss / m).sqrt()))
}

/// Steps `state0` to `opts.t_end`, recording the front every
/// `opts.sample_interval`, and fits the speed on the trailing
/// `opts.fit_fraction` of the samples.
pub fn run_front(
    state0: &SimState,
    law: &DiffusionLaw,
    reaction: &ReactionLaw,
    opts: &FrontOptions,
) -> Result<FrontRun> {
    if !(opts.t_end.is_finite() && opts.t_end > 0.0) {
        return Err(Error::Config(format!("t_end must be > 0, got {}", opts.t_end)));
    }
    if opts.sample_interval.is_nan() || opts.sample_interval <= 0.0 {
        return Err(Error::Config(format!(
            "sample_interval must be > 0, got {}",
            opts.sample_interval
        )));
    }
    if !(opts.fit_fraction > 0.0 && opts.fit_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "fit_fraction must lie in (0, 1], got {}",
            opts.fit_fraction
        )));
    }
    if let Some(w) = state0.u.windows(2).find(|w| w[1] > w[0]) {
        return Err(Error::Config(format!(
            "initial datum must be non-increasing (found {} then {})",
            w[0], w[1]
        )));
    }
    let level = opts.track_level.unwrap_or(reaction.mu());
    let grid = state0.grid;
    let mut stepper = Stepper::new(law, reaction, grid, state0.epsilon)?;
    let mut state = state0.clone();
    let t_start = state.t;
    let t_end = t_start + opts.t_end;
    // keep the front a few interface widths away from the outer wall
    let margin = (0.02 * (grid.x_max - grid.x_min)).max(4.0 * grid.dx);

    let mut samples = Vec::new();
    let mut snapshots = Vec::new();
    let mut warnings = Vec::new();
    let mut multi_warned = false;
    let mut record = |state: &SimState, samples: &mut Vec<FrontSample>, warnings: &mut Vec<String>| -> Result<()> {
        match front_position(&grid, &state.u, level) {
            Some((x, count)) if x < grid.x_max - margin => {
                if count > 1 && !multi_warned {
                    multi_warned = true;
                    warnings.push(format!(
                        "{count} crossings of level {level} at t = {}; tracking the outermost",
                        state.t
                    ));
                }
                samples.push(FrontSample { t: state.t, x_front: x });
                Ok(())
            }
            _ => Err(Error::FrontLost { t: state.t }),
        }
    };

    record(&state, &mut samples, &mut warnings)?;
    if opts.snapshot_interval.is_some() {
        snapshots.push(Snapshot {
            t: state.t,
            u: state.u.clone(),
        });
    }
    let mut next_sample = t_start + opts.sample_interval;
    let mut next_snapshot = opts.snapshot_interval.map(|s| t_start + s);
    let mut steps = 0;
    while state.t < t_end {
        let mut target = next_sample.min(t_end);
        if let Some(s) = next_snapshot {
            target = target.min(s);
        }
        let dt_max = stepper.admissible_dt(&state.u);
        let remaining = target - state.t;
        // land exactly on the target instead of leaving a sliver step
        let dt = if remaining <= dt_max * (1.0 + 1e-12) {
            remaining
        } else {
            dt_max.min(0.5 * remaining)
        };
        stepper.advance(&mut state.u, dt);
        steps += 1;
        let hit = dt == remaining;
        state.t = if hit { target } else { state.t + dt };
        if hit && state.t >= next_sample.min(t_end) {
            record(&state, &mut samples, &mut warnings)?;
            next_sample += opts.sample_interval;
        }
        if let Some(s) = next_snapshot {
            if hit && state.t >= s {
                snapshots.push(Snapshot {
                    t: state.t,
                    u: state.u.clone(),
                });
                next_snapshot = Some(s + opts.snapshot_interval.unwrap_or(f64::INFINITY));
            }
        }
    }

    let n_fit = ((samples.len() as f64 * opts.fit_fraction).ceil() as usize).clamp(2.min(samples.len()), samples.len());
    let window = (samples[samples.len() - n_fit].t, samples[samples.len() - 1].t);
    let (fitted_speed, fit_residual) = fit_speed(&samples, window.0, window.1)?;
    Ok(FrontRun {
        trace: FrontTrace {
            samples,
            fitted_speed,
            fit_window: window,
            fit_residual,
        },
        snapshots,
        warnings,
        steps,
        final_state: state,
    })
}

/// Setup shared by the runs of an [`epsilon_sweep`].
#[derive(Debug, Clone)]
pub struct SweepSetup {
    /// Regularized diffusion law.
    pub law: DiffusionLaw,
    pub reaction: ReactionLaw,
    /// Grid used at `ε = 1`.
    pub grid: Grid1D,
    /// Initial datum at `ε = 1`; its width is scaled by `ε`.
    pub initial: InitialProfile,
    pub front: FrontOptions,
    /// Refine `dx` proportionally to `ε` so the interface stays resolved.
    pub refine_with_epsilon: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub fitted_speed: f64,
    /// Distance between the `u = 0.9` and `u = −0.9` crossings at the end.
    pub interface_width: Option<f64>,
}

/// Runs [`run_front`] for each `ε` concurrently.
pub fn epsilon_sweep(setup: &SweepSetup, epsilons: &[f64]) -> Result<Vec<SweepRow>> {
    let alpha = setup
        .law
        .alpha()
        .ok_or_else(|| Error::Config("the simulator needs a regularized diffusion law (alpha > 0)".into()))?;
    epsilons
        .par_iter()
        .map(|&eps| {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(Error::Config(format!("epsilon must be > 0, got {eps}")));
            }
            let base = setup.grid;
            let grid = if setup.refine_with_epsilon {
                let n = (((base.n - 1) as f64) / eps).round() as usize + 1;
                Grid1D::new(base.x_min, base.x_max, n, base.geometry)?
            } else {
                base
            };
            let state = SimState::from_profile(grid, &setup.initial.scaled(eps), eps, alpha)?;
            let run = run_front(&state, &setup.law, &setup.reaction, &setup.front)?;
            Ok(SweepRow {
                epsilon: eps,
                fitted_speed: run.trace.fitted_speed,
                interface_width: interface_width(&grid, &run.final_state.u, 0.9),
            })
        })
        .collect()
}
