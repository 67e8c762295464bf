//! Phase-plane shooting for the wave speed.
//!
//! In the reflected phase variable `r ∈ [−1, 1]` the wave equation reduces to
//!
//! ```text
//! z'(r) + c H(z⁺) = f(−r),   z(−1) = 0,
//! ```
//!
//! and the speed is the unique `c` for which the solution also satisfies
//! `z(1) = 0`. Since `c ↦ z_c(1)` is non-increasing, `c* = sup{c : z_c(1) > 0}`
//! is found by bisection.

use serde::{Deserialize, Serialize};

use crate::diffusion::DiffusionLaw;
use crate::error::{Error, Result};
use crate::numerics::interp::Hermite;
use crate::numerics::ode::{self, Flow, Node, StepControl};
use crate::numerics::quadrature;
use crate::reaction::{validate_kpp, ReactionLaw};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub first_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub max_nodes: usize,
    /// Stop once `z ≤ 0` past `r = −μ` and finish with the exact linear
    /// continuation.
    pub early_exit: bool,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            first_step: 1e-8,
            min_step: 1e-15,
            max_step: 0.05,
            max_nodes: 2_000_000,
            early_exit: true,
        }
    }
}

impl IntegratorOptions {
    fn control(&self) -> StepControl {
        StepControl {
            rtol: self.rtol,
            atol: self.atol,
            first_step: self.first_step,
            min_step: self.min_step,
            max_step: self.max_step,
            max_nodes: self.max_nodes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Final bracket width.
    pub c_tol: f64,
    /// Terminal values with `|z(1)| ≤ z_tol` count as critical.
    pub z_tol: f64,
    /// Upper limit for the bracket expansion.
    pub c_max: f64,
    pub integrator: IntegratorOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            c_tol: 1e-8,
            z_tol: 1e-9,
            c_max: 1e6,
            integrator: IntegratorOptions::default(),
        }
    }
}

/// Solution `z_c` on `[−1, 1]` for one candidate speed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootTrajectory {
    pub c: f64,
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    /// `z'` at each node, from the equation.
    pub dz: Vec<f64>,
    /// `z_c(1)`.
    pub terminal: f64,
    /// First node `r ≥ −μ` with `z ≤ 0`, when the early exit fired.
    pub early_negative_at: Option<f64>,
}

impl ShootTrajectory {
    /// Cubic Hermite interpolant of `z` using the exact node slopes.
    pub fn interpolant(&self) -> Hermite {
        Hermite::new(self.r.clone(), self.z.clone(), self.dz.clone())
    }

    /// Value at one of the nodes, if `r` is exactly a node.
    pub fn value_at_node(&self, r: f64) -> Option<f64> {
        self.r.binary_search_by(|v| v.total_cmp(&r)).ok().map(|i| self.z[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalSpeedResult {
    pub c_star: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// Shot at `c_star`.
    pub trajectory: ShootTrajectory,
    /// `F(1) = 0`, so the wave is a standing one.
    pub stationary: bool,
}

/// Integrates the phase-plane equation for speed `c`.
pub fn shoot(c: f64, law: &DiffusionLaw, reaction: &ReactionLaw, opts: &IntegratorOptions) -> Result<ShootTrajectory> {
    shoot_sampled(c, law, reaction, opts, &[])
}

/// As [`shoot`], additionally placing nodes at every `r` in `stops`.
pub fn shoot_sampled(
    c: f64,
    law: &DiffusionLaw,
    reaction: &ReactionLaw,
    opts: &IntegratorOptions,
    stops: &[f64],
) -> Result<ShootTrajectory> {
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::Domain(format!(
            "wave speed candidate must be finite and >= 0, got {c}"
        )));
    }
    let mut stops: Vec<f64> = stops.iter().copied().filter(|s| *s > -1.0 && *s < 1.0).collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    // H cannot fail for finite z; a NaN here would surface as an integration error
    let rhs = |r: f64, z: f64| {
        let drag = if z > 0.0 && c > 0.0 {
            law.h(z).map_or(f64::NAN, |h| c * h)
        } else {
            0.0
        };
        reaction.f(-r) - drag
    };
    let exit_from = -reaction.mu();
    let mut early_at = None;
    let nodes = ode::integrate(rhs, -1.0, 0.0, 1.0, &stops, &opts.control(), |n: &Node| {
        if opts.early_exit && n.t >= exit_from && n.y <= 0.0 && n.t < 1.0 {
            early_at = Some(n.t);
            Flow::Stop
        } else {
            Flow::Continue
        }
    })?;

    let mut r: Vec<f64> = nodes.iter().map(|n| n.t).collect();
    let mut z: Vec<f64> = nodes.iter().map(|n| n.y).collect();
    let mut dz: Vec<f64> = nodes.iter().map(|n| n.dy).collect();
    if let Some(re) = early_at {
        // z stays negative, so H(z⁺) = 0 and z(s) = z(re) + F(−re) − F(−s)
        let base = z[z.len() - 1] + reaction.primitive(-re)?;
        for s in stops.iter().copied().filter(|&s| s > re).chain(std::iter::once(1.0)) {
            r.push(s);
            z.push(base - reaction.primitive(-s)?);
            dz.push(reaction.f(-s));
        }
    }
    let terminal = *z.last().expect("trajectory has nodes");
    Ok(ShootTrajectory {
        c,
        r,
        z,
        dz,
        terminal,
        early_negative_at: early_at,
    })
}

/// Bracket expansion from `[0, 1]` by doubling, then bisection on the sign of
/// `z_c(1)`.
pub fn find_critical_speed(
    law: &DiffusionLaw,
    reaction: &ReactionLaw,
    opts: &SolverOptions,
) -> Result<CriticalSpeedResult> {
    let report = validate_kpp(reaction, false);
    if !report.passed {
        return Err(Error::InvalidReaction(report.failure_reasons()));
    }
    let integ = &opts.integrator;
    if report.stationary {
        let trajectory = shoot(0.0, law, reaction, integ)?;
        return Ok(CriticalSpeedResult {
            c_star: 0.0,
            bracket: (0.0, 0.0),
            iterations: 0,
            trajectory,
            stationary: true,
        });
    }
    if !(opts.c_tol > 0.0 && opts.z_tol >= 0.0 && opts.c_max > 0.0) {
        return Err(Error::Config(format!(
            "need c_tol > 0, z_tol >= 0 and c_max > 0 (got {}, {}, {})",
            opts.c_tol, opts.z_tol, opts.c_max
        )));
    }

    let mut iterations = 0;
    let mut lo = 0.0;
    let mut hi = 1.0_f64.min(opts.c_max);
    loop {
        iterations += 1;
        let t = shoot(hi, law, reaction, integ)?.terminal;
        if t < -opts.z_tol {
            break;
        }
        if t > opts.z_tol {
            lo = hi;
        }
        if hi >= opts.c_max {
            return Err(Error::NoUpperBracket {
                c_max: opts.c_max,
                last_terminal: t,
            });
        }
        hi = (2.0 * hi).min(opts.c_max);
    }

    const MAX_BISECTIONS: usize = 400;
    let mut bisections = 0;
    while hi - lo > opts.c_tol && bisections < MAX_BISECTIONS {
        bisections += 1;
        let mid = 0.5 * (lo + hi);
        let t = shoot(mid, law, reaction, integ)?.terminal;
        if t > opts.z_tol {
            lo = mid;
        } else if t < -opts.z_tol {
            hi = mid;
        } else {
            // inside the critical band: keep mid, halve the bracket around it
            let quarter = 0.25 * (hi - lo);
            lo = lo.max(mid - quarter);
            hi = hi.min(mid + quarter);
        }
    }
    let c_star = 0.5 * (lo + hi);
    let trajectory = shoot(c_star, law, reaction, integ)?;
    Ok(CriticalSpeedResult {
        c_star,
        bracket: (lo, hi),
        iterations: iterations + bisections,
        trajectory,
        stationary: false,
    })
}

/// `∫_{−1}^{1} H(z(r)) dr`. Since `H(z(−q)) = ψ(v(q)) = |q_x|`, this is
/// `∫ |q_x| dq = ∫ |q_x|² dx` over the wave.
pub fn flux_integral(trajectory: &ShootTrajectory, law: &DiffusionLaw) -> Result<f64> {
    let interp = trajectory.interpolant();
    let knots = interp.knots();
    let mut total = 0.0;
    let mut failure = None;
    for i in 0..knots.len() - 1 {
        let (a, b) = (knots[i], knots[i + 1]);
        let part = quadrature::integrate(
            |r| match law.h(interp.eval_in(i, r)) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            a,
            b,
            1e-14 * (b - a).max(1e-3),
        );
        if let Some(e) = failure.take() {
            return Err(e);
        }
        total += part?;
    }
    Ok(total)
}

/// Relative defect `|c* ∫ H(z) dr − F(1)| / F(1)` of the speed identity
/// obtained by integrating the phase-plane equation over `[−1, 1]`.
pub fn speed_identity_residual(
    result: &CriticalSpeedResult,
    law: &DiffusionLaw,
    reaction: &ReactionLaw,
) -> Result<f64> {
    if result.c_star <= 0.0 {
        return Err(Error::Domain(
            "the speed identity degenerates to 0 = 0 for a standing wave".into(),
        ));
    }
    let integral = flux_integral(&result.trajectory, law)?;
    let f_total = reaction.f_total();
    Ok((result.c_star * integral - f_total).abs() / f_total)
}
