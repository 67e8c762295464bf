//! Spatial wave profile `q(x)` from the phase-plane solution.
//!
//! Along the wave `q_x = −H(z(−q))`, so `x(q) = −∫_μ^q ds / H(z(−s))`. The
//! integrand blows up at `q = ±1` (infinite tails), hence the profile is
//! built on the truncated range `[−1 + η, 1 − η]`.

use serde::{Deserialize, Serialize};

use crate::diffusion::DiffusionLaw;
use crate::error::{Error, Result};
use crate::numerics::interp::Hermite;
use crate::numerics::quadrature;
use crate::reaction::ReactionLaw;
use crate::shooting::{speed_identity_residual, CriticalSpeedResult, ShootTrajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileOptions {
    /// Truncation: `q` ranges over `[−1 + eta, 1 − eta]`.
    pub eta: f64,
    pub n_samples: usize,
    /// Absolute tolerance per quadrature panel for `x(q)`.
    pub quad_tol: f64,
    /// Level placed at `x = 0`; `None` means `μ`.
    pub normalize_at: Option<f64>,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            eta: 1e-4,
            n_samples: 4001,
            quad_tol: 1e-10,
            normalize_at: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveSample {
    pub x: f64,
    pub q: f64,
    pub qx: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Residuals {
    /// Relative defect of `c ∫|q_x|² dx = F(1)`; `None` for standing waves.
    pub speed_identity: Option<f64>,
    /// Sup-norm of the wave equation residual over `max |f|`.
    pub ode: f64,
    /// `|q(0) − μ|`.
    pub normalization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveSolution {
    pub c_star: f64,
    pub mu: f64,
    /// Ordered by increasing `x`, hence decreasing `q`.
    pub samples: Vec<WaveSample>,
    /// `(q_hi, q_lo)`.
    pub truncation: (f64, f64),
    pub residuals: Residuals,
}

impl WaveSolution {
    /// Wraps externally computed samples; `q` must strictly decrease along
    /// increasing `x`.
    pub fn from_samples(c_star: f64, mu: f64, samples: Vec<WaveSample>) -> Result<Self> {
        if samples.len() < 5 {
            return Err(Error::Inconsistent(format!(
                "a wave needs at least 5 samples, got {}",
                samples.len()
            )));
        }
        if samples
            .iter()
            .any(|s| !(s.x.is_finite() && s.q.is_finite() && s.qx.is_finite()))
        {
            return Err(Error::Inconsistent("wave samples must be finite".into()));
        }
        if let Some(w) = samples.windows(2).find(|w| !(w[1].x > w[0].x && w[1].q < w[0].q)) {
            return Err(Error::Inconsistent(format!(
                "profile is not strictly decreasing near x = {} (q = {} then {})",
                w[0].x, w[0].q, w[1].q
            )));
        }
        let truncation = (samples[0].q, samples[samples.len() - 1].q);
        Ok(Self {
            c_star,
            mu,
            samples,
            truncation,
            residuals: Residuals::default(),
        })
    }

    fn interpolant(&self) -> Hermite {
        Hermite::new(
            self.samples.iter().map(|s| s.x).collect(),
            self.samples.iter().map(|s| s.q).collect(),
            self.samples.iter().map(|s| s.qx).collect(),
        )
    }

    /// `q(x)` by cubic Hermite interpolation; clamped to the end samples
    /// outside the sampled range.
    pub fn q_at(&self, x: f64) -> f64 {
        let first = &self.samples[0];
        let last = &self.samples[self.samples.len() - 1];
        if x <= first.x {
            first.q
        } else if x >= last.x {
            last.q
        } else {
            self.interpolant().eval(x)
        }
    }

    pub fn x_span(&self) -> (f64, f64) {
        (self.samples[0].x, self.samples[self.samples.len() - 1].x)
    }
}

/// Builds the profile from the shot at the critical speed.
pub fn reconstruct(
    result: &CriticalSpeedResult,
    law: &DiffusionLaw,
    reaction: &ReactionLaw,
    opts: &ProfileOptions,
) -> Result<WaveSolution> {
    let eta = opts.eta;
    if !(eta > 0.0 && eta < 0.5) {
        return Err(Error::Domain(format!("eta must lie in (0, 0.5), got {eta}")));
    }
    if opts.n_samples < 5 {
        return Err(Error::Domain(format!(
            "need at least 5 samples, got {}",
            opts.n_samples
        )));
    }
    let (q_hi, q_lo) = (1.0 - eta, -1.0 + eta);
    let anchor = opts.normalize_at.unwrap_or(reaction.mu());
    if !(anchor > q_lo && anchor < q_hi) {
        return Err(Error::Domain(format!(
            "normalization level {anchor} lies outside the truncated range"
        )));
    }
    let speed = PhaseSpeed::new(&result.trajectory, law, q_lo, q_hi)?;

    // q from q_hi down to q_lo, i.e. x increasing
    let n = opts.n_samples;
    let qs: Vec<f64> = (0..n)
        .map(|i| q_hi - (q_hi - q_lo) * i as f64 / (n - 1) as f64)
        .collect();
    let qx: Vec<f64> = qs.iter().map(|&q| speed.qx(q)).collect::<Result<_>>()?;

    // dx/dq = −1 / |q_x|; integrate from the anchor outwards
    let dx = |a: f64, b: f64| -> Result<f64> {
        let mut failure = None;
        let v = quadrature::integrate(
            |s| match speed.qx(s) {
                Ok(v) => -1.0 / v.abs(),
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            a,
            b,
            opts.quad_tol,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        v.map_err(|e| match e {
            Error::Quadrature { reason, .. } => Error::Quadrature {
                a,
                b,
                reason: format!("x(q) diverged between q = {a} and q = {b}: {reason}"),
            },
            other => other,
        })
    };
    // first sample index with q < anchor
    let split = qs.partition_point(|&q| q >= anchor);
    let mut xs = vec![0.0; n];
    if split > 0 {
        xs[split - 1] = dx(anchor, qs[split - 1])?;
        for i in (0..split - 1).rev() {
            xs[i] = xs[i + 1] + dx(qs[i + 1], qs[i])?;
        }
    }
    if split < n {
        xs[split] = dx(anchor, qs[split])?;
        for i in split + 1..n {
            xs[i] = xs[i - 1] + dx(qs[i - 1], qs[i])?;
        }
    }
    let samples = (0..n)
        .map(|i| WaveSample {
            x: xs[i],
            q: qs[i],
            qx: qx[i],
        })
        .collect();
    let mut wave = WaveSolution::from_samples(result.c_star, reaction.mu(), samples)?;
    wave.residuals = Residuals {
        speed_identity: if result.c_star > 0.0 {
            Some(speed_identity_residual(result, law, reaction)?)
        } else {
            None
        },
        ode: ode_residual(&wave, law, reaction),
        normalization: (wave.q_at(0.0) - reaction.mu()).abs(),
    };
    Ok(wave)
}

/// `q ↦ q_x = −H(z(−q))` on the truncated range.
struct PhaseSpeed<'a> {
    z: Hermite,
    law: &'a DiffusionLaw,
}

impl<'a> PhaseSpeed<'a> {
    fn new(trajectory: &ShootTrajectory, law: &'a DiffusionLaw, q_lo: f64, q_hi: f64) -> Result<Self> {
        let z = trajectory.interpolant();
        // z(r) must stay positive for r in [−q_hi, −q_lo]
        let (r_lo, r_hi) = (-q_hi, -q_lo);
        if let Some(i) = (0..trajectory.r.len()).find(|&i| {
            let r = trajectory.r[i];
            r >= r_lo && r <= r_hi && trajectory.z[i] <= 0.0
        }) {
            return Err(Error::Inconsistent(format!(
                "phase-plane solution vanishes inside the profile range at r = {} (z = {:e}); \
                 tighten the solver tolerances or increase eta",
                trajectory.r[i], trajectory.z[i]
            )));
        }
        for r in [r_lo, r_hi] {
            let v = z.eval(r);
            if v <= 0.0 {
                return Err(Error::Inconsistent(format!(
                    "phase-plane solution vanishes at the truncation point r = {r} (z = {v:e}); increase eta"
                )));
            }
        }
        Ok(Self { z, law })
    }

    fn qx(&self, q: f64) -> Result<f64> {
        let z = self.z.eval(-q);
        if z <= 0.0 {
            return Err(Error::Inconsistent(format!(
                "phase-plane solution vanishes at r = {} inside the profile range",
                -q
            )));
        }
        Ok(-self.law.h(z)?)
    }
}

/// Residual of `d_x g(q_x) + c q_x + f(q) = 0` at interior samples.
///
/// `d_x G` is evaluated as `q_x · dG/dq` with a three-point difference in
/// `q`, which stays accurate in the tails where the `x` spacing grows large.
/// The sup-norm is divided by `max |f|` on `[−1, 1]`.
pub fn ode_residual(wave: &WaveSolution, law: &DiffusionLaw, reaction: &ReactionLaw) -> f64 {
    let s = &wave.samples;
    let g: Vec<f64> = s.iter().map(|w| law.flux_signed(w.qx)).collect();
    let mut worst: f64 = 0.0;
    for i in 1..s.len() - 1 {
        let (h0, h1) = (s[i].q - s[i - 1].q, s[i + 1].q - s[i].q);
        let dg_dq = (g[i + 1] - g[i]) * h0 / (h1 * (h0 + h1)) + (g[i] - g[i - 1]) * h1 / (h0 * (h0 + h1));
        let lhs = s[i].qx * dg_dq + wave.c_star * s[i].qx + reaction.f(s[i].q.clamp(-1.0, 1.0));
        worst = worst.max(lhs.abs());
    }
    let f_scale = (0..=2000)
        .map(|i| reaction.f(-1.0 + i as f64 / 1000.0).abs())
        .fold(0.0, f64::max);
    if f_scale > 0.0 {
        worst / f_scale
    } else {
        worst
    }
}

/// Trapezoidal `∫ |q_x| dx` over the sampled range; equals `2 − 2η` up to
/// the quadrature error.
pub fn wave_mass(wave: &WaveSolution) -> f64 {
    wave.samples
        .windows(2)
        .map(|w| 0.5 * (w[1].x - w[0].x) * (w[0].qx.abs() + w[1].qx.abs()))
        .sum()
}

/// Extent of the profile for one truncation level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailSpan {
    pub eta: f64,
    pub x_min: f64,
    pub x_max: f64,
    /// `|q_x|` at the two truncation points.
    pub slope_left: f64,
    pub slope_right: f64,
}

/// Reconstructs the profile for each `eta` to expose whether the tails
/// keep growing (infinite support) or settle (compact support).
pub fn tail_report(
    result: &CriticalSpeedResult,
    law: &DiffusionLaw,
    reaction: &ReactionLaw,
    etas: &[f64],
    base: &ProfileOptions,
) -> Result<Vec<TailSpan>> {
    etas.iter()
        .map(|&eta| {
            let wave = reconstruct(result, law, reaction, &ProfileOptions { eta, ..*base })?;
            let (x_min, x_max) = wave.x_span();
            Ok(TailSpan {
                eta,
                x_min,
                x_max,
                slope_left: wave.samples[0].qx.abs(),
                slope_right: wave.samples[wave.samples.len() - 1].qx.abs(),
            })
        })
        .collect()
}
