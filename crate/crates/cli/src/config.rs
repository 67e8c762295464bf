//! Run configuration. Every section is optional and falls back to the
//! defaults below; unknown keys anywhere are rejected.

use std::path::{Path, PathBuf};

use kpp_fronts::pdesim::SweepSetup;
use kpp_fronts::{
    DiffusionLaw, FrontOptions, Geometry, Grid1D, InitialProfile, IntegratorOptions, PowerTerm, ProfileOptions,
    ReactionLaw, SimState, SolverOptions, Table,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Regularization used by the simulator when the diffusion section sets none.
pub const DEFAULT_SIM_ALPHA: f64 = 1e-3;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub diffusion: DiffusionSpec,
    pub reaction: ReactionSpec,
    pub solver: SolverOptions,
    pub profile: ProfileOptions,
    pub sim: SimSpec,
    pub sweep: SweepSpec,
    pub regularization: RegularizationSpec,
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionKindSpec {
    PLaplacian,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub weight: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiffusionSpec {
    pub kind: DiffusionKindSpec,
    /// Exponent for `p_laplacian`, 2 when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Terms for `sum`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermSpec>,
    /// Linearize the flux below this gradient.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl Default for DiffusionSpec {
    fn default() -> Self {
        Self {
            kind: DiffusionKindSpec::PLaplacian,
            p: None,
            terms: Vec::new(),
            alpha: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReactionKindSpec {
    DoubleWell,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReactionSpec {
    pub kind: ReactionKindSpec,
    /// Middle zero for `double_well`, −0.25 when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Inline table: knots on `[−1, 1]` and values.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub s: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub f: Vec<f64>,
    /// CSV table with columns `s,f`, relative to the config file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl Default for ReactionSpec {
    fn default() -> Self {
        Self {
            kind: ReactionKindSpec::DoubleWell,
            mu: None,
            s: Vec::new(),
            f: Vec::new(),
            file: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometrySpec {
    Line,
    Radial,
}

/// Grid and initial datum. Unset fields take geometry-dependent defaults:
/// `[−30, 90]` with 6001 nodes and a tanh step on the line, `[0, 100]` with
/// 2001 nodes and a plateau of radius 20 in radial symmetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSpec {
    pub geometry: GeometrySpec,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialProfile>,
    pub front: FrontOptions,
}

impl Default for SimSpec {
    fn default() -> Self {
        Self {
            geometry: GeometrySpec::Line,
            dim: 2,
            x_min: None,
            x_max: None,
            n: None,
            epsilon: 1.0,
            initial: None,
            front: FrontOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub epsilons: Vec<f64>,
    pub refine_with_epsilon: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            epsilons: vec![1.0, 0.5, 0.25],
            refine_with_epsilon: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegularizationSpec {
    pub alphas: Vec<f64>,
    /// Successive gaps shrink to ~1e-9, far below what the default shooting
    /// tolerances resolve for degenerate laws, so the ladder has its own.
    pub solver: SolverOptions,
}

impl Default for RegularizationSpec {
    fn default() -> Self {
        Self {
            alphas: vec![1e-1, 1e-2, 1e-3, 1e-4],
            solver: SolverOptions {
                c_tol: 1e-12,
                z_tol: 1e-14,
                integrator: IntegratorOptions {
                    rtol: 1e-13,
                    atol: 1e-15,
                    ..Default::default()
                },
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// Leave wall-clock timings out of the reports so reruns are
    /// byte-identical.
    pub deterministic: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            deterministic: true,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
            other => other,
        })?;
        // table files are resolved next to the config
        if let (Some(file), Some(dir)) = (&cfg.reaction.file, path.parent()) {
            if file.is_relative() {
                cfg.reaction.file = Some(dir.join(file));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Diffusion law as configured, regularized only if `alpha` is set.
    pub fn diffusion_law(&self) -> Result<DiffusionLaw, CliError> {
        let d = &self.diffusion;
        let base = match d.kind {
            DiffusionKindSpec::PLaplacian => {
                if !d.terms.is_empty() {
                    return Err(usage("diffusion.terms only applies to kind = \"sum\""));
                }
                DiffusionLaw::p_laplacian(d.p.unwrap_or(2.0))
            }
            DiffusionKindSpec::Sum => {
                if d.p.is_some() {
                    return Err(usage("diffusion.p does not apply to kind = \"sum\"; use terms"));
                }
                let terms = d
                    .terms
                    .iter()
                    .map(|t| PowerTerm {
                        weight: t.weight,
                        p: t.p,
                    })
                    .collect();
                DiffusionLaw::sum(terms)
            }
        }
        .map_err(|e| usage(&format!("diffusion: {e}")))?;
        match d.alpha {
            Some(a) => base.regularize(a).map_err(|e| usage(&format!("diffusion.alpha: {e}"))),
            None => Ok(base),
        }
    }

    /// Law used by the simulator: regularized with `diffusion.alpha`, or
    /// with [`DEFAULT_SIM_ALPHA`] when that is unset.
    pub fn sim_law(&self) -> Result<DiffusionLaw, CliError> {
        let law = self.diffusion_law()?;
        if law.is_regularized() {
            Ok(law)
        } else {
            law.regularize(DEFAULT_SIM_ALPHA).map_err(|e| usage(&e.to_string()))
        }
    }

    pub fn reaction_law(&self) -> Result<ReactionLaw, CliError> {
        let r = &self.reaction;
        match r.kind {
            ReactionKindSpec::DoubleWell => {
                if !r.s.is_empty() || !r.f.is_empty() || r.file.is_some() {
                    return Err(usage(
                        "reaction.s, reaction.f and reaction.file only apply to kind = \"tabulated\"",
                    ));
                }
                ReactionLaw::double_well(r.mu.unwrap_or(-0.25)).map_err(|e| usage(&format!("reaction: {e}")))
            }
            ReactionKindSpec::Tabulated => {
                if r.mu.is_some() {
                    return Err(usage("reaction.mu is read off the table; remove it"));
                }
                let (s, f) = match &r.file {
                    Some(path) if r.s.is_empty() && r.f.is_empty() => read_table(path)?,
                    Some(_) => return Err(usage("give either reaction.file or inline reaction.s/f, not both")),
                    None => (r.s.clone(), r.f.clone()),
                };
                let table = Table::new(s, f).map_err(|e| usage(&format!("reaction table: {e}")))?;
                ReactionLaw::tabulated(table).map_err(|e| usage(&format!("reaction table: {e}")))
            }
        }
    }

    pub fn grid(&self) -> Result<Grid1D, CliError> {
        let s = &self.sim;
        let grid = match s.geometry {
            GeometrySpec::Line => Grid1D::line(s.x_min.unwrap_or(-30.0), s.x_max.unwrap_or(90.0), s.n.unwrap_or(6001)),
            GeometrySpec::Radial => {
                if s.x_min.is_some_and(|x| x != 0.0) {
                    return Err(usage("sim.x_min must be 0 for radial geometry"));
                }
                Grid1D::radial(s.x_max.unwrap_or(100.0), s.n.unwrap_or(2001), s.dim)
            }
        };
        grid.map_err(|e| usage(&format!("sim: {e}")))
    }

    pub fn initial_profile(&self) -> InitialProfile {
        self.sim.initial.unwrap_or(match self.sim.geometry {
            GeometrySpec::Line => InitialProfile::Tanh {
                center: 0.0,
                width: 1.0,
            },
            GeometrySpec::Radial => InitialProfile::Plateau {
                radius: 20.0,
                width: 1.0,
            },
        })
    }

    pub fn initial_state(&self, law: &DiffusionLaw) -> Result<SimState, CliError> {
        let alpha = law.alpha().expect("simulator law is regularized");
        SimState::from_profile(self.grid()?, &self.initial_profile(), self.sim.epsilon, alpha)
            .map_err(|e| usage(&format!("sim: {e}")))
    }

    /// Options checked up front so bad values fail before any stepping.
    pub fn front_options(&self) -> Result<FrontOptions, CliError> {
        let f = self.sim.front;
        if !(f.t_end.is_finite() && f.t_end > 0.0) {
            return Err(usage(&format!("sim.front.t_end must be > 0, got {}", f.t_end)));
        }
        if f.sample_interval.is_nan() || f.sample_interval <= 0.0 {
            return Err(usage("sim.front.sample_interval must be > 0"));
        }
        if !(f.fit_fraction > 0.0 && f.fit_fraction <= 1.0) {
            return Err(usage("sim.front.fit_fraction must lie in (0, 1]"));
        }
        Ok(f)
    }

    /// `sim.epsilon` is ignored here: each run takes its value from
    /// `sweep.epsilons`.
    pub fn sweep_setup(&self) -> Result<SweepSetup, CliError> {
        if let Some(e) = self.sweep.epsilons.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(usage(&format!("sweep.epsilons must be > 0, got {e}")));
        }
        Ok(SweepSetup {
            law: self.sim_law()?,
            reaction: self.reaction_law()?,
            grid: self.grid()?,
            initial: self.initial_profile(),
            front: self.front_options()?,
            refine_with_epsilon: self.sweep.refine_with_epsilon,
        })
    }

    pub fn geometry(&self) -> Geometry {
        match self.sim.geometry {
            GeometrySpec::Line => Geometry::Line,
            GeometrySpec::Radial => Geometry::Radial { dim: self.sim.dim },
        }
    }
}

fn usage(msg: &str) -> CliError {
    CliError::Usage(msg.to_string())
}

#[derive(Debug, Deserialize)]
struct TableRow {
    s: f64,
    f: f64,
}

fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| usage(&format!("cannot read reaction table {}: {e}", path.display())))?;
    let mut s = Vec::new();
    let mut f = Vec::new();
    for row in reader.deserialize::<TableRow>() {
        let row = row.map_err(|e| usage(&format!("reaction table {}: {e}", path.display())))?;
        s.push(row.s);
        f.push(row.f);
    }
    Ok((s, f))
}
