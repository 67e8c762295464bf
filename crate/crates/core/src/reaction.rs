//! Bistable reaction terms `f` on `[−1, 1]` with zeros at `−1`, `μ` and `1`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::interp::Hermite;
use crate::numerics::quadrature;
use crate::numerics::roots::brent;

/// Absolute tolerance for the primitive of non-polynomial laws.
pub const PRIMITIVE_TOL: f64 = 1e-10;
/// Number of uniform sample points used by [`validate_kpp`].
pub const DEFAULT_VALIDATION_GRID: usize = 2001;
const ZERO_TOL: f64 = 1e-12;

pub type ReactionFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Reaction values sampled on `[−1, 1]`, interpolated by monotone cubics so
/// that no spurious zeros appear between samples of equal sign.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    interp: Hermite,
    // primitive at each knot
    cumulative: Vec<f64>,
}

impl Table {
    pub fn new(s: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if s.len() != f.len() {
            return Err(Error::Domain(format!(
                "table columns differ in length ({} vs {})",
                s.len(),
                f.len()
            )));
        }
        if s.len() < 3 {
            return Err(Error::Domain("a reaction table needs at least 3 rows".into()));
        }
        if s.iter().chain(&f).any(|v| !v.is_finite()) {
            return Err(Error::Domain("reaction table contains non-finite values".into()));
        }
        if s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("table abscissae must be strictly increasing".into()));
        }
        if s[0] != -1.0 || s[s.len() - 1] != 1.0 {
            return Err(Error::Domain(format!(
                "table must span [-1, 1] exactly, got [{}, {}]",
                s[0],
                s[s.len() - 1]
            )));
        }
        let interp = Hermite::pchip(s, f);
        let mut cumulative = Vec::with_capacity(interp.knots().len());
        let mut acc = 0.0;
        cumulative.push(acc);
        for i in 0..interp.knots().len() - 1 {
            acc += interp.interval_integral(i);
            cumulative.push(acc);
        }
        Ok(Self { interp, cumulative })
    }

    pub fn knots(&self) -> &[f64] {
        self.interp.knots()
    }

    pub fn values(&self) -> &[f64] {
        self.interp.values()
    }

    fn eval(&self, s: f64) -> f64 {
        self.interp.eval(s)
    }

    fn primitive(&self, r: f64) -> f64 {
        let i = self.interp.interval(r);
        self.cumulative[i] + self.interp.partial_integral(i, r)
    }
}

#[derive(Clone)]
pub enum ReactionKind {
    /// `f(s) = 2 (s − μ)(1 − s²)`.
    DoubleWell {
        mu: f64,
    },
    Tabulated(Table),
    Custom(ReactionFn),
}

impl fmt::Debug for ReactionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DoubleWell { mu } => f.debug_struct("DoubleWell").field("mu", mu).finish(),
            Self::Tabulated(t) => f.debug_tuple("Tabulated").field(&t.knots().len()).finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReactionLaw {
    kind: ReactionKind,
    mu: f64,
    lipschitz: f64,
    f_total: f64,
}

impl ReactionLaw {
    /// The quartic double-well family; `mu` must lie in `(−1, 0]`.
    pub fn double_well(mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > -1.0 && mu <= 0.0) {
            return Err(Error::Domain(format!("double-well mu must lie in (-1, 0], got {mu}")));
        }
        // |f'| on [-1, 1]: f' = 2 - 6s^2 + 4 mu s, extremal at the ends or at s = mu/3
        let lipschitz = (4.0 + 4.0 * mu.abs()).max(2.0 + 2.0 * mu * mu / 3.0);
        Ok(Self {
            kind: ReactionKind::DoubleWell { mu },
            mu,
            lipschitz,
            f_total: -8.0 * mu / 3.0,
        })
    }

    pub fn tabulated(table: Table) -> Result<Self> {
        let mu = locate_interior_zero(|s| table.eval(s), table.knots())?;
        let lipschitz = table.interp.max_abs_derivative();
        let f_total = table.primitive(1.0);
        Ok(Self {
            kind: ReactionKind::Tabulated(table),
            mu,
            lipschitz,
            f_total,
        })
    }

    /// Wraps an arbitrary `f`. If `lipschitz` is `None` it is estimated from
    /// difference quotients on a fine grid, with a safety margin.
    pub fn custom(f: ReactionFn, lipschitz: Option<f64>) -> Result<Self> {
        let grid = uniform(DEFAULT_VALIDATION_GRID);
        let mu = locate_interior_zero(|s| f(s), &grid)?;
        let lipschitz = match lipschitz {
            Some(l) if l.is_finite() && l > 0.0 => l,
            Some(l) => return Err(Error::Domain(format!("Lipschitz constant must be > 0, got {l}"))),
            None => {
                let fine = uniform(20 * DEFAULT_VALIDATION_GRID);
                1.05 * max_difference_quotient(|s| f(s), &fine)
            }
        };
        let f_total = quadrature::integrate(|s| f(s), -1.0, 1.0, PRIMITIVE_TOL)?;
        Ok(Self {
            kind: ReactionKind::Custom(f),
            mu,
            lipschitz,
            f_total,
        })
    }

    pub fn kind(&self) -> &ReactionKind {
        &self.kind
    }

    /// The interior zero.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// `F(1) = ∫_{−1}^{1} f`.
    pub fn f_total(&self) -> f64 {
        self.f_total
    }

    /// `f(s)` for `s ∈ [−1, 1]`.
    pub fn f_eval(&self, s: f64) -> Result<f64> {
        check_unit("s", s)?;
        Ok(self.f(s))
    }

    /// `F(r) = ∫_{−1}^{r} f` for `r ∈ [−1, 1]`.
    #[allow(non_snake_case)]
    pub fn F_eval(&self, r: f64) -> Result<f64> {
        check_unit("r", r)?;
        self.primitive(r)
    }

    #[inline]
    pub(crate) fn f(&self, s: f64) -> f64 {
        match &self.kind {
            ReactionKind::DoubleWell { mu } => 2.0 * (s - mu) * (1.0 - s) * (1.0 + s),
            ReactionKind::Tabulated(t) => t.eval(s),
            ReactionKind::Custom(f) => f(s),
        }
    }

    pub(crate) fn primitive(&self, r: f64) -> Result<f64> {
        if r <= -1.0 {
            return Ok(0.0);
        }
        if r >= 1.0 {
            return Ok(self.f_total);
        }
        match &self.kind {
            ReactionKind::DoubleWell { mu } => Ok(double_well_poly(*mu, r) - double_well_poly(*mu, -1.0)),
            ReactionKind::Tabulated(t) => Ok(t.primitive(r)),
            ReactionKind::Custom(f) => quadrature::integrate(|s| f(s), -1.0, r, PRIMITIVE_TOL),
        }
    }
}

/// Antiderivative of `2 (t − μ)(1 − t²)`.
fn double_well_poly(mu: f64, t: f64) -> f64 {
    let t2 = t * t;
    t2 - 0.5 * t2 * t2 - 2.0 * mu * t + 2.0 / 3.0 * mu * t2 * t
}

fn check_unit(name: &str, s: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {s} lies outside [-1, 1]")))
    }
}

fn uniform(n: usize) -> Vec<f64> {
    (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect()
}

fn max_difference_quotient<F: Fn(f64) -> f64>(f: F, grid: &[f64]) -> f64 {
    grid.windows(2)
        .map(|w| ((f(w[1]) - f(w[0])) / (w[1] - w[0])).abs())
        .fold(0.0, f64::max)
}

/// First sign change of `f` from negative to positive strictly inside
/// `(−1, 1)`, scanning the interior of `grid` and refining by Brent.
fn locate_interior_zero<F: Fn(f64) -> f64>(f: F, grid: &[f64]) -> Result<f64> {
    let inner = &grid[1..grid.len() - 1];
    let mut prev: Option<(f64, f64)> = None;
    for &s in inner {
        let v = f(s);
        if v == 0.0 {
            return Ok(s);
        }
        if let Some((sp, vp)) = prev {
            if vp < 0.0 && v > 0.0 {
                return brent(&f, sp, s, 1e-15, 1e-15);
            }
        }
        prev = Some((s, v));
    }
    Err(Error::InvalidReaction(
        "f has no sign change from negative to positive inside (-1, 1)".into(),
    ))
}

/// One line of a [`ValidationReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Sample point that violates the condition, if any.
    pub witness: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub passed: bool,
    /// `F(1) = 0`: only a standing wave exists.
    pub stationary: bool,
    pub f_total: f64,
    pub mu: f64,
}

impl ValidationReport {
    /// Details of the failed checks, joined.
    pub fn failure_reasons(&self) -> String {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            write!(f, "[{mark}] {:<16} {}", c.name, c.detail)?;
            if let Some(w) = c.witness {
                write!(f, " (at s = {w})")?;
            }
            writeln!(f)?;
        }
        let verdict = if self.passed { "admissible" } else { "not admissible" };
        write!(f, "reaction law is {verdict}")?;
        if self.stationary {
            write!(f, " (stationary: F(1) = 0, wave speed 0)")?;
        }
        Ok(())
    }
}

/// Checks the bistable sign pattern, the zeros, `∫_r^1 f > 0`, the sign of
/// `F(1)` and the Lipschitz bound on a uniform grid of
/// [`DEFAULT_VALIDATION_GRID`] points.
pub fn validate_kpp(law: &ReactionLaw, require_positive_mass: bool) -> ValidationReport {
    validate_kpp_with(law, require_positive_mass, DEFAULT_VALIDATION_GRID)
}

pub fn validate_kpp_with(law: &ReactionLaw, require_positive_mass: bool, grid_points: usize) -> ValidationReport {
    let grid = uniform(grid_points.max(3));
    let mu = law.mu();
    let scale = grid.iter().map(|&s| law.f(s).abs()).fold(1.0, f64::max);
    let mut checks = Vec::new();

    // zeros
    let worst = [-1.0, mu, 1.0]
        .into_iter()
        .map(|s| (s, law.f(s)))
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap();
    checks.push(Check {
        name: "zeros".into(),
        passed: worst.1.abs() <= ZERO_TOL * scale,
        witness: (worst.1.abs() > ZERO_TOL * scale).then_some(worst.0),
        detail: format!(
            "f(-1), f(mu), f(1) vanish; mu = {mu}, largest |value| {:e}",
            worst.1.abs()
        ),
    });

    // sign pattern
    let bad_sign = grid[1..grid.len() - 1].iter().copied().find(|&s| {
        let v = law.f(s);
        (s < mu && v >= 0.0) || (s > mu && v <= 0.0)
    });
    checks.push(Check {
        name: "sign pattern".into(),
        passed: bad_sign.is_none(),
        witness: bad_sign,
        detail: match bad_sign {
            None => "f < 0 on (-1, mu) and f > 0 on (mu, 1)".into(),
            Some(s) => format!("f({s}) = {:e} has the wrong sign", law.f(s)),
        },
    });

    // residual mass from r to 1
    let f_total = law.f_total();
    let mut bad_mass = None;
    let mut mass_error = None;
    for &r in &grid[1..grid.len() - 1] {
        match law.primitive(r) {
            Ok(fr) if f_total - fr > 0.0 => {}
            Ok(_) => {
                bad_mass = Some(r);
                break;
            }
            Err(e) => {
                mass_error = Some(e.to_string());
                bad_mass = Some(r);
                break;
            }
        }
    }
    checks.push(Check {
        name: "tail mass".into(),
        passed: bad_mass.is_none(),
        witness: bad_mass,
        detail: match (bad_mass, mass_error) {
            (None, _) => "F(1) - F(r) > 0 for every sampled r".into(),
            (Some(r), None) => format!(
                "F(1) - F(r) = {:e} <= 0",
                f_total - law.primitive(r).unwrap_or(f64::NAN)
            ),
            (Some(_), Some(e)) => e,
        },
    });

    // F(1)
    let stationary = f_total.abs() <= ZERO_TOL * scale;
    let mass_ok = if stationary {
        !require_positive_mass
    } else {
        f_total > 0.0
    };
    checks.push(Check {
        name: "F(1) > 0".into(),
        passed: mass_ok,
        witness: (!mass_ok).then_some(1.0),
        detail: if f_total > 0.0 && !stationary {
            format!("F(1) = {f_total:.6}")
        } else if stationary && !require_positive_mass {
            format!("F(1) = {f_total:.6}; stationary case allowed")
        } else {
            format!("F(1) = {f_total:.6} ≤ 0")
        },
    });

    // Lipschitz bound
    let observed = max_difference_quotient(|s| law.f(s), &grid);
    let lip_ok = observed <= law.lipschitz() * (1.0 + 1e-9);
    checks.push(Check {
        name: "lipschitz".into(),
        passed: lip_ok,
        witness: None,
        detail: format!(
            "L_f = {}, largest sampled difference quotient {observed}",
            law.lipschitz()
        ),
    });

    let passed = checks.iter().all(|c| c.passed);
    ValidationReport {
        checks,
        passed,
        stationary: stationary && passed,
        f_total,
        mu,
    }
}
