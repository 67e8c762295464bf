//! Gradient-dependent diffusion laws and their convex-conjugate machinery.
//!
//! A law is described on the half line by its flux `g = Φ'` (strictly
//! increasing, `g(0) = 0`), extended oddly to negative slopes. From `g` we
//! derive
//!
//! * `Φ(s) = ∫₀ˢ g`: the potential,
//! * `ψ = g⁻¹`: the inverse flux,
//! * `Ψ(t) = sup_s (s t − Φ(s))`: the convex conjugate, with `Ψ' = ψ`,
//! * `H = ψ ∘ Ψ⁻¹`: the nonlinearity of the phase-plane equation.
//!
//! All of these are monotone bijections of `[0, ∞)`. The implementation
//! routes them through the contact map `K(s) = s g(s) − Φ(s) = Ψ(g(s))`:
//! `H = K⁻¹`, `Ψ = K ∘ ψ` and `Ψ⁻¹ = g ∘ K⁻¹`, so every inversion is a
//! single monotone root search (or a closed form for pure powers).

use crate::error::{check_finite, Error, Result};
use crate::numerics::roots::invert_increasing;

/// One `w |z|^p / p` term of a sum of p-Laplacians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub weight: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiffusionKind {
    /// `Φ(z) = |z|^p / p`.
    PLaplacian { p: f64 },
    /// `Φ(z) = Σ wᵢ |z|^pᵢ / pᵢ`.
    SumPLaplacian { terms: Vec<PowerTerm> },
    /// The base law made linear (Laplacian-like) on slopes `|z| ≤ alpha`.
    Regularized { base: Box<DiffusionLaw>, alpha: f64 },
}

/// An admissible diffusion nonlinearity together with the bounds
/// `lambda1 ≤ z g'(z) / g(z) ≤ lambda2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionLaw {
    kind: DiffusionKind,
    lambda1: f64,
    lambda2: f64,
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("exponent p must be finite and > 1, got {p}")))
    }
}

/// `z^e` with exact fast paths for the exponents that dominate in practice.
#[inline]
pub(crate) fn pow(z: f64, e: f64) -> f64 {
    if e == 1.0 {
        z
    } else if e == 2.0 {
        z * z
    } else if e == 0.5 {
        z.sqrt()
    } else if e == 3.0 {
        z * z * z
    } else {
        z.powf(e)
    }
}

impl DiffusionLaw {
    pub fn p_laplacian(p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(Self {
            kind: DiffusionKind::PLaplacian { p },
            lambda1: p - 1.0,
            lambda2: p - 1.0,
        })
    }

    pub fn sum(terms: Vec<PowerTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Domain("a sum of p-Laplacians needs at least one term".into()));
        }
        for t in &terms {
            check_exponent(t.p)?;
            if !(t.weight.is_finite() && t.weight > 0.0) {
                return Err(Error::Domain(format!(
                    "weights must be finite and > 0, got {}",
                    t.weight
                )));
            }
        }
        let lambda1 = terms.iter().map(|t| t.p - 1.0).fold(f64::INFINITY, f64::min);
        let lambda2 = terms.iter().map(|t| t.p - 1.0).fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            kind: DiffusionKind::SumPLaplacian { terms },
            lambda1,
            lambda2,
        })
    }

    /// Quadratic regularization near zero slope; see [`regularize`].
    pub fn regularize(&self, alpha: f64) -> Result<Self> {
        regularize(self, alpha)
    }

    pub fn kind(&self) -> &DiffusionKind {
        &self.kind
    }

    /// Ellipticity bounds `(Λ₁, Λ₂)`.
    pub fn ellipticity(&self) -> (f64, f64) {
        (self.lambda1, self.lambda2)
    }

    pub fn is_regularized(&self) -> bool {
        matches!(self.kind, DiffusionKind::Regularized { .. })
    }

    /// Regularization parameter in force, if any.
    pub fn alpha(&self) -> Option<f64> {
        match &self.kind {
            DiffusionKind::Regularized { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    /// The flux `g(z) = Φ'(z)`, extended oddly to `z < 0`.
    pub fn flux(&self, z: f64) -> Result<f64> {
        check_finite("slope", z)?;
        Ok(self.flux_signed(z))
    }

    #[inline]
    pub(crate) fn flux_signed(&self, z: f64) -> f64 {
        if z < 0.0 {
            -self.g(-z)
        } else {
            self.g(z)
        }
    }

    /// `g` on `[0, ∞)`.
    #[inline]
    pub(crate) fn g(&self, z: f64) -> f64 {
        match &self.kind {
            DiffusionKind::PLaplacian { p } => pow(z, p - 1.0),
            DiffusionKind::SumPLaplacian { terms } => terms.iter().map(|t| t.weight * pow(z, t.p - 1.0)).sum(),
            DiffusionKind::Regularized { base, alpha } => {
                if z <= *alpha {
                    base.g(*alpha) / alpha * z
                } else {
                    base.g(z)
                }
            }
        }
    }

    /// `g'(z)` for `z > 0` (the right derivative at the regularization kink).
    pub fn flux_derivative(&self, z: f64) -> Result<f64> {
        check_finite("slope", z)?;
        Ok(self.dg(z.abs()))
    }

    pub(crate) fn dg(&self, z: f64) -> f64 {
        match &self.kind {
            DiffusionKind::PLaplacian { p } => (p - 1.0) * pow(z, p - 2.0),
            DiffusionKind::SumPLaplacian { terms } => {
                terms.iter().map(|t| t.weight * (t.p - 1.0) * pow(z, t.p - 2.0)).sum()
            }
            DiffusionKind::Regularized { base, alpha } => {
                if z < *alpha {
                    base.g(*alpha) / alpha
                } else {
                    base.dg(z)
                }
            }
        }
    }

    /// Largest `g'` over `[0, z_max]`, used for explicit stability bounds.
    pub fn max_flux_slope(&self, z_max: f64) -> f64 {
        let z_max = z_max.abs();
        match &self.kind {
            DiffusionKind::PLaplacian { p } => {
                if *p >= 2.0 {
                    self.dg(z_max)
                } else {
                    f64::INFINITY
                }
            }
            DiffusionKind::Regularized { base, alpha } => {
                let linear = base.g(*alpha) / alpha;
                if z_max <= *alpha {
                    return linear;
                }
                let tail = match &base.kind {
                    // monotone g' on [alpha, z_max]
                    DiffusionKind::PLaplacian { .. } => base.dg(*alpha).max(base.dg(z_max)),
                    _ => sampled_max(|z| base.dg(z), *alpha, z_max),
                };
                linear.max(tail)
            }
            DiffusionKind::SumPLaplacian { terms } => {
                if terms.iter().any(|t| t.p < 2.0) {
                    f64::INFINITY
                } else {
                    self.dg(z_max)
                }
            }
        }
    }

    /// The potential `Φ(s) = ∫₀ˢ g`, even in `s`.
    pub fn potential(&self, s: f64) -> Result<f64> {
        check_finite("argument", s)?;
        Ok(self.phi(s.abs()))
    }

    pub(crate) fn phi(&self, s: f64) -> f64 {
        match &self.kind {
            DiffusionKind::PLaplacian { p } => pow(s, *p) / p,
            DiffusionKind::SumPLaplacian { terms } => terms.iter().map(|t| t.weight * pow(s, t.p) / t.p).sum(),
            DiffusionKind::Regularized { base, alpha } => {
                let k = base.g(*alpha) / alpha;
                if s <= *alpha {
                    0.5 * k * s * s
                } else {
                    0.5 * k * alpha * alpha + base.phi(s) - base.phi(*alpha)
                }
            }
        }
    }

    /// Contact map `K(s) = s g(s) − Φ(s) = Ψ(g(s))`, strictly increasing on
    /// `[0, ∞)`.
    pub(crate) fn contact(&self, s: f64) -> f64 {
        match &self.kind {
            DiffusionKind::PLaplacian { p } => pow(s, *p) * (1.0 - 1.0 / p),
            DiffusionKind::SumPLaplacian { terms } => {
                terms.iter().map(|t| t.weight * pow(s, t.p) * (1.0 - 1.0 / t.p)).sum()
            }
            DiffusionKind::Regularized { base, alpha } => {
                let k = base.g(*alpha) / alpha;
                if s <= *alpha {
                    0.5 * k * s * s
                } else {
                    base.contact(s) - regularization_shift(base, *alpha)
                }
            }
        }
    }

    /// Inverse of the contact map; this is `H`.
    fn contact_inverse(&self, y: f64) -> Result<f64> {
        if y <= 0.0 {
            return Ok(0.0);
        }
        match &self.kind {
            DiffusionKind::PLaplacian { p } => {
                let q = p / (p - 1.0);
                Ok(pow(q * y, 1.0 / p))
            }
            DiffusionKind::SumPLaplacian { .. } => invert_increasing(|s| self.contact(s), y),
            DiffusionKind::Regularized { base, alpha } => {
                let k = base.g(*alpha) / alpha;
                if y <= 0.5 * k * alpha * alpha {
                    Ok((2.0 * y / k).sqrt())
                } else {
                    base.contact_inverse(y + regularization_shift(base, *alpha))
                }
            }
        }
    }

    /// The inverse flux `ψ = g⁻¹`, extended oddly.
    pub fn inverse_flux(&self, t: f64) -> Result<f64> {
        check_finite("flux value", t)?;
        let v = self.psi(t.abs())?;
        Ok(if t < 0.0 { -v } else { v })
    }

    pub(crate) fn psi(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        match &self.kind {
            DiffusionKind::PLaplacian { p } => Ok(pow(t, 1.0 / (p - 1.0))),
            DiffusionKind::SumPLaplacian { .. } => invert_increasing(|z| self.g(z), t),
            DiffusionKind::Regularized { base, alpha } => {
                let g_alpha = base.g(*alpha);
                if t <= g_alpha {
                    Ok(t * alpha / g_alpha)
                } else {
                    base.psi(t)
                }
            }
        }
    }

    /// The convex conjugate `Ψ(t)`, even in `t`.
    pub fn conjugate(&self, t: f64) -> Result<f64> {
        check_finite("argument", t)?;
        let t = t.abs();
        match &self.kind {
            DiffusionKind::PLaplacian { p } => {
                let q = p / (p - 1.0);
                Ok(pow(t, q) / q)
            }
            _ => Ok(self.contact(self.psi(t)?)),
        }
    }

    /// `Ψ⁻¹` restricted to `[0, ∞)`; negative arguments are clamped to 0.
    pub fn conjugate_inverse(&self, y: f64) -> Result<f64> {
        check_finite("argument", y)?;
        match &self.kind {
            DiffusionKind::PLaplacian { p } => {
                let q = p / (p - 1.0);
                Ok(pow(q * y.max(0.0), 1.0 / q))
            }
            _ => Ok(self.g(self.contact_inverse(y)?)),
        }
    }

    /// `H(y) = ψ(Ψ⁻¹(y⁺))`.
    pub fn h(&self, y: f64) -> Result<f64> {
        check_finite("argument", y)?;
        self.contact_inverse(y)
    }
}

/// Flux evaluation specialised once per law for hot loops.
#[derive(Debug, Clone, Copy)]
pub(crate) enum FluxKernel<'a> {
    /// `g(z) = k z`.
    Linear(f64),
    /// `k z` on `[0, alpha]`, `z^e` beyond (`alpha = 0` for a plain power).
    Power {
        alpha: f64,
        k: f64,
        e: f64,
    },
    Generic(&'a DiffusionLaw),
}

impl FluxKernel<'_> {
    #[inline(always)]
    pub(crate) fn eval_signed(&self, z: f64) -> f64 {
        match *self {
            Self::Linear(k) => k * z,
            Self::Power { alpha, k, e } => {
                let a = z.abs();
                let v = if a <= alpha { k * a } else { pow(a, e) };
                v.copysign(z)
            }
            Self::Generic(law) => law.flux_signed(z),
        }
    }
}

impl DiffusionLaw {
    pub(crate) fn kernel(&self) -> FluxKernel<'_> {
        match &self.kind {
            DiffusionKind::PLaplacian { p } if *p == 2.0 => FluxKernel::Linear(1.0),
            DiffusionKind::PLaplacian { p } => FluxKernel::Power {
                alpha: 0.0,
                k: 0.0,
                e: p - 1.0,
            },
            DiffusionKind::Regularized { base, alpha } => match base.kind {
                DiffusionKind::PLaplacian { p: 2.0 } => FluxKernel::Linear(1.0),
                DiffusionKind::PLaplacian { p } => FluxKernel::Power {
                    alpha: *alpha,
                    k: base.g(*alpha) / alpha,
                    e: p - 1.0,
                },
                _ => FluxKernel::Generic(self),
            },
            _ => FluxKernel::Generic(self),
        }
    }
}

/// `K_base(α) − K_α(α)`: offset between the base and regularized contact
/// maps beyond the kink.
fn regularization_shift(base: &DiffusionLaw, alpha: f64) -> f64 {
    0.5 * alpha * base.g(alpha) - base.phi(alpha)
}

fn sampled_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    const N: usize = 256;
    let ratio = (b / a).powf(1.0 / N as f64);
    let mut z = a;
    let mut best = f(a).max(f(b));
    for _ in 0..N {
        z *= ratio;
        best = best.max(f(z));
    }
    // sampled, so leave headroom
    1.1 * best
}

/// Replaces `g` on `[0, alpha]` by the line through the origin and
/// `(alpha, g(alpha))`, leaving it unchanged beyond. The result is continuous,
/// strictly increasing, has `z g'/g = 1` on `(0, alpha)` and converges to
/// `g` uniformly on compacts as `alpha → 0`.
pub fn regularize(law: &DiffusionLaw, alpha: f64) -> Result<DiffusionLaw> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be finite and > 0, got {alpha}")));
    }
    Ok(DiffusionLaw {
        kind: DiffusionKind::Regularized {
            base: Box::new(law.clone()),
            alpha,
        },
        lambda1: law.lambda1.min(1.0),
        lambda2: law.lambda2.max(1.0),
    })
}
