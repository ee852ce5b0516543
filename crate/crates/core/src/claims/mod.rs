//! Claim-size laws: exact tails, integrated tails, mean-excess functions and samplers.
//!
//! Four families are provided. Pareto-type, lognormal and Weibull (shape below one)
//! are subexponential; the exponential law is kept only as a light-tailed reference
//! and is rejected by every heavy-tail asymptotic.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::quad::{integrate_to_infinity, QuadOptions};

/// Tails below this value are treated as saturated rather than zero.
pub const TAIL_FLOOR: f64 = 1e-300;

/// Parameterisation of a claim-size law as it appears in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClaimFamily {
    /// `P(C ≥ x) = (xm/x)^(alpha+1)` for `x ≥ xm`.
    Pareto { alpha: f64, xm: f64 },
    /// `ln C ~ N(mu, sigma²)`.
    Lognormal { mu: f64, sigma: f64 },
    /// `P(C ≥ x) = exp(-(x/scale)^alpha)` with `alpha ∈ (0, 1)`.
    Weibull { alpha: f64, scale: f64 },
    /// Light-tailed reference law.
    Exponential { rate: f64 },
}

/// Extreme-value class of the claim law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailClass {
    /// Tail in R(−α−1); `alpha` is the exponent of the integrated tail.
    RegularlyVarying {
        alpha: f64,
    },
    /// Maximum domain of attraction of the Gumbel law.
    GumbelMda,
    LightTail,
}

impl TailClass {
    pub fn is_heavy(&self) -> bool {
        !matches!(self, TailClass::LightTail)
    }
}

/// A validated claim-size distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClaimFamily", into = "ClaimFamily")]
pub struct ClaimDistribution {
    family: ClaimFamily,
    mean: f64,
}

impl TryFrom<ClaimFamily> for ClaimDistribution {
    type Error = Error;

    fn try_from(family: ClaimFamily) -> Result<Self> {
        Self::new(family)
    }
}

impl From<ClaimDistribution> for ClaimFamily {
    fn from(d: ClaimDistribution) -> Self {
        d.family
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ClaimDistribution {
    pub fn new(family: ClaimFamily) -> Result<Self> {
        let mean = match family {
            ClaimFamily::Pareto { alpha, xm } => {
                positive("pareto.alpha", alpha)?;
                positive("pareto.xm", xm)?;
                xm * (alpha + 1.0) / alpha
            }
            ClaimFamily::Lognormal { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(Error::Config(format!("lognormal.mu must be finite, got {mu}")));
                }
                positive("lognormal.sigma", sigma)?;
                (mu + 0.5 * sigma * sigma).exp()
            }
            ClaimFamily::Weibull { alpha, scale } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::Config(format!("weibull.alpha must lie in (0, 1) for a subexponential tail, got {alpha}")));
                }
                positive("weibull.scale", scale)?;
                scale * libm::tgamma(1.0 + 1.0 / alpha)
            }
            ClaimFamily::Exponential { rate } => {
                positive("exponential.rate", rate)?;
                1.0 / rate
            }
        };
        Ok(Self { family, mean })
    }

    pub fn pareto(alpha: f64, xm: f64) -> Result<Self> {
        Self::new(ClaimFamily::Pareto { alpha, xm })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(ClaimFamily::Lognormal { mu, sigma })
    }

    pub fn weibull(alpha: f64, scale: f64) -> Result<Self> {
        Self::new(ClaimFamily::Weibull { alpha, scale })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(ClaimFamily::Exponential { rate })
    }

    pub fn family(&self) -> ClaimFamily {
        self.family
    }

    /// `E[C]`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn class(&self) -> TailClass {
        match self.family {
            ClaimFamily::Pareto { alpha, .. } => TailClass::RegularlyVarying { alpha },
            ClaimFamily::Lognormal { .. } | ClaimFamily::Weibull { .. } => TailClass::GumbelMda,
            ClaimFamily::Exponential { .. } => TailClass::LightTail,
        }
    }

    /// Point where quadrature splits the integration range.
    fn scale_point(&self) -> f64 {
        match self.family {
            ClaimFamily::Pareto { xm, .. } => xm,
            ClaimFamily::Lognormal { mu, .. } => mu.exp(),
            ClaimFamily::Weibull { scale, .. } => scale,
            ClaimFamily::Exponential { rate } => 1.0 / rate,
        }
    }

    fn tail_unchecked(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        match self.family {
            ClaimFamily::Pareto { alpha, xm } => {
                if x <= xm {
                    1.0
                } else {
                    (xm / x).powf(alpha + 1.0)
                }
            }
            ClaimFamily::Lognormal { mu, sigma } => 0.5 * libm::erfc((x.ln() - mu) / (sigma * std::f64::consts::SQRT_2)),
            ClaimFamily::Weibull { alpha, scale } => (-(x / scale).powf(alpha)).exp(),
            ClaimFamily::Exponential { rate } => (-rate * x).exp(),
        }
    }

    /// Tail probability `P(C ≥ x)`.
    pub fn tail(&self, x: f64) -> Result<f64> {
        check_nonneg(x)?;
        Ok(self.tail_unchecked(x))
    }

    /// `∫ₓ^∞ P(C ≥ y) dy`, i.e. `E[(C − x)⁺]`.
    pub fn tail_integral(&self, x: f64) -> Result<f64> {
        check_nonneg(x)?;
        match self.family {
            ClaimFamily::Pareto { alpha, xm } => {
                if x >= xm {
                    Ok(xm.powf(alpha + 1.0) * x.powf(-alpha) / alpha)
                } else {
                    Ok(xm - x + xm / alpha)
                }
            }
            ClaimFamily::Exponential { rate } => Ok((-rate * x).exp() / rate),
            ClaimFamily::Lognormal { .. } | ClaimFamily::Weibull { .. } => {
                if x == 0.0 {
                    return Ok(self.mean);
                }
                let r = integrate_to_infinity(|y| self.tail_unchecked(y), x, self.scale_point(), QuadOptions::default())?;
                Ok(r.value)
            }
        }
    }

    /// Integrated-tail probability `1 − B₀(x) = (1/E[C]) ∫ₓ^∞ P(C ≥ y) dy`.
    pub fn integrated_tail(&self, x: f64) -> Result<f64> {
        check_nonneg(x)?;
        if x == 0.0 {
            return Ok(1.0);
        }
        Ok((self.tail_integral(x)? / self.mean).min(1.0))
    }

    /// Mean excess `e(u) = E[C − u | C > u]`.
    pub fn mean_excess(&self, u: f64) -> Result<f64> {
        check_nonneg(u)?;
        let tail = self.tail_unchecked(u);
        if tail < TAIL_FLOOR {
            return Err(Error::Saturation(format!("tail at u = {u} is below {TAIL_FLOOR:e}; use the asymptotic mean-excess form")));
        }
        match self.family {
            ClaimFamily::Pareto { alpha, xm } if u >= xm => Ok(u / alpha),
            ClaimFamily::Exponential { rate } => Ok(1.0 / rate),
            _ => Ok(self.tail_integral(u)? / tail),
        }
    }

    /// Leading-order mean excess for large `u`.
    pub fn mean_excess_asymptotic(&self, u: f64) -> f64 {
        match self.family {
            ClaimFamily::Pareto { alpha, .. } => u / alpha,
            ClaimFamily::Lognormal { mu, sigma } => sigma * sigma * u / (u.ln() - mu),
            ClaimFamily::Weibull { alpha, scale } => scale.powf(alpha) * u.powf(1.0 - alpha) / alpha,
            ClaimFamily::Exponential { rate } => 1.0 / rate,
        }
    }

    /// The `x` with `P(C ≥ x) = p`, for the families sampled by inversion.
    pub fn inverse_tail(&self, p: f64) -> Option<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return None;
        }
        match self.family {
            ClaimFamily::Pareto { alpha, xm } => Some(xm * p.powf(-1.0 / (alpha + 1.0))),
            ClaimFamily::Weibull { alpha, scale } => Some(scale * (-p.ln()).powf(1.0 / alpha)),
            ClaimFamily::Exponential { rate } => Some(-p.ln() / rate),
            ClaimFamily::Lognormal { .. } => None,
        }
    }

    /// One draw from the law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.family {
            ClaimFamily::Lognormal { mu, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                (mu + sigma * z).exp()
            }
            _ => {
                // uniform on (0, 1]
                let p = 1.0 - rng.random::<f64>();
                self.inverse_tail(p).expect("inversion family")
            }
        }
    }
}

fn check_nonneg(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("claim level must be non-negative, got {x}")))
    }
}
