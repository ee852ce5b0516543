//! Large-deviation rate functions of `N_t / t` and the structural checks built on them.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::arrivals::{ArrivalModel, ModelRepr};
use crate::error::{Error, Result};
use crate::numeric::optim::{bracket_increasing, golden_section_min, newton_bisect};

#[cfg(test)]
mod tests;

/// A rate-function value in `[0, +∞]`.
///
/// `Finite < Infinite`, and finite values compare by their payload.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub enum Ext {
    Finite(f64),
    Infinite,
}

impl Ext {
    pub fn is_infinite(self) -> bool {
        matches!(self, Ext::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Ext::Finite(v) => Some(v),
            Ext::Infinite => None,
        }
    }

    /// The finite value; panics on `+∞`.
    pub fn unwrap(self) -> f64 {
        self.finite().expect("rate function is +∞ here")
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Finite(v) => write!(f, "{v}"),
            Ext::Infinite => f.write_str("inf"),
        }
    }
}

/// `x·ln(x/y)` with the `0·ln 0 = 0` convention.
fn xlogx_over(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x / y).ln()
    }
}

/// `x ln(x/(ν + x‖h‖₁)) − x + x‖h‖₁ + ν`.
pub fn hawkes_rate(x: f64, nu: f64, l1: f64) -> Ext {
    if x < 0.0 {
        return Ext::Infinite;
    }
    Ext::Finite((xlogx_over(x, nu + x * l1) - x + x * l1 + nu).max(0.0))
}

/// Poisson: `x ln(x/λ) − x + λ`.
pub fn poisson_rate(x: f64, lambda: f64) -> Ext {
    if x < 0.0 {
        return Ext::Infinite;
    }
    Ext::Finite((xlogx_over(x, lambda) - x + lambda).max(0.0))
}

/// Self-correcting process: `Λ⁻(x)` above 1, `Λ⁺(x)` below 1, zero at 1.
pub fn sc_rate(x: f64, lambda_minus: f64, lambda_plus: f64) -> Ext {
    if x < 0.0 {
        Ext::Infinite
    } else if x == 1.0 {
        Ext::Finite(0.0)
    } else if x > 1.0 {
        Ext::Finite(xlogx_over(x, lambda_minus) + lambda_minus - x)
    } else {
        Ext::Finite(xlogx_over(x, lambda_plus) + lambda_plus - x)
    }
}

/// Cox cumulant `Λ(θ) = (e^θ − 1)ν + γ(e^{(e^θ−1)‖g‖₁} − 1)`.
pub fn cox_cumulant(theta: f64, nu: f64, gamma: f64, l1: f64) -> Result<f64> {
    let s = theta.exp_m1();
    let v = s * nu + gamma * (s * l1).exp_m1();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Saturation(format!("cox cumulant overflows at theta = {theta}")))
    }
}

fn cox_cumulant_deriv(theta: f64, nu: f64, gamma: f64, l1: f64) -> f64 {
    let e = theta.exp();
    e * (nu + gamma * l1 * ((e - 1.0) * l1).exp())
}

/// Legendre transform of [`cox_cumulant`].
pub fn cox_rate(x: f64, nu: f64, gamma: f64, l1: f64) -> Result<Ext> {
    if x < 0.0 {
        return Ok(Ext::Infinite);
    }
    if x == 0.0 {
        return Ok(Ext::Finite(nu + gamma * -(-l1).exp_m1()));
    }
    let mu = nu + gamma * l1;
    if x == mu {
        return Ok(Ext::Finite(0.0));
    }
    let g = |t: f64| cox_cumulant_deriv(t, nu, gamma, l1) - x;
    let (lo, hi) = bracket_increasing(g, 0.0, 0.5, 200)?;
    let theta = newton_bisect(g, |t| cox_second(t, nu, gamma, l1), lo, hi, 1e-10);
    let v = theta * x - cox_cumulant(theta, nu, gamma, l1)?;
    Ok(Ext::Finite(v.max(0.0)))
}

fn cox_second(theta: f64, nu: f64, gamma: f64, l1: f64) -> f64 {
    let e = theta.exp();
    let shot = gamma * l1 * ((e - 1.0) * l1).exp();
    e * (nu + shot) + e * e * shot * l1
}

pub type CustomRate = Arc<dyn Fn(f64) -> Ext + Send + Sync>;

#[derive(Clone)]
pub enum RateKind {
    HawkesClosedForm {
        nu: f64,
        l1: f64,
    },
    CoxLegendre {
        nu: f64,
        gamma: f64,
        l1: f64,
    },
    SelfCorrectingPiecewise {
        lambda_minus: f64,
        lambda_plus: f64,
    },
    Poisson {
        lambda: f64,
    },
    /// An arbitrary function, used for negative controls.
    Custom {
        label: String,
        f: CustomRate,
    },
}

impl fmt::Debug for RateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateKind::HawkesClosedForm { nu, l1 } => write!(f, "HawkesClosedForm(nu={nu}, l1={l1})"),
            RateKind::CoxLegendre { nu, gamma, l1 } => write!(f, "CoxLegendre(nu={nu}, gamma={gamma}, l1={l1})"),
            RateKind::SelfCorrectingPiecewise { lambda_minus, lambda_plus } => {
                write!(f, "SelfCorrectingPiecewise({lambda_minus}, {lambda_plus})")
            }
            RateKind::Poisson { lambda } => write!(f, "Poisson({lambda})"),
            RateKind::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

/// A rate function `I` together with its zero `μ`.
#[derive(Debug, Clone)]
pub struct RateFunction {
    kind: RateKind,
    mu: f64,
}

impl RateFunction {
    pub fn hawkes(nu: f64, l1: f64) -> Result<Self> {
        if !(nu > 0.0 && l1 > 0.0 && l1 < 1.0) {
            return Err(Error::Domain(format!("hawkes rate needs nu > 0 and 0 < l1 < 1, got ({nu}, {l1})")));
        }
        Ok(Self { kind: RateKind::HawkesClosedForm { nu, l1 }, mu: nu / (1.0 - l1) })
    }

    pub fn cox(nu: f64, gamma: f64, l1: f64) -> Result<Self> {
        if !(nu > 0.0 && gamma > 0.0 && l1 > 0.0) {
            return Err(Error::Domain(format!("cox rate needs positive parameters, got ({nu}, {gamma}, {l1})")));
        }
        Ok(Self { kind: RateKind::CoxLegendre { nu, gamma, l1 }, mu: nu + gamma * l1 })
    }

    pub fn self_correcting(lambda_minus: f64, lambda_plus: f64) -> Result<Self> {
        if !(lambda_minus > 0.0 && lambda_minus < 1.0 && lambda_plus > 1.0) {
            return Err(Error::Domain(format!(
                "self-correcting rate needs 0 < lambda_minus < 1 < lambda_plus, got ({lambda_minus}, {lambda_plus})"
            )));
        }
        Ok(Self { kind: RateKind::SelfCorrectingPiecewise { lambda_minus, lambda_plus }, mu: 1.0 })
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::Domain(format!("poisson rate needs lambda > 0, got {lambda}")));
        }
        Ok(Self { kind: RateKind::Poisson { lambda }, mu: lambda })
    }

    pub fn custom(label: impl Into<String>, mu: f64, f: impl Fn(f64) -> Ext + Send + Sync + 'static) -> Self {
        Self { kind: RateKind::Custom { label: label.into(), f: Arc::new(f) }, mu }
    }

    /// The rate function governing `N_t / t` for `model`.
    pub fn for_model(model: &ArrivalModel) -> Result<Self> {
        match model.kind() {
            ModelRepr::Poisson { lambda } => Self::poisson(*lambda),
            ModelRepr::Hawkes { nu, kernel } => Self::hawkes(*nu, kernel.l1_norm()),
            ModelRepr::Cox { baseline, gamma, kernel } => Self::cox(baseline.limit(), *gamma, kernel.l1_norm()),
            ModelRepr::SelfCorrecting { rate } => Self::self_correcting(rate.lambda_minus(), rate.lambda_plus()),
        }
    }

    pub fn kind(&self) -> &RateKind {
        &self.kind
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn eval(&self, x: f64) -> Result<Ext> {
        Ok(match &self.kind {
            RateKind::HawkesClosedForm { nu, l1 } => hawkes_rate(x, *nu, *l1),
            RateKind::CoxLegendre { nu, gamma, l1 } => return cox_rate(x, *nu, *gamma, *l1),
            RateKind::SelfCorrectingPiecewise { lambda_minus, lambda_plus } => sc_rate(x, *lambda_minus, *lambda_plus),
            RateKind::Poisson { lambda } => poisson_rate(x, *lambda),
            RateKind::Custom { f, .. } => f(x),
        })
    }

    /// Finite value for `x ≥ 0`; `+∞` is mapped to `f64::INFINITY`.
    fn eval_f64(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)?.finite().unwrap_or(f64::INFINITY))
    }
}

/// Result of [`c_mu_prime`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CMuPrime {
    pub mu_prime: f64,
    pub value: f64,
    pub argmin: f64,
    /// Whether `c_{μ′} > 0`.
    pub holds: bool,
}

const X_MAX_GROWTH_CAP: f64 = 1e6;

/// `inf_{x ≥ μ′} I(x)/x`.
pub fn c_mu_prime(rate: &RateFunction, mu_prime: f64) -> Result<CMuPrime> {
    if !(mu_prime > rate.mu()) {
        return Ok(CMuPrime { mu_prime, value: 0.0, argmin: mu_prime, holds: false });
    }
    let ratio = |x: f64| rate.eval_f64(x).map(|v| v / x);
    let mut best_x = mu_prime;
    let mut best = ratio(mu_prime)?;
    let mut x_max = 2.0 * mu_prime;
    loop {
        let n = 200;
        let step = (x_max / mu_prime).ln() / n as f64;
        let grid: Vec<f64> = (0..=n).map(|i| mu_prime * (i as f64 * step).exp()).collect();
        let vals = grid.iter().map(|&x| ratio(x)).collect::<Result<Vec<_>>>()?;
        let (imin, &vmin) = vals.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        if vmin < best {
            best = vmin;
            best_x = grid[imin];
        }
        let lo = grid[imin.saturating_sub(1)];
        let hi = grid[(imin + 1).min(n)];
        let (x, v) = golden_section_min(|x| ratio(x).unwrap_or(f64::INFINITY), lo, hi, 1e-8 * lo.max(1.0));
        if v < best {
            best = v;
            best_x = x;
        }
        let tail = vals[n];
        if tail > 2.0 * best || x_max >= X_MAX_GROWTH_CAP * mu_prime {
            break;
        }
        x_max *= 2.0;
    }
    let value = best.max(0.0);
    Ok(CMuPrime { mu_prime, value, argmin: best_x, holds: value > 0.0 })
}

/// One pass/fail line of an assumption report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clause {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Clause {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub subject: String,
    pub clauses: Vec<Clause>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

pub const A1_GRID_POINTS: usize = 1000;

/// `n` log-spaced points on `[μ/100, 100μ]`, with `μ` itself inserted.
fn a1_grid(mu: f64) -> Vec<f64> {
    let (a, b) = ((mu / 100.0).ln(), (100.0 * mu).ln());
    let n = A1_GRID_POINTS;
    let mut g: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
    let at = g.partition_point(|&x| x < mu);
    if g.get(at) != Some(&mu) {
        g.insert(at, mu);
    }
    g
}

/// Structural checks of the rate function: unique zero at `μ`, monotone on each
/// side, convex on each side, `+∞` off `[0, ∞)`.
pub fn verify_assumption_a1(rate: &RateFunction) -> AssumptionReport {
    let mu = rate.mu();
    let grid = a1_grid(mu);
    let vals: Vec<f64> = grid.iter().map(|&x| rate.eval_f64(x).unwrap_or(f64::NAN)).collect();
    let mut clauses = Vec::new();

    let finite = vals.iter().all(|v| !v.is_nan());
    clauses.push(Clause::new("evaluable", finite, format!("{} grid points on [{}, {}]", grid.len(), grid[0], grid[grid.len() - 1])));

    let at_mu = rate.eval_f64(mu).unwrap_or(f64::NAN);
    let positive_off = grid.iter().zip(&vals).filter(|(x, _)| **x != mu).all(|(_, v)| *v > 0.0);
    let (xmin, _) = golden_section_min(|x| rate.eval_f64(x).unwrap_or(f64::INFINITY), mu / 2.0, 2.0 * mu, 1e-10 * mu);
    let unique = at_mu.abs() < 1e-12 && positive_off && (xmin - mu).abs() <= 1e-6 * mu;
    clauses.push(Clause::new(
        "zero_unique_at_mu",
        unique,
        format!("I(mu={mu}) = {at_mu:e}; refined argmin {xmin}; positive elsewhere on grid: {positive_off}"),
    ));

    let left: Vec<f64> = grid.iter().zip(&vals).filter(|(x, _)| **x <= mu).map(|(_, v)| *v).collect();
    let right: Vec<f64> = grid.iter().zip(&vals).filter(|(x, _)| **x >= mu).map(|(_, v)| *v).collect();
    let dec = left.windows(2).all(|w| w[1] <= w[0]);
    let inc = right.windows(2).all(|w| w[1] >= w[0]);
    clauses.push(Clause::new("decreasing_below_mu", dec, format!("{} points", left.len())));
    clauses.push(Clause::new("increasing_above_mu", inc, format!("{} points", right.len())));

    let mut worst = 0.0f64;
    for i in 0..grid.len().saturating_sub(2) {
        let (a, b) = (grid[i], grid[i + 2]);
        if (a < mu) != (b < mu) || a == mu || b == mu {
            continue;
        }
        let m = 0.5 * (a + b);
        let fm = rate.eval_f64(m).unwrap_or(f64::NAN);
        let excess = fm - 0.5 * (vals[i] + vals[i + 2]);
        let scale = 1.0f64.max(vals[i].abs()).max(vals[i + 2].abs());
        worst = worst.max(excess / scale);
        if excess.is_nan() {
            worst = f64::INFINITY;
        }
    }
    clauses.push(Clause::new("convex_each_side", worst <= 1e-9, format!("max relative midpoint excess {worst:e}")));

    let neg = rate.eval(-1.0).map(|v| v.is_infinite()).unwrap_or(false);
    clauses.push(Clause::new("infinite_below_zero", neg, "I(-1)".to_string()));

    let subject = format!("{:?}", rate.kind());
    AssumptionReport { subject, clauses }
}
