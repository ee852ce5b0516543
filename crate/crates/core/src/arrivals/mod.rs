//! Arrival processes: homogeneous Poisson, linear Hawkes, Cox with shot-noise
//! intensity, and the self-correcting (stress-release) process.
//!
//! All processes start from an empty history at time 0.

mod kernel;
mod sim;

use serde::{Deserialize, Serialize};

pub use kernel::{Baseline, Kernel, KernelForm, StressRate};
pub use sim::{simulate, ArrivalSampler, CANDIDATE_BUDGET};

use crate::error::{Error, Result};
use crate::harness::exec::{map_reduce, Moments};
use crate::harness::rng::RngStreamPlan;

/// A validated arrival model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr", into = "ModelRepr")]
pub struct ArrivalModel {
    kind: ModelRepr,
}

/// Wire form of [`ArrivalModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelRepr {
    Poisson { lambda: f64 },
    Hawkes { nu: f64, kernel: Kernel },
    Cox { baseline: Baseline, gamma: f64, kernel: Kernel },
    SelfCorrecting { rate: StressRate },
}

impl TryFrom<ModelRepr> for ArrivalModel {
    type Error = Error;
    fn try_from(kind: ModelRepr) -> Result<Self> {
        ArrivalModel::new(kind)
    }
}

impl From<ArrivalModel> for ModelRepr {
    fn from(m: ArrivalModel) -> Self {
        m.kind
    }
}

impl ArrivalModel {
    pub fn new(kind: ModelRepr) -> Result<Self> {
        match &kind {
            ModelRepr::Poisson { lambda } => {
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::Config(format!("poisson lambda must be positive, got {lambda}")));
                }
            }
            ModelRepr::Hawkes { nu, kernel } => {
                if !(*nu > 0.0 && nu.is_finite()) {
                    return Err(Error::Config(format!("hawkes nu must be positive, got {nu}")));
                }
                let l1 = kernel.l1_norm();
                if l1 >= 1.0 {
                    return Err(Error::Config(format!("Hawkes kernel L1 norm {l1} ≥ 1 violates subcriticality")));
                }
            }
            ModelRepr::Cox { baseline, gamma, .. } => {
                baseline.validate()?;
                if !(*gamma > 0.0 && gamma.is_finite()) {
                    return Err(Error::Config(format!("cox gamma must be positive, got {gamma}")));
                }
            }
            ModelRepr::SelfCorrecting { rate } => rate.validate()?,
        }
        Ok(Self { kind })
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        Self::new(ModelRepr::Poisson { lambda })
    }

    pub fn hawkes(nu: f64, kernel: Kernel) -> Result<Self> {
        Self::new(ModelRepr::Hawkes { nu, kernel })
    }

    pub fn cox(baseline: Baseline, gamma: f64, kernel: Kernel) -> Result<Self> {
        Self::new(ModelRepr::Cox { baseline, gamma, kernel })
    }

    pub fn self_correcting(rate: StressRate) -> Result<Self> {
        Self::new(ModelRepr::SelfCorrecting { rate })
    }

    pub fn kind(&self) -> &ModelRepr {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelRepr::Poisson { .. } => "poisson",
            ModelRepr::Hawkes { .. } => "hawkes",
            ModelRepr::Cox { .. } => "cox",
            ModelRepr::SelfCorrecting { .. } => "self_correcting",
        }
    }

    /// Long-run arrival rate `μ = lim N_t / t`.
    pub fn mean_rate(&self) -> f64 {
        match &self.kind {
            ModelRepr::Poisson { lambda } => *lambda,
            ModelRepr::Hawkes { nu, kernel } => nu / (1.0 - kernel.l1_norm()),
            ModelRepr::Cox { baseline, gamma, kernel } => baseline.limit() + gamma * kernel.l1_norm(),
            ModelRepr::SelfCorrecting { .. } => 1.0,
        }
    }

    /// Analytic `E[N_t]` where it is known in closed form.
    pub fn exact_expected_count(&self, t: f64) -> Option<f64> {
        match &self.kind {
            ModelRepr::Poisson { lambda } => Some(lambda * t),
            ModelRepr::Cox { baseline, gamma, kernel } => Some(baseline.integral(t) + gamma * kernel.double_integral(t)),
            ModelRepr::Hawkes { nu, kernel } => match kernel.form() {
                // E[λ_t] = μ + (ν − μ)e^{−(b−a)t}
                KernelForm::Exp { a, b } => {
                    let mu = self.mean_rate();
                    let k = b - a;
                    Some(mu * t + (nu - mu) * (-(-k * t).exp_m1()) / k)
                }
                KernelForm::Tabulated { .. } => None,
            },
            ModelRepr::SelfCorrecting { .. } => None,
        }
    }

    /// Analytic upper bound on `E[N_t]`.
    pub fn expected_count_bound(&self, t: f64) -> f64 {
        match &self.kind {
            ModelRepr::Poisson { lambda } => lambda * t,
            ModelRepr::Hawkes { .. } => self.mean_rate() * t,
            ModelRepr::Cox { .. } => self.exact_expected_count(t).unwrap_or(f64::INFINITY),
            ModelRepr::SelfCorrecting { rate } => rate.lambda_plus() * t,
        }
    }

    /// Conditional intensity at `t` given the history `prefix`.
    ///
    /// For the Cox model `prefix` holds the outer shot times, for the others the
    /// arrival times. Only entries strictly before `t` contribute.
    pub fn intensity_at(&self, prefix: &[f64], t: f64) -> Result<f64> {
        if prefix.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::Domain("history must be sorted in increasing order".into()));
        }
        let before = &prefix[..prefix.partition_point(|&s| s < t)];
        Ok(match &self.kind {
            ModelRepr::Poisson { lambda } => *lambda,
            ModelRepr::Hawkes { nu, kernel } => nu + before.iter().map(|&s| kernel.eval(t - s)).sum::<f64>(),
            ModelRepr::Cox { baseline, kernel, .. } => baseline.eval(t) + before.iter().map(|&s| kernel.eval(t - s)).sum::<f64>(),
            ModelRepr::SelfCorrecting { rate } => rate.eval(t - before.len() as f64),
        })
    }
}

/// One realisation of arrival times on `(0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalPath {
    pub horizon: f64,
    pub times: Vec<f64>,
}

impl ArrivalPath {
    pub fn count(&self) -> usize {
        self.times.len()
    }

    /// Number of arrivals strictly before `t`.
    pub fn count_before(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s < t)
    }

    /// CSV with a single `time` column.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(24 * (self.times.len() + 1));
        out.push_str("time\n");
        for t in &self.times {
            out.push_str(&format!("{t}\n"));
        }
        out
    }
}

/// Monte Carlo `E[N_t]` with whatever analytic value is available.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedCount {
    pub t: f64,
    pub mc_mean: f64,
    pub std_error: f64,
    pub n_paths: u64,
    pub exact: Option<f64>,
    pub upper_bound: f64,
}

/// Estimates `E[N_t]` from `n_paths` independent paths.
pub fn expected_count(model: &ArrivalModel, t: f64, n_paths: u64, plan: &RngStreamPlan, workers: usize) -> Result<ExpectedCount> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    if n_paths == 0 {
        return Err(Error::Domain("n_paths must be at least 1".into()));
    }
    let m = map_reduce(
        plan,
        n_paths,
        workers,
        Moments::default,
        |acc, _, stream| {
            let mut sampler = ArrivalSampler::new(model);
            let mut n = 0u64;
            while sampler.next_arrival(stream, t)?.is_some() {
                n += 1;
            }
            acc.push(n as f64);
            Ok(())
        },
        Moments::merge,
    )?;
    Ok(ExpectedCount {
        t,
        mc_mean: m.mean(),
        std_error: m.std_error(),
        n_paths,
        exact: model.exact_expected_count(t),
        upper_bound: model.expected_count_bound(t),
    })
}

/// Parameter sets used throughout the examples and tests.
pub mod standard {
    use super::*;

    /// ν = 1, `h(t) = 0.5·e^{−t}`, so `‖h‖₁ = 0.5` and `μ = 2`.
    pub fn hawkes() -> ArrivalModel {
        ArrivalModel::hawkes(1.0, Kernel::exp(0.5, 1.0).unwrap()).unwrap()
    }

    /// ν ≡ 1, γ = 1, `g(t) = e^{−2t}`, so `‖g‖₁ = 0.5` and `μ = 1.5`.
    pub fn cox() -> ArrivalModel {
        ArrivalModel::cox(Baseline::Constant { nu: 1.0 }, 1.0, Kernel::exp(1.0, 2.0).unwrap()).unwrap()
    }

    /// Logistic stress rate between λ⁻ = 0.5 and λ⁺ = 2.
    pub fn self_correcting() -> ArrivalModel {
        ArrivalModel::self_correcting(StressRate::logistic(0.5, 2.0)).unwrap()
    }
}

#[cfg(test)]
mod tests;
