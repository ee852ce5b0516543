//! Aggregate claims `A_t = Σ_{i ≤ N_{t−}} C_i`: Monte Carlo tails, the first-order
//! large-deviation approximation, and the checks on the counting process it rests on.

use serde::{Deserialize, Serialize};

use crate::arrivals::{expected_count, ArrivalModel, ArrivalSampler, ModelRepr};
use crate::claims::{ClaimDistribution, TailClass};
use crate::error::{Error, Result};
use crate::harness::exec::{map_reduce, Moments};
use crate::harness::rng::RngStreamPlan;
use crate::ldp::{c_mu_prime, AssumptionReport, Clause, RateFunction};
use crate::ruin::EstimateReport;


pub const MIN_PATHS: u64 = 1000;

/// Paths used to estimate `E[N_t]` when no closed form exists.
pub const COUNT_PATHS: u64 = 10_000;

fn default_gamma_floor() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregateQuery {
    pub model: ArrivalModel,
    pub claims: ClaimDistribution,
    pub t: f64,
    pub x: f64,
    #[serde(default = "default_gamma_floor")]
    pub gamma_floor: f64,
}

impl AggregateQuery {
    pub fn new(model: ArrivalModel, claims: ClaimDistribution, t: f64, x: f64) -> Result<Self> {
        let q = Self { model, claims, t, x, gamma_floor: 1.0 };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::Config(format!("aggregate time t must be positive, got {}", self.t)));
        }
        if !self.x.is_finite() {
            return Err(Error::Config(format!("aggregate level x must be finite, got {}", self.x)));
        }
        if !(self.gamma_floor > 0.0) {
            return Err(Error::Config(format!("gamma_floor must be positive, got {}", self.gamma_floor)));
        }
        Ok(())
    }

    pub fn with_x(&self, x: f64) -> Self {
        Self { x, ..self.clone() }
    }
}

/// `E[N_t]`: closed form where known, otherwise Monte Carlo on a dedicated stream plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountMean {
    pub value: f64,
    pub exact: bool,
}

pub fn count_mean(model: &ArrivalModel, t: f64, plan: &RngStreamPlan, workers: usize) -> Result<CountMean> {
    if let Some(v) = model.exact_expected_count(t) {
        return Ok(CountMean { value: v, exact: true });
    }
    let sub = RngStreamPlan::new(plan.master_seed() ^ 0x6e5f_636f_756e_7473);
    let e = expected_count(model, t, COUNT_PATHS, &sub, workers)?;
    Ok(CountMean { value: e.mc_mean, exact: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Approximation {
    pub value: f64,
    pub expected_count: CountMean,
    /// `x ≥ γ·E[N_t]`.
    pub in_regime: bool,
}

fn require_regular_variation(claims: &ClaimDistribution) -> Result<()> {
    match claims.class() {
        TailClass::RegularlyVarying { alpha } if alpha > 0.0 && claims.mean().is_finite() => Ok(()),
        other => Err(Error::Class(format!("aggregate approximation needs regularly varying claims with finite mean, got {other:?}"))),
    }
}

/// `E[N_t]·P(C ≥ x)`.
pub fn kluppelberg_approx(q: &AggregateQuery, plan: &RngStreamPlan, workers: usize) -> Result<Approximation> {
    q.validate()?;
    require_regular_variation(&q.claims)?;
    let n = count_mean(&q.model, q.t, plan, workers)?;
    approximation_with(q, n)
}

fn approximation_with(q: &AggregateQuery, n: CountMean) -> Result<Approximation> {
    let tail = q.claims.tail(q.x.max(0.0))?;
    Ok(Approximation { value: n.value * tail, expected_count: n, in_regime: q.x >= q.gamma_floor * n.value })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailEstimator {
    /// Exceedance frequency of `A_t − Â > x`.
    #[default]
    Plain,
    /// Conditional Monte Carlo on the largest claim: `N·B̄(max(M_{N−1}, x + Â − S_{N−1}))`.
    Conditional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggregateReport {
    pub x: f64,
    pub report: EstimateReport,
    pub approx: Option<Approximation>,
    pub in_regime: bool,
    /// `Â`, the centring constant.
    pub centre: f64,
    pub estimator: TailEstimator,
}

/// `P(A_t − Â > x)` for every `x` in `xs`, all on the same paths.
#[allow(clippy::too_many_arguments)]
pub fn mc_aggregate_tail_grid(
    model: &ArrivalModel,
    claims: &ClaimDistribution,
    t: f64,
    xs: &[f64],
    gamma_floor: f64,
    n_paths: u64,
    plan: &RngStreamPlan,
    workers: usize,
    estimator: TailEstimator,
) -> Result<Vec<AggregateReport>> {
    if n_paths < MIN_PATHS {
        return Err(Error::Domain(format!("n_paths must be at least {MIN_PATHS}, got {n_paths}")));
    }
    let base = AggregateQuery { model: model.clone(), claims: *claims, t, x: 0.0, gamma_floor };
    base.validate()?;

    let exact = model.exact_expected_count(t);
    let centre = match exact {
        Some(n) => n * claims.mean(),
        None => {
            let m = map_reduce(
                plan,
                n_paths,
                workers,
                Moments::default,
                |acc, _, stream| {
                    let mut sampler = ArrivalSampler::new(model);
                    let mut total = 0.0;
                    while sampler.next_arrival(stream, t)?.is_some() {
                        total += claims.sample(stream.claims());
                    }
                    acc.push(total);
                    Ok(())
                },
                Moments::merge,
            )?;
            m.mean()
        }
    };

    let levels: Vec<f64> = xs.iter().map(|x| x + centre).collect();
    let stats = map_reduce(
        plan,
        n_paths,
        workers,
        || vec![Moments::default(); levels.len()],
        |acc, _, stream| {
            let mut sampler = ArrivalSampler::new(model);
            let mut n = 0u64;
            let mut before_last = 0.0;
            let mut max_before_last = 0.0f64;
            let mut last = 0.0;
            while sampler.next_arrival(stream, t)?.is_some() {
                if n > 0 {
                    before_last += last;
                    max_before_last = max_before_last.max(last);
                }
                last = claims.sample(stream.claims());
                n += 1;
            }
            let total = before_last + last;
            for (m, &y) in acc.iter_mut().zip(&levels) {
                let v = match estimator {
                    TailEstimator::Plain => f64::from(u8::from(total > y)),
                    TailEstimator::Conditional if n == 0 => f64::from(u8::from(0.0 > y)),
                    TailEstimator::Conditional => n as f64 * claims.tail(max_before_last.max(y - before_last).max(0.0))?,
                };
                m.push(v);
            }
            Ok(())
        },
        |a, b| a.iter_mut().zip(b).for_each(|(x, y)| x.merge(y)),
    )?;

    let approx_n = if require_regular_variation(claims).is_ok() {
        Some(match exact {
            Some(v) => CountMean { value: v, exact: true },
            None => count_mean(model, t, plan, workers)?,
        })
    } else {
        None
    };
    xs.iter()
        .zip(stats)
        .map(|(&x, m)| {
            let report = match estimator {
                TailEstimator::Plain => EstimateReport::binomial(m.sum.round() as u64, n_paths, plan.master_seed()),
                TailEstimator::Conditional => EstimateReport::from_moments(m.mean(), m.std_error(), n_paths, plan.master_seed()),
            };
            let approx = approx_n.map(|n| approximation_with(&base.with_x(x), n)).transpose()?;
            let report = report.with_asymptotic(approx.map(|a| a.value));
            let in_regime = approx.map(|a| a.in_regime).unwrap_or(false);
            Ok(AggregateReport { x, report, approx, in_regime, centre, estimator })
        })
        .collect()
}

/// Single-level form of [`mc_aggregate_tail_grid`].
pub fn mc_aggregate_tail(
    q: &AggregateQuery,
    n_paths: u64,
    plan: &RngStreamPlan,
    workers: usize,
    estimator: TailEstimator,
) -> Result<AggregateReport> {
    let v = mc_aggregate_tail_grid(&q.model, &q.claims, q.t, &[q.x], q.gamma_floor, n_paths, plan, workers, estimator)?;
    Ok(v[0])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct A2Options {
    pub n_paths: u64,
    pub seed: u64,
    pub workers: usize,
    /// `μ′ = (1 + δ′)μ` for the exponential-moment clause.
    pub delta_prime: f64,
}

impl Default for A2Options {
    fn default() -> Self {
        Self { n_paths: 400, seed: 0x005e_eda2, workers: 1, delta_prime: 0.1 }
    }
}

pub const A2_TIMES: [f64; 2] = [100.0, 1000.0];

/// `E[N_t]` upper bound used for the finite-mean clause.
pub fn count_bound(model: &ArrivalModel, t: f64) -> (f64, &'static str) {
    match model.kind() {
        ModelRepr::Poisson { .. } => (model.exact_expected_count(t).unwrap(), "exact λt"),
        ModelRepr::Hawkes { .. } => (model.expected_count_bound(t), "νt/(1−‖h‖₁)"),
        ModelRepr::Cox { .. } => (model.exact_expected_count(t).unwrap(), "exact"),
        ModelRepr::SelfCorrecting { .. } => (model.expected_count_bound(t), "λ⁺t"),
    }
}

/// Finite mean, law of large numbers for `N_t / E[N_t]`, and the exponential-moment
/// condition through `c_{μ′} > 0`.
pub fn verify_assumption_a2(model: &ArrivalModel, rate: &RateFunction, opts: A2Options) -> Result<AssumptionReport> {
    let mut clauses = Vec::new();
    let mu = model.mean_rate();
    let matches = (rate.mu() - mu).abs() <= 1e-9 * mu;
    clauses.push(Clause::new("rate_matches_model", matches, format!("rate mu = {}, model mu = {mu}", rate.mu())));

    let bounds: Vec<(f64, f64, &str)> = A2_TIMES
        .iter()
        .map(|&t| {
            let (b, how) = count_bound(model, t);
            (t, b, how)
        })
        .collect();
    let finite = bounds.iter().all(|(_, b, _)| b.is_finite() && *b > 0.0);
    let detail = bounds.iter().map(|(t, b, how)| format!("E[N_{t}] <= {b} ({how})")).collect::<Vec<_>>().join("; ");
    clauses.push(Clause::new("finite_mean", finite, detail));

    let plan = RngStreamPlan::new(opts.seed);
    let ref_plan = RngStreamPlan::new(opts.seed.wrapping_add(0x9e37_79b9));
    let mut lln_ok = true;
    let mut dispersion = Vec::new();
    let mut details = Vec::new();
    for &t in &A2_TIMES {
        let e = expected_count(model, t, opts.n_paths, &plan, opts.workers)?;
        let (reference, ref_se) = match e.exact {
            Some(v) => (v, 0.0),
            None => {
                let r = expected_count(model, t, 4 * opts.n_paths, &ref_plan, opts.workers)?;
                (r.mc_mean, r.std_error)
            }
        };
        let ratio = e.mc_mean / reference;
        let se = (e.std_error.powi(2) + ref_se.powi(2)).sqrt() / reference;
        let ok = (ratio - 1.0).abs() <= 3.0 * se;
        lln_ok &= ok;
        dispersion.push(e.std_error * (opts.n_paths as f64).sqrt() / reference);
        details.push(format!("t={t}: mean N_t/E[N_t] = {ratio:.5} ± {:.5}", 3.0 * se));
    }
    let shrinking = dispersion.windows(2).all(|w| w[1] < w[0]);
    details.push(format!("sd(N_t/E[N_t]) = {dispersion:.4?}"));
    clauses.push(Clause::new("lln_ratio", lln_ok && shrinking, details.join("; ")));

    let c = c_mu_prime(rate, (1.0 + opts.delta_prime) * rate.mu())?;
    let eps = c.value.exp_m1();
    clauses.push(Clause::new(
        "exponential_moment",
        c.holds,
        format!("c_mu' at mu' = {} is {:.6}; admissible epsilon < {eps:.6}", c.mu_prime, c.value),
    ));

    Ok(AssumptionReport { subject: model.name().to_string(), clauses })
}
