//! The risk process `U_t = u + pt − Σ C_i`: Monte Carlo ruin probabilities and
//! their heavy-tailed asymptotics.

use serde::{Deserialize, Serialize};

use crate::arrivals::{ArrivalModel, ArrivalSampler, ModelRepr};
use crate::claims::{ClaimDistribution, TailClass};
use crate::error::{Error, Result};
use crate::harness::exec::map_reduce;
use crate::harness::rng::{PathStream, RngStreamPlan};


/// Drift multiple used for the infinite-horizon truncation: `p(1 − ρ)z* = 20·max(u, E[C])`.
pub const TRUNCATION_DRIFT: f64 = 20.0;

pub const MIN_PATHS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskConfig {
    #[serde(default)]
    pub u: f64,
    pub p: f64,
    pub claims: ClaimDistribution,
    pub arrivals: ArrivalModel,
}

impl RiskConfig {
    pub fn new(u: f64, p: f64, claims: ClaimDistribution, arrivals: ArrivalModel) -> Result<Self> {
        let cfg = Self { u, p, claims, arrivals };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u >= 0.0 && self.u.is_finite()) {
            return Err(Error::Config(format!("initial reserve u must be finite and >= 0, got {}", self.u)));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::Config(format!("premium rate p must be positive, got {}", self.p)));
        }
        Ok(())
    }

    pub fn with_u(&self, u: f64) -> Self {
        Self { u, ..self.clone() }
    }

    /// `ρ = μ·E[C]/p`.
    pub fn rho(&self) -> f64 {
        self.arrivals.mean_rate() * self.claims.mean() / self.p
    }

    pub fn net_profit(&self) -> bool {
        self.rho() < 1.0
    }

    fn require_net_profit(&self) -> Result<f64> {
        let rho = self.rho();
        if rho < 1.0 {
            Ok(rho)
        } else {
            Err(Error::Refused(format!("net profit condition fails: rho = {rho} >= 1")))
        }
    }

    /// `z*` with `p(1 − ρ)z* = 20·max(u, E[C])`.
    pub fn truncation_horizon(&self) -> Result<f64> {
        let rho = self.require_net_profit()?;
        Ok(TRUNCATION_DRIFT * self.u.max(self.claims.mean()) / (self.p * (1.0 - rho)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateReport {
    pub estimate: f64,
    pub n_paths: u64,
    pub std_error: f64,
    pub ci95: (f64, f64),
    pub seed: u64,
    pub asymptotic: Option<f64>,
    pub ratio: Option<f64>,
    /// Wall-clock horizon used, if finite.
    pub horizon: Option<f64>,
    /// `T = z / e(u)` for finite-horizon reports.
    pub scaled_horizon: Option<f64>,
    /// The estimate is `ψ(u, z*) ≤ ψ(u)`.
    pub lower_bound: bool,
    /// `ρ` of the risk configuration; `ρ ≥ 1` flags a run without net profit.
    pub rho: Option<f64>,
}

impl EstimateReport {
    pub fn binomial(hits: u64, n_paths: u64, seed: u64) -> Self {
        let n = n_paths as f64;
        let p = hits as f64 / n;
        let se = (p * (1.0 - p) / n).sqrt();
        Self::from_moments(p, se, n_paths, seed)
    }

    pub fn from_moments(estimate: f64, std_error: f64, n_paths: u64, seed: u64) -> Self {
        Self {
            estimate,
            n_paths,
            std_error,
            ci95: ((estimate - 1.96 * std_error).max(0.0), (estimate + 1.96 * std_error).min(1.0)),
            seed,
            asymptotic: None,
            ratio: None,
            horizon: None,
            scaled_horizon: None,
            lower_bound: false,
            rho: None,
        }
    }

    pub fn with_asymptotic(mut self, asymptotic: Option<f64>) -> Self {
        self.asymptotic = asymptotic;
        self.ratio = asymptotic.filter(|a| *a > 0.0).map(|a| self.estimate / a);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RuinPath {
    pub ruined: bool,
    pub ruin_time: Option<f64>,
    pub min_surplus: f64,
}

/// One path up to `horizon`; ruin is only possible at claim instants.
pub fn simulate_ruin_path(cfg: &RiskConfig, horizon: f64, stream: &mut PathStream) -> Result<RuinPath> {
    if !(horizon > 0.0) {
        return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
    }
    let mut sampler = ArrivalSampler::new(&cfg.arrivals);
    let mut total = 0.0;
    let mut min_surplus = cfg.u;
    while let Some(t) = sampler.next_arrival(stream, horizon)? {
        total += cfg.claims.sample(stream.claims());
        let surplus = cfg.u + cfg.p * t - total;
        min_surplus = min_surplus.min(surplus);
        if surplus <= 0.0 {
            return Ok(RuinPath { ruined: true, ruin_time: Some(t), min_surplus });
        }
    }
    Ok(RuinPath { ruined: false, ruin_time: None, min_surplus })
}

/// Ruin counts for a set of `(u, z)` cells, all evaluated on the same paths.
///
/// A path is simulated once up to the largest `z`; the first time the running
/// maximum of `S_n − pτ_n` reaches each `u` decides every cell at that `u`.
pub fn ruin_counts(
    arrivals: &ArrivalModel,
    claims: &ClaimDistribution,
    p: f64,
    cells: &[(f64, f64)],
    n_paths: u64,
    plan: &RngStreamPlan,
    workers: usize,
) -> Result<Vec<u64>> {
    if cells.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(&(u, z)) = cells.iter().find(|(u, z)| !(*u >= 0.0 && *z > 0.0)) {
        return Err(Error::Domain(format!("ruin cell needs u >= 0 and z > 0, got ({u}, {z})")));
    }
    let mut levels: Vec<f64> = cells.iter().map(|c| c.0).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let level_of: Vec<usize> = cells.iter().map(|c| levels.partition_point(|&l| l < c.0)).collect();
    let horizon = cells.iter().map(|c| c.1).fold(0.0, f64::max);
    let n_cells = cells.len();

    struct Acc {
        hits: Vec<u64>,
        passage: Vec<f64>,
    }
    let init = || Acc { hits: vec![0; n_cells], passage: vec![f64::INFINITY; levels.len()] };
    let acc = map_reduce(
        plan,
        n_paths,
        workers,
        init,
        |acc, _, stream| {
            acc.passage.fill(f64::INFINITY);
            let mut sampler = ArrivalSampler::new(arrivals);
            let mut total = 0.0;
            let mut k = 0;
            while let Some(t) = sampler.next_arrival(stream, horizon)? {
                total += claims.sample(stream.claims());
                let d = total - p * t;
                while k < levels.len() && d >= levels[k] {
                    acc.passage[k] = t;
                    k += 1;
                }
                if k == levels.len() {
                    break;
                }
            }
            for (i, &(_, z)) in cells.iter().enumerate() {
                if acc.passage[level_of[i]] <= z {
                    acc.hits[i] += 1;
                }
            }
            Ok(())
        },
        |a, b| {
            for (x, y) in a.hits.iter_mut().zip(b.hits) {
                *x += y;
            }
        },
    )?;
    Ok(acc.hits)
}

fn check_paths(n_paths: u64) -> Result<()> {
    if n_paths < MIN_PATHS {
        return Err(Error::Domain(format!("n_paths must be at least {MIN_PATHS}, got {n_paths}")));
    }
    Ok(())
}

/// Asymptotic companion of a finite-horizon estimate, when the configuration admits one.
fn finite_companion(cfg: &RiskConfig, z: f64) -> Option<(f64, f64)> {
    if !cfg.net_profit() || !cfg.claims.class().is_heavy() {
        return None;
    }
    let e = cfg.claims.mean_excess(cfg.u).ok()?;
    let t_scaled = z / e;
    let a = asymptotic_finite(cfg, t_scaled).ok()?;
    Some((a.value, t_scaled))
}

/// `ψ(u, z)` for each `z` on common paths.
pub fn mc_ruin_finite_grid(
    cfg: &RiskConfig,
    zs: &[f64],
    n_paths: u64,
    plan: &RngStreamPlan,
    workers: usize,
) -> Result<Vec<EstimateReport>> {
    check_paths(n_paths)?;
    let cells: Vec<(f64, f64)> = zs.iter().map(|&z| (cfg.u, z)).collect();
    let hits = ruin_counts(&cfg.arrivals, &cfg.claims, cfg.p, &cells, n_paths, plan, workers)?;
    let rho = cfg.rho();
    Ok(zs
        .iter()
        .zip(hits)
        .map(|(&z, h)| {
            let companion = finite_companion(cfg, z);
            let mut r = EstimateReport::binomial(h, n_paths, plan.master_seed()).with_asymptotic(companion.map(|c| c.0));
            r.rho = Some(rho);
            r.horizon = Some(z);
            r.scaled_horizon = companion.map(|c| c.1);
            r
        })
        .collect())
}

/// `ψ(u, z) = P(τ_u ≤ z)`.
pub fn mc_ruin_finite(cfg: &RiskConfig, z: f64, n_paths: u64, plan: &RngStreamPlan, workers: usize) -> Result<EstimateReport> {
    Ok(mc_ruin_finite_grid(cfg, &[z], n_paths, plan, workers)?[0])
}

/// `ψ(u)` for each `u` on common paths, each truncated at its own `z*`.
pub fn mc_ruin_infinite_grid(
    cfg: &RiskConfig,
    us: &[f64],
    n_paths: u64,
    plan: &RngStreamPlan,
    workers: usize,
) -> Result<Vec<EstimateReport>> {
    check_paths(n_paths)?;
    let rho = cfg.require_net_profit()?;
    let cells = us.iter().map(|&u| Ok((u, cfg.with_u(u).truncation_horizon()?))).collect::<Result<Vec<_>>>()?;
    let hits = ruin_counts(&cfg.arrivals, &cfg.claims, cfg.p, &cells, n_paths, plan, workers)?;
    Ok(cells
        .iter()
        .zip(hits)
        .map(|(&(u, z), h)| {
            let asym = if cfg.claims.class().is_heavy() { asymptotic_infinite(&cfg.with_u(u)).ok() } else { None };
            let mut r = EstimateReport::binomial(h, n_paths, plan.master_seed()).with_asymptotic(asym);
            r.rho = Some(rho);
            r.horizon = Some(z);
            r.lower_bound = true;
            r
        })
        .collect())
}

/// `ψ(u)`, estimated as `ψ(u, z*)`.
pub fn mc_ruin_infinite(cfg: &RiskConfig, n_paths: u64, plan: &RngStreamPlan, workers: usize) -> Result<EstimateReport> {
    Ok(mc_ruin_infinite_grid(cfg, &[cfg.u], n_paths, plan, workers)?[0])
}

/// Horizon of a ruin sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Horizon {
    /// `ψ(u)`, truncated at each `u`'s own `z*`.
    Infinite,
    /// `ψ(u, z)` at a fixed wall-clock `z`.
    Finite { z: f64 },
    /// `ψ(u, e(u)·T)`.
    Scaled { t: f64 },
}

/// One report per `u`, all from the same paths.
pub fn ruin_sweep(
    cfg: &RiskConfig,
    us: &[f64],
    horizon: Horizon,
    n_paths: u64,
    plan: &RngStreamPlan,
    workers: usize,
) -> Result<Vec<EstimateReport>> {
    match horizon {
        Horizon::Infinite => mc_ruin_infinite_grid(cfg, us, n_paths, plan, workers),
        Horizon::Finite { z } => finite_sweep(cfg, us, |_| Ok(z), n_paths, plan, workers),
        Horizon::Scaled { t } => {
            if !(t > 0.0) {
                return Err(Error::Domain(format!("scaled horizon T must be positive, got {t}")));
            }
            finite_sweep(cfg, us, |u| Ok(cfg.claims.mean_excess(u)? * t), n_paths, plan, workers)
        }
    }
}

fn finite_sweep(
    cfg: &RiskConfig,
    us: &[f64],
    z_of: impl Fn(f64) -> Result<f64>,
    n_paths: u64,
    plan: &RngStreamPlan,
    workers: usize,
) -> Result<Vec<EstimateReport>> {
    check_paths(n_paths)?;
    let cells = us.iter().map(|&u| Ok((u, z_of(u)?))).collect::<Result<Vec<_>>>()?;
    let hits = ruin_counts(&cfg.arrivals, &cfg.claims, cfg.p, &cells, n_paths, plan, workers)?;
    let rho = cfg.rho();
    Ok(cells
        .iter()
        .zip(hits)
        .map(|(&(u, z), h)| {
            let companion = finite_companion(&cfg.with_u(u), z);
            let mut r = EstimateReport::binomial(h, n_paths, plan.master_seed()).with_asymptotic(companion.map(|c| c.0));
            r.rho = Some(rho);
            r.horizon = Some(z);
            r.scaled_horizon = companion.map(|c| c.1);
            r
        })
        .collect())
}

fn require_heavy(cfg: &RiskConfig) -> Result<TailClass> {
    let class = cfg.claims.class();
    if class.is_heavy() {
        Ok(class)
    } else {
        Err(Error::Class(format!("asymptotics need subexponential claims; {:?} is light-tailed", cfg.claims.family())))
    }
}

/// `ρ/(1 − ρ)·B̄₀(u)`.
pub fn asymptotic_infinite(cfg: &RiskConfig) -> Result<f64> {
    let rho = cfg.require_net_profit()?;
    require_heavy(cfg)?;
    Ok(rho / (1.0 - rho) * cfg.claims.integrated_tail(cfg.u)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteAsymptotic {
    pub value: f64,
    /// The bracketed factor multiplying `B̄₀(u)`.
    pub factor: f64,
    pub scaled_horizon: f64,
    /// `z = e(u)·T`.
    pub horizon: f64,
}

/// Finite-horizon factor for scaled time `T` and tail class.
pub fn finite_factor(rho: f64, class: TailClass, t_scaled: f64) -> Result<f64> {
    let pre = rho / (1.0 - rho);
    match class {
        TailClass::RegularlyVarying { alpha } => Ok(pre * -(-alpha * ((1.0 - rho) * t_scaled / alpha).ln_1p()).exp_m1()),
        TailClass::GumbelMda => Ok(pre * -(-(1.0 - rho) * t_scaled).exp_m1()),
        TailClass::LightTail => Err(Error::Class("finite-horizon asymptotics need subexponential claims".into())),
    }
}

/// Finite-horizon asymptotic at scaled time `T`, reported with `z = e(u)·T`.
pub fn asymptotic_finite(cfg: &RiskConfig, t_scaled: f64) -> Result<FiniteAsymptotic> {
    let rho = cfg.require_net_profit()?;
    let class = require_heavy(cfg)?;
    if !(t_scaled > 0.0) {
        return Err(Error::Domain(format!("scaled horizon T must be positive, got {t_scaled}")));
    }
    let factor = finite_factor(rho, class, t_scaled)?;
    let b0 = cfg.claims.integrated_tail(cfg.u)?;
    let horizon = cfg.claims.mean_excess(cfg.u)? * t_scaled;
    Ok(FiniteAsymptotic { value: factor * b0, factor, scaled_horizon: t_scaled, horizon })
}

/// Model-specific infinite-horizon prefactors, written out per arrival model.
pub mod prefactors {
    /// Hawkes: `νE[C] / (p(1 − ‖h‖₁) − νE[C])`.
    pub fn hawkes(nu: f64, l1: f64, mean_claim: f64, p: f64) -> f64 {
        nu * mean_claim / (p * (1.0 - l1) - nu * mean_claim)
    }

    /// Cox: `(ν + γ‖g‖₁)E[C] / (p − (ν + γ‖g‖₁)E[C])`.
    pub fn cox(nu: f64, gamma: f64, g1: f64, mean_claim: f64, p: f64) -> f64 {
        let m = nu + gamma * g1;
        m * mean_claim / (p - m * mean_claim)
    }

    /// Self-correcting: `E[C] / (p − E[C])`.
    pub fn self_correcting(mean_claim: f64, p: f64) -> f64 {
        mean_claim / (p - mean_claim)
    }

    /// Compound Poisson: `λE[C] / (p − λE[C])`.
    pub fn poisson(lambda: f64, mean_claim: f64, p: f64) -> f64 {
        lambda * mean_claim / (p - lambda * mean_claim)
    }

    /// Hawkes regularly varying finite-horizon factor, in its displayed form.
    pub fn hawkes_finite_rv(nu: f64, l1: f64, mean_claim: f64, p: f64, alpha: f64, t: f64) -> f64 {
        let gap = p * (1.0 - l1) - nu * mean_claim;
        hawkes(nu, l1, mean_claim, p) * (1.0 - (1.0 + gap / (p * (1.0 - l1)) * t / alpha).powf(-alpha))
    }

    pub fn hawkes_finite_gumbel(nu: f64, l1: f64, mean_claim: f64, p: f64, t: f64) -> f64 {
        let gap = p * (1.0 - l1) - nu * mean_claim;
        hawkes(nu, l1, mean_claim, p) * (1.0 - (-gap / (p * (1.0 - l1)) * t).exp())
    }

    pub fn cox_finite_rv(nu: f64, gamma: f64, g1: f64, mean_claim: f64, p: f64, alpha: f64, t: f64) -> f64 {
        let m = nu + gamma * g1;
        cox(nu, gamma, g1, mean_claim, p) * (1.0 - (1.0 + (1.0 - m * mean_claim / p) * t / alpha).powf(-alpha))
    }

    pub fn cox_finite_gumbel(nu: f64, gamma: f64, g1: f64, mean_claim: f64, p: f64, t: f64) -> f64 {
        let m = nu + gamma * g1;
        cox(nu, gamma, g1, mean_claim, p) * (1.0 - (-(p - m * mean_claim) * t / p).exp())
    }

    pub fn self_correcting_finite_rv(mean_claim: f64, p: f64, alpha: f64, t: f64) -> f64 {
        self_correcting(mean_claim, p) * (1.0 - (1.0 + (1.0 - mean_claim / p) * t / alpha).powf(-alpha))
    }

    pub fn self_correcting_finite_gumbel(mean_claim: f64, p: f64, t: f64) -> f64 {
        self_correcting(mean_claim, p) * (1.0 - (-(p - mean_claim) * t / p).exp())
    }
}

/// The model-specific prefactor for `cfg`, from the per-model formula.
pub fn model_prefactor(cfg: &RiskConfig) -> Result<f64> {
    cfg.require_net_profit()?;
    let c = cfg.claims.mean();
    Ok(match cfg.arrivals.kind() {
        ModelRepr::Poisson { lambda } => prefactors::poisson(*lambda, c, cfg.p),
        ModelRepr::Hawkes { nu, kernel } => prefactors::hawkes(*nu, kernel.l1_norm(), c, cfg.p),
        ModelRepr::Cox { baseline, gamma, kernel } => prefactors::cox(baseline.limit(), *gamma, kernel.l1_norm(), c, cfg.p),
        ModelRepr::SelfCorrecting { .. } => prefactors::self_correcting(c, cfg.p),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftRow {
    pub y: f64,
    pub tail: f64,
    pub std_error: f64,
    pub b0_tail: f64,
    pub ratio: f64,
}

/// Empirical tail of `Y_ε = sup_n {n(p/μ − ε) − pτ_n}` over arrivals up to `horizon`.
pub fn drift_diagnostic(
    cfg: &RiskConfig,
    eps: f64,
    ys: &[f64],
    n_paths: u64,
    horizon: f64,
    plan: &RngStreamPlan,
    workers: usize,
) -> Result<Vec<DriftRow>> {
    let mu = cfg.arrivals.mean_rate();
    let slope = cfg.p / mu - eps;
    if !(eps > 0.0 && slope > 0.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, p/mu) = (0, {}), got {eps}", cfg.p / mu)));
    }
    if !(horizon > 0.0) {
        return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
    }
    check_paths(n_paths)?;
    let hits = map_reduce(
        plan,
        n_paths,
        workers,
        || vec![0u64; ys.len()],
        |acc, _, stream| {
            let mut sampler = ArrivalSampler::new(&cfg.arrivals);
            let mut sup = f64::NEG_INFINITY;
            let mut n = 0.0;
            while let Some(t) = sampler.next_arrival(stream, horizon)? {
                n += 1.0;
                sup = sup.max(n * slope - cfg.p * t);
            }
            for (h, &y) in acc.iter_mut().zip(ys) {
                if sup >= y {
                    *h += 1;
                }
            }
            Ok(())
        },
        |a, b| a.iter_mut().zip(b).for_each(|(x, y)| *x += y),
    )?;
    ys.iter()
        .zip(hits)
        .map(|(&y, h)| {
            let tail = h as f64 / n_paths as f64;
            let b0 = cfg.claims.integrated_tail(y.max(0.0))?;
            Ok(DriftRow {
                y,
                tail,
                std_error: (tail * (1.0 - tail) / n_paths as f64).sqrt(),
                b0_tail: b0,
                ratio: if b0 > 0.0 { tail / b0 } else { f64::NAN },
            })
        })
        .collect()
}
