//! Deterministic building blocks of the arrival intensities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Excitation kernel `h` (Hawkes) or shot shape `g` (Cox), non-increasing on `[0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelForm", into = "KernelForm")]
pub struct Kernel {
    form: KernelForm,
    l1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelForm {
    /// `h(t) = a·exp(−b·t)`.
    Exp { a: f64, b: f64 },
    /// Piecewise-linear through `(t[i], values[i])`, zero beyond the last node.
    Tabulated { t: Vec<f64>, values: Vec<f64> },
}

impl TryFrom<KernelForm> for Kernel {
    type Error = Error;
    fn try_from(form: KernelForm) -> Result<Self> {
        Kernel::new(form)
    }
}

impl From<Kernel> for KernelForm {
    fn from(k: Kernel) -> Self {
        k.form
    }
}

impl Kernel {
    pub fn new(form: KernelForm) -> Result<Self> {
        let l1 = match &form {
            KernelForm::Exp { a, b } => {
                if !(*a > 0.0 && a.is_finite() && *b > 0.0 && b.is_finite()) {
                    return Err(Error::Config(format!("exp kernel needs a > 0 and b > 0, got a = {a}, b = {b}")));
                }
                a / b
            }
            KernelForm::Tabulated { t, values } => {
                if t.len() < 2 || t.len() != values.len() {
                    return Err(Error::Config("tabulated kernel needs at least two nodes and equal-length t/values".into()));
                }
                if t[0] != 0.0 {
                    return Err(Error::Config("tabulated kernel grid must start at t = 0".into()));
                }
                if let Some(i) = (1..t.len()).find(|&i| !(t[i] > t[i - 1]) || !t[i].is_finite()) {
                    return Err(Error::Config(format!("tabulated kernel grid not strictly increasing at index {i}")));
                }
                if let Some(i) = values.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
                    return Err(Error::Config(format!("tabulated kernel value at index {i} is not positive")));
                }
                if let Some(i) = (1..values.len()).find(|&i| values[i] > values[i - 1]) {
                    return Err(Error::Config(format!("tabulated kernel increases at index {i}; kernels must be non-increasing")));
                }
                t.windows(2).zip(values.windows(2)).map(|(tw, vw)| 0.5 * (tw[1] - tw[0]) * (vw[0] + vw[1])).sum()
            }
        };
        Ok(Self { form, l1 })
    }

    pub fn exp(a: f64, b: f64) -> Result<Self> {
        Self::new(KernelForm::Exp { a, b })
    }

    pub fn tabulated(t: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(KernelForm::Tabulated { t, values })
    }

    pub fn form(&self) -> &KernelForm {
        &self.form
    }

    /// `‖h‖_{L¹}`.
    pub fn l1_norm(&self) -> f64 {
        self.l1
    }

    /// `h(t)`, zero for negative `t`.
    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match &self.form {
            KernelForm::Exp { a, b } => a * (-b * t).exp(),
            KernelForm::Tabulated { t: grid, values } => {
                let last = grid.len() - 1;
                if t > grid[last] {
                    return 0.0;
                }
                let i = grid.partition_point(|&g| g <= t).clamp(1, last);
                let w = (t - grid[i - 1]) / (grid[i] - grid[i - 1]);
                values[i - 1] + w * (values[i] - values[i - 1])
            }
        }
    }

    /// End of the support (`∞` for the exponential form).
    pub fn support_end(&self) -> f64 {
        match &self.form {
            KernelForm::Exp { .. } => f64::INFINITY,
            KernelForm::Tabulated { t, .. } => t[t.len() - 1],
        }
    }

    /// `∫₀ᵗ ∫₀ˢ h(v) dv ds = ∫₀ᵗ (t − v) h(v) dv`.
    pub fn double_integral(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.form {
            KernelForm::Exp { a, b } => (a / b) * (t + (-b * t).exp_m1() / b),
            KernelForm::Tabulated { t: grid, values } => {
                // exact on each linear piece: ∫ (t − v)(p + q v) dv
                let mut acc = 0.0;
                for i in 1..grid.len() {
                    let lo = grid[i - 1];
                    if lo >= t {
                        break;
                    }
                    let hi = grid[i].min(t);
                    let slope = (values[i] - values[i - 1]) / (grid[i] - grid[i - 1]);
                    let p = values[i - 1] - slope * lo;
                    let prim = |v: f64| t * (p * v + 0.5 * slope * v * v) - (0.5 * p * v * v + slope * v * v * v / 3.0);
                    acc += prim(hi) - prim(lo);
                }
                acc
            }
        }
    }
}

/// Deterministic Cox baseline `ν(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Baseline {
    Constant {
        nu: f64,
    },
    /// `ν(t) = ν + (ν₀ − ν)·exp(−rate·t)`.
    Relaxing {
        nu: f64,
        nu0: f64,
        rate: f64,
    },
}

impl Baseline {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Baseline::Constant { nu } => nu > 0.0 && nu.is_finite(),
            Baseline::Relaxing { nu, nu0, rate } => {
                nu > 0.0 && nu0 > 0.0 && rate > 0.0 && nu.is_finite() && nu0.is_finite() && rate.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("cox baseline must be positive and finite: {self:?}")))
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Baseline::Constant { nu } => nu,
            Baseline::Relaxing { nu, nu0, rate } => nu + (nu0 - nu) * (-rate * t).exp(),
        }
    }

    /// `lim_{t→∞} ν(t)`.
    pub fn limit(&self) -> f64 {
        match *self {
            Baseline::Constant { nu } | Baseline::Relaxing { nu, .. } => nu,
        }
    }

    /// `sup_t ν(t)`.
    pub fn sup(&self) -> f64 {
        match *self {
            Baseline::Constant { nu } => nu,
            Baseline::Relaxing { nu, nu0, .. } => nu.max(nu0),
        }
    }

    /// `∫₀ᵗ ν(s) ds`.
    pub fn integral(&self, t: f64) -> f64 {
        match *self {
            Baseline::Constant { nu } => nu * t,
            Baseline::Relaxing { nu, nu0, rate } => nu * t - (nu0 - nu) * (-rate * t).exp_m1() / rate,
        }
    }
}

/// Non-decreasing rate `λ(z)` of the self-correcting process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StressRate {
    /// `min(λ⁺, max(λ⁻, e^z))`.
    ClampedExp { lambda_minus: f64, lambda_plus: f64 },
    /// `λ⁻ + (λ⁺ − λ⁻) / (1 + e^{−slope·z})`.
    Logistic { lambda_minus: f64, lambda_plus: f64, slope: f64 },
    /// Piecewise-linear through `(z[i], values[i])`, constant outside the grid.
    Tabulated { z: Vec<f64>, values: Vec<f64> },
}

impl StressRate {
    pub fn logistic(lambda_minus: f64, lambda_plus: f64) -> Self {
        StressRate::Logistic { lambda_minus, lambda_plus, slope: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if let StressRate::Tabulated { z, values } = self {
            if z.len() < 2 || z.len() != values.len() {
                return Err(Error::Config("tabulated stress rate needs at least two nodes and equal-length z/values".into()));
            }
            if let Some(i) = (1..z.len()).find(|&i| !(z[i] > z[i - 1])) {
                return Err(Error::Config(format!("tabulated stress grid not strictly increasing at index {i}")));
            }
            if let Some(i) = (1..values.len()).find(|&i| values[i] < values[i - 1]) {
                return Err(Error::Config(format!("stress rate decreases at index {i}; it must be non-decreasing")));
            }
        }
        if let StressRate::Logistic { slope, .. } = self {
            if !(*slope > 0.0 && slope.is_finite()) {
                return Err(Error::Config(format!("logistic slope must be positive, got {slope}")));
            }
        }
        let (lo, hi) = (self.lambda_minus(), self.lambda_plus());
        if !(lo > 0.0 && lo < 1.0) {
            return Err(Error::Config(format!("self-correcting lambda_minus = {lo} must lie in (0, 1)")));
        }
        if !(hi > 1.0 && hi.is_finite()) {
            return Err(Error::Config(format!("self-correcting lambda_plus = {hi} must be finite and > 1")));
        }
        Ok(())
    }

    pub fn eval(&self, z: f64) -> f64 {
        match self {
            StressRate::ClampedExp { lambda_minus, lambda_plus } => z.exp().clamp(*lambda_minus, *lambda_plus),
            StressRate::Logistic { lambda_minus, lambda_plus, slope } => {
                lambda_minus + (lambda_plus - lambda_minus) / (1.0 + (-slope * z).exp())
            }
            StressRate::Tabulated { z: grid, values } => {
                let last = grid.len() - 1;
                if z <= grid[0] {
                    return values[0];
                }
                if z >= grid[last] {
                    return values[last];
                }
                let i = grid.partition_point(|&g| g <= z).clamp(1, last);
                let w = (z - grid[i - 1]) / (grid[i] - grid[i - 1]);
                values[i - 1] + w * (values[i] - values[i - 1])
            }
        }
    }

    pub fn lambda_minus(&self) -> f64 {
        match self {
            StressRate::ClampedExp { lambda_minus, .. } | StressRate::Logistic { lambda_minus, .. } => *lambda_minus,
            StressRate::Tabulated { values, .. } => values[0],
        }
    }

    pub fn lambda_plus(&self) -> f64 {
        match self {
            StressRate::ClampedExp { lambda_plus, .. } | StressRate::Logistic { lambda_plus, .. } => *lambda_plus,
            StressRate::Tabulated { values, .. } => values[values.len() - 1],
        }
    }
}
