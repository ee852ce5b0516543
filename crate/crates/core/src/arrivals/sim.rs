//! Exact simulation by thinning a Poisson random measure.
//!
//! The measure lives on `[0, ∞) × [0, ∞)` (time × height) and is generated lazily
//! on a lattice of unit cells, each addressed by its own counter-based stream. A
//! candidate `(t, y)` becomes an arrival when `y ≤ λ(t)`. Because kernels are
//! non-increasing, the intensity just after the current time bounds it until the
//! next arrival (or shot), so only height bands below that bound are generated.
//!
//! Two consequences follow from addressing the measure by cell: a path simulated
//! to a longer horizon extends the shorter one, and models compared on the same
//! stream are coupled through the same points.

use std::collections::VecDeque;

use rand::Rng;

use super::{ArrivalModel, ArrivalPath, KernelForm, ModelRepr};
use crate::error::{Error, Result};
use crate::harness::rng::PathStream;

/// Maximum number of thinning candidates per path.
pub const CANDIDATE_BUDGET: u64 = 1_000_000_000;

const BAND_HEIGHT: f64 = 1.0;

/// Excitation sum `Σ k(t − s)` over stored event times.
#[derive(Debug, Clone)]
enum Excitation {
    /// Markov recursion for `a·e^{−b t}`: value just after `at`.
    Exp { a: f64, b: f64, value: f64, at: f64 },
    /// Explicit sum over events still inside the kernel support.
    Sum { events: VecDeque<f64>, support: f64 },
}

impl Excitation {
    fn new(form: &KernelForm, support: f64) -> Self {
        match form {
            KernelForm::Exp { a, b } => Excitation::Exp { a: *a, b: *b, value: 0.0, at: 0.0 },
            KernelForm::Tabulated { .. } => Excitation::Sum { events: VecDeque::new(), support },
        }
    }

    /// Sum over events at or before `t`.
    fn value(&self, kernel: &super::Kernel, t: f64) -> f64 {
        match self {
            Excitation::Exp { b, value, at, .. } => value * (-b * (t - at)).exp(),
            Excitation::Sum { events, .. } => events.iter().map(|&s| kernel.eval(t - s)).sum(),
        }
    }

    fn add(&mut self, t: f64) {
        match self {
            Excitation::Exp { a, b, value, at } => {
                *value = *value * (-*b * (t - *at)).exp() + *a;
                *at = t;
            }
            Excitation::Sum { events, support } => {
                while events.front().is_some_and(|&s| t - s > *support) {
                    events.pop_front();
                }
                events.push_back(t);
            }
        }
    }
}

/// Points of the random measure in the current cell, latest first.
#[derive(Debug, Clone, Default)]
struct Lattice {
    cell: Option<u64>,
    bands: u64,
    pending: Vec<(f64, f64)>,
}

impl Lattice {
    fn prepare(&mut self, stream: &PathStream, cell: u64, bands: u64, now: f64) {
        if self.cell != Some(cell) {
            self.cell = Some(cell);
            self.bands = 0;
            self.pending.clear();
        }
        if bands <= self.bands {
            return;
        }
        for band in self.bands..bands {
            let mut rng = stream.cell_rng(cell, band);
            // Poisson(1) count by inversion
            let u = rng.uniform();
            let mut k = 0u32;
            let mut p = (-1.0f64).exp();
            let mut cdf = p;
            while u > cdf && k < 64 {
                k += 1;
                p /= k as f64;
                cdf += p;
            }
            for _ in 0..k {
                let t = cell as f64 + rng.uniform();
                let y = (band as f64 + rng.uniform()) * BAND_HEIGHT;
                if t > now {
                    self.pending.push((t, y));
                }
            }
        }
        self.bands = bands;
        self.pending.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
    }

    fn peek(&self) -> Option<(f64, f64)> {
        self.pending.last().copied()
    }

    fn pop(&mut self) {
        self.pending.pop();
    }
}

/// Streaming simulator producing successive arrival times of one path.
#[derive(Debug, Clone)]
pub struct ArrivalSampler<'m> {
    model: &'m ArrivalModel,
    now: f64,
    count: u64,
    candidates: u64,
    lattice: Lattice,
    excitation: Option<Excitation>,
    next_shot: Option<f64>,
    last_shot: f64,
    shot_log: Option<Vec<f64>>,
    budget: u64,
    done: bool,
}

impl<'m> ArrivalSampler<'m> {
    pub fn new(model: &'m ArrivalModel) -> Self {
        let excitation = match model.kind() {
            ModelRepr::Hawkes { kernel, .. } | ModelRepr::Cox { kernel, .. } => Some(Excitation::new(kernel.form(), kernel.support_end())),
            _ => None,
        };
        Self {
            model,
            now: 0.0,
            count: 0,
            candidates: 0,
            lattice: Lattice::default(),
            excitation,
            next_shot: None,
            last_shot: 0.0,
            shot_log: None,
            budget: CANDIDATE_BUDGET,
            done: false,
        }
    }

    /// Arrivals produced so far.
    pub fn count(&self) -> u64 {
        self.count
    }

    /// Thinning candidates examined so far.
    pub fn candidates(&self) -> u64 {
        self.candidates
    }

    /// Next arrival time in `(now, horizon]`, or `None` once the horizon is passed.
    ///
    /// The horizon must not decrease between calls on the same sampler.
    pub fn next_arrival(&mut self, stream: &mut PathStream, horizon: f64) -> Result<Option<f64>> {
        if self.done {
            return Ok(None);
        }
        let next = match self.model.kind() {
            ModelRepr::Poisson { lambda } => {
                let gap = -(1.0 - stream.aux().random::<f64>()).ln() / lambda;
                let t = self.now + gap;
                self.candidates += 1;
                if t > horizon {
                    None
                } else {
                    self.now = t;
                    Some(t)
                }
            }
            _ => self.next_thinned(stream, horizon)?,
        };
        match next {
            Some(t) => {
                self.count += 1;
                Ok(Some(t))
            }
            None => {
                self.done = true;
                Ok(None)
            }
        }
    }

    fn bound(&self) -> f64 {
        let t = self.now;
        match self.model.kind() {
            ModelRepr::Poisson { lambda } => *lambda,
            ModelRepr::Hawkes { nu, kernel } => nu + self.exc().value(kernel, t),
            ModelRepr::Cox { baseline, kernel, .. } => baseline.sup() + self.exc().value(kernel, t),
            ModelRepr::SelfCorrecting { rate } => rate.lambda_plus(),
        }
    }

    fn intensity(&self, t: f64) -> f64 {
        match self.model.kind() {
            ModelRepr::Poisson { lambda } => *lambda,
            ModelRepr::Hawkes { nu, kernel } => nu + self.exc().value(kernel, t),
            ModelRepr::Cox { baseline, kernel, .. } => baseline.eval(t) + self.exc().value(kernel, t),
            ModelRepr::SelfCorrecting { rate } => rate.eval(t - self.count as f64),
        }
    }

    fn exc(&self) -> &Excitation {
        self.excitation.as_ref().expect("model with excitation")
    }

    fn next_break(&mut self, stream: &mut PathStream) -> f64 {
        let ModelRepr::Cox { gamma, .. } = self.model.kind() else {
            return f64::INFINITY;
        };
        *self.next_shot.get_or_insert_with(|| {
            let gap = -(1.0 - stream.aux().random::<f64>()).ln() / gamma;
            self.last_shot + gap
        })
    }

    fn next_thinned(&mut self, stream: &mut PathStream, horizon: f64) -> Result<Option<f64>> {
        loop {
            if self.now >= horizon {
                return Ok(None);
            }
            let cell = self.now.floor() as u64;
            let bands = (self.bound() / BAND_HEIGHT).ceil() as u64;
            self.lattice.prepare(stream, cell, bands, self.now);
            let brk = self.next_break(stream);
            match self.lattice.peek() {
                Some((t, y)) if t < brk => {
                    if t > horizon {
                        self.now = horizon;
                        return Ok(None);
                    }
                    self.lattice.pop();
                    self.now = t;
                    self.candidates += 1;
                    if self.candidates > self.budget {
                        return Err(Error::SimulationBudget { candidates: self.candidates });
                    }
                    if y <= self.intensity(t) {
                        if let Some(exc) = self.excitation.as_mut() {
                            if matches!(self.model.kind(), ModelRepr::Hawkes { .. }) {
                                exc.add(t);
                            }
                        }
                        return Ok(Some(t));
                    }
                }
                _ => {
                    let cell_end = (cell + 1) as f64;
                    if brk <= cell_end {
                        if brk > horizon {
                            self.now = horizon;
                            return Ok(None);
                        }
                        self.now = brk;
                        self.last_shot = brk;
                        self.next_shot = None;
                        if let Some(log) = self.shot_log.as_mut() {
                            log.push(brk);
                        }
                        if let Some(exc) = self.excitation.as_mut() {
                            exc.add(brk);
                        }
                    } else {
                        self.now = cell_end;
                    }
                }
            }
        }
    }

    /// Overrides the per-path candidate budget.
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// Keeps a record of the outer shot times (Cox only).
    pub fn with_shot_log(mut self) -> Self {
        self.shot_log = Some(Vec::new());
        self
    }

    pub fn shot_log(&self) -> &[f64] {
        self.shot_log.as_deref().unwrap_or(&[])
    }
}

/// Simulates one path on `(0, horizon]`.
pub fn simulate(model: &ArrivalModel, horizon: f64, stream: &mut PathStream) -> Result<ArrivalPath> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Domain(format!("horizon must be positive and finite, got {horizon}")));
    }
    let mut sampler = ArrivalSampler::new(model);
    let mut times = Vec::new();
    while let Some(t) = sampler.next_arrival(stream, horizon)? {
        times.push(t);
    }
    Ok(ArrivalPath { horizon, times })
}
