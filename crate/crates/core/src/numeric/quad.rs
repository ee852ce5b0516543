//! Adaptive Gauss–Kronrod (7/15) quadrature with a global error heap.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-300, rel_tol: 1e-10, max_evals: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Segment { a, b, value, error }
}

/// Integrates `f` over the union of consecutive intervals given by `breaks`.
pub fn integrate_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], opts: QuadOptions) -> Result<QuadResult> {
    if breaks.len() < 2 {
        return Ok(QuadResult { value: 0.0, error: 0.0, evals: 0 });
    }
    let mut heap = BinaryHeap::new();
    let mut evals = 0usize;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(gk15(&f, w[0], w[1]));
            evals += 15;
        }
    }
    loop {
        let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        if !value.is_finite() {
            return Err(Error::Numeric("non-finite integrand".into()));
        }
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok(QuadResult { value, error, evals });
        }
        if evals + 30 > opts.max_evals {
            return Err(Error::Numeric(format!("quadrature did not converge within {} evaluations (error {error:e})", opts.max_evals)));
        }
        let Some(worst) = heap.pop() else {
            return Ok(QuadResult { value, error, evals });
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision; accept as is
            heap.push(Segment { error: 0.0, ..worst });
            continue;
        }
        heap.push(gk15(&f, worst.a, mid));
        heap.push(gk15(&f, mid, worst.b));
        evals += 30;
    }
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    integrate_breaks(f, &[a, b], opts)
}

/// Integrates `f` over `[a, ∞)`, splitting at `split` when it lies above `a`.
///
/// The unbounded piece is mapped onto `[0, 1)` through `y = c + s·t/(1−t)`
/// where `s` is a length scale of order `c`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, split: f64, opts: QuadOptions) -> Result<QuadResult> {
    let c = a.max(split);
    let head = if c > a { integrate(&f, a, c, opts)? } else { QuadResult { value: 0.0, error: 0.0, evals: 0 } };
    let s = c.abs().max(split.abs()).max(1.0);
    let mapped = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - t;
        let y = c + s * t / one_minus;
        let v = f(y) * s / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let tail = integrate_breaks(mapped, &[0.0, 0.5, 1.0], opts)?;
    Ok(QuadResult { value: head.value + tail.value, error: head.error + tail.error, evals: head.evals + tail.evals })
}
