//! One-dimensional search: golden section, bracket expansion, safeguarded Newton.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Minimum of a unimodal function on `[lo, hi]` to an absolute x-tolerance.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        if x1 == x2 {
            break;
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Finds `lo < hi` with `g(lo) < 0 <= g(hi)` for a non-decreasing `g`, by doubling
/// steps outward from `start`.
pub fn bracket_increasing<G: Fn(f64) -> f64>(g: G, start: f64, step: f64, max_doublings: usize) -> Result<(f64, f64)> {
    let mut lo = start - step;
    let mut hi = start + step;
    let mut width = step;
    for _ in 0..max_doublings {
        let glo = g(lo);
        let ghi = g(hi);
        if glo < 0.0 && ghi >= 0.0 {
            return Ok((lo, hi));
        }
        width *= 2.0;
        if glo >= 0.0 {
            hi = lo;
            lo -= width;
        } else {
            lo = hi;
            hi += width;
        }
    }
    Err(Error::Numeric("failed to bracket root".into()))
}

/// Root of a non-decreasing `g` inside `[lo, hi]` by Newton steps that fall back
/// to bisection whenever they leave the bracket.
pub fn newton_bisect<G, D>(g: G, dg: D, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = dg(x);
        let mut next = if d > 0.0 && d.is_finite() { x - gx / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let tol = rel_tol * next.abs().max(1.0);
        if (next - x).abs() <= tol || hi - lo <= tol {
            return next;
        }
        x = next;
    }
    x
}
