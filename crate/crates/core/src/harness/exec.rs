//! Deterministic parallel map-reduce over Monte Carlo paths.
//!
//! Paths are grouped into fixed-size chunks; each chunk is folded sequentially and
//! the chunk accumulators are merged in index order. The result is therefore
//! bit-identical for any worker count.

use rayon::prelude::*;

use super::rng::{PathStream, RngStreamPlan};
use crate::error::{Error, Result};

pub const CHUNK_PATHS: u64 = 1024;

/// Worker count used when the caller passes 0.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

pub fn map_reduce<A, I, S, M>(plan: &RngStreamPlan, n_paths: u64, workers: usize, init: I, step: S, merge: M) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, u64, &mut PathStream) -> Result<()> + Sync,
    M: Fn(&mut A, A),
{
    let chunks = n_paths.div_ceil(CHUNK_PATHS);
    let run_chunk = |c: u64| -> Result<A> {
        let mut acc = init();
        let end = ((c + 1) * CHUNK_PATHS).min(n_paths);
        for path in c * CHUNK_PATHS..end {
            let mut stream = plan.stream_for(path);
            step(&mut acc, path, &mut stream)?;
        }
        Ok(acc)
    };
    let workers = if workers == 0 { default_workers() } else { workers };
    let parts: Vec<A> = if workers <= 1 || chunks <= 1 {
        (0..chunks).map(run_chunk).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
        pool.install(|| (0..chunks).into_par_iter().map(run_chunk).collect::<Result<_>>())?
    };
    let mut total = init();
    for part in parts {
        merge(&mut total, part);
    }
    Ok(total)
}

/// Running sums for a scalar per-path statistic.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: Moments) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            self.sum / self.n as f64
        }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;

    fn run(workers: usize) -> Moments {
        map_reduce(
            &RngStreamPlan::new(11),
            5_000,
            workers,
            Moments::default,
            |m, _, s| {
                m.push(s.claims().random::<f64>());
                Ok(())
            },
            Moments::merge,
        )
        .unwrap()
    }

    #[test]
    fn result_independent_of_worker_count() {
        let a = run(1);
        let b = run(3);
        let c = run(8);
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.n, 5_000);
    }

    #[test]
    fn step_errors_propagate() {
        let r: Result<Moments> = map_reduce(
            &RngStreamPlan::new(1),
            3000,
            2,
            Moments::default,
            |_, p, _| if p == 2500 { Err(Error::Domain("boom".into())) } else { Ok(()) },
            Moments::merge,
        );
        assert!(r.is_err());
    }
}
