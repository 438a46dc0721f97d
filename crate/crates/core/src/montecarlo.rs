//! Deterministic chunked Monte Carlo.
//!
//! Samples are split into fixed-size chunks; each chunk accumulates its own
//! running moments and the chunks are merged in index order. Sample `i` only
//! depends on `(seed, i)`, so the estimate is bit-identical for any number
//! of workers.

use rayon::prelude::*;

pub(crate) const CHUNK: u64 = 1024;

#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * (other.count as f64 / count as f64);
        let m2 = self.m2 + other.m2 + delta * delta * (self.count as f64 * other.count as f64 / count as f64);
        Moments { count, mean, m2 }
    }
}

/// Sample mean and its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Summary {
    pub mean: f64,
    pub stderr: f64,
}

/// Runs `f(i)` for `i in 0..samples` on `workers` threads (0 = rayon default).
pub(crate) fn run_chunked<F>(samples: u64, workers: usize, f: F) -> Summary
where
    F: Fn(u64) -> f64 + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let chunk = |c: u64| {
        let mut m = Moments::default();
        for i in c * CHUNK..((c + 1) * CHUNK).min(samples) {
            m.push(f(i));
        }
        m
    };
    let parts: Vec<Moments> = if workers == 1 {
        (0..chunks).map(chunk).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool");
        pool.install(|| (0..chunks).into_par_iter().map(chunk).collect())
    };
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let stderr =
        if total.count > 1 { (total.m2 / (total.count - 1) as f64).sqrt() / (total.count as f64).sqrt() } else { 0.0 };
    // normalise -0.0 so printed output is stable
    Summary { mean: total.mean + 0.0, stderr }
}

/// Collects `f(i)` for `i in 0..samples` in index order, computed in chunks.
pub(crate) fn collect_chunked<T, F>(samples: u64, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let chunk = |c: u64| (c * CHUNK..((c + 1) * CHUNK).min(samples)).map(&f).collect::<Vec<T>>();
    let parts: Vec<Vec<T>> = if workers == 1 {
        (0..chunks).map(chunk).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool");
        pool.install(|| (0..chunks).into_par_iter().map(chunk).collect())
    };
    parts.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_two_pass() {
        let xs: Vec<f64> = (0..5000).map(|i| ((i * 7919) % 1013) as f64 / 17.0).collect();
        let s = run_chunked(xs.len() as u64, 1, |i| xs[i as usize]);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((s.mean - mean).abs() < 1e-10);
        assert!((s.stderr - (var / n).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let f = |i: u64| ((i as f64) * 0.618).sin();
        let a = run_chunked(10_000, 1, f);
        for w in [2, 3, 8] {
            assert_eq!(run_chunked(10_000, w, f), a);
        }
        assert_eq!(collect_chunked(3000, 4, |i| i), (0..3000).collect::<Vec<_>>());
    }

    #[test]
    fn constant_integrand_has_zero_error() {
        let s = run_chunked(4097, 2, |_| 0.0);
        assert_eq!((s.mean, s.stderr), (0.0, 0.0));
        assert_eq!(run_chunked(1, 1, |_| 2.5).stderr, 0.0);
    }
}
