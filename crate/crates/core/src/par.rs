//! Order-preserving parallel map, sequential without the `parallel` feature.

#[cfg(feature = "parallel")]
pub(crate) fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(usize, &T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(usize, &T) -> R + Sync + Send) -> Vec<R> {
    items.iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

pub(crate) fn map_range<R: Send>(n: usize, f: impl Fn(usize) -> R + Sync + Send) -> Vec<R> {
    let idx: Vec<usize> = (0..n).collect();
    map(&idx, |_, &i| f(i))
}

/// Wall-clock stopwatch that is only read when enabled, so disabled
/// stopwatches work on targets without a clock.
#[derive(Debug, Clone, Copy)]
pub struct Stopwatch(Option<std::time::Instant>);

impl Stopwatch {
    pub fn start(enabled: bool) -> Self {
        Self(enabled.then(std::time::Instant::now))
    }

    pub fn elapsed_ms(&self) -> f64 {
        self.0.map_or(0.0, |t| t.elapsed().as_secs_f64() * 1000.0)
    }

    pub fn exceeded(&self, limit_ms: Option<u64>) -> bool {
        match (self.0, limit_ms) {
            (Some(t), Some(ms)) => t.elapsed().as_millis() >= u128::from(ms),
            _ => false,
        }
    }
}
