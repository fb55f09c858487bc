//! Episode-level data parallelism.
//!
//! Independent episodes map over a worker pool when the `parallel` feature
//! (default) is enabled, and over a plain iterator otherwise. Every episode
//! draws from its own counter-derived streams and results are collected in
//! index order, so both paths produce bit-identical output. The
//! `ENVSEN_THREADS` environment variable caps the pool size.

#[cfg(feature = "parallel")]
use std::sync::OnceLock;

/// How to map episodes onto workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    /// Worker pool; falls back to sequential without the `parallel` feature.
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        ExecMode::Parallel
    }
}

#[cfg(feature = "parallel")]
fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Ok(raw) = std::env::var("ENVSEN_THREADS") {
            if let Ok(threads) = raw.trim().parse::<usize>() {
                if threads >= 1 {
                    builder = builder.num_threads(threads);
                }
            }
        }
        builder
            .build()
            .expect("failed to build episode worker pool")
    })
}

/// Map `f` over `0..n`, preserving index order in the output.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                pool().install(|| (0..n).into_par_iter().map(f).collect())
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_preserve_order_and_agree() {
        let f = |i: usize| i * i + 1;
        let seq = map_indexed(ExecMode::Sequential, 64, f);
        let par = map_indexed(ExecMode::Parallel, 64, f);
        assert_eq!(seq, par);
        assert_eq!(seq[10], 101);
    }
}
