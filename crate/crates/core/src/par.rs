//! Index-ordered data-parallel maps.
//!
//! Every parallel loop in the crate goes through these helpers. Results are
//! always collected in index order and reduced sequentially by the caller, so
//! floating-point output does not depend on the worker count. Without the
//! `parallel` feature the same functions run on the calling thread.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `(0..n).map(f)`, possibly across the current thread pool.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Like [`map_indexed`] but with per-worker scratch state built by `init`.
pub fn map_indexed_with<S, T, I, F>(n: usize, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map_init(init, f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut state = init();
        (0..n).map(|i| f(&mut state, i)).collect()
    }
}

/// Run `op` on a dedicated pool of `workers` threads (`None` = global pool).
pub fn with_workers<R, F>(workers: Option<usize>, op: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        match workers {
            Some(w) if w > 0 => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
                Ok(pool) => pool.install(op),
                Err(err) => {
                    log::warn!("could not build a {w}-thread pool ({err}); using the global pool");
                    op()
                }
            },
            _ => op(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        op()
    }
}

/// Number of worker threads the helpers above would use right now.
pub fn current_workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
