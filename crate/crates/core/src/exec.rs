//! Data-parallel map used by every scan.
//!
//! With the `parallel` feature the map runs on rayon; without it, or inside
//! [`with_workers`] with a single worker, it runs sequentially in the calling
//! thread. Results are always returned in input order, so output does not
//! depend on the worker count.

use std::cell::Cell;

thread_local! {
    static SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Maps `f` over `items`, preserving order.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if !SEQUENTIAL.with(|s| s.get()) {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

/// Runs `op` with `workers` threads. `None` uses the global pool; `Some(1)`
/// forces sequential execution in the calling thread.
pub fn with_workers<R: Send>(workers: Option<usize>, op: impl FnOnce() -> R + Send) -> R {
    match workers {
        Some(1) => {
            let prev = SEQUENTIAL.with(|s| s.replace(true));
            let out = op();
            SEQUENTIAL.with(|s| s.set(prev));
            out
        }
        #[cfg(feature = "parallel")]
        Some(n) if n > 1 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(op),
            Err(_) => op(),
        },
        _ => op(),
    }
}

/// True when scans will actually fan out across threads.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !SEQUENTIAL.with(|s| s.get())
}
