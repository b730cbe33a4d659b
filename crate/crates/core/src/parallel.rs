//! Internal work-distribution helpers.
//!
//! Every parallel region in this crate operates on disjoint pieces of data
//! (independent column pairs, independent rows, independent seeds), so the
//! arithmetic performed is identical whether the pieces run on one thread or
//! many. That is the determinism contract: same input, bitwise-identical
//! output, regardless of thread count.
//!
//! With the `parallel` feature (the default) the pieces are distributed over
//! a rayon pool; without it the same closures run in a plain loop. The pool
//! size is capped by [`set_thread_cap`] or the `RADAR_LOWRANK_THREADS`
//! environment variable (0 or unset means "let rayon decide").

use std::sync::atomic::{AtomicUsize, Ordering};

/// Sentinel meaning "cap not yet resolved from the environment".
const UNSET: usize = usize::MAX;

static THREAD_CAP: AtomicUsize = AtomicUsize::new(UNSET);

/// Cap the number of worker threads used by internal parallel regions.
///
/// `None` (or `Some(0)`) restores the default (the `RADAR_LOWRANK_THREADS`
/// environment variable if set, otherwise rayon's heuristic). `Some(1)`
/// forces plain sequential execution. Results never depend on this setting;
/// it only trades wall-clock time.
pub fn set_thread_cap(cap: Option<usize>) {
    let v = match cap {
        Some(0) | None => env_cap(),
        Some(n) => n,
    };
    THREAD_CAP.store(v, Ordering::SeqCst);
    #[cfg(feature = "parallel")]
    imp::invalidate_pool();
}

fn env_cap() -> usize {
    std::env::var("RADAR_LOWRANK_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0)
}

#[cfg(feature = "parallel")]
pub(crate) fn thread_cap() -> usize {
    let cap = THREAD_CAP.load(Ordering::SeqCst);
    if cap != UNSET {
        return cap;
    }
    let resolved = env_cap();
    THREAD_CAP.store(resolved, Ordering::SeqCst);
    resolved
}

#[cfg(feature = "parallel")]
mod imp {
    use super::thread_cap;
    use std::sync::{Arc, Mutex};

    // (cap the pool was built for, pool)
    static POOL: Mutex<Option<(usize, Arc<rayon::ThreadPool>)>> = Mutex::new(None);

    pub(super) fn invalidate_pool() {
        *POOL.lock().unwrap() = None;
    }

    fn pool(cap: usize) -> Arc<rayon::ThreadPool> {
        let mut guard = POOL.lock().unwrap();
        if let Some((built_for, pool)) = guard.as_ref() {
            if *built_for == cap {
                return Arc::clone(pool);
            }
        }
        let pool = Arc::new(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cap)
                .build()
                .expect("failed to build worker pool"),
        );
        *guard = Some((cap, Arc::clone(&pool)));
        pool
    }

    /// Run `f` on every item. Items are disjoint, so execution order is
    /// immaterial to the result.
    pub(crate) fn for_each_mut<T, F>(items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(&mut T) + Sync + Send,
    {
        use rayon::prelude::*;
        let cap = thread_cap();
        if cap == 1 || items.len() <= 1 {
            items.iter_mut().for_each(f);
        } else {
            pool(cap).install(|| items.par_iter_mut().for_each(|t| f(t)));
        }
    }

    /// Map `0..n` through `f`, collecting results in index order.
    pub(crate) fn map_collect<O, F>(n: usize, f: F) -> Vec<O>
    where
        O: Send,
        F: Fn(usize) -> O + Sync + Send,
    {
        use rayon::prelude::*;
        let cap = thread_cap();
        if cap == 1 || n <= 1 {
            (0..n).map(f).collect()
        } else {
            pool(cap).install(|| (0..n).into_par_iter().map(f).collect())
        }
    }
}

#[cfg(not(feature = "parallel"))]
mod imp {
    /// Sequential fallback; identical arithmetic, one thread.
    pub(crate) fn for_each_mut<T, F>(items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(&mut T) + Sync + Send,
    {
        items.iter_mut().for_each(f);
    }

    pub(crate) fn map_collect<O, F>(n: usize, f: F) -> Vec<O>
    where
        O: Send,
        F: Fn(usize) -> O + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

pub(crate) use imp::{for_each_mut, map_collect};
