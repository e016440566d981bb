//! Batch execution over independent work items.
//!
//! Sweeps are embarrassingly parallel over (depth, gap, p, circuit) cells, so
//! the whole concurrency story is one ordered map. With the `parallel`
//! feature (default) the map runs on rayon; without it, everything falls back
//! to a plain sequential loop with identical results — ordering and seeding
//! never depend on the execution strategy.

/// Sequential ordered map (always available; the benchmark baseline).
pub fn map_seq<T: Sync, U: Send, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Rayon-powered ordered map.
#[cfg(feature = "parallel")]
pub fn map_par<T: Sync, U: Send, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Ordered map using the best available strategy.
pub fn map_auto<T: Sync, U: Send, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_par(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_seq(items, f)
    }
}

/// Runs `job` inside a worker pool of the requested size (`None` = the
/// default pool, sized to the available processors). Without the `parallel`
/// feature the job simply runs on the calling thread.
pub fn with_pool<R, F>(workers: Option<usize>, job: F) -> R
where
    F: FnOnce() -> R + Send,
    R: Send,
{
    #[cfg(feature = "parallel")]
    {
        match workers {
            None => job(),
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("building worker pool")
                .install(job),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        job()
    }
}
