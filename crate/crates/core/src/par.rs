//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] fans
//! work out over rayon's pool. Without it, both variants run sequentially.
//! Every helper returns results in input order so enumerations stay
//! deterministic regardless of scheduling.

use std::sync::atomic::{AtomicUsize, Ordering};

/// Default cap on the number of elements of any finite group we enumerate.
pub const DEFAULT_GROUP_LIMIT: usize = 100_000;

static GROUP_LIMIT: AtomicUsize = AtomicUsize::new(DEFAULT_GROUP_LIMIT);

/// Current group-size cap.
pub fn group_limit() -> usize {
    GROUP_LIMIT.load(Ordering::Relaxed)
}

/// Sets the process-wide group-size cap.
pub fn set_group_limit(limit: usize) {
    GROUP_LIMIT.store(limit.max(1), Ordering::Relaxed);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// `items.map(f)` in input order.
pub fn map<T, R, F>(exec: Execution, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Send + Sync,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.into_par_iter().map(f).collect()
        }
        _ => items.into_iter().map(f).collect(),
    }
}

/// `items.flat_map(f)` in input order.
pub fn flat_map<T, R, F>(exec: Execution, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> Vec<R> + Send + Sync,
{
    map(exec, items, f).into_iter().flatten().collect()
}

/// First `Some` in input order.
pub fn find_map_first<T, R, F>(exec: Execution, items: Vec<T>, f: F) -> Option<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> Option<R> + Send + Sync,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.into_par_iter().find_map_first(f)
        }
        _ => items.into_iter().find_map(f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let xs: Vec<u32> = (0..1000).collect();
        let seq = map(Execution::Sequential, xs.clone(), |x| x * 3);
        let par = map(Execution::Parallel, xs, |x| x * 3);
        assert_eq!(seq, par);
    }

    #[test]
    fn find_first_matches_sequential() {
        let xs: Vec<u32> = (0..500).collect();
        let f = |x: u32| (x % 37 == 36).then_some(x);
        assert_eq!(find_map_first(Execution::Parallel, xs.clone(), f), Some(36));
        assert_eq!(find_map_first(Execution::Sequential, xs, f), Some(36));
    }
}
