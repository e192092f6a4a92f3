//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) and [`Exec::Parallel`], maps and
//! sums run on the rayon pool. Without the feature every call is sequential.
//! Results are gathered in input order either way, and exact sums do not
//! depend on evaluation order.

use crate::rational::ExactRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether work actually fans out in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Below this many items a sum is not worth splitting.
#[cfg(feature = "parallel")]
pub(crate) const PAR_THRESHOLD: usize = 16;

pub fn map_collect<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

pub fn sum<T, F>(exec: Exec, items: &[T], f: F) -> ExactRational
where
    T: Sync,
    F: Fn(&T) -> ExactRational + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && items.len() >= PAR_THRESHOLD {
        use rayon::prelude::*;
        return items
            .par_iter()
            .map(f)
            .reduce(ExactRational::zero, |a, b| a + b);
    }
    let _ = exec;
    items.iter().map(f).sum()
}

/// Runs `a` and `b`, possibly concurrently.
pub fn join<A, B, RA, RB>(exec: Exec, a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return rayon::join(a, b);
    }
    let _ = exec;
    (a(), b())
}
