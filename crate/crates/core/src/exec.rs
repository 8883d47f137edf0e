//! Work distribution for data-parallel sweeps.
//!
//! Every sweep in this crate maps a pure function over an ordered list of work
//! items and then reduces the results in input order, so the output does not
//! depend on how an [`Executor`] schedules the map.

use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Applies `f` to every item, returning results in item order.
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send;
}

/// Runs everything on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        items.iter().map(f).collect()
    }
}
