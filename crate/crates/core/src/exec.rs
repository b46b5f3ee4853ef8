//! Pluggable execution of independent work items.

use alloc::vec::Vec;

/// Evaluates `f(0), …, f(n - 1)` and returns the results in index order.
///
/// Implementations may run the calls concurrently; callers only hand over
/// work whose results do not depend on evaluation order.
pub trait Executor {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs everything on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
