use alloc::vec::Vec;

/// Runs independent replica computations.
///
/// Implementations may evaluate `f` in any order or on any thread, but must
/// return the results indexed by replica. Every Monte Carlo routine in this
/// crate derives the stream of replica `i` from `i` alone and reduces the
/// returned vector in index order, so results do not depend on the executor.
pub trait Executor {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs replicas one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}
