//! Execution strategy for the data-parallel loops.
//!
//! With the `parallel` feature the work is split over rayon's current pool;
//! without it every call runs on the calling thread. Both paths visit the same
//! items with the same per-item arithmetic, so results never depend on the
//! schedule.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

// Not derivable: the default variant depends on the feature set.
#[allow(clippy::derivable_impls)]
impl Default for Exec {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Exec::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Every strategy compiled into this build.
    pub fn available() -> &'static [Exec] {
        #[cfg(feature = "parallel")]
        {
            &[Exec::Sequential, Exec::Parallel]
        }
        #[cfg(not(feature = "parallel"))]
        {
            &[Exec::Sequential]
        }
    }

    /// Calls `f(chunk_index, chunk)` for each `chunk_len`-sized piece of `buf`.
    pub fn for_each_chunk_mut<T, F>(self, buf: &mut [T], chunk_len: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Send + Sync,
    {
        if chunk_len == 0 {
            return;
        }
        match self {
            Exec::Sequential => buf.chunks_mut(chunk_len).enumerate().for_each(|(i, c)| f(i, c)),
            #[cfg(feature = "parallel")]
            Exec::Parallel => buf.par_chunks_mut(chunk_len).enumerate().for_each(|(i, c)| f(i, c)),
        }
    }

    /// `(0..n).map(f).collect()`, order preserved.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Send + Sync,
    {
        match self {
            Exec::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
        }
    }
}
