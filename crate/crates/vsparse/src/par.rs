//! Switch between rayon and plain iteration.
//!
//! With the `parallel` feature the helpers fan out over rayon's pool unless
//! [`set_sequential`] has been called. Without the feature they always run
//! on the calling thread. Results come back in input order either way.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Force sequential execution even when the `parallel` feature is on.
pub fn set_sequential(on: bool) {
    FORCE_SEQUENTIAL.store(on, Ordering::SeqCst);
}

/// True when the helpers will use the thread pool.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.load(Ordering::SeqCst)
}

#[cfg(feature = "parallel")]
mod imp {
    use rayon::prelude::*;

    pub fn map<T: Sync, R: Send, F: Fn(&T) -> R + Sync + Send>(items: &[T], f: F) -> Vec<R> {
        if super::is_parallel() {
            items.par_iter().map(f).collect()
        } else {
            items.iter().map(f).collect()
        }
    }

    pub fn map_mut<T: Send, R: Send, F: Fn(&mut T) -> R + Sync + Send>(
        items: &mut [T],
        f: F,
    ) -> Vec<R> {
        if super::is_parallel() {
            items.par_iter_mut().map(f).collect()
        } else {
            items.iter_mut().map(f).collect()
        }
    }

    pub fn map_range<R: Send, F: Fn(usize) -> R + Sync + Send>(n: usize, f: F) -> Vec<R> {
        if super::is_parallel() {
            (0..n).into_par_iter().map(f).collect()
        } else {
            (0..n).map(f).collect()
        }
    }
}

#[cfg(not(feature = "parallel"))]
mod imp {
    pub fn map<T: Sync, R: Send, F: Fn(&T) -> R + Sync + Send>(items: &[T], f: F) -> Vec<R> {
        items.iter().map(f).collect()
    }

    pub fn map_mut<T: Send, R: Send, F: Fn(&mut T) -> R + Sync + Send>(
        items: &mut [T],
        f: F,
    ) -> Vec<R> {
        items.iter_mut().map(f).collect()
    }

    pub fn map_range<R: Send, F: Fn(usize) -> R + Sync + Send>(n: usize, f: F) -> Vec<R> {
        (0..n).map(f).collect()
    }
}

pub use imp::{map, map_mut, map_range};
