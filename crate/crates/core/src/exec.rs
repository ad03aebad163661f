//! Execution policy shared by every data-parallel loop in the crate.
//!
//! Parallel loops only ever produce index-ordered vectors; reductions are done
//! afterwards in a fixed sequential order, so both modes give bit-identical
//! floating point results.

use std::sync::atomic::{AtomicU8, Ordering};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

static MODE: AtomicU8 = AtomicU8::new(DEFAULT);

#[cfg(feature = "parallel")]
const DEFAULT: u8 = 1;
#[cfg(not(feature = "parallel"))]
const DEFAULT: u8 = 0;

/// Selects the execution mode. Without the `parallel` feature every request
/// degrades to sequential.
pub fn set_execution(mode: Execution) {
    let v = match mode {
        Execution::Parallel if cfg!(feature = "parallel") => 1,
        _ => 0,
    };
    MODE.store(v, Ordering::SeqCst);
    #[cfg(feature = "parallel")]
    faer::set_global_parallelism(if v == 1 {
        faer::Par::rayon(0)
    } else {
        faer::Par::Seq
    });
}

pub fn execution() -> Execution {
    if MODE.load(Ordering::SeqCst) == 1 {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

/// Evaluates `f(0..n)` into an index-ordered vector.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution() == Execution::Parallel && n > 1 {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Maps a slice into an index-ordered vector.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_indexed(items.len(), |i| f(&items[i]))
}

/// Sum of `f(i)` for `i < n`, reduced left to right.
pub fn sum_indexed<T, F>(n: usize, f: F) -> T
where
    T: Send + std::iter::Sum<T>,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed(n, f).into_iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_bitwise() {
        let f = |i: usize| (i as f64 + 0.5).sqrt().sin();
        set_execution(Execution::Sequential);
        let a: f64 = sum_indexed(10_000, f);
        set_execution(Execution::Parallel);
        let b: f64 = sum_indexed(10_000, f);
        set_execution(Execution::Parallel);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn map_keeps_order() {
        let v = map_indexed(1000, |i| i * 3);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 3 * i));
    }
}
