//! Data-parallel iteration helpers with a sequential fallback.
//!
//! Every batch loop in this crate (fitness terms, simplex seeding, trial
//! sweeps) goes through these functions. With the default `parallel`
//! feature they dispatch to rayon; built with `--no-default-features`
//! the same code runs on plain iterators, which keeps single-threaded
//! builds dependency-free and makes the two modes directly comparable
//! in the bench suite.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over a slice and collects the results in input order.
#[cfg(feature = "parallel")]
pub fn map_collect<I, R, F>(items: &[I], f: F) -> Vec<R>
where
    I: Sync,
    R: Send,
    F: Fn(&I) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Maps `f` over a slice and collects the results in input order.
#[cfg(not(feature = "parallel"))]
pub fn map_collect<I, R, F>(items: &[I], f: F) -> Vec<R>
where
    F: Fn(&I) -> R,
{
    items.iter().map(f).collect()
}

/// Maps `f` over `0..n` and collects the results in index order.
#[cfg(feature = "parallel")]
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..n` and collects the results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    F: Fn(usize) -> R,
{
    (0..n).map(f).collect()
}

/// True when this build dispatches batch loops to rayon.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_collect_preserves_order() {
        let items: Vec<usize> = (0..100).collect();
        let doubled = map_collect(&items, |&x| 2 * x);
        assert_eq!(doubled, (0..100).map(|x| 2 * x).collect::<Vec<_>>());
    }

    #[test]
    fn map_range_preserves_order() {
        assert_eq!(map_range(5, |i| i * i), vec![0, 1, 4, 9, 16]);
    }
}
