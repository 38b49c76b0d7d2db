//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper returns results in input order and produces the same bits
//! in both modes, so switching [`Execution`] never changes an output.
//! Without the `parallel` feature, [`Execution::Parallel`] silently runs
//! sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

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

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Order-preserving map over a slice.
pub fn map<T, U, F>(exec: Execution, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Order-preserving map over `0..len`.
pub fn map_range<U, F>(exec: Execution, len: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

const LEAF: usize = 16;
#[cfg(feature = "parallel")]
const SPLIT_PARALLEL: usize = 1 << 12;

/// Sums `values` over a fixed binary tree (midpoint splits, leaves of at
/// most 16 summed left to right). The tree depends only on the length, so
/// the result is identical whether the halves run in parallel or not.
pub fn pairwise_sum(exec: Execution, values: &[f64]) -> f64 {
    if values.len() <= LEAF {
        return values.iter().fold(0.0, |acc, v| acc + v);
    }
    let (left, right) = values.split_at(values.len() / 2);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && values.len() >= SPLIT_PARALLEL {
        let (l, r) = rayon::join(|| pairwise_sum(exec, left), || pairwise_sum(exec, right));
        return l + r;
    }
    pairwise_sum(exec, left) + pairwise_sum(exec, right)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_is_mode_independent() {
        let values: Vec<f64> = (0..10_000)
            .map(|i| ((i * 7919) % 1000) as f64 * 1e-3 - 0.37)
            .collect();
        let seq = pairwise_sum(Execution::Sequential, &values);
        let par = pairwise_sum(Execution::Parallel, &values);
        assert_eq!(seq.to_bits(), par.to_bits());
        let naive: f64 = values.iter().sum();
        assert!((seq - naive).abs() < 1e-9);
    }

    #[test]
    fn small_and_empty_sums() {
        assert_eq!(pairwise_sum(Execution::Sequential, &[]), 0.0);
        assert_eq!(pairwise_sum(Execution::Sequential, &[0.25, 0.5]), 0.75);
    }

    #[test]
    fn map_keeps_order() {
        let out = map(Execution::Parallel, &[3, 1, 2], |x| x * 10);
        assert_eq!(out, vec![30, 10, 20]);
        assert_eq!(
            map_range(Execution::Parallel, 4, |i| i * i),
            vec![0, 1, 4, 9]
        );
    }
}
