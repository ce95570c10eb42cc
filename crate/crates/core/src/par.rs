//! Data-parallel helpers.
//!
//! Every parallel map here returns results in input order, so tables and
//! reductions are identical whichever policy runs them. Without the
//! `parallel` feature, [`Parallelism::Parallel`] degrades to a plain loop.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    /// True when work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }
}

/// Ordered map over a slice.
pub fn map<T, R, F>(policy: Parallelism, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if policy.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = policy;
    items.iter().map(f).collect()
}

/// Ordered map over `0..n`.
pub fn map_range<R, F>(policy: Parallelism, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if policy.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = policy;
    (0..n).map(f).collect()
}

/// Fills `out[i] = f(i)` chunk-wise.
pub fn fill<F>(policy: Parallelism, out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if policy.is_parallel() && out.len() >= 4096 {
        use rayon::prelude::*;
        out.par_iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
        return;
    }
    let _ = policy;
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = map(Parallelism::Sequential, &xs, |x| x * x + 1);
        let b = map(Parallelism::Parallel, &xs, |x| x * x + 1);
        assert_eq!(a, b);
        let c = map_range(Parallelism::Parallel, 1000, |i| (i as f64).sqrt());
        let d = map_range(Parallelism::Sequential, 1000, |i| (i as f64).sqrt());
        assert_eq!(c, d);
        let mut e = vec![0.0; 5000];
        let mut g = vec![0.0; 5000];
        fill(Parallelism::Parallel, &mut e, |i| i as f64 * 0.5);
        fill(Parallelism::Sequential, &mut g, |i| i as f64 * 0.5);
        assert_eq!(e, g);
    }
}
