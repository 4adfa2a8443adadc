//! Thin shim over rayon so every data-parallel loop in the crate has a
//! sequential fallback (build without the `parallel` feature) and benches can
//! compare both paths on the same kernel.
//!
//! Reductions go through [`tree_sum`], a fixed pairwise tree over an indexed
//! buffer, so parallel and sequential builds produce bit-identical sums.

use num_complex::Complex64;

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn par_map_indexed<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn par_map_indexed<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    seq_map_indexed(n, f)
}

/// Always-sequential variant, kept public for the criterion benches.
pub fn seq_map_indexed<T>(n: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Pairwise tree sum with a deterministic association order.
pub fn tree_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (lo, hi) = values.split_at(n / 2);
            tree_sum(lo) + tree_sum(hi)
        }
    }
}

/// Pairwise tree sum for complex accumulators.
pub fn tree_sum_c(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => values[0],
        n => {
            let (lo, hi) = values.split_at(n / 2);
            tree_sum_c(lo) + tree_sum_c(hi)
        }
    }
}
