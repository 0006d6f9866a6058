//! Deterministic reductions and small fitting helpers.
//!
//! Every nonlocal sum in this crate is reduced in a fixed pairwise (binary
//! tree) order whose shape depends only on the index range. Results are
//! therefore bit-stable across runs and across rayon thread counts.

/// Below this length a slice is summed sequentially in index order.
const SEQ_CHUNK: usize = 1024;

/// Tree-ordered sum of a slice.
pub fn tree_sum(xs: &[f64]) -> f64 {
    if xs.len() <= SEQ_CHUNK {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        tree_sum(&xs[..mid]) + tree_sum(&xs[mid..])
    }
}

/// Tree-ordered sum of `f(i)` over `lo..hi`, sequential.
pub fn tree_sum_by<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
    let n = hi - lo;
    if n <= SEQ_CHUNK {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        acc
    } else {
        let mid = lo + n / 2;
        tree_sum_by(lo, mid, f) + tree_sum_by(mid, hi, f)
    }
}

/// Tree-ordered sum of `f(i)` over `0..n`, parallelized with rayon.
///
/// The split points depend only on `n`, so the result is identical to the
/// sequential tree for any thread count.
pub fn par_tree_sum_by<F: Fn(usize) -> f64 + Sync>(n: usize, f: &F) -> f64 {
    fn rec<F: Fn(usize) -> f64 + Sync>(lo: usize, hi: usize, f: &F) -> f64 {
        let n = hi - lo;
        if n <= SEQ_CHUNK {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            acc
        } else {
            let mid = lo + n / 2;
            let (a, b) = rayon::join(|| rec(lo, mid, f), || rec(mid, hi, f));
            a + b
        }
    }
    rec(0, n, f)
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    sxy / sxx
}

/// Slope of `log y` against `log x`; entries with `y <= 0` are rejected.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || y.iter().any(|&v| v <= 0.0) || x.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    Some(ls_slope(&lx, &ly))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_sum_matches_naive() {
        let xs: Vec<f64> = (0..10_000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((tree_sum(&xs) - naive).abs() < 1e-9);
        assert_eq!(tree_sum(&xs), par_tree_sum_by(xs.len(), &|i| xs[i]));
    }

    #[test]
    fn par_sum_is_thread_count_independent() {
        let xs: Vec<f64> = (0..50_000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let a = par_tree_sum_by(xs.len(), &|i| xs[i]);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| par_tree_sum_by(xs.len(), &|i| xs[i]));
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn slope_of_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 4.0, 6.0, 8.0];
        assert!((ls_slope(&x, &y) - 2.0).abs() < 1e-12);
    }
}
