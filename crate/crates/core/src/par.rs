//! Thread-count-independent parallel reductions.
//!
//! Floating-point sums are not associative, so naive parallel folds change
//! their result with the number of workers. Everything here partitions work
//! into *fixed-size* chunks, computes chunk-local results in parallel, and
//! combines them sequentially in chunk order — bitwise identical output for
//! any pool size, including 1.

use rayon::prelude::*;

/// Chunk length used for point-indexed reductions. Fixed: changing it changes
/// results (harmlessly, but determinism across runs pins it).
pub const CHUNK: usize = 1024;

/// Maps `0..n` in parallel, preserving index order.
pub fn map_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

/// Sum of `term(i)` for `i in 0..n`, accumulated per fixed chunk and then
/// combined in chunk order.
pub fn sum_indexed<F: Fn(usize) -> f64 + Sync + Send>(n: usize, term: F) -> f64 {
    let chunks: Vec<f64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let mut acc = 0.0;
            for i in lo..hi {
                acc += term(i);
            }
            acc
        })
        .collect();
    chunks.iter().sum()
}

/// Vector-valued analogue of [`sum_indexed`]: `term(i, acc)` adds point `i`'s
/// contribution into `acc` (length `dim`).
pub fn sum_indexed_vec<F: Fn(usize, &mut [f64]) + Sync + Send>(n: usize, dim: usize, term: F) -> Vec<f64> {
    let chunks: Vec<Vec<f64>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let mut acc = vec![0.0; dim];
            for i in lo..hi {
                term(i, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; dim];
    for chunk in &chunks {
        for (t, c) in total.iter_mut().zip(chunk) {
            *t += c;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_matches_sequential() {
        let xs: Vec<f64> = (0..5000).map(|i| (i as f64).sin()).collect();
        let seq: f64 = xs
            .chunks(CHUNK)
            .map(|c| c.iter().sum::<f64>())
            .sum();
        let par = sum_indexed(xs.len(), |i| xs[i]);
        assert_eq!(seq, par);
    }

    #[test]
    fn vec_sum_matches_sequential() {
        let n = 3000;
        let got = sum_indexed_vec(n, 2, |i, acc| {
            acc[0] += i as f64;
            acc[1] += 1.0;
        });
        assert_eq!(got[1], n as f64);
        assert_eq!(got[0], (0..n).map(|i| i as f64).sum::<f64>());
    }
}
