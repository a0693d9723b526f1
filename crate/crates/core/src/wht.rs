//! Orthogonal Walsh–Hadamard transform in Sylvester (natural) ordering.
//!
//! The orthogonal Hadamard matrix `H` of order `n = 2^p` has entries
//! `n^{-1/2} · (-1)^{popcount(i & j)}`. It is symmetric and orthogonal, so
//! applying the transform twice returns the input.
//!
//! [`fwht_inplace`] runs the unnormalized butterfly (additions and
//! subtractions only) and scales by `n^{-1/2}` once at the end.
//! [`hadamard_entry`] is the closed-form entry and serves as the dense oracle.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// A valid Walsh–Hadamard order `n = 2^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HadamardDim {
    n: usize,
    p: u32,
}

impl HadamardDim {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        Ok(Self {
            n,
            p: n.trailing_zeros(),
        })
    }

    /// Order `2^p`.
    pub fn from_log2(p: u32) -> Result<Self> {
        1usize
            .checked_shl(p)
            .filter(|_| p < usize::BITS)
            .map(|n| Self { n, p })
            .ok_or_else(|| Error::invalid("p", format!("2^{p} does not fit in usize")))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn log2(&self) -> u32 {
        self.p
    }

    /// The common magnitude `n^{-1/2}` of every entry of `H`.
    #[inline]
    pub fn entry_magnitude(&self) -> f64 {
        (self.n as f64).sqrt().recip()
    }
}

/// Overwrites `x` with `Hx`.
///
/// Runs in `O(n log n)` with the radix-2 butterfly. Errors if `x.len()`
/// does not equal `dim.n()`.
pub fn fwht_inplace(x: &mut [f64], dim: HadamardDim) -> Result<()> {
    if x.len() != dim.n {
        return Err(Error::DimensionMismatch {
            expected: dim.n,
            actual: x.len(),
        });
    }
    butterfly(x);
    let scale = dim.entry_magnitude();
    x.iter_mut().for_each(|v| *v *= scale);
    Ok(())
}

/// Returns `Hx` for a vector whose length must be a power of two.
pub fn fwht(x: &[f64]) -> Result<Vec<f64>> {
    let dim = HadamardDim::new(x.len())?;
    let mut out = x.to_vec();
    fwht_inplace(&mut out, dim)?;
    Ok(out)
}

/// Unnormalized in-place butterfly; `data.len()` must be a power of two.
fn butterfly(data: &mut [f64]) {
    let n = data.len();
    let mut half = 1;
    while half < n {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        half *= 2;
    }
}

/// Entry `(i, j)` of the orthogonal Hadamard matrix, 0-based.
pub fn hadamard_entry(i: usize, j: usize, dim: HadamardDim) -> Result<f64> {
    if i >= dim.n || j >= dim.n {
        return Err(Error::IndexOutOfRange {
            row: i,
            col: j,
            n: dim.n,
        });
    }
    Ok(signed_entry(i, j, dim.entry_magnitude()))
}

#[inline]
pub(crate) fn signed_entry(i: usize, j: usize, magnitude: f64) -> f64 {
    if (i & j).count_ones() % 2 == 0 {
        magnitude
    } else {
        -magnitude
    }
}

/// Dense `n × n` Hadamard matrix assembled from [`hadamard_entry`].
pub fn hadamard_matrix(dim: HadamardDim) -> DenseMatrix {
    let magnitude = dim.entry_magnitude();
    DenseMatrix::from_fn(dim.n, dim.n, |i, j| signed_entry(i, j, magnitude))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn dim(n: usize) -> HadamardDim {
        HadamardDim::new(n).unwrap()
    }

    fn naive(x: &[f64]) -> Vec<f64> {
        let d = dim(x.len());
        (0..x.len())
            .map(|i| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| hadamard_entry(i, j, d).unwrap() * v)
                    .sum()
            })
            .collect()
    }

    #[test]
    fn rejects_non_powers_of_two() {
        assert_eq!(HadamardDim::new(0), Err(Error::NotPowerOfTwo(0)));
        assert_eq!(HadamardDim::new(12), Err(Error::NotPowerOfTwo(12)));
        assert_eq!(dim(1).log2(), 0);
        assert_eq!(dim(4096).log2(), 12);
        assert_eq!(HadamardDim::from_log2(5).unwrap().n(), 32);
    }

    #[test]
    fn first_column_of_order_two() {
        let mut x = [1.0, 0.0];
        fwht_inplace(&mut x, dim(2)).unwrap();
        let r = 0.5f64.sqrt();
        assert_relative_eq!(x[0], r, max_relative = 1e-15);
        assert_relative_eq!(x[1], r, max_relative = 1e-15);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let mut x = vec![0.0; 6];
        assert_eq!(
            fwht_inplace(&mut x, dim(8)),
            Err(Error::DimensionMismatch {
                expected: 8,
                actual: 6
            })
        );
        assert_eq!(fwht(&x), Err(Error::NotPowerOfTwo(6)));
    }

    #[test]
    fn entries() {
        for n in [1, 2, 8, 64] {
            for j in 0..n {
                assert_eq!(hadamard_entry(0, j, dim(n)).unwrap(), (n as f64).sqrt().recip());
            }
        }
        assert_relative_eq!(hadamard_entry(1, 1, dim(2)).unwrap(), -(0.5f64).sqrt());
        assert_relative_eq!(hadamard_entry(5, 3, dim(8)).unwrap(), -(8f64).sqrt().recip());
        assert!(matches!(
            hadamard_entry(8, 0, dim(8)),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn matches_dense_product_at_order_eight() {
        let x = [0.5, -1.25, 3.0, 0.0, 2.0, -0.75, 1.0, 4.5];
        let got = fwht(&x).unwrap();
        for (g, e) in got.iter().zip(naive(&x)) {
            assert_relative_eq!(*g, e, epsilon = 1e-14);
        }
    }

    #[test]
    fn assembled_matrix_is_orthogonal() {
        for p in 1..=8 {
            let h = hadamard_matrix(HadamardDim::from_log2(p).unwrap());
            let hth = h.transpose().matmul(&h).unwrap();
            let err = hth.max_abs_diff(&DenseMatrix::identity(h.rows())).unwrap();
            assert!(err <= 1e-12, "n = {}: {err}", h.rows());
        }
    }

    fn vector_pow2() -> impl Strategy<Value = Vec<f64>> {
        (0u32..=9).prop_flat_map(|p| prop::collection::vec(-10.0f64..10.0, 1usize << p))
    }

    proptest! {
        #[test]
        fn involution(x in vector_pow2()) {
            let twice = fwht(&fwht(&x).unwrap()).unwrap();
            for (a, b) in twice.iter().zip(&x) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn preserves_energy(x in vector_pow2()) {
            let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
            let y = fwht(&x).unwrap();
            prop_assert!((norm(&y) - norm(&x)).abs() <= 1e-10 * norm(&x).max(f64::MIN_POSITIVE));
        }

        #[test]
        fn linear(
            pair in (0u32..=8).prop_flat_map(|p| {
                let n = 1usize << p;
                (prop::collection::vec(-5.0f64..5.0, n), prop::collection::vec(-5.0f64..5.0, n))
            }),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
        ) {
            let (x, y) = pair;
            let combo: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
            let lhs = fwht(&combo).unwrap();
            let (fx, fy) = (fwht(&x).unwrap(), fwht(&y).unwrap());
            let scale = 1.0 + lhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..x.len() {
                prop_assert!((lhs[i] - (a * fx[i] + b * fy[i])).abs() <= 1e-10 * scale);
            }
        }

        #[test]
        fn agrees_with_dense_oracle(x in (0u32..=7).prop_flat_map(|p| prop::collection::vec(-1.0f64..1.0, 1usize << p))) {
            let got = fwht(&x).unwrap();
            let want = naive(&x);
            let norm = want.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            let err = got.iter().zip(&want).map(|(g, w)| (g - w).powi(2)).sum::<f64>().sqrt();
            prop_assert!(err <= 1e-12 * norm);
        }
    }
}
