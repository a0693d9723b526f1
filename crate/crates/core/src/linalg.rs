//! Small dense kernel: row-major matrices, Gram products, a cyclic Jacobi
//! symmetric eigensolver, singular values, and the decimated identity.
//!
//! Sketch widths `k` stay small (at most a few dozen), so singular values are
//! taken as square roots of Gram eigenvalues instead of going through a
//! bidiagonal SVD.

use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::seeding;
use crate::wht::HadamardDim;

/// Row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from its columns, all of which must share one length.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch {
                expected: rows,
                actual: bad.len(),
            });
        }
        Self::new(rows, columns.len(), {
            let mut data = vec![0.0; rows * columns.len()];
            for (j, col) in columns.iter().enumerate() {
                for (i, v) in col.iter().enumerate() {
                    data[i * columns.len() + j] = *v;
                }
            }
            data
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (l, a) in self.row(i).iter().enumerate() {
                if *a == 0.0 {
                    continue;
                }
                for (d, b) in dst.iter_mut().zip(other.row(l)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                actual: other.rows * other.cols,
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs())))
    }

    /// Euclidean norms of the rows.
    pub fn row_norms(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }

    /// Writes the matrix as CSV: a `rows,cols` header, then one line per row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::WriterBuilder::new().flexible(true).from_writer(out);
        let to_err = |e: csv::Error| Error::Csv(e.to_string());
        writer
            .write_record([self.rows.to_string(), self.cols.to_string()])
            .map_err(to_err)?;
        for i in 0..self.rows {
            writer
                .write_record(self.row(i).iter().map(|v| format!("{v:?}")))
                .map_err(to_err)?;
        }
        writer.flush().map_err(|e| Error::Csv(e.to_string()))
    }

    /// Reads the format produced by [`DenseMatrix::write_csv`].
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut records = reader.records();
        let header = records
            .next()
            .ok_or_else(|| Error::Csv("missing `rows,cols` header".into()))?
            .map_err(|e| Error::Csv(e.to_string()))?;
        if header.len() != 2 {
            return Err(Error::Csv(format!("header has {} fields, expected 2", header.len())));
        }
        let parse_dim = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| Error::Csv(format!("bad dimension `{s}`: {e}")))
        };
        let (rows, cols) = (parse_dim(&header[0])?, parse_dim(&header[1])?);
        let mut data = Vec::with_capacity(rows * cols);
        for (line, record) in records.enumerate() {
            let record = record.map_err(|e| Error::Csv(e.to_string()))?;
            if record.len() != cols {
                return Err(Error::Csv(format!(
                    "row {line} has {} fields, expected {cols}",
                    record.len()
                )));
            }
            for field in record.iter() {
                data.push(
                    field
                        .parse::<f64>()
                        .map_err(|e| Error::Csv(format!("bad value `{field}`: {e}")))?,
                );
            }
        }
        if data.len() != rows * cols {
            return Err(Error::Csv(format!(
                "expected {rows} rows, found {}",
                data.len() / cols.max(1)
            )));
        }
        Self::new(rows, cols, data)
    }
}

/// An `n × k` matrix whose columns are orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalColumns(DenseMatrix);

impl OrthonormalColumns {
    /// Tolerance on `max |VᵀV − I|` accepted by [`OrthonormalColumns::new`].
    pub const TOLERANCE: f64 = 1e-10;

    pub fn new(matrix: DenseMatrix) -> Result<Self> {
        let err = orthonormality_error(&matrix);
        if err > Self::TOLERANCE {
            return Err(Error::invalid(
                "matrix",
                format!("columns are not orthonormal (max |VᵀV − I| = {err:e})"),
            ));
        }
        Ok(Self(matrix))
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_inner(self) -> DenseMatrix {
        self.0
    }
}

impl AsRef<DenseMatrix> for OrthonormalColumns {
    fn as_ref(&self) -> &DenseMatrix {
        &self.0
    }
}

/// `max |(AᵀA − I)_{ij}|`.
pub fn orthonormality_error(a: &DenseMatrix) -> f64 {
    let g = gram(a);
    g.max_abs_diff(&DenseMatrix::identity(g.rows()))
        .unwrap_or(f64::INFINITY)
}

/// Singular values sorted in descending order.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `σ₁`, or 0 for an empty spectrum.
    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `σ_k`, or 0 for an empty spectrum.
    pub fn smallest(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `σ_k > 10⁻⁸ · max(σ₁, 1)`.
    pub fn is_full_rank(&self) -> bool {
        self.smallest() > RANK_THRESHOLD * self.largest().max(1.0)
    }
}

/// Relative threshold used by [`SingularSpectrum::is_full_rank`].
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Columns of a QR factorization of an `n × k` standard normal matrix.
pub fn random_orthonormal(n: usize, k: usize, seed: u64) -> Result<OrthonormalColumns> {
    random_orthonormal_with(n, k, &mut seeding::rng_from_seed(seed))
}

/// Like [`random_orthonormal`], drawing from a caller-owned generator.
///
/// Modified Gram–Schmidt with one full reorthogonalization pass.
pub fn random_orthonormal_with<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<OrthonormalColumns> {
    if k == 0 || k > n {
        return Err(Error::invalid("k", format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(k);
    while columns.len() < k {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        for _pass in 0..2 {
            for q in &columns {
                let dot: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= dot * qi);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        // A (measure-zero) dependent draw is simply redrawn.
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            columns.push(v);
        }
    }
    OrthonormalColumns::new(DenseMatrix::from_columns(&columns)?)
}

/// `AᵀA`, symmetrized.
pub fn gram(a: &DenseMatrix) -> DenseMatrix {
    let k = a.cols;
    let mut g = DenseMatrix::zeros(k, k);
    for i in 0..a.rows {
        let row = a.row(i);
        for p in 0..k {
            let rp = row[p];
            if rp == 0.0 {
                continue;
            }
            for q in p..k {
                g.data[p * k + q] += rp * row[q];
            }
        }
    }
    for p in 0..k {
        for q in 0..p {
            g.data[p * k + q] = g.data[q * k + p];
        }
    }
    g
}

/// Maximum number of cyclic Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 30;
/// Convergence threshold on the off-diagonal Frobenius norm, relative to `‖S‖_F`.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
/// Largest asymmetry `|S_ij − S_ji|` accepted, relative to `max(1, ‖S‖_F)`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

/// All eigenvalues of a symmetric matrix, sorted descending.
///
/// Cyclic-by-row Jacobi rotations until the off-diagonal Frobenius norm drops
/// below `1e-12 · ‖S‖_F`.
pub fn symmetric_eigenvalues(s: &DenseMatrix) -> Result<Vec<f64>> {
    let k = s.rows;
    if s.cols != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            actual: s.cols,
        });
    }
    let fro = s.frobenius_norm();
    let mut asym = 0.0f64;
    for i in 0..k {
        for j in 0..i {
            asym = asym.max((s.get(i, j) - s.get(j, i)).abs());
        }
    }
    if asym > SYMMETRY_TOLERANCE * fro.max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }

    let mut a = s.data.clone();
    // Work on the exactly symmetric average.
    for i in 0..k {
        for j in 0..i {
            let m = 0.5 * (a[i * k + j] + a[j * k + i]);
            a[i * k + j] = m;
            a[j * k + i] = m;
        }
    }
    let threshold = JACOBI_TOLERANCE * fro;
    let off_norm = |a: &[f64]| {
        let mut sum = 0.0;
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    sum += a[i * k + j] * a[i * k + j];
                }
            }
        }
        sum.sqrt()
    };

    let mut converged = off_norm(&a) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence(JACOBI_MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..k {
            for q in p + 1..k {
                let apq = a[p * k + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * k + q] - a[p * k + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = (t * t + 1.0).sqrt().recip();
                let sn = t * c;
                for r in 0..k {
                    let (arp, arq) = (a[r * k + p], a[r * k + q]);
                    a[r * k + p] = c * arp - sn * arq;
                    a[r * k + q] = sn * arp + c * arq;
                }
                for r in 0..k {
                    let (apr, aqr) = (a[p * k + r], a[q * k + r]);
                    a[p * k + r] = c * apr - sn * aqr;
                    a[q * k + r] = sn * apr + c * aqr;
                }
                a[p * k + q] = 0.0;
                a[q * k + p] = 0.0;
            }
        }
        converged = off_norm(&a) <= threshold;
    }

    let mut eig: Vec<f64> = (0..k).map(|i| a[i * k + i]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

/// Orthogonality threshold for one-sided Jacobi: a column pair is left alone
/// once `|a_p·a_q| ≤ 1e-15 · ‖a_p‖‖a_q‖`, or when either column has norm
/// below `ε·‖A‖_F`.
pub const ONE_SIDED_TOLERANCE: f64 = 1e-15;

/// Singular values of a tall (`m ≥ k`) matrix, sorted descending.
///
/// One-sided (Hestenes) Jacobi on the columns of `A`. Working on `A` rather
/// than `AᵀA` keeps the absolute error near `ε·σ₁` instead of `√ε·σ₁`, which
/// matters when deciding whether a sketch lost rank.
pub fn singular_values(a: &DenseMatrix) -> Result<SingularSpectrum> {
    if a.rows < a.cols {
        return Err(Error::invalid(
            "matrix",
            format!("need rows >= cols, got {}x{}", a.rows, a.cols),
        ));
    }
    if a.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (m, k) = (a.rows, a.cols);
    let mut cols: Vec<Vec<f64>> = (0..k).map(|j| a.column(j)).collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(u, v)| u * v).sum::<f64>();
    // Columns below this squared norm are rounding residue of ‖A‖_F.
    let negligible = (f64::EPSILON * a.frobenius_norm()).powi(2);

    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if alpha <= negligible
                    || beta <= negligible
                    || gamma.abs() <= ONE_SIDED_TOLERANCE * (alpha * beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let c = (t * t + 1.0).sqrt().recip();
                let sn = c * t;
                let (left, right) = cols.split_at_mut(q);
                let (cp, cq) = (&mut left[p], &mut right[0]);
                for r in 0..m {
                    let (x, y) = (cp[r], cq[r]);
                    cp[r] = c * x - sn * y;
                    cq[r] = sn * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence(JACOBI_MAX_SWEEPS));
        }
    }

    let mut values: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(SingularSpectrum { values })
}

/// All `k` singular values of an `m × k` matrix of any shape; when `m < k`
/// the `k − m` structurally zero values are appended.
pub fn column_singular_values(a: &DenseMatrix) -> Result<SingularSpectrum> {
    if a.rows >= a.cols {
        return singular_values(a);
    }
    let mut values = singular_values(&a.transpose())?.values;
    values.resize(a.cols, 0.0);
    Ok(SingularSpectrum { values })
}

/// The `k² × k` regular decimation of the identity: 0-based row `c·k` holds a
/// unit entry in column `c`, every other row is zero.
pub fn decimated_identity(k: usize) -> Result<OrthonormalColumns> {
    HadamardDim::new(k)?;
    let n = k.checked_mul(k).ok_or_else(|| Error::invalid("k", "k² overflows"))?;
    HadamardDim::new(n)?;
    let mut w = DenseMatrix::zeros(n, k);
    for c in 0..k {
        w.set(c * k, c, 1.0);
    }
    Ok(OrthonormalColumns(w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wht::{fwht_inplace, hadamard_matrix};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    /// Characteristic polynomial of a small symmetric matrix via Faddeev–LeVerrier.
    /// Returns monic coefficients `[1, c1, ..., ck]` of `det(λI − S)`.
    fn char_poly(s: &DenseMatrix) -> Vec<f64> {
        let k = s.rows();
        let mut coeffs = vec![1.0];
        let mut m = DenseMatrix::zeros(k, k);
        for step in 1..=k {
            // M_step = S·M_{step-1} + c_{step-1} I
            let mut next = s.matmul(&m).unwrap();
            let c_prev = *coeffs.last().unwrap();
            for i in 0..k {
                next.set(i, i, next.get(i, i) + c_prev);
            }
            let c = -s.matmul(&next).unwrap().trace() / step as f64;
            coeffs.push(c);
            m = next;
        }
        coeffs
    }

    fn eval_poly(c: &[f64], x: f64) -> f64 {
        c.iter().fold(0.0, |acc, v| acc * x + v)
    }

    /// Roots of a polynomial with only real roots, by sign-change bisection on
    /// a fine grid inside the Gershgorin interval.
    fn bisection_roots(s: &DenseMatrix) -> Vec<f64> {
        let c = char_poly(s);
        let bound = (0..s.rows())
            .map(|i| s.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
            + 1.0;
        let steps = 200_000;
        let mut roots = Vec::new();
        let h = 2.0 * bound / steps as f64;
        let mut x0 = -bound;
        let mut f0 = eval_poly(&c, x0);
        for i in 1..=steps {
            let x1 = -bound + i as f64 * h;
            let f1 = eval_poly(&c, x1);
            if f0 == 0.0 {
                roots.push(x0);
            } else if f0 * f1 < 0.0 {
                let (mut lo, mut hi) = (x0, x1);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if eval_poly(&c, lo) * eval_poly(&c, mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            x0 = x1;
            f0 = f1;
        }
        roots.sort_by(|a, b| b.total_cmp(a));
        roots
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = seeding::rng_from_seed(seed);
        DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
    }

    fn random_symmetric(k: usize, seed: u64) -> DenseMatrix {
        let a = random_matrix(k, k, seed);
        DenseMatrix::from_fn(k, k, |i, j| 0.5 * (a.get(i, j) + a.get(j, i)))
    }

    #[test]
    fn constructor_checks() {
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert_eq!(DenseMatrix::new(1, 1, vec![f64::NAN]), Err(Error::NonFinite));
        assert!(DenseMatrix::from_columns(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        let m = DenseMatrix::from_columns(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.data(), &[1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn random_orthonormal_square_is_orthogonal() {
        let v = random_orthonormal(4, 4, 11).unwrap().into_inner();
        let i4 = DenseMatrix::identity(4);
        assert!(v.transpose().matmul(&v).unwrap().max_abs_diff(&i4).unwrap() <= 1e-10);
        assert!(v.matmul(&v.transpose()).unwrap().max_abs_diff(&i4).unwrap() <= 1e-10);
    }

    #[test]
    fn random_orthonormal_unit_columns_and_seed_sensitivity() {
        let v1 = random_orthonormal(16, 4, 1).unwrap().into_inner();
        for j in 0..4 {
            let norm = v1.column(j).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() <= 1e-12);
        }
        let v2 = random_orthonormal(16, 4, 2).unwrap().into_inner();
        let diff = DenseMatrix::new(
            16,
            4,
            v1.data().iter().zip(v2.data()).map(|(a, b)| a - b).collect(),
        )
        .unwrap();
        assert!(diff.frobenius_norm() > 1e-3);
        assert_eq!(v1, random_orthonormal(16, 4, 1).unwrap().into_inner());
        assert!(random_orthonormal(3, 4, 0).is_err());
    }

    #[test]
    fn gram_examples() {
        assert_eq!(gram(&DenseMatrix::identity(3)), DenseMatrix::identity(3));
        let col = DenseMatrix::new(2, 1, vec![3.0, 4.0]).unwrap();
        assert_eq!(gram(&col).data(), &[25.0]);

        let a = random_matrix(5, 2, 3);
        let g = gram(&a);
        for p in 0..2 {
            for q in 0..2 {
                let mut naive = 0.0;
                for i in 0..5 {
                    naive += a.get(i, p) * a.get(i, q);
                }
                assert_relative_eq!(g.get(p, q), naive, epsilon = 1e-14);
            }
        }
        assert_eq!(g.get(0, 1), g.get(1, 0));
    }

    #[test]
    fn eigenvalue_examples() {
        let d = DenseMatrix::from_fn(3, 3, |i, j| if i == j { [2.0, 5.0, -1.0][i] } else { 0.0 });
        assert_eq!(symmetric_eigenvalues(&d).unwrap(), vec![5.0, 2.0, -1.0]);

        let s = DenseMatrix::new(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let e = symmetric_eigenvalues(&s).unwrap();
        assert_relative_eq!(e[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(e[1], 1.0, epsilon = 1e-14);

        assert!(symmetric_eigenvalues(&DenseMatrix::zeros(3, 3))
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn eigenvalues_match_characteristic_polynomial_roots() {
        for seed in 0..5 {
            let s = random_symmetric(4, 100 + seed);
            let jac = symmetric_eigenvalues(&s).unwrap();
            let roots = bisection_roots(&s);
            assert_eq!(roots.len(), 4, "seed {seed}: {roots:?}");
            for (a, b) in jac.iter().zip(&roots) {
                assert!((a - b).abs() <= 1e-8, "seed {seed}: {jac:?} vs {roots:?}");
            }
        }
    }

    #[test]
    fn eigen_rejects_asymmetric_input() {
        let s = DenseMatrix::new(2, 2, vec![1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(symmetric_eigenvalues(&s), Err(Error::NotSymmetric(_))));
        assert!(symmetric_eigenvalues(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn singular_value_examples() {
        let sv = singular_values(&DenseMatrix::identity(5)).unwrap();
        assert!(sv.values().iter().all(|s| (s - 1.0).abs() < 1e-15));

        let d = DenseMatrix::new(2, 2, vec![3.0, 0.0, 0.0, 4.0]).unwrap();
        assert_eq!(singular_values(&d).unwrap().values(), &[4.0, 3.0]);

        assert!(singular_values(&DenseMatrix::zeros(2, 3)).is_err());

        let wide = DenseMatrix::new(1, 2, vec![3.0, 4.0]).unwrap();
        let sv = column_singular_values(&wide).unwrap();
        assert_eq!(sv.values().len(), 2);
        assert!((sv.largest() - 5.0).abs() < 1e-14);
        assert_eq!(sv.smallest(), 0.0);
        assert!(!sv.is_full_rank());
    }

    #[test]
    fn rank_loss_is_resolved_far_below_threshold() {
        // Sampled rows of H D W fall into classes ⌊r/k⌋; the sketch has full
        // column rank exactly when every class is hit.
        let k = 16;
        let w = decimated_identity(k).unwrap();
        let (mut worst_deficient, mut best_full) = (0.0f64, f64::INFINITY);
        for seed in 0..300u64 {
            let phi = crate::srht::draw_srht(k * k, 40, seed).unwrap();
            let x = phi.apply_to_matrix(w.matrix()).unwrap();
            let classes: std::collections::BTreeSet<usize> =
                phi.samples().indices().iter().map(|i| i / k).collect();
            let sv = column_singular_values(&x).unwrap();
            assert_eq!(sv.is_full_rank(), classes.len() == k, "seed {seed}");
            if classes.len() == k {
                best_full = best_full.min(sv.smallest());
            } else {
                worst_deficient = worst_deficient.max(sv.smallest());
            }
        }
        assert!(worst_deficient < 1e-13, "{worst_deficient:e}");
        assert!(best_full > 0.1, "{best_full:e}");
    }

    #[test]
    fn singular_values_match_polynomial_oracle() {
        for seed in 0..4 {
            let a = random_matrix(6, 3, 40 + seed);
            let sv = singular_values(&a).unwrap();
            let roots = bisection_roots(&gram(&a));
            for (s, l) in sv.values().iter().zip(&roots) {
                assert!((s - l.max(0.0).sqrt()).abs() <= 1e-7);
            }
        }
    }

    #[test]
    fn decimated_identity_structure() {
        let w = decimated_identity(2).unwrap().into_inner();
        assert_eq!(w.data(), &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(decimated_identity(3), Err(Error::NotPowerOfTwo(3))));

        let w8 = decimated_identity(8).unwrap().into_inner();
        assert_eq!(gram(&w8), DenseMatrix::identity(8));
    }

    #[test]
    fn decimated_identity_rows_fall_into_parallel_classes() {
        // Dense HDW at k = 4, n = 16, with arbitrary signs.
        let k = 4;
        let n = k * k;
        let dim = HadamardDim::new(n).unwrap();
        let signs: Vec<f64> = (0..n).map(|i| if (i * 7 + 3) % 5 < 2 { -1.0 } else { 1.0 }).collect();
        let w = decimated_identity(k).unwrap().into_inner();
        let dw = DenseMatrix::from_fn(n, k, |i, j| signs[i] * w.get(i, j));
        let hdw = hadamard_matrix(dim).matmul(&dw).unwrap();

        let dot = |a: usize, b: usize| -> f64 { hdw.row(a).iter().zip(hdw.row(b)).map(|(x, y)| x * y).sum() };
        for r in 0..n {
            for s in 0..n {
                let d = dot(r, s);
                let norms = dot(r, r).sqrt() * dot(s, s).sqrt();
                if r / k == s / k {
                    assert!((d.abs() - norms).abs() <= 1e-12, "rows {r},{s} not parallel");
                } else {
                    assert!(d.abs() <= 1e-12, "rows {r},{s} not orthogonal");
                }
            }
        }

        // Same thing through the fast transform.
        for j in 0..k {
            let mut col: Vec<f64> = (0..n).map(|i| signs[i] * w.get(i, j)).collect();
            fwht_inplace(&mut col, dim).unwrap();
            for i in 0..n {
                assert!((col[i] - hdw.get(i, j)).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let m = random_matrix(3, 2, 9);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("3,2\n"));
        assert_eq!(DenseMatrix::read_csv(buf.as_slice()).unwrap(), m);

        assert!(DenseMatrix::read_csv("2,2\n1,2\n3\n".as_bytes()).is_err());
        assert!(DenseMatrix::read_csv("2,2\n1,2\n".as_bytes()).is_err());
        assert!(DenseMatrix::read_csv("".as_bytes()).is_err());
        assert!(DenseMatrix::read_csv("1,1\nx\n".as_bytes()).is_err());
    }

    fn rotation(k: usize, seed: u64) -> DenseMatrix {
        random_orthonormal(k, k, seed).unwrap().into_inner()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn similarity_invariance(seed in any::<u64>(), k in 1usize..8) {
            let s = random_symmetric(k, seed);
            let p = rotation(k, seed ^ 0xABCD);
            let similar = p.transpose().matmul(&s).unwrap().matmul(&p).unwrap();
            let similar = DenseMatrix::from_fn(k, k, |i, j| 0.5 * (similar.get(i, j) + similar.get(j, i)));
            let (e1, e2) = (symmetric_eigenvalues(&s).unwrap(), symmetric_eigenvalues(&similar).unwrap());
            for (a, b) in e1.iter().zip(&e2) {
                prop_assert!((a - b).abs() <= 1e-8);
            }
        }

        #[test]
        fn eigenvalues_sum_to_trace(seed in any::<u64>(), k in 1usize..12) {
            let s = random_symmetric(k, seed);
            let sum: f64 = symmetric_eigenvalues(&s).unwrap().iter().sum();
            prop_assert!((sum - s.trace()).abs() <= 1e-8 * s.frobenius_norm().max(1.0));
        }

        #[test]
        fn trace_sandwich(seed in any::<u64>(), m in 1usize..10, extra in 0usize..5) {
            let a = random_matrix(m + extra, m, seed);
            let s1 = singular_values(&a).unwrap().largest();
            let tr = gram(&a).trace();
            prop_assert!(s1 * s1 <= tr * (1.0 + 1e-12));
            prop_assert!(tr <= m as f64 * s1 * s1 * (1.0 + 1e-12));
        }

        #[test]
        fn spectrum_sorted(seed in any::<u64>(), k in 1usize..6) {
            let sv = singular_values(&random_matrix(k + 3, k, seed)).unwrap();
            prop_assert!(sv.values().windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(sv.smallest() >= 0.0);
        }
    }
}
