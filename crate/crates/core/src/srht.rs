//! The subsampled randomized Hadamard transform `Φ = √(n/ℓ) · R H D`.
//!
//! * `D` is a diagonal of independent random signs ([`SignVector`]).
//! * `H` is the orthogonal Walsh–Hadamard matrix of order `n = 2^p`.
//! * `R` keeps `ℓ` coordinates chosen uniformly without replacement
//!   ([`SampleSet`]).
//!
//! An [`SrhtOperator`] stores only the signs and the sample set and applies
//! `Φ` in `O(n log n)` time per vector. [`SrhtOperator::materialize`] builds the
//! explicit `ℓ × n` matrix for cross-checking.
//!
//! Given `(n, ℓ, seed)`, [`draw_srht`] seeds a ChaCha8 generator, draws the
//! `n` signs first (one 64-bit output each, top bit decides the sign), then
//! runs a partial Fisher–Yates shuffle to pick the sample set.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::seeding;
use crate::wht::{fwht_inplace, signed_entry, HadamardDim};

/// Default cap on `n` for [`SrhtOperator::materialize`].
pub const DEFAULT_MATERIALIZE_CAP: usize = 4096;

/// Diagonal of Rademacher signs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if entries.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::invalid("signs", "entries must be +1 or -1"));
        }
        Ok(Self(entries))
    }

    pub fn all_plus(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Draws `n` independent uniform signs, one generator output per entry.
    pub fn draw<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self(
            (0..n)
                .map(|_| if rng.next_u64() >> 63 == 0 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    #[inline]
    pub fn sign(&self, j: usize) -> f64 {
        f64::from(self.0[j])
    }

    /// `x ← Dx`.
    pub fn apply_inplace(&self, x: &mut [f64]) {
        for (v, s) in x.iter_mut().zip(&self.0) {
            if *s < 0 {
                *v = -*v;
            }
        }
    }

    /// `x ← HDx`, the flattening step of the transform.
    pub fn flatten_inplace(&self, x: &mut [f64], dim: HadamardDim) -> Result<()> {
        if self.len() != dim.n() {
            return Err(Error::DimensionMismatch {
                expected: dim.n(),
                actual: self.len(),
            });
        }
        if x.len() != dim.n() {
            return Err(Error::DimensionMismatch {
                expected: dim.n(),
                actual: x.len(),
            });
        }
        self.apply_inplace(x);
        fwht_inplace(x, dim)
    }
}

/// A sorted set of `ℓ` distinct coordinates out of `n`; the restriction `R_T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    indices: Vec<usize>,
    n: usize,
}

impl SampleSet {
    /// Validates and sorts `indices`.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.is_empty() || indices.len() > n {
            return Err(Error::SampleCountOutOfRange {
                ell: indices.len(),
                n,
            });
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("indices", "sample indices must be distinct"));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::invalid(
                    "indices",
                    format!("index {last} out of range for n = {n}"),
                ));
            }
        }
        Ok(Self { indices, n })
    }

    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
            n,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `R_T x`: the sampled coordinates of `x`, in index order.
    pub fn restrict(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        Ok(self.indices.iter().map(|&i| x[i]).collect())
    }
}

/// Uniform `ℓ`-subset of `{0, …, n−1}` via a partial Fisher–Yates shuffle,
/// returned sorted.
pub fn sample_without_replacement<R: Rng + ?Sized>(
    n: usize,
    ell: usize,
    rng: &mut R,
) -> Result<SampleSet> {
    if ell == 0 || ell > n {
        return Err(Error::SampleCountOutOfRange { ell, n });
    }
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..ell {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(ell);
    pool.sort_unstable();
    Ok(SampleSet { indices: pool, n })
}

/// An implicit `ℓ × n` SRHT.
#[derive(Debug, Clone, PartialEq)]
pub struct SrhtOperator {
    dim: HadamardDim,
    signs: SignVector,
    samples: SampleSet,
    scale: f64,
    seed: Option<u64>,
}

/// Draws an SRHT deterministically from `seed`.
pub fn draw_srht(n: usize, ell: usize, seed: u64) -> Result<SrhtOperator> {
    let mut op = draw_srht_with(n, ell, &mut seeding::rng_from_seed(seed))?;
    op.seed = Some(seed);
    Ok(op)
}

/// Draws an SRHT from a caller-owned generator: signs first, then samples.
pub fn draw_srht_with<R: Rng + ?Sized>(n: usize, ell: usize, rng: &mut R) -> Result<SrhtOperator> {
    let dim = HadamardDim::new(n)?;
    if ell == 0 || ell > n {
        return Err(Error::SampleCountOutOfRange { ell, n });
    }
    let signs = SignVector::draw(n, rng);
    let samples = sample_without_replacement(n, ell, rng)?;
    SrhtOperator::from_parts(dim, signs, samples)
}

impl SrhtOperator {
    pub fn from_parts(dim: HadamardDim, signs: SignVector, samples: SampleSet) -> Result<Self> {
        if signs.len() != dim.n() {
            return Err(Error::DimensionMismatch {
                expected: dim.n(),
                actual: signs.len(),
            });
        }
        if samples.n() != dim.n() {
            return Err(Error::DimensionMismatch {
                expected: dim.n(),
                actual: samples.n(),
            });
        }
        let scale = (dim.n() as f64 / samples.len() as f64).sqrt();
        Ok(Self {
            dim,
            signs,
            samples,
            scale,
            seed: None,
        })
    }

    pub fn dim(&self) -> HadamardDim {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.dim.n()
    }

    pub fn ell(&self) -> usize {
        self.samples.len()
    }

    pub fn signs(&self) -> &SignVector {
        &self.signs
    }

    pub fn samples(&self) -> &SampleSet {
        &self.samples
    }

    /// `√(n/ℓ)`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// The seed this operator was drawn from, if any.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `Φx`, computed as sign flip, fast transform, gather, scale.
    pub fn apply_to_vector(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut buf = x.to_vec();
        self.apply_into(&mut buf)
    }

    fn apply_into(&self, buf: &mut [f64]) -> Result<Vec<f64>> {
        self.signs.flatten_inplace(buf, self.dim)?;
        Ok(self
            .samples
            .indices
            .iter()
            .map(|&i| self.scale * buf[i])
            .collect())
    }

    /// `ΦV`, one column at a time.
    pub fn apply_to_matrix(&self, v: &DenseMatrix) -> Result<DenseMatrix> {
        if v.rows() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                actual: v.rows(),
            });
        }
        let (ell, k) = (self.ell(), v.cols());
        let mut out = DenseMatrix::zeros(ell, k);
        let mut buf = vec![0.0; self.n()];
        for j in 0..k {
            for (i, b) in buf.iter_mut().enumerate() {
                *b = v.get(i, j);
            }
            for (r, value) in self.apply_into(&mut buf)?.into_iter().enumerate() {
                out.set(r, j, value);
            }
        }
        Ok(out)
    }

    /// Explicit `ℓ × n` matrix, for `n` up to [`DEFAULT_MATERIALIZE_CAP`].
    pub fn materialize(&self) -> Result<DenseMatrix> {
        self.materialize_with_cap(DEFAULT_MATERIALIZE_CAP)
    }

    pub fn materialize_with_cap(&self, cap: usize) -> Result<DenseMatrix> {
        if self.n() > cap {
            return Err(Error::CapExceeded {
                size: self.n() as u128,
                cap: cap as u128,
            });
        }
        let magnitude = self.scale * self.dim.entry_magnitude();
        Ok(DenseMatrix::from_fn(self.ell(), self.n(), |r, j| {
            signed_entry(self.samples.indices[r], j, magnitude) * self.signs.sign(j)
        }))
    }

    /// Serializable description. Signs and indices are always included when
    /// the operator has no seed to rebuild them from.
    pub fn to_record(&self, explicit: bool) -> SrhtRecord {
        let explicit = explicit || self.seed.is_none();
        SrhtRecord {
            n: self.n(),
            l: self.ell(),
            seed: self.seed,
            signs: explicit.then(|| self.signs.0.clone()),
            indices: explicit.then(|| self.samples.indices.clone()),
        }
    }

    /// Rebuilds an operator, regenerating omitted parts from the seed. When
    /// both the seed and explicit parts are present they must agree.
    pub fn from_record(record: &SrhtRecord) -> Result<Self> {
        let dim = HadamardDim::new(record.n)?;
        let regenerated = match record.seed {
            Some(seed) => Some(draw_srht(record.n, record.l, seed)?),
            None => None,
        };
        let signs = match (&record.signs, &regenerated) {
            (Some(s), _) => SignVector::new(s.clone())?,
            (None, Some(op)) => op.signs.clone(),
            (None, None) => return Err(Error::Record("signs omitted and no seed given".into())),
        };
        let samples = match (&record.indices, &regenerated) {
            (Some(ix), _) => SampleSet::new(ix.clone(), record.n)?,
            (None, Some(op)) => op.samples.clone(),
            (None, None) => return Err(Error::Record("indices omitted and no seed given".into())),
        };
        if samples.len() != record.l {
            return Err(Error::Record(format!(
                "l = {} but {} indices given",
                record.l,
                samples.len()
            )));
        }
        if let Some(op) = &regenerated {
            if op.signs != signs || op.samples != samples {
                return Err(Error::Record("explicit signs/indices disagree with the seed".into()));
            }
        }
        let mut op = Self::from_parts(dim, signs, samples)?;
        op.seed = record.seed;
        Ok(op)
    }
}

/// JSON form of an operator: `{n, l, seed, signs?, indices?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrhtRecord {
    pub n: usize,
    pub l: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signs: Option<Vec<i8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indices: Option<Vec<usize>>,
}
