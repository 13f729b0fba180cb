//! Partial circulant operators and sign diagonals.
//!
//! `PartialCirculant` is the k x d matrix whose row i is the symbol vector
//! `a` rotated right by i: M[i][j] = a[(j - i) mod d]. Applying it to a
//! vector is a circular cross-correlation, so next to the literal O(kd)
//! row-by-row product there is an FFT route: correlate in the frequency
//! domain and keep the first k coordinates. Both routes are kept callable
//! because their agreement is one of the library's standing checks, not an
//! implementation detail to be optimized away.

use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::mat::Mat;
use crate::prng::{sample_vector, DistributionTag, SeedSpec};
use num_complex::Complex64;
use std::sync::OnceLock;

/// k x d partial circulant matrix M with M[i][j] = a[(j - i) mod d].
#[derive(Debug)]
pub struct PartialCirculant {
    a: Vec<f64>,
    k: usize,
    /// FFT plan for length d plus the conjugated spectrum of `a`, built on
    /// first FFT use and reused across applies.
    freq: OnceLock<(FftPlan, Vec<Complex64>)>,
}

impl Clone for PartialCirculant {
    fn clone(&self) -> Self {
        // a fresh clone re-derives its frequency cache on demand
        PartialCirculant {
            a: self.a.clone(),
            k: self.k,
            freq: OnceLock::new(),
        }
    }
}

impl PartialCirculant {
    pub fn new(a: Vec<f64>, k: usize) -> Result<PartialCirculant> {
        let d = a.len();
        if d == 0 {
            return Err(Error::invalid("circulant symbol must be non-empty"));
        }
        if k == 0 || k > d {
            return Err(Error::invalid(format!(
                "row count k={k} must satisfy 1 <= k <= d={d}"
            )));
        }
        if !a.iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("circulant symbol entries must be finite"));
        }
        Ok(PartialCirculant {
            a,
            k,
            freq: OnceLock::new(),
        })
    }

    /// Draw the symbol vector i.i.d. from `dist`.
    pub fn sampled(
        spec: SeedSpec,
        dist: DistributionTag,
        d: usize,
        k: usize,
    ) -> Result<PartialCirculant> {
        PartialCirculant::new(sample_vector(spec, dist, d)?, k)
    }

    pub fn d(&self) -> usize {
        self.a.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The symbol vector a (row 0 of the full circulant).
    pub fn symbol(&self) -> &[f64] {
        &self.a
    }

    /// Materialize the k x d matrix.
    pub fn to_dense(&self) -> Mat {
        let d = self.d();
        let mut m = Mat::zeros(self.k, d);
        for i in 0..self.k {
            let row = m.row_mut(i);
            // (j - i) mod d without per-entry remainders
            row[..i].copy_from_slice(&self.a[d - i..]);
            row[i..].copy_from_slice(&self.a[..d - i]);
        }
        m
    }

    /// Row-by-row product M v, taking O(kd) time.
    pub fn apply_naive(&self, v: &[f64]) -> Result<Vec<f64>> {
        let d = self.d();
        if v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: v.len(),
            });
        }
        let mut out = vec![0.0; self.k];
        for (i, slot) in out.iter_mut().enumerate() {
            // row i is a[d-i..] followed by a[..d-i]
            let mut acc = 0.0;
            for (x, y) in self.a[d - i..].iter().zip(&v[..i]) {
                acc += x * y;
            }
            for (x, y) in self.a[..d - i].iter().zip(&v[i..]) {
                acc += x * y;
            }
            *slot = acc;
        }
        Ok(out)
    }

    /// FFT product: M v equals the circular cross-correlation of v with a,
    /// truncated to its first k coordinates. Runs in O(d log d).
    pub fn apply_fft(&self, v: &[f64]) -> Result<Vec<f64>> {
        let d = self.d();
        if v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: v.len(),
            });
        }
        let (plan, spectrum) = self.freq.get_or_init(|| {
            let plan = FftPlan::new(d);
            let spec: Vec<Complex64> = plan
                .forward_real(&self.a)
                .into_iter()
                .map(|c| c.conj())
                .collect();
            (plan, spec)
        });
        let mut vhat = plan.forward_real(v);
        for (c, s) in vhat.iter_mut().zip(spectrum) {
            *c *= s;
        }
        let full = plan.inverse(&vhat);
        Ok(full[..self.k].iter().map(|c| c.re).collect())
    }
}

/// Diagonal of independent signs: (D v)[j] = signs[j] * v[j].
#[derive(Debug, Clone)]
pub struct SignDiagonal {
    signs: Vec<f64>,
}

impl SignDiagonal {
    pub fn new(signs: Vec<f64>) -> Result<SignDiagonal> {
        if signs.is_empty() {
            return Err(Error::invalid("sign diagonal must be non-empty"));
        }
        if !signs.iter().all(|&s| s == 1.0 || s == -1.0) {
            return Err(Error::invalid("sign diagonal entries must be +1 or -1"));
        }
        Ok(SignDiagonal { signs })
    }

    pub fn sampled(spec: SeedSpec, d: usize) -> Result<SignDiagonal> {
        SignDiagonal::new(sample_vector(spec, DistributionTag::Rademacher, d)?)
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.signs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.signs.len(),
                got: v.len(),
            });
        }
        Ok(self.signs.iter().zip(v).map(|(s, x)| s * x).collect())
    }
}
