//! Zipf popularity of the video library and request sampling.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};

/// Bits in one megabyte of video (decimal megabytes).
pub const BITS_PER_MB: f64 = 8.0e6;

/// Zero-based index of a file in the popularity ranking; rank 1 is index 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FileId(pub u32);

impl FileId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// One-based popularity rank.
    pub fn rank(self) -> usize {
        self.0 as usize + 1
    }
}

/// Zipf pmf `f_s = s^-gamma / sum_g g^-gamma` for ranks `s = 1..=m`.
pub fn zipf_pmf(m: usize, gamma_r: f64) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::invalid("library must contain at least one file"));
    }
    if !(gamma_r >= 0.0) || !gamma_r.is_finite() {
        return Err(Error::invalid(format!(
            "zipf exponent must be >= 0, got {gamma_r}"
        )));
    }
    let weights: Vec<f64> = (1..=m).map(|s| (s as f64).powf(-gamma_r)).collect();
    // smallest terms first
    let total: f64 = weights.iter().rev().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// The video library: popularity pmf and file sizes in bits.
///
/// Immutable once built; safe to share between worker threads.
#[derive(Debug, Clone)]
pub struct ContentLibrary {
    gamma_r: f64,
    pmf: Vec<f64>,
    sizes_bits: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl ContentLibrary {
    /// Builds a library of `m` files with sizes drawn uniformly in
    /// `[min_mb, max_mb]` megabytes, independent of rank.
    pub fn new<R: Rng + ?Sized>(
        m: usize,
        gamma_r: f64,
        min_mb: f64,
        max_mb: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !(min_mb > 0.0 && min_mb <= max_mb && max_mb.is_finite()) {
            return Err(Error::invalid(format!(
                "file size range must satisfy 0 < min <= max, got [{min_mb}, {max_mb}] MB"
            )));
        }
        let sizes = (0..m)
            .map(|_| {
                let mb = if min_mb == max_mb {
                    min_mb
                } else {
                    rng.random_range(min_mb..=max_mb)
                };
                mb * BITS_PER_MB
            })
            .collect();
        Self::with_sizes(gamma_r, sizes)
    }

    /// Builds a library with explicit per-file sizes in bits; `m` is
    /// `sizes_bits.len()`.
    pub fn with_sizes(gamma_r: f64, sizes_bits: Vec<f64>) -> Result<Self> {
        let pmf = zipf_pmf(sizes_bits.len(), gamma_r)?;
        if let Some(bad) = sizes_bits.iter().find(|b| !(**b > 0.0) || !b.is_finite()) {
            return Err(Error::invalid(format!(
                "file sizes must be positive, got {bad}"
            )));
        }
        let sampler = WeightedIndex::new(&pmf)
            .map_err(|e| Error::invalid(format!("zipf pmf not samplable: {e}")))?;
        Ok(Self {
            gamma_r,
            pmf,
            sizes_bits,
            sampler,
        })
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    pub fn gamma_r(&self) -> f64 {
        self.gamma_r
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn popularity(&self, file: FileId) -> f64 {
        self.pmf[file.index()]
    }

    pub fn size_bits(&self, file: FileId) -> f64 {
        self.sizes_bits[file.index()]
    }

    pub fn sizes_bits(&self) -> &[f64] {
        &self.sizes_bits
    }

    /// Draws one request from the Zipf pmf.
    pub fn sample_request<R: Rng + ?Sized>(&self, rng: &mut R) -> FileId {
        FileId(self.sampler.sample(rng) as u32)
    }
}
