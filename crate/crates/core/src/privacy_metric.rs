//! Histogram-entropy privacy metric.
//!
//! Each attribute is min-max scaled to [0, 1] and binned with a fixed bin
//! width. The uncertainty `h` is the Shannon entropy (bits) of the bin
//! probabilities, with no `log2(bw)` differential correction. For an
//! original attribute `X` and its perturbed release `Xp`:
//!
//! ```text
//! N       = Xp - X
//! I       = max(0, h(Xp) - h(N))
//! P       = 1 - 2^-I            (fraction of privacy lost)
//! Π(X)    = 2^h(X)
//! Π(X|Xp) = Π(X) * (1 - P)
//! ```
//!
//! The minimum of `Π(X|Xp)` over attributes is the instance's privacy
//! guarantee; pool members are compared after dividing by the pool maximum.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{minmax_to_unit, Dataset};

pub const DEFAULT_BIN_WIDTH: f64 = 0.01;

#[derive(Debug, Error, PartialEq)]
pub enum PrivacyError {
    #[error("cannot estimate entropy of an empty vector")]
    Empty,
    #[error("bin width {0} outside (0, 1]")]
    BinWidth(f64),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("shape mismatch: original {0:?}, perturbed {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("privacy values must be positive and finite")]
    NonPositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    /// Shannon entropy of the bin probabilities, in bits.
    pub h: f64,
    pub bin_width: f64,
    pub n_bins: usize,
    pub n_samples: usize,
}

pub fn n_bins(bw: f64) -> usize {
    // guards 1/0.01 style divisions that land a hair above an integer
    ((1.0 / bw) - 1e-9).ceil().max(1.0) as usize
}

fn check_bin_width(bw: f64) -> Result<(), PrivacyError> {
    if bw.is_finite() && bw > 0.0 && bw <= 1.0 {
        Ok(())
    } else {
        Err(PrivacyError::BinWidth(bw))
    }
}

/// Inherent uncertainty `h(X)` of one attribute.
pub fn inherent_uncertainty(x: &[f64], bw: f64) -> Result<EntropyEstimate, PrivacyError> {
    check_bin_width(bw)?;
    if x.is_empty() {
        return Err(PrivacyError::Empty);
    }
    let unit = minmax_to_unit(x).map_err(|_| {
        PrivacyError::NonFinite(x.iter().position(|v| !v.is_finite()).unwrap_or(0))
    })?;
    let bins = n_bins(bw);
    let mut counts = vec![0usize; bins];
    for v in unit {
        // half-open bins [k*bw, (k+1)*bw); 1.0 falls into the last one
        let k = ((v / bw).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    let n = x.len() as f64;
    let h = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0);
    Ok(EntropyEstimate {
        h,
        bin_width: bw,
        n_bins: bins,
        n_samples: x.len(),
    })
}

/// Per-attribute breakdown of the privacy computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttributePrivacy {
    pub h_original: f64,
    pub h_perturbed: f64,
    pub h_noise: f64,
    /// `h(Xp) - h(N)` before clamping.
    pub raw_mutual_information: f64,
    pub loss: f64,
    pub privacy: f64,
}

fn attribute_privacy(x: &[f64], xp: &[f64], bw: f64) -> Result<AttributePrivacy, PrivacyError> {
    if x.len() != xp.len() {
        return Err(PrivacyError::LengthMismatch(x.len(), xp.len()));
    }
    let noise: Vec<f64> = xp.iter().zip(x).map(|(p, o)| p - o).collect();
    let h_original = inherent_uncertainty(x, bw)?.h;
    let h_perturbed = inherent_uncertainty(xp, bw)?.h;
    let h_noise = inherent_uncertainty(&noise, bw)?.h;
    let raw = h_perturbed - h_noise;
    let loss = loss_from_information(raw);
    Ok(AttributePrivacy {
        h_original,
        h_perturbed,
        h_noise,
        raw_mutual_information: raw,
        loss,
        privacy: h_original.exp2() * (1.0 - loss),
    })
}

/// `1 - 2^-I` with negative `I` clamped to zero.
pub fn loss_from_information(i: f64) -> f64 {
    (1.0 - (-i.max(0.0)).exp2()).clamp(0.0, 1.0)
}

/// Fraction of the attribute's privacy lost by releasing `xp`, in [0, 1].
pub fn privacy_loss(x: &[f64], xp: &[f64], bw: f64) -> Result<f64, PrivacyError> {
    Ok(attribute_privacy(x, xp, bw)?.loss)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyGuarantee {
    pub attributes: Vec<AttributePrivacy>,
    pub minimum: f64,
    /// `minimum / pool max`, filled in once the whole pool is known.
    pub scaled_minimum: Option<f64>,
}

impl PrivacyGuarantee {
    pub fn per_attribute(&self) -> Vec<f64> {
        self.attributes.iter().map(|a| a.privacy).collect()
    }
}

/// Minimum empirical privacy guarantee of `perturbed` against the original.
pub fn min_privacy_guarantee(
    original: &Dataset,
    perturbed: &DMatrix<f64>,
    bw: f64,
) -> Result<PrivacyGuarantee, PrivacyError> {
    min_privacy_guarantee_matrix(original.features(), perturbed, bw)
}

pub fn min_privacy_guarantee_matrix(
    original: &DMatrix<f64>,
    perturbed: &DMatrix<f64>,
    bw: f64,
) -> Result<PrivacyGuarantee, PrivacyError> {
    check_bin_width(bw)?;
    if original.shape() != perturbed.shape() {
        return Err(PrivacyError::ShapeMismatch(original.shape(), perturbed.shape()));
    }
    let attributes = (0..original.ncols())
        .map(|j| {
            let x: Vec<f64> = original.column(j).iter().copied().collect();
            let xp: Vec<f64> = perturbed.column(j).iter().copied().collect();
            attribute_privacy(&x, &xp, bw)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let minimum = attributes
        .iter()
        .map(|a| a.privacy)
        .fold(f64::INFINITY, f64::min);
    Ok(PrivacyGuarantee {
        attributes,
        minimum,
        scaled_minimum: None,
    })
}

/// Divides each pool member's minimum privacy by the pool maximum.
pub fn scale_privacy(pool_minimums: &[f64]) -> Result<Vec<f64>, PrivacyError> {
    if pool_minimums.is_empty() {
        return Err(PrivacyError::Empty);
    }
    if pool_minimums.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(PrivacyError::NonPositive);
    }
    let max = pool_minimums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(pool_minimums
        .iter()
        .map(|&v| if v == max { 1.0 } else { v / max })
        .collect())
}
