//! Attack-resistance guarantee: the smallest `Var(X^r - X)` over attributes
//! and attacks.
//!
//! Pool scaling divides standard deviations, not variances, by the pool
//! maximum.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attacks::{AttackKind, ReconstructionResult};
use crate::dataset::Dataset;

#[derive(Debug, Error, PartialEq)]
pub enum ResistanceError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 values, got {0}")]
    TooShort(usize),
    #[error("shape mismatch: original {0:?}, reconstruction {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("empty input")]
    Empty,
    #[error("values must be finite and non-negative")]
    Negative,
}

/// Population variance of `xr - x`.
pub fn var_p(x: &[f64], xr: &[f64]) -> Result<f64, ResistanceError> {
    if x.len() != xr.len() {
        return Err(ResistanceError::LengthMismatch(x.len(), xr.len()));
    }
    if x.len() < 2 {
        return Err(ResistanceError::TooShort(x.len()));
    }
    let n = x.len() as f64;
    let mean = xr.iter().zip(x).map(|(r, o)| r - o).sum::<f64>() / n;
    Ok(xr
        .iter()
        .zip(x)
        .map(|(r, o)| {
            let dev = r - o - mean;
            dev * dev
        })
        .sum::<f64>()
        / n)
}

pub fn var_per_attribute(d: &Dataset, r: &ReconstructionResult) -> Result<Vec<f64>, ResistanceError> {
    let x = d.features();
    if x.shape() != r.reconstructed.shape() {
        return Err(ResistanceError::ShapeMismatch(x.shape(), r.reconstructed.shape()));
    }
    (0..x.ncols())
        .map(|j| {
            let a: Vec<f64> = x.column(j).iter().copied().collect();
            let b: Vec<f64> = r.reconstructed.column(j).iter().copied().collect();
            var_p(&a, &b)
        })
        .collect()
}

/// Variance of the most successfully reconstructed attribute.
pub fn min_var_over_attributes(d: &Dataset, r: &ReconstructionResult) -> Result<f64, ResistanceError> {
    Ok(var_per_attribute(d, r)?.into_iter().fold(f64::INFINITY, f64::min))
}

pub fn min_var_over_attacks(per_attack: &[f64]) -> Result<f64, ResistanceError> {
    if per_attack.is_empty() {
        return Err(ResistanceError::Empty);
    }
    Ok(per_attack.iter().copied().fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledResistance {
    pub values: Vec<f64>,
    /// Every pool member was fully reconstructed; all values are zero.
    pub degenerate: bool,
}

/// Divides each `√Var(P)_min` by the pool maximum.
pub fn scale_resistance(pool_min_stds: &[f64]) -> Result<ScaledResistance, ResistanceError> {
    if pool_min_stds.is_empty() {
        return Err(ResistanceError::Empty);
    }
    if pool_min_stds.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(ResistanceError::Negative);
    }
    let max = pool_min_stds.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(ScaledResistance {
            values: vec![0.0; pool_min_stds.len()],
            degenerate: true,
        });
    }
    Ok(ScaledResistance {
        values: pool_min_stds
            .iter()
            .map(|&v| if v == max { 1.0 } else { v / max })
            .collect(),
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackResistance {
    pub attack: AttackKind,
    pub per_attribute_var: Vec<f64>,
    pub min_var: f64,
    pub min_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResistanceGuarantee {
    pub per_attack: Vec<AttackResistance>,
    pub overall_min_std: f64,
    pub scaled: Option<f64>,
}

impl ResistanceGuarantee {
    pub fn from_reconstructions(
        d: &Dataset,
        reconstructions: &[ReconstructionResult],
    ) -> Result<Self, ResistanceError> {
        let per_attack = reconstructions
            .iter()
            .map(|r| {
                let per_attribute_var = var_per_attribute(d, r)?;
                let min_var = per_attribute_var.iter().copied().fold(f64::INFINITY, f64::min);
                Ok(AttackResistance {
                    attack: r.attack,
                    per_attribute_var,
                    min_var,
                    min_std: min_var.sqrt(),
                })
            })
            .collect::<Result<Vec<_>, ResistanceError>>()?;
        let mins: Vec<f64> = per_attack.iter().map(|a| a.min_var).collect();
        let overall = min_var_over_attacks(&mins)?;
        Ok(Self {
            per_attack,
            overall_min_std: overall.sqrt(),
            scaled: None,
        })
    }
}
