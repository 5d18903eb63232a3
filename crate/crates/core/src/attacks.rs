//! Data-reconstruction attacks run against perturbed instances.
//!
//! * naive estimation: the perturbed matrix itself, re-standardized per column;
//! * known input/output: an affine map fitted on leaked `(perturbed, original)`
//!   record pairs and applied to every record;
//! * ICA: symmetric FastICA on the perturbed matrix. Component order, sign and
//!   scale are resolved against the original attributes, so this estimate is a
//!   worst case for the data owner.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::index;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::dataset::{mean_and_popstd, zscore_columns, Dataset};
use crate::perturbation::{random_orthogonal, PerturbedInstance};
use crate::rng::{self, derive_seed};

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("attack pool is empty")]
    EmptyPool,
    #[error("shape mismatch: original {0:?}, perturbed {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("{found} known pairs for {attrs} attributes; the affine system is underdetermined")]
    TooFewKnownPairs { found: usize, attrs: usize },
    #[error("known fraction must be in (0, 1], got {0}")]
    KnownFraction(f64),
    #[error("ridge must be non-negative, got {0}")]
    Ridge(f64),
    #[error("known pair index {0} out of range")]
    KnownIndex(usize),
    #[error("normal equations are singular; use a positive ridge")]
    Singular,
    #[error("ICA needs at least 2 attributes and more records than attributes, got {0:?}")]
    IcaShape((usize, usize)),
    #[error("ICA input covariance is degenerate")]
    IcaDegenerate,
    #[error("attack {attack:?} failed: {source}")]
    Member {
        attack: AttackKind,
        #[source]
        source: Box<AttackError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    Naive,
    KnownIo,
    Ica,
}

impl AttackKind {
    pub fn name(self) -> &'static str {
        match self {
            AttackKind::Naive => "naive",
            AttackKind::KnownIo => "known_io",
            AttackKind::Ica => "ica",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub attack: AttackKind,
    pub reconstructed: DMatrix<f64>,
    pub assumptions: BTreeMap<String, Value>,
}

/// Zero-knowledge estimate: perturbed columns re-standardized to mean 0, std 1.
pub fn naive_estimation(p: &PerturbedInstance) -> ReconstructionResult {
    let mut reconstructed = p.features.clone();
    zscore_columns(&mut reconstructed);
    ReconstructionResult {
        attack: AttackKind::Naive,
        reconstructed,
        assumptions: BTreeMap::from([("knowledge".to_string(), json!("none"))]),
    }
}

/// Original records the adversary holds, matched by index to the perturbed rows.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownPairs {
    pub indices: Vec<usize>,
    pub original_rows: DMatrix<f64>,
}

impl KnownPairs {
    /// Uniformly samples `ceil(fraction · n)` records of `original`.
    pub fn sample(original: &Dataset, fraction: f64, seed: u64) -> Result<Self, AttackError> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(AttackError::KnownFraction(fraction));
        }
        let n = original.n_records();
        let k = ((fraction * n as f64).ceil() as usize).clamp(1, n);
        let mut indices = index::sample(&mut rng::seeded(seed), n, k).into_vec();
        indices.sort_unstable();
        Ok(Self::from_indices(original, indices))
    }

    pub fn from_indices(original: &Dataset, indices: Vec<usize>) -> Self {
        let x = original.features();
        let original_rows = DMatrix::from_fn(indices.len(), x.ncols(), |i, j| x[(indices[i], j)]);
        Self {
            indices,
            original_rows,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Least-squares affine map `x ≈ M y + b`; the ridge penalty skips the intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFit {
    pub linear: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl AffineFit {
    pub fn apply(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = y * self.linear.transpose();
        for mut row in x.row_iter_mut() {
            row += self.offset.transpose();
        }
        x
    }
}

pub fn fit_affine(y: &DMatrix<f64>, x: &DMatrix<f64>, ridge: f64) -> Result<AffineFit, AttackError> {
    let (k, d_in) = y.shape();
    let d_out = x.ncols();
    let mut a = DMatrix::from_element(k, d_in + 1, 1.0);
    a.view_mut((0, 0), (k, d_in)).copy_from(y);
    let mut gram = a.transpose() * &a;
    for i in 0..d_in {
        gram[(i, i)] += ridge;
    }
    let rhs = a.transpose() * x;
    let chol = gram.clone().cholesky().ok_or(AttackError::Singular)?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v.abs()), hi.max(v.abs())));
    if !(lo > 0.0) || (lo / hi).powi(2) < 1e-14 {
        return Err(AttackError::Singular);
    }
    let w = chol.solve(&rhs);
    let linear = w.view((0, 0), (d_in, d_out)).transpose();
    let offset = w.row(d_in).transpose();
    Ok(AffineFit { linear, offset })
}

/// Known input/output attack.
pub fn known_io_attack(
    p: &PerturbedInstance,
    known: &KnownPairs,
    ridge: f64,
) -> Result<ReconstructionResult, AttackError> {
    let (n, d) = p.shape();
    if !(ridge >= 0.0) || !ridge.is_finite() {
        return Err(AttackError::Ridge(ridge));
    }
    if known.len() < d {
        return Err(AttackError::TooFewKnownPairs {
            found: known.len(),
            attrs: d,
        });
    }
    if let Some(&bad) = known.indices.iter().find(|&&i| i >= n) {
        return Err(AttackError::KnownIndex(bad));
    }
    if known.original_rows.shape() != (known.len(), d) {
        return Err(AttackError::ShapeMismatch(known.original_rows.shape(), (known.len(), d)));
    }
    let y_known = DMatrix::from_fn(known.len(), d, |i, j| p.features[(known.indices[i], j)]);
    let fit = fit_affine(&y_known, &known.original_rows, ridge)?;
    let reconstructed = fit.apply(&p.features);
    Ok(ReconstructionResult {
        attack: AttackKind::KnownIo,
        reconstructed,
        assumptions: BTreeMap::from([
            ("known_pairs".to_string(), json!(known.len())),
            ("known_fraction".to_string(), json!(known.len() as f64 / n as f64)),
            ("ridge".to_string(), json!(ridge)),
        ]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IcaConfig {
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for IcaConfig {
    fn default() -> Self {
        Self {
            max_iter: 400,
            tol: 1e-8,
            seed: 0,
        }
    }
}

/// Unmixing result of symmetric FastICA (tanh contrast).
#[derive(Debug, Clone)]
pub struct FastIcaOutcome {
    /// records × components
    pub sources: DMatrix<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn symmetric_inverse_sqrt(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.max();
    if !(max > 0.0) || eig.eigenvalues.min() <= max * 1e-12 {
        return None;
    }
    let inv = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Some(&eig.eigenvectors * inv * eig.eigenvectors.transpose())
}

/// Symmetric FastICA with ZCA whitening.
pub fn fast_ica(y: &DMatrix<f64>, cfg: &IcaConfig) -> Result<FastIcaOutcome, AttackError> {
    let (n, d) = y.shape();
    if d < 2 || n <= d {
        return Err(AttackError::IcaShape((n, d)));
    }
    let mut centered = y.clone();
    for mut col in centered.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let cov = centered.transpose() * &centered / n as f64;
    let whitening = symmetric_inverse_sqrt(&cov).ok_or(AttackError::IcaDegenerate)?;
    let z = &centered * &whitening;

    let mut w = random_orthogonal(d, cfg.seed).into_inner();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        let projected = &z * w.transpose();
        let g = projected.map(f64::tanh);
        let g_prime_mean = DVector::from_iterator(
            d,
            g.column_iter().map(|c| c.iter().map(|v| 1.0 - v * v).sum::<f64>() / n as f64),
        );
        let mut next = g.transpose() * &z / n as f64;
        for k in 0..d {
            let scaled = w.row(k) * g_prime_mean[k];
            let mut row = next.row_mut(k);
            row -= scaled;
        }
        let gram = &next * next.transpose();
        let Some(decor) = symmetric_inverse_sqrt(&gram) else {
            break;
        };
        let next = decor * next;
        let change = (0..d)
            .map(|k| ((next.row(k) * w.row(k).transpose())[(0, 0)].abs() - 1.0).abs())
            .fold(0.0, f64::max);
        w = next;
        if change < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(FastIcaOutcome {
        sources: z * w.transpose(),
        iterations,
        converged,
    })
}

pub(crate) fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Greedy one-to-one matching of components to attributes by descending
/// `|corr|`. Returns `(component, correlation)` per attribute.
pub fn match_components(sources: &DMatrix<f64>, original: &DMatrix<f64>) -> Vec<(usize, f64)> {
    let d = original.ncols();
    let comps: Vec<Vec<f64>> = sources.column_iter().map(|c| c.iter().copied().collect()).collect();
    let attrs: Vec<Vec<f64>> = original.column_iter().map(|c| c.iter().copied().collect()).collect();
    let mut pairs = Vec::with_capacity(d * comps.len());
    for (c, comp) in comps.iter().enumerate() {
        for (a, attr) in attrs.iter().enumerate() {
            pairs.push((c, a, pearson(comp, attr)));
        }
    }
    pairs.sort_by(|x, y| {
        y.2.abs()
            .total_cmp(&x.2.abs())
            .then(x.1.cmp(&y.1))
            .then(x.0.cmp(&y.0))
    });
    let mut used_comp = vec![false; comps.len()];
    let mut out: Vec<Option<(usize, f64)>> = vec![None; d];
    for (c, a, r) in pairs {
        if !used_comp[c] && out[a].is_none() {
            used_comp[c] = true;
            out[a] = Some((c, r));
        }
    }
    out.into_iter().map(|m| m.expect("square matching")).collect()
}

/// ICA attack; reads `original` only to align the recovered components.
pub fn ica_attack(
    p: &PerturbedInstance,
    original: &Dataset,
    cfg: &IcaConfig,
) -> Result<ReconstructionResult, AttackError> {
    if original.features().shape() != p.shape() {
        return Err(AttackError::ShapeMismatch(original.features().shape(), p.shape()));
    }
    let outcome = fast_ica(&p.features, cfg)?;
    let x = original.features();
    let matching = match_components(&outcome.sources, x);
    let (n, d) = p.shape();
    let mut reconstructed = DMatrix::zeros(n, d);
    for (a, &(c, r)) in matching.iter().enumerate() {
        let (mx, sx) = mean_and_popstd(x.column(a).as_slice());
        let (mc, sc) = mean_and_popstd(outcome.sources.column(c).as_slice());
        let sign = if r < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            let s = outcome.sources[(i, c)];
            reconstructed[(i, a)] = if sc > 0.0 {
                mx + sign * sx * (s - mc) / sc
            } else {
                mx
            };
        }
    }
    let mean_abs_corr = matching.iter().map(|m| m.1.abs()).sum::<f64>() / d as f64;
    Ok(ReconstructionResult {
        attack: AttackKind::Ica,
        reconstructed,
        assumptions: BTreeMap::from([
            ("alignment".to_string(), json!("max_abs_correlation_with_original")),
            ("converged".to_string(), json!(outcome.converged)),
            ("iterations".to_string(), json!(outcome.iterations)),
            ("mean_abs_correlation".to_string(), json!(mean_abs_corr)),
        ]),
    })
}

/// One configured pool member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "attack", rename_all = "snake_case")]
pub enum AttackSpec {
    Naive,
    KnownIo {
        #[serde(default = "default_known_fraction")]
        known_fraction: f64,
        #[serde(default = "default_ridge")]
        ridge: f64,
    },
    Ica {
        #[serde(default = "default_max_iter")]
        max_iter: usize,
        #[serde(default = "default_tol")]
        tol: f64,
    },
}

pub const DEFAULT_KNOWN_FRACTION: f64 = 0.10;
pub const DEFAULT_RIDGE: f64 = 1e-8;

fn default_known_fraction() -> f64 {
    DEFAULT_KNOWN_FRACTION
}
fn default_ridge() -> f64 {
    DEFAULT_RIDGE
}
fn default_max_iter() -> usize {
    IcaConfig::default().max_iter
}
fn default_tol() -> f64 {
    IcaConfig::default().tol
}

impl AttackSpec {
    pub fn kind(&self) -> AttackKind {
        match self {
            AttackSpec::Naive => AttackKind::Naive,
            AttackSpec::KnownIo { .. } => AttackKind::KnownIo,
            AttackSpec::Ica { .. } => AttackKind::Ica,
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "naive" | "ni" => AttackSpec::Naive,
            "known_io" | "io" => AttackSpec::KnownIo {
                known_fraction: DEFAULT_KNOWN_FRACTION,
                ridge: DEFAULT_RIDGE,
            },
            "ica" => AttackSpec::Ica {
                max_iter: default_max_iter(),
                tol: default_tol(),
            },
            _ => return None,
        })
    }

    pub fn run(
        &self,
        p: &PerturbedInstance,
        original: &Dataset,
        seed: u64,
    ) -> Result<ReconstructionResult, AttackError> {
        if original.features().shape() != p.shape() {
            return Err(AttackError::ShapeMismatch(original.features().shape(), p.shape()));
        }
        match *self {
            AttackSpec::Naive => Ok(naive_estimation(p)),
            AttackSpec::KnownIo {
                known_fraction,
                ridge,
            } => {
                let known = KnownPairs::sample(original, known_fraction, seed)?;
                known_io_attack(p, &known, ridge)
            }
            AttackSpec::Ica { max_iter, tol } => ica_attack(p, original, &IcaConfig { max_iter, tol, seed }),
        }
    }
}

/// Runs every pool member in order; member `i` draws from stream `i` of `seed`.
pub fn run_attack_pool(
    p: &PerturbedInstance,
    original: &Dataset,
    pool: &[AttackSpec],
    seed: u64,
) -> Result<Vec<ReconstructionResult>, AttackError> {
    if pool.is_empty() {
        return Err(AttackError::EmptyPool);
    }
    pool.iter()
        .enumerate()
        .map(|(i, spec)| {
            spec.run(p, original, derive_seed(seed, i as u64))
                .map_err(|e| AttackError::Member {
                    attack: spec.kind(),
                    source: Box::new(e),
                })
        })
        .collect()
}
