//! Input-perturbation pool members.
//!
//! Every member is a pure function of `(dataset, params, seed)` and expects
//! z-scored input. Rotation and geometric perturbation draw `iterations`
//! candidate transforms and keep the one with the highest minimum privacy
//! guarantee.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{self, Dataset, DatasetError, Normalization};
use crate::privacy_metric::{self, PrivacyError, DEFAULT_BIN_WIDTH};
use crate::rng::{self, derive_seed};

#[derive(Debug, Error)]
pub enum PerturbError {
    #[error("input must be z-score normalized")]
    NotNormalized,
    #[error("sigma must be positive and finite, got {0}")]
    Sigma(f64),
    #[error("epsilon must be positive, got {0}")]
    Epsilon(f64),
    #[error("iterations must be at least 1")]
    Iterations,
    #[error("{algorithm:?} needs at least 2 attributes, got {found}")]
    TooFewAttributes { algorithm: Algorithm, found: usize },
    #[error("translation range must be non-negative and finite, got {0}")]
    TranslationRange(f64),
    #[error("candidate scoring failed: {0}")]
    Privacy(#[from] PrivacyError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("provenance: {0}")]
    Provenance(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    AdditiveNoise,
    Rotation,
    Geometric,
    LaplaceLdp,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::AdditiveNoise => "additive_noise",
            Algorithm::Rotation => "rotation",
            Algorithm::Geometric => "geometric",
            Algorithm::LaplaceLdp => "laplace_ldp",
        }
    }
}

/// Square matrix with `RᵀR = I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalMatrix(DMatrix<f64>);

impl OrthogonalMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `Q`'s columns fixed by `diag(R)`.
pub fn random_orthogonal(d: usize, seed: u64) -> OrthogonalMatrix {
    assert!(d >= 1, "dimension must be at least 1");
    let mut rng = rng::seeded(seed);
    let g = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    OrthogonalMatrix(q)
}

/// `x ↦ R x + t` applied to every record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineTransform {
    pub rotation: OrthogonalMatrix,
    pub translation: DVector<f64>,
}

impl AffineTransform {
    /// Noise-free image of a records × attributes matrix.
    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut y = x * self.rotation.matrix().transpose();
        for mut row in y.row_iter_mut() {
            row += self.translation.transpose();
        }
        y
    }
}

/// Algorithm, parameters and seed; together with the source dataset they
/// determine a perturbed instance exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source_id: String,
    pub algorithm: Algorithm,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedInstance {
    pub features: DMatrix<f64>,
    pub provenance: Provenance,
    pub attr_names: Vec<String>,
    pub label_name: String,
    pub labels: Vec<String>,
    /// Structural transform of the chosen candidate (rotation / geometric only).
    pub transform: Option<AffineTransform>,
}

impl PerturbedInstance {
    fn new(
        source: &Dataset,
        features: DMatrix<f64>,
        algorithm: Algorithm,
        params: BTreeMap<String, f64>,
        seed: u64,
        transform: Option<AffineTransform>,
    ) -> Self {
        debug_assert_eq!(features.shape(), source.features().shape());
        Self {
            features,
            provenance: Provenance {
                source_id: source.id().to_string(),
                algorithm,
                params,
                seed,
            },
            attr_names: source.attr_names().to_vec(),
            label_name: source.label_name().to_string(),
            labels: source.labels().to_vec(),
            transform,
        }
    }

    /// Wraps an externally produced perturbed matrix (e.g. read back from CSV).
    pub fn from_dataset(d: &Dataset, provenance: Provenance) -> Self {
        Self {
            features: d.features().clone(),
            provenance,
            attr_names: d.attr_names().to_vec(),
            label_name: d.label_name().to_string(),
            labels: d.labels().to_vec(),
            transform: None,
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        self.provenance.algorithm
    }

    pub fn shape(&self) -> (usize, usize) {
        self.features.shape()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), DatasetError> {
        dataset::write_matrix_csv(w, &self.attr_names, &self.label_name, &self.features, &self.labels)
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        buf
    }

    pub fn provenance_json(&self) -> Result<String, PerturbError> {
        Ok(serde_json::to_string_pretty(&self.provenance)?)
    }
}

fn require_zscored(d: &Dataset) -> Result<(), PerturbError> {
    if d.normalization() != Normalization::Zscored {
        return Err(PerturbError::NotNormalized);
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<(), PerturbError> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(PerturbError::Sigma(sigma))
    }
}

fn require_two_attrs(d: &Dataset, algorithm: Algorithm) -> Result<(), PerturbError> {
    if d.n_attrs() < 2 {
        return Err(PerturbError::TooFewAttributes {
            algorithm,
            found: d.n_attrs(),
        });
    }
    Ok(())
}

fn gaussian_matrix(rows: usize, cols: usize, sigma: f64, rng: &mut rng::Rng) -> DMatrix<f64> {
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    DMatrix::from_fn(rows, cols, |_, _| normal.sample(rng))
}

/// `X + Δ`, `Δ` i.i.d. Gaussian(0, σ²).
pub fn additive_noise(d: &Dataset, sigma: f64, seed: u64) -> Result<PerturbedInstance, PerturbError> {
    require_zscored(d)?;
    check_sigma(sigma)?;
    let mut rng = rng::seeded(seed);
    let noise = gaussian_matrix(d.n_records(), d.n_attrs(), sigma, &mut rng);
    let params = BTreeMap::from([("sigma".to_string(), sigma)]);
    Ok(PerturbedInstance::new(
        d,
        d.features() + noise,
        Algorithm::AdditiveNoise,
        params,
        seed,
        None,
    ))
}

/// Options shared by the candidate-selecting members.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricParams {
    pub iterations: usize,
    pub sigma: f64,
    /// Translation components are drawn from `[-range, range]`.
    pub translation_range: f64,
    pub bin_width: f64,
}

impl Default for GeometricParams {
    fn default() -> Self {
        Self {
            iterations: 10,
            sigma: 0.3,
            translation_range: 1.0,
            bin_width: DEFAULT_BIN_WIDTH,
        }
    }
}

struct Candidate {
    features: DMatrix<f64>,
    transform: AffineTransform,
    score: f64,
}

fn best_candidate(
    d: &Dataset,
    iterations: usize,
    bin_width: f64,
    mut make: impl FnMut(usize) -> (DMatrix<f64>, AffineTransform),
) -> Result<(usize, Candidate), PerturbError> {
    if iterations == 0 {
        return Err(PerturbError::Iterations);
    }
    let mut best: Option<(usize, Candidate)> = None;
    for k in 0..iterations {
        let (features, transform) = make(k);
        let score = privacy_metric::min_privacy_guarantee(d, &features, bin_width)?.minimum;
        // strict > keeps the earliest candidate on ties
        if best.as_ref().is_none_or(|(_, b)| score > b.score) {
            best = Some((
                k,
                Candidate {
                    features,
                    transform,
                    score,
                },
            ));
        }
    }
    Ok(best.expect("iterations >= 1"))
}

/// Rotation in attribute space, `y = R x` per record; best of `iterations`.
pub fn rotation_perturb(d: &Dataset, iterations: usize, seed: u64) -> Result<PerturbedInstance, PerturbError> {
    rotation_perturb_with(d, iterations, DEFAULT_BIN_WIDTH, seed)
}

pub fn rotation_perturb_with(
    d: &Dataset,
    iterations: usize,
    bin_width: f64,
    seed: u64,
) -> Result<PerturbedInstance, PerturbError> {
    require_zscored(d)?;
    require_two_attrs(d, Algorithm::Rotation)?;
    let dim = d.n_attrs();
    let (k, best) = best_candidate(d, iterations, bin_width, |k| {
        let transform = AffineTransform {
            rotation: random_orthogonal(dim, derive_seed(seed, k as u64)),
            translation: DVector::zeros(dim),
        };
        (transform.apply(d.features()), transform)
    })?;
    let params = BTreeMap::from([
        ("iterations".to_string(), iterations as f64),
        ("selected_iteration".to_string(), k as f64),
        ("bin_width".to_string(), bin_width),
        ("min_privacy".to_string(), best.score),
    ]);
    Ok(PerturbedInstance::new(
        d,
        best.features,
        Algorithm::Rotation,
        params,
        seed,
        Some(best.transform),
    ))
}

/// `y = R x + Ψ + Δ` per record; best of `iterations` candidates.
pub fn geometric_perturb(
    d: &Dataset,
    iterations: usize,
    sigma: f64,
    seed: u64,
) -> Result<PerturbedInstance, PerturbError> {
    geometric_perturb_with(
        d,
        &GeometricParams {
            iterations,
            sigma,
            ..GeometricParams::default()
        },
        seed,
    )
}

pub fn geometric_perturb_with(
    d: &Dataset,
    p: &GeometricParams,
    seed: u64,
) -> Result<PerturbedInstance, PerturbError> {
    require_zscored(d)?;
    check_sigma(p.sigma)?;
    require_two_attrs(d, Algorithm::Geometric)?;
    if !(p.translation_range.is_finite() && p.translation_range >= 0.0) {
        return Err(PerturbError::TranslationRange(p.translation_range));
    }
    let (n, dim) = (d.n_records(), d.n_attrs());
    let (k, best) = best_candidate(d, p.iterations, p.bin_width, |k| {
        let rotation = random_orthogonal(dim, derive_seed(seed, k as u64));
        let mut rng = rng::stream(seed, (1 << 32) + k as u64);
        let range = p.translation_range;
        let translation = DVector::from_fn(dim, |_, _| {
            if range > 0.0 {
                rng.random_range(-range..=range)
            } else {
                0.0
            }
        });
        let transform = AffineTransform {
            rotation,
            translation,
        };
        let y = transform.apply(d.features()) + gaussian_matrix(n, dim, p.sigma, &mut rng);
        (y, transform)
    })?;
    let params = BTreeMap::from([
        ("iterations".to_string(), p.iterations as f64),
        ("sigma".to_string(), p.sigma),
        ("translation_range".to_string(), p.translation_range),
        ("selected_iteration".to_string(), k as f64),
        ("bin_width".to_string(), p.bin_width),
        ("min_privacy".to_string(), best.score),
    ]);
    Ok(PerturbedInstance::new(
        d,
        best.features,
        Algorithm::Geometric,
        params,
        seed,
        Some(best.transform),
    ))
}

/// Width of the clamped per-cell range `[-1, 1]`.
pub const LAPLACE_SENSITIVITY: f64 = 2.0;

pub fn laplace_scale(epsilon: f64) -> f64 {
    LAPLACE_SENSITIVITY / epsilon
}

/// Inverse-CDF draw from Laplace(0, scale).
pub fn sample_laplace(rng: &mut rng::Rng, scale: f64) -> f64 {
    loop {
        let u: f64 = rng.random::<f64>() - 0.5;
        let tail = 1.0 - 2.0 * u.abs();
        if tail > 0.0 {
            return -scale * u.signum() * tail.ln();
        }
    }
}

pub fn laplace_noise(n: usize, scale: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng::seeded(seed);
    (0..n).map(|_| sample_laplace(&mut rng, scale)).collect()
}

/// Divides every column by its max-abs so values land in `[-1, 1]`.
pub fn clamp_to_unit_range(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = x.clone();
    for mut col in out.column_iter_mut() {
        let m = col.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if m > 0.0 {
            col.apply(|v| *v = (*v / m).clamp(-1.0, 1.0));
        }
    }
    out
}

/// ε-LDP Laplace mechanism on column-rescaled data.
pub fn laplace_perturb(d: &Dataset, epsilon: f64, seed: u64) -> Result<PerturbedInstance, PerturbError> {
    require_zscored(d)?;
    if !(epsilon > 0.0) || epsilon.is_nan() {
        return Err(PerturbError::Epsilon(epsilon));
    }
    let scale = laplace_scale(epsilon);
    let mut rng = rng::seeded(seed);
    let clamped = clamp_to_unit_range(d.features());
    let noise = DMatrix::from_fn(d.n_records(), d.n_attrs(), |_, _| sample_laplace(&mut rng, scale));
    let params = BTreeMap::from([
        ("epsilon".to_string(), epsilon),
        ("sensitivity".to_string(), LAPLACE_SENSITIVITY),
        ("scale".to_string(), scale),
    ]);
    Ok(PerturbedInstance::new(
        d,
        clamped + noise,
        Algorithm::LaplaceLdp,
        params,
        seed,
        None,
    ))
}

/// Configurable pool member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum Perturbator {
    AdditiveNoise {
        sigma: f64,
    },
    Rotation {
        #[serde(default = "default_iterations")]
        iterations: usize,
    },
    Geometric {
        #[serde(default = "default_iterations")]
        iterations: usize,
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    LaplaceLdp {
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
}

fn default_iterations() -> usize {
    10
}
fn default_sigma() -> f64 {
    0.3
}
fn default_epsilon() -> f64 {
    1.0
}

impl Perturbator {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            Perturbator::AdditiveNoise { .. } => Algorithm::AdditiveNoise,
            Perturbator::Rotation { .. } => Algorithm::Rotation,
            Perturbator::Geometric { .. } => Algorithm::Geometric,
            Perturbator::LaplaceLdp { .. } => Algorithm::LaplaceLdp,
        }
    }

    /// Default member for an algorithm name (`additive_noise`, `rotation`, ...).
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "additive_noise" | "additive" | "noise" => Perturbator::AdditiveNoise { sigma: 0.3 },
            "rotation" | "rp" => Perturbator::Rotation { iterations: 10 },
            "geometric" | "gp" => Perturbator::Geometric {
                iterations: 10,
                sigma: 0.3,
            },
            "laplace_ldp" | "laplace" | "ldp" => Perturbator::LaplaceLdp { epsilon: 1.0 },
            _ => return None,
        })
    }

    /// Multiplies the noise magnitude by `factor` (σ·f, ε/f); rotation is unchanged.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            Perturbator::AdditiveNoise { sigma } => Perturbator::AdditiveNoise { sigma: sigma * factor },
            Perturbator::Rotation { iterations } => Perturbator::Rotation { iterations },
            Perturbator::Geometric { iterations, sigma } => Perturbator::Geometric {
                iterations,
                sigma: sigma * factor,
            },
            Perturbator::LaplaceLdp { epsilon } => Perturbator::LaplaceLdp {
                epsilon: epsilon / factor,
            },
        }
    }

    pub fn apply(&self, d: &Dataset, seed: u64, bin_width: f64) -> Result<PerturbedInstance, PerturbError> {
        match *self {
            Perturbator::AdditiveNoise { sigma } => additive_noise(d, sigma, seed),
            Perturbator::Rotation { iterations } => rotation_perturb_with(d, iterations, bin_width, seed),
            Perturbator::Geometric { iterations, sigma } => geometric_perturb_with(
                d,
                &GeometricParams {
                    iterations,
                    sigma,
                    translation_range: 1.0,
                    bin_width,
                },
                seed,
            ),
            Perturbator::LaplaceLdp { epsilon } => laplace_perturb(d, epsilon, seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;
    use approx::assert_abs_diff_eq;

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    fn data(n: usize, d: usize, seed: u64) -> Dataset {
        synthetic::gaussian(n, d, seed).zscore_normalize().unwrap()
    }

    #[test]
    fn orthogonal_1x1_is_sign() {
        for s in 0..20 {
            let r = random_orthogonal(1, s);
            assert_eq!(r.matrix()[(0, 0)].abs(), 1.0);
        }
    }

    #[test]
    fn orthogonal_properties() {
        for (d, s) in [(3, 0), (3, 17), (7, 3), (12, 99)] {
            let r = random_orthogonal(d, s);
            let rtr = r.matrix().transpose() * r.matrix();
            assert!(max_abs(&(rtr - DMatrix::identity(d, d))) < 1e-9);
            assert_abs_diff_eq!(r.matrix().determinant().abs(), 1.0, epsilon = 1e-9);
        }
        assert_eq!(random_orthogonal(5, 42), random_orthogonal(5, 42));
        assert_ne!(random_orthogonal(5, 42), random_orthogonal(5, 43));
    }

    #[test]
    fn additive_noise_limits() {
        let d = data(200, 4, 1);
        let p = additive_noise(&d, 1e-12, 3).unwrap();
        assert!(max_abs(&(&p.features - d.features())) < 1e-9);
        assert_eq!(p, additive_noise(&d, 1e-12, 3).unwrap());
        assert!(matches!(additive_noise(&d, 0.0, 3), Err(PerturbError::Sigma(_))));
        let raw = synthetic::gaussian(20, 2, 0);
        assert!(matches!(additive_noise(&raw, 0.3, 3), Err(PerturbError::NotNormalized)));
    }

    #[test]
    fn additive_noise_empirical_std() {
        let d = data(10_000, 5, 2);
        let p = additive_noise(&d, 0.3, 8).unwrap();
        let diff = &p.features - d.features();
        for col in diff.column_iter() {
            let (_, std) = crate::dataset::mean_and_popstd(col.as_slice());
            assert!((0.29..=0.31).contains(&std), "std {std}");
        }
    }

    #[test]
    fn rotation_is_an_isometry() {
        let d = data(150, 4, 4);
        let p = rotation_perturb(&d, 3, 21).unwrap();
        let x = d.features();
        let y = &p.features;
        for i in 0..x.nrows() {
            assert_abs_diff_eq!(x.row(i).norm(), y.row(i).norm(), epsilon = 1e-9);
        }
        for i in (0..x.nrows()).step_by(7) {
            for j in (i + 1..x.nrows()).step_by(11) {
                let dx = (x.row(i) - x.row(j)).norm();
                let dy = (y.row(i) - y.row(j)).norm();
                assert_abs_diff_eq!(dx, dy, epsilon = 1e-9);
            }
        }
        let t = p.transform.as_ref().unwrap();
        assert!(max_abs(&(t.apply(x) - y)) < 1e-12);
    }

    #[test]
    fn more_rotation_iterations_never_worse() {
        let d = data(300, 5, 5);
        let one = rotation_perturb(&d, 1, 77).unwrap();
        let ten = rotation_perturb(&d, 10, 77).unwrap();
        assert!(ten.provenance.params["min_privacy"] >= one.provenance.params["min_privacy"]);
        assert_eq!(ten, rotation_perturb(&d, 10, 77).unwrap());
    }

    #[test]
    fn rotation_and_geometric_need_two_attributes() {
        let d = data(50, 1, 6);
        assert!(matches!(
            rotation_perturb(&d, 2, 0),
            Err(PerturbError::TooFewAttributes { .. })
        ));
        assert!(matches!(
            geometric_perturb(&d, 2, 0.3, 0),
            Err(PerturbError::TooFewAttributes { .. })
        ));
        let d2 = data(50, 2, 6);
        assert!(matches!(rotation_perturb(&d2, 0, 0), Err(PerturbError::Iterations)));
        assert!(matches!(geometric_perturb(&d2, 2, -1.0, 0), Err(PerturbError::Sigma(_))));
    }

    #[test]
    fn geometric_without_noise_or_translation_preserves_distances() {
        let d = data(120, 3, 7);
        let params = GeometricParams {
            iterations: 2,
            sigma: 1e-12,
            translation_range: 0.0,
            bin_width: 0.01,
        };
        let p = geometric_perturb_with(&d, &params, 5).unwrap();
        let (x, y) = (d.features(), &p.features);
        for i in (0..120).step_by(5) {
            for j in (i + 1..120).step_by(13) {
                let dx = (x.row(i) - x.row(j)).norm();
                let dy = (y.row(i) - y.row(j)).norm();
                assert_abs_diff_eq!(dx, dy, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn geometric_residual_recovers_sigma() {
        let d = data(10_000, 4, 8);
        let p = geometric_perturb(&d, 2, 0.3, 9).unwrap();
        let t = p.transform.as_ref().unwrap();
        assert!(t.translation.iter().all(|v| (-1.0..=1.0).contains(v)));
        let residual = &p.features - t.apply(d.features());
        let (_, std) = crate::dataset::mean_and_popstd(residual.as_slice());
        assert!((0.29..=0.31).contains(&std), "std {std}");
        assert_eq!(p, geometric_perturb(&d, 2, 0.3, 9).unwrap());
    }

    #[test]
    fn laplace_scale_and_vanishing_noise() {
        assert_eq!(laplace_scale(1.0), 2.0);
        let d = data(300, 3, 10);
        let p = laplace_perturb(&d, 1e12, 4).unwrap();
        let clamped = clamp_to_unit_range(d.features());
        assert!(max_abs(&(&p.features - &clamped)) < 1e-9);
        assert!(max_abs(&clamped) <= 1.0);
        assert!(matches!(laplace_perturb(&d, 0.0, 1), Err(PerturbError::Epsilon(_))));
        assert_eq!(p.provenance.params["scale"], 2e-12);
    }

    #[test]
    fn laplace_median_of_abs_noise() {
        // |L| ~ Exponential(1/b): P(|L| <= b ln 2) = 1/2
        let noise = laplace_noise(100_000, 2.0, 123);
        let cut = 2.0 * std::f64::consts::LN_2;
        let frac = noise.iter().filter(|v| v.abs() <= cut).count() as f64 / noise.len() as f64;
        assert!((0.49..=0.51).contains(&frac), "{frac}");
    }

    #[test]
    fn pool_member_shapes_and_reproducibility() {
        let d = data(80, 3, 11);
        for name in ["additive_noise", "rotation", "geometric", "laplace_ldp"] {
            let m = Perturbator::from_name(name).unwrap();
            let a = m.apply(&d, 5, 0.01).unwrap();
            assert_eq!(a.shape(), d.features().shape());
            assert!(a.features.iter().all(|v| v.is_finite()));
            assert_eq!(a.algorithm().name(), name);
            assert_eq!(a, m.apply(&d, 5, 0.01).unwrap());
        }
    }

    #[test]
    fn scaled_schedule() {
        assert_eq!(
            Perturbator::LaplaceLdp { epsilon: 1.0 }.scaled(2.0),
            Perturbator::LaplaceLdp { epsilon: 0.5 }
        );
        assert_eq!(
            Perturbator::AdditiveNoise { sigma: 0.3 }.scaled(0.5),
            Perturbator::AdditiveNoise { sigma: 0.15 }
        );
    }
}
