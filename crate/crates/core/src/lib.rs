//! Perturbation pool evaluation.
//!
//! A z-scored [`Dataset`] is perturbed by a pool of algorithms; every
//! perturbed instance is scored for entropy-based privacy, resistance to a
//! pool of reconstruction attacks, and classification utility. A Mamdani
//! fuzzy inference system folds the three scaled scores into one fuzzy index
//! and the orchestrator releases the best instance once it reaches a
//! threshold.

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attacks;
pub mod dataset;
pub mod fis;
pub mod orchestrator;
pub mod perturbation;
pub mod privacy_metric;
pub mod resistance_metric;
pub mod rng;
pub mod synthetic;
pub mod utility_metric;

pub use attacks::{AttackKind, AttackSpec, ReconstructionResult};
pub use dataset::{load_csv, stratified_folds, Dataset, DatasetError, LabelColumn, Normalization, SplitPlan};
pub use fis::{fuzzy_index, load_fis_config, FisModel};
pub use orchestrator::{evaluate_pool, release_loop, select_best, EvaluationReport, PoolConfig, UtilityMode};
pub use perturbation::{PerturbedInstance, Perturbator, Provenance};
pub use privacy_metric::{min_privacy_guarantee, scale_privacy, PrivacyGuarantee};
pub use resistance_metric::{scale_resistance, ResistanceGuarantee};
pub use utility_metric::{min_utility_guarantee, Classifier, UtilityResult};
