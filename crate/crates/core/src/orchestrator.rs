//! Pool evaluation and the release loop.
//!
//! Each round perturbs the dataset with every pool member, attacks every
//! instance with every attack, measures classifier utility, scales privacy
//! and resistance across the round's instances, scores each instance with the
//! FIS and keeps the best instance seen so far. The loop stops as soon as the
//! best fuzzy index reaches the threshold or the round budget is spent.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::attacks::{run_attack_pool, AttackKind, AttackSpec};
use crate::dataset::{stratified_folds, Dataset, DatasetError, Normalization};
use crate::fis::FisModel;
use crate::perturbation::{PerturbedInstance, Perturbator, Provenance};
use crate::privacy_metric::{min_privacy_guarantee, PrivacyGuarantee, DEFAULT_BIN_WIDTH};
use crate::resistance_metric::{scale_resistance, ResistanceGuarantee};
use crate::rng::derive_seed;
use crate::utility_metric::{min_utility_guarantee, Classifier, UtilityResult};

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("invalid pool configuration: {0}")]
    Config(String),
    #[error("dataset must be z-score normalized before evaluation")]
    NotNormalized,
    #[error("cannot build the evaluation split: {0}")]
    Split(#[from] DatasetError),
    #[error("report has no scored instance")]
    NoScoredInstance,
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

/// How classifier accuracy enters the FIS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityMode {
    /// The smallest accuracy over the classifier pool.
    #[default]
    PoolMinimum,
    /// One FI per classifier; the instance is ranked by the smallest of them.
    PerApplication,
}

pub const DEFAULT_FI_THRESHOLD: f64 = 0.8;
pub const DEFAULT_MAX_ROUNDS: usize = 3;
pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_SCHEDULE: [f64; 3] = [1.0, 0.75, 1.25];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolConfig {
    pub perturbators: Vec<Perturbator>,
    pub attacks: Vec<AttackSpec>,
    pub classifiers: Vec<Classifier>,
    #[serde(default)]
    pub fis: FisModel,
    pub fi_threshold: f64,
    pub max_rounds: usize,
    pub seed: u64,
    pub bin_width: f64,
    pub n_folds: usize,
    #[serde(default)]
    pub utility_mode: UtilityMode,
    /// Noise multipliers applied to the pool in successive rounds, cycling.
    pub schedule: Vec<f64>,
}

impl Default for PoolConfig {
    fn default() -> Self {
        Self {
            perturbators: ["additive_noise", "rotation", "geometric", "laplace_ldp"]
                .iter()
                .map(|n| Perturbator::from_name(n).expect("known"))
                .collect(),
            attacks: ["naive", "known_io", "ica"]
                .iter()
                .map(|n| AttackSpec::from_name(n).expect("known"))
                .collect(),
            classifiers: Classifier::default_pool(),
            fis: FisModel::default(),
            fi_threshold: DEFAULT_FI_THRESHOLD,
            max_rounds: DEFAULT_MAX_ROUNDS,
            seed: 0,
            bin_width: DEFAULT_BIN_WIDTH,
            n_folds: DEFAULT_FOLDS,
            utility_mode: UtilityMode::PoolMinimum,
            schedule: DEFAULT_SCHEDULE.to_vec(),
        }
    }
}

impl PoolConfig {
    pub fn validate(&self) -> Result<(), OrchestratorError> {
        let bad = |m: &str| Err(OrchestratorError::Config(m.to_string()));
        if self.perturbators.is_empty() {
            return bad("perturbator pool is empty");
        }
        if self.attacks.is_empty() {
            return bad("attack pool is empty");
        }
        if self.classifiers.is_empty() {
            return bad("classifier pool is empty");
        }
        if !self.fi_threshold.is_finite() || self.fi_threshold < 0.0 {
            return bad("fi_threshold must be a finite non-negative number");
        }
        if self.max_rounds == 0 {
            return bad("max_rounds must be at least 1");
        }
        if !(self.bin_width.is_finite() && self.bin_width > 0.0 && self.bin_width <= 1.0) {
            return bad("bin_width must lie in (0, 1]");
        }
        if self.n_folds < 2 {
            return bad("n_folds must be at least 2");
        }
        if self.schedule.is_empty() || self.schedule.iter().any(|f| !f.is_finite() || *f <= 0.0) {
            return bad("schedule must be a nonempty list of positive factors");
        }
        for c in &self.classifiers {
            c.validate().map_err(|e| OrchestratorError::Config(e.to_string()))?;
        }
        self.fis
            .validate()
            .map_err(|e| OrchestratorError::Config(format!("fis: {e}")))?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config is serializable");
        hex::encode(Sha256::digest(json))
    }

    pub fn schedule_factor(&self, round: usize) -> f64 {
        self.schedule[round % self.schedule.len()]
    }

    pub fn round_seed(&self, round: usize) -> u64 {
        self.seed.wrapping_add(round as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum InstanceStatus {
    Scored,
    Failed { stage: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionLog {
    pub attack: AttackKind,
    pub assumptions: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierFi {
    pub classifier: String,
    pub accuracy: f64,
    pub fi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub round: usize,
    pub index: usize,
    pub perturbator: Perturbator,
    pub seed: u64,
    pub status: InstanceStatus,
    pub provenance: Option<Provenance>,
    pub privacy: Option<PrivacyGuarantee>,
    pub reconstructions: Vec<ReconstructionLog>,
    pub resistance: Option<ResistanceGuarantee>,
    pub utility: Option<UtilityResult>,
    pub per_classifier_fi: Vec<ClassifierFi>,
    pub fi: Option<f64>,
    /// No FIS rule fired for this instance; `fi` is the fallback value.
    pub fis_degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    pub seed: u64,
    pub schedule_factor: f64,
    pub instances: Vec<InstanceReport>,
    /// Every scored instance was fully reconstructed by some attack.
    pub resistance_degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceRef {
    pub round: usize,
    pub index: usize,
    pub fi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunProvenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub dataset_id: String,
    pub dataset_sha256: String,
    pub round_seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub provenance: RunProvenance,
    pub config: PoolConfig,
    pub rounds: Vec<RoundReport>,
    pub winner: Option<InstanceRef>,
    pub rounds_used: usize,
    pub fi_threshold: f64,
    pub released: bool,
}

impl EvaluationReport {
    pub fn per_instance(&self) -> impl Iterator<Item = &InstanceReport> {
        self.rounds.iter().flat_map(|r| r.instances.iter())
    }

    pub fn instance(&self, r: InstanceRef) -> Option<&InstanceReport> {
        self.rounds.get(r.round)?.instances.get(r.index)
    }

    pub fn to_json(&self) -> Result<String, OrchestratorError> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn failed(stage: &str, e: impl std::fmt::Display) -> InstanceStatus {
    InstanceStatus::Failed {
        stage: stage.to_string(),
        message: e.to_string(),
    }
}

fn dataset_digest(d: &Dataset) -> String {
    let mut buf = Vec::new();
    d.write_csv(&mut buf).expect("writing to memory cannot fail");
    hex::encode(Sha256::digest(buf))
}

/// Perturb, attack and measure one pool member. Scaling and the FIS need the
/// whole round and happen afterwards.
fn measure_instance(
    d: &Dataset,
    cfg: &PoolConfig,
    round: usize,
    index: usize,
    perturbator: &Perturbator,
    seed: u64,
    plan: &crate::dataset::SplitPlan,
) -> (InstanceReport, Option<PerturbedInstance>) {
    let mut report = InstanceReport {
        round,
        index,
        perturbator: perturbator.clone(),
        seed,
        status: InstanceStatus::Scored,
        provenance: None,
        privacy: None,
        reconstructions: Vec::new(),
        resistance: None,
        utility: None,
        per_classifier_fi: Vec::new(),
        fi: None,
        fis_degenerate: false,
    };
    let instance = match perturbator.apply(d, derive_seed(seed, 0), cfg.bin_width) {
        Ok(p) => p,
        Err(e) => {
            report.status = failed("perturbation", e);
            return (report, None);
        }
    };
    report.provenance = Some(instance.provenance.clone());

    match min_privacy_guarantee(d, &instance.features, cfg.bin_width) {
        Ok(g) => report.privacy = Some(g),
        Err(e) => {
            report.status = failed("privacy", e);
            return (report, Some(instance));
        }
    }

    match run_attack_pool(&instance, d, &cfg.attacks, derive_seed(seed, 1)) {
        Ok(recons) => {
            report.reconstructions = recons
                .iter()
                .map(|r| ReconstructionLog {
                    attack: r.attack,
                    assumptions: r.assumptions.clone(),
                })
                .collect();
            match ResistanceGuarantee::from_reconstructions(d, &recons) {
                Ok(g) => report.resistance = Some(g),
                Err(e) => {
                    report.status = failed("resistance", e);
                    return (report, Some(instance));
                }
            }
        }
        Err(e) => {
            report.status = failed("attack", e);
            return (report, Some(instance));
        }
    }

    match min_utility_guarantee(&instance.features, &instance.labels, &cfg.classifiers, plan) {
        Ok(u) => report.utility = Some(u),
        Err(e) => report.status = failed("utility", e),
    }
    (report, Some(instance))
}

/// Pool maximum scaling that tolerates an all-zero pool.
fn scale_by_max(values: &[f64]) -> Vec<f64> {
    let max = values.iter().copied().fold(0.0, f64::max);
    values
        .iter()
        .map(|&v| {
            if max <= 0.0 {
                0.0
            } else if v == max {
                1.0
            } else {
                v / max
            }
        })
        .collect()
}

fn evaluate_round(
    d: &Dataset,
    cfg: &PoolConfig,
    round: usize,
) -> Result<(RoundReport, Vec<Option<PerturbedInstance>>), OrchestratorError> {
    let round_seed = cfg.round_seed(round);
    let factor = cfg.schedule_factor(round);
    let plan = stratified_folds(d, cfg.n_folds, derive_seed(round_seed, u64::MAX))?;
    let pool: Vec<Perturbator> = cfg.perturbators.iter().map(|p| p.scaled(factor)).collect();

    let measured: Vec<(InstanceReport, Option<PerturbedInstance>)> = pool
        .par_iter()
        .enumerate()
        .map(|(i, p)| measure_instance(d, cfg, round, i, p, derive_seed(round_seed, i as u64), &plan))
        .collect();
    let (mut instances, perturbed): (Vec<_>, Vec<_>) = measured.into_iter().unzip();

    let scored: Vec<usize> = instances
        .iter()
        .enumerate()
        .filter(|(_, r)| r.status == InstanceStatus::Scored)
        .map(|(i, _)| i)
        .collect();
    let privacy_min: Vec<f64> = scored
        .iter()
        .map(|&i| instances[i].privacy.as_ref().expect("scored").minimum)
        .collect();
    let resistance_std: Vec<f64> = scored
        .iter()
        .map(|&i| instances[i].resistance.as_ref().expect("scored").overall_min_std)
        .collect();
    let scaled_privacy = scale_by_max(&privacy_min);
    let (scaled_resistance, resistance_degenerate) = if scored.is_empty() {
        (Vec::new(), false)
    } else {
        match scale_resistance(&resistance_std) {
            Ok(s) => (s.values, s.degenerate),
            Err(_) => (scale_by_max(&resistance_std), false),
        }
    };

    for (k, &i) in scored.iter().enumerate() {
        let (p, r) = (scaled_privacy[k], scaled_resistance[k]);
        let inst = &mut instances[i];
        inst.privacy.as_mut().expect("scored").scaled_minimum = Some(p);
        inst.resistance.as_mut().expect("scored").scaled = Some(r);
        let utility = inst.utility.as_ref().expect("scored").clone();
        let pooled = match cfg.fis.infer(p, r, utility.minimum) {
            Ok(inf) => inf,
            Err(e) => {
                inst.status = failed("fis", e);
                continue;
            }
        };
        let mut per_app = Vec::with_capacity(utility.per_classifier.len());
        let mut degenerate = pooled.degenerate;
        for c in &utility.per_classifier {
            match cfg.fis.infer(p, r, c.accuracy) {
                Ok(inf) => {
                    degenerate |= inf.degenerate && cfg.utility_mode == UtilityMode::PerApplication;
                    per_app.push(ClassifierFi {
                        classifier: c.classifier.clone(),
                        accuracy: c.accuracy,
                        fi: inf.fi,
                    });
                }
                Err(e) => {
                    inst.status = failed("fis", e);
                    break;
                }
            }
        }
        if inst.status != InstanceStatus::Scored {
            continue;
        }
        inst.fi = Some(match cfg.utility_mode {
            UtilityMode::PoolMinimum => pooled.fi,
            UtilityMode::PerApplication => per_app.iter().map(|c| c.fi).fold(f64::INFINITY, f64::min),
        });
        inst.per_classifier_fi = per_app;
        inst.fis_degenerate = degenerate;
    }

    Ok((
        RoundReport {
            round,
            seed: round_seed,
            schedule_factor: factor,
            instances,
            resistance_degenerate,
        },
        perturbed,
    ))
}

fn best_in_round(round: &RoundReport) -> Option<InstanceRef> {
    let mut best: Option<InstanceRef> = None;
    for inst in &round.instances {
        if let Some(fi) = inst.fi {
            if best.is_none_or(|b| fi > b.fi) {
                best = Some(InstanceRef {
                    round: inst.round,
                    index: inst.index,
                    fi,
                });
            }
        }
    }
    best
}

/// Highest-FI instance across all rounds; ties go to the earlier round, then
/// to the lower pool index.
pub fn select_best(report: &EvaluationReport) -> Result<InstanceRef, OrchestratorError> {
    report
        .rounds
        .iter()
        .filter_map(best_in_round)
        .fold(None, |acc: Option<InstanceRef>, r| match acc {
            Some(a) if a.fi >= r.fi => Some(a),
            _ => Some(r),
        })
        .ok_or(OrchestratorError::NoScoredInstance)
}

/// Index of the largest value; ties go to the lowest index. NaN never wins.
pub fn argmax_first(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if !v.is_nan() && best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

fn check_inputs(d: &Dataset, cfg: &PoolConfig) -> Result<(), OrchestratorError> {
    cfg.validate()?;
    if d.normalization() != Normalization::Zscored {
        return Err(OrchestratorError::NotNormalized);
    }
    Ok(())
}

fn run_provenance(d: &Dataset, cfg: &PoolConfig, rounds: usize) -> RunProvenance {
    RunProvenance {
        tool: "ppaas".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config_hash: cfg.hash(),
        dataset_id: d.id().to_string(),
        dataset_sha256: dataset_digest(d),
        round_seeds: (0..rounds).map(|r| cfg.round_seed(r)).collect(),
    }
}

/// One round over the pool, no re-application.
pub fn evaluate_pool(d: &Dataset, cfg: &PoolConfig) -> Result<EvaluationReport, OrchestratorError> {
    check_inputs(d, cfg)?;
    let (round, _) = evaluate_round(d, cfg, 0)?;
    let winner = best_in_round(&round);
    Ok(EvaluationReport {
        provenance: run_provenance(d, cfg, 1),
        config: cfg.clone(),
        released: winner.is_some_and(|w| w.fi >= cfg.fi_threshold),
        rounds: vec![round],
        winner,
        rounds_used: 1,
        fi_threshold: cfg.fi_threshold,
    })
}

#[derive(Debug, Clone)]
pub struct ReleaseOutcome {
    pub report: EvaluationReport,
    /// Best instance over all rounds, attached even when the threshold was missed.
    pub best: Option<PerturbedInstance>,
}

impl ReleaseOutcome {
    /// The instance to hand to the requester, present only on success.
    pub fn released(&self) -> Option<&PerturbedInstance> {
        if self.report.released {
            self.best.as_ref()
        } else {
            None
        }
    }
}

/// Re-applies the pool with fresh seeds and scheduled noise levels until the
/// best fuzzy index reaches `fi_threshold` or `max_rounds` is reached.
pub fn release_loop(d: &Dataset, cfg: &PoolConfig) -> Result<ReleaseOutcome, OrchestratorError> {
    check_inputs(d, cfg)?;
    let mut rounds = Vec::new();
    let mut winner: Option<InstanceRef> = None;
    let mut best: Option<PerturbedInstance> = None;
    let mut released = false;
    for r in 0..cfg.max_rounds {
        let (round, mut perturbed) = evaluate_round(d, cfg, r)?;
        if let Some(candidate) = best_in_round(&round) {
            if winner.is_none_or(|w| candidate.fi > w.fi) {
                winner = Some(candidate);
                best = perturbed[candidate.index].take();
            }
        }
        rounds.push(round);
        if winner.is_some_and(|w| w.fi >= cfg.fi_threshold) {
            released = true;
            break;
        }
    }
    let rounds_used = rounds.len();
    Ok(ReleaseOutcome {
        report: EvaluationReport {
            provenance: run_provenance(d, cfg, rounds_used),
            config: cfg.clone(),
            rounds,
            winner,
            rounds_used,
            fi_threshold: cfg.fi_threshold,
            released,
        },
        best,
    })
}

fn params_string(p: &Option<Provenance>, perturbator: &Perturbator) -> String {
    match p {
        Some(p) => p
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";"),
        None => serde_json::to_string(perturbator).unwrap_or_default(),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// One row per instance of every round, best FI first. Failed instances
/// trail in pool order.
pub fn rank_table_csv(report: &EvaluationReport) -> String {
    let mut rows: Vec<&InstanceReport> = report.per_instance().collect();
    rows.sort_by(|a, b| match (a.fi, b.fi) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    let mut out = String::from(
        "rank,round,index,algorithm,params,min_privacy,scaled_privacy,min_std,scaled_resistance,min_accuracy,fi,status\n",
    );
    for (rank, r) in rows.iter().enumerate() {
        let status = match &r.status {
            InstanceStatus::Scored => "scored".to_string(),
            InstanceStatus::Failed { stage, .. } => format!("failed:{stage}"),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},\"{}\",{},{},{},{},{},{},{}",
            rank + 1,
            r.round,
            r.index,
            r.perturbator.algorithm().name(),
            params_string(&r.provenance, &r.perturbator).replace('"', "'"),
            fmt_opt(r.privacy.as_ref().map(|p| p.minimum)),
            fmt_opt(r.privacy.as_ref().and_then(|p| p.scaled_minimum)),
            fmt_opt(r.resistance.as_ref().map(|p| p.overall_min_std)),
            fmt_opt(r.resistance.as_ref().and_then(|p| p.scaled)),
            fmt_opt(r.utility.as_ref().map(|u| u.minimum)),
            fmt_opt(r.fi),
            status,
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    fn small_cfg() -> PoolConfig {
        PoolConfig {
            perturbators: vec![
                Perturbator::AdditiveNoise { sigma: 0.3 },
                Perturbator::Rotation { iterations: 2 },
                Perturbator::Geometric {
                    iterations: 2,
                    sigma: 0.3,
                },
                Perturbator::LaplaceLdp { epsilon: 1.0 },
            ],
            max_rounds: 1,
            seed: 11,
            ..PoolConfig::default()
        }
    }

    fn data() -> Dataset {
        synthetic::two_blobs(120, 3, 6.0, 5).zscore_normalize().unwrap()
    }

    #[test]
    fn argmax_ties_go_first() {
        assert_eq!(argmax_first(&[0.2744, 0.2023, 0.8104, 0.8190]), Some(3));
        assert_eq!(argmax_first(&[0.8486, 0.8480]), Some(0));
        assert_eq!(argmax_first(&[0.5, 0.5]), Some(0));
        assert_eq!(argmax_first(&[]), None);
        assert_eq!(argmax_first(&[f64::NAN, 0.1]), Some(1));
    }

    #[test]
    fn pool_is_complete_and_scaled() {
        let d = data();
        let cfg = small_cfg();
        let rep = evaluate_pool(&d, &cfg).unwrap();
        let round = &rep.rounds[0];
        assert_eq!(round.instances.len(), 4);
        let recons: usize = round.instances.iter().map(|i| i.reconstructions.len()).sum();
        assert_eq!(recons, 12);
        let sp: Vec<f64> = round
            .instances
            .iter()
            .map(|i| i.privacy.as_ref().unwrap().scaled_minimum.unwrap())
            .collect();
        assert!(sp.contains(&1.0));
        assert!(sp.iter().all(|v| (0.0..=1.0).contains(v)));
        let best = select_best(&rep).unwrap();
        let fis: Vec<f64> = round.instances.iter().map(|i| i.fi.unwrap()).collect();
        assert_eq!(Some(best.index), argmax_first(&fis));
        assert_eq!(rep.winner, Some(best));
        for inst in &round.instances {
            assert_eq!(inst.per_classifier_fi.len(), 3);
        }
    }

    #[test]
    fn singleton_pool_wins() {
        let d = data();
        let cfg = PoolConfig {
            perturbators: vec![Perturbator::AdditiveNoise { sigma: 0.3 }],
            ..small_cfg()
        };
        let rep = evaluate_pool(&d, &cfg).unwrap();
        assert_eq!(select_best(&rep).unwrap().index, 0);
    }

    #[test]
    fn thresholds_control_release() {
        let d = data();
        let cfg = PoolConfig {
            fi_threshold: 0.0,
            max_rounds: 3,
            ..small_cfg()
        };
        let out = release_loop(&d, &cfg).unwrap();
        assert!(out.report.released);
        assert_eq!(out.report.rounds_used, 1);
        assert!(out.released().is_some());

        let cfg = PoolConfig {
            fi_threshold: 1.01,
            max_rounds: 2,
            ..small_cfg()
        };
        let out = release_loop(&d, &cfg).unwrap();
        assert!(!out.report.released);
        assert_eq!(out.report.rounds_used, 2);
        assert!(out.released().is_none());
        assert!(out.best.is_some());
        let w = out.report.winner.unwrap();
        assert_eq!(select_best(&out.report).unwrap(), w);
        assert_eq!(out.report.rounds[1].schedule_factor, 0.75);
    }

    #[test]
    fn reports_are_reproducible() {
        let d = data();
        let cfg = small_cfg();
        let a = release_loop(&d, &cfg).unwrap();
        let b = release_loop(&d, &cfg).unwrap();
        assert_eq!(a.report.to_json().unwrap(), b.report.to_json().unwrap());
        assert_eq!(rank_table_csv(&a.report), rank_table_csv(&b.report));
        assert_eq!(
            a.best.as_ref().unwrap().to_csv_bytes(),
            b.best.as_ref().unwrap().to_csv_bytes()
        );
    }

    #[test]
    fn failures_are_isolated() {
        let d = data();
        let cfg = PoolConfig {
            perturbators: vec![
                Perturbator::AdditiveNoise { sigma: -1.0 },
                Perturbator::AdditiveNoise { sigma: 0.3 },
            ],
            ..small_cfg()
        };
        let rep = evaluate_pool(&d, &cfg).unwrap();
        let bad = &rep.rounds[0].instances[0];
        assert!(matches!(&bad.status, InstanceStatus::Failed { stage, .. } if stage == "perturbation"));
        assert!(bad.fi.is_none());
        assert_eq!(rep.winner.unwrap().index, 1);
        let table = rank_table_csv(&rep);
        assert_eq!(table.lines().count(), 3);
        assert!(table.lines().last().unwrap().ends_with("failed:perturbation"));
    }

    #[test]
    fn rejects_bad_inputs() {
        let raw = synthetic::two_blobs(40, 2, 6.0, 1);
        assert!(matches!(evaluate_pool(&raw, &small_cfg()), Err(OrchestratorError::NotNormalized)));
        let d = raw.zscore_normalize().unwrap();
        for cfg in [
            PoolConfig {
                perturbators: vec![],
                ..small_cfg()
            },
            PoolConfig {
                max_rounds: 0,
                ..small_cfg()
            },
            PoolConfig {
                schedule: vec![],
                ..small_cfg()
            },
        ] {
            assert!(matches!(evaluate_pool(&d, &cfg), Err(OrchestratorError::Config(_))));
        }
    }

    #[test]
    fn per_application_mode_uses_smallest_fi() {
        let d = data();
        let cfg = PoolConfig {
            utility_mode: UtilityMode::PerApplication,
            ..small_cfg()
        };
        let rep = evaluate_pool(&d, &cfg).unwrap();
        for inst in &rep.rounds[0].instances {
            let m = inst.per_classifier_fi.iter().map(|c| c.fi).fold(f64::INFINITY, f64::min);
            assert_eq!(inst.fi.unwrap(), m);
        }
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = PoolConfig::default();
        let b = PoolConfig {
            seed: 1,
            ..PoolConfig::default()
        };
        assert_eq!(a.hash(), PoolConfig::default().hash());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
