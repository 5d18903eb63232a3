//! Classification utility of a (perturbed) feature matrix: stratified
//! cross-validated accuracy for a pool of small built-in classifiers.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::SplitPlan;

#[derive(Debug, Error, PartialEq)]
pub enum UtilityError {
    #[error("length mismatch: {0} predictions vs {1} labels")]
    LengthMismatch(usize, usize),
    #[error("cannot score zero predictions")]
    Empty,
    #[error("cross-validation needs at least 2 folds, plan has {0}")]
    TooFewFolds(usize),
    #[error("split plan covers {plan} records, data has {data}")]
    PlanMismatch { plan: usize, data: usize },
    #[error("fold {0} is empty")]
    EmptyFold(usize),
    #[error("invalid hyperparameter: {0}")]
    Hyperparameter(String),
    #[error("classifier pool is empty")]
    EmptyPool,
}

/// Fraction of exact matches; `(TP + TN) / total` in the binary case.
pub fn accuracy<T: PartialEq>(predictions: &[T], truth: &[T]) -> Result<f64, UtilityError> {
    if predictions.len() != truth.len() {
        return Err(UtilityError::LengthMismatch(predictions.len(), truth.len()));
    }
    if truth.is_empty() {
        return Err(UtilityError::Empty);
    }
    let hits = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classifier {
    Knn {
        #[serde(default = "default_k")]
        k: usize,
    },
    GaussianNb {
        #[serde(default = "default_var_floor")]
        var_floor: f64,
    },
    DecisionTree {
        #[serde(default = "default_max_depth")]
        max_depth: usize,
        #[serde(default = "default_min_leaf")]
        min_leaf: usize,
    },
}

fn default_k() -> usize {
    1
}
fn default_var_floor() -> f64 {
    1e-9
}
fn default_max_depth() -> usize {
    12
}
fn default_min_leaf() -> usize {
    2
}

impl Classifier {
    pub fn knn() -> Self {
        Classifier::Knn { k: default_k() }
    }

    pub fn gaussian_nb() -> Self {
        Classifier::GaussianNb {
            var_floor: default_var_floor(),
        }
    }

    pub fn decision_tree() -> Self {
        Classifier::DecisionTree {
            max_depth: default_max_depth(),
            min_leaf: default_min_leaf(),
        }
    }

    pub fn default_pool() -> Vec<Self> {
        vec![Self::knn(), Self::gaussian_nb(), Self::decision_tree()]
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "knn" | "ibk" => Self::knn(),
            "gaussian_nb" | "nb" | "naive_bayes" => Self::gaussian_nb(),
            "decision_tree" | "tree" | "cart" => Self::decision_tree(),
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Classifier::Knn { .. } => "knn",
            Classifier::GaussianNb { .. } => "gaussian_nb",
            Classifier::DecisionTree { .. } => "decision_tree",
        }
    }

    pub fn validate(&self) -> Result<(), UtilityError> {
        match *self {
            Classifier::Knn { k: 0 } => Err(UtilityError::Hyperparameter("knn k must be >= 1".into())),
            Classifier::GaussianNb { var_floor } if !(var_floor > 0.0) => {
                Err(UtilityError::Hyperparameter("var_floor must be > 0".into()))
            }
            Classifier::DecisionTree { max_depth: 0, .. } => {
                Err(UtilityError::Hyperparameter("max_depth must be >= 1".into()))
            }
            Classifier::DecisionTree { min_leaf: 0, .. } => {
                Err(UtilityError::Hyperparameter("min_leaf must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Trains on `train` rows and predicts class indices for `test` rows.
    pub fn fit_predict(
        &self,
        x: &DMatrix<f64>,
        y: &[usize],
        n_classes: usize,
        train: &[usize],
        test: &[usize],
    ) -> Vec<usize> {
        match *self {
            Classifier::Knn { k } => knn_predict(x, y, n_classes, train, test, k),
            Classifier::GaussianNb { var_floor } => GaussianNb::fit(x, y, n_classes, train, var_floor).predict(x, test),
            Classifier::DecisionTree { max_depth, min_leaf } => {
                let tree = Tree::fit(x, y, n_classes, train, max_depth, min_leaf);
                test.iter().map(|&i| tree.predict(x, i)).collect()
            }
        }
    }
}

fn sq_dist(x: &DMatrix<f64>, a: usize, b: usize) -> f64 {
    (0..x.ncols()).map(|j| (x[(a, j)] - x[(b, j)]).powi(2)).sum()
}

fn knn_predict(x: &DMatrix<f64>, y: &[usize], n_classes: usize, train: &[usize], test: &[usize], k: usize) -> Vec<usize> {
    let k = k.min(train.len());
    let mut dists: Vec<(f64, usize)> = Vec::with_capacity(train.len());
    test.iter()
        .map(|&t| {
            dists.clear();
            dists.extend(train.iter().map(|&i| (sq_dist(x, t, i), i)));
            dists.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let nearest = &mut dists[..k];
            nearest.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut votes = vec![0usize; n_classes];
            for &(_, i) in nearest.iter() {
                votes[y[i]] += 1;
            }
            let top = *votes.iter().max().expect("n_classes >= 1");
            // ties go to the class of the closest tied neighbour
            nearest
                .iter()
                .map(|&(_, i)| y[i])
                .find(|&c| votes[c] == top)
                .expect("some neighbour has the top vote")
        })
        .collect()
}

struct GaussianNb {
    log_prior: Vec<Option<f64>>,
    mean: DMatrix<f64>,
    var: DMatrix<f64>,
}

impl GaussianNb {
    fn fit(x: &DMatrix<f64>, y: &[usize], n_classes: usize, train: &[usize], var_floor: f64) -> Self {
        let d = x.ncols();
        let mut count = vec![0usize; n_classes];
        let mut mean = DMatrix::<f64>::zeros(n_classes, d);
        for &i in train {
            count[y[i]] += 1;
            for j in 0..d {
                mean[(y[i], j)] += x[(i, j)];
            }
        }
        for c in 0..n_classes {
            if count[c] > 0 {
                for j in 0..d {
                    mean[(c, j)] /= count[c] as f64;
                }
            }
        }
        let mut var = DMatrix::<f64>::zeros(n_classes, d);
        for &i in train {
            for j in 0..d {
                var[(y[i], j)] += (x[(i, j)] - mean[(y[i], j)]).powi(2);
            }
        }
        for c in 0..n_classes {
            for j in 0..d {
                var[(c, j)] = if count[c] > 0 { var[(c, j)] / count[c] as f64 } else { 0.0 } + var_floor;
            }
        }
        let n = train.len() as f64;
        let log_prior = count
            .iter()
            .map(|&c| (c > 0).then(|| (c as f64 / n).ln()))
            .collect();
        Self { log_prior, mean, var }
    }

    fn predict(&self, x: &DMatrix<f64>, test: &[usize]) -> Vec<usize> {
        test.iter()
            .map(|&i| {
                let mut best: Option<(f64, usize)> = None;
                for (c, lp) in self.log_prior.iter().enumerate() {
                    let Some(lp) = lp else { continue };
                    let mut score = *lp;
                    for j in 0..x.ncols() {
                        let v = self.var[(c, j)];
                        let diff = x[(i, j)] - self.mean[(c, j)];
                        score -= 0.5 * (std::f64::consts::TAU * v).ln() + diff * diff / (2.0 * v);
                    }
                    if best.is_none_or(|b| score > b.0) {
                        best = Some((score, c));
                    }
                }
                best.map_or(0, |b| b.1)
            })
            .collect()
    }
}

enum Node {
    Leaf(usize),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

/// CART with Gini impurity and midpoint thresholds.
struct Tree {
    root: Node,
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &v) in counts.iter().enumerate() {
        if v > counts[best] {
            best = c;
        }
    }
    best
}

impl Tree {
    fn fit(x: &DMatrix<f64>, y: &[usize], n_classes: usize, train: &[usize], max_depth: usize, min_leaf: usize) -> Self {
        let mut rows = train.to_vec();
        Self {
            root: Self::grow(x, y, n_classes, &mut rows, 0, max_depth, min_leaf),
        }
    }

    fn grow(
        x: &DMatrix<f64>,
        y: &[usize],
        n_classes: usize,
        rows: &mut [usize],
        depth: usize,
        max_depth: usize,
        min_leaf: usize,
    ) -> Node {
        let n = rows.len();
        let mut counts = vec![0usize; n_classes];
        for &i in rows.iter() {
            counts[y[i]] += 1;
        }
        let leaf = majority(&counts);
        if depth >= max_depth || n < 2 * min_leaf || counts[leaf] == n {
            return Node::Leaf(leaf);
        }
        let parent = gini(&counts, n);
        let mut best: Option<(f64, usize, f64)> = None;
        for j in 0..x.ncols() {
            rows.sort_by(|&a, &b| x[(a, j)].total_cmp(&x[(b, j)]).then(a.cmp(&b)));
            let mut left = vec![0usize; n_classes];
            for split in 1..n {
                left[y[rows[split - 1]]] += 1;
                let (lo, hi) = (x[(rows[split - 1], j)], x[(rows[split], j)]);
                if lo == hi || split < min_leaf || n - split < min_leaf {
                    continue;
                }
                let right: Vec<usize> = counts.iter().zip(&left).map(|(t, l)| t - l).collect();
                let impurity = (split as f64 * gini(&left, split) + (n - split) as f64 * gini(&right, n - split)) / n as f64;
                if best.is_none_or(|b| impurity < b.0 - 1e-12) {
                    best = Some((impurity, j, lo + (hi - lo) / 2.0));
                }
            }
        }
        let Some((impurity, feature, threshold)) = best else {
            return Node::Leaf(leaf);
        };
        if impurity >= parent - 1e-12 {
            return Node::Leaf(leaf);
        }
        let mut left_rows: Vec<usize> = rows.iter().copied().filter(|&i| x[(i, feature)] <= threshold).collect();
        let mut right_rows: Vec<usize> = rows.iter().copied().filter(|&i| x[(i, feature)] > threshold).collect();
        Node::Split {
            feature,
            threshold,
            left: Box::new(Self::grow(x, y, n_classes, &mut left_rows, depth + 1, max_depth, min_leaf)),
            right: Box::new(Self::grow(x, y, n_classes, &mut right_rows, depth + 1, max_depth, min_leaf)),
        }
    }

    fn predict(&self, x: &DMatrix<f64>, i: usize) -> usize {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(c) => return *c,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[(i, *feature)] <= *threshold { left } else { right };
                }
            }
        }
    }
}

/// Maps string labels to indices into the sorted list of distinct labels.
pub fn encode_labels(labels: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut classes = labels.to_vec();
    classes.sort();
    classes.dedup();
    let y = labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label present"))
        .collect();
    (y, classes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvAccuracy {
    pub accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    /// Folds whose training part lacked a class that occurs in the test part.
    pub missing_class_folds: usize,
}

/// Mean held-out accuracy over the folds of `plan`.
pub fn cross_validated_accuracy(
    x: &DMatrix<f64>,
    labels: &[String],
    classifier: &Classifier,
    plan: &SplitPlan,
) -> Result<CvAccuracy, UtilityError> {
    classifier.validate()?;
    if plan.n_folds < 2 {
        return Err(UtilityError::TooFewFolds(plan.n_folds));
    }
    if plan.fold_assignments.len() != x.nrows() || labels.len() != x.nrows() {
        return Err(UtilityError::PlanMismatch {
            plan: plan.fold_assignments.len(),
            data: x.nrows(),
        });
    }
    let (y, classes) = encode_labels(labels);
    let mut fold_accuracies = Vec::with_capacity(plan.n_folds);
    let mut missing_class_folds = 0;
    for fold in 0..plan.n_folds {
        let (train, test) = plan.train_test(fold);
        if test.is_empty() || train.is_empty() {
            return Err(UtilityError::EmptyFold(fold));
        }
        let mut seen = vec![false; classes.len()];
        for &i in &train {
            seen[y[i]] = true;
        }
        if test.iter().any(|&i| !seen[y[i]]) {
            missing_class_folds += 1;
        }
        let predicted = classifier.fit_predict(x, &y, classes.len(), &train, &test);
        let truth: Vec<usize> = test.iter().map(|&i| y[i]).collect();
        fold_accuracies.push(accuracy(&predicted, &truth)?);
    }
    let accuracy = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
    Ok(CvAccuracy {
        accuracy,
        fold_accuracies,
        missing_class_folds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierAccuracy {
    pub classifier: String,
    pub accuracy: f64,
    pub missing_class_folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityResult {
    pub per_classifier: Vec<ClassifierAccuracy>,
    pub minimum: f64,
    pub folds: usize,
    pub seed: u64,
}

impl UtilityResult {
    pub fn accuracy_of(&self, classifier: &str) -> Option<f64> {
        self.per_classifier
            .iter()
            .find(|c| c.classifier == classifier)
            .map(|c| c.accuracy)
    }
}

pub fn min_utility_guarantee(
    x: &DMatrix<f64>,
    labels: &[String],
    pool: &[Classifier],
    plan: &SplitPlan,
) -> Result<UtilityResult, UtilityError> {
    if pool.is_empty() {
        return Err(UtilityError::EmptyPool);
    }
    let per_classifier = pool
        .iter()
        .map(|c| {
            let cv = cross_validated_accuracy(x, labels, c, plan)?;
            Ok(ClassifierAccuracy {
                classifier: c.name().to_string(),
                accuracy: cv.accuracy,
                missing_class_folds: cv.missing_class_folds,
            })
        })
        .collect::<Result<Vec<_>, UtilityError>>()?;
    let minimum = per_classifier.iter().map(|c| c.accuracy).fold(f64::INFINITY, f64::min);
    Ok(UtilityResult {
        per_classifier,
        minimum,
        folds: plan.n_folds,
        seed: plan.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{stratified_folds, stratified_folds_for_labels};
    use crate::synthetic;
    use rand::seq::SliceRandom;

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        // TP=3, TN=5, FP=1, FN=1
        let truth = [1, 1, 1, 1, 0, 0, 0, 0, 0, 0];
        let pred = [1, 1, 1, 0, 0, 0, 0, 0, 0, 1];
        assert_eq!(accuracy(&pred, &truth).unwrap(), 0.8);
        assert_eq!(accuracy(&["a", "b", "c", "a"], &["a", "c", "c", "b"]).unwrap(), 0.5);
        assert_eq!(accuracy::<i32>(&[1], &[1, 2]), Err(UtilityError::LengthMismatch(1, 2)));
        assert_eq!(accuracy::<i32>(&[], &[]), Err(UtilityError::Empty));
    }

    #[test]
    fn separable_blobs_are_learned_by_every_classifier() {
        let d = synthetic::blobs(3).zscore_normalize().unwrap();
        let plan = stratified_folds(&d, 5, 1).unwrap();
        for c in Classifier::default_pool() {
            let cv = cross_validated_accuracy(d.features(), d.labels(), &c, &plan).unwrap();
            assert!(cv.accuracy >= 0.98, "{}: {}", c.name(), cv.accuracy);
            assert_eq!(cv.missing_class_folds, 0);
        }
    }

    #[test]
    fn shuffled_labels_sit_at_chance() {
        let d = synthetic::blobs(4).zscore_normalize().unwrap();
        let mut labels = d.labels().to_vec();
        labels.shuffle(&mut crate::rng::seeded(2));
        let plan = stratified_folds_for_labels(&labels, 5, 1).unwrap();
        for c in Classifier::default_pool() {
            let acc = cross_validated_accuracy(d.features(), &labels, &c, &plan).unwrap().accuracy;
            assert!((acc - 0.5).abs() <= 0.1, "{}: {acc}", c.name());
        }
    }

    #[test]
    fn single_fold_plan_is_rejected() {
        let d = synthetic::blobs(4);
        let plan = SplitPlan {
            fold_assignments: vec![0; d.n_records()],
            n_folds: 1,
            seed: 0,
        };
        assert_eq!(
            cross_validated_accuracy(d.features(), d.labels(), &Classifier::knn(), &plan),
            Err(UtilityError::TooFewFolds(1))
        );
    }

    #[test]
    fn pool_minimum() {
        let d = synthetic::two_blobs(200, 3, 2.0, 5).zscore_normalize().unwrap();
        let plan = stratified_folds(&d, 5, 2).unwrap();
        let u = min_utility_guarantee(d.features(), d.labels(), &Classifier::default_pool(), &plan).unwrap();
        assert_eq!(u.per_classifier.len(), 3);
        assert!(u.per_classifier.iter().all(|c| c.accuracy >= u.minimum));
        assert!(u.per_classifier.iter().all(|c| (0.0..=1.0).contains(&c.accuracy)));
        assert_eq!(u, min_utility_guarantee(d.features(), d.labels(), &Classifier::default_pool(), &plan).unwrap());
        assert_eq!(
            min_utility_guarantee(d.features(), d.labels(), &[], &plan),
            Err(UtilityError::EmptyPool)
        );
    }

    #[test]
    fn missing_class_is_flagged() {
        // fold 0 holds every "a"; fold 1 holds every "b" and the lone "z"
        let mut labels: Vec<String> = (0..9).map(|i| if i % 2 == 0 { "a" } else { "b" }.to_string()).collect();
        labels.push("z".into());
        let x = DMatrix::from_fn(10, 2, |i, j| (i * 3 + j) as f64);
        let plan = SplitPlan {
            fold_assignments: (0..10).map(|i| i % 2).collect(),
            n_folds: 2,
            seed: 0,
        };
        let cv = cross_validated_accuracy(&x, &labels, &Classifier::gaussian_nb(), &plan).unwrap();
        assert_eq!(cv.missing_class_folds, 2);
        let plan = SplitPlan {
            fold_assignments: (0..10).map(|i| usize::from(i >= 5 && i != 9)).collect(),
            n_folds: 2,
            seed: 0,
        };
        let cv = cross_validated_accuracy(&x, &labels, &Classifier::gaussian_nb(), &plan).unwrap();
        assert_eq!(cv.missing_class_folds, 1);
    }

    #[test]
    fn tree_respects_depth_one() {
        let x = DMatrix::from_column_slice(6, 1, &[0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
        let y = vec![0, 0, 0, 1, 1, 1];
        let all: Vec<usize> = (0..6).collect();
        let tree = Tree::fit(&x, &y, 2, &all, 1, 1);
        assert_eq!((0..6).map(|i| tree.predict(&x, i)).collect::<Vec<_>>(), y);
        match tree.root {
            Node::Split { threshold, .. } => assert_eq!(threshold, 6.0),
            Node::Leaf(_) => panic!("expected a split"),
        }
    }

    #[test]
    fn hyperparameter_validation() {
        assert!(Classifier::Knn { k: 0 }.validate().is_err());
        assert!(Classifier::DecisionTree { max_depth: 0, min_leaf: 2 }.validate().is_err());
        assert!(Classifier::default_pool().iter().all(|c| c.validate().is_ok()));
    }
}
