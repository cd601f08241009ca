//! Weighted-instance base learners sharing one probabilistic contract.
//!
//! Every learner consumes a [`TrainView`] (feature vectors, labels, weights)
//! and produces a [`PredictiveModel`] whose `predict_proba` returns a valid
//! distribution over all labels. Classes absent from the training data get
//! probability zero; distributions over observed classes are Laplace-smoothed
//! with α = 1.

mod bayes;
mod knn;
mod rules;
mod tree;

pub use bayes::NaiveBayesModel;
pub use knn::KnnModel;
pub use rules::{ConjunctiveRuleModel, OneRModel};
pub use tree::{DecisionStumpLearner, DecisionTreeModel, DecisionTreeParams, RandomTreeParams};

use std::collections::HashMap;
use std::sync::Arc;

use crate::encoding::EncodedDataset;
use crate::error::{Error, Result};

/// Kind of a single feature column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    /// Categorical with codes `0..arity`.
    Nominal { arity: usize },
    Numeric,
}

/// One feature value; must agree with the schema's kind at that position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureValue {
    Nominal(usize),
    Numeric(f64),
}

/// Feature layout and label arity shared by a dataset and its models.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub features: Vec<FeatureKind>,
    pub num_labels: usize,
}

impl Schema {
    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    /// Validates a feature vector against this schema.
    pub fn check_features(&self, x: &[FeatureValue]) -> Result<()> {
        if x.len() != self.features.len() {
            return Err(Error::Input(format!(
                "expected {} features, got {}",
                self.features.len(),
                x.len()
            )));
        }
        for (i, (kind, value)) in self.features.iter().zip(x).enumerate() {
            match (kind, value) {
                (FeatureKind::Nominal { arity }, FeatureValue::Nominal(code)) => {
                    if code >= arity {
                        return Err(Error::Input(format!(
                            "feature {i}: nominal code {code} out of range 0..{arity}"
                        )));
                    }
                }
                (FeatureKind::Numeric, FeatureValue::Numeric(v)) => {
                    if !v.is_finite() {
                        return Err(Error::Input(format!("feature {i}: non-finite numeric value")));
                    }
                }
                _ => {
                    return Err(Error::Input(format!("feature {i}: kind mismatch with schema")));
                }
            }
        }
        Ok(())
    }

    /// Schema restricted to the given (sorted) feature indices.
    pub fn project(&self, mask: &[usize]) -> Schema {
        Schema {
            features: mask.iter().map(|&i| self.features[i]).collect(),
            num_labels: self.num_labels,
        }
    }
}

/// One weighted training instance.
#[derive(Debug, Clone)]
pub struct TrainRow {
    pub features: Vec<FeatureValue>,
    pub label: usize,
    pub weight: f64,
}

/// An immutable training view: schema plus weighted rows.
#[derive(Debug, Clone)]
pub struct TrainView {
    schema: Schema,
    rows: Vec<TrainRow>,
}

impl TrainView {
    pub fn new(schema: Schema, rows: Vec<TrainRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Data("training view has no rows".into()));
        }
        let mut total = 0.0;
        for (i, row) in rows.iter().enumerate() {
            schema
                .check_features(&row.features)
                .map_err(|e| Error::Data(format!("row {i}: {e}")))?;
            if row.label >= schema.num_labels {
                return Err(Error::Data(format!(
                    "row {i}: label {} out of range 0..{}",
                    row.label, schema.num_labels
                )));
            }
            if !(row.weight >= 0.0) || !row.weight.is_finite() {
                return Err(Error::Data(format!("row {i}: invalid weight {}", row.weight)));
            }
            total += row.weight;
        }
        if total <= 0.0 {
            return Err(Error::Data("training weights must sum to a positive value".into()));
        }
        Ok(TrainView { schema, rows })
    }

    /// Builds a view over a full encoded dataset with unit weights.
    pub fn from_dataset(dataset: &EncodedDataset) -> Result<Self> {
        let indices: Vec<usize> = (0..dataset.samples.len()).collect();
        Self::from_dataset_subset(dataset, &indices)
    }

    /// Builds a view over selected samples of an encoded dataset.
    pub fn from_dataset_subset(dataset: &EncodedDataset, indices: &[usize]) -> Result<Self> {
        let schema = dataset_schema(dataset);
        let rows = indices
            .iter()
            .map(|&i| {
                let s = &dataset.samples[i];
                TrainRow { features: sample_features(s), label: s.label_code, weight: 1.0 }
            })
            .collect();
        TrainView::new(schema, rows)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[TrainRow] {
        &self.rows
    }

    pub fn num_labels(&self) -> usize {
        self.schema.num_labels
    }

    pub fn total_weight(&self) -> f64 {
        self.rows.iter().map(|r| r.weight).sum()
    }

    /// Weighted class counts over all rows.
    pub fn class_weights(&self) -> Vec<f64> {
        let mut counts = vec![0.0; self.schema.num_labels];
        for row in &self.rows {
            counts[row.label] += row.weight;
        }
        counts
    }

    /// Mask of classes with positive training weight.
    pub fn present_classes(&self) -> Vec<bool> {
        self.class_weights().iter().map(|&w| w > 0.0).collect()
    }

    /// A view with the same schema over different rows.
    pub fn with_rows(&self, rows: Vec<TrainRow>) -> Result<Self> {
        TrainView::new(self.schema.clone(), rows)
    }

    /// A view keeping only the (sorted) feature indices in `mask`.
    pub fn project_features(&self, mask: &[usize]) -> Result<Self> {
        let schema = self.schema.project(mask);
        let rows = self
            .rows
            .iter()
            .map(|r| TrainRow {
                features: mask.iter().map(|&i| r.features[i]).collect(),
                label: r.label,
                weight: r.weight,
            })
            .collect();
        TrainView::new(schema, rows)
    }
}

/// The schema induced by an encoded dataset: `l` nominal features over the
/// alphabet plus the numeric duration.
pub fn dataset_schema(dataset: &EncodedDataset) -> Schema {
    let arity = dataset.code_map.len();
    let mut features = vec![FeatureKind::Nominal { arity }; dataset.window_size];
    features.push(FeatureKind::Numeric);
    Schema { features, num_labels: arity }
}

/// Feature vector of one encoded sample.
pub fn sample_features(sample: &crate::encoding::Sample) -> Vec<FeatureValue> {
    sample
        .type_codes
        .iter()
        .map(|&c| FeatureValue::Nominal(c))
        .chain(std::iter::once(FeatureValue::Numeric(sample.duration_minutes)))
        .collect()
}

/// A fitted classifier exposing class-probability prediction.
pub trait PredictiveModel: Send + Sync {
    fn num_labels(&self) -> usize;

    /// A length-I distribution: entries >= 0 summing to 1 within 1e-9.
    fn predict_proba(&self, x: &[FeatureValue]) -> Result<Vec<f64>>;

    /// Argmax of `predict_proba`, ties broken toward the lowest label code.
    fn predict_label(&self, x: &[FeatureValue]) -> Result<usize> {
        Ok(argmax_lowest(&self.predict_proba(x)?))
    }
}

/// Index of the maximum entry, lowest index on ties.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Laplace-smoothed distribution over the classes marked present; classes
/// absent from training keep probability zero.
pub(crate) fn smoothed_distribution(weighted_counts: &[f64], present: &[bool]) -> Vec<f64> {
    debug_assert_eq!(weighted_counts.len(), present.len());
    let num_present = present.iter().filter(|&&p| p).count();
    if num_present == 0 {
        // no observed class at all; callers guard against this
        return vec![0.0; weighted_counts.len()];
    }
    let total: f64 = weighted_counts
        .iter()
        .zip(present)
        .filter(|(_, &p)| p)
        .map(|(w, _)| *w)
        .sum();
    let denom = total + num_present as f64;
    weighted_counts
        .iter()
        .zip(present)
        .map(|(w, &p)| if p { (w + 1.0) / denom } else { 0.0 })
        .collect()
}

/// Hyperparameters of the seven built-in learners plus a plug-in escape hatch
/// for algorithms supplied by the caller.
#[derive(Debug, Clone, PartialEq)]
pub enum LearnerSpec {
    DecisionTree(DecisionTreeParams),
    RandomTree(RandomTreeParams),
    DecisionStump,
    NaiveBayes,
    Knn(KnnParams),
    OneR(OneRParams),
    ConjunctiveRule,
    /// A learner registered at runtime under this id.
    Plugin(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneRParams {
    /// Minimum weighted majority-class mass per numeric bucket.
    pub min_bucket: f64,
}

impl Default for OneRParams {
    fn default() -> Self {
        OneRParams { min_bucket: 6.0 }
    }
}

impl LearnerSpec {
    /// Resolves a short learner id. Unknown ids become [`LearnerSpec::Plugin`]
    /// and only fit successfully when a registry supplies them.
    pub fn from_id(id: &str) -> LearnerSpec {
        match id.to_ascii_uppercase().as_str() {
            "DT" => LearnerSpec::DecisionTree(DecisionTreeParams::default()),
            "RT" => LearnerSpec::RandomTree(RandomTreeParams::default()),
            "DS" => LearnerSpec::DecisionStump,
            "NB" => LearnerSpec::NaiveBayes,
            "KNN" => LearnerSpec::Knn(KnnParams::default()),
            "ONER" => LearnerSpec::OneR(OneRParams::default()),
            "CR" => LearnerSpec::ConjunctiveRule,
            _ => LearnerSpec::Plugin(id.to_string()),
        }
    }

    pub fn id(&self) -> String {
        match self {
            LearnerSpec::DecisionTree(_) => "DT".into(),
            LearnerSpec::RandomTree(_) => "RT".into(),
            LearnerSpec::DecisionStump => "DS".into(),
            LearnerSpec::NaiveBayes => "NB".into(),
            LearnerSpec::Knn(_) => "KNN".into(),
            LearnerSpec::OneR(_) => "ONER".into(),
            LearnerSpec::ConjunctiveRule => "CR".into(),
            LearnerSpec::Plugin(id) => id.clone(),
        }
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self, LearnerSpec::Plugin(_))
    }

    fn validate(&self) -> Result<()> {
        match self {
            LearnerSpec::DecisionTree(p) => p.validate(),
            LearnerSpec::Knn(p) => {
                if p.k == 0 {
                    return Err(Error::Config("k-NN requires k >= 1".into()));
                }
                Ok(())
            }
            LearnerSpec::OneR(p) => {
                if !(p.min_bucket >= 1.0) {
                    return Err(Error::Config("OneR minimum bucket size must be >= 1".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// A trainable learning algorithm; plug-ins implement this.
pub trait Learner: Send + Sync {
    fn fit(&self, data: &TrainView, seed: u64) -> Result<Box<dyn PredictiveModel>>;
}

/// Runtime registry mapping plug-in ids to learners.
#[derive(Default, Clone)]
pub struct LearnerRegistry {
    plugins: HashMap<String, Arc<dyn Learner>>,
}

impl LearnerRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, id: impl Into<String>, learner: Arc<dyn Learner>) {
        self.plugins.insert(id.into(), learner);
    }

    pub fn contains(&self, id: &str) -> bool {
        self.plugins.contains_key(id)
    }

    pub fn fit(&self, spec: &LearnerSpec, data: &TrainView, seed: u64) -> Result<Box<dyn PredictiveModel>> {
        match spec {
            LearnerSpec::Plugin(id) => match self.plugins.get(id) {
                Some(learner) => learner.fit(data, seed),
                None => Err(Error::Config(format!("unknown learner id {id:?}"))),
            },
            builtin => fit(builtin, data, seed),
        }
    }
}

/// Trains a built-in learner. Deterministic given `(spec, data, seed)`.
pub fn fit(spec: &LearnerSpec, data: &TrainView, seed: u64) -> Result<Box<dyn PredictiveModel>> {
    spec.validate()?;
    match spec {
        LearnerSpec::DecisionTree(params) => Ok(Box::new(tree::fit_decision_tree(params, data)?)),
        LearnerSpec::RandomTree(params) => Ok(Box::new(tree::fit_random_tree(params, data, seed)?)),
        LearnerSpec::DecisionStump => Ok(Box::new(tree::fit_decision_stump(data)?)),
        LearnerSpec::NaiveBayes => Ok(Box::new(bayes::fit_naive_bayes(data)?)),
        LearnerSpec::Knn(params) => Ok(Box::new(knn::fit_knn(params, data)?)),
        LearnerSpec::OneR(params) => Ok(Box::new(rules::fit_one_r(params, data)?)),
        LearnerSpec::ConjunctiveRule => Ok(Box::new(rules::fit_conjunctive_rule(data, seed)?)),
        LearnerSpec::Plugin(id) => Err(Error::Config(format!("unknown learner id {id:?}"))),
    }
}

/// A learner wrapper around a spec, handy for ensembles and factories.
#[derive(Debug, Clone)]
pub struct SpecLearner(pub LearnerSpec);

impl Learner for SpecLearner {
    fn fit(&self, data: &TrainView, seed: u64) -> Result<Box<dyn PredictiveModel>> {
        fit(&self.0, data, seed)
    }
}
