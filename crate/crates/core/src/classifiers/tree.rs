//! Decision-tree family: C4.5-style tree, random tree and decision stump.
//!
//! All three share one grower: multiway splits on nominal features, binary
//! midpoint-threshold splits on numeric features, weighted class counts
//! throughout. They differ in split criterion, admissibility minimum, feature
//! sampling, depth limit and pruning.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rng::SeedKey;

use super::{
    smoothed_distribution, FeatureKind, FeatureValue, PredictiveModel, Schema, TrainRow, TrainView,
};

const GAIN_EPS: f64 = 1e-10;

/// C4.5-style decision tree hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionTreeParams {
    /// Confidence factor for error-based pruning, in (0, 0.5].
    pub confidence_factor: f64,
    /// A split is admissible when at least two branches carry this much weight.
    pub min_split_weight: f64,
    /// Disable to keep the fully grown tree.
    pub prune: bool,
}

impl Default for DecisionTreeParams {
    fn default() -> Self {
        DecisionTreeParams { confidence_factor: 0.25, min_split_weight: 2.0, prune: true }
    }
}

impl DecisionTreeParams {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.confidence_factor > 0.0 && self.confidence_factor <= 0.5) {
            return Err(Error::Config(format!(
                "confidence factor must be in (0, 0.5], got {}",
                self.confidence_factor
            )));
        }
        if !(self.min_split_weight > 0.0) {
            return Err(Error::Config("minimum split weight must be positive".into()));
        }
        Ok(())
    }
}

/// Random-tree hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomTreeParams {
    /// Attributes examined per node; 0 selects floor(log2 F) + 1.
    pub num_features: usize,
}

impl Default for RandomTreeParams {
    fn default() -> Self {
        RandomTreeParams { num_features: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SplitCriterion {
    GainRatio,
    InfoGain,
}

#[derive(Debug, Clone)]
struct TreeConfig {
    criterion: SplitCriterion,
    min_split_weight: f64,
    /// Number of random features to examine per node; None examines all.
    feature_sample: Option<usize>,
    max_depth: Option<usize>,
    /// When an impure node has no positive-gain split, take the best
    /// admissible partitioning split anyway. Guarantees that a fully grown
    /// tree separates any consistent dataset completely.
    zero_gain_fallback: bool,
}

#[derive(Debug)]
enum BuildKind {
    Leaf,
    Nominal { feature: usize, children: Vec<BuildNode> },
    Numeric { feature: usize, threshold: f64, below: Box<BuildNode>, above: Box<BuildNode> },
}

#[derive(Debug)]
struct BuildNode {
    counts: Vec<f64>,
    kind: BuildKind,
}

#[derive(Debug, Clone)]
enum PredictNode {
    Leaf { dist: Vec<f64> },
    Nominal { feature: usize, children: Vec<PredictNode> },
    Numeric { feature: usize, threshold: f64, below: Box<PredictNode>, above: Box<PredictNode> },
}

/// A fitted tree (shared by DT, RT and DS).
#[derive(Debug, Clone)]
pub struct DecisionTreeModel {
    schema: Schema,
    root: PredictNode,
}

impl PredictiveModel for DecisionTreeModel {
    fn num_labels(&self) -> usize {
        self.schema.num_labels
    }

    fn predict_proba(&self, x: &[FeatureValue]) -> crate::error::Result<Vec<f64>> {
        self.schema.check_features(x)?;
        let mut node = &self.root;
        loop {
            match node {
                PredictNode::Leaf { dist } => return Ok(dist.clone()),
                PredictNode::Nominal { feature, children } => {
                    let code = match x[*feature] {
                        FeatureValue::Nominal(c) => c,
                        FeatureValue::Numeric(_) => unreachable!("schema checked"),
                    };
                    node = &children[code];
                }
                PredictNode::Numeric { feature, threshold, below, above } => {
                    let v = match x[*feature] {
                        FeatureValue::Numeric(v) => v,
                        FeatureValue::Nominal(_) => unreachable!("schema checked"),
                    };
                    node = if v <= *threshold { below } else { above };
                }
            }
        }
    }
}

fn entropy(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.log2()
        })
        .sum()
}

fn class_counts(data: &[TrainRow], idx: &[u32], num_labels: usize) -> Vec<f64> {
    let mut counts = vec![0.0; num_labels];
    for &i in idx {
        let row = &data[i as usize];
        counts[row.label] += row.weight;
    }
    counts
}

fn is_pure(counts: &[f64]) -> bool {
    counts.iter().filter(|&&c| c > 0.0).count() <= 1
}

#[derive(Debug, Clone)]
enum CandidateKind {
    Nominal,
    Numeric { threshold: f64 },
}

#[derive(Debug, Clone)]
struct Candidate {
    feature: usize,
    kind: CandidateKind,
    gain: f64,
    split_info: f64,
}

impl Candidate {
    fn criterion_value(&self, criterion: SplitCriterion) -> f64 {
        match criterion {
            SplitCriterion::InfoGain => self.gain,
            SplitCriterion::GainRatio => {
                if self.split_info > 0.0 {
                    self.gain / self.split_info
                } else {
                    0.0
                }
            }
        }
    }
}

fn nominal_candidate(
    data: &[TrainRow],
    idx: &[u32],
    feature: usize,
    arity: usize,
    node_entropy: f64,
    node_total: f64,
    num_labels: usize,
    min_split: f64,
) -> Option<Candidate> {
    let mut branch_counts = vec![vec![0.0; num_labels]; arity];
    let mut branch_weights = vec![0.0; arity];
    for &i in idx {
        let row = &data[i as usize];
        let code = match row.features[feature] {
            FeatureValue::Nominal(c) => c,
            FeatureValue::Numeric(_) => unreachable!("schema checked"),
        };
        branch_counts[code][row.label] += row.weight;
        branch_weights[code] += row.weight;
    }
    let admissible = branch_weights.iter().filter(|&&w| w >= min_split).count() >= 2;
    if !admissible {
        return None;
    }
    let mut weighted_child_entropy = 0.0;
    let mut split_info = 0.0;
    for (w, counts) in branch_weights.iter().zip(&branch_counts) {
        if *w > 0.0 {
            let frac = w / node_total;
            weighted_child_entropy += frac * entropy(counts, *w);
            split_info -= frac * frac.log2();
        }
    }
    Some(Candidate {
        feature,
        kind: CandidateKind::Nominal,
        gain: node_entropy - weighted_child_entropy,
        split_info,
    })
}

fn numeric_candidate(
    data: &[TrainRow],
    idx: &[u32],
    feature: usize,
    node_entropy: f64,
    node_total: f64,
    node_counts: &[f64],
    min_split: f64,
) -> Option<Candidate> {
    let mut ordered: Vec<(f64, usize, f64)> = idx
        .iter()
        .map(|&i| {
            let row = &data[i as usize];
            let v = match row.features[feature] {
                FeatureValue::Numeric(v) => v,
                FeatureValue::Nominal(_) => unreachable!("schema checked"),
            };
            (v, row.label, row.weight)
        })
        .collect();
    ordered.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));

    let num_labels = node_counts.len();
    let mut left_counts = vec![0.0; num_labels];
    let mut left_weight = 0.0;
    let mut best: Option<(f64, f64)> = None; // (gain, threshold)

    for i in 0..ordered.len().saturating_sub(1) {
        let (v, label, w) = ordered[i];
        left_counts[label] += w;
        left_weight += w;
        let next_v = ordered[i + 1].0;
        if next_v <= v {
            continue; // boundary only between distinct values
        }
        let right_weight = node_total - left_weight;
        if left_weight < min_split || right_weight < min_split {
            continue;
        }
        let right_counts: Vec<f64> =
            node_counts.iter().zip(&left_counts).map(|(t, l)| t - l).collect();
        let child_entropy = (left_weight / node_total) * entropy(&left_counts, left_weight)
            + (right_weight / node_total) * entropy(&right_counts, right_weight);
        let gain = node_entropy - child_entropy;
        let threshold = (v + next_v) / 2.0;
        if best.map_or(true, |(g, _)| gain > g) {
            best = Some((gain, threshold));
        }
    }

    best.map(|(gain, threshold)| {
        let left: f64 = ordered.iter().filter(|(v, _, _)| *v <= threshold).map(|(_, _, w)| w).sum();
        let right = node_total - left;
        let fl = left / node_total;
        let fr = right / node_total;
        Candidate {
            feature,
            kind: CandidateKind::Numeric { threshold },
            gain,
            split_info: -(fl * fl.log2()) - (fr * fr.log2()),
        }
    })
}

fn grow(
    cfg: &TreeConfig,
    data: &[TrainRow],
    schema: &Schema,
    idx: Vec<u32>,
    counts: Vec<f64>,
    depth: usize,
    rng: &mut ChaCha8Rng,
) -> BuildNode {
    let node_total: f64 = counts.iter().sum();
    if is_pure(&counts) || cfg.max_depth.is_some_and(|d| depth >= d) || idx.is_empty() {
        return BuildNode { counts, kind: BuildKind::Leaf };
    }

    let num_features = schema.num_features();
    let considered: Vec<usize> = match cfg.feature_sample {
        Some(k) if k < num_features => {
            let mut all: Vec<usize> = (0..num_features).collect();
            all.shuffle(rng);
            let mut picked: Vec<usize> = all.into_iter().take(k).collect();
            picked.sort_unstable();
            picked
        }
        _ => (0..num_features).collect(),
    };

    let node_entropy = entropy(&counts, node_total);
    let mut candidates = Vec::new();
    for &f in &considered {
        let candidate = match schema.features[f] {
            FeatureKind::Nominal { arity } => nominal_candidate(
                data,
                &idx,
                f,
                arity,
                node_entropy,
                node_total,
                schema.num_labels,
                cfg.min_split_weight,
            ),
            FeatureKind::Numeric => numeric_candidate(
                data,
                &idx,
                f,
                node_entropy,
                node_total,
                &counts,
                cfg.min_split_weight,
            ),
        };
        if let Some(c) = candidate {
            candidates.push(c);
        }
    }

    let chosen = {
        let positive = candidates
            .iter()
            .filter(|c| c.gain > GAIN_EPS)
            .max_by(|a, b| {
                a.criterion_value(cfg.criterion)
                    .partial_cmp(&b.criterion_value(cfg.criterion))
                    .expect("finite criterion")
                    .then(b.feature.cmp(&a.feature)) // lower feature wins ties
            })
            .cloned();
        match positive {
            Some(c) => Some(c),
            None if cfg.zero_gain_fallback => candidates.first().cloned(),
            None => None,
        }
    };

    let Some(split) = chosen else {
        return BuildNode { counts, kind: BuildKind::Leaf };
    };

    match split.kind {
        CandidateKind::Nominal => {
            let arity = match schema.features[split.feature] {
                FeatureKind::Nominal { arity } => arity,
                FeatureKind::Numeric => unreachable!(),
            };
            let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); arity];
            for &i in &idx {
                let code = match data[i as usize].features[split.feature] {
                    FeatureValue::Nominal(c) => c,
                    FeatureValue::Numeric(_) => unreachable!(),
                };
                buckets[code].push(i);
            }
            let children = buckets
                .into_iter()
                .map(|bucket| {
                    if bucket.is_empty() {
                        // empty branch: resolved to the parent distribution
                        BuildNode { counts: vec![0.0; schema.num_labels], kind: BuildKind::Leaf }
                    } else {
                        let child_counts = class_counts(data, &bucket, schema.num_labels);
                        grow(cfg, data, schema, bucket, child_counts, depth + 1, rng)
                    }
                })
                .collect();
            BuildNode { counts, kind: BuildKind::Nominal { feature: split.feature, children } }
        }
        CandidateKind::Numeric { threshold } => {
            let (mut lo, mut hi) = (Vec::new(), Vec::new());
            for &i in &idx {
                let v = match data[i as usize].features[split.feature] {
                    FeatureValue::Numeric(v) => v,
                    FeatureValue::Nominal(_) => unreachable!(),
                };
                if v <= threshold {
                    lo.push(i);
                } else {
                    hi.push(i);
                }
            }
            let lo_counts = class_counts(data, &lo, schema.num_labels);
            let hi_counts = class_counts(data, &hi, schema.num_labels);
            let below = grow(cfg, data, schema, lo, lo_counts, depth + 1, rng);
            let above = grow(cfg, data, schema, hi, hi_counts, depth + 1, rng);
            BuildNode {
                counts,
                kind: BuildKind::Numeric {
                    feature: split.feature,
                    threshold,
                    below: Box::new(below),
                    above: Box::new(above),
                },
            }
        }
    }
}

/// Upper confidence bound on the number of additional errors at a leaf seen
/// to make `e` errors out of `n` weighted instances (C4.5 / J48 arithmetic).
fn add_errs(n: f64, e: f64, cf: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    if e < 1.0 {
        let base = n * (1.0 - cf.powf(1.0 / n));
        if e == 0.0 {
            return base;
        }
        return base + e * (add_errs(n, 1.0, cf) - base);
    }
    if e + 0.5 >= n {
        return (n - e).max(0.0);
    }
    let z = crate::stats::special::normal_quantile(1.0 - cf).expect("cf in (0, 0.5]");
    let f = (e + 0.5) / n;
    let r = (f + z * z / (2.0 * n)
        + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt())
        / (1.0 + z * z / n);
    r * n - e
}

fn leaf_error_estimate(counts: &[f64], cf: f64) -> f64 {
    let n: f64 = counts.iter().sum();
    if n <= 0.0 {
        return 0.0;
    }
    let errors = n - counts.iter().cloned().fold(0.0, f64::max);
    errors + add_errs(n, errors, cf)
}

/// Bottom-up error-based pruning; returns the estimated subtree errors.
fn prune(node: &mut BuildNode, cf: f64) -> f64 {
    let subtree_estimate = match &mut node.kind {
        BuildKind::Leaf => return leaf_error_estimate(&node.counts, cf),
        BuildKind::Nominal { children, .. } => {
            children.iter_mut().map(|c| prune(c, cf)).sum::<f64>()
        }
        BuildKind::Numeric { below, above, .. } => prune(below, cf) + prune(above, cf),
    };
    let as_leaf = leaf_error_estimate(&node.counts, cf);
    if as_leaf <= subtree_estimate + 0.1 {
        node.kind = BuildKind::Leaf;
        as_leaf
    } else {
        subtree_estimate
    }
}

fn finalize(node: BuildNode, parent_counts: &[f64], present: &[bool]) -> PredictNode {
    let counts = node.counts;
    let effective = if counts.iter().all(|&c| c == 0.0) { parent_counts } else { &counts[..] };
    match node.kind {
        BuildKind::Leaf => PredictNode::Leaf { dist: smoothed_distribution(effective, present) },
        BuildKind::Nominal { feature, children } => PredictNode::Nominal {
            feature,
            children: children.into_iter().map(|c| finalize(c, effective, present)).collect(),
        },
        BuildKind::Numeric { feature, threshold, below, above } => PredictNode::Numeric {
            feature,
            threshold,
            below: Box::new(finalize(*below, effective, present)),
            above: Box::new(finalize(*above, effective, present)),
        },
    }
}

fn fit_tree(cfg: &TreeConfig, data: &TrainView, prune_cf: Option<f64>, seed: u64) -> DecisionTreeModel {
    let mut rng = SeedKey::new(seed).with_str("tree").rng();
    let idx: Vec<u32> = (0..data.rows().len() as u32).collect();
    let counts = data.class_weights();
    let mut root = grow(cfg, data.rows(), data.schema(), idx, counts, 0, &mut rng);
    if let Some(cf) = prune_cf {
        prune(&mut root, cf);
    }
    let present = data.present_classes();
    let parent = root.counts.clone();
    DecisionTreeModel { schema: data.schema().clone(), root: finalize(root, &parent, &present) }
}

pub(crate) fn fit_decision_tree(params: &DecisionTreeParams, data: &TrainView) -> Result<DecisionTreeModel> {
    let cfg = TreeConfig {
        criterion: SplitCriterion::GainRatio,
        min_split_weight: params.min_split_weight,
        feature_sample: None,
        max_depth: None,
        zero_gain_fallback: true,
    };
    let prune_cf = params.prune.then_some(params.confidence_factor);
    Ok(fit_tree(&cfg, data, prune_cf, 0))
}

pub(crate) fn fit_random_tree(params: &RandomTreeParams, data: &TrainView, seed: u64) -> Result<DecisionTreeModel> {
    let f = data.schema().num_features();
    let k = if params.num_features == 0 {
        ((f as f64).log2().floor() as usize) + 1
    } else {
        params.num_features.min(f)
    };
    let cfg = TreeConfig {
        criterion: SplitCriterion::InfoGain,
        min_split_weight: 1.0,
        feature_sample: Some(k),
        max_depth: None,
        zero_gain_fallback: false,
    };
    Ok(fit_tree(&cfg, data, None, seed))
}

pub(crate) fn fit_decision_stump(data: &TrainView) -> Result<DecisionTreeModel> {
    let cfg = TreeConfig {
        criterion: SplitCriterion::InfoGain,
        min_split_weight: 1.0,
        feature_sample: None,
        max_depth: Some(1),
        zero_gain_fallback: false,
    };
    Ok(fit_tree(&cfg, data, None, 0))
}

/// Decision stump as a standalone learner, the usual weak base for ensembles.
#[derive(Debug, Clone, Default)]
pub struct DecisionStumpLearner;

impl super::Learner for DecisionStumpLearner {
    fn fit(&self, data: &TrainView, _seed: u64) -> Result<Box<dyn PredictiveModel>> {
        Ok(Box::new(fit_decision_stump(data)?))
    }
}
