//! Rule learners: OneR and a single conjunctive rule.

use crate::error::Result;
use crate::rng::SeedKey;

use super::{
    argmax_lowest, smoothed_distribution, FeatureKind, FeatureValue, OneRParams, PredictiveModel,
    Schema, TrainRow, TrainView,
};

const GAIN_EPS: f64 = 1e-10;

// ---------------------------------------------------------------------------
// OneR
// ---------------------------------------------------------------------------

/// One rule over the single feature with minimum total training error.
///
/// Nominal features map each category to its majority class. Numeric features
/// are discretized by greedy bucketing: buckets close at distinct-value
/// boundaries once their majority class reaches the minimum bucket mass, a
/// trailing bucket short of the minimum merges into its predecessor, and
/// adjacent buckets with equal majority classes are merged.
#[derive(Debug, Clone)]
pub struct OneRModel {
    schema: Schema,
    feature: usize,
    rule: RuleKind,
    fallback_dist: Vec<f64>,
}

#[derive(Debug, Clone)]
enum RuleKind {
    /// Per category: smoothed class distribution, `None` for unseen categories.
    Nominal { dists: Vec<Option<Vec<f64>>> },
    /// `dists.len() == thresholds.len() + 1`; bucket i covers values up to
    /// `thresholds[i]`, the last bucket everything above.
    Numeric { thresholds: Vec<f64>, dists: Vec<Vec<f64>> },
}

struct FeatureRule {
    error: f64,
    rule: RuleKind,
}

fn majority_error(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    total - counts.iter().cloned().fold(0.0, f64::max)
}

fn nominal_rule(data: &TrainView, feature: usize, arity: usize, present: &[bool]) -> FeatureRule {
    let num_labels = data.num_labels();
    let mut counts = vec![vec![0.0; num_labels]; arity];
    for row in data.rows() {
        if let FeatureValue::Nominal(code) = row.features[feature] {
            counts[code][row.label] += row.weight;
        }
    }
    let mut error = 0.0;
    let dists = counts
        .iter()
        .map(|c| {
            let w: f64 = c.iter().sum();
            if w > 0.0 {
                error += majority_error(c);
                Some(smoothed_distribution(c, present))
            } else {
                None
            }
        })
        .collect();
    FeatureRule { error, rule: RuleKind::Nominal { dists } }
}

fn numeric_rule(
    data: &TrainView,
    feature: usize,
    min_bucket: f64,
    present: &[bool],
) -> FeatureRule {
    let num_labels = data.num_labels();
    let mut ordered: Vec<(f64, usize, f64)> = data
        .rows()
        .iter()
        .map(|r| {
            let v = match r.features[feature] {
                FeatureValue::Numeric(v) => v,
                FeatureValue::Nominal(_) => unreachable!("schema checked"),
            };
            (v, r.label, r.weight)
        })
        .collect();
    ordered.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));

    // group by distinct value
    let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
    for (v, label, w) in ordered {
        match groups.last_mut() {
            Some((gv, counts)) if *gv == v => counts[label] += w,
            _ => {
                let mut counts = vec![0.0; num_labels];
                counts[label] += w;
                groups.push((v, counts));
            }
        }
    }

    // greedy bucketing: close once the majority class carries min_bucket mass
    struct Bucket {
        last_value: f64,
        counts: Vec<f64>,
    }
    let mut buckets: Vec<Bucket> = Vec::new();
    let mut open: Option<Bucket> = None;
    for (v, counts) in groups {
        let bucket = open.get_or_insert_with(|| Bucket { last_value: v, counts: vec![0.0; num_labels] });
        bucket.last_value = v;
        for (acc, c) in bucket.counts.iter_mut().zip(&counts) {
            *acc += c;
        }
        if bucket.counts.iter().cloned().fold(0.0, f64::max) >= min_bucket {
            buckets.push(open.take().expect("bucket open"));
        }
    }
    if let Some(trailing) = open.take() {
        // trailing partial bucket merges into its predecessor when possible
        match buckets.last_mut() {
            Some(prev) if trailing.counts.iter().cloned().fold(0.0, f64::max) < min_bucket => {
                prev.last_value = trailing.last_value;
                for (acc, c) in prev.counts.iter_mut().zip(&trailing.counts) {
                    *acc += c;
                }
            }
            _ => buckets.push(trailing),
        }
    }

    // merge neighbours sharing a majority class
    let mut merged: Vec<Bucket> = Vec::new();
    for bucket in buckets {
        match merged.last_mut() {
            Some(prev) if argmax_lowest(&prev.counts) == argmax_lowest(&bucket.counts) => {
                prev.last_value = bucket.last_value;
                for (acc, c) in prev.counts.iter_mut().zip(&bucket.counts) {
                    *acc += c;
                }
            }
            _ => merged.push(bucket),
        }
    }

    let mut thresholds = Vec::new();
    for pair in merged.windows(2) {
        // boundary between the closing value of one bucket and the opening of
        // the next is not tracked; the midpoint of closing values suffices
        // because no training value lies between them
        thresholds.push((pair[0].last_value + pair[1].last_value) / 2.0);
    }
    let error = merged.iter().map(|b| majority_error(&b.counts)).sum();
    let dists = merged.iter().map(|b| smoothed_distribution(&b.counts, present)).collect();
    FeatureRule { error, rule: RuleKind::Numeric { thresholds, dists } }
}

pub(crate) fn fit_one_r(params: &OneRParams, data: &TrainView) -> Result<OneRModel> {
    let schema = data.schema().clone();
    let present = data.present_classes();
    let mut best: Option<(usize, FeatureRule)> = None;
    for (f, kind) in schema.features.iter().enumerate() {
        let rule = match kind {
            FeatureKind::Nominal { arity } => nominal_rule(data, f, *arity, &present),
            FeatureKind::Numeric => numeric_rule(data, f, params.min_bucket, &present),
        };
        if best.as_ref().map_or(true, |(_, b)| rule.error < b.error) {
            best = Some((f, rule));
        }
    }
    let (feature, rule) = best.expect("at least one feature");
    let fallback_dist = smoothed_distribution(&data.class_weights(), &present);
    Ok(OneRModel { schema, feature, rule: rule.rule, fallback_dist })
}

impl PredictiveModel for OneRModel {
    fn num_labels(&self) -> usize {
        self.schema.num_labels
    }

    fn predict_proba(&self, x: &[FeatureValue]) -> Result<Vec<f64>> {
        self.schema.check_features(x)?;
        let dist = match (&self.rule, x[self.feature]) {
            (RuleKind::Nominal { dists }, FeatureValue::Nominal(code)) => {
                dists[code].as_ref().unwrap_or(&self.fallback_dist)
            }
            (RuleKind::Numeric { thresholds, dists }, FeatureValue::Numeric(v)) => {
                let bucket = thresholds.partition_point(|&t| v > t);
                &dists[bucket]
            }
            _ => unreachable!("schema checked"),
        };
        Ok(dist.clone())
    }
}

// ---------------------------------------------------------------------------
// Conjunctive rule
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Antecedent {
    NominalEq { feature: usize, code: usize },
    NumericLe { feature: usize, threshold: f64 },
    NumericGt { feature: usize, threshold: f64 },
}

impl Antecedent {
    fn covers(&self, x: &[FeatureValue]) -> bool {
        match self {
            Antecedent::NominalEq { feature, code } => {
                matches!(x[*feature], FeatureValue::Nominal(c) if c == *code)
            }
            Antecedent::NumericLe { feature, threshold } => {
                matches!(x[*feature], FeatureValue::Numeric(v) if v <= *threshold)
            }
            Antecedent::NumericGt { feature, threshold } => {
                matches!(x[*feature], FeatureValue::Numeric(v) if v > *threshold)
            }
        }
    }
}

/// A single conjunctive rule: antecedents grown by weighted information gain
/// on two thirds of the data, pruned back on the held-out third. Uncovered
/// inputs get the class distribution of the uncovered training instances
/// (the full training distribution when the rule covers everything).
#[derive(Debug, Clone)]
pub struct ConjunctiveRuleModel {
    schema: Schema,
    antecedents: Vec<Antecedent>,
    covered_dist: Vec<f64>,
    default_dist: Vec<f64>,
}

fn weighted_entropy(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
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

fn counts_of<'a>(rows: impl Iterator<Item = &'a TrainRow>, num_labels: usize) -> Vec<f64> {
    let mut counts = vec![0.0; num_labels];
    for r in rows {
        counts[r.label] += r.weight;
    }
    counts
}

/// Content-based fold assignment: a duplicated instance lands in the same
/// fold as its original, keeping duplication equivalent to weight doubling.
fn is_prune_row(row: &TrainRow, seed: u64) -> bool {
    let mut key = SeedKey::new(seed).with_str("cr-fold").with_u64(row.label as u64);
    for f in &row.features {
        key = match f {
            FeatureValue::Nominal(c) => key.with_u64(*c as u64 + 1),
            FeatureValue::Numeric(v) => key.with_u64(v.to_bits()),
        };
    }
    key.seed() % 3 == 2
}

fn best_antecedent(
    rows: &[&TrainRow],
    schema: &Schema,
    existing: &[Antecedent],
    num_labels: usize,
) -> Option<Antecedent> {
    let base_entropy = weighted_entropy(&counts_of(rows.iter().copied(), num_labels));
    let mut best: Option<(f64, Antecedent)> = None;
    let mut consider = |gain: f64, antecedent: Antecedent| {
        if gain > GAIN_EPS && best.as_ref().map_or(true, |(g, _)| gain > *g) {
            best = Some((gain, antecedent));
        }
    };

    for (f, kind) in schema.features.iter().enumerate() {
        match kind {
            FeatureKind::Nominal { arity } => {
                if existing.iter().any(|a| matches!(a, Antecedent::NominalEq { feature, .. } if *feature == f)) {
                    continue;
                }
                for code in 0..*arity {
                    let antecedent = Antecedent::NominalEq { feature: f, code };
                    let covered: Vec<&TrainRow> =
                        rows.iter().filter(|r| antecedent.covers(&r.features)).copied().collect();
                    if covered.is_empty() || covered.len() == rows.len() {
                        continue;
                    }
                    let counts = counts_of(covered.iter().copied(), num_labels);
                    let weight: f64 = counts.iter().sum();
                    let gain = weight * (base_entropy - weighted_entropy(&counts));
                    consider(gain, antecedent);
                }
            }
            FeatureKind::Numeric => {
                let has_le = existing
                    .iter()
                    .any(|a| matches!(a, Antecedent::NumericLe { feature, .. } if *feature == f));
                let has_gt = existing
                    .iter()
                    .any(|a| matches!(a, Antecedent::NumericGt { feature, .. } if *feature == f));
                let mut values: Vec<f64> = rows
                    .iter()
                    .map(|r| match r.features[f] {
                        FeatureValue::Numeric(v) => v,
                        FeatureValue::Nominal(_) => unreachable!("schema checked"),
                    })
                    .collect();
                values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
                values.dedup();
                for pair in values.windows(2) {
                    let threshold = (pair[0] + pair[1]) / 2.0;
                    for le in [true, false] {
                        if (le && has_le) || (!le && has_gt) {
                            continue;
                        }
                        let antecedent = if le {
                            Antecedent::NumericLe { feature: f, threshold }
                        } else {
                            Antecedent::NumericGt { feature: f, threshold }
                        };
                        let covered: Vec<&TrainRow> =
                            rows.iter().filter(|r| antecedent.covers(&r.features)).copied().collect();
                        if covered.is_empty() || covered.len() == rows.len() {
                            continue;
                        }
                        let counts = counts_of(covered.iter().copied(), num_labels);
                        let weight: f64 = counts.iter().sum();
                        let gain = weight * (base_entropy - weighted_entropy(&counts));
                        consider(gain, antecedent);
                    }
                }
            }
        }
    }
    best.map(|(_, a)| a)
}

/// Weighted error of a prefix rule on the prune fold.
fn prefix_error(
    antecedents: &[Antecedent],
    grow: &[&TrainRow],
    prune: &[&TrainRow],
    num_labels: usize,
) -> f64 {
    let (covered_grow, uncovered_grow): (Vec<&TrainRow>, Vec<&TrainRow>) = grow
        .iter()
        .partition(|r| antecedents.iter().all(|a| a.covers(&r.features)));
    let covered_counts = counts_of(covered_grow.iter().copied(), num_labels);
    let uncovered_counts = counts_of(uncovered_grow.iter().copied(), num_labels);
    let grow_counts = counts_of(grow.iter().copied(), num_labels);
    let covered_label = if covered_counts.iter().sum::<f64>() > 0.0 {
        argmax_lowest(&covered_counts)
    } else {
        argmax_lowest(&grow_counts)
    };
    let default_label = if uncovered_counts.iter().sum::<f64>() > 0.0 {
        argmax_lowest(&uncovered_counts)
    } else {
        argmax_lowest(&grow_counts)
    };

    let mut error = 0.0;
    for r in prune {
        let predicted = if antecedents.iter().all(|a| a.covers(&r.features)) {
            covered_label
        } else {
            default_label
        };
        if predicted != r.label {
            error += r.weight;
        }
    }
    error
}

pub(crate) fn fit_conjunctive_rule(data: &TrainView, seed: u64) -> Result<ConjunctiveRuleModel> {
    let schema = data.schema().clone();
    let num_labels = schema.num_labels;
    let present = data.present_classes();

    let mut grow: Vec<&TrainRow> = Vec::new();
    let mut prune: Vec<&TrainRow> = Vec::new();
    for row in data.rows() {
        if is_prune_row(row, seed) {
            prune.push(row);
        } else {
            grow.push(row);
        }
    }
    if grow.is_empty() {
        std::mem::swap(&mut grow, &mut prune);
    }

    // grow phase
    let mut antecedents: Vec<Antecedent> = Vec::new();
    let mut covered: Vec<&TrainRow> = grow.clone();
    loop {
        if weighted_entropy(&counts_of(covered.iter().copied(), num_labels)) <= 0.0 {
            break;
        }
        match best_antecedent(&covered, &schema, &antecedents, num_labels) {
            Some(antecedent) => {
                covered.retain(|r| antecedent.covers(&r.features));
                antecedents.push(antecedent);
            }
            None => break,
        }
    }

    // reduced-error pruning: keep the shortest prefix with minimal error on
    // the held-out fold
    if !prune.is_empty() {
        let mut best_len = 0;
        let mut best_error = f64::INFINITY;
        for len in 0..=antecedents.len() {
            let error = prefix_error(&antecedents[..len], &grow, &prune, num_labels);
            if error < best_error - 1e-12 {
                best_error = error;
                best_len = len;
            }
        }
        antecedents.truncate(best_len);
    }

    // final distributions over the full training data
    let (covered_rows, uncovered_rows): (Vec<&TrainRow>, Vec<&TrainRow>) = data
        .rows()
        .iter()
        .partition(|r| antecedents.iter().all(|a| a.covers(&r.features)));
    let full_dist = smoothed_distribution(&data.class_weights(), &present);
    let uncovered_counts = counts_of(uncovered_rows.iter().copied(), num_labels);
    let default_dist = if uncovered_counts.iter().sum::<f64>() > 0.0 {
        smoothed_distribution(&uncovered_counts, &present)
    } else {
        full_dist.clone()
    };
    let covered_counts = counts_of(covered_rows.iter().copied(), num_labels);
    let covered_dist = if covered_counts.iter().sum::<f64>() > 0.0 {
        smoothed_distribution(&covered_counts, &present)
    } else {
        full_dist
    };

    Ok(ConjunctiveRuleModel { schema, antecedents, covered_dist, default_dist })
}

impl PredictiveModel for ConjunctiveRuleModel {
    fn num_labels(&self) -> usize {
        self.schema.num_labels
    }

    fn predict_proba(&self, x: &[FeatureValue]) -> Result<Vec<f64>> {
        self.schema.check_features(x)?;
        if self.antecedents.iter().all(|a| a.covers(x)) {
            Ok(self.covered_dist.clone())
        } else {
            Ok(self.default_dist.clone())
        }
    }
}
