//! k-nearest-neighbor classifier with linear scan.
//!
//! Distance is Euclidean over min-max-normalized numeric features plus a 0/1
//! mismatch term per nominal feature. Probabilities are the neighbor vote
//! shares. For the default k = 2 a split vote is decided by the closer
//! neighbor; exact distance ties fall through to the lowest label code.

use crate::error::Result;

use super::{FeatureKind, FeatureValue, KnnParams, PredictiveModel, Schema, TrainView};

#[derive(Debug, Clone)]
pub struct KnnModel {
    schema: Schema,
    k: usize,
    rows: Vec<(Vec<FeatureValue>, usize)>,
    /// Per-feature (min, max) over training data; nominal slots hold (0, 0).
    ranges: Vec<(f64, f64)>,
}

pub(crate) fn fit_knn(params: &KnnParams, data: &TrainView) -> Result<KnnModel> {
    let schema = data.schema().clone();
    let mut ranges = vec![(0.0, 0.0); schema.num_features()];
    for (f, kind) in schema.features.iter().enumerate() {
        if matches!(kind, FeatureKind::Numeric) {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for row in data.rows() {
                if let FeatureValue::Numeric(v) = row.features[f] {
                    min = min.min(v);
                    max = max.max(v);
                }
            }
            ranges[f] = (min, max);
        }
    }
    let rows = data.rows().iter().map(|r| (r.features.clone(), r.label)).collect();
    Ok(KnnModel { schema, k: params.k, rows, ranges })
}

impl KnnModel {
    fn distance_sq(&self, a: &[FeatureValue], b: &[FeatureValue]) -> f64 {
        let mut acc = 0.0;
        for (f, (va, vb)) in a.iter().zip(b).enumerate() {
            match (va, vb) {
                (FeatureValue::Nominal(x), FeatureValue::Nominal(y)) => {
                    if x != y {
                        acc += 1.0;
                    }
                }
                (FeatureValue::Numeric(x), FeatureValue::Numeric(y)) => {
                    let (min, max) = self.ranges[f];
                    let width = max - min;
                    if width > 0.0 {
                        let d = (x - min) / width - (y - min) / width;
                        acc += d * d;
                    }
                }
                _ => unreachable!("schema checked"),
            }
        }
        acc
    }

    /// The k nearest training rows as (distance, label), selected by
    /// (distance, training index) so results are deterministic.
    fn neighbors(&self, x: &[FeatureValue]) -> Vec<(f64, usize)> {
        let k = self.k.min(self.rows.len());
        let mut best: Vec<(f64, usize, usize)> = Vec::with_capacity(k + 1);
        for (idx, (features, label)) in self.rows.iter().enumerate() {
            let d = self.distance_sq(features, x);
            let pos = best.partition_point(|&(bd, bi, _)| (bd, bi) <= (d, idx));
            if pos < k {
                best.insert(pos, (d, idx, *label));
                best.truncate(k);
            }
        }
        best.into_iter().map(|(d, _, label)| (d, label)).collect()
    }
}

impl PredictiveModel for KnnModel {
    fn num_labels(&self) -> usize {
        self.schema.num_labels
    }

    fn predict_proba(&self, x: &[FeatureValue]) -> Result<Vec<f64>> {
        self.schema.check_features(x)?;
        let neighbors = self.neighbors(x);
        let mut votes = vec![0.0; self.schema.num_labels];
        let share = 1.0 / neighbors.len() as f64;
        for (_, label) in &neighbors {
            votes[*label] += share;
        }
        Ok(votes)
    }

    fn predict_label(&self, x: &[FeatureValue]) -> Result<usize> {
        self.schema.check_features(x)?;
        let neighbors = self.neighbors(x);
        // split vote between two classes: the closer neighbor decides,
        // exact distance ties drop to the generic lowest-code rule
        if neighbors.len() == 2 && neighbors[0].1 != neighbors[1].1 && neighbors[0].0 < neighbors[1].0 {
            return Ok(neighbors[0].1);
        }
        let mut votes = vec![0.0; self.schema.num_labels];
        for (_, label) in &neighbors {
            votes[*label] += 1.0;
        }
        Ok(super::argmax_lowest(&votes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::test_support::is_distribution;
    use crate::classifiers::{TrainRow, TrainView};

    fn view(rows: &[(usize, f64, usize)], arity: usize, num_labels: usize) -> TrainView {
        let schema = Schema {
            features: vec![FeatureKind::Nominal { arity }, FeatureKind::Numeric],
            num_labels,
        };
        let rows = rows
            .iter()
            .map(|(code, v, label)| TrainRow {
                features: vec![FeatureValue::Nominal(*code), FeatureValue::Numeric(*v)],
                label: *label,
                weight: 1.0,
            })
            .collect();
        TrainView::new(schema, rows).unwrap()
    }

    #[test]
    fn duplicated_training_point_gets_full_probability() {
        let data = view(&[(0, 1.0, 0), (0, 1.0, 0), (1, 9.0, 1)], 2, 2);
        let model = fit_knn(&KnnParams { k: 2 }, &data).unwrap();
        let p = model
            .predict_proba(&[FeatureValue::Nominal(0), FeatureValue::Numeric(1.0)])
            .unwrap();
        assert_eq!(p[0], 1.0);
        assert!(is_distribution(&p));
    }

    #[test]
    fn split_vote_prefers_closer_neighbor() {
        // neighbors of x=4: label 1 at distance 1/9 (v=5), label 0 at 2/9 (v=2)
        let data = view(&[(0, 2.0, 0), (0, 5.0, 1), (0, 11.0, 1)], 1, 2);
        let model = fit_knn(&KnnParams { k: 2 }, &data).unwrap();
        let x = [FeatureValue::Nominal(0), FeatureValue::Numeric(4.0)];
        let p = model.predict_proba(&x).unwrap();
        assert_eq!(p, vec![0.5, 0.5]); // vote shares stay an even split
        assert_eq!(model.predict_label(&x).unwrap(), 1); // but the closer point wins
    }

    #[test]
    fn exact_tie_falls_to_lowest_code() {
        // x=3 is equidistant from v=2 (label 1) and v=4 (label 0)
        let data = view(&[(0, 2.0, 1), (0, 4.0, 0), (0, 20.0, 1)], 1, 2);
        let model = fit_knn(&KnnParams { k: 2 }, &data).unwrap();
        let x = [FeatureValue::Nominal(0), FeatureValue::Numeric(3.0)];
        assert_eq!(model.predict_label(&x).unwrap(), 0);
    }

    #[test]
    fn scaling_numeric_feature_leaves_predictions_unchanged() {
        let rows = [(0, 1.0, 0), (1, 4.0, 1), (0, 7.0, 1), (1, 10.0, 0), (0, 2.5, 0)];
        let scaled: Vec<(usize, f64, usize)> =
            rows.iter().map(|(c, v, l)| (*c, v * 1000.0, *l)).collect();
        let m1 = fit_knn(&KnnParams { k: 2 }, &view(&rows, 2, 2)).unwrap();
        let m2 = fit_knn(&KnnParams { k: 2 }, &view(&scaled, 2, 2)).unwrap();
        for code in 0..2 {
            for v in [0.0, 2.0, 5.0, 8.0, 11.0] {
                let a = m1
                    .predict_label(&[FeatureValue::Nominal(code), FeatureValue::Numeric(v)])
                    .unwrap();
                let b = m2
                    .predict_label(&[FeatureValue::Nominal(code), FeatureValue::Numeric(v * 1000.0)])
                    .unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn k_capped_by_training_size() {
        let data = view(&[(0, 1.0, 1)], 1, 2);
        let model = fit_knn(&KnnParams { k: 2 }, &data).unwrap();
        let p = model
            .predict_proba(&[FeatureValue::Nominal(0), FeatureValue::Numeric(0.0)])
            .unwrap();
        assert_eq!(p[1], 1.0);
    }

    #[test]
    fn constant_numeric_feature_contributes_nothing() {
        let data = view(&[(0, 3.0, 0), (1, 3.0, 1)], 2, 2);
        let model = fit_knn(&KnnParams { k: 1 }, &data).unwrap();
        let p = model
            .predict_proba(&[FeatureValue::Nominal(1), FeatureValue::Numeric(100.0)])
            .unwrap();
        assert_eq!(p[1], 1.0); // nominal mismatch dominates, no NaN from width 0
    }
}
