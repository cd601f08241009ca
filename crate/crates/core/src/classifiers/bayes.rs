//! Naive Bayes with Gaussian numeric likelihoods.
//!
//! Nominal likelihoods are Laplace-smoothed frequencies; the numeric duration
//! feature uses a per-class normal density rather than a kernel estimator.
//! Posteriors are computed in log space and normalized.

use crate::error::Result;

use super::{smoothed_distribution, FeatureKind, FeatureValue, PredictiveModel, Schema, TrainView};

/// Variance floor guarding against zero-variance singularities.
const VARIANCE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone)]
enum FeatureModel {
    /// Per class: weighted value counts over the category range.
    Nominal { counts: Vec<Vec<f64>> },
    /// Per class: (mean, variance) of a Gaussian.
    Gaussian { params: Vec<(f64, f64)> },
}

#[derive(Debug, Clone)]
pub struct NaiveBayesModel {
    schema: Schema,
    present: Vec<bool>,
    log_priors: Vec<f64>,
    features: Vec<FeatureModel>,
}

pub(crate) fn fit_naive_bayes(data: &TrainView) -> Result<NaiveBayesModel> {
    let schema = data.schema().clone();
    let num_labels = schema.num_labels;
    let class_weights = data.class_weights();
    let present = data.present_classes();
    let log_priors = smoothed_distribution(&class_weights, &present)
        .iter()
        .map(|&p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
        .collect();

    let mut features = Vec::with_capacity(schema.num_features());
    for (f, kind) in schema.features.iter().enumerate() {
        match kind {
            FeatureKind::Nominal { arity } => {
                let mut counts = vec![vec![0.0; *arity]; num_labels];
                for row in data.rows() {
                    if let FeatureValue::Nominal(code) = row.features[f] {
                        counts[row.label][code] += row.weight;
                    }
                }
                features.push(FeatureModel::Nominal { counts });
            }
            FeatureKind::Numeric => {
                let mut params = Vec::with_capacity(num_labels);
                for class in 0..num_labels {
                    let mut weight = 0.0;
                    let mut mean = 0.0;
                    for row in data.rows() {
                        if row.label == class {
                            if let FeatureValue::Numeric(v) = row.features[f] {
                                weight += row.weight;
                                mean += row.weight * v;
                            }
                        }
                    }
                    if weight <= 0.0 {
                        params.push((0.0, VARIANCE_FLOOR));
                        continue;
                    }
                    mean /= weight;
                    let mut var = 0.0;
                    for row in data.rows() {
                        if row.label == class {
                            if let FeatureValue::Numeric(v) = row.features[f] {
                                var += row.weight * (v - mean) * (v - mean);
                            }
                        }
                    }
                    var = (var / weight).max(VARIANCE_FLOOR);
                    params.push((mean, var));
                }
                features.push(FeatureModel::Gaussian { params });
            }
        }
    }

    Ok(NaiveBayesModel { schema, present, log_priors, features })
}

impl PredictiveModel for NaiveBayesModel {
    fn num_labels(&self) -> usize {
        self.schema.num_labels
    }

    fn predict_proba(&self, x: &[FeatureValue]) -> Result<Vec<f64>> {
        self.schema.check_features(x)?;
        let num_labels = self.schema.num_labels;
        let mut log_post = self.log_priors.clone();
        for (class, lp) in log_post.iter_mut().enumerate() {
            if !self.present[class] {
                continue;
            }
            for (f, model) in self.features.iter().enumerate() {
                match (model, x[f]) {
                    (FeatureModel::Nominal { counts }, FeatureValue::Nominal(code)) => {
                        let class_counts = &counts[class];
                        let total: f64 = class_counts.iter().sum();
                        let arity = class_counts.len() as f64;
                        *lp += ((class_counts[code] + 1.0) / (total + arity)).ln();
                    }
                    (FeatureModel::Gaussian { params }, FeatureValue::Numeric(v)) => {
                        let (mean, var) = params[class];
                        *lp += -0.5 * (2.0 * std::f64::consts::PI * var).ln()
                            - (v - mean) * (v - mean) / (2.0 * var);
                    }
                    _ => unreachable!("schema checked"),
                }
            }
        }

        // log-sum-exp normalization over present classes
        let max = log_post
            .iter()
            .enumerate()
            .filter(|(c, _)| self.present[*c])
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut probs = vec![0.0; num_labels];
        let mut total = 0.0;
        for class in 0..num_labels {
            if self.present[class] {
                let p = (log_post[class] - max).exp();
                probs[class] = p;
                total += p;
            }
        }
        for p in &mut probs {
            *p /= total;
        }
        Ok(probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::test_support::is_distribution;
    use crate::classifiers::{TrainRow, TrainView};

    fn numeric_view(rows: &[(f64, usize)], num_labels: usize) -> TrainView {
        let schema = Schema { features: vec![FeatureKind::Numeric], num_labels };
        let rows = rows
            .iter()
            .map(|(v, label)| TrainRow {
                features: vec![FeatureValue::Numeric(*v)],
                label: *label,
                weight: 1.0,
            })
            .collect();
        TrainView::new(schema, rows).unwrap()
    }

    #[test]
    fn gaussian_hand_computation() {
        // class A ~ {1,1,3,3} (mu=2), class B ~ {7,7,9,9} (mu=8), equal sigma
        let view = numeric_view(
            &[(1.0, 0), (1.0, 0), (3.0, 0), (3.0, 0), (7.0, 1), (7.0, 1), (9.0, 1), (9.0, 1)],
            2,
        );
        let model = fit_naive_bayes(&view).unwrap();

        // x = 5 is equidistant: exact posterior tie, broken to the lower code
        let p5 = model.predict_proba(&[FeatureValue::Numeric(5.0)]).unwrap();
        assert!((p5[0] - 0.5).abs() < 1e-12);
        assert_eq!(model.predict_label(&[FeatureValue::Numeric(5.0)]).unwrap(), 0);

        // x = 4 is closer to mu_A
        assert_eq!(model.predict_label(&[FeatureValue::Numeric(4.0)]).unwrap(), 0);
        let p4 = model.predict_proba(&[FeatureValue::Numeric(4.0)]).unwrap();
        assert!(p4[0] > p4[1]);
        assert!(is_distribution(&p4));
    }

    #[test]
    fn single_class_posterior_is_degenerate() {
        let view = numeric_view(&[(1.0, 1), (2.0, 1)], 3);
        let model = fit_naive_bayes(&view).unwrap();
        let p = model.predict_proba(&[FeatureValue::Numeric(10.0)]).unwrap();
        assert!(p[1] >= 1.0 - 1e-9);
        assert_eq!(p[0], 0.0);
        assert_eq!(p[2], 0.0);
    }

    #[test]
    fn nominal_likelihoods_are_smoothed() {
        // class 0 never sees code 1, yet the posterior stays finite
        let schema = Schema { features: vec![FeatureKind::Nominal { arity: 2 }], num_labels: 2 };
        let rows = vec![
            TrainRow { features: vec![FeatureValue::Nominal(0)], label: 0, weight: 3.0 },
            TrainRow { features: vec![FeatureValue::Nominal(1)], label: 1, weight: 3.0 },
        ];
        let view = TrainView::new(schema, rows).unwrap();
        let model = fit_naive_bayes(&view).unwrap();
        let p = model.predict_proba(&[FeatureValue::Nominal(1)]).unwrap();
        assert!(is_distribution(&p));
        assert!(p[0] > 0.0 && p[1] > p[0]);
    }

    #[test]
    fn zero_variance_is_floored() {
        let view = numeric_view(&[(2.0, 0), (2.0, 0), (5.0, 1), (5.0, 1)], 2);
        let model = fit_naive_bayes(&view).unwrap();
        let p = model.predict_proba(&[FeatureValue::Numeric(2.0)]).unwrap();
        assert!(is_distribution(&p));
        assert_eq!(crate::classifiers::argmax_lowest(&p), 0);
    }

    #[test]
    fn weight_duplication_equivalence() {
        let duplicated = numeric_view(&[(1.0, 0), (2.0, 0), (5.0, 1), (5.0, 1)], 2);
        let schema = Schema { features: vec![FeatureKind::Numeric], num_labels: 2 };
        let rows = vec![
            TrainRow { features: vec![FeatureValue::Numeric(1.0)], label: 0, weight: 1.0 },
            TrainRow { features: vec![FeatureValue::Numeric(2.0)], label: 0, weight: 1.0 },
            TrainRow { features: vec![FeatureValue::Numeric(5.0)], label: 1, weight: 2.0 },
        ];
        let reweighted = TrainView::new(schema, rows).unwrap();
        let a = fit_naive_bayes(&duplicated).unwrap();
        let b = fit_naive_bayes(&reweighted).unwrap();
        for v in [0.0, 1.5, 3.0, 5.0, 8.0] {
            let pa = a.predict_proba(&[FeatureValue::Numeric(v)]).unwrap();
            let pb = b.predict_proba(&[FeatureValue::Numeric(v)]).unwrap();
            for (x, y) in pa.iter().zip(&pb) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
