//! Classifier metrics, cross-validation, and accuracy/importance curves.
//!
//! Cross-validation keeps whole subjects on one side of each fold split when
//! subject ids are present, stratifying subjects by whether they ever carry a
//! positive label (rows stratify by label directly otherwise). Binning is
//! refit inside every fold's training split, so cut points never leak
//! held-out information.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureGroup};
use crate::error::Error;
use crate::exec::{run_indexed, ExecMode};
use crate::importance::group_importance;
use crate::model::{sigmoid, GamModel};
use crate::rng::{ColumnRng, FOLD_STREAM};
use crate::train::{train, TrainConfig};
use crate::Result;

/// Rank-based (Mann–Whitney) AUC; tied scores count one half.
pub fn auc(labels: &[u8], scores: &[f64]) -> Result<f64> {
    check_lengths(labels, scores, "scores")?;
    let n = labels.len();
    let n_pos = labels.iter().filter(|y| **y == 1).count();
    if n_pos == 0 || n_pos == n {
        return Err(Error::SingleClassMetric);
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|a, b| scores[*a].total_cmp(&scores[*b]));
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for t in i..=j {
            if labels[idx[t]] == 1 {
                rank_sum_pos += midrank;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * (n - n_pos) as f64))
}

/// Weighted mean squared error of predicted probabilities.
pub fn brier(labels: &[u8], probabilities: &[f64], weights: Option<&[f64]>) -> Result<f64> {
    check_lengths(labels, probabilities, "probabilities")?;
    if let Some(w) = weights {
        check_lengths(labels, w, "weights")?;
    }
    let mut se = 0.0f64;
    let mut sw = 0.0f64;
    for (i, (y, p)) in labels.iter().zip(probabilities).enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        let d = p - *y as f64;
        se += w * d * d;
        sw += w;
    }
    Ok(if sw > 0.0 { se / sw } else { 0.0 })
}

/// Mean of weighted sensitivity and specificity; a sample is called positive
/// iff its probability strictly exceeds `threshold`.
pub fn balanced_accuracy(
    labels: &[u8],
    probabilities: &[f64],
    weights: Option<&[f64]>,
    threshold: f64,
) -> Result<f64> {
    check_lengths(labels, probabilities, "probabilities")?;
    if let Some(w) = weights {
        check_lengths(labels, w, "weights")?;
    }
    let (mut tp, mut pos, mut tn, mut neg) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (i, (y, p)) in labels.iter().zip(probabilities).enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        let called_pos = *p > threshold;
        if *y == 1 {
            pos += w;
            if called_pos {
                tp += w;
            }
        } else {
            neg += w;
            if !called_pos {
                tn += w;
            }
        }
    }
    if pos == 0.0 || neg == 0.0 {
        return Err(Error::SingleClassMetric);
    }
    Ok((tp / pos + tn / neg) / 2.0)
}

fn check_lengths<T>(labels: &[u8], other: &[T], what: &'static str) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if labels.len() != other.len() {
        return Err(Error::LengthMismatch {
            what: what.to_string(),
            expected: labels.len(),
            got: other.len(),
        });
    }
    Ok(())
}

/// Row-to-fold map produced by [`kfold_split`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    /// `fold[row]` is the fold whose *test* set holds that row.
    pub fold: Vec<usize>,
}

impl FoldAssignment {
    pub fn test_rows(&self, f: usize) -> Vec<usize> {
        (0..self.fold.len()).filter(|r| self.fold[*r] == f).collect()
    }

    pub fn train_rows(&self, f: usize) -> Vec<usize> {
        (0..self.fold.len()).filter(|r| self.fold[*r] != f).collect()
    }
}

/// Assign every row to one of `k` folds. Units (subjects when present, rows
/// otherwise) are stratified — subjects by "ever has a positive visit", rows
/// by label — shuffled with the seed, and dealt round-robin with a counter
/// that continues across strata so every fold stays balanced within one unit.
pub fn kfold_split(dataset: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("fold count must be at least 2, got {k}")));
    }
    let n = dataset.n();
    let y = dataset.target();
    let mut fold = vec![0usize; n];
    let mut rng = ColumnRng::new(seed, FOLD_STREAM);
    let mut counter = 0usize;

    if let Some(ids) = dataset.subject_ids() {
        // rows per subject, in first-appearance order
        let mut subj_rows: Vec<Vec<usize>> = Vec::new();
        let mut subj_of = std::collections::HashMap::new();
        for (r, id) in ids.iter().enumerate() {
            let s = *subj_of.entry(id.as_str()).or_insert_with(|| {
                subj_rows.push(Vec::new());
                subj_rows.len() - 1
            });
            subj_rows[s].push(r);
        }
        if subj_rows.len() < k {
            return Err(Error::BadFoldCount { k, available: subj_rows.len(), unit: "subjects" });
        }
        let has_positive: Vec<bool> = subj_rows
            .iter()
            .map(|rows| rows.iter().any(|r| y[*r] == 1))
            .collect();
        for positive in [true, false] {
            let stratum: Vec<usize> =
                (0..subj_rows.len()).filter(|s| has_positive[*s] == positive).collect();
            for p in rng.shuffled_indices(stratum.len()) {
                for &r in &subj_rows[stratum[p]] {
                    fold[r] = counter % k;
                }
                counter += 1;
            }
        }
    } else {
        if n < k {
            return Err(Error::BadFoldCount { k, available: n, unit: "rows" });
        }
        for positive in [true, false] {
            let stratum: Vec<usize> =
                (0..n).filter(|r| (y[*r] == 1) == positive).collect();
            for p in rng.shuffled_indices(stratum.len()) {
                fold[stratum[p]] = counter % k;
                counter += 1;
            }
        }
    }
    Ok(FoldAssignment { k, fold })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub folds: Vec<f64>,
    pub mean: f64,
    /// Standard error of the mean: sample std (ddof 1) over folds / sqrt(k).
    pub sem: f64,
}

impl MetricSummary {
    fn from_folds(folds: Vec<f64>) -> Self {
        let k = folds.len() as f64;
        let mean = folds.iter().sum::<f64>() / k;
        let var = folds.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
        MetricSummary { folds, mean, sem: (var / k).sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    /// Seed that drove the fold assignment.
    pub seed: u64,
    pub auc: MetricSummary,
    pub brier: MetricSummary,
    pub balanced_accuracy: MetricSummary,
}

impl CvReport {
    /// One row per metric: `metric,mean,sem`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,mean,sem\n");
        for (name, m) in [
            ("auc", &self.auc),
            ("brier", &self.brier),
            ("balanced_accuracy", &self.balanced_accuracy),
        ] {
            out.push_str(&format!("{},{},{}\n", name, m.mean, m.sem));
        }
        out
    }
}

/// Train and score one model per fold; binning is fitted inside each fold's
/// training split. Folds run concurrently yet the report is deterministic.
pub fn cv_evaluate(dataset: &Dataset, config: &TrainConfig, k: usize, seed: u64) -> Result<CvReport> {
    let assignment = kfold_split(dataset, k, seed)?;
    let per_fold: Vec<Result<[f64; 3]>> = run_indexed(k, ExecMode::default(), |f| {
        let train_ds = dataset.select_rows(&assignment.train_rows(f))?;
        let model = train(&train_ds, config)?;
        let test_ds = dataset.select_rows(&assignment.test_rows(f))?;
        let bins = model.bin_all_columns(&test_ds)?;
        let scores = model.scores_from_bins(&bins, test_ds.n());
        let probs: Vec<f64> = scores.iter().map(|s| sigmoid(*s)).collect();
        Ok([
            auc(test_ds.target(), &scores)?,
            brier(test_ds.target(), &probs, test_ds.weights())?,
            balanced_accuracy(test_ds.target(), &probs, test_ds.weights(), 0.5)?,
        ])
    });
    let mut cols: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for fold in per_fold {
        let [a, b, c] = fold?;
        cols[0].push(a);
        cols[1].push(b);
        cols[2].push(c);
    }
    let [a, b, c] = cols;
    Ok(CvReport {
        k,
        seed,
        auc: MetricSummary::from_folds(a),
        brier: MetricSummary::from_folds(b),
        balanced_accuracy: MetricSummary::from_folds(c),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopKPoint {
    /// Number of leading groups included.
    pub m: usize,
    pub auc_mean: f64,
    pub auc_sem: f64,
    pub brier_mean: f64,
    pub brier_sem: f64,
}

/// Cross-validated accuracy when training on only the top-m groups' features,
/// for m = 1..=len. The fold seed is the training config's seed.
pub fn top_k_groups_curve(
    dataset: &Dataset,
    groups_ranked: &[FeatureGroup],
    config: &TrainConfig,
    k_folds: usize,
) -> Result<Vec<TopKPoint>> {
    if groups_ranked.is_empty() {
        return Err(Error::InvalidConfig("top-k curve needs at least one group".into()));
    }
    let mut points = Vec::with_capacity(groups_ranked.len());
    for m in 1..=groups_ranked.len() {
        let refs: Vec<&FeatureGroup> = groups_ranked[..m].iter().collect();
        let union = FeatureGroup::union("top", &refs)?;
        let sub = dataset.select_features(&union.members)?;
        let report = cv_evaluate(&sub, config, k_folds, config.seed)?;
        points.push(TopKPoint {
            m,
            auc_mean: report.auc.mean,
            auc_sem: report.auc.sem,
            brier_mean: report.brier.mean,
            brier_sem: report.brier.sem,
        });
    }
    Ok(points)
}

pub fn top_k_curve_csv(points: &[TopKPoint]) -> String {
    let mut out = String::from("m,auc_mean,auc_sem,brier_mean,brier_sem\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.m, p.auc_mean, p.auc_sem, p.brier_mean, p.brier_sem
        ));
    }
    out
}

/// Group importance of the union of the top-m units, for m = 1..=len.
/// Overlapping members are deduplicated before scoring.
pub fn cumulative_importance_curve(
    model: &GamModel,
    dataset: &Dataset,
    units_ranked: &[FeatureGroup],
) -> Result<Vec<(usize, f64)>> {
    let mut curve = Vec::with_capacity(units_ranked.len());
    for m in 1..=units_ranked.len() {
        let refs: Vec<&FeatureGroup> = units_ranked[..m].iter().collect();
        let union = FeatureGroup::union("cumulative", &refs)?;
        curve.push((m, group_importance(model, dataset, &union, false)?));
    }
    Ok(curve)
}

pub fn cumulative_curve_csv(curve: &[(usize, f64)]) -> String {
    let mut out = String::from("m,importance\n");
    for (m, v) in curve {
        out.push_str(&format!("{m},{v}\n"));
    }
    out
}
