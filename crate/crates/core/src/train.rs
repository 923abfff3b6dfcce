//! Cyclic gradient boosting of per-bin shape functions.
//!
//! Each boosting round visits every feature in dataset order. For one feature
//! the update is a histogram step: every bin moves by `learning_rate` times
//! the weighted average residual `y - p` of the training samples it holds,
//! with predictions refreshed feature-by-feature (later features in a round
//! see the earlier updates). Bins that hold no training weight never move.
//!
//! With `validation_fraction > 0` a seeded shuffle holds out that fraction of
//! rows and training stops once the held-out log loss has failed to improve
//! for `patience` consecutive rounds.
//!
//! After boosting, every shape function is centered: its weighted mean
//! contribution over the training data moves into the intercept, so shapes
//! read as signed deviations from the base rate. When pair terms are trained
//! they are subsequently purified (see [`purify_pairs`]) so that no additive
//! main-effect mass hides inside a pair matrix.
//!
//! Training is single-threaded on purpose: given the same dataset, config and
//! seed it produces byte-identical serialized models.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::binning::{fit_bins, BinMap};
use crate::data::Dataset;
use crate::error::Error;
use crate::model::{log_loss_term, sigmoid, FeatureShape, GamModel, Link, ModelMeta, PairShape};
use crate::rng::{ColumnRng, SPLIT_STREAM};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub rounds: usize,
    /// Consecutive non-improving validation rounds tolerated before stopping.
    pub patience: usize,
    /// Fraction of rows held out for early stopping; 0 disables it.
    pub validation_fraction: f64,
    pub max_bins: usize,
    /// Feature-name pairs to model jointly after the main effects converge.
    pub pairs: Vec<(String, String)>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            rounds: 2000,
            patience: 50,
            validation_fraction: 0.15,
            max_bins: 256,
            pairs: Vec::new(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Digest of the resolved configuration, stored in the model metadata.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialization cannot fail");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    fn validate(&self, dataset: &Dataset) -> Result<Vec<(usize, usize)>> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.rounds == 0 {
            return Err(Error::InvalidConfig("rounds must be at least 1".into()));
        }
        if self.patience == 0 {
            return Err(Error::InvalidConfig("patience must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::InvalidConfig(format!(
                "validation_fraction must be in [0, 1), got {}",
                self.validation_fraction
            )));
        }
        if self.max_bins < 2 || self.max_bins > 60_000 {
            return Err(Error::InvalidConfig(format!(
                "max_bins must be in [2, 60000], got {}",
                self.max_bins
            )));
        }
        let mut resolved = Vec::with_capacity(self.pairs.len());
        for (a, b) in &self.pairs {
            let ia = dataset
                .feature_index(a)
                .ok_or_else(|| Error::UnknownFeature(a.clone()))?;
            let ib = dataset
                .feature_index(b)
                .ok_or_else(|| Error::UnknownFeature(b.clone()))?;
            if ia == ib {
                return Err(Error::InvalidConfig(format!(
                    "pair ({a}, {b}) uses the same feature twice"
                )));
            }
            let key = (ia.min(ib), ia.max(ib));
            if resolved.contains(&key) {
                return Err(Error::InvalidConfig(format!("duplicate pair ({a}, {b})")));
            }
            resolved.push(key);
        }
        Ok(resolved)
    }
}

/// Train a model. See the module docs for the algorithm; the result is a pure
/// function of `(dataset, config)`.
pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<GamModel> {
    train_traced(dataset, config, None)
}

/// Like [`train`], also recording the per-round training log loss (used by
/// tests to pin down the "loss never increases" behaviour).
pub(crate) fn train_traced(
    dataset: &Dataset,
    config: &TrainConfig,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<GamModel> {
    let pair_indices = config.validate(dataset)?;
    let n = dataset.n();
    let y = dataset.target();
    if !(y.contains(&0) && y.contains(&1)) {
        return Err(Error::SingleClassTarget);
    }
    let w: Vec<f64> = (0..n).map(|i| dataset.weight_at(i)).collect();

    // quantile bins per feature, fitted on the full dataset
    let mut maps: Vec<BinMap> = Vec::with_capacity(dataset.feature_count());
    for fi in 0..dataset.feature_count() {
        let map = fit_bins(dataset.column(fi), config.max_bins, dataset.weights())
            .map_err(|e| e.with_feature(&dataset.feature_names()[fi]))?;
        maps.push(map);
    }
    let bins: Vec<Vec<u32>> = maps
        .iter()
        .enumerate()
        .map(|(fi, m)| dataset.column(fi).iter().map(|v| m.apply(*v) as u32).collect())
        .collect();
    let slots: Vec<usize> = maps.iter().map(|m| m.total_bins()).collect();

    // seeded holdout split for early stopping
    let (train_rows, val_rows) = split_rows(n, config);

    let (mut sy, mut sw) = (0.0f64, 0.0f64);
    for &s in &train_rows {
        sy += w[s] * y[s] as f64;
        sw += w[s];
    }
    if sw <= 0.0 {
        return Err(Error::InvalidConfig("total training weight is zero".into()));
    }
    let base = (sy / sw).clamp(1e-12, 1.0 - 1e-12);
    let intercept = (base / (1.0 - base)).ln();

    let mut scores = vec![intercept; n];
    let mut shapes: Vec<Vec<f64>> = slots.iter().map(|k| vec![0.0; *k]).collect();

    // per-bin training weight never changes between rounds
    let bin_w: Vec<Vec<f64>> = (0..maps.len())
        .map(|fi| {
            let mut acc = vec![0.0f64; slots[fi]];
            for &s in &train_rows {
                acc[bins[fi][s] as usize] += w[s];
            }
            acc
        })
        .collect();

    let mut rounds_run = 0usize;
    let mut best_val = f64::INFINITY;
    let mut streak = 0usize;
    let mut acc: Vec<f64> = Vec::new();
    'rounds: for round in 1..=config.rounds {
        for fi in 0..maps.len() {
            let col = &bins[fi];
            acc.clear();
            acc.resize(slots[fi], 0.0);
            for &s in &train_rows {
                let p = sigmoid(scores[s]);
                acc[col[s] as usize] += w[s] * (y[s] as f64 - p);
            }
            let shape = &mut shapes[fi];
            for (b, a) in acc.iter_mut().enumerate() {
                *a = if bin_w[fi][b] > 0.0 {
                    config.learning_rate * *a / bin_w[fi][b]
                } else {
                    0.0
                };
                shape[b] += *a;
            }
            for (s, score) in scores.iter_mut().enumerate() {
                *score += acc[col[s] as usize];
            }
        }
        rounds_run = round;

        let train_loss = subset_log_loss(&train_rows, &scores, y, &w);
        if !train_loss.is_finite() {
            return Err(Error::NanLoss { round });
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(train_loss);
        }

        if !val_rows.is_empty() {
            let val_loss = subset_log_loss(&val_rows, &scores, y, &w);
            if val_loss < best_val {
                best_val = val_loss;
                streak = 0;
            } else {
                streak += 1;
                if streak == config.patience {
                    break 'rounds;
                }
            }
        }
    }

    // optional pair phase: boost the requested pair matrices on the same
    // residuals, with its own early-stopping window
    let mut pair_mats: Vec<Vec<f64>> = Vec::new();
    if !pair_indices.is_empty() {
        let pair_cells: Vec<(usize, usize)> =
            pair_indices.iter().map(|(i, j)| (slots[*i], slots[*j])).collect();
        pair_mats = pair_cells.iter().map(|(r, c)| vec![0.0; r * c]).collect();
        let pair_w: Vec<Vec<f64>> = pair_indices
            .iter()
            .zip(&pair_cells)
            .map(|(&(i, j), &(_, cols))| {
                let mut acc = vec![0.0f64; slots[i] * cols];
                for &s in &train_rows {
                    acc[bins[i][s] as usize * cols + bins[j][s] as usize] += w[s];
                }
                acc
            })
            .collect();

        let mut best_val = if val_rows.is_empty() {
            f64::INFINITY
        } else {
            subset_log_loss(&val_rows, &scores, y, &w)
        };
        let mut streak = 0usize;
        'pair_rounds: for round in 1..=config.rounds {
            for (pi, &(i, j)) in pair_indices.iter().enumerate() {
                let cols = pair_cells[pi].1;
                acc.clear();
                acc.resize(pair_mats[pi].len(), 0.0);
                for &s in &train_rows {
                    let p = sigmoid(scores[s]);
                    acc[bins[i][s] as usize * cols + bins[j][s] as usize] += w[s] * (y[s] as f64 - p);
                }
                let mat = &mut pair_mats[pi];
                for (c, a) in acc.iter_mut().enumerate() {
                    *a = if pair_w[pi][c] > 0.0 {
                        config.learning_rate * *a / pair_w[pi][c]
                    } else {
                        0.0
                    };
                    mat[c] += *a;
                }
                for (s, score) in scores.iter_mut().enumerate() {
                    *score += acc[bins[i][s] as usize * cols + bins[j][s] as usize];
                }
            }
            let train_loss = subset_log_loss(&train_rows, &scores, y, &w);
            if !train_loss.is_finite() {
                return Err(Error::NanLoss { round });
            }
            if !val_rows.is_empty() {
                let val_loss = subset_log_loss(&val_rows, &scores, y, &w);
                if val_loss < best_val {
                    best_val = val_loss;
                    streak = 0;
                } else {
                    streak += 1;
                    if streak == config.patience {
                        break 'pair_rounds;
                    }
                }
            }
        }
    }

    let features: Vec<FeatureShape> = (0..maps.len())
        .map(|fi| {
            let vb = maps[fi].value_bins();
            FeatureShape {
                name: dataset.feature_names()[fi].clone(),
                cuts: maps[fi].cuts.clone(),
                contributions: shapes[fi][..vb].to_vec(),
                missing_contribution: shapes[fi][vb],
            }
        })
        .collect();
    let pairs: Vec<PairShape> = pair_indices
        .iter()
        .zip(pair_mats)
        .map(|(&(i, j), flat)| {
            let cols = slots[j];
            PairShape {
                i: dataset.feature_names()[i].clone(),
                j: dataset.feature_names()[j].clone(),
                cuts_i: maps[i].cuts.clone(),
                cuts_j: maps[j].cuts.clone(),
                matrix: flat.chunks(cols).map(|r| r.to_vec()).collect(),
            }
        })
        .collect();

    let mut model = GamModel {
        intercept,
        link: Link::Logistic,
        features,
        pairs,
        meta: ModelMeta {
            seed: config.seed,
            learning_rate: config.learning_rate,
            rounds_run,
            max_bins: config.max_bins,
            config_hash: config.hash(),
        },
    };

    if !model.pairs.is_empty() {
        purify_sweeps(&mut model, &bins, &w);
    }
    center_mains(&mut model, &bins, &w);
    Ok(model)
}

fn split_rows(n: usize, config: &TrainConfig) -> (Vec<usize>, Vec<usize>) {
    if config.validation_fraction > 0.0 {
        let n_val = (config.validation_fraction * n as f64).floor() as usize;
        if n_val > 0 {
            let mut rng = ColumnRng::new(config.seed, SPLIT_STREAM);
            let shuffled = rng.shuffled_indices(n);
            let mut val: Vec<usize> = shuffled[..n_val].to_vec();
            let mut train: Vec<usize> = shuffled[n_val..].to_vec();
            val.sort_unstable();
            train.sort_unstable();
            return (train, val);
        }
    }
    ((0..n).collect(), Vec::new())
}

fn subset_log_loss(rows: &[usize], scores: &[f64], y: &[u8], w: &[f64]) -> f64 {
    let mut sl = 0.0f64;
    let mut sw = 0.0f64;
    for &s in rows {
        sl += w[s] * log_loss_term(scores[s], y[s]);
        sw += w[s];
    }
    if sw > 0.0 {
        sl / sw
    } else {
        0.0
    }
}

/// Move each shape function's weighted mean into the intercept. Bins that hold
/// no data keep contribution 0 so that unseen inputs score neutrally.
fn center_mains(model: &mut GamModel, bins: &[Vec<u32>], w: &[f64]) {
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return;
    }
    for (fi, shape) in model.features.iter_mut().enumerate() {
        let slots = shape.value_bins() + 1;
        let mut bw = vec![0.0f64; slots];
        for (s, b) in bins[fi].iter().enumerate() {
            bw[*b as usize] += w[s];
        }
        let mut mean = 0.0;
        for b in 0..slots {
            let c = if b < shape.contributions.len() {
                shape.contributions[b]
            } else {
                shape.missing_contribution
            };
            mean += bw[b] * c;
        }
        mean /= total;
        for (b, c) in shape.contributions.iter_mut().enumerate() {
            *c = if bw[b] > 0.0 { *c - mean } else { 0.0 };
        }
        shape.missing_contribution = if bw[slots - 1] > 0.0 {
            shape.missing_contribution - mean
        } else {
            0.0
        };
        model.intercept += mean;
    }
}

/// Iteratively subtract each pair matrix's weighted row and column means,
/// folding them into the corresponding main effects, until the largest move
/// is below 1e-9 (at most 100 sweeps). Returns the number of sweeps.
fn purify_sweeps(model: &mut GamModel, bins: &[Vec<u32>], w: &[f64]) -> usize {
    struct PairCtx {
        fi: usize,
        fj: usize,
        joint: Vec<f64>,
        row_w: Vec<f64>,
        col_w: Vec<f64>,
        rows: usize,
        cols: usize,
    }

    let ctxs: Vec<PairCtx> = model
        .pairs
        .iter()
        .map(|p| {
            let fi = model.feature_index(&p.i).expect("pair feature in model");
            let fj = model.feature_index(&p.j).expect("pair feature in model");
            let rows = p.matrix.len();
            let cols = p.matrix[0].len();
            let mut joint = vec![0.0f64; rows * cols];
            for (s, weight) in w.iter().enumerate() {
                joint[bins[fi][s] as usize * cols + bins[fj][s] as usize] += weight;
            }
            let mut row_w = vec![0.0f64; rows];
            let mut col_w = vec![0.0f64; cols];
            for r in 0..rows {
                for c in 0..cols {
                    row_w[r] += joint[r * cols + c];
                    col_w[c] += joint[r * cols + c];
                }
            }
            PairCtx {
                fi,
                fj,
                joint,
                row_w,
                col_w,
                rows,
                cols,
            }
        })
        .collect();

    let add_to_main = |features: &mut [FeatureShape], fi: usize, bin: usize, m: f64| {
        let shape = &mut features[fi];
        if bin < shape.contributions.len() {
            shape.contributions[bin] += m;
        } else {
            shape.missing_contribution += m;
        }
    };

    for sweep in 1..=100 {
        let mut max_move = 0.0f64;
        for (p, ctx) in model.pairs.iter_mut().zip(&ctxs) {
            for r in 0..ctx.rows {
                if ctx.row_w[r] <= 0.0 {
                    continue;
                }
                let mut m = 0.0;
                for c in 0..ctx.cols {
                    m += ctx.joint[r * ctx.cols + c] * p.matrix[r][c];
                }
                m /= ctx.row_w[r];
                for c in 0..ctx.cols {
                    p.matrix[r][c] -= m;
                }
                add_to_main(&mut model.features, ctx.fi, r, m);
                max_move = max_move.max(m.abs());
            }
            for c in 0..ctx.cols {
                if ctx.col_w[c] <= 0.0 {
                    continue;
                }
                let mut m = 0.0;
                for r in 0..ctx.rows {
                    m += ctx.joint[r * ctx.cols + c] * p.matrix[r][c];
                }
                m /= ctx.col_w[c];
                for r in 0..ctx.rows {
                    p.matrix[r][c] -= m;
                }
                add_to_main(&mut model.features, ctx.fj, c, m);
                max_move = max_move.max(m.abs());
            }
        }
        if max_move < 1e-9 {
            return sweep;
        }
    }
    100
}

/// Purify a trained model in place: pair matrices lose their weighted row and
/// column means to the main effects, main effects are re-centered into the
/// intercept, and per-sample predictions are preserved (within accumulated
/// rounding, well under 1e-7). A model without pairs is returned unchanged.
pub fn purify_pairs(model: &mut GamModel, dataset: &Dataset) -> Result<()> {
    if model.pairs.is_empty() {
        return Ok(());
    }
    let bins = model.bin_all_columns(dataset)?;
    let w: Vec<f64> = (0..dataset.n()).map(|i| dataset.weight_at(i)).collect();
    purify_sweeps(model, &bins, &w);
    center_mains(model, &bins, &w);
    Ok(())
}
