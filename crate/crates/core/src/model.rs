//! The fitted additive model.
//!
//! A [`GamModel`] is an intercept plus one lookup table per feature (and
//! optionally per feature pair), indexed by quantile bin. The serialized form
//! is a single JSON document; floats use shortest round-trip formatting, and
//! field order is fixed, so serializing the same model twice yields identical
//! bytes.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::binning::bin_index;
use crate::data::Dataset;
use crate::error::Error;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Logistic,
}

/// Per-feature shape function: one additive contribution per value bin, plus
/// a dedicated contribution for missing values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureShape {
    pub name: String,
    /// Strictly increasing interior cut points (see [`crate::binning`]).
    pub cuts: Vec<f64>,
    /// One value per value bin; length `cuts.len() + 1`.
    pub contributions: Vec<f64>,
    pub missing_contribution: f64,
}

impl FeatureShape {
    pub fn value_bins(&self) -> usize {
        self.cuts.len() + 1
    }

    /// Bin index for a raw value (missing bin included).
    pub fn bin(&self, v: f64) -> usize {
        bin_index(&self.cuts, v)
    }

    /// Contribution for a bin index as produced by [`FeatureShape::bin`].
    pub fn contribution(&self, bin: usize) -> f64 {
        if bin < self.contributions.len() {
            self.contributions[bin]
        } else {
            self.missing_contribution
        }
    }
}

/// Pairwise shape: a matrix of contributions over the two features' bins.
/// `i`/`j` name the features; the matrix has one row per bin of `i` (missing
/// bin last) and one column per bin of `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairShape {
    pub i: String,
    pub j: String,
    pub cuts_i: Vec<f64>,
    pub cuts_j: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
}

impl PairShape {
    pub fn contribution(&self, bin_i: usize, bin_j: usize) -> f64 {
        self.matrix[bin_i][bin_j]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub seed: u64,
    pub learning_rate: f64,
    pub rounds_run: usize,
    pub max_bins: usize,
    /// Digest of the resolved training configuration.
    pub config_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GamModel {
    pub intercept: f64,
    pub link: Link,
    pub features: Vec<FeatureShape>,
    pub pairs: Vec<PairShape>,
    pub meta: ModelMeta,
}

impl GamModel {
    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    /// Additive score (log-odds under the logistic link) for one sample given
    /// as a feature-name → value map. The map must supply exactly the model's
    /// features; missing values are NaN.
    pub fn predict_score(&self, sample: &HashMap<String, f64>) -> Result<f64> {
        for name in sample.keys() {
            if self.feature_index(name).is_none() {
                return Err(Error::UnknownFeature(name.clone()));
            }
        }
        let mut bins = Vec::with_capacity(self.features.len());
        let mut score = self.intercept;
        for shape in &self.features {
            let v = *sample
                .get(&shape.name)
                .ok_or_else(|| Error::MissingSampleFeature(shape.name.clone()))?;
            let b = shape.bin(v);
            bins.push(b);
            score += shape.contribution(b);
        }
        for pair in &self.pairs {
            let bi = bin_index(&pair.cuts_i, *sample.get(&pair.i).unwrap());
            let bj = bin_index(&pair.cuts_j, *sample.get(&pair.j).unwrap());
            score += pair.contribution(bi, bj);
        }
        Ok(score)
    }

    /// Predicted probability of the positive class for one sample.
    pub fn predict_proba(&self, sample: &HashMap<String, f64>) -> Result<f64> {
        Ok(sigmoid(self.predict_score(sample)?))
    }

    /// Bin one dataset column (looked up by model feature index) under this
    /// model's cuts.
    pub(crate) fn bin_feature_column(&self, dataset: &Dataset, fi: usize) -> Result<Vec<u32>> {
        let shape = &self.features[fi];
        let col = dataset.column_by_name(&shape.name)?;
        Ok(col.iter().map(|v| shape.bin(*v) as u32).collect())
    }

    /// Bin every model feature column of `dataset`.
    pub(crate) fn bin_all_columns(&self, dataset: &Dataset) -> Result<Vec<Vec<u32>>> {
        (0..self.features.len())
            .map(|fi| self.bin_feature_column(dataset, fi))
            .collect()
    }

    /// Scores for every row of a pre-binned dataset (`bins[feature][row]`).
    pub(crate) fn scores_from_bins(&self, bins: &[Vec<u32>], n: usize) -> Vec<f64> {
        let mut scores = vec![self.intercept; n];
        for (fi, shape) in self.features.iter().enumerate() {
            let col = &bins[fi];
            for (s, score) in scores.iter_mut().enumerate() {
                *score += shape.contribution(col[s] as usize);
            }
        }
        for pair in &self.pairs {
            let pi = self.feature_index(&pair.i).expect("pair feature in model");
            let pj = self.feature_index(&pair.j).expect("pair feature in model");
            for (s, score) in scores.iter_mut().enumerate() {
                *score += pair.contribution(bins[pi][s] as usize, bins[pj][s] as usize);
            }
        }
        scores
    }

    /// Serialize to the canonical JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::write(path, e))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: GamModel = serde_json::from_str(text).map_err(|e| Error::ModelFormat {
            path: "<string>".into(),
            detail: e.to_string(),
        })?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: GamModel = serde_json::from_str(&text).map_err(|e| Error::ModelFormat {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        model.validate().map_err(|e| match e {
            Error::ModelFormat { detail, .. } => Error::ModelFormat {
                path: path.display().to_string(),
                detail,
            },
            other => other,
        })?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let bad = |detail: String| {
            Err(Error::ModelFormat {
                path: "<string>".into(),
                detail,
            })
        };
        if !self.intercept.is_finite() {
            return bad("intercept is not finite".into());
        }
        for f in &self.features {
            if f.contributions.len() != f.cuts.len() + 1 {
                return bad(format!(
                    "feature '{}': {} contributions for {} cuts",
                    f.name,
                    f.contributions.len(),
                    f.cuts.len()
                ));
            }
            if f.cuts.windows(2).any(|p| p[0] >= p[1]) {
                return bad(format!("feature '{}': cuts are not strictly increasing", f.name));
            }
        }
        for p in &self.pairs {
            let (fi, fj) = match (self.feature_index(&p.i), self.feature_index(&p.j)) {
                (Some(a), Some(b)) => (a, b),
                _ => return bad(format!("pair ({}, {}) references unknown features", p.i, p.j)),
            };
            if fi >= fj {
                return bad(format!("pair ({}, {}) is not in feature order", p.i, p.j));
            }
            let rows = p.cuts_i.len() + 2;
            let cols = p.cuts_j.len() + 2;
            if p.matrix.len() != rows || p.matrix.iter().any(|r| r.len() != cols) {
                return bad(format!("pair ({}, {}): matrix shape mismatch", p.i, p.j));
            }
        }
        Ok(())
    }
}

pub(crate) fn sigmoid(score: f64) -> f64 {
    1.0 / (1.0 + (-score).exp())
}

/// Numerically stable negative log-likelihood of one sample.
pub(crate) fn log_loss_term(score: f64, y: u8) -> f64 {
    // ln(1 + e^-s) + (1-y) s, rearranged to keep the exponent nonpositive
    if score >= 0.0 {
        (-score).exp().ln_1p() + (1.0 - y as f64) * score
    } else {
        score.exp().ln_1p() - y as f64 * score
    }
}
