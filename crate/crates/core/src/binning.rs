//! Weighted quantile binning of numeric columns.
//!
//! A [`BinMap`] is a list of strictly increasing interior cut points plus one
//! trailing bin reserved for missing values. Value `v` lands in bin
//! `#{cuts <= v}`, so everything below the first cut is bin 0 and everything
//! at or above the last cut is the top value bin — out-of-range values clamp
//! automatically. Any non-finite input counts as missing.
//!
//! Cut placement only looks at the *order* of the distinct finite values and
//! their weights, never at their spacing, so applying any strictly increasing
//! transform to a column leaves every bin assignment unchanged.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinMap {
    /// Strictly increasing interior cut points.
    pub cuts: Vec<f64>,
    /// Bin budget the map was fitted with.
    pub max_bins: usize,
    /// The trailing index is reserved for missing values. Always true; kept
    /// explicit so serialized maps stay self-describing.
    pub has_missing_bin: bool,
}

impl BinMap {
    /// Number of bins addressable by finite values.
    pub fn value_bins(&self) -> usize {
        self.cuts.len() + 1
    }

    /// Index of the missing-value bin (one past the top value bin).
    pub fn missing_bin(&self) -> usize {
        self.cuts.len() + 1
    }

    /// Total number of bins including the missing bin.
    pub fn total_bins(&self) -> usize {
        self.cuts.len() + 2
    }

    /// Bin index for a value; total over all of `f64`.
    pub fn apply(&self, v: f64) -> usize {
        bin_index(&self.cuts, v)
    }
}

/// Bin index of `v` against a cut list: `#{cuts <= v}`, with non-finite
/// values mapping to the missing bin `cuts.len() + 1`.
pub fn bin_index(cuts: &[f64], v: f64) -> usize {
    if !v.is_finite() {
        return cuts.len() + 1;
    }
    cuts.partition_point(|c| *c <= v)
}

/// Midpoint of two ordered values, nudged so that the resulting cut keeps
/// `lo` strictly below it and `hi` at-or-above semantics intact (a cut `c`
/// separates correctly iff `lo < c <= hi`).
fn cut_between(lo: f64, hi: f64) -> f64 {
    let m = lo * 0.5 + hi * 0.5;
    if m > lo && m <= hi {
        m
    } else {
        hi
    }
}

/// Fit a quantile bin map to one column.
///
/// With `d` distinct finite values and `d <= max_bins`, every distinct value
/// gets its own bin (`d - 1` midpoint cuts). Otherwise `max_bins - 1` cut
/// candidates are placed at the weighted quantiles of the distinct values;
/// equal values always stay in the same (lower) bin because cuts sit strictly
/// between neighbouring distinct values. `weights` defaults to all ones.
pub fn fit_bins(values: &[f64], max_bins: usize, weights: Option<&[f64]>) -> Result<BinMap> {
    if max_bins < 2 {
        return Err(Error::InvalidConfig(format!(
            "max_bins must be at least 2, got {max_bins}"
        )));
    }
    if let Some(w) = weights {
        if w.len() != values.len() {
            return Err(Error::LengthMismatch {
                what: "weights".into(),
                expected: values.len(),
                got: w.len(),
            });
        }
    }

    let mut finite: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .map(|(i, v)| (*v, weights.map_or(1.0, |w| w[i])))
        .collect();
    if finite.is_empty() {
        return Err(Error::NoFiniteValues("column".into()));
    }
    finite.sort_by(|a, b| a.0.total_cmp(&b.0));

    // aggregate numerically equal values (this also merges -0.0 with 0.0)
    let mut distinct: Vec<(f64, f64)> = Vec::new();
    for (v, w) in finite {
        match distinct.last_mut() {
            Some((lv, lw)) if *lv == v => *lw += w,
            _ => distinct.push((v, w)),
        }
    }

    let d = distinct.len();
    let mut cuts = Vec::new();
    if d <= max_bins {
        for pair in distinct.windows(2) {
            cuts.push(cut_between(pair[0].0, pair[1].0));
        }
    } else {
        let total: f64 = distinct.iter().map(|(_, w)| w).sum();
        let mut cum = vec![0.0f64; d];
        let mut acc = 0.0;
        for (i, (_, w)) in distinct.iter().enumerate() {
            acc += w;
            cum[i] = acc;
        }
        let mut i = 0usize;
        for j in 1..max_bins {
            let t = total * (j as f64) / (max_bins as f64);
            while i < d && cum[i] < t {
                i += 1;
            }
            if i + 1 < d {
                let c = cut_between(distinct[i].0, distinct[i + 1].0);
                if cuts.last().is_none_or(|last| c > *last) {
                    cuts.push(c);
                }
            }
        }
    }

    Ok(BinMap {
        cuts,
        max_bins,
        has_missing_bin: true,
    })
}
