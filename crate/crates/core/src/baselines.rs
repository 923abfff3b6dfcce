//! Comparison baselines: grouped permutation importance and greedy forward
//! selection.
//!
//! Grouped permutation importance (GPI) measures a group by how much a metric
//! degrades when the group's columns are jointly shuffled — one shared row
//! permutation per repeat, so the within-group joint distribution survives.
//! Every repeat re-scores the whole dataset, which is exactly why it is slow
//! relative to shape-function importance: the cost carries a factor of
//! `repeats` times full-model prediction.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureGroup};
use crate::error::Error;
use crate::evaluation::{auc, cv_evaluate};
use crate::exec::{run_indexed, ExecMode};
use crate::importance::group_importance;
use crate::model::{log_loss_term, GamModel};
use crate::rng::{derive_seed, ColumnRng, PERMUTE_STREAM};
use crate::train::{train, TrainConfig};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GpiMetric {
    Auc,
    Logloss,
}

impl std::fmt::Display for GpiMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GpiMetric::Auc => "auc",
            GpiMetric::Logloss => "logloss",
        })
    }
}

impl std::str::FromStr for GpiMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auc" => Ok(GpiMetric::Auc),
            "logloss" => Ok(GpiMetric::Logloss),
            other => Err(Error::InvalidConfig(format!(
                "unknown metric '{other}', expected auc or logloss"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpiResult {
    pub group: String,
    pub metric: GpiMetric,
    pub baseline: f64,
    /// Metric value after each repeat's shuffle; length equals `repeats`.
    pub permuted: Vec<f64>,
    /// Oriented so that larger means more important for both metrics; may be
    /// negative when a shuffle luckily improves the metric.
    pub mean_drop: f64,
    pub repeats: usize,
    pub seed: u64,
}

impl GpiResult {
    /// One summary row: `group,metric,baseline,mean_drop,repeats`.
    pub fn to_csv(&self) -> String {
        format!(
            "group,metric,baseline,mean_drop,repeats\n{},{},{},{},{}\n",
            self.group, self.metric, self.baseline, self.mean_drop, self.repeats
        )
    }
}

pub fn grouped_permutation_importance(
    model: &GamModel,
    dataset: &Dataset,
    group: &FeatureGroup,
    metric: GpiMetric,
    repeats: usize,
    seed: u64,
) -> Result<GpiResult> {
    grouped_permutation_importance_with_mode(
        model,
        dataset,
        group,
        metric,
        repeats,
        seed,
        ExecMode::default(),
    )
}

pub fn grouped_permutation_importance_with_mode(
    model: &GamModel,
    dataset: &Dataset,
    group: &FeatureGroup,
    metric: GpiMetric,
    repeats: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<GpiResult> {
    if group.members.is_empty() {
        return Err(Error::EmptyGroup(group.name.clone()));
    }
    if repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be at least 1".into()));
    }
    let mut members = Vec::with_capacity(group.members.len());
    for m in &group.members {
        members.push(model.feature_index(m).ok_or_else(|| Error::UnknownGroupMember {
            group: group.name.clone(),
            feature: m.clone(),
        })?);
    }

    let n = dataset.n();
    let bins = model.bin_all_columns(dataset)?;
    let baseline = metric_value(metric, dataset, &model.scores_from_bins(&bins, n))?;

    // each repeat derives its own seed, so results don't depend on scheduling
    let per_repeat: Vec<Result<f64>> = run_indexed(repeats, mode, |rep| {
        let mut rng = ColumnRng::new(derive_seed(seed, rep as u64), PERMUTE_STREAM);
        let perm = rng.shuffled_indices(n);
        let mut shuffled = bins.clone();
        for &mi in &members {
            shuffled[mi] = perm.iter().map(|&src| bins[mi][src]).collect();
        }
        metric_value(metric, dataset, &model.scores_from_bins(&shuffled, n))
    });
    let permuted = per_repeat.into_iter().collect::<Result<Vec<f64>>>()?;
    let mean_permuted = permuted.iter().sum::<f64>() / permuted.len() as f64;
    let mean_drop = match metric {
        GpiMetric::Auc => baseline - mean_permuted,
        GpiMetric::Logloss => mean_permuted - baseline,
    };
    Ok(GpiResult {
        group: group.name.clone(),
        metric,
        baseline,
        permuted,
        mean_drop,
        repeats,
        seed,
    })
}

fn metric_value(metric: GpiMetric, dataset: &Dataset, scores: &[f64]) -> Result<f64> {
    match metric {
        GpiMetric::Auc => auc(dataset.target(), scores),
        GpiMetric::Logloss => {
            let y = dataset.target();
            let mut sl = 0.0f64;
            let mut sw = 0.0f64;
            for (s, score) in scores.iter().enumerate() {
                let w = dataset.weight_at(s);
                sl += w * log_loss_term(*score, y[s]);
                sw += w;
            }
            Ok(if sw > 0.0 { sl / sw } else { 0.0 })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionObjective {
    /// Score candidate sets by group importance on one model trained on all
    /// features up front.
    GroupImportance,
    /// Retrain on the candidate feature set and score by 5-fold mean AUC.
    CvAuc,
}

impl std::str::FromStr for SelectionObjective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "group_importance" => Ok(SelectionObjective::GroupImportance),
            "cv_auc" => Ok(SelectionObjective::CvAuc),
            other => Err(Error::InvalidConfig(format!(
                "unknown objective '{other}', expected group_importance or cv_auc"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub name: String,
    /// Objective value of the selected set after adding this unit.
    pub value: f64,
}

pub fn selection_csv(steps: &[SelectionStep]) -> String {
    let mut out = String::from("step,unit,value\n");
    for (i, s) in steps.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", i + 1, s.name, s.value));
    }
    out
}

/// Greedily add the unit that maximizes the objective of the selected set,
/// `budget` times. Ties break lexicographically by unit name.
pub fn greedy_forward_selection(
    dataset: &Dataset,
    units: &[FeatureGroup],
    budget: usize,
    objective: SelectionObjective,
    config: &TrainConfig,
    seed: u64,
) -> Result<Vec<SelectionStep>> {
    if units.is_empty() {
        return Err(Error::InvalidConfig("selection needs at least one unit".into()));
    }
    if budget == 0 || budget > units.len() {
        return Err(Error::InvalidConfig(format!(
            "budget must be in [1, {}], got {budget}",
            units.len()
        )));
    }
    for u in units {
        u.validate_members(dataset.feature_names())?;
    }
    let full_model = match objective {
        SelectionObjective::GroupImportance => Some(train(dataset, config)?),
        SelectionObjective::CvAuc => None,
    };

    let mut selected: Vec<usize> = Vec::new();
    let mut steps = Vec::with_capacity(budget);
    while selected.len() < budget {
        let mut best: Option<(usize, f64)> = None;
        for cand in 0..units.len() {
            if selected.contains(&cand) {
                continue;
            }
            let refs: Vec<&FeatureGroup> =
                selected.iter().chain([&cand]).map(|&u| &units[u]).collect();
            let union = FeatureGroup::union("selected", &refs)?;
            let value = match (objective, &full_model) {
                (SelectionObjective::GroupImportance, Some(model)) => {
                    group_importance(model, dataset, &union, false)?
                }
                _ => {
                    let sub = dataset.select_features(&union.members)?;
                    cv_evaluate(&sub, config, 5, seed)?.auc.mean
                }
            };
            let wins = match best {
                None => true,
                Some((b, bv)) => {
                    value > bv || (value == bv && units[cand].name < units[b].name)
                }
            };
            if wins {
                best = Some((cand, value));
            }
        }
        let (unit, value) = best.expect("candidates remain under budget");
        selected.push(unit);
        steps.push(SelectionStep { name: units[unit].name.clone(), value });
    }
    Ok(steps)
}
