//! Feature and group importance for fitted additive models.
//!
//! The importance of a single feature is the weighted mean of the absolute
//! contribution its shape function makes across a dataset. The importance of
//! a *group* sums the member contributions per sample **before** taking the
//! absolute value, so members that cancel each other (one says "risk up", the
//! other "risk down") yield a small group importance even though each member
//! alone looks strong. [`naive_sum_importance`] is the rejected alternative —
//! just summing the members' individual importances — kept as a comparison
//! oracle; by the triangle inequality it always bounds the group value from
//! above.
//!
//! Every mean is a chunked compensated sum (see `exec`), so parallel and
//! sequential evaluation produce bitwise-identical values. Member order
//! inside a group is canonicalized before summing, which makes group
//! importance bitwise permutation-invariant, and a singleton group runs the
//! exact code path of [`feature_importance`].

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureGroup};
use crate::error::Error;
use crate::exec::{weighted_mean, ExecMode};
use crate::model::GamModel;
use crate::Result;

/// Weighted mean of `|f_j(x_j)|` over the dataset.
pub fn feature_importance(model: &GamModel, dataset: &Dataset, feature: &str) -> Result<f64> {
    feature_importance_with_mode(model, dataset, feature, ExecMode::default())
}

pub fn feature_importance_with_mode(
    model: &GamModel,
    dataset: &Dataset,
    feature: &str,
    mode: ExecMode,
) -> Result<f64> {
    let idx = model
        .feature_index(feature)
        .ok_or_else(|| Error::UnknownFeature(feature.to_string()))?;
    mean_abs_sum(model, dataset, &[idx], false, mode)
}

/// Weighted mean of `|Σ_{x∈G} f_x(x)|` over the dataset. With `include_pairs`
/// a pair term joins the sum iff both of its endpoints are members.
pub fn group_importance(
    model: &GamModel,
    dataset: &Dataset,
    group: &FeatureGroup,
    include_pairs: bool,
) -> Result<f64> {
    group_importance_with_mode(model, dataset, group, include_pairs, ExecMode::default())
}

pub fn group_importance_with_mode(
    model: &GamModel,
    dataset: &Dataset,
    group: &FeatureGroup,
    include_pairs: bool,
    mode: ExecMode,
) -> Result<f64> {
    let members = resolve_members(model, group)?;
    mean_abs_sum(model, dataset, &members, include_pairs, mode)
}

/// The flawed alternative: sum of the members' individual importances.
pub fn naive_sum_importance(
    model: &GamModel,
    dataset: &Dataset,
    group: &FeatureGroup,
) -> Result<f64> {
    let members = resolve_members(model, group)?;
    let mut total = 0.0;
    for idx in members {
        total += mean_abs_sum(model, dataset, &[idx], false, ExecMode::default())?;
    }
    Ok(total)
}

/// Map group members to model feature indices, sorted ascending. The sorted
/// order is the canonical summation order: any permutation of the same member
/// set produces the same index list, hence bitwise-identical importance.
fn resolve_members(model: &GamModel, group: &FeatureGroup) -> Result<Vec<usize>> {
    let mut members = Vec::with_capacity(group.members.len());
    for m in &group.members {
        let idx = model.feature_index(m).ok_or_else(|| Error::UnknownGroupMember {
            group: group.name.clone(),
            feature: m.clone(),
        })?;
        members.push(idx);
    }
    members.sort_unstable();
    Ok(members)
}

fn mean_abs_sum(
    model: &GamModel,
    dataset: &Dataset,
    members: &[usize],
    include_pairs: bool,
    mode: ExecMode,
) -> Result<f64> {
    if members.is_empty() {
        return Ok(0.0);
    }
    let cols: Vec<Vec<u32>> = members
        .iter()
        .map(|&mi| model.bin_feature_column(dataset, mi))
        .collect::<Result<_>>()?;
    let shapes: Vec<_> = members.iter().map(|&mi| &model.features[mi]).collect();

    // pair terms whose endpoints are both members, with the members' column
    // positions precomputed
    let mut pair_cols: Vec<(usize, usize, usize)> = Vec::new();
    if include_pairs {
        for (pi, pair) in model.pairs.iter().enumerate() {
            let i = model.feature_index(&pair.i).expect("validated pair");
            let j = model.feature_index(&pair.j).expect("validated pair");
            let (Ok(pi_pos), Ok(pj_pos)) =
                (members.binary_search(&i), members.binary_search(&j))
            else {
                continue;
            };
            pair_cols.push((pi, pi_pos, pj_pos));
        }
    }

    Ok(weighted_mean(dataset.n(), mode, |s| {
        let mut sum = 0.0;
        for (shape, col) in shapes.iter().zip(&cols) {
            sum += shape.contribution(col[s] as usize);
        }
        for &(pi, ci, cj) in &pair_cols {
            sum += model.pairs[pi].contribution(cols[ci][s] as usize, cols[cj][s] as usize);
        }
        (sum.abs(), dataset.weight_at(s))
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupImportance {
    pub name: String,
    pub value: f64,
    /// Fraction of the all-features group importance this group explains.
    pub relative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub features: Vec<FeatureImportance>,
    pub groups: Vec<GroupImportance>,
    /// Importance of the group holding every model feature — the scale the
    /// `relative` fractions are measured against.
    pub total: f64,
    /// Group names, descending by value; ties break lexicographically.
    pub ranking: Vec<String>,
}

impl ImportanceReport {
    /// Plot-ready CSV, one row per group in ranking order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value,relative,rank\n");
        for (rank, name) in self.ranking.iter().enumerate() {
            let g = self.groups.iter().find(|g| &g.name == name).expect("ranked group");
            out.push_str(&format!("{},{},{},{}\n", g.name, g.value, g.relative, rank + 1));
        }
        out
    }
}

/// All individual importances, all group importances with relative fractions,
/// and the descending ranking of the groups. Group sums use main effects only.
pub fn importance_report(
    model: &GamModel,
    dataset: &Dataset,
    groups: &[FeatureGroup],
) -> Result<ImportanceReport> {
    importance_report_with_pairs(model, dataset, groups, false)
}

/// [`importance_report`] with pair terms folded into every group sum (and
/// into the all-features total, which always contains both endpoints).
pub fn importance_report_with_pairs(
    model: &GamModel,
    dataset: &Dataset,
    groups: &[FeatureGroup],
    include_pairs: bool,
) -> Result<ImportanceReport> {
    let all_names = model.feature_names();
    let features: Vec<FeatureImportance> = all_names
        .iter()
        .map(|name| {
            Ok(FeatureImportance {
                name: name.clone(),
                value: feature_importance(model, dataset, name)?,
            })
        })
        .collect::<Result<_>>()?;
    let all = FeatureGroup::new("all", all_names)?;
    let total = group_importance(model, dataset, &all, include_pairs)?;

    let mut entries: Vec<GroupImportance> = groups
        .iter()
        .map(|g| {
            let value = group_importance(model, dataset, g, include_pairs)?;
            let relative = if total == 0.0 { 0.0 } else { value / total };
            Ok(GroupImportance { name: g.name.clone(), value, relative })
        })
        .collect::<Result<_>>()?;
    let mut ranking: Vec<usize> = (0..entries.len()).collect();
    ranking.sort_by(|&a, &b| {
        entries[b]
            .value
            .total_cmp(&entries[a].value)
            .then_with(|| entries[a].name.cmp(&entries[b].name))
    });
    let ranking: Vec<String> = ranking.into_iter().map(|i| entries[i].name.clone()).collect();
    entries.sort_by(|a, b| a.name.cmp(&b.name));

    Ok(ImportanceReport { features, groups: entries, total, ranking })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FeatureShape, GamModel, Link, ModelMeta};

    /// Model whose shapes are plain lookup tables over integer-valued bins.
    fn hand_model(shapes: Vec<(&str, Vec<f64>, Vec<f64>)>) -> GamModel {
        GamModel {
            intercept: 0.0,
            link: Link::Logistic,
            features: shapes
                .into_iter()
                .map(|(name, cuts, contributions)| FeatureShape {
                    name: name.into(),
                    cuts,
                    contributions,
                    missing_contribution: 0.0,
                })
                .collect(),
            pairs: Vec::new(),
            meta: ModelMeta {
                seed: 0,
                learning_rate: 0.0,
                rounds_run: 0,
                max_bins: 2,
                config_hash: String::new(),
            },
        }
    }

    fn ds(features: Vec<(&str, Vec<f64>)>) -> Dataset {
        let n = features[0].1.len();
        Dataset::new(
            features.into_iter().map(|(n, v)| (n.to_string(), v)).collect(),
            vec![0; n - 1].into_iter().chain([1]).collect(),
        )
        .unwrap()
    }

    fn group(name: &str, members: &[&str]) -> FeatureGroup {
        FeatureGroup::new(name, members.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn zero_shape_has_zero_importance() {
        let model = hand_model(vec![("x", vec![0.5], vec![0.0, 0.0])]);
        let data = ds(vec![("x", vec![0.0, 1.0, 1.0])]);
        assert_eq!(feature_importance(&model, &data, "x").unwrap(), 0.0);
    }

    #[test]
    fn symmetric_contributions_average_their_magnitude() {
        // bins 0 and 1 contribute +2 and -2; both appear once
        let model = hand_model(vec![("x", vec![0.5], vec![2.0, -2.0])]);
        let data = ds(vec![("x", vec![0.0, 1.0])]);
        assert_eq!(feature_importance(&model, &data, "x").unwrap(), 2.0);
    }

    #[test]
    fn weighted_mean_importance_matches_hand_value() {
        // contributions 1, -3, 2 with weights 1, 1, 2 -> (1 + 3 + 4) / 4 = 2
        let model = hand_model(vec![("x", vec![0.5, 1.5], vec![1.0, -3.0, 2.0])]);
        let data = ds(vec![("x", vec![0.0, 1.0, 2.0])])
            .with_weights(vec![1.0, 1.0, 2.0])
            .unwrap();
        assert_eq!(feature_importance(&model, &data, "x").unwrap(), 2.0);
    }

    #[test]
    fn cancellation_shrinks_group_importance() {
        let model = hand_model(vec![
            ("a", vec![0.5], vec![1.0, -1.0]),
            ("b", vec![0.5], vec![-1.0, 1.0]),
        ]);
        let data = ds(vec![("a", vec![0.0, 1.0]), ("b", vec![0.0, 1.0])]);
        let g = group("g", &["a", "b"]);
        assert_eq!(group_importance(&model, &data, &g, false).unwrap(), 0.0);
        assert_eq!(feature_importance(&model, &data, "a").unwrap(), 1.0);
        assert_eq!(naive_sum_importance(&model, &data, &g).unwrap(), 2.0);
    }

    #[test]
    fn empty_group_scores_zero() {
        let model = hand_model(vec![("x", vec![0.5], vec![2.0, -2.0])]);
        let data = ds(vec![("x", vec![0.0, 1.0])]);
        let g = FeatureGroup::new("empty", vec![]).unwrap();
        assert_eq!(group_importance(&model, &data, &g, false).unwrap(), 0.0);
        assert_eq!(naive_sum_importance(&model, &data, &g).unwrap(), 0.0);
    }

    #[test]
    fn singleton_group_is_bitwise_equal_to_feature_importance() {
        let model = hand_model(vec![("x", vec![0.3, 0.7], vec![0.1, -0.7321, 3.5])]);
        let data = ds(vec![("x", vec![0.1, 0.5, 0.9, 0.9])])
            .with_weights(vec![0.3, 1.7, 0.9, 1.1])
            .unwrap();
        let g = group("solo", &["x"]);
        let a = feature_importance(&model, &data, "x").unwrap();
        let b = group_importance(&model, &data, &g, false).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn member_order_does_not_change_the_bits() {
        let model = hand_model(vec![
            ("a", vec![0.5], vec![0.111, -0.27]),
            ("b", vec![0.5], vec![-1.03, 0.58]),
            ("c", vec![0.5], vec![0.9999, -0.0001]),
        ]);
        let cols = vec![
            ("a", vec![0.0, 1.0, 0.0, 1.0]),
            ("b", vec![1.0, 1.0, 0.0, 0.0]),
            ("c", vec![0.0, 0.0, 1.0, 1.0]),
        ];
        let data = ds(cols).with_weights(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let orders = [["a", "b", "c"], ["c", "a", "b"], ["b", "c", "a"]];
        let values: Vec<u64> = orders
            .iter()
            .map(|o| group_importance(&model, &data, &group("g", o), false).unwrap().to_bits())
            .collect();
        assert_eq!(values[0], values[1]);
        assert_eq!(values[0], values[2]);
    }

    #[test]
    fn unknown_member_is_reported_with_group_name() {
        let model = hand_model(vec![("x", vec![0.5], vec![1.0, -1.0])]);
        let data = ds(vec![("x", vec![0.0, 1.0])]);
        let g = group("bad", &["x", "ghost"]);
        match group_importance(&model, &data, &g, false).unwrap_err() {
            Error::UnknownGroupMember { group, feature } => {
                assert_eq!(group, "bad");
                assert_eq!(feature, "ghost");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parallel_and_sequential_importance_agree_bitwise() {
        let model = hand_model(vec![("x", vec![0.5], vec![0.777, -0.333])]);
        let values: Vec<f64> = (0..20000).map(|i| f64::from(i % 2)).collect();
        let data = ds(vec![("x", values)]);
        let g = group("g", &["x"]);
        let par = group_importance_with_mode(&model, &data, &g, false, ExecMode::Parallel).unwrap();
        let seq = group_importance_with_mode(&model, &data, &g, false, ExecMode::Sequential).unwrap();
        assert_eq!(par.to_bits(), seq.to_bits());
    }

    #[test]
    fn report_ranks_groups_and_normalizes() {
        let model = hand_model(vec![
            ("a", vec![0.5], vec![2.0, -2.0]),
            ("b", vec![0.5], vec![1.0, -1.0]),
        ]);
        let data = ds(vec![("a", vec![0.0, 1.0]), ("b", vec![0.0, 1.0])]);
        let groups = vec![
            group("big", &["a"]),
            group("small", &["b"]),
            FeatureGroup::new("void", vec![]).unwrap(),
        ];
        let report = importance_report(&model, &data, &groups).unwrap();
        assert_eq!(report.ranking, vec!["big", "small", "void"]);
        assert_eq!(report.features.len(), 2);
        // a and b contribute (+-2) + (+-1) with aligned bins -> total 3
        assert_eq!(report.total, 3.0);
        let void = report.groups.iter().find(|g| g.name == "void").unwrap();
        assert_eq!(void.value, 0.0);
        assert_eq!(void.relative, 0.0);
        let csv = report.to_csv();
        assert!(csv.starts_with("name,value,relative,rank\n"));
        assert!(csv.contains("\nvoid,0,0,3\n"));
    }

    #[test]
    fn all_features_group_has_relative_one_exactly() {
        let model = hand_model(vec![
            ("a", vec![0.5], vec![0.371, -0.612]),
            ("b", vec![0.5], vec![-0.113, 0.996]),
        ]);
        let data = ds(vec![("a", vec![0.0, 1.0, 1.0]), ("b", vec![1.0, 0.0, 1.0])]);
        let groups = vec![group("everything", &["a", "b"])];
        let report = importance_report(&model, &data, &groups).unwrap();
        assert_eq!(report.groups[0].relative, 1.0);
    }

    #[test]
    fn pair_terms_join_only_when_both_endpoints_are_members() {
        use crate::model::PairShape;
        let mut model = hand_model(vec![
            ("a", vec![0.5], vec![1.0, -1.0]),
            ("b", vec![0.5], vec![0.5, -0.5]),
        ]);
        model.pairs.push(PairShape {
            i: "a".into(),
            j: "b".into(),
            cuts_i: vec![0.5],
            cuts_j: vec![0.5],
            // 3x3 over (value bins + missing); signed diagonal boost
            matrix: vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, -1.0, 0.0],
                vec![0.0, 0.0, 0.0],
            ],
        });
        let data = ds(vec![("a", vec![0.0, 1.0]), ("b", vec![0.0, 1.0])]);
        let both = group("ab", &["a", "b"]);
        let solo = group("a", &["a"]);
        // rows hit the diagonal: |1.5 + 1| and |-1.5 - 1| -> mean 2.5
        assert_eq!(group_importance(&model, &data, &both, true).unwrap(), 2.5);
        // without pairs: |1.5| and |-1.5| -> 1.5
        assert_eq!(group_importance(&model, &data, &both, false).unwrap(), 1.5);
        // singleton group ignores the pair even when asked for pairs
        assert_eq!(
            group_importance(&model, &data, &solo, true).unwrap(),
            feature_importance(&model, &data, "a").unwrap()
        );
    }
}
