//! Acceptance suite: one test per documented behavior guarantee, each ending
//! in a `[acceptance] NN <name>: PASS` line (run with `--nocapture` to see
//! them). Tests serialize on a global gate so the timing checks in `a12`
//! measure an otherwise idle process; within a test, internal parallelism is
//! unchanged.
//!
//! The suite is entirely synthetic- and oracle-based: no bundled datasets,
//! and no claims about results on external data.

use gamimp::bench::{run_bench, scaling_probe, wide_dataset};
use gamimp::binning::bin_index;
use gamimp::evaluation::cv_evaluate;
use gamimp::importance::{
    feature_importance, group_importance, importance_report, naive_sum_importance,
};
use gamimp::model::{FeatureShape, GamModel, Link, ModelMeta, PairShape};
use gamimp::rng::ColumnRng;
use gamimp::synthetic::{correlation_sweep, generate, pearson, SynthConfig, SynthVariant};
use gamimp::train::purify_pairs;
use gamimp::{train, Dataset, FeatureGroup, TrainConfig};
use std::collections::HashMap;
use std::sync::{LazyLock, Mutex};

/// Serializes the tests; recovery from a poisoned lock keeps later criteria
/// running after an earlier one fails.
static GATE: Mutex<()> = Mutex::new(());

fn gate() -> std::sync::MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

const N: usize = 100_000;

struct Trained {
    dataset: Dataset,
    model: GamModel,
    i_x: f64,
    i_z: f64,
    i_group: f64,
}

fn fit(variant: SynthVariant, b: Option<f64>, eps: Option<f64>) -> Trained {
    let config = SynthConfig { variant, n: N, seed: 0, b, eps, negate: false };
    let dataset = generate(&config).unwrap();
    let model = train(&dataset, &TrainConfig { seed: 0, ..TrainConfig::default() }).unwrap();
    let i_x = feature_importance(&model, &dataset, "x").unwrap();
    let i_z = feature_importance(&model, &dataset, "z").unwrap();
    let xz = FeatureGroup::new("xz", vec!["x".into(), "z".into()]).unwrap();
    let i_group = group_importance(&model, &dataset, &xz, false).unwrap();
    Trained { dataset, model, i_x, i_z, i_group }
}

static COPY: LazyLock<Trained> =
    LazyLock::new(|| fit(SynthVariant::AdditiveCopy, None, None));
static NEGATED: LazyLock<Trained> =
    LazyLock::new(|| fit(SynthVariant::AdditiveNegated, None, None));
static CONF_IND: LazyLock<Trained> =
    LazyLock::new(|| fit(SynthVariant::ConflictingIndependent, None, None));
static CONF_CORR: LazyLock<Trained> =
    LazyLock::new(|| fit(SynthVariant::ConflictingCorrelated, Some(2.0), None));

#[test]
fn a01_duplicate_feature_splits_importance_evenly() {
    let _g = gate();
    let t = &*COPY;
    let gap = (t.i_x - t.i_z).abs() / t.i_x;
    assert!(gap < 0.05, "I_x {} vs I_z {} (gap {gap})", t.i_x, t.i_z);
    let total_gap = (t.i_group - 2.0 * t.i_x).abs() / (2.0 * t.i_x);
    assert!(total_gap < 0.05, "I_xz {} vs 2*I_x {} (gap {total_gap})", t.i_group, 2.0 * t.i_x);
    println!("[acceptance] 01 duplicate feature splits importance evenly: PASS");
}

#[test]
fn a02_negated_duplicate_behaves_like_the_plain_copy() {
    let _g = gate();
    let t = &*NEGATED;
    let gap = (t.i_x - t.i_z).abs() / t.i_x;
    assert!(gap < 0.05, "I_x {} vs I_z {} (gap {gap})", t.i_x, t.i_z);
    let total_gap = (t.i_group - 2.0 * t.i_x).abs() / (2.0 * t.i_x);
    assert!(total_gap < 0.05, "I_xz {} vs 2*I_x {} (gap {total_gap})", t.i_group, 2.0 * t.i_x);
    println!("[acceptance] 02 negated duplicate behaves like the plain copy: PASS");
}

#[test]
fn a03_independent_conflict_exceeds_each_part_but_not_their_sum() {
    let _g = gate();
    let t = &*CONF_IND;
    let gap = (t.i_x - t.i_z).abs() / t.i_x;
    assert!(gap < 0.05, "I_x {} vs I_z {} (gap {gap})", t.i_x, t.i_z);
    assert!(
        t.i_group > t.i_x.max(t.i_z),
        "I_xz {} should exceed max(I_x, I_z) = {}",
        t.i_group,
        t.i_x.max(t.i_z)
    );
    assert!(
        t.i_group < 0.75 * (t.i_x + t.i_z),
        "I_xz {} should stay well below I_x + I_z = {}",
        t.i_group,
        t.i_x + t.i_z
    );
    println!("[acceptance] 03 independent conflict exceeds each part but not their sum: PASS");
}

#[test]
fn a04_correlated_conflict_cancels_in_the_group() {
    let _g = gate();
    let t = &*CONF_CORR;
    assert!(
        t.i_group < 0.9 * t.i_x.min(t.i_z),
        "I_xz {} vs min(I_x, I_z) = {}",
        t.i_group,
        t.i_x.min(t.i_z)
    );
    println!("[acceptance] 04 correlated conflict cancels in the group: PASS");
}

#[test]
fn a05_additive_sweep_keeps_the_group_total_constant() {
    let _g = gate();
    let base = SynthConfig::new(SynthVariant::AdditiveCorrelated, N, 0);
    let config = TrainConfig { seed: 0, ..TrainConfig::default() };
    let grid = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 1000.0];
    let sweep = correlation_sweep(&base, &grid, &config).unwrap();

    let totals: Vec<f64> = sweep.points.iter().map(|p| p.i_group).collect();
    let max = totals.iter().cloned().fold(f64::MIN, f64::max);
    let min = totals.iter().cloned().fold(f64::MAX, f64::min);
    assert!(max / min < 1.2, "group importance varies too much: {totals:?}");

    let first = &sweep.points[0]; // b = 0: z is a rescaled copy of x
    assert!(first.rho > 0.999, "rho at b=0 is {}", first.rho);
    let half = first.i_group / 2.0;
    assert!((first.i_x - half).abs() / half < 0.10, "I_x {} vs half {half}", first.i_x);
    assert!((first.i_z - half).abs() / half < 0.10, "I_z {} vs half {half}", first.i_z);

    let last = sweep.points.last().unwrap(); // b = 1000: z is nearly pure noise
    assert!(last.i_z < 0.05 * last.i_group, "I_z {} vs group {}", last.i_z, last.i_group);
    println!("[acceptance] 05 additive sweep keeps the group total constant: PASS");
}

#[test]
fn a06_conflicting_sweep_shrinks_as_correlation_rises() {
    let _g = gate();
    let base = SynthConfig::new(SynthVariant::ConflictingCorrelated, N, 0);
    let config = TrainConfig { seed: 0, ..TrainConfig::default() };
    let grid = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 1000.0];
    let sweep = correlation_sweep(&base, &grid, &config).unwrap();

    let mut points: Vec<(f64, f64)> =
        sweep.points.iter().map(|p| (p.rho, p.i_group)).collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut inversions = 0;
    for w in points.windows(2) {
        if w[1].1 > w[0].1 {
            inversions += 1;
            assert!(
                w[1].1 <= 1.05 * w[0].1,
                "inversion above 5% between rho {} and {}: {} -> {}",
                w[0].0,
                w[1].0,
                w[0].1,
                w[1].1
            );
        }
    }
    assert!(inversions <= 1, "{inversions} inversions in {points:?}");

    // near-perfect correlation via tiny two-point offsets at high resolution:
    // the group sum collapses towards zero
    let cfg = SynthConfig {
        variant: SynthVariant::DiscreteEps,
        n: N,
        seed: 0,
        b: None,
        eps: Some(0.1),
        negate: false,
    };
    let dataset = generate(&cfg).unwrap();
    let rho = pearson(dataset.column(0), dataset.column(1)).unwrap();
    assert!(rho > 0.99, "rho {rho}");
    // the fit here is a pair of huge opposing ramps that build slowly from the
    // clip boundaries inward; per-round validation gain sits below the early
    // stopping threshold long before the ramps form, so stopping is disabled
    // and the budget raised until the ramp term dominates the group residue
    let model = train(
        &dataset,
        &TrainConfig {
            max_bins: 4096,
            learning_rate: 0.25,
            rounds: 12_000,
            validation_fraction: 0.0,
            seed: 0,
            ..TrainConfig::default()
        },
    )
    .unwrap();
    let i_x = feature_importance(&model, &dataset, "x").unwrap();
    let xz = FeatureGroup::new("xz", vec!["x".into(), "z".into()]).unwrap();
    let i_group = group_importance(&model, &dataset, &xz, false).unwrap();
    assert!(i_group < 0.1 * i_x, "I_xz {i_group} vs I_x {i_x}");
    println!("[acceptance] 06 conflicting sweep shrinks as correlation rises: PASS");
}

#[test]
fn a07_clipping_carves_a_step_into_the_shape_function() {
    let _g = gate();
    let cfg = SynthConfig {
        variant: SynthVariant::DiscreteEps,
        n: N,
        seed: 0,
        b: None,
        eps: Some(2.0),
        negate: false,
    };
    let dataset = generate(&cfg).unwrap();
    let model = train(&dataset, &TrainConfig { seed: 0, ..TrainConfig::default() }).unwrap();
    let fx = &model.features[model.feature_index("x").unwrap()];
    let f = |v: f64| fx.contribution(fx.bin(v));

    // below x = 2 the companion clips to 0, so the shape sits on a plateau.
    // the step is smeared over the few bins straddling 2 (cuts are data
    // quantiles, not aligned with the boundary), so measure its height from
    // shoulder means on either side of the transition zone
    let shoulder = |a: f64, b: f64| {
        let mut sum = 0.0;
        let mut count = 0.0;
        let mut v = a;
        while v <= b {
            sum += f(v);
            count += 1.0;
            v += 0.005;
        }
        sum / count
    };
    let jump = (shoulder(2.1, 2.4) - shoulder(1.6, 1.9)).abs();
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    let mut v = 0.2;
    while v <= 1.8 {
        let c = f(v);
        lo = lo.min(c);
        hi = hi.max(c);
        v += 0.005;
    }
    let variation = hi - lo;
    assert!(
        jump > 5.0 * variation,
        "jump {jump} vs plateau variation {variation}"
    );
    println!("[acceptance] 07 clipping carves a step into the shape function: PASS");
}

/// One randomized instance for the property suite: a hand-built model (with
/// one guaranteed all-zero shape), a small dataset with missing values and
/// optional weights, and a random member subset.
fn check_importance_properties(seed: u64) {
    let mut rng = ColumnRng::new(seed, 0);
    let k = 1 + rng.index(6);
    let n = 5 + rng.index(36);

    let mut features = Vec::new();
    for f in 0..k {
        let mut cuts: Vec<f64> = (0..1 + rng.index(11)).map(|_| rng.uniform(0.0, 10.0)).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let contributions = (0..cuts.len() + 1).map(|_| rng.uniform(-2.0, 2.0)).collect();
        features.push(FeatureShape {
            name: format!("f{f}"),
            cuts,
            contributions,
            missing_contribution: rng.uniform(-1.0, 1.0),
        });
    }
    features.push(FeatureShape {
        name: "zero".into(),
        cuts: vec![5.0],
        contributions: vec![0.0, 0.0],
        missing_contribution: 0.0,
    });
    let model = GamModel {
        intercept: rng.uniform(-1.0, 1.0),
        link: Link::Logistic,
        features,
        pairs: Vec::new(),
        meta: ModelMeta {
            seed,
            learning_rate: 0.05,
            rounds_run: 0,
            max_bins: 16,
            config_hash: String::new(),
        },
    };

    let names = model.feature_names();
    let columns: Vec<(String, Vec<f64>)> = names
        .iter()
        .map(|name| {
            let col = (0..n)
                .map(|_| {
                    if rng.unit() < 0.1 {
                        f64::NAN
                    } else {
                        rng.uniform(0.0, 10.0)
                    }
                })
                .collect();
            (name.clone(), col)
        })
        .collect();
    let target: Vec<u8> = (0..n).map(|_| (rng.next_u64() & 1) as u8).collect();
    let mut dataset = Dataset::new(columns, target).unwrap();
    if rng.unit() < 0.5 {
        let weights = (0..n).map(|_| rng.uniform(0.1, 2.0)).collect();
        dataset = dataset.with_weights(weights).unwrap();
    }

    let members: Vec<String> =
        names.iter().filter(|_| rng.unit() < 0.5).cloned().collect();
    let group = FeatureGroup::new("g", members.clone()).unwrap();
    let i_g = group_importance(&model, &dataset, &group, false).unwrap();

    // bounded by the sum of individual importances, never negative
    let sum: f64 = members
        .iter()
        .map(|m| feature_importance(&model, &dataset, m).unwrap())
        .sum();
    assert!(i_g >= 0.0);
    assert!(i_g <= sum + 1e-9, "I_g {i_g} above member sum {sum}");
    let naive = naive_sum_importance(&model, &dataset, &group).unwrap();
    assert!((naive - sum).abs() <= 1e-12, "naive {naive} vs sum {sum}");

    // member order is irrelevant, bitwise
    let perm = rng.shuffled_indices(members.len());
    let shuffled: Vec<String> = perm.iter().map(|&i| members[i].clone()).collect();
    let reordered = FeatureGroup::new("g2", shuffled).unwrap();
    let i_p = group_importance(&model, &dataset, &reordered, false).unwrap();
    assert_eq!(i_g.to_bits(), i_p.to_bits(), "member order changed the value");

    // a singleton group is exactly the individual importance
    if let Some(m) = members.first() {
        let single = FeatureGroup::new("s", vec![m.clone()]).unwrap();
        let i_s = group_importance(&model, &dataset, &single, false).unwrap();
        let i_f = feature_importance(&model, &dataset, m).unwrap();
        assert_eq!(i_s.to_bits(), i_f.to_bits(), "singleton mismatch for {m}");
    }

    // the empty group scores zero
    let empty = FeatureGroup::new("e", Vec::new()).unwrap();
    assert_eq!(group_importance(&model, &dataset, &empty, false).unwrap(), 0.0);

    // an all-zero shape neither helps nor hurts, bitwise
    if !members.iter().any(|m| m == "zero") {
        let mut with_zero = members.clone();
        with_zero.push("zero".into());
        let padded = FeatureGroup::new("z", with_zero).unwrap();
        let i_z = group_importance(&model, &dataset, &padded, false).unwrap();
        assert_eq!(i_g.to_bits(), i_z.to_bits(), "zero shape moved the value");
    }

    // splitting a group can only lose cancellation, never gain total
    let cut = if members.is_empty() { 0 } else { rng.index(members.len() + 1) };
    let g1 = FeatureGroup::new("g1", members[..cut].to_vec()).unwrap();
    let g2 = FeatureGroup::new("g2", members[cut..].to_vec()).unwrap();
    let i_1 = group_importance(&model, &dataset, &g1, false).unwrap();
    let i_2 = group_importance(&model, &dataset, &g2, false).unwrap();
    assert!(i_g <= i_1 + i_2 + 1e-9, "union {i_g} above parts {i_1} + {i_2}");
}

#[test]
fn a08_importance_properties_hold_over_randomized_instances() {
    let _g = gate();
    use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
    let cases = 250;
    let mut runner = TestRunner::new_with_rng(
        Config { cases, failure_persistence: None, ..Config::default() },
        TestRng::from_seed(RngAlgorithm::ChaCha, &[7; 32]),
    );
    let checked = std::cell::Cell::new(0u32);
    runner
        .run(&proptest::prelude::any::<u64>(), |seed| {
            check_importance_properties(seed);
            checked.set(checked.get() + 1);
            Ok(())
        })
        .unwrap();
    assert!(checked.get() >= 200, "only {} instances ran", checked.get());
    println!(
        "[acceptance] 08 importance properties hold over {} randomized instances: PASS",
        checked.get()
    );
}

#[test]
fn a09_monotone_transforms_leave_importance_bitwise_unchanged() {
    let _g = gate();
    let t = &*COPY;
    let transformed = Dataset::new(
        t.dataset
            .feature_names()
            .iter()
            .enumerate()
            .map(|(i, name)| {
                (name.clone(), t.dataset.column(i).iter().map(|v| v * v * v).collect())
            })
            .collect(),
        t.dataset.target().to_vec(),
    )
    .unwrap();
    let model = train(&transformed, &TrainConfig { seed: 0, ..TrainConfig::default() }).unwrap();

    let i_x = feature_importance(&model, &transformed, "x").unwrap();
    let i_z = feature_importance(&model, &transformed, "z").unwrap();
    let xz = FeatureGroup::new("xz", vec!["x".into(), "z".into()]).unwrap();
    let i_group = group_importance(&model, &transformed, &xz, false).unwrap();
    assert_eq!(t.i_x.to_bits(), i_x.to_bits(), "I_x moved under a cubed feature");
    assert_eq!(t.i_z.to_bits(), i_z.to_bits(), "I_z moved under a cubed feature");
    assert_eq!(t.i_group.to_bits(), i_group.to_bits(), "I_xz moved under a cubed feature");

    let groups = [
        FeatureGroup::new("gx", vec!["x".into()]).unwrap(),
        FeatureGroup::new("gz", vec!["z".into()]).unwrap(),
    ];
    let before = importance_report(&t.model, &t.dataset, &groups).unwrap();
    let after = importance_report(&model, &transformed, &groups).unwrap();
    assert_eq!(before.ranking, after.ranking, "ranking changed under the transform");
    println!("[acceptance] 09 monotone transforms leave importance bitwise unchanged: PASS");
}

#[test]
fn a10_purification_empties_pair_margins_without_moving_scores() {
    let _g = gate();
    for instance in 0..10u64 {
        let mut rng = ColumnRng::new(4000 + instance, 0);
        let names = ["a", "b", "c"];
        let mut features = Vec::new();
        for name in names {
            let mut cuts: Vec<f64> =
                (0..2 + rng.index(5)).map(|_| rng.uniform(0.0, 10.0)).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let contributions = (0..cuts.len() + 1).map(|_| rng.uniform(-1.0, 1.0)).collect();
            features.push(FeatureShape {
                name: name.into(),
                cuts,
                contributions,
                missing_contribution: rng.uniform(-0.5, 0.5),
            });
        }
        let mut pairs = Vec::new();
        for (i, j) in [(0usize, 1usize), (1, 2)] {
            let rows = features[i].value_bins() + 1;
            let cols = features[j].value_bins() + 1;
            let matrix = (0..rows)
                .map(|_| (0..cols).map(|_| rng.uniform(-2.0, 2.0)).collect())
                .collect();
            pairs.push(PairShape {
                i: names[i].into(),
                j: names[j].into(),
                cuts_i: features[i].cuts.clone(),
                cuts_j: features[j].cuts.clone(),
                matrix,
            });
        }
        let mut model = GamModel {
            intercept: 0.0,
            link: Link::Logistic,
            features,
            pairs,
            meta: ModelMeta {
                seed: instance,
                learning_rate: 0.05,
                rounds_run: 0,
                max_bins: 8,
                config_hash: String::new(),
            },
        };

        let n = 400;
        let columns: Vec<(String, Vec<f64>)> = names
            .iter()
            .map(|name| {
                let col = (0..n)
                    .map(|_| if rng.unit() < 0.05 { f64::NAN } else { rng.uniform(0.0, 10.0) })
                    .collect();
                (name.to_string(), col)
            })
            .collect();
        let target = (0..n).map(|_| (rng.next_u64() & 1) as u8).collect();
        let dataset = Dataset::new(columns, target).unwrap();

        let probes: Vec<HashMap<String, f64>> = (0..100)
            .map(|_| {
                names
                    .iter()
                    .map(|name| {
                        let v = if rng.unit() < 0.05 {
                            f64::NAN
                        } else {
                            rng.uniform(0.0, 10.0)
                        };
                        (name.to_string(), v)
                    })
                    .collect()
            })
            .collect();
        let before: Vec<f64> =
            probes.iter().map(|p| model.predict_score(p).unwrap()).collect();

        purify_pairs(&mut model, &dataset).unwrap();

        // weighted margins of every pair matrix are drained to zero
        for pair in &model.pairs {
            let ci = dataset.column_by_name(&pair.i).unwrap();
            let cj = dataset.column_by_name(&pair.j).unwrap();
            let rows = pair.matrix.len();
            let cols = pair.matrix[0].len();
            let mut joint = vec![vec![0.0f64; cols]; rows];
            for s in 0..n {
                joint[bin_index(&pair.cuts_i, ci[s])][bin_index(&pair.cuts_j, cj[s])] +=
                    dataset.weight_at(s);
            }
            for r in 0..rows {
                let w: f64 = joint[r].iter().sum();
                if w > 0.0 {
                    let mean: f64 = (0..cols)
                        .map(|c| joint[r][c] * pair.matrix[r][c])
                        .sum::<f64>()
                        / w;
                    assert!(mean.abs() < 1e-9, "row {r} mean {mean} (instance {instance})");
                }
            }
            for c in 0..cols {
                let w: f64 = (0..rows).map(|r| joint[r][c]).sum();
                if w > 0.0 {
                    let mean: f64 = (0..rows)
                        .map(|r| joint[r][c] * pair.matrix[r][c])
                        .sum::<f64>()
                        / w;
                    assert!(mean.abs() < 1e-9, "col {c} mean {mean} (instance {instance})");
                }
            }
        }

        for (probe, old) in probes.iter().zip(&before) {
            let new = model.predict_score(probe).unwrap();
            assert!(
                (new - old).abs() < 1e-7,
                "score drifted {old} -> {new} (instance {instance})"
            );
        }
    }
    println!("[acceptance] 10 purification empties pair margins without moving scores: PASS");
}

#[test]
fn a11_group_importance_matches_a_brute_force_oracle() {
    let _g = gate();
    for instance in 0..5u64 {
        let mut rng = ColumnRng::new(8000 + instance, 0);
        let k = 4;
        let n = 3 + rng.index(6); // 3..=8 samples

        let mut features = Vec::new();
        for f in 0..k {
            let mut cuts: Vec<f64> =
                (0..1 + rng.index(3)).map(|_| rng.uniform(0.0, 10.0)).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let contributions = (0..cuts.len() + 1).map(|_| rng.uniform(-3.0, 3.0)).collect();
            features.push(FeatureShape {
                name: format!("f{f}"),
                cuts,
                contributions,
                missing_contribution: rng.uniform(-1.0, 1.0),
            });
        }
        let model = GamModel {
            intercept: rng.uniform(-1.0, 1.0),
            link: Link::Logistic,
            features,
            pairs: Vec::new(),
            meta: ModelMeta {
                seed: instance,
                learning_rate: 0.05,
                rounds_run: 0,
                max_bins: 4,
                config_hash: String::new(),
            },
        };

        let columns: Vec<(String, Vec<f64>)> = (0..k)
            .map(|f| {
                let col = (0..n)
                    .map(|_| if rng.unit() < 0.15 { f64::NAN } else { rng.uniform(0.0, 10.0) })
                    .collect();
                (format!("f{f}"), col)
            })
            .collect();
        let target = (0..n).map(|_| (rng.next_u64() & 1) as u8).collect();
        let mut dataset = Dataset::new(columns, target).unwrap();
        if instance % 2 == 1 {
            let weights = (0..n).map(|_| rng.uniform(0.25, 3.0)).collect();
            dataset = dataset.with_weights(weights).unwrap();
        }

        // every subset of the four features, against a from-scratch oracle
        for mask in 0u32..16 {
            let members: Vec<String> =
                (0..k).filter(|f| mask & (1 << f) != 0).map(|f| format!("f{f}")).collect();
            let group = FeatureGroup::new("g", members.clone()).unwrap();
            let got = group_importance(&model, &dataset, &group, false).unwrap();

            let mut num = 0.0f64;
            let mut den = 0.0f64;
            for s in 0..n {
                let mut total = 0.0f64;
                for m in &members {
                    let shape = &model.features[model.feature_index(m).unwrap()];
                    let v = dataset.column_by_name(m).unwrap()[s];
                    total += shape.contribution(shape.bin(v));
                }
                let w = dataset.weight_at(s);
                num += w * total.abs();
                den += w;
            }
            let want = if members.is_empty() { 0.0 } else { num / den };
            assert!(
                (got - want).abs() <= 1e-12,
                "mask {mask:04b}: got {got}, oracle {want} (instance {instance})"
            );
        }
    }
    println!("[acceptance] 11 group importance matches a brute-force oracle: PASS");
}

#[test]
fn a12_lookup_scoring_outruns_permutation_and_scales_linearly() {
    let _g = gate();
    let dataset = wide_dataset(N, 20, 0).unwrap();
    let config = TrainConfig { rounds: 30, seed: 0, ..TrainConfig::default() };
    let model = train(&dataset, &config).unwrap();
    let group = FeatureGroup::new("all", model.feature_names()).unwrap();
    let (ours, theirs, speedup) = run_bench(&dataset, &model, &group, 10, 5).unwrap();
    assert!(
        speedup >= 5.0,
        "speedup {speedup} (ours {}s, permutation {}s)",
        ours.seconds,
        theirs.seconds
    );

    let probe = scaling_probe(&[12_500, 25_000, 50_000, 100_000], &[4, 8, 16, 32], 0, 5).unwrap();
    assert!(
        (0.8..=1.2).contains(&probe.n_slope),
        "n slope {} (r2 {})",
        probe.n_slope,
        probe.n_r2
    );
    assert!(
        (0.8..=1.2).contains(&probe.k_slope),
        "k slope {} (r2 {})",
        probe.k_slope,
        probe.k_r2
    );
    assert!(probe.n_r2 > 0.95, "n r2 {}", probe.n_r2);
    assert!(probe.k_r2 > 0.95, "k r2 {}", probe.k_r2);
    println!("[acceptance] 12 lookup scoring outruns permutation and scales linearly: PASS");
}

#[test]
fn a13_cross_validation_separates_signal_from_shuffled_labels() {
    let _g = gate();
    let t = &*COPY;
    let config = TrainConfig { seed: 0, ..TrainConfig::default() };
    let report = cv_evaluate(&t.dataset, &config, 5, 0).unwrap();
    assert!(report.auc.mean > 0.95, "auc {}", report.auc.mean);

    let mut rng = ColumnRng::new(99, 0);
    let perm = rng.shuffled_indices(t.dataset.n());
    let shuffled_target: Vec<u8> = perm.iter().map(|&i| t.dataset.target()[i]).collect();
    let shuffled = t.dataset.clone().replace_target(shuffled_target).unwrap();
    let null_report = cv_evaluate(&shuffled, &config, 5, 0).unwrap();
    assert!(
        (0.45..=0.55).contains(&null_report.auc.mean),
        "shuffled auc {}",
        null_report.auc.mean
    );
    println!("[acceptance] 13 cross validation separates signal from shuffled labels: PASS");
}
