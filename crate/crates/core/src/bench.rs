//! Wall-clock harness comparing shape-function group importance against
//! grouped permutation importance, plus a scaling probe for the O(k·n) cost
//! model.
//!
//! Timings are median-of-r with one excluded warm-up run, and both methods
//! are pinned to sequential execution so the comparison measures algorithmic
//! cost, not thread counts. The timing wrapper never touches the computation
//! itself — timed calls return bitwise the same numbers as untimed ones.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{grouped_permutation_importance_with_mode, GpiMetric};
use crate::data::{Dataset, FeatureGroup};
use crate::error::Error;
use crate::exec::ExecMode;
use crate::model::{FeatureShape, GamModel, Link, ModelMeta};
use crate::rng::ColumnRng;
use crate::synthetic::pearson;
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    /// "group_importance" or "gpi".
    pub method: String,
    /// Rows in the dataset.
    pub n: usize,
    /// Features in the timed group.
    pub k: usize,
    /// Permutation repeats; absent for the shape-function method.
    pub repeats: Option<usize>,
    /// Median wall time over the timing runs.
    pub seconds: f64,
    pub timing_runs: usize,
    pub machine: String,
}

pub fn bench_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from("method,n,k,repeats,seconds\n");
    for r in records {
        let repeats = r.repeats.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{},{}\n", r.method, r.n, r.k, repeats, r.seconds));
    }
    out
}

fn machine_descriptor() -> String {
    format!(
        "{}-{}, {} cpus",
        std::env::consts::ARCH,
        std::env::consts::OS,
        std::thread::available_parallelism().map_or(0, |p| p.get())
    )
}

/// Median wall time of `runs` executions, after one warm-up call.
fn median_seconds(runs: usize, mut f: impl FnMut()) -> f64 {
    f();
    let mut times: Vec<f64> = (0..runs)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    if runs % 2 == 1 {
        times[runs / 2]
    } else {
        (times[runs / 2 - 1] + times[runs / 2]) / 2.0
    }
}

/// Time both importance methods on identical inputs and report the median
/// wall times plus the `gpi / ours` speedup ratio.
pub fn run_bench(
    dataset: &Dataset,
    model: &GamModel,
    group: &FeatureGroup,
    gpi_repeats: usize,
    timing_runs: usize,
) -> Result<(BenchRecord, BenchRecord, f64)> {
    if timing_runs < 3 {
        return Err(Error::InvalidConfig(format!(
            "timing_runs must be at least 3, got {timing_runs}"
        )));
    }
    if group.members.is_empty() {
        return Err(Error::EmptyGroup(group.name.clone()));
    }
    // fail fast (and check inputs) before the timed loops
    crate::importance::group_importance_with_mode(
        model,
        dataset,
        group,
        false,
        ExecMode::Sequential,
    )?;
    grouped_permutation_importance_with_mode(
        model,
        dataset,
        group,
        GpiMetric::Auc,
        gpi_repeats,
        0,
        ExecMode::Sequential,
    )?;

    let machine = machine_descriptor();
    let ours = median_seconds(timing_runs, || {
        std::hint::black_box(
            crate::importance::group_importance_with_mode(
                model,
                dataset,
                group,
                false,
                ExecMode::Sequential,
            )
            .expect("checked above"),
        );
    });
    let gpi = median_seconds(timing_runs, || {
        std::hint::black_box(
            grouped_permutation_importance_with_mode(
                model,
                dataset,
                group,
                GpiMetric::Auc,
                gpi_repeats,
                0,
                ExecMode::Sequential,
            )
            .expect("checked above"),
        );
    });
    let k = group.members.len();
    let ours_rec = BenchRecord {
        method: "group_importance".into(),
        n: dataset.n(),
        k,
        repeats: None,
        seconds: ours,
        timing_runs,
        machine: machine.clone(),
    };
    let gpi_rec = BenchRecord {
        method: "gpi".into(),
        n: dataset.n(),
        k,
        repeats: Some(gpi_repeats),
        seconds: gpi,
        timing_runs,
        machine,
    };
    let speedup = gpi / ours;
    Ok((ours_rec, gpi_rec, speedup))
}

/// Synthetic wide dataset: `k` iid U[0, 10] columns `f00..`, the label driven
/// by the first column plus unit normal noise.
pub fn wide_dataset(n: usize, k: usize, seed: u64) -> Result<Dataset> {
    if n < 2 || k == 0 {
        return Err(Error::InvalidConfig(format!("need n >= 2 and k >= 1, got n={n} k={k}")));
    }
    let columns: Vec<(String, Vec<f64>)> = (0..k)
        .map(|c| {
            let mut rng = ColumnRng::new(seed, c as u64);
            (format!("f{c:02}"), (0..n).map(|_| rng.uniform(0.0, 10.0)).collect())
        })
        .collect();
    let mut noise = ColumnRng::new(seed, k as u64);
    let y: Vec<u8> = columns[0].1.iter().map(|v| u8::from(v + noise.normal() > 5.0)).collect();
    Dataset::new(columns, y)
}

/// Hand-built wide model over `[0, 10]` columns: evenly spaced cuts and
/// seeded contribution tables. Lets the probe time pure importance lookups
/// without paying for training at every grid point.
fn wide_model(k: usize, bins: usize, seed: u64) -> GamModel {
    let cuts: Vec<f64> = (1..bins).map(|c| 10.0 * c as f64 / bins as f64).collect();
    let mut rng = ColumnRng::new(seed, k as u64 + 1);
    GamModel {
        intercept: 0.0,
        link: Link::Logistic,
        features: (0..k)
            .map(|c| FeatureShape {
                name: format!("f{c:02}"),
                cuts: cuts.clone(),
                contributions: (0..bins).map(|_| rng.uniform(-1.0, 1.0)).collect(),
                missing_contribution: 0.0,
            })
            .collect(),
        pairs: Vec::new(),
        meta: ModelMeta {
            seed,
            learning_rate: 0.0,
            rounds_run: 0,
            max_bins: bins,
            config_hash: String::new(),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingProbe {
    /// Sweep over n at the largest k.
    pub n_axis: Vec<BenchRecord>,
    /// Sweep over k at the largest n.
    pub k_axis: Vec<BenchRecord>,
    pub n_slope: f64,
    pub n_r2: f64,
    pub k_slope: f64,
    pub k_r2: f64,
}

impl ScalingProbe {
    pub fn to_csv(&self) -> String {
        bench_csv(&self.n_axis.iter().chain(&self.k_axis).cloned().collect::<Vec<_>>())
    }
}

/// Time group importance across an (n, k) grid — n varies at the largest k,
/// k varies at the largest n — and fit log-log slopes per axis. A cost of
/// c·k·n shows up as slope 1 on both axes.
pub fn scaling_probe(
    n_values: &[usize],
    k_values: &[usize],
    seed: u64,
    timing_runs: usize,
) -> Result<ScalingProbe> {
    if n_values.len() < 4 || k_values.len() < 4 {
        return Err(Error::InvalidConfig(format!(
            "need at least 4 points per axis, got {} n values and {} k values",
            n_values.len(),
            k_values.len()
        )));
    }
    if timing_runs < 3 {
        return Err(Error::InvalidConfig(format!(
            "timing_runs must be at least 3, got {timing_runs}"
        )));
    }
    let mut n_values = n_values.to_vec();
    let mut k_values = k_values.to_vec();
    n_values.sort_unstable();
    k_values.sort_unstable();
    if n_values[0] < 2 || k_values[0] == 0 {
        return Err(Error::InvalidConfig("need n >= 2 and k >= 1 on the probe grid".into()));
    }
    let max_n = *n_values.last().expect("nonempty");
    let max_k = *k_values.last().expect("nonempty");
    let machine = machine_descriptor();

    let time_point = |n: usize, k: usize| -> Result<BenchRecord> {
        let dataset = wide_dataset(n, k, seed)?;
        let model = wide_model(k, 64, seed);
        let group = FeatureGroup::new("probe", model.feature_names())?;
        crate::importance::group_importance_with_mode(
            &model,
            &dataset,
            &group,
            false,
            ExecMode::Sequential,
        )?;
        let seconds = median_seconds(timing_runs, || {
            std::hint::black_box(
                crate::importance::group_importance_with_mode(
                    &model,
                    &dataset,
                    &group,
                    false,
                    ExecMode::Sequential,
                )
                .expect("checked above"),
            );
        });
        Ok(BenchRecord {
            method: "group_importance".into(),
            n,
            k,
            repeats: None,
            seconds,
            timing_runs,
            machine: machine.clone(),
        })
    };

    let n_axis: Vec<BenchRecord> =
        n_values.iter().map(|&n| time_point(n, max_k)).collect::<Result<_>>()?;
    let k_axis: Vec<BenchRecord> =
        k_values.iter().map(|&k| time_point(max_n, k)).collect::<Result<_>>()?;

    let (n_slope, n_r2) = log_log_fit(
        &n_axis.iter().map(|r| r.n as f64).collect::<Vec<_>>(),
        &n_axis.iter().map(|r| r.seconds).collect::<Vec<_>>(),
    )?;
    let (k_slope, k_r2) = log_log_fit(
        &k_axis.iter().map(|r| r.k as f64).collect::<Vec<_>>(),
        &k_axis.iter().map(|r| r.seconds).collect::<Vec<_>>(),
    )?;
    Ok(ScalingProbe { n_axis, k_axis, n_slope, n_r2, k_slope, k_r2 })
}

/// Least-squares slope and R² of ln(y) against ln(x).
fn log_log_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidConfig("log-log fit needs at least two distinct x".into()));
    }
    let r = pearson(&lx, &ly)?;
    Ok((sxy / sxx, r * r))
}
