//! Seeded two-feature benchmark generators and the correlation sweep.
//!
//! Every variant draws `x ~ U[0, 10]` iid and builds a companion feature `z`
//! plus a binary label `y`:
//!
//! * `additive_copy` — `z = x` (`z = -x` with `negate`), `y = 1[x + e > 5]`
//!   with `e ~ N(0, 1)`: two perfectly redundant carriers of one signal.
//! * `additive_negated` — shorthand for the negated copy.
//! * `conflicting_independent` — `z ~ U[0, 10]` iid, `y = 1[x > z]`: two
//!   features whose effects cancel when grouped.
//! * `conflicting_correlated` — `z_raw = x + d`, `d ~ U[-b, b]`, feature `z`
//!   is `z_raw` min-max scaled to `[0, 10]`, label `y = 1[x > z_raw]` against
//!   the *unscaled* value so the classes stay balanced; `b` tunes how
//!   correlated the conflict is.
//! * `additive_correlated` — same `z` as above but `y = 1[x + e > 5]`
//!   depends on `x` alone.
//! * `discrete_eps` — `z = clip(x + e, 0, 10)` with `e` a fair draw from
//!   `{-eps, +eps}`, `y = 1[x > z]`: a two-valued offset that concentrates
//!   structure at the clip boundaries.
//!
//! Columns use fixed generator streams (`x` 0, companion draws 1, label noise
//! 2), so the same seed reproduces columns bitwise regardless of variant.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureGroup};
use crate::error::Error;
use crate::exec::{run_indexed, ExecMode};
use crate::importance::{feature_importance, group_importance};
use crate::rng::{derive_seed, ColumnRng};
use crate::train::{train, TrainConfig};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthVariant {
    AdditiveCopy,
    AdditiveNegated,
    ConflictingIndependent,
    ConflictingCorrelated,
    AdditiveCorrelated,
    DiscreteEps,
}

impl SynthVariant {
    pub const ALL: [SynthVariant; 6] = [
        SynthVariant::AdditiveCopy,
        SynthVariant::AdditiveNegated,
        SynthVariant::ConflictingIndependent,
        SynthVariant::ConflictingCorrelated,
        SynthVariant::AdditiveCorrelated,
        SynthVariant::DiscreteEps,
    ];

    /// Whether this variant requires the offset half-width `b`.
    pub fn needs_b(self) -> bool {
        matches!(self, SynthVariant::ConflictingCorrelated | SynthVariant::AdditiveCorrelated)
    }

    /// Whether this variant requires the two-point offset magnitude `eps`.
    pub fn needs_eps(self) -> bool {
        self == SynthVariant::DiscreteEps
    }
}

impl std::fmt::Display for SynthVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SynthVariant::AdditiveCopy => "additive_copy",
            SynthVariant::AdditiveNegated => "additive_negated",
            SynthVariant::ConflictingIndependent => "conflicting_independent",
            SynthVariant::ConflictingCorrelated => "conflicting_correlated",
            SynthVariant::AdditiveCorrelated => "additive_correlated",
            SynthVariant::DiscreteEps => "discrete_eps",
        })
    }
}

impl std::str::FromStr for SynthVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SynthVariant::ALL
            .into_iter()
            .find(|v| v.to_string() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown variant '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub variant: SynthVariant,
    pub n: usize,
    pub seed: u64,
    /// Half-width of the correlation-offset draw; required for the
    /// `*_correlated` variants, rejected elsewhere.
    pub b: Option<f64>,
    /// Two-point offset magnitude; required for `discrete_eps`, rejected
    /// elsewhere.
    pub eps: Option<f64>,
    /// Flip `z` to `-x`; only meaningful for the additive-copy family.
    pub negate: bool,
}

impl SynthConfig {
    pub fn new(variant: SynthVariant, n: usize, seed: u64) -> Self {
        SynthConfig { variant, n, seed, b: None, eps: None, negate: false }
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| {
            Err(Error::InvalidConfig(format!("variant {} {what}", self.variant)))
        };
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("n must be at least 2, got {}", self.n)));
        }
        match (self.variant.needs_b(), self.b) {
            (true, None) => return bad("requires b"),
            (true, Some(b)) if !(b.is_finite() && b >= 0.0) => {
                return bad("requires finite b >= 0")
            }
            (false, Some(_)) => return bad("does not take b"),
            _ => {}
        }
        match (self.variant.needs_eps(), self.eps) {
            (true, None) => return bad("requires eps"),
            (true, Some(e)) if !(e.is_finite() && e > 0.0) => {
                return bad("requires finite eps > 0")
            }
            (false, Some(_)) => return bad("does not take eps"),
            _ => {}
        }
        if self.negate
            && !matches!(self.variant, SynthVariant::AdditiveCopy | SynthVariant::AdditiveNegated)
        {
            return bad("does not take negate");
        }
        Ok(())
    }
}

/// Generate the dataset for a config: features `x` and `z`, target `y`.
/// Bitwise deterministic in the config.
pub fn generate(config: &SynthConfig) -> Result<Dataset> {
    config.validate()?;
    let n = config.n;
    let mut rx = ColumnRng::new(config.seed, 0);
    let mut rz = ColumnRng::new(config.seed, 1);
    let mut re = ColumnRng::new(config.seed, 2);
    let x: Vec<f64> = (0..n).map(|_| rx.uniform(0.0, 10.0)).collect();

    let (z, y): (Vec<f64>, Vec<u8>) = match config.variant {
        SynthVariant::AdditiveCopy | SynthVariant::AdditiveNegated => {
            let flip = config.negate || config.variant == SynthVariant::AdditiveNegated;
            let z = x.iter().map(|v| if flip { -v } else { *v }).collect();
            let y = x.iter().map(|v| u8::from(v + re.normal() > 5.0)).collect();
            (z, y)
        }
        SynthVariant::ConflictingIndependent => {
            let z: Vec<f64> = (0..n).map(|_| rz.uniform(0.0, 10.0)).collect();
            let y = x.iter().zip(&z).map(|(a, b)| u8::from(a > b)).collect();
            (z, y)
        }
        SynthVariant::ConflictingCorrelated | SynthVariant::AdditiveCorrelated => {
            let b = config.b.expect("validated");
            let raw: Vec<f64> = x.iter().map(|v| v + rz.uniform(-b, b)).collect();
            let z = minmax_scale(&raw, 10.0);
            let y = if config.variant == SynthVariant::ConflictingCorrelated {
                // compare against the unscaled value: scaling is monotone but
                // shifts the x-vs-z balance, this keeps P(y=1) at one half
                x.iter().zip(&raw).map(|(a, r)| u8::from(a > r)).collect()
            } else {
                x.iter().map(|v| u8::from(v + re.normal() > 5.0)).collect()
            };
            (z, y)
        }
        SynthVariant::DiscreteEps => {
            let eps = config.eps.expect("validated");
            let z: Vec<f64> =
                x.iter().map(|v| (v + eps * rz.sign()).clamp(0.0, 10.0)).collect();
            let y = x.iter().zip(&z).map(|(a, b)| u8::from(a > b)).collect();
            (z, y)
        }
    };

    Dataset::new(vec![("x".into(), x), ("z".into(), z)], y)
}

fn minmax_scale(values: &[f64], hi: f64) -> Vec<f64> {
    let lo_v = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi_v = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = hi_v - lo_v;
    if spread <= 0.0 {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - lo_v) / spread * hi).collect()
}

/// Sample Pearson correlation.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            what: "second column".into(),
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0f64, 0.0f64, 0.0f64);
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va == 0.0 || vb == 0.0 {
        return Ok(0.0);
    }
    Ok(cov / (va * vb).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub b: f64,
    /// Measured Pearson correlation between x and z.
    pub rho: f64,
    pub i_x: f64,
    pub i_z: f64,
    pub i_group: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("b,rho,I_x,I_z,I_group\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{},{},{}\n", p.b, p.rho, p.i_x, p.i_z, p.i_group));
        }
        out
    }
}

/// For each offset bound `b` (sorted ascending): generate a dataset, train a
/// model, and record the measured correlation together with the individual
/// and `{x, z}` group importances. Point `i` runs on `derive_seed(seed, i)`
/// for both generation and training, so points are independent and the whole
/// sweep is reproducible; points may run concurrently.
pub fn correlation_sweep(
    base: &SynthConfig,
    b_values: &[f64],
    train_config: &TrainConfig,
) -> Result<SweepResult> {
    if !base.variant.needs_b() {
        return Err(Error::InvalidConfig(format!(
            "correlation sweep needs a *_correlated variant, got {}",
            base.variant
        )));
    }
    if b_values.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one b value".into()));
    }
    if let Some(bad) = b_values.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
        return Err(Error::InvalidConfig(format!("sweep b values must be >= 0, got {bad}")));
    }
    let mut sorted = b_values.to_vec();
    sorted.sort_by(f64::total_cmp);

    let group = FeatureGroup::new("xz", vec!["x".into(), "z".into()])?;
    let points: Vec<Result<SweepPoint>> = run_indexed(sorted.len(), ExecMode::default(), |i| {
        let seed = derive_seed(base.seed, i as u64);
        let mut cfg = base.clone();
        cfg.b = Some(sorted[i]);
        cfg.seed = seed;
        let ds = generate(&cfg)?;
        let mut tc = train_config.clone();
        tc.seed = seed;
        let model = train(&ds, &tc)?;
        Ok(SweepPoint {
            b: sorted[i],
            rho: pearson(ds.column(0), ds.column(1))?,
            i_x: feature_importance(&model, &ds, "x")?,
            i_z: feature_importance(&model, &ds, "z")?,
            i_group: group_importance(&model, &ds, &group, false)?,
        })
    });
    Ok(SweepResult { points: points.into_iter().collect::<Result<_>>()? })
}
