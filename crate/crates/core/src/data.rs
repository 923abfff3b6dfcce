//! Tabular training data and named feature groups.
//!
//! A [`Dataset`] is a column store: named numeric feature columns, a binary
//! target, and optional per-sample weights and subject identifiers. Missing
//! feature values are represented as NaN and flow into the dedicated missing
//! bin during binning. Datasets are immutable after construction; the row and
//! feature selectors return fresh copies.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

#[derive(Clone, Debug)]
pub struct Dataset {
    feature_names: Vec<String>,
    columns: Vec<Vec<f64>>,
    target: Vec<u8>,
    weights: Option<Vec<f64>>,
    subject_ids: Option<Vec<String>>,
    target_name: String,
    weight_name: Option<String>,
    subject_name: Option<String>,
    index: HashMap<String, usize>,
}

impl Dataset {
    /// Build a dataset from named columns and a binary target.
    pub fn new(features: Vec<(String, Vec<f64>)>, target: Vec<u8>) -> Result<Self> {
        if target.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if features.is_empty() {
            return Err(Error::InvalidConfig("dataset needs at least one feature".into()));
        }
        let n = target.len();
        let mut index = HashMap::new();
        let mut feature_names = Vec::with_capacity(features.len());
        let mut columns = Vec::with_capacity(features.len());
        for (name, col) in features {
            if name.is_empty() {
                return Err(Error::InvalidFeatureName(name));
            }
            if index.insert(name.clone(), feature_names.len()).is_some() {
                return Err(Error::DuplicateColumn(name));
            }
            if col.len() != n {
                return Err(Error::LengthMismatch {
                    what: format!("column '{name}'"),
                    expected: n,
                    got: col.len(),
                });
            }
            feature_names.push(name);
            columns.push(col);
        }
        for (row, y) in target.iter().enumerate() {
            if *y > 1 {
                return Err(Error::TargetNotBinary {
                    value: y.to_string(),
                    row,
                });
            }
        }
        Ok(Dataset {
            feature_names,
            columns,
            target,
            weights: None,
            subject_ids: None,
            target_name: "y".into(),
            weight_name: None,
            subject_name: None,
            index,
        })
    }

    /// Attach nonnegative per-sample weights.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.n() {
            return Err(Error::LengthMismatch {
                what: "weights".into(),
                expected: self.n(),
                got: weights.len(),
            });
        }
        for (row, w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::InvalidWeight { row });
            }
            if *w < 0.0 {
                return Err(Error::NegativeWeight { value: *w, row });
            }
        }
        self.weights = Some(weights);
        self.weight_name.get_or_insert_with(|| "weight".into());
        Ok(self)
    }

    /// Attach opaque subject identifiers (used for subject-aware fold splits).
    pub fn with_subject_ids(mut self, subject_ids: Vec<String>) -> Result<Self> {
        if subject_ids.len() != self.n() {
            return Err(Error::LengthMismatch {
                what: "subject_ids".into(),
                expected: self.n(),
                got: subject_ids.len(),
            });
        }
        self.subject_ids = Some(subject_ids);
        self.subject_name.get_or_insert_with(|| "subject".into());
        Ok(self)
    }

    /// Rename the target column (affects CSV output only).
    pub fn with_target_name(mut self, name: &str) -> Self {
        self.target_name = name.to_string();
        self
    }

    /// Replace the target column, keeping everything else.
    pub fn replace_target(mut self, target: Vec<u8>) -> Result<Self> {
        if target.len() != self.n() {
            return Err(Error::LengthMismatch {
                what: "target".into(),
                expected: self.n(),
                got: target.len(),
            });
        }
        if let Some((row, y)) = target.iter().enumerate().find(|(_, y)| **y > 1) {
            return Err(Error::TargetNotBinary {
                value: y.to_string(),
                row,
            });
        }
        self.target = target;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.target.len()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn column_by_name(&self, name: &str) -> Result<&[f64]> {
        self.feature_index(name)
            .map(|i| self.column(i))
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))
    }

    pub fn target(&self) -> &[u8] {
        &self.target
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Weight of one sample (1.0 when no weight column is present).
    pub fn weight_at(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    pub fn subject_ids(&self) -> Option<&[String]> {
        self.subject_ids.as_deref()
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    /// Copy of this dataset restricted to the named features, in the given
    /// order. Weights, subjects and target are carried over.
    pub fn select_features(&self, names: &[String]) -> Result<Dataset> {
        if names.is_empty() {
            return Err(Error::InvalidConfig("empty feature selection".into()));
        }
        let mut features = Vec::with_capacity(names.len());
        for name in names {
            let i = self
                .feature_index(name)
                .ok_or_else(|| Error::UnknownFeature(name.clone()))?;
            features.push((name.clone(), self.columns[i].clone()));
        }
        let mut out = Dataset::new(features, self.target.clone())?;
        out.target_name = self.target_name.clone();
        out.weight_name = self.weight_name.clone();
        out.subject_name = self.subject_name.clone();
        out.weights = self.weights.clone();
        out.subject_ids = self.subject_ids.clone();
        Ok(out)
    }

    /// Copy of this dataset restricted to the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(bad) = rows.iter().find(|r| **r >= self.n()) {
            return Err(Error::InvalidConfig(format!(
                "row index {bad} out of range for {} rows",
                self.n()
            )));
        }
        let take = |col: &Vec<f64>| rows.iter().map(|r| col[*r]).collect::<Vec<f64>>();
        let features = self
            .feature_names
            .iter()
            .zip(self.columns.iter())
            .map(|(n, c)| (n.clone(), take(c)))
            .collect();
        let mut out = Dataset::new(features, rows.iter().map(|r| self.target[*r]).collect())?;
        out.target_name = self.target_name.clone();
        out.weight_name = self.weight_name.clone();
        out.subject_name = self.subject_name.clone();
        out.weights = self
            .weights
            .as_ref()
            .map(|w| rows.iter().map(|r| w[*r]).collect());
        out.subject_ids = self
            .subject_ids
            .as_ref()
            .map(|s| rows.iter().map(|r| s[*r].clone()).collect());
        Ok(out)
    }

    /// Write the dataset as CSV; see [`Dataset::to_csv_string`].
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::write(path, e))
    }

    /// The dataset as CSV text: feature columns, then weight and subject
    /// columns when present, then the target. Floats use the shortest
    /// representation that parses back to the identical bits; missing values
    /// become empty cells.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let mut header: Vec<&str> = self.feature_names.iter().map(|s| s.as_str()).collect();
        if self.weights.is_some() {
            header.push(self.weight_name.as_deref().unwrap_or("weight"));
        }
        if self.subject_ids.is_some() {
            header.push(self.subject_name.as_deref().unwrap_or("subject"));
        }
        header.push(&self.target_name);
        out.push_str(&header.join(","));
        out.push('\n');

        for row in 0..self.n() {
            for (ci, col) in self.columns.iter().enumerate() {
                if ci > 0 {
                    out.push(',');
                }
                let v = col[row];
                if v.is_finite() {
                    let _ = write!(out, "{v}");
                }
            }
            if let Some(w) = &self.weights {
                let _ = write!(out, ",{}", w[row]);
            }
            if let Some(s) = &self.subject_ids {
                let _ = write!(out, ",{}", s[row]);
            }
            let _ = write!(out, ",{}", self.target[row]);
            out.push('\n');
        }
        out
    }
}

/// Load a dataset from CSV.
///
/// All columns other than the target and the optional subject/weight columns
/// become features, in header order. Empty and non-numeric feature cells map
/// to the missing marker; a column with no numeric content at all is rejected
/// as categorical.
pub fn load_csv(
    path: &Path,
    target_column: &str,
    subject_column: Option<&str>,
    weight_column: Option<&str>,
) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                if let csv::ErrorKind::Io(io) = e.into_kind() {
                    Error::io(path, io)
                } else {
                    unreachable!()
                }
            }
            _ => Error::Csv {
                path: path.display().to_string(),
                source: e,
            },
        })?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv {
            path: path.display().to_string(),
            source: e,
        })?
        .iter()
        .map(|h| h.to_string())
        .collect();

    let mut seen = HashSet::new();
    for h in &headers {
        if !seen.insert(h.clone()) {
            return Err(Error::DuplicateColumn(h.clone()));
        }
    }
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let target_idx = find(target_column)?;
    let subject_idx = subject_column.map(find).transpose()?;
    let weight_idx = weight_column.map(find).transpose()?;

    let special: HashSet<usize> = [Some(target_idx), subject_idx, weight_idx]
        .into_iter()
        .flatten()
        .collect();
    let feature_cols: Vec<usize> = (0..headers.len()).filter(|i| !special.contains(i)).collect();
    for &fc in &feature_cols {
        if headers[fc].is_empty() {
            return Err(Error::InvalidFeatureName(String::new()));
        }
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); feature_cols.len()];
    let mut has_text = vec![false; feature_cols.len()];
    let mut has_finite = vec![false; feature_cols.len()];
    let mut target = Vec::new();
    let mut weights = Vec::new();
    let mut subjects = Vec::new();

    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            path: path.display().to_string(),
            source: e,
        })?;

        let ty = record.get(target_idx).unwrap_or("");
        match ty.parse::<f64>() {
            Ok(v) if v == 0.0 => target.push(0u8),
            Ok(v) if v == 1.0 => target.push(1u8),
            _ => {
                return Err(Error::TargetNotBinary {
                    value: ty.to_string(),
                    row,
                })
            }
        }
        if let Some(wi) = weight_idx {
            let cell = record.get(wi).unwrap_or("");
            let w: f64 = cell.parse().map_err(|_| Error::InvalidWeight { row })?;
            if !w.is_finite() {
                return Err(Error::InvalidWeight { row });
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight { value: w, row });
            }
            weights.push(w);
        }
        if let Some(si) = subject_idx {
            subjects.push(record.get(si).unwrap_or("").to_string());
        }
        for (k, &fc) in feature_cols.iter().enumerate() {
            let cell = record.get(fc).unwrap_or("");
            let v = if cell.is_empty() {
                f64::NAN
            } else {
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => {
                        has_finite[k] = true;
                        v
                    }
                    Ok(_) => f64::NAN,
                    Err(_) => {
                        has_text[k] = true;
                        f64::NAN
                    }
                }
            };
            columns[k].push(v);
        }
    }

    if target.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for (k, &fc) in feature_cols.iter().enumerate() {
        if has_text[k] && !has_finite[k] {
            return Err(Error::CategoricalColumn(headers[fc].clone()));
        }
    }

    let features: Vec<(String, Vec<f64>)> = feature_cols
        .iter()
        .map(|fc| headers[*fc].clone())
        .zip(columns)
        .collect();
    let mut ds = Dataset::new(features, target)?;
    ds.target_name = target_column.to_string();
    if let Some(wi) = weight_idx {
        ds.weight_name = Some(headers[wi].clone());
        ds = ds.with_weights(weights)?;
    }
    if let Some(si) = subject_idx {
        ds.subject_name = Some(headers[si].clone());
        ds = ds.with_subject_ids(subjects)?;
    }
    Ok(ds)
}

/// A named set of features. Members form a set: order carries no meaning and
/// duplicates are rejected. Groups may overlap and the empty group is legal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureGroup {
    pub name: String,
    pub members: Vec<String>,
}

impl FeatureGroup {
    pub fn new(name: impl Into<String>, members: Vec<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::InvalidConfig("group name must not be empty".into()));
        }
        let mut seen = HashSet::new();
        for m in &members {
            if !seen.insert(m.clone()) {
                return Err(Error::DuplicateGroupMember {
                    group: name,
                    feature: m.clone(),
                });
            }
        }
        Ok(FeatureGroup { name, members })
    }

    /// Check that every member exists in `names`.
    pub fn validate_members(&self, names: &[String]) -> Result<()> {
        for m in &self.members {
            if !names.contains(m) {
                return Err(Error::UnknownGroupMember {
                    group: self.name.clone(),
                    feature: m.clone(),
                });
            }
        }
        Ok(())
    }

    /// Union of several groups as a new group; shared members appear once.
    pub fn union(name: impl Into<String>, groups: &[&FeatureGroup]) -> Result<FeatureGroup> {
        let mut members = Vec::new();
        let mut seen = HashSet::new();
        for g in groups {
            for m in &g.members {
                if seen.insert(m.clone()) {
                    members.push(m.clone());
                }
            }
        }
        Ok(FeatureGroup {
            name: name.into(),
            members,
        })
    }
}

/// Load feature groups from a JSON object `{"group name": ["feature", ...]}`.
/// Entry order in the file is preserved; duplicate group names, duplicate
/// members and members absent from `dataset` are rejected.
pub fn load_groups(path: &Path, dataset: &Dataset) -> Result<Vec<FeatureGroup>> {
    load_groups_for_names(path, dataset.feature_names())
}

/// [`load_groups`] against an explicit feature-name list (used when groups
/// accompany a model rather than a dataset).
pub fn load_groups_for_names(path: &Path, names: &[String]) -> Result<Vec<FeatureGroup>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: RawGroups = serde_json::from_str(&text).map_err(|e| Error::GroupFormat {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;

    let mut seen = HashSet::new();
    let mut groups = Vec::with_capacity(raw.0.len());
    for (name, members) in raw.0 {
        if !seen.insert(name.clone()) {
            return Err(Error::DuplicateGroupName(name));
        }
        let g = FeatureGroup::new(name, members)?;
        g.validate_members(names)?;
        groups.push(g);
    }
    Ok(groups)
}

/// JSON object deserialized as an ordered entry list so that duplicate keys
/// are visible instead of silently collapsing.
struct RawGroups(Vec<(String, Vec<String>)>);

impl<'de> Deserialize<'de> for RawGroups {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        struct V;
        impl<'de> serde::de::Visitor<'de> for V {
            type Value = RawGroups;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("an object mapping group names to feature-name arrays")
            }
            fn visit_map<A>(self, mut map: A) -> std::result::Result<Self::Value, A::Error>
            where
                A: serde::de::MapAccess<'de>,
            {
                let mut entries = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, Vec<String>>()? {
                    entries.push((k, v));
                }
                Ok(RawGroups(entries))
            }
        }
        deserializer.deserialize_map(V)
    }
}
