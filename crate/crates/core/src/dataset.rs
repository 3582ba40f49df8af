use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Labelled tabular data: a row-major `n_rows x n_features` matrix plus
/// integer class ids in `0..class_count`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    name: String,
    features: Vec<f64>,
    n_features: usize,
    labels: Vec<usize>,
    column_names: Vec<String>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset and checks its invariants. `class_names[c]` is the raw
    /// label string for class id `c`.
    pub fn new(
        name: impl Into<String>,
        features: Vec<f64>,
        n_features: usize,
        labels: Vec<usize>,
        column_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::data("dataset has no feature columns"));
        }
        if features.len() != labels.len() * n_features {
            return Err(Error::data(format!(
                "feature matrix holds {} values, expected {} rows x {} columns",
                features.len(),
                labels.len(),
                n_features
            )));
        }
        if column_names.len() != n_features {
            return Err(Error::data(format!(
                "{} column names for {} feature columns",
                column_names.len(),
                n_features
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(format!(
                "non-finite feature value at row {}, column {}",
                pos / n_features + 1,
                pos % n_features + 1
            )));
        }
        if let Some((row, &label)) = labels
            .iter()
            .enumerate()
            .find(|(_, &l)| l >= class_names.len())
        {
            return Err(Error::data(format!(
                "label {label} at row {} outside 0..{}",
                row + 1,
                class_names.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            features,
            n_features,
            labels,
            column_names,
            class_names,
        })
    }

    /// Convenience constructor for generated data: columns are named
    /// `f1..fd` and class `c` is named after its id.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<usize>) -> Result<Self> {
        let n_features = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(i) = rows.iter().position(|r| r.len() != n_features) {
            return Err(Error::data(format!(
                "row {} has {} values, expected {n_features}",
                i + 1,
                rows[i].len()
            )));
        }
        if rows.len() != labels.len() {
            return Err(Error::data("row and label counts differ"));
        }
        let class_count = labels.iter().max().map_or(0, |m| m + 1);
        Self::new(
            "synthetic",
            rows.concat(),
            n_features,
            labels,
            (1..=n_features).map(|j| format!("f{j}")).collect(),
            (0..class_count).map(|c| c.to_string()).collect(),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    /// Row-major feature values.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.features.chunks_exact(self.n_features)
    }

    /// Number of rows per class id.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.class_count()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(rows.len() * self.n_features);
        for &r in rows {
            features.extend_from_slice(self.row(r));
        }
        Dataset {
            name: self.name.clone(),
            features,
            n_features: self.n_features,
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            column_names: self.column_names.clone(),
            class_names: self.class_names.clone(),
        }
    }

    /// New dataset restricted to the given 0-based columns.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Dataset> {
        if columns.is_empty() {
            return Err(Error::invalid("column selection is empty"));
        }
        if let Some(&c) = columns.iter().find(|&&c| c >= self.n_features) {
            return Err(Error::invalid(format!(
                "column {c} out of range for {} features",
                self.n_features
            )));
        }
        let mut features = Vec::with_capacity(self.n_rows() * columns.len());
        for row in self.rows() {
            features.extend(columns.iter().map(|&c| row[c]));
        }
        Ok(Dataset {
            name: self.name.clone(),
            features,
            n_features: columns.len(),
            labels: self.labels.clone(),
            column_names: columns.iter().map(|&c| self.column_names[c].clone()).collect(),
            class_names: self.class_names.clone(),
        })
    }

    /// Same rows and labels with every feature value replaced by
    /// `f(column, value)`.
    pub fn map_features(&self, f: impl Fn(usize, f64) -> f64) -> Dataset {
        let d = self.n_features;
        let features = self
            .features
            .iter()
            .enumerate()
            .map(|(i, &v)| f(i % d, v))
            .collect();
        Dataset {
            features,
            ..self.clone()
        }
    }
}
