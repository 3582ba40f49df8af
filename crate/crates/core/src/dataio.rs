//! Loading delimited UCI-style tables into [`Dataset`] values, min-max
//! normalization, and writing datasets back out.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelColumn {
    First,
    Last,
    Named(String),
}

impl std::str::FromStr for LabelColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "first" => LabelColumn::First,
            "last" => LabelColumn::Last,
            "" => return Err(Error::config("label column must not be empty")),
            other => LabelColumn::Named(other.strip_prefix("name:").unwrap_or(other).to_string()),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delimiter {
    Comma,
    /// Any run of spaces or tabs.
    Whitespace,
}

/// Where and how to read a dataset. `paths` may list several files (for
/// example separate train and test portions); they are concatenated in order
/// and must share a layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    pub paths: Vec<PathBuf>,
    pub label_column: LabelColumn,
    pub delimiter: Delimiter,
    pub header: bool,
    pub expected_rows: Option<usize>,
    pub expected_features: Option<usize>,
    pub expected_classes: Option<usize>,
}

impl DatasetSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into());
        Self {
            name,
            paths: vec![path],
            label_column: LabelColumn::Last,
            delimiter: Delimiter::Comma,
            header: false,
            expected_rows: None,
            expected_features: None,
            expected_classes: None,
        }
    }
}

impl DatasetSpec {
    /// UCI Image Segmentation as shipped in `data/segment.csv`: header row,
    /// class label last, 2310 x 19 with 7 classes.
    pub fn image_segmentation(path: impl Into<PathBuf>) -> Self {
        Self {
            name: "Image Segmentation".into(),
            header: true,
            label_column: LabelColumn::Last,
            expected_rows: Some(2310),
            expected_features: Some(19),
            expected_classes: Some(7),
            ..Self::new(path)
        }
    }

    /// UCI SPECTF heart (train and test merged) as shipped in
    /// `data/spectf.csv`: header row, diagnosis first, 267 x 44 with 2
    /// classes.
    pub fn spectf(path: impl Into<PathBuf>) -> Self {
        Self {
            name: "Spectf".into(),
            header: true,
            label_column: LabelColumn::First,
            expected_rows: Some(267),
            expected_features: Some(44),
            expected_classes: Some(2),
            ..Self::new(path)
        }
    }
}

fn split_line<'a>(line: &'a str, delimiter: Delimiter) -> Vec<&'a str> {
    match delimiter {
        Delimiter::Comma => line.split(',').map(str::trim).collect(),
        Delimiter::Whitespace => line.split_whitespace().collect(),
    }
}

struct RawTable {
    header: Option<Vec<String>>,
    // (file, line number, cells)
    rows: Vec<(usize, usize, Vec<String>)>,
}

fn read_tables(spec: &DatasetSpec) -> Result<RawTable> {
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (f, path) in spec.paths.iter().enumerate() {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::data(format!("cannot read {}: {e}", path.display()))
        })?;
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        if spec.header {
            if let Some((_, line)) = lines.next() {
                let names: Vec<String> =
                    split_line(line, spec.delimiter).into_iter().map(String::from).collect();
                match &header {
                    Some(h) if h != &names => {
                        return Err(Error::data(format!(
                            "{}: header differs from the first file",
                            path.display()
                        )))
                    }
                    _ => header = Some(names),
                }
            }
        }
        for (n, line) in lines {
            let cells = split_line(line, spec.delimiter).into_iter().map(String::from).collect();
            rows.push((f, n + 1, cells));
        }
    }
    Ok(RawTable { header, rows })
}

/// Reads, validates and assembles a dataset. Raw label strings are mapped
/// to class ids in lexicographic order, so ids are stable for a given file.
pub fn load_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    if spec.paths.is_empty() {
        return Err(Error::config("dataset spec lists no files"));
    }
    let table = read_tables(spec)?;
    let where_ = |f: usize, line: usize| format!("{} line {line}", spec.paths[f].display());
    if table.rows.is_empty() {
        return Err(Error::data(format!("{}: empty dataset", spec.name)));
    }
    let width = table.header.as_ref().map_or(table.rows[0].2.len(), Vec::len);
    if width < 2 {
        return Err(Error::data("need a label column and at least one feature column"));
    }
    for (f, line, cells) in &table.rows {
        if cells.len() != width {
            return Err(Error::data(format!(
                "{}: ragged row with {} cells, expected {width}",
                where_(*f, *line),
                cells.len()
            )));
        }
    }
    let label_idx = match &spec.label_column {
        LabelColumn::First => 0,
        LabelColumn::Last => width - 1,
        LabelColumn::Named(name) => {
            let header = table.header.as_ref().ok_or_else(|| {
                Error::config(format!("label column {name:?} named but the file has no header"))
            })?;
            header.iter().position(|h| h == name).ok_or_else(|| {
                Error::config(format!("unknown label column {name:?}"))
            })?
        }
    };
    let column_names: Vec<String> = match &table.header {
        Some(h) => h
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != label_idx)
            .map(|(_, n)| n.clone())
            .collect(),
        None => (1..width).map(|j| format!("f{j}")).collect(),
    };

    let class_names: Vec<String> = table
        .rows
        .iter()
        .map(|(_, _, cells)| cells[label_idx].clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut features = Vec::with_capacity(table.rows.len() * (width - 1));
    let mut labels = Vec::with_capacity(table.rows.len());
    for (f, line, cells) in &table.rows {
        for (j, cell) in cells.iter().enumerate() {
            if j == label_idx {
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| {
                Error::data(format!(
                    "{}, column {}: non-numeric feature value {cell:?}",
                    where_(*f, *line),
                    j + 1
                ))
            })?;
            if !value.is_finite() {
                return Err(Error::data(format!(
                    "{}, column {}: non-finite feature value {cell:?}",
                    where_(*f, *line),
                    j + 1
                )));
            }
            features.push(value);
        }
        let label = &cells[label_idx];
        labels.push(class_names.binary_search(label).expect("label collected above"));
    }

    let data = Dataset::new(&spec.name, features, width - 1, labels, column_names, class_names)?;
    check_shape(&data, spec)?;
    Ok(data)
}

fn check_shape(data: &Dataset, spec: &DatasetSpec) -> Result<()> {
    let checks = [
        ("rows", spec.expected_rows, data.n_rows()),
        ("feature columns", spec.expected_features, data.n_features()),
        ("classes", spec.expected_classes, data.class_count()),
    ];
    for (what, expected, actual) in checks {
        if let Some(expected) = expected {
            if expected != actual {
                return Err(Error::data(format!(
                    "{}: expected {expected} {what}, found {actual}",
                    spec.name
                )));
            }
        }
    }
    Ok(())
}

/// Writes `data` as comma-separated text with a header row and the label
/// (raw class name) in the last column.
pub fn write_dataset(data: &Dataset) -> String {
    let mut out = data.column_names().join(",");
    out.push_str(",class\n");
    for (row, &label) in data.rows().zip(data.labels()) {
        for v in row {
            out.push_str(&v.to_string());
            out.push(',');
        }
        out.push_str(&data.class_names()[label]);
        out.push('\n');
    }
    out
}

pub fn save_dataset(data: &Dataset, path: &Path) -> Result<()> {
    std::fs::write(path, write_dataset(data))?;
    Ok(())
}

/// Per-column affine map fitted by [`min_max_normalize`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    /// Columns with `max == min`; they map to 0.
    pub constant: Vec<bool>,
}

impl MinMax {
    pub fn fit(data: &Dataset) -> Self {
        let d = data.n_features();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for row in data.rows() {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        let constant = min.iter().zip(&max).map(|(lo, hi)| !(hi > lo)).collect();
        Self { min, max, constant }
    }

    pub fn transform_value(&self, column: usize, value: f64) -> f64 {
        if self.constant[column] {
            0.0
        } else {
            (value - self.min[column]) / (self.max[column] - self.min[column])
        }
    }

    /// Applies the fitted map without clamping, so unseen rows may fall
    /// outside `[0, 1]`.
    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        if data.n_features() != self.min.len() {
            return Err(Error::invalid(format!(
                "normalizer fitted on {} columns, data has {}",
                self.min.len(),
                data.n_features()
            )));
        }
        Ok(data.map_features(|j, v| self.transform_value(j, v)))
    }
}

/// Fits per-column min-max scaling on `data` and applies it.
pub fn min_max_normalize(data: &Dataset) -> (Dataset, MinMax) {
    let params = MinMax::fit(data);
    let scaled = data.map_features(|j, v| params.transform_value(j, v));
    (scaled, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_label_last_without_header() {
        let f = write_tmp("1.0,2.0,b\n3.0,4.0,a\n5,6,b\n");
        let data = load_dataset(&DatasetSpec::new(f.path())).unwrap();
        assert_eq!(data.n_rows(), 3);
        assert_eq!(data.n_features(), 2);
        assert_eq!(data.labels(), &[1, 0, 1]);
        assert_eq!(data.class_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(data.column_names(), &["f1".to_string(), "f2".to_string()]);
    }

    #[test]
    fn loads_label_first_and_named_with_header() {
        let f = write_tmp("y,x1,x2\n1,0.5,0.25\n0,1,2\n");
        let mut spec = DatasetSpec::new(f.path());
        spec.header = true;
        spec.label_column = LabelColumn::First;
        let a = load_dataset(&spec).unwrap();
        spec.label_column = LabelColumn::Named("y".into());
        let b = load_dataset(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.column_names(), &["x1".to_string(), "x2".to_string()]);
        assert_eq!(a.row(0), &[0.5, 0.25]);
    }

    #[test]
    fn whitespace_delimited_and_multi_file() {
        let a = write_tmp("1 2 x\n3\t4 y\n");
        let b = write_tmp("5 6 x\n");
        let mut spec = DatasetSpec::new(a.path());
        spec.paths.push(b.path().to_path_buf());
        spec.delimiter = Delimiter::Whitespace;
        spec.expected_rows = Some(3);
        let data = load_dataset(&spec).unwrap();
        assert_eq!(data.row(2), &[5.0, 6.0]);
        spec.expected_rows = Some(4);
        assert!(load_dataset(&spec).unwrap_err().to_string().contains("expected 4 rows"));
    }

    #[test]
    fn diagnostics_name_row_and_column() {
        let f = write_tmp("1,2,a\n1,oops,b\n");
        let err = load_dataset(&DatasetSpec::new(f.path())).unwrap_err().to_string();
        assert!(err.contains("line 2, column 2"), "{err}");
        let f = write_tmp("1,2,a\n1,b\n");
        let err = load_dataset(&DatasetSpec::new(f.path())).unwrap_err().to_string();
        assert!(err.contains("line 2: ragged"), "{err}");
        let f = write_tmp("\n\n");
        let err = load_dataset(&DatasetSpec::new(f.path())).unwrap_err().to_string();
        assert!(err.contains("empty dataset"), "{err}");
        let f = write_tmp("a,b\n1,2\n");
        let mut spec = DatasetSpec::new(f.path());
        spec.header = true;
        spec.label_column = LabelColumn::Named("c".into());
        assert!(matches!(load_dataset(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn write_then_load_preserves_content() {
        let f = write_tmp("h1,h2,class\n0.1,-2.5,cat\n3,4e-7,dog\n");
        let mut spec = DatasetSpec::new(f.path());
        spec.header = true;
        let data = load_dataset(&spec).unwrap();
        let g = write_tmp(&write_dataset(&data));
        let mut spec2 = DatasetSpec::new(g.path());
        spec2.header = true;
        spec2.name = data.name().to_string();
        assert_eq!(load_dataset(&spec2).unwrap(), data);
    }

    #[test]
    fn min_max_examples() {
        let data = Dataset::from_rows(&[vec![2.0, 7.0], vec![4.0, 7.0], vec![6.0, 7.0]], vec![0, 1, 0]).unwrap();
        let (scaled, params) = min_max_normalize(&data);
        assert_eq!(scaled.features(), &[0.0, 0.0, 0.5, 0.0, 1.0, 0.0]);
        assert_eq!(params.constant, vec![false, true]);
        let unseen = Dataset::from_rows(&[vec![8.0, 9.0]], vec![0]).unwrap();
        assert_eq!(params.apply(&unseen).unwrap().row(0), &[1.5, 0.0]);
    }
}
