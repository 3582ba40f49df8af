use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataio::{DatasetSpec, Delimiter, LabelColumn};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fractal::ScaleGrid;
use crate::knn::{ClassifierConfig, SplitSpec};
use crate::lfwa::{BetaMode, LfwaConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Fractal dimension and reduction rate only.
    FdReduction,
    /// FD-constrained fireworks search.
    LfwaFd,
    /// KNN on every feature.
    FullFeaturesM1,
    /// Fireworks search without the cardinality constraint.
    LfwaUnconstrainedM2,
    /// Uniformly random masks at the FD cardinality.
    RandomSubsetBaseline,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::FdReduction,
        Mode::LfwaFd,
        Mode::FullFeaturesM1,
        Mode::LfwaUnconstrainedM2,
        Mode::RandomSubsetBaseline,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::FdReduction => "fd_reduction",
            Mode::LfwaFd => "lfwa_fd",
            Mode::FullFeaturesM1 => "full_features_m1",
            Mode::LfwaUnconstrainedM2 => "lfwa_unconstrained_m2",
            Mode::RandomSubsetBaseline => "random_subset_baseline",
        }
    }

    /// Row label used in the comparison tables.
    pub fn method_label(self) -> &'static str {
        match self {
            Mode::FdReduction => "FD",
            Mode::LfwaFd => "LFWA+FD",
            Mode::FullFeaturesM1 => "M1",
            Mode::LfwaUnconstrainedM2 => "M2",
            Mode::RandomSubsetBaseline => "Random+FD",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match s.as_str() {
            "fd_reduction" | "reduce" => Mode::FdReduction,
            "lfwa_fd" => Mode::LfwaFd,
            "full_features_m1" | "m1" => Mode::FullFeaturesM1,
            "lfwa_unconstrained_m2" | "m2" => Mode::LfwaUnconstrainedM2,
            "random_subset_baseline" | "random" => Mode::RandomSubsetBaseline,
            _ => return Err(Error::config(format!("unknown mode {s:?}"))),
        })
    }
}

/// Everything one harness invocation needs. Defaults reproduce the
/// published protocol: 5 fireworks, 5 Gaussian sparks, 200 evaluations,
/// spark cap 50, 20 repeats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSpec>,
    pub mode: Mode,
    pub repeats: usize,
    pub base_seed: u64,
    pub lfwa: LfwaConfig,
    pub classifier: ClassifierConfig,
    pub split: SplitSpec,
    pub fd_override: Option<usize>,
    pub scale_k_min: u32,
    pub scale_k_max: u32,
    pub min_window: usize,
    /// Trials may run concurrently; records are always ordered by seed.
    pub execution: Execution,
    /// Store per-trial wall time. Off by default so that records output is
    /// byte-identical across runs.
    pub record_timings: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            datasets: Vec::new(),
            mode: Mode::LfwaFd,
            repeats: 20,
            base_seed: 0,
            lfwa: LfwaConfig::default(),
            classifier: ClassifierConfig::default(),
            split: SplitSpec::default(),
            fd_override: None,
            scale_k_min: 1,
            scale_k_max: 10,
            min_window: 4,
            execution: Execution::Parallel,
            record_timings: false,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(format!("invalid value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::config(format!("invalid boolean {value:?} for {key}"))),
    }
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<ScaleGrid> {
        ScaleGrid::dyadic(self.scale_k_min, self.scale_k_max)
    }

    fn last_dataset(&mut self, key: &str) -> Result<&mut DatasetSpec> {
        self.datasets
            .last_mut()
            .ok_or_else(|| Error::config(format!("{key} given before any dataset")))
    }

    /// Applies one `key = value` setting. `dataset` appends a new dataset;
    /// the dataset-shape keys that follow it apply to the latest dataset.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "dataset" => self.datasets.push(known_dataset(v)),
            "dataset_name" => self.last_dataset(&key)?.name = v.to_string(),
            "extra_file" => self.last_dataset(&key)?.paths.push(PathBuf::from(v)),
            "label_column" => self.last_dataset(&key)?.label_column = v.parse::<LabelColumn>()?,
            "delimiter" => {
                self.last_dataset(&key)?.delimiter = match v {
                    "comma" | "," => Delimiter::Comma,
                    "whitespace" | "space" | "tab" => Delimiter::Whitespace,
                    _ => return Err(Error::config(format!("unknown delimiter {v:?}"))),
                }
            }
            "header" => self.last_dataset(&key)?.header = parse_bool(&key, v)?,
            "expected_rows" => self.last_dataset(&key)?.expected_rows = Some(parse(&key, v)?),
            "expected_features" => self.last_dataset(&key)?.expected_features = Some(parse(&key, v)?),
            "expected_classes" => self.last_dataset(&key)?.expected_classes = Some(parse(&key, v)?),
            "mode" => self.mode = v.parse()?,
            "repeats" => self.repeats = parse(&key, v)?,
            "seed" | "base_seed" => self.base_seed = parse(&key, v)?,
            "population_size" => self.lfwa.population_size = parse(&key, v)?,
            "gaussian_sparks" | "gaussian_spark_count" => self.lfwa.gaussian_spark_count = parse(&key, v)?,
            "max_evaluations" => self.lfwa.max_evaluations = parse(&key, v)?,
            "total_spark_cap" | "total_sparks" => self.lfwa.total_spark_cap = parse(&key, v)?,
            "xi" => self.lfwa.xi = parse(&key, v)?,
            "beta_mode" => {
                self.lfwa.beta_mode = match v {
                    "per_dimension" => BetaMode::PerDimension,
                    "per_spark" => BetaMode::PerSpark,
                    _ => return Err(Error::config(format!("unknown beta_mode {v:?}"))),
                }
            }
            "knn_k" => self.classifier.k = parse(&key, v)?,
            "train_fraction" => self.split.train_fraction = parse(&key, v)?,
            "stratified" => self.split.stratified = parse_bool(&key, v)?,
            "fd_override" => {
                self.fd_override = match v {
                    "" | "none" => None,
                    _ => Some(parse(&key, v)?),
                }
            }
            "scale_k_min" => self.scale_k_min = parse(&key, v)?,
            "scale_k_max" => self.scale_k_max = parse(&key, v)?,
            "min_window" => self.min_window = parse(&key, v)?,
            "execution" => {
                self.execution = match v {
                    "parallel" => Execution::Parallel,
                    "sequential" => Execution::Sequential,
                    _ => return Err(Error::config(format!("unknown execution {v:?}"))),
                }
            }
            "record_timings" => self.record_timings = parse_bool(&key, v)?,
            _ => return Err(Error::config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Parses a flat `key = value` file (`#` starts a comment) on top of the
    /// defaults.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("config line {}: expected key = value", n + 1))
            })?;
            self.set(key, value)
                .map_err(|e| Error::config(format!("config line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::config("no dataset given"));
        }
        if self.repeats == 0 {
            return Err(Error::config("repeats must be at least 1"));
        }
        if self.classifier.k == 0 {
            return Err(Error::config("knn_k must be at least 1"));
        }
        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            return Err(Error::config("train_fraction must lie in (0, 1)"));
        }
        self.base_seed
            .checked_add(self.repeats as u64 - 1)
            .ok_or_else(|| Error::config("seed range overflows"))?;
        self.lfwa.validate()?;
        self.grid()?;
        if self.min_window < 4 {
            return Err(Error::config("min_window must be at least 4"));
        }
        Ok(())
    }
}

/// A dataset spec for `path`, picking the bundled layouts by file name
/// (`segment*` and `spectf*`) and falling back to a headerless file with the
/// label last.
pub fn known_dataset(path: &str) -> DatasetSpec {
    let stem = std::path::Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    if stem.starts_with("segment") {
        DatasetSpec::image_segmentation(path)
    } else if stem.starts_with("spectf") {
        DatasetSpec::spectf(path)
    } else {
        DatasetSpec::new(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_published_protocol() {
        let c = ExperimentConfig::default();
        assert_eq!(c.lfwa.population_size, 5);
        assert_eq!(c.lfwa.gaussian_spark_count, 5);
        assert_eq!(c.lfwa.max_evaluations, 200);
        assert_eq!(c.lfwa.total_spark_cap, 50);
        assert_eq!(c.repeats, 20);
        assert_eq!(c.classifier.k, 5);
    }

    #[test]
    fn parses_key_value_files() {
        let cfg = ExperimentConfig::from_kv(
            "# experiment\n\
             dataset = data/spectf.csv\n\
             mode = m1   # ablation\n\
             repeats = 3\n\
             seed = 100\n\
             knn_k = 3\n\
             fd_override = 3\n\
             max_evaluations = 50\n",
        )
        .unwrap();
        assert_eq!(cfg.datasets[0].name, "Spectf");
        assert_eq!(cfg.mode, Mode::FullFeaturesM1);
        assert_eq!((cfg.repeats, cfg.base_seed, cfg.classifier.k), (3, 100, 3));
        assert_eq!(cfg.fd_override, Some(3));
        assert_eq!(cfg.lfwa.max_evaluations, 50);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(ExperimentConfig::from_kv("nonsense = 1").is_err());
        assert!(ExperimentConfig::from_kv("repeats = many").is_err());
        assert!(ExperimentConfig::from_kv("label_column = first").is_err());
        assert!(ExperimentConfig::from_kv("no equals sign").is_err());
        let mut cfg = ExperimentConfig::from_kv("dataset = x.csv").unwrap();
        cfg.repeats = 0;
        assert!(cfg.validate().is_err());
        assert!(ExperimentConfig::default().validate().is_err());
    }

    #[test]
    fn mode_names_round_trip() {
        for m in Mode::ALL {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
        }
    }
}
