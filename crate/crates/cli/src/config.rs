//! Run configuration: a TOML file, command-line overrides, and validation.
//!
//! Every key is optional in the file; anything missing takes its default.
//!
//! ```toml
//! input = "energydata_complete.csv"
//! timestamp_column = "date"
//! drop_columns = ["rv1", "rv2"]
//! method = "kpca"
//! gamma = 0.1
//! kappa = 5
//! w_e = 3
//! window_length = 657
//! train_fraction = 0.75
//!
//! [grid]
//! kappas = [5, 15, 30, 45, 60]
//! w_es = [3, 4, 5]
//! gammas = [0.1, 10.0, 0.5]
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use ensfts::data_io::CsvOptions;
use ensfts::embedding::{EmbeddingConfig, EmbeddingMethod, KpcaOptions};
use ensfts::evaluation::{EvalSpace, GridSpec, MethodConfig, WindowSpec};
use ensfts::nsfts::{NsftsParams, PerturbationForm, DEFAULT_MARGIN_RATIO};
use ensfts::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pca,
    Kpca,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Normalized,
    Reconstructed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    Adopted,
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exec {
    Parallel,
    Sequential,
}

impl From<Exec> for Execution {
    fn from(e: Exec) -> Self {
        match e {
            Exec::Parallel => Execution::Parallel,
            Exec::Sequential => Execution::Sequential,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridLists {
    pub kappas: Vec<usize>,
    pub w_es: Vec<usize>,
    pub gammas: Vec<f64>,
}

impl Default for GridLists {
    fn default() -> Self {
        let g = GridSpec::published();
        Self {
            kappas: g.kappas,
            w_es: g.w_es,
            gammas: g.gammas,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub timestamp_column: Option<String>,
    pub drop_columns: Vec<String>,
    pub target: Option<String>,
    pub exclude_target: bool,
    pub method: Method,
    pub gamma: f64,
    pub kappa: usize,
    pub w_e: usize,
    pub margin_ratio: f64,
    pub perturbation: Perturbation,
    pub window_length: usize,
    pub train_fraction: f64,
    pub adapt_online: bool,
    pub eval_space: Space,
    pub max_train_points: Option<usize>,
    pub execution: Exec,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub grid: GridLists,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            timestamp_column: None,
            drop_columns: Vec::new(),
            target: None,
            exclude_target: false,
            method: Method::Kpca,
            gamma: 0.1,
            kappa: 5,
            w_e: 3,
            margin_ratio: DEFAULT_MARGIN_RATIO,
            perturbation: Perturbation::Adopted,
            window_length: 657,
            train_fraction: 0.75,
            adapt_online: true,
            eval_space: Space::Normalized,
            max_train_points: None,
            execution: Exec::Parallel,
            out_dir: PathBuf::from("ensfts-out"),
            seed: 0,
            grid: GridLists::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("bad config {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.nsfts_params().validate()?;
        self.window_spec().validate(self.w_e)?;
        if self.method == Method::Kpca && !(self.gamma.is_finite() && self.gamma > 0.0) {
            bail!("gamma must be a positive number, got {}", self.gamma);
        }
        if self.eval_space == Space::Reconstructed {
            if self.method != Method::Pca {
                bail!("reconstructed evaluation space is only defined for pca");
            }
            if self.target.is_none() {
                bail!("reconstructed evaluation space needs a target column");
            }
            if self.exclude_target {
                bail!(
                    "reconstructed evaluation space needs the target among the embedded features"
                );
            }
        }
        if let Some(n) = self.max_train_points {
            if n < 3 {
                bail!("max_train_points must be at least 3, got {n}");
            }
        }
        Ok(())
    }

    /// Checks the grid lists; invalid values inside a list are allowed and
    /// reported as failed combinations by the search itself.
    pub fn validate_grid(&self) -> Result<()> {
        if self.grid.kappas.is_empty() || self.grid.w_es.is_empty() {
            bail!("grid needs at least one kappa and one w_e");
        }
        if self.method == Method::Kpca && self.grid.gammas.is_empty() {
            bail!("kpca grid needs at least one gamma");
        }
        Ok(())
    }

    pub fn input(&self) -> Result<&Path> {
        match &self.input {
            Some(p) => Ok(p),
            None => bail!("no input file given (use --input or set `input` in the config)"),
        }
    }

    pub fn csv_options(&self) -> CsvOptions {
        CsvOptions {
            timestamp_column: self.timestamp_column.clone(),
            drop_columns: self.drop_columns.clone(),
            target_column: self.target.clone(),
        }
    }

    pub fn embedding_method(&self) -> EmbeddingMethod {
        match self.method {
            Method::Pca => EmbeddingMethod::Pca,
            Method::Kpca => EmbeddingMethod::Kpca { gamma: self.gamma },
        }
    }

    pub fn nsfts_params(&self) -> NsftsParams {
        NsftsParams {
            kappa: self.kappa,
            w_e: self.w_e,
            margin_ratio: self.margin_ratio,
            perturbation: match self.perturbation {
                Perturbation::Adopted => PerturbationForm::Adopted,
                Perturbation::Literal => PerturbationForm::Literal,
            },
        }
    }

    pub fn method_config(&self) -> MethodConfig {
        MethodConfig {
            method: self.embedding_method(),
            nsfts: self.nsfts_params(),
            adapt_online: self.adapt_online,
            eval_space: match self.eval_space {
                Space::Normalized => EvalSpace::Normalized,
                Space::Reconstructed => EvalSpace::Reconstructed,
            },
            embedding: EmbeddingConfig {
                exclude_target: self.exclude_target,
                kpca: KpcaOptions {
                    max_train_points: self.max_train_points,
                    execution: self.execution.into(),
                    ..KpcaOptions::default()
                },
            },
        }
    }

    pub fn window_spec(&self) -> WindowSpec {
        WindowSpec {
            window_length: self.window_length,
            train_fraction: self.train_fraction,
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            kappas: self.grid.kappas.clone(),
            w_es: self.grid.w_es.clone(),
            gammas: self.grid.gammas.clone(),
        }
    }

    /// Copies the searched parameters of a winning configuration.
    pub fn with_best(&self, best: &MethodConfig) -> Self {
        let mut out = self.clone();
        out.kappa = best.nsfts.kappa;
        out.w_e = best.nsfts.w_e;
        if let EmbeddingMethod::Kpca { gamma } = best.method {
            out.gamma = gamma;
        }
        out
    }
}

/// Flags shared by every pipeline subcommand. Each one overrides the
/// matching key of `--config`.
#[derive(Debug, Default, Clone, Args)]
pub struct RunArgs {
    /// TOML run configuration
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Input CSV file with a header row
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Column holding timestamps
    #[arg(long)]
    pub timestamp_column: Option<String>,
    /// Columns to ignore, comma separated
    #[arg(long, value_delimiter = ',')]
    pub drop_columns: Option<Vec<String>>,
    /// Target column
    #[arg(long)]
    pub target: Option<String>,
    /// Leave the target column out of the embedding
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub exclude_target: Option<bool>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// RBF kernel coefficient
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Number of fuzzy sets
    #[arg(long)]
    pub kappa: Option<usize>,
    /// Residual window length
    #[arg(long)]
    pub w_e: Option<usize>,
    /// Universe of discourse margin, in (0, 1)
    #[arg(long)]
    pub margin_ratio: Option<f64>,
    #[arg(long, value_enum)]
    pub perturbation: Option<Perturbation>,
    #[arg(long)]
    pub window_length: Option<usize>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Adapt the fuzzy sets while forecasting (`--adapt-online=false` freezes them)
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub adapt_online: Option<bool>,
    #[arg(long, value_enum)]
    pub eval_space: Option<Space>,
    /// Cap on kernel PCA training points (evenly spaced subsample)
    #[arg(long)]
    pub max_train_points: Option<usize>,
    #[arg(long, value_enum)]
    pub execution: Option<Exec>,
    /// Directory for output files
    #[arg(long, short)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl RunArgs {
    /// Loads `--config` if given and applies the remaining flags on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_toml_file(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { cfg.$field = v.clone().into(); })*
            };
        }
        set!(
            timestamp_column,
            target,
            drop_columns,
            exclude_target,
            method,
            gamma,
            kappa,
            w_e,
            margin_ratio,
            perturbation,
            window_length,
            train_fraction,
            adapt_online,
            eval_space,
            max_train_points,
            execution,
            out_dir,
            seed,
            input
        );
        Ok(cfg)
    }
}

/// Grid lists for `gridsearch`; each overrides the `[grid]` table.
#[derive(Debug, Default, Clone, Args)]
pub struct GridArgs {
    #[arg(long, value_delimiter = ',')]
    pub kappas: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub w_es: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub gammas: Option<Vec<f64>>,
}

impl GridArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(k) = &self.kappas {
            cfg.grid.kappas = k.clone();
        }
        if let Some(w) = &self.w_es {
            cfg.grid.w_es = w.clone();
        }
        if let Some(g) = &self.gammas {
            cfg.grid.gammas = g.clone();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = RunConfig {
            input: Some("data.csv".into()),
            max_train_points: Some(500),
            ..RunConfig::default()
        };
        let text = cfg.to_toml().unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_file_uses_defaults() {
        let cfg: RunConfig = toml::from_str("kappa = 15\nmethod = \"pca\"\n").unwrap();
        assert_eq!(cfg.kappa, 15);
        assert_eq!(cfg.method, Method::Pca);
        assert_eq!(cfg.w_e, 3);
        assert!(toml::from_str::<RunConfig>("kapa = 15").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "kappa = 15\nw_e = 4\n").unwrap();
        let args = RunArgs {
            config: Some(path),
            kappa: Some(30),
            ..RunArgs::default()
        };
        let cfg = args.resolve().unwrap();
        assert_eq!((cfg.kappa, cfg.w_e), (30, 4));
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.kappa = 2;
        assert!(cfg.validate().is_err());
        let cfg = RunConfig {
            eval_space: Space::Reconstructed,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = RunConfig {
            gamma: -1.0,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
