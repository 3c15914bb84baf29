//! Accuracy metrics, skill scores, the persistence baseline, sliding-window
//! backtesting and grid search.
//!
//! Each window is embedded (fit on its training prefix), a fresh NSFTS model
//! is trained on the embedded prefix and the remainder is forecast one step
//! ahead with online adaptation. Windows are independent and run through
//! [`map_ordered`], so reports are identical in sequential and parallel mode.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data_io::{create, train_size, TimeSeriesFrame};
use crate::embedding::{
    embed_series, EmbeddedSeries, Embedder, EmbeddingConfig, EmbeddingMethod, EmbeddingSource,
};
use crate::error::{invalid, Error, Result};
use crate::nsfts::{train, NsftsModel, NsftsParams};
use crate::parallel::{map_ordered, Execution};

/// Actual values at or below this magnitude are left out of MAPE.
pub const MAPE_ZERO_GUARD: f64 = 1e-12;

/// Published RMSE values (%) on the appliances benchmark, used only as fixed
/// references for skill scores.
pub const PUBLISHED_REFERENCE_RMSE: &[(&str, f64)] = &[
    ("persistence_published", 64.74),
    ("gbm_fs", 66.21),
    ("mlp_fs", 59.84),
    ("lstm_fs", 21.36),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub rmse: f64,
    pub mae: f64,
    /// Percent, over entries with a non-zero actual.
    pub mape: f64,
    /// Entries left out of MAPE because the actual was zero.
    pub mape_excluded: usize,
    /// `None` when every actual is identical.
    pub r2: Option<f64>,
}

pub fn compute_metrics(actual: &[f64], predicted: &[f64]) -> Result<MetricSet> {
    if actual.len() != predicted.len() {
        return invalid(format!(
            "{} actual values vs {} predictions",
            actual.len(),
            predicted.len()
        ));
    }
    if actual.is_empty() {
        return invalid("cannot score an empty series");
    }
    let n = actual.len() as f64;
    let mut sse = 0.0;
    let mut sae = 0.0;
    let mut ape = 0.0;
    let mut ape_n = 0usize;
    for (a, p) in actual.iter().zip(predicted) {
        let e = a - p;
        sse += e * e;
        sae += e.abs();
        if a.abs() > MAPE_ZERO_GUARD {
            ape += (e / a).abs();
            ape_n += 1;
        }
    }
    let mean = actual.iter().sum::<f64>() / n;
    let sst: f64 = actual.iter().map(|a| (a - mean) * (a - mean)).sum();
    let r2 = if sst > 0.0 {
        Some(1.0 - sse / sst)
    } else {
        None
    };
    Ok(MetricSet {
        rmse: (sse / n).sqrt(),
        mae: sae / n,
        mape: if ape_n > 0 {
            100.0 * ape / ape_n as f64
        } else {
            0.0
        },
        mape_excluded: actual.len() - ape_n,
        r2,
    })
}

/// `1 − forecast / reference`.
pub fn skill_score(metric_forecast: f64, metric_reference: f64) -> Result<f64> {
    if metric_reference.is_nan() || metric_reference <= 0.0 {
        return invalid(format!(
            "reference metric must be positive, got {metric_reference}"
        ));
    }
    Ok(1.0 - metric_forecast / metric_reference)
}

/// `ŷ(t) = y(t−1)` for `t ≥ 1`; the first point has no forecast.
pub fn persistence_forecast(series: &[f64]) -> Result<Vec<f64>> {
    if series.len() < 2 {
        return invalid("persistence needs at least 2 points");
    }
    Ok(series[..series.len() - 1].to_vec())
}

/// Unweighted mean across windows. R² averages the windows where it is
/// defined.
pub fn mean_metrics(sets: &[MetricSet]) -> Option<MetricSet> {
    if sets.is_empty() {
        return None;
    }
    let n = sets.len() as f64;
    let r2s: Vec<f64> = sets.iter().filter_map(|m| m.r2).collect();
    Some(MetricSet {
        rmse: sets.iter().map(|m| m.rmse).sum::<f64>() / n,
        mae: sets.iter().map(|m| m.mae).sum::<f64>() / n,
        mape: sets.iter().map(|m| m.mape).sum::<f64>() / n,
        mape_excluded: sets.iter().map(|m| m.mape_excluded).sum(),
        r2: if r2s.is_empty() {
            None
        } else {
            Some(r2s.iter().sum::<f64>() / r2s.len() as f64)
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub window_length: usize,
    pub train_fraction: f64,
}

impl WindowSpec {
    pub fn train_len(&self) -> Result<usize> {
        train_size(self.window_length, self.train_fraction)
    }

    pub fn validate(&self, w_e: usize) -> Result<()> {
        let t = self.train_len()?;
        if t < w_e + 2 {
            return invalid(format!(
                "window of {} with train fraction {} gives {t} training points; residual window {w_e} needs {}",
                self.window_length,
                self.train_fraction,
                w_e + 2
            ));
        }
        Ok(())
    }
}

/// Consecutive non-overlapping `[start, end)` windows, plus the number of
/// trailing rows that do not fill a window.
pub fn window_bounds(n: usize, window_length: usize) -> Result<(Vec<(usize, usize)>, usize)> {
    if window_length == 0 {
        return invalid("window length must be positive");
    }
    if n < window_length {
        return invalid(format!("{n} rows cannot fill a window of {window_length}"));
    }
    let count = n / window_length;
    let bounds = (0..count)
        .map(|i| (i * window_length, (i + 1) * window_length))
        .collect();
    Ok((bounds, n - count * window_length))
}

/// Scale on which forecasts are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalSpace {
    /// Embedded series rescaled to `[0, 100]` by the training min/max.
    #[default]
    Normalized,
    /// PCA only: scores mapped back to sensor space and the target column
    /// compared in its own units.
    Reconstructed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub method: EmbeddingMethod,
    pub nsfts: NsftsParams,
    pub adapt_online: bool,
    pub eval_space: EvalSpace,
    pub embedding: EmbeddingConfig,
}

impl MethodConfig {
    pub fn new(method: EmbeddingMethod, nsfts: NsftsParams) -> Self {
        Self {
            method,
            nsfts,
            adapt_online: true,
            eval_space: EvalSpace::Normalized,
            embedding: EmbeddingConfig::default(),
        }
    }
}

/// One window after embedding, before any fuzzy model is fit.
#[derive(Debug, Clone)]
pub struct WindowEmbedding {
    pub index: usize,
    pub start: usize,
    pub train_len: usize,
    pub series: EmbeddedSeries,
    pub embedder: Embedder,
    /// Raw target column over the window (reconstructed scoring only).
    pub target: Option<Vec<f64>>,
    /// Position of the target among the embedded features.
    pub target_feature: Option<usize>,
}

pub fn embed_window(
    frame: &TimeSeriesFrame,
    index: usize,
    start: usize,
    end: usize,
    train_len: usize,
    method: EmbeddingMethod,
    cfg: &EmbeddingConfig,
) -> Result<WindowEmbedding> {
    let slice = frame.slice(start, end)?;
    let (series, embedder) = embed_series(&slice, method, train_len, cfg)?;
    let target_idx = slice.target_index();
    let target = target_idx.map(|t| slice.values().column(t));
    let target_feature = target_idx.and_then(|t| {
        crate::embedding::feature_columns(&slice, cfg)
            .iter()
            .position(|c| *c == t)
    });
    Ok(WindowEmbedding {
        index,
        start,
        train_len,
        series,
        embedder,
        target,
        target_feature,
    })
}

/// Forecasts and scores of one train/test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub index: usize,
    pub start: usize,
    pub train_len: usize,
    pub test_len: usize,
    pub model: MetricSet,
    pub persistence: MetricSet,
    pub reorder_events: u64,
}

/// Everything produced by fitting and forecasting one window.
#[derive(Debug, Clone)]
pub struct WindowRun {
    pub result: WindowResult,
    pub model: NsftsModel,
    /// Forecasts on the embedded scale, aligned to the test rows.
    pub forecasts: Vec<f64>,
    /// Scored actuals / forecasts / persistence forecasts in the evaluation
    /// space.
    pub scored_actual: Vec<f64>,
    pub scored_forecast: Vec<f64>,
    pub scored_persistence: Vec<f64>,
}

pub fn run_window(
    we: &WindowEmbedding,
    params: NsftsParams,
    adapt_online: bool,
    space: EvalSpace,
) -> Result<WindowRun> {
    let values = &we.series.values;
    let t = we.train_len;
    if t >= values.len() {
        return invalid("window has no test portion");
    }
    let mut model = train(&values[..t], params)?;
    let test = &values[t..];
    let forecasts = model.predict_series(values[t - 1], test, adapt_online);
    let persistence: Vec<f64> = values[t - 1..values.len() - 1].to_vec();

    let (actual, fc, pers) = match space {
        EvalSpace::Normalized => {
            let mm = we.series.normalization.ok_or_else(|| {
                Error::InvalidInput("embedded series has no normalization".into())
            })?;
            let n = |xs: &[f64]| xs.iter().map(|v| mm.to_percent(*v)).collect::<Vec<_>>();
            (n(test), n(&forecasts), n(&persistence))
        }
        EvalSpace::Reconstructed => {
            let Embedder::Pca(pca) = &we.embedder else {
                return invalid("reconstructed evaluation is only defined for PCA embeddings");
            };
            let (Some(target), Some(pos)) = (&we.target, we.target_feature) else {
                return invalid(
                    "reconstructed evaluation needs a target column among the embedded features",
                );
            };
            let actual = target[t..].to_vec();
            let fc = forecasts.iter().map(|s| pca.reconstruct(*s)[pos]).collect();
            let pers = target[t - 1..target.len() - 1].to_vec();
            (actual, fc, pers)
        }
    };
    let result = WindowResult {
        index: we.index,
        start: we.start,
        train_len: t,
        test_len: test.len(),
        model: compute_metrics(&actual, &fc)?,
        persistence: compute_metrics(&actual, &pers)?,
        reorder_events: model.reorder_events,
    };
    Ok(WindowRun {
        result,
        model,
        forecasts,
        scored_actual: actual,
        scored_forecast: fc,
        scored_persistence: pers,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillScore {
    pub reference: String,
    pub metric: String,
    /// From the aggregate metrics: `1 − mean(model) / mean(reference)`.
    pub from_aggregate: f64,
    /// Mean of per-window skill scores; only for references scored per window.
    pub mean_of_windows: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub config: MethodConfig,
    pub window_spec: WindowSpec,
    pub rows_total: usize,
    pub rows_dropped: usize,
    pub per_window: Vec<WindowResult>,
    pub aggregate: MetricSet,
    pub persistence_aggregate: MetricSet,
    pub skill: Vec<SkillScore>,
}

impl EvaluationReport {
    pub fn skill_vs(&self, reference: &str) -> Option<&SkillScore> {
        self.skill.iter().find(|s| s.reference == reference)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidInput(format!("cannot serialize report: {e}")))
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path.as_ref(), &self.to_json()?)
    }

    /// One row per window: model and persistence metrics side by side.
    pub fn windows_csv(&self) -> String {
        let mut out = String::from(
            "window,start,train_len,test_len,rmse,mae,mape,r2,persistence_rmse,persistence_mae,persistence_mape,persistence_r2,reorder_events\n",
        );
        let r2 = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        for w in &self.per_window {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                w.index,
                w.start,
                w.train_len,
                w.test_len,
                w.model.rmse,
                w.model.mae,
                w.model.mape,
                r2(w.model.r2),
                w.persistence.rmse,
                w.persistence.mae,
                w.persistence.mape,
                r2(w.persistence.r2),
                w.reorder_events
            ));
        }
        out
    }

    pub fn write_windows_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path.as_ref(), &self.windows_csv())
    }
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes()).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Embeds every window of the frame.
pub fn embed_windows(
    frame: &TimeSeriesFrame,
    spec: &WindowSpec,
    method: EmbeddingMethod,
    cfg: &EmbeddingConfig,
    exec: Execution,
) -> Result<(Vec<WindowEmbedding>, usize)> {
    let train_len = spec.train_len()?;
    let (bounds, dropped) = window_bounds(frame.len(), spec.window_length)?;
    if dropped > 0 {
        log::info!("{dropped} trailing rows do not fill a window and are dropped");
    }
    let idx: Vec<(usize, (usize, usize))> = bounds.into_iter().enumerate().collect();
    let embedded = map_ordered(exec, &idx, |(i, (s, e))| {
        embed_window(frame, *i, *s, *e, train_len, method, cfg)
    });
    Ok((embedded.into_iter().collect::<Result<Vec<_>>>()?, dropped))
}

fn assemble(
    config: MethodConfig,
    spec: WindowSpec,
    rows_total: usize,
    rows_dropped: usize,
    per_window: Vec<WindowResult>,
) -> Result<EvaluationReport> {
    let model_sets: Vec<MetricSet> = per_window.iter().map(|w| w.model).collect();
    let pers_sets: Vec<MetricSet> = per_window.iter().map(|w| w.persistence).collect();
    let aggregate =
        mean_metrics(&model_sets).ok_or_else(|| Error::InvalidInput("no windows".into()))?;
    let persistence_aggregate = mean_metrics(&pers_sets).expect("same length as model metrics");

    let mut skill = Vec::new();
    let per_window_skill: Vec<f64> = per_window
        .iter()
        .filter_map(|w| skill_score(w.model.rmse, w.persistence.rmse).ok())
        .collect();
    if persistence_aggregate.rmse > 0.0 {
        skill.push(SkillScore {
            reference: "persistence".into(),
            metric: "rmse".into(),
            from_aggregate: skill_score(aggregate.rmse, persistence_aggregate.rmse)?,
            mean_of_windows: (!per_window_skill.is_empty())
                .then(|| per_window_skill.iter().sum::<f64>() / per_window_skill.len() as f64),
        });
    }
    for (name, rmse) in PUBLISHED_REFERENCE_RMSE {
        skill.push(SkillScore {
            reference: (*name).to_string(),
            metric: "rmse".into(),
            from_aggregate: skill_score(aggregate.rmse, *rmse)?,
            mean_of_windows: None,
        });
    }
    Ok(EvaluationReport {
        config,
        window_spec: spec,
        rows_total,
        rows_dropped,
        per_window,
        aggregate,
        persistence_aggregate,
        skill,
    })
}

pub fn sliding_window_eval(
    frame: &TimeSeriesFrame,
    spec: &WindowSpec,
    config: &MethodConfig,
) -> Result<EvaluationReport> {
    sliding_window_eval_with(frame, spec, config, Execution::default())
}

pub fn sliding_window_eval_with(
    frame: &TimeSeriesFrame,
    spec: &WindowSpec,
    config: &MethodConfig,
    exec: Execution,
) -> Result<EvaluationReport> {
    config.nsfts.validate()?;
    spec.validate(config.nsfts.w_e)?;
    let (windows, dropped) = embed_windows(frame, spec, config.method, &config.embedding, exec)?;
    let results = map_ordered(exec, &windows, |we| {
        run_window(we, config.nsfts, config.adapt_online, config.eval_space).map(|r| r.result)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    assemble(config.clone(), *spec, frame.len(), dropped, results)
}

/// Parameter lists to search. `gammas` is ignored for PCA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub kappas: Vec<usize>,
    pub w_es: Vec<usize>,
    pub gammas: Vec<f64>,
}

impl GridSpec {
    /// Fuzzy set counts, residual windows and kernel coefficients of the
    /// published search.
    pub fn published() -> Self {
        Self {
            kappas: vec![5, 15, 30, 45, 60],
            w_es: vec![3, 4, 5],
            gammas: vec![0.1, 10.0, 0.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GridOutcome {
    Ok {
        aggregate: MetricSet,
        persistence_aggregate: MetricSet,
        skill_vs_persistence: Option<f64>,
    },
    Failed {
        error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    /// 1-based rank; failed rows rank after every successful one.
    pub rank: usize,
    pub kappa: usize,
    pub w_e: usize,
    pub gamma: Option<f64>,
    pub outcome: GridOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub method: EmbeddingSource,
    pub window_spec: WindowSpec,
    /// Sorted by rank.
    pub rows: Vec<GridRow>,
    pub best: Option<MethodConfig>,
}

impl GridResult {
    pub fn table_csv(&self) -> String {
        let mut out = String::from(
            "rank,kappa,w_e,gamma,status,rmse,mae,mape,r2,skill_vs_persistence,error\n",
        );
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        for r in &self.rows {
            let prefix = format!("{},{},{},{}", r.rank, r.kappa, r.w_e, opt(r.gamma));
            match &r.outcome {
                GridOutcome::Ok {
                    aggregate: a,
                    skill_vs_persistence,
                    ..
                } => out.push_str(&format!(
                    "{prefix},ok,{},{},{},{},{},\n",
                    a.rmse,
                    a.mae,
                    a.mape,
                    opt(a.r2),
                    opt(*skill_vs_persistence)
                )),
                GridOutcome::Failed { error } => out.push_str(&format!(
                    "{prefix},failed,,,,,,\"{}\"\n",
                    error.replace('"', "'")
                )),
            }
        }
        out
    }

    pub fn write_table_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path.as_ref(), &self.table_csv())
    }
}

/// Evaluates every grid combination with sliding windows and ranks them by
/// aggregate RMSE, then MAE, then fewer fuzzy sets. A combination that fails
/// is recorded as failed and the search continues.
///
/// Embeddings depend only on the window and the kernel coefficient, so each
/// is computed once and shared by every `(κ, w_e)` pair.
pub fn grid_search(
    frame: &TimeSeriesFrame,
    grid: &GridSpec,
    spec: &WindowSpec,
    base: &MethodConfig,
    source: EmbeddingSource,
    exec: Execution,
) -> Result<GridResult> {
    if grid.kappas.is_empty() || grid.w_es.is_empty() {
        return invalid("grid needs at least one kappa and one residual window length");
    }
    let methods: Vec<(Option<f64>, EmbeddingMethod)> = match source {
        EmbeddingSource::Pca => vec![(None, EmbeddingMethod::Pca)],
        EmbeddingSource::Kpca => {
            if grid.gammas.is_empty() {
                return invalid("kernel PCA grid needs at least one kernel coefficient");
            }
            grid.gammas
                .iter()
                .map(|g| (Some(*g), EmbeddingMethod::Kpca { gamma: *g }))
                .collect()
        }
    };

    let mut rows = Vec::new();
    let mut configs = Vec::new();
    for (gamma, method) in &methods {
        let embedded = embed_windows(frame, spec, *method, &base.embedding, exec);
        let combos: Vec<(usize, usize)> = grid
            .kappas
            .iter()
            .flat_map(|k| grid.w_es.iter().map(move |w| (*k, *w)))
            .collect();
        let outcomes: Vec<GridOutcome> = match &embedded {
            Err(e) => combos
                .iter()
                .map(|_| GridOutcome::Failed {
                    error: format!("embedding: {e}"),
                })
                .collect(),
            Ok((windows, dropped)) => {
                let tasks: Vec<(usize, usize)> = (0..combos.len())
                    .flat_map(|c| (0..windows.len()).map(move |w| (c, w)))
                    .collect();
                let params_of = |c: usize| NsftsParams {
                    kappa: combos[c].0,
                    w_e: combos[c].1,
                    ..base.nsfts
                };
                let results = map_ordered(exec, &tasks, |(c, w)| {
                    let p = params_of(*c);
                    p.validate()?;
                    spec.validate(p.w_e)?;
                    run_window(&windows[*w], p, base.adapt_online, base.eval_space)
                        .map(|r| r.result)
                });
                let mut per_combo: Vec<Vec<Result<WindowResult>>> =
                    (0..combos.len()).map(|_| Vec::new()).collect();
                for ((c, _), r) in tasks.iter().zip(results) {
                    per_combo[*c].push(r);
                }
                per_combo
                    .into_iter()
                    .enumerate()
                    .map(|(c, rs)| {
                        let cfg = MethodConfig {
                            method: *method,
                            nsfts: params_of(c),
                            ..base.clone()
                        };
                        match rs
                            .into_iter()
                            .collect::<Result<Vec<_>>>()
                            .and_then(|ws| assemble(cfg, *spec, frame.len(), *dropped, ws))
                        {
                            Ok(rep) => GridOutcome::Ok {
                                aggregate: rep.aggregate,
                                persistence_aggregate: rep.persistence_aggregate,
                                skill_vs_persistence: rep
                                    .skill_vs("persistence")
                                    .map(|s| s.from_aggregate),
                            },
                            Err(e) => GridOutcome::Failed {
                                error: e.to_string(),
                            },
                        }
                    })
                    .collect()
            }
        };
        for ((kappa, w_e), outcome) in combos.iter().zip(outcomes) {
            rows.push(GridRow {
                rank: 0,
                kappa: *kappa,
                w_e: *w_e,
                gamma: *gamma,
                outcome,
            });
            configs.push(MethodConfig {
                method: *method,
                nsfts: NsftsParams {
                    kappa: *kappa,
                    w_e: *w_e,
                    ..base.nsfts
                },
                ..base.clone()
            });
        }
    }

    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| rank_key(&rows[a]).cmp(&rank_key(&rows[b])));
    let best = order
        .first()
        .filter(|&&i| matches!(rows[i].outcome, GridOutcome::Ok { .. }))
        .map(|&i| configs[i].clone());
    let mut ranked: Vec<GridRow> = order.iter().map(|&i| rows[i].clone()).collect();
    for (r, row) in ranked.iter_mut().enumerate() {
        row.rank = r + 1;
    }
    Ok(GridResult {
        method: source,
        window_spec: *spec,
        rows: ranked,
        best,
    })
}

/// Total order: successes by (RMSE, MAE, κ, w_e, γ); failures after, in
/// enumeration order (the stable sort keeps it).
fn rank_key(row: &GridRow) -> (u8, OrdF64, OrdF64, usize, usize, OrdF64) {
    let g = OrdF64(row.gamma.unwrap_or(0.0));
    match &row.outcome {
        GridOutcome::Ok { aggregate, .. } => (
            0,
            OrdF64(aggregate.rmse),
            OrdF64(aggregate.mae),
            row.kappa,
            row.w_e,
            g,
        ),
        GridOutcome::Failed { .. } => (1, OrdF64(0.0), OrdF64(0.0), 0, 0, OrdF64(0.0)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Fit on the first `floor(N · train_fraction)` rows of the whole frame and
/// forecast the rest.
pub fn single_split_run(
    frame: &TimeSeriesFrame,
    train_fraction: f64,
    config: &MethodConfig,
) -> Result<(WindowEmbedding, WindowRun)> {
    config.nsfts.validate()?;
    let t = train_size(frame.len(), train_fraction)?;
    let we = embed_window(
        frame,
        0,
        0,
        frame.len(),
        t,
        config.method,
        &config.embedding,
    )?;
    let run = run_window(&we, config.nsfts, config.adapt_online, config.eval_space)?;
    Ok((we, run))
}
