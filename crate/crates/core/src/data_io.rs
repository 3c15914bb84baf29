//! Dataset ingestion, train/test splitting, synthetic drift fixtures and
//! model persistence.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::embedding::{KpcaModel, PcaModel};
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::nsfts::NsftsModel;

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M:%S";

/// Timestamped N×M table of sensor readings.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesFrame {
    /// Empty when the source had no timestamp column.
    timestamps: Vec<NaiveDateTime>,
    column_names: Vec<String>,
    values: Matrix,
    target_column: Option<String>,
}

impl TimeSeriesFrame {
    pub fn new(
        timestamps: Vec<NaiveDateTime>,
        column_names: Vec<String>,
        values: Matrix,
        target_column: Option<String>,
    ) -> Result<Self> {
        if values.rows() < 2 {
            return invalid(format!(
                "a frame needs at least 2 rows, got {}",
                values.rows()
            ));
        }
        if column_names.len() != values.cols() {
            return invalid(format!(
                "{} column names for {} columns",
                column_names.len(),
                values.cols()
            ));
        }
        if !timestamps.is_empty() && timestamps.len() != values.rows() {
            return invalid("timestamp count does not match row count");
        }
        if let Some(t) = &target_column {
            if !column_names.contains(t) {
                return invalid(format!("target column '{t}' not in frame"));
            }
        }
        if timestamps.windows(2).any(|w| w[1] <= w[0]) {
            log::warn!("timestamps are not strictly increasing; row order is kept as given");
        }
        Ok(Self {
            timestamps,
            column_names,
            values,
            target_column,
        })
    }

    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_columns(&self) -> usize {
        self.values.cols()
    }

    pub fn timestamps(&self) -> &[NaiveDateTime] {
        &self.timestamps
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn target_column(&self) -> Option<&str> {
        self.target_column.as_deref()
    }

    pub fn target_index(&self) -> Option<usize> {
        let t = self.target_column.as_ref()?;
        self.column_names.iter().position(|c| c == t)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn with_target(mut self, target: Option<String>) -> Result<Self> {
        if let Some(t) = &target {
            if self.column_index(t).is_none() {
                return invalid(format!("target column '{t}' not in frame"));
            }
        }
        self.target_column = target;
        Ok(self)
    }

    /// Rows `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return invalid(format!(
                "row range {start}..{end} outside 0..{}",
                self.len()
            ));
        }
        let ts = if self.timestamps.is_empty() {
            vec![]
        } else {
            self.timestamps[start..end].to_vec()
        };
        Ok(Self {
            timestamps: ts,
            column_names: self.column_names.clone(),
            values: self.values.row_range(start, end),
            target_column: self.target_column.clone(),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CsvOptions {
    /// Parsed as `YYYY-MM-DD hh:mm:ss`; used only for ordering and reports.
    pub timestamp_column: Option<String>,
    pub drop_columns: Vec<String>,
    pub target_column: Option<String>,
}

/// Reads a comma-separated file with a header row.
///
/// Every non-timestamp, non-dropped column must be numeric. Rows with empty
/// cells are rejected (all offending rows are listed).
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<TimeSeriesFrame> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(BufReader::new(file), opts)
}

pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<TimeSeriesFrame> {
    if let Some(ts) = &opts.timestamp_column {
        if opts.drop_columns.contains(ts) {
            return invalid(format!(
                "'{ts}' is the timestamp column; it cannot also be dropped"
            ));
        }
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Ingest {
            row: 0,
            column: String::new(),
            message: format!("bad header: {e}"),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let ts_idx =
        match &opts.timestamp_column {
            Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| {
                Error::InvalidInput(format!("timestamp column '{name}' not found"))
            })?),
            None => None,
        };
    for d in &opts.drop_columns {
        if !headers.contains(d) {
            return invalid(format!("drop column '{d}' not found"));
        }
    }
    let keep: Vec<usize> = (0..headers.len())
        .filter(|i| Some(*i) != ts_idx && !opts.drop_columns.contains(&headers[*i]))
        .collect();
    if keep.is_empty() {
        return invalid("no numeric columns left after dropping");
    }
    let names: Vec<String> = keep.iter().map(|&i| headers[i].clone()).collect();

    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    let mut gaps = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| Error::Ingest {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        if let Some(ti) = ts_idx {
            let raw = record.get(ti).unwrap_or("").trim();
            let ts = NaiveDateTime::parse_from_str(raw, TIMESTAMP_FORMAT).map_err(|e| {
                Error::Ingest {
                    row,
                    column: headers[ti].clone(),
                    message: format!("bad timestamp '{raw}': {e}"),
                }
            })?;
            timestamps.push(ts);
        }
        let mut has_gap = false;
        for &ci in &keep {
            let raw = record.get(ci).unwrap_or("").trim();
            if raw.is_empty() {
                has_gap = true;
                values.push(0.0);
                continue;
            }
            let v: f64 = raw.parse().map_err(|_| Error::Ingest {
                row,
                column: headers[ci].clone(),
                message: format!("cannot parse '{raw}' as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Ingest {
                    row,
                    column: headers[ci].clone(),
                    message: format!("non-finite value '{raw}'"),
                });
            }
            values.push(v);
        }
        if has_gap {
            gaps.push(row);
        }
    }
    if let Some(&first) = gaps.first() {
        let listed: Vec<String> = gaps.iter().take(20).map(|r| r.to_string()).collect();
        return Err(Error::Ingest {
            row: first,
            column: String::new(),
            message: format!(
                "missing values in {} row(s): {}{}",
                gaps.len(),
                listed.join(", "),
                if gaps.len() > 20 { ", ..." } else { "" }
            ),
        });
    }
    let n = values.len() / keep.len();
    let m = Matrix::new(n, keep.len(), values)?;
    TimeSeriesFrame::new(timestamps, names, m, opts.target_column.clone())
}

/// Writes a frame as CSV; values use the shortest exact decimal form so a
/// reload is lossless.
pub fn write_csv(frame: &TimeSeriesFrame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = create(path)?;
    write_csv_to(frame, BufWriter::new(file)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_csv_to<W: Write>(frame: &TimeSeriesFrame, mut w: W) -> std::io::Result<()> {
    let has_ts = !frame.timestamps.is_empty();
    let mut header: Vec<&str> = Vec::new();
    if has_ts {
        header.push("date");
    }
    header.extend(frame.column_names.iter().map(String::as_str));
    writeln!(w, "{}", header.join(","))?;
    for i in 0..frame.len() {
        let mut cells: Vec<String> = Vec::with_capacity(frame.n_columns() + 1);
        if has_ts {
            cells.push(frame.timestamps[i].format(TIMESTAMP_FORMAT).to_string());
        }
        cells.extend(frame.values.row(i).iter().map(|v| v.to_string()));
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()
}

pub(crate) fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Number of training rows for a contiguous split.
pub fn train_size(n: usize, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return invalid(format!("train fraction must be in (0, 1), got {fraction}"));
    }
    let train = (n as f64 * fraction).floor() as usize;
    if train == 0 || train >= n {
        return invalid(format!(
            "splitting {n} rows at {fraction} leaves an empty side ({train}/{})",
            n.saturating_sub(train)
        ));
    }
    Ok(train)
}

/// Contiguous prefix/suffix split with `floor(N · fraction)` training rows.
pub fn split_train_test<T>(data: &[T], fraction: f64) -> Result<(&[T], &[T])> {
    let k = train_size(data.len(), fraction)?;
    Ok(data.split_at(k))
}

pub fn split_frame(
    frame: &TimeSeriesFrame,
    fraction: f64,
) -> Result<(TimeSeriesFrame, TimeSeriesFrame)> {
    let k = train_size(frame.len(), fraction)?;
    Ok((frame.slice(0, k)?, frame.slice(k, frame.len())?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftKind {
    MeanShift,
    VarianceRamp,
    SineDrift,
}

impl std::str::FromStr for DriftKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean_shift" => Ok(Self::MeanShift),
            "variance_ramp" => Ok(Self::VarianceRamp),
            "sine_drift" => Ok(Self::SineDrift),
            other => invalid(format!("unknown drift kind '{other}'")),
        }
    }
}

/// Synthetic drift fixture. The base process is a Gaussian AR(1) with
/// coefficient [`SYNTH_AR_COEF`] and unit marginal variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub length: usize,
    pub kind: DriftKind,
    pub shift_at: usize,
    pub magnitude: f64,
    pub seed: u64,
}

pub const SYNTH_AR_COEF: f64 = 0.5;

/// Deterministic for a given seed.
///
/// * `mean_shift`: adds `magnitude` to every point at or after `shift_at`.
/// * `variance_ramp`: noise scale grows linearly from 1 at `shift_at` to
///   `1 + magnitude` at the end.
/// * `sine_drift`: adds `magnitude · sin(2π (t − shift_at) / length)` from
///   `shift_at` on.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Vec<f64>> {
    if spec.length == 0 || spec.shift_at >= spec.length {
        return invalid(format!(
            "shift_at {} must be below length {}",
            spec.shift_at, spec.length
        ));
    }
    if !spec.magnitude.is_finite() {
        return invalid("magnitude must be finite");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let innov = (1.0 - SYNTH_AR_COEF * SYNTH_AR_COEF).sqrt();
    let mut state: f64 = StandardNormal.sample(&mut rng);
    let n = spec.length;
    let tail = (n - spec.shift_at) as f64;
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        if t > 0 {
            let e: f64 = StandardNormal.sample(&mut rng);
            state = SYNTH_AR_COEF * state + innov * e;
        }
        let after = t >= spec.shift_at;
        let since = (t - spec.shift_at.min(t)) as f64;
        let v = match spec.kind {
            DriftKind::MeanShift => state + if after { spec.magnitude } else { 0.0 },
            DriftKind::VarianceRamp => {
                let scale = if after {
                    1.0 + spec.magnitude * since / tail
                } else {
                    1.0
                };
                state * scale
            }
            DriftKind::SineDrift => {
                let drift = if after {
                    spec.magnitude * (2.0 * std::f64::consts::PI * since / n as f64).sin()
                } else {
                    0.0
                };
                state + drift
            }
        };
        out.push(v);
    }
    Ok(out)
}

/// Multivariate fixture: `n_features` sensors driven by one synthetic latent
/// series with per-sensor loading, offset and independent noise, at a
/// 10-minute cadence. The first column is named `target`.
pub fn generate_synthetic_frame(
    spec: &SyntheticSpec,
    n_features: usize,
) -> Result<TimeSeriesFrame> {
    if n_features == 0 {
        return invalid("need at least one feature");
    }
    let latent = generate_synthetic(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
    let loadings: Vec<f64> = (0..n_features)
        .map(|j| 0.5 + (j as f64 * 0.37).sin().abs() * 2.0)
        .collect();
    let offsets: Vec<f64> = (0..n_features).map(|j| 10.0 * j as f64).collect();
    let mut data = Vec::with_capacity(latent.len() * n_features);
    for y in &latent {
        for j in 0..n_features {
            let e: f64 = StandardNormal.sample(&mut rng);
            data.push(offsets[j] + loadings[j] * y + 0.1 * e);
        }
    }
    let values = Matrix::new(latent.len(), n_features, data)?;
    let start = NaiveDate::from_ymd_opt(2016, 1, 11)
        .and_then(|d| d.and_hms_opt(17, 0, 0))
        .expect("valid start date");
    let timestamps = (0..latent.len())
        .map(|i| start + Duration::minutes(10 * i as i64))
        .collect();
    let mut names = vec!["target".to_string()];
    names.extend((1..n_features).map(|j| format!("s{j}")));
    TimeSeriesFrame::new(timestamps, names, values, Some("target".into()))
}

pub const MODEL_FORMAT: &str = "ensfts-model";
pub const MODEL_VERSION: u32 = 1;

/// Any persisted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SavedModel {
    Pca(PcaModel),
    Kpca(KpcaModel),
    Nsfts(NsftsModel),
}

#[derive(Serialize)]
struct EnvelopeOut<'a> {
    format: &'static str,
    version: u32,
    model: &'a SavedModel,
}

/// Serializes a model as a versioned JSON document.
pub fn model_to_json(model: &SavedModel) -> Result<String> {
    serde_json::to_string_pretty(&EnvelopeOut {
        format: MODEL_FORMAT,
        version: MODEL_VERSION,
        model,
    })
    .map_err(|e| Error::Load(format!("cannot serialize model: {e}")))
}

pub fn model_from_json(text: &str) -> Result<SavedModel> {
    let doc: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::Load(format!("malformed model document: {e}")))?;
    match doc.get("format").and_then(|f| f.as_str()) {
        Some(MODEL_FORMAT) => {}
        other => {
            return Err(Error::Load(format!(
                "not a model document (format {other:?})"
            )))
        }
    }
    match doc.get("version") {
        Some(v) if v.as_u64() == Some(MODEL_VERSION as u64) => {}
        Some(v) => return Err(Error::Load(format!("unsupported model version {v}"))),
        None => return Err(Error::Load("model document has no version".into())),
    }
    let model = doc
        .get("model")
        .ok_or_else(|| Error::Load("model document has no model".into()))?;
    SavedModel::deserialize(model).map_err(|e| Error::Load(format!("invalid model: {e}")))
}

pub fn save_model(path: impl AsRef<Path>, model: &SavedModel) -> Result<()> {
    let path = path.as_ref();
    let text = model_to_json(model)?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SavedModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    model_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "date,Appliances,T1,rv1\n\
        2016-01-11 17:00:00,60,19.89,13.27\n\
        2016-01-11 17:10:00,60,19.89,18.6\n\
        2016-01-11 17:20:00,50,19.89,28.64\n";

    fn opts() -> CsvOptions {
        CsvOptions {
            timestamp_column: Some("date".into()),
            drop_columns: vec![],
            target_column: Some("Appliances".into()),
        }
    }

    #[test]
    fn reads_sample() {
        let f = read_csv(SAMPLE.as_bytes(), &opts()).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.column_names(), &["Appliances", "T1", "rv1"]);
        assert_eq!(f.values().get(2, 2), 28.64);
        assert_eq!(f.target_index(), Some(0));
        assert_eq!(
            f.timestamps()[1].format(TIMESTAMP_FORMAT).to_string(),
            "2016-01-11 17:10:00"
        );
    }

    #[test]
    fn drops_columns_and_guards_timestamp() {
        let mut o = opts();
        o.drop_columns = vec!["rv1".into()];
        let f = read_csv(SAMPLE.as_bytes(), &o).unwrap();
        assert_eq!(f.n_columns(), 2);
        o.drop_columns = vec!["date".into()];
        assert!(matches!(
            read_csv(SAMPLE.as_bytes(), &o),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn bad_cell_names_row_and_column() {
        let bad = SAMPLE.replace("19.89,18.6", "19.89,oops");
        match read_csv(bad.as_bytes(), &opts()) {
            Err(Error::Ingest { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "rv1");
            }
            other => panic!("expected ingest error, got {other:?}"),
        }
    }

    #[test]
    fn missing_values_rejected_with_rows() {
        let bad = SAMPLE.replace("50,19.89", "50,");
        match read_csv(bad.as_bytes(), &opts()) {
            Err(Error::Ingest { row, message, .. }) => {
                assert_eq!(row, 3);
                assert!(message.contains("missing"));
            }
            other => panic!("expected ingest error, got {other:?}"),
        }
    }

    #[test]
    fn csv_roundtrip_is_lossless() {
        let spec = SyntheticSpec {
            length: 50,
            kind: DriftKind::SineDrift,
            shift_at: 10,
            magnitude: 2.0,
            seed: 9,
        };
        let frame = generate_synthetic_frame(&spec, 4).unwrap();
        let mut buf = Vec::new();
        write_csv_to(&frame, &mut buf).unwrap();
        let back = read_csv(
            buf.as_slice(),
            &CsvOptions {
                timestamp_column: Some("date".into()),
                drop_columns: vec![],
                target_column: Some("target".into()),
            },
        )
        .unwrap();
        assert_eq!(back, frame);
    }

    #[test]
    fn split_examples() {
        let v: Vec<u32> = (0..8).collect();
        let (a, b) = split_train_test(&v, 0.75).unwrap();
        assert_eq!((a.len(), b.len()), (6, 2));
        let v: Vec<u32> = (0..657).collect();
        let (a, b) = split_train_test(&v, 0.75).unwrap();
        assert_eq!((a.len(), b.len()), (492, 165));
        assert!(split_train_test(&[1], 0.999).is_err());
        assert!(split_train_test(&[1, 2], 0.4).is_err());
        assert!(split_train_test(&[1, 2], 1.0).is_err());
    }

    #[test]
    fn synthetic_is_deterministic_and_shifts() {
        let mut spec = SyntheticSpec {
            length: 4000,
            kind: DriftKind::MeanShift,
            shift_at: 2000,
            magnitude: 5.0,
            seed: 42,
        };
        let a = generate_synthetic(&spec).unwrap();
        assert_eq!(a, generate_synthetic(&spec).unwrap());
        let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
        let diff = mean(&a[2000..]) - mean(&a[..2000]);
        // AR(1) sample means over 2000 points have std ≈ 0.04 each
        assert!((diff - 5.0).abs() < 0.25, "diff = {diff}");

        spec.magnitude = 0.0;
        let b = generate_synthetic(&spec).unwrap();
        assert!((mean(&b[2000..]) - mean(&b[..2000])).abs() < 0.25);
        spec.shift_at = 4000;
        assert!(generate_synthetic(&spec).is_err());
    }

    #[test]
    fn variance_ramp_grows() {
        let spec = SyntheticSpec {
            length: 3000,
            kind: DriftKind::VarianceRamp,
            shift_at: 1000,
            magnitude: 3.0,
            seed: 1,
        };
        let s = generate_synthetic(&spec).unwrap();
        let var = |x: &[f64]| {
            let m = x.iter().sum::<f64>() / x.len() as f64;
            x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64
        };
        assert!(var(&s[2600..]) > 4.0 * var(&s[..1000]));
    }

    #[test]
    fn model_document_errors() {
        assert!(matches!(
            model_from_json("{\"format\":\"ensfts-model\",\"vers"),
            Err(Error::Load(_))
        ));
        let err = model_from_json("{\"format\":\"ensfts-model\",\"version\":7,\"model\":{}}")
            .unwrap_err();
        assert!(err.to_string().contains('7'));
        assert!(model_from_json("{\"format\":\"other\",\"version\":1}").is_err());
    }
}
