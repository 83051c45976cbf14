//! Loss/expense datasets: CSV input and output, summary statistics and
//! synthetic generation for recovery studies.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{km_pseudo_observations, pseudo_observations, PseudoObservations};
use crate::margins::Margin;
use crate::mixture::CopulaModel;
use crate::sampling::{sample_model, SeededStream};

/// Paired losses and expenses with optional right-censoring of the loss.
///
/// `delta[i] == false` marks a loss censored at its policy limit `limit[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimsDataset {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub delta: Option<Vec<bool>>,
    pub limit: Option<Vec<Option<f64>>>,
}

impl ClaimsDataset {
    pub fn new(
        x: Vec<f64>,
        y: Vec<f64>,
        delta: Option<Vec<bool>>,
        limit: Option<Vec<Option<f64>>>,
    ) -> Result<Self> {
        let ds = Self { x, y, delta, limit };
        ds.validate()?;
        Ok(ds)
    }

    /// Check the invariants; the reported row is 1-based.
    pub fn validate(&self) -> Result<()> {
        let n = self.x.len();
        if self.y.len() != n
            || self.delta.as_ref().is_some_and(|d| d.len() != n)
            || self.limit.as_ref().is_some_and(|l| l.len() != n)
        {
            return Err(Error::data(None, "columns have different lengths"));
        }
        for i in 0..n {
            let row = Some(i + 1);
            if !(self.x[i].is_finite() && self.x[i] > 0.0) {
                return Err(Error::data(row, format!("loss must be positive, got {}", self.x[i])));
            }
            if !(self.y[i].is_finite() && self.y[i] > 0.0) {
                return Err(Error::data(row, format!("expense must be positive, got {}", self.y[i])));
            }
            let limit = self.limit.as_ref().and_then(|l| l[i]);
            if let Some(m) = limit {
                if !(m.is_finite() && m > 0.0) {
                    return Err(Error::data(row, format!("policy limit must be positive, got {m}")));
                }
            }
            if self.delta.as_ref().is_some_and(|d| !d[i]) && limit != Some(self.x[i]) {
                return Err(Error::data(row, "a censored loss must equal its policy limit"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn n_censored(&self) -> usize {
        self.delta.as_ref().map_or(0, |d| d.iter().filter(|&&b| !b).count())
    }

    /// Rank-based pseudo-observations; Kaplan–Meier for the loss when censoring flags are present.
    pub fn pseudo_observations(&self) -> Result<PseudoObservations> {
        match &self.delta {
            Some(d) => km_pseudo_observations(&self.x, &self.y, d),
            None => pseudo_observations(&self.x, &self.y),
        }
    }

    /// Empirical margins of the loss and expense columns.
    pub fn empirical_margins(&self) -> Result<(Margin, Margin)> {
        Ok((Margin::empirical(&self.x)?, Margin::empirical(&self.y)?))
    }
}

/// Names of the CSV columns holding each field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub loss: String,
    pub alae: String,
    pub censor: Option<String>,
    pub limit: Option<String>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            loss: "loss".into(),
            alae: "alae".into(),
            censor: None,
            limit: None,
        }
    }
}

fn parse_number(cell: &str, row: usize, column: &str) -> Result<f64> {
    cell.trim()
        .parse::<f64>()
        .map_err(|_| Error::data(Some(row), format!("column '{column}': '{cell}' is not a number")))
}

fn parse_flag(cell: &str, row: usize, column: &str) -> Result<bool> {
    match cell.trim() {
        "1" | "true" | "TRUE" | "True" => Ok(true),
        "0" | "false" | "FALSE" | "False" => Ok(false),
        other => Err(Error::data(
            Some(row),
            format!("column '{column}': '{other}' is not a censoring flag (1 = observed, 0 = censored)"),
        )),
    }
}

/// Read a dataset from CSV text with a header row.
pub fn read_csv<R: Read>(reader: R, mapping: &ColumnMapping) -> Result<ClaimsDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::data(None, format!("missing column '{name}'")))
    };
    let ix = find(&mapping.loss)?;
    let iy = find(&mapping.alae)?;
    let ic = mapping.censor.as_deref().map(find).transpose()?;
    let il = mapping.limit.as_deref().map(find).transpose()?;

    let (mut x, mut y) = (Vec::new(), Vec::new());
    let mut delta = ic.map(|_| Vec::new());
    let mut limit = il.map(|_| Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::data(Some(row), e.to_string()))?;
        let cell = |j: usize| rec.get(j).unwrap_or("");
        x.push(parse_number(cell(ix), row, &mapping.loss)?);
        y.push(parse_number(cell(iy), row, &mapping.alae)?);
        if let (Some(j), Some(d)) = (ic, delta.as_mut()) {
            d.push(parse_flag(cell(j), row, mapping.censor.as_deref().unwrap_or_default())?);
        }
        if let (Some(j), Some(l)) = (il, limit.as_mut()) {
            let c = cell(j).trim();
            let name = mapping.limit.as_deref().unwrap_or_default();
            l.push(if c.is_empty() { None } else { Some(parse_number(c, row, name)?) });
        }
    }
    if x.is_empty() {
        return Err(Error::data(None, "the file has no data rows"));
    }
    ClaimsDataset::new(x, y, delta, limit)
}

pub fn load_csv(path: impl AsRef<Path>, mapping: &ColumnMapping) -> Result<ClaimsDataset> {
    read_csv(File::open(path)?, mapping)
}

/// Write columns `loss,alae` and, when present, `delta` and `limit`.
///
/// Numbers use the shortest representation that parses back to the same value.
pub fn write_csv<W: Write>(ds: &ClaimsDataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["loss", "alae"];
    if ds.delta.is_some() {
        header.push("delta");
    }
    if ds.limit.is_some() {
        header.push("limit");
    }
    w.write_record(&header)?;
    for i in 0..ds.len() {
        let mut rec = vec![ds.x[i].to_string(), ds.y[i].to_string()];
        if let Some(d) = &ds.delta {
            rec.push(if d[i] { "1" } else { "0" }.into());
        }
        if let Some(l) = &ds.limit {
            rec.push(l[i].map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(ds: &ClaimsDataset, path: impl AsRef<Path>) -> Result<()> {
    write_csv(ds, File::create(path)?)
}

/// Column mapping matching the layout written by [`write_csv`].
pub fn written_mapping(ds: &ClaimsDataset) -> ColumnMapping {
    ColumnMapping {
        censor: ds.delta.as_ref().map(|_| "delta".into()),
        limit: ds.limit.as_ref().map(|_| "limit".into()),
        ..Default::default()
    }
}

/// Descriptive statistics of one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub name: String,
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation (zero for a single value).
    pub std: f64,
}

/// Quantile by linear interpolation between order statistics at position (n − 1)p.
pub fn quantile_linear(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize_column(name: &str, values: &[f64]) -> Result<ColumnSummary> {
    if values.is_empty() {
        return Err(Error::InsufficientData(format!("column '{name}' is empty")));
    }
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let std = if s.len() > 1 {
        (s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(ColumnSummary {
        name: name.into(),
        count: s.len(),
        min: s[0],
        q1: quantile_linear(&s, 0.25),
        median: quantile_linear(&s, 0.5),
        q3: quantile_linear(&s, 0.75),
        max: s[s.len() - 1],
        mean,
        std,
    })
}

/// Summary rows for the loss and expense columns.
pub fn summarize(ds: &ClaimsDataset) -> Result<Vec<ColumnSummary>> {
    Ok(vec![summarize_column("loss", &ds.x)?, summarize_column("alae", &ds.y)?])
}

/// How synthetic losses are right-censored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Censoring {
    /// Policy limit at the given quantile of the loss margin.
    Quantile { p: f64 },
    /// Fixed policy limit.
    Limit { value: f64 },
}

/// Recipe for a synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub model: CopulaModel,
    pub loss: Margin,
    pub alae: Margin,
    pub n: usize,
    pub seed: u64,
    pub censoring: Option<Censoring>,
}

/// Simulate a dataset: pairs from the copula, margins by inversion, then
/// losses above the policy limit are replaced by the limit.
pub fn synthesize(config: &SynthesisConfig) -> Result<ClaimsDataset> {
    if config.n == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    let pairs = sample_model(&config.model, config.n, SeededStream::new(config.seed, 0))?;
    let (mut x, y): (Vec<f64>, Vec<f64>) = pairs
        .iter()
        .map(|&(u, v)| (config.loss.quantile(u), config.alae.quantile(v)))
        .unzip();
    let Some(censoring) = config.censoring else {
        return ClaimsDataset::new(x, y, None, None);
    };
    let m = match censoring {
        Censoring::Quantile { p } if p > 0.0 && p < 1.0 => config.loss.quantile(p),
        Censoring::Limit { value } if value.is_finite() && value > 0.0 => value,
        other => return Err(Error::Domain(format!("invalid censoring {other:?}"))),
    };
    let delta: Vec<bool> = x.iter().map(|&v| v <= m).collect();
    for v in x.iter_mut() {
        *v = v.min(m);
    }
    ClaimsDataset::new(x, y, Some(delta), Some(vec![Some(m); config.n]))
}
