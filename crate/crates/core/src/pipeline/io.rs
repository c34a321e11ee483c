//! Point cloud and label files.
//!
//! CSV: one point per line, comma separated, optional header. When the
//! header's last column is `label`, that column holds integer labels.
//! JSON: `{"points": [[...], ...], "labels": [...]}` with `labels` optional.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{FsascError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    Csv,
    Json,
}

impl CloudFormat {
    /// `.json` is JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Self::Json,
            _ => Self::Csv,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CloudJson {
    points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<usize>>,
}

fn parse_err(line: usize, message: impl Into<String>) -> FsascError {
    FsascError::Parse {
        line,
        message: message.into(),
    }
}

pub fn load_cloud(path: &Path) -> Result<PointCloud> {
    load_cloud_as(path, CloudFormat::from_path(path))
}

pub fn load_cloud_as(path: &Path, format: CloudFormat) -> Result<PointCloud> {
    let text = fs::read_to_string(path)?;
    match format {
        CloudFormat::Csv => parse_csv(&text),
        CloudFormat::Json => parse_json(&text),
    }
}

pub fn parse_json(text: &str) -> Result<PointCloud> {
    let raw: CloudJson = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
    check_ragged(raw.points.iter().map(Vec::len), 1)?;
    let cloud = PointCloud::from_rows(&raw.points)?;
    match raw.labels {
        Some(l) => cloud.with_labels(l),
        None => Ok(cloud),
    }
}

fn check_ragged(mut lens: impl Iterator<Item = usize>, first_line: usize) -> Result<()> {
    let Some(width) = lens.next() else {
        return Err(parse_err(first_line, "no points"));
    };
    for (k, len) in lens.enumerate() {
        if len != width {
            return Err(parse_err(
                first_line + k + 1,
                format!("row has {len} values, expected {width}"),
            ));
        }
    }
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<PointCloud> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut labelled = false;
    let mut width: Option<usize> = None;
    let mut first = true;

    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if first {
            first = false;
            if rec.iter().any(|f| f.parse::<f64>().is_err()) {
                labelled = rec.iter().next_back().is_some_and(|f| f.eq_ignore_ascii_case("label"));
                width = Some(rec.len());
                continue;
            }
        }
        match width {
            Some(w) if w != rec.len() => {
                return Err(parse_err(
                    line,
                    format!("row has {} fields, expected {w}", rec.len()),
                ));
            }
            None => width = Some(rec.len()),
            _ => {}
        }
        let n_coords = rec.len() - usize::from(labelled);
        let mut point = Vec::with_capacity(n_coords);
        for (k, field) in rec.iter().enumerate() {
            if k == n_coords {
                let l = field
                    .parse::<usize>()
                    .map_err(|_| parse_err(line, format!("label {field:?} is not a non-negative integer")))?;
                labels.push(l);
            } else {
                let v = field
                    .parse::<f64>()
                    .map_err(|_| parse_err(line, format!("field {} ({field:?}) is not a number", k + 1)))?;
                point.push(v);
            }
        }
        rows.push(point);
    }
    if rows.is_empty() {
        return Err(parse_err(1, "no points"));
    }
    let cloud = PointCloud::from_rows(&rows)?;
    if labelled {
        cloud.with_labels(labels)
    } else {
        Ok(cloud)
    }
}

/// Writes the cloud as CSV with an `x1,...,xD[,label]` header.
pub fn write_csv<W: Write>(x: &PointCloud, mut out: W) -> Result<()> {
    let mut header: Vec<String> = (1..=x.dim()).map(|k| format!("x{k}")).collect();
    if x.labels().is_some() {
        header.push("label".into());
    }
    writeln!(out, "{}", header.join(","))?;
    for (j, p) in x.points().enumerate() {
        let mut fields: Vec<String> = p.iter().map(f64::to_string).collect();
        if let Some(l) = x.labels() {
            fields.push(l[j].to_string());
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn to_json(x: &PointCloud) -> Result<String> {
    Ok(serde_json::to_string(&CloudJson {
        points: x.to_rows(),
        labels: x.labels().map(<[usize]>::to_vec),
    })?)
}

pub fn save_cloud(x: &PointCloud, path: &Path) -> Result<()> {
    match CloudFormat::from_path(path) {
        CloudFormat::Json => fs::write(path, to_json(x)?)?,
        CloudFormat::Csv => {
            let mut buf = Vec::new();
            write_csv(x, &mut buf)?;
            fs::write(path, buf)?;
        }
    }
    Ok(())
}

/// Reads labels from a JSON array, a JSON object with a `labels` field, a
/// point cloud file with a label column, or plain text with one integer per
/// line (an optional `label` header is skipped).
pub fn load_labels(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    parse_labels(&text)
}

pub fn parse_labels(text: &str) -> Result<Vec<usize>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        return serde_json::from_str(trimmed).map_err(|e| parse_err(e.line(), e.to_string()));
    }
    if trimmed.starts_with('{') {
        #[derive(Deserialize)]
        struct WithLabels {
            labels: Vec<usize>,
        }
        let w: WithLabels =
            serde_json::from_str(trimmed).map_err(|e| parse_err(e.line(), e.to_string()))?;
        return Ok(w.labels);
    }
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first.contains(',') {
        return parse_csv(text)?
            .labels()
            .map(<[usize]>::to_vec)
            .ok_or_else(|| parse_err(1, "no label column"));
    }
    let mut out = Vec::new();
    for (k, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() || (out.is_empty() && l.eq_ignore_ascii_case("label")) {
            continue;
        }
        out.push(
            l.parse()
                .map_err(|_| parse_err(k + 1, format!("label {l:?} is not a non-negative integer")))?,
        );
    }
    Ok(out)
}

/// Dense matrix as CSV, one row per line, no header.
pub fn write_matrix_csv<W: Write>(m: &DMatrix<f64>, mut out: W) -> Result<()> {
    for row in m.row_iter() {
        let fields: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn parse_matrix_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err(k + 1, format!("{:?} is not a number", f.trim())))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(
                    k + 1,
                    format!("row has {} values, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}
