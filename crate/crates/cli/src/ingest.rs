//! Counts files: `nu,label,h1_deg,q1_deg,h2_deg,q2_deg,count`.
//!
//! `nu` runs 1..=16 and rows may come in any order. The four angle columns
//! are optional as a group; without them the standard design is used and
//! each label, if present, must match it.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;
use tomo_core::counts::DEFAULT_DELTA_THETA_DEG;
use tomo_core::projection::table1_states;
use tomo_core::{CountRecord, TomographySet, WaveplateSetting};

pub const ROWS: usize = 16;
pub const HEADER: [&str; 7] = [
    "nu", "label", "h1_deg", "q1_deg", "h2_deg", "q2_deg", "count",
];
const ANGLES: [&str; 4] = ["h1_deg", "q1_deg", "h2_deg", "q2_deg"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("header: missing required column `{column}`")]
    MissingColumn { column: String },

    #[error("header: angle columns must all be present or all absent, `{column}` is missing")]
    PartialAngles { column: String },

    #[error("line {line}, column `{column}`: {message}")]
    Field {
        line: u64,
        column: String,
        message: String,
    },

    #[error("line {line}, column `nu`: duplicate nu = {nu}, first given on line {first}")]
    DuplicateNu { line: u64, nu: usize, first: u64 },

    #[error("missing rows for nu = {missing:?}")]
    MissingRows { missing: Vec<usize> },

    #[error("design: {0}")]
    Design(String),
}

impl IngestError {
    /// `(line, column)` when the error points at a single cell.
    pub fn location(&self) -> (Option<u64>, Option<&str>) {
        match self {
            IngestError::Csv { line, .. } => (Some(*line), None),
            IngestError::Field { line, column, .. } => (Some(*line), Some(column)),
            IngestError::DuplicateNu { line, .. } => (Some(*line), Some("nu")),
            IngestError::MissingColumn { column } | IngestError::PartialAngles { column } => {
                (None, Some(column))
            }
            _ => (None, None),
        }
    }
}

/// A parsed counts file.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub record: CountRecord,
    pub set: TomographySet,
    /// Row labels in `nu` order.
    pub labels: Vec<String>,
    /// False when the file carried no angle columns.
    pub explicit_angles: bool,
    /// Hex SHA-256 of the raw input bytes.
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn ingest(path: &Path) -> Result<Dataset, IngestError> {
    let bytes = std::fs::read(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ingest_bytes(&bytes)
}

struct Row {
    line: u64,
    label: Option<String>,
    angles: Option<[f64; 4]>,
    count: f64,
}

fn field(line: u64, column: &str, message: impl Into<String>) -> IngestError {
    IngestError::Field {
        line,
        column: column.to_string(),
        message: message.into(),
    }
}

fn parse_number(raw: &str, line: u64, column: &str) -> Result<f64, IngestError> {
    let x: f64 = raw
        .parse()
        .map_err(|_| field(line, column, format!("`{raw}` is not a number")))?;
    if !x.is_finite() {
        return Err(field(line, column, format!("`{raw}` is not finite")));
    }
    Ok(x)
}

pub fn ingest_bytes(bytes: &[u8]) -> Result<Dataset, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| IngestError::Csv {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let required = |name: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| IngestError::MissingColumn {
                column: name.to_string(),
            })
    };
    let nu_col = required("nu")?;
    let count_col = required("count")?;
    let label_col = index.get("label").copied();
    let angle_cols: Vec<Option<usize>> = ANGLES.iter().map(|a| index.get(a).copied()).collect();
    let explicit_angles = angle_cols.iter().any(Option::is_some);
    if explicit_angles {
        if let Some(i) = angle_cols.iter().position(Option::is_none) {
            return Err(IngestError::PartialAngles {
                column: ANGLES[i].to_string(),
            });
        }
    }

    let mut rows: Vec<Option<Row>> = (0..ROWS).map(|_| None).collect();
    for result in reader.records() {
        let rec = result.map_err(|e| IngestError::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let nu_raw = &rec[nu_col];
        let nu: usize = nu_raw
            .parse()
            .ok()
            .filter(|n| (1..=ROWS).contains(n))
            .ok_or_else(|| {
                field(
                    line,
                    "nu",
                    format!("`{nu_raw}` is not an integer in 1..=16"),
                )
            })?;
        if let Some(first) = &rows[nu - 1] {
            return Err(IngestError::DuplicateNu {
                line,
                nu,
                first: first.line,
            });
        }
        let count = parse_number(&rec[count_col], line, "count")?;
        if count < 0.0 {
            return Err(field(line, "count", format!("{count} is negative")));
        }
        let angles = if explicit_angles {
            let mut a = [0.0; 4];
            for (k, col) in angle_cols.iter().enumerate() {
                a[k] = parse_number(&rec[col.unwrap()], line, ANGLES[k])?;
            }
            Some(a)
        } else {
            None
        };
        let label = label_col
            .map(|i| rec[i].to_string())
            .filter(|s| !s.is_empty());
        rows[nu - 1] = Some(Row {
            line,
            label,
            angles,
            count,
        });
    }
    let missing: Vec<usize> = (1..=ROWS).filter(|nu| rows[nu - 1].is_none()).collect();
    if !missing.is_empty() {
        return Err(IngestError::MissingRows { missing });
    }
    let rows: Vec<Row> = rows.into_iter().map(Option::unwrap).collect();
    let counts: Vec<f64> = rows.iter().map(|r| r.count).collect();

    let (settings, mut set) = if explicit_angles {
        let mut settings = Vec::with_capacity(ROWS);
        for r in &rows {
            let [h1, q1, h2, q2] = r.angles.unwrap();
            settings.push(
                WaveplateSetting::from_degrees(h1, q1, h2, q2)
                    .map_err(|e| field(r.line, "h1_deg", e.to_string()))?,
            );
        }
        let set = TomographySet::from_settings(&settings)
            .map_err(|e| IngestError::Design(e.to_string()))?;
        (settings, set)
    } else {
        let states = table1_states();
        for (r, st) in rows.iter().zip(&states) {
            if let Some(label) = &r.label {
                if !label.eq_ignore_ascii_case(&st.label) {
                    return Err(field(
                        r.line,
                        "label",
                        format!(
                            "`{label}` does not match the standard design, which has `{}` here; \
                             give explicit angles for a different design",
                            st.label
                        ),
                    ));
                }
            }
        }
        let settings = states.iter().map(|s| s.setting).collect();
        (settings, TomographySet::table1())
    };
    for (st, r) in set.states.iter_mut().zip(&rows) {
        if let Some(label) = &r.label {
            st.label = label.clone();
        }
    }
    let labels = set.states.iter().map(|s| s.label.clone()).collect();
    let record = CountRecord::new(counts, settings, DEFAULT_DELTA_THETA_DEG.to_radians())
        .map_err(|e| IngestError::Design(e.to_string()))?;
    Ok(Dataset {
        record,
        set,
        labels,
        explicit_angles,
        sha256: sha256_hex(bytes),
    })
}

/// Write a counts file with every column, rows in `nu` order.
pub fn write_counts<W: Write>(
    out: W,
    record: &CountRecord,
    labels: &[String],
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for (nu, (count, setting)) in record.counts().iter().zip(record.settings()).enumerate() {
        let deg = setting.to_degrees();
        let label = labels.get(nu).map_or("", String::as_str);
        w.write_record([
            (nu + 1).to_string(),
            label.to_string(),
            deg[0].to_string(),
            deg[1].to_string(),
            deg[2].to_string(),
            deg[3].to_string(),
            count.to_string(),
        ])?;
    }
    w.flush()
}
