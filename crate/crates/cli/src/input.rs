//! Reading labelings and confusion matrices from files.

use std::fs;
use std::path::Path;

use measure_audit::measures::parse_rational;
use measure_audit::{build_confusion, ConfusionMatrix, Labeling};
use serde::Serialize;

use crate::config::InputFormat;
use crate::error::{CliError, CliResult};

/// Parsed contents of one input file.
#[derive(Debug, Clone)]
pub enum Parsed {
    Labels { truth: Labeling, pred: Labeling },
    Matrix(ConfusionMatrix),
}

impl Parsed {
    pub fn matrix(&self) -> CliResult<ConfusionMatrix> {
        match self {
            Parsed::Labels { truth, pred } => Ok(build_confusion(truth, pred)?),
            Parsed::Matrix(c) => Ok(c.clone()),
        }
    }
}

/// What the report records about an input.
#[derive(Debug, Clone, Serialize)]
pub struct InputSummary {
    pub name: String,
    pub path: String,
    pub format: &'static str,
    pub classes: usize,
    /// `alphabet[i]` is the external label mapped to class `i`.
    pub alphabet: Vec<String>,
    /// Number of labeled elements, for label files.
    pub elements: Option<usize>,
}

/// Label column pair as read, before mapping to class indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawLabels {
    pub truth: Vec<String>,
    pub pred: Vec<String>,
}

/// Map from external labels to class indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
    declared: bool,
}

impl Alphabet {
    /// Use the declared alphabet, or else read every label as a class index.
    pub fn resolve<'a>(declared: Option<&[String]>, labels: impl IntoIterator<Item = &'a str>) -> CliResult<Self> {
        if let Some(d) = declared {
            let labels: Vec<String> = d.iter().map(|s| s.trim().to_string()).collect();
            if labels.len() < 2 {
                return Err(CliError::input("an alphabet needs at least two labels"));
            }
            for (i, l) in labels.iter().enumerate() {
                if labels[..i].contains(l) {
                    return Err(CliError::input(format!("label {l:?} appears twice in the alphabet")));
                }
            }
            return Ok(Alphabet { labels, declared: true });
        }
        let mut max = 1usize;
        for l in labels {
            let i: usize = l.parse().map_err(|_| {
                CliError::input(format!(
                    "label {l:?} is not a class index; declare the labels with --alphabet"
                ))
            })?;
            max = max.max(i);
        }
        Ok(Alphabet {
            labels: (0..=max).map(|i| i.to_string()).collect(),
            declared: false,
        })
    }

    pub fn classes(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index(&self, label: &str) -> CliResult<usize> {
        if self.declared {
            self.labels
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| CliError::input(format!("label {label:?} is not in the alphabet")))
        } else {
            label
                .parse::<usize>()
                .ok()
                .filter(|&i| i < self.labels.len())
                .ok_or_else(|| CliError::input(format!("label {label:?} is not a class index")))
        }
    }

    pub fn labeling(&self, labels: &[String]) -> CliResult<Labeling> {
        let idx = labels.iter().map(|l| self.index(l)).collect::<CliResult<Vec<_>>>()?;
        Ok(Labeling::new(idx, self.classes())?)
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn csv_records(text: &str) -> CliResult<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::input(e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push(rec.iter().map(str::to_string).collect());
    }
    Ok(out)
}

fn is_header(rec: &[String]) -> bool {
    const TRUE: [&str; 5] = ["true", "truth", "y_true", "actual", "label"];
    const PRED: [&str; 5] = ["pred", "predicted", "prediction", "y_pred", "output"];
    rec.len() == 2
        && TRUE.contains(&rec[0].to_ascii_lowercase().as_str())
        && PRED.contains(&rec[1].to_ascii_lowercase().as_str())
}

/// Read the `true,pred` columns of a label file; a header row is optional.
pub fn read_labels(text: &str) -> CliResult<RawLabels> {
    let mut records = csv_records(text)?;
    if records.first().is_some_and(|r| is_header(r)) {
        records.remove(0);
    }
    let mut raw = RawLabels {
        truth: Vec::with_capacity(records.len()),
        pred: Vec::with_capacity(records.len()),
    };
    for (i, rec) in records.into_iter().enumerate() {
        if rec.len() != 2 {
            return Err(CliError::input(format!(
                "row {} has {} fields, expected 2",
                i + 1,
                rec.len()
            )));
        }
        let mut it = rec.into_iter();
        raw.truth.extend(it.next());
        raw.pred.extend(it.next());
    }
    if raw.truth.is_empty() {
        return Err(CliError::input("label file has no rows"));
    }
    Ok(raw)
}

fn matrix_from_rows(rows: Vec<Vec<String>>) -> CliResult<ConfusionMatrix> {
    let m = rows.len();
    let mut entries = Vec::with_capacity(m * m);
    for (i, row) in rows.into_iter().enumerate() {
        if row.len() != m {
            return Err(CliError::input(format!(
                "row {} has {} entries; a matrix with {m} rows needs {m}",
                i + 1,
                row.len()
            )));
        }
        for cell in row {
            let q = parse_rational(&cell).map_err(|_| CliError::input(format!("{cell:?} is not a count")))?;
            entries.push(q);
        }
    }
    Ok(ConfusionMatrix::new(m, entries)?)
}

/// A JSON array of rows. Entries are integers or exact fractions as strings.
pub fn read_matrix_json(text: &str) -> CliResult<ConfusionMatrix> {
    let doc: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::input(e.to_string()))?;
    let doc = match doc {
        serde_json::Value::Object(mut o) => o
            .remove("matrix")
            .ok_or_else(|| CliError::input("expected an array of rows or an object with a \"matrix\" key"))?,
        other => other,
    };
    let rows = doc
        .as_array()
        .ok_or_else(|| CliError::input("expected an array of rows"))?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| CliError::input("each row must be an array"))?
                .iter()
                .map(|cell| match cell {
                    serde_json::Value::Number(n) if n.is_i64() || n.is_u64() => Ok(n.to_string()),
                    serde_json::Value::String(s) => Ok(s.clone()),
                    other => Err(CliError::input(format!("{other} is not an integer count"))),
                })
                .collect::<CliResult<Vec<String>>>()
        })
        .collect::<CliResult<Vec<_>>>()?;
    matrix_from_rows(rows)
}

/// One row of counts per line.
pub fn read_matrix_csv(text: &str) -> CliResult<ConfusionMatrix> {
    matrix_from_rows(csv_records(text)?)
}

/// Serialize a matrix so that [`read_matrix_json`] recovers it exactly.
pub fn matrix_to_json(c: &ConfusionMatrix) -> String {
    let m = c.m();
    let rows: Vec<Vec<serde_json::Value>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let q = c.get(i, j);
                    let text = q.to_string();
                    match text.parse::<u64>() {
                        Ok(k) => serde_json::Value::from(k),
                        Err(_) => serde_json::Value::from(text),
                    }
                })
                .collect()
        })
        .collect();
    serde_json::to_string(&rows).expect("rows of numbers serialize")
}

/// Format from an explicit choice, else from the extension. `.csv` is
/// ambiguous and resolves to `csv_default`.
pub fn infer_format(path: &Path, explicit: Option<InputFormat>, csv_default: InputFormat) -> CliResult<InputFormat> {
    if let Some(f) = explicit {
        return Ok(f);
    }
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("json") => Ok(InputFormat::MatrixJson),
        Some("csv") | Some("tsv") | Some("txt") => Ok(csv_default),
        _ => Err(CliError::input(format!(
            "cannot infer the format of {}; pass --input-format",
            path.display()
        ))),
    }
}

/// Read one file. Label files are mapped through `alphabet` or, without
/// one, read as class indices.
pub fn parse_inputs(
    path: &Path,
    format: InputFormat,
    alphabet: Option<&[String]>,
) -> CliResult<(Parsed, InputSummary)> {
    let text = read(path)?;
    let mut summary = InputSummary {
        name: path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        path: path.display().to_string(),
        format: format.as_str(),
        classes: 0,
        alphabet: Vec::new(),
        elements: None,
    };
    let parsed = match format {
        InputFormat::LabelsCsv => {
            let raw = read_labels(&text)?;
            let alpha = Alphabet::resolve(alphabet, raw.truth.iter().chain(&raw.pred).map(String::as_str))?;
            summary.elements = Some(raw.truth.len());
            summary.alphabet = alpha.labels().to_vec();
            Parsed::Labels {
                truth: alpha.labeling(&raw.truth)?,
                pred: alpha.labeling(&raw.pred)?,
            }
        }
        InputFormat::MatrixJson => Parsed::Matrix(read_matrix_json(&text)?),
        InputFormat::MatrixCsv => Parsed::Matrix(read_matrix_csv(&text)?),
    };
    if let Parsed::Matrix(c) = &parsed {
        summary.alphabet = (0..c.m()).map(|i| i.to_string()).collect();
    }
    summary.classes = summary.alphabet.len();
    Ok((parsed, summary))
}

/// Read several label files against one alphabet so that class indices line
/// up across files.
pub fn parse_label_files(
    files: &[(String, &Path)],
    alphabet: Option<&[String]>,
) -> CliResult<(Alphabet, Vec<RawLabels>, Vec<InputSummary>)> {
    let mut raws = Vec::with_capacity(files.len());
    for (_, path) in files {
        raws.push(read_labels(&read(path)?)?);
    }
    let alpha = Alphabet::resolve(
        alphabet,
        raws.iter()
            .flat_map(|r| r.truth.iter().chain(&r.pred))
            .map(String::as_str),
    )?;
    let summaries = files
        .iter()
        .zip(&raws)
        .map(|((name, path), raw)| InputSummary {
            name: name.clone(),
            path: path.display().to_string(),
            format: InputFormat::LabelsCsv.as_str(),
            classes: alpha.classes(),
            alphabet: alpha.labels().to_vec(),
            elements: Some(raw.truth.len()),
        })
        .collect();
    Ok((alpha, raws, summaries))
}
