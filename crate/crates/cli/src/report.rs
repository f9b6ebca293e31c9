//! Report assembly and rendering.

use serde::Serialize;

use crate::config::OutputFormat;
use crate::input::InputSummary;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(title: impl Into<String>, columns: Vec<String>) -> Self {
        Table {
            title: title.into(),
            columns,
            rows: Vec::new(),
        }
    }
}

/// Everything one command produces. `data` is the machine-readable result
/// with exact values; `tables` and `notes` are the human-readable view.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    pub settings: serde_json::Value,
    pub inputs: Vec<InputSummary>,
    pub data: serde_json::Value,
    #[serde(skip)]
    pub tables: Vec<Table>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            tool: "measure-audit",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            generated_at: None,
            settings: serde_json::Value::Null,
            inputs: Vec::new(),
            data: serde_json::Value::Null,
            tables: Vec::new(),
            notes: Vec::new(),
        }
    }
}

pub fn render(report: &Report, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        OutputFormat::Markdown => markdown(report),
        OutputFormat::Csv => csv_tables(&report.tables),
    }
}

fn cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

fn markdown_table(out: &mut String, columns: &[String], rows: &[Vec<String>]) {
    let line = |cells: &[String]| {
        format!(
            "| {} |\n",
            cells.iter().map(|c| cell(c)).collect::<Vec<_>>().join(" | ")
        )
    };
    out.push_str(&line(columns));
    out.push_str(&format!("|{}\n", "---|".repeat(columns.len())));
    for r in rows {
        out.push_str(&line(r));
    }
}

fn markdown(report: &Report) -> String {
    let mut out = format!("# {} {}\n\n", report.tool, report.command);
    if let Some(t) = &report.generated_at {
        out.push_str(&format!("Generated {t}\n\n"));
    }
    if !report.inputs.is_empty() {
        out.push_str("## Inputs\n\n");
        let columns: Vec<String> = ["name", "path", "format", "classes", "labels"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let rows: Vec<Vec<String>> = report
            .inputs
            .iter()
            .map(|i| {
                let mapping = i
                    .alphabet
                    .iter()
                    .enumerate()
                    .map(|(k, l)| {
                        if *l == k.to_string() {
                            l.clone()
                        } else {
                            format!("{l}={k}")
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(", ");
                vec![
                    i.name.clone(),
                    i.path.clone(),
                    i.format.to_string(),
                    i.classes.to_string(),
                    mapping,
                ]
            })
            .collect();
        markdown_table(&mut out, &columns, &rows);
        out.push('\n');
    }
    for t in &report.tables {
        out.push_str(&format!("## {}\n\n", t.title));
        markdown_table(&mut out, &t.columns, &t.rows);
        out.push('\n');
    }
    for n in &report.notes {
        out.push_str(n);
        out.push_str("\n\n");
    }
    while out.ends_with("\n\n") {
        out.pop();
    }
    out
}

fn csv_tables(tables: &[Table]) -> String {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    for (i, t) in tables.iter().enumerate() {
        if tables.len() > 1 {
            if i > 0 {
                w.write_record([""]).expect("in-memory write");
            }
            w.write_record([t.title.as_str()]).expect("in-memory write");
        }
        w.write_record(&t.columns).expect("in-memory write");
        for r in &t.rows {
            w.write_record(r).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("eval");
        let mut t = Table::new("Values", vec!["measure".into(), "value".into()]);
        t.rows.push(vec!["Acc".into(), "1/2".into()]);
        t.rows.push(vec!["1{TP|TN}".into(), "0".into()]);
        r.tables.push(t);
        r
    }

    #[test]
    fn markdown_escapes_pipes() {
        let s = render(&sample(), OutputFormat::Markdown);
        assert!(s.contains("| 1{TP\\|TN} | 0 |"));
        assert!(s.starts_with("# measure-audit eval\n"));
    }

    #[test]
    fn single_csv_table_has_no_title_row() {
        let s = render(&sample(), OutputFormat::Csv);
        assert_eq!(s, "measure,value\nAcc,1/2\n1{TP|TN},0\n");
    }
}
