use serde::Serialize;
use serde_json::Value;

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `value < tolerance`
    Below,
    /// `value <= tolerance`
    AtMost,
    /// `value >= tolerance`
    AtLeast,
    /// `|value - target| < tolerance`
    Near,
}

#[derive(Serialize, Debug, Clone)]
pub struct Verdict {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Verdict {
    fn new(
        name: &str,
        value: f64,
        target: Option<f64>,
        tolerance: f64,
        relation: Relation,
    ) -> Self {
        let pass = match relation {
            Relation::Below => value < tolerance,
            Relation::AtMost => value <= tolerance,
            Relation::AtLeast => value >= tolerance,
            Relation::Near => (value - target.unwrap_or(0.0)).abs() < tolerance,
        };
        Self {
            name: name.into(),
            value,
            target,
            tolerance,
            relation,
            pass,
        }
    }
}

#[derive(Serialize, Debug, Clone)]
pub struct Scalar {
    pub name: String,
    pub value: Value,
}

#[derive(Serialize, Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Serialize, Debug, Clone)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub config: RunConfig,
    pub scalars: Vec<Scalar>,
    pub tables: Vec<Table>,
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_seconds: Option<f64>,
}

impl Report {
    pub fn new(config: &RunConfig) -> Self {
        Self {
            command: config.command.name().into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            scalars: Vec::new(),
            tables: Vec::new(),
            verdicts: Vec::new(),
            pass: true,
            duration_seconds: None,
        }
    }

    pub fn scalar(&mut self, name: &str, value: impl Into<Value>) {
        self.scalars.push(Scalar {
            name: name.into(),
            value: value.into(),
        });
    }

    pub fn table(&mut self, table: Table) {
        self.tables.push(table);
    }

    fn verdict(&mut self, v: Verdict) {
        self.pass &= v.pass;
        self.verdicts.push(v);
    }

    pub fn below(&mut self, name: &str, value: f64, tolerance: f64) {
        self.verdict(Verdict::new(name, value, None, tolerance, Relation::Below));
    }

    pub fn at_most(&mut self, name: &str, value: f64, tolerance: f64) {
        self.verdict(Verdict::new(name, value, None, tolerance, Relation::AtMost));
    }

    pub fn at_least(&mut self, name: &str, value: f64, tolerance: f64) {
        self.verdict(Verdict::new(
            name,
            value,
            None,
            tolerance,
            Relation::AtLeast,
        ));
    }

    pub fn near(&mut self, name: &str, value: f64, target: f64, tolerance: f64) {
        self.verdict(Verdict::new(
            name,
            value,
            Some(target),
            tolerance,
            Relation::Near,
        ));
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "nan".into(),
        other => other.to_string(),
    }
}

fn csv_block(
    out: &mut Vec<u8>,
    name: &str,
    columns: &[String],
    rows: &[Vec<String>],
    header: bool,
) -> CliResult<()> {
    if header {
        out.extend_from_slice(format!("# {name}\n").as_bytes());
    }
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    let failed = |e: csv::Error| CliError::Numerical(format!("CSV encoding failed: {e}"));
    writer.write_record(columns).map_err(failed)?;
    for row in rows {
        writer.write_record(row).map_err(failed)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Numerical(format!("CSV encoding failed: {e}")))?;
    out.extend_from_slice(&bytes);
    Ok(())
}

fn csv_document(report: &Report, only: Option<&str>) -> CliResult<Vec<u8>> {
    let mut out = Vec::new();
    if let Some(name) = only {
        let table = report
            .tables
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| CliError::usage(format!("report has no table named {name:?}")))?;
        let rows: Vec<Vec<String>> = table
            .rows
            .iter()
            .map(|r| r.iter().map(cell).collect())
            .collect();
        csv_block(&mut out, name, &table.columns, &rows, false)?;
        return Ok(out);
    }
    let scalars: Vec<Vec<String>> = report
        .scalars
        .iter()
        .map(|s| vec![s.name.clone(), cell(&s.value)])
        .collect();
    csv_block(
        &mut out,
        "scalars",
        &["name".into(), "value".into()],
        &scalars,
        true,
    )?;
    for table in &report.tables {
        out.push(b'\n');
        let rows: Vec<Vec<String>> = table
            .rows
            .iter()
            .map(|r| r.iter().map(cell).collect())
            .collect();
        csv_block(&mut out, &table.name, &table.columns, &rows, true)?;
    }
    out.push(b'\n');
    let verdicts: Vec<Vec<String>> = report
        .verdicts
        .iter()
        .map(|v| {
            vec![
                v.name.clone(),
                v.value.to_string(),
                v.target.map_or_else(String::new, |t| t.to_string()),
                v.tolerance.to_string(),
                serde_json::to_value(v.relation)
                    .map(|r| cell(&r))
                    .unwrap_or_default(),
                v.pass.to_string(),
            ]
        })
        .collect();
    let columns = ["name", "value", "target", "tolerance", "relation", "pass"].map(String::from);
    csv_block(&mut out, "verdicts", &columns, &verdicts, true)?;
    Ok(out)
}

/// Serializes the report. Identical reports give identical bytes.
pub fn emit(report: &Report, format: Format, table: Option<&str>) -> CliResult<Vec<u8>> {
    match format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(report)
                .map_err(|e| CliError::Numerical(format!("JSON encoding failed: {e}")))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => csv_document(report, table),
    }
}
