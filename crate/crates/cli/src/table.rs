//! Tabular reports: a manifest of `key=value` lines followed by one or more
//! named tables. CSV is the canonical form and parses back losslessly when
//! floats are written at full precision.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::CliError;

const TABLE_MARKER: &str = "table:";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    /// Not applicable for this row (printed as `---` in markdown).
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// How floats are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Scientific notation with this many significant digits.
    Digits(usize),
    /// Shortest representation that parses back to the same value.
    Full,
}

impl Default for Precision {
    fn default() -> Self {
        Precision::Digits(3)
    }
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("full") {
            return Ok(Precision::Full);
        }
        match s.parse::<usize>() {
            Ok(d) if (1..=17).contains(&d) => Ok(Precision::Digits(d)),
            _ => Err(format!("precision must be 1..=17 or 'full', got '{s}'")),
        }
    }
}

impl Cell {
    pub fn render(&self, precision: Precision) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v, precision),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    /// Inverse of `render`: integers, then floats, otherwise text.
    pub fn parse(field: &str) -> Cell {
        if field.is_empty() {
            return Cell::Empty;
        }
        if let Ok(v) = field.parse::<i64>() {
            return Cell::Int(v);
        }
        if looks_numeric(field) {
            if let Ok(v) = field.parse::<f64>() {
                return Cell::Float(v);
            }
        }
        Cell::Text(field.to_string())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Float(v) => Some(*v),
            _ => None,
        }
    }
}

fn looks_numeric(field: &str) -> bool {
    matches!(field, "NaN" | "inf" | "-inf")
        || field
            .trim_start_matches(['-', '+'])
            .starts_with(|c: char| c.is_ascii_digit() || c == '.')
}

fn format_float(v: f64, precision: Precision) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    match precision {
        // Debug keeps a decimal point or exponent, so the cell reads back as a float
        Precision::Full => format!("{v:?}"),
        Precision::Digits(d) => format!("{:.*e}", d.saturating_sub(1), v),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_headers(name: &str, headers: Vec<String>) -> Self {
        Self {
            name: name.to_string(),
            headers,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.headers.len(), "row width does not match headers");
        self.rows.push(row);
    }

    pub fn column(&self, header: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == header)
    }

    pub fn cell(&self, row: usize, header: &str) -> Option<&Cell> {
        self.column(header).and_then(|c| self.rows.get(row).map(|r| &r[c]))
    }
}

/// Manifest plus tables, as written by every subcommand.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub manifest: Vec<(String, String)>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn manifest_value(&self, key: &str) -> Option<&str> {
        self.manifest.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_csv(&self, precision: Precision) -> Result<String, CliError> {
        let mut out = String::new();
        for (k, v) in &self.manifest {
            writeln!(out, "# {k}={v}").unwrap();
        }
        for table in &self.tables {
            out.push('\n');
            writeln!(out, "# {TABLE_MARKER} {}", table.name).unwrap();
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(&table.headers)?;
            for row in &table.rows {
                w.write_record(row.iter().map(|c| c.render(precision)))?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Format(e.to_string()))?;
            out.push_str(&String::from_utf8(bytes).map_err(|e| CliError::Format(e.to_string()))?);
        }
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Report, CliError> {
        let mut report = Report::default();
        let mut sections: Vec<(String, String)> = Vec::new();
        for line in text.lines() {
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if let Some(name) = comment.strip_prefix(TABLE_MARKER) {
                    sections.push((name.trim().to_string(), String::new()));
                } else if sections.is_empty() {
                    let (k, v) = comment
                        .split_once('=')
                        .ok_or_else(|| CliError::Format(format!("manifest line without '=': '{line}'")))?;
                    report.manifest.push((k.to_string(), v.to_string()));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (_, body) = sections
                .last_mut()
                .ok_or_else(|| CliError::Format(format!("data before any table marker: '{line}'")))?;
            body.push_str(line);
            body.push('\n');
        }
        for (name, body) in sections {
            let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
            let headers = rdr.headers()?.iter().map(str::to_string).collect();
            let mut table = Table::with_headers(&name, headers);
            for record in rdr.records() {
                table.rows.push(record?.iter().map(Cell::parse).collect());
            }
            report.tables.push(table);
        }
        Ok(report)
    }

    pub fn to_markdown(&self, precision: Precision) -> String {
        let mut out = String::new();
        for (k, v) in &self.manifest {
            writeln!(out, "> {k}={v}  ").unwrap();
        }
        for table in &self.tables {
            writeln!(out, "\n### {}\n", table.name).unwrap();
            writeln!(out, "| {} |", table.headers.join(" | ")).unwrap();
            writeln!(out, "|{}", "---|".repeat(table.headers.len())).unwrap();
            for row in &table.rows {
                let cells: Vec<String> = row
                    .iter()
                    .map(|c| match c {
                        Cell::Empty => "---".to_string(),
                        c => c.render(precision),
                    })
                    .collect();
                writeln!(out, "| {} |", cells.join(" | ")).unwrap();
            }
        }
        out
    }
}
