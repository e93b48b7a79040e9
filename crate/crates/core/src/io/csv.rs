use std::io::{BufRead, Write};

use crate::units::UNITS_NOTE;

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("IO_ERROR: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV_ERROR: {0}")]
    Csv(#[from] csv::Error),
    #[error("CSV_ERROR: no column `{0}`")]
    NoColumn(String),
    #[error("CSV_ERROR: row {row}, column `{column}`: cannot parse `{value}` as a number")]
    NotANumber { row: usize, column: String, value: String },
}

impl CsvError {
    pub fn code(&self) -> &'static str {
        match self {
            CsvError::Io(_) => "IO_ERROR",
            _ => "CSV_ERROR",
        }
    }
}

/// Full-precision decimal: 17 significant digits, exact on re-read.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// A cell of an output row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Cell::Int(i)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Comment block written above the column header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvHeader {
    pub command: String,
    pub config_echo: String,
    pub channel_order: Vec<String>,
    /// Extra `key: value` lines, e.g. summaries.
    pub notes: Vec<String>,
}

impl CsvHeader {
    fn lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("tool: lpdos {}", env!("CARGO_PKG_VERSION")),
            format!("command: {}", self.command),
            format!("channel order: {}", self.channel_order.join(" ")),
            format!("units: {UNITS_NOTE}"),
        ];
        out.extend(self.notes.iter().cloned());
        out.push("config:".to_string());
        out.extend(self.config_echo.lines().map(|l| format!("  {l}")));
        out
    }
}

pub fn write_csv<W: Write>(
    mut out: W,
    header: &CsvHeader,
    columns: &[&str],
    rows: &[Vec<Cell>],
) -> Result<(), CsvError> {
    for line in header.lines() {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(columns)?;
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.flush()?;
    Ok(())
}

/// A CSV file as written by [`write_csv`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    /// Comment lines without the leading `# `.
    pub header: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn column_index(&self, name: &str) -> Result<usize, CsvError> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| CsvError::NoColumn(name.to_string()))
    }

    pub fn text(&self, name: &str) -> Result<Vec<String>, CsvError> {
        let i = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[i].clone()).collect())
    }

    pub fn numbers(&self, name: &str) -> Result<Vec<f64>, CsvError> {
        let i = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(k, r)| {
                r[i].parse::<f64>().map_err(|_| CsvError::NotANumber {
                    row: k,
                    column: name.to_string(),
                    value: r[i].clone(),
                })
            })
            .collect()
    }

    /// Value of a `key: value` header line.
    pub fn header_value(&self, key: &str) -> Option<&str> {
        let prefix = format!("{key}: ");
        self.header.iter().find_map(|l| l.strip_prefix(prefix.as_str()))
    }
}

pub fn read_csv<R: BufRead>(input: R) -> Result<CsvTable, CsvError> {
    let mut header = Vec::new();
    let mut body = String::new();
    for line in input.lines() {
        let line = line?;
        match line.strip_prefix('#') {
            Some(c) if body.is_empty() => header.push(c.strip_prefix(' ').unwrap_or(c).to_string()),
            _ => {
                body.push_str(&line);
                body.push('\n');
            }
        }
    }
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let columns = r.headers()?.iter().map(str::to_string).collect();
    let rows = r.records().map(|rec| rec.map(|r| r.iter().map(str::to_string).collect())).collect::<Result<_, _>>()?;
    Ok(CsvTable { header, columns, rows })
}
