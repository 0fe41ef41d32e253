//! CSV tables and the per-run summary.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

/// A CSV table with a header row; cells are already formatted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// Builds a row from anything displayable.
#[macro_export]
macro_rules! row {
    ($($cell:expr),* $(,)?) => {
        vec![$($cell.to_string()),*]
    };
}

/// Result of one check: a verdict, a one-line summary and its tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: String,
    pub holds: bool,
    pub summary: String,
    /// `(suffix, table)`; the first table is written as `<stem>.csv`, the
    /// others as `<stem>_<suffix>.csv`.
    pub tables: Vec<(String, Table)>,
}

impl CheckOutcome {
    pub fn new(name: &str, holds: bool, summary: impl Into<String>, table: Table) -> Self {
        CheckOutcome {
            name: name.to_string(),
            holds,
            summary: summary.into(),
            tables: vec![(String::new(), table)],
        }
    }

    pub fn failed(name: &str, summary: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.to_string(),
            holds: false,
            summary: summary.into(),
            tables: Vec::new(),
        }
    }

    pub fn with_table(mut self, suffix: &str, table: Table) -> Self {
        self.tables.push((suffix.to_string(), table));
        self
    }

    pub fn status(&self) -> &'static str {
        if self.holds {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

/// Writes `NN_<check>.csv` files and `summary.csv` under `dir`; returns the
/// summary lines also printed to stdout.
pub fn write_outcomes(dir: &Path, outcomes: &[CheckOutcome]) -> io::Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut summary = Table::new(&["index", "check", "holds", "summary", "csv"]);
    let mut lines = Vec::new();
    for (i, o) in outcomes.iter().enumerate() {
        let stem = format!("{:02}_{}", i + 1, o.name);
        let mut files = Vec::new();
        for (suffix, table) in &o.tables {
            let file = if suffix.is_empty() {
                format!("{stem}.csv")
            } else {
                format!("{stem}_{suffix}.csv")
            };
            fs::write(dir.join(&file), table.to_csv())?;
            files.push(file);
        }
        summary.push(row![i + 1, o.name, o.holds, o.summary, files.join(" ")]);
        lines.push(format!("[{}] {:02} {}: {}", o.status(), i + 1, o.name, o.summary));
    }
    fs::write(dir.join("summary.csv"), summary.to_csv())?;
    Ok(lines)
}

pub fn print_lines(out: &mut dyn Write, lines: &[String]) -> io::Result<()> {
    for l in lines {
        writeln!(out, "{l}")?;
    }
    Ok(())
}
