//! Flat CSV input and output.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use sparse_pce::format::format_f64;
use sparse_pce::{ExperimentalDesign, Scenario, ScenarioPose, Wall};

use crate::error::{CliError, CliResult};

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Parsed CSV source that reports errors by physical file line.
struct Source<'a> {
    path: &'a Path,
    reader: csv::Reader<std::io::Cursor<String>>,
    /// File line of each line handed to the parser.
    lines: Vec<u64>,
}

impl<'a> Source<'a> {
    /// Drops `#` comments and blank lines, which the parser would skip
    /// without counting.
    fn open(path: &'a Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let mut kept = String::with_capacity(text.len());
        let mut lines = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('#') {
                kept.push_str(line);
                kept.push('\n');
                lines.push(i as u64 + 1);
            }
        }
        let reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(std::io::Cursor::new(kept));
        Ok(Self { path, reader, lines })
    }

    fn line(&self, parsed: Option<&csv::Position>) -> u64 {
        parsed.map_or(0, |p| self.lines.get(p.line() as usize - 1).copied().unwrap_or(p.line()))
    }

    fn error(&self, e: csv::Error) -> CliError {
        match e.position() {
            Some(pos) => CliError::data(format!("{} line {}: {e}", self.path.display(), self.line(Some(pos)))),
            None => CliError::data(format!("{}: {e}", self.path.display())),
        }
    }

    fn header(&mut self) -> CliResult<Vec<String>> {
        match self.reader.headers() {
            Ok(h) => Ok(h.iter().map(str::to_owned).collect()),
            Err(e) => Err(self.error(e)),
        }
    }

    fn records(&mut self) -> CliResult<Vec<(u64, csv::StringRecord)>> {
        let mut out = Vec::new();
        let mut record = csv::StringRecord::new();
        loop {
            match self.reader.read_record(&mut record) {
                Ok(true) => out.push((self.line(record.position()), record.clone())),
                Ok(false) => return Ok(out),
                Err(e) => return Err(self.error(e)),
            }
        }
    }
}

fn parse_number(path: &Path, line: u64, column: &str, field: &str) -> CliResult<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::data(format!(
            "{} line {line}, column '{column}': '{field}' is not a finite number",
            path.display()
        ))),
    }
}

/// Reads a numeric CSV with a header row; `#` lines are comments.
pub fn read_numeric(path: &Path) -> CliResult<Table> {
    let mut src = Source::open(path)?;
    let header = src.header()?;
    let mut rows = Vec::new();
    for (line, record) in src.records()? {
        let row = record
            .iter()
            .zip(&header)
            .map(|(field, column)| parse_number(path, line, column, field))
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::data(format!("{}: no data rows", path.display())));
    }
    Ok(Table { header, rows })
}

impl Table {
    pub fn matrix(&self, columns: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows.len(), columns, |i, j| self.rows[i][j])
    }

    /// Splits `d` input columns from the trailing response column.
    pub fn design(&self, d: usize, path: &Path) -> CliResult<ExperimentalDesign> {
        if self.header.len() != d + 1 {
            return Err(CliError::data(format!(
                "{}: expected {} input columns and a response, found {} columns",
                path.display(),
                d,
                self.header.len()
            )));
        }
        let y = DVector::from_iterator(self.rows.len(), self.rows.iter().map(|r| r[d]));
        Ok(ExperimentalDesign::new(self.matrix(d), y)?)
    }
}

pub const SCENARIO_COLUMNS: [&str; 8] = ["wall", "xs", "ys", "zs", "xp", "yp", "theta_p", "y"];

/// Reads a scenario CSV (`wall,xs,ys,zs,xp,yp,theta_p,y`, any column order).
pub fn read_scenario(path: &Path) -> CliResult<Scenario> {
    let mut src = Source::open(path)?;
    let header = src.header()?;
    let position = SCENARIO_COLUMNS
        .iter()
        .map(|name| {
            header.iter().position(|h| h == name).ok_or_else(|| {
                CliError::data(format!("{} line 1: missing column '{name}' (have {})", path.display(), header.join(",")))
            })
        })
        .collect::<CliResult<Vec<usize>>>()?;
    let mut scenario = Scenario { poses: Vec::new(), responses: Vec::new() };
    for (line, record) in src.records()? {
        let field = |k: usize| record.get(position[k]).unwrap_or("");
        let wall: Wall = field(0)
            .parse()
            .map_err(|e| CliError::data(format!("{} line {line}, column 'wall': {e}", path.display())))?;
        let mut v = [0.0; 7];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = parse_number(path, line, SCENARIO_COLUMNS[k + 1], field(k + 1))?;
        }
        let pose = ScenarioPose::new([v[0], v[1], v[2]], wall, [v[3], v[4]], v[5])
            .map_err(|e| CliError::data(format!("{} line {line}: {e}", path.display())))?;
        scenario.poses.push(pose);
        scenario.responses.push(v[6]);
    }
    if scenario.poses.is_empty() {
        return Err(CliError::data(format!("{}: no data rows", path.display())));
    }
    Ok(scenario)
}

pub fn write_numeric(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> CliResult<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(|v| format_f64(*v)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

pub fn write_scenario(path: &Path, scenario: &Scenario) -> CliResult<()> {
    let mut out = Vec::new();
    let _ = writeln!(out, "# synthetic SAR-like responses (analytic stand-in, not dosimetry data)");
    let _ = writeln!(out, "{}", SCENARIO_COLUMNS.join(","));
    for (p, y) in scenario.poses.iter().zip(&scenario.responses) {
        let values = [p.source[0], p.source[1], p.source[2], p.person[0], p.person[1], p.theta_p, *y];
        let _ = writeln!(out, "{},{}", p.wall, values.map(format_f64).join(","));
    }
    write_file(path, &out)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}
