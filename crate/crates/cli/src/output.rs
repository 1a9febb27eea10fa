//! Deterministic tables: fixed column order, floats with 17 significant
//! digits in scientific notation, no locale.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::pipeline::RunResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Pretty JSON whose floats use the table format; non-finite floats
/// become null.
struct Fixed17<'a>(PrettyFormatter<'a>);

impl Formatter for Fixed17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(io::Error::other)?;
    buf.push(b'\n');
    Ok(buf)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    B(bool),
    S(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::I(i) => i.to_string(),
            Cell::B(b) => b.to_string(),
            Cell::S(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::S(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::F(x) => s.serialize_f64(*x),
            Cell::I(i) => s.serialize_i64(*i),
            Cell::B(b) => s.serialize_bool(*b),
            Cell::S(v) => s.serialize_str(v),
            Cell::Empty => s.serialize_none(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Cell {
        Cell::F(x)
    }
}
impl From<bool> for Cell {
    fn from(b: bool) -> Cell {
        Cell::B(b)
    }
}
impl From<&str> for Cell {
    fn from(s: &str) -> Cell {
        Cell::S(s.to_string())
    }
}
impl From<String> for Cell {
    fn from(s: String) -> Cell {
        Cell::S(s)
    }
}
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(o: Option<T>) -> Cell {
        o.map_or(Cell::Empty, Into::into)
    }
}
impl From<u64> for Cell {
    fn from(i: u64) -> Cell {
        Cell::I(i as i64)
    }
}
impl From<u32> for Cell {
    fn from(i: u32) -> Cell {
        Cell::I(i as i64)
    }
}
impl From<usize> for Cell {
    fn from(i: usize) -> Cell {
        Cell::I(i as i64)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Table {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out.into_bytes()
    }

    pub fn to_json(&self) -> io::Result<Vec<u8>> {
        let objs: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .map(|row| {
                self.columns
                    .iter()
                    .zip(row)
                    .map(|(k, v)| (k.clone(), serde_json::to_value(v).unwrap_or(serde_json::Value::Null)))
                    .collect()
            })
            .collect();
        to_json(&objs)
    }

    pub fn encode(&self, format: Format) -> io::Result<Vec<u8>> {
        match format {
            Format::Csv => Ok(self.to_csv()),
            Format::Json => self.to_json(),
        }
    }
}

/// One flat row per result; swept values lead after the point index.
pub fn results_table(results: &[RunResult]) -> Table {
    let mut columns: Vec<String> = vec!["scenario".into(), "point".into()];
    if let Some(first) = results.first() {
        columns.extend(first.assignments.iter().map(|(k, _)| format!("sweep_{k}")));
    }
    let fixed = [
        "seed", "version", "scenario_hash", "m", "sigma_l", "sigma_r", "tau", "c", "k", "z", "beta_l", "beta_r",
        "tech_l", "x_l", "tech_r", "x_r", "q_l", "q_r", "c0", "c_tau", "c_star", "c_hat_bar", "kbeta_bar", "c_bar",
        "c_bar_valid", "zeta", "zeta_in_range", "x_star", "advertise", "x_residual", "regime", "own_side_dominated",
        "sigma_star", "selection_x", "selection_regime", "selection_residual", "vote_share_l", "win_prob_l",
    ];
    columns.extend(fixed.iter().map(|s| s.to_string()));
    for st in ["mm", "me", "em", "ee"] {
        columns.push(format!("vote_share_{st}"));
        columns.push(format!("win_prob_{st}"));
    }
    let sim_cols = [
        "sim_trials", "sim_vote_share", "sim_vote_share_se", "closed_vote_share", "sim_win_prob", "sim_win_prob_se",
        "closed_win_prob", "sim_majority_win", "sim_majority_win_se", "all_pass", "failed",
    ];
    columns.extend(sim_cols.iter().map(|s| s.to_string()));
    let mut table = Table { columns, rows: Vec::new() };
    for r in results {
        let a = &r.analytic;
        let p = &r.params;
        let mut row: Vec<Cell> = vec![r.scenario.clone().into(), r.point.into()];
        row.extend(r.assignments.iter().map(|(_, v)| Cell::F(*v)));
        row.extend([
            r.provenance.seed.into(),
            r.provenance.version.into(),
            r.provenance.scenario_hash.clone().into(),
            p.m.into(),
            p.sigma_l.into(),
            p.sigma_r.into(),
            p.tau.into(),
            p.c.into(),
            p.k.into(),
            p.z.into(),
            p.beta_l.into(),
            p.beta_r.into(),
            r.profile.left.moderate.technology.name().into(),
            r.profile.left.moderate.intensity.into(),
            r.profile.right.moderate.technology.name().into(),
            r.profile.right.moderate.intensity.into(),
            a.q_l.into(),
            a.q_r.into(),
            a.c0.into(),
            a.c_tau.into(),
            a.c_star.into(),
            a.c_hat_bar.into(),
            a.kbeta_bar.into(),
            a.c_bar.into(),
            a.c_bar_valid.into(),
            a.zeta.into(),
            a.zeta_in_range.into(),
            a.x_star.into(),
            a.advertise.into(),
            a.x_residual.into(),
            a.regime.into(),
            a.own_side_dominated.into(),
            a.sigma_star.into(),
            a.selection_x.into(),
            a.selection_regime.into(),
            a.selection_residual.into(),
            a.vote_share_l.into(),
            a.win_prob_l.into(),
        ]);
        for s in &a.per_state {
            row.push(s.vote_share_l.into());
            row.push(s.win_prob_l.into());
        }
        match &r.simulation {
            Some(sim) => row.extend([
                sim.vote_share.n.into(),
                sim.vote_share.mean.into(),
                sim.vote_share.std_error.into(),
                sim.closed_vote_share.into(),
                sim.win_prob.mean.into(),
                sim.win_prob.std_error.into(),
                sim.closed_win_prob.into(),
                sim.majority_win.mean.into(),
                sim.majority_win.std_error.into(),
            ]),
            None => row.extend(std::iter::repeat_n(Cell::Empty, 9)),
        }
        row.push(r.all_pass().into());
        row.push(r.failed().join(";").into());
        table.push(row);
    }
    table
}

pub fn encode_results(results: &[RunResult], format: Format) -> io::Result<Vec<u8>> {
    match format {
        Format::Csv => Ok(results_table(results).to_csv()),
        Format::Json => to_json(&results),
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.54), "5.4000000000000004e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn json_floats_fixed() {
        let bytes = to_json(&vec![0.5, f64::INFINITY]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.contains("5.0000000000000000e-1"));
        assert!(text.contains("null"));
        let back: Vec<Option<f64>> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vec![Some(0.5), None]);
    }

    #[test]
    fn csv_quoting() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x,y".into(), Cell::Empty]);
        assert_eq!(String::from_utf8(t.to_csv()).unwrap(), "a,b\n\"x,y\",\n");
    }
}
