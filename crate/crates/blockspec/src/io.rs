//! Text formats for parameters, graphs, labels, embeddings, and tables.
//!
//! * Parameters: TOML with keys `k` (alias `K`), `rho`, `modalities` (list of
//!   row-major matrices), `directed`. Matrices can also be read from plain
//!   text, one whitespace-separated row per line.
//! * Graphs: an edge-list format (`header: n S directed`, then one
//!   `modality i j` line per edge, vertices 0-based, undirected edges listed
//!   once with `i < j`) and a dense 0/1 matrix format (same header, then `n`
//!   rows per modality, modalities separated by a blank line).
//! * Labels: one 0-based integer per line.
//! * Tables: comma-separated with a header row; floating point values are
//!   printed in shortest round-trip form.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::diagnostics::BoundReport;
use crate::model::SbmParams;
use crate::sampler::GraphSample;
use crate::selection::SelectionTrace;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Parameters

#[derive(Debug, Serialize, Deserialize)]
struct ParamsFile {
    #[serde(alias = "K")]
    k: usize,
    rho: Vec<f64>,
    directed: bool,
    /// Inline row-major matrices, or paths to plain-text matrix files.
    modalities: Vec<toml::Value>,
}

impl ParamsFile {
    fn into_params(self, base_dir: Option<&Path>) -> Result<SbmParams> {
        if self.k != self.rho.len() {
            return Err(Error::Config(format!(
                "k = {} disagrees with rho of length {}",
                self.k,
                self.rho.len()
            )));
        }
        let modalities = self
            .modalities
            .into_iter()
            .map(|entry| modality_from_value(entry, base_dir))
            .collect::<Result<Vec<_>>>()?;
        SbmParams::new(self.rho, modalities, self.directed)
    }
}

fn modality_from_value(value: toml::Value, base_dir: Option<&Path>) -> Result<Array2<f64>> {
    match value {
        toml::Value::String(path) => {
            let Some(base) = base_dir else {
                return Err(Error::Config(
                    "matrix file references need a parameters file on disk".into(),
                ));
            };
            load_matrix_text(base.join(path))
        }
        other => {
            let rows: Vec<Vec<f64>> =
                other.try_into().map_err(|e| Error::Parse(e.to_string()))?;
            matrix_from_rows(&rows)
        }
    }
}

/// Parses model parameters from TOML text with inline matrices.
pub fn parse_params_toml(text: &str) -> Result<SbmParams> {
    let file: ParamsFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_params(None)
}

/// Loads model parameters from a TOML file. Modalities may be inline
/// row-major matrices or paths (relative to the file) of plain-text
/// whitespace-separated matrices.
pub fn load_params(path: impl AsRef<Path>) -> Result<SbmParams> {
    let path = path.as_ref();
    let file: ParamsFile = toml::from_str(&fs::read_to_string(path)?)
        .map_err(|e| Error::Parse(e.to_string()))?;
    file.into_params(Some(path.parent().unwrap_or(Path::new("."))))
}

/// Renders model parameters as TOML with inline matrices.
pub fn params_to_toml(params: &SbmParams) -> String {
    let matrix_value = |m: &Array2<f64>| {
        toml::Value::Array(
            m.rows()
                .into_iter()
                .map(|r| {
                    toml::Value::Array(r.iter().map(|&x| toml::Value::Float(x)).collect())
                })
                .collect(),
        )
    };
    let file = ParamsFile {
        k: params.k(),
        rho: params.rho().to_vec(),
        directed: params.directed(),
        modalities: params.modalities().iter().map(matrix_value).collect(),
    };
    toml::to_string(&file).expect("parameters serialize to TOML")
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Array2<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    let mut m = Array2::<f64>::zeros((r, c));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            m[[i, j]] = v;
        }
    }
    Ok(m)
}

/// Parses a plain-text matrix: one row per line, whitespace separators.
pub fn parse_matrix_text(text: &str) -> Result<Array2<f64>> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            line.split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad number '{tok}': {e}")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    if rows.is_empty() {
        return Err(Error::EmptyInput("matrix text has no rows".into()));
    }
    matrix_from_rows(&rows)
}

/// Loads a plain-text matrix from a file.
pub fn load_matrix_text(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    parse_matrix_text(&fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Graphs

/// Adjacency matrices read from a graph file (memberships live separately).
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedGraph {
    pub adjacency: Vec<Array2<u8>>,
    pub directed: bool,
}

impl LoadedGraph {
    pub fn n(&self) -> usize {
        self.adjacency.first().map_or(0, Array2::nrows)
    }

    pub fn adjacency_f64(&self, s: usize) -> Array2<f64> {
        self.adjacency[s].mapv(f64::from)
    }
}

impl From<&GraphSample> for LoadedGraph {
    fn from(sample: &GraphSample) -> Self {
        Self {
            adjacency: (0..sample.num_modalities())
                .map(|s| sample.adjacency(s).clone())
                .collect(),
            directed: sample.directed(),
        }
    }
}

/// Writes the edge-list format.
pub fn write_graph_edges(w: &mut impl Write, graph: &LoadedGraph) -> Result<()> {
    let n = graph.n();
    writeln!(w, "{} {} {}", n, graph.adjacency.len(), u8::from(graph.directed))?;
    for (s, a) in graph.adjacency.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                if a[[i, j]] != 0 && (graph.directed || i < j) {
                    writeln!(w, "{s} {i} {j}")?;
                }
            }
        }
    }
    Ok(())
}

/// Parses the edge-list format.
pub fn parse_graph_edges(text: &str) -> Result<LoadedGraph> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::EmptyInput("missing graph header".into()))?;
    let (n, s_count, directed) = parse_header(header)?;
    let mut adjacency = vec![Array2::<u8>::zeros((n, n)); s_count];
    for line in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("bad edge line '{line}'")));
        }
        let s: usize = parse_field(fields[0])?;
        let i: usize = parse_field(fields[1])?;
        let j: usize = parse_field(fields[2])?;
        if s >= s_count || i >= n || j >= n {
            return Err(Error::Parse(format!("edge '{line}' out of range")));
        }
        if i == j {
            return Err(Error::Parse(format!("self-loop '{line}' is not allowed")));
        }
        adjacency[s][[i, j]] = 1;
        if !directed {
            adjacency[s][[j, i]] = 1;
        }
    }
    Ok(LoadedGraph {
        adjacency,
        directed,
    })
}

/// Writes the dense 0/1 matrix format.
pub fn write_graph_dense(w: &mut impl Write, graph: &LoadedGraph) -> Result<()> {
    let n = graph.n();
    writeln!(w, "{} {} {}", n, graph.adjacency.len(), u8::from(graph.directed))?;
    for (s, a) in graph.adjacency.iter().enumerate() {
        if s > 0 {
            writeln!(w)?;
        }
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| a[[i, j]].to_string()).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
    }
    Ok(())
}

/// Parses the dense 0/1 matrix format.
pub fn parse_graph_dense(text: &str) -> Result<LoadedGraph> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::EmptyInput("missing graph header".into()))?;
    let (n, s_count, directed) = parse_header(header)?;
    let mut adjacency = Vec::with_capacity(s_count);
    for s in 0..s_count {
        let mut a = Array2::<u8>::zeros((n, n));
        for i in 0..n {
            let line = lines.next().ok_or_else(|| {
                Error::Parse(format!("modality {s}: expected {n} rows, got {i}"))
            })?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != n {
                return Err(Error::Parse(format!(
                    "modality {s} row {i}: expected {n} entries, got {}",
                    fields.len()
                )));
            }
            for (j, tok) in fields.iter().enumerate() {
                match *tok {
                    "0" => {}
                    "1" => a[[i, j]] = 1,
                    other => {
                        return Err(Error::Parse(format!("entry '{other}' is not 0/1")));
                    }
                }
            }
        }
        adjacency.push(a);
    }
    Ok(LoadedGraph {
        adjacency,
        directed,
    })
}

fn parse_header(header: &str) -> Result<(usize, usize, bool)> {
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::Parse(format!(
            "graph header must be 'n S directed', got '{header}'"
        )));
    }
    let n: usize = parse_field(fields[0])?;
    let s: usize = parse_field(fields[1])?;
    let directed = match fields[2] {
        "0" => false,
        "1" => true,
        other => return Err(Error::Parse(format!("directed flag '{other}' is not 0/1"))),
    };
    if s == 0 {
        return Err(Error::EmptyInput("graph has no modalities".into()));
    }
    Ok((n, s, directed))
}

fn parse_field<T: std::str::FromStr>(tok: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    tok.parse()
        .map_err(|e| Error::Parse(format!("bad field '{tok}': {e}")))
}

// ---------------------------------------------------------------------------
// Labels

/// Writes a label vector, one 0-based integer per line.
pub fn write_labels(w: &mut impl Write, labels: &[usize]) -> Result<()> {
    for &label in labels {
        writeln!(w, "{label}")?;
    }
    Ok(())
}

/// Parses a label vector.
pub fn parse_labels(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse_field(l.trim()))
        .collect()
}

/// Loads a label vector from a file.
pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    parse_labels(&fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Numeric tables

/// Writes a numeric matrix as a plain text table: one row per line, space
/// separated, shortest round-trip precision, no header.
pub fn write_numeric_table(w: &mut impl Write, m: &Array2<f64>) -> Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[[i, j]])).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

/// Writes a selection trace as CSV.
pub fn write_trace_csv(w: &mut impl Write, trace: &SelectionTrace) -> Result<()> {
    writeln!(w, "k_prime,objective,statistic,min_part,separation")?;
    for row in &trace.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            row.k_prime, row.objective, row.statistic, row.min_part, row.separation
        )?;
    }
    Ok(())
}

/// Writes bound reports as CSV.
pub fn write_bounds_csv(w: &mut impl Write, reports: &[BoundReport]) -> Result<()> {
    writeln!(w, "name,n,lhs,rhs,holds,margin")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.name, r.n, r.lhs, r.rhs, r.holds, r.margin
        )?;
    }
    Ok(())
}

/// Writes any text to a file, creating parent directories.
pub fn write_file(path: impl AsRef<Path>, render: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut buf = Vec::new();
    render(&mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}
