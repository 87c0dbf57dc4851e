//! Text formats read and written by the command line.

use std::fmt::Write as _;

use magfit_core::baseline::LogisticParams;
use magfit_core::netstats::{CcdfSeries, Statistic};
use magfit_core::metrics::DistanceReport;
use magfit_core::{
    AffinityMatrix, AttributeTable, BinaryAttributeMatrix, DirectedGraph, MagParams, VariationalPosterior,
};

use crate::error::CliError;

/// Parsed edge list plus what ingestion discarded.
#[derive(Debug)]
pub struct EdgeList {
    pub graph: DirectedGraph,
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Reads `src dst` lines. `#` lines are comments; a leading `# nodes: N` fixes
/// the node count, otherwise it is one past the largest index seen.
pub fn parse_edge_list(text: &str) -> Result<EdgeList, CliError> {
    let mut declared = None;
    let mut edges = Vec::new();
    let mut seen_data = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if !seen_data && declared.is_none() {
                if let Some(n) = comment.trim().strip_prefix("nodes:") {
                    let n = n.trim().parse::<usize>().map_err(|_| {
                        CliError::input(format!("line {}: bad node count `{}`", lineno + 1, n.trim()))
                    })?;
                    declared = Some(n);
                }
            }
            continue;
        }
        seen_data = true;
        let mut parts = line.split_whitespace();
        let mut node = |what: &str| -> Result<usize, CliError> {
            let tok = parts
                .next()
                .ok_or_else(|| CliError::input(format!("line {}: missing {what}", lineno + 1)))?;
            tok.parse()
                .map_err(|_| CliError::input(format!("line {}: bad {what} `{tok}`", lineno + 1)))
        };
        let (s, d) = (node("source")?, node("destination")?);
        if parts.next().is_some() {
            return Err(CliError::input(format!("line {}: expected two fields", lineno + 1)));
        }
        edges.push((s, d));
    }
    let n = match declared {
        Some(n) => n,
        None => edges.iter().map(|&(s, d)| s.max(d) + 1).max().unwrap_or(0),
    };
    let (graph, dropped) = DirectedGraph::from_edges(n, edges)?;
    Ok(EdgeList {
        graph,
        self_loops: dropped.self_loops,
        duplicates: dropped.duplicates,
    })
}

pub fn write_edge_list(graph: &DirectedGraph) -> String {
    let mut out = format!("# nodes: {}\n", graph.n_nodes());
    for (s, d) in graph.edges() {
        let _ = writeln!(out, "{s} {d}");
    }
    out
}

/// Reads a comma-separated table with a header row. Empty cells are missing.
pub fn parse_attribute_table(text: &str) -> Result<AttributeTable, CliError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::input(format!("attribute header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::input(format!("attribute row {}: {e}", r + 1)))?;
        let mut row = Vec::with_capacity(names.len());
        for (c, cell) in record.iter().enumerate() {
            if cell.is_empty() {
                row.push(None);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| {
                CliError::input(format!("attribute row {}, column `{}`: not a number: `{cell}`", r + 1, names[c]))
            })?;
            if !v.is_finite() {
                return Err(CliError::input(format!(
                    "attribute row {}, column `{}`: value must be finite",
                    r + 1,
                    names[c]
                )));
            }
            row.push(Some(v));
        }
        rows.push(row);
    }
    Ok(AttributeTable::new(names, rows)?)
}

pub fn write_attribute_bits(f: &BinaryAttributeMatrix) -> String {
    let header: Vec<String> = (0..f.n_attrs()).map(|l| format!("a{}", l + 1)).collect();
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..f.n_nodes() {
        let row: Vec<String> = f.row(i).iter().map(u8::to_string).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Turns the named columns into bits. A column whose observed values are all 0
/// or 1 is taken as is; any other column is split at its median.
pub fn binarize_columns(table: &AttributeTable, columns: &[String]) -> Result<BinaryAttributeMatrix, CliError> {
    let mut out = BinaryAttributeMatrix::zeros(table.n_nodes(), columns.len());
    for (dst, name) in columns.iter().enumerate() {
        let c = table
            .column_index(name)
            .ok_or_else(|| CliError::input(format!("unknown attribute column `{name}`")))?;
        let values: Vec<Option<f64>> = (0..table.n_nodes()).map(|i| table.get(i, c)).collect();
        if values.iter().flatten().all(|&v| v == 0.0 || v == 1.0) {
            for (i, v) in values.iter().enumerate() {
                out.set(i, dst, *v == Some(1.0));
            }
        } else {
            let bits = magfit_core::binarize_by_median(table, &[name])?;
            for i in 0..table.n_nodes() {
                out.set(i, dst, bits.get(i, 0) == 1);
            }
        }
    }
    Ok(out)
}

/// Resolves a `--fixed` list: names first, then zero-based column indices.
pub fn resolve_columns(table: &AttributeTable, spec: &str) -> Result<Vec<String>, CliError> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|tok| {
            if table.column_index(tok).is_some() {
                return Ok(tok.to_string());
            }
            tok.parse::<usize>()
                .ok()
                .and_then(|c| table.column_names().get(c).cloned())
                .ok_or_else(|| CliError::input(format!("unknown attribute column `{tok}`")))
        })
        .collect()
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_params(params: &MagParams) -> String {
    let mut out = format!("MAGPARAMS 1\nL {}\nmu", params.n_attrs());
    for m in params.mu() {
        out.push(' ');
        out.push_str(&float(*m));
    }
    out.push('\n');
    for (l, th) in params.thetas().iter().enumerate() {
        let [[a, b], [c, d]] = th.entries();
        let _ = writeln!(out, "theta {} {} {} {} {}", l + 1, float(a), float(b), float(c), float(d));
    }
    out
}

pub fn parse_params(text: &str) -> Result<MagParams, CliError> {
    let bad = |msg: String| CliError::input(format!("params file: {msg}"));
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    if lines.next() != Some("MAGPARAMS 1") {
        return Err(bad("first line must be `MAGPARAMS 1`".into()));
    }
    let l: usize = lines
        .next()
        .and_then(|s| s.strip_prefix("L "))
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| bad("expected `L <count>`".into()))?;
    let numbers = |s: &str| -> Result<Vec<f64>, CliError> {
        s.split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| bad(format!("bad number `{t}`"))))
            .collect()
    };
    let mu = numbers(
        lines
            .next()
            .and_then(|s| s.strip_prefix("mu"))
            .ok_or_else(|| bad("expected a `mu` line".into()))?,
    )?;
    if mu.len() != l {
        return Err(bad(format!("expected {l} mu values, found {}", mu.len())));
    }
    let mut thetas = Vec::with_capacity(l);
    for want in 1..=l {
        let line = lines
            .next()
            .and_then(|s| s.strip_prefix("theta"))
            .ok_or_else(|| bad(format!("expected `theta {want}`")))?;
        let mut parts = line.split_whitespace();
        let idx = parts.next().and_then(|t| t.parse::<usize>().ok());
        if idx != Some(want) {
            return Err(bad(format!("expected `theta {want}`")));
        }
        let v = numbers(&parts.collect::<Vec<_>>().join(" "))?;
        if v.len() != 4 {
            return Err(bad(format!("theta {want} needs 4 values")));
        }
        thetas.push(AffinityMatrix::new([[v[0], v[1]], [v[2], v[3]]]).map_err(|e| bad(format!("theta {want}: {e}")))?);
    }
    if let Some(extra) = lines.next() {
        return Err(bad(format!("unexpected line `{extra}`")));
    }
    MagParams::new(mu, thetas).map_err(|e| bad(e.to_string()))
}

pub fn write_posterior(post: &VariationalPosterior) -> String {
    let mut out = String::from("node,attr,phi,mode\n");
    for i in 0..post.n_nodes() {
        for l in 0..post.n_attrs() {
            let mode = if post.is_fixed(l) { "fixed" } else { "latent" };
            let _ = writeln!(out, "{i},{},{},{mode}", l + 1, post.phi(i, l));
        }
    }
    out
}

/// Reads a posterior dump back as its most probable bits (`phi >= 0.5` is 1).
pub fn parse_posterior_bits(text: &str) -> Result<BinaryAttributeMatrix, CliError> {
    let bad = |msg: String| CliError::input(format!("posterior file: {msg}"));
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut entries = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |k: usize| rec.get(k).ok_or_else(|| bad(format!("row {} is short", r + 1)));
        let i: usize = field(0)?.parse().map_err(|_| bad(format!("row {}: bad node", r + 1)))?;
        let l: usize = field(1)?.parse().map_err(|_| bad(format!("row {}: bad attr", r + 1)))?;
        let phi: f64 = field(2)?.parse().map_err(|_| bad(format!("row {}: bad phi", r + 1)))?;
        if l == 0 || !(0.0..=1.0).contains(&phi) {
            return Err(bad(format!("row {}: attr must be >= 1 and phi in [0, 1]", r + 1)));
        }
        entries.push((i, l - 1, phi >= 0.5));
    }
    let n = entries.iter().map(|e| e.0 + 1).max().unwrap_or(0);
    let l = entries.iter().map(|e| e.1 + 1).max().unwrap_or(0);
    if entries.len() != n * l {
        return Err(bad(format!("expected {} rows for {n} nodes and {l} attributes", n * l)));
    }
    let mut bits = BinaryAttributeMatrix::zeros(n, l);
    for &(i, a, b) in &entries {
        bits.set(i, a, b);
    }
    Ok(bits)
}

pub fn write_fit_log(initial: f64, trace: &[f64]) -> String {
    let mut out = String::from("round,lq,delta\n");
    let mut prev = initial;
    for (r, &lq) in trace.iter().enumerate() {
        let _ = writeln!(out, "{},{lq},{}", r + 1, lq - prev);
        prev = lq;
    }
    out
}

pub fn series_file_name(stat: Statistic, label: &str) -> String {
    format!("{}_{label}.csv", stat.name())
}

pub fn write_series(stat: Statistic, series: &CcdfSeries) -> String {
    let mut out = String::from(if stat.is_count() { "x,count\n" } else { "x,value\n" });
    for (x, y) in series.x().iter().zip(series.values()) {
        let _ = writeln!(out, "{x},{y}");
    }
    out
}

pub fn write_report(report: &DistanceReport) -> String {
    let mut out = String::from("statistic,ks,l2\n");
    for row in &report.rows {
        let _ = writeln!(out, "{},{},{}", row.statistic.name(), row.ks, row.l2);
    }
    let _ = writeln!(out, "avg,{},{}", report.avg_ks(), report.avg_l2());
    out
}

pub fn write_scores(rows: &[(&str, f64)]) -> String {
    let mut out = String::from("metric,value\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}

pub fn write_logistic(params: &LogisticParams) -> String {
    let mut out = format!("name,value\nc,{}\n", params.intercept);
    for (l, a) in params.alpha.iter().enumerate() {
        let _ = writeln!(out, "alpha_{},{a}", l + 1);
    }
    for (l, b) in params.beta.iter().enumerate() {
        let _ = writeln!(out, "beta_{},{b}", l + 1);
    }
    out
}
