//! Line-oriented instance dump.
//!
//! ```text
//! gsbm v1 <d> <lambda> <n> <a> <b> <seed>
//! v <id> <coord>... <label>
//! e <u> <v>
//! ```
//!
//! Coordinates are written with 17 significant digits so they reload bit-exact.

use std::io::{BufRead, Write};

use super::{GeometricGraph, Labeling, ModelParams};
use crate::error::{GsbmError, Result};
use crate::geometry::PointSet;
use crate::prob::Prob;

pub fn write_instance<W: Write>(g: &GeometricGraph, mut w: W) -> Result<()> {
    let p = g.params();
    writeln!(w, "gsbm v1 {} {} {} {} {} {}", p.d, p.lambda, p.n, p.a, p.b, g.seed())?;
    for v in 0..g.num_vertices() {
        write!(w, "v {v}")?;
        for x in g.position(v) {
            write!(w, " {x:.16e}")?;
        }
        writeln!(w, " {}", g.truth().get(v))?;
    }
    for (u, v) in g.edges() {
        writeln!(w, "e {u} {v}")?;
    }
    w.flush()?;
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> GsbmError {
    GsbmError::Parse { line, msg: msg.into() }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| parse_err(line, format!("bad {what}")))
}

pub fn read_instance<R: BufRead>(r: R) -> Result<GeometricGraph> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let header = header?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some("gsbm") || tok.next() != Some("v1") {
        return Err(parse_err(1, "expected `gsbm v1` header"));
    }
    let d: usize = field(tok.next(), 1, "dimension")?;
    let lambda: f64 = field(tok.next(), 1, "lambda")?;
    let n: f64 = field(tok.next(), 1, "n")?;
    let a: Prob = field(tok.next(), 1, "a")?;
    let b: Prob = field(tok.next(), 1, "b")?;
    let seed: u64 = field(tok.next(), 1, "seed")?;
    let params = ModelParams::new(lambda, n, a, b, d)?;

    let mut points = PointSet::new(d);
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    let mut coords = vec![0.0; d];
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line?;
        let mut tok = line.split_whitespace();
        match tok.next() {
            None => continue,
            Some("v") => {
                let id: usize = field(tok.next(), lineno, "vertex id")?;
                if id != labels.len() {
                    return Err(parse_err(lineno, "vertex ids must be consecutive from 0"));
                }
                for x in coords.iter_mut() {
                    *x = field(tok.next(), lineno, "coordinate")?;
                }
                let label: i8 = field(tok.next(), lineno, "label")?;
                if label != 1 && label != -1 {
                    return Err(parse_err(lineno, "label must be +1 or -1"));
                }
                points.push(&coords);
                labels.push(label);
            }
            Some("e") => {
                let u: usize = field(tok.next(), lineno, "edge endpoint")?;
                let v: usize = field(tok.next(), lineno, "edge endpoint")?;
                edges.push((u.min(v), u.max(v)));
            }
            Some(other) => return Err(parse_err(lineno, format!("unknown record `{other}`"))),
        }
        if tok.next().is_some() {
            return Err(parse_err(lineno, "trailing fields"));
        }
    }
    GeometricGraph::from_parts(params, seed, points, Labeling::new(labels)?, &edges)
}
