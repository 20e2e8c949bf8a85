//! Text formats: graph specs and edge lists, vertex windows, filtrations and
//! Dirac Gram files.

use std::collections::BTreeSet;
use std::path::Path;

use crate::boundary::Filtration;
use crate::dipole::{BoundaryMode, FiniteSection};
use crate::duality::DiracGram;
use crate::error::{Error, Result};
use crate::graph::{parse_label, VertexId, WeightedGraph};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

/// Splits at commas outside parentheses, brackets and double quotes.
pub fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut quoted = false;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '"' => quoted = !quoted,
            '(' | '[' if !quoted => depth += 1,
            ')' | ']' if !quoted => depth -= 1,
            ',' if !quoted && depth == 0 => {
                parts.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(s[start..].trim());
    parts.retain(|p| !p.is_empty());
    parts
}

/// Splits an edge-list line into tokens; double-quoted labels may contain
/// spaces, `\"` and `\\` escape inside quotes.
fn tokenize(line: &str) -> Result<Vec<String>> {
    let mut tokens = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '"' {
            chars.next();
            let mut t = String::from('"');
            loop {
                match chars.next() {
                    Some('\\') => match chars.next() {
                        Some(e) => t.push(e),
                        None => return Err(Error::Parse(format!("dangling escape in {line:?}"))),
                    },
                    Some('"') => break,
                    Some(ch) => t.push(ch),
                    None => return Err(Error::Parse(format!("unterminated quote in {line:?}"))),
                }
            }
            t.push('"');
            tokens.push(t);
        } else {
            let mut t = String::new();
            while let Some(&ch) = chars.peek() {
                if ch.is_whitespace() {
                    break;
                }
                t.push(ch);
                chars.next();
            }
            tokens.push(t);
        }
    }
    Ok(tokens)
}

/// Parses `<label> <label> <weight>` lines with `#` comments. Without a
/// base label the base point is 0 if present, otherwise the smallest label.
pub fn parse_edge_list(text: &str, base: Option<&str>) -> Result<WeightedGraph> {
    let mut edges = Vec::new();
    let mut labels = BTreeSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let tokens = tokenize(line)?;
        if tokens.len() != 3 {
            return Err(Error::Parse(format!(
                "line {}: expected `<label> <label> <weight>`, got {raw:?}",
                lineno + 1
            )));
        }
        let a = parse_label(&tokens[0])?;
        let b = parse_label(&tokens[1])?;
        let w: f64 = tokens[2].parse().map_err(|_| {
            Error::Parse(format!("line {}: bad weight {:?}", lineno + 1, tokens[2]))
        })?;
        labels.insert(a.clone());
        labels.insert(b.clone());
        edges.push((a, b, w));
    }
    if edges.is_empty() {
        return Err(Error::InvalidGraph("edge list is empty".into()));
    }
    let base = match base {
        Some(s) => parse_label(s)?,
        None if labels.contains(&VertexId::Int(0)) => VertexId::Int(0),
        None => labels.iter().next().expect("nonempty").clone(),
    };
    WeightedGraph::from_edges(edges, base)
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

/// `zchain`, `zd:D`, `geom:R`, `star:K`, `complete:K`, or a path to an edge
/// list. `base` is parsed in the graph's label space.
pub fn parse_graph_spec(spec: &str, base: Option<&str>) -> Result<WeightedGraph> {
    let number = |s: &str| -> Result<usize> {
        s.trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad generator parameter in {spec:?}")))
    };
    let generated = if spec == "zchain" {
        Some(WeightedGraph::zchain())
    } else if let Some(d) = spec.strip_prefix("zd:") {
        Some(WeightedGraph::lattice(number(d)?)?)
    } else if let Some(r) = spec.strip_prefix("geom:") {
        let ratio: f64 = r
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad ratio in {spec:?}")))?;
        Some(WeightedGraph::geometric_chain(ratio)?)
    } else if let Some(k) = spec.strip_prefix("star:") {
        Some(WeightedGraph::star(number(k)?)?)
    } else if let Some(k) = spec.strip_prefix("complete:") {
        Some(WeightedGraph::complete(number(k)?)?)
    } else {
        None
    };
    match generated {
        Some(g) => match base {
            Some(b) => {
                let id = g.parse_vertex(b)?;
                g.with_base(id)
            }
            None => Ok(g),
        },
        None => parse_edge_list(&read(Path::new(spec))?, base),
    }
}

/// Comma-separated vertex labels, e.g. `1,2,3` or `(0,1),(1,1)`.
pub fn parse_window(g: &WeightedGraph, s: &str) -> Result<Vec<VertexId>> {
    let labels: Vec<VertexId> = split_top_level(s)
        .into_iter()
        .map(|t| g.parse_vertex(t))
        .collect::<Result<_>>()?;
    for x in &labels {
        if !g.contains(x) {
            return Err(Error::UnknownVertex(x.clone()));
        }
    }
    Ok(labels)
}

fn json_vertex(g: &WeightedGraph, v: &serde_json::Value) -> Result<VertexId> {
    match v {
        serde_json::Value::String(s) => g.parse_vertex(s),
        other => serde_json::from_value(other.clone())
            .map_err(|e| Error::Parse(format!("bad vertex {other}: {e}"))),
    }
}

/// `box:K` or a path to a JSON list of vertex arrays.
pub fn parse_filtration(g: &WeightedGraph, spec: &str) -> Result<Filtration> {
    if let Some(k) = spec.strip_prefix("box:") {
        let k: usize = k
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad box depth in {spec:?}")))?;
        return Filtration::boxes(g, k);
    }
    filtration_from_json(g, &read(Path::new(spec))?)
}

pub fn filtration_from_json(g: &WeightedGraph, text: &str) -> Result<Filtration> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("filtration JSON: {e}")))?;
    let levels = value
        .as_array()
        .ok_or_else(|| Error::Parse("filtration JSON must be a list of vertex lists".into()))?
        .iter()
        .map(|level| {
            level
                .as_array()
                .ok_or_else(|| Error::Parse("each filtration level must be a list".into()))?
                .iter()
                .map(|v| json_vertex(g, v))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Filtration::from_levels(g, levels)
}

/// JSON list of vertex labels; strings are parsed in the graph's label space.
pub fn vertices_from_json(g: &WeightedGraph, text: &str) -> Result<Vec<VertexId>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("vertex list JSON: {e}")))?;
    value
        .as_array()
        .ok_or_else(|| Error::Parse("expected a JSON list of vertices".into()))?
        .iter()
        .map(|v| json_vertex(g, v))
        .collect()
}

/// `box:K`, `all`, or a path to a JSON list of vertices. Without a spec,
/// finite graphs use the whole graph and infinite ones `box:20`.
pub fn parse_section(
    g: &WeightedGraph,
    spec: Option<&str>,
    mode: BoundaryMode,
) -> Result<FiniteSection> {
    match spec {
        None if g.is_finite() => FiniteSection::whole(g, mode),
        None => FiniteSection::cube(g, DEFAULT_SECTION_RADIUS, mode),
        Some("all") => FiniteSection::whole(g, mode),
        Some(s) => match s.strip_prefix("box:") {
            Some(k) => {
                let k: i64 = k
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad box radius in {s:?}")))?;
                FiniteSection::cube(g, k, mode)
            }
            None => FiniteSection::new(g, vertices_from_json(g, &read(Path::new(s))?)?, mode),
        },
    }
}

/// Radius of the default section on infinite graphs.
pub const DEFAULT_SECTION_RADIUS: i64 = 20;

pub fn dirac_gram_from_json(text: &str) -> Result<DiracGram> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("Dirac Gram JSON: {e}")))
}

pub fn read_dirac_gram(path: &Path) -> Result<DiracGram> {
    dirac_gram_from_json(&read(path)?)
}

pub fn dirac_gram_to_json(gd: &DiracGram) -> String {
    serde_json::to_string(gd).expect("Dirac Gram serializes")
}
