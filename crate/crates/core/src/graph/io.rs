//! Whitespace edge-list files: one `u v` pair per line, `#` comments, and an
//! optional `# vertices N` header.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Graph, VertexId};
use crate::error::{Error, Result};

pub fn parse_edge_list(text: &str, undirected: bool, origin: &Path) -> Result<Graph> {
    let mut declared: Option<usize> = None;
    let mut edges = Vec::new();
    let mut max_id: Option<VertexId> = None;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next() == Some("vertices") {
                let n = words
                    .next()
                    .and_then(|w| w.parse::<usize>().ok())
                    .ok_or_else(|| parse_err(lineno, "malformed `# vertices N` header".into()))?;
                declared = Some(n);
            }
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(lineno, format!("expected `u v`, got {line:?}")));
        };
        let parse_id = |s: &str| {
            s.parse::<VertexId>()
                .map_err(|e| parse_err(lineno, format!("bad vertex id {s:?}: {e}")))
        };
        let (u, v) = (parse_id(a)?, parse_id(b)?);
        max_id = max_id.max(Some(u.max(v)));
        edges.push((u, v));
    }
    let n = match (declared, max_id) {
        (Some(n), Some(m)) if (m as usize) >= n => {
            return Err(parse_err(0, format!("vertex id {m} exceeds declared count {n}")));
        }
        (Some(n), _) => n,
        (None, Some(m)) => m as usize + 1,
        (None, None) => 0,
    };
    Graph::build(&edges, n, undirected)
}

pub fn load_edge_list(path: impl AsRef<Path>, undirected: bool) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, undirected, path)
}

/// Serializes `g` so that loading it with the same orientation mode yields
/// identical CSR arrays. Undirected pairs are written once with `u < v`.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::with_capacity(g.num_edges() * 12);
    let _ = writeln!(out, "# vertices {}", g.num_vertices());
    if g.is_undirected() {
        for u in g.vertices() {
            for &v in g.neighbors(u).iter().filter(|&&v| v > u) {
                let _ = writeln!(out, "{u} {v}");
            }
        }
    } else {
        for (v, u) in g.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
    }
    out
}

pub fn save_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_edge_list(g)).map_err(|e| Error::io(path, e))
}
