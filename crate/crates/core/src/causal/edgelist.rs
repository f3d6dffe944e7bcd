//! Bracketed edge-list text such as `edges = [['A', 'B'], ...]`.

use std::collections::BTreeSet;

use super::graph::{CausalGraph, GraphKind};
use super::{CausalError, Result};
use crate::datamodel::Catalog;

#[derive(Debug, PartialEq)]
enum Tok {
    Open,
    Close,
    Comma,
    Str(String),
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, message: impl Into<String>) -> CausalError {
        CausalError::Parse { offset: self.pos, message: message.into() }
    }

    fn skip_trivia(&mut self) {
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() {
            match bytes[self.pos] {
                b'#' => {
                    while self.pos < bytes.len() && bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn next(&mut self) -> Result<(usize, Tok)> {
        self.skip_trivia();
        let start = self.pos;
        let Some(c) = self.text[self.pos..].chars().next() else {
            return Err(self.err("unexpected end of input"));
        };
        let tok = match c {
            '[' => Tok::Open,
            ']' => Tok::Close,
            ',' => Tok::Comma,
            '\'' | '"' => {
                self.pos += 1;
                let mut s = String::new();
                let mut chars = self.text[self.pos..].char_indices();
                loop {
                    let Some((off, ch)) = chars.next() else {
                        self.pos = start;
                        return Err(self.err("unterminated string"));
                    };
                    match ch {
                        '\\' => match chars.next() {
                            Some((_, esc)) => s.push(esc),
                            None => {
                                self.pos = start;
                                return Err(self.err("unterminated string"));
                            }
                        },
                        '\n' => {
                            self.pos = start;
                            return Err(self.err("newline in string"));
                        }
                        q if q == c => {
                            self.pos += off + 1;
                            break;
                        }
                        other => s.push(other),
                    }
                }
                return Ok((start, Tok::Str(s)));
            }
            other => return Err(self.err(format!("unexpected character {other:?}"))),
        };
        self.pos += 1;
        Ok((start, tok))
    }
}

/// Finds `name = [` outside comments and returns the offset of the bracket.
fn find_block(text: &str, name: &str) -> Option<usize> {
    let mut line_start = 0;
    for line in text.split_inclusive('\n') {
        let code = line.split('#').next().unwrap_or("");
        let mut search = 0;
        while let Some(hit) = code[search..].find(name) {
            let at = search + hit;
            search = at + name.len();
            let before_ok = code[..at].chars().next_back().is_none_or(|c| !(c.is_alphanumeric() || c == '_'));
            let rest = code[at + name.len()..].trim_start();
            if before_ok {
                if let Some(after_eq) = rest.strip_prefix('=') {
                    if after_eq.trim_start().starts_with('[') {
                        let bracket = code.len() - after_eq.trim_start().len();
                        return Some(line_start + bracket);
                    }
                }
            }
        }
        line_start += line.len();
    }
    None
}

fn parse_string_list(lx: &mut Lexer<'_>) -> Result<Vec<String>> {
    let mut items = Vec::new();
    loop {
        match lx.next()? {
            (_, Tok::Close) => return Ok(items),
            (_, Tok::Str(s)) => {
                items.push(s);
                match lx.next()? {
                    (_, Tok::Comma) => {}
                    (_, Tok::Close) => return Ok(items),
                    (at, t) => {
                        return Err(CausalError::Parse {
                            offset: at,
                            message: format!("expected , or ] but found {t:?}"),
                        })
                    }
                }
            }
            (at, t) => {
                return Err(CausalError::Parse { offset: at, message: format!("expected a name but found {t:?}") })
            }
        }
    }
}

/// Parses the `edges = [...]` block (and an optional `nodes = [...]` block)
/// into a digraph. Text outside the blocks is ignored.
pub fn parse_edge_list(text: &str) -> Result<CausalGraph> {
    let start = find_block(text, "edges")
        .ok_or_else(|| CausalError::Parse { offset: 0, message: "no `edges = [` block found".into() })?;
    let mut lx = Lexer { text, pos: start + 1 };
    let mut edges: Vec<(String, String)> = Vec::new();
    loop {
        match lx.next()? {
            (_, Tok::Close) => break,
            (at, Tok::Open) => {
                let pair = parse_string_list(&mut lx)?;
                let [a, b]: [String; 2] = pair.try_into().map_err(|p: Vec<String>| CausalError::Parse {
                    offset: at,
                    message: format!("edge must have exactly two names, found {}", p.len()),
                })?;
                edges.push((a, b));
                match lx.next()? {
                    (_, Tok::Comma) => {}
                    (_, Tok::Close) => break,
                    (at, t) => {
                        return Err(CausalError::Parse {
                            offset: at,
                            message: format!("expected , or ] but found {t:?}"),
                        })
                    }
                }
            }
            (at, t) => return Err(CausalError::Parse { offset: at, message: format!("expected [ but found {t:?}") }),
        }
    }

    let mut nodes: Vec<String> = Vec::new();
    let mut seen = BTreeSet::new();
    if let Some(at) = find_block(text, "nodes") {
        let mut lx = Lexer { text, pos: at + 1 };
        for n in parse_string_list(&mut lx)? {
            if seen.insert(n.clone()) {
                nodes.push(n);
            }
        }
    }
    for (a, b) in &edges {
        for n in [a, b] {
            if seen.insert(n.clone()) {
                nodes.push(n.clone());
            }
        }
    }
    let refs: Vec<(&str, &str)> = edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    CausalGraph::from_edges(nodes, &refs, &[], GraphKind::Digraph)
}

fn quote(name: &str) -> String {
    let q = if name.contains('\'') && !name.contains('"') { '"' } else { '\'' };
    let mut s = String::with_capacity(name.len() + 2);
    s.push(q);
    for c in name.chars() {
        if c == q || c == '\\' {
            s.push('\\');
        }
        s.push(c);
    }
    s.push(q);
    s
}

/// Writes the directed edges in the bracketed format. Nodes without edges are
/// listed in a `nodes` block so the node set survives a round trip.
pub fn emit_edge_list(graph: &CausalGraph) -> String {
    let mut out = String::from("edges = [\n");
    let mut touched = BTreeSet::new();
    for (a, b) in graph.named_directed() {
        out.push_str(&format!("    [{}, {}],\n", quote(&a), quote(&b)));
        touched.insert(a);
        touched.insert(b);
    }
    out.push_str("]\n");
    let isolated: Vec<String> = graph.nodes().iter().filter(|n| !touched.contains(*n)).map(|n| quote(n)).collect();
    if !isolated.is_empty() {
        out.push_str(&format!("nodes = [{}]\n", isolated.join(", ")));
    }
    out
}

/// Maps every node (given by value id or display name) to its catalog value
/// id; the result keeps the input's edges and kind.
pub fn resolve_against_catalog(graph: &CausalGraph, catalog: &Catalog) -> Result<CausalGraph> {
    let ids: Vec<String> = graph
        .nodes()
        .iter()
        .map(|n| catalog.resolve_value(n).map(|v| v.id.clone()).ok_or_else(|| CausalError::UnknownNode(n.clone())))
        .collect::<Result<_>>()?;
    let mut g = CausalGraph::empty(ids, graph.kind())?;
    for (a, b) in graph.directed_edges() {
        g.add_directed(a, b)?;
    }
    for (a, b) in graph.undirected_edges() {
        g.add_undirected(a, b)?;
    }
    g.provenance = graph.provenance.clone();
    Ok(g)
}

/// Digraph linking, in both directions, every pair of values that share an
/// upper dimension.
pub fn hierarchy_graph(catalog: &Catalog) -> CausalGraph {
    let values = catalog.values();
    let mut g = CausalGraph::empty(catalog.value_ids(), GraphKind::Digraph).expect("catalog ids are unique");
    for (i, a) in values.iter().enumerate() {
        for (j, b) in values.iter().enumerate() {
            if i != j && a.upper_dimensions.iter().any(|t| b.upper_dimensions.contains(t)) {
                g.add_directed(i, j).expect("distinct in-range nodes");
            }
        }
    }
    g.provenance.push("pairs sharing an upper dimension, both directions".into());
    g
}
