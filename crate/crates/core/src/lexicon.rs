//! Relation-typed concept edges and the one-step undirected lexicon graph.
//!
//! Edges arrive either as 3-column TSV (`cui1<TAB>rel<TAB>cui2`) or as
//! MRREL-style pipe-delimited rows (CUI1 at field 0, REL at field 3, CUI2 at
//! field 4). Filtering by relation label happens at parse time; the graph is
//! built afterwards, restricted to a vocabulary, symmetrized, deduplicated,
//! and with self-loops dropped. One-step semantics: no transitive closure.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::BufRead;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: expected 3 tab-separated fields, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: expected at least 5 pipe-separated fields, found {found}")]
    RrfFieldCount { line: usize, found: usize },
    #[error("line {line}: empty {field} field")]
    EmptyField { line: usize, field: &'static str },
    #[error("empty relation set")]
    EmptyRelationSet,
    #[error("relation edge field {field} is empty")]
    EmptyEdgeField { field: &'static str },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One typed link between two concept identifiers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelationEdge {
    pub cui1: String,
    pub rel: String,
    pub cui2: String,
}

impl RelationEdge {
    pub fn new(
        cui1: impl Into<String>,
        rel: impl Into<String>,
        cui2: impl Into<String>,
    ) -> Result<Self, LexiconError> {
        let edge = RelationEdge {
            cui1: cui1.into(),
            rel: rel.into(),
            cui2: cui2.into(),
        };
        if edge.cui1.is_empty() {
            return Err(LexiconError::EmptyEdgeField { field: "cui1" });
        }
        if edge.rel.is_empty() {
            return Err(LexiconError::EmptyEdgeField { field: "rel" });
        }
        if edge.cui2.is_empty() {
            return Err(LexiconError::EmptyEdgeField { field: "cui2" });
        }
        Ok(edge)
    }
}

/// A set of relation labels used to filter edges (e.g. `{RN, RO}`).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RelationSet {
    labels: BTreeSet<String>,
}

impl RelationSet {
    pub fn new<S: Into<String>, I: IntoIterator<Item = S>>(labels: I) -> Self {
        RelationSet {
            labels: labels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.contains(label)
    }

    /// Labels in sorted order.
    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str)
    }

    pub fn union(&self, other: &RelationSet) -> RelationSet {
        RelationSet {
            labels: self.labels.union(&other.labels).cloned().collect(),
        }
    }
}

impl<S: Into<String>> FromIterator<S> for RelationSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        RelationSet::new(iter)
    }
}

impl std::fmt::Display for RelationSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for label in &self.labels {
            if !first {
                f.write_str("+")?;
            }
            f.write_str(label)?;
            first = false;
        }
        Ok(())
    }
}

/// Source format for relation edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeFormat {
    /// `cui1<TAB>rel<TAB>cui2`, `#` comment lines and blank lines allowed.
    Tsv,
    /// Pipe-delimited rows with CUI1, REL, CUI2 at field indices 0, 3, 4.
    Rrf,
}

impl std::str::FromStr for EdgeFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsv" => Ok(EdgeFormat::Tsv),
            "rrf" => Ok(EdgeFormat::Rrf),
            other => Err(format!("unknown lexicon format {other:?} (expected tsv or rrf)")),
        }
    }
}

/// Reads edges in the given format. With `filter = Some(set)`, rows whose
/// relation label is outside the set are skipped silently; with `None` every
/// row is kept. Structural problems are reported with 1-based line numbers.
pub fn parse_edges<R: BufRead>(
    reader: R,
    format: EdgeFormat,
    filter: Option<&RelationSet>,
) -> Result<Vec<RelationEdge>, LexiconError> {
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        let (cui1, rel, cui2) = match format {
            EdgeFormat::Tsv => {
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() != 3 {
                    return Err(LexiconError::ColumnCount {
                        line: line_no,
                        found: fields.len(),
                    });
                }
                (fields[0], fields[1], fields[2])
            }
            EdgeFormat::Rrf => {
                let fields: Vec<&str> = line.split('|').collect();
                if fields.len() < 5 {
                    return Err(LexiconError::RrfFieldCount {
                        line: line_no,
                        found: fields.len(),
                    });
                }
                (fields[0], fields[3], fields[4])
            }
        };
        if cui1.is_empty() {
            return Err(LexiconError::EmptyField {
                line: line_no,
                field: "cui1",
            });
        }
        if rel.is_empty() {
            return Err(LexiconError::EmptyField {
                line: line_no,
                field: "rel",
            });
        }
        if cui2.is_empty() {
            return Err(LexiconError::EmptyField {
                line: line_no,
                field: "cui2",
            });
        }
        if let Some(set) = filter {
            if !set.contains(rel) {
                continue;
            }
        }
        edges.push(RelationEdge {
            cui1: cui1.to_string(),
            rel: rel.to_string(),
            cui2: cui2.to_string(),
        });
    }
    Ok(edges)
}

/// Reads `cui1<TAB>rel<TAB>cui2` lines, keeping edges whose relation is in
/// `filter`. The filter must be non-empty.
pub fn parse_tsv_edges<R: BufRead>(
    reader: R,
    filter: &RelationSet,
) -> Result<Vec<RelationEdge>, LexiconError> {
    if filter.is_empty() {
        return Err(LexiconError::EmptyRelationSet);
    }
    parse_edges(reader, EdgeFormat::Tsv, Some(filter))
}

/// Reads MRREL-style pipe-delimited rows, keeping edges whose relation is in
/// `filter`. The filter must be non-empty.
pub fn parse_rrf_edges<R: BufRead>(
    reader: R,
    filter: &RelationSet,
) -> Result<Vec<RelationEdge>, LexiconError> {
    if filter.is_empty() {
        return Err(LexiconError::EmptyRelationSet);
    }
    parse_edges(reader, EdgeFormat::Rrf, Some(filter))
}

/// Undirected one-step neighborhood graph over tokens.
///
/// Always symmetric and irreflexive; every node belongs to the vocabulary the
/// graph was built against. Node ids are assigned in sorted token order, so
/// the layout is identical across permutations of the input edge list.
#[derive(Debug, Clone, PartialEq)]
pub struct LexiconGraph {
    nodes: Vec<String>,
    index: HashMap<String, u32>,
    adj_off: Vec<usize>,
    adj: Vec<u32>,
}

impl LexiconGraph {
    fn empty() -> Self {
        LexiconGraph {
            nodes: Vec::new(),
            index: HashMap::new(),
            adj_off: vec![0],
            adj: Vec::new(),
        }
    }

    /// Number of nodes with at least one edge.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.adj.len() / 2
    }

    /// Node tokens in sorted order.
    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(String::as_str)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Degree of a node; 0 for tokens absent from the graph.
    pub fn degree(&self, token: &str) -> usize {
        match self.index.get(token) {
            Some(&id) => self.neighbor_ids(id).len(),
            None => 0,
        }
    }

    /// Sorted neighbor tokens; empty for tokens absent from the graph.
    pub fn neighborhood(&self, token: &str) -> Vec<&str> {
        match self.index.get(token) {
            Some(&id) => self
                .neighbor_ids(id)
                .iter()
                .map(|&j| self.nodes[j as usize].as_str())
                .collect(),
            None => Vec::new(),
        }
    }

    /// Each undirected edge once, as `(smaller token, larger token)` by node order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        (0..self.nodes.len() as u32).flat_map(move |i| {
            self.neighbor_ids(i)
                .iter()
                .filter(move |&&j| i < j)
                .map(move |&j| (self.nodes[i as usize].as_str(), self.nodes[j as usize].as_str()))
        })
    }

    pub(crate) fn token_of(&self, id: u32) -> &str {
        &self.nodes[id as usize]
    }

    pub(crate) fn neighbor_ids(&self, id: u32) -> &[u32] {
        let id = id as usize;
        &self.adj[self.adj_off[id]..self.adj_off[id + 1]]
    }

    /// Heap footprint of the adjacency structure, for capacity accounting.
    pub fn heap_bytes(&self) -> usize {
        self.nodes.iter().map(|s| s.capacity()).sum::<usize>()
            + self.nodes.capacity() * std::mem::size_of::<String>()
            + self.adj_off.capacity() * std::mem::size_of::<usize>()
            + self.adj.capacity() * std::mem::size_of::<u32>()
            + self.index.capacity()
                * (std::mem::size_of::<String>() + std::mem::size_of::<u32>())
    }
}

/// Builds the one-step undirected graph from typed edges, keeping only edges
/// with both endpoints in `vocabulary`. Self-loops are dropped, direction is
/// discarded, and duplicate pairs (including multi-relation duplicates)
/// collapse to a single edge.
pub fn build_graph<'a, V>(edges: &[RelationEdge], vocabulary: V) -> LexiconGraph
where
    V: IntoIterator<Item = &'a str>,
{
    let vocab: HashSet<&str> = vocabulary.into_iter().collect();
    let mut endpoints: HashSet<&str> = HashSet::new();
    let mut kept: Vec<(&str, &str)> = Vec::new();
    for edge in edges {
        if edge.cui1 == edge.cui2 {
            continue;
        }
        if !vocab.contains(edge.cui1.as_str()) || !vocab.contains(edge.cui2.as_str()) {
            continue;
        }
        endpoints.insert(&edge.cui1);
        endpoints.insert(&edge.cui2);
        kept.push((&edge.cui1, &edge.cui2));
    }
    if kept.is_empty() {
        return LexiconGraph::empty();
    }

    let mut names: Vec<&str> = endpoints.into_iter().collect();
    names.sort_unstable();
    let id_of: HashMap<&str, u32> = names
        .iter()
        .enumerate()
        .map(|(i, &name)| (name, i as u32))
        .collect();

    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(kept.len() * 2);
    for (a, b) in kept {
        let ia = id_of[a];
        let ib = id_of[b];
        pairs.push((ia, ib));
        pairs.push((ib, ia));
    }
    pairs.sort_unstable();
    pairs.dedup();

    let mut adj_off = Vec::with_capacity(names.len() + 1);
    let mut adj = Vec::with_capacity(pairs.len());
    adj_off.push(0);
    let mut current = 0u32;
    for (a, b) in pairs {
        while current < a {
            adj_off.push(adj.len());
            current += 1;
        }
        adj.push(b);
    }
    while (adj_off.len() as u32) <= current {
        adj_off.push(adj.len());
    }
    adj_off.push(adj.len());
    // One offset per node plus the final bound.
    debug_assert_eq!(adj_off.len(), names.len() + 1);

    let nodes: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    let index: HashMap<String, u32> = nodes
        .iter()
        .enumerate()
        .map(|(i, name)| (name.clone(), i as u32))
        .collect();
    LexiconGraph {
        nodes,
        index,
        adj_off,
        adj,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn tsv(text: &str, filter: &[&str]) -> Result<Vec<RelationEdge>, LexiconError> {
        parse_tsv_edges(Cursor::new(text.as_bytes()), &RelationSet::new(filter.to_vec()))
    }

    #[test]
    fn tsv_keeps_filtered_edges_in_order() {
        let edges = tsv("A\tCHD\tB\nB\tCHD\tC", &["CHD"]).unwrap();
        assert_eq!(
            edges,
            vec![
                RelationEdge::new("A", "CHD", "B").unwrap(),
                RelationEdge::new("B", "CHD", "C").unwrap(),
            ]
        );
    }

    #[test]
    fn tsv_filter_can_exclude_everything() {
        assert!(tsv("A\tCHD\tB\nB\tCHD\tC", &["RO"]).unwrap().is_empty());
    }

    #[test]
    fn tsv_fields_may_contain_spaces() {
        let edges = tsv("Myopathy\tAQ\tprevention & control", &["AQ"]).unwrap();
        assert_eq!(edges.len(), 1);
        assert_eq!(edges[0].rel, "AQ");
        assert_eq!(edges[0].cui2, "prevention & control");
    }

    #[test]
    fn tsv_comments_and_blank_lines_skipped() {
        let edges = tsv("# comment\n\nA\tRO\tB\n", &["RO"]).unwrap();
        assert_eq!(edges.len(), 1);
    }

    #[test]
    fn tsv_wrong_column_count_reports_line() {
        match tsv("A\tRO\tB\nA\tRO", &["RO"]) {
            Err(LexiconError::ColumnCount { line, found }) => {
                assert_eq!((line, found), (2, 2));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn tsv_empty_field_reports_line() {
        match tsv("A\t\tB", &["RO"]) {
            Err(LexiconError::EmptyField { line, field }) => {
                assert_eq!((line, field), (1, "rel"));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn empty_filter_rejected() {
        let set = RelationSet::new(Vec::<String>::new());
        assert!(matches!(
            parse_tsv_edges(Cursor::new(b"A\tRO\tB".as_slice()), &set),
            Err(LexiconError::EmptyRelationSet)
        ));
    }

    #[test]
    fn rrf_extracts_fields_0_3_4() {
        let row = "C0004096|A1234567|SCUI|RQ|C0043144|A7654321|SCUI||R12345678||MSH|MSH|||N||";
        let edges =
            parse_rrf_edges(Cursor::new(row.as_bytes()), &RelationSet::new(["RQ"])).unwrap();
        assert_eq!(edges, vec![RelationEdge::new("C0004096", "RQ", "C0043144").unwrap()]);
    }

    #[test]
    fn rrf_skips_filtered_relations() {
        let row = "C1|A|SCUI|XR|C2|A|SCUI||R||MSH|MSH|||N||";
        let edges =
            parse_rrf_edges(Cursor::new(row.as_bytes()), &RelationSet::new(["RN", "RO"])).unwrap();
        assert!(edges.is_empty());
    }

    #[test]
    fn rrf_empty_stream_is_empty() {
        let edges =
            parse_rrf_edges(Cursor::new(b"".as_slice()), &RelationSet::new(["RN"])).unwrap();
        assert!(edges.is_empty());
    }

    #[test]
    fn rrf_short_row_reports_line() {
        match parse_rrf_edges(Cursor::new(b"C1|A|SCUI|RN".as_slice()), &RelationSet::new(["RN"])) {
            Err(LexiconError::RrfFieldCount { line, found }) => {
                assert_eq!((line, found), (1, 4));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    fn edge(a: &str, rel: &str, b: &str) -> RelationEdge {
        RelationEdge::new(a, rel, b).unwrap()
    }

    #[test]
    fn one_step_neighborhood_only() {
        let edges = vec![edge("A", "CHD", "B"), edge("B", "CHD", "C")];
        let g = build_graph(&edges, ["A", "B", "C"]);
        assert_eq!(g.neighborhood("A"), ["B"]);
        assert_eq!(g.neighborhood("B"), ["A", "C"]);
    }

    #[test]
    fn self_loops_dropped() {
        let edges = vec![edge("A", "SY", "A")];
        let g = build_graph(&edges, ["A"]);
        assert!(g.neighborhood("A").is_empty());
        assert_eq!(g.node_count(), 0);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn reverse_duplicates_collapse() {
        let edges = vec![edge("A", "RO", "B"), edge("B", "RO", "A")];
        let g = build_graph(&edges, ["A", "B"]);
        assert_eq!(g.degree("A"), 1);
        assert_eq!(g.degree("B"), 1);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn multi_relation_duplicates_collapse() {
        let edges = vec![edge("A", "RN", "B"), edge("A", "RO", "B")];
        let g = build_graph(&edges, ["A", "B"]);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn out_of_vocabulary_endpoints_dropped() {
        let edges = vec![edge("A", "RO", "B"), edge("A", "RO", "X")];
        let g = build_graph(&edges, ["A", "B"]);
        assert_eq!(g.neighborhood("A"), ["B"]);
        assert!(!g.contains("X"));
        for node in g.nodes() {
            assert!(["A", "B"].contains(&node));
        }
    }

    #[test]
    fn absent_node_has_empty_neighborhood() {
        let g = build_graph(&[edge("A", "RO", "B")], ["A", "B"]);
        assert!(g.neighborhood("Z").is_empty());
        assert_eq!(g.degree("Z"), 0);
    }

    #[test]
    fn neighborhood_is_sorted() {
        let edges = vec![edge("M", "RO", "Z"), edge("M", "RO", "A"), edge("M", "RO", "K")];
        let g = build_graph(&edges, ["M", "Z", "A", "K"]);
        assert_eq!(g.neighborhood("M"), ["A", "K", "Z"]);
        assert_eq!(g.degree("M"), 3);
    }

    #[test]
    fn permutation_invariant() {
        let edges = vec![edge("A", "RO", "B"), edge("C", "RO", "D"), edge("B", "RO", "C")];
        let mut reversed = edges.clone();
        reversed.reverse();
        let g1 = build_graph(&edges, ["A", "B", "C", "D"]);
        let g2 = build_graph(&reversed, ["A", "B", "C", "D"]);
        assert_eq!(g1, g2);
    }

    #[test]
    fn edges_iterator_lists_each_edge_once() {
        let g = build_graph(
            &[edge("A", "RO", "B"), edge("B", "RO", "C")],
            ["A", "B", "C"],
        );
        let listed: Vec<_> = g.edges().collect();
        assert_eq!(listed, vec![("A", "B"), ("B", "C")]);
    }
}
