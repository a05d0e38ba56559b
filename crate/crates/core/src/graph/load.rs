use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom};
use std::path::Path;

use super::{Interner, KnowledgeGraph, LabelId, OntologyLabelSet};
use crate::error::{Error, Result};

/// Single-writer accumulator for a [`KnowledgeGraph`].
///
/// Entities are merged by exact name. Repeated triples add to the edge's
/// multiplicity. Entities mentioned only by label lines are still created.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    entities: Interner,
    predicates: Interner,
    labels: Interner,
    entity_labels: Vec<Vec<LabelId>>,
    edges: HashMap<(u32, u32, u32), u32>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn entity(&mut self, name: &str) -> u32 {
        let id = self.entities.intern(name);
        if id as usize == self.entity_labels.len() {
            self.entity_labels.push(Vec::new());
        }
        id
    }

    pub fn add_entity(&mut self, name: &str) {
        self.entity(name);
    }

    pub fn add_triple(&mut self, subject: &str, predicate: &str, object: &str) {
        self.add_triple_n(subject, predicate, object, 1);
    }

    pub fn add_triple_n(&mut self, subject: &str, predicate: &str, object: &str, times: u32) {
        let s = self.entity(subject);
        let t = self.entity(object);
        let p = self.predicates.intern(predicate);
        *self.edges.entry((s, p, t)).or_insert(0) += times;
    }

    pub fn add_labels<'a>(&mut self, entity: &str, labels: impl IntoIterator<Item = &'a str>) {
        let v = self.entity(entity) as usize;
        for l in labels {
            let id = LabelId(self.labels.intern(l));
            self.entity_labels[v].push(id);
        }
    }

    pub fn build(self) -> KnowledgeGraph {
        let edges = self.edges.into_iter().map(|((s, p, t), m)| (s, p, t, m)).collect();
        let entity_labels = self.entity_labels.into_iter().map(OntologyLabelSet::new).collect();
        KnowledgeGraph::assemble(self.entities, self.predicates, self.labels, entity_labels, edges)
    }

    /// Reads `subject<TAB>predicate<TAB>object` lines. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn read_edges(&mut self, reader: impl BufRead, source_name: &str) -> Result<()> {
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::io(source_name, e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    source_name: source_name.to_string(),
                    line: lineno,
                    message: format!("expected 3 tab-separated fields, found {}", fields.len()),
                });
            }
            if let Some(pos) = fields.iter().position(|f| f.is_empty()) {
                return Err(Error::Parse {
                    source_name: source_name.to_string(),
                    line: lineno,
                    message: format!("field {} is empty", pos + 1),
                });
            }
            self.add_triple(fields[0], fields[1], fields[2]);
        }
        Ok(())
    }

    /// Reads `entity<TAB>label1,label2,...` lines. Whitespace around labels
    /// is ignored; an empty label list still creates the entity.
    pub fn read_labels(&mut self, reader: impl BufRead, source_name: &str) -> Result<()> {
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::io(source_name, e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (entity, rest) = match line.split_once('\t') {
                Some(x) => x,
                None => (line, ""),
            };
            if entity.is_empty() {
                return Err(Error::Parse {
                    source_name: source_name.to_string(),
                    line: lineno,
                    message: "empty entity name".into(),
                });
            }
            if rest.contains('\t') {
                return Err(Error::Parse {
                    source_name: source_name.to_string(),
                    line: lineno,
                    message: "expected 2 tab-separated fields".into(),
                });
            }
            let labels: Vec<&str> = rest.split(',').map(str::trim).filter(|l| !l.is_empty()).collect();
            self.add_labels(entity, labels);
        }
        Ok(())
    }
}

/// Builds a graph from an edge stream and a label stream.
pub fn load_graph(edges: impl BufRead, labels: impl BufRead) -> Result<KnowledgeGraph> {
    let mut b = GraphBuilder::new();
    b.read_edges(edges, "<edges>")?;
    b.read_labels(labels, "<labels>")?;
    Ok(b.build())
}

/// File-based variant of [`load_graph`]; `labels` is optional.
pub fn load_graph_files(edges: &Path, labels: Option<&Path>) -> Result<KnowledgeGraph> {
    let mut b = GraphBuilder::new();
    let f = File::open(edges).map_err(|e| Error::io(edges, e))?;
    b.read_edges(BufReader::new(f), &edges.display().to_string())?;
    if let Some(lp) = labels {
        let f = File::open(lp).map_err(|e| Error::io(lp, e))?;
        b.read_labels(BufReader::new(f), &lp.display().to_string())?;
    }
    Ok(b.build())
}

/// Opens a binary snapshot or a TSV edge list, whichever `path` holds.
pub fn open_graph(path: &Path, labels: Option<&Path>) -> Result<KnowledgeGraph> {
    let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut magic = [0u8; 4];
    let n = f.read(&mut magic).map_err(|e| Error::io(path, e))?;
    if n == 4 && &magic == super::snapshot::MAGIC {
        if labels.is_some() {
            log::warn!("ignoring label file: snapshots carry their own labels");
        }
        f.seek(SeekFrom::Start(0)).map_err(|e| Error::io(path, e))?;
        return super::read_snapshot(BufReader::new(f));
    }
    load_graph_files(path, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_edges_and_labels() {
        let edges = "# comment\na\tp\tb\na\tp\tb\nb\tq\tc\n\n";
        let labels = "a\tcity, settlement\nc\tstate\nd\tstate\n";
        let g = load_graph(edges.as_bytes(), labels.as_bytes()).unwrap();
        assert_eq!(g.entity_count(), 4);
        assert_eq!(g.distinct_edge_count(), 2);
        assert_eq!(g.edge_count(), 3);
        let a = g.entity("a").unwrap();
        assert_eq!(g.label_names(g.entity_labels(a)), vec!["city", "settlement"]);
        assert!(g.entity_labels(g.entity("b").unwrap()).is_empty());
    }

    #[test]
    fn empty_edges_with_labels_gives_isolated_nodes() {
        let g = load_graph("".as_bytes(), "x\tcity\ny\tstate\n".as_bytes()).unwrap();
        assert_eq!(g.entity_count(), 2);
        assert_eq!(g.edge_count(), 0);
        for v in g.entities() {
            assert_eq!(g.view().degree(v), 0);
            assert_eq!(g.entity_labels(v).len(), 1);
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = load_graph("a\tp\tb\nbroken line\n".as_bytes(), "".as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
        let err = load_graph("a\t\tb\n".as_bytes(), "".as_bytes()).unwrap_err();
        assert!(err.to_string().starts_with("parse error:"));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_graph_files(Path::new("/nonexistent/edges.tsv"), None).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
