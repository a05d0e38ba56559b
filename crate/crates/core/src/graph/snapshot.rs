//! Binary snapshot of a loaded graph.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic "PPKG" | version u32
//! entity table | predicate table | label table     (u32 count, then u32 len + UTF-8 bytes each)
//! label sets: per entity, u32 count then u32 label ids
//! edges: u64 count, then (subject u32, predicate u32, object u32, multiplicity u32) sorted
//! ```

use std::io::{Read, Write};

use super::{Interner, KnowledgeGraph, LabelId, OntologyLabelSet};
use crate::error::{Error, Result};

pub(crate) const MAGIC: &[u8; 4] = b"PPKG";
pub const SNAPSHOT_VERSION: u32 = 1;

fn put_u32(w: &mut impl Write, v: u32) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_table(w: &mut impl Write, names: &[String]) -> std::io::Result<()> {
    put_u32(w, names.len() as u32)?;
    for n in names {
        put_u32(w, n.len() as u32)?;
        w.write_all(n.as_bytes())?;
    }
    Ok(())
}

pub fn write_snapshot(graph: &KnowledgeGraph, mut w: impl Write) -> Result<()> {
    let io = |e| Error::Snapshot(format!("write failed: {e}"));
    let (entities, predicates, labels) = graph.interners();
    w.write_all(MAGIC).map_err(io)?;
    put_u32(&mut w, SNAPSHOT_VERSION).map_err(io)?;
    put_table(&mut w, entities.names()).map_err(io)?;
    put_table(&mut w, predicates.names()).map_err(io)?;
    put_table(&mut w, labels.names()).map_err(io)?;
    for set in graph.all_entity_labels() {
        put_u32(&mut w, set.len() as u32).map_err(io)?;
        for l in set.iter() {
            put_u32(&mut w, l.0).map_err(io)?;
        }
    }
    let view = graph.view();
    w.write_all(&(graph.distinct_edge_count() as u64).to_le_bytes())
        .map_err(io)?;
    for (s, p, t, m) in view.edges() {
        for x in [s.0, p.0, t.0, m] {
            put_u32(&mut w, x).map_err(io)?;
        }
    }
    w.flush().map_err(io)?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| Error::Snapshot(format!("truncated snapshot: {e}")))?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes::<4>()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes::<8>()?))
    }

    fn table(&mut self) -> Result<Interner> {
        let n = self.u32()? as usize;
        let mut names = Vec::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            let len = self.u32()? as usize;
            let mut buf = vec![0u8; len];
            self.inner
                .read_exact(&mut buf)
                .map_err(|e| Error::Snapshot(format!("truncated snapshot: {e}")))?;
            names.push(String::from_utf8(buf).map_err(|_| Error::Snapshot("name is not UTF-8".into()))?);
        }
        Interner::from_names(names)
    }
}

pub fn read_snapshot(r: impl Read) -> Result<KnowledgeGraph> {
    let mut r = Reader { inner: r };
    if &r.bytes::<4>()? != MAGIC {
        return Err(Error::Snapshot("not a graph snapshot (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != SNAPSHOT_VERSION {
        return Err(Error::Snapshot(format!(
            "unsupported snapshot version {version} (expected {SNAPSHOT_VERSION})"
        )));
    }
    let entities = r.table()?;
    let predicates = r.table()?;
    let labels = r.table()?;
    let mut entity_labels = Vec::with_capacity(entities.len());
    for _ in 0..entities.len() {
        let n = r.u32()? as usize;
        let mut ids = Vec::with_capacity(n);
        for _ in 0..n {
            let l = r.u32()?;
            if l as usize >= labels.len() {
                return Err(Error::Snapshot(format!("label id {l} out of range")));
            }
            ids.push(LabelId(l));
        }
        entity_labels.push(OntologyLabelSet::new(ids));
    }
    let m = r.u64()? as usize;
    let mut edges = Vec::with_capacity(m.min(1 << 24));
    for _ in 0..m {
        let (s, p, t, mult) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?);
        if s as usize >= entities.len() || t as usize >= entities.len() {
            return Err(Error::Snapshot(format!("entity id out of range in edge {s}->{t}")));
        }
        if p as usize >= predicates.len() {
            return Err(Error::Snapshot(format!("predicate id {p} out of range")));
        }
        if mult == 0 {
            return Err(Error::Snapshot("zero multiplicity edge".into()));
        }
        edges.push((s, p, t, mult));
    }
    Ok(KnowledgeGraph::assemble(
        entities,
        predicates,
        labels,
        entity_labels,
        edges,
    ))
}
