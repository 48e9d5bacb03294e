//! Undirected graphs whose edges (and loops) are labelled protected or
//! unprotected.
//!
//! Vertices are dense ids assigned at insertion. At most one edge is stored per
//! unordered pair; re-adding a pair keeps the stronger label, where
//! `Unprotected` dominates `Protected`. A vertex is *unprotected* exactly when
//! it carries an unprotected loop.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "P")]
    Protected,
    #[serde(rename = "U")]
    Unprotected,
}

impl Label {
    /// Combines the labels of two parallel edges.
    pub fn merge(self, other: Label) -> Label {
        if self == Label::Unprotected || other == Label::Unprotected {
            Label::Unprotected
        } else {
            Label::Protected
        }
    }
}

/// Normalized unordered pair, `u <= v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey {
    pub u: VertexId,
    pub v: VertexId,
}

impl EdgeKey {
    pub fn new(a: VertexId, b: VertexId) -> Self {
        EdgeKey { u: a.min(b), v: a.max(b) }
    }

    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }
}

/// Provenance of a vertex emitted by a construction.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexAnnotation {
    pub role: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub track: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub copy: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<i64>,
}

impl VertexAnnotation {
    pub fn role(role: impl Into<String>) -> Self {
        VertexAnnotation { role: role.into(), ..Default::default() }
    }

    pub fn level(mut self, level: i64) -> Self {
        self.level = Some(level);
        self
    }

    pub fn track(mut self, track: i64) -> Self {
        self.track = Some(track);
        self
    }

    pub fn copy(mut self, copy: i64) -> Self {
        self.copy = Some(copy);
        self
    }

    pub fn mechanism(mut self, mechanism: i64) -> Self {
        self.mechanism = Some(mechanism);
        self
    }
}

pub type Annotations = BTreeMap<VertexId, VertexAnnotation>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelledGraph {
    names: Vec<String>,
    // sorted by neighbour id; a loop appears once, as the vertex itself
    adj: Vec<Vec<(VertexId, Label)>>,
}

impl LabelledGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Graph on `n` vertices named `v0..v{n-1}` with no edges.
    pub fn with_vertices(n: usize) -> Self {
        let mut g = Self::new();
        for i in 0..n {
            g.add_vertex(format!("v{i}"));
        }
        g
    }

    pub fn add_vertex(&mut self, name: impl Into<String>) -> VertexId {
        self.names.push(name.into());
        self.adj.push(Vec::new());
        self.names.len() - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v]
    }

    pub fn find(&self, name: &str) -> Option<VertexId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v < self.names.len()
    }

    fn check(&self, v: VertexId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    /// Adds `{u, v}`; a repeated pair keeps the dominant label.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId, label: Label) -> Result<EdgeKey> {
        self.check(u)?;
        self.check(v)?;
        Self::upsert(&mut self.adj[u], v, label);
        if u != v {
            Self::upsert(&mut self.adj[v], u, label);
        }
        Ok(EdgeKey::new(u, v))
    }

    fn upsert(list: &mut Vec<(VertexId, Label)>, w: VertexId, label: Label) {
        match list.binary_search_by_key(&w, |&(x, _)| x) {
            Ok(i) => list[i].1 = list[i].1.merge(label),
            Err(i) => list.insert(i, (w, label)),
        }
    }

    pub fn label(&self, u: VertexId, v: VertexId) -> Option<Label> {
        let list = self.adj.get(u)?;
        list.binary_search_by_key(&v, |&(x, _)| x).ok().map(|i| list[i].1)
    }

    pub fn neighbors(&self, v: VertexId) -> Result<&[(VertexId, Label)]> {
        self.check(v)?;
        Ok(&self.adj[v])
    }

    /// Unchecked neighbour slice for hot loops.
    #[inline]
    pub fn adj(&self, v: VertexId) -> &[(VertexId, Label)] {
        &self.adj[v]
    }

    pub fn is_unprotected_vertex(&self, v: VertexId) -> Result<bool> {
        self.check(v)?;
        Ok(self.label(v, v) == Some(Label::Unprotected))
    }

    /// All stored edges as `(u, v, label)` with `u <= v`, ordered.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, Label)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter().filter(move |&&(v, _)| v >= u).map(move |&(v, l)| (u, v, l))
        })
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    /// Vertex-induced subgraph; returns the graph and the old id of each new vertex.
    pub fn induced(&self, keep: &[VertexId]) -> (LabelledGraph, Vec<VertexId>) {
        let mut index = vec![usize::MAX; self.vertex_count()];
        let mut g = LabelledGraph::new();
        for &v in keep {
            index[v] = g.add_vertex(self.names[v].clone());
        }
        for (u, v, l) in self.edges() {
            if index[u] != usize::MAX && index[v] != usize::MAX {
                g.add_edge(index[u], index[v], l).expect("ids are fresh");
            }
        }
        (g, keep.to_vec())
    }

    /// Connected components (ignoring labels), each sorted ascending.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                let v = comp[i];
                i += 1;
                for &(w, _) in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count() > 0 && self.components().len() == 1
    }

    /// Breadth-first distances from `source`; unreachable vertices get `usize::MAX`.
    pub fn bfs(&self, source: VertexId) -> Vec<usize> {
        self.multi_bfs(std::iter::once(source))
    }

    pub fn multi_bfs(&self, sources: impl IntoIterator<Item = VertexId>) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count()];
        let mut queue = std::collections::VecDeque::new();
        for s in sources {
            if dist[s] != 0 {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &self.adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn to_json(&self, annotations: &Annotations) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc(annotations))?)
    }

    pub fn to_doc(&self, annotations: &Annotations) -> GraphDoc {
        GraphDoc {
            vertices: (0..self.vertex_count())
                .map(|id| VertexDoc {
                    id,
                    name: self.names[id].clone(),
                    ann: annotations.get(&id).cloned(),
                })
                .collect(),
            edges: self.edges().map(|(u, v, label)| EdgeDoc { u, v, label }).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<(LabelledGraph, Annotations)> {
        let doc: GraphDoc = serde_json::from_str(text)?;
        Self::from_doc(&doc)
    }

    pub fn from_doc(doc: &GraphDoc) -> Result<(LabelledGraph, Annotations)> {
        let mut g = LabelledGraph::new();
        let mut ann = Annotations::new();
        for (i, vd) in doc.vertices.iter().enumerate() {
            if vd.id != i {
                return Err(Error::Format(format!(
                    "vertex ids must be dense and ordered: found {} at position {i}",
                    vd.id
                )));
            }
            let name = if vd.name.is_empty() { i.to_string() } else { vd.name.clone() };
            g.add_vertex(name);
            if let Some(a) = &vd.ann {
                ann.insert(i, a.clone());
            }
        }
        for e in &doc.edges {
            g.add_edge(e.u, e.v, e.label)?;
        }
        Ok((g, ann))
    }

    /// Graphviz rendering: unprotected edges solid, protected edges dashed,
    /// unprotected vertices filled.
    pub fn to_dot(&self, annotations: &Annotations) -> String {
        let mut out = String::from("graph G {\n  node [shape=circle];\n");
        for v in 0..self.vertex_count() {
            let filled = self.label(v, v) == Some(Label::Unprotected);
            let mut attrs = format!("label=\"{}\"", escape(&self.names[v]));
            if filled {
                attrs.push_str(", style=filled, fillcolor=black, fontcolor=white");
            }
            if let Some(a) = annotations.get(&v) {
                let _ = write!(attrs, ", tooltip=\"{}\"", escape(&a.role));
            }
            let _ = writeln!(out, "  {v} [{attrs}];");
        }
        for (u, v, l) in self.edges() {
            // loops are rendered through the vertex fill
            if u == v {
                continue;
            }
            let style = match l {
                Label::Unprotected => "solid",
                Label::Protected => "dashed",
            };
            let _ = writeln!(out, "  {u} -- {v} [style={style}];");
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexDoc {
    pub id: VertexId,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub ann: Option<VertexAnnotation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub u: VertexId,
    pub v: VertexId,
    pub label: Label,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unprotected_dominates() {
        let mut g = LabelledGraph::with_vertices(2);
        g.add_edge(0, 1, Label::Protected).unwrap();
        g.add_edge(1, 0, Label::Unprotected).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.label(0, 1), Some(Label::Unprotected));
        g.add_edge(0, 1, Label::Protected).unwrap();
        assert_eq!(g.label(0, 1), Some(Label::Unprotected));
    }

    #[test]
    fn protected_twice_is_idempotent() {
        let mut g = LabelledGraph::with_vertices(2);
        g.add_edge(0, 1, Label::Protected).unwrap();
        g.add_edge(0, 1, Label::Protected).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1, Label::Protected)]);
    }

    #[test]
    fn loops_define_vertex_protection() {
        let mut g = LabelledGraph::with_vertices(3);
        g.add_edge(0, 0, Label::Unprotected).unwrap();
        g.add_edge(2, 2, Label::Protected).unwrap();
        assert!(g.is_unprotected_vertex(0).unwrap());
        assert!(!g.is_unprotected_vertex(1).unwrap());
        assert!(!g.is_unprotected_vertex(2).unwrap());
        assert!(matches!(g.is_unprotected_vertex(3), Err(Error::UnknownVertex(3))));
    }

    #[test]
    fn unknown_vertex_rejected() {
        let mut g = LabelledGraph::with_vertices(1);
        assert!(matches!(g.add_edge(0, 5, Label::Protected), Err(Error::UnknownVertex(5))));
        assert!(g.neighbors(1).is_err());
    }

    #[test]
    fn neighbors_sorted_with_loop() {
        let mut g = LabelledGraph::with_vertices(4);
        g.add_edge(0, 2, Label::Unprotected).unwrap();
        g.add_edge(0, 1, Label::Protected).unwrap();
        g.add_edge(0, 0, Label::Unprotected).unwrap();
        let ids: Vec<_> = g.neighbors(0).unwrap().iter().map(|x| x.0).collect();
        assert_eq!(ids, vec![0, 1, 2]);
        assert!(g.neighbors(3).unwrap().is_empty());
    }

    #[test]
    fn dot_styles() {
        let mut g = LabelledGraph::with_vertices(3);
        g.add_edge(0, 1, Label::Unprotected).unwrap();
        g.add_edge(1, 2, Label::Protected).unwrap();
        g.add_edge(2, 2, Label::Unprotected).unwrap();
        let dot = g.to_dot(&Annotations::new());
        assert!(dot.contains("0 -- 1 [style=solid]"));
        assert!(dot.contains("1 -- 2 [style=dashed]"));
        assert!(dot.contains("2 [label=\"v2\", style=filled"));
        assert!(!dot.contains("0 [label=\"v0\", style=filled"));
    }

    fn arb_graph() -> impl Strategy<Value = Vec<(usize, usize, bool)>> {
        proptest::collection::vec((0usize..6, 0usize..6, any::<bool>()), 0..20)
    }

    proptest! {
        #[test]
        fn json_round_trip(edges in arb_graph(), roles in proptest::collection::vec(any::<bool>(), 6)) {
            let mut g = LabelledGraph::with_vertices(6);
            let mut seen_u = std::collections::HashSet::new();
            for (u, v, p) in edges {
                let l = if p { Label::Protected } else { Label::Unprotected };
                if l == Label::Unprotected { seen_u.insert(EdgeKey::new(u, v)); }
                g.add_edge(u, v, l).unwrap();
            }
            let mut ann = Annotations::new();
            for (i, r) in roles.iter().enumerate() {
                if *r { ann.insert(i, VertexAnnotation::role("x").level(i as i64)); }
            }
            let (h, ann2) = LabelledGraph::from_json(&g.to_json(&ann).unwrap()).unwrap();
            prop_assert_eq!(&g, &h);
            prop_assert_eq!(ann, ann2);
            for v in 0..6 {
                let has = g.neighbors(v).unwrap().contains(&(v, Label::Unprotected));
                prop_assert_eq!(g.is_unprotected_vertex(v).unwrap(), has);
            }
            for k in seen_u {
                prop_assert_eq!(g.label(k.u, k.v), Some(Label::Unprotected));
            }
        }
    }
}
