//! Reduction compilers. Each emits a [`ReductionOutput`]: a game instance plus
//! per-vertex provenance.

pub mod gphi;
pub mod reset;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evader::{evader_product, projective_plane_incidence};
use crate::game::{GameSpec, InstanceDoc, Side, Start, Variant};
use crate::graph::{Annotations, Label, LabelledGraph, VertexAnnotation, VertexId};

pub use gphi::{qbf_to_crps, CrpsOptions, GphiLayout};
pub use reset::{qbf_to_crp, CrpOptions, ResetLayout};

#[derive(Clone, Debug)]
pub struct ReductionOutput {
    pub spec: GameSpec,
    pub annotations: Annotations,
    /// For `crp_to_cr`: vertex of the source graph each vertex projects to.
    pub projection: Option<Vec<VertexId>>,
    pub meta: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

/// On-disk form of a reduction output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReductionDoc {
    #[serde(flatten)]
    pub instance: InstanceDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<Vec<VertexId>>,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl ReductionOutput {
    pub fn to_doc(&self) -> ReductionDoc {
        ReductionDoc {
            instance: self.spec.to_doc(&self.annotations),
            projection: self.projection.clone(),
            meta: self.meta.clone(),
            warnings: self.warnings.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn from_json(text: &str) -> Result<ReductionOutput> {
        let doc: ReductionDoc = serde_json::from_str(text)?;
        let (spec, annotations) = doc.instance.into_spec()?;
        Ok(ReductionOutput { spec, annotations, projection: doc.projection, meta: doc.meta, warnings: doc.warnings })
    }
}

/// Short FNV-1a digest of a source description.
pub(crate) fn digest(text: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

fn graph_digest(g: &LabelledGraph) -> String {
    let edges: Vec<String> = g.edges().map(|(u, v, l)| format!("{u}-{v}{l:?}")).collect();
    digest(&format!("{}|{}", g.vertex_count(), edges.join(",")))
}

/// Plain Cops-and-Robber as a protected-edge game: every edge and every
/// vertex unprotected. Labels of the input are ignored.
pub fn cr_to_crp(g: &LabelledGraph, cops: usize, start: Start) -> Result<ReductionOutput> {
    let lowered = crate::game::lower_cr(g);
    let spec = GameSpec::new(lowered, cops, Variant::Crp, start)?;
    let annotations = (0..g.vertex_count()).map(|v| (v, VertexAnnotation::role("vertex"))).collect();
    Ok(ReductionOutput {
        spec,
        annotations,
        projection: None,
        meta: BTreeMap::from([("source".into(), graph_digest(g)), ("reduction".into(), "cr2crp".into())]),
        warnings: Vec::new(),
    })
}

/// The simulation graph `G'` for a labelled graph `G` and `n` cops, with the
/// projection onto `V(G)`.
pub fn simulation_graph(g: &LabelledGraph, n: usize) -> Result<(LabelledGraph, Vec<VertexId>, Annotations)> {
    let (p, p_ann) = projective_plane_incidence(n)?;
    let h = evader_product(&p, g.vertex_count());
    let mut out = LabelledGraph::new();
    let mut projection = Vec::new();
    let mut ann = Annotations::new();
    for (i, part) in h.parts.iter().enumerate() {
        for (pv, &hv) in part.iter().enumerate() {
            let id = out.add_vertex(format!("{}:{}", g.name(i), h.graph.name(hv).split(':').nth(1).unwrap_or("")));
            debug_assert_eq!(id, hv);
            projection.push(i);
            let mut a = VertexAnnotation::role(format!("part-{}", p_ann[&pv].role)).track(i as i64).copy(pv as i64);
            a.level = None;
            ann.insert(id, a);
        }
    }
    let nh = h.graph.vertex_count();
    for v in 0..nh {
        for w in (v + 1)..nh {
            let (a, b) = (projection[v], projection[w]);
            let base = g.label(a, b);
            let edge = base == Some(Label::Unprotected)
                || (h.graph.label(v, w).is_some() && (a == b || base == Some(Label::Protected)));
            if edge {
                out.add_edge(v, w, Label::Unprotected)?;
            }
        }
    }
    Ok((out, projection, ann))
}

/// Protected-edge game on `G` to a plain game on `G'` with the same cop count
/// (elective start, cops placing and moving first).
pub fn crp_to_cr(g: &LabelledGraph, n: usize) -> Result<ReductionOutput> {
    crp_to_cr_with(g, n, Side::Cops)
}

pub fn crp_to_cr_with(g: &LabelledGraph, n: usize, first: Side) -> Result<ReductionOutput> {
    let (gp, projection, annotations) = simulation_graph(g, n)?;
    let spec = GameSpec::new(gp, n, Variant::Cr, Start::Elective { first })?;
    Ok(ReductionOutput {
        spec,
        annotations,
        projection: Some(projection),
        meta: BTreeMap::from([
            ("source".into(), graph_digest(g)),
            ("reduction".into(), "crp2cr".into()),
            ("plane-order".into(), crate::evader::plane_order(n).to_string()),
        ]),
        warnings: Vec::new(),
    })
}

/// Complete labelled graph: edges of `g` unprotected, non-edges protected,
/// every vertex unprotected; `k` cops with elective start.
pub fn dominating_set_to_crp(g: &LabelledGraph, k: usize) -> Result<ReductionOutput> {
    dominating_set_to_crp_with(g, k, Side::Cops)
}

pub fn dominating_set_to_crp_with(g: &LabelledGraph, k: usize, first: Side) -> Result<ReductionOutput> {
    let nv = g.vertex_count();
    if k == 0 || k >= nv {
        return Err(Error::Reduction(format!("set size {k} must be in 1..{nv}")));
    }
    let mut out = LabelledGraph::new();
    for v in 0..nv {
        out.add_vertex(g.name(v).to_string());
    }
    for u in 0..nv {
        out.add_edge(u, u, Label::Unprotected)?;
        for v in (u + 1)..nv {
            let l = if g.label(u, v).is_some() { Label::Unprotected } else { Label::Protected };
            out.add_edge(u, v, l)?;
        }
    }
    let spec = GameSpec::new(out, k, Variant::Crp, Start::Elective { first })?;
    Ok(ReductionOutput {
        spec,
        annotations: (0..nv).map(|v| (v, VertexAnnotation::role("vertex"))).collect(),
        projection: None,
        meta: BTreeMap::from([("source".into(), graph_digest(g)), ("reduction".into(), "ds2crp".into())]),
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve, SolveOptions};

    fn unlabelled(n: usize, edges: &[(usize, usize)]) -> LabelledGraph {
        let mut g = LabelledGraph::with_vertices(n);
        for &(u, v) in edges {
            g.add_edge(u, v, Label::Unprotected).unwrap();
        }
        g
    }

    #[test]
    fn cr_to_crp_k2() {
        let out = cr_to_crp(&unlabelled(2, &[(0, 1)]), 1, Start::Elective { first: Side::Cops }).unwrap();
        let g = &out.spec.graph;
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![
            (0, 0, Label::Unprotected),
            (0, 1, Label::Unprotected),
            (1, 1, Label::Unprotected)
        ]);
        assert_eq!(out.spec.variant, Variant::Crp);
    }

    #[test]
    fn empty_graph_is_robber_win() {
        let out = cr_to_crp(&unlabelled(3, &[]), 1, Start::Elective { first: Side::Cops }).unwrap();
        assert_eq!(solve(&out.spec, SolveOptions::default()).unwrap().winner, Side::Robber);
    }

    #[test]
    fn simulation_graph_of_triangle() {
        let mut g = LabelledGraph::with_vertices(3);
        g.add_edge(0, 1, Label::Protected).unwrap();
        g.add_edge(1, 2, Label::Unprotected).unwrap();
        g.add_edge(2, 0, Label::Unprotected).unwrap();
        let out = crp_to_cr(&g, 1).unwrap();
        assert_eq!(out.spec.graph.vertex_count(), 18);
        let proj = out.projection.as_ref().unwrap();
        for (u, v, _) in out.spec.graph.edges() {
            assert!(proj[u] == proj[v] || g.label(proj[u], proj[v]).is_some());
        }
    }

    #[test]
    fn protected_k2_is_robber_win_both_ways() {
        let mut g = LabelledGraph::with_vertices(2);
        g.add_edge(0, 1, Label::Protected).unwrap();
        let crp = GameSpec::new(g.clone(), 1, Variant::Crp, Start::Elective { first: Side::Cops }).unwrap();
        assert_eq!(solve(&crp, SolveOptions::default()).unwrap().winner, Side::Robber);
        let cr = crp_to_cr(&g, 1).unwrap();
        assert_eq!(solve(&cr.spec, SolveOptions::default()).unwrap().winner, Side::Robber);
    }

    #[test]
    fn dominating_set_examples() {
        let p3 = unlabelled(3, &[(0, 1), (1, 2)]);
        let out = dominating_set_to_crp(&p3, 1).unwrap();
        assert_eq!(out.spec.graph.edge_count(), 6);
        let res = solve(&out.spec, SolveOptions::default()).unwrap();
        assert_eq!(res.winner, Side::Cops);
        // any placement wins once a dominating vertex exists: the cop walks there
        assert_eq!(res.placement, Some(vec![0]));

        let c4 = unlabelled(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let out = dominating_set_to_crp(&c4, 1).unwrap();
        assert_eq!(solve(&out.spec, SolveOptions::default()).unwrap().winner, Side::Robber);

        let k4 = unlabelled(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let out = dominating_set_to_crp(&k4, 1).unwrap();
        assert_eq!(solve(&out.spec, SolveOptions::default()).unwrap().winner, Side::Cops);

        assert!(dominating_set_to_crp(&p3, 3).is_err());
    }

    #[test]
    fn json_round_trip() {
        let out = crp_to_cr(&unlabelled(2, &[(0, 1)]), 1).unwrap();
        let back = ReductionOutput::from_json(&out.to_json().unwrap()).unwrap();
        assert_eq!(back.spec, out.spec);
        assert_eq!(back.annotations, out.annotations);
        assert_eq!(back.projection, out.projection);
    }
}
