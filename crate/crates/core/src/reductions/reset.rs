//! Two reset mechanisms joined in a circle by `4n+4` gadget copies, with an
//! elective start and `2n+2` cops.
//!
//! Circular levels: mechanism `m` occupies levels `o, o+1, o+2` with
//! `o = m(2n+4)`; copies attached below it occupy `o+3 ..= o+2n+4`, whose
//! last level is the first level of the other mechanism.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::game::{GameSpec, Side, Start, Variant};
use crate::graph::{Annotations, Label, LabelledGraph, VertexAnnotation, VertexId};
use crate::qbf::Qbf;

use super::gphi::{add_body, BodyTag, GphiLayout};
use super::{digest, ReductionOutput};

#[derive(Clone, Copy, Debug, Default)]
pub struct CrpOptions {
    /// Label every level-2 completion edge unprotected, as the construction
    /// text literally reads. The default protects completion edges touching
    /// an `a''` vertex so that each cop threatens at most one `a''`.
    pub literal_level2: bool,
}

pub const ROLE_A1: &str = "reset-a-prime";
pub const ROLE_A2: &str = "reset-a-double-prime";
pub const ROLE_B1: &str = "reset-b-prime";
pub const ROLE_B2: &str = "reset-b-double-prime";

/// Vertices of one reset mechanism, index `i - 1` for `a'_i` and so on.
#[derive(Clone, Debug, Default)]
pub struct Mechanism {
    pub a1: Vec<VertexId>,
    pub a2: Vec<VertexId>,
    pub b1: Vec<VertexId>,
    pub b2: Vec<VertexId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Place {
    /// `kind` is one of the reset roles; `index` is 1-based.
    Reset { mechanism: usize, kind: &'static str, index: usize },
    Copy { mechanism: usize, copy: usize },
}

#[derive(Clone, Debug)]
pub struct ResetLayout {
    pub n: usize,
    pub mechanisms: [Mechanism; 2],
    /// `copies[m][i - 1]`: copy `i` whose top hangs below mechanism `m`.
    pub copies: [Vec<GphiLayout>; 2],
    places: HashMap<VertexId, Place>,
}

impl ResetLayout {
    pub fn size(&self) -> usize {
        2 * self.n + 2
    }

    pub fn level_count(&self) -> usize {
        4 * self.n + 8
    }

    pub fn offset(&self, mechanism: usize) -> usize {
        mechanism * (2 * self.n + 4)
    }

    pub fn place(&self, v: VertexId) -> Option<Place> {
        self.places.get(&v).copied()
    }

    pub fn copy(&self, mechanism: usize, copy: usize) -> &GphiLayout {
        &self.copies[mechanism][copy - 1]
    }

    /// First level of mechanism `m`: bottoms of the copies hanging below the
    /// other mechanism.
    pub fn level1(&self, mechanism: usize) -> Vec<VertexId> {
        self.copies[1 - mechanism].iter().flat_map(|c| c.bottom()).collect()
    }

    /// Target of the `t`-th track start of copy `i`: `b'_{σ_i(t)}` with
    /// `σ_i(t) = i + t` cyclically, skipping `i - 1` and `i`.
    pub fn sigma(&self, copy: usize, track: usize) -> usize {
        (copy - 1 + track) % self.size() + 1
    }

    pub fn from_annotations(ann: &Annotations, n: usize) -> Result<ResetLayout> {
        let size = 2 * n + 2;
        let levels = (4 * n + 8) as i64;
        let mut mechanisms = [Mechanism::default(), Mechanism::default()];
        for m in &mut mechanisms {
            for list in [&mut m.a1, &mut m.a2, &mut m.b1, &mut m.b2] {
                *list = vec![usize::MAX; size];
            }
        }
        let mut places = HashMap::new();
        for (&v, a) in ann {
            let kind = match a.role.as_str() {
                ROLE_A1 => ROLE_A1,
                ROLE_A2 => ROLE_A2,
                ROLE_B1 => ROLE_B1,
                ROLE_B2 => ROLE_B2,
                _ => continue,
            };
            let (m, i) = match (a.mechanism, a.track) {
                (Some(m @ 0..=1), Some(i)) if i >= 1 && (i as usize) <= size => (m as usize, i as usize),
                _ => return Err(Error::Format(format!("reset vertex {v} lacks mechanism or index"))),
            };
            let mech = &mut mechanisms[m];
            let list = match kind {
                ROLE_A1 => &mut mech.a1,
                ROLE_A2 => &mut mech.a2,
                ROLE_B1 => &mut mech.b1,
                _ => &mut mech.b2,
            };
            list[i - 1] = v;
            places.insert(v, Place::Reset { mechanism: m, kind, index: i });
        }
        if mechanisms.iter().any(|m| [&m.a1, &m.a2, &m.b1, &m.b2].iter().any(|l| l.contains(&usize::MAX))) {
            return Err(Error::Format("reset mechanism is incomplete".into()));
        }
        let mut copies: [Vec<GphiLayout>; 2] = [Vec::new(), Vec::new()];
        for (m, list) in copies.iter_mut().enumerate() {
            for i in 1..=size {
                let shift = (m * (2 * n + 4) + 2) as i64;
                let lay = GphiLayout::from_annotations(ann, n, shift, Some(levels), |a| {
                    a.mechanism == Some(m as i64) && a.copy == Some(i as i64)
                })?;
                for v in lay.vertices() {
                    places.insert(v, Place::Copy { mechanism: m, copy: i });
                }
                list.push(lay);
            }
        }
        Ok(ResetLayout { n, mechanisms, copies, places })
    }
}

pub fn qbf_to_crp(q: &Qbf, options: CrpOptions) -> Result<ReductionOutput> {
    let n = q.n();
    let size = 2 * n + 2;
    let levels = 4 * n + 8;
    let mut warnings = Vec::new();
    if 2 * n < 8 {
        warnings.push(format!("formula has {} variables; the cops' strategy argument assumes at least 8", 2 * n));
    }
    if !q.has_nonempty_clause() {
        warnings.push("formula has no non-empty clause; the graph is disconnected".into());
    }

    let mut g = LabelledGraph::new();
    let mut ann = Annotations::new();
    // bodies[m][i-1]
    let mut bodies = [Vec::new(), Vec::new()];
    for (m, list) in bodies.iter_mut().enumerate() {
        let offset = m * (n + n + 4);
        let level = move |l: usize| ((offset + 2 + l) % levels) as i64;
        for i in 1..=size {
            let prefix = format!("M{m}.K{i}.");
            let tag = BodyTag { prefix: &prefix, level: &level, copy: Some(i as i64), mechanism: Some(m as i64) };
            list.push(add_body(&mut g, &mut ann, q, &tag)?);
        }
    }

    for m in 0..2 {
        let offset = (m * (2 * n + 4)) as i64;
        let mut add = |g: &mut LabelledGraph, name: &str, role: &str, i: usize, level: i64, looped: bool| {
            let id = g.add_vertex(format!("M{m}.{name}_{i}"));
            if looped {
                g.add_edge(id, id, Label::Unprotected).expect("fresh vertex");
            }
            ann.insert(id, VertexAnnotation::role(role).level(offset + level).track(i as i64).mechanism(m as i64));
            id
        };
        let a1: Vec<VertexId> = (1..=size).map(|i| add(&mut g, "a'", ROLE_A1, i, 1, true)).collect();
        let a2: Vec<VertexId> = (1..=size).map(|i| add(&mut g, "a''", ROLE_A2, i, 1, false)).collect();
        let b1: Vec<VertexId> = (1..=size).map(|i| add(&mut g, "b'", ROLE_B1, i, 2, true)).collect();
        let b2: Vec<VertexId> = (1..=size).map(|i| add(&mut g, "b''", ROLE_B2, i, 2, true)).collect();

        let level1: Vec<VertexId> =
            bodies[1 - m].iter().flat_map(|b| b.clauses.iter().chain(&b.chain_ends).copied()).collect();
        let completion = if options.literal_level2 { Label::Unprotected } else { Label::Protected };
        for i in 0..size {
            g.add_edge(a1[i], a2[i], Label::Unprotected)?;
            for &v in &level1 {
                g.add_edge(a1[i], v, Label::Unprotected)?;
                g.add_edge(a2[i], v, Label::Protected)?;
            }
            for j in 0..size {
                if i < j {
                    g.add_edge(a1[i], a1[j], Label::Unprotected)?;
                    g.add_edge(a2[i], a2[j], completion)?;
                    g.add_edge(b1[i], b1[j], Label::Unprotected)?;
                    g.add_edge(b2[i], b2[j], Label::Unprotected)?;
                }
                if i != j {
                    g.add_edge(a1[i], a2[j], completion)?;
                }
            }
            g.add_edge(b1[i], a1[i], Label::Unprotected)?;
            g.add_edge(b2[i], a2[i], Label::Protected)?;
        }
        for (i0, body) in bodies[m].iter().enumerate() {
            g.add_edge(body.robber_start, b2[i0], Label::Unprotected)?;
            for (t0, &c) in body.track_starts.iter().enumerate() {
                let target = (i0 + t0 + 1) % size;
                g.add_edge(c, b1[target], Label::Unprotected)?;
            }
        }
    }

    let spec = GameSpec::new(g, size, Variant::Crp, Start::Elective { first: Side::Cops })?;
    let text = q.to_json()?;
    Ok(ReductionOutput {
        spec,
        annotations: ann,
        projection: None,
        meta: BTreeMap::from([
            ("source".into(), digest(&text)),
            ("reduction".into(), "qbf2crp".into()),
            ("pairs".into(), n.to_string()),
            ("levels".into(), levels.to_string()),
            (
                "level2-completion".into(),
                if options.literal_level2 { "literal-unprotected" } else { "protected-at-a-double-prime" }.into(),
            ),
        ]),
        warnings,
    })
}

impl ReductionOutput {
    /// Reset layout of a `qbf_to_crp` output.
    pub fn reset_layout(&self) -> Result<ResetLayout> {
        let n: usize = self
            .meta
            .get("pairs")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format("instance carries no gadget metadata".into()))?;
        ResetLayout::from_annotations(&self.annotations, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_pair() -> Qbf {
        Qbf::new(1, vec![vec![1, 2], vec![-1, 2]]).unwrap()
    }

    #[test]
    fn counts_and_warnings() {
        let out = qbf_to_crp(&one_pair(), CrpOptions::default()).unwrap();
        let lay = out.reset_layout().unwrap();
        assert_eq!(lay.copies[0].len() + lay.copies[1].len(), 8);
        assert_eq!(lay.mechanisms[0].a1.len(), 4);
        assert_eq!(out.spec.cops, 4);
        assert!(out.warnings.iter().any(|w| w.contains("at least 8")));
        assert_eq!(out.meta["levels"], "12");
    }

    #[test]
    fn double_prime_vertices_have_one_unprotected_edge() {
        let out = qbf_to_crp(&one_pair(), CrpOptions::default()).unwrap();
        let lay = out.reset_layout().unwrap();
        let g = &out.spec.graph;
        for m in &lay.mechanisms {
            for (i, &v) in m.a2.iter().enumerate() {
                let u: Vec<_> = g.adj(v).iter().filter(|&&(_, l)| l == Label::Unprotected).collect();
                assert_eq!(u.len(), 1);
                assert_eq!(u[0].0, m.a1[i]);
            }
        }
        let literal = qbf_to_crp(&one_pair(), CrpOptions { literal_level2: true }).unwrap();
        let v = literal.reset_layout().unwrap().mechanisms[0].a2[0];
        assert!(literal.spec.graph.adj(v).iter().filter(|&&(_, l)| l == Label::Unprotected).count() > 1);
    }

    #[test]
    fn track_wiring_skips_own_and_previous_index() {
        let out = qbf_to_crp(&Qbf::new(2, vec![vec![1, 2, 3, 4]]).unwrap(), CrpOptions::default()).unwrap();
        let lay = out.reset_layout().unwrap();
        let g = &out.spec.graph;
        for m in 0..2 {
            for i in 1..=6 {
                let copy = lay.copy(m, i);
                let mut hit: Vec<usize> = Vec::new();
                for &c in &copy.track_starts() {
                    for &(w, _) in g.adj(c) {
                        if let Some(j) = lay.mechanisms[m].b1.iter().position(|&b| b == w) {
                            hit.push(j + 1);
                        }
                    }
                }
                hit.sort();
                let prev = if i == 1 { 6 } else { i - 1 };
                let expected: Vec<usize> = (1..=6).filter(|&j| j != i && j != prev).collect();
                assert_eq!(hit, expected, "copy {i}");
                let r = copy.robber_start().unwrap();
                assert!(g.label(r, lay.mechanisms[m].b2[i - 1]).is_some());
            }
        }
    }
}
