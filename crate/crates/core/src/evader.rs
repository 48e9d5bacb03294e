//! Robber-favourable graphs: incidence graphs of projective planes over
//! GF(2^k) and their `g`-part products.

use crate::error::{Error, Result};
use crate::graph::{Annotations, Label, LabelledGraph, VertexAnnotation, VertexId};

/// Arithmetic in GF(2^k) for `1 <= k <= 4` with a fixed irreducible modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gf2k {
    k: u32,
    modulus: u32,
}

impl Gf2k {
    pub fn new(k: u32) -> Result<Self> {
        let modulus = match k {
            1 => 0b11,
            2 => 0b111,
            3 => 0b1011,
            4 => 0b10011,
            _ => return Err(Error::Unsupported(format!("GF(2^{k}) is outside the field table"))),
        };
        Ok(Gf2k { k, modulus })
    }

    pub fn order(&self) -> u32 {
        1 << self.k
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        a ^ b
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let mut acc = 0u32;
        let mut a = a;
        let mut b = b;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & (1 << self.k) != 0 {
                a ^= self.modulus;
            }
        }
        acc
    }
}

/// Smallest power of two `>= n`.
pub fn plane_order(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// Normalized representatives (first non-zero coordinate is 1) of the
/// one-dimensional subspaces of GF(q)^3.
fn projective_points(field: &Gf2k) -> Vec<[u32; 3]> {
    let q = field.order();
    let mut out = Vec::new();
    for a in 0..q {
        for b in 0..q {
            out.push([1, a, b]);
        }
    }
    for b in 0..q {
        out.push([0, 1, b]);
    }
    out.push([0, 0, 1]);
    out
}

/// Incidence graph of the projective plane of order `plane_order(n)`, all
/// edges unprotected. Order 1 is the degenerate triangle plane (a 6-cycle).
pub fn projective_plane_incidence(n: usize) -> Result<(LabelledGraph, Annotations)> {
    if n == 0 {
        return Err(Error::Unsupported("the evader graph needs at least one cop".into()));
    }
    let q = plane_order(n);
    let mut g = LabelledGraph::new();
    let mut ann = Annotations::new();
    let incidences: Vec<(usize, usize)>;
    let count;
    if q == 1 {
        count = 3;
        // line i holds every point except point i
        incidences = (0..3).flat_map(|l| (0..3).filter(move |&p| p != l).map(move |p| (p, l))).collect();
    } else {
        let field = Gf2k::new(q.trailing_zeros())?;
        let pts = projective_points(&field);
        count = pts.len();
        incidences = (0..count)
            .flat_map(|p| (0..count).map(move |l| (p, l)))
            .filter(|&(p, l)| {
                let (x, y) = (pts[p], pts[l]);
                let dot = (0..3).fold(0, |acc, i| field.add(acc, field.mul(x[i], y[i])));
                dot == 0
            })
            .collect();
    }
    for p in 0..count {
        let id = g.add_vertex(format!("p{p}"));
        ann.insert(id, VertexAnnotation::role("point").track(p as i64));
    }
    for l in 0..count {
        let id = g.add_vertex(format!("l{l}"));
        ann.insert(id, VertexAnnotation::role("line").track(l as i64));
    }
    for (p, l) in incidences {
        g.add_edge(p, count + l, Label::Unprotected)?;
    }
    Ok((g, ann))
}

/// Graph partitioned into parts `H_1..H_g`.
#[derive(Clone, Debug)]
pub struct PartedGraph {
    pub graph: LabelledGraph,
    pub parts: Vec<Vec<VertexId>>,
}

impl PartedGraph {
    /// Vertex `(i, p)` for part `i` (0-based) and base vertex `p`.
    pub fn vertex(&self, part: usize, base: VertexId) -> VertexId {
        self.parts[part][base]
    }
}

/// Product over `{0..g} x V(P)`: `(i,p) ~ (j,q)` iff `p ~ q` in `P`, or
/// `p = q` with `i != j`. Each part is a copy of `P`; a robber evading on the
/// `P` coordinate may pick any part freely.
pub fn evader_product(p: &LabelledGraph, g: usize) -> PartedGraph {
    let np = p.vertex_count();
    let mut graph = LabelledGraph::new();
    let parts: Vec<Vec<VertexId>> = (0..g)
        .map(|i| (0..np).map(|v| graph.add_vertex(format!("{i}:{}", p.name(v)))).collect())
        .collect();
    for i in 0..g {
        for j in i..g {
            for a in 0..np {
                for b in 0..np {
                    let joined = if i == j { a < b && p.label(a, b).is_some() } else { a == b || p.label(a, b).is_some() };
                    if joined {
                        graph.add_edge(parts[i][a], parts[j][b], Label::Unprotected).expect("fresh ids");
                    }
                }
            }
        }
    }
    PartedGraph { graph, parts }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn girth(g: &LabelledGraph) -> usize {
        let n = g.vertex_count();
        let mut best = usize::MAX;
        for s in 0..n {
            let mut dist = vec![usize::MAX; n];
            let mut parent = vec![usize::MAX; n];
            dist[s] = 0;
            let mut q = std::collections::VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                for &(w, _) in g.adj(v) {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        parent[w] = v;
                        q.push_back(w);
                    } else if parent[v] != w {
                        best = best.min(dist[v] + dist[w] + 1);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn field_axioms_small() {
        for k in 1..=4 {
            let f = Gf2k::new(k).unwrap();
            let q = f.order();
            for a in 1..q {
                // every non-zero element has an inverse
                assert!((1..q).any(|b| f.mul(a, b) == 1), "k={k} a={a}");
                for b in 0..q {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                }
            }
        }
        assert!(Gf2k::new(5).is_err());
    }

    #[test]
    fn heawood_for_two_cops() {
        let (g, _) = projective_plane_incidence(2).unwrap();
        assert_eq!(g.vertex_count(), 14);
        assert_eq!(g.edge_count(), 21);
        assert!((0..14).all(|v| g.degree(v) == 3));
        assert_eq!(girth(&g), 6);
    }

    #[test]
    fn one_cop_gives_hexagon() {
        let (g, _) = projective_plane_incidence(1).unwrap();
        assert_eq!(g.vertex_count(), 6);
        assert_eq!(g.edge_count(), 6);
        assert!((0..6).all(|v| g.degree(v) == 2));
        assert!(g.is_connected());
    }

    #[test]
    fn order_four_plane() {
        let (g, ann) = projective_plane_incidence(3).unwrap();
        assert_eq!(g.vertex_count(), 42);
        assert!((0..42).all(|v| g.degree(v) == 5));
        // bipartite: edges only between points and lines
        for (u, v, _) in g.edges() {
            assert_ne!(ann[&u].role, ann[&v].role);
        }
        assert_eq!(girth(&g), 6);
    }

    #[test]
    fn large_orders() {
        let (g, _) = projective_plane_incidence(16).unwrap();
        assert_eq!(g.vertex_count(), 2 * (256 + 16 + 1));
        assert!(projective_plane_incidence(17).is_err());
        assert!(projective_plane_incidence(0).is_err());
    }

    #[test]
    fn product_counts() {
        let mut k2 = LabelledGraph::with_vertices(2);
        k2.add_edge(0, 1, Label::Unprotected).unwrap();
        let h = evader_product(&k2, 2);
        assert_eq!(h.graph.vertex_count(), 4);
        // two within-part edges, two crossing along P, two joining equal coordinates
        assert_eq!(h.graph.edge_count(), 6);
        let (p, _) = projective_plane_incidence(1).unwrap();
        assert_eq!(evader_product(&p, 1).graph.edge_count(), 6);
        for g in 1..4 {
            let h = evader_product(&p, g);
            assert_eq!(h.graph.vertex_count(), g * 6);
            assert_eq!(h.parts.len(), g);
            // each part is a copy of P
            let (sub, _) = h.graph.induced(&h.parts[0]);
            assert_eq!(sub.edge_count(), p.edge_count());
            assert_eq!(h.graph.edge_count(), g * 6 + g * (g - 1) / 2 * (2 * 6 + 6));
        }
    }
}
