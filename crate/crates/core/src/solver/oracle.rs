//! Depth-bounded minimax, memoized per (position, depth) layer.
//!
//! Shares nothing with the attractor except the graph type: positions are
//! enumerated forward with their own move generator, and the value
//! "cops force capture within `d` plies" is computed for increasing `d` until
//! it stops changing or the ply bound `|V|^(n+1)` is reached.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::game::{GameSpec, Position, Side};
use crate::graph::{Label, LabelledGraph, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rules {
    /// Capture only by traversing an unprotected edge (or loop).
    Protected,
    /// Classic rules on the underlying simple graph: capture whenever a cop
    /// and the robber share a vertex, whoever moved.
    NativeCr,
}

struct Node {
    side: Side,
    /// For cops: some move captures. For robber: every move is a capture (native only).
    immediate: bool,
    succ: Vec<usize>,
}

fn closed_nbhd(g: &LabelledGraph, v: VertexId) -> Vec<VertexId> {
    let mut out = vec![v];
    out.extend(g.adj(v).iter().map(|&(w, _)| w).filter(|&w| w != v));
    out
}

fn cop_destinations(g: &LabelledGraph, cops: &[VertexId]) -> Vec<Vec<VertexId>> {
    let mut acc: Vec<Vec<VertexId>> = vec![Vec::new()];
    for &c in cops {
        let mut next = Vec::new();
        for partial in &acc {
            for w in closed_nbhd(g, c) {
                let mut p = partial.clone();
                p.push(w);
                next.push(p);
            }
        }
        acc = next;
    }
    for d in &mut acc {
        d.sort_unstable();
    }
    acc.sort();
    acc.dedup();
    acc
}

/// Winner from `start` with `cops` cops under the given rules. `max_states`
/// bounds the explored position count.
pub fn minimax(g: &LabelledGraph, start: &Position, rules: Rules, max_states: usize) -> Result<Side> {
    let nv = g.vertex_count();
    if rules == Rules::NativeCr && start.cops.contains(&start.robber) {
        return Ok(Side::Cops);
    }
    let mut index: HashMap<Position, usize> = HashMap::new();
    let mut nodes: Vec<Node> = Vec::new();
    let mut order = vec![start.clone()];
    index.insert(start.clone(), 0);
    let mut i = 0;
    while i < order.len() {
        if order.len() > max_states {
            return Err(Error::Infeasible { estimate: order.len() as u128, budget: max_states as u128 });
        }
        let pos = order[i].clone();
        i += 1;
        let mut succ_pos = Vec::new();
        let immediate;
        match pos.to_move {
            Side::Cops => {
                immediate = match rules {
                    Rules::Protected => pos.cops.iter().any(|&c| g.label(c, pos.robber) == Some(Label::Unprotected)),
                    Rules::NativeCr => pos.cops.iter().any(|&c| c == pos.robber || g.label(c, pos.robber).is_some()),
                };
                if !immediate {
                    for d in cop_destinations(g, &pos.cops) {
                        succ_pos.push(Position { cops: d, robber: pos.robber, to_move: Side::Robber });
                    }
                }
            }
            Side::Robber => {
                let mut all_capture = true;
                for r in closed_nbhd(g, pos.robber) {
                    if rules == Rules::NativeCr && pos.cops.contains(&r) {
                        continue;
                    }
                    all_capture = false;
                    succ_pos.push(Position { cops: pos.cops.clone(), robber: r, to_move: Side::Cops });
                }
                immediate = rules == Rules::NativeCr && all_capture;
            }
        }
        let mut succ = Vec::with_capacity(succ_pos.len());
        for p in succ_pos {
            let id = *index.entry(p.clone()).or_insert_with(|| {
                order.push(p);
                order.len() - 1
            });
            succ.push(id);
        }
        nodes.push(Node { side: pos.to_move, immediate, succ });
    }

    let bound = (nv as u128).saturating_pow(start.cops.len() as u32 + 1);
    let mut win = vec![false; nodes.len()];
    let mut depth: u128 = 0;
    loop {
        depth += 1;
        let next: Vec<bool> = nodes
            .iter()
            .map(|n| {
                n.immediate
                    || match n.side {
                        Side::Cops => n.succ.iter().any(|&s| win[s]),
                        Side::Robber => !n.succ.is_empty() && n.succ.iter().all(|&s| win[s]),
                    }
            })
            .collect();
        let stable = next == win;
        win = next;
        if stable || depth >= bound {
            break;
        }
    }
    Ok(if win[0] { Side::Cops } else { Side::Robber })
}

/// Oracle on a fixed-start spec. Native rules read the spec graph as a simple
/// graph, which for a lowered instance is the original one.
pub fn minimax_oracle(spec: &GameSpec, rules: Rules, max_states: usize) -> Result<Side> {
    let start = spec
        .start_position()
        .ok_or_else(|| Error::InvalidGame("oracle needs a fixed start".into()))?;
    spec.check_position(&start)?;
    minimax(&spec.graph, &start, rules, max_states)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2_adjacent_capture() {
        let mut g = LabelledGraph::with_vertices(2);
        g.add_edge(0, 1, Label::Unprotected).unwrap();
        for first in [Side::Cops, Side::Robber] {
            let start = Position::new(vec![0], 1, first);
            assert_eq!(minimax(&g, &start, Rules::NativeCr, 1000).unwrap(), Side::Cops);
        }
        let start = Position::new(vec![0], 1, Side::Cops);
        assert_eq!(minimax(&g, &start, Rules::Protected, 1000).unwrap(), Side::Cops);
    }

    #[test]
    fn protected_edge_never_captures() {
        let mut g = LabelledGraph::with_vertices(2);
        g.add_edge(0, 1, Label::Protected).unwrap();
        let start = Position::new(vec![0], 1, Side::Cops);
        assert_eq!(minimax(&g, &start, Rules::Protected, 1000).unwrap(), Side::Robber);
        assert_eq!(minimax(&g, &start, Rules::NativeCr, 1000).unwrap(), Side::Cops);
    }

    #[test]
    fn native_cycle() {
        let mut g = LabelledGraph::with_vertices(4);
        for i in 0..4 {
            g.add_edge(i, (i + 1) % 4, Label::Unprotected).unwrap();
        }
        assert_eq!(minimax(&g, &Position::new(vec![0], 2, Side::Cops), Rules::NativeCr, 1000).unwrap(), Side::Robber);
        assert_eq!(minimax(&g, &Position::new(vec![0, 0], 2, Side::Cops), Rules::NativeCr, 1000).unwrap(), Side::Cops);
    }

    #[test]
    fn state_cap() {
        let mut g = LabelledGraph::with_vertices(8);
        for v in 1..8 {
            g.add_edge(0, v, Label::Protected).unwrap();
        }
        assert!(minimax(&g, &Position::new(vec![0, 1], 2, Side::Cops), Rules::Protected, 2).is_err());
    }
}
