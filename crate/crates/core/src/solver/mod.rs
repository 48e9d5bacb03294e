//! Exact winner determination.
//!
//! [`solve_fixed`] and [`solve_elective`] run the attractor in
//! [`attractor`]; [`oracle`] is an independent depth-bounded minimax used to
//! cross-check it, including a native (unlowered) Cops-and-Robber rule set.

pub mod attractor;
pub mod oracle;
pub mod play;

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{self, GameSpec, Move, Position, Side, Start, Step};
use crate::graph::VertexId;

pub use attractor::{estimate_keys, Attractor};
pub use oracle::{minimax, minimax_oracle, Rules};
pub use play::play;

/// Default cap on packed state keys.
pub const DEFAULT_BUDGET: u128 = 500_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceMode {
    Reachable,
    Full,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub budget: u128,
    pub mode: SpaceMode,
    /// Keep the solved table in the result (needed for strategy extraction).
    pub retain: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { budget: DEFAULT_BUDGET, mode: SpaceMode::Reachable, retain: true }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub states: u64,
    pub iterations: u64,
    pub micros: u64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub winner: Side,
    /// Witnessing cop placement for elective games won by the cops.
    pub placement: Option<Vec<VertexId>>,
    pub stats: Stats,
    pub table: Option<Arc<Attractor>>,
}

impl SolveResult {
    pub fn table(&self) -> Result<&Attractor> {
        self.table.as_deref().ok_or(Error::NotWon)
    }
}

fn stats(a: &Attractor, t: Instant) -> Stats {
    Stats {
        states: a.state_count() as u64,
        iterations: a.max_rank() as u64,
        micros: t.elapsed().as_micros() as u64,
    }
}

pub fn solve_fixed(spec: &GameSpec, opts: SolveOptions) -> Result<SolveResult> {
    let start = spec
        .start_position()
        .ok_or_else(|| Error::InvalidGame("solve_fixed needs a fixed start".into()))?;
    spec.check_position(&start)?;
    let t = Instant::now();
    let starts = [start.clone()];
    let a = attractor::compute(
        spec,
        match opts.mode {
            SpaceMode::Reachable => Some(&starts[..]),
            SpaceMode::Full => None,
        },
        opts.budget,
    )?;
    let winner = if a.is_cop_win(&start) { Side::Cops } else { Side::Robber };
    Ok(SolveResult {
        winner,
        placement: None,
        stats: stats(&a, t),
        table: opts.retain.then(|| Arc::new(a)),
    })
}

/// Cops win iff some placement beats every robber placement, where play
/// then starts with the spec's first mover. One full-space pass serves all
/// placements.
pub fn solve_elective(spec: &GameSpec, opts: SolveOptions) -> Result<SolveResult> {
    let first = match spec.start {
        Start::Elective { first } => first,
        Start::Fixed { .. } => return Err(Error::InvalidGame("solve_elective needs an elective start".into())),
    };
    let t = Instant::now();
    let a = attractor::compute(spec, None, opts.budget)?;
    let placement = elective_witness(&a, spec.graph.vertex_count(), first);
    Ok(SolveResult {
        winner: if placement.is_some() { Side::Cops } else { Side::Robber },
        placement,
        stats: stats(&a, t),
        table: opts.retain.then(|| Arc::new(a)),
    })
}

/// First cop placement (in rank order) from which every robber placement loses.
pub fn elective_witness(a: &Attractor, nv: usize, first: Side) -> Option<Vec<VertexId>> {
    let ms = a.multisets();
    (0..ms.len()).find_map(|m| {
        let cops: Vec<VertexId> = ms.get(m).iter().map(|&c| c as usize).collect();
        (0..nv)
            .all(|r| a.is_cop_win(&Position { cops: cops.clone(), robber: r, to_move: first }))
            .then_some(cops)
    })
}

/// Solves according to the spec's start mode.
pub fn solve(spec: &GameSpec, opts: SolveOptions) -> Result<SolveResult> {
    match spec.start {
        Start::Elective { .. } => solve_elective(spec, opts),
        Start::Fixed { .. } => solve_fixed(spec, opts),
    }
}

/// A move for the side to move that keeps it in its winning region; for the
/// cops it also lowers the attractor rank by one.
pub fn extract_move(spec: &GameSpec, table: &Attractor, pos: &Position) -> Result<Move> {
    spec.check_position(pos)?;
    if !table.contains(pos) {
        return Err(Error::NotWon);
    }
    match (pos.to_move, table.rank(pos)) {
        (Side::Cops, Some(1)) => Ok(game::capturing_move(spec, pos).expect("rank 1 means a capture exists")),
        (Side::Cops, Some(rk)) => {
            for mv in game::legal_moves(spec, pos)? {
                let (next, _) = game::apply(spec, pos, &mv)?;
                if table.rank(&next) == Some(rk - 1) {
                    return Ok(mv);
                }
            }
            unreachable!("attractor rank without a descending successor")
        }
        (Side::Robber, None) => {
            for mv in game::legal_moves(spec, pos)? {
                let (next, _) = game::apply(spec, pos, &mv)?;
                if !table.is_cop_win(&next) {
                    return Ok(mv);
                }
            }
            unreachable!("robber-win key without an escaping successor")
        }
        _ => Err(Error::NotWon),
    }
}

/// Optimal move when winning, otherwise the move that delays capture longest
/// (robber) or keeps the position (cops).
pub fn solver_move(spec: &GameSpec, table: &Attractor, pos: &Position) -> Result<Move> {
    match extract_move(spec, table, pos) {
        Ok(m) => Ok(m),
        Err(Error::NotWon) => match pos.to_move {
            Side::Cops => Ok(Move::Cops(vec![Step::Stay; pos.cops.len()])),
            Side::Robber => {
                let mut best = None;
                for mv in game::legal_moves(spec, pos)? {
                    let (next, _) = game::apply(spec, pos, &mv)?;
                    let r = table.rank(&next).unwrap_or(u32::MAX);
                    if best.as_ref().map_or(true, |(br, _)| r > *br) {
                        best = Some((r, mv));
                    }
                }
                Ok(best.expect("stay is always legal").1)
            }
        },
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Variant;
    use crate::graph::{Label, LabelledGraph};

    fn cr(edges: &[(usize, usize)], n: usize, cops: usize, start: Start) -> GameSpec {
        let mut g = LabelledGraph::with_vertices(n);
        for &(u, v) in edges {
            g.add_edge(u, v, Label::Unprotected).unwrap();
        }
        GameSpec::new(g, cops, Variant::Cr, start).unwrap()
    }

    fn fixed(cops: Vec<usize>, robber: usize, first: Side) -> Start {
        Start::Fixed { cops, robber, first }
    }

    const C4: [(usize, usize); 4] = [(0, 1), (1, 2), (2, 3), (3, 0)];

    #[test]
    fn path_is_cop_win_from_middle() {
        let spec = cr(&[(0, 1), (1, 2)], 3, 1, fixed(vec![1], 0, Side::Cops));
        assert_eq!(solve_fixed(&spec, SolveOptions::default()).unwrap().winner, Side::Cops);
    }

    #[test]
    fn c4_one_cop_fixed_is_robber_win() {
        for (c, r) in [(0, 2), (0, 1)] {
            let spec = cr(&C4, 4, 1, fixed(vec![c], r, Side::Robber));
            assert_eq!(solve_fixed(&spec, SolveOptions::default()).unwrap().winner, Side::Robber);
        }
        // adjacent with cops to move is an immediate capture
        let spec = cr(&C4, 4, 1, fixed(vec![0], 2, Side::Cops));
        assert_eq!(solve_fixed(&spec, SolveOptions::default()).unwrap().winner, Side::Robber);
    }

    #[test]
    fn two_path_forced_capture() {
        let spec = cr(&[(0, 1)], 2, 1, fixed(vec![0], 1, Side::Cops));
        let res = solve_fixed(&spec, SolveOptions::default()).unwrap();
        assert_eq!(res.winner, Side::Cops);
        let start = spec.start_position().unwrap();
        assert_eq!(res.table().unwrap().rank(&start), Some(1));
        let mv = extract_move(&spec, res.table().unwrap(), &start).unwrap();
        assert!(game::apply(&spec, &start, &mv).unwrap().1);
    }

    #[test]
    fn elective_cycles() {
        let e = Start::Elective { first: Side::Cops };
        let one = solve_elective(&cr(&C4, 4, 1, e.clone()), SolveOptions::default()).unwrap();
        assert_eq!(one.winner, Side::Robber);
        assert!(one.placement.is_none());
        let two = solve_elective(&cr(&C4, 4, 2, e), SolveOptions::default()).unwrap();
        assert_eq!(two.winner, Side::Cops);
        assert!(two.placement.is_some());
    }

    #[test]
    fn reachable_and_full_agree() {
        let spec = cr(&[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)], 5, 1, fixed(vec![0], 3, Side::Robber));
        let a = solve_fixed(&spec, SolveOptions { mode: SpaceMode::Reachable, ..Default::default() }).unwrap();
        let b = solve_fixed(&spec, SolveOptions { mode: SpaceMode::Full, ..Default::default() }).unwrap();
        assert_eq!(a.winner, b.winner);
        assert!(a.stats.states <= b.stats.states);
    }

    #[test]
    fn budget_guard() {
        let spec = cr(&C4, 4, 2, Start::Elective { first: Side::Cops });
        let err = solve_elective(&spec, SolveOptions { budget: 10, ..Default::default() }).unwrap_err();
        assert!(matches!(err, Error::Infeasible { estimate: 80, budget: 10 }));
    }

    #[test]
    fn extract_rejects_lost_positions() {
        let spec = cr(&C4, 4, 1, fixed(vec![0], 2, Side::Robber));
        let res = solve_fixed(&spec, SolveOptions { mode: SpaceMode::Full, ..Default::default() }).unwrap();
        let t = res.table().unwrap();
        // robber-win position with cops to move
        let p = Position::new(vec![0], 2, Side::Cops);
        assert!(matches!(extract_move(&spec, t, &p), Err(Error::NotWon)));
        let p = Position::new(vec![0], 2, Side::Robber);
        let mv = extract_move(&spec, t, &p).unwrap();
        let (next, _) = game::apply(&spec, &p, &mv).unwrap();
        assert!(!t.is_cop_win(&next));
    }
}
