//! Agents: baseline policies, solver-backed play, and the scripted
//! strategies for the gadget and reset constructions.

pub mod gphi;
pub mod reset;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{self, GameSpec, Move, Ply, Position, Side, Step};
use crate::graph::{Label, LabelledGraph, VertexId};
use crate::solver::{self, Attractor};

pub use gphi::{GphiCops, GphiRobber};
pub use reset::{ResetCops, ResetRobber};

/// A policy for one side. Agents hold per-game state; use one instance per game.
pub trait Agent {
    fn name(&self) -> &str;

    fn place_cops(&mut self, spec: &GameSpec) -> Vec<VertexId> {
        vec![0; spec.cops]
    }

    fn place_robber(&mut self, spec: &GameSpec, cops: &[VertexId]) -> VertexId {
        (0..spec.graph.vertex_count()).find(|&v| !game::threatened(&spec.graph, cops, v)).unwrap_or(0)
    }

    fn choose(&mut self, spec: &GameSpec, pos: &Position, history: &[Ply]) -> Move;

    /// Moves made off the scripted line.
    fn fallbacks(&self) -> usize {
        0
    }

    /// Named counters for reports.
    fn counters(&self) -> BTreeMap<String, u64> {
        BTreeMap::from([("fallbacks".to_string(), self.fallbacks() as u64)])
    }
}

pub(crate) fn closed_nbhd(g: &LabelledGraph, v: VertexId) -> Vec<VertexId> {
    let mut out: Vec<VertexId> = g.adj(v).iter().map(|&(w, _)| w).collect();
    if !out.contains(&v) {
        out.push(v);
    }
    out.sort_unstable();
    out
}

fn step_to(from: VertexId, to: VertexId) -> Step {
    if from == to {
        Step::Stay
    } else {
        Step::To(to)
    }
}

/// Vertices from which a cop could capture a robber standing on `r`.
pub(crate) fn threat_set(g: &LabelledGraph, r: VertexId) -> Vec<VertexId> {
    g.adj(r).iter().filter(|&&(_, l)| l == Label::Unprotected).map(|&(w, _)| w).collect()
}

/// Neighbour (or stay) minimizing `dist`, lowest id on ties.
pub(crate) fn step_toward(g: &LabelledGraph, from: VertexId, dist: &[usize]) -> VertexId {
    closed_nbhd(g, from).into_iter().min_by_key(|&w| (dist[w], w)).expect("closed neighbourhood is nonempty")
}

/// Moves each cop one step so that the cops end on `targets` (a multiset of
/// the same size), if such an assignment exists.
pub(crate) fn move_onto(g: &LabelledGraph, cops: &[VertexId], targets: &[VertexId]) -> Option<Move> {
    if cops.len() != targets.len() {
        return None;
    }
    let dest = assign_targets(g, cops, targets)?;
    Some(Move::Cops(cops.iter().zip(dest).map(|(&c, d)| step_to(c, d.expect("perfect matching"))).collect()))
}

/// Assigns every target to a distinct cop within one step. Cops left over
/// get `None`.
pub(crate) fn assign_targets(g: &LabelledGraph, cops: &[VertexId], targets: &[VertexId]) -> Option<Vec<Option<VertexId>>> {
    if targets.len() > cops.len() {
        return None;
    }
    let options: Vec<Vec<usize>> = cops
        .iter()
        .map(|&c| {
            let nb = closed_nbhd(g, c);
            // prefer staying so that idle cops keep their post
            let mut ts: Vec<usize> = (0..targets.len()).filter(|&t| nb.binary_search(&targets[t]).is_ok()).collect();
            ts.sort_by_key(|&t| targets[t] != c);
            ts
        })
        .collect();
    // augmenting paths from the targets' side so that every target is covered
    let mut by_target: Vec<Vec<usize>> = vec![Vec::new(); targets.len()];
    for (c, ts) in options.iter().enumerate() {
        for &t in ts {
            by_target[t].push(c);
        }
    }
    for (t, cs) in by_target.iter_mut().enumerate() {
        cs.sort_by_key(|&c| cops[c] != targets[t]);
    }
    let mut owner: Vec<Option<usize>> = vec![None; cops.len()];
    fn augment(t: usize, by_target: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &c in &by_target[t] {
            if !seen[c] {
                seen[c] = true;
                if owner[c].map_or(true, |o| augment(o, by_target, owner, seen)) {
                    owner[c] = Some(t);
                    return true;
                }
            }
        }
        false
    }
    for t in 0..targets.len() {
        let mut seen = vec![false; cops.len()];
        if !augment(t, &by_target, &mut owner, &mut seen) {
            return None;
        }
    }
    Some(owner.iter().map(|o| o.map(|t| targets[t])).collect())
}

/// Every cop steps toward the nearest vertex from which it could capture,
/// or captures when it already can. Ties go to the lowest vertex id.
pub fn greedy_cop_move(g: &LabelledGraph, pos: &Position) -> Move {
    let threat = threat_set(g, pos.robber);
    let dist = if threat.is_empty() { g.bfs(pos.robber) } else { g.multi_bfs(threat.iter().copied()) };
    let mut steps = Vec::with_capacity(pos.cops.len());
    let mut captured = false;
    for &c in &pos.cops {
        if !captured && threat.contains(&c) {
            captured = true;
            steps.push(Step::To(pos.robber));
        } else {
            steps.push(step_to(c, step_toward(g, c, &dist)));
        }
    }
    Move::Cops(steps)
}

/// Uniformly random legal moves and placements.
pub struct RandomAgent {
    rng: ChaCha8Rng,
}

impl RandomAgent {
    pub fn new(seed: u64) -> Self {
        RandomAgent { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Agent for RandomAgent {
    fn name(&self) -> &str {
        "random"
    }

    fn place_cops(&mut self, spec: &GameSpec) -> Vec<VertexId> {
        let nv = spec.graph.vertex_count();
        (0..spec.cops).map(|_| self.rng.gen_range(0..nv)).collect()
    }

    fn place_robber(&mut self, spec: &GameSpec, _cops: &[VertexId]) -> VertexId {
        self.rng.gen_range(0..spec.graph.vertex_count())
    }

    fn choose(&mut self, spec: &GameSpec, pos: &Position, _history: &[Ply]) -> Move {
        let moves = game::legal_moves(spec, pos).expect("consistent position");
        moves.choose(&mut self.rng).expect("stay is always legal").clone()
    }
}

/// Cops that step along shortest paths toward the robber.
pub struct GreedyCops {
    rng: ChaCha8Rng,
}

impl GreedyCops {
    pub fn new(seed: u64) -> Self {
        GreedyCops { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Agent for GreedyCops {
    fn name(&self) -> &str {
        "greedy"
    }

    fn place_cops(&mut self, spec: &GameSpec) -> Vec<VertexId> {
        let nv = spec.graph.vertex_count();
        (0..spec.cops).map(|_| self.rng.gen_range(0..nv)).collect()
    }

    fn choose(&mut self, spec: &GameSpec, pos: &Position, _history: &[Ply]) -> Move {
        greedy_cop_move(&spec.graph, pos)
    }
}

/// Never moves.
pub struct StayPut;

impl Agent for StayPut {
    fn name(&self) -> &str {
        "stay"
    }

    fn choose(&mut self, _spec: &GameSpec, pos: &Position, _history: &[Ply]) -> Move {
        match pos.to_move {
            Side::Cops => Move::Cops(vec![Step::Stay; pos.cops.len()]),
            Side::Robber => Move::Robber(Step::Stay),
        }
    }
}

/// Plays the solver's strategy for whichever side it is asked to move.
pub struct SolverAgent {
    table: Arc<Attractor>,
    placement: Option<Vec<VertexId>>,
}

impl SolverAgent {
    pub fn new(table: Arc<Attractor>, placement: Option<Vec<VertexId>>) -> Self {
        SolverAgent { table, placement }
    }

    pub fn from_spec(spec: &GameSpec, budget: u128) -> Result<Self> {
        let res = solver::solve(spec, solver::SolveOptions { budget, mode: solver::SpaceMode::Full, retain: true })?;
        let table = res.table.clone().ok_or(Error::NotWon)?;
        Ok(SolverAgent::new(table, res.placement))
    }
}

impl Agent for SolverAgent {
    fn name(&self) -> &str {
        "solver"
    }

    fn place_cops(&mut self, spec: &GameSpec) -> Vec<VertexId> {
        self.placement.clone().unwrap_or_else(|| vec![0; spec.cops])
    }

    fn place_robber(&mut self, spec: &GameSpec, cops: &[VertexId]) -> VertexId {
        let first = spec.first_mover();
        (0..spec.graph.vertex_count())
            .find(|&r| !self.table.is_cop_win(&Position::new(cops.to_vec(), r, first)))
            .unwrap_or(0)
    }

    fn choose(&mut self, spec: &GameSpec, pos: &Position, _history: &[Ply]) -> Move {
        solver::solver_move(spec, &self.table, pos).expect("consistent position")
    }
}

/// Agent names accepted by [`by_name`].
pub const AGENT_NAMES: &[&str] = &["random", "greedy", "stay", "solver", "gphi-script", "reset-script"];

/// Builds a named agent for `side` on the given instance.
pub fn by_name(
    name: &str,
    side: Side,
    out: &crate::reductions::ReductionOutput,
    seed: u64,
    budget: u128,
) -> Result<Box<dyn Agent>> {
    Ok(match (name, side) {
        ("random", _) => Box::new(RandomAgent::new(seed)),
        ("greedy", Side::Cops) => Box::new(GreedyCops::new(seed)),
        ("stay", _) => Box::new(StayPut),
        ("solver", _) => Box::new(SolverAgent::from_spec(&out.spec, budget)?),
        ("gphi-script", Side::Cops) => Box::new(GphiCops::new(out, None)?),
        ("gphi-script", Side::Robber) => Box::new(GphiRobber::new(out)?),
        ("reset-script", Side::Cops) => Box::new(ResetCops::new(out)?),
        ("reset-script", Side::Robber) => Box::new(ResetRobber::new(out)?),
        _ => return Err(Error::Unsupported(format!("no agent `{name}` for the {side:?} side"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Start, Variant};
    use crate::solver::play;

    fn path(n: usize) -> LabelledGraph {
        let mut g = LabelledGraph::with_vertices(n);
        for i in 1..n {
            g.add_edge(i - 1, i, Label::Unprotected).unwrap();
        }
        g
    }

    #[test]
    fn greedy_closes_in_on_a_path() {
        let g = game::lower_cr(&path(7));
        let mut pos = Position::new(vec![0], 6, Side::Cops);
        let mut d = 6;
        while d > 1 {
            let Move::Cops(steps) = greedy_cop_move(&g, &pos) else { unreachable!() };
            let c = steps[0].target(pos.cops[0]);
            assert_eq!(6 - c, d - 1);
            d -= 1;
            pos.cops = vec![c];
        }
    }

    #[test]
    fn stay_put_robber_is_caught_after_distance_moves() {
        for (c, r) in [(0usize, 5usize), (2, 3), (4, 0)] {
            let spec = GameSpec::new(path(6), 1, Variant::Cr, Start::Fixed { cops: vec![c], robber: r, first: Side::Cops })
                .unwrap();
            let t = play(&spec, &mut GreedyCops::new(0), &mut StayPut, 100);
            let cop_moves = t.plies.iter().filter(|p| p.side == Side::Cops).count();
            assert!(t.captured());
            assert_eq!(cop_moves, c.abs_diff(r));
        }
    }

    #[test]
    fn random_moves_are_legal() {
        let mut g = path(5);
        g.add_edge(0, 4, Label::Protected).unwrap();
        let spec = GameSpec::new(g, 2, Variant::Crp, Start::Fixed { cops: vec![0, 0], robber: 3, first: Side::Robber })
            .unwrap();
        let mut agent = RandomAgent::new(7);
        let mut pos = spec.start_position().unwrap();
        for _ in 0..1000 {
            let mv = agent.choose(&spec, &pos, &[]);
            assert!(game::legal_moves(&spec, &pos).unwrap().iter().any(|m| {
                game::apply(&spec, &pos, m).unwrap() == game::apply(&spec, &pos, &mv).unwrap()
            }));
            pos = game::apply(&spec, &pos, &mv).unwrap().0;
        }
    }

    #[test]
    fn matching_assigns_one_step_targets() {
        let g = path(4);
        let mv = move_onto(&g, &[0, 2], &[1, 3]).unwrap();
        assert_eq!(mv, Move::Cops(vec![Step::To(1), Step::To(3)]));
        assert!(move_onto(&g, &[0, 0], &[2, 1]).is_none());
        assert_eq!(move_onto(&g, &[1, 2], &[2, 1]).unwrap(), Move::Cops(vec![Step::Stay, Step::Stay]));
    }
}
