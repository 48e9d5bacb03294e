//! Rules of Cops-and-Robber with protection.
//!
//! Only the protected-edge semantics is implemented. A plain Cops-and-Robber
//! instance is played on its lowering (every edge unprotected plus an
//! unprotected loop on every vertex), see [`lower_cr`].

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Label, LabelledGraph, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "CR")]
    Cr,
    #[serde(rename = "CRP")]
    Crp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Cops,
    Robber,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Cops => Side::Robber,
            Side::Robber => Side::Cops,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Start {
    /// Cops place, then the robber places, then `first` moves.
    Elective { first: Side },
    Fixed { cops: Vec<VertexId>, robber: VertexId, first: Side },
}

/// Every edge unprotected and an unprotected loop on every vertex.
pub fn lower_cr(g: &LabelledGraph) -> LabelledGraph {
    let mut out = LabelledGraph::new();
    for v in 0..g.vertex_count() {
        out.add_vertex(g.name(v).to_string());
    }
    for (u, v, _) in g.edges() {
        out.add_edge(u, v, Label::Unprotected).expect("same vertex set");
    }
    for v in 0..g.vertex_count() {
        out.add_edge(v, v, Label::Unprotected).expect("same vertex set");
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameSpec {
    /// Playing field under protected-edge rules (already lowered for `Variant::Cr`).
    pub graph: LabelledGraph,
    pub cops: usize,
    pub variant: Variant,
    pub start: Start,
}

impl GameSpec {
    /// Builds a spec; a `Cr` graph is lowered here.
    pub fn new(graph: LabelledGraph, cops: usize, variant: Variant, start: Start) -> Result<Self> {
        let graph = match variant {
            Variant::Cr => lower_cr(&graph),
            Variant::Crp => graph,
        };
        let spec = GameSpec { graph, cops, variant, start };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let nv = self.graph.vertex_count();
        if self.cops == 0 {
            return Err(Error::InvalidGame("at least one cop is required".into()));
        }
        if self.cops >= nv {
            return Err(Error::InvalidGame(format!(
                "cop count {} must be smaller than the vertex count {nv}",
                self.cops
            )));
        }
        if let Start::Fixed { cops, robber, .. } = &self.start {
            if cops.len() != self.cops {
                return Err(Error::InvalidGame(format!(
                    "fixed start lists {} cops, expected {}",
                    cops.len(),
                    self.cops
                )));
            }
            for &v in cops.iter().chain(std::iter::once(robber)) {
                if v >= nv {
                    return Err(Error::UnknownVertex(v));
                }
            }
        }
        Ok(())
    }

    pub fn with_start(&self, start: Start) -> Result<Self> {
        let spec = GameSpec { start, ..self.clone() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn start_position(&self) -> Option<Position> {
        match &self.start {
            Start::Fixed { cops, robber, first } => Some(Position::new(cops.clone(), *robber, *first)),
            Start::Elective { .. } => None,
        }
    }

    pub fn first_mover(&self) -> Side {
        match self.start {
            Start::Elective { first } | Start::Fixed { first, .. } => first,
        }
    }

    pub fn check_position(&self, pos: &Position) -> Result<()> {
        let nv = self.graph.vertex_count();
        if pos.cops.len() != self.cops {
            return Err(Error::InvalidGame(format!("position has {} cops", pos.cops.len())));
        }
        if pos.cops.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidGame("cop multiset not sorted".into()));
        }
        for &v in pos.cops.iter().chain(std::iter::once(&pos.robber)) {
            if v >= nv {
                return Err(Error::UnknownVertex(v));
            }
        }
        Ok(())
    }

    pub fn to_doc(&self, annotations: &crate::graph::Annotations) -> InstanceDoc {
        InstanceDoc {
            graph: self.graph.to_doc(annotations),
            cops: self.cops,
            variant: self.variant,
            start: self.start.clone(),
        }
    }
}

/// Serialized instance: the playing field plus game parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub graph: crate::graph::GraphDoc,
    pub cops: usize,
    pub variant: Variant,
    pub start: Start,
}

impl InstanceDoc {
    /// The stored graph is already the playing field, so no lowering happens here.
    pub fn into_spec(self) -> Result<(GameSpec, crate::graph::Annotations)> {
        let (graph, ann) = LabelledGraph::from_doc(&self.graph)?;
        let spec = GameSpec { graph, cops: self.cops, variant: self.variant, start: self.start };
        spec.validate()?;
        Ok((spec, ann))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub cops: Vec<VertexId>,
    pub robber: VertexId,
    pub to_move: Side,
}

impl Position {
    pub fn new(mut cops: Vec<VertexId>, robber: VertexId, to_move: Side) -> Self {
        cops.sort_unstable();
        Position { cops, robber, to_move }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    Stay,
    /// Traverse the edge to the given vertex; the vertex itself means its loop.
    To(VertexId),
}

impl Step {
    pub fn target(self, from: VertexId) -> VertexId {
        match self {
            Step::Stay => from,
            Step::To(v) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Move {
    /// One step per cop, indexed like the position's sorted cop list.
    Cops(Vec<Step>),
    Robber(Step),
    PlaceCops(Vec<VertexId>),
    PlaceRobber(VertexId),
}

fn step_options(g: &LabelledGraph, v: VertexId) -> impl Iterator<Item = Step> + '_ {
    std::iter::once(Step::Stay).chain(g.adj(v).iter().map(|&(w, _)| Step::To(w)))
}

fn captures(g: &LabelledGraph, from: VertexId, step: Step, robber: VertexId) -> bool {
    match step {
        Step::To(w) => w == robber && g.label(from, w) == Some(Label::Unprotected),
        Step::Stay => false,
    }
}

pub fn legal_moves(spec: &GameSpec, pos: &Position) -> Result<Vec<Move>> {
    spec.check_position(pos)?;
    let g = &spec.graph;
    match pos.to_move {
        Side::Robber => {
            let mut seen = BTreeSet::new();
            Ok(step_options(g, pos.robber)
                .filter(|s| seen.insert(s.target(pos.robber)))
                .map(Move::Robber)
                .collect())
        }
        Side::Cops => {
            let options: Vec<Vec<Step>> = pos.cops.iter().map(|&c| step_options(g, c).collect()).collect();
            let mut seen = BTreeSet::new();
            let mut out = Vec::new();
            let mut idx = vec![0usize; options.len()];
            loop {
                let steps: Vec<Step> = idx.iter().zip(&options).map(|(&i, o)| o[i]).collect();
                let mut dest: Vec<VertexId> =
                    steps.iter().zip(&pos.cops).map(|(s, &c)| s.target(c)).collect();
                dest.sort_unstable();
                let cap = steps.iter().zip(&pos.cops).any(|(&s, &c)| captures(g, c, s, pos.robber));
                if seen.insert((dest, cap)) {
                    out.push(Move::Cops(steps));
                }
                // odometer
                let mut k = 0;
                loop {
                    if k == idx.len() {
                        return Ok(out);
                    }
                    idx[k] += 1;
                    if idx[k] < options[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
            }
        }
    }
}

fn check_step(g: &LabelledGraph, from: VertexId, step: Step) -> Result<()> {
    match step {
        Step::Stay => Ok(()),
        Step::To(w) if g.label(from, w).is_some() => Ok(()),
        Step::To(w) => Err(Error::IllegalMove(format!("no edge {from}-{w}"))),
    }
}

/// Applies an in-play move; returns the successor and whether the robber was captured.
pub fn apply(spec: &GameSpec, pos: &Position, mv: &Move) -> Result<(Position, bool)> {
    spec.check_position(pos)?;
    let g = &spec.graph;
    match (pos.to_move, mv) {
        (Side::Cops, Move::Cops(steps)) => {
            if steps.len() != pos.cops.len() {
                return Err(Error::IllegalMove(format!("{} steps for {} cops", steps.len(), pos.cops.len())));
            }
            let mut captured = false;
            let mut dest = Vec::with_capacity(steps.len());
            for (&s, &c) in steps.iter().zip(&pos.cops) {
                check_step(g, c, s)?;
                captured |= captures(g, c, s, pos.robber);
                dest.push(s.target(c));
            }
            Ok((Position::new(dest, pos.robber, Side::Robber), captured))
        }
        (Side::Robber, Move::Robber(s)) => {
            check_step(g, pos.robber, *s)?;
            Ok((Position { cops: pos.cops.clone(), robber: s.target(pos.robber), to_move: Side::Cops }, false))
        }
        (side, m) => Err(Error::IllegalMove(format!("{m:?} with {side:?} to move"))),
    }
}

/// Whether a cop could capture right now, i.e. some cop is joined to the
/// robber's vertex by an unprotected edge (a loop when they cohabit).
pub fn robber_is_threatened(spec: &GameSpec, pos: &Position) -> bool {
    threatened(&spec.graph, &pos.cops, pos.robber)
}

pub fn threatened(g: &LabelledGraph, cops: &[VertexId], v: VertexId) -> bool {
    cops.iter().any(|&c| g.label(c, v) == Some(Label::Unprotected))
}

/// A capturing cop move when one exists.
pub fn capturing_move(spec: &GameSpec, pos: &Position) -> Option<Move> {
    let g = &spec.graph;
    let i = pos.cops.iter().position(|&c| g.label(c, pos.robber) == Some(Label::Unprotected))?;
    let mut steps = vec![Step::Stay; pos.cops.len()];
    steps[i] = Step::To(pos.robber);
    Some(Move::Cops(steps))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ply {
    pub index: usize,
    pub side: Side,
    #[serde(rename = "move")]
    pub mv: Move,
    pub position: Position,
    pub captured: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Capture { ply: usize },
    MaxPlies,
    Fault { agent: Side, reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub start: Option<Position>,
    pub plies: Vec<Ply>,
    pub outcome: Outcome,
}

impl Transcript {
    pub fn captured(&self) -> bool {
        matches!(self.outcome, Outcome::Capture { .. })
    }

    pub fn positions(&self) -> impl Iterator<Item = &Position> {
        self.start.iter().chain(self.plies.iter().map(|p| &p.position))
    }
}
