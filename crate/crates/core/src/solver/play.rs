//! Play-outs between two agents.

use crate::game::{self, GameSpec, Move, Outcome, Ply, Position, Side, Start, Transcript};
use crate::strategies::Agent;

fn fault(side: Side, reason: impl Into<String>, start: Option<Position>, plies: Vec<Ply>) -> Transcript {
    Transcript { start, plies, outcome: Outcome::Fault { agent: side, reason: reason.into() } }
}

/// Alternating play from the spec's start (placements first when elective)
/// until capture or `max_plies` in-play plies.
pub fn play(spec: &GameSpec, cops: &mut dyn Agent, robber: &mut dyn Agent, max_plies: usize) -> Transcript {
    let mut plies = Vec::new();
    let mut pos = match &spec.start {
        Start::Fixed { .. } => spec.start_position().expect("fixed start"),
        Start::Elective { first } => {
            let placed = cops.place_cops(spec);
            let p0 = Position::new(placed.clone(), 0, *first);
            if placed.len() != spec.cops || placed.iter().any(|&v| !spec.graph.contains(v)) {
                return fault(Side::Cops, format!("invalid placement {placed:?}"), None, plies);
            }
            plies.push(Ply { index: 0, side: Side::Cops, mv: Move::PlaceCops(p0.cops.clone()), position: p0.clone(), captured: false });
            let r = robber.place_robber(spec, &p0.cops);
            if !spec.graph.contains(r) {
                return fault(Side::Robber, format!("invalid placement {r}"), None, plies);
            }
            let p = Position { robber: r, ..p0 };
            plies.push(Ply { index: 1, side: Side::Robber, mv: Move::PlaceRobber(r), position: p.clone(), captured: false });
            p
        }
    };
    let start = pos.clone();
    for _ in 0..max_plies {
        let side = pos.to_move;
        let agent: &mut dyn Agent = match side {
            Side::Cops => &mut *cops,
            Side::Robber => &mut *robber,
        };
        let mv = agent.choose(spec, &pos, &plies);
        let (next, captured) = match game::apply(spec, &pos, &mv) {
            Ok(x) => x,
            Err(e) => return fault(side, e.to_string(), Some(start), plies),
        };
        let index = plies.len();
        plies.push(Ply { index, side, mv, position: next.clone(), captured });
        if captured {
            return Transcript { start: Some(start), plies, outcome: Outcome::Capture { ply: index } };
        }
        pos = next;
    }
    Transcript { start: Some(start), plies, outcome: Outcome::MaxPlies }
}
