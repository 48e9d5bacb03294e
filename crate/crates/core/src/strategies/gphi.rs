//! Scripted play on the gadget graph: the cops force the robber down its
//! track one level per move and pick existential values by the formula's
//! witness; the robber picks universal values by refutation and slips into
//! an unthreatened clause.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::Result;
use crate::game::{self, GameSpec, Move, Ply, Position, Step};
use crate::graph::{LabelledGraph, VertexId};
use crate::qbf::Qbf;
use crate::reductions::gphi::{GphiLayout, Slot};
use crate::reductions::ReductionOutput;
use crate::solver::{self, Attractor};

use super::{closed_nbhd, greedy_cop_move, move_onto, Agent};

/// Variable values as fixed along one descent, `values[v - 1]` for `v`.
#[derive(Clone, Debug)]
pub(crate) struct Descent {
    pub values: Vec<Option<bool>>,
}

impl Descent {
    pub fn new(n: usize) -> Self {
        Descent { values: vec![None; 2 * n] }
    }

    fn prefix(&self, len: usize) -> Option<Vec<bool>> {
        self.values[..len].iter().copied().collect()
    }
}

/// Robber track vertices one level above `level` (the shadows' posts), or
/// `None` above level 1.
pub(crate) fn shadow_posts(lay: &GphiLayout, level: usize) -> Option<Vec<VertexId>> {
    if level < 2 {
        return None;
    }
    let verts = lay.robber_level(level - 1);
    Some(if verts.len() == 1 { vec![verts[0], verts[0]] } else { verts })
}

/// Track cop posts when the robber stands on `level`, fixing universal
/// values from the robber's diamond and existential values by the witness.
pub(crate) fn track_posts(
    lay: &GphiLayout,
    q: &Qbf,
    d: &mut Descent,
    level: usize,
    branch: Option<bool>,
) -> Option<Vec<VertexId>> {
    let vars = 2 * lay.n;
    if level == 0 || level > vars + 1 {
        return None;
    }
    if level % 2 == 0 {
        d.values[level - 2] = branch;
    }
    let mut out = Vec::with_capacity(vars);
    for v in 1..=vars {
        if level <= v {
            out.push(lay.track(v, level, false)?);
            continue;
        }
        if d.values[v - 1].is_none() {
            if v % 2 == 1 {
                return None;
            }
            let partial = d.prefix(v - 1)?;
            d.values[v - 1] = Some(q.existential_witness(&partial).ok()?.unwrap_or(false));
        }
        out.push(lay.track(v, level, d.values[v - 1]?)?);
    }
    Some(out)
}

/// Existential value held by the cops on `var`'s track, if a cop sits on a branch.
pub(crate) fn observed_value(lay: &GphiLayout, cops: &[VertexId], var: usize) -> Option<bool> {
    cops.iter().find_map(|&c| match lay.slot(c) {
        Some(Slot::Track { var: v, branch: Some(b), .. }) if v == var => Some(b),
        _ => None,
    })
}

/// The scripted robber's next vertex inside one gadget copy, or `None` when
/// the script has nothing safe to offer. `chosen` keeps the robber's own
/// universal choices. At a clause the script stops; callers decide the exit.
pub(crate) fn robber_descent(
    lay: &GphiLayout,
    q: &Qbf,
    g: &LabelledGraph,
    cops: &[VertexId],
    robber: VertexId,
    chosen: &mut Vec<Option<bool>>,
) -> Option<VertexId> {
    let vars = 2 * lay.n;
    let Slot::Robber { level, .. } = lay.slot(robber)? else { return None };
    let dest = if level <= vars {
        let next = level + 1;
        if next % 2 == 0 {
            let v = level;
            let partial: Vec<bool> = (1..v)
                .map(|u| if u % 2 == 1 { chosen[u - 1].unwrap_or(false) } else { observed_value(lay, cops, u).unwrap_or(false) })
                .collect();
            let choice = q.universal_refutation(&partial).ok()?.unwrap_or(false);
            chosen[v - 1] = Some(choice);
            lay.robber(next, Some(choice))?
        } else {
            lay.robber(next, None)?
        }
    } else {
        *lay.clauses.iter().find(|&&c| !game::threatened(g, cops, c))?
    };
    (!game::threatened(g, cops, dest)).then_some(dest)
}

fn robber_step(from: VertexId, to: VertexId) -> Move {
    Move::Robber(if from == to { Step::Stay } else { Step::To(to) })
}

/// Unthreatened neighbour with the largest `score`, else staying.
pub(crate) fn safest_step(g: &LabelledGraph, cops: &[VertexId], robber: VertexId, score: impl Fn(VertexId) -> i64) -> Move {
    let best = closed_nbhd(g, robber)
        .into_iter()
        .filter(|&w| !game::threatened(g, cops, w))
        .max_by_key(|&w| (score(w), std::cmp::Reverse(w)));
    robber_step(robber, best.unwrap_or(robber))
}

pub struct GphiCops {
    layout: GphiLayout,
    qbf: Qbf,
    table: Option<Arc<Attractor>>,
    descent: Descent,
    fallbacks: usize,
}

impl GphiCops {
    /// With a solved table the off-script fallback plays the solver's move.
    pub fn new(out: &ReductionOutput, table: Option<Arc<Attractor>>) -> Result<Self> {
        let layout = out.gphi_layout()?;
        let qbf = layout.formula(&out.spec.graph)?;
        Ok(GphiCops { descent: Descent::new(layout.n), layout, qbf, table, fallbacks: 0 })
    }

    fn scripted(&mut self, spec: &GameSpec, pos: &Position) -> Option<Move> {
        if let Some(mv) = game::capturing_move(spec, pos) {
            return Some(mv);
        }
        let Slot::Robber { level, branch } = self.layout.slot(pos.robber)? else { return None };
        let mut targets = shadow_posts(&self.layout, level)?;
        targets.extend(track_posts(&self.layout, &self.qbf, &mut self.descent, level, branch)?);
        move_onto(&spec.graph, &pos.cops, &targets)
    }
}

impl Agent for GphiCops {
    fn name(&self) -> &str {
        "gphi-script"
    }

    fn choose(&mut self, spec: &GameSpec, pos: &Position, _history: &[Ply]) -> Move {
        if let Some(mv) = self.scripted(spec, pos) {
            return mv;
        }
        self.fallbacks += 1;
        if let Some(t) = &self.table {
            if t.contains(pos) && t.is_cop_win(pos) {
                if let Ok(mv) = solver::extract_move(spec, t, pos) {
                    return mv;
                }
            }
        }
        greedy_cop_move(&spec.graph, pos)
    }

    fn fallbacks(&self) -> usize {
        self.fallbacks
    }
}

pub struct GphiRobber {
    layout: GphiLayout,
    qbf: Qbf,
    table: Option<Arc<Attractor>>,
    chosen: Vec<Option<bool>>,
    fallbacks: usize,
}

impl GphiRobber {
    pub fn new(out: &ReductionOutput) -> Result<Self> {
        Self::with_table(out, None)
    }

    pub fn with_table(out: &ReductionOutput, table: Option<Arc<Attractor>>) -> Result<Self> {
        let layout = out.gphi_layout()?;
        let qbf = layout.formula(&out.spec.graph)?;
        Ok(GphiRobber { chosen: vec![None; 2 * layout.n], layout, qbf, table, fallbacks: 0 })
    }

    fn scripted(&mut self, spec: &GameSpec, pos: &Position) -> Option<Move> {
        let g = &spec.graph;
        let safe = |v: VertexId| (!game::threatened(g, &pos.cops, v)).then_some(v);
        let heaven = || g.adj(pos.robber).iter().map(|&(w, _)| w).find(|&w| self.layout.slot(w) == Some(Slot::Heaven));
        let dest = match self.layout.slot(pos.robber)? {
            Slot::Robber { level, branch: Some(b) } => {
                // an enforcement chain left open by the cops leads to heaven
                match self.layout.enforce(level - 1, level + 1, b).and_then(safe) {
                    Some(e) => e,
                    None => robber_descent(&self.layout, &self.qbf, g, &pos.cops, pos.robber, &mut self.chosen)?,
                }
            }
            Slot::Robber { .. } => robber_descent(&self.layout, &self.qbf, g, &pos.cops, pos.robber, &mut self.chosen)?,
            Slot::Enforce { var, level, branch } => match self.layout.enforce(var, level + 1, branch) {
                Some(next) => safe(next)?,
                None => safe(heaven()?)?,
            },
            Slot::Clause(_) => safe(heaven()?)?,
            Slot::Heaven if !game::threatened(g, &pos.cops, pos.robber) => pos.robber,
            _ => return None,
        };
        Some(robber_step(pos.robber, dest))
    }
}

impl Agent for GphiRobber {
    fn name(&self) -> &str {
        "gphi-script"
    }

    fn place_robber(&mut self, _spec: &GameSpec, _cops: &[VertexId]) -> VertexId {
        self.layout.robber_start().unwrap_or(0)
    }

    fn choose(&mut self, spec: &GameSpec, pos: &Position, _history: &[Ply]) -> Move {
        if let Some(mv) = self.scripted(spec, pos) {
            return mv;
        }
        self.fallbacks += 1;
        if let Some(t) = &self.table {
            if let Ok(mv) = solver::solver_move(spec, t, pos) {
                return mv;
            }
        }
        let lay = &self.layout;
        safest_step(&spec.graph, &pos.cops, pos.robber, |w| lay.level(w).map_or(-1, |l| l as i64))
    }

    fn fallbacks(&self) -> usize {
        self.fallbacks
    }

    fn counters(&self) -> BTreeMap<String, u64> {
        BTreeMap::from([("fallbacks".to_string(), self.fallbacks as u64)])
    }
}
