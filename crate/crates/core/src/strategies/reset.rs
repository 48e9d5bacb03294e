//! Scripted play on the reset construction.
//!
//! Cops: post sentries on `b'_1`, `b''_2`, `a'_3`, herd the rest onto
//! `a'_4..`, force the robber onto the gate `a''_k`, then follow it through
//! `b''_k` into copy `k` and run the gadget script there. Robber: wait on an
//! unthreatened `a''`, drop through the copy it is pushed into when every
//! `a'` is taken, and resurface in the other mechanism.
//!
//! Both are probes: they are checked against a pool of opponents, not
//! certified.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::game::{self, GameSpec, Move, Ply, Position, Step};
use crate::graph::{LabelledGraph, VertexId};
use crate::qbf::Qbf;
use crate::reductions::gphi::Slot;
use crate::reductions::reset::{Place, ResetLayout, ROLE_A2, ROLE_B2};
use crate::reductions::ReductionOutput;

use super::gphi::{robber_descent, safest_step, shadow_posts, track_posts, Descent};
use super::{assign_targets, closed_nbhd, greedy_cop_move, move_onto, Agent};

#[derive(Clone, Debug)]
enum Plan {
    Free,
    /// Cops hold every `a'` but the gate's partner; robber on `a''_k`.
    Gate { m: usize, k: usize },
    /// Robber dropped to `b''_k`; cops below on `b'`, flanking on `a''_{k-1}`, `a'_k`.
    Door { m: usize, k: usize },
    /// Robber moved along level 3'' to `b''_k`.
    Swap { m: usize, k: usize },
    /// Robber inside copy `k` below mechanism `m`.
    Copy { m: usize, k: usize, descent: Descent },
}

pub struct ResetCops {
    layout: ResetLayout,
    qbf: Qbf,
    plan: Plan,
    fallbacks: usize,
    chase: usize,
}

impl ResetCops {
    pub fn new(out: &ReductionOutput) -> Result<Self> {
        let layout = out.reset_layout()?;
        let qbf = layout.copy(0, 1).formula(&out.spec.graph)?;
        Ok(ResetCops { layout, qbf, plan: Plan::Free, fallbacks: 0, chase: 0 })
    }

    fn a1(&self, m: usize, i: usize) -> VertexId {
        self.layout.mechanisms[m].a1[i - 1]
    }
    fn a2(&self, m: usize, i: usize) -> VertexId {
        self.layout.mechanisms[m].a2[i - 1]
    }
    fn b1(&self, m: usize, i: usize) -> VertexId {
        self.layout.mechanisms[m].b1[i - 1]
    }
    fn b2(&self, m: usize, i: usize) -> VertexId {
        self.layout.mechanisms[m].b2[i - 1]
    }

    fn prev(&self, k: usize) -> usize {
        if k == 1 {
            self.layout.size()
        } else {
            k - 1
        }
    }

    /// Sentries and herd posts of mechanism `m`.
    fn herd_posts(&self, m: usize) -> Vec<VertexId> {
        let mut out = vec![self.b1(m, 1), self.b2(m, 2), self.a1(m, 3)];
        out.extend((4..=self.layout.size()).map(|i| self.a1(m, i)));
        out
    }

    /// Every `a'` occupied except possibly the gate's, whose cop waits on `a''_k`.
    fn gate_posts(&self, m: usize, k: usize, closed: bool) -> Vec<VertexId> {
        (1..=self.layout.size())
            .map(|i| if i == k && !closed { self.a2(m, k) } else { self.a1(m, i) })
            .collect()
    }

    /// Cops below the gate on `b'`, flanks on `a''_{k-1}` and `a'_k`.
    fn door_posts(&self, m: usize, k: usize) -> Vec<VertexId> {
        let p = self.prev(k);
        let mut out: Vec<VertexId> = (1..=self.layout.size()).filter(|&i| i != k && i != p).map(|i| self.b1(m, i)).collect();
        out.push(self.a2(m, p));
        out.push(self.a1(m, k));
        out
    }

    fn swap_posts(&self, m: usize, from: usize, to: usize) -> Vec<VertexId> {
        let p = self.prev(to);
        let mut out: Vec<VertexId> = (1..=self.layout.size()).filter(|&i| i != to && i != p).map(|i| self.b1(m, i)).collect();
        out.push(self.a1(m, to));
        out.push(self.b2(m, self.prev(from)));
        out
    }

    /// Routes cops toward `posts` along shortest paths; cops already on a
    /// post keep it.
    fn route(&self, g: &LabelledGraph, cops: &[VertexId], posts: &[VertexId]) -> Move {
        let mut assigned: Vec<Option<VertexId>> = vec![None; cops.len()];
        let mut open = Vec::new();
        for &t in posts {
            match (0..cops.len()).find(|&c| assigned[c].is_none() && cops[c] == t) {
                Some(c) => assigned[c] = Some(t),
                None => open.push(t),
            }
        }
        let mut steps = vec![Step::Stay; cops.len()];
        for t in open {
            let dist = g.bfs(t);
            let Some(c) = (0..cops.len()).filter(|&c| assigned[c].is_none()).min_by_key(|&c| (dist[cops[c]], c)) else {
                break;
            };
            assigned[c] = Some(t);
            let next = super::step_toward(g, cops[c], &dist);
            if next != cops[c] {
                steps[c] = Step::To(next);
            }
        }
        Move::Cops(steps)
    }

    /// Script inside copy `(m, k)`: track cops level with the robber, two
    /// shadows closing in from above.
    fn copy_move(&mut self, g: &LabelledGraph, pos: &Position) -> Option<Move> {
        let Plan::Copy { m, k, descent } = &mut self.plan else { return None };
        let (m, k) = (*m, *k);
        let lay = self.layout.copy(m, k);
        let Slot::Robber { level, branch } = lay.slot(pos.robber)? else { return None };
        let tracks = track_posts(lay, &self.qbf, descent, level, branch)?;
        let assigned = assign_targets(g, &pos.cops, &tracks)?;
        let posts = match shadow_posts(lay, level) {
            Some(p) => p,
            None => vec![self.layout.mechanisms[m].b2[k - 1]; 2],
        };
        let free: Vec<usize> = (0..pos.cops.len()).filter(|&c| assigned[c].is_none()).collect();
        if free.len() != 2 {
            return None;
        }
        let d0 = g.bfs(posts[0]);
        let d1 = g.bfs(posts[1]);
        let (x, y) = (pos.cops[free[0]], pos.cops[free[1]]);
        let (dx, dy) = if d0[x].saturating_add(d1[y]) <= d1[x].saturating_add(d0[y]) { (&d0, &d1) } else { (&d1, &d0) };
        let b2 = &self.layout.mechanisms[m].b2;
        let shadow_step = |c: VertexId, dist: &[usize]| {
            closed_nbhd(g, c).into_iter().min_by_key(|&w| (dist[w], !b2.contains(&w), w)).expect("nonempty")
        };
        let mut steps = Vec::with_capacity(pos.cops.len());
        for (i, &c) in pos.cops.iter().enumerate() {
            let dest = match assigned[i] {
                Some(t) => t,
                None if i == free[0] => shadow_step(c, dx),
                None => shadow_step(c, dy),
            };
            steps.push(if dest == c { Step::Stay } else { Step::To(dest) });
        }
        Some(Move::Cops(steps))
    }

    fn scripted(&mut self, spec: &GameSpec, pos: &Position) -> Option<Move> {
        let g = &spec.graph;
        let r = pos.robber;
        let place = self.layout.place(r);
        let reset_at = |kind: &str| match place {
            Some(Place::Reset { mechanism, kind: kd, index }) if kd == kind => Some((mechanism, index)),
            _ => None,
        };
        match self.plan.clone() {
            Plan::Gate { m, k } if reset_at(ROLE_B2) == Some((m, k)) => {
                self.plan = Plan::Door { m, k };
                return move_onto(g, &pos.cops, &self.door_posts(m, k));
            }
            Plan::Door { m, k } | Plan::Swap { m, k } => {
                let start = self.layout.copy(m, k).robber_start();
                if start == Some(r) {
                    self.plan = Plan::Copy { m, k, descent: Descent::new(self.layout.n) };
                    return self.copy_move(g, pos);
                }
                if let (Plan::Door { .. }, Some((m2, j))) = (&self.plan, reset_at(ROLE_B2)) {
                    if m2 == m {
                        self.plan = Plan::Swap { m, k: j };
                        return move_onto(g, &pos.cops, &self.swap_posts(m, k, j));
                    }
                }
            }
            Plan::Copy { m, k, .. } if self.layout.place(r) == Some(Place::Copy { mechanism: m, copy: k }) => {
                if let Some(mv) = self.copy_move(g, pos) {
                    return Some(mv);
                }
                self.plan = Plan::Free;
                return None;
            }
            _ => {}
        }
        self.plan = Plan::Free;

        match place {
            Some(Place::Reset { mechanism: m, kind, index: k }) => {
                if kind == ROLE_A2 {
                    for closed in [true, false] {
                        if let Some(mv) = move_onto(g, &pos.cops, &self.gate_posts(m, k, closed)) {
                            self.plan = Plan::Gate { m, k };
                            return Some(mv);
                        }
                    }
                    let posts = self.herd_posts(m);
                    if k == 1 && move_onto(g, &pos.cops, &posts) == Some(Move::Cops(vec![Step::Stay; pos.cops.len()])) {
                        // forcing step: the sentry below a'_1 steps up
                        let mut forced = posts.clone();
                        forced[0] = self.a1(m, 1);
                        return move_onto(g, &pos.cops, &forced);
                    }
                }
                Some(self.route(g, &pos.cops, &self.herd_posts(m)))
            }
            Some(Place::Copy { mechanism, copy }) => {
                let lay = self.layout.copy(mechanism, copy);
                match lay.slot(r) {
                    // bottom of a copy is the first level of the other mechanism
                    Some(Slot::Clause(_)) | Some(Slot::Enforce { .. })
                        if lay.level(r) == Some(2 * self.layout.n + 2) =>
                    {
                        Some(self.route(g, &pos.cops, &self.herd_posts(1 - mechanism)))
                    }
                    _ => {
                        self.chase += 1;
                        Some(greedy_cop_move(g, pos))
                    }
                }
            }
            None => None,
        }
    }

    /// Initial posts: `b'_1`, `b''_2`, `a'_3` in each mechanism, extras on
    /// `a'_4` of the first mechanism.
    fn placement(&self, cops: usize) -> Vec<VertexId> {
        let mut out = Vec::new();
        for m in 0..2 {
            out.extend([self.b1(m, 1), self.b2(m, 2), self.a1(m, 3)]);
        }
        out.truncate(cops);
        while out.len() < cops {
            out.push(self.a1(0, 4.min(self.layout.size())));
        }
        out
    }
}

impl Agent for ResetCops {
    fn name(&self) -> &str {
        "reset-script"
    }

    fn place_cops(&mut self, spec: &GameSpec) -> Vec<VertexId> {
        self.placement(spec.cops)
    }

    fn choose(&mut self, spec: &GameSpec, pos: &Position, _history: &[Ply]) -> Move {
        if let Some(mv) = game::capturing_move(spec, pos) {
            return mv;
        }
        if let Some(mv) = self.scripted(spec, pos) {
            return mv;
        }
        self.fallbacks += 1;
        greedy_cop_move(&spec.graph, pos)
    }

    fn fallbacks(&self) -> usize {
        self.fallbacks
    }

    fn counters(&self) -> BTreeMap<String, u64> {
        BTreeMap::from([("fallbacks".to_string(), self.fallbacks as u64), ("chase".to_string(), self.chase as u64)])
    }
}

pub struct ResetRobber {
    layout: ResetLayout,
    qbf: Qbf,
    chosen: Vec<Option<bool>>,
    crossings: usize,
    fallbacks: usize,
}

impl ResetRobber {
    pub fn new(out: &ReductionOutput) -> Result<Self> {
        let layout = out.reset_layout()?;
        let qbf = layout.copy(0, 1).formula(&out.spec.graph)?;
        Ok(ResetRobber { chosen: vec![None; 2 * layout.n], layout, qbf, crossings: 0, fallbacks: 0 })
    }

    /// Passages from one mechanism to the other.
    pub fn crossings(&self) -> usize {
        self.crossings
    }

    /// An `a''` of mechanism `m` whose `a'` partner is free.
    fn free_gate(&self, g: &LabelledGraph, cops: &[VertexId], m: usize) -> Option<VertexId> {
        let mech = &self.layout.mechanisms[m];
        (0..self.layout.size())
            .find(|&i| !cops.contains(&mech.a1[i]) && !game::threatened(g, cops, mech.a2[i]))
            .map(|i| mech.a2[i])
    }

    fn scripted(&mut self, spec: &GameSpec, pos: &Position) -> Option<VertexId> {
        let g = &spec.graph;
        let (r, cops) = (pos.robber, &pos.cops[..]);
        let safe = |v: VertexId| (!game::threatened(g, cops, v)).then_some(v);
        match self.layout.place(r)? {
            Place::Reset { mechanism: m, kind, index: k } if kind == ROLE_A2 => {
                let mech = &self.layout.mechanisms[m];
                if mech.a1.iter().all(|a| cops.contains(a)) {
                    self.chosen = vec![None; 2 * self.layout.n];
                    return safe(mech.b2[k - 1]);
                }
                if !game::threatened(g, cops, r) {
                    return Some(r);
                }
                self.free_gate(g, cops, m)
            }
            Place::Reset { mechanism: m, kind, index: k } if kind == ROLE_B2 => {
                self.chosen = vec![None; 2 * self.layout.n];
                safe(self.layout.copy(m, k).robber_start()?)
            }
            Place::Copy { mechanism: m, copy: k } => {
                let lay = self.layout.copy(m, k);
                match lay.slot(r)? {
                    Slot::Robber { .. } => robber_descent(lay, &self.qbf, g, cops, r, &mut self.chosen),
                    Slot::Clause(_) => {
                        let next = self.free_gate(g, cops, 1 - m)?;
                        self.crossings += 1;
                        Some(next)
                    }
                    _ => None,
                }
            }
            _ => None,
        }
    }
}

impl Agent for ResetRobber {
    fn name(&self) -> &str {
        "reset-script"
    }

    fn place_robber(&mut self, spec: &GameSpec, cops: &[VertexId]) -> VertexId {
        (0..2)
            .find_map(|m| self.free_gate(&spec.graph, cops, m))
            .unwrap_or_else(|| (0..spec.graph.vertex_count()).find(|&v| !game::threatened(&spec.graph, cops, v)).unwrap_or(0))
    }

    fn choose(&mut self, spec: &GameSpec, pos: &Position, _history: &[Ply]) -> Move {
        if let Some(v) = self.scripted(spec, pos) {
            return Move::Robber(if v == pos.robber { Step::Stay } else { Step::To(v) });
        }
        self.fallbacks += 1;
        safest_step(&spec.graph, &pos.cops, pos.robber, |_| 0)
    }

    fn fallbacks(&self) -> usize {
        self.fallbacks
    }

    fn counters(&self) -> BTreeMap<String, u64> {
        BTreeMap::from([
            ("fallbacks".to_string(), self.fallbacks as u64),
            ("crossings".to_string(), self.crossings as u64),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reductions::{qbf_to_crp, CrpOptions};
    use crate::solver::play;

    #[test]
    fn cops_place_sentries() {
        let q = Qbf::new(4, vec![vec![1, 2]]).unwrap();
        let out = qbf_to_crp(&q, CrpOptions::default()).unwrap();
        let mut cops = ResetCops::new(&out).unwrap();
        let placed = cops.place_cops(&out.spec);
        let names: Vec<&str> = placed.iter().map(|&v| out.spec.graph.name(v)).collect();
        assert_eq!(&names[..6], &["M0.b'_1", "M0.b''_2", "M0.a'_3", "M1.b'_1", "M1.b''_2", "M1.a'_3"]);
        assert!(names[6..].iter().all(|&n| n == "M0.a'_4"));
        let mut robber = ResetRobber::new(&out).unwrap();
        let r = robber.place_robber(&out.spec, &placed);
        assert_eq!(out.annotations[&r].role, ROLE_A2);
    }

    #[test]
    fn scripted_play_on_true_formula_captures() {
        let q = Qbf::new(4, vec![vec![2], vec![4, 1], vec![6], vec![8, -7]]).unwrap();
        assert!(q.evaluate());
        let out = qbf_to_crp(&q, CrpOptions::default()).unwrap();
        let mut cops = ResetCops::new(&out).unwrap();
        let mut robber = ResetRobber::new(&out).unwrap();
        let t = play(&out.spec, &mut cops, &mut robber, 240);
        assert!(t.captured(), "{:?}", cops.counters());
    }
}
