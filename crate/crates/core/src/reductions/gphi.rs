//! The QBF gadget graph `G_Φ` with fixed start and robber moving first.
//!
//! Levels run top to bottom: `c_0` on level 0, the first stage on levels
//! `1..=2n` (robber track plus one cop track per variable), the evaluation
//! level `2n+1`, clauses on `2n+2` and the heaven on `2n+3`.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::game::{GameSpec, Side, Start, Variant};
use crate::graph::{Annotations, Label, LabelledGraph, VertexAnnotation, VertexId};
use crate::qbf::Qbf;

use super::{digest, ReductionOutput};

#[derive(Clone, Copy, Debug, Default)]
pub struct CrpsOptions {
    /// Reject formulas without clauses instead of warning.
    pub strict: bool,
    /// One heaven per gadget end instead of a single shared heaven.
    pub per_gadget_heavens: bool,
}

/// Where a vertex sits inside one copy of the gadget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Start,
    Robber { level: usize, branch: Option<bool> },
    Track { var: usize, level: usize, branch: Option<bool> },
    /// `branch` is true for the `a` chain (fed by the true side).
    Enforce { var: usize, level: usize, branch: bool },
    Clause(usize),
    Heaven,
}

/// Role-indexed view of one gadget copy, rebuilt from annotations.
#[derive(Clone, Debug, Default)]
pub struct GphiLayout {
    pub n: usize,
    pub c0: Option<VertexId>,
    pub heavens: Vec<VertexId>,
    pub clauses: Vec<VertexId>,
    robber: BTreeMap<(usize, Option<bool>), VertexId>,
    tracks: BTreeMap<(usize, usize, Option<bool>), VertexId>,
    enforce: BTreeMap<(usize, usize, bool), VertexId>,
    slots: HashMap<VertexId, Slot>,
}

pub(crate) const ROLE_C0: &str = "c0";
pub(crate) const ROLE_HEAVEN: &str = "heaven";
pub(crate) const ROLE_CLAUSE: &str = "clause";

fn branch_role(base: &str, branch: Option<bool>) -> String {
    match branch {
        None => base.to_string(),
        Some(true) => format!("{base}-true"),
        Some(false) => format!("{base}-false"),
    }
}

fn parse_role(role: &str) -> Option<(&str, Option<bool>)> {
    for base in ["robber", "cop", "enforce"] {
        if role == base || (base == "cop" && role == "cop-track") {
            return Some((base, None));
        }
        if let Some(rest) = role.strip_prefix(base) {
            match rest {
                "-true" => return Some((base, Some(true))),
                "-false" => return Some((base, Some(false))),
                _ => {}
            }
        }
    }
    None
}

impl GphiLayout {
    /// Collects the vertices accepted by `pick`. Annotated levels are mapped
    /// back to gadget levels by subtracting `shift`, modulo `modulus` if given.
    pub fn from_annotations(
        ann: &Annotations,
        n: usize,
        shift: i64,
        modulus: Option<i64>,
        pick: impl Fn(&VertexAnnotation) -> bool,
    ) -> Result<GphiLayout> {
        let mut out = GphiLayout { n, ..Default::default() };
        for (&v, a) in ann.iter().filter(|(_, a)| pick(a)) {
            let level = a.level.map(|l| match modulus {
                Some(m) => (l - shift).rem_euclid(m),
                None => l - shift,
            });
            let lvl = || -> Result<usize> {
                level
                    .filter(|&l| l >= 0)
                    .map(|l| l as usize)
                    .ok_or_else(|| Error::Format(format!("vertex {v} has no usable level")))
            };
            let track = || -> Result<usize> {
                a.track
                    .filter(|&t| t >= 1)
                    .map(|t| t as usize)
                    .ok_or_else(|| Error::Format(format!("vertex {v} has no track")))
            };
            let slot = match a.role.as_str() {
                ROLE_C0 => {
                    out.c0 = Some(v);
                    Slot::Start
                }
                ROLE_HEAVEN => {
                    out.heavens.push(v);
                    Slot::Heaven
                }
                ROLE_CLAUSE => {
                    let k = track()? - 1;
                    if out.clauses.len() <= k {
                        out.clauses.resize(k + 1, usize::MAX);
                    }
                    out.clauses[k] = v;
                    Slot::Clause(k)
                }
                role => match parse_role(role) {
                    Some(("robber", branch)) => {
                        let level = lvl()?;
                        out.robber.insert((level, branch), v);
                        Slot::Robber { level, branch }
                    }
                    Some(("cop", branch)) => {
                        let (var, level) = (track()?, lvl()?);
                        out.tracks.insert((var, level, branch), v);
                        Slot::Track { var, level, branch }
                    }
                    Some(("enforce", Some(branch))) => {
                        let (var, level) = (track()?, lvl()?);
                        out.enforce.insert((var, level, branch), v);
                        Slot::Enforce { var, level, branch }
                    }
                    _ => continue,
                },
            };
            out.slots.insert(v, slot);
        }
        if out.clauses.contains(&usize::MAX) {
            return Err(Error::Format("clause numbering has gaps".into()));
        }
        Ok(out)
    }

    pub fn slot(&self, v: VertexId) -> Option<Slot> {
        self.slots.get(&v).copied()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.slots.contains_key(&v)
    }

    pub fn last_level(&self) -> usize {
        2 * self.n + 1
    }

    /// Robber vertex at `level`; `branch` selects the diamond side on even levels.
    pub fn robber(&self, level: usize, branch: Option<bool>) -> Option<VertexId> {
        self.robber.get(&(level, if level % 2 == 0 { branch } else { None })).copied()
    }

    /// Robber track vertices at `level` (one or two).
    pub fn robber_level(&self, level: usize) -> Vec<VertexId> {
        [None, Some(true), Some(false)].iter().filter_map(|&b| self.robber.get(&(level, b)).copied()).collect()
    }

    /// Cop track vertex of `var` at `level`: the trunk up to level `var`, then
    /// the branch selected by `value`.
    pub fn track(&self, var: usize, level: usize, value: bool) -> Option<VertexId> {
        if level <= var {
            self.tracks.get(&(var, level, None)).copied()
        } else {
            self.tracks.get(&(var, level, Some(value))).copied()
        }
    }

    pub fn enforce(&self, var: usize, level: usize, branch: bool) -> Option<VertexId> {
        self.enforce.get(&(var, level, branch)).copied()
    }

    /// Start vertex of the robber (`r_1`).
    pub fn robber_start(&self) -> Option<VertexId> {
        self.robber(1, None)
    }

    /// Start vertices of the track cops, ordered by variable.
    pub fn track_starts(&self) -> Vec<VertexId> {
        (1..=2 * self.n).filter_map(|v| self.track(v, 1, false)).collect()
    }

    /// Bottom vertices: clauses and chain ends at level `2n+2`.
    pub fn bottom(&self) -> Vec<VertexId> {
        let mut out = self.clauses.clone();
        let end = 2 * self.n + 2;
        for var in (1..=2 * self.n).step_by(2) {
            out.extend(self.enforce(var, end, true));
            out.extend(self.enforce(var, end, false));
        }
        out
    }

    /// Level of a vertex within the gadget (heaven included).
    pub fn level(&self, v: VertexId) -> Option<usize> {
        Some(match self.slot(v)? {
            Slot::Start => 0,
            Slot::Robber { level, .. } | Slot::Track { level, .. } | Slot::Enforce { level, .. } => level,
            Slot::Clause(_) => 2 * self.n + 2,
            Slot::Heaven => 2 * self.n + 3,
        })
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.slots.keys().copied()
    }

    /// Reads the formula back from the clause wiring.
    pub fn formula(&self, g: &LabelledGraph) -> Result<Qbf> {
        let last = self.last_level();
        let clauses = self
            .clauses
            .iter()
            .map(|&c| {
                let mut lits: Vec<i32> = g
                    .adj(c)
                    .iter()
                    .filter_map(|&(w, _)| match self.slot(w) {
                        Some(Slot::Track { var, level, branch: Some(b) }) if level == last => {
                            Some(if b { var as i32 } else { -(var as i32) })
                        }
                        _ => None,
                    })
                    .collect();
                lits.sort_by_key(|l| (l.unsigned_abs(), *l < 0));
                lits
            })
            .collect();
        Qbf::new(self.n, clauses)
    }
}

/// How a body copy labels its vertices.
pub(crate) struct BodyTag<'a> {
    pub prefix: &'a str,
    pub level: &'a dyn Fn(usize) -> i64,
    pub copy: Option<i64>,
    pub mechanism: Option<i64>,
}

/// Ids of the wiring points of an added body.
pub(crate) struct Body {
    pub robber_start: VertexId,
    pub track_starts: Vec<VertexId>,
    pub clauses: Vec<VertexId>,
    pub chain_ends: Vec<VertexId>,
}

/// Adds the gadget without `c_0` and heavens. All vertices carry an
/// unprotected loop and all edges are unprotected.
pub(crate) fn add_body(g: &mut LabelledGraph, ann: &mut Annotations, q: &Qbf, tag: &BodyTag) -> Result<Body> {
    let n = q.n();
    let vars = 2 * n;
    let mut add = |g: &mut LabelledGraph, name: String, role: String, level: usize, track: Option<usize>| {
        let id = g.add_vertex(format!("{}{}", tag.prefix, name));
        g.add_edge(id, id, Label::Unprotected).expect("fresh vertex");
        let mut a = VertexAnnotation::role(role).level((tag.level)(level));
        a.track = track.map(|t| t as i64);
        a.copy = tag.copy;
        a.mechanism = tag.mechanism;
        ann.insert(id, a);
        id
    };
    let u = |g: &mut LabelledGraph, a: VertexId, b: VertexId| g.add_edge(a, b, Label::Unprotected).map(|_| ());

    // robber track: robber[level] = [r] or [rT, rF]
    let mut robber: Vec<Vec<VertexId>> = vec![Vec::new()];
    for level in 1..=vars + 1 {
        if level % 2 == 1 {
            robber.push(vec![add(g, format!("r_{level}"), "robber".into(), level, None)]);
        } else {
            let t = add(g, format!("rT_{level}"), branch_role("robber", Some(true)), level, None);
            let f = add(g, format!("rF_{level}"), branch_role("robber", Some(false)), level, None);
            robber.push(vec![t, f]);
        }
        for &a in &robber[level - 1] {
            for &b in &robber[level] {
                u(g, a, b)?;
            }
        }
    }

    let mut track_starts = Vec::new();
    let mut ends: Vec<(VertexId, VertexId)> = Vec::new();
    let mut chain_ends = Vec::new();
    for var in 1..=vars {
        let mut prev = None;
        for level in 1..=var {
            let id = add(g, format!("c^{var}_{level}"), "cop-track".into(), level, Some(var));
            if let Some(p) = prev {
                u(g, p, id)?;
            } else {
                track_starts.push(id);
            }
            prev = Some(id);
        }
        let trunk = prev.expect("var >= 1");
        let mut side = [trunk, trunk];
        let mut first = [trunk, trunk];
        for level in var + 1..=vars + 1 {
            for (i, value) in [true, false].into_iter().enumerate() {
                let letter = if value { "T" } else { "F" };
                let id = add(g, format!("{letter}^{var}_{level}"), branch_role("cop", Some(value)), level, Some(var));
                u(g, side[i], id)?;
                if level == var + 1 {
                    first[i] = id;
                }
                side[i] = id;
            }
        }
        ends.push((side[0], side[1]));
        if var % 2 == 1 {
            // enforcement chains from level var+2 down to 2n+2
            for (i, value) in [true, false].into_iter().enumerate() {
                let letter = if value { "a" } else { "b" };
                let mut prev = None;
                for level in var + 2..=vars + 2 {
                    let id = add(g, format!("{letter}^{var}_{level}"), branch_role("enforce", Some(value)), level, Some(var));
                    match prev {
                        None => {
                            u(g, id, first[i])?;
                            u(g, id, robber[var + 1][i])?;
                        }
                        Some(p) => u(g, p, id)?,
                    }
                    prev = Some(id);
                }
                chain_ends.push(prev.expect("chain is nonempty"));
            }
        }
    }

    let last_r = robber[vars + 1][0];
    let mut clauses = Vec::new();
    for (k, clause) in q.clauses().iter().enumerate() {
        let id = add(g, format!("clause_{}", k + 1), ROLE_CLAUSE.into(), vars + 2, Some(k + 1));
        u(g, id, last_r)?;
        for &lit in clause {
            let (t, f) = ends[lit.unsigned_abs() as usize - 1];
            u(g, id, if lit > 0 { t } else { f })?;
        }
        clauses.push(id);
    }
    Ok(Body { robber_start: robber[1][0], track_starts, clauses, chain_ends })
}

/// `G_Φ` with `c_0`, heaven(s) and the fixed start: two cops on `c_0`, one on
/// top of each variable track, robber on `r_1`, robber first; `2n+2` cops.
pub fn qbf_to_crps(q: &Qbf, options: CrpsOptions) -> Result<ReductionOutput> {
    let mut warnings = Vec::new();
    if q.clauses().is_empty() {
        if options.strict {
            return Err(Error::Reduction("formula has no clauses".into()));
        }
        warnings.push("formula has no clauses; every robber path is safe".to_string());
    }
    let n = q.n();
    let mut g = LabelledGraph::new();
    let mut ann = Annotations::new();
    let level = |l: usize| l as i64;
    let body = add_body(&mut g, &mut ann, q, &BodyTag { prefix: "", level: &level, copy: None, mechanism: None })?;

    let c0 = g.add_vertex("c_0");
    g.add_edge(c0, c0, Label::Unprotected)?;
    g.add_edge(c0, body.robber_start, Label::Unprotected)?;
    ann.insert(c0, VertexAnnotation::role(ROLE_C0).level(0));

    let heaven_level = 2 * n as i64 + 3;
    let new_heaven = |g: &mut LabelledGraph, ann: &mut Annotations, name: String| {
        let h = g.add_vertex(name);
        ann.insert(h, VertexAnnotation::role(ROLE_HEAVEN).level(heaven_level));
        h
    };
    if options.per_gadget_heavens {
        if !body.clauses.is_empty() {
            let h = new_heaven(&mut g, &mut ann, "heaven_clauses".into());
            for &c in &body.clauses {
                g.add_edge(c, h, Label::Protected)?;
            }
        }
        for (i, &e) in body.chain_ends.iter().enumerate() {
            let h = new_heaven(&mut g, &mut ann, format!("heaven_{}", i + 1));
            g.add_edge(e, h, Label::Protected)?;
        }
    } else {
        let h = new_heaven(&mut g, &mut ann, "heaven".into());
        for &c in body.clauses.iter().chain(&body.chain_ends) {
            g.add_edge(c, h, Label::Protected)?;
        }
    }

    let mut cops = vec![c0, c0];
    cops.extend(&body.track_starts);
    let start = Start::Fixed { cops, robber: body.robber_start, first: Side::Robber };
    let spec = GameSpec::new(g, 2 * n + 2, Variant::Crp, start)?;
    let text = q.to_json()?;
    Ok(ReductionOutput {
        spec,
        annotations: ann,
        projection: None,
        meta: BTreeMap::from([
            ("source".into(), digest(&text)),
            ("reduction".into(), "qbf2crps".into()),
            ("pairs".into(), n.to_string()),
            ("heavens".into(), if options.per_gadget_heavens { "per-gadget" } else { "shared" }.into()),
        ]),
        warnings,
    })
}

impl ReductionOutput {
    /// Gadget layout of a `qbf_to_crps` output.
    pub fn gphi_layout(&self) -> Result<GphiLayout> {
        let n: usize = self
            .meta
            .get("pairs")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format("instance carries no gadget metadata".into()))?;
        GphiLayout::from_annotations(&self.annotations, n, 0, None, |a| a.mechanism.is_none())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve, SolveOptions};
    use std::collections::BTreeSet;

    fn phi(clauses: Vec<Vec<i32>>) -> Qbf {
        Qbf::new(1, clauses).unwrap()
    }

    #[test]
    fn vertex_names_for_one_pair() {
        let out = qbf_to_crps(&phi(vec![vec![1, 2], vec![-1, 2]]), CrpsOptions::default()).unwrap();
        let g = &out.spec.graph;
        let names: BTreeSet<&str> = (0..g.vertex_count()).map(|v| g.name(v)).collect();
        let expected: BTreeSet<&str> = [
            "c_0", "r_1", "rT_2", "rF_2", "r_3", "c^1_1", "T^1_2", "F^1_2", "T^1_3", "F^1_3", "c^2_1", "c^2_2",
            "T^2_3", "F^2_3", "a^1_3", "b^1_3", "a^1_4", "b^1_4", "clause_1", "clause_2", "heaven",
        ]
        .into_iter()
        .collect();
        assert_eq!(names, expected);
        assert_eq!(out.spec.cops, 4);
        assert_eq!(out.spec.first_mover(), Side::Robber);
    }

    #[test]
    fn levels_connect_only_neighbours() {
        let q = Qbf::new(2, vec![vec![1, -2, 3], vec![-4], vec![2, 4]]).unwrap();
        let out = qbf_to_crps(&q, CrpsOptions::default()).unwrap();
        for (u, v, l) in out.spec.graph.edges() {
            let (lu, lv) = (out.annotations[&u].level.unwrap(), out.annotations[&v].level.unwrap());
            if u == v {
                assert_eq!(l, Label::Unprotected);
                continue;
            }
            assert_eq!((lu - lv).abs(), 1, "{} - {}", out.spec.graph.name(u), out.spec.graph.name(v));
            let heaven = out.annotations[&u].role == ROLE_HEAVEN || out.annotations[&v].role == ROLE_HEAVEN;
            assert_eq!(l == Label::Protected, heaven);
        }
        let heaven = out.spec.graph.find("heaven").unwrap();
        assert!(!out.spec.graph.is_unprotected_vertex(heaven).unwrap());
    }

    #[test]
    fn layout_round_trip() {
        let q = Qbf::new(2, vec![vec![1, 4]]).unwrap();
        let out = qbf_to_crps(&q, CrpsOptions::default()).unwrap();
        let lay = out.gphi_layout().unwrap();
        let g = &out.spec.graph;
        assert_eq!(g.name(lay.robber(4, Some(false)).unwrap()), "rF_4");
        assert_eq!(g.name(lay.track(3, 3, true).unwrap()), "c^3_3");
        assert_eq!(g.name(lay.track(3, 5, false).unwrap()), "F^3_5");
        assert_eq!(g.name(lay.enforce(3, 6, true).unwrap()), "a^3_6");
        assert_eq!(lay.track_starts().len(), 4);
        assert_eq!(lay.bottom().len(), 1 + 4);
        assert_eq!(lay.vertices().count(), g.vertex_count());
    }

    #[test]
    fn small_formulas_decide_the_game() {
        let t = qbf_to_crps(&phi(vec![vec![1, 2], vec![-1, 2]]), CrpsOptions::default()).unwrap();
        assert_eq!(solve(&t.spec, SolveOptions::default()).unwrap().winner, Side::Cops);
        let f = qbf_to_crps(&phi(vec![vec![1, 2], vec![1, -2]]), CrpsOptions::default()).unwrap();
        assert_eq!(solve(&f.spec, SolveOptions::default()).unwrap().winner, Side::Robber);
    }

    #[test]
    fn clause_free_formulas() {
        let q = phi(vec![]);
        assert!(qbf_to_crps(&q, CrpsOptions { strict: true, ..Default::default() }).is_err());
        let out = qbf_to_crps(&q, CrpsOptions::default()).unwrap();
        assert_eq!(out.warnings.len(), 1);
        let per = qbf_to_crps(&phi(vec![vec![2]]), CrpsOptions { per_gadget_heavens: true, ..Default::default() }).unwrap();
        assert_eq!(per.gphi_layout().unwrap().heavens.len(), 3);
    }
}
