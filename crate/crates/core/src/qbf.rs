//! Prenex CNF quantified boolean formulas.
//!
//! [`RawQbf`] is whatever a QDIMACS file declared. [`Qbf`] is the normalized
//! shape used by the game constructions: `2n` variables with the strictly
//! alternating prefix `forall v1 exists v2 ... forall v(2n-1) exists v(2n)`.
//! Evaluation is exhaustive on purpose; it is the truth oracle for every
//! reduction test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Quantifier {
    fn flip(self) -> Self {
        match self {
            Quantifier::Forall => Quantifier::Exists,
            Quantifier::Exists => Quantifier::Forall,
        }
    }
}

/// Signed literal in DIMACS convention: `v` or `-v`, with `v >= 1`.
pub type Lit = i32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawQbf {
    pub var_count: usize,
    pub blocks: Vec<(Quantifier, Vec<usize>)>,
    pub clauses: Vec<Vec<Lit>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qbf {
    /// Number of quantifier pairs; the formula has `2n` variables.
    n: usize,
    clauses: Vec<Vec<Lit>>,
    /// Raw variable index for each normalized variable, `None` for padding.
    origin: Vec<Option<usize>>,
}

pub fn parse_qdimacs(text: &str) -> Result<RawQbf> {
    let err = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
    let mut header: Option<usize> = None;
    let mut blocks: Vec<(Quantifier, Vec<usize>)> = Vec::new();
    let mut clauses = Vec::new();
    let mut quantified = std::collections::HashSet::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let first = toks.next().unwrap_or_default();
        if first == "p" {
            if header.is_some() {
                return Err(err(line_no, "duplicate problem line"));
            }
            if toks.next() != Some("cnf") {
                return Err(err(line_no, "expected `p cnf <vars> <clauses>`"));
            }
            let vars = toks
                .next()
                .and_then(|t| t.parse::<usize>().ok())
                .ok_or_else(|| err(line_no, "bad variable count"))?;
            toks.next()
                .and_then(|t| t.parse::<usize>().ok())
                .ok_or_else(|| err(line_no, "bad clause count"))?;
            if toks.next().is_some() {
                return Err(err(line_no, "trailing tokens on problem line"));
            }
            header = Some(vars);
            continue;
        }
        let var_count = header.ok_or_else(|| err(line_no, "content before problem line"))?;
        let (quant, rest): (Option<Quantifier>, Vec<&str>) = match first {
            "a" => (Some(Quantifier::Forall), toks.collect()),
            "e" => (Some(Quantifier::Exists), toks.collect()),
            _ => (None, line.split_whitespace().collect()),
        };
        let mut nums = Vec::with_capacity(rest.len());
        for t in &rest {
            nums.push(t.parse::<i64>().map_err(|_| err(line_no, &format!("bad token `{t}`")))?);
        }
        match nums.last() {
            Some(0) => {
                nums.pop();
            }
            _ => return Err(err(line_no, "line is not terminated by 0")),
        }
        if nums.contains(&0) {
            return Err(err(line_no, "0 before end of line"));
        }
        for &x in &nums {
            if x.unsigned_abs() as usize > var_count {
                return Err(err(line_no, &format!("undeclared variable {}", x.abs())));
            }
        }
        match quant {
            Some(q) => {
                if !clauses.is_empty() {
                    return Err(err(line_no, "quantifier line after clauses"));
                }
                let mut vars = Vec::new();
                for &x in &nums {
                    if x < 0 {
                        return Err(err(line_no, "negative variable in quantifier block"));
                    }
                    if !quantified.insert(x as usize) {
                        return Err(err(line_no, &format!("variable {x} quantified twice")));
                    }
                    vars.push(x as usize);
                }
                match blocks.last_mut() {
                    Some((last, vs)) if *last == q => vs.extend(vars),
                    _ => blocks.push((q, vars)),
                }
            }
            None => clauses.push(nums.iter().map(|&x| x as Lit).collect()),
        }
    }
    let var_count = header.ok_or_else(|| err(0, "missing problem line"))?;

    // free variables are existential at the outermost level
    let mut free: Vec<usize> = clauses
        .iter()
        .flatten()
        .map(|l: &Lit| l.unsigned_abs() as usize)
        .filter(|v| !quantified.contains(v))
        .collect();
    free.sort_unstable();
    free.dedup();
    if !free.is_empty() {
        match blocks.first_mut() {
            Some((Quantifier::Exists, vs)) => {
                let mut all = free;
                all.extend(vs.iter().copied());
                *vs = all;
            }
            _ => blocks.insert(0, (Quantifier::Exists, free)),
        }
    }
    Ok(RawQbf { var_count, blocks, clauses })
}

impl RawQbf {
    /// Direct recursive evaluation over the declared prefix.
    pub fn evaluate(&self) -> bool {
        let order: Vec<(Quantifier, usize)> = self
            .blocks
            .iter()
            .flat_map(|(q, vs)| vs.iter().map(move |&v| (*q, v)))
            .collect();
        let mut assign = vec![None; self.var_count + 1];
        fn go(raw: &RawQbf, order: &[(Quantifier, usize)], assign: &mut Vec<Option<bool>>) -> bool {
            match order.split_first() {
                None => raw.clauses.iter().all(|c| {
                    c.iter().any(|&l| assign[l.unsigned_abs() as usize] == Some(l > 0))
                }),
                Some((&(q, v), rest)) => {
                    let mut vals = [false, true].into_iter().map(|b| {
                        assign[v] = Some(b);
                        let r = go(raw, rest, assign);
                        assign[v] = None;
                        r
                    });
                    match q {
                        Quantifier::Forall => vals.all(|x| x),
                        Quantifier::Exists => vals.any(|x| x),
                    }
                }
            }
        }
        go(self, &order, &mut assign)
    }
}

/// Normalizes to the strictly alternating shape, inserting padding variables
/// that do not occur in the matrix. Padding pairs are appended innermost until
/// the formula has at least `pad_min_vars` variables (and at least 2).
pub fn normalize(raw: &RawQbf, pad_min_vars: usize) -> Qbf {
    let mut origin: Vec<Option<usize>> = Vec::new();
    let mut new_index = vec![0usize; raw.var_count + 1];
    let mut expected = Quantifier::Forall;
    for (q, vars) in &raw.blocks {
        for &v in vars {
            if *q != expected {
                origin.push(None);
                expected = expected.flip();
            }
            origin.push(Some(v));
            new_index[v] = origin.len();
            expected = expected.flip();
        }
    }
    if expected == Quantifier::Exists {
        origin.push(None);
    }
    while origin.len() < pad_min_vars.max(2) {
        origin.push(None);
        origin.push(None);
    }
    let clauses = raw
        .clauses
        .iter()
        .filter_map(|c| {
            let mut out: Vec<Lit> = Vec::with_capacity(c.len());
            for &l in c {
                let v = new_index[l.unsigned_abs() as usize] as Lit;
                let nl = if l > 0 { v } else { -v };
                if out.contains(&-nl) {
                    return None;
                }
                if !out.contains(&nl) {
                    out.push(nl);
                }
            }
            Some(out)
        })
        .collect();
    Qbf { n: origin.len() / 2, clauses, origin }
}

impl Qbf {
    /// Builds a normalized formula directly from clauses over `1..=2n`.
    pub fn new(n: usize, clauses: Vec<Vec<Lit>>) -> Result<Qbf> {
        if n == 0 {
            return Err(Error::Format("a formula needs at least one quantifier pair".into()));
        }
        let raw = RawQbf {
            var_count: 2 * n,
            blocks: (1..=2 * n)
                .map(|v| (if v % 2 == 1 { Quantifier::Forall } else { Quantifier::Exists }, vec![v]))
                .collect(),
            clauses,
        };
        for &l in raw.clauses.iter().flatten() {
            if l == 0 || l.unsigned_abs() as usize > 2 * n {
                return Err(Error::Format(format!("literal {l} out of range")));
            }
        }
        Ok(normalize(&raw, 0))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn var_count(&self) -> usize {
        2 * self.n
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn origin(&self) -> &[Option<usize>] {
        &self.origin
    }

    pub fn has_empty_clause(&self) -> bool {
        self.clauses.iter().any(|c| c.is_empty())
    }

    pub fn has_nonempty_clause(&self) -> bool {
        self.clauses.iter().any(|c| !c.is_empty())
    }

    pub fn quantifier(&self, var: usize) -> Quantifier {
        if var % 2 == 1 {
            Quantifier::Forall
        } else {
            Quantifier::Exists
        }
    }

    /// Whether the matrix holds under a complete assignment (`assignment[i]` is `v(i+1)`).
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0)))
    }

    pub fn evaluate(&self) -> bool {
        self.value_from(&[])
    }

    /// Truth of the remaining quantified game once `prefix` is fixed.
    pub fn value_from(&self, prefix: &[bool]) -> bool {
        let mut assign: Vec<Option<bool>> = vec![None; self.var_count()];
        for (i, &b) in prefix.iter().enumerate() {
            assign[i] = Some(b);
        }
        self.go(&mut assign, prefix.len())
    }

    fn go(&self, assign: &mut [Option<bool>], depth: usize) -> bool {
        let mut all_sat = true;
        for c in &self.clauses {
            let mut sat = false;
            let mut open = false;
            for &l in c {
                match assign[l.unsigned_abs() as usize - 1] {
                    Some(b) if b == (l > 0) => sat = true,
                    Some(_) => {}
                    None => open = true,
                }
            }
            if !sat && !open {
                return false;
            }
            all_sat &= sat;
        }
        if all_sat || depth == assign.len() {
            return all_sat;
        }
        let mut branch = |b: bool| {
            assign[depth] = Some(b);
            let r = self.go(assign, depth + 1);
            assign[depth] = None;
            r
        };
        match self.quantifier(depth + 1) {
            Quantifier::Forall => branch(false) && branch(true),
            Quantifier::Exists => branch(false) || branch(true),
        }
    }

    /// Value of the next existential variable keeping the formula true, preferring `false`.
    pub fn existential_witness(&self, partial: &[bool]) -> Result<Option<bool>> {
        if partial.len() % 2 == 0 || partial.len() >= self.var_count() {
            return Err(Error::Parity { len: partial.len(), expected: "odd" });
        }
        Ok(self.pick(partial, true))
    }

    /// Value of the next universal variable keeping the formula false, preferring `false`.
    pub fn universal_refutation(&self, partial: &[bool]) -> Result<Option<bool>> {
        if partial.len() % 2 == 1 || partial.len() >= self.var_count() {
            return Err(Error::Parity { len: partial.len(), expected: "even" });
        }
        Ok(self.pick(partial, false))
    }

    fn pick(&self, partial: &[bool], want: bool) -> Option<bool> {
        let mut p = partial.to_vec();
        [false, true].into_iter().find(|&b| {
            p.push(b);
            let ok = self.value_from(&p) == want;
            p.pop();
            ok
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn phi_t() -> Qbf {
        Qbf::new(1, vec![vec![1, 2], vec![-1, 2]]).unwrap()
    }

    fn phi_f() -> Qbf {
        Qbf::new(1, vec![vec![1, 2], vec![1, -2]]).unwrap()
    }

    /// Independent oracle: enumerate all 2^(2n) assignments as a game tree.
    fn enumerate(q: &Qbf) -> bool {
        fn rec(q: &Qbf, a: &mut Vec<bool>) -> bool {
            if a.len() == q.var_count() {
                return q.satisfied_by(a);
            }
            let vals: Vec<bool> = [false, true]
                .iter()
                .map(|&b| {
                    a.push(b);
                    let r = rec(q, a);
                    a.pop();
                    r
                })
                .collect();
            if a.len() % 2 == 0 {
                vals[0] && vals[1]
            } else {
                vals[0] || vals[1]
            }
        }
        rec(q, &mut Vec::new())
    }

    #[test]
    fn parse_simple() {
        let raw = parse_qdimacs("p cnf 2 1\na 1 0\ne 2 0\n1 2 0\n").unwrap();
        assert_eq!(raw.blocks, vec![(Quantifier::Forall, vec![1]), (Quantifier::Exists, vec![2])]);
        assert_eq!(raw.clauses, vec![vec![1, 2]]);
        let q = normalize(&raw, 0);
        assert_eq!(q.n(), 1);
        assert_eq!(q.clauses(), &[vec![1, 2]]);
    }

    #[test]
    fn parse_missing_zero_names_line() {
        match parse_qdimacs("p cnf 2 1\na 1 0\ne 2 0\n1 2\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_undeclared_and_garbage() {
        assert!(matches!(parse_qdimacs("p cnf 1 1\n1 2 0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_qdimacs("p cnf 2 1\na x 0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_qdimacs("1 2 0\n").is_err());
        assert!(parse_qdimacs("p cnf 2 1\n1 0\na 1 0\n").is_err());
    }

    #[test]
    fn parse_single_existential_block() {
        let raw = parse_qdimacs("p cnf 1 1\ne 1 0\n1 0\n").unwrap();
        assert_eq!(raw.blocks, vec![(Quantifier::Exists, vec![1])]);
        let q = normalize(&raw, 0);
        assert_eq!(q.var_count(), 2);
        assert_eq!(q.origin(), &[None, Some(1)]);
        assert_eq!(q.clauses(), &[vec![2]]);
        assert!(raw.evaluate());
        assert!(q.evaluate());
    }

    #[test]
    fn tautology_removed_and_padded() {
        let raw = parse_qdimacs("p cnf 1 1\na 1 0\n1 -1 0\n").unwrap();
        let q = normalize(&raw, 0);
        assert_eq!(q.var_count(), 2);
        assert!(q.clauses().is_empty());
        assert_eq!(q.origin(), &[Some(1), None]);
        assert!(q.evaluate());
    }

    #[test]
    fn pad_min_vars() {
        let q = normalize(&parse_qdimacs("p cnf 2 1\na 1 0\ne 2 0\n1 2 0\n").unwrap(), 8);
        assert_eq!(q.var_count(), 8);
        assert_eq!(q.clauses(), &[vec![1, 2]]);
    }

    #[test]
    fn evaluate_examples() {
        assert!(phi_t().evaluate());
        assert!(!phi_f().evaluate());
        assert!(Qbf::new(2, vec![]).unwrap().evaluate());
        assert_eq!(phi_t().evaluate(), enumerate(&phi_t()));
        assert_eq!(phi_f().evaluate(), enumerate(&phi_f()));
    }

    #[test]
    fn witness_and_refutation() {
        assert_eq!(phi_t().existential_witness(&[false]).unwrap(), Some(true));
        assert_eq!(phi_f().existential_witness(&[false]).unwrap(), None);
        assert_eq!(Qbf::new(1, vec![]).unwrap().existential_witness(&[true]).unwrap(), Some(false));
        assert_eq!(phi_f().universal_refutation(&[]).unwrap(), Some(false));
        assert_eq!(phi_t().universal_refutation(&[]).unwrap(), None);
        let dead = Qbf::new(1, vec![vec![]]).unwrap();
        assert_eq!(dead.universal_refutation(&[]).unwrap(), Some(false));
        assert!(phi_t().existential_witness(&[]).is_err());
        assert!(phi_t().universal_refutation(&[true]).is_err());
    }

    fn arb_raw() -> impl Strategy<Value = RawQbf> {
        let blocks = proptest::collection::vec(any::<bool>(), 0..=4);
        let clauses = proptest::collection::vec(
            proptest::collection::vec((1i32..=4, any::<bool>()), 0..=3),
            0..=4,
        );
        (blocks, clauses).prop_map(|(qs, cs)| {
            let nv = qs.len().max(1);
            let mut blocks: Vec<(Quantifier, Vec<usize>)> = Vec::new();
            for (i, q) in qs.iter().enumerate() {
                let q = if *q { Quantifier::Forall } else { Quantifier::Exists };
                match blocks.last_mut() {
                    Some((l, vs)) if *l == q => vs.push(i + 1),
                    _ => blocks.push((q, vec![i + 1])),
                }
            }
            if qs.is_empty() {
                blocks.push((Quantifier::Exists, vec![1]));
            }
            let clauses = cs
                .into_iter()
                .map(|c| {
                    c.into_iter()
                        .map(|(v, s)| {
                            let v = (v - 1) % nv as i32 + 1;
                            if s { v } else { -v }
                        })
                        .collect()
                })
                .collect();
            RawQbf { var_count: nv, blocks, clauses }
        })
    }

    proptest! {
        #[test]
        fn normalize_preserves_truth(raw in arb_raw(), pad in 0usize..6) {
            let q = normalize(&raw, pad);
            prop_assert_eq!(q.var_count() % 2, 0);
            prop_assert!(q.var_count() >= pad.max(2));
            prop_assert_eq!(q.evaluate(), raw.evaluate());
            prop_assert_eq!(q.evaluate(), enumerate(&q));
        }

        #[test]
        fn strategies_follow_truth(raw in arb_raw()) {
            let q = normalize(&raw, 0);
            prop_assume!(q.var_count() <= 4);
            // walk every universal choice (resp. existential) and follow the helper
            fn walk(q: &Qbf, a: &mut Vec<bool>, truth: bool) -> bool {
                if a.len() == q.var_count() {
                    return q.satisfied_by(a) == truth;
                }
                let follow_exists = truth;
                let my_turn = (a.len() % 2 == 1) == follow_exists;
                if my_turn {
                    let b = if truth {
                        q.existential_witness(a).unwrap()
                    } else {
                        q.universal_refutation(a).unwrap()
                    };
                    let Some(b) = b else { return false };
                    a.push(b);
                    let r = walk(q, a, truth);
                    a.pop();
                    r
                } else {
                    [false, true].iter().all(|&b| {
                        a.push(b);
                        let r = walk(q, a, truth);
                        a.pop();
                        r
                    })
                }
            }
            let truth = q.evaluate();
            prop_assert!(walk(&q, &mut Vec::new(), truth));
        }
    }
}
