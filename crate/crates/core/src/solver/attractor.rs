//! Backward induction over the packed position space.
//!
//! A state key packs `(cop multiset rank, robber vertex, side to move)`.
//! Multisets are ranked in the combinatorial number system, so the whole
//! space is a dense array and the cop-win set is a least fixed point
//! computed by retrograde propagation with successor counters.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::game::{GameSpec, Position, Side};
use crate::graph::{Label, VertexId};

/// Sorted cop multisets of a fixed size, densely ranked.
#[derive(Debug, Clone)]
pub struct Multisets {
    nv: usize,
    k: usize,
    binom: Vec<Vec<u64>>,
    table: Vec<u32>,
}

/// `C(n + k - 1, k)`, saturating.
pub fn multiset_count(nv: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc.saturating_mul(nv as u128 + i) / (i + 1);
    }
    acc
}

/// Number of packed keys `C(|V|+n-1, n) * |V| * 2`.
pub fn estimate_keys(nv: usize, k: usize) -> u128 {
    multiset_count(nv, k).saturating_mul(nv as u128).saturating_mul(2)
}

impl Multisets {
    pub fn new(nv: usize, k: usize) -> Self {
        let top = nv + k + 1;
        let mut binom = vec![vec![0u64; k + 2]; top + 1];
        for n in 0..=top {
            binom[n][0] = 1;
            for r in 1..=(k + 1).min(n) {
                binom[n][r] = binom[n - 1][r - 1] + if r <= n - 1 { binom[n - 1][r] } else { 0 };
            }
        }
        let count = multiset_count(nv, k) as usize;
        let mut ms = Multisets { nv, k, binom, table: vec![0; count * k] };
        let mut cur = vec![0usize; k];
        loop {
            let r = ms.rank(&cur);
            for (i, &c) in cur.iter().enumerate() {
                ms.table[r * k + i] = c as u32;
            }
            // next non-decreasing tuple
            let mut i = k;
            loop {
                if i == 0 {
                    return ms;
                }
                i -= 1;
                if cur[i] + 1 < nv {
                    let v = cur[i] + 1;
                    for c in cur.iter_mut().skip(i) {
                        *c = v;
                    }
                    break;
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.table.len() / self.k.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn rank(&self, sorted: &[usize]) -> usize {
        sorted
            .iter()
            .enumerate()
            .map(|(i, &c)| self.binom[c + i][i + 1] as usize)
            .sum()
    }

    #[inline]
    pub fn get(&self, rank: usize) -> &[u32] {
        &self.table[rank * self.k..(rank + 1) * self.k]
    }

    pub fn vertex_count(&self) -> usize {
        self.nv
    }
}

/// Solved position space.
#[derive(Debug, Clone)]
pub struct Attractor {
    pub(crate) ms: Multisets,
    nv: usize,
    /// Attractor rank per key: plies to forced capture, 0 when the robber
    /// escapes (or the key lies outside the explored space).
    rank: Vec<u32>,
    in_space: Option<Vec<bool>>,
    max_rank: u32,
}

impl Attractor {
    #[inline]
    pub fn key(&self, ms_rank: usize, robber: VertexId, side: Side) -> usize {
        ((ms_rank * self.nv + robber) << 1) | (side == Side::Robber) as usize
    }

    pub fn key_of(&self, pos: &Position) -> usize {
        self.key(self.ms.rank(&pos.cops), pos.robber, pos.to_move)
    }

    /// Rank of a position; `None` when the robber escapes from it.
    pub fn rank(&self, pos: &Position) -> Option<u32> {
        let r = self.rank[self.key_of(pos)];
        (r > 0).then_some(r)
    }

    pub fn is_cop_win(&self, pos: &Position) -> bool {
        self.rank[self.key_of(pos)] > 0
    }

    pub fn contains(&self, pos: &Position) -> bool {
        match &self.in_space {
            None => true,
            Some(s) => s[self.key_of(pos)],
        }
    }

    pub fn max_rank(&self) -> u32 {
        self.max_rank
    }

    pub fn state_count(&self) -> usize {
        match &self.in_space {
            None => self.rank.len(),
            Some(s) => s.iter().filter(|&&b| b).count(),
        }
    }

    pub fn multisets(&self) -> &Multisets {
        &self.ms
    }

    /// Keys in the cop-win set.
    pub fn cop_win_count(&self) -> usize {
        self.rank.iter().filter(|&&r| r > 0).count()
    }
}

/// Compressed successor lists of cop multisets (symmetric, so also predecessors).
struct CopMoves {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

fn cop_moves(spec: &GameSpec, ms: &Multisets) -> CopMoves {
    let g = &spec.graph;
    let k = spec.cops;
    let closed: Vec<Vec<usize>> = (0..g.vertex_count())
        .map(|v| {
            let mut n: Vec<usize> = g.adj(v).iter().map(|&(w, _)| w).filter(|&w| w != v).collect();
            n.push(v);
            n
        })
        .collect();
    let mut offsets = Vec::with_capacity(ms.len() + 1);
    let mut targets = Vec::new();
    let mut buf = vec![0usize; k];
    let mut idx = vec![0usize; k];
    offsets.push(0);
    for m in 0..ms.len() {
        let cops: Vec<usize> = ms.get(m).iter().map(|&c| c as usize).collect();
        let start = targets.len();
        idx.iter_mut().for_each(|i| *i = 0);
        'outer: loop {
            for i in 0..k {
                buf[i] = closed[cops[i]][idx[i]];
            }
            buf.sort_unstable();
            targets.push(ms.rank(&buf) as u32);
            let mut i = 0;
            loop {
                if i == k {
                    break 'outer;
                }
                idx[i] += 1;
                if idx[i] < closed[cops[i]].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
        targets[start..].sort_unstable();
        let mut w = start;
        for r in start..targets.len() {
            if r == start || targets[r] != targets[w - 1] {
                targets[w] = targets[r];
                w += 1;
            }
        }
        targets.truncate(w);
        offsets.push(targets.len());
    }
    CopMoves { offsets, targets }
}

impl CopMoves {
    #[inline]
    fn of(&self, m: usize) -> &[u32] {
        &self.targets[self.offsets[m]..self.offsets[m + 1]]
    }
}

pub fn check_budget(spec: &GameSpec, budget: u128) -> Result<()> {
    let estimate = estimate_keys(spec.graph.vertex_count(), spec.cops);
    if estimate > budget {
        return Err(Error::Infeasible { estimate, budget });
    }
    Ok(())
}

/// Computes the cop-win set. With `starts`, only keys reachable from them are
/// explored; otherwise the full space is solved.
pub fn compute(spec: &GameSpec, starts: Option<&[Position]>, budget: u128) -> Result<Attractor> {
    check_budget(spec, budget)?;
    let g = &spec.graph;
    let nv = g.vertex_count();
    let ms = Multisets::new(nv, spec.cops);
    let moves = cop_moves(spec, &ms);
    let total = ms.len() * nv * 2;

    // threat[r * nv + u]: a cop on u can capture a robber on r
    let mut threat = vec![false; nv * nv];
    for (u, v, l) in g.edges() {
        if l == Label::Unprotected {
            threat[v * nv + u] = true;
            threat[u * nv + v] = true;
        }
    }
    let closed: Vec<Vec<usize>> = (0..nv)
        .map(|v| {
            let mut n: Vec<usize> = g.adj(v).iter().map(|&(w, _)| w).filter(|&w| w != v).collect();
            n.push(v);
            n
        })
        .collect();

    let key = |m: usize, r: usize, robber_to_move: bool| ((m * nv + r) << 1) | robber_to_move as usize;

    let in_space = starts.map(|starts| {
        let mut seen = vec![false; total];
        let mut stack = Vec::new();
        for p in starts {
            let k = key(ms.rank(&p.cops), p.robber, p.to_move == Side::Robber);
            if !seen[k] {
                seen[k] = true;
                stack.push(k);
            }
        }
        while let Some(k) = stack.pop() {
            let robber_side = k & 1 == 1;
            let m = (k >> 1) / nv;
            let r = (k >> 1) % nv;
            if robber_side {
                for &r2 in &closed[r] {
                    let k2 = key(m, r2, false);
                    if !seen[k2] {
                        seen[k2] = true;
                        stack.push(k2);
                    }
                }
            } else {
                for &m2 in moves.of(m) {
                    let k2 = key(m2 as usize, r, true);
                    if !seen[k2] {
                        seen[k2] = true;
                        stack.push(k2);
                    }
                }
            }
        }
        seen
    });
    let live = |k: usize| in_space.as_ref().map_or(true, |s| s[k]);

    let mut rank = vec![0u32; total];
    let mut pending: Vec<u16> = vec![0; total];
    let mut queue = VecDeque::new();
    for m in 0..ms.len() {
        let cops = ms.get(m);
        for r in 0..nv {
            let kc = key(m, r, false);
            if live(kc) && cops.iter().any(|&c| threat[r * nv + c as usize]) {
                rank[kc] = 1;
                queue.push_back(kc);
            }
            let kr = key(m, r, true);
            pending[kr] = closed[r].len() as u16;
        }
    }

    let mut max_rank = 0;
    while let Some(k) = queue.pop_front() {
        let rk = rank[k];
        max_rank = max_rank.max(rk);
        let m = (k >> 1) / nv;
        let r = (k >> 1) % nv;
        if k & 1 == 0 {
            // cops-to-move key won: robber keys that could have moved here lose one escape
            for &rp in &closed[r] {
                let kp = key(m, rp, true);
                if rank[kp] == 0 && live(kp) {
                    pending[kp] -= 1;
                    if pending[kp] == 0 {
                        rank[kp] = rk + 1;
                        queue.push_back(kp);
                    }
                }
            }
        } else {
            for &mp in moves.of(m) {
                let kp = key(mp as usize, r, false);
                if rank[kp] == 0 && live(kp) {
                    rank[kp] = rk + 1;
                    queue.push_back(kp);
                }
            }
        }
    }

    Ok(Attractor { ms, nv, rank, in_space, max_rank })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset_ranking_is_a_bijection() {
        for (nv, k) in [(1, 1), (4, 1), (4, 2), (5, 3), (7, 4)] {
            let ms = Multisets::new(nv, k);
            assert_eq!(ms.len() as u128, multiset_count(nv, k));
            for r in 0..ms.len() {
                let cops: Vec<usize> = ms.get(r).iter().map(|&c| c as usize).collect();
                assert!(cops.windows(2).all(|w| w[0] <= w[1]));
                assert_eq!(ms.rank(&cops), r);
            }
        }
    }

    #[test]
    fn estimate_formula() {
        assert_eq!(estimate_keys(4, 1), 4 * 4 * 2);
        assert_eq!(estimate_keys(10, 3), 220 * 10 * 2);
    }
}
