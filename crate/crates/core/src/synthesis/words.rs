//! Breadth-first search for short generator words approximating a 2×2 target.

use std::collections::HashSet;

use crate::gates::Gate;
use crate::linalg::{self, C2};
use crate::register::BitKind;

/// Upper bound on stored distinct words per search.
pub const NODE_CAP: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct GateWord {
    /// Generator gates in product order: the matrix is `g[0]·g[1]·…`, so the
    /// last gate acts first.
    pub gates: Vec<Gate>,
    pub matrix: C2,
    pub error: f64,
    /// `error < tol` was met.
    pub within_tol: bool,
}

impl GateWord {
    pub fn names(&self) -> String {
        self.gates.iter().map(|g| g.name()).collect::<Vec<_>>().join(" ")
    }
}

pub fn generators(kind: BitKind) -> [Gate; 2] {
    match kind {
        BitKind::Qubit => [Gate::H, Gate::T],
        BitKind::Hybit => [Gate::Tau, Gate::T],
    }
}

/// Projective distance on 2×2 matrices with the trace-aligned phase.
pub fn distance(a: &C2, b: &C2) -> f64 {
    let t: num_complex::Complex64 = b.iter().zip(a.iter()).map(|(y, x)| y.conj() * x).sum();
    let phi = if t.norm() < 1e-300 { linalg::ONE } else { t / t.norm() };
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - phi * y).norm()))
}

/// Phase-free hash key: rotate so the largest entry is real positive, round.
fn key(m: &C2) -> [i64; 8] {
    let (idx, _) = m
        .iter()
        .enumerate()
        .fold((0, -1.0), |(bi, bv), (i, z)| if z.norm() > bv + 1e-9 { (i, z.norm()) } else { (bi, bv) });
    let pivot = m[idx];
    let phase = pivot.conj() / pivot.norm();
    let mut out = [0i64; 8];
    for (k, z) in m.iter().enumerate() {
        let w = z * phase;
        out[2 * k] = (w.re * 1e8).round() as i64;
        out[2 * k + 1] = (w.im * 1e8).round() as i64;
    }
    out
}

/// Distinct words in breadth-first order (by length, then generator order).
#[derive(Debug, Clone)]
pub struct WordTable {
    kind: BitKind,
    // (matrix, parent, generator index)
    nodes: Vec<(C2, usize, u8)>,
}

impl WordTable {
    /// All distinct words of length `≤ depth_max`, up to [`NODE_CAP`] of them.
    pub fn build(kind: BitKind, depth_max: usize) -> Self {
        Self::grow(kind, depth_max, |_| false)
    }

    fn grow(kind: BitKind, depth_max: usize, mut stop: impl FnMut(&C2) -> bool) -> Self {
        let gen_m: Vec<C2> = generators(kind).iter().map(|g| linalg::to_c2(&g.matrix())).collect();
        let mut nodes = vec![(linalg::eye2(), usize::MAX, 0u8)];
        let mut seen: HashSet<[i64; 8]> = HashSet::from([key(&linalg::eye2())]);
        if stop(&linalg::eye2()) {
            return Self { kind, nodes };
        }
        let mut frontier = 0..1;
        for _ in 0..depth_max {
            let start = nodes.len();
            for parent in frontier.clone() {
                for (gi, g) in gen_m.iter().enumerate() {
                    if nodes.len() >= NODE_CAP {
                        return Self { kind, nodes };
                    }
                    let m = nodes[parent].0 * g;
                    if !seen.insert(key(&m)) {
                        continue;
                    }
                    nodes.push((m, parent, gi as u8));
                    if stop(&m) {
                        return Self { kind, nodes };
                    }
                }
            }
            frontier = start..nodes.len();
            if frontier.is_empty() {
                break;
            }
        }
        Self { kind, nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn gates(&self, mut at: usize) -> Vec<Gate> {
        let gens = generators(self.kind);
        let mut gates = Vec::new();
        while at != 0 {
            gates.push(gens[self.nodes[at].2 as usize]);
            at = self.nodes[at].1;
        }
        gates.reverse();
        gates
    }

    /// Closest stored word; ties keep the earlier (shorter) word.
    pub fn best(&self, target: &C2, tol: f64) -> GateWord {
        let (mut best_d, mut best_i) = (f64::INFINITY, 0);
        for (i, node) in self.nodes.iter().enumerate() {
            let d = distance(&node.0, target);
            if d < best_d {
                (best_d, best_i) = (d, i);
            }
        }
        GateWord {
            gates: self.gates(best_i),
            matrix: self.nodes[best_i].0,
            error: best_d,
            within_tol: best_d < tol,
        }
    }
}

/// Best word of length `≤ depth_max`, enumerated by length then generator
/// order; ties keep the earlier word. The empty word is the identity.
pub fn word_search(target: &C2, kind: BitKind, tol: f64, depth_max: usize) -> GateWord {
    WordTable::grow(kind, depth_max, |m| distance(m, target) == 0.0).best(target, tol)
}

/// Ordered product of the word's generators.
pub fn word_matrix(gates: &[Gate]) -> C2 {
    gates
        .iter()
        .fold(linalg::eye2(), |acc, g| acc * linalg::to_c2(&g.matrix()))
}
