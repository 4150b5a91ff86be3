//! Edge queries on the quantum Bruhat graph of type C_n.
//!
//! Two independent criteria: [`edge_type_by_length`] counts inversions, while
//! [`edge_type_by_pattern`] reads the signed window on the barred interval
//! 1 < 2 < ⋯ < n < n̄ < ⋯ < 1̄. The pattern test is the one used by the
//! enumeration; the length test is its oracle.

use serde::Serialize;

use crate::rootsys::{pairing, positive_roots, Root, SignedPerm, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EdgeKind {
    Bruhat,
    Quantum,
    None,
}

impl EdgeKind {
    pub fn is_edge(self) -> bool {
        self != EdgeKind::None
    }
}

/// Classifies w → w·s_α by ℓ(w s_α) - ℓ(w).
pub fn edge_type_by_length(w: &SignedPerm, alpha: &Root) -> EdgeKind {
    debug_assert!(alpha.is_positive());
    let n = w.rank();
    let diff = w.reflect(alpha).length() as i64 - w.length() as i64;
    if diff == 1 {
        EdgeKind::Bruhat
    } else if diff == 1 - 2 * pairing(&Weight::rho(n), alpha) {
        EdgeKind::Quantum
    } else {
        EdgeKind::None
    }
}

/// Position of a signed value on the barred interval: j ↦ j, -j ↦ 2n+1-j.
fn key(v: i32, n: usize) -> i32 {
    if v > 0 {
        v
    } else {
        2 * n as i32 + 1 + v
    }
}

/// Positions strictly between `a` and `b` on the barred interval, as signed indices.
fn between(a: i32, b: i32, n: usize) -> impl Iterator<Item = i32> {
    let (ka, kb) = (key(a, n), key(b, n));
    let n = n as i32;
    (ka + 1..kb).map(move |k| if k <= n { k } else { k - 2 * n - 1 })
}

/// The (i, j) pair of barred positions labelling a positive root:
/// ε_i-ε_j ↦ (i, j), ε_i+ε_j ↦ (i, j̄), 2ε_i ↦ (i, ī).
fn root_positions(alpha: &Root) -> (i32, i32) {
    let c = alpha.weight().coords();
    let nz: Vec<(i32, i64)> = c
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(i, &v)| (i as i32 + 1, v))
        .collect();
    match nz.as_slice() {
        [(i, _)] => (*i, -*i),
        [(i, _), (j, b)] if *b < 0 => (*i, *j),
        [(i, _), (j, _)] => (*i, -*j),
        _ => unreachable!("positive root"),
    }
}

/// Classifies w → w·s_α by the signed-window case analysis (five cases).
pub fn edge_type_by_pattern(w: &SignedPerm, alpha: &Root) -> EdgeKind {
    debug_assert!(alpha.is_positive());
    let n = w.rank();
    let (p, q) = root_positions(alpha);
    let wp = key(w.at(p), n);
    let wq = key(w.at(q), n);
    let mid = || between(p, q, n).map(|k| key(w.at(k), n));

    if q > 0 {
        // (i, j): cases (1) and (2).
        if wp < wq {
            if mid().any(|v| wp < v && v < wq) {
                EdgeKind::None
            } else {
                EdgeKind::Bruhat
            }
        } else if mid().all(|v| wq < v && v < wp) {
            EdgeKind::Quantum
        } else {
            EdgeKind::None
        }
    } else if q != -p {
        // (i, j̄): case (3), Bruhat only.
        let same_sign = (w.at(p) > 0) == (w.at(q) > 0);
        if wp < wq && same_sign && !mid().any(|v| wp < v && v < wq) {
            EdgeKind::Bruhat
        } else {
            EdgeKind::None
        }
    } else {
        // (i, ī): cases (4) and (5).
        if wp < wq {
            if mid().any(|v| wp < v && v < wq) {
                EdgeKind::None
            } else {
                EdgeKind::Bruhat
            }
        } else if mid().all(|v| wq < v && v < wp) {
            EdgeKind::Quantum
        } else {
            EdgeKind::None
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QbgEdge {
    pub from: SignedPerm,
    pub to: SignedPerm,
    pub root: Root,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct QbgDump {
    pub rank: usize,
    pub vertices: Vec<SignedPerm>,
    pub edges: Vec<QbgEdge>,
}

/// The whole graph for rank n (debug output only).
pub fn qbg_dump(n: usize) -> QbgDump {
    let vertices = SignedPerm::all(n);
    let roots = positive_roots(n);
    let mut edges = Vec::new();
    for w in &vertices {
        for a in &roots {
            let kind = edge_type_by_pattern(w, a);
            if kind.is_edge() {
                edges.push(QbgEdge {
                    from: w.clone(),
                    to: w.reflect(a),
                    root: a.clone(),
                    kind,
                });
            }
        }
    }
    QbgDump {
        rank: n,
        vertices,
        edges,
    }
}
