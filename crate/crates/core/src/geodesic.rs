//! Exact ordinal distances over the quotient multigraph.
//!
//! Absorption makes path length context-dependent, so plain shortest-path
//! state (one cost per node) is not enough. The search state carries, per
//! rank, whether the current live run has already traversed a tip (further
//! content is then free) and how much already-paid content a future tip of
//! each rank could still absorb. Costs are monotone along any extension,
//! so least-first extraction under the ordinal order is valid; restricting
//! to node-simple quotient paths keeps the state space finite.
//!
//! `oracle_min_length` is the independent check: exhaustive enumeration of
//! simple quotient paths scored by the run-decomposition length rule. The
//! two share nothing but the edge set.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use crate::error::{Error, Result};
use crate::graph::{
    occ_conflict, quotient, End, Family, FamilyKind, GadgetKind, Graph, Occ, Quotient, RailSide,
};
use crate::length::{path_length, Item, PathDesc, PathNode, PathStep, Traversal};
use crate::ordinal::{AffineFamilyBranch, Exp, Ordinal};

/// Per-rank absorption state of a partially traversed path.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RunState {
    /// bit s set: the live s-run has traversed an s-tip (content is free)
    flags: u64,
    /// bucket m: already-paid content still absorbable by a tip of rank >= m
    pending: Vec<Ordinal>,
}

impl RunState {
    fn fresh(buckets: usize) -> Self {
        RunState { flags: 0, pending: vec![Ordinal::zero(); buckets] }
    }
}

/// A (cost, state) pair being folded along gadget content.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Folded {
    pub cost: Ordinal,
    pub state: RunState,
}

fn fold_item(f: &mut Folded, it: Item) {
    match it {
        Item::Branches(c) => {
            if f.state.flags != 0 {
                return; // inside a run that already traversed a tip
            }
            let o = Ordinal::natural(c);
            f.cost = f.cost.nat_sum(&o);
            f.state.pending[0] = f.state.pending[0].nat_sum(&o);
        }
        Item::Tip(t) => {
            let t = t as usize;
            if f.state.flags >> (t + 1) != 0 {
                // a live higher run already traversed its tip: absorbed
                f.state.flags |= 1 << t;
                return;
            }
            let mut absorbed = Ordinal::zero();
            for m in 0..=t.min(f.state.pending.len() - 1) {
                absorbed = absorbed.nat_sum(&f.state.pending[m]);
                f.state.pending[m] = Ordinal::zero();
            }
            let w = Ordinal::w_pow(Exp::Nat(t as u32 + 1));
            f.cost = f.cost.nat_diff(&absorbed).expect("pending exceeds cost").nat_sum(&w);
            if t + 1 < f.state.pending.len() {
                f.state.pending[t + 1] = f.state.pending[t + 1].nat_sum(&w);
            }
            f.state.flags |= 1 << t;
        }
    }
}

fn fold_break(f: &mut Folded, r: u32) {
    let r = r as usize;
    if r == 0 {
        return;
    }
    // a rank-r node breaks all runs of rank < r
    f.state.flags &= !((1u64 << r) - 1);
    let mut moved = Ordinal::zero();
    for m in 0..r.min(f.state.pending.len()) {
        moved = moved.nat_sum(&std::mem::take(&mut f.state.pending[m]));
    }
    if r < f.state.pending.len() {
        f.state.pending[r] = f.state.pending[r].nat_sum(&moved);
    }
    // else: no tip of rank >= r exists; the content is committed for good
}

fn fold_traversal(f: &mut Folded, t: &Traversal) {
    for (i, it) in t.items.iter().enumerate() {
        if i > 0 {
            fold_break(f, t.breaks[i - 1]);
        }
        fold_item(f, *it);
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Key {
    node: usize,
    mask: u128,
    state: RunState,
    occ: Vec<(usize, Occ)>,
}

/// One settled search state: minimal cost for its exact (node, visited,
/// run-state) combination.
#[derive(Debug, Clone)]
pub struct Settled {
    pub node: usize,
    pub cost: Ordinal,
    pub state: RunState,
}

pub struct Exhaust {
    /// minimal distance per named node
    pub dist: Vec<Option<Ordinal>>,
    /// every settled state in pop order
    pub settled: Vec<Settled>,
}

pub(crate) fn buckets_for(g: &Graph) -> usize {
    let maxtip = g.gadgets.iter().map(|gd| gd.rank()).max().unwrap_or(0) as usize;
    maxtip + 2
}

/// Least-first exhaustion of all simple-path arrival states from `x`.
/// `target`: stop as soon as this node is settled (pure distance query).
pub(crate) fn exhaust(g: &Graph, q: &Quotient, x: usize, target: Option<usize>) -> Exhaust {
    assert!(g.nodes.len() <= 128, "quotient too large for the search mask");
    let buckets = buckets_for(g);
    let mut dist: Vec<Option<Ordinal>> = vec![None; g.nodes.len()];
    let mut settled = Vec::new();
    let mut seen: HashSet<Key> = HashSet::new();

    // heap entries: Reverse((cost, insertion)) -> index into store
    let mut store: Vec<(Key, Ordinal)> = Vec::new();
    let mut heap: BinaryHeap<Reverse<(Ordinal, u64, usize)>> = BinaryHeap::new();
    let mut counter = 0u64;

    let start = Key {
        node: x,
        mask: 1u128 << x,
        state: RunState::fresh(buckets),
        occ: Vec::new(),
    };
    store.push((start, Ordinal::zero()));
    heap.push(Reverse((Ordinal::zero(), counter, 0)));

    while let Some(Reverse((cost, _, ix))) = heap.pop() {
        let (key, _) = store[ix].clone();
        if !seen.insert(key.clone()) {
            continue;
        }
        if dist[key.node].is_none() {
            dist[key.node] = Some(cost.clone());
        }
        settled.push(Settled { node: key.node, cost: cost.clone(), state: key.state.clone() });
        if target == Some(key.node) {
            break;
        }
        for &ei in &q.adj[key.node] {
            let e = &q.edges[ei];
            let (other, trav) = if e.u == key.node {
                (e.v, e.traversal.clone())
            } else {
                (e.u, e.traversal.reversed())
            };
            if other == key.node || key.mask >> other & 1 == 1 {
                continue;
            }
            if occ_conflict(&key.occ, &e.occ) {
                continue;
            }
            let mut f = Folded { cost: cost.clone(), state: key.state.clone() };
            fold_traversal(&mut f, &trav);
            fold_break(&mut f, g.nodes[other].rank);
            let mut occ = key.occ.clone();
            occ.extend_from_slice(&e.occ);
            occ.sort_unstable_by(|a, b| format!("{:?}", a).cmp(&format!("{:?}", b)));
            let next = Key { node: other, mask: key.mask | 1u128 << other, state: f.state, occ };
            if !seen.contains(&next) {
                counter += 1;
                store.push((next, f.cost.clone()));
                heap.push(Reverse((f.cost, counter, store.len() - 1)));
            }
        }
    }
    Exhaust { dist, settled }
}

/// Exact distance between two named nodes: the minimum of `path_length`
/// over all two-ended paths from x to y.
pub fn distance(g: &Graph, x: &str, y: &str) -> Result<Ordinal> {
    let xi = g.node_ix(x)?;
    let yi = g.node_ix(y)?;
    if xi == yi {
        return Ok(Ordinal::zero());
    }
    let q = quotient(g);
    let ex = exhaust(g, &q, xi, Some(yi));
    ex.dist[yi]
        .clone()
        .ok_or_else(|| Error::Disconnected(format!("no path from {} to {}", x, y)))
}

// ---------------------------------------------------------------------------
// family distances

/// How a family member at index k is reached from an entry node.
#[derive(Debug, Clone)]
enum Entry {
    /// continue along the chain: k links of the family's rank
    /// (`lead_branches` extra branches first — ladder rung crossings)
    Finite { node: usize, rank: u32, lead_branches: u64 },
    /// drop in through a tip of the given rank
    Tip { node: usize, rank: u32 },
}

fn chain_fold(f: &mut Folded, rank: u32, k: u64, lead_branches: u64) {
    if rank == 0 {
        fold_item(f, Item::Branches(k + lead_branches));
    } else {
        debug_assert_eq!(lead_branches, 0);
        for i in 0..k {
            if i > 0 {
                fold_break(f, rank);
            }
            fold_item(f, Item::Tip(rank - 1));
            fold_break(f, rank - 1);
            fold_item(f, Item::Tip(rank - 1));
        }
    }
}

fn family_entries(g: &Graph, fam: &Family) -> Vec<Entry> {
    let gd = &g.gadgets[fam.gadget];
    match (&fam.kind, &gd.kind) {
        (FamilyKind::Ray, GadgetKind::Ray { rank, from, tip }) => {
            let mut v = vec![Entry::Finite { node: *from, rank: *rank, lead_branches: 0 }];
            if let End::Node(t) = tip {
                v.push(Entry::Tip { node: *t, rank: *rank });
            }
            v
        }
        (FamilyKind::EndlessInterior, GadgetKind::Endless { rank, tip_a, tip_b }) => {
            let mut v = Vec::new();
            for t in [tip_a, tip_b] {
                if let End::Node(n) = t {
                    v.push(Entry::Tip { node: *n, rank: *rank });
                }
            }
            v
        }
        (
            FamilyKind::LadderRail(side),
            GadgetKind::Ladder { base_a, base_b, tip_a, tip_b, probes_a, probes_b },
        ) => {
            let (base, xbase, tip, xtip, own_probes, xprobes) = match side {
                RailSide::A => (base_a, base_b, tip_a, tip_b, probes_a, probes_b),
                RailSide::B => (base_b, base_a, tip_b, tip_a, probes_b, probes_a),
            };
            let mut v = vec![
                Entry::Finite { node: *base, rank: 0, lead_branches: 0 },
                Entry::Finite { node: *xbase, rank: 0, lead_branches: 1 },
                Entry::Tip { node: *tip, rank: 0 },
                Entry::Tip { node: *xtip, rank: 0 },
            ];
            for (_, n) in own_probes {
                v.push(Entry::Finite { node: *n, rank: 0, lead_branches: 0 });
            }
            for (_, n) in xprobes {
                v.push(Entry::Finite { node: *n, rank: 0, lead_branches: 1 });
            }
            v
        }
        (FamilyKind::SegmentInterior, GadgetKind::Segment { .. }) => Vec::new(),
        _ => unreachable!("family kind matches gadget kind"),
    }
}

/// Symbolic distance from x to every member of an infinite interior family,
/// as a pointwise minimum of constant and affine branches.
#[derive(Debug, Clone)]
pub struct FamilyDistance {
    pub source: String,
    pub family: String,
    pub branches: Vec<AffineFamilyBranch>,
}

impl FamilyDistance {
    pub fn value_at(&self, k: u64) -> Ordinal {
        self.branches.iter().map(|b| b.value_at(k)).min().unwrap()
    }
}

fn push_candidate(branches: &mut Vec<AffineFamilyBranch>, cand: AffineFamilyBranch) {
    if branches.iter().any(|b| b.dominates(&cand)) {
        return;
    }
    branches.retain(|b| !cand.dominates(b));
    branches.push(cand);
}

pub(crate) fn family_branches_from_exhaust(
    g: &Graph,
    fam: &Family,
    ex: &Exhaust,
) -> Vec<AffineFamilyBranch> {
    let entries = family_entries(g, fam);
    let mut branches: Vec<AffineFamilyBranch> = Vec::new();
    for s in &ex.settled {
        for ent in &entries {
            match ent {
                Entry::Tip { node, rank } if *node == s.node => {
                    let mut f = Folded { cost: s.cost.clone(), state: s.state.clone() };
                    fold_item(&mut f, Item::Tip(*rank));
                    push_candidate(&mut branches, AffineFamilyBranch::Constant(f.cost));
                }
                Entry::Finite { node, rank, lead_branches } if *node == s.node => {
                    let at = |k: u64| {
                        let mut f = Folded { cost: s.cost.clone(), state: s.state.clone() };
                        chain_fold(&mut f, *rank, k, *lead_branches);
                        f.cost
                    };
                    let (v1, v2, v3) = (at(1), at(2), at(3));
                    if v1 == v2 {
                        debug_assert_eq!(v2, v3);
                        push_candidate(&mut branches, AffineFamilyBranch::Constant(v1));
                    } else {
                        let step = v2.nat_diff(&v1).expect("chain folds are monotone");
                        debug_assert_eq!(v3.nat_diff(&v2).as_ref(), Ok(&step));
                        let base = v1.nat_diff(&step).expect("affine base");
                        push_candidate(
                            &mut branches,
                            AffineFamilyBranch::increasing(base, step).expect("single-term step"),
                        );
                    }
                }
                _ => {}
            }
        }
    }
    branches
}

pub fn family_distance(g: &Graph, x: &str, family: &str) -> Result<FamilyDistance> {
    let xi = g.node_ix(x)?;
    let fams = g.families();
    let fi = g.family_ix(family)?;
    let fam = &fams[fi];
    if matches!(fam.kind, FamilyKind::SegmentInterior) {
        return Err(Error::UnknownFamily(format!(
            "{} is a finite segment interior; probe its members directly",
            family
        )));
    }
    let q = quotient(g);
    let ex = exhaust(g, &q, xi, None);
    let branches = family_branches_from_exhaust(g, fam, &ex);
    if branches.is_empty() {
        return Err(Error::Disconnected(format!("no entry into {} from {}", family, x)));
    }
    Ok(FamilyDistance { source: x.to_string(), family: family.to_string(), branches })
}

/// Largest distance from x to any member of a finite segment interior
/// (min over the two end entries, maximised over the member index).
pub(crate) fn segment_interior_sup(g: &Graph, fam: &Family, ex: &Exhaust) -> Option<Ordinal> {
    let (u, v, rank, count) = match &g.gadgets[fam.gadget].kind {
        GadgetKind::Segment { u, v, rank, count } => (*u, *v, *rank, *count),
        _ => return None,
    };
    if count < 2 {
        return None;
    }
    let value_from = |node: usize, k: u64| -> Option<Ordinal> {
        let mut best: Option<Ordinal> = None;
        for s in ex.settled.iter().filter(|s| s.node == node) {
            let mut f = Folded { cost: s.cost.clone(), state: s.state.clone() };
            chain_fold(&mut f, rank, k, 0);
            if best.as_ref().is_none_or(|b| f.cost < *b) {
                best = Some(f.cost);
            }
        }
        best
    };
    let mut sup: Option<Ordinal> = None;
    for i in 1..count {
        let a = value_from(u, i);
        let b = value_from(v, count - i);
        let val = match (a, b) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => continue,
        };
        if sup.as_ref().is_none_or(|s| val > *s) {
            sup = Some(val);
        }
    }
    sup
}

// ---------------------------------------------------------------------------
// enumeration oracle + geodesic witnesses

fn edge_step(q: &Quotient, ei: usize, from: usize) -> (usize, PathStep) {
    let e = &q.edges[ei];
    let (other, trav) = if e.u == from { (e.v, e.traversal.clone()) } else { (e.u, e.traversal.reversed()) };
    (other, PathStep { label: e.label.clone(), traversal: trav })
}

fn path_of(g: &Graph, nodes: &[usize], steps: Vec<PathStep>) -> PathDesc {
    PathDesc {
        nodes: nodes
            .iter()
            .map(|&i| PathNode { id: g.nodes[i].id.clone(), rank: g.nodes[i].rank })
            .collect(),
        steps,
    }
}

pub(crate) fn enumerate_paths(
    g: &Graph,
    q: &Quotient,
    x: usize,
    y: usize,
    mut visit: impl FnMut(&PathDesc),
) {
    // iterative DFS over simple quotient paths with occupancy tracking
    struct Frame {
        node: usize,
        next_edge: usize,
    }
    let mut nodes = vec![x];
    let mut steps: Vec<PathStep> = Vec::new();
    let mut occ: Vec<Vec<(usize, Occ)>> = vec![Vec::new()];
    let mut mask: u128 = 1u128 << x;
    let mut stack = vec![Frame { node: x, next_edge: 0 }];
    while let Some(frame) = stack.last_mut() {
        let node = frame.node;
        if frame.next_edge >= q.adj[node].len() {
            stack.pop();
            nodes.pop();
            steps.pop();
            occ.pop();
            if let Some(n) = nodes.last() {
                mask &= !(0u128) ^ (1u128 << node);
                let _ = n;
            }
            continue;
        }
        let ei = q.adj[node][frame.next_edge];
        frame.next_edge += 1;
        let e = &q.edges[ei];
        let (other, step) = edge_step(q, ei, node);
        if other == node || mask >> other & 1 == 1 {
            continue;
        }
        let flat_occ: Vec<(usize, Occ)> = occ.iter().flatten().copied().collect();
        if occ_conflict(&flat_occ, &e.occ) {
            continue;
        }
        nodes.push(other);
        steps.push(step);
        occ.push(e.occ.clone());
        mask |= 1u128 << other;
        if other == y {
            visit(&path_of(g, &nodes, steps.clone()));
            // leaf: backtrack immediately
            nodes.pop();
            steps.pop();
            occ.pop();
            mask &= !(1u128 << other);
            continue;
        }
        stack.push(Frame { node: other, next_edge: 0 });
    }
}

/// Independent oracle: exhaustively enumerates the simple quotient paths
/// from x to y and scores each with the run-semantics length rule.
pub fn oracle_min_length(g: &Graph, x: &str, y: &str, cap: usize) -> Result<Ordinal> {
    if g.nodes.len() > cap {
        return Err(Error::TooLarge(format!(
            "{} named nodes exceeds the oracle cap {}",
            g.nodes.len(),
            cap
        )));
    }
    let xi = g.node_ix(x)?;
    let yi = g.node_ix(y)?;
    if xi == yi {
        return Ok(Ordinal::zero());
    }
    let q = quotient(g);
    let mut best: Option<Ordinal> = None;
    enumerate_paths(g, &q, xi, yi, |p| {
        let len = path_length(p).expect("enumerated paths are well-formed");
        if best.as_ref().is_none_or(|b| len < *b) {
            best = Some(len);
        }
    });
    best.ok_or_else(|| Error::Disconnected(format!("no path from {} to {}", x, y)))
}

/// A geodesic witness: a minimum-length path, ties broken by the
/// lexicographically least node-id sequence.
pub fn geodesic(g: &Graph, x: &str, y: &str) -> Result<PathDesc> {
    let xi = g.node_ix(x)?;
    let yi = g.node_ix(y)?;
    if xi == yi {
        return Ok(PathDesc::trivial(x, g.nodes[xi].rank));
    }
    let d = distance(g, x, y)?;
    let q = quotient(g);
    let mut best: Option<(Vec<String>, PathDesc)> = None;
    // prefix lengths are monotone (a subpath is never longer than the whole),
    // so any prefix longer than d can be pruned; here graphs are small enough
    // to filter complete paths instead.
    enumerate_paths(g, &q, xi, yi, |p| {
        let len = path_length(p).expect("enumerated paths are well-formed");
        if len != d {
            return;
        }
        let ids: Vec<String> = p.nodes.iter().map(|n| n.id.clone()).collect();
        if best.as_ref().is_none_or(|(bids, _)| ids < *bids) {
            best = Some((ids, p.clone()));
        }
    });
    best.map(|(_, p)| p)
        .ok_or_else(|| Error::Disconnected(format!("no geodesic from {} to {}", x, y)))
}

/// All-pairs helper: the distance map from x to every named node, plus the
/// settled states used for family branch extraction.
pub fn distances_from(g: &Graph, x: &str) -> Result<(Vec<Option<Ordinal>>, Exhaust)> {
    let xi = g.node_ix(x)?;
    let q = quotient(g);
    let ex = exhaust(g, &q, xi, None);
    Ok((ex.dist.clone(), ex))
}
