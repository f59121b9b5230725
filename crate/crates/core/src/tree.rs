//! Cycle detection across sections and the star-graph tree reduction.
//!
//! A cycle is a top-rank loop visiting at least two sections; it shows up
//! as a cycle in the bipartite incidence structure between sections and
//! their shared (boundary) nodes. Cycle-free graphs collapse to a finite
//! rank-0 tree: boundary nodes keep their identity, each multi-bordered
//! section interior becomes one node (with one helper node grouping its
//! non-boundary bordering nodes), and the single-bordered sections hanging
//! off a node merge into one pendant node. End sections are the
//! single-bordered ones: a section between a boundary node and a lone
//! non-boundary node carries the interior-offset law on both sides and must
//! be treated as interior, so the boundary-count reading would misclassify
//! it.
//!
//! Eccentricities transfer exactly: e_G = w^nu * p on a boundary node or
//! multi-bordered interior iff its tree representative has e_T = p.

use std::collections::BTreeMap;

use crate::eccentricity::{ecc_report_fast, EccReport};
use crate::error::{Error, Result};
use crate::graph::{Decl, Graph};
use crate::ordinal::Exp;
use crate::sections::{sections, Section};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeKind {
    /// a boundary top-rank node, kept one-to-one
    Boundary,
    /// all non-boundary bordering nodes of one multi-bordered section
    GroupedBordering,
    /// the interior of one multi-bordered section
    Interior,
    /// the interiors of all single-bordered sections at one node
    EndInterior,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub id: String,
    pub kind: TreeKind,
    /// graph entities (node ids, family ids) this tree node stands for
    pub represents: Vec<String>,
}

/// The finite rank-0 tree a cycle-free graph reduces to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedTree {
    pub nodes: Vec<TreeNode>,
    pub edges: Vec<(usize, usize)>,
}

impl ReducedTree {
    fn adj(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Hop eccentricity of one tree node.
    pub fn ecc(&self, i: usize) -> u64 {
        let adj = self.adj();
        let mut dist = vec![u64::MAX; self.nodes.len()];
        let mut queue = std::collections::VecDeque::from([i]);
        dist[i] = 0;
        let mut far = 0;
        while let Some(v) = queue.pop_front() {
            far = far.max(dist[v]);
            for &w in &adj[v] {
                if dist[w] == u64::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        far
    }

    /// Serializes the tree as a rank-0 graph in the description language.
    pub fn to_graph(&self) -> Result<Graph> {
        let mut decls = vec![Decl::Graph { id: "reduced".into(), rank: 0 }];
        for n in &self.nodes {
            decls.push(Decl::Node { id: n.id.clone(), rank: 0 });
        }
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            decls.push(Decl::Branch {
                id: format!("t{}", i + 1),
                u: self.nodes[u].id.clone(),
                v: self.nodes[v].id.clone(),
            });
        }
        crate::graph::build_graph(&decls)
    }
}

fn pristine_or_err(g: &Graph) -> Result<()> {
    if g.rank == 0 {
        return Err(Error::PreconditionViolated("tree reduction needs rank >= 1".into()));
    }
    if !g.pristine_check().all {
        return Err(Error::PreconditionViolated("graph is not pristine".into()));
    }
    Ok(())
}

/// True iff no top-rank loop passes through two or more sections; otherwise
/// the witness names nodes on such a loop.
pub fn is_cycle_free(g: &Graph) -> Result<(bool, Vec<String>)> {
    pristine_or_err(g)?;
    let secs = sections(g, g.rank - 1)?;
    // bipartite incidence: section index <-> shared bordering (boundary) node
    let mut by_node: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (si, s) in secs.iter().enumerate() {
        for &b in &s.bordering {
            by_node.entry(b).or_default().push(si);
        }
    }
    let shared: Vec<usize> = by_node.iter().filter(|(_, v)| v.len() >= 2).map(|(&n, _)| n).collect();
    let nv = secs.len() + shared.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nv];
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for (bi, &b) in shared.iter().enumerate() {
        let bv = secs.len() + bi;
        for &si in &by_node[&b] {
            let (ra, rb) = (find(&mut parent, si), find(&mut parent, bv));
            if ra == rb {
                // closing edge: walk the existing connection for a witness
                let mut dist = vec![usize::MAX; nv];
                let mut prev = vec![usize::MAX; nv];
                let mut queue = std::collections::VecDeque::from([si]);
                dist[si] = 0;
                while let Some(v) = queue.pop_front() {
                    for &w in &adj[v] {
                        if dist[w] == usize::MAX {
                            dist[w] = dist[v] + 1;
                            prev[w] = v;
                            queue.push_back(w);
                        }
                    }
                }
                let mut witness = vec![g.nodes[b].id.clone()];
                let mut v = bv;
                while v != usize::MAX && v != si {
                    if v >= secs.len() {
                        witness.push(g.nodes[shared[v - secs.len()]].id.clone());
                    }
                    v = prev[v];
                }
                witness.dedup();
                return Ok((false, witness));
            }
            parent[ra.max(rb)] = ra.min(rb);
            adj[si].push(bv);
            adj[bv].push(si);
        }
    }
    Ok((true, Vec::new()))
}

fn interior_entities(g: &Graph, s: &Section) -> Vec<String> {
    let mut out: Vec<String> =
        s.internal.iter().map(|&n| g.nodes[n].id.clone()).collect();
    for f in g.families() {
        if s.gadgets.contains(&f.gadget) {
            out.push(f.id.clone());
        }
    }
    out
}

/// Builds the reduced tree of a cycle-free pristine graph.
pub fn reduce_to_tree(g: &Graph) -> Result<ReducedTree> {
    let (free, witness) = is_cycle_free(g)?;
    if !free {
        return Err(Error::HasCycle(format!("cycle through {}", witness.join(", "))));
    }
    let secs = sections(g, g.rank - 1)?;
    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut node_of: BTreeMap<usize, usize> = BTreeMap::new(); // graph node -> tree ix
    let anchor = |nodes: &mut Vec<TreeNode>, node_of: &mut BTreeMap<usize, usize>, b: usize| {
        *node_of.entry(b).or_insert_with(|| {
            nodes.push(TreeNode {
                id: g.nodes[b].id.clone(),
                kind: TreeKind::Boundary,
                represents: vec![g.nodes[b].id.clone()],
            });
            nodes.len() - 1
        })
    };
    // single-bordered sections grouped per anchor node
    let mut pendant: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let mut m = 0usize;
    for s in &secs {
        if s.bordering.len() == 1 {
            pendant.entry(s.bordering[0]).or_default().extend(interior_entities(g, s));
            continue;
        }
        m += 1;
        let yi = nodes.len();
        nodes.push(TreeNode {
            id: format!("y{}", m),
            kind: TreeKind::Interior,
            represents: interior_entities(g, s),
        });
        let mut grouped: Vec<String> = Vec::new();
        for &b in &s.bordering {
            if s.boundary.contains(&b) {
                let bi = anchor(&mut nodes, &mut node_of, b);
                edges.push((yi, bi));
            } else {
                grouped.push(g.nodes[b].id.clone());
            }
        }
        if !grouped.is_empty() {
            nodes.push(TreeNode {
                id: format!("y{}.x", m),
                kind: TreeKind::GroupedBordering,
                represents: grouped,
            });
            edges.push((yi, nodes.len() - 1));
        }
    }
    for (b, represents) in pendant {
        let bi = anchor(&mut nodes, &mut node_of, b);
        nodes.push(TreeNode {
            id: format!("{}.y", g.nodes[b].id),
            kind: TreeKind::EndInterior,
            represents,
        });
        edges.push((bi, nodes.len() - 1));
    }
    if nodes.is_empty() {
        // a single section with no bordering node at all
        nodes.push(TreeNode {
            id: "y1".into(),
            kind: TreeKind::Interior,
            represents: secs.first().map(|s| interior_entities(g, s)).unwrap_or_default(),
        });
    }
    Ok(ReducedTree { nodes, edges })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrespondenceCheck {
    pub pass: bool,
    /// (tree node, tree eccentricity, graph multiplier) triples compared
    pub compared: Vec<(String, u64, u64)>,
    pub failures: Vec<String>,
}

fn graph_coeff(g: &Graph, report: &EccReport, entity: &str) -> Option<u64> {
    let nu = g.rank;
    let rank = if let Some(n) = report.nodes.iter().find(|n| n.id == entity) {
        Some(n.ecc.clone())
    } else {
        report.families.iter().find(|(id, _)| id == entity).map(|(_, f)| f.sup())
    }?;
    match rank {
        crate::ordinal::Rank::Ord(o) => {
            let p = o.coeff(Exp::Nat(nu));
            (o == crate::ordinal::Ordinal::w_pow_mul(Exp::Nat(nu), p)).then_some(p)
        }
        crate::ordinal::Rank::Arrow(_) => None,
    }
}

/// Verifies e_G = w^nu * p <=> e_T = p on every boundary node and
/// multi-bordered section interior.
pub fn correspondence_check(g: &Graph, t: &ReducedTree) -> Result<CorrespondenceCheck> {
    let report = ecc_report_fast(g)?;
    correspondence_check_with(g, t, &report)
}

pub fn correspondence_check_with(
    g: &Graph,
    t: &ReducedTree,
    report: &EccReport,
) -> Result<CorrespondenceCheck> {
    let mut compared = Vec::new();
    let mut failures = Vec::new();
    for (i, n) in t.nodes.iter().enumerate() {
        if !matches!(n.kind, TreeKind::Boundary | TreeKind::Interior) {
            continue;
        }
        let et = t.ecc(i);
        for entity in &n.represents {
            match graph_coeff(g, report, entity) {
                Some(p) => {
                    compared.push((n.id.clone(), et, p));
                    if p != et {
                        failures.push(format!(
                            "{} represents {}: tree {} vs graph {}",
                            n.id, entity, et, p
                        ));
                    }
                }
                None => failures.push(format!("{}: no exact multiplier", entity)),
            }
        }
    }
    Ok(CorrespondenceCheck { pass: failures.is_empty(), compared, failures })
}

/// The shape of a cycle-free graph's center.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CenterForm {
    /// a single top-rank node
    A { node: String },
    /// the interior of a single section
    B { interior: Vec<String> },
    /// a section interior together with one of its bordering nodes
    C { interior: Vec<String>, node: String },
}

impl CenterForm {
    pub fn tag(&self) -> char {
        match self {
            CenterForm::A { .. } => 'a',
            CenterForm::B { .. } => 'b',
            CenterForm::C { .. } => 'c',
        }
    }

    /// All graph entities in the center.
    pub fn members(&self) -> Vec<String> {
        match self {
            CenterForm::A { node } => vec![node.clone()],
            CenterForm::B { interior } => interior.clone(),
            CenterForm::C { interior, node } => {
                let mut v = interior.clone();
                v.push(node.clone());
                v
            }
        }
    }
}

/// Classifies the center via the tree's classical two-node center theorem.
pub fn classify_center(g: &Graph) -> Result<CenterForm> {
    let secs = sections(g, g.rank.checked_sub(1).ok_or_else(|| {
        Error::PreconditionViolated("tree reduction needs rank >= 1".into())
    })?)?;
    let nu_nodes: Vec<&str> =
        g.nodes.iter().filter(|n| n.rank == g.rank).map(|n| n.id.as_str()).collect();
    if secs.len() == 1 && nu_nodes.len() <= 1 {
        // trivial case: every member shares one eccentricity
        let interior = interior_entities(g, &secs[0]);
        return match nu_nodes.first() {
            Some(x) => Ok(CenterForm::C { interior, node: x.to_string() }),
            None => Ok(CenterForm::B { interior }),
        };
    }
    let t = reduce_to_tree(g)?;
    let candidates: Vec<usize> = (0..t.nodes.len())
        .filter(|&i| matches!(t.nodes[i].kind, TreeKind::Boundary | TreeKind::Interior))
        .collect();
    let eccs: Vec<u64> = candidates.iter().map(|&i| t.ecc(i)).collect();
    let min = *eccs.iter().min().expect("tree is nonempty");
    let argmin: Vec<usize> = candidates
        .iter()
        .zip(&eccs)
        .filter(|(_, e)| **e == min)
        .map(|(&i, _)| i)
        .collect();
    match argmin.as_slice() {
        [i] => match t.nodes[*i].kind {
            TreeKind::Boundary => Ok(CenterForm::A { node: t.nodes[*i].id.clone() }),
            _ => Ok(CenterForm::B { interior: t.nodes[*i].represents.clone() }),
        },
        [i, j] => {
            let (int, bnd) = if matches!(t.nodes[*i].kind, TreeKind::Interior) {
                (*i, *j)
            } else {
                (*j, *i)
            };
            if !matches!(t.nodes[int].kind, TreeKind::Interior)
                || !matches!(t.nodes[bnd].kind, TreeKind::Boundary)
                || !(t.edges.contains(&(int, bnd)) || t.edges.contains(&(bnd, int)))
            {
                return Err(Error::PreconditionViolated(format!(
                    "unexpected center pair {} {}",
                    t.nodes[*i].id, t.nodes[*j].id
                )));
            }
            Ok(CenterForm::C {
                interior: t.nodes[int].represents.clone(),
                node: t.nodes[bnd].id.clone(),
            })
        }
        _ => Err(Error::PreconditionViolated("center spans more than two tree nodes".into())),
    }
}

/// Appends the two three-spoke endless-path stars p1-p2-p3 and q1-q2-q3,
/// with p3 and q3 wired to every top-rank node of the input.
pub fn build_h(g: &Graph) -> Result<Graph> {
    if g.rank == 0 {
        return Err(Error::PreconditionViolated("the star construction needs rank >= 1".into()));
    }
    let nu = g.rank;
    let mut extra = Vec::new();
    for id in ["p1", "p2", "p3", "q1", "q2", "q3"] {
        extra.push(Decl::Node { id: id.into(), rank: nu });
    }
    for side in ["p", "q"] {
        extra.push(Decl::Endless {
            id: format!("h{}12", side),
            rank: nu - 1,
            a: Some(format!("{}1", side)),
            b: Some(format!("{}2", side)),
        });
        extra.push(Decl::Endless {
            id: format!("h{}23", side),
            rank: nu - 1,
            a: Some(format!("{}2", side)),
            b: Some(format!("{}3", side)),
        });
        for n in &g.nodes {
            if n.rank == nu {
                extra.push(Decl::Endless {
                    id: format!("h{}.{}", side, n.id),
                    rank: nu - 1,
                    a: Some(format!("{}3", side)),
                    b: Some(n.id.clone()),
                });
            }
        }
    }
    crate::graph::with_decls(g, &extra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse;

    fn fig5() -> Graph {
        parse(
            "graph fig5 rank 1\n\
             node w0 rank 0\nnode x1 rank 1\nnode z1 rank 1\n\
             ray pw rank 0 from w0 tip x1\n\
             endless py rank 0 tips x1 z1\n",
        )
        .unwrap()
    }

    fn fig6() -> Graph {
        parse(
            "graph fig6 rank 1\n\
             node v rank 1\nnode w rank 1\nnode x rank 1\nnode y rank 1\nnode z rank 1\n\
             endless P1 rank 0 tips v w\n\
             endless P2 rank 0 tips w x\n\
             endless P3 rank 0 tips x y\n\
             endless P4 rank 0 tips y z\n\
             endless P5 rank 0 tips z w\n",
        )
        .unwrap()
    }

    #[test]
    fn fig5_is_cycle_free_fig6_is_not() {
        let (free, _) = is_cycle_free(&fig5()).unwrap();
        assert!(free);
        let (free, witness) = is_cycle_free(&fig6()).unwrap();
        assert!(!free);
        assert!(witness.len() >= 2, "{:?}", witness);
    }

    #[test]
    fn fig5_reduces_to_three_branch_path() {
        let t = reduce_to_tree(&fig5()).unwrap();
        assert_eq!(t.edges.len(), 3);
        // path: x1.y (w-side) -- x1 -- y1 (y-interior) -- y1.x (z1)
        let ids: Vec<&str> = t.nodes.iter().map(|n| n.id.as_str()).collect();
        assert!(ids.contains(&"x1") && ids.contains(&"y1") && ids.contains(&"y1.x"));
        let x1 = t.nodes.iter().position(|n| n.id == "x1").unwrap();
        let y1 = t.nodes.iter().position(|n| n.id == "y1").unwrap();
        assert_eq!(t.ecc(x1), 2);
        assert_eq!(t.ecc(y1), 2);
        let chk = correspondence_check(&fig5(), &t).unwrap();
        assert!(chk.pass, "{:?}", chk.failures);
    }

    #[test]
    fn fig5_center_is_form_c() {
        let form = classify_center(&fig5()).unwrap();
        assert_eq!(form.tag(), 'c');
        let mut members = form.members();
        members.sort();
        assert_eq!(members, ["py[*]", "x1"]);
    }

    #[test]
    fn fig6_reduction_rejected() {
        assert!(matches!(reduce_to_tree(&fig6()), Err(Error::HasCycle(_))));
    }

    #[test]
    fn chain_center_is_middle_boundary_node() {
        // three sections in a row: b1 -- S1 -- b2 -- S2 -- b3, with end
        // sections on b1 and b3 balancing the load
        let g = parse(
            "graph chain rank 1\n\
             node a1 rank 0\nnode a3 rank 0\n\
             node b1 rank 1\nnode b2 rank 1\nnode b3 rank 1\n\
             ray e1 rank 0 from a1 tip b1\n\
             ray e3 rank 0 from a3 tip b3\n\
             endless s1 rank 0 tips b1 b2\n\
             endless s2 rank 0 tips b2 b3\n",
        )
        .unwrap();
        let form = classify_center(&g).unwrap();
        assert_eq!(form.tag(), 'a');
        assert_eq!(form.members(), ["b2"]);
    }

    #[test]
    fn build_h_adds_two_stars() {
        let h = build_h(&fig6()).unwrap();
        assert!(h.node_ix("p1").is_ok() && h.node_ix("q3").is_ok());
        // 6 new nodes, 2 * (2 + 5) new endless gadgets
        assert_eq!(h.nodes.len(), 11);
        assert_eq!(h.gadgets.len(), 5 + 14);
        assert!(h.pristine_check().all);
    }
}
