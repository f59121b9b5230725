//! Top-rank blocks and cut nodes.
//!
//! Removing a top-rank node scatters its incidences onto fresh singleton
//! nodes, so connectivity through it is what blocks measure. Gadgets glued
//! through lower-rank nodes can never be separated this way and are
//! collapsed into groups first; blocks are then the biconnected components
//! of the bipartite multigraph between groups and top-rank nodes (one edge
//! per attachment, so a gadget looping back to the same node stays
//! 2-connected). The literal all-removals intersection construction is kept
//! as a test oracle.

use std::collections::BTreeMap;

use crate::eccentricity::ecc_report_fast;
use crate::error::{Error, Result};
use crate::graph::{incidence, End, GadgetKind, Graph, Node};

/// Replaces every incidence of `x` with a fresh singleton node named
/// `<x>.cut<i>`. The result is typically disconnected.
pub fn remove_node(g: &Graph, x: &str) -> Result<Graph> {
    let xi = g.node_ix(x)?;
    let mut nodes = g.nodes.clone();
    let mut gadgets = g.gadgets.clone();
    let rank = g.nodes[xi].rank;
    let mut counter = 0usize;
    let mut fresh = |nodes: &mut Vec<Node>| {
        counter += 1;
        let id = format!("{}.cut{}", x, counter);
        nodes.push(Node { id, rank });
        nodes.len() - 1
    };
    for gd in &mut gadgets {
        match &mut gd.kind {
            GadgetKind::Branch { u, v } | GadgetKind::Segment { u, v, .. } => {
                if *u == xi {
                    *u = fresh(&mut nodes);
                }
                if *v == xi {
                    *v = fresh(&mut nodes);
                }
            }
            GadgetKind::Ray { from, tip, .. } => {
                if *from == xi {
                    *from = fresh(&mut nodes);
                }
                if *tip == End::Node(xi) {
                    *tip = End::Node(fresh(&mut nodes));
                }
            }
            GadgetKind::Endless { tip_a, tip_b, .. } => {
                for t in [tip_a, tip_b] {
                    if *t == End::Node(xi) {
                        *t = End::Node(fresh(&mut nodes));
                    }
                }
            }
            GadgetKind::Ladder { base_a, base_b, tip_a, tip_b, probes_a, probes_b } => {
                for n in [base_a, base_b, tip_a, tip_b] {
                    if *n == xi {
                        *n = fresh(&mut nodes);
                    }
                }
                for (_, n) in probes_a.iter_mut().chain(probes_b.iter_mut()) {
                    if *n == xi {
                        *n = fresh(&mut nodes);
                    }
                }
            }
        }
    }
    if counter == 0 {
        return Err(Error::UnknownNode(format!("{} has no incidences to remove", x)));
    }
    // every incidence now points at a fresh singleton; drop the node itself
    let remap: Vec<usize> =
        (0..nodes.len()).map(|i| if i < xi { i } else { i.saturating_sub(1) }).collect();
    nodes.remove(xi);
    for gd in &mut gadgets {
        crate::graph::map_nodes(&mut gd.kind, &remap);
    }
    Ok(Graph { name: g.name.clone(), rank: g.rank, nodes, gadgets, warnings: Vec::new() })
}

/// Connected components as gadget-index sets, ordered by smallest member.
pub fn components(g: &Graph) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..g.nodes.len()).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for gi in 0..g.gadgets.len() {
        let atts = g.attachments(gi);
        for w in atts.windows(2) {
            let (a, b) = (find(&mut parent, w[0].0), find(&mut parent, w[1].0));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for gi in 0..g.gadgets.len() {
        let atts = g.attachments(gi);
        let root = find(&mut parent, atts[0].0);
        by_root.entry(root).or_default().push(gi);
    }
    by_root.into_values().collect()
}

/// One block: a maximal gadget set not separated by any single top-rank
/// node removal, with the named nodes it touches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub gadgets: Vec<usize>,
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSet {
    pub blocks: Vec<Block>,
    /// top-rank nodes whose removal disconnects the graph
    pub cut_nodes: Vec<usize>,
    /// node id -> indices of blocks containing it
    pub membership: BTreeMap<String, Vec<usize>>,
}

/// Gadget groups glued through nodes below the top rank.
fn gadget_groups(g: &Graph) -> (Vec<usize>, usize) {
    let nu = g.rank;
    let mut parent: Vec<usize> = (0..g.gadgets.len()).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for (n, atts) in incidence(g).into_iter().enumerate() {
        if g.nodes[n].rank == nu && nu > 0 {
            continue;
        }
        for w in atts.windows(2) {
            let (a, b) = (find(&mut parent, w[0].0), find(&mut parent, w[1].0));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut roots = Vec::new();
    let mut label = vec![usize::MAX; g.gadgets.len()];
    for (gi, lab) in label.iter_mut().enumerate() {
        let r = find(&mut parent, gi);
        *lab = roots.iter().position(|&x| x == r).unwrap_or_else(|| {
            roots.push(r);
            roots.len() - 1
        });
    }
    (label, roots.len())
}

/// Blocks via biconnected components of the group / top-node multigraph.
pub fn blocks(g: &Graph) -> Result<BlockSet> {
    let nu = g.rank;
    let (label, ngroups) = gadget_groups(g);
    let top: Vec<usize> =
        (0..g.nodes.len()).filter(|&n| g.nodes[n].rank == nu && nu > 0).collect();
    let top_ix: BTreeMap<usize, usize> = top.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let nv = ngroups + top.len();
    // one edge per (group, top node) attachment
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (gi, &l) in label.iter().enumerate() {
        for (n, _) in g.attachments(gi) {
            if let Some(&t) = top_ix.get(&n) {
                edges.push((l, ngroups + t));
            }
        }
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for (ei, &(u, v)) in edges.iter().enumerate() {
        adj[u].push((ei, v));
        adj[v].push((ei, u));
    }

    // Tarjan biconnected components over the multigraph
    let mut comp_of_edge = vec![usize::MAX; edges.len()];
    let mut ncomp = 0usize;
    let mut articulation = vec![false; nv];
    let mut num = vec![usize::MAX; nv];
    let mut low = vec![0usize; nv];
    let mut timer = 0usize;
    let mut stack: Vec<usize> = Vec::new(); // edge stack
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        v: usize,
        parent_edge: Option<usize>,
        adj: &[Vec<(usize, usize)>],
        num: &mut [usize],
        low: &mut [usize],
        timer: &mut usize,
        stack: &mut Vec<usize>,
        comp_of_edge: &mut [usize],
        ncomp: &mut usize,
        articulation: &mut [bool],
        is_root: bool,
    ) {
        num[v] = *timer;
        low[v] = *timer;
        *timer += 1;
        let mut children = 0usize;
        for &(ei, w) in &adj[v] {
            if Some(ei) == parent_edge {
                continue;
            }
            if num[w] == usize::MAX {
                stack.push(ei);
                children += 1;
                dfs(w, Some(ei), adj, num, low, timer, stack, comp_of_edge, ncomp, articulation, false);
                low[v] = low[v].min(low[w]);
                if low[w] >= num[v] {
                    if !is_root {
                        articulation[v] = true;
                    }
                    // pop one biconnected component
                    while let Some(&e) = stack.last() {
                        stack.pop();
                        comp_of_edge[e] = *ncomp;
                        if e == ei {
                            break;
                        }
                    }
                    *ncomp += 1;
                }
            } else if num[w] < num[v] {
                stack.push(ei);
                low[v] = low[v].min(num[w]);
            }
        }
        if is_root && children >= 2 {
            articulation[v] = true;
        }
    }
    for v in 0..nv {
        if num[v] == usize::MAX && !adj[v].is_empty() {
            dfs(
                v, None, &adj, &mut num, &mut low, &mut timer, &mut stack, &mut comp_of_edge,
                &mut ncomp, &mut articulation, true,
            );
        }
    }

    // assemble blocks; groups without any top-node edge form their own block
    let mut block_gadgets: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    let mut block_nodes: Vec<std::collections::BTreeSet<usize>> =
        vec![std::collections::BTreeSet::new(); ncomp];
    let mut group_comp: Vec<Option<usize>> = vec![None; ngroups];
    for (ei, &(u, v)) in edges.iter().enumerate() {
        let c = comp_of_edge[ei];
        let (grp, t) = if u < ngroups { (u, v) } else { (v, u) };
        group_comp[grp] = Some(c);
        block_nodes[c].insert(top[t - ngroups]);
    }
    for gi in 0..g.gadgets.len() {
        if let Some(c) = group_comp[label[gi]] {
            block_gadgets[c].push(gi);
            for (n, _) in g.attachments(gi) {
                block_nodes[c].insert(n);
            }
        }
    }
    let mut blocks: Vec<Block> = block_gadgets
        .into_iter()
        .zip(block_nodes)
        .filter(|(gs, _)| !gs.is_empty())
        .map(|(gs, ns)| Block { gadgets: gs, nodes: ns.into_iter().collect() })
        .collect();
    // groups never touching a top node (rank-0 graphs, isolated clusters)
    for (grp, comp) in group_comp.iter().enumerate() {
        if comp.is_none() {
            let gs: Vec<usize> = (0..g.gadgets.len()).filter(|&gi| label[gi] == grp).collect();
            let mut ns = std::collections::BTreeSet::new();
            for &gi in &gs {
                for (n, _) in g.attachments(gi) {
                    ns.insert(n);
                }
            }
            blocks.push(Block { gadgets: gs, nodes: ns.into_iter().collect() });
        }
    }
    blocks.sort_by_key(|b| b.gadgets[0]);

    let cut_nodes: Vec<usize> = top
        .iter()
        .enumerate()
        .filter(|(i, _)| articulation[ngroups + i])
        .map(|(_, &n)| n)
        .collect();
    let mut membership: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (bi, b) in blocks.iter().enumerate() {
        for &n in &b.nodes {
            membership.entry(g.nodes[n].id.clone()).or_default().push(bi);
        }
    }
    Ok(BlockSet { blocks, cut_nodes, membership })
}

/// Top-rank nodes whose removal disconnects the graph.
pub fn cut_nodes(g: &Graph) -> Result<Vec<String>> {
    Ok(blocks(g)?.cut_nodes.iter().map(|&n| g.nodes[n].id.clone()).collect())
}

/// Literal definition: gadgets grouped by their component choice under
/// every single top-node removal. Test oracle for `blocks`.
pub fn blocks_by_intersection(g: &Graph) -> Result<Vec<Vec<usize>>> {
    let nu = g.rank;
    let mut signature: Vec<Vec<usize>> = vec![Vec::new(); g.gadgets.len()];
    for n in &g.nodes {
        if n.rank != nu || nu == 0 {
            continue;
        }
        let removed = remove_node(g, &n.id)?;
        let comps = components(&removed);
        let mut comp_of = vec![usize::MAX; g.gadgets.len()];
        for (ci, comp) in comps.iter().enumerate() {
            for &gi in comp {
                comp_of[gi] = ci; // gadget order is preserved by remove_node
            }
        }
        for gi in 0..g.gadgets.len() {
            signature[gi].push(comp_of[gi]);
        }
    }
    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (gi, sig) in signature.into_iter().enumerate() {
        groups.entry(sig).or_default().push(gi);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|b| b[0]);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CenterBlockCheck {
    pub pass: bool,
    /// index of a block containing the whole center, when one exists
    pub block: Option<usize>,
    pub center: Vec<String>,
}

/// Checks that the whole center lies inside one block.
pub fn center_block_check(g: &Graph) -> Result<CenterBlockCheck> {
    if !g.pristine_check().all {
        return Err(Error::PreconditionViolated("graph is not pristine".into()));
    }
    let report = ecc_report_fast(g)?;
    center_block_check_with(g, &report.center)
}

pub fn center_block_check_with(g: &Graph, center: &[String]) -> Result<CenterBlockCheck> {
    let bs = blocks(g)?;
    let fams = g.families();
    let block_sets: Vec<Option<Vec<usize>>> = center
        .iter()
        .map(|id| {
            if let Some(blist) = bs.membership.get(id) {
                return Some(blist.clone());
            }
            // family or explicit family member: locate its gadget's block
            let base = id.split(['[', '(']).next().unwrap_or(id);
            let fam = fams.iter().find(|f| f.id.starts_with(base))?;
            let bi = bs.blocks.iter().position(|b| b.gadgets.contains(&fam.gadget))?;
            Some(vec![bi])
        })
        .collect();
    let mut pass_block = None;
    'outer: for bi in 0..bs.blocks.len() {
        for s in &block_sets {
            match s {
                Some(list) if list.contains(&bi) => {}
                _ => continue 'outer,
            }
        }
        pass_block = Some(bi);
        break;
    }
    Ok(CenterBlockCheck { pass: pass_block.is_some(), block: pass_block, center: center.to_vec() })
}
