//! Finite descriptions of transfinite graphs: named nodes plus gadgets
//! (branches, one-ended and endless infinite paths, the one-way ladder),
//! validation, the DSL, probe expansion, and the quotient multigraph the
//! distance engine runs on.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::length::{Item, Traversal};

pub const INF_INDEX: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub rank: u32,
}

/// A gadget extremity: attached to a named node, or left open (no node,
/// excluded from the metrizable set).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Node(usize),
    Open,
}

impl End {
    pub fn node(&self) -> Option<usize> {
        match self {
            End::Node(i) => Some(*i),
            End::Open => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GadgetKind {
    /// A single branch between two distinct nodes.
    Branch { u: usize, v: usize },
    /// A finite chain of `count` links between two named nodes, produced by
    /// probe expansion. Rank 0: `count` branches. Rank p >= 1: `count`
    /// endless (p-1)-paths joined at unnamed p-nodes.
    Segment { u: usize, v: usize, rank: u32, count: u64 },
    /// One-ended p-path from a finite end towards a p-tip.
    Ray { rank: u32, from: usize, tip: End },
    /// Endless p-path with two p-tips.
    Endless { rank: u32, tip_a: End, tip_b: End },
    /// One-way infinite ladder: two rails of 0-nodes with a rung at every
    /// index; the rails' 0-tips sit in tip_a/tip_b, the alternating tips are
    /// left open. `probes_*` are named rail nodes added by probe expansion.
    Ladder {
        base_a: usize,
        base_b: usize,
        tip_a: usize,
        tip_b: usize,
        probes_a: Vec<(u64, usize)>,
        probes_b: Vec<(u64, usize)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gadget {
    pub id: String,
    pub kind: GadgetKind,
}

impl Gadget {
    /// The gadget's own rank: the rank of the tips/chain it is made of.
    pub fn rank(&self) -> u32 {
        match &self.kind {
            GadgetKind::Branch { .. } => 0,
            GadgetKind::Segment { rank, .. } => *rank,
            GadgetKind::Ray { rank, .. } => *rank,
            GadgetKind::Endless { rank, .. } => *rank,
            GadgetKind::Ladder { .. } => 0,
        }
    }
}

/// How a gadget touches a node; used for section, pristine and block logic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attach {
    /// Branch endpoint: the node embraces an elementary tip.
    BranchEnd,
    /// Segment endpoint: chain continuation at the segment's rank.
    SegmentEnd { rank: u32 },
    /// Finite end of a ray: terminal when ranks match, embracing otherwise.
    RayFrom { rank: u32 },
    /// Attachment through a traversed tip of the given rank.
    TipOf { rank: u32 },
}

impl Attach {
    /// The rank at which a path through this attachment meets the node:
    /// the junction is usable inside a p-section iff this is <= p.
    pub fn entry_rank(&self) -> u32 {
        match self {
            Attach::BranchEnd => 0,
            Attach::SegmentEnd { rank } => *rank,
            Attach::RayFrom { rank } => *rank,
            Attach::TipOf { rank } => rank + 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RailSide {
    A,
    B,
}

/// An infinite (or, for segments, finite) family of unnamed interior nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyKind {
    /// Chain nodes of a ray, indexed 1,2,3,... from the finite end.
    Ray,
    /// Interior chain nodes of an endless path (no distinguished origin;
    /// all distances to them are index-independent).
    EndlessInterior,
    /// Unprobed rail nodes of a ladder rail.
    LadderRail(RailSide),
    /// Interior chain nodes of a finite segment, indexed 1..count-1 from u.
    SegmentInterior,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    pub id: String,
    pub gadget: usize,
    pub kind: FamilyKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub name: String,
    /// Declared rank (the graph's nu).
    pub rank: u32,
    pub nodes: Vec<Node>,
    pub gadgets: Vec<Gadget>,
    pub warnings: Vec<String>,
}

impl Graph {
    pub fn node_ix(&self, id: &str) -> Result<usize> {
        self.nodes
            .iter()
            .position(|n| n.id == id)
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    pub fn gadget_ix(&self, id: &str) -> Result<usize> {
        self.gadgets
            .iter()
            .position(|g| g.id == id)
            .ok_or_else(|| Error::UnknownGadget(id.to_string()))
    }

    /// All (node, attachment) incidences of a gadget.
    pub fn attachments(&self, g: usize) -> Vec<(usize, Attach)> {
        let mut out = Vec::new();
        match &self.gadgets[g].kind {
            GadgetKind::Branch { u, v } => {
                out.push((*u, Attach::BranchEnd));
                out.push((*v, Attach::BranchEnd));
            }
            GadgetKind::Segment { u, v, rank, .. } => {
                out.push((*u, Attach::SegmentEnd { rank: *rank }));
                out.push((*v, Attach::SegmentEnd { rank: *rank }));
            }
            GadgetKind::Ray { rank, from, tip } => {
                out.push((*from, Attach::RayFrom { rank: *rank }));
                if let End::Node(t) = tip {
                    out.push((*t, Attach::TipOf { rank: *rank }));
                }
            }
            GadgetKind::Endless { rank, tip_a, tip_b } => {
                for t in [tip_a, tip_b] {
                    if let End::Node(n) = t {
                        out.push((*n, Attach::TipOf { rank: *rank }));
                    }
                }
            }
            GadgetKind::Ladder { base_a, base_b, tip_a, tip_b, probes_a, probes_b } => {
                out.push((*base_a, Attach::SegmentEnd { rank: 0 }));
                out.push((*base_b, Attach::SegmentEnd { rank: 0 }));
                out.push((*tip_a, Attach::TipOf { rank: 0 }));
                out.push((*tip_b, Attach::TipOf { rank: 0 }));
                for (_, n) in probes_a.iter().chain(probes_b.iter()) {
                    out.push((*n, Attach::SegmentEnd { rank: 0 }));
                }
            }
        }
        out
    }

    /// The interior families of all gadgets, in gadget order.
    pub fn families(&self) -> Vec<Family> {
        let mut out = Vec::new();
        for (gi, g) in self.gadgets.iter().enumerate() {
            match &g.kind {
                GadgetKind::Branch { .. } => {}
                GadgetKind::Segment { count, .. } => {
                    if *count >= 2 {
                        out.push(Family {
                            id: format!("{}[*]", g.id),
                            gadget: gi,
                            kind: FamilyKind::SegmentInterior,
                        });
                    }
                }
                GadgetKind::Ray { .. } => {
                    out.push(Family { id: format!("{}[*]", g.id), gadget: gi, kind: FamilyKind::Ray });
                }
                GadgetKind::Endless { .. } => {
                    out.push(Family {
                        id: format!("{}[*]", g.id),
                        gadget: gi,
                        kind: FamilyKind::EndlessInterior,
                    });
                }
                GadgetKind::Ladder { .. } => {
                    out.push(Family {
                        id: format!("{}.a[*]", g.id),
                        gadget: gi,
                        kind: FamilyKind::LadderRail(RailSide::A),
                    });
                    out.push(Family {
                        id: format!("{}.b[*]", g.id),
                        gadget: gi,
                        kind: FamilyKind::LadderRail(RailSide::B),
                    });
                }
            }
        }
        out
    }

    pub fn family_ix(&self, id: &str) -> Result<usize> {
        self.families()
            .iter()
            .position(|f| f.id == id)
            .ok_or_else(|| Error::UnknownFamily(id.to_string()))
    }

    /// Per-node pristine verdicts plus the overall flag. A nu-node is
    /// pristine iff its every incidence is a traversed tip of rank nu-1.
    pub fn pristine_check(&self) -> PristineReport {
        let nu = self.rank;
        let mut incidences: Vec<Vec<(usize, Attach)>> = vec![Vec::new(); self.nodes.len()];
        for gi in 0..self.gadgets.len() {
            for (n, a) in self.attachments(gi) {
                incidences[n].push((gi, a));
            }
        }
        let mut entries = Vec::new();
        let mut all = true;
        for (ni, node) in self.nodes.iter().enumerate() {
            if node.rank != nu {
                continue;
            }
            let mut reason = None;
            for (gi, a) in &incidences[ni] {
                let bad = match a {
                    Attach::TipOf { rank } => {
                        if rank + 1 == nu {
                            None
                        } else {
                            Some(format!("embraces a {}-tip of {}", rank, self.gadgets[*gi].id))
                        }
                    }
                    Attach::BranchEnd => {
                        Some(format!("embraces an elementary tip of {}", self.gadgets[*gi].id))
                    }
                    Attach::SegmentEnd { rank } => {
                        Some(format!("embraces a {}-node of {}", rank, self.gadgets[*gi].id))
                    }
                    Attach::RayFrom { rank } => {
                        Some(format!("embraces a {}-node of {}", rank, self.gadgets[*gi].id))
                    }
                };
                if let Some(r) = bad {
                    reason = Some(r);
                    break;
                }
            }
            if reason.is_some() {
                all = false;
            }
            entries.push(PristineEntry {
                node: node.id.clone(),
                pristine: reason.is_none(),
                reason,
            });
        }
        PristineReport { nodes: entries, all }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PristineEntry {
    pub node: String,
    pub pristine: bool,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PristineReport {
    pub nodes: Vec<PristineEntry>,
    pub all: bool,
}

// ---------------------------------------------------------------------------
// declarations + validation

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Graph { id: String, rank: u32 },
    Node { id: String, rank: u32 },
    Branch { id: String, u: String, v: String },
    Segment { id: String, rank: u32, count: u64, u: String, v: String },
    Ray { id: String, rank: u32, from: String, tip: Option<String> },
    Endless { id: String, rank: u32, a: Option<String>, b: Option<String> },
    Ladder { id: String, u: String, v: String, a: String, b: String },
}

/// Validates declarations into a canonical Graph (nodes and gadgets sorted
/// by id, so equal declaration sets produce identical graphs).
pub fn build_graph(decls: &[Decl]) -> Result<Graph> {
    build_graph_inner(decls, true)
}

pub(crate) fn build_graph_inner(decls: &[Decl], check_connected: bool) -> Result<Graph> {
    let mut name = String::new();
    let mut rank = None;
    let mut nodes: Vec<Node> = Vec::new();
    let mut warnings = Vec::new();

    for d in decls {
        match d {
            Decl::Graph { id, rank: r } => {
                if rank.is_some() {
                    return Err(Error::DuplicateId(format!("second graph header {}", id)));
                }
                name = id.clone();
                rank = Some(*r);
            }
            Decl::Node { id, rank } => nodes.push(Node { id: id.clone(), rank: *rank }),
            _ => {}
        }
    }
    let nu = rank.ok_or_else(|| Error::Parse("missing graph header".into()))?;
    nodes.sort_by(|a, b| a.id.cmp(&b.id));

    let mut ids: HashSet<String> = HashSet::new();
    for n in &nodes {
        if !ids.insert(n.id.clone()) {
            return Err(Error::DuplicateId(n.id.clone()));
        }
        if n.rank > nu {
            return Err(Error::BadRank(format!(
                "node {} has rank {} above graph rank {}",
                n.id, n.rank, nu
            )));
        }
    }
    if nodes.is_empty() {
        return Err(Error::Disconnected("graph has no nodes".into()));
    }

    let ix = |nodes: &[Node], id: &str| -> Result<usize> {
        nodes
            .iter()
            .position(|n| n.id == id)
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    };

    let mut gadgets: Vec<Gadget> = Vec::new();
    for d in decls {
        let (id, kind) = match d {
            Decl::Graph { .. } | Decl::Node { .. } => continue,
            Decl::Branch { id, u, v } => {
                let (u, v) = (ix(&nodes, u)?, ix(&nodes, v)?);
                if u == v {
                    return Err(Error::SelfLoopBranch(id.clone()));
                }
                (id, GadgetKind::Branch { u, v })
            }
            Decl::Segment { id, rank, count, u, v } => {
                if *count == 0 {
                    return Err(Error::BadIndex(format!("segment {} has count 0", id)));
                }
                let (u, v) = (ix(&nodes, u)?, ix(&nodes, v)?);
                for n in [u, v] {
                    if nodes[n].rank < *rank {
                        return Err(Error::RankViolation(format!(
                            "segment {} endpoint {} has rank below {}",
                            id, nodes[n].id, rank
                        )));
                    }
                }
                (id, GadgetKind::Segment { u, v, rank: *rank, count: *count })
            }
            Decl::Ray { id, rank, from, tip } => {
                let from_ix = ix(&nodes, from)?;
                if nodes[from_ix].rank < *rank {
                    return Err(Error::RankViolation(format!(
                        "ray {} finite end {} has rank below {}",
                        id, from, rank
                    )));
                }
                let tip_end = match tip {
                    None => End::Open,
                    Some(t) => {
                        let t_ix = ix(&nodes, t)?;
                        if nodes[t_ix].rank < rank + 1 {
                            return Err(Error::RankViolation(format!(
                                "ray {} tip endpoint {} has rank below {}",
                                id,
                                t,
                                rank + 1
                            )));
                        }
                        End::Node(t_ix)
                    }
                };
                (id, GadgetKind::Ray { rank: *rank, from: from_ix, tip: tip_end })
            }
            Decl::Endless { id, rank, a, b } => {
                let resolve = |t: &Option<String>| -> Result<End> {
                    match t {
                        None => Ok(End::Open),
                        Some(t) => {
                            let t_ix = ix(&nodes, t)?;
                            if nodes[t_ix].rank < rank + 1 {
                                return Err(Error::RankViolation(format!(
                                    "endless {} tip endpoint {} has rank below {}",
                                    id,
                                    t,
                                    rank + 1
                                )));
                            }
                            Ok(End::Node(t_ix))
                        }
                    }
                };
                let (tip_a, tip_b) = (resolve(a)?, resolve(b)?);
                if tip_a == End::Open && tip_b == End::Open {
                    return Err(Error::Disconnected(format!("endless {} touches no node", id)));
                }
                (id, GadgetKind::Endless { rank: *rank, tip_a, tip_b })
            }
            Decl::Ladder { id, u, v, a, b } => {
                let (u, v, a, b) = (ix(&nodes, u)?, ix(&nodes, v)?, ix(&nodes, a)?, ix(&nodes, b)?);
                let mut distinct = vec![u, v, a, b];
                distinct.sort_unstable();
                distinct.dedup();
                if distinct.len() != 4 {
                    return Err(Error::RankViolation(format!(
                        "ladder {} endpoints must be four distinct nodes",
                        id
                    )));
                }
                for base in [u, v] {
                    if nodes[base].rank != 0 {
                        return Err(Error::RankViolation(format!(
                            "ladder {} base {} must have rank 0",
                            id, nodes[base].id
                        )));
                    }
                }
                for t in [a, b] {
                    if nodes[t].rank < 1 {
                        return Err(Error::RankViolation(format!(
                            "ladder {} tip {} must have rank >= 1",
                            id, nodes[t].id
                        )));
                    }
                }
                (
                    id,
                    GadgetKind::Ladder {
                        base_a: u,
                        base_b: v,
                        tip_a: a,
                        tip_b: b,
                        probes_a: Vec::new(),
                        probes_b: Vec::new(),
                    },
                )
            }
        };
        if !ids.insert(id.clone()) {
            return Err(Error::DuplicateId(id.clone()));
        }
        gadgets.push(Gadget { id: id.clone(), kind });
    }
    gadgets.sort_by(|a, b| a.id.cmp(&b.id));

    let graph = Graph { name, rank: nu, nodes, gadgets, warnings: Vec::new() };

    for g in &graph.gadgets {
        if g.rank() >= nu && !matches!(g.kind, GadgetKind::Branch { .. } | GadgetKind::Segment { .. })
        {
            warnings.push(format!(
                "gadget {} of rank {} in a graph of rank {} (transfinite features need rank >= {})",
                g.id,
                g.rank(),
                nu,
                g.rank() + 1
            ));
        }
    }

    if check_connected {
        let mut dsu: Vec<usize> = (0..graph.nodes.len()).collect();
        fn find(dsu: &mut Vec<usize>, x: usize) -> usize {
            if dsu[x] != x {
                let r = find(dsu, dsu[x]);
                dsu[x] = r;
            }
            dsu[x]
        }
        for gi in 0..graph.gadgets.len() {
            let att = graph.attachments(gi);
            if att.is_empty() {
                return Err(Error::Disconnected(format!(
                    "gadget {} touches no node",
                    graph.gadgets[gi].id
                )));
            }
            for w in att.windows(2) {
                let (a, b) = (find(&mut dsu, w[0].0), find(&mut dsu, w[1].0));
                dsu[a] = b;
            }
        }
        let root = find(&mut dsu, 0);
        for i in 1..graph.nodes.len() {
            if find(&mut dsu, i) != root {
                return Err(Error::Disconnected(format!(
                    "node {} unreachable from {}",
                    graph.nodes[i].id, graph.nodes[0].id
                )));
            }
        }
    }

    Ok(Graph { warnings, ..graph })
}

// ---------------------------------------------------------------------------
// DSL

/// Parses the line-oriented graph DSL. `#` starts a comment.
pub fn parse(text: &str) -> Result<Graph> {
    build_graph(&parse_decls(text)?)
}

pub fn parse_decls(text: &str) -> Result<Vec<Decl>> {
    let mut decls = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let err = |msg: &str| Error::Parse(format!("line {}: {}", lineno + 1, msg));
        let nat = |s: &str| s.parse::<u32>().map_err(|_| err(&format!("bad natural `{}`", s)));
        let decl = match toks[0] {
            "graph" => {
                if toks.len() != 4 || toks[2] != "rank" {
                    return Err(err("expected `graph <id> rank <nat>`"));
                }
                Decl::Graph { id: toks[1].into(), rank: nat(toks[3])? }
            }
            "node" => {
                if toks.len() != 4 || toks[2] != "rank" {
                    return Err(err("expected `node <id> rank <nat>`"));
                }
                Decl::Node { id: toks[1].into(), rank: nat(toks[3])? }
            }
            "branch" => {
                if toks.len() != 4 {
                    return Err(err("expected `branch <id> <u> <v>`"));
                }
                Decl::Branch { id: toks[1].into(), u: toks[2].into(), v: toks[3].into() }
            }
            "segment" => {
                if toks.len() != 8 || toks[2] != "rank" || toks[4] != "count" {
                    return Err(err("expected `segment <id> rank <nat> count <nat> <u> <v>`"));
                }
                Decl::Segment {
                    id: toks[1].into(),
                    rank: nat(toks[3])?,
                    count: toks[5]
                        .parse::<u64>()
                        .map_err(|_| err(&format!("bad count `{}`", toks[5])))?,
                    u: toks[6].into(),
                    v: toks[7].into(),
                }
            }
            "ray" => {
                if toks.len() != 8 || toks[2] != "rank" || toks[4] != "from" || toks[6] != "tip" {
                    return Err(err("expected `ray <id> rank <nat> from <node> tip (<node>|open)`"));
                }
                let tip = if toks[7] == "open" { None } else { Some(toks[7].to_string()) };
                Decl::Ray { id: toks[1].into(), rank: nat(toks[3])?, from: toks[5].into(), tip }
            }
            "endless" => {
                if toks.len() != 7 || toks[2] != "rank" || toks[4] != "tips" {
                    return Err(err(
                        "expected `endless <id> rank <nat> tips (<node>|open) (<node>|open)`",
                    ));
                }
                let end = |s: &str| if s == "open" { None } else { Some(s.to_string()) };
                Decl::Endless {
                    id: toks[1].into(),
                    rank: nat(toks[3])?,
                    a: end(toks[5]),
                    b: end(toks[6]),
                }
            }
            "ladder" => {
                if toks.len() != 8 || toks[2] != "base" || toks[5] != "tips" {
                    return Err(err("expected `ladder <id> base <u> <v> tips <a> <b>`"));
                }
                Decl::Ladder {
                    id: toks[1].into(),
                    u: toks[3].into(),
                    v: toks[4].into(),
                    a: toks[6].into(),
                    b: toks[7].into(),
                }
            }
            other => return Err(err(&format!("unknown directive `{}`", other))),
        };
        decls.push(decl);
    }
    Ok(decls)
}

/// Serializes a graph back to DSL text. Probed ladders carry structure the
/// grammar cannot express and are rejected.
pub fn render(g: &Graph) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "graph {} rank {}", g.name, g.rank).unwrap();
    for n in &g.nodes {
        writeln!(out, "node {} rank {}", n.id, n.rank).unwrap();
    }
    for gd in &g.gadgets {
        match &gd.kind {
            GadgetKind::Branch { u, v } => {
                writeln!(out, "branch {} {} {}", gd.id, g.nodes[*u].id, g.nodes[*v].id).unwrap();
            }
            GadgetKind::Segment { u, v, rank, count } => {
                writeln!(
                    out,
                    "segment {} rank {} count {} {} {}",
                    gd.id, rank, count, g.nodes[*u].id, g.nodes[*v].id
                )
                .unwrap();
            }
            GadgetKind::Ray { rank, from, tip } => {
                let t = match tip {
                    End::Open => "open".to_string(),
                    End::Node(i) => g.nodes[*i].id.clone(),
                };
                writeln!(out, "ray {} rank {} from {} tip {}", gd.id, rank, g.nodes[*from].id, t)
                    .unwrap();
            }
            GadgetKind::Endless { rank, tip_a, tip_b } => {
                let t = |e: &End| match e {
                    End::Open => "open".to_string(),
                    End::Node(i) => g.nodes[*i].id.clone(),
                };
                writeln!(out, "endless {} rank {} tips {} {}", gd.id, rank, t(tip_a), t(tip_b))
                    .unwrap();
            }
            GadgetKind::Ladder { base_a, base_b, tip_a, tip_b, probes_a, probes_b } => {
                if !probes_a.is_empty() || !probes_b.is_empty() {
                    return Err(Error::TooLarge(format!(
                        "probed ladder {} has no textual form",
                        gd.id
                    )));
                }
                writeln!(
                    out,
                    "ladder {} base {} {} tips {} {}",
                    gd.id,
                    g.nodes[*base_a].id,
                    g.nodes[*base_b].id,
                    g.nodes[*tip_a].id,
                    g.nodes[*tip_b].id
                )
                .unwrap();
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// probes

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Probe {
    pub gadget: String,
    /// Ladder rail selector; ignored for other gadgets.
    pub rail: Option<RailSide>,
    /// Index from the finite end (rays/segments) or rail base (ladders).
    /// Endless paths have no origin: the probe fixes one.
    pub index: u64,
    pub name: String,
}

/// Names one gadget-interior node, returning a new graph in which it is a
/// first-class node. Distances among pre-existing nodes are unchanged.
pub fn expand_probe(g: &Graph, p: &Probe) -> Result<Graph> {
    let gi = g.gadget_ix(&p.gadget)?;
    if g.nodes.iter().any(|n| n.id == p.name) || g.gadgets.iter().any(|x| x.id == p.name) {
        return Err(Error::DuplicateId(p.name.clone()));
    }
    let mut nodes = g.nodes.clone();
    let mut gadgets = g.gadgets.clone();
    let gadget = gadgets[gi].clone();
    match gadget.kind {
        GadgetKind::Branch { .. } => {
            return Err(Error::UnknownFamily(format!("branch {} has no interior family", gadget.id)))
        }
        GadgetKind::Ray { rank, from, tip } => {
            if p.index < 1 {
                return Err(Error::BadIndex(format!("ray index {} < 1", p.index)));
            }
            nodes.push(Node { id: p.name.clone(), rank });
            let new = nodes.len() - 1;
            gadgets[gi] = Gadget {
                id: format!("{}.s", gadget.id),
                kind: GadgetKind::Segment { u: from, v: new, rank, count: p.index },
            };
            gadgets.push(Gadget {
                id: format!("{}.r", gadget.id),
                kind: GadgetKind::Ray { rank, from: new, tip },
            });
        }
        GadgetKind::Segment { u, v, rank, count } => {
            if p.index < 1 || p.index >= count {
                return Err(Error::BadIndex(format!(
                    "segment index {} outside 1..{}",
                    p.index,
                    count - 1
                )));
            }
            nodes.push(Node { id: p.name.clone(), rank });
            let new = nodes.len() - 1;
            gadgets[gi] = Gadget {
                id: format!("{}.l", gadget.id),
                kind: GadgetKind::Segment { u, v: new, rank, count: p.index },
            };
            gadgets.push(Gadget {
                id: format!("{}.h", gadget.id),
                kind: GadgetKind::Segment { u: new, v, rank, count: count - p.index },
            });
        }
        GadgetKind::Endless { rank, tip_a, tip_b } => {
            nodes.push(Node { id: p.name.clone(), rank });
            let new = nodes.len() - 1;
            gadgets[gi] = Gadget {
                id: format!("{}.a", gadget.id),
                kind: GadgetKind::Ray { rank, from: new, tip: tip_a },
            };
            gadgets.push(Gadget {
                id: format!("{}.b", gadget.id),
                kind: GadgetKind::Ray { rank, from: new, tip: tip_b },
            });
        }
        GadgetKind::Ladder { base_a, base_b, tip_a, tip_b, mut probes_a, mut probes_b } => {
            if p.index < 1 {
                return Err(Error::BadIndex(format!("rail index {} < 1", p.index)));
            }
            let rail = p.rail.ok_or_else(|| {
                Error::BadIndex(format!("ladder {} probe needs a rail selector", gadget.id))
            })?;
            let list = match rail {
                RailSide::A => &mut probes_a,
                RailSide::B => &mut probes_b,
            };
            if list.iter().any(|(k, _)| *k == p.index) {
                return Err(Error::BadIndex(format!("rail index {} already probed", p.index)));
            }
            nodes.push(Node { id: p.name.clone(), rank: 0 });
            let new = nodes.len() - 1;
            list.push((p.index, new));
            list.sort_unstable_by_key(|(k, _)| *k);
            gadgets[gi] = Gadget {
                id: gadget.id,
                kind: GadgetKind::Ladder { base_a, base_b, tip_a, tip_b, probes_a, probes_b },
            };
        }
    }
    // re-canonicalize: keep deterministic node/gadget order
    let mut perm: Vec<usize> = (0..nodes.len()).collect();
    perm.sort_by(|&a, &b| nodes[a].id.cmp(&nodes[b].id));
    let mut remap = vec![0usize; nodes.len()];
    for (new_ix, &old_ix) in perm.iter().enumerate() {
        remap[old_ix] = new_ix;
    }
    let nodes: Vec<Node> = perm.iter().map(|&i| nodes[i].clone()).collect();
    for gd in &mut gadgets {
        map_nodes(&mut gd.kind, &remap);
    }
    gadgets.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(Graph {
        name: g.name.clone(),
        rank: g.rank,
        nodes,
        gadgets,
        warnings: g.warnings.clone(),
    })
}

pub(crate) fn map_nodes(kind: &mut GadgetKind, remap: &[usize]) {
    let m = |i: &mut usize| *i = remap[*i];
    let me = |e: &mut End| {
        if let End::Node(i) = e {
            *i = remap[*i];
        }
    };
    match kind {
        GadgetKind::Branch { u, v } => {
            m(u);
            m(v);
        }
        GadgetKind::Segment { u, v, .. } => {
            m(u);
            m(v);
        }
        GadgetKind::Ray { from, tip, .. } => {
            m(from);
            me(tip);
        }
        GadgetKind::Endless { tip_a, tip_b, .. } => {
            me(tip_a);
            me(tip_b);
        }
        GadgetKind::Ladder { base_a, base_b, tip_a, tip_b, probes_a, probes_b } => {
            m(base_a);
            m(base_b);
            m(tip_a);
            m(tip_b);
            for (_, n) in probes_a.iter_mut().chain(probes_b.iter_mut()) {
                *n = remap[*n];
            }
        }
    }
}

// ---------------------------------------------------------------------------
// quotient multigraph

/// Ladder interior occupancy of a quotient edge, used to keep enumerated
/// paths simple through unnamed rail/rung nodes. Intervals are inclusive;
/// INF_INDEX stands for "arbitrarily far out".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Occ {
    Rail(RailSide, u64, u64),
    Rung(u64),
}

pub fn occ_conflict(a: &[(usize, Occ)], b: &[(usize, Occ)]) -> bool {
    for (ga, oa) in a {
        for (gb, ob) in b {
            if ga != gb {
                continue;
            }
            let clash = match (oa, ob) {
                (Occ::Rail(ra, lo_a, hi_a), Occ::Rail(rb, lo_b, hi_b)) => {
                    ra == rb && lo_a <= hi_b && lo_b <= hi_a
                }
                (Occ::Rung(x), Occ::Rung(y)) => x == y,
                _ => false,
            };
            if clash {
                return true;
            }
        }
    }
    false
}

/// An undirected quotient edge between two named nodes, carrying the gadget
/// content traversed between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QEdge {
    pub label: String,
    pub gadget: usize,
    pub u: usize,
    pub v: usize,
    /// oriented u -> v; reverse for v -> u traversal
    pub traversal: Traversal,
    pub occ: Vec<(usize, Occ)>,
}

/// Builds the quotient multigraph over the named nodes: one edge per
/// traversable gadget passage between two named attachment points.
pub fn quotient_edges(g: &Graph) -> Vec<QEdge> {
    let mut edges = Vec::new();
    for (gi, gd) in g.gadgets.iter().enumerate() {
        match &gd.kind {
            GadgetKind::Branch { u, v } => edges.push(QEdge {
                label: gd.id.clone(),
                gadget: gi,
                u: *u,
                v: *v,
                traversal: Traversal::single(Item::Branches(1)),
                occ: Vec::new(),
            }),
            GadgetKind::Segment { u, v, rank, count } => edges.push(QEdge {
                label: gd.id.clone(),
                gadget: gi,
                u: *u,
                v: *v,
                traversal: segment_traversal(*rank, *count),
                occ: Vec::new(),
            }),
            GadgetKind::Ray { rank, from, tip } => {
                if let End::Node(t) = tip {
                    edges.push(QEdge {
                        label: gd.id.clone(),
                        gadget: gi,
                        u: *from,
                        v: *t,
                        traversal: Traversal::single(Item::Tip(*rank)),
                        occ: Vec::new(),
                    });
                }
            }
            GadgetKind::Endless { rank, tip_a, tip_b } => {
                if let (End::Node(a), End::Node(b)) = (tip_a, tip_b) {
                    edges.push(QEdge {
                        label: gd.id.clone(),
                        gadget: gi,
                        u: *a,
                        v: *b,
                        traversal: Traversal::new(vec![Item::Tip(*rank), Item::Tip(*rank)], vec![*rank]),
                        occ: Vec::new(),
                    });
                }
            }
            GadgetKind::Ladder { base_a, base_b, tip_a, tip_b, probes_a, probes_b } => {
                ladder_edges(g, gi, gd, *base_a, *base_b, *tip_a, *tip_b, probes_a, probes_b, &mut edges);
            }
        }
    }
    edges
}

pub fn segment_traversal(rank: u32, count: u64) -> Traversal {
    if rank == 0 {
        Traversal::single(Item::Branches(count))
    } else {
        // count endless (rank-1)-paths joined at unnamed rank-`rank` nodes
        let mut items = Vec::new();
        let mut breaks = Vec::new();
        for i in 0..count {
            if i > 0 {
                breaks.push(rank);
            }
            items.push(Item::Tip(rank - 1));
            breaks.push(rank - 1);
            items.push(Item::Tip(rank - 1));
        }
        Traversal::new(items, breaks)
    }
}

#[allow(clippy::too_many_arguments)]
fn ladder_edges(
    _g: &Graph,
    gi: usize,
    gd: &Gadget,
    base_a: usize,
    base_b: usize,
    tip_a: usize,
    tip_b: usize,
    probes_a: &[(u64, usize)],
    probes_b: &[(u64, usize)],
    edges: &mut Vec<QEdge>,
) {
    // named rail points: (rail, index, node)
    let mut points: Vec<(RailSide, u64, usize)> = vec![(RailSide::A, 0, base_a), (RailSide::B, 0, base_b)];
    for (k, n) in probes_a {
        points.push((RailSide::A, *k, *n));
    }
    for (k, n) in probes_b {
        points.push((RailSide::B, *k, *n));
    }

    let mut push = |label: String, u: usize, v: usize, traversal: Traversal, occ: Vec<Occ>| {
        edges.push(QEdge {
            label,
            gadget: gi,
            u,
            v,
            traversal,
            occ: occ.into_iter().map(|o| (gi, o)).collect(),
        });
    };

    // point-to-point edges along and across the rails
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let (ra, ka, na) = points[i];
            let (rb, kb, nb) = points[j];
            if na == nb {
                continue;
            }
            let (lo, hi) = (ka.min(kb), ka.max(kb));
            if ra == rb {
                if lo == hi {
                    continue;
                }
                push(
                    format!("{}[{:?}{}..{}]", gd.id, ra, lo, hi),
                    na,
                    nb,
                    Traversal::single(Item::Branches(hi - lo)),
                    vec![Occ::Rail(ra, lo, hi)],
                );
            } else {
                // cross at the lower index, then run along the other rail
                let far_rail = if ka <= kb { rb } else { ra };
                push(
                    format!("{}[{:?}{}x{:?}{}]", gd.id, ra, ka, rb, kb),
                    na,
                    nb,
                    Traversal::single(Item::Branches(hi - lo + 1)),
                    vec![Occ::Rung(lo), Occ::Rail(far_rail, lo, hi)],
                );
            }
        }
    }

    // point-to-tip edges: straight up the own rail, or cross and climb
    for &(rail, k, n) in &points {
        let (own_tip, other_tip, other_rail) = match rail {
            RailSide::A => (tip_a, tip_b, RailSide::B),
            RailSide::B => (tip_b, tip_a, RailSide::A),
        };
        push(
            format!("{}[{:?}{}->tip]", gd.id, rail, k),
            n,
            own_tip,
            Traversal::single(Item::Tip(0)),
            vec![Occ::Rail(rail, k, INF_INDEX)],
        );
        push(
            format!("{}[{:?}{}->xtip]", gd.id, rail, k),
            n,
            other_tip,
            Traversal::single(Item::Tip(0)),
            vec![Occ::Rung(k), Occ::Rail(other_rail, k, INF_INDEX)],
        );
    }

    // tip-to-tip: descend one rail, cross far out, climb the other
    push(
        format!("{}[tip-tip]", gd.id),
        tip_a,
        tip_b,
        Traversal::new(vec![Item::Tip(0), Item::Tip(0)], vec![0]),
        vec![
            Occ::Rail(RailSide::A, INF_INDEX, INF_INDEX),
            Occ::Rail(RailSide::B, INF_INDEX, INF_INDEX),
            Occ::Rung(INF_INDEX),
        ],
    );
}

/// Adjacency lists over quotient edges, with deterministic ordering.
pub struct Quotient {
    pub edges: Vec<QEdge>,
    pub adj: Vec<Vec<usize>>,
}

pub fn quotient(g: &Graph) -> Quotient {
    let mut edges = quotient_edges(g);
    edges.sort_by(|a, b| a.label.cmp(&b.label));
    let mut adj = vec![Vec::new(); g.nodes.len()];
    for (ei, e) in edges.iter().enumerate() {
        adj[e.u].push(ei);
        if e.v != e.u {
            adj[e.v].push(ei);
        }
    }
    Quotient { edges, adj }
}

/// Total finite content of the graph: an upper bound on any finite
/// coefficient a distance can contain. Used to place probe-sampling tails
/// beyond any affine/constant crossover.
pub fn finite_content_bound(g: &Graph) -> u64 {
    let mut total = 8u64;
    for gd in &g.gadgets {
        total += match &gd.kind {
            GadgetKind::Branch { .. } => 1,
            GadgetKind::Segment { count, .. } => *count,
            GadgetKind::Ray { .. } | GadgetKind::Endless { .. } => 1,
            GadgetKind::Ladder { probes_a, probes_b, .. } => {
                let max_a = probes_a.iter().map(|(k, _)| *k).max().unwrap_or(0);
                let max_b = probes_b.iter().map(|(k, _)| *k).max().unwrap_or(0);
                2 * (max_a + max_b) + 4
            }
        };
    }
    total
}

/// Stable map from node id to index, for report ordering.
pub fn node_order(g: &Graph) -> BTreeMap<String, usize> {
    g.nodes.iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect()
}

/// Returns a copy of the graph with extra declarations appended (used by
/// constructions that add probe scaffolding).
pub fn with_decls(g: &Graph, extra: &[Decl]) -> Result<Graph> {
    let mut decls = to_decls(g)?;
    decls.extend_from_slice(extra);
    build_graph(&decls)
}

/// Graph back to declarations (fails for probed ladders, like `render`).
pub fn to_decls(g: &Graph) -> Result<Vec<Decl>> {
    let mut decls = vec![Decl::Graph { id: g.name.clone(), rank: g.rank }];
    for n in &g.nodes {
        decls.push(Decl::Node { id: n.id.clone(), rank: n.rank });
    }
    for gd in &g.gadgets {
        let d = match &gd.kind {
            GadgetKind::Branch { u, v } => Decl::Branch {
                id: gd.id.clone(),
                u: g.nodes[*u].id.clone(),
                v: g.nodes[*v].id.clone(),
            },
            GadgetKind::Segment { u, v, rank, count } => Decl::Segment {
                id: gd.id.clone(),
                rank: *rank,
                count: *count,
                u: g.nodes[*u].id.clone(),
                v: g.nodes[*v].id.clone(),
            },
            GadgetKind::Ray { rank, from, tip } => Decl::Ray {
                id: gd.id.clone(),
                rank: *rank,
                from: g.nodes[*from].id.clone(),
                tip: tip.node().map(|i| g.nodes[i].id.clone()),
            },
            GadgetKind::Endless { rank, tip_a, tip_b } => Decl::Endless {
                id: gd.id.clone(),
                rank: *rank,
                a: tip_a.node().map(|i| g.nodes[i].id.clone()),
                b: tip_b.node().map(|i| g.nodes[i].id.clone()),
            },
            GadgetKind::Ladder { base_a, base_b, tip_a, tip_b, probes_a, probes_b } => {
                if !probes_a.is_empty() || !probes_b.is_empty() {
                    return Err(Error::TooLarge(format!(
                        "probed ladder {} has no textual form",
                        gd.id
                    )));
                }
                Decl::Ladder {
                    id: gd.id.clone(),
                    u: g.nodes[*base_a].id.clone(),
                    v: g.nodes[*base_b].id.clone(),
                    a: g.nodes[*tip_a].id.clone(),
                    b: g.nodes[*tip_b].id.clone(),
                }
            }
        };
        decls.push(d);
    }
    Ok(decls)
}

/// Incidence lists: for each node, the gadgets touching it.
pub fn incidence(g: &Graph) -> Vec<Vec<(usize, Attach)>> {
    let mut inc = vec![Vec::new(); g.nodes.len()];
    for gi in 0..g.gadgets.len() {
        for (n, a) in g.attachments(gi) {
            inc[n].push((gi, a));
        }
    }
    inc
}

/// Convenience: map of node id -> rank for diagnostics.
pub fn ranks_by_id(g: &Graph) -> HashMap<String, u32> {
    g.nodes.iter().map(|n| (n.id.clone(), n.rank)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fig2() -> Graph {
        parse(
            "graph fig2 rank 1\n\
             node x1 rank 1\n\
             node y1 rank 1\n\
             ray pa rank 0 from x1 tip y1\n\
             endless pb rank 0 tips x1 y1\n",
        )
        .unwrap()
    }

    #[test]
    fn fig2_builds() {
        let g = fig2();
        assert_eq!(g.rank, 1);
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.gadgets.len(), 2);
        assert_eq!(g.families().len(), 2);
    }

    #[test]
    fn self_loop_rejected() {
        let err = parse("graph g rank 0\nnode u rank 0\nbranch b u u\n").unwrap_err();
        assert!(matches!(err, Error::SelfLoopBranch(_)));
    }

    #[test]
    fn disconnected_rejected() {
        let err = parse(
            "graph g rank 0\nnode a rank 0\nnode b rank 0\nnode c rank 0\nnode d rank 0\n\
             branch e1 a b\nbranch e2 c d\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Disconnected(_)));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = parse("graph g rank 0\nnode a rank 0\nnode a rank 0\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateId(_)));
    }

    #[test]
    fn tip_rank_must_exceed_gadget_rank() {
        let err = parse(
            "graph g rank 1\nnode a rank 0\nnode b rank 0\nray r rank 0 from a tip b\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::RankViolation(_)));
    }

    #[test]
    fn node_rank_bounded_by_graph_rank() {
        let err = parse("graph g rank 0\nnode a rank 1\n").unwrap_err();
        assert!(matches!(err, Error::BadRank(_)));
    }

    #[test]
    fn low_rank_graph_with_gadgets_flagged() {
        let g = parse("graph g rank 0\nnode u rank 0\nray r rank 0 from u tip open\n").unwrap();
        assert!(!g.warnings.is_empty());
    }

    #[test]
    fn pristine_fig2() {
        let g = fig2();
        let rep = g.pristine_check();
        assert!(!rep.all);
        let x1 = rep.nodes.iter().find(|e| e.node == "x1").unwrap();
        assert!(!x1.pristine); // embraces the chain 0-node of pa
        let y1 = rep.nodes.iter().find(|e| e.node == "y1").unwrap();
        assert!(y1.pristine);
    }

    #[test]
    fn canonicalization_is_deterministic() {
        let a = parse(
            "graph g rank 1\nnode b rank 1\nnode a rank 1\nendless e rank 0 tips a b\n",
        )
        .unwrap();
        let b = parse(
            "graph g rank 1\nnode a rank 1\nnode b rank 1\nendless e rank 0 tips a b\n",
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn round_trip() {
        let g = fig2();
        let again = parse(&render(&g).unwrap()).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn probe_ray_splits_into_segment_and_residual() {
        let g = fig2();
        let probed = expand_probe(
            &g,
            &Probe { gadget: "pa".into(), rail: None, index: 3, name: "v".into() },
        )
        .unwrap();
        assert!(probed.node_ix("v").is_ok());
        let seg = probed.gadget_ix("pa.s").unwrap();
        assert!(matches!(probed.gadgets[seg].kind, GadgetKind::Segment { count: 3, .. }));
        assert!(probed.gadget_ix("pa.r").is_ok());
    }

    #[test]
    fn probe_endless_splits_into_two_rays() {
        let g = fig2();
        let probed = expand_probe(
            &g,
            &Probe { gadget: "pb".into(), rail: None, index: 1, name: "w".into() },
        )
        .unwrap();
        assert!(probed.gadget_ix("pb.a").is_ok());
        assert!(probed.gadget_ix("pb.b").is_ok());
    }

    #[test]
    fn probe_bad_index_rejected() {
        let g = fig2();
        let err = expand_probe(
            &g,
            &Probe { gadget: "pa".into(), rail: None, index: 0, name: "v".into() },
        )
        .unwrap_err();
        assert!(matches!(err, Error::BadIndex(_)));
        let err = expand_probe(
            &g,
            &Probe { gadget: "nope".into(), rail: None, index: 1, name: "v".into() },
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnknownGadget(_)));
    }
}
