//! Path descriptions and their ordinal lengths.
//!
//! A path is an alternating sequence of named nodes and gadget traversals.
//! Each traversal is a flat list of items — blocks of branches, or traversed
//! p-tips — separated by the ranks of the interior nodes between them. The
//! length is *not* a per-edge sum: content that sits inside a run which
//! traverses a higher-rank tip is absorbed by that tip's w-power. See
//! `path_length` for the exact rule.

use crate::error::{Error, Result};
use crate::ordinal::{Exp, Ordinal};

/// One piece of traversed gadget content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Item {
    /// A block of `n` consecutive branches (finite 0-path content).
    Branches(u64),
    /// A traversed p-tip; contributes w^(p+1) when it survives absorption.
    Tip(u32),
}

impl Item {
    /// The "tip rank" used by the survival rule: branches behave like
    /// rank -1 content (absorbable by any tip), a p-tip like rank p.
    fn tip_rank(&self) -> i64 {
        match self {
            Item::Branches(_) => -1,
            Item::Tip(p) => *p as i64,
        }
    }

    fn contribution(&self) -> Ordinal {
        match self {
            Item::Branches(n) => Ordinal::natural(*n),
            Item::Tip(p) => Ordinal::w_pow(Exp::Nat(p + 1)),
        }
    }
}

/// Gadget content between two named nodes: items separated by the ranks of
/// the unnamed interior nodes between them (`breaks.len() == items.len()-1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Traversal {
    pub items: Vec<Item>,
    pub breaks: Vec<u32>,
}

impl Traversal {
    pub fn new(items: Vec<Item>, breaks: Vec<u32>) -> Self {
        assert_eq!(breaks.len() + 1, items.len(), "breaks separate items");
        Traversal { items, breaks }
    }

    pub fn single(item: Item) -> Self {
        Traversal { items: vec![item], breaks: Vec::new() }
    }

    pub fn reversed(&self) -> Self {
        let mut t = self.clone();
        t.items.reverse();
        t.breaks.reverse();
        t
    }
}

/// A node endpoint of a path step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathNode {
    pub id: String,
    pub rank: u32,
}

/// One traversal step with a human-readable label (the gadget and direction).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathStep {
    pub label: String,
    pub traversal: Traversal,
}

/// A two-ended path: nodes[0] -steps[0]- nodes[1] -steps[1]- ...
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathDesc {
    pub nodes: Vec<PathNode>,
    pub steps: Vec<PathStep>,
}

impl PathDesc {
    pub fn trivial(id: &str, rank: u32) -> Self {
        PathDesc { nodes: vec![PathNode { id: id.to_string(), rank }], steps: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() || self.nodes.len() != self.steps.len() + 1 {
            return Err(Error::MalformedPath("nodes and steps must alternate".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for n in &self.nodes {
            if !seen.insert(&n.id) {
                return Err(Error::MalformedPath(format!("node {} met more than once", n.id)));
            }
        }
        Ok(())
    }

    /// Flattens to (items, separators): separator i is the rank of the node
    /// or interior break between item i and item i+1.
    fn flatten(&self) -> (Vec<Item>, Vec<u32>) {
        let mut items = Vec::new();
        let mut seps = Vec::new();
        for (i, step) in self.steps.iter().enumerate() {
            for (j, it) in step.traversal.items.iter().enumerate() {
                if !items.is_empty() && (i > 0 || j > 0) {
                    // separator: interior break inside the step, or the named
                    // node between steps
                    let sep = if j == 0 { self.nodes[i].rank } else { step.traversal.breaks[j - 1] };
                    seps.push(sep);
                }
                items.push(*it);
            }
        }
        (items, seps)
    }

    /// Diagnostic rendering: `x1 -[ray pa]- y1 -[endless pb]- ...`
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if i > 0 {
                out.push_str(&format!(" -[{}]- ", self.steps[i - 1].label));
            }
            out.push_str(&n.id);
        }
        out
    }
}

/// Ordinal length of a two-ended path.
///
/// Survival rule: an item with tip rank t contributes iff for every s > t,
/// the maximal s-run containing it (the segment not interrupted by a
/// separator of rank > s) traverses no s-tip. The length is the natural sum
/// of the surviving contributions: branches count 1 each, a surviving p-tip
/// counts w^(p+1). A one-ended p-run thus flattens to w^(p+1) and an endless
/// one to w^(p+1)*2 regardless of interior content.
pub fn path_length(p: &PathDesc) -> Result<Ordinal> {
    p.validate()?;
    let (items, seps) = p.flatten();
    let tip_ranks: std::collections::BTreeSet<u32> = items
        .iter()
        .filter_map(|it| match it {
            Item::Tip(p) => Some(*p),
            _ => None,
        })
        .collect();
    let mut total = Ordinal::zero();
    'item: for (i, it) in items.iter().enumerate() {
        // absorption can only come from ranks that actually have tips
        for &s in tip_ranks.iter().filter(|&&s| (s as i64) > it.tip_rank()) {
            // the s-run containing item i: extend while separators are <= s
            let mut lo = i;
            while lo > 0 && seps[lo - 1] <= s {
                lo -= 1;
            }
            let mut hi = i;
            while hi + 1 < items.len() && seps[hi] <= s {
                hi += 1;
            }
            let run_has_s_tip = items[lo..=hi].contains(&Item::Tip(s));
            if run_has_s_tip {
                continue 'item;
            }
        }
        total = total.nat_sum(&it.contribution());
    }
    Ok(total)
}

/// Classification of a maximal p-run by the number of p-tips it traverses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunClass {
    TwoEnded,
    OneEnded,
    Endless,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub rank: u32,
    /// item index range (inclusive) in the flattened path
    pub span: (usize, usize),
    pub class: RunClass,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunDecomposition {
    pub runs: Vec<Run>,
}

/// Maximal runs of the path at each rank that carries content. A p-run is a
/// maximal segment whose interior separators all have rank <= p; it is
/// classified by how many p-tips it traverses (0/1/2).
pub fn decompose_runs(p: &PathDesc) -> Result<RunDecomposition> {
    p.validate()?;
    let (items, seps) = p.flatten();
    let mut ranks: std::collections::BTreeSet<u32> = std::collections::BTreeSet::new();
    for it in &items {
        match it {
            Item::Branches(_) => {
                ranks.insert(0);
            }
            Item::Tip(t) => {
                ranks.insert(*t);
            }
        }
    }
    let mut runs = Vec::new();
    for &rank in &ranks {
        let mut start = 0usize;
        for i in 0..items.len() {
            let is_end = i + 1 == items.len() || seps[i] > rank;
            if is_end {
                let span = (start, i);
                let tips = items[start..=i]
                    .iter()
                    .filter(|x| matches!(x, Item::Tip(t) if *t == rank))
                    .count();
                // only emit runs that actually carry rank-`rank` content
                let carries = items[start..=i].iter().any(|x| match x {
                    Item::Branches(_) => rank == 0,
                    Item::Tip(t) => *t == rank,
                });
                if carries {
                    let class = match tips {
                        0 => RunClass::TwoEnded,
                        1 => RunClass::OneEnded,
                        _ => RunClass::Endless,
                    };
                    runs.push(Run { rank, span, class });
                }
                start = i + 1;
            }
        }
    }
    Ok(RunDecomposition { runs })
}
