//! Rank sections and the pristine-regime spectrum validators.
//!
//! Two gadgets belong to the same rho-section when some shared node lets a
//! path pass between them at rank <= rho: both attachments must enter the
//! node below the tip level (a traversed tip always lifts the path's rank
//! above rho). Bordering nodes sit above the section's rank; a boundary
//! node borders at least two sections; an end section has exactly one
//! bordering node (the form the interior-offset law actually requires —
//! a section between a boundary node and a non-boundary one is not an end).

use std::collections::{BTreeMap, BTreeSet};

use crate::eccentricity::{ecc_report_fast, EccReport, FamilyEcc};
use crate::error::{Error, Result};
use crate::geodesic::enumerate_paths;
use crate::graph::{incidence, quotient, Graph};
use crate::length::{path_length, Item};
use crate::ordinal::{Exp, Ordinal, Rank};

/// One rho-section: a maximal set of gadgets mutually reachable at rank
/// <= rho, with its incident-node classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub rank: u32,
    pub gadgets: Vec<usize>,
    /// incident named nodes of rank <= rho
    pub internal: Vec<usize>,
    /// incident named nodes of rank > rho
    pub bordering: Vec<usize>,
    /// bordering nodes incident to at least two rho-sections
    pub boundary: Vec<usize>,
    /// exactly one bordering node
    pub end: bool,
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let r = self.find(self.0[x]);
            self.0[x] = r;
        }
        self.0[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// The rho-sections of the graph, ordered by smallest member gadget.
pub fn sections(g: &Graph, rho: u32) -> Result<Vec<Section>> {
    if rho > g.rank {
        return Err(Error::BadRank(format!("section rank {} exceeds graph rank {}", rho, g.rank)));
    }
    let inc = incidence(g);
    let mut dsu = Dsu::new(g.gadgets.len());
    for atts in &inc {
        let low: Vec<usize> =
            atts.iter().filter(|(_, a)| a.entry_rank() <= rho).map(|(gi, _)| *gi).collect();
        for w in low.windows(2) {
            dsu.union(w[0], w[1]);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for gi in 0..g.gadgets.len() {
        groups.entry(dsu.find(gi)).or_default().push(gi);
    }
    // how many sections each node touches, for the boundary test
    let mut touched: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); g.nodes.len()];
    for (n, atts) in inc.iter().enumerate() {
        for (gi, _) in atts {
            touched[n].insert(dsu.find(*gi));
        }
    }
    let mut out = Vec::new();
    for (root, gadgets) in groups {
        let mut internal = BTreeSet::new();
        let mut bordering = BTreeSet::new();
        for &gi in &gadgets {
            for (n, _) in g.attachments(gi) {
                if g.nodes[n].rank <= rho {
                    internal.insert(n);
                } else {
                    bordering.insert(n);
                }
            }
        }
        let boundary: Vec<usize> =
            bordering.iter().copied().filter(|n| touched[*n].len() >= 2).collect();
        let end = bordering.len() == 1;
        out.push(Section {
            rank: rho,
            gadgets,
            internal: internal.into_iter().collect(),
            bordering: bordering.into_iter().collect(),
            boundary,
            end,
        });
        let _ = root;
    }
    Ok(out)
}

/// Boundary nu-nodes of the (nu-1)-sections (each counted once).
pub fn boundary_nodes(g: &Graph) -> Result<Vec<usize>> {
    if g.rank == 0 {
        return Ok(Vec::new());
    }
    let secs = sections(g, g.rank - 1)?;
    let mut set = BTreeSet::new();
    for s in &secs {
        set.extend(s.boundary.iter().copied());
    }
    Ok(set.into_iter().collect())
}

fn multiple_coeff(nu: u32, r: &Rank) -> Option<u64> {
    let value = match r {
        Rank::Ord(o) => o,
        Rank::Arrow(_) => return None,
    };
    let p = value.coeff(Exp::Nat(nu));
    if p >= 1 && *value == Ordinal::w_pow_mul(Exp::Nat(nu), p) {
        Some(p)
    } else {
        None
    }
}

fn family_coeff(nu: u32, f: &FamilyEcc) -> Option<u64> {
    match f {
        FamilyEcc::Constant(r) => multiple_coeff(nu, r),
        FamilyEcc::Affine { .. } => None,
        FamilyEcc::Mixed { min, sup } => {
            if min == sup {
                multiple_coeff(nu, min)
            } else {
                None
            }
        }
    }
}

/// Verdict of the pristine-regime eccentricity-spectrum laws.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumReport {
    pub pass: bool,
    /// number of boundary nu-nodes
    pub m: usize,
    /// sorted distinct multipliers p over all eccentricities
    pub spectrum: Vec<u64>,
    pub failures: Vec<String>,
}

/// Checks, on a pristine graph, that every eccentricity is w^nu * p with
/// 1 <= p <= 2m+2, that the multipliers are consecutive, that bordering
/// nodes sit within one step of their section interiors, and the exact
/// one-step offsets for non-boundary bordering nodes and end sections.
pub fn spectrum_check(g: &Graph) -> Result<SpectrumReport> {
    let report = ecc_report_fast(g)?;
    spectrum_check_with(g, &report)
}

pub fn spectrum_check_with(g: &Graph, report: &EccReport) -> Result<SpectrumReport> {
    if g.rank == 0 {
        return Err(Error::PreconditionViolated("spectrum laws need rank >= 1".into()));
    }
    let pr = g.pristine_check();
    if !pr.all {
        let bad = pr
            .nodes
            .iter()
            .find(|e| !e.pristine)
            .map(|e| e.node.clone())
            .unwrap_or_default();
        return Err(Error::PreconditionViolated(format!("nu-node {} is not pristine", bad)));
    }
    let nu = g.rank;
    let mut failures = Vec::new();

    // every eccentricity must be an exact multiple of w^nu
    let mut coeffs: BTreeMap<String, u64> = BTreeMap::new();
    for n in &report.nodes {
        match multiple_coeff(nu, &n.ecc) {
            Some(p) => {
                coeffs.insert(n.id.clone(), p);
            }
            None => failures.push(format!("e({}) = {} is not a multiple of w^{}", n.id, n.ecc, nu)),
        }
    }
    for (id, f) in &report.families {
        match family_coeff(nu, f) {
            Some(p) => {
                coeffs.insert(id.clone(), p);
            }
            None => failures.push(format!("e({}) = {} is not a constant multiple of w^{}", id, f, nu)),
        }
    }

    let secs = sections(g, nu - 1)?;
    let boundary = boundary_nodes(g)?;
    let m = boundary.len();
    let bound = 2 * m as u64 + 2;
    for (id, p) in &coeffs {
        if *p < 1 || *p > bound {
            failures.push(format!("e({}) = w^{}*{} outside 1..{}", id, nu, p, bound));
        }
    }

    // consecutive multipliers
    let spectrum: Vec<u64> = coeffs.values().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if let (Some(lo), Some(hi)) = (spectrum.first(), spectrum.last()) {
        if hi - lo + 1 != spectrum.len() as u64 {
            failures.push(format!("spectrum {:?} is not consecutive", spectrum));
        }
    }

    // each eccentricity above the radius attained at least twice
    if let Some(lo) = spectrum.first() {
        for v in &spectrum {
            if v > lo && coeffs.values().filter(|p| *p == v).count() < 2 {
                failures.push(format!("multiplier {} above the radius attained only once", v));
            }
        }
    }

    let trivial = secs.len() == 1 && g.nodes.iter().filter(|n| n.rank == nu).count() <= 1;
    let fams = g.families();
    for s in &secs {
        // interior eccentricity: internal named nodes plus member families
        let mut interior: Vec<(String, u64)> = Vec::new();
        for &n in &s.internal {
            let id = &g.nodes[n].id;
            if let Some(p) = coeffs.get(id) {
                interior.push((id.clone(), *p));
            }
        }
        for f in &fams {
            if s.gadgets.contains(&f.gadget) {
                if let Some(p) = coeffs.get(&f.id) {
                    interior.push((f.id.clone(), *p));
                }
            }
        }
        let Some(&(_, p)) = interior.first() else { continue };
        // interior constancy across the section
        for (id, q) in &interior {
            if *q != p {
                failures.push(format!("section interior not constant: {} has p={} vs {}", id, q, p));
            }
        }
        for &b in &s.bordering {
            let id = &g.nodes[b].id;
            let Some(&k) = coeffs.get(id) else { continue };
            if k.abs_diff(p) > 1 {
                failures.push(format!("|e({}) - interior| = w^{}*{} in one section", id, nu, k.abs_diff(p)));
            }
            if !trivial && !boundary.contains(&b) && k != p + 1 {
                failures.push(format!(
                    "non-boundary bordering {}: p={} but interior {}",
                    id, k, p
                ));
            }
        }
        if !trivial && s.end {
            let b = s.bordering[0];
            if let Some(&k) = coeffs.get(&g.nodes[b].id) {
                if p != k + 1 {
                    failures.push(format!(
                        "end section interior p={} is not one above its bordering node {}={}",
                        p, g.nodes[b].id, k
                    ));
                }
            }
        }
    }

    Ok(SpectrumReport { pass: failures.is_empty(), m, spectrum, failures })
}

/// Verdict of the tip-count length law over enumerated paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultipleCheck {
    pub pass: bool,
    /// paths traversing at least one (nu-1)-tip that were checked
    pub checked: usize,
    pub failures: Vec<String>,
}

/// On a pristine graph, every simple two-ended path that traverses k >= 1
/// tips of rank nu-1 has length exactly w^nu * k.
pub fn path_length_multiple_check(g: &Graph) -> Result<MultipleCheck> {
    if g.rank == 0 {
        return Err(Error::PreconditionViolated("length law needs rank >= 1".into()));
    }
    let pr = g.pristine_check();
    if !pr.all {
        return Err(Error::PreconditionViolated("graph is not pristine".into()));
    }
    let nu = g.rank;
    let q = quotient(g);
    let mut checked = 0usize;
    let mut failures = Vec::new();
    for x in 0..g.nodes.len() {
        for y in x + 1..g.nodes.len() {
            enumerate_paths(g, &q, x, y, |p| {
                let tips: u64 = p
                    .steps
                    .iter()
                    .flat_map(|s| s.traversal.items.iter())
                    .filter(|it| matches!(it, Item::Tip(t) if *t == nu - 1))
                    .count() as u64;
                if tips == 0 {
                    return;
                }
                checked += 1;
                let want = Ordinal::w_pow_mul(Exp::Nat(nu), tips);
                let got = path_length(p).expect("enumerated paths are well-formed");
                if got != want {
                    failures.push(format!(
                        "{} to {}: {} tips but length {}",
                        p.nodes[0].id,
                        p.nodes.last().unwrap().id,
                        tips,
                        got
                    ));
                }
            });
        }
    }
    Ok(MultipleCheck { pass: failures.is_empty(), checked, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::distance;
    use crate::graph::parse;

    fn fig2() -> Graph {
        parse(
            "graph fig2 rank 1\n\
             node x1 rank 1\nnode y1 rank 1\n\
             ray pa rank 0 from x1 tip y1\n\
             endless pb rank 0 tips x1 y1\n",
        )
        .unwrap()
    }

    fn fig5() -> Graph {
        parse(
            "graph fig5 rank 1\n\
             node w0 rank 0\nnode x1 rank 1\nnode z1 rank 1\n\
             ray pw rank 0 from w0 tip x1\n\
             endless py rank 0 tips x1 z1\n",
        )
        .unwrap()
    }

    #[test]
    fn fig2_has_two_zero_sections() {
        let g = fig2();
        let secs = sections(&g, 0).unwrap();
        assert_eq!(secs.len(), 2);
        for s in &secs {
            assert_eq!(s.gadgets.len(), 1);
            assert_eq!(s.bordering.len(), 2);
            assert!(!s.end);
        }
        // both x1 and y1 border both sections
        assert_eq!(boundary_nodes(&g).unwrap().len(), 2);
        // and the single 1-section holds everything
        let top = sections(&g, 1).unwrap();
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].internal.len(), 2);
    }

    #[test]
    fn fig5_sections_and_spectrum() {
        let g = fig5();
        assert!(g.pristine_check().all);
        let secs = sections(&g, 0).unwrap();
        assert_eq!(secs.len(), 2);
        let w = secs.iter().find(|s| s.bordering.len() == 1).unwrap();
        assert!(w.end);
        assert_eq!(boundary_nodes(&g).unwrap(), [g.node_ix("x1").unwrap()]);
        let rep = spectrum_check(&g).unwrap();
        assert!(rep.pass, "{:?}", rep.failures);
        assert_eq!(rep.m, 1);
        assert_eq!(rep.spectrum, [2, 3]);
    }

    #[test]
    fn fig2_spectrum_precondition_fails() {
        // the ray's finite end makes x1 nonpristine
        assert!(matches!(spectrum_check(&fig2()), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn fig5_length_multiples_and_section_distances() {
        let g = fig5();
        let chk = path_length_multiple_check(&g).unwrap();
        assert!(chk.pass, "{:?}", chk.failures);
        assert!(chk.checked >= 1);
        // bordering pair of the y-section at exactly w*2
        assert_eq!(distance(&g, "x1", "z1").unwrap(), "w*2".parse().unwrap());
    }

    #[test]
    fn single_finite_graph_is_one_section() {
        let g = parse("graph g rank 0\nnode a rank 0\nnode b rank 0\nbranch c a b\n").unwrap();
        let secs = sections(&g, 0).unwrap();
        assert_eq!(secs.len(), 1);
        assert_eq!(secs[0].internal.len(), 2);
        assert!(secs[0].bordering.is_empty());
    }
}
