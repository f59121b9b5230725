//! Eccentricities, radius, diameter, center, periphery.
//!
//! The metrizable set contains every named node and every gadget-interior
//! family member. Node eccentricities are exact rank suprema over named
//! distances and symbolic family distances. Family eccentricities are
//! recovered by probing members at small indices and deep in the tail:
//! beyond the graph's finite content bound every distance branch is already
//! in its final affine regime, so three consecutive deep samples pin the
//! tail down exactly and the small samples confirm it globally.

use crate::error::Result;
use crate::geodesic::{
    distances_from, family_branches_from_exhaust, segment_interior_sup, Exhaust,
};
use crate::graph::{
    expand_probe, finite_content_bound, Family, FamilyKind, GadgetKind, Graph, Probe,
};
use crate::ordinal::{family_sup, rank_sup, AffineFamilyBranch, Ordinal, Rank};

/// Eccentricity of one member of the metrizable set, with the entity
/// (node or family) at which the supremum is attained or approached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeEcc {
    pub id: String,
    pub ecc: Rank,
    pub witness: String,
}

/// Symbolic eccentricity of an interior family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyEcc {
    /// every member has this eccentricity
    Constant(Rank),
    /// member k has eccentricity base + step*k
    Affine { base: Ordinal, step: Ordinal },
    /// finite family or non-affine profile: only the extremes are reported
    Mixed { min: Rank, sup: Rank },
}

impl FamilyEcc {
    /// Least eccentricity over the family (members are indexed from 1).
    pub fn min(&self) -> Rank {
        match self {
            FamilyEcc::Constant(r) => r.clone(),
            FamilyEcc::Affine { base, step } => Rank::ord(base.nat_sum(step)),
            FamilyEcc::Mixed { min, .. } => min.clone(),
        }
    }

    /// Supremum of eccentricities over the family.
    pub fn sup(&self) -> Rank {
        match self {
            FamilyEcc::Constant(r) => r.clone(),
            FamilyEcc::Affine { base, step } => {
                AffineFamilyBranch::increasing(base.clone(), step.clone())
                    .expect("validated step")
                    .sup()
            }
            FamilyEcc::Mixed { sup, .. } => sup.clone(),
        }
    }
}

impl std::fmt::Display for FamilyEcc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilyEcc::Constant(r) => write!(f, "const {}", r),
            FamilyEcc::Affine { base, step } => write!(f, "affine {} + {}*k", base, step),
            FamilyEcc::Mixed { min, sup } => write!(f, "mixed min {} sup {}", min, sup),
        }
    }
}

/// Full eccentricity table plus the derived extremal sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EccReport {
    pub nodes: Vec<NodeEcc>,
    pub families: Vec<(String, FamilyEcc)>,
    pub radius: Rank,
    pub diameter: Rank,
    pub center: Vec<String>,
    pub periphery: Vec<String>,
}

fn ecc_parts(g: &Graph, ex: &Exhaust) -> Vec<(String, Rank)> {
    let mut parts = Vec::new();
    for (i, n) in g.nodes.iter().enumerate() {
        let d = ex.dist[i].clone().expect("graph is connected");
        parts.push((n.id.clone(), Rank::ord(d)));
    }
    for fam in g.families() {
        match fam.kind {
            FamilyKind::SegmentInterior => {
                if let Some(sup) = segment_interior_sup(g, &fam, ex) {
                    parts.push((fam.id.clone(), Rank::ord(sup)));
                }
            }
            _ => {
                let branches = family_branches_from_exhaust(g, &fam, ex);
                assert!(!branches.is_empty(), "connected graph reaches every family");
                parts.push((fam.id.clone(), family_sup(&branches)));
            }
        }
    }
    parts
}

/// Eccentricity of a named node: the rank supremum of its distances to
/// every member of the metrizable set, with a witness entity.
pub fn eccentricity(g: &Graph, x: &str) -> Result<(Rank, String)> {
    let (_, ex) = distances_from(g, x)?;
    let parts = ecc_parts(g, &ex);
    let best = parts.iter().max_by(|a, b| a.1.cmp(&b.1)).expect("nonempty metrizable set");
    // first achiever in the stable node-then-family order is the witness
    let witness = parts.iter().find(|p| p.1 == best.1).unwrap();
    Ok((witness.1.clone(), witness.0.clone()))
}

fn probe_name(g: &Graph) -> String {
    let mut name = "probe".to_string();
    while g.nodes.iter().any(|n| n.id == name) || g.gadgets.iter().any(|x| x.id == name) {
        name.push('x');
    }
    name
}

/// Eccentricity of family member `index`, computed exactly by naming it.
pub fn member_eccentricity(g: &Graph, fam: &Family, index: u64) -> Result<Rank> {
    let rail = match fam.kind {
        FamilyKind::LadderRail(side) => Some(side),
        _ => None,
    };
    let name = probe_name(g);
    let probed = expand_probe(
        g,
        &Probe { gadget: g.gadgets[fam.gadget].id.clone(), rail, index, name: name.clone() },
    )?;
    Ok(eccentricity(&probed, &name)?.0)
}

fn fit_family(samples: &[(u64, Rank)]) -> FamilyEcc {
    let first = &samples[0].1;
    if samples.iter().all(|(_, r)| r == first) {
        return FamilyEcc::Constant(first.clone());
    }
    // try an affine fit through the three deepest samples
    let n = samples.len();
    let tail = &samples[n - 3..];
    let affine = (|| -> Option<(Ordinal, Ordinal)> {
        let mut ords = Vec::new();
        for (k, r) in samples {
            match r {
                Rank::Ord(o) => ords.push((*k, o.clone())),
                Rank::Arrow(_) => return None,
            }
        }
        let t = &ords[n - 3..];
        let step = t[1].1.nat_diff(&t[0].1).ok()?;
        if t[2].1.nat_diff(&t[1].1).ok()? != step || step.terms().len() != 1 {
            return None;
        }
        let base = t[0].1.nat_diff(&step.nat_mul(t[0].0)).ok()?;
        for (k, o) in &ords {
            if *o != base.nat_sum(&step.nat_mul(*k)) {
                return None;
            }
        }
        Some((base, step))
    })();
    if let Some((base, step)) = affine {
        return FamilyEcc::Affine { base, step };
    }
    let ranks: Vec<Rank> = samples.iter().map(|(_, r)| r.clone()).collect();
    let min = ranks.iter().min().cloned().unwrap();
    // deep samples settle the sup: a constant tail is attained, an affine
    // tail approaches its branch supremum
    let sup = if tail.iter().all(|(_, r)| r == &tail[0].1) {
        rank_sup(&ranks)
    } else if let (Rank::Ord(a), Rank::Ord(b)) = (&tail[0].1, &tail[1].1) {
        match b.nat_diff(a) {
            Ok(step) if step.terms().len() == 1 => {
                let branch_sup = AffineFamilyBranch::increasing(a.clone(), step)
                    .map(|br| br.sup())
                    .unwrap_or_else(|_| rank_sup(&ranks));
                rank_sup(&[branch_sup, rank_sup(&ranks)])
            }
            _ => rank_sup(&ranks),
        }
    } else {
        rank_sup(&ranks)
    };
    FamilyEcc::Mixed { min, sup }
}

fn family_sample_indices(g: &Graph, fam: &Family, deep: bool) -> Vec<u64> {
    match &g.gadgets[fam.gadget].kind {
        GadgetKind::Segment { count, .. } => {
            let c = *count;
            let mut v: Vec<u64> = if c <= 9 {
                (1..c).collect()
            } else {
                vec![1, 2, 3, c / 2, c - 3, c - 2, c - 1]
            };
            v.dedup();
            v
        }
        GadgetKind::Endless { .. } => vec![1], // origin-free: one member stands for all
        _ => {
            let b = finite_content_bound(g);
            let mut v = if deep { vec![1, 2, 3, b, b + 1, b + 2] } else { vec![1, 2, b, b + 1, b + 2] };
            v.sort_unstable();
            v.dedup();
            v
        }
    }
}

/// Symbolic eccentricity of an interior family, from exact member probes.
pub fn family_eccentricity(g: &Graph, family: &str) -> Result<FamilyEcc> {
    family_eccentricity_inner(g, family, true)
}

/// Same with fewer shallow probes; used by bulk property suites.
pub fn family_eccentricity_fast(g: &Graph, family: &str) -> Result<FamilyEcc> {
    family_eccentricity_inner(g, family, false)
}

fn family_eccentricity_inner(g: &Graph, family: &str, deep: bool) -> Result<FamilyEcc> {
    let fams = g.families();
    let fam = fams[g.family_ix(family)?].clone();
    let indices = family_sample_indices(g, &fam, deep);
    let mut samples = Vec::new();
    for k in indices {
        samples.push((k, member_eccentricity(g, &fam, k)?));
    }
    if matches!(fam.kind, FamilyKind::EndlessInterior) {
        // members are pairwise isomorphic under reparametrization
        return Ok(FamilyEcc::Constant(samples[0].1.clone()));
    }
    Ok(fit_family(&samples))
}

fn report_inner(g: &Graph, deep: bool) -> Result<EccReport> {
    let mut nodes = Vec::new();
    for n in &g.nodes {
        let (ecc, witness) = eccentricity(g, &n.id)?;
        nodes.push(NodeEcc { id: n.id.clone(), ecc, witness });
    }
    let mut families = Vec::new();
    for fam in g.families() {
        families.push((fam.id.clone(), family_eccentricity_inner(g, &fam.id, deep)?));
    }
    let mut mins: Vec<Rank> = nodes.iter().map(|n| n.ecc.clone()).collect();
    mins.extend(families.iter().map(|(_, f)| f.min()));
    let radius = mins.iter().min().cloned().expect("nonempty graph");
    let mut sups: Vec<Rank> = nodes.iter().map(|n| n.ecc.clone()).collect();
    sups.extend(families.iter().map(|(_, f)| f.sup()));
    let diameter = rank_sup(&sups);

    let mut center: Vec<String> = nodes
        .iter()
        .filter(|n| n.ecc == radius)
        .map(|n| n.id.clone())
        .collect();
    center.extend(
        families
            .iter()
            .filter(|(_, f)| matches!(f, FamilyEcc::Constant(r) if *r == radius))
            .map(|(id, _)| id.clone()),
    );
    if center.is_empty() {
        // the minimum is an affine family's first member: name it explicitly
        for (id, f) in &families {
            if f.min() == radius {
                center.push(format!("{}(1)", id.trim_end_matches("[*]")));
            }
        }
    }

    let mut periphery: Vec<String> = nodes
        .iter()
        .filter(|n| n.ecc == diameter)
        .map(|n| n.id.clone())
        .collect();
    periphery.extend(
        families
            .iter()
            .filter(|(_, f)| matches!(f, FamilyEcc::Constant(r) if *r == diameter))
            .map(|(id, _)| id.clone()),
    );

    Ok(EccReport { nodes, families, radius, diameter, center, periphery })
}

/// The full eccentricity table plus radius, diameter, center and periphery.
pub fn ecc_report(g: &Graph) -> Result<EccReport> {
    report_inner(g, true)
}

/// Report with fewer probes per family; used by bulk property suites.
pub fn ecc_report_fast(g: &Graph) -> Result<EccReport> {
    report_inner(g, false)
}

pub fn radius(g: &Graph) -> Result<Rank> {
    Ok(ecc_report(g)?.radius)
}

pub fn diameter(g: &Graph) -> Result<Rank> {
    Ok(ecc_report(g)?.diameter)
}

pub fn center(g: &Graph) -> Result<Vec<String>> {
    Ok(ecc_report(g)?.center)
}

pub fn periphery(g: &Graph) -> Result<Vec<String>> {
    Ok(ecc_report(g)?.periphery)
}

/// Verdict of the radius/diameter doubling bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadiusDiameterCheck {
    pub pass: bool,
    pub radius: Rank,
    pub diameter: Rank,
    /// upper bound actually used: rad (+) rad, or lambda (+) lambda when the
    /// radius is the arrow just below the limit lambda
    pub bound: Ordinal,
}

/// Checks rad <= diam <= rad+rad (ordinal radius) or
/// rad <= diam <= lambda+lambda (arrow radius, lambda its limit).
pub fn check_radius_diameter(g: &Graph) -> Result<RadiusDiameterCheck> {
    check_radius_diameter_of(ecc_report(g)?)
}

pub fn check_radius_diameter_of(report: EccReport) -> Result<RadiusDiameterCheck> {
    let radius = report.radius;
    let diameter = report.diameter;
    let v = radius.limit_or_value();
    let bound = v.nat_sum(v);
    let pass = radius <= diameter && diameter <= Rank::ord(bound.clone());
    Ok(RadiusDiameterCheck { pass, radius, diameter, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    fn r(s: &str) -> Rank {
        s.parse().unwrap()
    }

    fn fig1() -> Graph {
        parse(
            "graph fig1 rank 1\n\
             node x1 rank 0\nnode x2 rank 0\n\
             node xa rank 1\nnode xb rank 1\n\
             node ya rank 0\nnode yb rank 0\n\
             ladder L base x1 x2 tips xa xb\n\
             branch d xa ya\n\
             branch e xb yb\n",
        )
        .unwrap()
    }

    fn fig2() -> Graph {
        parse(
            "graph fig2 rank 1\n\
             node x1 rank 1\nnode y1 rank 1\n\
             ray pa rank 0 from x1 tip y1\n\
             endless pb rank 0 tips x1 y1\n",
        )
        .unwrap()
    }

    #[test]
    fn fig1_eccentricity_table() {
        let g = fig1();
        assert_eq!(eccentricity(&g, "x1").unwrap().0, r("w + 1"));
        assert_eq!(eccentricity(&g, "x2").unwrap().0, r("w + 1"));
        assert_eq!(eccentricity(&g, "xa").unwrap().0, r("w*2 + 1"));
        assert_eq!(eccentricity(&g, "xb").unwrap().0, r("w*2 + 1"));
        assert_eq!(eccentricity(&g, "ya").unwrap().0, r("w*2 + 2"));
        assert_eq!(eccentricity(&g, "yb").unwrap().0, r("w*2 + 2"));
    }

    #[test]
    fn fig1_report() {
        let rep = ecc_report(&fig1()).unwrap();
        assert_eq!(rep.radius, r("w + 1"));
        assert_eq!(rep.diameter, r("w*2 + 2"));
        assert_eq!(rep.center, ["x1", "x2", "L.a[*]", "L.b[*]"]);
        assert_eq!(rep.periphery, ["ya", "yb"]);
        for fam in ["L.a[*]", "L.b[*]"] {
            let f = rep.families.iter().find(|(id, _)| id == fam).unwrap();
            assert_eq!(f.1, FamilyEcc::Constant(r("w + 1")));
        }
        let chk = check_radius_diameter_of(rep).unwrap();
        assert!(chk.pass);
        assert_eq!(chk.bound, o("w*2 + 2"));
    }

    #[test]
    fn fig2_report() {
        let rep = ecc_report(&fig2()).unwrap();
        assert_eq!(rep.radius, r("w"));
        assert_eq!(rep.diameter, r("arrow(w*2)"));
        assert_eq!(rep.center, ["x1", "y1"]);
        assert_eq!(rep.periphery, ["pb[*]"]);
        let pa = rep.families.iter().find(|(id, _)| id == "pa[*]").unwrap();
        assert_eq!(pa.1, FamilyEcc::Affine { base: o("w"), step: o("1") });
        let pb = rep.families.iter().find(|(id, _)| id == "pb[*]").unwrap();
        assert_eq!(pb.1, FamilyEcc::Constant(r("arrow(w*2)")));
        assert!(check_radius_diameter_of(rep).unwrap().pass);
    }

    #[test]
    fn open_ray_is_all_arrows() {
        // a single ray with an open tip: every eccentricity is the arrow
        // below w, and naming the tip collapses everything to ordinals
        let g = parse("graph g rank 1\nnode a rank 0\nray p rank 0 from a tip open\n").unwrap();
        assert_eq!(eccentricity(&g, "a").unwrap().0, r("arrow(w)"));
        let rep = ecc_report(&g).unwrap();
        assert_eq!(rep.radius, r("arrow(w)"));
        assert_eq!(rep.diameter, r("arrow(w)"));
        assert_eq!(rep.center, ["a", "p[*]"]);
        assert_eq!(rep.periphery, ["a", "p[*]"]);

        let h = parse("graph h rank 1\nnode a rank 0\nnode t rank 1\nray p rank 0 from a tip t\n")
            .unwrap();
        let rep = ecc_report(&h).unwrap();
        assert_eq!(rep.radius, r("w"));
        assert_eq!(rep.diameter, r("w"));
        assert_eq!(rep.center, ["a", "t", "p[*]"]);
        assert_eq!(rep.periphery, ["a", "t", "p[*]"]);
    }

    #[test]
    fn segment_interior_family_is_mixed() {
        let g = parse(
            "graph g rank 0\nnode a rank 0\nnode b rank 0\nsegment s rank 0 count 4 a b\n",
        )
        .unwrap();
        let rep = ecc_report(&g).unwrap();
        // members at 1,2,3 on a 4-link segment: ecc 3,2,3
        let f = rep.families.iter().find(|(id, _)| id == "s[*]").unwrap();
        assert_eq!(f.1, FamilyEcc::Mixed { min: r("2"), sup: r("3") });
        assert_eq!(rep.radius, r("2"));
        assert_eq!(rep.diameter, r("4"));
        assert_eq!(rep.periphery, ["a", "b"]);
    }
}
