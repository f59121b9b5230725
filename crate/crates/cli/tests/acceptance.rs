//! Acceptance gate: twelve criteria, each a single test that prints one
//! pass line. Criteria 1-11 pin exact ordinal values on the fixture graphs;
//! criterion 12 runs the seeded property suites (1000 instances each).

use std::collections::BTreeSet;

use ordgraph::blocks::{blocks, blocks_by_intersection, center_block_check};
use ordgraph::eccentricity::{
    check_radius_diameter, ecc_report, ecc_report_fast, FamilyEcc,
};
use ordgraph::gen::{gen_random, Profile, Rng};
use ordgraph::geodesic::{distance, distances_from, oracle_min_length};
use ordgraph::graph::{parse, Graph};
use ordgraph::length::{path_length, Item, PathDesc, PathNode, PathStep, Traversal};
use ordgraph::sections::{path_length_multiple_check, sections, spectrum_check};
use ordgraph::tree::{build_h, classify_center, correspondence_check, reduce_to_tree};
use ordgraph::{Exp, Ordinal, Rank};

fn fixture(name: &str) -> Graph {
    let path = format!("{}/fixtures/{}.tg", env!("CARGO_MANIFEST_DIR"), name);
    parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn o(s: &str) -> Ordinal {
    s.parse().unwrap()
}

fn r(s: &str) -> Rank {
    s.parse().unwrap()
}

fn node_ecc(rep: &ordgraph::eccentricity::EccReport, id: &str) -> Rank {
    rep.nodes.iter().find(|n| n.id == id).unwrap_or_else(|| panic!("no node {}", id)).ecc.clone()
}

fn fam_ecc<'a>(rep: &'a ordgraph::eccentricity::EccReport, id: &str) -> &'a FamilyEcc {
    rep.families
        .iter()
        .find(|(f, _)| f == id)
        .map(|(_, e)| e)
        .unwrap_or_else(|| panic!("no family {}", id))
}

#[test]
fn criterion_01_length_arithmetic() {
    // composite path of a rank-3 graph: one-ended 2-path, then a two-ended
    // 2-path holding an endless 1-path and a 4-branch 0-path, then an
    // endless 2-path
    let n = |id: &str, rank| PathNode { id: id.into(), rank };
    let s = |label: &str, items: Vec<Item>, breaks: Vec<u32>| PathStep {
        label: label.into(),
        traversal: Traversal::new(items, breaks),
    };
    let p = PathDesc {
        nodes: vec![n("x1", 2), n("x2", 3), n("x3", 3), n("x4", 3)],
        steps: vec![
            s("t1", vec![Item::Tip(2)], vec![]),
            s("t2", vec![Item::Tip(1), Item::Tip(1), Item::Branches(4)], vec![1, 2]),
            s("t3", vec![Item::Tip(2), Item::Tip(2)], vec![2]),
        ],
    };
    assert_eq!(path_length(&p).unwrap(), o("w^3*3 + w^2*2 + 4"));
    println!("criterion 1 (length arithmetic): pass");
}

#[test]
fn criterion_02_metric_table_fig1() {
    let g = fixture("fig1");
    for (a, b, want) in [
        ("x1", "x2", "1"),
        ("x1", "xa", "w"),
        ("x1", "xb", "w"),
        ("x1", "ya", "w + 1"),
        ("x1", "yb", "w + 1"),
        ("ya", "yb", "w*2 + 2"),
    ] {
        assert_eq!(distance(&g, a, b).unwrap(), o(want), "d({},{})", a, b);
    }
    // same values through the binary
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_ordgraph"))
        .args(["dist", "--from", "ya", "--to", "yb"])
        .arg(format!("{}/fixtures/fig1.tg", env!("CARGO_MANIFEST_DIR")))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "w*2 + 2");
    println!("criterion 2 (fig1 metric table): pass");
}

#[test]
fn criterion_03_open_ray() {
    let rep = ecc_report(&fixture("ex61")).unwrap();
    for n in &rep.nodes {
        assert_eq!(n.ecc, r("arrow(w)"));
    }
    assert_eq!(rep.radius, r("arrow(w)"));
    assert_eq!(rep.diameter, r("arrow(w)"));
    let all = ["a".to_string(), "p[*]".to_string()];
    assert_eq!(rep.center, all);
    assert_eq!(rep.periphery, all);
    // appending a 1-node at the extremity realizes the potential infinity
    let rep = ecc_report(&fixture("ex61b")).unwrap();
    assert_eq!(rep.radius, r("w"));
    assert_eq!(rep.diameter, r("w"));
    for n in &rep.nodes {
        assert_eq!(n.ecc, r("w"));
    }
    assert_eq!(fam_ecc(&rep, "p[*]"), &FamilyEcc::Constant(r("w")));
    println!("criterion 3 (open-extremity ray): pass");
}

#[test]
fn criterion_04_ladder_report() {
    let rep = ecc_report(&fixture("fig1")).unwrap();
    assert_eq!(node_ecc(&rep, "x1"), r("w + 1"));
    assert_eq!(node_ecc(&rep, "x2"), r("w + 1"));
    assert_eq!(fam_ecc(&rep, "L.a[*]"), &FamilyEcc::Constant(r("w + 1")));
    assert_eq!(fam_ecc(&rep, "L.b[*]"), &FamilyEcc::Constant(r("w + 1")));
    assert_eq!(node_ecc(&rep, "xa"), r("w*2 + 1"));
    assert_eq!(node_ecc(&rep, "xb"), r("w*2 + 1"));
    assert_eq!(node_ecc(&rep, "ya"), r("w*2 + 2"));
    assert_eq!(node_ecc(&rep, "yb"), r("w*2 + 2"));
    assert_eq!(rep.radius, r("w + 1"));
    assert_eq!(rep.diameter, r("w*2 + 2"));
    assert_eq!(rep.periphery, ["ya", "yb"]);
    println!("criterion 4 (ladder eccentricities): pass");
}

#[test]
fn criterion_05_shorted_ladder() {
    let rep = ecc_report(&fixture("ex63")).unwrap();
    for n in &rep.nodes {
        assert_eq!(n.ecc, r("w"), "{}", n.id);
    }
    for (id, e) in &rep.families {
        assert_eq!(e, &FamilyEcc::Constant(r("w")), "{}", id);
    }
    assert_eq!(rep.radius, r("w"));
    assert_eq!(rep.diameter, r("w"));
    let all = ["x1", "x2", "xa", "xb", "L.a[*]", "L.b[*]"];
    assert_eq!(rep.center, all);
    assert_eq!(rep.periphery, all);
    println!("criterion 5 (shorted ladder, all w): pass");
}

#[test]
fn criterion_06_one_loop() {
    let rep = ecc_report(&fixture("fig2")).unwrap();
    assert_eq!(node_ecc(&rep, "x1"), r("w"));
    assert_eq!(node_ecc(&rep, "y1"), r("w"));
    assert_eq!(
        fam_ecc(&rep, "pa[*]"),
        &FamilyEcc::Affine { base: o("w"), step: o("1") }
    );
    assert_eq!(fam_ecc(&rep, "pb[*]"), &FamilyEcc::Constant(r("arrow(w*2)")));
    assert_eq!(rep.radius, r("w"));
    assert_eq!(rep.diameter, r("arrow(w*2)"));
    assert_eq!(rep.center, ["x1", "y1"]);
    assert_eq!(rep.periphery, ["pb[*]"]);
    println!("criterion 6 (one-loop graph): pass");
}

#[test]
fn criterion_07_two_potential_infinities() {
    let rep = ecc_report(&fixture("fig3")).unwrap();
    assert_eq!(
        fam_ecc(&rep, "xr[*]"),
        &FamilyEcc::Affine { base: o("w*2"), step: o("1") }
    );
    assert_eq!(node_ecc(&rep, "y1"), r("w*2"));
    assert_eq!(fam_ecc(&rep, "z[*]"), &FamilyEcc::Constant(r("arrow(w*2)")));
    assert_eq!(node_ecc(&rep, "w1"), r("arrow(w*3)"));
    assert_eq!(rep.radius, r("arrow(w*2)"));
    assert_eq!(rep.diameter, r("arrow(w*3)"));
    assert_eq!(rep.center, ["z[*]"]);
    assert_eq!(rep.periphery, ["w1"]);
    println!("criterion 7 (two potential infinities): pass");
}

#[test]
fn criterion_08_spectrum_example() {
    let g = fixture("fig5");
    let rep = ecc_report(&g).unwrap();
    assert_eq!(fam_ecc(&rep, "pw[*]"), &FamilyEcc::Constant(r("w*3")));
    assert_eq!(node_ecc(&rep, "x1"), r("w*2"));
    assert_eq!(fam_ecc(&rep, "py[*]"), &FamilyEcc::Constant(r("w*2")));
    assert_eq!(node_ecc(&rep, "z1"), r("w*3"));
    let spec = spectrum_check(&g).unwrap();
    assert!(spec.pass, "{:?}", spec.failures);
    assert_eq!(spec.m, 1);
    assert_eq!(spec.spectrum, [2, 3]);
    println!("criterion 8 (spectrum example): pass");
}

#[test]
fn criterion_09_appended_stars() {
    let h = build_h(&fixture("fig6")).unwrap();
    let rep = ecc_report(&h).unwrap();
    for u in ["v", "w", "x", "y", "z"] {
        assert_eq!(node_ecc(&rep, u), r("w*6"), "{}", u);
    }
    assert_eq!(node_ecc(&rep, "p3"), r("w*8"));
    assert_eq!(node_ecc(&rep, "q3"), r("w*8"));
    assert_eq!(node_ecc(&rep, "p2"), r("w*10"));
    assert_eq!(node_ecc(&rep, "q2"), r("w*10"));
    assert_eq!(node_ecc(&rep, "p1"), r("w*12"));
    assert_eq!(node_ecc(&rep, "q1"), r("w*12"));
    assert_eq!(rep.center, ["v", "w", "x", "y", "z"]);
    assert_eq!(rep.periphery, ["p1", "q1"]);
    for (id, e) in &rep.families {
        if id.starts_with('P') {
            // interiors of the original graph
            assert!(e.sup() >= r("w*6 + 1") && e.sup() <= r("w*7"), "{}: {}", id, e);
        } else {
            // interiors of the appended paths sit strictly between
            assert!(e.sup() > r("w*6") && e.sup() < r("w*12"), "{}: {}", id, e);
        }
    }
    println!("criterion 9 (appended-star center): pass");
}

#[test]
fn criterion_10_blocks_fig6() {
    let g = fixture("fig6");
    let bs = blocks(&g).unwrap();
    assert_eq!(bs.blocks.len(), 2);
    let names = |ix: usize| -> (BTreeSet<String>, BTreeSet<String>) {
        (
            bs.blocks[ix].gadgets.iter().map(|&i| g.gadgets[i].id.clone()).collect(),
            bs.blocks[ix].nodes.iter().map(|&i| g.nodes[i].id.clone()).collect(),
        )
    };
    let (g0, n0) = names(0);
    let (g1, n1) = names(1);
    let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    assert_eq!(g0, set(&["P1"]));
    assert_eq!(n0, set(&["v", "w"]));
    assert_eq!(g1, set(&["P2", "P3", "P4", "P5"]));
    assert_eq!(n1, set(&["w", "x", "y", "z"]));
    let cuts: Vec<String> = bs.cut_nodes.iter().map(|&i| g.nodes[i].id.clone()).collect();
    assert_eq!(cuts, ["w"]);
    assert_eq!(sections(&g, 0).unwrap().len(), 5);
    println!("criterion 10 (two blocks, one cut node): pass");
}

#[test]
fn criterion_11_nonpristine_regression() {
    let g = fixture("fig7");
    let bs = blocks(&g).unwrap();
    assert_eq!(bs.blocks.len(), 3);
    let secs = sections(&g, 0).unwrap();
    assert_eq!(secs.len(), 2);
    // the two-branch section spans two blocks
    let branchy = secs
        .iter()
        .find(|s| s.gadgets.iter().any(|&i| g.gadgets[i].id == "b1"))
        .unwrap();
    let hosting: BTreeSet<usize> = branchy
        .gadgets
        .iter()
        .map(|gi| bs.blocks.iter().position(|b| b.gadgets.contains(gi)).unwrap())
        .collect();
    assert_eq!(hosting.len(), 2);
    println!("criterion 11 (nonpristine section spans two blocks): pass");
}

// ---- criterion 12: seeded property suites ----

const SUITE: u64 = 1000;

fn named_distances(g: &Graph) -> Vec<Vec<Ordinal>> {
    (0..g.nodes.len())
        .map(|i| {
            let (d, _) = distances_from(g, &g.nodes[i].id).unwrap();
            d.into_iter().map(|x| x.unwrap()).collect()
        })
        .collect()
}

#[test]
fn criterion_12_property_suites() {
    let omega = Ordinal::omega();

    // ordinal surrogate homomorphism on 1000 seeded CNF pairs
    let mut rng = Rng::new(0xdead_beef);
    for _ in 0..SUITE {
        let rand_ord = |rng: &mut Rng| {
            let n = rng.below(5);
            Ordinal::from_terms(
                (0..n).map(|_| (Exp::Nat(rng.below(9) as u32), rng.below(1 << 20) + 1)),
            )
        };
        let (a, b) = (rand_ord(&mut rng), rand_ord(&mut rng));
        let val = |x: &Ordinal| -> num_bigint::BigUint {
            x.terms().iter().fold(num_bigint::BigUint::from(0u32), |acc, &(e, c)| {
                let e = match e {
                    Exp::Nat(n) => n as u64,
                    Exp::Omega => unreachable!(),
                };
                acc + (num_bigint::BigUint::from(c) << (e * 40))
            })
        };
        assert_eq!(val(&a.nat_sum(&b)), val(&a) + val(&b));
        assert_eq!(a.cmp(&b), val(&a).cmp(&val(&b)));
    }

    // pristine suite: metric axioms, oracle agreement, eccentricity laws
    for seed in 0..SUITE {
        let g = gen_random(seed, Profile::Pristine).unwrap();
        let d = named_distances(&g);
        let n = g.nodes.len();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(d[i][j].is_zero(), i == j, "seed {}", seed);
                assert_eq!(d[i][j], d[j][i], "seed {}", seed);
                for k in 0..n {
                    assert!(
                        d[i][j] <= d[i][k].nat_sum(&d[k][j]),
                        "seed {} triangle {} {} {}",
                        seed,
                        i,
                        j,
                        k
                    );
                }
                // dual route: independent exhaustive path enumeration
                if i < j {
                    let byway =
                        oracle_min_length(&g, &g.nodes[i].id, &g.nodes[j].id, 200_000).unwrap();
                    assert_eq!(d[i][j], byway, "seed {} oracle", seed);
                }
            }
        }

        let rep = ecc_report_fast(&g).unwrap();

        // interior constancy: every family here lives in a section bordered
        // only through tips, so its eccentricity must be constant
        for (id, e) in &rep.families {
            assert!(matches!(e, FamilyEcc::Constant(_)), "seed {} family {}: {}", seed, id, e);
        }

        // radius <= diameter <= radius (+) radius, ordinal branch
        let chk = check_radius_diameter(&g).unwrap();
        assert!(chk.pass, "seed {}", seed);
        assert!(matches!(chk.radius, Rank::Ord(_)), "seed {}", seed);

        // spectrum laws: exact multiples, 1 <= p <= 2m+2, consecutive,
        // attained twice above the radius, offsets of lemmas 8.10/8.11
        let spec = spectrum_check(&g).unwrap();
        assert!(spec.pass, "seed {}: {:?}", seed, spec.failures);
        assert!(*spec.spectrum.last().unwrap() <= 2 * spec.m as u64 + 2, "seed {}", seed);

        // every simple two-ended path over k >= 1 tips has length w*k
        let mult = path_length_multiple_check(&g).unwrap();
        assert!(mult.pass, "seed {}: {:?}", seed, mult.failures);

        // bordering-vs-internal offsets within each section
        let secs = sections(&g, 0).unwrap();
        for s in &secs {
            for &x in &s.bordering {
                for &z in &s.internal {
                    // terminal-to-bordering geodesics cost exactly one tip
                    assert_eq!(d[x][z], omega, "seed {}", seed);
                    for (dxy, dzy) in d[x].iter().zip(&d[z]) {
                        assert!(
                            *dxy <= dzy.nat_sum(&omega) && *dzy <= dxy.nat_sum(&omega),
                            "seed {} one-tip bound",
                            seed
                        );
                    }
                }
                for &y in &s.bordering {
                    if x < y {
                        let dd = &d[x][y];
                        assert!(
                            *dd == omega || *dd == omega.nat_mul(2),
                            "seed {} bordering pair: {}",
                            seed,
                            dd
                        );
                    }
                }
            }
        }

        // blocks partition the gadget set and agree with the literal
        // removal-intersection construction
        let bs = blocks(&g).unwrap();
        let mut seen = vec![0usize; g.gadgets.len()];
        for b in &bs.blocks {
            for &gi in &b.gadgets {
                seen[gi] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1), "seed {} partition", seed);
        let literal = blocks_by_intersection(&g).unwrap();
        let ours: BTreeSet<Vec<usize>> =
            bs.blocks.iter().map(|b| b.gadgets.clone()).collect();
        let theirs: BTreeSet<Vec<usize>> = literal.into_iter().collect();
        assert_eq!(ours, theirs, "seed {} blocks", seed);

        // the center lies in one block
        let cb = center_block_check(&g).unwrap();
        assert!(cb.pass, "seed {} center {:?}", seed, cb.center);
    }

    // arrow branch of the radius/diameter bound
    for name in ["fig3", "ex61"] {
        let chk = check_radius_diameter(&fixture(name)).unwrap();
        assert!(chk.pass, "{}", name);
        assert!(matches!(chk.radius, Rank::Arrow(_)), "{}", name);
    }

    // cycle-free suite: tree reduction, correspondence, center form
    for seed in 0..SUITE {
        let g = gen_random(seed, Profile::CycleFree).unwrap();
        let t = reduce_to_tree(&g).unwrap();
        // a tree: one fewer edge than nodes, and within the size bound
        assert_eq!(t.edges.len() + 1, t.nodes.len(), "seed {}", seed);
        let secs = sections(&g, 0).unwrap();
        let m = secs.iter().flat_map(|s| s.boundary.iter()).collect::<BTreeSet<_>>().len();
        assert!(t.edges.len() <= 2 * (m + secs.len()), "seed {}", seed);

        let chk = correspondence_check(&g, &t).unwrap();
        assert!(chk.pass, "seed {}: {:?}", seed, chk.failures);

        let form = classify_center(&g).unwrap();
        assert!(matches!(form.tag(), 'a' | 'b' | 'c'), "seed {}", seed);
        // cross-module oracle: the classified members are the center the
        // eccentricity analysis reports
        let rep = ecc_report_fast(&g).unwrap();
        let direct: BTreeSet<String> = rep.center.iter().cloned().collect();
        let classified: BTreeSet<String> = form.members().into_iter().collect();
        assert_eq!(classified, direct, "seed {} form {}", seed, form.tag());
        // theorem 9.5 again, via the block test on the classified center
        let cb = center_block_check(&g).unwrap();
        assert!(cb.pass, "seed {}", seed);
    }

    println!("criterion 12 (seeded property suites x{}): pass", SUITE);
}
