//! Deterministic random graph generation for the property suites.
//!
//! Two profiles: `pristine` graphs satisfy the section-spectrum
//! preconditions (every top-rank node touched only by tips of rank nu-1),
//! and `cycle_free` graphs additionally arrange their sections as spiders
//! hanging on a tree of boundary nodes, so the tree reduction applies.

use crate::error::Result;
use crate::graph::{build_graph, Decl, Graph};

/// splitmix64; tiny, well-known, and reproducible across platforms.
#[derive(Debug, Clone)]
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in 0..n.
    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n.max(1)
    }

    /// Uniform in lo..=hi.
    pub fn range(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.below(hi - lo + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// connected rank-1 graph, all 1-nodes pristine, cycles allowed
    Pristine,
    /// pristine and cycle-free: spider sections on a tree of 1-nodes
    CycleFree,
}

impl std::str::FromStr for Profile {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pristine" => Ok(Profile::Pristine),
            "cycle_free" | "cycle-free" => Ok(Profile::CycleFree),
            other => Err(crate::error::Error::Parse(format!("unknown profile {}", other))),
        }
    }
}

/// Builds a random valid graph; equal seeds give equal graphs.
pub fn gen_random(seed: u64, profile: Profile) -> Result<Graph> {
    let mut rng = Rng::new(seed ^ 0xa076_1d64_78bd_642f);
    match profile {
        Profile::Pristine => gen_pristine(&mut rng, seed),
        Profile::CycleFree => gen_cycle_free(&mut rng, seed),
    }
}

fn gen_pristine(rng: &mut Rng, seed: u64) -> Result<Graph> {
    let k = rng.range(1, 4) as usize; // 1-nodes
    let mut decls = vec![Decl::Graph { id: format!("rnd{}", seed), rank: 1 }];
    let names: Vec<String> = (0..k).map(|i| format!("x{}", i + 1)).collect();
    for n in &names {
        decls.push(Decl::Node { id: n.clone(), rank: 1 });
    }
    let mut gi = 0;
    let mut endless = |decls: &mut Vec<Decl>, a: &str, b: &str| {
        gi += 1;
        decls.push(Decl::Endless {
            id: format!("e{}", gi),
            rank: 0,
            a: Some(a.to_string()),
            b: Some(b.to_string()),
        });
    };
    // random spanning tree keeps the graph connected
    for i in 1..k {
        let j = rng.below(i as u64) as usize;
        endless(&mut decls, &names[i], &names[j]);
    }
    // extra edges may close cycles or form loops
    for _ in 0..rng.below(3) {
        let a = rng.below(k as u64) as usize;
        let b = rng.below(k as u64) as usize;
        endless(&mut decls, &names[a], &names[b]);
    }
    // terminal rays from fresh 0-node bases
    let rays = if k == 1 && gi == 0 { rng.range(1, 3) } else { rng.below(3) };
    for r in 0..rays {
        let base = format!("a{}", r + 1);
        decls.push(Decl::Node { id: base.clone(), rank: 0 });
        let t = rng.below(k as u64) as usize;
        decls.push(Decl::Ray {
            id: format!("r{}", r + 1),
            rank: 0,
            from: base,
            tip: Some(names[t].clone()),
        });
    }
    build_graph(&decls)
}

fn gen_cycle_free(rng: &mut Rng, seed: u64) -> Result<Graph> {
    let b = rng.range(1, 3) as usize; // boundary candidates
    let mut decls = vec![Decl::Graph { id: format!("rnd{}", seed), rank: 1 }];
    let names: Vec<String> = (0..b).map(|i| format!("b{}", i + 1)).collect();
    for n in &names {
        decls.push(Decl::Node { id: n.clone(), rank: 1 });
    }
    let mut spiders = 0usize;
    let mut extras = 0usize;
    // one spider section per tree edge, with optional pendant 1-nodes
    let mut spider = |decls: &mut Vec<Decl>, rng: &mut Rng, attach: &[String]| {
        spiders += 1;
        let hub = format!("s{}", spiders);
        decls.push(Decl::Node { id: hub.clone(), rank: 0 });
        let mut leg = 0usize;
        for node in attach {
            leg += 1;
            decls.push(Decl::Ray {
                id: format!("r{}_{}", spiders, leg),
                rank: 0,
                from: hub.clone(),
                tip: Some(node.clone()),
            });
        }
        for _ in 0..rng.below(2) {
            extras += 1;
            leg += 1;
            let c = format!("c{}", extras);
            decls.push(Decl::Node { id: c.clone(), rank: 1 });
            decls.push(Decl::Ray {
                id: format!("r{}_{}", spiders, leg),
                rank: 0,
                from: hub.clone(),
                tip: Some(c),
            });
        }
    };
    for i in 1..b {
        let j = rng.below(i as u64) as usize;
        spider(&mut decls, rng, &[names[i].clone(), names[j].clone()]);
    }
    // pendant end sections: spiders touching a single existing 1-node
    let pendants = if b == 1 { rng.range(1, 3) } else { rng.below(3) };
    for _ in 0..pendants {
        let t = rng.below(b as u64) as usize;
        spider(&mut decls, rng, &[names[t].clone()]);
    }
    build_graph(&decls)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_valid() {
        for seed in 0..50 {
            let a = gen_random(seed, Profile::Pristine).unwrap();
            let b = gen_random(seed, Profile::Pristine).unwrap();
            assert_eq!(a, b);
            assert!(a.pristine_check().all, "seed {}", seed);
        }
    }

    #[test]
    fn cycle_free_profile_is_cycle_free() {
        for seed in 0..50 {
            let g = gen_random(seed, Profile::CycleFree).unwrap();
            assert!(g.pristine_check().all, "seed {}", seed);
            let (free, w) = crate::tree::is_cycle_free(&g).unwrap();
            assert!(free, "seed {} witness {:?}", seed, w);
        }
    }
}
