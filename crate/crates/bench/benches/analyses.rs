//! Benchmarks over the representative analyses: exact distance on the
//! ladder graph, a full eccentricity report, block decomposition, and the
//! tree reduction on generated cycle-free instances.

use criterion::{criterion_group, criterion_main, Criterion};

use ordgraph::blocks::blocks;
use ordgraph::eccentricity::ecc_report_fast;
use ordgraph::gen::{gen_random, Profile};
use ordgraph::geodesic::distance;
use ordgraph::graph::{parse, Graph};
use ordgraph::tree::reduce_to_tree;

fn ladder() -> Graph {
    parse(
        "graph fig1 rank 1\n\
         node x1 rank 0\nnode x2 rank 0\n\
         node xa rank 1\nnode xb rank 1\n\
         node ya rank 0\nnode yb rank 0\n\
         ladder L base x1 x2 tips xa xb\n\
         branch d xa ya\nbranch e xb yb\n",
    )
    .unwrap()
}

fn cycle() -> Graph {
    parse(
        "graph fig6 rank 1\n\
         node v rank 1\nnode w rank 1\nnode x rank 1\nnode y rank 1\nnode z rank 1\n\
         endless P1 rank 0 tips v w\nendless P2 rank 0 tips w x\n\
         endless P3 rank 0 tips x y\nendless P4 rank 0 tips y z\n\
         endless P5 rank 0 tips z w\n",
    )
    .unwrap()
}

fn bench(c: &mut Criterion) {
    let g = ladder();
    c.bench_function("distance ladder ya-yb", |b| {
        b.iter(|| distance(&g, "ya", "yb").unwrap())
    });
    let g6 = cycle();
    c.bench_function("ecc report cycle graph", |b| {
        b.iter(|| ecc_report_fast(&g6).unwrap())
    });
    c.bench_function("blocks cycle graph", |b| b.iter(|| blocks(&g6).unwrap()));
    let gens: Vec<Graph> =
        (0..32).map(|s| gen_random(s, Profile::CycleFree).unwrap()).collect();
    c.bench_function("tree reduction x32 generated", |b| {
        b.iter(|| {
            for g in &gens {
                reduce_to_tree(g).unwrap();
            }
        })
    });
}

criterion_group!(benches, bench);
criterion_main!(benches);
