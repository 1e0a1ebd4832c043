#![allow(dead_code)]

use std::collections::BTreeSet;

use dodagx::{generate, Graph, TopologySpec, VertexId};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_tree(n: usize, seed: u64) -> Graph {
    generate(&TopologySpec::RandomTree { n, seed }).unwrap()
}

/// G(n, 1/2) from a seed.
pub fn random_graph(n: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(0.5) {
                g.add_edge(u, v).unwrap();
            }
        }
    }
    g
}

/// Graph on `n` vertices whose edges are the set bits of `mask` over the
/// pairs `(u, v)`, `u < v`, in lexicographic order.
pub fn graph_from_mask(n: usize, mask: u64) -> Graph {
    let mut g = Graph::new(n);
    let mut bit = 0;
    for u in 0..n {
        for v in u + 1..n {
            if mask >> bit & 1 == 1 {
                g.add_edge(u, v).unwrap();
            }
            bit += 1;
        }
    }
    g
}

pub fn random_triplets(n: usize, count: usize, seed: u64) -> Vec<[VertexId; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v = sample(&mut rng, n, 3).into_vec();
            [v[0], v[1], v[2]]
        })
        .collect()
}

/// Vertices of the tree path between `a` and `b`.
pub fn path_set(g: &Graph, a: VertexId, b: VertexId) -> BTreeSet<VertexId> {
    g.shortest_path(a, b).unwrap().vertices().iter().copied().collect()
}

pub fn leaves(g: &Graph) -> Vec<VertexId> {
    g.active_vertices().filter(|&v| g.degree(v) == 1).collect()
}

/// All simple paths from `a` to `b` (small graphs only).
pub fn all_simple_paths(g: &Graph, a: VertexId, b: VertexId) -> Vec<Vec<VertexId>> {
    fn walk(g: &Graph, b: VertexId, cur: &mut Vec<VertexId>, out: &mut Vec<Vec<VertexId>>) {
        let last = *cur.last().unwrap();
        if last == b {
            out.push(cur.clone());
            return;
        }
        let next: Vec<VertexId> = g.neighbors(last).filter(|v| !cur.contains(v)).collect();
        for v in next {
            cur.push(v);
            walk(g, b, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    walk(g, b, &mut vec![a], &mut out);
    out
}
