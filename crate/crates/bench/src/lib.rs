//! Fixed workloads shared by the criterion benchmarks.

use dodagx::{build_dodag, generate, select_root, DodagTree, Graph, TopologySpec};

/// A square grid together with its minimum-eccentricity DODAG.
pub fn grid_with_dodag(side: usize) -> (Graph, DodagTree) {
    let g = generate(&TopologySpec::Grid { rows: side, cols: side }).expect("valid grid");
    let t = build_dodag(&g, select_root(&g).expect("connected")).expect("connected");
    (g, t)
}

/// The first `count` party triplets of `n` vertices in lexicographic order.
pub fn triplets(n: usize, count: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(count);
    'outer: for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if out.len() == count {
                    break 'outer;
                }
                out.push([a, b, c]);
            }
        }
    }
    out
}
