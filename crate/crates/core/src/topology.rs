//! Seeded generators for the benchmarked network families.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dodag::{build_dodag, select_root};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Connectivity retries for small-world rewiring.
pub const MAX_GENERATION_ATTEMPTS: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum TopologySpec {
    /// Row-major ids, 4-neighbor lattice.
    Grid { rows: usize, cols: usize },
    /// Watts-Strogatz ring lattice with edge rewiring.
    SmallWorld { n: usize, k: usize, p: f64, seed: u64 },
    /// Center 0, leaves `1..n`.
    Star { n: usize },
    Ring { n: usize },
    /// Uniform labelled tree (Prüfer decoding).
    RandomTree { n: usize, seed: u64 },
}

impl TopologySpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            TopologySpec::Grid { rows, cols } if rows == 0 || cols == 0 => {
                bad(format!("grid needs rows, cols >= 1, got {rows}x{cols}"))
            }
            TopologySpec::SmallWorld { n, k, p, .. } => {
                if k < 2 || k >= n {
                    bad(format!("small-world needs 2 <= k < n, got k={k}, n={n}"))
                } else if !(0.0..=1.0).contains(&p) {
                    bad(format!("rewire probability {p} outside [0, 1]"))
                } else {
                    Ok(())
                }
            }
            TopologySpec::Star { n } if n < 2 => bad(format!("star needs n >= 2, got {n}")),
            TopologySpec::Ring { n } if n < 3 => bad(format!("ring needs n >= 3, got {n}")),
            TopologySpec::RandomTree { n: 0, .. } => bad("tree needs n >= 1".into()),
            _ => Ok(()),
        }
    }

    pub fn vertex_count(&self) -> usize {
        match *self {
            TopologySpec::Grid { rows, cols } => rows * cols,
            TopologySpec::SmallWorld { n, .. }
            | TopologySpec::Star { n }
            | TopologySpec::Ring { n }
            | TopologySpec::RandomTree { n, .. } => n,
        }
    }
}

pub fn generate(spec: &TopologySpec) -> Result<Graph> {
    spec.validate()?;
    match *spec {
        TopologySpec::Grid { rows, cols } => Ok(grid(rows, cols)),
        TopologySpec::SmallWorld { n, k, p, seed } => small_world(n, k, p, seed),
        TopologySpec::Star { n } => Graph::from_edges(n, (1..n).map(|v| (0, v))),
        TopologySpec::Ring { n } => Graph::from_edges(n, (0..n).map(|v| (v, (v + 1) % n))),
        TopologySpec::RandomTree { n, seed } => Ok(random_tree(n, seed)),
    }
}

fn grid(rows: usize, cols: usize) -> Graph {
    let mut g = Graph::new(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                g.add_edge(v, v + 1).expect("lattice edge");
            }
            if r + 1 < rows {
                g.add_edge(v, v + cols).expect("lattice edge");
            }
        }
    }
    g
}

/// Sub-seed for the `attempt`-th rewiring try.
fn attempt_seed(seed: u64, attempt: u32) -> u64 {
    seed.wrapping_add(u64::from(attempt).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn small_world(n: usize, k: usize, p: f64, seed: u64) -> Result<Graph> {
    for attempt in 0..MAX_GENERATION_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed(seed, attempt));
        let g = rewire_once(n, k, p, &mut rng);
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::GenerationFailed {
        attempts: MAX_GENERATION_ATTEMPTS,
    })
}

/// One Watts-Strogatz draw: ring lattice with `k / 2` neighbors per side,
/// then each lattice edge `(u, u + j)` is, with probability `p`, moved to
/// `(u, w)` for a uniform `w` that creates neither a loop nor a duplicate.
fn rewire_once(n: usize, k: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let half = k / 2;
    let mut g = Graph::new(n);
    for j in 1..=half {
        for u in 0..n {
            g.add_edge(u, (u + j) % n).expect("ring lattice edge");
        }
    }
    if p == 0.0 {
        return g;
    }
    for j in 1..=half {
        for u in 0..n {
            if rng.gen::<f64>() >= p {
                continue;
            }
            let v = (u + j) % n;
            // Edges already moved away leave nothing to rewire.
            if !g.has_edge(u, v) {
                continue;
            }
            let candidates: Vec<usize> = (0..n).filter(|&w| w != u && !g.has_edge(u, w)).collect();
            if let Some(&w) = candidates.choose(rng) {
                g.remove_edge(u, v).expect("active");
                g.add_edge(u, w).expect("active, distinct");
            }
        }
    }
    g
}

fn random_tree(n: usize, seed: u64) -> Graph {
    let mut g = Graph::new(n);
    if n < 2 {
        return g;
    }
    if n == 2 {
        g.add_edge(0, 1).expect("distinct");
        return g;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prufer: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &x in &prufer {
        degree[x] += 1;
    }
    for &x in &prufer {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf always exists");
        g.add_edge(leaf, x).expect("distinct");
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    g.add_edge(rest[0], rest[1]).expect("two leaves remain");
    g
}

/// Which family [`dodag_depth_scaling`] sweeps over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DepthFamily {
    /// `size` x `size` grids.
    SquareGrid,
    /// `1` x `size` grids.
    LineGrid,
    SmallWorld { k: usize, p: f64, seed: u64 },
}

/// `(vertex count, DODAG depth)` per size, with the root chosen by minimum
/// eccentricity.
pub fn dodag_depth_scaling(family: DepthFamily, sizes: &[usize]) -> Result<Vec<(usize, usize)>> {
    sizes
        .iter()
        .map(|&size| {
            let spec = match family {
                DepthFamily::SquareGrid => TopologySpec::Grid { rows: size, cols: size },
                DepthFamily::LineGrid => TopologySpec::Grid { rows: 1, cols: size },
                DepthFamily::SmallWorld { k, p, seed } => TopologySpec::SmallWorld { n: size, k, p, seed },
            };
            let g = generate(&spec)?;
            let tree = build_dodag(&g, select_root(&g)?)?;
            Ok((g.active_count(), tree.depth()))
        })
        .collect()
}
