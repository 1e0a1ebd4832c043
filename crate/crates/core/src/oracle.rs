//! Dense state-vector reference for graph states and Pauli measurements.
//!
//! Qubit `k` of a [`StateVector`] is the `k`-th active vertex of the source
//! graph in ascending id order, stored little-endian: qubit `k` is bit `k` of
//! the amplitude index. For a graph with every vertex active this is simply
//! "vertex `k` is bit `k`".

use std::collections::{BTreeSet, HashSet, VecDeque};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::measurement::Measurement;

pub const MAX_STATE_QUBITS: usize = 12;
pub const MAX_ORBIT_VERTICES: usize = 8;
pub const MAX_VERIFY_VERTICES: usize = 6;
/// Above this many remaining qubits the Clifford brute force gives way to
/// the stabilizer-group search.
pub const BRUTE_FORCE_QUBITS: usize = 4;

const NORM_TOL: f64 = 1e-10;
const MIN_PROBABILITY: f64 = 1e-12;
const OVERLAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    X,
    Z,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    vertices: Vec<VertexId>,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn qubit_count(&self) -> usize {
        self.vertices.len()
    }

    /// Vertex id carried by each qubit.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn qubit_of(&self, v: VertexId) -> Option<usize> {
        self.vertices.iter().position(|&u| u == v)
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `|<self|other>|`.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        inner(&self.amps, &other.amps).norm()
    }

    /// Applies the graph-state generator `X_v Z_{N_v}` of `g` at vertex `v`.
    pub fn apply_generator(&self, g: &Graph, v: VertexId) -> Result<StateVector> {
        g.check_active(v)?;
        let q = self.qubit_of(v).ok_or(Error::InactiveVertex(v))?;
        let mut zmask = 0usize;
        for u in g.neighbors(v) {
            zmask |= 1 << self.qubit_of(u).ok_or(Error::InactiveVertex(u))?;
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (x, &a) in self.amps.iter().enumerate() {
            let sign = if (x & zmask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[x ^ (1 << q)] = a * sign;
        }
        Ok(StateVector {
            vertices: self.vertices.clone(),
            amps: out,
        })
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `prod CZ_{u,v} |+>^n` over the edges of `g`.
pub fn build_graph_state(g: &Graph) -> Result<StateVector> {
    let vertices: Vec<VertexId> = g.active_vertices().collect();
    let n = vertices.len();
    if n > MAX_STATE_QUBITS {
        return Err(Error::Capacity {
            what: "state-vector qubits",
            limit: MAX_STATE_QUBITS,
            got: n,
        });
    }
    let mut qubit = vec![usize::MAX; g.vertex_count()];
    for (k, &v) in vertices.iter().enumerate() {
        qubit[v] = k;
    }
    let edge_masks: Vec<usize> = g
        .edges()
        .into_iter()
        .map(|(u, v)| (1 << qubit[u]) | (1 << qubit[v]))
        .collect();
    let scale = (1u64 << n) as f64;
    let scale = 1.0 / scale.sqrt();
    let amps = (0..1usize << n)
        .map(|x| {
            let odd = edge_masks.iter().filter(|&&m| x & m == m).count() % 2 == 1;
            Complex64::new(if odd { -scale } else { scale }, 0.0)
        })
        .collect();
    Ok(StateVector { vertices, amps })
}

/// Projects qubit `q` onto the `outcome` eigenspace (`true` = +1) of `basis`.
/// Returns the renormalized state and the outcome probability.
pub fn project_pauli(s: &StateVector, q: usize, basis: Basis, outcome: bool) -> Result<(StateVector, f64)> {
    let n = s.qubit_count();
    if q >= n {
        return Err(Error::VertexOutOfRange { vertex: q, n });
    }
    let bit = 1usize << q;
    let mut amps = s.amps.clone();
    match basis {
        Basis::Z => {
            for (x, a) in amps.iter_mut().enumerate() {
                if (x & bit != 0) == outcome {
                    *a = Complex64::new(0.0, 0.0);
                }
            }
        }
        Basis::X => {
            let sign = if outcome { 1.0 } else { -1.0 };
            for x in 0..amps.len() {
                if x & bit == 0 {
                    let (a0, a1) = (s.amps[x], s.amps[x | bit]);
                    let plus = (a0 + a1 * sign) * 0.5;
                    amps[x] = plus;
                    amps[x | bit] = plus * sign;
                }
            }
        }
    }
    let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if p <= MIN_PROBABILITY {
        return Err(Error::ZeroProbability(p));
    }
    let k = 1.0 / p.sqrt();
    for a in &mut amps {
        *a *= k;
    }
    Ok((
        StateVector {
            vertices: s.vertices.clone(),
            amps,
        },
        p,
    ))
}

/// Drops qubit `q` from a state where it is in a product eigenstate of
/// `basis` with eigenvalue `outcome`.
fn discard_qubit(s: &StateVector, q: usize, basis: Basis, outcome: bool) -> StateVector {
    let n = s.qubit_count();
    let low = (1usize << q) - 1;
    let (weight, bit_value) = match basis {
        Basis::Z => (1.0, usize::from(!outcome)),
        Basis::X => (std::f64::consts::SQRT_2, 0),
    };
    let amps = (0..1usize << (n - 1))
        .map(|y| {
            let x = ((y & !low) << 1) | (bit_value << q) | (y & low);
            s.amps[x] * weight
        })
        .collect();
    let mut vertices = s.vertices.clone();
    vertices.remove(q);
    StateVector { vertices, amps }
}

/// Sorted edge list; graphs in one orbit share their active vertex set.
pub type CanonicalGraph = Vec<(VertexId, VertexId)>;

/// Every graph reachable from `g` by local complementations.
pub fn lc_orbit(g: &Graph) -> Result<BTreeSet<CanonicalGraph>> {
    let active = g.active_count();
    if active > MAX_ORBIT_VERTICES {
        return Err(Error::Capacity {
            what: "LC-orbit vertices",
            limit: MAX_ORBIT_VERTICES,
            got: active,
        });
    }
    let vertices: Vec<VertexId> = g.active_vertices().collect();
    let mut seen: HashSet<CanonicalGraph> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(g.edges());
    queue.push_back(g.clone());
    while let Some(h) = queue.pop_front() {
        for &v in &vertices {
            let next = h.local_complement(v)?;
            if seen.insert(next.edges()) {
                queue.push_back(next);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Checks the graph rewrite for `m` on `g` against the state vector.
pub fn verify_measurement_rule(g: &Graph, m: &Measurement) -> Result<bool> {
    let mut claimed = g.clone();
    m.apply(&mut claimed)?;
    verify_claim(g, m, &claimed)
}

/// True iff, for every possible outcome of `m` on `|g>`, the remaining
/// qubits are local-Clifford equivalent to `|claimed>`.
pub fn verify_claim(g: &Graph, m: &Measurement, claimed: &Graph) -> Result<bool> {
    let active = g.active_count();
    if active > MAX_VERIFY_VERTICES {
        return Err(Error::Capacity {
            what: "verified vertices",
            limit: MAX_VERIFY_VERTICES,
            got: active,
        });
    }
    let target = m.target();
    g.check_active(target)?;
    let expected: Vec<VertexId> = g.active_vertices().filter(|&v| v != target).collect();
    if !claimed.active_vertices().eq(expected.iter().copied()) {
        return Ok(false);
    }
    let state = build_graph_state(g)?;
    let q = state.qubit_of(target).expect("target is active");
    let basis = if m.is_x() { Basis::X } else { Basis::Z };
    let reference = build_graph_state(claimed)?;
    for outcome in [true, false] {
        let projected = match project_pauli(&state, q, basis, outcome) {
            Ok((s, _)) => s,
            Err(Error::ZeroProbability(_)) => continue,
            Err(e) => return Err(e),
        };
        let rest = discard_qubit(&projected, q, basis, outcome);
        if !lc_equivalent(&rest, &reference, claimed) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `state` equals `reference = |g>` up to a product of single-qubit
/// Cliffords.
pub fn lc_equivalent(state: &StateVector, reference: &StateVector, g: &Graph) -> bool {
    let k = state.qubit_count();
    if k == 0 {
        return true;
    }
    if k <= BRUTE_FORCE_QUBITS {
        let cliffords = single_qubit_cliffords();
        clifford_search(&state.amps, &reference.amps, 0, k, &cliffords)
    } else {
        stabilizer_search(state, g)
    }
}

type Mat2 = [[Complex64; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Removes the global phase so that equal-up-to-phase matrices compare equal.
fn phase_key(m: &Mat2) -> [i64; 8] {
    let flat = [m[0][0], m[0][1], m[1][0], m[1][1]];
    let pivot = flat.iter().find(|z| z.norm() > 1e-9).expect("unitary");
    let phase = pivot.conj() / pivot.norm();
    let mut key = [0i64; 8];
    for (i, z) in flat.iter().enumerate() {
        let w = z * phase;
        key[2 * i] = (w.re * 1e6).round() as i64;
        key[2 * i + 1] = (w.im * 1e6).round() as i64;
    }
    key
}

/// The 24 single-qubit Cliffords modulo phase, generated from H and S.
pub fn single_qubit_cliffords() -> Vec<[[Complex64; 2]; 2]> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let h: Mat2 = [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]];
    let s: Mat2 = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]];
    let id: Mat2 = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::from([id]);
    seen.insert(phase_key(&id));
    while let Some(m) = queue.pop_front() {
        out.push(m);
        for gen in [&h, &s] {
            let next = mat_mul(gen, &m);
            if seen.insert(phase_key(&next)) {
                queue.push_back(next);
            }
        }
    }
    out
}

fn apply_single(amps: &[Complex64], q: usize, u: &Mat2) -> Vec<Complex64> {
    let bit = 1usize << q;
    let mut out = amps.to_vec();
    for x in 0..amps.len() {
        if x & bit == 0 {
            let (a0, a1) = (amps[x], amps[x | bit]);
            out[x] = u[0][0] * a0 + u[0][1] * a1;
            out[x | bit] = u[1][0] * a0 + u[1][1] * a1;
        }
    }
    out
}

fn clifford_search(amps: &[Complex64], reference: &[Complex64], q: usize, k: usize, cliffords: &[Mat2]) -> bool {
    if q == k {
        return inner(reference, amps).norm_sqr() > 1.0 - OVERLAP_TOL;
    }
    cliffords
        .iter()
        .any(|u| clifford_search(&apply_single(amps, q, u), reference, q + 1, k, cliffords))
}

/// Pauli string as `(x mask, z mask)` over qubits.
type Pauli = (usize, usize);

fn pauli_expectation(amps: &[Complex64], (xm, zm): Pauli) -> Complex64 {
    // <psi| X^x Z^z |psi>, with Y = iXZ folded into the phase factor.
    let y_count = (xm & zm).count_ones();
    let phase = match y_count % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, &a) in amps.iter().enumerate() {
        let sign = if (x & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        acc += amps[x ^ xm].conj() * a * sign;
    }
    acc * phase
}

/// Unsigned stabilizer group of `amps`: Pauli strings with expectation ±1.
fn unsigned_stabilizers(amps: &[Complex64], k: usize) -> HashSet<Pauli> {
    let dim = 1usize << k;
    let mut set = HashSet::new();
    for xm in 0..dim {
        for zm in 0..dim {
            if (pauli_expectation(amps, (xm, zm)).norm() - 1.0).abs() < 1e-6 {
                set.insert((xm, zm));
            }
        }
    }
    set
}

/// Images of X and Z under the six local symplectic maps, as `(x, z)` bits.
const LOCAL_MAPS: [[(bool, bool); 2]; 6] = [
    [(true, false), (false, true)],
    [(false, true), (true, false)],
    [(true, true), (false, true)],
    [(true, false), (true, true)],
    [(true, true), (true, false)],
    [(false, true), (true, true)],
];

/// Searches local symplectic maps sending every generator `X_v Z_{N_v}` of
/// `g` into the unsigned stabilizer group of `state`. Matching unsigned
/// groups leave only a Pauli, itself a Clifford, between the two states.
fn stabilizer_search(state: &StateVector, g: &Graph) -> bool {
    let k = state.qubit_count();
    let group = unsigned_stabilizers(&state.amps, k);
    if group.len() != 1 << k {
        return false;
    }
    let qubit = |v: VertexId| state.qubit_of(v).expect("same active set");
    let generators: Vec<(usize, usize)> = state
        .vertices
        .iter()
        .map(|&v| {
            let zm = g.neighbors(v).fold(0usize, |m, u| m | (1 << qubit(u)));
            (qubit(v), zm)
        })
        .collect();
    let mut choice = vec![0usize; k];
    loop {
        let fits = generators.iter().all(|&(xq, zm)| {
            let mut image: Pauli = (0, 0);
            for (q, &c) in choice.iter().enumerate() {
                let local = if q == xq {
                    Some(LOCAL_MAPS[c][0])
                } else if zm & (1 << q) != 0 {
                    Some(LOCAL_MAPS[c][1])
                } else {
                    None
                };
                if let Some((x, z)) = local {
                    image.0 |= usize::from(x) << q;
                    image.1 |= usize::from(z) << q;
                }
            }
            group.contains(&image)
        });
        if fits {
            return true;
        }
        // Odometer over 6^k choices.
        let mut q = 0;
        loop {
            if q == k {
                return false;
            }
            choice[q] += 1;
            if choice[q] < LOCAL_MAPS.len() {
                break;
            }
            choice[q] = 0;
            q += 1;
        }
    }
}

/// Largest `||K_v|G> - |G>||` over the vertex generators of `g`.
pub fn stabilizer_error(g: &Graph) -> Result<f64> {
    let s = build_graph_state(g)?;
    let mut worst = 0.0f64;
    for v in g.active_vertices() {
        let t = s.apply_generator(g, v)?;
        let err = s
            .amps
            .iter()
            .zip(&t.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(err);
    }
    Ok(worst)
}

/// Whether the state's norm is within tolerance of one.
pub fn is_normalized(s: &StateVector) -> bool {
    (s.norm() - 1.0).abs() < NORM_TOL
}
