//! Pauli measurements as graph rewrites.
//!
//! `Z[v]` deletes `v`. `X[v, w]` with `w ∈ N(v)` is `τ_w ∘ Z_v ∘ τ_v ∘ τ_w`,
//! applied right to left. Outcomes are not sampled: the rewrite fixes the
//! graph up to local Clifford corrections, which are classical bookkeeping.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, OrderedPath, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MeasurementJson", into = "MeasurementJson")]
pub enum Measurement {
    Z { target: VertexId },
    X { target: VertexId, witness: VertexId },
}

impl Measurement {
    pub fn target(&self) -> VertexId {
        match *self {
            Measurement::Z { target } | Measurement::X { target, .. } => target,
        }
    }

    pub fn is_x(&self) -> bool {
        matches!(self, Measurement::X { .. })
    }

    /// Applies the rewrite rule to `g` in place.
    pub fn apply(&self, g: &mut Graph) -> Result<()> {
        match *self {
            Measurement::Z { target } => g.delete_vertex_in_place(target),
            Measurement::X { target, witness } => x_in_place(g, target, witness),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MeasurementJson {
    kind: String,
    target: VertexId,
    witness: Option<VertexId>,
}

impl From<Measurement> for MeasurementJson {
    fn from(m: Measurement) -> Self {
        match m {
            Measurement::Z { target } => MeasurementJson {
                kind: "Z".into(),
                target,
                witness: None,
            },
            Measurement::X { target, witness } => MeasurementJson {
                kind: "X".into(),
                target,
                witness: Some(witness),
            },
        }
    }
}

impl TryFrom<MeasurementJson> for Measurement {
    type Error = String;

    fn try_from(m: MeasurementJson) -> std::result::Result<Self, String> {
        match (m.kind.as_str(), m.witness) {
            ("Z", None) => Ok(Measurement::Z { target: m.target }),
            ("X", Some(witness)) => Ok(Measurement::X {
                target: m.target,
                witness,
            }),
            ("Z", Some(_)) => Err("Z measurement cannot carry a witness".into()),
            ("X", None) => Err("X measurement requires a witness".into()),
            (k, _) => Err(format!("unknown measurement kind {k:?}")),
        }
    }
}

/// Ordered measurement record with per-kind tallies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MeasurementLog {
    entries: Vec<Measurement>,
    x_count: usize,
    z_count: usize,
}

impl MeasurementLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, m: Measurement) {
        if m.is_x() {
            self.x_count += 1;
        } else {
            self.z_count += 1;
        }
        self.entries.push(m);
    }

    pub fn entries(&self) -> &[Measurement] {
        &self.entries
    }

    pub fn x_count(&self) -> usize {
        self.x_count
    }

    pub fn z_count(&self) -> usize {
        self.z_count
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<Measurement> for MeasurementLog {
    fn from_iter<I: IntoIterator<Item = Measurement>>(iter: I) -> Self {
        let mut log = MeasurementLog::new();
        for m in iter {
            log.push(m);
        }
        log
    }
}

impl Serialize for MeasurementLog {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MeasurementLog {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<Measurement>::deserialize(d)?;
        Ok(entries.into_iter().collect())
    }
}

pub fn measure_z(g: &Graph, v: VertexId) -> Result<(Graph, Measurement)> {
    Ok((g.delete_vertex(v)?, Measurement::Z { target: v }))
}

pub fn measure_x(g: &Graph, v: VertexId, w: VertexId) -> Result<(Graph, Measurement)> {
    let mut out = g.clone();
    x_in_place(&mut out, v, w)?;
    Ok((out, Measurement::X { target: v, witness: w }))
}

/// The three intermediate graphs of an X measurement and the result:
/// `τ_w(G)`, `τ_v τ_w(G)`, `Z_v τ_v τ_w(G)`, `τ_w Z_v τ_v τ_w(G)`.
pub fn measure_x_stages(g: &Graph, v: VertexId, w: VertexId) -> Result<[Graph; 4]> {
    check_witness(g, v, w)?;
    let s1 = g.local_complement(w)?;
    let s2 = s1.local_complement(v)?;
    let s3 = s2.delete_vertex(v)?;
    let s4 = s3.local_complement(w)?;
    Ok([s1, s2, s3, s4])
}

fn check_witness(g: &Graph, v: VertexId, w: VertexId) -> Result<()> {
    g.check_active(v)?;
    if !g.is_active(w) || !g.has_edge(v, w) {
        return Err(Error::WitnessNotNeighbor { target: v, witness: w });
    }
    Ok(())
}

pub(crate) fn x_in_place(g: &mut Graph, v: VertexId, w: VertexId) -> Result<()> {
    check_witness(g, v, w)?;
    g.local_complement_in_place(w)?;
    g.local_complement_in_place(v)?;
    g.delete_vertex_in_place(v)?;
    g.local_complement_in_place(w)
}

fn sym_diff(a: &BTreeSet<VertexId>, b: &BTreeSet<VertexId>) -> BTreeSet<VertexId> {
    a.symmetric_difference(b).copied().collect()
}

/// Closed-form endpoint neighborhoods after X-measuring the interior of
/// `path` in order with the first vertex as witness, on a tree.
///
/// With `N_k` the initial neighborhood of the k-th path vertex (1-based) and
/// `m` the path length, the first endpoint ends with
/// `N_{m-1} Δ N_{m-3} Δ … Δ N_1` for even `m` and
/// `N_{m-1} Δ … Δ N_4 Δ (N_2 \ {v_1})` for odd `m`; the last endpoint with
/// `N_m Δ N_{m-2} Δ … Δ N_2` for even `m` and
/// `{v_1} ∪ (N_m Δ N_{m-2} Δ … Δ N_1)` for odd `m`.
pub fn predict_endpoint_neighborhoods(
    g: &Graph,
    path: &OrderedPath,
) -> Result<(BTreeSet<VertexId>, BTreeSet<VertexId>)> {
    if !g.is_tree() {
        return Err(Error::NotATree);
    }
    let verts = OrderedPath::new(g, path.vertices().to_vec())?.into_vec();
    let m = verts.len();
    if m < 3 {
        return Err(Error::InvalidPath(format!("need at least 3 vertices, got {m}")));
    }
    let nb = |k: usize| -> Result<BTreeSet<VertexId>> { g.neighborhood(verts[k - 1]) };
    let v1 = verts[0];

    // Chains run from the innermost term outward; Δ is associative and
    // commutative so the fold order only mirrors the written form.
    let first = if m % 2 == 0 {
        let mut acc = nb(1)?;
        for k in (3..m).step_by(2) {
            acc = sym_diff(&nb(k)?, &acc);
        }
        acc
    } else {
        let mut acc = nb(2)?;
        acc.remove(&v1);
        for k in (4..m).step_by(2) {
            acc = sym_diff(&nb(k)?, &acc);
        }
        acc
    };

    let last = if m % 2 == 0 {
        let mut acc = nb(2)?;
        for k in (4..=m).step_by(2) {
            acc = sym_diff(&nb(k)?, &acc);
        }
        acc
    } else {
        let mut acc = nb(1)?;
        for k in (3..=m).step_by(2) {
            acc = sym_diff(&nb(k)?, &acc);
        }
        acc.insert(v1);
        acc
    };

    Ok((first, last))
}

/// Applies the sequence the closed forms describe and returns the actual
/// endpoint neighborhoods.
pub fn evolve_endpoint_neighborhoods(
    g: &Graph,
    path: &OrderedPath,
) -> Result<(BTreeSet<VertexId>, BTreeSet<VertexId>)> {
    let mut h = g.clone();
    let v1 = path.source();
    for &v in path.interior() {
        x_in_place(&mut h, v, v1)?;
    }
    Ok((h.neighborhood(v1)?, h.neighborhood(path.target())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|v| (v - 1, v))).unwrap()
    }

    fn set(xs: &[VertexId]) -> BTreeSet<VertexId> {
        xs.iter().copied().collect()
    }

    #[test]
    fn z_examples() {
        let tri = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let (g, m) = measure_z(&tri, 2).unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);
        assert_eq!(m, Measurement::Z { target: 2 });

        let (g, _) = measure_z(&path(3), 1).unwrap();
        assert!(g.edges().is_empty());
        assert_eq!(g.active_count(), 2);

        let lone = Graph::new(3);
        let (g, _) = measure_z(&lone, 0).unwrap();
        assert_eq!(g, lone.delete_vertex(0).unwrap());
    }

    #[test]
    fn x_examples() {
        let (g, _) = measure_x(&path(3), 1, 0).unwrap();
        assert_eq!(g.edges(), vec![(0, 2)]);
        let (g, _) = measure_x(&path(3), 1, 2).unwrap();
        assert_eq!(g.edges(), vec![(0, 2)]);

        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let (g, m) = measure_x(&star, 0, 1).unwrap();
        assert_eq!(g.edges(), vec![(1, 2), (1, 3)]);
        assert_eq!(m, Measurement::X { target: 0, witness: 1 });
    }

    #[test]
    fn x_requires_neighbor_witness() {
        let err = measure_x(&path(4), 1, 3).unwrap_err();
        assert!(matches!(err, Error::WitnessNotNeighbor { target: 1, witness: 3 }));
        let lone = Graph::new(2);
        assert!(matches!(measure_x(&lone, 0, 1), Err(Error::WitnessNotNeighbor { .. })));
    }

    #[test]
    fn x_stages_end_at_result() {
        let star = Graph::from_edges(5, [(0, 1), (0, 2), (0, 3), (3, 4)]).unwrap();
        let stages = measure_x_stages(&star, 0, 3).unwrap();
        assert_eq!(stages[3], measure_x(&star, 0, 3).unwrap().0);
        assert!(!stages[2].is_active(0));
    }

    #[test]
    fn log_counts_and_json() {
        let log: MeasurementLog = [
            Measurement::X { target: 1, witness: 0 },
            Measurement::Z { target: 4 },
            Measurement::X { target: 2, witness: 0 },
        ]
        .into_iter()
        .collect();
        assert_eq!((log.x_count(), log.z_count(), log.len()), (2, 1, 3));
        let json = serde_json::to_string(&log).unwrap();
        assert_eq!(
            json,
            r#"[{"kind":"X","target":1,"witness":0},{"kind":"Z","target":4,"witness":null},{"kind":"X","target":2,"witness":0}]"#
        );
        let back: MeasurementLog = serde_json::from_str(&json).unwrap();
        assert_eq!(back, log);
        assert!(serde_json::from_str::<MeasurementLog>(r#"[{"kind":"X","target":1,"witness":null}]"#).is_err());
    }

    #[test]
    fn closed_form_bare_paths() {
        // Vertices labelled 1..=4 as in the hand-worked example; 0 is unused
        // and removed so the graph stays a tree.
        let g4 = Graph::from_edges(5, [(1, 2), (2, 3), (3, 4)]).unwrap().delete_vertex(0).unwrap();
        let p4 = OrderedPath::new(&g4, vec![1, 2, 3, 4]).unwrap();
        let (first, last) = predict_endpoint_neighborhoods(&g4, &p4).unwrap();
        assert_eq!(first, set(&[4]));
        assert_eq!(last, set(&[1]));
        assert_eq!(evolve_endpoint_neighborhoods(&g4, &p4).unwrap(), (first, last));

        let g3 = Graph::from_edges(4, [(1, 2), (2, 3)]).unwrap().delete_vertex(0).unwrap();
        let p3 = OrderedPath::new(&g3, vec![1, 2, 3]).unwrap();
        let (first, last) = predict_endpoint_neighborhoods(&g3, &p3).unwrap();
        assert_eq!(last, set(&[1]));
        assert_eq!(first, set(&[3]));
    }

    #[test]
    fn closed_form_star_of_paths() {
        // Center 0 with three arms of length 2.
        let g = Graph::from_edges(7, [(0, 1), (1, 2), (0, 3), (3, 4), (0, 5), (5, 6)]).unwrap();
        for verts in [vec![1, 0, 3], vec![2, 1, 0], vec![0, 5, 6], vec![2, 1, 0, 3, 4]] {
            let p = OrderedPath::new(&g, verts).unwrap();
            assert_eq!(
                predict_endpoint_neighborhoods(&g, &p).unwrap(),
                evolve_endpoint_neighborhoods(&g, &p).unwrap()
            );
        }
    }

    #[test]
    fn closed_form_rejects_non_trees_and_short_paths() {
        let tri = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let p = OrderedPath::new(&tri, vec![0, 1, 2]).unwrap();
        assert!(matches!(predict_endpoint_neighborhoods(&tri, &p), Err(Error::NotATree)));
        let g = path(3);
        let p = OrderedPath::new(&g, vec![0, 1]).unwrap();
        assert!(predict_endpoint_neighborhoods(&g, &p).is_err());
    }
}
