//! Measurement-based routing protocols on graph states.
//!
//! * [`dodag_x`]: entangles up to three parties over a DODAG tree using only
//!   the precomputed root paths.
//! * [`x_protocol_pair`] / [`x_protocol_triplet`]: X-measure shortest paths
//!   on the physical graph, then Z-isolate the parties.
//! * [`repeater_protocol`]: Z-isolate the shortest path first, then
//!   X-measure along it.
//!
//! Every run returns the final graph together with the measurement log, and
//! checks that the parties end up as a connected component of their own.

use std::collections::{BTreeMap, BTreeSet};

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::dodag::DodagTree;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::measurement::{x_in_place, Measurement, MeasurementLog};

/// Distinct parties to entangle, in the order given.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartySet(Vec<VertexId>);

impl PartySet {
    pub fn new(parties: Vec<VertexId>) -> Result<Self> {
        if parties.len() < 2 {
            return Err(Error::InvalidParties(format!("need at least 2 parties, got {}", parties.len())));
        }
        let distinct: BTreeSet<_> = parties.iter().collect();
        if distinct.len() != parties.len() {
            return Err(Error::InvalidParties(format!("parties must be distinct: {parties:?}")));
        }
        Ok(PartySet(parties))
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.contains(&v)
    }

    pub fn sorted(&self) -> Vec<VertexId> {
        let mut v = self.0.clone();
        v.sort_unstable();
        v
    }

    fn check_active(&self, g: &Graph) -> Result<()> {
        for &p in &self.0 {
            if !g.is_active(p) {
                return Err(Error::InvalidParties(format!("party {p} is not an active vertex")));
            }
        }
        Ok(())
    }
}

/// Intersection node `a_{i,j}` for every unordered party pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionMap {
    pairs: BTreeMap<(VertexId, VertexId), VertexId>,
}

impl IntersectionMap {
    pub fn get(&self, i: VertexId, j: VertexId) -> Option<VertexId> {
        self.pairs.get(&(i.min(j), i.max(j))).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((VertexId, VertexId), VertexId)> + '_ {
        self.pairs.iter().map(|(&k, &v)| (k, v))
    }

    /// Distinct intersection nodes.
    pub fn nodes(&self) -> BTreeSet<VertexId> {
        self.pairs.values().copied().collect()
    }
}

/// First vertex of `from` (ordered party→root) that also lies on `to`.
fn first_common(from: &[VertexId], to: &[VertexId]) -> VertexId {
    *from
        .iter()
        .find(|v| to.contains(v))
        .expect("root paths of one tree share the root")
}

fn intersections_of(parties: &[VertexId], paths: &[Vec<VertexId>]) -> IntersectionMap {
    let mut pairs = BTreeMap::new();
    for i in 0..parties.len() {
        for j in i + 1..parties.len() {
            let (a, b) = (parties[i], parties[j]);
            pairs.insert((a.min(b), a.max(b)), first_common(&paths[i], &paths[j]));
        }
    }
    IntersectionMap { pairs }
}

fn root_paths(t: &DodagTree, parties: &PartySet) -> Result<Vec<Vec<VertexId>>> {
    parties
        .as_slice()
        .iter()
        .map(|&p| {
            t.path_to_root(p)
                .map(|path| path.into_vec())
                .map_err(|_| Error::InvalidParties(format!("party {p} is not in the DODAG tree")))
        })
        .collect()
}

/// Pairwise intersection nodes on the tree's root paths: for each pair, the
/// common path vertex closest to the parties.
pub fn intersections(t: &DodagTree, parties: &PartySet) -> Result<IntersectionMap> {
    let paths = root_paths(t, parties)?;
    Ok(intersections_of(parties.as_slice(), &paths))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementCounts {
    /// X measurements along routing paths.
    pub path_x: usize,
    /// The single X measurement on a non-party DODAG root.
    pub root_x: usize,
    /// Z measurements removing non-party vertices.
    pub isolation_z: usize,
}

impl MeasurementCounts {
    pub fn total(&self) -> usize {
        self.path_x + self.root_x + self.isolation_z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Category {
    PathX,
    RootX,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingOutcome {
    pub final_graph: Graph,
    pub parties: PartySet,
    pub log: MeasurementLog,
    pub counts: MeasurementCounts,
    pub success: bool,
}

impl RoutingOutcome {
    pub fn x_count(&self) -> usize {
        self.log.x_count()
    }

    pub fn z_count(&self) -> usize {
        self.log.z_count()
    }

    pub fn total(&self) -> usize {
        self.log.len()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("routing outcome is always serializable")
    }
}

impl Serialize for RoutingOutcome {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RoutingOutcome", 5)?;
        st.serialize_field("final_graph", &self.final_graph.to_json())?;
        st.serialize_field("parties", &self.parties)?;
        st.serialize_field("log", &self.log)?;
        st.serialize_field("counts", &self.counts)?;
        st.serialize_field("success", &self.success)?;
        st.end()
    }
}

/// Parties induce a connected subgraph and have no other neighbors.
pub fn is_isolated_entangled(g: &Graph, parties: &[VertexId]) -> bool {
    parties.iter().all(|&p| g.is_active(p) && g.neighbors(p).all(|u| parties.contains(&u)))
        && g.induced_connected(parties)
}

/// Mutable state of one protocol run.
struct Run {
    g: Graph,
    log: MeasurementLog,
    counts: MeasurementCounts,
}

impl Run {
    fn new(g: &Graph) -> Self {
        Run {
            g: g.clone(),
            log: MeasurementLog::new(),
            counts: MeasurementCounts::default(),
        }
    }

    fn x(&mut self, v: VertexId, w: VertexId, cat: Category) -> Result<()> {
        x_in_place(&mut self.g, v, w)?;
        self.log.push(Measurement::X { target: v, witness: w });
        match cat {
            Category::RootX => self.counts.root_x += 1,
            Category::PathX => self.counts.path_x += 1,
        }
        Ok(())
    }

    fn z(&mut self, v: VertexId) -> Result<()> {
        self.g.delete_vertex_in_place(v)?;
        self.log.push(Measurement::Z { target: v });
        self.counts.isolation_z += 1;
        Ok(())
    }

    /// Z-measures every non-party neighbor of the parties, ascending.
    fn isolate(&mut self, parties: &PartySet) -> Result<()> {
        let mut targets = BTreeSet::new();
        for &p in parties.as_slice() {
            targets.extend(self.g.neighbors(p).filter(|&u| !parties.contains(u)));
        }
        for v in targets {
            self.z(v)?;
        }
        Ok(())
    }

    fn finish(self, parties: PartySet) -> RoutingOutcome {
        let success = is_isolated_entangled(&self.g, parties.as_slice());
        RoutingOutcome {
            final_graph: self.g,
            parties,
            log: self.log,
            counts: self.counts,
            success,
        }
    }
}

/// Graph snapshots and derived structure from one DODAG-X run.
#[derive(Debug, Clone)]
pub struct DodagXTrace {
    /// Root after relabelling to the deepest vertex common to all root paths.
    pub root: VertexId,
    pub intersections: IntersectionMap,
    /// Nearest intersection chosen for each party in Step 4; `None` for a
    /// party that is the root.
    pub nearest: BTreeMap<VertexId, Option<VertexId>>,
    pub after_step4: Option<Graph>,
    pub after_step5: Option<Graph>,
    pub after_step6: Option<Graph>,
}

/// DODAG-X for two or three parties.
///
/// `g_tree` is the entanglement structure and must be `t`'s tree graph. A
/// witness violation surfaces as [`Error::WitnessNotNeighbor`]; on a valid
/// tree it indicates a bug.
pub fn dodag_x(g_tree: &Graph, t: &DodagTree, parties: &PartySet) -> Result<RoutingOutcome> {
    dodag_x_traced(g_tree, t, parties).map(|(o, _)| o)
}

pub fn dodag_x_traced(g_tree: &Graph, t: &DodagTree, parties: &PartySet) -> Result<(RoutingOutcome, DodagXTrace)> {
    if !(2..=3).contains(&parties.len()) {
        return Err(Error::InvalidParties(format!(
            "DODAG-X takes 2 or 3 parties, got {}; use the n-party mode",
            parties.len()
        )));
    }
    run_dodag_x(g_tree, t, parties, true)
}

/// Experimental n-party DODAG-X. Steps 2 to 4 run for every party; Step 5 is
/// applied to each intersection node in increasing depth order. Whether the
/// parties end up entangled is reported in `success`; a witness that is not
/// available stops the run early with `success = false`.
pub fn dodag_x_nparty(g_tree: &Graph, t: &DodagTree, parties: &PartySet) -> Result<RoutingOutcome> {
    run_dodag_x(g_tree, t, parties, false).map(|(o, _)| o)
}

pub fn dodag_x_nparty_traced(
    g_tree: &Graph,
    t: &DodagTree,
    parties: &PartySet,
) -> Result<(RoutingOutcome, DodagXTrace)> {
    run_dodag_x(g_tree, t, parties, false)
}

fn run_dodag_x(g_tree: &Graph, t: &DodagTree, parties: &PartySet, strict: bool) -> Result<(RoutingOutcome, DodagXTrace)> {
    if g_tree != t.tree_graph() {
        return Err(Error::InvalidParameter(
            "entanglement graph must equal the DODAG tree graph".into(),
        ));
    }
    parties.check_active(g_tree)?;
    let full_paths = root_paths(t, parties)?;

    // Step 2: move the root down to the deepest vertex on every root path.
    let root = *full_paths[0]
        .iter()
        .find(|v| full_paths[1..].iter().all(|p| p.contains(v)))
        .expect("all root paths end at the root");
    let paths: Vec<Vec<VertexId>> = full_paths
        .iter()
        .map(|p| {
            let end = p.iter().position(|&v| v == root).expect("root is on every path");
            p[..=end].to_vec()
        })
        .collect();

    // Step 3.
    let members = parties.as_slice();
    let imap = intersections_of(members, &paths);
    let index_of = |p: VertexId| members.iter().position(|&q| q == p).expect("party");

    let mut trace = DodagXTrace {
        root,
        intersections: imap.clone(),
        nearest: BTreeMap::new(),
        after_step4: None,
        after_step5: None,
        after_step6: None,
    };
    let mut run = Run::new(g_tree);
    let mut measured = vec![false; g_tree.vertex_count()];

    let steps = |run: &mut Run, measured: &mut Vec<bool>, trace: &mut DodagXTrace| -> Result<()> {
        // Step 4: each party to its nearest intersection, witnessed by the party.
        for p in parties.sorted() {
            let i = index_of(p);
            let path = &paths[i];
            let nearest_idx = members
                .iter()
                .filter(|&&q| q != p)
                .map(|&q| imap.get(p, q).expect("pair present"))
                .filter(|&a| a != p)
                .map(|a| path.iter().position(|&v| v == a).expect("intersection lies on the path"))
                .min();
            trace.nearest.insert(p, nearest_idx.map(|k| path[k]));
            let Some(k) = nearest_idx else { continue };
            for &v in &path[1..k] {
                if !measured[v] {
                    run.x(v, p, Category::PathX)?;
                    measured[v] = true;
                }
            }
        }
        trace.after_step4 = Some(run.g.clone());

        // Step 5: intersections that are neither root nor party.
        let mut pending: Vec<VertexId> = imap
            .nodes()
            .into_iter()
            .filter(|&a| a != root && !parties.contains(a))
            .collect();
        pending.sort_by_key(|&a| (t.depth_of(a), a));
        for a in pending {
            let holder = paths.iter().find(|p| p.contains(&a)).expect("intersection lies on a path");
            let start = holder.iter().position(|&v| v == a).expect("present");
            let seg = &holder[start..];
            let m = seg.len();
            // 1-based even positions strictly between a and the root.
            for k in (2..m).step_by(2) {
                let (v, w) = (seg[k - 1], seg[k - 2]);
                if !measured[v] {
                    run.x(v, w, Category::PathX)?;
                    measured[v] = true;
                }
            }
            if m % 2 == 0 {
                let v = seg[m - 2];
                if !measured[v] {
                    // A party whose pairwise intersection is `a`.
                    let owners: BTreeSet<VertexId> = imap
                        .iter()
                        .filter(|&(_, node)| node == a)
                        .flat_map(|((i, j), _)| [i, j])
                        .collect();
                    let w = owners
                        .iter()
                        .copied()
                        .find(|&q| run.g.has_edge(v, q))
                        .ok_or(Error::WitnessNotNeighbor {
                            target: v,
                            witness: *owners.iter().next().expect("pairs have owners"),
                        })?;
                    run.x(v, w, Category::PathX)?;
                    measured[v] = true;
                }
            }
        }
        trace.after_step5 = Some(run.g.clone());

        // Step 6.
        if !parties.contains(root) {
            let w = parties
                .sorted()
                .into_iter()
                .find(|&q| run.g.has_edge(root, q))
                .ok_or(Error::WitnessNotNeighbor {
                    target: root,
                    witness: parties.sorted()[0],
                })?;
            run.x(root, w, Category::RootX)?;
            measured[root] = true;
        }
        trace.after_step6 = Some(run.g.clone());

        // Step 7.
        run.isolate(parties)
    };

    match steps(&mut run, &mut measured, &mut trace) {
        Ok(()) => {}
        Err(Error::WitnessNotNeighbor { .. }) if !strict => {
            let mut out = run.finish(parties.clone());
            out.success = false;
            return Ok((out, trace));
        }
        Err(e) => return Err(e),
    }
    Ok((run.finish(parties.clone()), trace))
}

/// Sequential X-protocol: connects `order[0]` to `order[1]`, then
/// `order[1]` to `order[2]`, … along shortest paths recomputed on the
/// evolved graph, then Z-isolates. Among equally short paths the one with
/// the fewest non-party vertices is taken. A path that runs through another
/// party is split there, each piece witnessed by its own first vertex, so
/// parties are never measured.
fn x_protocol_sequence(g: &Graph, parties: &PartySet, fail_as_routing: bool) -> Result<RoutingOutcome> {
    parties.check_active(g)?;
    let order = parties.as_slice();
    let mut run = Run::new(g);
    for hop in order.windows(2) {
        let path = match run.g.shortest_path_through(hop[0], hop[1], order) {
            Ok(p) => p,
            Err(Error::NoPath { from, to }) if fail_as_routing => {
                return Err(Error::RoutingFailed {
                    reason: format!("no path between {from} and {to}"),
                    partial_log: run.log,
                });
            }
            Err(e) => return Err(e),
        };
        let mut witness = hop[0];
        for &v in &path.vertices()[1..] {
            if parties.contains(v) {
                witness = v;
            } else {
                run.x(v, witness, Category::PathX)?;
            }
        }
    }
    run.isolate(parties)?;
    Ok(run.finish(parties.clone()))
}

/// Two-party X-protocol on an arbitrary graph.
pub fn x_protocol_pair(g: &Graph, a: VertexId, b: VertexId) -> Result<RoutingOutcome> {
    x_protocol_sequence(g, &PartySet::new(vec![a, b])?, false)
}

/// Three-party X-protocol: pair procedure `a → b`, then `b → c` on the
/// evolved graph, then isolation.
pub fn x_protocol_triplet(g: &Graph, a: VertexId, b: VertexId, c: VertexId) -> Result<RoutingOutcome> {
    x_protocol_sequence(g, &PartySet::new(vec![a, b, c])?, true)
}

/// Sequential X-protocol over any number of parties in the given order.
pub fn x_protocol(g: &Graph, parties: &PartySet) -> Result<RoutingOutcome> {
    x_protocol_sequence(g, parties, true)
}

/// Repeater baseline: Z-measure every off-path neighbor of the shortest
/// path, then X-measure its interior witnessed by `a`.
pub fn repeater_protocol(g: &Graph, a: VertexId, b: VertexId) -> Result<RoutingOutcome> {
    let parties = PartySet::new(vec![a, b])?;
    parties.check_active(g)?;
    let path = g.shortest_path(a, b)?;
    let on_path = path.vertices();
    let mut run = Run::new(g);
    let mut fence = BTreeSet::new();
    for &v in on_path {
        fence.extend(g.neighbors(v).filter(|u| !on_path.contains(u)));
    }
    for v in fence {
        run.z(v)?;
    }
    for &v in path.interior() {
        run.x(v, a, Category::PathX)?;
    }
    Ok(run.finish(parties))
}
