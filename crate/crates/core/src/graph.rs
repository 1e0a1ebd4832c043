//! Simple undirected graphs over dense integer ids.
//!
//! Adjacency is a flat row-major bit matrix, so local complementation is a
//! handful of word-wide XORs per neighbor. Deleting a vertex deactivates it
//! instead of renumbering, so ids stay meaningful for the whole lifetime of
//! a routing run.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = usize;

const WORD: usize = 64;

#[inline]
fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

#[inline]
fn bit(v: VertexId) -> (usize, u64) {
    (v / WORD, 1u64 << (v % WORD))
}

/// Iterates the set bits of a word slice in ascending order.
pub(crate) fn iter_bits(words: &[u64]) -> impl Iterator<Item = VertexId> + '_ {
    words.iter().enumerate().flat_map(|(i, &w)| {
        let mut rest = w;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let tz = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(i * WORD + tz)
        })
    })
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    words: usize,
    adj: Vec<u64>,
    active: Vec<u64>,
}

impl Graph {
    /// `n` active vertices and no edges.
    pub fn new(n: usize) -> Self {
        let words = words_for(n);
        let mut active = vec![0u64; words];
        for v in 0..n {
            let (w, b) = bit(v);
            active[w] |= b;
        }
        Graph {
            n,
            words,
            adj: vec![0u64; n * words],
            active,
        }
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut g = Graph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Total id range, including deactivated vertices.
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_active(&self, v: VertexId) -> bool {
        if v >= self.n {
            return false;
        }
        let (w, b) = bit(v);
        self.active[w] & b != 0
    }

    pub fn active_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        iter_bits(&self.active)
    }

    pub fn edge_count(&self) -> usize {
        let ones: usize = self.adj.iter().map(|w| w.count_ones() as usize).sum();
        ones / 2
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        if u >= self.n || v >= self.n {
            return false;
        }
        let (w, b) = bit(v);
        self.adj[u * self.words + w] & b != 0
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Adjacency bits of `v`.
    pub(crate) fn row(&self, v: VertexId) -> &[u64] {
        &self.adj[v * self.words..(v + 1) * self.words]
    }

    /// Neighbors of `v` in ascending order. No validity check on `v`.
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        iter_bits(self.row(v))
    }

    /// All edges as `(u, v)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            out.extend(self.neighbors(u).filter(|&v| v > u).map(|v| (u, v)));
        }
        out
    }

    pub(crate) fn check_active(&self, v: VertexId) -> Result<()> {
        if v >= self.n {
            return Err(Error::VertexOutOfRange { vertex: v, n: self.n });
        }
        if !self.is_active(v) {
            return Err(Error::InactiveVertex(v));
        }
        Ok(())
    }

    /// Adds `{u, v}`; adding an existing edge is a no-op.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        self.check_active(u)?;
        self.check_active(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        self.set_edge(u, v, true);
        Ok(())
    }

    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        self.check_active(u)?;
        self.check_active(v)?;
        self.set_edge(u, v, false);
        Ok(())
    }

    fn set_edge(&mut self, u: VertexId, v: VertexId, on: bool) {
        let (wu, bu) = bit(u);
        let (wv, bv) = bit(v);
        if on {
            self.adj[u * self.words + wv] |= bv;
            self.adj[v * self.words + wu] |= bu;
        } else {
            self.adj[u * self.words + wv] &= !bv;
            self.adj[v * self.words + wu] &= !bu;
        }
    }

    pub fn neighborhood(&self, v: VertexId) -> Result<BTreeSet<VertexId>> {
        self.check_active(v)?;
        Ok(self.neighbors(v).collect())
    }

    /// `G - v`.
    pub fn delete_vertex(&self, v: VertexId) -> Result<Graph> {
        let mut g = self.clone();
        g.delete_vertex_in_place(v)?;
        Ok(g)
    }

    pub fn delete_vertex_in_place(&mut self, v: VertexId) -> Result<()> {
        self.check_active(v)?;
        let (wv, bv) = bit(v);
        let words = self.words;
        for u in iter_bits(&self.adj[v * words..(v + 1) * words]).collect::<Vec<_>>() {
            self.adj[u * words + wv] &= !bv;
        }
        self.adj[v * words..(v + 1) * words].fill(0);
        self.active[wv] &= !bv;
        Ok(())
    }

    /// `τ_v(G)`: complements the subgraph induced by the neighborhood of `v`.
    pub fn local_complement(&self, v: VertexId) -> Result<Graph> {
        let mut g = self.clone();
        g.local_complement_in_place(v)?;
        Ok(g)
    }

    pub fn local_complement_in_place(&mut self, v: VertexId) -> Result<()> {
        self.check_active(v)?;
        let words = self.words;
        let nv: Vec<u64> = self.row(v).to_vec();
        for u in iter_bits(&nv) {
            let row = &mut self.adj[u * words..(u + 1) * words];
            for (r, m) in row.iter_mut().zip(&nv) {
                *r ^= m;
            }
            // u ∈ N_v, so the XOR above set the diagonal bit.
            let (wu, bu) = bit(u);
            row[wu] &= !bu;
        }
        Ok(())
    }

    /// Breadth-first distances from `source`; `None` for unreachable or
    /// inactive vertices.
    pub fn distances(&self, source: VertexId) -> Result<Vec<Option<usize>>> {
        self.check_active(source)?;
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut frontier = vec![source];
        let mut d = 0;
        while !frontier.is_empty() {
            d += 1;
            let mut next = Vec::new();
            for &u in &frontier {
                for w in self.neighbors(u) {
                    if dist[w].is_none() {
                        dist[w] = Some(d);
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        Ok(dist)
    }

    /// Level-synchronous BFS parent map. Each level is scanned in ascending
    /// id order, so a vertex's parent is the lowest-id neighbor one level
    /// closer to `source`. The source maps to itself.
    pub fn bfs_parents(&self, source: VertexId) -> Result<Vec<Option<VertexId>>> {
        self.check_active(source)?;
        let words = self.words;
        let mut parent = vec![None; self.n];
        parent[source] = Some(source);
        let mut visited = vec![0u64; words];
        let (ws, bs) = bit(source);
        visited[ws] |= bs;
        let mut frontier = vec![source];
        while !frontier.is_empty() {
            frontier.sort_unstable();
            let mut next = Vec::new();
            for &u in &frontier {
                let row = self.row(u);
                for i in 0..words {
                    let mut fresh = row[i] & !visited[i];
                    visited[i] |= fresh;
                    while fresh != 0 {
                        let w = i * WORD + fresh.trailing_zeros() as usize;
                        fresh &= fresh - 1;
                        parent[w] = Some(u);
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        Ok(parent)
    }

    /// Minimum-length path from `a` to `b`, BFS from `a` with lowest-id
    /// predecessor tie-breaking.
    pub fn shortest_path(&self, a: VertexId, b: VertexId) -> Result<OrderedPath> {
        self.check_active(a)?;
        self.check_active(b)?;
        let parent = self.bfs_parents(a)?;
        if parent[b].is_none() {
            return Err(Error::NoPath { from: a, to: b });
        }
        let mut seq = vec![b];
        let mut cur = b;
        while cur != a {
            cur = parent[cur].expect("BFS parent chain is connected");
            seq.push(cur);
        }
        seq.reverse();
        Ok(OrderedPath(seq))
    }

    /// Minimum-length path from `a` to `b` that, among all minimum-length
    /// paths, has the fewest interior vertices outside `free`. Remaining
    /// ties go to the lowest-id predecessor.
    pub fn shortest_path_through(&self, a: VertexId, b: VertexId, free: &[VertexId]) -> Result<OrderedPath> {
        self.check_active(b)?;
        let dist = self.distances(a)?;
        let Some(db) = dist[b] else {
            return Err(Error::NoPath { from: a, to: b });
        };
        let mut order: Vec<VertexId> = (0..self.n).filter(|&v| dist[v].is_some_and(|d| d <= db)).collect();
        order.sort_by_key(|&v| (dist[v], v));
        let mut cost = vec![usize::MAX; self.n];
        let mut pred = vec![usize::MAX; self.n];
        cost[a] = 0;
        for &v in &order[1..] {
            let dv = dist[v].expect("filtered");
            let mut best = (usize::MAX, usize::MAX);
            for u in self.neighbors(v) {
                if dist[u] == Some(dv - 1) && (cost[u], u) < best {
                    best = (cost[u], u);
                }
            }
            pred[v] = best.1;
            cost[v] = best.0 + usize::from(!free.contains(&v));
        }
        let mut seq = vec![b];
        let mut cur = b;
        while cur != a {
            cur = pred[cur];
            seq.push(cur);
        }
        seq.reverse();
        Ok(OrderedPath(seq))
    }

    pub fn eccentricity(&self, v: VertexId) -> Result<usize> {
        let dist = self.distances(v)?;
        let mut ecc = 0;
        for u in self.active_vertices() {
            match dist[u] {
                Some(d) => ecc = ecc.max(d),
                None => return Err(Error::Disconnected),
            }
        }
        Ok(ecc)
    }

    /// Connectivity over active vertices. The empty graph counts as connected.
    pub fn is_connected(&self) -> bool {
        match self.active_vertices().next() {
            None => true,
            Some(s) => {
                let dist = self.distances(s).expect("s is active");
                self.active_vertices().all(|u| dist[u].is_some())
            }
        }
    }

    pub fn is_tree(&self) -> bool {
        let active = self.active_count();
        active > 0 && self.edge_count() == active - 1 && self.is_connected()
    }

    /// Whether the subgraph induced by `set` is connected.
    pub fn induced_connected(&self, set: &[VertexId]) -> bool {
        let Some(&start) = set.first() else {
            return true;
        };
        let mut seen = vec![start];
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &w in set {
                if !seen.contains(&w) && self.has_edge(u, w) {
                    seen.push(w);
                    stack.push(w);
                }
            }
        }
        seen.len() == set.len()
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n,
            edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("graph JSON is always serializable")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: GraphJson = serde_json::from_str(s)?;
        Graph::try_from(raw)
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("active", &self.active_vertices().collect::<Vec<_>>())
            .field("edges", &self.edges())
            .finish()
    }
}

/// Wire form: `{"n": <int>, "edges": [[u, v], ...]}`, `u < v`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[VertexId; 2]>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = Error;

    fn try_from(raw: GraphJson) -> Result<Self> {
        Graph::from_edges(raw.n, raw.edges.into_iter().map(|[u, v]| (u, v)))
    }
}

impl From<&Graph> for GraphJson {
    fn from(g: &Graph) -> Self {
        g.to_json()
    }
}

/// Sequence of distinct vertices, consecutive pairs adjacent in the graph it
/// was taken from. Index 0 is the source, the last entry the destination.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrderedPath(Vec<VertexId>);

impl OrderedPath {
    /// Validates distinctness and adjacency against `g`.
    pub fn new(g: &Graph, vertices: Vec<VertexId>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidPath("empty path".into()));
        }
        for &v in &vertices {
            g.check_active(v)?;
        }
        let distinct: BTreeSet<_> = vertices.iter().collect();
        if distinct.len() != vertices.len() {
            return Err(Error::InvalidPath("repeated vertex".into()));
        }
        if let Some(w) = vertices.windows(2).find(|w| !g.has_edge(w[0], w[1])) {
            return Err(Error::InvalidPath(format!("{} and {} are not adjacent", w[0], w[1])));
        }
        Ok(OrderedPath(vertices))
    }

    pub(crate) fn from_vec_unchecked(vertices: Vec<VertexId>) -> Self {
        OrderedPath(vertices)
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    /// Number of vertices, not edges.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn source(&self) -> VertexId {
        self.0[0]
    }

    pub fn target(&self) -> VertexId {
        *self.0.last().expect("paths are non-empty")
    }

    /// Everything except the two endpoints.
    pub fn interior(&self) -> &[VertexId] {
        if self.0.len() <= 2 {
            &[]
        } else {
            &self.0[1..self.0.len() - 1]
        }
    }

    pub fn into_vec(self) -> Vec<VertexId> {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|v| (v - 1, v))).unwrap()
    }

    fn grid3() -> Graph {
        let mut edges = Vec::new();
        for r in 0..3 {
            for c in 0..3 {
                let v = r * 3 + c;
                if c + 1 < 3 {
                    edges.push((v, v + 1));
                }
                if r + 1 < 3 {
                    edges.push((v, v + 3));
                }
            }
        }
        Graph::from_edges(9, edges).unwrap()
    }

    fn set(xs: &[VertexId]) -> BTreeSet<VertexId> {
        xs.iter().copied().collect()
    }

    #[test]
    fn shortest_path_through_prefers_free_vertices() {
        let square = Graph::from_edges(4, [(0, 1), (1, 3), (3, 2), (2, 0)]).unwrap();
        assert_eq!(square.shortest_path(0, 3).unwrap().vertices(), &[0, 1, 3]);
        assert_eq!(square.shortest_path_through(0, 3, &[]).unwrap().vertices(), &[0, 1, 3]);
        assert_eq!(square.shortest_path_through(0, 3, &[2]).unwrap().vertices(), &[0, 2, 3]);
        // Length still comes first.
        let g = Graph::from_edges(5, [(0, 1), (1, 4), (0, 2), (2, 3), (3, 4)]).unwrap();
        assert_eq!(g.shortest_path_through(0, 4, &[2, 3]).unwrap().vertices(), &[0, 1, 4]);
        assert_eq!(grid3().shortest_path_through(0, 8, &[]).unwrap().vertices(), &[0, 1, 2, 5, 8]);
        let split = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(split.shortest_path_through(0, 3, &[]), Err(Error::NoPath { .. })));
    }

    #[test]
    fn neighborhood_examples() {
        assert_eq!(path(3).neighborhood(1).unwrap(), set(&[0, 2]));
        assert!(Graph::new(2).neighborhood(0).unwrap().is_empty());
        assert_eq!(grid3().neighborhood(4).unwrap(), set(&[1, 3, 5, 7]));
    }

    #[test]
    fn neighborhood_rejects_bad_vertex() {
        let g = path(3);
        assert!(matches!(g.neighborhood(7), Err(Error::VertexOutOfRange { .. })));
        let g = g.delete_vertex(1).unwrap();
        assert!(matches!(g.neighborhood(1), Err(Error::InactiveVertex(1))));
    }

    #[test]
    fn delete_vertex_examples() {
        let tri = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let g = tri.delete_vertex(2).unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);
        assert!(!g.is_active(2));

        let g = path(3).delete_vertex(1).unwrap();
        assert!(g.edges().is_empty());
        assert_eq!(g.active_vertices().collect::<Vec<_>>(), vec![0, 2]);

        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(star.delete_vertex(0).unwrap().edges().is_empty());
        assert!(star.delete_vertex(0).unwrap().delete_vertex(0).is_err());
    }

    #[test]
    fn local_complement_examples() {
        let g = path(3).local_complement(1).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 2)]);

        let g = path(5);
        assert_eq!(g.local_complement(0).unwrap(), g);

        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(
            star.local_complement(0).unwrap().edges(),
            vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        );
    }

    #[test]
    fn local_complement_across_word_boundary() {
        let mut g = Graph::new(130);
        for v in [3, 64, 65, 129] {
            g.add_edge(100, v).unwrap();
        }
        g.add_edge(64, 129).unwrap();
        let h = g.local_complement(100).unwrap();
        assert!(!h.has_edge(64, 129));
        assert!(h.has_edge(3, 129) && h.has_edge(64, 65) && h.has_edge(3, 64));
        assert_eq!(h.local_complement(100).unwrap(), g);
    }

    #[test]
    fn shortest_path_examples() {
        assert_eq!(path(3).shortest_path(0, 2).unwrap().vertices(), &[0, 1, 2]);
        assert_eq!(grid3().shortest_path(0, 8).unwrap().vertices(), &[0, 1, 2, 5, 8]);
        assert_eq!(grid3().shortest_path(4, 4).unwrap().vertices(), &[4]);
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(g.shortest_path(0, 3), Err(Error::NoPath { .. })));
    }

    #[test]
    fn eccentricity_examples() {
        assert_eq!(grid3().eccentricity(4).unwrap(), 2);
        assert_eq!(grid3().eccentricity(0).unwrap(), 4);
        assert_eq!(path(5).eccentricity(2).unwrap(), 2);
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(g.eccentricity(0), Err(Error::Disconnected)));
    }

    #[test]
    fn is_tree_examples() {
        assert!(path(6).is_tree());
        assert!(!Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap().is_tree());
        assert!(!Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap().is_tree());
        assert!(Graph::new(1).is_tree());
    }

    #[test]
    fn json_is_normalized() {
        let g = Graph::from_json_str(r#"{"n":4,"edges":[[3,1],[0,1],[1,3]]}"#).unwrap();
        assert_eq!(g.to_json_string(), r#"{"n":4,"edges":[[0,1],[1,3]]}"#);
        assert!(Graph::from_json_str(r#"{"n":2,"edges":[[1,1]]}"#).is_err());
        assert!(Graph::from_json_str(r#"{"n":2,"edges":[[0,2]]}"#).is_err());
    }

    #[test]
    fn ordered_path_validation() {
        let g = path(4);
        assert!(OrderedPath::new(&g, vec![0, 1, 2]).is_ok());
        assert!(OrderedPath::new(&g, vec![0, 2]).is_err());
        assert!(OrderedPath::new(&g, vec![0, 1, 0]).is_err());
        let p = OrderedPath::new(&g, vec![0, 1, 2, 3]).unwrap();
        assert_eq!(p.interior(), &[1, 2]);
        assert_eq!((p.source(), p.target()), (0, 3));
    }
}
