//! Root selection and BFS spanning-tree (DODAG) construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, OrderedPath, VertexId};

/// Vertex of minimum eccentricity, lowest id on ties.
pub fn select_root(g: &Graph) -> Result<VertexId> {
    let mut best: Option<(usize, VertexId)> = None;
    for v in g.active_vertices() {
        let ecc = g.eccentricity(v)?;
        if !matches!(best, Some((e, _)) if ecc >= e) {
            best = Some((ecc, v));
        }
    }
    best.map(|(_, v)| v)
        .ok_or_else(|| Error::InvalidParameter("graph has no active vertices".into()))
}

/// Rooted spanning tree. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DodagTree {
    root: VertexId,
    /// `None` for ids outside the tree; the root maps to itself.
    parent: Vec<Option<VertexId>>,
    depth: Vec<Option<usize>>,
    tree_graph: Graph,
}

/// BFS tree from `root`, lowest-id discoverer as parent.
pub fn build_dodag(g: &Graph, root: VertexId) -> Result<DodagTree> {
    let parent = g.bfs_parents(root)?;
    if g.active_vertices().any(|v| parent[v].is_none()) {
        return Err(Error::Disconnected);
    }
    DodagTree::from_parents(g.vertex_count(), root, parent)
}

impl DodagTree {
    /// Builds from a parent map, checking it describes a tree rooted at
    /// `root`. Ids with `None` parent are left out of the tree graph.
    pub fn from_parents(n: usize, root: VertexId, parent: Vec<Option<VertexId>>) -> Result<Self> {
        if parent.len() != n || root >= n || parent[root] != Some(root) {
            return Err(Error::InvalidParameter("parent map must cover n ids and fix the root".into()));
        }
        let mut depth = vec![None; n];
        depth[root] = Some(0);
        // Resolve depths by walking up; a walk longer than n means a cycle.
        for v in 0..n {
            if parent[v].is_none() || depth[v].is_some() {
                continue;
            }
            let mut chain = vec![v];
            let mut cur = v;
            let base = loop {
                let p = parent[cur].ok_or(Error::NotATree)?;
                if p >= n {
                    return Err(Error::VertexOutOfRange { vertex: p, n });
                }
                if let Some(d) = depth[p] {
                    break d;
                }
                if chain.len() > n {
                    return Err(Error::NotATree);
                }
                chain.push(p);
                cur = p;
            };
            for (i, &u) in chain.iter().rev().enumerate() {
                depth[u] = Some(base + 1 + i);
            }
        }

        let mut tree_graph = Graph::new(n);
        for (v, &pv) in parent.iter().enumerate() {
            match pv {
                Some(p) if v != root => tree_graph.add_edge(v, p)?,
                Some(_) => {}
                None => tree_graph.delete_vertex_in_place(v)?,
            }
        }
        Ok(DodagTree {
            root,
            parent,
            depth,
            tree_graph,
        })
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent.get(v).copied().flatten()
    }

    pub fn depth_of(&self, v: VertexId) -> Option<usize> {
        self.depth.get(v).copied().flatten()
    }

    /// Maximum vertex depth.
    pub fn depth(&self) -> usize {
        self.depth.iter().flatten().copied().max().unwrap_or(0)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.parent(v).is_some()
    }

    /// The tree's edge set as a graph over the same id range.
    pub fn tree_graph(&self) -> &Graph {
        &self.tree_graph
    }

    /// `(v, parent(v), …, root)`.
    pub fn path_to_root(&self, v: VertexId) -> Result<OrderedPath> {
        if !self.contains(v) {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                n: self.parent.len(),
            });
        }
        let mut seq = Vec::with_capacity(self.depth_of(v).unwrap_or(0) + 1);
        let mut cur = v;
        seq.push(cur);
        while cur != self.root {
            cur = self.parent[cur].expect("ancestors are in the tree");
            seq.push(cur);
        }
        Ok(OrderedPath::from_vec_unchecked(seq))
    }

    pub fn to_json(&self) -> TreeJson {
        TreeJson {
            root: self.root,
            parent: self.parent.clone(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("tree JSON is always serializable")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: TreeJson = serde_json::from_str(s)?;
        DodagTree::from_parents(raw.parent.len(), raw.root, raw.parent)
    }
}

/// Wire form: `{"root": r, "parent": [p_0, p_1, …]}`; the root is its own
/// parent and ids outside the tree are `null`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeJson {
    pub root: VertexId,
    pub parent: Vec<Option<VertexId>>,
}
