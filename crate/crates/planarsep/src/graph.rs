//! Planar graphs stored as rotation systems.
//!
//! Each node carries a clockwise ordering of its neighbors; that ordering is
//! the embedding. Faces are traced with the predecessor rule: a walk arriving
//! at `y` along the directed edge `(x, y)` leaves through the neighbor
//! immediately before `x` in `y`'s rotation. Under this rule bounded faces
//! come out as clockwise walks and the unbounded face as a counterclockwise
//! one. A single directed edge on the unbounded face is stored as the outer
//! witness.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

pub type NodeId = u32;
pub type PartId = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("adjacency not symmetric: {0} lists {1} but {1} does not list {0}")]
    AsymmetricAdjacency(NodeId, NodeId),
    #[error("self-loop or parallel edge at node {0}")]
    NotSimple(NodeId),
    #[error("rotation system is not a plane embedding (component with V={v} E={e} F={f})")]
    NotPlanarEmbedding { v: usize, e: usize, f: usize },
    #[error("outer witness ({0},{1}) is not a directed edge lying on a traced face")]
    BadOuterWitness(NodeId, NodeId),
    #[error("node id {0} out of range for n={1}")]
    BadNodeId(NodeId, u32),
    #[error("malformed input: {0}")]
    SchemaViolation(String),
}

/// One face of the embedding as a closed walk of directed edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub walk: Vec<(NodeId, NodeId)>,
    pub is_outer: bool,
}

impl Face {
    pub fn len(&self) -> usize {
        self.walk.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walk.is_empty()
    }
}

/// An embedded planar graph. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarGraph {
    n: u32,
    rotations: Vec<Vec<NodeId>>,
    /// position of `u` in `rotations[v]`, for O(1) rotation queries
    pos: Vec<HashMap<NodeId, u32>>,
    outer: (NodeId, NodeId),
    coords: Option<Vec<(f64, f64)>>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: u32,
    rotations: Vec<Vec<NodeId>>,
    outer: (NodeId, NodeId),
    #[serde(skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<(f64, f64)>>,
}

impl PlanarGraph {
    /// Validates and builds a graph from per-node clockwise neighbor lists.
    pub fn build(
        n: u32,
        rotations: Vec<Vec<NodeId>>,
        outer: (NodeId, NodeId),
    ) -> Result<Self, GraphError> {
        if rotations.len() != n as usize {
            return Err(GraphError::SchemaViolation(format!(
                "expected {} rotations, got {}",
                n,
                rotations.len()
            )));
        }
        let mut pos = Vec::with_capacity(n as usize);
        for (v, rot) in rotations.iter().enumerate() {
            let v = v as NodeId;
            let mut seen = HashMap::new();
            for (i, &u) in rot.iter().enumerate() {
                if u >= n {
                    return Err(GraphError::BadNodeId(u, n));
                }
                if u == v || seen.insert(u, i as u32).is_some() {
                    return Err(GraphError::NotSimple(v));
                }
            }
            pos.push(seen);
        }
        for v in 0..n {
            for &u in &rotations[v as usize] {
                if !pos[u as usize].contains_key(&v) {
                    return Err(GraphError::AsymmetricAdjacency(v, u));
                }
            }
        }
        let g = PlanarGraph {
            n,
            rotations,
            pos,
            outer,
            coords: None,
        };
        g.check_euler()?;
        g.check_outer()?;
        Ok(g)
    }

    pub fn with_coords(mut self, coords: Vec<(f64, f64)>) -> Self {
        self.coords = Some(coords);
        self
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.rotations.iter().map(|r| r.len()).sum::<usize>() / 2
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        0..self.n
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.rotations[v as usize]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.rotations[v as usize].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.pos[u as usize].contains_key(&v)
    }

    /// Position of `u` in `v`'s clockwise rotation.
    pub fn rotation_pos(&self, v: NodeId, u: NodeId) -> Option<u32> {
        self.pos[v as usize].get(&u).copied()
    }

    pub fn outer_witness(&self) -> (NodeId, NodeId) {
        self.outer
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    /// Neighbor immediately counterclockwise of `u` around `v` (the
    /// predecessor in the clockwise rotation).
    pub fn rotation_prev(&self, v: NodeId, u: NodeId) -> NodeId {
        let rot = &self.rotations[v as usize];
        let i = self.pos[v as usize][&u] as usize;
        rot[(i + rot.len() - 1) % rot.len()]
    }

    /// Neighbor immediately clockwise of `u` around `v`.
    pub fn rotation_next(&self, v: NodeId, u: NodeId) -> NodeId {
        let rot = &self.rotations[v as usize];
        let i = self.pos[v as usize][&u] as usize;
        rot[(i + 1) % rot.len()]
    }

    /// The directed edge following `(x, y)` on its face walk.
    pub fn next_dart(&self, x: NodeId, y: NodeId) -> (NodeId, NodeId) {
        (y, self.rotation_prev(y, x))
    }

    /// Traces every face walk. Each directed edge appears in exactly one walk;
    /// the walk containing the outer witness is flagged.
    pub fn trace_faces(&self) -> Vec<Face> {
        let mut faces = Vec::new();
        let mut seen: HashMap<(NodeId, NodeId), bool> = HashMap::new();
        for x in 0..self.n {
            for &y in &self.rotations[x as usize] {
                if seen.contains_key(&(x, y)) {
                    continue;
                }
                let mut walk = Vec::new();
                let mut dart = (x, y);
                loop {
                    walk.push(dart);
                    seen.insert(dart, true);
                    dart = self.next_dart(dart.0, dart.1);
                    if dart == (x, y) {
                        break;
                    }
                }
                let is_outer = walk.contains(&self.outer);
                faces.push(Face { walk, is_outer });
            }
        }
        if self.m() == 0 {
            faces.push(Face {
                walk: Vec::new(),
                is_outer: true,
            });
        }
        faces
    }

    /// Index of the face carrying each directed edge.
    pub fn face_of_darts(&self) -> (Vec<Face>, HashMap<(NodeId, NodeId), usize>) {
        let faces = self.trace_faces();
        let mut map = HashMap::new();
        for (i, f) in faces.iter().enumerate() {
            for &d in &f.walk {
                map.insert(d, i);
            }
        }
        (faces, map)
    }

    pub fn connected_components(&self) -> Vec<Vec<NodeId>> {
        let mut comp = vec![u32::MAX; self.n as usize];
        let mut out: Vec<Vec<NodeId>> = Vec::new();
        for s in 0..self.n {
            if comp[s as usize] != u32::MAX {
                continue;
            }
            let id = out.len() as u32;
            let mut stack = vec![s];
            let mut members = vec![];
            comp[s as usize] = id;
            while let Some(v) = stack.pop() {
                members.push(v);
                for &u in self.neighbors(v) {
                    if comp[u as usize] == u32::MAX {
                        comp[u as usize] = id;
                        stack.push(u);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() <= 1
    }

    pub fn bfs_depths(&self, source: NodeId) -> Vec<u32> {
        let mut d = vec![u32::MAX; self.n as usize];
        let mut queue = std::collections::VecDeque::new();
        d[source as usize] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for &u in self.neighbors(v) {
                if d[u as usize] == u32::MAX {
                    d[u as usize] = d[v as usize] + 1;
                    queue.push_back(u);
                }
            }
        }
        d
    }

    /// Exact diameter of a connected graph by repeated BFS.
    pub fn diameter(&self) -> u32 {
        let mut diam = 0;
        for v in 0..self.n {
            let d = self.bfs_depths(v);
            for x in d {
                if x != u32::MAX && x > diam {
                    diam = x;
                }
            }
        }
        diam
    }

    fn check_euler(&self) -> Result<(), GraphError> {
        let faces = self.trace_faces();
        let (_, dart_face) = {
            let mut map = HashMap::new();
            for (i, f) in faces.iter().enumerate() {
                for &d in &f.walk {
                    map.insert(d, i);
                }
            }
            (&faces, map)
        };
        // Euler's formula must hold separately in every connected component.
        for members in self.connected_components() {
            let v = members.len();
            let e: usize = members
                .iter()
                .map(|&x| self.degree(x))
                .sum::<usize>()
                / 2;
            if e == 0 {
                continue;
            }
            let mut fset = std::collections::HashSet::new();
            for &x in &members {
                for &y in self.neighbors(x) {
                    fset.insert(dart_face[&(x, y)]);
                }
            }
            let f = fset.len();
            if v + f != e + 2 {
                return Err(GraphError::NotPlanarEmbedding { v, e, f });
            }
        }
        Ok(())
    }

    fn check_outer(&self) -> Result<(), GraphError> {
        if self.m() == 0 {
            if self.outer.0 < self.n && self.outer.0 == self.outer.1 {
                return Ok(());
            }
            return Err(GraphError::BadOuterWitness(self.outer.0, self.outer.1));
        }
        let (u, v) = self.outer;
        if u >= self.n || v >= self.n || !self.has_edge(u, v) {
            return Err(GraphError::BadOuterWitness(u, v));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let j = GraphJson {
            n: self.n,
            rotations: self.rotations.clone(),
            outer: self.outer,
            coords: self.coords.clone(),
        };
        serde_json::to_string(&j).expect("graph serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, GraphError> {
        let j: GraphJson = serde_json::from_str(s)
            .map_err(|e| GraphError::SchemaViolation(e.to_string()))?;
        let g = PlanarGraph::build(j.n, j.rotations, j.outer)?;
        Ok(match j.coords {
            Some(c) => g.with_coords(c),
            None => g,
        })
    }

    /// The embedding restricted to a node subset. Rotations keep their cyclic
    /// order; edges leaving the subset are dropped. The surviving graph keeps
    /// global node ids; callers track membership separately.
    pub fn induced_rotations(&self, members: &[NodeId]) -> Vec<Vec<NodeId>> {
        let mut keep = vec![false; self.n as usize];
        for &v in members {
            keep[v as usize] = true;
        }
        let mut rots = vec![Vec::new(); self.n as usize];
        for &v in members {
            rots[v as usize] = self.rotations[v as usize]
                .iter()
                .copied()
                .filter(|&u| keep[u as usize])
                .collect();
        }
        rots
    }

    /// Finds, for the subgraph induced by `members`, the face of the induced
    /// embedding that contains the region of this graph's outer face. Returns
    /// the darts of that induced face walk.
    ///
    /// Removed edges and removed vertices merge the faces around them, so the
    /// induced outer face is located by union-find over the original faces.
    pub fn induced_outer_face(&self, members: &[NodeId]) -> Vec<(NodeId, NodeId)> {
        let mut keep = vec![false; self.n as usize];
        for &v in members {
            keep[v as usize] = true;
        }
        let (faces, dart_face) = self.face_of_darts();
        let mut dsu = Dsu::new(faces.len());
        for x in 0..self.n {
            for &y in self.neighbors(x) {
                if x < y && !(keep[x as usize] && keep[y as usize]) {
                    dsu.union(dart_face[&(x, y)], dart_face[&(y, x)]);
                }
            }
        }
        for x in 0..self.n {
            if keep[x as usize] {
                continue;
            }
            let rot = self.neighbors(x);
            for i in 1..rot.len() {
                dsu.union(dart_face[&(x, rot[0])], dart_face[&(x, rot[i])]);
            }
        }
        let outer_idx = faces.iter().position(|f| f.is_outer).expect("outer face");
        let outer_class = dsu.find(outer_idx);

        // Trace faces of the induced embedding, identify each one's class by
        // any of its corners and return the one matching the outer class.
        let rots = self.induced_rotations(members);
        let pos: Vec<HashMap<NodeId, usize>> = rots
            .iter()
            .map(|r| r.iter().enumerate().map(|(i, &u)| (u, i)).collect())
            .collect();
        let prev = |v: NodeId, u: NodeId| -> NodeId {
            let r = &rots[v as usize];
            let i = pos[v as usize][&u];
            r[(i + r.len() - 1) % r.len()]
        };
        let mut seen: std::collections::HashSet<(NodeId, NodeId)> = Default::default();
        for &x0 in members {
            for &y0 in &rots[x0 as usize] {
                if seen.contains(&(x0, y0)) {
                    continue;
                }
                let mut walk = Vec::new();
                let mut dart = (x0, y0);
                loop {
                    walk.push(dart);
                    seen.insert(dart);
                    dart = (dart.1, prev(dart.1, dart.0));
                    if dart == (x0, y0) {
                        break;
                    }
                }
                // Corner of this induced face at y between incoming x and the
                // outgoing prev(y, x): in the original rotation the fan of
                // corners between those two edges all collapsed here. The
                // original face of (y, rotation_prev_original(y, x)) sits in
                // that fan.
                let (x, y) = walk[0];
                let orig = self.rotation_prev(y, x);
                let class = dsu.find(dart_face[&(y, orig)]);
                if class == outer_class {
                    return walk;
                }
            }
        }
        // Subset with no internal edges: every singleton sits in the merged
        // outer region.
        Vec::new()
    }
}

impl PlanarGraph {
    /// The induced subgraph on `members` as a standalone graph with dense
    /// ids (sorted member order), outer face inherited from this embedding.
    pub fn induced_subgraph(&self, members: &[NodeId]) -> (PlanarGraph, Vec<NodeId>) {
        let mut old_ids: Vec<NodeId> = members.to_vec();
        old_ids.sort_unstable();
        let mut new_id = HashMap::new();
        for (i, &v) in old_ids.iter().enumerate() {
            new_id.insert(v, i as NodeId);
        }
        let rots: Vec<Vec<NodeId>> = old_ids
            .iter()
            .map(|&v| {
                self.neighbors(v)
                    .iter()
                    .filter_map(|u| new_id.get(u).copied())
                    .collect()
            })
            .collect();
        let walk = self.induced_outer_face(&old_ids);
        let outer = match walk.first() {
            Some(&(x, y)) => (new_id[&x], new_id[&y]),
            None => (0, 0),
        };
        let g = PlanarGraph::build(old_ids.len() as u32, rots, outer)
            .expect("induced embedding stays planar");
        (g, old_ids)
    }
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
        }
        self.parent[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Disjoint connected parts over some subset of the nodes. Uncovered nodes
/// carry [`Partition::NONE`]; algorithms over sub-instances (components of a
/// residual graph) rely on partial coverage.
#[derive(Debug, Clone)]
pub struct Partition {
    pub part_of: Vec<PartId>,
    pub parts: Vec<Vec<NodeId>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("part {0} induces a disconnected subgraph")]
    DisconnectedPart(PartId),
    #[error("partition does not cover all nodes")]
    NotCovering,
}

impl Partition {
    pub const NONE: PartId = u32::MAX;

    pub fn single(g: &PlanarGraph) -> Partition {
        Partition {
            part_of: vec![0; g.n() as usize],
            parts: vec![(0..g.n()).collect()],
        }
    }

    /// A full cover of the node set.
    pub fn from_assignment(
        g: &PlanarGraph,
        part_of: Vec<PartId>,
    ) -> Result<Partition, PartitionError> {
        if part_of.len() != g.n() as usize || part_of.contains(&Partition::NONE) {
            return Err(PartitionError::NotCovering);
        }
        let k = part_of.iter().map(|&p| p + 1).max().unwrap_or(0);
        let mut parts = vec![Vec::new(); k as usize];
        for (v, &p) in part_of.iter().enumerate() {
            parts[p as usize].push(v as NodeId);
        }
        let p = Partition { part_of, parts };
        p.validate(g)?;
        Ok(p)
    }

    /// Parts over a subset of the nodes; the rest are uncovered.
    pub fn from_parts(
        g: &PlanarGraph,
        parts: Vec<Vec<NodeId>>,
    ) -> Result<Partition, PartitionError> {
        let mut part_of = vec![Partition::NONE; g.n() as usize];
        for (i, members) in parts.iter().enumerate() {
            for &v in members {
                part_of[v as usize] = i as PartId;
            }
        }
        let p = Partition { part_of, parts };
        p.validate(g)?;
        Ok(p)
    }

    pub fn covers(&self, v: NodeId) -> bool {
        self.part_of[v as usize] != Partition::NONE
    }

    pub fn validate(&self, g: &PlanarGraph) -> Result<(), PartitionError> {
        for (i, members) in self.parts.iter().enumerate() {
            if members.is_empty() {
                continue;
            }
            let mut seen: std::collections::HashSet<NodeId> = Default::default();
            let mut stack = vec![members[0]];
            seen.insert(members[0]);
            while let Some(v) = stack.pop() {
                for &u in g.neighbors(v) {
                    if self.part_of[u as usize] == i as PartId && seen.insert(u) {
                        stack.push(u);
                    }
                }
            }
            if seen.len() != members.len() {
                return Err(PartitionError::DisconnectedPart(i as PartId));
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn triangle() -> PlanarGraph {
        PlanarGraph::build(3, vec![vec![1, 2], vec![2, 0], vec![0, 1]], (0, 1)).unwrap()
    }

    #[test]
    fn triangle_has_two_faces() {
        let g = triangle();
        let faces = g.trace_faces();
        assert_eq!(faces.len(), 2);
        assert_eq!(faces.iter().filter(|f| f.is_outer).count(), 1);
        assert_eq!(g.n() as i64 - g.m() as i64 + faces.len() as i64, 2);
    }

    #[test]
    fn single_node_has_one_outer_face() {
        let g = PlanarGraph::build(1, vec![vec![]], (0, 0)).unwrap();
        let faces = g.trace_faces();
        assert_eq!(faces.len(), 1);
        assert!(faces[0].is_outer);
    }

    #[test]
    fn asymmetric_adjacency_rejected() {
        let err = PlanarGraph::build(2, vec![vec![1], vec![]], (0, 1)).unwrap_err();
        assert_eq!(err, GraphError::AsymmetricAdjacency(0, 1));
    }

    #[test]
    fn parallel_edge_rejected() {
        let err = PlanarGraph::build(2, vec![vec![1, 1], vec![0, 0]], (0, 1)).unwrap_err();
        assert!(matches!(err, GraphError::NotSimple(_)));
    }

    #[test]
    fn k5_rotations_fail_euler() {
        // K5 is not planar; any rotation system for it fails the face count.
        let mut rots = Vec::new();
        for v in 0..5u32 {
            rots.push((0..5).filter(|&u| u != v).collect::<Vec<_>>());
        }
        let err = PlanarGraph::build(5, rots, (0, 1)).unwrap_err();
        assert!(matches!(err, GraphError::NotPlanarEmbedding { .. }));
    }

    #[test]
    fn four_cycle_two_faces_of_length_four() {
        let g = PlanarGraph::build(
            4,
            vec![vec![1, 3], vec![2, 0], vec![3, 1], vec![0, 2]],
            (0, 3),
        )
        .unwrap();
        let faces = g.trace_faces();
        assert_eq!(faces.len(), 2);
        assert!(faces.iter().all(|f| f.len() == 4));
    }

    #[test]
    fn tree_has_one_face() {
        // star with 3 leaves
        let g = PlanarGraph::build(4, vec![vec![1, 2, 3], vec![0], vec![0], vec![0]], (1, 0))
            .unwrap();
        let faces = g.trace_faces();
        assert_eq!(faces.len(), 1);
        assert_eq!(faces[0].len(), 6);
    }

    #[test]
    fn json_round_trip_is_byte_exact() {
        let g = triangle();
        let s = g.to_json();
        let g2 = PlanarGraph::from_json(&s).unwrap();
        assert_eq!(g2.to_json(), s);
        assert_eq!(g, g2);
    }

    #[test]
    fn duplicate_edge_in_json_is_schema_violation() {
        let s = r#"{"n":2,"rotations":[[1,1],[0,0]],"outer":[0,1]}"#;
        match PlanarGraph::from_json(s) {
            Err(GraphError::NotSimple(_)) => {}
            other => panic!("expected NotSimple, got {other:?}"),
        }
    }

    #[test]
    fn induced_outer_face_of_full_graph_is_outer() {
        let g = triangle();
        let members: Vec<NodeId> = (0..3).collect();
        let walk = g.induced_outer_face(&members);
        assert!(walk.contains(&(0, 1)));
    }
}
