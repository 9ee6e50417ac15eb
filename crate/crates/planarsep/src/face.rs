//! Fundamental edges and their faces.
//!
//! A fundamental edge of a part tree is a node pair not joined by a tree
//! edge; it closes the tree path between its endpoints into a Jordan curve,
//! and the face is the side of that curve away from the root's outer corner.
//! Everything here is computed from tree data and rotation positions: the
//! closed-form face weights, interval-based membership, chord containment,
//! the weights of the fan of virtual faces grown from one endpoint, and the
//! two outside counts used when every chord is light.
//!
//! Conventions: positions around a node are anchored at the parent edge
//! (slot 0), growing clockwise. For an ancestor edge `u -> v` with first path
//! node `z`, the edge is left-oriented when `v`'s slot is clockwise after
//! `z`'s, and the left order pairs with left-oriented and non-ancestor edges
//! while the right order pairs with right-oriented ones.

use crate::graph::{NodeId, PartId, Partition, PlanarGraph};
use crate::tree::RootedForest;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FaceError {
    #[error("{0}-{1} is a tree edge, not a fundamental edge")]
    IsTreeEdge(NodeId, NodeId),
    #[error("endpoints {0} and {1} lie in different parts")]
    CrossPart(NodeId, NodeId),
    #[error("node {0} is not a tree leaf")]
    NotALeaf(NodeId),
    #[error("node {0} is not strictly inside the face")]
    NotInside(NodeId),
    #[error("empty edge set")]
    EmptySet,
    #[error("edge {0}-{1} is contained in another fundamental face")]
    PreconditionNotContained(NodeId, NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Real,
    Virtual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeCase {
    NonAncestor {
        lca: NodeId,
    },
    /// u is an ancestor of v and the edge hangs counterclockwise of the path
    AncestorLeft {
        z: NodeId,
    },
    /// u is an ancestor of v and the edge hangs clockwise of the path
    AncestorRight {
        z: NodeId,
    },
}

/// A classified fundamental edge, normalized so that `u` precedes `v` in the
/// left order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FundamentalEdge {
    pub u: NodeId,
    pub v: NodeId,
    pub kind: EdgeKind,
    pub case: EdgeCase,
}

impl FundamentalEdge {
    /// The order this face's arithmetic lives in: the left positions for
    /// non-ancestor and left-oriented edges, the right positions otherwise.
    pub fn pos<'a>(&self, forest: &'a RootedForest) -> &'a [u32] {
        match self.case {
            EdgeCase::AncestorRight { .. } => &forest.pos_r,
            _ => &forest.pos_l,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Border,
    Inside,
    Outside,
}

/// All real fundamental edges of one part, as (min, max) id pairs.
pub fn real_fundamental_edges(
    g: &PlanarGraph,
    partition: &Partition,
    forest: &RootedForest,
    part: PartId,
) -> Vec<(NodeId, NodeId)> {
    let mut out = Vec::new();
    for &a in &partition.parts[part as usize] {
        for &b in g.neighbors(a) {
            if a < b && partition.part_of[b as usize] == part && !forest.is_tree_edge(a, b) {
                out.push((a, b));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Classifies the fundamental edge between a and b. `kind` records whether
/// the pair is a graph edge.
pub fn classify(
    g: &PlanarGraph,
    partition: &Partition,
    forest: &RootedForest,
    a: NodeId,
    b: NodeId,
) -> Result<FundamentalEdge, FaceError> {
    debug_assert!(forest.orders_ready);
    if partition.part_of[a as usize] != partition.part_of[b as usize] {
        return Err(FaceError::CrossPart(a, b));
    }
    if forest.is_tree_edge(a, b) {
        return Err(FaceError::IsTreeEdge(a, b));
    }
    let (u, v) = if forest.pos_l[a as usize] < forest.pos_l[b as usize] {
        (a, b)
    } else {
        (b, a)
    };
    let kind = if g.has_edge(u, v) { EdgeKind::Real } else { EdgeKind::Virtual };
    let case = if forest.is_ancestor(u, v) {
        let z = forest
            .children_cw(g, u)
            .into_iter()
            .find(|&c| {
                let (lo, hi) = forest.interval_l(c);
                let p = forest.pos_l[v as usize];
                p >= lo && p <= hi
            })
            .expect("an ancestor has a child toward v");
        // a virtual edge has no rotation slot yet; the full augmentation
        // hangs it on the face side inherited from the enclosing edge, so
        // classification by slots applies to real edges only
        let pv = forest.anchored_pos(g, u, v);
        let pz = forest.anchored_pos(g, u, z);
        if pv > pz {
            EdgeCase::AncestorLeft { z }
        } else {
            EdgeCase::AncestorRight { z }
        }
    } else {
        EdgeCase::NonAncestor { lca: forest.climb_lca(u, v) }
    };
    Ok(FundamentalEdge { u, v, kind, case })
}

/// Sum of subtree sizes of u's tree children whose slot lies strictly
/// between `lo` and `hi` (anchored positions, exclusive on both sides).
fn corner_sum(
    g: &PlanarGraph,
    forest: &RootedForest,
    x: NodeId,
    lo: u32,
    hi: u32,
) -> u64 {
    forest
        .children_cw(g, x)
        .into_iter()
        .filter(|&c| {
            let p = forest.anchored_pos(g, x, c);
            p > lo && p < hi
        })
        .map(|c| forest.subtree[c as usize] as u64)
        .sum()
}

/// Strictly-inside proper descendants of `u` counted by the weight formula:
/// the subtrees of u's children hanging in the face corner at u.
pub fn descend_inside_u(g: &PlanarGraph, forest: &RootedForest, fe: &FundamentalEdge) -> u64 {
    let pv = forest.anchored_pos(g, fe.u, fe.v);
    match fe.case {
        EdgeCase::NonAncestor { .. } => corner_sum(g, forest, fe.u, 0, pv),
        EdgeCase::AncestorLeft { z } => {
            let pz = forest.anchored_pos(g, fe.u, z);
            corner_sum(g, forest, fe.u, pz, pv)
        }
        EdgeCase::AncestorRight { z } => {
            let pz = forest.anchored_pos(g, fe.u, z);
            corner_sum(g, forest, fe.u, pv, pz)
        }
    }
}

/// The matching count at the deep endpoint v: for non-ancestor and
/// left-oriented edges the in-face children sit clockwise after the edge to
/// u, for right-oriented ones between the parent slot and that edge.
pub fn descend_inside_v(g: &PlanarGraph, forest: &RootedForest, fe: &FundamentalEdge) -> u64 {
    let pu = forest.anchored_pos(g, fe.v, fe.u);
    let deg = g.degree(fe.v) as u32 + 2;
    match fe.case {
        EdgeCase::NonAncestor { .. } => corner_sum(g, forest, fe.v, pu, deg),
        EdgeCase::AncestorLeft { .. } => corner_sum(g, forest, fe.v, pu, deg),
        EdgeCase::AncestorRight { .. } => corner_sum(g, forest, fe.v, 0, pu),
    }
}

/// The face weight: a closed form over positions, depths, subtree sizes and
/// the two corner sums. Equals the number of nodes strictly inside the face
/// for ancestor edges, and that count plus the meet-to-v path for
/// non-ancestor edges.
pub fn weight(g: &PlanarGraph, forest: &RootedForest, fe: &FundamentalEdge) -> u64 {
    debug_assert!(forest.orders_ready);
    let pu = descend_inside_u(g, forest, fe);
    let pv = descend_inside_v(g, forest, fe);
    let pos = fe.pos(forest);
    match fe.case {
        EdgeCase::NonAncestor { .. } => {
            let excl = forest.subtree[fe.u as usize] as u64 - 1;
            pu + pv + pos[fe.v as usize] as u64 - (pos[fe.u as usize] as u64 + excl) + 1
        }
        EdgeCase::AncestorLeft { z } | EdgeCase::AncestorRight { z } => {
            let dp = pos[fe.v as usize] as u64 - pos[z as usize] as u64;
            let dd = forest.depth[fe.v as usize] as u64 - forest.depth[z as usize] as u64;
            pu + pv + dp - dd
        }
    }
}

/// Number of nodes of the face (border plus inside), from the weight alone.
pub fn face_size(g: &PlanarGraph, forest: &RootedForest, fe: &FundamentalEdge) -> u64 {
    let w = weight(g, forest, fe);
    match fe.case {
        EdgeCase::NonAncestor { lca } => {
            // weight counts inside plus the meet-to-v path; the face instead
            // carries the whole border
            let du = forest.depth[fe.u as usize] as u64;
            let dw = forest.depth[lca as usize] as u64;
            w + du - dw
        }
        EdgeCase::AncestorLeft { .. } | EdgeCase::AncestorRight { .. } => {
            let border =
                forest.depth[fe.v as usize] as u64 - forest.depth[fe.u as usize] as u64 + 1;
            w + border
        }
    }
}

/// Border / inside / outside classification for every part member, from the
/// marked border set and the interval blocks of the face.
pub fn detect_face(
    g: &PlanarGraph,
    partition: &Partition,
    forest: &RootedForest,
    fe: &FundamentalEdge,
    border: &[bool],
) -> Vec<Region> {
    let n = g.n() as usize;
    let part = partition.part_of[fe.u as usize];
    let pu = descend_inside_u(g, forest, fe);
    let pv = descend_inside_v(g, forest, fe);
    let pos = fe.pos(forest);
    // contiguous block(s) of in-face positions
    let (lo, hi) = match fe.case {
        EdgeCase::NonAncestor { .. } => {
            let base = pos[fe.u as usize] as u64 + forest.subtree[fe.u as usize] as u64 - 1;
            (base - pu + 1, pos[fe.v as usize] as u64 + pv)
        }
        EdgeCase::AncestorLeft { z } | EdgeCase::AncestorRight { z } => {
            (pos[z as usize] as u64 - pu, pos[fe.v as usize] as u64 + pv)
        }
    };
    let mut out = vec![Region::Outside; n];
    for &x in &partition.parts[part as usize] {
        if border[x as usize] {
            out[x as usize] = Region::Border;
        } else {
            let p = pos[x as usize] as u64;
            if p >= lo && p <= hi {
                out[x as usize] = Region::Inside;
            }
        }
    }
    out
}

/// Border flags for the tree path between the endpoints, computed locally;
/// callers that need metered communication mark the path beforehand.
pub fn border_flags(g: &PlanarGraph, forest: &RootedForest, fe: &FundamentalEdge) -> Vec<bool> {
    let mut border = vec![false; g.n() as usize];
    for x in forest.tree_path(fe.u, fe.v) {
        border[x as usize] = true;
    }
    border
}

/// Nodes of the face (border plus inside), ascending.
pub fn face_nodes(
    g: &PlanarGraph,
    partition: &Partition,
    forest: &RootedForest,
    fe: &FundamentalEdge,
) -> Vec<NodeId> {
    let border = border_flags(g, forest, fe);
    let regions = detect_face(g, partition, forest, fe, &border);
    let part = partition.part_of[fe.u as usize];
    let mut out: Vec<NodeId> = partition.parts[part as usize]
        .iter()
        .copied()
        .filter(|&x| regions[x as usize] != Region::Outside)
        .collect();
    out.sort_unstable();
    out
}

pub fn inside_nodes(
    g: &PlanarGraph,
    partition: &Partition,
    forest: &RootedForest,
    fe: &FundamentalEdge,
) -> Vec<NodeId> {
    let border = border_flags(g, forest, fe);
    let regions = detect_face(g, partition, forest, fe, &border);
    let part = partition.part_of[fe.u as usize];
    partition.parts[part as usize]
        .iter()
        .copied()
        .filter(|&x| regions[x as usize] == Region::Inside)
        .collect()
}

// ---------------------------------------------------------------------------
// containment and extremal selection
// ---------------------------------------------------------------------------

/// Key for deterministic extremal selection: face size first, then the
/// earliest left position of u, the latest of v, then ids.
fn selection_key(
    g: &PlanarGraph,
    forest: &RootedForest,
    fe: &FundamentalEdge,
) -> (u64, u32, i64, NodeId, NodeId) {
    (
        face_size(g, forest, fe),
        forest.pos_l[fe.u as usize],
        -(forest.pos_l[fe.v as usize] as i64),
        fe.u,
        fe.v,
    )
}

/// An edge of `edges` whose face is strictly contained in no other listed
/// face: faces of maximum size qualify, since strict containment strictly
/// shrinks the node count.
pub fn select_not_contained(
    g: &PlanarGraph,
    partition: &Partition,
    forest: &RootedForest,
    edges: &[(NodeId, NodeId)],
) -> Result<FundamentalEdge, FaceError> {
    select_extremal(g, partition, forest, edges, true)
}

/// An edge whose face strictly contains no other listed face: minimum size.
pub fn select_not_contains(
    g: &PlanarGraph,
    partition: &Partition,
    forest: &RootedForest,
    edges: &[(NodeId, NodeId)],
) -> Result<FundamentalEdge, FaceError> {
    select_extremal(g, partition, forest, edges, false)
}

fn select_extremal(
    g: &PlanarGraph,
    partition: &Partition,
    forest: &RootedForest,
    edges: &[(NodeId, NodeId)],
    largest: bool,
) -> Result<FundamentalEdge, FaceError> {
    let mut best: Option<((u64, u32, i64, NodeId, NodeId), FundamentalEdge)> = None;
    for &(a, b) in edges {
        let fe = classify(g, partition, forest, a, b)?;
        let mut key = selection_key(g, forest, &fe);
        if largest {
            // invert so the minimum of the full tuple is the largest face
            key.0 = u64::MAX - key.0;
        }
        if best.as_ref().is_none_or(|(k, _)| key < *k) {
            best = Some((key, fe));
        }
    }
    best.map(|(_, fe)| fe).ok_or(FaceError::EmptySet)
}

/// Whether the face of `inner` is contained (not necessarily strictly) in
/// the face of `outer`, by node-set inclusion.
pub fn face_contained_in(
    g: &PlanarGraph,
    partition: &Partition,
    forest: &RootedForest,
    inner: &FundamentalEdge,
    outer: &FundamentalEdge,
) -> bool {
    let inner_nodes = face_nodes(g, partition, forest, inner);
    let outer_nodes: std::collections::HashSet<NodeId> =
        face_nodes(g, partition, forest, outer).into_iter().collect();
    inner_nodes.iter().all(|x| outer_nodes.contains(x))
}

// ---------------------------------------------------------------------------
// hidden chords
// ---------------------------------------------------------------------------

/// Real fundamental edges inside the face that trap the leaf `t` under
/// themselves: either neither endpoint is `u`, or one endpoint is `u` but the
/// chord's face loses some of u's in-face subtree.
pub fn hidden_edges(
    g: &PlanarGraph,
    partition: &Partition,
    forest: &RootedForest,
    fe: &FundamentalEdge,
    t: NodeId,
) -> Result<Vec<(NodeId, NodeId)>, FaceError> {
    if !forest.children_cw(g, t).is_empty() {
        return Err(FaceError::NotALeaf(t));
    }
    let part = partition.part_of[fe.u as usize];
    let border = border_flags(g, forest, fe);
    let regions = detect_face(g, partition, forest, fe, &border);
    if regions[t as usize] != Region::Inside {
        return Err(FaceError::NotInside(t));
    }
    let face_set: std::collections::HashSet<NodeId> =
        face_nodes(g, partition, forest, fe).into_iter().collect();
    // u's in-face territory, for the endpoint condition
    let u_zone: Vec<NodeId> = face_set
        .iter()
        .copied()
        .filter(|&x| forest.is_ancestor(fe.u, x))
        .collect();
    let mut out = Vec::new();
    for (a, b) in real_fundamental_edges(g, partition, forest, part) {
        if (a, b) == (fe.u.min(fe.v), fe.u.max(fe.v)) {
            continue;
        }
        let f = classify(g, partition, forest, a, b)?;
        if !face_contained_in(g, partition, forest, &f, fe) {
            continue;
        }
        let f_border = border_flags(g, forest, &f);
        let f_regions = detect_face(g, partition, forest, &f, &f_border);
        if f_regions[t as usize] != Region::Inside {
            continue;
        }
        let touches_u = a == fe.u || b == fe.u;
        let hides = if !touches_u {
            true
        } else {
            !u_zone
                .iter()
                .all(|&x| f_regions[x as usize] != Region::Outside)
        };
        if hides {
            out.push((a, b));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// full augmentation
// ---------------------------------------------------------------------------

/// Weight of the virtual face grown from `u` to every node strictly inside
/// the face, under the insertion that hugs the defining edge at `u` and keeps
/// each target's subtree inside. Pure closed-form arithmetic; targets hidden
/// behind chords still receive their formula value.
pub fn full_augmentation_weights(
    g: &PlanarGraph,
    partition: &Partition,
    forest: &RootedForest,
    fe: &FundamentalEdge,
) -> Vec<(NodeId, u64)> {
    let pos = fe.pos(forest);
    let inside = inside_nodes(g, partition, forest, fe);
    let pu_face = descend_inside_u(g, forest, fe);
    let pv_edge = forest.anchored_pos(g, fe.u, fe.v);
    let mut out = Vec::with_capacity(inside.len());
    for &z in &inside {
        let w = if forest.is_ancestor(fe.u, z) {
            // the first path node toward z
            let z1 = forest
                .children_cw(g, fe.u)
                .into_iter()
                .find(|&c| {
                    let (lo, hi) = forest.interval_l(c);
                    let p = forest.pos_l[z as usize];
                    p >= lo && p <= hi
                })
                .expect("child toward z");
            let p_z1 = forest.anchored_pos(g, fe.u, z1);
            let p_f_u = match fe.case {
                EdgeCase::AncestorRight { .. } => corner_sum(g, forest, fe.u, pv_edge, p_z1),
                _ => corner_sum(g, forest, fe.u, p_z1, pv_edge),
            };
            let n_z = forest.subtree[z as usize] as u64 - 1;
            let dp = pos[z as usize] as u64 - pos[z1 as usize] as u64;
            let dd = forest.depth[z as usize] as u64 - forest.depth[z1 as usize] as u64;
            p_f_u + n_z + dp - dd
        } else {
            let n_z = forest.subtree[z as usize] as u64 - 1;
            let excl = forest.subtree[fe.u as usize] as u64 - 1;
            pu_face + n_z + pos[z as usize] as u64 - (pos[fe.u as usize] as u64 + excl) + 1
        };
        out.push((z, w));
    }
    out
}

// ---------------------------------------------------------------------------
// the two outside counts
// ---------------------------------------------------------------------------

/// Sizes of the two outside regions split at the endpoints: nodes before `u`
/// in the face's order (plus u's out-of-face branches on that side) and
/// nodes after `v`. Requires the edge's face to be contained in no other
/// real fundamental face; together with the face the two counts cover the
/// part.
pub fn outside_partitions(
    g: &PlanarGraph,
    partition: &Partition,
    forest: &RootedForest,
    fe: &FundamentalEdge,
    check_precondition: bool,
) -> Result<(u64, u64), FaceError> {
    let part = partition.part_of[fe.u as usize];
    if check_precondition {
        let others = real_fundamental_edges(g, partition, forest, part);
        for (a, b) in others {
            if (a, b) == (fe.u.min(fe.v), fe.u.max(fe.v)) {
                continue;
            }
            let other = classify(g, partition, forest, a, b).expect("listed edge classifies");
            if face_size(g, forest, &other) > face_size(g, forest, fe)
                && face_contained_in(g, partition, forest, fe, &other)
            {
                return Err(FaceError::PreconditionNotContained(fe.u, fe.v));
            }
        }
    }
    let n_i = partition.parts[part as usize].len() as u64;
    let pos = fe.pos(forest);
    let p_v = descend_inside_v(g, forest, fe);
    let side_r = n_i - pos[fe.v as usize] as u64 - p_v;
    let side_l = match fe.case {
        EdgeCase::NonAncestor { lca } => {
            let du = forest.depth[fe.u as usize] as u64;
            let dw = forest.depth[lca as usize] as u64;
            let out_u = forest.subtree[fe.u as usize] as u64 - 1 - descend_inside_u(g, forest, fe);
            pos[fe.u as usize] as u64 - 1 - (du - dw) + out_u
        }
        EdgeCase::AncestorLeft { .. } => {
            let pv_edge = forest.anchored_pos(g, fe.u, fe.v);
            let deg = g.degree(fe.u) as u32 + 2;
            pos[fe.u as usize] as u64 - 1 + corner_sum(g, forest, fe.u, pv_edge, deg)
        }
        EdgeCase::AncestorRight { .. } => {
            let pv_edge = forest.anchored_pos(g, fe.u, fe.v);
            pos[fe.u as usize] as u64 - 1 + corner_sum(g, forest, fe.u, 0, pv_edge)
        }
    };
    Ok((side_l, side_r))
}

// ---------------------------------------------------------------------------
// virtual edge insertion
// ---------------------------------------------------------------------------

/// Inserts the edge a-b at explicit rotation indices and revalidates. Fails
/// when the chosen corners do not share a face (the Euler count drops).
pub fn insert_edge_at(
    g: &PlanarGraph,
    a: NodeId,
    slot_a: usize,
    b: NodeId,
    slot_b: usize,
) -> Result<PlanarGraph, crate::graph::GraphError> {
    let mut rots: Vec<Vec<NodeId>> = g.nodes().map(|v| g.neighbors(v).to_vec()).collect();
    rots[a as usize].insert(slot_a, b);
    rots[b as usize].insert(slot_b, a);
    PlanarGraph::build(g.n(), rots, g.outer_witness())
}

/// Attempts to materialize the virtual edge u-z inside the face: u-side slots
/// range over the face corner at u, z-side slots over all of z's corners.
/// Returns the first insertion that keeps the embedding planar.
pub fn try_insert_in_face(
    g: &PlanarGraph,
    forest: &RootedForest,
    fe: &FundamentalEdge,
    z: NodeId,
) -> Option<PlanarGraph> {
    if g.has_edge(fe.u, z) {
        return None;
    }
    for ua in u_corner_slots(g, forest, fe) {
        for zb in 0..=g.degree(z) {
            if let Ok(h) = insert_edge_at(g, fe.u, ua, z, zb) {
                return Some(h);
            }
        }
    }
    None
}

/// Insertion indices (into u's rotation) lying in the face corner at u.
fn u_corner_slots(g: &PlanarGraph, forest: &RootedForest, fe: &FundamentalEdge) -> Vec<usize> {
    let deg = g.degree(fe.u);
    let iv = g.rotation_pos(fe.u, fe.v).expect("real defining edge") as usize;
    match fe.case {
        // the corner spans from the path edge clockwise to v: insertion
        // indices from just after the path edge up to v's index
        EdgeCase::NonAncestor { .. } => {
            // a non-ancestor endpoint always has a parent: the path ascends
            let p = forest.parent[fe.u as usize].expect("non-ancestor endpoint below root");
            let anchor = g.rotation_pos(fe.u, p).unwrap() as usize;
            slots_cw_between(deg, anchor, iv)
        }
        EdgeCase::AncestorLeft { z } => {
            let iz = g.rotation_pos(fe.u, z).unwrap() as usize;
            slots_cw_between(deg, iz, iv)
        }
        EdgeCase::AncestorRight { z } => {
            let iz = g.rotation_pos(fe.u, z).unwrap() as usize;
            slots_cw_between(deg, iv, iz)
        }
    }
}

/// Insertion indices strictly inside the clockwise sector from edge index
/// `from` to edge index `to`: positions from+1 ..= to (cyclically).
fn slots_cw_between(deg: usize, from: usize, to: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = (from + 1) % deg;
    loop {
        out.push(i);
        if i == to {
            break;
        }
        i = (i + 1) % deg;
        if out.len() > deg {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Meter;
    use crate::gen;
    use crate::oracle;
    use crate::tree;

    fn prepared(g: &PlanarGraph) -> (Partition, RootedForest) {
        let partition = Partition::single(g);
        let mut meter = Meter::literal_for(g);
        let mut forest = tree::build_part_trees(g, &partition, &mut meter).unwrap();
        tree::dfs_orders(g, &partition, &mut forest, &mut meter).unwrap();
        (partition, forest)
    }

    /// triangle with tree 0-1, 1-2 and chord 0-2
    fn triangle_instance() -> (PlanarGraph, Partition, RootedForest) {
        let g = PlanarGraph::build(3, vec![vec![1, 2], vec![2, 0], vec![0, 1]], (0, 1)).unwrap();
        let partition = Partition::single(&g);
        let mut forest = RootedForest::empty(3);
        forest.member = vec![true; 3];
        forest.roots = vec![0];
        forest.parent = vec![None, Some(0), Some(1)];
        forest.depth = vec![0, 1, 2];
        forest.subtree = vec![3, 2, 1];
        forest.root_start[0] = Some(2);
        forest.pos_l = vec![1, 2, 3];
        forest.pos_r = vec![1, 2, 3];
        forest.orders_ready = true;
        (g, partition, forest)
    }

    #[test]
    fn triangle_chord_is_ancestor_with_weight_zero() {
        let (g, partition, forest) = triangle_instance();
        let fe = classify(&g, &partition, &forest, 0, 2).unwrap();
        assert!(matches!(fe.case, EdgeCase::AncestorRight { z: 1 } | EdgeCase::AncestorLeft { z: 1 }));
        assert_eq!(weight(&g, &forest, &fe), 0);
        assert_eq!(face_size(&g, &forest, &fe), 3);
        let inside = inside_nodes(&g, &partition, &forest, &fe);
        assert!(inside.is_empty());
        let (l, r) = outside_partitions(&g, &partition, &forest, &fe, true).unwrap();
        assert_eq!(l + r, 0);
    }

    #[test]
    fn diamond_chord_is_non_ancestor_with_weight_two() {
        // 0 above 1; children 2 (counterclockwise side) and 3; chord 2-3
        let g = PlanarGraph::build(
            4,
            vec![vec![1], vec![0, 3, 2], vec![1, 3], vec![2, 1]],
            (0, 1),
        )
        .unwrap();
        let (partition, forest) = prepared(&g);
        assert_eq!(forest.roots[0], 0);
        let fe = classify(&g, &partition, &forest, 2, 3).unwrap();
        assert!(matches!(fe.case, EdgeCase::NonAncestor { lca: 1 }));
        assert_eq!(weight(&g, &forest, &fe), 2);
    }

    #[test]
    fn wheel_weights_match_the_dual_oracle() {
        // hub 0, rim 1..=5 clockwise; outer face = the hub-1-2 triangle so
        // the hub-rooted star tree has an outer corner to anchor at
        let rots = vec![
            vec![1, 2, 3, 4, 5],
            vec![2, 0, 5],
            vec![3, 0, 1],
            vec![4, 0, 2],
            vec![5, 0, 3],
            vec![1, 0, 4],
        ];
        let g = PlanarGraph::build(6, rots, (0, 1)).unwrap();
        let partition = Partition::single(&g);
        let mut forest = RootedForest::empty(6);
        forest.member = vec![true; 6];
        forest.roots = vec![0];
        forest.parent = vec![None, Some(0), Some(0), Some(0), Some(0), Some(0)];
        forest.depth = vec![0, 1, 1, 1, 1, 1];
        forest.subtree = vec![6, 1, 1, 1, 1, 1];
        forest.root_start[0] = Some(2);
        let (pl, pr) = oracle::oracle_dfs_orders(&g, &forest, &partition.parts[0]);
        forest.pos_l = pl;
        forest.pos_r = pr;
        forest.orders_ready = true;
        for (a, b) in [(1u32, 2u32), (2, 3), (3, 4), (4, 5), (1, 5)] {
            let fe = classify(&g, &partition, &forest, a, b).unwrap();
            let w = weight(&g, &forest, &fe);
            let path = forest.tree_path(fe.u, fe.v);
            let inside = oracle::oracle_inside(&g, &path).unwrap();
            let expected = match fe.case {
                EdgeCase::NonAncestor { lca } => {
                    let d = forest.depth[fe.v as usize] - forest.depth[lca as usize];
                    inside.len() as u64 + d as u64 + 1
                }
                _ => inside.len() as u64,
            };
            assert_eq!(w, expected, "edge {a}-{b}");
            let got_inside: std::collections::HashSet<NodeId> =
                inside_nodes(&g, &partition, &forest, &fe).into_iter().collect();
            assert_eq!(got_inside, inside, "inside of {a}-{b}");
        }
    }

    #[test]
    fn nested_chords_selection() {
        // path tree 0-1-2-3-4 with chords (0,4) outer and (1,3) inner
        let g = PlanarGraph::build(
            5,
            vec![
                vec![4, 1],
                vec![0, 3, 2],
                vec![1, 3],
                vec![1, 4, 2],
                vec![3, 0],
            ],
            (0, 1),
        )
        .unwrap();
        let partition = Partition::single(&g);
        let mut forest = RootedForest::empty(5);
        forest.member = vec![true; 5];
        forest.roots = vec![0];
        forest.parent = vec![None, Some(0), Some(1), Some(2), Some(3)];
        forest.depth = vec![0, 1, 2, 3, 4];
        forest.subtree = vec![5, 4, 3, 2, 1];
        forest.root_start[0] = Some(4);
        forest.pos_l = vec![1, 2, 3, 4, 5];
        forest.pos_r = vec![1, 2, 3, 4, 5];
        forest.orders_ready = true;
        let edges = vec![(0u32, 4u32), (1, 3)];
        let outer = select_not_contained(&g, &partition, &forest, &edges).unwrap();
        let inner = select_not_contains(&g, &partition, &forest, &edges).unwrap();
        assert_eq!((outer.u.min(outer.v), outer.u.max(outer.v)), (0, 4));
        assert_eq!((inner.u.min(inner.v), inner.u.max(inner.v)), (1, 3));
        let fe_outer = classify(&g, &partition, &forest, 0, 4).unwrap();
        let fe_inner = classify(&g, &partition, &forest, 1, 3).unwrap();
        assert!(face_contained_in(&g, &partition, &forest, &fe_inner, &fe_outer));
        assert!(!face_contained_in(&g, &partition, &forest, &fe_outer, &fe_inner));
        // weights grow along containment
        assert!(weight(&g, &forest, &fe_inner) <= weight(&g, &forest, &fe_outer));
    }

    #[test]
    fn face_with_no_chords_hides_nothing() {
        let (g, partition, forest) = {
            let g = PlanarGraph::build(
                4,
                vec![vec![1], vec![0, 3, 2], vec![1, 3], vec![2, 1]],
                (0, 1),
            )
            .unwrap();
            let (p, f) = prepared(&g);
            (g, p, f)
        };
        let fe = classify(&g, &partition, &forest, 2, 3).unwrap();
        for z in inside_nodes(&g, &partition, &forest, &fe) {
            if forest.children_cw(&g, z).is_empty() {
                assert!(hidden_edges(&g, &partition, &forest, &fe, z).unwrap().is_empty());
            }
        }
    }
}
