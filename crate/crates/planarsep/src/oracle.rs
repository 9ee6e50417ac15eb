//! Independent sequential ground truth.
//!
//! Nothing in this module shares logic with the order-and-interval machinery
//! it is used to check: cycle interiors come from dual-graph flood fill, DFS
//! orders from plain traversal over the rotation system, separator balance
//! from component flood fill, and DFS-tree validity from the
//! ancestor-descendant test on freshly computed intervals.

use crate::graph::{Face, NodeId, PlanarGraph};
use crate::tree::RootedForest;
use std::collections::{HashMap, HashSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("the supplied walk is not a simple cycle of the graph: {0}")]
    NotACycle(String),
    #[error("tree does not span the queried node set")]
    NotSpanning,
}

/// Faces of an embedding as vertices, adjacent when they share a primal edge.
pub struct DualGraph {
    pub faces: Vec<Face>,
    pub dart_face: HashMap<(NodeId, NodeId), usize>,
    /// per face: (neighbor face, shared primal edge as an undirected pair)
    pub adj: Vec<Vec<(usize, (NodeId, NodeId))>>,
    pub outer: usize,
}

impl DualGraph {
    pub fn build(g: &PlanarGraph) -> DualGraph {
        let (faces, dart_face) = g.face_of_darts();
        let mut adj = vec![Vec::new(); faces.len()];
        for v in g.nodes() {
            for &u in g.neighbors(v) {
                if v < u {
                    let a = dart_face[&(v, u)];
                    let b = dart_face[&(u, v)];
                    adj[a].push((b, (v, u)));
                    adj[b].push((a, (v, u)));
                }
            }
        }
        let outer = faces.iter().position(|f| f.is_outer).expect("outer face");
        DualGraph { faces, dart_face, adj, outer }
    }
}

/// Nodes strictly inside the Jordan curve of a simple cycle: dual edges
/// crossing the cycle are cut, the dual component holding the outer face is
/// the outside, and a node is inside when all its corners lie on inside
/// faces.
pub fn oracle_inside(
    g: &PlanarGraph,
    cycle: &[NodeId],
) -> Result<HashSet<NodeId>, OracleError> {
    if cycle.len() < 3 {
        return Err(OracleError::NotACycle("fewer than 3 nodes".into()));
    }
    let set: HashSet<NodeId> = cycle.iter().copied().collect();
    if set.len() != cycle.len() {
        return Err(OracleError::NotACycle("repeated node".into()));
    }
    let mut cycle_edges: HashSet<(NodeId, NodeId)> = HashSet::new();
    for i in 0..cycle.len() {
        let (a, b) = (cycle[i], cycle[(i + 1) % cycle.len()]);
        if !g.has_edge(a, b) {
            return Err(OracleError::NotACycle(format!("missing edge {a}-{b}")));
        }
        cycle_edges.insert((a.min(b), a.max(b)));
    }
    let dual = DualGraph::build(g);
    let mut outside_face = vec![false; dual.faces.len()];
    let mut queue = VecDeque::new();
    outside_face[dual.outer] = true;
    queue.push_back(dual.outer);
    while let Some(f) = queue.pop_front() {
        for &(h, e) in &dual.adj[f] {
            if !cycle_edges.contains(&e) && !outside_face[h] {
                outside_face[h] = true;
                queue.push_back(h);
            }
        }
    }
    let mut inside = HashSet::new();
    for v in g.nodes() {
        if set.contains(&v) {
            continue;
        }
        let mut any_in = false;
        let mut any_out = false;
        for &u in g.neighbors(v) {
            if outside_face[dual.dart_face[&(v, u)]] {
                any_out = true;
            } else {
                any_in = true;
            }
        }
        debug_assert!(
            !(any_in && any_out),
            "a node off the cycle has all corners on one side"
        );
        if any_in && !any_out {
            inside.insert(v);
        }
    }
    Ok(inside)
}

/// Left and right DFS orders of one part tree by direct traversal: at every
/// node the children are taken in rotation order starting after the parent
/// edge (after the stored corner anchor at an anchored root), clockwise for
/// the right order and counterclockwise for the left one. Returns 1-based
/// positions per part, 0 elsewhere.
pub fn oracle_dfs_orders(
    g: &PlanarGraph,
    forest: &RootedForest,
    members: &[NodeId],
) -> (Vec<u32>, Vec<u32>) {
    let n = g.n() as usize;
    let member: HashSet<NodeId> = members.iter().copied().collect();
    let root = members
        .iter()
        .copied()
        .find(|&v| forest.parent[v as usize].is_none())
        .expect("rooted part");
    let children_cw = |v: NodeId| -> Vec<NodeId> {
        let rot = g.neighbors(v);
        if rot.is_empty() {
            return Vec::new();
        }
        let len = rot.len();
        let start = match forest.parent[v as usize] {
            Some(p) => (g.rotation_pos(v, p).unwrap() as usize + 1) % len,
            None => match forest.root_start[v as usize] {
                Some(x) => g.rotation_pos(v, x).unwrap() as usize,
                None => 0,
            },
        };
        (0..len)
            .map(|i| rot[(start + i) % len])
            .filter(|&c| member.contains(&c) && forest.parent[c as usize] == Some(v))
            .collect()
    };
    let mut pos_l = vec![0u32; n];
    let mut pos_r = vec![0u32; n];
    for (out, reverse) in [(&mut pos_r, false), (&mut pos_l, true)] {
        let mut counter = 0u32;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            counter += 1;
            out[v as usize] = counter;
            let mut kids = children_cw(v);
            if reverse {
                kids.reverse();
            }
            // explore the first child first: push in reverse
            for &c in kids.iter().rev() {
                stack.push(c);
            }
        }
        debug_assert_eq!(counter as usize, members.len());
    }
    (pos_l, pos_r)
}

/// Tree path between u and v by parent climbing.
pub fn oracle_tree_path(forest: &RootedForest, u: NodeId, v: NodeId) -> Vec<NodeId> {
    let mut au: Vec<NodeId> = Vec::new();
    let mut x = u;
    loop {
        au.push(x);
        match forest.parent[x as usize] {
            Some(p) => x = p,
            None => break,
        }
    }
    let on_u_path: HashMap<NodeId, usize> =
        au.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let mut down = Vec::new();
    let mut y = v;
    let meet_idx = loop {
        if let Some(&i) = on_u_path.get(&y) {
            break i;
        }
        down.push(y);
        y = forest.parent[y as usize].expect("same tree");
    };
    let mut path: Vec<NodeId> = au[..=meet_idx].to_vec();
    path.extend(down.into_iter().rev());
    path
}

/// Distances from v0 along tree edges only.
pub fn oracle_tree_distances(
    forest: &RootedForest,
    members: &[NodeId],
    v0: NodeId,
) -> Vec<u32> {
    let n = forest.parent.len();
    let mut adj: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    for &v in members {
        if let Some(p) = forest.parent[v as usize] {
            adj.entry(v).or_default().push(p);
            adj.entry(p).or_default().push(v);
        }
    }
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    dist[v0 as usize] = 0;
    queue.push_back(v0);
    while let Some(v) = queue.pop_front() {
        if let Some(nbrs) = adj.get(&v) {
            for &u in nbrs {
                if dist[u as usize] == u32::MAX {
                    dist[u as usize] = dist[v as usize] + 1;
                    queue.push_back(u);
                }
            }
        }
    }
    dist
}

/// Maps a part's tree data onto the standalone induced subgraph, so the dual
/// machinery can run on the part alone.
pub fn induce_part(
    g: &PlanarGraph,
    members: &[NodeId],
    forest: &RootedForest,
) -> (PlanarGraph, Vec<NodeId>, RootedForest) {
    let (sub, old_ids) = g.induced_subgraph(members);
    let new_id: HashMap<NodeId, NodeId> = old_ids
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i as NodeId))
        .collect();
    let mut sf = RootedForest::empty(sub.n() as usize);
    sf.member = vec![true; sub.n() as usize];
    for (i, &v) in old_ids.iter().enumerate() {
        sf.parent[i] = forest.parent[v as usize].map(|p| new_id[&p]);
        sf.depth[i] = forest.depth[v as usize];
        sf.subtree[i] = forest.subtree[v as usize];
        sf.root_start[i] = forest.root_start[v as usize].map(|x| new_id[&x]);
        if forest.pos_l.len() > v as usize {
            sf.pos_l[i] = forest.pos_l[v as usize];
            sf.pos_r[i] = forest.pos_r[v as usize];
        }
    }
    sf.orders_ready = forest.orders_ready;
    sf.roots = old_ids
        .iter()
        .enumerate()
        .filter(|(_, &v)| forest.parent[v as usize].is_none())
        .map(|(i, _)| i as NodeId)
        .collect();
    (sub, old_ids, sf)
}

/// Ground-truth face weight of a real fundamental edge: the strict interior
/// of the closed tree path, counted by dual flood fill on the induced part,
/// plus the meet-to-later-endpoint path when neither endpoint contains the
/// other.
pub fn oracle_face_weight(
    g: &PlanarGraph,
    members: &[NodeId],
    forest: &RootedForest,
    a: NodeId,
    b: NodeId,
) -> u64 {
    let (sub, old_ids, sf) = induce_part(g, members, forest);
    let new_id: HashMap<NodeId, NodeId> = old_ids
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i as NodeId))
        .collect();
    let (sa, sb) = (new_id[&a], new_id[&b]);
    let path = oracle_tree_path(&sf, sa, sb);
    let inside = oracle_inside(&sub, &path).expect("tree path plus edge closes a cycle");
    // ancestor test by parent climbing
    let is_anc = |x: NodeId, y: NodeId| {
        let mut c = y;
        loop {
            if c == x {
                return true;
            }
            match sf.parent[c as usize] {
                Some(p) => c = p,
                None => return false,
            }
        }
    };
    if is_anc(sa, sb) || is_anc(sb, sa) {
        inside.len() as u64
    } else {
        let all: Vec<NodeId> = (0..sub.n()).collect();
        let (pos_l, _) = oracle_dfs_orders(&sub, &sf, &all);
        let later = if pos_l[sa as usize] > pos_l[sb as usize] { sa } else { sb };
        // meet = deepest common ancestor by climbing
        let mut x = sa;
        let mut y = sb;
        while sf.depth[x as usize] > sf.depth[y as usize] {
            x = sf.parent[x as usize].unwrap();
        }
        while sf.depth[y as usize] > sf.depth[x as usize] {
            y = sf.parent[y as usize].unwrap();
        }
        while x != y {
            x = sf.parent[x as usize].unwrap();
            y = sf.parent[y as usize].unwrap();
        }
        inside.len() as u64 + (sf.depth[later as usize] - sf.depth[x as usize] + 1) as u64
    }
}

/// Strict interior of a real fundamental face in original node ids.
pub fn oracle_face_inside(
    g: &PlanarGraph,
    members: &[NodeId],
    forest: &RootedForest,
    a: NodeId,
    b: NodeId,
) -> HashSet<NodeId> {
    let (sub, old_ids, sf) = induce_part(g, members, forest);
    let new_id: HashMap<NodeId, NodeId> = old_ids
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i as NodeId))
        .collect();
    let path = oracle_tree_path(&sf, new_id[&a], new_id[&b]);
    oracle_inside(&sub, &path)
        .expect("tree path plus edge closes a cycle")
        .into_iter()
        .map(|x| old_ids[x as usize])
        .collect()
}

#[derive(Debug, PartialEq, Eq)]
pub enum SeparatorVerdict {
    Ok,
    Violation(String),
}

/// Balance check: every component of the part minus the separator has at
/// most ceil(2k/3) nodes; with a forest supplied, also checks that the
/// separator is one tree path.
pub fn check_separator(
    g: &PlanarGraph,
    members: &[NodeId],
    sep: &[NodeId],
    forest: Option<&RootedForest>,
) -> SeparatorVerdict {
    let member_set: HashSet<NodeId> = members.iter().copied().collect();
    let sep_set: HashSet<NodeId> = sep.iter().copied().collect();
    if sep.is_empty() && !members.is_empty() {
        return SeparatorVerdict::Violation("empty separator".into());
    }
    if !sep_set.iter().all(|v| member_set.contains(v)) {
        return SeparatorVerdict::Violation("separator leaves the part".into());
    }
    let bound = (2 * members.len() + 2) / 3;
    let mut seen: HashSet<NodeId> = HashSet::new();
    for &s in members {
        if sep_set.contains(&s) || seen.contains(&s) {
            continue;
        }
        let mut size = 0usize;
        let mut stack = vec![s];
        seen.insert(s);
        while let Some(v) = stack.pop() {
            size += 1;
            for &u in g.neighbors(v) {
                if member_set.contains(&u) && !sep_set.contains(&u) && seen.insert(u) {
                    stack.push(u);
                }
            }
        }
        if size > bound {
            return SeparatorVerdict::Violation(format!(
                "component of size {size} exceeds ceil(2*{}/3) = {bound}",
                members.len()
            ));
        }
    }
    if let Some(forest) = forest {
        // endpoints = marked nodes with at most one marked tree neighbor
        let mut degree: HashMap<NodeId, usize> = sep.iter().map(|&v| (v, 0)).collect();
        for &v in sep {
            if let Some(p) = forest.parent[v as usize] {
                if sep_set.contains(&p) {
                    *degree.get_mut(&v).unwrap() += 1;
                    *degree.get_mut(&p).unwrap() += 1;
                }
            }
        }
        let ends: Vec<NodeId> = sep.iter().copied().filter(|v| degree[v] <= 1).collect();
        let ok = match (sep.len(), ends.len()) {
            (1, _) => true,
            (_, 2) => {
                let path = oracle_tree_path(forest, ends[0], ends[1]);
                path.len() == sep.len() && path.iter().all(|v| sep_set.contains(v))
            }
            _ => false,
        };
        if !ok {
            return SeparatorVerdict::Violation("separator is not a single tree path".into());
        }
    }
    SeparatorVerdict::Ok
}

/// A spanning rooted tree is a DFS tree iff every non-tree edge joins an
/// ancestor-descendant pair.
pub fn check_dfs_tree(
    g: &PlanarGraph,
    parent: &[Option<NodeId>],
    root: NodeId,
) -> Result<(), String> {
    let n = g.n() as usize;
    let mut children: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for v in g.nodes() {
        match parent[v as usize] {
            Some(p) => {
                if !g.has_edge(v, p) {
                    return Err(format!("claimed tree edge {v}-{p} is not a graph edge"));
                }
                children[p as usize].push(v);
            }
            None => {
                if v != root {
                    return Err(format!("node {v} has no parent but is not the root"));
                }
            }
        }
    }
    let mut tin = vec![0u32; n];
    let mut tout = vec![0u32; n];
    let mut timer = 0u32;
    let mut stack: Vec<(NodeId, bool)> = vec![(root, false)];
    let mut visited = 0usize;
    while let Some((v, processed)) = stack.pop() {
        if processed {
            tout[v as usize] = timer;
            continue;
        }
        timer += 1;
        tin[v as usize] = timer;
        visited += 1;
        stack.push((v, true));
        for &c in &children[v as usize] {
            stack.push((c, false));
        }
    }
    if visited != n {
        return Err("tree does not span the graph".into());
    }
    let anc = |a: NodeId, b: NodeId| {
        tin[a as usize] <= tin[b as usize] && tout[b as usize] <= tout[a as usize]
    };
    for v in g.nodes() {
        for &u in g.neighbors(v) {
            if v < u
                && parent[v as usize] != Some(u)
                && parent[u as usize] != Some(v)
                && !anc(v, u)
                && !anc(u, v)
            {
                return Err(format!("cross edge {v}-{u} in claimed DFS tree"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::graph::Partition;
    use crate::{engine::Meter, tree};

    #[test]
    fn triangle_cycle_has_empty_inside() {
        let g = gen::cycle(3).unwrap();
        let inside = oracle_inside(&g, &[0, 1, 2]).unwrap();
        assert!(inside.is_empty());
    }

    #[test]
    fn wheel_rim_encloses_the_hub() {
        // hub 0, rim 1..=5 placed clockwise
        let rots = vec![
            vec![1, 2, 3, 4, 5],
            vec![2, 0, 5],
            vec![3, 0, 1],
            vec![4, 0, 2],
            vec![5, 0, 3],
            vec![1, 0, 4],
        ];
        let g = PlanarGraph::build(6, rots, (1, 5)).unwrap();
        let faces = g.trace_faces();
        assert_eq!(faces.len(), 6);
        let inside = oracle_inside(&g, &[1, 2, 3, 4, 5]).unwrap();
        assert_eq!(inside, HashSet::from([0]));
    }

    #[test]
    fn dual_edge_count_matches_primal() {
        let g = gen::random_triangulation(30, 5).unwrap();
        let dual = DualGraph::build(&g);
        let dual_edges: usize = dual.adj.iter().map(|a| a.len()).sum::<usize>() / 2;
        assert_eq!(dual_edges, g.m());
    }

    #[test]
    fn grid_ring_interior() {
        let g = gen::grid(4).unwrap();
        let inside = oracle_inside(&g, &[5, 6, 10, 9]).unwrap();
        assert!(inside.is_empty());
        let ring = vec![0u32, 1, 2, 3, 7, 11, 15, 14, 13, 12, 8, 4];
        let inside = oracle_inside(&g, &ring).unwrap();
        assert_eq!(inside, HashSet::from([5, 6, 9, 10]));
    }

    #[test]
    fn not_a_cycle_is_rejected() {
        let g = gen::grid(3).unwrap();
        assert!(oracle_inside(&g, &[0, 1, 5]).is_err());
        assert!(oracle_inside(&g, &[0, 1]).is_err());
    }

    #[test]
    fn orders_match_merged_computation_on_grids() {
        for k in [3u32, 5] {
            let g = gen::grid(k).unwrap();
            let partition = Partition::single(&g);
            let mut meter = Meter::literal_for(&g);
            let mut forest = tree::build_part_trees(&g, &partition, &mut meter).unwrap();
            tree::dfs_orders(&g, &partition, &mut forest, &mut meter).unwrap();
            let (pl, pr) = oracle_dfs_orders(&g, &forest, &partition.parts[0]);
            assert_eq!(pl, forest.pos_l, "left order, k={k}");
            assert_eq!(pr, forest.pos_r, "right order, k={k}");
        }
    }

    #[test]
    fn separator_checks() {
        let g = gen::path(9).unwrap();
        let members: Vec<NodeId> = (0..9).collect();
        assert_eq!(check_separator(&g, &members, &[4], None), SeparatorVerdict::Ok);
        assert!(matches!(
            check_separator(&g, &members, &[0], None),
            SeparatorVerdict::Violation(_)
        ));
        assert!(matches!(
            check_separator(&g, &members, &[], None),
            SeparatorVerdict::Violation(_)
        ));
    }

    #[test]
    fn classic_non_dfs_tree_is_caught() {
        let g = gen::cycle(4).unwrap();
        // two depth-1 branches from node 0: edge 2-3 becomes a cross edge
        let parent = vec![None, Some(0), Some(1), Some(0)];
        assert!(check_dfs_tree(&g, &parent, 0).is_err());
        // a hamiltonian path is the only DFS shape of a cycle
        let parent = vec![None, Some(0), Some(1), Some(2)];
        assert!(check_dfs_tree(&g, &parent, 0).is_ok());
    }
}
