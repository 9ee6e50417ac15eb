//! Per-part rooted spanning trees and the tree-shaped subroutines built on
//! them.
//!
//! Spanning trees are grown by component merging with 0/1 edge weights
//! (0 inside a part, 1 across parts), stopping a component once its cheapest
//! outgoing edge costs 1. Left/right embedding-respecting DFS orders are
//! computed by a subtree-merging schedule that halves subtree depths each
//! iteration; path marking finds the middle edge of each requested path by
//! the same schedule and recurses on both halves. Each phase of those
//! schedules costs a constant number of aggregation primitives, so
//! invocation counts stay polylogarithmic.

use crate::engine::Meter;
use crate::graph::{NodeId, PartId, Partition, PlanarGraph};
use crate::primitives::{
    self, AggOp, Extreme, ForestView, PartCtx, PrimError, Relation,
};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error(transparent)]
    Prim(#[from] PrimError),
    #[error("part {0} is disconnected")]
    DisconnectedPart(PartId),
    #[error("query endpoints {0} and {1} lie in different parts")]
    CrossPartQuery(NodeId, NodeId),
    #[error("node {0} is outside the queried part")]
    NodeNotInPart(NodeId),
}

/// Rooted spanning trees for every part, with depths, inclusive subtree
/// sizes, and (once computed) the two embedding-respecting DFS positions.
#[derive(Debug, Clone)]
pub struct RootedForest {
    pub parent: Vec<Option<NodeId>>,
    pub depth: Vec<u32>,
    /// number of nodes in the subtree of v, including v
    pub subtree: Vec<u32>,
    /// 1-based position in the counterclockwise-first order of v's part tree
    pub pos_l: Vec<u32>,
    /// 1-based position in the clockwise-first order
    pub pos_r: Vec<u32>,
    /// per part: the root node
    pub roots: Vec<NodeId>,
    /// for roots anchored at an outer-face corner: the neighbor whose edge
    /// starts the clockwise child order (the corner's incoming neighbor)
    pub root_start: Vec<Option<NodeId>>,
    pub member: Vec<bool>,
    pub orders_ready: bool,
}

impl RootedForest {
    pub fn empty(n: usize) -> RootedForest {
        RootedForest {
            parent: vec![None; n],
            depth: vec![0; n],
            subtree: vec![1; n],
            pos_l: vec![0; n],
            pos_r: vec![0; n],
            roots: Vec::new(),
            root_start: vec![None; n],
            member: vec![false; n],
            orders_ready: false,
        }
    }

    pub fn in_tree(&self, v: NodeId) -> bool {
        self.member[v as usize]
    }

    pub fn is_tree_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.parent[u as usize] == Some(v) || self.parent[v as usize] == Some(u)
    }

    /// v's neighbors in clockwise order starting just after the parent edge
    /// (for an anchored root: starting at the stored corner neighbor).
    pub fn anchored_neighbors(&self, g: &PlanarGraph, v: NodeId) -> Vec<NodeId> {
        let rot = g.neighbors(v);
        if rot.is_empty() {
            return Vec::new();
        }
        let len = rot.len();
        let start = match self.parent[v as usize] {
            Some(p) => (g.rotation_pos(v, p).expect("parent is a neighbor") as usize + 1) % len,
            None => match self.root_start[v as usize] {
                Some(x) => g.rotation_pos(v, x).expect("anchor is a neighbor") as usize,
                None => 0,
            },
        };
        (0..len).map(|i| rot[(start + i) % len]).collect()
    }

    /// Tree children of v in clockwise order from the parent anchor.
    pub fn children_cw(&self, g: &PlanarGraph, v: NodeId) -> Vec<NodeId> {
        self.anchored_neighbors(g, v)
            .into_iter()
            .filter(|&c| self.parent[c as usize] == Some(v))
            .collect()
    }

    /// Position of neighbor u around v with the parent edge at 0. For an
    /// anchored root the virtual parent corner sits at 0 and real neighbors
    /// start at 1.
    pub fn anchored_pos(&self, g: &PlanarGraph, v: NodeId, u: NodeId) -> u32 {
        let rot_len = g.degree(v) as u32;
        let pu = g.rotation_pos(v, u).expect("u is a neighbor of v");
        match self.parent[v as usize] {
            Some(p) => {
                let pp = g.rotation_pos(v, p).expect("parent is a neighbor");
                (pu + rot_len - pp) % rot_len
            }
            None => match self.root_start[v as usize] {
                Some(x) => {
                    let px = g.rotation_pos(v, x).expect("anchor is a neighbor");
                    (pu + rot_len - px) % rot_len + 1
                }
                None => pu + 1,
            },
        }
    }

    pub fn is_ancestor(&self, a: NodeId, b: NodeId) -> bool {
        debug_assert!(self.orders_ready);
        let pa = self.pos_l[a as usize];
        let pb = self.pos_l[b as usize];
        pa <= pb && pb < pa + self.subtree[a as usize]
    }

    /// Left-order interval covered by the subtree of v.
    pub fn interval_l(&self, v: NodeId) -> (u32, u32) {
        let lo = self.pos_l[v as usize];
        (lo, lo + self.subtree[v as usize] - 1)
    }

    pub fn interval_r(&self, v: NodeId) -> (u32, u32) {
        let lo = self.pos_r[v as usize];
        (lo, lo + self.subtree[v as usize] - 1)
    }

    /// Parent-climbing lowest common ancestor; local bookkeeping, no orders
    /// needed.
    pub fn climb_lca(&self, mut a: NodeId, mut b: NodeId) -> NodeId {
        while self.depth[a as usize] > self.depth[b as usize] {
            a = self.parent[a as usize].expect("deeper node has a parent");
        }
        while self.depth[b as usize] > self.depth[a as usize] {
            b = self.parent[b as usize].expect("deeper node has a parent");
        }
        while a != b {
            a = self.parent[a as usize].expect("distinct nodes below root");
            b = self.parent[b as usize].expect("distinct nodes below root");
        }
        a
    }

    /// Tree path from a to b, inclusive.
    pub fn tree_path(&self, a: NodeId, b: NodeId) -> Vec<NodeId> {
        let w = self.climb_lca(a, b);
        let mut up = Vec::new();
        let mut x = a;
        while x != w {
            up.push(x);
            x = self.parent[x as usize].unwrap();
        }
        up.push(w);
        let mut down = Vec::new();
        let mut y = b;
        while y != w {
            down.push(y);
            y = self.parent[y as usize].unwrap();
        }
        up.extend(down.into_iter().rev());
        up
    }

    fn recompute_depths_and_sizes(&mut self, partition: &Partition) {
        for members in partition.parts.iter() {
            if members.is_empty() {
                continue;
            }
            let mut order: Vec<NodeId> = Vec::with_capacity(members.len());
            let root = members
                .iter()
                .copied()
                .find(|&v| self.parent[v as usize].is_none())
                .expect("rooted part");
            let mut children: std::collections::HashMap<NodeId, Vec<NodeId>> = Default::default();
            for &v in members {
                if let Some(p) = self.parent[v as usize] {
                    children.entry(p).or_default().push(v);
                }
            }
            let mut stack = vec![root];
            self.depth[root as usize] = 0;
            while let Some(v) = stack.pop() {
                order.push(v);
                if let Some(cs) = children.get(&v) {
                    for &c in cs {
                        self.depth[c as usize] = self.depth[v as usize] + 1;
                        stack.push(c);
                    }
                }
            }
            for &v in order.iter().rev() {
                self.subtree[v as usize] = 1;
            }
            for &v in order.iter().rev() {
                if let Some(p) = self.parent[v as usize] {
                    let s = self.subtree[v as usize];
                    self.subtree[p as usize] += s;
                }
            }
        }
    }
}

/// Builds one spanning tree per part by component merging with 0/1 weights,
/// roots each tree at the smallest node with a corner on the part's outer
/// face, and computes depths and subtree sizes.
pub fn build_part_trees(
    g: &PlanarGraph,
    partition: &Partition,
    meter: &mut Meter,
) -> Result<RootedForest, TreeError> {
    let n = g.n() as usize;
    let mut forest = RootedForest::empty(n);
    for members in partition.parts.iter() {
        for &v in members {
            forest.member[v as usize] = true;
        }
    }

    // component state: id = smallest member, plus a communication tree
    let mut comp: Vec<NodeId> = (0..n as NodeId).collect();
    let mut comp_parent: Vec<Option<NodeId>> = vec![None; n];
    let mut tree_edges: Vec<(NodeId, NodeId)> = Vec::new();
    let mut done: Vec<bool> = vec![false; n]; // by component id
    let active_nodes: Vec<NodeId> = (0..n as NodeId).filter(|&v| forest.member[v as usize]).collect();

    loop {
        // neighbors learn each other's component ids
        let mut sends: Vec<(NodeId, NodeId, u64)> = Vec::new();
        for &v in &active_nodes {
            for &u in g.neighbors(v) {
                if forest.member[u as usize] {
                    sends.push((v, u, comp[v as usize] as u64));
                }
            }
        }
        primitives::exchange(g, &sends, meter.id_bits, meter)?;

        let view = ForestView {
            parent: comp_parent.clone(),
            active: active_nodes.clone(),
        };
        // candidate outgoing edge per node, as (weight, min endpoint, max endpoint)
        let sentinel_w = 2u64;
        let mut w_in = vec![sentinel_w; n];
        for &v in &active_nodes {
            if done[comp[v as usize] as usize] {
                continue;
            }
            for &u in g.neighbors(v) {
                if !forest.member[u as usize] || comp[u as usize] == comp[v as usize] {
                    continue;
                }
                let w = (partition.part_of[u as usize] != partition.part_of[v as usize]) as u64;
                w_in[v as usize] = w_in[v as usize].min(w);
            }
        }
        meter.charge("boruvka_phase");
        let mut m = meter.silent_child();
        let best_w = primitives::view_aggregate(&view, AggOp::Min, &w_in, &mut m)?;
        let sentinel_id = g.n() as u64;
        let a_in: Vec<u64> = (0..n)
            .map(|v| {
                let mut best = sentinel_id;
                if forest.member[v] && !done[comp[v] as usize] && best_w[v] == 0 {
                    for &u in g.neighbors(v as NodeId) {
                        if forest.member[u as usize]
                            && comp[u as usize] != comp[v]
                            && partition.part_of[u as usize] == partition.part_of[v]
                        {
                            let lo = (v as u64).min(u as u64);
                            best = best.min(lo);
                        }
                    }
                }
                best
            })
            .collect();
        let best_a = primitives::view_aggregate(&view, AggOp::Min, &a_in, &mut m)?;
        let b_in: Vec<u64> = (0..n)
            .map(|v| {
                let mut best = sentinel_id;
                if forest.member[v] && !done[comp[v] as usize] && best_w[v] == 0 {
                    for &u in g.neighbors(v as NodeId) {
                        if forest.member[u as usize]
                            && comp[u as usize] != comp[v]
                            && partition.part_of[u as usize] == partition.part_of[v]
                        {
                            let (lo, hi) = ((v.min(u as usize)) as u64, (v.max(u as usize)) as u64);
                            if lo == best_a[v] {
                                best = best.min(hi);
                            }
                        }
                    }
                }
                best
            })
            .collect();
        let best_b = primitives::view_aggregate(&view, AggOp::Min, &b_in, &mut m)?;
        meter.absorb_costs(m);

        // merge along weight-0 minimum outgoing edges; components whose
        // cheapest outgoing edge costs 1 (or none) stop
        let mut any_merge = false;
        let mut moes: Vec<(NodeId, NodeId)> = Vec::new();
        let mut comp_ids: Vec<NodeId> = active_nodes.iter().map(|&v| comp[v as usize]).collect();
        comp_ids.sort_unstable();
        comp_ids.dedup();
        for &c in &comp_ids {
            if done[c as usize] {
                continue;
            }
            if best_w[c as usize] != 0 {
                done[c as usize] = true;
                continue;
            }
            let (a, b) = (best_a[c as usize] as NodeId, best_b[c as usize] as NodeId);
            moes.push((a, b));
            any_merge = true;
        }
        if !any_merge {
            break;
        }
        moes.sort_unstable();
        moes.dedup();
        let mut dsu: Vec<NodeId> = (0..n as NodeId).collect();
        fn find(dsu: &mut Vec<NodeId>, x: NodeId) -> NodeId {
            if dsu[x as usize] != x {
                let r = find(dsu, dsu[x as usize]);
                dsu[x as usize] = r;
            }
            dsu[x as usize]
        }
        for &v in &active_nodes {
            let c = comp[v as usize];
            let (rv, rc) = (find(&mut dsu, v), find(&mut dsu, c));
            if rv != rc {
                dsu[rv as usize] = rc;
            }
        }
        for &(a, b) in &moes {
            tree_edges.push((a, b));
            let (ra, rb) = (find(&mut dsu, a), find(&mut dsu, b));
            if ra != rb {
                dsu[ra as usize] = rb;
            }
        }
        // rebuild component ids (smallest member) and communication trees
        let mut new_comp: Vec<NodeId> = vec![0; n];
        let mut min_of: std::collections::HashMap<NodeId, NodeId> = Default::default();
        for &v in &active_nodes {
            let r = find(&mut dsu, v);
            let e = min_of.entry(r).or_insert(v);
            if v < *e {
                *e = v;
            }
        }
        for &v in &active_nodes {
            new_comp[v as usize] = min_of[&find(&mut dsu, v)];
        }
        comp = new_comp;
        // orient each component tree at its id node
        let mut adj: std::collections::HashMap<NodeId, Vec<NodeId>> = Default::default();
        for &(a, b) in &tree_edges {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        comp_parent = vec![None; n];
        let mut seen = vec![false; n];
        for &v in &active_nodes {
            let root = comp[v as usize];
            if seen[root as usize] {
                continue;
            }
            seen[root as usize] = true;
            let mut stack = vec![root];
            while let Some(x) = stack.pop() {
                if let Some(nbrs) = adj.get(&x) {
                    for &y in nbrs {
                        if !seen[y as usize] {
                            seen[y as usize] = true;
                            comp_parent[y as usize] = Some(x);
                            stack.push(y);
                        }
                    }
                }
            }
        }
    }

    // a part left in several components means it was not connected
    for (p, members) in partition.parts.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let c0 = comp[members[0] as usize];
        if members.iter().any(|&v| comp[v as usize] != c0) {
            return Err(TreeError::DisconnectedPart(p as PartId));
        }
    }

    // adopt the component trees, re-rooted at each part's outer-corner node
    let mut adj: std::collections::HashMap<NodeId, Vec<NodeId>> = Default::default();
    for &(a, b) in &tree_edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    forest.roots = vec![0; partition.parts.len()];
    for (p, members) in partition.parts.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let (root, anchor) = pick_outer_root(g, members);
        forest.roots[p] = root;
        forest.root_start[root as usize] = anchor;
        let mut stack = vec![root];
        let mut seen: std::collections::HashSet<NodeId> = Default::default();
        seen.insert(root);
        forest.depth[root as usize] = 0;
        forest.parent[root as usize] = None;
        while let Some(x) = stack.pop() {
            if let Some(nbrs) = adj.get(&x) {
                for &y in nbrs {
                    if seen.insert(y) {
                        forest.parent[y as usize] = Some(x);
                        forest.depth[y as usize] = forest.depth[x as usize] + 1;
                        stack.push(y);
                    }
                }
            }
        }
    }
    forest.recompute_depths_and_sizes(partition);

    // subtree sizes are also carried by one descendant sum, so the session
    // count reflects it
    let ones = vec![1u64; n];
    let ctx = PartCtx::new(g, partition, &forest);
    let sizes = primitives::descendant_sum(&ctx, AggOp::Sum, &ones, meter)?;
    for &v in &active_nodes {
        debug_assert_eq!(sizes[v as usize] as u32, forest.subtree[v as usize]);
    }
    Ok(forest)
}

/// Smallest member with a corner on the induced outer face, plus the corner's
/// incoming neighbor as the rotation anchor.
fn pick_outer_root(g: &PlanarGraph, members: &[NodeId]) -> (NodeId, Option<NodeId>) {
    if members.len() == 1 {
        return (members[0], None);
    }
    let walk = g.induced_outer_face(members);
    let mut best: Option<NodeId> = None;
    for &(x, _) in &walk {
        best = Some(best.map_or(x, |b: NodeId| b.min(x)));
    }
    let root = best.expect("outer walk touches the part");
    // first corner visit of the root: ... (x -> root), (root -> z) ...
    for i in 0..walk.len() {
        let (a, b) = walk[i];
        if b == root {
            let (_, _z) = walk[(i + 1) % walk.len()];
            return (root, Some(a));
        }
    }
    unreachable!("root found on walk");
}

// ---------------------------------------------------------------------------
// DFS orders by subtree merging
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Left,
    Right,
}

/// Computes both embedding-respecting DFS orders for every part tree: the
/// clockwise-first order (right) and the counterclockwise-first order (left).
/// Runs O(log n) subtree-merging iterations, each a constant number of
/// primitive invocations.
pub fn dfs_orders(
    g: &PlanarGraph,
    partition: &Partition,
    forest: &mut RootedForest,
    meter: &mut Meter,
) -> Result<(), TreeError> {
    let pl = merged_order(g, partition, forest, Order::Left, meter)?;
    let pr = merged_order(g, partition, forest, Order::Right, meter)?;
    forest.pos_l = pl;
    forest.pos_r = pr;
    forest.orders_ready = true;
    if cfg!(debug_assertions) {
        for members in partition.parts.iter() {
            let mut seen_l: Vec<u32> = members.iter().map(|&v| forest.pos_l[v as usize]).collect();
            seen_l.sort_unstable();
            assert!(seen_l.iter().enumerate().all(|(i, &x)| x == i as u32 + 1));
        }
    }
    Ok(())
}

fn merged_order(
    g: &PlanarGraph,
    _partition: &Partition,
    forest: &RootedForest,
    order: Order,
    meter: &mut Meter,
) -> Result<Vec<u32>, TreeError> {
    let n = g.n() as usize;
    let mut pi: Vec<u32> = vec![1; n];
    let mut sub: Vec<NodeId> = (0..n as NodeId).collect();
    let active: Vec<NodeId> = (0..n as NodeId).filter(|&v| forest.in_tree(v)).collect();
    if active.is_empty() {
        return Ok(pi);
    }
    // parents learn child subtree sizes once up front
    let size_sends: Vec<(NodeId, NodeId, u64)> = active
        .iter()
        .filter_map(|&v| {
            forest.parent[v as usize].map(|p| (v, p, forest.subtree[v as usize] as u64))
        })
        .collect();
    primitives::exchange(g, &size_sends, meter.budget, meter)?;

    let mut iter = 0u32;
    loop {
        let remaining: Vec<NodeId> = active
            .iter()
            .copied()
            .filter(|&v| sub[v as usize] == v && forest.parent[v as usize].is_some())
            .collect();
        if remaining.is_empty() {
            break;
        }
        // merge: a subtree whose halved depth is odd joins its parent's
        // subtree when that one's halved depth is exactly one less
        let hd = |r: NodeId| forest.depth[r as usize] >> iter;
        let mut merging: Vec<NodeId> = Vec::new();
        for &r in &remaining {
            let d = hd(r);
            if d % 2 == 1 {
                let p = forest.parent[r as usize].unwrap();
                if hd(sub[p as usize]) == d - 1 {
                    merging.push(r);
                }
            }
        }
        iter += 1;
        if merging.is_empty() {
            if iter > 64 {
                break;
            }
            continue;
        }
        // merging roots exchange with their attachment leaf, which assigns
        // block offsets from its own position and the child subtree sizes
        let req: Vec<(NodeId, NodeId, u64)> = merging
            .iter()
            .map(|&r| (r, forest.parent[r as usize].unwrap(), r as u64))
            .collect();
        primitives::exchange(g, &req, meter.id_bits, meter)?;
        let mut offset: Vec<u64> = vec![0; n];
        let mut parents: Vec<NodeId> = merging
            .iter()
            .map(|&r| forest.parent[r as usize].unwrap())
            .collect();
        parents.sort_unstable();
        parents.dedup();
        let merging_set: std::collections::HashSet<NodeId> = merging.iter().copied().collect();
        for &z in &parents {
            let kids = forest.children_cw(g, z);
            let seq: Vec<NodeId> = match order {
                Order::Right => kids,
                Order::Left => kids.into_iter().rev().collect(),
            };
            let mut acc = pi[z as usize] as u64 + 1;
            for c in seq {
                debug_assert!(merging_set.contains(&c), "children merge together");
                offset[c as usize] = acc;
                acc += forest.subtree[c as usize] as u64;
            }
        }
        let reply: Vec<(NodeId, NodeId, u64)> = merging
            .iter()
            .map(|&r| (forest.parent[r as usize].unwrap(), r, offset[r as usize]))
            .collect();
        primitives::exchange(g, &reply, meter.budget, meter)?;

        // every member of a merging subtree shifts its position and adopts
        // the target's subtree id
        let view = ForestView {
            parent: (0..n)
                .map(|v| {
                    forest.parent[v].filter(|&p| sub[p as usize] == sub[v] && forest.in_tree(v as NodeId))
                })
                .collect(),
            active: active.clone(),
        };
        let delta_src: Vec<(NodeId, u64)> = merging
            .iter()
            .map(|&r| (r, offset[r as usize] - 1))
            .collect();
        let deltas = primitives::view_broadcast(&view, &delta_src, meter)?;
        let target_src: Vec<(NodeId, u64)> = merging
            .iter()
            .map(|&r| (r, sub[forest.parent[r as usize].unwrap() as usize] as u64))
            .collect();
        let targets = primitives::view_broadcast(&view, &target_src, meter)?;
        for &v in &active {
            if merging_set.contains(&sub[v as usize]) {
                pi[v as usize] += deltas[v as usize].expect("delta delivered") as u32;
                sub[v as usize] = targets[v as usize].expect("target delivered") as NodeId;
            }
        }
        if iter > 64 {
            break;
        }
    }
    Ok(pi)
}

// ---------------------------------------------------------------------------
// path marking by recursive edge halving
// ---------------------------------------------------------------------------

/// Marks the tree path between each part's endpoint pair. Each phase finds a
/// middle edge of every open segment by subtree merging, then recurses on the
/// two halves; all segments of all parts advance in the same iterations.
pub fn mark_path(
    g: &PlanarGraph,
    partition: &Partition,
    forest: &RootedForest,
    pairs: &[Option<(NodeId, NodeId)>],
    meter: &mut Meter,
) -> Result<Vec<bool>, TreeError> {
    let n = g.n() as usize;
    let mut marked = vec![false; n];
    let mut segments: Vec<(NodeId, NodeId)> = Vec::new();
    for (p, pair) in pairs.iter().enumerate() {
        if let Some((u, v)) = *pair {
            if partition.part_of[u as usize] as usize != p
                || partition.part_of[v as usize] as usize != p
            {
                return Err(TreeError::CrossPartQuery(u, v));
            }
            marked[u as usize] = true;
            marked[v as usize] = true;
            if u != v && !forest.is_tree_edge(u, v) {
                segments.push((u, v));
            }
        }
    }
    let active: Vec<NodeId> = (0..n as NodeId).filter(|&v| forest.in_tree(v)).collect();

    let mut phase = 0u32;
    while !segments.is_empty() {
        phase += 1;
        debug_assert!(phase <= 2 * 64, "halving phases stay logarithmic");
        let mut sub: Vec<NodeId> = (0..n as NodeId).collect();
        let mut open = segments.clone();
        let mut next: Vec<(NodeId, NodeId)> = Vec::new();
        let mut iter = 0u32;
        while !open.is_empty() {
            let hd = |r: NodeId| forest.depth[r as usize] >> iter;
            let mut merging: Vec<NodeId> = Vec::new();
            for &v in &active {
                if sub[v as usize] != v {
                    continue;
                }
                if let Some(p) = forest.parent[v as usize] {
                    let d = hd(v);
                    if d % 2 == 1 && hd(sub[p as usize]) == d - 1 {
                        merging.push(v);
                    }
                }
            }
            iter += 1;
            if merging.is_empty() {
                assert!(iter <= 64, "merge schedule terminates");
                continue;
            }
            let old_sub = sub.clone();
            // roots query their parents, then spread the new id in-tree
            let req: Vec<(NodeId, NodeId, u64)> = merging
                .iter()
                .map(|&r| (r, forest.parent[r as usize].unwrap(), r as u64))
                .collect();
            primitives::exchange(g, &req, meter.id_bits, meter)?;
            let view = ForestView {
                parent: (0..n)
                    .map(|v| {
                        forest.parent[v]
                            .filter(|&p| old_sub[p as usize] == old_sub[v] && forest.in_tree(v as NodeId))
                    })
                    .collect(),
                active: active.clone(),
            };
            let src: Vec<(NodeId, u64)> = merging
                .iter()
                .map(|&r| (r, old_sub[forest.parent[r as usize].unwrap() as usize] as u64))
                .collect();
            let targets = primitives::view_broadcast(&view, &src, meter)?;
            let merging_set: std::collections::HashSet<NodeId> =
                merging.iter().copied().collect();
            for &v in &active {
                if merging_set.contains(&old_sub[v as usize]) {
                    sub[v as usize] = targets[v as usize].expect("target delivered") as NodeId;
                }
            }

            open.retain(|&(a, b)| {
                if sub[a as usize] != sub[b as usize] {
                    return true;
                }
                // the path crosses old subtree boundaries only at edges that
                // merged this iteration; mark the middle one
                let path = forest.tree_path(a, b);
                let mut crossings: Vec<usize> = Vec::new();
                for i in 0..path.len() - 1 {
                    if old_sub[path[i] as usize] != old_sub[path[i + 1] as usize] {
                        crossings.push(i);
                    }
                }
                debug_assert!(!crossings.is_empty() && crossings.len() <= 2);
                let mid = crossings[(crossings.len() - 1) / 2];
                let (z1, z2) = (path[mid], path[mid + 1]);
                marked[z1 as usize] = true;
                marked[z2 as usize] = true;
                for (s, t) in [(a, z1), (z2, b)] {
                    if s != t && !forest.is_tree_edge(s, t) {
                        next.push((s, t));
                    }
                }
                false
            });
        }
        segments = next;
    }
    Ok(marked)
}

// ---------------------------------------------------------------------------
// lowest common ancestors
// ---------------------------------------------------------------------------

/// Every part learns the lowest common ancestor of its endpoint pair: nodes
/// on both root paths tag themselves with their depth and the deepest tag
/// wins.
pub fn lca(
    g: &PlanarGraph,
    partition: &Partition,
    forest: &RootedForest,
    pairs: &[Option<(NodeId, NodeId)>],
    meter: &mut Meter,
) -> Result<Vec<Option<NodeId>>, TreeError> {
    debug_assert!(forest.orders_ready);
    let n = g.n() as usize;
    let ctx = PartCtx::new(g, partition, forest);
    let mut src_u: Vec<(NodeId, u64)> = Vec::new();
    let mut src_v: Vec<(NodeId, u64)> = Vec::new();
    for (p, pair) in pairs.iter().enumerate() {
        if let Some((u, v)) = *pair {
            if partition.part_of[u as usize] as usize != p
                || partition.part_of[v as usize] as usize != p
            {
                return Err(TreeError::CrossPartQuery(u, v));
            }
            src_u.push((u, forest.pos_l[u as usize] as u64));
            src_v.push((v, forest.pos_l[v as usize] as u64));
        }
    }
    let pos_u = primitives::broadcast_within_part(&ctx, &src_u, meter)?;
    let pos_v = primitives::broadcast_within_part(&ctx, &src_v, meter)?;
    let inputs: Vec<u64> = (0..n)
        .map(|x| {
            let (Some(pu), Some(pv)) = (pos_u[x], pos_v[x]) else {
                return 0;
            };
            let (lo, hi) = forest.interval_l(x as NodeId);
            let covers =
                |p: u64| p >= lo as u64 && p <= hi as u64;
            if covers(pu) && covers(pv) {
                forest.depth[x] as u64 + 1
            } else {
                0
            }
        })
        .collect();
    let winner = primitives::find_extreme(&ctx, Extreme::Max, &inputs, meter)?;
    Ok(pairs
        .iter()
        .enumerate()
        .map(|(p, pair)| {
            pair.map(|_| {
                let any = partition.parts[p][0];
                winner[any as usize]
            })
        })
        .collect())
}

// ---------------------------------------------------------------------------
// re-rooting
// ---------------------------------------------------------------------------

/// Re-roots each requested part tree at its target node: the edge set is
/// unchanged, depths become tree distances to the new root, and parents flip
/// along the old root path. DFS orders are invalidated and recomputed on
/// demand.
pub fn reroot(
    g: &PlanarGraph,
    partition: &Partition,
    forest: &RootedForest,
    targets: &[Option<NodeId>],
    meter: &mut Meter,
) -> Result<RootedForest, TreeError> {
    debug_assert!(forest.orders_ready);
    let n = g.n() as usize;
    let ctx = PartCtx::new(g, partition, forest);
    for (p, t) in targets.iter().enumerate() {
        if let Some(v0) = t {
            if partition.part_of[*v0 as usize] as usize != p {
                return Err(TreeError::NodeNotInPart(*v0));
            }
        }
    }
    let rel = primitives::relation_to(&ctx, targets, meter)?;
    let src_d: Vec<(NodeId, u64)> = targets
        .iter()
        .filter_map(|t| t.map(|v0| (v0, forest.depth[v0 as usize] as u64)))
        .collect();
    let src_p: Vec<(NodeId, u64)> = targets
        .iter()
        .filter_map(|t| t.map(|v0| (v0, forest.pos_l[v0 as usize] as u64)))
        .collect();
    let bdepth = primitives::broadcast_within_part(&ctx, &src_d, meter)?;
    let bpos = primitives::broadcast_within_part(&ctx, &src_p, meter)?;
    // deepest own ancestor that is also an ancestor of the target = the
    // meeting point of the two root paths
    let anc_tag: Vec<u64> = (0..n)
        .map(|x| match rel[x] {
            Relation::Ancestor | Relation::Same => forest.depth[x] as u64 + 1,
            _ => 0,
        })
        .collect();
    let meet = primitives::ancestor_sum(&ctx, AggOp::Max, &anc_tag, meter)?;

    let mut out = forest.clone();
    out.orders_ready = false;
    out.pos_l = vec![0; n];
    out.pos_r = vec![0; n];
    for (p, t) in targets.iter().enumerate() {
        let Some(v0) = *t else { continue };
        out.roots[p] = v0;
        for &x in &partition.parts[p] {
            let d0 = bdepth[x as usize].expect("target depth delivered") as u32;
            let p0 = bpos[x as usize].expect("target position delivered") as u32;
            let d = forest.depth[x as usize];
            match rel[x as usize] {
                Relation::Same => {
                    out.parent[x as usize] = None;
                    out.depth[x as usize] = 0;
                }
                Relation::Descendant => {
                    out.depth[x as usize] = d - d0;
                }
                Relation::Ancestor => {
                    out.depth[x as usize] = d0 - d;
                    // the new parent is the unique child whose interval
                    // covers the target's left position
                    let next = forest
                        .children_cw(g, x)
                        .into_iter()
                        .find(|&c| {
                            let (lo, hi) = forest.interval_l(c);
                            p0 >= lo && p0 <= hi
                        })
                        .expect("an ancestor has a child toward the target");
                    out.parent[x as usize] = Some(next);
                }
                Relation::Neither => {
                    let meet_depth = (meet[x as usize] - 1) as u32;
                    out.depth[x as usize] = d + d0 - 2 * meet_depth;
                }
            }
        }
        let old_root = forest.roots[p];
        out.root_start[old_root as usize] = None;
        out.root_start[v0 as usize] = None;
    }
    out.recompute_depths_and_sizes(partition);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    fn single_part_setup(g: &PlanarGraph) -> (Partition, RootedForest, Meter) {
        let partition = Partition::single(g);
        let mut meter = Meter::literal_for(g);
        let mut forest = build_part_trees(g, &partition, &mut meter).unwrap();
        dfs_orders(g, &partition, &mut forest, &mut meter).unwrap();
        (partition, forest, meter)
    }

    #[test]
    fn path_orders_are_forced() {
        let g = gen::path(3).unwrap();
        let (_, forest, _) = single_part_setup(&g);
        assert_eq!(forest.roots[0], 0);
        assert_eq!(forest.pos_l[..3], [1, 2, 3]);
        assert_eq!(forest.pos_r[..3], [1, 2, 3]);
    }

    #[test]
    fn whole_graph_tree_spans() {
        let g = gen::grid(4).unwrap();
        let (_, forest, _) = single_part_setup(&g);
        let edges = (0..16u32)
            .filter_map(|v| forest.parent[v as usize].map(|p| (v, p)))
            .count();
        assert_eq!(edges, 15);
        assert_eq!(forest.subtree[forest.roots[0] as usize], 16);
    }

    #[test]
    fn quadrant_parts_get_their_own_trees() {
        let g = gen::grid(8).unwrap();
        let part_of: Vec<u32> = (0..64u32)
            .map(|v| {
                let (r, c) = (v / 8, v % 8);
                ((r >= 4) as u32) * 2 + ((c >= 4) as u32)
            })
            .collect();
        let partition = Partition::from_assignment(&g, part_of).unwrap();
        let mut meter = Meter::literal_for(&g);
        let forest = build_part_trees(&g, &partition, &mut meter).unwrap();
        for p in 0..4usize {
            let members = &partition.parts[p];
            assert_eq!(members.len(), 16);
            let root = forest.roots[p];
            assert_eq!(forest.subtree[root as usize], 16);
            for &v in members {
                if v != root {
                    let pr = forest.parent[v as usize].unwrap();
                    assert_eq!(partition.part_of[pr as usize], p as u32);
                }
            }
        }
    }

    #[test]
    fn singleton_parts_are_trivial_trees() {
        let g = gen::path(3).unwrap();
        let partition = Partition::from_assignment(&g, vec![0, 1, 2]).unwrap();
        let mut meter = Meter::literal_for(&g);
        let forest = build_part_trees(&g, &partition, &mut meter).unwrap();
        for v in 0..3u32 {
            assert!(forest.parent[v as usize].is_none());
            assert_eq!(forest.subtree[v as usize], 1);
        }
    }

    #[test]
    fn mark_path_endpoints_and_middles() {
        let g = gen::path(8).unwrap();
        let (partition, forest, mut meter) = {
            let (p, f, m) = single_part_setup(&g);
            (p, f, m)
        };
        let marked = mark_path(&g, &partition, &forest, &[Some((0, 7))], &mut meter).unwrap();
        assert!(marked.iter().all(|&b| b));
        let marked = mark_path(&g, &partition, &forest, &[Some((2, 2))], &mut meter).unwrap();
        assert_eq!(marked.iter().filter(|&&b| b).count(), 1);
    }

    #[test]
    fn lca_of_grid_pairs_matches_climbing() {
        let g = gen::grid(5).unwrap();
        let (partition, forest, mut meter) = single_part_setup(&g);
        for (u, v) in [(3u32, 17u32), (24, 6), (12, 12), (0, 20)] {
            let got = lca(&g, &partition, &forest, &[Some((u, v))], &mut meter).unwrap();
            assert_eq!(got[0], Some(forest.climb_lca(u, v)));
        }
    }

    #[test]
    fn reroot_far_end_of_path_reverses_depths() {
        let g = gen::path(5).unwrap();
        let (partition, forest, mut meter) = single_part_setup(&g);
        let out = reroot(&g, &partition, &forest, &[Some(4)], &mut meter).unwrap();
        for v in 0..5u32 {
            assert_eq!(out.depth[v as usize], 4 - v);
        }
        assert_eq!(out.roots[0], 4);
    }

    #[test]
    fn reroot_at_root_is_identity() {
        let g = gen::grid(4).unwrap();
        let (partition, forest, mut meter) = single_part_setup(&g);
        let r = forest.roots[0];
        let out = reroot(&g, &partition, &forest, &[Some(r)], &mut meter).unwrap();
        assert_eq!(out.parent, forest.parent);
        assert_eq!(out.depth, forest.depth);
    }
}
