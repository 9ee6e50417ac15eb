//! Deterministic test-instance generators.
//!
//! Every generator is a pure function of its parameters and seed, and places
//! node 0 on the outer face so a tree rooted there has an outer corner to
//! anchor at.

use crate::graph::{NodeId, PlanarGraph};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("infeasible parameters: {0}")]
    InfeasibleParams(String),
}

/// k x k grid in row-major order, neighbors listed clockwise.
pub fn grid(k: u32) -> Result<PlanarGraph, GenError> {
    if k == 0 {
        return Err(GenError::InfeasibleParams("grid needs k >= 1".into()));
    }
    let n = k * k;
    let id = |r: u32, c: u32| r * k + c;
    let mut rots = vec![Vec::new(); n as usize];
    for r in 0..k {
        for c in 0..k {
            let mut rot = Vec::new();
            if r > 0 {
                rot.push(id(r - 1, c)); // up
            }
            if c + 1 < k {
                rot.push(id(r, c + 1)); // right
            }
            if r + 1 < k {
                rot.push(id(r + 1, c)); // down
            }
            if c > 0 {
                rot.push(id(r, c - 1)); // left
            }
            rots[id(r, c) as usize] = rot;
        }
    }
    let outer = if k == 1 { (0, 0) } else { (1, 0) };
    Ok(PlanarGraph::build(n, rots, outer).expect("grid embeds"))
}

pub fn path(n: u32) -> Result<PlanarGraph, GenError> {
    if n == 0 {
        return Err(GenError::InfeasibleParams("path needs n >= 1".into()));
    }
    let mut rots = vec![Vec::new(); n as usize];
    for v in 0..n {
        if v > 0 {
            rots[v as usize].push(v - 1);
        }
        if v + 1 < n {
            rots[v as usize].push(v + 1);
        }
    }
    let outer = if n == 1 { (0, 0) } else { (0, 1) };
    Ok(PlanarGraph::build(n, rots, outer).expect("path embeds"))
}

pub fn cycle(n: u32) -> Result<PlanarGraph, GenError> {
    if n < 3 {
        return Err(GenError::InfeasibleParams("cycle needs n >= 3".into()));
    }
    let mut rots = Vec::with_capacity(n as usize);
    for v in 0..n {
        rots.push(vec![(v + 1) % n, (v + n - 1) % n]);
    }
    Ok(PlanarGraph::build(n, rots, (0, n - 1)).expect("cycle embeds"))
}

/// Star with the hub at node 0 and `n - 1` leaves.
pub fn star(n: u32) -> Result<PlanarGraph, GenError> {
    if n == 0 {
        return Err(GenError::InfeasibleParams("star needs n >= 1".into()));
    }
    let mut rots = vec![Vec::new(); n as usize];
    rots[0] = (1..n).collect();
    for v in 1..n {
        rots[v as usize] = vec![0];
    }
    let outer = if n == 1 { (0, 0) } else { (0, 1) };
    Ok(PlanarGraph::build(n, rots, outer).expect("star embeds"))
}

/// Uniform random plane tree: each new node attaches to a random earlier
/// node at a random rotation slot.
pub fn random_tree(n: u32, seed: u64) -> Result<PlanarGraph, GenError> {
    if n == 0 {
        return Err(GenError::InfeasibleParams("tree needs n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rots: Vec<Vec<NodeId>> = vec![Vec::new(); n as usize];
    for v in 1..n {
        let p = rng.gen_range(0..v);
        let slot = rng.gen_range(0..=rots[p as usize].len());
        rots[p as usize].insert(slot, v);
        rots[v as usize].push(p);
    }
    let outer = if n == 1 { (0, 0) } else { (0, rots[0][0]) };
    Ok(PlanarGraph::build(n, rots, outer).expect("tree embeds"))
}

/// Maximal planar graph with m = 3n - 6 edges, grown by repeatedly splitting
/// a random bounded triangular face with a fresh node.
pub fn random_triangulation(n: u32, seed: u64) -> Result<PlanarGraph, GenError> {
    if n < 3 {
        return Err(GenError::InfeasibleParams("triangulation needs n >= 3".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rots: Vec<Vec<NodeId>> = vec![vec![1, 2], vec![2, 0], vec![0, 1]];
    // Bounded faces as clockwise corner walks; face of dart (0,1) is outer.
    let mut faces: Vec<[NodeId; 3]> = vec![[0, 2, 1]];
    for w in 3..n {
        let fi = rng.gen_range(0..faces.len());
        let [a, b, c] = faces.swap_remove(fi);
        // At each boundary node the new spoke goes immediately clockwise of
        // the outgoing boundary edge, which is the interior side.
        for (x, s) in [(a, b), (b, c), (c, a)] {
            let i = rots[x as usize].iter().position(|&t| t == s).unwrap();
            rots[x as usize].insert(i + 1, w);
        }
        rots.push(vec![a, b, c]);
        faces.push([a, b, w]);
        faces.push([b, c, w]);
        faces.push([c, a, w]);
    }
    let g = PlanarGraph::build(n, rots, (0, 1)).expect("triangulation embeds");
    debug_assert_eq!(g.m(), 3 * n as usize - 6);
    Ok(g)
}

/// Connected planar graph with exactly `m` edges: a random triangulation with
/// a random spanning-connected subset of edges kept.
pub fn random_planar(n: u32, m: usize, seed: u64) -> Result<PlanarGraph, GenError> {
    if n < 3 {
        return Err(GenError::InfeasibleParams("random planar needs n >= 3".into()));
    }
    if m < n as usize - 1 || m > 3 * n as usize - 6 {
        return Err(GenError::InfeasibleParams(format!(
            "m must lie in [n-1, 3n-6] = [{}, {}]",
            n - 1,
            3 * n - 6
        )));
    }
    let tri = random_triangulation(n, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for v in tri.nodes() {
        for &u in tri.neighbors(v) {
            if v < u {
                edges.push((v, u));
            }
        }
    }
    // Keep the outer witness edge so node 0 stays on the outer face, then a
    // random spanning tree, then random extras up to m.
    let mut order: Vec<usize> = (0..edges.len()).collect();
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let witness_idx = edges.iter().position(|&e| e == (0, 1)).unwrap();
    let mut keep = vec![false; edges.len()];
    let mut dsu: Vec<u32> = (0..n).collect();
    fn find(dsu: &mut Vec<u32>, x: u32) -> u32 {
        if dsu[x as usize] != x {
            let r = find(dsu, dsu[x as usize]);
            dsu[x as usize] = r;
        }
        dsu[x as usize]
    }
    let mut kept = 0usize;
    let join = |dsu: &mut Vec<u32>, i: usize, keep: &mut Vec<bool>, kept: &mut usize| {
        let (a, b) = edges[i];
        let (ra, rb) = (find(dsu, a), find(dsu, b));
        if ra != rb {
            dsu[ra as usize] = rb;
        }
        if !keep[i] {
            keep[i] = true;
            *kept += 1;
        }
    };
    join(&mut dsu, witness_idx, &mut keep, &mut kept);
    for &i in &order {
        let (a, b) = edges[i];
        if find(&mut dsu, a) != find(&mut dsu, b) {
            join(&mut dsu, i, &mut keep, &mut kept);
        }
    }
    for &i in &order {
        if kept >= m {
            break;
        }
        if !keep[i] {
            keep[i] = true;
            kept += 1;
        }
    }
    let mut kept_set = std::collections::HashSet::new();
    for (i, &k) in keep.iter().enumerate() {
        if k {
            kept_set.insert(edges[i]);
        }
    }
    let mut rots = vec![Vec::new(); n as usize];
    for v in tri.nodes() {
        rots[v as usize] = tri
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&u| kept_set.contains(&(v.min(u), v.max(u))))
            .collect();
    }
    Ok(PlanarGraph::build(n, rots, (0, 1)).expect("filtered embedding stays planar"))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    Grid(u32),
    Cycle(u32),
    Path(u32),
    Star(u32),
    Tree(u32),
    Triangulation(u32),
    Planar(u32, usize),
}

pub fn generate(kind: &Kind, seed: u64) -> Result<PlanarGraph, GenError> {
    match *kind {
        Kind::Grid(k) => grid(k),
        Kind::Cycle(n) => cycle(n),
        Kind::Path(n) => path(n),
        Kind::Star(n) => star(n),
        Kind::Tree(n) => random_tree(n, seed),
        Kind::Triangulation(n) => random_triangulation(n, seed),
        Kind::Planar(n, m) => random_planar(n, m, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid2_counts() {
        let g = grid(2).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.m(), 4);
        assert_eq!(g.trace_faces().len(), 2);
    }

    #[test]
    fn grid_face_count_from_euler() {
        for k in 2..=6u32 {
            let g = grid(k).unwrap();
            let faces = g.trace_faces();
            // (k-1)^2 bounded squares plus the outer face
            assert_eq!(faces.len(), ((k - 1) * (k - 1) + 1) as usize);
            assert_eq!(
                2,
                g.n() as i64 - g.m() as i64 + faces.len() as i64,
            );
        }
    }

    #[test]
    fn triangulation_is_maximal() {
        let g = random_triangulation(100, 7).unwrap();
        assert_eq!(g.m(), 294);
        assert!(g.is_connected());
    }

    #[test]
    fn generators_are_deterministic() {
        let a = random_triangulation(50, 3).unwrap().to_json();
        let b = random_triangulation(50, 3).unwrap().to_json();
        assert_eq!(a, b);
        let a = random_planar(40, 60, 11).unwrap().to_json();
        let b = random_planar(40, 60, 11).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn random_planar_edge_count_and_connectivity() {
        for (n, m, seed) in [(10u32, 9usize, 0u64), (20, 30, 1), (30, 84, 2)] {
            let g = random_planar(n, m, seed).unwrap();
            assert_eq!(g.m(), m);
            assert!(g.is_connected());
        }
    }

    #[test]
    fn infeasible_params_rejected() {
        assert!(random_planar(10, 100, 0).is_err());
        assert!(cycle(2).is_err());
    }

    #[test]
    fn round_trip_of_generated_grid() {
        let g = grid(8).unwrap();
        let g2 = PlanarGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, g2);
    }
}
