//! Differential suite: closed-form face arithmetic against the dual-graph
//! oracle, on triangulations, grids, and sparse planar graphs.

mod common;

use common::single_instance;
use planarsep::face::{self, EdgeCase};
use planarsep::gen;
use planarsep::graph::{NodeId, PlanarGraph};
use planarsep::oracle;
use std::collections::HashSet;

fn check_all_edges(g: &PlanarGraph, label: &str) {
    let (partition, forest) = single_instance(g);
    let members: Vec<NodeId> = (0..g.n()).collect();
    for (a, b) in face::real_fundamental_edges(g, &partition, &forest, 0) {
        let fe = face::classify(g, &partition, &forest, a, b).unwrap();
        let w = face::weight(g, &forest, &fe);
        let expect = oracle::oracle_face_weight(g, &members, &forest, a, b);
        assert_eq!(w, expect, "{label}: weight of {a}-{b} ({:?})", fe.case);

        let got: HashSet<NodeId> =
            face::inside_nodes(g, &partition, &forest, &fe).into_iter().collect();
        let oracle_in = oracle::oracle_face_inside(g, &members, &forest, a, b);
        assert_eq!(got, oracle_in, "{label}: interior of {a}-{b} ({:?})", fe.case);

        let fsize = face::face_size(g, &forest, &fe);
        let border = forest.tree_path(fe.u, fe.v).len() as u64;
        assert_eq!(fsize, oracle_in.len() as u64 + border, "{label}: size of {a}-{b}");
    }
}

#[test]
fn weights_and_interiors_on_triangulations() {
    for (n, seed) in common::small_triangulation_specs() {
        let g = gen::random_triangulation(n, seed).unwrap();
        check_all_edges(&g, &format!("tri n={n} seed={seed}"));
    }
}

#[test]
fn weights_and_interiors_on_grids() {
    for k in 2..=8u32 {
        let g = gen::grid(k).unwrap();
        check_all_edges(&g, &format!("grid {k}"));
    }
}

#[test]
fn weights_and_interiors_on_sparse_planar() {
    for seed in 0..10u64 {
        let n = 20 + (seed as u32) * 5;
        let m = (n as usize - 1) + (seed as usize * 13) % (2 * n as usize - 5);
        let g = gen::random_planar(n, m, seed).unwrap();
        check_all_edges(&g, &format!("planar n={n} m={m} seed={seed}"));
    }
}

#[test]
fn outside_counts_conserve_and_match_oracle() {
    for (n, seed) in common::small_triangulation_specs().into_iter().take(10) {
        let g = gen::random_triangulation(n, seed).unwrap();
        let (partition, forest) = single_instance(&g);
        let members: Vec<NodeId> = (0..g.n()).collect();
        let edges = face::real_fundamental_edges(&g, &partition, &forest, 0);
        let outermost = face::select_not_contained(&g, &partition, &forest, &edges).unwrap();
        let (l, r) =
            face::outside_partitions(&g, &partition, &forest, &outermost, true).unwrap();
        let fsize = face::face_size(&g, &forest, &outermost);
        assert_eq!(
            l + r + fsize,
            g.n() as u64,
            "conservation on tri n={n} seed={seed}"
        );
        // the two counts agree with the set definitions over the oracle
        let inside = oracle::oracle_face_inside(&g, &members, &forest, outermost.u, outermost.v);
        let border: HashSet<NodeId> =
            forest.tree_path(outermost.u, outermost.v).into_iter().collect();
        let outside = g.n() as u64 - inside.len() as u64 - border.len() as u64;
        assert_eq!(l + r, outside, "outside split n={n} seed={seed}");
    }
}

#[test]
fn containment_monotonicity_of_weights() {
    for (n, seed) in common::small_triangulation_specs().into_iter().take(6) {
        let g = gen::random_triangulation(n, seed).unwrap();
        let (partition, forest) = single_instance(&g);
        let edges = face::real_fundamental_edges(&g, &partition, &forest, 0);
        let classified: Vec<_> = edges
            .iter()
            .map(|&(a, b)| face::classify(&g, &partition, &forest, a, b).unwrap())
            .collect();
        let sets: Vec<HashSet<NodeId>> = classified
            .iter()
            .map(|fe| face::face_nodes(&g, &partition, &forest, fe).into_iter().collect())
            .collect();
        for i in 0..classified.len() {
            for j in 0..classified.len() {
                if i != j && sets[i].is_subset(&sets[j]) && sets[i].len() < sets[j].len() {
                    assert!(
                        face::weight(&g, &forest, &classified[i])
                            <= face::weight(&g, &forest, &classified[j]),
                        "weight not monotone under containment (n={n} seed={seed})"
                    );
                }
            }
        }
    }
}

#[test]
fn augmentation_weights_oracle_and_monotone() {
    for (n, seed) in common::small_triangulation_specs().into_iter().take(8) {
        let g = gen::random_triangulation(n, seed).unwrap();
        let (partition, forest) = single_instance(&g);
        let members: Vec<NodeId> = (0..g.n()).collect();
        let edges = face::real_fundamental_edges(&g, &partition, &forest, 0);
        let fe = face::select_not_contained(&g, &partition, &forest, &edges).unwrap();
        let aug = face::full_augmentation_weights(&g, &partition, &forest, &fe);
        let pos = fe.pos(&forest);

        // monotone over pairwise-incomparable inside nodes
        for &(z1, w1) in &aug {
            for &(z2, w2) in &aug {
                if z1 != z2
                    && !forest.is_ancestor(z1, z2)
                    && !forest.is_ancestor(z2, z1)
                    && pos[z1 as usize] < pos[z2 as usize]
                {
                    assert!(
                        w1 <= w2,
                        "augmented weights not monotone (n={n} seed={seed}, {z1} vs {z2})"
                    );
                }
            }
        }

        // materialize the augmented edge for compatible leaves and recount
        for &(z, w) in &aug {
            if !forest.children_cw(&g, z).is_empty() {
                continue;
            }
            let hidden = face::hidden_edges(&g, &partition, &forest, &fe, z).unwrap();
            if !hidden.is_empty() {
                continue;
            }
            let h = face::try_insert_in_face(&g, &forest, &fe, z)
                .expect("unhidden leaf accepts the edge");
            let expect = oracle::oracle_face_weight(&h, &members, &forest, fe.u, z);
            assert_eq!(
                w, expect,
                "augmented weight vs oracle after insertion (n={n} seed={seed}, z={z})"
            );
        }
    }
}

#[test]
fn hidden_iff_insertion_fails() {
    for (n, seed) in common::small_triangulation_specs().into_iter().take(8) {
        let g = gen::random_triangulation(n, seed).unwrap();
        let (partition, forest) = single_instance(&g);
        let edges = face::real_fundamental_edges(&g, &partition, &forest, 0);
        let fe = face::select_not_contained(&g, &partition, &forest, &edges).unwrap();
        for z in face::inside_nodes(&g, &partition, &forest, &fe) {
            if !forest.children_cw(&g, z).is_empty() {
                continue;
            }
            let hidden = face::hidden_edges(&g, &partition, &forest, &fe, z).unwrap();
            let inserted = face::try_insert_in_face(&g, &forest, &fe, z).is_some();
            assert_eq!(
                hidden.is_empty(),
                inserted,
                "compatibility law fails (n={n} seed={seed}, z={z}, hidden={hidden:?})"
            );
        }
    }
}
