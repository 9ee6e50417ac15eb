use planarsep::face::{self};
use planarsep::gen;
use planarsep::graph::{NodeId, Partition};
use planarsep::oracle;
use planarsep::engine::{Meter, Mode, SimConfig};
use planarsep::tree;

fn main() {
    let g = gen::random_triangulation(20, 0).unwrap();
    let partition = Partition::single(&g);
    let cfg = SimConfig { mode: Mode::Charged, ..SimConfig::default() };
    let mut meter = Meter::new(&g, &cfg).unwrap();
    let mut forest = tree::build_part_trees(&g, &partition, &mut meter).unwrap();
    tree::dfs_orders(&g, &partition, &mut forest, &mut meter).unwrap();
    let edges = face::real_fundamental_edges(&g, &partition, &forest, 0);
    let fe = face::select_not_contained(&g, &partition, &forest, &edges).unwrap();
    println!("fe = {:?}", fe);
    println!("tree path fe: {:?}", forest.tree_path(fe.u, fe.v));
    println!("inside: {:?}", face::inside_nodes(&g, &partition, &forest, &fe));
    let z = 3u32;
    println!("z=3: children={:?} parent={:?}", forest.children_cw(&g, z), forest.parent[z as usize]);
    println!("hidden(3) = {:?}", face::hidden_edges(&g, &partition, &forest, &fe, z));
    println!("rot(u={}) = {:?}", fe.u, g.neighbors(fe.u));
    println!("rot(z=3) = {:?}", g.neighbors(z));
    println!("u parent = {:?}, root={}, root_start={:?}", forest.parent[fe.u as usize], forest.roots[0], forest.root_start[forest.roots[0] as usize]);
    // try all slot pairs to see which, if any, works
    let mut found = vec![];
    for ua in 0..=g.degree(fe.u) {
        for zb in 0..=g.degree(z) {
            if face::insert_edge_at(&g, fe.u, ua, z, zb).is_ok() {
                found.push((ua, zb));
            }
        }
    }
    println!("all-planar slot pairs: {:?}", found);
    // also check: is edge (u,z) already a graph edge?
    println!("has_edge(u,z) = {}", g.has_edge(fe.u, z));
    let members: Vec<NodeId> = (0..g.n()).collect();
    let ins = oracle::oracle_face_inside(&g, &members, &forest, fe.u, fe.v);
    println!("oracle inside: {:?}", ins);
}
