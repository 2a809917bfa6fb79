#[path = "oracles/mod.rs"]
mod oracles;

use proptest::prelude::*;
use std::collections::BTreeSet;
use tanglekit::multigraph::{
    components, contract_partition, cut_condition, edge_disjoint_paths, local_connectivity, pack_trees, refine,
    violating_partition, Multigraph, VertexPartition, VertexSet,
};

fn small_multigraph(max_v: u32, max_e: usize) -> impl Strategy<Value = Multigraph> {
    (1..=max_v).prop_flat_map(move |n| {
        proptest::collection::vec((0..n, 0..n), 0..=max_e).prop_map(move |edges| oracles::graph(n, &edges))
    })
}

fn partition_of(n: u32, labels: &[u8]) -> VertexPartition {
    let mut blocks: std::collections::BTreeMap<u8, VertexSet> = Default::default();
    for v in 0..n {
        blocks.entry(labels[v as usize % labels.len()]).or_default().insert(v);
    }
    VertexPartition::new(blocks.into_values().collect()).unwrap()
}

/// Minimum a–b edge cut over every vertex bipartition.
fn edge_cut_oracle(g: &Multigraph, a: u32, b: u32) -> usize {
    let verts: Vec<u32> = g.vertices().iter().copied().collect();
    let mut best = usize::MAX;
    for mask in 0u32..(1 << verts.len()) {
        let side: VertexSet = (0..verts.len()).filter(|i| mask >> i & 1 == 1).map(|i| verts[i]).collect();
        if side.contains(&a) && !side.contains(&b) {
            let cut = g.edges().filter(|&(_, u, v)| side.contains(&u) != side.contains(&v)).count();
            best = best.min(cut);
        }
    }
    best
}

/// Direct a–b edges plus the least vertex separator of what remains.
fn vertex_paths_oracle(g: &Multigraph, a: u32, b: u32) -> usize {
    let direct: BTreeSet<u32> = g
        .edges()
        .filter(|&(_, u, v)| (u, v) == (a, b) || (u, v) == (b, a))
        .map(|(e, _, _)| e)
        .collect();
    let inner: Vec<u32> = g.vertices().iter().copied().filter(|&v| v != a && v != b).collect();
    let mut best = usize::MAX;
    for mask in 0u32..(1 << inner.len()) {
        let cut: VertexSet = (0..inner.len()).filter(|i| mask >> i & 1 == 1).map(|i| inner[i]).collect();
        let keep: VertexSet = g.vertices().difference(&cut).copied().collect();
        let reach = oracles::components_oracle(&g.induced(&keep).without_edges(&direct), &VertexSet::new());
        let joined = reach.iter().any(|c| c.contains(&a) && c.contains(&b));
        if !joined {
            best = best.min(cut.len());
        }
    }
    direct.len() + best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn packing_agrees_with_exhaustive_tree_search(g in small_multigraph(4, 7), k in 1usize..=2) {
        prop_assume!(g.is_connected());
        let packed = pack_trees(&g, k).unwrap();
        prop_assert_eq!(packed.is_some(), oracles::has_k_trees_bruteforce(&g, k));
    }

    #[test]
    fn violating_partition_witnesses_failure(g in small_multigraph(5, 9), k in 1usize..=3) {
        prop_assume!(g.is_connected());
        match violating_partition(&g, k).unwrap() {
            Some(p) => {
                let cross = g.edges().filter(|&(_, u, v)| {
                    p.blocks().iter().position(|b| b.contains(&u)) != p.blocks().iter().position(|b| b.contains(&v))
                }).count();
                prop_assert!(cross < k * (p.len() - 1));
                prop_assert!(!cut_condition(&g, k).unwrap());
            }
            None => prop_assert!(cut_condition(&g, k).unwrap()),
        }
    }

    #[test]
    fn cut_condition_survives_added_edges(g in small_multigraph(5, 8), k in 1usize..=3, u in 0u32..5, v in 0u32..5) {
        prop_assume!(g.has_vertex(u) && g.has_vertex(v));
        let mut h = g.clone();
        h.push_edge(u, v).unwrap();
        if cut_condition(&g, k).unwrap() {
            prop_assert!(cut_condition(&h, k).unwrap());
        }
    }

    #[test]
    fn components_match_oracle(g in small_multigraph(7, 10), mask in 0u32..128) {
        let x: VertexSet = g.vertices().iter().copied().filter(|v| mask >> v & 1 == 1).collect();
        let lib: Vec<VertexSet> = components(&g, &x).into_iter().map(|(c, nb)| {
            for &w in &nb {
                assert!(x.contains(&w));
            }
            c
        }).collect();
        let mut lib_sorted = lib.clone();
        lib_sorted.sort();
        let mut oracle = oracles::components_oracle(&g, &x);
        oracle.sort();
        prop_assert_eq!(lib_sorted, oracle);
    }

    #[test]
    fn edge_connectivity_matches_min_cut(g in small_multigraph(6, 10), a in 0u32..6, b in 0u32..6) {
        prop_assume!(a != b && g.has_vertex(a) && g.has_vertex(b));
        let c = local_connectivity(&g, a, b).unwrap();
        prop_assert_eq!(c.edge_cut, edge_cut_oracle(&g, a, b));
        prop_assert_eq!(c.internally_disjoint_paths, vertex_paths_oracle(&g, a, b));
        let paths = edge_disjoint_paths(&g, a, b, usize::MAX);
        prop_assert_eq!(paths.len(), c.edge_cut);
        for p in &paths {
            prop_assert_eq!(p.first(), Some(&a));
            prop_assert_eq!(p.last(), Some(&b));
        }
    }

    #[test]
    fn refine_is_the_meet(n in 1u32..7, l1 in proptest::collection::vec(0u8..3, 7), l2 in proptest::collection::vec(0u8..3, 7)) {
        let (p, q) = (partition_of(n, &l1), partition_of(n, &l2));
        let r = refine(&p, &q).unwrap();
        prop_assert!(r.refines(&p) && r.refines(&q));
        let same = |x: &VertexPartition, u: u32, v: u32| x.block_index()[&u] == x.block_index()[&v];
        for u in 0..n {
            for v in 0..n {
                prop_assert_eq!(same(&r, u, v), same(&p, u, v) && same(&q, u, v));
            }
        }
        prop_assert!(oracles::refines_pairwise(r.blocks(), p.blocks()));
    }

    #[test]
    fn contraction_keeps_exactly_the_cross_edges(g in small_multigraph(6, 10), labels in proptest::collection::vec(0u8..3, 6)) {
        let p = partition_of(g.vertex_count() as u32, &labels);
        let h = contract_partition(&g, &p).unwrap();
        prop_assert_eq!(h.vertex_count(), p.len());
        let idx = p.block_index();
        let cross: BTreeSet<u32> = g.edges().filter(|&(_, u, v)| idx[&u] != idx[&v]).map(|(e, _, _)| e).collect();
        prop_assert_eq!(h.edge_ids(), cross);
        for &v in h.vertices() {
            prop_assert!(p.blocks().contains(h.label(v).unwrap()));
        }
    }
}
