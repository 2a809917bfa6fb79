#[path = "oracles/mod.rs"]
mod oracles;

use proptest::prelude::*;
use std::collections::BTreeSet;
use tanglekit::invsys::{
    all_threads, check_compatibility, restrict_cofinal, thread_ultrafilter_check, Compatibility, FSystem, GammaIndex,
    GammaSystem, GfSystem, InverseSystem, OpenPolicy, TableSystem,
};
use tanglekit::multigraph::{EdgeSet, Multigraph, VertexSet};
use tanglekit::presentation::{Family, Presentation};
use tanglekit::structure::canonical_chain;

fn halving(levels: Vec<Vec<u32>>) -> TableSystem<u32> {
    TableSystem {
        levels,
        bond_fn: Box::new(|j, i, pt: &u32| pt >> (j - i)),
    }
}

fn small_graph() -> impl Strategy<Value = Multigraph> {
    (2u32..=5).prop_flat_map(|n| proptest::collection::vec((0..n, 0..n), 1..=7).prop_map(move |e| oracles::graph(n, &e)))
}

fn random_index(sys: &GammaSystem, x: &VertexSet, labels: &[u8]) -> GammaIndex {
    let report = sys.report(x).unwrap();
    let mut by: std::collections::BTreeMap<u8, VertexSet> = Default::default();
    for (i, c) in report.all().iter().enumerate() {
        by.entry(labels[i % labels.len()]).or_default().insert(c.id());
    }
    GammaIndex::new(x.clone(), by.into_values().collect())
}

fn passes<I, P>(c: Compatibility<I, P>) -> bool {
    matches!(c, Compatibility::Pass { .. })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn threads_are_exactly_the_surviving_top_points(
        raw in proptest::collection::vec(proptest::collection::btree_set(0u32..64, 0..12), 1..5)
    ) {
        let m = raw.len();
        let levels: Vec<Vec<u32>> = raw.iter().map(|s| s.iter().copied().collect()).collect();
        let sys = halving(levels.clone());
        let chain = sys.chain();
        let got: Vec<Vec<u32>> = all_threads(&sys, &chain, usize::MAX)
            .unwrap()
            .into_iter()
            .map(|t| t.points.into_iter().map(|(_, p)| p).collect())
            .collect();
        let mut want: Vec<Vec<u32>> = levels[m - 1]
            .iter()
            .map(|&top| (0..m).map(|i| top >> (m - 1 - i)).collect::<Vec<u32>>())
            .filter(|t| t.iter().enumerate().all(|(i, p)| levels[i].contains(p)))
            .collect();
        want.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn halving_bonds_compose(raw in proptest::collection::vec(proptest::collection::btree_set(0u32..64, 1..8), 1..5)) {
        let sys = halving(raw.iter().map(|s| s.iter().copied().collect()).collect());
        let chain = sys.chain();
        prop_assert!(passes(check_compatibility(&sys, &[chain]).unwrap()));
    }

    #[test]
    fn gamma_join_is_an_upper_bound(
        g in small_graph(),
        xa in proptest::collection::btree_set(0u32..5, 0..3),
        xb in proptest::collection::btree_set(0u32..5, 0..3),
        la in proptest::collection::vec(0u8..3, 1..6),
        lb in proptest::collection::vec(0u8..3, 1..6),
    ) {
        let p = Presentation::constant(&g);
        let sys = GammaSystem::new(&p, 0);
        let clip = |s: &BTreeSet<u32>| -> VertexSet { s.iter().copied().filter(|v| g.has_vertex(*v)).collect() };
        let a = random_index(&sys, &clip(&xa), &la);
        let b = random_index(&sys, &clip(&xb), &lb);
        let j = sys.gamma_join(&a, &b).unwrap();
        prop_assert_eq!(&j, &sys.gamma_join(&b, &a).unwrap());
        prop_assert_eq!(&sys.gamma_join(&a, &a).unwrap(), &a);
        prop_assert!(sys.leq(&a, &j) && sys.leq(&b, &j) && sys.leq(&a, &a));
        // The finest index over the same separator lies above the join.
        let fine = GammaIndex::finest(&sys.report(&j.x).unwrap());
        prop_assert!(sys.leq(&j, &fine));
    }

    #[test]
    fn gamma_bonds_compose_along_chains(
        g in small_graph(),
        order in Just(()).prop_perturb(|_, mut rng| { let mut v: Vec<u32> = (0..5).collect(); v.sort_by_key(|_| rng.next_u32()); v }),
        labels in proptest::collection::vec(proptest::collection::vec(0u8..3, 1..5), 6),
    ) {
        let p = Presentation::constant(&g);
        let sys = GammaSystem::new(&p, 0);
        let order: Vec<u32> = order.into_iter().filter(|v| g.has_vertex(*v)).collect();
        let mut chain: Vec<GammaIndex> = Vec::new();
        for i in 0..=order.len() {
            let x: VertexSet = order[..i].iter().copied().collect();
            let fresh = random_index(&sys, &x, &labels[i]);
            let next = match chain.last() {
                Some(prev) => sys.gamma_join(prev, &fresh).unwrap(),
                None => fresh,
            };
            chain.push(next);
        }
        prop_assert!(passes(check_compatibility(&sys, &[chain.clone()]).unwrap()));
        let top = chain.last().unwrap().clone();
        let r = restrict_cofinal(&sys, vec![top], &chain).unwrap();
        prop_assert_eq!(r.members().len(), 1);
    }

    #[test]
    fn contraction_bonds_compose(g in small_graph(), cuts in proptest::collection::vec(any::<u8>(), 3)) {
        let p = Presentation::constant(&g);
        let sys = GfSystem { p: &p, n: 0 };
        let edges: Vec<u32> = g.edge_ids().into_iter().collect();
        let mut chain: Vec<EdgeSet> = vec![EdgeSet::new()];
        for c in cuts {
            let mut next = chain.last().unwrap().clone();
            next.extend(edges.iter().copied().filter(|e| (e + c as u32) % 3 == 0));
            chain.push(next);
        }
        prop_assert!(passes(check_compatibility(&sys, &[chain]).unwrap()));
    }

    #[test]
    fn principal_choices_pass_the_ultrafilter_check(
        g in small_graph(),
        x in proptest::collection::btree_set(0u32..5, 0..2),
        labels in proptest::collection::vec(proptest::collection::vec(0u8..2, 1..5), 1..5),
        pick in any::<usize>(),
    ) {
        let p = Presentation::constant(&g);
        let sys = GammaSystem::new(&p, 0);
        let x: VertexSet = x.into_iter().filter(|v| g.has_vertex(*v)).collect();
        let report = sys.report(&x).unwrap();
        let ids: Vec<u32> = report.all().iter().map(|c| c.id()).collect();
        prop_assume!(!ids.is_empty());
        let c = ids[pick % ids.len()];
        let thread: Vec<(GammaIndex, VertexSet)> = labels
            .iter()
            .map(|l| {
                let idx = random_index(&sys, &x, l);
                let chosen = idx.classes.iter().find(|k| k.contains(&c)).unwrap().clone();
                (idx, chosen)
            })
            .collect();
        prop_assert_eq!(thread_ultrafilter_check(&thread, &x), Ok(()));
    }
}

#[test]
fn broken_bonds_are_caught() {
    let sys = TableSystem {
        levels: vec![vec![0, 1], vec![0, 1], vec![0, 1]],
        bond_fn: Box::new(|j, i, pt: &u32| if j - i == 2 { 1 - pt } else { *pt }),
    };
    assert!(matches!(
        check_compatibility(&sys, &[sys.chain()]).unwrap(),
        Compatibility::CounterExample { .. }
    ));
}

#[test]
fn f_bonds_compose_along_canonical_chains() {
    for f in Family::all() {
        let d = match f {
            Family::BinaryFan | Family::BinaryFlower | Family::TreeInf => 5,
            _ => 8,
        };
        let p = Presentation::family(f.clone());
        let sys = FSystem::new(&p, d, 3, OpenPolicy::Admit);
        let chain = canonical_chain(&p, d);
        let verdict = check_compatibility(&sys, &[chain]).unwrap();
        assert!(matches!(verdict, Compatibility::Pass { .. }), "{}: {verdict:?}", f.name());
    }
}
