#[path = "oracles/mod.rs"]
mod oracles;

use proptest::prelude::*;
use std::collections::BTreeSet;
use tanglekit::multigraph::{VertexId, VertexSet};
use tanglekit::presentation::{Family, Presentation};
use tanglekit::structure::{
    canonical_chain, component_report, crit_of, defining_sequence, directions, quotient_points,
};

fn family() -> impl Strategy<Value = Family> {
    proptest::sample::select(Family::all())
}

fn cap(f: &Family) -> usize {
    match f {
        Family::BinaryFan | Family::BinaryFlower => 6,
        Family::TreeInf | Family::Grid | Family::Fig17 | Family::GridK2 => 8,
        _ => 12,
    }
}

/// A family, a level and a separator drawn from the level's vertices.
fn setting() -> impl Strategy<Value = (Presentation, usize, VertexSet, Vec<usize>)> {
    (family(), 2usize..12, proptest::collection::vec(any::<usize>(), 0..4), proptest::collection::vec(any::<usize>(), 0..3))
        .prop_map(|(f, n, picks, more)| {
            let n = n.min(cap(&f));
            let p = Presentation::family(f);
            let verts: Vec<VertexId> = p.truncate(n).vertices().iter().copied().collect();
            let x = picks.iter().map(|i| verts[i % verts.len()]).collect();
            (p, n, x, more)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn report_partitions_the_complement((p, n, x, _) in setting()) {
        let r = component_report(&p, &x, n).unwrap();
        let lg = p.truncate(n);
        let mut lib: Vec<VertexSet> = r.all().iter().map(|c| c.vertices.clone()).collect();
        lib.sort();
        let mut oracle = oracles::components_oracle(&lg.graph, &x);
        oracle.sort();
        prop_assert_eq!(lib, oracle);
        for c in &r.closed {
            prop_assert!(c.vertices.is_disjoint(&lg.frontier));
        }
        for c in &r.open {
            prop_assert!(!c.vertices.is_disjoint(&lg.frontier));
        }
        for c in r.all() {
            prop_assert!(c.nbhd.is_subset(&x));
            let touching: VertexSet = c.vertices.iter().flat_map(|&v| lg.graph.neighbours(v)).filter(|w| x.contains(w)).collect();
            prop_assert_eq!(&c.nbhd, &touching);
        }
    }

    #[test]
    fn closed_components_persist((p, n, x, _) in setting()) {
        let now = component_report(&p, &x, n).unwrap();
        let later = component_report(&p, &x, n + 2).unwrap();
        for c in &now.closed {
            let (d, closed) = later.find(c.id()).expect("component survives");
            prop_assert!(closed);
            prop_assert_eq!(&d.vertices, &c.vertices);
            prop_assert_eq!(&d.nbhd, &c.nbhd);
        }
    }

    #[test]
    fn closed_component_counts_never_drop((p, n, x, _) in setting()) {
        let a = component_report(&p, &x, n).unwrap().closed.len();
        let b = component_report(&p, &x, n + 1).unwrap().closed.len();
        prop_assert!(a <= b);
    }

    #[test]
    fn witnesses_survive_enlarging_the_separator((p, n, x, more) in setting()) {
        let verts: Vec<VertexId> = p.truncate(n).vertices().iter().copied().collect();
        let mut bigger = x.clone();
        bigger.extend(more.iter().map(|i| verts[i % verts.len()]));
        let added = bigger.len() - x.len();
        for k in 1..=3 {
            let low: BTreeSet<VertexSet> = crit_of(&p, &x, n, k + added).unwrap().into_iter().map(|w| w.y).collect();
            let high: BTreeSet<VertexSet> = crit_of(&p, &bigger, n, k).unwrap().into_iter().map(|w| w.y).collect();
            for y in low {
                prop_assert!(high.contains(&y), "{:?} lost after adding {} vertices", y, added);
            }
        }
    }

    #[test]
    fn witness_counts_meet_the_threshold((p, n, x, _) in setting(), k in 1usize..4) {
        for w in crit_of(&p, &x, n, k).unwrap() {
            prop_assert!(w.count >= k);
            prop_assert!(w.y.is_subset(&x));
        }
        let weaker: BTreeSet<VertexSet> = crit_of(&p, &x, n, k).unwrap().into_iter().map(|w| w.y).collect();
        let stronger: BTreeSet<VertexSet> = crit_of(&p, &x, n, k + 1).unwrap().into_iter().map(|w| w.y).collect();
        prop_assert!(stronger.is_subset(&weaker));
    }

    #[test]
    fn canonical_chain_ascends(f in family(), d in 1usize..10) {
        let d = d.min(cap(&f));
        let p = Presentation::family(f);
        let chain = canonical_chain(&p, d);
        for (i, w) in chain.windows(2).enumerate() {
            prop_assert!(w[0].is_subset(&w[1]), "step {}", i);
        }
        for (i, x) in chain.iter().enumerate() {
            prop_assert!(x.is_subset(p.truncate(i).vertices()));
        }
    }

    #[test]
    fn quotient_classes_partition_the_vertices(f in family(), n in 2usize..10) {
        let n = n.min(cap(&f));
        let p = Presentation::family(f);
        if let Ok(q) = quotient_points(&p, n) {
            let mut seen = VertexSet::new();
            for c in &q.classes {
                prop_assert!(!c.vertices.is_empty() || !c.ends.is_empty());
                for v in &c.vertices {
                    prop_assert!(seen.insert(*v));
                }
            }
            let lg = p.truncate(n);
            prop_assert_eq!(&seen, lg.vertices());
        }
    }
}

#[test]
fn direction_threads_are_nested_components() {
    let d = 6;
    for name in ["ray", "double_ray", "ray_star", "k2inf", "fig5"] {
        let p = Presentation::named(name, &Default::default()).unwrap();
        for dir in directions(&p, d) {
            assert_eq!(dir.thread.len(), dir.chain.len(), "{name}");
            let comps: Vec<VertexSet> = dir
                .chain
                .iter()
                .zip(&dir.thread)
                .map(|(x, &c)| component_report(&p, x, d).unwrap().find(c).expect("thread component").0.vertices.clone())
                .collect();
            for w in comps.windows(2) {
                assert!(w[1].is_subset(&w[0]), "{name}: {} leaves its predecessor", dir.id);
            }
        }
    }
}

#[test]
fn defining_sequences_are_disjoint_and_nonempty() {
    for (name, end) in [("ray", "omega"), ("double_ray", "omega_plus"), ("double_ray", "omega_minus"), ("grid", "omega")] {
        let p = Presentation::named(name, &Default::default()).unwrap();
        let seq = defining_sequence(&p, end, 3).unwrap();
        assert_eq!(seq.len(), 4, "{name}");
        for (i, a) in seq.iter().enumerate() {
            assert!(!a.is_empty());
            for b in &seq[i + 1..] {
                assert!(a.is_disjoint(b), "{name}: {a:?} meets {b:?}");
            }
        }
    }
}
