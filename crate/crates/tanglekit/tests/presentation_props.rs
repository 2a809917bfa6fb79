use proptest::prelude::*;
use tanglekit::presentation::{Family, Presentation};

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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn levels_are_nested_subgraphs(f in family(), i in 0usize..12) {
        let p = Presentation::family(f.clone());
        let i = i.min(cap(&f) - 1);
        let (lo, hi) = (p.truncate(i), p.truncate(i + 1));
        prop_assert!(lo.vertices().is_subset(hi.vertices()));
        for (e, u, v) in lo.graph.edges() {
            prop_assert_eq!(hi.graph.endpoints(e), Some((u, v)));
        }
        for (v, b) in &lo.born {
            prop_assert_eq!(hi.born.get(v), Some(b));
            prop_assert!(*b <= i);
        }
        prop_assert!(lo.frontier.is_subset(lo.vertices()));
        prop_assert!(lo.settled().is_disjoint(&lo.frontier));
    }

    #[test]
    fn settled_vertices_keep_their_edges(f in family(), i in 0usize..12) {
        let p = Presentation::family(f.clone());
        let i = i.min(cap(&f) - 1);
        let (lo, hi) = (p.truncate(i), p.truncate(i + 1));
        for v in lo.settled() {
            prop_assert_eq!(lo.graph.degree(v), hi.graph.degree(v));
        }
    }

    #[test]
    fn names_are_stable_across_levels(f in family(), i in 0usize..10) {
        let p = Presentation::family(f.clone());
        let i = i.min(cap(&f) - 2);
        let lo = p.truncate(i);
        for &v in lo.vertices() {
            let name = p.name(v);
            prop_assert_eq!(p.id_at(&name, i), Some(v));
            prop_assert_eq!(p.id_at(&name, i + 2), Some(v));
        }
    }

    #[test]
    fn certificates_refer_to_present_vertices(f in family(), i in 1usize..10) {
        let p = Presentation::family(f.clone());
        let i = i.min(cap(&f) - 1);
        let lg = p.truncate(i);
        let c = p.certificate(i).expect("catalog families are certified");
        for y in &c.crit {
            prop_assert!(y.is_subset(lg.vertices()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for class in &c.sim_classes {
            for v in &class.vertices {
                prop_assert!(lg.vertices().contains(v));
                prop_assert!(seen.insert(*v), "vertex in two classes");
            }
        }
        for e in &c.ends {
            prop_assert!(!e.ray.is_empty());
            prop_assert!(e.ray.iter().all(|v| lg.vertices().contains(v)));
        }
    }
}

#[test]
fn json_round_trip_preserves_levels() {
    for f in Family::all() {
        let p = Presentation::family(f.clone());
        let q = Presentation::from_json(&p.to_json()).expect("round trip");
        for i in 0..4 {
            assert_eq!(p.truncate(i).graph, q.truncate(i).graph, "{}", f.name());
        }
    }
}

#[test]
fn constant_presentation_never_grows() {
    let mut g = tanglekit::multigraph::Multigraph::new();
    for v in 0..3 {
        g.add_vertex(v);
    }
    g.push_edge(0, 1).unwrap();
    g.push_edge(1, 2).unwrap();
    let p = Presentation::constant(&g);
    for i in 0..5 {
        let lg = p.truncate(i);
        assert_eq!(lg.graph, g);
        assert!(lg.frontier.is_empty());
    }
}
