//! Independent brute-force oracles shared by the integration tests. None of
//! these call the library routine they are used to check.
#![allow(dead_code)]

use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};
use tanglekit::multigraph::{Multigraph, VertexId, VertexSet};

/// Multigraph on vertices 0..n from a list of endpoint pairs.
pub fn graph(n: u32, edges: &[(u32, u32)]) -> Multigraph {
    let mut g = Multigraph::new();
    for v in 0..n {
        g.add_vertex(v);
    }
    for &(u, v) in edges {
        g.push_edge(u, v).expect("vertices exist");
    }
    g
}

/// Every multigraph on n vertices with at most `max_edges` edges (loops
/// included), as edge multisets over the pair slots in order.
pub fn all_multigraphs(n: u32, max_edges: usize, mut f: impl FnMut(&Multigraph)) {
    let mut slots = Vec::new();
    for u in 0..n {
        for v in u..n {
            slots.push((u, v));
        }
    }
    fn rec(slots: &[(u32, u32)], start: usize, left: usize, cur: &mut Vec<(u32, u32)>, n: u32, f: &mut dyn FnMut(&Multigraph)) {
        f(&graph(n, cur));
        if left == 0 {
            return;
        }
        for i in start..slots.len() {
            cur.push(slots[i]);
            rec(slots, i, left - 1, cur, n, f);
            cur.pop();
        }
    }
    rec(&slots, 0, max_edges, &mut Vec::new(), n, &mut f);
}

/// Every simple graph on n labelled vertices.
pub fn all_simple_graphs(n: u32, mut f: impl FnMut(&Multigraph)) {
    let pairs: Vec<(u32, u32)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    for mask in 0u64..(1u64 << pairs.len()) {
        let edges: Vec<(u32, u32)> = (0..pairs.len()).filter(|i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
        f(&graph(n, &edges));
    }
}

/// A random connected multigraph: a random spanning tree plus extra random edges.
pub fn random_connected(rng: &mut impl Rng, n: u32, extra: usize) -> Multigraph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for _ in 0..extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        edges.push((u, v));
    }
    graph(n, &edges)
}

/// Union-find connectivity over a vertex subset and an edge subset.
pub fn connected_with(g: &Multigraph, keep: &VertexSet, edges: &BTreeSet<u32>) -> bool {
    let mut parent: BTreeMap<VertexId, VertexId> = keep.iter().map(|&v| (v, v)).collect();
    fn find(p: &mut BTreeMap<VertexId, VertexId>, v: VertexId) -> VertexId {
        let q = p[&v];
        if q == v {
            v
        } else {
            let r = find(p, q);
            p.insert(v, r);
            r
        }
    }
    for (e, u, v) in g.edges() {
        if edges.contains(&e) && keep.contains(&u) && keep.contains(&v) {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            parent.insert(a, b);
        }
    }
    let roots: BTreeSet<VertexId> = keep.iter().map(|&v| find(&mut parent, v)).collect();
    roots.len() <= 1
}

/// Components of g − x by repeated union over edges, keyed by least vertex.
pub fn components_oracle(g: &Multigraph, x: &VertexSet) -> Vec<VertexSet> {
    let mut label: BTreeMap<VertexId, VertexId> =
        g.vertices().iter().filter(|v| !x.contains(v)).map(|&v| (v, v)).collect();
    loop {
        let mut changed = false;
        for (_, u, v) in g.edges() {
            if let (Some(&a), Some(&b)) = (label.get(&u), label.get(&v)) {
                if a != b {
                    let m = a.min(b);
                    label.insert(u, m);
                    label.insert(v, m);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut by: BTreeMap<VertexId, VertexSet> = BTreeMap::new();
    for (v, l) in label {
        by.entry(l).or_default().insert(v);
    }
    by.into_values().collect()
}

/// Whether k pairwise edge-disjoint spanning trees exist, by exhaustive
/// search over edge-to-tree assignments (tiny graphs only).
pub fn has_k_trees_bruteforce(g: &Multigraph, k: usize) -> bool {
    let n = g.vertex_count();
    if n <= 1 {
        return true;
    }
    let edges: Vec<u32> = g.edges().filter(|&(_, u, v)| u != v).map(|(e, _, _)| e).collect();
    if edges.len() < k * (n - 1) {
        return false;
    }
    let all = g.vertices().clone();
    let mut assign: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); k];
    fn rec(g: &Multigraph, edges: &[u32], i: usize, assign: &mut Vec<BTreeSet<u32>>, all: &VertexSet, need: usize) -> bool {
        if assign.iter().all(|t| t.len() == need) {
            return assign.iter().all(|t| connected_with(g, all, t));
        }
        if i == edges.len() {
            return false;
        }
        for j in 0..assign.len() {
            if assign[j].len() < need {
                assign[j].insert(edges[i]);
                if rec(g, edges, i + 1, assign, all, need) {
                    return true;
                }
                assign[j].remove(&edges[i]);
            }
        }
        rec(g, edges, i + 1, assign, all, need)
    }
    rec(g, &edges, 0, &mut assign, &all, n - 1)
}

/// Separations as vertex-side pairs: every (A, B) with A ∪ B = V, no edge
/// between A ∖ B and B ∖ A, and |A ∩ B| < k; one entry per unordered pair.
pub fn separations_from_sides(g: &Multigraph, k: usize) -> Vec<(VertexSet, VertexSet)> {
    let verts: Vec<VertexId> = g.vertices().iter().copied().collect();
    let n = verts.len();
    let mut seen: BTreeSet<(VertexSet, VertexSet)> = BTreeSet::new();
    let mut out = Vec::new();
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut a = VertexSet::new();
        let mut b = VertexSet::new();
        let mut c = code;
        for &v in &verts {
            match c % 3 {
                0 => {
                    a.insert(v);
                }
                1 => {
                    b.insert(v);
                }
                _ => {
                    a.insert(v);
                    b.insert(v);
                }
            }
            c /= 3;
        }
        if a.intersection(&b).count() >= k {
            continue;
        }
        let crossing = g.edges().any(|(_, u, v)| {
            let (ua, ub) = (a.contains(&u) && !b.contains(&u), b.contains(&u) && !a.contains(&u));
            let (va, vb) = (a.contains(&v) && !b.contains(&v), b.contains(&v) && !a.contains(&v));
            (ua && vb) || (ub && va)
        });
        if crossing {
            continue;
        }
        let key = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        if seen.insert(key) {
            out.push((a, b));
        }
    }
    out
}

type Oriented = (VertexSet, VertexSet);

fn leq(r: &Oriented, s: &Oriented) -> bool {
    r.0.is_subset(&s.0) && r.1.is_superset(&s.1)
}

fn rev(r: &Oriented) -> Oriented {
    (r.1.clone(), r.0.clone())
}

/// All maximal cliques of the star-compatibility relation (Bron–Kerbosch).
fn maximal_stars(o: &[Oriented]) -> Vec<Vec<usize>> {
    let n = o.len();
    let adj: Vec<BTreeSet<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && leq(&o[i], &rev(&o[j]))).collect())
        .collect();
    let mut out = Vec::new();
    fn bk(r: Vec<usize>, p: BTreeSet<usize>, x: BTreeSet<usize>, adj: &[BTreeSet<usize>], out: &mut Vec<Vec<usize>>) {
        if p.is_empty() && x.is_empty() {
            out.push(r);
            return;
        }
        let mut p = p;
        let mut x = x;
        for v in p.clone() {
            let mut r2 = r.clone();
            r2.push(v);
            let p2 = p.intersection(&adj[v]).copied().collect();
            let x2 = x.intersection(&adj[v]).copied().collect();
            bk(r2, p2, x2, adj, out);
            p.remove(&v);
            x.insert(v);
        }
    }
    bk(Vec::new(), (0..n).collect(), BTreeSet::new(), &adj, &mut out);
    out
}

/// Tangles by the definition: every orientation of the vertex-side
/// separations, filtered by pairwise consistency, then rejected when some
/// maximal star has interior smaller than `star_bound`. Each tangle is
/// returned as a sorted list of (A, B) pairs.
pub fn tangles_oracle(g: &Multigraph, k: usize, star_bound: Option<usize>) -> BTreeSet<Vec<Oriented>> {
    let seps = separations_from_sides(g, k);
    let mut out = BTreeSet::new();
    let mut cur: Vec<Oriented> = Vec::new();
    fn rec(
        seps: &[(VertexSet, VertexSet)],
        i: usize,
        cur: &mut Vec<Oriented>,
        bound: Option<usize>,
        out: &mut BTreeSet<Vec<Oriented>>,
    ) {
        if i == seps.len() {
            if let Some(b) = bound {
                if !cur.is_empty() {
                    for star in maximal_stars(cur) {
                        let mut inter: Option<VertexSet> = None;
                        for &j in &star {
                            inter = Some(match inter {
                                None => cur[j].1.clone(),
                                Some(s) => s.intersection(&cur[j].1).copied().collect(),
                            });
                        }
                        if inter.map_or(false, |s| s.len() < b) {
                            return;
                        }
                    }
                }
            }
            let mut o = cur.clone();
            o.sort();
            out.insert(o);
            return;
        }
        let (a, b) = &seps[i];
        let mut opts = vec![(a.clone(), b.clone()), (b.clone(), a.clone())];
        opts.dedup();
        for s in opts {
            // Consistency: no distinct r, s with r* < s, in either role.
            let bad = cur.iter().any(|r| {
                let lt = |p: &Oriented, q: &Oriented| p != q && leq(p, q);
                r != &s && (lt(&rev(r), &s) || lt(&rev(&s), r))
            });
            if bad {
                continue;
            }
            cur.push(s);
            rec(seps, i + 1, cur, bound, out);
            cur.pop();
        }
    }
    rec(&seps, 0, &mut cur, star_bound, &mut out);
    out
}

/// p refines q, checked over all vertex pairs: same block in p implies same block in q.
pub fn refines_pairwise(p: &[VertexSet], q: &[VertexSet]) -> bool {
    let block = |parts: &[VertexSet], v: VertexId| parts.iter().position(|b| b.contains(&v));
    let ground: VertexSet = p.iter().flatten().copied().collect();
    let qground: VertexSet = q.iter().flatten().copied().collect();
    if ground != qground {
        return false;
    }
    for &u in &ground {
        for &v in &ground {
            if block(p, u) == block(p, v) && block(q, u) != block(q, v) {
                return false;
            }
        }
    }
    true
}
