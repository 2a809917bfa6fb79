//! Unit-capacity flows for Menger-type quantities.

use super::{EdgeId, EdgeSet, GraphError, Multigraph, VertexId, VertexSet};
use serde::Serialize;
use std::collections::{BTreeMap, VecDeque};

const INF: u32 = u32::MAX / 4;

/// Directed flow network solved with Dinic's algorithm.
struct Network {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u32>,
}

impl Network {
    fn new(n: usize) -> Self {
        Network {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    /// Adds arc u -> v; returns the arc index (its reverse is index ^ 1).
    fn arc(&mut self, u: usize, v: usize, c: u32) -> usize {
        let id = self.to.len();
        self.head[u].push(id);
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(id + 1);
        self.to.push(u);
        self.cap.push(0);
        id
    }

    fn levels(&self, s: usize) -> Vec<i64> {
        let mut level = vec![-1i64; self.head.len()];
        level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &a in &self.head[v] {
                let w = self.to[a];
                if self.cap[a] > 0 && level[w] < 0 {
                    level[w] = level[v] + 1;
                    q.push_back(w);
                }
            }
        }
        level
    }

    fn push(&mut self, v: usize, t: usize, f: u32, level: &[i64], it: &mut [usize]) -> u32 {
        if v == t {
            return f;
        }
        while it[v] < self.head[v].len() {
            let a = self.head[v][it[v]];
            let w = self.to[a];
            if self.cap[a] > 0 && level[w] == level[v] + 1 {
                let d = self.push(w, t, f.min(self.cap[a]), level, it);
                if d > 0 {
                    self.cap[a] -= d;
                    self.cap[a ^ 1] += d;
                    return d;
                }
            }
            it[v] += 1;
        }
        0
    }

    /// Max flow from s to t, stopping once `limit` is reached.
    fn max_flow(&mut self, s: usize, t: usize, limit: u32) -> u32 {
        let mut total = 0;
        while total < limit {
            let level = self.levels(s);
            if level[t] < 0 {
                break;
            }
            let mut it = vec![0; self.head.len()];
            loop {
                let f = self.push(s, t, limit - total, &level, &mut it);
                if f == 0 {
                    break;
                }
                total += f;
                if total >= limit {
                    break;
                }
            }
        }
        total
    }

    fn reachable(&self, s: usize) -> Vec<bool> {
        self.levels(s).into_iter().map(|l| l >= 0).collect()
    }
}

/// Dense renumbering of a graph's vertices.
struct Index {
    pos: BTreeMap<VertexId, usize>,
    verts: Vec<VertexId>,
}

impl Index {
    fn of(g: &Multigraph) -> Self {
        let verts: Vec<VertexId> = g.vertices().iter().copied().collect();
        let pos = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        Index { pos, verts }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Connectivity {
    /// Maximum number of a–b paths pairwise sharing no inner vertex and no edge.
    pub internally_disjoint_paths: usize,
    /// Minimum number of edges whose removal separates a from b.
    pub edge_cut: usize,
}

/// Exact local vertex and edge connectivity between two distinct vertices.
pub fn local_connectivity(g: &Multigraph, a: VertexId, b: VertexId) -> Result<Connectivity, GraphError> {
    for v in [a, b] {
        if !g.has_vertex(v) {
            return Err(GraphError::UnknownVertex(v));
        }
    }
    if a == b {
        return Err(GraphError::SameVertex(a));
    }
    let ix = Index::of(g);
    let n = ix.verts.len();
    // Split vertices: v_in = 2i, v_out = 2i + 1; direct a–b edges are counted apart.
    let mut net = Network::new(2 * n);
    let mut direct = 0usize;
    for (i, &v) in ix.verts.iter().enumerate() {
        let c = if v == a || v == b { INF } else { 1 };
        net.arc(2 * i, 2 * i + 1, c);
    }
    for (_, u, v) in g.edges() {
        if u == v {
            continue;
        }
        if (u == a && v == b) || (u == b && v == a) {
            direct += 1;
            continue;
        }
        let (pu, pv) = (ix.pos[&u], ix.pos[&v]);
        net.arc(2 * pu + 1, 2 * pv, 1);
        net.arc(2 * pv + 1, 2 * pu, 1);
    }
    let paths = net.max_flow(2 * ix.pos[&a] + 1, 2 * ix.pos[&b], INF) as usize + direct;

    let mut net = Network::new(n);
    for (_, u, v) in g.edges() {
        if u != v {
            let (pu, pv) = (ix.pos[&u], ix.pos[&v]);
            net.arc(pu, pv, 1);
            net.arc(pv, pu, 1);
        }
    }
    let cut = net.max_flow(ix.pos[&a], ix.pos[&b], INF) as usize;
    Ok(Connectivity {
        internally_disjoint_paths: paths,
        edge_cut: cut,
    })
}

/// Up to `limit` pairwise edge-disjoint a–b paths, each as a vertex sequence.
pub fn edge_disjoint_paths(g: &Multigraph, a: VertexId, b: VertexId, limit: usize) -> Vec<Vec<VertexId>> {
    if a == b || !g.has_vertex(a) || !g.has_vertex(b) {
        return Vec::new();
    }
    let ix = Index::of(g);
    let mut net = Network::new(ix.verts.len());
    let mut arcs: Vec<(usize, usize)> = Vec::new();
    for (_, u, v) in g.edges() {
        if u != v {
            let (pu, pv) = (ix.pos[&u], ix.pos[&v]);
            let x = net.arc(pu, pv, 1);
            let y = net.arc(pv, pu, 1);
            arcs.push((x, y));
        }
    }
    let (s, t) = (ix.pos[&a], ix.pos[&b]);
    let f = net.max_flow(s, t, limit as u32) as usize;
    // Net flow per undirected edge: +1 means u -> v, -1 means v -> u.
    let mut out_arcs: Vec<Vec<usize>> = vec![Vec::new(); ix.verts.len()];
    for &(x, y) in &arcs {
        let fx = 1 - net.cap[x] as i64;
        let fy = 1 - net.cap[y] as i64;
        let d = fx - fy;
        if d > 0 {
            out_arcs[net.to[x ^ 1]].push(net.to[x]);
        } else if d < 0 {
            out_arcs[net.to[y ^ 1]].push(net.to[y]);
        }
    }
    let mut paths = Vec::new();
    for _ in 0..f {
        let mut path = vec![s];
        let mut v = s;
        let mut guard = 0;
        while v != t && guard <= arcs.len() {
            let Some(w) = out_arcs[v].pop() else { break };
            path.push(w);
            v = w;
            guard += 1;
        }
        if v == t {
            paths.push(shortcut(path).into_iter().map(|i| ix.verts[i]).collect());
        }
    }
    paths
}

/// Removes cycles from a walk so that each vertex occurs once.
fn shortcut(walk: Vec<usize>) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for v in walk {
        if let Some(p) = out.iter().position(|&w| w == v) {
            out.truncate(p + 1);
        } else {
            out.push(v);
        }
    }
    out
}

/// Builds the split network for fans from `u` into `targets`; returns (net, source, sink).
fn fan_network(g: &Multigraph, u: VertexId, targets: &VertexSet, ix: &Index) -> (Network, usize, usize) {
    let n = ix.verts.len();
    let sink = 2 * n;
    let mut net = Network::new(2 * n + 1);
    for (i, &v) in ix.verts.iter().enumerate() {
        let c = if v == u { INF } else { 1 };
        net.arc(2 * i, 2 * i + 1, c);
        if targets.contains(&v) && v != u {
            net.arc(2 * i + 1, sink, 1);
        }
    }
    for (_, a, b) in g.edges() {
        if a != b {
            // Only vertices are capacitated, so every minimum cut is a vertex cut.
            let (pa, pb) = (ix.pos[&a], ix.pos[&b]);
            net.arc(2 * pa + 1, 2 * pb, INF);
            net.arc(2 * pb + 1, 2 * pa, INF);
        }
    }
    (net, 2 * ix.pos[&u] + 1, sink)
}

/// Size of a largest u–`targets` fan: paths from u ending in distinct targets,
/// pairwise sharing only u.
pub fn vertex_fan(g: &Multigraph, u: VertexId, targets: &VertexSet, limit: usize) -> usize {
    if !g.has_vertex(u) {
        return 0;
    }
    let ix = Index::of(g);
    let (mut net, s, t) = fan_network(g, u, targets, &ix);
    net.max_flow(s, t, limit as u32) as usize
}

/// A minimum vertex set avoiding u that meets every u–`targets` path, chosen
/// as close to u as possible. Targets themselves may be cut.
pub fn min_vertex_cut_near(g: &Multigraph, u: VertexId, targets: &VertexSet) -> VertexSet {
    if !g.has_vertex(u) {
        return VertexSet::new();
    }
    let ix = Index::of(g);
    let (mut net, s, t) = fan_network(g, u, targets, &ix);
    net.max_flow(s, t, INF);
    let reach = net.reachable(s);
    ix.verts
        .iter()
        .enumerate()
        .filter(|&(i, &v)| v != u && reach[2 * i] && !reach[2 * i + 1])
        .map(|(_, &v)| v)
        .collect()
}

/// Minimum a–b vertex separator avoiding `uncuttable`, a and b. Returns the
/// separator value (capped at `limit`) and, when below the cap, the separator
/// chosen nearest a. Adjacent a, b cannot be separated (value `limit`).
pub fn min_vertex_separator(
    g: &Multigraph,
    a: VertexId,
    b: VertexId,
    uncuttable: &VertexSet,
    limit: usize,
) -> (usize, Option<VertexSet>) {
    if !g.has_vertex(a) || !g.has_vertex(b) || a == b {
        return (limit, None);
    }
    let ix = Index::of(g);
    let n = ix.verts.len();
    let mut net = Network::new(2 * n);
    for (i, &v) in ix.verts.iter().enumerate() {
        let c = if v == a || v == b || uncuttable.contains(&v) { INF } else { 1 };
        net.arc(2 * i, 2 * i + 1, c);
    }
    for (_, u, v) in g.edges() {
        if u != v {
            let (pu, pv) = (ix.pos[&u], ix.pos[&v]);
            net.arc(2 * pu + 1, 2 * pv, INF);
            net.arc(2 * pv + 1, 2 * pu, INF);
        }
    }
    let s = 2 * ix.pos[&a] + 1;
    let t = 2 * ix.pos[&b];
    let value = net.max_flow(s, t, limit as u32) as usize;
    if value >= limit {
        return (limit, None);
    }
    let reach = net.reachable(s);
    let cut = ix
        .verts
        .iter()
        .enumerate()
        .filter(|&(i, _)| reach[2 * i] && !reach[2 * i + 1])
        .map(|(_, &v)| v)
        .collect();
    (value, Some(cut))
}

/// Minimum a–b edge cut in which a's side avoids `forbidden` (merged into
/// the sink). Returns the cut edges and a's side, or None when a is forbidden.
pub fn min_edge_cut_avoiding(
    g: &Multigraph,
    a: VertexId,
    b: VertexId,
    forbidden: &VertexSet,
) -> Option<(EdgeSet, VertexSet)> {
    if !g.has_vertex(a) || !g.has_vertex(b) || a == b || forbidden.contains(&a) {
        return None;
    }
    let ix = Index::of(g);
    let n = ix.verts.len();
    let sink = n;
    let mut net = Network::new(n + 1);
    let mut arc_edge = Vec::new();
    for (e, u, v) in g.edges() {
        if u != v {
            let (pu, pv) = (ix.pos[&u], ix.pos[&v]);
            net.arc(pu, pv, 1);
            net.arc(pv, pu, 1);
            arc_edge.push((e, u, v));
        }
    }
    for (i, &v) in ix.verts.iter().enumerate() {
        if v == b || forbidden.contains(&v) {
            net.arc(i, sink, INF);
        }
    }
    net.max_flow(ix.pos[&a], sink, INF);
    let reach = net.reachable(ix.pos[&a]);
    let side: VertexSet = ix
        .verts
        .iter()
        .enumerate()
        .filter(|&(i, _)| reach[i])
        .map(|(_, &v)| v)
        .collect();
    let cut = arc_edge
        .into_iter()
        .filter(|&(_, u, v)| side.contains(&u) != side.contains(&v))
        .map(|(e, _, _)| e)
        .collect();
    Some((cut, side))
}

/// Edge-disjoint a–b path edges are recoverable from the vertex sequences;
/// this helper maps a vertex path back to one edge id per step.
pub fn path_edges(g: &Multigraph, path: &[VertexId], used: &mut std::collections::BTreeSet<EdgeId>) -> Option<Vec<EdgeId>> {
    let mut out = Vec::new();
    for w in path.windows(2) {
        let e = g
            .incident(w[0])
            .iter()
            .find(|&&(e, x)| x == w[1] && !used.contains(&e))
            .map(|&(e, _)| e)?;
        used.insert(e);
        out.push(e);
    }
    Some(out)
}
