//! Finite multigraphs with loops and parallel edges.
//!
//! Every truncation-level computation runs on these values. Iteration order is
//! ascending id everywhere, so all derived outputs are deterministic.

mod flow;
mod packing;

pub use flow::{
    edge_disjoint_paths, local_connectivity, min_edge_cut_avoiding, min_vertex_cut_near,
    min_vertex_separator, path_edges, vertex_fan, Connectivity,
};
pub use packing::{pack_trees, violating_partition_hint};

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use thiserror::Error;

pub type VertexId = u32;
pub type EdgeId = u32;
pub type VertexSet = BTreeSet<VertexId>;
pub type EdgeSet = BTreeSet<EdgeId>;

/// Largest vertex count accepted by the brute-force partition searches.
pub const CUT_CONDITION_GUARD: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("partition does not cover the vertex set")]
    PartitionMismatch,
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("graph too large for brute force: {0} vertices (guard {1})")]
    TooLarge(usize, usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("endpoints coincide: {0}")]
    SameVertex(VertexId),
    #[error("partitions have different ground sets")]
    GroundSetMismatch,
    #[error("duplicate edge id {0}")]
    DuplicateEdge(EdgeId),
    #[error("malformed graph: {0}")]
    Malformed(String),
}

/// Finite multigraph. Endpoint pairs are stored as `(min, max)`.
#[derive(Debug, Clone, Default)]
pub struct Multigraph {
    vertices: VertexSet,
    edges: BTreeMap<EdgeId, (VertexId, VertexId)>,
    labels: BTreeMap<VertexId, VertexSet>,
    // Invariant: mirrors `edges`; a loop appears once in its vertex's list.
    adj: BTreeMap<VertexId, Vec<(EdgeId, VertexId)>>,
}

impl PartialEq for Multigraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges && self.labels == other.labels
    }
}

impl Eq for Multigraph {}

impl Multigraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, v: VertexId) {
        if self.vertices.insert(v) {
            self.adj.insert(v, Vec::new());
        }
    }

    pub fn add_edge(&mut self, id: EdgeId, u: VertexId, v: VertexId) -> Result<(), GraphError> {
        if !self.vertices.contains(&u) {
            return Err(GraphError::UnknownVertex(u));
        }
        if !self.vertices.contains(&v) {
            return Err(GraphError::UnknownVertex(v));
        }
        if self.edges.contains_key(&id) {
            return Err(GraphError::DuplicateEdge(id));
        }
        let pair = if u <= v { (u, v) } else { (v, u) };
        self.edges.insert(id, pair);
        self.adj.get_mut(&u).expect("vertex present").push((id, v));
        if u != v {
            self.adj.get_mut(&v).expect("vertex present").push((id, u));
        }
        Ok(())
    }

    /// Adds an edge under the next free id and returns that id.
    pub fn push_edge(&mut self, u: VertexId, v: VertexId) -> Result<EdgeId, GraphError> {
        let id = self.next_edge_id();
        self.add_edge(id, u, v)?;
        Ok(id)
    }

    pub fn next_edge_id(&self) -> EdgeId {
        self.edges.keys().next_back().map_or(0, |e| e + 1)
    }

    pub fn set_label(&mut self, v: VertexId, label: VertexSet) {
        self.labels.insert(v, label);
    }

    pub fn label(&self, v: VertexId) -> Option<&VertexSet> {
        self.labels.get(&v)
    }

    pub fn labels(&self) -> &BTreeMap<VertexId, VertexSet> {
        &self.labels
    }

    pub fn vertices(&self) -> &VertexSet {
        &self.vertices
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn has_edge(&self, e: EdgeId) -> bool {
        self.edges.contains_key(&e)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(id, u, v)` with `u <= v`, ascending by id.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, VertexId, VertexId)> + '_ {
        self.edges.iter().map(|(&e, &(u, v))| (e, u, v))
    }

    pub fn edge_ids(&self) -> EdgeSet {
        self.edges.keys().copied().collect()
    }

    pub fn endpoints(&self, e: EdgeId) -> Option<(VertexId, VertexId)> {
        self.edges.get(&e).copied()
    }

    /// Incident `(edge, other endpoint)` pairs in insertion order.
    pub fn incident(&self, v: VertexId) -> &[(EdgeId, VertexId)] {
        self.adj.get(&v).map_or(&[], |l| l.as_slice())
    }

    /// Degree with loops counted twice.
    pub fn degree(&self, v: VertexId) -> usize {
        self.incident(v)
            .iter()
            .map(|&(_, w)| if w == v { 2 } else { 1 })
            .sum()
    }

    pub fn neighbours(&self, v: VertexId) -> VertexSet {
        self.incident(v)
            .iter()
            .map(|&(_, w)| w)
            .filter(|&w| w != v)
            .collect()
    }

    /// Subgraph induced on `keep`.
    pub fn induced(&self, keep: &VertexSet) -> Multigraph {
        let mut h = Multigraph::new();
        for &v in keep.intersection(&self.vertices) {
            h.add_vertex(v);
            if let Some(l) = self.labels.get(&v) {
                h.set_label(v, l.clone());
            }
        }
        for (e, u, v) in self.edges() {
            if keep.contains(&u) && keep.contains(&v) {
                h.add_edge(e, u, v).expect("endpoints kept");
            }
        }
        h
    }

    /// Copy of the graph without the given edges.
    pub fn without_edges(&self, f: &EdgeSet) -> Multigraph {
        let mut h = Multigraph::new();
        for &v in &self.vertices {
            h.add_vertex(v);
        }
        h.labels = self.labels.clone();
        for (e, u, v) in self.edges() {
            if !f.contains(&e) {
                h.add_edge(e, u, v).expect("endpoints kept");
            }
        }
        h
    }

    /// True when every vertex is reachable from the least one (the empty graph counts).
    pub fn is_connected(&self) -> bool {
        components(self, &VertexSet::new()).len() <= 1
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(MultigraphJson::from(self)).expect("serializable")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, GraphError> {
        let raw: MultigraphJson = serde_json::from_value(value.clone())
            .map_err(|e| GraphError::Malformed(e.to_string()))?;
        raw.try_into()
    }

    /// DOT rendering; labeled (dummy) vertices are drawn as boxes listing their set.
    pub fn to_dot(&self, name: impl Fn(VertexId) -> String) -> String {
        let mut out = String::from("graph G {\n");
        for &v in &self.vertices {
            match self.labels.get(&v) {
                Some(set) => {
                    let inner: Vec<String> = set.iter().map(|&w| name(w)).collect();
                    let _ = writeln!(
                        out,
                        "  n{v} [shape=box, label=\"{{{}}}\"];",
                        inner.join(",")
                    );
                }
                None => {
                    let _ = writeln!(out, "  n{v} [label=\"{}\"];", name(v));
                }
            }
        }
        for (e, u, v) in self.edges() {
            let _ = writeln!(out, "  n{u} -- n{v} [label=\"e{e}\"];");
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Serialize, Deserialize)]
struct MultigraphJson {
    vertices: Vec<VertexId>,
    edges: Vec<(EdgeId, VertexId, VertexId)>,
    #[serde(default)]
    labels: BTreeMap<String, Vec<VertexId>>,
}

impl From<&Multigraph> for MultigraphJson {
    fn from(g: &Multigraph) -> Self {
        MultigraphJson {
            vertices: g.vertices.iter().copied().collect(),
            edges: g.edges().collect(),
            labels: g
                .labels
                .iter()
                .map(|(v, s)| (v.to_string(), s.iter().copied().collect()))
                .collect(),
        }
    }
}

impl TryFrom<MultigraphJson> for Multigraph {
    type Error = GraphError;
    fn try_from(raw: MultigraphJson) -> Result<Self, GraphError> {
        let mut g = Multigraph::new();
        for v in raw.vertices {
            g.add_vertex(v);
        }
        for (e, u, v) in raw.edges {
            g.add_edge(e, u, v)?;
        }
        for (k, set) in raw.labels {
            let v: VertexId = k
                .parse()
                .map_err(|_| GraphError::Malformed(format!("label key {k}")))?;
            if !g.has_vertex(v) {
                return Err(GraphError::UnknownVertex(v));
            }
            g.set_label(v, set.into_iter().collect());
        }
        Ok(g)
    }
}

/// Partition of a finite vertex set; blocks sorted by least element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexPartition {
    blocks: Vec<VertexSet>,
}

impl VertexPartition {
    /// Validates disjointness and non-emptiness, then canonicalizes.
    pub fn new(blocks: Vec<VertexSet>) -> Result<Self, GraphError> {
        let mut seen = VertexSet::new();
        for b in &blocks {
            if b.is_empty() {
                return Err(GraphError::PartitionMismatch);
            }
            for &v in b {
                if !seen.insert(v) {
                    return Err(GraphError::PartitionMismatch);
                }
            }
        }
        let mut blocks = blocks;
        blocks.sort_by_key(|b| *b.iter().next().expect("nonempty"));
        Ok(VertexPartition { blocks })
    }

    pub fn singletons(ground: &VertexSet) -> Self {
        VertexPartition {
            blocks: ground.iter().map(|&v| VertexSet::from([v])).collect(),
        }
    }

    pub fn one_block(ground: &VertexSet) -> Self {
        if ground.is_empty() {
            VertexPartition { blocks: Vec::new() }
        } else {
            VertexPartition {
                blocks: vec![ground.clone()],
            }
        }
    }

    pub fn blocks(&self) -> &[VertexSet] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn ground(&self) -> VertexSet {
        self.blocks.iter().flatten().copied().collect()
    }

    /// Map from vertex to block index.
    pub fn block_index(&self) -> BTreeMap<VertexId, usize> {
        let mut m = BTreeMap::new();
        for (i, b) in self.blocks.iter().enumerate() {
            for &v in b {
                m.insert(v, i);
            }
        }
        m
    }

    /// True when every block of `self` lies inside some block of `other`.
    pub fn refines(&self, other: &VertexPartition) -> bool {
        let idx = other.block_index();
        self.blocks.iter().all(|b| {
            let mut it = b.iter().map(|v| idx.get(v));
            let first = it.next().flatten();
            first.is_some() && it.all(|j| j == first)
        })
    }
}

/// Components of `g - x` with their neighbourhoods in `x`, ordered by least vertex.
pub fn components(g: &Multigraph, x: &VertexSet) -> Vec<(VertexSet, VertexSet)> {
    let mut seen: VertexSet = x.clone();
    let mut out = Vec::new();
    for &s in g.vertices() {
        if seen.contains(&s) {
            continue;
        }
        let mut comp = VertexSet::new();
        let mut nbhd = VertexSet::new();
        let mut stack = vec![s];
        seen.insert(s);
        while let Some(v) = stack.pop() {
            comp.insert(v);
            for &(_, w) in g.incident(v) {
                if x.contains(&w) {
                    nbhd.insert(w);
                } else if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        out.push((comp, nbhd));
    }
    out
}

fn check_cover(g: &Multigraph, p: &VertexPartition) -> Result<BTreeMap<VertexId, usize>, GraphError> {
    let idx = p.block_index();
    if idx.len() != g.vertex_count() || !g.vertices().iter().all(|v| idx.contains_key(v)) {
        return Err(GraphError::PartitionMismatch);
    }
    Ok(idx)
}

/// One vertex per block (id = least member, label = block); only cross-edges survive.
pub fn contract_partition(g: &Multigraph, p: &VertexPartition) -> Result<Multigraph, GraphError> {
    let idx = check_cover(g, p)?;
    let rep: Vec<VertexId> = p
        .blocks()
        .iter()
        .map(|b| *b.iter().next().expect("nonempty"))
        .collect();
    let mut h = Multigraph::new();
    for (i, b) in p.blocks().iter().enumerate() {
        h.add_vertex(rep[i]);
        h.set_label(rep[i], b.clone());
    }
    for (e, u, v) in g.edges() {
        let (bu, bv) = (idx[&u], idx[&v]);
        if bu != bv {
            h.add_edge(e, rep[bu], rep[bv]).expect("block vertices present");
        }
    }
    Ok(h)
}

/// Contracts the components of `g - f`; non-cross edges become loops, so the
/// edge count is preserved.
pub fn contract_by_edges(g: &Multigraph, f: &EdgeSet) -> Result<Multigraph, GraphError> {
    if let Some(&e) = f.iter().find(|e| !g.has_edge(**e)) {
        return Err(GraphError::UnknownEdge(e));
    }
    let rest = g.without_edges(f);
    let comps = components(&rest, &VertexSet::new());
    let mut rep = BTreeMap::new();
    let mut h = Multigraph::new();
    for (c, _) in &comps {
        let r = *c.iter().next().expect("nonempty");
        for &v in c {
            rep.insert(v, r);
        }
        h.add_vertex(r);
        h.set_label(r, c.clone());
    }
    for (e, u, v) in g.edges() {
        h.add_edge(e, rep[&u], rep[&v]).expect("component vertices present");
    }
    Ok(h)
}

/// Number of edges whose endpoints lie in distinct blocks.
pub fn cross_edge_count(g: &Multigraph, p: &VertexPartition) -> Result<usize, GraphError> {
    let idx = check_cover(g, p)?;
    Ok(g.edges().filter(|&(_, u, v)| idx[&u] != idx[&v]).count())
}

/// Calls `f` on every set partition of `items` (restricted growth strings).
/// Stops early when `f` returns false; returns whether it ran to completion.
pub fn for_each_set_partition<T: Clone>(items: &[T], mut f: impl FnMut(&[Vec<T>]) -> bool) -> bool {
    fn rec<T: Clone>(
        items: &[T],
        i: usize,
        blocks: &mut Vec<Vec<T>>,
        f: &mut dyn FnMut(&[Vec<T>]) -> bool,
    ) -> bool {
        if i == items.len() {
            return f(blocks);
        }
        for b in 0..blocks.len() {
            blocks[b].push(items[i].clone());
            let go = rec(items, i + 1, blocks, f);
            blocks[b].pop();
            if !go {
                return false;
            }
        }
        blocks.push(vec![items[i].clone()]);
        let go = rec(items, i + 1, blocks, f);
        blocks.pop();
        go
    }
    rec(items, 0, &mut Vec::new(), &mut f)
}

/// First partition (in restricted-growth order) with fewer than k(|P|-1) cross-edges.
pub fn violating_partition(g: &Multigraph, k: usize) -> Result<Option<VertexPartition>, GraphError> {
    let n = g.vertex_count();
    if n > CUT_CONDITION_GUARD {
        return Err(GraphError::TooLarge(n, CUT_CONDITION_GUARD));
    }
    let verts: Vec<VertexId> = g.vertices().iter().copied().collect();
    let pos: BTreeMap<VertexId, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let ends: Vec<(usize, usize)> = g
        .edges()
        .filter(|&(_, u, v)| u != v)
        .map(|(_, u, v)| (pos[&u], pos[&v]))
        .collect();
    let mut found = None;
    let idx: Vec<usize> = (0..n).collect();
    for_each_set_partition(&idx, |blocks| {
        let mut block_of = vec![0usize; n];
        for (b, members) in blocks.iter().enumerate() {
            for &i in members {
                block_of[i] = b;
            }
        }
        let cross = ends.iter().filter(|&&(a, b)| block_of[a] != block_of[b]).count();
        if cross < k * (blocks.len() - 1) {
            found = Some(
                blocks
                    .iter()
                    .map(|m| m.iter().map(|&i| verts[i]).collect())
                    .collect::<Vec<VertexSet>>(),
            );
            return false;
        }
        true
    });
    Ok(found.map(|b| VertexPartition::new(b).expect("valid partition")))
}

/// True iff every partition P has at least k(|P|-1) cross-edges.
pub fn cut_condition(g: &Multigraph, k: usize) -> Result<bool, GraphError> {
    Ok(violating_partition(g, k)?.is_none())
}

/// Coarsest common refinement: nonempty blockwise intersections.
pub fn refine(p: &VertexPartition, q: &VertexPartition) -> Result<VertexPartition, GraphError> {
    if p.ground() != q.ground() {
        return Err(GraphError::GroundSetMismatch);
    }
    let mut blocks = Vec::new();
    for a in p.blocks() {
        for b in q.blocks() {
            let i: VertexSet = a.intersection(b).copied().collect();
            if !i.is_empty() {
                blocks.push(i);
            }
        }
    }
    VertexPartition::new(blocks)
}
