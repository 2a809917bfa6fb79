//! Auxiliary edges, the linear order V* of a ∼-class, skeleton ATST levels by
//! star expansion, and the tree-packing pipeline over the system {G.F}.

use crate::invsys::{gf_level, thread_search, InvsysError, TableSystem};
use crate::multigraph::{
    pack_trees, violating_partition, violating_partition_hint, EdgeId, EdgeSet, GraphError, Multigraph, VertexId,
    VertexPartition, VertexSet, CUT_CONDITION_GUARD,
};
use crate::presentation::Presentation;
use crate::structure::{enumerate_crit, not_finitely_separable, Point, Separability, StructureError};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

/// Candidate packings kept per level before thread search.
pub const PACKING_CAP: usize = 200;
/// Search nodes spent per level while enumerating packings.
const PACKING_BUDGET: usize = 200_000;
/// Critical-set size bound when no certificate is available.
const CRIT_SIZE: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PackingError {
    #[error("the vertices are finitely separable")]
    NotEquivalent,
    #[error("no thread exists within the enumeration bound")]
    ThreadEmpty,
    #[error("no path family is known for this pair")]
    NoPathFamily,
    #[error("the enumeration does not cover the component")]
    EnumerationIncomplete,
    #[error("level {level} violates the cut condition")]
    CutConditionFailed { level: usize, partition: VertexPartition },
    #[error("the presented graph is not connected")]
    Disconnected,
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Invsys(#[from] InvsysError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

type Result<T> = std::result::Result<T, PackingError>;

/// An auxiliary edge: a dominating vertex to its end, or two vertices of a
/// common critical set labelled by that set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AuxEdge {
    End { u: VertexId, end: String },
    Crit { a: VertexId, b: VertexId, x: VertexSet },
}

impl AuxEdge {
    pub fn endpoints(&self) -> (Point, Point) {
        match self {
            AuxEdge::End { u, end } => (Point::Vertex(*u), Point::End(end.clone())),
            AuxEdge::Crit { a, b, .. } => (Point::Vertex(*a), Point::Vertex(*b)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuxGraph {
    pub level: usize,
    #[serde(skip)]
    pub base: Multigraph,
    pub aux: Vec<AuxEdge>,
    /// Critical sets and domination come from a certificate rather than witnesses.
    pub certified: bool,
}

impl AuxGraph {
    /// Components of the graph on points formed by the auxiliary edges alone.
    pub fn aux_components(&self) -> Vec<BTreeSet<Point>> {
        let pts: BTreeSet<Point> = self
            .aux
            .iter()
            .flat_map(|e| {
                let (a, b) = e.endpoints();
                [a, b]
            })
            .collect();
        point_components(&pts, &self.aux)
    }
}

fn point_components(pts: &BTreeSet<Point>, edges: &[AuxEdge]) -> Vec<BTreeSet<Point>> {
    let mut adj: BTreeMap<&Point, Vec<Point>> = BTreeMap::new();
    for e in edges {
        let (a, b) = e.endpoints();
        if pts.contains(&a) && pts.contains(&b) {
            adj.entry(pts.get(&a).expect("member")).or_default().push(b.clone());
            adj.entry(pts.get(&b).expect("member")).or_default().push(a);
        }
    }
    let mut seen: BTreeSet<Point> = BTreeSet::new();
    let mut out = Vec::new();
    for s in pts {
        if seen.contains(s) {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut q = VecDeque::from([s.clone()]);
        seen.insert(s.clone());
        while let Some(v) = q.pop_front() {
            for w in adj.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
                if seen.insert(w.clone()) {
                    q.push_back(w.clone());
                }
            }
            comp.insert(v);
        }
        out.push(comp);
    }
    out
}

/// Auxiliary edges at level n: end edges for certified domination, crit edges
/// for every pair inside a certified (or k-witnessed) critical set.
pub fn aux_graph(p: &Presentation, n: usize, k: usize) -> AuxGraph {
    let lg = p.truncate(n);
    let mut aux = Vec::new();
    let cert = p.certificate(n);
    let crit: Vec<VertexSet> = match &cert {
        Some(c) => {
            for e in &c.ends {
                for &u in &e.dominators {
                    aux.push(AuxEdge::End { u, end: e.id.clone() });
                }
            }
            c.crit_within(lg.vertices())
        }
        None => enumerate_crit(p, CRIT_SIZE, n, k).into_iter().map(|w| w.y).collect(),
    };
    for x in crit {
        let list: Vec<VertexId> = x.iter().copied().collect();
        for (i, &a) in list.iter().enumerate() {
            for &b in &list[i + 1..] {
                aux.push(AuxEdge::Crit { a, b, x: x.clone() });
            }
        }
    }
    aux.sort();
    aux.dedup();
    AuxGraph {
        level: n,
        base: lg.graph.clone(),
        aux,
        certified: cert.is_some(),
    }
}

/// The linear order V* extracted from a ∼-class path family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VStar {
    pub x: VertexId,
    pub y: VertexId,
    pub depth: usize,
    /// V* in increasing order; x first, y last.
    pub order: Vec<VertexId>,
    /// The thread: the kept order type at each X_i = V(G_i).
    pub thread: Vec<Vec<VertexId>>,
    pub paths_sampled: usize,
    pub threshold: usize,
}

/// Paths sampled at depth d.
pub fn vstar_sample_size(d: usize) -> usize {
    4 * (d + 1) * (d + 1)
}

fn ceil_sqrt(m: usize) -> usize {
    let mut r = (m as f64).sqrt() as usize;
    while r * r < m {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= m {
        r -= 1;
    }
    r
}

/// Builds 𝔏_{X_i} from the first m(d) paths of the family over X_i = V(G_i)
/// and reads V* off the least thread.
pub fn vstar(p: &Presentation, x: VertexId, y: VertexId, d: usize) -> Result<VStar> {
    let lg = p.truncate(d);
    for v in [x, y] {
        if !lg.graph.has_vertex(v) {
            return Err(PackingError::UnknownVertex(v));
        }
    }
    match p.certificate(d) {
        Some(c) => {
            let same = match (c.class_of_vertex(x), c.class_of_vertex(y)) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            };
            if !same {
                return Err(PackingError::NotEquivalent);
            }
        }
        None => {
            if let Separability::Separated { .. } =
                not_finitely_separable(p, &Point::Vertex(x), &Point::Vertex(y), d, None)?
            {
                return Err(PackingError::NotEquivalent);
            }
        }
    }
    let m = vstar_sample_size(d);
    let threshold = ceil_sqrt(m);
    let top = lg.vertices().clone();
    let mut traces = Vec::with_capacity(m);
    for i in 0..m {
        traces.push(p.path_trace(x, y, i, &top).ok_or(PackingError::NoPathFamily)?);
    }
    let xs: Vec<VertexSet> = (0..=d).map(|i| p.truncate(i).vertices().clone()).collect();
    let levels: Vec<Vec<Vec<VertexId>>> = xs
        .iter()
        .map(|xi| {
            let mut count: BTreeMap<Vec<VertexId>, usize> = BTreeMap::new();
            for t in &traces {
                let ty: Vec<VertexId> = t.iter().copied().filter(|v| xi.contains(v)).collect();
                *count.entry(ty).or_default() += 1;
            }
            count.into_iter().filter(|&(_, c)| c >= threshold).map(|(t, _)| t).collect()
        })
        .collect();
    let sys = TableSystem {
        levels,
        bond_fn: Box::new(move |_, i, pt: &Vec<VertexId>| pt.iter().copied().filter(|v| xs[i].contains(v)).collect()),
    };
    let thread = thread_search(&sys, &sys.chain())?.ok_or(PackingError::ThreadEmpty)?;
    let order = thread.top().cloned().unwrap_or_default();
    Ok(VStar {
        x,
        y,
        depth: d,
        order,
        thread: thread.points.into_iter().map(|(_, t)| t).collect(),
        paths_sampled: m,
        threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GapKind {
    EndGap { end: String },
    CritGap { x: VertexSet },
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Gap {
    pub u: VertexId,
    pub t: VertexId,
    pub kind: GapKind,
}

/// For consecutive u < t of V*: a common dominated end, else a common critical
/// set, else Unknown. Adjacent pairs with neither get no entry.
pub fn classify_gaps(p: &Presentation, vs: &VStar, n: usize) -> Vec<Gap> {
    let cert = p.certificate(n);
    let lg = p.truncate(n);
    let mut out = Vec::new();
    for w in vs.order.windows(2) {
        let (u, t) = (w[0], w[1]);
        let kind = cert.as_ref().and_then(|c| {
            if let Some(e) = c
                .ends
                .iter()
                .find(|e| e.dominators.contains(&u) && e.dominators.contains(&t))
            {
                return Some(GapKind::EndGap { end: e.id.clone() });
            }
            c.crit
                .iter()
                .filter(|x| x.contains(&u) && x.contains(&t))
                .min_by_key(|x| (x.len(), (*x).clone()))
                .map(|x| GapKind::CritGap { x: x.clone() })
        });
        match kind {
            Some(kind) => out.push(Gap { u, t, kind }),
            None if lg.graph.neighbours(u).contains(&t) => {}
            None => out.push(Gap { u, t, kind: GapKind::Unknown }),
        }
    }
    out
}

/// A vertex of H_n: a singleton {u_i} or a block of 𝒜 − X_n.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HVertex {
    Single(VertexId),
    Block(BTreeSet<Point>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AtstLevel {
    pub n: usize,
    pub vertices: Vec<HVertex>,
    /// Tree edges: auxiliary edges joining distinct vertices of H_n.
    pub edges: Vec<AuxEdge>,
}

impl AtstLevel {
    /// The H_n vertex containing a point.
    pub fn home(&self, pt: &Point) -> Option<&HVertex> {
        self.vertices.iter().find(|h| match h {
            HVertex::Single(u) => pt == &Point::Vertex(*u),
            HVertex::Block(b) => b.contains(pt),
        })
    }
}

/// Skeleton ATST levels T_0, …, T_m on the component `comp`: T_n arises from
/// T_{n−1} by expanding the block containing u_{n−1} into a star centred at {u_{n−1}}.
pub fn atst_levels(aux: &AuxGraph, comp: &BTreeSet<Point>, enumeration: &[VertexId], m: usize) -> Result<Vec<AtstLevel>> {
    if enumeration.len() < m || enumeration[..m].iter().any(|u| !comp.contains(&Point::Vertex(*u))) {
        return Err(PackingError::EnumerationIncomplete);
    }
    let edges: Vec<AuxEdge> = aux
        .aux
        .iter()
        .filter(|e| {
            let (a, b) = e.endpoints();
            comp.contains(&a) && comp.contains(&b)
        })
        .cloned()
        .collect();
    let mut levels = vec![AtstLevel {
        n: 0,
        vertices: vec![HVertex::Block(comp.clone())],
        edges: Vec::new(),
    }];
    let mut removed: BTreeSet<Point> = BTreeSet::new();
    for step in 1..=m {
        let u = enumeration[step - 1];
        let prev = levels.last().expect("nonempty");
        let up = Point::Vertex(u);
        let old = prev.home(&up).cloned().ok_or(PackingError::EnumerationIncomplete)?;
        let HVertex::Block(block) = &old else {
            return Err(PackingError::EnumerationIncomplete);
        };
        removed.insert(up.clone());
        let rest: BTreeSet<Point> = block.iter().filter(|q| **q != up).cloned().collect();
        let parts = point_components(&rest, &edges);
        let mut vertices: Vec<HVertex> = prev.vertices.iter().filter(|h| **h != old).cloned().collect();
        vertices.push(HVertex::Single(u));
        vertices.extend(parts.iter().cloned().map(HVertex::Block));
        vertices.sort();
        let mut tree = prev.edges.clone();
        // One edge from the centre to each new block (blocks of a connected set all attach to u).
        for part in &parts {
            let e = edges
                .iter()
                .find(|e| {
                    let (a, b) = e.endpoints();
                    (a == up && part.contains(&b)) || (b == up && part.contains(&a))
                })
                .ok_or(PackingError::EnumerationIncomplete)?;
            tree.push(e.clone());
        }
        tree.sort();
        levels.push(AtstLevel {
            n: step,
            vertices,
            edges: tree,
        });
    }
    Ok(levels)
}

/// One level of a packing thread: the F-set and the trees of G.F.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PackLevel {
    #[serde(rename = "F")]
    pub f: EdgeSet,
    pub trees: Vec<EdgeSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PackingThread {
    pub k: usize,
    pub evaluated_at: usize,
    pub levels: Vec<PackLevel>,
    /// Tree index of every edge used at the top level.
    pub limit_assignment: BTreeMap<EdgeId, usize>,
    /// Auxiliary edges shared by all k trees, one skeleton tree per ∼-class.
    pub aux_completion: Vec<AuxEdge>,
    pub enumeration_cap: usize,
    /// Auxiliary completion is built on skeleton components.
    pub skeleton: bool,
}

/// A packing as a sorted list of trees, so tree labels are canonical.
type Packing = Vec<EdgeSet>;

struct Dsu(BTreeMap<VertexId, VertexId>);

impl Dsu {
    fn find(&mut self, v: VertexId) -> VertexId {
        let p = *self.0.get(&v).unwrap_or(&v);
        if p == v {
            return v;
        }
        let r = self.find(p);
        self.0.insert(v, r);
        r
    }
}

/// Up to `cap` packings of k edge-disjoint spanning trees, tree labels broken
/// by first edge, within a node budget. Falls back to the matroid-union packing.
fn enumerate_packings(g: &Multigraph, k: usize, cap: usize) -> Result<Vec<Packing>> {
    let need = g.vertex_count().saturating_sub(1);
    let edges: Vec<(EdgeId, VertexId, VertexId)> = g.edges().filter(|&(_, u, v)| u != v).collect();
    let mut out: BTreeSet<Packing> = BTreeSet::new();
    let mut budget = PACKING_BUDGET;
    let mut trees: Vec<Vec<(EdgeId, VertexId, VertexId)>> = vec![Vec::new(); k];
    #[allow(clippy::too_many_arguments)]
    fn rec(
        edges: &[(EdgeId, VertexId, VertexId)],
        i: usize,
        need: usize,
        cap: usize,
        trees: &mut Vec<Vec<(EdgeId, VertexId, VertexId)>>,
        out: &mut BTreeSet<Packing>,
        budget: &mut usize,
    ) {
        if out.len() >= cap || *budget == 0 {
            return;
        }
        *budget -= 1;
        if trees.iter().all(|t| t.len() == need) {
            let mut p: Packing = trees.iter().map(|t| t.iter().map(|e| e.0).collect()).collect();
            p.sort();
            out.insert(p);
            return;
        }
        if i == edges.len() {
            return;
        }
        let missing: usize = trees.iter().map(|t| need - t.len()).sum();
        if missing > edges.len() - i {
            return;
        }
        let (e, u, v) = edges[i];
        for j in 0..trees.len() {
            if trees[j].len() == need || (j > 0 && trees[j - 1].is_empty()) {
                continue;
            }
            let mut dsu = Dsu(BTreeMap::new());
            for &(_, a, b) in &trees[j] {
                let (ra, rb) = (dsu.find(a), dsu.find(b));
                dsu.0.insert(ra, rb);
            }
            if dsu.find(u) == dsu.find(v) {
                continue;
            }
            trees[j].push((e, u, v));
            rec(edges, i + 1, need, cap, trees, out, budget);
            trees[j].pop();
        }
        rec(edges, i + 1, need, cap, trees, out, budget);
    }
    rec(&edges, 0, need, cap, &mut trees, &mut out, &mut budget);
    if out.is_empty() {
        if let Some(mut p) = pack_trees(g, k)? {
            p.sort();
            out.insert(p);
        }
    }
    Ok(out.into_iter().collect())
}

fn restrict(p: &Packing, cross: &EdgeSet) -> Packing {
    let mut r: Packing = p.iter().map(|t| t.intersection(cross).copied().collect()).collect();
    r.sort();
    r
}

/// Packs k edge-disjoint spanning trees into G.F_i for F_i = E(G_i), i < m,
/// all evaluated at n = m + 3, and lifts a compatible sequence to a limit.
pub fn pack_pipeline(p: &Presentation, k: usize, m: usize) -> Result<PackingThread> {
    let n = m + 3;
    match p.certificate(n) {
        Some(c) if !c.flags.connected => return Err(PackingError::Disconnected),
        None if !p.truncate(n).graph.is_connected() => return Err(PackingError::Disconnected),
        _ => {}
    }
    let mut levels = Vec::new();
    let mut fs = Vec::new();
    let mut cross = Vec::new();
    for i in 0..m {
        let f = p.truncate(i).graph.edge_ids();
        let h = gf_level(p, &f, n)?;
        let packs = enumerate_packings(&h, k, PACKING_CAP)?;
        if packs.is_empty() {
            let partition = if h.vertex_count() <= CUT_CONDITION_GUARD {
                violating_partition(&h, k)?
            } else {
                violating_partition_hint(&h, k)
            };
            return match partition {
                Some(partition) => Err(PackingError::CutConditionFailed { level: i, partition }),
                None => Err(PackingError::ThreadEmpty),
            };
        }
        cross.push(h.edges().filter(|&(_, a, b)| a != b).map(|(e, _, _)| e).collect::<EdgeSet>());
        levels.push(packs);
        fs.push(f);
    }
    let cross_for_bond = cross.clone();
    let sys = TableSystem {
        levels,
        bond_fn: Box::new(move |_, i, pt: &Packing| restrict(pt, &cross_for_bond[i])),
    };
    let thread = thread_search(&sys, &sys.chain())?.ok_or(PackingError::ThreadEmpty)?;
    let chosen: Vec<Packing> = thread.points.into_iter().map(|(_, pk)| pk).collect();
    let mut limit_assignment = BTreeMap::new();
    if let Some(top) = chosen.last() {
        for (j, t) in top.iter().enumerate() {
            for &e in t {
                limit_assignment.insert(e, j);
            }
        }
    }
    let aux = aux_graph(p, n, 3);
    let mut aux_completion = Vec::new();
    if let Some(c) = p.certificate(n) {
        let comps = aux.aux_components();
        for class in &c.sim_classes {
            let Some(&first) = class.vertices.iter().next() else { continue };
            let Some(comp) = comps.iter().find(|a| a.contains(&Point::Vertex(first))) else {
                continue;
            };
            let enumeration: Vec<VertexId> = comp
                .iter()
                .filter_map(|q| match q {
                    Point::Vertex(v) => Some(*v),
                    Point::End(_) => None,
                })
                .collect();
            let ts = atst_levels(&aux, comp, &enumeration, enumeration.len())?;
            for e in &ts.last().expect("level 0 exists").edges {
                if !aux_completion.contains(e) {
                    aux_completion.push(e.clone());
                }
            }
        }
    }
    aux_completion.sort();
    Ok(PackingThread {
        k,
        evaluated_at: n,
        levels: fs
            .into_iter()
            .zip(chosen)
            .map(|(f, trees)| PackLevel { f, trees })
            .collect(),
        limit_assignment,
        aux_completion,
        enumeration_cap: PACKING_CAP,
        skeleton: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::Family;

    #[test]
    fn aux_examples() {
        let p = Presentation::family(Family::K2Inf);
        let a = aux_graph(&p, 6, 3);
        let (x, y) = (p.id_at("x", 6).unwrap(), p.id_at("y", 6).unwrap());
        assert_eq!(
            a.aux,
            vec![AuxEdge::Crit {
                a: x.min(y),
                b: x.max(y),
                x: VertexSet::from([x, y])
            }]
        );
        let dr = Presentation::family(Family::DominatedRay);
        let a = aux_graph(&dr, 6, 3);
        assert_eq!(a.aux.len(), 1);
        assert!(matches!(&a.aux[0], AuxEdge::End { end, .. } if end == "omega"));
    }

    #[test]
    fn vstar_k2inf() {
        let p = Presentation::family(Family::K2Inf);
        let (x, y) = (p.id_at("x", 6).unwrap(), p.id_at("y", 6).unwrap());
        let vs = vstar(&p, x, y, 6).unwrap();
        assert_eq!(vs.order, vec![x, y]);
        let gaps = classify_gaps(&p, &vs, 6);
        assert_eq!(gaps.len(), 1);
        assert_eq!(gaps[0].kind, GapKind::CritGap { x: VertexSet::from([x, y]) });
        let dr = Presentation::family(Family::DominatedRay);
        let (hub, v0) = (dr.id_at("hub", 6).unwrap(), dr.id_at("v0", 6).unwrap());
        assert_eq!(vstar(&dr, hub, v0, 6), Err(PackingError::NotEquivalent));
    }

    #[test]
    fn atst_crit_chain() {
        let p = Presentation::family(Family::CritChain);
        let aux = aux_graph(&p, 6, 3);
        let a0 = p.id_at("a0", 6).unwrap();
        let comp = aux
            .aux_components()
            .into_iter()
            .find(|c| c.contains(&Point::Vertex(a0)))
            .unwrap();
        let en: Vec<VertexId> = (0..5).map(|i| p.id_at(&format!("a{i}"), 6).unwrap()).collect();
        let ts = atst_levels(&aux, &comp, &en, 4).unwrap();
        for t in &ts {
            assert_eq!(t.edges.len() + 1, t.vertices.len());
        }
        for w in ts.windows(2) {
            assert!(w[0].edges.iter().all(|e| w[1].edges.contains(e)));
        }
    }

    #[test]
    fn pipeline_contrast() {
        let p = Presentation::family(Family::K2Inf);
        assert!(pack_trees(&p.truncate(5).graph, 2).unwrap().is_none());
        let t = pack_pipeline(&p, 2, 5).unwrap();
        assert_eq!(t.aux_completion.len(), 1);
        let ray = Presentation::family(Family::Ray);
        assert!(matches!(
            pack_pipeline(&ray, 2, 5),
            Err(PackingError::CutConditionFailed { .. })
        ));
    }
}
