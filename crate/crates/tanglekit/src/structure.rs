//! Depth-bounded and certified structure: components of complements,
//! critical vertex sets, ends as direction threads, domination, the relations
//! ∼ and ◊···◊, and the compactness predicates.
//!
//! Infinite quantifiers are answered in three states. A certificate upgrades
//! an answer to exact truth; otherwise a level-n witness or refutation is
//! reported, and Unknown is returned when neither exists.

use crate::multigraph::{
    components, local_connectivity, min_edge_cut_avoiding, min_vertex_cut_near,
    min_vertex_separator, vertex_fan, EdgeSet, Multigraph, VertexId, VertexSet,
};
use crate::presentation::{Certificate, LeveledGraph, Presentation};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

/// Levels over which "still growing" is judged (degree growth, newcomers).
pub const GROWTH_WINDOW: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown end {0}")]
    UnknownEnd(String),
    #[error("the end {0} has infinitely many dominating vertices")]
    DominatorsUnbounded(String),
    #[error("not a certified critical set with at least 3 vertices")]
    NotCritical,
    #[error("level {0} is too shallow for this request")]
    InsufficientDepth(usize),
    #[error("the presented graph is not connected")]
    Disconnected,
    #[error("this request needs a certificate")]
    Uncertified,
}

/// A component of G − X at some level; its id is its least vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Comp {
    pub vertices: VertexSet,
    pub nbhd: VertexSet,
}

impl Comp {
    pub fn id(&self) -> VertexId {
        *self.vertices.iter().next().expect("components are nonempty")
    }
}

/// Components of G − X at level n, split into closed and open ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentReport {
    pub level: usize,
    pub separator: VertexSet,
    /// No frontier vertex: vertex set and attachments are final.
    pub closed: Vec<Comp>,
    /// Touches the frontier: may still grow and gain attachments.
    pub open: Vec<Comp>,
}

impl ComponentReport {
    /// All components in order of least vertex.
    pub fn all(&self) -> Vec<&Comp> {
        let mut v: Vec<&Comp> = self.closed.iter().chain(self.open.iter()).collect();
        v.sort_by_key(|c| c.id());
        v
    }

    pub fn find(&self, id: VertexId) -> Option<(&Comp, bool)> {
        self.closed
            .iter()
            .map(|c| (c, true))
            .chain(self.open.iter().map(|c| (c, false)))
            .find(|(c, _)| c.id() == id)
    }

    /// The component containing vertex v, with its closed flag.
    pub fn containing(&self, v: VertexId) -> Option<(&Comp, bool)> {
        self.closed
            .iter()
            .map(|c| (c, true))
            .chain(self.open.iter().map(|c| (c, false)))
            .find(|(c, _)| c.vertices.contains(&v))
    }

    /// Closed components with neighbourhood exactly y.
    pub fn closed_with_nbhd(&self, y: &VertexSet) -> Vec<&Comp> {
        self.closed.iter().filter(|c| &c.nbhd == y).collect()
    }
}

fn report_of(lg: &LeveledGraph, x: &VertexSet) -> ComponentReport {
    let mut closed = Vec::new();
    let mut open = Vec::new();
    for (vertices, nbhd) in components(&lg.graph, x) {
        let c = Comp { vertices, nbhd };
        if c.vertices.is_disjoint(&lg.frontier) {
            closed.push(c);
        } else {
            open.push(c);
        }
    }
    ComponentReport {
        level: lg.level,
        separator: x.clone(),
        closed,
        open,
    }
}

pub fn component_report(p: &Presentation, x: &VertexSet, n: usize) -> Result<ComponentReport, StructureError> {
    let lg = p.truncate(n);
    if let Some(&v) = x.iter().find(|v| !lg.graph.has_vertex(**v)) {
        return Err(StructureError::UnknownVertex(v));
    }
    Ok(report_of(&lg, x))
}

/// True when every vertex of `vertices` appeared within the last
/// `GROWTH_WINDOW` levels before n: the finite-depth mark of an infinite family.
pub fn is_newcomer(lg: &LeveledGraph, vertices: &VertexSet) -> bool {
    let cutoff = lg.level.saturating_sub(GROWTH_WINDOW);
    vertices
        .iter()
        .all(|v| lg.born.get(v).map_or(false, |&b| b > cutoff || lg.level < GROWTH_WINDOW))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CritWitness {
    pub x: VertexSet,
    pub y: VertexSet,
    /// Closed components with neighbourhood exactly y at `level`.
    pub count: usize,
    pub level: usize,
    pub certified: bool,
}

/// Every Y ⊆ X with at least k closed components of G − X having neighbourhood Y.
pub fn crit_of(p: &Presentation, x: &VertexSet, n: usize, k: usize) -> Result<Vec<CritWitness>, StructureError> {
    let report = component_report(p, x, n)?;
    let cert = p.certificate(n);
    let mut counts: BTreeMap<VertexSet, usize> = BTreeMap::new();
    for c in &report.closed {
        if !c.nbhd.is_empty() {
            *counts.entry(c.nbhd.clone()).or_default() += 1;
        }
    }
    Ok(counts
        .into_iter()
        .filter(|&(_, c)| c >= k)
        .map(|(y, count)| CritWitness {
            certified: cert.as_ref().map_or(false, |c| c.crit.contains(&y)),
            x: x.clone(),
            y,
            count,
            level: n,
        })
        .collect())
}

/// crit(X) as used by the inverse systems: the certified critical subsets of
/// X when a certificate exists, else the k-witnessed ones.
pub fn crit_at(p: &Presentation, x: &VertexSet, n: usize, k: usize) -> Vec<VertexSet> {
    match p.certificate(n) {
        Some(c) => c.crit_within(x),
        None => crit_of(p, x, n, k)
            .map(|w| w.into_iter().map(|c| c.y).collect())
            .unwrap_or_default(),
    }
}

/// Vertices present GROWTH_WINDOW levels ago whose degree has grown since.
pub fn growth_candidates(p: &Presentation, n: usize) -> VertexSet {
    let now = p.truncate(n);
    let then = p.truncate(n.saturating_sub(GROWTH_WINDOW));
    then.vertices()
        .iter()
        .copied()
        .filter(|&v| now.graph.degree(v) > then.graph.degree(v))
        .collect()
}

/// All k-witnessed critical sets of size at most s among the growth candidates.
pub fn enumerate_crit(p: &Presentation, s: usize, n: usize, k: usize) -> Vec<CritWitness> {
    let lg = p.truncate(n);
    let cands = growth_candidates(p, n);
    let cert = p.certificate(n);
    let report = report_of(&lg, &cands);

    // Closed components of G − cands grouped by neighbourhood.
    let mut by_type: BTreeMap<VertexSet, usize> = BTreeMap::new();
    for c in &report.closed {
        *by_type.entry(c.nbhd.clone()).or_default() += 1;
    }
    let settled_cands: Vec<VertexId> = cands.iter().copied().filter(|v| !lg.frontier.contains(v)).collect();
    let mut targets: BTreeSet<VertexSet> = by_type
        .keys()
        .filter(|y| !y.is_empty() && y.len() <= s)
        .cloned()
        .collect();
    if !settled_cands.is_empty() {
        // Settled candidates can form closed clusters; examine every small subset.
        let list: Vec<VertexId> = cands.iter().copied().collect();
        for y in subsets_up_to(&list, s) {
            if !y.is_empty() {
                targets.insert(y);
            }
        }
    }
    let mut out = Vec::new();
    for y in targets {
        let mut count = by_type.get(&y).copied().unwrap_or(0);
        if !settled_cands.is_empty() {
            count += closed_clusters(&lg, &cands, &report, &y);
        }
        if count >= k {
            out.push(CritWitness {
                certified: cert.as_ref().map_or(false, |c| c.crit.contains(&y)),
                x: y.clone(),
                y,
                count,
                level: n,
            });
        }
    }
    out
}

fn subsets_up_to(items: &[VertexId], s: usize) -> Vec<VertexSet> {
    let mut out = vec![VertexSet::new()];
    for &v in items {
        let grown: Vec<VertexSet> = out
            .iter()
            .filter(|y| y.len() < s)
            .map(|y| {
                let mut z = y.clone();
                z.insert(v);
                z
            })
            .collect();
        out.extend(grown);
    }
    out
}

/// Closed components of G − Y that contain a candidate outside Y and have
/// neighbourhood exactly Y, computed on the compressed candidate/component graph.
fn closed_clusters(lg: &LeveledGraph, cands: &VertexSet, report: &ComponentReport, y: &VertexSet) -> usize {
    let comps = report.all();
    let mut seen_c = VertexSet::new();
    let mut count = 0;
    for &start in cands.difference(y) {
        if seen_c.contains(&start) {
            continue;
        }
        let mut nbhd = VertexSet::new();
        let mut closed = true;
        let mut used_comp = BTreeSet::new();
        let mut q = VecDeque::from([start]);
        seen_c.insert(start);
        while let Some(c) = q.pop_front() {
            if lg.frontier.contains(&c) {
                closed = false;
            }
            for w in lg.graph.neighbours(c) {
                if y.contains(&w) {
                    nbhd.insert(w);
                } else if cands.contains(&w) && seen_c.insert(w) {
                    q.push_back(w);
                }
            }
            for (i, comp) in comps.iter().enumerate() {
                if comp.nbhd.contains(&c) && used_comp.insert(i) {
                    if !comp.vertices.is_disjoint(&lg.frontier) {
                        closed = false;
                    }
                    for &w in &comp.nbhd {
                        if y.contains(&w) {
                            nbhd.insert(w);
                        } else if seen_c.insert(w) {
                            q.push_back(w);
                        }
                    }
                }
            }
        }
        if closed && &nbhd == y {
            count += 1;
        }
    }
    count
}

/// A direction thread approximating an end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndSurrogate {
    /// "dir:<least vertex of the top component>".
    pub id: String,
    /// Component ids along the separator chain X_0 ⊆ … ⊆ X_d.
    pub thread: Vec<VertexId>,
    /// The separators of the chain.
    pub chain: Vec<VertexSet>,
    /// Certified ends whose visible ray ends inside the top component.
    pub matched: Vec<String>,
    pub dominators: Option<VertexSet>,
}

/// Vertices treated as hubs at level i: certified infinite-degree vertices,
/// else growth candidates.
fn hubs(p: &Presentation, n: usize) -> VertexSet {
    match p.certificate(n) {
        Some(c) => c.infinite_degree,
        None => growth_candidates(p, n),
    }
}

/// The canonical separator chain X_0 ⊆ … ⊆ X_d: settled vertices of level i
/// plus the hubs already present at level i − 1.
pub fn canonical_chain(p: &Presentation, d: usize) -> Vec<VertexSet> {
    let h = hubs(p, d);
    let mut out: Vec<VertexSet> = Vec::new();
    for i in 0..=d {
        let lg = p.truncate(i);
        let mut x = lg.settled();
        if i > 0 {
            let prev = p.truncate(i - 1);
            x.extend(h.iter().copied().filter(|v| prev.graph.has_vertex(*v)));
        }
        if let Some(last) = out.last() {
            x.extend(last.iter().copied());
        }
        out.push(x);
    }
    out
}

/// Direction threads over the canonical chain evaluated at level d, one per
/// open component of G_d − X_d (ends live in the components that still grow).
pub fn directions(p: &Presentation, d: usize) -> Vec<EndSurrogate> {
    let d = d.max(1);
    let chain = canonical_chain(p, d);
    let lg = p.truncate(d);
    let reports: Vec<ComponentReport> = chain.iter().map(|x| report_of(&lg, x)).collect();
    let cert = p.certificate(d);
    let top = reports.last().expect("nonempty chain");
    top.open
        .iter()
        .map(|c| {
            let v = c.id();
            let thread = reports
                .iter()
                .map(|r| r.containing(v).expect("components cover V − X").0.id())
                .collect();
            let matched: Vec<&crate::presentation::EndCert> = cert
                .as_ref()
                .map(|ct| {
                    ct.ends
                        .iter()
                        .filter(|e| e.ray.last().map_or(false, |l| c.vertices.contains(l)))
                        .collect()
                })
                .unwrap_or_default();
            EndSurrogate {
                id: format!("dir:{v}"),
                thread,
                chain: chain.clone(),
                dominators: matched.first().map(|e| e.dominators.clone()),
                matched: matched.iter().map(|e| e.id.clone()).collect(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Domination {
    /// A fan of this size from u into the end's ray exists at the level.
    Witnessed { fan: usize, certified: bool },
    /// This finite vertex set separates u from the end's ray tail.
    Refuted { separator: VertexSet, certified: bool },
    Unknown,
}

/// Ray tail used for fans and cuts: visible ray vertices beyond every
/// position of u and its neighbours.
fn ray_tail(g: &Multigraph, u: VertexId, ray: &[VertexId]) -> VertexSet {
    let nb = g.neighbours(u);
    let last = ray
        .iter()
        .rposition(|v| *v == u || nb.contains(v))
        .map_or(0, |i| i + 1);
    ray[last..].iter().copied().collect()
}

pub fn dominates(p: &Presentation, u: VertexId, e: &str, n: usize) -> Result<Domination, StructureError> {
    let lg = p.truncate(n);
    if !lg.graph.has_vertex(u) {
        return Err(StructureError::UnknownVertex(u));
    }
    if let Some(cert) = p.certificate(n) {
        let end = cert.end(e).ok_or_else(|| StructureError::UnknownEnd(e.to_string()))?;
        let all_ray: VertexSet = end.ray.iter().copied().filter(|v| *v != u).collect();
        if end.dominators.contains(&u) {
            let fan = vertex_fan(&lg.graph, u, &all_ray, usize::MAX / 8);
            return Ok(Domination::Witnessed { fan, certified: true });
        }
        if end.dominators_unbounded {
            // Only a finite part of Δ(ω) is listed at this level.
            let fan = vertex_fan(&lg.graph, u, &all_ray, usize::MAX / 8);
            let earlier = p.truncate(n.saturating_sub(GROWTH_WINDOW));
            let before = if earlier.graph.has_vertex(u) {
                vertex_fan(&earlier.graph, u, &all_ray, usize::MAX / 8)
            } else {
                0
            };
            return Ok(if fan > before {
                Domination::Witnessed { fan, certified: false }
            } else {
                Domination::Unknown
            });
        }
        let tail = ray_tail(&lg.graph, u, &end.ray);
        if tail.is_empty() {
            return Ok(Domination::Unknown);
        }
        return Ok(Domination::Refuted {
            separator: min_vertex_cut_near(&lg.graph, u, &tail),
            certified: true,
        });
    }
    // Uncertified: ends are named by their direction threads.
    let dirs = directions(p, n);
    let s = dirs
        .iter()
        .find(|s| s.id == e)
        .ok_or_else(|| StructureError::UnknownEnd(e.to_string()))?;
    let top = *s.thread.last().expect("nonempty thread");
    let report = report_of(&lg, s.chain.last().expect("nonempty chain"));
    let comp = report.find(top).expect("thread component").0.vertices.clone();
    let fan = vertex_fan(&lg.graph, u, &comp, usize::MAX / 8);
    let earlier = p.truncate(n.saturating_sub(GROWTH_WINDOW));
    let before = if earlier.graph.has_vertex(u) {
        let comp_then: VertexSet = comp.iter().copied().filter(|v| earlier.graph.has_vertex(*v)).collect();
        vertex_fan(&earlier.graph, u, &comp_then, usize::MAX / 8)
    } else {
        0
    };
    Ok(if fan > before && fan >= 2 {
        Domination::Witnessed { fan, certified: false }
    } else {
        Domination::Unknown
    })
}

/// A vertex or an end, for the relations on V ∪ Ω.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    Vertex(VertexId),
    End(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Separability {
    /// This many edge-disjoint a–b connections exist at the level.
    Witnessed { paths: usize, certified: bool },
    /// A finite edge cut whose a-side is final.
    Separated { cut: EdgeSet, side: VertexSet, certified: bool },
    Unknown,
}

/// Default witness threshold for edge-disjoint connections at level n.
pub fn default_witness(n: usize) -> usize {
    (n / 2).max(3)
}

fn anchor(p: &Presentation, cert: Option<&Certificate>, x: &Point, n: usize) -> Result<VertexId, StructureError> {
    match x {
        Point::Vertex(v) => {
            if p.truncate(n).graph.has_vertex(*v) {
                Ok(*v)
            } else {
                Err(StructureError::UnknownVertex(*v))
            }
        }
        Point::End(e) => cert
            .and_then(|c| c.end(e))
            .and_then(|end| end.ray.last().copied())
            .ok_or_else(|| StructureError::UnknownEnd(e.clone())),
    }
}

fn same_class(cert: &Certificate, a: &Point, b: &Point) -> bool {
    let class = |x: &Point| match x {
        Point::Vertex(v) => cert.class_of_vertex(*v),
        Point::End(e) => cert.class_of_end(e),
    };
    match (class(a), class(b)) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    }
}

/// Whether a and b are linked by infinitely many edge-disjoint connections.
pub fn not_finitely_separable(
    p: &Presentation,
    a: &Point,
    b: &Point,
    n: usize,
    k: Option<usize>,
) -> Result<Separability, StructureError> {
    let lg = p.truncate(n);
    let cert = p.certificate(n);
    let va = anchor(p, cert.as_ref(), a, n)?;
    let vb = anchor(p, cert.as_ref(), b, n)?;
    let paths = if va == vb {
        usize::MAX
    } else {
        local_connectivity(&lg.graph, va, vb)
            .map(|c| c.edge_cut)
            .unwrap_or(0)
    };
    if let Some(c) = &cert {
        if a == b || same_class(c, a, b) {
            return Ok(Separability::Witnessed { paths, certified: true });
        }
    }
    let k = k.unwrap_or_else(|| default_witness(n));
    if cert.is_none() && paths >= k {
        return Ok(Separability::Witnessed { paths, certified: false });
    }
    // A cut is final when one side contains no frontier vertex.
    for (s, t) in [(va, vb), (vb, va)] {
        if let Some((cut, side)) = min_edge_cut_avoiding(&lg.graph, s, t, &lg.frontier) {
            if !side.contains(&t) {
                return Ok(Separability::Separated {
                    cut,
                    side,
                    certified: cert.is_some(),
                });
            }
        }
    }
    Ok(Separability::Unknown)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Linkage {
    /// No set of at most `bound` vertices outside X separates a, b in G − E(X).
    Witnessed { x: VertexSet, bound: usize },
    /// Every candidate X admits a final separator.
    Refuted { separators: Vec<VertexSet> },
    Unknown,
}

/// Default size bound for separators tried by `strongly_linked`.
pub const LINK_BOUND: usize = 4;

/// Path-based test of the ◊···◊ relation on two vertices.
pub fn strongly_linked(p: &Presentation, a: VertexId, b: VertexId, n: usize, bound: usize) -> Result<Linkage, StructureError> {
    let lg = p.truncate(n);
    for v in [a, b] {
        if !lg.graph.has_vertex(v) {
            return Err(StructureError::UnknownVertex(v));
        }
    }
    if a == b {
        return Ok(Linkage::Witnessed {
            x: VertexSet::from([a]),
            bound,
        });
    }
    let h = hubs(p, n);
    let path = shortest_path(&lg.graph, a, b);
    let mut candidates: Vec<VertexSet> = vec![VertexSet::from([a, b])];
    if let Some(path) = &path {
        let mut with_hubs = VertexSet::from([a, b]);
        with_hubs.extend(path.iter().copied().filter(|v| h.contains(v)));
        candidates.push(with_hubs);
        candidates.push(path.iter().copied().collect());
    }
    candidates.dedup();
    let mut separators = Vec::new();
    let mut all_final = true;
    for x in &candidates {
        let inner: EdgeSet = lg
            .graph
            .edges()
            .filter(|&(_, u, v)| x.contains(&u) && x.contains(&v))
            .map(|(e, _, _)| e)
            .collect();
        let h_graph = lg.graph.without_edges(&inner);
        let (value, cut) = min_vertex_separator(&h_graph, a, b, x, bound + 1);
        match cut {
            None => {
                debug_assert!(value > bound);
                return Ok(Linkage::Witnessed { x: x.clone(), bound });
            }
            Some(y) => {
                let mut keep = h_graph.vertices().clone();
                for v in &y {
                    keep.remove(v);
                }
                let rest = h_graph.induced(&keep);
                let side = components(&rest, &VertexSet::new())
                    .into_iter()
                    .find(|(c, _)| c.contains(&a))
                    .map(|(c, _)| c)
                    .unwrap_or_default();
                let other = components(&rest, &VertexSet::new())
                    .into_iter()
                    .find(|(c, _)| c.contains(&b))
                    .map(|(c, _)| c)
                    .unwrap_or_default();
                if side.is_disjoint(&lg.frontier) || other.is_disjoint(&lg.frontier) {
                    separators.push(y);
                } else {
                    all_final = false;
                }
            }
        }
    }
    Ok(if all_final {
        Linkage::Refuted { separators }
    } else {
        Linkage::Unknown
    })
}

fn shortest_path(g: &Multigraph, a: VertexId, b: VertexId) -> Option<Vec<VertexId>> {
    let mut prev: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut q = VecDeque::from([a]);
    let mut seen = VertexSet::from([a]);
    while let Some(v) = q.pop_front() {
        if v == b {
            let mut path = vec![b];
            let mut cur = b;
            while cur != a {
                cur = prev[&cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for w in g.neighbours(v) {
            if seen.insert(w) {
                prev.insert(w, v);
                q.push_back(w);
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TriState {
    True,
    False,
    Unknown,
}

impl From<bool> for TriState {
    fn from(b: bool) -> Self {
        if b {
            TriState::True
        } else {
            TriState::False
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompactnessReport {
    pub level: usize,
    pub ends_locally_compact: TriState,
    pub one_point_omega: TriState,
    pub certified: bool,
}

pub fn compactness_predicates(p: &Presentation, n: usize) -> CompactnessReport {
    if let Some(c) = p.certificate(n) {
        return CompactnessReport {
            level: n,
            ends_locally_compact: c.flags.ends_locally_compact.into(),
            one_point_omega: c.flags.one_point_omega.into(),
            certified: true,
        };
    }
    // A presentation whose frontier is empty is a finite graph: no ends, compact.
    let lg = p.truncate(n);
    let finite = lg.frontier.is_empty();
    CompactnessReport {
        level: n,
        ends_locally_compact: if finite { TriState::True } else { TriState::Unknown },
        one_point_omega: if finite { TriState::False } else { TriState::Unknown },
        certified: false,
    }
}

/// Level used for defining sequences of length m: the nested construction
/// consumes about m²/2 ray vertices.
fn defining_level(m: usize) -> usize {
    (m + 2) * (m + 3) / 2 + 4
}

/// Nested separators X_0, …, X_m converging to the end: each X_{i+1} lies in
/// the component of G − (X_i ∪ Δ) containing the end, and the X_i are disjoint.
pub fn defining_sequence(p: &Presentation, e: &str, m: usize) -> Result<Vec<VertexSet>, StructureError> {
    let n = defining_level(m);
    let cert = p.certificate(n).ok_or(StructureError::Uncertified)?;
    let end = cert.end(e).ok_or_else(|| StructureError::UnknownEnd(e.to_string()))?;
    if end.dominators_unbounded {
        return Err(StructureError::DominatorsUnbounded(e.to_string()));
    }
    let lg = p.truncate(n);
    let delta = end.dominators.clone();
    let tip = *end.ray.last().expect("visible ray");
    let start = end
        .ray
        .iter()
        .skip(1)
        .find(|v| !delta.contains(v))
        .copied()
        .ok_or(StructureError::InsufficientDepth(n))?;
    let mut xs = vec![VertexSet::from([start])];
    for i in 0..m {
        let sep: VertexSet = xs[i].union(&delta).copied().collect();
        let report = report_of(&lg, &sep);
        let c = report
            .containing(tip)
            .ok_or(StructureError::InsufficientDepth(n))?
            .0
            .vertices
            .clone();
        // Layer of C within distance i + 1 of X_i; the tail's component beyond it.
        let mut layer = VertexSet::new();
        let mut frontier_set: VertexSet = xs[i].clone();
        for _ in 0..=i {
            let mut next = VertexSet::new();
            for &v in &frontier_set {
                for w in lg.graph.neighbours(v) {
                    if c.contains(&w) && !layer.contains(&w) {
                        next.insert(w);
                    }
                }
            }
            layer.extend(next.iter().copied());
            frontier_set = next;
        }
        let mut cut = sep.clone();
        cut.extend(layer.iter().copied());
        let beyond = report_of(&lg, &cut);
        let d = beyond
            .containing(tip)
            .ok_or(StructureError::InsufficientDepth(n))?
            .0;
        let next: VertexSet = d.nbhd.difference(&delta).copied().collect();
        if next.is_empty() {
            return Err(StructureError::InsufficientDepth(n));
        }
        xs.push(next);
    }
    Ok(xs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinorWitness {
    /// Singleton branch sets, one per vertex of X.
    pub hubs: Vec<VertexId>,
    /// k closed components, each adjacent to every vertex of X.
    pub branch_sets: Vec<VertexSet>,
}

/// Branch sets of a K_{|X|,k} minor from a certified critical set X.
pub fn bipartite_minor_witness(p: &Presentation, x: &VertexSet, k: usize, n: usize) -> Result<MinorWitness, StructureError> {
    let cert = p.certificate(n).ok_or(StructureError::NotCritical)?;
    if x.len() < 3 || !cert.crit.contains(x) {
        return Err(StructureError::NotCritical);
    }
    let report = component_report(p, x, n)?;
    let sets: Vec<VertexSet> = report
        .closed_with_nbhd(x)
        .into_iter()
        .take(k)
        .map(|c| c.vertices.clone())
        .collect();
    if sets.len() < k {
        return Err(StructureError::InsufficientDepth(n));
    }
    Ok(MinorWitness {
        hubs: x.iter().copied().collect(),
        branch_sets: sets,
    })
}

/// One point class of the edge-end quotient at a level.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct QuotientClass {
    pub vertices: VertexSet,
    pub ends: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuotientReport {
    pub level: usize,
    pub classes: Vec<QuotientClass>,
    /// Edges whose endpoints lie in distinct classes (their inner points survive).
    pub inner_edges: usize,
}

/// Vertex classes [u]_∼ and singleton undominated ends, from the certificate.
pub fn quotient_points(p: &Presentation, n: usize) -> Result<QuotientReport, StructureError> {
    let cert = p.certificate(n).ok_or(StructureError::Uncertified)?;
    if !cert.flags.connected {
        return Err(StructureError::Disconnected);
    }
    let lg = p.truncate(n);
    let mut classes: Vec<QuotientClass> = Vec::new();
    let mut covered = VertexSet::new();
    let mut covered_ends: BTreeSet<String> = BTreeSet::new();
    for c in &cert.sim_classes {
        covered.extend(c.vertices.iter().copied());
        covered_ends.extend(c.ends.iter().cloned());
        classes.push(QuotientClass {
            vertices: c.vertices.clone(),
            ends: c.ends.clone(),
        });
    }
    for &v in lg.vertices() {
        if !covered.contains(&v) {
            classes.push(QuotientClass {
                vertices: VertexSet::from([v]),
                ends: Vec::new(),
            });
        }
    }
    for e in &cert.ends {
        if !covered_ends.contains(&e.id) {
            // A dominated end is ∼-equivalent to its dominators.
            if let Some(d) = e.dominators.iter().next() {
                if let Some(c) = classes.iter_mut().find(|c| c.vertices.contains(d)) {
                    c.ends.push(e.id.clone());
                    continue;
                }
            }
            classes.push(QuotientClass {
                vertices: VertexSet::new(),
                ends: vec![e.id.clone()],
            });
        }
    }
    for c in &mut classes {
        c.ends.sort();
    }
    classes.sort();
    let class_of: BTreeMap<VertexId, usize> = classes
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.vertices.iter().map(move |&v| (v, i)))
        .collect();
    let inner_edges = lg
        .graph
        .edges()
        .filter(|&(_, u, v)| class_of.get(&u) != class_of.get(&v))
        .count();
    Ok(QuotientReport {
        level: n,
        classes,
        inner_edges,
    })
}
