//! Inverse systems over finite levels: the generic machinery (compatibility
//! checks, thread search, cofinal restriction) and the concrete systems 𝔉, Γ,
//! Δ/Δ′ and {G.F}.
//!
//! All levels of one system are evaluated at a common truncation level n, so
//! components of G − X are components of G_n − X.

use crate::multigraph::{
    contract_by_edges, EdgeId, EdgeSet, GraphError, Multigraph, VertexId, VertexPartition, VertexSet,
};
use crate::presentation::Presentation;
use crate::structure::{component_report, crit_at, is_newcomer, ComponentReport, StructureError};
use serde::Serialize;
use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvsysError {
    #[error("component {0} is still open at this level")]
    PendingComponent(VertexId),
    #[error("indices are not comparable")]
    NotComparable,
    #[error("invalid index: {0}")]
    InvalidIndex(String),
    #[error("the restriction is not cofinal: nothing above {0}")]
    NotCofinal(String),
    #[error("index is not a member of Δ")]
    NotDeltaMember,
    #[error("edge {0} is not present at this level")]
    FrontierEdge(EdgeId),
    #[error("point {0} is not in the level")]
    UnknownPoint(String),
    #[error("critical set {0:?} has no witness at this level")]
    Unwitnessed(VertexSet),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

type Result<T> = std::result::Result<T, InvsysError>;

/// An inverse system over a directed poset of indices with finite levels.
pub trait InverseSystem {
    type Index: Clone + Ord + Debug;
    type Point: Clone + Ord + Debug;

    fn leq(&self, a: &Self::Index, b: &Self::Index) -> bool;
    /// An upper bound of both indices.
    fn join(&self, a: &Self::Index, b: &Self::Index) -> Result<Self::Index>;
    /// The level at i, sorted and duplicate-free.
    fn level(&self, i: &Self::Index) -> Result<Vec<Self::Point>>;
    /// The bonding map from level j down to level i, for i ≤ j.
    fn bond(&self, j: &Self::Index, i: &Self::Index, pt: &Self::Point) -> Result<Self::Point>;
}

/// One point per index of an ascending chain, bond-compatible along it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Thread<I, P> {
    pub points: Vec<(I, P)>,
}

impl<I: PartialEq, P> Thread<I, P> {
    pub fn at(&self, i: &I) -> Option<&P> {
        self.points.iter().find(|(j, _)| j == i).map(|(_, p)| p)
    }

    pub fn top(&self) -> Option<&P> {
        self.points.last().map(|(_, p)| p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Compatibility<I, P> {
    Pass { checked: usize },
    CounterExample { i: I, j: I, k: I, point: P, direct: P, composed: P },
}

/// Checks φ_ii = id and φ_ki = φ_ji ∘ φ_kj for every i ≤ j ≤ k of each chain
/// and every point at k.
pub fn check_compatibility<S: InverseSystem>(
    sys: &S,
    chains: &[Vec<S::Index>],
) -> Result<Compatibility<S::Index, S::Point>> {
    let mut checked = 0;
    for chain in chains {
        for w in chain.windows(2) {
            if !sys.leq(&w[0], &w[1]) {
                return Err(InvsysError::NotComparable);
            }
        }
        for (c, k) in chain.iter().enumerate() {
            for pt in sys.level(k)? {
                let id = sys.bond(k, k, &pt)?;
                if id != pt {
                    return Ok(Compatibility::CounterExample {
                        i: k.clone(),
                        j: k.clone(),
                        k: k.clone(),
                        point: pt.clone(),
                        direct: id,
                        composed: pt,
                    });
                }
                for b in 0..c {
                    let j = &chain[b];
                    let mid = sys.bond(k, j, &pt)?;
                    for i in &chain[..=b] {
                        let direct = sys.bond(k, i, &pt)?;
                        let composed = sys.bond(j, i, &mid)?;
                        checked += 1;
                        if direct != composed {
                            return Ok(Compatibility::CounterExample {
                                i: i.clone(),
                                j: j.clone(),
                                k: k.clone(),
                                point: pt,
                                direct,
                                composed,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(Compatibility::Pass { checked })
}

/// Backward pruning: keeps at each chain position only the points that are
/// images of surviving points one step up. Position t holds (point, image below).
fn prune<S: InverseSystem>(sys: &S, chain: &[S::Index]) -> Result<Vec<BTreeMap<S::Point, Option<S::Point>>>> {
    let m = chain.len();
    let mut alive: Vec<BTreeMap<S::Point, Option<S::Point>>> = vec![BTreeMap::new(); m];
    if m == 0 {
        return Ok(alive);
    }
    let levels: Vec<BTreeSet<S::Point>> = chain
        .iter()
        .map(|i| sys.level(i).map(|l| l.into_iter().collect()))
        .collect::<Result<_>>()?;
    for p in &levels[m - 1] {
        alive[m - 1].insert(p.clone(), None);
    }
    for t in (0..m - 1).rev() {
        let ups: Vec<S::Point> = alive[t + 1].keys().cloned().collect();
        for p in ups {
            let img = sys.bond(&chain[t + 1], &chain[t], &p)?;
            // A point whose image left the level has no thread through it.
            if !levels[t].contains(&img) {
                alive[t + 1].remove(&p);
                continue;
            }
            alive[t + 1].insert(p, Some(img.clone()));
            alive[t].entry(img).or_insert(None);
        }
    }
    Ok(alive)
}

/// The lexicographically least thread over an ascending chain, or None when
/// the inverse limit over the chain is empty.
pub fn thread_search<S: InverseSystem>(sys: &S, chain: &[S::Index]) -> Result<Option<Thread<S::Index, S::Point>>> {
    Ok(all_threads(sys, chain, 1)?.into_iter().next())
}

/// Up to `limit` threads over the chain in lexicographic order.
pub fn all_threads<S: InverseSystem>(
    sys: &S,
    chain: &[S::Index],
    limit: usize,
) -> Result<Vec<Thread<S::Index, S::Point>>> {
    let alive = prune(sys, chain)?;
    let m = chain.len();
    if m == 0 || alive[0].is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut stack: Vec<S::Point> = Vec::new();
    fn rec<S: InverseSystem>(
        chain: &[S::Index],
        alive: &[BTreeMap<S::Point, Option<S::Point>>],
        t: usize,
        stack: &mut Vec<S::Point>,
        out: &mut Vec<Thread<S::Index, S::Point>>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        if t == chain.len() {
            out.push(Thread {
                points: chain.iter().cloned().zip(stack.iter().cloned()).collect(),
            });
            return;
        }
        for (p, img) in &alive[t] {
            let fits = t == 0 || img.as_ref() == stack.last();
            if fits {
                stack.push(p.clone());
                rec::<S>(chain, alive, t + 1, stack, out, limit);
                stack.pop();
            }
        }
    }
    rec::<S>(chain, &alive, 0, &mut stack, &mut out, limit);
    Ok(out)
}

/// A system restricted to a sub-poset of indices.
pub struct Restricted<'s, S: InverseSystem> {
    inner: &'s S,
    members: Vec<S::Index>,
}

impl<'s, S: InverseSystem> Restricted<'s, S> {
    pub fn members(&self) -> &[S::Index] {
        &self.members
    }
}

/// Restricts to J after checking that every sampled index lies below some member of J.
pub fn restrict_cofinal<'s, S: InverseSystem>(
    sys: &'s S,
    j: Vec<S::Index>,
    sample: &[S::Index],
) -> Result<Restricted<'s, S>> {
    for i in sample {
        if !j.iter().any(|m| sys.leq(i, m)) {
            return Err(InvsysError::NotCofinal(format!("{i:?}")));
        }
    }
    let mut members = j;
    members.sort();
    members.dedup();
    Ok(Restricted { inner: sys, members })
}

impl<'s, S: InverseSystem> InverseSystem for Restricted<'s, S> {
    type Index = S::Index;
    type Point = S::Point;

    fn leq(&self, a: &S::Index, b: &S::Index) -> bool {
        self.inner.leq(a, b)
    }

    fn join(&self, a: &S::Index, b: &S::Index) -> Result<S::Index> {
        let up = self.inner.join(a, b)?;
        self.members
            .iter()
            .find(|m| self.inner.leq(&up, m))
            .cloned()
            .ok_or_else(|| InvsysError::NotCofinal(format!("{up:?}")))
    }

    fn level(&self, i: &S::Index) -> Result<Vec<S::Point>> {
        if self.members.binary_search(i).is_err() {
            return Err(InvsysError::InvalidIndex(format!("{i:?} is not in the restriction")));
        }
        self.inner.level(i)
    }

    fn bond(&self, j: &S::Index, i: &S::Index, pt: &S::Point) -> Result<S::Point> {
        self.inner.bond(j, i, pt)
    }
}

/// A system over the chain 0 < 1 < … < m with tabulated levels.
pub struct TableSystem<P> {
    pub levels: Vec<Vec<P>>,
    #[allow(clippy::type_complexity)]
    pub bond_fn: Box<dyn Fn(usize, usize, &P) -> P>,
}

impl<P: Clone + Ord + Debug> TableSystem<P> {
    pub fn chain(&self) -> Vec<usize> {
        (0..self.levels.len()).collect()
    }
}

impl<P: Clone + Ord + Debug> InverseSystem for TableSystem<P> {
    type Index = usize;
    type Point = P;

    fn leq(&self, a: &usize, b: &usize) -> bool {
        a <= b
    }

    fn join(&self, a: &usize, b: &usize) -> Result<usize> {
        Ok(*a.max(b))
    }

    fn level(&self, i: &usize) -> Result<Vec<P>> {
        self.levels
            .get(*i)
            .cloned()
            .ok_or_else(|| InvsysError::InvalidIndex(format!("level {i}")))
    }

    fn bond(&self, j: &usize, i: &usize, pt: &P) -> Result<P> {
        if i > j {
            return Err(InvsysError::NotComparable);
        }
        Ok(if i == j { pt.clone() } else { (self.bond_fn)(*j, *i, pt) })
    }
}

// ---------------------------------------------------------------------------
// The system 𝔉

/// A point of 𝔉_X: a component of G − X (by least vertex) or the filter ℱ_X(Y).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FPoint {
    Principal(VertexId),
    Filter(VertexSet),
}

/// How open components (those touching the frontier) are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OpenPolicy {
    /// Open components are not points; bonds needing them fail with PendingComponent.
    Pending,
    /// Open components count as principal points (thread census, orientations).
    Admit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FLevel {
    pub x: VertexSet,
    pub level: usize,
    /// One principal point per closed component.
    pub principals: Vec<VertexId>,
    /// One filter per Y ∈ crit(X).
    pub filters: Vec<VertexSet>,
    /// Open components, excluded from the point set under OpenPolicy::Pending.
    pub pending: Vec<VertexId>,
}

impl FLevel {
    pub fn points(&self, open: OpenPolicy) -> Vec<FPoint> {
        let mut pts: Vec<FPoint> = self.principals.iter().map(|&c| FPoint::Principal(c)).collect();
        if open == OpenPolicy::Admit {
            pts.extend(self.pending.iter().map(|&c| FPoint::Principal(c)));
        }
        pts.extend(self.filters.iter().cloned().map(FPoint::Filter));
        pts.sort();
        pts
    }
}

fn flevel_of(report: &ComponentReport, crit: Vec<VertexSet>) -> FLevel {
    FLevel {
        x: report.separator.clone(),
        level: report.level,
        principals: report.closed.iter().map(|c| c.id()).collect(),
        filters: crit,
        pending: report.open.iter().map(|c| c.id()).collect(),
    }
}

pub fn f_level(p: &Presentation, x: &VertexSet, n: usize, k: usize) -> Result<FLevel> {
    let report = component_report(p, x, n)?;
    Ok(flevel_of(&report, crit_at(p, x, n, k)))
}

/// The bond 𝔉_{X′} → 𝔉_X given the two component reports.
fn f_bond_reports(low: &ComponentReport, high: &ComponentReport, pt: &FPoint, open: OpenPolicy) -> Result<FPoint> {
    let x = &low.separator;
    if !x.is_subset(&high.separator) {
        return Err(InvsysError::NotComparable);
    }
    let target = |v: VertexId| -> Result<FPoint> {
        let (c, closed) = low
            .containing(v)
            .ok_or_else(|| InvsysError::UnknownPoint(format!("vertex {v}")))?;
        if !closed && open == OpenPolicy::Pending {
            return Err(InvsysError::PendingComponent(c.id()));
        }
        Ok(FPoint::Principal(c.id()))
    };
    match pt {
        FPoint::Principal(id) => {
            let (_, closed) = high
                .find(*id)
                .ok_or_else(|| InvsysError::UnknownPoint(format!("{pt:?}")))?;
            if !closed && open == OpenPolicy::Pending {
                return Err(InvsysError::PendingComponent(*id));
            }
            target(*id)
        }
        FPoint::Filter(y) => {
            if !y.is_subset(&high.separator) {
                return Err(InvsysError::UnknownPoint(format!("{pt:?}")));
            }
            if y.is_subset(x) {
                return Ok(FPoint::Filter(y.clone()));
            }
            // All components in 𝒞_{X′}(Y) attach to Y ∖ X, which therefore
            // lies in one component of G − X.
            let rest: Vec<VertexId> = y.difference(x).copied().collect();
            let home = low.containing(rest[0]).map(|(c, _)| c.id());
            if rest.iter().any(|&v| low.containing(v).map(|(c, _)| c.id()) != home) {
                return Err(InvsysError::Unwitnessed(y.clone()));
            }
            target(rest[0])
        }
    }
}

/// The bond 𝔉_{X′} → 𝔉_X for X ⊆ X′, evaluated at level n.
pub fn f_bond(
    p: &Presentation,
    x: &VertexSet,
    x_prime: &VertexSet,
    pt: &FPoint,
    n: usize,
    open: OpenPolicy,
) -> Result<FPoint> {
    let low = component_report(p, x, n)?;
    let high = component_report(p, x_prime, n)?;
    f_bond_reports(&low, &high, pt, open)
}

/// 𝔉 as an inverse system over finite vertex sets ordered by inclusion.
pub struct FSystem<'p> {
    pub p: &'p Presentation,
    pub n: usize,
    pub k: usize,
    pub open: OpenPolicy,
    cache: RefCell<BTreeMap<VertexSet, Arc<ComponentReport>>>,
}

impl<'p> FSystem<'p> {
    pub fn new(p: &'p Presentation, n: usize, k: usize, open: OpenPolicy) -> Self {
        FSystem {
            p,
            n,
            k,
            open,
            cache: RefCell::new(BTreeMap::new()),
        }
    }

    pub fn report(&self, x: &VertexSet) -> Result<Arc<ComponentReport>> {
        if let Some(r) = self.cache.borrow().get(x) {
            return Ok(Arc::clone(r));
        }
        let r = Arc::new(component_report(self.p, x, self.n)?);
        self.cache.borrow_mut().insert(x.clone(), Arc::clone(&r));
        Ok(r)
    }

    pub fn f_level(&self, x: &VertexSet) -> Result<FLevel> {
        let r = self.report(x)?;
        Ok(flevel_of(&r, crit_at(self.p, x, self.n, self.k)))
    }
}

impl<'p> InverseSystem for FSystem<'p> {
    type Index = VertexSet;
    type Point = FPoint;

    fn leq(&self, a: &VertexSet, b: &VertexSet) -> bool {
        a.is_subset(b)
    }

    fn join(&self, a: &VertexSet, b: &VertexSet) -> Result<VertexSet> {
        Ok(a.union(b).copied().collect())
    }

    fn level(&self, x: &VertexSet) -> Result<Vec<FPoint>> {
        Ok(self.f_level(x)?.points(self.open))
    }

    fn bond(&self, j: &VertexSet, i: &VertexSet, pt: &FPoint) -> Result<FPoint> {
        let low = self.report(i)?;
        let high = self.report(j)?;
        f_bond_reports(&low, &high, pt, self.open)
    }
}

/// Thread count of 𝔉 over the canonical chain, beside the certified counts
/// it should equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Census {
    pub depth: usize,
    pub chain_top: VertexSet,
    pub threads: Vec<Thread<VertexSet, FPoint>>,
    /// Threads ending in a principal point (end surrogates).
    pub principal_threads: usize,
    /// Threads ending in a filter point.
    pub filter_threads: usize,
    pub certified_ends: Option<usize>,
    pub certified_crit: Option<usize>,
}

/// Enumerates the 𝔉-threads over the canonical chain of depth d.
pub fn f_census(p: &Presentation, d: usize, k: usize) -> Result<Census> {
    let chain = crate::structure::canonical_chain(p, d);
    let sys = FSystem::new(p, d, k, OpenPolicy::Admit);
    let threads = all_threads(&sys, &chain, usize::MAX)?;
    let filter_threads = threads
        .iter()
        .filter(|t| matches!(t.top(), Some(FPoint::Filter(_))))
        .count();
    let top = chain.last().cloned().unwrap_or_default();
    let cert = p.certificate(d);
    Ok(Census {
        depth: d,
        principal_threads: threads.len() - filter_threads,
        filter_threads,
        certified_ends: cert.as_ref().map(|c| c.ends.len()),
        certified_crit: cert.as_ref().map(|c| c.crit_within(&top).len()),
        chain_top: top,
        threads,
    })
}

// ---------------------------------------------------------------------------
// The system Γ

/// (X, P) with P a partition of the components of G − X, each class given by
/// the least vertices of its components.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GammaIndex {
    pub x: VertexSet,
    pub classes: Vec<VertexSet>,
}

impl GammaIndex {
    /// Sorts classes by least member; drops empty classes.
    pub fn new(x: VertexSet, classes: Vec<VertexSet>) -> Self {
        let mut classes: Vec<VertexSet> = classes.into_iter().filter(|c| !c.is_empty()).collect();
        classes.sort();
        GammaIndex { x, classes }
    }

    /// Every component in its own class.
    pub fn finest(report: &ComponentReport) -> Self {
        let classes = report.all().iter().map(|c| VertexSet::from([c.id()])).collect();
        GammaIndex::new(report.separator.clone(), classes)
    }

    /// All components in one class.
    pub fn coarsest(report: &ComponentReport) -> Self {
        let ids: VertexSet = report.all().iter().map(|c| c.id()).collect();
        GammaIndex::new(report.separator.clone(), vec![ids])
    }
}

/// An element of a level graph: a vertex or an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Elem {
    Vertex(VertexId),
    Edge(EdgeId),
}

fn validate(g: &GammaIndex, report: &ComponentReport) -> Result<()> {
    if g.x != report.separator {
        return Err(InvsysError::InvalidIndex("separator mismatch".into()));
    }
    let ids: VertexSet = report.all().iter().map(|c| c.id()).collect();
    let mut seen = VertexSet::new();
    for c in &g.classes {
        for &id in c {
            if !ids.contains(&id) || !seen.insert(id) {
                return Err(InvsysError::InvalidIndex(format!("component {id} misplaced")));
            }
        }
    }
    if seen != ids {
        return Err(InvsysError::InvalidIndex("classes do not cover the components".into()));
    }
    Ok(())
}

/// Vertex set V[𝒞] of a class.
fn class_vertices(report: &ComponentReport, class: &VertexSet) -> VertexSet {
    class
        .iter()
        .flat_map(|&id| report.find(id).map(|(c, _)| c.vertices.clone()).unwrap_or_default())
        .collect()
}

/// The vertex partition p(X, P): singletons of X and the sets V[𝒞].
pub fn gamma_partition(g: &GammaIndex, report: &ComponentReport) -> Result<VertexPartition> {
    validate(g, report)?;
    let mut blocks: Vec<VertexSet> = g.x.iter().map(|&v| VertexSet::from([v])).collect();
    blocks.extend(g.classes.iter().map(|c| class_vertices(report, c)));
    Ok(VertexPartition::new(blocks)?)
}

/// The preimage of a partition of 𝒞_X on 𝒞_{Z} for Z ⊇ X: components of
/// G − Z grouped by the class of the component of G − X including them.
fn preimage(g: &GammaIndex, low: &ComponentReport, high: &ComponentReport) -> BTreeMap<VertexId, usize> {
    let class_of: BTreeMap<VertexId, usize> = g
        .classes
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&id| (id, i)))
        .collect();
    high.all()
        .iter()
        .map(|c| {
            let below = low.containing(c.id()).expect("components of G − Z lie in components of G − X").0;
            (c.id(), class_of[&below.id()])
        })
        .collect()
}

/// Groups component ids by a key, one class per key value.
fn group<K: Ord>(keys: impl IntoIterator<Item = (VertexId, K)>) -> Vec<VertexSet> {
    let mut by: BTreeMap<K, VertexSet> = BTreeMap::new();
    for (id, k) in keys {
        by.entry(k).or_default().insert(id);
    }
    by.into_values().collect()
}

/// The Γ system evaluated at level n.
pub struct GammaSystem<'p> {
    pub p: &'p Presentation,
    pub n: usize,
    cache: RefCell<BTreeMap<VertexSet, Arc<ComponentReport>>>,
}

impl<'p> GammaSystem<'p> {
    pub fn new(p: &'p Presentation, n: usize) -> Self {
        GammaSystem {
            p,
            n,
            cache: RefCell::new(BTreeMap::new()),
        }
    }

    pub fn report(&self, x: &VertexSet) -> Result<Arc<ComponentReport>> {
        if let Some(r) = self.cache.borrow().get(x) {
            return Ok(Arc::clone(r));
        }
        let r = Arc::new(component_report(self.p, x, self.n)?);
        self.cache.borrow_mut().insert(x.clone(), Arc::clone(&r));
        Ok(r)
    }

    /// (X, P) ≤ (Y, Q) iff X ⊆ Y and p(Y, Q) refines p(X, P).
    pub fn leq_checked(&self, a: &GammaIndex, b: &GammaIndex) -> Result<bool> {
        if !a.x.is_subset(&b.x) {
            return Ok(false);
        }
        let pa = gamma_partition(a, &*self.report(&a.x)?)?;
        let pb = gamma_partition(b, &*self.report(&b.x)?)?;
        Ok(pb.refines(&pa))
    }

    /// Upper bound (X ∪ Y, refine(P′, Q′)) of two indices.
    pub fn gamma_join(&self, a: &GammaIndex, b: &GammaIndex) -> Result<GammaIndex> {
        let z: VertexSet = a.x.union(&b.x).copied().collect();
        let (ra, rb, rz) = (self.report(&a.x)?, self.report(&b.x)?, self.report(&z)?);
        validate(a, &ra)?;
        validate(b, &rb)?;
        let pa = preimage(a, &ra, &rz);
        let pb = preimage(b, &rb, &rz);
        let classes = group(rz.all().iter().map(|c| (c.id(), (pa[&c.id()], pb[&c.id()]))));
        Ok(GammaIndex::new(z, classes))
    }

    /// The multigraph G/p(X, P): vertices of X, one dummy per class (id = least
    /// vertex of V[𝒞], label = V[𝒞]), and only the cross-edges.
    pub fn gamma_space(&self, g: &GammaIndex) -> Result<Multigraph> {
        let report = self.report(&g.x)?;
        let part = gamma_partition(g, &report)?;
        let lg = self.p.truncate(self.n);
        let mut h = crate::multigraph::contract_partition(&lg.graph, &part)?;
        for &v in &g.x {
            h.set_label(v, VertexSet::new());
        }
        // Labels only on dummies.
        let mut out = Multigraph::new();
        for &v in h.vertices() {
            out.add_vertex(v);
            if !g.x.contains(&v) {
                out.set_label(v, h.label(v).cloned().unwrap_or_default());
            }
        }
        for (e, u, v) in h.edges() {
            out.add_edge(e, u, v)?;
        }
        Ok(out)
    }

    /// γ′ ≥ γ: vertices go to the block including them, surviving cross-edges
    /// to themselves, collapsed edges to the dummy including both endpoints.
    pub fn gamma_bond(&self, high: &GammaIndex, low: &GammaIndex, el: Elem) -> Result<Elem> {
        let rl = self.report(&low.x)?;
        let part = gamma_partition(low, &rl)?;
        let idx = part.block_index();
        let rep = |v: VertexId| -> Result<VertexId> {
            let b = idx.get(&v).ok_or_else(|| InvsysError::UnknownPoint(format!("vertex {v}")))?;
            Ok(*part.blocks()[*b].iter().next().expect("nonempty block"))
        };
        let space = self.gamma_space(high)?;
        match el {
            Elem::Vertex(v) => {
                if !space.has_vertex(v) {
                    return Err(InvsysError::UnknownPoint(format!("vertex {v}")));
                }
                Ok(Elem::Vertex(rep(v)?))
            }
            Elem::Edge(e) => {
                let (a, b) = space
                    .endpoints(e)
                    .ok_or_else(|| InvsysError::UnknownPoint(format!("edge {e}")))?;
                let (ra, rb) = (rep(a)?, rep(b)?);
                Ok(if ra != rb { Elem::Edge(e) } else { Elem::Vertex(ra) })
            }
        }
    }
}

impl<'p> InverseSystem for GammaSystem<'p> {
    type Index = GammaIndex;
    type Point = Elem;

    fn leq(&self, a: &GammaIndex, b: &GammaIndex) -> bool {
        self.leq_checked(a, b).unwrap_or(false)
    }

    fn join(&self, a: &GammaIndex, b: &GammaIndex) -> Result<GammaIndex> {
        self.gamma_join(a, b)
    }

    fn level(&self, g: &GammaIndex) -> Result<Vec<Elem>> {
        let s = self.gamma_space(g)?;
        let mut out: Vec<Elem> = s.vertices().iter().map(|&v| Elem::Vertex(v)).collect();
        out.extend(s.edge_ids().into_iter().map(Elem::Edge));
        Ok(out)
    }

    fn bond(&self, j: &GammaIndex, i: &GammaIndex, pt: &Elem) -> Result<Elem> {
        self.gamma_bond(j, i, *pt)
    }
}

/// The class of components whose dummy vertex in gamma_space(γ) is `v`.
pub fn dummy_class(g: &GammaIndex, report: &ComponentReport, v: VertexId) -> Option<VertexSet> {
    g.classes
        .iter()
        .find(|c| class_vertices(report, c).iter().next() == Some(&v))
        .cloned()
}

// ---------------------------------------------------------------------------
// Δ and Δ′

/// Components of a report keyed by their neighbourhood when it is critical.
fn crit_groups(report: &ComponentReport, crit: &[VertexSet]) -> BTreeMap<VertexId, Option<VertexSet>> {
    report
        .all()
        .iter()
        .map(|c| (c.id(), crit.contains(&c.nbhd).then(|| c.nbhd.clone())))
        .collect()
}

/// True iff P = P⁻ ⊎ ⨄ P_Y: components with non-critical neighbourhood are
/// singleton classes, every other class lies inside one 𝒞_X(Y), and each Y
/// has at most one class containing newcomers (the cofinite class).
pub fn delta_member(p: &Presentation, g: &GammaIndex, n: usize, k: usize) -> Result<bool> {
    let report = component_report(p, &g.x, n)?;
    validate(g, &report)?;
    let crit = crit_at(p, &g.x, n, k);
    let groups = crit_groups(&report, &crit);
    let lg = p.truncate(n);
    let mut growing: BTreeMap<VertexSet, usize> = BTreeMap::new();
    for class in &g.classes {
        let keys: BTreeSet<&Option<VertexSet>> = class.iter().map(|id| &groups[id]).collect();
        if keys.len() != 1 {
            return Ok(false);
        }
        match keys.into_iter().next().expect("one key") {
            None => {
                if class.len() != 1 {
                    return Ok(false);
                }
            }
            Some(y) => {
                let newcomer = class.iter().any(|&id| {
                    let c = report.find(id).expect("validated").0;
                    is_newcomer(&lg, &c.vertices)
                });
                if newcomer {
                    *growing.entry(y.clone()).or_default() += 1;
                }
            }
        }
    }
    Ok(growing.values().all(|&c| c <= 1))
}

/// The canonical index (X, 𝔓_X): singletons for non-critical neighbourhoods and
/// one class 𝒞_X(Y) per Y ∈ crit(X).
pub fn canonical_delta(p: &Presentation, x: &VertexSet, n: usize, k: usize) -> Result<GammaIndex> {
    let report = component_report(p, x, n)?;
    let crit = crit_at(p, x, n, k);
    Ok(canonical_from(&report, &crit))
}

fn canonical_from(report: &ComponentReport, crit: &[VertexSet]) -> GammaIndex {
    let groups = crit_groups(report, crit);
    let classes = group(groups.into_iter().map(|(id, key)| {
        let k = match key {
            Some(y) => (0, y, 0),
            None => (1, VertexSet::new(), id),
        };
        (id, k)
    }));
    GammaIndex::new(report.separator.clone(), classes)
}

/// True iff γ = (X, 𝔓_X).
pub fn delta_prime_member(p: &Presentation, g: &GammaIndex, n: usize, k: usize) -> Result<bool> {
    Ok(canonical_delta(p, &g.x, n, k)? == *g)
}

/// Join inside Δ: the Γ join refined by 𝔓_Z, which splits classes along the
/// critical neighbourhoods of Z = X ∪ Y.
pub fn delta_join(p: &Presentation, a: &GammaIndex, b: &GammaIndex, n: usize, k: usize) -> Result<GammaIndex> {
    for g in [a, b] {
        if !delta_member(p, g, n, k)? {
            return Err(InvsysError::NotDeltaMember);
        }
    }
    let sys = GammaSystem::new(p, n);
    let j = sys.gamma_join(a, b)?;
    let canon = canonical_delta(p, &j.x, n, k)?;
    let key = |g: &GammaIndex| -> BTreeMap<VertexId, usize> {
        g.classes
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.iter().map(move |&id| (id, i)))
            .collect()
    };
    let (kj, kc) = (key(&j), key(&canon));
    let classes = group(kj.iter().map(|(&id, &i)| (id, (i, kc[&id]))));
    Ok(GammaIndex::new(j.x, classes))
}

/// Domination step: adds the least vertex u(C) of every component in a
/// finite class of some P_Y and returns (X′, 𝔓_{X′}).
pub fn delta_dominate(p: &Presentation, g: &GammaIndex, n: usize, k: usize) -> Result<GammaIndex> {
    if !delta_member(p, g, n, k)? {
        return Err(InvsysError::NotDeltaMember);
    }
    let report = component_report(p, &g.x, n)?;
    let crit = crit_at(p, &g.x, n, k);
    let groups = crit_groups(&report, &crit);
    let lg = p.truncate(n);
    let mut x = g.x.clone();
    for class in &g.classes {
        let first = class.iter().next().expect("nonempty class");
        if groups[first].is_none() {
            continue;
        }
        let finite = !class.iter().any(|&id| is_newcomer(&lg, &report.find(id).expect("validated").0.vertices));
        if finite {
            x.extend(class.iter().copied());
        }
    }
    canonical_delta(p, &x, n, k)
}

// ---------------------------------------------------------------------------
// {G.F}

/// G.F at level n: components of G_n − F contracted, every edge retained.
pub fn gf_level(p: &Presentation, f: &EdgeSet, n: usize) -> Result<Multigraph> {
    let lg = p.truncate(n);
    if let Some(&e) = f.iter().find(|e| !lg.graph.has_edge(**e)) {
        return Err(InvsysError::FrontierEdge(e));
    }
    Ok(contract_by_edges(&lg.graph, f)?)
}

/// The bond G.F′ → G.F for F ⊆ F′: a vertex goes to the vertex whose
/// component includes its component; edges go to themselves.
pub fn gf_bond(p: &Presentation, f: &EdgeSet, f_prime: &EdgeSet, el: Elem, n: usize) -> Result<Elem> {
    if !f.is_subset(f_prime) {
        return Err(InvsysError::NotComparable);
    }
    let low = gf_level(p, f, n)?;
    let high = gf_level(p, f_prime, n)?;
    match el {
        Elem::Edge(e) if high.has_edge(e) => Ok(Elem::Edge(e)),
        Elem::Vertex(v) if high.has_vertex(v) => {
            let label = high.label(v).expect("contracted vertices carry labels");
            let any = *label.iter().next().expect("nonempty");
            low.labels()
                .iter()
                .find(|(_, l)| l.contains(&any))
                .map(|(&r, _)| Elem::Vertex(r))
                .ok_or_else(|| InvsysError::UnknownPoint(format!("vertex {v}")))
        }
        _ => Err(InvsysError::UnknownPoint(format!("{el:?}"))),
    }
}

/// {G.F} as an inverse system over finite edge sets at level n.
pub struct GfSystem<'p> {
    pub p: &'p Presentation,
    pub n: usize,
}

impl<'p> InverseSystem for GfSystem<'p> {
    type Index = EdgeSet;
    type Point = Elem;

    fn leq(&self, a: &EdgeSet, b: &EdgeSet) -> bool {
        a.is_subset(b)
    }

    fn join(&self, a: &EdgeSet, b: &EdgeSet) -> Result<EdgeSet> {
        Ok(a.union(b).copied().collect())
    }

    fn level(&self, f: &EdgeSet) -> Result<Vec<Elem>> {
        let h = gf_level(self.p, f, self.n)?;
        let mut out: Vec<Elem> = h.vertices().iter().map(|&v| Elem::Vertex(v)).collect();
        out.extend(h.edge_ids().into_iter().map(Elem::Edge));
        Ok(out)
    }

    fn bond(&self, j: &EdgeSet, i: &EdgeSet, pt: &Elem) -> Result<Elem> {
        gf_bond(self.p, i, j, *pt, self.n)
    }
}

// ---------------------------------------------------------------------------
// Ultrafilter check for dummy threads

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum UltrafilterViolation {
    /// The chosen classes have empty intersection.
    EmptyIntersection,
    /// A chosen class is included in an unchosen class of some sampled index.
    NotUpwardClosed { chosen: VertexSet, missing: VertexSet },
    /// A sampled bipartition has neither or both sides chosen.
    Bipartition { a: VertexSet, b: VertexSet, chosen: usize },
}

/// Checks, on the entries at separator X, that the family of chosen classes
/// generates a filter deciding every sampled bipartition exactly once.
pub fn thread_ultrafilter_check(
    thread: &[(GammaIndex, VertexSet)],
    x: &VertexSet,
) -> std::result::Result<(), UltrafilterViolation> {
    let entries: Vec<&(GammaIndex, VertexSet)> = thread.iter().filter(|(g, _)| &g.x == x).collect();
    let family: BTreeSet<&VertexSet> = entries.iter().map(|(_, c)| c).collect();
    if let Some(first) = family.iter().next() {
        let meet = family
            .iter()
            .fold((*first).clone(), |acc, c| acc.intersection(c).copied().collect());
        if meet.is_empty() {
            return Err(UltrafilterViolation::EmptyIntersection);
        }
    }
    for (g, _) in &entries {
        for d in &g.classes {
            if let Some(c) = family.iter().find(|c| c.is_subset(d)) {
                if !family.contains(d) {
                    return Err(UltrafilterViolation::NotUpwardClosed {
                        chosen: (*c).clone(),
                        missing: d.clone(),
                    });
                }
            }
        }
        if let [a, b] = g.classes.as_slice() {
            let chosen = [a, b].iter().filter(|c| family.contains(**c)).count();
            if chosen != 1 {
                return Err(UltrafilterViolation::Bipartition {
                    a: a.clone(),
                    b: b.clone(),
                    chosen,
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::Family;

    fn ids(p: &Presentation, names: &[&str], n: usize) -> VertexSet {
        names.iter().map(|s| p.id_at(s, n).unwrap()).collect()
    }

    #[test]
    fn f_levels() {
        let p = Presentation::family(Family::K2Inf);
        let l = f_level(&p, &ids(&p, &["x", "y"], 10), 10, 5).unwrap();
        assert_eq!(l.principals.len(), 10);
        assert_eq!(l.filters, vec![ids(&p, &["x", "y"], 10)]);
        let ray = Presentation::family(Family::Ray);
        let l = f_level(&ray, &ids(&ray, &["v0"], 10), 10, 2).unwrap();
        assert_eq!((l.principals.len(), l.pending.len(), l.filters.len()), (0, 1, 0));
        let fig4 = Presentation::family(Family::Fig4);
        let l = f_level(&fig4, &ids(&fig4, &["u", "t"], 12), 12, 5).unwrap();
        assert_eq!(l.filters.len(), 3);
    }

    #[test]
    fn fig4_bonds() {
        let p = Presentation::family(Family::Fig4);
        let n = 12;
        let (u, ut) = (ids(&p, &["u"], n), ids(&p, &["u", "t"], n));
        let fu = FPoint::Filter(u.clone());
        assert_eq!(f_bond(&p, &u, &ut, &fu, n, OpenPolicy::Pending).unwrap(), fu);
        let ft = FPoint::Filter(ids(&p, &["t"], n));
        let t = p.id_at("t", n).unwrap();
        let img = f_bond(&p, &u, &ut, &ft, n, OpenPolicy::Admit).unwrap();
        let r = component_report(&p, &u, n).unwrap();
        assert_eq!(img, FPoint::Principal(r.containing(t).unwrap().0.id()));
        assert!(matches!(
            f_bond(&p, &u, &ut, &ft, n, OpenPolicy::Pending),
            Err(InvsysError::PendingComponent(_))
        ));
    }

    #[test]
    fn k2inf_chain_compatible() {
        let p = Presentation::family(Family::K2Inf);
        let n = 8;
        let chain = vec![ids(&p, &["x"], n), ids(&p, &["x", "y"], n), ids(&p, &["x", "y", "u0"], n)];
        let sys = FSystem::new(&p, n, 3, OpenPolicy::Admit);
        assert!(matches!(
            check_compatibility(&sys, &[chain]).unwrap(),
            Compatibility::Pass { .. }
        ));
    }

    #[test]
    fn census_counts() {
        let c = f_census(&Presentation::family(Family::RayStar), 6, 3).unwrap();
        assert_eq!((c.principal_threads, c.filter_threads), (6, 1));
        let c = f_census(&Presentation::family(Family::K2Inf), 6, 3).unwrap();
        assert_eq!((c.principal_threads, c.filter_threads), (0, 1));
    }

    #[test]
    fn gamma_spaces_and_joins() {
        let p = Presentation::family(Family::K2Inf);
        let n = 6;
        let sys = GammaSystem::new(&p, n);
        let xy = ids(&p, &["x", "y"], n);
        let r = sys.report(&xy).unwrap();
        let all = GammaIndex::coarsest(&r);
        let s = sys.gamma_space(&all).unwrap();
        assert_eq!((s.vertex_count(), s.edge_count()), (3, 12));
        let us: Vec<VertexId> = r.all().iter().map(|c| c.id()).collect();
        let evens: VertexSet = us.iter().step_by(2).copied().collect();
        let odds: VertexSet = us.iter().skip(1).step_by(2).copied().collect();
        let split = GammaIndex::new(xy.clone(), vec![evens, odds]);
        let s = sys.gamma_space(&split).unwrap();
        assert_eq!((s.vertex_count(), s.edge_count()), (4, 12));
        assert!(sys.leq(&all, &split) && !sys.leq(&split, &all));
        let a = GammaIndex::coarsest(&sys.report(&ids(&p, &["x"], n)).unwrap());
        let b = GammaIndex::coarsest(&sys.report(&ids(&p, &["y"], n)).unwrap());
        let j = sys.gamma_join(&a, &b).unwrap();
        assert_eq!(j.x, xy);
        assert!(sys.leq(&a, &j) && sys.leq(&b, &j));
        assert_eq!(sys.gamma_join(&a, &a).unwrap(), a);
    }

    #[test]
    fn delta_examples() {
        let p = Presentation::family(Family::K2Inf);
        let n = 10;
        let xy = ids(&p, &["x", "y"], n);
        let r = component_report(&p, &xy, n).unwrap();
        let us: Vec<VertexId> = r.all().iter().map(|c| c.id()).collect();
        let rest: VertexSet = us[2..].iter().copied().collect();
        let g = GammaIndex::new(
            xy.clone(),
            vec![VertexSet::from([us[0]]), VertexSet::from([us[1]]), rest],
        );
        assert!(delta_member(&p, &g, n, 3).unwrap());
        let evens: VertexSet = us.iter().step_by(2).copied().collect();
        let odds: VertexSet = us.iter().skip(1).step_by(2).copied().collect();
        assert!(!delta_member(&p, &GammaIndex::new(xy.clone(), vec![evens, odds]), n, 3).unwrap());
        let canon = canonical_delta(&p, &xy, n, 3).unwrap();
        assert!(delta_member(&p, &canon, n, 3).unwrap());
        let d = delta_dominate(&p, &g, n, 3).unwrap();
        let mut want = xy.clone();
        want.extend([us[0], us[1]]);
        assert_eq!(d.x, want);
        assert!(GammaSystem::new(&p, n).leq(&g, &d));
        assert_eq!(delta_dominate(&p, &canon, n, 3).unwrap(), canon);
    }

    #[test]
    fn gf_examples() {
        let p = Presentation::family(Family::K2Inf);
        let n = 6;
        let lg = p.truncate(n);
        let u0 = p.id_at("u0", n).unwrap();
        let f: EdgeSet = lg.graph.incident(u0).iter().map(|&(e, _)| e).collect();
        let h = gf_level(&p, &f, n).unwrap();
        assert_eq!(h.vertex_count(), 2);
        let loops = h.edges().filter(|&(_, a, b)| a == b).count();
        assert_eq!((h.edge_count() - loops, loops), (2, 10));
        let empty = gf_level(&p, &EdgeSet::new(), n).unwrap();
        assert_eq!(empty.vertex_count(), 1);
        assert!(matches!(
            gf_level(&p, &EdgeSet::from([9999]), n),
            Err(InvsysError::FrontierEdge(9999))
        ));
    }

    #[test]
    fn ultrafilter_fixture() {
        let x = VertexSet::new();
        let a = VertexSet::from([1]);
        let b = VertexSet::from([2]);
        let g = GammaIndex::new(x.clone(), vec![a.clone(), b.clone()]);
        assert!(thread_ultrafilter_check(&[(g.clone(), a.clone())], &x).is_ok());
        let bad = [(g.clone(), a), (g, b)];
        assert_eq!(
            thread_ultrafilter_check(&bad, &x),
            Err(UltrafilterViolation::EmptyIntersection)
        );
    }
}
