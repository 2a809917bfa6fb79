//! Separations in component-bipartition form, orientations and stars, a
//! brute-force tangle enumerator for small finite graphs, and the restricted
//! system S′ with the orientations induced by 𝔉-threads.

use crate::invsys::{FPoint, Thread};
use crate::multigraph::{components, Multigraph, VertexId, VertexSet};
use crate::presentation::Presentation;
use crate::structure::{component_report, crit_at, is_newcomer, ComponentReport, StructureError};
use serde::Serialize;
use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};
use thiserror::Error;

/// Vertex-count guard for `enumerate_tangles_finite`.
pub const TANGLE_GUARD: usize = 6;
/// Component-count guard for `u_of`, which scans every subfamily.
pub const FAMILY_GUARD: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TangleError {
    #[error("separations live in different graphs")]
    AmbientMismatch,
    #[error("{0} vertices exceed the guard of {1}")]
    TooLarge(usize, usize),
    #[error("the orientation does not orient every separation at {0:?}")]
    IncompleteSample(VertexSet),
    #[error("separation at {0:?} is not in S′")]
    NotInSPrime(VertexSet),
    #[error("the thread has no point at {0:?}")]
    ChainGap(VertexSet),
    #[error("invalid separation: {0}")]
    InvalidSeparation(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

type Result<T> = std::result::Result<T, TangleError>;

/// {A, B} with A = V ∖ V[𝒞] and B = X ∪ V[𝒞], where 𝒞 is a set of components
/// of G − X named by their least vertices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Separation {
    pub x: VertexSet,
    pub side: VertexSet,
}

fn fingerprint(g: &Multigraph) -> u64 {
    let mut h = DefaultHasher::new();
    g.vertices().hash(&mut h);
    for (e, u, v) in g.edges() {
        (e, u, v).hash(&mut h);
    }
    h.finish()
}

impl Separation {
    pub fn new(x: VertexSet, side: VertexSet) -> Self {
        Separation { x, side }
    }

    pub fn order(&self) -> usize {
        self.x.len()
    }

    /// (A, B) computed in g.
    pub fn sides(&self, g: &Multigraph) -> Result<(VertexSet, VertexSet)> {
        if !self.x.is_subset(g.vertices()) {
            return Err(TangleError::InvalidSeparation("separator outside the graph".into()));
        }
        let comps = components(g, &self.x);
        let mut inside = VertexSet::new();
        let mut found = 0;
        for (c, _) in &comps {
            let id = *c.iter().next().expect("nonempty");
            if self.side.contains(&id) {
                inside.extend(c.iter().copied());
                found += 1;
            }
        }
        if found != self.side.len() {
            return Err(TangleError::InvalidSeparation("unknown component id".into()));
        }
        let a: VertexSet = g.vertices().difference(&inside).copied().collect();
        let mut b = self.x.clone();
        b.extend(inside);
        Ok((a, b))
    }

    /// The orientation (A, B) when `toward_b`, else (B, A).
    pub fn orient(&self, g: &Multigraph, toward_b: bool) -> Result<OrientedSeparation> {
        let (a, b) = self.sides(g)?;
        let ambient = fingerprint(g);
        Ok(if toward_b {
            OrientedSeparation { a, b, ambient }
        } else {
            OrientedSeparation { a: b, b: a, ambient }
        })
    }
}

/// An ordered pair (A, B); B is the side it points to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OrientedSeparation {
    pub a: VertexSet,
    pub b: VertexSet,
    #[serde(skip)]
    ambient: u64,
}

impl OrientedSeparation {
    pub fn from_sides(g: &Multigraph, a: VertexSet, b: VertexSet) -> Self {
        OrientedSeparation {
            a,
            b,
            ambient: fingerprint(g),
        }
    }

    pub fn reverse(&self) -> Self {
        OrientedSeparation {
            a: self.b.clone(),
            b: self.a.clone(),
            ambient: self.ambient,
        }
    }

    /// (A, B) ≤ (C, D) iff A ⊆ C and B ⊇ D.
    pub fn leq(&self, other: &Self) -> bool {
        self.a.is_subset(&other.a) && self.b.is_superset(&other.b)
    }

    fn lt(&self, other: &Self) -> bool {
        self != other && self.leq(other)
    }

    pub fn separator(&self) -> VertexSet {
        self.a.intersection(&self.b).copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SepOrder {
    Equal,
    Leq,
    Geq,
    Incomparable,
}

pub fn sep_compare(s: &OrientedSeparation, t: &OrientedSeparation) -> Result<SepOrder> {
    if s.ambient != t.ambient {
        return Err(TangleError::AmbientMismatch);
    }
    Ok(match (s.leq(t), t.leq(s)) {
        (true, true) => SepOrder::Equal,
        (true, false) => SepOrder::Leq,
        (false, true) => SepOrder::Geq,
        (false, false) => SepOrder::Incomparable,
    })
}

pub type Orientation = Vec<OrientedSeparation>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Consistency {
    Consistent,
    /// r and s both chosen with r* < s.
    Violation { r: OrientedSeparation, s: OrientedSeparation },
}

/// Consistent iff no two distinct r, s in o satisfy r* < s.
pub fn check_orientation(o: &[OrientedSeparation]) -> Consistency {
    for r in o {
        let rr = r.reverse();
        for s in o {
            if r != s && rr.lt(s) {
                return Consistency::Violation { r: r.clone(), s: s.clone() };
            }
        }
    }
    Consistency::Consistent
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StarReport {
    pub is_star: bool,
    /// ⋂ B over the members; None for the empty family.
    pub interior: Option<VertexSet>,
}

/// r and s may lie in a common star: r ≤ s* (equivalently s ≤ r*).
fn star_compatible(r: &OrientedSeparation, s: &OrientedSeparation) -> bool {
    r.leq(&s.reverse())
}

pub fn check_star(sigma: &[OrientedSeparation]) -> StarReport {
    let is_star = sigma.iter().enumerate().all(|(i, r)| {
        sigma
            .iter()
            .enumerate()
            .all(|(j, s)| i == j || r == s || star_compatible(r, s))
    });
    let interior = sigma.split_first().map(|(first, rest)| {
        rest.iter()
            .fold(first.b.clone(), |acc, s| acc.intersection(&s.b).copied().collect())
    });
    StarReport { is_star, interior }
}

/// s_{C→X} = (X ∪ V[C], V ∖ V[C]): points from C towards X.
pub fn s_c_to_x(g: &Multigraph, x: &VertexSet, c: VertexId) -> Result<OrientedSeparation> {
    Separation::new(x.clone(), VertexSet::from([c])).orient(g, false)
}

/// σ_X = {s_{C→X} | C a component of G − X}.
pub fn sigma_x(g: &Multigraph, x: &VertexSet) -> Result<Vec<OrientedSeparation>> {
    components(g, x)
        .iter()
        .map(|(c, _)| s_c_to_x(g, x, *c.iter().next().expect("nonempty")))
        .collect()
}

/// Which finite stars an orientation must avoid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StarSelector {
    /// Nonempty stars whose interior has fewer than this many vertices.
    InteriorBelow(usize),
    /// No forbidden stars: consistent orientations only.
    Nothing,
}

/// Every separation of order < k of g, one per unordered pair {A, B}.
pub fn separations_below(g: &Multigraph, k: usize) -> Vec<Separation> {
    let verts: Vec<VertexId> = g.vertices().iter().copied().collect();
    let mut out = Vec::new();
    for size in 0..k.min(verts.len() + 1) {
        for x in subsets_of_size(&verts, size) {
            let ids: Vec<VertexId> = components(g, &x)
                .iter()
                .map(|(c, _)| *c.iter().next().expect("nonempty"))
                .collect();
            if ids.is_empty() {
                out.push(Separation::new(x.clone(), VertexSet::new()));
                continue;
            }
            // 𝒞 and its complement give the same pair; keep 𝒞 without the last component.
            let c = ids.len() - 1;
            for mask in 0u64..(1u64 << c) {
                let side = (0..c).filter(|i| mask >> i & 1 == 1).map(|i| ids[i]).collect();
                out.push(Separation::new(x.clone(), side));
            }
        }
    }
    out
}

fn subsets_of_size(items: &[VertexId], size: usize) -> Vec<VertexSet> {
    fn rec(items: &[VertexId], size: usize, start: usize, cur: &mut Vec<VertexId>, out: &mut Vec<VertexSet>) {
        if cur.len() == size {
            out.push(cur.iter().copied().collect());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, size, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, size, 0, &mut Vec::new(), &mut out);
    out
}

/// Whether some star inside `chosen ∪ {new}` containing `new` has interior below k.
fn small_star_with(chosen: &[OrientedSeparation], new: &OrientedSeparation, k: usize) -> bool {
    fn grow(cands: &[&OrientedSeparation], interior: &VertexSet, k: usize) -> bool {
        for (i, c) in cands.iter().enumerate() {
            let inner: VertexSet = interior.intersection(&c.b).copied().collect();
            if inner.len() < k {
                return true;
            }
            let rest: Vec<&OrientedSeparation> = cands[i + 1..]
                .iter()
                .copied()
                .filter(|d| star_compatible(c, d))
                .collect();
            if grow(&rest, &inner, k) {
                return true;
            }
        }
        false
    }
    if new.b.len() < k {
        return true;
    }
    let cands: Vec<&OrientedSeparation> = chosen.iter().filter(|c| star_compatible(c, new)).collect();
    grow(&cands, &new.b, k)
}

/// All consistent orientations of the separations of order < k that contain
/// no forbidden star, in deterministic order.
pub fn enumerate_tangles_finite(g: &Multigraph, k: usize, forbidden: StarSelector) -> Result<Vec<Orientation>> {
    let nv = g.vertex_count();
    if nv > TANGLE_GUARD {
        return Err(TangleError::TooLarge(nv, TANGLE_GUARD));
    }
    let seps = separations_below(g, k);
    let options: Vec<Vec<OrientedSeparation>> = seps
        .iter()
        .map(|s| {
            let mut o = vec![s.orient(g, true)?, s.orient(g, false)?];
            o.sort();
            o.dedup();
            Ok(o)
        })
        .collect::<Result<_>>()?;
    let bound = match forbidden {
        StarSelector::InteriorBelow(b) => Some(b),
        StarSelector::Nothing => None,
    };
    let mut out = Vec::new();
    fn rec(
        options: &[Vec<OrientedSeparation>],
        i: usize,
        chosen: &mut Vec<OrientedSeparation>,
        bound: Option<usize>,
        out: &mut Vec<Orientation>,
    ) {
        if i == options.len() {
            let mut o = chosen.clone();
            o.sort();
            out.push(o);
            return;
        }
        for s in &options[i] {
            let sr = s.reverse();
            let clash = chosen.iter().any(|r| r != s && (r.reverse().lt(s) || sr.lt(r)));
            if clash || bound.map_or(false, |b| small_star_with(chosen, s, b)) {
                continue;
            }
            chosen.push(s.clone());
            rec(options, i + 1, chosen, bound, out);
            chosen.pop();
        }
    }
    rec(&options, 0, &mut Vec::new(), bound, &mut out);
    out.sort();
    Ok(out)
}

/// U(τ, X): the subfamilies 𝒞 of 𝒞_X with (V ∖ V[𝒞], X ∪ V[𝒞]) ∈ τ.
pub fn u_of(g: &Multigraph, tau: &[OrientedSeparation], x: &VertexSet) -> Result<Vec<VertexSet>> {
    let ids: Vec<VertexId> = components(g, x)
        .iter()
        .map(|(c, _)| *c.iter().next().expect("nonempty"))
        .collect();
    if ids.len() > FAMILY_GUARD {
        return Err(TangleError::TooLarge(ids.len(), FAMILY_GUARD));
    }
    let members: BTreeSet<(&VertexSet, &VertexSet)> = tau.iter().map(|s| (&s.a, &s.b)).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << ids.len()) {
        let side: VertexSet = (0..ids.len()).filter(|i| mask >> i & 1 == 1).map(|i| ids[i]).collect();
        let (a, b) = Separation::new(x.clone(), side.clone()).sides(g)?;
        let fwd = members.contains(&(&a, &b));
        let back = members.contains(&(&b, &a));
        if !fwd && !back {
            return Err(TangleError::IncompleteSample(x.clone()));
        }
        if fwd {
            out.push(side);
        }
    }
    out.sort();
    Ok(out)
}

/// The component C with family = {𝒞 ∋ C}, if the family is principal on `ids`.
pub fn principal_generator(family: &[VertexSet], ids: &VertexSet) -> Option<VertexId> {
    let fam: BTreeSet<&VertexSet> = family.iter().collect();
    ids.iter().copied().find(|&c| {
        let n = ids.len();
        let list: Vec<VertexId> = ids.iter().copied().collect();
        (0u64..(1u64 << n)).all(|mask| {
            let s: VertexSet = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| list[i]).collect();
            s.contains(&c) == fam.contains(&s)
        })
    })
}

/// The separator of the least (by size, then order) sampled index at which the
/// thread sits on a filter point, reported as that filter's critical set.
pub fn x_tau(thread: &Thread<VertexSet, FPoint>, sample: &[VertexSet]) -> Option<VertexSet> {
    thread
        .points
        .iter()
        .filter(|(x, _)| sample.is_empty() || sample.contains(x))
        .filter_map(|(x, pt)| match pt {
            FPoint::Filter(y) => Some((x.len(), x.clone(), y.clone())),
            FPoint::Principal(_) => None,
        })
        .min()
        .map(|(_, _, y)| y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    In,
    NotIn,
    Unknown,
}

/// The members of 𝒞_X(Y) standing for its infinite part: newcomers, or the
/// newest component when none is new.
fn tail_of(report: &ComponentReport, y: &VertexSet, lg: &crate::presentation::LeveledGraph) -> VertexSet {
    let fam: Vec<&crate::structure::Comp> = report.all().into_iter().filter(|c| &c.nbhd == y).collect();
    let newcomers: VertexSet = fam
        .iter()
        .filter(|c| is_newcomer(lg, &c.vertices))
        .map(|c| c.id())
        .collect();
    if !newcomers.is_empty() {
        return newcomers;
    }
    fam.iter()
        .max_by_key(|c| c.vertices.iter().map(|v| lg.born.get(v).copied().unwrap_or(0)).max())
        .map(|c| VertexSet::from([c.id()]))
        .unwrap_or_default()
}

/// s ∈ S′ iff no Y ∈ crit(X) has infinitely many components on both sides.
pub fn in_s_prime(p: &Presentation, s: &Separation, n: usize, k: usize) -> Result<Membership> {
    let report = component_report(p, &s.x, n)?;
    let lg = p.truncate(n);
    let ids: VertexSet = report.all().iter().map(|c| c.id()).collect();
    if !s.side.is_subset(&ids) {
        return Err(TangleError::InvalidSeparation("unknown component id".into()));
    }
    for y in crit_at(p, &s.x, n, k) {
        let fam: Vec<&crate::structure::Comp> = report.all().into_iter().filter(|c| c.nbhd == y).collect();
        let grow_in = fam
            .iter()
            .any(|c| s.side.contains(&c.id()) && is_newcomer(&lg, &c.vertices));
        let grow_out = fam
            .iter()
            .any(|c| !s.side.contains(&c.id()) && is_newcomer(&lg, &c.vertices));
        if grow_in && grow_out {
            return Ok(Membership::NotIn);
        }
    }
    let known = p.certificate(n).is_some() || lg.frontier.is_empty();
    Ok(if known { Membership::In } else { Membership::Unknown })
}

/// The orientation of sampled S′ separations induced by an 𝔉-thread: (A, B)
/// points to B iff the thread's point at X lies in the family 𝒞.
pub fn fpoint_orientation(
    p: &Presentation,
    thread: &Thread<VertexSet, FPoint>,
    seps: &[Separation],
    n: usize,
    k: usize,
) -> Result<Orientation> {
    let lg = p.truncate(n);
    let mut out = Vec::new();
    for s in seps {
        if in_s_prime(p, s, n, k)? != Membership::In {
            return Err(TangleError::NotInSPrime(s.x.clone()));
        }
        let pt = thread.at(&s.x).ok_or_else(|| TangleError::ChainGap(s.x.clone()))?;
        let big = match pt {
            FPoint::Principal(c) => s.side.contains(c),
            FPoint::Filter(y) => {
                let report = component_report(p, &s.x, n)?;
                let tail = tail_of(&report, y, &lg);
                !tail.is_empty() && tail.is_subset(&s.side)
            }
        };
        out.push(s.orient(&lg.graph, big)?);
    }
    Ok(out)
}
