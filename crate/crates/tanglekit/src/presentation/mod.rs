//! Finitely presented infinite graphs as monotone sequences of level graphs.
//!
//! Level n is a finite multigraph plus a frontier: the vertices whose incident
//! edge list may still grow. A vertex that leaves the frontier has its final
//! neighbourhood and never returns. Catalog families also carry certificates.

pub mod catalog;

pub use catalog::{ClassSpec, EndSpec, Family, Flags};

use crate::multigraph::{EdgeId, GraphError, Multigraph, VertexId, VertexSet};
use catalog::Sink;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("malformed presentation: {0}")]
    Malformed(String),
    #[error("unknown family: {0}")]
    UnknownFamily(String),
    #[error("level {level}: {reason}")]
    NotMonotone { level: usize, reason: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// One finite stage of a presentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeveledGraph {
    pub level: usize,
    pub graph: Multigraph,
    /// Vertices whose incident edges may still grow.
    pub frontier: VertexSet,
    /// Level at which each vertex first appeared.
    pub born: BTreeMap<VertexId, usize>,
}

impl LeveledGraph {
    pub fn vertices(&self) -> &VertexSet {
        self.graph.vertices()
    }

    /// Vertices with final neighbourhoods.
    pub fn settled(&self) -> VertexSet {
        self.graph.vertices().difference(&self.frontier).copied().collect()
    }
}

/// One level of a user presentation: vertices and edges added, plus the frontier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelDiff {
    #[serde(default)]
    pub add_vertices: Vec<VertexId>,
    /// `[u, v]` (ids assigned in order) or `[id, u, v]`.
    #[serde(default)]
    pub add_edges: Vec<Vec<u32>>,
    #[serde(default)]
    pub frontier: Vec<VertexId>,
}

#[derive(Debug, Clone)]
enum Source {
    Family(Family),
    Custom(Vec<LevelDiff>),
}

#[derive(Debug, Default)]
struct BuildState {
    graph: Multigraph,
    frontier: VertexSet,
    born: BTreeMap<VertexId, usize>,
    names: BTreeMap<VertexId, String>,
    ids: HashMap<String, VertexId>,
    order: Vec<String>,
    levels: Vec<Arc<LeveledGraph>>,
    pending_frontier: Option<Vec<String>>,
}

impl Sink for (&mut BuildState, usize) {
    fn vertex(&mut self, name: &str) {
        let (st, level) = self;
        if st.ids.contains_key(name) {
            return;
        }
        let id = st.order.len() as VertexId;
        st.ids.insert(name.to_string(), id);
        st.names.insert(id, name.to_string());
        st.order.push(name.to_string());
        st.graph.add_vertex(id);
        st.born.insert(id, *level);
    }

    fn edge(&mut self, a: &str, b: &str) {
        self.vertex(a);
        self.vertex(b);
        let st = &mut *self.0;
        let (u, v) = (st.ids[a], st.ids[b]);
        st.graph.push_edge(u, v).expect("endpoints interned");
    }

    fn frontier(&mut self, names: Vec<String>) {
        self.0.pending_frontier = Some(names);
    }

    fn existing(&self) -> Vec<String> {
        self.0.order.clone()
    }
}

/// A finitely presented infinite graph with a memoized truncation cache.
#[derive(Debug)]
pub struct Presentation {
    source: Source,
    state: Mutex<BuildState>,
}

impl Clone for Presentation {
    fn clone(&self) -> Self {
        Presentation {
            source: self.source.clone(),
            state: Mutex::new(BuildState::default()),
        }
    }
}

/// End data translated to ids and restricted to one level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndCert {
    pub id: String,
    /// The visible prefix of the defining ray.
    pub ray: Vec<VertexId>,
    pub dominators: VertexSet,
    pub dominators_unbounded: bool,
}

/// A ∼-class restricted to one level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimClass {
    pub vertices: VertexSet,
    pub ends: Vec<String>,
}

/// Exact structural answers for a catalog family, restricted to level `level`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub family: String,
    pub level: usize,
    pub ends: Vec<EndCert>,
    /// False when the graph has more ends than listed (a sample is given).
    pub ends_complete: bool,
    /// Every critical set all of whose vertices exist at `level`.
    pub crit: Vec<VertexSet>,
    pub sim_classes: Vec<SimClass>,
    pub infinite_degree: VertexSet,
    pub flags: Flags,
    /// Reconstructed from prose rather than from a drawing.
    pub stand_in: bool,
}

impl Certificate {
    pub fn end(&self, id: &str) -> Option<&EndCert> {
        self.ends.iter().find(|e| e.id == id)
    }

    /// The class containing vertex v, if v lies in a non-trivial class.
    pub fn class_of_vertex(&self, v: VertexId) -> Option<&SimClass> {
        self.sim_classes.iter().find(|c| c.vertices.contains(&v))
    }

    pub fn class_of_end(&self, e: &str) -> Option<&SimClass> {
        self.sim_classes.iter().find(|c| c.ends.iter().any(|x| x == e))
    }

    /// Critical sets contained in x.
    pub fn crit_within(&self, x: &VertexSet) -> Vec<VertexSet> {
        self.crit.iter().filter(|y| y.is_subset(x)).cloned().collect()
    }
}

impl Presentation {
    pub fn family(f: Family) -> Self {
        Presentation {
            source: Source::Family(f),
            state: Mutex::new(BuildState::default()),
        }
    }

    /// Catalog family by name with integer parameters.
    pub fn named(name: &str, params: &BTreeMap<String, i64>) -> Result<Self, PresentationError> {
        Family::parse(name, params)
            .map(Presentation::family)
            .map_err(PresentationError::UnknownFamily)
    }

    /// User presentation from level diffs; validated eagerly.
    pub fn custom(levels: Vec<LevelDiff>) -> Result<Self, PresentationError> {
        if levels.is_empty() {
            return Err(PresentationError::Malformed("no levels".into()));
        }
        validate_custom(&levels)?;
        Ok(Presentation {
            source: Source::Custom(levels),
            state: Mutex::new(BuildState::default()),
        })
    }

    /// A finite graph as a one-level presentation with empty frontier.
    pub fn constant(g: &Multigraph) -> Self {
        let diff = LevelDiff {
            add_vertices: g.vertices().iter().copied().collect(),
            add_edges: g.edges().map(|(e, u, v)| vec![e, u, v]).collect(),
            frontier: Vec::new(),
        };
        Presentation::custom(vec![diff]).expect("a finite graph is a valid presentation")
    }

    /// `{"family":..,"params":{..}}` or `{"custom":{"levels":[..]}}`.
    pub fn from_json(value: &serde_json::Value) -> Result<Self, PresentationError> {
        if let Some(name) = value.get("family") {
            let name = name
                .as_str()
                .ok_or_else(|| PresentationError::Malformed("family must be a string".into()))?;
            let mut params = BTreeMap::new();
            if let Some(obj) = value.get("params") {
                let obj = obj
                    .as_object()
                    .ok_or_else(|| PresentationError::Malformed("params must be an object".into()))?;
                for (k, v) in obj {
                    let x = v.as_i64().ok_or_else(|| {
                        PresentationError::Malformed(format!("parameter {k} must be an integer"))
                    })?;
                    params.insert(k.clone(), x);
                }
            }
            return Presentation::named(name, &params);
        }
        if let Some(custom) = value.get("custom") {
            let levels: Vec<LevelDiff> = serde_json::from_value(
                custom
                    .get("levels")
                    .cloned()
                    .ok_or_else(|| PresentationError::Malformed("custom needs levels".into()))?,
            )
            .map_err(|e| PresentationError::Malformed(e.to_string()))?;
            return Presentation::custom(levels);
        }
        Err(PresentationError::Malformed(
            "expected a \"family\" or \"custom\" key".into(),
        ))
    }

    pub fn to_json(&self) -> serde_json::Value {
        match &self.source {
            Source::Family(f) => serde_json::json!({"family": f.name(), "params": f.params()}),
            Source::Custom(levels) => serde_json::json!({"custom": {"levels": levels}}),
        }
    }

    pub fn catalog_family(&self) -> Option<&Family> {
        match &self.source {
            Source::Family(f) => Some(f),
            Source::Custom(_) => None,
        }
    }

    /// Short label: the family name or "custom".
    pub fn label(&self) -> String {
        match &self.source {
            Source::Family(f) => f.name().to_string(),
            Source::Custom(_) => "custom".to_string(),
        }
    }

    /// Level n; memoized, so repeated calls share one allocation.
    pub fn truncate(&self, n: usize) -> Arc<LeveledGraph> {
        let mut st = self.state.lock().expect("presentation cache poisoned");
        while st.levels.len() <= n {
            let i = st.levels.len();
            self.build_level(&mut st, i);
        }
        Arc::clone(&st.levels[n])
    }

    fn build_level(&self, st: &mut BuildState, i: usize) {
        match &self.source {
            Source::Family(f) => {
                f.grow(&mut (&mut *st, i), i);
                let names = st.pending_frontier.take().unwrap_or_default();
                st.frontier = names.iter().map(|n| st.ids[n]).collect();
            }
            Source::Custom(levels) => {
                if let Some(diff) = levels.get(i) {
                    for &v in &diff.add_vertices {
                        st.graph.add_vertex(v);
                        st.born.insert(v, i);
                        st.names.insert(v, v.to_string());
                        st.ids.insert(v.to_string(), v);
                    }
                    for e in &diff.add_edges {
                        match e.as_slice() {
                            [u, v] => {
                                st.graph.push_edge(*u, *v).expect("validated");
                            }
                            [id, u, v] => st.graph.add_edge(*id, *u, *v).expect("validated"),
                            _ => unreachable!("validated"),
                        }
                    }
                    st.frontier = diff.frontier.iter().copied().collect();
                }
            }
        }
        let lg = LeveledGraph {
            level: i,
            graph: st.graph.clone(),
            frontier: st.frontier.clone(),
            born: st.born.clone(),
        };
        st.levels.push(Arc::new(lg));
    }

    /// Display name of a vertex (custom presentations use the id).
    pub fn name(&self, v: VertexId) -> String {
        let st = self.state.lock().expect("presentation cache poisoned");
        st.names.get(&v).cloned().unwrap_or_else(|| v.to_string())
    }

    /// Id of a named vertex that exists by level `n`.
    pub fn id_at(&self, name: &str, n: usize) -> Option<VertexId> {
        let lg = self.truncate(n);
        let st = self.state.lock().expect("presentation cache poisoned");
        st.ids.get(name).copied().filter(|v| lg.graph.has_vertex(*v))
    }

    /// Resolves a vertex given by name, or by numeric id for custom presentations.
    pub fn resolve(&self, token: &str, n: usize) -> Option<VertexId> {
        self.id_at(token, n)
    }

    pub fn names_of(&self, set: &VertexSet) -> Vec<String> {
        set.iter().map(|&v| self.name(v)).collect()
    }

    /// Certificate restricted to level n; None for user presentations.
    pub fn certificate(&self, n: usize) -> Option<Certificate> {
        let f = self.catalog_family()?.clone();
        let lg = self.truncate(n);
        let present: Vec<String> = lg.vertices().iter().map(|&v| self.name(v)).collect();
        let lookup = |name: &str| self.id_at(name, n);
        let all_ids = |names: &[String]| -> Option<VertexSet> {
            names.iter().map(|s| lookup(s)).collect()
        };
        let ends: Vec<EndCert> = f
            .ends(n)
            .into_iter()
            .filter_map(|e| {
                let ray: Vec<VertexId> = e.ray.iter().map_while(|s| lookup(s)).collect();
                if ray.is_empty() {
                    return None;
                }
                Some(EndCert {
                    id: e.id,
                    ray,
                    dominators: e.dominators.iter().filter_map(|s| lookup(s)).collect(),
                    dominators_unbounded: e.dominators_unbounded,
                })
            })
            .collect();
        let visible_ends: Vec<String> = ends.iter().map(|e| e.id.clone()).collect();
        let mut crit: Vec<VertexSet> = f
            .crit(n, &present)
            .iter()
            .filter_map(|c| all_ids(c))
            .collect();
        crit.sort();
        crit.dedup();
        let sim_classes = f
            .sim_classes(n, &present)
            .into_iter()
            .map(|c| SimClass {
                vertices: c.vertices.iter().filter_map(|s| lookup(s)).collect(),
                ends: c.ends.into_iter().filter(|e| visible_ends.contains(e)).collect(),
            })
            .filter(|c| c.vertices.len() + c.ends.len() >= 2)
            .collect();
        Some(Certificate {
            family: f.name().to_string(),
            level: n,
            ends,
            ends_complete: f.ends_complete(),
            crit,
            sim_classes,
            infinite_degree: f
                .infinite_degree(&present)
                .iter()
                .filter_map(|s| lookup(s))
                .collect(),
            flags: f.flags(),
            stand_in: f.stand_in(),
        })
    }

    /// The part of the i-th certified a–b path lying in `within`, in path
    /// order. None when the family has no path generator for the pair.
    pub fn path_trace(&self, a: VertexId, b: VertexId, i: usize, within: &VertexSet) -> Option<Vec<VertexId>> {
        let f = self.catalog_family()?.clone();
        let cap = {
            let st = self.state.lock().expect("presentation cache poisoned");
            within.iter().filter_map(|v| st.born.get(v)).copied().max().unwrap_or(0)
        };
        let path = f.path(&self.name(a), &self.name(b), i, cap)?;
        let st = self.state.lock().expect("presentation cache poisoned");
        Some(
            path.iter()
                .filter_map(|s| st.ids.get(s).copied())
                .filter(|v| within.contains(v))
                .collect(),
        )
    }

    /// Edge ids of a level graph between two named vertices.
    pub fn edges_between(&self, n: usize, a: VertexId, b: VertexId) -> Vec<EdgeId> {
        let lg = self.truncate(n);
        lg.graph
            .incident(a)
            .iter()
            .filter(|&&(_, w)| w == b)
            .map(|&(e, _)| e)
            .collect()
    }
}

fn validate_custom(levels: &[LevelDiff]) -> Result<(), PresentationError> {
    let mut g = Multigraph::new();
    let mut frontier = VertexSet::new();
    let mut retired = VertexSet::new();
    for (i, diff) in levels.iter().enumerate() {
        let bad = |reason: String| PresentationError::NotMonotone { level: i, reason };
        for &v in &diff.add_vertices {
            if g.has_vertex(v) {
                return Err(bad(format!("vertex {v} added twice")));
            }
            g.add_vertex(v);
        }
        let new: VertexSet = diff.add_vertices.iter().copied().collect();
        for e in &diff.add_edges {
            let (u, v) = match e.as_slice() {
                [u, v] => (*u, *v),
                [_, u, v] => (*u, *v),
                _ => return Err(bad(format!("edge entry {e:?} needs 2 or 3 numbers"))),
            };
            for w in [u, v] {
                if !g.has_vertex(w) {
                    return Err(bad(format!("edge endpoint {w} unknown")));
                }
                if retired.contains(&w) || (i > 0 && !frontier.contains(&w) && !new.contains(&w)) {
                    return Err(bad(format!("vertex {w} left the frontier but gains an edge")));
                }
            }
            match e.as_slice() {
                [id, _, _] => g.add_edge(*id, u, v).map_err(|x| bad(x.to_string()))?,
                _ => {
                    g.push_edge(u, v).map_err(|x| bad(x.to_string()))?;
                }
            }
        }
        let next: VertexSet = diff.frontier.iter().copied().collect();
        for &v in &next {
            if !g.has_vertex(v) {
                return Err(bad(format!("frontier vertex {v} unknown")));
            }
            if retired.contains(&v) {
                return Err(bad(format!("vertex {v} re-enters the frontier")));
            }
        }
        for &v in g.vertices() {
            if !next.contains(&v) {
                retired.insert(v);
            }
        }
        frontier = next;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2inf_counts() {
        let p = Presentation::family(Family::K2Inf);
        for n in 0..8 {
            let lg = p.truncate(n);
            assert_eq!(lg.graph.vertex_count(), 2 + n);
            assert_eq!(lg.graph.edge_count(), 2 * n);
            let f: Vec<String> = lg.frontier.iter().map(|&v| p.name(v)).collect();
            assert_eq!(f, vec!["x", "y"]);
        }
    }

    #[test]
    fn ray_prefix_and_frontier() {
        let p = Presentation::family(Family::Ray);
        let lg = p.truncate(3);
        assert_eq!(lg.graph.vertex_count(), 4);
        assert_eq!(lg.graph.edge_count(), 3);
        assert_eq!(p.names_of(&lg.frontier), vec!["v3"]);
    }

    #[test]
    fn crit_chain_adjacency() {
        let p = Presentation::family(Family::CritChain);
        let n = 6;
        let lg = p.truncate(n);
        for &v in lg.vertices() {
            let name = p.name(v);
            if let Some(rest) = name.strip_prefix('b') {
                let k: usize = rest.split('_').next().unwrap().parse().unwrap();
                let nb: Vec<String> = p.names_of(&lg.graph.neighbours(v));
                let mut want: Vec<String> = (0..=k).map(|a| format!("a{a}")).collect();
                want.sort();
                let mut got = nb.clone();
                got.sort();
                assert_eq!(got, want, "{name}");
            }
        }
    }

    #[test]
    fn certificates_of_examples() {
        let fig4 = Presentation::family(Family::Fig4);
        let c = fig4.certificate(5).unwrap();
        let names: Vec<Vec<String>> = c.crit.iter().map(|s| fig4.names_of(s)).collect();
        assert_eq!(names.len(), 3);
        assert!(names.contains(&vec!["u".to_string()]));
        assert!(names.contains(&vec!["t".to_string()]));
        let k2 = Presentation::family(Family::K2Inf).certificate(4).unwrap();
        assert!(k2.ends.is_empty());
        let rs = Presentation::family(Family::RayStar);
        let c = rs.certificate(5).unwrap();
        assert_eq!(c.ends.len(), 5);
        assert_eq!(c.crit.len(), 1);
    }

    #[test]
    fn custom_validation() {
        let ok = serde_json::json!({"custom": {"levels": [
            {"add_vertices": [0, 1], "add_edges": [[0, 1]], "frontier": [1]},
            {"add_vertices": [2], "add_edges": [[1, 2]], "frontier": [2]}
        ]}});
        let p = Presentation::from_json(&ok).unwrap();
        assert_eq!(p.truncate(5).graph.edge_count(), 2);
        assert!(p.certificate(3).is_none());
        let bad = serde_json::json!({"custom": {"levels": [
            {"add_vertices": [0, 1], "add_edges": [[0, 1]], "frontier": [1]},
            {"add_vertices": [2], "add_edges": [[0, 2]], "frontier": [2]}
        ]}});
        assert!(matches!(
            Presentation::from_json(&bad),
            Err(PresentationError::NotMonotone { level: 1, .. })
        ));
    }

    #[test]
    fn binary_fan_inorder_neighbours_are_adjacent() {
        let p = Presentation::family(Family::BinaryFan);
        let n = 5;
        let lg = p.truncate(n);
        let a = p.id_at("b00", n).unwrap();
        let c = p.id_at("b1", n).unwrap();
        for i in 0..3 {
            let path = p.path_trace(a, c, i, lg.vertices()).unwrap();
            for w in path.windows(2) {
                assert!(lg.graph.neighbours(w[0]).contains(&w[1]));
            }
        }
    }
}
