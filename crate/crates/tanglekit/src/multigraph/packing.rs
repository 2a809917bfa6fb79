//! Edge-disjoint spanning trees via matroid union of k graphic matroids.

use super::{components, EdgeId, EdgeSet, GraphError, Multigraph, VertexId, VertexPartition, VertexSet};
use std::collections::{BTreeMap, VecDeque};

/// k edge-disjoint forests grown by augmenting exchange paths.
struct ForestUnion<'g> {
    g: &'g Multigraph,
    forests: Vec<EdgeSet>,
    owner: BTreeMap<EdgeId, usize>,
}

impl<'g> ForestUnion<'g> {
    fn new(g: &'g Multigraph, k: usize) -> Self {
        ForestUnion {
            g,
            forests: vec![EdgeSet::new(); k],
            owner: BTreeMap::new(),
        }
    }

    /// Edges of the unique cycle closed by `e` in forest j, or None when
    /// `e` can be added to forest j without closing a cycle. Loops close the empty cycle.
    fn cycle(&self, j: usize, e: EdgeId) -> Option<Vec<EdgeId>> {
        let (a, b) = self.g.endpoints(e).expect("edge in graph");
        if a == b {
            return Some(Vec::new());
        }
        // BFS in forest j from a, recording the edge used to reach each vertex.
        let mut prev: BTreeMap<VertexId, (VertexId, EdgeId)> = BTreeMap::new();
        let mut seen = VertexSet::from([a]);
        let mut q = VecDeque::from([a]);
        while let Some(v) = q.pop_front() {
            if v == b {
                break;
            }
            for &(f, w) in self.g.incident(v) {
                if w != v && self.forests[j].contains(&f) && seen.insert(w) {
                    prev.insert(w, (v, f));
                    q.push_back(w);
                }
            }
        }
        if !seen.contains(&b) {
            return None;
        }
        let mut path = Vec::new();
        let mut v = b;
        while v != a {
            let (p, f) = prev[&v];
            path.push(f);
            v = p;
        }
        Some(path)
    }

    /// Tries to insert `e`; on failure returns the set of edges reached by the search.
    fn augment(&mut self, e: EdgeId) -> Result<(), EdgeSet> {
        let k = self.forests.len();
        // label[y] = (x, j): y leaves forest j to make room for x.
        let mut label: BTreeMap<EdgeId, (EdgeId, usize)> = BTreeMap::new();
        let mut reached = EdgeSet::from([e]);
        let mut q = VecDeque::from([e]);
        while let Some(x) = q.pop_front() {
            let home = self.owner.get(&x).copied();
            for j in 0..k {
                if Some(j) == home {
                    continue;
                }
                match self.cycle(j, x) {
                    None => {
                        self.apply(x, j, &label);
                        return Ok(());
                    }
                    Some(cyc) => {
                        for y in cyc {
                            if reached.insert(y) {
                                label.insert(y, (x, j));
                                q.push_back(y);
                            }
                        }
                    }
                }
            }
        }
        Err(reached)
    }

    /// Moves x into forest j and replays the exchanges back to the unplaced edge.
    fn apply(&mut self, x: EdgeId, j: usize, label: &BTreeMap<EdgeId, (EdgeId, usize)>) {
        let mut cur = x;
        let mut target = j;
        loop {
            if let Some(old) = self.owner.insert(cur, target) {
                self.forests[old].remove(&cur);
            }
            self.forests[target].insert(cur);
            match label.get(&cur) {
                None => break,
                Some(&(prev, jj)) => {
                    // cur has left forest jj; prev takes the freed slot there.
                    cur = prev;
                    target = jj;
                }
            }
        }
    }
}

/// k pairwise edge-disjoint spanning trees of a connected graph, or None when
/// no such packing exists.
pub fn pack_trees(g: &Multigraph, k: usize) -> Result<Option<Vec<EdgeSet>>, GraphError> {
    if !g.is_connected() {
        return Err(GraphError::Disconnected);
    }
    let (forests, _) = max_forest_union(g, k);
    let need = g.vertex_count().saturating_sub(1);
    if forests.iter().all(|f| f.len() == need) {
        Ok(Some(forests))
    } else {
        Ok(None)
    }
}

/// Maximum union of k forests plus, when some edge could not be placed, the
/// edge set reached by its failed search.
fn max_forest_union(g: &Multigraph, k: usize) -> (Vec<EdgeSet>, Option<EdgeSet>) {
    let mut fu = ForestUnion::new(g, k);
    let mut stuck = None;
    let need = g.vertex_count().saturating_sub(1) * k;
    for e in g.edge_ids() {
        if fu.owner.len() == need {
            break;
        }
        if let Err(r) = fu.augment(e) {
            stuck = Some(r);
        }
    }
    (fu.forests, stuck)
}

/// A partition certifying that k edge-disjoint spanning trees do not exist,
/// read off the failed augmentation (components of the reached edge set).
/// Verified before being returned.
pub fn violating_partition_hint(g: &Multigraph, k: usize) -> Option<VertexPartition> {
    let (forests, stuck) = max_forest_union(g, k);
    let need = g.vertex_count().saturating_sub(1);
    if forests.iter().all(|f| f.len() == need) {
        return None;
    }
    let mut candidates = Vec::new();
    if let Some(r) = stuck {
        let span = g.without_edges(&g.edge_ids().difference(&r).copied().collect());
        candidates.push(partition_of(&span));
    }
    // Components of the union of all forests form a second candidate.
    let all: EdgeSet = forests.iter().flatten().copied().collect();
    let union = g.without_edges(&g.edge_ids().difference(&all).copied().collect());
    candidates.push(partition_of(&union));
    candidates.push(VertexPartition::singletons(g.vertices()));
    candidates.into_iter().find(|p| {
        super::cross_edge_count(g, p).expect("partition of g") < k * (p.len().saturating_sub(1))
    })
}

fn partition_of(g: &Multigraph) -> VertexPartition {
    VertexPartition::new(components(g, &VertexSet::new()).into_iter().map(|(c, _)| c).collect())
        .expect("components partition the vertices")
}
