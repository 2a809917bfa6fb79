//! Catalog of presented graphs with exact structural data.
//!
//! Everything here is name-based: level generators add named vertices, and the
//! certificate accessors describe ends, critical sets and classes by name. The
//! owning presentation translates names to ids and filters to a level.

use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BTreeMap;

/// Structural yes/no facts about a catalog graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub locally_finite: bool,
    pub connected: bool,
    pub one_point_omega: bool,
    pub ends_locally_compact: bool,
    pub simply_branching: bool,
}

const fn flags(lf: bool, conn: bool, op: bool, elc: bool, sb: bool) -> Flags {
    Flags {
        locally_finite: lf,
        connected: conn,
        one_point_omega: op,
        ends_locally_compact: elc,
        simply_branching: sb,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    K2Inf,
    KmInf { m: usize },
    DominatedRay,
    RayStar,
    Fig4,
    Fig5,
    CritChain,
    TreeInf,
    BinaryFan,
    BinaryFlower,
    Fig16,
    Fig17,
    GridK2,
    Ray,
    DoubleRay,
    Grid,
}

/// Name-level description of one end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndSpec {
    pub id: String,
    /// Ray vertices in order; long enough to cover the requested level.
    pub ray: Vec<String>,
    pub dominators: Vec<String>,
    /// The dominating set is infinite; `dominators` lists a finite part.
    pub dominators_unbounded: bool,
}

/// One ∼-class: its vertex names and end ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSpec {
    pub vertices: Vec<String>,
    pub ends: Vec<String>,
}

/// Receives the vertices and edges of one new level.
pub(crate) trait Sink {
    fn vertex(&mut self, name: &str);
    fn edge(&mut self, a: &str, b: &str);
    fn frontier(&mut self, names: Vec<String>);
    /// Names present before this level, in creation order.
    fn existing(&self) -> Vec<String>;
}

impl Family {
    pub const NAMES: [&'static str; 16] = [
        "k2inf",
        "kminf",
        "dominated_ray",
        "ray_star",
        "fig4",
        "fig5",
        "crit_chain",
        "tree_inf",
        "binary_fan",
        "binary_flower",
        "fig16",
        "fig17",
        "grid_k2",
        "ray",
        "double_ray",
        "grid",
    ];

    /// Parses a family name plus integer parameters (only `kminf` takes `m`, default 3).
    pub fn parse(name: &str, params: &BTreeMap<String, i64>) -> Result<Family, String> {
        let unexpected = |f: Family| {
            if params.is_empty() {
                Ok(f)
            } else {
                Err(format!("family {name} takes no parameters"))
            }
        };
        match name {
            "k2inf" => unexpected(Family::K2Inf),
            "kminf" => {
                if params.keys().any(|k| k != "m") {
                    return Err("kminf takes only the parameter m".into());
                }
                let m = params.get("m").copied().unwrap_or(3);
                if m < 3 {
                    return Err(format!("kminf needs m >= 3, got {m}"));
                }
                Ok(Family::KmInf { m: m as usize })
            }
            "dominated_ray" => unexpected(Family::DominatedRay),
            "ray_star" => unexpected(Family::RayStar),
            "fig4" => unexpected(Family::Fig4),
            "fig5" => unexpected(Family::Fig5),
            "crit_chain" => unexpected(Family::CritChain),
            "tree_inf" => unexpected(Family::TreeInf),
            "binary_fan" => unexpected(Family::BinaryFan),
            "binary_flower" => unexpected(Family::BinaryFlower),
            "fig16" => unexpected(Family::Fig16),
            "fig17" => unexpected(Family::Fig17),
            "grid_k2" => unexpected(Family::GridK2),
            "ray" => unexpected(Family::Ray),
            "double_ray" => unexpected(Family::DoubleRay),
            "grid" => unexpected(Family::Grid),
            other => Err(format!("unknown family {other}")),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::K2Inf => "k2inf",
            Family::KmInf { .. } => "kminf",
            Family::DominatedRay => "dominated_ray",
            Family::RayStar => "ray_star",
            Family::Fig4 => "fig4",
            Family::Fig5 => "fig5",
            Family::CritChain => "crit_chain",
            Family::TreeInf => "tree_inf",
            Family::BinaryFan => "binary_fan",
            Family::BinaryFlower => "binary_flower",
            Family::Fig16 => "fig16",
            Family::Fig17 => "fig17",
            Family::GridK2 => "grid_k2",
            Family::Ray => "ray",
            Family::DoubleRay => "double_ray",
            Family::Grid => "grid",
        }
    }

    pub fn params(&self) -> BTreeMap<String, i64> {
        match self {
            Family::KmInf { m } => BTreeMap::from([("m".to_string(), *m as i64)]),
            _ => BTreeMap::new(),
        }
    }

    /// Every catalog family with default parameters.
    pub fn all() -> Vec<Family> {
        Family::NAMES
            .iter()
            .map(|n| Family::parse(n, &BTreeMap::new()).expect("catalog name"))
            .collect()
    }

    pub fn describe(&self) -> &'static str {
        match self {
            Family::K2Inf => "complete bipartite graph with two hubs and infinitely many middle vertices",
            Family::KmInf { .. } => "complete bipartite graph with m hubs and infinitely many middle vertices",
            Family::DominatedRay => "a ray plus a hub joined to every ray vertex",
            Family::RayStar => "infinitely many rays glued at a common first vertex",
            Family::Fig4 => "two hubs u, t with private leaves and infinitely many common neighbours",
            Family::Fig5 => "a ray whose every vertex carries infinitely many leaves",
            Family::CritChain => "nested critical sets X_0 ⊂ X_1 ⊂ … with one dominated end",
            Family::TreeInf => "the tree in which every vertex has infinitely many children",
            Family::BinaryFan => "binary tree whose vertices fan into the boundary rays of their subtrees (stand-in)",
            Family::BinaryFlower => "binary tree with its root joined to every vertex",
            Family::Fig16 => "chain u_0, u_1, … with infinitely many 2-paths between neighbours (stand-in)",
            Family::Fig17 => "heavy double rays joined by ladder edges (stand-in)",
            Family::GridK2 => "4 × ℕ grid whose ray edges are heavy links (stand-in)",
            Family::Ray => "the one-way infinite path",
            Family::DoubleRay => "the two-way infinite path",
            Family::Grid => "the ℕ × ℕ grid",
        }
    }

    /// True for catalog graphs whose drawings were reconstructed from prose.
    pub fn stand_in(&self) -> bool {
        matches!(
            self,
            Family::BinaryFan | Family::Fig16 | Family::Fig17 | Family::GridK2
        )
    }

    pub fn flags(&self) -> Flags {
        match self {
            Family::K2Inf | Family::KmInf { .. } | Family::RayStar | Family::Fig4 => {
                flags(false, true, true, true, true)
            }
            Family::DominatedRay | Family::Fig5 | Family::CritChain => {
                flags(false, true, false, true, true)
            }
            Family::TreeInf => flags(false, true, false, false, true),
            Family::BinaryFan => flags(false, true, false, true, false),
            Family::BinaryFlower | Family::Fig16 => flags(false, true, false, true, true),
            Family::Fig17 | Family::GridK2 => flags(false, true, false, true, false),
            Family::Ray | Family::DoubleRay | Family::Grid => flags(true, true, false, true, true),
        }
    }

    /// The end list is exhaustive (false for graphs with uncountably many ends).
    pub fn ends_complete(&self) -> bool {
        !matches!(
            self,
            Family::TreeInf | Family::BinaryFan | Family::BinaryFlower
        )
    }

    /// Adds level `i` (level 0 is the initial graph).
    pub(crate) fn grow(&self, s: &mut dyn Sink, i: usize) {
        match self {
            Family::K2Inf => hubs_level(s, i, &["x".into(), "y".into()]),
            Family::KmInf { m } => {
                let hubs: Vec<String> = (0..*m).map(|j| format!("h{j}")).collect();
                hubs_level(s, i, &hubs)
            }
            Family::DominatedRay => {
                if i == 0 {
                    s.edge("hub", "v0");
                } else {
                    s.edge(&format!("v{}", i - 1), &format!("v{i}"));
                    s.edge("hub", &format!("v{i}"));
                }
                s.frontier(vec!["hub".into(), format!("v{i}")]);
            }
            Family::RayStar => {
                let mut f = vec!["c".to_string()];
                if i == 0 {
                    s.vertex("c");
                } else {
                    for j in 1..i {
                        let len = i - j + 1;
                        s.edge(&format!("r{j}_{}", len - 1), &format!("r{j}_{len}"));
                        f.push(format!("r{j}_{len}"));
                    }
                    s.edge("c", &format!("r{i}_1"));
                    f.push(format!("r{i}_1"));
                }
                s.frontier(f);
            }
            Family::Fig4 => {
                if i == 0 {
                    s.vertex("u");
                    s.vertex("t");
                } else {
                    let j = i - 1;
                    s.edge("u", &format!("a{j}"));
                    s.edge("t", &format!("b{j}"));
                    s.edge("u", &format!("c{j}"));
                    s.edge("t", &format!("c{j}"));
                }
                s.frontier(vec!["u".into(), "t".into()]);
            }
            Family::Fig5 => {
                if i == 0 {
                    s.vertex("v0");
                } else {
                    s.edge(&format!("v{}", i - 1), &format!("v{i}"));
                }
                for j in 0..=i {
                    s.edge(&format!("v{j}"), &format!("l{j}_{}", i - j));
                }
                s.frontier((0..=i).map(|j| format!("v{j}")).collect());
            }
            Family::CritChain => {
                s.vertex(&format!("a{i}"));
                for l in 0..=i {
                    for a in 0..=i {
                        s.edge(&format!("a{a}"), &format!("b{i}_{l}"));
                    }
                }
                for k in 0..i {
                    for a in 0..=k {
                        s.edge(&format!("a{a}"), &format!("b{k}_{i}"));
                    }
                }
                s.frontier((0..=i).map(|a| format!("a{a}")).collect());
            }
            Family::TreeInf => {
                if i == 0 {
                    s.vertex("t");
                } else {
                    for p in s.existing() {
                        let w = tree_weight(&p);
                        if w < i {
                            s.edge(&p, &format!("{p}.{}", i - 1 - w));
                        }
                    }
                }
                let all = s.existing();
                s.frontier(all);
            }
            Family::BinaryFan => {
                if i == 0 {
                    s.edge("x", "b");
                } else {
                    for w in binary_strings(i) {
                        let v = format!("b{w}");
                        s.edge(&format!("b{}", &w[..i - 1]), &v);
                        match fan_parent(&w) {
                            Some(u) => s.edge(&format!("b{u}"), &v),
                            None => s.edge("x", &v),
                        }
                    }
                }
                let all = s.existing();
                s.frontier(all);
            }
            Family::BinaryFlower => {
                if i == 0 {
                    s.vertex("r");
                } else {
                    for w in binary_strings(i) {
                        let v = format!("r{w}");
                        s.edge(&format!("r{}", &w[..i - 1]), &v);
                        s.edge("r", &v);
                    }
                }
                let all = s.existing();
                s.frontier(all);
            }
            Family::Fig16 => {
                s.vertex(&format!("u{i}"));
                for k in 0..i {
                    let w = format!("w{k}_{}", i - 1 - k);
                    s.edge(&format!("u{k}"), &w);
                    s.edge(&w, &format!("u{}", k + 1));
                }
                s.frontier((0..=i).map(|k| format!("u{k}")).collect());
            }
            Family::Fig17 => fig17_level(s, i),
            Family::GridK2 => grid_k2_level(s, i),
            Family::Ray => {
                if i == 0 {
                    s.vertex("v0");
                } else {
                    s.edge(&format!("v{}", i - 1), &format!("v{i}"));
                }
                s.frontier(vec![format!("v{i}")]);
            }
            Family::DoubleRay => {
                if i == 0 {
                    s.vertex("v0");
                    s.frontier(vec!["v0".into()]);
                } else {
                    s.edge(&dr_name(i as i64 - 1), &dr_name(i as i64));
                    s.edge(&dr_name(1 - i as i64), &dr_name(-(i as i64)));
                    s.frontier(vec![dr_name(i as i64), dr_name(-(i as i64))]);
                }
            }
            Family::Grid => {
                let mut f = Vec::new();
                for a in 0..=i {
                    for b in 0..=i {
                        if a.max(b) == i {
                            s.vertex(&format!("p{a}_{b}"));
                            f.push(format!("p{a}_{b}"));
                        }
                    }
                }
                for a in 0..=i {
                    for b in 0..=i {
                        if a.max(b) == i {
                            if a > 0 {
                                s.edge(&format!("p{}_{b}", a - 1), &format!("p{a}_{b}"));
                            }
                            if b > 0 {
                                s.edge(&format!("p{a}_{}", b - 1), &format!("p{a}_{b}"));
                            }
                        }
                    }
                }
                s.frontier(f);
            }
        }
    }

    /// Ends visible up to level `n`, with rays long enough to leave level n.
    pub fn ends(&self, n: usize) -> Vec<EndSpec> {
        let len = 3 * n + 6;
        let undominated = |id: &str, ray: Vec<String>| EndSpec {
            id: id.to_string(),
            ray,
            dominators: Vec::new(),
            dominators_unbounded: false,
        };
        match self {
            Family::K2Inf | Family::KmInf { .. } | Family::Fig4 => Vec::new(),
            Family::DominatedRay => vec![EndSpec {
                id: "omega".into(),
                ray: (0..len).map(|i| format!("v{i}")).collect(),
                dominators: vec!["hub".into()],
                dominators_unbounded: false,
            }],
            Family::RayStar => (1..=n)
                .map(|j| undominated(&format!("omega{j}"), (1..len).map(|l| format!("r{j}_{l}")).collect()))
                .collect(),
            Family::Fig5 | Family::Ray => {
                vec![undominated("omega", (0..len).map(|i| format!("v{i}")).collect())]
            }
            Family::CritChain => {
                let mut ray = vec!["a0".to_string()];
                for j in 1..len {
                    ray.push(format!("b{j}_0"));
                    ray.push(format!("a{j}"));
                }
                vec![EndSpec {
                    id: "omega".into(),
                    ray,
                    dominators: (0..=n).map(|a| format!("a{a}")).collect(),
                    dominators_unbounded: true,
                }]
            }
            Family::TreeInf => ["t+0", "t+1", "t.0+1", "t.1+0"]
                .iter()
                .map(|spec| {
                    let (start, d) = spec.split_once('+').expect("sample spec");
                    let mut ray = vec![start.to_string()];
                    for _ in 0..len {
                        let next = format!("{}.{d}", ray.last().expect("nonempty"));
                        ray.push(next);
                    }
                    undominated(&format!("end:{spec}"), ray)
                })
                .collect(),
            Family::BinaryFan => binary_end_sample()
                .into_iter()
                .map(|(w, d)| {
                    let dominators = if w.is_empty() {
                        vec!["x".to_string()]
                    } else {
                        vec![format!("b{}", &w[..w.len() - 1])]
                    };
                    EndSpec {
                        id: format!("end:b{w}+{d}"),
                        ray: (0..len).map(|k| format!("b{w}{}", d.to_string().repeat(k))).collect(),
                        dominators,
                        dominators_unbounded: false,
                    }
                })
                .collect(),
            Family::BinaryFlower => binary_end_sample()
                .into_iter()
                .map(|(w, d)| EndSpec {
                    id: format!("end:r{w}+{d}"),
                    ray: (0..len).map(|k| format!("r{w}{}", d.to_string().repeat(k))).collect(),
                    dominators: vec!["r".into()],
                    dominators_unbounded: false,
                })
                .collect(),
            Family::Fig16 => {
                let mut ray = vec!["u0".to_string()];
                for k in 0..len {
                    ray.push(format!("w{k}_0"));
                    ray.push(format!("u{}", k + 1));
                }
                vec![undominated("omega", ray)]
            }
            Family::Fig17 => fig17_ends(len),
            Family::GridK2 => {
                let mut ray = vec!["g0_0".to_string()];
                for i in 0..len {
                    ray.push(format!("w0_{i}_0"));
                    ray.push(format!("g0_{}", i + 1));
                }
                vec![undominated("omega", ray)]
            }
            Family::DoubleRay => vec![
                undominated("omega_minus", (0..len as i64).map(|i| dr_name(-i)).collect()),
                undominated("omega_plus", (0..len as i64).map(dr_name).collect()),
            ],
            Family::Grid => vec![undominated(
                "omega",
                (0..len).map(|a| format!("p{a}_0")).collect(),
            )],
        }
    }

    /// Critical vertex sets whose members can exist by level `n`; `present`
    /// lists the names existing at n (used by the families with one set per vertex).
    pub fn crit(&self, n: usize, present: &[String]) -> Vec<Vec<String>> {
        match self {
            Family::K2Inf => vec![vec!["x".into(), "y".into()]],
            Family::KmInf { m } => vec![(0..*m).map(|j| format!("h{j}")).collect()],
            Family::RayStar => vec![vec!["c".into()]],
            Family::Fig4 => vec![vec!["u".into()], vec!["t".into()], vec!["u".into(), "t".into()]],
            Family::Fig5 => (0..=n).map(|j| vec![format!("v{j}")]).collect(),
            Family::CritChain => (0..=n)
                .map(|k| (0..=k).map(|a| format!("a{a}")).collect())
                .collect(),
            Family::TreeInf => present.iter().map(|v| vec![v.clone()]).collect(),
            Family::Fig16 => (0..n)
                .map(|k| vec![format!("u{k}"), format!("u{}", k + 1)])
                .collect(),
            Family::Fig17 | Family::GridK2 => heavy_pairs(self, n),
            Family::DominatedRay
            | Family::BinaryFan
            | Family::BinaryFlower
            | Family::Ray
            | Family::DoubleRay
            | Family::Grid => Vec::new(),
        }
    }

    /// Non-trivial ∼-classes (at least two members among vertices and ends).
    pub fn sim_classes(&self, n: usize, present: &[String]) -> Vec<ClassSpec> {
        let ends = |f: &Family| f.ends(n).into_iter().map(|e| e.id).collect::<Vec<_>>();
        let matching = |pred: &dyn Fn(&str) -> bool| -> Vec<String> {
            present.iter().filter(|v| pred(v)).cloned().collect()
        };
        match self {
            Family::K2Inf => vec![class(&["x", "y"], &[])],
            Family::KmInf { m } => vec![ClassSpec {
                vertices: (0..*m).map(|j| format!("h{j}")).collect(),
                ends: Vec::new(),
            }],
            Family::Fig4 => vec![class(&["u", "t"], &[])],
            Family::DominatedRay => vec![class(&["hub"], &["omega"])],
            Family::CritChain => vec![ClassSpec {
                vertices: matching(&|v| v.starts_with('a')),
                ends: vec!["omega".into()],
            }],
            Family::BinaryFan => vec![ClassSpec {
                vertices: present.to_vec(),
                ends: ends(self),
            }],
            Family::BinaryFlower => vec![ClassSpec {
                vertices: vec!["r".into()],
                ends: ends(self),
            }],
            Family::Fig16 => vec![ClassSpec {
                vertices: matching(&|v| v.starts_with('u')),
                ends: vec!["omega".into()],
            }],
            Family::Fig17 => vec![ClassSpec {
                vertices: matching(&|v| v.starts_with('d')),
                ends: ends(self),
            }],
            Family::GridK2 => vec![ClassSpec {
                vertices: matching(&|v| v.starts_with('g')),
                ends: vec!["omega".into()],
            }],
            Family::RayStar
            | Family::Fig5
            | Family::TreeInf
            | Family::Ray
            | Family::DoubleRay
            | Family::Grid => Vec::new(),
        }
    }

    /// Vertices of infinite degree among `present`.
    pub fn infinite_degree(&self, present: &[String]) -> Vec<String> {
        let keep = |pred: &dyn Fn(&str) -> bool| -> Vec<String> {
            present.iter().filter(|v| pred(v)).cloned().collect()
        };
        match self {
            Family::K2Inf => keep(&|v| v == "x" || v == "y"),
            Family::KmInf { .. } => keep(&|v| v.starts_with('h')),
            Family::DominatedRay => keep(&|v| v == "hub"),
            Family::RayStar => keep(&|v| v == "c"),
            Family::Fig4 => keep(&|v| v == "u" || v == "t"),
            Family::Fig5 => keep(&|v| v.starts_with('v')),
            Family::CritChain => keep(&|v| v.starts_with('a')),
            Family::TreeInf | Family::BinaryFan => present.to_vec(),
            Family::BinaryFlower => keep(&|v| v == "r"),
            Family::Fig16 => keep(&|v| v.starts_with('u')),
            Family::Fig17 => keep(&|v| v.starts_with('d')),
            Family::GridK2 => keep(&|v| v.starts_with('g')),
            Family::Ray | Family::DoubleRay | Family::Grid => Vec::new(),
        }
    }

    /// The i-th member of an edge-disjoint a–b path family. Vertices created
    /// after level `cap` may be omitted (only families with exponentially long
    /// paths use this).
    pub fn path(&self, a: &str, b: &str, i: usize, cap: usize) -> Option<Vec<String>> {
        if a == b {
            return None;
        }
        let two_path = |hubs: &[&str], mid: String| -> Option<Vec<String>> {
            (hubs.contains(&a) && hubs.contains(&b)).then(|| vec![a.to_string(), mid, b.to_string()])
        };
        match self {
            Family::K2Inf => two_path(&["x", "y"], format!("u{i}")),
            Family::KmInf { m } => {
                let hubs: Vec<String> = (0..*m).map(|j| format!("h{j}")).collect();
                let refs: Vec<&str> = hubs.iter().map(String::as_str).collect();
                two_path(&refs, format!("u{i}"))
            }
            Family::Fig4 => two_path(&["u", "t"], format!("c{i}")),
            Family::CritChain => {
                let p = index_of(a, 'a')?;
                let q = index_of(b, 'a')?;
                let top = p.max(q);
                Some(vec![a.to_string(), format!("b{top}_{i}"), b.to_string()])
            }
            Family::Fig16 => {
                let p = index_of(a, 'u')?;
                let q = index_of(b, 'u')?;
                let (lo, hi) = (p.min(q), p.max(q));
                let mut path = vec![format!("u{lo}")];
                for k in lo..hi {
                    path.push(format!("w{k}_{i}"));
                    path.push(format!("u{}", k + 1));
                }
                if p > q {
                    path.reverse();
                }
                Some(path)
            }
            Family::BinaryFan => {
                let wa = a.strip_prefix('b').filter(|w| w.chars().all(|c| c == '0' || c == '1'))?;
                let wc = b.strip_prefix('b').filter(|w| w.chars().all(|c| c == '0' || c == '1'))?;
                let depth = wa.len().max(wc.len()) + 1 + i;
                let (lo, hi, rev) = if inorder_cmp(wa, wc) == Ordering::Less {
                    (wa, wc, false)
                } else {
                    (wc, wa, true)
                };
                let mut seq = Vec::new();
                inorder_between(String::new(), depth.min(cap.max(lo.len().max(hi.len()))), lo, hi, &mut seq);
                let mut path: Vec<String> = seq.into_iter().map(|w| format!("b{w}")).collect();
                if rev {
                    path.reverse();
                }
                Some(path)
            }
            _ => None,
        }
    }
}

fn class(vs: &[&str], es: &[&str]) -> ClassSpec {
    ClassSpec {
        vertices: vs.iter().map(|s| s.to_string()).collect(),
        ends: es.iter().map(|s| s.to_string()).collect(),
    }
}

fn hubs_level(s: &mut dyn Sink, i: usize, hubs: &[String]) {
    if i == 0 {
        for h in hubs {
            s.vertex(h);
        }
    } else {
        let u = format!("u{}", i - 1);
        for h in hubs {
            s.edge(h, &u);
        }
    }
    s.frontier(hubs.to_vec());
}

fn index_of(name: &str, prefix: char) -> Option<usize> {
    name.strip_prefix(prefix)?.parse().ok()
}

fn dr_name(i: i64) -> String {
    format!("v{i}")
}

/// Level at which a tree vertex appears: its length plus the sum of its entries.
fn tree_weight(name: &str) -> usize {
    name.split('.').skip(1).map(|d| 1 + d.parse::<usize>().expect("tree digit")).sum()
}

/// Binary strings of length `len` in lexicographic order.
fn binary_strings(len: usize) -> Vec<String> {
    (0..1u64 << len)
        .map(|x| format!("{x:0len$b}"))
        .collect()
}

/// For w = u 0 1^k or w = u 1 0^k (k ≥ 1) returns u; None for constant strings.
fn fan_parent(w: &str) -> Option<&str> {
    let last = w.chars().last()?;
    let run = w.chars().rev().take_while(|&c| c == last).count();
    if run == w.len() {
        None
    } else {
        Some(&w[..w.len() - run - 1])
    }
}

/// Canonical (w, d) for eventually-constant binary rays with |w| ≤ 2.
fn binary_end_sample() -> Vec<(String, char)> {
    let mut out = Vec::new();
    for len in 0..=2 {
        let ws: Vec<String> = if len == 0 { vec![String::new()] } else { binary_strings(len) };
        for w in ws {
            for d in ['0', '1'] {
                if w.chars().last().map_or(true, |c| c != d) {
                    out.push((w.clone(), d));
                }
            }
        }
    }
    out
}

/// In-order comparison of binary-tree positions (left subtree < node < right subtree).
pub(crate) fn inorder_cmp(a: &str, b: &str) -> Ordering {
    let ka: Vec<u8> = a.bytes().chain(std::iter::once(b'1')).collect();
    let kb: Vec<u8> = b.bytes().chain(std::iter::once(b'1')).collect();
    let len = ka.len().max(kb.len());
    for i in 0..len {
        let x = ka.get(i).copied().unwrap_or(b'0');
        let y = kb.get(i).copied().unwrap_or(b'0');
        if x != y {
            return x.cmp(&y);
        }
    }
    Ordering::Equal
}

/// Appends the in-order traversal of the depth-`depth` subtree at `node`,
/// keeping only positions between `lo` and `hi` inclusive.
fn inorder_between(node: String, depth: usize, lo: &str, hi: &str, out: &mut Vec<String>) {
    // Left subtree lies below node, right subtree above it; prune accordingly.
    let below = node.len() < depth;
    if below && inorder_cmp(&node, lo) == Ordering::Greater {
        inorder_between(format!("{node}0"), depth, lo, hi, out);
    }
    if inorder_cmp(&node, lo) != Ordering::Less && inorder_cmp(&node, hi) != Ordering::Greater {
        out.push(node.clone());
    }
    if below && inorder_cmp(&node, hi) == Ordering::Less {
        inorder_between(format!("{node}1"), depth, lo, hi, out);
    }
}

fn heavy_pairs(f: &Family, n: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    match f {
        Family::GridK2 => {
            for k in 0..4 {
                for i in 0..n {
                    out.push(vec![format!("g{k}_{i}"), format!("g{k}_{}", i + 1)]);
                }
            }
            out.push(vec!["g1_0".into(), "g2_0".into()]);
        }
        Family::Fig17 => {
            for k in 0..=n {
                let r = (n - k) as i64;
                for j in -r..r {
                    out.push(vec![format!("d{k}_{j}"), format!("d{k}_{}", j + 1)]);
                }
            }
        }
        _ => {}
    }
    out
}

/// Level i of the heavy-double-ray stand-in: D_k has vertices d{k}_j for
/// |j| ≤ i − k; consecutive vertices gain one witness per level; ladder edges
/// join d{k}_j to d{k+1}_{−j} for j ≥ 1.
fn fig17_level(s: &mut dyn Sink, i: usize) {
    let i = i as i64;
    s.vertex(&format!("d{i}_0"));
    for k in 0..i {
        let r = i - k;
        s.vertex(&format!("d{k}_{r}"));
        s.vertex(&format!("d{k}_{}", -r));
    }
    for k in 0..=i {
        let r = i - k;
        for j in -r..r {
            let born = k + j.abs().max((j + 1).abs());
            let w = format!("w{k}_{j}_{}", i - born);
            s.edge(&format!("d{k}_{j}"), &w);
            s.edge(&w, &format!("d{k}_{}", j + 1));
        }
    }
    for k in 0..i {
        let j = i - k - 1;
        if j >= 1 {
            s.edge(&format!("d{k}_{j}"), &format!("d{}_{}", k + 1, -j));
        }
    }
    let mut f = Vec::new();
    for k in 0..=i {
        let r = i - k;
        for j in -r..=r {
            f.push(format!("d{k}_{j}"));
        }
    }
    s.frontier(f);
}

fn fig17_ends(len: usize) -> Vec<EndSpec> {
    let heavy_walk = |k: usize, from: i64, step: i64, count: usize| -> Vec<String> {
        let mut ray = vec![format!("d{k}_{from}")];
        let mut j = from;
        for _ in 0..count {
            let lower = if step > 0 { j } else { j - 1 };
            ray.push(format!("w{k}_{lower}_0"));
            j += step;
            ray.push(format!("d{k}_{j}"));
        }
        ray
    };
    let undominated = |id: String, ray: Vec<String>| EndSpec {
        id,
        ray,
        dominators: Vec::new(),
        dominators_unbounded: false,
    };
    let mut out = vec![undominated("omega_0".into(), heavy_walk(0, 0, -1, len))];
    for k in 0..3 {
        out.push(undominated(format!("omega_{}", k + 1), heavy_walk(k, 0, 1, len)));
    }
    // Limit end: d{k}_1 → ladder → d{k+1}_{-1} → heavy walk to d{k+1}_1 → …
    let mut ray = vec!["d0_0".to_string(), "w0_0_0".to_string(), "d0_1".to_string()];
    for k in 1..len {
        let walk = heavy_walk(k, -1, 1, 2);
        ray.extend(walk);
    }
    out.push(undominated("omega".into(), ray));
    out
}

/// Level i of the heavy 4 × ℕ grid: ray links are heavy, rungs simple except g1_0–g2_0.
fn grid_k2_level(s: &mut dyn Sink, i: usize) {
    for k in 0..4 {
        s.vertex(&format!("g{k}_{i}"));
    }
    for k in 0..3 {
        if !(i == 0 && k == 1) {
            s.edge(&format!("g{k}_{i}"), &format!("g{}_{i}", k + 1));
        }
    }
    // The heavy rung gains one witness per level.
    let w = format!("wr_{i}");
    s.edge("g1_0", &w);
    s.edge(&w, "g2_0");
    for k in 0..4 {
        for j in 0..i {
            let w = format!("w{k}_{j}_{}", i - 1 - j);
            s.edge(&format!("g{k}_{j}"), &w);
            s.edge(&w, &format!("g{k}_{}", j + 1));
        }
    }
    s.frontier(
        (0..4)
            .flat_map(|k| (0..=i).map(move |j| format!("g{k}_{j}")))
            .collect(),
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fan_parent_cases() {
        assert_eq!(fan_parent("011"), Some(""));
        assert_eq!(fan_parent("0110"), Some("01"));
        assert_eq!(fan_parent("000"), None);
        assert_eq!(fan_parent("10"), Some(""));
    }

    #[test]
    fn inorder_matches_tree_traversal() {
        let mut all = Vec::new();
        inorder_between(String::new(), 3, "000", "111", &mut all);
        assert_eq!(all.len(), 15);
        for w in all.windows(2) {
            assert_eq!(inorder_cmp(&w[0], &w[1]), Ordering::Less);
        }
        assert_eq!(all[0], "000");
        assert_eq!(all[7], "");
    }

    #[test]
    fn tree_weights() {
        assert_eq!(tree_weight("t"), 0);
        assert_eq!(tree_weight("t.0"), 1);
        assert_eq!(tree_weight("t.2.0"), 4);
    }

    #[test]
    fn parse_rejects_unknown_and_bad_params() {
        assert!(Family::parse("nope", &BTreeMap::new()).is_err());
        let m2 = BTreeMap::from([("m".to_string(), 2)]);
        assert!(Family::parse("kminf", &m2).is_err());
        assert_eq!(Family::all().len(), 16);
    }
}
