//! Command-line driver: loads a presentation, runs one query, renders a report.
//!
//! Every report is a JSON object with `command`, `provenance` and `result`;
//! keys are sorted so identical inputs give byte-identical output.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::PathBuf;
use tanglekit::invsys::{
    canonical_delta, check_compatibility, delta_join, delta_member, f_census, f_level, Compatibility, Elem,
    FPoint, FSystem, GammaIndex, GammaSystem, InverseSystem, OpenPolicy,
};
use tanglekit::multigraph::{components, cut_condition, pack_trees, Multigraph, VertexId, VertexSet};
use tanglekit::packing::{aux_graph, classify_gaps, pack_pipeline, vstar, AuxEdge, GapKind};
use tanglekit::presentation::{Family, Presentation};
use tanglekit::structure::{
    canonical_chain, component_report, compactness_predicates, crit_of, directions, dominates, enumerate_crit,
    not_finitely_separable, quotient_points, strongly_linked, Domination, Linkage, Point, Separability, TriState,
    LINK_BOUND,
};
use tanglekit::tangles::{enumerate_tangles_finite, in_s_prime, Membership, Separation, StarSelector};

/// Depth cap used when TANGLEKIT_DEPTH_CAP is unset or unparsable.
pub const DEFAULT_DEPTH_CAP: usize = 60;
/// Largest size bound accepted for critical-set enumeration.
pub const SIZE_GUARD: usize = 6;
/// Largest case count accepted by `check`.
pub const CASE_GUARD: usize = 100_000;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Json,
    Dot,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// List the catalog families.
    Families,
    /// The level graph G_n.
    Truncate,
    /// Closed and open components of G_n − X.
    Components,
    /// Critical vertex sets, within --x or enumerated up to --size.
    Crit,
    /// Direction threads and certified ends; domination of --end by --a.
    Ends,
    /// Points of 𝔉 at the chain top (or --x) and the 𝔉-threads.
    Fpoints,
    /// Γ index of --x, its space, and the join with --y.
    Gamma,
    /// Tangles of the level graph of order --k.
    Tangles,
    /// Membership in S′ of the separation (--x, components of --side).
    Sprime,
    /// Relations between --a and --b, or the quotient points.
    Sim,
    /// Auxiliary edges and their components.
    Aux,
    /// The order V* between --a and --b and its gaps.
    Vstar,
    /// Packing thread of --k trees over --levels levels.
    Pack,
    /// Compactness predicates.
    Predicates,
    /// Run a named invariant sweep.
    Check {
        /// One of: nash-williams, gamma-join, f-bonds, components.
        sweep: String,
        /// Number of sampled cases.
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Families => "families",
            Command::Truncate => "truncate",
            Command::Components => "components",
            Command::Crit => "crit",
            Command::Ends => "ends",
            Command::Fpoints => "fpoints",
            Command::Gamma => "gamma",
            Command::Tangles => "tangles",
            Command::Sprime => "sprime",
            Command::Sim => "sim",
            Command::Aux => "aux",
            Command::Vstar => "vstar",
            Command::Pack => "pack",
            Command::Predicates => "predicates",
            Command::Check { .. } => "check",
        }
    }

    fn graph_shaped(&self) -> bool {
        matches!(self, Command::Truncate | Command::Gamma | Command::Aux | Command::Pack)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Args)]
pub struct RunConfig {
    /// Catalog family name.
    #[arg(long, global = true)]
    pub family: Option<String>,
    /// Family parameter as key=value; repeatable.
    #[arg(long = "param", global = true)]
    pub params: Vec<String>,
    /// Presentation JSON file.
    #[arg(long, global = true)]
    pub presentation: Option<PathBuf>,
    /// Level n (or chain depth d).
    #[arg(long, global = true, default_value_t = 8)]
    pub depth: usize,
    /// Witness threshold k (tree count for pack, order for tangles).
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Size bound for critical-set enumeration.
    #[arg(long, global = true, default_value_t = 3)]
    pub size: usize,
    /// Number of levels for pack.
    #[arg(long, global = true, default_value_t = 5)]
    pub levels: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for sampled sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Separator X, as comma-separated vertex names.
    #[arg(long, global = true, value_delimiter = ',')]
    pub x: Vec<String>,
    /// Second separator for gamma joins.
    #[arg(long, global = true, value_delimiter = ',')]
    pub y: Vec<String>,
    /// Vertices whose components form the B side for sprime.
    #[arg(long, global = true, value_delimiter = ',')]
    pub side: Vec<String>,
    /// First point (vertex name, or end id for sim).
    #[arg(long, global = true)]
    pub a: Option<String>,
    /// Second point.
    #[arg(long, global = true)]
    pub b: Option<String>,
    /// End id for domination queries.
    #[arg(long, global = true)]
    pub end: Option<String>,
    /// Print the output schema of the command instead of running it.
    #[arg(long, global = true)]
    pub schema: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            family: None,
            params: Vec::new(),
            presentation: None,
            depth: 8,
            k: None,
            size: 3,
            levels: 5,
            format: Format::Json,
            seed: 0,
            x: Vec::new(),
            y: Vec::new(),
            side: Vec::new(),
            a: None,
            b: None,
            end: None,
            schema: false,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tanglekit", version, about = "Ends, critical sets, tangles and tree packings of presented infinite graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
}

/// Exit code and the emitted report (or error message when the code is 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub output: String,
}

type Res<T> = Result<T, String>;

/// Result payload before rendering.
struct Report {
    level: usize,
    k: Option<usize>,
    size: Option<usize>,
    certified: bool,
    result: Value,
    /// The answer is Unknown at this level.
    unknown: bool,
    /// Invariant sweep found a counterexample.
    failed: bool,
    dot: Option<String>,
}

impl Report {
    fn new(level: usize, certified: bool, result: Value) -> Self {
        Report { level, k: None, size: None, certified, result, unknown: false, failed: false, dot: None }
    }
}

pub fn depth_cap() -> usize {
    std::env::var("TANGLEKIT_DEPTH_CAP")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_DEPTH_CAP)
}

pub fn run(command: &Command, config: &RunConfig) -> Outcome {
    if config.schema {
        return Outcome { code: EXIT_OK, output: pretty(&schema(command)) };
    }
    match execute(command, config) {
        Ok(report) => {
            let code = if report.failed {
                EXIT_ERROR
            } else if report.unknown {
                EXIT_UNKNOWN
            } else {
                EXIT_OK
            };
            match render(command, config, report) {
                Ok(output) => Outcome { code, output },
                Err(e) => Outcome { code: EXIT_ERROR, output: format!("error: {e}\n") },
            }
        }
        Err(e) => Outcome { code: EXIT_ERROR, output: format!("error: {e}\n") },
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn validate(command: &Command, config: &RunConfig) -> Res<()> {
    let cap = depth_cap();
    if config.depth > cap {
        return Err(format!("depth {} exceeds TANGLEKIT_DEPTH_CAP={cap}", config.depth));
    }
    if config.levels == 0 || config.levels > cap {
        return Err(format!("levels must lie in 1..={cap}"));
    }
    if config.k == Some(0) {
        return Err("k must be positive".into());
    }
    if config.size > SIZE_GUARD {
        return Err(format!("size bound {} exceeds {SIZE_GUARD}", config.size));
    }
    if config.format == Format::Dot && !command.graph_shaped() {
        return Err(format!("dot output is not available for {}", command.name()));
    }
    if let Command::Check { cases, .. } = command {
        if *cases > CASE_GUARD {
            return Err(format!("cases {cases} exceeds {CASE_GUARD}"));
        }
    }
    Ok(())
}

pub fn load_presentation(config: &RunConfig) -> Res<Presentation> {
    match (&config.family, &config.presentation) {
        (Some(_), Some(_)) => Err("give either --family or --presentation, not both".into()),
        (None, None) => Err("one of --family or --presentation is required".into()),
        (Some(name), None) => {
            let mut params = BTreeMap::new();
            for kv in &config.params {
                let (key, val) = kv.split_once('=').ok_or_else(|| format!("parameter {kv:?} is not key=value"))?;
                let val: i64 = val.trim().parse().map_err(|_| format!("parameter {key} is not an integer"))?;
                params.insert(key.trim().to_string(), val);
            }
            Presentation::named(name, &params).map_err(|e| e.to_string())
        }
        (None, Some(path)) => {
            if !config.params.is_empty() {
                return Err("--param applies to --family only".into());
            }
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let value: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            Presentation::from_json(&value).map_err(|e| e.to_string())
        }
    }
}

fn vertex(p: &Presentation, token: &str, n: usize) -> Res<VertexId> {
    if let Some(v) = p.resolve(token, n) {
        return Ok(v);
    }
    match token.parse::<VertexId>() {
        Ok(v) if p.catalog_family().is_none() && p.truncate(n).graph.has_vertex(v) => Ok(v),
        _ => Err(format!("unknown vertex {token} at level {n}")),
    }
}

fn vertex_set(p: &Presentation, tokens: &[String], n: usize) -> Res<VertexSet> {
    tokens.iter().filter(|t| !t.is_empty()).map(|t| vertex(p, t, n)).collect()
}

/// A vertex if the token names one, else an end id.
fn point(p: &Presentation, token: &str, n: usize) -> Point {
    match vertex(p, token, n) {
        Ok(v) => Point::Vertex(v),
        Err(_) => Point::End(token.to_string()),
    }
}

fn names(p: &Presentation, set: &VertexSet) -> Value {
    json!(p.names_of(set))
}

fn point_json(p: &Presentation, pt: &Point) -> Value {
    match pt {
        Point::Vertex(v) => json!({ "vertex": p.name(*v) }),
        Point::End(e) => json!({ "end": e }),
    }
}

fn required<'a>(opt: &'a Option<String>, flag: &str) -> Res<&'a str> {
    opt.as_deref().ok_or_else(|| format!("--{flag} is required"))
}

fn execute(command: &Command, config: &RunConfig) -> Res<Report> {
    validate(command, config)?;
    if let Command::Families = command {
        return Ok(families());
    }
    if let Command::Check { sweep, cases } = command {
        return check(sweep, *cases, config);
    }
    let p = load_presentation(config)?;
    let n = config.depth;
    let certified = p.certificate(n).is_some();
    let k = config.k.unwrap_or(match command {
        Command::Pack | Command::Tangles => 2,
        _ => 3,
    });
    let report = match command {
        Command::Truncate => truncate(&p, n)?,
        Command::Components => {
            let x = vertex_set(&p, &config.x, n)?;
            let r = component_report(&p, &x, n).map_err(|e| e.to_string())?;
            let comp = |c: &tanglekit::structure::Comp| {
                json!({ "id": p.name(c.id()), "vertices": names(&p, &c.vertices), "nbhd": names(&p, &c.nbhd) })
            };
            Report::new(
                n,
                certified,
                json!({
                    "separator": names(&p, &x),
                    "closed": r.closed.iter().map(comp).collect::<Vec<_>>(),
                    "open": r.open.iter().map(comp).collect::<Vec<_>>(),
                }),
            )
        }
        Command::Crit => {
            let witnesses = if config.x.is_empty() {
                enumerate_crit(&p, config.size, n, k)
            } else {
                let x = vertex_set(&p, &config.x, n)?;
                crit_of(&p, &x, n, k).map_err(|e| e.to_string())?
            };
            let rows: Vec<Value> = witnesses
                .iter()
                .map(|w| {
                    json!({
                        "y": names(&p, &w.y),
                        "x": names(&p, &w.x),
                        "count": w.count,
                        "evidence": if w.certified { "certified" } else { "witnessed" },
                    })
                })
                .collect();
            let crit: Vec<Value> = witnesses.iter().map(|w| names(&p, &w.y)).collect();
            let mut r = Report::new(n, certified, json!({ "crit": crit, "witnesses": rows }));
            r.k = Some(k);
            if config.x.is_empty() {
                r.size = Some(config.size);
            }
            r
        }
        Command::Ends => ends(&p, n, config)?,
        Command::Fpoints => {
            let census = f_census(&p, n, k).map_err(|e| e.to_string())?;
            let x = if config.x.is_empty() { census.chain_top.clone() } else { vertex_set(&p, &config.x, n)? };
            let level = f_level(&p, &x, n, k).map_err(|e| e.to_string())?;
            let fpt = |pt: &FPoint| match pt {
                FPoint::Principal(c) => json!({ "principal": p.name(*c) }),
                FPoint::Filter(y) => json!({ "filter": names(&p, y) }),
            };
            let threads: Vec<Value> = census
                .threads
                .iter()
                .map(|t| json!(t.points.iter().map(|(_, pt)| fpt(pt)).collect::<Vec<_>>()))
                .collect();
            let mut r = Report::new(
                n,
                certified,
                json!({
                    "level": {
                        "x": names(&p, &level.x),
                        "principals": level.principals.iter().map(|&c| p.name(c)).collect::<Vec<_>>(),
                        "filters": level.filters.iter().map(|y| names(&p, y)).collect::<Vec<_>>(),
                        "pending": level.pending.iter().map(|&c| p.name(c)).collect::<Vec<_>>(),
                    },
                    "chain": canonical_chain(&p, n).iter().map(|x| names(&p, x)).collect::<Vec<_>>(),
                    "threads": threads,
                    "principal_threads": census.principal_threads,
                    "filter_threads": census.filter_threads,
                    "certified_ends": census.certified_ends,
                    "certified_crit": census.certified_crit,
                }),
            );
            r.k = Some(k);
            r
        }
        Command::Gamma => gamma(&p, n, k, config)?,
        Command::Tangles => {
            let g = p.truncate(n).graph.clone();
            let tangles = enumerate_tangles_finite(&g, k, StarSelector::InteriorBelow(k)).map_err(|e| e.to_string())?;
            let rows: Vec<Value> = tangles
                .iter()
                .map(|tau| {
                    json!(tau
                        .iter()
                        .map(|s| json!({ "a": names(&p, &s.a), "b": names(&p, &s.b) }))
                        .collect::<Vec<_>>())
                })
                .collect();
            let mut r = Report::new(n, certified, json!({ "count": rows.len(), "tangles": rows, "forbidden": "interior_below_k" }));
            r.k = Some(k);
            r
        }
        Command::Sprime => {
            let x = vertex_set(&p, &config.x, n)?;
            let report = component_report(&p, &x, n).map_err(|e| e.to_string())?;
            let mut side = VertexSet::new();
            for v in vertex_set(&p, &config.side, n)? {
                let (c, _) = report.containing(v).ok_or_else(|| format!("{} lies in the separator", p.name(v)))?;
                side.insert(c.id());
            }
            let m = in_s_prime(&p, &Separation::new(x.clone(), side.clone()), n, k).map_err(|e| e.to_string())?;
            let mut r = Report::new(
                n,
                certified,
                json!({ "separator": names(&p, &x), "side": names(&p, &side), "membership": m }),
            );
            r.k = Some(k);
            r.unknown = m == Membership::Unknown;
            r
        }
        Command::Sim => sim(&p, n, config)?,
        Command::Aux => {
            let a = aux_graph(&p, n, k);
            let edge = |e: &AuxEdge| match e {
                AuxEdge::End { u, end } => json!({ "kind": "end", "u": p.name(*u), "end": end }),
                AuxEdge::Crit { a, b, x } => {
                    json!({ "kind": "crit", "a": p.name(*a), "b": p.name(*b), "x": names(&p, x) })
                }
            };
            let comps: Vec<Value> = a
                .aux_components()
                .iter()
                .map(|c| json!(c.iter().map(|pt| point_json(&p, pt)).collect::<Vec<_>>()))
                .collect();
            let mut r = Report::new(
                n,
                a.certified,
                json!({ "aux": a.aux.iter().map(edge).collect::<Vec<_>>(), "components": comps, "skeleton": true }),
            );
            r.k = Some(k);
            r.dot = Some(aux_dot(&p, &a.base, &a.aux));
            r
        }
        Command::Vstar => {
            let a = vertex(&p, required(&config.a, "a")?, n)?;
            let b = vertex(&p, required(&config.b, "b")?, n)?;
            let vs = vstar(&p, a, b, n).map_err(|e| e.to_string())?;
            let gaps = classify_gaps(&p, &vs, n);
            let gap_rows: Vec<Value> = gaps
                .iter()
                .map(|g| {
                    let kind = match &g.kind {
                        GapKind::EndGap { end } => json!({ "kind": "end_gap", "end": end }),
                        GapKind::CritGap { x } => json!({ "kind": "crit_gap", "x": names(&p, x) }),
                        GapKind::Unknown => json!({ "kind": "unknown" }),
                    };
                    json!({ "u": p.name(g.u), "t": p.name(g.t), "gap": kind })
                })
                .collect();
            let mut r = Report::new(
                n,
                certified,
                json!({
                    "order": vs.order.iter().map(|&v| p.name(v)).collect::<Vec<_>>(),
                    "thread_sizes": vs.thread.iter().map(Vec::len).collect::<Vec<_>>(),
                    "paths_sampled": vs.paths_sampled,
                    "gaps": gap_rows,
                }),
            );
            r.k = Some(vs.threshold);
            r.unknown = gaps.iter().any(|g| g.kind == GapKind::Unknown);
            r
        }
        Command::Pack => {
            let t = pack_pipeline(&p, k, config.levels).map_err(|e| e.to_string())?;
            let mut r = Report::new(t.evaluated_at, p.certificate(t.evaluated_at).is_some(), json!(t));
            r.k = Some(k);
            r.dot = Some(pack_dot(&p, t.evaluated_at, &t.limit_assignment));
            r
        }
        Command::Predicates => {
            let c = compactness_predicates(&p, n);
            let mut r = Report::new(n, c.certified, json!(c));
            r.unknown = c.ends_locally_compact == TriState::Unknown || c.one_point_omega == TriState::Unknown;
            r
        }
        Command::Families | Command::Check { .. } => unreachable!("handled above"),
    };
    Ok(report)
}

fn families() -> Report {
    let rows: Vec<Value> = Family::all()
        .iter()
        .map(|f| {
            json!({
                "name": f.name(),
                "params": f.params(),
                "description": f.describe(),
                "stand_in": f.stand_in(),
                "ends_complete": f.ends_complete(),
            })
        })
        .collect();
    Report::new(0, true, json!({ "families": rows }))
}

fn truncate(p: &Presentation, n: usize) -> Res<Report> {
    let lg = p.truncate(n);
    let labels: BTreeMap<String, String> = lg.vertices().iter().map(|&v| (v.to_string(), p.name(v))).collect();
    let born: BTreeMap<String, usize> = lg.born.iter().map(|(&v, &b)| (p.name(v), b)).collect();
    let mut r = Report::new(
        n,
        p.certificate(n).is_some(),
        json!({
            "graph": lg.graph.to_json(),
            "names": labels,
            "frontier": names(p, &lg.frontier),
            "born": born,
        }),
    );
    r.dot = Some(lg.graph.to_dot(|v| p.name(v)));
    Ok(r)
}

fn ends(p: &Presentation, n: usize, config: &RunConfig) -> Res<Report> {
    let cert = p.certificate(n);
    let dirs: Vec<Value> = directions(p, n)
        .iter()
        .map(|d| {
            json!({
                "id": d.id,
                "thread": d.thread.iter().map(|&c| p.name(c)).collect::<Vec<_>>(),
                "matched": d.matched,
                "dominators": d.dominators.as_ref().map(|s| names(p, s)),
            })
        })
        .collect();
    let certified_ends: Option<Vec<Value>> = cert.as_ref().map(|c| {
        c.ends
            .iter()
            .map(|e| {
                json!({
                    "id": e.id,
                    "ray": e.ray.iter().map(|&v| p.name(v)).collect::<Vec<_>>(),
                    "dominators": names(p, &e.dominators),
                    "dominators_unbounded": e.dominators_unbounded,
                })
            })
            .collect()
    });
    let mut result = json!({
        "directions": dirs,
        "certified_ends": certified_ends,
        "ends_complete": cert.as_ref().map(|c| c.ends_complete),
    });
    let mut unknown = false;
    if let Some(end) = &config.end {
        let u = vertex(p, required(&config.a, "a")?, n)?;
        let d = dominates(p, u, end, n).map_err(|e| e.to_string())?;
        unknown = d == Domination::Unknown;
        let d = match d {
            Domination::Witnessed { fan, certified } => json!({ "result": "witnessed", "fan": fan, "certified": certified }),
            Domination::Refuted { separator, certified } => {
                json!({ "result": "refuted", "separator": names(p, &separator), "certified": certified })
            }
            Domination::Unknown => json!({ "result": "unknown" }),
        };
        result["domination"] = json!({ "u": p.name(u), "end": end, "verdict": d });
    }
    let mut r = Report::new(n, cert.is_some(), result);
    r.unknown = unknown;
    Ok(r)
}

fn gamma(p: &Presentation, n: usize, k: usize, config: &RunConfig) -> Res<Report> {
    let sys = GammaSystem::new(p, n);
    let index_json = |g: &GammaIndex| {
        json!({
            "x": names(p, &g.x),
            "classes": g.classes.iter().map(|c| names(p, c)).collect::<Vec<_>>(),
        })
    };
    let x = vertex_set(p, &config.x, n)?;
    let a = canonical_delta(p, &x, n, k).map_err(|e| e.to_string())?;
    let mut result = json!({
        "index": index_json(&a),
        "delta_member": delta_member(p, &a, n, k).map_err(|e| e.to_string())?,
    });
    let top = if config.y.is_empty() {
        a.clone()
    } else {
        let y = vertex_set(p, &config.y, n)?;
        let b = canonical_delta(p, &y, n, k).map_err(|e| e.to_string())?;
        let gj = sys.gamma_join(&a, &b).map_err(|e| e.to_string())?;
        let dj = delta_join(p, &a, &b, n, k).map_err(|e| e.to_string())?;
        result["other"] = index_json(&b);
        result["gamma_join"] = index_json(&gj);
        result["delta_join"] = index_json(&dj);
        result["delta_join_member"] = json!(delta_member(p, &dj, n, k).map_err(|e| e.to_string())?);
        // Bonds from the join's space down to both inputs, vertex by vertex.
        let space = sys.gamma_space(&gj).map_err(|e| e.to_string())?;
        let mut bonds = Vec::new();
        for &v in space.vertices() {
            let to_a = sys.gamma_bond(&gj, &a, Elem::Vertex(v)).map_err(|e| e.to_string())?;
            let to_b = sys.gamma_bond(&gj, &b, Elem::Vertex(v)).map_err(|e| e.to_string())?;
            bonds.push(json!({
                "from": elem_json(p, &gj, Elem::Vertex(v)),
                "to_index": elem_json(p, &a, to_a),
                "to_other": elem_json(p, &b, to_b),
            }));
        }
        result["bonds"] = json!(bonds);
        gj
    };
    let space = sys.gamma_space(&top).map_err(|e| e.to_string())?;
    result["space"] = space.to_json();
    let mut r = Report::new(n, p.certificate(n).is_some(), result);
    r.k = Some(k);
    r.dot = Some(space.to_dot(|v| p.name(v)));
    Ok(r)
}

/// Separator vertices by name; dummies by the least vertex of their class.
fn elem_json(p: &Presentation, g: &GammaIndex, el: Elem) -> Value {
    match el {
        Elem::Vertex(v) if g.x.contains(&v) => json!({ "vertex": p.name(v) }),
        Elem::Vertex(v) => json!({ "dummy": p.name(v) }),
        Elem::Edge(e) => json!({ "edge": e }),
    }
}

fn sim(p: &Presentation, n: usize, config: &RunConfig) -> Res<Report> {
    let certified = p.certificate(n).is_some();
    let (Some(ta), Some(tb)) = (&config.a, &config.b) else {
        if config.a.is_some() || config.b.is_some() {
            return Err("sim needs both --a and --b, or neither".into());
        }
        let q = quotient_points(p, n).map_err(|e| e.to_string())?;
        let classes: Vec<Value> = q
            .classes
            .iter()
            .map(|c| json!({ "vertices": names(p, &c.vertices), "ends": c.ends }))
            .collect();
        return Ok(Report::new(n, certified, json!({ "quotient": classes, "inner_edges": q.inner_edges })));
    };
    let (a, b) = (point(p, ta, n), point(p, tb, n));
    let sep = not_finitely_separable(p, &a, &b, n, config.k).map_err(|e| e.to_string())?;
    let unknown = sep == Separability::Unknown;
    let sep_json = match &sep {
        Separability::Witnessed { paths, certified } => {
            let paths = if *paths == usize::MAX { Value::Null } else { json!(paths) };
            json!({ "result": "witnessed", "paths": paths, "certified": certified })
        }
        Separability::Separated { cut, side, certified } => {
            json!({ "result": "separated", "cut": cut, "side": names(p, side), "certified": certified })
        }
        Separability::Unknown => json!({ "result": "unknown" }),
    };
    let mut result = json!({ "a": point_json(p, &a), "b": point_json(p, &b), "sim": sep_json });
    if let (Point::Vertex(u), Point::Vertex(v)) = (&a, &b) {
        let link = strongly_linked(p, *u, *v, n, LINK_BOUND).map_err(|e| e.to_string())?;
        result["linked"] = match link {
            Linkage::Witnessed { x, bound } => json!({ "result": "witnessed", "x": names(p, &x), "bound": bound }),
            Linkage::Refuted { separators } => json!({
                "result": "refuted",
                "separators": separators.iter().map(|s| names(p, s)).collect::<Vec<_>>(),
            }),
            Linkage::Unknown => json!({ "result": "unknown" }),
        };
    }
    let mut r = Report::new(n, certified, result);
    r.k = config.k;
    r.unknown = unknown;
    Ok(r)
}

fn aux_dot(p: &Presentation, base: &Multigraph, aux: &[AuxEdge]) -> String {
    let mut out = base.to_dot(|v| p.name(v));
    out.truncate(out.len() - 2);
    let ends: BTreeSet<&String> = aux
        .iter()
        .filter_map(|e| match e {
            AuxEdge::End { end, .. } => Some(end),
            AuxEdge::Crit { .. } => None,
        })
        .collect();
    for end in ends {
        let _ = writeln!(out, "  \"{end}\" [shape=diamond];");
    }
    for e in aux {
        match e {
            AuxEdge::End { u, end } => {
                let _ = writeln!(out, "  n{u} -- \"{end}\" [style=dashed];");
            }
            AuxEdge::Crit { a, b, x } => {
                let _ = writeln!(out, "  n{a} -- n{b} [style=dashed, label=\"{{{}}}\"];", p.names_of(x).join(","));
            }
        }
    }
    out.push_str("}\n");
    out
}

const TREE_COLOURS: [&str; 6] = ["red", "blue", "darkgreen", "orange", "purple", "brown"];

fn pack_dot(p: &Presentation, n: usize, assignment: &BTreeMap<u32, usize>) -> String {
    let lg = p.truncate(n);
    let mut out = String::from("graph G {\n");
    for &v in lg.vertices() {
        let _ = writeln!(out, "  n{v} [label=\"{}\"];", p.name(v));
    }
    for (e, u, v) in lg.graph.edges() {
        match assignment.get(&e) {
            Some(&t) => {
                let colour = TREE_COLOURS[t % TREE_COLOURS.len()];
                let _ = writeln!(out, "  n{u} -- n{v} [label=\"e{e}\", color={colour}];");
            }
            None => {
                let _ = writeln!(out, "  n{u} -- n{v} [label=\"e{e}\", color=gray, style=dotted];");
            }
        }
    }
    out.push_str("}\n");
    out
}

// ---------------------------------------------------------------------------
// Invariant sweeps

/// First failing case and the number of cases run.
struct Sweep {
    cases: usize,
    failure: Option<Value>,
}

/// A random spanning tree plus up to `max_edges` further edges, loops allowed.
fn random_multigraph(rng: &mut ChaCha8Rng, n: u32, max_edges: usize) -> Multigraph {
    let mut g = Multigraph::new();
    for v in 0..n {
        g.add_vertex(v);
        if v > 0 {
            let u = rng.gen_range(0..v);
            g.push_edge(u, v).expect("endpoints exist");
        }
    }
    for _ in 0..rng.gen_range(0..=max_edges) {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        g.push_edge(u, v).expect("endpoints exist");
    }
    g
}

fn check(sweep: &str, cases: usize, config: &RunConfig) -> Res<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (level, certified, outcome) = match sweep {
        "nash-williams" => (0, true, sweep_nash_williams(&mut rng, cases)?),
        "gamma-join" => (0, true, sweep_gamma_join(&mut rng, cases)?),
        "f-bonds" => {
            let p = load_presentation(config)?;
            let k = config.k.unwrap_or(3);
            (config.depth, p.certificate(config.depth).is_some(), sweep_f_bonds(&p, config.depth, k)?)
        }
        "components" => {
            let p = load_presentation(config)?;
            (config.depth, p.certificate(config.depth).is_some(), sweep_components(&p, config.depth, &mut rng, cases)?)
        }
        other => return Err(format!("unknown sweep {other:?}; expected nash-williams, gamma-join, f-bonds or components")),
    };
    let mut r = Report::new(
        level,
        certified,
        json!({
            "sweep": sweep,
            "seed": config.seed,
            "cases": outcome.cases,
            "passed": outcome.failure.is_none(),
            "counterexample": outcome.failure,
        }),
    );
    r.failed = outcome.failure.is_some();
    Ok(r)
}

/// Tree packing exists iff the partition cut condition holds.
fn sweep_nash_williams(rng: &mut ChaCha8Rng, cases: usize) -> Res<Sweep> {
    for i in 0..cases {
        let order = rng.gen_range(1..=5);
        let g = random_multigraph(rng, order, 5);
        for k in 1..=3 {
            let packed = pack_trees(&g, k).map_err(|e| e.to_string())?.is_some();
            let cut = cut_condition(&g, k).map_err(|e| e.to_string())?;
            if packed != cut {
                return Ok(Sweep {
                    cases: i + 1,
                    failure: Some(json!({ "graph": g.to_json(), "k": k, "packed": packed, "cut_condition": cut })),
                });
            }
        }
    }
    Ok(Sweep { cases, failure: None })
}

/// gamma_join of two random indices lies above both.
fn sweep_gamma_join(rng: &mut ChaCha8Rng, cases: usize) -> Res<Sweep> {
    for i in 0..cases {
        let order = rng.gen_range(2..=6);
        let g = random_multigraph(rng, order, 4);
        let p = Presentation::constant(&g);
        let sys = GammaSystem::new(&p, 0);
        let index = |rng: &mut ChaCha8Rng| -> Res<GammaIndex> {
            let x: VertexSet = g.vertices().iter().copied().filter(|_| rng.gen_bool(0.3)).collect();
            let report = sys.report(&x).map_err(|e| e.to_string())?;
            let mut classes: BTreeMap<u8, VertexSet> = BTreeMap::new();
            for c in report.all() {
                classes.entry(rng.gen_range(0..3)).or_default().insert(c.id());
            }
            Ok(GammaIndex::new(x, classes.into_values().collect()))
        };
        let (a, b) = (index(rng)?, index(rng)?);
        let j = sys.gamma_join(&a, &b).map_err(|e| e.to_string())?;
        let above_a = sys.leq_checked(&a, &j).map_err(|e| e.to_string())?;
        let above_b = sys.leq_checked(&b, &j).map_err(|e| e.to_string())?;
        if !(above_a && above_b) {
            return Ok(Sweep {
                cases: i + 1,
                failure: Some(json!({ "graph": g.to_json(), "a": a, "b": b, "join": j })),
            });
        }
    }
    Ok(Sweep { cases, failure: None })
}

/// 𝔉 bonds compose along the canonical chain.
fn sweep_f_bonds(p: &Presentation, d: usize, k: usize) -> Res<Sweep> {
    let sys = FSystem::new(p, d, k, OpenPolicy::Admit);
    let chain = canonical_chain(p, d);
    let cases = chain.iter().map(|x| sys.level(x).map(|l| l.len()).unwrap_or(0)).sum();
    match check_compatibility(&sys, &[chain]).map_err(|e| e.to_string())? {
        Compatibility::Pass { .. } => Ok(Sweep { cases, failure: None }),
        other => Ok(Sweep { cases, failure: Some(json!(format!("{other:?}"))) }),
    }
}

/// Components of G_n − X partition the complement of X.
fn sweep_components(p: &Presentation, n: usize, rng: &mut ChaCha8Rng, cases: usize) -> Res<Sweep> {
    let lg = p.truncate(n);
    let verts: Vec<VertexId> = lg.vertices().iter().copied().collect();
    for i in 0..cases {
        let x: VertexSet = verts.iter().copied().filter(|_| rng.gen_bool(0.2)).collect();
        let report = component_report(p, &x, n).map_err(|e| e.to_string())?;
        let mut got: Vec<VertexSet> = report.all().iter().map(|c| c.vertices.clone()).collect();
        got.sort();
        let mut want: Vec<VertexSet> = components(&lg.graph, &x).into_iter().map(|(c, _)| c).collect();
        want.sort();
        let covered: VertexSet = got.iter().flatten().copied().collect();
        let complement: VertexSet = lg.vertices().difference(&x).copied().collect();
        if got != want || covered != complement {
            return Ok(Sweep { cases: i + 1, failure: Some(json!({ "separator": names(p, &x) })) });
        }
    }
    Ok(Sweep { cases, failure: None })
}

// ---------------------------------------------------------------------------
// Rendering

fn provenance(command: &Command, config: &RunConfig, r: &Report) -> Value {
    let presentation = match (&config.family, &config.presentation) {
        (Some(f), _) => json!({ "family": f, "params": config.params }),
        (None, Some(path)) => json!({ "file": path.display().to_string() }),
        (None, None) => Value::Null,
    };
    json!({
        "presentation": if matches!(command, Command::Families) { Value::Null } else { presentation },
        "level": r.level,
        "k": r.k,
        "size_bound": r.size,
        "evidence": if r.certified { "certified" } else { "witnessed" },
        "depth_cap": depth_cap(),
    })
}

fn render(command: &Command, config: &RunConfig, r: Report) -> Res<String> {
    match config.format {
        Format::Json => Ok(pretty(&json!({
            "command": command.name(),
            "provenance": provenance(command, config, &r),
            "result": r.result,
        }))),
        Format::Dot => r.dot.ok_or_else(|| format!("dot output is not available for {}", command.name())),
        Format::Text => {
            let prov = provenance(command, config, &r);
            let mut out = format!("{} level={} evidence={}", command.name(), r.level, prov["evidence"].as_str().unwrap_or(""));
            if let Some(k) = r.k {
                let _ = write!(out, " k={k}");
            }
            if let Some(s) = r.size {
                let _ = write!(out, " size={s}");
            }
            out.push('\n');
            if let Value::Object(map) = &r.result {
                for (key, val) in map {
                    let _ = writeln!(out, "{key}: {}", serde_json::to_string(val).expect("json values serialize"));
                }
            }
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------------------
// Schemas

fn obj(fields: &[(&str, &str)]) -> Value {
    let props: serde_json::Map<String, Value> =
        fields.iter().map(|(k, t)| (k.to_string(), json!({ "type": t }))).collect();
    json!({ "type": "object", "properties": props })
}

/// Output schema of a command: the report envelope with its result shape.
pub fn schema(command: &Command) -> Value {
    let result = match command {
        Command::Families => obj(&[("families", "array")]),
        Command::Truncate => obj(&[("graph", "object"), ("names", "object"), ("frontier", "array"), ("born", "object")]),
        Command::Components => obj(&[("separator", "array"), ("closed", "array"), ("open", "array")]),
        Command::Crit => obj(&[("crit", "array"), ("witnesses", "array")]),
        Command::Ends => obj(&[("directions", "array"), ("certified_ends", "array"), ("ends_complete", "boolean"), ("domination", "object")]),
        Command::Fpoints => obj(&[
            ("level", "object"),
            ("chain", "array"),
            ("threads", "array"),
            ("principal_threads", "integer"),
            ("filter_threads", "integer"),
            ("certified_ends", "integer"),
            ("certified_crit", "integer"),
        ]),
        Command::Gamma => obj(&[
            ("index", "object"),
            ("delta_member", "boolean"),
            ("space", "object"),
            ("other", "object"),
            ("gamma_join", "object"),
            ("delta_join", "object"),
            ("delta_join_member", "boolean"),
            ("bonds", "array"),
        ]),
        Command::Tangles => obj(&[("count", "integer"), ("tangles", "array"), ("forbidden", "string")]),
        Command::Sprime => obj(&[("separator", "array"), ("side", "array"), ("membership", "string")]),
        Command::Sim => obj(&[("a", "object"), ("b", "object"), ("sim", "object"), ("linked", "object"), ("quotient", "array"), ("inner_edges", "integer")]),
        Command::Aux => obj(&[("aux", "array"), ("components", "array"), ("skeleton", "boolean")]),
        Command::Vstar => obj(&[("order", "array"), ("thread_sizes", "array"), ("paths_sampled", "integer"), ("gaps", "array")]),
        Command::Pack => obj(&[
            ("k", "integer"),
            ("evaluated_at", "integer"),
            ("levels", "array"),
            ("limit_assignment", "object"),
            ("aux_completion", "array"),
            ("enumeration_cap", "integer"),
            ("skeleton", "boolean"),
        ]),
        Command::Predicates => obj(&[("level", "integer"), ("ends_locally_compact", "string"), ("one_point_omega", "string"), ("certified", "boolean")]),
        Command::Check { .. } => obj(&[("sweep", "string"), ("seed", "integer"), ("cases", "integer"), ("passed", "boolean"), ("counterexample", "object")]),
    };
    json!({
        "type": "object",
        "properties": {
            "command": { "const": command.name() },
            "provenance": obj(&[
                ("presentation", "object"),
                ("level", "integer"),
                ("k", "integer"),
                ("size_bound", "integer"),
                ("evidence", "string"),
                ("depth_cap", "integer"),
            ]),
            "result": result,
        },
        "required": ["command", "provenance", "result"],
    })
}
