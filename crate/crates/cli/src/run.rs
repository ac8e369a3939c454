use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use graphlimits::census::{equipartition_check, CensusError};
use graphlimits::generators::{self, double_edge_swaps};
use graphlimits::local_global::{d_lg, Budget};
use graphlimits::matcher::{d_strong_upper, MatchError};
use graphlimits::oracle::{
    apply_subgraph_rule, apply_vertex_rule, b_color, encode_subgraph, incident_edges, learn_partition_rule,
    SubgraphRule, VertexRule,
};
use graphlimits::partition::{hyperfiniteness_profile, iso_peel, verify_partition, PartitionError};
use graphlimits::schreier::{decode_action, encode_action, FiniteAction};
use graphlimits::seed::stream;
use graphlimits::stats::{convergence_report, d_stat, stat_profile, to_f64};
use graphlimits::{load_edge_list, Graph, Seed};

use crate::args::*;
use crate::report::write_atomic;

/// What a command produced, before it is wrapped in the report envelope.
pub struct Outcome {
    pub result: Value,
    pub summary: String,
    pub infeasible: bool,
    pub seeds: BTreeMap<String, u64>,
}

impl Outcome {
    fn ok(result: Value, summary: String) -> Self {
        Outcome {
            result,
            summary,
            infeasible: false,
            seeds: BTreeMap::new(),
        }
    }

    fn seeds(mut self, seeds: &[(&str, Seed)]) -> Self {
        self.seeds = seeds.iter().map(|(k, s)| (k.to_string(), s.0)).collect();
        self
    }
}

fn load(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_edge_list(&text, None).with_context(|| format!("parsing {}", path.display()))
}

fn infeasible(side: Option<&str>, err: &PartitionError, seeds: &[(&str, Seed)]) -> Outcome {
    let residual = match err {
        PartitionError::Infeasible { residual, .. } => Some(*residual),
        _ => None,
    };
    let side_note = side.map(|s| format!(" on graph {s}")).unwrap_or_default();
    Outcome {
        result: json!({
            "infeasible": true,
            "side": side,
            "residual": residual,
            "message": format!("{err}{side_note}; the hyperfinite-family hypothesis fails at these parameters"),
        }),
        summary: format!("infeasible{side_note}: {err}"),
        infeasible: true,
        seeds: BTreeMap::new(),
    }
    .seeds(seeds)
}

fn census_infeasible(e: &CensusError, seeds: &[(&str, Seed)]) -> Option<Outcome> {
    match e {
        CensusError::Infeasible { side, source } => Some(infeasible(Some(side), source, seeds)),
        _ => None,
    }
}

fn emit_text(to: Option<&Path>, text: &str) -> Result<()> {
    match to {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Generate(a) => generate(a),
        Command::Stats(a) => {
            let g = load(&a.file)?;
            let prof = stat_profile(&g, a.r)?;
            let rep = prof.at(a.r).report();
            let summary = format!("n = {}, {} ball types at radius {}", g.n(), rep.entries.len(), a.r);
            Ok(Outcome::ok(serde_json::to_value(rep)?, summary))
        }
        Command::Dstat(a) => {
            let (g, h) = (load(&a.a)?, load(&a.b)?);
            let d = d_stat(&g, &h, a.r)?;
            Ok(Outcome::ok(
                json!({ "radius": a.r, "distance": to_f64(d), "distance_exact": d.to_string() }),
                format!("d_stat^({}) = {} ({})", a.r, d, to_f64(d)),
            ))
        }
        Command::Converge(a) => {
            let seq = a.files.iter().map(|f| load(f)).collect::<Result<Vec<_>>>()?;
            let rep = convergence_report(&seq, a.r)?;
            let summary = format!(
                "successive distances {:?}, monotone: {}",
                rep.successive, rep.monotone_decreasing
            );
            Ok(Outcome::ok(serde_json::to_value(rep)?, summary))
        }
        Command::Partition(a) => partition(a),
        Command::Equipartition(a) => {
            let (g, h) = (load(&a.a)?, load(&a.b)?);
            let seed = Seed(a.seed);
            let seeds = [("root", seed), ("partition", seed.derive(stream::PARTITION))];
            match equipartition_check(&g, &h, a.eps, a.k, a.delta, seed) {
                Ok(rep) => {
                    let summary = format!(
                        "removed {:.4} / {:.4} of edges, census L1 = {:.6}, pass: {}",
                        rep.g.removed_fraction_edges, rep.h.removed_fraction_edges, rep.census_l1, rep.pass
                    );
                    Ok(Outcome::ok(serde_json::to_value(rep)?, summary).seeds(&seeds))
                }
                Err(e) => census_infeasible(&e, &seeds).ok_or_else(|| e.into()),
            }
        }
        Command::Match(a) => matching(a),
        Command::Localglobal(a) => {
            let (g, h) = (load(&a.a)?, load(&a.b)?);
            let budget = Budget {
                random: a.budget_random,
                optimized: a.budget_opt,
                steps: a.steps,
            };
            let seed = Seed(a.seed);
            let rep = d_lg(&g, &h, a.k_max, a.r, budget, seed)?;
            let summary = format!("d_LG ≈ {:.6} (tail ≤ {})", rep.value, rep.truncation_bound);
            Ok(Outcome::ok(serde_json::to_value(rep)?, summary)
                .seeds(&[("root", seed), ("labeling", seed.derive(stream::LABELING))]))
        }
        Command::Transfer(TransferCommand::Learn(a)) => learn(a),
        Command::Transfer(TransferCommand::Apply(a)) => apply(a),
        Command::Schreier(SchreierCommand::Encode(a)) => {
            let text = fs::read_to_string(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
            let action = FiniteAction::parse(&text)?;
            let enc = encode_action(&action);
            emit_text(a.to.as_deref(), &enc.strip().to_edge_list())?;
            Ok(Outcome::ok(
                json!({
                    "m": action.m(),
                    "n": action.n(),
                    "vertices": enc.graph.n(),
                    "edges": enc.graph.edge_count(),
                    "degree_bound": enc.graph.degree_bound(),
                    "stages": enc.stages,
                }),
                format!("{} vertices, degree bound {}", enc.graph.n(), enc.graph.degree_bound()),
            ))
        }
        Command::Schreier(SchreierCommand::Decode(a)) => {
            let g = load(&a.file)?;
            let action = decode_action(&g, a.n)?;
            emit_text(a.to.as_deref(), &action.to_text())?;
            let orbit_sizes: Vec<usize> = action.orbits().iter().map(Vec::len).collect();
            Ok(Outcome::ok(
                json!({ "m": action.m(), "n": action.n(), "orbit_sizes": orbit_sizes }),
                format!("{} points, {} generators", action.m(), action.n()),
            ))
        }
        Command::Run(_) => bail!("configs cannot nest `run`"),
    }
}

fn need(v: Option<usize>, flag: &str, fam: Family) -> Result<usize> {
    v.with_context(|| format!("{fam:?} needs --{flag}"))
}

fn generate(a: &GenerateArgs) -> Result<Outcome> {
    let seed = Seed(a.seed);
    let gen_seed = seed.derive(stream::GENERATE);
    let f = a.family;
    let g = match f {
        Family::Cycle => generators::cycle(need(a.n, "n", f)?)?,
        Family::Path => generators::path(need(a.n, "n", f)?)?,
        Family::Grid => generators::grid(need(a.w, "w", f)?, need(a.h, "h", f)?)?,
        Family::Torus => generators::torus(need(a.w, "w", f)?, need(a.h, "h", f)?)?,
        Family::Folner => generators::folner_box(need(a.n, "n", f)?)?,
        Family::LeafedLine => generators::leafed_line(need(a.n, "n", f)?),
        Family::RandomRegular => generators::random_regular(need(a.n, "n", f)?, need(a.d, "d", f)?, gen_seed)?,
    };
    let (g, done) = if a.swaps > 0 {
        double_edge_swaps(&g, a.swaps, gen_seed.derive(1))
    } else {
        (g, 0)
    };
    emit_text(a.to.as_deref(), &g.to_edge_list())?;
    Ok(Outcome::ok(
        json!({ "n": g.n(), "edges": g.edge_count(), "degree_bound": g.degree_bound(), "swaps_done": done }),
        format!("{} vertices, {} edges", g.n(), g.edge_count()),
    )
    .seeds(&[("root", seed), ("generate", gen_seed)]))
}

fn partition(a: &PartitionArgs) -> Result<Outcome> {
    let g = load(&a.file)?;
    let seed = Seed(a.seed);
    let seeds = [("root", seed), ("partition", seed.derive(stream::PARTITION))];
    let p = match iso_peel(&g, a.eps, a.k, seed.derive(stream::PARTITION)) {
        Ok(p) => p,
        Err(e @ PartitionError::Infeasible { .. }) => return Ok(infeasible(None, &e, &seeds)),
        Err(e) => return Err(e.into()),
    };
    let rep = verify_partition(&g, &p)?;
    if let Some(path) = &a.cut_to {
        let cut = g.spanning_subgraph(&p.cut)?;
        write_atomic(path, cut.to_edge_list().as_bytes())?;
    }
    let profile = if a.profile.is_empty() {
        Value::Null
    } else {
        serde_json::to_value(hyperfiniteness_profile(&g, &a.profile, a.k, seed.derive(stream::PARTITION)))?
    };
    let summary = format!(
        "cut {} edges ({:.4} of E), worst component {} (K = {}), pass: {}",
        rep.cut_edges, rep.removed_fraction_edges, rep.worst_component, a.k, rep.pass
    );
    Ok(Outcome::ok(
        json!({
            "verification": rep,
            "removed_fraction_edges_exact": p.removed_fraction_edges().to_string(),
            "removed_fraction_vertex_normalized_exact": p.removed_fraction_vertex_normalized().to_string(),
            "peel_steps": p.peel_log.len(),
            "peel_log": p.peel_log,
            "cut": p.cut,
            "profile": profile,
        }),
        summary,
    )
    .seeds(&seeds))
}

fn matching(a: &MatchArgs) -> Result<Outcome> {
    let (g, h) = (load(&a.a)?, load(&a.b)?);
    let seed = Seed(a.seed);
    let seeds = [("root", seed), ("partition", seed.derive(stream::PARTITION))];
    let rep = match d_strong_upper(&g, &h, a.eps, a.k, seed) {
        Ok(r) => r,
        Err(MatchError::Census(e)) => return census_infeasible(&e, &seeds).ok_or_else(|| e.into()),
        Err(e) => return Err(e.into()),
    };
    let mut v = serde_json::to_value(&rep)?;
    let pass = a.delta.map(|d| rep.bound < d);
    v["pass"] = json!(pass);
    if a.permutation {
        v["permutation"] = serde_json::to_value(&rep.bijection)?;
    }
    let summary = format!(
        "edit distance {} ({:.6} per vertex), bound (2εd + κd) = {:.6}{}",
        rep.edit_distance,
        rep.bound,
        rep.theoretical_bound,
        pass.map(|p| format!(", pass: {p}")).unwrap_or_default()
    );
    Ok(Outcome::ok(v, summary).seeds(&seeds))
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
enum RuleFile {
    Vertex {
        rule: VertexRule,
        reference: VertexReference,
    },
    Subgraph {
        rule: SubgraphRule,
        reference: SubgraphReference,
    },
}

#[derive(Serialize, Deserialize)]
struct VertexReference {
    n: usize,
    k: usize,
    selected: usize,
    selected_fraction: f64,
    worst_component: usize,
}

#[derive(Serialize, Deserialize)]
struct SubgraphReference {
    n: usize,
    edges: usize,
    kept_edges: usize,
    reproduced_exactly: bool,
}

fn learn(a: &LearnArgs) -> Result<Outcome> {
    let g = load(&a.reference)?;
    let seed = Seed(a.seed);
    let (ps, cs) = (seed.derive(stream::PARTITION), seed.derive(stream::COLORING));
    let seeds = [("root", seed), ("partition", ps), ("coloring", cs)];
    let coloring = b_color(&g, a.s, cs)?;
    let file = match a.mode {
        Mode::Vertex => {
            let p = match iso_peel(&g, a.eps, a.k, ps) {
                Ok(p) => p,
                Err(e @ PartitionError::Infeasible { .. }) => return Ok(infeasible(None, &e, &seeds)),
                Err(e) => return Err(e.into()),
            };
            let rule = learn_partition_rule(&g, &coloring, &p, a.r, a.s)?;
            let mask = apply_vertex_rule(&g, &coloring, &rule)?;
            let selected = mask.iter().filter(|&&m| m).count();
            let worst = worst_component(&g.remove_edges(&incident_edges(&g, &mask))?);
            RuleFile::Vertex {
                rule,
                reference: VertexReference {
                    n: g.n(),
                    k: a.k,
                    selected,
                    selected_fraction: selected as f64 / g.n().max(1) as f64,
                    worst_component: worst,
                },
            }
        }
        Mode::Subgraph => {
            let sub = match &a.subgraph {
                Some(path) => load(path)?,
                None => match iso_peel(&g, a.eps, a.k, ps) {
                    Ok(p) => g.remove_edges(&p.cut)?,
                    Err(e @ PartitionError::Infeasible { .. }) => return Ok(infeasible(None, &e, &seeds)),
                    Err(e) => return Err(e.into()),
                },
            };
            let rule = encode_subgraph(&g, &coloring, &sub, a.r, a.s)?;
            let back = apply_subgraph_rule(&g, &coloring, &rule)?;
            RuleFile::Subgraph {
                rule,
                reference: SubgraphReference {
                    n: g.n(),
                    edges: g.edge_count(),
                    kept_edges: sub.edge_count(),
                    reproduced_exactly: back.graph == sub,
                },
            }
        }
    };
    write_atomic(&a.rule, serde_json::to_string(&file)?.as_bytes())?;
    let (result, summary) = match &file {
        RuleFile::Vertex { rule, reference } => (
            json!({ "mode": "vertex", "keys": rule.accept.len(), "reference": reference }),
            format!(
                "{} accepted keys, reference selects {:.4} of vertices",
                rule.accept.len(),
                reference.selected_fraction
            ),
        ),
        RuleFile::Subgraph { rule, reference } => (
            json!({ "mode": "subgraph", "keys": rule.symbols.len(), "conflicts": rule.conflicts, "reference": reference }),
            format!("{} symbols, {} conflicts", rule.symbols.len(), rule.conflicts),
        ),
    };
    Ok(Outcome::ok(result, summary).seeds(&seeds))
}

fn worst_component(g: &Graph) -> usize {
    g.components().iter().map(Vec::len).max().unwrap_or(0)
}

fn apply(a: &ApplyArgs) -> Result<Outcome> {
    let g = load(&a.target)?;
    let text = fs::read_to_string(&a.rule).with_context(|| format!("reading {}", a.rule.display()))?;
    let file: RuleFile = serde_json::from_str(&text).context("parsing rule file")?;
    let seed = Seed(a.seed);
    let cs = seed.derive(stream::COLORING_TARGET);
    let seeds = [("root", seed), ("coloring", cs)];
    match file {
        RuleFile::Vertex { rule, reference } => {
            let coloring = b_color(&g, rule.s, cs)?;
            let mask = apply_vertex_rule(&g, &coloring, &rule)?;
            let selected = mask.iter().filter(|&&m| m).count();
            let rest = g.remove_edges(&incident_edges(&g, &mask))?;
            if let Some(p) = &a.to {
                write_atomic(p, rest.to_edge_list().as_bytes())?;
            }
            let fraction = selected as f64 / g.n().max(1) as f64;
            let worst = worst_component(&rest);
            let gap = (fraction - reference.selected_fraction).abs();
            Ok(Outcome::ok(
                json!({
                    "mode": "vertex",
                    "n": g.n(),
                    "selected": selected,
                    "selected_fraction": fraction,
                    "reference_fraction": reference.selected_fraction,
                    "fraction_gap": gap,
                    "worst_component": worst,
                    "within_k": worst <= reference.k,
                }),
                format!("selected {fraction:.4} (reference {:.4}), worst component {worst}", reference.selected_fraction),
            )
            .seeds(&seeds))
        }
        RuleFile::Subgraph { rule, reference } => {
            let coloring = b_color(&g, rule.s, cs)?;
            let res = apply_subgraph_rule(&g, &coloring, &rule)?;
            if let Some(p) = &a.to {
                write_atomic(p, res.graph.to_edge_list().as_bytes())?;
            }
            Ok(Outcome::ok(
                json!({
                    "mode": "subgraph",
                    "n": g.n(),
                    "kept_edges": res.graph.edge_count(),
                    "kept_fraction": res.graph.edge_count() as f64 / g.edge_count().max(1) as f64,
                    "reference_kept_fraction": reference.kept_edges as f64 / reference.edges.max(1) as f64,
                    "matched_vertices": res.matched_vertices,
                    "disagreements": res.disagreements,
                }),
                format!(
                    "kept {} edges, {} matched vertices, {} disagreements",
                    res.graph.edge_count(),
                    res.matched_vertices,
                    res.disagreements
                ),
            )
            .seeds(&seeds))
        }
    }
}
