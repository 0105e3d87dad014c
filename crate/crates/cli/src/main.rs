//! Command-line front end: file ingestion, analysis commands, and
//! deterministic JSON reports.
//!
//! Exit codes are a stable contract: 0 success, 1 negative domain verdict
//! (invalid input model / failed analysis precondition), 2 input error,
//! 3 resource cap exceeded. Reports are byte-identical across re-runs with
//! the same inputs and flags; wall time goes to stderr so it cannot break
//! that.

use anyhow::Context as _;
use clap::{Parser, Subcommand, ValueEnum};
use ctxkit::counterfactual::{FeasibilityInstance, FeasibilityOutcome};
use ctxkit::empirical::{EmpiricalModel, ProbabilisticOutcome};
use ctxkit::graphinv::{self, ExclusivityGraph, GraphCaps, ThetaOptions};
use ctxkit::marble;
use ctxkit::ontmodel::OntologicalModel;
use ctxkit::scenario::Scenario;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "ctxkit",
    version,
    about = "Contextuality scenario analysis toolkit"
)]
struct Cli {
    /// Numeric tolerance for validation and detection.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for all randomized procedures.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the derived exclusivity graph as DOT to this path.
    #[arg(long, global = true)]
    dot: Option<PathBuf>,
    /// Cap on enumerated assignment/outcome spaces.
    #[arg(long, global = true, default_value_t = 1 << 24)]
    cap: usize,
    /// Worker count for Monte Carlo sampling.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a scenario, ontological-model, or empirical-model file.
    Validate { path: PathBuf },
    /// Classify an empirical model in the contextuality hierarchy.
    Classify { path: PathBuf },
    /// Compress an ontological model into its quasi-model.
    Compress { path: PathBuf },
    /// Graph invariants (witness, alpha, theta, v_F, NCHV) of a scenario or
    /// graph file.
    Graph {
        path: PathBuf,
        /// Also evaluate the invariants at unit weights.
        #[arg(long)]
        unit_weights: bool,
    },
    /// Run a closest-projector simulation from a config file.
    Marble { config: PathBuf },
    /// Solve a counterfactual feasibility instance; with no path, run the
    /// built-in six-state reproduction end to end.
    Counterfactual { path: Option<PathBuf> },
    /// Fixed-point classification and determinism audit of a box (or box
    /// pair) composed in a loop.
    Loop { path: PathBuf },
    /// List or extract the bundled fixture files.
    Fixtures {
        #[arg(long)]
        list: bool,
        /// Write all bundled fixtures into this directory.
        #[arg(long)]
        extract: Option<PathBuf>,
        /// Print one bundled fixture to stdout.
        #[arg(long)]
        show: Option<String>,
    },
}

/// Process-level outcomes carrying the exit-code contract.
enum Outcome {
    /// exit 0
    Ok(String),
    /// exit 1: the analysis ran, the verdict is negative
    Domain(String),
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Cap(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(s) | CliError::Cap(s) => f.write_str(s),
        }
    }
}

impl std::error::Error for CliError {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = run(&cli);
    eprintln!("wall_time_ms {}", started.elapsed().as_millis());
    match result {
        Ok(Outcome::Ok(report)) => {
            println!("{report}");
            ExitCode::from(0)
        }
        Ok(Outcome::Domain(report)) => {
            println!("{report}");
            ExitCode::from(1)
        }
        Err(e) => {
            let code = match e.downcast_ref::<CliError>() {
                Some(CliError::Cap(_)) => 3,
                _ => 2,
            };
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Validate { path } => cmd_validate(cli, path),
        Command::Classify { path } => cmd_classify(cli, path),
        Command::Compress { path } => cmd_compress(cli, path),
        Command::Graph { path, unit_weights } => cmd_graph(cli, path, *unit_weights),
        Command::Marble { config } => cmd_marble(cli, config),
        Command::Counterfactual { path } => cmd_counterfactual(cli, path.as_deref()),
        Command::Loop { path } => cmd_loop(cli, path),
        Command::Fixtures {
            list,
            extract,
            show,
        } => cmd_fixtures(*list, extract.as_deref(), show.as_deref()),
    }
}

fn read_input(path: &Path) -> anyhow::Result<(String, String)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let digest = format!("sha256:{}", hex_digest(text.as_bytes()));
    Ok((text, digest))
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Serialize)]
struct Report {
    schema_version: u32,
    command: String,
    input_digest: String,
    tolerance: f64,
    seed: u64,
    verdict: Value,
}

fn render(command: &str, digest: &str, cli: &Cli, verdict: Value) -> String {
    let report = Report {
        schema_version: 1,
        command: command.to_owned(),
        input_digest: digest.to_owned(),
        tolerance: cli.tol,
        seed: cli.seed,
        verdict,
    };
    serde_json::to_string_pretty(&report).expect("report serializes")
}

fn require_json(cli: &Cli) -> anyhow::Result<()> {
    if cli.format == Format::Csv {
        anyhow::bail!(CliError::Input(
            "csv output is not defined for this command".into()
        ));
    }
    Ok(())
}

fn maybe_dot(cli: &Cli, graph: &ExclusivityGraph) -> anyhow::Result<()> {
    if let Some(path) = &cli.dot {
        std::fs::write(path, graph.to_dot())
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

enum FileKind {
    Scenario(Scenario),
    Model(OntologicalModel),
    Empirical(EmpiricalModel),
}

fn sniff(text: &str) -> anyhow::Result<FileKind> {
    let value: Value = serde_json::from_str(text).context("not valid json")?;
    let obj = value.as_object().context("top level must be an object")?;
    if obj.contains_key("num_ontic_states") {
        Ok(FileKind::Model(OntologicalModel::from_json(text)?))
    } else if obj.contains_key("tables") {
        Ok(FileKind::Empirical(EmpiricalModel::from_json(text)?))
    } else if obj.contains_key("measurements") {
        Ok(FileKind::Scenario(Scenario::from_json(text)?))
    } else {
        anyhow::bail!("unrecognized file kind: expected a scenario, model, or empirical file")
    }
}

fn cmd_validate(cli: &Cli, path: &Path) -> anyhow::Result<Outcome> {
    let (text, digest) = read_input(path)?;
    match sniff(&text)? {
        FileKind::Scenario(s) => {
            require_json(cli)?;
            let violations = s.validate();
            if let Ok(g) = s.exclusivity_graph() {
                maybe_dot(cli, &g)?;
            }
            let ok = violations.is_empty();
            let verdict = json!({
                "kind": "scenario",
                "valid": ok,
                "violations": violations,
            });
            let report = render("validate", &digest, cli, verdict);
            Ok(if ok {
                Outcome::Ok(report)
            } else {
                Outcome::Domain(report)
            })
        }
        FileKind::Model(m) => match m.validate(cli.tol) {
            Err(e) => anyhow::bail!("structural error: {e}"),
            Ok(violations) => {
                let ok = violations.is_empty();
                if cli.format == Format::Csv {
                    let csv = m.prediction_csv();
                    return Ok(if ok {
                        Outcome::Ok(csv)
                    } else {
                        Outcome::Domain(csv)
                    });
                }
                let conditions: Vec<u8> = violations.iter().map(|v| v.condition()).collect();
                let verdict = json!({
                    "kind": "ontological-model",
                    "valid": ok,
                    "violated_conditions": conditions,
                    "violations": violations,
                    "measurement_contextuality": m.measurement_contextuality(cli.tol),
                    "statistics_context_independent": m.gleason_gaps(cli.tol).is_empty(),
                });
                let report = render("validate", &digest, cli, verdict);
                Ok(if ok {
                    Outcome::Ok(report)
                } else {
                    Outcome::Domain(report)
                })
            }
        },
        FileKind::Empirical(em) => {
            require_json(cli)?;
            let violations = em.validate(cli.tol, cli.tol)?;
            let ok = violations.is_empty();
            let verdict = json!({
                "kind": "empirical-model",
                "valid": ok,
                "violations": violations,
            });
            let report = render("validate", &digest, cli, verdict);
            Ok(if ok {
                Outcome::Ok(report)
            } else {
                Outcome::Domain(report)
            })
        }
    }
}

fn cmd_classify(cli: &Cli, path: &Path) -> anyhow::Result<Outcome> {
    require_json(cli)?;
    let (text, digest) = read_input(path)?;
    let em = EmpiricalModel::from_json(&text)?;
    let verdict = match em.classify_hierarchy(None, cli.cap) {
        Ok(v) => v,
        Err(e @ ctxkit::empirical::EmpiricalError::TooLarge { .. }) => {
            anyhow::bail!(CliError::Cap(e.to_string()))
        }
        Err(e) => anyhow::bail!(e),
    };
    let signed = em.signed_global_section(cli.cap.min(1 << 16)).ok();
    let value = json!({
        "level": verdict.level,
        "probabilistic_global_section": matches!(verdict.probabilistic, ProbabilisticOutcome::Section(_)),
        "possibilistic_noncontextual": verdict.possibilistic.noncontextual,
        "strongly_contextual": verdict.strong.strongly_contextual,
        "compatible_assignments": verdict.possibilistic.compatible.len(),
        "uncovered_support_atom": verdict.possibilistic.uncovered,
        "signed_section": signed.map(|s| json!({
            "residual": s.residual,
            "min_weight": s.min_weight,
        })),
    });
    Ok(Outcome::Ok(render("classify", &digest, cli, value)))
}

fn cmd_compress(cli: &Cli, path: &Path) -> anyhow::Result<Outcome> {
    require_json(cli)?;
    let (text, digest) = read_input(path)?;
    let model = OntologicalModel::from_json(&text)?;
    match ctxkit::compress::build_quasi_model(&model, cli.tol) {
        Ok(q) => {
            let value = json!({
                "num_ontic_states": model.num_ontic_states,
                "num_quasi_states": q.num_quasi_states,
                "prediction_gap": q.prediction_gap(&model),
                "state_sum_gap": q.state_sum_gap(),
                "completeness_gap": q.completeness_gap(),
                "negativity": q.negativity,
                "quasi_model": serde_json::from_str::<Value>(&q.to_json())?,
            });
            Ok(Outcome::Ok(render("compress", &digest, cli, value)))
        }
        Err(e) => {
            let value = json!({ "error": e.to_string() });
            Ok(Outcome::Domain(render("compress", &digest, cli, value)))
        }
    }
}

fn cmd_graph(cli: &Cli, path: &Path, unit_weights: bool) -> anyhow::Result<Outcome> {
    require_json(cli)?;
    let (text, digest) = read_input(path)?;
    let value: Value = serde_json::from_str(&text).context("not valid json")?;
    let graph = if value.get("vertices").is_some() {
        ExclusivityGraph::from_json(&text)?
    } else {
        Scenario::from_json(&text)?.exclusivity_graph()?
    };
    maybe_dot(cli, &graph)?;
    let caps = GraphCaps {
        clique_count: cli.cap.min(100_000),
        ..GraphCaps::default()
    };
    let evaluate = |g: &ExclusivityGraph| -> anyhow::Result<Value> {
        let inv = match graphinv::invariants(g, &caps, &ThetaOptions::default()) {
            Ok(inv) => inv,
            Err(e @ graphinv::GraphError::TooLarge { .. }) => {
                anyhow::bail!(CliError::Cap(e.to_string()))
            }
            Err(e) => anyhow::bail!(e),
        };
        let nchv = graphinv::nchv_exists(g, caps.nchv_vertices)?;
        let (prob_ok, prob_violations) = g.is_probabilistic_model(cli.tol);
        Ok(json!({
            "witness_sigma": g.witness_sigma(),
            "probabilistic_model": prob_ok,
            "model_violations": prob_violations,
            "exclusivity_holds": g.exclusivity_check(cli.tol, caps.clique_count)?,
            "independence_number": inv.alpha.value,
            "independent_set": inv.alpha.vertices,
            "lovasz_number": inv.theta.value,
            "lovasz_bracket": [inv.theta.lower, inv.theta.upper],
            "fractional_packing_number": ctxkit::rat_to_f64(&inv.vf.value),
            "fractional_packing_exact": format!("{}", inv.vf.value),
            "squeeze_holds": inv.squeeze_holds(ctxkit::THETA_TOL),
            "nchv_exists": nchv.assignment.is_some(),
            "nchv_assignment": nchv.assignment,
            "nchv_nodes_explored": nchv.nodes_explored,
        }))
    };
    let mut verdict = json!({
        "vertices": graph.num_vertices(),
        "edges": graph.num_edges(),
        "maximal_scenario": graph.is_maximal_scenario(),
        "at_supplied_weights": evaluate(&graph)?,
    });
    if unit_weights {
        verdict["at_unit_weights"] = evaluate(&graph.with_unit_weights())?;
    }
    Ok(Outcome::Ok(render("graph", &digest, cli, verdict)))
}

fn cmd_marble(cli: &Cli, path: &Path) -> anyhow::Result<Outcome> {
    let (text, digest) = read_input(path)?;
    let config = marble::MarbleConfig::from_json(&text)?;
    let (contexts, prior) = config.build()?;
    let mut frequencies = Vec::new();
    for (id, ctx) in &contexts {
        let f = marble::sample_statistics(&prior, ctx, config.samples, config.seed, cli.jobs)?;
        frequencies.push((id.clone(), f));
    }
    if cli.format == Format::Csv {
        let mut out = String::from("context,outcome,frequency,std_error\n");
        for (id, f) in &frequencies {
            for (k, (freq, se)) in f.frequencies.iter().zip(&f.std_errors).enumerate() {
                out.push_str(&format!("{id},{k},{freq},{se}\n"));
            }
        }
        return Ok(Outcome::Ok(out));
    }
    let gap = match config.shared {
        Some([ca, da, cb, db]) => {
            let (_, ctx_a) = &contexts[ca];
            let (_, ctx_b) = &contexts[cb];
            let g = marble::gleason_violation_test(
                &prior,
                ctx_a,
                ctx_b,
                da,
                db,
                config.samples,
                config.seed,
                cli.jobs,
            )?;
            let witness = marble::find_ks_witness(ctx_a, ctx_b, da, db, 400, config.seed)?;
            Some(json!({
                "gap": g.gap,
                "ci99": [g.ci_low, g.ci_high],
                "ci_excludes_zero": g.excludes_zero(),
                "ks_witness_found": witness.is_some(),
            }))
        }
        None => None,
    };
    let value = json!({
        "dimension": config.dimension,
        "samples": config.samples,
        "frequencies": frequencies
            .iter()
            .map(|(id, f)| json!({
                "context": id,
                "frequencies": f.frequencies,
                "std_errors": f.std_errors,
            }))
            .collect::<Vec<_>>(),
        "shared_measurement_gap": gap,
    });
    Ok(Outcome::Ok(render("marble", &digest, cli, value)))
}

fn cmd_counterfactual(cli: &Cli, path: Option<&Path>) -> anyhow::Result<Outcome> {
    require_json(cli)?;
    let (instance, digest, builtin) = match path {
        Some(p) => {
            let (text, digest) = read_input(p)?;
            (FeasibilityInstance::from_json(&text)?, digest, false)
        }
        None => {
            let instance = ctxkit::counterfactual::appendix_c_instance();
            let digest = format!("sha256:{}", hex_digest(instance.to_json().as_bytes()));
            (instance, digest, true)
        }
    };
    let solve = |inst: &FeasibilityInstance| -> anyhow::Result<(bool, Value)> {
        match inst.feasibility_search(cli.cap) {
            Ok(FeasibilityOutcome::Feasible { shared, .. }) => Ok((
                true,
                json!({
                    "verdict": "FEASIBLE",
                    "shared_support": shared.map(|d| d.weights.len()),
                }),
            )),
            Ok(FeasibilityOutcome::Infeasible(cert)) => Ok((
                false,
                json!({
                    "verdict": "INFEASIBLE",
                    "farkas_multipliers": cert
                        .multipliers
                        .iter()
                        .map(|m| m.to_string())
                        .collect::<Vec<_>>(),
                }),
            )),
            Err(e @ ctxkit::counterfactual::CounterfactualError::TooLarge { .. }) => {
                anyhow::bail!(CliError::Cap(e.to_string()))
            }
            Err(e) => anyhow::bail!(e),
        }
    };
    let (_, main_verdict) = solve(&instance)?;
    let mut verdict = json!({
        "instance": if builtin { "built-in six-state construction" } else { "file" },
        "result": main_verdict,
    });
    if builtin {
        // drop-one robustness sweep, each cross-checked against the
        // elimination oracle
        let all = ["P12", "P34", "P56", "P135", "P246"];
        let mut sweep = Vec::new();
        for drop in &all {
            let keep: Vec<&str> = all.iter().copied().filter(|k| k != drop).collect();
            let sub = ctxkit::counterfactual::instance_with_composites(&keep, false);
            let (feasible, v) = solve(&sub)?;
            let oracle = sub.feasibility_oracle(cli.cap, 400_000)?;
            sweep.push(json!({
                "dropped": drop,
                "result": v,
                "oracle_agrees": oracle == feasible,
            }));
        }
        verdict["drop_one"] = Value::Array(sweep);
    }
    Ok(Outcome::Ok(render("counterfactual", &digest, cli, verdict)))
}

fn cmd_loop(cli: &Cli, path: &Path) -> anyhow::Result<Outcome> {
    require_json(cli)?;
    let (text, digest) = read_input(path)?;
    let value: Value = serde_json::from_str(&text).context("not valid json")?;
    let (composition, single) = if value.get("box").is_some() {
        let b = ctxkit::causal::BoxBehavior::from_json(&serde_json::to_string(&value["box"])?)?;
        (
            ctxkit::causal::LoopComposition::self_composition(&b),
            Some(b),
        )
    } else if value.get("box_x").is_some() {
        (
            serde_json::from_str::<ctxkit::causal::LoopComposition>(&text)?,
            None,
        )
    } else {
        let b = ctxkit::causal::BoxBehavior::from_json(&text)?;
        (
            ctxkit::causal::LoopComposition::self_composition(&b),
            Some(b),
        )
    };
    let analysis = composition.fixed_points()?;
    let classes: Vec<Value> = analysis
        .classes
        .iter()
        .map(|((qx, qy), c)| json!({"qx": qx, "qy": qy, "class": c}))
        .collect();
    let audit = match &single {
        Some(b) => Some(ctxkit::causal::determinism_audit(b)?),
        None => None,
    };
    let value = json!({
        "unique_everywhere": analysis.unique_everywhere,
        "classes": classes,
        "conditional_entropy": analysis.conditional_entropy,
        "audit": audit,
    });
    Ok(Outcome::Ok(render("loop", &digest, cli, value)))
}

fn cmd_fixtures(list: bool, extract: Option<&Path>, show: Option<&str>) -> anyhow::Result<Outcome> {
    let files = ctxkit::fixtures::bundled_files();
    if let Some(name) = show {
        let Some((_, body)) = files.iter().find(|(n, _)| *n == name) else {
            anyhow::bail!("no bundled fixture named {name}");
        };
        return Ok(Outcome::Ok(body.clone()));
    }
    if let Some(dir) = extract {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (name, body) in &files {
            std::fs::write(dir.join(name), body).with_context(|| format!("cannot write {name}"))?;
        }
        return Ok(Outcome::Ok(format!(
            "extracted {} fixtures to {}",
            files.len(),
            dir.display()
        )));
    }
    let _ = list;
    let names: Vec<&str> = files.iter().map(|(n, _)| *n).collect();
    Ok(Outcome::Ok(names.join("\n")))
}
