use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use raylab_core::audit::{run_suite, SuiteReport};
use raylab_core::counterexample::{build_bounded, build_unbounded, CheckMode, IdentificationPlan};
use raylab_core::instances::{packing_instance, random_flow_instance, spec_corpus, OverlapKind};
use raylab_core::oracle::{brute_max_disjoint_dipaths, periodicity_probe, Periodicity, SearchBudget};
use raylab_core::packing::{assemble_positive, orientation_word, vertex_disjoint_dipaths_in};
use raylab_core::{classify, Digraph, Orientation, RaySpec, Tribe, Verdict};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "raylab", version, about = "Ubiquity of oriented rays at finite scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Human,
    Machine,
}

#[derive(Args)]
struct OutputArg {
    /// Output style.
    #[arg(long, value_enum, default_value_t = Output::Human)]
    format: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Bounded,
    Unbounded,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Dot,
    Native,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a ray spec.
    Classify {
        #[arg(long)]
        spec: String,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Build an identification host and write the digraph and its plan.
    Build {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        spec: String,
        #[arg(long)]
        max_m: usize,
        #[arg(long)]
        len: usize,
        #[arg(long)]
        steps: usize,
        /// Digraph output file.
        #[arg(long)]
        out: PathBuf,
        /// Plan output file; defaults to `<out>.plan.json`.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Pack disjoint copies of a tribe's pattern.
    Pack {
        #[arg(long)]
        digraph: PathBuf,
        #[arg(long)]
        tribe: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        min_len: usize,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Re-check a plan and run the oracle suites on its digraph.
    Verify {
        #[arg(long)]
        digraph: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, value_enum)]
        mode: Kind,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Print a digraph file as Graphviz or native JSON.
    Export {
        #[arg(long)]
        digraph: PathBuf,
        #[arg(long, value_enum)]
        format: ExportFormat,
    },
    /// Run the seeded oracle corpus.
    Selftest {
        #[command(flatten)]
        out: OutputArg,
    },
}

enum Failure {
    Usage(String),
    Violation,
}

type Outcome = Result<(), Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn budget() -> Result<SearchBudget, Failure> {
    match std::env::var("RAYLAB_BUDGET") {
        Ok(s) => s.parse().map_err(|e| usage(format!("RAYLAB_BUDGET: {e}"))),
        Err(_) => Ok(SearchBudget::default()),
    }
}

fn emit(out: Output, human: String, machine: Value) {
    match out {
        Output::Human => print!("{human}"),
        Output::Machine => println!("{machine}"),
    }
}

fn verdict_json(v: Verdict) -> Value {
    match v {
        Verdict::NonUbiquitousBounded { c } => json!({ "variant": v.variant(), "c": c, "text": v.to_string() }),
        _ => json!({ "variant": v.variant(), "text": v.to_string() }),
    }
}

fn cmd_classify(spec: &str, out: Output) -> Outcome {
    let s: RaySpec = spec.parse().map_err(usage)?;
    let v = classify(&s);
    emit(out, format!("{v}\n"), json!({ "spec": s.to_string(), "verdict": verdict_json(v) }));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_build(kind: Kind, spec: &str, max_m: usize, len: usize, steps: usize, path: &Path, plan_path: Option<&Path>, out: Output) -> Outcome {
    let s: RaySpec = spec.parse().map_err(usage)?;
    let (d, plan) = match kind {
        Kind::Bounded => build_bounded(&s, max_m, len, steps),
        Kind::Unbounded => build_unbounded(&s, max_m, len, steps),
    }
    .map_err(usage)?;
    let plan_path = plan_path.map(Path::to_path_buf).unwrap_or_else(|| {
        let mut p = path.as_os_str().to_owned();
        p.push(".plan.json");
        PathBuf::from(p)
    });
    write(path, &d.to_native())?;
    write(&plan_path, &plan.to_json())?;
    let stop = plan.stop.map(|s| format!("{s:?}")).unwrap_or_else(|| "none".into());
    let human = format!(
        "built {} identifications ({} requested), {} vertices, {} arcs\nstop: {stop}\ndigraph: {}\nplan: {}\n",
        plan.completed(),
        steps,
        d.vertex_count(),
        d.arc_count(),
        path.display(),
        plan_path.display()
    );
    let machine = json!({
        "completed": plan.completed(),
        "requested": steps,
        "vertices": d.vertex_count(),
        "arcs": d.arc_count(),
        "stop": plan.stop,
        "digraph": path.display().to_string(),
        "plan": plan_path.display().to_string(),
    });
    emit(out, human, machine);
    Ok(())
}

fn cmd_pack(digraph: &Path, tribe: &Path, n: usize, min_len: usize, out: Output) -> Outcome {
    let d = Digraph::from_native(&read(digraph)?).map_err(usage)?;
    let t = Tribe::from_dump(&read(tribe)?, &d).map_err(usage)?;
    let a = match assemble_positive(&d, &t, n, min_len) {
        Ok(a) => a,
        Err(e) => {
            emit(out, format!("packing failed: {e}\n"), json!({ "ok": false, "error": e.to_string() }));
            return Err(Failure::Violation);
        }
    };
    let mut human = String::new();
    for (i, e) in a.embeddings.iter().enumerate() {
        let vs: Vec<String> = e.vertices.iter().map(ToString::to_string).collect();
        human.push_str(&format!("copy {i}: {} [{}]\n", orientation_word(e), vs.join(" ")));
    }
    for tr in &a.packing.trace {
        human.push_str(&format!(
            "level {}: layer {} ({} members), prefix union {}, deleted {}+{}, adopted {:?}, rerouted {:?}, cut {}\n",
            tr.level, tr.layer_index, tr.layer_size, tr.prefix_union, tr.deleted_by_prefixes, tr.deleted_by_adoption, tr.adopted, tr.rerouted, tr.cut_size
        ));
    }
    let machine = json!({
        "ok": true,
        "embeddings": a.embeddings.iter().map(|e| json!({ "vertices": e.vertices, "word": orientation_word(e) })).collect::<Vec<_>>(),
        "forked_layers": a.forked.as_ref().map(Tribe::layer_sizes),
        "trace": a.packing.trace,
    });
    emit(out, human, machine);
    Ok(())
}

fn suite_human(r: &SuiteReport) -> String {
    let mut s = format!("entries checked: {}, paths examined: {}\n", r.plan.entries, r.plan.paths_examined);
    for v in &r.plan.violations {
        s.push_str(&format!("violation at step {}: {}: {}\n", v.step.map_or("-".to_string(), |s| s.to_string()), v.check, v.detail));
    }
    s.push_str(&format!("disjoint prefix copies: {:?}\n", r.copies));
    if let Some(c) = &r.confinement {
        s.push_str(&format!(
            "embeddings of length {}: {} ({} confined, {} mixed); split low/high/cross {}/{}/{}, violations {}\n",
            c.length, c.embeddings, c.confined, c.mixed, c.split.low, c.split.high, c.split.cross, c.split.violations
        ));
    }
    if let Some(p) = &r.periodicity {
        s.push_str(&format!("periodicity: {p:?}\n"));
    }
    for f in &r.failures {
        s.push_str(&format!("failure: {f}\n"));
    }
    s.push_str(if r.ok() { "ok\n" } else { "FAILED\n" });
    s
}

fn cmd_verify(digraph: &Path, plan: &Path, mode: Kind, out: Output) -> Outcome {
    let d = Digraph::from_native(&read(digraph)?).map_err(usage)?;
    let plan = IdentificationPlan::from_json(&read(plan)?).map_err(usage)?;
    let mode = match (mode, plan.mode) {
        (Kind::Bounded, m @ CheckMode::Bounded { .. }) => m,
        (Kind::Unbounded, m @ CheckMode::Unbounded) => m,
        (Kind::Bounded, _) => {
            let c = match classify(&plan.spec().map_err(usage)?) {
                Verdict::NonUbiquitousBounded { c } => c,
                v => return Err(usage(format!("plan spec is not bounded ({v})"))),
            };
            CheckMode::Bounded { c }
        }
        (Kind::Unbounded, _) => CheckMode::Unbounded,
    };
    let r = run_suite(&d, &plan, mode, budget()?);
    emit(out, suite_human(&r), json!({ "ok": r.ok(), "report": r }));
    if r.ok() {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}

fn cmd_export(digraph: &Path, format: ExportFormat) -> Outcome {
    let d = Digraph::from_native(&read(digraph)?).map_err(usage)?;
    match format {
        ExportFormat::Dot => print!("{}", d.to_dot()),
        ExportFormat::Native => print!("{}", d.to_native()),
    }
    Ok(())
}

fn selftest_checks(b: SearchBudget) -> Vec<(&'static str, Result<String, String>)> {
    let mut checks = Vec::new();

    let corpus = spec_corpus(7, 60);
    let bad = corpus.iter().find(|(class, s)| {
        let v = classify(s);
        let expected = match class {
            0 => "ubiquitous",
            1 => "bounded",
            _ => "unbounded",
        };
        v.variant() != expected || classify(&s.reverse()).variant() != v.variant()
    });
    checks.push(("classify", bad.map_or(Ok(format!("{} specs", corpus.len())), |(_, s)| Err(s.to_string()))));

    let mut menger = Ok("30 digraphs".to_string());
    for seed in 0..30 {
        let inst = random_flow_instance(seed, 10, 0.25, seed % 2 == 0);
        let r = vertex_disjoint_dipaths_in(&inst.arcs, &inst.sources, &inst.sinks);
        match brute_max_disjoint_dipaths(&inst.arcs, &inst.sources, &inst.sinks, b) {
            Ok(k) if k == r.paths.len() && k == r.cut.len() => {}
            other => {
                menger = Err(format!("seed {seed}: flow {} brute {other:?}", r.paths.len()));
                break;
            }
        }
    }
    checks.push(("menger", menger));

    let mut pack = Ok("3 instances".to_string());
    for (seed, kind) in [OverlapKind::Disjoint, OverlapKind::Star, OverlapKind::Chained].into_iter().enumerate() {
        let sizes: Vec<usize> = (0..8).map(|k| 8 + 10 * k).collect();
        let inst = packing_instance(seed as u64, kind, &sizes, 60);
        let res = assemble_positive(&inst.digraph, &inst.tribe, 4, 10).map_err(|e| e.to_string()).and_then(|a| {
            let mut seen = BTreeSet::new();
            let disjoint = a.embeddings.iter().flat_map(|e| &e.vertices).all(|v| seen.insert(*v));
            let long = a.embeddings.iter().all(|e| e.len() >= 10 && e.orientations().iter().all(|&o| o == Orientation::Out));
            if a.embeddings.len() == 4 && disjoint && long {
                Ok(())
            } else {
                Err("bad packing".into())
            }
        });
        if let Err(e) = res {
            pack = Err(format!("{kind:?}: {e}"));
            break;
        }
    }
    checks.push(("pack", pack));

    let alt = RaySpec::periodic(&[1], Orientation::Out);
    let bounded = build_bounded(&alt, 2, 60, 3).map_err(|e| e.to_string()).and_then(|(d, plan)| {
        let r = run_suite(&d, &plan, plan.mode, b);
        if r.ok() {
            Ok(format!("{} entries", plan.completed()))
        } else {
            Err(format!("{:?} {:?}", r.plan.violations, r.failures))
        }
    });
    checks.push(("bounded", bounded));

    let grow = RaySpec::growing(1, 1, Orientation::Out);
    let unbounded = build_unbounded(&grow, 1, 300, 1).map_err(|e| e.to_string()).and_then(|(d, plan)| {
        let r = run_suite(&d, &plan, CheckMode::Unbounded, b);
        if r.ok() {
            Ok(format!("{} paths examined", r.plan.paths_examined))
        } else {
            Err(format!("{:?} {:?}", r.plan.violations, r.failures))
        }
    });
    checks.push(("unbounded", unbounded));

    let bad = corpus.iter().find(|(class, s)| (periodicity_probe(s, 80, 100) == Periodicity::Aperiodic) != (*class == 2));
    checks.push(("periodicity", bad.map_or(Ok(format!("{} specs", corpus.len())), |(_, s)| Err(s.to_string()))));
    checks
}

fn cmd_selftest(out: Output) -> Outcome {
    let checks = selftest_checks(budget()?);
    let ok = checks.iter().all(|(_, r)| r.is_ok());
    let human: String = checks
        .iter()
        .map(|(name, r)| match r {
            Ok(d) => format!("pass {name}: {d}\n"),
            Err(d) => format!("FAIL {name}: {d}\n"),
        })
        .collect();
    let machine = json!({
        "ok": ok,
        "checks": checks.iter().map(|(name, r)| json!({ "name": name, "ok": r.is_ok(), "detail": r.as_ref().unwrap_or_else(|e| e) })).collect::<Vec<_>>(),
    });
    emit(out, human, machine);
    if ok {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Classify { spec, out } => cmd_classify(&spec, out.format),
        Command::Build { kind, spec, max_m, len, steps, out, plan, output } => {
            cmd_build(kind, &spec, max_m, len, steps, &out, plan.as_deref(), output.format)
        }
        Command::Pack { digraph, tribe, n, min_len, out } => cmd_pack(&digraph, &tribe, n, min_len, out.format),
        Command::Verify { digraph, plan, mode, out } => cmd_verify(&digraph, &plan, mode, out.format),
        Command::Export { digraph, format } => cmd_export(&digraph, format),
        Command::Selftest { out } => cmd_selftest(out.format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
