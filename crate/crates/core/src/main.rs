use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use properpath::bench::{run_bench, write_csv, BenchConfig};
use properpath::export::{normal_form_json, perturbation_json, sequence_form_json, write_path_file};
use properpath::forms::{build_normal_form, build_sequence_form, mixed_from_plan, realization_of};
use properpath::game::{generate_random, parse_game, serialize_game, GeneratorKind, GeneratorParams};
use properpath::refine::{
    check_eps_perfect_sf, check_eps_proper_nf, check_eps_proper_nf_closure, check_eps_proper_sf,
    check_eps_quasi_perfect_sf, check_eps_quasi_proper_sf, check_nash_sequence_form, enumerate_perturbation_sets,
    Certificate, DEFAULT_FAMILY_CAP,
};
use properpath::{
    fixtures, solve, Error, GameTree, Method, MixedProfile, RealizationProfile, SequenceForm, SolveOptions,
    SolveReport, StartKind, TraceStatus,
};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_CAP: u8 = 4;
const EXIT_CERT_FAIL: u8 = 1;

#[derive(Parser)]
#[command(name = "properpath", version, about = "Proper equilibria of extensive-form games by sequence-form path following")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Trace a homotopy path and report the equilibrium.
    Solve(SolveArgs),
    /// Check a candidate profile against a refinement definition.
    Verify(VerifyArgs),
    /// Write a random game.
    Generate(GenerateArgs),
    /// Run the benchmark grid.
    Bench(BenchArgs),
    /// Dump a derived form as JSON.
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StartArg {
    Uniform,
    Random,
    File,
}

#[derive(clap::Args)]
struct SolveArgs {
    /// Game file, or a bundled fixture name (fig1, fig2, fig3).
    game: String,
    #[arg(long, default_value = "lgpr")]
    method: Method,
    #[arg(long, value_enum, default_value = "random")]
    start: StartArg,
    /// Starting plan for `--start file` (candidate JSON, plan form).
    #[arg(long)]
    start_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Path export, `.csv` or `.json`.
    #[arg(long)]
    export: Option<PathBuf>,
    /// Write the report JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the report JSON instead of text.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    max_time: Option<f64>,
    #[arg(long)]
    tol_cap: Option<f64>,
    #[arg(long)]
    alpha_max: Option<f64>,
    #[arg(long)]
    omega0: Option<f64>,
    #[arg(long)]
    delta0: Option<f64>,
    #[arg(long)]
    kappa0: Option<f64>,
    #[arg(long)]
    nash_tol: Option<f64>,
    /// Skip the refinement certificates.
    #[arg(long)]
    no_certify: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum DefinitionArg {
    ProperNf,
    ProperSf,
    PerfectSf,
    QuasiPerfect,
    QuasiProper,
    Nash,
}

#[derive(clap::Args)]
struct VerifyArgs {
    game: String,
    /// Candidate JSON: a solve report, or one entry per player, either an
    /// array of mixed weights or an object of sequence label to weight.
    candidate: PathBuf,
    #[arg(long, value_enum)]
    definition: DefinitionArg,
    /// ε for the refinement tests, tolerance for `nash`.
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    #[arg(long)]
    json: bool,
}

#[derive(clap::Args)]
struct GenerateArgs {
    #[arg(long = "type", value_parser = clap::value_parser!(u8).range(1..=2))]
    kind: u8,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    depth: usize,
    #[arg(long)]
    actions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BenchArgs {
    /// JSON grid config; fields default to the standard three cells.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (else PROPERPATH_THREADS, else all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Per-run records and summaries as JSON.
    #[arg(long)]
    json_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Normal,
    Sequence,
    Perturbation,
}

#[derive(clap::Args)]
struct InspectArgs {
    game: String,
    #[arg(long, value_enum)]
    form: FormArg,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let result = match cli.cmd {
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Generate(a) => cmd_generate(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Inspect(a) => cmd_inspect(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::NormalFormTooLarge { .. } | Error::FamilyCap { .. }) => EXIT_CAP,
        Some(Error::NotConverged(_) | Error::Singular(_)) => EXIT_NOT_CONVERGED,
        _ => EXIT_INPUT,
    }
}

fn load_game(spec: &str) -> anyhow::Result<GameTree> {
    let path = Path::new(spec);
    let text = if path.exists() {
        std::fs::read_to_string(path).with_context(|| format!("reading {spec}"))?
    } else if let Some(t) = fixtures::by_name(spec) {
        t.to_string()
    } else {
        bail!("no such game file: {spec}");
    };
    Ok(parse_game(&text)?)
}

fn read_json(path: &Path) -> anyhow::Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_text(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(a: SolveArgs) -> anyhow::Result<u8> {
    let game = load_game(&a.game)?;
    let mut opts = SolveOptions::seeded(a.method, a.seed);
    opts.start = match a.start {
        StartArg::Uniform => StartKind::Uniform,
        StartArg::Random => StartKind::Random,
        StartArg::File => {
            let p = a.start_file.as_deref().ok_or_else(|| anyhow!("--start file needs --start-file"))?;
            let sf = build_sequence_form(&game);
            match parse_candidate(&sf, &read_json(p)?)? {
                Candidate::Plan(g) => StartKind::Plan(g),
                Candidate::Mixed(_) => bail!("start file must give realization plans"),
            }
        }
    };
    let h = &mut opts.homotopy;
    if let Some(v) = a.alpha_max {
        h.alpha_max = v;
    }
    if let Some(v) = a.omega0 {
        h.omega0 = v;
    }
    if let Some(v) = a.delta0 {
        h.delta0 = v;
    }
    if let Some(v) = a.kappa0 {
        h.kappa0 = v;
    }
    let t = &mut opts.tracer;
    if let Some(v) = a.t_end {
        t.t_end = v;
    }
    if let Some(v) = a.max_iterations {
        t.max_iterations = v;
    }
    if let Some(v) = a.max_time {
        t.max_time_s = v;
    }
    if let Some(v) = a.tol_cap {
        t.tol_cap = v;
    }
    if let Some(v) = a.nash_tol {
        opts.nash_tol = v;
    }
    opts.certify = !a.no_certify;
    if game.name.starts_with("fig") {
        opts.catalog = catalog_for(&game.name);
    }
    let report = solve(&game, &opts)?;
    if let Some(p) = &a.export {
        write_path_file(&report, p)?;
    }
    let json = serde_json::to_string_pretty(&report)?;
    if let Some(p) = &a.out {
        std::fs::write(p, &json).with_context(|| format!("writing {}", p.display()))?;
    }
    if a.json {
        println!("{json}");
    } else {
        print_report(&report);
    }
    Ok(match report.status {
        TraceStatus::Converged => 0,
        TraceStatus::StepUnderflow => EXIT_NOT_CONVERGED,
        TraceStatus::IterationCap | TraceStatus::TimeCap => EXIT_CAP,
    })
}

fn catalog_for(name: &str) -> Option<Vec<MixedProfile>> {
    let cat = match name {
        "fig1" => fixtures::fig1_catalog(),
        "fig2" => fixtures::fig2_catalog(),
        "fig3" => fixtures::fig3_catalog(),
        _ => return None,
    };
    Some(cat.into_iter().map(MixedProfile::new).collect())
}

fn fmt_weights(w: &[(String, f64)]) -> String {
    w.iter().map(|(l, x)| format!("{l}={x:.6}")).collect::<Vec<_>>().join(" ")
}

fn print_cert(name: &str, c: &Certificate) {
    let eps = c.realized_epsilon.map(|e| format!(" realized_eps={e:.3e}")).unwrap_or_default();
    println!("  {name}: {} (eps={:.3e}{eps}, violations={})", if c.pass { "pass" } else { "FAIL" }, c.epsilon, c.num_violations);
}

fn print_report(r: &SolveReport) {
    let m = &r.metadata;
    println!("game: {}  method: {}  start: {}  seed: {}", m.game, m.method, m.start, m.seed);
    println!(
        "status: {}  iterations: {}  rejected: {}  final t: {:.3e}  time: {:.3}s",
        r.status.name(),
        r.iterations,
        r.rejected,
        r.final_t,
        r.elapsed_s
    );
    let Some(eq) = &r.equilibrium else { return };
    println!("realization plans:");
    for (i, p) in eq.plan.iter().enumerate() {
        println!("  player {}: {}", i + 1, fmt_weights(p));
    }
    if let Some(mixed) = &eq.mixed {
        println!("mixed strategies:");
        for (i, p) in mixed.iter().enumerate() {
            println!("  player {}: {}", i + 1, fmt_weights(p));
        }
    }
    println!("payoffs: {}", eq.payoffs.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", "));
    println!("certificates:");
    print_cert("nash", &eq.nash);
    if let Some(w) = &eq.proper {
        println!("  witness at t={:.3e}, eps={:.3e}", w.t, w.epsilon);
        print_cert("proper-sf", &w.sequence_form);
        if let Some(l) = &w.lift {
            print_cert("proper-nf (lift)", &l.certificate);
        }
    }
    if let Some(c) = &r.equilibrium.as_ref().and_then(|e| e.catalog.clone()) {
        println!("catalog: entry {} at distance {:.3e} ({})", c.index, c.distance.min(c.plan_distance), if c.within_tol { "match" } else { "no match" });
    }
}

enum Candidate {
    Mixed(MixedProfile),
    Plan(RealizationProfile),
}

fn parse_candidate(sf: &SequenceForm, v: &Value) -> anyhow::Result<Candidate> {
    if let Some(eq) = v.get("equilibrium") {
        let plan = eq.get("plan").ok_or_else(|| anyhow!("report has no equilibrium plan"))?;
        return parse_candidate(sf, plan);
    }
    if let Some(c) = v.get("candidate") {
        return parse_candidate(sf, c);
    }
    let players = v.as_array().ok_or_else(|| anyhow!("candidate must be an array with one entry per player"))?;
    if players.len() != sf.num_players {
        bail!("candidate has {} players, game has {}", players.len(), sf.num_players);
    }
    let all_numeric = players.iter().all(|p| p.as_array().is_some_and(|a| a.iter().all(Value::is_number)));
    if all_numeric {
        let weights = players
            .iter()
            .map(|p| p.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect())
            .collect();
        return Ok(Candidate::Mixed(MixedProfile::new(weights)));
    }
    let mut plans = Vec::with_capacity(players.len());
    for (i, p) in players.iter().enumerate() {
        let pairs: Vec<(String, f64)> = match p {
            Value::Object(m) => m
                .iter()
                .map(|(k, x)| Ok((k.clone(), x.as_f64().ok_or_else(|| anyhow!("weight for {k} is not a number"))?)))
                .collect::<anyhow::Result<_>>()?,
            Value::Array(a) => a
                .iter()
                .map(|e| match e.as_array().map(Vec::as_slice) {
                    Some([Value::String(l), x]) => {
                        Ok((l.clone(), x.as_f64().ok_or_else(|| anyhow!("weight for {l} is not a number"))?))
                    }
                    _ => Err(anyhow!("player {} entry must be [label, weight]", i + 1)),
                })
                .collect::<anyhow::Result<_>>()?,
            _ => bail!("player {} entry must be an array or object", i + 1),
        };
        let mut g = vec![0.0; sf.players[i].len()];
        g[0] = 1.0;
        for (l, x) in pairs {
            let s = sf.sequence_index(i, &l).ok_or_else(|| Error::UnknownSequence(format!("player {}: {l}", i + 1)))?;
            g[s] = x;
        }
        plans.push(g);
    }
    Ok(Candidate::Plan(RealizationProfile::new(plans)))
}

fn cmd_verify(a: VerifyArgs) -> anyhow::Result<u8> {
    let game = load_game(&a.game)?;
    let sf = build_sequence_form(&game);
    let cand = parse_candidate(&sf, &read_json(&a.candidate)?)?;
    let cert = match a.definition {
        DefinitionArg::ProperNf => {
            let nf = build_normal_form(&game, 1_000_000)?;
            let sigma = match cand {
                Candidate::Mixed(s) => s,
                Candidate::Plan(g) => mixed_from_plan(&sf, &nf.strategies, &g)?.profile,
            };
            if sigma.weights.iter().flatten().all(|&x| x > 0.0) {
                check_eps_proper_nf(&nf, &sigma, a.eps)?
            } else {
                eprintln!("note: candidate is not totally mixed; only the closure condition is checked");
                check_eps_proper_nf_closure(&nf, &sigma, a.eps)?
            }
        }
        d => {
            let gamma = match cand {
                Candidate::Plan(g) => g,
                Candidate::Mixed(s) => {
                    let nf = build_normal_form(&game, 1_000_000)?;
                    realization_of(&sf, &nf.strategies, &s)?
                }
            };
            match d {
                DefinitionArg::ProperSf => check_eps_proper_sf(&sf, &gamma, a.eps)?,
                DefinitionArg::PerfectSf => check_eps_perfect_sf(&sf, &gamma, a.eps)?,
                DefinitionArg::QuasiPerfect => check_eps_quasi_perfect_sf(&sf, &gamma, a.eps)?,
                DefinitionArg::QuasiProper => check_eps_quasi_proper_sf(&sf, &gamma, a.eps)?,
                DefinitionArg::Nash => check_nash_sequence_form(&sf, &gamma, a.eps)?,
                DefinitionArg::ProperNf => unreachable!(),
            }
        }
    };
    if a.json {
        println!("{}", serde_json::to_string_pretty(&cert)?);
    } else {
        println!("definition: {:?}", cert.definition);
        print_cert("result", &cert);
        for v in &cert.violations {
            println!("  violation: {}", serde_json::to_string(v)?);
        }
    }
    Ok(if cert.pass { 0 } else { EXIT_CERT_FAIL })
}

fn cmd_generate(a: GenerateArgs) -> anyhow::Result<u8> {
    let kind = if a.kind == 1 { GeneratorKind::Type1 } else { GeneratorKind::Type2 };
    let g = generate_random(&GeneratorParams::new(kind, a.n, a.depth, a.actions, a.seed))?;
    write_text(a.out.as_deref(), serialize_game(&g).trim_end())?;
    Ok(0)
}

fn cmd_bench(a: BenchArgs) -> anyhow::Result<u8> {
    let mut cfg: BenchConfig = match &a.grid {
        Some(p) => serde_json::from_value(read_json(p)?).context("grid config")?,
        None => BenchConfig::default(),
    };
    if let Some(r) = a.runs {
        cfg.runs = r;
    }
    if a.threads.is_some() {
        cfg.threads = a.threads;
    }
    let report = run_bench(&cfg)?;
    let mut buf = Vec::new();
    write_csv(&report.summaries, &mut buf)?;
    write_text(a.out.as_deref(), String::from_utf8(buf)?.trim_end())?;
    if let Some(p) = &a.json_out {
        std::fs::write(p, serde_json::to_string_pretty(&report)?)?;
    }
    let failed = report.summaries.iter().any(|s| s.failures > 0);
    Ok(if failed { EXIT_CAP } else { 0 })
}

fn cmd_inspect(a: InspectArgs) -> anyhow::Result<u8> {
    let game = load_game(&a.game)?;
    let v = match a.form {
        FormArg::Normal => normal_form_json(&build_normal_form(&game, 1_000_000)?),
        FormArg::Sequence => sequence_form_json(&build_sequence_form(&game)),
        FormArg::Perturbation => {
            let sf = build_sequence_form(&game);
            perturbation_json(&sf, &enumerate_perturbation_sets(&sf, DEFAULT_FAMILY_CAP)?)
        }
    };
    println!("{}", serde_json::to_string_pretty(&v)?);
    Ok(0)
}
