use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use stin_core::config::Config;
use stin_core::embedding::{embed, validate_embedding, Layout, LayoutFile};
use stin_core::instance_gen::{
    build_orbital_triple, parse_tle, read_sites, read_suite, synth_suite, write_suite, InstanceTriple, RegionSpec,
};
use stin_core::io::{self, Instance};
use stin_core::pipeline::{bench, run_pipeline, verify_chain, write_bench, SolverKind};
use stin_core::postprocess::refine;
use stin_core::rydberg::run_qaa;
use stin_core::solvers::{greedy_mwis, gsp_bruteforce, gsp_solve, mwis_bruteforce, mwis_exact, sap_solve, SapMode};

/// Satellite selection, gateway assignment and spectrum assignment with a
/// simulated neutral-atom MWIS solver.
#[derive(Parser)]
#[command(name = "stin", version)]
struct Cli {
    /// Root seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for generated files.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// TOML (or .json) configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build instance triples, synthetic or from orbital data.
    Generate(GenerateArgs),
    /// Embed an SSP instance into the atom register.
    Embed(EmbedArgs),
    /// Solve a single SSP, GSP or SAP instance classically.
    Solve(SolveArgs),
    /// Simulate the adiabatic protocol on an embedded SSP instance.
    Simulate(SimulateArgs),
    /// Run SSP -> GSP -> SAP chains on one or more triples.
    Pipeline(PipelineArgs),
    /// Three-way comparison over a suite, with CSV tables.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of synthetic triples.
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 5)]
    n_min: usize,
    #[arg(long, default_value_t = 12)]
    n_max: usize,
    /// TLE file; switches to the orbital scenario builder.
    #[arg(long, requires_all = ["region", "sites"])]
    tle: Option<PathBuf>,
    /// Region JSON `{"boundary": [[lat, lon], ...], "covered": [...]}`.
    #[arg(long)]
    region: Option<PathBuf>,
    /// Sites CSV `name,lat,lon,kind`.
    #[arg(long)]
    sites: Option<PathBuf>,
    /// Identifier of the orbital triple.
    #[arg(long, default_value = "scenario")]
    id: String,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    epochs: Option<usize>,
    /// Layout output; defaults to `<out-dir>/layout.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report output; defaults to `<out-dir>/embedding_report.json`.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// ssp: exact | greedy | bruteforce; gsp: exact | bruteforce; sap: exact | dsatur.
    #[arg(long, default_value = "exact")]
    method: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    layout: PathBuf,
    #[arg(long)]
    shots: Option<usize>,
}

#[derive(Args)]
struct PipelineArgs {
    /// A triple directory or a directory of triples.
    #[arg(long)]
    suite: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "qaa,exact,greedy")]
    solvers: Vec<SolverKind>,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite directory; a synthetic suite is generated when absent.
    #[arg(long)]
    suite: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 5)]
    n_min: usize,
    #[arg(long, default_value_t = 12)]
    n_max: usize,
    #[arg(long, value_delimiter = ',', default_value = "qaa,exact,greedy")]
    solvers: Vec<SolverKind>,
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    io::write_json(path, value)?;
    Ok(())
}

fn read_ssp(path: &Path) -> anyhow::Result<stin_core::WeightedGraph> {
    match io::read_any_instance(path)? {
        Instance::Ssp(g) => Ok(g),
        other => bail!("{} holds a {:?} instance, expected ssp", path.display(), other.kind()),
    }
}

fn load_triples(dir: &Path) -> anyhow::Result<Vec<InstanceTriple>> {
    if dir.join("ssp.json").is_file() {
        return Ok(vec![InstanceTriple::read_dir(dir)?]);
    }
    let suite = read_suite(dir)?;
    if suite.is_empty() {
        bail!("no instance triples under {}", dir.display());
    }
    Ok(suite)
}

fn generate(cli: &Cli, cfg: &Config, a: &GenerateArgs) -> anyhow::Result<()> {
    let suite = match &a.tle {
        Some(tle) => {
            let text = fs::read_to_string(tle).with_context(|| format!("reading {}", tle.display()))?;
            let records = parse_tle(&text)?;
            let region: RegionSpec = io::read_json(a.region.as_ref().expect("required by clap"))?;
            let sites = read_sites(a.sites.as_ref().expect("required by clap"))?;
            vec![build_orbital_triple(&a.id, &records, region, &sites, &cfg.scenario)?]
        }
        None => synth_suite(cli.seed, a.count, [a.n_min, a.n_max]),
    };
    write_suite(&cli.out_dir, &suite)?;
    for t in &suite {
        println!("{}: {} satellites, {} overlaps", t.id, t.ssp.n(), t.ssp.edges().len());
    }
    Ok(())
}

fn embed_cmd(cli: &Cli, cfg: &Config, a: &EmbedArgs) -> anyhow::Result<()> {
    let g = read_ssp(&a.instance)?;
    let mut ecfg = cfg.embed.clone();
    if let Some(e) = a.epochs {
        ecfg.den.epochs = e;
    }
    let out = embed(&g, &cfg.geometry, &ecfg, cli.seed)?;
    let layout_path = a.out.clone().unwrap_or_else(|| cli.out_dir.join("layout.json"));
    let report_path = a
        .report
        .clone()
        .unwrap_or_else(|| cli.out_dir.join("embedding_report.json"));
    let file = LayoutFile {
        coords: out.layout.coords.clone(),
        geometry: cfg.geometry,
    };
    write_json(&layout_path, &file)?;
    write_json(&report_path, &out.report)?;
    println!(
        "d = {:.3} um, D = {}, unit-disk: {}, violations: {}",
        out.report.d,
        out.report.big_d.map_or("inf".to_string(), |d| format!("{d:.3} um")),
        out.report.is_unit_disk,
        out.report.constraint_violations.len()
    );
    Ok(())
}

fn solve_cmd(cli: &Cli, cfg: &Config, a: &SolveArgs) -> anyhow::Result<()> {
    let inst = io::read_any_instance(&a.instance)?;
    let value = match (&inst, a.method.as_str()) {
        (Instance::Ssp(g), "exact") => serde_json::to_value(mwis_exact(g, cfg.budgets.exact_budget()))?,
        (Instance::Ssp(g), "greedy") => serde_json::to_value(greedy_mwis(g))?,
        (Instance::Ssp(g), "bruteforce") => serde_json::to_value(mwis_bruteforce(g)?)?,
        (Instance::Gsp(b), "exact") => serde_json::to_value(gsp_solve(b))?,
        (Instance::Gsp(b), "bruteforce") => serde_json::to_value(gsp_bruteforce(b)?)?,
        (Instance::Sap(c), m) => serde_json::to_value(sap_solve(c, m.parse::<SapMode>()?)?)?,
        (i, m) => bail!("method {m:?} is not available for {:?} instances", i.kind()),
    };
    let out = a.out.clone().unwrap_or_else(|| cli.out_dir.join("solution.json"));
    write_json(&out, &value)?;
    println!("objective {} ({})", value["objective"], value["status"]);
    Ok(())
}

fn simulate_cmd(cli: &Cli, cfg: &Config, a: &SimulateArgs) -> anyhow::Result<()> {
    let g = read_ssp(&a.instance)?;
    let file: LayoutFile = io::read_json(&a.layout)?;
    let layout = Layout::new(file.coords);
    let report = validate_embedding(&layout, &g, &file.geometry)?;
    if !report.is_feasible() {
        bail!(
            "layout violates the register constraints: {:?}",
            report.constraint_violations
        );
    }
    let shots = a.shots.unwrap_or(cfg.budgets.shots);
    let run = run_qaa(&g, &layout, &file.geometry, &cfg.physics, shots, cli.seed)?;
    let outcome = refine(&run.shots, &g)?;
    write_json(&cli.out_dir.join("shots.json"), &run.shots)?;
    write_json(&cli.out_dir.join("schedule.json"), &run.schedule)?;
    write_json(&cli.out_dir.join("refinement.json"), &outcome)?;
    println!(
        "best objective {} from {:?}; {} of {} shots not independent",
        outcome.best.objective(),
        outcome.best.members(),
        outcome.n_nonindependent,
        shots
    );
    Ok(())
}

fn pipeline_cmd(cli: &Cli, cfg: &Config, a: &PipelineArgs) -> anyhow::Result<()> {
    for t in load_triples(&a.suite)? {
        for &s in &a.solvers {
            match run_pipeline(&t, s, cfg, cli.seed) {
                Ok(art) => {
                    verify_chain(&t, &art.report)?;
                    art.write_dir(cli.out_dir.join(&t.id).join(s.name()))?;
                    let r = &art.report;
                    println!(
                        "{} {s}: ssp {} | M {} | bands {} (cost {})",
                        t.id, r.ssp.objective, r.gsp.objective, r.sap.bands_used, r.sap.objective
                    );
                }
                Err(e) => eprintln!("{} {s}: {e}", t.id),
            }
        }
    }
    Ok(())
}

fn bench_cmd(cli: &Cli, cfg: &Config, a: &BenchArgs) -> anyhow::Result<()> {
    let suite = match &a.suite {
        Some(dir) => load_triples(dir)?,
        None => synth_suite(cli.seed, a.count, [a.n_min, a.n_max]),
    };
    let out = bench(&suite, &a.solvers, cfg, cli.seed)?;
    write_bench(&cli.out_dir, &out)?;
    let s = &out.summary;
    println!("{} instances, {} with failures", s.instances, s.failures);
    let pct = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{:+.3}%", 100.0 * v));
    println!(
        "mean improvement qaa vs greedy: {}",
        pct(s.mean_improvements.qaa_vs_greedy)
    );
    println!(
        "mean improvement qaa vs exact:  {}",
        pct(s.mean_improvements.qaa_vs_exact)
    );
    for d in &s.divergences {
        println!("JS[{}] {} vs {}: {:.6}", d.stage, d.a, d.b, d.js);
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(p) => Config::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => Config::default(),
    };
    match &cli.command {
        Command::Generate(a) => generate(&cli, &cfg, a),
        Command::Embed(a) => embed_cmd(&cli, &cfg, a),
        Command::Solve(a) => solve_cmd(&cli, &cfg, a),
        Command::Simulate(a) => simulate_cmd(&cli, &cfg, a),
        Command::Pipeline(a) => pipeline_cmd(&cli, &cfg, a),
        Command::Bench(a) => bench_cmd(&cli, &cfg, a),
    }
}
