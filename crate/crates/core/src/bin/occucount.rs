use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use occucount::env::{
    parse_activation_lines, parse_activation_record, parse_environment, project_lines,
    write_activation_lines, ActivationLine, EnvironmentModel,
};
use occucount::eval::{compare_pipelines, write_csv, EvalReport, Improvement, ReportRow};
use occucount::experiment::{report_rows, run_experiment, ExperimentConfig};
use occucount::hmm::{Hmm, HmmParams};
use occucount::infer::WindowConfig;
use occucount::learn::{count_classes, fit_params, LabeledSequence};
use occucount::pipeline::{Counter, Pipeline};
use occucount::sim::{parse_graph, simulate, validate_graph, MovementGraph, SimConfig};
use occucount::{Error, Result};

#[derive(Parser)]
#[command(
    name = "occucount",
    version,
    about = "Person counting from binary sensor activations"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a labeled dataset by multi-agent random walks.
    Simulate(SimulateArgs),
    /// Fit HMM parameters from a labeled dataset.
    Fit(FitArgs),
    /// Count persons per tick (batch, or streaming from stdin).
    Count(CountArgs),
    /// Score predicted counts against a labeled dataset.
    Eval(EvalArgs),
    /// Simulate, fit, count and evaluate over a grid of omegas.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct EnvArgs {
    /// Environment config.
    #[arg(long)]
    env: PathBuf,
    /// Override the environment's omega.
    #[arg(long)]
    omega: Option<u32>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    agents: u32,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write columns of this (sparser) environment instead.
    #[arg(long)]
    observe_env: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    env: EnvArgs,
    /// Labeled dataset.
    #[arg(long)]
    input: PathBuf,
    /// Parameter file to write; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    env: EnvArgs,
    /// Dataset to count; `-` or absent reads stdin line by line.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    params: Option<PathBuf>,
    /// Use built-in placeholder parameters for csp+hmm.
    #[arg(long)]
    default_params: bool,
    #[arg(long, default_value_t = 10)]
    window: usize,
    #[arg(long, default_value = "csp+hmm")]
    pipeline: Pipeline,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    env: EnvArgs,
    /// Labeled dataset holding the ground truth.
    #[arg(long)]
    truth: PathBuf,
    /// Counts file to score.
    #[arg(long)]
    pred: PathBuf,
    /// Optional CSP-only counts file to compare against.
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// CSV report path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Environment the agents move in.
    #[arg(long)]
    env: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    /// Count on this sensor layout instead (FoIs matched by id).
    #[arg(long)]
    observe_env: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "4,6,8,10")]
    omegas: Vec<u32>,
    /// Agent counts; defaults to one cell with agents = omega.
    #[arg(long, value_delimiter = ',')]
    agents: Option<Vec<u32>>,
    #[arg(long, default_value_t = 10)]
    runs: u32,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 1000)]
    train_steps: usize,
    #[arg(long, default_value_t = 10)]
    window: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    params: Option<PathBuf>,
    /// Output directory for report.csv.
    #[arg(long)]
    out: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn load_env(path: &Path, omega: Option<u32>) -> Result<EnvironmentModel> {
    let env = parse_environment(&read(path)?).map_err(|source| Error::Config {
        path: path.display().to_string(),
        source,
    })?;
    Ok(match omega {
        Some(w) => env.with_omega(w)?,
        None => env,
    })
}

fn load_graph(path: &Path, env: &EnvironmentModel) -> Result<MovementGraph> {
    let g = parse_graph(&read(path)?)?;
    for w in validate_graph(env, &g)? {
        eprintln!("warning: {}: {w:?}", path.display());
    }
    Ok(g)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) if p != Path::new("-") => {
            Box::new(BufWriter::new(fs::File::create(p).map_err(io_err(p))?))
        }
        _ => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_counts(path: &Path) -> Result<Vec<u32>> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(t.parse().map_err(|_| {
            Error::Usage(format!("{}:{}: invalid count `{t}`", path.display(), i + 1))
        })?);
    }
    Ok(out)
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let env = load_env(&a.env.env, a.env.omega)?;
    let graph = load_graph(&a.graph, &env)?;
    let cfg = SimConfig {
        num_agents: a.agents,
        steps: a.steps,
        seed: a.seed,
    };
    let mut lines = simulate(&env, &graph, &cfg)?;
    if let Some(p) = &a.observe_env {
        let observed = load_env(p, Some(env.omega()))?;
        lines = project_lines(&env, &observed, &lines);
    }
    let mut out = output(a.out.as_deref())?;
    let w = |e| Error::Io {
        path: "output".into(),
        source: e,
    };
    writeln!(
        out,
        "# occucount simulate env={} graph={} agents={} steps={} seed={} omega={}{}",
        a.env.env.display(),
        a.graph.display(),
        a.agents,
        a.steps,
        a.seed,
        env.omega(),
        a.observe_env
            .map(|p| format!(" observe_env={}", p.display()))
            .unwrap_or_default()
    )
    .map_err(w)?;
    out.write_all(write_activation_lines(&lines).as_bytes())
        .map_err(w)?;
    out.flush().map_err(w)
}

fn cmd_fit(a: FitArgs) -> Result<()> {
    let env = load_env(&a.env.env, a.env.omega)?;
    let lines = parse_activation_lines(&read(&a.input)?, &env)?;
    if lines.is_empty() {
        return Err(Error::Usage(format!(
            "{}: empty dataset",
            a.input.display()
        )));
    }
    if let Some(i) = lines.iter().position(|l| l.label.is_none()) {
        return Err(Error::Usage(format!(
            "{}: record {} has no label (fit needs a fully labeled dataset)",
            a.input.display(),
            i + 1
        )));
    }
    let data = LabeledSequence::new(&env, lines)?;
    let counts = count_classes(&data, env.omega());
    for t in &counts.impossible_ticks {
        eprintln!("warning: tick {t}: entry bit of state and observation disagree");
    }
    let params = fit_params(&counts)?;
    eprintln!(
        "transitions: static={} likely={} unlikely={}; emissions: correct={} probable={} unprobable={}",
        counts.static_,
        counts.likely,
        counts.unlikely,
        counts.correct,
        counts.probable,
        counts.unprobable
    );
    let mut out = output(a.out.as_deref())?;
    let w = |e| Error::Io {
        path: "output".into(),
        source: e,
    };
    writeln!(
        out,
        "# fitted from {} ({} ticks)",
        a.input.display(),
        data.len()
    )
    .map_err(w)?;
    out.write_all(params.to_text().as_bytes()).map_err(w)?;
    out.flush().map_err(w)
}

fn cmd_count(a: CountArgs) -> Result<()> {
    let env = load_env(&a.env.env, a.env.omega)?;
    let window = WindowConfig::new(a.window)?;
    let (model, params_note) = match (a.pipeline, &a.params, a.default_params) {
        (Pipeline::Csp, _, _) => (None, "none".to_string()),
        (Pipeline::CspHmm, Some(p), _) => (
            Some(Hmm::new(&HmmParams::load(p)?, env.omega())?),
            p.display().to_string(),
        ),
        (Pipeline::CspHmm, None, true) => {
            eprintln!("warning: using default (unlearned) HMM parameters");
            (
                Some(Hmm::new(&HmmParams::default(), env.omega())?),
                "defaults".to_string(),
            )
        }
        (Pipeline::CspHmm, None, false) => {
            return Err(Error::Usage(
                "pipeline csp+hmm needs --params or --default-params".into(),
            ))
        }
    };
    let mut counter = match &model {
        Some(m) => Counter::csp_hmm(&env, m, window),
        None => Counter::csp(&env),
    };
    let mut out = output(a.out.as_deref())?;
    let w = |e| Error::Io {
        path: "output".into(),
        source: e,
    };
    let input_name = a
        .input
        .as_ref()
        .map_or("-".to_string(), |p| p.display().to_string());
    writeln!(
        out,
        "# occucount count env={} input={} pipeline={} window={} params={} omega={}",
        a.env.env.display(),
        input_name,
        a.pipeline,
        a.window,
        params_note,
        env.omega()
    )
    .map_err(w)?;

    let mut emit = |line: &ActivationLine, out: &mut Box<dyn Write>| -> Result<()> {
        let c = counter.push(line)?;
        writeln!(out, "{c}").map_err(w)
    };
    match a.input.as_deref() {
        Some(p) if p != Path::new("-") => {
            for line in parse_activation_lines(&read(p)?, &env)? {
                emit(&line, &mut out)?;
            }
        }
        _ => {
            out.flush().map_err(w)?;
            for (i, raw) in io::stdin().lock().lines().enumerate() {
                let raw = raw.map_err(io_err(Path::new("stdin")))?;
                if let Some(line) = parse_activation_record(&raw, i + 1, &env)? {
                    emit(&line, &mut out)?;
                    out.flush().map_err(w)?;
                }
            }
        }
    }
    out.flush().map_err(w)
}

fn describe(name: &str, r: &EvalReport) -> String {
    let d = r
        .mean_distance
        .map_or("n/a".to_string(), |d| format!("{d:.3}"));
    format!(
        "{name}: accuracy={:.4} mean_distance={d} ticks={}",
        r.accuracy, r.n_ticks
    )
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let env = load_env(&a.env.env, a.env.omega)?;
    let truth: Vec<u32> = parse_activation_lines(&read(&a.truth)?, &env)?
        .iter()
        .enumerate()
        .map(|(i, l)| {
            l.label.ok_or_else(|| {
                Error::Usage(format!(
                    "{}: record {} has no label",
                    a.truth.display(),
                    i + 1
                ))
            })
        })
        .collect::<Result<_>>()?;
    let pred = read_counts(&a.pred)?;
    let mut rows: Vec<ReportRow>;
    match &a.baseline {
        None => {
            let r = EvalReport::new(&pred, &truth)?;
            println!("{}", describe("pred", &r));
            rows = ReportRow::from_report(env.omega(), 0, "0", "pred", &r, None);
        }
        Some(b) => {
            let base = read_counts(b)?;
            let c = compare_pipelines(&base, &pred, &truth)?;
            println!("{}", describe("csp", &c.csp));
            println!("{}", describe("csp+hmm", &c.csp_hmm));
            match c.improvement {
                Improvement::Relative(r) => println!("relative improvement: {:+.1}%", r * 100.0),
                Improvement::Absolute(d) => {
                    println!("absolute improvement: {d:+.4} (baseline accuracy is 0)")
                }
            }
            rows = ReportRow::from_report(env.omega(), 0, "0", "csp", &c.csp, None);
            rows.extend(ReportRow::from_report(
                env.omega(),
                0,
                "0",
                "csp+hmm",
                &c.csp_hmm,
                Some(c.improvement),
            ));
        }
    }
    if let Some(p) = &a.out {
        write_csv(fs::File::create(p).map_err(io_err(p))?, &rows)?;
    }
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs) -> Result<()> {
    let env = load_env(&a.env, None)?;
    let graph = load_graph(&a.graph, &env)?;
    let mut cfg = ExperimentConfig::new(env, graph);
    if let Some(p) = &a.observe_env {
        cfg.observed = Some(load_env(p, None)?);
    }
    cfg.omegas = a.omegas;
    cfg.agents = a.agents;
    cfg.runs = a.runs;
    cfg.steps = a.steps;
    cfg.train_steps = a.train_steps;
    cfg.window = WindowConfig::new(a.window)?;
    cfg.seed = a.seed;
    if let Some(p) = &a.params {
        cfg.params = Some(HmmParams::load(p)?);
    }
    let cells = run_experiment(&cfg)?;
    fs::create_dir_all(&a.out).map_err(io_err(&a.out))?;
    let report = a.out.join("report.csv");
    write_csv(
        fs::File::create(&report).map_err(io_err(&report))?,
        &report_rows(&cells),
    )?;
    for c in &cells {
        let imp = match c.improvement() {
            Improvement::Relative(r) => format!("{:+.1}%", r * 100.0),
            Improvement::Absolute(d) => format!("{d:+.4} abs"),
        };
        println!(
            "omega={} agents={} csp={:.4} csp+hmm={:.4} improvement={imp}",
            c.omega, c.agents, c.pooled.csp.accuracy, c.pooled.csp_hmm.accuracy
        );
    }
    println!("wrote {}", report.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Simulate(a) => cmd_simulate(a),
        Cmd::Fit(a) => cmd_fit(a),
        Cmd::Count(a) => cmd_count(a),
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Experiment(a) => cmd_experiment(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
