use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dtpn::expand::{check_equivalence, enumerate_markings, expand, Status};
use dtpn::io::{self, Document};
use dtpn::qss::{self, RescaleMode};
use dtpn::scg::{classify_net, explore, Limits};
use dtpn::semantics::{simulate, Stop, Strategy};
use dtpn::{Error, Net, Rational};

#[derive(Parser)]
#[command(
    name = "dtpn",
    version,
    about = "Time Petri nets with dynamic firing dates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the state class graph.
    Scg(ScgArgs),
    /// Simulate one run.
    Sim(SimArgs),
    /// Expand a bounded weak net into a 1-safe time Petri net.
    Expand(ExpandArgs),
    /// Expand, then compare the two nets up to a trace depth.
    Checkeq(CheckArgs),
}

#[derive(Args)]
struct Common {
    /// Model file (`net` or `ode` document).
    model: PathBuf,
    /// Rescaling of fickle dates in coupled QSS models.
    #[arg(long, value_enum)]
    qss_mode: Option<QssMode>,
    /// Write the export here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Exit with status 3 when a resource limit is hit.
    #[arg(long)]
    strict: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct ScgArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 10_000_000)]
    max_classes: usize,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Include firing domains in DOT labels.
    #[arg(long)]
    domains: bool,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    common: Common,
    /// earliest, latest or random[:SEED].
    #[arg(long, default_value = "earliest")]
    strategy: String,
    /// Seed for `--strategy random`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "1000")]
    horizon: Rational,
    #[arg(long, default_value_t = 10_000)]
    max_steps: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct ExpandArgs {
    #[command(flatten)]
    common: Common,
    /// Maximum number of reachable configurations.
    #[arg(long, default_value_t = 10_000)]
    cap: usize,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 10_000)]
    cap: usize,
    #[arg(long, default_value_t = 6)]
    depth: usize,
    #[arg(long, default_value_t = 1_000_000)]
    max_classes: usize,
    /// Write the JSON report (to `--output` or standard output).
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Dot,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum QssMode {
    Physical,
    Paper,
}

enum Failure {
    Usage(String),
    Model(Error),
    Limit(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::OverCap { .. } => Failure::Limit(e.to_string()),
            e => Failure::Model(e),
        }
    }
}

type Out<T> = std::result::Result<T, Failure>;

struct Model {
    net: Net,
    ode: Option<qss::OdeSpec>,
}

fn load(c: &Common) -> Out<Model> {
    let text = fs::read_to_string(&c.model)
        .map_err(|e| Failure::Io(format!("{}: {e}", c.model.display())))?;
    match io::parse_document(&text).map_err(|e| Failure::Model(Error::Parse(e)))? {
        Document::Net(d) => {
            if c.qss_mode.is_some() {
                return Err(Failure::Usage(
                    "--qss-mode only applies to ode models".into(),
                ));
            }
            Ok(Model {
                net: d.net,
                ode: None,
            })
        }
        Document::Ode(mut spec) => {
            match c.qss_mode {
                Some(QssMode::Physical) => spec.mode = RescaleMode::Physical,
                Some(QssMode::Paper) => spec.mode = RescaleMode::RateRatio,
                None => {}
            }
            Ok(Model {
                net: spec.build()?,
                ode: Some(spec),
            })
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> Out<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_with(
    path: Option<&Path>,
    f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Out<()> {
    let shown = path.map_or("standard output".to_string(), |p| p.display().to_string());
    let fail = |e: std::io::Error| Failure::Io(format!("{shown}: {e}"));
    let mut w: BufWriter<Box<dyn Write>> = match path {
        Some(p) => BufWriter::new(Box::new(fs::File::create(p).map_err(fail)?)),
        None => BufWriter::new(Box::new(std::io::stdout().lock())),
    };
    f(&mut w).and_then(|()| w.flush()).map_err(fail)
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn cmd_scg(a: &ScgArgs) -> Out<()> {
    let m = load(&a.common)?;
    let limits = Limits {
        max_classes: a.max_classes,
        max_depth: a.max_depth,
        workers: a.common.workers,
    };
    let start = Instant::now();
    let graph = explore(&m.net, &limits)?;
    let report = classify_net(&m.net)?;
    let stats = format!(
        "classes: {}\nedges: {}\nexact: {}\ntruncated: {}\ntime: {:.3}s\n",
        graph.class_count(),
        graph.edge_count(),
        yes(report.exact),
        yes(graph.truncated),
        start.elapsed().as_secs_f64()
    );
    let export = |path: Option<&Path>| -> Out<()> {
        match a.format {
            // streamed, since large graphs do not fit in memory as one value
            Some(Format::Json) => {
                emit_with(path, |w| io::write_json(w, &graph, &m.net, Some(&report)))
            }
            Some(Format::Dot) => emit(path, &io::export_dot(&graph, &m.net, a.domains)),
            Some(Format::Csv) => emit(path, &io::export_edges_csv(&graph, &m.net)),
            None => Ok(()),
        }
    };
    match (a.format, &a.common.output) {
        (Some(_), None) => {
            eprint!("{stats}");
            export(None)?;
        }
        (Some(_), Some(p)) => {
            print!("{stats}");
            export(Some(p))?;
        }
        (None, _) => print!("{stats}"),
    }
    if graph.truncated && a.common.strict {
        return Err(Failure::Limit(format!(
            "exploration stopped at {} classes",
            graph.class_count()
        )));
    }
    Ok(())
}

fn strategy(a: &SimArgs) -> Out<Strategy> {
    let (name, inline) = match a.strategy.split_once(':') {
        Some((n, s)) => (
            n,
            Some(
                s.parse::<u64>()
                    .map_err(|_| Failure::Usage(format!("bad seed `{s}`")))?,
            ),
        ),
        None => (a.strategy.as_str(), None),
    };
    match (name, inline, a.seed) {
        ("random", Some(x), Some(y)) if x != y => Err(Failure::Usage("conflicting seeds".into())),
        ("random", s, t) => Ok(Strategy::random(s.or(t).unwrap_or(0))),
        (_, Some(_), _) | (_, _, Some(_)) if name == "earliest" || name == "latest" => {
            Err(Failure::Usage(format!("strategy `{name}` takes no seed")))
        }
        ("earliest", None, None) => Ok(Strategy::earliest()),
        ("latest", None, None) => Ok(Strategy::latest()),
        _ => Err(Failure::Usage(format!("unknown strategy `{}`", a.strategy))),
    }
}

fn cmd_sim(a: &SimArgs) -> Out<()> {
    let s = strategy(a)?;
    let m = load(&a.common)?;
    let trace = simulate(&m.net, &s, &a.horizon, a.max_steps)?;
    let text = match (a.format, &m.ode) {
        (Format::Json, _) => io::export_trace_json(&trace, &m.net),
        (Format::Csv, Some(spec)) if s == Strategy::earliest() => {
            io::export_trajectory_csv(&qss::trajectory(&m.net, spec, &a.horizon, a.max_steps)?)
        }
        (Format::Csv, _) => io::export_trace_csv(&trace, &m.net),
        (Format::Dot, _) => return Err(Failure::Usage("traces export as json or csv".into())),
    };
    emit(a.common.output.as_deref(), &text)?;
    if trace.stop == Stop::MaxSteps && a.common.strict {
        return Err(Failure::Limit(format!(
            "stopped after {} steps",
            a.max_steps
        )));
    }
    Ok(())
}

fn cmd_expand(a: &ExpandArgs) -> Out<()> {
    let m = load(&a.common)?;
    let universe = enumerate_markings(&m.net, a.cap)?;
    let e = expand(&m.net, &universe)?;
    eprintln!(
        "configurations: {}\nplaces: {}\ntransitions: {}",
        universe.configs.len(),
        e.net.places.len(),
        e.net.transitions.len()
    );
    emit(a.common.output.as_deref(), &e.to_text(&m.net))
}

fn cmd_checkeq(a: &CheckArgs) -> Out<()> {
    let m = load(&a.common)?;
    let universe = enumerate_markings(&m.net, a.cap)?;
    let e = expand(&m.net, &universe)?;
    let limits = Limits {
        max_classes: a.max_classes,
        max_depth: None,
        workers: a.common.workers,
    };
    let r = check_equivalence(&m.net, &e, a.depth, &limits)?;
    let status = serde_json::to_value(r.status).expect("status serializes");
    let mut line = format!(
        "{} (depth {})",
        status.as_str().unwrap_or_default(),
        r.depth
    );
    if let Some(w) = &r.witness {
        line.push_str(&format!(": witness [{}]", w.join(", ")));
    }
    if let Some(v) = &r.property_violation {
        line.push_str(&format!(": {v}"));
    }
    if let Some(why) = &r.reason {
        line.push_str(&format!(": {why}"));
    }
    if a.json {
        eprintln!("{line}");
        emit(
            a.common.output.as_deref(),
            &io::pretty(&serde_json::to_value(&r).expect("reports serialize")),
        )?;
    } else {
        println!("{line}");
    }
    if r.status == Status::Inconclusive && a.common.strict {
        return Err(Failure::Limit("equivalence check inconclusive".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let workers = match &cli.command {
        Command::Scg(a) => a.common.workers,
        Command::Sim(a) => a.common.workers,
        Command::Expand(a) => a.common.workers,
        Command::Checkeq(a) => a.common.workers,
    };
    if workers == 0 {
        eprintln!("error: --workers must be at least 1");
        return ExitCode::from(1);
    }
    let result = match &cli.command {
        Command::Scg(a) => cmd_scg(a),
        Command::Sim(a) => cmd_sim(a),
        Command::Expand(a) => cmd_expand(a),
        Command::Checkeq(a) => cmd_checkeq(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Model(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Limit(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
