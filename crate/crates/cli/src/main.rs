use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lowdeg_cli::config::{ExperimentConfig, Kind};
use lowdeg_cli::record::collect;
use lowdeg_cli::{execute, exit_code, persist, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME};

#[derive(Parser)]
#[command(name = "lowdeg", version, about = "Low-degree advantage and total-variation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct RunArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory for records and tables.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Extra `key=value` settings applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Krawtchouk orthonormality and pointwise bound checks.
    OrthoVerify(RunArgs),
    /// Certified TV bound versus the exact noisy TV for a biased product.
    BinomTv(RunArgs),
    /// Degree-D advantage for a chosen model.
    Ldlr(RunArgs),
    /// Histogram TV and cf gap of the symmetric statistic F_k.
    SymTv(RunArgs),
    /// Characteristic-function regime checks on a random polynomial corpus.
    CfVerify(RunArgs),
    /// TV of signed subgraph counts between null and noisy spiked Wigner.
    SubgraphTv(RunArgs),
    /// Certified bound sweep over the standard Boolean corpus.
    Sweep(RunArgs),
    /// Aggregate JSON records matched by glob patterns.
    Report {
        patterns: Vec<String>,
        /// Directory for `report.csv`.
        #[arg(long)]
        out: Option<String>,
    },
}

fn resolve(kind: Kind, args: &RunArgs) -> Result<ExperimentConfig, String> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            ExperimentConfig::parse(&text, Some(kind)).map_err(|e| e.to_string())?
        }
        None => ExperimentConfig::defaults(kind),
    };
    for kv in &args.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
        cfg.set(k.trim(), v.trim()).map_err(|e| e.to_string())?;
    }
    if let Some(s) = args.seed {
        cfg.set("seed", &s.to_string()).map_err(|e| e.to_string())?;
    }
    if let Some(t) = args.threads {
        cfg.set("threads", &t.to_string()).map_err(|e| e.to_string())?;
    }
    if let Some(o) = &args.out {
        cfg.set("out", o).map_err(|e| e.to_string())?;
    }
    Ok(cfg)
}

fn run(kind: Kind, args: RunArgs) -> i32 {
    let cfg = match resolve(kind, &args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    if args.dry_run {
        print!("{}", cfg.serialize());
        return EXIT_OK;
    }
    let (record, out) = match execute(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{kind} failed: {e:?}");
            return exit_code(&e);
        }
    };
    if let Err(e) = persist(std::path::Path::new(cfg.text("out")), &record, &out.table) {
        eprintln!("cannot write results: {e}");
        return EXIT_RUNTIME;
    }
    match args.format {
        Format::Csv => print!("{}", out.table),
        Format::Json => println!("{}", serde_json::to_string_pretty(&record).expect("record serializes")),
    }
    if record.pass {
        EXIT_OK
    } else {
        eprintln!("{kind}: property check failed");
        EXIT_CHECK_FAILED
    }
}

fn report(patterns: Vec<String>, out: Option<String>) -> i32 {
    let rep = match collect(&patterns) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("report: {e}");
            return EXIT_CONFIG;
        }
    };
    for (path, err) in &rep.malformed {
        eprintln!("skipping malformed record {}: {err}", path.display());
    }
    print!("{}", rep.table());
    if let Some(dir) = out {
        let dir = PathBuf::from(dir);
        if let Err(e) = std::fs::create_dir_all(&dir).and_then(|_| std::fs::write(dir.join("report.csv"), rep.csv())) {
            eprintln!("cannot write report: {e}");
            return EXIT_RUNTIME;
        }
    }
    EXIT_OK
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::OrthoVerify(a) => run(Kind::OrthoVerify, a),
        Command::BinomTv(a) => run(Kind::BinomTv, a),
        Command::Ldlr(a) => run(Kind::Ldlr, a),
        Command::SymTv(a) => run(Kind::SymTv, a),
        Command::CfVerify(a) => run(Kind::CfVerify, a),
        Command::SubgraphTv(a) => run(Kind::SubgraphTv, a),
        Command::Sweep(a) => run(Kind::Sweep, a),
        Command::Report { patterns, out } => report(patterns, out),
    };
    ExitCode::from(code as u8)
}
