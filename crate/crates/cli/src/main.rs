use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use clpmc_core::generalize::GenOp;
use clpmc_core::harness::{bench, exit_code, run, RunConfig, RunReport, INPUT_ERROR_EXIT};
use clpmc_core::parse::parse_spec;
use clpmc_core::specialize::render_program;
use clpmc_core::wqo::FiringRelation;

#[derive(Parser)]
#[command(name = "clpmc", version, about = "CTL verification of infinite-state systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the property of one system file.
    Check {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
        /// Write the specialized program here.
        #[arg(long, value_name = "PATH")]
        emit_specialized: Option<PathBuf>,
        /// Write the computed facts here.
        #[arg(long, value_name = "PATH")]
        emit_model: Option<PathBuf>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run every `.spec` file of a directory and print a matrix.
    Bench {
        dir: PathBuf,
        /// Firing relations to combine (default: the single --firing value).
        #[arg(long = "firings", value_delimiter = ',', value_parser = parse_firing)]
        firings: Vec<FiringRelation>,
        /// Generalization operators to combine (default: the single --gen value).
        #[arg(long = "gens", value_delimiter = ',', value_parser = parse_gen)]
        gens: Vec<GenOp>,
        #[command(flatten)]
        opts: Opts,
        /// Print JSON instead of CSV.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct Opts {
    /// always, maxcoeff, sumcoeff or homeocoeff.
    #[arg(long, default_value = "always", value_parser = parse_firing)]
    firing: FiringRelation,
    /// top, w, wm, ws, chm, chs, chwm or chws.
    #[arg(long = "gen", default_value = "wm", value_parser = parse_gen)]
    genop: GenOp,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    timeout_ms: u64,
    #[arg(long, default_value_t = 1000)]
    max_bottomup_iters: usize,
}

impl Opts {
    fn config(&self, firing: FiringRelation, genop: GenOp) -> RunConfig {
        RunConfig {
            firing,
            genop,
            timeout_ms: self.timeout_ms,
            max_bottomup_iters: self.max_bottomup_iters,
            ..RunConfig::default()
        }
    }
}

fn parse_firing(s: &str) -> Result<FiringRelation, String> {
    s.parse()
}

fn parse_gen(s: &str) -> Result<GenOp, String> {
    s.parse()
}

fn print_text(r: &RunReport) {
    match &r.reason {
        Some(reason) => println!("{} ({reason})", r.verdict),
        None => println!("{}", r.verdict),
    }
    println!(
        "time: specialize {} ms, bottom-up {} ms, total {} ms",
        r.specialize_ms, r.bottomup_ms, r.total_ms
    );
    println!("definitions: {}, clauses: {}, facts: {}", r.definitions, r.clauses, r.facts);
    println!(
        "generalization steps: reuse {}, generalize {}, fresh {}",
        r.gen_steps.reuse, r.gen_steps.generalize, r.gen_steps.fresh
    );
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn check(
    file: PathBuf,
    opts: Opts,
    emit_specialized: Option<PathBuf>,
    emit_model: Option<PathBuf>,
    json: bool,
) -> Result<i32, String> {
    let text = fs::read_to_string(&file).map_err(|e| format!("cannot read {}: {e}", file.display()))?;
    let spec = parse_spec(&text).map_err(|e| format!("{}: {e}", file.display()))?;
    let out = run(&spec, &opts.config(opts.firing, opts.genop));
    if let (Some(path), Some(p)) = (&emit_specialized, &out.program) {
        write_file(path, &render_program(p))?;
    }
    if let (Some(path), Some(m)) = (&emit_model, &out.model) {
        write_file(path, &m.render(&spec.schema))?;
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&out.report).expect("report serializes"));
    } else {
        print_text(&out.report);
    }
    Ok(exit_code(out.report.verdict))
}

fn main() -> ExitCode {
    // usage errors share the input-error code; 2 is reserved for UNKNOWN
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INPUT_ERROR_EXIT as u8 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Check { file, opts, emit_specialized, emit_model, json } => {
            check(file, opts, emit_specialized, emit_model, json)
        }
        Command::Bench { dir, firings, gens, opts, json } => {
            let firings = if firings.is_empty() { vec![opts.firing] } else { firings };
            let gens = if gens.is_empty() { vec![opts.genop] } else { gens };
            let configs: Vec<RunConfig> = firings
                .iter()
                .flat_map(|f| gens.iter().map(|g| opts.config(*f, *g)))
                .collect();
            bench(&dir, &configs)
                .map_err(|e| e.to_string())
                .and_then(|m| {
                    if json {
                        println!("{}", m.to_json());
                    } else {
                        print!("{}", m.to_csv().map_err(|e| e.to_string())?);
                    }
                    Ok(0)
                })
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(INPUT_ERROR_EXIT as u8)
        }
    }
}
