//! Command line entry point.
//!
//! Exit codes: 0 success, 1 failed check or write error, 2 bad usage or
//! unparsable scenario, 3 solver did not converge or went unstable,
//! 4 invalid physics input surfaced by the library.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};
use gravicol::bundled;
use gravicol::runner;
use gravicol::scenario::Scenario;
use gravicol::verify;
use gravicol_core::error::Error;

#[derive(Parser)]
#[command(
    name = "gravicol",
    version,
    about = "Scenario runner and self-check harness for the collapse model library"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenario files or bundled scenarios and write one CSV table each
    Run {
        /// Scenario files or bundled scenario names
        #[arg(required = true)]
        inputs: Vec<String>,
        /// Output file, or output directory when running several scenarios
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override every scenario's seed
        #[arg(long)]
        seed: Option<u64>,
        /// How many scenarios to run at once
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run a built-in check suite: residual, born, gravity, sn, or all
    Verify { suite: String },
    /// List the bundled scenarios
    ListScenarios,
}

struct StderrLog;

impl log::Log for StderrLog {
    fn enabled(&self, metadata: &log::Metadata) -> bool {
        metadata.level() <= log::Level::Warn
    }

    fn log(&self, record: &log::Record) {
        if self.enabled(record.metadata()) {
            eprintln!("{}: {}", record.level(), record.args());
        }
    }

    fn flush(&self) {}
}

static LOGGER: StderrLog = StderrLog;

fn main() -> ExitCode {
    if log::set_logger(&LOGGER).is_ok() {
        log::set_max_level(log::LevelFilter::Warn);
    }
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            inputs,
            out,
            seed,
            jobs,
        } => cmd_run(&inputs, out.as_deref(), seed, jobs),
        Command::Verify { suite } => cmd_verify(&suite),
        Command::ListScenarios => cmd_list(),
    };
    ExitCode::from(code)
}

fn load(input: &str) -> Result<Scenario, String> {
    let path = Path::new(input);
    let text = if path.exists() {
        std::fs::read_to_string(path).map_err(|e| format!("{input}: {e}"))?
    } else if let Some(text) = bundled::find(input) {
        text.to_string()
    } else {
        return Err(format!(
            "{input}: neither a scenario file nor a bundled scenario name"
        ));
    };
    Scenario::parse(&text).map_err(|e| format!("{input}: {e}"))
}

fn cmd_run(inputs: &[String], out: Option<&Path>, seed: Option<u64>, jobs: usize) -> u8 {
    let mut scenarios = Vec::with_capacity(inputs.len());
    let mut unusable = false;
    for input in inputs {
        match load(input) {
            Ok(s) => scenarios.push(s),
            Err(e) => {
                eprintln!("error: {e}");
                unusable = true;
            }
        }
    }
    if unusable {
        return 2;
    }

    let multi = scenarios.len() > 1;
    if multi {
        if let Some(dir) = out {
            if let Err(e) = std::fs::create_dir_all(dir) {
                eprintln!("error: cannot create {}: {e}", dir.display());
                return 1;
            }
        }
    }

    let results = run_all(&scenarios, seed, jobs);

    let mut code = 0u8;
    for (s, result) in scenarios.iter().zip(results) {
        match result {
            Ok(bytes) => {
                let path = output_path(s, out, multi);
                if let Err(e) = write_table(&path, &bytes) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    if code == 0 {
                        code = 1;
                    }
                } else {
                    println!("{} -> {}", s.name, path.display());
                }
            }
            Err(err) => {
                eprintln!("error: scenario {}: {err}", s.name);
                if code == 0 {
                    code = runner::exit_code(&err);
                }
            }
        }
    }
    code
}

fn write_table(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, bytes)
}

/// Where a scenario's table lands: an explicit --out wins, then the
/// scenario's own output line, then GRAVICOL_OUT_DIR, then the working
/// directory.
fn output_path(s: &Scenario, out: Option<&Path>, multi: bool) -> PathBuf {
    if let Some(p) = out {
        if multi || p.is_dir() {
            return p.join(format!("{}.csv", s.name));
        }
        return p.to_path_buf();
    }
    if let Some(explicit) = &s.output {
        return PathBuf::from(explicit);
    }
    if let Some(dir) = std::env::var_os("GRAVICOL_OUT_DIR") {
        return PathBuf::from(dir).join(format!("{}.csv", s.name));
    }
    PathBuf::from(format!("{}.csv", s.name))
}

fn run_all(scenarios: &[Scenario], seed: Option<u64>, jobs: usize) -> Vec<Result<Vec<u8>, Error>> {
    let render = |s: &Scenario| runner::execute(s, seed).map(|out| runner::render_csv(&out));
    if jobs <= 1 || scenarios.len() <= 1 {
        return scenarios.iter().map(render).collect();
    }

    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(scenarios.len()));
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(scenarios.len()) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= scenarios.len() {
                    break;
                }
                let r = render(&scenarios[k]);
                results.lock().expect("result collection").push((k, r));
            });
        }
    });
    let mut collected = results.into_inner().expect("result collection");
    collected.sort_by_key(|(k, _)| *k);
    collected.into_iter().map(|(_, r)| r).collect()
}

fn cmd_verify(suite: &str) -> u8 {
    let Some(ids) = verify::suite_ids(suite) else {
        eprintln!("error: unknown suite `{suite}`; choose residual, born, gravity, sn, or all");
        return 2;
    };
    let mut all_pass = true;
    for &id in ids {
        let r = verify::run_criterion(id);
        let status = if r.pass { "PASS" } else { "FAIL" };
        println!("criterion {:2} {status} {}: {}", r.id, r.label, r.detail);
        all_pass &= r.pass;
    }
    if all_pass {
        0
    } else {
        1
    }
}

fn cmd_list() -> u8 {
    for (name, text) in bundled::BUNDLED {
        match Scenario::parse(text) {
            Ok(s) => println!("{name}  {}", s.kind),
            Err(e) => {
                eprintln!("error: bundled scenario {name}: {e}");
                return 1;
            }
        }
    }
    0
}
