//! `qlgraph`: run, validate and list QL-graph experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qlgraph_core::experiment::{self, ExperimentDescriptor, BUNDLED};
use qlgraph_core::Error;

const EXIT_IO: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "qlgraph", version, about = "Spectra of quantum-like bit graphs and their Cartesian products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a descriptor file (or a bundled experiment name) and write its artifacts.
    Run {
        descriptor: String,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: descriptor's out_dir, else out/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the number of ensemble samples.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Validate a descriptor without computing anything.
    Validate { descriptor: String },
    /// List the bundled experiments.
    ListExperiments,
    /// Print a bundled descriptor as JSON.
    Show { name: String },
}

fn load(arg: &str) -> Result<ExperimentDescriptor, Error> {
    let path = Path::new(arg);
    if path.exists() {
        return ExperimentDescriptor::from_file(path);
    }
    experiment::bundled(arg).ok_or_else(|| Error::InvalidParameter(format!("no descriptor file or bundled experiment named {arg:?}")))
}

fn fail(kind: &str, err: &Error) -> ExitCode {
    let code = match (kind, err.root()) {
        (_, Error::Io(_)) => EXIT_IO,
        _ if err.is_validation() => EXIT_VALIDATION,
        _ => EXIT_NUMERICAL,
    };
    let category = match code {
        EXIT_VALIDATION => "validation",
        EXIT_NUMERICAL => "numerical",
        _ => "io",
    };
    let report = serde_json::json!({ "error": category, "command": kind, "message": err.to_string() });
    eprintln!("{report}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { descriptor, seed, out, samples } => {
            let mut desc = match load(&descriptor) {
                Ok(d) => d,
                Err(e) => return fail("run", &e),
            };
            if let Some(s) = seed {
                desc.master_seed = s;
            }
            if let Some(n) = samples {
                desc.n_samples = n;
            }
            if let Err(e) = desc.validate() {
                return fail("run", &e);
            }
            let out = out
                .or_else(|| desc.out_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out").join(&desc.name));
            match experiment::run(&desc, &out) {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail("run", &e),
            }
        }
        Command::Validate { descriptor } => match load(&descriptor) {
            Ok(d) => {
                println!("{}: ok ({} factors, {} eigenvalues per sample)", d.name, d.n_factors(), d.composed_dim());
                ExitCode::SUCCESS
            }
            Err(e) => fail("validate", &e),
        },
        Command::ListExperiments => {
            for name in BUNDLED {
                let d = experiment::bundled(name).expect("bundled");
                println!("{name}\t{}", d.description);
            }
            ExitCode::SUCCESS
        }
        Command::Show { name } => match experiment::bundled(&name) {
            Some(d) => {
                println!("{}", d.to_json());
                ExitCode::SUCCESS
            }
            None => fail("show", &Error::InvalidParameter(format!("no bundled experiment named {name:?}"))),
        },
    }
}
