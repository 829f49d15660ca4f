use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use freedisc::kernels::{Kernel, Profile};
use freedisc::{lab, Error};

#[derive(Parser)]
#[command(name = "freedisc", version, about = "Non-local approximations of free-discontinuity energies")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// List built-in signals, fields, families, kernels and experiments.
    List,
    /// Print c_{p,n}, kernel moments j_alpha and omega.
    Constants {
        #[arg(long, default_value = "indicator:1")]
        kernel: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        weight: f64,
        /// Moment orders, comma separated.
        #[arg(long, default_value = "1,2,3,4")]
        alphas: String,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numeric(_) => 3,
        _ => 2,
    }
}

fn init_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("FREEDISC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config {
            key: "FREEDISC_THREADS".into(),
            msg: format!("expected a positive integer, got `{v}`"),
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config {
            key: "FREEDISC_THREADS".into(),
            msg: e.to_string(),
        })
}

fn constants(kernel: &str, n: usize, weight: f64, alphas: &str) -> Result<String, Error> {
    let profile: Profile = kernel.parse().map_err(|e: Error| Error::Config {
        key: "kernel".into(),
        msg: e.to_string(),
    })?;
    let k = Kernel::new(profile, n, weight).map_err(|e| Error::Config {
        key: "n".into(),
        msg: e.to_string(),
    })?;
    let alphas = alphas
        .split(',')
        .map(|a| a.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Error::Config {
            key: "alphas".into(),
            msg: e.to_string(),
        })?;
    Ok(lab::constants_table(&k, &alphas)?.to_csv())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match cli.cmd {
        Cmd::Run { config } => lab::run_file(&config).map(|o| format!("{}wrote {}\n", o.summary, o.output.display())),
        Cmd::List => Ok(lab::list_registry()),
        Cmd::Constants {
            kernel,
            n,
            weight,
            alphas,
        } => constants(&kernel, n, weight, &alphas),
    });
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("freedisc: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
