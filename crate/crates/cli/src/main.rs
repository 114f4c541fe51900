use clap::Parser;

use ionheat_cli::cli::{run, Cli};

/// Stable error category token for scripting against stderr.
fn categorize(error: &anyhow::Error) -> &'static str {
    for cause in error.chain() {
        if let Some(core) = cause.downcast_ref::<ionheat_core::Error>() {
            return core.category();
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return "io";
        }
        if let Some(csv_error) = cause.downcast_ref::<csv::Error>() {
            return match csv_error.kind() {
                csv::ErrorKind::Io(_) => "io",
                _ => "parse",
            };
        }
        if cause.downcast_ref::<toml::de::Error>().is_some() {
            return "config";
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return "parse";
        }
    }
    "runtime"
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(cli) {
        eprintln!("error[{}]: {error:#}", categorize(&error));
        std::process::exit(1);
    }
}
