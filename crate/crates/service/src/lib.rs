//! The `mapperscope` command line tool and HTTP API.
//!
//! [`commands`] holds one function per CLI verb; [`server`] exposes a built
//! model, its metadata, images and heat maps to the dashboard.

pub mod bundle;
pub mod cli;
pub mod commands;
pub mod error;
pub mod server;

use std::sync::Arc;

use cli::{Cli, Command};
use error::CliError;

/// Runs one CLI invocation. Text meant for the user is returned, errors are
/// left to the caller to print.
pub fn run(cli: Cli) -> Result<Option<String>, CliError> {
    match cli.command {
        Command::Synth(a) => commands::synth(&a).map(|_| None),
        Command::Build(a) => commands::build(&a).map(|_| None),
        Command::Analyze(a) => commands::analyze(&a).map(Some),
        Command::Heatmap(a) => commands::heatmap(&a).map(|_| None),
        Command::Serve(a) => {
            let bundle = Arc::new(bundle::ModelBundle::load(&(&a).into())?);
            let addr = format!("{}:{}", a.host, a.port);
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::new("IoFailure", e.to_string()))?;
            rt.block_on(server::serve(bundle, &addr, a.static_dir.as_deref()))
                .map_err(|e| CliError::new("ServeFailed", format!("{addr}: {e}")))?;
            Ok(None)
        }
    }
}
