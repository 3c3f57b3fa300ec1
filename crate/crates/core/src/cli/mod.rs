//! The `obstrukt` command line: flag and config parsing, task dispatch,
//! CSV/JSON reports and the exit-code contract
//! (0 ok, 2 config, 3 infeasible, 4 numerical).

mod error;
mod options;
pub mod report;
mod tasks;

pub use error::{CliError, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERICAL, EXIT_OK};
pub use options::{Cli, Command, Options, PointArg, Task, TaskArgs, JOBS_ENV};
pub use tasks::{run_task, KE_ROWS};

use std::ffi::OsString;

use clap::Parser;

/// Merges flags over the config file, sizes the worker pool and runs the task.
pub fn execute(command: Command) -> Result<(), CliError> {
    let (task, args) = command.split();
    let opts = match &args.config {
        Some(path) => args.options.over(Options::from_file(path)?),
        None => args.options,
    };
    let task = match (task, opts.task) {
        (Some(t), _) | (None, Some(t)) => t,
        (None, None) => return Err(CliError::config("`run` needs a config file with a `task`")),
    };
    let work = || run_task(task, &opts);
    match opts.resolved_jobs()? {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::config(format!("worker pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Entry point behind the binary; returns the process exit code. Usage
/// errors are reported as error JSON with the config exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return EXIT_OK;
        }
        Err(e) => {
            let err = CliError::config(e.to_string().trim_end());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("{}", err.to_json());
            err.exit_code()
        }
    }
}
