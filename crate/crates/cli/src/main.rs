//! `collectivity` command-line front end.
//!
//! Every subcommand writes plain-text tables and JSON records into the
//! output directory, followed by `run_manifest.json`. Exit status: 0 on
//! success, 1 for usage errors, 2 for data errors, 3 for numerical failures.
//! Failures also print one JSON line to stderr.

mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::Parser;
use serde::Serialize;

use args::Cli;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Usage,
    Data,
    Numeric,
}

impl Category {
    fn code(self) -> u8 {
        match self {
            Category::Usage => 1,
            Category::Data => 2,
            Category::Numeric => 3,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { category: Category::Usage, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self { category: Category::Data, message: message.into() }
    }

    fn report(&self) {
        #[derive(Serialize)]
        struct Record<'a> {
            error: Category,
            exit_code: u8,
            message: &'a str,
        }
        let record = Record { error: self.category, exit_code: self.category.code(), message: &self.message };
        eprintln!("{}", serde_json::to_string(&record).expect("error record serializes"));
    }
}

impl From<collectivity::Error> for CliError {
    fn from(e: collectivity::Error) -> Self {
        let category = match e.kind() {
            collectivity::ErrorKind::Data => Category::Data,
            collectivity::ErrorKind::Numeric => Category::Numeric,
        };
        Self { category, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    let _ = e.print();
                    let first = e.to_string();
                    let first = first.lines().next().unwrap_or("invalid usage");
                    CliError::usage(first.trim_start_matches("error: ")).report();
                    ExitCode::from(Category::Usage.code())
                }
            };
        }
    };
    env_logger::Builder::new()
        .filter_level(match cli.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            _ => log::LevelFilter::Debug,
        })
        .format_timestamp(None)
        .init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            e.report();
            ExitCode::from(e.category.code())
        }
    }
}
