use std::collections::HashMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use hfree_core::gallery::{fixture, list_fixtures};

use crate::check::{run_check, run_gallery, CheckError, GalleryOptions, Threads};
use crate::manifest::{Manifest, Mode};
use crate::report::Report;

pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hfree", version, about = "Certify partial immersions and partially free maps by dense sampling")]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Print only the verdict.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the check described by a manifest.
    Check {
        manifest: PathBuf,
        /// Override the mode given in the manifest.
        #[arg(long)]
        mode: Option<Mode>,
    },
    /// Check det D2(F∘f) = (det D1 f)^(k+2) det D2 F on a manifest's samples.
    VerifyIdentity { manifest: PathBuf },
    /// Built-in example fixtures.
    Gallery {
        #[command(subcommand)]
        command: GalleryCommand,
    },
    /// Evaluate an expression at a point.
    Eval {
        expr: String,
        /// Coordinate values, e.g. `x=0,y=1.5`.
        #[arg(long, default_value = "")]
        at: String,
    },
}

#[derive(Debug, Subcommand)]
enum GalleryCommand {
    /// List fixture names.
    List,
    /// Run every check that applies to a fixture.
    Run {
        name: String,
        #[arg(long, default_value_t = crate::manifest::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = crate::manifest::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = hfree_core::DEFAULT_TOLERANCE)]
        tol: f64,
        /// Run a single check.
        #[arg(long)]
        mode: Option<Mode>,
    },
}

struct Output<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    json: bool,
    quiet: bool,
}

impl Output<'_> {
    fn report(&mut self, report: &Report) -> i32 {
        let text = if self.json {
            report.to_json()
        } else if self.quiet {
            report.verdict.as_str().to_string()
        } else {
            report.to_text()
        };
        let _ = writeln!(self.out, "{}", text.trim_end());
        report.verdict.exit_code()
    }

    fn usage(&mut self, message: impl std::fmt::Display) -> i32 {
        let _ = writeln!(self.err, "error: {message}");
        EXIT_USAGE
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let mut io = Output { out, err, json: cli.json, quiet: cli.quiet };
    match cli.command {
        Command::Check { manifest, mode } => manifest_check(&mut io, &manifest, mode),
        Command::VerifyIdentity { manifest } => manifest_check(&mut io, &manifest, Some(Mode::Identity)),
        Command::Gallery { command: GalleryCommand::List } => {
            let names = list_fixtures();
            let text = if io.json {
                serde_json::to_string_pretty(&names).expect("names serialize")
            } else {
                names.join("\n")
            };
            let _ = writeln!(io.out, "{text}");
            0
        }
        Command::Gallery { command: GalleryCommand::Run { name, samples, seed, tol, mode } } => {
            let fx = match fixture(&name) {
                Ok(f) => f,
                Err(e) => return io.usage(format!("{e}; run `hfree gallery list` for the names")),
            };
            if samples == 0 {
                return io.usage("--samples must be positive");
            }
            if !(tol > 0.0 && tol.is_finite()) {
                return io.usage("--tol must be a positive real");
            }
            let threads = match Threads::from_env() {
                Ok(t) => t,
                Err(e) => return io.usage(e),
            };
            let options = GalleryOptions { samples, seed, tolerance: tol, mode };
            match run_gallery(&fx, &options, threads) {
                Ok(report) => io.report(&report),
                Err(e) => io.usage(e),
            }
        }
        Command::Eval { expr, at } => eval(&mut io, &expr, &at),
    }
}

fn manifest_check(io: &mut Output<'_>, path: &Path, mode: Option<Mode>) -> i32 {
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => return io.usage(format!("cannot read {}: {e}", path.display())),
    };
    let manifest = match Manifest::parse(&src) {
        Ok(m) => m,
        Err(e) => return io.usage(format!("{}:{e}", path.display())),
    };
    let threads = match Threads::from_env() {
        Ok(t) => t,
        Err(e) => return io.usage(e),
    };
    match run_check(&manifest, mode, threads) {
        Ok(report) => io.report(&report),
        Err(e @ (CheckError::Setup(_) | CheckError::Core(_) | CheckError::Threads(_) | CheckError::Pool(_))) => {
            io.usage(format!("{}: {e}", path.display()))
        }
    }
}

fn eval(io: &mut Output<'_>, src: &str, at: &str) -> i32 {
    let expr = match hfree_core::parse(src) {
        Ok(e) => e,
        Err(e) => return io.usage(e),
    };
    let mut env = HashMap::new();
    for binding in at.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let Some((name, value)) = binding.split_once('=') else {
            return io.usage(format!("expected name=value in --at, got `{binding}`"));
        };
        let value = match hfree_core::parse(value.trim()).map_err(|e| e.to_string()).and_then(|v| {
            let empty: [(&str, f64); 0] = [];
            v.eval(&empty).map_err(|e| e.to_string())
        }) {
            Ok(v) => v,
            Err(e) => return io.usage(format!("bad value for `{}`: {e}", name.trim())),
        };
        env.insert(name.trim().to_string(), value);
    }
    match expr.eval(&env) {
        Ok(v) if io.json => {
            let _ = writeln!(io.out, "{}", serde_json::json!({ "value": v }));
            0
        }
        Ok(v) => {
            let _ = writeln!(io.out, "{v}");
            0
        }
        Err(e) => io.usage(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("hfree").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn eval_examples() {
        assert_eq!(call(&["eval", "(1+y^2)*exp(x)", "--at", "x=0,y=0"]), (0, "1\n".into(), String::new()));
        assert_eq!(call(&["eval", "2*pi", "--at", ""]).1, format!("{}\n", std::f64::consts::TAU));
        assert_eq!(call(&["eval", "x", "--at", "x=-pi"]).1, format!("{}\n", -std::f64::consts::PI));
        assert_eq!(call(&["eval", "x+y", "--at", "x=1"]).0, EXIT_USAGE);
        assert_eq!(call(&["eval", "1/x", "--at", "x=0"]).0, EXIT_USAGE);
        assert_eq!(call(&["eval", "x+", "--at", "x=1"]).0, EXIT_USAGE);
        assert_eq!(call(&["eval", "x", "--at", "x"]).0, EXIT_USAGE);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(call(&[]).0, EXIT_USAGE);
        assert_eq!(call(&["gallery", "run", "no-such-fixture"]).0, EXIT_USAGE);
        assert_eq!(call(&["gallery", "run", "contact-1", "--samples", "0"]).0, EXIT_USAGE);
        assert_eq!(call(&["check", "/nonexistent/manifest.toml"]).0, EXIT_USAGE);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn gallery_list() {
        let (code, out, _) = call(&["gallery", "list"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 10);
        assert!(out.lines().any(|l| l == "novikov-t3"));
    }
}
