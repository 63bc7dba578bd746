use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rand::RngCore;

use crate::models;
use crate::report::{Real, Tolerances};

use super::golden;
use super::{run, write_list, write_text, SeedSource, SuiteSpec, DEFAULT_SAMPLES, EXIT_EVALUATION, EXIT_FAIL, EXIT_PASS, EXIT_RESOLUTION};

#[derive(Debug, Parser)]
#[command(name = "neutral4", version, about = "Checks for neutral-signature four-dimensional geometries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one check suite.
    Check {
        suite: String,
        /// Builtin model name or geometry file.
        #[arg(long, default_value = "flat_neutral")]
        geometry: String,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Omit to draw a seed from entropy.
        #[arg(long)]
        seed: Option<u64>,
        /// Sets all three tolerance tiers.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        tol_algebraic: Option<f64>,
        #[arg(long)]
        tol_first: Option<f64>,
        #[arg(long)]
        tol_curvature: Option<f64>,
        /// Parameter override, repeatable.
        #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        /// Write the JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// List suites and builtin models.
    List,
    /// Print a builtin model and its parameters.
    Describe { name: String },
    /// Maintain the stored reports.
    Golden {
        #[command(subcommand)]
        action: GoldenAction,
        /// Overrides NEUTRAL4_GOLDEN_DIR.
        #[arg(long, global = true)]
        dir: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum GoldenAction {
    Update,
    Verify,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn tolerances(tol: Option<f64>, a: Option<f64>, f: Option<f64>, c: Option<f64>) -> Tolerances {
    let mut t = tol.map(Tolerances::uniform).unwrap_or_default();
    if let Some(v) = a {
        t.algebraic = Real(v);
    }
    if let Some(v) = f {
        t.first = Real(v);
    }
    if let Some(v) = c {
        t.curvature = Real(v);
    }
    t
}

/// Runs the command line `args` (program name first) and returns the exit
/// status.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_RESOLUTION } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_EVALUATION
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    match cmd {
        Command::Check { suite, geometry, samples, seed, tol, tol_algebraic, tol_first, tol_curvature, params, json } => {
            let (seed, seed_source) = match seed {
                Some(s) => (s, SeedSource::Given),
                None => (rand::rngs::OsRng.next_u64(), SeedSource::Entropy),
            };
            let spec = SuiteSpec {
                suite,
                geometry,
                params: params.into_iter().map(|(k, v)| (k, Real(v))).collect::<BTreeMap<_, _>>(),
                samples,
                seed,
                seed_source,
                tolerances: tolerances(tol, tol_algebraic, tol_first, tol_curvature),
            };
            let report = match run(&spec) {
                Ok(r) => r,
                Err(e) => {
                    writeln!(err, "error: {e}")?;
                    return Ok(e.exit_code());
                }
            };
            write_text(out, &report)?;
            if let Some(path) = json {
                std::fs::write(&path, report.canonical_json())?;
            }
            Ok(report.exit_code())
        }
        Command::List => {
            write_list(out)?;
            Ok(EXIT_PASS)
        }
        Command::Describe { name } => match models::describe(&name) {
            Ok(text) => {
                write!(out, "{text}")?;
                Ok(EXIT_PASS)
            }
            Err(e) => {
                writeln!(err, "error: {e}")?;
                Ok(EXIT_RESOLUTION)
            }
        },
        Command::Golden { action, dir } => {
            let dir = dir.unwrap_or_else(golden::default_dir);
            match action {
                GoldenAction::Update => match golden::update(&dir) {
                    Ok(files) => {
                        writeln!(out, "wrote {} reports to {}", files.len(), dir.display())?;
                        Ok(EXIT_PASS)
                    }
                    Err(e) => {
                        writeln!(err, "error: {e}")?;
                        Ok(EXIT_EVALUATION)
                    }
                },
                GoldenAction::Verify => {
                    let outcomes = match golden::verify(&dir) {
                        Ok(o) => o,
                        Err(golden::GoldenError::MissingDir(d)) => {
                            writeln!(err, "error: golden directory {} does not exist", d.display())?;
                            return Ok(EXIT_RESOLUTION);
                        }
                        Err(e) => {
                            writeln!(err, "error: {e}")?;
                            return Ok(EXIT_EVALUATION);
                        }
                    };
                    let mut failed = 0;
                    for o in &outcomes {
                        if o.missing {
                            writeln!(out, "MISSING {}", o.file)?;
                        } else if !o.diffs.is_empty() {
                            writeln!(out, "DIFF    {}", o.file)?;
                            for d in &o.diffs {
                                writeln!(out, "        {d}")?;
                            }
                        } else if o.byte_identical {
                            writeln!(out, "ok      {}", o.file)?;
                        } else {
                            writeln!(out, "ok      {} (within {:e}, bytes differ)", o.file, golden::FLOAT_TOLERANCE)?;
                        }
                        if !o.passed() {
                            failed += 1;
                        }
                    }
                    writeln!(out, "{} reports, {failed} failed", outcomes.len())?;
                    Ok(if failed == 0 { EXIT_PASS } else { EXIT_FAIL })
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = main_with_args(std::iter::once("neutral4").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn params_parse() {
        assert_eq!(parse_param("t2=1.5"), Ok(("t2".to_string(), 1.5)));
        assert!(parse_param("t2").is_err());
        assert!(parse_param("t2=x").is_err());
    }

    #[test]
    fn tolerance_overrides_layer() {
        let t = tolerances(Some(1e-6), None, Some(1e-3), None);
        assert_eq!((t.algebraic(), t.first(), t.curvature()), (1e-6, 1e-3, 1e-6));
        assert_eq!(tolerances(None, None, None, None), Tolerances::default());
    }

    #[test]
    fn list_and_describe() {
        let (code, out, _) = call(&["list"]);
        assert_eq!(code, 0);
        assert!(out.contains("hopf_remark") && out.contains("inoue_s_plus"));
        let (code, out, _) = call(&["describe", "inoue_s_plus"]);
        assert_eq!(code, 0);
        assert!(out.contains("t1") && out.contains("eps"));
        assert_eq!(call(&["describe", "nope"]).0, 2);
    }

    #[test]
    fn unseeded_runs_say_so() {
        let (code, out, _) = call(&["check", "signature", "--samples", "5"]);
        assert_eq!(code, 0);
        assert!(out.contains("seed drawn from entropy"));
    }

    #[test]
    fn bad_flags_and_names() {
        assert_eq!(call(&["check", "nosuch", "--seed", "1"]).0, 2);
        assert_eq!(call(&["check", "signature", "--geometry", "nosuch", "--seed", "1"]).0, 2);
        assert_eq!(call(&["check", "signature", "--samples", "x"]).0, 2);
        assert_eq!(call(&["frobnicate"]).0, 2);
    }
}
