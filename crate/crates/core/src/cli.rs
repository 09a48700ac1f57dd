//! The `measure` command line.
//!
//! Exit codes: 0 success, 1 diagnostics or failed verdicts, 2 usage error,
//! 3 I/O error. Results go to stdout (or `--out`), error text to stderr.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::MeasureError;
use crate::exec::Execution;
use crate::lang::check::{check_program, load_registry};
use crate::lang::diagnostic::{format_diagnostics, Diagnostic};
use crate::lang::eval::{evaluate_program, ResultKind};
use crate::lang::output::{DiagnosticJson, RunJson, SortJson};
use crate::lang::parser::parse_program;
use crate::lang::SourceMap;
use crate::meaning::{survey_program, Status, VerdictJson};
use crate::quantity::Quantity;
use crate::registry::{FamilyKind, Registry};
use crate::stats::{self, ReportJson, Role};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "measure",
    version,
    about = "Check, evaluate and analyse scale values by sort"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Emit JSON instead of text.
    #[arg(long)]
    pub json: bool,
    /// Write the result to PATH instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and sort-check a program.
    Check {
        /// Program file, or `-` for stdin.
        file: String,
        #[command(flatten)]
        output: Output,
    },
    /// Check, then evaluate every check and assert statement.
    Eval {
        file: String,
        #[command(flatten)]
        output: Output,
    },
    /// Convert one reading between two scales of a family.
    Convert {
        #[arg(allow_negative_numbers = true)]
        value: f64,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// File whose declarations define the scales.
        #[arg(long)]
        registry: String,
        /// Treat the reading as a difference (factor only).
        #[arg(long)]
        difference: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Report the admissible statistics of one CSV column.
    Stats {
        file: String,
        #[arg(long)]
        column: String,
        #[arg(long)]
        family: String,
        #[arg(long)]
        scale: String,
        #[arg(long, value_parser = ["point", "difference"])]
        role: String,
        #[arg(long)]
        registry: String,
        #[command(flatten)]
        output: Output,
    },
    /// Test every check and assert for invariance under random admissible
    /// transformations.
    Meaningful {
        file: String,
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run trials on one thread.
        #[arg(long)]
        sequential: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Print the families and scales declared in a file as JSON.
    ExportRegistry {
        file: String,
        #[command(flatten)]
        output: Output,
    },
}

enum Failure {
    Io(String),
    Diagnostics,
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Io<'_> {
    fn read(&mut self, path: &str) -> Result<String, Failure> {
        let mut text = String::new();
        let res = if path == "-" {
            self.stdin.read_to_string(&mut text).map(|_| ())
        } else {
            std::fs::read_to_string(path).map(|t| text = t)
        };
        res.map_err(|e| Failure::Io(format!("cannot read {path}: {e}")))?;
        Ok(text)
    }

    fn emit(&mut self, output: &Output, text: &str) -> Result<(), Failure> {
        match &output.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
            None => self
                .stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Io(format!("cannot write output: {e}"))),
        }
    }

    fn emit_json<T: Serialize>(&mut self, output: &Output, value: &T) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.emit(output, &text)
    }

    fn diagnostics(&mut self, diags: &[Diagnostic], source: &str) {
        if !diags.is_empty() {
            let _ = self
                .stderr
                .write_all(format_diagnostics(diags, source).as_bytes());
        }
    }

    fn error(&mut self, e: &MeasureError) -> Failure {
        let _ = writeln!(self.stderr, "error[{}]: {}", e.code, e.message);
        Failure::Diagnostics
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(
    argv: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = stdout.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    let mut io = Io {
        stdin,
        stdout,
        stderr,
    };
    match dispatch(cli.command, &mut io) {
        Ok(()) => EXIT_OK,
        Err(Failure::Diagnostics) => EXIT_DIAGNOSTICS,
        Err(Failure::Io(msg)) => {
            let _ = writeln!(io.stderr, "error: {msg}");
            EXIT_IO
        }
    }
}

/// Loads declarations from a `.msr` file, ignoring other statements.
fn registry_from(io: &mut Io<'_>, path: &str) -> Result<Registry, Failure> {
    let source = io.read(path)?;
    let program = parse_program(&source).map_err(|d| {
        io.diagnostics(&d, &source);
        Failure::Diagnostics
    })?;
    let (registry, diags) = load_registry(&program);
    if !diags.is_empty() {
        io.diagnostics(&diags, &source);
        return Err(Failure::Diagnostics);
    }
    Ok(registry)
}

fn clean(diags: &[Diagnostic]) -> Result<(), Failure> {
    if diags.iter().any(Diagnostic::is_error) {
        Err(Failure::Diagnostics)
    } else {
        Ok(())
    }
}

#[derive(Serialize)]
struct ConvertJson {
    value: f64,
    from: String,
    to: String,
    sort: SortJson,
}

#[derive(Serialize)]
struct SurveyJson {
    diagnostics: Vec<DiagnosticJson>,
    verdicts: Vec<VerdictJson>,
}

fn dispatch(command: Command, io: &mut Io<'_>) -> Result<(), Failure> {
    match command {
        Command::Check { file, output } => {
            let source = io.read(&file)?;
            let diags = match parse_program(&source) {
                Ok(p) => check_program(&p).diagnostics,
                Err(d) => d,
            };
            if output.json {
                io.emit_json(&output, &RunJson::from_diagnostics(&diags, &source))?;
            } else {
                io.diagnostics(&diags, &source);
                if !diags.iter().any(Diagnostic::is_error) {
                    io.emit(&output, "ok\n")?;
                }
            }
            clean(&diags)
        }
        Command::Eval { file, output } => {
            let source = io.read(&file)?;
            let run = match parse_program(&source) {
                Ok(p) => evaluate_program(&p),
                Err(d) => {
                    if output.json {
                        io.emit_json(&output, &RunJson::from_diagnostics(&d, &source))?;
                    } else {
                        io.diagnostics(&d, &source);
                    }
                    return Err(Failure::Diagnostics);
                }
            };
            if output.json {
                io.emit_json(&output, &RunJson::from_evaluation(&run, &source))?;
            } else {
                io.diagnostics(&run.diagnostics, &source);
                let map = SourceMap::new(&source);
                let program = parse_program(&source).unwrap_or_default();
                let mut text = String::new();
                for r in &run.results {
                    let line = map.locate(program.statements[r.stmt_index].span).line;
                    let q = r.value;
                    let scale = q
                        .scale
                        .map(|s| format!(" on {}", run.registry.scale(s).name))
                        .unwrap_or_default();
                    let sort = run.registry.describe(q.sort);
                    text.push_str(&match (r.kind, r.holds) {
                        (ResultKind::Assert, Some(h)) => {
                            format!(
                                "line {line}: assert {}\n",
                                if h { "holds" } else { "fails" }
                            )
                        }
                        _ => format!("line {line}: {} [{sort}]{scale}\n", q.value),
                    });
                }
                io.emit(&output, &text)?;
            }
            clean(&run.diagnostics)
        }
        Command::Convert {
            value,
            from,
            to,
            registry,
            difference,
            output,
        } => {
            let reg = registry_from(io, &registry)?;
            let converted =
                convert(&reg, value, &from, &to, difference).map_err(|e| io.error(&e))?;
            if output.json {
                let json = ConvertJson {
                    value: converted.value,
                    from,
                    to,
                    sort: SortJson::new(&reg, converted.sort),
                };
                io.emit_json(&output, &json)
            } else {
                io.emit(&output, &format!("{}\n", converted.value))
            }
        }
        Command::Stats {
            file,
            column,
            family,
            scale,
            role,
            registry,
            output,
        } => {
            let reg = registry_from(io, &registry)?;
            let csv = io.read(&file)?;
            let role: Role = role.parse().map_err(|e| io.error(&e))?;
            let col = stats::load_column(&reg, &csv, &column, &family, &scale, role)
                .map_err(|e| io.error(&e))?;
            let report = stats::report(&reg, &col).map_err(|e| io.error(&e))?;
            if output.json {
                io.emit_json(&output, &ReportJson::new(&reg, &report))
            } else {
                io.emit(&output, &stats::render_report(&reg, &report))
            }
        }
        Command::Meaningful {
            file,
            trials,
            seed,
            sequential,
            output,
        } => {
            let source = io.read(&file)?;
            let program = parse_program(&source).map_err(|d| {
                io.diagnostics(&d, &source);
                Failure::Diagnostics
            })?;
            let execution = if sequential {
                Execution::Sequential
            } else {
                Execution::default()
            };
            let survey = survey_program(&program, trials as usize, seed, execution);
            let verdicts: Vec<VerdictJson> = survey
                .verdicts
                .iter()
                .map(|v| VerdictJson::new(&survey.registry, v))
                .collect();
            if output.json {
                let map = SourceMap::new(&source);
                let json = SurveyJson {
                    diagnostics: survey
                        .diagnostics
                        .iter()
                        .map(|d| DiagnosticJson::new(d, &map))
                        .collect(),
                    verdicts,
                };
                io.emit_json(&output, &json)?;
            } else {
                io.diagnostics(&survey.diagnostics, &source);
                let mut text = String::new();
                for v in &verdicts {
                    let status = serde_json::to_value(v.status).expect("serializable");
                    let plural = if v.trials == 1 { "" } else { "s" };
                    text.push_str(&format!(
                        "{}  {} ({} trial{plural})\n",
                        v.statement,
                        status.as_str().unwrap_or_default(),
                        v.trials
                    ));
                    if let Some(w) = &v.witness {
                        text.push_str(&format!(
                            "    witness: p={} q={}{}: y={} -> {} (deviation {})\n",
                            w.p,
                            w.q,
                            w.family
                                .as_ref()
                                .map(|f| format!(" on {f}"))
                                .unwrap_or_default(),
                            w.y,
                            w.y_transformed,
                            w.deviation
                        ));
                    }
                }
                io.emit(&output, &text)?;
            }
            let all_meaningful = survey
                .verdicts
                .iter()
                .all(|v| v.verdict.status == Status::Meaningful);
            if all_meaningful {
                Ok(())
            } else {
                Err(Failure::Diagnostics)
            }
        }
        Command::ExportRegistry { file, output } => {
            let reg = registry_from(io, &file)?;
            io.emit_json(&output, &reg.export())
        }
    }
}

/// Converts a reading between scales. Readings on a linear family are always
/// differences; on an absolute family they are unchanged.
pub fn convert(
    registry: &Registry,
    value: f64,
    from: &str,
    to: &str,
    difference: bool,
) -> crate::error::Result<Quantity> {
    let unknown = |name: &str| {
        MeasureError::new(
            crate::error::ErrorCode::UnknownScale,
            format!("unknown scale `{name}`"),
        )
    };
    let s = registry.scale_id(from).ok_or_else(|| unknown(from))?;
    let t = registry.scale_id(to).ok_or_else(|| unknown(to))?;
    let kind = registry.family(registry.scale(s).family).kind;
    let q = match kind {
        FamilyKind::Absolute => Quantity::scalar(value),
        FamilyKind::Linear => Quantity::difference(registry, value, s)?,
        FamilyKind::Affine if difference => Quantity::difference(registry, value, s)?,
        FamilyKind::Affine => Quantity::point(registry, value, s)?,
    };
    // also rejects a target outside the family
    let transform = registry.conversion(s, t)?;
    match q.sort.family() {
        None => Ok(q),
        Some(_) => Quantity::new(registry, transform.act(q.sort, q.value), q.sort, Some(t)),
    }
}
