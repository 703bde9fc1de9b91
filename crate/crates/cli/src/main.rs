//! Command-line front end for the measure-definite kernel toolkit.
//!
//! Every subcommand reads JSON, writes JSON (or CSV for growth curves) to
//! stdout or `--out`, and exits with: 0 for success or a positive verdict,
//! 2 for usage errors, 3 for a negative verdict (refuted, violated, or
//! infeasible, with the evidence emitted), 4 for validation failures, and
//! 5 for solver failures. Identical arguments and seed give byte-identical
//! output.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use mdkern_core::actions::{
    defect, defect_growth, group_cylinder_invariance, EventuallyConstantSet, FiniteGroup,
    ZAction,
};
use mdkern_core::crofton::{
    cylinder_measure, sqrt_representation, CroftonMethod, CroftonOptions, CylinderSpec,
};
use mdkern_core::cutcone::{decompose, DecomposeOptions, Decomposition};
use mdkern_core::embedding::{schoenberg_embed, PointConfiguration};
use mdkern_core::measure::{AtomicRepresentation, GroundedRepresentation};
use mdkern_core::trees::{distance_kernel, tree_representation, Tree};
use mdkern_core::{is_negative_definite, is_pseudometric, Error, Kernel, NegDefOutcome};

const EXIT_FALSE: u8 = 3;
const EXIT_VALIDATION: u8 = 4;
const EXIT_SOLVER: u8 = 5;

#[derive(Parser)]
#[command(name = "mdkern", version, about = "Measure-definite kernel toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct IoArgs {
    /// Input JSON file.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Write output here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Direction handling: auto, exact, quadrature, or mc.
    #[arg(long, default_value = "auto", value_parser = parse_method)]
    method: CroftonMethod,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Seed for the direction stream.
    #[arg(long, env = "MDKERN_SEED", default_value_t = 0)]
    seed: u64,
}

impl EstimateArgs {
    fn options(&self) -> CroftonOptions {
        CroftonOptions {
            method: self.method,
            samples: self.samples,
            seed: self.seed,
            ..Default::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Test a kernel for negative definiteness.
    Negdef {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Test the triangle inequality over all triples.
    Pseudometric {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Embed a negative definite kernel as squared distances.
    Embed {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Half-space measure of a cylinder over a point configuration.
    Crofton {
        #[command(flatten)]
        io: IoArgs,
        /// Labels the half-space must contain, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        pos: Vec<String>,
        /// Labels the half-space must avoid, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        neg: Vec<String>,
        #[command(flatten)]
        estimate: EstimateArgs,
    },
    /// Atomic representation whose kernel is the square root of the input.
    SqrtRep {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Label cap for full pattern enumeration.
        #[arg(long, default_value_t = 12)]
        atom_cap: usize,
        #[command(flatten)]
        estimate: EstimateArgs,
    },
    /// Cut-cone membership; infeasibility comes with a certificate.
    Decompose {
        #[command(flatten)]
        io: IoArgs,
        /// Label cap; the program has one variable per cut.
        #[arg(long, default_value_t = 14)]
        cap: usize,
        /// Pivot in exact rational arithmetic from the start.
        #[arg(long)]
        exact: bool,
    },
    /// Kernel of an atomic or grounded representation.
    KernelOf {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Distance kernel and per-edge representation of a tree.
    Tree {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Translation defect of an eventually constant set of integers.
    Defect {
        /// Set: geN, leN, {a,b,c}, empty, full, or window JSON.
        #[arg(long)]
        set: String,
        /// Translation amount.
        #[arg(long, allow_negative_numbers = true)]
        k: i64,
        /// Write output here instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Max defect by word length for a homomorphism to the integers.
    Growth {
        /// Generator amounts, comma separated, e.g. "+1,-3".
        #[arg(long, allow_hyphen_values = true)]
        gens: String,
        /// Set: geN, leN, {a,b,c}, empty, full, or window JSON.
        #[arg(long, default_value = "ge1")]
        set: String,
        /// Largest word length to scan.
        #[arg(long)]
        radius: u32,
        /// Write length,max_defect rows to this CSV file instead of JSON.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        /// Write output here instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Compare a cylinder measure with its translate by a group element.
    Invariance {
        #[command(flatten)]
        io: IoArgs,
        /// Group: cyclic:N or symmetric:K.
        #[arg(long)]
        group: String,
        /// Translating element label.
        #[arg(long)]
        g: String,
        /// Labels the half-space must contain, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        pos: Vec<String>,
        /// Labels the half-space must avoid, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        neg: Vec<String>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        estimate: EstimateArgs,
    },
}

fn parse_method(s: &str) -> std::result::Result<CroftonMethod, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::validation(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::validation(format!("cannot serialize output: {e}")))?;
    text.push('\n');
    write_text(out, &text)
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Emits the refutation witness and signals exit 3 when the kernel is not
/// negative definite; passes through otherwise.
fn negdef_gate(kernel: &Kernel, tol: f64, out: Option<&Path>) -> Result<Option<ExitCode>, Error> {
    match is_negative_definite(kernel, tol)? {
        NegDefOutcome::NegativeDefinite => Ok(None),
        refuted => {
            emit(out, &refuted)?;
            Ok(Some(ExitCode::from(EXIT_FALSE)))
        }
    }
}

fn not_negdef_payload(eigenvalue: f64) -> serde_json::Value {
    json!({ "verdict": "not_negative_definite", "eigenvalue": eigenvalue })
}

/// Set syntax: "geN" and "leN" rays, "{a,b,c}" finite sets, "empty",
/// "full", or the window JSON object.
fn parse_set(text: &str) -> Result<EventuallyConstantSet, Error> {
    let t = text.trim();
    if t.starts_with('{') && t.contains('"') {
        return serde_json::from_str(t)
            .map_err(|e| Error::validation(format!("set JSON: {e}")));
    }
    if t == "empty" {
        return Ok(EventuallyConstantSet::empty());
    }
    if t == "full" {
        return Ok(EventuallyConstantSet::full());
    }
    if let Some(rest) = t.strip_prefix("ge") {
        let threshold = rest.trim().parse::<i64>().map_err(|e| {
            Error::validation(format!("threshold in {t:?}: {e}"))
        })?;
        return EventuallyConstantSet::ge(threshold);
    }
    if let Some(rest) = t.strip_prefix("le") {
        let threshold = rest.trim().parse::<i64>().map_err(|e| {
            Error::validation(format!("threshold in {t:?}: {e}"))
        })?;
        return EventuallyConstantSet::le(threshold);
    }
    if let Some(inner) = t.strip_prefix('{').and_then(|s| s.strip_suffix('}')) {
        let inner = inner.trim();
        let positions = if inner.is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|p| {
                    p.trim().parse::<i64>().map_err(|e| {
                        Error::validation(format!("position {:?}: {e}", p.trim()))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        return EventuallyConstantSet::finite(&positions);
    }
    Err(Error::validation(format!(
        "cannot parse set {t:?}; expected geN, leN, {{a,b,c}}, empty, full, or window JSON"
    )))
}

fn parse_gens(text: &str) -> Result<ZAction, Error> {
    let amounts = text
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<i64>()
                .map_err(|e| Error::validation(format!("generator {:?}: {e}", p.trim())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    ZAction::from_amounts(&amounts)
}

fn parse_group(text: &str) -> Result<FiniteGroup, Error> {
    let (kind, size) = text.split_once(':').ok_or_else(|| {
        Error::validation(format!("group {text:?}; expected cyclic:N or symmetric:K"))
    })?;
    let size: usize = size
        .trim()
        .parse()
        .map_err(|e| Error::validation(format!("group size in {text:?}: {e}")))?;
    match kind.trim() {
        "cyclic" => FiniteGroup::cyclic(size),
        "symmetric" => FiniteGroup::symmetric(size),
        other => Err(Error::validation(format!(
            "unknown group family {other:?}; expected cyclic or symmetric"
        ))),
    }
}

/// Either wire shape a representation file may hold.
#[derive(Deserialize)]
#[serde(untagged)]
enum AnyRepresentation {
    Atomic(AtomicRepresentation),
    Grounded(GroundedRepresentation),
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Negdef { io, tol } => {
            let kernel: Kernel = read_json(&io.input)?;
            let outcome = is_negative_definite(&kernel, tol)?;
            let code = match &outcome {
                NegDefOutcome::NegativeDefinite => ExitCode::SUCCESS,
                NegDefOutcome::Refuted { .. } => ExitCode::from(EXIT_FALSE),
            };
            emit(io.out.as_deref(), &outcome)?;
            Ok(code)
        }
        Command::Pseudometric { io, tol } => {
            let kernel: Kernel = read_json(&io.input)?;
            let outcome = is_pseudometric(&kernel, tol)?;
            let code = if outcome.is_pseudometric() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FALSE)
            };
            emit(io.out.as_deref(), &outcome)?;
            Ok(code)
        }
        Command::Embed { io, tol } => {
            let kernel: Kernel = read_json(&io.input)?;
            if let Some(code) = negdef_gate(&kernel, tol, io.out.as_deref())? {
                return Ok(code);
            }
            match schoenberg_embed(&kernel, tol) {
                Ok(config) => {
                    emit(io.out.as_deref(), &config)?;
                    Ok(ExitCode::SUCCESS)
                }
                Err(Error::NotNegativeDefinite { eigenvalue }) => {
                    emit(io.out.as_deref(), &not_negdef_payload(eigenvalue))?;
                    Ok(ExitCode::from(EXIT_FALSE))
                }
                Err(e) => Err(e),
            }
        }
        Command::Crofton { io, pos, neg, estimate } => {
            let config: PointConfiguration = read_json(&io.input)?;
            let cylinder = CylinderSpec::new(pos, neg)?;
            let result = cylinder_measure(&config, &cylinder, &estimate.options())?;
            emit(io.out.as_deref(), &result)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::SqrtRep { io, tol, atom_cap, estimate } => {
            let kernel: Kernel = read_json(&io.input)?;
            if let Some(code) = negdef_gate(&kernel, tol, io.out.as_deref())? {
                return Ok(code);
            }
            let opts = CroftonOptions { atom_cap, ..estimate.options() };
            match sqrt_representation(&kernel, tol, &opts) {
                Ok(rep) => {
                    emit(io.out.as_deref(), &rep)?;
                    Ok(ExitCode::SUCCESS)
                }
                Err(Error::NotNegativeDefinite { eigenvalue }) => {
                    emit(io.out.as_deref(), &not_negdef_payload(eigenvalue))?;
                    Ok(ExitCode::from(EXIT_FALSE))
                }
                Err(e) => Err(e),
            }
        }
        Command::Decompose { io, cap, exact } => {
            let kernel: Kernel = read_json(&io.input)?;
            let opts = DecomposeOptions { cap, exact };
            match decompose(&kernel, &opts)? {
                Decomposition::Feasible(rep) => {
                    emit(
                        io.out.as_deref(),
                        &json!({ "verdict": "feasible", "representation": rep }),
                    )?;
                    Ok(ExitCode::SUCCESS)
                }
                Decomposition::Infeasible(cert) => {
                    emit(
                        io.out.as_deref(),
                        &json!({ "verdict": "infeasible", "certificate": cert }),
                    )?;
                    Ok(ExitCode::from(EXIT_FALSE))
                }
            }
        }
        Command::KernelOf { io } => {
            let kernel = match read_json::<AnyRepresentation>(&io.input)? {
                AnyRepresentation::Atomic(rep) => rep.symmetric_difference_kernel()?,
                AnyRepresentation::Grounded(rep) => rep.symmetric_difference_kernel()?,
            };
            emit(io.out.as_deref(), &kernel)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Tree { io } => {
            let tree: Tree = read_json(&io.input)?;
            let representation = tree_representation(&tree);
            let kernel = distance_kernel(&tree)?;
            emit(
                io.out.as_deref(),
                &json!({ "kernel": kernel, "representation": representation }),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Defect { set, k, out } => {
            let set = parse_set(&set)?;
            let mass = defect(&set, k)?;
            emit(out.as_deref(), &mass)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Growth { gens, set, radius, csv, out } => {
            let action = parse_gens(&gens)?;
            let set = parse_set(&set)?;
            let rows = defect_growth(&action, &set, radius)?;
            match csv {
                Some(path) => {
                    let mut text = String::from("length,max_defect\n");
                    for row in &rows {
                        text.push_str(&format!("{},{}\n", row.length, row.max_defect));
                    }
                    write_text(Some(&path), &text)?;
                }
                None => emit(out.as_deref(), &rows)?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Invariance { io, group, g, pos, neg, tol, estimate } => {
            let kernel: Kernel = read_json(&io.input)?;
            let group = parse_group(&group)?;
            let cylinder = CylinderSpec::new(pos, neg)?;
            match group_cylinder_invariance(&kernel, &group, &g, &cylinder, tol, &estimate.options())
            {
                Ok(report) => {
                    emit(io.out.as_deref(), &report)?;
                    Ok(ExitCode::SUCCESS)
                }
                Err(Error::NotNegativeDefinite { eigenvalue }) => {
                    emit(io.out.as_deref(), &not_negdef_payload(eigenvalue))?;
                    Ok(ExitCode::from(EXIT_FALSE))
                }
                Err(e) => Err(e),
            }
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Validation(_) | Error::SizeLimit { .. } => EXIT_VALIDATION,
        Error::Solver(_) => EXIT_SOLVER,
        Error::NotNegativeDefinite { .. } => EXIT_FALSE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
