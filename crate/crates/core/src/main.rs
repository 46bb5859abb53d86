use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use matinsdel::engine::{EnumerateError, TraceStep, DEFAULT_FORM_SLACK};
use matinsdel::verify::{
    bounded_equivalence, check_family, inject_fault, scan_invariant, Fault, Predicate, ScanTarget,
};
use matinsdel::{
    compile_theorem, enumerate, parse_grammar, parse_system, print_system, replay, size_of, validate, validate_gnf,
    CompileError, EnumerationBounds, Grammar, MatrixSystem, Theorem, Violation, Word,
};

const OK: u8 = 0;
const FAILED: u8 = 1;
const PARSE: u8 = 2;
const BOUNDS: u8 = 3;
const INVALID: u8 = 4;

#[derive(Parser)]
#[command(
    name = "matinsdel",
    version,
    about = "Matrix insertion-deletion systems from Geffert normal form grammars"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the terminal strings of a system up to a length bound.
    Enumerate {
        system: PathBuf,
        #[command(flatten)]
        bounds: BoundArgs,
        /// Print a derivation of this string (space separated symbols).
        #[arg(long)]
        witness: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compile a grammar into a matrix system.
    Compile {
        grammar: PathBuf,
        #[arg(long, short)]
        theorem: String,
        /// Write the system here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Compare the bounded languages of a grammar and its compiled system.
    Verify {
        grammar: PathBuf,
        #[arg(long, short)]
        theorem: String,
        #[command(flatten)]
        bounds: BoundArgs,
        /// Mutate the compiled system first; without a name, the default
        /// fault of the theorem.
        #[arg(long, num_args = 0..=1, default_missing_value = "")]
        inject_fault: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Check a grammar or system file for well-formedness.
    Validate { file: PathBuf },
    /// Re-execute a trace file against a system.
    ///
    /// The first line of the trace is the start string; each further line is
    /// `label: w1 => w2 => ...` with one string per rule of the matrix.
    Replay { system: PathBuf, trace: PathBuf },
    /// Check an invariant on every reachable configuration.
    Scan {
        /// A system or a grammar file.
        file: PathBuf,
        /// marker-count, single-nonterminal, xy-count or stage-separation.
        #[arg(long, short)]
        predicate: String,
        /// Grammar whose nonterminals the predicate refers to, when `file`
        /// is a system.
        #[arg(long)]
        grammar: Option<PathBuf>,
        #[command(flatten)]
        bounds: BoundArgs,
    },
}

#[derive(Args)]
struct BoundArgs {
    /// Longest terminal string to collect.
    #[arg(long, short = 'k', default_value_t = 4)]
    max_len: usize,
    /// Sentential forms may be this much longer than `--max-len`.
    #[arg(long, default_value_t = DEFAULT_FORM_SLACK)]
    form_slack: usize,
    /// Derivation length limit (default unlimited).
    #[arg(long)]
    max_steps: Option<usize>,
}

impl BoundArgs {
    fn bounds(&self) -> EnumerationBounds {
        EnumerationBounds::new(self.max_len, self.max_len + self.form_slack, self.max_steps)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(PARSE, format!("{}: {e}", path.display())))
}

fn load_system(path: &Path) -> Result<MatrixSystem, Failure> {
    parse_system(&read(path)?).map_err(|e| Failure::new(PARSE, format!("{}: {e}", path.display())))
}

fn load_grammar(path: &Path) -> Result<Grammar, Failure> {
    parse_grammar(&read(path)?).map_err(|e| Failure::new(PARSE, format!("{}: {e}", path.display())))
}

fn violations(title: &str, vs: &[Violation]) -> Failure {
    let mut message = title.to_owned();
    for v in vs {
        message.push_str(&format!("\n  {v}"));
    }
    Failure::new(INVALID, message)
}

fn enumerate_failure(e: EnumerateError) -> Failure {
    match e {
        EnumerateError::Invalid(vs) => violations("invalid input:", &vs),
        other => Failure::new(BOUNDS, other.to_string()),
    }
}

fn compile_failure(e: CompileError) -> Failure {
    match e {
        CompileError::InvalidGrammar(vs) => violations("grammar is not in special Geffert normal form:", &vs),
        other => Failure::new(INVALID, other.to_string()),
    }
}

/// Validates `g` and brings it into special form.
fn special_form(g: &Grammar) -> Result<matinsdel::SpecialGeffertGrammar, Failure> {
    let vs = validate_gnf(g);
    if !vs.is_empty() {
        return Err(violations("grammar is not in normal form:", &vs));
    }
    Ok(g.to_special())
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Enumerate {
            system,
            bounds,
            witness,
            format,
        } => {
            let sys = load_system(&system)?;
            let lang = enumerate(&sys, &bounds.bounds()).map_err(enumerate_failure)?;
            if format == Format::Json {
                println!("{}", json(&lang));
            } else {
                for w in &lang.strings {
                    println!("{w}");
                }
            }
            if let Some(target) = witness {
                let target = Word::parse(&target);
                match lang.witnesses.get(&target) {
                    Some(w) if format == Format::Text => println!("witness for {target}:\n{w}"),
                    Some(_) => {}
                    None => {
                        return Err(Failure::new(
                            FAILED,
                            format!("`{target}` not derived within {}", lang.bounds),
                        ))
                    }
                }
            }
            Ok(OK)
        }
        Command::Compile {
            grammar,
            theorem,
            output,
        } => {
            let g = special_form(&load_grammar(&grammar)?)?;
            let theorem: Theorem = theorem.parse().map_err(compile_failure)?;
            let out = compile_theorem(&g, theorem).map_err(compile_failure)?;
            let text = print_system(&out.system);
            let summary = format!("size={} width={}", size_of(&out.system), out.system.max_width());
            match output {
                Some(path) => {
                    fs::write(&path, text).map_err(|e| Failure::new(PARSE, format!("{}: {e}", path.display())))?;
                    println!("{summary}");
                }
                None => {
                    print!("{text}");
                    eprintln!("{summary}");
                }
            }
            Ok(OK)
        }
        Command::Verify {
            grammar,
            theorem,
            bounds,
            inject_fault: fault,
            format,
        } => {
            let g = load_grammar(&grammar)?;
            let special = special_form(&g)?;
            let theorem: Theorem = theorem.parse().map_err(compile_failure)?;
            let out = compile_theorem(&special, theorem).map_err(compile_failure)?;
            let mut family = check_family(&out);
            let system = match fault {
                None => out.system.clone(),
                Some(name) => {
                    let fault = if name.is_empty() {
                        Fault::default_for(theorem)
                    } else {
                        name.parse()
                            .map_err(|e: matinsdel::verify::FaultError| Failure::new(INVALID, e.to_string()))?
                    };
                    eprintln!("injecting fault {fault}");
                    let faulty =
                        inject_fault(&special, &out, fault).map_err(|e| Failure::new(INVALID, e.to_string()))?;
                    let mut mutated = out.clone();
                    mutated.system = faulty.clone();
                    family = check_family(&mutated);
                    faulty
                }
            };
            let report = bounded_equivalence(&g, &system, &bounds.bounds()).map_err(enumerate_failure)?;
            if format == Format::Json {
                #[derive(Serialize)]
                struct Verification<'a> {
                    theorem: Theorem,
                    family: String,
                    family_violations: &'a [Violation],
                    report: &'a matinsdel::EquivalenceReport,
                }
                println!(
                    "{}",
                    json(&Verification {
                        theorem,
                        family: out.declared_family.to_string(),
                        family_violations: &family,
                        report: &report,
                    })
                );
            } else {
                println!("theorem: {theorem}");
                println!("family: {} (size {})", out.declared_family, size_of(&system));
                for v in &family {
                    println!("family violation: {v}");
                }
                print!("{report}");
            }
            Ok(if report.equal && family.is_empty() { OK } else { FAILED })
        }
        Command::Validate { file } => {
            let text = read(&file)?;
            let is_system = text
                .lines()
                .map(str::trim)
                .find(|l| !l.is_empty() && !l.starts_with('#'))
                .is_some_and(|l| l == matinsdel::text::SYSTEM_HEADER);
            let vs = if is_system {
                validate(&parse_system(&text).map_err(|e| Failure::new(PARSE, format!("{}: {e}", file.display())))?)
            } else {
                validate_gnf(
                    &parse_grammar(&text).map_err(|e| Failure::new(PARSE, format!("{}: {e}", file.display())))?,
                )
            };
            if vs.is_empty() {
                println!("ok");
                Ok(OK)
            } else {
                Err(violations("violations:", &vs))
            }
        }
        Command::Replay { system, trace } => {
            let sys = load_system(&system)?;
            let text = read(&trace)?;
            let (start, steps) =
                parse_trace(&text).map_err(|m| Failure::new(PARSE, format!("{}: {m}", trace.display())))?;
            let end = replay(&steps, &sys, &start).map_err(|e| Failure::new(FAILED, e.to_string()))?;
            println!("{end}");
            Ok(OK)
        }
        Command::Scan {
            file,
            predicate,
            grammar,
            bounds,
        } => {
            let text = read(&file)?;
            let parsed_grammar = parse_grammar(&text).ok();
            let context = match (&grammar, &parsed_grammar) {
                (Some(path), _) => Some(special_form(&load_grammar(path)?)?),
                (None, Some(g)) => Some(special_form(g)?),
                (None, None) => None,
            };
            let predicate =
                Predicate::named(&predicate, context.as_ref()).map_err(|e| Failure::new(INVALID, e.to_string()))?;
            let system;
            let target = match &parsed_grammar {
                Some(g) => ScanTarget::Grammar(g),
                None => {
                    system =
                        parse_system(&text).map_err(|e| Failure::new(PARSE, format!("{}: {e}", file.display())))?;
                    ScanTarget::System(&system)
                }
            };
            let result = scan_invariant(target, &bounds.bounds(), &predicate).map_err(enumerate_failure)?;
            println!(
                "{}: {} configurations, exhausted: {}",
                predicate.name(),
                result.configurations,
                result.exhausted
            );
            match result.violation {
                None => Ok(OK),
                Some(v) => {
                    println!("violated by {}\nwitness: {}", v.configuration, v.witness);
                    Ok(FAILED)
                }
            }
        }
    }
}

/// Start string on the first content line, then `label: w1 => w2 ...`.
fn parse_trace(text: &str) -> Result<(Word, Vec<TraceStep>), String> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let start = lines.next().map(|(_, l)| Word::parse(l)).ok_or("empty trace")?;
    let steps = lines
        .map(|(i, l)| {
            let (label, rest) = l
                .split_once(':')
                .ok_or(format!("line {}: expected `label: w1 => ...`", i + 1))?;
            Ok(TraceStep {
                label: label.trim().to_owned(),
                intermediates: rest.split("=>").map(Word::parse).collect(),
            })
        })
        .collect::<Result<_, String>>()?;
    Ok((start, steps))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
