//! `mu2`: prove or refute two-way alternation-free mu-calculus formulas.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0  | proved; proof accepted; formula true; corpus passed |
//! | 1  | proof rejected; formula false; corpus had failures |
//! | 2  | parse error or bad usage |
//! | 3  | search budget exhausted before a decision |
//! | 10 | refuted, countermodel verified |
//! | 11 | refuted, no countermodel verified within the depth cap |
//! | 70 | internal invariant violated |
//! | 74 | file could not be read or written |

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use mu2_core::calculus::{context_for, intern_sequent, parse_sequent};
use mu2_core::countermodel::{verified_refute, CountermodelError, DEFAULT_DEPTH};
use mu2_core::search::{prove, verify_proof, Mode, Outcome, Proof, SearchConfig, SearchError};
use mu2_core::semantics::{fixpoint_oracle, model_check, KripkeModel};
use mu2_core::syntax::{parse_formula, Context, Formula};
use mu2_core::{Annotation, Member, Sequent};

mod suites;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NO: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;
pub const EXIT_REFUTED: u8 = 10;
pub const EXIT_UNVERIFIED: u8 = 11;
pub const EXIT_INTERNAL: u8 = 70;
pub const EXIT_IO: u8 = 74;

#[derive(Parser, Debug)]
#[command(
    name = "mu2",
    version,
    about = "Cyclic proofs and countermodels for the two-way alternation-free mu-calculus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
struct SearchArgs {
    /// Prover strategy in the search game.
    #[arg(long, env = "MU2_MODE", default_value = "phased")]
    mode: Mode,
    /// Largest modal depth tried when building a countermodel.
    #[arg(long, env = "MU2_DEPTH", default_value_t = DEFAULT_DEPTH)]
    depth: usize,
    /// Position budget of the search game.
    #[arg(long, env = "MU2_MAX_POSITIONS")]
    max_positions: Option<usize>,
    /// Write the proof or countermodel as Graphviz here.
    #[arg(long, env = "MU2_DOT")]
    dot: Option<PathBuf>,
    /// Write the JSON result here instead of standard output.
    #[arg(long, env = "MU2_JSON")]
    json: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Prove a formula, or refute it with a verified countermodel.
    Prove {
        /// The formula; with --imp, the antecedent.
        formula: String,
        /// The consequent, with --imp.
        consequent: Option<String>,
        /// Prove `formula -> consequent`, that is `~formula | consequent`.
        #[arg(long, env = "MU2_IMP", requires = "consequent")]
        imp: bool,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Same as prove, for a sequent such as `p [f], q ~> r`.
    ProveSeq {
        sequent: String,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Check a proof file.
    Check { proof: PathBuf },
    /// Evaluate a formula at a state of a model file.
    Modelcheck {
        model: PathBuf,
        formula: String,
        /// State name.
        #[arg(long, env = "MU2_STATE")]
        state: String,
        /// Also run fixpoint iteration and fail on disagreement.
        #[arg(long, env = "MU2_ORACLE")]
        oracle: bool,
    },
    /// Test corpora.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Subcommand, Debug)]
enum CorpusAction {
    /// Run the golden and randomized suites.
    Run {
        #[arg(long, env = "MU2_SEED", default_value_t = 0)]
        seed: u64,
        /// Cases per randomized suite.
        #[arg(long, env = "MU2_CASES", default_value_t = 50)]
        cases: usize,
        #[arg(long, env = "MU2_JSON")]
        json: Option<PathBuf>,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl std::fmt::Display) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

type Run = Result<u8, Failure>;

fn parse(text: &str) -> Result<Formula, Failure> {
    parse_formula(text).map_err(|e| Failure::new(EXIT_PARSE, format!("{text}: {e}")))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn emit_json(value: &serde_json::Value, path: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("json serializes") + "\n";
    match path {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn config(args: &SearchArgs, mode: Mode) -> SearchConfig {
    let mut cfg = SearchConfig::with_mode(mode);
    if let Some(n) = args.max_positions {
        cfg.max_positions = n;
    }
    cfg
}

fn search(ctx: Arc<Context>, root: &Sequent, cfg: SearchConfig) -> Result<Outcome, Failure> {
    prove(ctx, root, cfg).map_err(|e| match e {
        SearchError::Budget(_) => Failure::new(EXIT_BUDGET, e),
        SearchError::ContextMismatch => Failure::new(EXIT_INTERNAL, e),
    })
}

fn decide(ctx: Arc<Context>, root: &Sequent, args: &SearchArgs) -> Run {
    let outcome = search(ctx.clone(), root, config(args, args.mode))?;
    let witness = match outcome {
        Outcome::Proved(proof) => {
            verify_proof(&proof).map_err(|defects| {
                let list: Vec<String> = defects.iter().map(|d| d.to_string()).collect();
                Failure::new(
                    EXIT_INTERNAL,
                    format!("extracted proof rejected:\n{}", list.join("\n")),
                )
            })?;
            emit_json(&proof.to_json(), args.json.as_deref())?;
            if let Some(p) = &args.dot {
                write(p, &proof.to_dot())?;
            }
            eprintln!("proved: {} nodes", proof.nodes.len());
            return Ok(EXIT_OK);
        }
        Outcome::Refuted(w) if args.mode == Mode::Phased => w,
        // countermodels are read off the phased game
        Outcome::Refuted(_) => match search(ctx, root, config(args, Mode::Phased))? {
            Outcome::Refuted(w) => w,
            Outcome::Proved(_) => {
                return Err(Failure::new(
                    EXIT_INTERNAL,
                    "full game refutes a sequent the phased game proves",
                ));
            }
        },
    };
    match verified_refute(&witness, args.depth) {
        Ok(cert) => {
            emit_json(&cert.to_json(), args.json.as_deref())?;
            if let Some(p) = &args.dot {
                write(p, &cert.to_dot())?;
            }
            eprintln!(
                "refuted: {}-state countermodel at depth {}",
                cert.model.len(),
                cert.depth
            );
            Ok(EXIT_REFUTED)
        }
        Err(CountermodelError::Unverified { depth }) => {
            let value = serde_json::json!({
                "status": "unverified",
                "depth": depth,
                "sequent": witness.search.sequent_at(witness.search.root()).display(witness.search.context()),
            });
            emit_json(&value, args.json.as_deref())?;
            eprintln!("refuted, but no countermodel verified up to depth {depth}");
            Ok(EXIT_UNVERIFIED)
        }
        Err(e) => Err(Failure::new(EXIT_INTERNAL, e)),
    }
}

fn run(cli: Cli) -> Run {
    match cli.command {
        Command::Prove {
            formula,
            consequent,
            imp,
            search,
        } => {
            let phi = parse(&formula)?;
            let phi = match consequent {
                Some(c) if imp => Formula::or(phi.negate(), parse(&c)?),
                Some(_) => return Err(Failure::new(EXIT_PARSE, "a second formula needs --imp")),
                None => phi,
            };
            let ctx =
                Arc::new(Context::new([phi.clone()]).map_err(|e| Failure::new(EXIT_PARSE, e))?);
            let id = ctx.id_of(&phi).expect("seed is in its context");
            let root = Sequent::from_members(&ctx, [Member::Formula(id, Annotation::F)]);
            decide(ctx, &root, &search)
        }
        Command::ProveSeq { sequent, search } => {
            let bad =
                |e: &dyn std::fmt::Display| Failure::new(EXIT_PARSE, format!("{sequent}: {e}"));
            let raw = parse_sequent(&sequent).map_err(|e| bad(&e))?;
            let ctx = Arc::new(context_for(&raw).map_err(|e| bad(&e))?);
            let root = intern_sequent(&ctx, &raw).map_err(|e| bad(&e))?;
            decide(ctx, &root, &search)
        }
        Command::Check { proof } => {
            let text = read(&proof)?;
            let proof = Proof::from_json(&text).map_err(|e| Failure::new(EXIT_PARSE, e))?;
            match verify_proof(&proof) {
                Ok(()) => {
                    eprintln!("accepted: {} nodes", proof.nodes.len());
                    Ok(EXIT_OK)
                }
                Err(defects) => {
                    for d in defects {
                        eprintln!("{d}");
                    }
                    Ok(EXIT_NO)
                }
            }
        }
        Command::Modelcheck {
            model,
            formula,
            state,
            oracle,
        } => {
            let m =
                KripkeModel::from_json(&read(&model)?).map_err(|e| Failure::new(EXIT_PARSE, e))?;
            let phi = parse(&formula)?;
            let s = m
                .state_index(&state)
                .ok_or_else(|| Failure::new(EXIT_PARSE, format!("unknown state `{state}`")))?;
            let holds = model_check(&m, s, &phi).map_err(|e| Failure::new(EXIT_INTERNAL, e))?;
            if oracle {
                let other = fixpoint_oracle(&m, &phi).contains(&s);
                if other != holds {
                    return Err(Failure::new(
                        EXIT_INTERNAL,
                        format!("evaluation game says {holds}, fixpoint iteration says {other}"),
                    ));
                }
            }
            println!("{holds}");
            Ok(if holds { EXIT_OK } else { EXIT_NO })
        }
        Command::Corpus {
            action: CorpusAction::Run { seed, cases, json },
        } => {
            let report = suites::run_all(seed, cases);
            for line in report.lines() {
                println!("{line}");
            }
            if let Some(p) = json {
                let text = serde_json::to_string_pretty(&report.to_json())
                    .expect("json serializes")
                    + "\n";
                write(&p, &text)?;
            }
            Ok(if report.passed() { EXIT_OK } else { EXIT_NO })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_PARSE } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
