//! `fop`: batch front end for parsing, normalizing, evaluating, grounding and
//! proving first-order programming sentences.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use fop_core::eval::{sentence_value, Model};
use fop_core::exec::{set_threads, Exec};
use fop_core::ground::{concrete_ground, concrete_value, ground_subproblem, naive_infer, InstanceStream, NaiveConfig, NaiveOutcome};
use fop_core::lifted::{
    entailment_refutand, epsilon_refutand, infer_value, refute_formula, verify_trace, Outcome, ProofTrace, RefuteConfig,
    ValueConfig,
};
use fop_core::milp::to_lp_format;
use fop_core::normal::{normalize, to_min_normal};
use fop_core::parser::{parse_fol, parse_formula, parse_problem, parse_problem_with, translate_fol, translate_fol_simplified, ProblemFile, TranslationMode};
use fop_core::rational::parse_q;
use fop_core::{Formula, Signature, Q};
use serde_json::json;

const EXIT_OK: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_NO_INPUT: u8 = 66;
const EXIT_CANT_CREATE: u8 = 73;

#[derive(Parser, Debug)]
#[command(name = "fop", version, about = "First-order programming: parse, normalize, evaluate, ground and prove")]
struct Cli {
    #[command(flatten)]
    budgets: Budgets,
    /// Worker threads for data-parallel stages; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Budgets {
    /// Largest Herbrand depth explored.
    #[arg(long, global = true, value_parser = positive)]
    depth: Option<usize>,
    /// Ground subproblems decided before giving up (naive inference).
    #[arg(long, global = true, value_parser = positive)]
    max_subproblems: Option<usize>,
    /// Gomory cuts allowed.
    #[arg(long, global = true, value_parser = positive)]
    cut_budget: Option<usize>,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("`{s}` is not a positive integer")),
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Mode {
    A,
    B,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a problem file and pretty-print its sentence.
    Parse {
        file: PathBuf,
        /// Print with Unicode operators.
        #[arg(long)]
        unicode: bool,
    },
    /// Print the min-normal or reduced normal form.
    #[command(group(ArgGroup::new("form").required(true).args(["min", "reduced"])))]
    Normalize {
        file: PathBuf,
        #[arg(long)]
        min: bool,
        #[arg(long)]
        reduced: bool,
    },
    /// Evaluate in a model, over the concrete domain, or bound the value.
    #[command(group(ArgGroup::new("how").args(["model", "concrete"])))]
    Value {
        file: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        concrete: bool,
    },
    /// Ground the sentence and write the MILP in LP format.
    Ground {
        file: PathBuf,
        #[arg(long)]
        lp: PathBuf,
    },
    /// Decide whether the sentence can reach a nonnegative value.
    #[command(group(ArgGroup::new("engine").required(true).args(["naive", "lifted"])))]
    Feasible {
        file: PathBuf,
        #[arg(long)]
        naive: bool,
        #[arg(long)]
        lifted: bool,
    },
    /// Prove that the sentence entails the query.
    Entail {
        file: PathBuf,
        #[arg(long)]
        query: Option<PathBuf>,
        /// Prove the query exceeds this margin instead of being nonnegative.
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        emit_trace: Option<PathBuf>,
    },
    /// Refute the sentence and write the proof trace.
    Prove {
        file: PathBuf,
        #[arg(long)]
        emit_trace: PathBuf,
    },
    /// Replay a proof trace against the sentence, or against the entailment
    /// refutand when a query is given.
    Verify {
        file: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        query: Option<PathBuf>,
        #[arg(long)]
        eps: Option<String>,
    },
    /// Translate a first-order logic file into a sentence.
    Translate {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "b")]
        mode: Mode,
        /// Fold constants and collapse safe clamps (mode B only).
        #[arg(long)]
        simplify: bool,
    },
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

type Res<T> = Result<T, Failure>;

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| fail(EXIT_NO_INPUT, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Res<()> {
    fs::write(path, text).map_err(|e| fail(EXIT_CANT_CREATE, format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Res<ProblemFile> {
    let text = read(path)?;
    parse_problem(&text).map_err(|e| fail(EXIT_DATA, format!("{}:{e}", path.display())))
}

/// A query file holds either a bare formula or a problem file whose `query`
/// or `sentence` is used, both over the main signature.
fn load_query(path: &Path, sig: &Signature) -> Res<Formula> {
    let text = read(path)?;
    let bare = text.trim().trim_end_matches(';');
    if let Ok(f) = parse_formula(bare, sig) {
        return Ok(f);
    }
    let p = parse_problem_with(&text, sig).map_err(|e| fail(EXIT_DATA, format!("{}:{e}", path.display())))?;
    Ok(p.query.unwrap_or(p.sentence))
}

fn parse_eps(s: &Option<String>) -> Res<Option<Q>> {
    s.as_deref()
        .map(|t| parse_q(t).ok_or_else(|| fail(EXIT_USAGE, format!("`{t}` is not a rational number"))))
        .transpose()
}

struct Ctx {
    json: bool,
    exec: Exec,
    budgets: Budgets,
}

impl Ctx {
    fn refute_cfg(&self) -> RefuteConfig {
        let d = RefuteConfig::default();
        RefuteConfig {
            max_depth: self.budgets.depth.unwrap_or(d.max_depth),
            cut_budget: self.budgets.cut_budget.unwrap_or(d.cut_budget),
            exec: self.exec,
            ..d
        }
    }

    fn naive_cfg(&self) -> NaiveConfig {
        let d = NaiveConfig::default();
        NaiveConfig {
            max_depth: self.budgets.depth.unwrap_or(d.max_depth),
            max_subproblems: self.budgets.max_subproblems.unwrap_or(d.max_subproblems),
            cut_budget: self.budgets.cut_budget.unwrap_or(d.cut_budget),
            exec: self.exec,
            ..d
        }
    }

    fn value_cfg(&self) -> ValueConfig {
        let d = ValueConfig::default();
        ValueConfig {
            max_depth: self.budgets.depth.unwrap_or(d.max_depth),
            cut_budget: self.budgets.cut_budget.unwrap_or(d.cut_budget),
            brute_force: fop_core::eval::BruteForceConfig { exec: self.exec, ..d.brute_force.clone() },
            ..d
        }
    }

    fn emit(&self, text: impl std::fmt::Display, value: serde_json::Value) {
        if self.json {
            println!("{value}");
        } else {
            println!("{text}");
        }
    }
}

/// Reports a refutation outcome under the given verdict words.
fn report_refutation(ctx: &Ctx, out: &Outcome, words: [&str; 3], trace_path: Option<&Path>) -> Res<u8> {
    match out {
        Outcome::Proved(t) => {
            if let Some(p) = trace_path {
                write(p, &t.to_json())?;
            }
            ctx.emit(words[0], json!({"result": words[0], "steps": t.steps.len()}));
            Ok(EXIT_OK)
        }
        Outcome::BudgetExhausted { saturated: true } => {
            ctx.emit(words[1], json!({"result": words[1]}));
            Ok(EXIT_NEGATIVE)
        }
        Outcome::BudgetExhausted { saturated: false } => {
            ctx.emit(words[2], json!({"result": words[2]}));
            Ok(EXIT_UNKNOWN)
        }
    }
}

fn run(cli: Cli) -> Res<u8> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(fail(EXIT_USAGE, "--jobs must be positive"));
        }
        set_threads(n);
    }
    let exec = if cli.jobs == Some(1) { Exec::Sequential } else { Exec::default() };
    let ctx = Ctx { json: cli.json, exec, budgets: cli.budgets };
    match cli.command {
        Command::Parse { file, unicode } => {
            let p = load(&file)?;
            let text = if unicode { p.sentence.to_unicode() } else { p.sentence.to_ascii() };
            ctx.emit(&text, json!({"sentence": text}));
            Ok(EXIT_OK)
        }
        Command::Normalize { file, min, .. } => {
            let p = load(&file)?;
            let lines: Vec<String> = if min {
                to_min_normal(&p.sentence, &p.signature).superclauses.iter().map(|c| c.to_string()).collect()
            } else {
                normalize(&p.sentence, &p.signature).clauses.iter().map(|c| c.to_string()).collect()
            };
            ctx.emit(lines.join("\n"), json!({"form": if min { "min" } else { "reduced" }, "clauses": lines}));
            Ok(EXIT_OK)
        }
        Command::Value { file, model, concrete } => {
            let p = load(&file)?;
            if let Some(m) = model {
                let text = read(&m)?;
                let model = Model::parse(&text).map_err(|e| fail(EXIT_DATA, format!("{}: {e}", m.display())))?;
                let v = sentence_value(&p.sentence, &model).map_err(|e| fail(EXIT_DATA, e.to_string()))?;
                ctx.emit(&v, json!({"value": v.to_string()}));
            } else if concrete {
                let budget = ctx.budgets.cut_budget.unwrap_or(500);
                let v = concrete_value(&p, budget).map_err(|e| fail(EXIT_DATA, e.to_string()))?;
                let assignment: serde_json::Map<String, serde_json::Value> =
                    v.assignment.iter().map(|(a, x)| (a.to_string(), json!(x.to_string()))).collect();
                ctx.emit(&v.value, json!({"value": v.value.to_string(), "assignment": assignment}));
            } else {
                let b = infer_value(&p.sentence, &p.signature, &ctx.value_cfg());
                let lower = b.lower.as_ref().map(|l| l.to_string());
                let text = match &lower {
                    Some(l) if *l == b.upper.to_string() => l.clone(),
                    Some(l) => format!("[{l}, {}]", b.upper),
                    None => format!("<= {}", b.upper),
                };
                ctx.emit(text, json!({"lower": lower, "upper": b.upper.to_string()}));
            }
            Ok(EXIT_OK)
        }
        Command::Ground { file, lp } => {
            let p = load(&file)?;
            let gp = if p.objects.is_some() {
                concrete_ground(&p).map_err(|e| fail(EXIT_DATA, e.to_string()))?
            } else {
                let r = normalize(&p.sentence, &p.signature);
                let depth = ctx.budgets.depth.unwrap_or(1);
                let inst = InstanceStream::new(&r.clauses).upto(depth).to_vec();
                ground_subproblem(&r, &inst).map_err(|e| fail(EXIT_DATA, e.to_string()))?
            };
            write(&lp, &to_lp_format(&gp.milp, None))?;
            ctx.emit(
                format!("{} instances, {} atoms, {} constraints", gp.instances.len(), gp.atoms.len(), gp.milp.constraints.len()),
                json!({"instances": gp.instances.len(), "atoms": gp.atoms.len(), "constraints": gp.milp.constraints.len()}),
            );
            Ok(EXIT_OK)
        }
        Command::Feasible { file, naive, .. } => {
            let p = load(&file)?;
            if naive {
                match naive_infer(&normalize(&p.sentence, &p.signature), &ctx.naive_cfg()) {
                    NaiveOutcome::Infeasible(c) => {
                        ctx.emit(
                            "INFEASIBLE",
                            json!({"result": "INFEASIBLE", "depth": c.depth, "instances": c.problem.instances.len(), "cuts": c.certificate.cuts.len()}),
                        );
                        Ok(EXIT_NEGATIVE)
                    }
                    NaiveOutcome::BudgetExhausted { examined } => {
                        ctx.emit("UNKNOWN", json!({"result": "UNKNOWN", "examined": examined}));
                        Ok(EXIT_UNKNOWN)
                    }
                }
            } else {
                let out = refute_formula(&p.sentence, &p.signature, &ctx.refute_cfg());
                let code = report_refutation(&ctx, &out, ["INFEASIBLE", "FEASIBLE", "UNKNOWN"], None)?;
                Ok(match code {
                    EXIT_OK => EXIT_NEGATIVE,
                    EXIT_NEGATIVE => EXIT_OK,
                    c => c,
                })
            }
        }
        Command::Entail { file, query, eps, emit_trace } => {
            let p = load(&file)?;
            let q = match (&query, &p.query) {
                (Some(path), _) => load_query(path, &p.signature)?,
                (None, Some(q)) => q.clone(),
                (None, None) => return Err(fail(EXIT_USAGE, "no query: pass --query FILE or declare one in the problem")),
            };
            let refutand = refutand_for(&p, &q, &parse_eps(&eps)?)?;
            let out = refute_formula(&refutand, &p.signature, &ctx.refute_cfg());
            report_refutation(&ctx, &out, ["PROVED", "DISPROVED", "UNKNOWN"], emit_trace.as_deref())
        }
        Command::Prove { file, emit_trace } => {
            let p = load(&file)?;
            let out = refute_formula(&p.sentence, &p.signature, &ctx.refute_cfg());
            report_refutation(&ctx, &out, ["PROVED", "DISPROVED", "UNKNOWN"], Some(&emit_trace))
        }
        Command::Verify { file, trace, query, eps } => {
            let p = load(&file)?;
            let text = read(&trace)?;
            let t = ProofTrace::from_json(&text).map_err(|e| fail(EXIT_DATA, format!("{}: {e}", trace.display())))?;
            let target = match query {
                Some(path) => {
                    let q = load_query(&path, &p.signature)?;
                    refutand_for(&p, &q, &parse_eps(&eps)?)?
                }
                None => p.sentence.clone(),
            };
            match verify_trace(&target, &p.signature, &t) {
                Ok(()) => {
                    ctx.emit("VALID", json!({"result": "VALID"}));
                    Ok(EXIT_OK)
                }
                Err(e) => {
                    let step = e.step_index(&t);
                    eprintln!("{e}");
                    ctx.emit(format!("INVALID at step {step}"), json!({"result": "INVALID", "step": step, "reason": e.to_string()}));
                    Ok(EXIT_NEGATIVE)
                }
            }
        }
        Command::Translate { file, mode, simplify } => {
            let text = read(&file)?;
            let fol = parse_fol(&text).map_err(|e| fail(EXIT_DATA, format!("{}:{e}", file.display())))?;
            let f = match (mode, simplify) {
                (Mode::B, true) => translate_fol_simplified(&fol.formula),
                (Mode::A, true) => return Err(fail(EXIT_USAGE, "--simplify applies to mode B only")),
                (Mode::A, false) => translate_fol(&fol.formula, TranslationMode::A),
                (Mode::B, false) => translate_fol(&fol.formula, TranslationMode::B),
            };
            let threshold = match mode {
                Mode::A => TranslationMode::A.threshold(),
                Mode::B => TranslationMode::B.threshold(),
            };
            ctx.emit(f.to_ascii(), json!({"sentence": f.to_ascii(), "threshold": threshold.to_string()}));
            Ok(EXIT_OK)
        }
    }
}

fn refutand_for(p: &ProblemFile, q: &Formula, eps: &Option<Q>) -> Res<Formula> {
    match eps {
        Some(e) => Ok(epsilon_refutand(&p.sentence, q, e)),
        None => entailment_refutand(&p.sentence, q, &p.signature).map_err(|e| fail(EXIT_DATA, format!("{e}; pass --eps"))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
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
