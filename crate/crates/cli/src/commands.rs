//! Command-line surface. Exit codes: 0 success or pass, 1 property failure
//! or domain error, 2 parse or usage error, 3 inconclusive.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use orthokit_core::moves::JoinError;
use orthokit_core::oracle::{check_local_confluence_bounded, run_suite, GenParams, Suite, Verdict};
use orthokit_core::parallel::{parse_step_items, DEFAULT_STEP_CAP};
use orthokit_core::syntax::{parse_document, parse_term, parse_term_by};
use orthokit_core::{
    analyze, apply_parallel, critical_pairs, join_parallel_divergence, parallel_reducts_bounded,
    OrthoReport, ParallelStep, PropertyReport, Signature, StepError, Term, Trs,
};

use crate::{
    emit_report, CriticalPairDto, JoinWitnessDto, JsonReport, OrthoReportDto, PropertyReportDto,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "orthokit",
    version,
    about = "Orthogonality, critical pairs and parallel reduction for first-order TRSs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Linearity, ambiguity and orthogonality of a system
    Check {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// List the critical pairs of a system
    Cps {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Normalize a term, leftmost-innermost
    Rewrite {
        file: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long, default_value_t = 10_000)]
        fuel: usize,
    },
    /// One-step or parallel reducts of a term
    Reducts {
        file: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long)]
        parallel: bool,
    },
    /// Apply a parallel step given as "position:rule,..."
    Parallel {
        file: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long)]
        step: String,
    },
    /// Join two parallel steps from the same term (orthogonal systems only)
    Join {
        file: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long)]
        json: bool,
    },
    /// Bounded search for unjoinable local divergences
    Confluence {
        file: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        json: bool,
    },
    /// Run the randomized property suites
    Fuzz {
        #[arg(long, env = "ORTHOKIT_SEED", default_value_t = 0)]
        seed: u64,
        /// Generated systems per suite
        #[arg(long, default_value_t = 100)]
        cases: usize,
        /// Subject terms per generated system
        #[arg(long, default_value_t = 10)]
        terms: usize,
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Inclusion,
    Diamond,
    Triangle,
    All,
}

impl SuiteArg {
    fn suites(self) -> Vec<Suite> {
        match self {
            SuiteArg::Inclusion => vec![Suite::Inclusion],
            SuiteArg::Diamond => vec![Suite::Diamond],
            SuiteArg::Triangle => vec![Suite::Triangle],
            SuiteArg::All => Suite::ALL.to_vec(),
        }
    }
}

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct CmdError {
    pub code: u8,
    pub message: String,
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CmdError {}

fn usage(message: impl Into<String>) -> CmdError {
    CmdError {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn domain(message: impl Into<String>) -> CmdError {
    CmdError {
        code: EXIT_FAIL,
        message: message.into(),
    }
}

impl From<io::Error> for CmdError {
    fn from(e: io::Error) -> Self {
        domain(format!("write failed: {e}"))
    }
}

struct Loaded {
    text: String,
    trs: Trs,
    vars: BTreeSet<String>,
}

fn load(file: &Path) -> Result<Loaded, CmdError> {
    let text =
        std::fs::read_to_string(file).map_err(|e| usage(format!("{}: {e}", file.display())))?;
    let doc = parse_document(&text).map_err(|e| usage(format!("{}:{e}", file.display())))?;
    Ok(Loaded {
        vars: doc.var_decls.iter().cloned().collect(),
        trs: doc.trs,
        text,
    })
}

/// Parses `--term`. Symbols the system does not mention are accepted with the
/// arity of their first use; symbols it does mention must keep their arity.
fn read_term(text: &str, loaded: &Loaded) -> Result<Term, CmdError> {
    let mut sig = loaded.trs.signature().clone();
    if let Ok(raw) = parse_term_by(text, |v| loaded.vars.contains(v)) {
        declare_new(&mut sig, &raw);
    }
    parse_term(text, &sig, &loaded.vars).map_err(|e| usage(format!("--term:{e}")))
}

fn declare_new(sig: &mut Signature, t: &Term) {
    if let Term::App(f, args) = t {
        if !sig.contains(f) {
            sig.declare(f, args.len()).expect("fresh symbol");
        }
        for a in args {
            declare_new(sig, a);
        }
    }
}

fn read_step(flag: &str, text: &str, trs: &Trs, s: &Term) -> Result<ParallelStep, CmdError> {
    let items = parse_step_items(text).map_err(|e| usage(format!("--{flag}: {e}")))?;
    ParallelStep::infer(trs, s, &items).map_err(|e| match e {
        StepError::Syntax(_) => usage(format!("--{flag}: {e}")),
        _ => domain(format!("--{flag}: {e}")),
    })
}

/// Parses `args` and runs the command, writing to `out`. Returns the exit
/// code; errors are written to `err`.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    match run(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<u8, CmdError> {
    match &cli.command {
        Command::Check { file, json } => {
            let loaded = load(file)?;
            let report = analyze(&loaded.trs);
            if *json {
                let r = JsonReport::new("check", &[&loaded.text], OrthoReportDto::from(&report));
                out.write_all(emit_report(&r).as_bytes())?;
            } else {
                write_ortho(out, &report)?;
            }
            Ok(EXIT_OK)
        }
        Command::Cps { file, json } => {
            let loaded = load(file)?;
            let cps = critical_pairs(&loaded.trs);
            if *json {
                let payload: Vec<CriticalPairDto> = cps.iter().map(CriticalPairDto::from).collect();
                out.write_all(
                    emit_report(&JsonReport::new("cps", &[&loaded.text], payload)).as_bytes(),
                )?;
            } else if cps.is_empty() {
                writeln!(out, "no critical pairs")?;
            } else {
                for cp in &cps {
                    writeln!(out, "{cp} mgu {}", cp.mgu)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Rewrite { file, term, fuel } => {
            let loaded = load(file)?;
            let s = read_term(term, &loaded)?;
            match loaded.trs.normalize(&s, *fuel) {
                Some(nf) => {
                    writeln!(out, "{nf}")?;
                    Ok(EXIT_OK)
                }
                None => {
                    writeln!(
                        out,
                        "fuel exhausted after {fuel} steps without reaching a normal form"
                    )?;
                    Ok(EXIT_INCONCLUSIVE)
                }
            }
        }
        Command::Reducts {
            file,
            term,
            parallel,
        } => {
            let loaded = load(file)?;
            let s = read_term(term, &loaded)?;
            if *parallel {
                let steps =
                    parallel_reducts_bounded(&loaded.trs, &s, DEFAULT_STEP_CAP).map_err(|e| {
                        CmdError {
                            code: EXIT_INCONCLUSIVE,
                            message: e.to_string(),
                        }
                    })?;
                for (step, t) in steps {
                    writeln!(out, "[{step}] -> {t}")?;
                }
            } else {
                for (r, t) in loaded.trs.one_step_reducts(&s) {
                    writeln!(out, "{}:{} -> {t}", r.position, r.rule)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Parallel { file, term, step } => {
            let loaded = load(file)?;
            let s = read_term(term, &loaded)?;
            let step = read_step("step", step, &loaded.trs, &s)?;
            let t = apply_parallel(&loaded.trs, &s, &step).map_err(|e| domain(e.to_string()))?;
            writeln!(out, "{t}")?;
            Ok(EXIT_OK)
        }
        Command::Join {
            file,
            term,
            left,
            right,
            json,
        } => {
            let loaded = load(file)?;
            let s = read_term(term, &loaded)?;
            let l = read_step("left", left, &loaded.trs, &s)?;
            let r = read_step("right", right, &loaded.trs, &s)?;
            let w = match join_parallel_divergence(&loaded.trs, &s, &l, &r) {
                Ok(w) => w,
                Err(JoinError::NotOrthogonal) => {
                    let mut msg = String::from("the system is not orthogonal");
                    let report = analyze(&loaded.trs);
                    for n in &report.offending_rules {
                        msg.push_str(&format!(
                            "\n  rule {}: variable {} occurs {} times in the left-hand side",
                            n.rule, n.var, n.occurrences
                        ));
                    }
                    for cp in &report.sample_cps {
                        msg.push_str(&format!("\n  critical pair {cp}"));
                    }
                    return Err(domain(msg));
                }
                Err(e) => return Err(domain(e.to_string())),
            };
            if *json {
                let r = JsonReport::new(
                    "join",
                    &[&loaded.text, term, left, right],
                    JoinWitnessDto::from(&w),
                );
                out.write_all(emit_report(&r).as_bytes())?;
            } else {
                writeln!(out, "source:     {}", w.source)?;
                writeln!(out, "left:       {}", w.left_result)?;
                writeln!(out, "right:      {}", w.right_result)?;
                writeln!(out, "join:       {}", w.join_term)?;
                writeln!(out, "from left:  [{}]", w.step_from_left)?;
                writeln!(out, "from right: [{}]", w.step_from_right)?;
            }
            Ok(EXIT_OK)
        }
        Command::Confluence {
            file,
            term,
            depth,
            json,
        } => {
            let loaded = load(file)?;
            let s = read_term(term, &loaded)?;
            let report = check_local_confluence_bounded(&loaded.trs, &s, *depth);
            if *json {
                let depth = depth.to_string();
                let r = JsonReport::new(
                    "confluence",
                    &[&loaded.text, term, &depth],
                    PropertyReportDto::from(&report),
                );
                out.write_all(emit_report(&r).as_bytes())?;
            } else {
                write_property(out, &report)?;
            }
            Ok(verdict_code(report.verdict()))
        }
        Command::Fuzz {
            seed,
            cases,
            terms,
            suite,
            json,
        } => {
            let params = GenParams::with_seed(*seed);
            let reports: Vec<PropertyReport> = suite
                .suites()
                .into_iter()
                .map(|s| run_suite(s, &params, *cases, *terms))
                .collect();
            if *json {
                let payload: Vec<PropertyReportDto> =
                    reports.iter().map(PropertyReportDto::from).collect();
                let suite = format!("{suite:?}").to_lowercase();
                let inputs = [
                    suite,
                    seed.to_string(),
                    cases.to_string(),
                    terms.to_string(),
                ];
                let inputs: Vec<&str> = inputs.iter().map(String::as_str).collect();
                out.write_all(emit_report(&JsonReport::new("fuzz", &inputs, payload)).as_bytes())?;
            } else {
                for r in &reports {
                    write_property(out, r)?;
                }
            }
            let verdicts: Vec<Verdict> = reports.iter().map(PropertyReport::verdict).collect();
            Ok(if verdicts.contains(&Verdict::Fail) {
                EXIT_FAIL
            } else if verdicts.iter().all(|v| *v == Verdict::Inconclusive) {
                EXIT_INCONCLUSIVE
            } else {
                EXIT_OK
            })
        }
    }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn write_ortho(out: &mut dyn Write, r: &OrthoReport) -> io::Result<()> {
    writeln!(out, "left-linear:       {}", r.left_linear)?;
    writeln!(out, "right-linear:      {}", r.right_linear)?;
    writeln!(out, "linear:            {}", r.linear)?;
    writeln!(out, "ambiguous:         {}", r.ambiguous)?;
    writeln!(out, "orthogonal:        {}", r.orthogonal)?;
    writeln!(out, "weakly orthogonal: {}", r.weakly_orthogonal)?;
    writeln!(out, "critical pairs:    {}", r.critical_pair_count)?;
    for n in &r.offending_rules {
        writeln!(
            out,
            "  rule {}: variable {} occurs {} times in the left-hand side",
            n.rule, n.var, n.occurrences
        )?;
    }
    for cp in &r.sample_cps {
        writeln!(out, "  {cp}")?;
    }
    Ok(())
}

fn write_property(out: &mut dyn Write, r: &PropertyReport) -> io::Result<()> {
    writeln!(
        out,
        "{}: {} (seed {}, cases {}, inconclusive {}, failures {})",
        r.property_name,
        r.verdict(),
        r.seed,
        r.cases_run,
        r.inconclusive,
        r.failures.len()
    )?;
    for f in &r.failures {
        writeln!(out, "  [{}] case {}: {}", f.severity, f.case, f.context)?;
    }
    Ok(())
}
