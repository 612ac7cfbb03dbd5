//! Command-line front end for `genfrac-core`.
//!
//! [`run`] parses an argument vector and returns the process exit code.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | usage or domain error |
//! | 2 | a computation hit a non-finite value |
//! | 3 | a checked identity's relative residual exceeds its tolerance |

pub mod cli;
pub mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use clap::Parser;
use genfrac_core::identities::{self, CorpusEntry, IdentityCase, IdentityKind};
use genfrac_core::pset::PsetShape;
use genfrac_core::{
    aop, bop, kop, partial_aop, partial_bop, partial_kop, Axis, FuncSpec, KernelSpec, OperatorKind, OperatorRequest,
    PartialRequest, QuadratureRule, VerificationReport,
};

use crate::cli::{Cli, Command, ConvergeIdentity, EvalArgs, IdentityArgs, Op, RuleArgs, VerifyIdentity};
use crate::report::{default_tolerance, write_csv, write_json, ReportJson};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_RESIDUAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] genfrac_core::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot write table: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        }
    }
}

type Outcome = Result<bool, CliError>;

/// Run one invocation. Reports go to `out` (or the named file), diagnostics
/// and warnings to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_RESIDUAL,
        Err(e) => {
            let _ = writeln!(err, "genfrac: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match command {
        Command::Eval(args) => {
            let v = eval(&args)?;
            writeln!(out, "{v:.10}")?;
            Ok(true)
        }
        Command::Verify { identity, args, json } => verify(identity, &args, json.as_deref(), out, err),
        Command::Converge { identity, args, panel_seq, csv } => {
            converge(identity, &args, &panel_seq, csv.as_deref(), out, err)
        }
        Command::Corpus { json, tol, panels } => corpus(tol, panels, json.as_deref(), out, err),
    }
}

fn rule(args: &RuleArgs) -> Result<QuadratureRule, CliError> {
    let d = QuadratureRule::default();
    let r = QuadratureRule { order: args.order.unwrap_or(d.order), panels: args.panels.unwrap_or(d.panels), ..d };
    Ok(r.validated()?)
}

fn kind_of(op: Op) -> OperatorKind {
    match op {
        Op::K => OperatorKind::K,
        Op::A => OperatorKind::A,
        Op::B => OperatorKind::B,
    }
}

pub fn eval(args: &EvalArgs) -> Result<f64, CliError> {
    let kind = kind_of(args.op);
    let req = OperatorRequest::new(kind, args.alpha, args.pset, args.kernel, rule(&args.rule)?)?;
    let Some(axis) = args.axis else {
        if args.rect.is_some() || args.t2.is_some() {
            return Err(CliError::Usage("--rect and --t2 describe a partial operator and need --axis".into()));
        }
        let f = FuncSpec::parse(&args.f, 1)?;
        return Ok(match kind {
            OperatorKind::K => kop(&req, &f, args.t)?,
            OperatorKind::A => aop(&req, &f, args.t)?,
            OperatorKind::B => bop(&req, &f, args.t)?,
        });
    };
    let (Some(rect), Some(t2)) = (args.rect, args.t2) else {
        return Err(CliError::Usage("--axis needs --rect and --t2".into()));
    };
    let preq = PartialRequest::new(Axis::from_number(axis)?, req, rect)?;
    let f = FuncSpec::parse(&args.f, 2)?;
    Ok(match kind {
        OperatorKind::K => partial_kop(&preq, &f, args.t, t2)?,
        OperatorKind::A => partial_aop(&preq, &f, args.t, t2)?,
        OperatorKind::B => partial_bop(&preq, &f, args.t, t2)?,
    })
}

/// Build the identity case named by `kind` from the shared flags.
pub fn case(kind: IdentityKind, args: &IdentityArgs) -> Result<IdentityCase, CliError> {
    let r = args.rect;
    let shapes = match (&args.psets, kind) {
        (Some(s), _) => PsetShape::parse_list(s)?,
        (None, IdentityKind::GreenRlCorollary) => vec![PsetShape::Left, PsetShape::Left],
        (None, _) => return Err(CliError::Usage("missing --psets SPEC,SPEC".into())),
    };
    let [s1, s2] = shapes[..] else {
        return Err(CliError::Usage(format!("--psets needs exactly two shapes, got {}", shapes.len())));
    };
    if kind == IdentityKind::GreenRlCorollary {
        if s1 != PsetShape::Left || s2 != PsetShape::Left {
            return Err(CliError::Usage("green-rl is stated for left p-sets only".into()));
        }
        if args.kernel != KernelSpec::RiemannLiouville {
            return Err(CliError::Usage("green-rl is stated for the rl kernel only".into()));
        }
    }
    let parse = |s: &str| FuncSpec::parse(s, 2);
    let (eta1, eta2) = match (&args.eta, &args.eta1, &args.eta2, kind) {
        (Some(e), _, _, _) => (parse(e)?, parse(e)?),
        (None, Some(e1), Some(e2), IdentityKind::Ibp2d) => (parse(e1)?, parse(e2)?),
        (None, Some(_), Some(_), _) => return Err(CliError::Usage("the Green identities take a single --eta".into())),
        _ => return Err(CliError::Usage("missing --eta (or --eta1 and --eta2)".into())),
    };
    Ok(IdentityCase {
        kind,
        f: parse(&args.f)?,
        g: parse(&args.g)?,
        eta1,
        eta2,
        alpha: args.alpha,
        p1: s1.on(r.a1, r.b1)?,
        p2: s2.on(r.a2, r.b2)?,
        kernel: args.kernel,
        rect: r,
    })
}

fn warn_vacuous(err: &mut dyn Write, r: &VerificationReport, at: &str) -> std::io::Result<()> {
    if r.vacuous {
        writeln!(err, "warning: {at}every term of the {} check is below 1e-12; the agreement is vacuous", r.identity)?;
    }
    Ok(())
}

/// Write to `path` when given, else to `out`.
fn emit(
    path: Option<&Path>,
    out: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => body(out),
    }
}

fn verify(
    identity: VerifyIdentity,
    args: &IdentityArgs,
    json: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let kind = match identity {
        VerifyIdentity::Ibp => IdentityKind::Ibp2d,
        VerifyIdentity::Green => IdentityKind::Green,
        VerifyIdentity::GreenRl => IdentityKind::GreenRlCorollary,
    };
    let case = case(kind, args)?;
    let report = case.verify(&rule(&args.rule)?)?;
    warn_vacuous(err, &report, "")?;
    emit(json, out, |w| Ok(write_json(w, &ReportJson::from(&report))?))?;
    Ok(report.passes(args.tol.unwrap_or(default_tolerance(kind))))
}

fn converge(
    identity: ConvergeIdentity,
    args: &IdentityArgs,
    panel_seq: &[usize],
    csv: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let kind = match identity {
        ConvergeIdentity::Ibp => IdentityKind::Ibp2d,
        ConvergeIdentity::Green => IdentityKind::Green,
    };
    let case = case(kind, args)?;
    let base = rule(&args.rule)?;
    let rules = panel_seq.iter().map(|&p| base.with_panels(p)).collect::<Result<Vec<_>, _>>()?;
    let reports = identities::convergence_study(&case, &rules)?;
    for r in &reports {
        warn_vacuous(err, r, &format!("at {} nodes, ", r.nodes))?;
    }
    emit(csv, out, |w| Ok(write_csv(w, &reports)?))?;
    Ok(match (args.tol, reports.last()) {
        (Some(tol), Some(last)) => last.passes(tol),
        _ => true,
    })
}

/// Entries the corollary applies to: rl kernel, left p-sets.
pub fn corollary_entries(entries: &[CorpusEntry]) -> Vec<CorpusEntry> {
    entries.iter().filter(|e| e.kernel == KernelSpec::RiemannLiouville && e.shape == PsetShape::Left).copied().collect()
}

/// The integration-by-parts, Green and corollary reports over the corpus, in
/// that order.
pub fn corpus_reports(rule: &QuadratureRule) -> Result<Vec<VerificationReport>, genfrac_core::Error> {
    let entries = identities::corpus();
    let mut all = identities::run_corpus(&entries, IdentityKind::Ibp2d, rule)?;
    all.extend(identities::run_corpus(&entries, IdentityKind::Green, rule)?);
    all.extend(identities::run_corpus(&corollary_entries(&entries), IdentityKind::GreenRlCorollary, rule)?);
    Ok(all)
}

fn corpus(tol: Option<f64>, panels: usize, json: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let rule = QuadratureRule::default().with_panels(panels)?;
    let reports = corpus_reports(&rule)?;
    let mut ok = true;
    for (i, r) in reports.iter().enumerate() {
        warn_vacuous(err, r, &format!("report {i}: "))?;
        let t = tol.unwrap_or(default_tolerance(r.identity));
        if !r.passes(t) {
            writeln!(err, "report {i} ({}): rel_residual {:e} exceeds {t:e}", r.identity, r.rel_residual)?;
            ok = false;
        }
    }
    let body: Vec<ReportJson> = reports.iter().map(ReportJson::from).collect();
    emit(json, out, |w| Ok(write_json(w, &body)?))?;
    Ok(ok)
}
