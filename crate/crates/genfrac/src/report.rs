//! JSON and CSV forms of verification reports.

use std::io::Write;

use genfrac_core::identities::IdentityKind;
use genfrac_core::VerificationReport;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleJson {
    pub family: String,
    pub order: usize,
    pub panels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputsJson {
    pub f: String,
    pub g: String,
    pub eta: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub identity: String,
    pub lhs: f64,
    pub rhs_area: f64,
    pub rhs_boundary: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub alpha: f64,
    pub kernel: String,
    pub psets: Vec<String>,
    pub rule: RuleJson,
    pub inputs: InputsJson,
}

impl From<&VerificationReport> for ReportJson {
    fn from(r: &VerificationReport) -> Self {
        ReportJson {
            identity: r.identity.name().to_string(),
            lhs: r.lhs,
            rhs_area: r.rhs_area,
            rhs_boundary: r.rhs_boundary,
            abs_residual: r.abs_residual,
            rel_residual: r.rel_residual,
            alpha: r.alpha,
            kernel: r.kernel.clone(),
            psets: r.psets.clone(),
            rule: RuleJson { family: r.rule.family.name().to_string(), order: r.rule.order, panels: r.rule.panels },
            inputs: InputsJson { f: r.inputs.f.clone(), g: r.inputs.g.clone(), eta: r.inputs.eta.clone() },
        }
    }
}

/// Tolerance a corpus report is held to when none is given.
pub fn default_tolerance(kind: IdentityKind) -> f64 {
    match kind {
        IdentityKind::Ibp1d => 1e-8,
        IdentityKind::Ibp2d => 1e-5,
        IdentityKind::Green | IdentityKind::GreenRlCorollary => 1e-4,
    }
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut out: W, value: &T) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")
}

#[derive(Debug, Serialize)]
struct ConvergenceRow {
    nodes: usize,
    rel_residual: f64,
    lhs: f64,
    rhs_area: f64,
    rhs_boundary: f64,
}

/// The convergence table: one row per report, nodes per axis first.
pub fn write_csv<W: Write>(out: W, reports: &[VerificationReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(ConvergenceRow {
            nodes: r.nodes,
            rel_residual: r.rel_residual,
            lhs: r.lhs,
            rhs_area: r.rhs_area,
            rhs_boundary: r.rhs_boundary,
        })?;
    }
    w.flush()?;
    Ok(())
}
