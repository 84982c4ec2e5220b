//! Run reports and their text rendering.
//!
//! The JSON form is deterministic for fixed inputs, seed and tolerances,
//! except for `timing_ms`.

use std::fmt::Write;

use ccfusion::theorems::{QDualEquivalence, TheoremId, TheoremReport};
use ccfusion::{BoundsReport, Classification, Field, Tolerances};
use serde::Serialize;

use crate::OutputFormat;

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub rng: &'static str,
    pub tolerances: Tolerances,
    pub inputs: Vec<InputEcho>,
    pub results: Vec<Body>,
    pub timing_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputEcho {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Body {
    Bounds(BoundsBody),
    Classify(ClassifyBody),
    Reconstruct(ReconstructBody),
    QDual(QDualBody),
    Theorems(TheoremsBody),
    Generated(GeneratedFile),
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsBody {
    pub instance: String,
    pub field: Field,
    pub dim: usize,
    pub subspaces: usize,
    pub report: BoundsReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct GateFailure {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyBody {
    pub instance: String,
    pub classification: Classification,
    pub form_is_real: bool,
    pub hermitian_residual: f64,
    /// `‖C − C′‖_F / max(1, ‖C‖_F)`.
    pub controls_residual: f64,
    pub sqrt_gate_passed: bool,
    pub sqrt_gate_failures: Vec<GateFailure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructBody {
    pub instance: String,
    pub source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub relative_error: f64,
    pub condition_number: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct QDualBody {
    pub instance: String,
    pub seed: u64,
    pub q_rows: usize,
    pub q_cols: usize,
    pub q_norm: f64,
    pub defect: f64,
    pub equivalence: QDualEquivalence,
    pub report: TheoremReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Checked,
    Skipped,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub theorem: TheoremId,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<TheoremReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip)]
    pub exit_code: u8,
}

impl Outcome {
    pub fn failed_containment(&self) -> bool {
        self.report.as_ref().is_some_and(|r| !r.passes())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremsBody {
    pub instance: String,
    pub seed: u64,
    pub samples: usize,
    pub outcomes: Vec<Outcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratedFile {
    pub path: String,
    pub sha256: String,
    pub seed: u64,
    pub field: Field,
    pub dim: usize,
}

impl RunReport {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            OutputFormat::Text => self.text(),
        }
    }

    /// One line per theorem that errored, for stderr.
    pub fn errors(&self) -> Vec<String> {
        let mut lines = Vec::new();
        for body in &self.results {
            if let Body::Theorems(t) = body {
                for o in t.outcomes.iter().filter(|o| o.status == Status::Error) {
                    lines.push(format!("{} {}: {}", t.instance, o.theorem, o.reason.as_deref().unwrap_or("")));
                }
            }
        }
        lines
    }

    fn text(&self) -> String {
        let mut out = String::new();
        for input in &self.inputs {
            let _ = writeln!(out, "input {} sha256 {}", input.path, input.sha256);
        }
        for body in &self.results {
            body.text(&mut out);
        }
        let _ = writeln!(out, "time {:.3} ms", self.timing_ms);
        out
    }
}

impl Body {
    fn text(&self, out: &mut String) {
        match self {
            Body::Bounds(b) => {
                let r = &b.report;
                let _ = writeln!(out, "{}: {} dim {}, {} subspaces", b.instance, b.field, b.dim, b.subspaces);
                let _ = writeln!(out, "  A = {}", r.bounds.lower);
                let _ = writeln!(out, "  B = {}", r.bounds.upper);
                let _ = writeln!(out, "  classification {}", r.classification);
                let _ = writeln!(out, "  hermitian residual {:e}", r.hermitian_residual);
            }
            Body::Classify(c) => {
                let _ = writeln!(out, "{}: {}", c.instance, c.classification);
                let _ = writeln!(out, "  form real {}, hermitian residual {:e}", c.form_is_real, c.hermitian_residual);
                let _ = writeln!(out, "  C - C' residual {:e}", c.controls_residual);
                let gate = if c.sqrt_gate_passed { "passed" } else { "failed" };
                let _ = writeln!(out, "  square-root gate {gate}");
                for f in &c.sqrt_gate_failures {
                    let _ = writeln!(out, "    index {}: {}", f.index, f.reason);
                }
            }
            Body::Reconstruct(r) => {
                let _ = write!(out, "{}: {} vector", r.instance, r.source);
                if let Some(seed) = r.seed {
                    let _ = write!(out, " (seed {seed})");
                }
                let _ = writeln!(out);
                let _ = writeln!(out, "  relative error {:e}", r.relative_error);
                let _ = writeln!(out, "  condition number {:e}", r.condition_number);
            }
            Body::QDual(q) => {
                let _ = writeln!(out, "{}: Q is {}x{}, seed {}", q.instance, q.q_rows, q.q_cols, q.seed);
                let _ = writeln!(out, "  |Q| = {}", q.q_norm);
                let _ = writeln!(out, "  defect {:e}", q.defect);
                let e = &q.equivalence;
                let _ = writeln!(
                    out,
                    "  conditions: adjoint {:e}, identity {:e}, inner product {:e} over {} pairs",
                    e.adjoint_identity, e.identity, e.inner_product, e.pairs
                );
                theorem_text(out, &q.report);
            }
            Body::Theorems(t) => {
                let _ = writeln!(out, "{}: seed {}, {} samples", t.instance, t.seed, t.samples);
                for o in &t.outcomes {
                    match (&o.report, &o.reason) {
                        (Some(r), _) => theorem_text(out, r),
                        (None, reason) => {
                            let status = if o.status == Status::Skipped { "skipped" } else { "error" };
                            let _ = writeln!(out, "  {}: {status}: {}", o.theorem, reason.as_deref().unwrap_or(""));
                        }
                    }
                }
            }
            Body::Generated(g) => {
                let _ = writeln!(out, "wrote {} ({} dim {}, seed {}) sha256 {}", g.path, g.field, g.dim, g.seed, g.sha256);
            }
        }
    }
}

fn number(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn theorem_text(out: &mut String, r: &TheoremReport) {
    let hyp = if r.hypothesis_satisfied { "hypothesis satisfied" } else { "hypothesis not satisfied" };
    let cont = if r.containment_ok { "containment ok" } else { "containment FAILED" };
    let _ = writeln!(out, "  {}: {hyp}, {cont}", r.theorem);
    let _ = writeln!(
        out,
        "    predicted [{}, {}], actual [{}, {}]",
        r.predicted_bounds.lower, r.predicted_bounds.upper, r.actual_bounds.lower, r.actual_bounds.upper
    );
    for (k, v) in &r.diagnostics {
        let _ = writeln!(out, "    {k} = {}", number(*v));
    }
    for note in &r.notes {
        let _ = writeln!(out, "    note: {note}");
    }
}
