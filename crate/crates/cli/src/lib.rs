//! Job model and report generation behind the `sl2tree` binary.
//!
//! A [`JobRequest`] names one command and its operands; [`run`] turns it
//! into a JSON report. Reports are plain serde structs, so identical
//! requests serialize to identical bytes.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use sl2tree::amalgam::{decide_amalgam, AmalgamError, AmalgamSpec};
use sl2tree::bt_tree::{analyze_pair, secondary_overlap, AxesRelation, OverlapLength, TreeError};
use sl2tree::pingpong::{build_certificate, CertificateDocument, CertificateError, Rejection};
use sl2tree::reduction::{
    decide_sl2_with_options, decide_with_restarts, overlap_from_lengths, DecideOptions, DecisionError,
    IterationRecord, OverlapCase, Verdict, WitnessKind,
};
use sl2tree::sl2::{Mat2, MatrixError, TruncatedMat2};
use sl2tree::valued_field::{Field, FieldError, PrecisionLoss};
use sl2tree::word::{Word, WordParseError};

/// Largest input precision a truncated run may restart to.
pub const MAX_PRECISION: i64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Decide,
    Membership,
    Tl,
    Overlap,
    AmalgamDecide,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobRequest {
    pub command: Option<Command>,
    /// `qp:<p>` or `fqt:<p>`.
    #[serde(default)]
    pub field: Option<String>,
    /// Switches to the truncated backend, starting at this precision.
    #[serde(default)]
    pub precision: Option<i64>,
    #[serde(default)]
    pub a: Option<String>,
    #[serde(default)]
    pub b: Option<String>,
    #[serde(default)]
    pub c: Option<String>,
    /// Membership query as a word in `a`, `b` (instead of `c`).
    #[serde(default)]
    pub words: Option<String>,
    #[serde(default)]
    pub psl: bool,
    #[serde(default)]
    pub amalgam: Option<PathBuf>,
    #[serde(default)]
    pub iteration_cap: Option<u64>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    FieldMismatch(String),
    #[error("{0}")]
    Determinant(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 3,
            CliError::FieldMismatch(_) => 4,
            CliError::Determinant(_) => 5,
            CliError::Io { .. } => 6,
            CliError::Internal(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::FieldMismatch(_) => "field_mismatch",
            CliError::Determinant(_) => "determinant",
            CliError::Io { .. } => "io",
            CliError::Internal(_) => "internal",
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::FieldMismatch { .. } => CliError::FieldMismatch(e.to_string()),
            _ => CliError::Parse(e.to_string()),
        }
    }
}

impl From<MatrixError> for CliError {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::Determinant(_) => CliError::Determinant(e.to_string()),
            MatrixError::Syntax(_) => CliError::Parse(e.to_string()),
            MatrixError::Field(f) => f.into(),
        }
    }
}

impl From<WordParseError> for CliError {
    fn from(e: WordParseError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<AmalgamError> for CliError {
    fn from(e: AmalgamError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<DecisionError> for CliError {
    fn from(e: DecisionError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<TreeError> for CliError {
    fn from(e: TreeError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<CertificateError> for CliError {
    fn from(e: CertificateError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<PrecisionLoss> for CliError {
    fn from(e: PrecisionLoss) -> Self {
        CliError::Internal(e.to_string())
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Report {
    Decide(Box<DecideReport>),
    Membership(MembershipReport),
    Tl(TlReport),
    Overlap(OverlapReport),
    Amalgam(AmalgamReport),
}

#[derive(Clone, Debug, Serialize)]
pub struct PrecisionReport {
    pub initial: i64,
    /// Input precision of the run that completed.
    #[serde(rename = "final")]
    pub final_precision: i64,
    pub restarts: u32,
    /// Lowest trace precision in that run.
    pub min_trace_precision: Option<i64>,
    /// `final − min_trace_precision`.
    pub consumed: Option<i64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecideReport {
    pub command: &'static str,
    pub field: String,
    pub backend: &'static str,
    pub discrete_free: bool,
    pub iterations: u64,
    pub word_x: Option<Word>,
    pub word_y: Option<Word>,
    pub x: Option<String>,
    pub y: Option<String>,
    pub witness: Option<Word>,
    pub witness_kind: Option<WitnessKind>,
    pub trace: Vec<IterationRecord>,
    pub certificate: Option<CertificateDocument>,
    pub precision: Option<PrecisionReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    pub command: &'static str,
    pub field: String,
    pub psl: bool,
    /// False when `⟨A, B⟩` itself is not discrete and free.
    pub certified: bool,
    pub member: Option<bool>,
    pub word: Option<Word>,
    pub certified_word: Option<Word>,
    pub steps: Option<usize>,
    pub rejection: Option<Rejection>,
    pub query: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TlReport {
    pub command: &'static str,
    pub field: String,
    pub backend: &'static str,
    pub matrix: String,
    pub translation_length: i64,
    pub hyperbolic: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Lengths {
    pub a: i64,
    pub b: i64,
    pub ab: i64,
    pub ainv_b: i64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "relation", rename_all = "snake_case")]
pub enum Geometry {
    Disjoint {
        distance: i64,
    },
    Overlap {
        /// `None` when the overlap reached the search window.
        length: Option<i64>,
        at_least: Option<i64>,
        same_direction: bool,
        secondary_overlap: Option<i64>,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct OverlapReport {
    pub command: &'static str,
    pub field: String,
    pub lengths: Lengths,
    pub min_product_length: i64,
    /// Configuration read off the four lengths, when they are consistent.
    pub from_lengths: Option<OverlapCase>,
    /// `None` when either element is elliptic.
    pub geometry: Option<Geometry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AmalgamReport {
    pub command: &'static str,
    pub discrete_free: bool,
    pub iterations: u64,
    pub word_x: Option<Word>,
    pub word_y: Option<Word>,
    pub x: Option<String>,
    pub y: Option<String>,
    pub witness: Option<Word>,
    pub witness_kind: Option<WitnessKind>,
    pub trace: Vec<IterationRecord>,
}

fn require<'a>(value: &'a Option<String>, flag: &str) -> Result<&'a str, CliError> {
    value
        .as_deref()
        .ok_or_else(|| CliError::Parse(format!("missing --{flag}")))
}

fn field_of(job: &JobRequest) -> Result<Field, CliError> {
    Ok(job.field.as_deref().unwrap_or("qp:7").parse::<Field>()?)
}

fn matrix(field: Field, value: &Option<String>, flag: &str) -> Result<Mat2, CliError> {
    Ok(Mat2::parse(field, require(value, flag)?)?)
}

fn options(job: &JobRequest) -> DecideOptions {
    let mut o = DecideOptions::default();
    if let Some(cap) = job.iteration_cap {
        o.iteration_cap = cap;
    }
    o
}

pub fn run(job: &JobRequest) -> Result<Report, CliError> {
    let command = job
        .command
        .ok_or_else(|| CliError::Parse("missing command".into()))?;
    match command {
        Command::Decide => decide(job).map(|r| Report::Decide(Box::new(r))),
        Command::Membership => membership(job).map(Report::Membership),
        Command::Tl => tl(job).map(Report::Tl),
        Command::Overlap => overlap(job).map(Report::Overlap),
        Command::AmalgamDecide => amalgam(job).map(Report::Amalgam),
    }
}

fn decide(job: &JobRequest) -> Result<DecideReport, CliError> {
    let field = field_of(job)?;
    let (a, b) = (matrix(field, &job.a, "A")?, matrix(field, &job.b, "B")?);
    let (verdict, trace, precision, backend) = match job.precision {
        None => {
            let d = decide_sl2_with_options(&a, &b, options(job))?;
            let v = d.verdict.map_elements(|_| ());
            (v, d.trace, None, "exact")
        }
        Some(m0) => {
            let run = decide_with_restarts(&a, &b, m0, MAX_PRECISION, options(job))?;
            let report = PrecisionReport {
                initial: m0,
                final_precision: run.precision,
                restarts: run.restarts,
                min_trace_precision: run.min_trace_precision,
                consumed: run.min_trace_precision.map(|t| run.precision - t),
            };
            let v = run.decision.verdict.map_elements(|_| ());
            (v, run.decision.trace, Some(report), "truncated")
        }
    };
    let mut report = DecideReport {
        command: "decide",
        field: field.to_string(),
        backend,
        discrete_free: verdict.is_discrete_free(),
        iterations: verdict.iterations(),
        word_x: None,
        word_y: None,
        x: None,
        y: None,
        witness: None,
        witness_kind: None,
        trace,
        certificate: None,
        precision,
    };
    match verdict {
        Verdict::DiscreteFree { word_x, word_y, .. } => {
            // the words evaluate exactly even when the run was truncated
            let (x, y) = (word_x.evaluate_mat(&a, &b), word_y.evaluate_mat(&a, &b));
            let cert = build_certificate(&x, &y, &word_x, &word_y)?;
            report.certificate = Some(cert.to_document());
            report.x = Some(x.to_string());
            report.y = Some(y.to_string());
            report.word_x = Some(word_x);
            report.word_y = Some(word_y);
        }
        Verdict::NotDiscreteFree { witness, kind, .. } => {
            report.witness = Some(witness);
            report.witness_kind = Some(kind);
        }
    }
    Ok(report)
}

fn membership(job: &JobRequest) -> Result<MembershipReport, CliError> {
    let field = field_of(job)?;
    let (a, b) = (matrix(field, &job.a, "A")?, matrix(field, &job.b, "B")?);
    let c = match (&job.c, &job.words) {
        (Some(_), _) => matrix(field, &job.c, "C")?,
        (None, Some(w)) => w.parse::<Word>()?.evaluate_mat(&a, &b),
        (None, None) => return Err(CliError::Parse("missing --C or --words".into())),
    };
    let mut report = MembershipReport {
        command: "membership",
        field: field.to_string(),
        psl: job.psl,
        certified: false,
        member: None,
        word: None,
        certified_word: None,
        steps: None,
        rejection: None,
        query: c.to_string(),
    };
    let d = decide_sl2_with_options(&a, &b, options(job))?;
    if let Verdict::DiscreteFree { x, y, word_x, word_y, .. } = d.verdict {
        let cert = build_certificate(&x, &y, &word_x, &word_y)?;
        let answer = cert
            .membership_with_mode(&c, job.psl)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        report.certified = true;
        report.member = Some(answer.member);
        report.word = answer.word;
        report.certified_word = Some(answer.certified_word);
        report.steps = Some(answer.steps);
        report.rejection = answer.rejection;
    }
    Ok(report)
}

fn tl(job: &JobRequest) -> Result<TlReport, CliError> {
    let field = field_of(job)?;
    let a = matrix(field, &job.a, "A")?;
    let (length, backend) = match job.precision {
        None => (a.translation_length(), "exact"),
        Some(m) => (TruncatedMat2::truncate(&a, m).translation_length()?, "truncated"),
    };
    Ok(TlReport {
        command: "tl",
        field: field.to_string(),
        backend,
        matrix: a.to_string(),
        translation_length: length,
        hyperbolic: length > 0,
    })
}

fn overlap(job: &JobRequest) -> Result<OverlapReport, CliError> {
    let field = field_of(job)?;
    let (a, b) = (matrix(field, &job.a, "A")?, matrix(field, &job.b, "B")?);
    let lengths = Lengths {
        a: a.translation_length(),
        b: b.translation_length(),
        ab: a.mul(&b).translation_length(),
        ainv_b: a.inverse().mul(&b).translation_length(),
    };
    let from_lengths = overlap_from_lengths(lengths.a, lengths.b, lengths.ab, lengths.ainv_b).ok();
    let geometry = if lengths.a > 0 && lengths.b > 0 {
        Some(match analyze_pair(&a, &b)?.relation() {
            AxesRelation::Disjoint { distance } => Geometry::Disjoint { distance },
            AxesRelation::Overlap {
                length,
                same_direction,
            } => {
                let secondary = if length.finite() == Some(lengths.a.min(lengths.b)) {
                    secondary_overlap(&a, &b)?.finite()
                } else {
                    None
                };
                Geometry::Overlap {
                    length: length.finite(),
                    at_least: match length {
                        OverlapLength::AtLeast(w) => Some(w),
                        OverlapLength::Finite(_) => None,
                    },
                    same_direction,
                    secondary_overlap: secondary,
                }
            }
        })
    } else {
        None
    };
    Ok(OverlapReport {
        command: "overlap",
        field: field.to_string(),
        min_product_length: lengths.ab.min(lengths.ainv_b),
        lengths,
        from_lengths,
        geometry,
    })
}

fn amalgam(job: &JobRequest) -> Result<AmalgamReport, CliError> {
    let path = job
        .amalgam
        .as_ref()
        .ok_or_else(|| CliError::Parse("missing --amalgam".into()))?;
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let spec = AmalgamSpec::from_json(&text)?;
    let a = spec.parse_word(require(&job.a, "A")?)?;
    let b = spec.parse_word(require(&job.b, "B")?)?;
    let d = decide_amalgam(&spec, &a, &b)?;
    let mut report = AmalgamReport {
        command: "amalgam-decide",
        discrete_free: d.verdict.is_discrete_free(),
        iterations: d.verdict.iterations(),
        word_x: None,
        word_y: None,
        x: None,
        y: None,
        witness: None,
        witness_kind: None,
        trace: d.trace,
    };
    match d.verdict {
        Verdict::DiscreteFree {
            x, y, word_x, word_y, ..
        } => {
            report.x = Some(spec.display(&x));
            report.y = Some(spec.display(&y));
            report.word_x = Some(word_x);
            report.word_y = Some(word_y);
        }
        Verdict::NotDiscreteFree { witness, kind, .. } => {
            report.witness = Some(witness);
            report.witness_kind = Some(kind);
        }
    }
    Ok(report)
}

/// One entry of a batch result, in input order.
#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum BatchEntry {
    Ok(Report),
    Err { error: String, kind: &'static str, exit_code: i32 },
}

/// Runs independent jobs in parallel; output order follows input order.
pub fn run_batch(jobs: &[JobRequest]) -> Vec<BatchEntry> {
    use rayon::prelude::*;
    jobs.par_iter()
        .map(|job| match run(job) {
            Ok(r) => BatchEntry::Ok(r),
            Err(e) => BatchEntry::Err {
                error: e.to_string(),
                kind: e.kind(),
                exit_code: e.exit_code(),
            },
        })
        .collect()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job(command: Command, a: &str, b: &str) -> JobRequest {
        JobRequest {
            command: Some(command),
            field: Some("qp:7".into()),
            a: Some(a.into()),
            b: Some(b.into()),
            ..Default::default()
        }
    }

    #[test]
    fn decide_one_iteration_pair() {
        let j = job(Command::Decide, "[[7,6],[-1/7,1/49]]", "[[2/7^4,7^3],[1/7^3,7^4]]");
        let Report::Decide(r) = run(&j).unwrap() else { panic!() };
        assert!(r.discrete_free);
        assert_eq!(r.iterations, 1);
        assert!(r.certificate.is_some());
    }

    #[test]
    fn error_codes() {
        let mut j = job(Command::Decide, "[[7,1],[0,1]]", "[[1,0],[0,1]]");
        assert_eq!(run(&j).unwrap_err().exit_code(), 5);
        j.a = Some("[[t,0],[0,1/t]]".into());
        assert_eq!(run(&j).unwrap_err().exit_code(), 4);
        j.a = Some("[[1,0]]".into());
        assert_eq!(run(&j).unwrap_err().exit_code(), 3);
        j.field = Some("qp:8".into());
        assert_eq!(run(&j).unwrap_err().exit_code(), 3);
    }
}
