//! Scenario-driven front end for the verification library.
//!
//! A scenario names an ambient chart, an immersion into it, a set of domain
//! points and the suites to evaluate there. [`run`] builds everything, fans
//! the suites out over the points and assembles a [`report::Report`].

pub mod report;
pub mod scenario;
pub mod suites;

use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use thiserror::Error;

use pqk_core::chart::MetricField;
use pqk_core::submanifold::{summarize, ClassifyTolerances, PointClassification};
use pqk_core::Error as CoreError;

use report::{AmbientReport, ClassificationReport, ImmersionReport, PlacementTrial, PointNote, Report, SuiteReport, ToolInfo};
use scenario::Scenario;
use suites::PointCtx;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_RESIDUAL: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_GATE: u8 = 3;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{0}")]
    Input(String),
    #[error("chart validation failed: {0}")]
    Gate(String),
    #[error("no valid sample points: {0}")]
    NoValidPoints(String),
}

impl RunError {
    pub fn from_core(e: CoreError) -> Self {
        match e {
            CoreError::GateFailure(m) => RunError::Gate(m),
            e @ CoreError::NotParallel { .. } => RunError::Gate(e.to_string()),
            CoreError::NoValidPoints => RunError::NoValidPoints("every point was rejected".into()),
            e => RunError::Input(e.to_string()),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Parse { .. } | RunError::Input(_) => EXIT_INPUT,
            RunError::Gate(_) => EXIT_GATE,
            RunError::NoValidPoints(_) => EXIT_RESIDUAL,
        }
    }
}

/// Evaluate a validated scenario.
pub fn run(scenario: &Scenario) -> Result<Report, RunError> {
    scenario.validate()?;
    let chart = Arc::new(scenario.chart()?);
    let points = scenario.domain_points(scenario.domain_dim())?;
    let built = scenario.immersion(chart.clone(), &points)?;
    let imm = &built.immersion;

    let suites: Vec<_> = scenario.suites.iter().map(|s| suites::find(s).expect("validated")).collect();
    let per_point: Vec<_> = points
        .par_iter()
        .map(|u| {
            let ctx = PointCtx::new(imm, u);
            let outcomes: Vec<_> = suites.iter().map(|s| (s.eval)(&ctx)).collect();
            let class = ctx.classes().and_then(|r| Ok((r, ctx.degenerate_stratum()?)));
            (outcomes, class)
        })
        .collect();

    let mut classified = Vec::new();
    let mut skipped = Vec::new();
    for (i, (_, class)) in per_point.iter().enumerate() {
        match class {
            Ok((residuals, degenerate)) => classified.push(PointClassification {
                u: points[i].clone(),
                residuals: *residuals,
                degenerate_stratum: *degenerate,
            }),
            Err(reason) => skipped.push(PointNote { point: i, reason: reason.clone() }),
        }
    }
    if classified.is_empty() {
        let first = skipped.first().map_or(String::new(), |n| n.reason.clone());
        return Err(RunError::NoValidPoints(first));
    }
    let classification = summarize(classified, Vec::new(), chart.nu(), &ClassifyTolerances::default());
    let mut class_report = ClassificationReport::from(&classification);
    class_report.skipped = skipped;

    let mut columns: Vec<Vec<_>> = vec![Vec::with_capacity(points.len()); suites.len()];
    for (outcomes, _) in per_point {
        for (k, o) in outcomes.into_iter().enumerate() {
            columns[k].push(o);
        }
    }
    let suite_reports: Vec<_> = suites
        .iter()
        .zip(columns)
        .map(|(s, col)| SuiteReport::build(s.name, scenario.tolerance(s.name), col))
        .collect();
    let passed = suite_reports.iter().all(|s| s.passed) && !class_report.exclusivity_violation;

    let placement = built
        .trials
        .iter()
        .find(|(p, _)| matches!(imm.kind, pqk_core::models::ImmersionKind::Graph(ref g) if g.placement == *p))
        .map(|(p, _)| p.label());
    Ok(Report {
        tool: ToolInfo::default(),
        generated_at: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        scenario: scenario.clone(),
        points: points.iter().map(|p| p.iter().copied().collect()).collect(),
        ambient: AmbientReport { dim: chart.dim(), nu: chart.nu(), gate: chart.gate().map(Into::into) },
        immersion: ImmersionReport {
            domain_dim: imm.domain_dim,
            placement,
            placement_trials: built
                .trials
                .iter()
                .map(|(p, r)| PlacementTrial { placement: p.label(), residual: *r })
                .collect(),
        },
        classification: class_report,
        suites: suite_reports,
        passed,
    })
}

/// Exit status for a finished report.
pub fn exit_code(report: &Report) -> u8 {
    if report.passed {
        EXIT_PASS
    } else {
        EXIT_RESIDUAL
    }
}

/// Pretty-printed report with a trailing newline.
pub fn render(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}
