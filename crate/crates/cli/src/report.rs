//! Report layout. Field order is fixed so that reports diff cleanly.

use std::collections::BTreeMap;

use serde::Serialize;

use pqk_core::models::GateReport;
use pqk_core::submanifold::{ClassResiduals, Classification, Verdict};

use crate::scenario::Scenario;

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: ToolInfo,
    /// Seconds since the Unix epoch. The only field that varies between runs.
    pub generated_at: u64,
    pub scenario: Scenario,
    pub points: Vec<Vec<f64>>,
    pub ambient: AmbientReport,
    pub immersion: ImmersionReport,
    pub classification: ClassificationReport,
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self { name: "verify", version: env!("CARGO_PKG_VERSION") }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AmbientReport {
    pub dim: usize,
    pub nu: f64,
    pub gate: Option<GateSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GateSummary {
    pub nu_hat: f64,
    pub nu_spread: f64,
    pub worst_model_residual: f64,
    pub worst_einstein_residual: f64,
    pub points: Vec<GatePointReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GatePointReport {
    pub x: Vec<f64>,
    pub nu_hat: f64,
    pub model_residual: f64,
    pub einstein_residual: f64,
}

impl From<&GateReport> for GateSummary {
    fn from(g: &GateReport) -> Self {
        Self {
            nu_hat: g.nu_hat,
            nu_spread: g.nu_spread,
            worst_model_residual: g.worst_model(),
            worst_einstein_residual: g.worst_einstein(),
            points: g
                .points
                .iter()
                .map(|p| GatePointReport {
                    x: p.x.clone(),
                    nu_hat: p.nu_hat,
                    model_residual: p.model_residual,
                    einstein_residual: p.einstein_residual,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ImmersionReport {
    pub domain_dim: usize,
    /// Graph placement chosen by the J1-invariance search.
    pub placement: Option<&'static str>,
    pub placement_trials: Vec<PlacementTrial>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlacementTrial {
    pub placement: &'static str,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub nu: f64,
    pub verdict: BTreeMap<&'static str, Option<bool>>,
    pub worst: BTreeMap<&'static str, f64>,
    pub degenerate_stratum: bool,
    pub exclusivity_violation: bool,
    pub skipped: Vec<PointNote>,
}

impl From<&Classification> for ClassificationReport {
    fn from(c: &Classification) -> Self {
        Self {
            nu: c.nu,
            verdict: verdict_map(&c.verdict),
            worst: worst_map(&c.worst),
            degenerate_stratum: c.degenerate_stratum,
            exclusivity_violation: c.exclusivity_violation,
            skipped: Vec::new(),
        }
    }
}

fn verdict_map(v: &Verdict) -> BTreeMap<&'static str, Option<bool>> {
    BTreeMap::from([
        ("almost_hermitian", v.almost_hermitian),
        ("kahler", v.kahler),
        ("omega_restricted", v.omega_restricted),
        ("totally_complex", v.totally_complex),
        ("para_quaternionic", v.para_quaternionic),
        ("totally_geodesic", v.totally_geodesic),
        ("almost_kahler", v.almost_kahler),
        ("integrable", v.integrable),
    ])
}

fn worst_map(w: &ClassResiduals) -> BTreeMap<&'static str, f64> {
    ClassResiduals::NAMES.iter().copied().zip(w.values()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PointNote {
    pub point: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub tolerance: f64,
    /// One entry per point; `null` where the suite does not apply or failed.
    pub residuals: Vec<Option<f64>>,
    pub evaluated: usize,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    pub errors: Vec<PointNote>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn build(name: &'static str, tolerance: f64, outcomes: Vec<Result<Option<f64>, String>>) -> Self {
        let mut residuals = Vec::with_capacity(outcomes.len());
        let mut errors = Vec::new();
        for (i, o) in outcomes.into_iter().enumerate() {
            match o {
                Ok(v) => residuals.push(v),
                Err(reason) => {
                    residuals.push(None);
                    errors.push(PointNote { point: i, reason });
                }
            }
        }
        let values: Vec<f64> = residuals.iter().flatten().copied().collect();
        let evaluated = values.len();
        let (max, mean) = if values.is_empty() {
            (None, None)
        } else {
            // NaN propagates so that it fails the comparison below.
            let max = values.iter().copied().fold(0.0_f64, |a, v| if v.is_nan() || a.is_nan() { f64::NAN } else { a.max(v) });
            (Some(max), Some(values.iter().sum::<f64>() / evaluated as f64))
        };
        let passed = matches!(max, Some(m) if m <= tolerance);
        Self { name, tolerance, residuals, evaluated, max, mean, errors, passed }
    }
}
