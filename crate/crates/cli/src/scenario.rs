//! Scenario files: what to build and which suites to run on it.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use pqk_core::models::{self, Chart, Immersion, Placement, PotentialTerm};
use pqk_core::sampling::{DEFAULT_RADIUS, DEFAULT_SEED};
use pqk_core::tolerances::DEFAULT_FD_STEP;
use pqk_core::{Eps, Vector};

use crate::suites;
use crate::RunError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub ambient: AmbientSpec,
    pub immersion: ImmersionSpec,
    pub points: PointsSpec,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    /// Per-suite thresholds; suites not listed use their registry default.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub suites: Vec<String>,
}

fn default_fd_step() -> f64 {
    DEFAULT_FD_STEP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AmbientSpec {
    Flat {
        n: usize,
        epsilon: i64,
        /// Constant-angle twist of the adapted basis; `0` is the standard one.
        #[serde(default)]
        twist: f64,
    },
    Projective {
        n: usize,
        epsilon: i64,
        scale: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ImmersionSpec {
    Slice { k: usize },
    PqSlice { k: usize },
    Graph { terms: Vec<TermSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    /// `(re, im)` of the coefficient.
    pub coeff: [f64; 2],
    pub powers: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointsSpec {
    Sampled(SampledPoints),
    Explicit(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledPoints {
    pub count: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_radius() -> f64 {
    DEFAULT_RADIUS
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub fd_step: Option<f64>,
    pub tol_scale: Option<f64>,
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        serde_json::from_str(text).map_err(|e| {
            let (line, column) = (e.line(), e.column());
            let full = e.to_string();
            let suffix = format!(" at line {line} column {column}");
            let message = full.strip_suffix(&suffix).unwrap_or(&full).to_string();
            RunError::Parse { line, column, message }
        })
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(h) = o.fd_step {
            self.fd_step = h;
        }
        if let Some(k) = o.tol_scale {
            for t in self.tolerances.values_mut() {
                *t *= k;
            }
            // Defaults are scaled too, so pin them into the map.
            for name in &self.suites {
                if let Some(s) = suites::find(name) {
                    self.tolerances.entry(name.clone()).or_insert(s.default_tolerance * k);
                }
            }
        }
        if let (Some(seed), PointsSpec::Sampled(p)) = (o.seed, &mut self.points) {
            p.seed = seed;
        }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let (n, e) = match self.ambient {
            AmbientSpec::Flat { n, epsilon, twist } => {
                finite("ambient.twist", twist)?;
                (n, epsilon)
            }
            AmbientSpec::Projective { n, epsilon, scale } => {
                if !scale.is_finite() || scale == 0.0 {
                    return Err(RunError::Input(format!("ambient.scale must be finite and nonzero, got {scale}")));
                }
                (n, epsilon)
            }
        };
        if n == 0 {
            return Err(RunError::Input("ambient.n must be at least 1".into()));
        }
        epsilon_of(e)?;
        if !(self.fd_step.is_finite() && self.fd_step > 0.0) {
            return Err(RunError::Input(format!("fd_step must be positive, got {}", self.fd_step)));
        }
        if let PointsSpec::Sampled(p) = &self.points {
            if p.count == 0 {
                return Err(RunError::Input("points.count must be at least 1".into()));
            }
            if !(p.radius.is_finite() && p.radius > 0.0) {
                return Err(RunError::Input(format!("points.radius must be positive, got {}", p.radius)));
            }
        }
        if self.suites.is_empty() {
            return Err(RunError::Input("no suites requested".into()));
        }
        for name in &self.suites {
            if suites::find(name).is_none() {
                return Err(unknown_suite(name));
            }
        }
        for (name, t) in &self.tolerances {
            if suites::find(name).is_none() {
                return Err(unknown_suite(name));
            }
            if !(t.is_finite() && *t > 0.0) {
                return Err(RunError::Input(format!("tolerance for {name} must be positive, got {t}")));
            }
        }
        Ok(())
    }

    pub fn tolerance(&self, suite: &str) -> f64 {
        self.tolerances
            .get(suite)
            .copied()
            .unwrap_or_else(|| suites::find(suite).map_or(0.0, |s| s.default_tolerance))
    }

    pub fn epsilon(&self) -> Eps {
        let e = match self.ambient {
            AmbientSpec::Flat { epsilon, .. } | AmbientSpec::Projective { epsilon, .. } => epsilon,
        };
        epsilon_of(e).expect("validated")
    }

    /// Build the ambient chart. Projective charts run their validation gate
    /// here.
    pub fn chart(&self) -> Result<Chart, RunError> {
        let eps = self.epsilon();
        let built = match self.ambient {
            AmbientSpec::Flat { n, twist, .. } if twist == 0.0 => models::flat_space(n, eps),
            AmbientSpec::Flat { n, twist, .. } => models::twisted_flat_space(n, eps, twist),
            AmbientSpec::Projective { n, scale, .. } => {
                models::projective_chart_with(n, eps, scale, self.fd_step, &models::default_gate_points(n))
            }
        };
        let chart = built.map_err(RunError::from_core)?;
        Ok(chart.with_step(self.fd_step))
    }

    /// Domain points for an immersion of the given dimension.
    pub fn domain_points(&self, dim: usize) -> Result<Vec<Vector>, RunError> {
        match &self.points {
            PointsSpec::Sampled(p) => Ok(pqk_core::sampling::ball_points(dim, p.count, p.radius, p.seed)
                .into_iter()
                .map(Vector::from_vec)
                .collect()),
            PointsSpec::Explicit(list) => {
                if list.is_empty() {
                    return Err(RunError::Input("explicit point list is empty".into()));
                }
                list.iter()
                    .enumerate()
                    .map(|(i, p)| {
                        if p.len() != dim {
                            return Err(RunError::Input(format!(
                                "point {i} has {} coordinates, the immersion domain has {dim}",
                                p.len()
                            )));
                        }
                        Ok(Vector::from_row_slice(p))
                    })
                    .collect()
            }
        }
    }

    /// Domain dimension implied by the immersion block.
    pub fn domain_dim(&self) -> usize {
        let n = match self.ambient {
            AmbientSpec::Flat { n, .. } | AmbientSpec::Projective { n, .. } => n,
        };
        match &self.immersion {
            ImmersionSpec::Slice { k } => 2 * k,
            ImmersionSpec::PqSlice { k } => 4 * k,
            ImmersionSpec::Graph { .. } => 2 * n,
        }
    }

    /// Build the immersion. For graphs the sample points double as the
    /// placement probe; the placement trials are returned alongside.
    pub fn immersion(&self, chart: Arc<Chart>, points: &[Vector]) -> Result<BuiltImmersion, RunError> {
        let built = match &self.immersion {
            ImmersionSpec::Slice { k } => BuiltImmersion {
                immersion: models::embed_epsilon_complex_slice(*k, chart).map_err(RunError::from_core)?,
                trials: Vec::new(),
            },
            ImmersionSpec::PqSlice { k } => BuiltImmersion {
                immersion: models::embed_pq_slice(*k, chart).map_err(RunError::from_core)?,
                trials: Vec::new(),
            },
            ImmersionSpec::Graph { terms } => {
                let terms = terms
                    .iter()
                    .map(|t| PotentialTerm { coeff: (t.coeff[0], t.coeff[1]), powers: t.powers.clone() })
                    .collect();
                let g = models::embed_graph(terms, chart, points).map_err(RunError::from_core)?;
                BuiltImmersion { immersion: g.immersion, trials: g.trials }
            }
        };
        Ok(built)
    }
}

pub struct BuiltImmersion {
    pub immersion: Immersion,
    pub trials: Vec<(Placement, f64)>,
}

fn epsilon_of(e: i64) -> Result<Eps, RunError> {
    match e {
        -1 | 1 => Ok(Eps::from_sign(e).expect("sign checked")),
        _ => Err(RunError::Input(format!("ambient.epsilon must be -1 or 1, got {e}"))),
    }
}

fn finite(field: &str, v: f64) -> Result<(), RunError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(RunError::Input(format!("{field} must be finite")))
    }
}

fn unknown_suite(name: &str) -> RunError {
    RunError::Input(format!("unknown suite '{name}' (known: {})", suites::names().join(", ")))
}
