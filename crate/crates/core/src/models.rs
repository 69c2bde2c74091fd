//! Concrete charts and immersions: flat `ℍ̃ⁿ`, the affine chart of the
//! para-quaternionic projective space, and standard submanifolds in them.

use std::sync::Arc;

use crate::chart::{self, MetricField, QuaternionicField};
use crate::curvature::r0_op;
use crate::error::{Error, Result};
use crate::linalg::{self, max_abs};
use crate::pq_linear::{self, AdaptedBasis};
use crate::sampling;
use crate::split_algebra::{Eps, EpsilonComplex, SplitQuaternion};
use crate::tolerances;
use crate::{Mat, Vector};

/// Smallest admissible `|λ(q)|` in the projective chart.
pub const LAMBDA_MIN: f64 = 1e-3;

/// Minimum number of gate points for the projective chart.
pub const GATE_POINTS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AmbientKind {
    Flat,
    /// `scale > 0` gives `ℍ̃Pⁿ`, `scale < 0` its dual.
    Projective { scale: f64 },
}

/// Validation data for one gate point.
#[derive(Clone, Debug, PartialEq)]
pub struct GatePoint {
    pub x: Vec<f64>,
    pub nu_hat: f64,
    /// `‖R_fd − ν̂R₀‖ / ‖R_fd‖`.
    pub model_residual: f64,
    /// `max|Ric − (scal/dim) g| / max|Ric|`.
    pub einstein_residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateReport {
    pub points: Vec<GatePoint>,
    pub nu_hat: f64,
    /// Largest relative deviation of the pointwise `ν̂` from their mean.
    pub nu_spread: f64,
}

impl GateReport {
    pub fn worst_model(&self) -> f64 {
        self.points.iter().map(|p| p.model_residual).fold(0.0, f64::max)
    }

    pub fn worst_einstein(&self) -> f64 {
        self.points.iter().map(|p| p.einstein_residual).fold(0.0, f64::max)
    }
}

/// A `4n`-dimensional coordinate patch with metric and adapted basis fields.
#[derive(Clone, Debug)]
pub struct Chart {
    pub n: usize,
    pub eps: Eps,
    pub kind: AmbientKind,
    /// Rate of the pointwise frame rotation `s(x) = twist·x₀` of the adapted
    /// basis; `0` keeps the constant basis.
    pub twist: f64,
    pub step: f64,
    basis: AdaptedBasis,
    flat: Mat,
    gate: Option<GateReport>,
}

impl Chart {
    fn build(n: usize, eps: Eps, kind: AmbientKind, twist: f64) -> Result<Self> {
        let (space, basis) = pq_linear::make_standard_basis(n, eps)?;
        Ok(Self {
            n,
            eps,
            kind,
            twist,
            step: tolerances::DEFAULT_FD_STEP,
            basis,
            flat: space.g,
            gate: None,
        })
    }

    pub fn gate(&self) -> Option<&GateReport> {
        self.gate.as_ref()
    }

    /// Declared reduced scalar curvature for flat charts; the gate estimate
    /// for projective ones.
    pub fn nu(&self) -> f64 {
        match (self.kind, &self.gate) {
            (AmbientKind::Flat, _) => 0.0,
            (_, Some(g)) => g.nu_hat,
            (_, None) => f64::NAN,
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    /// `λ(q) = 1 + Σ N(qᵢ)`.
    pub fn lambda(&self, x: &Vector) -> f64 {
        1.0 + (0..self.n).map(|i| quaternion_at(x, i).norm()).sum::<f64>()
    }

    pub fn check_domain(&self, x: &Vector) -> Result<()> {
        if x.len() != 4 * self.n {
            return Err(Error::InvalidArgument(format!(
                "point has dimension {}, chart has {}",
                x.len(),
                4 * self.n
            )));
        }
        if let AmbientKind::Projective { .. } = self.kind {
            let l = self.lambda(x);
            if l.abs() < LAMBDA_MIN {
                return Err(Error::OutsideDomain {
                    point: x.iter().copied().collect(),
                    reason: format!("λ = {l:e} is too close to the chart singularity"),
                });
            }
        }
        Ok(())
    }

    /// The constant adapted basis before any twist.
    pub fn standard_basis(&self) -> &AdaptedBasis {
        &self.basis
    }

    pub fn basis_at(&self, x: &Vector) -> Result<AdaptedBasis> {
        Ok(AdaptedBasis { j: self.j_fields(x)?, eps: self.basis.eps })
    }

    fn run_gate(&mut self, points: &[Vector]) -> Result<()> {
        if points.len() < GATE_POINTS {
            return Err(Error::GateFailure(format!(
                "{} gate points supplied, at least {GATE_POINTS} required",
                points.len()
            )));
        }
        let mut out = Vec::with_capacity(points.len());
        for x in points {
            self.check_domain(x)?;
            let r = chart::curvature_fd(self, x, self.step)?;
            let nu_hat = chart::nu_from_curvature(&r);
            let g = self.metric(x)?;
            let basis = self.basis_at(x)?;
            let d = 4 * self.n;
            let mut diff = 0.0;
            for i in 0..d {
                for j in 0..d {
                    let (ei, ej) = (unit(d, i), unit(d, j));
                    let model = r0_op(&basis, &g, &ei, &ej) * nu_hat;
                    diff += (r.form.basis(i, j) - model).norm_squared();
                }
            }
            let ric = r.ricci();
            let scal = r.scal()?;
            let einstein = max_abs(&(&ric - &g * (scal / d as f64))) / max_abs(&ric).max(f64::MIN_POSITIVE);
            out.push(GatePoint {
                x: x.iter().copied().collect(),
                nu_hat,
                model_residual: diff.sqrt() / r.frobenius().max(f64::MIN_POSITIVE),
                einstein_residual: einstein,
            });
        }
        let mean = out.iter().map(|p| p.nu_hat).sum::<f64>() / out.len() as f64;
        let spread = out
            .iter()
            .map(|p| ((p.nu_hat - mean) / mean).abs())
            .fold(0.0, f64::max);
        let report = GateReport { points: out, nu_hat: mean, nu_spread: spread };
        let (wm, we) = (report.worst_model(), report.worst_einstein());
        let limit = tolerances::CHART_GATE;
        if !(wm <= limit && we <= limit && spread <= limit) {
            return Err(Error::GateFailure(format!(
                "model residual {wm:e}, Einstein residual {we:e}, ν̂ spread {spread:e} (limit {limit:e})"
            )));
        }
        self.gate = Some(report);
        Ok(())
    }
}

fn unit(d: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(d);
    e[i] = 1.0;
    e
}

fn quaternion_at(x: &Vector, i: usize) -> SplitQuaternion {
    SplitQuaternion::new(x[4 * i], x[4 * i + 1], x[4 * i + 2], x[4 * i + 3])
}

impl MetricField for Chart {
    fn dim(&self) -> usize {
        4 * self.n
    }

    fn metric(&self, x: &Vector) -> Result<Mat> {
        match self.kind {
            AmbientKind::Flat => Ok(self.flat.clone()),
            AmbientKind::Projective { scale } => {
                self.check_domain(x)?;
                let lam = self.lambda(x);
                let d = 4 * self.n;
                // ⟨e_a, q⟩ = conj(e_a)·q_slot(a), and ⟨q, e_b⟩ its conjugate.
                let left: Vec<SplitQuaternion> = (0..d)
                    .map(|a| {
                        let mut e = [0.0; 4];
                        e[a % 4] = 1.0;
                        SplitQuaternion::from_slice(&e).conj() * quaternion_at(x, a / 4)
                    })
                    .collect();
                let mut g = &self.flat / lam;
                for a in 0..d {
                    for b in 0..d {
                        g[(a, b)] -= (left[a] * left[b].conj()).re() / (lam * lam);
                    }
                }
                Ok(g * scale)
            }
        }
    }
}

impl QuaternionicField for Chart {
    fn j_fields(&self, x: &Vector) -> Result<[Mat; 3]> {
        let [j1, j2, j3] = self.basis.j.clone();
        if self.twist == 0.0 {
            return Ok([j1, j2, j3]);
        }
        let s = self.twist * x[0];
        Ok(match self.eps {
            Eps::Complex => {
                let (c, h) = (s.cosh(), s.sinh());
                [&j1 * c + &j2 * h, &j1 * h + &j2 * c, j3]
            }
            Eps::ParaComplex => {
                let (sn, c) = s.sin_cos();
                [&j1 * c + &j2 * sn, &j1 * -sn + &j2 * c, j3]
            }
        })
    }

    fn eps(&self) -> [f64; 3] {
        self.basis.eps
    }
}

/// Flat `ℍ̃ⁿ` with the constant standard basis.
pub fn flat_space(n: usize, eps: Eps) -> Result<Chart> {
    Chart::build(n, eps, AmbientKind::Flat, 0.0)
}

/// Flat `ℍ̃ⁿ` whose adapted basis turns along `x₀`.
pub fn twisted_flat_space(n: usize, eps: Eps, twist: f64) -> Result<Chart> {
    Chart::build(n, eps, AmbientKind::Flat, twist)
}

/// Affine chart of the projective model, validated at the default seeded
/// gate points before it is returned.
pub fn projective_chart(n: usize, eps: Eps, scale: f64) -> Result<Chart> {
    projective_chart_with(n, eps, scale, tolerances::DEFAULT_FD_STEP, &default_gate_points(n))
}

pub fn default_gate_points(n: usize) -> Vec<Vector> {
    sampling::ball_points(4 * n, GATE_POINTS, sampling::DEFAULT_RADIUS, sampling::DEFAULT_SEED)
        .into_iter()
        .map(Vector::from_vec)
        .collect()
}

pub fn projective_chart_with(n: usize, eps: Eps, scale: f64, step: f64, gate_points: &[Vector]) -> Result<Chart> {
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid projective scale {scale}")));
    }
    let mut chart = Chart::build(n, eps, AmbientKind::Projective { scale }, 0.0)?.with_step(step);
    chart.run_gate(gate_points)?;
    Ok(chart)
}

/// Which side the imaginary unit multiplies the graph function from, and
/// whether the function is the gradient of the potential or its conjugate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Placement {
    pub left: bool,
    pub holomorphic: bool,
}

impl Placement {
    pub const ALL: [Placement; 4] = [
        Placement { left: true, holomorphic: true },
        Placement { left: true, holomorphic: false },
        Placement { left: false, holomorphic: true },
        Placement { left: false, holomorphic: false },
    ];

    pub fn label(&self) -> &'static str {
        match (self.left, self.holomorphic) {
            (true, true) => "left/holomorphic",
            (true, false) => "left/antiholomorphic",
            (false, true) => "right/holomorphic",
            (false, false) => "right/antiholomorphic",
        }
    }
}

/// Monomial `c · Π zᵢ^{pᵢ}` of an ε-complex potential.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialTerm {
    pub coeff: (f64, f64),
    pub powers: Vec<u32>,
}

/// Graph `z ↦ z + U·w(z)` with `w = ∇Φ` (or its conjugate).
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSpec {
    pub terms: Vec<PotentialTerm>,
    pub placement: Placement,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ImmersionKind {
    /// First `k` ε-complex lines.
    EpsSlice { k: usize },
    /// First `k` split-quaternionic lines.
    PqSlice { k: usize },
    Graph(GraphSpec),
}

/// A map from an open set of `ℝ^{domain_dim}` into a chart.
#[derive(Clone, Debug)]
pub struct Immersion {
    pub chart: Arc<Chart>,
    pub kind: ImmersionKind,
    pub domain_dim: usize,
    frame: Mat,
}

impl Immersion {
    pub fn map(&self, u: &Vector) -> Result<Vector> {
        if u.len() != self.domain_dim {
            return Err(Error::InvalidArgument(format!(
                "domain point has dimension {}, expected {}",
                u.len(),
                self.domain_dim
            )));
        }
        let x = match &self.kind {
            ImmersionKind::EpsSlice { .. } | ImmersionKind::PqSlice { .. } => &self.frame * u,
            ImmersionKind::Graph(spec) => graph_point(spec, self.chart.n, self.chart.eps, u)?,
        };
        self.chart.check_domain(&x)?;
        Ok(x)
    }

    /// Columns `∂φ/∂uᵢ`.
    pub fn differential(&self, u: &Vector) -> Result<Mat> {
        match self.kind {
            ImmersionKind::Graph(_) => {
                let cols: Vec<Vector> = (0..self.domain_dim)
                    .map(|i| chart::partial(|v| self.map(v), u, i, self.chart.step))
                    .collect::<Result<_>>()?;
                Ok(Mat::from_columns(&cols))
            }
            _ => Ok(self.frame.clone()),
        }
    }

    /// `∂²φ/∂uᵢ∂uⱼ`, indexed `[i·m + j]`.
    pub fn hessian(&self, u: &Vector) -> Result<Vec<Vector>> {
        let m = self.domain_dim;
        match self.kind {
            ImmersionKind::Graph(_) => {
                let mut out = vec![Vector::zeros(4 * self.chart.n); m * m];
                for i in 0..m {
                    for j in i..m {
                        let v = chart::partial(
                            |p| chart::partial(|q| self.map(q), p, j, self.chart.step),
                            u,
                            i,
                            self.chart.step,
                        )?;
                        out[i * m + j] = v.clone();
                        out[j * m + i] = v;
                    }
                }
                Ok(out)
            }
            _ => Ok(vec![Vector::zeros(4 * self.chart.n); m * m]),
        }
    }

    /// Largest component of `J₁ dφ` outside the span of `dφ`, relative to
    /// the size of `dφ`.
    pub fn j1_invariance_residual(&self, u: &Vector) -> Result<f64> {
        let x = self.map(u)?;
        let e = self.differential(u)?;
        let j1 = &self.chart.j_fields(&x)?[0];
        Ok(span_leak(&e, &(j1 * &e)))
    }

    pub fn check_rank(&self, u: &Vector) -> Result<()> {
        let e = self.differential(u)?;
        let r = linalg::rank(&e);
        if r < self.domain_dim {
            return Err(Error::RankDeficient {
                point: u.iter().copied().collect(),
                rank: r,
                expected: self.domain_dim,
            });
        }
        Ok(())
    }

    /// Seeded domain sample points.
    pub fn sample_points(&self, count: usize, radius: f64, seed: u64) -> Vec<Vector> {
        sampling::ball_points(self.domain_dim, count, radius, seed)
            .into_iter()
            .map(Vector::from_vec)
            .collect()
    }
}

/// Largest component of the columns of `b` orthogonal (Euclidean) to the
/// span of `a`, relative to `max|a|`.
pub fn span_leak(a: &Mat, b: &Mat) -> f64 {
    let q = linalg::column_span(a);
    let rest = b - &q * (q.transpose() * b);
    max_abs(&rest) / max_abs(a).max(f64::MIN_POSITIVE)
}

pub fn embed_epsilon_complex_slice(k: usize, ambient: Arc<Chart>) -> Result<Immersion> {
    if k < 1 || k > ambient.n {
        return Err(Error::InvalidArgument(format!("slice size {k} outside 1..={}", ambient.n)));
    }
    let frame = pq_linear::epsilon_complex_slice(ambient.n, k, ambient.eps);
    Ok(Immersion { chart: ambient, kind: ImmersionKind::EpsSlice { k }, domain_dim: 2 * k, frame })
}

pub fn embed_pq_slice(k: usize, ambient: Arc<Chart>) -> Result<Immersion> {
    if k < 1 || k > ambient.n {
        return Err(Error::InvalidArgument(format!("slice size {k} outside 1..={}", ambient.n)));
    }
    let frame = pq_linear::pq_slice(ambient.n, k);
    Ok(Immersion { chart: ambient, kind: ImmersionKind::PqSlice { k }, domain_dim: 4 * k, frame })
}

/// Outcome of the placement search for a graph immersion.
#[derive(Clone, Debug)]
pub struct GraphEmbedding {
    pub immersion: Immersion,
    /// Worst `J₁`-invariance residual of every placement, in
    /// [`Placement::ALL`] order.
    pub trials: Vec<(Placement, f64)>,
}

/// Graph of `∇Φ` over the maximal ε-complex slice of a flat chart. All four
/// placements are tried at `probe` and the first that keeps the tangent
/// spaces `J₁`-invariant is kept.
pub fn embed_graph(terms: Vec<PotentialTerm>, ambient: Arc<Chart>, probe: &[Vector]) -> Result<GraphEmbedding> {
    if ambient.kind != AmbientKind::Flat {
        return Err(Error::InvalidArgument("graph immersions need a flat ambient".into()));
    }
    for t in &terms {
        if t.powers.len() != ambient.n {
            return Err(Error::InvalidArgument(format!(
                "potential monomial has {} exponents, expected {}",
                t.powers.len(),
                ambient.n
            )));
        }
    }
    let n = ambient.n;
    let mut trials = Vec::new();
    let mut chosen = None;
    let mut worst_point = vec![];
    for placement in Placement::ALL {
        let imm = Immersion {
            chart: ambient.clone(),
            kind: ImmersionKind::Graph(GraphSpec { terms: terms.clone(), placement }),
            domain_dim: 2 * n,
            frame: Mat::zeros(0, 0),
        };
        let mut worst = 0.0_f64;
        for u in probe {
            let r = imm.j1_invariance_residual(u)?;
            if r > worst {
                worst = r;
                worst_point = u.iter().copied().collect();
            }
        }
        trials.push((placement, worst));
        if chosen.is_none() && worst <= tolerances::FLAT_EXACT {
            chosen = Some(imm);
        }
    }
    match chosen {
        Some(immersion) => Ok(GraphEmbedding { immersion, trials }),
        None => Err(Error::GraphPlacement {
            best: trials.iter().map(|t| t.1).fold(f64::INFINITY, f64::min),
            point: worst_point,
        }),
    }
}

fn ec_pow(z: EpsilonComplex, p: u32) -> Result<EpsilonComplex> {
    let mut acc = EpsilonComplex::one(z.eps);
    for _ in 0..p {
        acc = acc.try_mul(z)?;
    }
    Ok(acc)
}

/// `∂Φ/∂zᵢ` for every `i`.
pub fn potential_gradient(terms: &[PotentialTerm], z: &[EpsilonComplex], eps: Eps) -> Result<Vec<EpsilonComplex>> {
    let n = z.len();
    let mut out = vec![EpsilonComplex::zero(eps); n];
    for t in terms {
        let c = EpsilonComplex::new(t.coeff.0, t.coeff.1, eps);
        for i in 0..n {
            if t.powers[i] == 0 {
                continue;
            }
            let mut acc = c.scale(t.powers[i] as f64);
            for (j, zj) in z.iter().enumerate() {
                let p = if j == i { t.powers[j] - 1 } else { t.powers[j] };
                acc = acc.try_mul(ec_pow(*zj, p)?)?;
            }
            out[i] = out[i].try_add(acc)?;
        }
    }
    Ok(out)
}

fn graph_point(spec: &GraphSpec, n: usize, eps: Eps, u: &Vector) -> Result<Vector> {
    let z: Vec<EpsilonComplex> = (0..n).map(|i| EpsilonComplex::new(u[2 * i], u[2 * i + 1], eps)).collect();
    let grad = potential_gradient(&spec.terms, &z, eps)?;
    let unit = match eps {
        Eps::Complex => SplitQuaternion::J,
        Eps::ParaComplex => SplitQuaternion::I,
    };
    let mut x = Vector::zeros(4 * n);
    for i in 0..n {
        let w = if spec.placement.holomorphic { grad[i] } else { grad[i].conj() };
        let wq = w.to_split_quaternion();
        let off = if spec.placement.left { unit * wq } else { wq * unit };
        let q = z[i].to_split_quaternion() + off;
        for (k, v) in q.to_array().iter().enumerate() {
            x[4 * i + k] = *v;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projective_metric_at_origin_is_flat() {
        let c = Chart::build(2, Eps::Complex, AmbientKind::Projective { scale: 1.0 }, 0.0).unwrap();
        let g = c.metric(&Vector::zeros(8)).unwrap();
        assert_eq!(g, pq_linear::flat_metric(2));
    }

    #[test]
    fn twisted_basis_stays_adapted() {
        for eps in Eps::ALL {
            let c = twisted_flat_space(1, eps, 0.7).unwrap();
            let x = Vector::from_vec(vec![0.4, 0.1, -0.2, 0.3]);
            let b = c.basis_at(&x).unwrap();
            assert!(b.residuals(&c.metric(&x).unwrap()).max() < 1e-12);
        }
    }

    #[test]
    fn singular_lambda_rejected() {
        let c = Chart::build(1, Eps::Complex, AmbientKind::Projective { scale: 1.0 }, 0.0).unwrap();
        // N(q) = −1 puts q on the singular hypersurface.
        let x = Vector::from_vec(vec![0.0, 0.0, 1.0, 0.0]);
        assert!(matches!(c.metric(&x), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn too_few_gate_points_rejected() {
        let pts = default_gate_points(1);
        let r = projective_chart_with(1, Eps::Complex, 1.0, 1e-3, &pts[..3]);
        assert!(matches!(r, Err(Error::GateFailure(_))));
    }
}
