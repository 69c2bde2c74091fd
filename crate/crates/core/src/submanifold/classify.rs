use super::{j_domain, kahler_domain, nijenhuis, point_data, InducedMetric, SubmanifoldPointData};
use crate::chart;
use crate::error::{Error, Result};
use crate::linalg::max_abs;
use crate::models::Immersion;
use crate::pq_linear;
use crate::tolerances;
use crate::Vector;

/// Thresholds for turning residuals into verdicts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyTolerances {
    /// Pointwise linear-algebra conditions (invariance, orthogonality).
    pub algebraic: f64,
    /// Conditions involving derivatives of fields along the immersion.
    pub differential: f64,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        Self { algebraic: tolerances::FLAT_EXACT, differential: tolerances::FD_SECOND }
    }
}

/// Residual of every classification condition at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ClassResiduals {
    /// `J₁T ⊂ T`.
    pub almost_hermitian: f64,
    /// `∇𝒥 = 0` for the induced connection.
    pub kahler: f64,
    /// `ω₂|_T = ω₃|_T = 0`.
    pub omega_restricted: f64,
    /// `J₂T ⊥ T`.
    pub totally_complex: f64,
    /// `J₂T ⊂ T`.
    pub para_quaternionic: f64,
    /// `h = 0`.
    pub second_fundamental: f64,
    /// `dF = 0`.
    pub kahler_form_closed: f64,
    /// `N_𝒥 = 0`.
    pub nijenhuis: f64,
    /// `ψ = 0`.
    pub psi: f64,
}

impl ClassResiduals {
    pub const NAMES: [&'static str; 9] = [
        "almost_hermitian",
        "kahler",
        "omega_restricted",
        "totally_complex",
        "para_quaternionic",
        "second_fundamental",
        "kahler_form_closed",
        "nijenhuis",
        "psi",
    ];

    pub fn values(&self) -> [f64; 9] {
        [
            self.almost_hermitian,
            self.kahler,
            self.omega_restricted,
            self.totally_complex,
            self.para_quaternionic,
            self.second_fundamental,
            self.kahler_form_closed,
            self.nijenhuis,
            self.psi,
        ]
    }

    fn from_values(v: [f64; 9]) -> Self {
        Self {
            almost_hermitian: v[0],
            kahler: v[1],
            omega_restricted: v[2],
            totally_complex: v[3],
            para_quaternionic: v[4],
            second_fundamental: v[5],
            kahler_form_closed: v[6],
            nijenhuis: v[7],
            psi: v[8],
        }
    }

    /// Componentwise maximum.
    pub fn max(&self, other: &Self) -> Self {
        let (a, b) = (self.values(), other.values());
        Self::from_values(std::array::from_fn(|i| a[i].max(b[i])))
    }
}

/// Pass/fail per class; `None` where the class does not apply.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Verdict {
    pub almost_hermitian: Option<bool>,
    pub kahler: Option<bool>,
    pub omega_restricted: Option<bool>,
    pub totally_complex: Option<bool>,
    pub para_quaternionic: Option<bool>,
    pub totally_geodesic: Option<bool>,
    pub almost_kahler: Option<bool>,
    pub integrable: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct PointClassification {
    pub u: Vector,
    pub residuals: ClassResiduals,
    /// `T̄` is a nonzero degenerate subspace at this point.
    pub degenerate_stratum: bool,
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub points: Vec<PointClassification>,
    /// Points that could not be evaluated, with the reason.
    pub skipped: Vec<(Vector, String)>,
    pub worst: ClassResiduals,
    pub verdict: Verdict,
    pub degenerate_stratum: bool,
    /// ε-Kähler and para-quaternionic both passed while `ν ≠ 0`.
    pub exclusivity_violation: bool,
    pub nu: f64,
}

/// Classification residuals at one point, reusing precomputed point data.
pub fn class_residuals(imm: &Immersion, data: &SubmanifoldPointData) -> Result<ClassResiduals> {
    let u = &data.u;
    let step = imm.chart.step;
    let m = imm.domain_dim;
    let induced = InducedMetric(imm);
    let nabla_j = chart::covariant_derivative_endomorphism(&induced, |p| j_domain(imm, p), u, step)?;
    let dfk: Vec<_> = (0..m).map(|k| chart::partial(|p| kahler_domain(imm, p), u, k, step)).collect::<Result<_>>()?;
    let df = chart::exterior_derivative_2form(&dfk);
    let n = nijenhuis(imm, u)?;
    Ok(ClassResiduals {
        almost_hermitian: data.j1_leak,
        kahler: nabla_j.iter().map(max_abs).fold(0.0, f64::max),
        omega_restricted: data.omega[1].amax().max(data.omega[2].amax()),
        totally_complex: data.j2_orthogonality,
        para_quaternionic: data.j2_leak,
        second_fundamental: data.h_norm(),
        kahler_form_closed: df.iter().fold(0.0_f64, |a, v| a.max(v.abs())),
        nijenhuis: n.iter().map(|v| v.amax()).fold(0.0, f64::max),
        psi: data.psi.amax(),
    })
}

/// Whether the invariant part `T̄` of the tangent space is degenerate.
pub fn degenerate_stratum(data: &SubmanifoldPointData) -> Result<bool> {
    let split = pq_linear::invariant_subspace(&data.tangent, &data.basis, &data.g_ambient)?;
    Ok(!split.orthogonal)
}

/// Classify an immersion from its residuals at the given domain points.
/// Points where the data cannot be computed are skipped and reported.
pub fn classify(imm: &Immersion, points: &[Vector], tol: &ClassifyTolerances) -> Result<Classification> {
    let mut out = Vec::new();
    let mut skipped = Vec::new();
    for u in points {
        let r = point_data(imm, u).and_then(|d| Ok((class_residuals(imm, &d)?, degenerate_stratum(&d)?)));
        match r {
            Ok((residuals, degenerate)) => {
                out.push(PointClassification { u: u.clone(), residuals, degenerate_stratum: degenerate })
            }
            Err(e) => skipped.push((u.clone(), e.to_string())),
        }
    }
    if out.is_empty() {
        return Err(Error::NoValidPoints);
    }
    Ok(summarize(out, skipped, imm.chart.nu(), tol))
}

/// Aggregate per-point residuals into a verdict.
pub fn summarize(
    points: Vec<PointClassification>,
    skipped: Vec<(Vector, String)>,
    nu: f64,
    tol: &ClassifyTolerances,
) -> Classification {
    let worst = points.iter().fold(ClassResiduals::default(), |acc, p| acc.max(&p.residuals));
    let degenerate = points.iter().any(|p| p.degenerate_stratum);
    let alg = |v: f64| v <= tol.algebraic;
    let dif = |v: f64| v <= tol.differential;
    let hermitian = alg(worst.almost_hermitian);
    let when_hermitian = |ok: bool| if hermitian { Some(ok) } else { None };
    let pointwise = |ok: bool| if degenerate { None } else { Some(ok) };
    let verdict = Verdict {
        almost_hermitian: Some(hermitian),
        kahler: when_hermitian(dif(worst.kahler)),
        omega_restricted: when_hermitian(dif(worst.omega_restricted)),
        totally_complex: pointwise(alg(worst.totally_complex)),
        para_quaternionic: pointwise(alg(worst.para_quaternionic)),
        totally_geodesic: Some(dif(worst.second_fundamental)),
        almost_kahler: when_hermitian(dif(worst.kahler_form_closed)),
        integrable: when_hermitian(dif(worst.nijenhuis)),
    };
    let exclusivity_violation =
        nu.abs() > tolerances::NU_ZERO && verdict.kahler == Some(true) && verdict.para_quaternionic == Some(true);
    Classification {
        points,
        skipped,
        worst,
        verdict,
        degenerate_stratum: degenerate,
        exclusivity_violation,
        nu,
    }
}
