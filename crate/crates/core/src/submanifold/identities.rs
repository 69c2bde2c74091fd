use num_complex::Complex64;

use super::{omega_domain, point_data, shape_tensor_domain, InducedMetric, NormalMode, SubmanifoldPointData};
use crate::chart::{self, MetricField, QuaternionicField, Tensor};
use crate::curvature::{ricci_from_gauss_residual, CurvatureTensor, SplitGeometry, TwoForm};
use crate::error::{Error, Result};
use crate::linalg::{self, commutator, max_abs};
use crate::models::Immersion;
use crate::pq_linear::{CubicPair, ProlongationSpace, ShapeTensor};
use crate::split_algebra::Eps;
use crate::tolerances;
use crate::{Mat, Vector};

fn unit(d: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(d);
    e[i] = 1.0;
    e
}

fn require_j2(data: &SubmanifoldPointData) -> Result<&ShapeTensor> {
    match (&data.shape, data.normal_mode) {
        (Some(c), NormalMode::J2) => Ok(c),
        _ => Err(Error::NotMaximal {
            point: data.u.iter().copied().collect(),
            reason: format!(
                "dim M = {} in dim {}, J2 T ⊥ T residual {:e}",
                data.m(),
                data.ambient_dim(),
                data.j2_orthogonality
            ),
        }),
    }
}

fn prolongation_space(data: &SubmanifoldPointData) -> ProlongationSpace {
    ProlongationSpace { g: data.frame_metric(), j: data.j.clone(), eps: data.eps }
}

/// Largest deviation in `h(X, 𝒥Y) = h(𝒥X, Y) = J₁h(X, Y)` over frame pairs.
pub fn fundamental_identity_residual(data: &SubmanifoldPointData) -> f64 {
    let m = data.m();
    let j1 = &data.basis.j[0];
    let mut worst = 0.0_f64;
    for a in 0..m {
        for b in 0..m {
            let (x, y) = (unit(m, a), unit(m, b));
            let target = j1 * data.h_at(a, b);
            let left = data.h_of(&x, &(&data.j * &y));
            let right = data.h_of(&(&data.j * &x), &y);
            worst = worst.max((left - &target).amax()).max((right - target).amax());
        }
    }
    worst
}

/// Largest deviation in `g(A^ξ X, Y) = g(h(X, Y), ξ)` over frame vectors and
/// normal frame vectors.
pub fn weingarten_duality_residual(data: &SubmanifoldPointData) -> f64 {
    let m = data.m();
    let gt = data.frame_metric();
    let mut worst = 0.0_f64;
    for (k, a_op) in data.shape_operators.iter().enumerate() {
        let xi = data.normal.column(k).into_owned();
        let lhs = a_op.transpose() * &gt;
        for a in 0..m {
            for b in 0..m {
                let rhs = linalg::inner(&data.g_ambient, data.h_at(a, b), &xi);
                worst = worst.max((lhs[(a, b)] - rhs).abs());
            }
        }
    }
    worst
}

/// Algebraic properties of `C = J₂∘h` on a maximal totally ε-complex point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ShapeChecks {
    /// `C_X` is g-symmetric.
    pub symmetric: f64,
    /// `C_X = −A^{J₂X}` with `A` from the derivative of the normal field.
    pub weingarten: f64,
    /// `C_X 𝒥 + 𝒥 C_X = 0`.
    pub anticommutes: f64,
    /// `tr C_X = 0`.
    pub traceless: f64,
    /// `g(C_X Y, Z)` and `g(𝒥C_X Y, Z)` are totally symmetric.
    pub cubic_symmetry: f64,
    /// `Σ μᵢ h(Eᵢ, Eᵢ) = 0`.
    pub minimal: f64,
    /// Every shape operator anticommutes with `𝒥`.
    pub shape_operators_anticommute: f64,
    /// `g(A^ξ X, Y) = g(h(X, Y), ξ)`.
    pub duality: f64,
}

impl ShapeChecks {
    pub fn max(&self) -> f64 {
        [
            self.symmetric,
            self.weingarten,
            self.anticommutes,
            self.traceless,
            self.cubic_symmetry,
            self.minimal,
            self.shape_operators_anticommute,
            self.duality,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn shape_tensor_checks(data: &SubmanifoldPointData) -> Result<ShapeChecks> {
    let c = require_j2(data)?;
    let m = data.m();
    let space = prolongation_space(data);
    let res = space.residuals(c);
    let mut trace = 0.0_f64;
    let mut weingarten = 0.0_f64;
    let mut anti_a = 0.0_f64;
    for a in 0..m {
        trace = trace.max(c.c[a].trace().abs());
        // Normal frame vector a is J₂Eₐ.
        weingarten = weingarten.max(max_abs(&(&c.c[a] + &data.shape_operators[a])));
    }
    for op in &data.shape_operators {
        anti_a = anti_a.max(max_abs(&linalg::anticommutator(op, &data.j)));
    }
    let mut mean = Vector::zeros(data.ambient_dim());
    for a in 0..m {
        mean += data.h_at(a, a) * data.mu[a];
    }
    Ok(ShapeChecks {
        symmetric: res.symmetric,
        weingarten,
        anticommutes: res.anticommutation,
        traceless: trace,
        cubic_symmetry: res.cubic_symmetry.max(res.cubic_symmetry_j),
        minimal: mean.amax(),
        shape_operators_anticommute: anti_a,
        duality: weingarten_duality_residual(data),
    })
}

/// `(q⁺, q⁻)` or `(q, q̄)` of the shape tensor at a point.
pub fn cubic_forms(data: &SubmanifoldPointData) -> Result<CubicPair> {
    let c = require_j2(data)?;
    prolongation_space(data).decompose_within(c, tolerances::FD_FIRST)
}

/// Ambient curvature at the image point.
fn ambient_curvature(imm: &Immersion, x: &Vector) -> Result<CurvatureTensor> {
    chart::curvature_fd(imm.chart.as_ref(), x, imm.chart.step)
}

/// Intrinsic curvature of the induced metric, in the frame.
pub fn intrinsic_curvature(imm: &Immersion, data: &SubmanifoldPointData) -> Result<CurvatureTensor> {
    let r = chart::curvature_fd(&InducedMetric(imm), &data.u, imm.chart.step)?;
    Ok(CurvatureTensor::from_fn(&data.frame_metric(), |x, y| {
        data.endo_to_frame(&r.op(&data.to_domain(x), &data.to_domain(y)))
    }))
}

/// `R̃(Eₐ, E_b)` restricted to `T` (tangential block), in the frame.
fn tangential_block(data: &SubmanifoldPointData, amb: &CurvatureTensor) -> CurvatureTensor {
    let left = data.tangential();
    CurvatureTensor::from_fn(&data.frame_metric(), |x, y| {
        &left * amb.op(&data.ambient(x), &data.ambient(y)) * &data.tangent
    })
}

/// `∇_X C` in the frame for frame vector `X`, as the shape tensor
/// `Y ↦ (∇_X C)_Y`.
fn covariant_shape_derivative(imm: &Immersion, data: &SubmanifoldPointData, x: &Vector) -> Result<ShapeTensor> {
    let m = data.m();
    let dir = data.to_domain(x);
    let t: Tensor = chart::covariant_derivative_field(
        &InducedMetric(imm),
        |p| shape_tensor_domain(imm, p),
        &data.u,
        &dir,
        imm.chart.step,
    )?;
    // Domain coefficients: t[(a·m + i)·m + j] = ((∇C)_{∂ᵢ}∂ⱼ)^a.
    let at_domain = |y: &Vector| Mat::from_fn(m, m, |a, j| (0..m).map(|i| t.data[(a * m + i) * m + j] * y[i]).sum());
    let c = (0..m)
        .map(|b| data.endo_to_frame(&at_domain(&data.to_domain(&unit(m, b)))))
        .collect();
    Ok(ShapeTensor { c })
}

/// Restricted `ω₁` as a domain field and `dω₁` in the frame.
fn domega_frame(imm: &Immersion, data: &SubmanifoldPointData) -> Result<Mat> {
    let m = data.m();
    let dw: Vec<Vector> = (0..m)
        .map(|k| chart::partial(|p| Ok(omega_domain(imm, p)?[0].clone()), &data.u, k, imm.chart.step))
        .collect::<Result<_>>()?;
    Ok(data.form_to_frame(&chart::exterior_derivative_1form(&dw)))
}

/// `P_{XY} = (∇_X C)_Y + ε ω(X) 𝒥 C_Y` for all frame pairs, `[a·m + b]`.
fn p_tensor(imm: &Immersion, data: &SubmanifoldPointData, c: &ShapeTensor) -> Result<Vec<Mat>> {
    let m = data.m();
    let e = data.eps.value();
    let mut out = Vec::with_capacity(m * m);
    for a in 0..m {
        let nabla = covariant_shape_derivative(imm, data, &unit(m, a))?;
        for b in 0..m {
            out.push(&nabla.c[b] + &data.j * &c.c[b] * (e * data.omega[0][a]));
        }
    }
    Ok(out)
}

/// Residuals of the Gauss, Codazzi and Ricci equations at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GcrResiduals {
    /// `R^TT(X, Y) = R(X, Y) + [C_X, C_Y]`, or its general second
    /// fundamental form version off the maximal stratum.
    pub gauss: f64,
    /// `J₂R^⊥T(X, Y) = P_{XY} − P_{YX}`.
    pub codazzi: Option<f64>,
    /// `J₂R^⊥⊥(X, Y)J₂ = R(X, Y) + [C_X, C_Y] − ε dω(X, Y) 𝒥`.
    pub ricci: Option<f64>,
}

impl GcrResiduals {
    pub fn max(&self) -> f64 {
        self.gauss.max(self.codazzi.unwrap_or(0.0)).max(self.ricci.unwrap_or(0.0))
    }
}

pub fn gcr_residuals(imm: &Immersion, u: &Vector) -> Result<GcrResiduals> {
    let data = point_data(imm, u)?;
    let m = data.m();
    let amb = ambient_curvature(imm, &data.x)?;
    let intrinsic = intrinsic_curvature(imm, &data)?;
    let rtt = tangential_block(&data, &amb);
    let Some(c) = data.shape.clone() else {
        // ⟨R̃(X,Y)Z, W⟩ = ⟨R(X,Y)Z, W⟩ − ⟨h(Y,Z), h(X,W)⟩ + ⟨h(X,Z), h(Y,W)⟩
        let gt = data.frame_metric();
        let ip = |v: &Vector, w: &Vector| linalg::inner(&data.g_ambient, v, w);
        let mut worst = 0.0_f64;
        for a in 0..m {
            for b in 0..m {
                let lhs = &gt * rtt.form.basis(a, b);
                let rhs = &gt * intrinsic.form.basis(a, b);
                for k in 0..m {
                    for l in 0..m {
                        let hh = -ip(data.h_at(b, k), data.h_at(a, l)) + ip(data.h_at(a, k), data.h_at(b, l));
                        worst = worst.max((lhs[(l, k)] - rhs[(l, k)] - hh).abs());
                    }
                }
            }
        }
        return Ok(GcrResiduals { gauss: worst, codazzi: None, ricci: None });
    };

    let left = data.tangential();
    let dim = data.ambient_dim();
    let normal_proj = Mat::identity(dim, dim) - &data.tangent * &left;
    let j2 = &data.basis.j[1];
    let p = p_tensor(imm, &data, &c)?;
    let domega = domega_frame(imm, &data)?;
    let e = data.eps.value();
    let j2e = j2 * &data.tangent;
    let (mut gauss, mut codazzi, mut ricci) = (0.0_f64, 0.0_f64, 0.0_f64);
    for a in 0..m {
        for b in 0..m {
            let cc = commutator(&c.c[a], &c.c[b]);
            let r = intrinsic.form.basis(a, b);
            gauss = gauss.max(max_abs(&(rtt.form.basis(a, b) - r - &cc)));
            let ramb = amb.op(&data.ambient(&unit(m, a)), &data.ambient(&unit(m, b)));
            let perp_t = &left * j2 * &normal_proj * &ramb * &data.tangent;
            codazzi = codazzi.max(max_abs(&(perp_t - (&p[a * m + b] - &p[b * m + a]))));
            let perp_perp = &left * j2 * &normal_proj * &ramb * &j2e;
            let rhs = r + cc - &data.j * (e * domega[(a, b)]);
            ricci = ricci.max(max_abs(&(perp_perp - rhs)));
        }
    }
    Ok(GcrResiduals { gauss, codazzi: Some(codazzi), ricci: Some(ricci) })
}

/// Ricci curvature of a maximal totally ε-complex submanifold compared with
/// the two closed expressions.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RicciCheck {
    /// `Ric = Ric(R^TT) + Σ μᵢ g(C_{Eᵢ}·, C_{Eᵢ}·)`.
    pub general: f64,
    /// `Ric(X, Y) = (ν/2)(n+1) g(X, Y) + tr(C_X C_Y)` in a space form.
    pub space_form: f64,
}

pub fn ricci_check(imm: &Immersion, u: &Vector) -> Result<RicciCheck> {
    let data = point_data(imm, u)?;
    let c = require_j2(&data)?;
    let m = data.m();
    let gt = data.frame_metric();
    let ric = intrinsic_curvature(imm, &data)?.ricci();
    let amb = ambient_curvature(imm, &data.x)?;
    let ric_tt = tangential_block(&data, &amb).ricci();
    let mut sum_cc = Mat::zeros(m, m);
    for i in 0..m {
        sum_cc += c.c[i].transpose() * &gt * &c.c[i] * data.mu[i];
    }
    let nu = imm.chart.nu();
    let n = (m / 2) as f64;
    let trace_cc = Mat::from_fn(m, m, |a, b| (&c.c[a] * &c.c[b]).trace());
    Ok(RicciCheck {
        general: max_abs(&(&ric - ric_tt - sum_cc)),
        space_form: max_abs(&(ric - &gt * (nu / 2.0 * (n + 1.0)) - trace_cc)),
    })
}

/// Largest entry of `dω₁|_T − ν F`.
pub fn domega_residual(imm: &Immersion, u: &Vector) -> Result<f64> {
    let data = point_data(imm, u)?;
    let domega = domega_frame(imm, &data)?;
    Ok(max_abs(&(domega - &data.kahler * imm.chart.nu())))
}

/// `F_α|_T` in the frame.
pub fn restricted_kahler_forms(data: &SubmanifoldPointData) -> [Mat; 3] {
    std::array::from_fn(|a| (&data.basis.j[a] * &data.tangent).transpose() * &data.g_ambient * &data.tangent)
}

fn wedge_combination(f2: &Mat, w3: &Vector, f3: &Mat, w2: &Vector, sign: f64) -> Vec<f64> {
    let a = chart::wedge_2form_1form(f2, w3);
    let b = chart::wedge_2form_1form(f3, w2);
    a.iter().zip(&b).map(|(x, y)| x + sign * y).collect()
}

fn max_entry(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Largest component of the 3-form `F₂∧ω₃ + ε F₃∧ω₂`. Restricted to a
/// submanifold this equals `−dF`, so it vanishes exactly on almost ε-Kähler
/// submanifolds.
pub fn wedge_identity_residual(f2: &Mat, w3: &Vector, f3: &Mat, w2: &Vector, eps: Eps) -> f64 {
    max_entry(&wedge_combination(f2, w3, f3, w2, eps.value()))
}

/// Same with the opposite sign, `F₂∧ω₃ − ε F₃∧ω₂`. Kept to document that this
/// form does not track `dF`.
pub fn wedge_identity_opposite_residual(f2: &Mat, w3: &Vector, f3: &Mat, w2: &Vector, eps: Eps) -> f64 {
    max_entry(&wedge_combination(f2, w3, f3, w2, -eps.value()))
}

/// [`wedge_identity_residual`] for the restricted forms of a submanifold.
pub fn almost_kahler_wedge_residual(data: &SubmanifoldPointData) -> f64 {
    let f = restricted_kahler_forms(data);
    wedge_identity_residual(&f[1], &data.omega[2], &f[2], &data.omega[1], data.eps)
}

/// Largest component of `dF + F₂∧ω₃ + εF₃∧ω₂` on the submanifold, in domain
/// coordinates.
pub fn kahler_form_wedge_consistency(imm: &Immersion, u: &Vector) -> Result<f64> {
    let m = imm.domain_dim;
    let step = imm.chart.step;
    let dfk: Vec<Mat> =
        (0..m).map(|k| chart::partial(|p| super::kahler_domain(imm, p), u, k, step)).collect::<Result<_>>()?;
    let df = chart::exterior_derivative_2form(&dfk);
    let x = imm.map(u)?;
    let d = imm.differential(u)?;
    let g = imm.chart.metric(&x)?;
    let j = imm.chart.j_fields(&x)?;
    let f: Vec<Mat> = (0..3).map(|a| (&j[a] * &d).transpose() * &g * &d).collect();
    let w = omega_domain(imm, u)?;
    let wedge = wedge_combination(&f[1], &w[2], &f[2], &w[1], imm.chart.eps.value());
    Ok(df.iter().zip(&wedge).fold(0.0_f64, |acc, (a, b)| acc.max((a + b).abs())))
}

/// Largest entry of `P_{XY}` over frame pairs; zero for parallel
/// submanifolds.
pub fn parallelism_residual(imm: &Immersion, u: &Vector) -> Result<f64> {
    let data = point_data(imm, u)?;
    let c = require_j2(&data)?;
    Ok(p_tensor(imm, &data, c)?.iter().map(max_abs).fold(0.0, f64::max))
}

/// Largest entry of `∇_X [C, C]` over frame vectors `X`.
pub fn cc_parallel_residual(imm: &Immersion, u: &Vector) -> Result<f64> {
    let data = point_data(imm, u)?;
    require_j2(&data)?;
    let m = imm.domain_dim;
    let field = |p: &Vector| -> Result<Tensor> {
        let c = shape_tensor_domain(imm, p)?;
        let ci: Vec<Mat> = (0..m).map(|i| Mat::from_fn(m, m, |a, j| c.data[(a * m + i) * m + j])).collect();
        let mut data = vec![0.0; m.pow(4)];
        for i in 0..m {
            for j in 0..m {
                let br = commutator(&ci[i], &ci[j]);
                for a in 0..m {
                    for b in 0..m {
                        data[((a * m + i) * m + j) * m + b] = br[(a, b)];
                    }
                }
            }
        }
        Ok(Tensor::new(m, 1, 3, data))
    };
    let mut worst = 0.0_f64;
    for k in 0..m {
        let dir = data.to_domain(&unit(m, k));
        let t = chart::covariant_derivative_field(&InducedMetric(imm), field, &data.u, &dir, imm.chart.step)?;
        worst = worst.max(t.max_abs());
    }
    Ok(worst)
}

/// Evolution of the cubic forms along a parallel submanifold:
/// `∇_X q = −iω(X) q` (ε = −1) or `∇_X q⁺ = ω(X) q⁺` (ε = +1).
/// Returns `None` when the point is not parallel or `C` vanishes there.
pub fn cubic_line_residual(imm: &Immersion, u: &Vector, tol: f64) -> Result<Option<f64>> {
    let data = point_data(imm, u)?;
    let c = require_j2(&data)?.clone();
    let m = data.m();
    if c.max_abs() <= tol {
        return Ok(None);
    }
    let p = p_tensor(imm, &data, &c)?;
    if p.iter().map(max_abs).fold(0.0, f64::max) > tol {
        return Ok(None);
    }
    let space = prolongation_space(&data);
    let q = space.decompose_within(&c, tolerances::FD_FIRST)?.plus;
    let mut worst = 0.0_f64;
    for a in 0..m {
        let nabla = covariant_shape_derivative(imm, &data, &unit(m, a))?;
        let dq = space.decompose_within(&nabla, tolerances::FD_FIRST)?.plus;
        let w = data.omega[0][a];
        let factor = match data.eps {
            Eps::Complex => Complex64::new(0.0, -w),
            Eps::ParaComplex => Complex64::new(w, 0.0),
        };
        worst = worst.max(dq.max_diff(&q.scale(factor)));
    }
    Ok(Some(worst))
}

/// Frame-independent [`TwoForm`] of `[C, C]` at a point.
pub fn cc_form_at(data: &SubmanifoldPointData) -> Result<TwoForm> {
    Ok(crate::curvature::cc_form(require_j2(data)?))
}

/// Largest residual of the normal-block identity
/// `R^⊥⊥(X, Y) = J₂R^TT(X, Y)J₂ + εν F(X, Y) J₁` with both blocks taken from
/// the ambient curvature at the image point.
pub fn normal_block_consistency(imm: &Immersion, u: &Vector) -> Result<f64> {
    let data = point_data(imm, u)?;
    require_j2(&data)?;
    let geom = SplitGeometry::new(&data.basis, &data.g_ambient, &data.tangent)?;
    let amb = ambient_curvature(imm, &data.x)?;
    let m = data.m();
    let r_tt = TwoForm::from_fn(m, |x, y| &geom.lt * amb.op(&geom.tangent(x), &geom.tangent(y)) * &geom.t);
    let r_nn = TwoForm::from_fn(m, |x, y| &geom.ln * amb.op(&geom.tangent(x), &geom.tangent(y)) * &geom.n);
    let nu = imm.chart.nu();
    let mut worst = 0.0_f64;
    for a in 0..m {
        for b in 0..m {
            worst = worst.max(ricci_from_gauss_residual(&geom, &r_tt, &r_nn, nu, &unit(m, a), &unit(m, b)));
        }
    }
    Ok(worst)
}
