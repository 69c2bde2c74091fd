//! Algebraic curvature tensors of the model spaces and the pointwise
//! identities relating their blocks along a totally ε-complex subspace.
//!
//! Convention: `R(X, Y) = [∇_X, ∇_Y] − ∇_[X,Y]`, bivectors act as
//! `(X∧Y)Z = ⟨Y, Z⟩X − ⟨X, Z⟩Y`.

use crate::error::{Error, Result};
use crate::linalg::{self, commutator, max_abs, wedge};
use crate::pq_linear::{AdaptedBasis, ProlongationSpace, ShapeTensor};
use crate::split_algebra::Eps;
use crate::tolerances;
use crate::{Mat, Vector};

/// Endomorphism-valued bilinear form on `ℝ^dim`, stored on basis pairs.
#[derive(Clone, Debug)]
pub struct TwoForm {
    pub dim: usize,
    pub ops: Vec<Mat>,
}

fn unit(dim: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(dim);
    e[i] = 1.0;
    e
}

impl TwoForm {
    pub fn from_fn(dim: usize, f: impl Fn(&Vector, &Vector) -> Mat) -> Self {
        let mut ops = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                ops.push(f(&unit(dim, i), &unit(dim, j)));
            }
        }
        Self { dim, ops }
    }

    pub fn basis(&self, i: usize, j: usize) -> &Mat {
        &self.ops[i * self.dim + j]
    }

    pub fn at(&self, x: &Vector, y: &Vector) -> Mat {
        let (r, c) = self.ops[0].shape();
        let mut out = Mat::zeros(r, c);
        for i in 0..self.dim {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..self.dim {
                if y[j] != 0.0 {
                    out += self.basis(i, j) * (x[i] * y[j]);
                }
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(&Mat) -> Mat) -> Self {
        Self { dim: self.dim, ops: self.ops.iter().map(f).collect() }
    }

    pub fn zip(&self, other: &Self, f: impl Fn(&Mat, &Mat) -> Mat) -> Self {
        Self {
            dim: self.dim,
            ops: self.ops.iter().zip(&other.ops).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.ops.iter().map(max_abs).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.ops.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
    }
}

/// Residuals of the algebraic curvature symmetries.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CurvatureSymmetries {
    pub skew_xy: f64,
    pub skew_zw: f64,
    pub pair: f64,
    pub bianchi: f64,
}

impl CurvatureSymmetries {
    pub fn max(&self) -> f64 {
        self.skew_xy.max(self.skew_zw).max(self.pair).max(self.bianchi)
    }
}

/// Curvature operator `R(X, Y)` together with the metric it lowers with.
#[derive(Clone, Debug)]
pub struct CurvatureTensor {
    pub g: Mat,
    pub form: TwoForm,
}

impl CurvatureTensor {
    pub fn from_fn(g: &Mat, f: impl Fn(&Vector, &Vector) -> Mat) -> Self {
        Self { g: g.clone(), form: TwoForm::from_fn(g.nrows(), f) }
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn op(&self, x: &Vector, y: &Vector) -> Mat {
        self.form.at(x, y)
    }

    /// `R(eᵢ, eⱼ, e_k, e_l) = g(R(eᵢ, eⱼ)e_k, e_l)`.
    pub fn lowered(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d * d * d * d];
        for i in 0..d {
            for j in 0..d {
                let gr = &self.g * self.form.basis(i, j);
                for k in 0..d {
                    for l in 0..d {
                        out[((i * d + j) * d + k) * d + l] = gr[(l, k)];
                    }
                }
            }
        }
        out
    }

    pub fn symmetries(&self) -> CurvatureSymmetries {
        let d = self.dim();
        let r = self.lowered();
        let at = |i: usize, j: usize, k: usize, l: usize| r[((i * d + j) * d + k) * d + l];
        let mut s = CurvatureSymmetries::default();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let v = at(i, j, k, l);
                        s.skew_xy = s.skew_xy.max((v + at(j, i, k, l)).abs());
                        s.skew_zw = s.skew_zw.max((v + at(i, j, l, k)).abs());
                        s.pair = s.pair.max((v - at(k, l, i, j)).abs());
                        s.bianchi = s
                            .bianchi
                            .max((v + at(j, k, i, l) + at(k, i, j, l)).abs());
                    }
                }
            }
        }
        s
    }

    /// `Ric(X, Y) = tr(Z ↦ R(Z, X)Y)`.
    pub fn ricci(&self) -> Mat {
        let d = self.dim();
        Mat::from_fn(d, d, |a, b| (0..d).map(|c| self.form.basis(c, a)[(c, b)]).sum())
    }

    pub fn scal(&self) -> Result<f64> {
        Ok((linalg::inverse(&self.g)? * self.ricci()).trace())
    }

    /// Largest entry of `Ric − (scal/dim)·g`.
    pub fn einstein_residual(&self) -> Result<f64> {
        let s = self.scal()?;
        Ok(max_abs(&(self.ricci() - &self.g * (s / self.dim() as f64))))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { g: self.g.clone(), form: self.form.map(|m| m * s) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { g: self.g.clone(), form: self.form.zip(&other.form, |a, b| a - b) }
    }

    pub fn add_form(&self, other: &TwoForm) -> Self {
        Self { g: self.g.clone(), form: self.form.zip(other, |a, b| a + b) }
    }

    pub fn frobenius(&self) -> f64 {
        self.form.frobenius()
    }
}

/// `g(J_α X, Y)`.
pub fn kahler_form(g: &Mat, j: &Mat, x: &Vector, y: &Vector) -> f64 {
    linalg::inner(g, &(j * x), y)
}

/// Curvature operator of the model space with `ν = 1`.
pub fn r0_op(basis: &AdaptedBasis, g: &Mat, x: &Vector, y: &Vector) -> Mat {
    let mut out = wedge(x, y, g) * 0.25;
    for a in 0..3 {
        let j = &basis.j[a];
        let e = basis.eps[a];
        out += j * (0.5 * e * kahler_form(g, j, x, y));
        out -= wedge(&(j * x), &(j * y), g) * (0.25 * e);
    }
    out
}

pub fn r0_eval(basis: &AdaptedBasis, g: &Mat, nu: f64) -> CurvatureTensor {
    CurvatureTensor::from_fn(g, |x, y| r0_op(basis, g, x, y) * nu)
}

/// ε-complex projective curvature, holomorphic curvature 1.
pub fn r_cpn_op(j: &Mat, g: &Mat, eps: Eps, x: &Vector, y: &Vector) -> Mat {
    (wedge(x, y, g) * (-eps.value()) + wedge(&(j * x), &(j * y), g)
        - j * (2.0 * kahler_form(g, j, x, y)))
        * 0.25
}

pub fn r_cpn_eval(j: &Mat, g: &Mat, eps: Eps) -> CurvatureTensor {
    CurvatureTensor::from_fn(g, |x, y| r_cpn_op(j, g, eps, x, y))
}

/// Frobenius residual of the action of `R(X, Y)` on `J_α` predicted by the
/// parallelism of Q: `[R, J_α] = ε₃ν(−ε_β F'_γ J_β + ε_γ F'_β J_γ)` with
/// `F'_α = −ε_α g(J_α·, ·)` and `(α, β, γ)` cyclic.
pub fn q_invariance_residual(
    basis: &AdaptedBasis,
    g: &Mat,
    r_xy: &Mat,
    nu: f64,
    x: &Vector,
    y: &Vector,
    alpha: usize,
) -> f64 {
    let (b, c) = ((alpha + 1) % 3, (alpha + 2) % 3);
    let e = basis.eps;
    let f_prime = |k: usize| -e[k] * kahler_form(g, &basis.j[k], x, y);
    let rhs = (&basis.j[b] * (-e[b] * f_prime(c)) + &basis.j[c] * (e[c] * f_prime(b))) * (e[2] * nu);
    (commutator(r_xy, &basis.j[alpha]) - rhs).norm()
}

/// A maximal totally ε-complex subspace `T` of a para-quaternionic vector
/// space together with its normal space `N = J₂T`.
#[derive(Clone, Debug)]
pub struct SplitGeometry {
    pub g: Mat,
    pub basis: AdaptedBasis,
    pub eps: Eps,
    pub t: Mat,
    pub n: Mat,
    pub lt: Mat,
    pub ln: Mat,
    /// Induced metric on `T` in the frame `t`.
    pub gt: Mat,
    /// `J₁|_T` in the frame `t`.
    pub jt: Mat,
}

impl SplitGeometry {
    pub fn new(basis: &AdaptedBasis, g: &Mat, t: &Mat) -> Result<Self> {
        let eps = basis.epsilon();
        let n = &basis.j[1] * t;
        if 2 * t.ncols() != g.nrows() {
            return Err(Error::NotMaximal {
                point: vec![],
                reason: format!("dim T = {} in dim {}", t.ncols(), g.nrows()),
            });
        }
        let cross = max_abs(&(t.transpose() * g * &n));
        if cross > tolerances::ALGEBRAIC {
            return Err(Error::NotMaximal {
                point: vec![],
                reason: format!("J2 T is not orthogonal to T (residual {cross:e})"),
            });
        }
        let lt = linalg::g_left_inverse(t, g)?;
        let ln = linalg::g_left_inverse(&n, g)?;
        let jt = &lt * &basis.j[0] * t;
        let leak = max_abs(&(&basis.j[0] * t - t * &jt));
        if leak > tolerances::ALGEBRAIC {
            return Err(Error::InvalidArgument(format!(
                "T is not J1-invariant (residual {leak:e})"
            )));
        }
        let gt = t.transpose() * g * t;
        Ok(Self { g: g.clone(), basis: basis.clone(), eps, t: t.clone(), n, lt, ln, gt, jt })
    }

    /// The standard `ℂⁿ` / `ℂ̃ⁿ` inside `ℍ̃ⁿ`.
    pub fn standard(n: usize, eps: Eps) -> Result<Self> {
        let (space, basis) = crate::pq_linear::make_standard_basis(n, eps)?;
        Self::new(&basis, &space.g, &crate::pq_linear::epsilon_complex_slice(n, n, eps))
    }

    pub fn m(&self) -> usize {
        self.t.ncols()
    }

    pub fn prolongation_space(&self) -> Result<ProlongationSpace> {
        ProlongationSpace::new(self.gt.clone(), self.jt.clone(), self.eps)
    }

    pub fn tangent(&self, x: &Vector) -> Vector {
        &self.t * x
    }

    /// `End(T)` block of an ambient endomorphism.
    pub fn tt(&self, a: &Mat) -> Mat {
        &self.lt * a * &self.t
    }

    pub fn nn(&self, a: &Mat) -> Mat {
        &self.ln * a * &self.n
    }

    pub fn perp_t(&self, a: &Mat) -> Mat {
        &self.ln * a * &self.t
    }

    pub fn t_perp(&self, a: &Mat) -> Mat {
        &self.lt * a * &self.n
    }

    /// Kähler form `F(x, y) = g(𝒥x, y)` on frame coordinates.
    pub fn kahler(&self, x: &Vector, y: &Vector) -> f64 {
        linalg::inner(&self.gt, &(&self.jt * x), y)
    }

    /// `J₂ : N → T` and `J₂ : T → N` in frame coordinates.
    pub fn j2_nt(&self) -> Mat {
        &self.lt * &self.basis.j[1] * &self.n
    }

    pub fn j2_tn(&self) -> Mat {
        &self.ln * &self.basis.j[1] * &self.t
    }

    /// `J₁|_N` in the frame `n`.
    pub fn jn(&self) -> Mat {
        &self.ln * &self.basis.j[0] * &self.n
    }
}

/// Blocks of `ν R₀` along a split, and their distance to the closed forms.
#[derive(Clone, Debug)]
pub struct SpaceFormBlocks {
    pub r_tt: CurvatureTensor,
    pub r_nn: TwoForm,
    /// Largest entry of the mixed blocks `R^⊥T`, `R^T⊥`.
    pub mixed: f64,
    pub tt_closed_residual: f64,
    pub nn_closed_residual: f64,
    /// `R^TT + εν R_cpn`.
    pub cpn_residual: f64,
}

impl SpaceFormBlocks {
    pub fn perp_t_is_zero(&self) -> bool {
        self.mixed <= tolerances::ALGEBRAIC
    }
}

/// Closed form of the tangential block.
pub fn tangential_block_closed(geom: &SplitGeometry, nu: f64, x: &Vector, y: &Vector) -> Mat {
    let e = geom.eps.value();
    let (g, j) = (&geom.gt, &geom.jt);
    (wedge(x, y, g) * e - wedge(&(j * x), &(j * y), g) + j * (2.0 * geom.kahler(x, y))) * (e * nu / 4.0)
}

/// Closed form of the normal block, in the frame `n`.
pub fn normal_block_closed(geom: &SplitGeometry, nu: f64, x: &Vector, y: &Vector) -> Mat {
    let e = geom.eps.value();
    let (tx, ty) = (geom.tangent(x), geom.tangent(y));
    let b = &geom.basis.j;
    let amb = (wedge(&(&b[1] * &tx), &(&b[1] * &ty), &geom.g) * -1.0
        + wedge(&(&b[2] * &tx), &(&b[2] * &ty), &geom.g) * e
        + &b[0] * (2.0 * e * linalg::inner(&geom.g, &(&b[0] * &tx), &ty)))
        * (nu / 4.0);
    geom.nn(&amb)
}

pub fn space_form_blocks(geom: &SplitGeometry, nu: f64) -> SpaceFormBlocks {
    let m = geom.m();
    let full = |x: &Vector, y: &Vector| r0_op(&geom.basis, &geom.g, &geom.tangent(x), &geom.tangent(y)) * nu;
    let r_tt = CurvatureTensor::from_fn(&geom.gt, |x, y| geom.tt(&full(x, y)));
    let r_nn = TwoForm::from_fn(m, |x, y| geom.nn(&full(x, y)));
    let mut mixed = 0.0_f64;
    let mut tt_closed = 0.0_f64;
    let mut nn_closed = 0.0_f64;
    let mut cpn = 0.0_f64;
    for i in 0..m {
        for j in 0..m {
            let (x, y) = (unit(m, i), unit(m, j));
            let r = full(&x, &y);
            mixed = mixed.max(max_abs(&geom.perp_t(&r))).max(max_abs(&geom.t_perp(&r)));
            tt_closed = tt_closed.max(max_abs(&(r_tt.form.basis(i, j) - tangential_block_closed(geom, nu, &x, &y))));
            nn_closed = nn_closed.max(max_abs(&(r_nn.basis(i, j) - normal_block_closed(geom, nu, &x, &y))));
            let cp = r_cpn_op(&geom.jt, &geom.gt, geom.eps, &x, &y) * (-geom.eps.value() * nu);
            cpn = cpn.max(max_abs(&(r_tt.form.basis(i, j) - cp)));
        }
    }
    SpaceFormBlocks {
        r_tt,
        r_nn,
        mixed,
        tt_closed_residual: tt_closed,
        nn_closed_residual: nn_closed,
        cpn_residual: cpn,
    }
}

/// Residual of `R^⊥⊥(X, Y) = J₂ R^TT(X, Y) J₂ + εν F(X, Y) J₁` (normal block
/// recovered from the tangential one), in the frame `n`.
pub fn ricci_from_gauss_residual(
    geom: &SplitGeometry,
    r_tt: &TwoForm,
    r_nn: &TwoForm,
    nu: f64,
    x: &Vector,
    y: &Vector,
) -> f64 {
    let rhs = geom.j2_tn() * r_tt.at(x, y) * geom.j2_nt()
        + geom.jn() * (geom.eps.value() * nu * geom.kahler(x, y));
    (r_nn.at(x, y) - rhs).norm()
}

fn parallel_tangent_sides(
    geom: &SplitGeometry,
    r_tt: &TwoForm,
    c_x: &Mat,
    nu: f64,
    y: &Vector,
    z: &Vector,
) -> (Mat, Mat, Mat) {
    let r = r_tt.at(y, z);
    let extra = &geom.jt * c_x * (nu * geom.eps.value() * geom.kahler(y, z));
    let j2 = &geom.basis.j[1];
    let (ty, tz) = (geom.tangent(y), geom.tangent(z));
    let u = j2 * geom.tangent(&(c_x * y));
    let v = j2 * geom.tangent(&(c_x * z));
    let rt = (r0_op(&geom.basis, &geom.g, &u, &tz) + r0_op(&geom.basis, &geom.g, &ty, &v)) * nu;
    let rhs = geom.tt(&(j2 * rt));
    (c_x * &r - &r * c_x + extra.clone(), c_x * &r + &r * c_x + extra, rhs)
}

/// Residual of the identity satisfied by a parallel `R^TT` in a space form:
/// `C_X R^TT(Y, Z) − R^TT(Y, Z) C_X + νε F(Y, Z) 𝒥 C_X
///  = [J₂(R̃(J₂C_X Y, Z) + R̃(Y, J₂C_X Z))]^TT`.
pub fn parallel_tangent_curvature_residual(
    geom: &SplitGeometry,
    r_tt: &TwoForm,
    c_x: &Mat,
    nu: f64,
    y: &Vector,
    z: &Vector,
) -> f64 {
    let (lhs, _, rhs) = parallel_tangent_sides(geom, r_tt, c_x, nu, y, z);
    (lhs - rhs).norm()
}

/// Same identity with the anticommutator `C_X R^TT + R^TT C_X` on the left.
/// Kept to document that this variant does not hold.
pub fn parallel_tangent_curvature_anticommutator_residual(
    geom: &SplitGeometry,
    r_tt: &TwoForm,
    c_x: &Mat,
    nu: f64,
    y: &Vector,
    z: &Vector,
) -> f64 {
    let (_, lhs, rhs) = parallel_tangent_sides(geom, r_tt, c_x, nu, y, z);
    (lhs - rhs).norm()
}

/// `[C, C](X, Y) = [C_X, C_Y]`.
pub fn cc_bracket(c: &ShapeTensor, x: &Vector, y: &Vector) -> Mat {
    commutator(&c.at(x), &c.at(y))
}

pub fn cc_form(c: &ShapeTensor) -> TwoForm {
    TwoForm::from_fn(c.dim(), |x, y| cc_bracket(c, x, y))
}

/// Residuals showing that `[C, C]` is a curvature tensor of unitary type.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CcReport {
    pub commutes_with_j: f64,
    pub skew: f64,
    pub bianchi: f64,
}

impl CcReport {
    pub fn max(&self) -> f64 {
        self.commutes_with_j.max(self.skew).max(self.bianchi)
    }
}

pub fn cc_properties(space: &ProlongationSpace, c: &ShapeTensor) -> CcReport {
    let m = space.dim();
    let form = cc_form(c);
    let mut r = CcReport::default();
    for i in 0..m {
        for j in 0..m {
            let b = form.basis(i, j);
            r.commutes_with_j = r.commutes_with_j.max(max_abs(&commutator(b, &space.j)));
            r.skew = r.skew.max(linalg::skew_residual(&space.g, b));
            for k in 0..m {
                let s = form.basis(i, j).column(k) + form.basis(j, k).column(i) + form.basis(k, i).column(j);
                r.bianchi = r.bianchi.max(s.amax());
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pq_linear::make_standard_basis;

    #[test]
    fn r0_is_a_curvature_tensor() {
        for eps in Eps::ALL {
            let (sp, b) = make_standard_basis(1, eps).unwrap();
            let r = r0_eval(&b, &sp.g, 1.0);
            assert!(r.symmetries().max() < 1e-12);
        }
    }

    #[test]
    fn r0_ricci_is_einstein() {
        for n in 1..=2 {
            let (sp, b) = make_standard_basis(n, Eps::Complex).unwrap();
            let r = r0_eval(&b, &sp.g, 1.0);
            let expected = &sp.g * (n as f64 + 2.0);
            assert!(max_abs(&(r.ricci() - expected)) < 1e-12);
        }
    }

    #[test]
    fn blocks_of_flat_space_vanish() {
        let geom = SplitGeometry::standard(1, Eps::Complex).unwrap();
        let blocks = space_form_blocks(&geom, 0.0);
        assert_eq!(blocks.r_tt.frobenius(), 0.0);
        assert_eq!(blocks.r_nn.frobenius(), 0.0);
        assert!(blocks.perp_t_is_zero());
    }

    #[test]
    fn non_maximal_split_rejected() {
        let (sp, b) = make_standard_basis(2, Eps::Complex).unwrap();
        let t = crate::pq_linear::epsilon_complex_slice(2, 1, Eps::Complex);
        assert!(SplitGeometry::new(&b, &sp.g, &t).is_err());
    }
}
