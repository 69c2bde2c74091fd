//! Finite-difference Levi-Civita calculus on coordinate charts.
//!
//! First derivatives use the five-point stencil
//! `(−f(x+2h) + 8f(x+h) − 8f(x−h) + f(x−2h)) / 12h` with `h` scaled by
//! `max(1, |xᵢ|)`; higher derivatives nest it.

use crate::curvature::{CurvatureTensor, TwoForm};
use crate::error::{Error, Result};
use crate::linalg::{self, max_abs};
use crate::tolerances;
use crate::{Mat, Vector};

/// A coordinate patch carrying a pseudo-Riemannian metric.
pub trait MetricField: Sync {
    fn dim(&self) -> usize;
    fn metric(&self, x: &Vector) -> Result<Mat>;
}

/// A metric patch with a local adapted basis of the para-quaternionic
/// structure at every point.
pub trait QuaternionicField: MetricField {
    fn j_fields(&self, x: &Vector) -> Result<[Mat; 3]>;
    fn eps(&self) -> [f64; 3];
}

/// Values a finite-difference stencil can combine.
pub trait Linear: Sized {
    fn lin4(c: [f64; 4], v: [Self; 4]) -> Self;
}

impl Linear for f64 {
    fn lin4(c: [f64; 4], v: [Self; 4]) -> Self {
        c[0] * v[0] + c[1] * v[1] + c[2] * v[2] + c[3] * v[3]
    }
}

impl Linear for Mat {
    fn lin4(c: [f64; 4], v: [Self; 4]) -> Self {
        let [a, b, d, e] = v;
        a * c[0] + b * c[1] + d * c[2] + e * c[3]
    }
}

impl Linear for Vector {
    fn lin4(c: [f64; 4], v: [Self; 4]) -> Self {
        let [a, b, d, e] = v;
        a * c[0] + b * c[1] + d * c[2] + e * c[3]
    }
}

impl Linear for Vec<f64> {
    fn lin4(c: [f64; 4], v: [Self; 4]) -> Self {
        (0..v[0].len())
            .map(|i| c[0] * v[0][i] + c[1] * v[1][i] + c[2] * v[2][i] + c[3] * v[3][i])
            .collect()
    }
}

/// `∂f/∂xᵢ` at `x`.
pub fn partial<T: Linear>(f: impl Fn(&Vector) -> Result<T>, x: &Vector, i: usize, step: f64) -> Result<T> {
    let h = step * x[i].abs().max(1.0);
    let at = |s: f64| {
        let mut y = x.clone();
        y[i] += s * h;
        f(&y)
    };
    let v = [at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?];
    let k = 1.0 / (12.0 * h);
    Ok(T::lin4([-k, 8.0 * k, -8.0 * k, k], v))
}

/// Directional derivative along `dir`.
pub fn directional<T: Linear>(f: impl Fn(&Vector) -> Result<T>, x: &Vector, dir: &Vector, step: f64) -> Result<T> {
    let scale = x.amax().max(1.0);
    let h = step * scale;
    let at = |s: f64| f(&(x + dir * (s * h)));
    let v = [at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?];
    let k = 1.0 / (12.0 * h);
    Ok(T::lin4([-k, 8.0 * k, -8.0 * k, k], v))
}

/// Christoffel symbols as matrices: `gamma[k][(a, e)] = Γ^a_{ke}`.
#[derive(Clone, Debug)]
pub struct Christoffel {
    pub gamma: Vec<Mat>,
}

impl Christoffel {
    /// `∇_X Y` for constant coordinate fields, i.e. `Γ(X, Y)`.
    pub fn contract(&self, x: &Vector, y: &Vector) -> Vector {
        let mut out = Vector::zeros(y.len());
        for (k, g) in self.gamma.iter().enumerate() {
            if x[k] != 0.0 {
                out += g * y * x[k];
            }
        }
        out
    }

    /// `Γ_X = Σ Xᵏ Γ_k`.
    pub fn along(&self, x: &Vector) -> Mat {
        let d = x.len();
        let mut out = Mat::zeros(d, d);
        for (k, g) in self.gamma.iter().enumerate() {
            out += g * x[k];
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.gamma.iter().map(max_abs).fold(0.0, f64::max)
    }

    /// Largest `|Γ^a_{bc} − Γ^a_{cb}|`.
    pub fn torsion(&self) -> f64 {
        let d = self.gamma.len();
        let mut worst = 0.0_f64;
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    worst = worst.max((self.gamma[b][(a, c)] - self.gamma[c][(a, b)]).abs());
                }
            }
        }
        worst
    }
}

pub fn nondegenerate_metric<M: MetricField + ?Sized>(field: &M, x: &Vector) -> Result<(Mat, Mat)> {
    let g = field.metric(x)?;
    let det = g.determinant();
    let scale = max_abs(&g).max(f64::MIN_POSITIVE).powi(g.nrows() as i32);
    if det.abs() < tolerances::RANK * scale {
        return Err(Error::SingularMetric { point: x.iter().copied().collect(), det });
    }
    let inv = linalg::inverse(&g)?;
    Ok((g, inv))
}

pub fn christoffel<M: MetricField + ?Sized>(field: &M, x: &Vector, step: f64) -> Result<Christoffel> {
    let d = field.dim();
    let (_, ginv) = nondegenerate_metric(field, x)?;
    let dg: Vec<Mat> = (0..d)
        .map(|k| partial(|y| field.metric(y), x, k, step))
        .collect::<Result<_>>()?;
    // Γ^a_{bc} = ½ g^{ad} (∂_b g_{dc} + ∂_c g_{db} − ∂_d g_{bc})
    let mut gamma = vec![Mat::zeros(d, d); d];
    for b in 0..d {
        for c in b..d {
            let lower = Vector::from_fn(d, |dd, _| 0.5 * (dg[b][(dd, c)] + dg[c][(dd, b)] - dg[dd][(b, c)]));
            let up = &ginv * lower;
            for a in 0..d {
                gamma[b][(a, c)] = up[a];
                gamma[c][(a, b)] = up[a];
            }
        }
    }
    Ok(Christoffel { gamma })
}

/// `R(∂_c, ∂_d) = ∂_cΓ_d − ∂_dΓ_c + [Γ_c, Γ_d]`.
pub fn curvature_fd<M: MetricField + ?Sized>(field: &M, x: &Vector, step: f64) -> Result<CurvatureTensor> {
    let d = field.dim();
    let (g, _) = nondegenerate_metric(field, x)?;
    let gam = christoffel(field, x, step)?;
    let mut dgam: Vec<Vec<Mat>> = Vec::with_capacity(d);
    for c in 0..d {
        let v: Vec<f64> = partial(
            |y| Ok(flatten(&christoffel(field, y, step)?.gamma)),
            x,
            c,
            step,
        )?;
        dgam.push(unflatten(&v, d));
    }
    let mut ops = Vec::with_capacity(d * d);
    for c in 0..d {
        for dd in 0..d {
            ops.push(&dgam[c][dd] - &dgam[dd][c] + linalg::commutator(&gam.gamma[c], &gam.gamma[dd]));
        }
    }
    Ok(CurvatureTensor { g, form: TwoForm { dim: d, ops } })
}

fn flatten(ms: &[Mat]) -> Vec<f64> {
    ms.iter().flat_map(|m| m.iter().copied()).collect()
}

fn unflatten(v: &[f64], d: usize) -> Vec<Mat> {
    v.chunks(d * d).map(|c| Mat::from_column_slice(d, d, c)).collect()
}

/// `(∇_k J)` for each coordinate direction `k`.
pub fn covariant_derivative_endomorphism<M: MetricField + ?Sized>(
    field: &M,
    j: impl Fn(&Vector) -> Result<Mat>,
    x: &Vector,
    step: f64,
) -> Result<Vec<Mat>> {
    let gam = christoffel(field, x, step)?;
    let jx = j(x)?;
    (0..field.dim())
        .map(|k| {
            let dj = partial(&j, x, k, step)?;
            Ok(dj + &gam.gamma[k] * &jx - &jx * &gam.gamma[k])
        })
        .collect()
}

/// The three connection 1-forms of a parallel para-quaternionic structure.
#[derive(Clone, Debug)]
pub struct ConnectionForms {
    pub omega: [Vector; 3],
    /// Largest entry of `∇J_α − (−ε_β ω_γ J_β + ε_γ ω_β J_γ)`.
    pub residual: f64,
}

impl ConnectionForms {
    pub fn max_abs(&self) -> f64 {
        self.omega.iter().map(|w| w.amax()).fold(0.0, f64::max)
    }
}

/// Fit `∇J_α = −ε_β ω_γ ⊗ J_β + ε_γ ω_β ⊗ J_γ` by trace pairing.
pub fn connection_one_forms<Q: QuaternionicField + ?Sized>(chart: &Q, x: &Vector, step: f64) -> Result<ConnectionForms> {
    let forms = connection_forms_unchecked(chart, x, step)?;
    let scale = chart.j_fields(x)?.iter().map(max_abs).fold(1.0, f64::max);
    let limit = 10.0 * tolerances::FD_FIRST * scale;
    if forms.residual > limit {
        return Err(Error::NotParallel { residual: forms.residual, limit });
    }
    Ok(forms)
}

pub fn connection_forms_unchecked<Q: QuaternionicField + ?Sized>(
    chart: &Q,
    x: &Vector,
    step: f64,
) -> Result<ConnectionForms> {
    let d = chart.dim();
    let e = chart.eps();
    let j = chart.j_fields(x)?;
    let mut nabla: Vec<Vec<Mat>> = Vec::with_capacity(3);
    for a in 0..3 {
        nabla.push(covariant_derivative_endomorphism(chart, |y| Ok(chart.j_fields(y)?[a].clone()), x, step)?);
    }
    let norm: Vec<f64> = (0..3).map(|a| (&j[a] * &j[a]).trace()).collect();
    let coef = |a: &Mat, b: usize| (a * &j[b]).trace() / norm[b];
    let mut omega = [Vector::zeros(d), Vector::zeros(d), Vector::zeros(d)];
    let mut residual = 0.0_f64;
    for k in 0..d {
        let mut est = [0.0_f64; 3];
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            // coefficient of J_β is −ε_β ω_γ, of J_γ is ε_γ ω_β
            est[c] += -coef(&nabla[a][k], b) / e[b];
            est[b] += coef(&nabla[a][k], c) / e[c];
        }
        for a in 0..3 {
            omega[a][k] = 0.5 * est[a];
        }
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            let fit = &j[b] * (-e[b] * omega[c][k]) + &j[c] * (e[c] * omega[b][k]);
            residual = residual.max(max_abs(&(&nabla[a][k] - fit)));
        }
    }
    Ok(ConnectionForms { omega, residual })
}

/// `F_α(X, Y) = g(J_α X, Y)` as the matrix `J_αᵀ g`.
pub fn kahler_forms<Q: QuaternionicField + ?Sized>(chart: &Q, x: &Vector) -> Result<[Mat; 3]> {
    let g = chart.metric(x)?;
    let j = chart.j_fields(x)?;
    Ok(std::array::from_fn(|a| j[a].transpose() * &g))
}

/// `(dω)ᵢⱼ = ∂ᵢωⱼ − ∂ⱼωᵢ`.
pub fn exterior_derivative_1form(dw: &[Vector]) -> Mat {
    let d = dw.len();
    Mat::from_fn(d, d, |i, j| dw[i][j] - dw[j][i])
}

/// `(a∧b)(X, Y) = a(X)b(Y) − a(Y)b(X)`.
pub fn wedge_1forms(a: &Vector, b: &Vector) -> Mat {
    a * b.transpose() - b * a.transpose()
}

/// `(F∧w)(X, Y, Z) = F(X, Y)w(Z) + cyclic`, flattened `[(i·d + j)·d + k]`.
pub fn wedge_2form_1form(f: &Mat, w: &Vector) -> Vec<f64> {
    let d = w.len();
    let mut out = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                out[(i * d + j) * d + k] = f[(i, j)] * w[k] + f[(j, k)] * w[i] + f[(k, i)] * w[j];
            }
        }
    }
    out
}

/// `(dF)ᵢⱼₖ = ∂ᵢFⱼₖ + cyclic`.
pub fn exterior_derivative_2form(df: &[Mat]) -> Vec<f64> {
    let d = df.len();
    let mut out = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                out[(i * d + j) * d + k] = df[i][(j, k)] + df[j][(k, i)] + df[k][(i, j)];
            }
        }
    }
    out
}

/// Residuals of the structure equations
/// `ν F'_α = ε₃(dω_α − ε_α ω_β∧ω_γ)` and of their exterior derivative
/// `ν[dF'_α − ε_α(−F'_β∧ω_γ + ω_β∧F'_γ)] = 0`, with `F'_α = −ε_α F_α`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StructureResiduals {
    pub structure: [f64; 3],
    pub integrability: [f64; 3],
}

impl StructureResiduals {
    pub fn max_structure(&self) -> f64 {
        self.structure.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_integrability(&self) -> f64 {
        self.integrability.iter().copied().fold(0.0, f64::max)
    }
}

pub fn structure_eq_residuals<Q: QuaternionicField + ?Sized>(
    chart: &Q,
    x: &Vector,
    nu: f64,
    step: f64,
) -> Result<StructureResiduals> {
    let d = chart.dim();
    let e = chart.eps();
    let forms = connection_one_forms(chart, x, step)?;
    let f = kahler_forms(chart, x)?;
    let fp: [Mat; 3] = std::array::from_fn(|a| &f[a] * -e[a]);
    let mut out = StructureResiduals::default();
    // ∂_k ω_α for all α in one pass.
    let stack = |y: &Vector| -> Result<Vec<f64>> {
        let w = connection_forms_unchecked(chart, y, step)?;
        Ok(w.omega.iter().flat_map(|v| v.iter().copied()).collect())
    };
    let dstack: Vec<Vec<f64>> = (0..d).map(|k| partial(stack, x, k, step)).collect::<Result<_>>()?;
    let fstack = |y: &Vector| -> Result<Vec<f64>> {
        let f = kahler_forms(chart, y)?;
        Ok((0..3).flat_map(|a| (&f[a] * -e[a]).iter().copied().collect::<Vec<_>>()).collect())
    };
    let dfstack: Vec<Vec<f64>> = (0..d).map(|k| partial(fstack, x, k, step)).collect::<Result<_>>()?;
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        let dw: Vec<Vector> = (0..d)
            .map(|k| Vector::from_iterator(d, dstack[k][a * d..(a + 1) * d].iter().copied()))
            .collect();
        let domega = exterior_derivative_1form(&dw);
        let rhs = (domega - wedge_1forms(&forms.omega[b], &forms.omega[c]) * e[a]) * e[2];
        out.structure[a] = max_abs(&(&fp[a] * nu - rhs));

        let dfa: Vec<Mat> = (0..d)
            .map(|k| Mat::from_column_slice(d, d, &dfstack[k][a * d * d..(a + 1) * d * d]))
            .collect();
        let dfp = exterior_derivative_2form(&dfa);
        let t1 = wedge_2form_1form(&fp[b], &forms.omega[c]);
        let t2 = wedge_2form_1form(&fp[c], &forms.omega[b]);
        out.integrability[a] = (0..dfp.len())
            .map(|i| (nu * (dfp[i] - e[a] * (-t1[i] + t2[i]))).abs())
            .fold(0.0, f64::max);
    }
    Ok(out)
}

/// Dense `(p, q)`-tensor in coordinates; contravariant indices first,
/// row-major over all indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub dim: usize,
    pub up: usize,
    pub down: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(dim: usize, up: usize, down: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), dim.pow((up + down) as u32));
        Self { dim, up, down, data }
    }

    pub fn from_matrix_down(m: &Mat) -> Self {
        let d = m.nrows();
        Self::new(d, 0, 2, (0..d * d).map(|i| m[(i / d, i % d)]).collect())
    }

    pub fn from_endomorphism(m: &Mat) -> Self {
        let d = m.nrows();
        Self::new(d, 1, 1, (0..d * d).map(|i| m[(i / d, i % d)]).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    fn rank(&self) -> usize {
        self.up + self.down
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { data: self.data.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(), ..self.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(), ..self.clone() }
    }

    /// Replace slot `slot` by `Σ_e m[(new, e)] T[.., e, ..]` (or transposed).
    fn contract_slot(&self, slot: usize, m: &Mat, transpose: bool) -> Vec<f64> {
        let d = self.dim;
        let r = self.rank();
        let stride = d.pow((r - 1 - slot) as u32);
        let mut out = vec![0.0; self.data.len()];
        for (idx, o) in out.iter_mut().enumerate() {
            let i = (idx / stride) % d;
            let base = idx - i * stride;
            let mut s = 0.0;
            for e in 0..d {
                let coef = if transpose { m[(e, i)] } else { m[(i, e)] };
                s += coef * self.data[base + e * stride];
            }
            *o = s;
        }
        out
    }
}

impl Linear for Tensor {
    fn lin4(c: [f64; 4], v: [Self; 4]) -> Self {
        let [a, b, d, e] = v;
        let data = Vec::<f64>::lin4(c, [a.data.clone(), b.data, d.data, e.data]);
        Tensor { data, ..a }
    }
}

/// `∇_X T` with the Levi-Civita connection of `field`.
pub fn covariant_derivative_field<M: MetricField + ?Sized>(
    field: &M,
    tensor: impl Fn(&Vector) -> Result<Tensor>,
    x: &Vector,
    dir: &Vector,
    step: f64,
) -> Result<Tensor> {
    let t = tensor(x)?;
    let mut out = Tensor::new(t.dim, t.up, t.down, vec![0.0; t.data.len()]);
    for k in 0..field.dim() {
        if dir[k] != 0.0 {
            let dk = partial(&tensor, x, k, step)?;
            out = out.add(&dk.scale(dir[k]));
        }
    }
    let gam = christoffel(field, x, step)?.along(dir);
    for slot in 0..t.rank() {
        let corr = t.contract_slot(slot, &gam, slot >= t.up);
        let sign = if slot < t.up { 1.0 } else { -1.0 };
        for (o, c) in out.data.iter_mut().zip(corr) {
            *o += sign * c;
        }
    }
    Ok(out)
}

/// Reduced scalar curvature `scal / (4n(n+2))` of a `4n`-dimensional chart.
pub fn estimate_nu<M: MetricField + ?Sized>(field: &M, x: &Vector, step: f64) -> Result<f64> {
    let r = curvature_fd(field, x, step)?;
    Ok(nu_from_curvature(&r))
}

pub fn nu_from_curvature(r: &CurvatureTensor) -> f64 {
    let n = r.dim() as f64 / 4.0;
    r.scal().unwrap_or(f64::NAN) / (4.0 * n * (n + 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Conformal {
        scale: f64,
    }

    impl MetricField for Conformal {
        fn dim(&self) -> usize {
            2
        }
        fn metric(&self, x: &Vector) -> Result<Mat> {
            let f = self.scale * (1.0 + x[0] * x[0] + x[1] * x[1]).powi(-2);
            Ok(Mat::identity(2, 2) * f)
        }
    }

    #[test]
    fn stencil_is_fourth_order() {
        let x = Vector::from_vec(vec![0.3]);
        let d: f64 = partial(|y| Ok(y[0].sin()), &x, 0, 1e-3).unwrap();
        assert!((d - 0.3_f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn christoffel_is_invariant_under_constant_scaling() {
        let x = Vector::from_vec(vec![0.2, -0.1]);
        let a = christoffel(&Conformal { scale: 1.0 }, &x, 1e-3).unwrap();
        let b = christoffel(&Conformal { scale: 7.5 }, &x, 1e-3).unwrap();
        for k in 0..2 {
            assert!(max_abs(&(&a.gamma[k] - &b.gamma[k])) < 1e-10);
        }
        assert_eq!(a.torsion(), 0.0);
    }

    #[test]
    fn round_sphere_curvature() {
        // 4/(1+|x|²)² dx² has Gaussian curvature 1.
        let field = Conformal { scale: 4.0 };
        let x = Vector::from_vec(vec![0.1, 0.25]);
        let r = curvature_fd(&field, &x, 1e-3).unwrap();
        let scal = r.scal().unwrap();
        assert!((scal - 2.0).abs() < 1e-6, "{scal}");
        assert!(r.symmetries().max() < 1e-6);
    }

    #[test]
    fn metric_is_parallel() {
        let field = Conformal { scale: 4.0 };
        let x = Vector::from_vec(vec![0.1, 0.25]);
        let dir = Vector::from_vec(vec![0.3, -0.8]);
        let t = covariant_derivative_field(
            &field,
            |y| Ok(Tensor::from_matrix_down(&field.metric(y)?)),
            &x,
            &dir,
            1e-3,
        )
        .unwrap();
        assert!(t.max_abs() < 1e-9);
    }
}
