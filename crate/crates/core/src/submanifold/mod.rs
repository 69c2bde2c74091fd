//! First- and second-order data of an immersion at a point.
//!
//! Domain coordinates `u` are the immersion's parameters; frame coordinates
//! refer to the pseudo-orthonormal tangent frame `E = dφ·M`. Quantities that
//! need further differentiation are computed as fields of `u` and then
//! converted to the frame at the base point.

mod classify;
mod identities;

pub use classify::*;
pub use identities::*;

use crate::chart::{self, MetricField, QuaternionicField, Tensor};
use crate::error::{Error, Result};
use crate::linalg::{self, max_abs};
use crate::models::{span_leak, Immersion};
use crate::pq_linear::{self, AdaptedBasis, ShapeTensor};
use crate::split_algebra::Eps;
use crate::tolerances;
use crate::{Mat, Vector};

/// Induced metric `dφᵀ g̃ dφ` on the parameter domain.
pub struct InducedMetric<'a>(pub &'a Immersion);

impl MetricField for InducedMetric<'_> {
    fn dim(&self) -> usize {
        self.0.domain_dim
    }

    fn metric(&self, u: &Vector) -> Result<Mat> {
        let x = self.0.map(u)?;
        let d = self.0.differential(u)?;
        Ok(d.transpose() * self.0.chart.metric(&x)? * &d)
    }
}

/// How the normal frame was chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalMode {
    /// `N = J₂E`: maximal totally ε-complex point.
    J2,
    /// Generic g-orthogonal complement; shape-tensor checks do not apply.
    Complement,
}

/// Everything computed at a single domain point.
#[derive(Clone, Debug)]
pub struct SubmanifoldPointData {
    pub u: Vector,
    pub x: Vector,
    pub eps: Eps,
    pub step: f64,
    /// `dφ` (ambient × domain).
    pub differential: Mat,
    pub g_ambient: Mat,
    pub basis: AdaptedBasis,
    /// Induced metric in domain coordinates.
    pub g_ind: Mat,
    /// Domain coordinates of the frame vectors (columns).
    pub frame: Mat,
    frame_inv: Mat,
    /// `E = dφ·frame` in ambient coordinates.
    pub tangent: Mat,
    pub mu: Vec<f64>,
    pub normal: Mat,
    pub normal_mu: Vec<f64>,
    pub normal_mode: NormalMode,
    /// `𝒥 = J₁|_T` in the frame.
    pub j: Mat,
    /// `h(Eₐ, E_b)` as ambient vectors, indexed `[a·m + b]`.
    pub h: Vec<Vector>,
    /// `C = J₂∘h` in the frame (only for [`NormalMode::J2`]).
    pub shape: Option<ShapeTensor>,
    /// `A^{ξ_k}` for each normal frame vector, in the frame.
    pub shape_operators: Vec<Mat>,
    /// `F(X, Y) = g(𝒥X, Y)` in the frame.
    pub kahler: Mat,
    /// Restricted `ω_α` in the frame.
    pub omega: [Vector; 3],
    /// `ψ = ω₃∘𝒥 − ω₂` in the frame.
    pub psi: Vector,
    /// Relative leak of `J₁T` out of `T`.
    pub j1_leak: f64,
    /// Relative leak of `J₂T` out of `T`.
    pub j2_leak: f64,
    /// Largest `|g(J₂Eₐ, E_b)|`.
    pub j2_orthogonality: f64,
    /// Fit residual of the ambient connection forms at `x`.
    pub omega_fit: f64,
}

impl SubmanifoldPointData {
    pub fn m(&self) -> usize {
        self.mu.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_maximal(&self) -> bool {
        2 * self.m() == self.ambient_dim()
    }

    pub fn frame_metric(&self) -> Mat {
        Mat::from_diagonal(&Vector::from_vec(self.mu.clone()))
    }

    /// Frame coordinates to domain coordinates.
    pub fn to_domain(&self, v: &Vector) -> Vector {
        &self.frame * v
    }

    /// Endomorphism in domain coordinates to the frame.
    pub fn endo_to_frame(&self, a: &Mat) -> Mat {
        &self.frame_inv * a * &self.frame
    }

    /// Bilinear form in domain coordinates to the frame.
    pub fn form_to_frame(&self, b: &Mat) -> Mat {
        self.frame.transpose() * b * &self.frame
    }

    pub fn h_at(&self, a: usize, b: usize) -> &Vector {
        &self.h[a * self.m() + b]
    }

    /// `h(X, Y)` for frame coordinates.
    pub fn h_of(&self, x: &Vector, y: &Vector) -> Vector {
        let m = self.m();
        let mut out = Vector::zeros(self.ambient_dim());
        for a in 0..m {
            for b in 0..m {
                let c = x[a] * y[b];
                if c != 0.0 {
                    out += self.h_at(a, b) * c;
                }
            }
        }
        out
    }

    /// Largest component of `h` in the frame.
    pub fn h_norm(&self) -> f64 {
        self.h.iter().map(|v| v.amax()).fold(0.0, f64::max)
    }

    /// Ambient vector of frame coordinates.
    pub fn ambient(&self, v: &Vector) -> Vector {
        &self.tangent * v
    }

    /// Left inverse of the tangent frame: ambient vector to frame
    /// coordinates of its tangential part.
    pub fn tangential(&self) -> Mat {
        self.frame_metric() * self.tangent.transpose() * &self.g_ambient
    }
}

/// `L_Φ = g_ind⁻¹ dφᵀ g̃`: ambient vectors to domain coordinates of their
/// tangential part.
fn domain_left_inverse(d: &Mat, g: &Mat) -> Result<Mat> {
    linalg::g_left_inverse(d, g)
}

/// `𝒥` in domain coordinates.
pub fn j_domain(imm: &Immersion, u: &Vector) -> Result<Mat> {
    let x = imm.map(u)?;
    let d = imm.differential(u)?;
    let g = imm.chart.metric(&x)?;
    let j = &imm.chart.j_fields(&x)?[0];
    Ok(domain_left_inverse(&d, &g)? * j * &d)
}

/// `F_ij = g̃(J₁∂ᵢφ, ∂ⱼφ)` in domain coordinates.
pub fn kahler_domain(imm: &Immersion, u: &Vector) -> Result<Mat> {
    let x = imm.map(u)?;
    let d = imm.differential(u)?;
    let g = imm.chart.metric(&x)?;
    let j = &imm.chart.j_fields(&x)?[0];
    Ok((j * &d).transpose() * g * d)
}

/// Restricted connection forms `ω_α(∂ᵢφ)`.
pub fn omega_domain(imm: &Immersion, u: &Vector) -> Result<[Vector; 3]> {
    let x = imm.map(u)?;
    let d = imm.differential(u)?;
    let w = chart::connection_forms_unchecked(imm.chart.as_ref(), &x, imm.chart.step)?;
    Ok(std::array::from_fn(|a| d.transpose() * &w.omega[a]))
}

/// `h(∂ᵢ, ∂ⱼ)` as ambient vectors, indexed `[i·m + j]`.
pub fn second_fundamental_domain(imm: &Immersion, u: &Vector) -> Result<Vec<Vector>> {
    let m = imm.domain_dim;
    let x = imm.map(u)?;
    let d = imm.differential(u)?;
    let g = imm.chart.metric(&x)?;
    let gam = chart::christoffel(imm.chart.as_ref(), &x, imm.chart.step)?;
    let hess = imm.hessian(u)?;
    let lphi = domain_left_inverse(&d, &g)?;
    let normal = Mat::identity(x.len(), x.len()) - &d * lphi;
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let cov = &hess[i * m + j] + gam.contract(&d.column(i).into_owned(), &d.column(j).into_owned());
            out.push(&normal * cov);
        }
    }
    Ok(out)
}

/// `C = J₂∘h` as a `(1, 2)`-tensor in domain coordinates,
/// `data[(a·m + i)·m + j] = (J₂ h(∂ᵢ, ∂ⱼ))^a`.
pub fn shape_tensor_domain(imm: &Immersion, u: &Vector) -> Result<Tensor> {
    let m = imm.domain_dim;
    let x = imm.map(u)?;
    let d = imm.differential(u)?;
    let g = imm.chart.metric(&x)?;
    let j2 = &imm.chart.j_fields(&x)?[1];
    let lphi = domain_left_inverse(&d, &g)?;
    let h = second_fundamental_domain(imm, u)?;
    let mut data = vec![0.0; m * m * m];
    for i in 0..m {
        for j in 0..m {
            let c = &lphi * (j2 * &h[i * m + j]);
            for a in 0..m {
                data[(a * m + i) * m + j] = c[a];
            }
        }
    }
    Ok(Tensor::new(m, 1, 2, data))
}

/// `A^v` in domain coordinates for the normal field `P_N(u)·v` extending
/// the normal vector `v` given at the base point.
fn shape_operator_domain(imm: &Immersion, u: &Vector, v: &Vector) -> Result<Mat> {
    let m = imm.domain_dim;
    let step = imm.chart.step;
    let field = |p: &Vector| -> Result<Vector> {
        let x = imm.map(p)?;
        let d = imm.differential(p)?;
        let g = imm.chart.metric(&x)?;
        let lphi = domain_left_inverse(&d, &g)?;
        Ok(v - &d * (lphi * v))
    };
    let x = imm.map(u)?;
    let d = imm.differential(u)?;
    let g = imm.chart.metric(&x)?;
    let gam = chart::christoffel(imm.chart.as_ref(), &x, step)?;
    let lphi = domain_left_inverse(&d, &g)?;
    let xi = field(u)?;
    let mut a = Mat::zeros(m, m);
    for i in 0..m {
        let di = chart::partial(field, u, i, step)?;
        let cov = di + gam.contract(&d.column(i).into_owned(), &xi);
        a.set_column(i, &(-(&lphi * cov)));
    }
    Ok(a)
}

fn frame_from(imm: &Immersion, u: &Vector, g_ind: &Mat) -> Result<(Mat, Vec<f64>)> {
    let m = imm.domain_dim;
    match pq_linear::pseudo_orthonormalize(&Mat::identity(m, m), g_ind) {
        Ok(f) => Ok((f.vectors, f.mu)),
        Err(Error::DegenerateSubspace { witness, positive, negative }) => {
            // Report the witness as an ambient tangent vector.
            let d = imm.differential(u)?;
            let w = d * Vector::from_vec(witness);
            Err(Error::DegenerateSubspace { witness: w.iter().copied().collect(), positive, negative })
        }
        Err(e) => Err(e),
    }
}

/// Compute all pointwise submanifold data at the domain point `u`.
pub fn point_data(imm: &Immersion, u: &Vector) -> Result<SubmanifoldPointData> {
    let chart = imm.chart.as_ref();
    let step = chart.step;
    let x = imm.map(u)?;
    imm.check_rank(u)?;
    let differential = imm.differential(u)?;
    let g_ambient = chart.metric(&x)?;
    let basis = AdaptedBasis { j: chart.j_fields(&x)?, eps: chart.eps() };
    let g_ind = differential.transpose() * &g_ambient * &differential;
    let (frame, mu) = frame_from(imm, u, &g_ind)?;
    let frame_inv = linalg::inverse(&frame)?;
    let tangent = &differential * &frame;
    let m = mu.len();
    let dim = x.len();

    let j1e = &basis.j[0] * &tangent;
    let j2e = &basis.j[1] * &tangent;
    let j1_leak = span_leak(&tangent, &j1e);
    let j2_leak = span_leak(&tangent, &j2e);
    let j2_orthogonality = max_abs(&(tangent.transpose() * &g_ambient * &j2e));
    let left = Mat::from_diagonal(&Vector::from_vec(mu.clone())) * tangent.transpose() * &g_ambient;
    let j = &left * &j1e;

    let maximal = 2 * m == dim;
    let (normal, normal_mu, normal_mode) = if maximal && j2_orthogonality <= tolerances::FLAT_EXACT {
        (j2e.clone(), mu.iter().map(|v| -v).collect(), NormalMode::J2)
    } else if m == dim {
        (Mat::zeros(dim, 0), vec![], NormalMode::Complement)
    } else {
        let comp = linalg::null_space(&(tangent.transpose() * &g_ambient));
        let f = pq_linear::pseudo_orthonormalize(&comp, &g_ambient)?;
        (f.vectors, f.mu, NormalMode::Complement)
    };

    let h_dom = second_fundamental_domain(imm, u)?;
    let mut h = Vec::with_capacity(m * m);
    for a in 0..m {
        for b in 0..m {
            let mut v = Vector::zeros(dim);
            for i in 0..m {
                for k in 0..m {
                    let c = frame[(i, a)] * frame[(k, b)];
                    if c != 0.0 {
                        v += &h_dom[i * m + k] * c;
                    }
                }
            }
            h.push(v);
        }
    }

    let shape = if normal_mode == NormalMode::J2 {
        let c = (0..m)
            .map(|a| {
                let mut ca = Mat::zeros(m, m);
                for b in 0..m {
                    ca.set_column(b, &(&left * (&basis.j[1] * &h[a * m + b])));
                }
                ca
            })
            .collect();
        Some(ShapeTensor { c })
    } else {
        None
    };

    let shape_operators = (0..normal.ncols())
        .map(|k| {
            let a = shape_operator_domain(imm, u, &normal.column(k).into_owned())?;
            Ok(&frame_inv * a * &frame)
        })
        .collect::<Result<Vec<_>>>()?;

    let kahler = frame.transpose() * kahler_domain(imm, u)? * &frame;
    let forms = chart::connection_forms_unchecked(chart, &x, step)?;
    let omega: [Vector; 3] = std::array::from_fn(|a| tangent.transpose() * &forms.omega[a]);
    let psi = j.transpose() * &omega[2] - &omega[1];

    Ok(SubmanifoldPointData {
        u: u.clone(),
        x,
        eps: chart.eps,
        step,
        differential,
        g_ambient,
        basis,
        g_ind,
        frame,
        frame_inv,
        tangent,
        mu,
        normal,
        normal_mu,
        normal_mode,
        j,
        h,
        shape,
        shape_operators,
        kahler,
        omega,
        psi,
        j1_leak,
        j2_leak,
        j2_orthogonality,
        omega_fit: forms.residual,
    })
}

/// Nijenhuis tensor of `𝒥` from its coordinate expression, in domain
/// coordinates, indexed `[b·m + c]`.
pub fn nijenhuis(imm: &Immersion, u: &Vector) -> Result<Vec<Vector>> {
    let m = imm.domain_dim;
    let step = imm.chart.step;
    let j = j_domain(imm, u)?;
    let dj: Vec<Mat> = (0..m).map(|k| chart::partial(|p| j_domain(imm, p), u, k, step)).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(m * m);
    for b in 0..m {
        for c in 0..m {
            let mut v = Vector::zeros(m);
            for a in 0..m {
                let mut s = 0.0;
                for d in 0..m {
                    s += j[(d, b)] * dj[d][(a, c)] - j[(d, c)] * dj[d][(a, b)];
                    s -= j[(a, d)] * (dj[b][(d, c)] - dj[c][(d, b)]);
                }
                v[a] = s;
            }
            out.push(v);
        }
    }
    Ok(out)
}

/// `ψ = ω₃∘𝒥 − ω₂` in domain coordinates.
pub fn psi_form(imm: &Immersion, u: &Vector) -> Result<Vector> {
    let j = j_domain(imm, u)?;
    let w = omega_domain(imm, u)?;
    Ok(j.transpose() * &w[2] - &w[1])
}

/// Ambient vector `−J₂{ψ(X)Y + εψ(𝒥X)𝒥Y − ψ(Y)X − εψ(𝒥Y)𝒥X}` for domain
/// coordinate vectors, indexed `[b·m + c]`.
pub fn nijenhuis_from_psi(imm: &Immersion, u: &Vector) -> Result<Vec<Vector>> {
    let m = imm.domain_dim;
    let x = imm.map(u)?;
    let d = imm.differential(u)?;
    let j2 = &imm.chart.j_fields(&x)?[1];
    let j = j_domain(imm, u)?;
    let psi = psi_form(imm, u)?;
    let e = imm.chart.eps.value();
    let mut out = Vec::with_capacity(m * m);
    for b in 0..m {
        for c in 0..m {
            let (xb, yc) = (unit(m, b), unit(m, c));
            let (jx, jy) = (&j * &xb, &j * &yc);
            let v = &yc * psi[b] + &jy * (e * psi.dot(&jx)) - &xb * psi[c] - &jx * (e * psi.dot(&jy));
            out.push(-(j2 * (&d * v)));
        }
    }
    Ok(out)
}

/// `(unit factor, half factor)`: largest ambient deviation between
/// `N(X, Y)` (resp. `½N(X, Y)`) and the ψ-expression.
pub fn nijenhuis_psi_residuals(imm: &Immersion, u: &Vector) -> Result<(f64, f64)> {
    let d = imm.differential(u)?;
    let n = nijenhuis(imm, u)?;
    let p = nijenhuis_from_psi(imm, u)?;
    let mut full = 0.0_f64;
    let mut half = 0.0_f64;
    for (nv, pv) in n.iter().zip(&p) {
        let amb = &d * nv;
        full = full.max((&amb - pv).amax());
        half = half.max((&amb * 0.5 - pv).amax());
    }
    Ok((full, half))
}

fn unit(d: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(d);
    e[i] = 1.0;
    e
}
