//! Para-quaternionic Hermitian linear algebra on a single tangent space.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, max_abs};
use crate::split_algebra::{Eps, SplitQuaternion};
use crate::tolerances;
use crate::{Mat, Vector};

/// `ℝ^dim` with a symmetric nondegenerate bilinear form.
#[derive(Clone, Debug)]
pub struct PseudoEuclideanSpace {
    pub g: Mat,
}

impl PseudoEuclideanSpace {
    pub fn new(g: Mat) -> Result<Self> {
        if g.nrows() != g.ncols() || g.nrows() == 0 {
            return Err(Error::InvalidArgument("metric must be square".into()));
        }
        if max_abs(&(&g - g.transpose())) > tolerances::ALGEBRAIC {
            return Err(Error::InvalidArgument("metric is not symmetric".into()));
        }
        let det = g.determinant();
        if det.abs() < tolerances::RANK {
            return Err(Error::SingularMetric { point: vec![], det });
        }
        Ok(Self { g })
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// `(positive, negative)` eigenvalue counts.
    pub fn signature(&self) -> (usize, usize) {
        linalg::signature(&self.g)
    }
}

/// Residuals of the defining relations of an adapted basis.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BasisResiduals {
    pub squares: f64,
    pub anticommutation: f64,
    pub products: f64,
    pub skew: f64,
}

impl BasisResiduals {
    pub fn max(&self) -> f64 {
        self.squares
            .max(self.anticommutation)
            .max(self.products)
            .max(self.skew)
    }
}

/// Standard basis `(J₁, J₂, J₃)` of a para-quaternionic structure.
#[derive(Clone, Debug)]
pub struct AdaptedBasis {
    pub j: [Mat; 3],
    pub eps: [f64; 3],
}

impl AdaptedBasis {
    pub fn dim(&self) -> usize {
        self.j[0].nrows()
    }

    /// ε of the first element, `J₁² = ε Id`.
    pub fn epsilon(&self) -> Eps {
        if self.eps[0] < 0.0 {
            Eps::Complex
        } else {
            Eps::ParaComplex
        }
    }

    pub fn residuals(&self, g: &Mat) -> BasisResiduals {
        let id = Mat::identity(self.dim(), self.dim());
        let mut r = BasisResiduals::default();
        for a in 0..3 {
            r.squares = r.squares.max(max_abs(&(&self.j[a] * &self.j[a] - &id * self.eps[a])));
            r.skew = r.skew.max(linalg::skew_residual(g, &self.j[a]));
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            r.anticommutation = r
                .anticommutation
                .max(max_abs(&linalg::anticommutator(&self.j[a], &self.j[b])));
            // J_a J_b = ε₃ ε_c J_c for cyclic (a, b, c).
            let rhs = &self.j[c] * (self.eps[2] * self.eps[c]);
            r.products = r.products.max(max_abs(&(&self.j[a] * &self.j[b] - rhs)));
        }
        r
    }

    pub fn validate(&self, g: &Mat) -> Result<()> {
        let worst = self.residuals(g).max();
        if worst > tolerances::ALGEBRAIC {
            return Err(Error::InvalidBasis(worst));
        }
        Ok(())
    }

    /// `aJ₁ + bJ₂ + cJ₃`.
    pub fn combine(&self, l: &QElement) -> Mat {
        &self.j[0] * l.a + &self.j[1] * l.b + &self.j[2] * l.c
    }

    /// Coordinates of `L ∈ Q` by trace pairing; the basis is trace-orthogonal.
    pub fn coordinates(&self, l: &Mat) -> QElement {
        let c: Vec<f64> = (0..3)
            .map(|a| (l * &self.j[a]).trace() / (&self.j[a] * &self.j[a]).trace())
            .collect();
        QElement::new(c[0], c[1], c[2])
    }
}

/// Matrix of `x ↦ x·u` on the coordinates `(a, b, c, d)` of one slot.
pub fn right_multiplication(u: SplitQuaternion) -> Mat {
    let mut m = Mat::zeros(4, 4);
    for k in 0..4 {
        let mut e = [0.0; 4];
        e[k] = 1.0;
        let image = (SplitQuaternion::from_slice(&e) * u).to_array();
        for (row, v) in image.iter().enumerate() {
            m[(row, k)] = *v;
        }
    }
    m
}

/// Block-diagonal copy of a 4×4 slot operator on `ℍ̃ⁿ`.
pub fn block_diagonal(block: &Mat, n: usize) -> Mat {
    let s = block.nrows();
    let mut m = Mat::zeros(s * n, s * n);
    for i in 0..n {
        m.view_mut((s * i, s * i), (s, s)).copy_from(block);
    }
    m
}

/// Neutral metric `diag(1, 1, −1, −1)` per slot.
pub fn flat_metric(n: usize) -> Mat {
    let slot = Mat::from_diagonal(&Vector::from_vec(vec![1.0, 1.0, -1.0, -1.0]));
    block_diagonal(&slot, n)
}

/// Flat model `ℍ̃ⁿ` with its standard adapted basis of right multiplications.
pub fn make_standard_basis(n: usize, eps: Eps) -> Result<(PseudoEuclideanSpace, AdaptedBasis)> {
    if n < 1 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let r = |u| block_diagonal(&right_multiplication(u), n);
    let (j1, j2) = match eps {
        Eps::Complex => (r(SplitQuaternion::I), r(SplitQuaternion::J)),
        Eps::ParaComplex => (r(SplitQuaternion::J), r(SplitQuaternion::K)),
    };
    let j3 = &j1 * &j2;
    let space = PseudoEuclideanSpace::new(flat_metric(n))?;
    Ok((
        space,
        AdaptedBasis {
            j: [j1, j2, j3],
            eps: eps.triple(),
        },
    ))
}

/// Coordinate frame of the first `k` ε-complex lines in `ℍ̃ⁿ` (`ℂᵏ` or `ℂ̃ᵏ`).
pub fn epsilon_complex_slice(n: usize, k: usize, eps: Eps) -> Mat {
    let second = match eps {
        Eps::Complex => 1,
        Eps::ParaComplex => 2,
    };
    let mut w = Mat::zeros(4 * n, 2 * k);
    for i in 0..k {
        w[(4 * i, 2 * i)] = 1.0;
        w[(4 * i + second, 2 * i + 1)] = 1.0;
    }
    w
}

/// Coordinate frame of the first `k` split-quaternionic lines (`ℍ̃ᵏ`).
pub fn pq_slice(n: usize, k: usize) -> Mat {
    let mut w = Mat::zeros(4 * n, 4 * k);
    for i in 0..4 * k {
        w[(i, i)] = 1.0;
    }
    w
}

/// `L = aJ₁ + bJ₂ + cJ₃` in a fixed adapted basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QElement {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QElement {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }
}

/// `‖L‖²` defined by `L² = −‖L‖² Id`.
pub fn q_norm(l: &QElement, eps: Eps) -> f64 {
    let t = eps.triple();
    -(t[0] * l.a * l.a + t[1] * l.b * l.b + t[2] * l.c * l.c)
}

/// Frame change acting on `(J₁, J₂, J₃)`: row `α` holds the coefficients of
/// `J'_α`. `J₁` is fixed; `(J₂, J₃)` rotate (ε = −1) or boost (ε = +1).
pub fn so21_rotation(eps: Eps, theta: f64) -> [[f64; 3]; 3] {
    match eps {
        Eps::Complex => {
            let (s, c) = theta.sin_cos();
            [[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]]
        }
        Eps::ParaComplex => {
            let (s, c) = (theta.sinh(), theta.cosh());
            [[1.0, 0.0, 0.0], [0.0, c, s], [0.0, s, c]]
        }
    }
}

pub fn rotate_basis(basis: &AdaptedBasis, theta: f64) -> AdaptedBasis {
    let m = so21_rotation(basis.epsilon(), theta);
    let j = std::array::from_fn(|a| {
        &basis.j[0] * m[a][0] + &basis.j[1] * m[a][1] + &basis.j[2] * m[a][2]
    });
    AdaptedBasis { j, eps: basis.eps }
}

/// `T̄` (largest Q-invariant subspace) and a pure complement `D`.
#[derive(Clone, Debug)]
pub struct InvariantSplit {
    pub tbar: Mat,
    pub d: Mat,
    /// Whether `T̄` is nondegenerate, in which case `D` is its g-orthogonal
    /// complement in `W`.
    pub orthogonal: bool,
}

pub fn invariant_subspace(w: &Mat, basis: &AdaptedBasis, g: &Mat) -> Result<InvariantSplit> {
    let w = linalg::column_span(w);
    let gram = w.transpose() * g * &w;
    let (pos, neg) = linalg::signature(&gram);
    if pos + neg < w.ncols() {
        let kernel = linalg::null_space(&gram);
        let witness = &w * kernel.column(0);
        return Err(Error::degenerate(&witness, pos, neg));
    }
    let mut tbar = w.clone();
    for j in &basis.j {
        tbar = linalg::intersect(&tbar, &(j * &w));
    }
    let dim = tbar.ncols();
    let tgram = tbar.transpose() * g * &tbar;
    let orthogonal = dim == 0 || linalg::rank(&tgram) == dim;
    let d = if dim == 0 {
        w.clone()
    } else if orthogonal {
        let coeffs = linalg::null_space(&(tbar.transpose() * g * &w));
        &w * coeffs
    } else {
        // Euclidean complement inside W; one valid choice among many.
        let coeffs = linalg::null_space(&(tbar.transpose() * &w));
        &w * coeffs
    };
    Ok(InvariantSplit { tbar, d, orthogonal })
}

/// Frame with `g(Eᵢ, Eⱼ) = μᵢ δᵢⱼ`.
#[derive(Clone, Debug)]
pub struct OrthoFrame {
    pub vectors: Mat,
    pub mu: Vec<f64>,
}

impl OrthoFrame {
    pub fn signature(&self) -> (usize, usize) {
        let p = self.mu.iter().filter(|m| **m > 0.0).count();
        (p, self.mu.len() - p)
    }
}

/// Gram–Schmidt for indefinite forms. Pivots on the largest `|g(v, v)|`;
/// when all remaining vectors are null, a pair `v ± w` with `g(v, w) ≠ 0` is
/// used instead. A remaining null block is reported with a witness.
pub fn pseudo_orthonormalize(w: &Mat, g: &Mat) -> Result<OrthoFrame> {
    let scale = max_abs(g).max(f64::MIN_POSITIVE);
    let mut rest: Vec<Vector> = (0..w.ncols()).map(|i| w.column(i).into_owned()).collect();
    let mut out: Vec<Vector> = Vec::new();
    let mut mu = Vec::new();
    let ip = |x: &Vector, y: &Vector| linalg::inner(g, x, y);
    let cut = |x: &Vector, y: &Vector| tolerances::PIVOT * scale * x.norm() * y.norm();

    while !rest.is_empty() {
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in rest.iter().enumerate() {
            let q = ip(v, v).abs();
            if q > cut(v, v) && best.map_or(true, |(_, b)| q > b) {
                best = Some((i, q));
            }
        }
        let pivot = match best {
            Some((i, _)) => rest.remove(i),
            None => {
                let mut pair: Option<(usize, usize, f64)> = None;
                for i in 0..rest.len() {
                    for j in i + 1..rest.len() {
                        let q = ip(&rest[i], &rest[j]);
                        if q.abs() > cut(&rest[i], &rest[j])
                            && pair.map_or(true, |(_, _, b)| q.abs() > b.abs())
                        {
                            pair = Some((i, j, q));
                        }
                    }
                }
                match pair {
                    Some((i, j, q)) => {
                        let v = &rest[i] + &rest[j] * q.signum();
                        rest[i] = &rest[i] - &rest[j] * q.signum();
                        v
                    }
                    None => {
                        let witness = rest
                            .iter()
                            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                            .cloned()
                            .unwrap_or_else(|| Vector::zeros(w.nrows()));
                        let (p, n) = OrthoFrame { vectors: Mat::zeros(0, 0), mu: mu.clone() }
                            .signature();
                        return Err(Error::degenerate(&witness, p, n));
                    }
                }
            }
        };
        let q = ip(&pivot, &pivot);
        let e = pivot / q.abs().sqrt();
        let m = q.signum();
        for v in rest.iter_mut() {
            let c = ip(&e, v) * m;
            *v -= &e * c;
        }
        // Drop directions that became numerically zero (rank-deficient input).
        let norm0 = e.norm();
        rest.retain(|v| v.norm() > tolerances::RANK * norm0.max(1.0));
        out.push(e);
        mu.push(m);
    }
    let mut vectors = Mat::zeros(w.nrows(), out.len());
    for (i, e) in out.iter().enumerate() {
        vectors.set_column(i, e);
    }
    Ok(OrthoFrame { vectors, mu })
}

/// Family `X ↦ C_X` of endomorphisms of an `m`-dimensional space, stored as
/// `c[i] = C_{eᵢ}` in a fixed basis.
#[derive(Clone, Debug)]
pub struct ShapeTensor {
    pub c: Vec<Mat>,
}

impl ShapeTensor {
    pub fn zero(m: usize) -> Self {
        Self { c: vec![Mat::zeros(m, m); m] }
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// `C_X` for a coordinate vector `X`.
    pub fn at(&self, x: &Vector) -> Mat {
        let m = self.dim();
        let mut out = Mat::zeros(m, m);
        for (i, ci) in self.c.iter().enumerate() {
            out += ci * x[i];
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { c: self.c.iter().map(|m| m * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(max_abs).fold(0.0, f64::max)
    }
}

/// Dense 3-index array over `m` dimensions with complex entries.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicForm {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl CubicForm {
    pub fn zero(dim: usize) -> Self {
        Self { dim, re: vec![0.0; dim * dim * dim], im: vec![0.0; dim * dim * dim] }
    }

    fn idx(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.dim + b) * self.dim + c
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> Complex64 {
        let i = self.idx(a, b, c);
        Complex64::new(self.re[i], self.im[i])
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, v: Complex64) {
        let i = self.idx(a, b, c);
        self.re[i] = v.re;
        self.im[i] = v.im;
    }

    pub fn max_abs(&self) -> f64 {
        self.re.iter().chain(&self.im).fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest deviation from total symmetry.
    pub fn symmetry_residual(&self) -> f64 {
        let m = self.dim;
        let mut worst = 0.0_f64;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let v = self.get(a, b, c);
                    for w in [self.get(b, a, c), self.get(a, c, b), self.get(c, b, a)] {
                        worst = worst.max((v - w).norm());
                    }
                }
            }
        }
        worst
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for i in 0..self.re.len() {
            let v = Complex64::new(self.re[i], self.im[i]) * s;
            out.re[i] = v.re;
            out.im[i] = v.im;
        }
        out
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.re
            .iter()
            .zip(&other.re)
            .chain(self.im.iter().zip(&other.im))
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl std::ops::Add for &CubicForm {
    type Output = CubicForm;
    fn add(self, other: &CubicForm) -> CubicForm {
        let mut out = self.clone();
        for i in 0..out.re.len() {
            out.re[i] += other.re[i];
            out.im[i] += other.im[i];
        }
        out
    }
}

/// Residuals for membership in the first prolongation `S_𝒥^(1)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ProlongationResiduals {
    pub symmetric: f64,
    pub anticommutation: f64,
    pub prolongation: f64,
    pub cubic_symmetry: f64,
    pub cubic_symmetry_j: f64,
}

impl ProlongationResiduals {
    pub fn max(&self) -> f64 {
        self.symmetric
            .max(self.anticommutation)
            .max(self.prolongation)
            .max(self.cubic_symmetry)
            .max(self.cubic_symmetry_j)
    }
}

/// `(q⁺, q⁻)` for ε = +1, `(q, q̄)` for ε = −1.
#[derive(Clone, Debug)]
pub struct CubicPair {
    pub plus: CubicForm,
    pub minus: CubicForm,
    /// Largest component on the mixed cubes.
    pub mixed: f64,
}

/// A nondegenerate space `(T, g, 𝒥)` with `𝒥² = ε Id` g-skew; hosts the
/// first prolongation `S_𝒥^(1)`.
#[derive(Clone, Debug)]
pub struct ProlongationSpace {
    pub g: Mat,
    pub j: Mat,
    pub eps: Eps,
}

impl ProlongationSpace {
    pub fn new(g: Mat, j: Mat, eps: Eps) -> Result<Self> {
        let id = Mat::identity(g.nrows(), g.nrows());
        let worst = max_abs(&(&j * &j - id * eps.value())).max(linalg::skew_residual(&g, &j));
        if worst > tolerances::ALGEBRAIC {
            return Err(Error::InvalidArgument(format!(
                "J is not an ε-complex g-skew structure (residual {worst:e})"
            )));
        }
        Ok(Self { g, j, eps })
    }

    /// Tangent space of the standard maximal ε-complex slice of `ℍ̃ⁿ`.
    pub fn standard(n: usize, eps: Eps) -> Result<Self> {
        let (space, basis) = make_standard_basis(n, eps)?;
        let w = epsilon_complex_slice(n, n, eps);
        let g = w.transpose() * &space.g * &w;
        let j = w.transpose() * &basis.j[0] * &w;
        Self::new(g, j, eps)
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// Covariant cubic `T(X, Y, Z) = g(C_X Y, Z)`.
    pub fn lower(&self, c: &ShapeTensor) -> CubicForm {
        let m = self.dim();
        let mut t = CubicForm::zero(m);
        for a in 0..m {
            let gc = &self.g * &c.c[a];
            for b in 0..m {
                for d in 0..m {
                    t.set(a, b, d, Complex64::new(gc[(d, b)], 0.0));
                }
            }
        }
        t
    }

    /// Inverse of [`lower`](Self::lower) on real cubics.
    pub fn raise(&self, t: &CubicForm) -> Result<ShapeTensor> {
        let m = self.dim();
        let ginv = linalg::inverse(&self.g)?;
        let c = (0..m)
            .map(|a| {
                let lowered = Mat::from_fn(m, m, |d, b| t.get(a, b, d).re);
                &ginv * lowered
            })
            .collect();
        Ok(ShapeTensor { c })
    }

    pub fn residuals(&self, c: &ShapeTensor) -> ProlongationResiduals {
        let m = self.dim();
        let mut r = ProlongationResiduals::default();
        for a in 0..m {
            r.symmetric = r.symmetric.max(linalg::symmetric_residual(&self.g, &c.c[a]));
            r.anticommutation = r
                .anticommutation
                .max(max_abs(&linalg::anticommutator(&c.c[a], &self.j)));
            for b in 0..m {
                let d = c.c[a].column(b) - c.c[b].column(a);
                r.prolongation = r.prolongation.max(linalg::max_abs_vec(&d.into_owned()));
            }
        }
        r.cubic_symmetry = self.lower(c).symmetry_residual();
        r.cubic_symmetry_j = self.lower(&self.compose_j(c)).symmetry_residual();
        r
    }

    /// `X ↦ 𝒥 ∘ C_X`.
    pub fn compose_j(&self, c: &ShapeTensor) -> ShapeTensor {
        ShapeTensor { c: c.c.iter().map(|ci| &self.j * ci).collect() }
    }

    /// Basis of `S_𝒥^(1)`, found as the kernel of the anticommutation
    /// constraint on totally symmetric cubics.
    pub fn prolongation_basis(&self) -> Result<Vec<ShapeTensor>> {
        let m = self.dim();
        let mut params = Vec::new();
        for a in 0..m {
            for b in a..m {
                for c in b..m {
                    params.push((a, b, c));
                }
            }
        }
        let unit = |k: usize| -> Result<ShapeTensor> {
            let (a, b, c) = params[k];
            let mut t = CubicForm::zero(m);
            for (x, y, z) in [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
                t.set(x, y, z, Complex64::new(1.0, 0.0));
            }
            self.raise(&t)
        };
        let units: Vec<ShapeTensor> = (0..params.len()).map(unit).collect::<Result<_>>()?;
        let mut constraint = Mat::zeros(m * m * m, params.len());
        for (k, u) in units.iter().enumerate() {
            for a in 0..m {
                let ac = linalg::anticommutator(&u.c[a], &self.j);
                for (i, v) in ac.iter().enumerate() {
                    constraint[(a * m * m + i, k)] = *v;
                }
            }
        }
        let kernel = linalg::null_space(&constraint);
        Ok((0..kernel.ncols())
            .map(|col| {
                let mut acc = ShapeTensor::zero(m);
                for (k, u) in units.iter().enumerate() {
                    let w = kernel[(k, col)];
                    for a in 0..m {
                        acc.c[a] += &u.c[a] * w;
                    }
                }
                acc
            })
            .collect())
    }

    /// Random element of `S_𝒥^(1)` with coefficients in `[-1, 1]`.
    pub fn random_prolongation(&self, rng: &mut ChaCha8Rng) -> Result<ShapeTensor> {
        let basis = self.prolongation_basis()?;
        Ok(self.combine(&basis, rng))
    }

    pub fn combine(&self, basis: &[ShapeTensor], rng: &mut ChaCha8Rng) -> ShapeTensor {
        let m = self.dim();
        let mut acc = ShapeTensor::zero(m);
        for b in basis {
            let w: f64 = rng.gen_range(-1.0..1.0);
            for a in 0..m {
                acc.c[a] += &b.c[a] * w;
            }
        }
        acc
    }

    /// Eigenprojectors of `𝒥` as complex matrices (row-major).
    fn projectors(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let m = self.dim();
        let half = Complex64::new(0.5, 0.0);
        let scalar = match self.eps {
            // P^{1,0} = (Id − i𝒥)/2 and its conjugate.
            Eps::Complex => Complex64::new(0.0, -0.5),
            // P^± = (Id ± 𝒥)/2.
            Eps::ParaComplex => Complex64::new(0.5, 0.0),
        };
        let mut p = vec![Complex64::new(0.0, 0.0); m * m];
        let mut q = p.clone();
        for i in 0..m {
            for k in 0..m {
                let id = if i == k { half } else { Complex64::new(0.0, 0.0) };
                let jv = self.j[(i, k)];
                p[i * m + k] = id + scalar * jv;
                q[i * m + k] = id - scalar * jv;
            }
        }
        (p, q)
    }

    /// Split `gC` into its two pure cubes.
    pub fn decompose(&self, c: &ShapeTensor) -> Result<CubicPair> {
        self.decompose_within(c, tolerances::ALGEBRAIC_LOOSE)
    }

    /// [`decompose`](Self::decompose) accepting membership residuals up to
    /// `tol·max(1, |C|)`, for tensors obtained by finite differences.
    pub fn decompose_within(&self, c: &ShapeTensor, tol: f64) -> Result<CubicPair> {
        let res = self.residuals(c);
        if res.max() > tol * c.max_abs().max(1.0) {
            return Err(Error::NotInProlongation(res.max()));
        }
        let t = self.lower(c);
        let (p, q) = self.projectors();
        let m = self.dim();
        let plus = project_mixed(&t, &p, &p, &p, m);
        let minus = project_mixed(&t, &q, &q, &q, m);
        // Mixed parts: insert each projector pattern other than PPP and QQQ.
        let mut mixed = 0.0_f64;
        for pattern in 1..7u8 {
            let pick = |bit: u8| if pattern & bit != 0 { &q } else { &p };
            let part = project_mixed(&t, pick(1), pick(2), pick(4), m);
            mixed = mixed.max(part.max_abs());
        }
        Ok(CubicPair { plus, minus, mixed })
    }

    /// Shape tensor after rotating the adapted basis by `θ`.
    pub fn rotate(&self, c: &ShapeTensor, theta: f64) -> ShapeTensor {
        let (s, co) = match self.eps {
            Eps::Complex => theta.sin_cos(),
            Eps::ParaComplex => (theta.sinh(), theta.cosh()),
        };
        let jc = self.compose_j(c);
        ShapeTensor {
            c: c.c.iter().zip(&jc.c).map(|(a, b)| a * co + b * s).collect(),
        }
    }

    /// Predicted factors `(plus, minus)` by which the two cubes change under
    /// [`rotate`](Self::rotate).
    pub fn rotation_factors(&self, theta: f64) -> (Complex64, Complex64) {
        match self.eps {
            Eps::Complex => (
                Complex64::new(theta.cos(), -theta.sin()),
                Complex64::new(theta.cos(), theta.sin()),
            ),
            Eps::ParaComplex => (
                Complex64::new(theta.cosh() - theta.sinh(), 0.0),
                Complex64::new(theta.cosh() + theta.sinh(), 0.0),
            ),
        }
    }

    /// Worst deviation of the rotated cubes from the predicted factors.
    pub fn transform_residual(&self, c: &ShapeTensor, theta: f64) -> Result<f64> {
        let before = self.decompose(c)?;
        let after = self.decompose(&self.rotate(c, theta))?;
        let (fp, fm) = self.rotation_factors(theta);
        Ok(after
            .plus
            .max_diff(&before.plus.scale(fp))
            .max(after.minus.max_diff(&before.minus.scale(fm))))
    }

    /// A real-valued element of `S_𝒥^(1)` whose `minus` cube vanishes
    /// (ε = +1 only): project a given element onto its `plus` cube.
    pub fn plus_only(&self, c: &ShapeTensor) -> Result<ShapeTensor> {
        if self.eps != Eps::ParaComplex {
            return Err(Error::InvalidArgument("plus_only needs ε = +1".into()));
        }
        let pair = self.decompose(c)?;
        self.raise(&pair.plus)
    }
}

/// `T(P₀x, P₁y, P₂z)` for complex matrices stored row-major.
fn project_mixed(t: &CubicForm, p0: &[Complex64], p1: &[Complex64], p2: &[Complex64], m: usize) -> CubicForm {
    let mut out = CubicForm::zero(m);
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                let mut s = Complex64::new(0.0, 0.0);
                for x in 0..m {
                    let pa = p0[x * m + a];
                    if pa == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for y in 0..m {
                        let pb = p1[y * m + b];
                        for z in 0..m {
                            s += t.get(x, y, z) * pa * pb * p2[z * m + c];
                        }
                    }
                }
                out.set(a, b, c, s);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    #[test]
    fn standard_basis_relations() {
        for eps in Eps::ALL {
            for n in 1..=3 {
                let (space, basis) = make_standard_basis(n, eps).unwrap();
                assert!(basis.residuals(&space.g).max() < 1e-14);
                assert_eq!(space.signature(), (2 * n, 2 * n));
            }
        }
        assert!(make_standard_basis(0, Eps::Complex).is_err());
    }

    #[test]
    fn j2_j3_is_minus_j1() {
        let (_, b) = make_standard_basis(2, Eps::ParaComplex).unwrap();
        assert!(max_abs(&(&b.j[1] * &b.j[2] + &b.j[0])) < 1e-14);
        assert!(max_abs(&(&b.j[0] * &b.j[1] - &b.j[2])) < 1e-14);
    }

    #[test]
    fn q_norm_values() {
        assert_eq!(q_norm(&QElement::new(1.0, 0.0, 0.0), Eps::Complex), 1.0);
        assert_eq!(q_norm(&QElement::new(0.0, 1.0, 0.0), Eps::Complex), -1.0);
        assert_eq!(q_norm(&QElement::new(0.0, 0.0, 1.0), Eps::ParaComplex), 1.0);
    }

    #[test]
    fn rotation_quarter_turn() {
        let (_, b) = make_standard_basis(1, Eps::Complex).unwrap();
        let r = rotate_basis(&b, std::f64::consts::FRAC_PI_2);
        assert!(max_abs(&(&r.j[1] - &b.j[2])) < 1e-12);
        assert!(max_abs(&(&r.j[2] + &b.j[1])) < 1e-12);
        let r0 = rotate_basis(&b, 0.0);
        for a in 0..3 {
            assert_eq!(r0.j[a], b.j[a]);
        }
    }

    #[test]
    fn invariant_subspace_examples() {
        let (space, b) = make_standard_basis(2, Eps::Complex).unwrap();
        let full = Mat::identity(8, 8);
        let s = invariant_subspace(&full, &b, &space.g).unwrap();
        assert_eq!((s.tbar.ncols(), s.d.ncols()), (8, 0));

        let slice = epsilon_complex_slice(2, 2, Eps::Complex);
        let s = invariant_subspace(&slice, &b, &space.g).unwrap();
        assert_eq!((s.tbar.ncols(), s.d.ncols()), (0, 4));

        // ℍ̃¹ in the first slot plus a complex line in the second.
        let mut w = Mat::zeros(8, 6);
        for i in 0..4 {
            w[(i, i)] = 1.0;
        }
        w[(4, 4)] = 1.0;
        w[(5, 5)] = 1.0;
        let s = invariant_subspace(&w, &b, &space.g).unwrap();
        assert_eq!((s.tbar.ncols(), s.d.ncols()), (4, 2));
        assert!(s.orthogonal);
    }

    #[test]
    fn degenerate_span_reports_witness() {
        let g = flat_metric(1);
        let w = Mat::from_column_slice(4, 2, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        match pseudo_orthonormalize(&w, &g) {
            Err(Error::DegenerateSubspace { witness, positive, negative }) => {
                assert_eq!((positive, negative), (1, 0));
                assert!((witness[0] - witness[2]).abs() < 1e-12 && witness[0].abs() > 0.5);
            }
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }

    #[test]
    fn hyperbolic_pair_rescue() {
        let g = flat_metric(1);
        // Two null vectors spanning a hyperbolic plane.
        let w = Mat::from_column_slice(4, 2, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0, -1.0, 0.0]);
        let f = pseudo_orthonormalize(&w, &g).unwrap();
        assert_eq!(f.signature(), (1, 1));
        let gram = f.vectors.transpose() * &g * &f.vectors;
        assert!(max_abs(&(gram - Mat::from_diagonal(&Vector::from_vec(f.mu.clone())))) < 1e-12);
    }

    #[test]
    fn prolongation_dimensions() {
        for eps in Eps::ALL {
            assert_eq!(ProlongationSpace::standard(1, eps).unwrap().prolongation_basis().unwrap().len(), 2);
            assert_eq!(ProlongationSpace::standard(2, eps).unwrap().prolongation_basis().unwrap().len(), 8);
        }
    }

    #[test]
    fn plus_only_has_no_minus_part() {
        let sp = ProlongationSpace::standard(2, Eps::ParaComplex).unwrap();
        let mut rng = sampling::rng(3);
        let c = sp.random_prolongation(&mut rng).unwrap();
        let cp = sp.plus_only(&c).unwrap();
        assert!(sp.residuals(&cp).max() < 1e-12);
        let pair = sp.decompose(&cp).unwrap();
        assert!(pair.minus.max_abs() < 1e-12);
        assert!(pair.plus.max_abs() > 1e-3);
    }

    #[test]
    fn zero_decomposes_to_zero() {
        let sp = ProlongationSpace::standard(1, Eps::Complex).unwrap();
        let pair = sp.decompose(&ShapeTensor::zero(2)).unwrap();
        assert_eq!(pair.plus.max_abs(), 0.0);
        assert_eq!(pair.minus.max_abs(), 0.0);
    }

    #[test]
    fn anticommutation_failure_rejected() {
        let sp = ProlongationSpace::standard(1, Eps::Complex).unwrap();
        let bad = ShapeTensor { c: vec![Mat::identity(2, 2), Mat::zeros(2, 2)] };
        assert!(matches!(sp.decompose(&bad), Err(Error::NotInProlongation(_))));
    }
}
