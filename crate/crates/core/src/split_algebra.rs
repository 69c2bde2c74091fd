//! Split quaternions and ε-complex numbers.
//!
//! Split quaternions use the basis `(1, I, J, K)` with `−I² = J² = K² = 1`
//! and `IJ = −JI = K`. ε-complex numbers `a + e·b` satisfy `e² = ε`, where
//! the sign is carried as a runtime tag on every value.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// The sign ε ∈ {−1, +1}: complex (−1) or para-complex (+1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Eps {
    Complex,
    ParaComplex,
}

impl Eps {
    pub const ALL: [Eps; 2] = [Eps::Complex, Eps::ParaComplex];

    pub fn value(self) -> f64 {
        match self {
            Eps::Complex => -1.0,
            Eps::ParaComplex => 1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Eps::Complex => -1,
            Eps::ParaComplex => 1,
        }
    }

    pub fn from_sign(sign: i64) -> Result<Self> {
        match sign {
            -1 => Ok(Eps::Complex),
            1 => Ok(Eps::ParaComplex),
            other => Err(Error::InvalidArgument(format!(
                "ε must be -1 or +1, got {other}"
            ))),
        }
    }

    /// Signature triple `(ε₁, ε₂, ε₃)` of an adapted basis whose first
    /// element has square `ε·Id`.
    pub fn triple(self) -> [f64; 3] {
        match self {
            Eps::Complex => [-1.0, 1.0, 1.0],
            Eps::ParaComplex => [1.0, 1.0, -1.0],
        }
    }
}

impl fmt::Display for Eps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.as_i8())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct SplitQuaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl SplitQuaternion {
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn from_slice(s: &[f64]) -> Self {
        Self::new(s[0], s[1], s[2], s[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn conj(self) -> Self {
        Self::new(self.a, -self.b, -self.c, -self.d)
    }

    /// `N(q) = q q̄ = a² + b² − c² − d²`.
    pub fn norm(self) -> f64 {
        self.a * self.a + self.b * self.b - self.c * self.c - self.d * self.d
    }

    pub fn re(self) -> f64 {
        self.a
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn max_abs_diff(self, other: Self) -> f64 {
        let d = self - other;
        d.a.abs().max(d.b.abs()).max(d.c.abs()).max(d.d.abs())
    }
}

/// Product realising `−I² = J² = K² = 1`, `IJ = −JI = K`.
pub fn sq_mul(p: SplitQuaternion, q: SplitQuaternion) -> SplitQuaternion {
    let SplitQuaternion { a, b, c, d } = p;
    let SplitQuaternion {
        a: e,
        b: f,
        c: g,
        d: h,
    } = q;
    SplitQuaternion::new(
        a * e - b * f + c * g + d * h,
        a * f + b * e - c * h + d * g,
        a * g + c * e - b * h + d * f,
        a * h + d * e + b * g - c * f,
    )
}

pub fn sq_norm(q: SplitQuaternion) -> f64 {
    q.norm()
}

impl Mul for SplitQuaternion {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        sq_mul(self, rhs)
    }
}

impl Add for SplitQuaternion {
    type Output = Self;
    fn add(self, r: Self) -> Self {
        Self::new(self.a + r.a, self.b + r.b, self.c + r.c, self.d + r.d)
    }
}

impl Sub for SplitQuaternion {
    type Output = Self;
    fn sub(self, r: Self) -> Self {
        Self::new(self.a - r.a, self.b - r.b, self.c - r.c, self.d - r.d)
    }
}

impl Neg for SplitQuaternion {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

/// `re + e·im` with `e² = ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonComplex {
    pub re: f64,
    pub im: f64,
    pub eps: Eps,
}

impl EpsilonComplex {
    pub fn new(re: f64, im: f64, eps: Eps) -> Self {
        Self { re, im, eps }
    }

    pub fn one(eps: Eps) -> Self {
        Self::new(1.0, 0.0, eps)
    }

    pub fn zero(eps: Eps) -> Self {
        Self::new(0.0, 0.0, eps)
    }

    pub fn unit(eps: Eps) -> Self {
        Self::new(0.0, 1.0, eps)
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im, self.eps)
    }

    /// `|z|² = z z̄ = re² − ε·im²`.
    pub fn norm_sqr(self) -> f64 {
        self.re * self.re - self.eps.value() * self.im * self.im
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.re * s, self.im * s, self.eps)
    }

    fn same_eps(self, other: Self) -> Result<()> {
        if self.eps == other.eps {
            Ok(())
        } else {
            Err(Error::MixedEpsilon {
                left: self.eps.as_i8(),
                right: other.eps.as_i8(),
            })
        }
    }

    pub fn try_add(self, other: Self) -> Result<Self> {
        self.same_eps(other)?;
        Ok(Self::new(self.re + other.re, self.im + other.im, self.eps))
    }

    pub fn try_mul(self, other: Self) -> Result<Self> {
        ec_mul(self, other)
    }

    /// Embedding into the split quaternions: `a + bI` for ε = −1 and
    /// `a + bJ` for ε = +1.
    pub fn to_split_quaternion(self) -> SplitQuaternion {
        match self.eps {
            Eps::Complex => SplitQuaternion::new(self.re, self.im, 0.0, 0.0),
            Eps::ParaComplex => SplitQuaternion::new(self.re, 0.0, self.im, 0.0),
        }
    }
}

/// `(a + eb)(c + ed) = (ac + εbd) + e(ad + bc)`; operands must share ε.
pub fn ec_mul(z: EpsilonComplex, w: EpsilonComplex) -> Result<EpsilonComplex> {
    z.same_eps(w)?;
    let eps = z.eps.value();
    Ok(EpsilonComplex::new(
        z.re * w.re + eps * z.im * w.im,
        z.re * w.im + z.im * w.re,
        z.eps,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sq(rng: &mut ChaCha8Rng) -> SplitQuaternion {
        SplitQuaternion::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        )
    }

    #[test]
    fn basis_relations() {
        use SplitQuaternion as Q;
        assert_eq!(Q::I * Q::J, Q::K);
        assert_eq!(Q::J * Q::I, -Q::K);
        assert_eq!(Q::J * Q::J, Q::ONE);
        assert_eq!(Q::K * Q::K, Q::ONE);
        assert_eq!(Q::I * Q::I, -Q::ONE);
    }

    #[test]
    fn norms_of_units() {
        assert_eq!(sq_norm(SplitQuaternion::J), -1.0);
        assert_eq!(sq_norm(SplitQuaternion::ONE), 1.0);
    }

    #[test]
    fn identity_and_associativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let (p, q, r) = (random_sq(&mut rng), random_sq(&mut rng), random_sq(&mut rng));
            assert_eq!(SplitQuaternion::ONE * q, q);
            assert!(((p * q) * r).max_abs_diff(p * (q * r)) < 1e-12);
        }
    }

    #[test]
    fn norm_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let (p, q) = (random_sq(&mut rng), random_sq(&mut rng));
            assert!(((p * q).norm() - p.norm() * q.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn conjugation_reverses_products_on_integers() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let p = SplitQuaternion::new(
                rng.gen_range(-9..9) as f64,
                rng.gen_range(-9..9) as f64,
                rng.gen_range(-9..9) as f64,
                rng.gen_range(-9..9) as f64,
            );
            let q = SplitQuaternion::new(
                rng.gen_range(-9..9) as f64,
                rng.gen_range(-9..9) as f64,
                rng.gen_range(-9..9) as f64,
                rng.gen_range(-9..9) as f64,
            );
            assert_eq!((p * q).conj(), q.conj() * p.conj());
        }
    }

    #[test]
    fn epsilon_unit_squares() {
        for eps in Eps::ALL {
            let e = EpsilonComplex::unit(eps);
            let sq = ec_mul(e, e).unwrap();
            assert_eq!(sq, EpsilonComplex::new(eps.value(), 0.0, eps));
        }
    }

    #[test]
    fn epsilon_identity() {
        let w = EpsilonComplex::new(0.3, -1.7, Eps::ParaComplex);
        assert_eq!(ec_mul(EpsilonComplex::one(Eps::ParaComplex), w).unwrap(), w);
    }

    #[test]
    fn mixed_epsilon_rejected() {
        let z = EpsilonComplex::unit(Eps::Complex);
        let w = EpsilonComplex::unit(Eps::ParaComplex);
        assert!(matches!(ec_mul(z, w), Err(Error::MixedEpsilon { .. })));
        assert!(z.try_add(w).is_err());
    }

    #[test]
    fn epsilon_embeddings_are_homomorphisms() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for eps in Eps::ALL {
            for _ in 0..100 {
                let z = EpsilonComplex::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), eps);
                let w = EpsilonComplex::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), eps);
                let prod = ec_mul(z, w).unwrap().to_split_quaternion();
                let img = z.to_split_quaternion() * w.to_split_quaternion();
                assert!(prod.max_abs_diff(img) < 1e-12);
                assert!((z.norm_sqr() - z.to_split_quaternion().norm()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn epsilon_norm_multiplicative_and_conj_involutive() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for eps in Eps::ALL {
            for _ in 0..500 {
                let z = EpsilonComplex::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), eps);
                let w = EpsilonComplex::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), eps);
                let zw = ec_mul(z, w).unwrap();
                assert!((zw.norm_sqr() - z.norm_sqr() * w.norm_sqr()).abs() < 1e-12);
                assert_eq!(z.conj().conj(), z);
            }
        }
    }
}
