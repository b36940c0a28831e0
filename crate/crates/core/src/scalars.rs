//! Real, complex and quaternionic scalars.
//!
//! Every scalar is stored as a [`Quaternion`]; complex numbers are the
//! quaternions with vanishing `j` and `k` parts. A [`FieldTag`] records which
//! field a vector or matrix is supposed to live over.
//!
//! Division is deliberately not overloaded. Write `a.inv()? * b` or
//! `b * a.inv()?` so the side is visible at the call site.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::de::{self, Deserializer};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldTag {
    Real,
    Complex,
    Quaternion,
}

impl FieldTag {
    /// Smallest field containing both.
    pub fn join(self, other: FieldTag) -> FieldTag {
        self.max(other)
    }

    /// Whether `q` lies in this field up to `tol` (absolute, per component).
    pub fn contains(self, q: Quaternion, tol: f64) -> bool {
        match self {
            FieldTag::Real => q.i.abs() <= tol && q.j.abs() <= tol && q.k.abs() <= tol,
            FieldTag::Complex => q.j.abs() <= tol && q.k.abs() <= tol,
            FieldTag::Quaternion => true,
        }
    }

    /// Smallest field containing `q` (exact test).
    pub fn of(q: Quaternion) -> FieldTag {
        if q.j != 0.0 || q.k != 0.0 {
            FieldTag::Quaternion
        } else if q.i != 0.0 {
            FieldTag::Complex
        } else {
            FieldTag::Real
        }
    }
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FieldTag::Real => "real",
            FieldTag::Complex => "complex",
            FieldTag::Quaternion => "quaternion",
        };
        f.write_str(s)
    }
}

/// `re + i*i + j*j + k*k` with the Hamilton product.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Quaternion {
    pub re: f64,
    pub i: f64,
    pub j: f64,
    pub k: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(re: f64, i: f64, j: f64, k: f64) -> Self {
        Quaternion { re, i, j, k }
    }

    pub const fn real(x: f64) -> Self {
        Quaternion::new(x, 0.0, 0.0, 0.0)
    }

    pub const fn complex(re: f64, im: f64) -> Self {
        Quaternion::new(re, im, 0.0, 0.0)
    }

    pub const fn pure(i: f64, j: f64, k: f64) -> Self {
        Quaternion::new(0.0, i, j, k)
    }

    /// `cos(angle) + sin(angle) * axis` for a unit pure `axis` given as a 3-vector.
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Quaternion::new(c, s * axis[0], s * axis[1], s * axis[2])
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.re, self.i, self.j, self.k]
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.re, -self.i, -self.j, -self.k)
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.i * self.i + self.j * self.j + self.k * self.k
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Two-sided inverse `conj(q) / |q|^2`.
    pub fn inv(self) -> Result<Self> {
        let n = self.norm_sqr();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.conj() * (1.0 / n))
    }

    /// `q / |q|`.
    pub fn normalize(self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::DivisionByZero);
        }
        Ok(self * (1.0 / n))
    }

    /// Real part as a quaternion.
    pub fn re_part(self) -> Self {
        Quaternion::real(self.re)
    }

    /// `(q - conj q) / 2`.
    pub fn im_part(self) -> Self {
        Quaternion::pure(self.i, self.j, self.k)
    }

    pub fn im_vec(self) -> [f64; 3] {
        [self.i, self.j, self.k]
    }

    pub fn im_norm(self) -> f64 {
        (self.i * self.i + self.j * self.j + self.k * self.k).sqrt()
    }

    /// Euclidean inner product on `R^4`, equal to `Re(p conj q)`.
    pub fn dot(self, other: Self) -> f64 {
        self.re * other.re + self.i * other.i + self.j * other.j + self.k * other.k
    }

    pub fn max_abs(self) -> f64 {
        self.re.abs().max(self.i.abs()).max(self.j.abs()).max(self.k.abs())
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.i.is_finite() && self.j.is_finite() && self.k.is_finite()
    }

    pub fn abs_diff_eq(self, other: Self, tol: f64) -> bool {
        (self - other).max_abs() <= tol
    }

    pub fn exp(self) -> Self {
        let v = self.im_norm();
        let e = self.re.exp();
        if v == 0.0 {
            return Quaternion::real(e);
        }
        let s = e * v.sin() / v;
        Quaternion::new(e * v.cos(), s * self.i, s * self.j, s * self.k)
    }

    /// Principal logarithm. The imaginary part has length in `[0, pi]`; for
    /// negative reals the axis is taken to be `i`.
    pub fn ln(self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::DivisionByZero);
        }
        let v = self.im_norm();
        let angle = v.atan2(self.re);
        if v == 0.0 {
            let i = if self.re < 0.0 { std::f64::consts::PI } else { 0.0 };
            return Ok(Quaternion::new(n.ln(), i, 0.0, 0.0));
        }
        let s = angle / v;
        Ok(Quaternion::new(n.ln(), s * self.i, s * self.j, s * self.k))
    }

    /// Complex argument; only meaningful when `j = k = 0`.
    pub fn arg(self) -> f64 {
        self.i.atan2(self.re)
    }

    /// Commutator-free test: `pq == qp` up to `tol`.
    pub fn commutes_with(self, other: Self, tol: f64) -> bool {
        (self * other - other * self).max_abs() <= tol
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i{:+}j{:+}k", self.re, self.i, self.j, self.k)
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Quaternion::new(self.re + o.re, self.i + o.i, self.j + o.j, self.k + o.k)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Quaternion::new(self.re - o.re, self.i - o.i, self.j - o.j, self.k - o.k)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Quaternion::new(-self.re, -self.i, -self.j, -self.k)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a1, b1, c1, d1) = (self.re, self.i, self.j, self.k);
        let (a2, b2, c2, d2) = (o.re, o.i, o.j, o.k);
        Quaternion::new(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Quaternion::new(self.re * s, self.i * s, self.j * s, self.k * s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl MulAssign for Quaternion {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl From<f64> for Quaternion {
    fn from(x: f64) -> Self {
        Quaternion::real(x)
    }
}

impl std::iter::Sum for Quaternion {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Quaternion::ZERO, |a, b| a + b)
    }
}

impl Serialize for Quaternion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(4)?;
        for x in self.to_array() {
            t.serialize_element(&x)?;
        }
        t.end()
    }
}

impl<'de> Deserialize<'de> for Quaternion {
    /// Accepts a bare number, `[re, im]` or `[x1, x2, x3, x4]`.
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            List(Vec<f64>),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(Quaternion::real(x)),
            Repr::List(v) => match v.as_slice() {
                [a] => Ok(Quaternion::real(*a)),
                [a, b] => Ok(Quaternion::complex(*a, *b)),
                [a, b, c, e] => Ok(Quaternion::new(*a, *b, *c, *e)),
                _ => Err(de::Error::invalid_length(v.len(), &"1, 2 or 4 components")),
            },
        }
    }
}

/// JSON encoding of a scalar at the precision of `field`: real as a number, complex
/// as `[re, im]`, quaternion as `[x1, x2, x3, x4]`.
pub fn encode_scalar(q: Quaternion, field: FieldTag) -> serde_json::Value {
    use serde_json::json;
    match field {
        FieldTag::Real => json!(q.re),
        FieldTag::Complex => json!([q.re, q.i]),
        FieldTag::Quaternion => json!([q.re, q.i, q.j, q.k]),
    }
}

/// A pure imaginary scalar, for the `t` coordinate of Heisenberg points.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct ImScalar(Quaternion);

impl ImScalar {
    pub const ZERO: ImScalar = ImScalar(Quaternion::ZERO);

    /// Rejects values whose real part exceeds `1e-12 * max(1, |q|)`; the real part
    /// of accepted values is dropped.
    pub fn new(q: Quaternion) -> Result<Self> {
        if q.re.abs() > 1e-12 * q.norm().max(1.0) || !q.is_finite() {
            return Err(Error::Contract(format!("{q} is not pure imaginary")));
        }
        Ok(ImScalar(q.im_part()))
    }

    pub fn from_parts(i: f64, j: f64, k: f64) -> Self {
        ImScalar(Quaternion::pure(i, j, k))
    }

    /// `x * i`.
    pub fn complex(x: f64) -> Self {
        ImScalar(Quaternion::pure(x, 0.0, 0.0))
    }

    pub fn get(self) -> Quaternion {
        self.0
    }
}

impl<'de> Deserialize<'de> for ImScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let q = Quaternion::deserialize(d)?;
        ImScalar::new(q).map_err(de::Error::custom)
    }
}

impl From<ImScalar> for Quaternion {
    fn from(t: ImScalar) -> Quaternion {
        t.0
    }
}

/// Unit quaternion rotating the direction of `from` onto the direction of `to`
/// under `v -> u v conj(u)`; both arguments are pure imaginary 3-vectors.
///
/// Returns `None` when the directions are antipodal.
pub fn rotation_between(from: [f64; 3], to: [f64; 3]) -> Option<Quaternion> {
    let na = norm3(from);
    let nb = norm3(to);
    if na == 0.0 || nb == 0.0 {
        return Some(Quaternion::ONE);
    }
    let a = scale3(from, 1.0 / na);
    let b = scale3(to, 1.0 / nb);
    let c = cross3(a, b);
    let d = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let q = Quaternion::new(1.0 + d, c[0], c[1], c[2]);
    if q.norm() < 1e-12 {
        return None;
    }
    q.normalize().ok()
}

pub(crate) fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

pub(crate) fn scale3(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
