//! Vectors, matrices and Hermitian forms of signature (2,1).
//!
//! Scalars multiply vectors on the left and matrices act on row vectors from
//! the right, so `Z -> Z A` and composition `A B` means "first `A`, then `B`".

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::scalars::{FieldTag, Quaternion};
use crate::tolerances;

pub type Row = [Quaternion; 3];

const Z: Quaternion = Quaternion::ZERO;
const O: Quaternion = Quaternion::ONE;

pub fn row_scale_left(s: Quaternion, v: &Row) -> Row {
    [s * v[0], s * v[1], s * v[2]]
}

pub fn row_sub(a: &Row, b: &Row) -> Row {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn row_max_abs(v: &Row) -> f64 {
    v.iter().map(|q| q.max_abs()).fold(0.0, f64::max)
}

fn row_norm(v: &Row) -> f64 {
    v.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
}

/// 3x3 matrix with quaternion entries, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Mat3(pub [[Quaternion; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[O, Z, Z], [Z, O, Z], [Z, Z, O]]);
    pub const ZERO: Mat3 = Mat3([[Z; 3]; 3]);

    pub fn from_rows(rows: [Row; 3]) -> Self {
        Mat3(rows)
    }

    pub fn from_real(rows: [[f64; 3]; 3]) -> Self {
        Mat3(rows.map(|r| r.map(Quaternion::real)))
    }

    pub fn diag(a: Quaternion, b: Quaternion, c: Quaternion) -> Self {
        Mat3([[a, Z, Z], [Z, b, Z], [Z, Z, c]])
    }

    pub fn rows(&self) -> &[Row; 3] {
        &self.0
    }

    /// Conjugate transpose.
    pub fn star(&self) -> Self {
        let m = &self.0;
        let mut out = [[Z; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = m[j][i].conj();
            }
        }
        Mat3(out)
    }

    /// Every entry multiplied on the left by `s`.
    pub fn scale_left(&self, s: Quaternion) -> Self {
        Mat3(self.0.map(|r| r.map(|e| s * e)))
    }

    pub fn scale(&self, s: f64) -> Self {
        Mat3(self.0.map(|r| r.map(|e| e * s)))
    }

    /// Row vector times matrix.
    pub fn apply(&self, v: &Row) -> Row {
        let m = &self.0;
        let mut out = [Z; 3];
        for (j, o) in out.iter_mut().enumerate() {
            *o = v[0] * m[0][j] + v[1] * m[1][j] + v[2] * m[2][j];
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(row_max_abs).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Mat3) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|q| q.is_finite())
    }

    /// Smallest field containing all entries.
    pub fn field(&self) -> FieldTag {
        self.0.iter().flatten().fold(FieldTag::Real, |f, q| f.join(FieldTag::of(*q)))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.star()) <= tol
    }

    /// Infinity-norm (max absolute row sum, using quaternion moduli).
    pub fn inf_norm(&self) -> f64 {
        self.0.iter().map(|r| r.iter().map(|q| q.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Two-sided inverse by Gauss-Jordan elimination with partial pivoting.
    ///
    /// Only left row operations are used, which is what makes this valid over
    /// the quaternions.
    pub fn inverse(&self) -> Result<Mat3> {
        let mut a = self.0;
        let mut b = Mat3::IDENTITY.0;
        let scale = self.max_abs();
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::Numeric("singular matrix".into()));
        }
        for p in 0..3 {
            let piv = (p..3)
                .max_by(|&x, &y| a[x][p].norm().total_cmp(&a[y][p].norm()))
                .expect("non-empty range");
            if a[piv][p].norm() <= 1e-14 * scale {
                return Err(Error::Numeric("singular matrix".into()));
            }
            a.swap(p, piv);
            b.swap(p, piv);
            let inv = a[p][p].inv()?;
            a[p] = row_scale_left(inv, &a[p]);
            b[p] = row_scale_left(inv, &b[p]);
            for r in 0..3 {
                if r != p {
                    let c = a[r][p];
                    a[r] = row_sub(&a[r], &row_scale_left(c, &a[p]));
                    b[r] = row_sub(&b[r], &row_scale_left(c, &b[p]));
                }
            }
        }
        Ok(Mat3(b))
    }

    /// `|A|_inf |A^-1|_inf`, or infinity for singular input.
    pub fn condition(&self) -> f64 {
        match self.inverse() {
            Ok(inv) => self.inf_norm() * inv.inf_norm(),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn power(&self, n: u32) -> Mat3 {
        (0..n).fold(Mat3::IDENTITY, |acc, _| acc * *self)
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = Quaternion;
    fn index(&self, (i, j): (usize, usize)) -> &Quaternion {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Quaternion {
        &mut self.0[i][j]
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut out = [[Z; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            *row = o.apply(&self.0[i]);
        }
        Mat3(out)
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut out = self.0;
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e += o.0[i][j];
            }
        }
        Mat3(out)
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        self + (-o)
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        Mat3(self.0.map(|r| r.map(|e| -e)))
    }
}

impl fmt::Display for Mat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.0 {
            writeln!(f, "[{}, {}, {}]", r[0], r[1], r[2])?;
        }
        Ok(())
    }
}

impl Serialize for Mat3 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat3 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Mat3(<[[Quaternion; 3]; 3]>::deserialize(d)?))
    }
}

/// The two standard forms of signature (2,1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormTag {
    /// Anti-diagonal form: `z1 w3' + z2 w2' + z3 w1'` (primes are conjugates).
    J0,
    /// `diag(1, 1, -1)`.
    Jstd,
}

impl FormTag {
    pub fn matrix(self) -> Mat3 {
        match self {
            FormTag::J0 => Mat3::from_real([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]),
            FormTag::Jstd => Mat3::diag(O, O, -O),
        }
    }

    pub fn form(self) -> HermitianForm {
        HermitianForm { matrix: self.matrix(), tag: Some(self) }
    }
}

impl fmt::Display for FormTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormTag::J0 => "J0",
            FormTag::Jstd => "Jstd",
        })
    }
}

/// `C` with `C Jstd C* = J0`. A `J0` vector `Y` corresponds to the `Jstd` vector
/// `Y C`; this matches the Siegel and ball models along the Heisenberg chart.
pub fn base_change() -> Mat3 {
    Mat3::from_real([[0.0, 1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 0.5, 0.5]])
}

/// Exact inverse of [`base_change`].
pub fn base_change_inv() -> Mat3 {
    Mat3::from_real([[0.0, 1.0, 0.0], [0.5, 0.0, 1.0], [-0.5, 0.0, 1.0]])
}

/// Matrix taking row vectors in `from` coordinates to `to` coordinates.
fn change(from: FormTag, to: FormTag) -> Mat3 {
    match (from, to) {
        (FormTag::J0, FormTag::Jstd) => base_change(),
        (FormTag::Jstd, FormTag::J0) => base_change_inv(),
        _ => Mat3::IDENTITY,
    }
}

/// A Hermitian matrix of signature (2,1), possibly one of the standard forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermitianForm {
    pub matrix: Mat3,
    pub tag: Option<FormTag>,
}

impl HermitianForm {
    pub fn j0() -> Self {
        FormTag::J0.form()
    }

    pub fn jstd() -> Self {
        FormTag::Jstd.form()
    }

    pub fn custom(matrix: Mat3) -> Result<Self> {
        if !matrix.is_hermitian(1e-12 * matrix.max_abs().max(1.0)) {
            return contract("form matrix is not Hermitian");
        }
        Ok(HermitianForm { matrix, tag: None })
    }

    /// `Z J W*`.
    pub fn pairing(&self, z: &Row, w: &Row) -> Quaternion {
        let zj = self.matrix.apply(z);
        zj[0] * w[0].conj() + zj[1] * w[1].conj() + zj[2] * w[2].conj()
    }

    /// Max-abs entry of `A J A* - J`.
    pub fn defect(&self, a: &Mat3) -> f64 {
        (*a * self.matrix * a.star()).max_abs_diff(&self.matrix)
    }

    pub fn preserved_by(&self, a: &Mat3, tol: f64) -> bool {
        a.is_finite() && self.defect(a) <= tol
    }
}

/// Predicate `A J A* = J` to `tolerances::FORM`.
pub fn is_isometry(a: &Mat3, form: &HermitianForm) -> bool {
    form.preserved_by(a, tolerances::FORM)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointClass {
    Negative,
    Null,
    Positive,
}

/// Element of `F^{2,1}` tagged with its form and field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HVector {
    pub coords: Row,
    pub form: FormTag,
    pub field: FieldTag,
}

impl HVector {
    /// Field is inferred as the smallest one containing the coordinates.
    pub fn new(coords: Row, form: FormTag) -> Self {
        let field = coords.iter().fold(FieldTag::Real, |f, q| f.join(FieldTag::of(*q)));
        HVector { coords, form, field }
    }

    pub fn with_field(coords: Row, form: FormTag, field: FieldTag) -> Result<Self> {
        if !coords.iter().all(|q| field.contains(*q, 1e-12 * row_norm(&coords).max(1.0))) {
            return contract(format!("coordinates do not lie in the {field} field"));
        }
        Ok(HVector { coords, form, field })
    }

    pub fn scale_left(&self, s: Quaternion) -> Self {
        HVector { coords: row_scale_left(s, &self.coords), form: self.form, field: self.field.join(FieldTag::of(s)) }
    }

    /// Same point in the coordinates of `to`.
    pub fn to_form(&self, to: FormTag) -> HVector {
        let coords = change(self.form, to).apply(&self.coords);
        HVector { coords, form: to, field: self.field }
    }

    pub fn norm(&self) -> f64 {
        row_norm(&self.coords)
    }
}

/// Hermitian product `<Z, W>` of two vectors carrying the same form.
///
/// Fields may differ; the product is computed in the larger one.
pub fn herm(z: &HVector, w: &HVector) -> Result<Quaternion> {
    if z.form != w.form {
        return contract(format!("form mismatch: {} vs {}", z.form, w.form));
    }
    Ok(z.form.form().pairing(&z.coords, &w.coords))
}

/// Sign of `<Z, Z>`, with `|<Z,Z>| <= tol |Z|^2` counted as null.
pub fn norm_sign(z: &HVector, tol: f64) -> PointClass {
    let n = z.form.form().pairing(&z.coords, &z.coords).re;
    let scale = z.norm().powi(2);
    if n.abs() <= tol * scale {
        PointClass::Null
    } else if n < 0.0 {
        PointClass::Negative
    } else {
        PointClass::Positive
    }
}

/// Isometry of a standard form: matrix plus tags, checked on construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Isometry {
    pub matrix: Mat3,
    pub form: FormTag,
    pub field: FieldTag,
}

impl Isometry {
    /// Fails unless `A J A* = J` to `tolerances::FORM`.
    pub fn new(matrix: Mat3, form: FormTag) -> Result<Self> {
        Self::with_tolerance(matrix, form, tolerances::FORM)
    }

    pub fn with_tolerance(matrix: Mat3, form: FormTag, tol: f64) -> Result<Self> {
        let defect = form.form().defect(&matrix);
        if !(defect <= tol) {
            return contract(format!("matrix does not preserve {form}: defect {defect:.3e}"));
        }
        Ok(Isometry { matrix, form, field: matrix.field() })
    }

    pub fn identity(form: FormTag) -> Self {
        Isometry { matrix: Mat3::IDENTITY, form, field: FieldTag::Real }
    }

    /// Exact inverse `J A* J^-1` (both standard forms are involutions).
    pub fn inverse(&self) -> Isometry {
        let j = self.form.matrix();
        Isometry { matrix: j * self.matrix.star() * j, form: self.form, field: self.field }
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Isometry) -> Result<Isometry> {
        if self.form != other.form {
            return contract("composing isometries of different forms");
        }
        Ok(Isometry { matrix: self.matrix * other.matrix, form: self.form, field: self.field.join(other.field) })
    }

    pub fn to_form(&self, to: FormTag) -> Isometry {
        let m = change(to, self.form) * self.matrix * change(self.form, to);
        Isometry { matrix: m, form: to, field: self.field }
    }

    pub fn defect(&self) -> f64 {
        self.form.form().defect(&self.matrix)
    }
}

/// Point of projective space, stored through a lift.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjPoint {
    pub lift: HVector,
    pub class: PointClass,
}

impl ProjPoint {
    pub fn new(lift: HVector) -> Result<Self> {
        if lift.norm() == 0.0 || !lift.coords.iter().all(|q| q.is_finite()) {
            return contract("projective point needs a finite nonzero lift");
        }
        Ok(ProjPoint { lift, class: norm_sign(&lift, tolerances::NULL_RELATIVE) })
    }

    pub fn from_coords(coords: Row, form: FormTag) -> Result<Self> {
        Self::new(HVector::new(coords, form))
    }

    pub fn form(&self) -> FormTag {
        self.lift.form
    }

    pub fn coords(&self) -> &Row {
        &self.lift.coords
    }

    pub fn is_null(&self) -> bool {
        self.class == PointClass::Null
    }

    /// Lift scaled on the left so its largest coordinate equals one.
    pub fn normalized(&self) -> Row {
        let c = &self.lift.coords;
        let k = (0..3).max_by(|&a, &b| c[a].norm().total_cmp(&c[b].norm())).expect("three coordinates");
        let s = c[k].inv().expect("nonzero lift");
        row_scale_left(s, c)
    }

    /// Lift scaled on the left so its coordinate `k` equals one.
    pub fn normalized_at(&self, k: usize) -> Result<Row> {
        let s = self.lift.coords[k].inv()?;
        Ok(row_scale_left(s, &self.lift.coords))
    }

    pub fn to_form(&self, to: FormTag) -> ProjPoint {
        ProjPoint { lift: self.lift.to_form(to), class: self.class }
    }

    /// Projective equality up to `tol` on normalized lifts.
    pub fn approx_eq(&self, other: &ProjPoint, tol: f64) -> bool {
        let o = if other.form() == self.form() { *other } else { other.to_form(self.form()) };
        let c = &self.lift.coords;
        let k = (0..3).max_by(|&a, &b| c[a].norm().total_cmp(&c[b].norm())).expect("three coordinates");
        let Ok(b) = o.normalized_at(k) else { return false };
        let a = self.normalized_at(k).expect("largest coordinate is nonzero");
        row_max_abs(&row_sub(&a, &b)) <= tol
    }

    /// Image under a matrix acting on the right.
    pub fn act(&self, g: &Isometry) -> Result<ProjPoint> {
        if g.form != self.form() {
            return contract(format!("acting by a {} isometry on a {} point", g.form, self.form()));
        }
        let coords = g.matrix.apply(&self.lift.coords);
        let field = self.lift.field.join(g.field);
        Ok(ProjPoint { lift: HVector { coords, form: self.form(), field }, class: self.class })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hv(c: [[f64; 4]; 3], f: FormTag) -> HVector {
        HVector::new(c.map(Quaternion::from_array), f)
    }

    #[test]
    fn j0_pairing_formula() {
        let z = [Quaternion::new(1.0, 2.0, 0.0, 0.0), Quaternion::new(0.0, 1.0, 1.0, 0.0), Quaternion::new(3.0, 0.0, 0.0, 1.0)];
        let w = [Quaternion::new(0.5, 0.0, 1.0, 0.0), Quaternion::new(2.0, 0.0, 0.0, 0.0), Quaternion::new(0.0, -1.0, 0.0, 0.0)];
        let expect = z[0] * w[2].conj() + z[1] * w[1].conj() + z[2] * w[0].conj();
        let got = HermitianForm::j0().pairing(&z, &w);
        assert!(got.abs_diff_eq(expect, 1e-15));
    }

    #[test]
    fn base_change_is_exact() {
        let c = base_change();
        let lhs = c * FormTag::Jstd.matrix() * c.star();
        assert_eq!(lhs, FormTag::J0.matrix());
        assert_eq!(c * base_change_inv(), Mat3::IDENTITY);
        assert_eq!(base_change_inv() * c, Mat3::IDENTITY);
    }

    #[test]
    fn classification_examples() {
        let neg = hv([[0.0; 4], [0.0; 4], [1.0, 0.0, 0.0, 0.0]], FormTag::Jstd);
        assert_eq!(norm_sign(&neg, 1e-12), PointClass::Negative);
        let null = hv([[0.0; 4], [1.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]], FormTag::Jstd);
        assert_eq!(norm_sign(&null, 1e-12), PointClass::Null);
        let pos = hv([[1.0, 0.0, 0.0, 0.0], [0.0; 4], [0.0; 4]], FormTag::Jstd);
        assert_eq!(norm_sign(&pos, 1e-12), PointClass::Positive);
    }

    #[test]
    fn form_mismatch_is_rejected() {
        let a = hv([[1.0, 0.0, 0.0, 0.0], [0.0; 4], [0.0; 4]], FormTag::Jstd);
        let b = hv([[1.0, 0.0, 0.0, 0.0], [0.0; 4], [0.0; 4]], FormTag::J0);
        assert!(matches!(herm(&a, &b), Err(Error::Contract(_))));
    }

    #[test]
    fn inverse_of_quaternion_matrix() {
        let m = Mat3([
            [Quaternion::new(1.0, 2.0, 0.0, 1.0), Quaternion::J, Quaternion::real(0.5)],
            [Quaternion::K, Quaternion::new(0.0, 1.0, 1.0, 1.0), Quaternion::ZERO],
            [Quaternion::real(2.0), Quaternion::I, Quaternion::new(1.0, 0.0, 0.0, -3.0)],
        ]);
        let inv = m.inverse().unwrap();
        assert!((m * inv).max_abs_diff(&Mat3::IDENTITY) < 1e-14);
        assert!((inv * m).max_abs_diff(&Mat3::IDENTITY) < 1e-14);
        assert!(Mat3::ZERO.inverse().is_err());
    }

    #[test]
    fn isometry_checks_form() {
        assert!(Isometry::new(Mat3::IDENTITY.scale(2.0), FormTag::J0).is_err());
        let g = Isometry::new(Mat3::diag(Quaternion::I, Quaternion::J, Quaternion::I), FormTag::J0).unwrap();
        assert!((g.then(&g.inverse()).unwrap().matrix).max_abs_diff(&Mat3::IDENTITY) < 1e-15);
    }

    #[test]
    fn projective_equality_ignores_left_scalars() {
        let p = ProjPoint::from_coords([Quaternion::I, Quaternion::real(2.0), Quaternion::new(1.0, 0.0, 1.0, 0.0)], FormTag::J0).unwrap();
        let s = Quaternion::new(0.3, -1.0, 0.2, 2.0);
        let q = ProjPoint::new(p.lift.scale_left(s)).unwrap();
        assert!(p.approx_eq(&q, 1e-14));
        let r = ProjPoint::from_coords([Quaternion::I, Quaternion::real(2.1), Quaternion::new(1.0, 0.0, 1.0, 0.0)], FormTag::J0).unwrap();
        assert!(!p.approx_eq(&r, 1e-6));
    }
}
