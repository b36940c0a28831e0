//! Heisenberg, horospherical and ball coordinates.
//!
//! The Heisenberg group is `F x Im F` with
//! `(z, t)(w, s) = (z + w, t + s - 2 Im(z conj w))`. A finite point lifts to
//! the `J0` null vector `((-|z|^2 + t)/2, z, 1)` and the point at infinity to
//! `(1, 0, 0)`. Horospherical coordinates add a height `u > 0` and lift to
//! `((-|z|^2 - u + t)/2, z, 1)`, whose `J0` norm is `-u`.

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::hermitian::{row_scale_left, FormTag, PointClass, ProjPoint, Row};
use crate::scalars::{FieldTag, ImScalar, Quaternion};
use crate::tolerances;

/// Boundary point: either infinity or a finite Heisenberg point `(z, t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HeisenbergPoint {
    Infinity,
    Finite { z: Quaternion, t: ImScalar },
}

impl HeisenbergPoint {
    pub const ORIGIN: HeisenbergPoint = HeisenbergPoint::Finite { z: Quaternion::ZERO, t: ImScalar::ZERO };

    pub fn new(z: Quaternion, t: Quaternion) -> Result<Self> {
        Ok(HeisenbergPoint::Finite { z, t: ImScalar::new(t)? })
    }

    pub fn finite(&self) -> Option<(Quaternion, Quaternion)> {
        match *self {
            HeisenbergPoint::Infinity => None,
            HeisenbergPoint::Finite { z, t } => Some((z, t.get())),
        }
    }

    pub fn field(&self) -> FieldTag {
        match self.finite() {
            None => FieldTag::Real,
            Some((z, t)) => FieldTag::of(z).join(FieldTag::of(t)),
        }
    }

    pub fn approx_eq(&self, other: &HeisenbergPoint, tol: f64) -> bool {
        match (self.finite(), other.finite()) {
            (None, None) => true,
            (Some((z, t)), Some((w, s))) => z.abs_diff_eq(w, tol) && t.abs_diff_eq(s, tol),
            _ => false,
        }
    }
}

impl Serialize for HeisenbergPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            HeisenbergPoint::Infinity => s.serialize_str("inf"),
            HeisenbergPoint::Finite { z, t } => {
                #[derive(Serialize)]
                struct P<'a> {
                    z: &'a Quaternion,
                    t: &'a ImScalar,
                }
                P { z, t }.serialize(s)
            }
        }
    }
}

impl<'de> Deserialize<'de> for HeisenbergPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Tag(String),
            Point { z: Quaternion, t: ImScalar },
        }
        match Repr::deserialize(d)? {
            Repr::Tag(s) if s == "inf" => Ok(HeisenbergPoint::Infinity),
            Repr::Tag(s) => Err(serde::de::Error::custom(format!("unknown boundary point {s:?}"))),
            Repr::Point { z, t } => Ok(HeisenbergPoint::Finite { z, t }),
        }
    }
}

/// Group law.
pub fn heis_mul(p: &HeisenbergPoint, q: &HeisenbergPoint) -> Result<HeisenbergPoint> {
    let (Some((z, t)), Some((w, s))) = (p.finite(), q.finite()) else {
        return contract("infinity is not an element of the Heisenberg group");
    };
    let c = (z * w.conj()).im_part();
    HeisenbergPoint::new(z + w, t + s - c * 2.0)
}

pub fn heis_inv(p: &HeisenbergPoint) -> Result<HeisenbergPoint> {
    let Some((z, t)) = p.finite() else {
        return contract("infinity is not an element of the Heisenberg group");
    };
    HeisenbergPoint::new(-z, -t)
}

/// Row vector `((-|z|^2 + t)/2, z, 1)`, or `(1, 0, 0)` at infinity.
pub fn siegel_lift(p: &HeisenbergPoint) -> Row {
    match p.finite() {
        None => [Quaternion::ONE, Quaternion::ZERO, Quaternion::ZERO],
        Some((z, t)) => [(t - Quaternion::real(z.norm_sqr())) * 0.5, z, Quaternion::ONE],
    }
}

pub fn heis_to_siegel(p: &HeisenbergPoint) -> ProjPoint {
    ProjPoint::from_coords(siegel_lift(p), FormTag::J0).expect("Siegel lift is nonzero")
}

/// Inverse of [`heis_to_siegel`]; the input must be null.
pub fn siegel_to_heis(p: &ProjPoint) -> Result<HeisenbergPoint> {
    let p = p.to_form(FormTag::J0);
    if p.class != PointClass::Null {
        return contract("point is not on the boundary");
    }
    let c = p.coords();
    let scale = c.iter().map(|q| q.norm()).fold(0.0, f64::max);
    if c[2].norm() <= 1e-13 * scale {
        return Ok(HeisenbergPoint::Infinity);
    }
    let s = c[2].inv()?;
    let z = s * c[1];
    let t = (s * c[0]).im_part() * 2.0;
    HeisenbergPoint::new(z, t)
}

/// Interior point in horospherical coordinates `(z, t, u)`, `u > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorosphericalPoint {
    pub z: Quaternion,
    pub t: ImScalar,
    pub height: f64,
}

impl HorosphericalPoint {
    pub fn new(z: Quaternion, t: Quaternion, height: f64) -> Result<Self> {
        if !(height > 0.0) {
            return contract(format!("height must be positive, got {height}"));
        }
        Ok(HorosphericalPoint { z, t: ImScalar::new(t)?, height })
    }

    pub fn approx_eq(&self, o: &HorosphericalPoint, tol: f64) -> bool {
        self.z.abs_diff_eq(o.z, tol) && self.t.get().abs_diff_eq(o.t.get(), tol) && (self.height - o.height).abs() <= tol
    }
}

pub fn horo_lift_j0(h: &HorosphericalPoint) -> Row {
    let w = (h.t.get() - Quaternion::real(h.z.norm_sqr() + h.height)) * 0.5;
    [w, h.z, Quaternion::ONE]
}

/// `J0` point of negative norm.
pub fn horo_to_siegel(h: &HorosphericalPoint) -> ProjPoint {
    ProjPoint::from_coords(horo_lift_j0(h), FormTag::J0).expect("nonzero lift")
}

/// `Jstd` lift `(z, (1 - |z|^2 - u + t)/2, (1 + |z|^2 + u - t)/2)`.
pub fn horo_to_proj(h: &HorosphericalPoint) -> ProjPoint {
    let z2 = h.z.norm_sqr();
    let t = h.t.get();
    let a = (Quaternion::real(1.0 - z2 - h.height) + t) * 0.5;
    let b = (Quaternion::real(1.0 + z2 + h.height) - t) * 0.5;
    ProjPoint::from_coords([h.z, a, b], FormTag::Jstd).expect("nonzero lift")
}

/// Inverse of [`horo_to_proj`] / [`horo_to_siegel`] for negative points of either form.
pub fn proj_to_horo(p: &ProjPoint) -> Result<HorosphericalPoint> {
    if p.class != PointClass::Negative {
        return contract("point is not in the interior");
    }
    let c = p.to_form(FormTag::J0).normalized_at(2)?;
    let z = c[1];
    let t = c[0].im_part() * 2.0;
    let height = -2.0 * c[0].re - z.norm_sqr();
    HorosphericalPoint::new(z, t, height)
}

/// Point of the closed unit ball `|z1|^2 + |z2|^2 <= 1`, lifted by `(z1, z2, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallPoint {
    pub z1: Quaternion,
    pub z2: Quaternion,
}

impl BallPoint {
    pub fn new(z1: Quaternion, z2: Quaternion) -> Self {
        BallPoint { z1, z2 }
    }

    pub fn radius_sqr(&self) -> f64 {
        self.z1.norm_sqr() + self.z2.norm_sqr()
    }

    pub fn approx_eq(&self, o: &BallPoint, tol: f64) -> bool {
        self.z1.abs_diff_eq(o.z1, tol) && self.z2.abs_diff_eq(o.z2, tol)
    }
}

pub fn ball_to_proj(b: &BallPoint) -> ProjPoint {
    ProjPoint::from_coords([b.z1, b.z2, Quaternion::ONE], FormTag::Jstd).expect("nonzero lift")
}

/// Ball coordinates of a `Jstd` point with nonzero last coordinate.
pub fn proj_to_ball(p: &ProjPoint) -> Result<BallPoint> {
    let c = p.to_form(FormTag::Jstd).normalized_at(2).map_err(|_| Error::Contract("point at infinity of the affine ball chart".into()))?;
    Ok(BallPoint::new(c[0], c[1]))
}

/// `(z1, z2) -> ((1 + z2)^-1 z1, 2 Im z2 / |1 + z2|^2, (1 - |z2|^2 - |z1|^2) / |1 + z2|^2)`.
///
/// The point `(0, -1)` has no image.
pub fn ball_to_horo(b: &BallPoint) -> Result<HorosphericalPoint> {
    let one_plus = Quaternion::ONE + b.z2;
    let d = one_plus.norm_sqr();
    if d == 0.0 {
        return contract("(0, -1) corresponds to infinity");
    }
    let z = one_plus.inv()? * b.z1;
    let t = b.z2.im_part() * (2.0 / d);
    let height = (1.0 - b.radius_sqr()) / d;
    HorosphericalPoint::new(z, t, height)
}

pub fn horo_to_ball(h: &HorosphericalPoint) -> Result<BallPoint> {
    proj_to_ball(&horo_to_proj(h))
}

/// Boundary version of [`ball_to_horo`]: a unit-sphere point to the Heisenberg chart.
pub fn ball_boundary_to_heis(b: &BallPoint) -> Result<HeisenbergPoint> {
    let p = ball_to_proj(b);
    if p.class != PointClass::Null {
        return contract("ball point is not on the unit sphere");
    }
    siegel_to_heis(&p)
}

fn heis_lift_jstd(p: &HeisenbergPoint) -> Row {
    p.finite()
        .map(|(z, t)| {
            let z2 = z.norm_sqr();
            [z, (Quaternion::real(1.0 - z2) + t) * 0.5, (Quaternion::real(1.0 + z2) - t) * 0.5]
        })
        .unwrap_or([Quaternion::ZERO, -Quaternion::ONE, Quaternion::ONE])
}

/// Heisenberg point on the ball boundary.
pub fn heis_to_ball(p: &HeisenbergPoint) -> BallPoint {
    let c = heis_lift_jstd(p);
    let s = c[2].inv().expect("last coordinate is nonzero");
    let c = row_scale_left(s, &c);
    BallPoint::new(c[0], c[1])
}

/// Relative null tolerance used by the chart maps.
pub fn is_null_lift(r: &Row, form: FormTag) -> bool {
    let n = form.form().pairing(r, r).re;
    let s: f64 = r.iter().map(|q| q.norm_sqr()).sum();
    n.abs() <= tolerances::NULL_RELATIVE * s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(z: (f64, f64), t: f64) -> HeisenbergPoint {
        HeisenbergPoint::new(Quaternion::complex(z.0, z.1), Quaternion::pure(t, 0.0, 0.0)).unwrap()
    }

    #[test]
    fn ball_examples() {
        let c = ball_to_horo(&BallPoint::new(Quaternion::ZERO, Quaternion::ZERO)).unwrap();
        assert!(c.approx_eq(&HorosphericalPoint::new(Quaternion::ZERO, Quaternion::ZERO, 1.0).unwrap(), 1e-15));
        let b = ball_boundary_to_heis(&BallPoint::new(Quaternion::ZERO, Quaternion::ONE)).unwrap();
        assert!(b.approx_eq(&HeisenbergPoint::ORIGIN, 1e-15));
        let inf = ball_boundary_to_heis(&BallPoint::new(Quaternion::ZERO, -Quaternion::ONE)).unwrap();
        assert_eq!(inf, HeisenbergPoint::Infinity);
        assert!(ball_to_horo(&BallPoint::new(Quaternion::ZERO, -Quaternion::ONE)).is_err());
    }

    #[test]
    fn siegel_lift_is_null() {
        let p = HeisenbergPoint::new(Quaternion::new(0.3, -1.0, 2.0, 0.5), Quaternion::pure(0.1, 0.2, -0.7)).unwrap();
        let r = siegel_lift(&p);
        assert!(FormTag::J0.form().pairing(&r, &r).norm() < 1e-15);
        let back = siegel_to_heis(&heis_to_siegel(&p)).unwrap();
        assert!(back.approx_eq(&p, 1e-15));
    }

    #[test]
    fn horo_lift_norm_is_minus_height() {
        let h = HorosphericalPoint::new(Quaternion::new(1.0, 0.5, 0.0, -0.2), Quaternion::pure(0.0, 1.0, 2.0), 0.7).unwrap();
        let r = horo_lift_j0(&h);
        let n = FormTag::J0.form().pairing(&r, &r);
        assert!((n.re + 0.7).abs() < 1e-15 && n.im_norm() < 1e-15);
        let via_std = horo_to_proj(&h);
        assert!(via_std.approx_eq(&horo_to_siegel(&h), 1e-14));
    }

    #[test]
    fn group_law_example() {
        let p = heis_mul(&hp((1.0, 0.0), 0.0), &hp((0.0, 1.0), 0.0)).unwrap();
        assert!(p.approx_eq(&hp((1.0, 1.0), 2.0), 1e-15));
        assert!(heis_mul(&HeisenbergPoint::Infinity, &p).is_err());
    }

    #[test]
    fn json_forms() {
        let s = serde_json::to_string(&hp((1.0, 2.0), 3.0)).unwrap();
        assert_eq!(s, r#"{"z":[1.0,2.0,0.0,0.0],"t":[0.0,3.0,0.0,0.0]}"#);
        let back: HeisenbergPoint = serde_json::from_str(r#"{"z":[1,2],"t":[0,3]}"#).unwrap();
        assert!(back.approx_eq(&hp((1.0, 2.0), 3.0), 0.0));
        let inf: HeisenbergPoint = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(inf, HeisenbergPoint::Infinity);
        assert!(serde_json::from_str::<HeisenbergPoint>(r#"{"z":[1,2],"t":[1,3]}"#).is_err());
    }
}
