//! Standard isometries of the Siegel domain (form `J0`) and their boundary actions.
//!
//! Composition: `compose(f, g)` is `f` after `g`, i.e. the matrix product
//! `M_g M_f` in the row convention. Words written as matrix products
//! `A B C` apply `A` first.

use crate::boundary::{heis_mul, heis_to_siegel, siegel_to_heis, HeisenbergPoint};
use crate::cartan::{transport_family, IdealTriple};
use crate::error::{contract, Result};
use crate::hermitian::{FormTag, Isometry, Mat3};
use crate::scalars::{FieldTag, Quaternion};
use crate::tolerances;

const Z: Quaternion = Quaternion::ZERO;
const O: Quaternion = Quaternion::ONE;

fn check_unit(q: Quaternion, name: &str) -> Result<()> {
    if (q.norm() - 1.0).abs() > 1e-12 {
        return contract(format!("{name} must be a unit scalar, |{name}| = {}", q.norm()));
    }
    Ok(())
}

fn check_positive(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return contract(format!("r must be a positive real, got {r}"));
    }
    Ok(())
}

/// `f` after `g`.
pub fn compose(f: &Isometry, g: &Isometry) -> Result<Isometry> {
    g.then(f)
}

/// `diag(r mu, mu U, mu / r)`, fixing `0` and infinity.
pub fn dilation(mu: Quaternion, u: Quaternion, r: f64) -> Result<Isometry> {
    check_unit(mu, "mu")?;
    check_unit(u, "U")?;
    check_positive(r)?;
    Isometry::new(Mat3::diag(mu * r, mu * u, mu * (1.0 / r)), FormTag::J0)
}

/// Boundary action `(z, t) -> (r mu^-1 z mu U, r^2 mu^-1 t mu)`.
pub fn dilation_heis(mu: Quaternion, u: Quaternion, r: f64, p: &HeisenbergPoint) -> Result<HeisenbergPoint> {
    let Some((z, t)) = p.finite() else { return Ok(HeisenbergPoint::Infinity) };
    let mi = mu.inv()?;
    HeisenbergPoint::new(mi * z * mu * u * r, mi * t * mu * (r * r))
}

/// Translation acting by right multiplication by `(z, t)` in the group law.
pub fn translation(p: &HeisenbergPoint) -> Result<Isometry> {
    let Some((z, t)) = p.finite() else {
        return contract("translation by infinity");
    };
    let m = Mat3::from_rows([
        [O, Z, Z],
        [-z.conj(), O, Z],
        [(t - Quaternion::real(z.norm_sqr())) * 0.5, z, O],
    ]);
    Isometry::new(m, FormTag::J0)
}

/// Stabilizer of infinity and `(z, t)` with diagonal `(r mu, nu, mu / r)`:
/// the product `T_{-(z,t)} diag(r mu, nu, mu/r) T_{(z,t)}`.
pub fn stab_parabolic_fix(p: &HeisenbergPoint, mu: Quaternion, nu: Quaternion, r: f64) -> Result<Isometry> {
    check_unit(mu, "mu")?;
    check_unit(nu, "nu")?;
    check_positive(r)?;
    let Some((z, t)) = p.finite() else {
        return contract("second fixed point must be finite");
    };
    let back = translation(&HeisenbergPoint::new(-z, -t)?)?;
    let forth = translation(p)?;
    let h = Mat3::diag(mu * r, nu, mu * (1.0 / r));
    Isometry::new(back.matrix * h * forth.matrix, FormTag::J0)
}

/// `(q, alpha, beta)` of a diagonal stabilizer `diag(q alpha, beta, alpha / q)`.
pub fn diagonal_params(h: &Isometry) -> Result<(f64, Quaternion, Quaternion)> {
    let m = &h.matrix;
    let scale = m.max_abs();
    let off = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];
    if off.iter().any(|&ij| m[ij].norm() > 1e-10 * scale) {
        return contract("matrix is not of diagonal stabilizer shape");
    }
    let q = (m[(0, 0)].norm() / m[(2, 2)].norm()).sqrt();
    let alpha = m[(0, 0)].normalize()?;
    let beta = m[(1, 1)].normalize()?;
    if (m[(0, 0)].norm() - q).abs() > 1e-9 * q || !(m[(2, 2)] * q).abs_diff_eq(alpha, 1e-9) {
        return contract("diagonal entries do not have the form (q alpha, beta, alpha / q)");
    }
    Ok((q, alpha, beta))
}

/// Given a diagonal `H1` and the finite endpoint `p` of the second edge, the
/// stabilizer `H2` of `(infinity, p)` making `H1 H2` a pure translation.
pub fn lemma_pure_reconstruct(h1: &Isometry, p: &HeisenbergPoint) -> Result<Isometry> {
    let (q, alpha, beta) = diagonal_params(h1)?;
    let h2 = stab_parabolic_fix(p, alpha.inv()?, beta.inv()?, 1.0 / q)?;
    let prod = h1.then(&h2)?;
    if !is_pure_parabolic(&prod) {
        return Err(crate::error::Error::Numeric("reconstructed product is not unipotent".into()));
    }
    Ok(h2)
}

/// The anti-diagonal involution exchanging `0` and infinity.
pub fn inversion_swap() -> Isometry {
    Isometry::new(FormTag::J0.matrix(), FormTag::J0).expect("J0 preserves itself")
}

/// `(z, t) -> (-2 (|z|^2 + conj t)^-1 z, 4 conj t / (|z|^4 + |t|^2))`.
pub fn inversion_heis(p: &HeisenbergPoint) -> Result<HeisenbergPoint> {
    let Some((z, t)) = p.finite() else { return Ok(HeisenbergPoint::ORIGIN) };
    let d = Quaternion::real(z.norm_sqr()) + t.conj();
    if d.norm() == 0.0 {
        return Ok(HeisenbergPoint::Infinity);
    }
    let n = z.norm_sqr().powi(2) + t.norm_sqr();
    HeisenbergPoint::new(d.inv()? * z * -2.0, t.conj() * (4.0 / n))
}

/// `(z, t) -> (conj z, conj t)`.
pub fn reflection_real(p: &HeisenbergPoint) -> Result<HeisenbergPoint> {
    match p.finite() {
        None => Ok(HeisenbergPoint::Infinity),
        Some((z, t)) => HeisenbergPoint::new(z.conj(), t.conj()),
    }
}

/// `R(z, t) = (r mu (-2 (|z|^2 + t)^-1) conj z nu, r^2 mu 4t mu^-1 / (|z|^4 + |t|^2))`.
pub fn r_composite(mu: Quaternion, nu: Quaternion, r: f64, p: &HeisenbergPoint) -> Result<HeisenbergPoint> {
    check_unit(mu, "mu")?;
    check_unit(nu, "nu")?;
    check_positive(r)?;
    let Some((z, t)) = p.finite() else { return Ok(HeisenbergPoint::ORIGIN) };
    let d = Quaternion::real(z.norm_sqr()) + t;
    if d.norm() == 0.0 {
        return Ok(HeisenbergPoint::Infinity);
    }
    let n = z.norm_sqr().powi(2) + t.norm_sqr();
    let mi = mu.inv()?;
    HeisenbergPoint::new(mu * r * (d.inv()? * -2.0) * z.conj() * nu, mu * t * mi * (4.0 * r * r / n))
}

/// Outcome of trying to realize a boundary map by a matrix.
#[derive(Clone, Debug)]
pub struct Realization {
    /// Smallest mismatch found on the test points.
    pub mismatch: f64,
    pub matrix: Option<Isometry>,
}

/// Searches for an element of `Sp(2,1)` whose boundary action agrees with `f`.
///
/// The candidate is pinned by the images of infinity, `0` and `anchor`, and
/// the remaining circle of freedom is scanned; the mismatch is the largest
/// disagreement on `tests` at the best circle parameter.
pub fn realize_boundary_map<F>(f: F, anchor: &HeisenbergPoint, tests: &[HeisenbergPoint]) -> Result<Realization>
where
    F: Fn(&HeisenbergPoint) -> Result<HeisenbergPoint>,
{
    let src = [HeisenbergPoint::Infinity, HeisenbergPoint::ORIGIN, *anchor];
    let x = IdealTriple::new(src.map(|p| heis_to_siegel(&p)))?;
    let img: Vec<HeisenbergPoint> = src.iter().map(&f).collect::<Result<_>>()?;
    let y = IdealTriple::new([heis_to_siegel(&img[0]), heis_to_siegel(&img[1]), heis_to_siegel(&img[2])])?;
    if (x.cartan_quat() - y.cartan_quat()).abs() > tolerances::INVARIANT_MATCH {
        return Ok(Realization { mismatch: f64::INFINITY, matrix: None });
    }
    let mismatch_at = |theta: f64| -> Result<(f64, Isometry)> {
        let m = transport_family(&x, &y, theta)?;
        let g = Isometry::with_tolerance(m, FormTag::J0, 1e-7)?;
        let mut worst: f64 = 0.0;
        for p in tests {
            let a = siegel_to_heis(&heis_to_siegel(p).act(&g)?)?;
            let b = f(p)?;
            let d = match (a.finite(), b.finite()) {
                (Some((z1, t1)), Some((z2, t2))) => (z1 - z2).max_abs().max((t1 - t2).max_abs()),
                (None, None) => 0.0,
                _ => f64::INFINITY,
            };
            worst = worst.max(d);
        }
        Ok((worst, g))
    };
    let n = 720;
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..n {
        let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let (m, _) = mismatch_at(th)?;
        if m < best.0 {
            best = (m, th);
        }
    }
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let (mut lo, mut hi) = (best.1 - h, best.1 + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if mismatch_at(a)?.0 < mismatch_at(b)?.0 {
            hi = b;
        } else {
            lo = a;
        }
    }
    let (m, iso) = mismatch_at(0.5 * (lo + hi))?;
    Ok(Realization { mismatch: m, matrix: Some(iso) })
}

/// Stabilizers of `infinity, 0, (1, it)`: `diag(e^{i theta})` over the quaternions,
/// only the identity over the complex numbers.
pub fn fix_three_family(theta: f64, field: FieldTag) -> Result<Isometry> {
    if field != FieldTag::Quaternion {
        if theta.sin().abs() > 1e-15 || theta.cos() < 0.0 {
            return contract("over the complex numbers the only such isometry is the identity");
        }
        return Ok(Isometry::identity(FormTag::J0));
    }
    let mu = Quaternion::complex(theta.cos(), theta.sin());
    Isometry::new(Mat3::diag(mu, mu, mu), FormTag::J0)
}

/// `Im(w conj z) = 0` for finite `p = (z, t)`, `q = (w, s)`.
pub fn pure_parabolics_commute(p: &HeisenbergPoint, q: &HeisenbergPoint) -> Result<bool> {
    let (Some((z, _)), Some((w, _))) = (p.finite(), q.finite()) else {
        return contract("commutation test needs finite points");
    };
    Ok((w * z.conj()).im_norm() <= tolerances::COMMUTE)
}

/// Normalizes away the scalar ambiguity of a projective matrix: complex matrices are
/// divided by `trace / 3`, quaternionic ones only by the sign of the real trace.
pub fn projective_normalize(m: &Mat3) -> Mat3 {
    let tr = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
    if m.field() <= FieldTag::Complex {
        if tr.norm() == 0.0 {
            return *m;
        }
        let s = (tr * (1.0 / 3.0)).inv().expect("nonzero trace");
        m.scale_left(s)
    } else if tr.re < 0.0 {
        -*m
    } else {
        *m
    }
}

/// Unipotency after projective normalization: `|(A - I)^3| < 1e-8`.
pub fn is_pure_parabolic(a: &Isometry) -> bool {
    let n = projective_normalize(&a.matrix) - Mat3::IDENTITY;
    n.power(3).max_abs() < tolerances::UNIPOTENT
}

/// Projectively normalized matrix equals the identity entrywise to `tol`.
pub fn is_projective_identity(m: &Mat3, tol: f64) -> bool {
    projective_normalize(m).max_abs_diff(&Mat3::IDENTITY) <= tol
}

/// Boundary action of a translation through the group law: `p -> p q`.
pub fn translation_heis(q: &HeisenbergPoint, p: &HeisenbergPoint) -> Result<HeisenbergPoint> {
    match p {
        HeisenbergPoint::Infinity => Ok(HeisenbergPoint::Infinity),
        _ => heis_mul(p, q),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::ImScalar;

    fn hp(z: Quaternion, t: Quaternion) -> HeisenbergPoint {
        HeisenbergPoint::new(z, t).unwrap()
    }

    fn matrix_image(g: &Isometry, p: &HeisenbergPoint) -> HeisenbergPoint {
        siegel_to_heis(&heis_to_siegel(p).act(g).unwrap()).unwrap()
    }

    #[test]
    fn dilation_examples() {
        let g = dilation(O, O, 3.0).unwrap();
        let p = hp(Quaternion::new(1.0, 2.0, 0.0, 1.0), Quaternion::pure(0.0, 1.0, 0.0));
        let img = matrix_image(&g, &p);
        assert!(img.approx_eq(&hp(Quaternion::new(3.0, 6.0, 0.0, 3.0), Quaternion::pure(0.0, 9.0, 0.0)), 1e-13));
        assert_eq!(dilation(O, O, 1.0).unwrap().matrix, Mat3::IDENTITY);
        let j = dilation(Quaternion::J, O, 1.0).unwrap();
        let img = matrix_image(&j, &hp(Quaternion::I, Z));
        assert!(img.approx_eq(&hp(-Quaternion::I, Z), 1e-15));
    }

    #[test]
    fn translation_product_example() {
        let a = translation(&hp(O, Z)).unwrap();
        let b = translation(&hp(Quaternion::I, Z)).unwrap();
        let c = translation(&hp(Quaternion::complex(1.0, 1.0), Quaternion::pure(2.0, 0.0, 0.0))).unwrap();
        assert!(a.then(&b).unwrap().matrix.max_abs_diff(&c.matrix) < 1e-15);
    }

    #[test]
    fn conjugated_stabilizer_matches_displayed_entries() {
        let z = Quaternion::new(0.5, -1.0, 0.3, 2.0);
        let t = Quaternion::pure(0.7, -0.1, 0.4);
        let mu = Quaternion::new(1.0, 1.0, -1.0, 2.0).normalize().unwrap();
        let nu = Quaternion::new(0.0, 2.0, 1.0, 1.0).normalize().unwrap();
        let r = 1.7;
        let g = stab_parabolic_fix(&hp(z, t), mu, nu, r).unwrap().matrix;
        let zb = z.conj();
        let n = Quaternion::real(z.norm_sqr());
        let e10 = zb * mu * r - nu * zb;
        let e20 = (-n - t) * 0.5 * mu * r + z * nu * zb + mu * (1.0 / r) * ((-n + t) * 0.5);
        let e21 = -(z * nu) + mu * (1.0 / r) * z;
        assert!(g[(1, 0)].abs_diff_eq(e10, 1e-13));
        assert!(g[(2, 0)].abs_diff_eq(e20, 1e-13));
        assert!(g[(2, 1)].abs_diff_eq(e21, 1e-13));
        assert!(g[(0, 0)].abs_diff_eq(mu * r, 1e-15));
        let fixed = matrix_image(&stab_parabolic_fix(&hp(z, t), mu, nu, r).unwrap(), &hp(z, t));
        assert!(fixed.approx_eq(&hp(z, t), 1e-12));
    }

    #[test]
    fn inversion_examples() {
        let i = inversion_swap();
        assert_eq!((i.matrix * i.matrix), Mat3::IDENTITY);
        let p = inversion_heis(&hp(O, Z)).unwrap();
        assert!(p.approx_eq(&hp(Quaternion::real(-2.0), Z), 1e-15));
        assert_eq!(inversion_heis(&HeisenbergPoint::ORIGIN).unwrap(), HeisenbergPoint::Infinity);
        let q = hp(Quaternion::new(0.2, 1.0, -0.5, 0.1), Quaternion::pure(0.3, 0.0, 2.0));
        assert!(matrix_image(&i, &q).approx_eq(&inversion_heis(&q).unwrap(), 1e-12));
    }

    #[test]
    fn reflection_and_composite() {
        let p = reflection_real(&hp(Quaternion::I, Quaternion::pure(0.6, 0.0, 0.0))).unwrap();
        assert!(p.approx_eq(&hp(-Quaternion::I, Quaternion::pure(-0.6, 0.0, 0.0)), 0.0));
        let q = hp(Quaternion::new(0.2, 1.0, -0.5, 0.1), Quaternion::pure(0.3, 0.0, 2.0));
        let two = inversion_heis(&reflection_real(&q).unwrap()).unwrap();
        assert!(r_composite(O, O, 1.0, &q).unwrap().approx_eq(&two, 1e-12));
    }

    #[test]
    fn three_point_family() {
        let std = [HeisenbergPoint::Infinity, HeisenbergPoint::ORIGIN, hp(O, Quaternion::I)];
        assert_eq!(fix_three_family(0.0, FieldTag::Quaternion).unwrap().matrix, Mat3::IDENTITY);
        let g = fix_three_family(std::f64::consts::FRAC_PI_2, FieldTag::Quaternion).unwrap();
        for p in &std {
            assert!(matrix_image(&g, p).approx_eq(p, 1e-14));
        }
        let j = dilation(Quaternion::J, O, 1.0).unwrap();
        assert!(!matrix_image(&j, &std[2]).approx_eq(&std[2], 1e-3));
        assert!(fix_three_family(0.3, FieldTag::Complex).is_err());
    }

    #[test]
    fn commuting_translations_examples() {
        let t = ImScalar::from_parts(0.4, 0.1, 0.0).get();
        assert!(pure_parabolics_commute(&hp(O, Z), &hp(Quaternion::real(2.0), Z)).unwrap());
        assert!(!pure_parabolics_commute(&hp(O, Z), &hp(Quaternion::I, Z)).unwrap());
        assert!(pure_parabolics_commute(&hp(Quaternion::new(1.0, 2.0, 3.0, 4.0), t), &hp(Z, Quaternion::K)).unwrap());
    }

    #[test]
    fn lemma_reconstruction_example() {
        let h1 = Isometry::new(Mat3::diag(Quaternion::I * 2.0, Quaternion::J, Quaternion::I * 0.5), FormTag::J0).unwrap();
        let p = hp(Quaternion::new(0.3, 0.1, 0.0, -1.0), Quaternion::pure(0.0, 0.5, 0.5));
        let h2 = lemma_pure_reconstruct(&h1, &p).unwrap();
        let m = &h2.matrix;
        assert!((m[(0, 0)]).abs_diff_eq(-Quaternion::I * 0.5, 1e-14));
        assert!((m[(1, 1)]).abs_diff_eq(-Quaternion::J, 1e-14));
        assert!(is_pure_parabolic(&h1.then(&h2).unwrap()));
        let id = lemma_pure_reconstruct(&Isometry::identity(FormTag::J0), &p).unwrap();
        assert!(id.matrix.max_abs_diff(&Mat3::IDENTITY) < 1e-14);
        let bad = translation(&p).unwrap();
        assert!(lemma_pure_reconstruct(&bad, &p).is_err());
    }
}
