//! Cartan angular invariants, transport of ideal triples, the projection
//! distance identity and geometric centers of finite boundary sets.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::boundary::{horo_lift_j0, proj_to_horo, HorosphericalPoint};
use crate::error::{contract, Error, Result};
use crate::hermitian::{row_scale_left, FormTag, HVector, HermitianForm, Isometry, Mat3, PointClass, ProjPoint, Row};
use crate::scalars::{rotation_between, FieldTag, Quaternion};
use crate::tolerances;

/// Multiplier of the logarithm in the Busemann function; 1 matches the
/// normalization `cosh^2(d/2) = |<X,Y>|^2 / (<X,X><Y,Y>)`.
pub const BUSEMANN_SCALE: f64 = 1.0;

/// Three ordered, pairwise distinct null points sharing one form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdealTriple {
    pub points: [ProjPoint; 3],
}

impl IdealTriple {
    pub fn new(points: [ProjPoint; 3]) -> Result<Self> {
        let form = points[0].form();
        let points = points.map(|p| if p.form() == form { p } else { p.to_form(form) });
        if points.iter().any(|p| p.class != PointClass::Null) {
            return Err(Error::DegenerateTriple("all three points must be null".into()));
        }
        let j = form.form();
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            let x = points[a].coords();
            let y = points[b].coords();
            let h = j.pairing(x, y).norm();
            if h <= 1e-9 * points[a].lift.norm() * points[b].lift.norm() {
                return Err(Error::DegenerateTriple(format!("points {} and {} coincide", a + 1, b + 1)));
            }
        }
        Ok(IdealTriple { points })
    }

    pub fn form(&self) -> FormTag {
        self.points[0].form()
    }

    pub fn field(&self) -> FieldTag {
        self.points.iter().fold(FieldTag::Real, |f, p| f.join(p.lift.field))
    }

    pub fn lifts(&self) -> [Row; 3] {
        self.points.map(|p| *p.coords())
    }

    /// `<x1,x2><x2,x3><x3,x1>` in this order.
    pub fn triple_product(&self) -> Quaternion {
        let [a, b, c] = self.lifts();
        let j = self.form().form();
        j.pairing(&a, &b) * j.pairing(&b, &c) * j.pairing(&c, &a)
    }

    /// `arg(-P)` in `(-pi/2, pi/2]`.
    pub fn cartan_complex(&self) -> Result<f64> {
        let p = self.triple_product();
        if p.j.abs().max(p.k.abs()) > 1e-12 * p.norm() {
            return contract("complex invariant of a triple that is not complex");
        }
        let mut v = (-p.i).atan2(-p.re);
        if v <= -FRAC_PI_2 {
            v += PI;
        }
        Ok(v)
    }

    /// `arccos(|Re P| / |P|)` in `[0, pi/2]`, evaluated as `atan2(|Im P|, |Re P|)`.
    pub fn cartan_quat(&self) -> f64 {
        let p = self.triple_product();
        p.im_norm().atan2(p.re.abs())
    }

    pub fn act(&self, g: &Isometry) -> Result<IdealTriple> {
        Ok(IdealTriple { points: [self.points[0].act(g)?, self.points[1].act(g)?, self.points[2].act(g)?] })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Complex,
    Quaternionic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularInvariant {
    pub value: f64,
    pub convention: Convention,
}

pub fn triple_product(x: &IdealTriple) -> Quaternion {
    x.triple_product()
}

pub fn cartan_complex(x: &IdealTriple) -> Result<AngularInvariant> {
    Ok(AngularInvariant { value: x.cartan_complex()?, convention: Convention::Complex })
}

pub fn cartan_quat(x: &IdealTriple) -> AngularInvariant {
    AngularInvariant { value: x.cartan_quat(), convention: Convention::Quaternionic }
}

/// Reduction to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// `A(123) + A(134) - A(124) - A(234)` reduced to `(-pi, pi]`.
pub fn cocycle_defect(x: &[ProjPoint; 4]) -> Result<f64> {
    let a = |i: usize, j: usize, k: usize| IdealTriple::new([x[i], x[j], x[k]])?.cartan_complex();
    Ok(wrap_angle(a(0, 1, 2)? + a(0, 2, 3)? - a(0, 1, 3)? - a(1, 2, 3)?))
}

fn pair_matrix(j: &HermitianForm, v: &[Row; 3]) -> [[Quaternion; 3]; 3] {
    let mut g = [[Quaternion::ZERO; 3]; 3];
    for (a, row) in g.iter_mut().enumerate() {
        for (b, e) in row.iter_mut().enumerate() {
            *e = j.pairing(&v[a], &v[b]);
        }
    }
    g
}

/// Matrix sending the lifts `x` to rescaled copies of `y`, defined for any
/// triples in general position.
///
/// The rescaling makes all pairwise products agree when the invariants of
/// `x` and `y` agree; otherwise the result is a smooth extension that is not
/// an isometry. `theta` rotates the first rescaling about the imaginary axis
/// of the normalized triple product of `x`, which sweeps the stabilizer circle.
pub fn transport_lifts(x: &[Row; 3], y: &[Row; 3], form: FormTag, theta: f64) -> Result<Mat3> {
    let j = form.form();
    let gx = pair_matrix(&j, x);
    let gy = pair_matrix(&j, y);
    let k = gy[0][1].conj().inv()? * gy[1][2] * gy[0][2].inv()?;
    let l = gx[0][1].conj().inv()? * gx[1][2] * gx[0][2].inv()?;
    let mut u = rotation_between(k.im_vec(), l.im_vec())
        .ok_or_else(|| Error::NoIsometry("triple products have opposite imaginary directions".into()))?;
    let ln = l.im_norm();
    if theta != 0.0 && ln > 0.0 {
        let axis = [l.i / ln, l.j / ln, l.k / ln];
        u = Quaternion::from_axis_angle(axis, theta) * u;
    }
    let rho = (k.norm() / l.norm()).sqrt();
    let l1 = u * rho;
    let l1ci = l1.conj().inv()?;
    let l2 = gx[0][1].conj() * l1ci * gy[0][1].conj().inv()?;
    let l3 = gx[0][2].conj() * l1ci * gy[0][2].conj().inv()?;
    let src = Mat3::from_rows(*x);
    let dst = Mat3::from_rows([row_scale_left(l1, &y[0]), row_scale_left(l2, &y[1]), row_scale_left(l3, &y[2])]);
    Ok(src.inverse()? * dst)
}

/// Member `theta` of the family of isometries taking `x` to `y`, without
/// checking the invariants.
pub fn transport_family(x: &IdealTriple, y: &IdealTriple, theta: f64) -> Result<Mat3> {
    let yl = if y.form() == x.form() { y.lifts() } else { y.points.map(|p| *p.to_form(x.form()).coords()) };
    transport_lifts(&x.lifts(), &yl, x.form(), theta)
}

#[derive(Clone, Copy, Debug)]
pub struct Transport {
    pub isometry: Isometry,
    /// Condition number of the source lift matrix.
    pub condition: f64,
}

/// The isometry with `f(x_i) = y_i`, built by rescaling lifts until all
/// pairwise products agree.
pub fn triple_transport(x: &IdealTriple, y: &IdealTriple) -> Result<Transport> {
    triple_transport_theta(x, y, 0.0)
}

pub fn triple_transport_theta(x: &IdealTriple, y: &IdealTriple, theta: f64) -> Result<Transport> {
    let complex = x.field().join(y.field()) <= FieldTag::Complex;
    let (a, b) = if complex {
        (x.cartan_complex()?, y.cartan_complex()?)
    } else {
        (x.cartan_quat(), y.cartan_quat())
    };
    if (a - b).abs() > tolerances::INVARIANT_MATCH {
        return Err(Error::NoIsometry(format!("angular invariants differ: {a} vs {b}")));
    }
    let m = transport_family(x, y, theta)?;
    let condition = Mat3::from_rows(x.lifts()).condition();
    if condition > 1e10 {
        log::warn!("triple transport from a nearly degenerate triple (condition {condition:.2e})");
    }
    let scale = m.max_abs().max(1.0).powi(2);
    let isometry = Isometry::with_tolerance(m, x.form(), tolerances::FORM * scale)?;
    for i in 0..3 {
        let img = x.points[i].act(&isometry)?;
        if !img.approx_eq(&y.points[i].to_form(x.form()), 1e-8) {
            return Err(Error::Numeric(format!("transport misses vertex {}", i + 1)));
        }
    }
    Ok(Transport { isometry, condition })
}

/// Isometry of `Jstd` moving `x1, x2` to the ball points `(0,-1), (0,1)`.
fn normalize_pair(x1: &Row, x2: &Row) -> Result<Mat3> {
    let j = FormTag::Jstd.form();
    let c = j.pairing(x1, x2);
    let lam = (c.inv()? * -2.0).conj();
    let x2 = row_scale_left(lam, x2);
    let basis = [
        [Quaternion::ONE, Quaternion::ZERO, Quaternion::ZERO],
        [Quaternion::ZERO, Quaternion::ONE, Quaternion::ZERO],
        [Quaternion::ZERO, Quaternion::ZERO, Quaternion::ONE],
    ];
    let mut best: Option<(f64, Row)> = None;
    for e in basis {
        let a = j.pairing(&e, &x2) * -0.5;
        let b = j.pairing(&e, x1) * -0.5;
        let n = [
            e[0] - a * x1[0] - b * x2[0],
            e[1] - a * x1[1] - b * x2[1],
            e[2] - a * x1[2] - b * x2[2],
        ];
        let nn = j.pairing(&n, &n).re;
        if best.as_ref().map_or(true, |(v, _)| nn > *v) {
            best = Some((nn, n));
        }
    }
    let (nn, n) = best.expect("three candidates");
    if !(nn > 0.0) {
        return Err(Error::Numeric("no positive polar vector".into()));
    }
    let n = row_scale_left(Quaternion::real(1.0 / nn.sqrt()), &n);
    let src = Mat3::from_rows([*x1, x2, n]);
    let dst = Mat3::from_real([[0.0, -1.0, 1.0], [0.0, 1.0, 1.0], [1.0, 0.0, 0.0]]);
    Ok(src.inverse()? * dst)
}

/// Ball coordinates `(z', z_n)` of `x3` after moving `x1, x2` to `(0,-1), (0,1)`.
pub fn normalized_third_point(x: &IdealTriple) -> Result<(Quaternion, Quaternion)> {
    let l = x.points.map(|p| *p.to_form(FormTag::Jstd).coords());
    let a = normalize_pair(&l[0], &l[1])?;
    let y = a.apply(&l[2]);
    let s = y[2].inv()?;
    Ok((s * y[0], s * y[1]))
}

/// `1 + 2|p - s|^2 / ((1 - |p|^2)(1 - s^2)) - 1` for real `s = tanh(tau / 2)`.
fn cosh_minus_one(p: Quaternion, tau: f64) -> f64 {
    let s = (0.5 * tau).tanh();
    let ch = (0.5 * tau).cosh();
    2.0 * (p - Quaternion::real(s)).norm_sqr() * ch * ch / (1.0 - p.norm_sqr())
}

/// `sinh` of the distance from the projection of `x3` onto the quaternionic
/// line through `x1, x2` to the real geodesic through them.
///
/// The distance is computed in the Poincare ball model of that line by a
/// one-dimensional minimization along the geodesic.
pub fn project_distance(x: &IdealTriple) -> Result<f64> {
    let (_, zn) = normalized_third_point(x)?;
    if zn.norm() >= 1.0 {
        return Err(Error::Numeric("projection left the ball".into()));
    }
    if zn.im_norm() == 0.0 {
        return Ok(0.0);
    }
    let center = 2.0 * zn.re.clamp(-1.0 + 1e-300, 1.0 - 1e-16).atanh();
    let (mut lo, mut hi) = (center - 40.0, center + 40.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (cosh_minus_one(zn, a), cosh_minus_one(zn, b));
    for _ in 0..200 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = cosh_minus_one(zn, a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = cosh_minus_one(zn, b);
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let d = fa.min(fb);
    Ok((d * (d + 2.0)).sqrt())
}

/// Busemann function `log(|<X, Xi>|^2 / -<X,X>) - (same at o)` in `J0`,
/// with `o` the lift `(-1/2, 0, 1)`.
pub fn busemann(x: &Row, xi: &Row) -> f64 {
    let j = FormTag::J0.form();
    let o = [Quaternion::real(-0.5), Quaternion::ZERO, Quaternion::ONE];
    let b = |v: &Row| (j.pairing(v, xi).norm_sqr() / -j.pairing(v, v).re).ln();
    BUSEMANN_SCALE * (b(x) - b(&o))
}

struct CenterProblem {
    xis: Vec<Row>,
    field: FieldTag,
}

impl CenterProblem {
    fn dim(&self) -> usize {
        match self.field {
            FieldTag::Quaternion => 8,
            _ => 4,
        }
    }

    fn point(&self, y: &[f64]) -> Row {
        let (z, t, u) = match self.field {
            FieldTag::Quaternion => (Quaternion::new(y[0], y[1], y[2], y[3]), Quaternion::pure(y[4], y[5], y[6]), y[7]),
            _ => (Quaternion::complex(y[0], y[1]), Quaternion::pure(y[2], 0.0, 0.0), y[3]),
        };
        let h = HorosphericalPoint { z, t: crate::scalars::ImScalar::new(t).expect("pure"), height: u.exp() };
        horo_lift_j0(&h)
    }

    fn value(&self, y: &[f64]) -> f64 {
        let x = self.point(y);
        self.xis.iter().map(|xi| busemann(&x, xi)).sum()
    }

    fn gradient(&self, y: &[f64], h: f64) -> DVector<f64> {
        let n = self.dim();
        let mut g = DVector::zeros(n);
        let mut w = y.to_vec();
        for i in 0..n {
            w[i] = y[i] + h;
            let fp = self.value(&w);
            w[i] = y[i] - h;
            let fm = self.value(&w);
            w[i] = y[i];
            g[i] = (fp - fm) / (2.0 * h);
        }
        g
    }

    fn hessian(&self, y: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let h = 1e-4;
        let mut m = DMatrix::zeros(n, n);
        let mut w = y.to_vec();
        for i in 0..n {
            w[i] = y[i] + h;
            let gp = self.gradient(&w, 1e-5);
            w[i] = y[i] - h;
            let gm = self.gradient(&w, 1e-5);
            w[i] = y[i];
            m.set_column(i, &((gp - gm) / (2.0 * h)));
        }
        (&m + m.transpose()) * 0.5
    }
}

/// Result of the center iteration.
#[derive(Clone, Copy, Debug)]
pub struct Center {
    pub point: ProjPoint,
    pub gradient_norm: f64,
    pub iterations: usize,
}

/// Minimizer of the Busemann sum `sum_i B_o(x, xi_i)`.
///
/// Damped Newton steps with a finite-difference Hessian, falling back to the
/// negative gradient whenever the Hessian is not positive definite; both use
/// backtracking on the objective. The result is expressed in the form of the
/// first input point.
pub fn geometric_center(points: &[ProjPoint]) -> Result<Center> {
    if points.len() < 3 {
        return contract("geometric center needs at least three points");
    }
    let form = points[0].form();
    let mut field = FieldTag::Complex;
    let mut xis = Vec::with_capacity(points.len());
    for p in points {
        if p.class != PointClass::Null {
            return contract("geometric center of non-boundary points");
        }
        field = field.join(p.lift.field);
        xis.push(*p.to_form(FormTag::J0).coords());
    }
    for a in 0..xis.len() {
        for b in a + 1..xis.len() {
            let h = FormTag::J0.form().pairing(&xis[a], &xis[b]).norm();
            let s = HVector::new(xis[a], FormTag::J0).norm() * HVector::new(xis[b], FormTag::J0).norm();
            if h <= 1e-9 * s {
                return Err(Error::DegenerateTriple(format!("points {} and {} coincide", a + 1, b + 1)));
            }
        }
    }
    let prob = CenterProblem { xis, field };
    let n = prob.dim();
    let mut y = vec![0.0; n];
    let mut f = prob.value(&y);
    let mut last_grad = f64::INFINITY;
    for it in 0..500 {
        let g = prob.gradient(&y, tolerances::FD_STEP);
        last_grad = g.norm();
        if last_grad < tolerances::CENTER_GRADIENT {
            let point = to_point(&prob, &y, form)?;
            return Ok(Center { point, gradient_norm: last_grad, iterations: it });
        }
        let hess = prob.hessian(&y);
        let newton = hess.clone().cholesky().map(|c| -c.solve(&g));
        let dir = match newton {
            Some(d) if d.dot(&g) < 0.0 => d,
            _ => -g.clone(),
        };
        let slope = dir.dot(&g);
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand: Vec<f64> = y.iter().zip(dir.iter()).map(|(a, d)| a + step * d).collect();
            let fc = prob.value(&cand);
            if fc.is_finite() && fc <= f + 1e-4 * step * slope {
                y = cand;
                f = fc;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Err(Error::Numeric(format!("geometric center did not converge, last gradient {last_grad:.3e} at {y:?}")))
}

fn to_point(prob: &CenterProblem, y: &[f64], form: FormTag) -> Result<ProjPoint> {
    let p = ProjPoint::from_coords(prob.point(y), FormTag::J0)?;
    Ok(p.to_form(form))
}

/// Horospherical coordinates of an interior point in either form.
pub fn horospherical(p: &ProjPoint) -> Result<HorosphericalPoint> {
    proj_to_horo(p)
}
