//! Residual maps of the gluing problem, a damped Gauss-Newton solver and
//! numerical local dimension.
//!
//! Parameter vectors follow [`TetraParams::from_complex_vec`] (7 reals),
//! [`TetraParams::from_quaternionic_vec`] (18 reals, the last three being the
//! stabilizer angles) and `(Re u1, Im u1, Re u2, Im u2)` for the real locus.
//!
//! Gauge ledger used by [`local_dimension`]:
//!
//! | map           | n  | documented gauge                          |
//! |---------------|----|-------------------------------------------|
//! | complex       | 7  | 0 (normalization fixes p1, p2, q1)        |
//! | quaternionic  | 18 | 4 (stabilizer of p1, p2, q1 plus 3 angles) |
//! | real locus    | 4  | 0                                         |
//!
//! Besides the documented count, the report carries the measured dimension of
//! (gauge span) ∩ (Jacobian kernel).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::boundary::HeisenbergPoint;
use crate::cartan::{wrap_angle, IdealTriple};
use crate::error::{contract, Error, Result};
use crate::gluing::{checked_holonomies, closing_theta, face_constraints, gluing_matrices, real_locus_params, TetraParams};
use crate::hermitian::{HermitianForm, Mat3};
use crate::isometries::dilation;
use crate::scalars::Quaternion;
use crate::tolerances;

/// Which edge holonomies enter the residual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeSet {
    /// Only `H1` (the paper's count; `H2` follows by the reconstruction lemma).
    First,
    /// `H1` and `H2`.
    Both,
}

pub trait ResidualMap: Sync {
    fn name(&self) -> &'static str;
    fn params(&self) -> usize;
    fn residuals(&self) -> usize;
    /// Documented gauge count subtracted by [`local_dimension`].
    fn gauge(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>>;
    /// Tangent vectors of the known gauge directions at `x`.
    fn gauge_directions(&self, _x: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok(Vec::new())
    }
    /// Parameter indices that leave the complex locus.
    fn off_complex_coords(&self) -> Vec<usize> {
        Vec::new()
    }
}

/// `(log|a|, log(a/|a|), log(b/|b|))` for the diagonal entries `a = H00`, `b = H11`
/// of a holonomy fixing `p1` and `p2`, after fixing the overall sign.
pub fn stabilizer_log(h: &Mat3) -> Result<[f64; 7]> {
    let tr = h[(0, 0)] + h[(1, 1)] + h[(2, 2)];
    let h = if tr.re < 0.0 { -*h } else { *h };
    let a = h[(0, 0)];
    let b = h[(1, 1)];
    let la = a.normalize()?.ln()?;
    let lb = b.normalize()?.ln()?;
    Ok([a.norm().ln(), la.i, la.j, la.k, lb.i, lb.j, lb.k])
}

fn push_matrix(out: &mut Vec<f64>, m: &Mat3, complex: bool) {
    for row in m.rows() {
        for e in row {
            out.push(e.re);
            out.push(e.i);
            if !complex {
                out.push(e.j);
                out.push(e.k);
            }
        }
    }
}

fn signed_defect(h: &Mat3) -> Mat3 {
    let tr = h[(0, 0)] + h[(1, 1)] + h[(2, 2)];
    let h = if tr.re < 0.0 { -*h } else { *h };
    h - Mat3::IDENTITY
}

#[derive(Clone, Copy, Debug)]
pub struct ComplexResidual {
    pub edges: EdgeSet,
}

impl ComplexResidual {
    pub const FIRST: ComplexResidual = ComplexResidual { edges: EdgeSet::First };
}

impl ResidualMap for ComplexResidual {
    fn name(&self) -> &'static str {
        "complex"
    }
    fn params(&self) -> usize {
        7
    }
    fn residuals(&self) -> usize {
        match self.edges {
            EdgeSet::First => 4,
            EdgeSet::Both => 22,
        }
    }
    fn gauge(&self) -> usize {
        0
    }
    /// `[Eq. 4 defect, arg defect, Re c - 1, Im c]` with `c = H1[0][0] / H1[1][1]`;
    /// `Both` appends `H2 / H2[2][2] - I`.
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = TetraParams::from_complex_vec(x)?;
        let mut out = face_constraints(&p)?;
        let g = gluing_matrices(&p)?;
        let (h1, h2) = checked_holonomies(&p, &g)?;
        let c = h1[(0, 0)] * h1[(1, 1)].inv()?;
        out.push(c.re - 1.0);
        out.push(c.i);
        if self.edges == EdgeSet::Both {
            let d = h2.scale_left(h2[(2, 2)].inv()?) - Mat3::IDENTITY;
            push_matrix(&mut out, &d, true);
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuaternionicResidual {
    pub edges: EdgeSet,
}

impl QuaternionicResidual {
    pub const FIRST: QuaternionicResidual = QuaternionicResidual { edges: EdgeSet::First };
}

/// Lifts a complex 7-vector and angles into the 18-parameter quaternionic chart.
pub fn embed_complex(x: &[f64], thetas: [f64; 3]) -> Vec<f64> {
    let (t, s, r, zr, zi, wr, wi) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6]);
    vec![t, zr, zi, 0.0, 0.0, s, 0.0, 0.0, wr, wi, 0.0, 0.0, r, 0.0, 0.0, thetas[0], thetas[1], thetas[2]]
}

fn conjugated_params(x: &[f64], phi: f64) -> Result<Vec<f64>> {
    let p = TetraParams::from_quaternionic_vec(x)?;
    let g = dilation(Quaternion::complex(phi.cos(), phi.sin()), Quaternion::ONE, 1.0)?;
    let map = |q: &HeisenbergPoint| -> Result<HeisenbergPoint> {
        crate::boundary::siegel_to_heis(&crate::boundary::heis_to_siegel(q).act(&g)?)
    };
    let q = TetraParams { q2: map(&p.q2)?, q3: map(&p.q3)?, ..p };
    q.to_quaternionic_vec()
}

impl ResidualMap for QuaternionicResidual {
    fn name(&self) -> &'static str {
        "quaternion"
    }
    fn params(&self) -> usize {
        18
    }
    fn residuals(&self) -> usize {
        match self.edges {
            EdgeSet::First => 10,
            EdgeSet::Both => 46,
        }
    }
    fn gauge(&self) -> usize {
        4
    }
    /// Three face-invariant differences then the stabilizer log-coordinates of
    /// `H1`; `Both` appends `±H2 - I`.
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = TetraParams::from_quaternionic_vec(x)?;
        let mut out = face_constraints(&p)?;
        let g = gluing_matrices(&p)?;
        let (h1, h2) = checked_holonomies(&p, &g)?;
        out.extend_from_slice(&stabilizer_log(&h1)?);
        if self.edges == EdgeSet::Both {
            push_matrix(&mut out, &signed_defect(&h2), false);
        }
        Ok(out)
    }
    /// Conjugation by `diag(e^{i phi}, e^{i phi}, e^{i phi})`, which fixes
    /// `p1, p2, q1`, and the three angle axes.
    fn gauge_directions(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let h = 1e-6;
        let a = conjugated_params(x, h)?;
        let b = conjugated_params(x, -h)?;
        let conj: Vec<f64> = a.iter().zip(&b).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let mut out = vec![conj];
        for k in 15..18 {
            let mut e = vec![0.0; 18];
            e[k] = 1.0;
            out.push(e);
        }
        Ok(out)
    }
    fn off_complex_coords(&self) -> Vec<usize> {
        vec![3, 4, 6, 7, 10, 11, 13, 14]
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RealLocusResidual {
    pub edges: EdgeSet,
}

impl ResidualMap for RealLocusResidual {
    fn name(&self) -> &'static str {
        "real"
    }
    fn params(&self) -> usize {
        4
    }
    fn residuals(&self) -> usize {
        match self.edges {
            EdgeSet::First => 7,
            EdgeSet::Both => 43,
        }
    }
    fn gauge(&self) -> usize {
        0
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != 4 {
            return Err(Error::Decode("real-locus parameters need 4 reals".into()));
        }
        let p = real_locus_params(Quaternion::complex(x[0], x[1]), Quaternion::complex(x[2], x[3]))?;
        let g = gluing_matrices(&p)?;
        let (h1, h2) = checked_holonomies(&p, &g)?;
        let mut out = stabilizer_log(&h1)?.to_vec();
        if self.edges == EdgeSet::Both {
            push_matrix(&mut out, &signed_defect(&h2), false);
        }
        Ok(out)
    }
}

/// Coordinates scaled as `x = s * y`, for rank-threshold audits.
pub struct Rescaled<'a> {
    pub inner: &'a dyn ResidualMap,
    pub scale: Vec<f64>,
}

impl Rescaled<'_> {
    pub fn to_inner(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.scale).map(|(y, s)| y * s).collect()
    }
    pub fn from_inner(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.scale).map(|(x, s)| x / s).collect()
    }
}

impl ResidualMap for Rescaled<'_> {
    fn name(&self) -> &'static str {
        self.inner.name()
    }
    fn params(&self) -> usize {
        self.inner.params()
    }
    fn residuals(&self) -> usize {
        self.inner.residuals()
    }
    fn gauge(&self) -> usize {
        self.inner.gauge()
    }
    fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.inner.eval(&self.to_inner(y))
    }
    fn gauge_directions(&self, y: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok(self.inner.gauge_directions(&self.to_inner(y))?.iter().map(|v| self.from_inner(v)).collect())
    }
    fn off_complex_coords(&self) -> Vec<usize> {
        self.inner.off_complex_coords()
    }
}

/// The complex residual with the three chart values pinned to `target`.
#[derive(Clone, Copy, Debug)]
pub struct ChartTargetResidual {
    pub target: [f64; 3],
}

impl ResidualMap for ChartTargetResidual {
    fn name(&self) -> &'static str {
        "chart-target"
    }
    fn params(&self) -> usize {
        7
    }
    fn residuals(&self) -> usize {
        7
    }
    fn gauge(&self) -> usize {
        0
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = ComplexResidual::FIRST.eval(x)?;
        let c = angular_chart(x)?;
        out.extend((0..3).map(|k| wrap_angle(c[k] - self.target[k])));
        Ok(out)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn central(map: &dyn ResidualMap, x: &[f64], k: usize, h: f64) -> Result<Vec<f64>> {
    let mut a = x.to_vec();
    let mut b = x.to_vec();
    a[k] += h;
    b[k] -= h;
    let fa = map.eval(&a)?;
    let fb = map.eval(&b)?;
    Ok(fa.iter().zip(&fb).map(|(p, q)| (p - q) / (2.0 * h)).collect())
}

/// Central finite-difference Jacobian with step `h`.
pub fn jacobian_with_step(map: &dyn ResidualMap, x: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let m = map.residuals();
    let n = x.len();
    let mut j = DMatrix::zeros(m, n);
    for k in 0..n {
        let col = central(map, x, k, h)?;
        if col.len() != m {
            return contract(format!("{} residual has length {}, expected {m}", map.name(), col.len()));
        }
        for (i, v) in col.into_iter().enumerate() {
            j[(i, k)] = v;
        }
    }
    Ok(j)
}

pub fn jacobian(map: &dyn ResidualMap, x: &[f64]) -> Result<DMatrix<f64>> {
    jacobian_with_step(map, x, tolerances::FD_STEP)
}

/// Richardson extrapolation of central differences at steps `h` and `h/2`.
pub fn jacobian_richardson(map: &dyn ResidualMap, x: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let a = jacobian_with_step(map, x, h)?;
    let b = jacobian_with_step(map, x, h / 2.0)?;
    Ok((b * 4.0 - a) / 3.0)
}

/// Full right singular basis and descending singular values of `j`.
pub fn svd_full(j: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (m, n) = j.shape();
    let mut a = DMatrix::zeros(m.max(n), n);
    a.view_mut((0, 0), (m, n)).copy_from(j);
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&p, &q| svd.singular_values[q].total_cmp(&svd.singular_values[p]));
    let s: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let mut v = DMatrix::zeros(n, n);
    for (c, &i) in idx.iter().enumerate() {
        for r in 0..n {
            v[(r, c)] = vt[(i, r)];
        }
    }
    (s, v)
}

fn numeric_rank(s: &[f64], rel: f64) -> usize {
    let max = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&v| v > rel * max).count()
}

/// Outcome of [`solve`]; `converged = false` carries the best iterate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Solve {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

/// Damped Gauss-Newton with SVD pseudo-inverse steps and backtracking.
pub fn solve(map: &dyn ResidualMap, x0: &[f64]) -> Result<Solve> {
    let mut x = x0.to_vec();
    let mut r = norm(&map.eval(&x)?);
    let mut history = vec![r];
    let mut iterations = 0;
    while r >= tolerances::SOLVE_RESIDUAL && iterations < tolerances::SOLVE_MAX_ITER {
        iterations += 1;
        let f = DVector::from_vec(map.eval(&x)?);
        let j = jacobian(map, &x)?;
        let pinv = j.clone().pseudo_inverse(1e-12 * j.norm().max(1e-300)).map_err(|e| Error::Numeric(e.to_string()))?;
        let step = -(pinv * f);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + alpha * s).collect();
            if let Ok(v) = map.eval(&trial) {
                let nr = norm(&v);
                if nr < r {
                    accepted = Some((trial, nr));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((trial, nr)) = accepted else { break };
        let moved = alpha * step.norm();
        x = trial;
        r = nr;
        history.push(r);
        if moved < tolerances::SOLVE_STEP {
            break;
        }
    }
    Ok(Solve { converged: r < tolerances::SOLVE_RESIDUAL, x, residual_norm: r, iterations, history })
}

/// Numerical rank and dimension bookkeeping at a point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DimensionReport {
    pub map: String,
    pub params: usize,
    pub residuals: usize,
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    pub rank: usize,
    /// `sigma[rank-1] / sigma[rank]`, infinite when nothing is dropped.
    pub gap: f64,
    pub kernel_dim: usize,
    pub documented_gauge: usize,
    /// Dimension of the gauge span inside the kernel.
    pub measured_gauge: usize,
    /// `params - rank - documented_gauge`.
    pub dimension: i64,
    /// `params - rank - measured_gauge`.
    pub measured_dimension: i64,
    /// Largest off-complex component of the kernel modulo gauge, if the map has such coordinates.
    pub off_complex_leak: Option<f64>,
    pub warning: Option<String>,
}

pub fn local_dimension(map: &dyn ResidualMap, x: &[f64]) -> Result<DimensionReport> {
    local_dimension_with(map, x, tolerances::RANK_RELATIVE)
}

pub fn local_dimension_with(map: &dyn ResidualMap, x: &[f64], threshold: f64) -> Result<DimensionReport> {
    let n = map.params();
    let j = jacobian(map, x)?;
    let (s_full, v) = svd_full(&j);
    let s: Vec<f64> = s_full.iter().copied().take(map.residuals().min(n)).collect();
    let rank = numeric_rank(&s, threshold);
    let gap = if rank == 0 {
        f64::INFINITY
    } else if rank < s.len() {
        let d = s[rank];
        if d == 0.0 { f64::INFINITY } else { s[rank - 1] / d }
    } else {
        f64::INFINITY
    };
    let warning = (gap < tolerances::RANK_GAP).then(|| format!("ambiguous rank: gap {gap:.3e} below {:.0e}", tolerances::RANK_GAP));
    if let Some(w) = &warning {
        log::warn!("{}: {w}", map.name());
    }
    let kernel = v.columns(rank, n - rank).into_owned();

    let gauge = map.gauge_directions(x)?;
    let measured_gauge = if gauge.is_empty() {
        0
    } else {
        let g = DMatrix::from_fn(n, gauge.len(), |r, c| gauge[c][r]);
        let (sg, _) = svd_full(&g.transpose());
        let rg = numeric_rank(&sg, 1e-8);
        let jg = &j * &g;
        let (sjg, _) = svd_full(&jg.transpose());
        let scale = s.first().copied().unwrap_or(1.0) * sg.first().copied().unwrap_or(1.0);
        let rjg = sjg.iter().filter(|&&v| v > threshold * scale).count();
        rg.saturating_sub(rjg)
    };

    let off = map.off_complex_coords();
    let off_complex_leak = (!off.is_empty()).then(|| {
        let mut basis: Vec<DVector<f64>> = Vec::new();
        for g in &gauge {
            let mut u = DVector::from_column_slice(g);
            for b in &basis {
                u -= b * b.dot(&u);
            }
            if u.norm() > 1e-8 {
                basis.push(u.normalize());
            }
        }
        let mut leak: f64 = 0.0;
        let mut quotient: Vec<DVector<f64>> = Vec::new();
        for c in 0..kernel.ncols() {
            let mut u = kernel.column(c).into_owned();
            for b in basis.iter().chain(quotient.iter()) {
                u -= b * b.dot(&u);
            }
            if u.norm() > 1e-6 {
                let u = u.normalize();
                leak = leak.max(off.iter().map(|&i| u[i] * u[i]).sum::<f64>().sqrt());
                quotient.push(u);
            }
        }
        leak
    });

    Ok(DimensionReport {
        map: map.name().into(),
        params: n,
        residuals: map.residuals(),
        singular_values: s,
        threshold,
        rank,
        gap,
        kernel_dim: n - rank,
        documented_gauge: map.gauge(),
        measured_gauge,
        dimension: n as i64 - rank as i64 - map.gauge() as i64,
        measured_dimension: n as i64 - rank as i64 - measured_gauge as i64,
        off_complex_leak,
        warning,
    })
}

/// Orthonormal kernel basis (columns) of the Jacobian at `x`.
pub fn kernel_basis(map: &dyn ResidualMap, x: &[f64]) -> Result<DMatrix<f64>> {
    let j = jacobian(map, x)?;
    let (s, v) = svd_full(&j);
    let s: Vec<f64> = s.into_iter().take(map.residuals().min(map.params())).collect();
    let rank = numeric_rank(&s, tolerances::RANK_RELATIVE);
    Ok(v.columns(rank, v.ncols() - rank).into_owned())
}

/// `(A(p1,p2,q1), A(p1,p2,q2), A(p1,p2,q3))` of a complex parameter vector.
pub fn angular_chart(x: &[f64]) -> Result<[f64; 3]> {
    let p = TetraParams::from_complex_vec(x)?;
    let pts = p.points();
    let mut out = [0.0; 3];
    for k in 0..3 {
        out[k] = IdealTriple::new([pts[0], pts[1], pts[2 + k]])?.cartan_complex()?;
    }
    Ok(out)
}

/// Rank of the chart derivative restricted to the solution tangent space.
pub fn chart_jacobian_rank(x: &[f64]) -> Result<usize> {
    let k = kernel_basis(&ComplexResidual::FIRST, x)?;
    let h = tolerances::FD_STEP;
    let mut d = DMatrix::zeros(3, x.len());
    for c in 0..x.len() {
        let mut a = x.to_vec();
        let mut b = x.to_vec();
        a[c] += h;
        b[c] -= h;
        let (fa, fb) = (angular_chart(&a)?, angular_chart(&b)?);
        for r in 0..3 {
            d[(r, c)] = wrap_angle(fa[r] - fb[r]) / (2.0 * h);
        }
    }
    let dk = d * k;
    let (s, _) = svd_full(&dk.transpose());
    let rank = numeric_rank(&s, tolerances::RANK_RELATIVE);
    if rank < 3 {
        log::warn!("chart degenerate: rank {rank}");
    }
    Ok(rank)
}

/// Solver output with its local audit, as written by the command line.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionPoint {
    pub parameters: Vec<f64>,
    pub residual_norm: f64,
    pub singular_values: Vec<f64>,
    pub dimension: i64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chart: Option<[f64; 3]>,
}

impl SolutionPoint {
    pub fn new(map: &dyn ResidualMap, x: &[f64]) -> Result<Self> {
        let r = norm(&map.eval(x)?);
        let d = local_dimension(map, x)?;
        let chart = if map.params() == 7 { angular_chart(x).ok() } else { None };
        Ok(SolutionPoint { parameters: x.to_vec(), residual_norm: r, singular_values: d.singular_values, dimension: d.dimension, chart })
    }
}

/// Solves the chart-pinned problem from `x0` toward `target`.
pub fn solve_chart(target: [f64; 3], x0: &[f64]) -> Result<Solve> {
    solve(&ChartTargetResidual { target }, x0)
}

#[derive(Deserialize)]
struct G1G2 {
    #[serde(rename = "G1")]
    g1: Mat3,
    #[serde(rename = "G2")]
    g2: Mat3,
}

/// Data of the discrete representation with parabolic peripheral holonomy.
#[derive(Clone, Debug)]
pub struct Rho0 {
    pub params: TetraParams,
    pub g1: Mat3,
    pub g2: Mat3,
    /// Form preserved by `g1, g2`, solved from `G H G* = H`.
    pub form: HermitianForm,
    /// (positive, negative) eigenvalue counts of `form`.
    pub signature: (usize, usize),
    /// Null-space dimension of the linear system for `form`.
    pub form_solutions: usize,
    /// Angle of `g2` closing the holonomy over the quaternions.
    pub theta2: f64,
}

impl Rho0 {
    pub fn complex_vec(&self) -> Vec<f64> {
        self.params.to_complex_vec().expect("complex data")
    }
    pub fn quaternionic_vec(&self) -> Vec<f64> {
        embed_complex(&self.complex_vec(), [0.0, self.theta2, 0.0])
    }
}

pub const FALBEL_JSON: &str = include_str!("../../../data/falbel.json");
pub const G1G2_JSON: &str = include_str!("../../../data/g1g2.json");
pub const GLUING_TABLE_JSON: &str = include_str!("../../../data/gluing-table.json");

fn hermitian_basis() -> Vec<Mat3> {
    let mut out = Vec::new();
    for d in 0..3 {
        let mut m = Mat3::ZERO;
        m.0[d][d] = Quaternion::ONE;
        out.push(m);
    }
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        for unit in [Quaternion::ONE, Quaternion::I] {
            let mut m = Mat3::ZERO;
            m.0[a][b] = unit;
            m.0[b][a] = unit.conj();
            out.push(m);
        }
    }
    out
}

/// Hermitian form preserved by every matrix in `gens`, its signature and the
/// dimension of the solution space.
pub fn invariant_form(gens: &[Mat3]) -> Result<(Mat3, (usize, usize), usize)> {
    let basis = hermitian_basis();
    let mut cols = Vec::new();
    for b in &basis {
        let mut col = Vec::new();
        for g in gens {
            let d = *g * *b * g.star() - *b;
            push_matrix(&mut col, &d, true);
        }
        cols.push(col);
    }
    let a = DMatrix::from_fn(cols[0].len(), basis.len(), |r, c| cols[c][r]);
    let (s, v) = svd_full(&a);
    let max = s[0];
    let null = s.iter().filter(|&&x| x <= 1e-10 * max).count();
    if null == 0 {
        return Err(Error::Numeric("no invariant Hermitian form".into()));
    }
    let c = v.column(basis.len() - 1);
    let mut h = Mat3::ZERO;
    for (k, b) in basis.iter().enumerate() {
        h = h + b.scale(c[k]);
    }
    let sig = signature(&h);
    if sig.0 < sig.1 {
        h = -h;
    }
    Ok((h, signature(&h), null))
}

/// Eigenvalue sign counts of a complex Hermitian matrix via its real 6x6 form.
pub fn signature(h: &Mat3) -> (usize, usize) {
    let m = DMatrix::from_fn(6, 6, |r, c| {
        let e = h[(r % 3, c % 3)];
        match (r < 3, c < 3) {
            (true, true) | (false, false) => e.re,
            (true, false) => -e.i,
            (false, true) => e.i,
        }
    });
    let eig = SymmetricEigen::new(m).eigenvalues;
    let max = eig.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let pos = eig.iter().filter(|&&v| v > 1e-9 * max).count() / 2;
    let neg = eig.iter().filter(|&&v| v < -1e-9 * max).count() / 2;
    (pos, neg)
}

pub fn rho0_data() -> Result<Rho0> {
    let params: TetraParams = serde_json::from_str(FALBEL_JSON)?;
    params.validate()?;
    let gg: G1G2 = serde_json::from_str(G1G2_JSON)?;
    let (h, sig, null) = invariant_form(&[gg.g1, gg.g2])?;
    let form = HermitianForm::custom(h)?;
    let theta2 = closing_theta(&params)?;
    Ok(Rho0 { params, g1: gg.g1, g2: gg.g2, form, signature: sig, form_solutions: null, theta2 })
}
