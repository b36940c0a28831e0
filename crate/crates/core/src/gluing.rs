//! Two ideal tetrahedra glued into the figure-eight knot complement.
//!
//! Vertices are `p1 = infinity`, `p2 = 0` and three finite Heisenberg points
//! `q1, q2, q3`. The first tetrahedron is `(p1, p2, q1, q2)`, the second
//! `(p1, p2, q2, q3)`; they share the face `(p1, p2, q2)` through the
//! identity and the other faces are paired by
//!
//! ```text
//! g1: (q2, q1, p1) -> (q3, p2, p1)
//! g2: (p2, q1, q2) -> (p1, q2, q3)
//! g3: (q1, p2, p1) -> (q2, p2, q3)
//! ```
//!
//! Edge holonomies are the matrix products `g1^-1 g3 g2^-1 g1 g3^-1` (edge
//! `p1 p2`) and `g2^-1 g3 g2 g1^-1` (edge `p1 q2`), read in the row
//! convention: the leftmost factor acts first.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::boundary::{heis_to_siegel, siegel_lift, HeisenbergPoint};
use crate::cartan::{transport_lifts, triple_transport_theta, wrap_angle, IdealTriple};
use crate::error::{contract, Error, Result};
use crate::hermitian::{FormTag, Isometry, Mat3, ProjPoint, Row};
use crate::scalars::{FieldTag, Quaternion};
use crate::tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vertex {
    P1,
    P2,
    Q1,
    Q2,
    Q3,
}

impl Vertex {
    pub const ALL: [Vertex; 5] = [Vertex::P1, Vertex::P2, Vertex::Q1, Vertex::Q2, Vertex::Q3];
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacePairing {
    pub name: String,
    pub source: [Vertex; 3],
    pub target: [Vertex; 3],
}

/// Combinatorial gluing data: tetrahedra as ordered vertex lists plus face
/// pairings from faces of the first to faces of the second.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluingTable {
    pub tetrahedra: [[Vertex; 4]; 2],
    pub pairings: Vec<FacePairing>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCounts {
    pub cells: usize,
    pub faces: usize,
    pub edges: usize,
    pub vertices: usize,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, a: usize) -> usize {
        let p = self.0[a];
        if p == a {
            return a;
        }
        let r = self.find(p);
        self.0[a] = r;
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (x, y) = (self.find(a), self.find(b));
        self.0[x] = y;
    }
    fn classes(&mut self) -> Vec<Vec<usize>> {
        let n = self.0.len();
        let mut out: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for a in 0..n {
            let r = self.find(a);
            out.entry(r).or_default().push(a);
        }
        out.into_values().collect()
    }
}

const EDGE_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

impl GluingTable {
    pub fn figure_eight() -> Self {
        use Vertex::*;
        let pair = |name: &str, source, target| FacePairing { name: name.into(), source, target };
        GluingTable {
            tetrahedra: [[P1, P2, Q1, Q2], [P1, P2, Q2, Q3]],
            pairings: vec![
                pair("g1", [Q2, Q1, P1], [Q3, P2, P1]),
                pair("g2", [P2, Q1, Q2], [P1, Q2, Q3]),
                pair("g3", [Q1, P2, P1], [Q2, P2, Q3]),
                pair("id", [P1, P2, Q2], [P1, P2, Q2]),
            ],
        }
    }

    fn local(&self, tet: usize, v: Vertex) -> Result<usize> {
        self.tetrahedra[tet]
            .iter()
            .position(|&w| w == v)
            .ok_or_else(|| Error::Contract(format!("{v:?} is not a vertex of tetrahedron {}", tet + 1)))
    }

    fn edge_id(&self, tet: usize, a: usize, b: usize) -> usize {
        let (a, b) = (a.min(b), a.max(b));
        let k = EDGE_PAIRS.iter().position(|&e| e == (a, b)).expect("valid edge");
        tet * 6 + k
    }

    /// Equivalence classes of the twelve tetrahedron edges, each member
    /// given as `(tetrahedron, endpoint, endpoint)`.
    pub fn edge_classes(&self) -> Result<Vec<Vec<(usize, Vertex, Vertex)>>> {
        let mut uf = UnionFind::new(12);
        for p in &self.pairings {
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                let a = self.edge_id(0, self.local(0, p.source[i])?, self.local(0, p.source[j])?);
                let b = self.edge_id(1, self.local(1, p.target[i])?, self.local(1, p.target[j])?);
                uf.union(a, b);
            }
        }
        Ok(uf
            .classes()
            .into_iter()
            .map(|c| {
                c.into_iter()
                    .map(|e| {
                        let (tet, k) = (e / 6, e % 6);
                        let (a, b) = EDGE_PAIRS[k];
                        (tet, self.tetrahedra[tet][a], self.tetrahedra[tet][b])
                    })
                    .collect()
            })
            .collect())
    }

    /// Cells, faces, edges and vertices of the quotient complex.
    pub fn counts(&self) -> Result<CellCounts> {
        let mut used = [[0usize; 4]; 2];
        let mut vuf = UnionFind::new(8);
        for p in &self.pairings {
            let missing = |tet: usize, face: &[Vertex; 3]| -> Result<usize> {
                let locals: Vec<usize> = face.iter().map(|&v| self.local(tet, v)).collect::<Result<_>>()?;
                Ok((0..4).find(|k| !locals.contains(k)).expect("a face omits one vertex"))
            };
            used[0][missing(0, &p.source)?] += 1;
            used[1][missing(1, &p.target)?] += 1;
            for i in 0..3 {
                vuf.union(self.local(0, p.source[i])?, 4 + self.local(1, p.target[i])?);
            }
        }
        if used.iter().flatten().any(|&c| c != 1) {
            return contract("every face must be paired exactly once");
        }
        Ok(CellCounts {
            cells: 2,
            faces: self.pairings.len(),
            edges: self.edge_classes()?.len(),
            vertices: vuf.classes().len(),
        })
    }
}

/// Which construction the gluing maps use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Locus {
    /// Lift-normalized triple transport.
    #[default]
    Generic,
    /// All points in the quaternionic line `{z = 0}`, glued by Moebius maps.
    RealLine,
}

/// Finite vertices and stabilizer angles of the two tetrahedra.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TetraParams {
    pub field: FieldTag,
    #[serde(default)]
    pub locus: Locus,
    pub q1: HeisenbergPoint,
    pub q2: HeisenbergPoint,
    pub q3: HeisenbergPoint,
    #[serde(default)]
    pub thetas: [f64; 3],
}

impl TetraParams {
    pub fn new(field: FieldTag, q1: HeisenbergPoint, q2: HeisenbergPoint, q3: HeisenbergPoint, thetas: [f64; 3]) -> Result<Self> {
        let p = TetraParams { field, locus: Locus::Generic, q1, q2, q3, thetas };
        p.validate()?;
        Ok(p)
    }

    /// Vertices in the order `p1, p2, q1, q2, q3`.
    pub fn heisenberg(&self) -> [HeisenbergPoint; 5] {
        [HeisenbergPoint::Infinity, HeisenbergPoint::ORIGIN, self.q1, self.q2, self.q3]
    }

    pub fn lifts(&self) -> [Row; 5] {
        self.heisenberg().map(|p| siegel_lift(&p))
    }

    pub fn points(&self) -> [ProjPoint; 5] {
        self.heisenberg().map(|p| heis_to_siegel(&p))
    }

    pub fn validate(&self) -> Result<()> {
        let pts = self.heisenberg();
        for (k, p) in pts.iter().enumerate().skip(2) {
            if p.finite().is_none() {
                return contract(format!("q{} must be finite", k - 1));
            }
            if p.field() > self.field {
                return contract(format!("q{} is not in the {} field", k - 1, self.field));
            }
        }
        if self.field != FieldTag::Quaternion && self.thetas.iter().any(|&t| t != 0.0) {
            return contract("stabilizer angles are only meaningful over the quaternions");
        }
        let lifts = self.lifts();
        let j = FormTag::J0.form();
        let names = ["p1", "p2", "q1", "q2", "q3"];
        for a in 0..5 {
            for b in a + 1..5 {
                let h = j.pairing(&lifts[a], &lifts[b]).norm();
                let s = norm_row(&lifts[a]) * norm_row(&lifts[b]);
                if !(h > 1e-9 * s) {
                    return Err(Error::Decode(format!("vertices {} and {} coincide", names[a], names[b])));
                }
            }
        }
        Ok(())
    }

    /// `(t, s, r, Re z, Im z, Re w, Im w)` with `q1 = (1, it)`,
    /// `q2 = (z, is)`, `q3 = (w, ir)`.
    pub fn from_complex_vec(x: &[f64]) -> Result<Self> {
        if x.len() != 7 || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Decode("complex parameters need 7 finite reals".into()));
        }
        let q1 = HeisenbergPoint::new(Quaternion::ONE, Quaternion::pure(x[0], 0.0, 0.0))?;
        let q2 = HeisenbergPoint::new(Quaternion::complex(x[3], x[4]), Quaternion::pure(x[1], 0.0, 0.0))?;
        let q3 = HeisenbergPoint::new(Quaternion::complex(x[5], x[6]), Quaternion::pure(x[2], 0.0, 0.0))?;
        Self::new(FieldTag::Complex, q1, q2, q3, [0.0; 3])
    }

    pub fn to_complex_vec(&self) -> Result<Vec<f64>> {
        let (z1, t) = self.q1.finite().expect("validated");
        let (z, s) = self.q2.finite().expect("validated");
        let (w, r) = self.q3.finite().expect("validated");
        if self.field != FieldTag::Complex || !z1.abs_diff_eq(Quaternion::ONE, 0.0) {
            return contract("not in the complex normal form q1 = (1, it)");
        }
        Ok(vec![t.i, s.i, r.i, z.re, z.i, w.re, w.i])
    }

    /// `(a, z[4], s[3], w[4], r[3], theta[3])` with `q1 = (1, ia)`,
    /// `q2 = (z, s)`, `q3 = (w, r)`.
    pub fn from_quaternionic_vec(x: &[f64]) -> Result<Self> {
        if x.len() != 18 || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Decode("quaternionic parameters need 18 finite reals".into()));
        }
        let q1 = HeisenbergPoint::new(Quaternion::ONE, Quaternion::pure(x[0], 0.0, 0.0))?;
        let q2 = HeisenbergPoint::new(Quaternion::new(x[1], x[2], x[3], x[4]), Quaternion::pure(x[5], x[6], x[7]))?;
        let q3 = HeisenbergPoint::new(Quaternion::new(x[8], x[9], x[10], x[11]), Quaternion::pure(x[12], x[13], x[14]))?;
        Self::new(FieldTag::Quaternion, q1, q2, q3, [x[15], x[16], x[17]])
    }

    pub fn to_quaternionic_vec(&self) -> Result<Vec<f64>> {
        let (z1, a) = self.q1.finite().expect("validated");
        let (z, s) = self.q2.finite().expect("validated");
        let (w, r) = self.q3.finite().expect("validated");
        if !z1.abs_diff_eq(Quaternion::ONE, 0.0) || a.j != 0.0 || a.k != 0.0 {
            return contract("not in the quaternionic normal form q1 = (1, ia)");
        }
        let mut v = vec![a.i, z.re, z.i, z.j, z.k, s.i, s.j, s.k, w.re, w.i, w.j, w.k, r.i, r.j, r.k];
        v.extend_from_slice(&self.thetas);
        Ok(v)
    }

    /// Same vertices viewed over the quaternions.
    pub fn promote(&self) -> TetraParams {
        TetraParams { field: FieldTag::Quaternion, ..*self }
    }

    /// The configuration of the discrete representation with every
    /// `A(p1, p2, qj) = pi/3`.
    pub fn falbel() -> Self {
        let s3 = 3f64.sqrt();
        let t = Quaternion::pure(s3, 0.0, 0.0);
        let q1 = HeisenbergPoint::new(Quaternion::ONE, t).expect("pure");
        let q2 = HeisenbergPoint::new(Quaternion::complex(0.5, s3 / 2.0), t).expect("pure");
        let q3 = HeisenbergPoint::new(Quaternion::complex(-0.5, s3 / 2.0), t).expect("pure");
        TetraParams { field: FieldTag::Complex, locus: Locus::Generic, q1, q2, q3, thetas: [0.0; 3] }
    }
}

fn norm_row(r: &Row) -> f64 {
    r.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
}

/// Ordered source and target vertex indices (into `p1, p2, q1, q2, q3`) of `g1, g2, g3`.
pub const FACE_MAPS: [([usize; 3], [usize; 3]); 3] = [([3, 2, 0], [4, 1, 0]), ([1, 2, 3], [0, 3, 4]), ([2, 1, 0], [3, 1, 4])];

/// Ideal tetrahedron with its four face invariants cached.
#[derive(Clone, Copy, Debug)]
pub struct IdealTetrahedron {
    pub points: [ProjPoint; 4],
    /// Invariants of the faces opposite vertex 1, 2, 3, 4, each taken in increasing vertex order.
    pub face_invariants: [f64; 4],
}

impl IdealTetrahedron {
    pub fn new(points: [ProjPoint; 4]) -> Result<Self> {
        let faces = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];
        let mut inv = [0.0; 4];
        let complex = points.iter().all(|p| p.lift.field <= FieldTag::Complex);
        for (k, f) in faces.iter().enumerate() {
            let t = IdealTriple::new([points[f[0]], points[f[1]], points[f[2]]])
                .map_err(|e| Error::DegenerateFace { face: k + 1, detail: e.to_string() })?;
            inv[k] = if complex { t.cartan_complex()? } else { t.cartan_quat() };
        }
        Ok(IdealTetrahedron { points, face_invariants: inv })
    }

    /// `A(123) + A(134) - A(124) - A(234)` for complex tetrahedra.
    pub fn cocycle_defect(&self) -> f64 {
        let [a234, a134, a124, a123] = self.face_invariants;
        wrap_angle(a123 + a134 - a124 - a234)
    }
}

fn face_triple(pts: &[ProjPoint; 5], idx: [usize; 3], face: usize) -> Result<IdealTriple> {
    IdealTriple::new(idx.map(|i| pts[i])).map_err(|e| Error::DegenerateFace { face, detail: e.to_string() })
}

/// Residuals of the invariant matchings forced by the pairing.
///
/// Over the complex numbers: the defect of
/// `r / |w|^2 = (s + z - conj z - t) / |z - 1|^2` (imaginary parts) and of
/// `arg((1 - t)/2) = arg((|z|^2 - s)(|w|^2 + r)(|w - z|^2 - r - w conj z + z conj w + s) / 8)`.
/// Over the quaternions: the three differences of quaternionic invariants
/// between the faces paired by `g1, g2, g3`.
pub fn face_constraints(p: &TetraParams) -> Result<Vec<f64>> {
    let pts = p.points();
    for (k, (src, dst)) in FACE_MAPS.iter().enumerate() {
        face_triple(&pts, *src, k + 1)?;
        face_triple(&pts, *dst, k + 1)?;
    }
    if p.field == FieldTag::Quaternion || p.locus == Locus::RealLine {
        return FACE_MAPS
            .iter()
            .enumerate()
            .map(|(k, (src, dst))| Ok(face_triple(&pts, *src, k + 1)?.cartan_quat() - face_triple(&pts, *dst, k + 1)?.cartan_quat()))
            .collect();
    }
    let (_, t) = p.q1.finite().expect("validated");
    let (z, s) = p.q2.finite().expect("validated");
    let (w, r) = p.q3.finite().expect("validated");
    let eq4 = r.i / w.norm_sqr() - (s.i + 2.0 * z.i - t.i) / (z - Quaternion::ONE).norm_sqr();
    let lhs = (Quaternion::ONE - t) * 0.5;
    let a = Quaternion::real(z.norm_sqr()) - s;
    let b = Quaternion::real(w.norm_sqr()) + r;
    let c = Quaternion::real((w - z).norm_sqr()) - r - w * z.conj() + z * w.conj() + s;
    let rhs = a * b * c * 0.125;
    Ok(vec![eq4, wrap_angle(lhs.arg() - rhs.arg())])
}

/// Complex scalar for entry `(a, b)` of a 2x2 complex matrix.
type C2 = [[Quaternion; 2]; 2];

fn c2_mul(a: &C2, b: &C2) -> C2 {
    let mut o = [[Quaternion::ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            o[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    o
}

fn c2_inv(a: &C2) -> Result<C2> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let d = det.inv()?;
    Ok([[a[1][1] * d, -a[0][1] * d], [-a[1][0] * d, a[0][0] * d]])
}

/// Moebius matrix sending `(z1, z2, z3)` to `(0, 1, infinity)`; `None` is infinity.
fn to_standard(z: [Option<Quaternion>; 3]) -> C2 {
    let one = Quaternion::ONE;
    let zero = Quaternion::ZERO;
    match z {
        [None, Some(b), Some(c)] => [[zero, b - c], [one, -c]],
        [Some(a), None, Some(c)] => [[one, -a], [one, -c]],
        [Some(a), Some(b), None] => [[one, -a], [zero, b - a]],
        [Some(a), Some(b), Some(c)] => [[b - c, -(a * (b - c))], [b - a, -(c * (b - a))]],
        _ => [[one, zero], [zero, one]],
    }
}

/// Determinant-one Moebius matrix sending the triple `a` to the triple `b`.
fn moebius(a: [Option<Quaternion>; 3], b: [Option<Quaternion>; 3]) -> Result<C2> {
    let m = c2_mul(&c2_inv(&to_standard(b))?, &to_standard(a));
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let r = det.norm().sqrt();
    let s = Quaternion::complex(r * (0.5 * det.arg()).cos(), r * (0.5 * det.arg()).sin()).inv()?;
    Ok(m.map(|row| row.map(|e| e * s)))
}

/// Row-acting `Sp(2,1)` matrix that restricts to `w -> (a w + b)/(c w + d)` on the
/// line `{(0, 2 w j)}`.
fn embed_moebius(m: &C2) -> Mat3 {
    let [[a, b], [c, d]] = *m;
    let z = Quaternion::ZERO;
    Mat3::from_rows([[a.conj(), z, -(c.conj() * Quaternion::J)], [z, Quaternion::ONE, z], [b * Quaternion::J, z, d]])
}

/// Line coordinate `w` of a point `(0, 2 w j)`.
fn line_coordinate(p: &HeisenbergPoint) -> Result<Option<Quaternion>> {
    let Some((z, t)) = p.finite() else { return Ok(None) };
    if z.norm() > 1e-12 || t.re.abs() > 1e-12 || t.i.abs() > 1e-12 {
        return contract("point is not in the quaternionic line {(0, aj + bk)}");
    }
    Ok(Some(Quaternion::complex(t.j * 0.5, t.k * 0.5)))
}

/// Vertices `q1 = (0, 2j)`, `q2 = (0, 2 u1 j)`, `q3 = (0, 2 u1 u2 j)` in the quaternionic line.
pub fn real_locus_params(u1: Quaternion, u2: Quaternion) -> Result<TetraParams> {
    for (name, u) in [("u1", u1), ("u2", u2)] {
        if !FieldTag::Complex.contains(u, 0.0) {
            return contract(format!("{name} must be complex"));
        }
        if u.i.abs() < 1e-12 {
            return Err(Error::Decode(format!("{name} = {u} is real: the tetrahedron is flat")));
        }
    }
    let pt = |w: Quaternion| HeisenbergPoint::new(Quaternion::ZERO, w * Quaternion::J * 2.0);
    let p = TetraParams {
        field: FieldTag::Quaternion,
        locus: Locus::RealLine,
        q1: pt(Quaternion::ONE)?,
        q2: pt(u1)?,
        q3: pt(u1 * u2)?,
        thetas: [0.0; 3],
    };
    p.validate()?;
    Ok(p)
}

fn real_line_matrices(p: &TetraParams) -> Result<[Mat3; 3]> {
    let w: Vec<Option<Quaternion>> = p.heisenberg().iter().map(line_coordinate).collect::<Result<_>>()?;
    let mut ms = [[[Quaternion::ZERO; 2]; 2]; 3];
    for (k, (src, dst)) in FACE_MAPS.iter().enumerate() {
        ms[k] = moebius(src.map(|i| w[i]), dst.map(|i| w[i]))?;
    }
    let mut g = ms.map(|m| embed_moebius(&m));
    let (h1, h2) = holonomy_words(&g)?;
    if h1[(0, 0)].re < 0.0 {
        ms[1] = ms[1].map(|r| r.map(|e| -e));
    }
    if h2[(0, 0)].re < 0.0 {
        ms[0] = ms[0].map(|r| r.map(|e| -e));
    }
    g = ms.map(|m| embed_moebius(&m));
    Ok(g)
}

/// Raw gluing matrices, defined also off the constraint set.
pub fn gluing_matrices(p: &TetraParams) -> Result<[Mat3; 3]> {
    if p.locus == Locus::RealLine {
        return real_line_matrices(p);
    }
    let lifts = p.lifts();
    let mut out = [Mat3::IDENTITY; 3];
    for (k, (src, dst)) in FACE_MAPS.iter().enumerate() {
        out[k] = transport_lifts(&src.map(|i| lifts[i]), &dst.map(|i| lifts[i]), FormTag::J0, p.thetas[k])
            .map_err(|e| Error::DegenerateFace { face: k + 1, detail: e.to_string() })?;
    }
    Ok(out)
}

/// The three face-pairing isometries; every face constraint must hold to `1e-9`.
pub fn build_gluing_maps(p: &TetraParams) -> Result<[Isometry; 3]> {
    let fc = face_constraints(p)?;
    if let Some(k) = fc.iter().position(|v| v.abs() > tolerances::INVARIANT_MATCH) {
        return Err(Error::GluingImpossible { face: k + 1, detail: format!("invariant defect {:.3e}", fc[k]) });
    }
    if p.locus == Locus::RealLine {
        let g = real_line_matrices(p)?;
        return g.iter().map(|m| Isometry::new(*m, FormTag::J0)).collect::<Result<Vec<_>>>().map(|v| [v[0], v[1], v[2]]);
    }
    let pts = p.points();
    let mut out = [Isometry::identity(FormTag::J0); 3];
    for (k, (src, dst)) in FACE_MAPS.iter().enumerate() {
        let x = face_triple(&pts, *src, k + 1)?;
        let y = face_triple(&pts, *dst, k + 1)?;
        out[k] = triple_transport_theta(&x, &y, p.thetas[k])
            .map_err(|e| Error::GluingImpossible { face: k + 1, detail: e.to_string() })?
            .isometry;
    }
    Ok(out)
}

/// `(g1^-1 g3 g2^-1 g1 g3^-1, g2^-1 g3 g2 g1^-1)` as row-convention products.
pub fn holonomy_words(g: &[Mat3; 3]) -> Result<(Mat3, Mat3)> {
    let gi = [g[0].inverse()?, g[1].inverse()?, g[2].inverse()?];
    let h1 = gi[0] * g[2] * gi[1] * g[0] * gi[2];
    let h2 = gi[1] * g[2] * g[1] * gi[0];
    Ok((h1, h2))
}

fn fixes(m: &Mat3, v: &Row) -> bool {
    let img = m.apply(v);
    let k = (0..3).max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm())).expect("three coordinates");
    let Ok(s) = img[k].inv() else { return false };
    let vs = v[k].inv().expect("largest coordinate");
    let a = crate::hermitian::row_scale_left(s, &img);
    let b = crate::hermitian::row_scale_left(vs, v);
    (0..3).all(|i| (a[i] - b[i]).norm() <= 1e-8 * (1.0 + b[i].norm()))
}

/// Holonomy words with the edge-stabilization check: `H1` must fix `p1, p2`
/// and `H2` must fix `p1, q2`.
pub fn checked_holonomies(p: &TetraParams, g: &[Mat3; 3]) -> Result<(Mat3, Mat3)> {
    let (h1, h2) = holonomy_words(g)?;
    let l = p.lifts();
    for (name, h, ends) in [("H1", &h1, [0, 1]), ("H2", &h2, [0, 3])] {
        for e in ends {
            if !fixes(h, &l[e]) {
                return Err(Error::Convention(format!("{name} does not fix vertex {}", ["p1", "p2", "q1", "q2", "q3"][e])));
            }
        }
    }
    Ok((h1, h2))
}

/// Two tetrahedra with their gluing isometries.
#[derive(Clone, Debug)]
pub struct FigureEightComplex {
    pub params: TetraParams,
    pub tetrahedra: [IdealTetrahedron; 2],
    pub maps: [Isometry; 3],
}

impl FigureEightComplex {
    pub fn new(p: &TetraParams) -> Result<Self> {
        p.validate()?;
        let pts = p.points();
        let t1 = IdealTetrahedron::new([pts[0], pts[1], pts[2], pts[3]])?;
        let t2 = IdealTetrahedron::new([pts[0], pts[1], pts[3], pts[4]])?;
        let maps = build_gluing_maps(p)?;
        Ok(FigureEightComplex { params: *p, tetrahedra: [t1, t2], maps })
    }

    pub fn edge_holonomies(&self) -> Result<(Isometry, Isometry)> {
        edge_holonomies(self)
    }
}

pub fn edge_holonomies(c: &FigureEightComplex) -> Result<(Isometry, Isometry)> {
    let g = c.maps.map(|m| m.matrix);
    let (h1, h2) = checked_holonomies(&c.params, &g)?;
    let tol = tolerances::FORM * 1e3;
    Ok((Isometry::with_tolerance(h1, FormTag::J0, tol)?, Isometry::with_tolerance(h2, FormTag::J0, tol)?))
}

/// Stabilizer angle of `g2` closing the `p1 p2` holonomy (up to sign) of a
/// configuration with `theta1 = theta3 = 0`, found by a grid scan refined by
/// golden-section search.
pub fn closing_theta(p: &TetraParams) -> Result<f64> {
    let base = p.promote();
    let defect = |th: f64| -> Result<f64> {
        let q = TetraParams { thetas: [0.0, th, 0.0], ..base };
        let (h1, _) = holonomy_words(&gluing_matrices(&q)?)?;
        Ok(h1.max_abs_diff(&Mat3::IDENTITY).min((-h1).max_abs_diff(&Mat3::IDENTITY)))
    };
    let n = 720;
    let step = 2.0 * PI / n as f64;
    let mut best = (0.0, f64::INFINITY);
    for k in 0..n {
        let th = k as f64 * step;
        let d = defect(th)?;
        if d < best.1 {
            best = (th, d);
        }
    }
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if defect(c)? < defect(d)? {
            b = d;
        } else {
            a = c;
        }
    }
    Ok((0.5 * (a + b)).rem_euclid(2.0 * PI))
}
