//! Randomized property suite shared by the command line and the acceptance tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::boundary::{
    ball_boundary_to_heis, ball_to_horo, ball_to_proj, heis_to_ball, heis_to_siegel, horo_to_ball, horo_to_proj, horo_to_siegel,
    proj_to_ball, proj_to_horo, siegel_to_heis, BallPoint, HeisenbergPoint, HorosphericalPoint,
};
use crate::cartan::{cocycle_defect, project_distance, triple_transport, IdealTriple};
use crate::error::Result;
use crate::gluing::{build_gluing_maps, edge_holonomies, FigureEightComplex};
use crate::hermitian::{FormTag, Isometry, Mat3, ProjPoint};
use crate::isometries::{
    dilation, fix_three_family, inversion_swap, is_pure_parabolic, lemma_pure_reconstruct,
    pure_parabolics_commute, stab_parabolic_fix, translation,
};
use crate::scalars::{FieldTag, Quaternion};
use crate::tolerances;
use crate::variety::rho0_data;

/// Random samples for the property checks.
pub mod sample {
    use super::*;

    pub fn normal<R: Rng>(rng: &mut R) -> f64 {
        rng.sample(StandardNormal)
    }

    pub fn scalar<R: Rng>(rng: &mut R, field: FieldTag) -> Quaternion {
        let mut q = Quaternion::real(normal(rng));
        if field >= FieldTag::Complex {
            q.i = normal(rng);
        }
        if field == FieldTag::Quaternion {
            q.j = normal(rng);
            q.k = normal(rng);
        }
        q
    }

    pub fn unit<R: Rng>(rng: &mut R, field: FieldTag) -> Quaternion {
        loop {
            if let Ok(u) = scalar(rng, field).normalize() {
                return u;
            }
        }
    }

    pub fn imaginary<R: Rng>(rng: &mut R, field: FieldTag) -> Quaternion {
        scalar(rng, field).im_part()
    }

    pub fn heisenberg<R: Rng>(rng: &mut R, field: FieldTag) -> HeisenbergPoint {
        HeisenbergPoint::new(scalar(rng, field), imaginary(rng, field)).expect("imaginary t")
    }

    pub fn null_point<R: Rng>(rng: &mut R, field: FieldTag) -> ProjPoint {
        heis_to_siegel(&heisenberg(rng, field))
    }

    pub fn triple<R: Rng>(rng: &mut R, field: FieldTag) -> IdealTriple {
        loop {
            let p = [null_point(rng, field), null_point(rng, field), null_point(rng, field)];
            if let Ok(t) = IdealTriple::new(p) {
                return t;
            }
        }
    }

    /// Product of two translations, a dilation and possibly the inversion.
    pub fn isometry<R: Rng>(rng: &mut R, field: FieldTag) -> Isometry {
        let t1 = translation(&heisenberg(rng, field)).expect("finite");
        let t2 = translation(&heisenberg(rng, field)).expect("finite");
        let d = dilation(unit(rng, field), unit(rng, field), (0.5 * normal(rng)).exp()).expect("valid");
        let mut g = t1.then(&d).expect("same form");
        if rng.random_bool(0.5) {
            g = g.then(&inversion_swap()).expect("same form");
        }
        g.then(&t2).expect("same form")
    }

    pub fn horospherical<R: Rng>(rng: &mut R, field: FieldTag) -> HorosphericalPoint {
        HorosphericalPoint::new(scalar(rng, field), imaginary(rng, field), (0.5 * normal(rng)).exp()).expect("positive")
    }

    pub fn ball<R: Rng>(rng: &mut R, field: FieldTag) -> BallPoint {
        loop {
            let b = BallPoint::new(scalar(rng, field) * 0.5, scalar(rng, field) * 0.5);
            if b.radius_sqr() < 0.95 {
                return b;
            }
        }
    }
}

/// Deliberate corruption for exercising the failure path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fault {
    /// Perturbs every matrix entering the form-preservation check by `1e-6`.
    Form,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Multiplies every case count; `1.0` gives the full suite.
    pub scale: f64,
    pub fault: Option<Fault>,
    pub tol_form: f64,
    pub tol_holonomy: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 0x5eed, scale: 1.0, fault: None, tol_form: tolerances::FORM, tol_holonomy: tolerances::HOLONOMY }
    }
}

impl VerifyConfig {
    fn count(&self, n: usize) -> usize {
        ((n as f64 * self.scale).round() as usize).max(1)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub worst: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure: Option<serde_json::Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckRow>,
}

struct Tracker {
    name: &'static str,
    tol: f64,
    cases: usize,
    worst: f64,
    failure: Option<serde_json::Value>,
}

impl Tracker {
    fn new(name: &'static str, tol: f64) -> Self {
        Tracker { name, tol, cases: 0, worst: 0.0, failure: None }
    }

    fn record(&mut self, err: f64, case: impl FnOnce() -> serde_json::Value) {
        self.cases += 1;
        let bad = !(err <= self.tol);
        if bad || err > self.worst {
            self.worst = if err.is_nan() { f64::INFINITY } else { err.max(self.worst) };
        }
        if bad && self.failure.is_none() {
            self.failure = Some(case());
        }
    }

    fn fail(&mut self, case: serde_json::Value) {
        self.cases += 1;
        self.worst = f64::INFINITY;
        if self.failure.is_none() {
            self.failure = Some(case);
        }
    }

    fn finish(self) -> CheckRow {
        CheckRow {
            name: self.name.into(),
            passed: self.failure.is_none() && self.cases > 0,
            cases: self.cases,
            worst: self.worst,
            tolerance: self.tol,
            failure: self.failure,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Form preservation of every isometry constructor.
pub fn check_form_preservation(cfg: &VerifyConfig, n: usize) -> CheckRow {
    let mut rng = cfg.rng(1);
    let mut tr = Tracker::new("form preservation", cfg.tol_form);
    let perturb = |m: Mat3| -> Mat3 {
        match cfg.fault {
            Some(Fault::Form) => m + Mat3::from_real([[1e-6, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]),
            None => m,
        }
    };
    for _ in 0..n {
        let field = if rng.random_bool(0.5) { FieldTag::Complex } else { FieldTag::Quaternion };
        let p = sample::heisenberg(&mut rng, field);
        let mut mats: Vec<(&str, Result<Mat3>)> = vec![
            ("translation", translation(&p).map(|g| g.matrix)),
            ("dilation", dilation(sample::unit(&mut rng, field), sample::unit(&mut rng, field), (0.5 * sample::normal(&mut rng)).exp()).map(|g| g.matrix)),
            (
                "stab_parabolic_fix",
                stab_parabolic_fix(&p, sample::unit(&mut rng, field), sample::unit(&mut rng, field), (0.5 * sample::normal(&mut rng)).exp()).map(|g| g.matrix),
            ),
            ("inversion_swap", Ok(inversion_swap().matrix)),
            ("fix_three_family", fix_three_family(sample::normal(&mut rng), FieldTag::Quaternion).map(|g| g.matrix)),
        ];
        let x = sample::triple(&mut rng, field);
        let g = sample::isometry(&mut rng, field);
        if let Ok(y) = x.act(&g) {
            mats.push(("triple_transport", triple_transport(&x, &y).map(|t| t.isometry.matrix)));
        }
        for (name, m) in mats {
            match m {
                Ok(m) => {
                    let m = perturb(m);
                    let scale = m.max_abs().max(1.0).powi(2);
                    let d = FormTag::J0.form().defect(&m) / scale;
                    tr.record(d, || json!({ "constructor": name, "matrix": m, "defect": d }));
                }
                Err(e) => tr.fail(json!({ "constructor": name, "error": e.to_string() })),
            }
        }
    }
    tr.finish()
}

/// Chart round trips: Siegel, horospherical, ball, and the two forms.
pub fn check_round_trips(cfg: &VerifyConfig, n: usize) -> CheckRow {
    let mut rng = cfg.rng(2);
    let mut tr = Tracker::new("coordinate round trips", 1e-10);
    for _ in 0..n {
        let field = if rng.random_bool(0.5) { FieldTag::Complex } else { FieldTag::Quaternion };
        let p = sample::heisenberg(&mut rng, field);
        let err = |a: &HeisenbergPoint, b: &HeisenbergPoint| match (a.finite(), b.finite()) {
            (Some((z, t)), Some((w, s))) => ((z - w).norm() + (t - s).norm()) / (1.0 + z.norm() + t.norm()),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        match siegel_to_heis(&heis_to_siegel(&p)) {
            Ok(q) => tr.record(err(&p, &q), || json!({ "chart": "siegel", "point": p })),
            Err(e) => tr.fail(json!({ "chart": "siegel", "error": e.to_string() })),
        }
        match ball_boundary_to_heis(&heis_to_ball(&p)) {
            Ok(q) => tr.record(err(&p, &q), || json!({ "chart": "ball boundary", "point": p })),
            Err(e) => tr.fail(json!({ "chart": "ball boundary", "error": e.to_string() })),
        }
        let x = heis_to_siegel(&p);
        let back = x.to_form(FormTag::Jstd).to_form(FormTag::J0);
        tr.record(if back.approx_eq(&x, 1e-10) { 0.0 } else { 1.0 }, || json!({ "chart": "form change", "point": p }));

        let h = sample::horospherical(&mut rng, field);
        let herr = |a: &HorosphericalPoint, b: &HorosphericalPoint| {
            ((a.z - b.z).norm() + (a.t.get() - b.t.get()).norm() + (a.height - b.height).abs()) / (1.0 + a.z.norm() + a.t.get().norm() + a.height)
        };
        for (chart, q) in [("horospherical/Jstd", proj_to_horo(&horo_to_proj(&h))), ("horospherical/J0", proj_to_horo(&horo_to_siegel(&h)))] {
            match q {
                Ok(q) => tr.record(herr(&h, &q), || json!({ "chart": chart })),
                Err(e) => tr.fail(json!({ "chart": chart, "error": e.to_string() })),
            }
        }
        match horo_to_ball(&h).and_then(|b| ball_to_horo(&b)) {
            Ok(q) => tr.record(herr(&h, &q), || json!({ "chart": "ball/horospherical" })),
            Err(e) => tr.fail(json!({ "chart": "ball/horospherical", "error": e.to_string() })),
        }
        let b = sample::ball(&mut rng, field);
        match proj_to_ball(&ball_to_proj(&b)) {
            Ok(c) => tr.record((b.z1 - c.z1).norm() + (b.z2 - c.z2).norm(), || json!({ "chart": "ball" })),
            Err(e) => tr.fail(json!({ "chart": "ball", "error": e.to_string() })),
        }
    }
    tr.finish()
}

/// Cocycle relation on random complex null quadruples.
pub fn check_cocycle(cfg: &VerifyConfig, n: usize) -> CheckRow {
    let mut rng = cfg.rng(3);
    let mut tr = Tracker::new("cocycle", tolerances::INVARIANT_MATCH);
    let mut done = 0;
    while done < n {
        let x = [0, 1, 2, 3].map(|_| sample::null_point(&mut rng, FieldTag::Complex));
        match cocycle_defect(&x) {
            Ok(d) => {
                tr.record(d.abs(), || json!({ "points": x.map(|p| *p.coords()) }));
                done += 1;
            }
            Err(crate::Error::DegenerateTriple(_)) => continue,
            Err(e) => {
                tr.fail(json!({ "error": e.to_string() }));
                done += 1;
            }
        }
    }
    tr.finish()
}

/// Invariance of both angular invariants under random isometries.
pub fn check_invariance(cfg: &VerifyConfig, n: usize) -> CheckRow {
    let mut rng = cfg.rng(4);
    let mut tr = Tracker::new("angular invariant isometry invariance", tolerances::INVARIANT_MATCH);
    for k in 0..n {
        let field = if k % 2 == 0 { FieldTag::Complex } else { FieldTag::Quaternion };
        let x = sample::triple(&mut rng, field);
        let g = sample::isometry(&mut rng, field);
        let Ok(y) = x.act(&g) else {
            tr.fail(json!({ "error": "image triple degenerate" }));
            continue;
        };
        let mut d = (x.cartan_quat() - y.cartan_quat()).abs();
        if field == FieldTag::Complex {
            match (x.cartan_complex(), y.cartan_complex()) {
                (Ok(a), Ok(b)) => d = d.max((a - b).abs()),
                _ => {
                    tr.fail(json!({ "error": "complex invariant unavailable" }));
                    continue;
                }
            }
        }
        tr.record(d, || json!({ "field": field, "matrix": g.matrix }));
    }
    tr.finish()
}

/// The commutation predicate for pure parabolics against the matrix commutator.
pub fn check_commuting_parabolics(cfg: &VerifyConfig, n: usize) -> CheckRow {
    let mut rng = cfg.rng(5);
    let mut tr = Tracker::new("pure parabolic commutation predicate", 0.0);
    for k in 0..n {
        let field = FieldTag::Quaternion;
        let p = sample::heisenberg(&mut rng, field);
        let q = if k % 2 == 0 {
            let (z, _) = p.finite().expect("finite");
            HeisenbergPoint::new(z * sample::normal(&mut rng), sample::imaginary(&mut rng, field)).expect("imaginary")
        } else {
            sample::heisenberg(&mut rng, field)
        };
        let (Ok(a), Ok(b)) = (translation(&p), translation(&q)) else { continue };
        let ab = a.matrix * b.matrix;
        let ba = b.matrix * a.matrix;
        let scale = a.matrix.max_abs() * b.matrix.max_abs();
        let commute = ab.max_abs_diff(&ba) <= 1e-12 * scale;
        match pure_parabolics_commute(&p, &q) {
            Ok(pred) => tr.record(if pred == commute { 0.0 } else { 1.0 }, || json!({ "p": p, "q": q, "predicate": pred, "matrices": commute })),
            Err(e) => tr.fail(json!({ "error": e.to_string() })),
        }
    }
    tr.finish()
}

/// The second edge holonomy reconstructed from a random diagonal first one
/// always makes the product unipotent.
pub fn check_reconstruction(cfg: &VerifyConfig, n: usize) -> CheckRow {
    let mut rng = cfg.rng(6);
    let mut tr = Tracker::new("edge holonomy reconstruction", tolerances::UNIPOTENT);
    for _ in 0..n {
        let f = FieldTag::Quaternion;
        let q = (0.5 * sample::normal(&mut rng)).exp();
        let a = sample::unit(&mut rng, f);
        let b = sample::unit(&mut rng, f);
        let h1 = Isometry::new(Mat3::diag(a * q, b, a * (1.0 / q)), FormTag::J0);
        let p = sample::heisenberg(&mut rng, f);
        match h1.and_then(|h1| Ok((h1, lemma_pure_reconstruct(&h1, &p)?))) {
            Ok((h1, h2)) => {
                let prod = h1.then(&h2).expect("same form");
                let n3 = (crate::isometries::projective_normalize(&prod.matrix) - Mat3::IDENTITY).power(3).max_abs();
                tr.record(if is_pure_parabolic(&prod) { n3 } else { f64::INFINITY }, || json!({ "q": q, "alpha": a, "beta": b, "p": p }));
            }
            Err(e) => tr.fail(json!({ "error": e.to_string() })),
        }
    }
    tr.finish()
}

/// `|tan A| = sinh d(pi(x3), sigma_12)` on random quaternionic triples.
pub fn check_tangent_distance(cfg: &VerifyConfig, n: usize) -> CheckRow {
    let mut rng = cfg.rng(7);
    let mut tr = Tracker::new("tangent of invariant equals sinh of projection distance", tolerances::HOLONOMY);
    for _ in 0..n {
        let x = sample::triple(&mut rng, FieldTag::Quaternion);
        let lhs = x.cartan_quat().tan();
        match project_distance(&x) {
            Ok(s) => tr.record(rel(lhs, s), || json!({ "points": x.lifts(), "tan": lhs, "sinh": s })),
            Err(e) => tr.fail(json!({ "error": e.to_string() })),
        }
    }
    tr.finish()
}

/// The bundled discrete representation: identity holonomies, invariants `pi/3`,
/// parabolic generators and an invariant form of signature (2,1).
pub fn check_rho0(cfg: &VerifyConfig) -> CheckRow {
    let mut tr = Tracker::new("rho0 data", cfg.tol_holonomy);
    let r = match rho0_data() {
        Ok(r) => r,
        Err(e) => {
            tr.fail(json!({ "error": e.to_string() }));
            return tr.finish();
        }
    };
    let run = || -> Result<f64> {
        let c = FigureEightComplex::new(&r.params)?;
        let (h1, h2) = edge_holonomies(&c)?;
        let mut worst: f64 = 0.0;
        for h in [h1, h2] {
            worst = worst.max(crate::isometries::projective_normalize(&h.matrix).max_abs_diff(&Mat3::IDENTITY));
        }
        let pts = r.params.points();
        for k in 0..3 {
            let a = IdealTriple::new([pts[0], pts[1], pts[2 + k]])?.cartan_complex()?;
            worst = worst.max((a - std::f64::consts::FRAC_PI_3).abs());
        }
        let _ = build_gluing_maps(&r.params)?;
        Ok(worst)
    };
    match run() {
        Ok(w) => tr.record(w, || json!({ "params": r.params })),
        Err(e) => tr.fail(json!({ "error": e.to_string() })),
    }
    let sig_ok = r.signature == (2, 1);
    tr.record(if sig_ok { 0.0 } else { 1.0 }, || json!({ "signature": r.signature }));
    for (name, g) in [("G1", r.g1), ("G2", r.g2)] {
        let u = (g - Mat3::IDENTITY).power(3).max_abs();
        tr.record(u, || json!({ "generator": name, "matrix": g }));
        tr.record(if r.form.preserved_by(&g, cfg.tol_form) { 0.0 } else { 1.0 }, || json!({ "generator": name, "form": "not preserved" }));
    }
    tr.finish()
}

/// Full suite at the given configuration. Case counts at `scale = 1`:
/// 10^3 for constructors, round trips, invariance, reconstruction and the
/// tangent identity; 10^4 for the cocycle and the commutation predicate.
pub fn run_suite(cfg: &VerifyConfig) -> Report {
    let checks = vec![
        check_form_preservation(cfg, cfg.count(1000)),
        check_round_trips(cfg, cfg.count(1000)),
        check_cocycle(cfg, cfg.count(10_000)),
        check_invariance(cfg, cfg.count(1000)),
        check_commuting_parabolics(cfg, cfg.count(10_000)),
        check_reconstruction(cfg, cfg.count(1000)),
        check_tangent_distance(cfg, cfg.count(1000)),
        check_rho0(cfg),
    ];
    Report { seed: cfg.seed, passed: checks.iter().all(|c| c.passed), checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let cfg = VerifyConfig { scale: 0.02, ..Default::default() };
        let r = run_suite(&cfg);
        for c in &r.checks {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn form_fault_is_named() {
        let cfg = VerifyConfig { fault: Some(Fault::Form), ..Default::default() };
        let row = check_form_preservation(&cfg, 3);
        assert!(!row.passed);
        assert_eq!(row.name, "form preservation");
    }
}
