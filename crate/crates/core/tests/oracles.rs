//! Independent oracles: values recomputed with plain complex arithmetic or
//! closed forms, checked against the library.

use std::f64::consts::FRAC_PI_3;

use num_complex::Complex64 as C;

use hyperrep_core::gluing::{
    build_gluing_maps, checked_holonomies, face_constraints, gluing_matrices, holonomy_words, real_locus_params, TetraParams, FACE_MAPS,
};
use hyperrep_core::variety::{
    angular_chart, chart_jacobian_rank, jacobian, jacobian_richardson, kernel_basis, rho0_data, solve, ComplexResidual, ResidualMap,
};
use hyperrep_core::{Error, FormTag, Mat3, Quaternion};

fn c(q: Quaternion) -> C {
    assert!(q.j == 0.0 && q.k == 0.0);
    C::new(q.re, q.i)
}

/// Siegel lift ((-|z|^2 + t)/2, z, 1) with t = i t_im.
fn lift(z: C, t_im: f64) -> [C; 3] {
    [(C::new(-z.norm_sqr(), t_im)) / 2.0, z, C::new(1.0, 0.0)]
}

const INF: [C; 3] = [C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)];
const ZERO: [C; 3] = [C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)];

/// Z J0 W* with J0 antidiagonal.
fn pair(z: &[C; 3], w: &[C; 3]) -> C {
    z[0] * w[2].conj() + z[1] * w[1].conj() + z[2] * w[0].conj()
}

fn cartan(a: &[C; 3], b: &[C; 3], d: &[C; 3]) -> f64 {
    let p = pair(a, b) * pair(b, d) * pair(d, a);
    (-p).arg()
}

fn falbel_points() -> [[C; 3]; 5] {
    let s3 = 3f64.sqrt();
    [INF, ZERO, lift(C::new(1.0, 0.0), s3), lift(C::new(0.5, s3 / 2.0), s3), lift(C::new(-0.5, s3 / 2.0), s3)]
}

fn points_of(x: &[f64]) -> [[C; 3]; 5] {
    [INF, ZERO, lift(C::new(1.0, 0.0), x[0]), lift(C::new(x[3], x[4]), x[1]), lift(C::new(x[5], x[6]), x[2])]
}

#[test]
fn falbel_angles_are_pi_over_three() {
    let p = falbel_points();
    for k in 2..5 {
        assert!((cartan(&p[0], &p[1], &p[k]) - FRAC_PI_3).abs() < 1e-12);
    }
    let x = TetraParams::falbel().to_complex_vec().unwrap();
    for a in angular_chart(&x).unwrap() {
        assert!((a - FRAC_PI_3).abs() < 1e-12);
    }
}

#[test]
fn bundled_parameters_are_the_falbel_point() {
    let r = rho0_data().unwrap();
    let a = r.complex_vec();
    let b = TetraParams::falbel().to_complex_vec().unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-15);
    }
}

#[test]
fn bundled_gluing_table_matches_code() {
    let t: hyperrep_core::gluing::GluingTable = serde_json::from_str(hyperrep_core::variety::GLUING_TABLE_JSON).unwrap();
    assert_eq!(t, hyperrep_core::gluing::GluingTable::figure_eight());
}

#[test]
fn g1_has_the_displayed_triangular_form() {
    let p = TetraParams::falbel();
    let g = build_gluing_maps(&p).unwrap();
    let m = g[0].matrix;
    let (z, _) = p.q2.finite().unwrap();
    let (w, _) = p.q3.finite().unwrap();
    let (_, t) = p.q1.finite().unwrap();
    let a = c(m[(0, 0)]);
    let b = c(m[(1, 1)]);
    let z = c(z);
    let w = c(w);
    let t = c(t);
    let tol = 1e-12;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        assert!(m[(i, j)].norm() < tol);
    }
    assert!((c(m[(1, 0)]) - a).norm() < tol);
    assert!((c(m[(2, 0)]) - a * (-1.0 - t) / 2.0).norm() < tol);
    assert!((c(m[(2, 1)]) + b).norm() < tol);
    assert!((c(m[(2, 2)]) - 1.0 / a.conj()).norm() < tol);
    assert!((b.norm() - 1.0).abs() < tol);
    assert!((w - (z - 1.0) * b * a.conj()).norm() < tol);
    assert!((a.norm_sqr() - w.norm_sqr() / (z - 1.0).norm_sqr()).abs() < tol);
}

#[test]
fn r_perturbation_shows_in_the_first_constraint() {
    let mut x = TetraParams::falbel().to_complex_vec().unwrap();
    x[2] += 0.1;
    let fc = face_constraints(&TetraParams::from_complex_vec(&x).unwrap()).unwrap();
    // |w| = 1 at the base point.
    assert!((fc[0] - 0.1).abs() < 1e-12, "{fc:?}");
    let p = points_of(&x);
    let d = cartan(&p[3], &p[2], &p[0]) - cartan(&p[4], &p[1], &p[0]);
    assert!(d.abs() > 1e-3);
}

#[test]
fn symmetric_toy_data_is_flagged() {
    // z = w and t = s, with r chosen off the first equation.
    let x = [0.7, 0.7, 2.5, 0.3, 1.1, 0.3, 1.1];
    let p = TetraParams::from_complex_vec(&x).unwrap();
    let fc = face_constraints(&p).unwrap();
    assert!(fc[0].abs() > 1e-3);
    assert!(matches!(build_gluing_maps(&p), Err(Error::GluingImpossible { face: 1, .. })));
}

/// Root of `f` on [lo, hi]: scan for a sign change away from any wrap jump, then bisect.
fn bisect(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let n = 400;
    let at = |k: usize| lo + (hi - lo) * k as f64 / n as f64;
    let k = (0..n)
        .find(|&k| {
            let (u, v) = (f(at(k)), f(at(k + 1)));
            u * v <= 0.0 && (u - v).abs() < 0.5
        })
        .expect("no sign change");
    let (mut a, mut b) = (at(k), at(k + 1));
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[test]
fn first_constraint_is_the_g1_face_equality() {
    // Solve the first constraint in r with everything else perturbed, then
    // compare the two invariants it is supposed to equate.
    let base = TetraParams::falbel().to_complex_vec().unwrap();
    for shift in [[0.05, -0.02, 0.03, 0.01], [-0.04, 0.03, -0.02, 0.02], [0.1, 0.1, -0.05, -0.03]] {
        let mut x = base.clone();
        x[0] += shift[0];
        x[1] += shift[1];
        x[3] += shift[2];
        x[6] += shift[3];
        let f = |r: f64| {
            let mut y = x.clone();
            y[2] = r;
            face_constraints(&TetraParams::from_complex_vec(&y).unwrap()).unwrap()[0]
        };
        x[2] = bisect(f, 0.5, 3.0);
        let p = points_of(&x);
        let d = cartan(&p[3], &p[2], &p[0]) - cartan(&p[4], &p[1], &p[0]);
        assert!(d.abs() < 1e-9, "{d}");
    }
}

#[test]
fn second_constraint_is_the_g3_face_equality() {
    let base = TetraParams::falbel().to_complex_vec().unwrap();
    for shift in [[0.05, -0.02, 0.03], [-0.04, 0.03, -0.02], [0.02, 0.06, 0.04]] {
        let mut x = base.clone();
        x[0] += shift[0];
        x[1] += shift[1];
        x[5] += shift[2];
        let f = |re_z: f64| {
            let mut y = x.clone();
            y[3] = re_z;
            face_constraints(&TetraParams::from_complex_vec(&y).unwrap()).unwrap()[1]
        };
        x[3] = bisect(f, base[3] - 0.3, base[3] + 0.3);
        let p = points_of(&x);
        let d = cartan(&p[2], &p[1], &p[0]) - cartan(&p[3], &p[1], &p[4]);
        assert!(d.abs() < 1e-9, "{d}");
    }
}

#[test]
fn stabilizer_angle_does_not_move_face_vertices() {
    let base = TetraParams::falbel().promote();
    for th in [0.0, 1.0] {
        let p = TetraParams { thetas: [th; 3], ..base };
        let g = build_gluing_maps(&p).unwrap();
        let pts = p.points();
        for (k, (src, dst)) in FACE_MAPS.iter().enumerate() {
            for i in 0..3 {
                let img = pts[src[i]].act(&g[k]).unwrap();
                assert!(img.approx_eq(&pts[dst[i]], 1e-8), "face {} vertex {i} theta {th}", k + 1);
            }
        }
    }
}

#[test]
fn random_words_fix_their_edges() {
    let base = TetraParams::falbel().to_complex_vec().unwrap();
    let shifts = [0.31, -0.17, 0.22, -0.13, 0.08, 0.27, -0.19];
    let x: Vec<f64> = base.iter().zip(shifts).map(|(a, b)| a + b).collect();
    let p = TetraParams::from_complex_vec(&x).unwrap();
    let (h1, h2) = holonomy_words(&gluing_matrices(&p).unwrap()).unwrap();
    assert!(h1.max_abs_diff(&Mat3::IDENTITY) > 1e-3);
    let s = h1.max_abs();
    // Row vectors: p1 = (1,0,0) and p2 = (0,0,1) are eigenvectors.
    for (i, j) in [(0, 1), (0, 2), (2, 0), (2, 1)] {
        assert!(h1[(i, j)].norm() < 1e-12 * s, "H1[{i}][{j}]");
    }
    let q2 = p.lifts()[3];
    let img = h2.apply(&q2);
    let k = img[2].inv().unwrap();
    for i in 0..3 {
        assert!((k * img[i] - q2[i]).norm() < 1e-10);
    }
    assert!(checked_holonomies(&p, &gluing_matrices(&p).unwrap()).is_ok());
}

#[test]
fn rotated_word_is_conjugate() {
    let base = TetraParams::falbel().to_complex_vec().unwrap();
    let x: Vec<f64> = base.iter().enumerate().map(|(i, a)| a + 0.05 * (i as f64).sin()).collect();
    let g = gluing_matrices(&TetraParams::from_complex_vec(&x).unwrap()).unwrap();
    let (h1, _) = holonomy_words(&g).unwrap();
    let inv = |m: &Mat3| m.inverse().unwrap();
    let rotated = g[2] * inv(&g[1]) * g[0] * inv(&g[2]) * inv(&g[0]);
    let conj = g[0] * h1 * inv(&g[0]);
    assert!(rotated.max_abs_diff(&conj) < 1e-10);
}

#[test]
fn mirror_shapes_give_conjugate_holonomy() {
    let u1 = Quaternion::complex(0.4, 0.9);
    let u2 = Quaternion::complex(0.6, 0.7);
    let h = |a: Quaternion, b: Quaternion| holonomy_words(&gluing_matrices(&real_locus_params(a, b).unwrap()).unwrap()).unwrap().0;
    let a = h(u1, u2);
    let b = h(u1.conj(), u2.conj());
    for i in 0..3 {
        let (x, y) = (a[(i, i)], b[(i, i)]);
        assert!((x.re - y.re).abs() < 1e-12 && (x.i + y.i).abs() < 1e-12);
    }
    assert!(a.max_abs_diff(&Mat3::IDENTITY) > 1e-3);
}

#[test]
fn regular_real_locus_closes() {
    let u = Quaternion::complex(0.5, 3f64.sqrt() / 2.0);
    let p = real_locus_params(u, u).unwrap();
    let (h1, h2) = holonomy_words(&gluing_matrices(&p).unwrap()).unwrap();
    assert!(h1.max_abs_diff(&Mat3::IDENTITY) < 1e-8);
    assert!(h2.max_abs_diff(&Mat3::IDENTITY) < 1e-8);
}

/// Sylvester-type signature oracle: a negative vector exists and the form is
/// positive definite on its orthogonal complement.
#[test]
fn rho0_form_signature_and_invariance() {
    let r = rho0_data().unwrap();
    assert_eq!(r.form_solutions, 1);
    let h: [[C; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| c(r.form.matrix[(i, j)])));
    let q = |v: &[C; 3], w: &[C; 3]| -> C {
        let mut s = C::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                s += v[i] * h[i][j] * w[j].conj();
            }
        }
        s
    };
    let mut neg = None;
    'outer: for a in -4..=4 {
        for b in -4..=4 {
            for d in -4..=4 {
                let v = [C::new(a as f64, 0.3 * b as f64), C::new(b as f64, 0.0), C::new(d as f64, 0.1 * a as f64)];
                if q(&v, &v).re < -1e-6 {
                    neg = Some(v);
                    break 'outer;
                }
            }
        }
    }
    let n = neg.expect("a negative vector");
    // Basis of n^perp: solve q(v, n) = 0 for two independent v.
    let coef: [C; 3] = std::array::from_fn(|j| (0..3).map(|i| h[j][i] * n[i].conj()).sum::<C>());
    let piv = (0..3).max_by(|&a, &b| coef[a].norm().total_cmp(&coef[b].norm())).unwrap();
    let others: Vec<usize> = (0..3).filter(|&k| k != piv).collect();
    let basis: Vec<[C; 3]> = others
        .iter()
        .map(|&k| {
            let mut v = [C::new(0.0, 0.0); 3];
            v[k] = C::new(1.0, 0.0);
            v[piv] = -coef[k] / coef[piv];
            v
        })
        .collect();
    for v in &basis {
        assert!(q(v, &n).norm() < 1e-9);
    }
    let a11 = q(&basis[0], &basis[0]).re;
    let a22 = q(&basis[1], &basis[1]).re;
    let a12 = q(&basis[0], &basis[1]);
    assert!(a11 > 0.0 && a11 * a22 - a12.norm_sqr() > 0.0);
    assert_eq!(r.signature, (2, 1));

    let mul = |a: &[[C; 3]; 3], b: &[[C; 3]; 3]| -> [[C; 3]; 3] { std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum())) };
    for g in [r.g1, r.g2] {
        let gm: [[C; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| c(g[(i, j)])));
        let gs: [[C; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| gm[j][i].conj()));
        let lhs = mul(&mul(&gm, &h), &gs);
        for i in 0..3 {
            for j in 0..3 {
                assert!((lhs[i][j] - h[i][j]).norm() < 1e-12);
            }
        }
        let mut n = gm;
        for (i, row) in n.iter_mut().enumerate() {
            row[i] -= 1.0;
        }
        let n3 = mul(&mul(&n, &n), &n);
        assert!(n3.iter().flatten().all(|e| e.norm() < 1e-12));
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[test]
fn residual_taylor_orders_at_rho0() {
    let x = rho0_data().unwrap().complex_vec();
    let map = ComplexResidual::FIRST;
    let k = kernel_basis(&map, &x).unwrap();
    let t: Vec<f64> = (0..7).map(|r| (k[(r, 0)] + k[(r, 1)] - k[(r, 2)]) / 3f64.sqrt()).collect();
    let y: Vec<f64> = x.iter().zip(&t).map(|(a, b)| a + 0.01 * b).collect();
    let along = norm(&map.eval(&y).unwrap());
    // A unit normal direction: the top right singular vector.
    let j = jacobian(&map, &x).unwrap();
    let svd = j.clone().svd(false, true);
    let top = (0..svd.singular_values.len()).max_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b])).unwrap();
    let vt = svd.v_t.unwrap();
    let y: Vec<f64> = x.iter().enumerate().map(|(i, a)| a + 0.01 * vt[(top, i)]).collect();
    let across = norm(&map.eval(&y).unwrap());
    assert!(along < 1e-3 && along > 1e-7, "{along}");
    assert!(across > 5e-3 && across < 1e-1, "{across}");
}

#[test]
fn solver_returns_to_the_solution_set() {
    let x = rho0_data().unwrap().complex_vec();
    let y: Vec<f64> = x.iter().enumerate().map(|(i, a)| a + 1e-3 * ((i * 7 % 5) as f64 - 2.0)).collect();
    let s = solve(&ComplexResidual::FIRST, &y).unwrap();
    assert!(s.converged && s.residual_norm < 1e-10, "{:?}", s.history);
    let again = solve(&ComplexResidual::FIRST, &y).unwrap();
    assert_eq!(s.x, again.x);
    assert_eq!(s.history, again.history);
}

#[test]
fn coincident_start_is_a_decode_error() {
    let mut x = rho0_data().unwrap().complex_vec();
    x[1] = x[0];
    x[3] = 1.0;
    x[4] = 0.0;
    assert!(matches!(solve(&ComplexResidual::FIRST, &x), Err(Error::Decode(_))));
}

#[test]
fn jacobian_matches_richardson_at_feasible_points() {
    let x = rho0_data().unwrap().complex_vec();
    for k in 0..4 {
        let y: Vec<f64> = x.iter().enumerate().map(|(i, a)| a + 0.02 * (((i + 3 * k) as f64) * 1.7).sin()).collect();
        let s = solve(&ComplexResidual::FIRST, &y).unwrap();
        assert!(s.converged);
        let a = jacobian(&ComplexResidual::FIRST, &s.x).unwrap();
        let b = jacobian_richardson(&ComplexResidual::FIRST, &s.x, 1e-3).unwrap();
        let d = (&a - &b).amax() / b.amax();
        assert!(d < 1e-5, "{d}");
    }
}

#[test]
fn nearby_solutions_move_the_chart() {
    let x = rho0_data().unwrap().complex_vec();
    let mut prev = angular_chart(&x).unwrap();
    for step in 1..=3 {
        let y: Vec<f64> = x.iter().enumerate().map(|(i, a)| a + 0.01 * step as f64 * (i as f64 + 1.0).cos()).collect();
        let s = solve(&ComplexResidual::FIRST, &y).unwrap();
        assert!(s.converged);
        let ch = angular_chart(&s.x).unwrap();
        assert!(ch.iter().any(|a| (a - FRAC_PI_3).abs() > 1e-6));
        assert!(ch.iter().zip(&prev).all(|(a, b)| (a - b).abs() < 0.1));
        prev = ch;
    }
}

#[test]
fn chart_is_a_local_parameterization_at_rho0() {
    let x = rho0_data().unwrap().complex_vec();
    assert_eq!(chart_jacobian_rank(&x).unwrap(), 3);
}

#[test]
fn quaternionic_angles_are_a_gauge_at_rho0() {
    use hyperrep_core::variety::QuaternionicResidual;
    let r = rho0_data().unwrap();
    let x = r.quaternionic_vec();
    for k in 15..18 {
        let mut y = x.clone();
        y[k] += 1e-3;
        let v = norm(&QuaternionicResidual::FIRST.eval(&y).unwrap());
        assert!(v < 1e-8, "theta{}: {v:.3e}", k - 14);
    }
}

#[test]
fn tangent_identity_closed_form() {
    // Ball triples (0, -1), (0, 1), (sqrt(1 - |zn|^2), zn): tan A = 2|Im zn| / (1 - |zn|^2).
    use hyperrep_core::boundary::{ball_to_proj, BallPoint};
    use hyperrep_core::cartan::{project_distance, IdealTriple};
    for (a, b) in [(0.3, 0.0), (0.1, 0.4), (-0.2, 0.5)] {
        let zn = Quaternion::new(0.0, a, b, 0.0);
        let x3 = BallPoint::new(Quaternion::real((1.0 - zn.norm_sqr()).sqrt()), zn);
        let pts = [BallPoint::new(Quaternion::ZERO, -Quaternion::ONE), BallPoint::new(Quaternion::ZERO, Quaternion::ONE), x3];
        let t = IdealTriple::new(pts.map(|p| ball_to_proj(&p).to_form(FormTag::J0))).unwrap();
        let expect = 2.0 * zn.im_norm() / (1.0 - zn.norm_sqr());
        let got = project_distance(&t).unwrap();
        assert!((got - expect).abs() < 1e-8 * expect.max(1.0), "{got} {expect}");
        assert!((t.cartan_quat().tan() - expect).abs() < 1e-8 * expect.max(1.0));
    }
}
