use isoelast::error::Error;
use isoelast::geometry::{curved_square_spline, four_patch_square, GeometryMap, MultiPatch};
use isoelast::linalg::{inv2, Mat2, Vec2};
use isoelast::quadrature::GaussRule;
use isoelast::strongsym::{
    divergence_preimage, parametric_divergence, solve_strong, y2_apply, y2_inverse, y2a_apply, y2g1_apply,
    y2g1_inverse, y3_apply, y3_inverse, LineRule, StrongBasis, StrongSpaces, Variant,
};
use isoelast::weaksym::{Material, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

use common::{FIELDS, VECTORS};

fn curved_maps() -> Vec<GeometryMap> {
    vec![GeometryMap::CurvedSquare, curved_square_spline()]
}

fn max_diff(a: &Mat2, b: &Mat2) -> f64 {
    (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).fold(0.0, |m, (i, j)| m.max((a[i][j] - b[i][j]).abs()))
}

fn random_points(seed: u64, k: usize) -> Vec<Vec2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| [rng.gen_range(0.02..0.98), rng.gen_range(0.02..0.98)]).collect()
}

#[test]
fn stress_transforms_round_trip() {
    let line = LineRule::uniform(12, 8);
    for g in curved_maps() {
        for (fi, f) in FIELDS.iter().enumerate() {
            let s = |x: Vec2| f(x).0;
            let fw = |z: Vec2| y2g1_apply(&g, &s, z, &line).unwrap();
            let fw_full = |z: Vec2| y2_apply(&g, &s, z, &line).unwrap();
            for z in random_points(fi as u64, 20) {
                let want = s(g.point(z));
                let back = y2g1_inverse(&g, &fw, z, &line).unwrap();
                assert!(max_diff(&back, &want) <= 1e-8, "{g:?} field {fi}: {back:?} vs {want:?}");
                let back = y2_inverse(&g, &fw_full, z, &line).unwrap();
                assert!(max_diff(&back, &want) <= 1e-8, "{g:?} field {fi}: {back:?} vs {want:?}");
            }
        }
    }
}

#[test]
fn vector_transform_round_trip() {
    let line = LineRule::uniform(12, 8);
    for g in curved_maps() {
        for (fi, v) in VECTORS.iter().enumerate() {
            let fw = |z: Vec2| y3_apply(&g, v, z, &line).unwrap();
            for z in random_points(10 + fi as u64, 20) {
                let want = v(g.point(z));
                let back = y3_inverse(&g, &fw, z, &line).unwrap();
                assert!((back[0] - want[0]).abs().max((back[1] - want[1]).abs()) <= 1e-8);
            }
        }
    }
}

/// Parametric divergence of a transformed field by central differences.
fn fd_divergence(t: &dyn Fn(Vec2) -> Mat2, z: Vec2, h: f64) -> Vec2 {
    let d = |k: usize| {
        let (mut zp, mut zm) = (z, z);
        zp[k] += h;
        zm[k] -= h;
        let (a, b) = (t(zp), t(zm));
        [[(a[0][k] - b[0][k]) / (2.0 * h)], [(a[1][k] - b[1][k]) / (2.0 * h)]]
    };
    let (d1, d2) = (d(0), d(1));
    [d1[0][0] + d2[0][0], d1[1][0] + d2[1][0]]
}

#[test]
fn corrected_transform_commutes_with_divergence() {
    let line = LineRule::uniform(12, 8);
    for g in curved_maps() {
        for (fi, f) in FIELDS.iter().enumerate() {
            let s = |x: Vec2| f(x).0;
            let div = |x: Vec2| f(x).1;
            let t = |z: Vec2| y2_apply(&g, &s, z, &line).unwrap();
            for z in random_points(20 + fi as u64, 10) {
                let lhs = fd_divergence(&t, z, 1e-5);
                let rhs = y3_apply(&g, &div, z, &line).unwrap();
                let err = (lhs[0] - rhs[0]).abs().max((lhs[1] - rhs[1]).abs());
                assert!(err <= 1e-5, "{g:?} field {fi} at {z:?}: {lhs:?} vs {rhs:?}");
            }
        }
    }
}

#[test]
fn uncorrected_transform_commutes_for_traction_free_left_edge() {
    // zero normal stress on x1 = 0, which is the image of z1 = 0 for both maps
    let s = |x: Vec2| -> Mat2 {
        let b = x[0] * x[1] * x[1];
        [[x[0] * (1.0 + x[1]), b], [b, (x[0] * x[1]).cos()]]
    };
    let div =
        |x: Vec2| -> Vec2 { [1.0 + x[1] + 2.0 * x[0] * x[1], x[1] * x[1] - x[0] * (x[0] * x[1]).sin()] };
    let line = LineRule::uniform(12, 8);
    for g in curved_maps() {
        let t = |z: Vec2| y2g1_apply(&g, &s, z, &line).unwrap();
        for z in random_points(30, 10) {
            let lhs = fd_divergence(&t, z, 1e-5);
            let rhs = y3_apply(&g, &div, z, &line).unwrap();
            assert!((lhs[0] - rhs[0]).abs().max((lhs[1] - rhs[1]).abs()) <= 1e-5);
            // the boundary correction vanishes for such fields
            let c = y2a_apply(&g, &s, z, &line).unwrap();
            assert!(c.iter().flatten().all(|v| v.abs() <= 1e-12));
        }
    }
}

#[test]
fn transforms_of_identity_on_curved_square() {
    // F(z) = (z1, z1² + z2): adj J = [[1, 0], [-2 z1, 1]], only F2 is curved.
    // Uncorrected: adj adj^T + 2 z1² e2 e2^T; the trace correction adds 2 z2 e2 e2^T.
    let coarse = LineRule::uniform(3, 1);
    let fine = LineRule::uniform(30, 10);
    let id = |_: Vec2| [[1.0, 0.0], [0.0, 1.0]];
    for g in curved_maps() {
        for z in random_points(40, 20) {
            let (a, b) = (z[0], z[1]);
            let want = [[1.0, -2.0 * a], [-2.0 * a, 1.0 + 6.0 * a * a]];
            for line in [&coarse, &fine] {
                let got = y2g1_apply(&g, &id, z, line).unwrap();
                assert!(max_diff(&got, &want) <= 1e-10, "{got:?} vs {want:?}");
                let full = y2_apply(&g, &id, z, line).unwrap();
                let want_full = [[1.0, -2.0 * a], [-2.0 * a, 1.0 + 6.0 * a * a + 2.0 * b]];
                assert!(max_diff(&full, &want_full) <= 1e-10);
            }
        }
    }
}

#[test]
fn transforms_are_pullbacks_on_identity_map() {
    let g = GeometryMap::Identity;
    let line = LineRule::uniform(4, 4);
    for z in random_points(50, 20) {
        for f in FIELDS {
            let s = |x: Vec2| f(x).0;
            assert!(max_diff(&y2g1_apply(&g, &s, z, &line).unwrap(), &s(z)) <= 1e-15);
            assert!(max_diff(&y2_apply(&g, &s, z, &line).unwrap(), &s(z)) <= 1e-15);
        }
        for v in VECTORS {
            let got = y3_apply(&g, &v, z, &line).unwrap();
            assert!((got[0] - v(z)[0]).abs() + (got[1] - v(z)[1]).abs() <= 1e-15);
        }
    }
}

#[test]
fn normal_trace_on_left_edge_is_preserved() {
    // on z1 = 0 the transformed normal trace is adj J applied to σ times the scaled normal
    let line = LineRule::uniform(12, 8);
    let mut maps = curved_maps();
    maps.push(four_patch_square("dirichlet").patches[3].clone());
    for g in maps {
        for f in FIELDS {
            let s = |x: Vec2| f(x).0;
            for k in 0..=10 {
                let z = [0.0, k as f64 / 10.0];
                let geo = g.eval(z).unwrap();
                let sv = s(geo.x);
                let a = geo.adj;
                let tr = [sv[0][0] * a[0][0] + sv[0][1] * a[0][1], sv[1][0] * a[0][0] + sv[1][1] * a[0][1]];
                let want = [a[0][0] * tr[0] + a[0][1] * tr[1], a[1][0] * tr[0] + a[1][1] * tr[1]];
                for t in [y2g1_apply(&g, &s, z, &line).unwrap(), y2_apply(&g, &s, z, &line).unwrap()] {
                    assert!((t[0][0] - want[0]).abs().max((t[1][0] - want[1]).abs()) <= 1e-10);
                }
            }
        }
    }
}

#[test]
fn space_parameters() {
    assert!(StrongSpaces::new(2, 0, 4).is_err());
    assert!(StrongSpaces::new(2, 2, 4).is_err());
    let sp = StrongSpaces::new(2, 1, 4).unwrap();
    assert_eq!(sp.stress[0].degree(), [3, 1]);
    assert_eq!(sp.stress[2].degree(), [1, 3]);
    assert_eq!(sp.stress_dim(), 7 * 5 * 2 + 6 * 6);
    assert_eq!(sp.disp_dim(), 2 * 6 * 5);
}

#[test]
fn divergence_preimage_examples() {
    let sp = StrongSpaces::new(2, 1, 8).unwrap();
    let zero = divergence_preimage(&sp, &vec![0.0; sp.disp_dim()]);
    assert!(zero.iter().all(|&c| c == 0.0));
    // v = (1, 0) gives S11 = z1 and nothing else
    let mut v = vec![0.0; sp.disp_dim()];
    v[..sp.disp[0].dim()].iter_mut().for_each(|c| *c = 1.0);
    let s = divergence_preimage(&sp, &v);
    assert!(s[sp.stress_offset(1)..].iter().all(|&c| c == 0.0));
    for z in random_points(60, 20) {
        let (val, _) = sp.stress[0].eval_field(&s[..sp.stress[0].dim()], z);
        assert!((val - z[0]).abs() <= 1e-14);
    }
}

fn l2_norm(sp: &isoelast::bspline::TensorSpace, c: &[f64], n: usize) -> f64 {
    let rule = GaussRule::new(4);
    let mut acc = 0.0;
    for e in isoelast::bspline::ParametricMesh::uniform(n).elements() {
        for (y, wy) in rule.mapped(e[1][0], e[1][1]) {
            for (x, wx) in rule.mapped(e[0][0], e[0][1]) {
                let (v, _) = sp.eval_field(c, [x, y]);
                acc += wx * wy * v * v;
            }
        }
    }
    acc.sqrt()
}

#[test]
fn divergence_preimage_of_random_fields() {
    let n = 8;
    let sp = StrongSpaces::new(2, 1, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..20 {
        let v: Vec<f64> = (0..sp.disp_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = divergence_preimage(&sp, &v);
        let back = parametric_divergence(&sp, &s);
        let res = back.iter().zip(&v).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(res <= 1e-11, "residual {res:e}");
        // zero normal trace on z1 = 0
        for k in 0..=10 {
            let z = [0.0, k as f64 / 10.0];
            for c in 0..2 {
                let o = sp.stress_offset(c);
                let (t, _) = sp.stress[c].eval_field(&s[o..o + sp.stress[c].dim()], z);
                assert!(t.abs() <= 1e-14);
            }
        }
        // |∫_0^z f|² <= z ∫_0^1 |f|², so the preimage norm is at most |v| / sqrt 2
        let n0 = sp.disp[0].dim();
        let nv =
            (l2_norm(&sp.disp[0], &v[..n0], n).powi(2) + l2_norm(&sp.disp[1], &v[n0..], n).powi(2)).sqrt();
        let ns = (0..3)
            .map(|k| {
                let o = sp.stress_offset(k);
                let w = if k == 1 { 2.0 } else { 1.0 };
                w * l2_norm(&sp.stress[k], &s[o..o + sp.stress[k].dim()], n).powi(2)
            })
            .sum::<f64>()
            .sqrt();
        assert!(ns <= nv / 2f64.sqrt() * (1.0 + 1e-12), "{ns} vs {nv}");
    }
}

#[test]
fn spline_fields_commute_with_divergence() {
    // physical divergence of the transformed stress equals the transformed parametric
    // divergence, evaluated through the displacement basis
    let sp = StrongSpaces::new(2, 1, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    for g in [GeometryMap::Identity, GeometryMap::CurvedSquare, curved_square_spline()] {
        let basis = StrongBasis::new(&sp, &g, Variant::Dirichlet);
        for _ in 0..3 {
            let c: Vec<f64> = (0..sp.stress_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let dv = parametric_divergence(&sp, &c);
            for z in random_points(71, 10) {
                let (_, div) = basis.eval_stress(&c, z).unwrap();
                let u = basis.eval_disp(&dv, z).unwrap();
                let scale = 1.0 + div[0].abs().max(div[1].abs());
                assert!((div[0] - u[0]).abs().max((div[1] - u[1]).abs()) <= 1e-10 * scale, "{g:?}");
            }
        }
    }
}

#[test]
fn spline_field_divergence_matches_finite_differences() {
    let n = 4;
    let sp = StrongSpaces::new(2, 1, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(80);
    let h = 1e-5;
    for g in [GeometryMap::CurvedSquare, curved_square_spline()] {
        for variant in [Variant::Dirichlet, Variant::TractionFreeLeft] {
            let basis = StrongBasis::new(&sp, &g, variant);
            let c: Vec<f64> = (0..sp.stress_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut checked = 0;
            for z in random_points(81, 30) {
                let near = |t: f64| ((t * n as f64).round() / n as f64 - t).abs() < 3.0 * h;
                if near(z[0]) || near(z[1]) {
                    continue;
                }
                let (s, div) = basis.eval_stress(&c, z).unwrap();
                assert_eq!(s[0][1], s[1][0]);
                let mut dz = [[[0.0; 2]; 2]; 2];
                for k in 0..2 {
                    let (mut zp, mut zm) = (z, z);
                    zp[k] += h;
                    zm[k] -= h;
                    let (a, b) = (basis.eval_stress(&c, zp).unwrap().0, basis.eval_stress(&c, zm).unwrap().0);
                    for i in 0..2 {
                        for j in 0..2 {
                            dz[k][i][j] = (a[i][j] - b[i][j]) / (2.0 * h);
                        }
                    }
                }
                let ji = inv2(&g.eval(z).unwrap().jac);
                let mut fd = [0.0; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        for k in 0..2 {
                            fd[i] += ji[k][j] * dz[k][i][j];
                        }
                    }
                }
                let scale = 1.0 + fd[0].abs().max(fd[1].abs());
                assert!((fd[0] - div[0]).abs().max((fd[1] - div[1]).abs()) <= 1e-5 * scale);
                checked += 1;
            }
            assert!(checked >= 20);
        }
    }
}

#[test]
fn traction_free_variant_has_zero_traction_on_left_edge() {
    let sp = StrongSpaces::new(2, 1, 4).unwrap();
    let g = GeometryMap::CurvedSquare;
    let basis = StrongBasis::new(&sp, &g, Variant::TractionFreeLeft);
    for k in 0..=20 {
        let fr = basis.frame([0.0, k as f64 / 20.0]).unwrap();
        let n = isoelast::fem::scaled_normal(0, &fr.geo);
        for (_, s, _) in basis.stress_at(&fr) {
            let t = [s[0][0] * n[0] + s[0][1] * n[1], s[1][0] * n[0] + s[1][1] * n[1]];
            assert!(t[0].abs().max(t[1].abs()) <= 1e-10);
        }
    }
}

fn zero(_: Vec2) -> Vec2 {
    [0.0, 0.0]
}

fn no_traction(_: Vec2, _: Vec2) -> Vec2 {
    [0.0, 0.0]
}

fn problem(domain: &MultiPatch) -> Problem<'_> {
    Problem {
        domain,
        material: Material::new(2.0, 1.0).unwrap(),
        load: &zero,
        displacement: &zero,
        traction: &no_traction,
    }
}

#[test]
fn homogeneous_data_gives_zero_solution() {
    let sp = StrongSpaces::new(2, 1, 4).unwrap();
    for g in [GeometryMap::Identity, GeometryMap::CurvedSquare] {
        let dom = MultiPatch::single(g, ["dirichlet"; 4]);
        let sol = solve_strong(&sp, &problem(&dom), 4).unwrap();
        assert!(sol.stress.iter().chain(&sol.disp).all(|v| v.abs() <= 1e-12));
    }
}

#[test]
fn unsupported_configurations_rejected() {
    let sp = StrongSpaces::new(2, 1, 4).unwrap();
    let dom = four_patch_square("dirichlet");
    assert!(matches!(solve_strong(&sp, &problem(&dom), 4), Err(Error::Unsupported(_))));
    let dom = MultiPatch::single(GeometryMap::Identity, ["dirichlet", "traction", "dirichlet", "dirichlet"]);
    assert!(matches!(solve_strong(&sp, &problem(&dom), 4), Err(Error::Unsupported(_))));
    let dom = MultiPatch::single(GeometryMap::Identity, ["traction", "dirichlet", "dirichlet", "dirichlet"]);
    let push = |_: Vec2, _: Vec2| [1.0, 0.0];
    let prob = Problem { traction: &push, ..problem(&dom) };
    assert!(matches!(solve_strong(&sp, &prob, 4), Err(Error::Unsupported(_))));
}

#[test]
fn traction_free_left_edge_problem_solves() {
    let sp = StrongSpaces::new(2, 1, 4).unwrap();
    let dom =
        MultiPatch::single(GeometryMap::CurvedSquare, ["traction", "dirichlet", "dirichlet", "dirichlet"]);
    let load = |x: Vec2| [x[1], 1.0 - x[0]];
    let prob = Problem { load: &load, ..problem(&dom) };
    let sol = solve_strong(&sp, &prob, 4).unwrap();
    assert_eq!(sol.basis.variant, Variant::TractionFreeLeft);
    assert!(sol.report.residual <= 1e-10);
    for k in 0..=10 {
        let v = sol.eval([0.0, k as f64 / 10.0]).unwrap();
        let n =
            isoelast::fem::scaled_normal(0, &GeometryMap::CurvedSquare.eval([0.0, k as f64 / 10.0]).unwrap());
        let t = [v.sigma[0][0] * n[0] + v.sigma[0][1] * n[1], v.sigma[1][0] * n[0] + v.sigma[1][1] * n[1]];
        assert!(t[0].abs().max(t[1].abs()) <= 1e-10);
    }
}
