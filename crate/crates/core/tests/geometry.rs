#![allow(clippy::needless_range_loop)]

use isoelast::error::Error;
use isoelast::geometry::{
    adjugate, curved_square_spline, disk_five_patch, four_patch_square, inverse_hessians, GeometryMap,
    Interface, MultiPatch, SplinePatch,
};
use isoelast::linalg::{inv2, matmul, Mat2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn test_maps() -> Vec<GeometryMap> {
    let mut maps = vec![GeometryMap::Identity, GeometryMap::CurvedSquare, curved_square_spline()];
    maps.extend(four_patch_square("dirichlet").patches);
    maps.extend(disk_five_patch("traction", "dirichlet").patches);
    maps
}

fn max_abs(m: &Mat2) -> f64 {
    m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()))
}

#[test]
fn curved_square_jacobian() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for g in [GeometryMap::CurvedSquare, curved_square_spline()] {
        for _ in 0..50 {
            let z = [rng.gen::<f64>(), rng.gen::<f64>()];
            let p = g.eval(z).unwrap();
            assert!((p.x[0] - z[0]).abs() < 1e-14 && (p.x[1] - z[0] * z[0] - z[1]).abs() < 1e-14);
            let want = [[1.0, 0.0], [2.0 * z[0], 1.0]];
            for i in 0..2 {
                for j in 0..2 {
                    assert!((p.jac[i][j] - want[i][j]).abs() < 1e-13);
                }
            }
            assert!((p.det - 1.0).abs() < 1e-13);
            let d = g.derivs(z);
            assert!((d.d2[1][0][0] - 2.0).abs() < 1e-12);
            let others = [d.d2[0][0][0], d.d2[0][0][1], d.d2[0][1][1], d.d2[1][0][1], d.d2[1][1][1]];
            assert!(others.iter().all(|v| v.abs() < 1e-12));
        }
    }
}

#[test]
fn identity_map() {
    let p = GeometryMap::Identity.eval([0.3, 0.8]).unwrap();
    assert_eq!(p.jac, [[1.0, 0.0], [0.0, 1.0]]);
    assert_eq!(p.adj, [[1.0, 0.0], [0.0, 1.0]]);
    assert_eq!(GeometryMap::Identity.invert([0.2, 0.4]).unwrap(), [0.2, 0.4]);
    let d = GeometryMap::Identity.derivs([0.3, 0.8]);
    assert!(d.d2.iter().flatten().flatten().all(|&v| v == 0.0));
}

#[test]
fn adjugate_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let j: Mat2 = [
            [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
            [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let m = matmul(&j, &adjugate(&j));
        let r = [[m[0][0] - det, m[0][1]], [m[1][0], m[1][1] - det]];
        assert!(max_abs(&r) <= 1e-14 * (1.0 + max_abs(&j).powi(2)));
    }
}

#[test]
fn jacobian_inverse_at_quadrature_points() {
    let rule = isoelast::quadrature::GaussRule::new(4);
    for g in test_maps() {
        for e in isoelast::bspline::ParametricMesh::uniform(4).elements() {
            let eq = isoelast::fem::ElementQuad::new(&g, e, &rule).unwrap();
            for qp in &eq.points {
                let ji = inv2(&qp.geo.jac);
                let m = matmul(&qp.geo.jac, &ji);
                assert!(max_abs(&[[m[0][0] - 1.0, m[0][1]], [m[1][0], m[1][1] - 1.0]]) <= 1e-12);
                let scaled = [
                    [qp.geo.det * ji[0][0], qp.geo.det * ji[0][1]],
                    [qp.geo.det * ji[1][0], qp.geo.det * ji[1][1]],
                ];
                let d = [
                    [scaled[0][0] - qp.geo.adj[0][0], scaled[0][1] - qp.geo.adj[0][1]],
                    [scaled[1][0] - qp.geo.adj[1][0], scaled[1][1] - qp.geo.adj[1][1]],
                ];
                assert!(max_abs(&d) <= 1e-12);
            }
        }
    }
}

#[test]
fn inversion_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cs = GeometryMap::CurvedSquare.invert([0.5, 0.9]).unwrap();
    assert!((cs[0] - 0.5).abs() < 1e-15 && (cs[1] - 0.65).abs() < 1e-15);
    for g in test_maps() {
        for _ in 0..50 {
            let z = [rng.gen::<f64>(), rng.gen::<f64>()];
            let back = g.invert(g.point(z)).unwrap();
            assert!((back[0] - z[0]).abs() <= 1e-10 && (back[1] - z[1]).abs() <= 1e-10, "{g:?}");
        }
    }
}

#[test]
fn inversion_outside_domain_fails() {
    let g = curved_square_spline();
    assert!(matches!(g.invert([5.0, 5.0]), Err(Error::InversionFailed(..))));
}

#[test]
fn second_derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = 1e-5;
    for g in test_maps() {
        for _ in 0..20 {
            let z = [rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95)];
            let d = g.derivs(z);
            for j in 0..2 {
                let mut zp = z;
                let mut zm = z;
                zp[j] += h;
                zm[j] -= h;
                let (a, b) = (g.derivs(zp).d1, g.derivs(zm).d1);
                for n in 0..2 {
                    for i in 0..2 {
                        let fd = (a[n][i] - b[n][i]) / (2.0 * h);
                        assert!((fd - d.d2[n][i][j]).abs() <= 1e-6 * (1.0 + fd.abs()));
                    }
                }
            }
        }
    }
}

#[test]
fn inverse_hessian_chain_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for g in test_maps() {
        for _ in 0..20 {
            let z = [rng.gen::<f64>(), rng.gen::<f64>()];
            let d = g.derivs(z);
            let hg = inverse_hessians(&d);
            let ji = inv2(&d.d1);
            // second derivatives of (F^{-1} ∘ F)(z) = z vanish
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let mut s = 0.0;
                        for a in 0..2 {
                            for b in 0..2 {
                                s += hg[k][a][b] * d.d1[a][i] * d.d1[b][j];
                            }
                        }
                        for m in 0..2 {
                            s += ji[k][m] * d.d2[m][i][j];
                        }
                        assert!(s.abs() <= 1e-10, "{g:?}: {s:e}");
                    }
                }
            }
        }
    }
}

#[test]
fn inverse_hessian_of_curved_square_in_closed_form() {
    // F^{-1}(x, y) = (x, y - x^2)
    let hg = inverse_hessians(&GeometryMap::CurvedSquare.derivs([0.4, 0.3]));
    assert!(max_abs(&hg[0]) < 1e-14);
    assert!((hg[1][0][0] + 2.0).abs() < 1e-14);
    assert!(hg[1][0][1].abs() + hg[1][1][0].abs() + hg[1][1][1].abs() < 1e-14);
}

#[test]
fn inverse_hessian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let h = 1e-5;
    for g in test_maps() {
        for _ in 0..10 {
            let z = [rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9)];
            let x = g.point(z);
            let hg = inverse_hessians(&g.derivs(z));
            for b in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[b] += h;
                xm[b] -= h;
                let jp = inv2(&g.derivs(g.invert(xp).unwrap()).d1);
                let jm = inv2(&g.derivs(g.invert(xm).unwrap()).d1);
                for k in 0..2 {
                    for a in 0..2 {
                        let fd = (jp[k][a] - jm[k][a]) / (2.0 * h);
                        assert!((fd - hg[k][a][b]).abs() <= 1e-5 * (1.0 + fd.abs()));
                    }
                }
            }
        }
    }
}

#[test]
fn interfaces_conform() {
    for dom in [four_patch_square("dirichlet"), disk_five_patch("traction", "dirichlet")] {
        for it in &dom.interfaces {
            assert!(dom.interface_mismatch(it, 100) <= 1e-10);
        }
        dom.validate().unwrap();
    }
}

#[test]
fn single_patch_topology() {
    let dom = MultiPatch::single(GeometryMap::CurvedSquare, ["dirichlet"; 4]);
    assert!(dom.interfaces.is_empty());
    assert_eq!(dom.boundary.len(), 4);
    dom.validate().unwrap();
}

#[test]
fn non_matching_interface_rejected() {
    let dom = four_patch_square("dirichlet");
    let mut bad = dom.interfaces.clone();
    bad[0] = Interface { reversed: true, ..bad[0] };
    let r = MultiPatch::build(dom.patches.clone(), bad, dom.boundary.clone());
    assert!(matches!(r, Err(Error::Conformity(_))));
}

#[test]
fn uncovered_edge_rejected() {
    let mut dom = MultiPatch::single(GeometryMap::Identity, ["dirichlet"; 4]);
    dom.boundary.pop();
    assert!(dom.validate().is_err());
}

#[test]
fn folded_spline_rejected() {
    // control points of the unit square with the first direction mirrored
    let g = GeometryMap::spline(SplinePatch {
        degree: [1, 1],
        knots: [vec![0., 0., 1., 1.], vec![0., 0., 1., 1.]],
        control_points: vec![[1.0, 0.0], [0.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        weights: None,
    })
    .unwrap();
    assert!(matches!(g.check_orientation(4), Err(Error::DegenerateGeometry { .. })));
}

#[test]
fn control_net_size_checked() {
    let r = GeometryMap::spline(SplinePatch {
        degree: [1, 1],
        knots: [vec![0., 0., 1., 1.], vec![0., 0., 1., 1.]],
        control_points: vec![[0.0, 0.0]; 3],
        weights: None,
    });
    assert!(r.is_err());
}

#[test]
fn json_round_trip() {
    for dom in [
        four_patch_square("dirichlet"),
        disk_five_patch("traction", "dirichlet"),
        MultiPatch::single(GeometryMap::CurvedSquare, ["dirichlet", "traction", "traction", "traction"]),
    ] {
        let s = dom.to_json().unwrap();
        let back = MultiPatch::from_json(&s).unwrap();
        assert_eq!(back, dom);
    }
}

#[test]
fn json_parse_errors_reported() {
    assert!(matches!(MultiPatch::from_json("{\"patches\": 3}"), Err(Error::Parse(_))));
}
