#![allow(clippy::needless_range_loop)]

use isoelast::bspline::{KnotVector, ParametricMesh, TensorSpace};
use isoelast::derham::{
    curl_commuting_residual, div_commuting_residual, flux_basis, skew, DeRhamSpaces, PhysicalVectorField,
    Pullback, WeakSpaces,
};
use isoelast::fem::scaled_normal;
use isoelast::geometry::{curved_square_spline, edge_point, four_patch_square, GeometryMap};
use isoelast::linalg::Vec2;
use isoelast::quadrature::GaussRule;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

use common::{projection_residual, random_spline_map, unit, Poly, Product};

#[test]
fn pullbacks_on_identity_are_trivial() {
    let g = GeometryMap::Identity.eval([0.3, 0.6]).unwrap();
    for pb in [Pullback::Y2, Pullback::Y3] {
        assert_eq!(pb.vector(&g, [1.5, -2.0]).unwrap(), [1.5, -2.0]);
    }
    for pb in [Pullback::Y1, Pullback::Y4] {
        assert_eq!(pb.scalar(&g, 0.7).unwrap(), 0.7);
    }
    assert!(Pullback::Y2.scalar(&g, 1.0).is_err());
    assert!(Pullback::Y4.vector(&g, [1.0, 0.0]).is_err());
}

#[test]
fn pullback_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let maps = [GeometryMap::CurvedSquare, curved_square_spline(), random_spline_map(&mut rng)];
    for geo in &maps {
        for _ in 0..100 {
            let g = geo.eval([rng.gen(), rng.gen()]).unwrap();
            let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            for pb in [Pullback::Y2, Pullback::Y3] {
                let back = pb.vector_inverse(&g, pb.vector(&g, v).unwrap()).unwrap();
                assert!((back[0] - v[0]).abs() <= 1e-13 && (back[1] - v[1]).abs() <= 1e-13);
            }
            let q = rng.gen_range(-1.0..1.0);
            for pb in [Pullback::Y1, Pullback::Y4] {
                let back = pb.scalar_inverse(&g, pb.scalar(&g, q).unwrap()).unwrap();
                assert!((back - q).abs() <= 1e-13);
            }
        }
    }
    // det J = 1 on the curved square
    let g = GeometryMap::CurvedSquare.eval([0.7, 0.2]).unwrap();
    assert!((Pullback::Y4.scalar(&g, 0.4).unwrap() - 0.4).abs() < 1e-15);
}

#[test]
fn l2_basis_on_curved_square_keeps_parametric_values() {
    let sp = DeRhamSpaces::new(2, 0, 3).unwrap();
    let g = GeometryMap::CurvedSquare.eval([0.4, 0.55]).unwrap();
    let (v, _) = sp.l2.eval_field(&unit(&sp.l2, 5), [0.4, 0.55]);
    assert!((Pullback::Y4.scalar_inverse(&g, v).unwrap() - v).abs() < 1e-15);
}

#[test]
fn divergence_theorem_for_flux_basis() {
    let sp = DeRhamSpaces::new(2, 0, 3).unwrap();
    let rule = GaussRule::new(4);
    for geo in [GeometryMap::CurvedSquare, four_patch_square("dirichlet").patches[1].clone()] {
        for c in 0..2 {
            let space = &sp.flux[c];
            for i in 0..space.dim() {
                let coeff = unit(space, i);
                let mut vol = 0.0;
                for e in ParametricMesh::uniform(3).elements() {
                    for (y, wy) in rule.mapped(e[1][0], e[1][1]) {
                        for (x, wx) in rule.mapped(e[0][0], e[0][1]) {
                            let g = geo.eval([x, y]).unwrap();
                            let (b, gr) = space.eval_field(&coeff, [x, y]);
                            let (_, d) = flux_basis(&g, c, b, gr[c]);
                            vol += wx * wy * g.det * d;
                        }
                    }
                }
                let mut flux = 0.0;
                let br = space.dirs[0].breaks().to_vec();
                for edge in 0..4 {
                    for s in 0..br.len() - 1 {
                        for (t, w) in rule.mapped(br[s], br[s + 1]) {
                            let z = edge_point(edge, t);
                            let g = geo.eval(z).unwrap();
                            let (b, gr) = space.eval_field(&coeff, z);
                            let (v, _) = flux_basis(&g, c, b, gr[c]);
                            let n = scaled_normal(edge, &g);
                            flux += w * (v[0] * n[0] + v[1] * n[1]);
                        }
                    }
                }
                assert!((vol - flux).abs() <= 1e-10, "c={c} i={i}: {vol} vs {flux}");
            }
        }
    }
}

#[test]
fn curl_of_taylor_hood_lies_in_flux_space() {
    for (p, r) in [(2, 0), (3, 1), (3, 0)] {
        let n = 3;
        let sp = DeRhamSpaces::new(p, r, n).unwrap();
        for i in [0, 4, sp.h1.dim() / 2, sp.h1.dim() - 1] {
            let c = unit(&sp.h1, i);
            let h1 = &sp.h1;
            // parametric curl (d2 φ, -d1 φ)
            let r0 = projection_residual(&sp.flux[0], &|z| h1.eval_field(&c, z).1[1], n, p + 2);
            let r1 = projection_residual(&sp.flux[1], &|z| -h1.eval_field(&c, z).1[0], n, p + 2);
            assert!(r0 <= 1e-11 && r1 <= 1e-11, "p={p} r={r} i={i}: {r0:e} {r1:e}");
        }
    }
}

#[test]
fn divergence_of_flux_space_lies_in_l2_space() {
    let (p, r, n) = (3, 1, 3);
    let sp = DeRhamSpaces::new(p, r, n).unwrap();
    for c in 0..2 {
        let space = &sp.flux[c];
        for i in 0..space.dim() {
            let coeff = unit(space, i);
            let res = projection_residual(&sp.l2, &|z| space.eval_field(&coeff, z).1[c], n, p + 2);
            assert!(res <= 1e-11, "c={c} i={i}: {res:e}");
        }
    }
}

#[test]
fn commuting_residuals() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let spline = random_spline_map(&mut rng);
    for _ in 0..50 {
        let z = [rng.gen(), rng.gen()];
        let id = GeometryMap::Identity.derivs(z);
        assert!(div_commuting_residual(&id, &Poly) <= 1e-15);
        assert!(curl_commuting_residual(&id, &Product) <= 1e-15);
        let cs = GeometryMap::CurvedSquare.derivs(z);
        assert!(div_commuting_residual(&cs, &Poly) <= 1e-10);
        assert!(curl_commuting_residual(&cs, &Product) <= 1e-10);
        let sd = spline.derivs(z);
        assert!(div_commuting_residual(&sd, &Poly) <= 1e-9);
        assert!(curl_commuting_residual(&sd, &Product) <= 1e-9);
    }
}

#[test]
fn divergence_residual_matches_finite_differences() {
    // Independent route: d/dz of Y3 v by central differences.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let geo = random_spline_map(&mut rng);
    let y3 = |z: Vec2| {
        let g = geo.eval(z).unwrap();
        Pullback::Y3.vector(&g, Poly.eval(g.x).0).unwrap()
    };
    let h = 1e-5;
    for _ in 0..20 {
        let z = [rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9)];
        let d = (y3([z[0] + h, z[1]])[0] - y3([z[0] - h, z[1]])[0] + y3([z[0], z[1] + h])[1]
            - y3([z[0], z[1] - h])[1])
            / (2.0 * h);
        let g = geo.eval(z).unwrap();
        let (_, dv) = Poly.eval(g.x);
        let rhs = g.det * (dv[0][0] + dv[1][1]);
        assert!((d - rhs).abs() <= 1e-6);
    }
}

#[test]
fn identity_lies_in_stress_space_on_spline_geometries() {
    // Row k of I pulls back to column k of adj J.
    let mut cases: Vec<(GeometryMap, usize, i32, usize)> = vec![(curved_square_spline(), 2, 0, 4)];
    cases.push((curved_square_spline(), 2, 1, 4));
    for g in four_patch_square("dirichlet").patches {
        cases.push((g, 2, 1, 4));
    }
    for (geo, p, r, n) in cases {
        let sp = DeRhamSpaces::new(p, r, n).unwrap();
        for row in 0..2 {
            for c in 0..2 {
                let f = |z: Vec2| geo.eval(z).unwrap().adj[c][row];
                let res = projection_residual(&sp.flux[c], &f, n, p + 3);
                assert!(res <= 1e-10, "row={row} comp={c}: {res:e}");
            }
        }
    }
}

#[test]
fn identity_not_in_stress_space_on_curved_interfaces_of_lower_degree() {
    // Sanity check of the residual probe: a C1 quadratic warp is not reproduced by p=1 flux rows.
    let geo = four_patch_square("dirichlet").patches[0].clone();
    let kv = KnotVector::uniform(1, 2, 0).unwrap();
    let low = TensorSpace::new(kv.clone(), kv.shifted(-1, -1).unwrap());
    let res = projection_residual(&low, &|z| geo.eval(z).unwrap().adj[0][0], 2, 4);
    assert!(res > 1e-6);
}

#[test]
fn multiplier_basis_is_skew() {
    let sp = WeakSpaces::new(3, 1, 4).unwrap();
    for i in 0..sp.mult_dim() {
        let c = unit(&sp.mult, i);
        for z in [[0.1, 0.2], [0.5, 0.5], [0.93, 0.31]] {
            let m = skew(sp.mult.eval_field(&c, z).0);
            for a in 0..2 {
                for b in 0..2 {
                    assert_eq!(m[a][b] + m[b][a], 0.0);
                }
            }
        }
    }
}

#[test]
fn space_parameter_checks() {
    assert!(DeRhamSpaces::new(2, 2, 4).is_err());
    assert!(WeakSpaces::new(1, 0, 4).is_err());
    assert!(WeakSpaces::new(3, 2, 4).is_err());
    let sp = WeakSpaces::new(2, 0, 4).unwrap();
    assert_eq!(sp.stress_dim(), 2 * 2 * 9 * 8);
    assert_eq!(sp.disp_dim(), 2 * 64);
    assert_eq!(sp.mult_dim(), 25);
}
