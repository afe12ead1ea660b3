#![allow(dead_code)]

use isoelast::bspline::{ParametricMesh, TensorSpace};
use isoelast::derham::{PhysicalScalarField, PhysicalVectorField};
use isoelast::geometry::{GeometryMap, SplinePatch};
use isoelast::linalg::{Mat2, Vec2};
use isoelast::quadrature::GaussRule;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct Poly;

impl PhysicalVectorField for Poly {
    fn eval(&self, x: Vec2) -> (Vec2, Mat2) {
        let (a, b) = (x[0], x[1]);
        ([a * a * b + 1.0, a * b * b * b - b], [[2.0 * a * b, a * a], [b * b * b, 3.0 * a * b * b - 1.0]])
    }
}

pub struct Product;

impl PhysicalScalarField for Product {
    fn eval(&self, x: Vec2) -> (f64, Vec2) {
        (x[0] * x[1], [x[1], x[0]])
    }
}

/// Biquadratic map with randomly displaced control points around the unit square.
pub fn random_spline_map(rng: &mut ChaCha8Rng) -> GeometryMap {
    let g = [0.0, 0.5, 1.0];
    let mut cps = Vec::new();
    for j in 0..3 {
        for i in 0..3 {
            cps.push([g[i] + rng.gen_range(-0.08..0.08), g[j] + rng.gen_range(-0.08..0.08)]);
        }
    }
    GeometryMap::spline(SplinePatch {
        degree: [2, 2],
        knots: [vec![0., 0., 0., 1., 1., 1.], vec![0., 0., 0., 1., 1., 1.]],
        control_points: cps,
        weights: None,
    })
    .unwrap()
}

pub fn unit(space: &TensorSpace, i: usize) -> Vec<f64> {
    let mut c = vec![0.0; space.dim()];
    c[i] = 1.0;
    c
}

/// L² residual of the best approximation of `f` in `space`, parametric measure.
pub fn projection_residual(space: &TensorSpace, f: &dyn Fn(Vec2) -> f64, n: usize, q: usize) -> f64 {
    let rule = GaussRule::new(q);
    let dim = space.dim();
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    let mut pts = Vec::new();
    for e in ParametricMesh::uniform(n).elements() {
        for (y, wy) in rule.mapped(e[1][0], e[1][1]) {
            for (x, wx) in rule.mapped(e[0][0], e[0][1]) {
                pts.push(([x, y], wx * wy));
            }
        }
    }
    let tab = |z: Vec2| -> Vec<(usize, f64)> {
        let (f1, v1) = space.dirs[0].eval(z[0]).unwrap();
        let (f2, v2) = space.dirs[1].eval(z[1]).unwrap();
        let mut out = Vec::new();
        for (b, &vb) in v2.iter().enumerate() {
            for (a, &va) in v1.iter().enumerate() {
                out.push((space.index(f1 + a, f2 + b), va * vb));
            }
        }
        out
    };
    for &(z, w) in &pts {
        let t = tab(z);
        let fz = f(z);
        for &(i, vi) in &t {
            rhs[i] += w * fz * vi;
            for &(j, vj) in &t {
                gram[(i, j)] += w * vi * vj;
            }
        }
    }
    let c = gram.cholesky().expect("Gram matrix is SPD").solve(&rhs);
    let mut err = 0.0;
    for &(z, w) in &pts {
        let s: f64 = tab(z).iter().map(|&(i, v)| c[i] * v).sum();
        err += w * (f(z) - s).powi(2);
    }
    err.sqrt()
}

pub type SymField = fn(Vec2) -> (Mat2, Vec2);

/// Smooth symmetric fields with their divergence.
pub const FIELDS: [SymField; 5] = [
    |x| {
        let s = x[0].sin();
        ([[1.0 + x[0] * x[1], s], [s, x[1] * x[1] + 0.3]], [x[1], x[0].cos() + 2.0 * x[1]])
    },
    |x| ([[x[0] * x[0], x[0] * x[1]], [x[0] * x[1], x[1] * x[1]]], [3.0 * x[0], 3.0 * x[1]]),
    |x| {
        let e = x[0].exp();
        ([[x[1].cos(), e], [e, x[0] * x[1] * x[1]]], [0.0, e + 2.0 * x[0] * x[1]])
    },
    |x| {
        let (a, b) = (x[0] + x[1], x[0] - x[1]);
        ([[a.sin(), 0.5], [0.5, b.cos()]], [a.cos(), b.sin()])
    },
    |x| {
        let c = -x[0] * x[1];
        ([[x[0].powi(3), c], [c, x[0] * x[0] + x[1]]], [3.0 * x[0] * x[0] - x[0], 1.0 - x[1]])
    },
];

pub const VECTORS: [fn(Vec2) -> Vec2; 5] = [
    |x| [x[0].cos() + x[1], x[0] * x[1]],
    |x| [(x[0] - x[1]).exp(), 1.0],
    |x| [x[0] * x[0], x[1].sin()],
    |x| [0.0, (2.0 * x[0] + x[1]).cos()],
    |x| [1.0 + x[1].powi(3), -x[0]],
];
