//! Element quadrature and basis tabulation shared by the assembly routines.

use crate::bspline::{KnotVector, TensorSpace};
use crate::error::Result;
use crate::geometry::{GeoPoint, GeometryMap};
use crate::linalg::Vec2;
use crate::quadrature::GaussRule;

#[derive(Clone, Debug)]
pub struct QuadPoint {
    pub z: Vec2,
    /// Parametric weight; physical weight is `w * geo.det`.
    pub w: f64,
    pub geo: GeoPoint,
}

/// Tensor Gauss grid on one element, index `a + nq * b`.
#[derive(Clone, Debug)]
pub struct ElementQuad {
    pub nodes: [Vec<f64>; 2],
    pub points: Vec<QuadPoint>,
}

impl ElementQuad {
    pub fn new(geo: &GeometryMap, elem: [[f64; 2]; 2], rule: &GaussRule) -> Result<Self> {
        let m1: Vec<(f64, f64)> = rule.mapped(elem[0][0], elem[0][1]).collect();
        let m2: Vec<(f64, f64)> = rule.mapped(elem[1][0], elem[1][1]).collect();
        let mut points = Vec::with_capacity(m1.len() * m2.len());
        for &(y, wy) in &m2 {
            for &(x, wx) in &m1 {
                let z = [x, y];
                points.push(QuadPoint { z, w: wx * wy, geo: geo.eval(z)? });
            }
        }
        Ok(ElementQuad {
            nodes: [m1.iter().map(|p| p.0).collect(), m2.iter().map(|p| p.0).collect()],
            points,
        })
    }

    pub fn nq(&self, d: usize) -> usize {
        self.nodes[d].len()
    }
}

/// Univariate values and first derivatives of the active functions at a set of nodes
/// lying in one knot span.
#[derive(Clone, Debug)]
pub struct Tab1 {
    pub first: usize,
    pub vals: Vec<Vec<f64>>,
    pub ders: Vec<Vec<f64>>,
}

pub fn tabulate(kv: &KnotVector, nodes: &[f64]) -> Tab1 {
    let mut first = 0;
    let mut vals = Vec::with_capacity(nodes.len());
    let mut ders = Vec::with_capacity(nodes.len());
    for &z in nodes {
        let (f, d) = kv.eval_derivs_unchecked(z, 1);
        first = f;
        vals.push(d[0].clone());
        ders.push(d[1].clone());
    }
    Tab1 { first, vals, ders }
}

/// Active tensor basis functions of one space on one element.
/// `val[k][q]`, `grad[k][q]` for local function k at quadrature point q.
#[derive(Clone, Debug)]
pub struct LocalBasis {
    pub idx: Vec<usize>,
    pub val: Vec<Vec<f64>>,
    pub grad: Vec<Vec<Vec2>>,
}

impl LocalBasis {
    pub fn new(space: &TensorSpace, eq: &ElementQuad) -> Self {
        let t1 = tabulate(&space.dirs[0], &eq.nodes[0]);
        let t2 = tabulate(&space.dirs[1], &eq.nodes[1]);
        let (nq1, nq2) = (eq.nq(0), eq.nq(1));
        let k1 = t1.vals[0].len();
        let k2 = t2.vals[0].len();
        let mut idx = Vec::with_capacity(k1 * k2);
        let mut val = Vec::with_capacity(k1 * k2);
        let mut grad = Vec::with_capacity(k1 * k2);
        for l in 0..k2 {
            for k in 0..k1 {
                idx.push(space.index(t1.first + k, t2.first + l));
                let mut v = Vec::with_capacity(nq1 * nq2);
                let mut g = Vec::with_capacity(nq1 * nq2);
                for b in 0..nq2 {
                    for a in 0..nq1 {
                        v.push(t1.vals[a][k] * t2.vals[b][l]);
                        g.push([t1.ders[a][k] * t2.vals[b][l], t1.vals[a][k] * t2.ders[b][l]]);
                    }
                }
                val.push(v);
                grad.push(g);
            }
        }
        LocalBasis { idx, val, grad }
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }
}

/// Edge segment quadrature: parametric points along `edge` restricted to [a,b] in the
/// edge parameter, with the geometry evaluated there.
pub fn edge_points(
    geo: &GeometryMap,
    edge: usize,
    a: f64,
    b: f64,
    rule: &GaussRule,
) -> Result<Vec<(f64, QuadPoint)>> {
    rule.mapped(a, b)
        .map(|(t, w)| {
            let z = crate::geometry::edge_point(edge, t);
            Ok((t, QuadPoint { z, w, geo: geo.eval(z)? }))
        })
        .collect()
}

/// |dF/dt| along an edge.
pub fn edge_speed(edge: usize, g: &GeoPoint) -> f64 {
    let c = if edge < 2 { 1 } else { 0 };
    g.jac[0][c].hypot(g.jac[1][c])
}

/// Physical outward normal scaled by the edge speed, n ds / dt = adj(J)^T n_hat.
pub fn scaled_normal(edge: usize, g: &GeoPoint) -> Vec2 {
    let nh = crate::geometry::edge_normal(edge);
    [g.adj[0][0] * nh[0] + g.adj[1][0] * nh[1], g.adj[0][1] * nh[0] + g.adj[1][1] * nh[1]]
}
