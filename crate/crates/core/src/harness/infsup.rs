//! Dense inf-sup probes for the Taylor-Hood pair and the flux/L² pair on one patch.

use crate::bspline::{ParametricMesh, TensorSpace};
use crate::derham::{flux_basis, DeRhamSpaces};
use crate::error::Result;
use crate::fem::{ElementQuad, LocalBasis};
use crate::geometry::GeometryMap;
use crate::linalg::{inv2, Vec2};
use crate::quadrature::GaussRule;
use crate::solve::estimate_infsup;
use nalgebra::DMatrix;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InfSupEstimate {
    pub n: usize,
    /// Velocity (S^{r,r}_{p,p})² in the H¹ norm against pressure S^{r,r}_{p-1,p-1} in L².
    pub taylor_hood: f64,
    /// Flux space in the H(div) norm against its divergence space in L².
    pub flux_l2: f64,
}

fn physical_grad(jac: &[[f64; 2]; 2], g: Vec2) -> Vec2 {
    // J^{-T} ĝ
    let ji = inv2(jac);
    [ji[0][0] * g[0] + ji[1][0] * g[1], ji[0][1] * g[0] + ji[1][1] * g[1]]
}

/// Taylor-Hood estimate with velocities vanishing on the edges `clamped`.
pub fn taylor_hood_infsup(geo: &GeometryMap, p: usize, r: i32, n: usize, clamped: &[usize]) -> Result<f64> {
    let vel = TensorSpace::uniform([p, p], [r, r], [n, n])?;
    let pre = vel.derived([-1, -1], [0, 0])?;
    let mut fixed = vec![false; vel.dim()];
    for &e in clamped {
        for i in vel.edge_indices(e) {
            fixed[i] = true;
        }
    }
    let mut free = vec![usize::MAX; vel.dim()];
    let mut nf = 0;
    for (i, f) in fixed.iter().enumerate() {
        if !f {
            free[i] = nf;
            nf += 1;
        }
    }
    let np = pre.dim();
    let mut b = DMatrix::zeros(np, 2 * nf);
    let mut x = DMatrix::zeros(2 * nf, 2 * nf);
    let mut m = DMatrix::zeros(np, np);
    let rule = GaussRule::new(p + 2);
    for e in ParametricMesh::uniform(n).elements() {
        let eq = ElementQuad::new(geo, e, &rule)?;
        let bv = LocalBasis::new(&vel, &eq);
        let bp = LocalBasis::new(&pre, &eq);
        for (q, qp) in eq.points.iter().enumerate() {
            let w = qp.w * qp.geo.det;
            let grads: Vec<Vec2> = bv.grad.iter().map(|g| physical_grad(&qp.geo.jac, g[q])).collect();
            for (a, &ia) in bv.idx.iter().enumerate() {
                let fa = free[ia];
                if fa == usize::MAX {
                    continue;
                }
                for (c, &ib) in bv.idx.iter().enumerate() {
                    let fb = free[ib];
                    if fb == usize::MAX {
                        continue;
                    }
                    let v = w
                        * (bv.val[a][q] * bv.val[c][q]
                            + grads[a][0] * grads[c][0]
                            + grads[a][1] * grads[c][1]);
                    x[(fa, fb)] += v;
                    x[(nf + fa, nf + fb)] += v;
                }
                for (k, &ik) in bp.idx.iter().enumerate() {
                    let qv = w * bp.val[k][q];
                    // div of φ e_c is d_c φ
                    b[(ik, fa)] += qv * grads[a][0];
                    b[(ik, nf + fa)] += qv * grads[a][1];
                }
            }
            for (k, &ik) in bp.idx.iter().enumerate() {
                for (l, &il) in bp.idx.iter().enumerate() {
                    m[(ik, il)] += w * bp.val[k][q] * bp.val[l][q];
                }
            }
        }
    }
    estimate_infsup(&b, &x, &m)
}

/// Flux/L² estimate without boundary conditions.
pub fn flux_infsup(geo: &GeometryMap, p: usize, r: i32, n: usize) -> Result<f64> {
    let sp = DeRhamSpaces::new(p, r, n)?;
    let nv = sp.flux_dim();
    let n0 = sp.flux[0].dim();
    let nl = sp.l2.dim();
    let mut b = DMatrix::zeros(nl, nv);
    let mut x = DMatrix::zeros(nv, nv);
    let mut m = DMatrix::zeros(nl, nl);
    let rule = GaussRule::new(p + 2);
    for e in ParametricMesh::uniform(n).elements() {
        let eq = ElementQuad::new(geo, e, &rule)?;
        let fl = [LocalBasis::new(&sp.flux[0], &eq), LocalBasis::new(&sp.flux[1], &eq)];
        let bl = LocalBasis::new(&sp.l2, &eq);
        for (q, qp) in eq.points.iter().enumerate() {
            let w = qp.w * qp.geo.det;
            let mut funcs: Vec<(usize, Vec2, f64)> = Vec::new();
            for (c, lb) in fl.iter().enumerate() {
                let off = if c == 0 { 0 } else { n0 };
                for (a, &ia) in lb.idx.iter().enumerate() {
                    let (v, d) = flux_basis(&qp.geo, c, lb.val[a][q], lb.grad[a][q][c]);
                    funcs.push((off + ia, v, d));
                }
            }
            for &(ia, va, da) in &funcs {
                for &(ib, vb, db) in &funcs {
                    x[(ia, ib)] += w * (va[0] * vb[0] + va[1] * vb[1] + da * db);
                }
                for (k, &ik) in bl.idx.iter().enumerate() {
                    b[(ik, ia)] += w * da * bl.val[k][q] / qp.geo.det;
                }
            }
            for (k, &ik) in bl.idx.iter().enumerate() {
                for (l, &il) in bl.idx.iter().enumerate() {
                    m[(ik, il)] += w * bl.val[k][q] * bl.val[l][q] / (qp.geo.det * qp.geo.det);
                }
            }
        }
    }
    estimate_infsup(&b, &x, &m)
}

/// Both probes on the given levels, velocities clamped on all edges but the top one.
pub fn infsup_probes(geo: &GeometryMap, p: usize, r: i32, levels: &[usize]) -> Result<Vec<InfSupEstimate>> {
    levels
        .iter()
        .map(|&n| {
            Ok(InfSupEstimate {
                n,
                taylor_hood: taylor_hood_infsup(geo, p, r, n, &[0, 1, 2])?,
                flux_l2: flux_infsup(geo, p, r, n)?,
            })
        })
        .collect()
}
