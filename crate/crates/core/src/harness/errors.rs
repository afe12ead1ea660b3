//! Error norms of a discrete solution against an exact one.

use super::cases::ExactSolution;
use crate::bspline::ParametricMesh;
use crate::error::Result;
use crate::fem::{ElementQuad, QuadPoint};
use crate::geometry::MultiPatch;
use crate::linalg::{norm_fro, sub};
use crate::quadrature::GaussRule;
use crate::strongsym::StrongSolution;
use crate::weaksym::{Material, PointValues, WeakSolution};
use rayon::prelude::*;
use serde::Serialize;

/// Anything that can report stress, divergence, displacement and multiplier values.
pub trait FieldEvaluator: Sync {
    fn domain(&self) -> &MultiPatch;
    fn mesh_size(&self) -> usize;
    fn eval_at(&self, patch: usize, qp: &QuadPoint) -> Result<PointValues>;
    /// Whether the multiplier value is meaningful.
    fn has_multiplier(&self) -> bool {
        true
    }
}

impl FieldEvaluator for WeakSolution {
    fn domain(&self) -> &MultiPatch {
        &self.domain
    }
    fn mesh_size(&self) -> usize {
        self.spaces.n()
    }
    fn eval_at(&self, patch: usize, qp: &QuadPoint) -> Result<PointValues> {
        WeakSolution::eval_at(self, patch, qp)
    }
}

impl FieldEvaluator for StrongSolution {
    fn domain(&self) -> &MultiPatch {
        &self.domain
    }
    fn mesh_size(&self) -> usize {
        self.basis.spaces.n
    }
    fn eval_at(&self, _patch: usize, qp: &QuadPoint) -> Result<PointValues> {
        self.eval(qp.z)
    }
    fn has_multiplier(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ErrorNorms {
    pub sigma_l2: f64,
    pub div_sigma_l2: f64,
    pub sigma_hdiv: f64,
    pub u_l2: f64,
    /// L² norm of Skew(q_h) - Skew(q), zero without a multiplier.
    pub p_l2: f64,
    /// max |σ12 - σ21| over the quadrature points.
    pub max_asymmetry: f64,
}

pub fn compute_errors(
    sol: &dyn FieldEvaluator,
    exact: &ExactSolution,
    material: &Material,
    quad: usize,
) -> Result<ErrorNorms> {
    let rule = GaussRule::new(quad);
    let elems = ParametricMesh::uniform(sol.mesh_size()).elements();
    let dom = sol.domain();
    let with_q = sol.has_multiplier();
    let mut acc = [0.0f64; 4];
    let mut asym = 0.0f64;
    for (patch, geo) in dom.patches.iter().enumerate() {
        let parts: Vec<Result<([f64; 4], f64)>> = elems
            .par_iter()
            .map(|&e| {
                let eq = ElementQuad::new(geo, e, &rule)?;
                let mut s = [0.0; 4];
                let mut a = 0.0f64;
                for qp in &eq.points {
                    let v = sol.eval_at(patch, qp)?;
                    let ex = exact.eval(v.x, material);
                    let w = qp.w * qp.geo.det.abs();
                    let ds = norm_fro(&sub(&v.sigma, &ex.sigma));
                    let dd = (v.div[0] - ex.div_sigma[0]).hypot(v.div[1] - ex.div_sigma[1]);
                    let du = (v.u[0] - ex.u[0]).hypot(v.u[1] - ex.u[1]);
                    // |Skew(d)|_F = sqrt(2) |d|
                    let dq = if with_q { 2f64.sqrt() * (v.q - ex.q).abs() } else { 0.0 };
                    s[0] += w * ds * ds;
                    s[1] += w * dd * dd;
                    s[2] += w * du * du;
                    s[3] += w * dq * dq;
                    a = a.max((v.sigma[0][1] - v.sigma[1][0]).abs());
                }
                Ok((s, a))
            })
            .collect();
        for part in parts {
            let (s, a) = part?;
            for k in 0..4 {
                acc[k] += s[k];
            }
            asym = asym.max(a);
        }
    }
    Ok(ErrorNorms {
        sigma_l2: acc[0].sqrt(),
        div_sigma_l2: acc[1].sqrt(),
        sigma_hdiv: (acc[0] + acc[1]).sqrt(),
        u_l2: acc[2].sqrt(),
        p_l2: acc[3].sqrt(),
        max_asymmetry: asym,
    })
}

/// Experimental order of convergence between consecutive levels.
pub fn eoc(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}
