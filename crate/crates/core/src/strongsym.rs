//! Strongly symmetric mixed elasticity: symmetric spline stress fields pushed forward by
//! integral-corrected transforms that commute with the divergence, and displacements
//! pushed forward by the matching vector transform.
//!
//! Conventions: `adj` is adj(J) = det(J) J^{-1}, `∫d1` integrates in the first parametric
//! direction from 0 to z1 at fixed z2, and `Airy(φ) = [[φ_22, -φ_12], [-φ_12, φ_11]]`.

use crate::bspline::{KnotVector, ParametricMesh, TensorSpace};
use crate::error::{Error, Result};
use crate::fem::scaled_normal;
use crate::geometry::{
    adjugate, d1_adjugate, d1_jacobian, edge_point, inverse_hessians, GeoDerivs, GeoPoint, GeometryMap,
    MultiPatch,
};
use crate::linalg::{Mat2, Vec2};
use crate::quadrature::{composite, GaussRule};
use crate::solve::{solve_direct, SolveReport, SparseSystem, TripletBuffer};
use crate::weaksym::{edge_kind, EdgeKind, PointValues, Problem};
use rayon::prelude::*;
use std::collections::HashMap;

/// Symmetric stress space SYM(S^{r+1,r-1}_{p+1,p-1}, S^{r,r}_{p,p}, S^{r-1,r+1}_{p-1,p+1})
/// and displacement space S^{r,r-1}_{p,p-1} x S^{r-1,r}_{p-1,p}.
#[derive(Clone, Debug)]
pub struct StrongSpaces {
    pub p: usize,
    pub r: i32,
    pub n: usize,
    /// Scalar spaces of the (1,1), (1,2) = (2,1) and (2,2) entries.
    pub stress: [TensorSpace; 3],
    pub disp: [TensorSpace; 2],
}

impl StrongSpaces {
    pub fn new(p: usize, r: i32, n: usize) -> Result<Self> {
        if r < 1 || r >= p as i32 {
            return Err(Error::InvalidSpace(format!("strong symmetry needs p > r >= 1, got p={p}, r={r}")));
        }
        let h1 = TensorSpace::uniform([p, p], [r, r], [n, n])?;
        Ok(StrongSpaces {
            p,
            r,
            n,
            stress: [h1.derived([1, -1], [1, -1])?, h1.clone(), h1.derived([-1, 1], [-1, 1])?],
            disp: [h1.derived([0, -1], [0, -1])?, h1.derived([-1, 0], [-1, 0])?],
        })
    }

    pub fn stress_offset(&self, k: usize) -> usize {
        self.stress[..k].iter().map(|s| s.dim()).sum()
    }

    pub fn stress_dim(&self) -> usize {
        self.stress.iter().map(|s| s.dim()).sum()
    }

    pub fn disp_offset(&self, k: usize) -> usize {
        if k == 0 {
            0
        } else {
            self.disp[0].dim()
        }
    }

    pub fn disp_dim(&self) -> usize {
        self.disp[0].dim() + self.disp[1].dim()
    }
}

/// Composite Gauss rule for the line integrals, cut at the mesh breakpoints.
#[derive(Clone, Debug)]
pub struct LineRule {
    rule: GaussRule,
    breaks: Vec<f64>,
}

impl LineRule {
    pub fn new(points: usize, breaks: Vec<f64>) -> Self {
        LineRule { rule: GaussRule::new(points), breaks }
    }

    /// `points` nodes on each of `pieces` equal subintervals.
    pub fn uniform(points: usize, pieces: usize) -> Self {
        Self::new(points, crate::bspline::uniform_breaks(pieces))
    }

    pub fn nodes(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        composite(&self.rule, &self.breaks, a, b)
    }
}

fn airy(h: &Mat2) -> Mat2 {
    [[h[1][1], -h[0][1]], [-h[1][0], h[0][0]]]
}

fn eval_geo(geo: &GeometryMap, z: Vec2) -> Result<(GeoDerivs, GeoPoint)> {
    let d = geo.derivs(z);
    let g = geo.eval(z)?;
    Ok((d, g))
}

/// J / det J
fn jac_over_det(g: &GeoPoint) -> Mat2 {
    let s = 1.0 / g.det;
    [[g.jac[0][0] * s, g.jac[0][1] * s], [g.jac[1][0] * s, g.jac[1][1] * s]]
}

/// Geometry data needed to push symmetric parametric fields forward at one point.
#[derive(Clone, Debug)]
pub struct PointFrame {
    pub z: Vec2,
    pub geo: GeoPoint,
    /// Airy of the two components of the inverse map (physical second derivatives).
    airy_inv: [Mat2; 2],
    /// d/dz1 of J / det J.
    d1_jd: Mat2,
    /// Weights of the trace values (S11, S12)(0, z2) in the (1,1) correction.
    e11w: [f64; 2],
    /// Line nodes s in [0, z2] with weight, weights of the trace values (S11, S12)(0, s)
    /// in the (2,2) correction and in its z1-antiderivative.
    line: Vec<(f64, f64, [f64; 2], [f64; 2])>,
}

impl PointFrame {
    /// `corrected` switches on the boundary-trace correction of the fully corrected
    /// transform; without it the frame realizes the inverse of the transform adapted to a
    /// traction-free edge z1 = 0.
    pub fn new(geo: &GeometryMap, z: Vec2, line: &LineRule, corrected: bool) -> Result<Self> {
        let (d, g) = eval_geo(geo, z)?;
        let h = inverse_hessians(&d);
        let dj = d1_jacobian(&d);
        // d1 (J/det) = d1 J / det - J d1(det) / det^2
        let ddet =
            dj[0][0] * g.jac[1][1] + g.jac[0][0] * dj[1][1] - dj[0][1] * g.jac[1][0] - g.jac[0][1] * dj[1][0];
        let mut d1_jd = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                d1_jd[a][b] = dj[a][b] / g.det - g.jac[a][b] * ddet / (g.det * g.det);
            }
        }
        let mut frame = PointFrame {
            z,
            geo: g,
            airy_inv: [airy(&h[0]), airy(&h[1])],
            d1_jd,
            e11w: [0.0; 2],
            line: Vec::new(),
        };
        if corrected {
            let (_, g0) = eval_geo(geo, [0.0, z[1]])?;
            let jd0 = jac_over_det(&g0);
            for m in 0..2 {
                frame.e11w[m] = (0..2).map(|i| jd0[i][m] * (g.adj[0][i] - g0.adj[0][i])).sum();
            }
            for (s, w) in line.nodes(0.0, z[1]) {
                let (_, gs0) = eval_geo(geo, [0.0, s])?;
                let (ds, gs) = eval_geo(geo, [z[0], s])?;
                let dadj = d1_adjugate(&ds);
                let jd = jac_over_det(&gs0);
                let mut lw = [0.0; 2];
                let mut kw = [0.0; 2];
                for m in 0..2 {
                    for i in 0..2 {
                        lw[m] += jd[i][m] * dadj[1][i];
                        kw[m] += jd[i][m] * (gs.adj[1][i] - gs0.adj[1][i]);
                    }
                }
                frame.line.push((s, w, lw, kw));
            }
        }
        Ok(frame)
    }

    /// Correction terms (e11, e22, ∫d1 e22) from the trace (S11, S12) on z1 = 0.
    pub fn corrections(&self, here: [f64; 2], trace: impl Fn(f64) -> [f64; 2]) -> (f64, f64, f64) {
        let e11 = here[0] * self.e11w[0] + here[1] * self.e11w[1];
        let (mut e22, mut ie22) = (0.0, 0.0);
        for &(s, w, lw, kw) in &self.line {
            let t = trace(s);
            e22 += w * (t[0] * lw[0] + t[1] * lw[1]);
            ie22 += w * (t[0] * kw[0] + t[1] * kw[1]);
        }
        (e11, e22, ie22)
    }

    /// Physical stress and divergence of the symmetric field described by `p`.
    pub fn stress(&self, p: &SymParts) -> (Mat2, Vec2) {
        let j = &self.geo.jac;
        let det2 = self.geo.det * self.geo.det;
        let t = [[p.val[0] + p.e11, p.val[1]], [p.val[1], p.val[2] + p.e22]];
        let mut s = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in a..2 {
                let mut v = 0.0;
                for k in 0..2 {
                    for l in 0..2 {
                        v += j[a][k] * t[k][l] * j[b][l];
                    }
                }
                s[a][b] = v / det2;
            }
        }
        let i22 = p.int22 + p.int_e22;
        let (a1, a2) = (&self.airy_inv[0], &self.airy_inv[1]);
        for a in 0..2 {
            for b in a..2 {
                s[a][b] += a1[a][b] * i22 - a2[a][b] * p.int12;
            }
        }
        s[1][0] = s[0][1];
        (s, self.disp(p.div, p.int_div))
    }

    /// Physical vector from a parametric vector `v` and its z1-antiderivative.
    pub fn disp(&self, v: Vec2, int_v: Vec2) -> Vec2 {
        let j = &self.geo.jac;
        let det = self.geo.det;
        let mut out = [0.0; 2];
        for a in 0..2 {
            out[a] = (j[a][0] * v[0] + j[a][1] * v[1]) / (det * det)
                + (self.d1_jd[a][0] * int_v[0] + self.d1_jd[a][1] * int_v[1]) / det;
        }
        out
    }
}

/// Parametric ingredients of a symmetric field at one point: entries (S11, S12, S22),
/// divergence, z1-antiderivatives of S12, S22 and of the divergence, and the
/// boundary-trace corrections.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymParts {
    pub val: [f64; 3],
    pub div: Vec2,
    pub int12: f64,
    pub int22: f64,
    pub int_div: Vec2,
    pub e11: f64,
    pub e22: f64,
    pub int_e22: f64,
}

impl SymParts {
    fn axpy(&mut self, a: f64, o: &SymParts) {
        for k in 0..3 {
            self.val[k] += a * o.val[k];
        }
        for k in 0..2 {
            self.div[k] += a * o.div[k];
            self.int_div[k] += a * o.int_div[k];
        }
        self.int12 += a * o.int12;
        self.int22 += a * o.int22;
        self.e11 += a * o.e11;
        self.e22 += a * o.e22;
        self.int_e22 += a * o.int_e22;
    }
}

fn sym(s: &Mat2) -> [f64; 3] {
    [s[0][0], s[0][1], s[1][1]]
}

// ---------------------------------------------------------------------------------------
// Transforms of general fields, by quadrature along the parametric lines.

/// Physical symmetric field evaluated at physical points.
pub type PhysSym<'a> = &'a dyn Fn(Vec2) -> Mat2;
/// Parametric symmetric field evaluated at parametric points.
pub type ParamSym<'a> = &'a dyn Fn(Vec2) -> Mat2;
pub type PhysVec<'a> = &'a dyn Fn(Vec2) -> Vec2;
pub type ParamVec<'a> = &'a dyn Fn(Vec2) -> Vec2;

/// adj(J) (S∘F) adj(J)^T + Airy^(F1) ∫d1 adj_2l S_2l - Airy^(F2) ∫d1 adj_2l S_1l.
pub fn y2g1_apply(geo: &GeometryMap, s: PhysSym, z: Vec2, line: &LineRule) -> Result<Mat2> {
    let (d, g) = eval_geo(geo, z)?;
    let sv = s(g.x);
    let a = &g.adj;
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for k in 0..2 {
            out[i][k] = (0..2).map(|l| (0..2).map(|m| a[i][l] * sv[l][m] * a[k][m]).sum::<f64>()).sum();
        }
    }
    let (mut i2, mut i1) = (0.0, 0.0);
    for (t, w) in line.nodes(0.0, z[0]) {
        let (_, gt) = eval_geo(geo, [t, z[1]])?;
        let st = s(gt.x);
        for l in 0..2 {
            i2 += w * gt.adj[1][l] * st[1][l];
            i1 += w * gt.adj[1][l] * st[0][l];
        }
    }
    let (h1, h2) = (airy(&d.d2[0]), airy(&d.d2[1]));
    for i in 0..2 {
        for k in 0..2 {
            out[i][k] += h1[i][k] * i2 - h2[i][k] * i1;
        }
    }
    Ok(out)
}

/// Boundary correction diag(∫d1 d1adj_1i adj_1l(0,.) S_il(0,.), ∫_0^{z2} d1adj_2i adj_1l(0,s) S_il(0,s) ds).
pub fn y2a_apply(geo: &GeometryMap, s: PhysSym, z: Vec2, line: &LineRule) -> Result<Mat2> {
    let w_at = |s2: f64| -> Result<Vec2> {
        let (_, g0) = eval_geo(geo, [0.0, s2])?;
        let sv = s(g0.x);
        let mut w = [0.0; 2];
        for i in 0..2 {
            w[i] = (0..2).map(|l| g0.adj[0][l] * sv[i][l]).sum();
        }
        Ok(w)
    };
    let w0 = w_at(z[1])?;
    let mut d11 = 0.0;
    for (t, w) in line.nodes(0.0, z[0]) {
        let dadj = d1_adjugate(&geo.derivs([t, z[1]]));
        d11 += w * (dadj[0][0] * w0[0] + dadj[0][1] * w0[1]);
    }
    let mut d22 = 0.0;
    for (s2, w) in line.nodes(0.0, z[1]) {
        let ws = w_at(s2)?;
        let dadj = d1_adjugate(&geo.derivs([z[0], s2]));
        d22 += w * (dadj[1][0] * ws[0] + dadj[1][1] * ws[1]);
    }
    Ok([[d11, 0.0], [0.0, d22]])
}

/// Fully corrected forward transform.
pub fn y2_apply(geo: &GeometryMap, s: PhysSym, z: Vec2, line: &LineRule) -> Result<Mat2> {
    let a = y2g1_apply(geo, s, z, line)?;
    let b = y2a_apply(geo, s, z, line)?;
    Ok(crate::linalg::sub(&a, &b))
}

/// det(J) adj(J) (v∘F) + d1 adj(J) ∫d1 det(J) (v∘F).
pub fn y3_apply(geo: &GeometryMap, v: PhysVec, z: Vec2, line: &LineRule) -> Result<Vec2> {
    let (d, g) = eval_geo(geo, z)?;
    let vv = v(g.x);
    let mut iv = [0.0; 2];
    for (t, w) in line.nodes(0.0, z[0]) {
        let (_, gt) = eval_geo(geo, [t, z[1]])?;
        let vt = v(gt.x);
        iv[0] += w * gt.det * vt[0];
        iv[1] += w * gt.det * vt[1];
    }
    let dadj = d1_adjugate(&d);
    let mut out = [0.0; 2];
    for a in 0..2 {
        out[a] =
            g.det * (g.adj[a][0] * vv[0] + g.adj[a][1] * vv[1]) + dadj[a][0] * iv[0] + dadj[a][1] * iv[1];
    }
    Ok(out)
}

fn line_integral_vec(f: ParamVec, z: Vec2, line: &LineRule) -> Vec2 {
    let mut acc = [0.0; 2];
    for (t, w) in line.nodes(0.0, z[0]) {
        let v = f([t, z[1]]);
        acc[0] += w * v[0];
        acc[1] += w * v[1];
    }
    acc
}

/// Inverse of `y3_apply`: physical value at F(z) of the field whose transform is `vt`.
pub fn y3_inverse(geo: &GeometryMap, vt: ParamVec, z: Vec2, line: &LineRule) -> Result<Vec2> {
    let frame = PointFrame::new(geo, z, line, false)?;
    Ok(frame.disp(vt(z), line_integral_vec(vt, z, line)))
}

fn param_parts(frame: &PointFrame, st: ParamSym, z: Vec2, line: &LineRule, corrected: bool) -> SymParts {
    let v = st(z);
    let mut p = SymParts { val: sym(&v), ..Default::default() };
    for (t, w) in line.nodes(0.0, z[0]) {
        let vt = st([t, z[1]]);
        p.int12 += w * vt[1][0];
        p.int22 += w * vt[1][1];
    }
    if corrected {
        let here = st([0.0, z[1]]);
        let (e11, e22, ie22) = frame.corrections([here[0][0], here[0][1]], |s| {
            let t = st([0.0, s]);
            [t[0][0], t[0][1]]
        });
        p.e11 = e11;
        p.e22 = e22;
        p.int_e22 = ie22;
    }
    p
}

/// Inverse of `y2g1_apply`: physical value at F(z).
pub fn y2g1_inverse(geo: &GeometryMap, st: ParamSym, z: Vec2, line: &LineRule) -> Result<Mat2> {
    let frame = PointFrame::new(geo, z, line, false)?;
    Ok(frame.stress(&param_parts(&frame, st, z, line, false)).0)
}

/// Inverse of `y2_apply`: physical value at F(z).
pub fn y2_inverse(geo: &GeometryMap, st: ParamSym, z: Vec2, line: &LineRule) -> Result<Mat2> {
    let frame = PointFrame::new(geo, z, line, true)?;
    Ok(frame.stress(&param_parts(&frame, st, z, line, true)).0)
}

// ---------------------------------------------------------------------------------------
// Spline fields.

#[derive(Clone, Debug)]
struct UniTab {
    first: usize,
    val: Vec<f64>,
    der: Vec<f64>,
}

impl UniTab {
    fn new(kv: &KnotVector, t: f64) -> Self {
        let (first, d) = kv.eval_derivs_unchecked(t, 1);
        UniTab { first, val: d[0].clone(), der: d[1].clone() }
    }

    fn get(&self, i: usize) -> (f64, f64) {
        if i >= self.first && i - self.first < self.val.len() {
            (self.val[i - self.first], self.der[i - self.first])
        } else {
            (0.0, 0.0)
        }
    }

    fn last(&self) -> usize {
        self.first + self.val.len() - 1
    }
}

#[derive(Clone, Debug)]
struct SpaceTab {
    d1: UniTab,
    int_first: usize,
    int1: Vec<f64>,
    d2: UniTab,
}

impl SpaceTab {
    fn new(sp: &TensorSpace, z: Vec2) -> Self {
        let (int_first, int1) = sp.dirs[0].integrals_to(z[0]);
        SpaceTab { d1: UniTab::new(&sp.dirs[0], z[0]), int_first, int1, d2: UniTab::new(&sp.dirs[1], z[1]) }
    }

    fn int(&self, kv: &KnotVector, i: usize) -> f64 {
        if i < self.int_first {
            kv.mass(i)
        } else if i - self.int_first < self.int1.len() {
            self.int1[i - self.int_first]
        } else {
            0.0
        }
    }
}

/// How the physical fields are built from the parametric splines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Pure displacement problem: fully corrected transform.
    Dirichlet,
    /// Traction-free edge z1 = 0 (experimental): transform adapted to that edge, stress
    /// functions with a nonzero normal trace there removed.
    TractionFreeLeft,
}

/// Univariate tabulations at one point, reused for every basis function.
struct PointTab {
    stress: [SpaceTab; 3],
    /// Per left-edge function j of S11 and S12: (e22, ∫d1 e22) contributions.
    edge: [Vec<(f64, f64)>; 2],
}

impl PointTab {
    fn new(sp: &StrongSpaces, frame: &PointFrame) -> Self {
        let z = frame.z;
        let mut edge = [vec![(0.0, 0.0); sp.stress[0].n(1)], vec![(0.0, 0.0); sp.stress[1].n(1)]];
        for &(s, w, lw, kw) in &frame.line {
            for (m, acc) in edge.iter_mut().enumerate() {
                let (first, vals) = sp.stress[m].dirs[1].eval_unchecked(s);
                for (a, &b) in vals.iter().enumerate() {
                    acc[first + a].0 += w * b * lw[m];
                    acc[first + a].1 += w * b * kw[m];
                }
            }
        }
        PointTab {
            stress: [
                SpaceTab::new(&sp.stress[0], z),
                SpaceTab::new(&sp.stress[1], z),
                SpaceTab::new(&sp.stress[2], z),
            ],
            edge,
        }
    }
}

/// Evaluation of transformed basis functions for one geometry and variant.
#[derive(Clone, Debug)]
pub struct StrongBasis {
    pub spaces: StrongSpaces,
    pub geo: GeometryMap,
    pub variant: Variant,
    /// Geometry with nonzero second derivatives: antiderivative tails are present.
    tails: bool,
    line: LineRule,
}

fn is_affine(geo: &GeometryMap) -> bool {
    match geo {
        GeometryMap::Identity => true,
        GeometryMap::CurvedSquare => false,
        _ => {
            let m = 7;
            (0..m * m).all(|k| {
                let z = [(k % m) as f64 / (m - 1) as f64, (k / m) as f64 / (m - 1) as f64];
                geo.derivs(z).d2.iter().flatten().flatten().all(|&v| v == 0.0)
            })
        }
    }
}

impl StrongBasis {
    pub fn new(spaces: &StrongSpaces, geo: &GeometryMap, variant: Variant) -> Self {
        let p = spaces.p;
        StrongBasis {
            spaces: spaces.clone(),
            geo: geo.clone(),
            variant,
            tails: !is_affine(geo),
            line: LineRule::new(p + 2, crate::bspline::uniform_breaks(spaces.n)),
        }
    }

    fn corrected(&self) -> bool {
        self.tails && self.variant == Variant::Dirichlet
    }

    /// Whether stress function (k, i, j) belongs to the trial space of the variant.
    pub fn active(&self, k: usize, i: usize) -> bool {
        !(self.variant == Variant::TractionFreeLeft && k < 2 && i == 0)
    }

    pub fn frame(&self, z: Vec2) -> Result<PointFrame> {
        PointFrame::new(&self.geo, z, &self.line, self.corrected())
    }

    /// Physical stress basis functions with a possibly nonzero value or divergence at the
    /// frame point: (global stress index, value, divergence).
    pub fn stress_at(&self, frame: &PointFrame) -> Vec<(usize, Mat2, Vec2)> {
        let tab = PointTab::new(&self.spaces, frame);
        let mut out = Vec::new();
        self.for_each_stress(&tab, frame, |k, i, j, parts| {
            let idx = self.spaces.stress_offset(k) + self.spaces.stress[k].index(i, j);
            let (s, d) = frame.stress(&parts);
            if s.iter().flatten().any(|&v| v != 0.0) || d.iter().any(|&v| v != 0.0) {
                out.push((idx, s, d));
            }
        });
        out
    }

    fn for_each_stress(
        &self,
        tab: &PointTab,
        frame: &PointFrame,
        mut f: impl FnMut(usize, usize, usize, SymParts),
    ) {
        for k in 0..3 {
            let st = &tab.stress[k];
            let i_lo = if self.tails { 0 } else { st.d1.first };
            let i_hi = st.d1.last();
            let (j_lo, j_hi) = (st.d2.first, st.d2.last());
            for j in j_lo..=j_hi {
                for i in i_lo..=i_hi {
                    if self.active(k, i) {
                        f(k, i, j, self.stress_parts_with(tab, frame, k, i, j));
                    }
                }
            }
            if self.corrected() && k < 2 && self.active(k, 0) {
                let covered = |j: usize| i_lo == 0 && j >= j_lo && j <= j_hi;
                for j in 0..self.spaces.stress[k].n(1) {
                    let (e22, ie22) = tab.edge[k][j];
                    if covered(j) || (e22 == 0.0 && ie22 == 0.0) {
                        continue;
                    }
                    f(k, 0, j, self.stress_parts_with(tab, frame, k, 0, j));
                }
            }
        }
    }

    fn stress_parts_with(
        &self,
        tab: &PointTab,
        frame: &PointFrame,
        k: usize,
        i: usize,
        j: usize,
    ) -> SymParts {
        let mut p = self.stress_parts_local(tab, k, i, j);
        if self.corrected() && k < 2 && i == 0 {
            let (b2, _) = tab.stress[k].d2.get(j);
            let (e22, ie22) = tab.edge[k][j];
            p.e11 = b2 * frame.e11w[k];
            p.e22 = e22;
            p.int_e22 = ie22;
        }
        p
    }

    fn stress_parts_local(&self, tab: &PointTab, k: usize, i: usize, j: usize) -> SymParts {
        let st = &tab.stress[k];
        let kv = &self.spaces.stress[k].dirs[0];
        let (b1, d1) = st.d1.get(i);
        let (b2, d2) = st.d2.get(j);
        let i1 = st.int(kv, i);
        let at0 = if i == 0 { 1.0 } else { 0.0 };
        let mut p = SymParts::default();
        p.val[k] = b1 * b2;
        match k {
            0 => {
                p.div = [d1 * b2, 0.0];
                p.int_div = [(b1 - at0) * b2, 0.0];
            }
            1 => {
                p.div = [b1 * d2, d1 * b2];
                p.int_div = [i1 * d2, (b1 - at0) * b2];
                p.int12 = i1 * b2;
            }
            _ => {
                p.div = [0.0, b1 * d2];
                p.int_div = [0.0, i1 * d2];
                p.int22 = i1 * b2;
            }
        }
        p
    }

    /// Physical displacement basis functions at the frame point: (global displacement
    /// index, value).
    pub fn disp_at(&self, frame: &PointFrame) -> Vec<(usize, Vec2)> {
        let mut out = Vec::new();
        for k in 0..2 {
            let sp = &self.spaces.disp[k];
            let st = SpaceTab::new(sp, frame.z);
            let i_lo = if self.tails { 0 } else { st.d1.first };
            for j in st.d2.first..=st.d2.last() {
                let (b2, _) = st.d2.get(j);
                for i in i_lo..=st.d1.last() {
                    let (b1, _) = st.d1.get(i);
                    let i1 = st.int(&sp.dirs[0], i);
                    let mut v = [0.0; 2];
                    let mut iv = [0.0; 2];
                    v[k] = b1 * b2;
                    iv[k] = i1 * b2;
                    let u = frame.disp(v, iv);
                    if u[0] != 0.0 || u[1] != 0.0 {
                        out.push((self.spaces.disp_offset(k) + sp.index(i, j), u));
                    }
                }
            }
        }
        out
    }

    /// Parametric parts of the spline field with stacked coefficients [S11 | S12 | S22].
    pub fn field_parts(&self, frame: &PointFrame, coeffs: &[f64]) -> SymParts {
        let tab = PointTab::new(&self.spaces, frame);
        let mut acc = SymParts::default();
        self.for_each_stress(&tab, frame, |k, i, j, parts| {
            let c = coeffs[self.spaces.stress_offset(k) + self.spaces.stress[k].index(i, j)];
            if c != 0.0 {
                acc.axpy(c, &parts);
            }
        });
        acc
    }

    /// Physical stress and divergence of a spline field at z.
    pub fn eval_stress(&self, coeffs: &[f64], z: Vec2) -> Result<(Mat2, Vec2)> {
        let frame = self.frame(z)?;
        Ok(frame.stress(&self.field_parts(&frame, coeffs)))
    }

    /// Physical displacement of a spline field with stacked coefficients [V1 | V2].
    pub fn eval_disp(&self, coeffs: &[f64], z: Vec2) -> Result<Vec2> {
        let frame = self.frame(z)?;
        Ok(self.disp_from_frame(&frame, coeffs))
    }

    fn disp_from_frame(&self, frame: &PointFrame, coeffs: &[f64]) -> Vec2 {
        let mut v = [0.0; 2];
        let mut iv = [0.0; 2];
        for k in 0..2 {
            let sp = &self.spaces.disp[k];
            let c = &coeffs[self.spaces.disp_offset(k)..self.spaces.disp_offset(k) + sp.dim()];
            let st = SpaceTab::new(sp, frame.z);
            for j in st.d2.first..=st.d2.last() {
                let (b2, _) = st.d2.get(j);
                for i in 0..=st.d1.last() {
                    let ci = c[sp.index(i, j)];
                    if ci == 0.0 {
                        continue;
                    }
                    let (b1, _) = st.d1.get(i);
                    v[k] += ci * b1 * b2;
                    iv[k] += ci * st.int(&sp.dirs[0], i) * b2;
                }
            }
        }
        frame.disp(v, iv)
    }
}

/// Parametric divergence of a symmetric spline field, rowwise, as coefficients in the
/// displacement space.
pub fn parametric_divergence(sp: &StrongSpaces, coeffs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; sp.disp_dim()];
    let [s11, s12, s22] = &sp.stress;
    let c = |k: usize| &coeffs[sp.stress_offset(k)..sp.stress_offset(k) + sp.stress[k].dim()];
    // row 1: d1 S11 + d2 S12, row 2: d1 S12 + d2 S22
    let add_d1 = |src: &TensorSpace, cs: &[f64], dst: &TensorSpace, out: &mut [f64]| {
        for j in 0..src.n(1) {
            let row: Vec<f64> = (0..src.n(0)).map(|i| cs[src.index(i, j)]).collect();
            for (i, v) in src.dirs[0].derivative_coeffs(&row).into_iter().enumerate() {
                out[dst.index(i, j)] += v;
            }
        }
    };
    let add_d2 = |src: &TensorSpace, cs: &[f64], dst: &TensorSpace, out: &mut [f64]| {
        for i in 0..src.n(0) {
            let col: Vec<f64> = (0..src.n(1)).map(|j| cs[src.index(i, j)]).collect();
            for (j, v) in src.dirs[1].derivative_coeffs(&col).into_iter().enumerate() {
                out[dst.index(i, j)] += v;
            }
        }
    };
    let n0 = sp.disp[0].dim();
    let (o1, o2) = out.split_at_mut(n0);
    add_d1(s11, c(0), &sp.disp[0], o1);
    add_d2(s12, c(1), &sp.disp[0], o1);
    add_d1(s12, c(1), &sp.disp[1], o2);
    add_d2(s22, c(2), &sp.disp[1], o2);
    out
}

/// Symmetric field with divergence `v` and zero normal trace on z1 = 0:
/// S11 = ∫_0^{z1} v1 dz1, S22 = ∫_0^{z2} v2 dz2, S12 = 0.
pub fn divergence_preimage(sp: &StrongSpaces, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; sp.stress_dim()];
    let (v1, v2) = v.split_at(sp.disp[0].dim());
    let d1 = &sp.disp[0];
    for j in 0..d1.n(1) {
        let row: Vec<f64> = (0..d1.n(0)).map(|i| v1[d1.index(i, j)]).collect();
        for (i, c) in d1.dirs[0].antiderivative_coeffs(&row).into_iter().enumerate() {
            out[sp.stress[0].index(i, j)] = c;
        }
    }
    let d2 = &sp.disp[1];
    let o22 = sp.stress_offset(2);
    for i in 0..d2.n(0) {
        let col: Vec<f64> = (0..d2.n(1)).map(|j| v2[d2.index(i, j)]).collect();
        for (j, c) in d2.dirs[1].antiderivative_coeffs(&col).into_iter().enumerate() {
            out[o22 + sp.stress[2].index(i, j)] = c;
        }
    }
    out
}

// ---------------------------------------------------------------------------------------
// Assembly.

fn variant_of(prob: &Problem) -> Result<Variant> {
    let dom = prob.domain;
    if dom.patches.len() != 1 {
        return Err(Error::Unsupported("strong symmetry is implemented for single patches".into()));
    }
    let mut kinds = [EdgeKind::Dirichlet; 4];
    for b in &dom.boundary {
        kinds[b.edge] = edge_kind(&b.tag)?;
    }
    match kinds {
        [EdgeKind::Dirichlet, EdgeKind::Dirichlet, EdgeKind::Dirichlet, EdgeKind::Dirichlet] => {
            Ok(Variant::Dirichlet)
        }
        [EdgeKind::Traction, EdgeKind::Dirichlet, EdgeKind::Dirichlet, EdgeKind::Dirichlet] => {
            let geo = &dom.patches[0];
            for k in 0..=20 {
                let g = geo.eval([0.0, k as f64 / 20.0])?;
                let n = scaled_normal(0, &g);
                let len = n[0].hypot(n[1]);
                let t = (prob.traction)(g.x, [n[0] / len, n[1] / len]);
                if t[0].abs().max(t[1].abs()) > 1e-12 {
                    return Err(Error::Unsupported(
                        "strong symmetry supports only a traction-free edge z1 = 0".into(),
                    ));
                }
            }
            log::warn!("strong symmetry with a traction-free edge is experimental");
            Ok(Variant::TractionFreeLeft)
        }
        _ => Err(Error::Unsupported(
            "strong symmetry needs Dirichlet data on all edges, or a traction-free edge z1 = 0".into(),
        )),
    }
}

/// Assembled Hellinger-Reissner system; `stress_map[g]` is the unknown of stress basis
/// function g, absent for functions removed by the variant.
pub struct StrongSystem {
    pub system: SparseSystem,
    pub basis: StrongBasis,
    pub stress_map: Vec<Option<usize>>,
    pub n_stress: usize,
}

struct ElementOut {
    trip: Vec<(usize, usize, f64)>,
    rhs: Vec<(usize, f64)>,
}

fn element_system(
    basis: &StrongBasis,
    prob: &Problem,
    map: &[Option<usize>],
    n_stress: usize,
    elem: [[f64; 2]; 2],
    rule: &GaussRule,
    dirichlet: &[usize],
) -> Result<ElementOut> {
    let m = &prob.material;
    let alpha = m.trace_factor();
    let c2m = 0.5 / m.mu;
    let mut pts = Vec::new();
    for (y, wy) in rule.mapped(elem[1][0], elem[1][1]) {
        for (x, wx) in rule.mapped(elem[0][0], elem[0][1]) {
            pts.push(([x, y], wx * wy));
        }
    }
    let mut slot: HashMap<usize, usize> = HashMap::new();
    let mut sglob: Vec<usize> = Vec::new();
    let mut uslot: HashMap<usize, usize> = HashMap::new();
    let mut uglob: Vec<usize> = Vec::new();
    let mut data = Vec::with_capacity(pts.len());
    for &(z, w) in &pts {
        let fr = basis.frame(z)?;
        let s: Vec<(usize, Mat2, Vec2)> = basis
            .stress_at(&fr)
            .into_iter()
            .filter_map(|(g, a, d)| map[g].map(|gi| (gi, a, d)))
            .map(|(gi, a, d)| {
                let l = *slot.entry(gi).or_insert_with(|| {
                    sglob.push(gi);
                    sglob.len() - 1
                });
                (l, a, d)
            })
            .collect();
        let u: Vec<(usize, Vec2)> = basis
            .disp_at(&fr)
            .into_iter()
            .map(|(g, v)| {
                let l = *uslot.entry(g).or_insert_with(|| {
                    uglob.push(g);
                    uglob.len() - 1
                });
                (l, v)
            })
            .collect();
        data.push((w * fr.geo.det, fr.geo.x, s, u));
    }
    let (ns, nu) = (sglob.len(), uglob.len());
    let mut a = vec![0.0; ns * ns];
    let mut b = vec![0.0; nu * ns];
    let mut rhs_u = vec![0.0; nu];
    for (w, x, s, u) in &data {
        for (ia, &(la, sa, da)) in s.iter().enumerate() {
            let tra = sa[0][0] + sa[1][1];
            for &(lb, sb, _) in &s[ia..] {
                let ip = sa[0][0] * sb[0][0] + 2.0 * sa[0][1] * sb[0][1] + sa[1][1] * sb[1][1];
                let trb = sb[0][0] + sb[1][1];
                let v = w * c2m * (ip - alpha * tra * trb);
                a[la * ns + lb] += v;
                if la != lb {
                    a[lb * ns + la] += v;
                }
            }
            for &(lu, uv) in u {
                b[lu * ns + la] += w * (uv[0] * da[0] + uv[1] * da[1]);
            }
        }
        let f = (prob.load)(*x);
        for &(lu, uv) in u {
            rhs_u[lu] += w * (f[0] * uv[0] + f[1] * uv[1]);
        }
    }
    let mut trip = Vec::with_capacity(ns * ns + 2 * nu * ns);
    for i in 0..ns {
        for j in 0..ns {
            let v = a[i * ns + j];
            if v != 0.0 {
                trip.push((sglob[i], sglob[j], v));
            }
        }
    }
    for i in 0..nu {
        for j in 0..ns {
            let v = b[i * ns + j];
            if v != 0.0 {
                trip.push((n_stress + uglob[i], sglob[j], v));
                trip.push((sglob[j], n_stress + uglob[i], v));
            }
        }
    }
    let mut rhs: Vec<(usize, f64)> = (0..nu).map(|i| (n_stress + uglob[i], rhs_u[i])).collect();
    // <τ n, u_D> on the Dirichlet edges touching this element.
    for &edge in dirichlet {
        let (c, at) = match edge {
            0 => (0, 0.0),
            1 => (0, 1.0),
            2 => (1, 0.0),
            _ => (1, 1.0),
        };
        if elem[c][0] != at && elem[c][1] != at {
            continue;
        }
        let (lo, hi) = (elem[1 - c][0], elem[1 - c][1]);
        for (t, w) in rule.mapped(lo, hi) {
            let z = edge_point(edge, t);
            let fr = basis.frame(z)?;
            let n = scaled_normal(edge, &fr.geo);
            let ud = (prob.displacement)(fr.geo.x);
            for (g, s, _) in basis.stress_at(&fr) {
                if let Some(gi) = map[g] {
                    let sn = [s[0][0] * n[0] + s[0][1] * n[1], s[1][0] * n[0] + s[1][1] * n[1]];
                    rhs.push((gi, w * (sn[0] * ud[0] + sn[1] * ud[1])));
                }
            }
        }
    }
    Ok(ElementOut { trip, rhs })
}

/// Assemble the Hellinger-Reissner system on a single patch.
pub fn assemble_strong(spaces: &StrongSpaces, prob: &Problem, quad: usize) -> Result<StrongSystem> {
    let variant = variant_of(prob)?;
    let geo = &prob.domain.patches[0];
    let basis = StrongBasis::new(spaces, geo, variant);
    let mut map = vec![None; spaces.stress_dim()];
    let mut n_stress = 0;
    for k in 0..3 {
        let sp = &spaces.stress[k];
        for idx in 0..sp.dim() {
            let (i, _) = sp.split(idx);
            if basis.active(k, i) {
                map[spaces.stress_offset(k) + idx] = Some(n_stress);
                n_stress += 1;
            }
        }
    }
    let n = n_stress + spaces.disp_dim();
    let dirichlet: Vec<usize> = prob.edges(EdgeKind::Dirichlet)?.into_iter().map(|(_, e)| e).collect();
    let rule = GaussRule::new(quad);
    let mesh = ParametricMesh::uniform(spaces.n);
    let elems = mesh.elements();
    let mut trip = TripletBuffer::new(n, n);
    let mut rhs = vec![0.0; n];
    const MERGE_AT: usize = 1 << 24;
    for row in elems.chunks(spaces.n) {
        let parts: Vec<Result<ElementOut>> = row
            .par_iter()
            .map(|&e| element_system(&basis, prob, &map, n_stress, e, &rule, &dirichlet))
            .collect();
        for part in parts {
            let out = part?;
            trip.extend(out.trip);
            for (i, v) in out.rhs {
                rhs[i] += v;
            }
        }
        if trip.len() > MERGE_AT {
            trip.compress();
        }
    }
    trip.compress();
    let blocks = vec![("stress".to_string(), 0..n_stress), ("displacement".to_string(), n_stress..n)];
    Ok(StrongSystem { system: SparseSystem { matrix: trip, rhs, blocks }, basis, stress_map: map, n_stress })
}

#[derive(Clone, Debug)]
pub struct StrongSolution {
    pub basis: StrongBasis,
    pub domain: MultiPatch,
    /// Stacked [S11 | S12 | S22] coefficients, zero for removed functions.
    pub stress: Vec<f64>,
    /// Stacked [V1 | V2] coefficients.
    pub disp: Vec<f64>,
    pub report: SolveReport,
}

impl StrongSolution {
    pub fn eval(&self, z: Vec2) -> Result<PointValues> {
        let fr = self.basis.frame(z)?;
        let (sigma, div) = fr.stress(&self.basis.field_parts(&fr, &self.stress));
        let u = self.basis.disp_from_frame(&fr, &self.disp);
        Ok(PointValues { x: fr.geo.x, sigma, div, u, q: 0.0 })
    }
}

pub fn solve_strong(spaces: &StrongSpaces, prob: &Problem, quad: usize) -> Result<StrongSolution> {
    let sys = assemble_strong(spaces, prob, quad)?;
    let report = solve_direct(&sys.system)?;
    let stress = sys.stress_map.iter().map(|m| m.map_or(0.0, |g| report.x[g])).collect();
    let disp = report.x[sys.n_stress..].to_vec();
    Ok(StrongSolution { basis: sys.basis, domain: prob.domain.clone(), stress, disp, report })
}

/// Symmetric matrix from (S11, S12, S22).
pub fn sym_from(v: [f64; 3]) -> Mat2 {
    [[v[0], v[1]], [v[1], v[2]]]
}

/// adj(J) at a parametric point, for callers building parametric test fields.
pub fn adjugate_at(geo: &GeometryMap, z: Vec2) -> Mat2 {
    adjugate(&geo.derivs(z).d1)
}
