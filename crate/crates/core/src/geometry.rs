//! Patch parametrizations F: (0,1)^2 -> R^2 and multi-patch topology.

use crate::bspline::KnotVector;
use crate::error::{Error, Result};
use crate::linalg::{det2, inv2, Mat2, Vec2};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// F, first and second parametric derivatives at a point.
/// `d1[n][i] = d_i F_n`, `d2[n][i][j] = d_i d_j F_n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeoDerivs {
    pub x: Vec2,
    pub d1: Mat2,
    pub d2: [Mat2; 2],
}

/// Jacobian bundle used by the pullbacks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeoPoint {
    pub x: Vec2,
    pub jac: Mat2,
    pub det: f64,
    pub adj: Mat2,
}

pub fn adjugate(j: &Mat2) -> Mat2 {
    [[j[1][1], -j[0][1]], [-j[1][0], j[0][0]]]
}

/// User-supplied smooth map with derivatives up to order two.
pub trait AnalyticMap: Send + Sync + std::fmt::Debug {
    fn derivs(&self, z: Vec2) -> GeoDerivs;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplinePatch {
    pub degree: [usize; 2],
    pub knots: [Vec<f64>; 2],
    /// Control points indexed i + n1 * j.
    pub control_points: Vec<Vec2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub enum GeometryMap {
    Identity,
    /// (z1, z2) -> (z1, z1^2 + z2)
    CurvedSquare,
    Spline(SplinePatch, Arc<[KnotVector; 2]>),
    Analytic(Arc<dyn AnalyticMap>),
}

impl PartialEq for GeometryMap {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (GeometryMap::Identity, GeometryMap::Identity) => true,
            (GeometryMap::CurvedSquare, GeometryMap::CurvedSquare) => true,
            (GeometryMap::Spline(a, _), GeometryMap::Spline(b, _)) => a == b,
            _ => false,
        }
    }
}

impl GeometryMap {
    pub fn spline(patch: SplinePatch) -> Result<Self> {
        let kv = [
            KnotVector::from_knots(patch.degree[0], &patch.knots[0])?,
            KnotVector::from_knots(patch.degree[1], &patch.knots[1])?,
        ];
        let n = kv[0].dim() * kv[1].dim();
        if patch.control_points.len() != n {
            return Err(Error::InvalidSpace(format!(
                "expected {n} control points, got {}",
                patch.control_points.len()
            )));
        }
        if let Some(w) = &patch.weights {
            if w.len() != n || w.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::InvalidSpace("weights must be positive, one per control point".into()));
            }
        }
        Ok(GeometryMap::Spline(patch, Arc::new(kv)))
    }

    pub fn analytic(map: Arc<dyn AnalyticMap>) -> Self {
        GeometryMap::Analytic(map)
    }

    pub fn derivs(&self, z: Vec2) -> GeoDerivs {
        match self {
            GeometryMap::Identity => GeoDerivs { x: z, d1: [[1.0, 0.0], [0.0, 1.0]], d2: [[[0.0; 2]; 2]; 2] },
            GeometryMap::CurvedSquare => GeoDerivs {
                x: [z[0], z[0] * z[0] + z[1]],
                d1: [[1.0, 0.0], [2.0 * z[0], 1.0]],
                d2: [[[0.0; 2]; 2], [[2.0, 0.0], [0.0, 0.0]]],
            },
            GeometryMap::Spline(p, kv) => spline_derivs(p, kv, z),
            GeometryMap::Analytic(m) => m.derivs(z),
        }
    }

    /// x, J, det J and adj J; rejects non-positive determinants.
    pub fn eval(&self, z: Vec2) -> Result<GeoPoint> {
        let d = self.derivs(z);
        let det = det2(&d.d1);
        if !(det > 0.0) {
            return Err(Error::DegenerateGeometry { det, z1: z[0], z2: z[1] });
        }
        Ok(GeoPoint { x: d.x, jac: d.d1, det, adj: adjugate(&d.d1) })
    }

    pub fn point(&self, z: Vec2) -> Vec2 {
        self.derivs(z).x
    }

    /// Checks det J > 0 on an (m+1)^2 grid.
    pub fn check_orientation(&self, m: usize) -> Result<()> {
        for a in 0..=m {
            for b in 0..=m {
                self.eval([a as f64 / m as f64, b as f64 / m as f64])?;
            }
        }
        Ok(())
    }

    /// Parametric preimage of x via damped Newton seeded from the nearest grid sample.
    pub fn invert(&self, x: Vec2) -> Result<Vec2> {
        match self {
            GeometryMap::Identity => return Ok(x),
            GeometryMap::CurvedSquare => return Ok([x[0], x[1] - x[0] * x[0]]),
            _ => {}
        }
        let m = 16;
        let mut best = ([0.0, 0.0], f64::INFINITY);
        for a in 0..=m {
            for b in 0..=m {
                let z = [a as f64 / m as f64, b as f64 / m as f64];
                let y = self.point(z);
                let d = (y[0] - x[0]).hypot(y[1] - x[1]);
                if d < best.1 {
                    best = (z, d);
                }
            }
        }
        let mut z = best.0;
        for _ in 0..50 {
            let d = self.derivs(z);
            let r = [d.x[0] - x[0], d.x[1] - x[1]];
            let rn = r[0].hypot(r[1]);
            if rn <= 1e-13 * (1.0 + x[0].hypot(x[1])) {
                return Ok(z);
            }
            let ji = inv2(&d.d1);
            let step = [ji[0][0] * r[0] + ji[0][1] * r[1], ji[1][0] * r[0] + ji[1][1] * r[1]];
            let mut t = 1.0;
            loop {
                let cand = [(z[0] - t * step[0]).clamp(0.0, 1.0), (z[1] - t * step[1]).clamp(0.0, 1.0)];
                let y = self.point(cand);
                let rc = (y[0] - x[0]).hypot(y[1] - x[1]);
                if rc < rn || t < 1e-4 {
                    z = cand;
                    break;
                }
                t *= 0.5;
            }
        }
        let y = self.point(z);
        if (y[0] - x[0]).hypot(y[1] - x[1]) <= 1e-12 * (1.0 + x[0].hypot(x[1])) {
            Ok(z)
        } else {
            Err(Error::InversionFailed(x[0], x[1]))
        }
    }

    /// Degree of a polynomial (non-rational) spline map; None for other kinds.
    pub fn spline_degree(&self) -> Option<[usize; 2]> {
        match self {
            GeometryMap::Identity => Some([1, 1]),
            GeometryMap::Spline(p, _) if p.weights.is_none() => Some(p.degree),
            _ => None,
        }
    }
}

fn spline_derivs(p: &SplinePatch, kv: &[KnotVector; 2], z: Vec2) -> GeoDerivs {
    let (f1, d1) = kv[0].eval_derivs_unchecked(z[0], 2);
    let (f2, d2) = kv[1].eval_derivs_unchecked(z[1], 2);
    let n1 = kv[0].dim();
    // a[k][l]: derivative d1^k d2^l of the homogeneous numerator; w[k][l]: of the weight.
    let mut a = [[[0.0f64; 2]; 3]; 3];
    let mut w = [[0.0f64; 3]; 3];
    for (bj, _) in d2[0].iter().enumerate() {
        for (bi, _) in d1[0].iter().enumerate() {
            let idx = (f1 + bi) + n1 * (f2 + bj);
            let wt = p.weights.as_ref().map_or(1.0, |w| w[idx]);
            let cp = p.control_points[idx];
            for k in 0..3 {
                for l in 0..3 - k {
                    let nb = d1[k][bi] * d2[l][bj] * wt;
                    w[k][l] += nb;
                    a[k][l][0] += nb * cp[0];
                    a[k][l][1] += nb * cp[1];
                }
            }
        }
    }
    let mut out = GeoDerivs { x: [0.0; 2], d1: [[0.0; 2]; 2], d2: [[[0.0; 2]; 2]; 2] };
    let w0 = w[0][0];
    let dw = [w[1][0], w[0][1]];
    let ddw = [[w[2][0], w[1][1]], [w[1][1], w[0][2]]];
    for n in 0..2 {
        let f = a[0][0][n] / w0;
        let da = [a[1][0][n], a[0][1][n]];
        let dda = [[a[2][0][n], a[1][1][n]], [a[1][1][n], a[0][2][n]]];
        let df = [(da[0] - f * dw[0]) / w0, (da[1] - f * dw[1]) / w0];
        out.x[n] = f;
        out.d1[n] = df;
        for i in 0..2 {
            for j in 0..2 {
                out.d2[n][i][j] = (dda[i][j] - df[i] * dw[j] - df[j] * dw[i] - f * ddw[i][j]) / w0;
            }
        }
    }
    out
}

/// Second derivatives of the inverse map at x = F(z): `h[k][a][b] = d_a d_b (F^{-1})_k`.
pub fn inverse_hessians(d: &GeoDerivs) -> [Mat2; 2] {
    let ji = inv2(&d.d1);
    let mut h = [[[0.0; 2]; 2]; 2];
    for k in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                let mut s = 0.0;
                for m in 0..2 {
                    for i in 0..2 {
                        for j in 0..2 {
                            s += ji[k][m] * d.d2[m][i][j] * ji[i][a] * ji[j][b];
                        }
                    }
                }
                h[k][a][b] = -s;
            }
        }
    }
    h
}

/// Parametric derivative d/dz1 of adj J: `[[d1 J22, -d1 J12], [-d1 J21, d1 J11]]`.
pub fn d1_adjugate(d: &GeoDerivs) -> Mat2 {
    let dj = |n: usize, i: usize| d.d2[n][i][0];
    [[dj(1, 1), -dj(0, 1)], [-dj(1, 0), dj(0, 0)]]
}

/// Parametric derivative d/dz1 of J, i.e. `d2[n][i][0]`.
pub fn d1_jacobian(d: &GeoDerivs) -> Mat2 {
    [[d.d2[0][0][0], d.d2[0][1][0]], [d.d2[1][0][0], d.d2[1][1][0]]]
}

/// Edge numbering: 0 -> z1=0, 1 -> z1=1, 2 -> z2=0, 3 -> z2=1.
pub fn edge_point(edge: usize, t: f64) -> Vec2 {
    match edge {
        0 => [0.0, t],
        1 => [1.0, t],
        2 => [t, 0.0],
        _ => [t, 1.0],
    }
}

/// Outward parametric unit normal of an edge.
pub fn edge_normal(edge: usize) -> Vec2 {
    match edge {
        0 => [-1.0, 0.0],
        1 => [1.0, 0.0],
        2 => [0.0, -1.0],
        _ => [0.0, 1.0],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interface {
    pub patch_a: usize,
    pub edge_a: usize,
    pub patch_b: usize,
    pub edge_b: usize,
    /// Edge parameters run in opposite directions.
    pub reversed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub patch: usize,
    pub edge: usize,
    pub tag: String,
}

/// Conforming multi-patch domain.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPatch {
    pub patches: Vec<GeometryMap>,
    pub interfaces: Vec<Interface>,
    pub boundary: Vec<BoundaryEdge>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum PatchFile {
    Identity,
    CurvedSquare,
    Spline(SplinePatch),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
struct DomainFile {
    patches: Vec<PatchFile>,
    #[serde(default)]
    interfaces: Vec<Interface>,
    #[serde(default)]
    boundary: Vec<BoundaryEdge>,
}

impl MultiPatch {
    pub fn single(map: GeometryMap, tags: [&str; 4]) -> Self {
        MultiPatch {
            patches: vec![map],
            interfaces: vec![],
            boundary: (0..4).map(|e| BoundaryEdge { patch: 0, edge: e, tag: tags[e].to_string() }).collect(),
        }
    }

    /// Validates orientation, interface conformity and edge coverage.
    pub fn build(
        patches: Vec<GeometryMap>,
        interfaces: Vec<Interface>,
        boundary: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        let mp = MultiPatch { patches, interfaces, boundary };
        mp.validate()?;
        Ok(mp)
    }

    pub fn validate(&self) -> Result<()> {
        let np = self.patches.len();
        for g in &self.patches {
            g.check_orientation(8)?;
        }
        let mut seen = vec![[0usize; 4]; np];
        for (k, it) in self.interfaces.iter().enumerate() {
            if it.patch_a >= np || it.patch_b >= np || it.edge_a > 3 || it.edge_b > 3 {
                return Err(Error::Conformity(format!("interface {k} references a missing edge")));
            }
            seen[it.patch_a][it.edge_a] += 1;
            seen[it.patch_b][it.edge_b] += 1;
            let dev = self.interface_mismatch(it, 100);
            if dev > 1e-10 {
                return Err(Error::Conformity(format!("interface {k} traces differ by {dev:e}")));
            }
        }
        for b in &self.boundary {
            if b.patch >= np || b.edge > 3 {
                return Err(Error::Boundary(format!("edge ({}, {}) does not exist", b.patch, b.edge)));
            }
            seen[b.patch][b.edge] += 1;
        }
        for (p, s) in seen.iter().enumerate() {
            for (e, &c) in s.iter().enumerate() {
                if c != 1 {
                    return Err(Error::Conformity(format!("edge {e} of patch {p} is referenced {c} times")));
                }
            }
        }
        Ok(())
    }

    /// Largest |F_a(edge param) - F_b(matched param)| over `samples` points.
    pub fn interface_mismatch(&self, it: &Interface, samples: usize) -> f64 {
        let mut dev: f64 = 0.0;
        for s in 0..samples {
            let t = (s as f64 + 0.5) / samples as f64;
            let tb = if it.reversed { 1.0 - t } else { t };
            let xa = self.patches[it.patch_a].point(edge_point(it.edge_a, t));
            let xb = self.patches[it.patch_b].point(edge_point(it.edge_b, tb));
            dev = dev.max((xa[0] - xb[0]).hypot(xa[1] - xb[1]));
        }
        dev
    }

    pub fn boundary_tag(&self, patch: usize, edge: usize) -> Option<&str> {
        self.boundary.iter().find(|b| b.patch == patch && b.edge == edge).map(|b| b.tag.as_str())
    }

    pub fn to_json(&self) -> Result<String> {
        let patches = self
            .patches
            .iter()
            .map(|g| match g {
                GeometryMap::Identity => Ok(PatchFile::Identity),
                GeometryMap::CurvedSquare => Ok(PatchFile::CurvedSquare),
                GeometryMap::Spline(p, _) => Ok(PatchFile::Spline(p.clone())),
                GeometryMap::Analytic(_) => {
                    Err(Error::Unsupported("analytic maps cannot be serialized".into()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let f = DomainFile { patches, interfaces: self.interfaces.clone(), boundary: self.boundary.clone() };
        Ok(serde_json::to_string_pretty(&f)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: DomainFile = serde_json::from_str(s)?;
        let patches = f
            .patches
            .into_iter()
            .map(|p| match p {
                PatchFile::Identity => Ok(GeometryMap::Identity),
                PatchFile::CurvedSquare => Ok(GeometryMap::CurvedSquare),
                PatchFile::Spline(sp) => GeometryMap::spline(sp),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::build(patches, f.interfaces, f.boundary)
    }
}

/// Boehm insertion of knot t into a curve with vector coefficients.
fn insert_knot(p: usize, knots: &[f64], cps: &[Vec<f64>], t: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let kv = KnotVector::from_knots(p, knots).expect("valid knots");
    let k = kv.find_span(t);
    let mut q = Vec::with_capacity(cps.len() + 1);
    for i in 0..=cps.len() {
        if i + p <= k {
            q.push(cps[i].clone());
        } else if i > k {
            q.push(cps[i - 1].clone());
        } else {
            let a = (t - knots[i]) / (knots[i + p] - knots[i]);
            q.push(cps[i].iter().zip(cps[i - 1].iter()).map(|(x, y)| a * x + (1.0 - a) * y).collect());
        }
    }
    let mut nk = knots.to_vec();
    nk.insert(k + 1, t);
    (nk, q)
}

/// Splits a polynomial tensor spline at parameter values (s1, s2) into four patches.
/// Returns patches ordered (lower-left, lower-right, upper-left, upper-right).
fn split_four(p: [usize; 2], knots: [Vec<f64>; 2], cps: Vec<Vec2>, s: [f64; 2]) -> Vec<SplinePatch> {
    let n1 = knots[0].len() - p[0] - 1;
    let n2 = knots[1].len() - p[1] - 1;
    let mult = |k: &[f64], t: f64| k.iter().filter(|&&x| x == t).count();
    // Raise the multiplicity of s to p in each direction.
    let mut k1 = knots[0].clone();
    let mut rows: Vec<Vec<Vec<f64>>> =
        (0..n2).map(|j| (0..n1).map(|i| cps[i + n1 * j].to_vec()).collect()).collect();
    while mult(&k1, s[0]) < p[0] {
        let mut nk = k1.clone();
        for row in rows.iter_mut() {
            let (k, q) = insert_knot(p[0], &k1, row, s[0]);
            nk = k;
            *row = q;
        }
        k1 = nk;
    }
    let m1 = k1.len() - p[0] - 1;
    let mut k2 = knots[1].clone();
    let mut cols: Vec<Vec<Vec<f64>>> =
        (0..m1).map(|i| (0..n2).map(|j| rows[j][i].clone()).collect()).collect();
    while mult(&k2, s[1]) < p[1] {
        let mut nk = k2.clone();
        for col in cols.iter_mut() {
            let (k, q) = insert_knot(p[1], &k2, col, s[1]);
            nk = k;
            *col = q;
        }
        k2 = nk;
    }
    let m2 = k2.len() - p[1] - 1;
    let split = |k: &[f64], deg: usize, t: f64| {
        // Index of the shared control point and the two local knot vectors.
        let last = k.iter().rposition(|&x| x == t).unwrap();
        let cut = last - deg;
        let lo_knots: Vec<f64> = k[..=last].iter().chain(std::iter::once(&t)).map(|&x| x / t).collect();
        let hi_knots: Vec<f64> =
            std::iter::once(&t).chain(k[last - deg + 1..].iter()).map(|&x| (x - t) / (1.0 - t)).collect();
        let _ = deg;
        (cut, lo_knots, hi_knots)
    };
    let (c1, lo1, hi1) = split(&k1, p[0], s[0]);
    let (c2, lo2, hi2) = split(&k2, p[1], s[1]);
    let mut out = Vec::new();
    for (jr, k2l) in [(0..=c2, lo2.clone()), (c2..=m2 - 1, hi2.clone())] {
        for (ir, k1l) in [(0..=c1, lo1.clone()), (c1..=m1 - 1, hi1.clone())] {
            let mut pts = Vec::new();
            for j in jr.clone() {
                for i in ir.clone() {
                    pts.push([cols[i][j][0], cols[i][j][1]]);
                }
            }
            out.push(SplinePatch {
                degree: p,
                knots: [clean01(k1l.clone()), clean01(k2l.clone())],
                control_points: pts,
                weights: None,
            });
        }
    }
    out
}

fn clean01(mut k: Vec<f64>) -> Vec<f64> {
    for x in k.iter_mut() {
        if (*x).abs() < 1e-14 {
            *x = 0.0;
        }
        if (*x - 1.0).abs() < 1e-14 {
            *x = 1.0;
        }
    }
    k
}

/// Square [-1,1]^2 split into four biquadratic patches with curved interfaces; the patches
/// are restrictions of one globally C^1 biquadratic spline. Boundary edges carry `tag`.
pub fn four_patch_square(tag: &str) -> MultiPatch {
    let knots = vec![0.0, 0.0, 0.0, 0.25, 0.5, 0.75, 1.0, 1.0, 1.0];
    let kv = KnotVector::from_knots(2, &knots).unwrap();
    let g = kv.greville();
    let n = g.len();
    // Smooth perturbation of the identity that fixes the outer boundary.
    let warp = |x: f64, y: f64| {
        let pi = std::f64::consts::PI;
        [x + 0.12 * (pi * y).sin() * (1.0 - x * x), y + 0.12 * (pi * x).sin() * (1.0 - y * y)]
    };
    let mut cps = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cps.push(warp(2.0 * g[i] - 1.0, 2.0 * g[j] - 1.0));
        }
    }
    let parts = split_four([2, 2], [knots.clone(), knots], cps, [0.5, 0.5]);
    let patches: Vec<GeometryMap> = parts.into_iter().map(|p| GeometryMap::spline(p).unwrap()).collect();
    let interfaces = vec![
        Interface { patch_a: 0, edge_a: 1, patch_b: 1, edge_b: 0, reversed: false },
        Interface { patch_a: 2, edge_a: 1, patch_b: 3, edge_b: 0, reversed: false },
        Interface { patch_a: 0, edge_a: 3, patch_b: 2, edge_b: 2, reversed: false },
        Interface { patch_a: 1, edge_a: 3, patch_b: 3, edge_b: 2, reversed: false },
    ];
    let outer = [(0, 0), (0, 2), (1, 1), (1, 2), (2, 0), (2, 3), (3, 1), (3, 3)];
    let boundary =
        outer.iter().map(|&(p, e)| BoundaryEdge { patch: p, edge: e, tag: tag.to_string() }).collect();
    MultiPatch::build(patches, interfaces, boundary).expect("four-patch square is conforming")
}

/// Disk of radius 2 from four rational ring patches and one interior bilinear patch.
/// Ring patch k covers angles [k pi/2, (k+1) pi/2]; z1 is radial, z2 angular.
/// Outer arcs of patches 0,1 (upper half) are tagged `upper`, those of 2,3 `lower`.
pub fn disk_five_patch(upper: &str, lower: &str) -> MultiPatch {
    let r_out = 2.0;
    let b = 1.0;
    let e = |k: usize| {
        let a = k as f64 * std::f64::consts::FRAC_PI_2;
        [a.cos().round(), a.sin().round()]
    };
    let w = std::f64::consts::FRAC_1_SQRT_2;
    let mut patches = Vec::new();
    for k in 0..4 {
        let (e0, e1) = (e(k), e(k + 1));
        let inner = [
            [b * e0[0], b * e0[1]],
            [0.5 * b * (e0[0] + e1[0]), 0.5 * b * (e0[1] + e1[1])],
            [b * e1[0], b * e1[1]],
        ];
        let outer = [
            [r_out * e0[0], r_out * e0[1]],
            [r_out * (e0[0] + e1[0]), r_out * (e0[1] + e1[1])],
            [r_out * e1[0], r_out * e1[1]],
        ];
        let mut cps = Vec::new();
        let mut ws = Vec::new();
        for j in 0..3 {
            cps.push(inner[j]);
            ws.push(1.0);
            cps.push(outer[j]);
            ws.push(if j == 1 { w } else { 1.0 });
        }
        patches.push(
            GeometryMap::spline(SplinePatch {
                degree: [1, 2],
                knots: [vec![0.0, 0.0, 1.0, 1.0], vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]],
                control_points: cps,
                weights: Some(ws),
            })
            .unwrap(),
        );
    }
    // Interior diamond: (0,0)->V3, (1,0)->V0, (0,1)->V2, (1,1)->V1.
    let v = |k: usize| [b * e(k)[0], b * e(k)[1]];
    patches.push(
        GeometryMap::spline(SplinePatch {
            degree: [1, 1],
            knots: [vec![0.0, 0.0, 1.0, 1.0], vec![0.0, 0.0, 1.0, 1.0]],
            control_points: vec![v(3), v(0), v(2), v(1)],
            weights: None,
        })
        .unwrap(),
    );
    let mut interfaces = vec![
        Interface { patch_a: 0, edge_a: 0, patch_b: 4, edge_b: 1, reversed: false },
        Interface { patch_a: 1, edge_a: 0, patch_b: 4, edge_b: 3, reversed: true },
        Interface { patch_a: 2, edge_a: 0, patch_b: 4, edge_b: 0, reversed: true },
        Interface { patch_a: 3, edge_a: 0, patch_b: 4, edge_b: 2, reversed: false },
    ];
    for k in 0..4 {
        interfaces.push(Interface {
            patch_a: k,
            edge_a: 3,
            patch_b: (k + 1) % 4,
            edge_b: 2,
            reversed: false,
        });
    }
    let boundary = (0..4)
        .map(|k| BoundaryEdge { patch: k, edge: 1, tag: if k < 2 { upper } else { lower }.to_string() })
        .collect();
    MultiPatch::build(patches, interfaces, boundary).expect("disk is conforming")
}

/// Curved square (z1, z1^2 + z2) written as one biquadratic Bezier patch.
pub fn curved_square_spline() -> GeometryMap {
    let g = [0.0, 0.5, 1.0];
    let c = [0.0, 0.0, 1.0];
    let mut cps = Vec::new();
    for j in 0..3 {
        for i in 0..3 {
            cps.push([g[i], c[i] + g[j]]);
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

/// Affine patch [x0, x0+sx] x [y0, y0+sy] as a bilinear spline.
pub fn rectangle_patch(x0: f64, y0: f64, sx: f64, sy: f64) -> GeometryMap {
    GeometryMap::spline(SplinePatch {
        degree: [1, 1],
        knots: [vec![0., 0., 1., 1.], vec![0., 0., 1., 1.]],
        control_points: vec![[x0, y0], [x0 + sx, y0], [x0, y0 + sy], [x0 + sx, y0 + sy]],
        weights: None,
    })
    .unwrap()
}
