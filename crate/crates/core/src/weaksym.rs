//! Mixed elasticity with weakly imposed stress symmetry: stress rows in the Piola-mapped
//! flux space, displacement in L², and a skew multiplier of Taylor-Hood pressure type.

use crate::bspline::ParametricMesh;
use crate::derham::{flux_basis, skew, WeakSpaces};
use crate::error::{Error, Result};
use crate::fem::{edge_speed, ElementQuad, LocalBasis, QuadPoint};
use crate::geometry::{edge_normal, edge_point, MultiPatch};
use crate::linalg::{Mat2, Vec2};
use crate::projection::weighted_l2_projection;
use crate::quadrature::GaussRule;
use crate::solve::{solve_direct, SolveReport, SparseSystem, TripletBuffer};
use rayon::prelude::*;

/// Isotropic Lamé material.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Material {
    pub lambda: f64,
    pub mu: f64,
}

impl Material {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !(lambda >= 0.0) {
            return Err(Error::InvalidSpace(format!("need mu > 0 and lambda >= 0, got ({lambda}, {mu})")));
        }
        Ok(Material { lambda, mu })
    }

    /// A σ = (σ - λ/(2λ+2μ) tr σ I) / (2μ)
    pub fn compliance(&self, s: &Mat2) -> Mat2 {
        let a = self.trace_factor();
        let tr = s[0][0] + s[1][1];
        let c = 0.5 / self.mu;
        [[c * (s[0][0] - a * tr), c * s[0][1]], [c * s[1][0], c * (s[1][1] - a * tr)]]
    }

    /// C ε = λ tr ε I + 2μ ε
    pub fn stiffness(&self, e: &Mat2) -> Mat2 {
        let tr = e[0][0] + e[1][1];
        [
            [self.lambda * tr + 2.0 * self.mu * e[0][0], 2.0 * self.mu * e[0][1]],
            [2.0 * self.mu * e[1][0], self.lambda * tr + 2.0 * self.mu * e[1][1]],
        ]
    }

    /// λ/(2λ+2μ), evaluated stably for huge λ.
    pub fn trace_factor(&self) -> f64 {
        0.5 / (1.0 + self.mu / self.lambda.max(f64::MIN_POSITIVE))
    }
}

pub type VectorFn<'a> = &'a (dyn Fn(Vec2) -> Vec2 + Sync);
/// Traction as a function of the physical point and the outward unit normal.
pub type TractionFn<'a> = &'a (dyn Fn(Vec2, Vec2) -> Vec2 + Sync);
/// Matrix triplets and right-hand-side entries of one element.
type ElementPart = (Vec<(usize, usize, f64)>, Vec<(usize, f64)>);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Dirichlet,
    Traction,
}

pub fn edge_kind(tag: &str) -> Result<EdgeKind> {
    match tag {
        "dirichlet" => Ok(EdgeKind::Dirichlet),
        "traction" => Ok(EdgeKind::Traction),
        t => Err(Error::Boundary(format!("unknown boundary tag `{t}`"))),
    }
}

/// Data of one boundary value problem: ∇·σ = f, u = u_D on Γ_D, σn = t on Γ_t.
pub struct Problem<'a> {
    pub domain: &'a MultiPatch,
    pub material: Material,
    pub load: VectorFn<'a>,
    pub displacement: VectorFn<'a>,
    pub traction: TractionFn<'a>,
}

impl Problem<'_> {
    pub fn edges(&self, kind: EdgeKind) -> Result<Vec<(usize, usize)>> {
        let mut out = Vec::new();
        for b in &self.domain.boundary {
            if edge_kind(&b.tag)? == kind {
                out.push((b.patch, b.edge));
            }
        }
        Ok(out)
    }
}

/// Where a patch-local DOF lives in the global system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Target {
    Free(usize, f64),
    Fixed(f64),
}

#[derive(Clone, Debug)]
pub struct DofMap {
    pub sigma: Vec<Vec<Target>>,
    pub disp_offset: Vec<usize>,
    pub mult: Vec<Vec<Target>>,
    pub n_sigma: usize,
    pub n_disp: usize,
    pub n_mult: usize,
    pub n_fixed: usize,
}

impl DofMap {
    pub fn total(&self) -> usize {
        self.n_sigma + self.n_disp + self.n_mult
    }

    pub fn disp(&self, patch: usize, local: usize) -> Target {
        Target::Free(self.n_sigma + self.disp_offset[patch] + local, 1.0)
    }
}

/// Union-find with a sign relation between members and their representative.
struct SignedUnion {
    parent: Vec<usize>,
    sign: Vec<f64>,
}

impl SignedUnion {
    fn new(n: usize) -> Self {
        SignedUnion { parent: (0..n).collect(), sign: vec![1.0; n] }
    }

    fn find(&mut self, x: usize) -> (usize, f64) {
        let p = self.parent[x];
        if p == x {
            return (x, 1.0);
        }
        let (r, s) = self.find(p);
        self.parent[x] = r;
        self.sign[x] *= s;
        (r, self.sign[x])
    }

    /// Impose value(b) = s * value(a).
    fn union(&mut self, a: usize, b: usize, s: f64) -> Result<()> {
        let (ra, sa) = self.find(a);
        let (rb, sb) = self.find(b);
        if ra == rb {
            if (sb - s * sa).abs() > 0.5 {
                return Err(Error::Conformity("inconsistent interface orientation".into()));
            }
            return Ok(());
        }
        self.parent[rb] = ra;
        self.sign[rb] = s * sa * sb;
        Ok(())
    }
}

fn normal_comp(edge: usize) -> usize {
    if edge < 2 {
        0
    } else {
        1
    }
}

fn edge_sign(edge: usize) -> f64 {
    if edge % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Prescribed normal-trace coefficients of row `row` on a traction edge: the L²
/// projection of the physical traction onto the trace space, expressed as flux density.
fn traction_coefficients(
    spaces: &WeakSpaces,
    prob: &Problem,
    patch: usize,
    edge: usize,
    row: usize,
    rule: &GaussRule,
) -> Result<Vec<f64>> {
    let geo = &prob.domain.patches[patch];
    let c = normal_comp(edge);
    let kv = &spaces.derham.flux[c].dirs[1 - c];
    let nh = edge_normal(edge)[c];
    let speed =
        |t: f64| -> f64 { geo.eval(edge_point(edge, t)).map(|g| edge_speed(edge, &g)).unwrap_or(f64::NAN) };
    let data = |t: f64| -> f64 {
        let Ok(g) = geo.eval(edge_point(edge, t)) else { return f64::NAN };
        let n = crate::fem::scaled_normal(edge, &g);
        let len = n[0].hypot(n[1]);
        (prob.traction)(g.x, [n[0] / len, n[1] / len])[row]
    };
    let sol = weighted_l2_projection(kv, |t| 1.0 / speed(t), data, rule)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateGeometry { det: f64::NAN, z1: 0.0, z2: 0.0 });
    }
    Ok(sol.into_iter().map(|v| v * nh).collect())
}

pub fn build_dofmap(spaces: &WeakSpaces, prob: &Problem, rule: &GaussRule) -> Result<DofMap> {
    let dom = prob.domain;
    let np = dom.patches.len();
    let ls = spaces.stress_dim();
    let lq = spaces.mult_dim();
    let mut us = SignedUnion::new(np * ls);
    let mut uq = SignedUnion::new(np * lq);
    for it in &dom.interfaces {
        let (ca, cb) = (normal_comp(it.edge_a), normal_comp(it.edge_b));
        let ia = spaces.derham.flux[ca].edge_indices(it.edge_a);
        let mut ib = spaces.derham.flux[cb].edge_indices(it.edge_b);
        if ia.len() != ib.len() {
            return Err(Error::Conformity("interface trace spaces differ in dimension".into()));
        }
        if it.reversed {
            ib.reverse();
        }
        let s = -edge_sign(it.edge_a) * edge_sign(it.edge_b);
        for row in 0..2 {
            let (oa, ob) = (spaces.stress_offset(row, ca), spaces.stress_offset(row, cb));
            for (&a, &b) in ia.iter().zip(&ib) {
                us.union(it.patch_a * ls + oa + a, it.patch_b * ls + ob + b, s)?;
            }
        }
        let qa = spaces.mult.edge_indices(it.edge_a);
        let mut qb = spaces.mult.edge_indices(it.edge_b);
        if it.reversed {
            qb.reverse();
        }
        for (&a, &b) in qa.iter().zip(&qb) {
            uq.union(it.patch_a * lq + a, it.patch_b * lq + b, 1.0)?;
        }
    }
    // Prescribed values per class representative.
    let mut fixed: std::collections::BTreeMap<usize, f64> = Default::default();
    for (patch, edge) in prob.edges(EdgeKind::Traction)? {
        let c = normal_comp(edge);
        let idx = spaces.derham.flux[c].edge_indices(edge);
        for row in 0..2 {
            let vals = traction_coefficients(spaces, prob, patch, edge, row, rule)?;
            let off = spaces.stress_offset(row, c);
            for (&i, &v) in idx.iter().zip(&vals) {
                let (r, s) = us.find(patch * ls + off + i);
                let rv = s * v;
                if let Some(old) = fixed.insert(r, rv) {
                    if (old - rv).abs() > 1e-12 * (1.0 + rv.abs()) {
                        return Err(Error::Boundary("conflicting traction data".into()));
                    }
                }
            }
        }
    }
    let mut class = vec![usize::MAX; np * ls];
    let mut n_sigma = 0;
    let mut sigma = vec![Vec::with_capacity(ls); np];
    for g in 0..np * ls {
        let (r, s) = us.find(g);
        let t = if let Some(&v) = fixed.get(&r) {
            Target::Fixed(s * v)
        } else {
            if class[r] == usize::MAX {
                class[r] = n_sigma;
                n_sigma += 1;
            }
            Target::Free(class[r], s)
        };
        sigma[g / ls].push(t);
    }
    let ld = spaces.disp_dim();
    let disp_offset: Vec<usize> = (0..np).map(|p| p * ld).collect();
    let n_disp = np * ld;
    let mut qclass = vec![usize::MAX; np * lq];
    let mut n_mult = 0;
    let mut mult = vec![Vec::with_capacity(lq); np];
    for g in 0..np * lq {
        let (r, s) = uq.find(g);
        if qclass[r] == usize::MAX {
            qclass[r] = n_mult;
            n_mult += 1;
        }
        mult[g / lq].push(Target::Free(n_sigma + n_disp + qclass[r], s));
    }
    Ok(DofMap { sigma, disp_offset, mult, n_sigma, n_disp, n_mult, n_fixed: fixed.len() })
}

/// Local element contributions before scattering: matrix in the element DOF order
/// (stress, displacement, multiplier) and load vector.
struct ElementBlock {
    targets: Vec<Target>,
    mat: Vec<f64>,
    rhs: Vec<f64>,
}

fn element_block(
    spaces: &WeakSpaces,
    prob: &Problem,
    dofs: &DofMap,
    patch: usize,
    eq: &ElementQuad,
) -> ElementBlock {
    let d = &spaces.derham;
    let fb = [LocalBasis::new(&d.flux[0], eq), LocalBasis::new(&d.flux[1], eq)];
    let ub = LocalBasis::new(&d.l2, eq);
    let qb = LocalBasis::new(&spaces.mult, eq);
    let mut targets = Vec::new();
    // (row, comp, local fn) for each stress unknown
    let mut sdesc = Vec::new();
    for row in 0..2 {
        for c in 0..2 {
            let off = spaces.stress_offset(row, c);
            for (k, &i) in fb[c].idx.iter().enumerate() {
                targets.push(dofs.sigma[patch][off + i]);
                sdesc.push((row, c, k));
            }
        }
    }
    let ns = sdesc.len();
    let nu1 = ub.len();
    for row in 0..2 {
        for &i in &ub.idx {
            targets.push(dofs.disp(patch, row * d.l2.dim() + i));
        }
    }
    for &i in &qb.idx {
        targets.push(dofs.mult[patch][i]);
    }
    let nl = targets.len();
    let mut mat = vec![0.0; nl * nl];
    let mut rhs = vec![0.0; nl];
    let alpha = prob.material.trace_factor();
    let c2m = 0.5 / prob.material.mu;
    let (u0, q0) = (ns, ns + 2 * nu1);
    for (q, qp) in eq.points.iter().enumerate() {
        let g = &qp.geo;
        let j = g.jac;
        let jtj = [
            [j[0][0] * j[0][0] + j[1][0] * j[1][0], j[0][0] * j[0][1] + j[1][0] * j[1][1]],
            [j[0][1] * j[0][0] + j[1][1] * j[1][0], j[0][1] * j[0][1] + j[1][1] * j[1][1]],
        ];
        let wd = qp.w / g.det;
        let svals: Vec<f64> = sdesc.iter().map(|&(_, c, k)| fb[c].val[k][q]).collect();
        for a in 0..ns {
            let (ra, ca, _) = sdesc[a];
            let ba = svals[a];
            if ba == 0.0 {
                continue;
            }
            let ta = j[ra][ca];
            for b in a..ns {
                let (rb, cb, _) = sdesc[b];
                let bb = svals[b];
                let mut v = -alpha * ta * j[rb][cb];
                if ra == rb {
                    v += jtj[ca][cb];
                }
                let v = c2m * wd * ba * bb * v;
                mat[a * nl + b] += v;
                if a != b {
                    mat[b * nl + a] += v;
                }
            }
        }
        // divergence and skew couplings
        for a in 0..ns {
            let (ra, ca, ka) = sdesc[a];
            let db = fb[ca].grad[ka][q][ca];
            for (k, uv) in ub.val.iter().enumerate() {
                let v = wd * db * uv[q];
                let iu = u0 + ra * nu1 + k;
                mat[iu * nl + a] += v;
                mat[a * nl + iu] += v;
            }
            let b = svals[a];
            let coef = if ra == 1 { j[0][ca] } else { -j[1][ca] };
            for (k, qv) in qb.val.iter().enumerate() {
                let v = qp.w * qv[q] * b * coef;
                let iq = q0 + k;
                mat[iq * nl + a] += v;
                mat[a * nl + iq] += v;
            }
        }
        let f = (prob.load)(g.x);
        for row in 0..2 {
            for (k, uv) in ub.val.iter().enumerate() {
                rhs[u0 + row * nu1 + k] += qp.w * f[row] * uv[q];
            }
        }
    }
    ElementBlock { targets, mat, rhs }
}

fn scatter(block: &ElementBlock, out: &mut Vec<(usize, usize, f64)>, rhs: &mut Vec<(usize, f64)>) {
    let nl = block.targets.len();
    for a in 0..nl {
        let Target::Free(ga, sa) = block.targets[a] else { continue };
        let mut r = sa * block.rhs[a];
        for b in 0..nl {
            let v = block.mat[a * nl + b];
            if v == 0.0 {
                continue;
            }
            match block.targets[b] {
                Target::Free(gb, sb) => out.push((ga, gb, sa * sb * v)),
                Target::Fixed(val) => r -= sa * v * val,
            }
        }
        if r != 0.0 {
            rhs.push((ga, r));
        }
    }
}

/// Assembled weak-symmetry system with its DOF bookkeeping.
pub struct WeakSystem {
    pub system: SparseSystem,
    pub dofs: DofMap,
}

pub fn assemble_weak(spaces: &WeakSpaces, prob: &Problem, quad: usize) -> Result<WeakSystem> {
    let dom = prob.domain;
    if prob.edges(EdgeKind::Dirichlet)?.is_empty() {
        return Err(Error::Boundary("the Dirichlet boundary must not be empty".into()));
    }
    let rule = GaussRule::new(quad);
    let dofs = build_dofmap(spaces, prob, &rule)?;
    let n = dofs.total();
    let mesh = ParametricMesh::uniform(spaces.n());
    let elems = mesh.elements();
    let mut trip = TripletBuffer::new(n, n);
    let mut rhs = vec![0.0; n];
    for patch in 0..dom.patches.len() {
        let geo = &dom.patches[patch];
        let parts: Vec<Result<ElementPart>> = elems
            .par_iter()
            .map(|&e| {
                let eq = ElementQuad::new(geo, e, &rule)?;
                let blk = element_block(spaces, prob, &dofs, patch, &eq);
                let mut t = Vec::new();
                let mut r = Vec::new();
                scatter(&blk, &mut t, &mut r);
                Ok((t, r))
            })
            .collect();
        for part in parts {
            let (t, r) = part?;
            trip.extend(t);
            for (i, v) in r {
                rhs[i] += v;
            }
        }
    }
    // Dirichlet data through the boundary term <τ n, u_D>.
    for (patch, edge) in prob.edges(EdgeKind::Dirichlet)? {
        let geo = &dom.patches[patch];
        let c = normal_comp(edge);
        let sp = &spaces.derham.flux[c];
        let kv = &sp.dirs[1 - c];
        let nh = edge_normal(edge)[c];
        let ni = if edge % 2 == 0 { 0 } else { sp.n(c) - 1 };
        let br = kv.breaks();
        for s in 0..br.len() - 1 {
            for (t, w) in rule.mapped(br[s], br[s + 1]) {
                let z = edge_point(edge, t);
                let g = geo.eval(z)?;
                let ud = (prob.displacement)(g.x);
                let (first, vals) = kv.eval(t)?;
                for (k, &b) in vals.iter().enumerate() {
                    let tj = first + k;
                    let local = if c == 0 { sp.index(ni, tj) } else { sp.index(tj, ni) };
                    for (row, &udr) in ud.iter().enumerate() {
                        let off = spaces.stress_offset(row, c);
                        if let Target::Free(gi, sg) = dofs.sigma[patch][off + local] {
                            rhs[gi] += sg * w * nh * b * udr;
                        }
                    }
                }
            }
        }
    }
    let blocks = vec![
        ("stress".to_string(), 0..dofs.n_sigma),
        ("displacement".to_string(), dofs.n_sigma..dofs.n_sigma + dofs.n_disp),
        ("multiplier".to_string(), dofs.n_sigma + dofs.n_disp..n),
    ];
    Ok(WeakSystem { system: SparseSystem { matrix: trip, rhs, blocks }, dofs })
}

#[derive(Clone, Debug)]
pub struct PatchCoeffs {
    /// Stress coefficients in the local layout of `WeakSpaces::stress_offset`.
    pub sigma: Vec<f64>,
    /// Displacement rows stacked.
    pub u: Vec<f64>,
    pub q: Vec<f64>,
}

/// Field values at one parametric point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointValues {
    pub x: Vec2,
    pub sigma: Mat2,
    pub div: Vec2,
    pub u: Vec2,
    /// Scalar multiplier; the multiplier field is Skew(q).
    pub q: f64,
}

#[derive(Clone, Debug)]
pub struct WeakSolution {
    pub spaces: WeakSpaces,
    pub domain: MultiPatch,
    pub coeffs: Vec<PatchCoeffs>,
    pub report: SolveReport,
    pub dofs: DofMap,
}

fn pick(t: Target, x: &[f64]) -> f64 {
    match t {
        Target::Free(g, s) => s * x[g],
        Target::Fixed(v) => v,
    }
}

impl WeakSolution {
    pub fn from_vector(spaces: &WeakSpaces, domain: &MultiPatch, dofs: &DofMap, report: SolveReport) -> Self {
        let x = &report.x;
        let coeffs = (0..domain.patches.len())
            .map(|p| PatchCoeffs {
                sigma: dofs.sigma[p].iter().map(|&t| pick(t, x)).collect(),
                u: (0..spaces.disp_dim()).map(|i| pick(dofs.disp(p, i), x)).collect(),
                q: dofs.mult[p].iter().map(|&t| pick(t, x)).collect(),
            })
            .collect();
        WeakSolution { spaces: spaces.clone(), domain: domain.clone(), coeffs, report, dofs: dofs.clone() }
    }

    pub fn eval(&self, patch: usize, z: Vec2) -> Result<PointValues> {
        let g = self.domain.patches[patch].eval(z)?;
        self.eval_at(patch, &QuadPoint { z, w: 0.0, geo: g })
    }

    pub fn eval_at(&self, patch: usize, qp: &QuadPoint) -> Result<PointValues> {
        let d = &self.spaces.derham;
        let c = &self.coeffs[patch];
        let g = &qp.geo;
        let mut sigma = [[0.0; 2]; 2];
        let mut div = [0.0; 2];
        for row in 0..2 {
            for comp in 0..2 {
                let off = self.spaces.stress_offset(row, comp);
                let sp = &d.flux[comp];
                let (v, gr) = sp.eval_field(&c.sigma[off..off + sp.dim()], qp.z);
                let (val, dv) = flux_basis(g, comp, v, gr[comp]);
                sigma[row][0] += val[0];
                sigma[row][1] += val[1];
                div[row] += dv;
            }
        }
        let nd = d.l2.dim();
        let u0 = d.l2.eval_field(&c.u[..nd], qp.z).0 / g.det;
        let u1 = d.l2.eval_field(&c.u[nd..], qp.z).0 / g.det;
        let q = self.spaces.mult.eval_field(&c.q, qp.z).0;
        Ok(PointValues { x: g.x, sigma, div, u: [u0, u1], q })
    }

    /// Multiplier field Skew(q) at a point.
    pub fn multiplier(&self, patch: usize, z: Vec2) -> Result<Mat2> {
        Ok(skew(self.eval(patch, z)?.q))
    }
}

/// Assemble and solve.
pub fn solve_weak(spaces: &WeakSpaces, prob: &Problem, quad: usize) -> Result<WeakSolution> {
    let sys = assemble_weak(spaces, prob, quad)?;
    let report = solve_direct(&sys.system)?;
    Ok(WeakSolution::from_vector(spaces, prob.domain, &sys.dofs, report))
}

/// Physical traction σ n at an edge point (unit outward normal).
pub fn edge_traction(sol: &WeakSolution, patch: usize, edge: usize, t: f64) -> Result<Vec2> {
    let z = edge_point(edge, t);
    let g = sol.domain.patches[patch].eval(z)?;
    let n = crate::fem::scaled_normal(edge, &g);
    let len = n[0].hypot(n[1]);
    let v = sol.eval(patch, z)?;
    Ok([
        (v.sigma[0][0] * n[0] + v.sigma[0][1] * n[1]) / len,
        (v.sigma[1][0] * n[0] + v.sigma[1][1] * n[1]) / len,
    ])
}

/// Largest |t_a + t_b| over `samples` points of every interface. Points falling on a
/// mesh breakpoint are moved a quarter spacing off it, since traces of discontinuous
/// spaces are two-valued there.
pub fn interface_jump(sol: &WeakSolution, samples: usize) -> Result<f64> {
    let mut m = 0.0f64;
    let n = sol.spaces.n() as f64;
    for it in &sol.domain.interfaces {
        for s in 0..samples {
            let mut t = (s as f64 + 0.5) / samples as f64;
            if ((t * n).round() - t * n).abs() < 1e-9 {
                t += 0.25 / samples as f64;
            }
            let tb = if it.reversed { 1.0 - t } else { t };
            let a = edge_traction(sol, it.patch_a, it.edge_a, t)?;
            let b = edge_traction(sol, it.patch_b, it.edge_b, tb)?;
            m = m.max((a[0] + b[0]).hypot(a[1] + b[1]));
        }
    }
    Ok(m)
}
