//! Spline quasi-interpolants built from local dual functionals, their integrated
//! variants of lower degree, tensor products of them, and weighted L² projections.

use crate::bspline::KnotVector;
use crate::error::{Error, Result};
use crate::linalg::Vec2;
use crate::quadrature::GaussRule;
use nalgebra::{DMatrix, DVector};
use std::collections::BTreeMap;

/// Nodes per subinterval for the inner integrals of the integrated projectors.
const INNER_NODES: usize = 12;

/// A linear functional written as a weighted sum of point values.
pub type PointFunctional = Vec<(f64, f64)>;

/// Linear projector onto a univariate spline space, stored as one point functional per
/// output coefficient over a shared point set.
#[derive(Clone, Debug)]
pub struct UniProjector {
    out: KnotVector,
    level: usize,
    points: Vec<f64>,
    /// rows[i] = (point index, weight)
    rows: Vec<Vec<(usize, f64)>>,
}

fn key(x: f64) -> u64 {
    x.to_bits()
}

/// Local L² fit on one span per basis function: for every i, the weights of v at the
/// span nodes that return the i-th coefficient of the best polynomial fit.
fn dual_functionals(kv: &KnotVector, m: usize) -> Vec<PointFunctional> {
    let p = kv.degree();
    let rule = GaussRule::new(m.max(p + 1));
    let breaks = kv.breaks();
    // Fit data per span, computed lazily.
    let mut cache: BTreeMap<usize, (usize, Vec<f64>, DMatrix<f64>)> = BTreeMap::new();
    let mut out = Vec::with_capacity(kv.dim());
    for i in 0..kv.dim() {
        let (a, b) = kv.support(i);
        let spans: Vec<usize> =
            (0..breaks.len() - 1).filter(|&s| breaks[s] >= a && breaks[s + 1] <= b).collect();
        let s = spans[spans.len() / 2];
        let entry = cache.entry(s).or_insert_with(|| {
            let nodes: Vec<(f64, f64)> = rule.mapped(breaks[s], breaks[s + 1]).collect();
            // Least-squares fit through the pseudo-inverse of the sqrt-weighted collocation
            // matrix; the normal equations would square its condition number.
            let mut first = 0;
            let mut bmat = DMatrix::zeros(nodes.len(), p + 1);
            for (q, &(t, w)) in nodes.iter().enumerate() {
                let (f, vals) = kv.eval_unchecked(t);
                first = f;
                for k in 0..=p {
                    bmat[(q, k)] = w.sqrt() * vals[k];
                }
            }
            let mut weights = bmat.pseudo_inverse(1e-300).expect("collocation matrix has full rank");
            for (q, &(_, w)) in nodes.iter().enumerate() {
                for k in 0..=p {
                    weights[(k, q)] *= w.sqrt();
                }
            }
            (first, nodes.iter().map(|n| n.0).collect(), weights)
        });
        let (first, nodes, w) = entry;
        let k = i - *first;
        out.push(nodes.iter().enumerate().map(|(q, &t)| (t, w[(k, q)])).collect());
    }
    out
}

/// Point functional for t -> int_0^t v (moment 0) or int_0^t (t - s) v(s) ds (moment 1).
fn integral_functional(breaks: &[f64], t: f64, moment: usize, rule: &GaussRule) -> PointFunctional {
    let mut out = Vec::new();
    let mut lo = 0.0;
    let push = |a: f64, b: f64, out: &mut PointFunctional| {
        for (s, w) in rule.mapped(a, b) {
            let f = if moment == 0 { 1.0 } else { t - s };
            out.push((s, w * f));
        }
    };
    for &bk in breaks.iter().skip(1) {
        if bk >= t {
            break;
        }
        push(lo, bk, &mut out);
        lo = bk;
    }
    if t > lo {
        push(lo, t, &mut out);
    }
    out
}

/// Coefficients of s' from coefficients of s, as a sparse row combination.
fn derivative_rows(kv: &KnotVector, rows: &[PointFunctional]) -> Vec<PointFunctional> {
    let p = kv.degree() as f64;
    let k = kv.knots();
    let pd = kv.degree();
    (0..rows.len() - 1)
        .map(|i| {
            let den = k[i + pd + 1] - k[i + 1];
            let s = p / den;
            let mut r: PointFunctional = rows[i + 1].iter().map(|&(x, w)| (x, s * w)).collect();
            r.extend(rows[i].iter().map(|&(x, w)| (x, -s * w)));
            r
        })
        .collect()
}

impl UniProjector {
    /// Projector of the given level built on the top space `kv` = S^r_p:
    /// level 0 maps into S^r_p, level 1 into S^{r-1}_{p-1} (d/dz ∘ Π ∘ int_0^z),
    /// level 2 into S^{r-2}_{p-2} (d²/dz² ∘ Π ∘ double integral).
    pub fn new(kv: &KnotVector, level: usize) -> Result<Self> {
        let p = kv.degree();
        let r = kv.regularity();
        let ok = match level {
            0 => true,
            1 => r >= 0 && p >= 1,
            2 => r >= 1 && p >= 2,
            _ => false,
        };
        if !ok {
            return Err(Error::InvalidSpace(format!("projector level {level} unavailable for p={p}, r={r}")));
        }
        let duals = dual_functionals(kv, p + 3);
        let inner = GaussRule::new(INNER_NODES);
        let mut rows: Vec<PointFunctional> = if level == 0 {
            duals
        } else {
            duals
                .iter()
                .map(|lam| {
                    let mut acc = Vec::new();
                    for &(t, w) in lam {
                        for (s, a) in integral_functional(kv.breaks(), t, level - 1, &inner) {
                            acc.push((s, w * a));
                        }
                    }
                    acc
                })
                .collect()
        };
        let mut space = kv.clone();
        for _ in 0..level {
            rows = derivative_rows(&space, &rows);
            space = space.derivative_space()?;
        }
        // Merge duplicate points into a shared index.
        let mut index: BTreeMap<u64, usize> = BTreeMap::new();
        let mut points = Vec::new();
        let rows = rows
            .into_iter()
            .map(|row| {
                let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
                for (x, w) in row {
                    let id = *index.entry(key(x)).or_insert_with(|| {
                        points.push(x);
                        points.len() - 1
                    });
                    *merged.entry(id).or_insert(0.0) += w;
                }
                merged.into_iter().collect()
            })
            .collect();
        Ok(UniProjector { out: space, level, points, rows })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn out_space(&self) -> &KnotVector {
        &self.out
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let vals: Vec<f64> = self.points.iter().map(|&x| f(x)).collect();
        self.apply_values(&vals)
    }

    /// Coefficients from function values at `points()`.
    pub fn apply_values(&self, vals: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|row| row.iter().map(|&(k, w)| w * vals[k]).sum()).collect()
    }
}

/// Tensor projector (Pa ⊗ Pb) f, coefficient index i + n_a j.
pub fn tensor_apply(pa: &UniProjector, pb: &UniProjector, f: impl Fn(Vec2) -> f64) -> Vec<f64> {
    let (xa, xb) = (pa.points(), pb.points());
    // Apply pa along the first direction for every point of the second.
    let partial: Vec<Vec<f64>> = xb
        .iter()
        .map(|&y| {
            let vals: Vec<f64> = xa.iter().map(|&x| f([x, y])).collect();
            pa.apply_values(&vals)
        })
        .collect();
    let na = pa.out_space().dim();
    let nb = pb.out_space().dim();
    let mut out = vec![0.0; na * nb];
    for i in 0..na {
        let col: Vec<f64> = partial.iter().map(|row| row[i]).collect();
        let c = pb.apply_values(&col);
        for j in 0..nb {
            out[i + na * j] = c[j];
        }
    }
    out
}

/// Projectors onto the symmetric stress space SYM(S^{r+1,r-1}_{p+1,p-1}, S^{r,r}_{p,p},
/// S^{r-1,r+1}_{p-1,p+1}) and the displacement space S^{r,r-1}_{p,p-1} x S^{r-1,r}_{p-1,p}
/// that commute with the parametric divergence.
#[derive(Clone, Debug)]
pub struct StrongProjector {
    lv: [UniProjector; 3],
}

impl StrongProjector {
    pub fn new(p: usize, r: i32, n: usize) -> Result<Self> {
        if !(r >= 1 && (p as i32) > r) {
            return Err(Error::InvalidSpace(format!("need p > r >= 1, got p={p}, r={r}")));
        }
        let top = KnotVector::uniform(p + 1, n, r + 1)?;
        Ok(StrongProjector {
            lv: [UniProjector::new(&top, 0)?, UniProjector::new(&top, 1)?, UniProjector::new(&top, 2)?],
        })
    }

    /// Coefficients of (S11, S12, S22) for a field given as (s11, s12, s22).
    pub fn project_stress(&self, s: impl Fn(Vec2) -> [f64; 3]) -> [Vec<f64>; 3] {
        let [l0, l1, l2] = &self.lv;
        [
            tensor_apply(l0, l2, |z| s(z)[0]),
            tensor_apply(l1, l1, |z| s(z)[1]),
            tensor_apply(l2, l0, |z| s(z)[2]),
        ]
    }

    pub fn project_disp(&self, v: impl Fn(Vec2) -> Vec2) -> [Vec<f64>; 2] {
        let [_, l1, l2] = &self.lv;
        [tensor_apply(l1, l2, |z| v(z)[0]), tensor_apply(l2, l1, |z| v(z)[1])]
    }

    pub fn level(&self, k: usize) -> &UniProjector {
        &self.lv[k]
    }
}

/// Weighted L² projection: find s = sum c_i B_i with int weight s B_j = int f B_j.
pub fn weighted_l2_projection(
    kv: &KnotVector,
    weight: impl Fn(f64) -> f64,
    f: impl Fn(f64) -> f64,
    rule: &GaussRule,
) -> Result<Vec<f64>> {
    let n = kv.dim();
    let mut gram = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    let br = kv.breaks();
    for s in 0..br.len() - 1 {
        for (t, w) in rule.mapped(br[s], br[s + 1]) {
            let (first, vals) = kv.eval_unchecked(t);
            let (wt, ft) = (weight(t), f(t));
            for (a, &va) in vals.iter().enumerate() {
                rhs[first + a] += w * ft * va;
                for (b, &vb) in vals.iter().enumerate() {
                    gram[(first + a, first + b)] += w * wt * va * vb;
                }
            }
        }
    }
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Singular("boundary Gram matrix not positive definite".into()))?;
    Ok(chol.solve(&rhs).iter().copied().collect())
}
