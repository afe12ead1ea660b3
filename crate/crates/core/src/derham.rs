//! Planar de Rham pullbacks and the compatible spline spaces built on them.

use crate::bspline::TensorSpace;
use crate::error::{Error, Result};
use crate::geometry::{GeoDerivs, GeoPoint};
use crate::linalg::{inv2, matvec, transpose, Mat2, Vec2};

/// Pullbacks: Y1 q = q∘F, Y2 v = J^T (v∘F), Y3 v = det J J^{-1} (v∘F), Y4 q = det J (q∘F).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pullback {
    Y1,
    Y2,
    Y3,
    Y4,
}

impl Pullback {
    pub fn is_scalar(self) -> bool {
        matches!(self, Pullback::Y1 | Pullback::Y4)
    }

    /// Parametric scalar from a physical value at the same point.
    pub fn scalar(self, g: &GeoPoint, q: f64) -> Result<f64> {
        match self {
            Pullback::Y1 => Ok(q),
            Pullback::Y4 => Ok(g.det * q),
            _ => Err(Error::Unsupported(format!("{self:?} acts on vector fields"))),
        }
    }

    pub fn scalar_inverse(self, g: &GeoPoint, q: f64) -> Result<f64> {
        match self {
            Pullback::Y1 => Ok(q),
            Pullback::Y4 => Ok(q / g.det),
            _ => Err(Error::Unsupported(format!("{self:?} acts on vector fields"))),
        }
    }

    pub fn vector(self, g: &GeoPoint, v: Vec2) -> Result<Vec2> {
        match self {
            Pullback::Y2 => Ok(matvec(&transpose(&g.jac), &v)),
            Pullback::Y3 => Ok(matvec(&g.adj, &v)),
            _ => Err(Error::Unsupported(format!("{self:?} acts on scalar fields"))),
        }
    }

    pub fn vector_inverse(self, g: &GeoPoint, v: Vec2) -> Result<Vec2> {
        match self {
            Pullback::Y2 => Ok(matvec(&transpose(&inv2(&g.jac)), &v)),
            Pullback::Y3 => {
                let w = matvec(&g.jac, &v);
                Ok([w[0] / g.det, w[1] / g.det])
            }
            _ => Err(Error::Unsupported(format!("{self:?} acts on scalar fields"))),
        }
    }
}

/// Sufficiently smooth physical test fields for the commuting-diagram checks.
pub trait PhysicalVectorField {
    /// Value and Jacobian `d[i][j] = d_j v_i` at a physical point.
    fn eval(&self, x: Vec2) -> (Vec2, Mat2);
}

pub trait PhysicalScalarField {
    fn eval(&self, x: Vec2) -> (f64, Vec2);
}

/// |div^(Y3 v) - Y4(div v)| at a parametric point, with the parametric divergence of Y3 v
/// expanded exactly through second derivatives of F.
pub fn div_commuting_residual(d: &GeoDerivs, v: &dyn PhysicalVectorField) -> f64 {
    let (val, dv) = v.eval(d.x);
    let j = d.d1;
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let adj = crate::geometry::adjugate(&j);
    // d_i adj(J)[i][m], summed over i
    let dj = |n: usize, a: usize, b: usize| d.d2[n][a][b];
    let dadj = |i: usize| -> Mat2 { [[dj(1, 1, i), -dj(0, 1, i)], [-dj(1, 0, i), dj(0, 0, i)]] };
    let mut lhs = 0.0;
    for i in 0..2 {
        let da = dadj(i);
        for m in 0..2 {
            // d_i (v_m∘F) = sum_k dv[m][k] J[k][i]
            let dvm = dv[m][0] * j[0][i] + dv[m][1] * j[1][i];
            lhs += da[i][m] * val[m] + adj[i][m] * dvm;
        }
    }
    let rhs = det * (dv[0][0] + dv[1][1]);
    (lhs - rhs).abs()
}

/// |curl^(Y1 φ) - Y3(curl φ)| with curl φ = (d2 φ, -d1 φ).
pub fn curl_commuting_residual(d: &GeoDerivs, phi: &dyn PhysicalScalarField) -> f64 {
    let (_, g) = phi.eval(d.x);
    let j = d.d1;
    let d1 = g[0] * j[0][0] + g[1] * j[1][0];
    let d2 = g[0] * j[0][1] + g[1] * j[1][1];
    let lhs = [d2, -d1];
    let adj = crate::geometry::adjugate(&j);
    let rhs = matvec(&adj, &[g[1], -g[0]]);
    (lhs[0] - rhs[0]).abs().max((lhs[1] - rhs[1]).abs())
}

/// V1 = S^{r,r}_{p,p}, V2 = S^{r,r-1}_{p,p-1} x S^{r-1,r}_{p-1,p}, V3 = S^{r-1,r-1}_{p-1,p-1}
/// on a uniform n x n mesh, all as parametric spaces.
#[derive(Clone, Debug)]
pub struct DeRhamSpaces {
    pub p: usize,
    pub r: i32,
    pub n: usize,
    pub h1: TensorSpace,
    pub flux: [TensorSpace; 2],
    pub l2: TensorSpace,
}

impl DeRhamSpaces {
    pub fn new(p: usize, r: i32, n: usize) -> Result<Self> {
        if p < 1 || r < 0 || r >= p as i32 {
            return Err(Error::InvalidSpace(format!("need p > r >= 0, got p={p}, r={r}")));
        }
        let h1 = TensorSpace::uniform([p, p], [r, r], [n, n])?;
        let flux = [h1.derived([0, -1], [0, -1])?, h1.derived([-1, 0], [-1, 0])?];
        let l2 = h1.derived([-1, -1], [-1, -1])?;
        Ok(DeRhamSpaces { p, r, n, h1, flux, l2 })
    }

    pub fn flux_dim(&self) -> usize {
        self.flux[0].dim() + self.flux[1].dim()
    }
}

/// Physical value and divergence of the V2 basis function of component `c` with
/// parametric value `b` and partial derivative `db_c` = d_c b.
#[inline]
pub fn flux_basis(g: &GeoPoint, c: usize, b: f64, db_c: f64) -> (Vec2, f64) {
    let s = b / g.det;
    ([g.jac[0][c] * s, g.jac[1][c] * s], db_c / g.det)
}

/// Weak-symmetry spaces: stress rows in V2, displacement in V3 x V3 and a scalar
/// multiplier in S^{r,r}_{p-1,p-1}; requires p >= 2 and r <= p-2.
#[derive(Clone, Debug)]
pub struct WeakSpaces {
    pub derham: DeRhamSpaces,
    pub mult: TensorSpace,
}

impl WeakSpaces {
    pub fn new(p: usize, r: i32, n: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidSpace(format!("weak symmetry needs p >= 2, got {p}")));
        }
        if r > p as i32 - 2 {
            return Err(Error::InvalidSpace(format!(
                "multiplier space S^{{r,r}}_{{p-1,p-1}} needs r <= p-2, got p={p}, r={r}"
            )));
        }
        if r != 0 && r != p as i32 - 2 {
            log::warn!("regularity r={r} is outside the tested regimes r=0 and r=p-2");
        }
        let derham = DeRhamSpaces::new(p, r, n)?;
        let mult = derham.h1.derived([-1, -1], [0, 0])?;
        Ok(WeakSpaces { derham, mult })
    }

    pub fn p(&self) -> usize {
        self.derham.p
    }

    pub fn n(&self) -> usize {
        self.derham.n
    }

    /// Local stress DOF layout per patch: blocks (row 0, comp 0), (row 0, comp 1),
    /// (row 1, comp 0), (row 1, comp 1).
    pub fn stress_offset(&self, row: usize, comp: usize) -> usize {
        let d0 = self.derham.flux[0].dim();
        let per_row = self.derham.flux_dim();
        row * per_row + if comp == 0 { 0 } else { d0 }
    }

    pub fn stress_dim(&self) -> usize {
        2 * self.derham.flux_dim()
    }

    pub fn disp_dim(&self) -> usize {
        2 * self.derham.l2.dim()
    }

    pub fn mult_dim(&self) -> usize {
        self.mult.dim()
    }
}

/// Skew(q) = [[0, -q], [q, 0]].
pub fn skew(q: f64) -> Mat2 {
    [[0.0, -q], [q, 0.0]]
}
