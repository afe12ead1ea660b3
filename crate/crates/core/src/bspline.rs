//! Univariate and tensor-product B-spline spaces on open knot vectors.

use crate::error::{Error, Result};

/// Open (p-open) knot vector with uniform interior multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct KnotVector {
    degree: usize,
    regularity: i32,
    knots: Vec<f64>,
    breaks: Vec<f64>,
}

impl KnotVector {
    /// Open knot vector on `breakpoints` with every interior knot repeated `p - r` times.
    /// `r = -1` gives a discontinuous space.
    pub fn open(p: usize, breakpoints: &[f64], r: i32) -> Result<Self> {
        if r >= p as i32 {
            return Err(Error::InvalidKnots(format!("regularity {r} must be below degree {p}")));
        }
        if r < -1 {
            return Err(Error::InvalidKnots(format!("regularity {r} below -1")));
        }
        if breakpoints.len() < 2 {
            return Err(Error::InvalidKnots("need at least two breakpoints".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidKnots("breakpoints must be strictly increasing".into()));
        }
        let (a, b) = (breakpoints[0], *breakpoints.last().unwrap());
        if a != 0.0 || b != 1.0 {
            return Err(Error::InvalidKnots("breakpoints must span [0,1]".into()));
        }
        let m = (p as i32 - r) as usize;
        let mut knots = vec![0.0; p + 1];
        for &t in &breakpoints[1..breakpoints.len() - 1] {
            knots.extend(std::iter::repeat_n(t, m));
        }
        knots.extend(std::iter::repeat_n(1.0, p + 1));
        Ok(KnotVector { degree: p, regularity: r, knots, breaks: breakpoints.to_vec() })
    }

    /// Uniform mesh with `n_el` elements of size 1/n_el.
    pub fn uniform(p: usize, n_el: usize, r: i32) -> Result<Self> {
        Self::open(p, &uniform_breaks(n_el), r)
    }

    /// Arbitrary p-open knot sequence; regularity is p minus the largest interior multiplicity.
    pub fn from_knots(p: usize, knots: &[f64]) -> Result<Self> {
        let len = knots.len();
        if len < 2 * (p + 1) {
            return Err(Error::InvalidKnots("too few knots".into()));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidKnots("knots must be nondecreasing".into()));
        }
        if knots[..=p].iter().any(|&t| t != 0.0) || knots[len - p - 1..].iter().any(|&t| t != 1.0) {
            return Err(Error::InvalidKnots("knot vector is not p-open on [0,1]".into()));
        }
        let mut breaks = vec![0.0];
        let mut max_mult = 0usize;
        let interior = &knots[p + 1..len - p - 1];
        let mut i = 0;
        while i < interior.len() {
            let t = interior[i];
            let mut m = 0;
            while i < interior.len() && interior[i] == t {
                m += 1;
                i += 1;
            }
            if m > p + 1 {
                return Err(Error::InvalidKnots(format!("multiplicity {m} exceeds p+1")));
            }
            max_mult = max_mult.max(m);
            breaks.push(t);
        }
        breaks.push(1.0);
        let regularity = if max_mult == 0 { p as i32 - 1 } else { p as i32 - max_mult as i32 };
        Ok(KnotVector { degree: p, regularity, knots: knots.to_vec(), breaks })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn regularity(&self) -> i32 {
        self.regularity
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Distinct knots (mesh breakpoints), including 0 and 1.
    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn num_elements(&self) -> usize {
        self.breaks.len() - 1
    }

    /// Number of basis functions.
    pub fn dim(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Knot span index `mu` with knots[mu] <= z < knots[mu+1]; z = 1 maps to the last span.
    pub fn find_span(&self, z: f64) -> usize {
        let n = self.dim();
        let p = self.degree;
        let u = &self.knots;
        if z >= u[n] {
            return n - 1;
        }
        if z <= u[p] {
            return p;
        }
        let (mut lo, mut hi) = (p, n);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if z < u[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// Element index containing z (right-continuous, last element for z = 1).
    pub fn element_of(&self, z: f64) -> usize {
        let b = &self.breaks;
        match b.binary_search_by(|t| t.partial_cmp(&z).unwrap()) {
            Ok(i) => i.min(b.len() - 2),
            Err(i) => i.saturating_sub(1).min(b.len() - 2),
        }
    }

    /// Values of the p+1 active basis functions at z with the index of the first.
    pub fn eval(&self, z: f64) -> Result<(usize, Vec<f64>)> {
        check_unit(z)?;
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: f64) -> (usize, Vec<f64>) {
        let z = z.clamp(0.0, 1.0);
        let mu = self.find_span(z);
        (mu - self.degree, self.basis_funs(mu, z))
    }

    fn basis_funs(&self, mu: usize, z: f64) -> Vec<f64> {
        let p = self.degree;
        let u = &self.knots;
        let mut n = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        n[0] = 1.0;
        for j in 1..=p {
            left[j] = z - u[mu + 1 - j];
            right[j] = u[mu + j] - z;
            let mut saved = 0.0;
            for r in 0..j {
                let den = right[r + 1] + left[j - r];
                let temp = if den == 0.0 { 0.0 } else { n[r] / den };
                n[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            n[j] = saved;
        }
        n
    }

    /// Derivatives of order 0..=order of the active basis functions: `ders[k][j]`.
    /// Orders above p come back as zeros.
    pub fn eval_derivs(&self, z: f64, order: usize) -> Result<(usize, Vec<Vec<f64>>)> {
        check_unit(z)?;
        Ok(self.eval_derivs_unchecked(z, order))
    }

    pub(crate) fn eval_derivs_unchecked(&self, z: f64, order: usize) -> (usize, Vec<Vec<f64>>) {
        let z = z.clamp(0.0, 1.0);
        let p = self.degree;
        let u = &self.knots;
        let mu = self.find_span(z);
        let mut out = vec![vec![0.0; p + 1]; order + 1];
        // ndu: basis values in the upper triangle, knot differences below the diagonal.
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = z - u[mu + 1 - j];
            right[j] = u[mu + j] - z;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = if ndu[j][r] == 0.0 { 0.0 } else { ndu[r][j - 1] / ndu[j][r] };
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        for j in 0..=p {
            out[0][j] = ndu[j][p];
        }
        let top = order.min(p);
        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=top {
                let mut d = 0.0;
                let rk = r as i64 - k as i64;
                let pk = p - k;
                if r >= k {
                    let den = ndu[pk + 1][rk as usize];
                    a[s2][0] = if den == 0.0 { 0.0 } else { a[s1][0] / den };
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if (r as i64 - 1) <= pk as i64 { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as i64) as usize;
                    let den = ndu[pk + 1][idx];
                    a[s2][j] = if den == 0.0 { 0.0 } else { (a[s1][j] - a[s1][j - 1]) / den };
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r <= pk {
                    let den = ndu[pk + 1][r];
                    a[s2][k] = if den == 0.0 { 0.0 } else { -a[s1][k - 1] / den };
                    d += a[s2][k] * ndu[r][pk];
                }
                out[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut fac = p as f64;
        for k in 1..=top {
            for v in out[k].iter_mut() {
                *v *= fac;
            }
            fac *= (p - k) as f64;
        }
        (mu - p, out)
    }

    /// Greville abscissae.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        if p == 0 {
            return (0..self.dim()).map(|i| 0.5 * (self.knots[i] + self.knots[i + 1])).collect();
        }
        (0..self.dim()).map(|i| self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64).collect()
    }

    /// Support [knots[i], knots[i+p+1]] of basis function i.
    pub fn support(&self, i: usize) -> (f64, f64) {
        (self.knots[i], self.knots[i + self.degree + 1])
    }

    /// Space of degree p+delta_p and regularity r+delta_r on the same breakpoints.
    pub fn shifted(&self, delta_p: i32, delta_r: i32) -> Result<Self> {
        let p = self.degree as i32 + delta_p;
        let r = self.regularity + delta_r;
        if p < 0 {
            return Err(Error::InvalidSpace(format!("negative degree {p}")));
        }
        if r > p - 1 || r < -1 {
            return Err(Error::InvalidSpace(format!("invalid pair (p={p}, r={r})")));
        }
        Self::open(p as usize, &self.breaks, r)
    }

    /// Space of antiderivatives: degree and regularity raised by one.
    pub fn antiderivative_space(&self) -> KnotVector {
        let mut knots = Vec::with_capacity(self.knots.len() + 2);
        knots.push(0.0);
        knots.extend_from_slice(&self.knots);
        knots.push(1.0);
        KnotVector {
            degree: self.degree + 1,
            regularity: self.regularity + 1,
            knots,
            breaks: self.breaks.clone(),
        }
    }

    /// Space of derivatives: degree and regularity lowered by one.
    pub fn derivative_space(&self) -> Result<KnotVector> {
        if self.degree == 0 {
            return Err(Error::InvalidSpace("cannot differentiate degree 0".into()));
        }
        let len = self.knots.len();
        Ok(KnotVector {
            degree: self.degree - 1,
            regularity: self.regularity - 1,
            knots: self.knots[1..len - 1].to_vec(),
            breaks: self.breaks.clone(),
        })
    }

    /// Coefficients of z -> int_0^z s in `antiderivative_space` for s = sum c_i B_i.
    pub fn antiderivative_coeffs(&self, c: &[f64]) -> Vec<f64> {
        let p = self.degree;
        let mut d = Vec::with_capacity(c.len() + 1);
        let mut acc = 0.0;
        d.push(0.0);
        for (i, &ci) in c.iter().enumerate() {
            acc += ci * (self.knots[i + p + 1] - self.knots[i]) / (p + 1) as f64;
            d.push(acc);
        }
        d
    }

    /// Coefficients of s' in `derivative_space` for s = sum c_i B_i.
    pub fn derivative_coeffs(&self, c: &[f64]) -> Vec<f64> {
        let p = self.degree;
        if p == 0 {
            return Vec::new();
        }
        (0..c.len() - 1)
            .map(|i| {
                let den = self.knots[i + p + 1] - self.knots[i + 1];
                if den == 0.0 {
                    0.0
                } else {
                    p as f64 * (c[i + 1] - c[i]) / den
                }
            })
            .collect()
    }

    /// int_0^z B_i for every basis function: (first index with a partial value, partial values),
    /// all indices below the window integrate to their full mass and all above to zero.
    pub fn integrals_to(&self, z: f64) -> (usize, Vec<f64>) {
        let z = z.clamp(0.0, 1.0);
        let up = self.antiderivative_space();
        let (first, vals) = up.eval_unchecked(z);
        // int_0^z B_{i,p} = (knots_i+p+1 - knots_i)/(p+1) * sum_{j>i} B_{j,p+1}(z)
        // Indices in [first, first+p] are partial; indices below first are full.
        let p1 = up.degree();
        let start = first;
        let mut out = Vec::with_capacity(p1 + 1);
        for i in start..(first + p1).min(self.dim()) {
            let mass = (self.knots[i + self.degree + 1] - self.knots[i]) / (self.degree + 1) as f64;
            let mut tail = 0.0;
            for (k, &v) in vals.iter().enumerate() {
                if first + k > i {
                    tail += v;
                }
            }
            out.push(mass * tail);
        }
        (start, out)
    }

    /// Full mass int_0^1 B_i.
    pub fn mass(&self, i: usize) -> f64 {
        (self.knots[i + self.degree + 1] - self.knots[i]) / (self.degree + 1) as f64
    }

    /// Indices of basis functions that are nonzero at z = 0 and z = 1 respectively.
    pub fn boundary_index(&self, side: usize) -> usize {
        if side == 0 {
            0
        } else {
            self.dim() - 1
        }
    }
}

fn check_unit(z: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&z) || z.is_nan() {
        return Err(Error::OutOfDomain(z));
    }
    Ok(())
}

pub fn uniform_breaks(n_el: usize) -> Vec<f64> {
    (0..=n_el).map(|i| i as f64 / n_el as f64).collect()
}

/// Univariate spline function.
#[derive(Clone, Debug)]
pub struct Spline1D {
    pub kv: KnotVector,
    pub coeffs: Vec<f64>,
}

impl Spline1D {
    pub fn new(kv: KnotVector, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != kv.dim() {
            return Err(Error::InvalidSpace(format!(
                "expected {} coefficients, got {}",
                kv.dim(),
                coeffs.len()
            )));
        }
        Ok(Spline1D { kv, coeffs })
    }

    pub fn eval(&self, z: f64) -> f64 {
        let (first, vals) = self.kv.eval_unchecked(z);
        vals.iter().enumerate().map(|(k, v)| v * self.coeffs[first + k]).sum()
    }

    pub fn eval_deriv(&self, z: f64, order: usize) -> f64 {
        let (first, d) = self.kv.eval_derivs_unchecked(z, order);
        d[order].iter().enumerate().map(|(k, v)| v * self.coeffs[first + k]).sum()
    }

    pub fn derivative(&self) -> Result<Spline1D> {
        Ok(Spline1D { kv: self.kv.derivative_space()?, coeffs: self.kv.derivative_coeffs(&self.coeffs) })
    }

    pub fn antiderivative(&self) -> Spline1D {
        Spline1D { kv: self.kv.antiderivative_space(), coeffs: self.kv.antiderivative_coeffs(&self.coeffs) }
    }
}

/// Tensor-product spline space on (0,1)^2; basis index = i + n1 * j.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorSpace {
    pub dirs: [KnotVector; 2],
}

impl TensorSpace {
    pub fn new(d1: KnotVector, d2: KnotVector) -> Self {
        TensorSpace { dirs: [d1, d2] }
    }

    /// S^{r1,r2}_{p1,p2} on a uniform n1 x n2 mesh.
    pub fn uniform(p: [usize; 2], r: [i32; 2], n_el: [usize; 2]) -> Result<Self> {
        Ok(TensorSpace {
            dirs: [KnotVector::uniform(p[0], n_el[0], r[0])?, KnotVector::uniform(p[1], n_el[1], r[1])?],
        })
    }

    pub fn dim(&self) -> usize {
        self.dirs[0].dim() * self.dirs[1].dim()
    }

    pub fn n(&self, d: usize) -> usize {
        self.dirs[d].dim()
    }

    pub fn degree(&self) -> [usize; 2] {
        [self.dirs[0].degree(), self.dirs[1].degree()]
    }

    pub fn regularity(&self) -> [i32; 2] {
        [self.dirs[0].regularity(), self.dirs[1].regularity()]
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.dirs[0].dim() * j
    }

    pub fn split(&self, idx: usize) -> (usize, usize) {
        let n1 = self.dirs[0].dim();
        (idx % n1, idx / n1)
    }

    /// Space with per-direction degree and regularity shifts on the same breakpoints.
    pub fn derived(&self, dp: [i32; 2], dr: [i32; 2]) -> Result<Self> {
        Ok(TensorSpace { dirs: [self.dirs[0].shifted(dp[0], dr[0])?, self.dirs[1].shifted(dp[1], dr[1])?] })
    }

    /// Evaluate sum c_idx B_idx and its gradient at z.
    pub fn eval_field(&self, c: &[f64], z: [f64; 2]) -> (f64, [f64; 2]) {
        let (f1, d1) = self.dirs[0].eval_derivs_unchecked(z[0], 1);
        let (f2, d2) = self.dirs[1].eval_derivs_unchecked(z[1], 1);
        let (mut v, mut g0, mut g1) = (0.0, 0.0, 0.0);
        for (b, _) in d2[0].iter().enumerate() {
            for (a, _) in d1[0].iter().enumerate() {
                let ci = c[self.index(f1 + a, f2 + b)];
                v += ci * d1[0][a] * d2[0][b];
                g0 += ci * d1[1][a] * d2[0][b];
                g1 += ci * d1[0][a] * d2[1][b];
            }
        }
        (v, [g0, g1])
    }

    /// Basis indices of functions whose trace on the given edge is nonzero.
    /// Edges: 0 -> z1=0, 1 -> z1=1, 2 -> z2=0, 3 -> z2=1.
    pub fn edge_indices(&self, edge: usize) -> Vec<usize> {
        let (n1, n2) = (self.n(0), self.n(1));
        match edge {
            0 => (0..n2).map(|j| self.index(0, j)).collect(),
            1 => (0..n2).map(|j| self.index(n1 - 1, j)).collect(),
            2 => (0..n1).map(|i| self.index(i, 0)).collect(),
            _ => (0..n1).map(|i| self.index(i, n2 - 1)).collect(),
        }
    }
}

/// Parametric mesh of (0,1)^2 given by per-direction breakpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct ParametricMesh {
    pub breaks: [Vec<f64>; 2],
}

impl ParametricMesh {
    pub fn uniform(n: usize) -> Self {
        ParametricMesh { breaks: [uniform_breaks(n), uniform_breaks(n)] }
    }

    pub fn num_elements(&self) -> usize {
        (self.breaks[0].len() - 1) * (self.breaks[1].len() - 1)
    }

    /// Element boxes in row-major order over z1 fastest.
    pub fn elements(&self) -> Vec<[[f64; 2]; 2]> {
        let mut out = Vec::with_capacity(self.num_elements());
        for w in self.breaks[1].windows(2) {
            for v in self.breaks[0].windows(2) {
                out.push([[v[0], v[1]], [w[0], w[1]]]);
            }
        }
        out
    }

    /// Largest element diameter.
    pub fn h(&self) -> f64 {
        let m = |b: &Vec<f64>| b.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        m(&self.breaks[0]).hypot(m(&self.breaks[1]))
    }
}
