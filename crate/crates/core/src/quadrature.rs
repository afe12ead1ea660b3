//! Gauss-Legendre rules on the unit interval and composite rules that respect breakpoints.

use gauss_quad::legendre::GaussLegendre;
use std::num::NonZeroUsize;

#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `n`-point rule mapped to [0,1]; exact for degree 2n-1.
    pub fn new(n: usize) -> Self {
        let n = n.max(1);
        let rule = GaussLegendre::new(NonZeroUsize::new(n).unwrap());
        let mut pairs: Vec<(f64, f64)> =
            rule.as_node_weight_pairs().iter().map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        GaussRule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a,b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = b - a;
        self.nodes.iter().zip(self.weights.iter()).map(move |(&x, &w)| (a + h * x, h * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Composite rule on [a,b]: one copy of `rule` per piece of [a,b] cut at `breaks`.
pub fn composite(rule: &GaussRule, breaks: &[f64], a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if b <= a {
        return out;
    }
    let mut lo = a;
    for &t in breaks.iter().filter(|&&t| t > a && t < b) {
        out.extend(rule.mapped(lo, t));
        lo = t;
    }
    out.extend(rule.mapped(lo, b));
    out
}

pub fn composite_integral(
    rule: &GaussRule,
    breaks: &[f64],
    a: f64,
    b: f64,
    mut f: impl FnMut(f64) -> f64,
) -> f64 {
    composite(rule, breaks, a, b).into_iter().map(|(x, w)| w * f(x)).sum()
}
