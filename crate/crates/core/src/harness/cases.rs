//! Built-in manufactured solutions and demo loads.

use super::jet::Jet;
use crate::error::{Error, Result};
use crate::geometry::{curved_square_spline, disk_five_patch, four_patch_square, GeometryMap, MultiPatch};
use crate::linalg::{Mat2, Vec2};
use crate::weaksym::Material;
use std::f64::consts::PI;
use std::sync::Arc;

pub type JetField = Arc<dyn Fn(Jet, Jet) -> [Jet; 2] + Send + Sync>;

/// u = lead + beta * rest, where `lead` is exactly divergence free. Splitting off the
/// divergence-free part keeps λ div u accurate for huge λ.
#[derive(Clone)]
pub struct ExactSolution {
    pub lead: Option<JetField>,
    pub rest: JetField,
    pub beta: f64,
}

/// Exact fields at one physical point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactValues {
    pub u: Vec2,
    pub grad_u: Mat2,
    pub sigma: Mat2,
    pub div_sigma: Vec2,
    /// Multiplier scalar q with Skew(q) the skew part of grad u.
    pub q: f64,
}

impl ExactSolution {
    fn jets(&self, x: Vec2) -> ([Jet; 2], [Jet; 2]) {
        let (jx, jy) = (Jet::var(x[0], 0), Jet::var(x[1], 1));
        let lead = match &self.lead {
            Some(f) => f(jx, jy),
            None => [Jet::constant(0.0); 2],
        };
        (lead, (self.rest)(jx, jy))
    }

    pub fn eval(&self, x: Vec2, m: &Material) -> ExactValues {
        let (a, b) = self.jets(x);
        let beta = self.beta;
        let u = [a[0].v + beta * b[0].v, a[1].v + beta * b[1].v];
        let mut grad = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                grad[i][j] = a[i].g[j] + beta * b[i].g[j];
            }
        }
        let div_rest = b[0].g[0] + b[1].g[1];
        let div = beta * div_rest;
        let e01 = 0.5 * (grad[0][1] + grad[1][0]);
        let sigma = [
            [m.lambda * div + 2.0 * m.mu * grad[0][0], 2.0 * m.mu * e01],
            [2.0 * m.mu * e01, m.lambda * div + 2.0 * m.mu * grad[1][1]],
        ];
        // grad(div u) from the Hessians of the non-solenoidal part only.
        let gdiv = [beta * (b[0].h[0][0] + b[1].h[1][0]), beta * (b[0].h[0][1] + b[1].h[1][1])];
        let lap = [a[0].laplacian() + beta * b[0].laplacian(), a[1].laplacian() + beta * b[1].laplacian()];
        let div_sigma =
            [(m.lambda + m.mu) * gdiv[0] + m.mu * lap[0], (m.lambda + m.mu) * gdiv[1] + m.mu * lap[1]];
        let q = -0.5 * (grad[0][1] - grad[1][0]);
        ExactValues { u, grad_u: grad, sigma, div_sigma, q }
    }
}

pub type VecFn = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;
pub type TracFn = Arc<dyn Fn(Vec2, Vec2) -> Vec2 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formulation {
    Weak,
    Strong,
}

impl std::str::FromStr for Formulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weak" => Ok(Formulation::Weak),
            "strong" => Ok(Formulation::Strong),
            _ => Err(Error::Parse(format!("unknown formulation `{s}`"))),
        }
    }
}

impl std::fmt::Display for Formulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Formulation::Weak => "weak",
            Formulation::Strong => "strong",
        })
    }
}

#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub domain: MultiPatch,
    pub material: Material,
    pub exact: Option<ExactSolution>,
    pub load: VecFn,
    pub displacement: VecFn,
    pub traction: TracFn,
    pub default_formulation: Formulation,
}

pub const CASE_NAMES: [&str; 9] = [
    "curved-square-dirichlet",
    "curved-square-mixed",
    "fourpatch-dirichlet",
    "quasi-incompressible-single",
    "quasi-incompressible-fourpatch",
    "disk-load",
    "square-top-load",
    "strongsym-identity",
    "strongsym-curved",
];

fn pi_sin(t: Jet, k: f64) -> Jet {
    (t * (k * PI)).sin()
}

/// u1 = sin(πx) sin(πy), u2 = -u1.
fn sin_sin() -> JetField {
    Arc::new(|x, y| {
        let s = pi_sin(x, 1.0) * pi_sin(y, 1.0);
        [s, -s]
    })
}

/// u1 = sin(πζ1) sin(πζ2) composed with the inverse of (ζ1, ζ1² + ζ2), u2 = -u1.
fn curved_sin_sin() -> JetField {
    Arc::new(|x, y| {
        let z2 = y - x * x;
        let s = pi_sin(x, 1.0) * pi_sin(z2, 1.0);
        [s, -s]
    })
}

fn incompressible_lead() -> JetField {
    Arc::new(|x, y| {
        let c2x = (x * (2.0 * PI)).cos();
        let c2y = (y * (2.0 * PI)).cos();
        [(c2x + -1.0) * pi_sin(y, 2.0), (-c2y + 1.0) * pi_sin(x, 2.0)]
    })
}

fn incompressible_rest() -> JetField {
    Arc::new(|x, y| {
        let s = pi_sin(x, 1.0) * pi_sin(y, 1.0);
        [s, s * 2.0]
    })
}

fn exact_case(
    name: &str,
    domain: MultiPatch,
    material: Material,
    exact: ExactSolution,
    formulation: Formulation,
) -> ManufacturedCase {
    let m = material;
    let e1 = exact.clone();
    let e2 = exact.clone();
    let e3 = exact.clone();
    ManufacturedCase {
        name: name.to_string(),
        domain,
        material,
        exact: Some(exact),
        load: Arc::new(move |x| e1.eval(x, &m).div_sigma),
        displacement: Arc::new(move |x| e2.eval(x, &m).u),
        traction: Arc::new(move |x, n| {
            let s = e3.eval(x, &m).sigma;
            [s[0][0] * n[0] + s[0][1] * n[1], s[1][0] * n[0] + s[1][1] * n[1]]
        }),
        default_formulation: formulation,
    }
}

/// Default Lamé parameters of a case.
pub fn default_material(name: &str) -> Result<(f64, f64)> {
    Ok(match name {
        "curved-square-dirichlet"
        | "curved-square-mixed"
        | "fourpatch-dirichlet"
        | "strongsym-identity"
        | "strongsym-curved" => (2.0, 1.0),
        "quasi-incompressible-single" | "quasi-incompressible-fourpatch" => (1e10, 1.0),
        "disk-load" => (100.0, 1.0),
        "square-top-load" => (10.0, 1.0),
        _ => return Err(Error::UnknownCase(name.to_string())),
    })
}

pub fn builtin_case(name: &str, lambda: Option<f64>, mu: Option<f64>) -> Result<ManufacturedCase> {
    let (l0, m0) = default_material(name)?;
    let material = Material::new(lambda.unwrap_or(l0), mu.unwrap_or(m0))?;
    let dir4 = ["dirichlet"; 4];
    let plain = |f: JetField| ExactSolution { lead: None, rest: f, beta: 1.0 };
    let incompressible = || ExactSolution {
        lead: Some(incompressible_lead()),
        rest: incompressible_rest(),
        beta: 1.0 / (1.0 + material.lambda),
    };
    use Formulation::*;
    Ok(match name {
        "curved-square-dirichlet" => exact_case(
            name,
            MultiPatch::single(GeometryMap::CurvedSquare, dir4),
            material,
            plain(curved_sin_sin()),
            Weak,
        ),
        "curved-square-mixed" => exact_case(
            name,
            MultiPatch::single(GeometryMap::CurvedSquare, ["dirichlet", "traction", "traction", "traction"]),
            material,
            plain(sin_sin()),
            Weak,
        ),
        "fourpatch-dirichlet" => {
            exact_case(name, four_patch_square("dirichlet"), material, plain(sin_sin()), Weak)
        }
        "quasi-incompressible-single" => exact_case(
            name,
            MultiPatch::single(curved_square_spline(), ["dirichlet", "traction", "traction", "traction"]),
            material,
            incompressible(),
            Weak,
        ),
        "quasi-incompressible-fourpatch" => {
            exact_case(name, four_patch_square("dirichlet"), material, incompressible(), Weak)
        }
        "strongsym-identity" => exact_case(
            name,
            MultiPatch::single(GeometryMap::Identity, dir4),
            material,
            plain(sin_sin()),
            Strong,
        ),
        "strongsym-curved" => exact_case(
            name,
            MultiPatch::single(GeometryMap::CurvedSquare, dir4),
            material,
            plain(curved_sin_sin()),
            Strong,
        ),
        "disk-load" => ManufacturedCase {
            name: name.to_string(),
            domain: disk_five_patch("traction", "dirichlet"),
            material,
            exact: None,
            load: Arc::new(|_| [0.0, 0.0]),
            displacement: Arc::new(|_| [0.0, 0.0]),
            traction: Arc::new(|x, _| {
                let (a, b) = (2.0 - x[0], 2.0 + x[0]);
                [0.0, -0.1 * a * a * b * b]
            }),
            default_formulation: Weak,
        },
        "square-top-load" => ManufacturedCase {
            name: name.to_string(),
            domain: MultiPatch::single(
                GeometryMap::Identity,
                ["dirichlet", "dirichlet", "dirichlet", "traction"],
            ),
            material,
            exact: None,
            load: Arc::new(|_| [0.0, 0.0]),
            displacement: Arc::new(|_| [0.0, 0.0]),
            traction: Arc::new(|_, _| [-1.0, 0.0]),
            default_formulation: Weak,
        },
        _ => return Err(Error::UnknownCase(name.to_string())),
    })
}
