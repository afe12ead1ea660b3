//! Convergence studies over uniform mesh ladders.

use super::cases::{builtin_case, Formulation, ManufacturedCase};
use super::errors::{compute_errors, eoc, ErrorNorms, FieldEvaluator};
use super::infsup::{infsup_probes, InfSupEstimate};
use super::output;
use crate::derham::WeakSpaces;
use crate::error::{Error, Result};
use crate::fem::QuadPoint;
use crate::geometry::GeometryMap;
use crate::linalg::Vec2;
use crate::strongsym::{solve_strong, StrongSolution, StrongSpaces};
use crate::weaksym::{interface_jump, solve_weak, PointValues, Problem, WeakSolution};
use serde::Serialize;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub case: String,
    /// Defaults to the formulation the case was built for.
    pub formulation: Option<Formulation>,
    pub p: usize,
    pub r: i32,
    pub levels: Vec<usize>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub out: Option<PathBuf>,
    pub vtk: bool,
    pub infsup: bool,
    /// Points per direction and patch of the VTK grid.
    pub vtk_resolution: usize,
}

impl StudyConfig {
    pub fn new(case: &str, p: usize, r: i32, levels: Vec<usize>) -> Self {
        StudyConfig {
            case: case.to_string(),
            formulation: None,
            p,
            r,
            levels,
            lambda: None,
            mu: None,
            out: None,
            vtk: false,
            infsup: false,
            vtk_resolution: 41,
        }
    }
}

/// One CSV row. Errors and orders are empty when the case has no exact solution or the
/// level is the coarsest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelRow {
    pub case: String,
    pub formulation: String,
    pub p: usize,
    pub r: i32,
    pub n: usize,
    pub h: f64,
    pub dof_sigma: usize,
    pub dof_u: usize,
    pub dof_p: usize,
    pub err_sigma_hdiv: Option<f64>,
    pub err_divsigma_l2: Option<f64>,
    pub err_u_l2: Option<f64>,
    pub err_p_l2: Option<f64>,
    pub eoc_sigma_hdiv: Option<f64>,
    pub eoc_divsigma_l2: Option<f64>,
    pub eoc_u_l2: Option<f64>,
    pub eoc_p_l2: Option<f64>,
    pub err_sigma_l2: Option<f64>,
    pub max_asymmetry: f64,
    pub residual: f64,
    /// Largest normal-stress jump across patch interfaces.
    pub interface_jump: Option<f64>,
}

/// Location of the largest stress magnitude on the evaluation grid of the finest level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StressPeak {
    pub patch: usize,
    pub x: Vec2,
    pub magnitude: f64,
    /// Distances to (-2,0), (2,0) and (0,2).
    pub distances: [f64; 3],
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyReport {
    pub case: String,
    pub formulation: String,
    pub p: usize,
    pub r: i32,
    pub lambda: f64,
    pub mu: f64,
    pub rows: Vec<LevelRow>,
    pub seconds: Vec<f64>,
    pub infsup: Option<Vec<InfSupEstimate>>,
    pub stress_peak: Option<StressPeak>,
}

/// A solved level of either formulation.
pub enum Solved {
    Weak(WeakSolution),
    Strong(StrongSolution),
}

impl Solved {
    pub fn evaluator(&self) -> &dyn FieldEvaluator {
        match self {
            Solved::Weak(s) => s,
            Solved::Strong(s) => s,
        }
    }

    pub fn eval(&self, patch: usize, z: Vec2) -> Result<PointValues> {
        let e = self.evaluator();
        let geo = e.domain().patches[patch].eval(z)?;
        e.eval_at(patch, &QuadPoint { z, w: 0.0, geo })
    }

    pub fn residual(&self) -> f64 {
        match self {
            Solved::Weak(s) => s.report.residual,
            Solved::Strong(s) => s.report.residual,
        }
    }
}

pub fn stress_magnitude(s: &crate::linalg::Mat2) -> f64 {
    (s[0][0] * s[0][0] + 2.0 * s[0][1] * s[0][1] + s[1][1] * s[1][1]).sqrt()
}

/// Solve one level; returns the solution and (dof_sigma, dof_u, dof_p).
pub fn solve_level(
    case: &ManufacturedCase,
    formulation: Formulation,
    p: usize,
    r: i32,
    n: usize,
) -> Result<(Solved, [usize; 3])> {
    let prob = Problem {
        domain: &case.domain,
        material: case.material,
        load: &*case.load,
        displacement: &*case.displacement,
        traction: &*case.traction,
    };
    match formulation {
        Formulation::Weak => {
            let sp = WeakSpaces::new(p, r, n)?;
            let sol = solve_weak(&sp, &prob, p + 1)?;
            let d = &sol.dofs;
            let dofs = [d.n_sigma, d.n_disp, d.n_mult];
            Ok((Solved::Weak(sol), dofs))
        }
        Formulation::Strong => {
            let sp = StrongSpaces::new(p, r, n)?;
            let sol = solve_strong(&sp, &prob, p + 2)?;
            let ns = sol.report.n - sp.disp_dim();
            Ok((Solved::Strong(sol), [ns, sp.disp_dim(), 0]))
        }
    }
}

/// Error quadrature per direction: over-integrate the highest stress degree by one.
pub fn error_quadrature(formulation: Formulation, p: usize) -> usize {
    match formulation {
        Formulation::Weak => p + 2,
        Formulation::Strong => p + 3,
    }
}

fn stress_peak(sol: &Solved, m: usize) -> Result<StressPeak> {
    let mut best: Option<StressPeak> = None;
    let dom = sol.evaluator().domain();
    for patch in 0..dom.patches.len() {
        for b in 0..m {
            for a in 0..m {
                let z = [a as f64 / (m - 1) as f64, b as f64 / (m - 1) as f64];
                let v = sol.eval(patch, z)?;
                let mag = stress_magnitude(&v.sigma);
                if best.is_none_or(|p| mag > p.magnitude) {
                    let d = |c: Vec2| (v.x[0] - c[0]).hypot(v.x[1] - c[1]);
                    best = Some(StressPeak {
                        patch,
                        x: v.x,
                        magnitude: mag,
                        distances: [d([-2.0, 0.0]), d([2.0, 0.0]), d([0.0, 2.0])],
                    });
                }
            }
        }
    }
    best.ok_or_else(|| Error::Unsupported("empty domain".into()))
}

fn opt_eoc(prev: Option<f64>, cur: Option<f64>, hp: f64, h: f64) -> Option<f64> {
    match (prev, cur) {
        (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some(eoc(a, b, hp, h)),
        _ => None,
    }
}

/// Run all levels, then write CSV, JSON and optionally VTK into `cfg.out`.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport> {
    if cfg.levels.is_empty() {
        return Err(Error::Parse("no mesh levels given".into()));
    }
    let case = builtin_case(&cfg.case, cfg.lambda, cfg.mu)?;
    let form = cfg.formulation.unwrap_or(case.default_formulation);
    let mut rows: Vec<LevelRow> = Vec::new();
    let mut seconds = Vec::new();
    let mut last: Option<Solved> = None;
    let mut prev_err: Option<(f64, ErrorNorms)> = None;
    for &n in &cfg.levels {
        let t = Instant::now();
        let (sol, dofs) = solve_level(&case, form, cfg.p, cfg.r, n)?;
        let h = 1.0 / n as f64;
        let err = match &case.exact {
            Some(ex) => {
                Some(compute_errors(sol.evaluator(), ex, &case.material, error_quadrature(form, cfg.p))?)
            }
            None => None,
        };
        let jump = match &sol {
            Solved::Weak(w) if !case.domain.interfaces.is_empty() => Some(interface_jump(w, 50)?),
            _ => None,
        };
        seconds.push(t.elapsed().as_secs_f64());
        log::info!("{} {} n={n} solved in {:.2}s", cfg.case, form, seconds.last().unwrap());
        let pick = |e: Option<ErrorNorms>, f: fn(&ErrorNorms) -> f64| e.as_ref().map(f);
        let with_p = form == Formulation::Weak;
        let cur_p = if with_p { pick(err, |e| e.p_l2) } else { None };
        let (hp, pe) = match prev_err {
            Some((hp, e)) => (hp, Some(e)),
            None => (h, None),
        };
        let prev_p = if with_p { pick(pe, |e| e.p_l2) } else { None };
        rows.push(LevelRow {
            case: cfg.case.clone(),
            formulation: form.to_string(),
            p: cfg.p,
            r: cfg.r,
            n,
            h,
            dof_sigma: dofs[0],
            dof_u: dofs[1],
            dof_p: dofs[2],
            err_sigma_hdiv: pick(err, |e| e.sigma_hdiv),
            err_divsigma_l2: pick(err, |e| e.div_sigma_l2),
            err_u_l2: pick(err, |e| e.u_l2),
            err_p_l2: cur_p,
            eoc_sigma_hdiv: opt_eoc(pick(pe, |e| e.sigma_hdiv), pick(err, |e| e.sigma_hdiv), hp, h),
            eoc_divsigma_l2: opt_eoc(pick(pe, |e| e.div_sigma_l2), pick(err, |e| e.div_sigma_l2), hp, h),
            eoc_u_l2: opt_eoc(pick(pe, |e| e.u_l2), pick(err, |e| e.u_l2), hp, h),
            eoc_p_l2: opt_eoc(prev_p, cur_p, hp, h),
            err_sigma_l2: pick(err, |e| e.sigma_l2),
            max_asymmetry: err.map_or(0.0, |e| e.max_asymmetry),
            residual: sol.residual(),
            interface_jump: jump,
        });
        prev_err = err.map(|e| (h, e));
        last = Some(sol);
    }
    let last = last.expect("at least one level");
    let stress_peak =
        if case.exact.is_none() { Some(stress_peak(&last, cfg.vtk_resolution.max(2))?) } else { None };
    let infsup = if cfg.infsup {
        Some(infsup_probes(&GeometryMap::Identity, cfg.p, cfg.r.max(0), &[2, 4, 8])?)
    } else {
        None
    };
    let report = StudyReport {
        case: cfg.case.clone(),
        formulation: form.to_string(),
        p: cfg.p,
        r: cfg.r,
        lambda: case.material.lambda,
        mu: case.material.mu,
        rows,
        seconds,
        infsup,
        stress_peak,
    };
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        let stem = format!("{}_{}_p{}_r{}", cfg.case, form, cfg.p, cfg.r);
        output::write_csv(&report.rows, &dir.join(format!("{stem}.csv")))?;
        output::write_json(&report, &dir.join(format!("{stem}.json")))?;
        if cfg.vtk {
            let n = *cfg.levels.last().unwrap();
            for patch in 0..case.domain.patches.len() {
                let path = dir.join(format!("{stem}_n{n}_patch{patch}.vtk"));
                output::write_vtk(&last, patch, cfg.vtk_resolution.max(2), &path)?;
            }
        }
    }
    Ok(report)
}
