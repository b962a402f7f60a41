//! Test problems and the run harness.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::grid::{component_norms, Field, Grid2D, Norms};
use crate::kinetic::WaveFamily;
use crate::solver::{SchemeConfig, Solver, Stabilizer, StepReport};
use crate::systems::{vortex_exact, ConservationLaw, EulerParams, System, VortexParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    /// `sin(πx + πy)` on `[-2, 2]²`, unit speed along both axes.
    Advection,
    /// Isentropic vortex on `[-10, 10]²`.
    Vortex,
    /// Circular Sod tube on `[-1, 1]²`.
    Sod,
    /// Circular blast with pressure ratio 1000 on `[-1.5, 1.5]²`.
    StrongShock,
}

impl Case {
    pub const ALL: [Case; 4] = [Case::Advection, Case::Vortex, Case::Sod, Case::StrongShock];

    pub fn name(self) -> &'static str {
        match self {
            Case::Advection => "advection",
            Case::Vortex => "vortex",
            Case::Sod => "sod",
            Case::StrongShock => "strong-shock",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    pub fn half_width(self) -> f64 {
        match self {
            Case::Advection => 2.0,
            Case::Vortex => 10.0,
            Case::Sod => 1.0,
            Case::StrongShock => 1.5,
        }
    }

    pub fn grid(self, nx: usize, ny: usize) -> Result<Grid2D> {
        let h = self.half_width();
        Grid2D::new(nx, ny, (-h, h), (-h, h))
    }

    pub fn default_final_time(self) -> f64 {
        match self {
            Case::Advection => 10.0,
            Case::Vortex => 5.0,
            Case::Sod => 0.16,
            Case::StrongShock => 0.025,
        }
    }

    /// Default ratio `λ / max speed`.
    pub fn default_lambda_safety(self) -> f64 {
        match self {
            Case::Advection | Case::Sod | Case::StrongShock => 3.0,
            Case::Vortex => 2.1,
        }
    }

    pub fn has_exact(self) -> bool {
        matches!(self, Case::Advection | Case::Vortex)
    }

    pub fn system(self, gamma: f64) -> Result<System> {
        match self {
            Case::Advection => Ok(System::advection()),
            _ => System::euler(EulerParams { gamma }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub case: Case,
    pub nx: usize,
    pub ny: usize,
    pub final_time: f64,
    pub scheme: SchemeConfig,
    pub gamma: f64,
    pub vortex: VortexParams,
}

impl RunConfig {
    /// Case defaults with DeC(4, 5), order-4 stencils and CFL 1.
    pub fn new(case: Case, n: usize) -> Self {
        let mut scheme = SchemeConfig::new(4, 4);
        scheme.lambda_safety = case.default_lambda_safety();
        Self {
            case,
            nx: n,
            ny: n,
            final_time: case.default_final_time(),
            scheme,
            gamma: 1.4,
            vortex: VortexParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        self.case.grid(self.nx, self.ny)?;
        if !(self.final_time >= 0.0) || !self.final_time.is_finite() {
            return Err(Error::InvalidConfig("final time must be finite and non-negative"));
        }
        if !(self.gamma > 1.0) {
            return Err(Error::InvalidConfig("gamma must exceed 1"));
        }
        if let WaveFamily::General { rings, directions } = self.scheme.family {
            if rings == 0 || directions == 0 {
                return Err(Error::InvalidConfig("wave family needs rings, directions >= 1"));
            }
        }
        Ok(())
    }

    fn vortex_params(&self) -> VortexParams {
        VortexParams { gamma: self.gamma, half_width: self.case.half_width(), ..self.vortex }
    }
}

/// Conserved initial data of `case` on `grid`.
pub fn init_case(case: Case, grid: &Grid2D, gamma: f64, vortex: &VortexParams) -> Result<Field> {
    let h = case.half_width();
    let close = |a: f64, b: f64| libm::fabs(a - b) <= 1e-12 * h;
    if !(close(grid.x0, -h) && close(grid.x1, h) && close(grid.y0, -h) && close(grid.y1, h)) {
        return Err(Error::DomainMismatch);
    }
    let sys = case.system(gamma)?;
    let ncomp = sys.ncomp();
    let vp = VortexParams { gamma, half_width: h, ..*vortex };
    Ok(Field::from_fn(*grid, ncomp, |x, y, u| {
        let r = libm::sqrt(x * x + y * y);
        let prim = match case {
            Case::Advection => {
                u[0] = libm::sin(PI * x + PI * y);
                return;
            }
            Case::Vortex => vortex_exact(x, y, 0.0, &vp),
            Case::Sod if r <= 0.5 => [1.0, 0.0, 0.0, 1.0],
            Case::Sod => [0.125, 0.0, 0.0, 0.1],
            Case::StrongShock if r <= 0.5 => [1.0, 0.0, 0.0, 1000.0],
            Case::StrongShock => [1.0, 0.0, 0.0, 1.0],
        };
        sys.from_primitive(&prim, u);
    }))
}

/// Exact primitive solution at `t`, when one exists.
pub fn exact_primitive(case: Case, grid: &Grid2D, t: f64, gamma: f64, vortex: &VortexParams) -> Option<Field> {
    let h = case.half_width();
    match case {
        Case::Advection => Some(Field::from_fn(*grid, 1, |x, y, u| {
            u[0] = libm::sin(PI * (x - t) + PI * (y - t));
        })),
        Case::Vortex => {
            let vp = VortexParams { gamma, half_width: h, ..*vortex };
            Some(Field::from_fn(*grid, 4, |x, y, u| u.copy_from_slice(&vortex_exact(x, y, t, &vp))))
        }
        _ => None,
    }
}

/// Per-step MOOD statistics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepFlags {
    pub step: usize,
    /// Time at the start of the step.
    pub time: f64,
    pub dt: f64,
    pub lambda: f64,
    /// Nodes flagged by the full-order trial.
    pub trial_nodes: usize,
    /// Quads recomputed at low order.
    pub quads: usize,
    pub fallback: bool,
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub config: RunConfig,
    pub conserved: Field,
    pub primitive: Field,
    /// One entry per primitive component, against the exact solution.
    pub errors: Option<Vec<Norms>>,
    pub steps: usize,
    pub final_time: f64,
    pub initial_totals: Vec<f64>,
    pub final_totals: Vec<f64>,
    pub flags: Vec<StepFlags>,
}

impl CaseResult {
    pub fn fallbacks(&self) -> usize {
        self.flags.iter().filter(|f| f.fallback).count()
    }

    /// `max_c |Σu_c(T) − Σu_c(0)| / max(Σ|u_c(0)|·dxdy, tiny)`.
    pub fn conservation_defect(&self) -> f64 {
        let cell = self.conserved.grid().dx() * self.conserved.grid().dy();
        (0..self.conserved.ncomp())
            .map(|c| {
                let mass: f64 = self.conserved.plane(c).iter().map(|v| libm::fabs(*v)).sum::<f64>() * cell;
                libm::fabs(self.final_totals[c] - self.initial_totals[c]) / mass.max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }
}

fn to_primitive(sys: &System, u: &Field) -> Field {
    let k = sys.ncomp();
    let mut out = Field::zeros(*u.grid(), k);
    let (mut un, mut v) = (vec![0.0; k], vec![0.0; k]);
    for n in 0..u.grid().nodes() {
        u.node_values(n, &mut un);
        sys.to_primitive(&un, &mut v);
        out.set_node(n, &v);
    }
    out
}

fn totals(u: &Field) -> Vec<f64> {
    (0..u.ncomp()).map(|c| u.integral(c)).collect()
}

pub fn run(cfg: &RunConfig) -> Result<CaseResult> {
    run_with(cfg, |_, _| {})
}

/// Runs `cfg`, calling `observer` after every accepted step.
pub fn run_with<F>(cfg: &RunConfig, mut observer: F) -> Result<CaseResult>
where
    F: FnMut(&Solver<System>, &StepReport),
{
    cfg.validate()?;
    let grid = cfg.case.grid(cfg.nx, cfg.ny)?;
    let sys = cfg.case.system(cfg.gamma)?;
    let vp = cfg.vortex_params();
    let u0 = init_case(cfg.case, &grid, cfg.gamma, &vp)?;
    let initial_totals = totals(&u0);
    let mut flags = Vec::new();
    let mut steps = 0;
    let conserved = if cfg.final_time == 0.0 {
        u0
    } else {
        let mut solver = Solver::new(sys, cfg.scheme, &u0)?;
        while solver.time() < cfg.final_time {
            let (step, time) = (solver.steps(), solver.time());
            let rep = solver.step(cfg.final_time)?;
            if cfg.scheme.stabilizer == Stabilizer::Mood {
                flags.push(StepFlags {
                    step,
                    time,
                    dt: rep.dt,
                    lambda: rep.lambda,
                    trial_nodes: rep.trial_flags.as_ref().map_or(0, |f| f.flagged_nodes()),
                    quads: rep.flags.as_ref().map_or(0, |f| f.flagged_quads()),
                    fallback: rep.fallback,
                });
            }
            observer(&solver, &rep);
        }
        steps = solver.steps();
        solver.macroscopic()
    };
    let primitive = to_primitive(&sys, &conserved);
    let errors = match exact_primitive(cfg.case, &grid, cfg.final_time, cfg.gamma, &vp) {
        Some(ex) => {
            let mut diff = primitive.clone();
            for (d, e) in diff.as_mut_slice().iter_mut().zip(ex.as_slice()) {
                *d -= e;
            }
            Some((0..diff.ncomp()).map(|c| component_norms(&diff, c)).collect::<Result<Vec<_>>>()?)
        }
        None => None,
    };
    let final_totals = totals(&conserved);
    Ok(CaseResult {
        config: *cfg,
        conserved,
        primitive,
        errors,
        steps,
        final_time: cfg.final_time,
        initial_totals,
        final_totals,
        flags,
    })
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    /// Mesh label `1/n`.
    pub h: f64,
    pub errors: Norms,
    /// Observed orders against the previous (coarser) row.
    pub slopes: Option<Norms>,
}

/// `log(e_c/e_f) / log(h_c/h_f)` per norm.
pub fn slopes(coarse: (f64, Norms), fine: (f64, Norms)) -> Norms {
    let r = libm::log(coarse.0 / fine.0);
    let s = |a: f64, b: f64| libm::log(a / b) / r;
    Norms {
        l1: s(coarse.1.l1, fine.1.l1),
        l2: s(coarse.1.l2, fine.1.l2),
        linf: s(coarse.1.linf, fine.1.linf),
    }
}

/// Fills in slopes between successive rows.
pub fn convergence_table(levels: &[(usize, Norms)]) -> Vec<ConvergenceRow> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels.len());
    for &(n, errors) in levels {
        let h = 1.0 / n as f64;
        let slopes = rows.last().map(|p| slopes((p.h, p.errors), (h, errors)));
        rows.push(ConvergenceRow { n, h, errors, slopes });
    }
    rows
}

/// Runs `cfg` on each `n × n` grid and tabulates the error of the first
/// primitive component.
pub fn convergence_study(cfg: &RunConfig, levels: &[usize]) -> Result<Vec<ConvergenceRow>> {
    if !cfg.case.has_exact() {
        return Err(Error::InvalidConfig("convergence needs a case with an exact solution"));
    }
    let mut errs = Vec::with_capacity(levels.len());
    for &n in levels {
        let res = run(&RunConfig { nx: n, ny: n, ..*cfg })?;
        errs.push((n, res.errors.expect("exact solution exists")[0]));
    }
    Ok(convergence_table(&errs))
}
