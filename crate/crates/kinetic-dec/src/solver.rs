//! Time-step driver: λ update, DeC step, stabilisation.

use alloc::vec;

use crate::dec::{dec_step, dt_from_cfl, DecWorkspace, QuadratureTable};
use crate::grid::Field;
use crate::kinetic::{subcharacteristic_lambda, KineticModel, WaveFamily};
use crate::space::{named_operator, StencilOperator};
use crate::stabilize::{mood_detect, mood_recompute, LimiterParams, MoodFlags};
use crate::systems::ConservationLaw;
use crate::transport::{KineticTransport, TransportMode};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stabilizer {
    None,
    Limiter(LimiterParams),
    Mood,
}

/// Maximum MOOD passes (detect, widen, recompute) before the first-order
/// fallback.
pub const MOOD_PASSES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub time_order: usize,
    pub space_order: usize,
    /// Number of corrections R.
    pub iterations: usize,
    pub cfl: f64,
    pub eps: f64,
    pub lambda_safety: f64,
    pub family: WaveFamily,
    pub stabilizer: Stabilizer,
}

impl SchemeConfig {
    pub fn new(time_order: usize, space_order: usize) -> Self {
        Self {
            time_order,
            space_order,
            iterations: time_order + 1,
            cfl: 1.0,
            eps: 1e-10,
            lambda_safety: 1.05,
            family: WaveFamily::FourWave,
            stabilizer: Stabilizer::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        QuadratureTable::new(self.time_order)?;
        named_operator(self.space_order)?;
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("at least one correction is needed"));
        }
        if !(self.cfl > 0.0) || !self.cfl.is_finite() {
            return Err(Error::InvalidConfig("cfl must be positive"));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidConfig("eps must be positive"));
        }
        if !(self.lambda_safety > 0.0) || !self.lambda_safety.is_finite() {
            return Err(Error::InvalidConfig("lambda safety must be positive"));
        }
        if let Stabilizer::Limiter(p) = self.stabilizer {
            p.validate()?;
        }
        Ok(())
    }
}

/// What happened during one step.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub dt: f64,
    pub lambda: f64,
    /// Flags raised by the full-order trial (MOOD only).
    pub trial_flags: Option<MoodFlags>,
    /// Union of all flags used by the recomputation.
    pub flags: Option<MoodFlags>,
    pub fallback: bool,
}

pub struct Solver<S: ConservationLaw + Clone> {
    cfg: SchemeConfig,
    model: KineticModel<S>,
    high: StencilOperator,
    low: StencilOperator,
    ws: DecWorkspace,
    fallback_ws: Option<DecWorkspace>,
    f: Field,
    time: f64,
    steps: usize,
}

impl<S: ConservationLaw + Clone> Solver<S> {
    /// Starts from the well-prepared state `f = M(u0)`.
    pub fn new(system: S, cfg: SchemeConfig, u0: &Field) -> Result<Self> {
        cfg.validate()?;
        if u0.ncomp() != system.ncomp() {
            return Err(Error::ShapeMismatch);
        }
        let lambda = subcharacteristic_lambda(&system, u0, cfg.lambda_safety)?;
        let model = KineticModel::with_family(system, cfg.family, lambda)?;
        let f = model.equilibrium(u0)?;
        let table = QuadratureTable::new(cfg.time_order)?;
        let ws = DecWorkspace::new(table, *u0.grid(), model.waves(), model.ncomp());
        Ok(Self {
            cfg,
            high: named_operator(cfg.space_order)?,
            low: named_operator(1)?,
            model,
            ws,
            fallback_ws: None,
            f,
            time: 0.0,
            steps: 0,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn model(&self) -> &KineticModel<S> {
        &self.model
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn kinetic(&self) -> &Field {
        &self.f
    }

    pub fn workspace(&self) -> &DecWorkspace {
        &self.ws
    }

    pub fn macroscopic(&self) -> Field {
        self.model.project(&self.f).expect("kinetic field matches model")
    }

    /// Re-scales λ to the current state; the kinetic field is re-projected
    /// onto the new equilibrium when λ changes.
    fn update_lambda(&mut self) -> Result<()> {
        let u = self.macroscopic();
        let lambda = subcharacteristic_lambda(self.model.system(), &u, self.cfg.lambda_safety)
            .map_err(|_| Error::Breakdown { step: self.steps, time: self.time })?;
        if lambda != self.model.lambda() {
            self.model = self.model.rescaled(lambda)?;
            self.f = self.model.equilibrium(&u)?;
        }
        Ok(())
    }

    /// Time step the next call to [`Solver::step`] would take without
    /// clipping.
    pub fn stable_dt(&self) -> Result<f64> {
        let u = self.macroscopic();
        let lambda = subcharacteristic_lambda(self.model.system(), &u, self.cfg.lambda_safety)?;
        dt_from_cfl(self.f.grid(), lambda, self.cfg.cfl)
    }

    /// Advances by the CFL step, never past `t_end`.
    pub fn step(&mut self, t_end: f64) -> Result<StepReport> {
        self.update_lambda()?;
        let mut dt = dt_from_cfl(self.f.grid(), self.model.lambda(), self.cfg.cfl)?;
        if self.time + dt > t_end {
            dt = t_end - self.time;
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidConfig("no time left to step"));
        }
        let (eps, r) = (self.cfg.eps, self.cfg.iterations);
        let mode = match self.cfg.stabilizer {
            Stabilizer::Limiter(p) => TransportMode::Limited(p),
            _ => TransportMode::Plain,
        };
        {
            let tr = KineticTransport::new(&self.model, &self.high, &self.low, mode);
            dec_step(&mut self.ws, &self.model, &tr, &self.f, dt, eps, r)?;
        }
        let mut report =
            StepReport { dt, lambda: self.model.lambda(), trial_flags: None, flags: None, fallback: false };
        if self.cfg.stabilizer == Stabilizer::Mood {
            self.mood(&mut report)?;
        }
        let next = self.ws.result();
        if let Some(idx) = next.first_non_finite() {
            let _ = idx;
            return Err(Error::Breakdown { step: self.steps, time: self.time });
        }
        self.f.as_mut_slice().copy_from_slice(next.as_slice());
        self.time = if self.time + dt >= t_end { t_end } else { self.time + dt };
        self.steps += 1;
        Ok(report)
    }

    fn mood(&mut self, report: &mut StepReport) -> Result<()> {
        let sys = self.model.system().clone();
        let mut flags = mood_detect(&self.model.project(self.ws.result())?, &sys);
        report.trial_flags = Some(flags.clone());
        if !flags.any() {
            return Ok(());
        }
        let (dt, eps, r) = (report.dt, self.cfg.eps, self.cfg.iterations);
        for _ in 0..MOOD_PASSES {
            mood_recompute(&mut self.ws, &flags, &self.model, &self.high, &self.low, &self.f, dt, eps, r)?;
            let again = mood_detect(&self.model.project(self.ws.result())?, &sys);
            if !again.any() {
                report.flags = Some(flags);
                return Ok(());
            }
            flags.union(&again);
        }
        // First order in time and space everywhere.
        let grid = *self.f.grid();
        let fws = self.fallback_ws.get_or_insert_with(|| {
            let t = QuadratureTable::new(1).expect("first-order table");
            DecWorkspace::new(t, grid, self.model.waves(), self.model.ncomp())
        });
        let tr = KineticTransport::new(&self.model, &self.low, &self.low, TransportMode::Plain);
        dec_step(fws, &self.model, &tr, &self.f, dt, eps, 1)?;
        let check = mood_detect(&self.model.project(fws.result())?, &sys);
        if check.any() {
            return Err(Error::Breakdown { step: self.steps, time: self.time });
        }
        let out = fws.result().as_slice().to_vec();
        self.ws.stages_mut().last_mut().expect("at least one stage").as_mut_slice().copy_from_slice(&out);
        report.flags = Some(flags);
        report.fallback = true;
        Ok(())
    }
}

/// Σ dx·dy·u per component.
pub fn totals(u: &Field) -> alloc::vec::Vec<f64> {
    (0..u.ncomp()).map(|c| u.integral(c)).collect()
}

/// Zeroed flag placeholder for runs without MOOD.
pub fn no_flags(u: &Field) -> MoodFlags {
    MoodFlags::from_nodes(*u.grid(), vec![false; u.grid().nodes()])
}
