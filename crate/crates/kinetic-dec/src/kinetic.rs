//! Discrete-velocity BGK models.
//!
//! A model carries `N` scalar waves with velocities `(lamx[i], lamy[i])`
//! and a Maxwellian `M(u)` such that `Σ M_i = u`, `Σ lamx_i M_i = A1(u)`
//! and `Σ lamy_i M_i = A2(u)`. A kinetic field stores `N·K` components,
//! component `i*K + k` being macroscopic component `k` of wave `i`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::grid::Field;
use crate::systems::ConservationLaw;
use crate::{Error, Result};

/// Largest system size the flux scratch buffers hold.
pub const MAX_COMPONENTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveFamily {
    FourWave,
    /// `rings` speed rings `λ·m/J`, each with `4·directions` angles.
    General { rings: usize, directions: usize },
}

#[derive(Debug, Clone)]
pub struct KineticModel<S> {
    system: S,
    lambda: f64,
    family: WaveFamily,
    lamx: Vec<f64>,
    lamy: Vec<f64>,
    // M_i(u) = u/N + cx[i]·A1(u) + cy[i]·A2(u)
    cx: Vec<f64>,
    cy: Vec<f64>,
}

/// Relative tolerance of the construction-time moment check.
const CONSTRUCTION_TOL: f64 = 1e-10;

impl<S: ConservationLaw> KineticModel<S> {
    pub fn four_wave(system: S, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let lamx = vec![0.0, -lambda, 0.0, lambda];
        let lamy = vec![lambda, 0.0, -lambda, 0.0];
        let c = 0.5 / lambda;
        let cx = lamx.iter().map(|l| c * l / lambda).collect();
        let cy = lamy.iter().map(|l| c * l / lambda).collect();
        let model = Self { system, lambda, family: WaveFamily::FourWave, lamx, lamy, cx, cy };
        model.verify()?;
        Ok(model)
    }

    pub fn general(system: S, rings: usize, directions: usize, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if rings == 0 || directions == 0 {
            return Err(Error::InvalidConfig("J and N' must be positive"));
        }
        let n = 4 * directions * rings;
        let (mut lamx, mut lamy) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for m in 1..=rings {
            let speed = lambda * m as f64 / rings as f64;
            for i in 1..=4 * directions {
                let (c, s) = axis_exact_cos_sin(i, directions);
                lamx.push(speed * c);
                lamy.push(speed * s);
            }
        }
        let ax2: f64 = lamx.iter().map(|l| l * l).sum();
        let ay2: f64 = lamy.iter().map(|l| l * l).sum();
        let cx = lamx.iter().map(|l| l / ax2).collect();
        let cy = lamy.iter().map(|l| l / ay2).collect();
        let family = WaveFamily::General { rings, directions };
        let model = Self { system, lambda, family, lamx, lamy, cx, cy };
        model.verify()?;
        Ok(model)
    }

    pub fn with_family(system: S, family: WaveFamily, lambda: f64) -> Result<Self> {
        match family {
            WaveFamily::FourWave => Self::four_wave(system, lambda),
            WaveFamily::General { rings, directions } => {
                Self::general(system, rings, directions, lambda)
            }
        }
    }

    /// Same waves with a new velocity scale.
    pub fn rescaled(&self, lambda: f64) -> Result<Self>
    where
        S: Clone,
    {
        Self::with_family(self.system.clone(), self.family, lambda)
    }

    fn verify(&self) -> Result<()> {
        if self.ncomp() > MAX_COMPONENTS {
            return Err(Error::InvalidConfig("kinetic models support at most 8 conserved components"));
        }
        let l2 = self.lambda * self.lambda;
        let sx: f64 = self.lamx.iter().sum();
        let sy: f64 = self.lamy.iter().sum();
        let sxy: f64 = self.lamx.iter().zip(&self.lamy).map(|(a, b)| a * b).sum();
        let moments = (libm::fabs(sx) / self.lambda)
            .max(libm::fabs(sy) / self.lambda)
            .max(libm::fabs(sxy) / l2)
            / self.waves() as f64;
        if moments > CONSTRUCTION_TOL {
            return Err(Error::InconsistentModel { residual: moments });
        }
        let mut u = vec![0.0; self.ncomp()];
        self.system.probe_state(&mut u);
        let r = self.consistency_residual(&u);
        if !(r <= CONSTRUCTION_TOL) {
            return Err(Error::InconsistentModel { residual: r });
        }
        Ok(())
    }

    pub fn system(&self) -> &S {
        &self.system
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn family(&self) -> WaveFamily {
        self.family
    }

    /// Number of waves N.
    pub fn waves(&self) -> usize {
        self.lamx.len()
    }

    /// Number of macroscopic components K.
    pub fn ncomp(&self) -> usize {
        self.system.ncomp()
    }

    pub fn lamx(&self) -> &[f64] {
        &self.lamx
    }

    pub fn lamy(&self) -> &[f64] {
        &self.lamy
    }

    /// Maxwellian of `u`, written as `N·K` values (wave-major).
    pub fn maxwellian(&self, u: &[f64], out: &mut [f64]) {
        let k = self.ncomp();
        let mut a1 = [0.0; MAX_COMPONENTS];
        let mut a2 = [0.0; MAX_COMPONENTS];
        self.system.flux_x(u, &mut a1[..k]);
        self.system.flux_y(u, &mut a2[..k]);
        let inv_n = 1.0 / self.waves() as f64;
        for i in 0..self.waves() {
            for c in 0..k {
                out[i * k + c] = u[c] * inv_n + self.cx[i] * a1[c] + self.cy[i] * a2[c];
            }
        }
    }

    /// Largest relative defect of `PM(u) = u`, `PΛxM(u) = A1(u)`,
    /// `PΛyM(u) = A2(u)`.
    pub fn consistency_residual(&self, u: &[f64]) -> f64 {
        let k = self.ncomp();
        let n = self.waves();
        let mut m = vec![0.0; n * k];
        self.maxwellian(u, &mut m);
        let mut a1 = [0.0; MAX_COMPONENTS];
        let mut a2 = [0.0; MAX_COMPONENTS];
        self.system.flux_x(u, &mut a1[..k]);
        self.system.flux_y(u, &mut a2[..k]);
        let scale = u[..k]
            .iter()
            .chain(&a1[..k])
            .chain(&a2[..k])
            .fold(0.0f64, |s, v| s.max(libm::fabs(*v)))
            .max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for c in 0..k {
            let (mut p, mut px, mut py) = (0.0, 0.0, 0.0);
            for i in 0..n {
                let v = m[i * k + c];
                p += v;
                px += self.lamx[i] * v;
                py += self.lamy[i] * v;
            }
            worst = worst
                .max(libm::fabs(p - u[c]))
                .max(libm::fabs(px - a1[c]))
                .max(libm::fabs(py - a2[c]));
        }
        worst / scale
    }

    /// Equilibrium kinetic field `f = M(u)`.
    pub fn equilibrium(&self, u: &Field) -> Result<Field> {
        let k = self.ncomp();
        if u.ncomp() != k {
            return Err(Error::ShapeMismatch);
        }
        let grid = *u.grid();
        let mut f = Field::zeros(grid, self.waves() * k);
        let mut un = vec![0.0; k];
        let mut m = vec![0.0; self.waves() * k];
        for node in 0..grid.nodes() {
            u.node_values(node, &mut un);
            self.maxwellian(&un, &mut m);
            f.set_node(node, &m);
        }
        Ok(f)
    }

    /// `P f = Σ_i f_i`.
    pub fn project(&self, f: &Field) -> Result<Field> {
        let k = self.ncomp();
        if f.ncomp() != self.waves() * k {
            return Err(Error::ShapeMismatch);
        }
        let mut u = Field::zeros(*f.grid(), k);
        project_into(f, k, &mut u);
        Ok(u)
    }
}

pub(crate) fn project_into(f: &Field, k: usize, u: &mut Field) {
    let waves = f.ncomp() / k;
    for c in 0..k {
        let out = u.plane_mut(c);
        out.copy_from_slice(f.plane(c));
        for w in 1..waves {
            for (o, v) in out.iter_mut().zip(f.plane(w * k + c)) {
                *o += v;
            }
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig("lambda must be positive"))
    }
}

/// `(cos, sin)` of `i·π/(2n)`, exact on the coordinate axes.
fn axis_exact_cos_sin(i: usize, n: usize) -> (f64, f64) {
    if i % n == 0 {
        match (i / n) % 4 {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    } else {
        let a = i as f64 * FRAC_PI_2 / n as f64;
        (libm::cos(a), libm::sin(a))
    }
}

/// `safety · max_nodes max_speed(u)`.
pub fn subcharacteristic_lambda<S: ConservationLaw>(sys: &S, u: &Field, safety: f64) -> Result<f64> {
    if !(safety > 0.0) {
        return Err(Error::InvalidConfig("lambda safety must be positive"));
    }
    let mut un = vec![0.0; sys.ncomp()];
    let mut s = 0.0f64;
    for node in 0..u.grid().nodes() {
        u.node_values(node, &mut un);
        let v = sys.max_speed(&un).map_err(|_| Error::NotAdmissible { node })?;
        s = s.max(v);
    }
    Ok(safety * s)
}
