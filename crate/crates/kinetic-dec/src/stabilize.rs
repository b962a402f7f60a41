//! Nonlinear stabilisation: flux limitation and MOOD element flagging.

use alloc::vec;
use alloc::vec::Vec;

use crate::dec::{dec_step, DecWorkspace};
use crate::grid::{wrap, Field, Grid2D};
use crate::kinetic::KineticModel;
use crate::space::StencilOperator;
use crate::systems::ConservationLaw;
use crate::transport::{KineticTransport, TransportMode};
use crate::{Error, Result};

/// Monotonicity window of the limiter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimiterParams {
    /// Upper bound M of `1 + θ(r)·r/6`.
    pub mbound: f64,
    /// Margin α inside `]0, min(6, 6(M−1))[`.
    pub alpha: f64,
}

impl Default for LimiterParams {
    fn default() -> Self {
        Self { mbound: 2.0, alpha: 1.0 }
    }
}

impl LimiterParams {
    pub fn new(mbound: f64, alpha: f64) -> Result<Self> {
        let p = Self { mbound, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mbound >= 1.0) {
            return Err(Error::InvalidConfig("limiter bound M must be at least 1"));
        }
        let top = 6.0f64.min(6.0 * (self.mbound - 1.0));
        if !(self.alpha > 0.0 && self.alpha < top) {
            return Err(Error::InvalidConfig("limiter alpha must lie in ]0, min(6, 6(M-1))["));
        }
        Ok(())
    }

    fn window(&self) -> (f64, f64) {
        (-6.0 + self.alpha, 6.0 * (self.mbound - 1.0) - self.alpha)
    }
}

/// Blend factor θ in `δ̃ = δ₁ + θ(δ_h − δ₁)`.
///
/// With `r = 6(δ_h − δ₁)/δ₁`, θ is 1 inside the window and scales `r`
/// back onto its nearest edge outside, so `1 + θr/6` stays in
/// `[α/6, M − α/6]`.
pub fn limiter_theta(d1: f64, dh: f64, p: &LimiterParams) -> f64 {
    let diff = dh - d1;
    if diff == 0.0 {
        return 1.0;
    }
    if d1 == 0.0 {
        return 0.0;
    }
    let r = 6.0 * diff / d1;
    let (lo, hi) = p.window();
    if r < lo {
        lo / r
    } else if r > hi {
        hi / r
    } else {
        1.0
    }
}

pub fn limited_delta(d1: f64, dh: f64, p: &LimiterParams) -> f64 {
    d1 + limiter_theta(d1, dh, p) * (dh - d1)
}

/// Node and quad flags; quad `(i, j)` is `[i, i+1]×[j, j+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MoodFlags {
    grid: Grid2D,
    pub node: Vec<bool>,
    pub quad: Vec<bool>,
}

impl MoodFlags {
    pub fn empty(grid: Grid2D) -> Self {
        Self { grid, node: vec![false; grid.nodes()], quad: vec![false; grid.nodes()] }
    }

    pub fn from_nodes(grid: Grid2D, node: Vec<bool>) -> Self {
        let mut f = Self { grid, node, quad: vec![false; grid.nodes()] };
        f.derive_quads();
        f
    }

    fn derive_quads(&mut self) {
        let g = self.grid;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let i1 = wrap(i as isize + 1, g.nx);
                let j1 = wrap(j as isize + 1, g.ny);
                self.quad[g.node(i, j)] = self.node[g.node(i, j)]
                    || self.node[g.node(i1, j)]
                    || self.node[g.node(i1, j1)]
                    || self.node[g.node(i, j1)];
            }
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn flagged_nodes(&self) -> usize {
        self.node.iter().filter(|&&b| b).count()
    }

    pub fn flagged_quads(&self) -> usize {
        self.quad.iter().filter(|&&b| b).count()
    }

    pub fn any(&self) -> bool {
        self.node.iter().any(|&b| b)
    }

    /// Adds the flags of `other` (same grid).
    pub fn union(&mut self, other: &MoodFlags) {
        for (a, b) in self.node.iter_mut().zip(&other.node) {
            *a |= *b;
        }
        for (a, b) in self.quad.iter_mut().zip(&other.quad) {
            *a |= *b;
        }
    }
}

/// Flags nodes whose candidate state has `ρ ≤ 0`, `p ≤ 0` or a NaN
/// primitive (for scalar problems only non-finite values are flagged).
pub fn mood_detect<S: ConservationLaw>(u: &Field, sys: &S) -> MoodFlags {
    let k = sys.ncomp();
    let grid = *u.grid();
    let mut un = vec![0.0; k];
    let mut v = vec![0.0; k];
    let node = (0..grid.nodes())
        .map(|n| {
            u.node_values(n, &mut un);
            sys.to_primitive(&un, &mut v);
            #[allow(clippy::eq_op)]
            let nan = v.iter().chain(&un).any(|x| x != x);
            nan || !sys.admissible(&un)
        })
        .collect();
    MoodFlags::from_nodes(grid, node)
}

/// Re-runs the step from `f` with first-order residuals on every flagged
/// quad, leaving the stages of `ws` at the corrected solution.
#[allow(clippy::too_many_arguments)]
pub fn mood_recompute<S: ConservationLaw>(
    ws: &mut DecWorkspace,
    flags: &MoodFlags,
    model: &KineticModel<S>,
    high: &StencilOperator,
    low: &StencilOperator,
    f: &Field,
    dt: f64,
    eps: f64,
    iterations: usize,
) -> Result<()> {
    let tr = KineticTransport::new(model, high, low, TransportMode::Masked(&flags.quad));
    dec_step(ws, model, &tr, f, dt, eps, iterations)
}
