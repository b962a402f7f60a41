//! The spatial operator `T(f) = Λx δx f/Δx + Λy δy f/Δy` applied wave by
//! wave, optionally limited or with a per-quad order mask.

use alloc::vec;
use alloc::vec::Vec;

use crate::dec::Transport;
use crate::grid::{wrap, Field, Grid2D};
use crate::kinetic::KineticModel;
use crate::par::for_each_chunk;
use crate::space::{apply_delta, corner_residuals, face_fluxes, speed_sign, Axis, StencilOperator};
use crate::stabilize::{limiter_theta, LimiterParams};
use crate::systems::ConservationLaw;

#[derive(Debug, Clone, Copy)]
pub enum TransportMode<'a> {
    /// High-order differences everywhere.
    Plain,
    /// Blend of first-order and high-order face fluxes.
    Limited(LimiterParams),
    /// First-order residuals on the quads marked `true`.
    Masked(&'a [bool]),
}

pub struct KineticTransport<'a> {
    lamx: &'a [f64],
    lamy: &'a [f64],
    k: usize,
    high: &'a StencilOperator,
    low: &'a StencilOperator,
    mode: TransportMode<'a>,
}

impl<'a> KineticTransport<'a> {
    pub fn new<S: ConservationLaw>(
        model: &'a KineticModel<S>,
        high: &'a StencilOperator,
        low: &'a StencilOperator,
        mode: TransportMode<'a>,
    ) -> Self {
        Self {
            lamx: model.lamx(),
            lamy: model.lamy(),
            k: model.ncomp(),
            high,
            low,
            mode,
        }
    }

    /// Nodes touching at least one masked quad.
    fn touched_nodes(grid: &Grid2D, mask: &[bool]) -> Vec<usize> {
        let mut hit = vec![false; grid.nodes()];
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                if mask[grid.node(i, j)] {
                    let i1 = wrap(i as isize + 1, grid.nx);
                    let j1 = wrap(j as isize + 1, grid.ny);
                    for n in [grid.node(i, j), grid.node(i1, j), grid.node(i1, j1), grid.node(i, j1)] {
                        hit[n] = true;
                    }
                }
            }
        }
        (0..grid.nodes()).filter(|&n| hit[n]).collect()
    }

    fn plane(&self, f: &Field, comp: usize, touched: &[usize], out: &mut [f64]) {
        let grid = *f.grid();
        let w = comp / self.k;
        let (lx, ly) = (self.lamx[w], self.lamy[w]);
        let src = f.plane(comp);
        out.fill(0.0);
        let mut d = vec![0.0; grid.nodes()];
        for (lam, axis, h) in [(lx, Axis::X, grid.dx()), (ly, Axis::Y, grid.dy())] {
            let sign = speed_sign(lam);
            if sign == 0 {
                continue;
            }
            match self.mode {
                TransportMode::Limited(p) => {
                    limited_plane(src, &grid, axis, sign, self.low, self.high, &p, &mut d)
                }
                _ => apply_delta(src, &grid, axis, sign, self.high, &mut d),
            }
            let c = lam / h;
            for (o, v) in out.iter_mut().zip(&d) {
                *o += c * v;
            }
        }
        if let TransportMode::Masked(mask) = self.mode {
            let inv = 1.0 / (grid.dx() * grid.dy());
            for &n in touched {
                let (i, j) = (n % grid.nx, n / grid.nx);
                let im = wrap(i as isize - 1, grid.nx);
                let jm = wrap(j as isize - 1, grid.ny);
                let mut s = 0.0;
                for (corner, (qi, qj)) in [(0, (i, j)), (1, (im, j)), (2, (im, jm)), (3, (i, jm))] {
                    let op = if mask[grid.node(qi, qj)] { self.low } else { self.high };
                    s += corner_residuals(src, &grid, (lx, ly), (qi, qj), op)[corner];
                }
                out[n] = s * inv;
            }
        }
    }
}

impl Transport for KineticTransport<'_> {
    fn apply(&self, f: &Field, out: &mut Field) {
        let grid = *f.grid();
        let touched = match self.mode {
            TransportMode::Masked(mask) => Self::touched_nodes(&grid, mask),
            _ => Vec::new(),
        };
        let nodes = grid.nodes();
        for_each_chunk(out.as_mut_slice(), nodes, |comp, o| self.plane(f, comp, &touched, o));
    }
}

/// Limited difference in conservative form: each face flux is
/// `f̂₁ + θ_face (f̂_h − f̂₁)` with `θ_face` the smaller nodal blend factor of
/// the two nodes sharing the face.
#[allow(clippy::too_many_arguments)]
pub fn limited_plane(
    f: &[f64],
    grid: &Grid2D,
    axis: Axis,
    sign: i32,
    low: &StencilOperator,
    high: &StencilOperator,
    p: &LimiterParams,
    out: &mut [f64],
) {
    let n = grid.nodes();
    let mut f1 = vec![0.0; n];
    let mut fh = vec![0.0; n];
    face_fluxes(f, grid, axis, sign, low, &mut f1);
    face_fluxes(f, grid, axis, sign, high, &mut fh);
    let prev = |i: usize, j: usize| match axis {
        Axis::X => grid.node(wrap(i as isize - 1, grid.nx), j),
        Axis::Y => grid.node(i, wrap(j as isize - 1, grid.ny)),
    };
    let next = |i: usize, j: usize| match axis {
        Axis::X => grid.node(wrap(i as isize + 1, grid.nx), j),
        Axis::Y => grid.node(i, wrap(j as isize + 1, grid.ny)),
    };
    let mut theta = vec![0.0; n];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let k = grid.node(i, j);
            let pk = prev(i, j);
            theta[k] = limiter_theta(f1[k] - f1[pk], fh[k] - fh[pk], p);
        }
    }
    // limited face fluxes, reusing fh
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let k = grid.node(i, j);
            let th = theta[k].min(theta[next(i, j)]);
            fh[k] = f1[k] + th * (fh[k] - f1[k]);
        }
    }
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let k = grid.node(i, j);
            out[k] = fh[k] - fh[prev(i, j)];
        }
    }
}
