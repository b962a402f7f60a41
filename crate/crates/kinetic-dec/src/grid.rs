//! Periodic Cartesian grid and nodal fields.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Smallest node count per axis; the widest stencil plus the limiter window
/// must fit without wrapping onto itself.
pub const MIN_NODES: usize = 8;

/// Uniform periodic grid with nodes at `x0 + i*dx`, `i = 0..nx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) -> Result<Self> {
        if nx < MIN_NODES || ny < MIN_NODES {
            return Err(Error::InvalidConfig("grid needs at least 8 nodes per axis"));
        }
        if !(x1 > x0) || !(y1 > y0) || !(x1 - x0).is_finite() || !(y1 - y0).is_finite() {
            return Err(Error::InvalidConfig("grid bounds must be finite and increasing"));
        }
        Ok(Self { nx, ny, x0, x1, y0, y1 })
    }

    pub fn dx(&self) -> f64 {
        (self.x1 - self.x0) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y1 - self.y0) / self.ny as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.dy()
    }

    pub fn nodes(&self) -> usize {
        self.nx * self.ny
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    /// Flat node index, `i` fastest.
    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
}

/// Periodic index wrap into `[0, n)`.
#[inline]
pub fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

/// Multi-component nodal field.
///
/// Storage is component-major: each component is a contiguous `nx*ny`
/// plane with `i` fastest, so stencil sweeps run over contiguous rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid2D,
    ncomp: usize,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid2D, ncomp: usize) -> Self {
        Self { grid, ncomp, data: vec![0.0; grid.nodes() * ncomp] }
    }

    pub fn from_vec(grid: Grid2D, ncomp: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.nodes() * ncomp {
            return Err(Error::ShapeMismatch);
        }
        Ok(Self { grid, ncomp, data })
    }

    /// Builds a field from a per-node function writing `ncomp` values.
    pub fn from_fn(grid: Grid2D, ncomp: usize, mut f: impl FnMut(f64, f64, &mut [f64])) -> Self {
        let mut out = Self::zeros(grid, ncomp);
        let mut buf = vec![0.0; ncomp];
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                f(grid.x(i), grid.y(j), &mut buf);
                out.set_node(grid.node(i, j), &buf);
            }
        }
        out
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, c: usize) -> f64 {
        self.data[(c * self.grid.ny + j) * self.grid.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, c: usize, v: f64) {
        let k = (c * self.grid.ny + j) * self.grid.nx + i;
        self.data[k] = v;
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.grid.nodes();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.grid.nodes();
        &mut self.data[c * n..(c + 1) * n]
    }

    /// Gathers the components of flat node `k`.
    #[inline]
    pub fn node_values(&self, k: usize, out: &mut [f64]) {
        let n = self.grid.nodes();
        for (c, o) in out.iter_mut().enumerate().take(self.ncomp) {
            *o = self.data[c * n + k];
        }
    }

    #[inline]
    pub fn set_node(&mut self, k: usize, vals: &[f64]) {
        let n = self.grid.nodes();
        for (c, v) in vals.iter().enumerate().take(self.ncomp) {
            self.data[c * n + k] = *v;
        }
    }

    /// `Σ dx·dy·u` for one component.
    pub fn integral(&self, c: usize) -> f64 {
        let cell = self.grid.dx() * self.grid.dy();
        self.plane(c).iter().sum::<f64>() * cell
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        self.data.iter().position(|v| !v.is_finite())
    }
}

/// Discrete L1, L2 and L∞ norms of a nodal error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Norms of a single-component field.
pub fn discrete_norms(err: &Field) -> Result<Norms> {
    if err.ncomp() != 1 {
        return Err(Error::ShapeMismatch);
    }
    component_norms(err, 0)
}

pub fn component_norms(err: &Field, c: usize) -> Result<Norms> {
    let cell = err.grid().dx() * err.grid().dy();
    let (mut l1, mut l2, mut linf) = (0.0f64, 0.0f64, 0.0f64);
    for (k, &e) in err.plane(c).iter().enumerate() {
        if !e.is_finite() {
            return Err(Error::NonFinite { what: "error value", index: k });
        }
        let a = libm::fabs(e);
        l1 += a;
        l2 += e * e;
        linf = linf.max(a);
    }
    Ok(Norms { l1: cell * l1, l2: libm::sqrt(cell * l2), linf })
}
