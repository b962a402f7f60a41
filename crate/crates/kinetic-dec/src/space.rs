//! Upwind interpolatory difference operators and their residual splitting.
//!
//! An operator `δ` of order q approximates `Δx·∂x` by
//! `δf_i = Σ_k α_k f_{i+k}` for a positive speed, and by the mirrored
//! `δf_i = -Σ_k α_k f_{i-k}` for a negative speed. Both are written in
//! flux form `δf_i = f̂_{i+1/2} − f̂_{i−1/2}` with `β_k = Σ_{m≥k} α_m`.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{wrap, Grid2D};
use crate::{Error, Result};

/// Ghost width of the padded row buffer; covers every supported stencil.
const PAD: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct StencilOperator {
    order: usize,
    /// Offset of `alpha[0]`.
    lo: isize,
    alpha: Vec<f64>,
    /// Flux weights for offsets `lo+1 ..= hi`.
    beta: Vec<f64>,
    c_rs: f64,
}

impl StencilOperator {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `(offset, α)` pairs.
    pub fn alpha(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        self.alpha.iter().enumerate().map(move |(k, &a)| (self.lo + k as isize, a))
    }

    /// `(offset, β)` pairs of the face flux `f̂_{i+1/2} = Σ β_k f_{i+k}`.
    pub fn beta(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        self.beta.iter().enumerate().map(move |(k, &b)| (self.lo + 1 + k as isize, b))
    }

    pub fn offsets(&self) -> core::ops::RangeInclusive<isize> {
        self.lo..=self.lo + self.alpha.len() as isize - 1
    }

    pub fn error_constant(&self) -> f64 {
        self.c_rs
    }

    /// Largest `|offset|` touched by either the difference or the flux.
    pub fn reach(&self) -> usize {
        let hi = self.lo + self.alpha.len() as isize - 1;
        (-self.lo).max(hi + 1) as usize
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Interpolatory operator with `r` backward and `s` forward points.
pub fn interpolatory_coeffs(r: usize, s: usize) -> Result<StencilOperator> {
    if r + s == 0 {
        return Err(Error::InvalidConfig("stencil needs r + s >= 1"));
    }
    if r + s > 12 {
        return Err(Error::FactorialOverflow { n: r + s });
    }
    let (ri, si) = (r as isize, s as isize);
    let fr = factorial(r) * factorial(s);
    let mut alpha = vec![0.0; r + s + 1];
    let mut sum = 0.0;
    for k in -ri..=si {
        if k == 0 {
            continue;
        }
        let sign = if (k + 1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let a = sign / k as f64 * fr / (factorial((ri + k) as usize) * factorial((si - k) as usize));
        alpha[(k + ri) as usize] = a;
        sum += a;
    }
    alpha[r] = -sum;
    let mut beta = vec![0.0; r + s];
    let mut acc = 0.0;
    for k in (1..=r + s).rev() {
        acc += alpha[k];
        beta[k - 1] = acc;
    }
    let sgn = if (si - 1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let c_rs = sgn * fr / factorial(r + s + 1);
    Ok(StencilOperator { order: r + s, lo: -ri, alpha, beta, c_rs })
}

/// The four upwind operators used by the solver.
pub fn named_operator(order: usize) -> Result<StencilOperator> {
    match order {
        1 => interpolatory_coeffs(1, 0),
        2 => interpolatory_coeffs(2, 0),
        3 => interpolatory_coeffs(2, 1),
        4 => interpolatory_coeffs(3, 1),
        _ => Err(Error::InvalidConfig("space order must be 1, 2, 3 or 4")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Sign of a wave speed, with zero speeds kept apart.
#[inline]
pub fn speed_sign(v: f64) -> i32 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// `out = δ f` along `axis` on one periodic plane.
pub fn apply_delta(
    f: &[f64],
    grid: &Grid2D,
    axis: Axis,
    sign: i32,
    op: &StencilOperator,
    out: &mut [f64],
) {
    let taps: Vec<(isize, f64)> =
        op.alpha().map(|(k, a)| (sign as isize * k, sign as f64 * a)).collect();
    sweep(f, grid, axis, sign, &taps, out);
}

/// `out_i = f̂_{i+1/2}` along `axis` (face between node i and i+1).
pub fn face_fluxes(
    f: &[f64],
    grid: &Grid2D,
    axis: Axis,
    sign: i32,
    op: &StencilOperator,
    out: &mut [f64],
) {
    let shift = if sign < 0 { 1 } else { 0 };
    let taps: Vec<(isize, f64)> = op.beta().map(|(k, b)| (shift + sign as isize * k, b)).collect();
    sweep(f, grid, axis, sign, &taps, out);
}

/// `out(i,j) = Σ w·f(i+o, j)` (or along y) over periodic taps.
fn sweep(f: &[f64], grid: &Grid2D, axis: Axis, sign: i32, taps: &[(isize, f64)], out: &mut [f64]) {
    let (nx, ny) = (grid.nx, grid.ny);
    if sign == 0 {
        out.fill(0.0);
        return;
    }
    match axis {
        Axis::X => {
            let mut buf = vec![0.0; nx + 2 * PAD];
            for j in 0..ny {
                let row = &f[j * nx..(j + 1) * nx];
                fill_padded(row, &mut buf);
                let dst = &mut out[j * nx..(j + 1) * nx];
                dst.fill(0.0);
                for &(o, w) in taps {
                    let start = (PAD as isize + o) as usize;
                    for (d, s) in dst.iter_mut().zip(&buf[start..start + nx]) {
                        *d += w * s;
                    }
                }
            }
        }
        Axis::Y => {
            for j in 0..ny {
                let dst = &mut out[j * nx..(j + 1) * nx];
                dst.fill(0.0);
                for &(o, w) in taps {
                    let jj = wrap(j as isize + o, ny);
                    for (d, s) in dst.iter_mut().zip(&f[jj * nx..(jj + 1) * nx]) {
                        *d += w * s;
                    }
                }
            }
        }
    }
}

fn fill_padded(row: &[f64], buf: &mut [f64]) {
    let n = row.len();
    buf[PAD..PAD + n].copy_from_slice(row);
    for g in 0..PAD {
        buf[PAD - 1 - g] = row[wrap(-1 - g as isize, n)];
        buf[PAD + n + g] = row[wrap((n + g) as isize, n)];
    }
}

/// Face flux `f̂` at the face after node `(i, j)` along `axis`.
#[inline]
pub fn face_flux_at(
    f: &[f64],
    grid: &Grid2D,
    axis: Axis,
    sign: i32,
    op: &StencilOperator,
    i: usize,
    j: usize,
) -> f64 {
    if sign == 0 {
        return 0.0;
    }
    let shift = if sign < 0 { 1 } else { 0 };
    let mut s = 0.0;
    for (k, b) in op.beta() {
        let o = shift + sign as isize * k;
        let v = match axis {
            Axis::X => f[grid.node(wrap(i as isize + o, grid.nx), j)],
            Axis::Y => f[grid.node(i, wrap(j as isize + o, grid.ny))],
        };
        s += b * v;
    }
    s
}

/// Corners of a quad, named by their position in it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corner {
    /// Node `(i, j)`; the quad lies north-east of it.
    SouthWest,
    /// Node `(i+1, j)`.
    SouthEast,
    /// Node `(i+1, j+1)`.
    NorthEast,
    /// Node `(i, j+1)`.
    NorthWest,
}

impl Corner {
    pub const ALL: [Corner; 4] =
        [Corner::SouthWest, Corner::SouthEast, Corner::NorthEast, Corner::NorthWest];

    /// Node offset of the corner relative to the quad's lower-left node.
    pub fn offset(self) -> (usize, usize) {
        match self {
            Corner::SouthWest => (0, 0),
            Corner::SouthEast => (1, 0),
            Corner::NorthEast => (1, 1),
            Corner::NorthWest => (0, 1),
        }
    }
}

/// Residuals of the quad `[i, i+1]×[j, j+1]` for one scalar wave with
/// speeds `(lx, ly)`, ordered as [`Corner::ALL`].
///
/// Each corner keeps half of the flux difference across the two half-edges
/// it touches, so that the four residuals around a node sum to
/// `Δy·lx·(f̂_{i+1/2} − f̂_{i−1/2}) + Δx·ly·(f̂_{j+1/2} − f̂_{j−1/2})`.
pub fn corner_residuals(
    f: &[f64],
    grid: &Grid2D,
    (lx, ly): (f64, f64),
    (i, j): (usize, usize),
    op: &StencilOperator,
) -> [f64; 4] {
    let (sx, sy) = (speed_sign(lx), speed_sign(ly));
    let (dx, dy) = (grid.dx(), grid.dy());
    let i1 = wrap(i as isize + 1, grid.nx);
    let j1 = wrap(j as isize + 1, grid.ny);
    let f00 = f[grid.node(i, j)];
    let f10 = f[grid.node(i1, j)];
    let f11 = f[grid.node(i1, j1)];
    let f01 = f[grid.node(i, j1)];
    // horizontal half-edges: bottom (row j), top (row j+1)
    let hb = face_flux_at(f, grid, Axis::X, sx, op, i, j);
    let ht = face_flux_at(f, grid, Axis::X, sx, op, i, j1);
    // vertical half-edges: left (column i), right (column i+1)
    let vl = face_flux_at(f, grid, Axis::Y, sy, op, i, j);
    let vr = face_flux_at(f, grid, Axis::Y, sy, op, i1, j);
    let (ax, ay) = (0.5 * lx * dy, 0.5 * ly * dx);
    [
        ax * (hb - f00) + ay * (vl - f00),
        ax * (f10 - hb) + ay * (vr - f10),
        ax * (f11 - ht) + ay * (f11 - vr),
        ax * (ht - f01) + ay * (f01 - vl),
    ]
}
