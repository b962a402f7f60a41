//! Von Neumann analysis of the DeC scheme applied to linear transport.
//!
//! A Fourier mode `e^{i(jθ₁ + kθ₂)}` of `f_t + a f_x + b f_y = 0` sees the
//! discrete operator as multiplication by `−g/Δt` with
//! `g = μ g^{(p)}(θ₁) + ν g^{(p)}(θ₂)`, `μ = aΔt/Δx`, `ν = bΔt/Δy`. One step
//! multiplies the mode by the amplification factor `G(g)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::dec::QuadratureTable;
use crate::par::max_over;
use crate::space::named_operator;
use crate::{Error, Result};

const POLE_TOL: f64 = 1e-14;

fn cis(t: f64) -> Complex64 {
    Complex64::new(libm::cos(t), libm::sin(t))
}

/// Symbol `g^{(k)}(θ) = Σ_m α_m e^{imθ}` of the order-`k` operator.
pub fn symbol(k: usize, theta: f64) -> Result<Complex64> {
    let e1 = cis(-theta);
    let e2 = cis(-2.0 * theta);
    let e3 = cis(-3.0 * theta);
    let ep = cis(theta);
    let one = Complex64::new(1.0, 0.0);
    Ok(match k {
        1 => one - e1,
        2 => 1.5 * one - 2.0 * e1 + 0.5 * e2,
        3 => e2 / 6.0 - e1 + 0.5 * one + ep / 3.0,
        4 => -e3 / 12.0 + 0.5 * e2 - 1.5 * e1 + (5.0 / 6.0) * one + 0.25 * ep,
        _ => return Err(Error::InvalidConfig("symbol order must be 1, 2, 3 or 4")),
    })
}

/// `max_θ |g^{(k)}(θ)|` over `n` equispaced phases.
pub fn symbol_max(k: usize, n: usize) -> Result<f64> {
    symbol(k, 0.0)?;
    Ok(max_over(n, |m| symbol(k, 2.0 * PI * m as f64 / n as f64).map(|g| g.norm()).unwrap_or(f64::NAN)))
}

/// Amplification factor: scalar for one-stage schemes, one value per
/// substep for the order-4 scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplification {
    Scalar(Complex64),
    Pair([Complex64; 2]),
}

impl Amplification {
    /// Largest component modulus.
    pub fn modulus(&self) -> f64 {
        match self {
            Self::Scalar(z) => z.norm(),
            Self::Pair([a, b]) => a.norm().max(b.norm()),
        }
    }

    fn components(&self) -> ([Complex64; 2], usize) {
        match *self {
            Self::Scalar(z) => ([z, Complex64::new(0.0, 0.0)], 1),
            Self::Pair(p) => (p, 2),
        }
    }

    /// Largest componentwise distance.
    pub fn distance(&self, other: &Self) -> f64 {
        let (a, n) = self.components();
        let (b, m) = other.components();
        assert_eq!(n, m, "amplification shapes differ");
        (0..n).map(|k| (a[k] - b[k]).norm()).fold(0.0, f64::max)
    }
}

/// Amplification of the converged (fully implicit collocation) scheme.
pub fn amp_exact(order: usize, g: Complex64) -> Result<Amplification> {
    let one = Complex64::new(1.0, 0.0);
    match order {
        1 => {
            let d = one + g;
            if d.norm() < POLE_TOL {
                return Err(Error::Pole);
            }
            Ok(Amplification::Scalar(one / d))
        }
        2 => {
            let d = one + g / 2.0;
            if d.norm() < POLE_TOL {
                return Err(Error::Pole);
            }
            Ok(Amplification::Scalar((one - g / 2.0) / d))
        }
        4 => {
            let th = 24.0 * one + 12.0 * g + 2.0 * g * g;
            if th.norm() < POLE_TOL {
                return Err(Error::Pole);
            }
            Ok(Amplification::Pair([(24.0 * one - g * g) / th, (24.0 * one - 12.0 * g + 2.0 * g * g) / th]))
        }
        _ => Err(Error::InvalidConfig("time order must be 1, 2 or 4")),
    }
}

/// Iteration matrix `W` and start weights `w0` of a time order.
#[derive(Debug, Clone, Copy)]
pub struct DecRecursion {
    n: usize,
    w: [[f64; 2]; 2],
    w0: [f64; 2],
}

impl DecRecursion {
    pub fn new(order: usize) -> Result<Self> {
        let t = QuadratureTable::new(order)?;
        let n = t.substeps();
        let mut w = [[0.0; 2]; 2];
        let mut w0 = [0.0; 2];
        for p in 0..n {
            w0[p] = t.w0()[p];
            for q in 0..n {
                w[p][q] = t.w(p, q);
            }
        }
        Ok(Self { n, w, w0 })
    }

    /// `G_{r+1} = 1 − g w0 − g W G_r` from `G_0 = 1`.
    pub fn eval(&self, iterations: usize, g: Complex64) -> Amplification {
        let one = Complex64::new(1.0, 0.0);
        let mut cur = [one; 2];
        for _ in 0..iterations {
            let mut next = [one; 2];
            for p in 0..self.n {
                let mut acc = self.w0[p] * one;
                for q in 0..self.n {
                    acc += self.w[p][q] * cur[q];
                }
                next[p] = one - g * acc;
            }
            cur = next;
        }
        if self.n == 1 {
            Amplification::Scalar(cur[0])
        } else {
            Amplification::Pair(cur)
        }
    }

    /// `(−gW)^{r}(1 − G)` applied to the converged factor.
    pub fn defect(&self, iterations: usize, g: Complex64, exact: &Amplification) -> Amplification {
        let one = Complex64::new(1.0, 0.0);
        let (e, _) = exact.components();
        let mut v = [one - e[0], one - e[1]];
        for _ in 0..iterations {
            let mut next = [Complex64::new(0.0, 0.0); 2];
            for p in 0..self.n {
                for q in 0..self.n {
                    next[p] -= g * self.w[p][q] * v[q];
                }
            }
            v = next;
        }
        if self.n == 1 {
            Amplification::Scalar(v[0])
        } else {
            Amplification::Pair(v)
        }
    }
}

/// Amplification after `iterations` corrections.
pub fn amp_dec(order: usize, iterations: usize, g: Complex64) -> Result<Amplification> {
    Ok(DecRecursion::new(order)?.eval(iterations, g))
}

/// Search for the largest stable CFL number `c` with `μ = ν = c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflSearch {
    pub time_order: usize,
    pub space_x: usize,
    pub space_y: usize,
    pub iterations: usize,
    /// Allowed excess of `|G|` over 1.
    pub tol: f64,
    /// Phases per direction.
    pub n_theta: usize,
    /// Freeze `θ₂ = 0`.
    pub one_d: bool,
    /// Coarse search increment.
    pub step: f64,
    /// Bisection width.
    pub resolution: f64,
    /// Search ceiling.
    pub c_max: f64,
}

impl CflSearch {
    pub fn new(time_order: usize, space_order: usize, iterations: usize) -> Self {
        Self {
            time_order,
            space_x: space_order,
            space_y: space_order,
            iterations,
            tol: 1e-10,
            n_theta: 1024,
            one_d: false,
            step: 0.05,
            resolution: 1e-3,
            c_max: 20.0,
        }
    }

    pub fn one_d(mut self) -> Self {
        self.one_d = true;
        self
    }

    fn symbols(&self, k: usize) -> Result<Vec<Complex64>> {
        named_operator(k)?;
        (0..self.n_theta).map(|m| symbol(k, 2.0 * PI * m as f64 / self.n_theta as f64)).collect()
    }

    /// `max |G|` over the phase grid at CFL `c`.
    pub fn peak(&self, c: f64) -> Result<f64> {
        let rec = DecRecursion::new(self.time_order)?;
        let sx = self.symbols(self.space_x)?;
        let sy = if self.one_d { alloc::vec![Complex64::new(0.0, 0.0)] } else { self.symbols(self.space_y)? };
        Ok(self.peak_with(&rec, &sx, &sy, c))
    }

    fn peak_with(&self, rec: &DecRecursion, sx: &[Complex64], sy: &[Complex64], c: f64) -> f64 {
        let r = self.iterations;
        let ny = sy.len();
        max_over(sx.len() * ny, |k| rec.eval(r, c * (sx[k / ny] + sy[k % ny])).modulus())
    }

    pub fn run(&self) -> Result<f64> {
        if self.n_theta < 4 || !(self.step > 0.0) || !(self.resolution > 0.0) || !(self.tol >= 0.0) {
            return Err(Error::InvalidConfig("bad CFL search parameters"));
        }
        let rec = DecRecursion::new(self.time_order)?;
        let sx = self.symbols(self.space_x)?;
        let sy = if self.one_d { alloc::vec![Complex64::new(0.0, 0.0)] } else { self.symbols(self.space_y)? };
        let stable = |c: f64| self.peak_with(&rec, &sx, &sy, c) <= 1.0 + self.tol;
        let mut lo = 0.0;
        let mut hi = self.step;
        while stable(hi) {
            lo = hi;
            hi += self.step;
            if hi > self.c_max {
                return Ok(self.c_max);
            }
        }
        while hi - lo > self.resolution {
            let mid = 0.5 * (lo + hi);
            if stable(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }
}

/// Largest stable CFL of DeC(`time_order`, `iterations`) with the
/// order-`space_x`/`space_y` operators, on a 1024² phase grid.
pub fn max_cfl(time_order: usize, space_x: usize, space_y: usize, iterations: usize, tol: f64) -> Result<f64> {
    CflSearch { space_x, space_y, tol, ..CflSearch::new(time_order, space_x, iterations) }.run()
}

/// Same with `θ₂ = 0`.
pub fn max_cfl_1d(time_order: usize, space_order: usize, iterations: usize, tol: f64) -> Result<f64> {
    CflSearch { tol, ..CflSearch::new(time_order, space_order, iterations).one_d() }.run()
}

/// One sample of `|G|` on the complex `g` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterCell {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
}

/// `|G_r(g)|` sampled on an `n × n` grid over `re × im` (row-major in im).
pub fn stability_raster(
    time_order: usize,
    iterations: usize,
    re: (f64, f64),
    im: (f64, f64),
    n: usize,
) -> Result<Vec<RasterCell>> {
    if n < 2 {
        return Err(Error::InvalidConfig("raster needs at least 2 samples per axis"));
    }
    let rec = DecRecursion::new(time_order)?;
    let at = |(a, b): (f64, f64), k: usize| a + (b - a) * k as f64 / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let g = Complex64::new(at(re, i), at(im, j));
            out.push(RasterCell { re: g.re, im: g.im, modulus: rec.eval(iterations, g).modulus() });
        }
    }
    Ok(out)
}
