//! Macroscopic conservation laws `u_t + A1(u)_x + A2(u)_y = 0`.

use core::f64::consts::PI;

use crate::{Error, Result};

pub trait ConservationLaw: Sync + Send {
    /// Number of conserved components K.
    fn ncomp(&self) -> usize;
    fn flux_x(&self, u: &[f64], out: &mut [f64]);
    fn flux_y(&self, u: &[f64], out: &mut [f64]);
    /// Bound on the characteristic speeds along either axis.
    fn max_speed(&self, u: &[f64]) -> Result<f64>;
    fn admissible(&self, u: &[f64]) -> bool;
    fn to_primitive(&self, u: &[f64], v: &mut [f64]);
    fn from_primitive(&self, v: &[f64], u: &mut [f64]);
    fn conserved_names(&self) -> &'static [&'static str];
    fn primitive_names(&self) -> &'static [&'static str];
    /// A generic admissible state with non-trivial fluxes, used to probe
    /// kinetic models at construction.
    fn probe_state(&self, out: &mut [f64]);
}

/// Unit-speed scalar advection, `A1(u) = A2(u) = u`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Advection;

impl ConservationLaw for Advection {
    fn ncomp(&self) -> usize {
        1
    }
    fn flux_x(&self, u: &[f64], out: &mut [f64]) {
        out[0] = u[0];
    }
    fn flux_y(&self, u: &[f64], out: &mut [f64]) {
        out[0] = u[0];
    }
    fn max_speed(&self, u: &[f64]) -> Result<f64> {
        if u[0].is_finite() {
            Ok(1.0)
        } else {
            Err(Error::NotAdmissible { node: 0 })
        }
    }
    fn admissible(&self, u: &[f64]) -> bool {
        u[0].is_finite()
    }
    fn to_primitive(&self, u: &[f64], v: &mut [f64]) {
        v[0] = u[0];
    }
    fn from_primitive(&self, v: &[f64], u: &mut [f64]) {
        u[0] = v[0];
    }
    fn conserved_names(&self) -> &'static [&'static str] {
        &["u"]
    }
    fn primitive_names(&self) -> &'static [&'static str] {
        &["u"]
    }
    fn probe_state(&self, out: &mut [f64]) {
        out[0] = 0.7;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerParams {
    pub gamma: f64,
}

impl Default for EulerParams {
    fn default() -> Self {
        Self { gamma: 1.4 }
    }
}

/// Compressible Euler, conserved `(ρ, ρvx, ρvy, E)`, primitive `(ρ, vx, vy, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Euler {
    gamma: f64,
}

impl Euler {
    pub fn new(p: EulerParams) -> Result<Self> {
        if !(p.gamma > 1.0) || !p.gamma.is_finite() {
            return Err(Error::InvalidConfig("gamma must exceed 1"));
        }
        Ok(Self { gamma: p.gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    pub fn pressure(&self, u: &[f64]) -> f64 {
        (self.gamma - 1.0) * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0])
    }
}

impl ConservationLaw for Euler {
    fn ncomp(&self) -> usize {
        4
    }
    fn flux_x(&self, u: &[f64], out: &mut [f64]) {
        let p = self.pressure(u);
        let vx = u[1] / u[0];
        out[0] = u[1];
        out[1] = u[1] * vx + p;
        out[2] = u[2] * vx;
        out[3] = (u[3] + p) * vx;
    }
    fn flux_y(&self, u: &[f64], out: &mut [f64]) {
        let p = self.pressure(u);
        let vy = u[2] / u[0];
        out[0] = u[2];
        out[1] = u[1] * vy;
        out[2] = u[2] * vy + p;
        out[3] = (u[3] + p) * vy;
    }
    fn max_speed(&self, u: &[f64]) -> Result<f64> {
        if !self.admissible(u) {
            return Err(Error::NotAdmissible { node: 0 });
        }
        let c = libm::sqrt(self.gamma * self.pressure(u) / u[0]);
        let v = libm::fabs(u[1] / u[0]).max(libm::fabs(u[2] / u[0]));
        Ok(v + c)
    }
    fn admissible(&self, u: &[f64]) -> bool {
        if !u[..4].iter().all(|x| x.is_finite()) || !(u[0] > 0.0) {
            return false;
        }
        let p = self.pressure(u);
        p > 0.0 && p.is_finite()
    }
    fn to_primitive(&self, u: &[f64], v: &mut [f64]) {
        v[0] = u[0];
        v[1] = u[1] / u[0];
        v[2] = u[2] / u[0];
        v[3] = self.pressure(u);
    }
    fn from_primitive(&self, v: &[f64], u: &mut [f64]) {
        u[0] = v[0];
        u[1] = v[0] * v[1];
        u[2] = v[0] * v[2];
        u[3] = v[3] / (self.gamma - 1.0) + 0.5 * v[0] * (v[1] * v[1] + v[2] * v[2]);
    }
    fn conserved_names(&self) -> &'static [&'static str] {
        &["rho", "mx", "my", "E"]
    }
    fn primitive_names(&self) -> &'static [&'static str] {
        &["rho", "vx", "vy", "p"]
    }
    fn probe_state(&self, out: &mut [f64]) {
        self.from_primitive(&[1.3, 0.4, -0.7, 2.1], out);
    }
}

/// Runtime choice between the two systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum System {
    Advection(Advection),
    Euler(Euler),
}

impl System {
    pub fn advection() -> Self {
        System::Advection(Advection)
    }

    pub fn euler(p: EulerParams) -> Result<Self> {
        Euler::new(p).map(System::Euler)
    }
}

macro_rules! delegate {
    ($self:ident, $s:ident => $e:expr) => {
        match $self {
            System::Advection($s) => $e,
            System::Euler($s) => $e,
        }
    };
}

impl ConservationLaw for System {
    fn ncomp(&self) -> usize {
        delegate!(self, s => s.ncomp())
    }
    fn flux_x(&self, u: &[f64], out: &mut [f64]) {
        delegate!(self, s => s.flux_x(u, out))
    }
    fn flux_y(&self, u: &[f64], out: &mut [f64]) {
        delegate!(self, s => s.flux_y(u, out))
    }
    fn max_speed(&self, u: &[f64]) -> Result<f64> {
        delegate!(self, s => s.max_speed(u))
    }
    fn admissible(&self, u: &[f64]) -> bool {
        delegate!(self, s => s.admissible(u))
    }
    fn to_primitive(&self, u: &[f64], v: &mut [f64]) {
        delegate!(self, s => s.to_primitive(u, v))
    }
    fn from_primitive(&self, v: &[f64], u: &mut [f64]) {
        delegate!(self, s => s.from_primitive(v, u))
    }
    fn conserved_names(&self) -> &'static [&'static str] {
        delegate!(self, s => s.conserved_names())
    }
    fn primitive_names(&self) -> &'static [&'static str] {
        delegate!(self, s => s.primitive_names())
    }
    fn probe_state(&self, out: &mut [f64]) {
        delegate!(self, s => s.probe_state(out))
    }
}

/// Free-stream y-velocity of the isentropic vortex.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum VortexDrift {
    /// `√2/2`, the value used inside the velocity formula.
    #[default]
    Sqrt2Half,
    /// `√3/2`.
    Sqrt3Half,
}

impl VortexDrift {
    pub fn value(self) -> f64 {
        match self {
            VortexDrift::Sqrt2Half => core::f64::consts::FRAC_1_SQRT_2,
            VortexDrift::Sqrt3Half => 0.5 * libm::sqrt(3.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexParams {
    pub gamma: f64,
    pub beta: f64,
    pub drift: VortexDrift,
    /// The domain is `[-half_width, half_width]²`.
    pub half_width: f64,
}

impl Default for VortexParams {
    fn default() -> Self {
        Self { gamma: 1.4, beta: 5.0, drift: VortexDrift::default(), half_width: 10.0 }
    }
}

impl VortexParams {
    pub fn free_stream(&self) -> (f64, f64) {
        (1.0, self.drift.value())
    }
}

/// Exact primitive state `(ρ, vx, vy, p)` of the translating vortex.
pub fn vortex_exact(x: f64, y: f64, t: f64, prm: &VortexParams) -> [f64; 4] {
    let (vx_inf, vy_inf) = prm.free_stream();
    let l = 2.0 * prm.half_width;
    let xc = periodic_shift(t * vx_inf, prm.half_width);
    let yc = periodic_shift(t * vy_inf, prm.half_width);
    // Minimum-image displacement so the vortex re-enters across the boundary.
    let dx = periodic_shift(x - xc, l / 2.0);
    let dy = periodic_shift(y - yc, l / 2.0);
    let r2 = dx * dx + dy * dy;
    let g = prm.gamma;
    let b = prm.beta;
    let e = libm::exp(0.5 * (1.0 - r2));
    let rho = libm::pow(1.0 - (g - 1.0) * b * b * e * e / (32.0 * g * PI * PI), 1.0 / (g - 1.0));
    let vx = vx_inf - b / (4.0 * PI) * e * dy;
    let vy = vy_inf + b / (4.0 * PI) * e * dx;
    [rho, vx, vy, libm::pow(rho, g)]
}

/// Wraps `s` into `[-h, h)`.
fn periodic_shift(s: f64, h: f64) -> f64 {
    let l = 2.0 * h;
    let w = s + h;
    w - l * libm::floor(w / l) - h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn euler() -> Euler {
        Euler::new(EulerParams::default()).unwrap()
    }

    #[test]
    fn advection_examples() {
        let a = Advection;
        let mut o = [0.0];
        a.flux_x(&[0.7], &mut o);
        assert_eq!(o[0], 0.7);
        a.flux_y(&[-2.0], &mut o);
        assert_eq!(o[0], -2.0);
        assert_eq!(a.max_speed(&[123.0]).unwrap(), 1.0);
    }

    #[test]
    fn euler_rest_and_moving() {
        let e = euler();
        let mut f = [0.0; 4];
        let rest = [1.0, 0.0, 0.0, 1.0 / 0.4];
        assert_relative_eq!(e.pressure(&rest), 1.0, epsilon = 1e-15);
        e.flux_x(&rest, &mut f);
        assert_relative_eq!(f[1], 1.0, epsilon = 1e-15);
        assert_eq!((f[0], f[2], f[3]), (0.0, 0.0, 0.0));
        e.flux_y(&rest, &mut f);
        assert_relative_eq!(f[2], 1.0, epsilon = 1e-15);
        assert_eq!((f[0], f[1], f[3]), (0.0, 0.0, 0.0));

        let moving = [1.0, 1.0, 0.0, 0.5 + 1.0 / 0.4];
        e.flux_x(&moving, &mut f);
        for (a, b) in f.iter().zip([1.0, 2.0, 0.0, 4.0]) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
        assert!(!e.admissible(&[-1.0, 0.0, 0.0, 1.0]));
        assert!(e.max_speed(&[-1.0, 0.0, 0.0, 1.0]).is_err());
        assert!(Euler::new(EulerParams { gamma: 1.0 }).is_err());
    }

    fn random_state(rng: &mut impl Rng, e: &Euler) -> [f64; 4] {
        let v = [
            rng.gen_range(0.05..5.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(0.05..5.0),
        ];
        let mut u = [0.0; 4];
        e.from_primitive(&v, &mut u);
        u
    }

    #[test]
    fn primitive_round_trip() {
        let e = euler();
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..1000 {
            let u = random_state(&mut rng, &e);
            let mut v = [0.0; 4];
            let mut w = [0.0; 4];
            e.to_primitive(&u, &mut v);
            e.from_primitive(&v, &mut w);
            for k in 0..4 {
                assert_relative_eq!(u[k], w[k], max_relative = 1e-13, epsilon = 1e-13);
            }
        }
    }

    /// Largest eigenvalue modulus of a 4x4 matrix: characteristic
    /// polynomial by Faddeev-LeVerrier, roots by Durand-Kerner.
    fn spectral_radius(j: &[[f64; 4]; 4]) -> f64 {
        use num_complex::Complex64 as C;
        let mul = |a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]| {
            let mut q = [[0.0; 4]; 4];
            for r in 0..4 {
                for c in 0..4 {
                    q[r][c] = (0..4).map(|k| a[r][k] * b[k][c]).sum();
                }
            }
            q
        };
        // det(λI - J) = λ⁴ + c[1]λ³ + c[2]λ² + c[3]λ + c[4]
        let mut c = [1.0, 0.0, 0.0, 0.0, 0.0];
        let mut m = [[0.0; 4]; 4];
        for k in 1..=4 {
            let mut am = mul(j, &m);
            for d in 0..4 {
                am[d][d] += c[k - 1];
            }
            m = am;
            let jm = mul(j, &m);
            c[k] = -(0..4).map(|d| jm[d][d]).sum::<f64>() / k as f64;
        }
        let p = |z: C| (((z + c[1]) * z + c[2]) * z + c[3]) * z + c[4];
        let mut roots: [C; 4] = core::array::from_fn(|k| C::new(0.4, 0.9).powu(k as u32));
        for _ in 0..500 {
            for k in 0..4 {
                let mut den = C::new(1.0, 0.0);
                for l in 0..4 {
                    if l != k {
                        den *= roots[k] - roots[l];
                    }
                }
                roots[k] -= p(roots[k]) / den;
            }
        }
        roots.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn flux_jacobian_bounded_by_max_speed() {
        let e = euler();
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..1000 {
            let u = random_state(&mut rng, &e);
            let bound = e.max_speed(&u).unwrap();
            for axis in 0..2 {
                let mut jac = [[0.0; 4]; 4];
                for c in 0..4 {
                    let h = 1e-6 * u[c].abs().max(1.0);
                    let mut up = u;
                    let mut um = u;
                    up[c] += h;
                    um[c] -= h;
                    let (mut fp, mut fm) = ([0.0; 4], [0.0; 4]);
                    if axis == 0 {
                        e.flux_x(&up, &mut fp);
                        e.flux_x(&um, &mut fm);
                    } else {
                        e.flux_y(&up, &mut fp);
                        e.flux_y(&um, &mut fm);
                    }
                    for r in 0..4 {
                        jac[r][c] = (fp[r] - fm[r]) / (2.0 * h);
                    }
                }
                let rho = spectral_radius(&jac);
                assert!(rho <= bound * (1.0 + 1e-5), "radius {rho} exceeds bound {bound}");
            }
        }
    }

    #[test]
    fn vortex_far_field_and_centre() {
        let p = VortexParams::default();
        // The vortex perturbation decays like exp(-r²/2); at r = 9.9 it is
        // far below round-off.
        let s = vortex_exact(9.9, 0.0, 0.0, &p);
        assert_relative_eq!(s[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(s[1], 1.0, epsilon = 1e-15);
        assert_relative_eq!(s[2], p.drift.value(), epsilon = 1e-15);
        assert_relative_eq!(s[3], 1.0, epsilon = 1e-15);

        let c = vortex_exact(0.0, 0.0, 0.0, &p);
        let g = 1.4;
        let expect = (1.0 - (g - 1.0) * 25.0 * core::f64::consts::E / (32.0 * g * PI * PI))
            .powf(1.0 / (g - 1.0));
        assert_relative_eq!(c[0], expect, epsilon = 1e-15);
        assert_relative_eq!(c[3], c[0].powf(g), epsilon = 1e-15);
        assert_eq!(c[1], 1.0);
    }

    #[test]
    fn vortex_is_isentropic_and_periodic() {
        let p = VortexParams::default();
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..200 {
            let x = rng.gen_range(-10.0..10.0);
            let y = rng.gen_range(-10.0..10.0);
            let s = vortex_exact(x, y, 0.0, &p);
            assert_relative_eq!(s[3], s[0].powf(1.4), max_relative = 1e-15);
        }
        // With vy = vx the centre returns after one period of 20.
        let diag = VortexParams { drift: VortexDrift::Sqrt2Half, ..p };
        let a = vortex_exact(1.3, -0.4, 3.0, &diag);
        let b = vortex_exact(1.3 + 20.0, -0.4, 3.0, &diag);
        for k in 0..4 {
            assert_relative_eq!(a[k], b[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn vortex_translates_with_free_stream() {
        for drift in [VortexDrift::Sqrt2Half, VortexDrift::Sqrt3Half] {
            let p = VortexParams { drift, ..Default::default() };
            let t = 4.0;
            let a = vortex_exact(0.3, -0.2, 0.0, &p);
            let b = vortex_exact(0.3 + t, -0.2 + t * drift.value(), t, &p);
            for k in 0..4 {
                assert_relative_eq!(a[k], b[k], epsilon = 1e-12);
            }
        }
    }
}
