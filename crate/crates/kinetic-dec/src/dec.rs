//! Defect-correction time stepping of the relaxation system.
//!
//! One step from `f^n` builds sub-node stages `F = (f^{n,1}, …, f^{n,M})`
//! and applies `R` corrections. Each correction first updates the
//! macroscopic stages explicitly (the projection kills the source), then
//! solves the small `M×M` system `(I + ηW) F = …` node by node, with
//! `η = Δt/ε`. The step is explicit for every ε.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{Field, Grid2D};
use crate::kinetic::{project_into, KineticModel};
use crate::systems::ConservationLaw;
use crate::{Error, Result};

/// Sub-node weights of the time quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureTable {
    order: usize,
    beta: Vec<f64>,
    /// Row-major `M×M`.
    w: Vec<f64>,
    w0: Vec<f64>,
}

impl QuadratureTable {
    pub fn new(order: usize) -> Result<Self> {
        let (beta, w, w0) = match order {
            1 => (vec![1.0], vec![1.0], vec![0.0]),
            2 => (vec![1.0], vec![0.5], vec![0.5]),
            4 => (
                vec![0.5, 1.0],
                vec![1.0 / 3.0, -1.0 / 24.0, 2.0 / 3.0, 1.0 / 6.0],
                vec![5.0 / 24.0, 1.0 / 6.0],
            ),
            _ => return Err(Error::InvalidConfig("time order must be 1, 2 or 4")),
        };
        Ok(Self { order, beta, w, w0 })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of sub-nodes M.
    pub fn substeps(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn w(&self, p: usize, q: usize) -> f64 {
        self.w[p * self.substeps() + q]
    }

    pub fn w0(&self) -> &[f64] {
        &self.w0
    }

    /// `(I + ηW)^{-1}` and `η(I + ηW)^{-1}W`, both row-major.
    pub fn solve_matrices(&self, eta: f64) -> ([f64; 4], [f64; 4]) {
        let m = self.substeps();
        if m == 1 {
            let a = 1.0 / (1.0 + eta * self.w[0]);
            return ([a, 0.0, 0.0, 0.0], [eta * self.w[0] * a, 0.0, 0.0, 0.0]);
        }
        let (p, q, r, s) = (
            1.0 + eta * self.w[0],
            eta * self.w[1],
            eta * self.w[2],
            1.0 + eta * self.w[3],
        );
        let det = p * s - q * r;
        let a = [s / det, -q / det, -r / det, p / det];
        let ew = [eta * self.w[0], eta * self.w[1], eta * self.w[2], eta * self.w[3]];
        let b = [
            a[0] * ew[0] + a[1] * ew[2],
            a[0] * ew[1] + a[1] * ew[3],
            a[2] * ew[0] + a[3] * ew[2],
            a[2] * ew[1] + a[3] * ew[3],
        ];
        (a, b)
    }
}

/// Spatial part of the kinetic system: `out = Λx δx f/Δx + Λy δy f/Δy`.
pub trait Transport {
    fn apply(&self, f: &Field, out: &mut Field);
}

/// Step storage: the state at `t_n`, the stages and cached transports.
#[derive(Debug, Clone)]
pub struct DecWorkspace {
    table: QuadratureTable,
    f0: Field,
    stages: Vec<Field>,
    /// Transport of `f0`.
    s0: Field,
    /// Transport of each stage at the current correction.
    s: Vec<Field>,
    /// `M(P f0) − f0`.
    src0: Field,
    rhs: Vec<Field>,
    u0: Field,
    /// Projected transports, scratch.
    ps: Field,
    ustage: Vec<Field>,
    k: usize,
}

impl DecWorkspace {
    pub fn new(table: QuadratureTable, grid: Grid2D, waves: usize, k: usize) -> Self {
        let m = table.substeps();
        let kin = Field::zeros(grid, waves * k);
        let mac = Field::zeros(grid, k);
        Self {
            table,
            f0: kin.clone(),
            stages: vec![kin.clone(); m],
            s0: kin.clone(),
            s: vec![kin.clone(); m],
            src0: kin.clone(),
            rhs: vec![kin; m],
            u0: mac.clone(),
            ps: mac.clone(),
            ustage: vec![mac; m],
            k,
        }
    }

    pub fn table(&self) -> &QuadratureTable {
        &self.table
    }

    pub fn f0(&self) -> &Field {
        &self.f0
    }

    pub fn stages(&self) -> &[Field] {
        &self.stages
    }

    pub fn stages_mut(&mut self) -> &mut [Field] {
        &mut self.stages
    }

    /// The accepted solution: last sub-node of the latest correction.
    pub fn result(&self) -> &Field {
        &self.stages[self.stages.len() - 1]
    }

    /// Installs `f^n`, evaluates the quantities frozen over the step and
    /// sets every stage to `f^n`.
    pub fn begin<S: ConservationLaw>(
        &mut self,
        f: &Field,
        model: &KineticModel<S>,
        transport: &dyn Transport,
    ) -> Result<()> {
        if f.ncomp() != self.f0.ncomp() || f.grid() != self.f0.grid() {
            return Err(Error::ShapeMismatch);
        }
        self.f0.as_mut_slice().copy_from_slice(f.as_slice());
        transport.apply(&self.f0, &mut self.s0);
        project_into(&self.f0, self.k, &mut self.u0);
        equilibrium_into(model, &self.u0, &mut self.src0);
        for (s, f) in self.src0.as_mut_slice().iter_mut().zip(self.f0.as_slice()) {
            *s -= f;
        }
        self.reset_stages();
        Ok(())
    }

    pub fn reset_stages(&mut self) {
        for st in &mut self.stages {
            st.as_mut_slice().copy_from_slice(self.f0.as_slice());
        }
    }
}

fn equilibrium_into<S: ConservationLaw>(model: &KineticModel<S>, u: &Field, out: &mut Field) {
    let k = model.ncomp();
    let mut un = vec![0.0; k];
    let mut m = vec![0.0; model.waves() * k];
    for node in 0..u.grid().nodes() {
        u.node_values(node, &mut un);
        model.maxwellian(&un, &mut m);
        out.set_node(node, &m);
    }
}

/// One correction `F^{(r)} → F^{(r+1)}` on the stages held by `ws`.
pub fn dec_correction<S: ConservationLaw>(
    ws: &mut DecWorkspace,
    model: &KineticModel<S>,
    transport: &dyn Transport,
    dt: f64,
    eps: f64,
) {
    let m = ws.table.substeps();
    let k = ws.k;
    let eta = dt / eps;
    for q in 0..m {
        transport.apply(&ws.stages[q], &mut ws.s[q]);
    }
    // Macroscopic stages, explicit because P kills the source.
    for p in 0..m {
        let up = ws.ustage[p].as_mut_slice();
        up.copy_from_slice(ws.u0.as_slice());
        project_into(&ws.s0, k, &mut ws.ps);
        let c0 = dt * ws.table.w0[p];
        for (u, s) in ws.ustage[p].as_mut_slice().iter_mut().zip(ws.ps.as_slice()) {
            *u -= c0 * s;
        }
        for q in 0..m {
            project_into(&ws.s[q], k, &mut ws.ps);
            let c = dt * ws.table.w(p, q);
            for (u, s) in ws.ustage[p].as_mut_slice().iter_mut().zip(ws.ps.as_slice()) {
                *u -= c * s;
            }
        }
    }
    // Right-hand sides without the new equilibrium.
    for p in 0..m {
        let c0 = dt * ws.table.w0[p];
        let e0 = eta * ws.table.w0[p];
        let rhs = ws.rhs[p].as_mut_slice();
        for (idx, r) in rhs.iter_mut().enumerate() {
            *r = ws.f0.as_slice()[idx] - c0 * ws.s0.as_slice()[idx]
                + e0 * ws.src0.as_slice()[idx];
        }
        for q in 0..m {
            let c = dt * ws.table.w(p, q);
            for (r, s) in rhs.iter_mut().zip(ws.s[q].as_slice()) {
                *r -= c * s;
            }
        }
    }
    // F = A·rhs + B·M(u), node by node.
    let (a, b) = ws.table.solve_matrices(eta);
    let nk = model.waves() * k;
    let mut un = vec![0.0; k];
    let mut meq = vec![0.0; m * nk];
    let nodes = ws.f0.grid().nodes();
    for node in 0..nodes {
        for p in 0..m {
            ws.ustage[p].node_values(node, &mut un);
            model.maxwellian(&un, &mut meq[p * nk..(p + 1) * nk]);
        }
        for p in 0..m {
            let st = ws.stages[p].as_mut_slice();
            for c in 0..nk {
                let idx = c * nodes + node;
                let mut v = 0.0;
                for q in 0..m {
                    v += a[p * 2 + q] * ws.rhs[q].as_slice()[idx] + b[p * 2 + q] * meq[q * nk + c];
                }
                st[idx] = v;
            }
        }
    }
}

/// Full step: `R` corrections from `F^{(0)} = (f^n, …, f^n)`.
pub fn dec_step<S: ConservationLaw>(
    ws: &mut DecWorkspace,
    model: &KineticModel<S>,
    transport: &dyn Transport,
    f: &Field,
    dt: f64,
    eps: f64,
    iterations: usize,
) -> Result<()> {
    if !(dt > 0.0) || !(eps > 0.0) {
        return Err(Error::InvalidConfig("dt and eps must be positive"));
    }
    ws.begin(f, model, transport)?;
    for _ in 0..iterations {
        dec_correction(ws, model, transport, dt, eps);
    }
    Ok(())
}

/// High-order defect of stage `q` (0-based sub-node index):
/// `f^{q} − f^{0} + Δt Σ_k w_qk T(f^k) − (Δt/ε) Σ_k w_qk (M(Pf^k) − f^k)`,
/// the sum running over `t_n` and every sub-node.
pub fn l2_residual<S: ConservationLaw>(
    ws: &DecWorkspace,
    model: &KineticModel<S>,
    transport: &dyn Transport,
    dt: f64,
    eps: f64,
    q: usize,
) -> Field {
    let m = ws.table.substeps();
    let grid = *ws.f0.grid();
    let nk = ws.f0.ncomp();
    let eta = dt / eps;
    let mut out = ws.stages[q].clone();
    for (o, f) in out.as_mut_slice().iter_mut().zip(ws.f0.as_slice()) {
        *o -= f;
    }
    let mut t = Field::zeros(grid, nk);
    let mut u = Field::zeros(grid, ws.k);
    let mut eq = Field::zeros(grid, nk);
    let mut add = |w: f64, f: &Field, out: &mut Field| {
        transport.apply(f, &mut t);
        project_into(f, ws.k, &mut u);
        equilibrium_into(model, &u, &mut eq);
        for (idx, o) in out.as_mut_slice().iter_mut().enumerate() {
            let src = eq.as_slice()[idx] - f.as_slice()[idx];
            *o += dt * w * t.as_slice()[idx] - eta * w * src;
        }
    };
    add(ws.table.w0[q], &ws.f0, &mut out);
    for k in 0..m {
        add(ws.table.w(q, k), &ws.stages[k], &mut out);
    }
    out
}

/// `Δt = cfl · min(Δx, Δy) / λ`.
pub fn dt_from_cfl(grid: &Grid2D, lambda: f64, cfl: f64) -> Result<f64> {
    if !(lambda > 0.0) || !(cfl > 0.0) {
        return Err(Error::InvalidConfig("lambda and cfl must be positive"));
    }
    Ok(cfl * grid.dx().min(grid.dy()) / lambda)
}
