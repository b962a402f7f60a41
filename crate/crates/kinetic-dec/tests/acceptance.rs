//! Acceptance criteria 1 to 11. Run with
//! `cargo test -p kinetic-dec --test acceptance -- --nocapture`
//! to see the PASS/FAIL table; the test fails if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use kinetic_dec::cases::{convergence_study, exact_primitive, run, run_with, Case, ConvergenceRow, RunConfig};
use kinetic_dec::dec::{dec_correction, dt_from_cfl, l2_residual, DecWorkspace, QuadratureTable};
use kinetic_dec::fourier::{amp_dec, amp_exact, max_cfl_1d, symbol_max, Amplification, DecRecursion};
use kinetic_dec::grid::{Field, Grid2D};
use kinetic_dec::kinetic::KineticModel;
use kinetic_dec::solver::{SchemeConfig, Stabilizer};
use kinetic_dec::space::{apply_delta, face_fluxes, named_operator, Axis};
use kinetic_dec::stabilize::LimiterParams;
use kinetic_dec::systems::{Advection, ConservationLaw, Euler, EulerParams, VortexParams};
use kinetic_dec::transport::{KineticTransport, TransportMode};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

struct Line {
    id: &'static str,
    pass: bool,
    info: bool,
    detail: String,
}

fn line(id: &'static str, pass: bool, detail: String) -> Line {
    Line { id, pass, info: false, detail }
}

fn advection(t: usize, s: usize) -> RunConfig {
    let mut cfg = RunConfig::new(Case::Advection, 20);
    cfg.scheme = SchemeConfig::new(t, s);
    cfg.scheme.lambda_safety = Case::Advection.default_lambda_safety();
    cfg
}

fn finest(rows: &[ConvergenceRow]) -> [f64; 3] {
    let s = rows.last().unwrap().slopes.unwrap();
    [s.l1, s.l2, s.linf]
}

// h = 0.05, 0.025, 0.0125
const LADDER: [usize; 3] = [20, 40, 80];

fn criterion_1() -> Vec<Line> {
    let rows = convergence_study(&advection(2, 3), &LADDER).unwrap();
    let s = finest(&rows);
    let reference = [2.38, 2.35, 2.33];
    let ok = s.iter().all(|&v| v >= 1.9) && s.iter().zip(reference).all(|(a, b)| (a - b).abs() <= 0.35);
    let mut out =
        vec![line("1", ok, format!("advection DeC(2,3), order-3 stencil: finest slopes L1/L2/Linf = {s:.2?}"))];
    // The order-2 stencil is outside its linear stability range at CFL 1.
    let info = match convergence_study(&advection(2, 2), &LADDER) {
        Ok(r) => format!("order-2 stencil, informational: finest Linf error {:.3e}", r.last().unwrap().errors.linf),
        Err(e) => format!("order-2 stencil, informational: {e}"),
    };
    out.push(Line { id: "1", pass: true, info: true, detail: info });
    out
}

fn criterion_2() -> Line {
    let rows = convergence_study(&advection(4, 4), &LADDER).unwrap();
    let s = finest(&rows);
    let reference = [4.08, 4.06, 4.03];
    let linf = rows.last().unwrap().errors.linf;
    let ok = s.iter().zip(reference).all(|(a, b)| (a - b).abs() <= 0.3) && (1.785e-3 / 3.0..=3.0 * 1.785e-3).contains(&linf);
    line("2", ok, format!("advection DeC(4,5): finest slopes {s:.2?}, Linf at h=0.0125 {linf:.3e} (1.785e-3 x/÷ 3)"))
}

fn criterion_3() -> Line {
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let euler = Euler::new(EulerParams::default()).unwrap();
    let mut worst = 0.0f64;
    let families: Vec<Option<(usize, usize)>> =
        vec![None, Some((1, 1)), Some((1, 2)), Some((2, 1)), Some((2, 2))];
    for fam in families {
        let adv = match fam {
            None => KineticModel::four_wave(Advection, 2.5).unwrap(),
            Some((j, n)) => KineticModel::general(Advection, j, n, 2.5).unwrap(),
        };
        let eul = match fam {
            None => KineticModel::four_wave(euler, 7.0).unwrap(),
            Some((j, n)) => KineticModel::general(euler, j, n, 7.0).unwrap(),
        };
        for _ in 0..1000 {
            let u = [rng.gen_range(-5.0..5.0)];
            worst = worst.max(adv.consistency_residual(&u));
            let prim = [
                rng.gen_range(0.05..5.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(0.05..10.0),
            ];
            let mut c = [0.0; 4];
            euler.from_primitive(&prim, &mut c);
            worst = worst.max(eul.consistency_residual(&c));
        }
    }
    line("3", worst <= 1e-12, format!("Maxwellian moments, 10000 states over 5 families: worst relative residual {worst:.2e}"))
}

fn criterion_4(extra: &[(String, f64)]) -> Vec<Line> {
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for case in Case::ALL {
        for (name, st) in [
            ("none", Stabilizer::None),
            ("limiter", Stabilizer::Limiter(LimiterParams::default())),
            ("mood", Stabilizer::Mood),
        ] {
            let mut cfg = RunConfig::new(case, 40);
            cfg.scheme.stabilizer = st;
            match run(&cfg) {
                Ok(r) => {
                    let d = r.conservation_defect();
                    worst = worst.max(d);
                    if d > 1e-11 {
                        failures.push(format!("{}/{name}: {d:.2e}", case.name()));
                    }
                }
                Err(e) => failures.push(format!("{}/{name}: {e}", case.name())),
            }
        }
    }
    for (name, d) in extra {
        worst = worst.max(*d);
        if *d > 1e-11 {
            failures.push(format!("{name}: {d:.2e}"));
        }
    }
    out.push(line(
        "4",
        failures.is_empty(),
        format!(
            "conservation over 12 case/stabilizer runs at 40^2 and {} acceptance runs: worst completed {worst:.2e}; failures {failures:?}",
            extra.len()
        ),
    ));
    out
}

fn criterion_5() -> Line {
    let field = |eps: f64| {
        let mut cfg = RunConfig::new(Case::Advection, 64);
        cfg.final_time = 1.0;
        cfg.scheme.eps = eps;
        run(&cfg).unwrap().conserved
    };
    let reference = field(1e-12);
    let eps = [1e-4, 1e-6, 1e-8];
    let d: Vec<f64> = eps
        .iter()
        .map(|&e| {
            field(e).as_slice().iter().zip(reference.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
        .collect();
    // ratio of observed to linear decrease between successive ε
    let r: Vec<f64> = (0..2).map(|k| (d[k] / d[k + 1]) / (eps[k] / eps[k + 1])).collect();
    let ok = d.windows(2).all(|w| w[1] < w[0]) && r.iter().all(|&x| (0.5..=2.0).contains(&x));
    line("5", ok, format!("AP: |u_eps - u_1e-12|inf = {:.3e}/{:.3e}/{:.3e} for eps {eps:?}; ratio/linear {r:.3?}", d[0], d[1], d[2]))
}

fn criterion_6() -> Vec<Line> {
    let reference = [4.0, 2.0, 1.5, 8.0 / 3.0];
    let mut out = Vec::new();
    for k in 1..=4 {
        let m = symbol_max(k, 4096).unwrap();
        out.push(line("6", (m - reference[k - 1]).abs() <= 1e-6, format!("max|g{k}| = {m:.7} (reference {:.7})", reference[k - 1])));
    }
    let mut rng = rand::rngs::StdRng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for order in [1, 2, 4] {
        let rec = DecRecursion::new(order).unwrap();
        for _ in 0..100 {
            let g = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let exact = amp_exact(order, g).unwrap();
            for r in 0..=6 {
                let lhs = amp_dec(order, r, g).unwrap();
                let diff = match (lhs, exact) {
                    (Amplification::Scalar(a), Amplification::Scalar(b)) => Amplification::Scalar(a - b),
                    (Amplification::Pair(a), Amplification::Pair(b)) => Amplification::Pair([a[0] - b[0], a[1] - b[1]]),
                    _ => unreachable!(),
                };
                worst = worst.max(diff.distance(&rec.defect(r, g, &exact)));
            }
        }
    }
    out.push(line("6", worst <= 1e-12, format!("DeC difference identities, orders 1/2/4, r <= 6: worst {worst:.2e}")));
    for (t, r, want) in [(2, 2, 0.4), (4, 5, 2.25)] {
        let c = max_cfl_1d(t, t, r, 1e-10).unwrap();
        out.push(line("6", (c - want).abs() <= 0.1 + 1e-12, format!("1D max CFL DeC({t},{r}) = {c:.3} (table {want} +- 0.1)")));
    }
    out
}

fn criterion_7() -> Line {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let mut flux_gap = 0.0f64;
    let mut poly_gap = 0.0f64;
    let mut orders = Vec::new();
    for q in 1..=4 {
        let op = named_operator(q).unwrap();
        // flux form
        let g = Grid2D::new(24, 16, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let f: Vec<f64> = (0..g.nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for axis in [Axis::X, Axis::Y] {
            for sign in [1, -1] {
                let mut d = vec![0.0; g.nodes()];
                let mut h = vec![0.0; g.nodes()];
                apply_delta(&f, &g, axis, sign, &op, &mut d);
                face_fluxes(&f, &g, axis, sign, &op, &mut h);
                for j in 0..g.ny {
                    for i in 0..g.nx {
                        let p = match axis {
                            Axis::X => g.node((i + g.nx - 1) % g.nx, j),
                            Axis::Y => g.node(i, (j + g.ny - 1) % g.ny),
                        };
                        flux_gap = flux_gap.max((d[g.node(i, j)] - (h[g.node(i, j)] - h[p])).abs());
                    }
                }
            }
        }
        // exact on polynomials of degree <= q: δp = h p'
        for deg in 0..=q {
            let (x0, h) = (0.3f64, 0.01);
            let p = |x: f64| x.powi(deg as i32);
            let dp = if deg == 0 { 0.0 } else { deg as f64 * x0.powi(deg as i32 - 1) };
            let v: f64 = op.alpha().map(|(k, a)| a * p(x0 + k as f64 * h)).sum();
            poly_gap = poly_gap.max((v - h * dp).abs());
        }
        // truncation order on sin data
        let errs: Vec<f64> = [16, 32, 64, 128, 256]
            .iter()
            .map(|&n| {
                let g = Grid2D::new(n, 8, (0.0, 1.0), (0.0, 1.0)).unwrap();
                let f: Vec<f64> = (0..g.nodes()).map(|k| (2.0 * PI * g.x(k % n)).sin()).collect();
                let mut d = vec![0.0; g.nodes()];
                apply_delta(&f, &g, Axis::X, 1, &op, &mut d);
                (0..g.nodes())
                    .map(|k| (d[k] / g.dx() - 2.0 * PI * (2.0 * PI * g.x(k % n)).cos()).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        let slopes: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        orders.push((q, slopes));
    }
    let ok_orders = orders.iter().all(|(q, s)| s.iter().all(|v| (v - *q as f64).abs() <= 0.25));
    let ok = flux_gap < 1e-14 && poly_gap < 1e-15 && ok_orders;
    let summary: Vec<String> = orders.iter().map(|(q, s)| format!("{q}: {s:.2?}")).collect();
    line("7", ok, format!("stencils: flux-form gap {flux_gap:.1e}, polynomial gap {poly_gap:.1e}, orders {}", summary.join("; ")))
}

fn extremes(u: &Field) -> (f64, f64) {
    let e = Euler::new(EulerParams::default()).unwrap();
    let mut un = [0.0; 4];
    let (mut rho, mut p) = (f64::INFINITY, f64::INFINITY);
    for k in 0..u.grid().nodes() {
        u.node_values(k, &mut un);
        rho = rho.min(un[0]);
        p = p.min(e.pressure(&un));
    }
    (rho, p)
}

fn criterion_8(cons: &mut Vec<(String, f64)>) -> Vec<Line> {
    let mut out = Vec::new();
    let mut cfg = RunConfig::new(Case::Sod, 100);
    cfg.scheme.stabilizer = Stabilizer::Mood;
    match run(&cfg) {
        Ok(r) => {
            let (rho, p) = extremes(&r.conserved);
            let worst = r.flags.iter().map(|f| f.quads).max().unwrap_or(0) as f64 / 1e4;
            let active = r.flags.iter().filter(|f| f.quads > 0).count();
            cons.push(("sod/mood 100^2".into(), r.conservation_defect()));
            out.push(line(
                "8",
                rho > 0.0 && p > 0.0 && worst <= 1e-3 && r.fallbacks() == 0,
                format!(
                    "Sod 100^2 DeC(4,5)+MOOD: {} steps, min rho {rho:.4}, min p {p:.4}, MOOD active on {active} steps, max {:.3}% quads, {} fallbacks",
                    r.steps,
                    100.0 * worst,
                    r.fallbacks()
                ),
            ));
        }
        Err(e) => out.push(line("8", false, format!("Sod with MOOD failed: {e}"))),
    }
    cfg.scheme.stabilizer = Stabilizer::Limiter(LimiterParams::default());
    match run(&cfg) {
        Ok(r) => {
            cons.push(("sod/limiter 100^2".into(), r.conservation_defect()));
            out.push(line("8", true, format!("Sod 100^2 with the limiter completes in {} steps", r.steps)));
        }
        Err(e) => out.push(line("8", false, format!("Sod with the limiter failed: {e}"))),
    }
    out
}

/// Chebyshev distance (capped at `cap`) from every node to the nearest
/// ridge node of `|∇ρ|`: a local maximum along its dominant gradient axis
/// with at least 5% of the global maximum.
fn ridge_distance(rho: &[f64], g: &Grid2D, cap: usize) -> Vec<usize> {
    let (nx, ny) = (g.nx, g.ny);
    let at = |i: usize, j: usize| rho[g.node(i % nx, j % ny)];
    let mut mag = vec![0.0; g.nodes()];
    let mut xdom = vec![false; g.nodes()];
    for j in 0..ny {
        for i in 0..nx {
            let gx = (at(i + 1, j) - at(i + nx - 1, j)) / (2.0 * g.dx());
            let gy = (at(i, j + 1) - at(i, j + ny - 1)) / (2.0 * g.dy());
            mag[g.node(i, j)] = gx.hypot(gy);
            xdom[g.node(i, j)] = gx.abs() >= gy.abs();
        }
    }
    let top = mag.iter().cloned().fold(0.0, f64::max);
    let mut dist = vec![usize::MAX; g.nodes()];
    for j in 0..ny {
        for i in 0..nx {
            let k = g.node(i, j);
            let (a, b) = if xdom[k] {
                (g.node((i + 1) % nx, j), g.node((i + nx - 1) % nx, j))
            } else {
                (g.node(i, (j + 1) % ny), g.node(i, (j + ny - 1) % ny))
            };
            if mag[k] >= 0.05 * top && mag[k] >= mag[a] && mag[k] >= mag[b] {
                dist[k] = 0;
            }
        }
    }
    for d in 1..=cap {
        let prev = dist.clone();
        for j in 0..ny {
            for i in 0..nx {
                if prev[g.node(i, j)] != usize::MAX {
                    continue;
                }
                let near = (0..3).any(|a| (0..3).any(|b| prev[g.node((i + nx + a - 1) % nx, (j + ny + b - 1) % ny)] == d - 1));
                if near {
                    dist[g.node(i, j)] = d;
                }
            }
        }
    }
    dist
}

fn criterion_9(cons: &mut Vec<(String, f64)>) -> Line {
    let mut cfg = RunConfig::new(Case::StrongShock, 100);
    cfg.scheme.stabilizer = Stabilizer::Mood;
    let mut far_steps = 0;
    let mut worst = 0usize;
    let mut flagged_steps = 0;
    let res = run_with(&cfg, |solver, rep| {
        let Some(fl) = &rep.flags else { return };
        flagged_steps += 1;
        let u = solver.macroscopic();
        let g = *u.grid();
        let dist = ridge_distance(u.plane(0), &g, 16);
        let mut step_worst = 0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                if fl.quad[g.node(i, j)] {
                    // distance of the quad: its closest corner
                    let d = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
                        .iter()
                        .map(|&(a, b)| dist[g.node(a % g.nx, b % g.ny)])
                        .min()
                        .unwrap();
                    step_worst = step_worst.max(d);
                }
            }
        }
        worst = worst.max(step_worst);
        if step_worst > 3 {
            far_steps += 1;
        }
    });
    match res {
        Ok(r) => {
            let (rho, p) = extremes(&r.conserved);
            cons.push(("strong-shock/mood 100^2".into(), r.conservation_defect()));
            let ok = rho > 0.0 && p > 0.0 && far_steps == 0;
            line(
                "9",
                ok,
                format!(
                    "strong shock 100^2 DeC(4,5)+MOOD: {} steps, min rho {rho:.4}, min p {p:.4}; flags on {flagged_steps} steps, {far_steps} with a quad beyond 3 cells of the gradient ridge (worst {worst})",
                    r.steps
                ),
            )
        }
        Err(e) => line("9", false, format!("strong shock with MOOD failed: {e}")),
    }
}

fn criterion_10(cons: &mut Vec<(String, f64)>) -> Vec<Line> {
    let err = |n: usize, cfl: f64| {
        let mut cfg = RunConfig::new(Case::Vortex, n);
        cfg.scheme.cfl = cfl;
        run(&cfg).map(|r| {
            let d = r.conservation_defect();
            (r.errors.unwrap()[0].linf, d, r.steps)
        })
    };
    let mut out = Vec::new();
    let (e50, d50, s50) = err(50, 1.0).unwrap();
    let (e100, d100, _) = err(100, 1.0).unwrap();
    cons.push(("vortex 50^2".into(), d50));
    cons.push(("vortex 100^2".into(), d100));
    let order = (e50 / e100).log2();
    out.push(line("10", order >= 3.5, format!("vortex DeC(4,5): Linf rho error {e50:.3e} (50^2), {e100:.3e} (100^2), order {order:.2}; {s50} steps at 50^2")));
    match err(50, 1.2) {
        Ok((e, d, steps)) => {
            cons.push(("vortex 50^2 cfl 1.2".into(), d));
            out.push(line("10", e.is_finite() && e < 0.1, format!("vortex at CFL 1.2: {steps} steps, Linf rho error {e:.3e}")));
        }
        Err(e) => out.push(line("10", false, format!("vortex at CFL 1.2 failed: {e}"))),
    }
    out
}

fn criterion_11() -> Vec<Line> {
    let g = Case::Advection.grid(32, 32).unwrap();
    let lambda = 3.0;
    let model = KineticModel::four_wave(Advection, lambda).unwrap();
    let (hi, lo) = (named_operator(4).unwrap(), named_operator(1).unwrap());
    let tr = KineticTransport::new(&model, &hi, &lo, TransportMode::Plain);
    let u = Field::from_fn(g, 1, |x, y, v| v[0] = (PI * x + PI * y).sin());
    let f = model.equilibrium(&u).unwrap();
    let dt = dt_from_cfl(&g, lambda, 1.0).unwrap();
    let mut out = Vec::new();
    for eps in [1e-2, 1e-10] {
        let mut ws = DecWorkspace::new(QuadratureTable::new(4).unwrap(), g, 4, 1);
        ws.begin(&f, &model, &tr).unwrap();
        let mut incs = Vec::new();
        let mut prev = ws.result().as_slice().to_vec();
        for _ in 0..200 {
            dec_correction(&mut ws, &model, &tr, dt, eps);
            let cur = ws.result().as_slice();
            let inc = cur.iter().zip(&prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prev.copy_from_slice(cur);
            incs.push(inc);
            if inc < 1e-15 {
                break;
            }
        }
        let defect = (0..2)
            .map(|q| l2_residual(&ws, &model, &tr, dt, eps, q).as_slice().iter().map(|v| v.abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        dec_correction(&mut ws, &model, &tr, dt, eps);
        let extra = ws.result().as_slice().iter().zip(&prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        // geometric envelope: inc_r <= inc_0 * rate^r while above round-off
        let rate = incs
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &v)| v > 1e-13)
            .map(|(r, &v)| (v / incs[0]).powf(1.0 / r as f64))
            .fold(0.0, f64::max);
        let ok = extra <= 1e-13 && incs.len() > 2 && rate < 1.0;
        out.push(line(
            "11",
            ok,
            format!(
                "DeC fixed point, eps {eps:e}: {} corrections, L2 defect {defect:.1e}, extra correction moves {extra:.1e}, envelope rate {rate:.3}",
                incs.len()
            ),
        ));
    }
    out
}

#[test]
fn acceptance_criteria() {
    let mut lines = Vec::new();
    let mut cons: Vec<(String, f64)> = Vec::new();
    let t0 = Instant::now();
    lines.extend(criterion_1());
    lines.push(criterion_2());
    lines.push(criterion_3());
    lines.push(criterion_5());
    lines.extend(criterion_6());
    lines.push(criterion_7());
    lines.extend(criterion_8(&mut cons));
    lines.push(criterion_9(&mut cons));
    lines.extend(criterion_10(&mut cons));
    lines.extend(criterion_11());
    lines.extend(criterion_4(&cons));
    lines.sort_by_key(|l| l.id.parse::<u32>().unwrap());
    println!();
    for l in &lines {
        let tag = if l.info { "INFO" } else if l.pass { "PASS" } else { "FAIL" };
        println!("{tag} {:>2}  {}", l.id, l.detail);
    }
    println!("acceptance wall time {:.1} s", t0.elapsed().as_secs_f64());
    let failed: Vec<&str> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}

/// T = 200 on 200²: pressure error within [-4.2e-3, 1.6e-3]. Takes tens of
/// minutes; run with `--ignored`.
#[test]
#[ignore]
fn vortex_long_time_pressure_band() {
    let mut cfg = RunConfig::new(Case::Vortex, 200);
    cfg.final_time = 200.0;
    let r = run(&cfg).unwrap();
    let g = *r.primitive.grid();
    let ex = exact_primitive(Case::Vortex, &g, 200.0, cfg.gamma, &VortexParams::default()).unwrap();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (a, b) in r.primitive.plane(3).iter().zip(ex.plane(3)) {
        lo = lo.min(a - b);
        hi = hi.max(a - b);
    }
    println!("pressure error range [{lo:.3e}, {hi:.3e}]");
    assert!(lo >= -4.2e-3 && hi <= 1.6e-3);
}
