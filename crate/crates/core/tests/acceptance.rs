//! Acceptance suite. Each test prints one `PASS`/`FAIL` line for its criterion.
//!
//! Run with `cargo test --test acceptance -- --nocapture --test-threads=1`
//! to see the lines in order.

mod common;

use std::time::Instant;

use invscheme::baselines::odes::expanded_residual;
use invscheme::baselines::stencil::{stencil_d1_4pt, stencil_d2_4pt, stencil_d3_4pt};
use invscheme::baselines::{rk45_integrate, FirstOrderSystem};
use invscheme::exact::{conic_distance, solution_path};
use invscheme::group::{act, act_all, flow_oracle, random_group_element_from, GroupElement, Generator};
use invscheme::harness::{
    benchmark_step_cost, builtin_experiment, execute_method, tangent_crossings, winding_angle,
    Method, MethodOutcome,
};
use invscheme::invariants::{
    cont_i1, cont_i2, disc_i1_sl3, disc_i1_sl4, disc_i2_sl3, disc_i2_sl4, signed_j1, signed_j2,
    JetPoint,
};
use invscheme::schemes::{
    line_conic_roots, newton_multistart, reduce_to_line_conic, solve_step, step_problem,
};
use invscheme::{ErrorKind, HaltReason, Order, Point2, Realization, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RUNTIME_LIMIT_S: f64 = 5.0;
const CONIC_DISTANCE_TOL: f64 = 1e-3;
const FIG1_MIN_POINTS: usize = 600;
const FIG1_STEP_RESIDUAL_TOL: f64 = 1e-9;
const FIG2_HALT_RANGE: (f64, f64) = (1.23, 1.33);
const CONTINUATION_MIN_DX: f64 = 0.05;
const CONTINUATION_MAX_ABS_Y: f64 = 1e3;
const CONTINUATION_RESIDUAL_TOL: f64 = 1e-10;
const FD_ERROR_LIMIT: f64 = 0.1;
const INVARIANCE_REL_TOL: f64 = 1e-10;
const INVARIANCE_ACTIONS: usize = 1000;
const FLOW_TOL: f64 = 1e-8;
const MIN_CONVERGENCE_ORDER: f64 = 0.9;
const ORACLE_AGREEMENT_TOL: f64 = 1e-10;
const ORACLE_WINDOWS: usize = 100;
const REDUCTION_TOL: f64 = 1e-9;
const STENCIL_REL_TOL: f64 = 1e-12;
const RK_EXP_TOL: f64 = 1e-8;
const ODE_JETS: usize = 100;
const ODE_TOL: f64 = 1e-9;

fn verdict(id: u32, title: &str, ok: bool, detail: String) {
    println!("{} criterion {id:>2} ({title}): {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} ({title}) failed: {detail}");
}

fn timed(cfg_name: &str, method: Method) -> (MethodOutcome, f64) {
    let cfg = builtin_experiment(cfg_name).unwrap();
    let start = Instant::now();
    let out = execute_method(&cfg, method).unwrap();
    (out, start.elapsed().as_secs_f64())
}

fn trajectory(out: &MethodOutcome) -> &Trajectory {
    out.trajectory.as_ref().expect("method produced a trajectory")
}

fn halt_x(t: &Trajectory) -> f64 {
    match &t.halt {
        HaltReason::Error(e) => e.x().unwrap_or(t.last_x().unwrap()),
        _ => t.last_x().unwrap(),
    }
}

#[test]
fn criterion_01_circle_exactness() {
    let (out, secs) = timed("fig1", Method::Invariant);
    let t = trajectory(&out);
    let path = solution_path(Realization::Sl3, 1.0, 8.0, 2.0, 1.0).unwrap();
    let winding = winding_angle(&t.points, &Point2::new(2.0, 8.0)).abs();
    let dist = t.points.iter().map(|p| conic_distance(&path.conic, p)).fold(0.0, f64::max);
    let residual = t.diagnostics.iter().map(|d| d.step_residual.max(d.mesh_residual)).fold(0.0, f64::max);
    let ok = t.len() >= FIG1_MIN_POINTS
        && winding >= std::f64::consts::TAU
        && dist <= CONIC_DISTANCE_TOL
        && residual <= FIG1_STEP_RESIDUAL_TOL
        && secs < RUNTIME_LIMIT_S;
    verdict(
        1,
        "circle exactness",
        ok,
        format!(
            "{} points, |winding| {winding:.3} rad, max distance {dist:.2e}, max step residual {residual:.1e}, {secs:.3} s",
            t.len()
        ),
    );
}

#[test]
fn criterion_02_hyperbola_exactness() {
    let (out, _) = timed("fig3", Method::Invariant);
    let t = trajectory(&out);
    let path = solution_path(Realization::Sl4, 2.0, 5.0, 5.0, 1.0).unwrap();
    let dist = t.points.iter().map(|p| conic_distance(&path.conic, p)).fold(0.0, f64::max);
    let crossing = tangent_crossings(&t.points).into_iter().find(|x| (x - 4.0).abs() < 0.05);
    let after = crossing.map_or(0, |xc| {
        let i = t.points.iter().position(|p| p.x == xc).unwrap();
        t.len() - i - 1
    });
    let ok = crossing.is_some() && after > 0 && dist <= CONIC_DISTANCE_TOL;
    verdict(
        2,
        "hyperbola exactness",
        ok,
        format!("vertex crossing at {crossing:?}, {after} points after it, max distance {dist:.2e}"),
    );
}

#[test]
fn criterion_03_singularity_location() {
    let (out, secs) = timed("fig2", Method::Rk45);
    let t = trajectory(&out);
    let kind = match &t.halt {
        HaltReason::Error(e) => Some(e.kind),
        _ => None,
    };
    let x = halt_x(t);
    let ok = matches!(kind, Some(ErrorKind::StepUnderflow | ErrorKind::SingularityDetected))
        && (FIG2_HALT_RANGE.0..=FIG2_HALT_RANGE.1).contains(&x)
        && secs < RUNTIME_LIMIT_S;
    verdict(3, "singularity location", ok, format!("halt {kind:?} at x = {x:.6}, {secs:.3} s"));
}

/// After first reaching the baseline's halt abscissa, how far in x the
/// scheme travels from it.
fn continuation(fig: &str) -> (bool, String) {
    let cfg = builtin_experiment(fig).unwrap();
    let baseline_halt = [Method::Rk45, Method::StandardFd]
        .into_iter()
        .map(|m| halt_x(trajectory(&execute_method(&cfg, m).unwrap())))
        .fold(f64::NEG_INFINITY, f64::max);
    let out = execute_method(&cfg, Method::Invariant).unwrap();
    let t = trajectory(&out);
    let max_y = t.points.iter().map(|p| p.y.abs()).fold(0.0, f64::max);
    let residual = t.diagnostics.iter().map(|d| d.step_residual.max(d.mesh_residual)).fold(0.0, f64::max);
    let reached = t.points.iter().position(|p| p.x >= baseline_halt);
    let beyond = reached.map_or(0.0, |i| {
        t.points[i..].iter().map(|p| (p.x - baseline_halt).abs()).fold(0.0, f64::max)
    });
    let ok = reached.is_some()
        && beyond >= CONTINUATION_MIN_DX
        && max_y < CONTINUATION_MAX_ABS_Y
        && t.points.iter().all(Point2::is_finite)
        && residual <= CONTINUATION_RESIDUAL_TOL;
    (
        ok,
        format!(
            "{fig}: baseline halt {baseline_halt:.6}, reached at index {reached:?}, continued {beyond:.4} in x, max |y| {max_y:.3}, max step residual {residual:.1e}, scheme halt {}",
            t.halt.label()
        ),
    )
}

#[test]
fn criterion_04_continuation() {
    let (ok2, d2) = continuation("fig2");
    let (ok4, d4) = continuation("fig4");
    verdict(4, "continuation", ok2 && ok4, format!("{d2}; {d4}"));
}

#[test]
fn criterion_05_baseline_failure_mode() {
    let (out, _) = timed("fig1", Method::StandardFd);
    let t = trajectory(&out);
    let path = solution_path(Realization::Sl3, 1.0, 8.0, 2.0, 1.0).unwrap();
    let invscheme::exact::ExactConic::Circle(c) = path.conic else { unreachable!() };
    let upper = |x: f64| c.cy + (c.r * c.r - (x - c.cx).powi(2)).max(0.0).sqrt();
    let err = t
        .points
        .iter()
        .filter(|p| p.x <= 3.0)
        .map(|p| (p.y - upper(p.x)).abs())
        .fold(0.0, f64::max);
    let diverged = matches!(&t.halt, HaltReason::Error(e) if e.kind == ErrorKind::NewtonDivergence)
        && halt_x(t) <= 3.0;
    verdict(
        5,
        "baseline failure mode",
        diverged || err > FD_ERROR_LIMIT,
        format!("halt {} at x = {:.4}, max error before x = 3: {err:.3e}", t.halt.label(), halt_x(t)),
    );
}

fn random_point<R: Rng>(rng: &mut R) -> Point2 {
    Point2::new(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0))
}

#[test]
fn criterion_06_group_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut accepted = 0;
    while accepted < INVARIANCE_ACTIONS {
        let pts = [random_point(&mut rng), random_point(&mut rng), random_point(&mut rng)];
        let g = random_group_element_from(&mut rng, 0.5);
        let (Ok(i3), Ok(i4)) = (act_all(Realization::Sl3, &g, &pts), act_all(Realization::Sl4, &g, &pts)) else {
            continue;
        };
        let pairs: [(fn(&Point2, &Point2) -> _, &[Point2], usize, usize); 6] = [
            (disc_i1_sl3, &i3, 0, 1),
            (disc_i1_sl3, &i3, 1, 2),
            (disc_i2_sl3, &i3, 0, 2),
            (disc_i1_sl4, &i4, 0, 1),
            (disc_i1_sl4, &i4, 1, 2),
            (disc_i2_sl4, &i4, 0, 2),
        ];
        let mut usable = true;
        let mut gaps = Vec::new();
        for (f, img, a, b) in pairs {
            match (f(&pts[a], &pts[b]), f(&img[a], &img[b])) {
                (Ok(before), Ok(after)) => gaps.push(common::relative_gap(before, after)),
                (Err(_), Err(_)) => {}
                _ => usable = false,
            }
        }
        if usable {
            accepted += 1;
            worst = gaps.into_iter().fold(worst, f64::max);
        }
    }

    let mut flow_worst: f64 = 0.0;
    for r in [Realization::Sl3, Realization::Sl4] {
        for gen in [Generator::X1, Generator::X2, Generator::X3] {
            for i in 0..4 {
                for j in 0..5 {
                    let p = Point2::new(0.5 + 0.5 * i as f64, -1.0 + 0.5 * j as f64);
                    for t in [0.3, -0.2] {
                        let closed = act(r, &GroupElement::one_parameter(gen, t), &p).unwrap();
                        let flowed = flow_oracle(r, gen, t, &p).unwrap();
                        flow_worst = flow_worst.max(closed.dist(&flowed));
                    }
                }
            }
        }
    }
    verdict(
        6,
        "group invariance",
        worst <= INVARIANCE_REL_TOL && flow_worst <= FLOW_TOL,
        format!("{accepted} actions, worst relative change {worst:.1e}; flow vs closed form {flow_worst:.1e}"),
    );
}

/// Least-squares slope of `log err` against `log h`.
fn fitted_order(hs: &[f64], errs: &[f64]) -> f64 {
    let lx: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

#[test]
fn criterion_07_continuous_limit() {
    // y = 2x + 0.3 sin(2x) + 0.2 x² - 0.5 near x = 1.3; steep enough for sl4.
    let y = |x: f64| 2.0 * x + 0.3 * (2.0 * x).sin() + 0.2 * x * x - 0.5;
    let jet = |x: f64| {
        JetPoint::third(
            x,
            2.0 + 0.6 * (2.0 * x).cos() + 0.4 * x,
            -1.2 * (2.0 * x).sin() + 0.4,
            -2.4 * (2.0 * x).cos(),
        )
    };
    let x0 = 1.3;
    // The sl4 J2 error is first order and still pre-asymptotic above h = 0.02.
    let hs = [0.02, 0.01, 0.005, 0.0025];
    let mut lines = Vec::new();
    let mut ok = true;
    for r in [Realization::Sl3, Realization::Sl4] {
        let i1 = cont_i1(r, &jet(x0)).unwrap();
        let i2 = cont_i2(r, &jet(x0)).unwrap();
        let (mut e1, mut e2) = (Vec::new(), Vec::new());
        for &h in &hs {
            // Windows centred on x0.
            let p = |k: f64| Point2::new(x0 + k * h, y(x0 + k * h));
            let j1 = signed_j1(r, &p(-1.0), &p(0.0), &p(1.0)).unwrap();
            let j2 = signed_j2(r, &[p(-1.5), p(-0.5), p(0.5), p(1.5)]).unwrap();
            e1.push((j1 - i1).abs());
            e2.push((j2 - i2).abs());
        }
        let (o1, o2) = (fitted_order(&hs, &e1), fitted_order(&hs, &e2));
        ok &= o1 >= MIN_CONVERGENCE_ORDER && o2 >= MIN_CONVERGENCE_ORDER;
        lines.push(format!("{}: J1 order {o1:.2}, J2 order {o2:.2}", r.name()));
    }
    verdict(7, "continuous limit", ok, lines.join("; "));
}

#[test]
fn criterion_08_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut lines = Vec::new();
    let mut ok = true;
    for r in [Realization::Sl3, Realization::Sl4] {
        for order in [Order::Second, Order::Third] {
            let (mut worst_newton, mut worst_reduced): (f64, f64) = (0.0, 0.0);
            let mut mismatches = 0;
            let mut windows = 0;
            while windows < ORACLE_WINDOWS {
                let Some(state) = common::random_window(&mut rng, r, order) else { continue };
                let Ok(problem) = step_problem(&state) else { continue };
                let Ok((fast, _)) = solve_step(&problem) else { continue };
                windows += 1;
                // Newton on the unreduced equations, restarted around the
                // extrapolated point until it finds the correctly turning root.
                match newton_multistart(&problem) {
                    Ok((q, _)) => worst_newton = worst_newton.max(q.dist(&fast)),
                    Err(_) => mismatches += 1,
                }
                let (line, conic) = reduce_to_line_conic(&state).unwrap();
                let roots = line_conic_roots(&line, &conic, &problem.p1).unwrap_or_default();
                let nearest = roots.iter().map(|q| q.dist(&fast)).fold(f64::INFINITY, f64::min);
                let residual = roots.iter().map(|q| problem.residual_norm(q)).fold(0.0, f64::max);
                worst_reduced = worst_reduced.max(nearest).max(residual);
            }
            ok &= mismatches == 0 && worst_newton <= ORACLE_AGREEMENT_TOL && worst_reduced <= REDUCTION_TOL;
            lines.push(format!(
                "{} order {}: Newton gap {worst_newton:.1e} ({mismatches} failed), reduced set {worst_reduced:.1e}",
                r.name(),
                order.as_u8()
            ));
        }
    }
    verdict(8, "oracle equivalence", ok, lines.join("; "));
}

#[test]
fn criterion_09_stencils_and_integrator() {
    let h = 0.1;
    let xs = [-h, 0.0, h, 2.0 * h];
    // Evaluation point is the midpoint of the two central nodes.
    let mid = 0.5 * h;
    let mut worst: f64 = 0.0;
    for deg in 0..=3 {
        let f = |x: f64| (0..=deg).map(|k| (k as f64 + 1.0) * x.powi(k)).sum::<f64>();
        let d1 = |x: f64| (1..=deg).map(|k| (k as f64 + 1.0) * k as f64 * x.powi(k - 1)).sum::<f64>();
        let d2 = |x: f64| {
            (2..=deg).map(|k| (k as f64 + 1.0) * (k * (k - 1)) as f64 * x.powi(k - 2)).sum::<f64>()
        };
        let d3 = |_: f64| if deg == 3 { 4.0 * 6.0 } else { 0.0 };
        let ys = xs.map(f);
        for (got, want) in [
            (stencil_d1_4pt(&ys, h), d1(mid)),
            (stencil_d2_4pt(&ys, h), d2(mid)),
            (stencil_d3_4pt(&ys, h), d3(mid)),
        ] {
            worst = worst.max((got - want).abs() / want.abs().max(1.0));
        }
    }
    let sys = FirstOrderSystem::new(1, |_, s, out| {
        out[0] = s[0];
        Ok(())
    });
    let run = rk45_integrate(&sys, 0.0, &[1.0], 1.0, 1e-10, 1e-10);
    let rk_err = (run.last_state()[0] - std::f64::consts::E).abs();
    verdict(
        9,
        "stencil and integrator sanity",
        worst <= STENCIL_REL_TOL && rk_err <= RK_EXP_TOL && run.completed(),
        format!("worst stencil error {worst:.1e}, RK45 |y(1) - e| = {rk_err:.1e}"),
    );
}

#[test]
fn criterion_10_ode_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut lines = Vec::new();
    let mut ok = true;
    for r in [Realization::Sl3, Realization::Sl4] {
        let ode = common::ode(r, Order::Third, 0.0);
        let (mut on, mut off_min): (f64, f64) = (0.0, f64::INFINITY);
        let mut n = 0;
        while n < ODE_JETS {
            let x = rng.gen_range(0.5..2.0);
            let p = rng.gen_range(-2.0..2.0);
            let q = rng.gen_range(-2.0..2.0);
            let Ok(yppp) = ode.solve_highest(x, p, q) else { continue };
            let (Ok(i1), Ok(i2)) = (cont_i1(r, &JetPoint::third(x, p, q, yppp)), cont_i2(r, &JetPoint::third(x, p, q, yppp))) else {
                continue;
            };
            if !yppp.is_finite() || yppp.abs() > 1e6 {
                continue;
            }
            n += 1;
            // The expanded form equals factor·(I2 - I1²); its rounding error
            // grows with the size of those terms, so it is measured relative
            // to them.
            let factor = match r {
                Realization::Sl3 => (1.0 + p * p).powi(3),
                Realization::Sl4 => (p * p - 1.0).powi(3).abs(),
            };
            let scale = (factor * (i2.abs() + i1 * i1)).max(1.0);
            on = on
                .max(expanded_residual(r, x, p, q, yppp).abs() / scale)
                .max((i2 - i1 * i1).abs() / (i2.abs() + i1 * i1).max(1.0));
            // Off it, neither does.
            let bumped = yppp + rng.gen_range(0.1..1.0);
            let jet = JetPoint::third(x, p, q, bumped);
            let gap = (cont_i2(r, &jet).unwrap() - cont_i1(r, &jet).unwrap().powi(2)).abs();
            off_min = off_min.min(expanded_residual(r, x, p, q, bumped).abs().min(gap));
        }
        ok &= on <= ODE_TOL && off_min > ODE_TOL;
        lines.push(format!("{}: on-solution {on:.1e}, off-solution min {off_min:.1e}", r.name()));
    }
    verdict(10, "ODE consistency", ok, lines.join("; "));
}

#[test]
fn criterion_11_cost_report() {
    let mut lines = Vec::new();
    let mut ok = true;
    for fig in ["fig2", "fig4"] {
        let cfg = builtin_experiment(fig).unwrap();
        let cost = benchmark_step_cost(&cfg).unwrap();
        let inv = cost.get(Method::Invariant.name()).copied();
        let fd = cost.get(Method::StandardFd.name()).copied();
        ok &= inv.is_some() && fd.is_some();
        let flag = match (inv, fd) {
            (Some(a), Some(b)) => format!("invariant <= standardFD: {}", a <= b),
            _ => "missing".into(),
        };
        lines.push(format!("{fig}: {cost:?} ({flag})"));
    }
    verdict(11, "cost report", ok, lines.join("; "));
}

