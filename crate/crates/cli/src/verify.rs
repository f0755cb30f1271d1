//! The bundled acceptance suite: ten criteria run on the gallery models.

use std::fmt::Write as _;
use std::time::Instant;

use snlevy::definetti::{barrier_value, solve, SolveOptions};
use snlevy::levy::config::{gallery_model, gallery_sources, Tolerances};
use snlevy::levy::probes::log_convexity_check;
use snlevy::levy::JumpMeasure;
use snlevy::numeric::quad::Quad;
use snlevy::scale::{laplace_residual, recover_exponent, ScaleGrid, ScaleOptions, ScaleTable, LAPLACE_MARGIN};
use snlevy::shape::{
    atom_jump_from_tail_formula, excursion_tail_jump, find_a_star, shape_suite, stated_atom_jump, ShapeTolerances,
};
use snlevy::sim::{compare_strategies, simulate_value, SimOptions, StrategySpec};
use snlevy::{Exec, LevyModel, Result};

use crate::args::{Cli, VerifyArgs};
use crate::output::{apply_overrides, sci, CmdResult, Run, EXIT_VERIFY};

const LOG_CONVEX_MODELS: [&str; 4] = ["brownian", "cramer_lundberg_exp", "piecewise_power", "piecewise_exp"];
const QS: [f64; 3] = [0.0, 0.1, 1.0];
const Q_CONTROL: f64 = 0.1;
const CLOSED_FORM_TOL: f64 = 1e-6;
const LADDER_TOL: f64 = 1e-6;
const ATOM_TOL: f64 = 1e-8;
const ROUND_TRIP_TOL: f64 = 1e-6;
const MC_SE_FRACTION: f64 = 0.01;
const REPLAY_PATHS: usize = 20_000;

/// One sub-check: passes when `value <= bound` unless stated otherwise.
struct Check {
    label: String,
    value: f64,
    bound: f64,
    pass: bool,
}

impl Check {
    fn at_most(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            label: label.into(),
            value,
            bound,
            pass: value <= bound,
        }
    }

    fn flag(label: impl Into<String>, pass: bool) -> Self {
        Check {
            label: label.into(),
            value: if pass { 0.0 } else { 1.0 },
            bound: 0.0,
            pass,
        }
    }

    /// Recorded for reference; never fails.
    fn info(label: impl Into<String>, value: f64) -> Self {
        Check {
            label: label.into(),
            value,
            bound: f64::NAN,
            pass: true,
        }
    }
}

struct Outcome {
    id: u8,
    title: &'static str,
    checks: Vec<Check>,
    error: Option<String>,
}

impl Outcome {
    fn pass(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    /// First failing check, else the tightest one.
    fn headline(&self) -> String {
        if let Some(e) = &self.error {
            return format!("error: {e}");
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        let pick = self.checks.iter().find(|c| !c.pass).or_else(|| {
            self.checks
                .iter()
                .filter(|c| c.bound > 0.0)
                .max_by(|a, b| (a.value / a.bound).total_cmp(&(b.value / b.bound)))
        });
        let lead = format!("{}/{} checks pass", self.checks.len() - failed, self.checks.len());
        match pick {
            Some(c) if c.bound.is_nan() || c.bound == 0.0 => format!("{lead}; {}", c.label),
            Some(c) => format!("{lead}; {}: {:.3e} vs {:.1e}", c.label, c.value, c.bound),
            None => lead,
        }
    }
}

fn gallery(name: &str) -> Result<LevyModel> {
    gallery_model(name)
}

fn scale(model: &LevyModel, q: f64) -> Result<ScaleGrid> {
    ScaleGrid::compute(model, q, &ScaleOptions::default())
}

fn laplace_identity(tol: &Tolerances) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for name in gallery_sources().keys() {
        let m = gallery(name)?;
        for q in QS {
            let s = scale(&m, q)?;
            for d in [1.0, 2.0, 5.0] {
                let r = laplace_residual(&s, &m, s.phi_q + d, LAPLACE_MARGIN)?;
                out.push(Check::at_most(
                    format!("{name} q={q} theta=Phi+{d}"),
                    r.residual,
                    tol.laplace,
                ));
            }
        }
    }
    Ok(out)
}

fn uniform_points() -> Vec<f64> {
    (0..512).map(|k| 0.01 + (10.0 - 0.01) * k as f64 / 511.0).collect()
}

fn worst_relative(s: &ScaleGrid, exact: impl Fn(f64) -> f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for x in uniform_points() {
        let e = exact(x);
        worst = worst.max((s.w_at(x)? - e).abs() / e.abs());
    }
    Ok(worst)
}

fn closed_forms() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let bm = gallery("brownian")?;
    for q in [0.0, 0.1, 0.5, 1.0] {
        let s = scale(&bm, q)?;
        let r = (2.0 * q).sqrt();
        let worst = worst_relative(&s, |x| if q == 0.0 { 2.0 * x } else { 2.0 * (r * x).sinh() / r })?;
        out.push(Check::at_most(format!("brownian q={q}"), worst, CLOSED_FORM_TOL));
    }
    let cl = gallery("cramer_lundberg_exp")?;
    let (c, lambda, mu) = (1.0, 1.0, 2.0);
    for q in QS {
        let s = scale(&cl, q)?;
        let b = c * mu - lambda - q;
        let disc = (b * b + 4.0 * c * q * mu).sqrt();
        let (t1, t2) = ((-b + disc) / (2.0 * c), (-b - disc) / (2.0 * c));
        let w = |x: f64| ((t1 + mu) * (t1 * x).exp() / (t1 - t2) + (t2 + mu) * (t2 * x).exp() / (t2 - t1)) / c;
        out.push(Check::at_most(
            format!("cramer_lundberg_exp q={q}"),
            worst_relative(&s, w)?,
            CLOSED_FORM_TOL,
        ));
    }
    Ok(out)
}

fn shape_conclusions(tol: &Tolerances) -> Result<Vec<Check>> {
    let shape_tol = ShapeTolerances {
        second_diff: tol.second_diff,
        derivative: tol.derivative,
    };
    let mut out = Vec::new();
    for name in LOG_CONVEX_MODELS {
        let m = gallery(name)?;
        let s = scale(&m, Q_CONTROL)?;
        let suite = shape_suite(&m, &s, None, &shape_tol)?;
        for conclusion in ["g_q concave", "W' convex beyond a*", "u_q non-increasing", "u_q convex"] {
            match suite.conclusion(conclusion) {
                Some(r) => out.push(Check {
                    label: format!("{name}: {conclusion}"),
                    value: r.worst_violation + r.tolerance,
                    bound: r.tolerance,
                    pass: r.pass,
                }),
                None => out.push(Check::flag(format!("{name}: {conclusion} not licensed"), false)),
            }
        }
    }
    Ok(out)
}

fn ladder_suite() -> Result<Vec<Check>> {
    let quad = Quad::default();
    let mut out = Vec::new();
    for name in LOG_CONVEX_MODELS {
        let m = gallery(name)?;
        for q in QS {
            let lad = m.ladder(q)?;
            for theta in [0.5, 1.0, 2.0, 5.0] {
                let a = lad.ratio(theta)?;
                let b = lad.series(theta, &quad)?;
                out.push(Check::at_most(
                    format!("{name} q={q} theta={theta} kappa"),
                    (a - b).abs() / a.abs().max(1.0),
                    LADDER_TOL,
                ));
            }
            if m.jumps().kind() == snlevy::levy::JumpKind::Density {
                let r = log_convexity_check(
                    |x| m.upsilon_q(q, x).map(|u| u.density).unwrap_or(f64::NAN),
                    (0.01, 10.0),
                    512,
                    snlevy::levy::probes::LOG_CONVEXITY_TOL,
                )?;
                out.push(Check {
                    label: format!("{name} q={q} upsilon_q log-convex"),
                    value: r.worst_violation + r.tolerance,
                    bound: r.tolerance,
                    pass: r.pass,
                });
            }
        }
    }
    Ok(out)
}

fn excursion_atoms() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let m = gallery("atomic")?;
    let s = scale(&m, 0.0)?;
    let delta = m.bv_drift().expect("atomic gallery model has bounded variation");
    let atom = match m.jumps() {
        JumpMeasure::Atoms(a) => a[0],
        _ => unreachable!("atomic gallery model"),
    };
    let wz = s.w_at(atom.location)?;
    let drop = -excursion_tail_jump(&m, &s, atom.location)?.jump;
    let stated = stated_atom_jump(delta, atom.mass, s.w0, wz);
    let direct = atom_jump_from_tail_formula(delta, atom.mass, s.w0, wz);
    out.push(Check::at_most(
        "atomic: |drop - (m/delta)(2 - W(0)/W(z))|",
        (drop - stated).abs(),
        ATOM_TOL,
    ));
    out.push(Check::info("atomic: measured drop", drop));
    out.push(Check::info(
        "atomic: |drop - (m/delta) W(0)/W(z)|",
        (drop - direct).abs(),
    ));
    let cl = gallery("cramer_lundberg_exp")?;
    let s = scale(&cl, 0.0)?;
    for z in [0.5, 1.0, 2.0] {
        let j = excursion_tail_jump(&cl, &s, z)?;
        out.push(Check::at_most(
            format!("cramer_lundberg_exp: |jump| at z={z}"),
            j.jump.abs(),
            ATOM_TOL,
        ));
    }
    Ok(out)
}

fn hjb_suite(tol: &Tolerances) -> Result<Vec<Check>> {
    let opts = SolveOptions {
        hjb_rel: tol.hjb_rel,
        ..SolveOptions::default()
    };
    let mut out = Vec::new();
    for name in ["cramer_lundberg_exp", "piecewise_power", "piecewise_exp"] {
        let sol = solve(&gallery(name)?, Q_CONTROL, &opts)?;
        out.push(Check::at_most(
            format!("{name}: interior |r|/tol"),
            sol.max_interior_ratio(),
            1.0,
        ));
        out.push(Check::at_most(
            format!("{name}: exterior r/tol"),
            sol.max_exterior_ratio(),
            1.0,
        ));
        out.push(Check::info(format!("{name}: a*"), sol.a_star.value));
    }
    Ok(out)
}

/// `a*` and the scale grid of the Cramér–Lundberg model at `q = 0.1`.
fn cl_barrier() -> Result<(LevyModel, ScaleGrid, f64)> {
    let m = gallery("cramer_lundberg_exp")?;
    let s = scale(&m, Q_CONTROL)?;
    let a = find_a_star(&s)?.value;
    Ok((m, s, a))
}

fn monte_carlo(args: &VerifyArgs, tol: &Tolerances) -> Result<Vec<Check>> {
    let (m, s, a) = cl_barrier()?;
    let opts = SimOptions {
        n_paths: args.paths,
        seed: args.seed,
        ..SimOptions::default()
    };
    let mut out = vec![Check::info("a*", a)];
    for (label, x0) in [("0.5a*", 0.5 * a), ("a*", a), ("2a*", 2.0 * a)] {
        let v = barrier_value(&s, a, x0)?;
        let e = simulate_value(&m, &StrategySpec::Barrier { a }, Q_CONTROL, x0, &opts)?;
        out.push(Check::at_most(
            format!("x0={label}: |MC - v|/se"),
            (e.mean - v).abs() / e.std_error,
            tol.mc_sigmas,
        ));
        out.push(Check::at_most(
            format!("x0={label}: se/v"),
            e.std_error / v,
            MC_SE_FRACTION,
        ));
        out.push(Check::info(format!("x0={label}: MC mean"), e.mean));
        out.push(Check::info(format!("x0={label}: analytic"), v));
    }
    Ok(out)
}

/// 50 barriers spread over `(0, 3a*)` and five threshold strategies.
pub fn alternatives(a: f64, premium: f64) -> Vec<StrategySpec> {
    let mut v: Vec<StrategySpec> = (1..=50)
        .map(|k| StrategySpec::Barrier {
            a: 3.0 * a * (k as f64 - 0.5) / 50.0,
        })
        .collect();
    for (b, frac) in [(1.0, 0.5), (1.0, 0.9), (0.5, 0.5), (1.5, 0.75), (2.0, 0.25)] {
        v.push(StrategySpec::Threshold {
            b: b * a,
            rate: frac * premium,
        });
    }
    v
}

fn dominance(args: &VerifyArgs, tol: &Tolerances) -> Result<Vec<Check>> {
    let (m, _, a) = cl_barrier()?;
    let premium = m.bv_drift().expect("Cramér–Lundberg has a premium rate");
    let mut strategies = vec![StrategySpec::Barrier { a }];
    strategies.extend(alternatives(a, premium));
    let opts = SimOptions {
        n_paths: args.dominance_paths,
        seed: args.seed,
        beat_sigmas: tol.mc_sigmas,
        ..SimOptions::default()
    };
    let cmp = compare_strategies(&m, Q_CONTROL, a, &strategies, &opts)?;
    let mut out = vec![Check::info("reference value", cmp.reference.mean)];
    for r in &cmp.rows {
        let z = if r.diff_se > 0.0 {
            r.diff_mean / r.diff_se
        } else {
            f64::NEG_INFINITY
        };
        out.push(Check {
            label: format!("{}: paired z", r.estimate.strategy),
            value: z,
            bound: tol.mc_sigmas,
            pass: !r.beats_reference,
        });
    }
    Ok(out)
}

fn round_trip() -> Result<Vec<Check>> {
    let bm = gallery("brownian")?;
    let s = scale(&bm, 0.0)?;
    let rec = recover_exponent(&ScaleTable::from_grid(&s), &[1.0, 2.0, 5.0])?;
    Ok(rec
        .thetas
        .iter()
        .zip(&rec.psi_hat)
        .map(|(t, p)| {
            let e = 0.5 * t * t;
            Check::at_most(format!("theta={t}"), (p - e).abs() / e, ROUND_TRIP_TOL)
        })
        .collect())
}

fn replay(args: &VerifyArgs) -> Result<Vec<Check>> {
    let (m, _, a) = cl_barrier()?;
    let mut csv = Vec::new();
    let mut est = Vec::new();
    for exec in [Exec::Sequential, Exec::Parallel] {
        let opts = ScaleOptions {
            exec,
            ..ScaleOptions::default()
        };
        let mut buf = Vec::new();
        ScaleGrid::compute(&m, Q_CONTROL, &opts)?.write_csv(&mut buf)?;
        csv.push(buf);
        let sim = SimOptions {
            n_paths: REPLAY_PATHS,
            seed: args.seed,
            exec,
            ..SimOptions::default()
        };
        let e = simulate_value(&m, &StrategySpec::Barrier { a }, Q_CONTROL, a, &sim)?;
        est.push((e.mean.to_bits(), e.std_error.to_bits()));
    }
    Ok(vec![
        Check::flag("scale CSV identical across executors", csv[0] == csv[1]),
        Check::flag("MC estimate bit-identical across executors", est[0] == est[1]),
    ])
}

pub fn run(cli: &Cli, args: &VerifyArgs) -> CmdResult {
    let tol = apply_overrides(Tolerances::default(), &cli.tolerances)?;
    if args.paths < 2 || args.dominance_paths < 2 {
        return Err(crate::output::Failure::usage("path counts must be at least 2"));
    }
    type Job<'a> = Box<dyn Fn() -> Result<Vec<Check>> + 'a>;
    let jobs: Vec<(u8, &'static str, Job)> = vec![
        (1, "Laplace identity", Box::new(|| laplace_identity(&tol))),
        (2, "closed-form scale functions", Box::new(closed_forms)),
        (3, "shape conclusions", Box::new(|| shape_conclusions(&tol))),
        (4, "ladder exponent and upsilon_q", Box::new(ladder_suite)),
        (5, "excursion height atoms", Box::new(excursion_atoms)),
        (6, "HJB residuals", Box::new(|| hjb_suite(&tol))),
        (7, "Monte Carlo vs analytic", Box::new(|| monte_carlo(args, &tol))),
        (8, "barrier dominance", Box::new(|| dominance(args, &tol))),
        (9, "exponent round trip", Box::new(round_trip)),
        (10, "determinism replay", Box::new(|| replay(args))),
    ];
    let mut outcomes = Vec::new();
    println!(
        "{:<4} {:<32} {:<6} {:>8}  summary",
        "id", "criterion", "status", "time_s"
    );
    for (id, title, job) in jobs {
        let t = Instant::now();
        let (checks, error) = match job() {
            Ok(c) => (c, None),
            Err(e) => (Vec::new(), Some(e.to_string())),
        };
        let o = Outcome {
            id,
            title,
            checks,
            error,
        };
        println!(
            "{:<4} {:<32} {:<6} {:>8.2}  {}",
            id,
            title,
            if o.pass() { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.headline()
        );
        outcomes.push(o);
    }

    let mut summary = String::from("criterion,title,pass,checks,failed,summary\n");
    let mut detail = String::from("criterion,check,value,bound,pass\n");
    for o in &outcomes {
        let failed = o.checks.iter().filter(|c| !c.pass).count();
        writeln!(
            summary,
            "{},{:?},{},{},{},{:?}",
            o.id,
            o.title,
            o.pass(),
            o.checks.len(),
            failed,
            o.headline()
        )
        .unwrap();
        for c in &o.checks {
            writeln!(
                detail,
                "{},{:?},{},{},{}",
                o.id,
                c.label,
                sci(c.value),
                sci(c.bound),
                c.pass
            )
            .unwrap();
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass()).count();
    println!("{passed}/{} criteria pass", outcomes.len());

    let mut run = Run::new("verify", &cli.output_dir);
    run.note("seed", args.seed);
    run.note("paths", args.paths);
    run.note("dominance_paths", args.dominance_paths);
    run.note("tolerances", tol);
    run.add("acceptance.csv", summary.into_bytes());
    run.add("acceptance_checks.csv", detail.into_bytes());
    run.finish()?;
    Ok(if passed == outcomes.len() { 0 } else { EXIT_VERIFY })
}
