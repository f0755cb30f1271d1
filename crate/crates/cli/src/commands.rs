//! The four model-driven subcommands.

use std::fmt::Write as _;

use serde_json::json;
use snlevy::definetti::{barrier_value, solve, SolveOptions};
use snlevy::levy::JumpMeasure;
use snlevy::scale::{
    laplace_residual, Algorithm, EulerParams, GridSpec, Method, ScaleGrid, ScaleOptions, LAPLACE_MARGIN,
};
use snlevy::shape::{excursion_sup_tail, excursion_tail_jump, shape_suite, ShapeReport, ShapeTolerances};
use snlevy::sim::{compare_strategies, simulate_with_paths, SimMode, SimOptions, StrategySpec};
use snlevy::LevyModel;

use crate::args::{Cli, GridArgs, ModelArgs, ScaleArgs, SimulateArgs, SolveArgs};
use crate::output::{load_input, sci, CmdResult, Failure, Input, Run, EXIT_VERIFY};

/// Per-path rows written at most.
pub const PER_PATH_CAP: usize = 10_000;
const TALBOT_NODES: usize = 24;

fn scale_options(g: &GridArgs) -> Result<ScaleOptions, Failure> {
    let algorithm = match g.algorithm.as_str() {
        "auto" => Algorithm::Auto,
        "euler" => Algorithm::EulerFourier(EulerParams::default()),
        "talbot" => Algorithm::FixedTalbot { nodes: TALBOT_NODES },
        other => {
            return Err(Failure::usage(format!(
                "unknown algorithm `{other}` (auto, euler, talbot)"
            )))
        }
    };
    let grid = GridSpec {
        points: g.points,
        x_max: g.x_max,
        ..GridSpec::default()
    };
    grid.nodes().map_err(Failure::usage)?;
    Ok(ScaleOptions {
        grid,
        method: Method {
            algorithm,
            ..Method::default()
        },
        ..ScaleOptions::default()
    })
}

fn check_q(q: f64, positive: bool) -> Result<(), Failure> {
    let ok = q.is_finite() && if positive { q > 0.0 } else { q >= 0.0 };
    if ok {
        Ok(())
    } else {
        let need = if positive { "q > 0" } else { "q >= 0" };
        Err(Failure::usage(format!("this command needs finite {need}, got {q}")))
    }
}

fn prepare(cli: &Cli, m: &ModelArgs, positive_q: bool) -> Result<Input, Failure> {
    let input = load_input(&m.model, &cli.tolerances)?;
    check_q(m.q, positive_q)?;
    Ok(input)
}

fn bytes_of(f: impl FnOnce(&mut Vec<u8>) -> snlevy::Result<()>, stage: &str) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| Failure::numeric(e, stage))?;
    Ok(buf)
}

pub fn compute_scale(cli: &Cli, a: &ScaleArgs) -> CmdResult {
    let input = prepare(cli, &a.model, false)?;
    let opts = scale_options(&a.grid)?;
    let model = &input.loaded.model;
    let q = a.model.q;
    let scale = ScaleGrid::compute(model, q, &opts).map_err(|e| Failure::numeric(e, "compute_scale"))?;

    let mut run = Run::new("compute-scale", &cli.output_dir);
    run.note_input(&input);
    run.note("q", q);
    run.note("grid", opts.grid);
    run.note("method", scale.method.id());
    run.add("scale.csv", bytes_of(|b| scale.write_csv(b), "write_scale")?);

    let mut csv = String::from("theta,residual,truncation_bound,tolerance,pass\n");
    let mut worst = 0.0f64;
    for d in [1.0, 2.0, 5.0] {
        let r = laplace_residual(&scale, model, scale.phi_q + d, LAPLACE_MARGIN)
            .map_err(|e| Failure::numeric(e, "laplace_residual"))?;
        worst = worst.max(r.residual);
        let pass = r.residual <= input.tolerances.laplace;
        writeln!(
            csv,
            "{},{},{},{},{pass}",
            sci(r.theta),
            sci(r.residual),
            sci(r.truncation_bound),
            sci(input.tolerances.laplace)
        )
        .unwrap();
    }
    run.add("laplace.csv", csv.into_bytes());

    println!("q              = {q}");
    println!("phi_q          = {:.12}", scale.phi_q);
    println!("W(0+)          = {:.12}", scale.w0);
    println!("method         = {}", scale.method.id());
    println!(
        "grid           = {} points on [{}, {}]",
        scale.xs.len(),
        scale.xs[0],
        scale.x_max()
    );
    println!(
        "laplace_max    = {worst:.3e} (tolerance {:.1e})",
        input.tolerances.laplace
    );
    run.finish()?;
    Ok(0)
}

fn structured(group: &str, name: &str, r: &ShapeReport) -> String {
    let body = r.to_structured();
    let rest = body.strip_prefix("[[report]]\n").unwrap_or(&body);
    format!("[[report]]\ngroup = \"{group}\"\nname = {name:?}\n{rest}\n")
}

pub fn analyze_shape(cli: &Cli, a: &ScaleArgs) -> CmdResult {
    let input = prepare(cli, &a.model, false)?;
    let opts = scale_options(&a.grid)?;
    let model = &input.loaded.model;
    let q = a.model.q;
    let scale_q = ScaleGrid::compute(model, q, &opts).map_err(|e| Failure::numeric(e, "compute_scale"))?;
    let scale_0 = if q > 0.0 {
        Some(ScaleGrid::compute(model, 0.0, &opts).map_err(|e| Failure::numeric(e, "compute_scale_q0"))?)
    } else {
        None
    };
    let tol = ShapeTolerances {
        second_diff: input.tolerances.second_diff,
        derivative: input.tolerances.derivative,
    };
    let suite = shape_suite(model, &scale_q, scale_0.as_ref(), &tol).map_err(|e| Failure::numeric(e, "shape_suite"))?;

    let mut rows: Vec<(&str, String, &ShapeReport)> = Vec::new();
    let certs = &suite.certificates;
    for (label, r) in [
        ("π log-convex", &certs.density),
        ("Π̄ log-convex", &certs.tail),
        ("Ῡ log-convex", &certs.upsilon),
    ] {
        if let Some(r) = r {
            rows.push(("hypothesis", label.to_string(), r));
        }
    }
    rows.extend(suite.conclusions.iter().map(|(n, r)| ("conclusion", n.clone(), r)));
    rows.extend(suite.observations.iter().map(|(n, r)| ("observation", n.clone(), r)));

    let mut text = String::new();
    let mut table =
        String::from("group,name,property,interval_lo,interval_hi,pass,worst_violation,location,tolerance,samples\n");
    for (group, name, r) in &rows {
        text.push_str(&structured(group, name, r));
        writeln!(
            table,
            "{group},{name:?},{},{},{},{},{},{},{},{}",
            r.property,
            sci(r.interval.0),
            sci(r.interval.1),
            r.pass,
            sci(r.worst_violation),
            sci(r.location),
            sci(r.tolerance),
            r.samples
        )
        .unwrap();
    }

    let zero = if q == 0.0 { Some(&scale_q) } else { scale_0.as_ref() };
    let excursion = match (model.bv_drift(), zero) {
        (Some(_), Some(z)) => Some(excursion_table(model, z)?),
        _ => None,
    };

    let mut run = Run::new("analyze-shape", &cli.output_dir);
    run.note_input(&input);
    run.note("q", q);
    run.note("grid", opts.grid);
    run.note("method", scale_q.method.id());
    run.add("shape.txt", text.into_bytes());
    run.add("shape.csv", table.into_bytes());
    if let Some((csv, _)) = &excursion {
        run.add("excursion.csv", csv.clone().into_bytes());
    }
    run.add_json(
        "shape.json",
        &json!({
            "q": q,
            "a_star": suite.a_star,
            "smoothness": suite.smoothness.to_string(),
            "pass": suite.pass(),
            "skipped": suite.skipped,
            "excursion_jumps": excursion.as_ref().map(|(_, j)| j),
            "suite": suite,
        }),
    );

    println!(
        "{:<28} {:<16} {:<24}       {:>11}   location",
        "name", "property", "interval", "worst"
    );
    for (_, name, r) in &rows {
        println!("{}", r.table_row(name));
    }
    if let Some(a) = &suite.a_star {
        println!(
            "a* = {:.9} (tie plateau [{:.4e}, {:.4e}], margin ok: {})",
            a.value, a.plateau.0, a.plateau.1, a.margin_ok
        );
    }
    println!("smoothness: {}", suite.smoothness);
    for s in &suite.skipped {
        println!("skipped: {s}");
    }
    if let Some((_, jumps)) = &excursion {
        for j in jumps {
            println!("excursion height tail jump at z = {}: {:.12e}", j.z, j.jump);
        }
    }
    run.finish()?;
    Ok(if suite.pass() { 0 } else { EXIT_VERIFY })
}

/// Excursion-height tail on a z grid, and its jumps at declared atoms.
fn excursion_table(model: &LevyModel, zero: &ScaleGrid) -> Result<(String, Vec<snlevy::shape::TailJump>), Failure> {
    let z_max = zero.x_max().min(5.0);
    let n = (z_max / 0.05).floor() as usize;
    let mut csv = String::from("z,tail\n");
    for k in 1..=n {
        let z = 0.05 * k as f64;
        let t = excursion_sup_tail(model, zero, z).map_err(|e| Failure::numeric(e, "excursion_tail"))?;
        writeln!(csv, "{},{}", sci(z), sci(t)).unwrap();
    }
    let mut jumps = Vec::new();
    if let JumpMeasure::Atoms(atoms) = model.jumps() {
        for at in atoms.iter().filter(|at| at.location < zero.x_max()) {
            jumps.push(
                excursion_tail_jump(model, zero, at.location).map_err(|e| Failure::numeric(e, "excursion_tail"))?,
            );
        }
    }
    Ok((csv, jumps))
}

pub fn solve_definetti(cli: &Cli, a: &SolveArgs) -> CmdResult {
    let input = prepare(cli, &a.model, true)?;
    let scale = scale_options(&a.grid)?;
    if a.hjb_points < 2 {
        return Err(Failure::usage("--hjb-points must be at least 2"));
    }
    let opts = SolveOptions {
        scale,
        hjb_points: a.hjb_points,
        hjb_rel: input.tolerances.hjb_rel,
        ..SolveOptions::default()
    };
    let q = a.model.q;
    let sol = solve(&input.loaded.model, q, &opts).map_err(|e| Failure::numeric(e, "solve"))?;

    let mut run = Run::new("solve-definetti", &cli.output_dir);
    run.note_input(&input);
    run.note("q", q);
    run.note("grid", opts.scale.grid);
    run.note("hjb_points", opts.hjb_points);
    run.note("edge", opts.edge);
    run.note("method", &sol.method);
    run.add("value.csv", bytes_of(|b| sol.write_value_csv(b), "write_value")?);
    run.add(
        "residuals.csv",
        bytes_of(|b| sol.write_residual_csv(b), "write_residuals")?,
    );
    run.add_json(
        "solution.json",
        &json!({
            "q": q,
            "a_star": sol.a_star,
            "x_max": sol.x_max,
            "extensions": sol.extensions,
            "verdict": sol.verdict,
            "reasons": sol.reasons,
            "max_interior_ratio": sol.max_interior_ratio(),
            "max_exterior_ratio": sol.max_exterior_ratio(),
            "min_value_slope": sol.min_slope(),
            "flagged": sol.flagged,
            "convexity_cert": sol.convexity_cert,
            "density_cert": sol.density_cert,
        }),
    );

    println!("[verdict]");
    println!("a_star             = {:.12}", sol.a_star.value);
    println!("verdict            = {}", sol.verdict);
    println!("max_interior_ratio = {:.3e}", sol.max_interior_ratio());
    println!("max_exterior_ratio = {:.3e}", sol.max_exterior_ratio());
    println!("flagged_near_a_star = {}", sol.flagged.len());
    println!("x_max              = {} ({} extensions)", sol.x_max, sol.extensions);
    for r in &sol.reasons {
        println!("reason             = {r}");
    }
    run.finish()?;
    Ok(sol.verdict.exit_code() as u8)
}

pub fn simulate(cli: &Cli, a: &SimulateArgs) -> CmdResult {
    let input = prepare(cli, &a.model, true)?;
    let q = a.model.q;
    if !(a.x0 >= 0.0 && a.x0.is_finite()) {
        return Err(Failure::usage(format!("--x0 must be finite and >= 0, got {}", a.x0)));
    }
    if a.paths < 2 {
        return Err(Failure::usage("--paths must be at least 2"));
    }
    for s in std::iter::once(&a.strategy).chain(&a.compare) {
        s.validate().map_err(Failure::usage)?;
    }
    let mode = match a.euler_step {
        Some(step) => SimMode::Euler { step, cutoff: a.cutoff },
        None => SimMode::Exact,
    };
    let opts = SimOptions {
        n_paths: a.paths,
        seed: a.seed,
        horizon: a.horizon,
        mode,
        beat_sigmas: input.tolerances.mc_sigmas,
        ..SimOptions::default()
    };
    let model = &input.loaded.model;
    let (est, outcomes) =
        simulate_with_paths(model, &a.strategy, q, a.x0, &opts).map_err(|e| Failure::numeric(e, "simulate"))?;
    let analytic = match a.strategy {
        StrategySpec::Barrier { a: level } => analytic_barrier(model, q, level, a.x0),
        _ => None,
    };

    let mut run = Run::new("simulate", &cli.output_dir);
    run.note_input(&input);
    run.note("q", q);
    run.note("x0", a.x0);
    run.note("seed", a.seed);
    run.note("paths", a.paths);
    run.note("strategy", a.strategy.to_string());
    run.note("mode", mode);
    run.note("horizon", est.horizon);
    run.add_json(
        "estimate.json",
        &json!({ "estimate": est, "analytic_barrier_value": analytic }),
    );

    if a.per_path {
        let mut csv = String::from("path,payout,ruin_time,claims\n");
        for (i, o) in outcomes.iter().take(PER_PATH_CAP).enumerate() {
            let ruin = o.ruin_time.map(sci).unwrap_or_default();
            writeln!(csv, "{i},{},{ruin},{}", sci(o.payout), o.claims).unwrap();
        }
        run.note("per_path_rows", outcomes.len().min(PER_PATH_CAP));
        run.add("paths.csv", csv.into_bytes());
    }

    println!("[estimate]");
    println!("strategy        = {}", est.strategy);
    println!("mean            = {:.10}", est.mean);
    println!("std_error       = {:.3e}", est.std_error);
    println!("paths           = {}", est.n_paths);
    println!("seed            = {}", est.seed);
    println!("horizon         = {}", est.horizon);
    println!("truncation_bias = {:.3e}", est.truncation_bias_bound);
    println!("ruin_fraction   = {:.6}", est.ruin_fraction);
    println!("approximate     = {}", est.approximate);
    if let Some(v) = analytic {
        println!("analytic        = {v:.10} (z = {:.2})", (est.mean - v) / est.std_error);
    }

    if !a.compare.is_empty() {
        let mut all = vec![a.strategy];
        all.extend(&a.compare);
        let cmp = compare_strategies(model, q, a.x0, &all, &opts).map_err(|e| Failure::numeric(e, "compare"))?;
        let mut csv = String::from("strategy,mean,std_error,diff_mean,diff_se,beats_reference\n");
        writeln!(
            csv,
            "{},{},{},{},{},false",
            cmp.reference.strategy,
            sci(cmp.reference.mean),
            sci(cmp.reference.std_error),
            sci(0.0),
            sci(0.0)
        )
        .unwrap();
        println!(
            "[comparison] reference {} = {:.8} ± {:.2e}",
            cmp.reference.strategy, cmp.reference.mean, cmp.reference.std_error
        );
        for r in &cmp.rows {
            writeln!(
                csv,
                "{},{},{},{},{},{}",
                r.estimate.strategy,
                sci(r.estimate.mean),
                sci(r.estimate.std_error),
                sci(r.diff_mean),
                sci(r.diff_se),
                r.beats_reference
            )
            .unwrap();
            println!(
                "  {:<32} {:.8}  diff {:+.3e} ± {:.2e}{}",
                r.estimate.strategy,
                r.estimate.mean,
                r.diff_mean,
                r.diff_se,
                if r.beats_reference { "  beats reference" } else { "" }
            );
        }
        run.add("comparison.csv", csv.into_bytes());
    }
    run.finish()?;
    Ok(0)
}

/// `v_a(x0)` from the scale function, when it can be computed.
fn analytic_barrier(model: &LevyModel, q: f64, a: f64, x0: f64) -> Option<f64> {
    if a.is_nan() || a <= 0.0 {
        return None;
    }
    let opts = ScaleOptions {
        grid: GridSpec::default().with_x_max(10f64.max(1.5 * a)),
        ..ScaleOptions::default()
    };
    let scale = ScaleGrid::compute(model, q, &opts).ok()?;
    barrier_value(&scale, a, x0).ok()
}
