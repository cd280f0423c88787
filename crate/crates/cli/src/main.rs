mod out;
mod spec;

use cantor_forge_core::{
    a_m, aprime, grid_attractor, grid_second_gen, n_epsilon, second_gen_attractor,
    sum_is_interval, ContractionMap, Error, FirstGen, Ifs, IntervalUnion, Mode, Result, Scalar,
    SecondGenOptions, TailCertificate,
};
use clap::{Args, Parser, Subcommand};
use out::{interval_json, opt_scalar_json, scalar_json, Lane};
use serde_json::{json, Value};
use spec::{JobSpec, Resolved};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "cantor-forge", version, about = "Attractors of interval map systems as certified unions of closed intervals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cover of the first-stage attractor at a chosen depth.
    Attractor(JobArgs),
    /// Second-stage attractor: maps x -> alpha*x + (1-alpha)*beta, beta in the first stage.
    SecondGen(JobArgs),
    /// Decide whether a Minkowski sum of dissection sets fills one interval.
    SumCheck(JobArgs),
    /// Validate a dissection and report its ratio-floor calculus.
    UlbdCheck(JobArgs),
    /// Gaps of the first stage, to a depth or above a width.
    Gaps(JobArgs),
    /// Windows the second stage certainly misses.
    Neps(JobArgs),
    /// Cross-check the interval pipeline against the grid oracle.
    OracleCompare(JobArgs),
    /// Render the lanes picture for a system.
    Plot(JobArgs),
}

#[derive(Args)]
struct JobArgs {
    /// Job description (JSON).
    #[arg(long, value_name = "FILE")]
    spec: PathBuf,
    /// Directory for intervals.txt, intervals.csv, report.json, plot.svg.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Override the spec's alpha ("p/q" or decimal).
    #[arg(long)]
    alpha: Option<String>,
    /// Override the spec's series head length.
    #[arg(long)]
    n: Option<u32>,
    /// Override the spec's cover/seed depth.
    #[arg(long)]
    depth: Option<u32>,
    /// Override the spec's excluded-window eps.
    #[arg(long)]
    eps: Option<String>,
    /// Override the spec's comparison tolerance.
    #[arg(long)]
    tol: Option<String>,
    /// Override the spec's mode (empirical | certified).
    #[arg(long)]
    mode: Option<String>,
    /// Also write plot.svg.
    #[arg(long)]
    svg: bool,
    /// Override the spec's oracle grid step.
    #[arg(long)]
    grid_h: Option<f64>,
    /// Override the spec's oracle beta sampling depth.
    #[arg(long)]
    beta_depth: Option<u32>,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    match cli.command {
        Command::Attractor(a) => cmd_attractor(a, started),
        Command::SecondGen(a) => cmd_second_gen(a, started),
        Command::SumCheck(a) => cmd_sum_check(a, started),
        Command::UlbdCheck(a) => cmd_ulbd_check(a, started),
        Command::Gaps(a) => cmd_gaps(a, started),
        Command::Neps(a) => cmd_neps(a, started),
        Command::OracleCompare(a) => cmd_oracle_compare(a, started),
        Command::Plot(a) => cmd_plot(a, started),
    }
}

struct Job {
    spec: JobSpec,
    resolved: Resolved,
    out: PathBuf,
}

fn prepare(args: &JobArgs) -> Result<Job> {
    let spec = spec::load(&args.spec)?;
    let resolved = spec::resolve_system(&spec.system)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| Error::Input(format!("out dir {}: {e}", args.out.display())))?;
    Ok(Job {
        spec,
        resolved,
        out: args.out.clone(),
    })
}

/// Flag value if given, else the spec field, each parsed under its own name.
fn effective(
    flag: &Option<String>,
    field: &Option<spec::ScalarSpec>,
    flag_name: &str,
    field_name: &str,
) -> Result<Option<Scalar>> {
    if let Some(text) = flag {
        return Scalar::parse(text)
            .map(Some)
            .map_err(|e| Error::Input(format!("{flag_name}: {e}")));
    }
    match field {
        Some(s) => s.resolve(field_name).map(Some),
        None => Ok(None),
    }
}

fn need_alpha(args: &JobArgs, spec: &JobSpec) -> Result<(Scalar, String)> {
    let path = if args.alpha.is_some() { "--alpha" } else { "spec.alpha" };
    let alpha = effective(&args.alpha, &spec.alpha, "--alpha", "spec.alpha")?
        .ok_or_else(|| Error::Input("spec.alpha: required for this command".into()))?;
    if !(alpha.is_positive() && alpha < Scalar::one()) {
        return Err(Error::Input(format!("{path}: {alpha} is outside (0, 1)")));
    }
    Ok((alpha, path.to_string()))
}

fn parse_mode(args: &JobArgs, spec: &JobSpec) -> Result<Mode> {
    let (text, path) = match (&args.mode, &spec.mode) {
        (Some(t), _) => (t.as_str(), "--mode"),
        (None, Some(t)) => (t.as_str(), "spec.mode"),
        (None, None) => return Ok(Mode::Empirical),
    };
    match text.to_ascii_lowercase().as_str() {
        "empirical" => Ok(Mode::Empirical),
        "certified" => Ok(Mode::Certified),
        other => Err(Error::Input(format!(
            "{path}: unknown mode {other:?} (expected empirical or certified)"
        ))),
    }
}

fn floor_calculus(fg: &FirstGen) -> (Value, Value, Value) {
    match fg.floor() {
        Some(a) => {
            let ladder: Vec<Value> = (1..=4)
                .filter_map(|m| a_m(a, m).ok())
                .map(|v| scalar_json(&v))
                .collect();
            (
                scalar_json(a),
                scalar_json(&aprime(a)),
                Value::Array(ladder),
            )
        }
        None => (Value::Null, Value::Null, Value::Null),
    }
}

fn timings(started: Instant) -> Value {
    json!({ "total_ms": started.elapsed().as_secs_f64() * 1e3 })
}

fn cmd_attractor(args: JobArgs, started: Instant) -> Result<()> {
    let job = prepare(&args)?;
    let depth = args.depth.or(job.spec.depth).unwrap_or(10);
    let cover = job.resolved.fg.outer_cover(depth)?;
    let hull = job.resolved.fg.hull();
    let (a, a_prime, ladder) = floor_calculus(&job.resolved.fg);
    out::write_intervals(&job.out, &cover)?;
    out::write_report(
        &job.out,
        &json!({
            "command": "attractor",
            "a": a,
            "a_prime": a_prime,
            "a_m": ladder,
            "c": Value::Null,
            "n": depth,
            "parts": cover.count(),
            "hull": interval_json(hull),
            "certificates": Value::Null,
            "timings": timings(started),
        }),
    )?;
    if args.svg {
        out::write_svg(
            &job.out.join("plot.svg"),
            hull,
            &[Lane { label: "first stage", set: &cover, color: "#555555" }],
        )?;
    }
    println!("attractor cover: {} parts at depth {depth}", cover.count());
    Ok(())
}

fn tail_json(cert: &TailCertificate) -> Value {
    match cert {
        TailCertificate::SolidInput => json!({ "tail": "solid-input" }),
        TailCertificate::FoldCount { n_cert, window } => json!({
            "tail": "fold-count",
            "n_cert": n_cert,
            "window": [scalar_json(&window.0), scalar_json(&window.1)],
        }),
        TailCertificate::Empirical { stable_checks } => json!({
            "tail": "empirical",
            "stable_checks": stable_checks,
        }),
    }
}

fn tail_label(cert: &TailCertificate) -> String {
    match cert {
        TailCertificate::SolidInput => "solid-input".into(),
        TailCertificate::FoldCount { n_cert, .. } => format!("fold-count(n_cert = {n_cert})"),
        TailCertificate::Empirical { .. } => "empirical".into(),
    }
}

fn second_gen_options(args: &JobArgs, job: &Job) -> Result<(SecondGenOptions, String)> {
    let (alpha, alpha_path) = need_alpha(args, &job.spec)?;
    let mut opts = SecondGenOptions::new(alpha);
    opts.n = args.n.or(job.spec.n);
    opts.mode = parse_mode(args, &job.spec)?;
    if let Some(d) = args.depth.or(job.spec.depth) {
        opts.seed_depth = d;
    }
    opts.merge_tau = effective(&None, &job.spec.merge_tau, "", "spec.merge_tau")?;
    if let Some(b) = job.spec.part_budget {
        opts.part_budget = b;
    }
    Ok((opts, alpha_path))
}

fn cmd_second_gen(args: JobArgs, started: Instant) -> Result<()> {
    let job = prepare(&args)?;
    let (opts, _) = second_gen_options(&args, &job)?;
    let res = second_gen_attractor(&job.resolved.fg, &opts)?;
    let eps = effective(&args.eps, &job.spec.eps, "--eps", "spec.eps")?;
    let excluded = match &eps {
        Some(e) => Some(n_epsilon(&job.resolved.fg, &opts.alpha, e)?),
        None => None,
    };
    let (a, a_prime, ladder) = floor_calculus(&job.resolved.fg);
    out::write_intervals(&job.out, &res.set)?;
    out::write_report(
        &job.out,
        &json!({
            "command": "second-gen",
            "alpha": scalar_json(&opts.alpha),
            "a": a,
            "a_prime": a_prime,
            "a_m": ladder,
            "c": opt_scalar_json(&res.floor),
            "n": res.n_used,
            "parts": res.set.count(),
            "hull": interval_json(&res.hull),
            "excluded": excluded.as_ref().map(|w| w.len()),
            "certificates": {
                "tail": tail_json(&res.certificate),
                "n_cert_estimate": res.n_cert_estimate,
                "outer_slack": res.outer_slack,
                "merge_tau": scalar_json(&res.merge_tau),
                "fixed_point_iterations": res.fixed_point_iterations,
            },
            "timings": timings(started),
        }),
    )?;
    if args.svg {
        let cover = job.resolved.fg.outer_cover(6)?;
        let mut lanes = vec![
            Lane { label: "first stage", set: &cover, color: "#555555" },
            Lane { label: "second stage", set: &res.set, color: "#1f77b4" },
        ];
        let windows = excluded
            .as_ref()
            .map(|w| IntervalUnion::exact(w.clone()));
        if let Some(w) = &windows {
            lanes.push(Lane { label: "excluded", set: w, color: "#d62728" });
        }
        out::write_svg(&job.out.join("plot.svg"), &res.hull, &lanes)?;
    }
    let mut line = format!(
        "second-gen: {} parts; n = {}; tail = {}",
        res.set.count(),
        res.n_used,
        tail_label(&res.certificate)
    );
    if let Some(w) = &excluded {
        line.push_str(&format!("; excluded windows = {}", w.len()));
    }
    println!("{line}");
    Ok(())
}

fn cmd_sum_check(args: JobArgs, started: Instant) -> Result<()> {
    let job = prepare(&args)?;
    let (parts, a) = job.resolved.sum.as_ref().ok_or_else(|| {
        Error::Input("spec.system: sum-check needs a system of kind \"sum\"".into())
    })?;
    let cert = sum_is_interval(parts, a)?;
    let set = match &cert.interval {
        Some(iv) => IntervalUnion::exact(vec![iv.clone()]),
        None => IntervalUnion::exact(vec![]),
    };
    out::write_intervals(&job.out, &set)?;
    out::write_report(
        &job.out,
        &json!({
            "command": "sum-check",
            "a": scalar_json(a),
            "a_prime": scalar_json(&aprime(a)),
            "a_m": scalar_json(&cert.a_used),
            "c": Value::Null,
            "n": parts.len(),
            "certificates": {
                "certified": cert.certified,
                "a_used": scalar_json(&cert.a_used),
                "m": cert.m,
                "value": scalar_json(&cert.value),
                "min_diameter": scalar_json(&cert.min_diameter),
                "max_gap": scalar_json(&cert.max_gap),
                "exhaustive": cert.exhaustive,
                "interval": cert.interval.as_ref().map(interval_json),
            },
            "timings": timings(started),
        }),
    )?;
    println!(
        "sum-check: certified = {}; value = {}; m = {}",
        cert.certified, cert.value, cert.m
    );
    Ok(())
}

fn cmd_ulbd_check(args: JobArgs, started: Instant) -> Result<()> {
    let job = prepare(&args)?;
    let depth = args.depth.or(job.spec.depth).unwrap_or(10);
    let (a, a_prime, ladder) = floor_calculus(&job.resolved.fg);
    let report;
    let line;
    if let Some(c) = &job.resolved.construction {
        c.validate(depth)?;
        let bound = c.ulbd_bound(depth)?;
        let smooth_floor = match &job.resolved.ifs {
            Some(ifs) => Some(ifs.ratio_floor()?),
            None => None,
        };
        out::write_intervals(&job.out, &c.cover(depth.min(12))?)?;
        report = json!({
            "command": "ulbd-check",
            "a": a,
            "a_prime": a_prime,
            "a_m": ladder,
            "c": opt_scalar_json(&smooth_floor),
            "n": depth,
            "certificates": {
                "bound": scalar_json(&bound.bound),
                "depth_checked": bound.depth_checked,
                "exhaustive": bound.exhaustive,
            },
            "timings": timings(started),
        });
        line = format!(
            "ulbd-check: bound = {} to depth {} (exhaustive = {})",
            bound.bound, bound.depth_checked, bound.exhaustive
        );
    } else if let Some(ifs) = &job.resolved.ifs {
        let c_floor = ifs.ratio_floor()?;
        out::write_intervals(&job.out, &job.resolved.fg.outer_cover(depth.min(12))?)?;
        report = json!({
            "command": "ulbd-check",
            "a": a,
            "a_prime": a_prime,
            "a_m": ladder,
            "c": scalar_json(&c_floor),
            "n": depth,
            "certificates": { "smooth_floor": scalar_json(&c_floor) },
            "timings": timings(started),
        });
        line = format!("ulbd-check: smooth ratio floor c = {c_floor}");
    } else {
        return Err(Error::Input(
            "spec.system: a solid interval carries no dissection to check".into(),
        ));
    }
    out::write_report(&job.out, &report)?;
    println!("{line}");
    Ok(())
}

fn cmd_gaps(args: JobArgs, started: Instant) -> Result<()> {
    let job = prepare(&args)?;
    let depth = args.depth.or(job.spec.depth).unwrap_or(10);
    let wider = effective(&None, &job.spec.wider_than, "", "spec.wider_than")?;
    let gaps = match (&job.resolved.construction, &wider) {
        (Some(c), Some(w)) => c.gaps_wider_than(w)?,
        (Some(c), None) => c.gaps_to_depth(depth)?,
        (None, _) => {
            let mut gs = job.resolved.fg.outer_cover(depth)?.gaps();
            if let Some(w) = &wider {
                gs.retain(|g| &g.diameter() > w);
            }
            gs
        }
    };
    let set = IntervalUnion::exact(gaps);
    out::write_intervals(&job.out, &set)?;
    out::write_report(
        &job.out,
        &json!({
            "command": "gaps",
            "n": depth,
            "parts": set.count(),
            "wider_than": opt_scalar_json(&wider),
            "timings": timings(started),
        }),
    )?;
    println!("gaps: {} open intervals", set.count());
    Ok(())
}

fn cmd_neps(args: JobArgs, started: Instant) -> Result<()> {
    let job = prepare(&args)?;
    let (alpha, _) = need_alpha(&args, &job.spec)?;
    let eps = effective(&args.eps, &job.spec.eps, "--eps", "spec.eps")?
        .ok_or_else(|| Error::Input("spec.eps: required for this command".into()))?;
    let windows = n_epsilon(&job.resolved.fg, &alpha, &eps)?;
    let set = IntervalUnion::exact(windows);
    out::write_intervals(&job.out, &set)?;
    out::write_report(
        &job.out,
        &json!({
            "command": "neps",
            "alpha": scalar_json(&alpha),
            "eps": scalar_json(&eps),
            "parts": set.count(),
            "timings": timings(started),
        }),
    )?;
    println!("excluded windows: {}", set.count());
    Ok(())
}

/// Map form of the system for the grid side: the declared maps when given,
/// synthesized two maps for self-similar dissections, touching halves for a
/// solid interval.
fn oracle_ifs(job: &Job) -> Result<Ifs> {
    if let Some(ifs) = &job.resolved.ifs {
        return Ok(ifs.clone());
    }
    if let Some(c) = &job.resolved.construction {
        return spec::synthesize_ifs(c);
    }
    let hull = job.resolved.fg.hull();
    let half = Scalar::ratio(1, 2);
    Ok(Ifs::new(vec![
        ContractionMap::affine(half.clone(), &half * hull.lo())?,
        ContractionMap::affine(half.clone(), &half * hull.hi())?,
    ])?)
}

fn cmd_oracle_compare(args: JobArgs, started: Instant) -> Result<()> {
    let job = prepare(&args)?;
    let ifs = oracle_ifs(&job)?;
    let hull = job.resolved.fg.hull();
    let diameter = hull.diameter().to_f64();
    let h = args.grid_h.or(job.spec.grid_h).unwrap_or(diameter / 4096.0);
    let max_iter = job.spec.max_iter.unwrap_or(10_000);
    let has_alpha = args.alpha.is_some() || job.spec.alpha.is_some();
    let (checked, oracle, label) = if has_alpha {
        let (opts, _) = second_gen_options(&args, &job)?;
        let res = second_gen_attractor(&job.resolved.fg, &opts)?;
        let beta_depth = args.beta_depth.or(job.spec.beta_depth).unwrap_or(8);
        let grid = grid_second_gen(&ifs, opts.alpha.to_f64(), h, beta_depth, max_iter)?;
        (res.set, grid, "second-gen")
    } else {
        let depth = args.depth.or(job.spec.depth).unwrap_or(10);
        let cover = job.resolved.fg.outer_cover(depth)?;
        let grid = grid_attractor(&ifs, h, max_iter)?;
        (cover, grid, "attractor")
    };
    let distance = checked.hausdorff(&oracle.to_union())?;
    let tol = effective(&args.tol, &job.spec.tol, "--tol", "spec.tol")?
        .unwrap_or_else(|| Scalar::from_f64(diameter / 100.0));
    let pass = distance <= tol;
    out::write_intervals(&job.out, &checked)?;
    out::write_report(
        &job.out,
        &json!({
            "command": "oracle-compare",
            "target": label,
            "grid_h": h,
            "parts": checked.count(),
            "oracle_cells": oracle.cell_count(),
            "hausdorff": distance.to_f64(),
            "tol": scalar_json(&tol),
            "pass": pass,
            "timings": timings(started),
        }),
    )?;
    println!(
        "oracle-compare[{label}]: hausdorff = {}; tol = {}; {}",
        distance.to_f64(),
        tol,
        if pass { "PASS" } else { "FAIL" }
    );
    if !pass {
        return Err(Error::Internal(format!(
            "grid oracle disagrees: hausdorff {} exceeds tol {tol}",
            distance.to_f64()
        )));
    }
    Ok(())
}

fn cmd_plot(args: JobArgs, started: Instant) -> Result<()> {
    let job = prepare(&args)?;
    let depth = args.depth.or(job.spec.depth).unwrap_or(6);
    let hull = job.resolved.fg.hull().clone();
    let cover = job.resolved.fg.outer_cover(depth)?;
    let mut lanes = vec![Lane { label: "first stage", set: &cover, color: "#555555" }];
    let alpha = effective(&args.alpha, &job.spec.alpha, "--alpha", "spec.alpha")?;
    let second;
    let windows;
    if let Some(alpha) = &alpha {
        let (opts, _) = second_gen_options(&args, &job)?;
        second = second_gen_attractor(&job.resolved.fg, &opts)?.set;
        lanes.push(Lane { label: "second stage", set: &second, color: "#1f77b4" });
        let eps = effective(&args.eps, &job.spec.eps, "--eps", "spec.eps")?;
        if let Some(e) = &eps {
            windows = IntervalUnion::exact(n_epsilon(&job.resolved.fg, alpha, e)?);
            lanes.push(Lane { label: "excluded", set: &windows, color: "#d62728" });
        }
    }
    let path = job.out.join("plot.svg");
    out::write_svg(&path, &hull, &lanes)?;
    out::write_report(
        &job.out,
        &json!({
            "command": "plot",
            "n": depth,
            "lanes": lanes.len(),
            "timings": timings(started),
        }),
    )?;
    println!("plot: {}", path.display());
    Ok(())
}
