//! One function per subcommand. Each writes its files into the output
//! directory and returns a JSON summary for stdout.

use serde_json::{json, Value};
use zermelo_core::cusp::{cusp_historical, cusp_numeric, CuspPoint};
use zermelo_core::flow::{exponential_state, integrate_numeric, GeodesicTrajectory, Termination};
use zermelo_core::lie::{abnormal_headings, classify, ExtremalKind, DEFAULT_CLASSIFY_TOL};
use zermelo_core::model::{angle_diff, Chart};
use zermelo_core::ode::StepControl;
use zermelo_core::reach::{
    cut_locus_estimate, discontinuity_scan, heading_grid, loop_time_estimate, self_intersections, sphere_and_ball,
    AbnormalArc, ShootingBundle, ShootingConfig, SphereBall, SPHERE_TOL,
};
use zermelo_core::{ExtendedState, Position, ProblemDefinition};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{ensure_dir, json_opt, json_string, num, opt, write_file, Table};
use crate::svg::Plot;

const TRAJECTORY_HEADER: [&str; 7] = ["t", "c1", "c2", "alpha", "res_H", "res_eq10", "res_C0"];

fn pos(q: Position) -> Value {
    json!([q[0], q[1]])
}

fn state_json(s: &ExtendedState) -> Value {
    json!([s.c1, s.c2, s.heading])
}

fn boundary_lines(plot: &mut Plot, p: &ProblemDefinition) {
    for r in p.unit_current_radii(-1e12, 1e12) {
        match p.chart {
            Chart::HistoricalCartesian => plot.hline("boundary", r),
            Chart::PolarLike => plot.vline("boundary", r),
        }
    }
}

fn trajectory_table(traj: &GeodesicTrajectory) -> Vec<u8> {
    let mut t = Table::new(&TRAJECTORY_HEADER);
    for (s, r) in traj.samples.iter().zip(&traj.residuals) {
        t.row([
            num(s.t),
            num(s.state.c1),
            num(s.state.c2),
            num(s.state.heading),
            opt(r.hamiltonian),
            opt(r.clairaut),
            opt(r.historical),
        ]);
    }
    t.finish()
}

fn max_of(it: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    it.flatten().reduce(f64::max)
}

fn termination_json(t: Termination) -> Value {
    match t {
        Termination::Completed => json!({"kind": "completed"}),
        Termination::DomainExit { t } => json!({"kind": "domain_exit", "t": t}),
    }
}

pub fn classify_cmd(cfg: &RunConfig) -> Result<Value, CliError> {
    let s = cfg.need_state()?;
    let c = classify(&cfg.problem, &s, cfg.tol.unwrap_or(DEFAULT_CLASSIFY_TOL))?;
    Ok(json!({
        "problem": cfg.descriptor,
        "state": state_json(&s),
        "d": c.data.d,
        "d_prime": c.data.d_prime,
        "d_second": c.data.d_second,
        "class": c.kind.as_str(),
    }))
}

pub fn integrate_cmd(cfg: &RunConfig) -> Result<Value, CliError> {
    let p = &cfg.problem;
    let s0 = cfg.need_state()?;
    let t = cfg.need_t()?;
    let ctl = StepControl::with_tol(cfg.tol.unwrap_or(1e-10)).max_step(t / 500.0);
    let kind = classify(p, &s0, DEFAULT_CLASSIFY_TOL)?.kind;
    let traj = integrate_numeric(p, &s0, t, ctl)?;
    let crossings = self_intersections(&traj);

    ensure_dir(&cfg.out)?;
    write_file(&cfg.out, "trajectory.csv", &trajectory_table(&traj))?;

    let mut plot = Plot::new();
    boundary_lines(&mut plot, p);
    plot.polyline(kind.as_str(), &traj.positions());
    plot.marker("origin", s0.position());
    for x in &crossings {
        plot.marker("jump", x.position);
    }
    write_file(&cfg.out, "trajectory.svg", plot.render("geodesic").as_bytes())?;

    let summary = json!({
        "problem": cfg.descriptor,
        "state": state_json(&s0),
        "t_final": t,
        "class": kind.as_str(),
        "termination": termination_json(traj.termination),
        "samples": traj.samples.len(),
        "adjoint": {
            "p_theta": traj.adjoint.p_theta,
            "p_zero": traj.adjoint.p_zero,
            "lambda0": traj.adjoint.lambda0,
        },
        "max_residual": {
            "hamiltonian": json_opt(max_of(traj.residuals.iter().map(|r| r.hamiltonian))),
            "eq10": json_opt(max_of(traj.residuals.iter().map(|r| r.clairaut))),
            "first_integral": json_opt(max_of(traj.residuals.iter().map(|r| r.historical))),
        },
        "self_intersections": crossings
            .iter()
            .map(|x| json!({"t1": x.t1, "t2": x.t2, "position": pos(x.position)}))
            .collect::<Vec<_>>(),
    });
    write_file(&cfg.out, "trajectory.json", json_string(&summary).as_bytes())?;
    Ok(summary)
}

/// Replaces the heading by the nearest abnormal heading when it lies within
/// `snap` radians, so that rounded command-line headings are accepted.
fn snap_to_abnormal(p: &ProblemDefinition, s: ExtendedState, snap: f64) -> Result<ExtendedState, CliError> {
    let (r, _) = p.chart.revolution_coords(s.position());
    let nearest = abnormal_headings(p, r)?.into_iter().min_by(|a, b| {
        angle_diff(*a, s.heading)
            .abs()
            .total_cmp(&angle_diff(*b, s.heading).abs())
    });
    Ok(match nearest {
        Some(h) if angle_diff(h, s.heading).abs() <= snap => ExtendedState::new(s.c1, s.c2, h),
        _ => s,
    })
}

fn cusp_json(c: Option<&CuspPoint>) -> Value {
    match c {
        Some(c) => json!({
            "t_cusp": c.t_cusp,
            "position": pos(c.position),
            "heading": c.heading_at_cusp,
            "source": c.source.as_str(),
        }),
        None => json!({"t_cusp": null, "position": null, "heading": null, "source": null}),
    }
}

pub fn cusp_cmd(cfg: &RunConfig) -> Result<Value, CliError> {
    let p = &cfg.problem;
    let s0 = snap_to_abnormal(p, cfg.need_state()?, cfg.tol.unwrap_or(1e-3))?;
    let t_max = cfg.t_max.unwrap_or(10.0);
    let cusp = if p.is_historical() {
        cusp_historical(&s0)?
    } else {
        cusp_numeric(p, &s0, t_max)?
    };
    let horizon = cusp.map_or(t_max, |c| 1.5 * c.t_cusp);
    let ctl = StepControl::with_tol(1e-12).max_step(horizon / 500.0);
    let traj = integrate_numeric(p, &s0, horizon, ctl)?;

    ensure_dir(&cfg.out)?;
    write_file(&cfg.out, "cusp_trajectory.csv", &trajectory_table(&traj))?;
    let report = cusp_json(cusp.as_ref());
    write_file(&cfg.out, "cusp.json", json_string(&report).as_bytes())?;

    let mut plot = Plot::new();
    boundary_lines(&mut plot, p);
    plot.polyline("abnormal", &traj.positions());
    plot.marker("origin", s0.position());
    if let Some(c) = cusp {
        plot.marker("cusp", c.position);
    }
    write_file(
        &cfg.out,
        "cusp.svg",
        plot.render("abnormal geodesic and cusp").as_bytes(),
    )?;
    Ok(report)
}

fn kind_class(k: ExtremalKind) -> &'static str {
    k.as_str()
}

/// Draws consecutive runs of front points sharing a class and a `keep` flag.
fn plot_front(
    plot: &mut Plot,
    sb: &SphereBall,
    keep: impl Fn(usize) -> bool,
    class_of: impl Fn(usize) -> &'static str,
) {
    let pts = &sb.wavefront.points;
    let mut run: Vec<Position> = Vec::new();
    let mut cls = "";
    for (i, pt) in pts.iter().enumerate() {
        let q = pt.position.filter(|_| keep(i));
        let c = class_of(i);
        if q.is_none() || c != cls {
            plot.polyline(cls, &run);
            run.clear();
        }
        if let Some(q) = q {
            run.push(q);
            cls = c;
        }
    }
    plot.polyline(cls, &run);
}

fn front_table(sb: &SphereBall) -> Vec<u8> {
    let mut t = Table::new(&["alpha0", "c1", "c2", "class", "is_sphere"]);
    for (pt, on) in sb.wavefront.points.iter().zip(&sb.on_sphere) {
        t.row([
            num(pt.alpha0),
            opt(pt.position.map(|q| q[0])),
            opt(pt.position.map(|q| q[1])),
            kind_class(pt.kind).to_string(),
            u8::from(*on).to_string(),
        ]);
    }
    t.finish()
}

fn front_summary(cfg: &RunConfig, q0: Position, t: f64, sb: &SphereBall) -> Value {
    json!({
        "problem": cfg.descriptor,
        "q0": pos(q0),
        "t": t,
        "n": sb.wavefront.points.len(),
        "excluded": sb.wavefront.points.iter().filter(|p| p.position.is_none()).count(),
        "sphere_points": sb.on_sphere.iter().filter(|b| **b).count(),
        "abnormal": sb.wavefront.abnormal.iter().zip(&sb.abnormal_on_sphere).map(|(pt, on)| json!({
            "alpha0": pt.alpha0,
            "position": pt.position.map_or(Value::Null, pos),
            "is_sphere": on,
        })).collect::<Vec<_>>(),
    })
}

fn sphere_for(cfg: &RunConfig) -> Result<(Position, f64, SphereBall), CliError> {
    let q0 = cfg.need_q0()?;
    let t = cfg.need_t()?;
    let sb = sphere_and_ball(&cfg.problem, q0, t, cfg.n.unwrap_or(256))?;
    Ok((q0, t, sb))
}

pub fn wavefront_cmd(cfg: &RunConfig) -> Result<Value, CliError> {
    let (q0, t, sb) = sphere_for(cfg)?;
    ensure_dir(&cfg.out)?;
    write_file(&cfg.out, "wavefront.csv", &front_table(&sb))?;
    let mut plot = Plot::new();
    boundary_lines(&mut plot, &cfg.problem);
    let pts = &sb.wavefront.points;
    plot_front(&mut plot, &sb, |_| true, |i| kind_class(pts[i].kind));
    plot.marker("origin", q0);
    write_file(&cfg.out, "wavefront.svg", plot.render("wavefront").as_bytes())?;
    let summary = front_summary(cfg, q0, t, &sb);
    write_file(&cfg.out, "wavefront.json", json_string(&summary).as_bytes())?;
    Ok(summary)
}

fn arcs_table(arcs: &[AbnormalArc]) -> Vec<u8> {
    let mut t = Table::new(&["branch", "alpha0", "t", "c1", "c2"]);
    for (b, arc) in arcs.iter().enumerate() {
        for (s, q) in &arc.samples {
            t.row([b.to_string(), num(arc.alpha0), num(*s), num(q[0]), num(q[1])]);
        }
    }
    t.finish()
}

fn arcs_json(arcs: &[AbnormalArc]) -> Value {
    Value::Array(
        arcs.iter()
            .enumerate()
            .map(|(b, a)| {
                json!({
                    "branch": b,
                    "alpha0": a.alpha0,
                    "t_end": a.samples.last().map(|s| s.0),
                    "cusp": cusp_json(a.cusp.as_ref()),
                })
            })
            .collect(),
    )
}

pub fn ball_cmd(cfg: &RunConfig) -> Result<Value, CliError> {
    let (q0, t, sb) = sphere_for(cfg)?;
    ensure_dir(&cfg.out)?;
    write_file(&cfg.out, "ball.csv", &front_table(&sb))?;
    write_file(&cfg.out, "ball_arcs.csv", &arcs_table(&sb.arcs))?;

    let mut plot = Plot::new();
    boundary_lines(&mut plot, &cfg.problem);
    let pts = &sb.wavefront.points;
    // sphere solid; the rest of the front kept for reference, elliptic dashed
    plot_front(
        &mut plot,
        &sb,
        |i| !sb.on_sphere[i],
        |i| match pts[i].kind {
            ExtremalKind::Elliptic => "elliptic",
            _ => "front",
        },
    );
    plot_front(&mut plot, &sb, |i| sb.on_sphere[i], |_| "hyperbolic");
    for arc in &sb.arcs {
        let qs: Vec<Position> = arc.samples.iter().map(|s| s.1).collect();
        plot.polyline("abnormal", &qs);
        if let Some(c) = arc.cusp {
            plot.marker("cusp", c.position);
        }
    }
    plot.marker("origin", q0);
    write_file(&cfg.out, "ball.svg", plot.render("time-minimal ball").as_bytes())?;

    let mut summary = front_summary(cfg, q0, t, &sb);
    summary["arcs"] = arcs_json(&sb.arcs);
    write_file(&cfg.out, "ball.json", json_string(&summary).as_bytes())?;
    Ok(summary)
}

pub fn value_cmd(cfg: &RunConfig) -> Result<Value, CliError> {
    let q0 = cfg.need_q0()?;
    let segment = cfg.need_segment()?;
    let n = cfg.n.unwrap_or(200);
    let search = ShootingConfig {
        t_max: cfg.t_max.unwrap_or(ShootingConfig::default().t_max),
        position_tol: cfg.tol.unwrap_or(ShootingConfig::default().position_tol),
        ..Default::default()
    };
    let scan = discontinuity_scan(&cfg.problem, q0, segment, n, search)?;

    ensure_dir(&cfg.out)?;
    let mut t = Table::new(&["s", "c1", "c2", "T", "alpha0_star", "flag"]);
    for x in &scan.samples {
        t.row([
            num(x.s),
            num(x.value.target[0]),
            num(x.value.target[1]),
            opt(x.value.t_min),
            opt(x.value.alpha0_star),
            x.value.flag.as_str().to_string(),
        ]);
    }
    write_file(&cfg.out, "value.csv", &t.finish())?;

    let report = json!({
        "problem": cfg.descriptor,
        "q0": pos(q0),
        "segment": [pos(segment.0), pos(segment.1)],
        "n": scan.samples.len(),
        "t_max": search.t_max,
        "position_tol": search.position_tol,
        "unreachable": scan.samples.iter().filter(|x| x.value.t_min.is_none()).count(),
        "jumps": scan.jumps.iter().map(|j| json!({
            "index": j.index,
            "s": j.s,
            "position": pos(j.position),
            "left_limit": json_opt(j.left_limit),
            "right_limit": json_opt(j.right_limit),
        })).collect::<Vec<_>>(),
    });
    write_file(&cfg.out, "jumps.json", json_string(&report).as_bytes())?;

    let mut plot = Plot::new();
    let curve: Vec<Position> = scan
        .samples
        .iter()
        .map(|x| [x.s, x.value.t_min.unwrap_or(f64::NAN)])
        .collect();
    plot.polyline("value", &curve);
    for j in &scan.jumps {
        for v in [j.left_limit, j.right_limit].into_iter().flatten() {
            plot.marker("jump", [j.s, v]);
        }
    }
    write_file(
        &cfg.out,
        "value.svg",
        plot.render("value function along the segment").as_bytes(),
    )?;
    Ok(report)
}

pub fn synthesis_cmd(cfg: &RunConfig) -> Result<Value, CliError> {
    let p = &cfg.problem;
    let q0 = cfg.need_q0()?;
    let t_max = cfg.t_max.unwrap_or(5.0);
    let n = cfg.n.unwrap_or(48);
    let cut = cut_locus_estimate(p, q0, t_max, n.max(180))?;
    let horizon = cut.horizon;
    let loop_time = loop_time_estimate(p, q0, t_max, n.max(180), 40)?;

    let bundle = ShootingBundle::new(
        p,
        q0,
        ShootingConfig {
            t_max: horizon,
            ..Default::default()
        },
    )?;
    let times: Vec<f64> = (0..=60).map(|k| horizon * k as f64 / 60.0).collect();
    let ctl = StepControl::with_tol(1e-12);

    ensure_dir(&cfg.out)?;
    let mut table = Table::new(&["alpha0", "t", "c1", "c2", "class", "optimal"]);
    let mut plot = Plot::new();
    boundary_lines(&mut plot, p);
    for h in heading_grid(n) {
        let s0 = ExtendedState::new(q0[0], q0[1], h);
        let kind = classify(p, &s0, DEFAULT_CLASSIFY_TOL)?.kind;
        let mut optimal_run: Vec<Position> = Vec::new();
        let mut still_optimal = true;
        for &t in &times {
            let Ok(s) = exponential_state(p, &s0, t, ctl) else {
                break;
            };
            let q = s.position();
            let optimal =
                still_optimal && (t == 0.0 || bundle.value(q)?.t_min.is_some_and(|v| (v - t).abs() <= SPHERE_TOL));
            still_optimal = optimal;
            if optimal {
                optimal_run.push(q);
            }
            table.row([
                num(s0.heading),
                num(t),
                num(q[0]),
                num(q[1]),
                kind.as_str().to_string(),
                u8::from(optimal).to_string(),
            ]);
        }
        plot.polyline(kind.as_str(), &optimal_run);
    }
    write_file(&cfg.out, "synthesis.csv", &table.finish())?;
    write_file(&cfg.out, "cutlocus.csv", &arcs_table(&cut.arcs))?;
    for arc in &cut.arcs {
        let qs: Vec<Position> = arc.samples.iter().map(|s| s.1).collect();
        plot.polyline("abnormal", &qs);
        if let Some(c) = arc.cusp {
            plot.marker("cusp", c.position);
        }
    }
    for sp in &cut.separating {
        plot.marker("jump", sp.position);
    }
    plot.marker("origin", q0);
    write_file(&cfg.out, "synthesis.svg", plot.render("optimal synthesis").as_bytes())?;

    let summary = json!({
        "problem": cfg.descriptor,
        "q0": pos(q0),
        "t_max": t_max,
        "horizon": horizon,
        "loop_time_estimate": json_opt(loop_time),
        "arcs": arcs_json(&cut.arcs),
        "separating": cut.separating.iter().map(|sp| json!({
            "t": sp.t,
            "position": pos(sp.position),
            "alpha_a": sp.alpha_a,
            "alpha_b": sp.alpha_b,
        })).collect::<Vec<_>>(),
    });
    write_file(&cfg.out, "synthesis.json", json_string(&summary).as_bytes())?;
    Ok(summary)
}
