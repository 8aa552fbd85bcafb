//! Reachable sets: wavefronts, small spheres and balls, the time-minimal value
//! function by two-stage shooting, its discontinuities, and the cut locus.
//!
//! All distances are measured on embedded positions ([`Chart::embed`]), so
//! polar charts do not distinguish `θ` from `θ + 2π`.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::cusp::{abnormal_initial_states, cusp_historical, cusp_numeric, CuspPoint};
use crate::error::{Error, Result};
use crate::flow::{
    exponential_state, integrate_closed_form_historical, position_velocity, states_at_times, GeodesicTrajectory,
};
use crate::geometry::{polyline_self_intersections, winding_number};
use crate::lie::{abnormal_headings, classify, ExtremalKind, DEFAULT_CLASSIFY_TOL};
use crate::model::{angle_diff, wrap_angle, Chart, ExtendedState, Position, ProblemDefinition};
use crate::ode::StepControl;

/// Integrator tolerance for every endpoint evaluation in this module.
pub const FLOW_TOL: f64 = 1e-12;

/// Tolerance on `|T − t|` for a wavefront point to count as a sphere point.
pub const SPHERE_TOL: f64 = 1e-6;

/// Tolerance on `|T − t|` when confirming separating-line candidates, which
/// are located only to wavefront resolution.
pub const SEPARATING_TOL: f64 = 5e-3;

/// Headings this close to an abnormal heading are reported as reaching the
/// target through the abnormal geodesic.
pub const ABNORMAL_HEADING_TOL: f64 = 1e-4;

/// Largest time gap over which a fold hit is resolved onto the abnormal.
pub const FOLD_SNAP_TIME: f64 = 1e-4;

fn flow_ctl() -> StepControl {
    StepControl::with_tol(FLOW_TOL)
}

fn endpoint(p: &ProblemDefinition, q0: Position, heading: f64, t: f64) -> Option<ExtendedState> {
    exponential_state(p, &ExtendedState::new(q0[0], q0[1], heading), t, flow_ctl()).ok()
}

fn sub(a: Position, b: Position) -> Position {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: Position, b: Position) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm(a: Position) -> f64 {
    a[0].hypot(a[1])
}

/// `n` evenly spaced headings over `(−π, π]`, the last one being `π`.
pub fn heading_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| -PI + TAU * (i + 1) as f64 / n as f64).collect()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Inverse of [`Chart::embed`], choosing the polar angle closest to `theta_ref`.
fn unembed(chart: Chart, e: Position, theta_ref: f64) -> Position {
    match chart {
        Chart::HistoricalCartesian => e,
        Chart::PolarLike => {
            let th = e[1].atan2(e[0]);
            [norm(e), theta_ref + angle_diff(th, theta_ref)]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavefrontPoint {
    pub alpha0: f64,
    /// `None` when the geodesic leaves the domain before `t`.
    pub position: Option<Position>,
    pub kind: ExtremalKind,
}

/// Extremity map at a fixed time, sampled over initial headings.
///
/// `points` holds the regular heading grid; the abnormal headings, which
/// generally fall between grid values, are kept apart in `abnormal`.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefront {
    pub t: f64,
    pub q0: Position,
    pub points: Vec<WavefrontPoint>,
    pub abnormal: Vec<WavefrontPoint>,
}

impl Wavefront {
    fn embedded(&self, chart: Chart, idx: &[usize]) -> Option<Vec<Position>> {
        idx.iter()
            .map(|&i| self.points[i].position.map(|q| chart.embed(q)))
            .collect()
    }
}

fn front_point(p: &ProblemDefinition, q0: Position, t: f64, heading: f64) -> Result<WavefrontPoint> {
    let s0 = ExtendedState::new(q0[0], q0[1], heading);
    let kind = classify(p, &s0, DEFAULT_CLASSIFY_TOL)?.kind;
    Ok(WavefrontPoint {
        alpha0: s0.heading,
        position: endpoint(p, q0, heading, t).map(|s| s.position()),
        kind,
    })
}

pub fn wavefront(p: &ProblemDefinition, q0: Position, t: f64, n_alpha: usize) -> Result<Wavefront> {
    if n_alpha < 8 {
        return Err(Error::InvalidParameter(format!(
            "n_alpha must be at least 8, got {n_alpha}"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "wavefront time must be positive, got {t}"
        )));
    }
    let (r0, _) = p.chart.revolution_coords(q0);
    let points = heading_grid(n_alpha)
        .into_par_iter()
        .map(|h| front_point(p, q0, t, h))
        .collect::<Result<Vec<_>>>()?;
    let abnormal = abnormal_headings(p, r0)?
        .into_iter()
        .map(|h| front_point(p, q0, t, h))
        .collect::<Result<Vec<_>>>()?;
    Ok(Wavefront {
        t,
        q0,
        points,
        abnormal,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingConfig {
    /// Regular headings of the coarse grid; the abnormal headings are added.
    pub n_headings: usize,
    pub t_max: f64,
    /// Endpoint distance accepted as a hit.
    pub position_tol: f64,
    pub max_iter: usize,
    /// Target spacing of the coarse time grid.
    pub time_step: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        ShootingConfig {
            n_headings: 720,
            t_max: 4.0,
            position_tol: 1e-8,
            max_iter: 80,
            time_step: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalFlag {
    Interior,
    ViaAbnormal,
}

impl TerminalFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminalFlag::Interior => "interior",
            TerminalFlag::ViaAbnormal => "via_abnormal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueSample {
    pub target: Position,
    /// `None` when no geodesic reaches the target by `t_max`.
    pub t_min: Option<f64>,
    /// `None` when unreachable or when the target is `q0` itself.
    pub alpha0_star: Option<f64>,
    pub flag: TerminalFlag,
}

struct Cell {
    i: usize,
    k: usize,
    bbox: [f64; 4],
}

fn bbox_of(pts: &[Position]) -> [f64; 4] {
    let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
    for q in pts {
        b[0] = b[0].min(q[0]);
        b[1] = b[1].max(q[0]);
        b[2] = b[2].min(q[1]);
        b[3] = b[3].max(q[1]);
    }
    // generous margin: cell images are curved and may fold
    let m = 0.5 * (b[1] - b[0]).max(b[3] - b[2]) + 1e-9;
    [b[0] - m, b[1] + m, b[2] - m, b[3] + m]
}

fn in_bbox(b: &[f64; 4], q: Position) -> bool {
    q[0] >= b[0] && q[0] <= b[1] && q[1] >= b[2] && q[1] <= b[3]
}

/// Coarse `(α0, t)` grid of endpoints from a fixed `q0`, reused across many
/// value-function queries.
pub struct ShootingBundle<'a> {
    p: &'a ProblemDefinition,
    q0: Position,
    cfg: ShootingConfig,
    headings: Vec<f64>,
    abnormal: Vec<usize>,
    times: Vec<f64>,
    grid: Vec<Vec<Option<Position>>>,
    cells: Vec<Cell>,
}

impl<'a> ShootingBundle<'a> {
    pub fn new(p: &'a ProblemDefinition, q0: Position, cfg: ShootingConfig) -> Result<Self> {
        if cfg.n_headings < 8 || !(cfg.t_max > 0.0) || !(cfg.position_tol > 0.0) || !(cfg.time_step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "invalid shooting configuration {cfg:?}"
            )));
        }
        let (r0, _) = p.chart.revolution_coords(q0);
        p.check_radius(r0)?;
        let mut headings = heading_grid(cfg.n_headings);
        let abn = abnormal_headings(p, r0)?;
        headings.extend(&abn);
        headings.sort_by(f64::total_cmp);
        headings.dedup();
        let abnormal = abn
            .iter()
            .filter_map(|a| headings.iter().position(|h| h == a))
            .collect();

        let k_steps = (cfg.t_max / cfg.time_step).ceil().max(1.0) as usize;
        let times = linspace(0.0, cfg.t_max, k_steps + 1);
        let grid: Vec<Vec<Option<Position>>> = headings.par_iter().map(|&h| Self::column(p, q0, h, &times)).collect();

        let nh = headings.len();
        let mut cells = Vec::new();
        for k in 0..k_steps {
            for i in 0..nh {
                let j = (i + 1) % nh;
                let corners = [grid[i][k], grid[i][k + 1], grid[j][k], grid[j][k + 1]];
                if let Some(c) = corners.into_iter().collect::<Option<Vec<_>>>() {
                    cells.push(Cell {
                        i,
                        k,
                        bbox: bbox_of(&c),
                    });
                }
            }
        }
        Ok(ShootingBundle {
            p,
            q0,
            cfg,
            headings,
            abnormal,
            times,
            grid,
            cells,
        })
    }

    fn column(p: &ProblemDefinition, q0: Position, h: f64, times: &[f64]) -> Vec<Option<Position>> {
        let s0 = ExtendedState::new(q0[0], q0[1], h);
        if p.is_historical() {
            times
                .iter()
                .map(|&t| Some(integrate_closed_form_historical(&s0, t).position()))
                .collect()
        } else {
            match states_at_times(p, &s0, times, flow_ctl()) {
                Ok(states) => states
                    .into_iter()
                    .map(|s| s.map(|s| p.chart.embed(s.position())))
                    .collect(),
                Err(_) => vec![None; times.len()],
            }
        }
    }

    pub fn config(&self) -> &ShootingConfig {
        &self.cfg
    }

    /// Embedded endpoint and embedded velocity at `(α0, t)`.
    fn eval(&self, a: f64, t: f64) -> Option<(Position, Position)> {
        let s = endpoint(self.p, self.q0, a, t)?;
        let q = s.position();
        let v = position_velocity(self.p, &s).ok()?;
        Some((self.p.chart.embed(q), self.p.chart.embed_velocity(q, v)))
    }

    fn d_alpha(&self, a: f64, t: f64) -> Option<Position> {
        const H: f64 = 1e-6;
        let (ep, _) = self.eval(a + H, t)?;
        let (em, _) = self.eval(a - H, t)?;
        Some([(ep[0] - em[0]) / (2.0 * H), (ep[1] - em[1]) / (2.0 * H)])
    }

    /// Levenberg–Marquardt on the endpoint map from `(a, t)`.
    fn refine(&self, te: Position, mut a: f64, mut t: f64) -> Option<(f64, f64)> {
        let tol = self.cfg.position_tol;
        let (mut e, mut v) = self.eval(a, t)?;
        let mut nr = norm(sub(e, te));
        let mut lambda = 1e-6;
        for _ in 0..self.cfg.max_iter {
            if nr <= 1e-3 * tol {
                break;
            }
            let Some(ja) = self.d_alpha(a, t) else { break };
            let r = sub(e, te);
            let (a11, a12, a22) = (dot(ja, ja), dot(ja, v), dot(v, v));
            let (g0, g1) = (dot(ja, r), dot(v, r));
            let mut improved = false;
            while lambda < 1e12 {
                let m11 = a11 * (1.0 + lambda) + 1e-300;
                let m22 = a22 * (1.0 + lambda) + 1e-300;
                let det = m11 * m22 - a12 * a12;
                if !(det > 0.0) {
                    lambda *= 10.0;
                    continue;
                }
                let mut da = -(m22 * g0 - a12 * g1) / det;
                let mut dt = -(m11 * g1 - a12 * g0) / det;
                let big = da.abs().max(dt.abs());
                if big > 0.5 {
                    da *= 0.5 / big;
                    dt *= 0.5 / big;
                }
                let (na, nt) = (a + da, (t + dt).clamp(0.0, self.cfg.t_max));
                if let Some((ne, nv)) = self.eval(na, nt) {
                    let n_new = norm(sub(ne, te));
                    if n_new < nr {
                        (a, t, e, v, nr) = (na, nt, ne, nv, n_new);
                        lambda = (lambda * 0.1).max(1e-12);
                        improved = true;
                        break;
                    }
                }
                lambda *= 10.0;
            }
            if !improved {
                break;
            }
        }
        (nr <= tol).then_some((wrap_angle(a), t))
    }

    /// Projection onto the geodesic of fixed heading `a`, by Newton in `t`.
    fn refine_along(&self, te: Position, a: f64, mut t: f64) -> Option<f64> {
        for _ in 0..self.cfg.max_iter {
            let (e, v) = self.eval(a, t)?;
            let vv = dot(v, v);
            if vv < 1e-24 {
                break;
            }
            let dt = (dot(sub(te, e), v) / vv).clamp(-0.5, 0.5);
            t = (t + dt).clamp(0.0, self.cfg.t_max);
            if dt.abs() < 1e-15 {
                break;
            }
        }
        let (e, _) = self.eval(a, t)?;
        (norm(sub(e, te)) <= self.cfg.position_tol).then_some(t)
    }

    fn near_abnormal(&self, a: f64) -> bool {
        self.abnormal
            .iter()
            .any(|&i| angle_diff(a, self.headings[i]).abs() <= ABNORMAL_HEADING_TOL)
    }

    /// Minimal arrival time at `target` over every grid cell whose image may
    /// contain it.
    pub fn value(&self, target: Position) -> Result<ValueSample> {
        let (r, _) = self.p.chart.revolution_coords(target);
        self.p.check_radius(r)?;
        let te = self.p.chart.embed(target);
        let mut out = ValueSample {
            target,
            t_min: None,
            alpha0_star: None,
            flag: TerminalFlag::Interior,
        };
        if norm(sub(te, self.p.chart.embed(self.q0))) <= self.cfg.position_tol {
            out.t_min = Some(0.0);
            return Ok(out);
        }
        let mut best: Option<(f64, f64, TerminalFlag)> = None;
        let better = |best: &Option<(f64, f64, TerminalFlag)>, t: f64| best.is_none_or(|b| t < b.0);

        for &ai in &self.abnormal {
            let col = &self.grid[ai];
            for k in 0..self.times.len() - 1 {
                let (Some(p0), Some(p1)) = (col[k], col[k + 1]) else {
                    break;
                };
                if !in_bbox(&bbox_of(&[p0, p1]), te) {
                    continue;
                }
                let guess = 0.5 * (self.times[k] + self.times[k + 1]);
                if let Some(t) = self.refine_along(te, self.headings[ai], guess) {
                    if better(&best, t) {
                        best = Some((t, self.headings[ai], TerminalFlag::ViaAbnormal));
                    }
                }
            }
        }

        let nh = self.headings.len();
        for cell in &self.cells {
            let t_lo = self.times[cell.k];
            if best.is_some_and(|b| t_lo >= b.0) {
                break;
            }
            if !in_bbox(&cell.bbox, te) {
                continue;
            }
            let (h0, mut h1) = (self.headings[cell.i], self.headings[(cell.i + 1) % nh]);
            if h1 < h0 {
                h1 += TAU;
            }
            let guess = (0.5 * (h0 + h1), 0.5 * (t_lo + self.times[cell.k + 1]));
            if let Some((a, t)) = self.refine(te, guess.0, guess.1) {
                if better(&best, t) {
                    let flag = if self.near_abnormal(a) {
                        TerminalFlag::ViaAbnormal
                    } else {
                        TerminalFlag::Interior
                    };
                    best = Some((t, a, flag));
                }
            }
        }
        // Along the abnormal the endpoint map folds, so a neighbouring heading
        // can meet the position tolerance slightly early; such hits are
        // resolved onto the abnormal itself.
        if let Some((t, a, TerminalFlag::ViaAbnormal)) = best {
            let nearest = self
                .abnormal
                .iter()
                .map(|&i| self.headings[i])
                .min_by(|x, y| angle_diff(a, *x).abs().total_cmp(&angle_diff(a, *y).abs()));
            if let Some(ha) = nearest {
                if let Some(ta) = self.refine_along(te, ha, t) {
                    if (ta - t).abs() <= FOLD_SNAP_TIME {
                        best = Some((ta, ha, TerminalFlag::ViaAbnormal));
                    }
                }
            }
        }
        if let Some((t, a, flag)) = best {
            out.t_min = Some(t);
            out.alpha0_star = Some(a);
            out.flag = flag;
        }
        Ok(out)
    }
}

/// Time-minimal value function at a single target.
pub fn value_function(
    p: &ProblemDefinition,
    q0: Position,
    target: Position,
    search: ShootingConfig,
) -> Result<ValueSample> {
    ShootingBundle::new(p, q0, search)?.value(target)
}

/// Abnormal geodesic from `q0`, sampled uniformly in time.
#[derive(Debug, Clone, PartialEq)]
pub struct AbnormalArc {
    pub alpha0: f64,
    pub samples: Vec<(f64, Position)>,
    /// Forward cusp within the requested horizon, if any.
    pub cusp: Option<CuspPoint>,
}

/// The abnormal geodesics leaving `q0` up to `horizon`, each optionally
/// stopped at its cusp. Empty in weak current.
pub fn abnormal_arcs(
    p: &ProblemDefinition,
    q0: Position,
    horizon: f64,
    n_samples: usize,
    truncate_at_cusp: bool,
) -> Result<Vec<AbnormalArc>> {
    let mut out = Vec::new();
    for s0 in abnormal_initial_states(p, q0)? {
        let cusp = if p.is_historical() {
            cusp_historical(&s0)?
        } else {
            match cusp_numeric(p, &s0, horizon) {
                Ok(c) => c,
                Err(Error::DomainExit { .. }) => None,
                Err(e) => return Err(e),
            }
        }
        .filter(|c| c.t_cusp <= horizon);
        let end = match cusp {
            Some(c) if truncate_at_cusp => c.t_cusp,
            _ => horizon,
        };
        let times = linspace(0.0, end, n_samples.max(2));
        let samples = if p.is_historical() {
            times
                .iter()
                .map(|&t| (t, integrate_closed_form_historical(&s0, t).position()))
                .collect()
        } else {
            let states = states_at_times(p, &s0, &times, flow_ctl())?;
            times
                .iter()
                .zip(states)
                .map_while(|(&t, s)| s.map(|s| (t, s.position())))
                .collect()
        };
        out.push(AbnormalArc {
            alpha0: s0.heading,
            samples,
            cusp,
        });
    }
    Ok(out)
}

/// Sphere sample and ball boundary at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereBall {
    pub wavefront: Wavefront,
    /// Minimal time of each regular wavefront point (`None`: not evaluated
    /// or unreachable).
    pub values: Vec<Option<f64>>,
    pub on_sphere: Vec<bool>,
    pub abnormal_on_sphere: Vec<bool>,
    /// Abnormal arcs up to `t`, stopped at their cusp; the remaining part of
    /// the ball boundary in strong current.
    pub arcs: Vec<AbnormalArc>,
}

pub fn sphere_and_ball(p: &ProblemDefinition, q0: Position, t: f64, n_alpha: usize) -> Result<SphereBall> {
    sphere_and_ball_with(
        p,
        q0,
        t,
        n_alpha,
        ShootingConfig {
            t_max: t,
            ..Default::default()
        },
    )
}

pub fn sphere_and_ball_with(
    p: &ProblemDefinition,
    q0: Position,
    t: f64,
    n_alpha: usize,
    cfg: ShootingConfig,
) -> Result<SphereBall> {
    let wavefront = wavefront(p, q0, t, n_alpha)?;
    let bundle = ShootingBundle::new(p, q0, ShootingConfig { t_max: t, ..cfg })?;
    let eval = |pt: &WavefrontPoint| -> Result<Option<f64>> {
        match pt.position {
            Some(q) => Ok(bundle.value(q)?.t_min),
            None => Ok(None),
        }
    };
    let values = wavefront.points.par_iter().map(eval).collect::<Result<Vec<_>>>()?;
    let abn_values = wavefront.abnormal.iter().map(eval).collect::<Result<Vec<_>>>()?;
    let on = |v: &Option<f64>| v.is_some_and(|v| (v - t).abs() <= SPHERE_TOL);
    let on_sphere = values.iter().map(on).collect();
    let abnormal_on_sphere = abn_values.iter().map(on).collect();
    let arcs = abnormal_arcs(p, q0, t, 200, true)?;
    Ok(SphereBall {
        wavefront,
        values,
        on_sphere,
        abnormal_on_sphere,
        arcs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfIntersection {
    pub t1: f64,
    pub t2: f64,
    pub position: Position,
}

fn hermite(p0: Position, v0: Position, p1: Position, v1: Position, h: f64, s: f64) -> (Position, Position) {
    let (s2, s3) = (s * s, s * s * s);
    let (h00, h10, h01, h11) = (
        2.0 * s3 - 3.0 * s2 + 1.0,
        s3 - 2.0 * s2 + s,
        -2.0 * s3 + 3.0 * s2,
        s3 - s2,
    );
    let (d00, d10, d01, d11) = (
        6.0 * s2 - 6.0 * s,
        3.0 * s2 - 4.0 * s + 1.0,
        -6.0 * s2 + 6.0 * s,
        3.0 * s2 - 2.0 * s,
    );
    let mut q = [0.0; 2];
    let mut dq = [0.0; 2];
    for c in 0..2 {
        q[c] = h00 * p0[c] + h10 * h * v0[c] + h01 * p1[c] + h11 * h * v1[c];
        dq[c] = d00 * p0[c] + d10 * h * v0[c] + d01 * p1[c] + d11 * h * v1[c];
    }
    (q, dq)
}

/// Transversal self-intersections of a trajectory's position trace, with
/// `t1 < t2`. Crossings of the sample polyline are refined on the cubic
/// Hermite interpolant built from the sample velocities.
pub fn self_intersections(traj: &GeodesicTrajectory) -> Vec<SelfIntersection> {
    let chart = traj.chart;
    let samples = &traj.samples;
    let pos: Vec<Position> = samples.iter().map(|s| chart.embed(s.state.position())).collect();
    let vel: Vec<Position> = samples
        .iter()
        .map(|s| chart.embed_velocity(s.state.position(), s.velocity))
        .collect();
    let piece = |i: usize, s: f64| {
        let h = samples[i + 1].t - samples[i].t;
        hermite(pos[i], vel[i], pos[i + 1], vel[i + 1], h, s)
    };
    polyline_self_intersections(&pos, false)
        .into_iter()
        .map(|c| {
            let (mut s, mut u) = (c.s, c.u);
            let mut ok = false;
            for _ in 0..30 {
                let (a, da) = piece(c.i, s);
                let (b, db) = piece(c.j, u);
                let f = sub(a, b);
                if norm(f) <= 1e-14 * (1.0 + norm(a)) {
                    ok = true;
                    break;
                }
                // solve [da, −db] [δs, δu]ᵀ = −f
                let det = -da[0] * db[1] + db[0] * da[1];
                if det.abs() < 1e-300 {
                    break;
                }
                s += (f[0] * db[1] - db[0] * f[1]) / det;
                u += (f[0] * da[1] - da[0] * f[1]) / det;
            }
            if !(ok && (-0.5..=1.5).contains(&s) && (-0.5..=1.5).contains(&u)) {
                (s, u) = (c.s, c.u);
            }
            let (e, _) = piece(c.i, s);
            let ti = samples[c.i].t + s * (samples[c.i + 1].t - samples[c.i].t);
            let tj = samples[c.j].t + u * (samples[c.j + 1].t - samples[c.j].t);
            let theta_ref = chart.revolution_coords(samples[c.i].state.position()).1;
            SelfIntersection {
                t1: ti.min(tj),
                t2: ti.max(tj),
                position: unembed(chart, e, theta_ref),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSample {
    pub s: f64,
    pub value: ValueSample,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    /// Index of the last sample before the jump.
    pub index: usize,
    /// Refined segment parameter of the discontinuity.
    pub s: f64,
    pub position: Position,
    /// Limit of `T` from the side of smaller `s`.
    pub left_limit: Option<f64>,
    pub right_limit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscontinuityScan {
    pub samples: Vec<ScanSample>,
    pub jumps: Vec<Jump>,
}

fn lerp(a: Position, b: Position, s: f64) -> Position {
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Samples the value function along the segment `a → b` and reports its
/// jumps.
///
/// Candidates are adjacent pairs whose difference exceeds ten times the
/// median adjacent difference, or that switch between reachable and
/// unreachable. Each candidate is bisected down to a bracket of width `1e-7`
/// in `s`; it is kept only if the gap is still above the threshold there,
/// which discards the steep but continuous approach to an abnormal arc.
pub fn discontinuity_scan(
    p: &ProblemDefinition,
    q0: Position,
    segment: (Position, Position),
    n_samples: usize,
    search: ShootingConfig,
) -> Result<DiscontinuityScan> {
    let (a, b) = segment;
    let bundle = ShootingBundle::new(p, q0, search)?;
    let n = if a == b { 1 } else { n_samples.max(2) };
    let samples = linspace(0.0, 1.0, n)
        .into_par_iter()
        .map(|s| {
            Ok(ScanSample {
                s,
                value: bundle.value(lerp(a, b, s))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let tv: Vec<Option<f64>> = samples.iter().map(|x| x.value.t_min).collect();
    let diffs: Vec<f64> = tv.windows(2).filter_map(|w| Some((w[1]? - w[0]?).abs())).collect();
    let Some(med) = median(diffs) else {
        return Ok(DiscontinuityScan {
            samples,
            jumps: Vec::new(),
        });
    };
    let threshold = (10.0 * med).max(1e-12);
    let flagged: Vec<usize> = (0..n.saturating_sub(1))
        .filter(|&i| match (tv[i], tv[i + 1]) {
            (Some(x), Some(y)) => (y - x).abs() > threshold,
            (None, None) => false,
            _ => true,
        })
        .collect();

    let jumps = flagged
        .into_par_iter()
        .map(|i| {
            let (mut lo, mut hi) = (samples[i].s, samples[i + 1].s);
            let (mut t_lo, mut t_hi) = (tv[i], tv[i + 1]);
            let closer_to_lo = |t: Option<f64>, t_lo: Option<f64>, t_hi: Option<f64>| match (t, t_lo, t_hi) {
                (Some(t), Some(l), Some(h)) => (t - l).abs() <= (t - h).abs(),
                (t, l, _) => t.is_some() == l.is_some(),
            };
            while hi - lo > 1e-7 {
                let mid = 0.5 * (lo + hi);
                let tm = bundle.value(lerp(a, b, mid))?.t_min;
                if closer_to_lo(tm, t_lo, t_hi) {
                    (lo, t_lo) = (mid, tm);
                } else {
                    (hi, t_hi) = (mid, tm);
                }
            }
            let confirmed = match (t_lo, t_hi) {
                (Some(x), Some(y)) => (y - x).abs() > threshold,
                _ => true,
            };
            Ok(confirmed.then_some(Jump {
                index: i,
                s: 0.5 * (lo + hi),
                position: lerp(a, b, 0.5 * (lo + hi)),
                left_limit: t_lo,
                right_limit: t_hi,
            }))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(DiscontinuityScan { samples, jumps })
}

/// Point reached at the same time by two distinct minimizing geodesics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparatingPoint {
    pub t: f64,
    pub position: Position,
    pub alpha_a: f64,
    pub alpha_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutLocus {
    /// Time horizon actually used.
    pub horizon: f64,
    pub arcs: Vec<AbnormalArc>,
    pub separating: Vec<SeparatingPoint>,
}

/// Maximal runs of cyclically consecutive indices satisfying `keep`.
fn runs(n: usize, keep: impl Fn(usize) -> bool) -> Vec<Vec<usize>> {
    let Some(start) = (0..n).find(|&i| !keep(i)) else {
        return vec![(0..n).collect()];
    };
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for off in 1..=n {
        let i = (start + off) % n;
        if keep(i) {
            cur.push(i);
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Cut-locus estimate in strong current: the two abnormal arcs (the cusped
/// one stopped at its cusp) within a horizon of `1.5 × t_cusp` capped by
/// `t_max`, plus separating-line candidates from self-crossings of the
/// hyperbolic wavefront confirmed by the value function.
pub fn cut_locus_estimate(p: &ProblemDefinition, q0: Position, t_max: f64, n_alpha: usize) -> Result<CutLocus> {
    if p.current_norm_at(q0)? <= 1.0 {
        return Err(Error::Unsupported(
            "cut locus is only computed for strong-current initial points".into(),
        ));
    }
    if !(t_max > 0.0) {
        return Err(Error::InvalidParameter(format!("t_max must be positive, got {t_max}")));
    }
    let probe = abnormal_arcs(p, q0, t_max, 2, true)?;
    let horizon = probe
        .iter()
        .filter_map(|a| a.cusp.map(|c| c.t_cusp))
        .fold(f64::INFINITY, f64::min);
    let horizon = if horizon.is_finite() {
        t_max.min(1.5 * horizon)
    } else {
        t_max
    };
    let arcs = abnormal_arcs(p, q0, horizon, 200, true)?;

    let bundle = ShootingBundle::new(
        p,
        q0,
        ShootingConfig {
            t_max: horizon,
            ..Default::default()
        },
    )?;
    let mut separating = Vec::new();
    for tau in linspace(0.0, horizon, 17).into_iter().skip(1) {
        let wf = wavefront(p, q0, tau, n_alpha)?;
        let hyperbolic = |i: usize| wf.points[i].kind == ExtremalKind::Hyperbolic && wf.points[i].position.is_some();
        for run in runs(wf.points.len(), hyperbolic) {
            let Some(pts) = wf.embedded(p.chart, &run) else {
                continue;
            };
            for c in polyline_self_intersections(&pts, false) {
                let theta_ref = p.chart.revolution_coords(wf.q0).1;
                let q = unembed(p.chart, c.point, theta_ref);
                let v = bundle.value(q)?;
                if v.t_min.is_some_and(|t| (t - tau).abs() <= SEPARATING_TOL) {
                    let ang = |k: usize, s: f64| {
                        let (h0, h1) = (wf.points[run[k]].alpha0, wf.points[run[k + 1]].alpha0);
                        wrap_angle(h0 + s * angle_diff(h1, h0))
                    };
                    separating.push(SeparatingPoint {
                        t: tau,
                        position: q,
                        alpha_a: ang(c.i, c.s),
                        alpha_b: ang(c.j, c.u),
                    });
                }
            }
        }
    }
    Ok(CutLocus {
        horizon,
        arcs,
        separating,
    })
}

/// First time on `n_levels` uniform levels in `(0, t_max]` at which the
/// wavefront winds around `q0`, refined by bisection. An estimate only.
pub fn loop_time_estimate(
    p: &ProblemDefinition,
    q0: Position,
    t_max: f64,
    n_alpha: usize,
    n_levels: usize,
) -> Result<Option<f64>> {
    let encloses = |tau: f64| -> Result<bool> {
        let wf = wavefront(p, q0, tau, n_alpha)?;
        let all: Vec<usize> = (0..wf.points.len()).collect();
        Ok(match wf.embedded(p.chart, &all) {
            Some(poly) => winding_number(&poly, p.chart.embed(q0)) != 0,
            None => false,
        })
    };
    let mut prev = 0.0;
    for tau in linspace(0.0, t_max, n_levels.max(1) + 1).into_iter().skip(1) {
        if encloses(tau)? {
            let (mut lo, mut hi) = (prev, tau);
            for _ in 0..20 {
                let mid = 0.5 * (lo + hi);
                if mid > 0.0 && encloses(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(hi));
        }
        prev = tau;
    }
    Ok(None)
}
