//! Extended geodesic flow, its closed form for the historical example, and
//! the exponential map.
//!
//! With `λ(0) = 1` the adjoint is fixed by the initial heading:
//! `p_θ = m(r0) sin α0` and `p⁰ = −1 − p_θ μ(r0)`. `p_θ` is conserved and
//! `p_r` is recovered from the Clairaut relation `p_r sin α = (p_θ/m) cos α`,
//! so only `(r, θ, α)` is integrated:
//!
//! ```text
//! ṙ = cos α
//! θ̇ = μ(r) + sin α / m(r)
//! α̇ = μ'(r) m(r) sin²α − m'(r) sin α / m(r)
//! ```

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{Chart, ExtendedState, Position, ProblemDefinition, Profile, RevolutionState};
use crate::ode::{Dopri5, Halt, StepControl};

/// Mask for `|sin α|` and `|cos γ|` below which the Clairaut form of the
/// Hamiltonian and the historical first integral are not evaluated.
pub const RESIDUAL_MASK: f64 = 1e-6;

/// `|cos γ0|` below which the closed form uses the vertical branch.
pub const VERTICAL_COS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjointInit {
    pub p_theta: f64,
    pub p_zero: f64,
    pub lambda0: f64,
}

impl AdjointInit {
    pub fn at(p: &ProblemDefinition, s0: &ExtendedState) -> Result<Self> {
        let rs = p.to_revolution(s0);
        let prof = p.profile(rs.r)?;
        let p_theta = prof.m * rs.alpha.sin();
        Ok(AdjointInit {
            p_theta,
            p_zero: -1.0 - p_theta * prof.mu,
            lambda0: 1.0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    NumericRK,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    /// Integration stopped because `r` reached the edge of the domain.
    DomainExit {
        t: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: ExtendedState,
    /// Chart velocity of the position `(ċ1, ċ2)`.
    pub velocity: Position,
}

/// Conserved-quantity defects at one sample; `None` where masked.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    /// Maximized Hamiltonian with `p_r` rebuilt from the Clairaut relation.
    pub hamiltonian: Option<f64>,
    /// `p_θ (μ + 1/(m sin α)) + p⁰`.
    pub clairaut: Option<f64>,
    /// Historical only: `y + 1/cos γ − (y0 + 1/cos γ0)`.
    pub historical: Option<f64>,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        [self.hamiltonian, self.clairaut, self.historical]
            .into_iter()
            .flatten()
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicTrajectory {
    pub chart: Chart,
    pub samples: Vec<Sample>,
    pub adjoint: AdjointInit,
    pub method: Method,
    pub residuals: Vec<Residuals>,
    pub termination: Termination,
}

impl GeodesicTrajectory {
    pub fn initial(&self) -> &ExtendedState {
        &self.samples[0].state
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least one sample")
    }

    pub fn positions(&self) -> Vec<Position> {
        self.samples.iter().map(|s| s.state.position()).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(Residuals::max).fold(0.0, f64::max)
    }
}

fn revolution_rates(prof: &Profile, alpha: f64) -> [f64; 3] {
    let (sa, ca) = alpha.sin_cos();
    [
        ca,
        prof.mu + sa / prof.m,
        prof.dmu * prof.m * sa * sa - prof.dm * sa / prof.m,
    ]
}

fn chart_rates(chart: Chart, rates: [f64; 3]) -> [f64; 3] {
    match chart {
        Chart::PolarLike => rates,
        Chart::HistoricalCartesian => [rates[1], rates[0], -rates[2]],
    }
}

/// Right-hand side of the extended dynamics in the problem's chart.
pub fn extended_rhs(p: &ProblemDefinition, s: &ExtendedState) -> Result<[f64; 3]> {
    let rs = p.to_revolution(s);
    let prof = p.profile(rs.r)?;
    Ok(chart_rates(p.chart, revolution_rates(&prof, rs.alpha)))
}

/// Chart velocity of the position part.
pub fn position_velocity(p: &ProblemDefinition, s: &ExtendedState) -> Result<Position> {
    let d = extended_rhs(p, s)?;
    Ok([d[0], d[1]])
}

fn to_vec(rs: &RevolutionState) -> [f64; 3] {
    [rs.r, rs.theta, rs.alpha]
}

fn from_vec(y: &[f64; 3]) -> RevolutionState {
    RevolutionState {
        r: y[0],
        theta: y[1],
        alpha: y[2],
    }
}

fn make_sample(p: &ProblemDefinition, t: f64, y: &[f64; 3]) -> Sample {
    let state = p.from_revolution(&from_vec(y));
    let prof = p.profile_unchecked(y[0]);
    let d = chart_rates(p.chart, revolution_rates(&prof, y[2]));
    Sample {
        t,
        state,
        velocity: [d[0], d[1]],
    }
}

#[allow(clippy::type_complexity)]
fn stepper<'a>(
    p: &'a ProblemDefinition,
    s0: &ExtendedState,
    ctl: StepControl,
) -> Result<Dopri5<impl Fn(f64, &[f64; 3]) -> Option<[f64; 3]> + 'a, 3>> {
    let rs = p.to_revolution(s0);
    p.check_radius(rs.r)?;
    let rhs = move |_t: f64, y: &[f64; 3]| {
        if !p.domain.contains(y[0]) {
            return None;
        }
        Some(revolution_rates(&p.profile_unchecked(y[0]), y[2]))
    };
    Ok(Dopri5::new(rhs, 0.0, to_vec(&rs), ctl))
}

fn classify_halt(p: &ProblemDefinition, t: f64, r: f64, halt: Halt) -> Result<Termination> {
    let near_edge = p.domain.distance_to_boundary(r) <= 1e-6 * r.abs().max(1.0);
    match halt {
        Halt::Collapsed { domain_violation, .. } if domain_violation || near_edge => Ok(Termination::DomainExit { t }),
        Halt::Collapsed { h, .. } => Err(Error::StepCollapse { t, h }),
        Halt::TooManySteps if near_edge => Ok(Termination::DomainExit { t }),
        Halt::TooManySteps => Err(Error::StepCollapse { t, h: 0.0 }),
    }
}

/// Adaptive integration of the extended dynamics from `s0` over `[0, t_final]`,
/// recording every accepted step.
///
/// Leaving the domain is not an error: the partial trajectory is returned
/// with [`Termination::DomainExit`].
pub fn integrate_numeric(
    p: &ProblemDefinition,
    s0: &ExtendedState,
    t_final: f64,
    ctl: StepControl,
) -> Result<GeodesicTrajectory> {
    if !(t_final > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "integration time must be positive, got {t_final}"
        )));
    }
    let adjoint = AdjointInit::at(p, s0)?;
    let mut solver = stepper(p, s0, ctl)?;
    let mut samples = vec![make_sample(p, 0.0, solver.y())];
    let outcome = solver.advance(t_final, |t, y| samples.push(make_sample(p, t, y)));
    let termination = match outcome {
        Ok(()) => Termination::Completed,
        Err(halt) => classify_halt(p, solver.t(), solver.y()[0], halt)?,
    };
    let mut traj = GeodesicTrajectory {
        chart: p.chart,
        samples,
        adjoint,
        method: Method::NumericRK,
        residuals: Vec::new(),
        termination,
    };
    traj.residuals = first_integral_residuals(p, &traj);
    Ok(traj)
}

/// Extended state at each of the increasing `times` (which may start at 0).
/// Entries after a domain exit are `None`.
pub fn states_at_times(
    p: &ProblemDefinition,
    s0: &ExtendedState,
    times: &[f64],
    ctl: StepControl,
) -> Result<Vec<Option<ExtendedState>>> {
    let mut solver = stepper(p, s0, ctl)?;
    let mut out = Vec::with_capacity(times.len());
    let mut alive = true;
    for &t in times {
        if alive && t > solver.t() {
            if let Err(halt) = solver.advance(t, |_, _| {}) {
                classify_halt(p, solver.t(), solver.y()[0], halt)?;
                alive = false;
            }
        }
        out.push(alive.then(|| p.from_revolution(&from_vec(solver.y()))));
    }
    Ok(out)
}

/// Endpoint of the numeric flow; a domain exit is reported as an error.
pub fn endpoint_numeric(p: &ProblemDefinition, s0: &ExtendedState, t: f64, ctl: StepControl) -> Result<ExtendedState> {
    if t == 0.0 {
        return Ok(*s0);
    }
    let mut solver = stepper(p, s0, ctl)?;
    match solver.advance(t, |_, _| {}) {
        Ok(()) => Ok(p.from_revolution(&from_vec(solver.y()))),
        Err(halt) => match classify_halt(p, solver.t(), solver.y()[0], halt)? {
            Termination::DomainExit { t } => Err(Error::DomainExit { t }),
            Termination::Completed => unreachable!(),
        },
    }
}

fn asinh_diff(a: f64, b: f64) -> f64 {
    // asinh a − asinh b without cancellation for a, b of equal sign
    if a * b > 0.0 {
        let den = a * (1.0 + b * b).sqrt() + b * (1.0 + a * a).sqrt();
        ((a - b) * (a + b) / den).asinh()
    } else {
        a.asinh() - b.asinh()
    }
}

fn tan_sec_diff(a: f64, b: f64) -> f64 {
    // g(a) − g(b) for g(T) = T √(1 + T²)
    let ga = a * (1.0 + a * a).sqrt();
    let gb = b * (1.0 + b * b).sqrt();
    if a * b > 0.0 {
        (a - b) * (a + b) * (1.0 + a * a + b * b) / (ga + gb)
    } else {
        ga - gb
    }
}

/// Exact flow of the historical system `ẋ = y + cos γ, ẏ = sin γ, γ̇ = −cos²γ`.
///
/// Along every non-vertical solution `tan γ(t) = tan γ0 − t` and the sign of
/// `cos γ` is frozen, which selects the branch `γ = atan(·)` or
/// `γ = π + atan(·)`. The bracketed antiderivatives
/// `½[ln|cos γ/(1+sin γ)|]` and `½[tan γ / cos γ]` are evaluated through
/// `T = tan γ` and `sec γ = ±√(1+T²)` to avoid cancellation near `γ = ±π/2`.
pub fn integrate_closed_form_historical(s0: &ExtendedState, t: f64) -> ExtendedState {
    let (x0, y0, g0) = (s0.c1, s0.c2, s0.heading);
    let c0 = g0.cos();
    if c0.abs() < VERTICAL_COS {
        let sgn = g0.sin().signum();
        return ExtendedState::new(sgn * t * t / 2.0 + y0 * t + x0, sgn * t + y0, g0);
    }
    let sigma = c0.signum();
    let t0 = g0.tan();
    let t1 = t0 - t;
    let h0 = (1.0 + t0 * t0).sqrt();
    let h1 = (1.0 + t1 * t1).sqrt();
    let gamma = if sigma > 0.0 { t1.atan() } else { PI + t1.atan() };
    // sec γ0 − sec γ(t)
    let dsec = sigma * (t0 - t1) * (t0 + t1) / (h0 + h1);
    let y = y0 + dsec;
    let x = 0.5 * sigma * (tan_sec_diff(t1, t0) - asinh_diff(t1, t0)) + (y0 + sigma * h0) * t + x0;
    ExtendedState::new(x, y, gamma)
}

fn historical_velocity(s: &ExtendedState) -> Position {
    let (sg, cg) = s.heading.sin_cos();
    [s.c2 + cg, sg]
}

/// Closed-form historical trajectory sampled at the given increasing times.
pub fn closed_form_trajectory_historical(s0: &ExtendedState, times: &[f64]) -> GeodesicTrajectory {
    let p = crate::model::make_historical();
    let samples: Vec<Sample> = times
        .iter()
        .map(|&t| {
            let state = integrate_closed_form_historical(s0, t);
            Sample {
                t,
                state,
                velocity: historical_velocity(&state),
            }
        })
        .collect();
    let adjoint = AdjointInit::at(&p, s0).expect("historical domain is the whole line");
    let mut traj = GeodesicTrajectory {
        chart: p.chart,
        samples,
        adjoint,
        method: Method::ClosedForm,
        residuals: Vec::new(),
        termination: Termination::Completed,
    };
    traj.residuals = first_integral_residuals(&p, &traj);
    traj
}

pub fn first_integral_residuals(p: &ProblemDefinition, traj: &GeodesicTrajectory) -> Vec<Residuals> {
    let AdjointInit { p_theta, p_zero, .. } = traj.adjoint;
    let s0 = traj.initial();
    let c_hist = {
        let cg0 = s0.heading.cos();
        (p.is_historical() && cg0.abs() > RESIDUAL_MASK).then(|| s0.c2 + 1.0 / cg0)
    };
    traj.samples
        .iter()
        .map(|sample| {
            let rs = p.to_revolution(&sample.state);
            let Ok(prof) = p.profile(rs.r) else {
                return Residuals::default();
            };
            let (sa, ca) = rs.alpha.sin_cos();
            let lambda = if sa.abs() > RESIDUAL_MASK {
                Some(p_theta.abs() / (prof.m * sa.abs()))
            } else if p_theta.abs() <= 1e-12 {
                Some(1.0)
            } else {
                None
            };
            let hamiltonian = lambda.map(|lambda| {
                let p_r = lambda * ca;
                (p_r * ca + p_theta * (prof.mu + sa / prof.m) + p_zero).abs()
            });
            let clairaut =
                (sa.abs() > RESIDUAL_MASK).then(|| (p_theta * (prof.mu + 1.0 / (prof.m * sa)) + p_zero).abs());
            let historical = c_hist.and_then(|c0| {
                let cg = sample.state.heading.cos();
                (cg.abs() > RESIDUAL_MASK).then(|| (sample.state.c2 + 1.0 / cg - c0).abs())
            });
            Residuals {
                hamiltonian,
                clairaut,
                historical,
            }
        })
        .collect()
}

/// Position reached at time `t` by the geodesic leaving `q0` with initial
/// chart heading `heading0`.
pub fn exponential_map(p: &ProblemDefinition, q0: Position, heading0: f64, t: f64) -> Result<Position> {
    exponential_state(
        p,
        &ExtendedState::new(q0[0], q0[1], heading0),
        t,
        StepControl::default(),
    )
    .map(|s| s.position())
}

pub fn exponential_state(p: &ProblemDefinition, s0: &ExtendedState, t: f64, ctl: StepControl) -> Result<ExtendedState> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be non-negative, got {t}")));
    }
    let (r0, _) = p.chart.revolution_coords(s0.position());
    p.check_radius(r0)?;
    if t == 0.0 {
        return Ok(*s0);
    }
    if p.is_historical() {
        Ok(integrate_closed_form_historical(s0, t))
    } else {
        endpoint_numeric(p, s0, t, ctl)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{angle_diff, make_historical, make_vortex};
    use std::f64::consts::FRAC_PI_2;

    // Literal transcription of the bracketed antiderivatives, used as an
    // independent check of the tangent-parameterised evaluation.
    fn literal_x(s0: &ExtendedState, t: f64, gamma_t: f64) -> f64 {
        let f = |g: f64| 0.5 * (g.cos() / (1.0 + g.sin())).abs().ln() + 0.5 * g.tan() / g.cos();
        f(gamma_t) - f(s0.heading) + (s0.c2 + 1.0 / s0.heading.cos()) * t + s0.c1
    }

    #[test]
    fn rhs_examples() {
        let h = make_historical();
        let d = extended_rhs(&h, &ExtendedState::new(0.0, 2.0, 0.0)).unwrap();
        for (a, b) in d.iter().zip([3.0, 0.0, -1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let d = extended_rhs(&h, &ExtendedState::new(0.0, 2.0, FRAC_PI_2)).unwrap();
        assert!((d[0] - 2.0).abs() < 1e-15 && (d[1] - 1.0).abs() < 1e-15 && d[2].abs() < 1e-15);
        let v = make_vortex(1.0).unwrap();
        assert_eq!(
            extended_rhs(&v, &ExtendedState::new(1.0, 0.0, 0.0)).unwrap(),
            [1.0, 1.0, 0.0]
        );
        assert!(extended_rhs(&v, &ExtendedState::new(0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let s = integrate_closed_form_historical(&ExtendedState::new(0.0, 0.0, FRAC_PI_2), 2.0);
        assert!((s.c1 - 2.0).abs() < 1e-15 && (s.c2 - 2.0).abs() < 1e-15);
        assert!((s.heading - FRAC_PI_2).abs() < 1e-15);

        let s = integrate_closed_form_historical(&ExtendedState::new(0.0, 2.0, -2.0 * PI / 3.0), 3f64.sqrt());
        assert!((s.c2 - 1.0).abs() < 1e-14);
        assert!((s.heading.abs() - PI).abs() < 1e-14);

        let s = integrate_closed_form_historical(&ExtendedState::new(0.0, 0.0, 0.0), 1.0);
        assert!((s.c2 - (1.0 - 2f64.sqrt())).abs() < 1e-15);
        assert!((s.heading + PI / 4.0).abs() < 1e-15);

        let s = integrate_closed_form_historical(&ExtendedState::new(0.0, 2.0, FRAC_PI_2), 1.0);
        assert!((s.c1 - 2.5).abs() < 1e-15 && (s.c2 - 3.0).abs() < 1e-15);
    }

    #[test]
    fn stable_form_matches_literal_brackets_on_both_branches() {
        for g0 in [-2.9, -2.0, -1.7, -1.2, -0.4, 0.0, 0.3, 1.1, 1.6, 2.2, 3.0, PI] {
            for y0 in [-1.5, 0.0, 2.0] {
                let s0 = ExtendedState::new(0.7, y0, g0);
                for t in [0.1, 0.5, 1.3, 2.0] {
                    let s = integrate_closed_form_historical(&s0, t);
                    let x = literal_x(&s0, t, s.heading);
                    assert!(
                        (s.c1 - x).abs() < 1e-11 * (1.0 + x.abs()),
                        "g0={g0} t={t}: {} vs {x}",
                        s.c1
                    );
                    let y = y0 + 1.0 / g0.cos() - 1.0 / s.heading.cos();
                    assert!((s.c2 - y).abs() < 1e-11 * (1.0 + y.abs()));
                }
            }
        }
    }

    #[test]
    fn numeric_matches_closed_form() {
        let h = make_historical();
        for s0 in [
            ExtendedState::new(0.0, 2.0, FRAC_PI_2),
            ExtendedState::new(0.0, 0.0, 0.0),
            ExtendedState::new(1.0, -0.5, 2.5),
        ] {
            let tr = integrate_numeric(&h, &s0, 1.0, StepControl::with_tol(1e-10)).unwrap();
            let end = tr.last().state;
            let cf = integrate_closed_form_historical(&s0, 1.0);
            assert!((end.c1 - cf.c1).abs() < 1e-8);
            assert!((end.c2 - cf.c2).abs() < 1e-8);
            assert!(angle_diff(end.heading, cf.heading).abs() < 1e-8);
            assert_eq!(tr.termination, Termination::Completed);
            assert_eq!(tr.last().t, 1.0);
        }
    }

    #[test]
    fn vortex_inward_ray_exits_domain() {
        let v = make_vortex(1.0).unwrap();
        let tr = integrate_numeric(&v, &ExtendedState::new(0.2, 0.0, PI), 1.0, StepControl::default()).unwrap();
        match tr.termination {
            Termination::DomainExit { t } => assert!((t - 0.2).abs() < 1e-3, "exit at {t}"),
            other => panic!("expected domain exit, got {other:?}"),
        }
        assert!(tr.samples.windows(2).all(|w| w[1].t > w[0].t));
        let e = exponential_map(&v, [0.2, 0.0], PI, 1.0);
        assert!(matches!(e, Err(Error::DomainExit { .. })));
    }

    #[test]
    fn closed_form_residuals_vanish() {
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
        for g0 in [-2.5, -1.0, 0.2, 1.4, 2.9] {
            let tr = closed_form_trajectory_historical(&ExtendedState::new(0.0, 1.5, g0), &times);
            assert!(tr.max_residual() <= 1e-12, "g0={g0}: {}", tr.max_residual());
        }
    }

    #[test]
    fn numeric_residuals_small() {
        let h = make_historical();
        let tr = integrate_numeric(
            &h,
            &ExtendedState::new(0.0, 2.0, 0.7),
            2.0,
            StepControl::with_tol(1e-10),
        )
        .unwrap();
        assert!(tr.max_residual() <= 1e-8);
        let v = make_vortex(1.0).unwrap();
        let tr = integrate_numeric(
            &v,
            &ExtendedState::new(0.8, 0.0, 1.2),
            1.0,
            StepControl::with_tol(1e-10),
        )
        .unwrap();
        assert!(tr.residuals.iter().all(|r| r.clairaut.is_some()));
        assert!(tr.max_residual() <= 1e-8, "{}", tr.max_residual());
    }

    #[test]
    fn heading_is_monotone_in_historical_chart() {
        let h = make_historical();
        for g0 in [-3.0, -1.0, 0.5, 2.0] {
            let tr = integrate_numeric(
                &h,
                &ExtendedState::new(0.0, 1.0, g0),
                3.0,
                StepControl::default().max_step(0.1),
            )
            .unwrap();
            for w in tr.samples.windows(2) {
                assert!(angle_diff(w[1].state.heading, w[0].state.heading) <= 1e-15);
            }
        }
    }

    #[test]
    fn reflection_symmetry() {
        // (x, y, γ) ↦ (−x, −y, γ + π) maps solutions to solutions
        let h = make_historical();
        let s = ExtendedState::new(0.3, 1.4, -0.8);
        let m = ExtendedState::new(-0.3, -1.4, -0.8 + PI);
        let a = integrate_numeric(&h, &s, 1.5, StepControl::default())
            .unwrap()
            .last()
            .state;
        let b = integrate_numeric(&h, &m, 1.5, StepControl::default())
            .unwrap()
            .last()
            .state;
        assert!((a.c1 + b.c1).abs() < 1e-9);
        assert!((a.c2 + b.c2).abs() < 1e-9);
        assert!(angle_diff(b.heading, a.heading + PI).abs() < 1e-9);
    }

    #[test]
    fn exponential_map_identity_at_zero() {
        let v = make_vortex(1.0).unwrap();
        assert_eq!(exponential_map(&v, [0.7, 0.2], 1.0, 0.0).unwrap(), [0.7, 0.2]);
        let h = make_historical();
        assert_eq!(exponential_map(&h, [0.0, 2.0], FRAC_PI_2, 0.0).unwrap(), [0.0, 2.0]);
        let q = exponential_map(&h, [0.0, 2.0], FRAC_PI_2, 1.0).unwrap();
        assert!((q[0] - 2.5).abs() < 1e-15 && (q[1] - 3.0).abs() < 1e-15);
        let q = exponential_map(&h, [0.0, 0.0], 0.0, 1.0).unwrap();
        let cf = integrate_closed_form_historical(&ExtendedState::new(0.0, 0.0, 0.0), 1.0);
        assert_eq!(q, cf.position());
    }

    #[test]
    fn states_at_times_match_endpoints() {
        let v = make_vortex(1.0).unwrap();
        let s0 = ExtendedState::new(0.9, 0.0, 0.4);
        let times = [0.0, 0.25, 0.5, 1.0];
        let states = states_at_times(&v, &s0, &times, StepControl::default()).unwrap();
        for (t, s) in times.iter().zip(&states) {
            let e = endpoint_numeric(&v, &s0, *t, StepControl::default()).unwrap();
            let s = s.unwrap();
            assert!((s.c1 - e.c1).abs() < 1e-9 && (s.c2 - e.c2).abs() < 1e-9);
        }
    }

    proptest::proptest! {
        #[test]
        fn p_theta_matches_initial_heading(y in -3.0f64..3.0, g in -PI..PI) {
            let h = make_historical();
            let a = AdjointInit::at(&h, &ExtendedState::new(0.0, y, g)).unwrap();
            proptest::prop_assert!((a.p_theta - g.cos()).abs() < 1e-15);
            proptest::prop_assert!((a.p_zero + 1.0 + g.cos() * y).abs() < 1e-14);
            proptest::prop_assert_eq!(a.lambda0, 1.0);
        }
    }
}
