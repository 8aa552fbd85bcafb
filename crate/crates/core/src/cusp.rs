//! Abnormal geodesics and their cusp, where the position velocity vanishes.

use crate::error::{Error, Result};
use crate::flow::{endpoint_numeric, integrate_closed_form_historical, integrate_numeric, Termination};
use crate::lie::{abnormal_headings, classify, ExtremalKind, DEFAULT_CLASSIFY_TOL};
use crate::model::{ExtendedState, Position, ProblemDefinition};
use crate::ode::StepControl;

/// Speed below which a stationary point of the speed is accepted as a cusp.
pub const CUSP_SPEED_TOL: f64 = 1e-8;

const BISECT_TOL: f64 = 1e-12;
const SCAN_STEP: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CuspSource {
    Analytic,
    NumericRootFind,
}

impl CuspSource {
    pub fn as_str(self) -> &'static str {
        match self {
            CuspSource::Analytic => "analytic",
            CuspSource::NumericRootFind => "numeric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuspPoint {
    pub t_cusp: f64,
    pub position: Position,
    pub heading_at_cusp: f64,
    pub source: CuspSource,
}

fn require_abnormal(p: &ProblemDefinition, s0: &ExtendedState) -> Result<()> {
    let class = classify(p, s0, DEFAULT_CLASSIFY_TOL)?;
    if class.kind != ExtremalKind::Abnormal {
        return Err(Error::NotAbnormal {
            d_second: class.data.d_second,
        });
    }
    Ok(())
}

/// Initial states of the abnormal geodesics leaving `q0`, in the order of
/// [`abnormal_headings`].
pub fn abnormal_initial_states(p: &ProblemDefinition, q0: Position) -> Result<Vec<ExtendedState>> {
    let (r, _) = p.chart.revolution_coords(q0);
    Ok(abnormal_headings(p, r)?
        .into_iter()
        .map(|h| ExtendedState::new(q0[0], q0[1], h))
        .collect())
}

/// Analytic forward cusp of a historical abnormal: `t = tan γ0`, reached on
/// the line `y = sign(y0)` with `γ ≡ 0 mod π`.
pub fn cusp_historical(s0: &ExtendedState) -> Result<Option<CuspPoint>> {
    let p = crate::model::make_historical();
    require_abnormal(&p, s0)?;
    let t_cusp = s0.heading.tan();
    if !(t_cusp > 0.0) {
        return Ok(None);
    }
    let s = integrate_closed_form_historical(s0, t_cusp);
    Ok(Some(CuspPoint {
        t_cusp,
        position: s.position(),
        heading_at_cusp: s.heading,
        source: CuspSource::Analytic,
    }))
}

/// `(speed², ½ d(speed²)/dt)` with speed `√(ṙ² + (m θ̇)²)`.
fn speed_data(p: &ProblemDefinition, s: &ExtendedState) -> (f64, f64) {
    let rs = p.to_revolution(s);
    let pr = p.profile_unchecked(rs.r);
    let (sa, ca) = rs.alpha.sin_cos();
    let alpha_dot = pr.dmu * pr.m * sa * sa - pr.dm * sa / pr.m;
    // w = m θ̇ = m μ + sin α
    let w = pr.m * pr.mu + sa;
    let w_dot = (pr.dm * pr.mu + pr.m * pr.dmu) * ca + ca * alpha_dot;
    let r_ddot = -sa * alpha_dot;
    (ca * ca + w * w, ca * r_ddot + w * w_dot)
}

/// Speed of the position part, as used for cusp detection.
pub fn position_speed(p: &ProblemDefinition, s: &ExtendedState) -> f64 {
    speed_data(p, s).0.sqrt()
}

/// Numeric forward cusp search along the abnormal geodesic from `s0` on
/// `(0, t_max]`.
///
/// Local minima of the speed are bracketed on a fine sample grid through the
/// sign change of `d(speed²)/dt`, refined by bisection, and accepted when the
/// speed there is below [`CUSP_SPEED_TOL`].
pub fn cusp_numeric(p: &ProblemDefinition, s0: &ExtendedState, t_max: f64) -> Result<Option<CuspPoint>> {
    require_abnormal(p, s0)?;
    if !(t_max > 0.0) {
        return Err(Error::InvalidParameter(format!("t_max must be positive, got {t_max}")));
    }
    let ctl = StepControl::with_tol(1e-12).max_step(SCAN_STEP);
    let traj = integrate_numeric(p, s0, t_max, ctl)?;
    let fine = StepControl::with_tol(1e-12);
    let deriv = |s: &ExtendedState| speed_data(p, s).1;
    for w in traj.samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (fa, fb) = (deriv(&a.state), deriv(&b.state));
        if !(fa < 0.0 && fb >= 0.0) {
            continue;
        }
        // bisect on relative time from the left sample
        let (mut lo, mut hi) = (0.0, b.t - a.t);
        let mut s_mid = b.state;
        while hi - lo > BISECT_TOL {
            let mid = 0.5 * (lo + hi);
            s_mid = endpoint_numeric(p, &a.state, mid, fine)?;
            if deriv(&s_mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t_root = 0.5 * (lo + hi);
        let s_root = endpoint_numeric(p, &a.state, t_root, fine).unwrap_or(s_mid);
        if position_speed(p, &s_root) < CUSP_SPEED_TOL {
            return Ok(Some(CuspPoint {
                t_cusp: a.t + t_root,
                position: s_root.position(),
                heading_at_cusp: s_root.heading,
                source: CuspSource::NumericRootFind,
            }));
        }
    }
    match traj.termination {
        Termination::DomainExit { t } => Err(Error::DomainExit { t }),
        Termination::Completed => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{extended_rhs, position_velocity};
    use crate::lie::bracket_data;
    use crate::model::{make_historical, make_vortex, wrap_angle};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn forward_branch(y0: f64) -> ExtendedState {
        let h = make_historical();
        abnormal_initial_states(&h, [0.0, y0])
            .unwrap()
            .into_iter()
            .find(|s| s.heading.tan() > 0.0)
            .unwrap()
    }

    #[test]
    fn analytic_examples() {
        let c = cusp_historical(&ExtendedState::new(0.0, 2.0, -2.0 * PI / 3.0))
            .unwrap()
            .unwrap();
        assert!((c.t_cusp - 3f64.sqrt()).abs() < 1e-14);
        assert!((c.position[1] - 1.0).abs() < 1e-14);
        assert!((c.heading_at_cusp - PI).abs() < 1e-14);
        assert_eq!(c.source, CuspSource::Analytic);

        let c = cusp_historical(&ExtendedState::new(0.0, -2.0, PI / 3.0))
            .unwrap()
            .unwrap();
        assert!((c.t_cusp - 3f64.sqrt()).abs() < 1e-14);
        assert!((c.position[1] + 1.0).abs() < 1e-14);
        assert!(c.heading_at_cusp.abs() < 1e-14);

        assert!(cusp_historical(&ExtendedState::new(0.0, 2.0, 2.0 * PI / 3.0))
            .unwrap()
            .is_none());
    }

    #[test]
    fn weak_current_is_not_abnormal() {
        let h = make_historical();
        for g in [0.0, 1.0, -2.0] {
            let s = ExtendedState::new(0.0, 0.5, g);
            assert!(matches!(cusp_historical(&s), Err(Error::NotAbnormal { .. })));
            assert!(matches!(cusp_numeric(&h, &s, 3.0), Err(Error::NotAbnormal { .. })));
        }
    }

    #[test]
    fn numeric_matches_analytic() {
        let h = make_historical();
        for y0 in [1.2, 1.5, 2.0, 3.0, 5.0] {
            let s0 = forward_branch(y0);
            let a = cusp_historical(&s0).unwrap().unwrap();
            let n = cusp_numeric(&h, &s0, a.t_cusp + 1.0).unwrap().unwrap();
            assert!((a.t_cusp - n.t_cusp).abs() < 1e-6, "y0={y0}");
            assert!((a.position[0] - n.position[0]).abs() < 1e-6);
            assert!((a.position[1] - n.position[1]).abs() < 1e-6);
            assert!((h.current_norm_at(n.position).unwrap() - 1.0).abs() < 1e-6);
            let v =
                position_velocity(&h, &ExtendedState::new(n.position[0], n.position[1], n.heading_at_cusp)).unwrap();
            assert!(v[0].abs() <= 1e-8 && v[1].abs() <= 1e-8, "{v:?}");
            assert!(wrap_angle(2.0 * n.heading_at_cusp).abs() < 1e-6);
        }
    }

    #[test]
    fn backward_branch_has_no_forward_cusp() {
        let h = make_historical();
        let s0 = ExtendedState::new(0.0, 2.0, 2.0 * PI / 3.0);
        assert!(cusp_numeric(&h, &s0, 4.0).unwrap().is_none());
    }

    #[test]
    fn vortex_cusp_on_unit_current_circle() {
        let p = make_vortex(2.0).unwrap();
        let s0 = abnormal_initial_states(&p, [1.0, 0.0])
            .unwrap()
            .into_iter()
            .find(|s| s.heading.cos() > 0.0)
            .unwrap();
        let c = cusp_numeric(&p, &s0, 10.0).unwrap().unwrap();
        assert!((c.position[0] - 2.0).abs() < 1e-6, "{c:?}");
        assert!((p.current_norm_at(c.position).unwrap() - 1.0).abs() < 1e-6);
        let s = ExtendedState::new(c.position[0], c.position[1], c.heading_at_cusp);
        let d = extended_rhs(&p, &s).unwrap();
        assert!(d[0].abs() <= 1e-8 && d[1].abs() <= 1e-8);
    }

    #[test]
    fn abnormality_persists_past_the_cusp() {
        let h = make_historical();
        for y0 in [1.2, 2.0, 5.0] {
            let s0 = forward_branch(y0);
            let t_end = 2.0 * s0.heading.tan();
            let traj = integrate_numeric(&h, &s0, t_end, StepControl::with_tol(1e-12)).unwrap();
            for sample in &traj.samples {
                let d2 = bracket_data(&h, &sample.state).unwrap().d_second;
                assert!(d2.abs() <= 1e-8, "y0={y0} t={} D''={d2}", sample.t);
            }
        }
    }

    proptest! {
        #[test]
        fn analytic_cusp_lies_on_unit_current_line(y0 in 1.05f64..20.0, sign in prop::bool::ANY) {
            let y0 = if sign { y0 } else { -y0 };
            let h = make_historical();
            let s0 = abnormal_initial_states(&h, [0.3, y0]).unwrap()
                .into_iter().find(|s| s.heading.tan() > 0.0).unwrap();
            let c = cusp_historical(&s0).unwrap().unwrap();
            prop_assert!((c.position[1] - y0.signum()).abs() < 1e-9);
            prop_assert!(wrap_angle(2.0 * c.heading_at_cusp).abs() < 1e-12);
            let v = position_velocity(&h, &ExtendedState::new(c.position[0], c.position[1], c.heading_at_cusp)).unwrap();
            prop_assert!(v[0].abs() <= 1e-8 && v[1].abs() <= 1e-8);
        }
    }
}
