//! Goh-extension bracket determinants and extremal classification.
//!
//! On the extended space `q̃ = (r, θ, α)` the dynamics read `X + v Y` with
//! `X = cos α ∂r + (μ + sin α / m) ∂θ` and `Y = ∂α`. The determinants
//!
//! * `D   = det(Y, [Y,X], [[Y,X],Y]) = 1/m`
//! * `D'  = det(Y, [Y,X], [[Y,X],X]) = −μ' sin²α + m' sin α / m²`
//! * `D'' = det(Y, [Y,X], X)         = μ sin α + 1/m`
//!
//! classify geodesics by the sign of `D D''` and give the singular control
//! `v = −D'/D`. In the historical chart `Y = ∂γ = −∂α`, which flips the sign
//! of `D'` and leaves `D`, `D''` unchanged.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::model::{wrap_angle, Chart, ExtendedState, ProblemDefinition};

/// Default relative tolerance for the abnormal test `|D''| ≤ tol (1 + ‖F0‖)`.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

/// Tolerance on `‖F0‖_g − 1` below which a radius counts as the boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketData {
    pub d: f64,
    pub d_prime: f64,
    pub d_second: f64,
    pub at: ExtendedState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtremalKind {
    /// `p⁰ < 0`, time-minimizing candidate.
    Hyperbolic,
    /// `p⁰ > 0`, time-maximizing candidate.
    Elliptic,
    /// `p⁰ = 0`.
    Abnormal,
}

impl ExtremalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExtremalKind::Hyperbolic => "hyperbolic",
            ExtremalKind::Elliptic => "elliptic",
            ExtremalKind::Abnormal => "abnormal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalClass {
    pub kind: ExtremalKind,
    pub data: BracketData,
}

pub fn bracket_data(p: &ProblemDefinition, s: &ExtendedState) -> Result<BracketData> {
    let rs = p.to_revolution(s);
    let prof = p.profile(rs.r)?;
    let sa = rs.alpha.sin();
    let d = 1.0 / prof.m;
    let d_prime_alpha = -prof.dmu * sa * sa + prof.dm * sa / (prof.m * prof.m);
    let d_second = prof.mu * sa + 1.0 / prof.m;
    let d_prime = match p.chart {
        Chart::PolarLike => d_prime_alpha,
        Chart::HistoricalCartesian => -d_prime_alpha,
    };
    Ok(BracketData {
        d,
        d_prime,
        d_second,
        at: *s,
    })
}

pub fn classify(p: &ProblemDefinition, s: &ExtendedState, tol: f64) -> Result<ExtremalClass> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "classification tolerance must be positive, got {tol}"
        )));
    }
    let data = bracket_data(p, s)?;
    let (r, _) = p.chart.revolution_coords(s.position());
    let scale = 1.0 + p.current_norm(r)?;
    let kind = if data.d_second.abs() <= tol * scale {
        ExtremalKind::Abnormal
    } else if data.d * data.d_second > 0.0 {
        ExtremalKind::Hyperbolic
    } else {
        ExtremalKind::Elliptic
    };
    Ok(ExtremalClass { kind, data })
}

/// Headings (in the chart's convention) of the abnormal geodesics through a
/// point at radius `r`: the solutions of `sin α = −1 / (μ m)`.
///
/// Empty in weak current, a single tangent heading on the boundary
/// `‖F0‖_g = 1`, two headings in strong current.
pub fn abnormal_headings(p: &ProblemDefinition, r: f64) -> Result<Vec<f64>> {
    let prof = p.profile(r)?;
    let norm = prof.mu.abs() * prof.m;
    let to_heading = |alpha: f64| wrap_angle(p.chart.heading_from_alpha(alpha));
    if norm < 1.0 - BOUNDARY_TOL {
        return Ok(Vec::new());
    }
    if (norm - 1.0).abs() <= BOUNDARY_TOL {
        let alpha = -prof.mu.signum() * FRAC_PI_2;
        return Ok(vec![to_heading(alpha)]);
    }
    let first = (-1.0 / (prof.mu * prof.m)).asin();
    let second = PI - first;
    Ok(vec![to_heading(first), to_heading(second)])
}

/// Singular feedback `v = −D'/D`: the rate of the chart heading along the
/// extremal through `s`.
pub fn singular_feedback(p: &ProblemDefinition, s: &ExtendedState) -> Result<f64> {
    let b = bracket_data(p, s)?;
    Ok(-b.d_prime / b.d)
}
