//! Rotationally symmetric Zermelo problems.
//!
//! A problem is given by a metric of revolution `g = dr² + m(r)² dθ²` and a
//! current `F0 = μ(r) ∂/∂θ` running along the parallels. The control fields
//! `F1 = ∂/∂r`, `F2 = (1/m) ∂/∂θ` form an orthonormal frame, and the ship
//! heading `α` selects the unit control `cos α F1 + sin α F2`.
//!
//! Two charts are supported. [`Chart::PolarLike`] uses the revolution
//! coordinates `(r, θ, α)` directly. [`Chart::HistoricalCartesian`] is the
//! relabeling `(x, y, γ) = (θ, r, π/2 − α)` used for the historical
//! shear-current example.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};

/// Planar position in chart coordinates `(c1, c2)`.
pub type Position = [f64; 2];

/// Wraps an angle onto the representative in `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Signed difference `a − b` reduced to `(−π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// State reads `(r, θ, α)`.
    PolarLike,
    /// State reads `(x, y, γ) = (θ, r, π/2 − α)`.
    HistoricalCartesian,
}

impl Chart {
    pub fn alpha_from_heading(self, heading: f64) -> f64 {
        match self {
            Chart::PolarLike => heading,
            Chart::HistoricalCartesian => FRAC_PI_2 - heading,
        }
    }

    pub fn heading_from_alpha(self, alpha: f64) -> f64 {
        match self {
            Chart::PolarLike => alpha,
            Chart::HistoricalCartesian => FRAC_PI_2 - alpha,
        }
    }

    /// `(c1, c2)` to `(r, θ)`.
    pub fn revolution_coords(self, q: Position) -> (f64, f64) {
        match self {
            Chart::PolarLike => (q[0], q[1]),
            Chart::HistoricalCartesian => (q[1], q[0]),
        }
    }

    /// `(r, θ)` to `(c1, c2)`.
    pub fn chart_coords(self, r: f64, theta: f64) -> Position {
        match self {
            Chart::PolarLike => [r, theta],
            Chart::HistoricalCartesian => [theta, r],
        }
    }

    /// Position used for distance comparisons. Polar charts are embedded in
    /// the plane so that `θ` and `θ + 2π` coincide.
    pub fn embed(self, q: Position) -> Position {
        match self {
            Chart::PolarLike => [q[0] * q[1].cos(), q[0] * q[1].sin()],
            Chart::HistoricalCartesian => q,
        }
    }

    /// Velocity of the embedded position given chart position and chart velocity.
    pub fn embed_velocity(self, q: Position, v: Position) -> Position {
        match self {
            Chart::PolarLike => {
                let (s, c) = q[1].sin_cos();
                [v[0] * c - q[0] * s * v[1], v[0] * s + q[0] * c * v[1]]
            }
            Chart::HistoricalCartesian => v,
        }
    }

    pub fn labels(self) -> [&'static str; 3] {
        match self {
            Chart::PolarLike => ["r", "theta", "alpha"],
            Chart::HistoricalCartesian => ["x", "y", "gamma"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `m ≡ 1`, `μ(r) = r`.
    Historical,
    /// `m(r) = r`, `μ(r) = k / r²`.
    Vortex { k: f64 },
    /// `m(r) = r^b`, `μ(r) = k r^a`.
    PowerLaw { k: f64, a: f64, b: f64 },
}

/// Open interval of admissible `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub fn contains(&self, r: f64) -> bool {
        r > self.lo && r < self.hi
    }

    /// Distance from `r` to the nearest finite endpoint.
    pub fn distance_to_boundary(&self, r: f64) -> f64 {
        (r - self.lo).min(self.hi - r)
    }
}

/// Profile values and first derivatives at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub m: f64,
    pub dm: f64,
    pub mu: f64,
    pub dmu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemDefinition {
    pub family: Family,
    pub domain: Domain,
    pub chart: Chart,
}

pub fn make_historical() -> ProblemDefinition {
    ProblemDefinition {
        family: Family::Historical,
        domain: Domain {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        },
        chart: Chart::HistoricalCartesian,
    }
}

pub fn make_vortex(k: f64) -> Result<ProblemDefinition> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "vortex circulation must be positive, got {k}"
        )));
    }
    Ok(ProblemDefinition {
        family: Family::Vortex { k },
        domain: Domain {
            lo: 0.0,
            hi: f64::INFINITY,
        },
        chart: Chart::PolarLike,
    })
}

pub fn make_power_law(k: f64, a: f64, b: f64) -> Result<ProblemDefinition> {
    if !(k.is_finite() && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "power-law parameters must be finite, got k={k}, a={a}, b={b}"
        )));
    }
    Ok(ProblemDefinition {
        family: Family::PowerLaw { k, a, b },
        domain: Domain {
            lo: 0.0,
            hi: f64::INFINITY,
        },
        chart: Chart::PolarLike,
    })
}

impl ProblemDefinition {
    pub fn check_radius(&self, r: f64) -> Result<()> {
        if self.domain.contains(r) {
            Ok(())
        } else {
            Err(Error::Domain {
                r,
                lo: self.domain.lo,
                hi: self.domain.hi,
            })
        }
    }

    pub fn profile(&self, r: f64) -> Result<Profile> {
        self.check_radius(r)?;
        Ok(self.profile_unchecked(r))
    }

    /// Profile without the domain check; callers guarantee `r` is admissible.
    pub(crate) fn profile_unchecked(&self, r: f64) -> Profile {
        match self.family {
            Family::Historical => Profile {
                m: 1.0,
                dm: 0.0,
                mu: r,
                dmu: 1.0,
            },
            Family::Vortex { k } => Profile {
                m: r,
                dm: 1.0,
                mu: k / (r * r),
                dmu: -2.0 * k / (r * r * r),
            },
            Family::PowerLaw { k, a, b } => Profile {
                m: r.powf(b),
                dm: b * r.powf(b - 1.0),
                mu: k * r.powf(a),
                dmu: k * a * r.powf(a - 1.0),
            },
        }
    }

    pub fn m(&self, r: f64) -> Result<f64> {
        Ok(self.profile(r)?.m)
    }

    pub fn dm(&self, r: f64) -> Result<f64> {
        Ok(self.profile(r)?.dm)
    }

    pub fn mu(&self, r: f64) -> Result<f64> {
        Ok(self.profile(r)?.mu)
    }

    pub fn dmu(&self, r: f64) -> Result<f64> {
        Ok(self.profile(r)?.dmu)
    }

    /// `‖F0‖_g = |μ(r)| m(r)`; the current is strong where this exceeds 1.
    pub fn current_norm(&self, r: f64) -> Result<f64> {
        let p = self.profile(r)?;
        Ok(p.mu.abs() * p.m)
    }

    pub fn current_norm_at(&self, q: Position) -> Result<f64> {
        let (r, _) = self.chart.revolution_coords(q);
        self.current_norm(r)
    }

    pub fn is_historical(&self) -> bool {
        matches!(self.family, Family::Historical)
    }

    /// Radii where `‖F0‖_g = 1`, restricted to `[lo, hi]`. Used for plotting
    /// the strong/weak boundary.
    pub fn unit_current_radii(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        match self.family {
            Family::Historical => out.extend([-1.0, 1.0]),
            Family::Vortex { k } => out.push(k),
            Family::PowerLaw { k, a, b } => {
                // |k| r^(a+b) = 1
                if a + b != 0.0 && k != 0.0 {
                    out.push((1.0 / k.abs()).powf(1.0 / (a + b)));
                }
            }
        }
        out.retain(|r| *r >= lo && *r <= hi && self.domain.contains(*r));
        out
    }

    pub fn state(&self, c1: f64, c2: f64, heading: f64) -> ExtendedState {
        ExtendedState::new(c1, c2, heading)
    }

    pub fn to_revolution(&self, s: &ExtendedState) -> RevolutionState {
        let (r, theta) = self.chart.revolution_coords([s.c1, s.c2]);
        RevolutionState {
            r,
            theta,
            alpha: self.chart.alpha_from_heading(s.heading),
        }
    }

    pub fn from_revolution(&self, rs: &RevolutionState) -> ExtendedState {
        let q = self.chart.chart_coords(rs.r, rs.theta);
        ExtendedState::new(q[0], q[1], self.chart.heading_from_alpha(rs.alpha))
    }
}

/// Point of the Goh-extended state space in chart coordinates. The heading is
/// `α` in the polar chart and `γ` in the historical chart, always kept in
/// `(−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedState {
    pub c1: f64,
    pub c2: f64,
    pub heading: f64,
}

impl ExtendedState {
    pub fn new(c1: f64, c2: f64, heading: f64) -> Self {
        ExtendedState {
            c1,
            c2,
            heading: wrap_angle(heading),
        }
    }

    pub fn position(&self) -> Position {
        [self.c1, self.c2]
    }
}

/// Revolution coordinates with an unwrapped heading angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevolutionState {
    pub r: f64,
    pub theta: f64,
    pub alpha: f64,
}
