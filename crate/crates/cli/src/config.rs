//! Command-line arguments and their validation into a [`RunConfig`].

use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;
use serde_json::{json, Value};
use zermelo_core::{make_historical, make_power_law, make_vortex, ExtendedState, Position, ProblemDefinition};

use crate::error::CliError;

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// `historical`, `vortex`, `vortex:K`, or a JSON descriptor such as
    /// `{"family":"powerlaw","k":1,"a":-2,"b":1}`.
    #[arg(long, default_value = "historical")]
    pub problem: String,

    /// Extended state `c1,c2,heading`.
    #[arg(long, allow_hyphen_values = true)]
    pub state: Option<String>,

    /// Initial point `c1,c2`.
    #[arg(long, allow_hyphen_values = true)]
    pub q0: Option<String>,

    #[arg(long)]
    pub t: Option<f64>,

    #[arg(long)]
    pub n: Option<usize>,

    #[arg(long)]
    pub tol: Option<f64>,

    #[arg(long = "t-max")]
    pub t_max: Option<f64>,

    /// Segment `c1,c2:c1,c2`.
    #[arg(long, allow_hyphen_values = true)]
    pub segment: Option<String>,

    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
enum ProblemSpec {
    Historical,
    Vortex { k: f64 },
    Powerlaw { k: f64, a: f64, b: f64 },
}

impl ProblemSpec {
    fn build(&self) -> Result<ProblemDefinition, CliError> {
        Ok(match *self {
            ProblemSpec::Historical => make_historical(),
            ProblemSpec::Vortex { k } => make_vortex(k)?,
            ProblemSpec::Powerlaw { k, a, b } => make_power_law(k, a, b)?,
        })
    }

    fn describe(&self) -> Value {
        match *self {
            ProblemSpec::Historical => json!({"family": "historical"}),
            ProblemSpec::Vortex { k } => json!({"family": "vortex", "k": k}),
            ProblemSpec::Powerlaw { k, a, b } => json!({"family": "powerlaw", "k": k, "a": a, "b": b}),
        }
    }
}

fn parse_problem(s: &str) -> Result<ProblemSpec, CliError> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| CliError::Config(format!("problem descriptor: {e}")));
    }
    match s.split_once(':') {
        None if s == "historical" => Ok(ProblemSpec::Historical),
        None if s == "vortex" => Ok(ProblemSpec::Vortex { k: 1.0 }),
        Some(("vortex", k)) => k
            .trim()
            .parse()
            .map(|k| ProblemSpec::Vortex { k })
            .map_err(|_| CliError::Config(format!("bad vortex circulation {k:?}"))),
        _ => Err(CliError::Config(format!(
            "unknown problem {s:?}; expected historical, vortex, vortex:K or a JSON descriptor"
        ))),
    }
}

fn parse_numbers<const N: usize>(what: &str, s: &str) -> Result<[f64; N], CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(CliError::Config(format!(
            "{what} expects {N} comma-separated numbers, got {s:?}"
        )));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| CliError::Config(format!("{what}: cannot parse {p:?} as a finite number")))?;
    }
    Ok(out)
}

#[derive(Debug)]
pub struct RunConfig {
    pub problem: ProblemDefinition,
    pub descriptor: Value,
    pub state: Option<ExtendedState>,
    pub q0: Option<Position>,
    pub t: Option<f64>,
    pub n: Option<usize>,
    pub tol: Option<f64>,
    pub t_max: Option<f64>,
    pub segment: Option<(Position, Position)>,
    pub out: PathBuf,
}

fn positive(name: &str, x: Option<f64>) -> Result<Option<f64>, CliError> {
    match x {
        Some(v) if !(v.is_finite() && v > 0.0) => Err(CliError::Config(format!("--{name} must be positive, got {v}"))),
        _ => Ok(x),
    }
}

impl RunConfig {
    pub fn from_args(a: &CommonArgs) -> Result<Self, CliError> {
        let spec = parse_problem(&a.problem)?;
        let state = a
            .state
            .as_deref()
            .map(|s| parse_numbers::<3>("--state", s).map(|v| ExtendedState::new(v[0], v[1], v[2])))
            .transpose()?;
        let q0 = a.q0.as_deref().map(|s| parse_numbers::<2>("--q0", s)).transpose()?;
        let segment = a
            .segment
            .as_deref()
            .map(|s| {
                let (l, r) = s
                    .split_once(':')
                    .ok_or_else(|| CliError::Config(format!("--segment expects c1,c2:c1,c2, got {s:?}")))?;
                Ok::<_, CliError>((parse_numbers::<2>("--segment", l)?, parse_numbers::<2>("--segment", r)?))
            })
            .transpose()?;
        if let Some(n) = a.n {
            if n < 8 {
                return Err(CliError::Config(format!("--n must be at least 8, got {n}")));
            }
        }
        Ok(RunConfig {
            problem: spec.build()?,
            descriptor: spec.describe(),
            state,
            q0,
            t: positive("t", a.t)?,
            n: a.n,
            tol: positive("tol", a.tol)?,
            t_max: positive("t-max", a.t_max)?,
            segment,
            out: a.out.clone(),
        })
    }

    pub fn need_state(&self) -> Result<ExtendedState, CliError> {
        self.state
            .ok_or_else(|| CliError::Config("this command needs --state c1,c2,heading".into()))
    }

    pub fn need_q0(&self) -> Result<Position, CliError> {
        self.q0
            .ok_or_else(|| CliError::Config("this command needs --q0 c1,c2".into()))
    }

    pub fn need_t(&self) -> Result<f64, CliError> {
        self.t.ok_or_else(|| CliError::Config("this command needs --t".into()))
    }

    pub fn need_segment(&self) -> Result<(Position, Position), CliError> {
        self.segment
            .ok_or_else(|| CliError::Config("this command needs --segment c1,c2:c1,c2".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(problem: &str) -> CommonArgs {
        CommonArgs {
            problem: problem.into(),
            state: None,
            q0: None,
            t: None,
            n: None,
            tol: None,
            t_max: None,
            segment: None,
            out: ".".into(),
        }
    }

    #[test]
    fn problem_presets_and_json() {
        assert!(RunConfig::from_args(&args("historical"))
            .unwrap()
            .problem
            .is_historical());
        let v = RunConfig::from_args(&args("vortex:2.5")).unwrap();
        assert_eq!(v.descriptor, json!({"family": "vortex", "k": 2.5}));
        let p = RunConfig::from_args(&args(r#"{"family":"powerlaw","k":1,"a":-2,"b":1}"#)).unwrap();
        assert_eq!(p.descriptor["family"], "powerlaw");
        assert!(RunConfig::from_args(&args(r#"{"family":"vortex"}"#)).is_err());
        assert!(RunConfig::from_args(&args("vortex:-1")).is_err());
        assert!(RunConfig::from_args(&args("sphere")).is_err());
    }

    #[test]
    fn state_and_segment_parsing() {
        let mut a = args("historical");
        a.state = Some("0, 2,-2.0944".into());
        a.segment = Some("0,1:-1,2".into());
        let c = RunConfig::from_args(&a).unwrap();
        assert_eq!(c.state.unwrap().c2, 2.0);
        assert_eq!(c.segment.unwrap(), ([0.0, 1.0], [-1.0, 2.0]));

        a.state = Some("0,2".into());
        assert_eq!(RunConfig::from_args(&a).unwrap_err().exit_code(), 2);
        a.state = Some("0,x,1".into());
        assert!(RunConfig::from_args(&a).is_err());
    }

    #[test]
    fn grid_and_tolerance_checks() {
        let mut a = args("historical");
        a.n = Some(4);
        assert!(RunConfig::from_args(&a).is_err());
        a.n = Some(8);
        a.tol = Some(0.0);
        assert!(RunConfig::from_args(&a).is_err());
    }
}
