// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

//! TOML scenario files.
//!
//! Every numeric field accepts either a TOML number or a string holding an
//! arithmetic expression (see [`crate::expr`]). Expressions in the device,
//! potential and sweep sections may also use `omega`, the observable rate.
//!
//! ```toml
//! name = "baseline_mixed_plus"
//! lambda = 1                       # 1, -1 or "sample"
//! seed = 7
//! initial_state = [0, "-1/2", "-1/2"]
//!
//! [observable]
//! omega_rate = 1e8
//! alpha = "pi/2"
//! beta_az = "-pi/6"
//!
//! [device]
//! theta = "3*pi/4"                 # or `parallel = true`, or theta + phi
//! Theta = "pi/3"
//! chart_branch = 1
//!
//! [device.potential]
//! kind = "inverted_morse"          # stern_gerlach_time | expression | zero
//! g0_rate = "omega"
//! kappa = 1e5
//!
//! [integrator]
//! t_final = 1e-3
//!
//! [sweep]
//! variable = "Theta"               # theta | g0 | kappa | lambda | n0
//! values = ["pi/3", "pi/2"]
//! ```
//!
//! A `[stern_gerlach]` section turns the file into a distance-parametrized
//! Stern–Gerlach run; its fields mirror [`SgConfig`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::{DeviceConfig, DriveDirection, IntegratorConfig};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{ChartBranch, DeviceGeometry};
use crate::potentials::{CustomProfile, PotentialProfile};
use crate::state::{BlochVector, Branch, ObservableSpec};
use crate::sterngerlach::{PhysicalConstants, SgConfig};

/// A number written literally or as an expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Value(f64),
    Expr(String),
}

impl Number {
    pub fn eval(&self, omega: Option<f64>) -> Result<f64> {
        match self {
            Number::Value(v) => Ok(*v),
            Number::Expr(src) => {
                let names: &[&str] = if omega.is_some() { &["omega"] } else { &[] };
                let v = Expr::parse(src, names)?.eval(names, &[omega.unwrap_or(f64::NAN)]);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Config(format!("expression `{src}` is not finite")))
                }
            }
        }
    }
}

impl From<f64> for Number {
    fn from(v: f64) -> Self {
        Number::Value(v)
    }
}

impl From<&str> for Number {
    fn from(s: &str) -> Self {
        Number::Expr(s.to_string())
    }
}

/// `lambda` as written in a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LambdaRaw", into = "LambdaRaw")]
pub enum LambdaChoice {
    Fixed(Branch),
    Sample,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LambdaRaw {
    Int(i64),
    Str(String),
}

impl TryFrom<LambdaRaw> for LambdaChoice {
    type Error = Error;

    fn try_from(raw: LambdaRaw) -> Result<Self> {
        match raw {
            LambdaRaw::Int(1) => Ok(LambdaChoice::Fixed(Branch::Plus)),
            LambdaRaw::Int(-1) => Ok(LambdaChoice::Fixed(Branch::Minus)),
            LambdaRaw::Str(s) if s == "sample" => Ok(LambdaChoice::Sample),
            LambdaRaw::Int(v) => Err(Error::Config(format!("lambda must be 1, -1 or \"sample\", got {v}"))),
            LambdaRaw::Str(s) => Err(Error::Config(format!("lambda must be 1, -1 or \"sample\", got \"{s}\""))),
        }
    }
}

impl From<LambdaChoice> for LambdaRaw {
    fn from(l: LambdaChoice) -> Self {
        match l {
            LambdaChoice::Fixed(b) => LambdaRaw::Int(b.sign() as i64),
            LambdaChoice::Sample => LambdaRaw::Str("sample".into()),
        }
    }
}

impl fmt::Display for LambdaChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaChoice::Fixed(b) => write!(f, "{b}"),
            LambdaChoice::Sample => write!(f, "sample"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSection {
    pub omega_rate: Number,
    pub alpha: Number,
    pub beta_az: Number,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSection {
    InvertedMorse {
        g0_rate: Number,
        kappa: Number,
    },
    SternGerlachTime {
        prefactor: Number,
        t_end: Number,
        t_w: Number,
    },
    /// `g(t)` as an expression in `t`, negligible beyond about `10 * support`.
    Expression {
        expr: String,
        support: Number,
    },
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Number>,
    #[serde(default, rename = "Theta", skip_serializing_if = "Option::is_none")]
    pub relative_angle: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_branch: Option<ChartBranch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Number>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub parallel: bool,
    pub potential: PotentialSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SternGerlachSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_field: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_grad: Option<Number>,
    #[serde(default, rename = "V", skip_serializing_if = "Option::is_none")]
    pub speed: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_w: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_start: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_final: Option<Number>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    Theta,
    #[serde(rename = "theta")]
    ChartTheta,
    #[serde(rename = "g0")]
    G0,
    #[serde(rename = "kappa")]
    Kappa,
    #[serde(rename = "lambda")]
    Lambda,
    #[serde(rename = "n0")]
    InitialState,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Theta => "Theta",
            SweepVariable::ChartTheta => "theta",
            SweepVariable::G0 => "g0",
            SweepVariable::Kappa => "kappa",
            SweepVariable::Lambda => "lambda",
            SweepVariable::InitialState => "n0",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "Theta" => SweepVariable::Theta,
            "theta" => SweepVariable::ChartTheta,
            "g0" => SweepVariable::G0,
            "kappa" => SweepVariable::Kappa,
            "lambda" => SweepVariable::Lambda,
            "n0" => SweepVariable::InitialState,
            other => {
                return Err(Error::Config(format!(
                    "unknown sweep variable `{other}` (expected Theta, theta, g0, kappa, lambda or n0)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Scalar(Number),
    Vector([Number; 3]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub values: Vec<SweepValue>,
}

/// A scenario file as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub lambda: LambdaChoice,
    #[serde(default)]
    pub seed: u64,
    pub initial_state: [Number; 3],
    pub observable: ObservableSection,
    pub device: DeviceSection,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stern_gerlach: Option<SternGerlachSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

impl ScenarioFile {
    pub fn from_toml(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn resolve(&self) -> Result<Scenario> {
        let field = |name: &'static str| move |e: Error| Error::Config(format!("{name}: {}", bare(e)));
        let obs = &self.observable;
        let spec = ObservableSpec::new(
            obs.omega_rate.eval(None).map_err(field("observable.omega_rate"))?,
            obs.alpha.eval(None).map_err(field("observable.alpha"))?,
            obs.beta_az.eval(None).map_err(field("observable.beta_az"))?,
        )
        .map_err(field("observable"))?;
        let w = Some(spec.omega_rate);
        let n0 = resolve_vector(&self.initial_state, None).map_err(field("initial_state"))?;

        let dev = &self.device;
        let direction = if dev.parallel {
            if dev.theta.is_some() || dev.relative_angle.is_some() || dev.phi.is_some() {
                return Err(Error::Config("device: `parallel = true` excludes theta, Theta and phi".into()));
            }
            DriveDirection::Parallel
        } else {
            let theta = dev.theta.as_ref().ok_or_else(|| Error::Config("device.theta is required".into()))?;
            let theta = theta.eval(w).map_err(field("device.theta"))?;
            match (&dev.relative_angle, &dev.phi) {
                (Some(rel), None) => DriveDirection::Chart(DeviceGeometry::new(
                    theta,
                    rel.eval(w).map_err(field("device.Theta"))?,
                    dev.chart_branch
                        .ok_or_else(|| Error::Config("device.chart_branch (1 or -1) is required with Theta".into()))?,
                )),
                (None, Some(phi)) => {
                    if dev.chart_branch.is_some() {
                        return Err(Error::Config("device.chart_branch only applies with Theta".into()));
                    }
                    DriveDirection::Polar { theta, phi: phi.eval(w).map_err(field("device.phi"))? }
                }
                _ => return Err(Error::Config("device: give exactly one of Theta and phi".into())),
            }
        };
        let profile = resolve_potential(&dev.potential, w).map_err(field("device.potential"))?;
        let device = DeviceConfig::new(direction, profile);
        device.g_unit(&spec).map_err(field("device"))?;
        self.integrator.validate().map_err(field("integrator"))?;

        let sg = match &self.stern_gerlach {
            None => None,
            Some(s) => {
                let branch = match self.lambda {
                    LambdaChoice::Fixed(b) => b,
                    LambdaChoice::Sample => Branch::Plus,
                };
                Some(resolve_sg(s, branch).map_err(field("stern_gerlach"))?)
            }
        };
        let sweep = match &self.sweep {
            None => None,
            Some(s) => Some(Sweep::resolve(s.variable, &s.values, w).map_err(field("sweep"))?),
        };
        Ok(Scenario {
            name: self.name.clone(),
            spec,
            device,
            lambda: self.lambda,
            n0,
            integrator: self.integrator,
            seed: self.seed,
            sg,
            sweep,
        })
    }
}

fn bare(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

fn resolve_vector(v: &[Number; 3], omega: Option<f64>) -> Result<BlochVector> {
    BlochVector::new([v[0].eval(omega)?, v[1].eval(omega)?, v[2].eval(omega)?])
}

fn resolve_potential(p: &PotentialSection, omega: Option<f64>) -> Result<PotentialProfile> {
    match p {
        PotentialSection::InvertedMorse { g0_rate, kappa } => {
            PotentialProfile::inverted_morse(g0_rate.eval(omega)?, kappa.eval(omega)?)
        }
        PotentialSection::SternGerlachTime { prefactor, t_end, t_w } => {
            PotentialProfile::stern_gerlach_time(prefactor.eval(omega)?, t_end.eval(omega)?, t_w.eval(omega)?)
        }
        PotentialSection::Expression { expr, support } => {
            Ok(PotentialProfile::Custom(CustomProfile::from_expression(expr, support.eval(omega)?)?))
        }
        PotentialSection::Zero => Ok(PotentialProfile::Zero),
    }
}

fn resolve_sg(s: &SternGerlachSection, branch: Branch) -> Result<SgConfig> {
    let d = SgConfig::default();
    let get = |n: &Option<Number>, default: f64| n.as_ref().map_or(Ok(default), |n| n.eval(None));
    let cfg = SgConfig {
        b_field: get(&s.b_field, d.b_field)?,
        beta_grad: get(&s.beta_grad, d.beta_grad)?,
        speed: get(&s.speed, d.speed)?,
        t_end: get(&s.t_end, d.t_end)?,
        t_w: get(&s.t_w, d.t_w)?,
        l_start: get(&s.l_start, d.l_start)?,
        l_final: get(&s.l_final, d.l_final)?,
        branch,
        constants: PhysicalConstants::STANDARD,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepPoint {
    Scalar(f64),
    Branch(Branch),
    State(BlochVector),
}

impl fmt::Display for SweepPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepPoint::Scalar(v) => write!(f, "{v:.17e}"),
            SweepPoint::Branch(b) => write!(f, "{b}"),
            SweepPoint::State(n) => {
                let [a, b, c] = *n.as_array();
                write!(f, "[{a:.17e} {b:.17e} {c:.17e}]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub points: Vec<SweepPoint>,
}

impl Sweep {
    pub fn resolve(variable: SweepVariable, values: &[SweepValue], omega: Option<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        let points = values
            .iter()
            .map(|v| match (variable, v) {
                (SweepVariable::InitialState, SweepValue::Vector(n)) => {
                    Ok(SweepPoint::State(resolve_vector(n, omega)?))
                }
                (SweepVariable::InitialState, SweepValue::Scalar(_)) => {
                    Err(Error::Config("n0 sweep values must be 3-vectors".into()))
                }
                (_, SweepValue::Vector(_)) => {
                    Err(Error::Config(format!("{} sweep values must be scalars", variable.name())))
                }
                (SweepVariable::Lambda, SweepValue::Scalar(x)) => {
                    let v = x.eval(omega)?;
                    if v == 1.0 || v == -1.0 {
                        Ok(SweepPoint::Branch(Branch::from_sign(v)))
                    } else {
                        Err(Error::Config(format!("lambda sweep values must be 1 or -1, got {v}")))
                    }
                }
                (_, SweepValue::Scalar(x)) => Ok(SweepPoint::Scalar(x.eval(omega)?)),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { variable, points })
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub spec: ObservableSpec,
    pub device: DeviceConfig,
    pub lambda: LambdaChoice,
    pub n0: BlochVector,
    pub integrator: IntegratorConfig,
    pub seed: u64,
    pub sg: Option<SgConfig>,
    pub sweep: Option<Sweep>,
}

impl Scenario {
    pub fn from_toml(src: &str) -> Result<Self> {
        ScenarioFile::from_toml(src)?.resolve()
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let src =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&src)
    }

    /// Copy with one sweep variable set to `point`.
    pub fn with(&self, variable: SweepVariable, point: &SweepPoint) -> Result<Self> {
        let mut s = self.clone();
        match (variable, point) {
            (SweepVariable::Theta | SweepVariable::ChartTheta, SweepPoint::Scalar(v)) => {
                let DriveDirection::Chart(mut g) = s.device.direction else {
                    return Err(Error::Config(format!("sweeping {} needs a chart device", variable.name())));
                };
                if variable == SweepVariable::Theta {
                    g.relative_angle = *v;
                } else {
                    g.theta = *v;
                }
                g.check_admissible(s.spec.alpha)?;
                s.device.direction = DriveDirection::Chart(g);
            }
            (SweepVariable::G0 | SweepVariable::Kappa, SweepPoint::Scalar(v)) => {
                let PotentialProfile::InvertedMorse { g0_rate, kappa } = s.device.profile else {
                    return Err(Error::Config(format!(
                        "sweeping {} needs an inverted_morse potential",
                        variable.name()
                    )));
                };
                s.device.profile = if variable == SweepVariable::G0 {
                    PotentialProfile::inverted_morse(*v, kappa)?
                } else {
                    PotentialProfile::inverted_morse(g0_rate, *v)?
                };
            }
            (SweepVariable::Lambda, SweepPoint::Branch(b)) => s.lambda = LambdaChoice::Fixed(*b),
            (SweepVariable::InitialState, SweepPoint::State(n)) => s.n0 = *n,
            _ => return Err(Error::Config(format!("sweep value {point} does not fit {}", variable.name()))),
        }
        Ok(s)
    }
}
