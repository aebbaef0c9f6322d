//! Scenario files.
//!
//! A pipeline scenario:
//!
//! ```json
//! {
//!   "v": [0, 0, 0],
//!   "a1": [0, 0, 1], "a2": [1, 0, 0], "b1": [..], "b2": [..],
//!   "lambda_A": {"shift": [0, 0, 0], "matrix": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]},
//!   "lambda_E": {..},
//!   "lambda_B": {..}
//! }
//! ```
//!
//! An indivisible process replaces the three channels with `lambda_31`,
//! `lambda_41`, `lambda_32` and `lambda_42`.

use serde::{Deserialize, Serialize};
use tbell_core::bloch::{min_choi_eigenvalue, AffineChannel, BlochState, UnitVec3};
use tbell_core::scenario::{IndivisibleProcess, IndivisibleScenario, TemporalScenario};
use tbell_core::{Error as CoreError, Mat3, Vec3};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelJson {
    pub shift: [f64; 3],
    pub matrix: [[f64; 3]; 3],
}

impl From<&AffineChannel> for ChannelJson {
    fn from(c: &AffineChannel) -> Self {
        Self { shift: c.shift.to_array(), matrix: c.matrix.0 }
    }
}

impl From<&ChannelJson> for AffineChannel {
    fn from(c: &ChannelJson) -> Self {
        AffineChannel::new(Vec3::from_array(c.shift), Mat3(c.matrix))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioJson {
    pub v: [f64; 3],
    pub a1: [f64; 3],
    pub a2: [f64; 3],
    pub b1: [f64; 3],
    pub b2: [f64; 3],
    #[serde(rename = "lambda_A")]
    pub lambda_a: ChannelJson,
    #[serde(rename = "lambda_E")]
    pub lambda_e: ChannelJson,
    #[serde(rename = "lambda_B")]
    pub lambda_b: ChannelJson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndivisibleJson {
    pub v: [f64; 3],
    pub a1: [f64; 3],
    pub a2: [f64; 3],
    pub b1: [f64; 3],
    pub b2: [f64; 3],
    pub lambda_31: ChannelJson,
    pub lambda_41: ChannelJson,
    pub lambda_32: ChannelJson,
    pub lambda_42: ChannelJson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loaded {
    Scenario(TemporalScenario),
    Indivisible(IndivisibleScenario),
}

fn state(field: &str, v: [f64; 3]) -> Result<BlochState, CliError> {
    BlochState::new(Vec3::from_array(v)).map_err(|e| invalid(field, e))
}

fn setting(field: &str, v: [f64; 3]) -> Result<UnitVec3, CliError> {
    UnitVec3::new(Vec3::from_array(v)).map_err(|e| invalid(field, e))
}

fn channel(field: &str, c: &ChannelJson) -> Result<AffineChannel, CliError> {
    let ch = AffineChannel::from(c);
    if !ch.is_finite() {
        return Err(CliError::Input(format!("{field}: non-finite entry")));
    }
    if !tbell_core::bloch::is_cptp(&ch, tbell_core::bloch::CPTP_TOL) {
        return Err(CliError::Input(format!(
            "{field} fails CPTP (min Choi eigenvalue {:e})",
            min_choi_eigenvalue(&ch)
        )));
    }
    Ok(ch)
}

fn invalid(field: &str, e: CoreError) -> CliError {
    CliError::Input(format!("{field}: {e}"))
}

impl ScenarioJson {
    pub fn validate(&self) -> Result<TemporalScenario, CliError> {
        Ok(TemporalScenario {
            v: state("v", self.v)?,
            lambda_a: channel("lambda_A", &self.lambda_a)?,
            lambda_e: channel("lambda_E", &self.lambda_e)?,
            lambda_b: channel("lambda_B", &self.lambda_b)?,
            a1: setting("a1", self.a1)?,
            a2: setting("a2", self.a2)?,
            b1: setting("b1", self.b1)?,
            b2: setting("b2", self.b2)?,
        })
    }
}

impl From<&TemporalScenario> for ScenarioJson {
    fn from(s: &TemporalScenario) -> Self {
        Self {
            v: s.v.vec().to_array(),
            a1: s.a1.vec().to_array(),
            a2: s.a2.vec().to_array(),
            b1: s.b1.vec().to_array(),
            b2: s.b2.vec().to_array(),
            lambda_a: (&s.lambda_a).into(),
            lambda_e: (&s.lambda_e).into(),
            lambda_b: (&s.lambda_b).into(),
        }
    }
}

impl IndivisibleJson {
    pub fn validate(&self) -> Result<IndivisibleScenario, CliError> {
        let process = IndivisibleProcess {
            lambda_31: channel("lambda_31", &self.lambda_31)?,
            lambda_41: channel("lambda_41", &self.lambda_41)?,
            lambda_32: channel("lambda_32", &self.lambda_32)?,
            lambda_42: channel("lambda_42", &self.lambda_42)?,
        };
        Ok(IndivisibleScenario {
            process,
            v: state("v", self.v)?,
            a1: setting("a1", self.a1)?,
            a2: setting("a2", self.a2)?,
            b1: setting("b1", self.b1)?,
            b2: setting("b2", self.b2)?,
        })
    }
}

impl From<&IndivisibleScenario> for IndivisibleJson {
    fn from(s: &IndivisibleScenario) -> Self {
        let p = &s.process;
        Self {
            v: s.v.vec().to_array(),
            a1: s.a1.vec().to_array(),
            a2: s.a2.vec().to_array(),
            b1: s.b1.vec().to_array(),
            b2: s.b2.vec().to_array(),
            lambda_31: (&p.lambda_31).into(),
            lambda_41: (&p.lambda_41).into(),
            lambda_32: (&p.lambda_32).into(),
            lambda_42: (&p.lambda_42).into(),
        }
    }
}

/// Parses a scenario file; files with a `lambda_31` key are indivisible
/// processes.
pub fn parse(text: &str) -> Result<Loaded, CliError> {
    let syntax = |e: serde_json::Error| CliError::Input(format!("invalid scenario JSON: {e}"));
    if text.contains("\"lambda_31\"") {
        let raw: IndivisibleJson = serde_json::from_str(text).map_err(syntax)?;
        Ok(Loaded::Indivisible(raw.validate()?))
    } else {
        let raw: ScenarioJson = serde_json::from_str(text).map_err(syntax)?;
        Ok(Loaded::Scenario(raw.validate()?))
    }
}

pub fn read(path: &std::path::Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn to_json(loaded: &Loaded) -> String {
    let out = match loaded {
        Loaded::Scenario(s) => serde_json::to_string_pretty(&ScenarioJson::from(s)),
        Loaded::Indivisible(s) => serde_json::to_string_pretty(&IndivisibleJson::from(s)),
    };
    out.expect("plain numeric structs serialize") + "\n"
}

pub fn write(path: &std::path::Path, loaded: &Loaded) -> Result<(), CliError> {
    std::fs::write(path, to_json(loaded)).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}
