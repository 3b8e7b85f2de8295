//! Inline and file-backed descriptions of potentials and observables.

use std::f64::consts::TAU;
use std::fs::File;
use std::path::PathBuf;
use std::str::FromStr;

use gapcert_core::regularity::{GridFunction, Interp};
use gapcert_core::{Error, Result};

/// `const:c`, a bare number, `linear:s`, `cos:a[:freq]`, `sin:a[:freq]`,
/// `step:at:height`, or a path to a `.csv` (`x,value`) or `.json` grid
/// function.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    Const(f64),
    Linear(f64),
    Cos { amplitude: f64, frequency: f64 },
    Sin { amplitude: f64, frequency: f64 },
    Step { at: f64, height: f64 },
    File(PathBuf),
}

fn number(spec: &str, field: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| {
            Error::Parse(format!(
                "function `{spec}`: `{field}` is not a finite number"
            ))
        })
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().parse::<f64>().is_ok() {
            return Ok(FunctionSpec::Const(number(s, s)?));
        }
        let parts: Vec<&str> = s.split(':').collect();
        let wave = |parts: &[&str]| -> Result<(f64, f64)> {
            match parts {
                [a] => Ok((number(s, a)?, 1.0)),
                [a, f] => Ok((number(s, a)?, number(s, f)?)),
                _ => Err(Error::Parse(format!(
                    "function `{s}`: expected amplitude[:frequency]"
                ))),
            }
        };
        match parts.as_slice() {
            ["const", c] => Ok(FunctionSpec::Const(number(s, c)?)),
            ["linear", k] => Ok(FunctionSpec::Linear(number(s, k)?)),
            ["cos", rest @ ..] => {
                let (amplitude, frequency) = wave(rest)?;
                Ok(FunctionSpec::Cos { amplitude, frequency })
            }
            ["sin", rest @ ..] => {
                let (amplitude, frequency) = wave(rest)?;
                Ok(FunctionSpec::Sin { amplitude, frequency })
            }
            ["step", at, h] => Ok(FunctionSpec::Step {
                at: number(s, at)?,
                height: number(s, h)?,
            }),
            _ if s.ends_with(".csv") || s.ends_with(".json") => Ok(FunctionSpec::File(PathBuf::from(s))),
            _ => Err(Error::Parse(format!(
                "function `{s}`: expected const:c, linear:s, cos:a[:f], sin:a[:f], step:at:h, a number or a .csv/.json path"
            ))),
        }
    }
}

impl FunctionSpec {
    fn closed_form(&self, x: f64, (a, b): (f64, f64)) -> f64 {
        let t = (x - a) / (b - a);
        match *self {
            FunctionSpec::Const(c) => c,
            FunctionSpec::Linear(k) => k * x,
            FunctionSpec::Cos {
                amplitude,
                frequency,
            } => amplitude * (TAU * frequency * t).cos(),
            FunctionSpec::Sin {
                amplitude,
                frequency,
            } => amplitude * (TAU * frequency * t).sin(),
            FunctionSpec::Step { at, height } => {
                if x >= at {
                    height
                } else {
                    0.0
                }
            }
            FunctionSpec::File(_) => unreachable!("file specs are loaded, not evaluated"),
        }
    }

    /// Closed forms are sampled on `m` uniform nodes of `domain`; files are
    /// loaded on their own grid.
    pub fn grid_function(
        &self,
        domain: (f64, f64),
        m: usize,
        interp: Interp,
    ) -> Result<GridFunction> {
        match self {
            FunctionSpec::File(path) => {
                let file = File::open(path)
                    .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
                let f = if path.extension().is_some_and(|e| e == "json") {
                    serde_json::from_reader(file)
                        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
                } else {
                    GridFunction::read_csv(file, interp)
                        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
                };
                Ok(f)
            }
            _ => GridFunction::sample(domain, m, interp, |x| self.closed_form(x, domain)),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            FunctionSpec::Const(c) => format!("const:{c}"),
            FunctionSpec::Linear(k) => format!("linear:{k}"),
            FunctionSpec::Cos {
                amplitude,
                frequency,
            } => format!("cos:{amplitude}:{frequency}"),
            FunctionSpec::Sin {
                amplitude,
                frequency,
            } => format!("sin:{amplitude}:{frequency}"),
            FunctionSpec::Step { at, height } => format!("step:{at}:{height}"),
            FunctionSpec::File(p) => p.display().to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_inline_forms() {
        assert_eq!(
            "0.25".parse::<FunctionSpec>().unwrap(),
            FunctionSpec::Const(0.25)
        );
        assert_eq!(
            "const:-1".parse::<FunctionSpec>().unwrap(),
            FunctionSpec::Const(-1.0)
        );
        assert_eq!(
            "linear:0.0014".parse::<FunctionSpec>().unwrap(),
            FunctionSpec::Linear(0.0014)
        );
        assert_eq!(
            "cos:1".parse::<FunctionSpec>().unwrap(),
            FunctionSpec::Cos {
                amplitude: 1.0,
                frequency: 1.0
            }
        );
        assert_eq!(
            "step:0.3:0.0069".parse::<FunctionSpec>().unwrap(),
            FunctionSpec::Step {
                at: 0.3,
                height: 0.0069
            }
        );
        assert!(matches!(
            "phi.csv".parse::<FunctionSpec>().unwrap(),
            FunctionSpec::File(_)
        ));
        assert!("step:0.3".parse::<FunctionSpec>().is_err());
        assert!("linear:abc".parse::<FunctionSpec>().is_err());
    }

    #[test]
    fn samples_closed_forms() {
        let f = FunctionSpec::Cos {
            amplitude: 2.0,
            frequency: 1.0,
        }
        .grid_function((0.0, 1.0), 5, Interp::PiecewiseLinear)
        .unwrap();
        assert!((f.values()[2] + 2.0).abs() < 1e-15);
    }
}
