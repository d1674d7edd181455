//! One-parameter sweeps.

use std::str::FromStr;

use gfra_core::{Allocation, Channel, ScenarioConfig, Tolerance, METRIC_NAMES};
use rayon::prelude::*;

use crate::backend::{evaluate, Backend, PointResult};
use crate::config::{parse_tolerance, SweepValue};
use crate::error::{CliError, Result};
use crate::output::{format_float, Table};

/// Parameters that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    GammaC,
    Slots,
    Aps,
    Eps1,
    Eps2,
    /// TDMA fraction; sweeping it switches the allocation to TDMA.
    Alpha,
    Alpha2,
    Beta2,
    Tolerance,
    Load,
}

impl FromStr for Parameter {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gamma_c" => Parameter::GammaC,
            "T" => Parameter::Slots,
            "L" => Parameter::Aps,
            "eps1" => Parameter::Eps1,
            "eps2" => Parameter::Eps2,
            "alpha" => Parameter::Alpha,
            "alpha2" => Parameter::Alpha2,
            "beta2" => Parameter::Beta2,
            "K" => Parameter::Tolerance,
            "G" => Parameter::Load,
            other => {
                return Err(CliError::config(format!(
                    "unknown sweep parameter {other:?}; expected one of gamma_c, T, L, eps1, eps2, alpha, alpha2, beta2, K, G"
                )))
            }
        })
    }
}

impl Parameter {
    pub fn name(self) -> &'static str {
        match self {
            Parameter::GammaC => "gamma_c",
            Parameter::Slots => "T",
            Parameter::Aps => "L",
            Parameter::Eps1 => "eps1",
            Parameter::Eps2 => "eps2",
            Parameter::Alpha => "alpha",
            Parameter::Alpha2 => "alpha2",
            Parameter::Beta2 => "beta2",
            Parameter::Tolerance => "K",
            Parameter::Load => "G",
        }
    }
}

/// A validated swept value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Count(u32),
    Real(f64),
    Tolerance(Tolerance),
}

impl Value {
    pub fn label(&self) -> String {
        match self {
            Value::Count(n) => n.to_string(),
            Value::Real(x) => format_float(*x),
            Value::Tolerance(t) => t.to_string(),
        }
    }
}

fn to_real(v: &SweepValue) -> Result<f64> {
    match v {
        SweepValue::Int(i) => Ok(*i as f64),
        SweepValue::Float(x) => Ok(*x),
        SweepValue::Named(s) => Err(CliError::config(format!("expected a number, got {s:?}"))),
    }
}

fn to_count(v: &SweepValue) -> Result<u32> {
    match v {
        SweepValue::Int(i) => u32::try_from(*i).map_err(|_| CliError::config(format!("{i} is not a valid count"))),
        other => Err(CliError::config(format!("expected an integer, got {other:?}"))),
    }
}

/// Checks and converts a raw value for `p`.
pub fn value_for(p: Parameter, v: &SweepValue) -> Result<Value> {
    match p {
        Parameter::Slots | Parameter::Aps => to_count(v).map(Value::Count),
        Parameter::Tolerance => match v {
            SweepValue::Named(s) => parse_tolerance(s).map(Value::Tolerance),
            other => to_count(other).map(|k| Value::Tolerance(Tolerance::Finite(k))),
        },
        _ => to_real(v).map(Value::Real),
    }
}

/// `base` with parameter `p` set to `v`, validated.
pub fn apply(base: &ScenarioConfig, p: Parameter, v: Value) -> Result<ScenarioConfig> {
    let mut cfg = base.clone();
    let wrong = || CliError::config(format!("value {v:?} does not fit parameter {}", p.name()));
    match (p, v) {
        (Parameter::GammaC, Value::Real(x)) => cfg.gamma_c = x,
        (Parameter::Slots, Value::Count(n)) => cfg.slots = n,
        (Parameter::Aps, Value::Count(n)) => cfg.aps = n,
        (Parameter::Load, Value::Real(x)) => cfg.load = x,
        (Parameter::Tolerance, Value::Tolerance(t)) => cfg.tolerance = t,
        (Parameter::Alpha, Value::Real(x)) => cfg.allocation = Allocation::Tdma { alpha: x },
        (Parameter::Eps1 | Parameter::Eps2, Value::Real(x)) => match &mut cfg.channel {
            Channel::Erasure(e) if p == Parameter::Eps1 => e.eps1 = x,
            Channel::Erasure(e) => e.eps2 = x,
            Channel::Fading(_) => return Err(CliError::config(format!("{} needs an erasure channel", p.name()))),
        },
        (Parameter::Alpha2 | Parameter::Beta2, Value::Real(x)) => match &mut cfg.channel {
            Channel::Fading(f) if p == Parameter::Alpha2 => f.alpha2 = x,
            Channel::Fading(f) => f.beta2 = x,
            Channel::Erasure(_) => return Err(CliError::config(format!("{} needs a fading channel", p.name()))),
        },
        _ => return Err(wrong()),
    }
    cfg.validate()
        .map_err(|e| CliError::config(format!("{} = {}: {e}", p.name(), v.label())))?;
    Ok(cfg)
}

/// A fully checked sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ScenarioConfig,
    pub parameter: Parameter,
    pub values: Vec<Value>,
    pub backend: Backend,
}

impl SweepSpec {
    pub fn new(base: ScenarioConfig, parameter: &str, raw: &[SweepValue], backend: Backend) -> Result<Self> {
        let parameter: Parameter = parameter.parse()?;
        if raw.is_empty() {
            return Err(CliError::config("sweep value list is empty"));
        }
        let values = raw
            .iter()
            .map(|v| value_for(parameter, v))
            .collect::<Result<Vec<_>>>()?;
        // every point must be valid before anything runs
        for &v in &values {
            backend.check_compatible(&apply(&base, parameter, v)?)?;
        }
        Ok(SweepSpec {
            base,
            parameter,
            values,
            backend,
        })
    }
}

/// Evaluates every point, in parallel, keeping the sweep order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<PointResult>> {
    spec.values
        .par_iter()
        .map(|&v| evaluate(&apply(&spec.base, spec.parameter, v)?, &spec.backend))
        .collect()
}

/// Columns: swept value, the four metrics, then for stochastic backends
/// their standard errors and the seed.
pub fn sweep_table(spec: &SweepSpec, results: &[PointResult]) -> Table {
    let stochastic = spec.backend.is_stochastic();
    let mut header = vec![spec.parameter.name().to_string()];
    header.extend(METRIC_NAMES.iter().map(|s| s.to_string()));
    if stochastic {
        header.extend(METRIC_NAMES.iter().map(|s| format!("se_{s}")));
        header.push("seed".into());
    }
    let mut table = Table {
        header,
        rows: Vec::new(),
    };
    for (v, r) in spec.values.iter().zip(results) {
        let mut row = vec![v.label()];
        row.extend(r.metrics.as_array().iter().map(|&x| format_float(x)));
        if stochastic {
            let se = r.std_error.unwrap_or_default();
            row.extend(se.as_array().iter().map(|&x| format_float(x)));
            row.push(r.seed.map_or_else(String::new, |s| s.to_string()));
        }
        table.push(row);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ScenarioConfig {
        ScenarioConfig::erasure(3, 4, 8.0, 0.5, 0.5, 0.5)
    }

    #[test]
    fn parameters_round_trip() {
        for name in [
            "gamma_c", "T", "L", "eps1", "eps2", "alpha", "alpha2", "beta2", "K", "G",
        ] {
            assert_eq!(name.parse::<Parameter>().unwrap().name(), name);
        }
        assert!("eps3".parse::<Parameter>().is_err());
    }

    #[test]
    fn rejects_out_of_domain_values() {
        let bad = [
            ("gamma_c", SweepValue::Float(1.5)),
            ("T", SweepValue::Int(0)),
            ("T", SweepValue::Float(2.5)),
            ("L", SweepValue::Int(-1)),
            ("K", SweepValue::Named("many".into())),
            ("alpha2", SweepValue::Float(1.0)),
        ];
        for (p, v) in bad {
            assert!(SweepSpec::new(base(), p, &[v], Backend::Analytic).is_err(), "{p}");
        }
        assert!(SweepSpec::new(base(), "T", &[], Backend::Analytic).is_err());
    }

    #[test]
    fn table_layout() {
        let spec = SweepSpec::new(
            base(),
            "K",
            &[SweepValue::Int(1), SweepValue::Named("inf".into())],
            Backend::Analytic,
        )
        .unwrap();
        let t = sweep_table(&spec, &run_sweep(&spec).unwrap());
        assert_eq!(t.header, ["K", "R_c", "R_cbar", "Gamma_c", "Gamma_cbar"]);
        assert_eq!(t.rows[1][0], "inf");
    }
}
