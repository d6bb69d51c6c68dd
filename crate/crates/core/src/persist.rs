//! Versioned JSON records for waves, derivatives, matrices and reports.
//!
//! Every file is an envelope `{"schema": .., "version": .., "payload": ..}`.
//! Floats are written with shortest round-trip formatting, so reloading
//! reproduces every coefficient exactly.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bloch::DhatMatrix;
use crate::error::{Error, Result};
use crate::modulation::ModulationMatrix;
use crate::wave::{self, ParameterJacobian, TravelingWave};

pub const SCHEMA_VERSION: u32 = 1;

/// A type with a named on-disk schema.
pub trait Record: Serialize + DeserializeOwned {
    const SCHEMA: &'static str;

    /// Derived values written for readers; ignored on load.
    fn summary(&self) -> Option<serde_json::Value> {
        None
    }
}

impl Record for TravelingWave {
    const SCHEMA: &'static str = "traveling-wave";

    fn summary(&self) -> Option<serde_json::Value> {
        let q = wave::conserved_quantities(self).ok()?;
        Some(serde_json::json!({
            "spec_name": self.spec.name,
            "modes": self.modes(),
            "mass": q.mass,
            "momentum": q.momentum,
            "hamiltonian": q.hamiltonian,
        }))
    }
}

impl Record for ParameterJacobian {
    const SCHEMA: &'static str = "parameter-jacobian";
}

impl Record for ModulationMatrix {
    const SCHEMA: &'static str = "modulation-matrix";
}

impl Record for DhatMatrix {
    const SCHEMA: &'static str = "projected-matrix";
}

#[derive(Serialize)]
struct EnvelopeOut<'a, T: Serialize> {
    schema: &'a str,
    version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<serde_json::Value>,
    payload: &'a T,
}

#[derive(Deserialize)]
struct Header {
    schema: String,
    version: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvelopeIn<T> {
    #[allow(dead_code)]
    schema: String,
    #[allow(dead_code)]
    version: u32,
    #[serde(default)]
    #[allow(dead_code)]
    summary: Option<serde::de::IgnoredAny>,
    payload: T,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Serialize any value inside an envelope; reports use this directly.
pub fn to_string_as<T: Serialize>(schema: &str, value: &T) -> Result<String> {
    envelope(schema, None, value)
}

fn envelope<T: Serialize>(schema: &str, summary: Option<serde_json::Value>, value: &T) -> Result<String> {
    let env = EnvelopeOut {
        schema,
        version: SCHEMA_VERSION,
        summary,
        payload: value,
    };
    let mut s = serde_json::to_string_pretty(&env).map_err(parse_error)?;
    s.push('\n');
    Ok(s)
}

pub fn to_string<T: Record>(value: &T) -> Result<String> {
    envelope(T::SCHEMA, value.summary(), value)
}

pub fn from_str<T: Record>(text: &str) -> Result<T> {
    let header: Header = serde_json::from_str::<Header>(text).map_err(parse_error)?;
    if header.schema != T::SCHEMA {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: format!("expected schema `{}`, found `{}`", T::SCHEMA, header.schema),
        });
    }
    if header.version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            schema: header.schema,
            found: header.version,
            expected: SCHEMA_VERSION,
        });
    }
    let env: EnvelopeIn<T> = serde_json::from_str(text).map_err(parse_error)?;
    Ok(env.payload)
}

pub fn save<T: Record>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_string(value)?)?;
    Ok(())
}

pub fn save_as<T: Serialize>(schema: &str, value: &T, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_string_as(schema, value)?)?;
    Ok(())
}

pub fn load<T: Record>(path: impl AsRef<Path>) -> Result<T> {
    from_str(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::EquationSpec;
    use crate::wave::{continue_family, parameter_derivatives, SolverOptions};

    fn wave() -> TravelingWave {
        let opts = SolverOptions::default().with_modes(24);
        continue_family(&EquationSpec::whitham(), 1.0, 0.0, &[0.1], &opts)
            .unwrap()
            .remove(0)
    }

    #[test]
    fn wave_round_trip_is_bit_exact() {
        let w = wave();
        let back: TravelingWave = from_str(&to_string(&w).unwrap()).unwrap();
        assert_eq!(back, w);
        for (a, b) in back.coeffs.iter().zip(&w.coeffs) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.c.to_bits(), w.c.to_bits());
    }

    #[test]
    fn wave_record_carries_conserved_triple() {
        let w = wave();
        let v: serde_json::Value = serde_json::from_str(&to_string(&w).unwrap()).unwrap();
        let q = wave::conserved_quantities(&w).unwrap();
        assert_eq!(v["summary"]["momentum"].as_f64(), Some(q.momentum));
        assert_eq!(v["summary"]["modes"].as_u64(), Some(24));
        assert_eq!(v["schema"], "traveling-wave");
    }

    #[test]
    fn file_round_trip() {
        let w = wave();
        let pj = parameter_derivatives(&w, &SolverOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pj.json");
        save(&pj, &path).unwrap();
        let back: ParameterJacobian = load(&path).unwrap();
        assert_eq!(back, pj);
    }

    #[test]
    fn future_version_is_a_migration_error() {
        let text = to_string(&wave()).unwrap().replacen(
            &format!("\"version\": {SCHEMA_VERSION}"),
            "\"version\": 99",
            1,
        );
        match from_str::<TravelingWave>(&text) {
            Err(Error::SchemaVersion { found: 99, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_schema_is_rejected() {
        let text = to_string(&wave()).unwrap();
        assert!(matches!(
            from_str::<ParameterJacobian>(&text),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn malformed_payload_reports_position() {
        let text = to_string(&wave()).unwrap().replacen("\"c\":", "\"c\": \"oops\", \"x\":", 1);
        match from_str::<TravelingWave>(&text) {
            Err(Error::Parse { line, column, .. }) => assert!(line > 1 && column > 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_file_reports_position() {
        let text = to_string(&wave()).unwrap();
        let cut = &text[..text.len() / 2];
        assert!(matches!(
            from_str::<TravelingWave>(cut),
            Err(Error::Parse { .. })
        ));
    }
}
