//! Scenario files (TOML) and the scenarios shipped with the binary.

use std::path::Path;

use serde_json::Value;
use thiserror::Error;
use wtsim_core::scenario::Scenario;

/// Scenarios compiled into the binary, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("case1", include_str!("../scenarios/case1.toml")),
    ("case2", include_str!("../scenarios/case2.toml")),
    ("case3", include_str!("../scenarios/case3.toml")),
    ("case4", include_str!("../scenarios/case4.toml")),
    ("fault3ph", include_str!("../scenarios/fault3ph.toml")),
    ("faultslg", include_str!("../scenarios/faultslg.toml")),
    ("region2_mppt", include_str!("../scenarios/region2_mppt.toml")),
    ("curtailment", include_str!("../scenarios/curtailment.toml")),
];

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{origin}: {source}")]
    Parse { origin: String, source: toml::de::Error },
}

pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario, LoadError> {
    toml::from_str(text).map_err(|source| LoadError::Parse {
        origin: origin.to_string(),
        source,
    })
}

pub fn bundled(name: &str) -> Option<Scenario> {
    let name = name.strip_suffix(".toml").unwrap_or(name);
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, text)| parse_scenario(text, n).expect("bundled scenarios parse"))
}

/// Loads `arg` as a file when it exists, otherwise as a bundled scenario
/// name. A scenario without a name takes the file stem.
pub fn load_scenario(arg: &str) -> Result<Scenario, LoadError> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(s) = bundled(arg) {
            return Ok(s);
        }
    }
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: arg.to_string(),
        source,
    })?;
    let mut s = parse_scenario(&text, arg)?;
    if s.name.is_empty() {
        s.name = path
            .file_stem()
            .map(|x| x.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".into());
    }
    Ok(s)
}

/// Every effective setting of `s` as dotted `key = value` pairs.
pub fn effective_parameters(s: &Scenario) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(map) => {
                for (k, x) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, x, out);
                }
            }
            Value::String(x) => out.push((prefix.to_string(), x.clone())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut out = Vec::new();
    let value = serde_json::to_value(s).expect("scenario serializes");
    walk("", &value, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use wtsim_core::network::{FaultKind, Phase};

    #[test]
    fn bundled_scenarios_parse_and_validate() {
        for (name, _) in BUNDLED {
            let s = bundled(name).unwrap();
            assert_eq!(&s.name, name);
            s.validate().unwrap_or_else(|e| panic!("{name}: {e:?}"));
        }
    }

    #[test]
    fn events_parse_with_their_kind() {
        let s = parse_scenario(
            r#"
            [[events]]
            kind = "single_line_to_ground"
            phase = "b"
            retained = 0.2
            t_start = 1.0
            duration = 0.1
            "#,
            "inline",
        )
        .unwrap();
        assert_eq!(
            s.events[0].kind,
            FaultKind::SingleLineToGround {
                phase: Phase::B,
                retained: 0.2
            }
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse_scenario("[solver]\nstep = 1e-5\n", "inline").is_err());
        let typo = "[[events]]\nkind = \"three_phase\"\nretaned = 0.2\nt_start = 1.0\nduration = 0.1\n";
        assert!(parse_scenario(typo, "inline").is_err());
    }

    #[test]
    fn effective_parameters_are_flat() {
        let p = effective_parameters(&Scenario::default());
        assert!(p.iter().any(|(k, v)| k == "params.aero.rotor_radius" && v == "118.0"));
        assert!(p.iter().any(|(k, v)| k == "variant" && v == "sequence"));
    }
}
