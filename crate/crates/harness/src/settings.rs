//! `key = value` configuration files and the matching `--set` flags.
//!
//! Keys are the fields of [`Config`] plus the engine keys `max_rounds`,
//! `mode` and `record_awake_sets`. `profile` picks the starting point and is
//! applied before any other key. Values are read as JSON where that parses
//! and as bare strings otherwise, so `radius = null` and `mode = abort` both
//! work.

use serde_json::{Map, Value};
use sleeping_mis::config::{Config, Profile};
use sleeping_mis::engine::EngineConfig;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SettingsError {
    #[error("line {line}: expected key = value")]
    Syntax { line: usize },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("bad value for {key}: {msg}")]
    BadValue { key: String, msg: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub config: Config,
    pub engine: EngineConfig,
}

impl Settings {
    pub fn new(profile: Profile) -> Self {
        Settings { config: Config::for_profile(profile), engine: EngineConfig::default() }
    }
}

/// Splits `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, SettingsError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(SettingsError::Syntax { line: i + 1 })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(SettingsError::Syntax { line: i + 1 });
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn value_of(v: &str) -> Value {
    serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()))
}

fn patch<T>(base: &T, pairs: &[(&str, &str)]) -> Result<T, SettingsError>
where
    T: serde::Serialize + serde::de::DeserializeOwned,
{
    let mut map: Map<String, Value> = match serde_json::to_value(base).expect("plain struct") {
        Value::Object(m) => m,
        _ => unreachable!(),
    };
    for &(k, v) in pairs {
        map.insert(k.to_string(), value_of(v));
    }
    serde_json::from_value(Value::Object(map)).map_err(|e| {
        let key = pairs.iter().map(|p| p.0).collect::<Vec<_>>().join(",");
        SettingsError::BadValue { key, msg: e.to_string() }
    })
}

/// Applies `pairs` in order on top of `profile` (or the profile the pairs name).
pub fn resolve(profile: Profile, pairs: &[(String, String)]) -> Result<Settings, SettingsError> {
    let mut profile = profile;
    for (k, v) in pairs.iter().filter(|p| p.0 == "profile") {
        profile = serde_json::from_value(value_of(v))
            .map_err(|e| SettingsError::BadValue { key: k.clone(), msg: e.to_string() })?;
    }
    let mut s = Settings::new(profile);
    let cfg_keys = match serde_json::to_value(&s.config).unwrap() {
        Value::Object(m) => m.keys().cloned().collect::<Vec<_>>(),
        _ => unreachable!(),
    };
    let engine_keys = ["max_rounds", "mode", "record_awake_sets"];
    for (k, v) in pairs.iter().filter(|p| p.0 != "profile") {
        let one = [(k.as_str(), v.as_str())];
        if engine_keys.contains(&k.as_str()) {
            s.engine = patch(&s.engine, &one)?;
        } else if cfg_keys.contains(k) {
            s.config = patch(&s.config, &one)?;
        } else {
            return Err(SettingsError::UnknownKey(k.clone()));
        }
    }
    Ok(s)
}
