//! Parameter resolution: built-in defaults, then the config file, then flags.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Float,
    Int,
    Str,
}

/// One accepted key of a subcommand.
#[derive(Clone, Copy, Debug)]
pub struct KeySpec {
    pub name: &'static str,
    pub kind: Kind,
    pub default: &'static str,
}

pub const fn float(name: &'static str, default: &'static str) -> KeySpec {
    KeySpec {
        name,
        kind: Kind::Float,
        default,
    }
}

pub const fn int(name: &'static str, default: &'static str) -> KeySpec {
    KeySpec {
        name,
        kind: Kind::Int,
        default,
    }
}

pub const fn text(name: &'static str, default: &'static str) -> KeySpec {
    KeySpec {
        name,
        kind: Kind::Str,
        default,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Float(f64),
    Int(u64),
    Str(String),
}

fn parse_value(spec: &KeySpec, raw: &str) -> Result<Value> {
    let raw = raw.trim();
    Ok(match spec.kind {
        Kind::Float => Value::Float(
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| anyhow!("key '{}': expected a finite number, got '{raw}'", spec.name))?,
        ),
        Kind::Int => {
            // Accept integral floats such as 1e5.
            let v = raw
                .parse::<u64>()
                .ok()
                .or_else(|| {
                    raw.parse::<f64>()
                        .ok()
                        .filter(|f| f.fract() == 0.0 && *f >= 0.0 && *f < 1.8e19)
                        .map(|f| f as u64)
                })
                .ok_or_else(|| anyhow!("key '{}': expected a nonnegative integer, got '{raw}'", spec.name))?;
            Value::Int(v)
        }
        Kind::Str => Value::Str(raw.to_string()),
    })
}

/// Resolved parameters of one subcommand.
#[derive(Clone, Debug, Default, Serialize)]
#[serde(transparent)]
pub struct Params {
    values: BTreeMap<String, Value>,
}

impl Params {
    /// Defaults overridden by `config` entries, then by `flags`.
    pub fn resolve(
        specs: &[KeySpec],
        config: &BTreeMap<String, String>,
        flags: &[(&str, Option<String>)],
    ) -> Result<Self> {
        let mut values = BTreeMap::new();
        for spec in specs {
            values.insert(spec.name.to_string(), parse_value(spec, spec.default)?);
        }
        for (key, raw) in config {
            let spec = specs
                .iter()
                .find(|s| s.name == key)
                .ok_or_else(|| anyhow!("unknown config key '{key}'"))?;
            values.insert(key.clone(), parse_value(spec, raw)?);
        }
        for (key, raw) in flags {
            let Some(raw) = raw else { continue };
            let spec = specs
                .iter()
                .find(|s| s.name == *key)
                .ok_or_else(|| anyhow!("flag --{key} is not accepted by this subcommand"))?;
            values.insert(key.to_string(), parse_value(spec, raw)?);
        }
        Ok(Self { values })
    }

    pub fn f64(&self, key: &str) -> f64 {
        match self.values.get(key) {
            Some(Value::Float(v)) => *v,
            Some(Value::Int(v)) => *v as f64,
            _ => panic!("parameter '{key}' is not a declared number"),
        }
    }

    pub fn usize(&self, key: &str) -> usize {
        match self.values.get(key) {
            Some(Value::Int(v)) => *v as usize,
            _ => panic!("parameter '{key}' is not a declared integer"),
        }
    }

    pub fn str(&self, key: &str) -> &str {
        match self.values.get(key) {
            Some(Value::Str(v)) => v,
            _ => panic!("parameter '{key}' is not a declared string"),
        }
    }
}

/// Contents of a config file: top-level run settings plus one table per
/// subcommand.
#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    pub top: BTreeMap<String, String>,
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

pub const TOP_LEVEL_KEYS: [&str; 3] = ["seed", "out", "threads"];

fn scalar(key: &str, v: &toml::Value) -> Result<String> {
    Ok(match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => format!("{f:e}"),
        toml::Value::Boolean(b) => b.to_string(),
        _ => bail!("key '{key}': expected a string or number"),
    })
}

impl ConfigFile {
    /// Parses `key = value` lines with `[subcommand]` sections. Unknown
    /// sections and keys are rejected by name.
    pub fn parse(text: &str, known: &[(&str, &[KeySpec])]) -> Result<Self> {
        let table: toml::Table = text.parse().context("config is not valid key = value text")?;
        let mut cfg = ConfigFile::default();
        for (key, value) in &table {
            if let toml::Value::Table(section) = value {
                let specs = known
                    .iter()
                    .find(|(name, _)| name == key)
                    .map(|(_, s)| *s)
                    .ok_or_else(|| anyhow!("unknown config section '[{key}]'"))?;
                let mut entries = BTreeMap::new();
                for (k, v) in section {
                    if !specs.iter().any(|s| s.name == k) {
                        bail!("unknown config key '{k}' in section '[{key}]'");
                    }
                    entries.insert(k.clone(), scalar(k, v)?);
                }
                cfg.sections.insert(key.clone(), entries);
            } else {
                if !TOP_LEVEL_KEYS.contains(&key.as_str()) {
                    bail!("unknown config key '{key}'");
                }
                cfg.top.insert(key.clone(), scalar(key, value)?);
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path, known: &[(&str, &[KeySpec])]) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text, known)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPECS: [KeySpec; 3] = [float("dt", "1e-3"), int("N", "100"), text("preset", "qubit-z")];

    #[test]
    fn flags_beat_config_beat_defaults() {
        let mut cfg = BTreeMap::new();
        cfg.insert("dt".to_string(), "0.01".to_string());
        cfg.insert("N".to_string(), "5".to_string());
        let p = Params::resolve(&SPECS, &cfg, &[("N", Some("1e4".into())), ("dt", None)]).unwrap();
        assert_eq!(p.f64("dt"), 0.01);
        assert_eq!(p.usize("N"), 10000);
        assert_eq!(p.str("preset"), "qubit-z");
    }

    #[test]
    fn bad_values_name_the_key() {
        let err = Params::resolve(&SPECS, &BTreeMap::new(), &[("N", Some("-3".into()))]).unwrap_err();
        assert!(err.to_string().contains("'N'"));
    }

    #[test]
    fn config_sections() {
        let known: [(&str, &[KeySpec]); 1] = [("kod", &SPECS)];
        let cfg = ConfigFile::parse("seed = 4\n[kod]\nN = 20\npreset = \"qubit-z\"\n", &known).unwrap();
        assert_eq!(cfg.top["seed"], "4");
        assert_eq!(cfg.sections["kod"]["N"], "20");
        let err = ConfigFile::parse("[kod]\nbogus = 1\n", &known).unwrap_err();
        assert!(err.to_string().contains("'bogus'"));
        let err = ConfigFile::parse("colour = 1\n", &known).unwrap_err();
        assert!(err.to_string().contains("'colour'"));
        assert!(ConfigFile::parse("[nope]\nx = 1\n", &known).is_err());
    }
}
