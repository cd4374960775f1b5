//! Configuration files and bundled presets.
//!
//! A configuration is a TOML document with sections `[tiers.macro]`,
//! `[tiers.small]`, `[ue]`, `[channel]`, `[holes]` and `[noise]`. Every
//! quantity is either a bare number in the key's default unit or a string
//! with a unit suffix (`"53 dBm"`, `"10 /km2"`, `"pi/3"`, `"60 deg"`).
//!
//! Any key can be overridden from the environment: `tiers.macro.power` is
//! read from `PHPNET_TIERS_MACRO_POWER`.

use std::f64::consts::PI;
use std::path::Path;

use toml::{Table, Value};

use super::{Antenna, Blockage, NetworkConfig, PerState, TierParams};
use crate::units::{db_to_linear, dbm_to_watt, noise_power_dbm, per_km2_to_per_m2};
use crate::{Error, Result};

pub const PRESETS: [&str; 2] = ["setup1", "setup2"];

pub const ENV_PREFIX: &str = "PHPNET_";

const SETUP1: &str = include_str!("../../presets/setup1.toml");
const SETUP2: &str = include_str!("../../presets/setup2.toml");

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Density,
    Power,
    Gain,
    Angle,
    Length,
    Frequency,
    Rate,
    Number,
    Integer,
    Text,
}

const TIER_KEYS: [(&str, Kind); 6] = [
    ("density", Kind::Density),
    ("power", Kind::Power),
    ("main_gain", Kind::Gain),
    ("front_to_back", Kind::Gain),
    ("beamwidth", Kind::Angle),
    ("threshold", Kind::Gain),
];

const SCHEMA: &[(&str, &[(&str, Kind)])] = &[
    ("", &[("name", Kind::Text)]),
    ("tiers.macro", &TIER_KEYS),
    ("tiers.small", &TIER_KEYS),
    (
        "ue",
        &[
            ("main_gain", Kind::Gain),
            ("front_to_back", Kind::Gain),
            ("beamwidth", Kind::Angle),
            ("density", Kind::Density),
        ],
    ),
    (
        "channel",
        &[
            ("alpha_los", Kind::Number),
            ("alpha_nlos", Kind::Number),
            ("nu_los", Kind::Integer),
            ("nu_nlos", Kind::Integer),
            ("blockage", Kind::Text),
            ("r_los", Kind::Length),
            ("beta", Kind::Rate),
            ("ball_radius", Kind::Length),
        ],
    ),
    ("holes", &[("radius", Kind::Length), ("angle", Kind::Angle)]),
    (
        "noise",
        &[
            ("bandwidth", Kind::Frequency),
            ("noise_figure", Kind::Gain),
            ("power", Kind::Power),
        ],
    ),
];

/// Every accepted dotted key path.
pub fn known_keys() -> Vec<String> {
    SCHEMA
        .iter()
        .flat_map(|(section, keys)| {
            keys.iter().map(move |(k, _)| {
                if section.is_empty() {
                    k.to_string()
                } else {
                    format!("{section}.{k}")
                }
            })
        })
        .collect()
}

pub fn env_var_for(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.replace('.', "_").to_uppercase())
}

/// (key, value) pairs for every known key set in the process environment.
pub fn env_overrides() -> Vec<(String, String)> {
    known_keys()
        .into_iter()
        .filter_map(|k| std::env::var(env_var_for(&k)).ok().map(|v| (k, v)))
        .collect()
}

pub fn preset_text(name: &str) -> Option<&'static str> {
    match name {
        "setup1" => Some(SETUP1),
        "setup2" => Some(SETUP2),
        _ => None,
    }
}

/// A bundled preset, without environment overrides.
pub fn preset(name: &str) -> Result<NetworkConfig> {
    let text = preset_text(name).ok_or_else(|| {
        Error::config(format!(
            "unknown preset '{name}'; valid presets: {}",
            PRESETS.join(", ")
        ))
    })?;
    parse(text)
}

pub fn parse(text: &str) -> Result<NetworkConfig> {
    parse_with_overrides(text, std::iter::empty())
}

pub fn load(path: &Path) -> Result<NetworkConfig> {
    parse(&std::fs::read_to_string(path)?)
}

/// Parses `text`, then replaces values by `overrides` (dotted key, raw value).
pub fn parse_with_overrides<I>(text: &str, overrides: I) -> Result<NetworkConfig>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut doc: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config(format!("malformed TOML: {e}")))?;
    for (key, raw) in overrides {
        set_path(&mut doc, &key, Value::String(raw))?;
    }
    check_unknown(&doc, "")?;
    build(&Doc(doc))
}

fn set_path(doc: &mut Table, key: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    let (last, path) = parts.split_last().expect("split yields at least one part");
    let mut table = doc;
    for p in path {
        let entry = table.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(format!("'{p}' in '{key}' is not a section")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

fn check_unknown(table: &Table, prefix: &str) -> Result<()> {
    let known = known_keys();
    for (k, v) in table {
        let path = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => check_unknown(t, &path)?,
            _ if known.contains(&path) => {}
            _ => return Err(Error::config(format!("unknown key '{path}'"))),
        }
    }
    Ok(())
}

struct Doc(Table);

impl Doc {
    fn raw(&self, key: &str) -> Option<&Value> {
        let mut parts = key.split('.').peekable();
        let mut table = &self.0;
        while let Some(p) = parts.next() {
            let v = table.get(p)?;
            if parts.peek().is_none() {
                return Some(v);
            }
            table = v.as_table()?;
        }
        None
    }

    fn kind_of(key: &str) -> Kind {
        let (section, name) = key.rsplit_once('.').unwrap_or(("", key));
        SCHEMA
            .iter()
            .find(|(s, _)| *s == section)
            .and_then(|(_, keys)| keys.iter().find(|(k, _)| *k == name))
            .map(|(_, kind)| *kind)
            .expect("schema lookup for an internal key")
    }

    fn optional(&self, key: &str) -> Result<Option<f64>> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        quantity(v, Self::kind_of(key))
            .map(Some)
            .map_err(|e| Error::config(format!("{key}: {e}")))
    }

    fn required(&self, key: &str) -> Result<f64> {
        self.optional(key)?
            .ok_or_else(|| Error::config(format!("missing required key '{key}'")))
    }

    fn text(&self, key: &str) -> Result<Option<String>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(Error::config(format!("{key}: expected a string, got {other}"))),
        }
    }
}

fn antenna(doc: &Doc, section: &str) -> Result<Antenna> {
    let main_gain = doc.required(&format!("{section}.main_gain"))?;
    let ratio = doc.required(&format!("{section}.front_to_back"))?;
    Ok(Antenna {
        main_gain,
        side_gain: main_gain / ratio,
        beamwidth: doc.required(&format!("{section}.beamwidth"))?,
    })
}

fn tier(doc: &Doc, section: &str) -> Result<TierParams> {
    Ok(TierParams {
        density: doc.required(&format!("{section}.density"))?,
        power: doc.required(&format!("{section}.power"))?,
        antenna: antenna(doc, section)?,
        threshold: doc.optional(&format!("{section}.threshold"))?.unwrap_or(1.0),
    })
}

fn build(doc: &Doc) -> Result<NetworkConfig> {
    let integer = |key: &str| -> Result<u32> {
        let v = doc.required(key)?;
        if v.fract() != 0.0 || v < 1.0 || v > u32::MAX as f64 {
            return Err(Error::config(format!("{key} must be a positive integer, got {v}")));
        }
        Ok(v as u32)
    };

    let blockage = match doc.text("channel.blockage")?.as_deref().unwrap_or("exponential") {
        "exponential" => match (doc.optional("channel.beta")?, doc.optional("channel.r_los")?) {
            (Some(beta), None) => Blockage::Exponential { beta },
            (None, Some(r)) => Blockage::from_mean_los_distance(r),
            (Some(_), Some(_)) => return Err(Error::config("set only one of channel.beta and channel.r_los")),
            (None, None) => {
                return Err(Error::config(
                    "exponential blockage needs channel.beta or channel.r_los",
                ))
            }
        },
        "ball" => Blockage::Ball {
            radius: doc.required("channel.ball_radius")?,
        },
        other => {
            return Err(Error::config(format!(
                "unknown blockage model '{other}' (expected exponential or ball)"
            )))
        }
    };

    let noise_power = match doc.optional("noise.power")? {
        Some(p) => p,
        None => {
            let bw = doc.required("noise.bandwidth")?;
            let nf_linear = doc.required("noise.noise_figure")?;
            dbm_to_watt(noise_power_dbm(bw, 10.0 * nf_linear.log10()))
        }
    };

    let cfg = NetworkConfig {
        name: doc.text("name")?.unwrap_or_else(|| "custom".into()),
        tiers: [tier(doc, "tiers.macro")?, tier(doc, "tiers.small")?],
        ue: antenna(doc, "ue")?,
        ue_density: doc.optional("ue.density")?.unwrap_or(0.0),
        alpha: PerState::new(doc.required("channel.alpha_los")?, doc.required("channel.alpha_nlos")?),
        nu: PerState::new(integer("channel.nu_los")?, integer("channel.nu_nlos")?),
        blockage,
        hole_radius: doc.required("holes.radius")?,
        hole_angle: doc.required("holes.angle")?,
        noise_power,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Converts a TOML value to SI according to `kind`.
fn quantity(v: &Value, kind: Kind) -> std::result::Result<f64, String> {
    let (number, unit) = match v {
        Value::Integer(i) => (*i as f64, None),
        Value::Float(f) => (*f, None),
        Value::String(s) => split_quantity(s)?,
        other => return Err(format!("expected a number or quantity string, got {other}")),
    };
    let unit = unit.map(|u| u.to_ascii_lowercase());
    let u = unit.as_deref();
    let bad = || format!("unit '{}' does not fit this key", unit.as_deref().unwrap_or(""));
    Ok(match kind {
        Kind::Density => match u {
            None | Some("/km2" | "/km^2" | "km-2" | "per_km2") => per_km2_to_per_m2(number),
            Some("/m2" | "/m^2" | "m-2" | "per_m2") => number,
            _ => return Err(bad()),
        },
        Kind::Power => match u {
            None | Some("dbm") => dbm_to_watt(number),
            Some("dbw") => dbm_to_watt(number + 30.0),
            Some("w") => number,
            Some("mw") => number * 1e-3,
            _ => return Err(bad()),
        },
        Kind::Gain => match u {
            None | Some("db") => db_to_linear(number),
            Some("linear" | "x") => number,
            _ => return Err(bad()),
        },
        Kind::Angle => match u {
            None | Some("rad") => number,
            Some("deg") => number.to_radians(),
            _ => return Err(bad()),
        },
        Kind::Length => match u {
            None | Some("m") => number,
            Some("km") => number * 1e3,
            _ => return Err(bad()),
        },
        Kind::Frequency => match u {
            None | Some("hz") => number,
            Some("khz") => number * 1e3,
            Some("mhz") => number * 1e6,
            Some("ghz") => number * 1e9,
            _ => return Err(bad()),
        },
        Kind::Rate => match u {
            None | Some("/m" | "1/m") => number,
            Some("/km" | "1/km") => number * 1e-3,
            _ => return Err(bad()),
        },
        Kind::Number | Kind::Integer => match u {
            None => number,
            _ => return Err(bad()),
        },
        Kind::Text => return Err("expected a string value".into()),
    })
}

const UNIT_SUFFIXES: [&str; 20] = [
    "/km^2", "/m^2", "per_km2", "per_m2", "/km2", "/m2", "km-2", "m-2", "linear", "1/km", "1/m", "/km", "/m", "dbm",
    "dbw", "ghz", "mhz", "khz", "deg", "rad",
];

/// Splits `"53 dBm"` / `"200m"` / `"2pi/3"` into a value and an optional unit.
fn split_quantity(s: &str) -> std::result::Result<(f64, Option<String>), String> {
    let s = s.trim();
    if let Some((num, unit)) = s.rsplit_once(char::is_whitespace) {
        return Ok((expression(num.trim())?, Some(unit.trim().to_string())));
    }
    if let Ok(v) = expression(s) {
        return Ok((v, None));
    }
    let lower = s.to_ascii_lowercase();
    let short = ["db", "km", "hz", "mw", "w", "m", "x"];
    for suffix in UNIT_SUFFIXES.iter().chain(short.iter()) {
        if let Some(num) = lower.strip_suffix(suffix) {
            if let Ok(v) = expression(num) {
                return Ok((v, Some(suffix.to_string())));
            }
        }
    }
    Err(format!("cannot parse quantity '{s}'"))
}

/// A number, or a multiple of π such as `pi`, `2pi/3`, `2*pi/3`, `pi/6`.
fn expression(s: &str) -> std::result::Result<f64, String> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let lower = compact.to_ascii_lowercase();
    if let Some((before, after)) = lower.split_once("pi") {
        let before = before.strip_suffix('*').unwrap_or(before);
        let factor = if before.is_empty() {
            1.0
        } else {
            before.parse::<f64>().map_err(|_| format!("cannot parse '{s}'"))?
        };
        let divisor = if after.is_empty() {
            1.0
        } else {
            after
                .strip_prefix('/')
                .and_then(|d| d.parse::<f64>().ok())
                .ok_or_else(|| format!("cannot parse '{s}'"))?
        };
        return Ok(factor * PI / divisor);
    }
    lower.parse::<f64>().map_err(|_| format!("cannot parse '{s}'"))
}
