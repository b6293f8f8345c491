//! `key = value` surface configuration files and named presets.
//!
//! Recognized keys: `kind`, `t_min`, `t_max`, `circumference`, `bump_a`,
//! `bump_eps`, `bump_s`, `mobius_l`. Blank lines and `#` comments are
//! skipped; any other key is rejected.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::surface::{BumpProfile, SurfaceKind, SurfaceModel, WarpedProfile};

const KEYS: [&str; 8] = [
    "kind",
    "t_min",
    "t_max",
    "circumference",
    "bump_a",
    "bump_eps",
    "bump_s",
    "mobius_l",
];

/// Config `kind` values.
pub const KINDS: [&str; 5] = [
    "flat_cylinder",
    "warped_bump",
    "warped_cosh",
    "mobius_quotient",
    "capped_cylinder",
];

/// Named presets: `(name, description)`.
pub const PRESETS: [(&str, &str); 5] = [
    ("flat", "flat cylinder [0,1] x S^1, circumference 2pi"),
    ("bump", "bump family F=1+h(s+t) on [-1,1], a=0.05, eps=0.2, s=0"),
    ("cosh", "negatively curved cylinder dt^2 + cosh^2(t) dx^2 on [-1,1]"),
    ("mobius", "flat Mobius band: [0,1] x S^1 folded antipodally at t=0"),
    ("capped", "flat band [0,1] x S^1 with a unit hemisphere on t=1"),
];

pub fn preset(name: &str) -> Option<SurfaceModel> {
    match name {
        "flat" => SurfaceModel::flat_cylinder(0.0, 1.0).ok(),
        "bump" => SurfaceModel::bump(0.05, 0.2, 0.0).ok(),
        "cosh" => Some(SurfaceModel::cosh_cylinder()),
        "mobius" => SurfaceModel::mobius(1.0).ok(),
        "capped" => SurfaceModel::capped(1.0).ok(),
        _ => None,
    }
}

/// Resolves a preset name, falling back to reading a config file.
pub fn resolve(spec: &str) -> Result<SurfaceModel> {
    match preset(spec) {
        Some(s) => Ok(s),
        None => from_file(spec),
    }
}

pub fn from_file(path: impl AsRef<Path>) -> Result<SurfaceModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<SurfaceModel> {
    let mut kv = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(Error::Config(format!("line {}: unknown key `{k}`", lineno + 1)));
        }
        if kv.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{k}`", lineno + 1)));
        }
    }
    let kind = kv
        .get("kind")
        .ok_or_else(|| Error::Config("missing `kind`".into()))?
        .clone();
    let num = |key: &str| -> Result<Option<f64>> {
        kv.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Config(format!("`{key}`: not a number: {v}")))
            })
            .transpose()
    };
    let circumference = num("circumference")?.unwrap_or(2.0 * PI);
    let forbid = |keys: &[&str]| -> Result<()> {
        for k in keys {
            if kv.contains_key(*k) {
                return Err(Error::Config(format!("`{k}` does not apply to kind `{kind}`")));
            }
        }
        Ok(())
    };
    let bump_keys = ["bump_a", "bump_eps", "bump_s"];
    match kind.as_str() {
        "flat_cylinder" => {
            forbid(&bump_keys)?;
            forbid(&["mobius_l"])?;
            SurfaceModel::new(
                SurfaceKind::FlatCylinder,
                num("t_min")?.unwrap_or(0.0),
                num("t_max")?.unwrap_or(1.0),
                circumference,
                None,
            )
        }
        "warped_bump" => {
            forbid(&["mobius_l"])?;
            let b = BumpProfile::new(
                num("bump_a")?.unwrap_or(0.05),
                num("bump_eps")?.unwrap_or(0.2),
                num("bump_s")?.unwrap_or(0.0),
            );
            SurfaceModel::new(
                SurfaceKind::WarpedProduct,
                num("t_min")?.unwrap_or(-1.0),
                num("t_max")?.unwrap_or(1.0),
                circumference,
                Some(WarpedProfile::Bump(b)),
            )
        }
        "warped_cosh" => {
            forbid(&bump_keys)?;
            forbid(&["mobius_l"])?;
            SurfaceModel::new(
                SurfaceKind::WarpedProduct,
                num("t_min")?.unwrap_or(-1.0),
                num("t_max")?.unwrap_or(1.0),
                circumference,
                Some(WarpedProfile::Cosh),
            )
        }
        "mobius_quotient" | "capped_cylinder" => {
            forbid(&bump_keys)?;
            forbid(&["t_min", "t_max"])?;
            let l = num("mobius_l")?.unwrap_or(1.0);
            let k = if kind == "mobius_quotient" {
                SurfaceKind::MobiusQuotient
            } else {
                SurfaceKind::CappedCylinder
            };
            SurfaceModel::new(k, 0.0, l, circumference, None)
        }
        other => Err(Error::Config(format!(
            "unknown kind `{other}` (expected one of {})",
            KINDS.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bump_config() {
        let s = parse("# shifted bump\nkind = warped_bump\nbump_s = 0.3\nbump_a=0.1\n").unwrap();
        assert_eq!(s, SurfaceModel::bump(0.1, 0.2, 0.3).unwrap());
    }

    #[test]
    fn parses_capped_and_mobius() {
        let m = parse("kind = mobius_quotient\nmobius_l = 2\n").unwrap();
        assert_eq!(m, SurfaceModel::mobius(2.0).unwrap());
        let c = parse("kind = capped_cylinder\n").unwrap();
        assert_eq!(c, SurfaceModel::capped(1.0).unwrap());
    }

    #[test]
    fn rejects_unknown_and_misplaced_keys() {
        assert!(matches!(parse("kind = flat_cylinder\ncolour = red\n"), Err(Error::Config(_))));
        assert!(parse("kind = flat_cylinder\nbump_a = 0.1\n").is_err());
        assert!(parse("kind = torus\n").is_err());
        assert!(parse("t_min = 0\n").is_err());
        assert!(parse("kind = flat_cylinder\nt_min = zero\n").is_err());
        assert!(parse("kind = flat_cylinder\nkind = flat_cylinder\n").is_err());
    }

    #[test]
    fn presets_resolve() {
        for (name, _) in PRESETS {
            assert!(preset(name).is_some(), "{name}");
        }
        assert!(resolve("no/such/file.cfg").is_err());
    }
}
