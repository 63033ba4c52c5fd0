//! Flat `key=value` configuration with a strict key registry.
//!
//! A run resolves three layers in order: the experiment's built-in defaults,
//! an optional config file, then `--set` overrides. Every key must appear in
//! [`REGISTRY`] and its value must parse under the registered grammar;
//! anything else is rejected before the experiment starts.

use std::collections::BTreeMap;
use std::path::Path;

use crate::Failure;

/// Value grammar of a config key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// A finite floating-point number.
    F64,
    /// A non-negative integer.
    U64,
    /// Comma-separated finite floats, at least one.
    ListF64,
    /// Comma-separated non-empty words, at least one.
    ListStr,
}

/// Every key the tool understands, with its value grammar.
pub const REGISTRY: &[(&str, Kind)] = &[
    ("pde.h", Kind::F64),
    ("pde.omega", Kind::F64),
    ("pde.tol", Kind::F64),
    ("pde.max_iter", Kind::U64),
    ("mc.dt", Kind::F64),
    ("mc.max_steps", Kind::U64),
    ("mc.seed", Kind::U64),
    ("mc.walks", Kind::U64),
    ("quad.resolution", Kind::U64),
    ("scan.rmin", Kind::F64),
    ("scan.rmax", Kind::F64),
    ("scan.count", Kind::U64),
    ("scan.centers", Kind::U64),
    ("rh.p", Kind::ListF64),
    ("rh.radii", Kind::ListF64),
    ("rh.centers", Kind::ListStr),
    ("jerison.alphas", Kind::ListF64),
    ("jerison.alpha", Kind::F64),
    ("doubling.radii", Kind::ListF64),
    ("doubling.separation", Kind::F64),
    ("domain.radius", Kind::F64),
    ("bands.count", Kind::U64),
    ("mean.radii", Kind::ListF64),
    ("mean.cells", Kind::U64),
    ("growth.r", Kind::F64),
    ("schauder.r", Kind::F64),
    ("kernel.grid_resolution", Kind::U64),
    ("sample.count", Kind::U64),
];

fn kind_of(key: &str) -> Option<Kind> {
    REGISTRY.iter().find(|(k, _)| *k == key).map(|(_, kind)| *kind)
}

fn check_value(key: &str, kind: Kind, value: &str) -> Result<(), Failure> {
    let bad = |why: &str| {
        Err(Failure::Config(format!(
            "invalid value '{value}' for key '{key}': {why}"
        )))
    };
    match kind {
        Kind::F64 => match value.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(()),
            _ => bad("expected a finite number"),
        },
        Kind::U64 => match value.parse::<u64>() {
            Ok(_) => Ok(()),
            _ => bad("expected a non-negative integer"),
        },
        Kind::ListF64 => {
            if value.trim().is_empty() {
                return bad("expected at least one number");
            }
            for item in value.split(',') {
                match item.trim().parse::<f64>() {
                    Ok(v) if v.is_finite() => {}
                    _ => return bad("expected comma-separated finite numbers"),
                }
            }
            Ok(())
        }
        Kind::ListStr => {
            if value.trim().is_empty() || value.split(',').any(|s| s.trim().is_empty()) {
                return bad("expected comma-separated non-empty words");
            }
            Ok(())
        }
    }
}

fn split_pair(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once('=')?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() || v.is_empty() {
        return None;
    }
    Some((k, v))
}

fn insert_checked(
    entries: &mut BTreeMap<String, String>,
    key: &str,
    value: &str,
) -> Result<(), Failure> {
    let Some(kind) = kind_of(key) else {
        return Err(Failure::Config(format!("unknown config key '{key}'")));
    };
    check_value(key, kind, value)?;
    entries.insert(key.to_string(), value.to_string());
    Ok(())
}

/// A fully resolved configuration.
///
/// `declared` records the keys the experiment itself consumes; only those
/// appear in the summary's `params` block, so stray-but-registered keys from
/// a shared config file cannot perturb the output bytes.
#[derive(Debug, Clone)]
pub struct Config {
    entries: BTreeMap<String, String>,
    declared: Vec<&'static str>,
}

impl Config {
    /// Resolves defaults, then the config file, then `--set` pairs.
    pub fn resolve(
        declared: &'static [(&'static str, &'static str)],
        file: Option<&Path>,
        sets: &[String],
    ) -> Result<Self, Failure> {
        let mut entries: BTreeMap<String, String> = BTreeMap::new();
        for (key, value) in declared {
            insert_checked(&mut entries, key, value)
                .map_err(|e| match e {
                    Failure::Config(m) => Failure::Config(format!("internal default is invalid: {m}")),
                    other => other,
                })?;
        }
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::Config(format!("cannot read config file {}: {e}", path.display()))
            })?;
            for (idx, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = split_pair(line).ok_or_else(|| {
                    Failure::Config(format!(
                        "{}:{}: expected key=value, got '{}'",
                        path.display(),
                        idx + 1,
                        raw.trim()
                    ))
                })?;
                insert_checked(&mut entries, k, v)?;
            }
        }
        for pair in sets {
            let (k, v) = split_pair(pair).ok_or_else(|| {
                Failure::Config(format!("--set expects key=value, got '{pair}'"))
            })?;
            insert_checked(&mut entries, k, v)?;
        }
        Ok(Self {
            entries,
            declared: declared.iter().map(|(k, _)| *k).collect(),
        })
    }

    /// The experiment's own keys with their resolved values.
    pub fn params(&self) -> BTreeMap<String, String> {
        self.declared
            .iter()
            .map(|k| ((*k).to_string(), self.entries[*k].clone()))
            .collect()
    }

    fn raw(&self, key: &str) -> &str {
        self.entries
            .get(key)
            .unwrap_or_else(|| panic!("experiment reads undeclared config key '{key}'"))
    }

    pub fn f64(&self, key: &str) -> f64 {
        self.raw(key).parse().expect("validated at resolve time")
    }

    pub fn u64(&self, key: &str) -> u64 {
        self.raw(key).parse().expect("validated at resolve time")
    }

    pub fn usize(&self, key: &str) -> usize {
        usize::try_from(self.u64(key)).expect("fits the platform word")
    }

    pub fn list_f64(&self, key: &str) -> Vec<f64> {
        self.raw(key)
            .split(',')
            .map(|s| s.trim().parse().expect("validated at resolve time"))
            .collect()
    }

    pub fn list_str(&self, key: &str) -> Vec<String> {
        self.raw(key)
            .split(',')
            .map(|s| s.trim().to_string())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const DECL: &[(&str, &str)] = &[("pde.h", "0.06"), ("mc.seed", "7"), ("rh.radii", "0.1,0.2")];

    #[test]
    fn defaults_then_file_then_sets_override_in_order() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# comment line\npde.h = 0.1\nmc.seed=9 # trailing comment").unwrap();
        let cfg = Config::resolve(
            DECL,
            Some(f.path()),
            &["pde.h=0.2".to_string()],
        )
        .unwrap();
        assert_eq!(cfg.f64("pde.h"), 0.2, "--set wins over the file");
        assert_eq!(cfg.u64("mc.seed"), 9, "file wins over the default");
        assert_eq!(cfg.list_f64("rh.radii"), vec![0.1, 0.2]);
        let params = cfg.params();
        assert_eq!(params.len(), 3);
        assert_eq!(params["pde.h"], "0.2");
    }

    #[test]
    fn unknown_keys_and_malformed_values_are_rejected() {
        assert!(matches!(
            Config::resolve(DECL, None, &["nope.key=1".to_string()]),
            Err(Failure::Config(_))
        ));
        assert!(matches!(
            Config::resolve(DECL, None, &["pde.h=abc".to_string()]),
            Err(Failure::Config(_))
        ));
        assert!(matches!(
            Config::resolve(DECL, None, &["pde.h=inf".to_string()]),
            Err(Failure::Config(_))
        ));
        assert!(matches!(
            Config::resolve(DECL, None, &["mc.seed=-3".to_string()]),
            Err(Failure::Config(_))
        ));
        assert!(matches!(
            Config::resolve(DECL, None, &["rh.radii=".to_string()]),
            Err(Failure::Config(_))
        ));
        assert!(matches!(
            Config::resolve(DECL, None, &["justakey".to_string()]),
            Err(Failure::Config(_))
        ));
    }

    #[test]
    fn registered_but_undeclared_keys_stay_out_of_params() {
        let cfg = Config::resolve(DECL, None, &["quad.resolution=64".to_string()]).unwrap();
        assert!(!cfg.params().contains_key("quad.resolution"));
        assert_eq!(cfg.usize("quad.resolution"), 64, "still readable");
    }
}
