//! Flat `key=value` design configuration.
//!
//! A config file holds one `key=value` pair per line (`#` starts a comment).
//! Command-line `--key value` flags override file entries. Anything left unset
//! takes the reference defaults, so `L=16` plus `N=40` is a complete config.
//!
//! | key | aliases | default |
//! |-----|---------|---------|
//! | `L` | | required |
//! | `N` | | required |
//! | `n_subcarriers` | `N_C` | `n_samples` if given, else 1024 |
//! | `n_samples` | `N_S` | `n_subcarriers` if given, else 1024 |
//! | `subcarriers` | `c` | `contiguous` (`c = 1..L`); also `stride=k` or `3,5,9,...` |
//! | `papr_threshold` | | `inf` |
//! | `collision_rounds` | `K` | 5 |
//! | `review_period` | `K1` | 20 |
//! | `radius_step` | `gamma` | 1e-4 |
//! | `adaptation_rate` | `rho` | 0.05 |
//! | `tau_seq`, `tau_papr` | | 0.05 |
//! | `max_iterations` | | 10000 |
//! | `stall_limit` | | 500 |
//! | `papr_inner_cap` | | 1000 |
//! | `seed` | | 1 |
//! | `init` | | none (warm-start sequence file) |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use seqforge_core::model::DEFAULT_GRID;
use seqforge_core::{SolverConfig, SubcarrierAssignment};

use crate::error::{CliError, Result};

const KEYS: &[(&str, &[&str])] = &[
    ("L", &[]),
    ("N", &[]),
    ("n_subcarriers", &["N_C"]),
    ("n_samples", &["N_S"]),
    ("subcarriers", &["c"]),
    ("papr_threshold", &[]),
    ("collision_rounds", &["K"]),
    ("review_period", &["K1"]),
    ("radius_step", &["gamma"]),
    ("adaptation_rate", &["rho"]),
    ("tau_seq", &[]),
    ("tau_papr", &[]),
    ("max_iterations", &[]),
    ("stall_limit", &[]),
    ("papr_inner_cap", &[]),
    ("seed", &[]),
    ("init", &[]),
];

/// Maps a user-facing key (any alias, `-` or `_`) to its canonical name.
pub fn canonical_key(key: &str) -> Option<&'static str> {
    let key = key.trim().replace('-', "_");
    KEYS.iter()
        .find(|(name, aliases)| *name == key || aliases.contains(&key.as_str()))
        .map(|(name, _)| *name)
}

/// Unresolved settings: canonical key → raw string value.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings(BTreeMap<&'static str, String>);

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::validation("config", format!("line {}: expected key=value, got `{line}`", i + 1))
            })?;
            out.set(key, value)?;
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let name = canonical_key(key)
            .ok_or_else(|| CliError::validation(key.trim(), "unknown configuration key"))?;
        self.0.insert(name, value.into().trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        canonical_key(key).and_then(|k| self.0.get(k)).map(String::as_str)
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        canonical_key(key).and_then(|k| self.0.remove(k))
    }

    /// Applies `other` on top of `self`.
    pub fn merge(&mut self, other: &Settings) {
        for (k, v) in &other.0 {
            self.0.insert(k, v.clone());
        }
    }

    fn parsed<T: FromStr>(&self, key: &'static str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| CliError::validation(key, format!("cannot parse `{raw}`"))),
        }
    }

    fn parsed_or<T: FromStr>(&self, key: &'static str, default: T) -> Result<T> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn resolve(&self) -> Result<DesignConfig> {
        let len: usize = self.parsed("L")?.ok_or_else(|| CliError::validation("L", "is required"))?;
        let count: usize = self.parsed("N")?.ok_or_else(|| CliError::validation("N", "is required"))?;
        let pattern = match self.0.get("subcarriers") {
            Some(raw) => raw.parse()?,
            None => SubcarrierPattern::Contiguous,
        };
        let assignment = pattern.assignment(
            len,
            self.parsed("n_subcarriers")?,
            self.parsed("n_samples")?,
        )?;

        let papr_threshold = match self.0.get("papr_threshold") {
            Some(raw) => parse_threshold(raw)?,
            None => f64::INFINITY,
        };
        let defaults = SolverConfig::new(assignment.clone(), count);
        let solver = SolverConfig {
            assignment,
            count,
            papr_threshold,
            collision_rounds: self.parsed_or("collision_rounds", defaults.collision_rounds)?,
            review_period: self.parsed_or("review_period", defaults.review_period)?,
            radius_step: self.parsed_or("radius_step", defaults.radius_step)?,
            adaptation_rate: self.parsed_or("adaptation_rate", defaults.adaptation_rate)?,
            tau_seq: self.parsed_or("tau_seq", defaults.tau_seq)?,
            tau_papr: self.parsed_or("tau_papr", defaults.tau_papr)?,
            max_iterations: self.parsed_or("max_iterations", defaults.max_iterations)?,
            stall_limit: self.parsed_or("stall_limit", defaults.stall_limit)?,
            papr_inner_cap: self.parsed_or("papr_inner_cap", defaults.papr_inner_cap)?,
            seed: self.parsed_or("seed", defaults.seed)?,
        };
        solver.validate()?;
        Ok(DesignConfig {
            solver,
            pattern,
            init: self.0.get("init").map(PathBuf::from),
        })
    }
}

/// Accepts a number or `inf` / `infinity` / `none` / `unconstrained`.
pub fn parse_threshold(raw: &str) -> Result<f64> {
    let t = raw.trim().to_ascii_lowercase();
    if matches!(t.as_str(), "inf" | "+inf" | "infinity" | "none" | "unconstrained") {
        return Ok(f64::INFINITY);
    }
    t.parse::<f64>()
        .ok()
        .filter(|v| !v.is_nan())
        .ok_or_else(|| CliError::validation("papr_threshold", format!("cannot parse `{raw}`")))
}

/// How the `L` sequence entries map onto subcarriers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubcarrierPattern {
    /// `c = [1, ..., L]`
    Contiguous,
    /// `c = [k, 2k, ..., Lk]`
    Stride(usize),
    Explicit(Vec<usize>),
}

impl FromStr for SubcarrierPattern {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("contiguous") {
            return Ok(SubcarrierPattern::Contiguous);
        }
        if let Some(k) = s.strip_prefix("stride=") {
            return k
                .trim()
                .parse()
                .ok()
                .filter(|&k| k > 0)
                .map(SubcarrierPattern::Stride)
                .ok_or_else(|| CliError::validation("subcarriers", format!("bad stride `{k}`")));
        }
        s.split(',')
            .map(|v| v.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(SubcarrierPattern::Explicit)
            .map_err(|_| {
                CliError::validation(
                    "subcarriers",
                    format!("expected `contiguous`, `stride=k` or a comma-separated index list, got `{s}`"),
                )
            })
    }
}

impl std::fmt::Display for SubcarrierPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SubcarrierPattern::Contiguous => f.write_str("contiguous"),
            SubcarrierPattern::Stride(k) => write!(f, "stride={k}"),
            SubcarrierPattern::Explicit(c) => {
                let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl SubcarrierPattern {
    pub fn indices(&self, len: usize) -> Result<Vec<usize>> {
        match self {
            SubcarrierPattern::Contiguous => Ok((1..=len).collect()),
            SubcarrierPattern::Stride(k) => Ok((1..=len).map(|l| l * k).collect()),
            SubcarrierPattern::Explicit(c) if c.len() == len => Ok(c.clone()),
            SubcarrierPattern::Explicit(c) => Err(CliError::validation(
                "subcarriers",
                format!("{} indices given but L = {len}", c.len()),
            )),
        }
    }

    /// Builds the assignment; an unset grid size copies the other one, and
    /// both default to 1024.
    pub fn assignment(
        &self,
        len: usize,
        n_subcarriers: Option<usize>,
        n_samples: Option<usize>,
    ) -> Result<SubcarrierAssignment> {
        let (nc, ns) = match (n_subcarriers, n_samples) {
            (Some(nc), Some(ns)) => (nc, ns),
            (Some(nc), None) => (nc, nc),
            (None, Some(ns)) => (ns, ns),
            (None, None) => (DEFAULT_GRID, DEFAULT_GRID),
        };
        Ok(SubcarrierAssignment::new(self.indices(len)?, nc, ns)?)
    }
}

/// Fully resolved design run.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignConfig {
    pub solver: SolverConfig,
    pub pattern: SubcarrierPattern,
    pub init: Option<PathBuf>,
}

impl DesignConfig {
    /// Every resolved parameter as `key → value`, for report echoes.
    pub fn echo(&self) -> BTreeMap<&'static str, String> {
        let s = &self.solver;
        let a = &s.assignment;
        let mut m = BTreeMap::new();
        m.insert("L", a.len().to_string());
        m.insert("N", s.count.to_string());
        m.insert("n_subcarriers", a.n_subcarriers().to_string());
        m.insert("n_samples", a.n_samples().to_string());
        m.insert("subcarriers", SubcarrierPattern::Explicit(a.indices().to_vec()).to_string());
        m.insert("papr_threshold", s.papr_threshold.to_string());
        m.insert("collision_rounds", s.collision_rounds.to_string());
        m.insert("review_period", s.review_period.to_string());
        m.insert("radius_step", s.radius_step.to_string());
        m.insert("adaptation_rate", s.adaptation_rate.to_string());
        m.insert("tau_seq", s.tau_seq.to_string());
        m.insert("tau_papr", s.tau_papr.to_string());
        m.insert("max_iterations", s.max_iterations.to_string());
        m.insert("stall_limit", s.stall_limit.to_string());
        m.insert("papr_inner_cap", s.papr_inner_cap.to_string());
        m.insert("seed", s.seed.to_string());
        if let Some(p) = &self.init {
            m.insert("init", p.display().to_string());
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_reference_defaults() {
        let cfg = Settings::parse("L=16\nN=40\nseed=1\n").unwrap().resolve().unwrap();
        let s = &cfg.solver;
        assert_eq!(s.assignment.n_subcarriers(), 1024);
        assert_eq!(s.assignment.n_samples(), 1024);
        assert_eq!(s.assignment.indices(), (1..=16).collect::<Vec<_>>().as_slice());
        assert_eq!(s.collision_rounds, 5);
        assert_eq!(s.review_period, 20);
        assert_eq!(s.adaptation_rate, 0.05);
        assert_eq!(s.radius_step, 1e-4);
        assert_eq!(s.tau_seq, 0.05);
        assert_eq!(s.tau_papr, 0.05);
        assert_eq!(s.max_iterations, 10_000);
        assert_eq!(s.stall_limit, 500);
        assert_eq!(s.papr_threshold, f64::INFINITY);
        assert_eq!(s.seed, 1);
    }

    #[test]
    fn aliases_comments_and_overrides() {
        let mut s = Settings::parse("# design\nL = 8\nN=20 # count\nK=3\nrho=0.1\nN_S=64\n").unwrap();
        let mut flags = Settings::default();
        flags.set("papr-threshold", "inf").unwrap();
        flags.set("K", "7").unwrap();
        s.merge(&flags);
        let cfg = s.resolve().unwrap();
        assert_eq!(cfg.solver.collision_rounds, 7);
        assert_eq!(cfg.solver.adaptation_rate, 0.1);
        assert_eq!(cfg.solver.assignment.n_samples(), 64);
        assert_eq!(cfg.solver.assignment.n_subcarriers(), 64);
    }

    #[test]
    fn grid_sizes_follow_each_other() {
        let cfg = Settings::parse("L=16\nN=40\nN_C=64\nsubcarriers=stride=2").unwrap().resolve().unwrap();
        let a = &cfg.solver.assignment;
        assert_eq!((a.n_subcarriers(), a.n_samples()), (64, 64));
        assert_eq!(a.indices()[15], 32);
    }

    #[test]
    fn errors_name_the_field() {
        let err = |text: &str| match Settings::parse(text).and_then(|s| s.resolve()) {
            Err(CliError::Validation { field, .. }) => field,
            other => panic!("{other:?}"),
        };
        assert_eq!(err("N=4"), "L");
        assert_eq!(err("L=4\nN=x"), "N");
        assert_eq!(err("L=4\nN=8\nbogus=1"), "bogus");
        assert_eq!(err("L=4\nN=8\npapr_threshold=0.5"), "papr_threshold");
        assert_eq!(err("L=4\nN=8\nc=1,2,3"), "subcarriers");
        assert_eq!(err("L=4\nN=8\nc=1,1,2,3"), "subcarriers");
        assert_eq!(err("L=4\nN=8\nN_C=8\nN_S=4"), "n_samples");
        assert_eq!(err("L=4\nN=8\nrho=2"), "adaptation_rate");
        assert_eq!(err("L=4\nwhat"), "config");
    }

    #[test]
    fn thresholds() {
        assert_eq!(parse_threshold("inf").unwrap(), f64::INFINITY);
        assert_eq!(parse_threshold("Unconstrained").unwrap(), f64::INFINITY);
        assert_eq!(parse_threshold("1.5").unwrap(), 1.5);
        assert!(parse_threshold("nan").is_err());
    }

    #[test]
    fn echo_includes_seed_and_indices() {
        let cfg = Settings::parse("L=3\nN=5\nc=2,5,9\nN_C=16").unwrap().resolve().unwrap();
        let echo = cfg.echo();
        assert_eq!(echo["subcarriers"], "2,5,9");
        assert_eq!(echo["seed"], "1");
        assert_eq!(echo["papr_threshold"], "inf");
    }
}
