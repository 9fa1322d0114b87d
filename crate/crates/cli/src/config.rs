//! Flat `key = value` run configuration with dotted section prefixes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use doublephase::eigensolver::SolverOptions;
use doublephase::error::{Error, Result};

/// Every key the driver understands, with its default (empty: no default).
const KEYS: &[(&str, &str)] = &[
    ("seed", "0"),
    ("out", "out"),
    ("strict", "false"),
    ("mesh.dim", ""),
    ("mesh.x0", "0"),
    ("mesh.x1", "1"),
    ("mesh.y0", "0"),
    ("mesh.y1", "1"),
    ("mesh.resolution", ""),
    ("mesh.mask", "none"),
    ("phase.p", "2"),
    ("phase.q", "2.4"),
    ("phase.weight", "constant:1"),
    ("solver.tol_lambda", "1e-10"),
    ("solver.tol_residual", "1e-6"),
    ("solver.max_iter", "5000"),
    ("solver.restarts", "5"),
    ("solver.armijo_step", "1"),
    ("solver.armijo_shrink", "0.5"),
    ("solver.armijo_slope", "1e-4"),
    ("solver.noise", "0.05"),
    ("solver.minimax_outer_iter", "40"),
    ("norm.field", ""),
    ("eig.norm", "standard"),
    ("eigm.m_max", "6"),
    ("experiment.steps", "16"),
    ("experiment.delta0", "1"),
    ("experiment.family", "intervals"),
    ("experiment.sizes", ""),
    ("experiment.h_list", "1,2,4,8,16"),
    ("experiment.m_max", "6"),
    ("experiment.axis", "0"),
    ("experiment.coarse", "true"),
];

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("config line {}: expected key = value", n + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(invalid(format!("unknown config key '{key}'")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| invalid(format!("override '{pair}' is not key=value")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        let set = self.values.get(key).map(String::as_str);
        let default = KEYS.iter().find(|(k, _)| *k == key).map(|(_, d)| *d).filter(|d| !d.is_empty());
        set.or(default)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let s = self.raw(key).ok_or_else(|| invalid(format!("config key '{key}' is required")))?;
        s.parse().map_err(|_| invalid(format!("config key '{key}': cannot parse '{s}'")))
    }

    pub fn get_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(_) => self.get(key).map(Some),
        }
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some(s) = self.raw(key) else { return Ok(None) };
        s.split(',')
            .map(|t| t.trim().parse().map_err(|_| invalid(format!("config key '{key}': bad entry '{t}'"))))
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.raw(key) {
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") | None => Ok(false),
            Some(other) => Err(invalid(format!("config key '{key}': expected true or false, got '{other}'"))),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.raw("out").unwrap_or("out"))
    }

    pub fn solver(&self) -> Result<SolverOptions> {
        let opts = SolverOptions {
            tol_lambda: self.get("solver.tol_lambda")?,
            tol_residual: self.get("solver.tol_residual")?,
            max_iter: self.get("solver.max_iter")?,
            restarts: self.get("solver.restarts")?,
            rng_seed: self.get("seed")?,
            armijo_step: self.get("solver.armijo_step")?,
            armijo_shrink: self.get("solver.armijo_shrink")?,
            armijo_slope: self.get("solver.armijo_slope")?,
            noise: self.get("solver.noise")?,
            minimax_outer_iter: self.get("solver.minimax_outer_iter")?,
        };
        opts.validate()?;
        Ok(opts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_defaults_and_overrides() {
        let mut c = RunConfig::parse("# run\nphase.p = 1.5  # inline\n\nsolver.restarts=2\n").unwrap();
        assert_eq!(c.get::<f64>("phase.p").unwrap(), 1.5);
        assert_eq!(c.get::<f64>("phase.q").unwrap(), 2.4);
        c.set_pair("phase.q=3").unwrap();
        assert_eq!(c.get::<f64>("phase.q").unwrap(), 3.0);
        assert_eq!(c.solver().unwrap().restarts, 2);
        assert_eq!(c.get_opt::<usize>("mesh.resolution").unwrap(), None);
        assert_eq!(c.list::<u32>("experiment.h_list").unwrap().unwrap(), vec![1, 2, 4, 8, 16]);
    }

    #[test]
    fn unknown_keys_and_bad_lines_are_rejected() {
        assert!(RunConfig::parse("solver.tol = 1").is_err());
        assert!(RunConfig::parse("phase.p 2").is_err());
        assert!(RunConfig::parse("phase.p = two").unwrap().get::<f64>("phase.p").is_err());
        assert!(RunConfig::parse("strict = maybe").unwrap().bool("strict").is_err());
    }
}
