//! Experiment configuration: defaults, the plain-text config file and
//! command-line overrides.
//!
//! A config file holds one `key = value` pair per line. Blank lines and
//! anything after `#` are ignored. List values are comma separated.

use std::path::{Path, PathBuf};
use std::time::Duration;

use frnn_core::classifier::NeighbourPolicy;
use frnn_core::experiment::{FoldSettings, Method, MethodSettings};
use frnn_core::tuning::{ComboConfig, GradientDescentConfig};
use frnn_core::{MissingPolicy, RelationSpec};

use crate::CliError;

/// Every key accepted in a config file.
pub const KEYS: &[&str] = &[
    "data",
    "relations",
    "k",
    "folds",
    "seed",
    "normalize",
    "out",
    "time_budget",
    "target",
    "policy",
    "jobs",
    "missing",
    "alpha",
    "gd.initial_gamma",
    "gd.batch_size",
    "gd.learning_rate",
    "gd.max_iterations",
    "gd.precision",
    "gd.seed",
    "gd.gamma_floor",
    "combo.folds",
    "combo.candidates",
    "combo.seed",
];

pub const DEFAULT_RELATIONS: &str = "man,euc,che,can,pcc,cos,mah,csmbr";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Data files or directories of `.dat` / `.csv` files.
    pub data: Vec<PathBuf>,
    pub relations: Vec<Method>,
    pub k: usize,
    pub folds: usize,
    pub seed: u64,
    pub normalize: bool,
    pub out: PathBuf,
    /// Per (data set, relation) wall-clock budget; later folds are skipped
    /// once it is exceeded.
    pub time_budget: Option<Duration>,
    /// Decision column of CSV inputs; the last column when unset.
    pub target: Option<String>,
    pub policy: NeighbourPolicy,
    /// Worker threads; `None` uses all cores.
    pub jobs: Option<usize>,
    pub missing: MissingPolicy,
    pub alpha: f64,
    pub gd: GradientDescentConfig,
    pub combo: ComboConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: Vec::new(),
            relations: parse_list(DEFAULT_RELATIONS, "relations").expect("valid defaults"),
            k: 3,
            folds: 10,
            seed: 0,
            normalize: true,
            out: PathBuf::from("frnn-out"),
            time_budget: None,
            target: None,
            policy: NeighbourPolicy::Truncate,
            jobs: None,
            missing: MissingPolicy::CompleteCase,
            alpha: 0.05,
            gd: GradientDescentConfig::default(),
            combo: ComboConfig::default(),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_value<T: std::str::FromStr>(value: &str, key: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| usage(format!("invalid value `{value}` for `{key}`")))
}

fn parse_list<T>(value: &str, key: &str) -> Result<Vec<T>, CliError>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| usage(format!("`{key}`: {e}"))))
        .collect()
}

fn parse_bool(value: &str, key: &str) -> Result<bool, CliError> {
    match value.trim() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(usage(format!("invalid boolean `{other}` for `{key}`"))),
    }
}

pub fn parse_policy(value: &str) -> Result<NeighbourPolicy, CliError> {
    match value.trim() {
        "strict" => Ok(NeighbourPolicy::Strict),
        "truncate" => Ok(NeighbourPolicy::Truncate),
        other => Err(usage(format!(
            "unknown neighbour policy `{other}` (expected strict or truncate)"
        ))),
    }
}

pub fn parse_seconds(value: &str, key: &str) -> Result<Duration, CliError> {
    let secs: f64 = parse_value(value, key)?;
    Duration::try_from_secs_f64(secs).map_err(|_| usage(format!("invalid duration `{value}` for `{key}`")))
}

/// `(line number, key, value)` triples of a config file.
pub fn parse_config_text(text: &str) -> Result<Vec<(usize, String, String)>, CliError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(usage(format!(
                "config line {}: unknown key `{key}` (valid keys: {})",
                i + 1,
                KEYS.join(", ")
            )));
        }
        entries.push((i + 1, key.to_string(), value.trim().to_string()));
    }
    Ok(entries)
}

impl ExperimentConfig {
    /// Applies one setting. Relative paths are resolved against `base`.
    pub fn set(&mut self, key: &str, value: &str, base: Option<&Path>) -> Result<(), CliError> {
        let resolve = |p: &str| {
            let p = PathBuf::from(p);
            match base {
                Some(b) if p.is_relative() => b.join(p),
                _ => p,
            }
        };
        match key {
            "data" => {
                self.data = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(resolve)
                    .collect()
            }
            "relations" => self.relations = parse_list(value, key)?,
            "k" => self.k = parse_value(value, key)?,
            "folds" => self.folds = parse_value(value, key)?,
            "seed" => self.seed = parse_value(value, key)?,
            "normalize" => self.normalize = parse_bool(value, key)?,
            "out" => self.out = resolve(value),
            "time_budget" => self.time_budget = Some(parse_seconds(value, key)?),
            "target" => self.target = Some(value.to_string()),
            "policy" => self.policy = parse_policy(value)?,
            "jobs" => self.jobs = Some(parse_value(value, key)?),
            "missing" => self.missing = value.parse().map_err(usage)?,
            "alpha" => self.alpha = parse_value(value, key)?,
            "gd.initial_gamma" => self.gd.initial_gamma = parse_value(value, key)?,
            "gd.batch_size" => self.gd.batch_size = parse_value(value, key)?,
            "gd.learning_rate" => self.gd.learning_rate = parse_value(value, key)?,
            "gd.max_iterations" => self.gd.max_iterations = parse_value(value, key)?,
            "gd.precision" => self.gd.precision = parse_value(value, key)?,
            "gd.seed" => self.gd.seed = parse_value(value, key)?,
            "gd.gamma_floor" => self.gd.gamma_floor = parse_value(value, key)?,
            "combo.folds" => self.combo.inner_folds = parse_value(value, key)?,
            "combo.candidates" => self.combo.candidates = parse_list::<RelationSpec>(value, key)?,
            "combo.seed" => self.combo.seed = parse_value(value, key)?,
            other => return Err(usage(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().filter(|p| !p.as_os_str().is_empty());
        for (line, key, value) in parse_config_text(&text)? {
            self.set(&key, &value, base).map_err(|e| match e {
                CliError::Usage(m) => usage(format!("config line {line}: {m}")),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.k == 0 {
            return Err(usage("k must be at least 1"));
        }
        if self.folds < 2 {
            return Err(usage("folds must be at least 2"));
        }
        if self.relations.is_empty() {
            return Err(usage("at least one relation is required"));
        }
        if self.data.is_empty() {
            return Err(usage("at least one data set is required (--data)"));
        }
        if self.jobs == Some(0) {
            return Err(usage("jobs must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(usage("alpha must lie in (0, 1)"));
        }
        self.gd.validate().map_err(|e| usage(e.to_string()))?;
        self.combo.validate().map_err(|e| usage(e.to_string()))?;
        Ok(())
    }

    pub fn method_settings(&self) -> MethodSettings {
        MethodSettings {
            fold: self.fold_settings(),
            gd: self.gd.clone(),
            combo: self.combo.clone(),
        }
    }

    pub fn fold_settings(&self) -> FoldSettings {
        FoldSettings {
            k: self.k,
            normalize: self.normalize,
            policy: self.policy,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_grammar() {
        let text = "# experiment\nk = 5\nrelations = man, gauss:0.5 ,exp-grad # trailing\n\ngd.batch_size=20\ncombo.candidates = man,cos\n";
        let mut cfg = ExperimentConfig::default();
        for (_, k, v) in parse_config_text(text).unwrap() {
            cfg.set(&k, &v, None).unwrap();
        }
        assert_eq!(cfg.k, 5);
        assert_eq!(cfg.relations.len(), 3);
        assert_eq!(cfg.relations[1].to_string(), "gauss:0.5");
        assert_eq!(cfg.gd.batch_size, 20);
        assert_eq!(cfg.combo.candidates.len(), 2);
    }

    #[test]
    fn bad_lines_are_usage_errors() {
        assert!(matches!(parse_config_text("k 3"), Err(CliError::Usage(_))));
        assert!(matches!(parse_config_text("colour = red"), Err(CliError::Usage(_))));
        let mut cfg = ExperimentConfig::default();
        let err = cfg.set("relations", "man,foo", None).unwrap_err().to_string();
        assert!(err.contains("csmbr"), "{err}");
        assert!(cfg.set("normalize", "maybe", None).is_err());
        assert!(cfg.set("policy", "lenient", None).is_err());
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("data", "a.dat,/abs/b.csv", Some(Path::new("/conf"))).unwrap();
        assert_eq!(
            cfg.data,
            vec![PathBuf::from("/conf/a.dat"), PathBuf::from("/abs/b.csv")]
        );
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_err());
        cfg.data.push("x.csv".into());
        assert!(cfg.validate().is_ok());
        cfg.folds = 1;
        assert!(cfg.validate().is_err());
    }
}
