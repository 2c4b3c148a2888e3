//! Flat `key=value` run configuration, merged from an optional file and the
//! command line (command line wins).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use nls_collapse::profiles::{parse_pairs, Family};
use nls_collapse::solver::{EvolveParams, Sponge};
use nls_collapse::Profile;

/// A malformed configuration; reported with exit code 1.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub type UsageResult<T> = Result<T, UsageError>;

fn usage<T>(msg: impl Into<String>) -> UsageResult<T> {
    Err(UsageError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Ground,
    Diag,
    Criteria,
    Simulate,
    Scan,
    Table,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Ground => "ground",
            Subcommand::Diag => "diag",
            Subcommand::Criteria => "criteria",
            Subcommand::Simulate => "simulate",
            Subcommand::Scan => "scan",
            Subcommand::Table => "table",
        }
    }

    pub fn from_name(name: &str) -> UsageResult<Self> {
        Ok(match name {
            "ground" => Subcommand::Ground,
            "diag" => Subcommand::Diag,
            "criteria" => Subcommand::Criteria,
            "simulate" => Subcommand::Simulate,
            "scan" => Subcommand::Scan,
            "table" => Subcommand::Table,
            other => return usage(format!("unknown subcommand `{other}`")),
        })
    }

    fn keys(self) -> Vec<&'static str> {
        let mut k = vec!["out", "seed", "csv"];
        match self {
            Subcommand::Ground => k.push("samples"),
            Subcommand::Diag => k.extend(
                PROFILE_KEYS
                    .iter()
                    .chain(["field", "json", "sampled"].iter()),
            ),
            Subcommand::Criteria => k.extend(
                PROFILE_KEYS
                    .iter()
                    .chain(["delta", "kappa_psi", "radius"].iter()),
            ),
            Subcommand::Simulate => k.extend(
                PROFILE_KEYS
                    .iter()
                    .chain(PARAM_KEYS.iter())
                    .chain(["series"].iter()),
            ),
            Subcommand::Scan => k.extend(
                PROFILE_KEYS
                    .iter()
                    .chain(PARAM_KEYS.iter())
                    .chain(["vary", "bracket", "tol", "workers"].iter()),
            ),
            Subcommand::Table => k.extend(
                PARAM_KEYS
                    .iter()
                    .chain(["id", "simulate", "tol", "workers"].iter()),
            ),
        }
        k
    }
}

const PROFILE_KEYS: [&str; 6] = ["family", "p", "alpha", "gamma", "lambda", "beta"];

const PARAM_KEYS: [&str; 20] = [
    "t_max",
    "dt0",
    "dt_floor",
    "phase_budget",
    "amp_blowup_factor",
    "grad_blowup_factor",
    "scatter_l4_fraction",
    "scatter_window",
    "monotone_samples",
    "sample_interval",
    "amp_sample_change",
    "sponge",
    "sponge_width",
    "sponge_strength",
    "conservation_tol",
    "energy_tol",
    "nonlinearity",
    "backward",
    "r_max",
    "intervals",
];

/// Parse a config file: one `key = value` per line, `#` comments.
pub fn read_config_file(path: &Path) -> UsageResult<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return usage(format!(
                "{}:{}: expected key = value",
                path.display(),
                n + 1
            ));
        };
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Split command-line `key=value` words.
pub fn parse_words(words: &[String]) -> UsageResult<Vec<(String, String)>> {
    parse_pairs(&words.join(" ")).map_err(|e| UsageError(e.to_string()))
}

/// Validated configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub values: BTreeMap<String, String>,
    pub params: EvolveParams,
    pub out: Option<PathBuf>,
    pub csv: bool,
    pub workers: Option<usize>,
    /// Reserved; the solver is deterministic.
    pub seed: Option<u64>,
}

impl RunConfig {
    /// Merge `file` then `cli` pairs, rejecting keys the subcommand does not
    /// know.
    pub fn build(
        subcommand: Subcommand,
        file: Vec<(String, String)>,
        cli: Vec<(String, String)>,
    ) -> UsageResult<Self> {
        let known = subcommand.keys();
        let mut values = BTreeMap::new();
        for (k, v) in file.into_iter().chain(cli) {
            if !known.contains(&k.as_str()) {
                return usage(format!(
                    "unknown key `{k}` for `{}`; accepted: {}",
                    subcommand.name(),
                    known.join(", ")
                ));
            }
            values.insert(k, v);
        }
        let params = evolve_params(&values)?;
        let get = |k: &str| values.get(k).cloned();
        let workers = get("workers")
            .map(|w| parse_num::<usize>("workers", &w))
            .transpose()?;
        if workers == Some(0) {
            return usage("workers must be at least 1");
        }
        Ok(Self {
            subcommand,
            params,
            out: get("out").map(PathBuf::from),
            csv: get("csv")
                .map(|v| parse_bool("csv", &v))
                .transpose()?
                .unwrap_or(false),
            workers,
            seed: get("seed")
                .map(|s| parse_num::<u64>("seed", &s))
                .transpose()?,
            values,
        })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn flag(&self, key: &str) -> UsageResult<bool> {
        self.get(key).map_or(Ok(false), |v| parse_bool(key, v))
    }

    pub fn number(&self, key: &str) -> UsageResult<Option<f64>> {
        self.get(key).map(|v| parse_num::<f64>(key, v)).transpose()
    }

    /// The single profile named by the profile keys.
    pub fn profile(&self) -> UsageResult<Profile> {
        let spec: Vec<String> = PROFILE_KEYS
            .iter()
            .filter_map(|k| self.get(k).map(|v| format!("{k}={v}")))
            .collect();
        if !spec.iter().any(|s| s.starts_with("family=")) {
            return usage(
                "a profile needs family=<q|gaussian|supergaussian|offcentered|oscillatory>",
            );
        }
        spec.join(" ")
            .parse()
            .map_err(|e: nls_collapse::Error| UsageError(e.to_string()))
    }

    /// Profile templates for a scan: every combination of comma-separated
    /// values of the fixed keys, with the varied key left at its default.
    pub fn lattice(&self, vary: &str) -> UsageResult<Vec<Profile>> {
        let family: Family = self
            .get("family")
            .ok_or_else(|| UsageError("scan needs --family".into()))?
            .parse()
            .map_err(|e: nls_collapse::Error| UsageError(e.to_string()))?;
        let mut templates = vec![Profile::default_for(family)];
        for key in PROFILE_KEYS.iter().filter(|k| **k != "family") {
            let Some(raw) = self.get(key) else { continue };
            if *key == vary {
                return usage(format!("`{vary}` is varied and cannot also be fixed"));
            }
            let values: Vec<f64> = raw
                .split(',')
                .map(|v| parse_num::<f64>(key, v.trim()))
                .collect::<UsageResult<_>>()?;
            let mut next = Vec::new();
            for t in &templates {
                for &v in &values {
                    next.push(
                        t.with_param(key, v)
                            .map_err(|e| UsageError(e.to_string()))?,
                    );
                }
            }
            templates = next;
        }
        Ok(templates)
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> UsageResult<T> {
    v.parse()
        .map_err(|_| UsageError(format!("`{key}` expects a number, got `{v}`")))
}

fn parse_bool(key: &str, v: &str) -> UsageResult<bool> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => usage(format!("`{key}` expects true/false, got `{v}`")),
    }
}

fn evolve_params(values: &BTreeMap<String, String>) -> UsageResult<EvolveParams> {
    let mut p = EvolveParams::default();
    for (k, v) in values {
        let num = || parse_num::<f64>(k, v);
        match k.as_str() {
            "t_max" => p.t_max = num()?,
            "dt0" => p.dt0 = num()?,
            "dt_floor" => p.dt_floor = num()?,
            "phase_budget" => p.phase_budget = num()?,
            "amp_blowup_factor" => p.amp_blowup_factor = num()?,
            "grad_blowup_factor" => p.grad_blowup_factor = num()?,
            "scatter_l4_fraction" => p.scatter_l4_fraction = num()?,
            "scatter_window" => p.scatter_window = num()?,
            "monotone_samples" => p.monotone_samples = parse_num(k, v)?,
            "sample_interval" => p.sample_interval = num()?,
            "amp_sample_change" => p.amp_sample_change = num()?,
            "conservation_tol" => p.conservation_tol = num()?,
            "energy_tol" => p.energy_tol = num()?,
            "nonlinearity" => p.nonlinearity = num()?,
            "backward" => p.backward = parse_bool(k, v)?,
            "r_max" => p.r_max = num()?,
            "intervals" => p.intervals = parse_num(k, v)?,
            _ => {}
        }
    }
    let enabled = values
        .get("sponge")
        .map(|v| parse_bool("sponge", v))
        .transpose()?;
    let mut sponge = p.sponge.unwrap_or_default();
    if let Some(w) = values.get("sponge_width") {
        sponge.width = parse_num("sponge_width", w)?;
    }
    if let Some(s) = values.get("sponge_strength") {
        sponge.strength = parse_num("sponge_strength", s)?;
    }
    p.sponge = match enabled {
        Some(false) => None,
        _ => Some(Sponge { ..sponge }),
    };
    p.validate().map_err(|e| UsageError(e.to_string()))?;
    Ok(p)
}
