//! `key = value` run configuration with dotted keys and `LANDAU_` overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use landau_core::models::{Branch, Model};
use landau_core::ModelParams;

#[derive(Debug, thiserror::Error)]
#[error("{origin}: {message}")]
pub struct ConfigError {
    pub origin: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(origin: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            origin: origin.into(),
            message: message.into(),
        }
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Level {
    pub j: usize,
    pub branch: Option<Branch>,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.branch {
            Some(b) => write!(f, "{}{}", self.j, b),
            None => write!(f, "{}", self.j),
        }
    }
}

fn parse_level(s: &str) -> std::result::Result<Level, String> {
    let s = s.trim();
    let (digits, branch) = match s.chars().last() {
        Some('+') => (&s[..s.len() - 1], Some(Branch::Plus)),
        Some('-') => (&s[..s.len() - 1], Some(Branch::Minus)),
        _ => (s, None),
    };
    let j = digits.parse().map_err(|_| format!("bad level `{s}` (expected e.g. 2, 2+ or 2-)"))?;
    Ok(Level { j, branch })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    Commutation,
    Curvature,
    IntegralIdentity,
    TuvDixmier,
    ZetaClosedForms,
}

impl Check {
    pub const ALL: [Check; 5] = [
        Check::Commutation,
        Check::Curvature,
        Check::IntegralIdentity,
        Check::TuvDixmier,
        Check::ZetaClosedForms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Commutation => "commutation",
            Check::Curvature => "curvature",
            Check::IntegralIdentity => "integral_identity",
            Check::TuvDixmier => "tuv_dixmier",
            Check::ZetaClosedForms => "zeta_closed_forms",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            Check::Commutation | Check::Curvature => 1e-10,
            Check::IntegralIdentity | Check::ZetaClosedForms => 1e-6,
            Check::TuvDixmier => 1e-3,
        }
    }

    pub fn parse(s: &str) -> Option<Check> {
        Check::ALL.into_iter().find(|c| c.name() == s.trim())
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model: Model,
    pub params: ModelParams,
    pub nmax: usize,
    pub levels: Vec<Level>,
    pub fermi_energy: Option<f64>,
    /// Explicit tolerance; estimators and checks fall back to their defaults.
    pub tolerance: Option<f64>,
    pub gap_threshold: f64,
    pub emax: f64,
    pub out_dir: PathBuf,
    pub checks: Vec<Check>,
}

pub const KEYS: &[&str] = &[
    "model",
    "model.params.ell_b",
    "model.params.eps_b",
    "model.params.xi",
    "model.params.c_b",
    "model.params.r",
    "nmax",
    "jmax",
    "levels",
    "fermi_energy",
    "tolerance",
    "gap_threshold",
    "spectrum.emax",
    "output.dir",
    "verify.checks",
];

pub fn env_name(key: &str) -> String {
    format!("LANDAU_{}", key.replace('.', "_").to_ascii_uppercase())
}

/// Command-line overrides, applied last.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub nmax: Option<usize>,
    pub tol: Option<f64>,
    pub model: Option<String>,
    pub checks: Vec<String>,
}

#[derive(Default)]
struct Raw {
    entries: Vec<(String, String, String)>,
}

impl Raw {
    fn set(&mut self, key: &str, value: &str, origin: String) {
        self.entries.retain(|(k, _, _)| k != key);
        self.entries.push((key.to_string(), value.to_string(), origin));
    }
}

fn read_file(path: &Path, raw: &mut Raw) -> Result<()> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(path.display().to_string(), format!("cannot read: {e}")))?;
    for (n, line) in text.lines().enumerate() {
        let origin = format!("{}:{}", path.display(), n + 1);
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::new(origin, format!("expected `key = value`, got `{line}`")));
        };
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(ConfigError::new(origin, format!("unknown key `{k}`")));
        }
        raw.set(k, v.trim(), origin);
    }
    Ok(())
}

fn num<T: std::str::FromStr>(v: &str, origin: &str, key: &str) -> Result<T> {
    v.parse()
        .map_err(|_| ConfigError::new(origin, format!("`{key}`: cannot parse `{v}`")))
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn default_levels(model: Model, jmax: usize) -> Vec<Level> {
    match model {
        Model::JaynesCummings => std::iter::once(Level { j: 0, branch: None })
            .chain((1..=jmax).flat_map(|j| {
                [Branch::Plus, Branch::Minus].map(|b| Level { j, branch: Some(b) })
            }))
            .collect(),
        _ => (0..=jmax).map(|j| Level { j, branch: None }).collect(),
    }
}

impl RunConfig {
    /// Defaults, then the file, then `LANDAU_*` variables from `env`, then flags.
    pub fn load<E>(path: Option<&Path>, env: E, over: &Overrides) -> Result<Self>
    where
        E: Fn(&str) -> Option<String>,
    {
        let mut raw = Raw::default();
        if let Some(p) = path {
            read_file(p, &mut raw)?;
        }
        for k in KEYS {
            let name = env_name(k);
            if let Some(v) = env(&name) {
                raw.set(k, v.trim(), name);
            }
        }
        if let Some(m) = &over.model {
            raw.set("model", m, "--model".into());
        }
        if let Some(n) = over.nmax {
            raw.set("nmax", &n.to_string(), "--nmax".into());
        }
        if let Some(t) = over.tol {
            raw.set("tolerance", &format!("{t:e}"), "--tol".into());
        }
        if let Some(o) = &over.out {
            raw.set("output.dir", &o.display().to_string(), "--out".into());
        }
        if !over.checks.is_empty() {
            raw.set("verify.checks", &over.checks.join(","), "--check".into());
        }
        Self::from_raw(&raw)
    }

    fn from_raw(raw: &Raw) -> Result<Self> {
        let mut cfg = RunConfig {
            model: Model::Landau,
            params: ModelParams::default(),
            nmax: 40,
            levels: Vec::new(),
            fermi_energy: None,
            tolerance: None,
            gap_threshold: 0.05,
            emax: 6.0,
            out_dir: PathBuf::from("out"),
            checks: Check::ALL.to_vec(),
        };
        let mut jmax = 5usize;
        let mut levels: Option<(String, String)> = None;
        let mut gap_set = false;
        let lookup = |key: &str| raw.entries.iter().find(|(k, _, _)| k == key);
        if let Some((_, v, o)) = lookup("model") {
            cfg.model = v.parse().map_err(|e| ConfigError::new(o, format!("{e}")))?;
        }
        for (k, v, o) in &raw.entries {
            let (v, o) = (v.as_str(), o.as_str());
            match k.as_str() {
                "model" => {}
                "model.params.ell_b" => cfg.params.ell_b = num(v, o, k)?,
                "model.params.eps_b" => cfg.params.eps_b = num(v, o, k)?,
                "model.params.xi" => cfg.params.xi = num(v, o, k)?,
                "model.params.c_b" => cfg.params.c_b = num(v, o, k)?,
                "model.params.r" => {
                    let r: Vec<f64> = list(v).map(|x| num(x, o, k)).collect::<Result<_>>()?;
                    if r.len() != 3 {
                        return Err(ConfigError::new(o, "`model.params.r` needs three components"));
                    }
                    cfg.params.r = [r[0], r[1], r[2]];
                }
                "nmax" => cfg.nmax = num(v, o, k)?,
                "jmax" => jmax = num(v, o, k)?,
                "levels" => levels = Some((v.to_string(), o.to_string())),
                "fermi_energy" => cfg.fermi_energy = Some(num(v, o, k)?),
                "tolerance" => {
                    let t: f64 = num(v, o, k)?;
                    if !(t > 0.0) {
                        return Err(ConfigError::new(o, "`tolerance` must be positive"));
                    }
                    cfg.tolerance = Some(t);
                }
                "gap_threshold" => {
                    cfg.gap_threshold = num(v, o, k)?;
                    gap_set = true;
                }
                "spectrum.emax" => cfg.emax = num(v, o, k)?,
                "output.dir" => cfg.out_dir = PathBuf::from(v),
                "verify.checks" => {
                    cfg.checks = list(v)
                        .map(|c| Check::parse(c).ok_or_else(|| ConfigError::new(o, format!("unknown check `{c}`"))))
                        .collect::<Result<_>>()?;
                }
                _ => unreachable!("keys are filtered on read"),
            }
        }
        if !gap_set {
            cfg.gap_threshold *= cfg.params.eps_b;
        }
        cfg.params
            .validate()
            .map_err(|e| ConfigError::new("model.params", e.to_string()))?;
        if cfg.model == Model::Quaternionic {
            cfg.params
                .validate_r()
                .map_err(|e| ConfigError::new("model.params.r", e.to_string()))?;
        }
        cfg.levels = match levels {
            None => default_levels(cfg.model, jmax),
            Some((v, o)) => list(&v)
                .map(|s| parse_level(s).map_err(|e| ConfigError::new(o.clone(), e)))
                .collect::<Result<_>>()?,
        };
        for l in &cfg.levels {
            let ok = match cfg.model {
                Model::Landau => l.branch.is_none(),
                Model::JaynesCummings => (l.j == 0) == l.branch.is_none(),
                Model::Quaternionic => true,
            };
            if !ok {
                return Err(ConfigError::new(
                    "levels",
                    format!("level `{l}` does not fit the {} model", cfg.model),
                ));
            }
        }
        Ok(cfg)
    }

    pub fn tolerance_or(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }
}
