//! Flat `key = value` run configuration.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored.
//! Keys are case-sensitive. Unknown and repeated keys are errors.
//!
//! | key | default |
//! |-----|---------|
//! | `mu_L`, `mu`, `mu_R` | 1, 2, 3 |
//! | `U`, `T_a`, `T_b` | 1, 1, 1 |
//! | `a`, `b` | -2, -1 |
//! | `k_min`, `k_max`, `k_count`, `k_spacing` | 0.1, 50, 200, `log` |
//! | `normalization` | required: `constant`, `polynomial` or `exp_neg_ka` |
//! | `normalization_param` | 1 for `constant`; required for `polynomial`; not allowed for `exp_neg_ka` |
//! | `branch` | `both` (`A`, `B`) |
//! | `tol_root_residual`, `tol_near_zero`, `fit_window_fraction` | 1e-9, 1e-8, 0.5 |
//! | `csv`, `json`, `svg_dispersion`, `svg_boundedness`, `report` | unset |
//! | `seed`, `threads` | 0, all cores |

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::audit::AuditConfig;
use crate::dispersion::{Branch, ROOT_RESIDUAL_TOL};
use crate::eigenfunction::{EigenError, NormalizationRule};
use crate::grid::{GridError, KGrid, Spacing};
use crate::model::{ParamError, ParamsCandidate, PhysicalParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error(transparent)]
    Validation(#[from] ParamError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Normalization(#[from] EigenError),
    #[error("output paths must be distinct: {0}")]
    DuplicatePath(String),
}

const KEYS: [&str; 25] = [
    "mu_L",
    "mu",
    "mu_R",
    "U",
    "T_a",
    "T_b",
    "a",
    "b",
    "k_min",
    "k_max",
    "k_count",
    "k_spacing",
    "normalization",
    "normalization_param",
    "branch",
    "tol_root_residual",
    "tol_near_zero",
    "fit_window_fraction",
    "csv",
    "json",
    "svg_dispersion",
    "svg_boundedness",
    "report",
    "seed",
    "threads",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchSelection {
    Both,
    Only(Branch),
}

impl BranchSelection {
    pub fn includes(self, branch: Branch) -> bool {
        match self {
            BranchSelection::Both => true,
            BranchSelection::Only(b) => b == branch,
        }
    }

    /// Branch shown in the boundedness plot.
    pub fn primary(self) -> Branch {
        match self {
            BranchSelection::Both => Branch::A,
            BranchSelection::Only(b) => b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub root_residual: f64,
    pub near_zero: f64,
    pub fit_window_fraction: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub svg_dispersion: Option<PathBuf>,
    pub svg_boundedness: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Outputs {
    fn all(&self) -> [&Option<PathBuf>; 5] {
        [
            &self.csv,
            &self.json,
            &self.svg_dispersion,
            &self.svg_boundedness,
            &self.report,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub k_grid: KGrid,
    pub normalization: NormalizationRule,
    pub branch: BranchSelection,
    pub tolerances: Tolerances,
    pub outputs: Outputs,
    pub seed: u64,
    pub threads: Option<usize>,
    /// SHA-256 of the configuration text, hex encoded.
    pub config_hash: String,
}

impl RunConfig {
    /// Audit settings; the grid must stay clear of `k = 0`.
    pub fn audit_config(&self) -> Result<AuditConfig, ConfigError> {
        Ok(AuditConfig {
            k_grid: self.k_grid.require_positive()?,
            tol_root_residual: self.tolerances.root_residual,
            tol_near_zero: self.tolerances.near_zero,
            fit_window_fraction: self.tolerances.fit_window_fraction,
            seed: self.seed,
            ..AuditConfig::default()
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

struct Entry {
    line: usize,
    value: String,
}

struct Entries(BTreeMap<&'static str, Entry>);

impl Entries {
    fn raw(&self, key: &'static str) -> Option<&Entry> {
        self.0.get(key)
    }

    fn parse<T: std::str::FromStr>(&self, key: &'static str, default: T) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(e) => e.value.parse().map_err(|err| ConfigError::Parse {
                line: e.line,
                message: format!("`{key}`: cannot parse `{}`: {err}", e.value),
            }),
        }
    }

    fn path(&self, key: &'static str) -> Option<PathBuf> {
        self.raw(key).map(|e| PathBuf::from(&e.value))
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut map: BTreeMap<&'static str, Entry> = BTreeMap::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Parse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(ConfigError::Parse {
                line,
                message: format!("unknown key `{key}`"),
            });
        };
        if value.is_empty() {
            return Err(ConfigError::Parse {
                line,
                message: format!("`{key}` has no value"),
            });
        }
        if let Some(first) = map.get(known) {
            return Err(ConfigError::Parse {
                line,
                message: format!("duplicate key `{key}` (first set on line {})", first.line),
            });
        }
        map.insert(
            known,
            Entry {
                line,
                value: value.to_string(),
            },
        );
    }
    let e = Entries(map);

    let d = ParamsCandidate::DEFAULT;
    let params = ParamsCandidate {
        mu_l: e.parse("mu_L", d.mu_l)?,
        mu: e.parse("mu", d.mu)?,
        mu_r: e.parse("mu_R", d.mu_r)?,
        u: e.parse("U", d.u)?,
        t_a: e.parse("T_a", d.t_a)?,
        t_b: e.parse("T_b", d.t_b)?,
        a: e.parse("a", d.a)?,
        b: e.parse("b", d.b)?,
    }
    .validate()?;

    let standard = KGrid::standard();
    let spacing = match e.raw("k_spacing") {
        None => standard.spacing(),
        Some(entry) => match entry.value.as_str() {
            "linear" => Spacing::Linear,
            "log" => Spacing::Log,
            other => {
                return Err(ConfigError::Parse {
                    line: entry.line,
                    message: format!("`k_spacing` must be `linear` or `log`, got `{other}`"),
                })
            }
        },
    };
    let k_grid = KGrid::new(
        e.parse("k_min", standard.min())?,
        e.parse("k_max", standard.max())?,
        e.parse("k_count", standard.count())?,
        spacing,
    )?;

    let kind = e
        .raw("normalization")
        .ok_or(ConfigError::Missing("normalization"))?;
    let param = e.raw("normalization_param");
    let param_value = |default: Option<f64>| -> Result<f64, ConfigError> {
        match (param, default) {
            (Some(_), _) => e.parse("normalization_param", 0.0),
            (None, Some(v)) => Ok(v),
            (None, None) => Err(ConfigError::Missing("normalization_param")),
        }
    };
    let normalization = match kind.value.as_str() {
        "constant" => NormalizationRule::Constant(param_value(Some(1.0))?),
        "polynomial" => NormalizationRule::Polynomial(param_value(None)?),
        "exp_neg_ka" => {
            if let Some(p) = param {
                return Err(ConfigError::Parse {
                    line: p.line,
                    message: "`exp_neg_ka` takes no `normalization_param`".into(),
                });
            }
            NormalizationRule::ExpNegKa
        }
        other => return Err(ConfigError::Parse {
            line: kind.line,
            message: format!(
                "`normalization` must be `constant`, `polynomial` or `exp_neg_ka`, got `{other}`"
            ),
        }),
    }
    .validate()?;

    let branch = match e.raw("branch") {
        None => BranchSelection::Both,
        Some(entry) => match entry.value.as_str() {
            "both" => BranchSelection::Both,
            "A" => BranchSelection::Only(Branch::A),
            "B" => BranchSelection::Only(Branch::B),
            other => {
                return Err(ConfigError::Parse {
                    line: entry.line,
                    message: format!("`branch` must be `both`, `A` or `B`, got `{other}`"),
                })
            }
        },
    };

    let tolerances = Tolerances {
        root_residual: e.parse("tol_root_residual", ROOT_RESIDUAL_TOL)?,
        near_zero: e.parse("tol_near_zero", 1e-8)?,
        fit_window_fraction: e.parse("fit_window_fraction", 0.5)?,
    };

    let outputs = Outputs {
        csv: e.path("csv"),
        json: e.path("json"),
        svg_dispersion: e.path("svg_dispersion"),
        svg_boundedness: e.path("svg_boundedness"),
        report: e.path("report"),
    };
    let mut seen: Vec<&PathBuf> = Vec::new();
    for path in outputs.all().into_iter().flatten() {
        if seen.contains(&path) {
            return Err(ConfigError::DuplicatePath(path.display().to_string()));
        }
        seen.push(path);
    }

    let threads = match e.raw("threads") {
        None => None,
        Some(entry) => {
            let n: usize = e.parse("threads", 0)?;
            if n == 0 {
                return Err(ConfigError::Parse {
                    line: entry.line,
                    message: "`threads` must be at least 1".into(),
                });
            }
            Some(n)
        }
    };

    Ok(RunConfig {
        params,
        k_grid,
        normalization,
        branch,
        tolerances,
        outputs,
        seed: e.parse("seed", 0)?,
        threads,
        config_hash: sha256_hex(text.as_bytes()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
# default instance
mu_L = 1
mu = 2
mu_R = 3
U = 1
T_a = 1
T_b = 1
a = -2
b = -1
k_min = 0.1
k_max = 50
k_count = 200
k_spacing = log
normalization = constant
";

    #[test]
    fn minimal_config_is_accepted() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.params.candidate(), ParamsCandidate::DEFAULT);
        assert_eq!(c.k_grid, KGrid::standard());
        assert_eq!(c.normalization, NormalizationRule::Constant(1.0));
        assert_eq!(c.branch, BranchSelection::Both);
        assert_eq!(c.config_hash.len(), 64);
    }

    #[test]
    fn ordering_violation_is_a_validation_error() {
        let text = "mu = 0.5\nnormalization = constant\n";
        assert!(matches!(
            parse_config(text),
            Err(ConfigError::Validation(_))
        ));
    }

    #[test]
    fn duplicate_and_unknown_keys_report_lines() {
        let dup = "normalization = constant\nmu = 2\nmu = 2\n";
        assert!(matches!(
            parse_config(dup),
            Err(ConfigError::Parse { line: 3, .. })
        ));
        let unknown = "normalization = constant\n\nMU = 2\n";
        assert!(matches!(
            parse_config(unknown),
            Err(ConfigError::Parse { line: 3, .. })
        ));
        let junk = "normalization = constant\nmu 2\n";
        assert!(matches!(
            parse_config(junk),
            Err(ConfigError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn normalization_rules() {
        assert_eq!(
            parse_config("mu = 2\n"),
            Err(ConfigError::Missing("normalization"))
        );
        let poly =
            parse_config("normalization = polynomial\nnormalization_param = 2 # k^2\n").unwrap();
        assert_eq!(poly.normalization, NormalizationRule::Polynomial(2.0));
        assert_eq!(
            parse_config("normalization = polynomial\n"),
            Err(ConfigError::Missing("normalization_param"))
        );
        assert!(parse_config("normalization = exp_neg_ka\nnormalization_param = 1\n").is_err());
        assert!(parse_config("normalization = constant\nnormalization_param = 0\n").is_err());
    }

    #[test]
    fn paths_must_be_distinct() {
        let text = "normalization = constant\ncsv = out.txt\njson = out.txt\n";
        assert!(matches!(
            parse_config(text),
            Err(ConfigError::DuplicatePath(_))
        ));
    }

    #[test]
    fn audit_needs_positive_grid() {
        let text = "normalization = constant\nk_min = 0\nk_spacing = linear\n";
        let c = parse_config(text).unwrap();
        assert!(c.audit_config().is_err());
    }

    #[test]
    fn hash_tracks_text() {
        let a = parse_config(MINIMAL).unwrap();
        let b = parse_config(&format!("{MINIMAL}\n# comment\n")).unwrap();
        assert_ne!(a.config_hash, b.config_hash);
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
