//! Numerical verdicts on the large-wavenumber claims: coefficient limits and
//! non-vanishing, asymptotic growth rates, and boundedness of `f(a, k)`.
//!
//! Every check produces a [`ClaimReport`]. Failures of the underlying
//! computation become report statuses rather than errors, so one bad check
//! never hides the others.

mod boundedness;
mod claims;
mod fit;
mod oracle;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{Branch, DispersionError};
use crate::eigenfunction::EigenError;
use crate::grid::{GridError, KGrid};
use crate::model::{ParamError, ParamsCandidate, PhysicalParams};

pub use boundedness::{
    classify_boundedness, classify_boundedness_window, BoundednessVerdict, Classification,
    Geometry, BOUNDEDNESS_MIN_POINTS,
};
pub use claims::{
    asymptotic_growth_rates, coefficient_limits, cutoff_check, degeneracy_at_zero,
    nonvanishing_scan, oracle_check, residual_check, vanishing_rate_check,
};
pub use fit::{fit_line, LineFit};
pub use oracle::bisection_roots;

pub use boundedness::{
    b_side_extension, boundedness_case, boundedness_grid, theory_rate, verify_width_growth,
    width_growth_report, BoundednessCase,
};

/// Version of the JSON report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuditError {
    #[error("{branch} branch unavailable at k={k}: roots complex or unlabelled")]
    BranchUnavailable { branch: Branch, k: f64 },
    #[error("grid too small: need {needed} points, got {got}")]
    GridTooSmall { needed: usize, got: usize },
    #[error("grid starts at k={k}, not past the cutoff {cutoff}")]
    BeforeCutoff { k: f64, cutoff: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("configuration: {0}")]
    Config(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimStatus {
    Confirmed,
    Violated,
    Inconclusive,
}

/// One scalar summary in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Evidence {
    Flag(bool),
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridVariable {
    /// Abscissae are wavenumbers.
    Wavenumber,
    /// Abscissae are layer widths `b - a` at the fixed wavenumber in `fixed_k`.
    LayerWidth,
}

/// Everything needed to rerun a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub params: ParamsCandidate,
    pub grid_variable: GridVariable,
    pub grid: Vec<f64>,
    pub fixed_k: Option<f64>,
}

impl Provenance {
    pub fn wavenumbers(params: &PhysicalParams, ks: &[f64]) -> Self {
        Provenance {
            params: params.candidate(),
            grid_variable: GridVariable::Wavenumber,
            grid: ks.to_vec(),
            fixed_k: None,
        }
    }

    pub fn layer_widths(params: &PhysicalParams, k: f64, widths: &[f64]) -> Self {
        Provenance {
            params: params.candidate(),
            grid_variable: GridVariable::LayerWidth,
            grid: widths.to_vec(),
            fixed_k: Some(k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub claim_id: String,
    pub status: ClaimStatus,
    pub evidence: BTreeMap<String, Evidence>,
    pub narrative: String,
    pub provenance: Provenance,
}

impl ClaimReport {
    /// Starts an inconclusive report with no evidence.
    pub fn new(claim_id: &str, provenance: Provenance) -> Self {
        ClaimReport {
            claim_id: claim_id.to_string(),
            status: ClaimStatus::Inconclusive,
            evidence: BTreeMap::new(),
            narrative: String::new(),
            provenance,
        }
    }

    pub fn num(mut self, key: &str, value: f64) -> Self {
        self.evidence
            .insert(key.to_string(), Evidence::Number(value));
        self
    }

    pub fn flag(mut self, key: &str, value: bool) -> Self {
        self.evidence.insert(key.to_string(), Evidence::Flag(value));
        self
    }

    pub fn text(mut self, key: &str, value: impl Into<String>) -> Self {
        self.evidence
            .insert(key.to_string(), Evidence::Text(value.into()));
        self
    }

    pub fn finish(mut self, status: ClaimStatus, narrative: impl Into<String>) -> Self {
        self.status = status;
        self.narrative = narrative.into();
        self
    }

    pub(crate) fn inconclusive(self, narrative: impl Into<String>) -> Self {
        self.finish(ClaimStatus::Inconclusive, narrative)
    }

    pub(crate) fn on_error(self, err: &AuditError) -> Self {
        let status = match err {
            // the computation itself broke a documented invariant
            AuditError::Dispersion(DispersionError::SolverFailure { .. }) => ClaimStatus::Violated,
            _ => ClaimStatus::Inconclusive,
        };
        self.text("error", err.to_string())
            .finish(status, format!("check could not run: {err}"))
    }
}

/// The full report document written by the `audit` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditDocument {
    pub schema_version: u32,
    pub reports: Vec<ClaimReport>,
    /// Checks that go beyond the published claims; never counted as claims.
    pub extensions: Vec<ClaimReport>,
}

impl AuditDocument {
    pub fn new(reports: Vec<ClaimReport>, extensions: Vec<ClaimReport>) -> Self {
        AuditDocument {
            schema_version: REPORT_SCHEMA_VERSION,
            reports,
            extensions,
        }
    }

    pub fn any_violated(&self) -> bool {
        self.reports
            .iter()
            .any(|r| r.status == ClaimStatus::Violated)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialise")
    }
}

/// Knobs for [`full_audit`]. A tolerance that is zero, negative or non-finite
/// turns the checks that use it inconclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub k_grid: KGrid,
    pub tol_root_residual: f64,
    /// Relative to `mu`.
    pub tol_near_zero: f64,
    /// Upper fraction of the grid used for boundedness fits.
    pub fit_window_fraction: f64,
    pub oracle_samples: usize,
    pub seed: u64,
    pub width_growth_k: f64,
    pub width_growth_deltas: Vec<f64>,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            k_grid: KGrid::standard(),
            tol_root_residual: crate::dispersion::ROOT_RESIDUAL_TOL,
            tol_near_zero: 1e-8,
            fit_window_fraction: 0.5,
            oracle_samples: 16,
            seed: 0,
            width_growth_k: 10.0,
            width_growth_deltas: vec![1.0, 2.0, 4.0, 8.0],
        }
    }
}

pub(crate) fn usable_tolerance(t: f64) -> bool {
    t.is_finite() && t > 0.0
}

pub(crate) fn usable_fraction(f: f64) -> bool {
    f.is_finite() && f > 0.0 && f <= 1.0
}

type Check<'a> = Box<dyn Fn() -> Vec<ClaimReport> + Send + Sync + 'a>;

/// Runs every claim check in a fixed order: `k = 0` degeneracy, cutoff
/// handling, root residuals, sampled oracle equivalence, the vanishing
/// coefficient rate, coefficient limits, asymptotic growth rates, the
/// non-vanishing scan on both branches, the three boundedness cases and the
/// growth in layer width.
///
/// Only a malformed grid is an error; everything else is a report status.
pub fn full_audit(
    params: &PhysicalParams,
    config: &AuditConfig,
) -> Result<Vec<ClaimReport>, AuditError> {
    let grid = config.k_grid.require_positive()?;
    let ks = grid.points();
    let tracked = crate::dispersion::track_branches(params, &ks).map_err(AuditError::from);

    let checks: Vec<Check> = vec![
        Box::new(|| vec![degeneracy_at_zero(params)]),
        Box::new(|| vec![cutoff_check(params, config.tol_root_residual)]),
        Box::new(|| {
            vec![residual_check(
                params,
                &ks,
                &tracked,
                config.tol_root_residual,
            )]
        }),
        Box::new(|| {
            vec![oracle_check(
                params,
                &ks,
                config.oracle_samples,
                config.seed,
                config.tol_root_residual,
            )]
        }),
        Box::new(|| vec![vanishing_rate_check(params, &ks, &tracked)]),
        Box::new(|| vec![coefficient_limits(params, &ks, &tracked)]),
        Box::new(|| vec![asymptotic_growth_rates(params, &ks, &tracked)]),
        Box::new(|| {
            [Branch::A, Branch::B]
                .into_iter()
                .map(|branch| {
                    nonvanishing_scan(params, branch, &ks, &tracked, config.tol_near_zero)
                })
                .collect()
        }),
        Box::new(|| {
            BoundednessCase::ALL
                .into_iter()
                .map(|case| boundedness_case(params, case, config.fit_window_fraction))
                .collect()
        }),
        Box::new(|| {
            vec![width_growth_report(
                params,
                config.width_growth_k,
                &config.width_growth_deltas,
            )]
        }),
    ];
    Ok(checks.par_iter().flat_map_iter(|check| check()).collect())
}

/// Reports that extend the published analysis; kept apart from [`full_audit`].
pub fn extension_audit(params: &PhysicalParams, config: &AuditConfig) -> Vec<ClaimReport> {
    vec![b_side_extension(params, config.fit_window_fraction)]
}

/// The boundedness cases and the layer-width growth at the built-in parameter set.
pub fn reference_checks() -> Vec<ClaimReport> {
    let params = ParamsCandidate::DEFAULT
        .validate()
        .expect("defaults are valid");
    let config = AuditConfig::default();
    let mut reports: Vec<ClaimReport> = BoundednessCase::ALL
        .into_iter()
        .map(|case| boundedness_case(&params, case, config.fit_window_fraction))
        .collect();
    reports.push(width_growth_report(
        &params,
        config.width_growth_k,
        &config.width_growth_deltas,
    ));
    reports
}
