use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::config::RunConfig;
use crate::dispersion::{
    assign_branches, solve_level, Branch, Coefficient, DispersionError, GrowthRoot, RootLevel,
};
use crate::eigenfunction::{amplitude_pair, eval_f, NormalizationRule};
use crate::grid::KGrid;
use crate::model::{lambda_factor, ParamsCandidate, PhysicalParams};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("at k={k}: {source}")]
    Dispersion {
        k: f64,
        #[source]
        source: DispersionError,
    },
    #[error("branch labelling failed: {0}")]
    Branches(DispersionError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Values for one branch at one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchCells {
    pub sigma_re: f64,
    pub sigma_im: f64,
    pub s_re: f64,
    pub s_im: f64,
    pub c: f64,
    pub d: f64,
    pub g: f64,
    pub h: f64,
    /// `log|A e^{ka}|`, `log|B e^{-ka}|`, `log|f(a, k)|`; `None` where the
    /// branch is not selected or the amplitudes are undefined.
    pub log_a_term: Option<f64>,
    pub log_b_term: Option<f64>,
    pub log_f_a: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: f64,
    pub a_side: Option<BranchCells>,
    pub b_side: Option<BranchCells>,
    /// `2k(a - b)`, the exponent of `lambda`.
    pub log_lambda: f64,
    /// Some root at this `k` came from the collapsed linear equation.
    pub degenerate: bool,
    pub no_eigenvalue: bool,
    /// Roots without a branch label (complex pairs).
    pub unlabelled_roots: usize,
}

impl SweepRow {
    pub fn branch(&self, branch: Branch) -> Option<&BranchCells> {
        match branch {
            Branch::A => self.a_side.as_ref(),
            Branch::B => self.b_side.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub config_hash: String,
    pub params: ParamsCandidate,
    pub k_grid: KGrid,
    pub normalization: NormalizationRule,
    pub rows: Vec<SweepRow>,
}

fn cells(
    params: &PhysicalParams,
    root: &GrowthRoot,
    rule: Option<NormalizationRule>,
) -> BranchCells {
    let point = root.point();
    // real parts: labelled roots are real
    let coef = |w: Coefficient| point.coefficient(w).to_complex().re;
    let logs = rule
        .filter(|_| root.is_real())
        .and_then(|rule| amplitude_pair(params, point, rule).ok())
        .map(|pair| {
            (
                pair.growing_term(params.a()).log_abs(),
                pair.decaying_term(params.a()).log_abs(),
                eval_f(params, &pair, params.a()).log_abs(),
            )
        });
    let finite = |x: f64| Some(x).filter(|v| v.is_finite());
    BranchCells {
        sigma_re: root.sigma().re,
        sigma_im: root.sigma().im,
        s_re: root.s().re,
        s_im: root.s().im,
        c: coef(Coefficient::C),
        d: coef(Coefficient::D),
        g: coef(Coefficient::G),
        h: coef(Coefficient::H),
        log_a_term: logs.and_then(|l| finite(l.0)),
        log_b_term: logs.and_then(|l| finite(l.1)),
        log_f_a: logs.and_then(|l| finite(l.2)),
    }
}

fn row(params: &PhysicalParams, level: &RootLevel, config: &RunConfig) -> SweepRow {
    let side = |branch: Branch| {
        level.on_branch(branch).map(|root| {
            let rule = config
                .branch
                .includes(branch)
                .then_some(config.normalization);
            cells(params, root, rule)
        })
    };
    SweepRow {
        k: level.k,
        a_side: side(Branch::A),
        b_side: side(Branch::B),
        log_lambda: lambda_factor(params, level.k).log_mag(),
        degenerate: level.roots.iter().any(|r| r.degenerate()),
        no_eigenvalue: level.roots.is_empty(),
        unlabelled_roots: level.roots.iter().filter(|r| r.branch().is_none()).count(),
    }
}

fn sweep_in_pool(config: &RunConfig) -> Result<SweepResult, SweepError> {
    let params = &config.params;
    let ks = config.k_grid.points();
    let levels = ks
        .par_iter()
        .map(|&k| solve_level(params, k).map_err(|source| SweepError::Dispersion { k, source }))
        .collect::<Result<Vec<_>, _>>()?;
    let levels = assign_branches(params, levels).map_err(SweepError::Branches)?;
    let rows = levels
        .par_iter()
        .map(|level| row(params, level, config))
        .collect();
    Ok(SweepResult {
        config_hash: config.config_hash.clone(),
        params: params.candidate(),
        k_grid: config.k_grid,
        normalization: config.normalization,
        rows,
    })
}

/// Roots, branch labels and eigenfunction values at every grid point. Work
/// per wavenumber runs in parallel; rows come out in grid order and do not
/// depend on the thread count.
pub fn run_sweep(config: &RunConfig) -> Result<SweepResult, SweepError> {
    match config.threads {
        None => sweep_in_pool(config),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SweepError::ThreadPool(e.to_string()))?
            .install(|| sweep_in_pool(config)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::parse_config;

    #[test]
    fn default_sweep_shape() {
        let config = parse_config("normalization = constant\n").unwrap();
        let result = run_sweep(&config).unwrap();
        assert_eq!(result.rows.len(), 200);
        assert!(result.rows.windows(2).all(|w| w[0].k < w[1].k));
        for row in &result.rows {
            let (a, b) = (row.a_side.unwrap(), row.b_side.unwrap());
            assert!(a.log_f_a.is_some() && b.log_f_a.is_some(), "k = {}", row.k);
            assert_eq!(row.unlabelled_roots, 0);
        }
    }

    #[test]
    fn zero_wavenumber_row_is_empty() {
        let config = parse_config(
            "normalization = constant\nk_min = 0\nk_max = 2\nk_count = 5\nk_spacing = linear\n",
        )
        .unwrap();
        let result = run_sweep(&config).unwrap();
        let first = &result.rows[0];
        assert!(first.no_eigenvalue && first.a_side.is_none() && first.b_side.is_none());
        // k = 1 is the shared cutoff of the defaults
        assert!(result.rows[2].no_eigenvalue);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let one =
            parse_config("normalization = polynomial\nnormalization_param = 2\nthreads = 1\n")
                .unwrap();
        let four = RunConfig {
            threads: Some(4),
            ..one.clone()
        };
        assert_eq!(run_sweep(&one).unwrap(), run_sweep(&four).unwrap());
    }

    #[test]
    fn unselected_branch_has_no_eigenfunction() {
        let config = parse_config("normalization = constant\nbranch = A\n").unwrap();
        let result = run_sweep(&config).unwrap();
        let row = &result.rows[150];
        assert!(row.a_side.unwrap().log_f_a.is_some());
        assert!(row.b_side.unwrap().log_f_a.is_none());
    }
}
