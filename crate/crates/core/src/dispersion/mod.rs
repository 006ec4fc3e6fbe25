//! The determinant condition `lambda c h - g d = 0` as a quadratic in the
//! reciprocal growth rate `s = 1/sigma`, its two root branches, and their
//! large-wavenumber limits.
//!
//! Expanding the coefficients gives
//!
//! ```text
//! q2 = E_a E_b (lambda - 1)
//! q1 = -[lambda((mu_L - mu) E_b + (mu_R - mu) E_a) - ((mu_L + mu) E_b + (mu_R + mu) E_a)]
//! q0 = lambda (mu_L - mu)(mu_R - mu) - (mu_L + mu)(mu_R + mu)
//! ```
//!
//! `q0 < 0` for every `k` because `lambda` lies in `(0, 1]` and `mu_L < mu < mu_R`,
//! so `s = 0` is never a root and every growth rate is finite.

mod branches;
mod point;
mod quadratic;

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    e_rounding_bound, eval_e, lambda_factor, CoefficientQuad, PhysicalParams, Side,
};
use quadratic::{solve_real_quadratic, QuadRoots};

pub use branches::{assign_branches, chordal_distance, continuation_distance, RootLevel};
pub use point::{determinant_residual, Coefficient, SpectralPoint};

/// Relative determinant residual every returned root must meet.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-9;

/// Relative size of `q2` below which the quadratic is solved as linear.
pub const DEGENERACY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DispersionError {
    #[error("no eigenvalue at k={k}: the determinant reduces to the nonzero constant {q0}")]
    NoEigenvalue { k: f64, q0: f64 },
    #[error("root at k={k}, s={s} misses the residual bound: {residual:e} > {tolerance:e}")]
    SolverFailure {
        k: f64,
        s: Complex64,
        residual: f64,
        tolerance: f64,
    },
    #[error("cannot tell the branches apart at k={k}")]
    AmbiguousBranch { k: f64 },
    #[error("{branch} limit of {coefficient} vanishes")]
    DegenerateLimit {
        branch: Branch,
        coefficient: &'static str,
    },
    #[error("wavenumber grid must be finite, non-negative and strictly increasing")]
    UnorderedGrid,
    #[error("invalid wavenumber {0}")]
    InvalidWavenumber(f64),
}

/// The two root families, named by the coefficient that vanishes as `k` grows:
/// `d -> 0` on the A side, `g -> 0` on the B side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    A,
    B,
}

impl Branch {
    pub fn other(self) -> Branch {
        match self {
            Branch::A => Branch::B,
            Branch::B => Branch::A,
        }
    }

    /// The coefficient that tends to zero along this branch.
    pub fn vanishing(self) -> Coefficient {
        match self {
            Branch::A => Coefficient::D,
            Branch::B => Coefficient::G,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::A => write!(f, "A-side"),
            Branch::B => write!(f, "B-side"),
        }
    }
}

/// Coefficients of the determinant as a polynomial in `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticInS {
    pub q2: f64,
    pub q1: f64,
    pub q0: f64,
    /// `2k(a - b)`.
    pub log_lambda: f64,
    /// `lambda` fell below the smallest normal binary64 and was replaced by 0.
    pub lambda_clamped: bool,
    pub e_a: f64,
    pub e_b: f64,
}

pub fn quadratic_coeffs(params: &PhysicalParams, k: f64) -> QuadraticInS {
    let e_a = eval_e(params, k, Side::Left);
    let e_b = eval_e(params, k, Side::Right);
    let log_lambda = lambda_factor(params, k).log_mag();
    let lambda_clamped = log_lambda < f64::MIN_POSITIVE.ln();
    let (lambda, lambda_m1) = if lambda_clamped {
        (0.0, -1.0)
    } else {
        (log_lambda.exp(), log_lambda.exp_m1())
    };
    let (mu_l, mu, mu_r) = (params.mu_l(), params.mu(), params.mu_r());
    QuadraticInS {
        q2: e_a * e_b * lambda_m1,
        q1: -(lambda * ((mu_l - mu) * e_b + (mu_r - mu) * e_a)
            - ((mu_l + mu) * e_b + (mu_r + mu) * e_a)),
        q0: lambda * (mu_l - mu) * (mu_r - mu) - (mu_l + mu) * (mu_r + mu),
        log_lambda,
        lambda_clamped,
        e_a,
        e_b,
    }
}

/// One root of the determinant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRoot {
    point: SpectralPoint,
    branch: Option<Branch>,
    degenerate: bool,
    residual: f64,
}

impl GrowthRoot {
    pub fn k(&self) -> f64 {
        self.point.k()
    }

    pub fn sigma(&self) -> Complex64 {
        self.point.sigma()
    }

    pub fn s(&self) -> Complex64 {
        self.point.s()
    }

    /// `None` until [`assign_branches`] labels it, or where the label is lost.
    pub fn branch(&self) -> Option<Branch> {
        self.branch
    }

    pub fn with_branch(self, branch: Option<Branch>) -> Self {
        GrowthRoot { branch, ..self }
    }

    /// The quadratic collapsed to a linear equation at this `k`.
    pub fn degenerate(&self) -> bool {
        self.degenerate
    }

    /// Determinant residual measured with [`determinant_residual`].
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn point(&self) -> &SpectralPoint {
        &self.point
    }

    pub fn is_real(&self) -> bool {
        self.point.s().im == 0.0
    }
}

/// All roots of the determinant at `k`, sorted by descending `Re sigma` and,
/// for conjugate pairs, descending `Im sigma`.
///
/// Returns [`DispersionError::NoEigenvalue`] at `k = 0` and wherever both `E`
/// factors vanish together, since the determinant is then the constant `q0`.
pub fn solve_sigma(params: &PhysicalParams, k: f64) -> Result<Vec<GrowthRoot>, DispersionError> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(DispersionError::InvalidWavenumber(k));
    }
    let quad = quadratic_coeffs(params, k);
    let no_root = DispersionError::NoEigenvalue { k, q0: quad.q0 };
    if k == 0.0 {
        return Err(no_root);
    }

    let scale_s = (params.mu_l() + params.mu()) / quad.e_a.abs().max(f64::EPSILON);
    // at a cutoff the rounded E is noise, and the far root it produces is an
    // image of sigma = 0
    let e_a_zero = quad.e_a.abs() <= e_rounding_bound(params, k, Side::Left);
    let e_b_zero = quad.e_b.abs() <= e_rounding_bound(params, k, Side::Right);
    if e_a_zero && e_b_zero {
        return Err(no_root);
    }
    let degenerate = e_a_zero
        || e_b_zero
        || quad.q2.abs() < DEGENERACY_TOL * (quad.q1.abs() * scale_s).max(quad.q0.abs());
    let candidates = if degenerate {
        if quad.q1 == 0.0 {
            return Err(no_root);
        }
        vec![Complex64::new(-quad.q0 / quad.q1, 0.0)]
    } else {
        match solve_real_quadratic(quad.q2, quad.q1, quad.q0) {
            QuadRoots::Constant => return Err(no_root),
            QuadRoots::Linear(s) => vec![s],
            QuadRoots::Pair(s1, s2) => vec![s1, s2],
        }
    };

    let mut roots = Vec::with_capacity(candidates.len());
    for s0 in candidates {
        if !(s0.re.is_finite() && s0.im.is_finite()) {
            return Err(no_root);
        }
        let point = point::refine_root(params, k, s0);
        let residual = point.residual(params);
        if !(residual <= ROOT_RESIDUAL_TOL) {
            return Err(DispersionError::SolverFailure {
                k,
                s: point.s(),
                residual,
                tolerance: ROOT_RESIDUAL_TOL,
            });
        }
        roots.push(GrowthRoot {
            point,
            branch: None,
            degenerate,
            residual,
        });
    }
    roots.sort_by(|x, y| {
        let (sx, sy) = (x.sigma(), y.sigma());
        match sy.re.total_cmp(&sx.re) {
            Ordering::Equal => sy.im.total_cmp(&sx.im),
            other => other,
        }
    });
    Ok(roots)
}

/// Roots at each grid point, with [`DispersionError::NoEigenvalue`] recorded as
/// an empty level; other errors abort.
pub fn solve_level(params: &PhysicalParams, k: f64) -> Result<RootLevel, DispersionError> {
    match solve_sigma(params, k) {
        Ok(roots) => Ok(RootLevel { k, roots }),
        Err(DispersionError::NoEigenvalue { .. }) => Ok(RootLevel {
            k,
            roots: Vec::new(),
        }),
        Err(e) => Err(e),
    }
}

/// [`solve_level`] over an increasing grid followed by [`assign_branches`].
pub fn track_branches(
    params: &PhysicalParams,
    ks: &[f64],
) -> Result<Vec<RootLevel>, DispersionError> {
    let levels = ks
        .iter()
        .map(|&k| solve_level(params, k))
        .collect::<Result<Vec<_>, _>>()?;
    assign_branches(params, levels)
}

/// Large-`k` growth rates `(E_a/(mu_L + mu), E_b/(mu_R + mu))`, where `d` and
/// `g` respectively vanish.
pub fn asymptotic_sigma(params: &PhysicalParams, k: f64) -> (f64, f64) {
    (
        eval_e(params, k, Side::Left) / (params.mu_l() + params.mu()),
        eval_e(params, k, Side::Right) / (params.mu_r() + params.mu()),
    )
}

/// `ln(|sigma - sigma_asym| / |sigma|)` along `branch`.
///
/// Since `sigma - sigma_asym = sigma * d / (mu_L + mu)` on the A side (and the
/// same with `g`, `mu_R + mu` on the B side) this is read off the
/// full-precision vanishing coefficient, with no cancellation.
pub fn log_asymptote_error(params: &PhysicalParams, point: &SpectralPoint, branch: Branch) -> f64 {
    let scale = match branch {
        Branch::A => params.mu_l() + params.mu(),
        Branch::B => params.mu_r() + params.mu(),
    };
    point.coefficient(branch.vanishing()).log_abs() - scale.ln()
}

/// Limits of `(c, d, g, h)` as `k -> inf` along `branch`.
///
/// A side (`E_a s -> mu_L + mu`, hence `E_b s -> (T_b/T_a)(mu_L + mu)`):
/// `(-2 mu, 0, mu_R + mu - (T_b/T_a)(mu_L + mu), mu_R - mu - (T_b/T_a)(mu_L + mu))`.
///
/// B side, by the mirrored substitution `E_b s -> mu_R + mu`, hence
/// `E_a s -> (T_a/T_b)(mu_R + mu)`:
/// `(mu_L - mu - (T_a/T_b)(mu_R + mu), mu_L + mu - (T_a/T_b)(mu_R + mu), 0, -2 mu)`.
pub fn limit_coefficients(
    params: &PhysicalParams,
    branch: Branch,
) -> Result<CoefficientQuad, DispersionError> {
    let (mu_l, mu, mu_r) = (params.mu_l(), params.mu(), params.mu_r());
    let re = |x: f64| Complex64::new(x, 0.0);
    let (quad, nonzero) = match branch {
        Branch::A => {
            let cross = params.t_b() / params.t_a() * (mu_l + mu);
            let q = CoefficientQuad {
                c: re(-2.0 * mu),
                d: re(0.0),
                g: re(mu_r + mu - cross),
                h: re(mu_r - mu - cross),
            };
            (q, [Coefficient::C, Coefficient::G, Coefficient::H])
        }
        Branch::B => {
            let cross = params.t_a() / params.t_b() * (mu_r + mu);
            let q = CoefficientQuad {
                c: re(mu_l - mu - cross),
                d: re(mu_l + mu - cross),
                g: re(0.0),
                h: re(-2.0 * mu),
            };
            (q, [Coefficient::C, Coefficient::D, Coefficient::H])
        }
    };
    let tiny = 1e-12 * (mu_l + mu + mu_r);
    for which in nonzero {
        if which.pick(&quad).norm() <= tiny {
            return Err(DispersionError::DegenerateLimit {
                branch,
                coefficient: which.name(),
            });
        }
    }
    Ok(quad)
}

/// Positive zeros of `E_a` and `E_b`; surface tension stabilises every larger `k`
/// at that interface.
pub fn cutoff_wavenumbers(params: &PhysicalParams) -> (f64, f64) {
    (
        ((params.mu() - params.mu_l()) * params.u() / params.t_a()).sqrt(),
        ((params.mu_r() - params.mu()) * params.u() / params.t_b()).sqrt(),
    )
}
