//! Amplitude pairs `(A, B)` and the piecewise eigenfunction
//!
//! ```text
//! f(x) = f(a) e^{k(x-a)}            x <= a
//! f(x) = A e^{kx} + B e^{-kx}       a < x < b
//! f(x) = f(b) e^{-k(x-b)}           x >= b
//! ```
//!
//! `A` is fixed by an explicit [`NormalizationRule`]; `B` follows from the
//! right-interface row `A e^{kb} g + B e^{-kb} h = 0`, i.e. `B = Y A e^{2kb}`
//! with `Y = -g/h`. The left-interface row `A e^{ka} c + B e^{-ka} d = 0` is
//! kept as the independent check. All values are log-scaled.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{Coefficient, SpectralPoint, ROOT_RESIDUAL_TOL};
use crate::logscale::{relative_gap, LogComplex, LogScaled};
use crate::model::PhysicalParams;

/// Relative size under which an unscaled coefficient is treated as zero;
/// smaller values are indistinguishable from rounding of an O(mu) quantity.
const VANISHING_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    #[error("h vanishes at k={k}; Y = -g/h is undefined")]
    HVanishes { k: f64 },
    #[error("s={s} is not a root at k={k} (residual {residual:e})")]
    NotARoot { k: f64, s: Complex64, residual: f64 },
    #[error("coefficient {which} vanishes at k={k}")]
    CoefficientVanishes { k: f64, which: &'static str },
    #[error("wavenumber must be positive (got {0})")]
    InvalidWavenumber(f64),
    #[error("invalid normalization: {0}")]
    InvalidRule(String),
}

/// How `A(k)` is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameter", rename_all = "snake_case")]
pub enum NormalizationRule {
    /// `A = D`, `D != 0`.
    Constant(f64),
    /// `A = k^p`, `p >= 0`.
    Polynomial(f64),
    /// `A = e^{-ka}`, making `A e^{ka} = 1`.
    ExpNegKa,
}

impl NormalizationRule {
    pub fn validate(self) -> Result<Self, EigenError> {
        match self {
            NormalizationRule::Constant(d) if d == 0.0 || !d.is_finite() => {
                Err(EigenError::InvalidRule(format!(
                    "constant amplitude must be finite and nonzero, got {d}"
                )))
            }
            NormalizationRule::Polynomial(p) if !(p >= 0.0 && p.is_finite()) => {
                Err(EigenError::InvalidRule(format!(
                    "polynomial degree must be finite and >= 0, got {p}"
                )))
            }
            rule => Ok(rule),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            NormalizationRule::Constant(_) => "constant",
            NormalizationRule::Polynomial(_) => "polynomial",
            NormalizationRule::ExpNegKa => "exp_neg_ka",
        }
    }

    pub fn parameter(&self) -> Option<f64> {
        match *self {
            NormalizationRule::Constant(d) => Some(d),
            NormalizationRule::Polynomial(p) => Some(p),
            NormalizationRule::ExpNegKa => None,
        }
    }

    pub fn amplitude(&self, k: f64, a: f64) -> LogScaled {
        match *self {
            NormalizationRule::Constant(d) => LogScaled::from_f64(d),
            NormalizationRule::Polynomial(p) => LogScaled::from_f64(k).powf(p),
            NormalizationRule::ExpNegKa => LogScaled::exp(-k * a),
        }
    }
}

/// `(A, B)` for one root, plus the point it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudePair {
    a_amp: LogScaled,
    b_amp: LogComplex,
    normalization: NormalizationRule,
    point: SpectralPoint,
}

impl AmplitudePair {
    pub fn a(&self) -> LogScaled {
        self.a_amp
    }

    pub fn b(&self) -> LogComplex {
        self.b_amp
    }

    pub fn normalization(&self) -> NormalizationRule {
        self.normalization
    }

    pub fn k(&self) -> f64 {
        self.point.k()
    }

    pub fn s(&self) -> Complex64 {
        self.point.s()
    }

    pub fn point(&self) -> &SpectralPoint {
        &self.point
    }

    /// `A e^{kx}`.
    pub fn growing_term(&self, x: f64) -> LogComplex {
        LogComplex::from(self.a_amp).scale_exp(self.k() * x)
    }

    /// `B e^{-kx}`.
    pub fn decaying_term(&self, x: f64) -> LogComplex {
        self.b_amp.scale_exp(-self.k() * x)
    }
}

fn vanishes(params: &PhysicalParams, point: &SpectralPoint, which: Coefficient) -> bool {
    if point.scaled_coefficient() == Some(which) {
        return point.coefficient(which).is_zero();
    }
    which.pick(&point.coeffs()).norm() <= VANISHING_TOL * params.mu()
}

/// Builds `(A, B)` at a verified root.
pub fn amplitude_pair(
    params: &PhysicalParams,
    point: &SpectralPoint,
    rule: NormalizationRule,
) -> Result<AmplitudePair, EigenError> {
    let k = point.k();
    if !(k > 0.0 && k.is_finite()) {
        return Err(EigenError::InvalidWavenumber(k));
    }
    let rule = rule.validate()?;
    let not_a_root = |residual: f64| EigenError::NotARoot {
        k,
        s: point.s(),
        residual,
    };
    let residual = point.residual(params);
    if !(residual <= ROOT_RESIDUAL_TOL) {
        return Err(not_a_root(residual));
    }
    if vanishes(params, point, Coefficient::H) {
        return Err(EigenError::HVanishes { k });
    }
    let y = -point.coefficient(Coefficient::G) / point.coefficient(Coefficient::H);
    let a_amp = rule.amplitude(k, params.a());
    let b_amp = (y * LogComplex::from(a_amp)).scale_exp(2.0 * k * params.b());
    let pair = AmplitudePair {
        a_amp,
        b_amp,
        normalization: rule,
        point: *point,
    };
    let (left, right) = row_residuals(params, &pair);
    if !(left <= ROOT_RESIDUAL_TOL && right <= ROOT_RESIDUAL_TOL) {
        return Err(not_a_root(left.max(right)));
    }
    Ok(pair)
}

/// Relative residuals of `A e^{ka} c + B e^{-ka} d` and `A e^{kb} g + B e^{-kb} h`.
pub fn row_residuals(params: &PhysicalParams, pair: &AmplitudePair) -> (f64, f64) {
    let p = &pair.point;
    let (a, b) = (params.a(), params.b());
    let left = relative_gap(
        pair.growing_term(a) * p.coefficient(Coefficient::C),
        -(pair.decaying_term(a) * p.coefficient(Coefficient::D)),
    );
    let right = relative_gap(
        pair.growing_term(b) * p.coefficient(Coefficient::G),
        -(pair.decaying_term(b) * p.coefficient(Coefficient::H)),
    );
    (left, right)
}

/// `A e^{kx} + B e^{-kx}`, the interior formula, at any `x`.
pub fn eval_interior(pair: &AmplitudePair, x: f64) -> LogComplex {
    pair.growing_term(x) + pair.decaying_term(x)
}

/// The piecewise eigenfunction; continuous at `a` and `b` by construction.
pub fn eval_f(params: &PhysicalParams, pair: &AmplitudePair, x: f64) -> LogComplex {
    let (a, b, k) = (params.a(), params.b(), pair.k());
    if x <= a {
        eval_interior(pair, a).scale_exp(k * (x - a))
    } else if x >= b {
        eval_interior(pair, b).scale_exp(-k * (x - b))
    } else {
        eval_interior(pair, x)
    }
}

/// Relative discrepancy between the two ratios `B e^{-ka} / (A e^{ka})` implied
/// by the two rows: `-c/d` and `-(g/h) e^{2k(b-a)}`. Zero exactly at a root.
pub fn ratio_consistency(
    params: &PhysicalParams,
    point: &SpectralPoint,
) -> Result<f64, EigenError> {
    let k = point.k();
    if !(k > 0.0 && k.is_finite()) {
        return Err(EigenError::InvalidWavenumber(k));
    }
    for which in [Coefficient::D, Coefficient::H] {
        if vanishes(params, point, which) {
            return Err(EigenError::CoefficientVanishes {
                k,
                which: which.name(),
            });
        }
    }
    let from_left = -point.coefficient(Coefficient::C) / point.coefficient(Coefficient::D);
    let from_right = (-point.coefficient(Coefficient::G) / point.coefficient(Coefficient::H))
        .scale_exp(2.0 * k * params.width());
    Ok(relative_gap(from_left, from_right))
}

/// Residuals of the two interface conditions, written as jumps of the
/// viscosity-weighted derivative with the exterior derivatives
/// `f_x(a^-) = k f(a)` and `f_x(b^+) = -k f(b)`:
///
/// ```text
/// mu f_x(a^+) - mu_L f_x(a^-) = -k (E_a/sigma) f(a)
/// mu f_x(b^-) - mu_R f_x(b^+) =  k (E_b/sigma) f(b)
/// ```
///
/// Each residual is relative to the largest of the three terms.
pub fn lateral_derivative_residuals(params: &PhysicalParams, pair: &AmplitudePair) -> (f64, f64) {
    let k = pair.k();
    let (a, b) = (params.a(), params.b());
    let p = &pair.point;
    let scaled = |z: LogComplex, factor: Complex64| z * LogComplex::from(factor);
    let real = |x: f64| Complex64::new(x, 0.0);

    let residual = |x: f64, inner_visc: f64, outer_visc: f64, e_s: Complex64, outward: f64| {
        // outward = +1 at a (exterior on the left), -1 at b
        let grow = pair.growing_term(x);
        let decay = pair.decaying_term(x);
        let f = grow + decay;
        let inner = (grow - decay).scale_exp(k.ln());
        let outer = scaled(f, real(outward * k));
        let lhs_inner = scaled(inner, real(inner_visc));
        let lhs_outer = scaled(outer, real(outer_visc));
        let rhs = scaled(f, -e_s * (outward * k));
        let scale = lhs_inner
            .log_abs()
            .max(lhs_outer.log_abs())
            .max(rhs.log_abs());
        if scale == f64::NEG_INFINITY {
            return 0.0;
        }
        ((lhs_inner - lhs_outer - rhs).log_abs() - scale).exp()
    };
    // at b the interior derivative comes from the left: mu f_x(b^-) - mu_R (-k f(b)) = k E_b s f(b)
    let res_a = residual(a, params.mu(), params.mu_l(), p.e_a_s(), 1.0);
    let res_b = residual(b, params.mu(), params.mu_r(), p.e_b_s(), -1.0);
    (res_a, res_b)
}
