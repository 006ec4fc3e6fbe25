//! Problem parameters and the closed-form interface coefficients.
//!
//! Viscosities are mobility-scaled (already divided by the permeability) and
//! are used as opaque positive numbers. Every quantity of the form `e^{kx}`
//! leaves this module as a [`LogScaled`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logscale::LogScaled;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("viscosities must satisfy mu_L < mu < mu_R (got {mu_l}, {mu}, {mu_r})")]
    ViscosityOrder { mu_l: f64, mu: f64, mu_r: f64 },
    #[error("interfaces must satisfy a < b <= 0 (got a = {a}, b = {b})")]
    Geometry { a: f64, b: f64 },
    #[error("{name} must be positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be finite (got {value})")]
    NonFinite { name: &'static str, value: f64 },
    #[error("wavenumber must be finite and non-negative (got {0})")]
    Wavenumber(f64),
}

/// Unvalidated parameter set, as read from a configuration or built in code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsCandidate {
    pub mu_l: f64,
    pub mu: f64,
    pub mu_r: f64,
    pub u: f64,
    pub t_a: f64,
    pub t_b: f64,
    pub a: f64,
    pub b: f64,
}

impl ParamsCandidate {
    /// Viscosities (1, 2, 3), unit speed and tensions, layer on (-2, -1).
    pub const DEFAULT: ParamsCandidate = ParamsCandidate {
        mu_l: 1.0,
        mu: 2.0,
        mu_r: 3.0,
        u: 1.0,
        t_a: 1.0,
        t_b: 1.0,
        a: -2.0,
        b: -1.0,
    };

    pub fn validate(self) -> Result<PhysicalParams, ParamError> {
        validate_params(self)
    }
}

impl Default for ParamsCandidate {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// A validated three-layer problem instance.
///
/// Invariants: `mu_L < mu < mu_R`, all viscosities, `U`, `T_a`, `T_b`
/// positive, and `a < b <= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalParams(ParamsCandidate);

pub fn validate_params(raw: ParamsCandidate) -> Result<PhysicalParams, ParamError> {
    let fields = [
        ("mu_L", raw.mu_l),
        ("mu", raw.mu),
        ("mu_R", raw.mu_r),
        ("U", raw.u),
        ("T_a", raw.t_a),
        ("T_b", raw.t_b),
        ("a", raw.a),
        ("b", raw.b),
    ];
    for (name, value) in fields {
        if !value.is_finite() {
            return Err(ParamError::NonFinite { name, value });
        }
    }
    for (name, value) in &fields[..6] {
        if *value <= 0.0 {
            return Err(ParamError::NonPositive {
                name,
                value: *value,
            });
        }
    }
    if !(raw.mu_l < raw.mu && raw.mu < raw.mu_r) {
        return Err(ParamError::ViscosityOrder {
            mu_l: raw.mu_l,
            mu: raw.mu,
            mu_r: raw.mu_r,
        });
    }
    if !(raw.a < raw.b && raw.b <= 0.0) {
        return Err(ParamError::Geometry { a: raw.a, b: raw.b });
    }
    Ok(PhysicalParams(raw))
}

impl PhysicalParams {
    pub fn mu_l(&self) -> f64 {
        self.0.mu_l
    }
    pub fn mu(&self) -> f64 {
        self.0.mu
    }
    pub fn mu_r(&self) -> f64 {
        self.0.mu_r
    }
    pub fn u(&self) -> f64 {
        self.0.u
    }
    pub fn t_a(&self) -> f64 {
        self.0.t_a
    }
    pub fn t_b(&self) -> f64 {
        self.0.t_b
    }
    pub fn a(&self) -> f64 {
        self.0.a
    }
    pub fn b(&self) -> f64 {
        self.0.b
    }

    pub fn candidate(&self) -> ParamsCandidate {
        self.0
    }

    /// Same fluids, different layer position.
    pub fn with_geometry(&self, a: f64, b: f64) -> Result<PhysicalParams, ParamError> {
        ParamsCandidate { a, b, ..self.0 }.validate()
    }

    pub fn width(&self) -> f64 {
        self.0.b - self.0.a
    }
}

/// A non-negative wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct WaveSample(f64);

impl WaveSample {
    pub fn new(k: f64) -> Result<Self, ParamError> {
        if k.is_finite() && k >= 0.0 {
            Ok(WaveSample(k))
        } else {
            Err(ParamError::Wavenumber(k))
        }
    }

    pub fn k(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// Interface at `x = a`.
    Left,
    /// Interface at `x = b`.
    Right,
}

/// `E_a(k) = ((mu - mu_L) U k - T_a k^3) / mu` for the left interface,
/// `E_b(k) = ((mu_R - mu) U k - T_b k^3) / mu` for the right one.
pub fn eval_e(params: &PhysicalParams, k: f64, side: Side) -> f64 {
    let (jump, tension) = match side {
        Side::Left => (params.mu() - params.mu_l(), params.t_a()),
        Side::Right => (params.mu_r() - params.mu(), params.t_b()),
    };
    (jump * params.u() * k - tension * k * k * k) / params.mu()
}

/// Bound on the rounding error of [`eval_e`]: a few ulps of the larger of
/// its two terms. Near a cutoff `|E|` at or below this is indistinguishable
/// from zero.
pub fn e_rounding_bound(params: &PhysicalParams, k: f64, side: Side) -> f64 {
    let (jump, tension) = match side {
        Side::Left => (params.mu() - params.mu_l(), params.t_a()),
        Side::Right => (params.mu_r() - params.mu(), params.t_b()),
    };
    8.0 * f64::EPSILON * (jump * params.u() * k).max(tension * k * k * k) / params.mu()
}

/// The four interface coefficients at one `(k, s)` point, `s = 1/sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientQuad {
    pub c: Complex64,
    pub d: Complex64,
    pub g: Complex64,
    pub h: Complex64,
}

impl CoefficientQuad {
    pub fn as_array(&self) -> [Complex64; 4] {
        [self.c, self.d, self.g, self.h]
    }
}

/// c = mu_L - mu - E_a s, d = mu_L + mu - E_a s,
/// g = mu_R + mu - E_b s, h = mu_R - mu - E_b s.
///
/// `s = 0` gives the infinite-growth-rate limit.
pub fn eval_coeffs(params: &PhysicalParams, k: f64, s: Complex64) -> CoefficientQuad {
    let ea_s = s * eval_e(params, k, Side::Left);
    let eb_s = s * eval_e(params, k, Side::Right);
    let (mu_l, mu, mu_r) = (params.mu_l(), params.mu(), params.mu_r());
    CoefficientQuad {
        c: (mu_l - mu) - ea_s,
        d: (mu_l + mu) - ea_s,
        g: (mu_r + mu) - eb_s,
        h: (mu_r - mu) - eb_s,
    }
}

/// `lambda = e^{2k(a-b)}`, the coupling between the two interfaces.
pub fn lambda_factor(params: &PhysicalParams, k: f64) -> LogScaled {
    LogScaled::exp(2.0 * k * (params.a() - params.b()))
}
