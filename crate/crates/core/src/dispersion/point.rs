use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::quadratic::{solve_real_quadratic, QuadRoots};
use crate::logscale::LogComplex;
use crate::model::{eval_coeffs, eval_e, lambda_factor, CoefficientQuad, PhysicalParams, Side};

/// Names one of the four interface coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Coefficient {
    C,
    D,
    G,
    H,
}

impl Coefficient {
    pub const ALL: [Coefficient; 4] = [
        Coefficient::C,
        Coefficient::D,
        Coefficient::G,
        Coefficient::H,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Coefficient::C => "c",
            Coefficient::D => "d",
            Coefficient::G => "g",
            Coefficient::H => "h",
        }
    }

    pub fn pick(self, q: &CoefficientQuad) -> Complex64 {
        match self {
            Coefficient::C => q.c,
            Coefficient::D => q.d,
            Coefficient::G => q.g,
            Coefficient::H => q.h,
        }
    }
}

/// Pivot coefficients whose magnitude is smaller than this fraction of
/// their natural scale are re-solved in scaled form.
const PIVOT_THRESHOLD: f64 = 0.5;

/// A point `(k, s)` with its interface coefficients.
///
/// On a growth-rate branch one of `d` or `g` decays like `e^{2k(a-b)}`; computing
/// it as `(mu_L + mu) - E_a s` would cancel every significant digit. Points
/// produced by the root solver therefore keep that coefficient as a mantissa
/// times `lambda = e^{2k(a-b)}`, accurate even after `lambda` underflows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPoint {
    k: f64,
    s: Complex64,
    log_lambda: f64,
    e_a: f64,
    e_b: f64,
    coeffs: CoefficientQuad,
    /// `(which, mantissa)`: the coefficient equals `mantissa * lambda`.
    scaled: Option<(Coefficient, Complex64)>,
}

impl SpectralPoint {
    /// Plain evaluation at an arbitrary `s`.
    pub fn new(params: &PhysicalParams, k: f64, s: Complex64) -> Self {
        SpectralPoint {
            k,
            s,
            log_lambda: lambda_factor(params, k).log_mag(),
            e_a: eval_e(params, k, Side::Left),
            e_b: eval_e(params, k, Side::Right),
            coeffs: eval_coeffs(params, k, s),
            scaled: None,
        }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Reciprocal growth rate.
    pub fn s(&self) -> Complex64 {
        self.s
    }

    pub fn sigma(&self) -> Complex64 {
        if self.s == Complex64::new(0.0, 0.0) {
            Complex64::new(f64::INFINITY, 0.0)
        } else {
            self.s.inv()
        }
    }

    pub fn log_lambda(&self) -> f64 {
        self.log_lambda
    }

    pub fn e_a(&self) -> f64 {
        self.e_a
    }

    pub fn e_b(&self) -> f64 {
        self.e_b
    }

    /// Native coefficient values. The scaled coefficient may have underflowed.
    pub fn coeffs(&self) -> CoefficientQuad {
        self.coeffs
    }

    /// Full-precision coefficient value.
    pub fn coefficient(&self, which: Coefficient) -> LogComplex {
        match self.scaled {
            Some((scaled, mantissa)) if scaled == which => {
                LogComplex::from_parts(mantissa, self.log_lambda)
            }
            _ => LogComplex::from(which.pick(&self.coeffs)),
        }
    }

    /// Which coefficient, if any, is carried in scaled form.
    pub fn scaled_coefficient(&self) -> Option<Coefficient> {
        self.scaled.map(|(which, _)| which)
    }

    /// `E_a s`, the left-interface term `E_a / sigma`.
    pub fn e_a_s(&self) -> Complex64 {
        self.s * self.e_a
    }

    /// `E_b s`, the right-interface term `E_b / sigma`.
    pub fn e_b_s(&self) -> Complex64 {
        self.s * self.e_b
    }

    /// Determinant residual of the plain coefficients at this `s`.
    pub fn residual(&self, params: &PhysicalParams) -> f64 {
        determinant_residual(params, self.k, self.s)
    }

    /// `lambda c h - g d`, relative to its terms, from the full-precision coefficients.
    pub fn scaled_residual(&self) -> f64 {
        let [c, d, g, h] = Coefficient::ALL.map(|w| self.coefficient(w));
        let lhs = (c * h).scale_exp(self.log_lambda);
        let rhs = g * d;
        crate::logscale::relative_gap(lhs, rhs)
    }
}

/// `|lambda c h - g d|` relative to the same products taken over absolute
/// values of the terms inside each coefficient,
/// `lambda (|mu_L - mu| + |E_a s|)(|mu_R - mu| + |E_b s|) + (mu_L + mu + |E_a s|)(mu_R + mu + |E_b s|)`.
///
/// This is the componentwise backward error of `s`. Near a cutoff `g` (or `d`)
/// is a difference of two terms of size `mu_R + mu` and its rounding is
/// multiplied by the large partner coefficient; a scale built from the
/// products themselves would report that rounding as a residual.
pub fn determinant_residual(params: &PhysicalParams, k: f64, s: Complex64) -> f64 {
    let q = eval_coeffs(params, k, s);
    let lambda = lambda_factor(params, k).to_f64();
    let lch = q.c * q.h * lambda;
    let gd = q.g * q.d;
    let (mu_l, mu, mu_r) = (params.mu_l(), params.mu(), params.mu_r());
    let ea_s = (s * eval_e(params, k, Side::Left)).norm();
    let eb_s = (s * eval_e(params, k, Side::Right)).norm();
    let scale = lambda * ((mu_l - mu).abs() + ea_s) * ((mu_r - mu).abs() + eb_s)
        + (mu_l + mu + ea_s) * (mu_r + mu + eb_s);
    (lch - gd).norm() / scale
}

/// Re-expresses a root `s0` of the determinant in the coordinate of its
/// smallest coefficient. With `u = lambda * delta` the determinant in `delta` is
///
/// `rho lambda (lambda - 1) delta^2 + (lambda (Q0 - 2 mu rho) - P0) delta - 2 mu Q0`
///
/// where `rho` is the ratio of the other interface's `E` to the pivot's, and
/// `P0`, `Q0` are the partner coefficient (`g` for pivot `d`, `d` for pivot `g`)
/// and its twin at `u = 0`.
pub(crate) fn refine_root(params: &PhysicalParams, k: f64, s0: Complex64) -> SpectralPoint {
    let base = SpectralPoint::new(params, k, s0);
    let mu = params.mu();
    let left_scale = params.mu_l() + mu;
    let right_scale = params.mu_r() + mu;
    let rel_d = base.coeffs.d.norm() / left_scale;
    let rel_g = base.coeffs.g.norm() / right_scale;
    let (pivot, rel, e_piv, e_other, piv_scale, other_scale) = if rel_d <= rel_g {
        (
            Coefficient::D,
            rel_d,
            base.e_a,
            base.e_b,
            left_scale,
            right_scale,
        )
    } else {
        (
            Coefficient::G,
            rel_g,
            base.e_b,
            base.e_a,
            right_scale,
            left_scale,
        )
    };
    if rel > PIVOT_THRESHOLD || e_piv == 0.0 || !e_piv.is_finite() {
        return base;
    }

    let rho = e_other / e_piv;
    let p0 = other_scale - rho * piv_scale;
    let q0 = p0 - 2.0 * mu;
    let lambda = base.log_lambda.exp();
    let lambda_m1 = base.log_lambda.exp_m1();
    let a2 = rho * lambda * lambda_m1;
    let a1 = lambda * (q0 - 2.0 * mu * rho) - p0;
    let a0 = -2.0 * mu * q0;

    let candidates = match solve_real_quadratic(a2, a1, a0) {
        QuadRoots::Constant => return base,
        QuadRoots::Linear(x) => vec![x],
        QuadRoots::Pair(x, y) => vec![x, y],
    };
    let to_s = |delta: Complex64| (piv_scale - delta * lambda) / e_piv;
    let Some(delta) = candidates
        .into_iter()
        .filter(|delta| delta.re.is_finite() && delta.im.is_finite())
        .min_by(|x, y| (to_s(*x) - s0).norm().total_cmp(&(to_s(*y) - s0).norm()))
    else {
        return base;
    };

    let u = delta * lambda;
    let s = to_s(delta);
    let partner = p0 + u * rho;
    let coeffs = match pivot {
        Coefficient::D => CoefficientQuad {
            c: u - 2.0 * mu,
            d: u,
            g: partner,
            h: partner - 2.0 * mu,
        },
        _ => CoefficientQuad {
            c: partner - 2.0 * mu,
            d: partner,
            g: u,
            h: u - 2.0 * mu,
        },
    };
    let refined = SpectralPoint {
        s,
        coeffs,
        scaled: Some((pivot, delta)),
        ..base
    };
    if !(s.re.is_finite() && s.im.is_finite())
        || refined.residual(params) > base.residual(params).max(super::ROOT_RESIDUAL_TOL)
    {
        return base;
    }
    refined
}
