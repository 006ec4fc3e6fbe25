//! Independent reference computations for integration tests. Nothing here
//! calls into the solver: the determinant is rebuilt from the raw parameters
//! and roots are found by sign-change bisection.

#![allow(dead_code)]

use hele_shaw_stability::ParamsCandidate;
use num_complex::Complex64;
use rand::Rng;

pub fn e_left(p: &ParamsCandidate, k: f64) -> f64 {
    ((p.mu - p.mu_l) * p.u * k - p.t_a * k.powi(3)) / p.mu
}

pub fn e_right(p: &ParamsCandidate, k: f64) -> f64 {
    ((p.mu_r - p.mu) * p.u * k - p.t_b * k.powi(3)) / p.mu
}

/// `(c, d, g, h)` at `(k, s)`.
pub fn coeffs(p: &ParamsCandidate, k: f64, s: Complex64) -> [Complex64; 4] {
    let (ea, eb) = (e_left(p, k), e_right(p, k));
    [
        p.mu_l - p.mu - s * ea,
        p.mu_l + p.mu - s * ea,
        p.mu_r + p.mu - s * eb,
        p.mu_r - p.mu - s * eb,
    ]
}

pub fn lambda(p: &ParamsCandidate, k: f64) -> f64 {
    (2.0 * k * (p.a - p.b)).exp()
}

/// `lambda c h - d g`.
pub fn det(p: &ParamsCandidate, k: f64, s: f64) -> f64 {
    let [c, d, g, h] = coeffs(p, k, Complex64::new(s, 0.0)).map(|z| z.re);
    lambda(p, k) * c * h - d * g
}

/// `|lambda c h - d g|` relative to the products of the coefficient terms in
/// absolute value (componentwise backward error in `s`).
pub fn det_residual(p: &ParamsCandidate, k: f64, s: Complex64) -> f64 {
    let [c, d, g, h] = coeffs(p, k, s);
    let lam = lambda(p, k);
    let (xa, xb) = ((s * e_left(p, k)).norm(), (s * e_right(p, k)).norm());
    let scale = lam * ((p.mu_l - p.mu).abs() + xa) * ((p.mu_r - p.mu).abs() + xb)
        + (p.mu_l + p.mu + xa) * (p.mu_r + p.mu + xb);
    (lam * c * h - d * g).norm() / scale
}

fn bisect(p: &ParamsCandidate, k: f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = det(p, k, lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let f_mid = det(p, k, mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Real roots in `s` with `1e-12 <= |s| <= 1e12`, ascending. Roots with
/// `|s| > 1e12` have `|sigma| < 1e-12` and only occur as rounding images of
/// `sigma = 0` at a cutoff.
pub fn bisection_roots(p: &ParamsCandidate, k: f64) -> Vec<f64> {
    const PER_DECADE: i32 = 200;
    let mags: Vec<f64> = (-12 * PER_DECADE..=12 * PER_DECADE)
        .map(|i| 10f64.powf(f64::from(i) / f64::from(PER_DECADE)))
        .collect();
    let mut xs: Vec<f64> = mags.iter().rev().map(|m| -m).collect();
    xs.extend(&mags);
    let mut roots = Vec::new();
    for w in xs.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if x0 < 0.0 && x1 > 0.0 {
            continue;
        }
        let (f0, f1) = (det(p, k, x0), det(p, k, x1));
        if f0 == 0.0 {
            roots.push(x0);
        } else if (f0 < 0.0) != (f1 < 0.0) && f1 != 0.0 {
            roots.push(bisect(p, k, x0, x1));
        }
    }
    roots
}

/// A random valid parameter set: `mu_L < mu < mu_R`, positive speed and
/// tensions, `a < b <= 0`.
pub fn random_params(rng: &mut impl Rng) -> ParamsCandidate {
    let mu_l = rng.gen_range(0.2..3.0);
    let mu = mu_l + rng.gen_range(0.1..3.0);
    let mu_r = mu + rng.gen_range(0.1..3.0);
    let b = -rng.gen_range(0.0..3.0);
    let a = b - rng.gen_range(0.2..4.0);
    ParamsCandidate {
        mu_l,
        mu,
        mu_r,
        u: rng.gen_range(0.2..3.0),
        t_a: rng.gen_range(0.05..3.0),
        t_b: rng.gen_range(0.05..3.0),
        a,
        b,
    }
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// `ln|u + v|` for `u = su e^{lu}`, `v = sv e^{lv}` with signs `su`, `sv`.
pub fn log_abs_sum(su: f64, lu: f64, sv: f64, lv: f64) -> f64 {
    let (big, small, s_big, s_small) = if lu >= lv {
        (lu, lv, su, sv)
    } else {
        (lv, lu, sv, su)
    };
    big + (1.0 + s_small * s_big * (small - big).exp()).abs().ln()
}

/// `ln|f(a, k)|` on a real root `s`, for an amplitude with logarithm `log_amp`:
/// `f(a) = A e^{ka} + B e^{-ka}` with `B = -(g/h) A e^{2kb}`.
pub fn log_f_at_a(p: &ParamsCandidate, k: f64, s: f64, log_amp: f64) -> f64 {
    let [_, _, g, h] = coeffs(p, k, Complex64::new(s, 0.0)).map(|z| z.re);
    let ratio = -g / h;
    log_abs_sum(
        1.0,
        log_amp + k * p.a,
        ratio.signum(),
        log_amp + ratio.abs().ln() + 2.0 * k * p.b - k * p.a,
    )
}
