//! Independent real-root finder: sign changes of the native determinant on a
//! log-spaced scan of `s`, refined by bisection.

use crate::model::{eval_coeffs, lambda_factor, PhysicalParams};
use num_complex::Complex64;

const DECADES: (i32, i32) = (-15, 15);
const POINTS_PER_DECADE: usize = 40;

fn determinant(params: &PhysicalParams, k: f64, lambda: f64, s: f64) -> f64 {
    let q = eval_coeffs(params, k, Complex64::new(s, 0.0));
    (lambda * q.c * q.h - q.g * q.d).re
}

/// Real roots `s` with `1e-15 <= |s| <= 1e15`, ascending. Double roots
/// without a sign change are missed.
pub fn bisection_roots(params: &PhysicalParams, k: f64) -> Vec<f64> {
    let lambda = lambda_factor(params, k).to_f64();
    let mut scan = Vec::new();
    let steps = (DECADES.1 - DECADES.0) as usize * POINTS_PER_DECADE;
    for i in 0..=steps {
        let e = DECADES.0 as f64 + i as f64 / POINTS_PER_DECADE as f64;
        scan.push(10f64.powf(e));
    }
    let mut samples: Vec<f64> = scan
        .iter()
        .rev()
        .map(|s| -s)
        .chain(scan.iter().copied())
        .collect();
    samples.dedup();

    let f = |s: f64| determinant(params, k, lambda, s);
    let mut roots = Vec::new();
    let mut prev = (samples[0], f(samples[0]));
    for &s in &samples[1..] {
        let here = (s, f(s));
        if here.1 == 0.0 {
            roots.push(s);
        } else if prev.1 != 0.0
            && prev.1.signum() != here.1.signum()
            && prev.0.signum() == s.signum()
        {
            roots.push(bisect(&f, prev, here));
        }
        prev = here;
    }
    roots
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: (f64, f64), mut hi: (f64, f64)) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo.0 + hi.0);
        if mid == lo.0 || mid == hi.0 {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == lo.1.signum() {
            lo = (mid, fm);
        } else {
            hi = (mid, fm);
        }
    }
    if lo.1.abs() <= hi.1.abs() {
        lo.0
    } else {
        hi.0
    }
}
