use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::oracle::bisection_roots;
use super::{fit_line, usable_tolerance, AuditError, ClaimReport, ClaimStatus, Provenance};
use crate::dispersion::{
    continuation_distance, cutoff_wavenumbers, determinant_residual, limit_coefficients,
    log_asymptote_error, solve_sigma, Branch, Coefficient, DispersionError, GrowthRoot, RootLevel,
};
use crate::logscale::Sign;
use crate::model::{eval_e, PhysicalParams, Side};

type Tracked = Result<Vec<RootLevel>, AuditError>;

/// Allowed relative error of the fitted `log|d|` (or `log|g|`) slope against `2(a - b)`.
const SLOPE_REL_TOL: f64 = 0.2;
/// Coefficients may not exceed this multiple of their limit over the last decade.
const BOUND_FACTOR: f64 = 10.0;
/// Largest deviation from the limit accepted at the end of the grid, relative to `max(|limit|, mu)`.
const LIMIT_REL_TOL: f64 = 1e-2;
/// Asymptotic growth rate must be met to this relative accuracy at the end of the grid.
const ASYMPTOTE_REL_TOL: f64 = 1e-6;

fn fmt_status(ok: bool) -> ClaimStatus {
    if ok {
        ClaimStatus::Confirmed
    } else {
        ClaimStatus::Violated
    }
}

/// Roots on `branch` over the last decade of the grid.
fn last_decade(levels: &[RootLevel], branch: Branch) -> Result<Vec<&GrowthRoot>, AuditError> {
    let k_max = levels.last().map_or(0.0, |l| l.k);
    levels
        .iter()
        .filter(|l| l.k >= k_max / 10.0)
        .map(|l| match l.on_branch(branch) {
            Some(r) if r.is_real() => Ok(r),
            _ => Err(AuditError::BranchUnavailable { branch, k: l.k }),
        })
        .collect()
}

fn other_coefficients(branch: Branch) -> [Coefficient; 3] {
    match branch {
        Branch::A => [Coefficient::C, Coefficient::G, Coefficient::H],
        Branch::B => [Coefficient::C, Coefficient::D, Coefficient::H],
    }
}

fn prefix(branch: Branch) -> &'static str {
    match branch {
        Branch::A => "A",
        Branch::B => "B",
    }
}

/// At `k = 0` the determinant is the constant `-2 mu (mu_L + mu_R)`.
pub fn degeneracy_at_zero(params: &PhysicalParams) -> ClaimReport {
    let report = ClaimReport::new(
        "dispersion.no_eigenvalue_at_zero",
        Provenance::wavenumbers(params, &[0.0]),
    );
    let expected = -2.0 * params.mu() * (params.mu_l() + params.mu_r());
    let report = report.num("expected_q0", expected);
    match solve_sigma(params, 0.0) {
        Err(DispersionError::NoEigenvalue { q0, .. }) => {
            let ok = (q0 - expected).abs() <= 1e-14 * expected.abs();
            report.num("q0", q0).finish(
                fmt_status(ok),
                format!("k=0 has no eigenvalue; the determinant is the constant {q0}"),
            )
        }
        Ok(roots) => report
            .num("root_count", roots.len() as f64)
            .finish(ClaimStatus::Violated, "roots reported at k=0"),
        Err(e) => report.on_error(&e.into()),
    }
}

/// At each cutoff one `E` factor vanishes and the quadratic collapses to a
/// linear equation: exactly one root, flagged degenerate, matching the
/// bisection oracle. A shared cutoff has no eigenvalue at all.
pub fn cutoff_check(params: &PhysicalParams, tol: f64) -> ClaimReport {
    let (ka, kb) = cutoff_wavenumbers(params);
    let shared = (ka - kb).abs() <= 1e-12 * ka.max(kb);
    let grid = if shared {
        vec![ka]
    } else {
        vec![ka.min(kb), ka.max(kb)]
    };
    let mut report = ClaimReport::new(
        "dispersion.cutoff_roots",
        Provenance::wavenumbers(params, &grid),
    )
    .num("k_a", ka)
    .num("k_b", kb)
    .flag("shared_cutoff", shared);
    if !usable_tolerance(tol) {
        return report.inconclusive("root tolerance is not positive");
    }
    if shared {
        return match solve_sigma(params, ka) {
            Err(DispersionError::NoEigenvalue { .. }) => report.finish(
                ClaimStatus::Confirmed,
                format!("both E factors vanish at k={ka}; no eigenvalue there"),
            ),
            Ok(roots) => {
                // rounding may leave E ~ 1e-17, giving a root at sigma ~ 0
                let ok = roots
                    .iter()
                    .all(|r| r.degenerate() && r.sigma().norm() <= 1e-9 * params.u() * ka);
                report.num("root_count", roots.len() as f64).finish(
                    fmt_status(ok),
                    "shared cutoff: only a vanishing growth rate remains",
                )
            }
            Err(e) => report.on_error(&e.into()),
        };
    }
    let mut all_ok = true;
    for (name, k) in [("k_a", ka), ("k_b", kb)] {
        match solve_sigma(params, k) {
            Ok(roots) => {
                let oracle = bisection_roots(params, k);
                let gap = roots
                    .first()
                    .map(|r| {
                        oracle
                            .iter()
                            .map(|o| (o - r.s().re).abs() / r.s().re.abs())
                            .fold(f64::INFINITY, f64::min)
                    })
                    .unwrap_or(f64::INFINITY);
                let ok =
                    roots.len() == 1 && roots[0].degenerate() && roots[0].is_real() && gap <= tol;
                all_ok &= ok;
                report = report
                    .num(&format!("{name}.root_count"), roots.len() as f64)
                    .num(&format!("{name}.oracle_gap"), gap)
                    .flag(
                        &format!("{name}.flagged"),
                        roots.iter().all(|r| r.degenerate()),
                    );
                if let Some(r) = roots.first() {
                    report = report.num(&format!("{name}.sigma"), r.sigma().re);
                }
            }
            Err(e) => {
                all_ok = false;
                report = report.text(&format!("{name}.error"), e.to_string());
            }
        }
    }
    report.finish(
        fmt_status(all_ok),
        if all_ok {
            "one flagged root at each cutoff, matching the oracle"
        } else {
            "cutoff roots missing, unflagged or off the oracle"
        },
    )
}

/// Every root on the grid meets the determinant residual bound.
pub fn residual_check(
    params: &PhysicalParams,
    ks: &[f64],
    tracked: &Tracked,
    tol: f64,
) -> ClaimReport {
    let report = ClaimReport::new(
        "dispersion.root_residuals",
        Provenance::wavenumbers(params, ks),
    );
    if !usable_tolerance(tol) {
        return report.inconclusive("root tolerance is not positive");
    }
    let levels = match tracked {
        Ok(levels) => levels,
        Err(e) => return report.on_error(e),
    };
    let mut max = 0.0f64;
    let mut count = 0usize;
    let mut empty = 0usize;
    for level in levels {
        if level.roots.is_empty() {
            empty += 1;
        }
        for r in &level.roots {
            max = max.max(determinant_residual(params, level.k, r.s()));
            count += 1;
        }
    }
    report
        .num("roots_checked", count as f64)
        .num("levels_without_roots", empty as f64)
        .num("max_residual", max)
        .num("tolerance", tol)
        .finish(
            fmt_status(max <= tol),
            format!("{count} roots, largest relative residual {max:.3e}"),
        )
}

/// Closed-form roots at a seeded sample of grid points against the bisection oracle.
pub fn oracle_check(
    params: &PhysicalParams,
    ks: &[f64],
    samples: usize,
    seed: u64,
    tol: f64,
) -> ClaimReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> =
        index::sample(&mut rng, ks.len(), samples.min(ks.len())).into_vec();
    picked.sort_unstable();
    let sample_ks: Vec<f64> = picked.iter().map(|&i| ks[i]).collect();
    let report = ClaimReport::new(
        "dispersion.oracle_equivalence",
        Provenance::wavenumbers(params, &sample_ks),
    )
    .num("seed", seed as f64);
    if !usable_tolerance(tol) || sample_ks.is_empty() {
        return report.inconclusive("no samples or root tolerance is not positive");
    }
    let mut max_gap = 0.0f64;
    let mut mismatches = 0usize;
    let mut compared = 0usize;
    for &k in &sample_ks {
        let oracle = bisection_roots(params, k);
        let real: Vec<f64> = match solve_sigma(params, k) {
            Ok(roots) => roots
                .iter()
                .filter(|r| r.is_real())
                .map(|r| r.s().re)
                .collect(),
            Err(DispersionError::NoEigenvalue { .. }) => Vec::new(),
            Err(e) => return report.on_error(&e.into()),
        };
        if real.len() != oracle.len() {
            mismatches += 1;
            continue;
        }
        for s in real {
            let gap = oracle
                .iter()
                .map(|o| (o - s).abs() / s.abs())
                .fold(f64::INFINITY, f64::min);
            max_gap = max_gap.max(gap);
            compared += 1;
        }
    }
    let ok = mismatches == 0 && max_gap <= tol;
    report
        .num("roots_compared", compared as f64)
        .num("count_mismatches", mismatches as f64)
        .num("max_relative_gap", max_gap)
        .finish(
            fmt_status(ok),
            format!("{compared} real roots against bisection, largest gap {max_gap:.3e}"),
        )
}

/// Along each branch its vanishing coefficient decays like `e^{2k(a-b)}`
/// while the other three stay bounded by a multiple of their limits.
pub fn vanishing_rate_check(params: &PhysicalParams, ks: &[f64], tracked: &Tracked) -> ClaimReport {
    let mut report = ClaimReport::new(
        "vanishing_coefficient_rate",
        Provenance::wavenumbers(params, ks),
    );
    let levels = match tracked {
        Ok(levels) => levels,
        Err(e) => return report.on_error(e),
    };
    let theory = 2.0 * (params.a() - params.b());
    report = report.num("theory_slope", theory);
    let mut status = ClaimStatus::Confirmed;
    for branch in [Branch::A, Branch::B] {
        let p = prefix(branch);
        let series = match last_decade(levels, branch) {
            Ok(s) if s.len() >= 3 => s,
            Ok(_) => return report.inconclusive("fewer than 3 grid points in the last decade"),
            Err(e) => return report.on_error(&e),
        };
        let limits = match limit_coefficients(params, branch) {
            Ok(l) => l,
            Err(e) => return report.on_error(&e.into()),
        };
        let which = branch.vanishing();
        let xs: Vec<f64> = series.iter().map(|r| r.k()).collect();
        let ys: Vec<f64> = series
            .iter()
            .map(|r| r.point().coefficient(which).log_abs())
            .collect();
        let monotone = ys.windows(2).all(|w| w[1] <= w[0]);
        let Some(fit) = fit_line(&xs, &ys) else {
            return report.inconclusive(format!("{branch}: log|{}| not finite", which.name()));
        };
        let slope_ok = (fit.slope - theory).abs() <= SLOPE_REL_TOL * theory.abs();
        let mut bound_ok = true;
        for other in other_coefficients(branch) {
            let limit = other.pick(&limits).norm();
            let worst = series
                .iter()
                .map(|r| r.point().coefficient(other).abs().to_f64())
                .fold(0.0f64, f64::max);
            bound_ok &= worst <= BOUND_FACTOR * limit;
            report = report.num(
                &format!("{p}.max_abs_{}_over_limit", other.name()),
                worst / limit,
            );
        }
        report = report
            .num(&format!("{p}.log_{}_slope", which.name()), fit.slope)
            .flag(&format!("{p}.monotone"), monotone);
        if !(monotone && slope_ok && bound_ok) {
            status = ClaimStatus::Violated;
        }
    }
    report.finish(
        status,
        match status {
            ClaimStatus::Confirmed => "d decays on the A side and g on the B side at the rate 2(a-b); c, g, h and c, d, h stay bounded",
            _ => "a branch misses the decay rate, is not monotone, or has an unbounded coefficient",
        },
    )
}

/// The non-vanishing coefficients approach their large-`k` limits.
pub fn coefficient_limits(params: &PhysicalParams, ks: &[f64], tracked: &Tracked) -> ClaimReport {
    let mut report = ClaimReport::new("coefficient_limits", Provenance::wavenumbers(params, ks));
    let levels = match tracked {
        Ok(levels) => levels,
        Err(e) => return report.on_error(e),
    };
    let mu = params.mu();
    let mut status = ClaimStatus::Confirmed;
    for branch in [Branch::A, Branch::B] {
        let p = prefix(branch);
        let series = match last_decade(levels, branch) {
            Ok(s) if s.len() >= 2 => s,
            Ok(_) => return report.inconclusive("fewer than 2 grid points in the last decade"),
            Err(e) => return report.on_error(&e),
        };
        let limits = match limit_coefficients(params, branch) {
            Ok(l) => l,
            Err(e) => return report.on_error(&e.into()),
        };
        let last = series[series.len() - 1];
        for which in other_coefficients(branch) {
            let limit = which.pick(&limits);
            let scale = limit.norm().max(mu);
            let devs: Vec<f64> = series
                .iter()
                .map(|r| (r.point().coefficient(which).to_complex() - limit).norm())
                .collect();
            let final_dev = devs[devs.len() - 1];
            let shrinking = devs.windows(2).all(|w| w[1] <= w[0] + 1e-12 * scale);
            if !(final_dev <= LIMIT_REL_TOL * scale && shrinking) {
                status = ClaimStatus::Violated;
            }
            let n = which.name();
            report = report
                .num(
                    &format!("{p}.{n}"),
                    last.point().coefficient(which).to_complex().re,
                )
                .num(&format!("{p}.{n}_limit"), limit.re)
                .num(&format!("{p}.{n}_deviation"), final_dev)
                .flag(&format!("{p}.{n}_deviation_shrinking"), shrinking);
        }
        report = report.num(&format!("{p}.k"), last.k());
    }
    report.finish(
        status,
        match status {
            ClaimStatus::Confirmed => "coefficients approach their limits on both branches",
            _ => "a coefficient stays away from its limit or drifts away",
        },
    )
}

/// Growth rates approach `E_a/(mu_L + mu)` and `E_b/(mu_R + mu)`, with
/// relative error decaying like `e^{2k(a-b)}`.
pub fn asymptotic_growth_rates(
    params: &PhysicalParams,
    ks: &[f64],
    tracked: &Tracked,
) -> ClaimReport {
    let mut report = ClaimReport::new(
        "asymptotic_growth_rates",
        Provenance::wavenumbers(params, ks),
    );
    let levels = match tracked {
        Ok(levels) => levels,
        Err(e) => return report.on_error(e),
    };
    let theory = 2.0 * (params.a() - params.b());
    let k_max = ks.last().copied().unwrap_or(0.0);
    if theory * k_max > (ASYMPTOTE_REL_TOL * 1e-2).ln() {
        // lambda(k_max) is too large for the relative error to fall below tolerance
        return report
            .num("k_max", k_max)
            .inconclusive("grid ends before the asymptotic regime");
    }
    let mut status = ClaimStatus::Confirmed;
    for branch in [Branch::A, Branch::B] {
        let p = prefix(branch);
        let series = match last_decade(levels, branch) {
            Ok(s) if s.len() >= 3 => s,
            Ok(_) => return report.inconclusive("fewer than 3 grid points in the last decade"),
            Err(e) => return report.on_error(&e),
        };
        let xs: Vec<f64> = series.iter().map(|r| r.k()).collect();
        let ys: Vec<f64> = series
            .iter()
            .map(|r| log_asymptote_error(params, r.point(), branch))
            .collect();
        let Some(fit) = fit_line(&xs, &ys) else {
            return report.inconclusive("asymptote error not finite");
        };
        let final_err = ys[ys.len() - 1].exp();
        let ok = final_err < ASYMPTOTE_REL_TOL
            && (fit.slope - theory).abs() <= SLOPE_REL_TOL * theory.abs();
        if !ok {
            status = ClaimStatus::Violated;
        }
        report = report
            .num(&format!("{p}.relative_error_at_k_max"), final_err)
            .num(&format!("{p}.log_error_slope"), fit.slope);
    }
    report.num("theory_slope", theory).finish(
        status,
        match status {
            ClaimStatus::Confirmed => {
                "both branches meet their asymptotic growth rates at the end of the grid"
            }
            _ => "a branch misses its asymptotic growth rate",
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Crossing {
    Zero(f64),
    /// Sign change through infinity: the root passes `s = inf` at a cutoff.
    Pole(f64),
    Unresolved(f64),
}

fn coefficient_value(root: &GrowthRoot, which: Coefficient) -> (Sign, f64) {
    let v = root
        .point()
        .coefficient(which)
        .to_real()
        .expect("real root has real coefficients");
    (v.sign(), v.log_mag())
}

fn bisect_crossing(
    params: &PhysicalParams,
    which: Coefficient,
    mut lo: GrowthRoot,
    mut hi: GrowthRoot,
    log_threshold: f64,
) -> Crossing {
    let lo_sign = coefficient_value(&lo, which).0;
    for _ in 0..100 {
        let mid = 0.5 * (lo.k() + hi.k());
        if mid <= lo.k() || mid >= hi.k() {
            break;
        }
        let Ok(roots) = solve_sigma(params, mid) else {
            return Crossing::Unresolved(mid);
        };
        let Some(root) = roots.iter().filter(|r| r.is_real()).min_by(|x, y| {
            continuation_distance(params, x, &lo).total_cmp(&continuation_distance(params, y, &lo))
        }) else {
            return Crossing::Unresolved(mid);
        };
        let (sign, _) = coefficient_value(root, which);
        if sign == Sign::Zero {
            return Crossing::Zero(mid);
        }
        if sign == lo_sign {
            lo = *root;
        } else {
            hi = *root;
        }
    }
    let (l, h) = (
        coefficient_value(&lo, which).1,
        coefficient_value(&hi, which).1,
    );
    let k = 0.5 * (lo.k() + hi.k());
    if l.min(h) <= log_threshold {
        Crossing::Zero(k)
    } else {
        Crossing::Pole(k)
    }
}

/// Scans `c, d, g, h` along `branch` for sign changes and interior near-zeros
/// (local minima of `|.|` below `near_zero * mu`). A bracketed sign change is
/// bisected in `k` to tell a zero from a passage through infinity. At a zero
/// of `d` both candidate restrictions are evaluated:
/// `E_a/(mu_L + mu) = E_b/(mu_R + mu)` and the one implied by `d = 0` forcing
/// `h = 0`, `E_a/(mu_L + mu) = E_b/(mu_R - mu)`.
pub fn nonvanishing_scan(
    params: &PhysicalParams,
    branch: Branch,
    ks: &[f64],
    tracked: &Tracked,
    near_zero: f64,
) -> ClaimReport {
    let p = prefix(branch);
    let mut report = ClaimReport::new(
        &format!("coefficients_nonvanishing.{p}"),
        Provenance::wavenumbers(params, ks),
    );
    if !usable_tolerance(near_zero) {
        return report.inconclusive("near-zero tolerance is not positive");
    }
    let levels = match tracked {
        Ok(levels) => levels,
        Err(e) => return report.on_error(e),
    };
    let log_threshold = (near_zero * params.mu()).ln();
    let samples: Vec<(usize, &GrowthRoot)> = levels
        .iter()
        .enumerate()
        .filter(|(_, l)| l.k > 0.0)
        .filter_map(|(i, l)| l.on_branch(branch).filter(|r| r.is_real()).map(|r| (i, r)))
        .collect();
    if samples.len() < 2 {
        return report.inconclusive("branch has fewer than 2 real roots on the grid");
    }

    let mut zeros = Vec::new();
    let mut poles = 0usize;
    let mut unresolved = 0usize;
    let mut near = Vec::new();
    for which in Coefficient::ALL {
        let values: Vec<(Sign, f64)> = samples
            .iter()
            .map(|(_, r)| coefficient_value(r, which))
            .collect();
        let min_log = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        report = report.num(
            &format!("{}.min_log10_abs", which.name()),
            min_log / std::f64::consts::LN_10,
        );
        for (j, w) in samples.windows(2).enumerate() {
            let (vi, vj) = (values[j], values[j + 1]);
            if vi.0 == Sign::Zero {
                zeros.push((which, w[0].1.k()));
                continue;
            }
            if w[1].0 != w[0].0 + 1 || vj.0 == Sign::Zero || vi.0 == vj.0 {
                continue;
            }
            match bisect_crossing(params, which, *w[0].1, *w[1].1, log_threshold) {
                Crossing::Zero(m) => zeros.push((which, m)),
                Crossing::Pole(_) => poles += 1,
                Crossing::Unresolved(_) => unresolved += 1,
            }
        }
        for j in 1..samples.len().saturating_sub(1) {
            let adjacent =
                samples[j - 1].0 + 1 == samples[j].0 && samples[j].0 + 1 == samples[j + 1].0;
            let (prev, here, next) = (values[j - 1].1, values[j].1, values[j + 1].1);
            if adjacent && here <= prev && here <= next && here < log_threshold {
                near.push((which, samples[j].1.k()));
            }
        }
    }

    for (n, (which, m)) in zeros.iter().enumerate() {
        let key = format!("zero_{}", n + 1);
        report = report
            .text(&format!("{key}.coefficient"), which.name())
            .num(&format!("{key}.k"), *m);
        if *which == Coefficient::D {
            let ea = eval_e(params, *m, Side::Left) / (params.mu_l() + params.mu());
            let eb_plus = eval_e(params, *m, Side::Right) / (params.mu_r() + params.mu());
            let eb_minus = eval_e(params, *m, Side::Right) / (params.mu_r() - params.mu());
            let gap = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE);
            report = report
                .num(&format!("{key}.stated_restriction_gap"), gap(ea, eb_plus))
                .num(&format!("{key}.implied_restriction_gap"), gap(ea, eb_minus))
                .flag(
                    &format!("{key}.stated_restriction_holds"),
                    gap(ea, eb_plus) <= 1e-6,
                )
                .flag(
                    &format!("{key}.implied_restriction_holds"),
                    gap(ea, eb_minus) <= 1e-6,
                );
        }
    }
    for (n, (which, k)) in near.iter().enumerate() {
        report = report
            .text(&format!("near_zero_{}.coefficient", n + 1), which.name())
            .num(&format!("near_zero_{}.k", n + 1), *k);
    }
    report = report
        .num("zeros", zeros.len() as f64)
        .num("near_zeros", near.len() as f64)
        .num("sign_changes_through_infinity", poles as f64)
        .num("unresolved_sign_changes", unresolved as f64)
        .num("near_zero_threshold", near_zero * params.mu());
    if !zeros.is_empty() {
        let (which, m) = zeros[0];
        report.finish(
            ClaimStatus::Violated,
            format!("{branch}: {} vanishes near k={m}", which.name()),
        )
    } else if !near.is_empty() || unresolved > 0 {
        report.inconclusive(format!(
            "{branch}: near-zeros or unresolved sign changes found"
        ))
    } else {
        report.finish(
            ClaimStatus::Confirmed,
            format!("{branch}: no interior zeros of c, d, g, h on the grid"),
        )
    }
}
