use serde::Serialize;

use super::fit::{fit_line, upper_window};
use super::{usable_fraction, AuditError, ClaimReport, ClaimStatus, Provenance};
use crate::dispersion::{cutoff_wavenumbers, track_branches, Branch, Coefficient};
use crate::eigenfunction::{amplitude_pair, eval_f, NormalizationRule};
use crate::grid::{KGrid, Spacing};
use crate::logscale::{relative_gap, LogComplex};
use crate::model::PhysicalParams;

pub const BOUNDEDNESS_MIN_POINTS: usize = 20;

/// Fitted rates must match the theory to this relative accuracy.
const RATE_REL_TOL: f64 = 0.05;
/// Slope of `log|f(a)|` against `b - a` must match `2k` to this relative accuracy.
const WIDTH_SLOPE_REL_TOL: f64 = 0.1;
/// A window whose `log|f(a)|` spans less than this counts as flat.
const FLAT_SPAN: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Decaying,
    Bounded,
    Unbounded,
    Indeterminate,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Decaying => "decaying",
            Classification::Bounded => "bounded",
            Classification::Unbounded => "unbounded",
            Classification::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundednessVerdict {
    pub classification: Classification,
    /// Slope of `log|f(a, k)|` against `k` over the fit window.
    pub fitted_rate: f64,
    pub rate_stderr: f64,
    pub k_window: (f64, f64),
    pub theory_rate: f64,
    /// Same fit over the upper half of the window; a large gap to
    /// `fitted_rate` means the window still carries transients.
    pub upper_quarter_rate: f64,
    /// Slopes of `log|A e^{ka}|` and `log|B e^{-ka}|` over the window.
    pub a_term_rate: f64,
    pub b_term_rate: f64,
    /// Relative change over the window of `Y = -g/h` (A side) or `Y / lambda` (B side).
    pub y_drift: f64,
    pub branch: Branch,
    pub normalization: NormalizationRule,
    /// B-side results go beyond the published analysis.
    pub extension: bool,
    pub ks: Vec<f64>,
    pub log_f: Vec<f64>,
}

/// Expected slope of `log|f(a, k)|`. On the A side `Y` tends to a nonzero
/// constant, so `B e^{-ka} ~ A e^{k(2b-a)}` dominates; on the B side `Y` decays
/// like `lambda` and both terms scale like `A e^{ka}`.
pub fn theory_rate(params: &PhysicalParams, rule: NormalizationRule, branch: Branch) -> f64 {
    let (a, b) = (params.a(), params.b());
    match (branch, rule) {
        (Branch::A, NormalizationRule::ExpNegKa) => 2.0 * (b - a),
        (Branch::A, _) => 2.0 * b - a,
        (Branch::B, NormalizationRule::ExpNegKa) => 0.0,
        (Branch::B, _) => a,
    }
}

fn classify(rate: f64, stderr: f64, window_logs: &[f64]) -> Classification {
    let span = window_logs
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        - window_logs.iter().cloned().fold(f64::INFINITY, f64::min);
    if rate - 2.0 * stderr > 0.0 {
        Classification::Unbounded
    } else if rate + 2.0 * stderr < 0.0 {
        Classification::Decaying
    } else if rate.abs() <= 2.0 * stderr && span <= FLAT_SPAN {
        Classification::Bounded
    } else {
        Classification::Indeterminate
    }
}

/// [`classify_boundedness_window`] with the upper half of the grid as window.
pub fn classify_boundedness(
    params: &PhysicalParams,
    rule: NormalizationRule,
    branch: Branch,
    ks: &[f64],
) -> Result<BoundednessVerdict, AuditError> {
    classify_boundedness_window(params, rule, branch, ks, 0.5)
}

/// Fits `log|f(a, k)|` against `k` over the upper `fraction` of `ks` and
/// classifies it: unbounded if the slope is more than two standard errors
/// above zero, decaying if more than two below, bounded if within two and
/// the window is flat, indeterminate otherwise.
///
/// `ks` must be increasing, have at least [`BOUNDEDNESS_MIN_POINTS`] points and
/// start past both cutoffs.
pub fn classify_boundedness_window(
    params: &PhysicalParams,
    rule: NormalizationRule,
    branch: Branch,
    ks: &[f64],
    fraction: f64,
) -> Result<BoundednessVerdict, AuditError> {
    if ks.len() < BOUNDEDNESS_MIN_POINTS {
        return Err(AuditError::GridTooSmall {
            needed: BOUNDEDNESS_MIN_POINTS,
            got: ks.len(),
        });
    }
    if !usable_fraction(fraction) {
        return Err(AuditError::Precondition(format!(
            "fit window fraction {fraction} not in (0, 1]"
        )));
    }
    let (ka, kb) = cutoff_wavenumbers(params);
    let cutoff = ka.max(kb);
    if !(ks[0] > cutoff) {
        return Err(AuditError::BeforeCutoff { k: ks[0], cutoff });
    }
    let levels = track_branches(params, ks)?;
    let a = params.a();
    let mut log_f = Vec::with_capacity(ks.len());
    let mut a_terms = Vec::with_capacity(ks.len());
    let mut b_terms = Vec::with_capacity(ks.len());
    let mut ys: Vec<LogComplex> = Vec::with_capacity(ks.len());
    for level in &levels {
        let root = match level.on_branch(branch) {
            Some(r) if r.is_real() => r,
            _ => return Err(AuditError::BranchUnavailable { branch, k: level.k }),
        };
        let pair = amplitude_pair(params, root.point(), rule)?;
        log_f.push(eval_f(params, &pair, a).log_abs());
        a_terms.push(pair.growing_term(a).log_abs());
        b_terms.push(pair.decaying_term(a).log_abs());
        let point = root.point();
        let y = -point.coefficient(Coefficient::G) / point.coefficient(Coefficient::H);
        ys.push(match branch {
            Branch::A => y,
            Branch::B => y.scale_exp(-point.log_lambda()),
        });
    }

    let window = upper_window(ks.len(), fraction);
    let quarter = {
        let inner = upper_window(window.len(), 0.5);
        window.start + inner.start..window.end
    };
    let fit_over =
        |range: std::ops::Range<usize>, data: &[f64]| fit_line(&ks[range.clone()], &data[range]);
    let main = fit_over(window.clone(), &log_f)
        .ok_or_else(|| AuditError::Precondition("log|f(a)| not finite over the window".into()))?;
    let rate_of = |range: std::ops::Range<usize>, data: &[f64]| {
        fit_over(range, data).map_or(f64::NAN, |f| f.slope)
    };

    Ok(BoundednessVerdict {
        classification: classify(main.slope, main.slope_stderr, &log_f[window.clone()]),
        fitted_rate: main.slope,
        rate_stderr: main.slope_stderr,
        k_window: (ks[window.start], ks[window.end - 1]),
        theory_rate: theory_rate(params, rule, branch),
        upper_quarter_rate: rate_of(quarter, &log_f),
        a_term_rate: rate_of(window.clone(), &a_terms),
        b_term_rate: rate_of(window.clone(), &b_terms),
        y_drift: relative_gap(ys[window.start], ys[window.end - 1]),
        branch,
        normalization: rule,
        extension: branch == Branch::B,
        ks: ks.to_vec(),
        log_f,
    })
}

/// `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Geometry {
    pub a: f64,
    pub b: f64,
}

/// The three boundedness cases on the A side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundednessCase {
    /// `(a, b) = (-10, -1)`, constant `A`: `2b - a = 8 > 0`.
    WideLayer,
    /// `(a, b) = (-2, -1.5)`, constant `A`: `2b - a = -1 < 0`.
    NarrowLayer,
    /// Wide layer with `A = k^2`; `A e^{ka}` still tends to 0.
    PolynomialAmplitude,
}

impl BoundednessCase {
    pub const ALL: [BoundednessCase; 3] = [
        BoundednessCase::WideLayer,
        BoundednessCase::NarrowLayer,
        BoundednessCase::PolynomialAmplitude,
    ];

    pub fn geometry(self) -> Geometry {
        match self {
            BoundednessCase::WideLayer | BoundednessCase::PolynomialAmplitude => {
                Geometry { a: -10.0, b: -1.0 }
            }
            BoundednessCase::NarrowLayer => Geometry { a: -2.0, b: -1.5 },
        }
    }

    pub fn rule(self) -> NormalizationRule {
        match self {
            BoundednessCase::PolynomialAmplitude => NormalizationRule::Polynomial(2.0),
            _ => NormalizationRule::Constant(1.0),
        }
    }

    pub fn claim_id(self) -> &'static str {
        match self {
            BoundednessCase::WideLayer => "unbounded_wide_layer",
            BoundednessCase::NarrowLayer => "decaying_narrow_layer",
            BoundednessCase::PolynomialAmplitude => "unbounded_polynomial_amplitude",
        }
    }
}

/// 40 linear points from twice the larger cutoff over a span of at least 20
/// and at least `40 / (b - a)`, so the dominant term grows by `e^{40}`.
pub fn boundedness_grid(params: &PhysicalParams) -> KGrid {
    let (ka, kb) = cutoff_wavenumbers(params);
    let lo = 2.0 * ka.max(kb);
    let hi = lo + 20f64.max(40.0 / params.width());
    KGrid::new(lo, hi, 40, Spacing::Linear).expect("finite increasing bounds")
}

fn verdict_evidence(report: ClaimReport, v: &BoundednessVerdict) -> ClaimReport {
    report
        .text("classification", v.classification.as_str())
        .num("fitted_rate", v.fitted_rate)
        .num("rate_stderr", v.rate_stderr)
        .num("theory_rate", v.theory_rate)
        .num("upper_quarter_rate", v.upper_quarter_rate)
        .num("a_term_rate", v.a_term_rate)
        .num("b_term_rate", v.b_term_rate)
        .num("y_drift", v.y_drift)
        .num("k_window_min", v.k_window.0)
        .num("k_window_max", v.k_window.1)
}

fn rate_matches(v: &BoundednessVerdict) -> bool {
    (v.fitted_rate - v.theory_rate).abs() <= RATE_REL_TOL * v.theory_rate.abs()
}

pub fn boundedness_case(
    params: &PhysicalParams,
    case: BoundednessCase,
    fraction: f64,
) -> ClaimReport {
    let g = case.geometry();
    let params = params
        .with_geometry(g.a, g.b)
        .expect("built-in geometries are valid");
    let ks = boundedness_grid(&params).points();
    let report = ClaimReport::new(case.claim_id(), Provenance::wavenumbers(&params, &ks))
        .text("normalization", case.rule().kind());
    if !usable_fraction(fraction) {
        return report.inconclusive("fit window fraction not in (0, 1]");
    }
    let v = match classify_boundedness_window(&params, case.rule(), Branch::A, &ks, fraction) {
        Ok(v) => v,
        Err(e) => return report.on_error(&e),
    };
    let report = verdict_evidence(report, &v);
    let (ok, narrative) = match case {
        BoundednessCase::WideLayer => (
            v.classification == Classification::Unbounded && rate_matches(&v),
            format!(
                "|f(a,k)| grows at rate {:.4} (2b-a = {})",
                v.fitted_rate, v.theory_rate
            ),
        ),
        BoundednessCase::NarrowLayer => (
            v.classification == Classification::Decaying && rate_matches(&v),
            format!(
                "|f(a,k)| decays at rate {:.4} (2b-a = {})",
                v.fitted_rate, v.theory_rate
            ),
        ),
        BoundednessCase::PolynomialAmplitude => (
            v.classification == Classification::Unbounded && v.a_term_rate < 0.0,
            format!(
                "|f(a,k)| grows at rate {:.4} while A e^(ka) decays at rate {:.4}",
                v.fitted_rate, v.a_term_rate
            ),
        ),
    };
    report.finish(
        if ok {
            ClaimStatus::Confirmed
        } else {
            ClaimStatus::Violated
        },
        narrative,
    )
}

/// B-side mirror of the wide-layer case: constant `A`, expected rate `a`.
pub fn b_side_extension(params: &PhysicalParams, fraction: f64) -> ClaimReport {
    let g = BoundednessCase::WideLayer.geometry();
    let params = params
        .with_geometry(g.a, g.b)
        .expect("built-in geometry is valid");
    let ks = boundedness_grid(&params).points();
    let report = ClaimReport::new(
        "extension.b_side_boundedness",
        Provenance::wavenumbers(&params, &ks),
    )
    .flag("extension", true);
    if !usable_fraction(fraction) {
        return report.inconclusive("fit window fraction not in (0, 1]");
    }
    let v = match classify_boundedness_window(
        &params,
        NormalizationRule::Constant(1.0),
        Branch::B,
        &ks,
        fraction,
    ) {
        Ok(v) => v,
        Err(e) => return report.on_error(&e),
    };
    let report = verdict_evidence(report, &v);
    let expected = if v.theory_rate < 0.0 {
        Classification::Decaying
    } else {
        Classification::Unbounded
    };
    let ok = v.classification == expected && rate_matches(&v);
    report.finish(
        if ok {
            ClaimStatus::Confirmed
        } else {
            ClaimStatus::Violated
        },
        format!(
            "B side: |f(a,k)| rate {:.4} against a = {}",
            v.fitted_rate, v.theory_rate
        ),
    )
}

/// Slope of `log|f(a, k)|` against the layer width `b - a` at fixed `k`, with
/// `b = 0`, `a = -delta` and `A = e^{-ka}`; expected `2k`.
///
/// Returns an inconclusive report when `k` is not past both cutoffs.
pub fn verify_width_growth(
    params: &PhysicalParams,
    k: f64,
    deltas: &[f64],
) -> Result<ClaimReport, AuditError> {
    if params.b() != 0.0 {
        return Err(AuditError::Precondition(format!(
            "b must be 0 (got {})",
            params.b()
        )));
    }
    if deltas.len() < 2 {
        return Err(AuditError::GridTooSmall {
            needed: 2,
            got: deltas.len(),
        });
    }
    let geometries = deltas
        .iter()
        .map(|&d| params.with_geometry(-d, 0.0))
        .collect::<Result<Vec<_>, _>>()?;
    let report = ClaimReport::new(
        "growth_in_layer_width",
        Provenance::layer_widths(params, k, deltas),
    )
    .num("k", k)
    .num("theory_slope", 2.0 * k);
    let (ka, kb) = cutoff_wavenumbers(params);
    if !(k > ka.max(kb)) {
        return Ok(report.inconclusive(format!(
            "k={k} is not past both cutoffs; branch structure not established"
        )));
    }
    let mut logs = Vec::with_capacity(deltas.len());
    for p in &geometries {
        let levels = track_branches(p, &[k])?;
        let root = match levels[0].on_branch(Branch::A) {
            Some(r) if r.is_real() => r,
            _ => {
                return Err(AuditError::BranchUnavailable {
                    branch: Branch::A,
                    k,
                })
            }
        };
        let pair = amplitude_pair(p, root.point(), NormalizationRule::ExpNegKa)?;
        logs.push(eval_f(p, &pair, p.a()).log_abs());
    }
    let fit = fit_line(deltas, &logs)
        .ok_or_else(|| AuditError::Precondition("widths must differ".into()))?;
    let ok = fit.slope > 0.0 && (fit.slope - 2.0 * k).abs() <= WIDTH_SLOPE_REL_TOL * 2.0 * k;
    Ok(report
        .num("fitted_slope", fit.slope)
        .num("slope_stderr", fit.slope_stderr)
        .finish(
            if ok {
                ClaimStatus::Confirmed
            } else {
                ClaimStatus::Violated
            },
            format!(
                "log|f(a,k)| grows with b-a at slope {:.4} (2k = {})",
                fit.slope,
                2.0 * k
            ),
        ))
}

/// [`verify_width_growth`] for an arbitrary parameter set: the geometry is replaced
/// by `b = 0`, and errors become report statuses.
pub fn width_growth_report(params: &PhysicalParams, k: f64, deltas: &[f64]) -> ClaimReport {
    let first = deltas.first().copied().unwrap_or(1.0);
    let base = match params.with_geometry(-first, 0.0) {
        Ok(p) => p,
        Err(e) => {
            return ClaimReport::new(
                "growth_in_layer_width",
                Provenance::layer_widths(params, k, deltas),
            )
            .on_error(&e.into())
        }
    };
    verify_width_growth(&base, k, deltas).unwrap_or_else(|e| {
        ClaimReport::new(
            "growth_in_layer_width",
            Provenance::layer_widths(&base, k, deltas),
        )
        .on_error(&e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ParamsCandidate;
    use proptest::prelude::*;

    fn with_geometry(a: f64, b: f64) -> PhysicalParams {
        ParamsCandidate::DEFAULT
            .validate()
            .unwrap()
            .with_geometry(a, b)
            .unwrap()
    }

    #[test]
    fn wide_layer_is_unbounded_at_rate_8() {
        let p = with_geometry(-10.0, -1.0);
        let ks = boundedness_grid(&p).points();
        let v = classify_boundedness(&p, NormalizationRule::Constant(1.0), Branch::A, &ks).unwrap();
        assert_eq!(v.classification, Classification::Unbounded);
        assert!(
            (v.fitted_rate - 8.0).abs() < 0.05 * 8.0,
            "{}",
            v.fitted_rate
        );
        assert_eq!(v.theory_rate, 8.0);
    }

    #[test]
    fn narrow_layer_decays_at_rate_minus_1() {
        let p = with_geometry(-2.0, -1.5);
        let ks = boundedness_grid(&p).points();
        let v = classify_boundedness(&p, NormalizationRule::Constant(1.0), Branch::A, &ks).unwrap();
        assert_eq!(v.classification, Classification::Decaying);
        assert!((v.fitted_rate + 1.0).abs() < 0.05, "{}", v.fitted_rate);
    }

    #[test]
    fn polynomial_amplitude_is_unbounded() {
        let p = with_geometry(-10.0, -1.0);
        let ks = boundedness_grid(&p).points();
        let v =
            classify_boundedness(&p, NormalizationRule::Polynomial(2.0), Branch::A, &ks).unwrap();
        assert_eq!(v.classification, Classification::Unbounded);
        assert!(v.a_term_rate < 0.0);
    }

    #[test]
    fn preconditions() {
        let p = with_geometry(-2.0, -1.0);
        let short: Vec<f64> = (0..10).map(|i| 3.0 + i as f64).collect();
        assert!(matches!(
            classify_boundedness(&p, NormalizationRule::Constant(1.0), Branch::A, &short),
            Err(AuditError::GridTooSmall { .. })
        ));
        let early: Vec<f64> = (0..30).map(|i| 0.5 + i as f64).collect();
        assert!(matches!(
            classify_boundedness(&p, NormalizationRule::Constant(1.0), Branch::A, &early),
            Err(AuditError::BeforeCutoff { .. })
        ));
    }

    #[test]
    fn width_growth_slope_is_2k() {
        let p = with_geometry(-1.0, 0.0);
        let r = verify_width_growth(&p, 10.0, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        assert_eq!(r.status, ClaimStatus::Confirmed, "{}", r.narrative);
        assert!(verify_width_growth(&p, 10.0, &[0.0, 1.0]).is_err());
        assert!(verify_width_growth(&with_geometry(-2.0, -1.0), 10.0, &[1.0, 2.0]).is_err());
        let below = verify_width_growth(&p, 0.5, &[1.0, 2.0]).unwrap();
        assert_eq!(below.status, ClaimStatus::Inconclusive);
    }

    #[test]
    fn classify_rule() {
        assert_eq!(classify(1.0, 0.1, &[0.0, 5.0]), Classification::Unbounded);
        assert_eq!(classify(-1.0, 0.1, &[0.0, -5.0]), Classification::Decaying);
        assert_eq!(classify(0.01, 0.1, &[0.0, 0.5]), Classification::Bounded);
        assert_eq!(
            classify(0.01, 0.1, &[0.0, 3.0]),
            Classification::Indeterminate
        );
        assert_eq!(
            classify(0.3, 0.2, &[0.0, 3.0]),
            Classification::Indeterminate
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        // sign of 2b - a decides the verdict for constant A
        #[test]
        fn sign_dichotomy(b in -3.0f64..0.0, width in 0.2f64..8.0) {
            let a = b - width;
            prop_assume!((2.0 * b - a).abs() >= 0.1);
            let p = with_geometry(a, b);
            let ks = boundedness_grid(&p).points();
            let v = classify_boundedness(&p, NormalizationRule::Constant(1.0), Branch::A, &ks).unwrap();
            let expected = if 2.0 * b - a > 0.0 { Classification::Unbounded } else { Classification::Decaying };
            prop_assert_eq!(v.classification, expected);
            // Y converges, so the rate matches 2b - a
            prop_assert!(v.y_drift < 1e-3);
            prop_assert!((v.fitted_rate - v.theory_rate).abs() <= 0.05 * v.theory_rate.abs());
        }
    }
}
