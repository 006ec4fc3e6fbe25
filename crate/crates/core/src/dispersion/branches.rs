//! Branch labelling by continuation from the largest wavenumber down.
//!
//! The anchor level is labelled by chordal distance (on the Riemann sphere)
//! between `sigma` and the asymptotes. Continuation uses the pair
//! `(E_a s / (mu_L + mu), E_b s / (mu_R + mu))`, i.e. `1 - d/(mu_L + mu)` and
//! `1 - g/(mu_R + mu)`. Both roots cross `sigma = 0` together at a shared
//! cutoff, but this pair stays finite and distinct there; at a lone cutoff
//! one component passes through infinity, which the chordal metric handles.

use num_complex::Complex64;
use serde::Serialize;

use super::{asymptotic_sigma, Branch, DispersionError, GrowthRoot};
use crate::model::PhysicalParams;

/// Roots found at one grid wavenumber.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootLevel {
    pub k: f64,
    pub roots: Vec<GrowthRoot>,
}

impl RootLevel {
    pub fn on_branch(&self, branch: Branch) -> Option<&GrowthRoot> {
        self.roots.iter().find(|r| r.branch() == Some(branch))
    }
}

const TIE_TOL: f64 = 1e-12;

pub fn chordal_distance(z: Complex64, w: Complex64) -> f64 {
    let (nz, nw) = (z.norm(), w.norm());
    if nz.is_infinite() && nw.is_infinite() {
        return 0.0;
    }
    // invert when both are large so nothing overflows
    let (z, w) = if nz > 1.0 && nw > 1.0 {
        (z.inv(), w.inv())
    } else {
        (z, w)
    };
    if z.norm().is_infinite() {
        return 2.0 / w.norm().hypot(1.0);
    }
    if w.norm().is_infinite() {
        return 2.0 / z.norm().hypot(1.0);
    }
    2.0 * (z - w).norm() / (z.norm().hypot(1.0) * w.norm().hypot(1.0))
}

fn is_tie(x: f64, y: f64) -> bool {
    (x - y).abs() <= TIE_TOL * (x + y).max(f64::MIN_POSITIVE)
}

/// Labels each root as A side (`d -> 0`) or B side (`g -> 0`).
///
/// The largest-`k` level with roots is labelled by proximity to
/// [`asymptotic_sigma`]; smaller `k` inherit labels by nearest-neighbour
/// continuation. Complex-conjugate pairs are left unlabelled. Once the roots
/// become real again the labels resume in the order (by `Re sigma`) they had
/// before the pair formed. A lone root takes the label whose last position is
/// closest.
pub fn assign_branches(
    params: &PhysicalParams,
    mut levels: Vec<RootLevel>,
) -> Result<Vec<RootLevel>, DispersionError> {
    for pair in levels.windows(2) {
        if !(pair[0].k < pair[1].k) {
            return Err(DispersionError::UnorderedGrid);
        }
    }
    if levels.iter().any(|l| !(l.k.is_finite() && l.k >= 0.0)) {
        return Err(DispersionError::UnorderedGrid);
    }
    for level in levels.iter_mut() {
        for root in level.roots.iter_mut() {
            *root = root.with_branch(None);
        }
    }
    let Some(anchor) = levels.iter().rposition(|l| !l.roots.is_empty()) else {
        return Ok(levels);
    };

    let mut tracker = Tracker::default();
    {
        let level = &mut levels[anchor];
        let k = level.k;
        if level.roots.iter().any(|r| !r.is_real()) {
            return Err(DispersionError::AmbiguousBranch { k });
        }
        let (sa, sb) = asymptotic_sigma(params, k);
        let (sa, sb) = (Complex64::new(sa, 0.0), Complex64::new(sb, 0.0));
        let labels = match level.roots.as_slice() {
            [only] => {
                let (da, db) = (
                    chordal_distance(only.sigma(), sa),
                    chordal_distance(only.sigma(), sb),
                );
                if is_tie(da, db) {
                    return Err(DispersionError::AmbiguousBranch { k });
                }
                vec![if da < db { Branch::A } else { Branch::B }]
            }
            [r0, r1] => {
                let keep = chordal_distance(r0.sigma(), sa) + chordal_distance(r1.sigma(), sb);
                let swap = chordal_distance(r0.sigma(), sb) + chordal_distance(r1.sigma(), sa);
                if is_tie(keep, swap) {
                    return Err(DispersionError::AmbiguousBranch { k });
                }
                if keep < swap {
                    vec![Branch::A, Branch::B]
                } else {
                    vec![Branch::B, Branch::A]
                }
            }
            _ => unreachable!("a quadratic has at most two roots"),
        };
        tracker.apply(params, &mut level.roots, &labels);
    }

    for level in levels[..anchor].iter_mut().rev() {
        match level.roots.len() {
            0 => {}
            1 => {
                let label = tracker.nearest(continuation_key(params, &level.roots[0]));
                tracker.apply(params, &mut level.roots, &[label]);
            }
            _ => {
                if level.roots.iter().any(|r| !r.is_real()) {
                    tracker.in_complex = true;
                    tracker.previous_single = None;
                    continue;
                }
                let labels = tracker.pair(&level.roots, params);
                tracker.apply(params, &mut level.roots, &labels);
            }
        }
    }
    Ok(levels)
}

type Key = [Complex64; 2];

fn continuation_key(params: &PhysicalParams, root: &GrowthRoot) -> Key {
    let p = root.point();
    [
        p.e_a_s() / (params.mu_l() + params.mu()),
        p.e_b_s() / (params.mu_r() + params.mu()),
    ]
}

fn key_distance(x: Key, y: Key) -> f64 {
    chordal_distance(x[0], y[0]) + chordal_distance(x[1], y[1])
}

/// Distance between two roots in the continuation coordinates.
pub fn continuation_distance(params: &PhysicalParams, x: &GrowthRoot, y: &GrowthRoot) -> f64 {
    key_distance(continuation_key(params, x), continuation_key(params, y))
}

#[derive(Default)]
struct Tracker {
    last_a: Option<Key>,
    last_b: Option<Key>,
    /// `Re sigma` of the last labelled roots, for the ordering rule.
    re_a: Option<f64>,
    re_b: Option<f64>,
    /// `Re sigma_A > Re sigma_B` at the last level where both were seen.
    a_above: Option<bool>,
    in_complex: bool,
    previous_single: Option<Branch>,
}

impl Tracker {
    fn apply(&mut self, params: &PhysicalParams, roots: &mut [GrowthRoot], labels: &[Branch]) {
        for (root, label) in roots.iter_mut().zip(labels) {
            *root = root.with_branch(Some(*label));
            let key = continuation_key(params, root);
            match label {
                Branch::A => (self.last_a, self.re_a) = (Some(key), Some(root.sigma().re)),
                Branch::B => (self.last_b, self.re_b) = (Some(key), Some(root.sigma().re)),
            }
        }
        if let (Some(a), Some(b)) = (self.re_a, self.re_b) {
            if labels.len() == 2 {
                self.a_above = Some(a > b);
            }
        }
        self.in_complex = false;
        self.previous_single = if labels.len() == 1 {
            Some(labels[0])
        } else {
            None
        };
    }

    fn nearest(&self, key: Key) -> Branch {
        match (self.last_a, self.last_b) {
            (Some(a), Some(b)) => {
                let (da, db) = (key_distance(key, a), key_distance(key, b));
                if is_tie(da, db) {
                    self.previous_single.unwrap_or(Branch::A)
                } else if da < db {
                    Branch::A
                } else {
                    Branch::B
                }
            }
            (Some(_), None) => Branch::A,
            (None, Some(_)) => Branch::B,
            (None, None) => Branch::A,
        }
    }

    fn pair(&self, roots: &[GrowthRoot], params: &PhysicalParams) -> Vec<Branch> {
        let (s0, s1) = (roots[0].sigma(), roots[1].sigma());
        let (k0, k1) = (
            continuation_key(params, &roots[0]),
            continuation_key(params, &roots[1]),
        );
        let ordered = |a_first: bool| {
            if a_first {
                vec![Branch::A, Branch::B]
            } else {
                vec![Branch::B, Branch::A]
            }
        };
        // labels by ordering, used after a complex stretch and to break ties
        let by_order = self.a_above.map(|a_above| (s0.re > s1.re) == a_above);
        if self.in_complex {
            if let Some(a_first) = by_order {
                return ordered(a_first);
            }
        }
        match (self.last_a, self.last_b) {
            (Some(a), Some(b)) => {
                let keep = key_distance(k0, a) + key_distance(k1, b);
                let swap = key_distance(k0, b) + key_distance(k1, a);
                if is_tie(keep, swap) {
                    ordered(by_order.unwrap_or(true))
                } else {
                    ordered(keep < swap)
                }
            }
            (Some(known), None) | (None, Some(known)) => {
                let known_branch = if self.last_a.is_some() {
                    Branch::A
                } else {
                    Branch::B
                };
                let first_is_known = key_distance(k0, known) <= key_distance(k1, known);
                ordered(first_is_known == (known_branch == Branch::A))
            }
            (None, None) => ordered(true),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{solve_sigma, Coefficient};
    use crate::model::ParamsCandidate;

    fn levels(params: &PhysicalParams, ks: &[f64]) -> Vec<RootLevel> {
        ks.iter()
            .map(|&k| RootLevel {
                k,
                roots: solve_sigma(params, k).unwrap_or_default(),
            })
            .collect()
    }

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    #[test]
    fn chordal_metric_handles_infinity() {
        let inf = Complex64::new(f64::INFINITY, 0.0);
        assert_eq!(chordal_distance(inf, inf), 0.0);
        assert!((chordal_distance(Complex64::new(0.0, 0.0), inf) - 2.0).abs() < 1e-15);
        let (z, w) = (Complex64::new(1e200, 0.0), Complex64::new(-1e200, 0.0));
        assert!(chordal_distance(z, w) < 1e-199);
        let (z, w) = (Complex64::new(0.5, 1.0), Complex64::new(-3.0, 0.25));
        assert!((chordal_distance(z, w) - chordal_distance(z.inv(), w.inv())).abs() < 1e-15);
    }

    #[test]
    fn default_branches_follow_their_limits() {
        let p = ParamsCandidate::DEFAULT.validate().unwrap();
        let ks = log_grid(5.0, 50.0, 60);
        let labelled = assign_branches(&p, levels(&p, &ks)).unwrap();
        let mut prev: Option<(f64, f64)> = None;
        for level in &labelled {
            let a = level.on_branch(Branch::A).unwrap();
            let b = level.on_branch(Branch::B).unwrap();
            let d = a.point().coefficient(Coefficient::D).log_abs();
            let g = b.point().coefficient(Coefficient::G).log_abs();
            if let Some((pd, pg)) = prev {
                if level.k > 10.0 {
                    assert!(d < pd && g < pg, "k = {}", level.k);
                }
            }
            prev = Some((d, g));
        }
    }

    #[test]
    fn labels_survive_the_cutoff() {
        // both roots pass through sigma = 0 near k = 1
        let p = ParamsCandidate::DEFAULT.validate().unwrap();
        let ks = log_grid(0.1, 50.0, 200);
        let labelled = assign_branches(&p, levels(&p, &ks)).unwrap();
        for level in &labelled {
            let (Some(a), Some(b)) = (level.on_branch(Branch::A), level.on_branch(Branch::B))
            else {
                panic!("missing branch at k = {}", level.k);
            };
            // with E_a = E_b, sigma_A = E/t_A and sigma_B = E/t_B with t_A in (2, 3], t_B >= 5
            // (the bounds are reached once lambda is below rounding)
            let t_a = (a.s() * a.point().e_a()).re;
            let t_b = (b.s() * b.point().e_b()).re;
            assert!(
                t_a > 2.0 && t_a <= 3.0 + 1e-12,
                "k = {} t_a = {t_a}",
                level.k
            );
            assert!(t_b >= 5.0 - 1e-12, "k = {} t_b = {t_b}", level.k);
        }
    }

    #[test]
    fn lone_root_inherits_nearest_label() {
        let p = ParamsCandidate {
            t_a: 4.0,
            ..ParamsCandidate::DEFAULT
        }
        .validate()
        .unwrap();
        let mut ks = log_grid(0.6, 40.0, 50);
        ks.insert(0, 0.5);
        let labelled = assign_branches(&p, levels(&p, &ks)).unwrap();
        let first = &labelled[0];
        assert_eq!(first.roots.len(), 1);
        // E_a vanishes at k = 0.5 so the A root has left through sigma = 0
        assert_eq!(first.roots[0].branch(), Some(Branch::B));
    }

    #[test]
    fn rejects_unordered_grid() {
        let p = ParamsCandidate::DEFAULT.validate().unwrap();
        let mut lv = levels(&p, &[5.0, 6.0]);
        lv.swap(0, 1);
        assert_eq!(assign_branches(&p, lv), Err(DispersionError::UnorderedGrid));
    }

    #[test]
    fn coincident_asymptotes_are_ambiguous() {
        // E_a/(mu_L + mu) == E_b/(mu_R + mu) for every k
        let p = ParamsCandidate {
            mu_r: 4.0,
            t_b: 2.0,
            ..ParamsCandidate::DEFAULT
        }
        .validate()
        .unwrap();
        let (sa, sb) = asymptotic_sigma(&p, 40.0);
        assert!((sa - sb).abs() <= 1e-12 * sa.abs());
        let result = assign_branches(&p, levels(&p, &[40.0]));
        assert!(
            matches!(result, Err(DispersionError::AmbiguousBranch { .. })),
            "{result:?}"
        );
    }
}
