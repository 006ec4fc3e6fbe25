use serde::Serialize;

/// Ordinary least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero for two points.
    pub slope_stderr: f64,
    pub n: usize,
}

/// `None` for fewer than two points, non-finite data or constant `x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n || xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let sse: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let r = y - (intercept + slope * x);
                r * r
            })
            .sum();
        (sse / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LineFit {
        slope,
        intercept,
        slope_stderr,
        n,
    })
}

/// Tail of `xs` holding `fraction` of the points (at least two).
pub(crate) fn upper_window(len: usize, fraction: f64) -> std::ops::Range<usize> {
    let keep = ((len as f64 * fraction).ceil() as usize).clamp(2.min(len), len);
    len - keep..len
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 8.0 * x - 3.0).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope - 8.0).abs() < 1e-13);
        assert!((fit.intercept + 3.0).abs() < 1e-12);
        assert!(fit.slope_stderr < 1e-12);
    }

    #[test]
    fn known_stderr() {
        // residuals +-1 alternating around y = x
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 0.0, 3.0, 2.0];
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope - 0.6).abs() < 1e-14);
        // sse = 3.2, sxx = 5
        assert!((fit.slope_stderr - (3.2f64 / 2.0 / 5.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_line(&[1.0], &[2.0]).is_none());
        assert!(fit_line(&[1.0, 1.0], &[2.0, 3.0]).is_none());
        assert!(fit_line(&[1.0, 2.0], &[f64::NAN, 3.0]).is_none());
    }

    #[test]
    fn windows() {
        assert_eq!(upper_window(40, 0.5), 20..40);
        assert_eq!(upper_window(41, 0.5), 20..41);
        assert_eq!(upper_window(40, 0.01), 38..40);
        assert_eq!(upper_window(40, 1.0), 0..40);
    }

    proptest! {
        #[test]
        fn slope_is_shift_invariant(slope in -50.0f64..50.0, shift in -1e3f64..1e3) {
            let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
            let ys: Vec<f64> = xs.iter().map(|x| slope * x + (x * 3.1).sin()).collect();
            let shifted: Vec<f64> = ys.iter().map(|y| y + shift).collect();
            let (f1, f2) = (fit_line(&xs, &ys).unwrap(), fit_line(&xs, &shifted).unwrap());
            prop_assert!((f1.slope - f2.slope).abs() <= 1e-9 * (1.0 + shift.abs()));
        }
    }
}
