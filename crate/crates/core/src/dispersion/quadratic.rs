use num_complex::Complex64;

/// Roots of `q2 x^2 + q1 x + q0` with real coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum QuadRoots {
    /// Both `q2` and `q1` vanish.
    Constant,
    Linear(Complex64),
    /// Larger magnitude first; conjugate pairs have positive imaginary part first.
    Pair(Complex64, Complex64),
}

/// Cancellation-free roots: the larger one from the textbook formula with
/// the sign chosen to add magnitudes, the smaller one as `q0 / (q2 x1)`.
pub(crate) fn solve_real_quadratic(q2: f64, q1: f64, q0: f64) -> QuadRoots {
    let scale = q2.abs().max(q1.abs()).max(q0.abs());
    if scale == 0.0 || !scale.is_finite() {
        return QuadRoots::Constant;
    }
    let (q2, q1, q0) = (q2 / scale, q1 / scale, q0 / scale);
    if q2 == 0.0 {
        if q1 == 0.0 {
            return QuadRoots::Constant;
        }
        return QuadRoots::Linear(Complex64::new(-q0 / q1, 0.0));
    }
    let disc = q1.mul_add(q1, -4.0 * q2 * q0);
    if disc >= 0.0 {
        let t = -0.5 * (q1 + disc.sqrt().copysign(q1));
        if t == 0.0 {
            return QuadRoots::Pair(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        }
        QuadRoots::Pair(Complex64::new(t / q2, 0.0), Complex64::new(q0 / t, 0.0))
    } else {
        let re = -q1 / (2.0 * q2);
        let im = (-disc).sqrt() / (2.0 * q2.abs());
        QuadRoots::Pair(Complex64::new(re, im), Complex64::new(re, -im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(q: (f64, f64, f64), x: Complex64) -> Complex64 {
        x * x * q.0 + x * q.1 + q.2
    }

    #[test]
    fn well_separated_real_roots() {
        // (x - 1e8)(x - 1e-8)
        let q = (1.0, -(1e8 + 1e-8), 1.0);
        let QuadRoots::Pair(big, small) = solve_real_quadratic(q.0, q.1, q.2) else {
            panic!("expected two roots");
        };
        assert!((big.re - 1e8).abs() <= 1e-8 * 1e8);
        // the naive formula loses every digit of the small root here
        assert!((small.re - 1e-8).abs() <= 1e-15 * 1e-8);
    }

    #[test]
    fn complex_pair_is_ordered() {
        let QuadRoots::Pair(z1, z2) = solve_real_quadratic(1.0, 0.0, 4.0) else {
            panic!("expected a pair");
        };
        assert_eq!(z1, Complex64::new(0.0, 2.0));
        assert_eq!(z2, z1.conj());
        assert!(eval((1.0, 0.0, 4.0), z1).norm() < 1e-15);
    }

    #[test]
    fn degenerate_cases() {
        assert_eq!(solve_real_quadratic(0.0, 0.0, -16.0), QuadRoots::Constant);
        assert_eq!(
            solve_real_quadratic(0.0, 2.0, -4.0),
            QuadRoots::Linear(Complex64::new(2.0, 0.0))
        );
    }

    #[test]
    fn tiny_leading_coefficient() {
        // near-linear: one root near -q0/q1, the other far away
        let q = (1e-20, 3.0, -6.0);
        let QuadRoots::Pair(big, small) = solve_real_quadratic(q.0, q.1, q.2) else {
            panic!("expected a pair");
        };
        assert!((small.re - 2.0).abs() < 1e-14);
        assert!(big.re < -1e19);
    }
}
