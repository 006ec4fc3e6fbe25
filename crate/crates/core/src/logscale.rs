//! Sign/log-magnitude arithmetic for exponentially large or small values.
//!
//! Factors such as `e^{ka}` and `e^{k(2b-a)}` leave the binary64 range long
//! before the wavenumbers of interest are reached, so every such quantity is
//! carried as a mantissa plus a natural-log scale. Addition factors out the
//! larger magnitude, which keeps the result exact to native precision relative
//! to the larger operand.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Sign of a [`LogScaled`] value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Negative => -1.0,
            Sign::Zero => 0.0,
            Sign::Positive => 1.0,
        }
    }

    fn of(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    fn product(self, other: Sign) -> Sign {
        Sign::of(self.as_f64() * other.as_f64())
    }
}

/// A real number stored as `sign * exp(log_mag)`.
///
/// `log_mag` is `-inf` exactly when the sign is [`Sign::Zero`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogScaled {
    sign: Sign,
    log_mag: f64,
}

impl LogScaled {
    pub const ZERO: LogScaled = LogScaled {
        sign: Sign::Zero,
        log_mag: f64::NEG_INFINITY,
    };

    pub const ONE: LogScaled = LogScaled {
        sign: Sign::Positive,
        log_mag: 0.0,
    };

    /// Builds `sign * exp(log_mag)`. A `-inf` magnitude collapses to zero.
    pub fn new(sign: Sign, log_mag: f64) -> Self {
        if sign == Sign::Zero || log_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogScaled { sign, log_mag }
        }
    }

    /// `e^x`, representable for any finite `x`.
    pub fn exp(x: f64) -> Self {
        Self::new(Sign::Positive, x)
    }

    pub fn from_f64(x: f64) -> Self {
        Self::new(Sign::of(x), x.abs().ln())
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// Natural log of the magnitude (`-inf` for zero).
    pub fn log_mag(&self) -> f64 {
        self.log_mag
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }

    /// Native value; overflows to `±inf` or underflows to `0` outside range.
    pub fn to_f64(&self) -> f64 {
        self.sign.as_f64() * self.log_mag.exp()
    }

    pub fn abs(&self) -> Self {
        Self::new(
            if self.is_zero() {
                Sign::Zero
            } else {
                Sign::Positive
            },
            self.log_mag,
        )
    }

    pub fn powf(&self, p: f64) -> Self {
        assert!(
            self.sign != Sign::Negative,
            "fractional power of a negative value"
        );
        if self.is_zero() {
            return if p == 0.0 { Self::ONE } else { Self::ZERO };
        }
        Self::exp(self.log_mag * p)
    }
}

impl Neg for LogScaled {
    type Output = LogScaled;
    fn neg(self) -> LogScaled {
        LogScaled {
            sign: self.sign.product(Sign::Negative),
            log_mag: self.log_mag,
        }
    }
}

impl Mul for LogScaled {
    type Output = LogScaled;
    fn mul(self, rhs: LogScaled) -> LogScaled {
        LogScaled::new(self.sign.product(rhs.sign), self.log_mag + rhs.log_mag)
    }
}

impl Div for LogScaled {
    type Output = LogScaled;
    fn div(self, rhs: LogScaled) -> LogScaled {
        assert!(!rhs.is_zero(), "division by a zero LogScaled value");
        LogScaled::new(self.sign.product(rhs.sign), self.log_mag - rhs.log_mag)
    }
}

impl Add for LogScaled {
    type Output = LogScaled;
    fn add(self, rhs: LogScaled) -> LogScaled {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = match self.log_mag.partial_cmp(&rhs.log_mag) {
            Some(Ordering::Less) => (rhs, self),
            _ => (self, rhs),
        };
        let ratio = (small.log_mag - big.log_mag).exp();
        if big.sign == small.sign {
            LogScaled::new(big.sign, big.log_mag + ratio.ln_1p())
        } else if ratio == 1.0 {
            LogScaled::ZERO
        } else {
            LogScaled::new(big.sign, big.log_mag + (-ratio).ln_1p())
        }
    }
}

impl Sub for LogScaled {
    type Output = LogScaled;
    fn sub(self, rhs: LogScaled) -> LogScaled {
        self + (-rhs)
    }
}

impl fmt::Display for LogScaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Zero => write!(f, "0"),
            Sign::Positive => write!(f, "+exp({})", self.log_mag),
            Sign::Negative => write!(f, "-exp({})", self.log_mag),
        }
    }
}

/// A complex number stored as `unit * exp(log_mag)` with `|unit| = 1`.
///
/// Used wherever a growth rate may be complex; real inputs keep a real unit
/// mantissa so [`LogComplex::to_real`] recovers a [`LogScaled`] exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    unit: Complex64,
    log_mag: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        unit: Complex64::new(0.0, 0.0),
        log_mag: f64::NEG_INFINITY,
    };

    pub fn from_complex(z: Complex64) -> Self {
        Self::from_parts(z, 0.0)
    }

    /// `mantissa * exp(log_scale)`, renormalised.
    pub fn from_parts(mantissa: Complex64, log_scale: f64) -> Self {
        let norm = mantissa.norm();
        if norm == 0.0 || log_scale == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let unit = if mantissa.im == 0.0 {
            Complex64::new(mantissa.re.signum(), 0.0)
        } else if mantissa.re == 0.0 {
            Complex64::new(0.0, mantissa.im.signum())
        } else {
            mantissa / norm
        };
        LogComplex {
            unit,
            log_mag: log_scale + norm.ln(),
        }
    }

    pub fn from_real(x: LogScaled) -> Self {
        if x.is_zero() {
            return Self::ZERO;
        }
        LogComplex {
            unit: Complex64::new(x.sign().as_f64(), 0.0),
            log_mag: x.log_mag(),
        }
    }

    pub fn exp_real(x: f64) -> Self {
        Self::from_real(LogScaled::exp(x))
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    pub fn log_abs(&self) -> f64 {
        self.log_mag
    }

    pub fn unit(&self) -> Complex64 {
        self.unit
    }

    pub fn abs(&self) -> LogScaled {
        LogScaled::exp(self.log_mag)
    }

    /// Multiplies by `e^x`.
    pub fn scale_exp(self, x: f64) -> Self {
        if self.is_zero() {
            return self;
        }
        LogComplex {
            unit: self.unit,
            log_mag: self.log_mag + x,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        self.unit * self.log_mag.exp()
    }

    /// The real value, when the imaginary part of the unit is exactly zero.
    pub fn to_real(&self) -> Option<LogScaled> {
        if self.is_zero() {
            Some(LogScaled::ZERO)
        } else if self.unit.im == 0.0 {
            Some(LogScaled::new(Sign::of(self.unit.re), self.log_mag))
        } else {
            None
        }
    }
}

impl From<Complex64> for LogComplex {
    fn from(z: Complex64) -> Self {
        LogComplex::from_complex(z)
    }
}

impl From<LogScaled> for LogComplex {
    fn from(x: LogScaled) -> Self {
        LogComplex::from_real(x)
    }
}

impl Neg for LogComplex {
    type Output = LogComplex;
    fn neg(self) -> LogComplex {
        LogComplex {
            unit: -self.unit,
            log_mag: self.log_mag,
        }
    }
}

impl Mul for LogComplex {
    type Output = LogComplex;
    fn mul(self, rhs: LogComplex) -> LogComplex {
        if self.is_zero() || rhs.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex::from_parts(self.unit * rhs.unit, self.log_mag + rhs.log_mag)
    }
}

impl Div for LogComplex {
    type Output = LogComplex;
    fn div(self, rhs: LogComplex) -> LogComplex {
        assert!(!rhs.is_zero(), "division by a zero LogComplex value");
        if self.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex::from_parts(self.unit / rhs.unit, self.log_mag - rhs.log_mag)
    }
}

impl Add for LogComplex {
    type Output = LogComplex;
    fn add(self, rhs: LogComplex) -> LogComplex {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let top = self.log_mag.max(rhs.log_mag);
        let sum = self.unit * (self.log_mag - top).exp() + rhs.unit * (rhs.log_mag - top).exp();
        LogComplex::from_parts(sum, top)
    }
}

impl Sub for LogComplex {
    type Output = LogComplex;
    fn sub(self, rhs: LogComplex) -> LogComplex {
        self + (-rhs)
    }
}

/// `|x - y| / max(|x|, |y|)`, evaluated without leaving log space.
pub fn relative_gap(x: LogComplex, y: LogComplex) -> f64 {
    let scale = x.log_abs().max(y.log_abs());
    if scale == f64::NEG_INFINITY {
        return 0.0;
    }
    ((x - y).log_abs() - scale).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn zero_is_additive_identity() {
        let x = LogScaled::from_f64(-3.5);
        assert_eq!(x + LogScaled::ZERO, x);
        assert_eq!(LogScaled::ZERO + x, x);
        assert!(LogScaled::from_f64(0.0).is_zero());
    }

    #[test]
    fn exact_cancellation_gives_zero() {
        let x = LogScaled::exp(812.0);
        assert!((x - x).is_zero());
        let z = LogComplex::from_parts(Complex64::new(0.3, -0.4), 900.0);
        assert!((z - z).is_zero());
    }

    #[test]
    fn far_outside_native_range() {
        // e^{800} * e^{-1600} * e^{800} = 1
        let big = LogScaled::exp(800.0);
        let tiny = LogScaled::exp(-1600.0);
        assert!(big.to_f64().is_infinite());
        assert_eq!(tiny.to_f64(), 0.0);
        let one = big * tiny * big;
        assert!(close(one.to_f64(), 1.0, 1e-15));
        // e^{800} + e^{800} = 2 e^{800}
        let two = big + big;
        assert!(close(two.log_mag(), 800.0 + 2f64.ln(), 1e-15));
    }

    #[test]
    fn real_mantissa_survives_complex_path() {
        let x = LogScaled::from_f64(-2.0);
        let z = LogComplex::from(x) * LogComplex::exp_real(700.0);
        let back = z.to_real().expect("real");
        assert_eq!(back.sign(), Sign::Negative);
        assert!(close(back.log_mag(), 2f64.ln() + 700.0, 1e-15));
    }

    #[test]
    fn relative_gap_of_identical_values_is_zero() {
        let z = LogComplex::from_parts(Complex64::new(1.0, 1.0), -3000.0);
        assert_eq!(relative_gap(z, z), 0.0);
        assert_eq!(relative_gap(LogComplex::ZERO, LogComplex::ZERO), 0.0);
    }

    proptest! {
        #[test]
        fn real_ops_match_native(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            let (la, lb) = (LogScaled::from_f64(a), LogScaled::from_f64(b));
            let sum = (la + lb).to_f64();
            // relative to the larger operand; the log of a magnitude near 1e6 carries ~14 ulp
            prop_assert!((sum - (a + b)).abs() <= 64.0 * f64::EPSILON * a.abs().max(b.abs()));
            prop_assert!(close((la * lb).to_f64(), a * b, 1e-13));
            prop_assert!(((la - lb).to_f64() - (a - b)).abs() <= 64.0 * f64::EPSILON * a.abs().max(b.abs()));
        }

        #[test]
        fn complex_ops_match_native(
            ar in -1e3f64..1e3, ai in -1e3f64..1e3,
            br in -1e3f64..1e3, bi in -1e3f64..1e3,
        ) {
            let (a, b) = (Complex64::new(ar, ai), Complex64::new(br, bi));
            let (la, lb) = (LogComplex::from(a), LogComplex::from(b));
            let scale = a.norm().max(b.norm());
            prop_assert!(((la + lb).to_complex() - (a + b)).norm() <= 8.0 * f64::EPSILON * scale);
            prop_assert!(((la * lb).to_complex() - a * b).norm() <= 1e-13 * (a * b).norm().max(1e-300));
            if b.norm() > 1e-6 {
                prop_assert!(((la / lb).to_complex() - a / b).norm() <= 1e-13 * (a / b).norm().max(1e-300));
            }
        }

        #[test]
        fn scaling_commutes_with_addition(x in -50.0f64..50.0, shift in -2000.0f64..2000.0) {
            let a = LogComplex::from(Complex64::new(x, 1.0));
            let b = LogComplex::from(Complex64::new(2.0, -x));
            let lhs = (a + b).scale_exp(shift);
            let rhs = a.scale_exp(shift) + b.scale_exp(shift);
            // a log magnitude of size L is exact to about L ulp
            prop_assert!(relative_gap(lhs, rhs) <= 4.0 * f64::EPSILON * (shift.abs() + 64.0));
        }
    }
}
