//! Wavenumber grids.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least 2 points (got {0})")]
    TooFew(usize),
    #[error("grid bounds must be finite with min < max (got {min}..{max})")]
    Bounds { min: f64, max: f64 },
    #[error("grid minimum must be positive here (got {0})")]
    NonPositive(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

/// `count` points from `min` to `max`, both included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    min: f64,
    max: f64,
    count: usize,
    spacing: Spacing,
}

impl KGrid {
    /// `min >= 0`; log spacing needs `min > 0`.
    pub fn new(min: f64, max: f64, count: usize, spacing: Spacing) -> Result<Self, GridError> {
        if count < 2 {
            return Err(GridError::TooFew(count));
        }
        if !(min.is_finite() && max.is_finite() && min < max && min >= 0.0) {
            return Err(GridError::Bounds { min, max });
        }
        if spacing == Spacing::Log && min <= 0.0 {
            return Err(GridError::NonPositive(min));
        }
        Ok(KGrid {
            min,
            max,
            count,
            spacing,
        })
    }

    /// 0.1 to 50, 200 log-spaced points.
    pub fn standard() -> Self {
        KGrid {
            min: 0.1,
            max: 50.0,
            count: 200,
            spacing: Spacing::Log,
        }
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn require_positive(self) -> Result<Self, GridError> {
        if self.min > 0.0 {
            Ok(self)
        } else {
            Err(GridError::NonPositive(self.min))
        }
    }

    /// Strictly increasing; the end points are exactly `min` and `max`.
    pub fn points(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        let mut ks: Vec<f64> = (0..self.count)
            .map(|i| {
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * t,
                    Spacing::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                }
            })
            .collect();
        ks[0] = self.min;
        ks[self.count - 1] = self.max;
        ks
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn end_points_are_exact() {
        let ks = KGrid::standard().points();
        assert_eq!(ks.len(), 200);
        assert_eq!(ks[0], 0.1);
        assert_eq!(ks[199], 50.0);
        assert!(ks.windows(2).all(|w| w[0] < w[1]));
        let lin = KGrid::new(0.0, 2.0, 5, Spacing::Linear).unwrap().points();
        assert_eq!(lin, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(
            KGrid::new(1.0, 2.0, 1, Spacing::Linear),
            Err(GridError::TooFew(1))
        );
        assert!(KGrid::new(2.0, 1.0, 5, Spacing::Linear).is_err());
        assert_eq!(
            KGrid::new(0.0, 1.0, 5, Spacing::Log),
            Err(GridError::NonPositive(0.0))
        );
        assert!(KGrid::new(0.0, 1.0, 5, Spacing::Linear)
            .unwrap()
            .require_positive()
            .is_err());
    }
}
