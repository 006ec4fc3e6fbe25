//! Linear stability of a three-layer constant-viscosity Hele-Shaw displacement.
//!
//! - [`model`]: parameters, the `E` factors and the interface coefficients.
//! - [`dispersion`]: growth-rate roots of the determinant condition and their branches.
//! - [`eigenfunction`]: amplitude pairs and the piecewise eigenfunction, in log-scaled form.
//! - [`grid`]: wavenumber grids.
//! - [`audit`]: numerical verdicts on the large-wavenumber claims.
//! - [`sweep`]: configuration, batch sweeps, CSV/JSON export and SVG plots.

pub mod audit;
pub mod dispersion;
pub mod eigenfunction;
pub mod grid;
pub mod logscale;
pub mod model;
pub mod sweep;

pub use dispersion::{Branch, GrowthRoot, SpectralPoint};
pub use eigenfunction::{AmplitudePair, NormalizationRule};
pub use logscale::{LogComplex, LogScaled};
pub use model::{ParamsCandidate, PhysicalParams};
