//! Periodic continued fractions, weighted Gauss-map transfer operators, and the
//! Gaussian behaviour of additive costs on reduced quadratic irrationals.

pub mod chebyshev;
pub mod constrained;
pub mod cost;
pub mod eigen;
pub mod enumerate;
pub mod error;
pub mod lft;
pub mod necklace;
pub mod operator;
pub mod special;
pub mod spectral;
pub mod stats;
pub mod traces;
pub mod verify;

pub use cost::{CostKind, CostSpec, Growth, GrowthCertificate};
pub use enumerate::{
    count_pn, count_pn_capped, enumerate_necklaces, population, Enumeration, PeriodicOrbit,
    PopulationSummary,
};
pub use error::{Error, Result};
pub use lft::{Digit, DigitWord, Lft, SizeBound, SizeTriple};
pub use operator::{build_operator, DiscretizedOperator, OperatorParams, SpectralConfig};
pub use spectral::{GaussianConstants, SpectralEngine};
