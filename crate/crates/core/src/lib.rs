pub mod bernstein;
pub mod checks;
pub mod error;
pub mod exit_laws;
pub mod map_exponent;
pub mod matrix;
pub mod montecarlo;
pub mod quadrature;
pub mod special;
pub mod stable;
pub mod wiener_hopf;

pub use bernstein::{FactorIndices, IndexKind};
pub use checks::CheckRecord;
pub use error::{Error, Result};
pub use exit_laws::{CramerAsymptotic, CramerRegime, ExitSide, IdentityKind, RogozinForm};
pub use map_exponent::{EigenPair, ExponentKind, MatrixExp2};
pub use matrix::Mat2;
pub use montecarlo::{ExitRecord, Histogram, LadderSample, MCConfig, MCEstimate};
pub use quadrature::QuadConfig;
pub use special::C64;
pub use stable::StableParams;
pub use wiener_hopf::{FactorReport, LadderFactor, LadderKind, Regime};
