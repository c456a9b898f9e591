pub mod acceptance;
pub mod error;
pub mod linalg;
pub mod modes;
pub mod resonator;
pub mod spectra;
pub mod symbol;
pub mod winding;

pub use error::{Error, Result};
pub use spectra::{ClassifiedGrid, GridSpec, SigmaDetSample};
pub use symbol::{Multiplicity, RootPair, SymbolBlocks, SymbolCoeffs};
pub use winding::{Region, WindingMethod, WindingResult};
pub use modes::{Chain, DecayProfile, OperatorEigenvector, PseudoEigenvector, Side};
pub use resonator::{KToeplitzSpec, ModeReport, ResonatorChain, SkinReport};
