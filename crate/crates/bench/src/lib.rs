//! Shared fixtures for the benches.

use skinspec::linalg::CMatrix;
use skinspec::resonator::{capacitance_matrix, ResonatorChain};
use skinspec::spectra::GridSpec;
use skinspec::SymbolCoeffs;

pub fn dimer_matrix(n: usize) -> CMatrix {
    let chain = ResonatorChain::periodic(n, &[1.0, 2.0], 1.0).expect("valid chain");
    capacitance_matrix(&chain)
}

/// The three-band symbol of the 1/2 stencil, `k = 2`.
pub fn coburn_symbol() -> SymbolCoeffs {
    SymbolCoeffs::from_real(&[0.0, 1.0], &[1.0, 0.5], &[1.0, 0.5]).expect("valid symbol")
}

pub fn square_grid(half: f64, resolution: usize) -> GridSpec {
    GridSpec::new((-half, half), (-half, half), resolution).expect("valid grid")
}
