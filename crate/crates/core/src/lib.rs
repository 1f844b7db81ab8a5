//! Coherent subspaces of the harmonic-oscillator Hilbert space and the
//! Boolean ring of finite label sets that indexes them.
//!
//! * [`complex_sets`]: finite sets of complex labels under union,
//!   intersection and symmetric difference.
//! * [`classical_gates`]: OR/AND/XOR/NOT/CNOT over the ideal of subsets of `R`.
//! * [`fock`]: truncated number-basis states and operators.
//! * [`spaces`]: Gram metrics, projectors, Gram–Schmidt chains, Q-functions.
//! * [`contour`]: kets, bras and operator kernels evaluated by residues.
//! * [`gates`]: metric-aware quantum CNOT gates in coherent bases.

pub mod classical_gates;
pub mod complex_sets;
pub mod contour;
pub mod error;
pub mod fock;
pub mod gates;
pub mod io;
pub mod quadrature;
pub mod report;
pub mod spaces;
pub mod verify;

pub use complex_sets::{CSet, IdealIndex, Label};
pub use error::{Error, Result};
pub use fock::{FockOperator, FockVector, TruncationPolicy};
pub use report::CheckReport;
pub use spaces::CoherentSpace;
