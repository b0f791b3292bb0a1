//! Exact symbolic engine for relative and rubber curve-counting generating
//! functions: graded super-Weyl algebras over exact rationals, Fourier-mode
//! rubber potentials, degeneration differential equations, and the classical
//! enumerative recursions they reproduce.

pub mod error;
pub mod ring;
pub mod series;
pub mod weyl;

pub mod oracle;
pub mod testutil;

pub use error::{EngineError, Result};
