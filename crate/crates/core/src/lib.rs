//! Single-shot work extraction under thermal operations, with a bittery of
//! maximally mixed qubits as the work store.
//!
//! The spectrum of every energy shell is kept block-wise in log space, so
//! shells with `2^n M_B(E)` states are handled without expansion. The
//! [`oracle`] module repeats the computation in exact rational arithmetic on
//! small explicit instances.

pub mod error;
pub mod extraction;
pub mod landauer;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod shell;
pub mod storage;
pub mod verify;

pub use error::{Error, Result};
pub use extraction::{max_work, smooth_min_free_energy, ExtractionResult, MixedCells, SchemeKind, SchemeSpec};
pub use landauer::{GapRule, StaircaseSchedule};
pub use model::{
    AnalyticBath, BathSpec, BitterySpec, DiagonalState, ExplicitBath, SystemSpec, Temperature, WeightLadder,
};
pub use shell::{assemble_shell, epsilon_truncate, BlockSpectrum};
pub use storage::{BitteryState, StorageLedger, WeightTransition};
