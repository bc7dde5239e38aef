//! chanforge: a toolkit for controlling noisy quantum channels.
//!
//! Channels are represented by Kraus operators and, equivalently, by their
//! Choi-Jamiolkowski states. Declared sender/receiver resources (shared
//! ancillae, local unitaries, projective measurements, classical
//! communication) mechanically generate the controlled channel and the
//! corresponding superoperator map on Choi states. On top of that sit the
//! channel-complexity measure, teleportation-based protocols, probabilistic
//! error correction, and minimal Kraus representations.
//!
//! Modules:
//! - [`linalg`]: dense complex matrices, partial trace, eigendecomposition,
//!   Schmidt decomposition.
//! - [`channels`]: channels, Choi states, the standard channel zoo, Bell
//!   states.
//! - [`control`]: control resources, the modified channel, and the Choi-level
//!   map with its trace relations.
//! - [`complexity`]: channel complexity and the Choi fidelity figure of merit.
//! - [`protocols`]: teleportation, unitary-shift and bit-flip corrections,
//!   the 3-qubit code demo.
//! - [`krausmin`]: minimal Kraus representations and operator-count bounds.
//! - [`random`]: seeded Haar-random states, unitaries, and channels.
//! - [`cli`]: JSON scenario runner and report emitter.

// index loops mirror the block structure of the formulas; iterator forms
// would hide the (i, j, k) pairing
#![allow(clippy::needless_range_loop)]

pub mod channels;
pub mod cli;
pub mod complexity;
pub mod control;
pub mod error;
pub mod krausmin;
pub mod linalg;
pub mod protocols;
pub mod random;

pub use error::{Error, Result};
pub use linalg::{Complex64, ComplexMatrix, PureState, Tolerances};
