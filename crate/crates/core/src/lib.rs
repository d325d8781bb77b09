//! Matrix-lifting semidefinite relaxation decoding for real-valued MIMO
//! channel models.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds constellations, channel sampling, the `x = U s`
//!   encoding and the two reference detectors (exhaustive ML and
//!   zero-forcing).
//! * [`formulation`] turns one received vector into a conic program: the
//!   full matrix lifting, the role-exchanged lifting and the projected
//!   (reduced) lifting.
//! * [`sdp`] is a self-contained primal-dual interior-point solver for one
//!   PSD block plus one nonnegative block, with SDPA sparse I/O.
//! * [`recovery`] maps a relaxed solution back to a hard decision.
//! * [`harness`] runs seeded Monte-Carlo sweeps and writes CSV metrics.

pub mod error;
pub mod formulation;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod recovery;
pub mod sdp;

pub use error::{Error, Result};
pub use formulation::{Formulation, LiftedProblem, ObjectiveData, ProjectionPair};
pub use model::{AssignmentMatrix, Constellation, MimoInstance, NoiseLevel};
pub use recovery::{decode, DecodeOptions, DecodeResult};
pub use sdp::{SdpProblem, SdpSolution, SolverConfig, SolverStatus};
