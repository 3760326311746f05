//! Baseband toolkit for a downlink that serves two user populations on the
//! same band at full power: N "class A" users each own one subcarrier of an
//! N-carrier multiplex, and up to M "class B" users are code-spread across
//! all N carriers with orthogonal binary sequences. The superposition is
//! non-orthogonal, but because spreading dilutes each class-B symbol by 1/N
//! per carrier, the receiver can separate the classes with a small number of
//! hard-decision cancellation passes instead of a power split.
//!
//! The crate provides:
//!
//! - Gray-labeled QPSK / 16-QAM mapping, slicing, and closed-form bit-error
//!   references ([`constellation`])
//! - orthogonal binary spreading matrices and spread/despread operators
//!   ([`hadamard`])
//! - frame composition and the multicarrier time-domain round trip with
//!   cyclic prefix ([`framing`])
//! - a complex white-noise channel ([`channel`])
//! - the iterative cancellation detector and an eye-opening diagnostic
//!   ([`receiver`])
//! - two-user rate formulas comparing superposed against orthogonal access
//!   ([`capacity`])
//! - a deterministic, parallel Monte Carlo bit-error-rate engine
//!   ([`harness`])
//! - the command-line front end used by the `noma-sim` binary ([`cli`])

pub mod capacity;
pub mod channel;
pub mod cli;
pub mod constellation;
pub mod error;
pub mod framing;
pub mod hadamard;
pub mod harness;
pub mod receiver;

pub use capacity::{capacity_sweep, noma_capacity, owma_capacity, CapacityResult, PowerSplit};
pub use channel::{add_noise, class_gain_db_to_amplitude, ChannelConfig};
pub use constellation::{Constellation, ConstellationKind};
pub use error::{Error, Result};
pub use framing::{FramingConfig, FramingMode, NomaFrame};
pub use hadamard::{HadamardMatrix, Spreader, SpreadingConfig};
pub use harness::{run_point, run_sweep, BerRecord, SimConfig, UserClass};
pub use receiver::{OverloadMargin, Receiver, ReceiverConfig, SicTrace};
