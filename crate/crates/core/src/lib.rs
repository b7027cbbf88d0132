//! Cooperative video download over cellular downlinks and a shared local
//! wireless medium.
//!
//! - [`gf256`] and [`rlnc`]: GF(2^8) arithmetic and the generation-based
//!   random linear network coding codec.
//! - [`num`]: the network utility maximization formulations, their
//!   subgradient (queue-based) solution, and an exact LP oracle.
//! - [`sim`]: a deterministic discrete-event simulator of cellular links and a
//!   pseudo-broadcast local medium.
//! - [`protocols`]: the adaptive segment scheduler and the local dissemination
//!   protocols that run on top of the simulator.

pub mod bench;
pub mod error;
pub mod gf256;
pub mod num;
pub mod protocols;
pub mod rlnc;
pub mod sim;

pub use error::{CodecError, FieldError, NumError, SimError};
pub use gf256::Gf256;
pub use rlnc::{CodedPacket, DecoderState, Generation, GenerationParams, PlainPacket, SegmentId};
