//! Discrete-event simulation of devices with their own cellular downlinks
//! sharing one local wireless medium.
//!
//! Only one frame is on the medium at a time; frames queue FIFO behind it.
//! Every other device hears each frame independently with probability
//! `1 - loss[tx][rx]`, whether or not it is the addressee. Background load
//! is modeled as a reduction of the medium capacity.

mod config;
mod engine;
mod message;
mod meter;
mod metrics;
mod trace;

pub use config::{DeviceSpec, LocalMediumSpec, Mode, PayloadMode, SimConfig};
pub use engine::{run, Action, Behavior, Ctx, LogRecord, NetInfo, SimOutcome};
pub use message::{Body, Dest, FeedbackStatus, Message, MessageKind, MessageSizes, SegmentSet, DATA_HEADER};
pub use meter::TrafficMeter;
pub use metrics::Metrics;
pub use trace::RateTrace;

#[cfg(test)]
mod tests;
