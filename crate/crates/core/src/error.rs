use thiserror::Error;

use crate::rlnc::SegmentId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("zero has no multiplicative inverse in GF(2^8)")]
    ZeroInverse,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("invalid generation parameters m={m}, n={n}")]
    InvalidParams { m: usize, n: usize },
    #[error("generation incomplete: {have} of {need} plain packets")]
    IncompleteGeneration { have: usize, need: usize },
    #[error("plain packet {index} has {len} payload bytes, expected {expected}")]
    PayloadLength { index: usize, len: usize, expected: usize },
    #[error("decoder holds no packets to recode from")]
    EmptyDecoder,
    #[error("packet for segment {got} routed to decoder of segment {expected}")]
    SegmentMismatch { expected: SegmentId, got: SegmentId },
    #[error("coded packet shape m={m}, n={n} does not match decoder m={want_m}, n={want_n}")]
    ShapeMismatch { m: usize, n: usize, want_m: usize, want_n: usize },
    #[error("segment not yet decodable: rank {rank} of {m}")]
    NotDecodable { rank: usize, m: usize },
    #[error("truncated coded packet: {len} bytes")]
    Truncated { len: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("device {0} has no cellular link")]
    NoCellular(usize),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("simulation stalled at t={time:.3}s: {detail}")]
    Stalled { time: f64, detail: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("{n} devices exceeds the limit of {max} for this operation")]
    TooManyDevices { n: usize, max: usize },
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error("linear program is unbounded")]
    Unbounded,
}
