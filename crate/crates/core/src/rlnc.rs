//! Generation-based random linear network coding over GF(2^8).
//!
//! A segment (generation) is cut into `m` plain packets of `n` bytes. A coded
//! packet carries `m` coefficients and the matching linear combination of the
//! plain payloads. Decoders keep received rows in reduced row-echelon form so
//! every insert costs one elimination pass and innovation is known immediately.
//!
//! Wire layout of a coded packet (all integers little-endian):
//!
//! ```text
//! [segment_id: u32][m: u16][n: u16][coefficients: m bytes][payload: n bytes]
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::CodecError;
use crate::gf256;

pub type SegmentId = u32;

/// Fixed header preceding coefficients on the wire.
pub const HEADER_LEN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GenerationParams {
    m: usize,
    n: usize,
}

impl GenerationParams {
    pub fn new(m: usize, n: usize) -> Result<Self, CodecError> {
        if m == 0 || n == 0 || m > u16::MAX as usize || n > u16::MAX as usize {
            return Err(CodecError::InvalidParams { m, n });
        }
        Ok(Self { m, n })
    }

    /// Packets per generation.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Payload bytes per packet.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn segment_bytes(&self) -> usize {
        self.m * self.n
    }

    /// Bytes on the wire for one coded packet.
    pub fn coded_wire_size(&self) -> usize {
        HEADER_LEN + self.m + self.n
    }
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self { m: 25, n: 900 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlainPacket {
    pub segment_id: SegmentId,
    pub index: usize,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedPacket {
    pub segment_id: SegmentId,
    pub coefficients: Vec<u8>,
    pub payload: Vec<u8>,
}

impl CodedPacket {
    pub fn m(&self) -> usize {
        self.coefficients.len()
    }

    pub fn n(&self) -> usize {
        self.payload.len()
    }

    pub fn wire_size(&self) -> usize {
        HEADER_LEN + self.m() + self.n()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.wire_size());
        out.extend_from_slice(&self.segment_id.to_le_bytes());
        out.extend_from_slice(&(self.m() as u16).to_le_bytes());
        out.extend_from_slice(&(self.n() as u16).to_le_bytes());
        out.extend_from_slice(&self.coefficients);
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self, CodecError> {
        if buf.len() < HEADER_LEN {
            return Err(CodecError::Truncated { len: buf.len() });
        }
        let segment_id = u32::from_le_bytes(buf[0..4].try_into().unwrap());
        let m = u16::from_le_bytes(buf[4..6].try_into().unwrap()) as usize;
        let n = u16::from_le_bytes(buf[6..8].try_into().unwrap()) as usize;
        if buf.len() != HEADER_LEN + m + n {
            return Err(CodecError::Truncated { len: buf.len() });
        }
        Ok(Self {
            segment_id,
            coefficients: buf[HEADER_LEN..HEADER_LEN + m].to_vec(),
            payload: buf[HEADER_LEN + m..].to_vec(),
        })
    }
}

/// One segment's worth of plain packets plus the number of meaningful bytes
/// (the tail of the last packet is zero padding when the file runs short).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generation {
    pub segment_id: SegmentId,
    pub params: GenerationParams,
    pub packets: Vec<PlainPacket>,
    pub byte_len: usize,
}

impl Generation {
    /// Cuts `data` (at most `m * n` bytes) into `m` zero-padded packets.
    pub fn from_bytes(segment_id: SegmentId, params: GenerationParams, data: &[u8]) -> Self {
        assert!(data.len() <= params.segment_bytes(), "segment larger than generation");
        let packets = (0..params.m())
            .map(|index| {
                let mut payload = vec![0u8; params.n()];
                let start = (index * params.n()).min(data.len());
                let end = ((index + 1) * params.n()).min(data.len());
                payload[..end - start].copy_from_slice(&data[start..end]);
                PlainPacket { segment_id, index, payload }
            })
            .collect();
        Self { segment_id, params, packets, byte_len: data.len() }
    }

    /// Concatenated payloads trimmed to the true segment length.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.packets.iter().flat_map(|p| p.payload.iter().copied()).collect();
        out.truncate(self.byte_len);
        out
    }
}

/// Splits a file into consecutive generations numbered from zero.
pub fn split_file(data: &[u8], params: GenerationParams) -> Vec<Generation> {
    data.chunks(params.segment_bytes())
        .enumerate()
        .map(|(i, chunk)| Generation::from_bytes(i as SegmentId, params, chunk))
        .collect()
}

fn check_generation(generation: &[PlainPacket], params: GenerationParams) -> Result<(), CodecError> {
    if generation.len() != params.m() {
        return Err(CodecError::IncompleteGeneration { have: generation.len(), need: params.m() });
    }
    for (i, p) in generation.iter().enumerate() {
        if p.payload.len() != params.n() {
            return Err(CodecError::PayloadLength { index: i, len: p.payload.len(), expected: params.n() });
        }
    }
    Ok(())
}

/// Combines the plain packets with caller-chosen coefficients.
pub fn encode_with_coefficients(
    generation: &[PlainPacket],
    params: GenerationParams,
    coefficients: &[u8],
) -> Result<CodedPacket, CodecError> {
    check_generation(generation, params)?;
    assert_eq!(coefficients.len(), params.m());
    let mut payload = vec![0u8; params.n()];
    for (p, &c) in generation.iter().zip(coefficients) {
        gf256::mul_add_slice(&mut payload, &p.payload, c);
    }
    Ok(CodedPacket {
        segment_id: generation[0].segment_id,
        coefficients: coefficients.to_vec(),
        payload,
    })
}

fn nonzero_coefficients<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<u8> {
    let mut coefficients = vec![0u8; m];
    loop {
        rng.fill(coefficients.as_mut_slice());
        if coefficients.iter().any(|&c| c != 0) {
            return coefficients;
        }
    }
}

/// Random linear combination of a complete generation. An all-zero draw is
/// rejected and redrawn, so the result always carries information.
pub fn encode<R: Rng + ?Sized>(
    generation: &[PlainPacket],
    params: GenerationParams,
    rng: &mut R,
) -> Result<CodedPacket, CodecError> {
    check_generation(generation, params)?;
    let coefficients = nonzero_coefficients(params.m(), rng);
    encode_with_coefficients(generation, params, &coefficients)
}

/// Progressive Gaussian-elimination workspace for one segment.
///
/// Rows are stored as `[coefficients | payload]` and kept in reduced
/// row-echelon form: every row has a unit pivot and its pivot column is zero in
/// all other rows. A decoder built with [`DecoderState::symbolic`] carries no
/// payload and only tracks rank.
#[derive(Debug, Clone)]
pub struct DecoderState {
    segment_id: SegmentId,
    m: usize,
    payload_len: usize,
    rows: Vec<Vec<u8>>,
    pivots: Vec<usize>,
}

impl DecoderState {
    pub fn new(segment_id: SegmentId, params: GenerationParams) -> Self {
        Self {
            segment_id,
            m: params.m(),
            payload_len: params.n(),
            rows: Vec::with_capacity(params.m()),
            pivots: Vec::with_capacity(params.m()),
        }
    }

    /// Coefficient-only decoder; accepts packets with empty payloads.
    pub fn symbolic(segment_id: SegmentId, m: usize) -> Self {
        Self { segment_id, m, payload_len: 0, rows: Vec::with_capacity(m), pivots: Vec::with_capacity(m) }
    }

    /// Decoder already holding a full generation (identity rows).
    pub fn from_generation(generation: &Generation) -> Self {
        let mut state = Self::new(generation.segment_id, generation.params);
        for p in &generation.packets {
            let mut row = vec![0u8; state.m + state.payload_len];
            row[p.index] = 1;
            row[state.m..].copy_from_slice(&p.payload);
            state.rows.push(row);
            state.pivots.push(p.index);
        }
        state
    }

    /// Symbolic decoder at full rank.
    pub fn symbolic_full(segment_id: SegmentId, m: usize) -> Self {
        let mut state = Self::symbolic(segment_id, m);
        for i in 0..m {
            let mut row = vec![0u8; m];
            row[i] = 1;
            state.rows.push(row);
            state.pivots.push(i);
        }
        state
    }

    pub fn segment_id(&self) -> SegmentId {
        self.segment_id
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn missing_dimensions(&self) -> usize {
        self.m - self.rank()
    }

    pub fn is_complete(&self) -> bool {
        self.rank() == self.m
    }

    /// Inserts a coded packet; returns whether it raised the rank.
    pub fn insert(&mut self, packet: &CodedPacket) -> Result<bool, CodecError> {
        if packet.segment_id != self.segment_id {
            return Err(CodecError::SegmentMismatch { expected: self.segment_id, got: packet.segment_id });
        }
        if packet.m() != self.m || packet.n() != self.payload_len {
            return Err(CodecError::ShapeMismatch {
                m: packet.m(),
                n: packet.n(),
                want_m: self.m,
                want_n: self.payload_len,
            });
        }
        if self.is_complete() {
            return Ok(false);
        }
        let mut row = Vec::with_capacity(self.m + self.payload_len);
        row.extend_from_slice(&packet.coefficients);
        row.extend_from_slice(&packet.payload);
        Ok(self.insert_row(row))
    }

    fn insert_row(&mut self, mut row: Vec<u8>) -> bool {
        for (held, &pivot) in self.rows.iter().zip(&self.pivots) {
            let c = row[pivot];
            if c != 0 {
                gf256::mul_add_slice(&mut row, held, c);
            }
        }
        let Some(pivot) = row[..self.m].iter().position(|&c| c != 0) else {
            return false;
        };
        let scale = gf256::inv(row[pivot]).expect("pivot is nonzero");
        gf256::scale_slice(&mut row, scale);
        for held in &mut self.rows {
            let c = held[pivot];
            if c != 0 {
                gf256::mul_add_slice(held, &row, c);
            }
        }
        self.rows.push(row);
        self.pivots.push(pivot);
        true
    }

    /// Uniform random combination of the rows held so far. The output lies in
    /// the span of everything received.
    pub fn recode<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CodedPacket, CodecError> {
        if self.rows.is_empty() {
            return Err(CodecError::EmptyDecoder);
        }
        let weights = nonzero_coefficients(self.rows.len(), rng);
        Ok(self.combine(&weights))
    }

    /// Combination of held rows with explicit weights (one per row, in
    /// insertion order).
    pub fn combine(&self, weights: &[u8]) -> CodedPacket {
        assert_eq!(weights.len(), self.rows.len());
        let mut acc = vec![0u8; self.m + self.payload_len];
        for (row, &w) in self.rows.iter().zip(weights) {
            gf256::mul_add_slice(&mut acc, row, w);
        }
        let payload = acc.split_off(self.m);
        CodedPacket { segment_id: self.segment_id, coefficients: acc, payload }
    }

    /// Recovers the original plain packets in index order.
    pub fn extract(&self) -> Result<Vec<PlainPacket>, CodecError> {
        if !self.is_complete() {
            return Err(CodecError::NotDecodable { rank: self.rank(), m: self.m });
        }
        let mut out: Vec<PlainPacket> = self
            .rows
            .iter()
            .zip(&self.pivots)
            .map(|(row, &pivot)| PlainPacket {
                segment_id: self.segment_id,
                index: pivot,
                payload: row[self.m..].to_vec(),
            })
            .collect();
        out.sort_by_key(|p| p.index);
        Ok(out)
    }
}
