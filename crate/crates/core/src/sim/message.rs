use std::fmt;

use crate::rlnc::{CodedPacket, SegmentId};

/// Fixed-size set of segment ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SegmentSet {
    words: Vec<u64>,
    len: usize,
}

impl SegmentSet {
    pub fn new(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn capacity(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, s: SegmentId) -> bool {
        let (w, b) = (s as usize / 64, s as usize % 64);
        let was = self.words[w] & (1 << b) != 0;
        self.words[w] |= 1 << b;
        !was
    }

    pub fn contains(&self, s: SegmentId) -> bool {
        let (w, b) = (s as usize / 64, s as usize % 64);
        (s as usize) < self.len && self.words[w] & (1 << b) != 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.len
    }

    pub fn iter(&self) -> impl Iterator<Item = SegmentId> + '_ {
        (0..self.len as SegmentId).filter(move |&s| self.contains(s))
    }

    pub fn missing(&self) -> impl Iterator<Item = SegmentId> + '_ {
        (0..self.len as SegmentId).filter(move |&s| !self.contains(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dest {
    Unicast(usize),
    Broadcast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackStatus {
    /// Assignment received and queued.
    Accepted,
    Done,
    Failed,
}

/// Message payloads. Sizes on the wire are fixed by [`MessageSizes`].
#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Advertisement { holdings: SegmentSet },
    Request { segment: SegmentId, dims: usize },
    CodedData { packet: CodedPacket },
    Notification { segment: SegmentId },
    Bitfield { holdings: SegmentSet },
    Have { segment: SegmentId },
    PieceRequest { segment: SegmentId, blocks: Vec<u16> },
    Piece { segment: SegmentId, block: u16 },
    Brake { segment: SegmentId },
    Assign { segment: SegmentId, assignment: u64 },
    Feedback { segment: SegmentId, assignment: u64, status: FeedbackStatus },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MessageKind {
    Advertisement,
    Request,
    CodedData,
    Notification,
    Bitfield,
    Have,
    PieceRequest,
    Piece,
    Brake,
    Assign,
    Feedback,
}

impl MessageKind {
    pub const ALL: [MessageKind; 11] = [
        MessageKind::Advertisement,
        MessageKind::Request,
        MessageKind::CodedData,
        MessageKind::Notification,
        MessageKind::Bitfield,
        MessageKind::Have,
        MessageKind::PieceRequest,
        MessageKind::Piece,
        MessageKind::Brake,
        MessageKind::Assign,
        MessageKind::Feedback,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MessageKind::Advertisement => "advertisement",
            MessageKind::Request => "request",
            MessageKind::CodedData => "coded_data",
            MessageKind::Notification => "notification",
            MessageKind::Bitfield => "bitfield",
            MessageKind::Have => "have",
            MessageKind::PieceRequest => "piece_request",
            MessageKind::Piece => "piece",
            MessageKind::Brake => "brake",
            MessageKind::Assign => "assign",
            MessageKind::Feedback => "feedback",
        }
    }

    pub fn is_data(self) -> bool {
        matches!(self, MessageKind::CodedData | MessageKind::Piece)
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Body {
    pub fn kind(&self) -> MessageKind {
        match self {
            Body::Advertisement { .. } => MessageKind::Advertisement,
            Body::Request { .. } => MessageKind::Request,
            Body::CodedData { .. } => MessageKind::CodedData,
            Body::Notification { .. } => MessageKind::Notification,
            Body::Bitfield { .. } => MessageKind::Bitfield,
            Body::Have { .. } => MessageKind::Have,
            Body::PieceRequest { .. } => MessageKind::PieceRequest,
            Body::Piece { .. } => MessageKind::Piece,
            Body::Brake { .. } => MessageKind::Brake,
            Body::Assign { .. } => MessageKind::Assign,
            Body::Feedback { .. } => MessageKind::Feedback,
        }
    }

    pub fn segment(&self) -> Option<SegmentId> {
        match self {
            Body::Request { segment, .. }
            | Body::Notification { segment }
            | Body::Have { segment }
            | Body::PieceRequest { segment, .. }
            | Body::Piece { segment, .. }
            | Body::Brake { segment }
            | Body::Assign { segment, .. }
            | Body::Feedback { segment, .. } => Some(*segment),
            Body::CodedData { packet } => Some(packet.segment_id),
            Body::Advertisement { .. } | Body::Bitfield { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub src: usize,
    pub dst: Dest,
    pub body: Body,
}

impl Message {
    pub fn is_addressed_to(&self, device: usize) -> bool {
        match self.dst {
            Dest::Unicast(d) => d == device,
            Dest::Broadcast => true,
        }
    }
}

/// Bytes each message kind occupies on the local medium.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageSizes {
    pub control: usize,
    /// Coefficient count `m` of a coded packet.
    pub coefficients: usize,
    /// Payload bytes `n` of a coded packet or a piece block.
    pub payload: usize,
    pub n_segments: usize,
}

/// Per-packet header carried by coded packets and piece blocks.
pub const DATA_HEADER: usize = 8;

impl MessageSizes {
    pub fn bytes(&self, body: &Body) -> usize {
        match body {
            Body::CodedData { .. } => DATA_HEADER + self.coefficients + self.payload,
            Body::Piece { .. } => DATA_HEADER + self.payload,
            Body::Advertisement { .. } | Body::Bitfield { .. } => self.control + self.n_segments.div_ceil(8),
            _ => self.control,
        }
    }
}
