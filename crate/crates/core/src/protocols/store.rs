use crate::rlnc::{CodedPacket, DecoderState, Generation, GenerationParams, SegmentId};
use crate::sim::{NetInfo, PayloadMode, SegmentSet, SimConfig};

/// What one device holds of each segment: a decoder for coded protocols, a
/// block bitmap for the plain one.
pub struct SegmentStore {
    params: GenerationParams,
    mode: PayloadMode,
    decoders: Vec<Option<DecoderState>>,
    blocks: Vec<Option<SegmentSet>>,
    seg_lens: Vec<usize>,
    complete: SegmentSet,
    fresh: Vec<SegmentId>,
}

impl SegmentStore {
    pub fn new(cfg: &SimConfig) -> Self {
        let s = cfg.n_segments();
        Self {
            params: cfg.params,
            mode: cfg.payload_mode,
            decoders: vec![None; s],
            blocks: vec![None; s],
            seg_lens: (0..s).map(|i| cfg.segment_len(i)).collect(),
            complete: SegmentSet::new(s),
            fresh: Vec::new(),
        }
    }

    pub fn n_segments(&self) -> usize {
        self.decoders.len()
    }

    pub fn m(&self) -> usize {
        self.params.m()
    }

    pub fn is_complete(&self, s: SegmentId) -> bool {
        self.complete.contains(s)
    }

    pub fn holdings(&self) -> &SegmentSet {
        &self.complete
    }

    pub fn all_complete(&self) -> bool {
        self.complete.is_full()
    }

    pub fn rank(&self, s: SegmentId) -> usize {
        if self.is_complete(s) {
            return self.m();
        }
        self.decoders[s as usize].as_ref().map_or(0, DecoderState::rank)
    }

    fn decoder(&mut self, s: SegmentId) -> &mut DecoderState {
        let (params, mode) = (self.params, self.mode);
        self.decoders[s as usize].get_or_insert_with(|| match mode {
            PayloadMode::Symbolic => DecoderState::symbolic(s, params.m()),
            PayloadMode::Full => DecoderState::new(s, params),
        })
    }

    fn mark_complete(&mut self, s: SegmentId) {
        if self.complete.insert(s) {
            self.fresh.push(s);
        }
    }

    /// Records a whole segment fetched over cellular.
    pub fn set_downloaded(&mut self, s: SegmentId, net: &NetInfo) {
        let state = match (self.mode, net.source_generation(s)) {
            (PayloadMode::Full, Some(g)) => DecoderState::from_generation(g),
            _ => DecoderState::symbolic_full(s, self.m()),
        };
        self.decoders[s as usize] = Some(state);
        self.mark_complete(s);
    }

    /// Inserts a coded packet; returns whether it was innovative.
    pub fn insert_coded(&mut self, packet: &CodedPacket) -> bool {
        let s = packet.segment_id;
        if (s as usize) >= self.n_segments() || self.is_complete(s) {
            return false;
        }
        let dec = self.decoder(s);
        let innovative = dec.insert(packet).unwrap_or(false);
        if dec.is_complete() {
            self.mark_complete(s);
        }
        innovative
    }

    /// A random combination of what is held of `s`, if anything.
    pub fn recode<R: rand::Rng + ?Sized>(&self, s: SegmentId, rng: &mut R) -> Option<CodedPacket> {
        self.decoders[s as usize].as_ref().and_then(|d| d.recode(rng).ok())
    }

    pub fn has_block(&self, s: SegmentId, block: u16) -> bool {
        self.is_complete(s) || self.blocks[s as usize].as_ref().is_some_and(|b| b.contains(block as SegmentId))
    }

    pub fn missing_blocks(&self, s: SegmentId) -> Vec<u16> {
        if self.is_complete(s) {
            return Vec::new();
        }
        (0..self.m() as u16).filter(|&b| !self.has_block(s, b)).collect()
    }

    /// Records one plain block; completing the set completes the segment.
    pub fn insert_block(&mut self, s: SegmentId, block: u16, net: &NetInfo) -> bool {
        if (s as usize) >= self.n_segments() || (block as usize) >= self.m() || self.is_complete(s) {
            return false;
        }
        let m = self.m();
        let set = self.blocks[s as usize].get_or_insert_with(|| SegmentSet::new(m));
        let new = set.insert(block as SegmentId);
        if set.is_full() {
            self.blocks[s as usize] = None;
            self.set_downloaded(s, net);
        }
        new
    }

    /// Segments completed since the last call.
    pub fn take_fresh(&mut self) -> Vec<SegmentId> {
        std::mem::take(&mut self.fresh)
    }

    /// Decoded bytes of `s` when real payloads are carried.
    pub fn decoded(&self, s: SegmentId) -> Option<Vec<u8>> {
        if self.mode != PayloadMode::Full || !self.is_complete(s) {
            return None;
        }
        let packets = self.decoders[s as usize].as_ref()?.extract().ok()?;
        let generation = Generation { segment_id: s, params: self.params, packets, byte_len: self.seg_lens[s as usize] };
        Some(generation.to_bytes())
    }
}
