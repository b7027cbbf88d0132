//! Plain pull baseline: have/bitfield announcements, piece requests, and
//! piece transfers addressed to one requester at a time.
//!
//! Overheard pieces are never credited: a plain block is only taken from a
//! transfer addressed to the receiving device.

use std::collections::{BTreeMap, VecDeque};

use crate::rlnc::SegmentId;
use crate::sim::{Body, Ctx, Dest, Message, SegmentSet};

use super::store::SegmentStore;
use super::{Pending, RecoveryConfig};

pub struct BtPull {
    recovery: RecoveryConfig,
    peer_holdings: Vec<SegmentSet>,
    pending: BTreeMap<SegmentId, Pending>,
    serve_queue: VecDeque<(usize, SegmentId, Vec<u16>)>,
    last_bitfield: f64,
}

impl BtPull {
    pub fn new(recovery: RecoveryConfig, n_devices: usize, n_segments: usize) -> Self {
        Self {
            recovery,
            peer_holdings: vec![SegmentSet::new(n_segments); n_devices],
            pending: BTreeMap::new(),
            serve_queue: VecDeque::new(),
            last_bitfield: f64::NEG_INFINITY,
        }
    }

    fn send_bitfield(&mut self, ctx: &mut Ctx, store: &SegmentStore) {
        self.last_bitfield = ctx.now();
        if store.holdings().count() == 0 {
            return;
        }
        for &j in ctx.neighbors() {
            ctx.send(Dest::Unicast(j), Body::Bitfield { holdings: store.holdings().clone() });
        }
    }

    pub fn on_start(&mut self, ctx: &mut Ctx, store: &SegmentStore) {
        self.send_bitfield(ctx, store);
    }

    /// A segment became complete locally, however it arrived.
    pub fn on_acquired(&mut self, ctx: &mut Ctx, s: SegmentId) {
        self.pending.remove(&s);
        for &j in ctx.neighbors() {
            ctx.send(Dest::Unicast(j), Body::Have { segment: s });
        }
    }

    fn request(&mut self, ctx: &mut Ctx, store: &SegmentStore, s: SegmentId, peer: usize, attempts: u32) {
        let blocks = store.missing_blocks(s);
        if blocks.is_empty() || peer == ctx.me() {
            return;
        }
        ctx.log_pair("piece_request", Some(s), Some(peer), blocks.len() as i64, attempts as i64);
        ctx.send(Dest::Unicast(peer), Body::PieceRequest { segment: s, blocks });
        self.pending.insert(s, Pending { peer, last_activity: ctx.now(), attempts });
    }

    fn want(&mut self, ctx: &mut Ctx, store: &SegmentStore, s: SegmentId, peer: usize) {
        if !store.is_complete(s) && !self.pending.contains_key(&s) {
            self.request(ctx, store, s, peer, 0);
        }
    }

    pub fn on_message(&mut self, ctx: &mut Ctx, store: &mut SegmentStore, msg: &Message, addressed: bool) {
        if !addressed {
            return;
        }
        match &msg.body {
            Body::Have { segment } => {
                self.peer_holdings[msg.src].insert(*segment);
                self.want(ctx, store, *segment, msg.src);
            }
            Body::Bitfield { holdings } => {
                self.peer_holdings[msg.src] = holdings.clone();
                for s in holdings.iter() {
                    self.want(ctx, store, s, msg.src);
                }
            }
            Body::PieceRequest { segment, blocks } => {
                if !store.is_complete(*segment) {
                    return;
                }
                match self.serve_queue.iter_mut().find(|e| e.0 == msg.src && e.1 == *segment) {
                    Some(e) => e.2 = blocks.clone(),
                    None => self.serve_queue.push_back((msg.src, *segment, blocks.clone())),
                }
                if ctx.tx_idle() {
                    self.serve(ctx);
                }
            }
            Body::Piece { segment, block } => {
                let was_complete = store.is_complete(*segment);
                store.insert_block(*segment, *block, ctx.net);
                if let Some(p) = self.pending.get_mut(segment) {
                    p.last_activity = ctx.now();
                }
                if !was_complete && store.is_complete(*segment) {
                    self.on_acquired(ctx, *segment);
                }
            }
            _ => {}
        }
    }

    pub fn serve(&mut self, ctx: &mut Ctx) {
        if let Some((requester, s, blocks)) = self.serve_queue.pop_front() {
            ctx.log_pair("serve_pieces", Some(s), Some(requester), blocks.len() as i64, 0);
            for block in blocks {
                ctx.send(Dest::Unicast(requester), Body::Piece { segment: s, block });
            }
        }
    }

    pub fn on_tx_idle(&mut self, ctx: &mut Ctx) {
        self.serve(ctx);
    }

    pub fn on_tick(&mut self, ctx: &mut Ctx, store: &SegmentStore) {
        let now = ctx.now();
        if now - self.last_bitfield >= self.recovery.heartbeat {
            self.send_bitfield(ctx, store);
        }
        let due: Vec<(SegmentId, Pending)> = self
            .pending
            .iter()
            .filter(|(_, p)| p.due(now, self.recovery.timeout))
            .map(|(&s, &p)| (s, p))
            .collect();
        for (s, p) in due {
            if store.is_complete(s) {
                self.pending.remove(&s);
                continue;
            }
            let holders: Vec<usize> = ctx
                .neighbors()
                .iter()
                .copied()
                .filter(|&q| self.peer_holdings[q].contains(s))
                .collect();
            let peer = if holders.is_empty() { p.peer } else { holders[(p.attempts as usize + 1) % holders.len()] };
            self.request(ctx, store, s, peer, p.attempts + 1);
        }
        if ctx.tx_idle() {
            self.serve(ctx);
        }
    }
}
