//! Coded pull dissemination with an initial push.
//!
//! A device that fetched a segment over cellular sends `m` coded packets of
//! it to one random neighbor (everyone else overhears), then advertises it.
//! Devices still short of full rank ask the advertiser for exactly the
//! missing dimensions; a holder answers all requests for one segment with
//! the largest requested count, then notifies each requester.

use std::collections::BTreeMap;

use rand::Rng;

use crate::rlnc::{CodedPacket, DecoderState, SegmentId};
use crate::sim::{Body, Ctx, Dest, Message, SegmentSet};

use super::store::SegmentStore;
use super::{Pending, RecoveryConfig};

/// Requests waiting to be served, at most one per (requester, segment).
/// Segments closer to the playback head (lower index) are served first.
#[derive(Debug, Clone, Default)]
pub struct RequestQueue {
    by_segment: BTreeMap<SegmentId, Vec<(usize, usize)>>,
}

impl RequestQueue {
    /// A repeat request from the same requester replaces the earlier one.
    pub fn insert(&mut self, requester: usize, segment: SegmentId, dims: usize) {
        let entry = self.by_segment.entry(segment).or_default();
        match entry.iter_mut().find(|(r, _)| *r == requester) {
            Some(e) => e.1 = dims,
            None => entry.push((requester, dims)),
        }
    }

    /// Highest-priority segment with all its requesters, in arrival order.
    pub fn pop(&mut self) -> Option<(SegmentId, Vec<(usize, usize)>)> {
        self.by_segment.pop_first()
    }

    pub fn len(&self) -> usize {
        self.by_segment.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_segment.is_empty()
    }
}

pub struct Mncp2 {
    recovery: RecoveryConfig,
    advert_dirty: bool,
    last_advert: f64,
    peer_holdings: Vec<SegmentSet>,
    pending: BTreeMap<SegmentId, Pending>,
    queue: RequestQueue,
}

impl Mncp2 {
    pub fn new(recovery: RecoveryConfig, n_devices: usize, n_segments: usize) -> Self {
        Self {
            recovery,
            advert_dirty: false,
            last_advert: f64::NEG_INFINITY,
            peer_holdings: vec![SegmentSet::new(n_segments); n_devices],
            pending: BTreeMap::new(),
            queue: RequestQueue::default(),
        }
    }

    pub fn queue(&self) -> &RequestQueue {
        &self.queue
    }

    pub fn on_downloaded(&mut self, ctx: &mut Ctx, store: &SegmentStore, s: SegmentId) {
        let neighbors = ctx.neighbors();
        if !neighbors.is_empty() {
            let target = neighbors[ctx.rng.gen_range(0..neighbors.len())];
            let m = store.m();
            ctx.log("push", Some(s), Some(target), m as i64);
            // redraw dependent combinations so the push alone spans the segment
            let mut spanned = DecoderState::symbolic(s, m);
            while !spanned.is_complete() {
                let packet = store.recode(s, ctx.rng).expect("downloaded segment has full rank");
                let coefficients = CodedPacket { segment_id: s, coefficients: packet.coefficients.clone(), payload: Vec::new() };
                if spanned.insert(&coefficients).expect("same segment and shape") {
                    ctx.send(Dest::Unicast(target), Body::CodedData { packet });
                }
            }
        }
        self.advert_dirty = true;
        self.pending.remove(&s);
    }

    fn request(&mut self, ctx: &mut Ctx, store: &SegmentStore, s: SegmentId, peer: usize, attempts: u32) {
        let rank = store.rank(s);
        let dims = store.m() - rank;
        if dims == 0 || peer == ctx.me() {
            return;
        }
        ctx.log_pair("request", Some(s), Some(peer), dims as i64, rank as i64);
        ctx.send(Dest::Unicast(peer), Body::Request { segment: s, dims });
        self.pending.insert(s, Pending { peer, last_activity: ctx.now(), attempts });
    }

    pub fn on_message(&mut self, ctx: &mut Ctx, store: &mut SegmentStore, msg: &Message, addressed: bool) {
        match &msg.body {
            Body::CodedData { packet } => {
                let s = packet.segment_id;
                store.insert_coded(packet);
                if store.is_complete(s) {
                    self.pending.remove(&s);
                } else if let Some(p) = self.pending.get_mut(&s) {
                    p.last_activity = ctx.now();
                }
            }
            Body::Advertisement { holdings } => {
                self.peer_holdings[msg.src] = holdings.clone();
                let wanted: Vec<SegmentId> =
                    holdings.iter().filter(|&s| !store.is_complete(s) && !self.pending.contains_key(&s)).collect();
                for s in wanted {
                    self.request(ctx, store, s, msg.src, 0);
                }
            }
            Body::Notification { segment } if addressed => {
                self.peer_holdings[msg.src].insert(*segment);
                self.pending.remove(segment);
                self.request(ctx, store, *segment, msg.src, 0);
            }
            Body::Request { segment, dims } if addressed => {
                if store.is_complete(*segment) {
                    self.queue.insert(msg.src, *segment, *dims);
                    if ctx.tx_idle() {
                        self.serve(ctx, store);
                    }
                }
            }
            _ => {}
        }
    }

    /// Serves one segment's coalesced requests.
    pub fn serve(&mut self, ctx: &mut Ctx, store: &SegmentStore) {
        while let Some((s, reqs)) = self.queue.pop() {
            let d = reqs.iter().map(|r| r.1).max().unwrap_or(0).min(store.m());
            if d == 0 {
                continue;
            }
            let first = reqs[0].0;
            for &(r, dims) in &reqs {
                ctx.log("serve_request", Some(s), Some(r), dims as i64);
            }
            ctx.log_pair("serve", Some(s), Some(first), d as i64, reqs.len() as i64);
            for _ in 0..d {
                let packet = store.recode(s, ctx.rng).expect("served segments are complete");
                ctx.send(Dest::Unicast(first), Body::CodedData { packet });
            }
            for &(r, _) in &reqs {
                ctx.send(Dest::Unicast(r), Body::Notification { segment: s });
            }
            return;
        }
    }

    pub fn on_tx_idle(&mut self, ctx: &mut Ctx, store: &SegmentStore) {
        self.serve(ctx, store);
    }

    pub fn on_tick(&mut self, ctx: &mut Ctx, store: &SegmentStore) {
        let now = ctx.now();
        let heartbeat_due = now - self.last_advert >= self.recovery.heartbeat && store.holdings().count() > 0;
        if (self.advert_dirty || heartbeat_due) && !ctx.neighbors().is_empty() {
            self.advert_dirty = false;
            self.last_advert = now;
            ctx.send(Dest::Broadcast, Body::Advertisement { holdings: store.holdings().clone() });
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
            let holders: Vec<usize> = (0..self.peer_holdings.len())
                .filter(|&q| q != ctx.me() && self.peer_holdings[q].contains(s))
                .collect();
            let peer = if holders.is_empty() { p.peer } else { holders[(p.attempts as usize + 1) % holders.len()] };
            ctx.log("rerequest", Some(s), Some(peer), p.attempts as i64 + 1);
            self.request(ctx, store, s, peer, p.attempts + 1);
        }

        if ctx.tx_idle() && !self.queue.is_empty() {
            self.serve(ctx, store);
        }
    }
}
