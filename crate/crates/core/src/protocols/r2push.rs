//! Coded push baseline: devices forward random recombinations to every
//! neighbor as soon as their rank grows, a few beyond their rank, until that
//! neighbor reports it has decoded (a brake).
//!
//! Pushes already queued on the medium cannot be recalled, so brakes that
//! arrive late cost traffic.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::rlnc::SegmentId;
use crate::sim::{Body, Ctx, Dest, Message, SegmentSet};

use super::store::SegmentStore;
use super::RecoveryConfig;

/// Extra combinations per neighbor stream beyond the sender's rank.
pub fn redundancy_extra(redundancy: f64, m: usize) -> usize {
    // round first so 0.03 * 100 does not become 4 through float error
    let scaled = (redundancy * m as f64 * 1e9).round() / 1e9;
    scaled.ceil() as usize
}

struct Stall {
    last_progress: f64,
    last_request: f64,
    attempts: usize,
}

pub struct R2Push {
    recovery: RecoveryConfig,
    extra: usize,
    pushed: HashMap<(SegmentId, usize), usize>,
    braked: BTreeSet<(SegmentId, usize)>,
    holders: Vec<SegmentSet>,
    stalls: BTreeMap<SegmentId, Stall>,
}

impl R2Push {
    pub fn new(recovery: RecoveryConfig, redundancy: f64, m: usize, n_devices: usize, n_segments: usize) -> Self {
        Self {
            recovery,
            extra: redundancy_extra(redundancy, m),
            pushed: HashMap::new(),
            braked: BTreeSet::new(),
            holders: vec![SegmentSet::new(n_segments); n_devices],
            stalls: BTreeMap::new(),
        }
    }

    pub fn extra(&self) -> usize {
        self.extra
    }

    fn push(&mut self, ctx: &mut Ctx, store: &SegmentStore, s: SegmentId) {
        let rank = store.rank(s);
        if rank == 0 {
            return;
        }
        let allowed = rank + self.extra;
        for &j in ctx.neighbors() {
            if self.braked.contains(&(s, j)) {
                continue;
            }
            let sent = self.pushed.entry((s, j)).or_insert(0);
            if *sent >= allowed {
                continue;
            }
            let count = allowed - *sent;
            *sent = allowed;
            ctx.log_pair("r2_push", Some(s), Some(j), allowed as i64, rank as i64);
            for _ in 0..count {
                let packet = store.recode(s, ctx.rng).expect("rank is positive");
                ctx.send(Dest::Unicast(j), Body::CodedData { packet });
            }
        }
    }

    fn on_decoded(&mut self, ctx: &mut Ctx, store: &SegmentStore, s: SegmentId) {
        self.stalls.remove(&s);
        for &j in ctx.neighbors() {
            ctx.send(Dest::Unicast(j), Body::Brake { segment: s });
        }
        self.push(ctx, store, s);
    }

    pub fn on_downloaded(&mut self, ctx: &mut Ctx, store: &SegmentStore, s: SegmentId) {
        self.on_decoded(ctx, store, s);
    }

    fn note_holder(&mut self, ctx: &Ctx, s: SegmentId, peer: usize, store: &SegmentStore) {
        self.holders[peer].insert(s);
        if !store.is_complete(s) {
            self.stalls.entry(s).or_insert(Stall { last_progress: ctx.now(), last_request: f64::NEG_INFINITY, attempts: 0 });
        }
    }

    pub fn on_message(&mut self, ctx: &mut Ctx, store: &mut SegmentStore, msg: &Message, addressed: bool) {
        match &msg.body {
            Body::CodedData { packet } => {
                let s = packet.segment_id;
                self.note_holder(ctx, s, msg.src, store);
                let was_complete = store.is_complete(s);
                if !store.insert_coded(packet) {
                    return;
                }
                if let Some(st) = self.stalls.get_mut(&s) {
                    st.last_progress = ctx.now();
                }
                if !was_complete && store.is_complete(s) {
                    self.on_decoded(ctx, store, s);
                } else {
                    self.push(ctx, store, s);
                }
            }
            Body::Brake { segment } => {
                // accepted even when overheard
                self.note_holder(ctx, *segment, msg.src, store);
                if self.braked.insert((*segment, msg.src)) {
                    ctx.log("r2_brake_rx", Some(*segment), Some(msg.src), 0);
                }
            }
            Body::Request { segment, dims } if addressed => {
                let rank = store.rank(*segment);
                if rank == 0 {
                    return;
                }
                let grant = dims + self.extra;
                ctx.log_pair("r2_grant", Some(*segment), Some(msg.src), grant as i64, rank as i64);
                for _ in 0..grant {
                    let packet = store.recode(*segment, ctx.rng).expect("rank is positive");
                    ctx.send(Dest::Unicast(msg.src), Body::CodedData { packet });
                }
            }
            _ => {}
        }
    }

    /// Asks a known holder for segments that stopped making progress.
    pub fn on_tick(&mut self, ctx: &mut Ctx, store: &SegmentStore) {
        let now = ctx.now();
        let timeout = self.recovery.timeout;
        let me = ctx.me();
        let mut asks = Vec::new();
        for (&s, st) in self.stalls.iter_mut() {
            if store.is_complete(s) || now - st.last_progress < timeout || now - st.last_request < timeout {
                continue;
            }
            let holders: Vec<usize> =
                (0..self.holders.len()).filter(|&q| q != me && self.holders[q].contains(s)).collect();
            let pool = if holders.is_empty() { ctx.neighbors().to_vec() } else { holders };
            if pool.is_empty() {
                continue;
            }
            let peer = pool[st.attempts % pool.len()];
            st.attempts += 1;
            st.last_request = now;
            asks.push((s, peer));
        }
        for (s, peer) in asks {
            let dims = store.m() - store.rank(s);
            ctx.log_pair("request", Some(s), Some(peer), dims as i64, store.rank(s) as i64);
            ctx.send(Dest::Unicast(peer), Body::Request { segment: s, dims });
        }
        self.stalls.retain(|&s, _| !store.is_complete(s));
    }
}
