//! Segment-to-device assignment for the cellular side.
//!
//! The initiating device hands each next segment to the device with the
//! smallest backlog of assigned-but-unfinished segments, as long as that
//! backlog is below `K`. Failed segments go back on the list, so a device
//! with a bad link never traps a segment for long.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::rlnc::SegmentId;
use crate::sim::{Body, Ctx, Dest, FeedbackStatus, Message};

use super::store::SegmentStore;

/// The assignment loop itself, free of any messaging.
#[derive(Debug, Clone)]
pub struct Scheduler {
    k: usize,
    devices: Vec<usize>,
    unassigned: VecDeque<SegmentId>,
    backlog: BTreeMap<usize, Vec<SegmentId>>,
}

impl Scheduler {
    /// `devices` are the ids eligible for assignments, in tie-break order.
    pub fn new(n_segments: usize, devices: Vec<usize>, k: usize) -> Self {
        let backlog = devices.iter().map(|&d| (d, Vec::new())).collect();
        Self { k, devices, unassigned: (0..n_segments as SegmentId).collect(), backlog }
    }

    pub fn backlog(&self, device: usize) -> usize {
        self.backlog.get(&device).map_or(0, Vec::len)
    }

    pub fn unassigned(&self) -> impl Iterator<Item = SegmentId> + '_ {
        self.unassigned.iter().copied()
    }

    /// Puts segments straight into a device's backlog, bypassing the list.
    pub fn preload(&mut self, device: usize, segments: &[SegmentId]) {
        self.unassigned.retain(|s| !segments.contains(s));
        self.backlog.entry(device).or_default().extend_from_slice(segments);
    }

    /// Device with the smallest backlog, lowest id on ties.
    pub fn least_loaded(&self) -> Option<usize> {
        self.devices.iter().copied().min_by_key(|&d| self.backlog(d))
    }

    fn assign_to(&mut self, device: usize) -> Option<(usize, SegmentId)> {
        let s = self.unassigned.pop_front()?;
        self.backlog.entry(device).or_default().push(s);
        Some((device, s))
    }

    /// Assigns until the list is empty or every device is at `K`.
    pub fn fill(&mut self) -> Vec<(usize, SegmentId)> {
        let mut out = Vec::new();
        while !self.unassigned.is_empty() {
            let Some(d) = self.least_loaded() else { break };
            if self.backlog(d) >= self.k {
                break;
            }
            out.extend(self.assign_to(d));
        }
        out
    }

    fn remove(&mut self, device: usize, segment: SegmentId) -> bool {
        let Some(b) = self.backlog.get_mut(&device) else { return false };
        match b.iter().position(|&s| s == segment) {
            Some(i) => {
                b.remove(i);
                true
            }
            None => false,
        }
    }

    pub fn on_done(&mut self, device: usize, segment: SegmentId) -> Vec<(usize, SegmentId)> {
        self.remove(device, segment);
        self.fill()
    }

    /// The reporting device gets the next segment first; the failed one
    /// goes to the back of the list.
    pub fn on_failed(&mut self, device: usize, segment: SegmentId) -> Vec<(usize, SegmentId)> {
        if !self.remove(device, segment) {
            return self.fill();
        }
        let mut out: Vec<_> = self.assign_to(device).into_iter().collect();
        self.unassigned.push_back(segment);
        out.extend(self.fill());
        out
    }

    pub fn is_drained(&self) -> bool {
        self.unassigned.is_empty() && self.backlog.values().all(Vec::is_empty)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroDownloadConfig {
    pub backlog_k: usize,
    /// A segment download still running after this long counts as failed.
    pub download_timeout: f64,
    /// Unanswered assignments are re-sent after this long.
    pub resend_after: f64,
}

impl Default for MicroDownloadConfig {
    fn default() -> Self {
        Self { backlog_k: 3, download_timeout: 2.0, resend_after: 2.0 }
    }
}

struct Outstanding {
    device: usize,
    segment: SegmentId,
    last_heard: f64,
}

struct Initiator {
    sched: Scheduler,
    outstanding: BTreeMap<u64, Outstanding>,
    next_id: u64,
}

#[derive(Default)]
struct Worker {
    queue: VecDeque<(SegmentId, u64)>,
    current: Option<(SegmentId, u64, u64)>,
    statuses: HashMap<u64, FeedbackStatus>,
    next_token: u64,
}

type Feedback = (u64, SegmentId, FeedbackStatus);

impl Worker {
    fn start_next(&mut self, ctx: &mut Ctx, store: &SegmentStore, timeout: f64) -> Vec<Feedback> {
        let mut done = Vec::new();
        if self.current.is_some() {
            return done;
        }
        while let Some((s, id)) = self.queue.pop_front() {
            if store.is_complete(s) {
                self.statuses.insert(id, FeedbackStatus::Done);
                done.push((id, s, FeedbackStatus::Done));
                continue;
            }
            self.next_token += 1;
            self.current = Some((s, id, self.next_token));
            ctx.start_download(s);
            ctx.set_timer(timeout, self.next_token);
            break;
        }
        done
    }

    fn finish(&mut self, status: FeedbackStatus) -> Option<Feedback> {
        let (s, id, _) = self.current.take()?;
        self.statuses.insert(id, status);
        Some((id, s, status))
    }
}

/// One device's share of the MicroDownload protocol: every cellular device
/// runs a worker, the initiator additionally runs the scheduler.
pub struct MicroDownload {
    cfg: MicroDownloadConfig,
    initiator_id: usize,
    initiator: Option<Initiator>,
    worker: Option<Worker>,
}

impl MicroDownload {
    pub fn new(cfg: MicroDownloadConfig, me: usize, initiator_id: usize, has_cellular: &[bool], n_segments: usize) -> Self {
        let initiator = (me == initiator_id).then(|| {
            let devices = (0..has_cellular.len()).filter(|&d| has_cellular[d]).collect();
            Initiator { sched: Scheduler::new(n_segments, devices, cfg.backlog_k), outstanding: BTreeMap::new(), next_id: 0 }
        });
        let worker = has_cellular[me].then(Worker::default);
        Self { cfg, initiator_id, initiator, worker }
    }

    pub fn on_start(&mut self, ctx: &mut Ctx, store: &SegmentStore) {
        if let Some(init) = &mut self.initiator {
            let a = init.sched.fill();
            self.pump(ctx, store, a.into(), VecDeque::new());
        }
    }

    /// Runs assignments and feedback to a fixed point. Self-assignments and
    /// self-feedback short-circuit; everything else becomes a message.
    fn pump(&mut self, ctx: &mut Ctx, store: &SegmentStore, mut assigns: VecDeque<(usize, SegmentId)>, mut fbs: VecDeque<Feedback>) {
        let me = ctx.me();
        loop {
            if let Some((d, s)) = assigns.pop_front() {
                let init = self.initiator.as_mut().expect("only the initiator assigns");
                let id = init.next_id;
                init.next_id += 1;
                init.outstanding.insert(id, Outstanding { device: d, segment: s, last_heard: ctx.now() });
                ctx.log("assign", Some(s), Some(d), id as i64);
                if d == me {
                    let w = self.worker.as_mut().expect("initiator only assigns itself with cellular");
                    w.statuses.insert(id, FeedbackStatus::Accepted);
                    w.queue.push_back((s, id));
                    fbs.extend(w.start_next(ctx, store, self.cfg.download_timeout));
                } else {
                    ctx.send(Dest::Unicast(d), Body::Assign { segment: s, assignment: id });
                }
            } else if let Some((id, s, status)) = fbs.pop_front() {
                if self.initiator.is_some() {
                    assigns.extend(self.on_feedback(ctx, me, id, status));
                } else {
                    ctx.send(Dest::Unicast(self.initiator_id), Body::Feedback { segment: s, assignment: id, status });
                }
            } else {
                break;
            }
        }
    }

    fn on_feedback(&mut self, ctx: &mut Ctx, from: usize, id: u64, status: FeedbackStatus) -> Vec<(usize, SegmentId)> {
        let init = self.initiator.as_mut().expect("feedback goes to the initiator");
        let Some(o) = init.outstanding.get_mut(&id) else { return Vec::new() };
        if o.device != from {
            return Vec::new();
        }
        match status {
            FeedbackStatus::Accepted => {
                o.last_heard = ctx.now();
                Vec::new()
            }
            FeedbackStatus::Done => {
                let o = init.outstanding.remove(&id).expect("present");
                init.sched.on_done(o.device, o.segment)
            }
            FeedbackStatus::Failed => {
                let o = init.outstanding.remove(&id).expect("present");
                ctx.log("assignment_failed", Some(o.segment), Some(o.device), id as i64);
                init.sched.on_failed(o.device, o.segment)
            }
        }
    }

    pub fn on_message(&mut self, ctx: &mut Ctx, store: &SegmentStore, msg: &Message, addressed: bool) {
        if !addressed {
            return;
        }
        match msg.body {
            Body::Assign { segment, assignment } if msg.src == self.initiator_id => {
                let Some(w) = self.worker.as_mut() else { return };
                if let Some(&status) = w.statuses.get(&assignment) {
                    // repeated assignment: just restate where it stands
                    ctx.send(Dest::Unicast(msg.src), Body::Feedback { segment, assignment, status });
                    return;
                }
                w.statuses.insert(assignment, FeedbackStatus::Accepted);
                w.queue.push_back((segment, assignment));
                ctx.send(Dest::Unicast(msg.src), Body::Feedback { segment, assignment, status: FeedbackStatus::Accepted });
                let fbs = w.start_next(ctx, store, self.cfg.download_timeout);
                self.pump(ctx, store, VecDeque::new(), fbs.into());
            }
            Body::Feedback { assignment, status, .. } if self.initiator.is_some() => {
                let a = self.on_feedback(ctx, msg.src, assignment, status);
                self.pump(ctx, store, a.into(), VecDeque::new());
            }
            _ => {}
        }
    }

    pub fn on_cellular(&mut self, ctx: &mut Ctx, store: &SegmentStore, segment: SegmentId, ok: bool) {
        let Some(w) = self.worker.as_mut() else { return };
        if w.current.map(|c| c.0) != Some(segment) {
            return;
        }
        let status = if ok { FeedbackStatus::Done } else { FeedbackStatus::Failed };
        let mut fbs: VecDeque<Feedback> = w.finish(status).into_iter().collect();
        fbs.extend(w.start_next(ctx, store, self.cfg.download_timeout));
        self.pump(ctx, store, VecDeque::new(), fbs);
    }

    pub fn on_timer(&mut self, ctx: &mut Ctx, store: &SegmentStore, token: u64) {
        let Some(w) = self.worker.as_mut() else { return };
        if w.current.map(|c| c.2) != Some(token) {
            return;
        }
        ctx.abort_download();
        let mut fbs: VecDeque<Feedback> = w.finish(FeedbackStatus::Failed).into_iter().collect();
        fbs.extend(w.start_next(ctx, store, self.cfg.download_timeout));
        self.pump(ctx, store, VecDeque::new(), fbs);
    }

    pub fn on_tick(&mut self, ctx: &mut Ctx) {
        let me = ctx.me();
        let Some(init) = &mut self.initiator else { return };
        for (&id, o) in init.outstanding.iter_mut() {
            if o.device != me && ctx.now() - o.last_heard >= self.cfg.resend_after {
                o.last_heard = ctx.now();
                ctx.send(Dest::Unicast(o.device), Body::Assign { segment: o.segment, assignment: id });
            }
        }
    }

    /// Scheduler state on the initiator, for inspection.
    pub fn scheduler(&self) -> Option<&Scheduler> {
        self.initiator.as_ref().map(|i| &i.sched)
    }
}

/// Fixed download order with retry-in-place on failure: either an equal
/// contiguous share per cellular device, or the whole file.
pub struct Sequential {
    segments: Vec<SegmentId>,
    next: usize,
    active: Option<SegmentId>,
}

impl Sequential {
    /// The `rank`-th of `parts` contiguous, equal shares of the file.
    pub fn share(n_segments: usize, rank: usize, parts: usize) -> Self {
        let lo = rank * n_segments / parts;
        let hi = (rank + 1) * n_segments / parts;
        Self { segments: (lo as SegmentId..hi as SegmentId).collect(), next: 0, active: None }
    }

    pub fn whole(n_segments: usize) -> Self {
        Self::share(n_segments, 0, 1)
    }

    pub fn segments(&self) -> &[SegmentId] {
        &self.segments
    }

    fn advance(&mut self, ctx: &mut Ctx, store: &SegmentStore) {
        while self.next < self.segments.len() && store.is_complete(self.segments[self.next]) {
            self.next += 1;
        }
        if let Some(&s) = self.segments.get(self.next) {
            self.active = Some(s);
            ctx.start_download(s);
        }
    }

    pub fn on_start(&mut self, ctx: &mut Ctx, store: &SegmentStore) {
        if ctx.net.has_cellular[ctx.me()] {
            self.advance(ctx, store);
        }
    }

    pub fn on_cellular(&mut self, ctx: &mut Ctx, store: &SegmentStore, segment: SegmentId, ok: bool) {
        if self.active != Some(segment) {
            return;
        }
        self.active = None;
        if ok {
            self.next += 1;
        }
        self.advance(ctx, store);
    }
}
