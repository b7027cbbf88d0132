//! Event loop: cellular downloads, the shared local medium, timers, and
//! per-device protocol callbacks.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::SimError;
use crate::rlnc::{split_file, Generation, GenerationParams, SegmentId};

use super::config::{Mode, PayloadMode, SimConfig};
use super::message::{Body, Dest, Message, MessageKind, MessageSizes, SegmentSet};
use super::meter::TrafficMeter;
use super::metrics::Metrics;

/// Static facts about the run that every device may consult.
#[derive(Debug)]
pub struct NetInfo {
    pub n_devices: usize,
    pub neighbors: Vec<Vec<usize>>,
    pub params: GenerationParams,
    pub n_segments: usize,
    pub payload_mode: PayloadMode,
    pub has_cellular: Vec<bool>,
    pub mode: Mode,
    pub ap_device: usize,
    source: Option<Vec<Generation>>,
}

impl NetInfo {
    /// Builds the shared view of `cfg`; in [`PayloadMode::Full`] this also
    /// generates the file contents from the seed.
    pub fn from_config(cfg: &SimConfig) -> Self {
        let n = cfg.n_devices();
        let n_segments = cfg.n_segments();
        let source = match cfg.payload_mode {
            PayloadMode::Symbolic => None,
            PayloadMode::Full => {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(u64::MAX);
                let mut data = vec![0u8; cfg.file_bytes];
                rng.fill(data.as_mut_slice());
                Some(split_file(&data, cfg.params))
            }
        };
        NetInfo {
            n_devices: n,
            neighbors: (0..n).map(|d| cfg.neighbors(d)).collect(),
            params: cfg.params,
            n_segments,
            payload_mode: cfg.payload_mode,
            has_cellular: cfg.devices.iter().map(|d| d.cellular.is_some()).collect(),
            mode: cfg.mode,
            ap_device: cfg.ap_device,
            source,
        }
    }

    /// The original segment, available in [`PayloadMode::Full`] runs to
    /// devices that just downloaded it.
    pub fn source_generation(&self, s: SegmentId) -> Option<&Generation> {
        self.source.as_ref().map(|g| &g[s as usize])
    }
}

/// Effects a callback asks the engine to carry out.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Send { dst: Dest, body: Body },
    StartDownload { segment: SegmentId },
    AbortDownload,
    SetTimer { delay: f64, tag: u64 },
    SegmentComplete(SegmentId),
    Log { kind: &'static str, segment: Option<SegmentId>, peer: Option<usize>, value: i64, aux: i64 },
}

/// Handle passed to device callbacks.
pub struct Ctx<'a> {
    now: f64,
    me: usize,
    tx_idle: bool,
    pub rng: &'a mut ChaCha8Rng,
    pub net: &'a NetInfo,
    actions: &'a mut Vec<Action>,
}

impl<'a> Ctx<'a> {
    pub fn new(now: f64, me: usize, tx_idle: bool, rng: &'a mut ChaCha8Rng, net: &'a NetInfo, actions: &'a mut Vec<Action>) -> Self {
        Self { now, me, tx_idle, rng, net, actions }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn me(&self) -> usize {
        self.me
    }

    pub fn neighbors(&self) -> &'a [usize] {
        &self.net.neighbors[self.me]
    }

    pub fn params(&self) -> GenerationParams {
        self.net.params
    }

    pub fn m(&self) -> usize {
        self.net.params.m()
    }

    pub fn n_segments(&self) -> usize {
        self.net.n_segments
    }

    /// True while this device has nothing waiting for or on the medium,
    /// including anything sent earlier in this callback.
    pub fn tx_idle(&self) -> bool {
        self.tx_idle && !self.actions.iter().any(|a| matches!(a, Action::Send { .. }))
    }

    pub fn send(&mut self, dst: Dest, body: Body) {
        self.actions.push(Action::Send { dst, body });
    }

    pub fn start_download(&mut self, segment: SegmentId) {
        self.actions.push(Action::StartDownload { segment });
    }

    pub fn abort_download(&mut self) {
        self.actions.push(Action::AbortDownload);
    }

    pub fn set_timer(&mut self, delay: f64, tag: u64) {
        self.actions.push(Action::SetTimer { delay, tag });
    }

    pub fn complete(&mut self, segment: SegmentId) {
        self.actions.push(Action::SegmentComplete(segment));
    }

    pub fn log(&mut self, kind: &'static str, segment: Option<SegmentId>, peer: Option<usize>, value: i64) {
        self.log_pair(kind, segment, peer, value, 0);
    }

    pub fn log_pair(&mut self, kind: &'static str, segment: Option<SegmentId>, peer: Option<usize>, value: i64, aux: i64) {
        self.actions.push(Action::Log { kind, segment, peer, value, aux });
    }

    pub fn actions(&self) -> &[Action] {
        self.actions
    }
}

/// Per-device protocol logic driven by the engine.
pub trait Behavior {
    fn on_start(&mut self, ctx: &mut Ctx);
    /// A frame arrived. `addressed` is false for overheard unicast frames.
    fn on_message(&mut self, ctx: &mut Ctx, msg: &Message, addressed: bool);
    /// A cellular segment download finished; `ok` is false on failure.
    fn on_cellular(&mut self, ctx: &mut Ctx, segment: SegmentId, ok: bool);
    fn on_timer(&mut self, ctx: &mut Ctx, tag: u64);
    fn on_tick(&mut self, ctx: &mut Ctx);
    /// The device's last queued frame has left the medium.
    fn on_tx_idle(&mut self, ctx: &mut Ctx);
    /// Decoded bytes of segment `s`, when the device holds real payloads.
    fn decoded_segment(&self, _s: SegmentId) -> Option<Vec<u8>> {
        None
    }
}

/// One line of the optional event log.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub t: f64,
    pub device: usize,
    pub kind: String,
    pub segment: Option<SegmentId>,
    pub bytes: usize,
    pub peer: Option<usize>,
    pub value: i64,
    pub aux: i64,
}

impl LogRecord {
    pub fn csv_line(&self) -> String {
        let seg = self.segment.map_or(String::new(), |s| s.to_string());
        format!("{:.6},{},{},{},{}", self.t, self.device, self.kind, seg, self.bytes)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Event {
    Start,
    Tick,
    CellularDone { device: usize, attempt: u64, segment: SegmentId, ok: bool },
    LocalEnd { flight: u64, hop: u8 },
    Timer { device: usize, tag: u64 },
}

struct Scheduled {
    time: f64,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Scheduled {}
impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Scheduled {
    // reversed: BinaryHeap is a max-heap and we want the earliest event
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Flight {
    msg: Message,
    bytes: usize,
    received: Vec<bool>,
}

#[derive(Default, Clone)]
struct Cellular {
    attempt: u64,
    active: Option<SegmentId>,
}

/// Result of a completed (or time-capped) run.
pub struct SimOutcome<B> {
    pub metrics: Metrics,
    pub meter: TrafficMeter,
    pub nodes: Vec<B>,
    pub log: Vec<LogRecord>,
    /// Medium occupation intervals `(start, end)` in order of scheduling.
    pub occupations: Vec<(f64, f64)>,
    pub net: NetInfo,
}

impl<B> SimOutcome<B> {
    pub fn log_csv(&self) -> String {
        let mut out = String::from("t,device,event_kind,segment,bytes\n");
        for r in &self.log {
            let _ = writeln!(out, "{}", r.csv_line());
        }
        out
    }
}

struct Engine<'c, B: Behavior> {
    cfg: &'c SimConfig,
    net: NetInfo,
    sizes: MessageSizes,
    nodes: Vec<B>,
    rngs: Vec<ChaCha8Rng>,
    rng: ChaCha8Rng,
    queue: BinaryHeap<Scheduled>,
    seq: u64,
    now: f64,
    medium_busy_until: f64,
    tx_busy_until: Vec<f64>,
    flights: HashMap<u64, Flight>,
    next_flight: u64,
    cellular: Vec<Cellular>,
    holdings: Vec<SegmentSet>,
    held_anywhere: SegmentSet,
    cellular_done_time: Option<f64>,
    completion: Vec<Option<f64>>,
    meter: TrafficMeter,
    log: Vec<LogRecord>,
    occupations: Vec<(f64, f64)>,
    last_progress: f64,
    events: u64,
}

/// Runs the simulation with one behavior per device.
pub fn run<B: Behavior>(cfg: &SimConfig, nodes: Vec<B>) -> Result<SimOutcome<B>, SimError> {
    cfg.validate()?;
    if nodes.len() != cfg.n_devices() {
        return Err(SimError::InvalidConfig(format!("{} behaviors for {} devices", nodes.len(), cfg.n_devices())));
    }
    let n = cfg.n_devices();
    let n_segments = cfg.n_segments();
    let net = NetInfo::from_config(cfg);
    let rngs = (0..n)
        .map(|d| {
            let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
            r.set_stream(d as u64 + 1);
            r
        })
        .collect();
    let engine = Engine {
        cfg,
        sizes: MessageSizes {
            control: cfg.control_bytes,
            coefficients: cfg.params.m(),
            payload: cfg.params.n(),
            n_segments,
        },
        net,
        nodes,
        rngs,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        queue: BinaryHeap::new(),
        seq: 0,
        now: 0.0,
        medium_busy_until: 0.0,
        tx_busy_until: vec![0.0; n],
        flights: HashMap::new(),
        next_flight: 0,
        cellular: vec![Cellular::default(); n],
        holdings: vec![SegmentSet::new(n_segments); n],
        held_anywhere: SegmentSet::new(n_segments),
        cellular_done_time: None,
        completion: vec![None; n],
        meter: TrafficMeter::new(n),
        log: Vec::new(),
        occupations: Vec::new(),
        last_progress: 0.0,
        events: 0,
    };
    engine.run()
}

impl<B: Behavior> Engine<'_, B> {
    fn schedule(&mut self, time: f64, event: Event) {
        self.seq += 1;
        self.queue.push(Scheduled { time, seq: self.seq, event });
    }

    fn all_complete(&self) -> bool {
        self.completion.iter().all(Option::is_some)
    }

    fn run(mut self) -> Result<SimOutcome<B>, SimError> {
        self.schedule(0.0, Event::Start);
        self.schedule(self.cfg.tick_interval, Event::Tick);
        let mut partial = false;
        while let Some(Scheduled { time, event, .. }) = self.queue.pop() {
            if time > self.cfg.max_sim_time {
                partial = true;
                self.now = self.cfg.max_sim_time;
                break;
            }
            self.now = time;
            self.events += 1;
            self.dispatch(event)?;
            if self.all_complete() {
                break;
            }
            if self.now - self.last_progress > self.cfg.idle_window {
                return Err(self.stall_error());
            }
        }
        if !self.all_complete() {
            partial = true;
        }
        let metrics = Metrics::from_run(
            self.cfg,
            &self.completion,
            &self.meter,
            self.cellular_done_time,
            self.now,
            partial,
            self.events,
        );
        Ok(SimOutcome {
            metrics,
            meter: self.meter,
            nodes: self.nodes,
            log: self.log,
            occupations: self.occupations,
            net: self.net,
        })
    }

    fn stall_error(&self) -> SimError {
        let mut detail = String::new();
        for (d, held) in self.holdings.iter().enumerate() {
            if self.completion[d].is_none() {
                let missing: Vec<SegmentId> = held.missing().take(8).collect();
                let _ = write!(detail, "device {d} missing {} segments (first {:?}); ", held.missing().count(), missing);
            }
        }
        SimError::Stalled { time: self.now, detail: detail.trim_end_matches("; ").to_string() }
    }

    fn callback(&mut self, device: usize, f: impl FnOnce(&mut B, &mut Ctx)) -> Result<(), SimError> {
        let mut actions = Vec::new();
        let tx_idle = self.tx_busy_until[device] <= self.now;
        {
            let mut ctx = Ctx::new(self.now, device, tx_idle, &mut self.rngs[device], &self.net, &mut actions);
            f(&mut self.nodes[device], &mut ctx);
        }
        for action in actions {
            self.apply(device, action)?;
        }
        Ok(())
    }

    fn dispatch(&mut self, event: Event) -> Result<(), SimError> {
        match event {
            Event::Start => {
                for d in 0..self.nodes.len() {
                    self.callback(d, |b, ctx| b.on_start(ctx))?;
                }
            }
            Event::Tick => {
                for d in 0..self.nodes.len() {
                    self.callback(d, |b, ctx| b.on_tick(ctx))?;
                }
                self.schedule(self.now + self.cfg.tick_interval, Event::Tick);
            }
            Event::CellularDone { device, attempt, segment, ok } => {
                if self.cellular[device].attempt != attempt {
                    return Ok(());
                }
                self.cellular[device].active = None;
                if ok {
                    self.meter.record_cellular(device, self.cfg.segment_len(segment as usize));
                    self.last_progress = self.now;
                }
                self.record(device, if ok { "cellular_done" } else { "cellular_fail" }, Some(segment), 0, None, 0, 0);
                self.callback(device, |b, ctx| b.on_cellular(ctx, segment, ok))?;
            }
            Event::LocalEnd { flight, hop } => self.local_end(flight, hop)?,
            Event::Timer { device, tag } => self.callback(device, |b, ctx| b.on_timer(ctx, tag))?,
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn record(&mut self, device: usize, kind: &str, segment: Option<SegmentId>, bytes: usize, peer: Option<usize>, value: i64, aux: i64) {
        if self.cfg.event_log {
            self.log.push(LogRecord { t: self.now, device, kind: kind.to_string(), segment, bytes, peer, value, aux });
        }
    }

    fn occupy(&mut self, transmitter: usize, kind: MessageKind, bytes: usize) -> f64 {
        let start = self.now.max(self.medium_busy_until);
        let end = start + bytes as f64 * 8.0 / self.cfg.local.effective_capacity();
        self.medium_busy_until = end;
        self.occupations.push((start, end));
        self.meter.record_occupation(transmitter, kind, bytes);
        end
    }

    fn apply(&mut self, device: usize, action: Action) -> Result<(), SimError> {
        match action {
            Action::Send { dst, body } => {
                if dst == Dest::Unicast(device) {
                    return Err(SimError::InvalidConfig(format!("device {device} sent a frame to itself")));
                }
                let kind = body.kind();
                let bytes = self.sizes.bytes(&body);
                let segment = body.segment();
                let peer = match dst {
                    Dest::Unicast(d) => Some(d),
                    Dest::Broadcast => None,
                };
                self.record(device, &format!("send_{}", kind.name()), segment, bytes, peer, 0, 0);
                let end = self.occupy(device, kind, bytes);
                self.tx_busy_until[device] = end;
                let mut received = vec![false; self.nodes.len()];
                received[device] = true;
                let id = self.next_flight;
                self.next_flight += 1;
                self.flights.insert(id, Flight { msg: Message { src: device, dst, body }, bytes, received });
                self.schedule(end, Event::LocalEnd { flight: id, hop: 1 });
            }
            Action::StartDownload { segment } => {
                let spec = &self.cfg.devices[device];
                let Some(trace) = &spec.cellular else {
                    return Err(SimError::NoCellular(device));
                };
                let bits = self.cfg.segment_len(segment as usize) as f64 * 8.0;
                let end = trace.transfer_end(self.now, bits);
                let ok = self.rng.gen::<f64>() >= spec.cellular_loss;
                let cell = &mut self.cellular[device];
                cell.attempt += 1;
                cell.active = Some(segment);
                let attempt = cell.attempt;
                self.record(device, "cellular_start", Some(segment), 0, None, 0, 0);
                if let Some(end) = end {
                    self.schedule(end, Event::CellularDone { device, attempt, segment, ok });
                }
            }
            Action::AbortDownload => {
                let cell = &mut self.cellular[device];
                cell.attempt += 1;
                let seg = cell.active.take();
                self.record(device, "cellular_abort", seg, 0, None, 0, 0);
            }
            Action::SetTimer { delay, tag } => self.schedule(self.now + delay.max(0.0), Event::Timer { device, tag }),
            Action::SegmentComplete(s) => {
                if self.holdings[device].insert(s) {
                    self.last_progress = self.now;
                    self.record(device, "segment_complete", Some(s), 0, None, 0, 0);
                    if self.held_anywhere.insert(s) && self.held_anywhere.is_full() {
                        self.cellular_done_time = Some(self.now);
                    }
                    if self.holdings[device].is_full() {
                        self.completion[device] = Some(self.now);
                        self.record(device, "file_complete", None, 0, None, 0, 0);
                    }
                }
            }
            Action::Log { kind, segment, peer, value, aux } => self.record(device, kind, segment, 0, peer, value, aux),
        }
        Ok(())
    }

    fn local_end(&mut self, flight_id: u64, hop: u8) -> Result<(), SimError> {
        let mut flight = self.flights.remove(&flight_id).expect("flight scheduled once per hop");
        let src = flight.msg.src;
        let ap = self.cfg.ap_device;
        let transmitter = if hop == 1 { src } else { ap };
        let n = self.nodes.len();

        let mut receivers = Vec::new();
        for k in 0..n {
            if k == transmitter || flight.received[k] {
                continue;
            }
            let p = self.cfg.local.loss[transmitter][k];
            if self.rng.gen::<f64>() >= p {
                flight.received[k] = true;
                receivers.push(k);
            }
        }

        let relay = self.cfg.mode == Mode::Star
            && hop == 1
            && src != ap
            && flight.received[ap]
            && match flight.msg.dst {
                Dest::Unicast(d) => d != ap,
                Dest::Broadcast => true,
            };

        for &k in &receivers {
            self.meter.record_reception(k, flight.bytes);
            let addressed = flight.msg.is_addressed_to(k);
            let msg = &flight.msg;
            let mut actions = Vec::new();
            let tx_idle = self.tx_busy_until[k] <= self.now;
            {
                let mut ctx = Ctx::new(self.now, k, tx_idle, &mut self.rngs[k], &self.net, &mut actions);
                self.nodes[k].on_message(&mut ctx, msg, addressed);
            }
            for action in actions {
                self.apply(k, action)?;
            }
        }

        if relay {
            let end = self.occupy(ap, flight.msg.body.kind(), flight.bytes);
            self.record(ap, "relay", flight.msg.body.segment(), flight.bytes, Some(src), 0, 0);
            self.flights.insert(flight_id, flight);
            self.schedule(end, Event::LocalEnd { flight: flight_id, hop: 2 });
        }

        if hop == 1 && self.tx_busy_until[src] <= self.now {
            self.callback(src, |b, ctx| b.on_tx_idle(ctx))?;
        }
        Ok(())
    }
}
