//! Device protocols: how segments are fetched over cellular and how they
//! spread over the local medium.
//!
//! A [`Node`] pairs one downloader role with one dissemination role and
//! implements [`Behavior`] for the simulator.

pub mod audit;
mod bittorrent;
mod microdownload;
mod mncp2;
mod r2push;
mod store;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::rlnc::SegmentId;
use crate::sim::{self, Behavior, Body, Ctx, Message, SimConfig, SimOutcome};

pub use bittorrent::BtPull;
pub use microdownload::{MicroDownload, MicroDownloadConfig, Scheduler, Sequential};
pub use mncp2::{Mncp2, RequestQueue};
pub use r2push::{redundancy_extra, R2Push};
pub use store::SegmentStore;

/// Local dissemination protocol, as named in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    /// Adaptive cellular scheduling plus coded pull with initial push.
    Microcast,
    BittorrentPull,
    R2Push,
    /// Every device downloads the whole file alone.
    None,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 4] =
        [ProtocolKind::Microcast, ProtocolKind::BittorrentPull, ProtocolKind::R2Push, ProtocolKind::None];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Microcast => "microcast",
            ProtocolKind::BittorrentPull => "bittorrent_pull",
            ProtocolKind::R2Push => "r2_push",
            ProtocolKind::None => "none",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| format!("unknown protocol '{s}'"))
    }
}

/// How a device decides which segments to fetch over cellular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DownloaderKind {
    #[serde(rename = "microdownload")]
    MicroDownload,
    /// Equal contiguous shares per cellular device, fixed up front.
    StaticSplit,
    /// The whole file on every cellular device.
    Independent,
}

impl DownloaderKind {
    pub fn name(self) -> &'static str {
        match self {
            DownloaderKind::MicroDownload => "microdownload",
            DownloaderKind::StaticSplit => "static_split",
            DownloaderKind::Independent => "independent",
        }
    }
}

impl FromStr for DownloaderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [DownloaderKind::MicroDownload, DownloaderKind::StaticSplit, DownloaderKind::Independent]
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| format!("unknown downloader '{s}'"))
    }
}

/// Timers shared by the pull-based recovery paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryConfig {
    /// Re-request after this long without progress.
    pub timeout: f64,
    /// Period of advertisement / bitfield refreshes.
    pub heartbeat: f64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self { timeout: 2.0, heartbeat: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Pending {
    pub peer: usize,
    pub last_activity: f64,
    pub attempts: u32,
}

impl Pending {
    /// Retries back off by doubling, up to 8x the base timeout.
    pub fn due(&self, now: f64, timeout: f64) -> bool {
        now - self.last_activity >= timeout * f64::from(1u32 << self.attempts.min(3))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub protocol: ProtocolKind,
    /// Overrides the protocol's usual downloader.
    pub downloader: Option<DownloaderKind>,
    pub microdownload: MicroDownloadConfig,
    /// Device running the assignment loop.
    pub initiator: usize,
    pub recovery: RecoveryConfig,
    /// Push redundancy as a fraction of the generation size.
    pub redundancy: f64,
}

impl ProtocolConfig {
    pub fn new(protocol: ProtocolKind) -> Self {
        Self {
            protocol,
            downloader: None,
            microdownload: MicroDownloadConfig::default(),
            initiator: 0,
            recovery: RecoveryConfig::default(),
            redundancy: 0.03,
        }
    }

    pub fn with_downloader(mut self, d: DownloaderKind) -> Self {
        self.downloader = Some(d);
        self
    }

    pub fn downloader_kind(&self) -> DownloaderKind {
        self.downloader.unwrap_or(match self.protocol {
            ProtocolKind::None => DownloaderKind::Independent,
            _ => DownloaderKind::MicroDownload,
        })
    }
}

enum Downloader {
    Micro(MicroDownload),
    Fixed(Sequential),
}

enum Dissemination {
    Mncp2(Mncp2),
    Bt(BtPull),
    R2(R2Push),
    Silent,
}

/// One device: a downloader role, a dissemination role, and what it holds.
pub struct Node {
    store: SegmentStore,
    downloader: Downloader,
    dissemination: Dissemination,
}

impl Node {
    pub fn store(&self) -> &SegmentStore {
        &self.store
    }

    pub fn mncp2(&self) -> Option<&Mncp2> {
        match &self.dissemination {
            Dissemination::Mncp2(p) => Some(p),
            _ => None,
        }
    }

    pub fn microdownload(&self) -> Option<&MicroDownload> {
        match &self.downloader {
            Downloader::Micro(d) => Some(d),
            Downloader::Fixed(_) => None,
        }
    }

    fn flush(&mut self, ctx: &mut Ctx) {
        for s in self.store.take_fresh() {
            ctx.complete(s);
        }
    }
}

impl Behavior for Node {
    fn on_start(&mut self, ctx: &mut Ctx) {
        if let Dissemination::Bt(p) = &mut self.dissemination {
            p.on_start(ctx, &self.store);
        }
        match &mut self.downloader {
            Downloader::Micro(d) => d.on_start(ctx, &self.store),
            Downloader::Fixed(d) => d.on_start(ctx, &self.store),
        }
        self.flush(ctx);
    }

    fn on_message(&mut self, ctx: &mut Ctx, msg: &Message, addressed: bool) {
        match msg.body {
            Body::Assign { .. } | Body::Feedback { .. } => {
                if let Downloader::Micro(d) = &mut self.downloader {
                    d.on_message(ctx, &self.store, msg, addressed);
                }
            }
            _ => match &mut self.dissemination {
                Dissemination::Mncp2(p) => p.on_message(ctx, &mut self.store, msg, addressed),
                Dissemination::Bt(p) => p.on_message(ctx, &mut self.store, msg, addressed),
                Dissemination::R2(p) => p.on_message(ctx, &mut self.store, msg, addressed),
                Dissemination::Silent => {}
            },
        }
        self.flush(ctx);
    }

    fn on_cellular(&mut self, ctx: &mut Ctx, segment: SegmentId, ok: bool) {
        if ok && !self.store.is_complete(segment) {
            self.store.set_downloaded(segment, ctx.net);
            match &mut self.dissemination {
                Dissemination::Mncp2(p) => p.on_downloaded(ctx, &self.store, segment),
                Dissemination::Bt(p) => p.on_acquired(ctx, segment),
                Dissemination::R2(p) => p.on_downloaded(ctx, &self.store, segment),
                Dissemination::Silent => {}
            }
        }
        match &mut self.downloader {
            Downloader::Micro(d) => d.on_cellular(ctx, &self.store, segment, ok),
            Downloader::Fixed(d) => d.on_cellular(ctx, &self.store, segment, ok),
        }
        self.flush(ctx);
    }

    fn on_timer(&mut self, ctx: &mut Ctx, tag: u64) {
        if let Downloader::Micro(d) = &mut self.downloader {
            d.on_timer(ctx, &self.store, tag);
        }
        self.flush(ctx);
    }

    fn on_tick(&mut self, ctx: &mut Ctx) {
        if let Downloader::Micro(d) = &mut self.downloader {
            d.on_tick(ctx);
        }
        match &mut self.dissemination {
            Dissemination::Mncp2(p) => p.on_tick(ctx, &self.store),
            Dissemination::Bt(p) => p.on_tick(ctx, &self.store),
            Dissemination::R2(p) => p.on_tick(ctx, &self.store),
            Dissemination::Silent => {}
        }
        self.flush(ctx);
    }

    fn on_tx_idle(&mut self, ctx: &mut Ctx) {
        match &mut self.dissemination {
            Dissemination::Mncp2(p) => p.on_tx_idle(ctx, &self.store),
            Dissemination::Bt(p) => p.on_tx_idle(ctx),
            Dissemination::R2(_) | Dissemination::Silent => {}
        }
    }

    fn decoded_segment(&self, s: SegmentId) -> Option<Vec<u8>> {
        self.store.decoded(s)
    }
}

/// One node per device of `cfg`.
pub fn build_nodes(cfg: &SimConfig, pcfg: &ProtocolConfig) -> Result<Vec<Node>, SimError> {
    let n = cfg.n_devices();
    let n_segments = cfg.n_segments();
    let has_cellular: Vec<bool> = cfg.devices.iter().map(|d| d.cellular.is_some()).collect();
    let cellular_ids: Vec<usize> = (0..n).filter(|&d| has_cellular[d]).collect();
    if cellular_ids.is_empty() {
        return Err(SimError::InvalidConfig("no device has a cellular link".into()));
    }
    if pcfg.initiator >= n {
        return Err(SimError::InvalidConfig(format!("initiator {} out of range", pcfg.initiator)));
    }
    if !(0.0..=1.0).contains(&pcfg.redundancy) {
        return Err(SimError::InvalidConfig("redundancy must be in [0, 1]".into()));
    }
    if pcfg.microdownload.backlog_k == 0 {
        return Err(SimError::InvalidConfig("backlog K must be at least 1".into()));
    }
    let kind = pcfg.downloader_kind();
    Ok((0..n)
        .map(|me| {
            let downloader = match kind {
                DownloaderKind::MicroDownload => {
                    Downloader::Micro(MicroDownload::new(pcfg.microdownload, me, pcfg.initiator, &has_cellular, n_segments))
                }
                DownloaderKind::StaticSplit => {
                    let rank = cellular_ids.iter().position(|&d| d == me).unwrap_or(0);
                    Downloader::Fixed(Sequential::share(n_segments, rank, cellular_ids.len()))
                }
                DownloaderKind::Independent => Downloader::Fixed(Sequential::whole(n_segments)),
            };
            let dissemination = match pcfg.protocol {
                ProtocolKind::Microcast => Dissemination::Mncp2(Mncp2::new(pcfg.recovery, n, n_segments)),
                ProtocolKind::BittorrentPull => Dissemination::Bt(BtPull::new(pcfg.recovery, n, n_segments)),
                ProtocolKind::R2Push => {
                    Dissemination::R2(R2Push::new(pcfg.recovery, pcfg.redundancy, cfg.params.m(), n, n_segments))
                }
                ProtocolKind::None => Dissemination::Silent,
            };
            Node { store: SegmentStore::new(cfg), downloader, dissemination }
        })
        .collect())
}

/// Builds the nodes and runs the simulation.
pub fn run_protocol(cfg: &SimConfig, pcfg: &ProtocolConfig) -> Result<SimOutcome<Node>, SimError> {
    let nodes = build_nodes(cfg, pcfg)?;
    sim::run(cfg, nodes)
}
