use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::rlnc::GenerationParams;

use super::trace::RateTrace;

/// How the local medium is organized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Infrastructure network whose access point never relays: every frame
    /// is one medium occupation, overheard by all.
    PseudoAdhoc,
    /// Ad hoc network, everyone in range of everyone.
    Clique,
    /// Infrastructure network: frames between two stations are relayed by the
    /// access point, and protocol neighbors follow the star edges.
    Star,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::PseudoAdhoc => "pseudo_adhoc",
            Mode::Clique => "clique",
            Mode::Star => "star",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pseudo_adhoc" => Ok(Mode::PseudoAdhoc),
            "clique" => Ok(Mode::Clique),
            "star" => Ok(Mode::Star),
            _ => Err(format!("unknown mode '{s}'")),
        }
    }
}

/// Whether coded packets carry real payload bytes or only coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayloadMode {
    /// Coefficients only; rank bookkeeping is exact, data is not carried.
    Symbolic,
    /// Real file bytes end to end, so decoded output can be checked.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    /// `None` for a device without a cellular link.
    pub cellular: Option<RateTrace>,
    /// Probability a whole segment download fails.
    pub cellular_loss: f64,
}

impl DeviceSpec {
    pub fn with_rate(bps: f64) -> Self {
        Self { cellular: Some(RateTrace::constant(bps)), cellular_loss: 0.0 }
    }

    pub fn without_cellular() -> Self {
        Self { cellular: None, cellular_loss: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalMediumSpec {
    pub capacity_bps: f64,
    pub background_bps: f64,
    /// `loss[i][j]`: probability `j` misses a frame sent by `i`.
    pub loss: Vec<Vec<f64>>,
}

impl LocalMediumSpec {
    pub fn uniform(n_devices: usize, capacity_bps: f64, background_bps: f64, loss: f64) -> Self {
        let loss = (0..n_devices).map(|i| (0..n_devices).map(|j| if i == j { 0.0 } else { loss }).collect()).collect();
        Self { capacity_bps, background_bps, loss }
    }

    pub fn effective_capacity(&self) -> f64 {
        self.capacity_bps - self.background_bps
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub devices: Vec<DeviceSpec>,
    pub local: LocalMediumSpec,
    pub mode: Mode,
    pub ap_device: usize,
    pub seed: u64,
    pub file_bytes: usize,
    pub params: GenerationParams,
    pub payload_mode: PayloadMode,
    /// Size of every fixed-size control message.
    pub control_bytes: usize,
    /// Period of the protocol housekeeping tick.
    pub tick_interval: f64,
    /// Abort with a stall diagnostic if nothing completes for this long.
    pub idle_window: f64,
    /// Stop with partial metrics at this simulated time.
    pub max_sim_time: f64,
    pub event_log: bool,
}

impl SimConfig {
    pub fn new(devices: Vec<DeviceSpec>, local: LocalMediumSpec, file_bytes: usize) -> Self {
        Self {
            devices,
            local,
            mode: Mode::PseudoAdhoc,
            ap_device: 0,
            seed: 0,
            file_bytes,
            params: GenerationParams::default(),
            payload_mode: PayloadMode::Symbolic,
            control_bytes: 64,
            tick_interval: 0.1,
            idle_window: 120.0,
            max_sim_time: 3600.0,
            event_log: false,
        }
    }

    pub fn n_devices(&self) -> usize {
        self.devices.len()
    }

    pub fn n_segments(&self) -> usize {
        self.file_bytes.div_ceil(self.params.segment_bytes()).max(1)
    }

    /// Bytes of segment `s` as downloaded over cellular; the last one may be
    /// short.
    pub fn segment_len(&self, s: usize) -> usize {
        let full = self.params.segment_bytes();
        full.min(self.file_bytes.saturating_sub(s * full))
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let n = self.n_devices();
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        if n == 0 {
            return bad("no devices".into());
        }
        if self.file_bytes == 0 {
            return bad("file is empty".into());
        }
        if self.local.loss.len() != n || self.local.loss.iter().any(|r| r.len() != n) {
            return bad(format!("loss matrix must be {n} x {n}"));
        }
        if self.local.loss.iter().flatten().any(|&p| !(0.0..=1.0).contains(&p)) {
            return bad("local loss outside [0,1]".into());
        }
        if !(self.local.capacity_bps > 0.0) {
            return bad("local capacity must be positive".into());
        }
        if !(self.local.background_bps >= 0.0 && self.local.background_bps < self.local.capacity_bps) {
            return bad(format!(
                "background load {} must be in [0, capacity {})",
                self.local.background_bps, self.local.capacity_bps
            ));
        }
        if self.ap_device >= n {
            return bad(format!("ap_device {} out of range", self.ap_device));
        }
        if self.devices.iter().any(|d| !(0.0..=1.0).contains(&d.cellular_loss)) {
            return bad("cellular loss outside [0,1]".into());
        }
        if self.n_segments() > u32::MAX as usize {
            return bad("too many segments".into());
        }
        if !(self.tick_interval > 0.0 && self.idle_window > 0.0 && self.max_sim_time > 0.0) {
            return bad("tick interval, idle window and time cap must be positive".into());
        }
        Ok(())
    }

    /// Devices a protocol on `device` exchanges with directly.
    pub fn neighbors(&self, device: usize) -> Vec<usize> {
        let n = self.n_devices();
        match self.mode {
            Mode::Star if device != self.ap_device => vec![self.ap_device],
            _ => (0..n).filter(|&j| j != device).collect(),
        }
    }
}
