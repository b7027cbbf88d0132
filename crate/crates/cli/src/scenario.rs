//! TOML scenario files.
//!
//! ```toml
//! kind = "proto"
//! protocol = "microcast"
//! mode = "pseudo_adhoc"
//! file_mb = 9.93
//! seed = 1
//! seeds = 3
//!
//! [local]
//! capacity_mbps = 20
//! loss_uniform = 0.01
//!
//! [[devices]]
//! cellular_kbps = 550
//! [[devices]]
//! [[devices]]
//!
//! [sweep]
//! n_devices = [2, 3]
//! protocol = ["microcast", "bittorrent_pull"]
//! ```

use std::path::{Path, PathBuf};

use coopcast::num::Policy;
use coopcast::protocols::{DownloaderKind, ProtocolConfig, ProtocolKind};
use coopcast::rlnc::GenerationParams;
use coopcast::sim::{DeviceSpec, LocalMediumSpec, Mode, PayloadMode, RateTrace, SimConfig};
use serde::Deserialize;

use crate::recipes::{fig7b, proto_output, NumSweep, Output, ProtoPoint};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    #[default]
    Proto,
    Num,
    Bench,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub kind: Kind,
    pub name: Option<String>,
    pub seed: Option<u64>,
    pub seeds: Option<usize>,
    pub protocol: Option<ProtocolKind>,
    pub downloader: Option<DownloaderKind>,
    pub mode: Option<Mode>,
    pub file_mb: Option<f64>,
    pub payload: Option<PayloadMode>,
    pub ap_device: Option<usize>,
    pub max_sim_time: Option<f64>,
    pub segment_params: Option<SegmentParamsFile>,
    pub local: Option<LocalFile>,
    #[serde(default)]
    pub devices: Vec<DeviceFile>,
    pub sweep: Option<SweepFile>,
    pub num: Option<NumFile>,
    pub bench: Option<BenchFile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentParamsFile {
    pub m: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalFile {
    pub capacity_mbps: Option<f64>,
    pub background_mbps: Option<f64>,
    pub loss_uniform: Option<f64>,
    pub loss_matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceFile {
    pub cellular_kbps: Option<f64>,
    /// `t_seconds,kbps` rows; the path is relative to the scenario file.
    pub trace_file: Option<PathBuf>,
    pub cellular_loss: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub n_devices: Option<Vec<usize>>,
    pub p_local: Option<Vec<f64>>,
    pub protocol: Option<Vec<ProtocolKind>>,
    pub mode: Option<Vec<Mode>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumFile {
    pub policies: Option<Vec<Policy>>,
    pub n_devices: Vec<usize>,
    pub p_local: Vec<f64>,
    pub cellular_capacity: Option<f64>,
    pub cellular_loss: Option<f64>,
    pub local_capacity: Option<f64>,
    pub gamma: Option<f64>,
    pub iterations: Option<usize>,
    pub step_size: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchFile {
    pub m: Vec<usize>,
    pub n: Option<usize>,
    pub seconds: Option<f64>,
}

/// A parsed scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub kind: Kind,
    pub seeds: Vec<u64>,
    pub file: ScenarioFile,
    base_dir: PathBuf,
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Scenario {
    pub fn parse(text: &str, name: &str, base_dir: &Path) -> Result<Self, CliError> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| cfg_err(format!("{name}: {e}")))?;
        let seed = file.seed.unwrap_or(1);
        let count = file.seeds.unwrap_or(1);
        Ok(Self {
            name: file.name.clone().unwrap_or_else(|| name.to_string()),
            kind: file.kind,
            seeds: (0..count as u64).map(|k| seed + k).collect(),
            file,
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, stem, base).map_err(|e| match e {
            CliError::Config(m) => cfg_err(m.replacen(stem, &path.display().to_string(), 1)),
            other => other,
        })
    }

    /// Command-line overrides of the seed list.
    pub fn override_seeds(&mut self, seed: Option<u64>, seeds: Option<usize>) {
        let first = seed.unwrap_or_else(|| self.seeds.first().copied().unwrap_or(1));
        let count = seeds.unwrap_or(self.seeds.len());
        self.seeds = (0..count as u64).map(|k| first + k).collect();
    }

    pub fn run(&self) -> Result<Output, CliError> {
        let mut out = match self.kind {
            Kind::Proto => self.run_proto()?,
            Kind::Num => self.num_sweep()?.run(&self.seeds)?,
            Kind::Bench => {
                let b = self.file.bench.as_ref().ok_or_else(|| cfg_err("kind = \"bench\" needs a [bench] table"))?;
                fig7b(&b.m, b.n.unwrap_or(900), b.seconds.unwrap_or(1.0), self.seeds.first().copied().unwrap_or(1))?
            }
        };
        out.name = self.name.clone();
        out.raw.comments.insert(0, format!("scenario: {}", self.name));
        out.agg.comments.insert(0, format!("scenario: {}", self.name));
        Ok(out)
    }

    pub fn num_sweep(&self) -> Result<NumSweep, CliError> {
        let f = self.file.num.as_ref().ok_or_else(|| cfg_err("kind = \"num\" needs a [num] table"))?;
        let mut s = NumSweep::figure(f.n_devices.clone(), f.p_local.clone());
        if let Some(p) = &f.policies {
            s.policies = p.clone();
        }
        s.cellular_capacity = f.cellular_capacity.unwrap_or(s.cellular_capacity);
        s.cellular_loss = f.cellular_loss.unwrap_or(s.cellular_loss);
        s.local_capacity = f.local_capacity.unwrap_or(s.local_capacity);
        s.gamma = f.gamma.unwrap_or(s.gamma);
        s.iterations = f.iterations.unwrap_or(s.iterations);
        s.step_size = f.step_size.unwrap_or(s.step_size);
        Ok(s)
    }

    fn devices(&self) -> Result<Vec<DeviceSpec>, CliError> {
        self.file
            .devices
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let cellular = match (d.cellular_kbps, &d.trace_file) {
                    (Some(_), Some(_)) => return Err(cfg_err(format!("devices[{i}]: give cellular_kbps or trace_file, not both"))),
                    (Some(k), None) if k > 0.0 && k.is_finite() => Some(RateTrace::constant(k * 1e3)),
                    (Some(k), None) => return Err(cfg_err(format!("devices[{i}]: cellular_kbps {k} must be positive"))),
                    (None, Some(p)) => {
                        let path = self.base_dir.join(p);
                        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                        Some(RateTrace::from_csv(&text).map_err(|e| cfg_err(format!("devices[{i}] {}: {e}", path.display())))?)
                    }
                    (None, None) => None,
                };
                Ok(DeviceSpec { cellular, cellular_loss: d.cellular_loss.unwrap_or(0.0) })
            })
            .collect()
    }

    /// Base simulation config for the first `n` devices at local loss `p`
    /// (`None` keeps the file's loss setting).
    fn sim_config(&self, devices: &[DeviceSpec], n: usize, p: Option<f64>) -> Result<SimConfig, CliError> {
        let f = &self.file;
        if n > devices.len() {
            return Err(cfg_err(format!("sweep asks for {n} devices but only {} are listed", devices.len())));
        }
        let local = f.local.clone().unwrap_or(LocalFile { capacity_mbps: None, background_mbps: None, loss_uniform: None, loss_matrix: None });
        let capacity = local.capacity_mbps.unwrap_or(20.0) * 1e6;
        let background = local.background_mbps.unwrap_or(0.0) * 1e6;
        let mut medium = LocalMediumSpec::uniform(n, capacity, background, p.or(local.loss_uniform).unwrap_or(0.01));
        if let (None, Some(matrix)) = (p, &local.loss_matrix) {
            if local.loss_uniform.is_some() {
                return Err(cfg_err("local: give loss_uniform or loss_matrix, not both"));
            }
            if matrix.len() < n || matrix.iter().take(n).any(|r| r.len() < n) {
                return Err(cfg_err(format!("local.loss_matrix must be at least {n} x {n}")));
            }
            medium.loss = matrix.iter().take(n).map(|r| r[..n].to_vec()).collect();
        }
        let file_bytes = (f.file_mb.unwrap_or(1.0) * 1e6).round();
        if !(file_bytes >= 1.0) {
            return Err(cfg_err("file_mb must be positive"));
        }
        let mut cfg = SimConfig::new(devices[..n].to_vec(), medium, file_bytes as usize);
        if let Some(sp) = &f.segment_params {
            cfg.params = GenerationParams::new(sp.m, sp.n).map_err(|e| cfg_err(format!("segment_params: {e}")))?;
        }
        cfg.payload_mode = f.payload.unwrap_or(PayloadMode::Symbolic);
        cfg.ap_device = f.ap_device.unwrap_or(0);
        if let Some(t) = f.max_sim_time {
            cfg.max_sim_time = t;
        }
        cfg.validate().map_err(|e| cfg_err(e.to_string()))?;
        Ok(cfg)
    }

    fn run_proto(&self) -> Result<Output, CliError> {
        let f = &self.file;
        let devices = self.devices()?;
        if devices.is_empty() {
            return Err(cfg_err("no [[devices]] listed"));
        }
        let sweep = f.sweep.clone().unwrap_or_default();
        let ns = sweep.n_devices.clone().unwrap_or_else(|| vec![devices.len()]);
        let ps: Vec<Option<f64>> = sweep.p_local.clone().map_or(vec![None], |v| v.into_iter().map(Some).collect());
        let protocols = sweep.protocol.clone().unwrap_or_else(|| vec![f.protocol.unwrap_or(ProtocolKind::Microcast)]);
        let modes = sweep.mode.clone().unwrap_or_else(|| vec![f.mode.unwrap_or(Mode::PseudoAdhoc)]);

        let mut points = Vec::new();
        for &protocol in &protocols {
            for &mode in &modes {
                for &n in &ns {
                    for &p in &ps {
                        let mut cfg = self.sim_config(&devices, n, p)?;
                        cfg.mode = mode;
                        let mut pcfg = ProtocolConfig::new(protocol);
                        pcfg.downloader = f.downloader;
                        let p_label = p.or(f.local.as_ref().and_then(|l| l.loss_uniform)).map_or("matrix".into(), |p| format!("{p}"));
                        points.push(ProtoPoint {
                            labels: vec![protocol.name().into(), mode.name().into(), n.to_string(), p_label],
                            cfg,
                            pcfg,
                        });
                    }
                }
            }
        }
        let comments = vec![format!(
            "file_mb={} downloader={} payload={:?}",
            f.file_mb.unwrap_or(1.0),
            f.downloader.map_or("default", |d| d.name()),
            f.payload.unwrap_or(PayloadMode::Symbolic)
        )];
        proto_output(&["protocol", "mode", "n_devices", "p_local"], &points, &self.seeds, &comments)
    }
}
