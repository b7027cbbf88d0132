//! Named experiment presets and the sweeps behind them.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use coopcast::bench::measure_codec;
use coopcast::error::SimError;
use coopcast::num::{centralized_oracle, simulate, Policy, SolverConfig, Topology};
use coopcast::protocols::{audit, redundancy_extra, run_protocol, DownloaderKind, ProtocolConfig, ProtocolKind};
use coopcast::rlnc::GenerationParams;
use coopcast::sim::{DeviceSpec, LocalMediumSpec, Mode, RateTrace, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codec_check;
use crate::table::{aggregate, fmt_f64, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Recipe {
    Fig4a,
    Fig4b,
    Fig5a,
    Fig5b,
    Fig6b,
    FigMicrodownload,
    FigCongested,
    Fig7b,
    CodecCheck,
    NumOracle,
    Liveness,
}

impl Recipe {
    pub const ALL: [Recipe; 11] = [
        Recipe::Fig4a,
        Recipe::Fig4b,
        Recipe::Fig5a,
        Recipe::Fig5b,
        Recipe::Fig6b,
        Recipe::FigMicrodownload,
        Recipe::FigCongested,
        Recipe::Fig7b,
        Recipe::CodecCheck,
        Recipe::NumOracle,
        Recipe::Liveness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Recipe::Fig4a => "fig4a",
            Recipe::Fig4b => "fig4b",
            Recipe::Fig5a => "fig5a",
            Recipe::Fig5b => "fig5b",
            Recipe::Fig6b => "fig6b",
            Recipe::FigMicrodownload => "fig-microdownload",
            Recipe::FigCongested => "fig-congested",
            Recipe::Fig7b => "fig7b",
            Recipe::CodecCheck => "codec-check",
            Recipe::NumOracle => "num-oracle",
            Recipe::Liveness => "liveness",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Recipe::Fig4a => "NUM throughput vs device count, lossless local links",
            Recipe::Fig4b => "NUM throughput vs device count, local loss 0.2",
            Recipe::Fig5a => "NUM throughput vs local loss, 3 devices",
            Recipe::Fig5b => "NUM throughput vs local loss, 4 devices",
            Recipe::Fig6b => "local traffic per protocol, one downloader and three peers",
            Recipe::FigMicrodownload => "adaptive vs static cellular split over rate traces",
            Recipe::FigCongested => "download rate vs device count on a congested local network",
            Recipe::Fig7b => "codec encode/decode throughput vs generation size",
            Recipe::CodecCheck => "randomized codec round trips against a rank oracle",
            Recipe::NumOracle => "subgradient solver vs LP oracle on random topologies",
            Recipe::Liveness => "protocol invariants and completion over a random grid",
        }
    }

    pub fn default_seeds(self) -> usize {
        match self {
            Recipe::Fig4a | Recipe::Fig4b | Recipe::Fig5a | Recipe::Fig5b | Recipe::NumOracle => 10,
            Recipe::Fig6b | Recipe::FigMicrodownload | Recipe::FigCongested => 5,
            Recipe::Liveness => 50,
            Recipe::Fig7b => 1,
            Recipe::CodecCheck => 1000,
        }
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Recipe {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|r| r.name()).collect();
            format!("unknown recipe '{s}' (known: {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// First seed; runs use `seed, seed + 1, ...`.
    pub seed: u64,
    /// Overrides the recipe's seed (or trial) count.
    pub seeds: Option<usize>,
    /// Wall-clock budget per generation size for codec benchmarks.
    pub bench_seconds: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { seed: 1, seeds: None, bench_seconds: 1.0 }
    }
}

impl RunOptions {
    fn seed_list(&self, default: usize) -> Vec<u64> {
        (0..self.seeds.unwrap_or(default) as u64).map(|k| self.seed + k).collect()
    }
}

/// Raw per-run rows and their aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub name: String,
    pub raw: Table,
    pub agg: Table,
}

impl Output {
    pub fn raw_path(dir: &Path, name: &str) -> PathBuf {
        dir.join(format!("{name}.csv"))
    }

    pub fn agg_path(dir: &Path, name: &str) -> PathBuf {
        dir.join(format!("{name}_agg.csv"))
    }

    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf), CliError> {
        let (raw, agg) = (Self::raw_path(dir, &self.name), Self::agg_path(dir, &self.name));
        self.raw.write(&raw)?;
        self.agg.write(&agg)?;
        Ok((raw, agg))
    }
}

pub fn run(recipe: Recipe, opts: &RunOptions) -> Result<Output, CliError> {
    let seeds = opts.seed_list(recipe.default_seeds());
    let mut out = match recipe {
        Recipe::Fig4a => NumSweep::figure((1..=8).collect(), vec![0.0]).run(&seeds)?,
        Recipe::Fig4b => NumSweep::figure((1..=8).collect(), vec![0.2]).run(&seeds)?,
        Recipe::Fig5a => NumSweep::figure(vec![3], vec![0.0, 0.1, 0.2, 0.3]).run(&seeds)?,
        Recipe::Fig5b => NumSweep::figure(vec![4], vec![0.0, 0.1, 0.2, 0.3]).run(&seeds)?,
        Recipe::Fig6b => fig6b(&seeds)?,
        Recipe::FigMicrodownload => fig_microdownload(&seeds)?,
        Recipe::FigCongested => fig_congested(&seeds)?,
        Recipe::Fig7b => fig7b(&[16, 25, 32, 64], 900, opts.bench_seconds, opts.seed)?,
        Recipe::CodecCheck => codec_check(opts.seeds.unwrap_or(1000), opts.seed)?,
        Recipe::NumOracle => num_oracle(20, &seeds, opts.seed)?,
        Recipe::Liveness => liveness(&seeds)?,
    };
    out.name = recipe.name().to_string();
    out.raw.comments.insert(0, format!("recipe: {} ({})", recipe.name(), recipe.description()));
    out.agg.comments.insert(0, format!("recipe: {} ({})", recipe.name(), recipe.description()));
    Ok(out)
}

fn fmt_p(p: f64) -> String {
    format!("{p}")
}

/// Policy sweep of the NUM solver over uniform topologies.
#[derive(Debug, Clone, PartialEq)]
pub struct NumSweep {
    pub policies: Vec<Policy>,
    pub n_devices: Vec<usize>,
    pub p_local: Vec<f64>,
    pub cellular_capacity: f64,
    pub cellular_loss: f64,
    pub local_capacity: f64,
    pub gamma: f64,
    pub iterations: usize,
    pub step_size: f64,
}

impl NumSweep {
    /// Unit cellular links and a local medium twice as fast.
    pub fn figure(n_devices: Vec<usize>, p_local: Vec<f64>) -> Self {
        Self {
            policies: Policy::ALL.to_vec(),
            n_devices,
            p_local,
            cellular_capacity: 1.0,
            cellular_loss: 0.0,
            local_capacity: 2.0,
            gamma: 1.0,
            iterations: 1000,
            step_size: 0.02,
        }
    }

    pub fn run(&self, seeds: &[u64]) -> Result<Output, CliError> {
        let mut raw = Table::new(&["policy", "n_devices", "p_local", "seed", "avg_rate"]);
        raw.comment(format!(
            "cellular_capacity={} cellular_loss={} local_capacity={} gamma={} iterations={} step_size={}",
            self.cellular_capacity, self.cellular_loss, self.local_capacity, self.gamma, self.iterations, self.step_size
        ));
        raw.comment(format!("seeds={:?}", seeds));
        raw.comment("avg_rate: delivered rate per device over the final half of the iterations");
        let mut points = Vec::new();
        for &policy in &self.policies {
            for &n in &self.n_devices {
                for &p in &self.p_local {
                    points.push((policy, n, p));
                }
            }
        }
        if !seeds.is_empty() {
            let rows: Vec<Vec<Vec<String>>> = points
                .par_iter()
                .map(|&(policy, n, p)| {
                    let topo =
                        Topology::uniform(n, self.cellular_capacity, self.cellular_loss, self.local_capacity, p, self.gamma)?;
                    let cfg = SolverConfig {
                        policy,
                        iterations: self.iterations,
                        step_size: self.step_size,
                        seeds: seeds.to_vec(),
                        x_cap: None,
                    };
                    let report = simulate(&topo, &cfg)?;
                    Ok(seeds
                        .iter()
                        .zip(&report.per_seed)
                        .map(|(s, v)| vec![policy.name().into(), n.to_string(), fmt_p(p), s.to_string(), fmt_f64(*v)])
                        .collect())
                })
                .collect::<Result<_, CliError>>()?;
            raw.rows = rows.into_iter().flatten().collect();
        }
        raw.sort();
        let agg = aggregate(&raw, &["policy", "n_devices", "p_local"], &["avg_rate"])?;
        Ok(Output { name: "num".into(), raw, agg })
    }
}

/// One protocol scenario before seeding.
#[derive(Debug, Clone)]
pub struct ProtoPoint {
    pub labels: Vec<String>,
    pub cfg: SimConfig,
    pub pcfg: ProtocolConfig,
}

pub const PROTO_VALUES: [&str; 5] = ["completion_time", "avg_rate_kbps", "local_bytes", "cellular_bytes", "traffic_ratio"];

/// Runs every point under every seed. Stalled runs become rows with a
/// non-ok status; configuration errors abort.
pub fn run_proto(label_names: &[&str], points: &[ProtoPoint], seeds: &[u64]) -> Result<Table, CliError> {
    let mut header: Vec<&str> = label_names.to_vec();
    header.extend(["seed", "status"]);
    header.extend(PROTO_VALUES);
    let mut raw = Table::new(&header);
    let jobs: Vec<(&ProtoPoint, u64)> = points.iter().flat_map(|p| seeds.iter().map(move |&s| (p, s))).collect();
    let rows: Vec<Vec<String>> = jobs
        .par_iter()
        .map(|&(point, seed)| {
            let mut cfg = point.cfg.clone();
            cfg.seed = seed;
            let mut row = point.labels.clone();
            row.push(seed.to_string());
            match run_protocol(&cfg, &point.pcfg) {
                Ok(out) => {
                    let m = out.metrics;
                    row.push(if m.partial { "partial".into() } else { "ok".into() });
                    row.extend([
                        fmt_f64(m.completion_time),
                        fmt_f64(m.avg_download_rate / 1e3),
                        m.local_bytes.to_string(),
                        m.cellular_bytes.to_string(),
                        fmt_f64(m.traffic_ratio()),
                    ]);
                }
                Err(SimError::Stalled { time, .. }) => {
                    row.push("stalled".into());
                    row.extend([fmt_f64(time), "nan".into(), "nan".into(), "nan".into(), "nan".into()]);
                }
                Err(e) => return Err(CliError::Config(format!("{}: {e}", point.labels.join(" "))))
            }
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;
    raw.rows = rows;
    raw.sort();
    Ok(raw)
}

pub fn proto_output(label_names: &[&str], points: &[ProtoPoint], seeds: &[u64], comments: &[String]) -> Result<Output, CliError> {
    let mut raw = run_proto(label_names, points, seeds)?;
    raw.comments.extend(comments.iter().cloned());
    raw.comment(format!("seeds={:?}", seeds));
    raw.comment("avg_rate_kbps: file bits over per-device completion time, averaged over devices");
    raw.comment("traffic_ratio: local medium bytes over file bytes");
    let agg = aggregate(&raw, label_names, &PROTO_VALUES)?;
    Ok(Output { name: "proto".into(), raw, agg })
}

pub const FIG6B_FILE_BYTES: usize = 9_930_000;

pub fn fig6b_config(mode: Mode) -> SimConfig {
    let mut devices = vec![DeviceSpec::without_cellular(); 4];
    devices[0] = DeviceSpec::with_rate(550e3);
    let mut cfg = SimConfig::new(devices, LocalMediumSpec::uniform(4, 20e6, 0.0, 0.01), FIG6B_FILE_BYTES);
    cfg.mode = mode;
    cfg
}

fn fig6b(seeds: &[u64]) -> Result<Output, CliError> {
    let points: Vec<ProtoPoint> = [
        (ProtocolKind::Microcast, Mode::PseudoAdhoc),
        (ProtocolKind::BittorrentPull, Mode::PseudoAdhoc),
        (ProtocolKind::R2Push, Mode::Star),
        (ProtocolKind::R2Push, Mode::Clique),
    ]
    .into_iter()
    .map(|(p, mode)| ProtoPoint {
        labels: vec![p.name().into(), mode.name().into()],
        cfg: fig6b_config(mode),
        pcfg: ProtocolConfig::new(p),
    })
    .collect();
    proto_output(
        &["protocol", "mode"],
        &points,
        seeds,
        &["4 devices, device 0 downloads at 550 kbit/s, file 9930000 bytes, local 20 Mbit/s, p_local=0.01, m=25 n=900".into()],
    )
}

/// Three traces: steady and fast, alternating, and nearly dead before
/// recovering.
pub fn adaptivity_traces() -> [RateTrace; 3] {
    let fast = RateTrace::constant(1.5e6);
    let variable = RateTrace::from_points((0..200).map(|k| (k as f64 * 2.0, if k % 2 == 0 { 200e3 } else { 1e6 })).collect())
        .expect("valid trace");
    let slow = RateTrace::from_points(vec![(0.0, 10e3), (75.0, 600e3)]).expect("valid trace");
    [fast, variable, slow]
}

fn fig_microdownload(seeds: &[u64]) -> Result<Output, CliError> {
    let points: Vec<ProtoPoint> = [DownloaderKind::MicroDownload, DownloaderKind::StaticSplit]
        .into_iter()
        .map(|d| {
            let devices =
                adaptivity_traces().into_iter().map(|t| DeviceSpec { cellular: Some(t), cellular_loss: 0.0 }).collect();
            let mut cfg = SimConfig::new(devices, LocalMediumSpec::uniform(3, 20e6, 0.0, 0.01), 750_000);
            cfg.idle_window = 200.0;
            ProtoPoint { labels: vec![d.name().into()], cfg, pcfg: ProtocolConfig::new(ProtocolKind::Microcast).with_downloader(d) }
        })
        .collect();
    proto_output(
        &["downloader"],
        &points,
        seeds,
        &[
            "3 devices, file 750000 bytes, local 20 Mbit/s, p_local=0.01, protocol microcast".into(),
            "traces: 1.5 Mbit/s constant; 200 kbit/s and 1 Mbit/s alternating every 2 s; 10 kbit/s until 75 s then 600 kbit/s"
                .into(),
        ],
    )
}

pub const CONGESTED_RATES: [f64; 4] = [480e3, 550e3, 610e3, 670e3];

/// `n` devices, the first four with cellular links. Without cooperation the
/// devices lacking cellular never finish, so that baseline uses only the
/// cellular ones.
pub fn congested_config(protocol: ProtocolKind, n: usize) -> SimConfig {
    let n = if protocol == ProtocolKind::None { n.min(CONGESTED_RATES.len()) } else { n };
    let devices = (0..n)
        .map(|i| CONGESTED_RATES.get(i).map_or_else(DeviceSpec::without_cellular, |&r| DeviceSpec::with_rate(r)))
        .collect();
    SimConfig::new(devices, LocalMediumSpec::uniform(n, 20e6, 16e6, 0.01), 4_000_000)
}

fn fig_congested(seeds: &[u64]) -> Result<Output, CliError> {
    let mut points = Vec::new();
    for p in [ProtocolKind::Microcast, ProtocolKind::BittorrentPull, ProtocolKind::None] {
        for n in 1..=7usize {
            points.push(ProtoPoint {
                labels: vec![p.name().into(), n.to_string()],
                cfg: congested_config(p, n),
                pcfg: ProtocolConfig::new(p),
            });
        }
    }
    proto_output(
        &["protocol", "n_devices"],
        &points,
        seeds,
        &[
            "cellular 480/550/610/670 kbit/s on devices 0-3, others none; local 20 Mbit/s with 16 Mbit/s background; p_local=0.01; file 4000000 bytes".into(),
            "protocol none runs only the devices with cellular links".into(),
        ],
    )
}

/// Codec throughput per generation size.
pub fn fig7b(ms: &[usize], n: usize, seconds: f64, seed: u64) -> Result<Output, CliError> {
    if !(seconds > 0.0 && seconds.is_finite()) {
        return Err(CliError::Config(format!("bench seconds {seconds} must be positive")));
    }
    const ROUNDS: usize = 5;
    let mut raw = Table::new(&["m", "n", "encode_mbps", "decode_mbps"]);
    raw.comment(format!(
        "n={n} bytes per packet, {seconds} s per direction per m in {ROUNDS} interleaved rounds, best round kept, single thread"
    ));
    raw.comment("throughput counts source payload bits; wall-clock measurement, not reproducible bit for bit");
    let params: Vec<GenerationParams> =
        ms.iter().map(|&m| GenerationParams::new(m, n).map_err(|e| CliError::Config(e.to_string()))).collect::<Result<_, _>>()?;
    let mut best = vec![(0.0f64, 0.0f64); ms.len()];
    // sequential, and rotating over m so load changes hit every size alike
    for _ in 0..ROUNDS {
        for (p, b) in params.iter().zip(&mut best) {
            let r = measure_codec(*p, Duration::from_secs_f64(seconds / ROUNDS as f64), 1, seed);
            *b = (b.0.max(r.encode_mbps), b.1.max(r.decode_mbps));
        }
    }
    for (&m, (enc, dec)) in ms.iter().zip(best) {
        raw.push(vec![m.to_string(), n.to_string(), fmt_f64(enc), fmt_f64(dec)]);
    }
    raw.sort();
    let agg = aggregate(&raw, &["m", "n"], &["encode_mbps", "decode_mbps"])?;
    Ok(Output { name: "bench".into(), raw, agg })
}

fn codec_check(trials: usize, seed: u64) -> Result<Output, CliError> {
    let params = GenerationParams::default();
    let (results, seconds) = codec_check::run_trials(params, trials, seed);
    let mut raw = Table::new(&["trial", "inserts", "innovative", "flag_mismatches", "decoded_ok"]);
    raw.comment(format!("m={} n={} trials={trials} seed={seed}", params.m(), params.n()));
    raw.comment(format!("elapsed_seconds={seconds:.3}"));
    for r in &results {
        raw.push(vec![
            r.trial.to_string(),
            r.inserts.to_string(),
            r.innovative.to_string(),
            r.flag_mismatches.to_string(),
            u8::from(r.decoded_ok).to_string(),
        ]);
    }
    let mut agg = Table::new(&["trials", "inserts", "flag_mismatches", "decode_failures", "elapsed_seconds"]);
    agg.comments = raw.comments.clone();
    agg.push(vec![
        results.len().to_string(),
        results.iter().map(|r| r.inserts).sum::<usize>().to_string(),
        results.iter().map(|r| r.flag_mismatches).sum::<usize>().to_string(),
        results.iter().filter(|r| !r.decoded_ok).count().to_string(),
        fmt_f64(seconds),
    ]);
    Ok(Output { name: "codec".into(), raw, agg })
}

/// Random topology for the oracle comparison: per-device cellular capacity in
/// [0.5, 2), local capacity in [1, 4), every loss drawn from `losses`.
pub fn random_topology(rng: &mut ChaCha8Rng, n: usize, losses: &[f64]) -> Result<Topology, CliError> {
    let pick = |rng: &mut ChaCha8Rng| losses[rng.gen_range(0..losses.len())];
    let cell: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let cell_loss: Vec<f64> = (0..n).map(|_| pick(rng)).collect();
    let local: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(1.0..4.0)).collect()).collect();
    let local_loss: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| pick(rng)).collect()).collect();
    Ok(Topology::new(cell, cell_loss, local, local_loss, 1.0)?)
}

fn num_oracle(topologies: usize, seeds: &[u64], seed: u64) -> Result<Output, CliError> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for t in 0..topologies {
        let n = rng.gen_range(2..=4);
        cases.push((t, n, random_topology(&mut rng, n, &[0.0, 0.1, 0.2])?));
    }
    let jobs: Vec<(usize, usize, &Topology, Policy)> =
        cases.iter().flat_map(|(t, n, topo)| Policy::ALL.into_iter().map(move |p| (*t, *n, topo, p))).collect();
    let rows: Vec<Vec<String>> = jobs
        .par_iter()
        .map(|&(t, n, topo, policy)| {
            let mut cfg = SolverConfig::new(policy);
            cfg.seeds = seeds.to_vec();
            let sim = simulate(topo, &cfg)?.mean;
            let oracle = centralized_oracle(topo, policy)?;
            let err = (sim - oracle).abs() / oracle;
            Ok(vec![t.to_string(), n.to_string(), policy.name().into(), fmt_f64(sim), fmt_f64(oracle), fmt_f64(err)])
        })
        .collect::<Result<_, CliError>>()?;
    let seconds = start.elapsed().as_secs_f64();
    let mut raw = Table::new(&["topology", "n_devices", "policy", "simulated", "oracle", "rel_error"]);
    raw.comment(format!(
        "{topologies} topologies, N in 2..=4, losses from {{0, 0.1, 0.2}}, cellular capacity U[0.5,2), local capacity U[1,4), gamma=1"
    ));
    raw.comment(format!("solver: 1000 iterations, step 0.02, seeds={seeds:?}; topology seed={seed}"));
    raw.comment(format!("elapsed_seconds={seconds:.3}"));
    raw.rows = rows;
    raw.sort();
    let mut agg = aggregate(&raw, &["policy"], &["rel_error"])?;
    agg.comment(format!("elapsed_seconds={seconds:.3}"));
    let ecol = raw.col("rel_error")?;
    agg.header.push("max_rel_error".into());
    let pcol = raw.col("policy")?;
    for row in &mut agg.rows {
        let max = raw.rows.iter().filter(|r| r[pcol] == row[0]).map(|r| raw.f64_at(r, ecol)).fold(0.0, f64::max);
        row.push(fmt_f64(max));
    }
    Ok(Output { name: "num-oracle".into(), raw, agg })
}

/// Scenario for one liveness seed; the draws mirror the protocol test grid.
pub fn liveness_config(seed: u64) -> SimConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x2545_F491_4F6C_DD1D) ^ 0x5EED);
    let n = rng.gen_range(2..=6);
    let loss = [0.0, 0.01, 0.05, 0.1, 0.2][rng.gen_range(0..5)];
    let mode = [Mode::PseudoAdhoc, Mode::Clique, Mode::Star][rng.gen_range(0..3)];
    let mut devices: Vec<DeviceSpec> = (0..n)
        .map(|_| if rng.gen_bool(0.5) { DeviceSpec::with_rate(rng.gen_range(300e3..900e3)) } else { DeviceSpec::without_cellular() })
        .collect();
    devices[0] = DeviceSpec::with_rate(600e3);
    let m = GenerationParams::default().segment_bytes();
    let mut cfg = SimConfig::new(devices, LocalMediumSpec::uniform(n, 20e6, 0.0, loss), rng.gen_range(5..30) * m);
    cfg.mode = mode;
    cfg.seed = seed;
    cfg.event_log = true;
    cfg
}

fn verdict(r: Result<usize, String>) -> (String, Option<String>) {
    match r {
        Ok(k) => (format!("ok:{k}"), None),
        Err(e) => ("fail".into(), Some(e)),
    }
}

fn liveness(seeds: &[u64]) -> Result<Output, CliError> {
    let na = || ("n/a".to_string(), None);
    let jobs: Vec<(u64, ProtocolKind)> = seeds
        .iter()
        .flat_map(|&s| [ProtocolKind::Microcast, ProtocolKind::BittorrentPull, ProtocolKind::R2Push].map(|p| (s, p)))
        .collect();
    let rows: Vec<Vec<String>> = jobs
        .par_iter()
        .map(|&(seed, protocol)| {
            let cfg = liveness_config(seed);
            let n = cfg.n_devices();
            let m = cfg.params.m();
            let lossless = cfg.local.loss.iter().flatten().all(|&p| p == 0.0);
            let mut row = vec![
                seed.to_string(),
                protocol.name().into(),
                cfg.mode.name().into(),
                n.to_string(),
                fmt_p(cfg.local.loss[0].get(1).copied().unwrap_or(0.0)),
            ];
            let out = match run_protocol(&cfg, &ProtocolConfig::new(protocol)) {
                Ok(o) => o,
                Err(SimError::Stalled { time, detail }) => {
                    row.extend(["stalled".into(), "0".into()]);
                    row.extend(std::iter::repeat("n/a".to_string()).take(5));
                    row.push(format!("stalled at {time:.1}s: {detail}"));
                    return Ok(row);
                }
                Err(e) => return Err(CliError::Config(format!("liveness seed {seed}: {e}"))),
            };
            let status = if out.metrics.partial { "partial" } else { "ok" };
            let checks = [
                if protocol == ProtocolKind::Microcast { verdict(audit::coalescing_dominance(&out.log)) } else { na() },
                if protocol == ProtocolKind::Microcast { verdict(audit::rank_credit(&out.log, m)) } else { na() },
                if protocol == ProtocolKind::R2Push { verdict(audit::r2_cap(&out.log, redundancy_extra(0.03, m))) } else { na() },
                if protocol == ProtocolKind::Microcast && lossless {
                    let k = audit::request_count(&out.log);
                    if k == 0 {
                        ("ok:0".into(), None)
                    } else {
                        ("fail".into(), Some(format!("{k} requests after lossless pushes")))
                    }
                } else {
                    na()
                },
                if protocol == ProtocolKind::BittorrentPull { verdict(audit::piece_lower_bound(&out.log, n, m)) } else { na() },
            ];
            row.push(status.into());
            row.push(out.metrics.completed_devices().to_string());
            let detail: Vec<String> = checks.iter().filter_map(|(_, d)| d.clone()).collect();
            row.extend(checks.into_iter().map(|(v, _)| v));
            row.push(detail.join("; "));
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;
    let mut raw = Table::new(&[
        "seed",
        "protocol",
        "mode",
        "n_devices",
        "p_local",
        "status",
        "completed",
        "coalescing",
        "rank_credit",
        "r2_cap",
        "push_sync",
        "bt_bound",
        "detail",
    ]);
    raw.comment("per seed: N in 2..=6, uniform local loss from {0, 0.01, 0.05, 0.1, 0.2}, random mode, about half the devices with cellular");
    raw.comment("check cells: ok:<cases examined>, fail, or n/a for checks that do not apply");
    raw.rows = rows;
    raw.sort();
    let agg = liveness_summary(&raw)?;
    Ok(Output { name: "liveness".into(), raw, agg })
}

/// Per protocol: runs, runs that finished with every device complete, and
/// failed checks.
pub fn liveness_summary(raw: &Table) -> Result<Table, CliError> {
    let pcol = raw.col("protocol")?;
    let ncol = raw.col("n_devices")?;
    let scol = raw.col("status")?;
    let ccol = raw.col("completed")?;
    let check_cols: Vec<usize> =
        ["coalescing", "rank_credit", "r2_cap", "push_sync", "bt_bound"].iter().map(|c| raw.col(c)).collect::<Result<_, _>>()?;
    let mut agg = Table::new(&["protocol", "runs", "complete_runs", "failed_checks"]);
    agg.comments = raw.comments.clone();
    let mut protocols: Vec<&str> = raw.rows.iter().map(|r| r[pcol].as_str()).collect();
    protocols.sort();
    protocols.dedup();
    for p in protocols {
        let rows: Vec<&Vec<String>> = raw.rows.iter().filter(|r| r[pcol] == p).collect();
        let complete = rows.iter().filter(|r| r[scol] == "ok" && r[ccol] == r[ncol]).count();
        let failed: usize = rows.iter().map(|r| check_cols.iter().filter(|&&c| r[c] == "fail").count()).sum();
        agg.push(vec![p.into(), rows.len().to_string(), complete.to_string(), failed.to_string()]);
    }
    Ok(agg)
}
