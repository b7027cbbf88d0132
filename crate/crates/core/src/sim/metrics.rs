use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::meter::TrafficMeter;

/// Summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Per-device time at which the whole file was held.
    pub completion_times: Vec<Option<f64>>,
    /// Mean over completed devices of `file_bits / completion_time`, bit/s.
    pub avg_download_rate: f64,
    /// Latest completion time, or the stop time for a partial run.
    pub completion_time: f64,
    pub local_bytes: u64,
    pub local_bytes_by_kind: BTreeMap<String, u64>,
    pub cellular_bytes: u64,
    /// When every segment was held by at least one device.
    pub cellular_done_time: Option<f64>,
    pub file_bytes: usize,
    /// True when the time cap hit before every device finished.
    pub partial: bool,
    pub events: u64,
    pub end_time: f64,
}

impl Metrics {
    pub(crate) fn from_run(
        cfg: &SimConfig,
        completion: &[Option<f64>],
        meter: &TrafficMeter,
        cellular_done_time: Option<f64>,
        end_time: f64,
        partial: bool,
        events: u64,
    ) -> Self {
        let file_bits = cfg.file_bytes as f64 * 8.0;
        let rates: Vec<f64> = completion.iter().flatten().map(|&t| file_bits / t.max(f64::MIN_POSITIVE)).collect();
        let avg_download_rate = if rates.is_empty() { 0.0 } else { rates.iter().sum::<f64>() / rates.len() as f64 };
        let completion_time = if partial {
            end_time
        } else {
            completion.iter().flatten().fold(0.0, |a: f64, &b| a.max(b))
        };
        Self {
            completion_times: completion.to_vec(),
            avg_download_rate,
            completion_time,
            local_bytes: meter.local_bytes_total,
            local_bytes_by_kind: meter.bytes_by_kind.clone(),
            cellular_bytes: meter.cellular_bytes.iter().sum(),
            cellular_done_time,
            file_bytes: cfg.file_bytes,
            partial,
            events,
            end_time,
        }
    }

    /// Local traffic as a multiple of the file size.
    pub fn traffic_ratio(&self) -> f64 {
        self.local_bytes as f64 / self.file_bytes as f64
    }

    pub fn completed_devices(&self) -> usize {
        self.completion_times.iter().flatten().count()
    }
}
