use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::message::MessageKind;

/// Counts local-medium usage. Every medium occupation is counted once,
/// however many devices receive it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrafficMeter {
    pub local_bytes_total: u64,
    pub transmissions: u64,
    pub bytes_by_kind: BTreeMap<String, u64>,
    pub count_by_kind: BTreeMap<String, u64>,
    pub tx_bytes: Vec<u64>,
    pub rx_bytes: Vec<u64>,
    pub cellular_bytes: Vec<u64>,
}

impl TrafficMeter {
    pub fn new(n_devices: usize) -> Self {
        Self {
            tx_bytes: vec![0; n_devices],
            rx_bytes: vec![0; n_devices],
            cellular_bytes: vec![0; n_devices],
            ..Self::default()
        }
    }

    pub fn record_occupation(&mut self, transmitter: usize, kind: MessageKind, bytes: usize) {
        let bytes = bytes as u64;
        self.local_bytes_total += bytes;
        self.transmissions += 1;
        *self.bytes_by_kind.entry(kind.name().to_string()).or_default() += bytes;
        *self.count_by_kind.entry(kind.name().to_string()).or_default() += 1;
        self.tx_bytes[transmitter] += bytes;
    }

    pub fn record_reception(&mut self, receiver: usize, bytes: usize) {
        self.rx_bytes[receiver] += bytes as u64;
    }

    pub fn record_cellular(&mut self, device: usize, bytes: usize) {
        self.cellular_bytes[device] += bytes as u64;
    }

    pub fn bytes_of(&self, kind: MessageKind) -> u64 {
        self.bytes_by_kind.get(kind.name()).copied().unwrap_or(0)
    }

    pub fn count_of(&self, kind: MessageKind) -> u64 {
        self.count_by_kind.get(kind.name()).copied().unwrap_or(0)
    }
}
