//! Checks of protocol invariants against a run's event log.
//!
//! Each check returns the number of cases it examined, or a description of
//! the first violation. The run must have been made with the event log on.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::rlnc::SegmentId;
use crate::sim::LogRecord;

fn kind_is(r: &LogRecord, kind: &str) -> bool {
    r.kind == kind
}

/// Serving k coalesced requests for a segment sends exactly the largest
/// requested count of coded packets, never the sum.
pub fn coalescing_dominance(log: &[LogRecord]) -> Result<usize, String> {
    let mut checked = 0;
    for (i, r) in log.iter().enumerate() {
        if !kind_is(r, "serve") {
            continue;
        }
        let k = r.aux as usize;
        let reqs = &log[i - k..i];
        if reqs.iter().any(|q| !kind_is(q, "serve_request") || q.device != r.device || q.segment != r.segment) {
            return Err(format!("serve at t={} on device {} lacks its request records", r.t, r.device));
        }
        let max = reqs.iter().map(|q| q.value).max().unwrap_or(0);
        let sent = log[i + 1..]
            .iter()
            .take_while(|q| q.t == r.t)
            .filter(|q| q.device == r.device && q.kind == "send_coded_data" && q.segment == r.segment)
            .count() as i64;
        if r.value != max || sent != max {
            return Err(format!(
                "device {} segment {:?} at t={}: {} requests, max dims {max}, sent {sent}",
                r.device, r.segment, r.t, k
            ));
        }
        checked += 1;
    }
    Ok(checked)
}

/// Every request asks for exactly the missing dimensions.
pub fn rank_credit(log: &[LogRecord], m: usize) -> Result<usize, String> {
    let mut checked = 0;
    for r in log.iter().filter(|r| kind_is(r, "request")) {
        let rank = r.aux;
        if r.value < 1 || r.value != m as i64 - rank {
            return Err(format!("device {} asked {} dims at rank {rank} (m={m}) at t={}", r.device, r.value, r.t));
        }
        checked += 1;
    }
    Ok(checked)
}

/// Push streams stay within rank + `extra` and stop after a brake.
pub fn r2_cap(log: &[LogRecord], extra: usize) -> Result<usize, String> {
    let mut braked: BTreeSet<(usize, Option<SegmentId>, Option<usize>)> = BTreeSet::new();
    let mut checked = 0;
    for r in log {
        match r.kind.as_str() {
            "r2_brake_rx" => {
                braked.insert((r.device, r.segment, r.peer));
            }
            "r2_push" => {
                if r.value > r.aux + extra as i64 {
                    return Err(format!("device {} pushed {} at rank {} to {:?}", r.device, r.value, r.aux, r.peer));
                }
                if braked.contains(&(r.device, r.segment, r.peer)) {
                    return Err(format!("device {} pushed {:?} to {:?} after its brake", r.device, r.segment, r.peer));
                }
                checked += 1;
            }
            _ => {}
        }
    }
    Ok(checked)
}

/// Number of requests in the log; zero after lossless initial pushes.
pub fn request_count(log: &[LogRecord]) -> usize {
    log.iter().filter(|r| kind_is(r, "request")).count()
}

/// For every segment, at least one addressed transfer per device that did
/// not fetch it over cellular.
pub fn piece_lower_bound(log: &[LogRecord], n_devices: usize, m: usize) -> Result<usize, String> {
    let mut downloaded: HashMap<SegmentId, BTreeSet<usize>> = HashMap::new();
    let mut pieces: BTreeMap<SegmentId, usize> = BTreeMap::new();
    for r in log {
        match (r.kind.as_str(), r.segment) {
            ("cellular_done", Some(s)) => {
                downloaded.entry(s).or_default().insert(r.device);
            }
            ("send_piece", Some(s)) => *pieces.entry(s).or_default() += 1,
            _ => {}
        }
    }
    for (&s, holders) in &downloaded {
        let lacking = n_devices - holders.len();
        let got = pieces.get(&s).copied().unwrap_or(0);
        if got < lacking * m {
            return Err(format!("segment {s}: {got} pieces sent for {lacking} devices lacking it"));
        }
    }
    Ok(downloaded.len())
}
