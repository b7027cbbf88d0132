use crate::error::NumError;

use super::{Policy, Topology};

/// Largest group for which hyperarcs are enumerated.
pub const MAX_HYPERARC_DEVICES: usize = 10;

/// A sender and the receivers reached by one transmission.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperarc {
    pub sender: usize,
    /// Sorted ascending, nonempty, never contains `sender`.
    pub receivers: Vec<usize>,
}

impl Hyperarc {
    pub fn contains(&self, j: usize) -> bool {
        self.receivers.binary_search(&j).is_ok()
    }
}

/// All hyperarcs of an `n`-device group, ordered by sender and then by
/// lexicographic receiver list. That order is the scheduling tie-break.
#[derive(Debug, Clone)]
pub struct HyperarcSet {
    n_devices: usize,
    arcs: Vec<Hyperarc>,
}

impl HyperarcSet {
    pub fn new(n_devices: usize) -> Result<Self, NumError> {
        if n_devices > MAX_HYPERARC_DEVICES {
            return Err(NumError::TooManyDevices { n: n_devices, max: MAX_HYPERARC_DEVICES });
        }
        let mut arcs = Vec::new();
        for sender in 0..n_devices {
            let others: Vec<usize> = (0..n_devices).filter(|&j| j != sender).collect();
            let mut per_sender: Vec<Hyperarc> = (1u32..(1u32 << others.len()))
                .map(|mask| Hyperarc {
                    sender,
                    receivers: others.iter().enumerate().filter(|(b, _)| mask & (1 << b) != 0).map(|(_, &j)| j).collect(),
                })
                .collect();
            per_sender.sort_by(|a, b| a.receivers.cmp(&b.receivers));
            arcs.extend(per_sender);
        }
        Ok(Self { n_devices, arcs })
    }

    /// Only the single-receiver arcs, i.e. the unicast links `i -> j`.
    pub fn links(n_devices: usize) -> Self {
        let arcs = (0..n_devices)
            .flat_map(|i| (0..n_devices).filter(move |&j| j != i).map(move |j| Hyperarc { sender: i, receivers: vec![j] }))
            .collect();
        Self { n_devices, arcs }
    }

    /// Arcs a policy schedules over: every hyperarc for the pseudo-broadcast
    /// policies, the unicast links otherwise.
    pub fn for_policy(n_devices: usize, policy: Policy) -> Result<Self, NumError> {
        match policy {
            Policy::PseudoBroadcast | Policy::PseudoBroadcastNoNc => Self::new(n_devices),
            Policy::Unicast | Policy::NoCoop => Ok(Self::links(n_devices)),
        }
    }

    pub fn n_devices(&self) -> usize {
        self.n_devices
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Hyperarc> {
        self.arcs.iter()
    }

    pub fn get(&self, index: usize) -> &Hyperarc {
        &self.arcs[index]
    }
}

/// Common information rate every receiver of `arc` gets per unit airtime.
///
/// With coding a receiver only needs enough innovative packets, so the rate is
/// set by the worst receiver's goodput. Without coding a packet counts only if
/// every receiver got it, so the rate is the slowest raw capacity times the
/// probability that nobody lost it. A single receiver gives `C_ij (1 - p_ij)`
/// under every policy.
pub fn arc_rate(topo: &Topology, arc: &Hyperarc, policy: Policy) -> f64 {
    let i = arc.sender;
    match policy {
        Policy::PseudoBroadcastNoNc => {
            let min_cap = arc.receivers.iter().map(|&j| topo.local_capacity(i, j)).fold(f64::INFINITY, f64::min);
            let all_ok: f64 = arc.receivers.iter().map(|&j| 1.0 - topo.local_loss(i, j)).product();
            min_cap * all_ok
        }
        _ => arc.receivers.iter().map(|&j| topo.local_goodput(i, j)).fold(f64::INFINITY, f64::min),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_size() {
        for n in 1..=6 {
            let set = HyperarcSet::new(n).unwrap();
            assert_eq!(set.len(), n * ((1 << (n - 1)) - 1));
        }
        assert!(HyperarcSet::new(11).is_err());
    }

    #[test]
    fn order_is_sender_then_lexicographic() {
        let set = HyperarcSet::new(3).unwrap();
        let got: Vec<(usize, Vec<usize>)> = set.iter().map(|a| (a.sender, a.receivers.clone())).collect();
        let want = vec![
            (0, vec![1]),
            (0, vec![1, 2]),
            (0, vec![2]),
            (1, vec![0]),
            (1, vec![0, 2]),
            (1, vec![2]),
            (2, vec![0]),
            (2, vec![0, 1]),
            (2, vec![1]),
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn coded_rate_beats_uncoded_rate_under_loss() {
        let topo = Topology::uniform(4, 1.0, 0.0, 2.0, 0.2, 1.0).unwrap();
        let arc = Hyperarc { sender: 0, receivers: vec![1, 2, 3] };
        assert!((arc_rate(&topo, &arc, Policy::PseudoBroadcast) - 1.6).abs() < 1e-12);
        assert!((arc_rate(&topo, &arc, Policy::PseudoBroadcastNoNc) - 2.0 * 0.512).abs() < 1e-12);
    }
}
