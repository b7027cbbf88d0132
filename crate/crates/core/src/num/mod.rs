//! Network utility maximization for cooperative download.
//!
//! A source streams at rate `x` to `N` devices. Device `i` downloads over its
//! cellular link on behalf of device `j` at `x_ij` and forwards over the shared
//! local medium at `g_ij`. Local transmissions are scheduled either over
//! hyperarcs (one transmission overheard by a receiver set) or over unicast
//! links, within an airtime budget `gamma`.

mod hyperarc;
pub mod lp;
mod oracle;
mod solver;
mod topology;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use hyperarc::{arc_rate, Hyperarc, HyperarcSet, MAX_HYPERARC_DEVICES};
pub use oracle::{centralized_oracle, MAX_ORACLE_DEVICES};
pub use solver::{
    downlink_rate_control, flow_control, local_schedule, primal_step, queue_update_local, queue_update_source, simulate, DualState,
    LocalScheduler, PrimalState, Schedule, SolverConfig, ThroughputReport,
};
pub use topology::Topology;

/// Cooperation policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Overheard transmissions, network coded.
    PseudoBroadcast,
    /// Overheard transmissions, plain packets.
    PseudoBroadcastNoNc,
    /// Addressed transmissions only.
    Unicast,
    /// Every device downloads alone.
    NoCoop,
}

impl Policy {
    pub const ALL: [Policy; 4] = [Policy::PseudoBroadcast, Policy::PseudoBroadcastNoNc, Policy::Unicast, Policy::NoCoop];

    pub fn name(self) -> &'static str {
        match self {
            Policy::PseudoBroadcast => "pseudo_broadcast",
            Policy::PseudoBroadcastNoNc => "pseudo_broadcast_nonc",
            Policy::Unicast => "unicast",
            Policy::NoCoop => "no_coop",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Policy::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| format!("unknown policy '{s}'"))
    }
}
