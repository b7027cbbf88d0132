//! Exact optimum of the cooperative download problems via linear programming.
//!
//! Maximizing `log x` and maximizing `x` have the same argmax, and once the
//! per-arc rate is fixed every constraint is linear in
//! `(x, x_ij, g_ij, tau_arc)`, so a single LP over all arcs gives the optimum
//! over every airtime mixture.

use crate::error::NumError;

use super::hyperarc::{arc_rate, HyperarcSet};
use super::lp::maximize;
use super::{Policy, Topology};

/// Largest group the oracle accepts.
pub const MAX_ORACLE_DEVICES: usize = 5;

/// Optimal common video rate for `policy` on `topo`.
///
/// For `NoCoop` there is no common rate; the mean independent goodput is
/// returned so it compares directly with the simulated per-device average.
pub fn centralized_oracle(topo: &Topology, policy: Policy) -> Result<f64, NumError> {
    let n = topo.n_devices();
    if n > MAX_ORACLE_DEVICES {
        return Err(NumError::TooManyDevices { n, max: MAX_ORACLE_DEVICES });
    }
    if policy == Policy::NoCoop {
        return Ok((0..n).map(|i| topo.cellular_goodput(i)).sum::<f64>() / n as f64);
    }
    let arcs = HyperarcSet::for_policy(n, policy)?;

    // variable layout
    let var_x = 0;
    let var_dl = |i: usize, j: usize| 1 + i * n + j;
    let g_base = 1 + n * n;
    let pair_index = |i: usize, j: usize| i * (n - 1) + if j > i { j - 1 } else { j };
    let var_g = |i: usize, j: usize| g_base + pair_index(i, j);
    let tau_base = g_base + n * (n - 1);
    let n_vars = tau_base + arcs.len();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut push = |row: Vec<f64>, b: f64| {
        rows.push(row);
        rhs.push(b);
    };

    // every device receives at least the video rate
    for j in 0..n {
        let mut row = vec![0.0; n_vars];
        row[var_x] = 1.0;
        for i in 0..n {
            row[var_dl(i, j)] = -1.0;
        }
        push(row, 0.0);
    }
    // what i downloads for j it must forward to j
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let mut row = vec![0.0; n_vars];
            row[var_dl(i, j)] = 1.0;
            row[var_g(i, j)] = -1.0;
            push(row, 0.0);
        }
    }
    // downlink capacity
    for i in 0..n {
        for j in 0..n {
            let mut row = vec![0.0; n_vars];
            row[var_dl(i, j)] = 1.0;
            push(row, topo.cellular_goodput(i));
        }
    }
    // local rate bounded by the airtime given to arcs covering (i, j)
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let mut row = vec![0.0; n_vars];
            row[var_g(i, j)] = 1.0;
            for (a, arc) in arcs.iter().enumerate() {
                if arc.sender == i && arc.contains(j) {
                    row[tau_base + a] = -arc_rate(topo, arc, policy);
                }
            }
            push(row, 0.0);
        }
    }
    // shared airtime
    let mut row = vec![0.0; n_vars];
    for a in 0..arcs.len() {
        row[tau_base + a] = 1.0;
    }
    push(row, topo.gamma());

    let mut objective = vec![0.0; n_vars];
    objective[var_x] = 1.0;
    Ok(maximize(&objective, &rows, &rhs)?.value.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_device_gets_its_goodput() {
        let topo = Topology::uniform(1, 1.5, 0.2, 0.0, 0.0, 1.0).unwrap();
        for policy in Policy::ALL {
            assert!((centralized_oracle(&topo, policy).unwrap() - 1.2).abs() < 1e-9);
        }
    }

    #[test]
    fn two_devices_with_fast_local_link_double_the_rate() {
        let topo = Topology::uniform(2, 1.0, 0.0, 10.0, 0.0, 1.0).unwrap();
        for policy in [Policy::PseudoBroadcast, Policy::PseudoBroadcastNoNc, Policy::Unicast] {
            assert!((centralized_oracle(&topo, policy).unwrap() - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn coding_never_hurts() {
        let topo = Topology::uniform(2, 1.0, 0.0, 10.0, 0.2, 1.0).unwrap();
        let nc = centralized_oracle(&topo, Policy::PseudoBroadcast).unwrap();
        let nonc = centralized_oracle(&topo, Policy::PseudoBroadcastNoNc).unwrap();
        assert!(nonc <= nc + 1e-9);
    }

    #[test]
    fn all_zero_capacity_is_zero() {
        let topo = Topology::uniform(3, 0.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(centralized_oracle(&topo, Policy::PseudoBroadcast).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_closed_forms() {
        // unicast: 1 + c*gamma*(1-p)/N capped at N; coded broadcast to all
        // others: 1 + c*gamma*(1-p)*(N-1)/N capped at N
        for n in 2..=5 {
            for &(c, p) in &[(4.0, 0.0), (2.0, 0.2), (4.0, 0.3)] {
                let topo = Topology::uniform(n, 1.0, 0.0, c, p, 1.0).unwrap();
                let nf = n as f64;
                let uni = (1.0 + c * (1.0 - p) / nf).min(nf);
                let pb = (1.0 + c * (1.0 - p) * (nf - 1.0) / nf).min(nf);
                assert!((centralized_oracle(&topo, Policy::Unicast).unwrap() - uni).abs() < 1e-7, "n={n}");
                assert!((centralized_oracle(&topo, Policy::PseudoBroadcast).unwrap() - pb).abs() < 1e-7, "n={n}");
            }
        }
    }

    #[test]
    fn guard_rejects_large_groups() {
        let topo = Topology::uniform(6, 1.0, 0.0, 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(centralized_oracle(&topo, Policy::Unicast), Err(NumError::TooManyDevices { .. })));
    }
}
