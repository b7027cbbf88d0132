//! Queue-based subgradient solution of the cooperative download problems and
//! the iterative ON/OFF loss simulation around it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::NumError;

use super::hyperarc::{arc_rate, HyperarcSet};
use super::{Policy, Topology};

/// Lagrange multipliers. `lambda[j]` behaves as the source queue for device
/// `j`, `eta[i][j]` as device `i`'s queue of data to forward to `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub lambda: Vec<f64>,
    pub eta: Vec<Vec<f64>>,
}

impl DualState {
    pub fn zeros(n_devices: usize) -> Self {
        Self { lambda: vec![0.0; n_devices], eta: vec![vec![0.0; n_devices]; n_devices] }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.lambda.iter().chain(self.eta.iter().flatten()).all(|&v| v >= 0.0)
    }
}

/// Primal variables for one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalState {
    pub x: f64,
    pub x_dl: Vec<Vec<f64>>,
    pub schedule: Schedule,
}

/// Outcome of local scheduling: airtime per arc, the resulting per-arc
/// broadcast rate, and per-link rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Index into the policy's [`HyperarcSet`] of the arc given airtime, if any.
    pub active: Option<usize>,
    pub tau: Vec<f64>,
    pub arc_rate: Vec<f64>,
    pub g: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub policy: Policy,
    pub iterations: usize,
    pub step_size: f64,
    pub seeds: Vec<u64>,
    /// Upper clamp on the source rate. `None` uses the aggregate cellular
    /// capacity.
    pub x_cap: Option<f64>,
}

impl SolverConfig {
    pub fn new(policy: Policy) -> Self {
        Self { policy, iterations: 1000, step_size: 0.02, seeds: (0..10).collect(), x_cap: None }
    }

    fn validate(&self) -> Result<(), NumError> {
        if self.iterations == 0 {
            return Err(NumError::InvalidConfig("iterations must be >= 1".into()));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(NumError::InvalidConfig(format!("step size {} must be > 0", self.step_size)));
        }
        if self.seeds.is_empty() {
            return Err(NumError::InvalidConfig("at least one seed required".into()));
        }
        Ok(())
    }
}

/// Source rate maximizing `log x - x * sum(lambda)`, i.e. `1 / sum(lambda)`,
/// clamped to `(0, x_cap]`.
pub fn flow_control(dual: &DualState, x_cap: f64) -> f64 {
    let total: f64 = dual.lambda.iter().sum();
    if total <= 0.0 {
        return x_cap;
    }
    (1.0 / total).min(x_cap)
}

/// Bang-bang downlink split: device `i` downloads for `j` at full goodput when
/// the source queue for `j` exceeds `i`'s forwarding queue to `j`.
pub fn downlink_rate_control(dual: &DualState, topo: &Topology) -> Vec<Vec<f64>> {
    let n = topo.n_devices();
    let mut x_dl = vec![vec![0.0; n]; n];
    for (i, row) in x_dl.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let eta = if i == j { 0.0 } else { dual.eta[i][j] };
            if dual.lambda[j] - eta > 0.0 {
                *v = topo.cellular_goodput(i);
            }
        }
    }
    x_dl
}

/// Primal step for the current duals.
pub fn primal_step(dual: &DualState, topo: &Topology, scheduler: &LocalScheduler, x_cap: f64) -> PrimalState {
    PrimalState {
        x: flow_control(dual, x_cap),
        x_dl: downlink_rate_control(dual, topo),
        schedule: scheduler.schedule(dual),
    }
}

/// Max-weight local scheduler with the arc set and rates precomputed for one
/// topology and policy.
#[derive(Debug, Clone)]
pub struct LocalScheduler {
    arcs: HyperarcSet,
    rates: Vec<f64>,
    gamma: f64,
}

impl LocalScheduler {
    pub fn new(topo: &Topology, policy: Policy) -> Result<Self, NumError> {
        let arcs = HyperarcSet::for_policy(topo.n_devices(), policy)?;
        let rates = arcs.iter().map(|a| arc_rate(topo, a, policy)).collect();
        Ok(Self { arcs, rates, gamma: topo.gamma() })
    }

    pub fn arcs(&self) -> &HyperarcSet {
        &self.arcs
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Backpressure weight of arc `a`: summed forwarding queues of its
    /// receivers times its broadcast rate.
    pub fn weight(&self, dual: &DualState, a: usize) -> f64 {
        let arc = self.arcs.get(a);
        let backlog: f64 = arc.receivers.iter().map(|&j| dual.eta[arc.sender][j]).sum();
        backlog * self.rates[a]
    }

    pub fn schedule(&self, dual: &DualState) -> Schedule {
        let n = self.arcs.n_devices();
        let mut best: Option<(usize, f64)> = None;
        for a in 0..self.arcs.len() {
            let w = self.weight(dual, a);
            // strict comparison keeps the earliest arc on ties
            if w > 0.0 && best.map_or(true, |(_, bw)| w > bw) {
                best = Some((a, w));
            }
        }
        let mut tau = vec![0.0; self.arcs.len()];
        let mut arc_rate = vec![0.0; self.arcs.len()];
        let mut g = vec![vec![0.0; n]; n];
        if let Some((a, _)) = best {
            tau[a] = self.gamma;
            arc_rate[a] = self.rates[a] * self.gamma;
            let arc = self.arcs.get(a);
            for &j in &arc.receivers {
                g[arc.sender][j] = arc_rate[a];
            }
        }
        Schedule { active: best.map(|(a, _)| a), tau, arc_rate, g }
    }
}

/// One-shot form of [`LocalScheduler::schedule`].
pub fn local_schedule(dual: &DualState, topo: &Topology, policy: Policy) -> Result<Schedule, NumError> {
    if policy == Policy::NoCoop {
        return Err(NumError::InvalidConfig("no local scheduling without cooperation".into()));
    }
    Ok(LocalScheduler::new(topo, policy)?.schedule(dual))
}

/// `lambda_j <- max(0, lambda_j + beta (x - sum_i x_ij))`.
pub fn queue_update_source(dual: &mut DualState, x: f64, x_dl: &[Vec<f64>], beta: f64) {
    for (j, lambda) in dual.lambda.iter_mut().enumerate() {
        let inflow: f64 = x_dl.iter().map(|row| row[j]).sum();
        *lambda = (*lambda + beta * (x - inflow)).max(0.0);
    }
}

/// `eta_ij <- max(0, eta_ij + beta (x_ij - g_ij))` for `j != i`.
pub fn queue_update_local(dual: &mut DualState, x_dl: &[Vec<f64>], g: &[Vec<f64>], beta: f64) {
    for (i, row) in dual.eta.iter_mut().enumerate() {
        for (j, eta) in row.iter_mut().enumerate() {
            if i != j {
                *eta = (*eta + beta * (x_dl[i][j] - g[i][j])).max(0.0);
            }
        }
    }
}

/// Result of [`simulate`] for one policy on one topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub policy: Policy,
    pub n_devices: usize,
    /// Per-seed delivered rate, averaged over devices and the final half of
    /// the iterations.
    pub per_seed: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Source rate `x` averaged the same way.
    pub mean_source_rate: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// ON/OFF draws for one iteration, always taken in the same order (cellular
/// by device, then local links row-major) so policies see the same channel.
struct ChannelDraw {
    cellular_on: Vec<bool>,
    local_on: Vec<Vec<bool>>,
}

impl ChannelDraw {
    fn sample<R: Rng>(topo: &Topology, rng: &mut R) -> Self {
        let n = topo.n_devices();
        let cellular_on = (0..n).map(|i| rng.gen::<f64>() >= topo.cellular_loss(i)).collect();
        let local_on = (0..n)
            .map(|i| (0..n).map(|j| if i == j { true } else { rng.gen::<f64>() >= topo.local_loss(i, j) }).collect())
            .collect();
        Self { cellular_on, local_on }
    }
}

struct SeedOutcome {
    delivered: f64,
    source: f64,
}

fn run_seed(topo: &Topology, cfg: &SolverConfig, scheduler: Option<&LocalScheduler>, seed: u64) -> SeedOutcome {
    let n = topo.n_devices();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x_cap = cfg.x_cap.unwrap_or_else(|| topo.aggregate_cellular_capacity());
    let warmup = cfg.iterations / 2;
    let window = (cfg.iterations - warmup) as f64;

    if cfg.policy == Policy::NoCoop {
        let mut got = 0.0;
        for t in 0..cfg.iterations {
            let draw = ChannelDraw::sample(topo, &mut rng);
            if t >= warmup {
                got += (0..n).filter(|&i| draw.cellular_on[i]).map(|i| topo.cellular_capacity(i)).sum::<f64>();
            }
        }
        let rate = got / window / n as f64;
        return SeedOutcome { delivered: rate, source: rate };
    }

    let scheduler = scheduler.expect("cooperative policy has a scheduler");
    let mut dual = DualState::zeros(n);
    // real forwarding backlogs, for delivered-rate accounting
    let mut backlog = vec![vec![0.0; n]; n];
    let mut injected = 0.0;
    let mut arrived = vec![0.0; n];
    let mut delivered_at_warmup = 0.0;
    let mut source_sum = 0.0;

    for t in 0..cfg.iterations {
        let draw = ChannelDraw::sample(topo, &mut rng);
        let PrimalState { x, x_dl, schedule: sched } = primal_step(&dual, topo, scheduler, x_cap);

        // realized rates: raw capacity on ON links, so the mean matches the
        // expected-capacity decision
        let mut x_real = vec![vec![0.0; n]; n];
        for i in 0..n {
            if draw.cellular_on[i] {
                for j in 0..n {
                    if x_dl[i][j] > 0.0 {
                        x_real[i][j] = topo.cellular_capacity(i);
                    }
                }
            }
        }
        let mut g_real = vec![vec![0.0; n]; n];
        if let Some(a) = sched.active {
            let arc = scheduler.arcs().get(a);
            let i = arc.sender;
            match cfg.policy {
                Policy::PseudoBroadcastNoNc => {
                    if arc.receivers.iter().all(|&j| draw.local_on[i][j]) {
                        let min_cap = arc.receivers.iter().map(|&j| topo.local_capacity(i, j)).fold(f64::INFINITY, f64::min);
                        for &j in &arc.receivers {
                            g_real[i][j] = min_cap * sched.tau[a];
                        }
                    }
                }
                _ => {
                    for &j in &arc.receivers {
                        if draw.local_on[i][j] {
                            g_real[i][j] = sched.g[i][j] / (1.0 - topo.local_loss(i, j));
                        }
                    }
                }
            }
        }

        injected += x;
        for j in 0..n {
            arrived[j] += x_real[j][j];
            for i in (0..n).filter(|&i| i != j) {
                backlog[i][j] += x_real[i][j];
                let served = backlog[i][j].min(g_real[i][j]);
                backlog[i][j] -= served;
                arrived[j] += served;
            }
        }
        let delivered: f64 = arrived.iter().map(|&a| a.min(injected)).sum::<f64>() / n as f64;
        if t + 1 == warmup {
            delivered_at_warmup = delivered;
        }
        if t >= warmup {
            source_sum += x;
        }
        if t + 1 == cfg.iterations {
            let delivered_rate = (delivered - delivered_at_warmup) / window;
            queue_update_source(&mut dual, x, &x_real, cfg.step_size);
            queue_update_local(&mut dual, &x_real, &g_real, cfg.step_size);
            debug_assert!(dual.is_nonnegative());
            return SeedOutcome { delivered: delivered_rate, source: source_sum / window };
        }

        queue_update_source(&mut dual, x, &x_real, cfg.step_size);
        queue_update_local(&mut dual, &x_real, &g_real, cfg.step_size);
        debug_assert!(dual.is_nonnegative());
    }
    unreachable!("loop returns on the final iteration")
}

/// Runs the subgradient iteration under random ON/OFF links for every seed
/// and reports the long-run delivered rate.
pub fn simulate(topo: &Topology, cfg: &SolverConfig) -> Result<ThroughputReport, NumError> {
    cfg.validate()?;
    let scheduler = match cfg.policy {
        Policy::NoCoop => None,
        p => Some(LocalScheduler::new(topo, p)?),
    };
    let outcomes: Vec<SeedOutcome> = cfg.seeds.iter().map(|&s| run_seed(topo, cfg, scheduler.as_ref(), s)).collect();
    let per_seed: Vec<f64> = outcomes.iter().map(|o| o.delivered).collect();
    let (mean, std) = mean_std(&per_seed);
    let mean_source_rate = outcomes.iter().map(|o| o.source).sum::<f64>() / outcomes.len() as f64;
    Ok(ThroughputReport { policy: cfg.policy, n_devices: topo.n_devices(), per_seed, mean, std, mean_source_rate })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dual(lambda: &[f64], eta: &[&[f64]]) -> DualState {
        DualState { lambda: lambda.to_vec(), eta: eta.iter().map(|r| r.to_vec()).collect() }
    }

    #[test]
    fn flow_control_closed_form() {
        assert!((flow_control(&dual(&[1.0, 1.0, 1.0], &[]), 9.0) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(flow_control(&dual(&[0.0, 0.0], &[]), 2.0), 2.0);
        assert!((flow_control(&dual(&[0.5, 0.5], &[]), 9.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn downlink_bang_bang() {
        let topo = Topology::new(
            vec![1.0, 1.0],
            vec![0.0, 0.2],
            vec![vec![0.0; 2]; 2],
            vec![vec![0.0; 2]; 2],
            1.0,
        )
        .unwrap();
        let d = dual(&[2.0, 1.0], &[&[0.0, 2.0], &[1.0, 0.0]]);
        let x = downlink_rate_control(&d, &topo);
        assert_eq!(x[1][0], 0.8); // lambda 2 > eta 1, capacity scaled by loss
        assert_eq!(x[0][1], 0.0); // lambda 1 < eta 2
        assert_eq!(x[0][0], 1.0); // diagonal has no forwarding queue
        let d = dual(&[2.0, 1.0], &[&[0.0, 0.0], &[1.0, 0.0]]);
        assert_eq!(downlink_rate_control(&d, &topo)[1][0], 0.8);
    }

    #[test]
    fn schedule_single_positive_weight() {
        let topo = Topology::uniform(2, 1.0, 0.0, 1.0, 0.0, 1.0).unwrap();
        let s = local_schedule(&dual(&[0.0, 0.0], &[&[0.0, 1.0], &[0.0, 0.0]]), &topo, Policy::PseudoBroadcast).unwrap();
        assert_eq!(s.active, Some(0));
        assert_eq!(s.tau, vec![1.0, 0.0]);
        assert_eq!(s.g, vec![vec![0.0, 1.0], vec![0.0, 0.0]]);
    }

    #[test]
    fn schedule_idles_without_backlog() {
        let topo = Topology::uniform(3, 1.0, 0.0, 1.0, 0.0, 1.0).unwrap();
        for policy in [Policy::PseudoBroadcast, Policy::PseudoBroadcastNoNc, Policy::Unicast] {
            let s = local_schedule(&DualState::zeros(3), &topo, policy).unwrap();
            assert_eq!(s.active, None);
            assert!(s.tau.iter().all(|&t| t == 0.0));
            assert!(s.g.iter().flatten().all(|&g| g == 0.0));
        }
    }

    #[test]
    fn queue_updates() {
        let mut d = dual(&[1.0, 0.0], &[&[0.0, 0.5], &[0.0, 0.0]]);
        queue_update_source(&mut d, 2.0, &[vec![1.0, 0.0], vec![0.0, 3.0]], 0.1);
        assert!((d.lambda[0] - 1.1).abs() < 1e-12);
        assert_eq!(d.lambda[1], 0.0);
        queue_update_local(&mut d, &[vec![0.0, 1.0], vec![1.0, 0.0]], &[vec![0.0, 0.0], vec![2.0, 0.0]], 0.05);
        assert!((d.eta[0][1] - 0.55).abs() < 1e-12);
        assert_eq!(d.eta[1][0], 0.0);

        let mut balanced = dual(&[0.7], &[&[0.0]]);
        queue_update_source(&mut balanced, 1.0, &[vec![1.0]], 0.3);
        assert_eq!(balanced.lambda[0], 0.7);
    }

    #[test]
    fn single_device_saturates_its_link() {
        let topo = Topology::uniform(1, 1.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        let r = simulate(&topo, &SolverConfig::new(Policy::PseudoBroadcast)).unwrap();
        assert!((r.mean - 1.0).abs() < 0.05, "{}", r.mean);
    }

    #[test]
    fn no_coop_is_flat_at_goodput() {
        for n in 1..=8 {
            let topo = Topology::uniform(n, 1.0, 0.0, 1.0, 0.0, 1.0).unwrap();
            let r = simulate(&topo, &SolverConfig::new(Policy::NoCoop)).unwrap();
            assert_eq!(r.mean, 1.0);
            assert_eq!(r.std, 0.0);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let topo = Topology::uniform(3, 1.0, 0.1, 2.0, 0.1, 1.0).unwrap();
        let cfg = SolverConfig::new(Policy::PseudoBroadcast);
        assert_eq!(simulate(&topo, &cfg).unwrap(), simulate(&topo, &cfg).unwrap());
    }
}
