use serde::{Deserialize, Serialize};

use crate::error::NumError;

/// Capacities and loss probabilities of the cellular downlinks and the local
/// links, plus the local airtime budget.
///
/// Rates are in arbitrary units per iteration. A device with no cellular link
/// has capacity 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    n_devices: usize,
    cellular_capacity: Vec<f64>,
    cellular_loss: Vec<f64>,
    local_capacity: Vec<Vec<f64>>,
    local_loss: Vec<Vec<f64>>,
    gamma: f64,
}

fn check_prob(p: f64, what: &str) -> Result<(), NumError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(NumError::InvalidTopology(format!("{what} loss {p} outside [0,1]")));
    }
    Ok(())
}

fn check_cap(c: f64, what: &str) -> Result<(), NumError> {
    if !(c.is_finite() && c >= 0.0) {
        return Err(NumError::InvalidTopology(format!("{what} capacity {c} must be finite and >= 0")));
    }
    Ok(())
}

impl Topology {
    pub fn new(
        cellular_capacity: Vec<f64>,
        cellular_loss: Vec<f64>,
        local_capacity: Vec<Vec<f64>>,
        local_loss: Vec<Vec<f64>>,
        gamma: f64,
    ) -> Result<Self, NumError> {
        let n = cellular_capacity.len();
        if n == 0 {
            return Err(NumError::InvalidTopology("no devices".into()));
        }
        if cellular_loss.len() != n || local_capacity.len() != n || local_loss.len() != n {
            return Err(NumError::InvalidTopology("per-device vectors differ in length".into()));
        }
        if local_capacity.iter().chain(&local_loss).any(|row| row.len() != n) {
            return Err(NumError::InvalidTopology("local matrices must be N x N".into()));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(NumError::InvalidTopology(format!("gamma {gamma} outside (0,1]")));
        }
        for i in 0..n {
            check_cap(cellular_capacity[i], "cellular")?;
            check_prob(cellular_loss[i], "cellular")?;
            for j in 0..n {
                if i != j {
                    check_cap(local_capacity[i][j], "local")?;
                    check_prob(local_loss[i][j], "local")?;
                }
            }
        }
        Ok(Self { n_devices: n, cellular_capacity, cellular_loss, local_capacity, local_loss, gamma })
    }

    /// Every device and every local link identical.
    pub fn uniform(
        n_devices: usize,
        cellular_capacity: f64,
        cellular_loss: f64,
        local_capacity: f64,
        local_loss: f64,
        gamma: f64,
    ) -> Result<Self, NumError> {
        let n = n_devices;
        Self::new(
            vec![cellular_capacity; n],
            vec![cellular_loss; n],
            vec![vec![local_capacity; n]; n],
            vec![vec![local_loss; n]; n],
            gamma,
        )
    }

    pub fn n_devices(&self) -> usize {
        self.n_devices
    }

    pub fn cellular_capacity(&self, i: usize) -> f64 {
        self.cellular_capacity[i]
    }

    pub fn cellular_loss(&self, i: usize) -> f64 {
        self.cellular_loss[i]
    }

    pub fn local_capacity(&self, i: usize, j: usize) -> f64 {
        self.local_capacity[i][j]
    }

    pub fn local_loss(&self, i: usize, j: usize) -> f64 {
        self.local_loss[i][j]
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Expected cellular goodput `C_i (1 - p_i)`.
    pub fn cellular_goodput(&self, i: usize) -> f64 {
        self.cellular_capacity[i] * (1.0 - self.cellular_loss[i])
    }

    /// Expected local goodput `C_ij (1 - p_ij)`.
    pub fn local_goodput(&self, i: usize, j: usize) -> f64 {
        self.local_capacity[i][j] * (1.0 - self.local_loss[i][j])
    }

    pub fn aggregate_cellular_capacity(&self) -> f64 {
        self.cellular_capacity.iter().sum()
    }

    pub fn set_local_loss(&mut self, i: usize, j: usize, p: f64) -> Result<(), NumError> {
        check_prob(p, "local")?;
        self.local_loss[i][j] = p;
        Ok(())
    }
}
