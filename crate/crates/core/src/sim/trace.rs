use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Piecewise-constant cellular rate over time.
///
/// Each point `(t, bps)` sets the rate from `t` until the next point. The
/// first rate also applies before the first point; the last holds forever.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTrace {
    points: Vec<(f64, f64)>,
}

impl RateTrace {
    pub fn constant(bps: f64) -> Self {
        Self { points: vec![(0.0, bps)] }
    }

    pub fn from_points(mut points: Vec<(f64, f64)>) -> Result<Self, SimError> {
        if points.is_empty() {
            return Err(SimError::InvalidConfig("rate trace has no points".into()));
        }
        if points.iter().any(|&(t, r)| !t.is_finite() || !r.is_finite() || r < 0.0) {
            return Err(SimError::InvalidConfig("rate trace values must be finite, rates >= 0".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { points })
    }

    /// Parses `t_seconds,kbps` rows. A header row and `#` comments are skipped.
    pub fn from_csv(text: &str) -> Result<Self, SimError> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(t), Some(k)) = (cols.next(), cols.next()) else {
                return Err(SimError::InvalidConfig(format!("trace line {}: expected t_seconds,kbps", lineno + 1)));
            };
            match (t.parse::<f64>(), k.parse::<f64>()) {
                (Ok(t), Ok(k)) => points.push((t, k * 1000.0)),
                _ if lineno == 0 && t.parse::<f64>().is_err() => continue,
                _ => return Err(SimError::InvalidConfig(format!("trace line {}: not numeric: {line}", lineno + 1))),
            }
        }
        Self::from_points(points)
    }

    pub fn rate_at(&self, t: f64) -> f64 {
        let idx = self.points.partition_point(|&(pt, _)| pt <= t);
        self.points[idx.saturating_sub(1)].1
    }

    /// Time at which `bits` started at `start` finish, or `None` if the rate
    /// stays at zero before they do.
    pub fn transfer_end(&self, start: f64, bits: f64) -> Option<f64> {
        if bits <= 0.0 {
            return Some(start);
        }
        let mut remaining = bits;
        let mut t = start;
        let mut idx = self.points.partition_point(|&(pt, _)| pt <= t).saturating_sub(1);
        loop {
            let rate = self.points[idx].1;
            let seg_end = self.points.get(idx + 1).map_or(f64::INFINITY, |p| p.0.max(t));
            if rate > 0.0 {
                let finish = t + remaining / rate;
                if finish <= seg_end {
                    return Some(finish);
                }
                remaining -= rate * (seg_end - t);
            }
            if seg_end.is_infinite() {
                return None;
            }
            t = seg_end;
            idx += 1;
        }
    }

    pub fn mean_rate(&self, horizon: f64) -> f64 {
        let bits_by = |end: f64| {
            let mut bits = 0.0;
            for (k, &(t, r)) in self.points.iter().enumerate() {
                let from = if k == 0 { 0.0 } else { t.max(0.0) };
                let to = self.points.get(k + 1).map_or(end, |p| p.0.min(end));
                if to > from {
                    bits += r * (to - from);
                }
            }
            bits
        };
        bits_by(horizon) / horizon
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_rate_arithmetic() {
        let tr = RateTrace::constant(550_000.0);
        let end = tr.transfer_end(0.0, 68_750.0 * 8.0).unwrap();
        assert!((end - 1.0).abs() < 1e-12);
    }

    #[test]
    fn crosses_rate_changes() {
        let tr = RateTrace::from_points(vec![(0.0, 1000.0), (2.0, 0.0), (5.0, 4000.0)]).unwrap();
        // 2000 bits by t=2, nothing until 5, then 2000 more bits take 0.5 s
        assert!((tr.transfer_end(0.0, 4000.0).unwrap() - 5.5).abs() < 1e-12);
        assert!((tr.transfer_end(3.0, 4000.0).unwrap() - 6.0).abs() < 1e-12);
        assert_eq!(tr.rate_at(3.0), 0.0);
        assert_eq!(tr.rate_at(-1.0), 1000.0);
    }

    #[test]
    fn zero_tail_never_finishes() {
        let tr = RateTrace::from_points(vec![(0.0, 1000.0), (1.0, 0.0)]).unwrap();
        assert_eq!(tr.transfer_end(0.0, 2000.0), None);
    }

    #[test]
    fn csv_parsing() {
        let tr = RateTrace::from_csv("t_seconds,kbps\n0,550\n# slow patch\n10, 20\n").unwrap();
        assert_eq!(tr.rate_at(5.0), 550_000.0);
        assert_eq!(tr.rate_at(11.0), 20_000.0);
        assert!(RateTrace::from_csv("0,abc\n1,2").is_err());
    }
}
