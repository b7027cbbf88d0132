//! Acceptance checks over recipe outputs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use crate::recipes::{Output, Recipe};
use crate::table::Table;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    NotRun,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotRun => "NOT RUN",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub id: u8,
    pub title: &'static str,
    pub measured: String,
    pub bound: String,
    pub status: Status,
    /// Offending rows or the reason a check could not be made.
    pub detail: Option<String>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "criterion {} [{}] {}: measured {}; bound {}", self.id, self.status, self.title, self.measured, self.bound)?;
        if let Some(d) = &self.detail {
            write!(f, "; {d}")?;
        }
        Ok(())
    }
}

/// Where recipe outputs come from.
pub trait Source {
    fn get(&self, recipe: Recipe) -> Result<Option<Output>, CliError>;
}

impl Source for BTreeMap<Recipe, Output> {
    fn get(&self, recipe: Recipe) -> Result<Option<Output>, CliError> {
        Ok(BTreeMap::get(self, &recipe).cloned())
    }
}

/// A results directory as written by `recipe`.
pub struct Dir(pub PathBuf);

impl Source for Dir {
    fn get(&self, recipe: Recipe) -> Result<Option<Output>, CliError> {
        let raw = Output::raw_path(&self.0, recipe.name());
        let agg = Output::agg_path(&self.0, recipe.name());
        if !raw.exists() || !agg.exists() {
            return Ok(None);
        }
        Ok(Some(Output { name: recipe.name().into(), raw: Table::read(&raw)?, agg: Table::read(&agg)? }))
    }
}

/// Recipe CSVs in `dir` last modified before `reference`.
pub fn stale_files(dir: &Path, reference: SystemTime) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for r in Recipe::ALL {
        for p in [Output::raw_path(dir, r.name()), Output::agg_path(dir, r.name())] {
            if let Ok(t) = std::fs::metadata(&p).and_then(|m| m.modified()) {
                if t < reference {
                    out.push(p);
                }
            }
        }
    }
    out
}

pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub recipes: &'static [Recipe],
    check: fn(&[Output]) -> Result<Check, CliError>,
}

struct Check {
    measured: String,
    bound: String,
    failures: Vec<String>,
}

pub const CRITERIA: [Criterion; 9] = [
    Criterion { id: 1, title: "codec round trips", recipes: &[Recipe::CodecCheck], check: codec_correctness },
    Criterion { id: 2, title: "codec throughput", recipes: &[Recipe::Fig7b], check: codec_throughput },
    Criterion { id: 3, title: "solver vs oracle", recipes: &[Recipe::NumOracle], check: oracle_equivalence },
    Criterion { id: 4, title: "throughput vs device count", recipes: &[Recipe::Fig4a, Recipe::Fig4b], check: device_count_shape },
    Criterion { id: 5, title: "throughput vs local loss", recipes: &[Recipe::Fig5a, Recipe::Fig5b], check: loss_shape },
    Criterion { id: 6, title: "local traffic ratio", recipes: &[Recipe::Fig6b], check: traffic_ratio },
    Criterion { id: 7, title: "adaptive cellular split", recipes: &[Recipe::FigMicrodownload], check: adaptivity },
    Criterion { id: 8, title: "congested local network", recipes: &[Recipe::FigCongested], check: congested },
    Criterion { id: 9, title: "protocol invariants and liveness", recipes: &[Recipe::Liveness], check: liveness },
];

pub fn evaluate(c: &Criterion, source: &dyn Source) -> Verdict {
    let mut outputs = Vec::new();
    let mut missing = Vec::new();
    let verdict = |status, measured: String, bound: String, detail| Verdict { id: c.id, title: c.title, measured, bound, status, detail };
    for &r in c.recipes {
        match source.get(r) {
            Ok(Some(o)) => outputs.push(o),
            Ok(None) => missing.push(r.name()),
            Err(e) => return verdict(Status::Fail, "-".into(), "-".into(), Some(format!("unreadable results: {e}"))),
        }
    }
    if !missing.is_empty() {
        return verdict(Status::NotRun, "-".into(), "-".into(), Some(format!("missing recipe output: {}", missing.join(", "))));
    }
    match (c.check)(&outputs) {
        Ok(chk) if chk.failures.is_empty() => verdict(Status::Pass, chk.measured, chk.bound, None),
        Ok(chk) => verdict(Status::Fail, chk.measured, chk.bound, Some(chk.failures.join("; "))),
        Err(e) => verdict(Status::Fail, "-".into(), "-".into(), Some(format!("malformed results: {e}"))),
    }
}

pub fn evaluate_all(source: &dyn Source) -> Vec<Verdict> {
    CRITERIA.iter().map(|c| evaluate(c, source)).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or(f64::NAN)
}

fn comment_value(t: &Table, key: &str) -> Option<f64> {
    t.comments.iter().find_map(|c| c.split_whitespace().find_map(|w| w.strip_prefix(key)?.strip_prefix('=')?.parse().ok()))
}

/// `(x, y)` points of the rows matching `filter`, sorted by x.
fn series(t: &Table, filter: &[(&str, &str)], x: &str, y: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let (xc, yc) = (t.col(x)?, t.col(y)?);
    let mut pts: Vec<(f64, f64)> = t.select(filter)?.into_iter().map(|r| (num(&r[xc]), num(&r[yc]))).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pts)
}

fn one(t: &Table, filter: &[(&str, &str)], y: &str) -> Result<f64, CliError> {
    let yc = t.col(y)?;
    let rows = t.select(filter)?;
    match rows.as_slice() {
        [r] => Ok(num(&r[yc])),
        _ => Err(CliError::Data(format!("expected one row for {filter:?}, found {}", rows.len()))),
    }
}

fn fmt_series(pts: &[(f64, f64)]) -> String {
    pts.iter().map(|(_, y)| format!("{y:.3}")).collect::<Vec<_>>().join(" ")
}

/// Index after which the series strictly falls to its end, if the fall
/// starts before the last point.
fn strict_fall_start(ys: &[f64]) -> Option<usize> {
    let mut k = ys.len().checked_sub(1)?;
    while k > 0 && ys[k] < ys[k - 1] {
        k -= 1;
    }
    (k + 1 < ys.len()).then_some(k)
}

fn ys(pts: &[(f64, f64)]) -> Vec<f64> {
    pts.iter().map(|p| p.1).collect()
}

fn codec_correctness(o: &[Output]) -> Result<Check, CliError> {
    let agg = &o[0].agg;
    let row = agg.rows.first().ok_or_else(|| CliError::Data("empty codec summary".into()))?;
    let get = |c: &str| agg.col(c).map(|i| num(&row[i]));
    let (trials, mism, fails, secs) = (get("trials")?, get("flag_mismatches")?, get("decode_failures")?, get("elapsed_seconds")?);
    let mut failures = Vec::new();
    if trials < 1000.0 {
        failures.push(format!("only {trials} trials"));
    }
    if mism != 0.0 {
        failures.push(format!("{mism} innovation flag mismatches"));
    }
    if fails != 0.0 {
        failures.push(format!("{fails} round trips not byte-exact"));
    }
    if !(secs < 30.0) {
        failures.push(format!("took {secs:.1} s"));
    }
    Ok(Check {
        measured: format!("{trials} trials, {mism} mismatches, {fails} decode failures, {secs:.2} s"),
        bound: ">= 1000 trials, 0 mismatches, 0 failures, < 30 s".into(),
        failures,
    })
}

fn codec_throughput(o: &[Output]) -> Result<Check, CliError> {
    let raw = &o[0].raw;
    let enc = series(raw, &[], "m", "encode_mbps")?;
    let dec = series(raw, &[], "m", "decode_mbps")?;
    let mut failures = Vec::new();
    let ms: Vec<f64> = enc.iter().map(|p| p.0).collect();
    if ms != [16.0, 25.0, 32.0, 64.0] {
        failures.push(format!("generation sizes {ms:?}, want 16 25 32 64"));
    }
    let at25 = |s: &[(f64, f64)]| s.iter().find(|p| p.0 == 25.0).map_or(f64::NAN, |p| p.1);
    let (e25, d25) = (at25(&enc), at25(&dec));
    if !(e25 >= 8.0 && d25 >= 8.0) {
        failures.push(format!("m=25 encode {e25:.1} / decode {d25:.1} Mbit/s"));
    }
    for (name, s) in [("encode", &enc), ("decode", &dec)] {
        if s.windows(2).any(|w| !(w[1].1 < w[0].1)) {
            failures.push(format!("{name} not decreasing in m: {}", fmt_series(s)));
        }
    }
    Ok(Check {
        measured: format!("m=25 encode {e25:.0} decode {d25:.0} Mbit/s; encode {} ; decode {}", fmt_series(&enc), fmt_series(&dec)),
        bound: ">= 8 Mbit/s at m=25, decreasing over m = 16, 25, 32, 64".into(),
        failures,
    })
}

fn oracle_equivalence(o: &[Output]) -> Result<Check, CliError> {
    let raw = &o[0].raw;
    let (tc, pc, ec) = (raw.col("topology")?, raw.col("policy")?, raw.col("rel_error")?);
    let mut topologies: Vec<&str> = raw.rows.iter().map(|r| r[tc].as_str()).collect();
    topologies.sort();
    topologies.dedup();
    let worst = raw.rows.iter().max_by(|a, b| num(&a[ec]).total_cmp(&num(&b[ec])));
    let max = worst.map_or(f64::NAN, |r| num(&r[ec]));
    let secs = comment_value(raw, "elapsed_seconds").unwrap_or(f64::NAN);
    let mut failures: Vec<String> = raw
        .rows
        .iter()
        .filter(|r| !(num(&r[ec]) <= 0.10))
        .map(|r| format!("topology {} {}: error {}", r[tc], r[pc], r[ec]))
        .collect();
    if topologies.len() < 20 {
        failures.push(format!("only {} topologies", topologies.len()));
    }
    if !(secs < 120.0) {
        failures.push(format!("took {secs:.1} s"));
    }
    Ok(Check {
        measured: format!("max relative error {:.2}% over {} topologies x 4 policies, {secs:.1} s", max * 100.0, topologies.len()),
        bound: "<= 10% for every topology and policy, >= 20 topologies, < 120 s".into(),
        failures,
    })
}

const Y: &str = "mean_avg_rate";

fn device_count_shape(o: &[Output]) -> Result<Check, CliError> {
    let (lossless, lossy) = (&o[0].agg, &o[1].agg);
    let mut failures = Vec::new();
    let mut measured = Vec::new();

    // (a)
    let mut spread_max = 0.0f64;
    for t in [lossless, lossy] {
        let s = ys(&series(t, &[("policy", "no_coop")], "n_devices", Y)?);
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        let spread = (s.iter().cloned().fold(f64::MIN, f64::max) - s.iter().cloned().fold(f64::MAX, f64::min)) / mean;
        spread_max = spread_max.max(spread);
    }
    measured.push(format!("(a) no-coop spread {:.2}%", spread_max * 100.0));
    if !(spread_max <= 0.02) {
        failures.push(format!("(a) no-coop varies by {:.2}%", spread_max * 100.0));
    }

    // (b)
    let uni = ys(&series(lossless, &[("policy", "unicast")], "n_devices", Y)?);
    let peak = strict_fall_start(&uni);
    measured.push(format!("(b) unicast {}", uni.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" ")));
    match peak {
        Some(k) if k > 0 && uni[k] > uni[0] => {}
        _ => failures.push("(b) unicast does not rise then strictly fall".into()),
    }

    // (c)
    let pb = series(lossless, &[("policy", "pseudo_broadcast")], "n_devices", Y)?;
    let nonc = series(lossless, &[("policy", "pseudo_broadcast_nonc")], "n_devices", Y)?;
    let pb_sd = series(lossless, &[("policy", "pseudo_broadcast")], "n_devices", "std_avg_rate")?;
    let nonc_sd = series(lossless, &[("policy", "pseudo_broadcast_nonc")], "n_devices", "std_avg_rate")?;
    let runs = series(lossless, &[("policy", "pseudo_broadcast")], "n_devices", "runs")?;
    let mut max_gap = 0.0f64;
    for i in 0..pb.len().min(nonc.len()) {
        let gap = (pb[i].1 - nonc[i].1).abs();
        let tol = (3.0 * (pb_sd[i].1.powi(2) + nonc_sd[i].1.powi(2)).sqrt() / runs[i].1.max(1.0).sqrt()).max(1e-6);
        max_gap = max_gap.max(gap);
        if gap > tol {
            failures.push(format!("(c) N={} pseudo-broadcast {:.4} vs no-NC {:.4}", pb[i].0, pb[i].1, nonc[i].1));
        }
    }
    if pb.len() != nonc.len() || pb.is_empty() {
        failures.push("(c) curves missing".into());
    }
    measured.push(format!("(c) lossless max |PB - NoNC| {max_gap:.4}"));

    // (d)
    let pb = series(lossy, &[("policy", "pseudo_broadcast")], "n_devices", Y)?;
    let nonc = series(lossy, &[("policy", "pseudo_broadcast_nonc")], "n_devices", Y)?;
    for (a, b) in pb.iter().zip(&nonc) {
        if a.1 < b.1 - 1e-9 {
            failures.push(format!("(d) N={} pseudo-broadcast {:.4} below no-NC {:.4}", a.0, a.1, b.1));
        }
    }
    let nonc_y = ys(&nonc);
    let fall = strict_fall_start(&nonc_y);
    measured.push(format!("(d) lossy PB {} / NoNC {}", fmt_series(&pb), fmt_series(&nonc)));
    if fall.is_none() {
        failures.push("(d) no-NC does not decline after a threshold".into());
    }
    Ok(Check {
        measured: measured.join("; "),
        bound: "(a) <= 2%; (b) peak then strict fall; (c) within 3 standard errors; (d) PB >= NoNC, NoNC falls after a threshold".into(),
        failures,
    })
}

fn loss_shape(o: &[Output]) -> Result<Check, CliError> {
    let mut failures = Vec::new();
    let mut gaps = Vec::new();
    for out in o {
        let t = &out.agg;
        let n = t.rows.first().map(|r| r[t.col("n_devices").unwrap_or(0)].clone()).unwrap_or_default();
        for policy in ["pseudo_broadcast", "pseudo_broadcast_nonc", "unicast", "no_coop"] {
            let s = series(t, &[("policy", policy)], "p_local", Y)?;
            if s.len() != 4 {
                failures.push(format!("N={n} {policy}: {} loss points", s.len()));
            }
            if s.windows(2).any(|w| w[1].1 > w[0].1 + 1e-9) {
                failures.push(format!("N={n} {policy} rises with loss: {}", fmt_series(&s)));
            }
        }
        let pb = series(t, &[("policy", "pseudo_broadcast")], "p_local", Y)?;
        let nonc = series(t, &[("policy", "pseudo_broadcast_nonc")], "p_local", Y)?;
        let uni = series(t, &[("policy", "unicast")], "p_local", Y)?;
        for ((a, b), c) in pb.iter().zip(&nonc).zip(&uni) {
            if a.0 > 0.0 && !(a.1 >= b.1 - 1e-9 && b.1 >= c.1 - 1e-9) {
                failures.push(format!("N={n} p={}: PB {:.4}, NoNC {:.4}, unicast {:.4} out of order", a.0, a.1, b.1, c.1));
            }
        }
        let at = |s: &[(f64, f64)]| s.iter().find(|p| (p.0 - 0.3).abs() < 1e-9).map_or(f64::NAN, |p| p.1);
        gaps.push((n, at(&pb) - at(&nonc)));
    }
    let gap3 = gaps.iter().find(|g| g.0 == "3").map_or(f64::NAN, |g| g.1);
    let gap4 = gaps.iter().find(|g| g.0 == "4").map_or(f64::NAN, |g| g.1);
    if !(gap4 > gap3) {
        failures.push(format!("gap at p=0.3: N=4 {gap4:.4} not above N=3 {gap3:.4}"));
    }
    Ok(Check {
        measured: format!("PB - NoNC at p=0.3: N=3 {gap3:.3}, N=4 {gap4:.3}"),
        bound: "non-increasing in loss; PB >= NoNC >= unicast for p > 0; gap(N=4) > gap(N=3)".into(),
        failures,
    })
}

/// Raw rows whose run did not finish.
fn all_ok(raw: &Table) -> Result<Vec<String>, CliError> {
    let sc = raw.col("status")?;
    Ok(raw.rows.iter().filter(|r| r[sc] != "ok").map(|r| format!("unfinished run: {}", r.join(","))).collect())
}

fn traffic_ratio(o: &[Output]) -> Result<Check, CliError> {
    let t = &o[0].agg;
    let y = "mean_traffic_ratio";
    let mc = one(t, &[("protocol", "microcast"), ("mode", "pseudo_adhoc")], y)?;
    let bt = one(t, &[("protocol", "bittorrent_pull"), ("mode", "pseudo_adhoc")], y)?;
    let star = one(t, &[("protocol", "r2_push"), ("mode", "star")], y)?;
    let clique = one(t, &[("protocol", "r2_push"), ("mode", "clique")], y)?;
    let mut failures = all_ok(&o[0].raw)?;
    if !(bt / mc >= 2.5) {
        failures.push(format!("bittorrent_pull/microcast {:.3}: row bittorrent_pull,pseudo_adhoc ratio {bt:.3}", bt / mc));
    }
    if !(star / mc >= 2.5) {
        failures.push(format!("r2_push star/microcast {:.3}: row r2_push,star ratio {star:.3}", star / mc));
    }
    if !(clique > star) {
        failures.push(format!("r2_push clique {clique:.3} not above star {star:.3}"));
    }
    Ok(Check {
        measured: format!(
            "microcast {mc:.3}, bittorrent {bt:.3} ({:.2}x), r2 star {star:.3} ({:.2}x), r2 clique {clique:.3}",
            bt / mc,
            star / mc
        ),
        bound: "bittorrent/microcast >= 2.5, r2 star/microcast >= 2.5, clique > star".into(),
        failures,
    })
}

fn adaptivity(o: &[Output]) -> Result<Check, CliError> {
    let t = &o[0].agg;
    let adaptive = one(t, &[("downloader", "microdownload")], "mean_completion_time")?;
    let fixed = one(t, &[("downloader", "static_split")], "mean_completion_time")?;
    let mut failures = all_ok(&o[0].raw)?;
    let speedup = fixed / adaptive;
    if !(speedup >= 5.0) {
        failures.push(format!("speedup {speedup:.2}"));
    }
    Ok(Check {
        measured: format!("adaptive {adaptive:.2} s, static {fixed:.2} s, {speedup:.1}x"),
        bound: "static / adaptive >= 5".into(),
        failures,
    })
}

fn congested(o: &[Output]) -> Result<Check, CliError> {
    let t = &o[0].agg;
    let y = "mean_avg_rate_kbps";
    let mc = series(t, &[("protocol", "microcast")], "n_devices", y)?;
    let bt = series(t, &[("protocol", "bittorrent_pull")], "n_devices", y)?;
    let none = series(t, &[("protocol", "none")], "n_devices", y)?;
    let mut failures = all_ok(&o[0].raw)?;
    let first4: Vec<f64> = mc.iter().filter(|p| p.0 <= 4.0).map(|p| p.1).collect();
    if first4.len() != 4 || first4.windows(2).any(|w| w[1] < w[0]) {
        failures.push(format!("microcast not non-decreasing up to 4 devices: {}", fmt_series(&mc)));
    }
    let mut min_ratio = f64::INFINITY;
    for (a, b) in mc.iter().zip(&none).filter(|(a, _)| a.0 >= 4.0) {
        min_ratio = min_ratio.min(a.1 / b.1);
    }
    if !(min_ratio >= 3.0) {
        failures.push(format!("microcast / no-coop {min_ratio:.2} with 4 or more devices"));
    }
    let bt_y = ys(&bt);
    let fall = strict_fall_start(&bt_y).map(|k| bt[k].0);
    match fall {
        Some(n) if n <= 5.0 => {}
        _ => failures.push(format!("bittorrent_pull does not fall from 5 or fewer devices: {}", fmt_series(&bt))),
    }
    Ok(Check {
        measured: format!(
            "microcast {}; bittorrent {}; none {}; min microcast/none (N>=4) {min_ratio:.2}; bittorrent falls from N={}",
            fmt_series(&mc),
            fmt_series(&bt),
            fmt_series(&none),
            fall.map_or("-".into(), |n| n.to_string())
        ),
        bound: "microcast non-decreasing to N=4 and >= 3x none; bittorrent strictly falls from some N <= 5".into(),
        failures,
    })
}

fn liveness(o: &[Output]) -> Result<Check, CliError> {
    let raw = &o[0].raw;
    let (sc, stc, cc, nc, pc, dc) =
        (raw.col("seed")?, raw.col("status")?, raw.col("completed")?, raw.col("n_devices")?, raw.col("protocol")?, raw.col("detail")?);
    let checks: Vec<usize> =
        ["coalescing", "rank_credit", "r2_cap", "push_sync", "bt_bound"].iter().map(|c| raw.col(c)).collect::<Result<_, _>>()?;
    let mut seeds: Vec<&str> = raw.rows.iter().map(|r| r[sc].as_str()).collect();
    seeds.sort();
    seeds.dedup();
    let mut failures = Vec::new();
    let mut examined = 0usize;
    for r in &raw.rows {
        if r[stc] != "ok" || r[cc] != r[nc] {
            failures.push(format!("seed {} {}: {} with {}/{} complete {}", r[sc], r[pc], r[stc], r[cc], r[nc], r[dc]));
        }
        for &c in &checks {
            if r[c] == "fail" {
                failures.push(format!("seed {} {} {}: {}", r[sc], r[pc], raw.header[c], r[dc]));
            }
            examined += r[c].strip_prefix("ok:").and_then(|k| k.parse::<usize>().ok()).unwrap_or(0);
        }
    }
    if seeds.len() < 50 {
        failures.push(format!("only {} seeds", seeds.len()));
    }
    Ok(Check {
        measured: format!("{} seeds, {} runs, {} failures, {examined} invariant cases examined", seeds.len(), raw.rows.len(), failures.len()),
        bound: ">= 50 seeds, every run complete, no invariant violation".into(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fall_start() {
        assert_eq!(strict_fall_start(&[1.0, 3.0, 2.0, 1.0]), Some(1));
        assert_eq!(strict_fall_start(&[1.0, 2.0, 3.0]), None);
        assert_eq!(strict_fall_start(&[3.0, 2.0]), Some(0));
        assert_eq!(strict_fall_start(&[1.0, 2.0, 2.0, 1.0]), Some(2));
        assert_eq!(strict_fall_start(&[]), None);
    }

    #[test]
    fn comment_values_parse() {
        let mut t = Table::new(&["x"]);
        t.comment("m=25 elapsed_seconds=3.5 more");
        assert_eq!(comment_value(&t, "elapsed_seconds"), Some(3.5));
        assert_eq!(comment_value(&t, "missing"), None);
    }

    fn fig6b_with(bt_ratio: f64) -> Output {
        let mut agg = Table::new(&["protocol", "mode", "runs", "mean_traffic_ratio"]);
        for (p, m, v) in
            [("microcast", "pseudo_adhoc", 1.0), ("bittorrent_pull", "pseudo_adhoc", bt_ratio), ("r2_push", "star", 3.0), ("r2_push", "clique", 9.0)]
        {
            agg.push(vec![p.into(), m.into(), "3".into(), v.to_string()]);
        }
        Output { name: "fig6b".into(), raw: Table::new(&["protocol", "status"]), agg }
    }

    #[test]
    fn low_ratio_fails_and_names_the_row() {
        let c = &CRITERIA[5];
        let mut src = BTreeMap::new();
        src.insert(Recipe::Fig6b, fig6b_with(3.0));
        assert!(evaluate(c, &src).passed());
        src.insert(Recipe::Fig6b, fig6b_with(2.0));
        let v = evaluate(c, &src);
        assert_eq!(v.status, Status::Fail);
        assert!(v.detail.unwrap().contains("row bittorrent_pull"));
    }

    #[test]
    fn missing_output_is_not_run() {
        let src: BTreeMap<Recipe, Output> = BTreeMap::new();
        let all = evaluate_all(&src);
        assert_eq!(all.len(), 9);
        assert!(all.iter().all(|v| v.status == Status::NotRun));
    }
}
