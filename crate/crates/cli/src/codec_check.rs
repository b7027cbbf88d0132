//! Randomized codec round trips checked against a brute-force rank oracle.
//!
//! The oracle keeps its own echelon basis using shift-and-add field
//! multiplication and exhaustive inverses, so it shares nothing with the
//! library's tables or decoder.

use std::time::Instant;

use coopcast::rlnc::{encode_with_coefficients, split_file, DecoderState, GenerationParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn slow_mul(a: u8, b: u8) -> u8 {
    let mut acc: u16 = 0;
    for bit in 0..8 {
        if b & (1 << bit) != 0 {
            acc ^= (a as u16) << bit;
        }
    }
    for bit in (8..16).rev() {
        if acc & (1 << bit) != 0 {
            acc ^= 0x11D << (bit - 8);
        }
    }
    acc as u8
}

fn slow_inv(a: u8) -> u8 {
    (1..=255u8).find(|&b| slow_mul(a, b) == 1).expect("nonzero element")
}

/// Echelon basis of coefficient vectors, one row per pivot column.
struct RankOracle {
    rows: Vec<Option<Vec<u8>>>,
}

impl RankOracle {
    fn new(m: usize) -> Self {
        Self { rows: vec![None; m] }
    }

    fn rank(&self) -> usize {
        self.rows.iter().filter(|r| r.is_some()).count()
    }

    /// Adds `v` to the span; true if the rank grew.
    fn add(&mut self, v: &[u8]) -> bool {
        let mut v = v.to_vec();
        for col in 0..v.len() {
            if v[col] == 0 {
                continue;
            }
            match &self.rows[col] {
                Some(row) => {
                    // row has a unit pivot at col
                    let f = v[col];
                    for (x, &r) in v.iter_mut().zip(row) {
                        *x ^= slow_mul(f, r);
                    }
                }
                None => {
                    let inv = slow_inv(v[col]);
                    for x in v.iter_mut() {
                        *x = slow_mul(*x, inv);
                    }
                    self.rows[col] = Some(v);
                    return true;
                }
            }
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub inserts: usize,
    pub innovative: usize,
    pub flag_mismatches: usize,
    pub decoded_ok: bool,
}

/// One round trip: a random segment is streamed as a mix of fresh random
/// combinations, repeats and combinations of earlier packets until the
/// decoder reaches full rank; then the output is compared to the input.
pub fn round_trip(params: GenerationParams, seed: u64, trial: usize) -> TrialResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let m = params.m();
    let mut data = vec![0u8; params.segment_bytes()];
    rng.fill(data.as_mut_slice());
    let generation = split_file(&data, params).remove(0);

    let mut decoder = DecoderState::new(0, params);
    let mut oracle = RankOracle::new(m);
    let mut history: Vec<Vec<u8>> = Vec::new();
    let mut res = TrialResult { trial, inserts: 0, innovative: 0, flag_mismatches: 0, decoded_ok: false };
    // bounded so a broken decoder cannot spin forever
    while !decoder.is_complete() && res.inserts < 20 * m {
        let coeffs: Vec<u8> = match rng.gen_range(0..10) {
            0 if !history.is_empty() => history[rng.gen_range(0..history.len())].clone(),
            1 | 2 if history.len() >= 2 => {
                let a = &history[rng.gen_range(0..history.len())];
                let b = &history[rng.gen_range(0..history.len())];
                let (wa, wb) = (rng.gen_range(1..=255u8), rng.gen_range(1..=255u8));
                a.iter().zip(b).map(|(&x, &y)| slow_mul(wa, x) ^ slow_mul(wb, y)).collect()
            }
            3 => {
                // sparse draw, often dependent late in the stream
                let mut c = vec![0u8; m];
                c[rng.gen_range(0..m)] = rng.gen_range(1..=255);
                c
            }
            _ => (0..m).map(|_| rng.gen()).collect(),
        };
        if coeffs.iter().all(|&c| c == 0) {
            continue;
        }
        let packet = encode_with_coefficients(&generation.packets, params, &coeffs).expect("valid shape");
        let flag = decoder.insert(&packet).expect("valid shape");
        let expected = oracle.add(&coeffs);
        res.inserts += 1;
        res.innovative += usize::from(flag);
        res.flag_mismatches += usize::from(flag != expected);
        if decoder.rank() != oracle.rank() {
            res.flag_mismatches += 1;
        }
        history.push(coeffs);
    }
    res.decoded_ok = decoder
        .extract()
        .map(|plain| plain.iter().flat_map(|p| p.payload.iter().copied()).collect::<Vec<u8>>() == data)
        .unwrap_or(false);
    res
}

/// Runs `trials` round trips and returns them with the total wall time.
pub fn run_trials(params: GenerationParams, trials: usize, seed: u64) -> (Vec<TrialResult>, f64) {
    let start = Instant::now();
    let results = (0..trials).map(|t| round_trip(params, seed, t)).collect();
    (results, start.elapsed().as_secs_f64())
}
