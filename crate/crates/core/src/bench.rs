//! Wall-clock codec throughput.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::rlnc::{encode, split_file, DecoderState, GenerationParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodecThroughput {
    pub m: usize,
    pub n: usize,
    /// Source payload bits encoded per second, in Mbit/s.
    pub encode_mbps: f64,
    /// Source payload bits recovered per second, in Mbit/s.
    pub decode_mbps: f64,
}

fn mbps(bytes: usize, elapsed: Duration) -> f64 {
    bytes as f64 * 8.0 / elapsed.as_secs_f64().max(1e-9) / 1e6
}

/// Encodes and decodes whole generations for about `budget` each way and
/// reports the best of `trials` equal slices.
pub fn measure_codec(params: GenerationParams, budget: Duration, trials: usize, seed: u64) -> CodecThroughput {
    let trials = trials.max(1);
    let slice = budget / trials as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![0u8; params.segment_bytes()];
    rng.fill(data.as_mut_slice());
    let generation = split_file(&data, params).remove(0);
    let m = params.m();

    let mut best_encode = 0.0f64;
    for _ in 0..trials {
        let start = Instant::now();
        let mut packets = 0usize;
        while packets < m || start.elapsed() < slice {
            let p = encode(&generation.packets, params, &mut rng).expect("complete generation");
            std::hint::black_box(&p);
            packets += 1;
        }
        best_encode = best_encode.max(mbps(packets * params.n(), start.elapsed()));
    }

    // a decode consumes packets until full rank, then extracts
    let stream: Vec<_> = (0..m + 8).map(|_| encode(&generation.packets, params, &mut rng).expect("complete")).collect();
    let mut best_decode = 0.0f64;
    for _ in 0..trials {
        let start = Instant::now();
        let mut decoded = 0usize;
        while decoded == 0 || start.elapsed() < slice {
            let mut dec = DecoderState::new(0, params);
            for p in &stream {
                if dec.is_complete() {
                    break;
                }
                dec.insert(p).expect("matching shape");
            }
            let out = dec.extract().expect("stream has full rank");
            std::hint::black_box(&out);
            decoded += 1;
        }
        best_decode = best_decode.max(mbps(decoded * params.segment_bytes(), start.elapsed()));
    }

    CodecThroughput { m, n: params.n(), encode_mbps: best_encode, decode_mbps: best_decode }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_positive_rates() {
        let r = measure_codec(GenerationParams::new(8, 64).unwrap(), Duration::from_millis(30), 3, 1);
        assert_eq!((r.m, r.n), (8, 64));
        assert!(r.encode_mbps > 0.0 && r.decode_mbps > 0.0);
    }
}
