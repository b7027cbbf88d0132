//! Codec checks against an independent rank oracle.
//!
//! The oracle performs plain (non-reduced) Gaussian elimination on the raw
//! coefficient history using carry-less schoolbook multiplication and
//! exhaustive-search inverses, so it shares no code with the library's tables
//! or its progressive decoder.

use coopcast::rlnc::{encode, encode_with_coefficients, split_file, DecoderState, Generation, GenerationParams};
use proptest::prelude::*;
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

fn oracle_rank(rows: &[Vec<u8>]) -> usize {
    let mut mat: Vec<Vec<u8>> = rows.to_vec();
    let cols = mat.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..mat.len()).find(|&r| mat[r][col] != 0) else {
            continue;
        };
        mat.swap(rank, pivot);
        let inv = slow_inv(mat[rank][col]);
        for r in 0..mat.len() {
            if r != rank && mat[r][col] != 0 {
                let factor = slow_mul(mat[r][col], inv);
                for c in 0..cols {
                    let v = slow_mul(factor, mat[rank][c]);
                    mat[r][c] ^= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn random_generation(rng: &mut ChaCha8Rng, params: GenerationParams) -> Generation {
    let mut data = vec![0u8; params.segment_bytes()];
    rng.fill(data.as_mut_slice());
    Generation::from_bytes(0, params, &data)
}

#[test]
fn innovation_flag_matches_oracle_on_low_rank_mixtures() {
    // Small fields of choice (coefficients drawn from {0,1}) make dependent
    // packets common, so both branches of the flag get exercised.
    let params = GenerationParams::new(6, 12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut saw_redundant = 0;
    for _ in 0..200 {
        let g = random_generation(&mut rng, params);
        let mut dec = DecoderState::new(0, params);
        let mut history: Vec<Vec<u8>> = Vec::new();
        for _ in 0..10 {
            let coefficients: Vec<u8> = (0..params.m()).map(|_| rng.gen_range(0..2)).collect();
            let p = encode_with_coefficients(&g.packets, params, &coefficients).unwrap();
            let before = oracle_rank(&history);
            history.push(coefficients);
            let after = oracle_rank(&history);
            let innovative = dec.insert(&p).unwrap();
            assert_eq!(innovative, after > before);
            assert_eq!(dec.rank(), after);
            saw_redundant += usize::from(!innovative);
        }
    }
    assert!(saw_redundant > 100);
}

#[test]
fn full_rank_construction_from_independent_rows() {
    let params = GenerationParams::new(8, 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = random_generation(&mut rng, params);
    let mut dec = DecoderState::new(0, params);
    // lower-triangular with unit diagonal: independent by construction
    for i in 0..params.m() {
        let mut c = vec![0u8; params.m()];
        c[i] = 1;
        for item in c.iter_mut().take(i) {
            *item = rng.gen();
        }
        assert!(dec.insert(&encode_with_coefficients(&g.packets, params, &c).unwrap()).unwrap());
    }
    assert!(dec.is_complete());
    assert_eq!(dec.extract().unwrap(), g.packets);
}

#[test]
fn recoded_stream_converges_to_source_rank() {
    let params = GenerationParams::new(10, 20).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for k in 1..=params.m() {
        let g = random_generation(&mut rng, params);
        let mut relay = DecoderState::new(0, params);
        while relay.rank() < k {
            relay.insert(&encode(&g.packets, params, &mut rng).unwrap()).unwrap();
        }
        let mut fresh = DecoderState::new(0, params);
        for _ in 0..(k + 20) {
            let p = relay.recode(&mut rng).unwrap();
            fresh.insert(&p).unwrap();
            assert!(fresh.rank() <= k);
        }
        assert_eq!(fresh.rank(), k);
    }
}

#[test]
fn overhead_is_header_plus_coefficients() {
    let params = GenerationParams::new(25, 900).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = random_generation(&mut rng, params);
    let p = encode(&g.packets, params, &mut rng).unwrap();
    assert_eq!(p.to_bytes().len(), 900 + 25 + 8);
    assert_eq!(params.coded_wire_size(), 933);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip_reproduces_file(
        m in 1usize..=32,
        n in 1usize..=1024,
        extra in 0usize..3000,
        seed in any::<u64>(),
    ) {
        let params = GenerationParams::new(m, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = vec![0u8; (params.segment_bytes() + extra).max(1)];
        rng.fill(data.as_mut_slice());
        let mut out = Vec::new();
        for g in split_file(&data, params) {
            let mut dec = DecoderState::new(g.segment_id, params);
            let mut ranks = Vec::new();
            while !dec.is_complete() {
                dec.insert(&encode(&g.packets, params, &mut rng).unwrap()).unwrap();
                ranks.push(dec.rank());
            }
            prop_assert!(ranks.windows(2).all(|w| w[0] <= w[1]));
            let decoded = Generation { packets: dec.extract().unwrap(), ..g.clone() };
            out.extend(decoded.to_bytes());
        }
        prop_assert_eq!(out, data);
    }

    #[test]
    fn rank_is_monotone_and_bounded(m in 1usize..=12, seed in any::<u64>(), inserts in 1usize..40) {
        let params = GenerationParams::new(m, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_generation(&mut rng, params);
        let mut dec = DecoderState::new(0, params);
        let mut last = 0;
        for _ in 0..inserts {
            // sparse draws to hit dependence
            let c: Vec<u8> = (0..m).map(|_| if rng.gen_bool(0.3) { rng.gen() } else { 0 }).collect();
            if c.iter().all(|&x| x == 0) { continue; }
            dec.insert(&encode_with_coefficients(&g.packets, params, &c).unwrap()).unwrap();
            prop_assert!(dec.rank() >= last && dec.rank() <= m);
            last = dec.rank();
        }
    }

    #[test]
    fn wire_round_trip(m in 1usize..64, n in 1usize..256, seed in any::<u64>(), id in any::<u32>()) {
        let params = GenerationParams::new(m, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = random_generation(&mut rng, params);
        for p in &mut g.packets { p.segment_id = id; }
        let p = encode(&g.packets, params, &mut rng).unwrap();
        let bytes = p.to_bytes();
        prop_assert_eq!(bytes.len(), 8 + m + n);
        prop_assert_eq!(coopcast::rlnc::CodedPacket::from_bytes(&bytes).unwrap(), p);
    }
}
