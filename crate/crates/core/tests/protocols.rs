use coopcast::protocols::{
    audit, redundancy_extra, BtPull, DownloaderKind, Mncp2, ProtocolConfig, ProtocolKind, R2Push, RecoveryConfig,
    SegmentStore,
};
use coopcast::rlnc::{CodedPacket, DecoderState};
use coopcast::sim::{
    Action, Body, Ctx, DeviceSpec, Dest, LocalMediumSpec, Message, Mode, NetInfo, PayloadMode, RateTrace, SegmentSet,
    SimConfig,
};
use coopcast::protocols::run_protocol;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const M: usize = 25;

fn config(n: usize, segments: usize) -> SimConfig {
    let mut devices = vec![DeviceSpec::without_cellular(); n];
    devices[0] = DeviceSpec::with_rate(550_000.0);
    SimConfig::new(devices, LocalMediumSpec::uniform(n, 20e6, 0.0, 0.0), segments * M * 900)
}

/// Runs one handler invocation and returns the actions it produced.
fn call(net: &NetInfo, me: usize, now: f64, tx_idle: bool, f: impl FnOnce(&mut Ctx)) -> Vec<Action> {
    let mut rng = ChaCha8Rng::seed_from_u64(me as u64 + 100);
    let mut actions = Vec::new();
    let mut ctx = Ctx::new(now, me, tx_idle, &mut rng, net, &mut actions);
    f(&mut ctx);
    actions
}

fn sends(actions: &[Action]) -> Vec<(Dest, &Body)> {
    actions
        .iter()
        .filter_map(|a| match a {
            Action::Send { dst, body } => Some((*dst, body)),
            _ => None,
        })
        .collect()
}

fn coded_count(actions: &[Action]) -> usize {
    sends(actions).iter().filter(|(_, b)| matches!(b, Body::CodedData { .. })).count()
}

fn source_packets(s: u32, k: usize, seed: u64) -> Vec<CodedPacket> {
    let src = DecoderState::symbolic_full(s, M);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| src.recode(&mut rng).unwrap()).collect()
}

fn msg(src: usize, dst: Dest, body: Body) -> Message {
    Message { src, dst, body }
}

fn store_with_rank(cfg: &SimConfig, s: u32, rank: usize) -> SegmentStore {
    let mut store = SegmentStore::new(cfg);
    for p in source_packets(s, 60, 7) {
        if store.rank(s) == rank {
            break;
        }
        store.insert_coded(&p);
    }
    assert_eq!(store.rank(s), rank);
    store
}

fn holdings_of(n_segments: usize, segs: &[u32]) -> SegmentSet {
    let mut h = SegmentSet::new(n_segments);
    for &s in segs {
        h.insert(s);
    }
    h
}

#[test]
fn advertisement_triggers_request_for_missing_dims() {
    let cfg = config(4, 2);
    let net = NetInfo::from_config(&cfg);
    let mut store = store_with_rank(&cfg, 0, 20);
    let mut p = Mncp2::new(RecoveryConfig::default(), 4, 2);
    let adv = msg(0, Dest::Broadcast, Body::Advertisement { holdings: holdings_of(2, &[0]) });
    let acts = call(&net, 2, 1.0, true, |ctx| p.on_message(ctx, &mut store, &adv, true));
    assert_eq!(sends(&acts), vec![(Dest::Unicast(0), &Body::Request { segment: 0, dims: 5 })]);

    // a second advertisement while the request is in flight asks nothing
    let acts = call(&net, 2, 1.1, true, |ctx| p.on_message(ctx, &mut store, &adv, true));
    assert!(sends(&acts).is_empty());
}

#[test]
fn full_rank_never_requests() {
    let cfg = config(4, 1);
    let net = NetInfo::from_config(&cfg);
    let mut store = store_with_rank(&cfg, 0, 0);
    for p in source_packets(0, 40, 3) {
        store.insert_coded(&p);
    }
    assert!(store.is_complete(0));
    let mut p = Mncp2::new(RecoveryConfig::default(), 4, 1);
    let adv = msg(1, Dest::Broadcast, Body::Advertisement { holdings: holdings_of(1, &[0]) });
    let note = msg(1, Dest::Unicast(3), Body::Notification { segment: 0 });
    let mut acts = call(&net, 3, 1.0, true, |ctx| p.on_message(ctx, &mut store, &adv, true));
    acts.extend(call(&net, 3, 1.0, true, |ctx| p.on_message(ctx, &mut store, &note, true)));
    assert!(sends(&acts).is_empty());
}

#[test]
fn notification_with_rank_short_reissues() {
    let cfg = config(4, 1);
    let net = NetInfo::from_config(&cfg);
    let mut store = store_with_rank(&cfg, 0, M - 2);
    let mut p = Mncp2::new(RecoveryConfig::default(), 4, 1);
    let note = msg(1, Dest::Unicast(2), Body::Notification { segment: 0 });
    let acts = call(&net, 2, 3.0, true, |ctx| p.on_message(ctx, &mut store, &note, true));
    assert_eq!(sends(&acts), vec![(Dest::Unicast(1), &Body::Request { segment: 0, dims: 2 })]);
    // someone else's notification is not ours to act on
    let other = msg(1, Dest::Unicast(3), Body::Notification { segment: 0 });
    let mut p = Mncp2::new(RecoveryConfig::default(), 4, 1);
    let acts = call(&net, 2, 3.0, true, |ctx| p.on_message(ctx, &mut store, &other, false));
    assert!(sends(&acts).is_empty());
}

fn full_store(cfg: &SimConfig, net: &NetInfo, segs: &[u32]) -> SegmentStore {
    let mut store = SegmentStore::new(cfg);
    for &s in segs {
        store.set_downloaded(s, net);
    }
    store
}

#[test]
fn coalesced_requests_are_served_with_the_largest_count() {
    let cfg = config(4, 1);
    let net = NetInfo::from_config(&cfg);
    let mut store = full_store(&cfg, &net, &[0]);
    let mut p = Mncp2::new(RecoveryConfig::default(), 4, 1);
    let r1 = msg(2, Dest::Unicast(0), Body::Request { segment: 0, dims: 5 });
    let r2 = msg(3, Dest::Unicast(0), Body::Request { segment: 0, dims: 8 });
    // busy transmitter: both queue up
    call(&net, 0, 1.0, false, |ctx| p.on_message(ctx, &mut store, &r1, true));
    call(&net, 0, 1.0, false, |ctx| p.on_message(ctx, &mut store, &r2, true));
    assert_eq!(p.queue().len(), 2);
    let acts = call(&net, 0, 1.5, true, |ctx| p.on_tx_idle(ctx, &store));
    let s = sends(&acts);
    assert_eq!(coded_count(&acts), 8);
    assert!(s[..8].iter().all(|(d, _)| *d == Dest::Unicast(2)));
    assert_eq!(s[8..], [(Dest::Unicast(2), &Body::Notification { segment: 0 }), (Dest::Unicast(3), &Body::Notification { segment: 0 })]);
}

#[test]
fn single_full_request_gets_a_full_generation() {
    let cfg = config(4, 1);
    let net = NetInfo::from_config(&cfg);
    let mut store = full_store(&cfg, &net, &[0]);
    let mut p = Mncp2::new(RecoveryConfig::default(), 4, 1);
    let r = msg(1, Dest::Unicast(0), Body::Request { segment: 0, dims: M });
    let acts = call(&net, 0, 1.0, true, |ctx| p.on_message(ctx, &mut store, &r, true));
    assert_eq!(coded_count(&acts), M);
}

#[test]
fn nearer_playback_segment_is_served_first() {
    let cfg = config(3, 10);
    let net = NetInfo::from_config(&cfg);
    let mut store = full_store(&cfg, &net, &[3, 7]);
    let mut p = Mncp2::new(RecoveryConfig::default(), 3, 10);
    for (s, who) in [(7, 1), (3, 2)] {
        let r = msg(who, Dest::Unicast(0), Body::Request { segment: s, dims: 4 });
        call(&net, 0, 1.0, false, |ctx| p.on_message(ctx, &mut store, &r, true));
    }
    let acts = call(&net, 0, 2.0, true, |ctx| p.on_tx_idle(ctx, &store));
    match sends(&acts)[0].1 {
        Body::CodedData { packet } => assert_eq!(packet.segment_id, 3),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn lost_request_is_repeated_after_the_timeout() {
    let cfg = config(4, 1);
    let net = NetInfo::from_config(&cfg);
    let mut store = store_with_rank(&cfg, 0, 10);
    let mut p = Mncp2::new(RecoveryConfig::default(), 4, 1);
    let adv = msg(0, Dest::Broadcast, Body::Advertisement { holdings: holdings_of(1, &[0]) });
    call(&net, 1, 1.0, true, |ctx| p.on_message(ctx, &mut store, &adv, true));
    let early = call(&net, 1, 2.5, true, |ctx| p.on_tick(ctx, &store));
    assert!(!sends(&early).iter().any(|(_, b)| matches!(b, Body::Request { .. })));
    let late = call(&net, 1, 3.0, true, |ctx| p.on_tick(ctx, &store));
    assert!(sends(&late).contains(&(Dest::Unicast(0), &Body::Request { segment: 0, dims: 15 })));
}

#[test]
fn nothing_to_recover_when_everything_is_held() {
    let cfg = config(2, 3);
    let net = NetInfo::from_config(&cfg);
    let store = full_store(&cfg, &net, &[0, 1, 2]);
    let mut p = Mncp2::new(RecoveryConfig { timeout: 2.0, heartbeat: 1e9 }, 2, 3);
    let acts = call(&net, 1, 10.0, true, |ctx| p.on_tick(ctx, &store));
    assert!(!sends(&acts).iter().any(|(_, b)| matches!(b, Body::Request { .. })));
}

#[test]
fn initial_push_goes_to_one_neighbor() {
    let cfg = config(4, 1);
    let net = NetInfo::from_config(&cfg);
    let store = full_store(&cfg, &net, &[0]);
    let mut p = Mncp2::new(RecoveryConfig::default(), 4, 1);
    let acts = call(&net, 0, 0.5, true, |ctx| p.on_downloaded(ctx, &store, 0));
    let s = sends(&acts);
    assert_eq!(s.len(), M);
    assert!(s.iter().all(|(d, _)| *d == s[0].0 && *d != Dest::Unicast(0)));

    let solo = SimConfig::new(vec![DeviceSpec::with_rate(1e6)], LocalMediumSpec::uniform(1, 20e6, 0.0, 0.0), 1000);
    let net = NetInfo::from_config(&solo);
    let store = full_store(&solo, &net, &[0]);
    let mut p = Mncp2::new(RecoveryConfig::default(), 1, 1);
    let mut acts = call(&net, 0, 0.5, true, |ctx| p.on_downloaded(ctx, &store, 0));
    acts.extend(call(&net, 0, 0.6, true, |ctx| p.on_tick(ctx, &store)));
    assert!(sends(&acts).is_empty());
}

#[test]
fn duplicate_have_does_not_duplicate_requests() {
    let cfg = config(3, 2);
    let net = NetInfo::from_config(&cfg);
    let mut store = SegmentStore::new(&cfg);
    let mut p = BtPull::new(RecoveryConfig::default(), 3, 2);
    let have = msg(0, Dest::Unicast(1), Body::Have { segment: 1 });
    let mut acts = call(&net, 1, 1.0, true, |ctx| p.on_message(ctx, &mut store, &have, true));
    acts.extend(call(&net, 1, 1.2, true, |ctx| p.on_message(ctx, &mut store, &have, true)));
    let reqs: Vec<_> = sends(&acts).into_iter().filter(|(_, b)| matches!(b, Body::PieceRequest { .. })).collect();
    assert_eq!(reqs.len(), 1);
    match reqs[0].1 {
        Body::PieceRequest { segment, blocks } => assert_eq!((*segment, blocks.len()), (1, M)),
        _ => unreachable!(),
    }
}

#[test]
fn lost_piece_is_re_requested() {
    let cfg = config(3, 1);
    let net = NetInfo::from_config(&cfg);
    let mut store = SegmentStore::new(&cfg);
    let mut p = BtPull::new(RecoveryConfig { timeout: 2.0, heartbeat: 1e9 }, 3, 1);
    let have = msg(0, Dest::Unicast(2), Body::Have { segment: 0 });
    call(&net, 2, 1.0, true, |ctx| p.on_message(ctx, &mut store, &have, true));
    // every block but 13 arrives
    for b in (0..M as u16).filter(|&b| b != 13) {
        let piece = msg(0, Dest::Unicast(2), Body::Piece { segment: 0, block: b });
        call(&net, 2, 1.5, true, |ctx| p.on_message(ctx, &mut store, &piece, true));
    }
    assert!(!store.is_complete(0));
    let acts = call(&net, 2, 3.6, true, |ctx| p.on_tick(ctx, &store));
    assert_eq!(sends(&acts), vec![(Dest::Unicast(0), &Body::PieceRequest { segment: 0, blocks: vec![13] })]);
}

#[test]
fn overheard_pieces_are_not_credited() {
    let cfg = config(3, 1);
    let net = NetInfo::from_config(&cfg);
    let mut store = SegmentStore::new(&cfg);
    let mut p = BtPull::new(RecoveryConfig::default(), 3, 1);
    for b in 0..M as u16 {
        let piece = msg(0, Dest::Unicast(1), Body::Piece { segment: 0, block: b });
        call(&net, 2, 1.0, true, |ctx| p.on_message(ctx, &mut store, &piece, false));
    }
    assert_eq!(store.missing_blocks(0).len(), M);
}

#[test]
fn r2_pushes_rank_plus_extra_and_honours_brakes() {
    assert_eq!(redundancy_extra(0.03, M), 1);
    let cfg = config(4, 1);
    let net = NetInfo::from_config(&cfg);
    let mut store = SegmentStore::new(&cfg);
    let mut p = R2Push::new(RecoveryConfig::default(), 0.03, M, 4, 1);
    // device 3 brakes before anything is pushed
    let brake = msg(3, Dest::Unicast(0), Body::Brake { segment: 0 });
    call(&net, 1, 0.5, true, |ctx| p.on_message(ctx, &mut store, &brake, false));
    let pk = source_packets(0, 2, 1);
    let first = msg(0, Dest::Unicast(1), Body::CodedData { packet: pk[0].clone() });
    let acts = call(&net, 1, 1.0, true, |ctx| p.on_message(ctx, &mut store, &first, true));
    let s = sends(&acts);
    // rank 1 + 1 extra to each of devices 0 and 2, none to the braked 3
    assert_eq!(s.iter().filter(|(d, _)| *d == Dest::Unicast(0)).count(), 2);
    assert_eq!(s.iter().filter(|(d, _)| *d == Dest::Unicast(2)).count(), 2);
    assert_eq!(s.iter().filter(|(d, _)| *d == Dest::Unicast(3)).count(), 0);
    let second = msg(0, Dest::Unicast(1), Body::CodedData { packet: pk[1].clone() });
    let acts = call(&net, 1, 1.1, true, |ctx| p.on_message(ctx, &mut store, &second, true));
    assert_eq!(coded_count(&acts), 2, "one more per unbraked neighbor");
}

fn one_downloader(n: usize, file_bytes: usize, loss: f64, mode: Mode, seed: u64) -> SimConfig {
    let mut devices = vec![DeviceSpec::without_cellular(); n];
    devices[0] = DeviceSpec::with_rate(550_000.0);
    let mut cfg = SimConfig::new(devices, LocalMediumSpec::uniform(n, 20e6, 0.0, loss), file_bytes);
    cfg.mode = mode;
    cfg.seed = seed;
    cfg.event_log = true;
    cfg
}

#[test]
fn lossless_mncp2_sends_the_file_about_once() {
    let cfg = one_downloader(4, 40 * M * 900, 0.0, Mode::PseudoAdhoc, 1);
    let out = run_protocol(&cfg, &ProtocolConfig::new(ProtocolKind::Microcast)).unwrap();
    let ratio = out.metrics.traffic_ratio();
    assert!((1.0..=1.3).contains(&ratio), "{ratio}");
    assert_eq!(audit::request_count(&out.log), 0);
    assert!(out.metrics.completion_times.iter().all(Option::is_some));
    // each segment: m coded packets from the downloader before it is advertised
    let first_adv = out.log.iter().position(|r| r.kind == "send_advertisement").unwrap();
    let coded_before = out.log[..first_adv].iter().filter(|r| r.kind == "send_coded_data").count();
    assert_eq!(coded_before % M, 0);
    assert!(coded_before >= M);
}

#[test]
fn lossless_bittorrent_unicasts_three_copies() {
    let cfg = one_downloader(4, 40 * M * 900, 0.0, Mode::PseudoAdhoc, 1);
    let out = run_protocol(&cfg, &ProtocolConfig::new(ProtocolKind::BittorrentPull)).unwrap();
    let ratio = out.metrics.traffic_ratio();
    assert!((2.9..=3.3).contains(&ratio), "{ratio}");
    assert_eq!(audit::piece_lower_bound(&out.log, 4, M).unwrap(), 40);
}

#[test]
fn r2_clique_costs_more_than_star() {
    let star = run_protocol(&one_downloader(4, 20 * M * 900, 0.01, Mode::Star, 2), &ProtocolConfig::new(ProtocolKind::R2Push)).unwrap();
    let clique = run_protocol(&one_downloader(4, 20 * M * 900, 0.01, Mode::Clique, 2), &ProtocolConfig::new(ProtocolKind::R2Push)).unwrap();
    assert!(clique.metrics.local_bytes > star.metrics.local_bytes);
    let extra = redundancy_extra(0.03, M);
    assert!(audit::r2_cap(&star.log, extra).unwrap() > 0);
    assert!(audit::r2_cap(&clique.log, extra).unwrap() > 0);
}

#[test]
fn invariants_hold_over_a_random_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for seed in 0..12u64 {
        let n = rng.gen_range(2..=6);
        let loss = [0.0, 0.01, 0.05, 0.1, 0.2][rng.gen_range(0..5)];
        let mode = [Mode::PseudoAdhoc, Mode::Clique, Mode::Star][rng.gen_range(0..3)];
        let mut devices: Vec<DeviceSpec> = (0..n)
            .map(|_| if rng.gen_bool(0.5) { DeviceSpec::with_rate(rng.gen_range(300e3..900e3)) } else { DeviceSpec::without_cellular() })
            .collect();
        devices[0] = DeviceSpec::with_rate(600e3);
        let mut cfg = SimConfig::new(devices, LocalMediumSpec::uniform(n, 20e6, 0.0, loss), rng.gen_range(5..30) * M * 900);
        cfg.mode = mode;
        cfg.seed = seed;
        cfg.event_log = true;
        for kind in [ProtocolKind::Microcast, ProtocolKind::BittorrentPull, ProtocolKind::R2Push] {
            let out = run_protocol(&cfg, &ProtocolConfig::new(kind)).unwrap_or_else(|e| panic!("{kind} seed {seed}: {e}"));
            assert!(!out.metrics.partial, "{kind} seed {seed} did not finish");
            match kind {
                ProtocolKind::Microcast => {
                    audit::coalescing_dominance(&out.log).unwrap();
                    audit::rank_credit(&out.log, M).unwrap();
                    if loss == 0.0 {
                        assert_eq!(audit::request_count(&out.log), 0, "seed {seed}");
                    }
                }
                ProtocolKind::BittorrentPull => {
                    audit::piece_lower_bound(&out.log, n, M).unwrap();
                }
                ProtocolKind::R2Push => {
                    audit::r2_cap(&out.log, 1).unwrap();
                }
                ProtocolKind::None => unreachable!(),
            }
        }
    }
}

#[test]
fn heavy_control_loss_still_completes() {
    for kind in [ProtocolKind::Microcast, ProtocolKind::BittorrentPull, ProtocolKind::R2Push] {
        let mut cfg = one_downloader(4, 15 * M * 900, 0.3, Mode::PseudoAdhoc, 5);
        cfg.devices[2] = DeviceSpec::with_rate(400e3);
        let out = run_protocol(&cfg, &ProtocolConfig::new(kind)).unwrap();
        assert!(out.metrics.completion_times.iter().all(Option::is_some), "{kind}");
        if kind == ProtocolKind::Microcast {
            assert!(audit::request_count(&out.log) > 0);
            audit::rank_credit(&out.log, M).unwrap();
        }
    }
}

#[test]
fn real_payloads_decode_byte_exactly() {
    for kind in [ProtocolKind::Microcast, ProtocolKind::R2Push, ProtocolKind::BittorrentPull] {
        let mut cfg = one_downloader(3, 7 * M * 900 + 1234, 0.05, Mode::PseudoAdhoc, 11);
        cfg.payload_mode = PayloadMode::Full;
        cfg.devices[1] = DeviceSpec::with_rate(300e3);
        let out = run_protocol(&cfg, &ProtocolConfig::new(kind)).unwrap();
        use coopcast::sim::Behavior;
        for s in 0..cfg.n_segments() as u32 {
            let original = out.net.source_generation(s).unwrap().to_bytes();
            assert_eq!(original.len(), cfg.segment_len(s as usize));
            for node in &out.nodes {
                assert_eq!(node.decoded_segment(s).as_deref(), Some(original.as_slice()), "{kind} segment {s}");
            }
        }
    }
}

#[test]
fn faster_links_finish_first_without_cooperation() {
    let fast = RateTrace::constant(1.5e6);
    let variable = RateTrace::from_points((0..100).map(|k| (2.0 * k as f64, if k % 2 == 0 { 200e3 } else { 1e6 })).collect()).unwrap();
    let slow = RateTrace::from_points(vec![(0.0, 10e3), (75.0, 600e3)]).unwrap();
    let devices = [fast, variable, slow].map(|t| DeviceSpec { cellular: Some(t), cellular_loss: 0.0 }).to_vec();
    let mut cfg = SimConfig::new(devices, LocalMediumSpec::uniform(3, 20e6, 0.0, 0.0), 750_000);
    cfg.idle_window = 300.0;
    let out = run_protocol(&cfg, &ProtocolConfig::new(ProtocolKind::None)).unwrap();
    let t: Vec<f64> = out.metrics.completion_times.iter().map(|c| c.unwrap()).collect();
    assert!(t[0] < t[1] && t[1] < t[2], "{t:?}");
    assert_eq!(out.metrics.local_bytes, 0);
}

#[test]
fn microdownload_reassigns_failed_segments() {
    let mut devices = vec![DeviceSpec::with_rate(500e3); 3];
    devices[1].cellular_loss = 0.6;
    let mut cfg = SimConfig::new(devices, LocalMediumSpec::uniform(3, 20e6, 0.0, 0.02), 30 * M * 900);
    cfg.event_log = true;
    cfg.seed = 4;
    let out = run_protocol(&cfg, &ProtocolConfig::new(ProtocolKind::Microcast)).unwrap();
    assert!(out.log.iter().any(|r| r.kind == "assignment_failed" && r.peer == Some(1)));
    assert!(out.metrics.completion_times.iter().all(Option::is_some));
    let sched = out.nodes[0].microdownload().unwrap().scheduler().unwrap();
    assert!(sched.is_drained());
}

#[test]
fn adaptive_split_beats_static_split() {
    let traces = [
        RateTrace::constant(1.5e6),
        RateTrace::from_points((0..100).map(|k| (2.0 * k as f64, if k % 2 == 0 { 200e3 } else { 1e6 })).collect()).unwrap(),
        RateTrace::from_points(vec![(0.0, 10e3), (75.0, 600e3)]).unwrap(),
    ];
    let devices: Vec<DeviceSpec> = traces.iter().map(|t| DeviceSpec { cellular: Some(t.clone()), cellular_loss: 0.0 }).collect();
    let mut cfg = SimConfig::new(devices, LocalMediumSpec::uniform(3, 20e6, 0.0, 0.01), 750_000);
    cfg.idle_window = 300.0;
    let t = |d| run_protocol(&cfg, &ProtocolConfig::new(ProtocolKind::Microcast).with_downloader(d)).unwrap().metrics.completion_time;
    let (adaptive, fixed) = (t(DownloaderKind::MicroDownload), t(DownloaderKind::StaticSplit));
    assert!(fixed > 5.0 * adaptive, "{adaptive} vs {fixed}");
}

#[test]
fn protocol_runs_are_reproducible() {
    let cfg = one_downloader(4, 10 * M * 900, 0.1, Mode::PseudoAdhoc, 8);
    for kind in ProtocolKind::ALL {
        let a = run_protocol(&cfg, &ProtocolConfig::new(kind));
        let b = run_protocol(&cfg, &ProtocolConfig::new(kind));
        match (a, b) {
            (Ok(a), Ok(b)) => {
                assert_eq!(a.metrics, b.metrics);
                assert_eq!(a.log, b.log);
            }
            (a, b) => assert_eq!(a.err().map(|e| e.to_string()), b.err().map(|e| e.to_string())),
        }
    }
}
