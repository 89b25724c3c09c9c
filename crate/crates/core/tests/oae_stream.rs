use bilateral_core::analytic::bilateral_efficiency;
use bilateral_core::oae::{
    measure_bilateral_efficiency_oae, run_frame, run_stream, run_stream_detailed, OaeConfig,
    OaeFrame, RetransmitPolicy, SliceAckLevel, FRAME_BITS, SLICES_PER_FRAME,
};
use bilateral_core::simkernel::{Duplex, LinkModel, SimRng};
use proptest::prelude::*;

const C: f64 = 3e6;
const TAU: f64 = 8e-6;

fn full(loss: f64, corrupt: f64) -> LinkModel {
    LinkModel::new(C, TAU, loss, corrupt, Duplex::Full).unwrap()
}

/// Chance that a frame commits within `retries + 1` whole-frame attempts
/// when each slice independently fails with probability `q`.
fn frame_commit_oracle(q: f64, retries: u32) -> f64 {
    let per_attempt = (1.0 - q).powi(SLICES_PER_FRAME as i32);
    1.0 - (1.0 - per_attempt).powi(retries as i32 + 1)
}

#[test]
fn isolated_frame_pays_one_propagation_delay() {
    let rec = run_frame(
        &full(0.0, 0.0),
        &OaeFrame::new(0),
        0.0,
        &OaeConfig::default(),
        &mut SimRng::new(1),
    )
    .unwrap();
    assert!(rec.committed);
    assert!((rec.commit_overhead().unwrap() - TAU).abs() < 1e-15);
    assert_eq!(rec.highest_sack, Some(SliceAckLevel::Sack11Understanding));
}

#[test]
fn long_stream_amortizes_commit_overhead() {
    let n = 10_000u64;
    let report = run_stream(n, &full(0.0, 0.0), &OaeConfig::default(), 1).unwrap();
    assert_eq!(report.frames_committed, n);
    assert!(report.delta_t_commit_s <= TAU / 100.0);
    let expected = ((n * FRAME_BITS) as f64 / C + TAU) + TAU;
    assert_eq!(report.stream_duration_s, expected);
    assert!((report.stream_duration_s - (n as f64 * 512.0 / C + 2.0 * TAU)).abs() < 1e-12);
}

#[test]
fn overhead_shrinks_with_stream_length() {
    let short = run_stream(10, &full(0.0, 0.0), &OaeConfig::default(), 1).unwrap();
    let long = run_stream(10_000, &full(0.0, 0.0), &OaeConfig::default(), 1).unwrap();
    assert!(long.delta_t_commit_s < short.delta_t_commit_s / 100.0);
    assert!((short.delta_t_commit_s - TAU / 10.0).abs() < 1e-15);
}

#[test]
fn one_frame_stream_matches_isolated_frame() {
    let cfg = OaeConfig::default();
    let stream = run_stream_detailed(1, &full(0.0, 0.0), &cfg, 3).unwrap();
    let single = run_frame(
        &full(0.0, 0.0),
        &OaeFrame::new(0),
        0.0,
        &cfg,
        &mut SimRng::new(3),
    )
    .unwrap();
    assert_eq!(stream.frames[0], single);
    assert!((stream.report.delta_t_commit_s - TAU).abs() < 1e-15);
}

#[test]
fn corrupt_fifth_slice_stops_ladder_at_semantics() {
    let rec = run_frame(
        &full(0.0, 0.0),
        &OaeFrame::new(0).with_corrupt_slice(5),
        0.0,
        &OaeConfig::default(),
        &mut SimRng::new(1),
    )
    .unwrap();
    assert!(!rec.committed);
    assert_eq!(rec.highest_sack, Some(SliceAckLevel::Sack10Semantics));
}

#[test]
fn commit_rate_matches_retry_oracle() {
    let n = 20_000u64;
    let corrupt = 0.05;
    let no_retry = OaeConfig {
        policy: RetransmitPolicy {
            retries: 0,
            ..RetransmitPolicy::default()
        },
        ..OaeConfig::default()
    };
    let report = run_stream(n, &full(0.0, corrupt), &no_retry, 12).unwrap();
    let p = frame_commit_oracle(corrupt, 0);
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    let rate = report.frames_committed as f64 / n as f64;
    assert!((rate - p).abs() <= 3.0 * sigma, "rate {rate} vs {p}");

    let heavy = 0.2;
    let retried = OaeConfig {
        policy: RetransmitPolicy {
            retries: 2,
            ..RetransmitPolicy::default()
        },
        ..OaeConfig::default()
    };
    let report = run_stream(n, &full(heavy, 0.0), &retried, 13).unwrap();
    let p = frame_commit_oracle(heavy, 2);
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    let rate = report.frames_committed as f64 / n as f64;
    assert!((rate - p).abs() <= 3.0 * sigma, "rate {rate} vs {p}");
    assert_eq!(report.frames_attempted, n);
}

#[test]
fn one_percent_corruption_commits_nearly_everything() {
    let n = 10_000u64;
    let report = run_stream(n, &full(0.0, 0.01), &OaeConfig::default(), 4).unwrap();
    let p = frame_commit_oracle(0.01, 5);
    assert!((p - 0.999_999_787_396_755_5).abs() < 1e-12);
    let expected_failures = n as f64 * (1.0 - p);
    assert!(
        ((n - report.frames_committed) as f64)
            <= expected_failures + 3.0 * expected_failures.sqrt() + 1.0
    );
    assert!(report.retransmissions > 0);
}

#[test]
fn reported_efficiency_recomputes_from_inputs() {
    for (loss, seed) in [(0.0, 1u64), (0.05, 2), (0.3, 3)] {
        let report = run_stream(500, &full(loss, 0.0), &OaeConfig::default(), seed).unwrap();
        let e = bilateral_efficiency(&report.inputs()).unwrap();
        assert!((e - report.e_b_oae).abs() < 1e-12);
        assert_eq!(
            measure_bilateral_efficiency_oae(&report).unwrap(),
            report.e_b_oae
        );
    }
}

#[test]
fn dead_channel_commits_nothing() {
    let report = run_stream(5, &full(1.0, 0.0), &OaeConfig::default(), 1).unwrap();
    assert_eq!(report.frames_committed, 0);
    assert_eq!(report.e_b_oae, 0.0);
}

#[test]
fn half_duplex_is_rejected() {
    let half = LinkModel::ideal(C, TAU, Duplex::Half).unwrap();
    assert!(run_stream(3, &half, &OaeConfig::default(), 1).is_err());
}

#[test]
fn stall_window_below_round_trip_violates_causal_closure() {
    let cfg = OaeConfig {
        policy: RetransmitPolicy {
            retries: 5,
            stall_timeout_s: Some(TAU),
        },
        ..OaeConfig::default()
    };
    assert!(matches!(
        run_stream(3, &full(0.0, 0.0), &cfg, 1),
        Err(bilateral_core::Error::CausalClosure { .. })
    ));
}

#[test]
fn streams_are_reproducible() {
    let a = run_stream_detailed(300, &full(0.1, 0.02), &OaeConfig::default(), 77).unwrap();
    let b = run_stream_detailed(300, &full(0.1, 0.02), &OaeConfig::default(), 77).unwrap();
    assert_eq!(a.report, b.report);
    assert_eq!(a.frames, b.frames);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sack_ladder_is_monotone_and_commit_needs_top_level(
        seed in any::<u64>(),
        loss in 0.0f64..0.3,
        corrupt in 0.0f64..0.1,
        n in 1u64..60,
    ) {
        let run = run_stream_detailed(n, &full(loss, corrupt), &OaeConfig::default(), seed).unwrap();
        prop_assert_eq!(run.frames.len() as u64, n);
        for f in &run.frames {
            for attempt in 0..=f.attempts {
                let levels: Vec<_> = f.sack_events.iter().filter(|s| s.attempt == attempt).map(|s| s.level).collect();
                prop_assert!(levels.windows(2).all(|w| w[0] < w[1]));
            }
            prop_assert!(f.sack_events.iter().all(|s| s.observed_at >= s.emitted_at));
            prop_assert!(f.sack_events.windows(2).all(|w| w[0].observed_at <= w[1].observed_at));
            if f.committed {
                prop_assert_eq!(f.highest_sack, Some(SliceAckLevel::Sack11Understanding));
                prop_assert!(f.t_commit.unwrap() >= f.t_forward_done.unwrap());
            }
        }
        let committed = run.frames.iter().filter(|f| f.committed).count() as u64;
        prop_assert_eq!(committed, run.report.frames_committed);
        prop_assert!(run.report.e_b_oae >= 0.0 && run.report.e_b_oae <= 1.0);
    }

    #[test]
    fn zero_propagation_needs_no_commit_time(n in 1u64..200) {
        let link = LinkModel::ideal(C, 0.0, Duplex::Full).unwrap();
        let report = run_stream(n, &link, &OaeConfig::default(), 1).unwrap();
        prop_assert_eq!(report.delta_t_commit_s, 0.0);
        prop_assert_eq!(report.e_b_oae, 1.0);
    }
}
