use bilateral_core::simkernel::{
    derive_seed, DeliveryVerdict, Duplex, EventKind, LinkModel, Scheduler, SimRng,
};
use bilateral_core::Error;
use proptest::prelude::*;

fn three_sigma(n: u64, p: f64) -> f64 {
    3.0 * (n as f64 * p * (1.0 - p)).sqrt()
}

#[test]
fn half_loss_link_drops_half() {
    let link = LinkModel::new(3e6, 8e-6, 0.5, 0.0, Duplex::Half).unwrap();
    let mut rng = SimRng::new(2024);
    let n = 100_000u64;
    let lost = (0..n)
        .filter(|_| matches!(link.transmit(512, 0.0, &mut rng), DeliveryVerdict::Lost))
        .count() as f64;
    assert!(
        (lost - 50_000.0).abs() <= three_sigma(n, 0.5),
        "lost {lost}"
    );
}

#[test]
fn corruption_rate_is_conditional_on_survival() {
    let link = LinkModel::new(3e6, 8e-6, 0.2, 0.1, Duplex::Full).unwrap();
    let mut rng = SimRng::new(9);
    let n = 100_000u64;
    let (mut lost, mut corrupt) = (0u64, 0u64);
    for _ in 0..n {
        match link.transmit(64, 1.0, &mut rng) {
            DeliveryVerdict::Lost => lost += 1,
            DeliveryVerdict::Corrupted { .. } => corrupt += 1,
            DeliveryVerdict::Delivered { .. } => {}
        }
    }
    assert!((lost as f64 - 0.2 * n as f64).abs() <= three_sigma(n, 0.2));
    let p_corrupt = 0.8 * 0.1;
    assert!((corrupt as f64 - p_corrupt * n as f64).abs() <= three_sigma(n, p_corrupt));
}

#[test]
fn delivery_time_for_experimental_packet() {
    let link = LinkModel::ideal(3e6, 8e-6, Duplex::Half).unwrap();
    let at = link
        .transmit(4096, 0.0, &mut SimRng::new(1))
        .arrival_time()
        .unwrap();
    assert!((at * 1e6 - 1_373.333_333_333).abs() < 1e-6);
}

#[test]
fn negative_propagation_is_rejected() {
    assert!(matches!(
        LinkModel::ideal(3e6, -1e-6, Duplex::Half),
        Err(Error::Domain(_))
    ));
}

#[test]
fn causal_closure_is_enforced_at_the_boundary() {
    let link = LinkModel::ideal(3e6, 8e-6, Duplex::Full).unwrap();
    assert!(link.check_causal_closure(16e-6).is_ok());
    assert!(matches!(
        link.check_causal_closure(15e-6),
        Err(Error::CausalClosure { .. })
    ));
}

#[test]
fn empty_queue_run_ends_at_stop_time() {
    let mut s: Scheduler<()> = Scheduler::new();
    let summary = s.run_until::<Error, _>(10.0, |_, _| Ok(())).unwrap();
    assert_eq!(summary.events_processed, 0);
    assert_eq!(summary.final_time, 10.0);
}

#[test]
fn scheduling_in_the_past_is_a_logic_error() {
    let mut s = Scheduler::new();
    s.schedule(5.0, EventKind::TimerExpiry, ()).unwrap();
    s.pop().unwrap();
    assert!(matches!(
        s.schedule(4.0, EventKind::TimerExpiry, ()),
        Err(Error::Logic(_))
    ));
}

#[test]
fn handler_error_carries_event_context() {
    let mut s = Scheduler::new();
    s.schedule(1.0, EventKind::SlotBoundary, 1u32).unwrap();
    s.schedule(2.0, EventKind::FrameArrival, 2u32).unwrap();
    let err = s
        .run_until(f64::INFINITY, |_, ev| {
            if ev.payload == 2 {
                Err(Error::Logic("boom".into()))
            } else {
                Ok(())
            }
        })
        .unwrap_err();
    assert_eq!(err.at_time, 2.0);
    assert_eq!(err.kind, EventKind::FrameArrival);
    assert_eq!(err.events_processed, 1);
}

#[test]
fn derived_seeds_are_distinct_and_stable() {
    let a: Vec<u64> = (0..1000).map(|i| derive_seed(7, &[i])).collect();
    let b: Vec<u64> = (0..1000).map(|i| derive_seed(7, &[i])).collect();
    assert_eq!(a, b);
    let mut sorted = a.clone();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(sorted.len(), a.len());
}

proptest! {
    #[test]
    fn events_pop_in_time_then_insertion_order(
        times in prop::collection::vec(0u32..50, 1..200),
    ) {
        let mut s = Scheduler::new();
        for (i, &t) in times.iter().enumerate() {
            s.schedule(t as f64, EventKind::TimerExpiry, i).unwrap();
        }
        let mut popped = Vec::new();
        let mut last = f64::NEG_INFINITY;
        while let Some(ev) = s.pop().unwrap() {
            prop_assert!(ev.fire_time >= last);
            prop_assert_eq!(s.now(), ev.fire_time);
            last = ev.fire_time;
            popped.push((ev.fire_time as u32, ev.payload));
        }
        let mut want: Vec<(u32, usize)> = times.iter().copied().zip(0..).collect();
        want.sort();
        prop_assert_eq!(popped, want);
    }

    #[test]
    fn handlers_may_schedule_later_events(
        seeds in prop::collection::vec(0u32..10, 1..20),
        stop in 0u32..100,
    ) {
        let mut s = Scheduler::new();
        for &t in &seeds {
            s.schedule(t as f64, EventKind::SlotBoundary, 0u32).unwrap();
        }
        let mut fired = Vec::new();
        let summary = s.run_until::<Error, _>(stop as f64, |sched, ev| {
            fired.push(ev.fire_time);
            if ev.payload < 3 {
                sched.schedule_in(1.5, EventKind::SlotBoundary, ev.payload + 1)?;
            }
            Ok(())
        }).unwrap();
        prop_assert!(fired.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(fired.iter().all(|&t| t <= stop as f64));
        prop_assert_eq!(summary.final_time, stop as f64);
        prop_assert!(s.peek_time().is_none_or(|t| t > stop as f64));
    }

    #[test]
    fn same_seed_same_stream(seed in any::<u64>()) {
        let mut a = SimRng::new(seed);
        let mut b = SimRng::new(seed);
        for _ in 0..64 {
            prop_assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
    }

    #[test]
    fn transmit_uses_fixed_draws(seed in any::<u64>(), loss in 0.0f64..1.0) {
        let lossy = LinkModel::new(1e6, 1e-6, loss, 0.3, Duplex::Half).unwrap();
        let clean = LinkModel::ideal(1e6, 1e-6, Duplex::Half).unwrap();
        let mut a = SimRng::new(seed);
        let mut b = SimRng::new(seed);
        lossy.transmit(100, 0.0, &mut a);
        clean.transmit(100, 0.0, &mut b);
        prop_assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
    }
}
