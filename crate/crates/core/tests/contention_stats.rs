//! Simulated contention against the geometric law it should follow: failed
//! slots per packet are Geometric(A) with mean (1-A)/A and variance (1-A)/A^2.

use bilateral_core::analytic::{acquisition_probability, forward_efficiency, EtherParams};
use bilateral_core::csmacd::{contention_sweep, simulate_contention};

fn params(p: u64, q: u32) -> EtherParams {
    EtherParams::new(3e6, 16e-6, p, q, 0.0).unwrap()
}

fn check_geometric(q: u32, n: u64, seed: u64) {
    let a = acquisition_probability(q).unwrap();
    let mean = (1.0 - a) / a;
    let var = (1.0 - a) / (a * a);
    let r = simulate_contention(&params(512, q), n, seed).unwrap();

    let se = (var / n as f64).sqrt();
    assert!(
        (r.empirical_w - mean).abs() <= 3.0 * se,
        "Q={q}: W {} vs {mean} (se {se})",
        r.empirical_w
    );
    // Variance of a sample variance for a geometric law, via its fourth
    // central moment: mu4 = (1-A)(A^2 - 9A + 9)/A^4.
    let mu4 = (1.0 - a) * (a * a - 9.0 * a + 9.0) / a.powi(4);
    let var_se = ((mu4 - var * var) / n as f64).sqrt();
    assert!(
        (r.slots_variance - var).abs() <= 3.0 * var_se,
        "Q={q}: var {} vs {var}",
        r.slots_variance
    );

    let slots = r.packets_completed + r.contention_slots_total;
    let freq = r.acquisition_frequency();
    let freq_se = (a * (1.0 - a) / slots as f64).sqrt();
    assert!(
        (freq - a).abs() <= 3.0 * freq_se,
        "Q={q}: freq {freq} vs {a}"
    );
}

#[test]
fn two_stations_follow_geometric_law() {
    check_geometric(2, 200_000, 31);
}

#[test]
fn ten_stations_follow_geometric_law() {
    check_geometric(10, 100_000, 32);
}

#[test]
fn many_stations_follow_geometric_law() {
    check_geometric(256, 20_000, 33);
}

#[test]
fn two_stations_million_packets() {
    let p = params(512, 2);
    let analytic = forward_efficiency(&p).unwrap();
    let r = simulate_contention(&p, 1_000_000, 1).unwrap();
    assert!((r.empirical_w - 1.0).abs() < 0.01, "W {}", r.empirical_w);
    assert!((r.empirical_e - analytic.efficiency).abs() < 0.005);
    let tolerance = 3.0 * r.e_standard_error(p.packet_time_s(), p.slot_s);
    assert!((r.empirical_e - analytic.efficiency).abs() <= tolerance.max(1e-12));
}

#[test]
fn large_packets_many_stations() {
    let r = simulate_contention(&params(4096, 256), 20_000, 5).unwrap();
    assert!((r.empirical_e - 0.980).abs() < 0.005, "E {}", r.empirical_e);
}

#[test]
fn sweep_rows_track_closed_form() {
    let rows = contention_sweep(&[48, 4096], &[1, 4, 64], 3e6, 16e-6, 20_000, 99).unwrap();
    assert_eq!(rows.len(), 6);
    let order: Vec<(u64, u32)> = rows.iter().map(|r| (r.packet_bits, r.stations)).collect();
    assert_eq!(
        order,
        vec![(48, 1), (48, 4), (48, 64), (4096, 1), (4096, 4), (4096, 64)]
    );
    for r in &rows {
        assert!(
            r.abs_diff <= 4.0 * r.e_standard_error + 1e-12,
            "P={} Q={}: diff {} se {}",
            r.packet_bits,
            r.stations,
            r.abs_diff,
            r.e_standard_error
        );
    }
}

#[test]
fn sweep_is_independent_of_thread_scheduling() {
    let a = contention_sweep(&[48, 512], &[2, 8, 32], 3e6, 16e-6, 2_000, 4).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| contention_sweep(&[48, 512], &[2, 8, 32], 3e6, 16e-6, 2_000, 4).unwrap());
    assert_eq!(a, b);
}
