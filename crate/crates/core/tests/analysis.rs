mod common;

use clustered_am::analysis::{
    de_limit, de_step, de_threshold, de_trajectory, eigen_spectrum, eigen_spectrum_unclamped, pc_lower_bound,
    pc_monte_carlo, random_cluster_weights, ClusterSampler, DEParams, DE_SUCCESS_LEVEL,
};
use clustered_am::recall::RecallConfig;
use common::{dataset_rows, rational_rank, subspace_dataset};

fn params(p_c: f64, p_e: f64) -> DEParams {
    DEParams::new(vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0], p_c, p_e).unwrap()
}

#[test]
fn trajectory_never_increases() {
    for p_e in [0.1, 0.3, 0.42, 0.45, 0.6, 0.9] {
        let z = de_trajectory(&params(1.0, p_e), 10_000).unwrap();
        assert_eq!(z[0], p_e);
        assert!(z.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }
}

#[test]
fn limit_is_monotone_in_noise_and_coupling() {
    let mut prev = 0.0;
    for i in 1..=50 {
        let z = de_limit(&params(1.0, i as f64 / 50.0), 100_000).unwrap();
        assert!(z >= prev - 1e-12);
        prev = z;
    }
    for p_e in [0.05, 0.2, 0.4] {
        assert!(de_limit(&params(0.9, p_e), 100_000).unwrap() >= de_limit(&params(1.0, p_e), 100_000).unwrap());
    }
}

#[test]
fn threshold_separates_success_from_failure() {
    let t = de_threshold(&[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0], 1.0, 1e-7).unwrap();
    assert!(de_limit(&params(1.0, t - 0.005), 1_000_000).unwrap() < DE_SUCCESS_LEVEL);
    assert!(de_limit(&params(1.0, t + 0.005), 1_000_000).unwrap() > 0.1);
    // at the threshold the update curve touches the diagonal
    let gap = (1..1000)
        .map(|k| {
            let z = k as f64 * t / 1000.0;
            z - de_step(z, &params(1.0, t + 1e-6))
        })
        .fold(f64::INFINITY, f64::min);
    assert!(gap.abs() < 1e-4);
}

#[test]
fn threshold_grows_with_check_degree_falling() {
    let l = [0.0, 0.0, 1.0];
    let t4 = de_threshold(&l, &[0.0, 0.0, 0.0, 1.0], 1.0, 1e-6).unwrap();
    let t6 = de_threshold(&l, &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0], 1.0, 1e-6).unwrap();
    assert!(t4 > t6);
}

#[test]
fn empirical_rate_respects_the_bound() {
    let spec = ClusterSampler {
        rows: 10,
        cols: 5,
        node_lambda: vec![0.0, 0.0, 0.0, 1.0],
        min_weight: 0.1,
        max_weight: 1.0,
    };
    let bound = pc_lower_bound(&spec.node_lambda, 3.0, 10, 5).unwrap();
    assert!((bound - 0.973f64.powi(4)).abs() < 1e-12);
    let cfg = RecallConfig {
        phi: 0.99,
        ..RecallConfig::synthetic()
    };
    let mut ok = 0.0;
    let graphs = 200;
    for g in 0..graphs {
        let w = random_cluster_weights(&spec, 0, g).unwrap();
        ok += pc_monte_carlo(&w, &cfg, 20, 1000 + g).unwrap().rate;
    }
    let rate = ok / graphs as f64;
    assert!(rate >= bound - 0.03, "rate {rate} bound {bound}");
}

#[test]
fn spectrum_rank_and_trace() {
    let d = subspace_dataset(6, 14, 4, 3);
    let rank = rational_rank(&dataset_rows(&d));
    let all = eigen_spectrum_unclamped(&d).unwrap();
    let max = all[0];
    let small = all.iter().filter(|&&v| v.abs() < 1e-10 * max).count();
    assert_eq!(small, d.n() - rank);
    let energy: f64 = d.as_flat().iter().map(|&v| (v as f64).powi(2)).sum();
    let trace: f64 = all.iter().sum();
    assert!((trace - energy).abs() <= 1e-8 * energy);
    let clamped = eigen_spectrum(&d).unwrap();
    assert_eq!(clamped.iter().filter(|&&v| v == 0.0).count(), d.n() - rank);
}
