use snlw_core::hermite::{hermite, wick_pair_expectation};
use snlw_core::noise::{sample_path, NoiseConfig};
use snlw_core::stats::MeanSe;

/// 10⁶ standard normals from the crate's own noise generator (zero mode, unit step).
fn normals(count: usize) -> Vec<f64> {
    let steps = count.div_ceil(6);
    let path = sample_path(NoiseConfig { seed: 2024, radius: 0, dt: 1.0, horizon: steps as f64, replica: 0 }).unwrap();
    (0..steps).flat_map(|j| path.normals([0, 0], j)).take(count).collect()
}

#[test]
fn monte_carlo_orthogonality_up_to_order_four() {
    let g = normals(1_000_000);
    let sigma = 1.0;
    for k in 0..=4 {
        for m in 0..=4 {
            let products: Vec<f64> = g.iter().map(|&x| hermite(k, x, sigma).unwrap() * hermite(m, x, sigma).unwrap()).collect();
            let est = MeanSe::of(&products);
            let exact = wick_pair_expectation(k, m, sigma);
            if k == 0 && m == 0 {
                assert_eq!(est.mean, 1.0);
                continue;
            }
            let z = est.z_score(exact);
            assert!(z.abs() < 4.0, "k={k} m={m}: {} vs {exact} (z = {z})", est.mean);
        }
    }
}

#[test]
fn scaled_variance_orthogonality() {
    // H_k(√σ g; σ) = σ^{k/2} H_k(g; 1), so 𝔼H_k² = k! σ^k.
    let g = normals(200_000);
    let sigma: f64 = 2.5;
    for k in 1..=3 {
        let sq: Vec<f64> = g.iter().map(|&x| hermite(k, sigma.sqrt() * x, sigma).unwrap().powi(2)).collect();
        let est = MeanSe::of(&sq);
        assert!(est.z_score(wick_pair_expectation(k, k, sigma)).abs() < 4.0, "k={k}");
    }
}
