use diqkd::harness::{noise_sweep, ExperimentConfig};

#[test]
fn sweep_is_symmetric_about_half() {
    let cfg = ExperimentConfig { noise_grid: vec![0.02, 0.1, 0.25, 0.4, 0.6, 0.75, 0.9, 0.98], ..Default::default() };
    let rows = noise_sweep(&cfg).unwrap();
    for (lo, hi) in rows.iter().zip(rows.iter().rev()).take(rows.len() / 2) {
        assert!((lo.noise + hi.noise - 1.0).abs() < 1e-12);
        let sigma = (lo.std_s.powi(2) / lo.reps as f64 + hi.std_s.powi(2) / hi.reps as f64).sqrt();
        assert!(
            (lo.mean_s - hi.mean_s).abs() <= 3.0 * sigma,
            "S({}) = {}, S({}) = {}, sigma {sigma}",
            lo.noise,
            lo.mean_s,
            hi.noise,
            hi.mean_s
        );
    }
}

#[test]
fn sweep_qber_rises_towards_half() {
    let cfg =
        ExperimentConfig { noise_grid: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5], repetitions: 10, ..Default::default() };
    let rows = noise_sweep(&cfg).unwrap();
    assert!(rows.windows(2).all(|w| w[1].mean_qber_pre > w[0].mean_qber_pre));
    assert!((rows[5].mean_qber_pre - 0.5).abs() < 0.02);
}
