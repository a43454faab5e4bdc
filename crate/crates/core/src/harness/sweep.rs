use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::pipeline::{mean_std, par_map, simulate_run, RunMode};
use crate::error::Result;

/// Aggregate over the repetitions at one noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub noise: f64,
    pub mean_s: f64,
    pub std_s: f64,
    #[serde(rename = "qber_pre")]
    pub mean_qber_pre: f64,
    #[serde(rename = "qber_post")]
    pub mean_qber_post: f64,
    pub reps: usize,
}

/// Runs every grid point `repetitions` times with the grid value as the
/// bit-flip probability, reconciling even when the Bell test fails.
pub fn noise_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let reps = cfg.repetitions;
    let protos = cfg.noise_grid.iter().map(|&p| cfg.protocol_config(p)).collect::<Result<Vec<_>>>()?;
    let runs = par_map(cfg.threads, cfg.noise_grid.len() * reps, |k| {
        let (g, rep) = (k / reps, k % reps);
        simulate_run(cfg, &protos[g], g, rep, RunMode::Experiment).map(|(s, _)| s)
    })?;
    Ok(runs
        .chunks(reps)
        .zip(&cfg.noise_grid)
        .map(|(chunk, &noise)| {
            let s: Vec<f64> = chunk.iter().map(|r| r.s_value).collect();
            let (mean_s, std_s) = mean_std(&s);
            let n = chunk.len() as f64;
            SweepRow {
                noise,
                mean_s,
                std_s,
                mean_qber_pre: chunk.iter().map(|r| r.qber_pre).sum::<f64>() / n,
                mean_qber_post: chunk.iter().map(|r| r.qber_post).sum::<f64>() / n,
                reps: chunk.len(),
            }
        })
        .collect())
}

/// Noise values where the mean `S` crosses `level`, by linear interpolation
/// between adjacent grid points.
pub fn crossings(rows: &[SweepRow], level: f64) -> Vec<f64> {
    rows.windows(2)
        .filter_map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let (da, db) = (a.mean_s - level, b.mean_s - level);
            if da == 0.0 {
                Some(a.noise)
            } else if da * db < 0.0 {
                Some(a.noise + (b.noise - a.noise) * da / (da - db))
            } else {
                None
            }
        })
        .collect()
}
