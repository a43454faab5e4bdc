use rand::Rng;

use super::config::ExperimentConfig;
use super::pipeline::par_map;
use crate::bits::BitString;
use crate::cascade::{block_schedule, plan_passes, CascadeSession};
use crate::error::Result;
use crate::protocol::{estimate_qber, run_rounds, sift_keys};
use crate::rng::{substream, Purpose};

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapRow {
    pub noise: f64,
    /// Pre-Cascade QBER measured at this noise level; errors are injected at this rate.
    pub qber: f64,
    /// Mean `r/e` after passes `0..=passes`; `None` when no trial had any error.
    pub ratios: Option<Vec<f64>>,
    /// Trials that contributed (initial error count ≥ 1).
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub passes: usize,
    pub rows: Vec<HeatmapRow>,
}

/// Mean key-round QBER over `repetitions` protocol runs at bit-flip `noise`.
fn measured_qber(cfg: &ExperimentConfig, grid: usize, noise: f64) -> Result<f64> {
    let proto = cfg.protocol_config(noise)?;
    let mut total = 0.0;
    for rep in 0..cfg.repetitions {
        let mut rng = substream(cfg.root_seed, Purpose::Rounds, &[grid as u64, rep as u64]);
        let records = run_rounds(cfg.n_rounds, &proto, &mut rng)?;
        total += estimate_qber::<f64>(&sift_keys(&records))?;
    }
    Ok(total / cfg.repetitions as f64)
}

/// Remaining-error ratio after each pass for one injected-error trial, or
/// `None` when the channel produced no errors.
fn trial(cfg: &ExperimentConfig, grid: usize, rep: usize, qber: f64) -> Result<Option<Vec<f64>>> {
    let labels = [grid as u64, rep as u64];
    let n = cfg.heatmap_len;
    let alice = BitString::random(n, &mut substream(cfg.root_seed, Purpose::BitSource, &labels));
    let mut channel = substream(cfg.root_seed, Purpose::ErrorChannel, &labels);
    let mut bob = alice.clone();
    for i in 0..n {
        if channel.gen::<f64>() < qber {
            bob.flip(i);
        }
    }
    let initial = alice.hamming_distance(&bob);
    if initial == 0 {
        return Ok(None);
    }
    let schedule = block_schedule(qber.min(0.5), n, cfg.heatmap_passes)?;
    let plans = plan_passes(&schedule, n, &mut substream(cfg.root_seed, Purpose::Shuffle, &labels))?;
    let mut session = CascadeSession::new(&alice, bob, &plans)?;
    let mut ratios = vec![1.0];
    while session.run_pass()? {
        ratios.push(session.bob().hamming_distance(&alice) as f64 / initial as f64);
    }
    Ok(Some(ratios))
}

/// Remaining-error ratio after each Cascade pass, per noise level.
pub fn cascade_heatmap(cfg: &ExperimentConfig) -> Result<Heatmap> {
    cfg.validate()?;
    let qbers = par_map(cfg.threads, cfg.heatmap_grid.len(), |g| measured_qber(cfg, g, cfg.heatmap_grid[g]))?;
    let reps = cfg.repetitions;
    let trials = par_map(cfg.threads, qbers.len() * reps, |k| trial(cfg, k / reps, k % reps, qbers[k / reps]))?;
    let rows = trials
        .chunks(reps)
        .enumerate()
        .map(|(g, chunk)| {
            let valid: Vec<&Vec<f64>> = chunk.iter().flatten().collect();
            let ratios = (!valid.is_empty()).then(|| {
                (0..=cfg.heatmap_passes).map(|p| valid.iter().map(|r| r[p]).sum::<f64>() / valid.len() as f64).collect()
            });
            HeatmapRow { noise: cfg.heatmap_grid[g], qber: qbers[g], ratios, trials: valid.len() }
        })
        .collect();
    Ok(Heatmap { passes: cfg.heatmap_passes, rows })
}
