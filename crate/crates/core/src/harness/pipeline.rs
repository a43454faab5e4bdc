//! End-to-end protocol runs: rounds, CHSH, sifting, Cascade, verification and
//! privacy amplification.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::bits::BitString;
use crate::cascade::{block_schedule, efficiency_of, plan_passes, CascadeSession, CascadeTranscript};
use crate::error::{Error, Result};
use crate::postprocessing::{key_rate, universal_hash, verify_keys, HashSpec, VerifyOutcome};
use crate::protocol::{
    abort_check, classify_rounds, estimate_chsh, estimate_qber, qber_abort_check, run_rounds, sift_keys, AbortDecision,
    ProtocolConfig, RoundRecord, SiftedKeys,
};
use crate::rng::{stream_id, substream, Purpose};

/// Whether a failed Bell test stops the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// Abort after the Bell test when `S` is too low.
    Protocol,
    /// Always reconcile, recording the abort decision only.
    Experiment,
}

/// Per-run summary; its JSON form is the run-summary schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub rep: usize,
    pub s_value: f64,
    pub qber_pre: f64,
    pub qber_post: f64,
    pub sifted_len: usize,
    pub leaked_bits: usize,
    pub efficiency: Option<f64>,
    pub final_len: usize,
    pub aborted: bool,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub records: Vec<RoundRecord>,
    pub keys: SiftedKeys,
    pub corrected_bob: Option<BitString>,
    pub transcript: Option<CascadeTranscript>,
    pub final_alice: BitString,
    pub final_bob: BitString,
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Maps `0..n` in parallel, keeping index order. The result does not depend
/// on the thread count.
pub fn par_map<T, F>(threads: Option<usize>, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let run = || (0..n).into_par_iter().map(&f).collect::<Result<Vec<T>>>();
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::config(e.to_string()))?
            .install(run),
        None => run(),
    }
}

/// One full run at grid point `grid` (its bit-flip probability already in
/// `proto`) and repetition `rep`.
pub fn simulate_run(
    cfg: &ExperimentConfig,
    proto: &ProtocolConfig<f64>,
    grid: usize,
    rep: usize,
    mode: RunMode,
) -> Result<(RunSummary, RunArtifacts)> {
    let labels = [grid as u64, rep as u64];
    let seed = cfg.root_seed;
    let records = run_rounds(cfg.n_rounds, proto, &mut substream(seed, Purpose::Rounds, &labels))?;
    classify_rounds(&records, proto)?;
    let chsh = estimate_chsh::<f64>(&records, &proto.chsh_pairs)?;
    let keys = sift_keys(&records);
    let qber_pre = estimate_qber::<f64>(&keys)?;
    let n = keys.len();

    let mut aborted = abort_check(&chsh, proto.s_threshold) == AbortDecision::Abort;
    if let Some(limit) = proto.qber_abort {
        aborted |= qber_abort_check(qber_pre, limit) == AbortDecision::Abort;
    }

    let mut summary = RunSummary {
        seed,
        rep,
        s_value: chsh.s_value,
        qber_pre,
        qber_post: qber_pre,
        sifted_len: n,
        leaked_bits: 0,
        efficiency: None,
        final_len: 0,
        aborted,
    };
    let mut artifacts = RunArtifacts {
        records,
        keys: keys.clone(),
        corrected_bob: None,
        transcript: None,
        final_alice: BitString::new(),
        final_bob: BitString::new(),
    };
    if aborted && mode == RunMode::Protocol {
        return Ok((summary, artifacts));
    }

    // the schedule sees the disclosed QBER, clipped into its domain
    let schedule = block_schedule(qber_pre.min(0.5), n, cfg.passes)?;
    let plans = plan_passes(&schedule, n, &mut substream(seed, Purpose::Shuffle, &labels))?;
    let mut session = CascadeSession::new(&keys.alice_bits, keys.bob_bits.clone(), &plans)?;
    session.run_to_end()?;
    let (corrected, transcript) = session.finish();

    summary.qber_post = keys.alice_bits.hamming_distance(&corrected) as f64 / n as f64;
    summary.leaked_bits = transcript.leaked_bits();
    if qber_pre > 0.0 && qber_pre < 0.5 {
        summary.efficiency = Some(efficiency_of(transcript.leaked_bits(), n, qber_pre));
    }

    let verify_seed = stream_id(Purpose::Verify, &[seed, grid as u64, rep as u64]);
    let verified =
        verify_keys(&keys.alice_bits, &corrected, cfg.privacy.tag_len(), verify_seed)? == VerifyOutcome::Match;

    // statistical overshoot past Tsirelson's bound is clipped for the rate
    let s_rate = chsh.s_value.min(2.0 * std::f64::consts::SQRT_2);
    let final_len = if aborted || !verified || qber_pre >= 0.5 {
        0
    } else {
        key_rate(s_rate, qber_pre, transcript.leaked_bits(), n, &cfg.privacy)?.final_len
    };
    summary.final_len = final_len;

    let spec = HashSpec::random(n, final_len, &mut substream(seed, Purpose::Hash, &labels))?;
    artifacts.final_alice = universal_hash(&keys.alice_bits, &spec)?;
    artifacts.final_bob = universal_hash(&corrected, &spec)?;
    artifacts.corrected_bob = Some(corrected);
    artifacts.transcript = Some(transcript);
    Ok((summary, artifacts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub seed: u64,
    pub n_rounds: usize,
    pub reps: usize,
    pub mean_s: f64,
    pub std_s: f64,
    pub mean_qber_pre: f64,
    pub mean_qber_post: f64,
    pub runs: Vec<RunSummary>,
}

impl BaselineReport {
    pub fn any_aborted(&self) -> bool {
        self.runs.iter().any(|r| r.aborted)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// `repetitions` protocol runs of the configured base noise.
pub fn baseline_run(cfg: &ExperimentConfig) -> Result<BaselineReport> {
    cfg.validate()?;
    let proto = cfg.protocol_config(cfg.noise_base.bitflip_prob)?;
    let runs = par_map(cfg.threads, cfg.repetitions, |rep| {
        simulate_run(cfg, &proto, 0, rep, RunMode::Protocol).map(|(s, _)| s)
    })?;
    let s: Vec<f64> = runs.iter().map(|r| r.s_value).collect();
    let (mean_s, std_s) = mean_std(&s);
    let mean = |f: fn(&RunSummary) -> f64| runs.iter().map(f).sum::<f64>() / runs.len() as f64;
    Ok(BaselineReport {
        seed: cfg.root_seed,
        n_rounds: cfg.n_rounds,
        reps: cfg.repetitions,
        mean_s,
        std_s,
        mean_qber_pre: mean(|r| r.qber_pre),
        mean_qber_post: mean(|r| r.qber_post),
        runs,
    })
}
