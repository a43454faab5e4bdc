use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::postprocessing::PrivacyParams;
use crate::protocol::{ChshPairs, InputPair, ProtocolConfig};
use crate::statistics::{AngleMap, NoiseModel};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "DIQKD_OUT_DIR";

pub const DEFAULT_TARGET_S: f64 = 2.578;
pub const DEFAULT_TARGET_QBER: f64 = 0.078;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_rounds: usize,
    pub repetitions: usize,
    pub root_seed: u64,
    /// Bit-flip probabilities swept by `sweep`; sorted, within `[0, 1]`.
    pub noise_grid: Vec<f64>,
    /// Cascade passes for protocol runs and sweeps.
    pub passes: usize,
    pub heatmap_grid: Vec<f64>,
    pub heatmap_passes: usize,
    /// Key length per heatmap trial.
    pub heatmap_len: usize,
    pub alice_angles: Vec<f64>,
    pub bob_angles: Vec<f64>,
    pub test_pairs: Vec<InputPair>,
    pub key_pairs: Vec<InputPair>,
    pub chsh_pairs: [InputPair; 4],
    pub test_fraction: f64,
    pub noise_base: NoiseModel<f64>,
    pub s_threshold: f64,
    pub qber_abort: Option<f64>,
    pub privacy: PrivacyParams,
    pub output_dir: Option<PathBuf>,
    /// Worker threads; `None` uses all cores. Results do not depend on it.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let angles = AngleMap::<f64>::standard();
        Self {
            n_rounds: 10_000,
            repetitions: 50,
            root_seed: 1,
            noise_grid: parse_grid("0:1:0.01").expect("default grid"),
            passes: 4,
            heatmap_grid: parse_grid("0:0.5:0.02").expect("default grid"),
            heatmap_passes: 20,
            heatmap_len: 10_000,
            alice_angles: angles.angles(crate::statistics::Party::Alice).to_vec(),
            bob_angles: angles.angles(crate::statistics::Party::Bob).to_vec(),
            test_pairs: vec![(0, 0), (0, 1), (1, 0), (1, 1)],
            key_pairs: vec![(2, 2), (3, 3)],
            chsh_pairs: ChshPairs::default().0,
            test_fraction: 0.5,
            noise_base: NoiseModel::calibrated(DEFAULT_TARGET_S, DEFAULT_TARGET_QBER).expect("calibration"),
            s_threshold: 2.0,
            qber_abort: None,
            privacy: PrivacyParams::default(),
            output_dir: None,
            threads: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GridValue {
    Spec(String),
    List(Vec<f64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n_rounds: Option<usize>,
    repetitions: Option<usize>,
    root_seed: Option<u64>,
    noise_grid: Option<GridValue>,
    passes: Option<usize>,
    heatmap_grid: Option<GridValue>,
    heatmap_passes: Option<usize>,
    heatmap_len: Option<usize>,
    alice_angles: Option<Vec<f64>>,
    bob_angles: Option<Vec<f64>>,
    test_pairs: Option<Vec<[usize; 2]>>,
    key_pairs: Option<Vec<[usize; 2]>>,
    chsh_pairs: Option<[[usize; 2]; 4]>,
    test_fraction: Option<f64>,
    visibility: Option<f64>,
    bitflip_prob: Option<f64>,
    key_readout_error: Option<f64>,
    target_s: Option<f64>,
    target_qber: Option<f64>,
    s_threshold: Option<f64>,
    qber_abort: Option<f64>,
    eps_cor: Option<f64>,
    eps_sec: Option<f64>,
    security_margin: Option<usize>,
    leakage_accounting: Option<bool>,
    output_dir: Option<PathBuf>,
    threads: Option<usize>,
}

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |e: &dyn std::fmt::Display| Error::config(format!("grid {spec:?}: {e}"));
    let grid = if spec.contains(':') {
        let parts: Vec<f64> =
            spec.split(':').map(|s| s.trim().parse::<f64>().map_err(|e| bad(&e))).collect::<Result<_>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(bad(&"expected start:stop:step"));
        };
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad(&"step must be positive and stop ≥ start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        // round to 12 decimals so 0.07 is 0.07, not 0.07000000000000001
        (0..count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect()
    } else {
        spec.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<f64>().map_err(|e| bad(&e)))
            .collect::<Result<Vec<_>>>()?
    };
    validate_grid(&grid)?;
    Ok(grid)
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::config("noise grid is empty"));
    }
    if grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::config("noise grid values must lie in [0, 1]"));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::config("noise grid must be sorted"));
    }
    Ok(())
}

fn grid_value(v: GridValue) -> Result<Vec<f64>> {
    match v {
        GridValue::Spec(s) => parse_grid(&s),
        GridValue::List(l) => {
            validate_grid(&l)?;
            Ok(l)
        }
    }
}

fn pairs(v: Vec<[usize; 2]>) -> Vec<InputPair> {
    v.into_iter().map(|[x, y]| (x, y)).collect()
}

impl ExperimentConfig {
    /// Reads a flat key-value (TOML) file; absent keys keep their defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        let mut cfg = Self::default();
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = raw.$field { cfg.$field = v; } )* };
        }
        take!(
            n_rounds,
            repetitions,
            root_seed,
            passes,
            heatmap_passes,
            heatmap_len,
            alice_angles,
            bob_angles,
            test_fraction,
            s_threshold
        );
        if let Some(g) = raw.noise_grid {
            cfg.noise_grid = grid_value(g)?;
        }
        if let Some(g) = raw.heatmap_grid {
            cfg.heatmap_grid = grid_value(g)?;
        }
        if let Some(p) = raw.test_pairs {
            cfg.test_pairs = pairs(p);
        }
        if let Some(p) = raw.key_pairs {
            cfg.key_pairs = pairs(p);
        }
        if let Some(p) = raw.chsh_pairs {
            cfg.chsh_pairs = p.map(|[x, y]| (x, y));
        }
        if raw.target_s.is_some() || raw.target_qber.is_some() {
            cfg.noise_base = NoiseModel::calibrated(
                raw.target_s.unwrap_or(DEFAULT_TARGET_S),
                raw.target_qber.unwrap_or(DEFAULT_TARGET_QBER),
            )?;
        }
        let base = cfg.noise_base;
        cfg.noise_base = NoiseModel::new(
            raw.visibility.unwrap_or(base.visibility),
            raw.bitflip_prob.unwrap_or(base.bitflip_prob),
            raw.key_readout_error.unwrap_or(base.key_readout_error),
        )?;
        cfg.qber_abort = raw.qber_abort.or(cfg.qber_abort);
        if let Some(e) = raw.eps_cor {
            cfg.privacy.eps_cor = e;
        }
        if let Some(e) = raw.eps_sec {
            cfg.privacy.eps_sec = e;
        }
        if let Some(m) = raw.security_margin {
            cfg.privacy.base_margin = m;
        }
        if let Some(a) = raw.leakage_accounting {
            cfg.privacy.leakage_accounting = a;
        }
        cfg.output_dir = raw.output_dir.or(cfg.output_dir);
        cfg.threads = raw.threads.or(cfg.threads);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rounds == 0 {
            return Err(Error::config("n_rounds must be at least 1"));
        }
        if self.repetitions == 0 {
            return Err(Error::config("repetitions must be at least 1"));
        }
        if self.passes == 0 || self.heatmap_passes == 0 {
            return Err(Error::config("pass counts must be at least 1"));
        }
        if self.heatmap_len == 0 {
            return Err(Error::config("heatmap_len must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.test_fraction) {
            return Err(Error::config("test_fraction must lie in [0, 1]"));
        }
        for (name, eps) in [("eps_cor", self.privacy.eps_cor), ("eps_sec", self.privacy.eps_sec)] {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::config(format!("{name} must lie in (0, 1)")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads must be at least 1"));
        }
        validate_grid(&self.noise_grid)?;
        validate_grid(&self.heatmap_grid)?;
        self.protocol_config(self.noise_base.bitflip_prob)?.validate()
    }

    /// Protocol configuration with the base noise and the given bit-flip probability.
    pub fn protocol_config(&self, bitflip_prob: f64) -> Result<ProtocolConfig<f64>> {
        let test_pairs: BTreeSet<_> = self.test_pairs.iter().copied().collect();
        let key_pairs: BTreeSet<_> = self.key_pairs.iter().copied().collect();
        if !self.chsh_pairs.iter().all(|p| test_pairs.contains(p)) {
            return Err(Error::config("CHSH pairs must all be test pairs"));
        }
        let mut cfg = ProtocolConfig {
            angles: AngleMap::new(self.alice_angles.clone(), self.bob_angles.clone())?,
            test_pairs,
            key_pairs,
            chsh_pairs: ChshPairs(self.chsh_pairs),
            input_weights: Vec::new(),
            noise: self.noise_base.with_bitflip(bitflip_prob)?,
            s_threshold: self.s_threshold,
            qber_abort: self.qber_abort,
        };
        cfg.set_test_fraction(self.test_fraction);
        Ok(cfg)
    }

    /// Output directory from the explicit flag, the environment, or the config file.
    pub fn resolve_output_dir(&self, flag: Option<PathBuf>) -> Option<PathBuf> {
        flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)).or_else(|| self.output_dir.clone())
    }
}
