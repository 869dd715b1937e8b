//! Flat `key = value` experiment configuration.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use qocsvm::featuremap::Variant;
use qocsvm::tomography::NoiseConfig;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("`{key}`: {msg}")]
    Invalid { key: String, msg: String },
}

/// A model under evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Rbf,
    Qrbf(Variant),
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Rbf,
        ModelKind::Qrbf(Variant::Cx),
        ModelKind::Qrbf(Variant::Ecr),
        ModelKind::Qrbf(Variant::Rxx),
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::Rbf => "rbf",
            ModelKind::Qrbf(v) => v.label(),
        }
    }

    pub fn short(&self) -> &'static str {
        match self {
            ModelKind::Rbf => "rbf",
            ModelKind::Qrbf(v) => v.short(),
        }
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rbf" => Ok(ModelKind::Rbf),
            other => other
                .parse::<Variant>()
                .map(ModelKind::Qrbf)
                .map_err(|_| format!("unknown variant `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdmMode {
    Exact,
    Estimated,
}

impl RdmMode {
    pub fn name(&self) -> &'static str {
        match self {
            RdmMode::Exact => "exact",
            RdmMode::Estimated => "estimated",
        }
    }
}

impl FromStr for RdmMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "exact" => Ok(RdmMode::Exact),
            "estimated" => Ok(RdmMode::Estimated),
            _ => Err(format!("expected exact|estimated, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synth { normal: usize, anomalies: usize },
    Csv(PathBuf),
}

/// Every tunable of a run. Defaults follow the reference protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub models: Vec<ModelKind>,
    pub gamma: f64,
    pub nu: f64,
    pub shots: usize,
    pub rdm_mode: RdmMode,
    pub noise: NoiseConfig,
    pub layers: usize,
    pub angle_scale: f64,
    pub r_grid: Vec<f64>,
    pub n_anomalies: usize,
    pub test_fraction: f64,
    pub rates_on_full: bool,
    pub seed: u64,
    /// Seed for tomography sampling only; defaults to `seed`.
    pub tomography_seed: Option<u64>,
    pub cv_r: f64,
    pub cv_folds: usize,
    pub grid_r: f64,
    pub grid_folds: usize,
    pub grid_gamma: Vec<f64>,
    pub grid_nu: Vec<f64>,
    pub sweep_shots: Vec<usize>,
    pub sweep_repeats: usize,
    pub sweep_noise: NoiseConfig,
    /// Training sets larger than this use on-demand kernel rows.
    pub dense_limit: usize,
    pub kernel_cache_mb: usize,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: DataSource::Synth {
                normal: 10_000,
                anomalies: 150,
            },
            models: ModelKind::ALL.to_vec(),
            gamma: 0.1,
            nu: 0.1,
            shots: 200,
            rdm_mode: RdmMode::Estimated,
            noise: NoiseConfig::default(),
            layers: 1,
            angle_scale: std::f64::consts::PI,
            r_grid: vec![0.2, 0.1, 0.05, 0.02, 0.01],
            n_anomalies: 100,
            test_fraction: 0.1,
            rates_on_full: false,
            seed: 42,
            tomography_seed: None,
            cv_r: 0.2,
            cv_folds: 10,
            grid_r: 0.2,
            grid_folds: 5,
            grid_gamma: vec![1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1],
            grid_nu: vec![1e-2, 1e-1, 1e0],
            sweep_shots: vec![100, 1_000, 10_000, 100_000],
            sweep_repeats: 100,
            sweep_noise: NoiseConfig {
                depolarizing_p: 0.0,
                readout_flip_p: 0.01,
                drift_rate: 1e-6,
            },
            dense_limit: 4_000,
            kernel_cache_mb: 512,
            out: PathBuf::from("results"),
        }
    }
}

/// `(key, description)` for every accepted key, in canonical order.
pub const KEYS: &[(&str, &str)] = &[
    ("data", "`synth` or a path to a raw transaction CSV"),
    ("synth_normal", "normal records generated when data = synth"),
    ("synth_anomalies", "anomalous records generated when data = synth"),
    ("variants", "comma list of rbf, cx, ecr, rxx, or `all`"),
    ("gamma", "kernel bandwidth"),
    ("nu", "OCSVM nu in (0, 1]"),
    ("shots", "tomography shots per sample"),
    ("rdm_mode", "exact | estimated"),
    ("noise_depolarizing", "depolarizing probability for sample tomography"),
    ("noise_readout", "readout flip probability for sample tomography"),
    ("noise_drift", "depolarizing increase per shot for sample tomography"),
    ("layers", "feature-map layers"),
    ("angle_scale", "radians per unit of scaled feature"),
    ("r_grid", "comma list of anomaly ratios for benchmark"),
    ("n_anomalies", "anomalies kept per subsample"),
    ("test_fraction", "held-out fraction of each subsample"),
    ("rates_on_full", "fit fraud rates on every record (true) or training records only (false)"),
    ("seed", "master seed"),
    ("tomography_seed", "master seed for tomography sampling (default: seed)"),
    ("cv_r", "anomaly ratio for crossval"),
    ("cv_folds", "folds for crossval"),
    ("grid_r", "anomaly ratio for gridsearch"),
    ("grid_folds", "folds for gridsearch"),
    ("grid_gamma", "comma list of gamma values"),
    ("grid_nu", "comma list of nu values"),
    ("sweep_shots", "comma list of shot counts for the tomography sweep"),
    ("sweep_repeats", "repeats per shot count"),
    ("sweep_depolarizing", "noisy-mode depolarizing probability"),
    ("sweep_readout", "noisy-mode readout flip probability"),
    ("sweep_drift", "noisy-mode depolarizing increase per shot"),
    ("dense_limit", "largest training set held as a dense Gram matrix"),
    ("kernel_cache_mb", "row cache budget for larger training sets"),
    ("out", "output directory"),
];

fn invalid(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        msg: msg.into(),
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.trim().parse().map_err(|_| invalid(key, format!("cannot parse `{v}`")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, ConfigError> {
    v.split(',').map(|x| parse_num(key, x)).collect()
}

fn fmt_list<T: std::fmt::Debug>(xs: &[T]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Parses config text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let k = k.trim();
            if !KEYS.iter().any(|(name, _)| *name == k) {
                return Err(ConfigError::UnknownKey {
                    line: i + 1,
                    key: k.to_string(),
                });
            }
            if !seen.insert(k.to_string()) {
                return Err(ConfigError::Duplicate {
                    line: i + 1,
                    key: k.to_string(),
                });
            }
            cfg.set(k, v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "data" => {
                self.data = if v == "synth" {
                    match self.data {
                        DataSource::Synth { .. } => self.data.clone(),
                        DataSource::Csv(_) => DataSource::Synth {
                            normal: 10_000,
                            anomalies: 150,
                        },
                    }
                } else {
                    DataSource::Csv(PathBuf::from(v))
                }
            }
            "synth_normal" | "synth_anomalies" => {
                let n: usize = parse_num(key, v)?;
                match &mut self.data {
                    DataSource::Synth { normal, anomalies } => {
                        if key == "synth_normal" {
                            *normal = n
                        } else {
                            *anomalies = n
                        }
                    }
                    DataSource::Csv(_) => return Err(invalid(key, "only valid with data = synth")),
                }
            }
            "variants" => {
                self.models = if v.trim() == "all" {
                    ModelKind::ALL.to_vec()
                } else {
                    v.split(',')
                        .map(|s| s.parse::<ModelKind>().map_err(|e| invalid(key, e)))
                        .collect::<Result<_, _>>()?
                };
                self.models.sort();
                self.models.dedup();
            }
            "gamma" => self.gamma = parse_num(key, v)?,
            "nu" => self.nu = parse_num(key, v)?,
            "shots" => self.shots = parse_num(key, v)?,
            "rdm_mode" => self.rdm_mode = v.parse().map_err(|e: String| invalid(key, e))?,
            "noise_depolarizing" => self.noise.depolarizing_p = parse_num(key, v)?,
            "noise_readout" => self.noise.readout_flip_p = parse_num(key, v)?,
            "noise_drift" => self.noise.drift_rate = parse_num(key, v)?,
            "layers" => self.layers = parse_num(key, v)?,
            "angle_scale" => self.angle_scale = parse_num(key, v)?,
            "r_grid" => self.r_grid = parse_list(key, v)?,
            "n_anomalies" => self.n_anomalies = parse_num(key, v)?,
            "test_fraction" => self.test_fraction = parse_num(key, v)?,
            "rates_on_full" => self.rates_on_full = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "tomography_seed" => self.tomography_seed = Some(parse_num(key, v)?),
            "cv_r" => self.cv_r = parse_num(key, v)?,
            "cv_folds" => self.cv_folds = parse_num(key, v)?,
            "grid_r" => self.grid_r = parse_num(key, v)?,
            "grid_folds" => self.grid_folds = parse_num(key, v)?,
            "grid_gamma" => self.grid_gamma = parse_list(key, v)?,
            "grid_nu" => self.grid_nu = parse_list(key, v)?,
            "sweep_shots" => self.sweep_shots = parse_list(key, v)?,
            "sweep_repeats" => self.sweep_repeats = parse_num(key, v)?,
            "sweep_depolarizing" => self.sweep_noise.depolarizing_p = parse_num(key, v)?,
            "sweep_readout" => self.sweep_noise.readout_flip_p = parse_num(key, v)?,
            "sweep_drift" => self.sweep_noise.drift_rate = parse_num(key, v)?,
            "dense_limit" => self.dense_limit = parse_num(key, v)?,
            "kernel_cache_mb" => self.kernel_cache_mb = parse_num(key, v)?,
            "out" => self.out = PathBuf::from(v),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: 0,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(key, format!("must be positive, got {v}")))
            }
        };
        let ratio = |key: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(invalid(key, format!("must lie in (0, 1], got {v}")))
            }
        };
        if self.models.is_empty() {
            return Err(invalid("variants", "no variants selected"));
        }
        positive("gamma", self.gamma)?;
        ratio("nu", self.nu)?;
        if self.shots < 3 {
            return Err(invalid("shots", "need at least 3 shots (one per basis)"));
        }
        self.noise
            .validate()
            .map_err(|e| invalid("noise_*", e.to_string()))?;
        self.sweep_noise
            .validate()
            .map_err(|e| invalid("sweep_*", e.to_string()))?;
        if self.layers == 0 {
            return Err(invalid("layers", "must be >= 1"));
        }
        positive("angle_scale", self.angle_scale)?;
        if self.r_grid.is_empty() {
            return Err(invalid("r_grid", "empty"));
        }
        for &r in &self.r_grid {
            ratio("r_grid", r)?;
        }
        if self.n_anomalies == 0 {
            return Err(invalid("n_anomalies", "must be >= 1"));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(invalid("test_fraction", "must lie in (0, 1)"));
        }
        ratio("cv_r", self.cv_r)?;
        ratio("grid_r", self.grid_r)?;
        if self.cv_folds < 2 || self.grid_folds < 2 {
            return Err(invalid("cv_folds/grid_folds", "need at least 2 folds"));
        }
        if self.grid_gamma.is_empty() || self.grid_nu.is_empty() {
            return Err(invalid("grid_gamma/grid_nu", "empty grid"));
        }
        for &g in &self.grid_gamma {
            positive("grid_gamma", g)?;
        }
        for &n in &self.grid_nu {
            ratio("grid_nu", n)?;
        }
        if self.sweep_shots.iter().any(|&s| s < 3)
            || self.sweep_shots.len() < 2
            || self.sweep_shots.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(invalid(
                "sweep_shots",
                "need at least two increasing shot counts, each >= 3",
            ));
        }
        if self.sweep_repeats < 2 {
            return Err(invalid("sweep_repeats", "need at least 2 repeats"));
        }
        if let DataSource::Synth { normal, anomalies } = self.data {
            if normal + anomalies == 0 {
                return Err(invalid("synth_normal", "no records to generate"));
            }
        }
        Ok(())
    }

    pub fn tomography_master(&self) -> u64 {
        self.tomography_seed.unwrap_or(self.seed)
    }

    /// Canonical text of every resolved value in [`KEYS`] order, except the
    /// output directory, which does not affect results.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        match &self.data {
            DataSource::Synth { normal, anomalies } => {
                put("data", "synth".into());
                put("synth_normal", normal.to_string());
                put("synth_anomalies", anomalies.to_string());
            }
            DataSource::Csv(p) => put("data", p.display().to_string()),
        }
        put(
            "variants",
            self.models.iter().map(|m| m.short()).collect::<Vec<_>>().join(","),
        );
        put("gamma", format!("{:?}", self.gamma));
        put("nu", format!("{:?}", self.nu));
        put("shots", self.shots.to_string());
        put("rdm_mode", self.rdm_mode.name().into());
        put("noise_depolarizing", format!("{:?}", self.noise.depolarizing_p));
        put("noise_readout", format!("{:?}", self.noise.readout_flip_p));
        put("noise_drift", format!("{:?}", self.noise.drift_rate));
        put("layers", self.layers.to_string());
        put("angle_scale", format!("{:?}", self.angle_scale));
        put("r_grid", fmt_list(&self.r_grid));
        put("n_anomalies", self.n_anomalies.to_string());
        put("test_fraction", format!("{:?}", self.test_fraction));
        put("rates_on_full", self.rates_on_full.to_string());
        put("seed", self.seed.to_string());
        put("tomography_seed", self.tomography_master().to_string());
        put("cv_r", format!("{:?}", self.cv_r));
        put("cv_folds", self.cv_folds.to_string());
        put("grid_r", format!("{:?}", self.grid_r));
        put("grid_folds", self.grid_folds.to_string());
        put("grid_gamma", fmt_list(&self.grid_gamma));
        put("grid_nu", fmt_list(&self.grid_nu));
        put("sweep_shots", fmt_list(&self.sweep_shots));
        put("sweep_repeats", self.sweep_repeats.to_string());
        put("sweep_depolarizing", format!("{:?}", self.sweep_noise.depolarizing_p));
        put("sweep_readout", format!("{:?}", self.sweep_noise.readout_flip_p));
        put("sweep_drift", format!("{:?}", self.sweep_noise.drift_rate));
        put("dense_limit", self.dense_limit.to_string());
        put("kernel_cache_mb", self.kernel_cache_mb.to_string());
        s
    }

    /// Hex SHA-256 of the canonical text.
    pub fn hash(&self) -> String {
        hex_digest(self.canonical().as_bytes())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// `--help` text listing every config key.
pub fn keys_help() -> String {
    let mut s = String::from("Config keys (flat `key = value`, `#` starts a comment):\n");
    for (k, d) in KEYS {
        let _ = writeln!(s, "  {k:<20} {d}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_text_parses_back() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::parse(&cfg.canonical()).unwrap();
        let mut expected = cfg.clone();
        expected.tomography_seed = Some(cfg.seed);
        expected.out = PathBuf::from("results");
        assert_eq!(back, expected);
        assert_eq!(back.canonical(), cfg.canonical());
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            ExperimentConfig::parse("gamma 0.1").unwrap_err(),
            ConfigError::Syntax { line: 1 }
        );
        assert!(matches!(
            ExperimentConfig::parse("# c\nbogus = 1").unwrap_err(),
            ConfigError::UnknownKey { line: 2, .. }
        ));
        assert!(matches!(
            ExperimentConfig::parse("nu = 0.1\nnu = 0.2").unwrap_err(),
            ConfigError::Duplicate { line: 2, .. }
        ));
        assert!(matches!(ExperimentConfig::parse("nu = 1.5"), Err(ConfigError::Invalid { .. })));
        assert!(matches!(ExperimentConfig::parse("variants = cz"), Err(ConfigError::Invalid { .. })));
        assert!(matches!(ExperimentConfig::parse("r_grid = 0.2,x"), Err(ConfigError::Invalid { .. })));
    }

    #[test]
    fn defaults_follow_reference_protocol() {
        let c = ExperimentConfig::default();
        assert_eq!((c.gamma, c.nu, c.shots), (0.1, 0.1, 200));
        assert_eq!(c.grid_gamma, vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0]);
        assert_eq!(c.grid_nu, vec![0.01, 0.1, 1.0]);
        assert_eq!(c.sweep_shots, vec![100, 1000, 10_000, 100_000]);
        assert_eq!(c.r_grid, vec![0.2, 0.1, 0.05, 0.02, 0.01]);
    }

    #[test]
    fn variants_and_hash() {
        let c = ExperimentConfig::parse("variants = ecr, rbf").unwrap();
        assert_eq!(c.models, vec![ModelKind::Rbf, ModelKind::Qrbf(Variant::Ecr)]);
        let d = ExperimentConfig::parse("variants = rbf,ecr").unwrap();
        assert_eq!(c.hash(), d.hash());
        assert_ne!(c.hash(), ExperimentConfig::default().hash());
        let mut moved = c.clone();
        moved.out = PathBuf::from("elsewhere");
        assert_eq!(moved.hash(), c.hash());
    }
}
