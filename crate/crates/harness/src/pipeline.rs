//! Shared experiment stages: dataset preparation, sample representation,
//! fitting and scoring.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use qocsvm::data::{
    engineer, load_raw, synth_generate, DataError, DatasetSplit, EngineeredSample, RateTables,
    RawTransaction, Standardizer,
};
use qocsvm::featuremap::{build_feature_map, FeatureMapError, FeatureMapSpec, Variant};
use qocsvm::kernels::{
    cross_gram, gram_matrix, load_rdms, save_rdms, KernelError, KernelRows,
    LazyKernel, Provenance, RdmFormat, RdmSet,
};
use qocsvm::metrics::{precision_recall_f1, ConfusionCounts, MetricsError, Scores};
use qocsvm::ocsvm::{fit, fit_source, sign, OcsvmError, SolverSettings};
use qocsvm::seeding::{derive_seed, task_rng};
use qocsvm::tomography::{estimate_rdms, exact_rdms, plan_shots, TomographyError};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{DataSource, ExperimentConfig, ModelKind, RdmMode};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    FeatureMap(#[from] FeatureMapError),
    #[error(transparent)]
    Tomography(#[from] TomographyError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Ocsvm(#[from] OcsvmError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Other(String),
}

static RDM_COMPUTATIONS: AtomicUsize = AtomicUsize::new(0);

/// Number of per-sample RDM computations (simulated or sampled) so far in
/// this process.
pub fn rdm_computations() -> usize {
    RDM_COMPUTATIONS.load(Ordering::SeqCst)
}

/// Loaded records with their engineered features.
pub struct Dataset {
    pub records: Vec<RawTransaction>,
    /// Engineered with rates fitted on every record; cells overwrite the
    /// rate columns with their own tables.
    pub samples: Vec<EngineeredSample>,
    pub labels: Vec<u8>,
}

impl Dataset {
    pub fn from_records(records: Vec<RawTransaction>) -> Result<Self, HarnessError> {
        let rates = RateTables::fit_all(&records)?;
        let samples = engineer(&records, &rates);
        let labels = records.iter().map(|r| r.is_fraud).collect();
        Ok(Self {
            records,
            samples,
            labels,
        })
    }

    pub fn load(cfg: &ExperimentConfig) -> Result<Self, HarnessError> {
        Self::from_records(load_records(cfg)?)
    }
}

pub fn load_records(cfg: &ExperimentConfig) -> Result<Vec<RawTransaction>, HarnessError> {
    Ok(match &cfg.data {
        DataSource::Synth { normal, anomalies } => {
            synth_generate(derive_seed(cfg.seed, "synth"), *normal, *anomalies)
        }
        DataSource::Csv(path) => load_raw(path)?,
    })
}

/// Scaled features and labels of one train/test cell. Indices refer to
/// records of the [`Dataset`].
#[derive(Debug, Clone)]
pub struct CellData {
    pub train_ids: Vec<usize>,
    pub test_ids: Vec<usize>,
    pub train_x: Vec<Vec<f64>>,
    pub test_x: Vec<Vec<f64>>,
    pub train_y: Vec<i8>,
    pub test_y: Vec<i8>,
}

/// Builds a cell from subsample positions. Fraud rates are fitted on every
/// record outside the test part unless `rates_on_full`; the standardizer is
/// fitted on the training part only.
pub fn prepare_cell(
    ds: &Dataset,
    subsample: &[usize],
    split: &DatasetSplit,
    rates_on_full: bool,
) -> Result<CellData, HarnessError> {
    let train_ids: Vec<usize> = split.train.iter().map(|&p| subsample[p]).collect();
    let test_ids: Vec<usize> = split.test.iter().map(|&p| subsample[p]).collect();
    let rates = if rates_on_full {
        RateTables::fit_all(&ds.records)?
    } else {
        let mut held_out = vec![false; ds.records.len()];
        for &i in &test_ids {
            held_out[i] = true;
        }
        let fit_on: Vec<usize> = (0..ds.records.len()).filter(|&i| !held_out[i]).collect();
        RateTables::fit(&ds.records, &fit_on)?
    };
    let raw_rows = |ids: &[usize]| -> Vec<EngineeredSample> {
        ids.iter()
            .map(|&i| {
                let mut s = ds.samples[i].clone();
                rates.apply(&ds.records[i], &mut s);
                s
            })
            .collect()
    };
    let train_raw = raw_rows(&train_ids);
    let test_raw = raw_rows(&test_ids);
    let features: Vec<_> = train_raw.iter().map(|s| s.features).collect();
    let scaler = Standardizer::fit(&features)?;
    Ok(CellData {
        train_x: train_raw.iter().map(|s| scaler.apply(&s.features)).collect(),
        test_x: test_raw.iter().map(|s| scaler.apply(&s.features)).collect(),
        train_y: train_raw.iter().map(|s| s.label()).collect(),
        test_y: test_raw.iter().map(|s| s.label()).collect(),
        train_ids,
        test_ids,
    })
}

/// Sample representation a kernel is evaluated on.
pub enum Representation {
    Features(Vec<Vec<f64>>),
    Rdms(RdmSet),
}

impl Representation {
    pub fn rows(&self) -> KernelRows<'_> {
        match self {
            Representation::Features(x) => KernelRows::Features(x),
            Representation::Rdms(set) => set.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Tomography settings for one RDM computation.
#[derive(Debug, Clone, Copy)]
pub struct RdmSettings {
    pub mode: RdmMode,
    pub shots: usize,
    pub noise: qocsvm::tomography::NoiseConfig,
    pub layers: usize,
    pub angle_scale: f64,
    pub master_seed: u64,
}

impl RdmSettings {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            mode: cfg.rdm_mode,
            shots: cfg.shots,
            noise: cfg.noise,
            layers: cfg.layers,
            angle_scale: cfg.angle_scale,
            master_seed: cfg.tomography_master(),
        }
    }
}

/// One-qubit RDMs for every row of `x`. In estimated mode sample `k` uses
/// the child seed `<prefix>/sample=<ids[k]>` of the tomography master seed.
pub fn compute_rdms(
    variant: Variant,
    x: &[Vec<f64>],
    ids: &[usize],
    settings: &RdmSettings,
    prefix: &str,
) -> Result<RdmSet, HarnessError> {
    let width = x.first().map_or(1, |r| r.len());
    let mut spec = FeatureMapSpec::for_features(variant, width).with_layers(settings.layers);
    spec.angle_scale = settings.angle_scale;
    let plan = plan_shots(settings.shots)?;
    let noise = (!settings.noise.is_noiseless()).then_some(&settings.noise);
    let samples = x
        .par_iter()
        .zip(ids)
        .map(|(row, &id)| {
            let circuit = build_feature_map(&spec, row)?;
            RDM_COMPUTATIONS.fetch_add(1, Ordering::SeqCst);
            Ok(match settings.mode {
                RdmMode::Exact => exact_rdms(&circuit)?,
                RdmMode::Estimated => {
                    let mut rng = task_rng(settings.master_seed, &format!("{prefix}/sample={id}"));
                    estimate_rdms(&circuit, &plan, noise, &mut rng)?
                }
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let provenance = match settings.mode {
        RdmMode::Exact => Provenance::Exact,
        RdmMode::Estimated => Provenance::Estimated {
            shots: settings.shots,
            seed: derive_seed(settings.master_seed, prefix),
        },
    };
    Ok(RdmSet::new(samples, provenance)?)
}

/// Like [`compute_rdms`], but reads `cache` when it exists and writes it
/// otherwise.
pub fn cached_rdms(
    cache: &Path,
    variant: Variant,
    x: &[Vec<f64>],
    ids: &[usize],
    settings: &RdmSettings,
    prefix: &str,
) -> Result<RdmSet, HarnessError> {
    if cache.exists() {
        let set = load_rdms(cache)?;
        if set.len() != x.len() {
            return Err(HarnessError::Other(format!(
                "RDM cache {} holds {} samples, expected {}",
                cache.display(),
                set.len(),
                x.len()
            )));
        }
        return Ok(set);
    }
    let set = compute_rdms(variant, x, ids, settings, prefix)?;
    if let Some(dir) = cache.parent() {
        std::fs::create_dir_all(dir)?;
    }
    save_rdms(cache, &set, RdmFormat::Binary)?;
    Ok(set)
}

/// Representations of the training and test rows of a cell.
pub fn represent(
    model: ModelKind,
    cell: &CellData,
    settings: &RdmSettings,
    prefix: &str,
) -> Result<(Representation, Representation), HarnessError> {
    match model {
        ModelKind::Rbf => Ok((
            Representation::Features(cell.train_x.clone()),
            Representation::Features(cell.test_x.clone()),
        )),
        ModelKind::Qrbf(v) => Ok((
            Representation::Rdms(compute_rdms(v, &cell.train_x, &cell.train_ids, settings, prefix)?),
            Representation::Rdms(compute_rdms(v, &cell.test_x, &cell.test_ids, settings, prefix)?),
        )),
    }
}

/// Kernel hyperparameters and solver limits for one fit.
#[derive(Debug, Clone, Copy)]
pub struct FitParams {
    pub gamma: f64,
    pub nu: f64,
    pub dense_limit: usize,
    pub cache_bytes: usize,
}

impl FitParams {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            gamma: cfg.gamma,
            nu: cfg.nu,
            dense_limit: cfg.dense_limit,
            cache_bytes: cfg.kernel_cache_mb << 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub train: Scores,
    pub test: Scores,
}

/// Fits on the training representation and scores both parts.
pub fn evaluate(
    train: &Representation,
    test: &Representation,
    train_y: &[i8],
    test_y: &[i8],
    params: &FitParams,
) -> Result<Evaluation, HarnessError> {
    let settings = SolverSettings::default();
    let (model, train_dv) = if train.len() > params.dense_limit {
        let k = LazyKernel::new(train.rows(), params.gamma, params.cache_bytes)?;
        let m = fit_source(&k, params.nu, &settings)?;
        let dv = m.training_decision_values(&k);
        (m, dv)
    } else {
        let k = gram_matrix(train.rows(), params.gamma)?;
        let m = fit(&k, params.nu, &settings)?;
        let dv = m.training_decision_values(&k);
        (m, dv)
    };
    let train_pred: Vec<i8> = train_dv
        .iter()
        .map(|&v| if v.abs() <= model.tie_tolerance { 1 } else { sign(v) })
        .collect();
    let k_test = cross_gram(train.rows(), test.rows(), params.gamma)?;
    let test_pred = model.predict_many(&k_test)?;
    Ok(Evaluation {
        train: precision_recall_f1(&ConfusionCounts::from_labels(train_y, &train_pred)?),
        test: precision_recall_f1(&ConfusionCounts::from_labels(test_y, &test_pred)?),
    })
}
