//! Subcommands. Each writes deterministic CSVs plus a JSON manifest into the
//! output directory; wall-clock timings go to a separate file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qocsvm::data::{kfold, split, subsample_to_ratio, write_engineered_csv, write_raw, DatasetSplit};
use qocsvm::metrics::{
    all_anomalous_f1, fold_statistics, outperformance_probability, Scores, DIFFERENCE_INTERVAL,
};
use qocsvm::seeding::{derive_seed, task_rng};
use qocsvm::tomography::{log_log_slope, precision_sweep, NoiseConfig, SweepRow, SweepTarget};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{hex_digest, DataSource, ExperimentConfig, ModelKind};
use crate::pipeline::{
    cached_rdms, evaluate, prepare_cell, represent, CellData, Dataset, Evaluation, FitParams,
    HarnessError, RdmSettings, Representation,
};

/// Status of one (variant, r, fold) cell in a manifest.
#[derive(Debug, Clone, Serialize)]
pub struct CellRecord {
    pub variant: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fold: Option<usize>,
    pub seeds: BTreeMap<String, u64>,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub config: String,
    pub cells: Vec<CellRecord>,
    pub outputs: Vec<OutputFile>,
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl Manifest {
    fn new(command: &str, cfg: &ExperimentConfig) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: cfg.hash(),
            config: cfg.canonical(),
            cells: Vec::new(),
            outputs: Vec::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| !c.ok).count()
    }
}

/// Writes result files and records their digests.
struct Writer {
    dir: PathBuf,
    manifest: Manifest,
    timings: BTreeMap<String, f64>,
    started: Instant,
}

impl Writer {
    fn new(command: &str, cfg: &ExperimentConfig) -> Result<Self, HarnessError> {
        fs::create_dir_all(&cfg.out)?;
        Ok(Self {
            dir: cfg.out.clone(),
            manifest: Manifest::new(command, cfg),
            timings: BTreeMap::new(),
            started: Instant::now(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, HarnessError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        self.manifest.outputs.push(OutputFile {
            file: name.to_string(),
            sha256: hex_digest(bytes),
        });
        Ok(path)
    }

    fn finish(mut self) -> Result<Manifest, HarnessError> {
        let cmd = self.manifest.command.clone();
        self.timings
            .insert("total_seconds".into(), self.started.elapsed().as_secs_f64());
        fs::write(
            self.dir.join(format!("{cmd}_manifest.json")),
            serde_json::to_string_pretty(&self.manifest)?,
        )?;
        fs::write(
            self.dir.join(format!("{cmd}_timing.json")),
            serde_json::to_string_pretty(&self.timings)?,
        )?;
        Ok(self.manifest)
    }
}

/// Outcome of one cell, kept in task order for aggregation.
struct CellResult {
    record: CellRecord,
    eval: Option<Evaluation>,
    seconds: f64,
}

fn record(
    model: ModelKind,
    r: Option<f64>,
    fold: Option<usize>,
    seeds: BTreeMap<String, u64>,
    res: &Result<Evaluation, HarnessError>,
) -> CellRecord {
    CellRecord {
        variant: model.label().to_string(),
        r,
        fold,
        seeds,
        ok: res.is_ok(),
        error: res.as_ref().err().map(|e| e.to_string()),
    }
}

fn scores_line(out: &mut String, prefix: &str, split: &str, s: &Scores) {
    let _ = writeln!(out, "{prefix},{split},{:?},{:?},{:?}", s.precision, s.recall, s.f1);
}

/// Scores of the classifier that flags every sample anomalous at ratio `r`.
pub fn baseline_scores(r: f64) -> Scores {
    Scores {
        precision: r,
        recall: 1.0,
        f1: all_anomalous_f1(r),
    }
}

fn labels_of(ds: &Dataset, ids: &[usize]) -> Vec<u8> {
    ids.iter().map(|&i| ds.labels[i]).collect()
}

fn run_cell(
    model: ModelKind,
    cell: &CellData,
    rdm: &RdmSettings,
    fit: &FitParams,
    prefix: &str,
) -> Result<Evaluation, HarnessError> {
    let (train, test) = represent(model, cell, rdm, prefix)?;
    evaluate(&train, &test, &cell.train_y, &cell.test_y, fit)
}

type SubsampleSplit = (Vec<usize>, DatasetSplit);
type RepPair = Result<(Representation, Representation), HarnessError>;

/// Subsample at ratio `r` and its stratified split, with the seeds used.
fn subsample_split(
    ds: &Dataset,
    cfg: &ExperimentConfig,
    path: &str,
    r: f64,
) -> (Result<SubsampleSplit, HarnessError>, BTreeMap<String, u64>) {
    let sub_path = format!("{path}/subsample");
    let split_path = format!("{path}/split");
    let seeds = BTreeMap::from([
        ("subsample".to_string(), derive_seed(cfg.seed, &sub_path)),
        ("split".to_string(), derive_seed(cfg.seed, &split_path)),
    ]);
    let res = (|| {
        let sub = subsample_to_ratio(&ds.labels, r, cfg.n_anomalies, &mut task_rng(cfg.seed, &sub_path))?;
        let sp = split(&labels_of(ds, &sub), cfg.test_fraction, &mut task_rng(cfg.seed, &split_path))?;
        Ok((sub, sp))
    })();
    (res, seeds)
}

/// One train/test evaluation per (variant, r).
pub fn benchmark(cfg: &ExperimentConfig) -> Result<Manifest, HarnessError> {
    let mut w = Writer::new("benchmark", cfg)?;
    let ds = Dataset::load(cfg)?;
    let rdm = RdmSettings::from_config(cfg);
    let fit = FitParams::from_config(cfg);

    let cells: Vec<_> = cfg
        .r_grid
        .par_iter()
        .map(|&r| {
            let path = format!("benchmark/r={r:?}");
            let (res, seeds) = subsample_split(&ds, cfg, &path, r);
            let cell = res.and_then(|(sub, sp)| prepare_cell(&ds, &sub, &sp, cfg.rates_on_full));
            (r, path, cell, seeds)
        })
        .collect();
    let tasks: Vec<(usize, ModelKind)> = (0..cells.len())
        .flat_map(|c| cfg.models.iter().map(move |&m| (c, m)))
        .collect();
    let results: Vec<CellResult> = tasks
        .par_iter()
        .map(|&(c, model)| {
            let (r, path, cell, seeds) = &cells[c];
            let start = Instant::now();
            let prefix = format!("{path}/{}", model.short());
            let mut seeds = seeds.clone();
            if matches!(model, ModelKind::Qrbf(_)) {
                seeds.insert("tomography".into(), derive_seed(rdm.master_seed, &prefix));
            }
            let res = match cell {
                Ok(cell) => run_cell(model, cell, &rdm, &fit, &prefix),
                Err(e) => Err(HarnessError::Other(format!("cell preparation failed: {e}"))),
            };
            CellResult {
                record: record(model, Some(*r), None, seeds, &res),
                eval: res.ok(),
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect();

    let mut csv = String::from("variant,r,split,precision,recall,f1\n");
    let mut summary = String::from("r,baseline");
    for m in &cfg.models {
        let _ = write!(summary, ",{}", m.label());
    }
    summary.push('\n');
    for (c, (r, ..)) in cells.iter().enumerate() {
        let base = baseline_scores(*r);
        for sp in ["train", "test"] {
            scores_line(&mut csv, &format!("baseline,{r:?}"), sp, &base);
        }
        let _ = write!(summary, "{r:?},{:?}", base.f1);
        for (t, res) in tasks.iter().zip(&results).filter(|(t, _)| t.0 == c) {
            match &res.eval {
                Some(e) => {
                    let prefix = format!("{},{r:?}", t.1.label());
                    scores_line(&mut csv, &prefix, "train", &e.train);
                    scores_line(&mut csv, &prefix, "test", &e.test);
                    let _ = write!(summary, ",{:?}", e.test.f1);
                }
                None => summary.push_str(",error"),
            }
        }
        summary.push('\n');
    }
    w.write("benchmark.csv", csv.as_bytes())?;
    w.write("benchmark_summary.csv", summary.as_bytes())?;
    for res in results {
        w.timings.insert(
            format!("{}/r={:?}", res.record.variant, res.record.r.unwrap_or(0.0)),
            res.seconds,
        );
        w.manifest.cells.push(res.record);
    }
    w.finish()
}

fn fold_split(folds: &[Vec<usize>], i: usize) -> DatasetSplit {
    let mut train: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .flat_map(|(_, f)| f.iter().copied())
        .collect();
    train.sort_unstable();
    DatasetSplit {
        train,
        test: folds[i].clone(),
        anomaly_ratio: f64::NAN,
    }
}

/// Prepared cells of a k-fold run over one subsample, with the seeds used.
pub fn prepare_folds(
    ds: &Dataset,
    cfg: &ExperimentConfig,
    path: &str,
    r: f64,
    k: usize,
) -> Result<(Vec<CellData>, BTreeMap<String, u64>), HarnessError> {
    let sub_path = format!("{path}/subsample");
    let fold_path = format!("{path}/folds");
    let seeds = BTreeMap::from([
        ("subsample".to_string(), derive_seed(cfg.seed, &sub_path)),
        ("folds".to_string(), derive_seed(cfg.seed, &fold_path)),
    ]);
    let sub = subsample_to_ratio(&ds.labels, r, cfg.n_anomalies, &mut task_rng(cfg.seed, &sub_path))?;
    let folds = kfold(&labels_of(ds, &sub), k, &mut task_rng(cfg.seed, &fold_path))?;
    let cells = (0..k)
        .into_par_iter()
        .map(|i| prepare_cell(ds, &sub, &fold_split(&folds, i), cfg.rates_on_full))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((cells, seeds))
}

/// Table row of a cross-validation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossvalRow {
    pub variant: String,
    pub mu: f64,
    pub sigma: f64,
    /// `Pr[variant > rbf]`; `None` for rbf itself or when rbf is absent.
    pub pr_over_rbf: Option<f64>,
}

/// k-fold statistics of the test F1 per variant at ratio `cv_r`.
pub fn crossval(cfg: &ExperimentConfig) -> Result<(Manifest, Vec<CrossvalRow>), HarnessError> {
    let mut w = Writer::new("crossval", cfg)?;
    let ds = Dataset::load(cfg)?;
    let rdm = RdmSettings::from_config(cfg);
    let fit = FitParams::from_config(cfg);
    let (cells, seeds) = prepare_folds(&ds, cfg, "crossval", cfg.cv_r, cfg.cv_folds)?;

    let tasks: Vec<(ModelKind, usize)> = cfg
        .models
        .iter()
        .flat_map(|&m| (0..cells.len()).map(move |f| (m, f)))
        .collect();
    let results: Vec<CellResult> = tasks
        .par_iter()
        .map(|&(model, f)| {
            let start = Instant::now();
            let prefix = format!("crossval/{}/fold={f}", model.short());
            let mut seeds = seeds.clone();
            if matches!(model, ModelKind::Qrbf(_)) {
                seeds.insert("tomography".into(), derive_seed(rdm.master_seed, &prefix));
            }
            let res = run_cell(model, &cells[f], &rdm, &fit, &prefix);
            CellResult {
                record: record(model, Some(cfg.cv_r), Some(f), seeds, &res),
                eval: res.ok(),
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect();

    let mut folds_csv = String::from("variant,fold,split,precision,recall,f1\n");
    let mut dists = BTreeMap::new();
    for &model in &cfg.models {
        let mut f1s = Vec::new();
        for (t, res) in tasks.iter().zip(&results).filter(|(t, _)| t.0 == model) {
            if let Some(e) = &res.eval {
                let prefix = format!("{},{}", model.label(), t.1);
                scores_line(&mut folds_csv, &prefix, "train", &e.train);
                scores_line(&mut folds_csv, &prefix, "test", &e.test);
                f1s.push(e.test.f1);
            }
        }
        if f1s.len() == cells.len() {
            dists.insert(model, fold_statistics(&f1s)?);
        }
    }
    let mut table = String::from("variant,mu_f1,sigma_f1,pr_over_rbf\n");
    let mut rows = Vec::new();
    for &model in &cfg.models {
        let Some(d) = dists.get(&model) else {
            let _ = writeln!(table, "{},error,error,error", model.label());
            continue;
        };
        let pr = match (model, dists.get(&ModelKind::Rbf)) {
            (ModelKind::Qrbf(_), Some(rbf)) => Some(outperformance_probability(d, rbf, DIFFERENCE_INTERVAL)?),
            _ => None,
        };
        let pr_text = match (model, pr) {
            (ModelKind::Rbf, _) => "none".to_string(),
            (_, Some(p)) => format!("{p:?}"),
            (_, None) => "n/a".to_string(),
        };
        let _ = writeln!(table, "{},{:?},{:?},{pr_text}", model.label(), d.mu, d.sigma);
        rows.push(CrossvalRow {
            variant: model.label().to_string(),
            mu: d.mu,
            sigma: d.sigma,
            pr_over_rbf: pr,
        });
    }
    w.write("crossval_folds.csv", folds_csv.as_bytes())?;
    w.write("crossval.csv", table.as_bytes())?;
    for res in results {
        w.timings.insert(
            format!("{}/fold={}", res.record.variant, res.record.fold.unwrap_or(0)),
            res.seconds,
        );
        w.manifest.cells.push(res.record);
    }
    Ok((w.finish()?, rows))
}

/// Best grid cell of one variant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridBest {
    pub variant: String,
    pub gamma: f64,
    pub nu: f64,
    pub mean_f1: f64,
}

/// Argmax of `(gamma, nu, score)` with ties going to the smaller gamma, then
/// the smaller nu.
pub fn grid_argmax(cells: &[(f64, f64, f64)]) -> Option<(f64, f64, f64)> {
    let mut sorted = cells.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    sorted
        .into_iter()
        .fold(None, |best: Option<(f64, f64, f64)>, c| match best {
            Some(b) if b.2 >= c.2 => Some(b),
            _ => Some(c),
        })
}

/// Directory of cached RDMs for the settings that determine them.
pub fn rdm_cache_dir(cfg: &ExperimentConfig) -> PathBuf {
    let data = match &cfg.data {
        DataSource::Synth { normal, anomalies } => format!("synth:{normal}:{anomalies}"),
        DataSource::Csv(p) => format!("csv:{}", p.display()),
    };
    let key = format!(
        "{data}|{}|{}|{}|{}|{:?}|{}|{:?}|{:?}|{}|{}|{}|{:?}",
        cfg.seed,
        cfg.tomography_master(),
        cfg.rdm_mode.name(),
        cfg.shots,
        cfg.noise,
        cfg.layers,
        cfg.angle_scale,
        cfg.grid_r,
        cfg.grid_folds,
        cfg.n_anomalies,
        cfg.rates_on_full,
        cfg.test_fraction,
    );
    cfg.out.join("rdm_cache").join(&hex_digest(key.as_bytes())[..16])
}

/// Mean k-fold test F1 over the (gamma, nu) grid at ratio `grid_r`. RDMs are
/// computed once per (variant, fold) and read from the cache afterwards.
pub fn gridsearch(cfg: &ExperimentConfig) -> Result<(Manifest, Vec<GridBest>), HarnessError> {
    let mut w = Writer::new("gridsearch", cfg)?;
    let ds = Dataset::load(cfg)?;
    let rdm = RdmSettings::from_config(cfg);
    let (cells, seeds) = prepare_folds(&ds, cfg, "gridsearch", cfg.grid_r, cfg.grid_folds)?;
    let cache_dir = rdm_cache_dir(cfg);

    let reps: Vec<(ModelKind, usize, RepPair)> = cfg
        .models
        .iter()
        .flat_map(|&m| (0..cells.len()).map(move |f| (m, f)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(model, f)| {
            let cell = &cells[f];
            let res = match model {
                ModelKind::Rbf => Ok((
                    Representation::Features(cell.train_x.clone()),
                    Representation::Features(cell.test_x.clone()),
                )),
                ModelKind::Qrbf(v) => {
                    let prefix = format!("gridsearch/{}/fold={f}", v.short());
                    let path = |part: &str| cache_dir.join(format!("{}_fold{f}_{part}.qrdm", v.short()));
                    cached_rdms(&path("train"), v, &cell.train_x, &cell.train_ids, &rdm, &prefix).and_then(|tr| {
                        let te = cached_rdms(&path("test"), v, &cell.test_x, &cell.test_ids, &rdm, &prefix)?;
                        Ok((Representation::Rdms(tr), Representation::Rdms(te)))
                    })
                }
            };
            (model, f, res)
        })
        .collect();

    let grid: Vec<(f64, f64)> = cfg
        .grid_gamma
        .iter()
        .flat_map(|&g| cfg.grid_nu.iter().map(move |&n| (g, n)))
        .collect();
    let mut csv = String::from("variant,gamma,nu,mean_f1\n");
    let mut best_csv = String::from("variant,gamma,nu,mean_f1\n");
    let mut bests = Vec::new();
    for &model in &cfg.models {
        let mine: Vec<_> = reps.iter().filter(|r| r.0 == model).collect();
        let mut base_seeds = seeds.clone();
        if let ModelKind::Qrbf(v) = model {
            base_seeds.insert(
                "tomography".into(),
                derive_seed(rdm.master_seed, &format!("gridsearch/{}", v.short())),
            );
        }
        let failed = mine.iter().find_map(|r| r.2.as_ref().err());
        if let Some(e) = failed {
            w.manifest.cells.push(CellRecord {
                variant: model.label().into(),
                r: Some(cfg.grid_r),
                fold: None,
                seeds: base_seeds,
                ok: false,
                error: Some(e.to_string()),
            });
            continue;
        }
        let start = Instant::now();
        let scored: Vec<Result<(f64, f64, f64), HarnessError>> = grid
            .par_iter()
            .map(|&(gamma, nu)| {
                let params = FitParams {
                    gamma,
                    nu,
                    ..FitParams::from_config(cfg)
                };
                let mut total = 0.0;
                for (_, f, rep) in &mine {
                    let (tr, te) = rep.as_ref().expect("checked above");
                    let e = evaluate(tr, te, &cells[*f].train_y, &cells[*f].test_y, &params)?;
                    total += e.test.f1;
                }
                Ok((gamma, nu, total / mine.len() as f64))
            })
            .collect();
        let mut ok_cells = Vec::new();
        let mut first_err = None;
        for (res, &(gamma, nu)) in scored.into_iter().zip(&grid) {
            match res {
                Ok(c) => {
                    let _ = writeln!(csv, "{},{gamma:?},{nu:?},{:?}", model.label(), c.2);
                    ok_cells.push(c);
                }
                Err(e) => {
                    let _ = writeln!(csv, "{},{gamma:?},{nu:?},error", model.label());
                    first_err.get_or_insert(format!("gamma={gamma:?} nu={nu:?}: {e}"));
                }
            }
        }
        w.timings.insert(model.label().to_string(), start.elapsed().as_secs_f64());
        if let Some((gamma, nu, mean_f1)) = grid_argmax(&ok_cells) {
            let _ = writeln!(best_csv, "{},{gamma:?},{nu:?},{mean_f1:?}", model.label());
            bests.push(GridBest {
                variant: model.label().into(),
                gamma,
                nu,
                mean_f1,
            });
        }
        w.manifest.cells.push(CellRecord {
            variant: model.label().into(),
            r: Some(cfg.grid_r),
            fold: None,
            seeds: base_seeds,
            ok: first_err.is_none(),
            error: first_err,
        });
    }
    w.write("gridsearch.csv", csv.as_bytes())?;
    w.write("gridsearch_best.csv", best_csv.as_bytes())?;
    w.manifest.extra.insert(
        "rdm_cache".into(),
        serde_json::Value::String(cache_dir.display().to_string()),
    );
    Ok((w.finish()?, bests))
}

/// Sweep results per (state, mode).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub state: String,
    pub mode: String,
    pub rows: Vec<SweepRow>,
    pub slope: f64,
}

/// Precision sweep of `|+⟩` and `|T⟩` in noiseless and noisy modes.
pub fn tomography(cfg: &ExperimentConfig) -> Result<(Manifest, Vec<SweepResult>), HarnessError> {
    let mut w = Writer::new("tomography", cfg)?;
    let master = cfg.tomography_master();
    let modes: [(&str, Option<NoiseConfig>); 2] = [("noiseless", None), ("noisy", Some(cfg.sweep_noise))];
    let mut results = Vec::new();
    let mut csv = String::from("state,mode,shots,mean_d,std_d\n");
    for target in [SweepTarget::Plus, SweepTarget::T] {
        for (mode, noise) in &modes {
            let path = format!("tomography/{}/{mode}", target.label());
            let seed = derive_seed(master, &path);
            let start = Instant::now();
            let res = precision_sweep(&target, &cfg.sweep_shots, cfg.sweep_repeats, noise.as_ref(), seed);
            w.timings.insert(path.clone(), start.elapsed().as_secs_f64());
            w.manifest.cells.push(CellRecord {
                variant: format!("{}/{mode}", target.label()),
                r: None,
                fold: None,
                seeds: BTreeMap::from([("sweep".to_string(), seed)]),
                ok: res.is_ok(),
                error: res.as_ref().err().map(|e| e.to_string()),
            });
            if let Ok(rows) = res {
                for row in &rows {
                    let _ = writeln!(
                        csv,
                        "{},{mode},{},{:?},{:?}",
                        target.label(),
                        row.shots,
                        row.mean_d,
                        row.std_d
                    );
                }
                results.push(SweepResult {
                    state: target.label().into(),
                    mode: mode.to_string(),
                    slope: log_log_slope(&rows),
                    rows,
                });
            }
        }
    }
    w.write("tomography.csv", csv.as_bytes())?;
    let slopes: BTreeMap<String, f64> = results
        .iter()
        .map(|r| (format!("{}/{}", r.state, r.mode), r.slope))
        .collect();
    w.manifest.extra.insert("log_log_slopes".into(), serde_json::to_value(slopes)?);
    Ok((w.finish()?, results))
}

/// Engineered features of every loaded record, with fraud rates fitted on
/// all of them.
pub fn engineer(cfg: &ExperimentConfig) -> Result<Manifest, HarnessError> {
    let mut w = Writer::new("engineer", cfg)?;
    let ds = Dataset::load(cfg)?;
    let mut buf = Vec::new();
    write_engineered_csv(&mut buf, &ds.samples)?;
    w.write("engineered.csv", &buf)?;
    w.finish()
}

/// Writes the synthetic records in the raw transaction layout.
pub fn synth(cfg: &ExperimentConfig) -> Result<Manifest, HarnessError> {
    if matches!(cfg.data, DataSource::Csv(_)) {
        return Err(HarnessError::Other("synth needs data = synth".into()));
    }
    let mut w = Writer::new("synth", cfg)?;
    let records = crate::pipeline::load_records(cfg)?;
    let mut buf = Vec::new();
    write_raw(&mut buf, &records)?;
    w.write("synth_raw.csv", &buf)?;
    w.manifest.extra.insert(
        "synth_seed".into(),
        serde_json::Value::from(derive_seed(cfg.seed, "synth")),
    );
    w.finish()
}

/// Reads a config file, or the defaults when `path` is `None`.
pub fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, HarnessError> {
    match path {
        Some(p) => Ok(ExperimentConfig::parse(&fs::read_to_string(p)?)?),
        None => Ok(ExperimentConfig::default()),
    }
}
