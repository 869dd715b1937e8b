//! Classical and projected quantum rbf kernels.

use std::collections::{HashMap, VecDeque};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::ops::Deref;
use std::path::Path;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::{OneQubitRdm, RdmKind};

pub const DEFAULT_GAMMA: f64 = 0.1;
pub const RDM_SCHEMA: &str = "qocsvm.rdmset.v1";
const BIN_MAGIC: &[u8; 4] = b"QRDM";
const BIN_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("gamma must be positive and finite, got {0}")]
    BadGamma(f64),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("qubit count mismatch: {0} vs {1}")]
    QubitMismatch(usize, usize),
    #[error("need at least one row")]
    Empty,
    #[error("train and test rows are of different kinds")]
    KindMismatch,
    #[error("matrix must be square with finite entries ({0})")]
    BadMatrix(String),
    #[error("RDM cache schema mismatch: expected `{expected}`, found `{found}`")]
    Schema { expected: String, found: String },
    #[error("malformed RDM cache: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Rbf,
    Qrbf,
    /// Externally supplied Gram values.
    Precomputed,
}

fn check_gamma(gamma: f64) -> Result<(), KernelError> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(KernelError::BadGamma(gamma))
    }
}

fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn squared_rdm_distance(a: &[OneQubitRdm], b: &[OneQubitRdm]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.squared_frobenius_distance(y))
        .sum()
}

/// `exp(−γ‖a − b‖²)`.
pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> Result<f64, KernelError> {
    check_gamma(gamma)?;
    if a.len() != b.len() {
        return Err(KernelError::LengthMismatch(a.len(), b.len()));
    }
    Ok((-gamma * squared_euclidean(a, b)).exp())
}

/// `exp(−γ Σ_k ‖ρ_k(a) − ρ_k(b)‖_F²)`.
pub fn qrbf_kernel(a: &[OneQubitRdm], b: &[OneQubitRdm], gamma: f64) -> Result<f64, KernelError> {
    check_gamma(gamma)?;
    if a.len() != b.len() {
        return Err(KernelError::QubitMismatch(a.len(), b.len()));
    }
    Ok((-gamma * squared_rdm_distance(a, b)).exp())
}

/// Where the RDMs of an [`RdmSet`] came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Exact,
    Estimated { shots: usize, seed: u64 },
}

/// Per-sample RDM lists with a common qubit count.
#[derive(Debug, Clone, PartialEq)]
pub struct RdmSet {
    num_qubits: usize,
    samples: Vec<Vec<OneQubitRdm>>,
    provenance: Provenance,
}

impl RdmSet {
    pub fn new(samples: Vec<Vec<OneQubitRdm>>, provenance: Provenance) -> Result<Self, KernelError> {
        let num_qubits = samples.first().map(Vec::len).ok_or(KernelError::Empty)?;
        if num_qubits == 0 {
            return Err(KernelError::Malformed("samples have no qubits".into()));
        }
        if let Some(bad) = samples.iter().find(|s| s.len() != num_qubits) {
            return Err(KernelError::QubitMismatch(num_qubits, bad.len()));
        }
        Ok(Self {
            num_qubits,
            samples,
            provenance,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Vec<OneQubitRdm>] {
        &self.samples
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Subset in the order given by `indices`.
    pub fn select(&self, indices: &[usize]) -> RdmSet {
        RdmSet {
            num_qubits: self.num_qubits,
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Kind tag carried by every RDM in the set.
    pub fn kind(&self) -> RdmKind {
        match self.provenance {
            Provenance::Exact => RdmKind::Exact,
            Provenance::Estimated { .. } => RdmKind::Estimated,
        }
    }
}

/// Rows a kernel can be evaluated on.
#[derive(Debug, Clone, Copy)]
pub enum KernelRows<'a> {
    Features(&'a [Vec<f64>]),
    Rdms(&'a [Vec<OneQubitRdm>]),
}

impl<'a> KernelRows<'a> {
    pub fn len(&self) -> usize {
        match self {
            KernelRows::Features(r) => r.len(),
            KernelRows::Rdms(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> KernelKind {
        match self {
            KernelRows::Features(_) => KernelKind::Rbf,
            KernelRows::Rdms(_) => KernelKind::Qrbf,
        }
    }

    fn width(&self, i: usize) -> usize {
        match self {
            KernelRows::Features(r) => r[i].len(),
            KernelRows::Rdms(r) => r[i].len(),
        }
    }

    fn check_uniform(&self) -> Result<(), KernelError> {
        if self.is_empty() {
            return Err(KernelError::Empty);
        }
        let w = self.width(0);
        for i in 1..self.len() {
            if self.width(i) != w {
                return Err(match self {
                    KernelRows::Features(_) => KernelError::LengthMismatch(w, self.width(i)),
                    KernelRows::Rdms(_) => KernelError::QubitMismatch(w, self.width(i)),
                });
            }
        }
        Ok(())
    }

    /// Kernel value between row `i` of `self` and row `j` of `other`; both
    /// must be the same kind with validated widths.
    #[inline]
    fn eval(&self, i: usize, other: &KernelRows<'_>, j: usize, gamma: f64) -> f64 {
        let d2 = match (self, other) {
            (KernelRows::Features(a), KernelRows::Features(b)) => squared_euclidean(&a[i], &b[j]),
            (KernelRows::Rdms(a), KernelRows::Rdms(b)) => squared_rdm_distance(&a[i], &b[j]),
            _ => unreachable!("kinds checked by caller"),
        };
        (-gamma * d2).exp()
    }
}

impl<'a> From<&'a RdmSet> for KernelRows<'a> {
    fn from(set: &'a RdmSet) -> Self {
        KernelRows::Rdms(&set.samples)
    }
}

/// Dense symmetric Gram matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    n: usize,
    values: Vec<f64>,
    gamma: Option<f64>,
    kind: KernelKind,
}

impl KernelMatrix {
    /// Wraps precomputed values (row-major, `n×n`). Symmetry is checked by
    /// consumers that need it.
    pub fn precomputed(n: usize, values: Vec<f64>) -> Result<Self, KernelError> {
        if n == 0 || values.len() != n * n {
            return Err(KernelError::BadMatrix(format!(
                "{} values for n = {n}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(KernelError::BadMatrix("non-finite entry".into()));
        }
        Ok(Self {
            n,
            values,
            gamma: None,
            kind: KernelKind::Precomputed,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, KernelError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(KernelError::BadMatrix("rows must have length n".into()));
        }
        Self::precomputed(n, rows.concat())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row_slice(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest `|K_ij − K_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Principal submatrix on `indices`.
    pub fn select(&self, indices: &[usize]) -> KernelMatrix {
        let m = indices.len();
        let mut values = Vec::with_capacity(m * m);
        for &i in indices {
            for &j in indices {
                values.push(self.get(i, j));
            }
        }
        KernelMatrix {
            n: m,
            values,
            gamma: self.gamma,
            kind: self.kind,
        }
    }

    /// Comma-separated rows without a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for i in 0..self.n {
            let line: Vec<String> = self.row_slice(i).iter().map(|v| format!("{v:?}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Gram matrix with unit diagonal; each unordered pair is evaluated once.
pub fn gram_matrix(rows: KernelRows<'_>, gamma: f64) -> Result<KernelMatrix, KernelError> {
    check_gamma(gamma)?;
    rows.check_uniform()?;
    let n = rows.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).map(|j| rows.eval(i, &rows, j, gamma)).collect())
        .collect();
    let mut values = vec![0.0; n * n];
    for (i, tail) in upper.iter().enumerate() {
        values[i * n + i] = 1.0;
        for (off, &v) in tail.iter().enumerate() {
            let j = i + 1 + off;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(KernelMatrix {
        n,
        values,
        gamma: Some(gamma),
        kind: rows.kind(),
    })
}

/// `l_test × l_train` matrix with entry `(i, j) = K(test_i, train_j)`.
pub fn cross_gram(
    train: KernelRows<'_>,
    test: KernelRows<'_>,
    gamma: f64,
) -> Result<Vec<Vec<f64>>, KernelError> {
    check_gamma(gamma)?;
    if train.kind() != test.kind() {
        return Err(KernelError::KindMismatch);
    }
    train.check_uniform()?;
    test.check_uniform()?;
    if train.width(0) != test.width(0) {
        return Err(match train {
            KernelRows::Features(_) => KernelError::LengthMismatch(train.width(0), test.width(0)),
            KernelRows::Rdms(_) => KernelError::QubitMismatch(train.width(0), test.width(0)),
        });
    }
    Ok((0..test.len())
        .into_par_iter()
        .map(|i| {
            (0..train.len())
                .map(|j| test.eval(i, &train, j, gamma))
                .collect()
        })
        .collect())
}

/// A kernel row handed to the solver.
pub enum KernelRow<'a> {
    Borrowed(&'a [f64]),
    Shared(Arc<[f64]>),
}

impl Deref for KernelRow<'_> {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        match self {
            KernelRow::Borrowed(s) => s,
            KernelRow::Shared(a) => a,
        }
    }
}

/// Row access to a symmetric kernel matrix.
pub trait KernelSource: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn diag(&self, i: usize) -> f64;

    fn row(&self, i: usize) -> KernelRow<'_>;

    /// Largest deviation from symmetry, if cheaply known.
    fn asymmetry(&self) -> f64 {
        0.0
    }

    fn kind(&self) -> KernelKind {
        KernelKind::Precomputed
    }

    fn gamma(&self) -> Option<f64> {
        None
    }
}

impl KernelSource for KernelMatrix {
    fn len(&self) -> usize {
        self.n
    }

    fn diag(&self, i: usize) -> f64 {
        self.get(i, i)
    }

    fn row(&self, i: usize) -> KernelRow<'_> {
        KernelRow::Borrowed(self.row_slice(i))
    }

    fn asymmetry(&self) -> f64 {
        KernelMatrix::asymmetry(self)
    }

    fn kind(&self) -> KernelKind {
        self.kind
    }

    fn gamma(&self) -> Option<f64> {
        self.gamma
    }
}

type RowCache = (HashMap<usize, Arc<[f64]>>, VecDeque<usize>);

/// Computes Gram rows on demand with a bounded LRU cache, for training sets
/// too large to hold the dense matrix.
pub struct LazyKernel<'a> {
    rows: KernelRows<'a>,
    gamma: f64,
    capacity: usize,
    cache: Mutex<RowCache>,
}

impl<'a> LazyKernel<'a> {
    /// `cache_bytes` bounds the memory held by cached rows.
    pub fn new(rows: KernelRows<'a>, gamma: f64, cache_bytes: usize) -> Result<Self, KernelError> {
        check_gamma(gamma)?;
        rows.check_uniform()?;
        let per_row = rows.len() * std::mem::size_of::<f64>();
        Ok(Self {
            rows,
            gamma,
            capacity: (cache_bytes / per_row.max(1)).max(2),
            cache: Mutex::new((HashMap::new(), VecDeque::new())),
        })
    }

}

impl KernelSource for LazyKernel<'_> {
    fn len(&self) -> usize {
        self.rows.len()
    }

    fn diag(&self, _i: usize) -> f64 {
        1.0
    }

    fn row(&self, i: usize) -> KernelRow<'_> {
        {
            let guard = self.cache.lock().expect("cache lock");
            if let Some(r) = guard.0.get(&i) {
                return KernelRow::Shared(Arc::clone(r));
            }
        }
        let n = self.rows.len();
        let row: Arc<[f64]> = (0..n)
            .map(|j| {
                if i == j {
                    1.0
                } else {
                    self.rows.eval(i, &self.rows, j, self.gamma)
                }
            })
            .collect::<Vec<_>>()
            .into();
        let mut guard = self.cache.lock().expect("cache lock");
        let (map, order) = &mut *guard;
        if map.len() >= self.capacity {
            if let Some(old) = order.pop_front() {
                map.remove(&old);
            }
        }
        map.insert(i, Arc::clone(&row));
        order.push_back(i);
        KernelRow::Shared(row)
    }

    fn kind(&self) -> KernelKind {
        self.rows.kind()
    }

    fn gamma(&self) -> Option<f64> {
        Some(self.gamma)
    }
}

/// On-disk encodings of an [`RdmSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdmFormat {
    Json,
    /// Little-endian `f64` block after a JSON header.
    Binary,
}

#[derive(Serialize, Deserialize)]
struct RdmHeader {
    schema: String,
    num_qubits: usize,
    num_samples: usize,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct RdmJson {
    #[serde(flatten)]
    header: RdmHeader,
    /// `[sample][qubit][8]`, row-major re/im interleaved.
    samples: Vec<Vec<[f64; 8]>>,
}

fn header_of(set: &RdmSet) -> RdmHeader {
    RdmHeader {
        schema: RDM_SCHEMA.to_string(),
        num_qubits: set.num_qubits,
        num_samples: set.samples.len(),
        provenance: set.provenance.clone(),
    }
}

fn check_header(h: &RdmHeader) -> Result<(), KernelError> {
    if h.schema != RDM_SCHEMA {
        return Err(KernelError::Schema {
            expected: RDM_SCHEMA.to_string(),
            found: h.schema.clone(),
        });
    }
    Ok(())
}

/// Per-sample rows of 8 reals per qubit, as stored in the JSON cache.
pub fn rdms_to_flat(rdms: &[OneQubitRdm]) -> Vec<[f64; 8]> {
    rdms.iter().map(OneQubitRdm::to_flat).collect()
}

pub fn save_rdms(path: &Path, set: &RdmSet, format: RdmFormat) -> Result<(), KernelError> {
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        RdmFormat::Json => {
            let doc = RdmJson {
                header: header_of(set),
                samples: set.samples.iter().map(|s| rdms_to_flat(s)).collect(),
            };
            serde_json::to_writer(&mut w, &doc)?;
        }
        RdmFormat::Binary => {
            let header = serde_json::to_vec(&header_of(set))?;
            w.write_all(BIN_MAGIC)?;
            w.write_all(&BIN_VERSION.to_le_bytes())?;
            w.write_all(&(header.len() as u64).to_le_bytes())?;
            w.write_all(&header)?;
            for s in &set.samples {
                for r in s {
                    for v in r.to_flat() {
                        w.write_all(&v.to_le_bytes())?;
                    }
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Loads either encoding, detected from the leading bytes.
pub fn load_rdms(path: &Path) -> Result<RdmSet, KernelError> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.starts_with(BIN_MAGIC) {
        return load_binary(&bytes);
    }
    let value: serde_json::Value = serde_json::from_slice(&bytes)
        .map_err(|e| KernelError::Malformed(format!("not JSON or binary RDM cache: {e}")))?;
    let found = value
        .get("schema")
        .and_then(|s| s.as_str())
        .unwrap_or("<missing>");
    if found != RDM_SCHEMA {
        return Err(KernelError::Schema {
            expected: RDM_SCHEMA.to_string(),
            found: found.to_string(),
        });
    }
    let doc: RdmJson = serde_json::from_value(value)?;
    check_header(&doc.header)?;
    let kind = match doc.header.provenance {
        Provenance::Exact => RdmKind::Exact,
        Provenance::Estimated { .. } => RdmKind::Estimated,
    };
    if doc.samples.len() != doc.header.num_samples {
        return Err(KernelError::Malformed(format!(
            "header says {} samples, found {}",
            doc.header.num_samples,
            doc.samples.len()
        )));
    }
    let samples = doc
        .samples
        .iter()
        .map(|s| s.iter().map(|f| OneQubitRdm::from_flat(f, kind)).collect())
        .collect();
    let set = RdmSet::new(samples, doc.header.provenance)?;
    if set.num_qubits != doc.header.num_qubits {
        return Err(KernelError::QubitMismatch(doc.header.num_qubits, set.num_qubits));
    }
    Ok(set)
}

fn load_binary(bytes: &[u8]) -> Result<RdmSet, KernelError> {
    let malformed = |m: &str| KernelError::Malformed(m.to_string());
    if bytes.len() < 16 {
        return Err(malformed("truncated binary header"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != BIN_VERSION {
        return Err(KernelError::Schema {
            expected: format!("{RDM_SCHEMA} (binary v{BIN_VERSION})"),
            found: format!("binary v{version}"),
        });
    }
    let hlen = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = bytes
        .get(16..16usize.saturating_add(hlen))
        .ok_or_else(|| malformed("truncated header"))?;
    let header: RdmHeader = serde_json::from_slice(body)
        .map_err(|e| KernelError::Malformed(format!("bad header: {e}")))?;
    check_header(&header)?;
    let data = &bytes[16 + hlen..];
    let per_sample = header.num_qubits * 8;
    if header.num_qubits == 0 || data.len() != header.num_samples * per_sample * 8 {
        return Err(malformed("payload size does not match header"));
    }
    let kind = match header.provenance {
        Provenance::Exact => RdmKind::Exact,
        Provenance::Estimated { .. } => RdmKind::Estimated,
    };
    let floats: Vec<f64> = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let samples = floats
        .chunks_exact(per_sample)
        .map(|s| {
            s.chunks_exact(8)
                .map(|f| OneQubitRdm::from_flat(f.try_into().expect("8 floats"), kind))
                .collect()
        })
        .collect();
    RdmSet::new(samples, header.provenance)
}
