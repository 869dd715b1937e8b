use std::borrow::Cow;
use std::collections::HashMap;
use std::io::Write;

use chrono::Timelike;
use rayon::prelude::*;

use super::{DataError, RawTransaction};

pub const NUM_FEATURES: usize = 20;

/// Engineered column names, ascending by correlation with the label.
pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "cc_num",
    "city_pop",
    "merch_lat",
    "lat",
    "time_since_first_trans",
    "long",
    "merch_long",
    "F",
    "M",
    "age",
    "state_fraud_rate",
    "hour",
    "time_since_last_trans",
    "n_7day_trans",
    "job_fraud_rate",
    "n_30day_trans",
    "zip_fraud_rate",
    "category_fraud_rate",
    "merchant_fraud_rate",
    "dollar",
];

const DAY: i64 = 86_400;
const DAYS_PER_YEAR: f64 = 365.25;

#[derive(Debug, Clone, PartialEq)]
pub struct EngineeredSample {
    pub features: [f64; NUM_FEATURES],
    pub is_fraud: u8,
}

impl EngineeredSample {
    /// +1 for normal, −1 for anomaly.
    pub fn label(&self) -> i8 {
        if self.is_fraud == 1 {
            -1
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKey {
    Zip,
    State,
    Job,
    Category,
    Merchant,
}

impl GroupKey {
    pub const ALL: [GroupKey; 5] = [
        GroupKey::Zip,
        GroupKey::State,
        GroupKey::Job,
        GroupKey::Category,
        GroupKey::Merchant,
    ];

    pub fn value<'a>(&self, r: &'a RawTransaction) -> Cow<'a, str> {
        match self {
            GroupKey::Zip => Cow::Owned(r.zip.to_string()),
            GroupKey::State => Cow::Borrowed(&r.state),
            GroupKey::Job => Cow::Borrowed(&r.job),
            GroupKey::Category => Cow::Borrowed(&r.category),
            GroupKey::Merchant => Cow::Borrowed(&r.merchant),
        }
    }
}

/// Per-group fraud rate fitted on a subset of records. Transforming needs
/// only the group value, never a label.
#[derive(Debug, Clone, PartialEq)]
pub struct FraudRateEncoder {
    key: GroupKey,
    rates: HashMap<String, f64>,
    default_rate: f64,
}

impl FraudRateEncoder {
    pub fn fit(records: &[RawTransaction], key: GroupKey, fit_on: &[usize]) -> Result<Self, DataError> {
        if fit_on.is_empty() {
            return Err(DataError::EmptyFitSet);
        }
        let mut tally: HashMap<String, (u64, u64)> = HashMap::new();
        let mut frauds = 0u64;
        for &i in fit_on {
            let r = &records[i];
            let e = tally.entry(key.value(r).into_owned()).or_default();
            e.0 += r.is_fraud as u64;
            e.1 += 1;
            frauds += r.is_fraud as u64;
        }
        Ok(Self {
            key,
            rates: tally
                .into_iter()
                .map(|(k, (f, n))| (k, f as f64 / n as f64))
                .collect(),
            default_rate: frauds as f64 / fit_on.len() as f64,
        })
    }

    pub fn key(&self) -> GroupKey {
        self.key
    }

    /// Rate for unseen group values.
    pub fn default_rate(&self) -> f64 {
        self.default_rate
    }

    pub fn rate(&self, value: &str) -> f64 {
        self.rates.get(value).copied().unwrap_or(self.default_rate)
    }

    pub fn transform(&self, r: &RawTransaction) -> f64 {
        self.rate(&self.key.value(r))
    }
}

/// The five fraud-rate encoders.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTables {
    pub zip: FraudRateEncoder,
    pub state: FraudRateEncoder,
    pub job: FraudRateEncoder,
    pub category: FraudRateEncoder,
    pub merchant: FraudRateEncoder,
}

impl RateTables {
    pub fn fit(records: &[RawTransaction], fit_on: &[usize]) -> Result<Self, DataError> {
        let f = |k| FraudRateEncoder::fit(records, k, fit_on);
        Ok(Self {
            zip: f(GroupKey::Zip)?,
            state: f(GroupKey::State)?,
            job: f(GroupKey::Job)?,
            category: f(GroupKey::Category)?,
            merchant: f(GroupKey::Merchant)?,
        })
    }

    pub fn fit_all(records: &[RawTransaction]) -> Result<Self, DataError> {
        let all: Vec<usize> = (0..records.len()).collect();
        Self::fit(records, &all)
    }

    /// Overwrites the rate columns of `sample` for record `r`.
    pub fn apply(&self, r: &RawTransaction, sample: &mut EngineeredSample) {
        sample.features[10] = self.state.transform(r);
        sample.features[14] = self.job.transform(r);
        sample.features[16] = self.zip.transform(r);
        sample.features[17] = self.category.transform(r);
        sample.features[18] = self.merchant.transform(r);
    }
}

fn years_between(from: chrono::NaiveDate, to: chrono::NaiveDateTime) -> f64 {
    (to.date() - from).num_days() as f64 / DAYS_PER_YEAR
}

/// Engineers every record. History features look only at earlier
/// transactions of the same card, ordered by timestamp then input position;
/// a card's first transaction has time-since-last 0.
pub fn engineer(records: &[RawTransaction], rates: &RateTables) -> Vec<EngineeredSample> {
    let mut by_card: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        by_card.entry(r.cc_num).or_default().push(i);
    }
    let mut cards: Vec<Vec<usize>> = by_card.into_values().collect();
    cards.sort_unstable_by_key(|c| c[0]);

    // (record index, time since first, time since last, 7-day count, 30-day count)
    let history: Vec<(usize, f64, f64, f64, f64)> = cards
        .par_iter_mut()
        .flat_map_iter(|idx| {
            idx.sort_by_key(|&i| (records[i].trans_date_trans_time, i));
            let times: Vec<i64> = idx
                .iter()
                .map(|&i| records[i].trans_date_trans_time.and_utc().timestamp())
                .collect();
            let (mut lo7, mut lo30) = (0usize, 0usize);
            let mut rows = Vec::with_capacity(idx.len());
            for (pos, &i) in idx.iter().enumerate() {
                let t = times[pos];
                while times[lo7] < t - 7 * DAY {
                    lo7 += 1;
                }
                while times[lo30] < t - 30 * DAY {
                    lo30 += 1;
                }
                let since_last = if pos == 0 { 0 } else { t - times[pos - 1] };
                rows.push((
                    i,
                    (t - times[0]) as f64,
                    since_last as f64,
                    (pos - lo7) as f64,
                    (pos - lo30) as f64,
                ));
            }
            rows
        })
        .collect();

    let mut out: Vec<EngineeredSample> = records
        .par_iter()
        .map(|r| {
            let mut s = EngineeredSample {
                features: [
                    r.cc_num as f64,
                    r.city_pop as f64,
                    r.merch_lat,
                    r.lat,
                    0.0,
                    r.long,
                    r.merch_long,
                    (r.gender == 'F') as u8 as f64,
                    (r.gender == 'M') as u8 as f64,
                    years_between(r.dob, r.trans_date_trans_time),
                    0.0,
                    r.trans_date_trans_time.hour() as f64,
                    0.0,
                    0.0,
                    0.0,
                    0.0,
                    0.0,
                    0.0,
                    0.0,
                    r.amt,
                ],
                is_fraud: r.is_fraud,
            };
            rates.apply(r, &mut s);
            s
        })
        .collect();
    for (i, first, last, n7, n30) in history {
        let f = &mut out[i].features;
        f[4] = first;
        f[12] = last;
        f[13] = n7;
        f[15] = n30;
    }
    out
}

/// Writes the 20 features and the label with named headers.
pub fn write_engineered_csv<W: Write>(w: W, samples: &[EngineeredSample]) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = FEATURE_NAMES.to_vec();
    header.push("is_fraud");
    w.write_record(&header)?;
    for s in samples {
        let mut row: Vec<String> = s.features.iter().map(|v| format!("{v:?}")).collect();
        row.push(s.is_fraud.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
