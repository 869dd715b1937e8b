use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};

use super::{DataError, RowError};

/// Column names of the raw transaction format, in file order.
pub const RAW_COLUMNS: [&str; 22] = [
    "trans_date_trans_time",
    "cc_num",
    "merchant",
    "category",
    "amt",
    "first",
    "last",
    "gender",
    "street",
    "city",
    "state",
    "zip",
    "lat",
    "long",
    "city_pop",
    "job",
    "dob",
    "trans_num",
    "unix_time",
    "merch_lat",
    "merch_long",
    "is_fraud",
];

const TIME_FMT: &str = "%Y-%m-%d %H:%M:%S";
const DATE_FMT: &str = "%Y-%m-%d";

#[derive(Debug, Clone, PartialEq)]
pub struct RawTransaction {
    pub trans_date_trans_time: NaiveDateTime,
    pub cc_num: u64,
    pub merchant: String,
    pub category: String,
    pub amt: f64,
    pub first: String,
    pub last: String,
    /// `F` or `M`.
    pub gender: char,
    pub street: String,
    pub city: String,
    pub state: String,
    pub zip: u32,
    pub lat: f64,
    pub long: f64,
    pub city_pop: u64,
    pub job: String,
    pub dob: NaiveDate,
    pub trans_num: String,
    pub unix_time: i64,
    pub merch_lat: f64,
    pub merch_long: f64,
    pub is_fraud: u8,
}

impl RawTransaction {
    pub fn is_anomaly(&self) -> bool {
        self.is_fraud == 1
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.amt > 0.0 && self.amt.is_finite()) {
            return Err(format!("amt must be positive, got {}", self.amt));
        }
        for (name, v, lim) in [
            ("lat", self.lat, 90.0),
            ("long", self.long, 180.0),
            ("merch_lat", self.merch_lat, 90.0),
            ("merch_long", self.merch_long, 180.0),
        ] {
            if v.is_nan() || v.abs() > lim {
                return Err(format!("{name} out of range: {v}"));
            }
        }
        if self.is_fraud > 1 {
            return Err(format!("is_fraud must be 0 or 1, got {}", self.is_fraud));
        }
        if self.gender != 'F' && self.gender != 'M' {
            return Err(format!("gender must be F or M, got {}", self.gender));
        }
        Ok(())
    }

    fn fields(&self) -> [String; 22] {
        [
            self.trans_date_trans_time.format(TIME_FMT).to_string(),
            self.cc_num.to_string(),
            self.merchant.clone(),
            self.category.clone(),
            format!("{:.2}", self.amt),
            self.first.clone(),
            self.last.clone(),
            self.gender.to_string(),
            self.street.clone(),
            self.city.clone(),
            self.state.clone(),
            self.zip.to_string(),
            format!("{:.4}", self.lat),
            format!("{:.4}", self.long),
            self.city_pop.to_string(),
            self.job.clone(),
            self.dob.format(DATE_FMT).to_string(),
            self.trans_num.clone(),
            self.unix_time.to_string(),
            format!("{:.6}", self.merch_lat),
            format!("{:.6}", self.merch_long),
            self.is_fraud.to_string(),
        ]
    }
}

fn parse_row(get: impl Fn(usize) -> String) -> Result<RawTransaction, String> {
    fn num<T: std::str::FromStr>(s: &str, col: &str) -> Result<T, String> {
        s.trim().parse().map_err(|_| format!("{col}: cannot parse `{s}`"))
    }
    let gender_field = get(7);
    let mut gender = gender_field.trim().chars();
    let g = match (gender.next(), gender.next()) {
        (Some(c), None) => c,
        _ => return Err(format!("gender: cannot parse `{gender_field}`")),
    };
    let rec = RawTransaction {
        trans_date_trans_time: NaiveDateTime::parse_from_str(get(0).trim(), TIME_FMT)
            .map_err(|e| format!("trans_date_trans_time: {e}"))?,
        cc_num: num(&get(1), RAW_COLUMNS[1])?,
        merchant: get(2),
        category: get(3),
        amt: num(&get(4), RAW_COLUMNS[4])?,
        first: get(5),
        last: get(6),
        gender: g,
        street: get(8),
        city: get(9),
        state: get(10),
        zip: num(&get(11), RAW_COLUMNS[11])?,
        lat: num(&get(12), RAW_COLUMNS[12])?,
        long: num(&get(13), RAW_COLUMNS[13])?,
        city_pop: num(&get(14), RAW_COLUMNS[14])?,
        job: get(15),
        dob: NaiveDate::parse_from_str(get(16).trim(), DATE_FMT).map_err(|e| format!("dob: {e}"))?,
        trans_num: get(17),
        unix_time: num(&get(18), RAW_COLUMNS[18])?,
        merch_lat: num(&get(19), RAW_COLUMNS[19])?,
        merch_long: num(&get(20), RAW_COLUMNS[20])?,
        is_fraud: num(&get(21), RAW_COLUMNS[21])?,
    };
    rec.validate()?;
    Ok(rec)
}

/// Reads raw transactions. Extra columns (such as a leading index) are
/// ignored; every bad row is reported with its line number.
pub fn read_raw<R: Read>(reader: R) -> Result<Vec<RawTransaction>, DataError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut index = [0usize; 22];
    for (slot, name) in index.iter_mut().zip(RAW_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))?;
    }
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for row in rdr.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                errors.push(RowError {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line());
        match parse_row(|c| row.get(index[c]).unwrap_or("").to_string()) {
            Ok(r) => out.push(r),
            Err(message) => errors.push(RowError { line, message }),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(DataError::InvalidRows(errors))
    }
}

pub fn load_raw(path: &Path) -> Result<Vec<RawTransaction>, DataError> {
    read_raw(File::open(path)?)
}

/// Writes records in the raw column layout.
pub fn write_raw<W: Write>(writer: W, records: &[RawTransaction]) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RAW_COLUMNS)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}
