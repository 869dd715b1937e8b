//! Synthetic transactions in the raw format.
//!
//! Anomalies are planted with the structure seen in the reference data:
//! night-time hours (21:00 to 03:59), larger amounts, fraud-prone categories
//! and merchants, and short bursts on a compromised card.

use chrono::{Duration, NaiveDate, NaiveDateTime};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use super::RawTransaction;

const CATEGORIES: [(&str, f64, f64); 14] = [
    // (name, normal weight, fraud weight)
    ("entertainment", 0.072, 0.03),
    ("food_dining", 0.070, 0.02),
    ("gas_transport", 0.100, 0.08),
    ("grocery_net", 0.035, 0.01),
    ("grocery_pos", 0.095, 0.24),
    ("health_fitness", 0.066, 0.02),
    ("home", 0.095, 0.03),
    ("kids_pets", 0.087, 0.03),
    ("misc_net", 0.049, 0.14),
    ("misc_pos", 0.061, 0.03),
    ("personal_care", 0.070, 0.03),
    ("shopping_net", 0.075, 0.23),
    ("shopping_pos", 0.090, 0.09),
    ("travel", 0.031, 0.02),
];

const STATES: [&str; 20] = [
    "AL", "AZ", "CA", "CO", "FL", "GA", "IL", "MI", "MN", "MO", "NC", "NE", "NY", "OH", "OR",
    "PA", "TX", "VA", "WA", "WI",
];

const FIRST_F: [&str; 8] = ["Mary", "Jennifer", "Linda", "Susan", "Karen", "Lisa", "Nancy", "Emily"];
const FIRST_M: [&str; 8] = ["James", "John", "Robert", "Michael", "David", "Daniel", "Paul", "Mark"];
const LAST: [&str; 12] = [
    "Smith", "Johnson", "Williams", "Brown", "Jones", "Miller", "Davis", "Garcia", "Wilson",
    "Moore", "Taylor", "Clark",
];
const STREETS: [&str; 6] = ["Oak St", "Maple Ave", "Cedar Ln", "Pine Rd", "Elm Ct", "Lake Dr"];
const JOBS: [&str; 16] = [
    "Accountant", "Architect", "Chemist", "Designer", "Engineer", "Farmer", "Journalist",
    "Lawyer", "Librarian", "Nurse", "Pharmacist", "Surveyor", "Teacher", "Therapist",
    "Veterinarian", "Writer",
];
const MERCHANT_WORDS: [&str; 16] = [
    "Abbott", "Bailey", "Conroy", "Dickens", "Emard", "Fisher", "Gislason", "Hahn", "Irwin",
    "Jast", "Kuhn", "Lind", "Mraz", "Nolan", "Ortiz", "Prosacco",
];
const MERCHANTS_PER_CATEGORY: usize = 8;
/// The first merchants of each category attract most fraud.
const RISKY_MERCHANTS: usize = 2;

struct City {
    name: String,
    state: &'static str,
    zip: u32,
    lat: f64,
    long: f64,
    pop: u64,
}

struct Card {
    cc_num: u64,
    first: &'static str,
    last: &'static str,
    gender: char,
    street: String,
    city: usize,
    job: &'static str,
    dob: NaiveDate,
}

fn round_to(v: f64, digits: i32) -> f64 {
    let p = 10f64.powi(digits);
    (v * p).round() / p
}

fn weighted<R: Rng>(rng: &mut R, weights: impl Iterator<Item = f64> + Clone) -> usize {
    let total: f64 = weights.clone().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        if u < w {
            return i;
        }
        u -= w;
        last = i;
    }
    last
}

fn make_cities<R: Rng>(rng: &mut R, n: usize) -> Vec<City> {
    let pop = LogNormal::new(9.0, 1.6).expect("valid lognormal");
    (0..n)
        .map(|i| City {
            name: format!("{} {}", MERCHANT_WORDS[i % MERCHANT_WORDS.len()], ["Falls", "Springs", "Hill", "Valley"][i % 4]),
            state: STATES[rng.random_range(0..STATES.len())],
            zip: rng.random_range(10_000..99_999),
            lat: round_to(rng.random_range(26.0..48.0), 4),
            long: round_to(rng.random_range(-122.0..-71.0), 4),
            pop: (pop.sample(rng) as u64).max(50),
        })
        .collect()
}

fn make_cards<R: Rng>(rng: &mut R, n: usize, n_cities: usize) -> Vec<Card> {
    let base = NaiveDate::from_ymd_opt(1940, 1, 1).expect("valid date");
    (0..n)
        .map(|_| {
            let gender = if rng.random_bool(0.5) { 'F' } else { 'M' };
            Card {
                cc_num: rng.random_range(4_000_000_000_000_000..4_999_999_999_999_999),
                first: if gender == 'F' { &FIRST_F } else { &FIRST_M }.choose(rng).expect("nonempty"),
                last: LAST.choose(rng).expect("nonempty"),
                gender,
                street: format!("{} {}", rng.random_range(1..9999), STREETS.choose(rng).expect("nonempty")),
                city: rng.random_range(0..n_cities),
                job: JOBS.choose(rng).expect("nonempty"),
                dob: base + Duration::days(rng.random_range(0..(63 * 365))),
            }
        })
        .collect()
}

fn normal_hour<R: Rng>(rng: &mut R) -> u32 {
    if rng.random_bool(0.9) {
        rng.random_range(6..21)
    } else {
        [21, 22, 23, 0, 1, 2, 3, 4, 5][rng.random_range(0..9)]
    }
}

fn fraud_hour<R: Rng>(rng: &mut R) -> u32 {
    if rng.random_bool(0.8) {
        [21, 22, 23, 0, 1, 2, 3][rng.random_range(0..7)]
    } else {
        rng.random_range(4..21)
    }
}

fn merchant_name(category: usize, slot: usize) -> String {
    let word = MERCHANT_WORDS[(category * 5 + slot * 3) % MERCHANT_WORDS.len()];
    format!("fraud_{word}-{}{}", CATEGORIES[category].0.replace('_', ""), slot)
}

#[allow(clippy::too_many_arguments)]
fn record<R: Rng>(
    rng: &mut R,
    card: &Card,
    city: &City,
    at: NaiveDateTime,
    category: usize,
    merchant: usize,
    amt: f64,
    is_fraud: u8,
) -> RawTransaction {
    let trans_num: String = (0..32)
        .map(|_| char::from_digit(rng.random_range(0..16), 16).expect("hex digit"))
        .collect();
    RawTransaction {
        trans_date_trans_time: at,
        cc_num: card.cc_num,
        merchant: merchant_name(category, merchant),
        category: CATEGORIES[category].0.to_string(),
        amt: round_to(amt.max(1.0), 2),
        first: card.first.to_string(),
        last: card.last.to_string(),
        gender: card.gender,
        street: card.street.clone(),
        city: city.name.clone(),
        state: city.state.to_string(),
        zip: city.zip,
        lat: city.lat,
        long: city.long,
        city_pop: city.pop,
        job: card.job.to_string(),
        dob: card.dob,
        trans_num,
        unix_time: at.and_utc().timestamp(),
        merch_lat: round_to(city.lat + rng.random_range(-1.0..1.0), 6),
        merch_long: round_to(city.long + rng.random_range(-1.0..1.0), 6),
        is_fraud,
    }
}

/// Generates `n_normal + n_anomalies` records sorted by timestamp.
pub fn synth_generate(seed: u64, n_normal: usize, n_anomalies: usize) -> Vec<RawTransaction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = n_normal + n_anomalies;
    let cities = make_cities(&mut rng, (total / 200).clamp(5, 60));
    let cards = make_cards(&mut rng, (total / 40).clamp(2, 1000), cities.len());
    let start = NaiveDate::from_ymd_opt(2019, 1, 1)
        .expect("valid date")
        .and_hms_opt(0, 0, 0)
        .expect("valid time");
    let span_days = 730;
    let normal_amt = LogNormal::new(45f64.ln(), 0.8).expect("valid lognormal");
    let fraud_amt = LogNormal::new(420f64.ln(), 0.5).expect("valid lognormal");

    let at = |rng: &mut ChaCha8Rng, day: i64, hour: u32| {
        start + Duration::days(day) + Duration::hours(hour as i64) + Duration::seconds(rng.random_range(0..3600))
    };

    let mut out = Vec::with_capacity(total);
    for _ in 0..n_normal {
        let card = &cards[rng.random_range(0..cards.len())];
        let category = weighted(&mut rng, CATEGORIES.iter().map(|c| c.1));
        let merchant = rng.random_range(0..MERCHANTS_PER_CATEGORY);
        let day = rng.random_range(0..span_days);
        let hour = normal_hour(&mut rng);
        let t = at(&mut rng, day, hour);
        let amt = normal_amt.sample(&mut rng);
        out.push(record(&mut rng, card, &cities[card.city], t, category, merchant, amt, 0));
    }

    let mut remaining = n_anomalies;
    while remaining > 0 {
        // A compromised card sees a short burst of fraud over a few days.
        let burst = rng.random_range(2..=6).min(remaining);
        let card = &cards[rng.random_range(0..cards.len())];
        let first_day = rng.random_range(0..span_days - 3);
        for _ in 0..burst {
            let category = weighted(&mut rng, CATEGORIES.iter().map(|c| c.2));
            let merchant = if rng.random_bool(0.7) {
                rng.random_range(0..RISKY_MERCHANTS)
            } else {
                rng.random_range(0..MERCHANTS_PER_CATEGORY)
            };
            let day = first_day + rng.random_range(0..3);
            let hour = fraud_hour(&mut rng);
            let t = at(&mut rng, day, hour);
            let amt = fraud_amt.sample(&mut rng);
            out.push(record(&mut rng, card, &cities[card.city], t, category, merchant, amt, 1));
        }
        remaining -= burst;
    }
    out.sort_by_key(|a| a.trans_date_trans_time);
    out
}
