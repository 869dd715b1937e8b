"""Builds the 50-record raw fixture and its engineered-feature oracle.

The oracle recomputes every engineered column directly with pandas, with
fraud rates fitted on the whole fixture.
"""
import random
from datetime import datetime, timedelta

import pandas as pd

random.seed(20240611)

cards = [
    (4111111111111111, "Ann", "Lee", "F", "12 Oak St", "Springfield", "IL", 62701, 39.7817, -89.6501, 116250, "Nurse", "1980-03-14"),
    (4222222222222222, "Bob", "Ray", "M", "9 Pine Rd", "Salem", "OR", 97301, 44.9429, -123.0351, 175535, "Farmer", "1955-11-02"),
    (4333333333333333, "Cat", "Kim", "F", "77 Elm Ct", "Dover", "DE", 19901, 39.1582, -75.5244, 39403, "Teacher", "1999-07-30"),
    (4444444444444444, "Dan", "Fox", "M", "5 Lake Dr", "Austin", "TX", 73301, 30.2672, -97.7431, 961855, "Nurse", "1970-01-01"),
]
merchants = [("fraud_Abbott", "grocery_pos"), ("fraud_Kuhn", "shopping_net"), ("fraud_Lind", "gas_transport"),
             ("fraud_Mraz", "misc_net"), ("fraud_Nolan", "grocery_pos")]
start = datetime(2019, 1, 1)
rows = []
for i in range(50):
    card = cards[i % 4] if i < 40 else cards[random.randrange(2)]
    m = random.choice(merchants)
    t = start + timedelta(seconds=random.randrange(0, 60 * 86400))
    if i == 45:
        # same card and timestamp as an earlier record
        prev = rows[41]
        card = next(c for c in cards if c[0] == prev["cc_num"])
        t = datetime.strptime(prev["trans_date_trans_time"], "%Y-%m-%d %H:%M:%S")
    rows.append({
        "trans_date_trans_time": t.strftime("%Y-%m-%d %H:%M:%S"),
        "cc_num": card[0], "merchant": m[0], "category": m[1],
        "amt": round(random.uniform(1.0, 900.0), 2),
        "first": card[1], "last": card[2], "gender": card[3], "street": card[4], "city": card[5],
        "state": card[6], "zip": card[7], "lat": card[8], "long": card[9], "city_pop": card[10],
        "job": card[11], "dob": card[12], "trans_num": "%032x" % random.getrandbits(128),
        "unix_time": int((t - datetime(1970, 1, 1)).total_seconds()),
        "merch_lat": round(card[8] + random.uniform(-1, 1), 6),
        "merch_long": round(card[9] + random.uniform(-1, 1), 6),
        "is_fraud": 1 if random.random() < 0.3 else 0,
    })
raw = pd.DataFrame(rows)
raw.to_csv("engineering_raw.csv", index=True, index_label="")

df = raw.copy()
ts = pd.to_datetime(df["trans_date_trans_time"])
secs = (ts - pd.Timestamp("1970-01-01")).dt.total_seconds().astype("int64")
df["_t"] = secs
df["_pos"] = range(len(df))
first = {}
last = {}
n7 = {}
n30 = {}
for cc, g in df.sort_values(["_t", "_pos"], kind="mergesort").groupby("cc_num", sort=False):
    times = list(g["_t"])
    idx = list(g["_pos"])
    for k, (i, t) in enumerate(zip(idx, times)):
        first[i] = t - times[0]
        last[i] = 0 if k == 0 else t - times[k - 1]
        n7[i] = sum(1 for u in times[:k] if u >= t - 7 * 86400)
        n30[i] = sum(1 for u in times[:k] if u >= t - 30 * 86400)

def rate(col):
    return df[col].map(df.groupby(col)["is_fraud"].mean())

dob = pd.to_datetime(df["dob"])
out = pd.DataFrame({
    "cc_num": df["cc_num"].astype(float),
    "city_pop": df["city_pop"].astype(float),
    "merch_lat": df["merch_lat"],
    "lat": df["lat"],
    "time_since_first_trans": [float(first[i]) for i in df["_pos"]],
    "long": df["long"],
    "merch_long": df["merch_long"],
    "F": (df["gender"] == "F").astype(float),
    "M": (df["gender"] == "M").astype(float),
    "age": (ts.dt.normalize() - dob).dt.days / 365.25,
    "state_fraud_rate": rate("state"),
    "hour": ts.dt.hour.astype(float),
    "time_since_last_trans": [float(last[i]) for i in df["_pos"]],
    "n_7day_trans": [float(n7[i]) for i in df["_pos"]],
    "job_fraud_rate": rate("job"),
    "n_30day_trans": [float(n30[i]) for i in df["_pos"]],
    "zip_fraud_rate": rate("zip"),
    "category_fraud_rate": rate("category"),
    "merchant_fraud_rate": rate("merchant"),
    "dollar": df["amt"],
    "is_fraud": df["is_fraud"],
})
out.to_csv("engineering_oracle.csv", index=False, float_format="%.17g")
