#!/usr/bin/env python3
"""Regenerate the CSV fixtures under fixtures/.

The fixtures are synthetic stand-ins that mirror the schemas and sizes of
three public datasets (CS department rankings, the ProPublica COMPAS
two-year recidivism table, and the UCI German Credit table). They are
generated from a fixed seed so every run writes identical bytes.

    python3 scripts/make_fixtures.py
"""

import csv
import io
import pathlib
import random
import statistics

OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def write(name, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    (OUT / name).write_text(buf.getvalue(), encoding="utf-8")


def fmt(x, digits=2):
    return f"{x:.{digits}f}"


def average_ranks(xs):
    order = sorted(range(len(xs)), key=lambda i: xs[i])
    ranks = [0.0] * len(xs)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        for t in range(i, j + 1):
            ranks[order[t]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def spearman(x, y):
    return statistics.correlation(average_ranks(x), average_ranks(y))


def cs_departments(rng):
    # PubCount: geometric mean of adjusted publication counts, driven by
    # department size. GRE: average score, unrelated to size and tightly
    # clustered apart from two outlying departments, so after min-max scaling
    # it barely moves the score. DeptSizeBin: median split on Faculty (strictly above median -> large).
    regions = ["NE", "MW", "SA", "SC", "W"]
    rows = []
    for i in range(1, 101):
        faculty = int(rng.lognormvariate(3.3, 0.55)) + 8
        pub = max(0.5, 0.22 * faculty * rng.uniform(0.85, 1.15) + rng.gauss(0, 0.6))
        gre = rng.gauss(158.0, 2.0)
        rows.append([f"Dept{i:03d}", pub, faculty, gre, rng.choice(regions)])
    rows[3][3] = 149.0
    rows[7][3] = 167.0
    median = statistics.median(r[2] for r in rows)
    out = []
    for name, pub, faculty, gre, region in rows:
        size = "large" if faculty > median else "small"
        out.append([name, fmt(pub), faculty, fmt(gre, 1), region, size])

    # With PubCount=1.0, GRE=0.3 on min-max normalized values the top 10
    # must be all large departments.
    def score(r):
        return float(r[1]), float(r[3])

    pubs = [score(r)[0] for r in out]
    gres = [score(r)[1] for r in out]
    lo_p, hi_p, lo_g, hi_g = min(pubs), max(pubs), min(gres), max(gres)
    ranked = sorted(
        out,
        key=lambda r: -((score(r)[0] - lo_p) / (hi_p - lo_p) + 0.3 * (score(r)[1] - lo_g) / (hi_g - lo_g)),
    )
    assert all(r[5] == "large" for r in ranked[:10]), "top-10 not all large; change seed"
    scores = [(score(r)[0] - lo_p) / (hi_p - lo_p) + 0.3 * (score(r)[1] - lo_g) / (hi_g - lo_g) for r in out]
    assert abs(spearman(gres, scores)) < 0.3, "GRE correlates with the score; change seed"
    write("cs_departments.csv", ["Name", "PubCount", "Faculty", "GRE", "Region", "DeptSizeBin"], out)


def compas(rng):
    races = ["African-American"] * 51 + ["Caucasian"] * 34 + ["Hispanic"] * 9 + ["Other"] * 6
    charges = ["F"] * 64 + ["M"] * 36
    rows = []
    for i in range(1, 6890):
        sex = "Female" if rng.random() < 0.19 else "Male"
        age = max(18, min(80, int(rng.gammavariate(4.0, 8.5)) + 18))
        age_cat = "Less than 25" if age < 25 else ("Greater than 45" if age > 45 else "25 - 45")
        race = rng.choice(races)
        priors = min(38, int(rng.expovariate(1 / 3.2)))
        juv_fel = 1 if rng.random() < 0.06 else 0
        juv_misd = 1 if rng.random() < 0.08 else 0
        base = 1 + priors * 0.35 + (45 - min(age, 45)) * 0.12 + rng.gauss(0, 1.8)
        decile = max(1, min(10, int(round(base))))
        v_decile = max(1, min(10, int(round(base * 0.8 + rng.gauss(0, 1.5)))))
        recid = 1 if rng.random() < 0.2 + 0.05 * decile else 0
        rows.append([
            i, sex, age, age_cat, race, juv_fel, juv_misd, priors,
            decile, v_decile, rng.choice(charges), recid,
        ])
    write(
        "compas.csv",
        ["id", "sex", "age", "age_cat", "race", "juv_fel_count", "juv_misd_count",
         "priors_count", "decile_score", "v_decile_score", "c_charge_degree", "two_year_recid"],
        rows,
    )


def german_credit(rng):
    purposes = ["car", "furniture", "radio/tv", "education", "business", "repairs", "other"]
    housing = ["own"] * 71 + ["rent"] * 18 + ["free"] * 11
    checking = ["<0", "0<=X<200", ">=200", "no checking"]
    rows = []
    for _ in range(1000):
        sex = "female" if rng.random() < 0.31 else "male"
        age = max(19, min(75, int(rng.gammavariate(5.0, 7.0))))
        duration = rng.choice([6, 9, 12, 12, 15, 18, 24, 24, 30, 36, 48, 60])
        amount = int(rng.lognormvariate(7.8, 0.75))
        rate = rng.randint(1, 4)
        residence = rng.randint(1, 4)
        credits = 1 + (rng.random() < 0.35) + (rng.random() < 0.05)
        dependents = 1 + (rng.random() < 0.15)
        risk_score = 0.7 - duration * 0.006 - amount * 0.00001 + (age - 35) * 0.004 + rng.gauss(0, 0.2)
        rows.append([
            rng.choice(checking), duration, amount, rate, residence, age, credits,
            dependents, sex, rng.choice(housing), rng.choice(purposes),
            "yes" if rng.random() < 0.96 else "no",
            "good" if risk_score > 0.3 else "bad",
        ])
    write(
        "german_credit.csv",
        ["checking_status", "duration", "credit_amount", "installment_rate", "residence_since",
         "age", "existing_credits", "num_dependents", "sex", "housing", "purpose",
         "foreign_worker", "credit_risk"],
        rows,
    )


def main():
    OUT.mkdir(exist_ok=True)
    cs_departments(random.Random(20180610))
    compas(random.Random(6889))
    german_credit(random.Random(1000))


if __name__ == "__main__":
    main()
