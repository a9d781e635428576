"""Regenerates demo/loans.csv: synthetic loan decisions with a planted
penalty for black female applicants and a milder one for applicants over 60."""

import csv
import math
import random

rng = random.Random(7)
rows = []
for _ in range(4000):
    gender = rng.choice(["female", "male"])
    race = rng.choices(["white", "black", "asian", "hispanic"], [0.55, 0.2, 0.1, 0.15])[0]
    age = rng.randint(18, 80)
    income = round(rng.uniform(10, 200), 2)
    debt_ratio = round(rng.random(), 2)
    years = min(40, max(0, int(rng.gauss(8, 6))))
    logit = 0.03 * (income - 80) - 3.0 * (debt_ratio - 0.4) + 0.05 * (years - 8)
    if race == "black" and gender == "female":
        logit -= 2.0
    if age >= 60:
        logit -= 0.8
    approved = "yes" if rng.random() < 1 / (1 + math.exp(-logit)) else "no"
    rows.append([gender, race, age, income, debt_ratio, years, approved])

with open("loans.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["gender", "race", "age", "income", "debt_ratio", "years_employed", "approved"])
    w.writerows(rows)
