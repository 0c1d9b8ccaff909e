"""Writes data/credit_standin.csv: 1000 synthetic rows in the UCI credit card
client schema. Amount columns are zero-inflated and correlated; a few bill
amounts are negative, as in the public file. Deterministic."""

import csv
import pathlib

import numpy as np

ROWS = 1000
SEED = 20240611

COLUMNS = (
    ["ID", "LIMIT_BAL", "SEX", "EDUCATION", "MARRIAGE", "AGE", "PAY_0"]
    + [f"PAY_{i}" for i in range(2, 7)]
    + [f"BILL_AMT{i}" for i in range(1, 7)]
    + [f"PAY_AMT{i}" for i in range(1, 7)]
    + ["default.payment.next.month"]
)


def main() -> None:
    rng = np.random.default_rng(SEED)
    limit = rng.choice(np.arange(10, 80) * 10000, size=ROWS)
    usage = rng.beta(1.2, 2.0, size=ROWS)
    habit = rng.normal(size=ROWS)

    rows = []
    for r in range(ROWS):
        bills, pays = [], []
        for m in range(6):
            if rng.random() < 0.08:
                bill = 0.0
            else:
                bill = float(np.round(limit[r] * usage[r] * np.exp(rng.normal(0, 0.25))))
                if rng.random() < 0.015:
                    bill = -float(rng.integers(1, 2000))
            bills.append(bill)
            latent = 0.8 * habit[r] + 0.6 * rng.normal()
            if latent < -0.9 or bill <= 0:
                pay = 0.0
            else:
                pay = float(np.round(max(bill, 1000.0) * 0.08 * np.exp(0.9 * latent)))
            pays.append(pay)
        rows.append(
            [r + 1, int(limit[r]), int(rng.integers(1, 3)), int(rng.integers(1, 5)), int(rng.integers(1, 4)),
             int(rng.integers(21, 70))]
            + [int(rng.integers(-2, 3)) for _ in range(6)]
            + [int(b) for b in bills]
            + [int(p) for p in pays]
            + [int(rng.random() < 0.22)]
        )

    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "credit_standin.csv"
    with out.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(COLUMNS)
        w.writerows(rows)


if __name__ == "__main__":
    main()
