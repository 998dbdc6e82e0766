#!/usr/bin/env python3
"""Writes the synthetic 30-fund NAV panel used by the end-to-end tests.

Output (all CSV): funds.csv (name,date,nav), benchmark.csv (date,nav),
profiles.csv and ranks.csv. The generator is seeded, so rerunning it
reproduces the committed files byte for byte.

Every fund is built so that each built-in scenario has strictly positive
inputs and outputs: positive beta, at least two losing months, and a
positive trailing 12-month rolling return on average.
"""

import argparse
import calendar
import math
import pathlib
import random

SUB_CATEGORIES = ["Large Cap", "Large & Mid Cap", "Multi Cap", "Mid Cap", "Small Cap"]
FUNDS_PER_GROUP = 6
MONTHS = 37  # NAV points; 36 monthly returns
START = (2017, 5)


def month_ends():
    year, month = START
    out = []
    for _ in range(MONTHS):
        day = calendar.monthrange(year, month)[1]
        out.append(f"{year:04d}-{month:02d}-{day:02d}")
        month += 1
        if month > 12:
            year, month = year + 1, 1
    return out


def expected_return(returns):
    tail = returns[-24:]
    rolling = []
    for k in range(len(tail) - 11):
        growth = 1.0
        for r in tail[k:k + 12]:
            growth *= 1.0 + r
        rolling.append(growth - 1.0)
    return sum(rolling) / len(rolling)


def acceptable(returns, bench):
    n = len(returns)
    mp = sum(returns) / n
    mb = sum(bench) / n
    cov = sum((a - mp) * (b - mb) for a, b in zip(returns, bench)) / n
    losses = sorted(returns)
    return cov > 0 and losses[1] < 0 and expected_return(returns) > 0


def nav_path(start, returns):
    navs = [start]
    for r in returns:
        navs.append(navs[-1] * (1.0 + r))
    return navs


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out", type=pathlib.Path)
    parser.add_argument("--seed", type=int, default=20200629)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    dates = month_ends()
    bench = [rng.gauss(0.009, 0.045) for _ in range(MONTHS - 1)]

    fund_rows = []
    profiles = []
    ranks = []
    for g, sub in enumerate(SUB_CATEGORIES):
        risk = 1.0 + 0.25 * g
        for k in range(FUNDS_PER_GROUP):
            name = f"Synthetic {sub} Fund {k + 1}"
            while True:
                beta = rng.uniform(0.6, 1.3) * math.sqrt(risk)
                alpha = rng.gauss(0.001, 0.003)
                noise = 0.012 * risk
                returns = [alpha + beta * b + rng.gauss(0.0, noise) for b in bench]
                if acceptable(returns, bench):
                    break
            navs = nav_path(rng.uniform(10.0, 200.0), returns)
            for d, v in zip(dates, navs):
                fund_rows.append(f"{name},{d},{v:.4f}")
            corpus = round(rng.uniform(600.0, 25000.0), 2)
            year = rng.randint(2003, 2016)
            inception = f"{year:04d}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}"
            expense = round(rng.uniform(0.3, 2.4), 2)
            exit_load = rng.choice([0.5, 1.0, 1.0, 1.0, 2.0])
            profiles.append(f"{name},equity,{sub},{corpus},{inception},{expense},{exit_load}")
            if rng.random() < 0.85:
                ranks.append(f"{name},{rng.randint(1, 5)}")

    bench_navs = nav_path(1000.0, bench)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "funds.csv").write_text("name,date,nav\n" + "\n".join(fund_rows) + "\n")
    (args.out / "benchmark.csv").write_text(
        "date,nav\n" + "\n".join(f"{d},{v:.4f}" for d, v in zip(dates, bench_navs)) + "\n")
    (args.out / "profiles.csv").write_text(
        "name,category,sub_category,corpus_crore,inception_date,expense_ratio,exit_load\n"
        + "\n".join(profiles) + "\n")
    (args.out / "ranks.csv").write_text("name,rank\n" + "\n".join(ranks) + "\n")


if __name__ == "__main__":
    main()
