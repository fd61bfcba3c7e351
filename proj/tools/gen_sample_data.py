#!/usr/bin/env python3
"""Regenerates the bundled sample dataset (data/sample_*.csv).

The panel is synthetic: a monsoon-shaped monthly rainfall climatology with
lognormal year-to-year variation and occasional dry-month zeros, plus an
annual production series whose year-over-year changes carry a trend, mild
autocorrelation and a monsoon-rainfall effect. Magnitudes are chosen to look
like a state-level rice panel (production in thousand tonnes).

The seed is fixed; the checked-in CSVs are the canonical fixtures and tests
freeze statistics derived from them.
"""

import numpy as np

FIRST_YEAR = 1962
LAST_YEAR = 2020
SEED = 32  # chosen so the levels stay positive, the level series fails the
           # unit-root test and the differenced series clearly passes it

CLIM = np.array([6.0, 4.0, 9.0, 16.0, 42.0, 230.0, 450.0, 350.0, 180.0, 95.0, 28.0, 9.0])


def main() -> None:
    rng = np.random.default_rng(SEED)
    years = np.arange(FIRST_YEAR, LAST_YEAR + 1)
    n = len(years)

    rain = CLIM[None, :] * np.exp(rng.normal(0.0, 0.45, size=(n, 12)))
    dry = (CLIM[None, :] < 10.0) & (rng.uniform(size=(n, 12)) < 0.3)
    rain[dry] = 0.0
    rain = np.round(rain, 1)

    monsoon = rain[:, 5:9].sum(axis=1)
    monsoon_anom = np.log(monsoon / monsoon.mean())

    shocks = rng.normal(0.0, 430.0, size=n)
    diffs = np.empty(n - 1)
    for i in range(n - 1):
        diffs[i] = 35.0 + 250.0 * monsoon_anom[i + 1] + shocks[i + 1] + 0.3 * shocks[i]
    levels = np.empty(n)
    levels[0] = 1400.0
    levels[1:] = levels[0] + np.cumsum(diffs)
    levels = np.round(levels, 1)

    with open("data/sample_rainfall.csv", "w") as f:
        f.write("year,month,rainfall_mm\n")
        for i, year in enumerate(years):
            for m in range(12):
                f.write(f"{year},{m + 1},{rain[i, m]:.1f}\n")

    with open("data/sample_production.csv", "w") as f:
        f.write("year,production,thousand_tonnes\n")
        for i, year in enumerate(years):
            f.write(f"{year},{levels[i]:.1f}\n")

    print(f"wrote {n} years ({FIRST_YEAR}-{LAST_YEAR})")
    print(f"production: min {levels.min():.0f} max {levels.max():.0f} "
          f"diff sd {np.diff(levels).std():.0f}")


if __name__ == "__main__":
    main()
