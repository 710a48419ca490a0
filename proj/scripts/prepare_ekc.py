#!/usr/bin/env python3
"""Build data/ekc.csv from the Maddison Project Database and CDIAC national emissions.

Usage:
    prepare_ekc.py --mpd mpd2018.csv --cdiac nation.1751_2014.csv [--out data/ekc.csv]

The output has a `t` column (year) and, per country, y_<CODE> = log per-capita
CO2 and x_<CODE> = log per-capita real GDP, for 1870-2014.
"""

import argparse
import math
import sys

import pandas as pd

COUNTRIES = [
    # code, MPD countrycode, CDIAC nation
    ("AT", "AUT", "AUSTRIA"),
    ("BE", "BEL", "BELGIUM"),
    ("FI", "FIN", "FINLAND"),
    ("NL", "NLD", "NETHERLANDS"),
    ("CH", "CHE", "SWITZERLAND"),
    ("UK", "GBR", "UNITED KINGDOM"),
]

# Fossil-fuel carbon to carbon dioxide.
CARBON_TO_CO2 = 3.667
UNIT_SCALE = 1e6


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--mpd", required=True, help="Maddison Project Database CSV")
    p.add_argument("--cdiac", required=True, help="CDIAC national fossil-fuel emissions CSV")
    p.add_argument("--out", default="data/ekc.csv")
    p.add_argument("--first", type=int, default=1870)
    p.add_argument("--last", type=int, default=2014)
    p.add_argument("--gdp-column", default="cgdppc")
    p.add_argument("--pop-column", default="pop")
    p.add_argument("--emissions-column", default=None,
                   help="CDIAC total column (default: the first column starting with 'Total')")
    a = p.parse_args(argv)

    mpd = pd.read_csv(a.mpd)
    cdiac = pd.read_csv(a.cdiac, skiprows=lambda i: i in (1, 2, 3))
    cdiac.columns = [c.strip() for c in cdiac.columns]
    total = a.emissions_column or next(c for c in cdiac.columns if c.lower().startswith("total"))
    years = range(a.first, a.last + 1)
    out = pd.DataFrame({"t": list(years)})

    for code, mpd_code, nation in COUNTRIES:
        m = mpd[mpd["countrycode"] == mpd_code].set_index("year")
        c = cdiac[cdiac["Nation"].str.strip().str.upper() == nation].copy()
        c["Year"] = c["Year"].astype(int)
        c = c.set_index("Year")
        y, x = [], []
        for t in years:
            try:
                gdp = float(m.loc[t, a.gdp_column])
                pop = float(m.loc[t, a.pop_column])
                emis = float(c.loc[t, total])
            except (KeyError, ValueError):
                sys.exit(f"{code}: missing data for {t}")
            if not (gdp > 0 and pop > 0 and emis > 0):
                sys.exit(f"{code}: non-positive value in {t}")
            y.append(math.log(emis * CARBON_TO_CO2 * UNIT_SCALE / pop))
            x.append(math.log(gdp))
        out[f"y_{code}"] = y
        out[f"x_{code}"] = x

    out.to_csv(a.out, index=False, float_format="%.17g")
    print(f"wrote {a.out}: {len(out)} years, {len(COUNTRIES)} countries")


if __name__ == "__main__":
    main()
