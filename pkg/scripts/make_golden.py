"""Write golden samples for the battery from plain numpy lambdas.

The lambdas are written independently of the DSL so the golden files check
the parser and evaluator rather than echo them.
"""

import csv
import itertools
from pathlib import Path

import numpy as np

from biconj import battery

INF = np.inf

ORACLES = {
    "square": lambda x: x**2,
    "abs": lambda x: abs(x),
    "double_well": lambda x: (x**2 - 1) ** 2,
    "quartic": lambda x: x**4 - x**2,
    "dip": lambda x: x**2 + (1.0 if x == 0 else 0.0),
    "square_ind": lambda x: x**2 if -1 <= x <= 1 else INF,
    "zero": lambda x: 0.0,
    "bowl": lambda x1, x2: x1**2 + x2**2,
    "degenerate": lambda x1, x2: x1**2,
    "double_well_2d": lambda x1, x2: (x1**2 - 1) ** 2 + x2**2,
}


def fmt(v: float) -> str:
    return "inf" if v == INF else f"{v:.17g}"


def main():
    for name in battery.names():
        fn = battery.load(name)
        axes = [np.linspace(a.lo, a.hi, a.count) for a in fn.grid.axes]
        cols = [f"x{k + 1}" for k in range(fn.dim)] + ["f"]
        out = Path(battery.HERE) / f"{name}.golden.csv"
        with open(out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for pt in itertools.product(*axes):
                w.writerow([fmt(float(p)) for p in pt] + [fmt(float(ORACLES[name](*pt)))])
        print(out)


if __name__ == "__main__":
    main()
