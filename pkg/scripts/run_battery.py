"""Run the theorem check and the oracle comparison over the whole battery.

    python3 scripts/run_battery.py --resolutions 41 81 161 --out battery.csv
"""

import argparse
import csv
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from biconj import battery
from biconj.envelope import envelope_all
from biconj.theorem import Tolerances, theorem_verdict
from biconj.transform import auto_dual_grid, biconjugate


@dataclass
class Config:
    resolutions: list[int] = field(default_factory=lambda: [41, 81, 161])
    names: list[str] = field(default_factory=battery.names)
    lp: bool = True
    tol: Tolerances = field(default_factory=Tolerances)
    out: str | None = None


def run_one(name: str, n: int, cfg: Config) -> dict:
    f = battery.sampled(name, n)
    dual = auto_dual_grid(f)
    t0 = time.perf_counter()
    v = theorem_verdict(f, dual, cfg.tol)
    t_verdict = time.perf_counter() - t0
    row = {
        "name": name,
        "n": n,
        "dual": str(dual),
        "condition_i": v.condition_i,
        "condition_ii": v.condition_ii,
        "consistent": v.consistent,
        "witnesses": len(v.witnesses),
        "verdict_s": round(t_verdict, 2),
    }
    if cfg.lp:
        fss = biconjugate(f, dual).values
        t0 = time.perf_counter()
        env = np.array([r.value for r in envelope_all(f)])
        row["lp_s"] = round(time.perf_counter() - t0, 2)
        fin = np.isfinite(fss)
        row["oracle_max_rel_err"] = float(np.max(np.abs(env[fin] - fss[fin]) / (1 + np.abs(fss[fin]))))
    return row


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--resolutions", type=int, nargs="+", default=Config().resolutions)
    p.add_argument("--names", nargs="+", default=battery.names())
    p.add_argument("--no-lp", action="store_true", help="skip the moment-LP oracle")
    p.add_argument("--out")
    a = p.parse_args(argv)
    cfg = Config(a.resolutions, a.names, not a.no_lp, Tolerances(), a.out)
    rows = [run_one(nm, n, cfg) for nm in cfg.names for n in cfg.resolutions]
    fh = open(cfg.out, "w", newline="") if cfg.out else sys.stdout
    w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if cfg.out:
        fh.close()
    return 0 if all(r["consistent"] for r in rows) else 5


if __name__ == "__main__":
    sys.exit(main())
