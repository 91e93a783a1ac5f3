"""Battery of test functions stored as DSL text with golden samples.

Each ``<name>.fn`` file holds a header ``# dim=D grid=lo:hi:n[,lo:hi:n]``
naming the reference grid, then one expression. ``<name>.golden.csv`` holds
the expected samples on that reference grid.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..core import GridSpec, SampledFunction
from ..funcdsl import DSLError, Expr, free_vars, infer_dim, parse, sample

HERE = Path(__file__).parent
_HEADER = re.compile(r"#\s*dim=(\d)\s+grid=(\S+)")


@dataclass(frozen=True)
class FnFile:
    source: str
    expr: Expr
    dim: int
    grid: GridSpec | None  # reference grid, when the header names one


def read_fn(text: str) -> FnFile:
    """Parse the contents of a ``.fn`` file; the header line is optional."""
    dim = grid = None
    body = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("#"):
            m = _HEADER.match(stripped)
            if m:
                dim = int(m.group(1))
                grid = GridSpec.parse(m.group(2).split(","))
            continue
        if stripped:
            body.append(stripped)
    source = " ".join(body)
    expr = parse(source)
    inferred = infer_dim(expr)
    if dim is None:
        dim = inferred
    elif grid.dim != dim or (free_vars(expr) and inferred != dim):
        raise DSLError(f"header says dim={dim} but the expression or grid disagrees")
    return FnFile(source, expr, dim, grid)


def load_path(path: str | Path) -> FnFile:
    return read_fn(Path(path).read_text(encoding="utf-8"))


def names() -> list[str]:
    return sorted(p.stem for p in HERE.glob("*.fn"))


def load(name: str) -> FnFile:
    return load_path(HERE / f"{name}.fn")


def box_grid(fn: FnFile, n: int) -> GridSpec:
    """The reference box resampled with ``n`` nodes per axis."""
    return GridSpec.regular(*[(a.lo, a.hi, n) for a in fn.grid.axes])


def sampled(name: str, n: int) -> SampledFunction:
    fn = load(name)
    return sample(fn.expr, box_grid(fn, n))


def golden(name: str) -> tuple[np.ndarray, np.ndarray]:
    """Reference node coordinates and expected values."""
    with open(HERE / f"{name}.golden.csv", newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    data = np.array([[float(v) for v in r] for r in rows])
    return data[:, :-1], data[:, -1]
