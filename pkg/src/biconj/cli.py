"""Command-line entry point: ``python3 -m biconj.cli VERB [options]``.

Exit codes: 0 ok, 2 configuration or input error, 3 improper function
(+inf everywhere), 4 infeasible query, 5 the two theorem conditions disagree.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import battery
from .core import DiscreteMeasure, GridSpec, ImproperFunction, SampledFunction
from .envelope import (
    NegativeInput,
    concentration_check,
    envelope_all,
    envelope_lp,
    lsc_liminf_demo,
    staircase,
)
from .funcdsl import DSLError, infer_dim, parse, sample
from .simplex import Infeasible
from .theorem import Tolerances, theorem_verdict, tilted_argmin, uniqueness_scan
from .transform import DEFAULT_PAD, auto_dual_grid, biconjugate, conjugate

EXIT_OK, EXIT_CONFIG, EXIT_IMPROPER, EXIT_INFEASIBLE, EXIT_INCONSISTENT = 0, 2, 3, 4, 5
DEFAULT_GRID = "-2:2:81"

TABULAR = {"conj", "biconj", "envelope", "scan", "staircase"}
VERBS = ["conj", "biconj", "envelope", "originate", "tilt", "scan", "verify-theorem", "staircase", "demo-lsc"]


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    verb: str
    fn: str
    fn_file: str | None
    grid: list[str]
    dual: list[str]
    pad: float = DEFAULT_PAD
    eps_val: float = 1e-9
    eps_fy: float = 1e-9
    eps_aff: float = 1e-9
    kappa: float = 1.5
    method: str = "fast"
    format: str = "csv"
    out: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("eps_val", "eps_fy", "eps_aff"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0")
        if not self.kappa >= 1:
            raise ConfigError("kappa must be >= 1")
        if not self.pad >= 0:
            raise ConfigError("pad must be >= 0")

    @property
    def tolerances(self) -> Tolerances:
        return Tolerances(self.eps_val, self.eps_fy, self.eps_aff, self.kappa)


# ---------------------------------------------------------------- formatting


def fmt(v: float) -> str:
    """17 significant digits, ``inf`` for +inf; round-trips through float()."""
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return f"{float(v):.17g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else fmt(v)
    return obj


def dump_json(payload: dict) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def dump_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _table(cfg: RunConfig, header: list[str], rows: list[list]) -> str:
    if cfg.format == "json":
        return dump_json({"config": asdict(cfg), "columns": header, "rows": rows})
    return dump_csv(header, rows)


def _coords(grid: GridSpec, prefix: str) -> tuple[list[str], np.ndarray]:
    return [f"{prefix}{k + 1}" for k in range(grid.dim)], grid.points


# ------------------------------------------------------------------- set-up


def _axes(texts: Sequence[str], dim: int, what: str) -> GridSpec:
    texts = list(texts)
    if len(texts) == 1 and dim == 2:
        texts = texts * 2
    if len(texts) != dim:
        raise ConfigError(f"{what} needs {dim} axis spec(s), got {len(texts)}")
    try:
        return GridSpec.parse(texts)
    except ValueError as exc:
        raise ConfigError(f"{what}: {exc}") from None


def _point(text: str, dim: int, what: str) -> np.ndarray:
    try:
        p = np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise ConfigError(f"{what} must be comma-separated numbers") from None
    if p.size != dim:
        raise ConfigError(f"{what} needs {dim} coordinate(s)")
    return p


class Session:
    """Resolved function, primal grid and dual grid for one run."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        ref = None
        try:
            if cfg.fn_file is not None:
                fnf = battery.load_path(cfg.fn_file)
                expr, dim, ref = fnf.expr, fnf.dim, fnf.grid
            else:
                expr = parse(cfg.fn)
                dim = infer_dim(expr)
        except OSError as exc:
            raise ConfigError(f"cannot read function file: {exc}") from None
        if cfg.grid:
            self.grid = _axes(cfg.grid, dim, "--grid")
        elif ref is not None:
            self.grid = ref
        else:
            self.grid = _axes([DEFAULT_GRID], dim, "--grid")
        self.f: SampledFunction = sample(expr, self.grid)
        self._dual = None

    @property
    def dual(self) -> GridSpec:
        if self._dual is None:
            spec = self.cfg.dual or ["auto"]
            if spec[0].startswith("auto"):
                count = None
                if ":" in spec[0]:
                    try:
                        count = int(spec[0].split(":", 1)[1])
                    except ValueError:
                        raise ConfigError("--dual auto:COUNT needs an integer count") from None
                try:
                    self._dual = auto_dual_grid(self.f, count, self.cfg.pad)
                except ValueError as exc:
                    raise ConfigError(str(exc)) from None
            else:
                self._dual = _axes(spec, self.grid.dim, "--dual")
        return self._dual


# --------------------------------------------------------------------- verbs


def cmd_conj(s: Session) -> str:
    fstar = conjugate(s.f, s.dual, s.cfg.method)
    cols, pts = _coords(s.dual, "s")
    rows = [list(map(float, p)) + [float(v)] for p, v in zip(pts, fstar.values)]
    return _table(s.cfg, cols + ["fstar"], rows)


def cmd_biconj(s: Session) -> str:
    fss = biconjugate(s.f, s.dual, s.cfg.method)
    cols, pts = _coords(s.grid, "x")
    rows = [list(map(float, p)) + [float(a), float(b)] for p, a, b in zip(pts, s.f.values, fss.values)]
    return _table(s.cfg, cols + ["f", "fss"], rows)


def cmd_envelope(s: Session) -> str:
    cols, pts = _coords(s.grid, "x")
    rows = []
    for p, fv, res in zip(pts, s.f.values, envelope_all(s.f)):
        rows.append(list(map(float, p)) + [float(fv), float(res.value), len(res.measure) if res.optimal else 0])
    return _table(s.cfg, cols + ["f", "envelope", "atoms"], rows)


def cmd_originate(s: Session) -> str:
    if "at" not in s.cfg.extra:
        raise ConfigError("originate needs --at")
    x = _point(s.cfg.extra["at"], s.grid.dim, "--at")
    res = envelope_lp(s.f, x)
    if not res.optimal:
        raise Infeasible(f"{x.tolist()} is outside the hull of the finite nodes")
    fss = biconjugate(s.f, s.dual)
    near = s.grid.nearest(x)
    if res.slope is None:
        raise ConfigError("finite nodes do not span the grid; no supporting plane")
    slope = res.slope
    check = concentration_check(s.f, fss, res.measure, x, slope, s.cfg.eps_val, fss_x=res.value)
    atoms = [
        {
            "point": list(a.point),
            "weight": a.weight,
            "f": a.f,
            "fss": a.fss,
            "contact_gap": a.contact_gap,
            "affine_gap": a.affine_gap,
            "passed": a.passed,
        }
        for a in check.atoms
    ]
    return dump_json(
        {
            "config": asdict(s.cfg),
            "dual": str(s.dual),
            "query": x.tolist(),
            "value": res.value,
            "nearest_node": list(s.grid.node(near)),
            "fss_nearest": fss(near),
            "subgradient": slope.tolist(),
            "atoms": atoms,
            "concentration_ok": check.all_pass,
        }
    )


def cmd_tilt(s: Session) -> str:
    if "at" not in s.cfg.extra:
        raise ConfigError("tilt needs --at (a slope)")
    slope = _point(s.cfg.extra["at"], s.grid.dim, "--at")
    t = tilted_argmin(s.f, slope, s.cfg.eps_val)
    return dump_json(
        {
            "config": asdict(s.cfg),
            "slope": list(t.dual_node),
            "min_value": t.min_value,
            "minimizers": [list(s.grid.node(k)) for k in t.minimizer_nodes],
            "cluster_count": t.cluster_count,
            "diameter": t.diameter,
            "unique": t.diameter <= s.cfg.kappa * s.grid.h,
        }
    )


def cmd_scan(s: Session) -> str:
    rep = uniqueness_scan(s.f, s.dual, s.cfg.eps_val, s.cfg.kappa, s.cfg.method)
    cols, pts = _coords(s.dual, "s")
    rows = [
        list(map(float, p)) + [float(m), int(c), float(d)]
        for p, m, c, d in zip(pts, rep.min_values, rep.cluster_counts, rep.diameters)
    ]
    return _table(s.cfg, cols + ["min_value", "cluster_count", "diameter"], rows)


def cmd_verify_theorem(s: Session) -> tuple[str, int]:
    v = theorem_verdict(s.f, s.dual, s.cfg.tolerances, s.cfg.method)
    payload = {"config": asdict(s.cfg), "grid": str(s.grid), "verdict": v.to_dict(s.grid)}
    return dump_json(payload), EXIT_OK if v.consistent else EXIT_INCONSISTENT


def _int_extra(cfg: RunConfig, key: str, default: int) -> int:
    v = cfg.extra.get(key)
    return default if v is None else int(v)


def cmd_staircase(s: Session) -> str:
    m, N = _int_extra(s.cfg, "m", 1), _int_extra(s.cfg, "N", 8)
    if m < 0 or N < 1:
        raise ConfigError("need --m >= 0 and --N >= 1")
    psi_m = staircase(s.f, m, N)
    cols, pts = _coords(s.grid, "x")
    rows = [list(map(float, p)) + [float(a), float(b)] for p, a, b in zip(pts, s.f.values, psi_m.values)]
    return _table(s.cfg, cols + ["psi", "psi_m"], rows)


def cmd_demo_lsc(s: Session) -> str:
    """Measures ``(1 - t) delta_a + t delta_b`` with ``t = 2^-n``, converging to ``delta_a``.

    Dyadic weights keep every integral exact for constant data.
    """
    count = _int_extra(s.cfg, "count", 20)
    if not 1 <= count <= 50:
        raise ConfigError("--count must be between 1 and 50")
    at = s.cfg.extra.get("at")
    x = _point(at, s.grid.dim, "--at") if at else np.zeros(s.grid.dim)
    a = s.grid.nearest(x)
    ia = list(s.grid.unravel(a))
    ib = list(ia)
    ib[0] += 1 if ia[0] + 1 < s.grid.axes[0].count else -1
    pa, pb = s.grid.node(a), s.grid.node(s.grid.ravel(ib))
    mus = [DiscreteMeasure.from_atoms([(pa, 1 - 2.0**-n), (pb, 2.0**-n)]) for n in range(1, count + 1)]
    rep = lsc_liminf_demo(s.f, mus, DiscreteMeasure.dirac(pa))
    return dump_json(
        {
            "config": asdict(s.cfg),
            "limit_atom": list(pa),
            "moving_atom": list(pb),
            "integrals": rep.integrals,
            "liminf": rep.liminf,
            "limit_integral": rep.limit_integral,
            "holds": rep.holds,
        }
    )


COMMANDS: dict[str, Callable] = {
    "conj": cmd_conj,
    "biconj": cmd_biconj,
    "envelope": cmd_envelope,
    "originate": cmd_originate,
    "tilt": cmd_tilt,
    "scan": cmd_scan,
    "verify-theorem": cmd_verify_theorem,
    "staircase": cmd_staircase,
    "demo-lsc": cmd_demo_lsc,
}


# ------------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="biconj", description=__doc__.splitlines()[0])
    p.add_argument("verb", choices=VERBS)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--fn", help="function in the expression language")
    src.add_argument("--fn-file", help="file holding one expression, optional '# dim= grid=' header")
    p.add_argument("--grid", action="append", default=[], metavar="LO:HI:N",
                   help=f"primal axis, repeat per axis (default {DEFAULT_GRID})")
    p.add_argument("--dual", action="append", default=[], metavar="LO:HI:N|auto[:COUNT]",
                   help="dual axis, repeat per axis, or auto (default)")
    p.add_argument("--pad", type=float, default=DEFAULT_PAD)
    p.add_argument("--eps-val", type=float, default=1e-9)
    p.add_argument("--eps-fy", type=float, default=1e-9)
    p.add_argument("--eps-aff", type=float, default=1e-9)
    p.add_argument("--kappa", type=float, default=1.5)
    p.add_argument("--method", choices=["fast", "brute"], default="fast")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--at", help="query point or slope, comma-separated")
    p.add_argument("--m", type=int, help="staircase level")
    p.add_argument("--N", type=int, help="staircase layer count")
    p.add_argument("--count", type=int, help="length of the demo-lsc measure sequence")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    fmt_ = ns.format or ("csv" if ns.verb in TABULAR else "json")
    if fmt_ == "csv" and ns.verb not in TABULAR:
        raise ConfigError(f"{ns.verb} writes a JSON report; --format csv is not available")
    extra = {k: getattr(ns, k) for k in ("at", "m", "N", "count") if getattr(ns, k) is not None}
    fn = ns.fn
    if ns.fn_file is not None:
        try:
            fn = battery.load_path(ns.fn_file).source
        except OSError as exc:
            raise ConfigError(f"cannot read function file: {exc}") from None
    return RunConfig(
        verb=ns.verb,
        fn=fn,
        fn_file=ns.fn_file,
        grid=list(ns.grid),
        dual=list(ns.dual),
        pad=ns.pad,
        eps_val=ns.eps_val,
        eps_fy=ns.eps_fy,
        eps_aff=ns.eps_aff,
        kappa=ns.kappa,
        method=ns.method,
        format=fmt_,
        out=ns.out,
        extra=extra,
    )


_NEGATIVE = re.compile(r"^-[\d.]")


def _attach_negative_values(argv: Sequence[str]) -> list[str]:
    """Turn ``--grid -2:2:5`` into ``--grid=-2:2:5`` so argparse keeps the value."""
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEGATIVE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = _attach_negative_values(sys.argv[1:] if argv is None else argv)
    try:
        ns = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    code = EXIT_OK
    try:
        cfg = config_from_args(ns)
        result = COMMANDS[cfg.verb](Session(cfg))
        if isinstance(result, tuple):
            result, code = result
    except ImproperFunction as exc:
        print(f"biconj: improper function: {exc}", file=stderr)
        return EXIT_IMPROPER
    except Infeasible as exc:
        print(f"biconj: infeasible: {exc}", file=stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, DSLError, NegativeInput, ValueError) as exc:
        print(f"biconj: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_CONFIG
    if cfg.out:
        Path(cfg.out).write_text(result, encoding="utf-8")
    else:
        stdout.write(result)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
