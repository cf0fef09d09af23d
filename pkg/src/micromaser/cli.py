"""Command line sweeps with deterministic CSV / NDJSON output.

A configuration is a list of ``key = value`` lines::

    command = order-scan
    a = 1
    nb = 0.15
    theta = 0.1:20:0.01
    N = 1000

Any numeric key may be given as an inclusive grid ``start:stop:step``. Rows
are written in grid order whatever the number of worker threads, so the
output is byte-identical across runs.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .core import MaserParams, moments, stationary_distribution
from .correlation import (exact_correlation, xi_ansatz_E, xi_master_M, xi_mean_field_at,
                          xi_sumrule)
from .errors import ConfigError, DomainError, MicromaserError
from .phase import classify, phase_diagram, thermal_mean_profile
from .potential import enumerate_saddles
from .trapping import x_of_trapping

__all__ = ["SweepConfig", "parse_config", "config_from_output", "run", "main", "COMMANDS"]

COMMANDS = (
    "order-scan", "potential-branches", "phase-diagram", "thermal-profile", "order-vs-a",
    "correlation-scan", "correlation-compare", "trapping-scan", "sumrule-check",
)

# Canonical key -> accepted spellings.
_ALIASES = {
    "a": ("a",),
    "nb": ("nb", "n_b"),
    "delta": ("delta", "Delta"),
    "theta": ("theta",),
    "N": ("N",),
}
_NUMERIC = tuple(_ALIASES)
_KEY_OF = {alias: key for key, names in _ALIASES.items() for alias in names}
_DEFAULTS = {"a": 1.0, "nb": 0.15, "delta": 0.0, "theta": 1.0, "N": 100.0}

# The variable swept innermost by each command (a grid is required for it).
_PRIMARY = {c: "theta" for c in COMMANDS}
_PRIMARY["order-vs-a"] = "a"
_PRIMARY["phase-diagram"] = "a"
_DEFAULT_A_GRID = (0.5, 1.0, 0.002)

EXIT_OK, EXIT_PARSE, EXIT_NUMERIC = 0, 2, 3


@dataclass(frozen=True)
class SweepConfig:
    """Validated sweep description.

    ``values`` holds the fixed scalar parameters, ``grids`` the swept ones as
    ``(name, (start, stop, step))`` pairs in canonical key order.
    """

    command: str
    values: tuple = ()
    grids: tuple = ()
    kmax: int = 3
    output: str = "-"
    format: str = "csv"

    def value(self, key: str) -> float:
        return dict(self.values).get(key, _DEFAULTS[key])

    def grid(self, key: str):
        return dict(self.grids).get(key)

    def to_text(self) -> str:
        """Config text that parses back to this object."""
        lines = [f"command = {self.command}"]
        fixed, grids = dict(self.values), dict(self.grids)
        for key in _NUMERIC:
            if key in grids:
                lines.append(f"{key} = " + ":".join(repr(v) for v in grids[key]))
            elif key in fixed:
                lines.append(f"{key} = {fixed[key]!r}")
        lines += [f"kmax = {self.kmax}", f"output = {self.output}", f"format = {self.format}"]
        return "\n".join(lines) + "\n"


def grid_values(spec: tuple[float, float, float]) -> np.ndarray:
    """Points of an inclusive grid; ``stop`` is kept if within half a step."""
    start, stop, step = spec
    n = int(math.floor((stop - start) / step + 0.5))
    return np.round(start + step * np.arange(n + 1), 12)


def _number(text: str, line: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"malformed number {text!r}", line) from None
    if not math.isfinite(v):
        raise ConfigError(f"non-finite number {text!r}", line)
    return v


def parse_config(text: str) -> SweepConfig:
    """Parse ``key = value`` lines into a :class:`SweepConfig`.

    Raises
    ------
    ConfigError
        Unknown or repeated key, malformed number or grid, missing command,
        or a command/grid combination that does not make sense.
    """
    seen: dict[str, int] = {}
    values: dict[str, float] = {}
    grids: dict[str, tuple] = {}
    opts = {"kmax": 3, "output": "-", "format": "csv"}
    command = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        name, val = (s.strip() for s in line.split("=", 1))
        key = _KEY_OF.get(name, name)
        if key in seen:
            raise ConfigError(f"duplicate key {name!r} (first on line {seen[key]})", lineno)
        seen[key] = lineno
        if key == "command":
            if val not in COMMANDS:
                raise ConfigError(f"unknown command {val!r}", lineno)
            command = val
        elif key in _NUMERIC:
            if ":" in val:
                parts = val.split(":")
                if len(parts) != 3:
                    raise ConfigError(f"grid must be start:stop:step, got {val!r}", lineno)
                start, stop, step = (_number(p, lineno) for p in parts)
                if step <= 0:
                    raise ConfigError("grid step must be positive", lineno)
                if stop < start:
                    raise ConfigError(f"grid stop {stop} is below start {start}", lineno)
                grids[key] = (start, stop, step)
            else:
                values[key] = _number(val, lineno)
        elif key == "kmax":
            try:
                opts["kmax"] = int(val)
            except ValueError:
                raise ConfigError(f"kmax must be an integer, got {val!r}", lineno) from None
            if opts["kmax"] < 0:
                raise ConfigError("kmax must be non-negative", lineno)
        elif key == "output":
            opts["output"] = val or "-"
        elif key == "format":
            if val not in ("csv", "ndjson"):
                raise ConfigError(f"format must be csv or ndjson, got {val!r}", lineno)
            opts["format"] = val
        else:
            raise ConfigError(f"unknown key {name!r}", lineno)
    if command is None:
        raise ConfigError("missing 'command'", None)

    primary = _PRIMARY[command]
    if command == "phase-diagram":
        extra = sorted(set(grids) - {"a"})
        if extra:
            raise ConfigError(f"phase-diagram sweeps only 'a', not {extra}", seen[extra[0]])
        grids.setdefault("a", _DEFAULT_A_GRID)
    if primary not in grids:
        raise ConfigError(f"{command} needs a grid for {primary!r}", seen.get(primary))
    if len(grids) > 2:
        raise ConfigError("at most two swept variables are allowed", None)
    _validate_params({**_DEFAULTS, **values}, grids)
    order = {k: i for i, k in enumerate(_NUMERIC)}
    return SweepConfig(
        command=command,
        values=tuple(sorted(values.items(), key=lambda kv: order[kv[0]])),
        grids=tuple(sorted(grids.items(), key=lambda kv: order[kv[0]])),
        kmax=opts["kmax"], output=opts["output"], format=opts["format"],
    )


def _validate_params(values: dict, grids: dict) -> None:
    corners = {k: (g[0], g[1]) for k, g in grids.items()}
    for combo in itertools.product(*corners.values()):
        p = dict(values)
        p.update(zip(corners, combo))
        try:
            _params(p)
        except ValueError as exc:
            raise ConfigError(str(exc), None) from None


def config_from_output(text: str) -> SweepConfig:
    """Recover the config from the ``# key = value`` header of an output file."""
    lines = []
    for line in text.splitlines():
        if line.startswith("{"):
            meta = json.loads(line).get("meta")
            if meta is not None:
                return parse_config(meta["config"])
        if line.startswith("# ") and " = " in line:
            lines.append(line[2:])
    return parse_config("\n".join(lines))


def _params(p: dict) -> MaserParams:
    return MaserParams(a=p["a"], n_b=p["nb"], Delta=p["delta"], theta=p["theta"], N=p["N"])


# -- per-command evaluation ----------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    if v is None:
        return ""
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(format(float(v), ".12g")) if math.isfinite(v) else None
    return v


class _Row(dict):
    """A result row; ``failed`` marks numeric failures (as opposed to out-of-domain values)."""

    failed = False


def _soft(fn):
    """Value of ``fn()``, ``nan`` when the approximation is out of its domain."""
    try:
        return fn()
    except DomainError:
        return math.nan


def _order_cols(p: MaserParams) -> dict:
    m = moments(stationary_distribution(p))
    pp = classify(p)
    return {
        "x_mean": m.mean / p.N,
        "x_std": math.sqrt(max(m.variance, 0.0)) / p.N,
        "phase": pp.phase,
        "branch": "" if pp.branch is None else pp.branch,
        "v0": pp.v0_min,
        "x_mf": pp.order_parameter,
    }


def _row_order_scan(p, cfg):
    c = _order_cols(p)
    del c["x_mf"]
    return [c]


def _row_order_vs_a(p, cfg):
    return [_order_cols(p)]


def _row_potential(p, cfg):
    rows = []
    for s in enumerate_saddles(p):
        rows.append({"branch": s.branch_k, "kind": s.kind, "phi": s.phi, "x": s.x,
                     "v0": s.V0, "curvature": s.curvature})
    return rows


def _row_thermal(p, cfg):
    prof = thermal_mean_profile(p.a, p.n_b, p.Delta, [p.theta])
    return [{"mean_n": float(prof.mean_n[0]), "valid": bool(prof.valid[0])}]


def _row_corr(p, cfg):
    r = exact_correlation(p)
    return [{"lambda_nz": r.lambda_nz, "gamma_xi_exact": r.xi, "log_gamma_xi_exact": r.log_xi,
             "flag": r.flag or ""}]


def _row_compare(p, cfg):
    r = exact_correlation(p)
    m = xi_master_M(p)
    return [{
        "gamma_xi_exact": r.xi,
        "log_gamma_xi_exact": r.log_xi,
        "gamma_xi_E": _soft(lambda: xi_ansatz_E(p).xi),
        "gamma_xi_M": m.xi,
        "m_valid": m.valid,
        "gamma_xi_MF": _soft(lambda: xi_mean_field_at(p)),
    }]


def _row_trapping(p, cfg):
    m = moments(stationary_distribution(p))
    row = {"x_mean": m.mean / p.N, "x_std": math.sqrt(max(m.variance, 0.0)) / p.N}
    mf = {k: math.nan for k in range(cfg.kmax + 1)}
    for s in enumerate_saddles(p, with_potential=False):
        if s.is_minimum and s.branch_k in mf:
            mf[s.branch_k] = s.x
    for k in range(cfg.kmax + 1):
        row[f"x_mf_{k}"] = mf[k]
    for k in range(1, cfg.kmax + 1):
        row[f"x_trap_{k}"] = x_of_trapping(p.theta, p.Delta, k)
    return [row]


def _row_sumrule(p, cfg):
    ex = exact_correlation(p)
    sr = xi_sumrule(p)
    rel = abs(sr.xi - ex.xi) / ex.xi if math.isfinite(ex.xi) and ex.xi > 0 else math.nan
    return [{"gamma_xi_exact": ex.xi, "gamma_xi_sumrule": sr.xi, "rel_diff": rel}]


_ROWS = {
    "order-scan": _row_order_scan,
    "order-vs-a": _row_order_vs_a,
    "potential-branches": _row_potential,
    "thermal-profile": _row_thermal,
    "correlation-scan": _row_corr,
    "correlation-compare": _row_compare,
    "trapping-scan": _row_trapping,
    "sumrule-check": _row_sumrule,
}

# Columns known up front so failed rows can be filled with nan.
_COLUMNS = {
    "order-scan": ["x_mean", "x_std", "phase", "branch", "v0"],
    "order-vs-a": ["x_mean", "x_std", "phase", "branch", "v0", "x_mf"],
    "potential-branches": ["branch", "kind", "phi", "x", "v0", "curvature"],
    "thermal-profile": ["mean_n", "valid"],
    "correlation-scan": ["lambda_nz", "gamma_xi_exact", "log_gamma_xi_exact", "flag"],
    "correlation-compare": ["gamma_xi_exact", "log_gamma_xi_exact", "gamma_xi_E",
                            "gamma_xi_M", "m_valid", "gamma_xi_MF"],
    "sumrule-check": ["gamma_xi_exact", "gamma_xi_sumrule", "rel_diff"],
}


def _columns(cfg: SweepConfig) -> list[str]:
    if cfg.command == "trapping-scan":
        return (["x_mean", "x_std"] + [f"x_mf_{k}" for k in range(cfg.kmax + 1)]
                + [f"x_trap_{k}" for k in range(1, cfg.kmax + 1)])
    return _COLUMNS[cfg.command]


def _points(cfg: SweepConfig) -> list[dict]:
    """Parameter dicts in grid order; the command's primary variable varies fastest."""
    base = {**_DEFAULTS, **dict(cfg.values)}
    primary = _PRIMARY[cfg.command]
    names = [k for k, _ in cfg.grids if k != primary] + [primary]
    axes = [grid_values(cfg.grid(k)) for k in names]
    out = []
    for combo in itertools.product(*axes):
        p = dict(base)
        p.update({k: float(v) for k, v in zip(names, combo)})
        out.append(p)
    return out


def _evaluate(cfg: SweepConfig, p: dict) -> list[_Row]:
    keys = {"theta": p["theta"], "a": p["a"], "nb": p["nb"], "delta": p["delta"], "N": p["N"]}
    try:
        with np.errstate(all="ignore"):
            rows = _ROWS[cfg.command](_params(p), cfg)
        return [_Row({**keys, **r}) for r in rows]
    except (MicromaserError, ArithmeticError, ValueError):
        row = _Row({**keys, **{c: math.nan for c in _columns(cfg)}})
        row.failed = True
        return [row]


def _phase_diagram_rows(cfg: SweepConfig) -> list[_Row]:
    a_grid = grid_values(cfg.grid("a"))
    nb, delta = cfg.value("nb"), cfg.value("delta")
    try:
        d = phase_diagram(nb, delta, a_grid=a_grid, k_max=cfg.kmax)
    except (MicromaserError, ArithmeticError, ValueError):
        row = _Row({"kind": "nan", "k": "", "a": math.nan, "theta": math.nan, "residual": math.nan})
        row.failed = True
        return [row]
    rows = []
    for b in list(d.boundaries) + list(d.validity):
        for (th, a), res in zip(b.points, b.residuals):
            rows.append(_Row({"kind": b.kind, "k": "" if b.k is None else b.k,
                              "a": a, "theta": th, "residual": res}))
    for tp in d.triple_points:
        rows.append(_Row({"kind": "triple_point", "k": tp.k, "a": tp.a, "theta": tp.theta,
                          "residual": tp.residual}))
    return rows


def workers_from_env(default: int | None = None) -> int:
    """Worker count, capped by ``MICROMASER_THREADS`` when set."""
    n = default or os.cpu_count() or 1
    cap = os.environ.get("MICROMASER_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, n)


@dataclass
class RunResult:
    status: int
    rows: list = field(default_factory=list)
    columns: list = field(default_factory=list)
    failures: int = 0
    text: str = ""


def run(config: SweepConfig, workers: int | None = None) -> RunResult:
    """Evaluate the sweep and render it; writes ``config.output`` unless it is ``-``."""
    if config.command == "phase-diagram":
        rows = _phase_diagram_rows(config)
        columns = ["kind", "k", "a", "theta", "residual"]
    else:
        pts = _points(config)
        n = workers_from_env(workers)
        if n > 1 and len(pts) > 1:
            with ThreadPoolExecutor(n) as ex:
                chunks = list(ex.map(lambda p: _evaluate(config, p), pts))
        else:
            chunks = [_evaluate(config, p) for p in pts]
        rows = [r for chunk in chunks for r in chunk]
        columns = ["theta", "a", "nb", "delta", "N"] + _columns(config)
    failures = sum(r.failed for r in rows)
    text = _render(config, rows, columns)
    if config.output != "-":
        with open(config.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return RunResult(EXIT_NUMERIC if failures else EXIT_OK, rows, columns, failures, text)


def _render(cfg: SweepConfig, rows: list, columns: list) -> str:
    buf = io.StringIO()
    if cfg.format == "ndjson":
        meta = {"version": __version__, "config": cfg.to_text(), "columns": columns}
        buf.write(json.dumps({"meta": meta}, sort_keys=True) + "\n")
        for r in rows:
            buf.write(json.dumps({c: _json_value(r.get(c)) for c in columns}) + "\n")
        return buf.getvalue()
    buf.write(f"# micromaser version {__version__}\n")
    for line in cfg.to_text().splitlines():
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="micromaser", description="Micromaser parameter sweeps.")
    ap.add_argument("config", help="configuration file ('-' for stdin)")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override a config entry (repeatable)")
    ap.add_argument("--version", action="version", version=f"micromaser {__version__}")
    args = ap.parse_args(argv)
    try:
        if args.config == "-":
            text = sys.stdin.read()
        else:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        print(f"micromaser: cannot read config: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        cfg = parse_config(_apply_overrides(text, args.set))
    except ConfigError as exc:
        print(f"micromaser: {exc}", file=sys.stderr)
        return EXIT_PARSE
    result = run(cfg)
    if cfg.output == "-":
        sys.stdout.write(result.text)
    if result.failures:
        print(f"micromaser: {result.failures} of {len(result.rows)} rows failed numerically",
              file=sys.stderr)
    return result.status


def _apply_overrides(text: str, overrides: list[str]) -> str:
    """Replace (or append) config lines for each ``KEY=VALUE`` override."""
    if not overrides:
        return text
    lines = text.splitlines()
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}", None)
        name, val = (s.strip() for s in item.split("=", 1))
        key = _KEY_OF.get(name, name)
        kept = []
        for line in lines:
            body = line.split("#", 1)[0]
            if "=" in body and _KEY_OF.get(body.split("=", 1)[0].strip(),
                                           body.split("=", 1)[0].strip()) == key:
                continue
            kept.append(line)
        lines = kept + [f"{name} = {val}"]
    return "\n".join(lines) + "\n"


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
