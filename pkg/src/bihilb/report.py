"""Check records, parallel execution with derived seeds, and report emission."""
from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import numpy as np

CSV_COLUMNS = ("name", "passed", "residual", "tolerance", "seed", "stream", "inputs_digest", "runtime_s", "detail")


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    seed: int
    stream: int = 0
    inputs: dict = field(default_factory=dict)
    detail: str = ""
    runtime_s: float = 0.0

    @property
    def inputs_digest(self) -> str:
        blob = json.dumps(to_plain(self.inputs), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def as_dict(self, timings: bool = True) -> dict:
        out = {
            "name": self.name,
            "passed": bool(self.passed),
            "residual": _num(self.residual),
            "tolerance": _num(self.tolerance),
            "seed": int(self.seed),
            "stream": int(self.stream),
            "inputs_digest": self.inputs_digest,
            "detail": self.detail,
        }
        if timings:
            out["runtime_s"] = round(self.runtime_s, 6)
        return out


@dataclass
class Check:
    """A named check; ``fn(rng)`` returns (residual, passed, inputs, detail)."""

    name: str
    fn: Callable
    tolerance: float


@dataclass
class Report:
    suite: str
    seed: int
    config: dict = field(default_factory=dict)
    results: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def summary(self) -> dict:
        n_pass = sum(r.passed for r in self.results)
        return {"total": len(self.results), "passed": n_pass, "failed": len(self.results) - n_pass}

    def as_dict(self, timestamps: bool = True) -> dict:
        out = {
            "suite": self.suite,
            "seed": int(self.seed),
            "config": to_plain(self.config),
            "checks": [r.as_dict(timings=timestamps) for r in self.results],
            "summary": self.summary(),
            "artifacts": to_plain(self.artifacts),
        }
        if timestamps:
            out["created"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return out


def check_rng(seed: int, stream: int) -> np.random.Generator:
    """The generator handed to check number ``stream`` under a master seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))


def run_checks(checks, seed: int, workers: int | None = None) -> list:
    """Run checks in parallel; check i draws from its own stream derived from
    the master seed, so results do not depend on scheduling."""

    def one(pair):
        i, chk = pair
        rng = check_rng(seed, i)
        t0 = time.perf_counter()
        try:
            residual, passed, inputs, detail = chk.fn(rng)
        except Exception as exc:  # a crashing check is a failed check
            residual, passed, inputs, detail = math.inf, False, {}, f"{type(exc).__name__}: {exc}"
        return CheckResult(
            chk.name, bool(passed), float(residual), chk.tolerance, seed, i, inputs, detail,
            time.perf_counter() - t0,
        )

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, enumerate(checks)))


def to_plain(x):
    if isinstance(x, dict):
        return {str(k): to_plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return to_plain(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [_num(x.real), _num(x.imag)]
    if isinstance(x, (np.floating, float)):
        return _num(float(x))
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _num(v):
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def emit_report(report: Report, out_dir, fmt: str = "json", timestamps: bool = True) -> list:
    """Write the report; returns the written paths.

    json: report.json.  csv: report.csv with ``CSV_COLUMNS``.  svg: report.json
    plus any SVG figures already registered in ``report.artifacts``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    paths = []
    if fmt in ("json", "svg"):
        p = out / "report.json"
        _write(p, json.dumps(report.as_dict(timestamps), indent=2, sort_keys=False) + "\n")
        paths.append(p)
    elif fmt == "csv":
        p = out / "report.csv"
        try:
            with open(p, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(CSV_COLUMNS)
                for r in report.results:
                    d = r.as_dict()
                    w.writerow([d["name"], d["passed"], d["residual"], d["tolerance"], d["seed"], d["stream"],
                                d["inputs_digest"], d["runtime_s"] if timestamps else "", d["detail"]])
        except OSError as exc:
            raise OSError(f"cannot write {p}: {exc}") from exc
        paths.append(p)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if fmt == "svg":
        paths += [out / name for name in report.artifacts.get("svg", [])]
    return paths


def _write(path: Path, text: str):
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
