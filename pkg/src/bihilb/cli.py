"""Command-line experiment runner.

Every subcommand builds a list of checks, runs them in parallel with seeds
derived from ``--seed``, writes a report and exits 0 iff all checks pass.
Exit status 1 means a check failed, 2 a usage or config error and 3 an I/O
error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import suites
from .report import Report, emit_report, run_checks

DEFAULT_OUT = "bihilb-out"
OUT_ENV = "BIHILB_OUT"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    suite: str
    seed: int = 0
    params: dict = field(default_factory=dict)
    out: str = DEFAULT_OUT
    fmt: str = "json"
    timestamps: bool = True

    def validate(self):
        if self.fmt not in ("json", "csv", "svg"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        for key, val in _walk(self.params):
            if key.startswith("tol") and not (isinstance(val, (int, float)) and val > 0):
                raise ConfigError(f"tolerance {key!r} must be a positive number")
        return self


def _walk(d):
    for k, v in d.items():
        if isinstance(v, dict):
            yield from _walk(v)
        else:
            yield k, v


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


# -- suites ------------------------------------------------------------------


def _nahm_plots(d, iso_zetas=suites.ZETA_SAMPLES):
    def plot(out):
        from . import nahm, plots

        iso = nahm.lax_isospectral(d, iso_zetas)
        return [
            plots.drift_svg(iso, Path(out) / "isospectral_drift.svg").name,
            plots.profiles_svg(d, Path(out) / "nahm_profiles.svg").name,
        ]

    return plot


def _quat_plot(params, seed):
    def plot(out):
        from . import plots
        from . import quatlin as ql

        t = ql.HermQuatTriple.random(np.random.default_rng(seed), int(params.get("n", 3)))
        xs, vals = ql.real_surface_slice(t, res=int(params.get("res", 61)))
        return [plots.heatmap_svg(xs, vals, Path(out) / "real_surface.svg").name]

    return plot


def suite_bipoisson_n2(params, seed):
    p = dict({"n": 2}, **params)
    return suites.bipoisson_checks(p) + suites.hilbchart_checks(p), None


def suite_quat_n3(params, seed):
    p = dict({"n": 3}, **params)
    return suites.quat_checks(p), _quat_plot(p, seed)


def suite_hk4(params, seed):
    return suites.hk4_checks(params), None


def suite_nahm_k2(params, seed):
    p = dict({"charge": 2, "translation": [0.3, 0.4, -0.2, 0.7]}, **params)
    d = suites.build_nahm(p)
    checks = (
        suites.nahm_run_checks(d, p)
        + suites.nahm_bivector_checks(d, suites.parse_pairs(p.get("pairs", "all")), p)
        + suites.nahm_potential_checks(d, p)
    )
    return checks, _nahm_plots(d)


SUITES = {
    "bipoisson-n2": suite_bipoisson_n2,
    "quat-spectral-n3": suite_quat_n3,
    "hk4": suite_hk4,
    "nahm-k2": suite_nahm_k2,
}


def run_suite(cfg: ExperimentConfig, checks=None, plotter=None) -> tuple:
    """Run a named suite (or prebuilt checks); returns (report, plotter)."""
    cfg.validate()
    if checks is None:
        if cfg.suite not in SUITES:
            raise ConfigError(f"unknown suite {cfg.suite!r}; choose from {sorted(SUITES)}")
        checks, plotter = SUITES[cfg.suite](cfg.params, cfg.seed)
    report = Report(cfg.suite, cfg.seed, cfg.params)
    report.results = run_checks(checks, cfg.seed)
    return report, plotter


# -- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="master seed (default 0)")
    common.add_argument("--out", help=f"output directory (else ${OUT_ENV}, else ./{DEFAULT_OUT})")
    common.add_argument("--format", dest="fmt", choices=("json", "csv", "svg"), help="report format")
    common.add_argument("--deterministic", action="store_true", help="omit timestamps and runtimes")

    ap = argparse.ArgumentParser(prog="bihilb", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("bipoisson-check", parents=[common], help="Schouten, Magri and Pfaffian checks")
    s.add_argument("--n", type=int)
    s.add_argument("--surface", choices=("plane", "cstar"))

    s = sub.add_parser("hilb-chart", parents=[common], help="chart and Pfaffian-polynomial checks")
    s.add_argument("--n", type=int)
    s.add_argument("--surface", choices=("plane", "cstar"))
    s.add_argument("--point", help="JSON file with {'q','p'} or {'roots','values'}")

    s = sub.add_parser("quat-spectral", parents=[common], help="quaternionic pencils and spectral curves")
    s.add_argument("--n", type=int)
    s.add_argument("--triple", help="JSON file with a quaternion-Hermitian triple")

    s = sub.add_parser("hk4-verify", parents=[common], help="hyper-Poisson tests on Gibbons-Hawking models")
    s.add_argument("--model", choices=("flat", "taubnut", "both"))
    s.add_argument("--mass", type=float)
    s.add_argument("--points", type=int)

    s = sub.add_parser("nahm-run", parents=[common], help="integrate Nahm data and certify it")
    s.add_argument("--charge", type=int, default=None)
    s.add_argument("--step", type=float)
    s.add_argument("--delta", type=float)
    s.add_argument("--shape", type=float)
    s.add_argument("--translation", type=float, nargs=4)

    s = sub.add_parser("nahm-bivector", parents=[common], help="evaluate the hyper-Poisson 2-form")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--pairs", default="all", help="e.g. phase:translation1,translation2:translation3")

    s = sub.add_parser("nahm-potential", parents=[common], help="potential and contraction identity")
    s.add_argument("--in", dest="infile", required=True)

    s = sub.add_parser("suite", parents=[common], help="run a named suite")
    s.add_argument("name", help=f"one of {', '.join(SUITES)}")
    return ap


def _config_from_args(args) -> ExperimentConfig:
    raw = load_config(args.config) if args.config else {}
    params = dict(raw.get("params", {}))
    for key in ("n", "surface", "model", "mass", "points", "charge", "step", "delta", "shape", "translation", "pairs"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    out = args.out or os.environ.get(OUT_ENV) or raw.get("out") or DEFAULT_OUT
    seed = args.seed if args.seed is not None else raw.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    suite = args.name if args.command == "suite" else args.command
    return ExperimentConfig(
        suite=suite,
        seed=seed,
        params=params,
        out=str(out),
        fmt=args.fmt or raw.get("format", "json"),
        timestamps=not (args.deterministic or raw.get("deterministic", False)),
    )


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc


def _load_nahm(path):
    from .nahm import NahmData

    try:
        return NahmData.from_json(_read_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path} is not a Nahm data file: {exc}") from exc


def _hilb_table(cfg, point_file):
    from . import hilbchart as hc

    d = _read_json(point_file)
    c = lambda v: np.array([complex(*x) if isinstance(x, list) else complex(x) for x in v])  # noqa: E731
    if "q" in d:
        t = hc.TransversePoint(c(d["q"]), c(d["p"]))
    else:
        t = hc.roots_to_coeffs(hc.RootChartPoint(c(d["roots"]), c(d["values"])))
    p1, p2 = hc.pushforward_bivectors_qp(t, cfg.params.get("surface", "plane"))
    mu = hc.pfaffian_polynomial_numeric(p1, p2)
    print(f"{'power':>5}  {'q coefficient':>28}  {'Pfaffian coefficient':>28}  {'|diff|':>9}")
    for j, (a, b) in enumerate(zip(t.q, mu)):
        print(f"{t.n - j:>5}  {a:>28.12g}  {b:>28.12g}  {abs(a - b):9.2e}")


def _quat_triple_checks(cfg, triple_file):
    from . import quatlin as ql
    from .report import Check

    try:
        t = ql.HermQuatTriple.from_json(_read_json(triple_file))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{triple_file}: {exc}") from exc
    curve = ql.spectral_curve(ql.pencil_build(t))
    Path(cfg.out).mkdir(parents=True, exist_ok=True)
    (Path(cfg.out) / "curve.json").write_text(json.dumps(curve.to_json(), indent=1) + "\n")
    pen = ql.pencil_build(t)

    def det_sq(rng):
        r = ql.char_vs_square_residual(pen, curve, ql.sample_grid(rng, 25))
        return r, r <= 1e-8, {"n": t.n}, "curve written to curve.json"

    def reality(rng):
        r = curve.reality_residual(rng.normal(size=10) + 1j * rng.normal(size=10))
        return r, r <= 1e-8, {"n": t.n}, ""

    return [Check("input_det_equals_p_squared", det_sq, 1e-8), Check("input_reality", reality, 1e-8)]


def _user_pair_checks(cfg):
    from . import bipoisson as bp
    from .report import Check
    from .symcore import parse_poly

    spec = cfg.params["bivectors"]
    coords = tuple(spec["coords"])
    try:
        chart = bp.Chart(coords)
        P, Q = (
            bp.PolyBivector.from_entries(
                chart, [(i, j, parse_poly(str(e), coords)) for i, row in enumerate(spec[key]) for j, e in enumerate(row) if i < j]
            )
            for key in ("P", "Q")
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad bivector definition: {exc}") from exc

    def verdict(_rng):
        v = bp.is_poisson_pair(P, Q)
        bad = sum(not x for x in v.as_dict().values())
        return bad, bad == 0, {"coords": list(coords)}, str(v.as_dict())

    return [Check("input_pair_poisson", verdict, 0)]


def _dispatch(cfg: ExperimentConfig, args):
    cmd = args.command
    p = cfg.params
    if cmd == "suite":
        return run_suite(cfg)
    if cmd == "bipoisson-check":
        checks = suites.bipoisson_checks(p)
        if "bivectors" in p:
            checks = _user_pair_checks(cfg) + checks
        return run_suite(cfg, checks)
    if cmd == "hilb-chart":
        if args.point:
            _hilb_table(cfg, args.point)
        return run_suite(cfg, suites.hilbchart_checks(p))
    if cmd == "quat-spectral":
        checks = suites.quat_checks(p)
        if args.triple:
            checks = _quat_triple_checks(cfg, args.triple) + checks
        return run_suite(cfg, checks, _quat_plot(p, cfg.seed))
    if cmd == "hk4-verify":
        model = p.get("model") or "both"
        if model != "both":
            p["models"] = [{"V": model, "mass": p.get("mass", 1.0)}]
        return run_suite(cfg, suites.hk4_checks(p))
    if cmd == "nahm-run":
        d = suites.build_nahm(p)
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        target = Path(cfg.out) / f"nahm_k{d.k}.json"
        try:
            d.save(target)
        except OSError as exc:
            raise OSError(f"cannot write {target}: {exc}") from exc
        report, plot = run_suite(cfg, suites.nahm_run_checks(d, p), _nahm_plots(d))
        report.artifacts["data"] = target.name
        return report, plot
    if cmd == "nahm-bivector":
        d = _load_nahm(args.infile)
        return run_suite(cfg, suites.nahm_bivector_checks(d, suites.parse_pairs(args.pairs), p))
    if cmd == "nahm-potential":
        d = _load_nahm(args.infile)
        return run_suite(cfg, suites.nahm_potential_checks(d, p))
    raise ConfigError(f"unknown command {cmd!r}")


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.command == "suite" and args.name not in SUITES:
            ap.error(f"unknown suite {args.name!r}; choose from {', '.join(SUITES)}")
        report, plot = _dispatch(cfg, args)
        if cfg.fmt == "svg" and plot is not None:
            Path(cfg.out).mkdir(parents=True, exist_ok=True)
            report.artifacts["svg"] = plot(cfg.out)
        paths = emit_report(report, cfg.out, cfg.fmt, cfg.timestamps)
    except ConfigError as exc:
        ap.error(str(exc))
    except OSError as exc:
        print(f"bihilb: error: {exc}", file=sys.stderr)
        return 3
    for r in report.results:
        tag = "PASS" if r.passed else "FAIL"
        extra = "" if r.passed else f"  (seed {r.seed}, stream {r.stream})"
        print(f"{tag}  {r.name:<44} residual {r.residual:.3e}  tol {r.tolerance:.1e}{extra}")
    s = report.summary()
    print(f"{s['passed']}/{s['total']} checks passed; report: {', '.join(str(p) for p in paths)}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
