"""Command-line entry point.

    wavereg <command> [--config FILE] [--key value ...]

Commands: axioms, scan, kernel, wavefront, weyl, first-order,
compare-mollifier, zoo-list.  Every run writes ``report.json`` and the CSV
tables behind its verdicts to the output directory (``--output-dir``, else
``$REG_OUTPUT_DIR``, else ``./wavereg-out``).

Exit status: 0 when every requested check passes, 1 when one fails, 2 on a
malformed configuration or an input the numerics cannot honour.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import classify, fit_slope, run_scan
from .config import ExperimentConfig, load_config, parse_overrides, write_template
from .errors import ConfigError, InsufficientDataError, WaveregError
from .filters import CutoffSpec, FilterSpec, effective_multiplier
from .harness import (CheckResult, FirstOrderOperator, check_support, check_wavefront,
                      compare_mollifier, flagship_process, heat_process, sharp_process,
                      verify_axioms, verify_cutoff_independence, verify_first_order, verify_weyl)
from .io import grid_function_csv, multiplier_csv, scan_csv, write_csv, write_json
from .manifold import ManifoldModel
from .regularizer import kernel_section, mass_outside, wave_snapshot
from .zoo import make_distribution, zoo_listing

COMMANDS = ("axioms", "scan", "kernel", "wavefront", "weyl", "first-order",
            "compare-mollifier", "zoo-list")
SCHEMA = 1


class Run:
    """Collects check results and artifacts for one command."""

    def __init__(self, command: str, cfg: ExperimentConfig, out: Path):
        self.command = command
        self.cfg = cfg
        self.out = out
        self.checks: dict = {}
        self.artifacts: dict = {}
        self.extra: dict = {}

    def add(self, res: CheckResult, key: str | None = None):
        key = key or res.id
        self.checks[key] = res
        self.artifacts.setdefault(key, [])

    def artifact(self, key: str, path: Path):
        self.artifacts.setdefault(key, []).append(str(Path(path).relative_to(self.out)))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def report(self, started: str, finished: str) -> dict:
        checks = {}
        for key in sorted(self.checks):
            c = self.checks[key].as_dict()
            checks[key] = {"name": c["name"], "verdict": c["verdict"], "metrics": c["metrics"],
                           "tables": c["tables"], "artifacts": sorted(self.artifacts.get(key, []))}
        cfg = self.cfg.as_dict()
        cfg.pop("output_dir", None)
        return {
            "schema": SCHEMA,
            "version": __version__,
            "command": self.command,
            "config": cfg,
            "passed": self.passed,
            "checks": checks,
            **self.extra,
            "timestamps": {
                "started": started,
                "finished": finished,
                "seconds": {k: round(self.checks[k].seconds, 3) for k in sorted(self.checks)},
            },
        }


def _slug(text: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in text)


def _members(cfg: ExperimentConfig, M: ManifoldModel) -> list:
    out = []
    for zid in cfg.zoo_members():
        try:
            out.append(make_distribution(zid, M))
        except WaveregError as exc:
            raise ConfigError(f"zoo member {zid} cannot live on a {M.kind}: {exc}") from exc
    return out


def _process(cfg: ExperimentConfig, M: ManifoldModel, c: float | None = None):
    return flagship_process(M, cfg.a, cfg.b, cfg.c if c is None else c)


def _table_csv(run: Run, key: str, name: str, table):
    """Write a check table (scan dict or list of row dicts) as CSV."""
    path = run.out / f"{_slug(key)}_{_slug(name)}.csv"
    if isinstance(table, dict) and "eps" in table:
        cols = [("eps", "1")] + [(k, "seminorm") for k in table if k != "eps"]
        rows = zip(*[table[k] for k in ["eps"] + [k for k in table if k != "eps"]])
    elif isinstance(table, list) and table and isinstance(table[0], dict):
        keys = [k for k in table[0] if not isinstance(table[0][k], (dict, list))]
        cols = [(k, _unit(k)) for k in keys]
        rows = ([r.get(k) for k in keys] for r in table)
    else:
        return
    run.artifact(key, write_csv(path, cols, rows))


def _unit(key: str) -> str:
    if key in ("radius", "bound", "s"):
        return "length"
    if key == "lambda":
        return "1/length^2"
    if key in ("count",):
        return "modes"
    return "1"


def _wavefront_csv(run: Run, key: str, w_id: str, entries: list):
    dim = len(entries[0]["point"]) if entries else 1
    cols = [(f"x{i + 1}", "length") for i in range(dim)]
    cols += [(f"d{i + 1}", "1") for i in range(dim)]
    cols += [("verdict", "label"), ("declared", "label"), ("l", "order"), ("eps_index", "1"),
             ("Q", "1")]
    rows = []
    for e in entries:
        for l, qs in e["q_table"].items():
            for j, q in enumerate(qs):
                rows.append(list(e["point"]) + list(e["direction"])
                            + [e["verdict"], e["declared"], l, j, q])
    run.artifact(key, write_csv(run.out / f"{_slug(key)}_{_slug(w_id)}_decay.csv", cols, rows))
    vcols = cols[: 2 * dim] + [("verdict", "label"), ("declared", "label"), ("label", "label"),
                               ("spread", "1")]
    vrows = [list(e["point"]) + list(e["direction"])
             + [e["verdict"], e["declared"], e["label"], e["spread"]] for e in entries]
    run.artifact(key, write_csv(run.out / f"{_slug(key)}_{_slug(w_id)}_verdicts.csv", vcols, vrows))


def _export_check(run: Run, key: str, res: CheckResult):
    for name, table in res.tables.items():
        if res.id == "E":
            _wavefront_csv(run, key, name, table)
        else:
            _table_csv(run, key, name, table)


# -- commands ----------------------------------------------------------------
def cmd_axioms(run: Run):
    cfg = run.cfg
    M = cfg.manifold_model()
    members = _members(cfg, M)
    opts = {
        "A": {"eps_grid": cfg.eps_grid(), "seminorms": cfg.seminorms},
        "B": {"eps_grid": cfg.refined_grid(0.75), "seed": cfg.seed},
        "C": {"eps_grid": cfg.eps_grid()},
        "D": {"eps_grid": cfg.refined_grid(2 ** -0.5)},
        "E": {"eps_grid": cfg.eps_grid(), "radius": cfg.window_radius},
    }
    rep = verify_axioms(_process(cfg, M), members, cfg.checks, cfg.workers, opts)
    for cid, res in rep.checks.items():
        run.add(res, cid)
        _export_check(run, cid, res)
    run.extra["process"] = rep.as_dict()["config"]
    run.extra["notes"] = rep.notes
    if cfg.contrasts:
        contrast = {}
        pattern_ok = rep.passed
        for P in (heat_process(M), sharp_process(M)):
            crep = verify_axioms(P, members, cfg.checks, cfg.workers, opts)
            contrast[P.label] = crep.verdicts()
            if "C" in crep.checks:
                pattern_ok &= crep.checks["C"].verdict == "fail"
        run.extra["contrasts"] = contrast
        run.add(CheckResult("contrast", "contrast processes fail support preservation",
                            "pass" if pattern_ok else "fail",
                            {"flagship": rep.verdicts(), "contrasts": contrast}))


def cmd_scan(run: Run):
    cfg = run.cfg
    M = cfg.manifold_model()
    P = _process(cfg, M)
    for w in _members(cfg, M):
        t0 = time.perf_counter()
        scans = run_scan(P, w, cfg.seminorms, cfg.eps_grid())
        v = classify(scans, "moderate")
        fits = {}
        for sc in scans:
            try:
                fits[sc.seminorm] = fit_slope(sc).as_dict()
            except InsufficientDataError as exc:
                fits[sc.seminorm] = {"error": str(exc)}
        key = f"scan:{w.id}"
        res = CheckResult(key, f"seminorm scan of {w.id}", "pass" if v.passed else "fail",
                          {"order": v.exponent, "fits": fits}, seconds=time.perf_counter() - t0)
        run.add(res)
        run.artifact(key, scan_csv(run.out / f"scan_{_slug(w.id)}.csv", scans))
        frows = [(s, f.get("slope"), f.get("r2"), f.get("n_points")) for s, f in fits.items()]
        run.artifact(key, write_csv(run.out / f"scan_{_slug(w.id)}_fits.csv",
                                    [("seminorm", "name"), ("slope", "1"), ("r2", "1"),
                                     ("n_points", "1")], frows))


def cmd_kernel(run: Run):
    cfg = run.cfg
    M = cfg.manifold_model()
    P = _process(cfg, M)
    dirac = make_distribution("dirac", M)
    t0 = time.perf_counter()
    res = check_support(P, [dirac], cfg.eps_grid())
    run.add(res, "kernel_support")
    _export_check(run, "kernel_support", res)
    if M.dim == 1:
        for eps in cfg.eps_grid()[:: max(1, len(cfg.eps_grid()) // 4)]:
            u = kernel_section(P, (0.0,), float(eps), grid_points=max(2048, _pow2(P, eps)))
            u = u.subsample(2048)
            run.artifact("kernel_support",
                         grid_function_csv(run.out / f"kernel_eps{eps:.6g}.csv", u))
        snap = wave_snapshot(dirac, 1.0, 2048)
        leak = mass_outside(snap, (0.0,), 1.0 + 3 * snap.spacing[0], power=2)
        run.artifact("kernel_support", grid_function_csv(run.out / "wave_snapshot_s1.csv", snap))
        wave = CheckResult("wave_propagation", "leapfrog finite propagation",
                           "pass" if leak < 1e-6 else "fail",
                           {"energy_outside": leak, "time": 1.0, "grid_points": 2048})
        run.add(wave)
    for eps in cfg.eps_grid()[:: max(1, len(cfg.eps_grid()) // 4)]:
        lam = np.linspace(0.0, 3 * P.filter.b / eps, 601)
        tab = effective_multiplier(P.filter, P.cutoff, float(eps), lam)
        run.artifact("kernel_support", multiplier_csv(run.out / f"multiplier_eps{eps:.6g}.csv", tab))
    res.seconds = time.perf_counter() - t0


def _pow2(P, eps) -> int:
    K = P.band(float(eps))[0]
    return 1 << int(math.ceil(math.log2(2 * K + 1)))


def cmd_wavefront(run: Run):
    cfg = run.cfg
    M = cfg.manifold_model()
    P = _process(cfg, M)
    t0 = time.perf_counter()
    res = check_wavefront(P, _members(cfg, M), eps_grid=cfg.eps_grid(), radius=cfg.window_radius)
    res.seconds = time.perf_counter() - t0
    run.add(res, "E")
    _export_check(run, "E", res)


def cmd_weyl(run: Run):
    cfg = run.cfg
    M = cfg.manifold_model()
    t0 = time.perf_counter()
    res = verify_weyl(M, cfg.resolved_lambda_max(), cfg.resolved_weyl_tol())
    res.seconds = time.perf_counter() - t0
    run.add(res)
    rows = [(r["lambda"], r["count"], r["weyl"], r["ratio"]) for r in res.tables["ratios"]]
    run.artifact("weyl", write_csv(run.out / "weyl_ratios.csv",
                                   [("lambda", "1/length^2"), ("count", "modes"),
                                    ("weyl_term", "modes"), ("ratio", "1")], rows))


def cmd_first_order(run: Run):
    cfg = run.cfg
    if cfg.manifold != "circle":
        raise ConfigError("the first-order operator is implemented on the circle")
    M = cfg.manifold_model()
    rep = verify_first_order(FirstOrderOperator(M), FilterSpec(cfg.a, cfg.b),
                             phi=CutoffSpec(cfg.c), seed=cfg.seed, eps_grid=cfg.eps_grid())
    for cid, res in rep.checks.items():
        key = f"first_order:{cid}"
        run.add(res, key)
        _export_check(run, key, res)


def cmd_compare_mollifier(run: Run):
    cfg = run.cfg
    if cfg.manifold != "circle":
        raise ConfigError("the mollifier comparison is implemented on the circle")
    M = cfg.manifold_model()
    P = _process(cfg, M)
    grid = cfg.refined_grid(2 ** -0.5)
    t0 = time.perf_counter()
    res = compare_mollifier(P, make_distribution("dirac", M), grid, cfg.residual_tol)
    res.seconds = time.perf_counter() - t0
    run.add(res)
    _export_check(run, "mollifier", res)
    P2 = _process(cfg, M, cfg.c_alt)
    for w in _members(cfg, M):
        t0 = time.perf_counter()
        r = verify_cutoff_independence(P, P2, w, eps_grid=grid)
        r.seconds = time.perf_counter() - t0
        key = f"cutoff:{w.id}"
        run.add(r, key)
        _export_check(run, key, r)


def cmd_zoo_list(run: Run):
    M = run.cfg.manifold_model()
    listing = zoo_listing(M)
    path = write_json(run.out / "zoo.json", listing)
    res = CheckResult("zoo", "zoo listing", "pass", {"members": [m["id"] for m in listing]})
    run.add(res)
    run.artifact("zoo", path)
    for m in listing:
        print(f"{m['id']:18s} support={m['support']:6s} sobolev={m['sobolev_order']}")


HANDLERS = {
    "axioms": cmd_axioms,
    "scan": cmd_scan,
    "kernel": cmd_kernel,
    "wavefront": cmd_wavefront,
    "weyl": cmd_weyl,
    "first-order": cmd_first_order,
    "compare-mollifier": cmd_compare_mollifier,
    "zoo-list": cmd_zoo_list,
}


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="wavereg",
        description="Wave-equation regularisation processes on circles and tori: "
                    "verification runs with CSV/JSON artifacts.",
        epilog="Any configuration key can be overridden as --key value.")
    p.add_argument("command", choices=COMMANDS + ("template",))
    p.add_argument("--config", help="configuration file (sectioned key = value)")
    p.add_argument("--version", action="version", version=f"wavereg {__version__}")
    return p


def _pairs(extra: list) -> list:
    pairs = []
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        if "=" in tok:
            k, v = tok.split("=", 1)
            pairs.append((k, v))
            i += 1
            continue
        if i + 1 >= len(extra):
            raise ConfigError(f"option {tok} needs a value")
        pairs.append((tok, extra[i + 1]))
        i += 2
    return pairs


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        cfg = load_config(args.config, parse_overrides(_pairs(extra)))
        out = cfg.resolved_output_dir()
        try:
            out.mkdir(parents=True, exist_ok=True)
            probe = out / ".write-test"
            probe.write_text("")
            probe.unlink()
        except OSError as exc:
            raise ConfigError(f"output directory {out} is not writable: {exc}") from exc
    except ConfigError as exc:
        print(f"wavereg: configuration error: {exc}", file=sys.stderr)
        return 2
    if args.command == "template":
        path = write_template(out / "wavereg.ini")
        print(f"wrote {path}")
        return 0

    run = Run(args.command, cfg, out.resolve())
    run.out.mkdir(parents=True, exist_ok=True)
    started = _now()
    try:
        HANDLERS[args.command](run)
    except ConfigError as exc:
        print(f"wavereg: configuration error: {exc}", file=sys.stderr)
        return 2
    except WaveregError as exc:
        print(f"wavereg: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    finished = _now()
    write_json(run.out / "report.json", run.report(started, finished))
    for key in sorted(run.checks):
        c = run.checks[key]
        print(f"{key:24s} {c.verdict.upper():5s} {c.name} ({c.seconds:.1f} s)")
    print(f"report: {run.out / 'report.json'}")
    return 0 if run.passed else 1


if __name__ == "__main__":
    sys.exit(main())
