"""Verification battery for regularisation processes.

Conditions checked by :func:`verify_axioms`:

A  moderate growth of ``T_eps w`` in L2 and sup seminorms;
B  approximate identity, through pairings with smooth test functions;
C  support preservation (outer radius bound and mass near the support);
D  negligibility of ``T_eps u - u`` on smooth inputs;
E  wavefront-set preservation (microlocal classifier).

Separate entry points cover cutoff independence, isometry equivariance,
Weyl asymptotics, the first-order operator variant and the comparison with
plain mollification.  Every verdict carries the scans, fits or residual
tables it was derived from.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import (DEFAULT_SEMINORMS, EpsilonScan, classify, difference_scan, dyadic_grid,
                          geometric_grid,
                          residual_scan, run_scan)
from .errors import (DimensionError, InsufficientDataError, ParameterError, ResolutionError,
                     WaveregError)
from .filters import CutoffSpec, FilterSpec, psi_tail_radius
from .manifold import (GridFunction, ManifoldModel, SpectralCoefficients, counting_function,
                       inverse_transform, next_pow2, weyl_constant)
from .microlocal import estimate_wavefront
from .regularizer import (RegularizationProcess, apply_spectral, mass_outside, occupied_band,
                          regularize, support_radius, wave_snapshot)
from .zoo import TestDistribution, make_distribution

CHECK_NAMES = {
    "A": "moderate growth",
    "B": "approximate identity",
    "C": "support preservation",
    "D": "negligibility on smooth functions",
    "E": "wavefront preservation",
}
MODERATE_SEMINORMS = ("L2", "sup", "sup_d1", "sup_d2")
RESIDUAL_TOL = 1e-12
NEAR_FRACTION = 0.5
SUPPORT_GRID = 2048
MAX_SUPPORT_GRID = 1 << 22


@dataclass
class CheckResult:
    id: str
    name: str
    verdict: str                      # "pass", "fail" or "n/a"
    metrics: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"

    def as_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "verdict": self.verdict,
                "metrics": _plain(self.metrics), "tables": _plain(self.tables)}


@dataclass
class AxiomReport:
    """Per-check verdicts for one process, with the configuration that produced them."""

    process: str
    config: dict
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def verdicts(self) -> dict:
        return {k: self.checks[k].verdict for k in sorted(self.checks)}

    def timings(self) -> dict:
        return {k: round(self.checks[k].seconds, 3) for k in sorted(self.checks)}

    def as_dict(self) -> dict:
        """Deterministic content (wall-clock times are in :meth:`timings`)."""
        return {
            "process": self.process,
            "config": _plain(self.config),
            "passed": self.passed,
            "verdicts": self.verdicts(),
            "checks": {k: self.checks[k].as_dict() for k in sorted(self.checks)},
            "notes": list(self.notes),
        }


def _plain(obj):
    """Recursively convert numpy scalars/arrays and tuples to JSON-friendly values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


def scan_table(scans) -> dict:
    """``{"eps": [...], seminorm: [...]}`` for scans sharing one eps grid."""
    if not scans:
        return {}
    out = {"eps": scans[0].eps.tolist()}
    for sc in scans:
        out[sc.seminorm] = sc.values.tolist()
    return out


def process_config(P: RegularizationProcess) -> dict:
    M = P.manifold
    return {
        "kind": P.kind,
        "label": P.label,
        "manifold": {"kind": M.kind, "side_lengths": list(M.side_lengths)},
        "filter": {"a": P.filter.a, "b": P.filter.b},
        "cutoff": None if P.cutoff is None else {"c": P.cutoff.c},
    }


# -- contrast processes --------------------------------------------------------
def flagship_process(M: ManifoldModel, a: float = 1.0, b: float = 2.0, c: float = 0.5,
                     **kw) -> RegularizationProcess:
    return RegularizationProcess(M, FilterSpec(a, b), CutoffSpec(c), **kw)


def heat_process(M: ManifoldModel) -> RegularizationProcess:
    """Multiplier ``exp(-eps lambda)``: smoothing without proper support."""
    return RegularizationProcess(M, cutoff=None, kind="heat", name="heat")


def sharp_process(M: ManifoldModel) -> RegularizationProcess:
    """Multiplier ``1[sqrt(lambda) <= 1/eps]``: Dirichlet-kernel truncation."""
    return RegularizationProcess(M, cutoff=None, kind="sharp", name="sharp")


def reach(P: RegularizationProcess) -> float:
    """Support growth allowed by condition C.

    ``2c`` for the wave process (propagation speed 1 over times up to
    ``2c``); processes without a time cutoff are held to the default cutoff.
    """
    c = P.cutoff.c if P.cutoff is not None else CutoffSpec().c
    return 2.0 * c


# -- smooth test functions -------------------------------------------------------
@dataclass(frozen=True)
class SmoothTestFunction:
    """``psi(x) = sum_k exp(-alpha sqrt|xi_k|) cos-phase``: smooth, not band-limited.

    The coefficients decay like ``exp(-alpha |xi|^(1/2))``, faster than any
    power, so ``psi`` is smooth while every band still carries a tail.
    """

    manifold: ManifoldModel
    alpha: float
    shift: tuple
    tol: float = 1e-18

    def band(self) -> tuple:
        R = (math.log(1.0 / self.tol) / self.alpha) ** 2
        return tuple(int(math.ceil(R / u)) for u in self.manifold.wavenumber_unit)

    def coefficients(self, K) -> SpectralCoefficients:
        M = self.manifold.with_band(K)
        grids = np.meshgrid(*M.mode_axes(K), indexing="ij")
        xi2 = sum((g * u) ** 2 for g, u in zip(grids, M.wavenumber_unit))
        arg = sum(g * u * s for g, u, s in zip(grids, M.wavenumber_unit, self.shift))
        vals = np.exp(-self.alpha * xi2 ** 0.25) * np.exp(-1j * arg) / M.volume
        return SpectralCoefficients(M, vals)


def smooth_test_functions(M: ManifoldModel, count: int = 5, seed: int = 42,
                          alpha_range=None) -> list:
    """Seeded family of smooth test functions for the pairing check."""
    rng = np.random.default_rng(seed)
    if alpha_range is None:
        alpha_range = (0.75, 1.5) if M.dim == 1 else (2.0, 3.0)
    out = []
    for _ in range(count):
        alpha = float(rng.uniform(*alpha_range))
        shift = tuple(float(rng.uniform(0, L)) for L in M.side_lengths)
        out.append(SmoothTestFunction(M, alpha, shift))
    return out


def pairing_scans(P: RegularizationProcess, w: TestDistribution, psis, eps_grid) -> list:
    """``|<T_eps w, psi> - <w, psi>| = |vol sum (m_k - 1) w_k psi_-k|`` per test function.

    The band covers both the process band and the test-function tail, so the
    truncation of ``<w, psi>`` is below rounding.  Scan scale is
    ``vol sum |w_k psi_-k|`` (the rounding level of the sum).
    """
    eps_grid = np.asarray(eps_grid, dtype=float)
    M = w.manifold
    vals = np.zeros((len(psis), eps_grid.size))
    scale = np.zeros_like(vals)
    occ = occupied_band(w)
    tail = tuple(max(t) for t in zip(*(psi.band() for psi in psis)))
    for j, eps in enumerate(eps_grid):
        K = tuple(max(k, t) if o is None else min(max(k, t), o)
                  for k, t, o in zip(P.band(eps, w), tail, occ))
        c = w.coefficients(K)
        dm = P.mode_multiplier(eps, c) - 1.0
        for i, psi in enumerate(psis):
            pc = psi.coefficients(K).values
            terms = c.values * pc[tuple(slice(None, None, -1) for _ in pc.shape)]
            vals[i, j] = abs(M.volume * np.sum(dm * terms))
            scale[i, j] = M.volume * np.sum(np.abs(terms))
    return [EpsilonScan(P.label, w.id, f"pair[{i}]", eps_grid, vals[i], scale[i])
            for i in range(len(psis))]


# -- individual conditions ------------------------------------------------------
def check_moderate(P, members, eps_grid=None, seminorms=MODERATE_SEMINORMS) -> CheckResult:
    eps_grid = dyadic_grid() if eps_grid is None else eps_grid
    metrics, tables, ok = {}, {}, True
    for w in members:
        scans = run_scan(P, w, seminorms, eps_grid)
        v = classify(scans, "moderate")
        fits = {d["seminorm"]: d.get("fit") for d in v.details}
        metrics[w.id] = {"passed": v.passed, "order": v.exponent,
                         "slopes": {k: (f["slope"] if f else None) for k, f in fits.items()},
                         "fits": fits}
        tables[w.id] = scan_table(scans)
        ok &= v.passed
    return CheckResult("A", CHECK_NAMES["A"], _verdict(ok), metrics, tables)


def check_identity(P, members, eps_grid=None, count: int = 5, seed: int = 42,
                   m_min: float = 6.0) -> CheckResult:
    eps_grid = geometric_grid(2.0**-4, 0.75, 20) if eps_grid is None else eps_grid
    metrics, tables, ok = {}, {}, True
    for w in members:
        psis = smooth_test_functions(w.manifold, count, seed)
        scans = pairing_scans(P, w, psis, eps_grid)
        v = classify(scans, "negligible", m_max=m_min)
        metrics[w.id] = {"passed": v.passed, "worst_tail_slope": v.exponent,
                         "alphas": [p.alpha for p in psis], "details": v.details}
        tables[w.id] = scan_table(scans)
        ok &= v.passed
    return CheckResult("B", CHECK_NAMES["B"], _verdict(ok), metrics, tables)


def _support_grid(P: RegularizationProcess, w: TestDistribution, eps: float, n: int):
    """Evaluation grid fine enough for the band, and the sub-grid to measure on."""
    K = P.band(eps, w)
    fine, coarse = [], []
    for k in K:
        if k == 0:
            fine.append(1)
            coarse.append(1)
        else:
            fine.append(max(n, next_pow2(2 * k + 1)))
            coarse.append(n)
    if int(np.prod(fine)) > MAX_SUPPORT_GRID:
        raise ResolutionError(f"support grid {fine} too large for eps = {eps:g}")
    return tuple(fine), tuple(coarse)


def check_support(P, members, eps_grid=None, n: int = SUPPORT_GRID,
                  eta: float = 1e-8) -> CheckResult:
    """Outer bound ``radius <= reach + 3 dx`` and a fixed share of L2 mass near the support.

    The radius is measured beyond the declared support of ``w`` on a grid of
    ``n`` points per occupied direction; "near" means within ``reach / 2``.
    """
    eps_grid = dyadic_grid() if eps_grid is None else np.asarray(eps_grid, dtype=float)
    metrics, tables, ok = {}, {}, True
    bound_reach = reach(P)
    for w in members:
        if w.support == "full":
            metrics[w.id] = {"applicable": False, "reason": "support is the whole manifold"}
            continue
        rows = []
        w_ok = True
        for eps in eps_grid:
            fine, coarse = _support_grid(P, w, float(eps), n)
            u = apply_spectral(P, w, float(eps), grid_points=fine).subsample(coarse)
            dx = max(h for h, k in zip(u.spacing, coarse) if k > 1)
            bound = bound_reach + 3 * dx
            r = support_radius(u, w, eta)
            near = 1.0 - mass_outside(u, w, 0.5 * bound_reach, power=2)
            good = r <= bound and near >= NEAR_FRACTION
            w_ok &= good
            rows.append({"eps": float(eps), "radius": r, "bound": bound,
                         "near_fraction": near, "ok": bool(good)})
        entry = {"applicable": True, "passed": bool(w_ok), "reach": bound_reach,
                 "max_radius": max(r["radius"] for r in rows),
                 "min_near_fraction": min(r["near_fraction"] for r in rows)}
        if P.kind == "wave" and w.support == "point" and w.manifold.dim == 1:
            # physical-space propagation: leapfrog snapshot of the point source at s = 1
            snap = wave_snapshot(make_distribution("dirac", w.manifold, w.support_center), 1.0, n)
            leak = mass_outside(snap, w.support_center, 1.0 + 3 * snap.spacing[0], power=2)
            entry["wave_energy_outside"] = leak
            w_ok &= leak < 1e-6
            entry["passed"] = bool(w_ok)
        metrics[w.id] = entry
        tables[w.id] = rows
        ok &= w_ok
    return CheckResult("C", CHECK_NAMES["C"], _verdict(ok), metrics, tables)


def smooth_members(members, M: ManifoldModel) -> list:
    smooth = [w for w in members if math.isinf(w.sobolev_order)]
    return smooth or [make_distribution("smooth_bump", M)]


def check_negligible(P, members, eps_grid=None, seminorms=DEFAULT_SEMINORMS,
                     m_min: float = 8.0) -> CheckResult:
    eps_grid = dyadic_grid(4, 12, 2) if eps_grid is None else eps_grid
    metrics, tables, ok = {}, {}, True
    for w in smooth_members(members, P.manifold):
        scans = residual_scan(P, w, seminorms, eps_grid)
        v = classify(scans, "negligible", m_max=m_min)
        metrics[w.id] = {"passed": v.passed, "worst_tail_slope": v.exponent, "details": v.details}
        tables[w.id] = scan_table(scans)
        ok &= v.passed
    return CheckResult("D", CHECK_NAMES["D"], _verdict(ok), metrics, tables)


def default_probe_points(M: ManifoldModel) -> list:
    if M.dim == 1:
        return [(j * math.pi / 4,) for j in range(8)]
    L = M.side_lengths
    rest = tuple(0.0 for _ in L[2:])
    return [(x, y) + rest for x in (0.0, L[0] / 4, L[0] / 2) for y in (0.0, L[1] / 2)]


def check_wavefront(P, members, points=None, eps_grid=None, radius: float = 0.5) -> CheckResult:
    """Sound classification (no misses, no far false alarms); line conormals on the line."""
    metrics, tables, ok = {}, {}, True
    for w in members:
        pts = default_probe_points(w.manifold) if points is None else points
        rep = estimate_wavefront(P, w, pts, radius=radius, eps_grid=eps_grid)
        entry = {"passed": rep.sound, "confusion": rep.confusion,
                 "tested_range": rep.tested_range}
        if w.support == "line":
            lines = line_direction_checks(rep, w)
            entry["line_checks"] = lines
            entry["passed"] = bool(rep.sound and all(r["ok"] for r in lines))
        metrics[w.id] = entry
        tables[w.id] = rep.entries
        ok &= entry["passed"]
    return CheckResult("E", CHECK_NAMES["E"], _verdict(ok), metrics, tables)


def line_direction_checks(report, w: TestDistribution) -> list:
    """At on-line probes: conormal directions singular, tangential directions regular."""
    out = []
    for e in report.entries:
        if w.singular_distance(e["point"]) > 0:
            continue
        d = np.abs(np.asarray(e["direction"]))
        expect = "singular" if np.allclose(d, (1.0, 0.0)) else \
            "regular" if np.allclose(d, (0.0, 1.0)) else None
        if expect is not None:
            out.append({"point": e["point"], "direction": e["direction"], "expect": expect,
                        "verdict": e["verdict"], "ok": e["verdict"] == expect})
    return out


CHECKS = {"A": check_moderate, "B": check_identity, "C": check_support,
          "D": check_negligible, "E": check_wavefront}


def verify_axioms(P: RegularizationProcess, members, checks=("A", "B", "C", "D", "E"),
                  workers: int = 1, options: dict | None = None) -> AxiomReport:
    """Run the selected conditions on zoo members living on ``P.manifold``.

    ``options`` maps a check id to keyword arguments of its check function.
    Checks run independently (optionally on a thread pool); the report is
    assembled in check-id order.
    """
    members = [make_distribution(w, P.manifold) if isinstance(w, str) else w for w in members]
    for w in members:
        if w.manifold.side_lengths != P.manifold.side_lengths or w.manifold.kind != P.manifold.kind:
            raise DimensionError(f"zoo member {w.id} does not live on the process manifold")
    unknown = [c for c in checks if c not in CHECKS]
    if unknown:
        raise ParameterError(f"unknown checks {unknown}")
    options = options or {}

    def run(cid):
        t0 = time.perf_counter()
        try:
            res = CHECKS[cid](P, members, **options.get(cid, {}))
        except WaveregError as exc:
            raise type(exc)(f"check {cid} ({CHECK_NAMES[cid]}) on {P.label}: {exc}") from exc
        res.seconds = time.perf_counter() - t0
        return res

    ids = sorted(set(checks))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, ids))
    else:
        results = [run(c) for c in ids]
    cfg = process_config(P)
    cfg["members"] = [w.id for w in members]
    report = AxiomReport(P.label, cfg, {r.id: r for r in results})
    report.notes.append("support verdicts use a threshold support measured over finitely "
                        "many eps; they falsify, they do not certify")
    return report


def contrast_battery(M: ManifoldModel, members, checks=("A", "B", "C", "D", "E"),
                     flagship: RegularizationProcess | None = None, workers: int = 1) -> dict:
    """Flagship, heat and sharp-truncation reports side by side."""
    P = flagship_process(M) if flagship is None else flagship
    return {
        "flagship": verify_axioms(P, members, checks, workers),
        "heat": verify_axioms(heat_process(M), members, checks, workers),
        "sharp": verify_axioms(sharp_process(M), members, checks, workers),
    }


# -- cutoff independence ------------------------------------------------------
def verify_cutoff_independence(P1: RegularizationProcess, P2: RegularizationProcess,
                               w: TestDistribution, seminorms=("L2", "sup"), eps_grid=None,
                               m_min: float = 6.0) -> CheckResult:
    """``||T1_eps w - T2_eps w||`` must be negligible (tail slope above ``m_min`` or floor)."""
    for P in (P1, P2):
        if P.cutoff is not None and not P.cutoff(0.0) == 1.0:
            raise ParameterError("cutoffs must equal 1 near 0")
    eps_grid = dyadic_grid(4, 12, 2) if eps_grid is None else eps_grid
    scans = difference_scan(P1, P2, w, seminorms, eps_grid)
    v = classify(scans, "negligible", m_max=m_min)
    fits = {d["seminorm"]: d.get("fit") for d in v.details}
    metrics = {"passed": v.passed, "worst_tail_slope": v.exponent, "fits": fits,
               "details": v.details, "processes": [P1.label, P2.label]}
    return CheckResult("cutoff", "cutoff independence", _verdict(v.passed), metrics,
                       {w.id: scan_table(scans)})


# -- isometries ---------------------------------------------------------------
def laplacian(c: SpectralCoefficients) -> SpectralCoefficients:
    return c.with_values(c.eigenvalues() * c.values)


def translate_coefficients(c: SpectralCoefficients, shift) -> SpectralCoefficients:
    """Pull-back by ``x -> x + shift``: ``u_k -> u_k exp(i xi_k . shift)``."""
    M = c.manifold
    grids = np.meshgrid(*M.mode_axes(c.k_max), indexing="ij")
    arg = sum(g * u * s for g, u, s in zip(grids, M.wavenumber_unit, shift))
    return c.with_values(c.values * np.exp(1j * arg))


def _shifted_member(w: TestDistribution, shift) -> TestDistribution:
    """The zoo member rebuilt at its base point moved by ``-shift``."""
    params = {k: v for k, v in w.params.items() if k != "x0"}
    x0 = np.asarray(w.params["x0"], dtype=float) - np.asarray(shift, dtype=float)
    return make_distribution(w.id, w.manifold, tuple(x0), **params)


def verify_isometry(P: RegularizationProcess, w: TestDistribution, shift, eps_grid=None,
                    tol: float = RESIDUAL_TOL, grid_points: int = 1024) -> CheckResult:
    """Translation/rotation equivariance and commutation with the Laplacian.

    Three residuals per eps, each relative to the size of the compared
    objects:

    * spectral: ``T(f* w)`` with ``f* w`` rebuilt by the zoo, against the
      phase-shifted coefficients of ``T w``;
    * grid: if ``shift`` is a whole number of grid steps, the rolled samples
      of ``T w`` against the samples of ``T(f* w)``;
    * Laplacian: ``T(Delta w)`` against ``Delta(T w)`` on coefficients.
    """
    M = w.manifold
    shift = tuple(float(s) for s in np.atleast_1d(shift))
    if len(shift) != M.dim:
        raise DimensionError("shift dimension does not match the manifold")
    if "x0" not in w.params:
        raise ParameterError(f"{w.id} has no base point to move")
    eps_grid = dyadic_grid() if eps_grid is None else np.asarray(eps_grid, dtype=float)
    moved = _shifted_member(w, shift)
    steps = [s / (L / grid_points) for s, L in zip(shift, M.side_lengths)]
    on_grid = all(abs(s - round(s)) < 1e-9 for s in steps)
    rows = []
    for eps in eps_grid:
        eps = float(eps)
        K = P.band(eps, w)
        tw = regularize(P, w, eps, K)
        tm = regularize(P, moved, eps, K)
        ref = max(np.abs(tw.values).max(), 1e-300)
        spec = float(np.abs(tm.values - translate_coefficients(tw, shift).values).max() / ref)
        row = {"eps": eps, "spectral": spec}
        if on_grid:
            n = tuple(max(grid_points, next_pow2(2 * k + 1)) if k else 1 for k in K)
            gw = inverse_transform(tw, n).values
            gm = inverse_transform(tm, n).values
            roll = tuple(-int(round(s)) * (ni // grid_points) if ni > 1 else 0
                         for s, ni in zip(steps, n))
            rolled = np.roll(gw, roll, axis=tuple(range(M.dim)))
            row["grid"] = float(np.abs(gm - rolled).max() / max(np.abs(gw).max(), 1e-300))
        c = w.coefficients(K)
        lhs = regularize(P, w, eps, K, laplacian(c))
        rhs = laplacian(regularize(P, w, eps, K, c))
        row["laplacian"] = float(np.abs(lhs.values - rhs.values).max()
                                 / max(np.abs(rhs.values).max(), 1e-300))
        rows.append(row)
    worst = {k: max(r[k] for r in rows) for k in rows[0] if k != "eps"}
    ok = all(v < tol for v in worst.values())
    metrics = {"passed": ok, "worst": worst, "shift": list(shift), "grid_shift": on_grid,
               "tolerance": tol}
    return CheckResult("isometry", "isometry equivariance", _verdict(ok), metrics, {w.id: rows})


# -- Weyl law ---------------------------------------------------------------
def weyl_table(M: ManifoldModel, lam_max: float, count: int = 12, lam_min: float = 1.0) -> list:
    """Rows ``(lambda, N(lambda), C lambda^(m/2), ratio)`` at geometric checkpoints.

    ``lambda = 0`` is listed with an undefined ratio.
    """
    if lam_max <= lam_min:
        raise ParameterError("lambda_max must exceed the first checkpoint")
    C = weyl_constant(M)
    rows = [{"lambda": 0.0, "count": counting_function(M, 0.0), "weyl": 0.0, "ratio": None}]
    for lam in np.geomspace(lam_min, lam_max, count):
        lam = float(lam)
        n = counting_function(M, lam)
        pred = C * lam ** (M.dim / 2)
        rows.append({"lambda": lam, "count": n, "weyl": pred, "ratio": n / pred})
    return rows


def verify_weyl(M: ManifoldModel, lam_max: float, tol: float = 0.01, count: int = 12) -> CheckResult:
    """Counting-function ratio to the Weyl term; verdict on the final ratio."""
    rows = weyl_table(M, lam_max, count)
    modes = rows[-1]["count"]
    if modes < 1000:
        raise InsufficientDataError(f"lambda_max covers only {modes} modes (need 1000)")
    final = rows[-1]["ratio"]
    tail = [r for r in rows if r["ratio"] is not None and r["lambda"] >= 100]
    band = max((abs(r["ratio"] - 1) * r["lambda"] ** 0.25 for r in tail), default=None)
    ok = abs(final - 1) <= tol
    metrics = {"passed": ok, "final_ratio": final, "tolerance": tol, "weyl_constant": weyl_constant(M),
               "modes": modes, "scaled_deviation": band}
    return CheckResult("weyl", "Weyl asymptotics", _verdict(ok), metrics, {"ratios": rows})


# -- first-order operator ---------------------------------------------------
@dataclass(frozen=True)
class FirstOrderOperator:
    """``D = -i d/dtheta`` on the circle: mode ``k`` has eigenvalue ``k``, speed 1."""

    manifold: ManifoldModel
    speed: float = 1.0

    def __post_init__(self):
        if self.manifold.kind != "circle":
            raise ParameterError("the first-order operator is implemented on the circle")

    def symbol(self, xi):
        return np.asarray(xi, dtype=float)

    def eigenvalues(self, K: int) -> np.ndarray:
        return np.arange(-K, K + 1, dtype=float)

    def apply(self, c: SpectralCoefficients) -> SpectralCoefficients:
        return c.with_values(self.eigenvalues(c.k_max[0]) * c.values)

    def propagate(self, c: SpectralCoefficients, s: float) -> SpectralCoefficients:
        """``exp(i s D)``: translation by ``s`` (``u -> u(. + s)``)."""
        return c.with_values(np.exp(1j * s * self.eigenvalues(c.k_max[0])) * c.values)

    def inner(self, u: SpectralCoefficients, v: SpectralCoefficients) -> complex:
        return complex(self.manifold.volume * np.sum(u.values * np.conj(v.values)))


def random_band_limited(M: ManifoldModel, K: int, rng) -> SpectralCoefficients:
    Mb = M.with_band(K)
    vals = (rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1)) \
        / (1.0 + np.abs(np.arange(-K, K + 1)))
    return SpectralCoefficients(Mb, vals)


def support_lemma_rows(M: ManifoldModel, phi: CutoffSpec, eps_grid, n: int = SUPPORT_GRID,
                       eta: float = 1e-8) -> list:
    """Kernel radius of ``G(eps D)`` with ``G^ = phi`` (so ``supp G^ = [-2c, 2c]``).

    ``G(eps k) = psi_c(eps k)`` is read off the FFT table of ``phi``; the
    kernel must stay within ``eps * 2c + 3 dx`` of the source.
    """
    ct = phi.support
    W = psi_tail_radius(phi)
    rows = []
    for eps in eps_grid:
        eps = float(eps)
        K = int(math.ceil(W / eps))
        tab = phi.inverse_fourier_table(eps)
        if tab.size <= K:
            tab = np.concatenate([tab, np.zeros(K + 1 - tab.size)])
        g = tab[np.abs(np.arange(-K, K + 1))]
        Mb = M.with_band(K)
        c = SpectralCoefficients(Mb, g.astype(complex) / M.volume)
        fine = max(n, next_pow2(2 * K + 1))
        u = inverse_transform(c, fine).subsample(n)
        r = support_radius(GridFunction(Mb, u.values.real), (0.0,), eta)
        bound = eps * ct + 3 * u.spacing[0]
        rows.append({"eps": eps, "radius": r, "bound": bound, "ok": bool(r <= bound)})
    return rows


def verify_first_order(D: FirstOrderOperator, F: FilterSpec, members=("dirac", "smooth_bump"),
                       phi: CutoffSpec | None = None, seed: int = 42,
                       eps_grid=None) -> AxiomReport:
    """Conditions A, B, D for ``F(eps D)`` plus the support lemma, translation and symmetry."""
    M = D.manifold
    phi = CutoffSpec() if phi is None else phi
    P = RegularizationProcess(M, F, None, kind="first_order", name="first_order")
    members = [make_distribution(w, M) if isinstance(w, str) else w for w in members]
    report = verify_axioms(P, members, checks=("A", "B", "D"),
                           options={"A": {} if eps_grid is None else {"eps_grid": eps_grid}})
    report.config["operator"] = {"symbol": "-i d/dtheta", "speed": D.speed}

    t0 = time.perf_counter()
    rows = support_lemma_rows(M, phi, (1.0, 0.5, 0.25, 0.125))
    ok = all(r["ok"] for r in rows)
    report.checks["S"] = CheckResult("S", "support lemma", _verdict(ok),
                                     {"passed": ok, "support_of_transform": phi.support},
                                     {"kernel_radius": rows}, time.perf_counter() - t0)

    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    trows = []
    x0 = 0.3
    dirac = make_distribution("dirac", M, x0)
    for s in (0.5, math.pi / 3, 2.0):
        K = 512
        moved = make_distribution("dirac", M, x0 - s).coefficients(K)
        prop = D.propagate(dirac.coefficients(K), s)
        trows.append({"s": s, "residual": float(np.abs(prop.values - moved.values).max()
                                                   / np.abs(moved.values).max())})
    bump = make_distribution("smooth_bump", M)
    cb = bump.coefficients(16)
    n = 256
    for j in (1, 17, 100):
        s = j * 2 * math.pi / n
        moved = inverse_transform(D.propagate(cb, s), n).values
        rolled = np.roll(inverse_transform(cb, n).values, -j)
        trows.append({"s": s, "grid": True,
                      "residual": float(np.abs(moved - rolled).max() / np.abs(rolled).max())})
    sym = []
    for _ in range(5):
        u, v = random_band_limited(M, 64, rng), random_band_limited(M, 64, rng)
        lhs, rhs = D.inner(D.apply(u), v), D.inner(u, D.apply(v))
        sym.append(abs(lhs - rhs) / max(abs(lhs), 1e-300))
    worst = max(r["residual"] for r in trows)
    ok = worst < RESIDUAL_TOL and max(sym) < RESIDUAL_TOL
    sig = float(abs(D.symbol(1.0)))
    report.checks["T"] = CheckResult(
        "T", "translation group and symmetry", _verdict(ok and sig == 1.0),
        {"passed": ok, "worst_translation": worst, "worst_symmetry": max(sym),
         "symbol_on_unit_covector": sig},
        {"translation": trows, "symmetry": sym}, time.perf_counter() - t0)
    return report


# -- mollifier comparison -------------------------------------------------------
def periodized_kernel_coefficients(F: FilterSpec, eps: float, K: int) -> np.ndarray:
    """Fourier coefficients (times ``2 pi``) of ``rho_eps`` sampled and periodised on the circle.

    ``rho(x) = F^(x) / 2 pi`` so ``rho^ = F``; ``rho_eps = rho(. / eps) / eps``.
    Samples come from the FFT table of ``F^``, images are summed out to the
    decay radius, and the grid is fine enough that the sampled kernel's DFT
    has no aliasing inside the band.
    """
    n = next_pow2(max(2 * K + 1, int(math.ceil(2 * F.b / eps)) + 2))
    dx = 2 * math.pi / n
    ds = dx / eps
    R = F.decay_radius()
    J = int(math.ceil(R / ds)) + 1
    tab = F.fourier_table(ds)
    if tab.size <= J:
        raise ResolutionError("filter transform table shorter than its decay radius")
    tab = tab[: J + 1]
    m = np.arange(n)
    samples = np.zeros(n)
    for img in range(-(J // n) - 1, J // n + 2):
        idx = np.abs(m + img * n)
        hit = idx <= J
        samples[hit] += tab[idx[hit]]
    samples /= 2 * math.pi * eps
    spec = np.fft.fft(samples) * dx
    k = np.arange(-K, K + 1)
    return spec[k % n]


def compare_mollifier(P: RegularizationProcess, w: TestDistribution, eps_grid=None,
                      tol: float = RESIDUAL_TOL, m_min: float = 6.0) -> CheckResult:
    """Cutoff-free multiplier against explicit kernel convolution, then against the cutoff process.

    The first comparison is coefficient-wise (relative to the largest
    coefficient); the second is a negligibility scan of the difference.
    """
    if w.manifold.kind != "circle":
        raise ParameterError("the convolution comparison is implemented on the circle")
    eps_grid = dyadic_grid(4, 12, 2) if eps_grid is None else np.asarray(eps_grid, dtype=float)
    Pm = RegularizationProcess(P.manifold, P.filter, None, kind="mollifier", name="mollifier")
    rows = []
    for eps in dyadic_grid(4, 12, 1):
        eps = float(eps)
        K = Pm.band(eps, w)
        c = w.coefficients(K)
        spectral = regularize(Pm, w, eps, K, c).values
        conv = periodized_kernel_coefficients(P.filter, eps, K[0]) * c.values
        rows.append({"eps": eps, "residual": float(np.abs(spectral - conv).max()
                                                   / max(np.abs(spectral).max(), 1e-300))})
    worst = max(r["residual"] for r in rows)
    scans = difference_scan(P, Pm, w, ("L2", "sup"), eps_grid)
    v = classify(scans, "negligible", m_max=m_min)
    ok = worst < tol and v.passed
    metrics = {"passed": ok, "worst_convolution_residual": worst,
               "difference_passed": v.passed, "worst_tail_slope": v.exponent,
               "details": v.details}
    return CheckResult("mollifier", "mollifier equivalence", _verdict(ok), metrics,
                       {"convolution": rows, "difference": scan_table(scans)})
