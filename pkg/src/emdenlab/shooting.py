"""Shooting from the regular end and boundary hunting in the amplitude.

A shot starts the regular series solution u(0) = a just off the origin,
integrates outward in the alpha1 frame, and classifies the infinity end.
Boundary hunting bisects between amplitudes whose shots end in different
kinds; connecting orbits instead seed the singular behavior at one end
and integrate across to the other.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classify import ClassificationReport, Kind, classify_end, \
    quadratic_extrema
from .integrate import Frame, IntegratorConfig, State, Trajectory, \
    integrate, regular_series_start, seed_frame, singular_seed_start
from .params import DerivedConstants, ProblemParams, classify_regime, \
    derive_constants


def series_radius(a: float, params: ProblemParams,
                  budget: float = 1e-7) -> float:
    """Largest start radius (capped at 1e-4) keeping every series
    correction below budget * a."""
    r0 = 1e-4
    for exp_, l, k in params.active_terms():
        if not k:
            continue
        # correction a^P r0^{2+l} / ((2+l)(n+l)) == budget a at this r0
        r_term = (budget * a * (2.0 + l) * (params.n + l)
                  / a ** exp_) ** (1.0 / (2.0 + l))
        r0 = min(r0, r_term)
    return r0


@dataclass
class ShotResult:
    a: float
    r0: float
    trajectory: Trajectory
    report: ClassificationReport

    @property
    def kind(self) -> Kind:
        return self.report.kind

    def to_dict(self) -> dict:
        return {"a": self.a, "r0": self.r0, "report": self.report.to_dict()}


def shoot(a: float, params: ProblemParams,
          dc: DerivedConstants | None = None,
          config: IntegratorConfig | None = None,
          t_target: float = 12.0,
          window: tuple | None = None) -> ShotResult:
    """One regular shot u(0) = a, classified at the infinity end.

    The start radius shrinks automatically with a so the series gate
    always holds; integration runs in the alpha1 frame where the p-term
    is autonomous.
    """
    if not (isinstance(a, (int, float)) and a > 0.0 and math.isfinite(a)):
        raise ValueError(f"shooting amplitude must be positive, got {a!r}")
    if dc is None:
        dc = derive_constants(params)
    frame = Frame(dc.alpha1)
    r0 = series_radius(a, params)
    start = regular_series_start(a, r0, params, frame)
    traj = integrate(start, frame, t_target, params, config)
    report = classify_end(traj, dc, "infinity", window=window)
    return ShotResult(float(a), r0, traj, report)


@dataclass
class BoundaryResult:
    """One bisected kind boundary in the shooting amplitude."""

    a_star: float
    a_lo: float
    a_hi: float
    kind_lo: Kind
    kind_hi: Kind
    iterations: int
    widths: list
    report_star: ClassificationReport

    @property
    def rel_width(self) -> float:
        return (self.a_hi - self.a_lo) / self.a_star

    def to_dict(self) -> dict:
        return {
            "a_star": self.a_star,
            "a_lo": self.a_lo,
            "a_hi": self.a_hi,
            "kind_lo": self.kind_lo.value,
            "kind_hi": self.kind_hi.value,
            "iterations": self.iterations,
            "rel_width": self.rel_width,
            "report_star": self.report_star.to_dict(),
        }


def bisect_boundary(a_lo: float, a_hi: float, params: ProblemParams,
                    dc: DerivedConstants | None = None,
                    config: IntegratorConfig | None = None,
                    t_target: float = 12.0,
                    window: tuple | None = None,
                    rel_width: float = 1e-12,
                    max_iter: int = 80) -> BoundaryResult:
    """Bisect an amplitude bracket whose shots differ in kind.

    The bracket width contracts by exactly half per iteration; stops
    when (a_hi - a_lo)/a_mid < rel_width or after max_iter steps.
    """
    if not a_lo < a_hi:
        raise ValueError(f"need a_lo < a_hi, got {a_lo} >= {a_hi}")
    if dc is None:
        dc = derive_constants(params)

    def kind_of(a):
        return shoot(a, params, dc, config, t_target, window).kind

    kind_lo = kind_of(a_lo)
    kind_hi = kind_of(a_hi)
    if kind_lo == kind_hi:
        raise ValueError(
            f"bracket endpoints agree ({kind_lo.value}); nothing to bisect")
    widths = [a_hi - a_lo]
    iterations = 0
    while iterations < max_iter:
        mid = 0.5 * (a_lo + a_hi)
        if (a_hi - a_lo) / mid < rel_width:
            break
        if kind_of(mid) == kind_lo:
            a_lo = mid
        else:
            a_hi = mid
        widths.append(a_hi - a_lo)
        iterations += 1
    a_star = 0.5 * (a_lo + a_hi)
    star = shoot(a_star, params, dc, config, t_target, window)
    return BoundaryResult(a_star, a_lo, a_hi, kind_lo, kind_hi, iterations,
                          widths, star.report)


def _shot_cell(args) -> tuple:
    i, a, params, dc, config, t_target, window = args
    res = shoot(a, params, dc, config, t_target, window)
    return i, res


@dataclass
class ThresholdScan:
    a_grid: np.ndarray
    kinds: list
    shots: list
    boundaries: list

    def to_dict(self) -> dict:
        return {
            "a_grid": [float(a) for a in self.a_grid],
            "kinds": [k.value for k in self.kinds],
            "shots": [s.to_dict() for s in self.shots],
            "boundaries": [b.to_dict() for b in self.boundaries],
        }


def scan_thresholds(a_grid, params: ProblemParams,
                    dc: DerivedConstants | None = None,
                    config: IntegratorConfig | None = None,
                    t_target: float = 12.0,
                    window: tuple | None = None,
                    jobs: int = 1,
                    bisect: bool = True) -> ThresholdScan:
    """Shoot a grid of amplitudes and bisect every kind change.

    The grid must be strictly increasing with at least 16 points.
    Results are merged by grid index, so the outcome is identical for
    any worker count.
    """
    a_grid = np.asarray(a_grid, dtype=float)
    if a_grid.size < 16:
        raise ValueError(f"grid needs >= 16 points, got {a_grid.size}")
    if not np.all(np.diff(a_grid) > 0.0):
        raise ValueError("grid must be strictly increasing")
    if dc is None:
        dc = derive_constants(params)
    tasks = [(i, float(a), params, dc, config, t_target, window)
             for i, a in enumerate(a_grid)]
    shots: list = [None] * a_grid.size
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for i, res in pool.map(_shot_cell, tasks, chunksize=4):
                shots[i] = res
    else:
        for task in tasks:
            i, res = _shot_cell(task)
            shots[i] = res
    kinds = [s.kind for s in shots]
    boundaries = []
    if bisect:
        for i in range(len(kinds) - 1):
            if kinds[i] != kinds[i + 1]:
                boundaries.append(bisect_boundary(
                    float(a_grid[i]), float(a_grid[i + 1]), params, dc,
                    config, t_target, window))
    return ThresholdScan(a_grid, kinds, shots, boundaries)


@dataclass
class ConnectingOrbit:
    direction: str
    trajectory: Trajectory
    report_infinity: ClassificationReport
    report_origin: ClassificationReport

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "report_infinity": self.report_infinity.to_dict(),
            "report_origin": self.report_origin.to_dict(),
        }


# seeding depth and crossing span, frozen by rate/stability calibration
CONNECT_DEFAULTS = {
    "from_infinity": {"t_seed": 14.0, "t_end": -34.0},
    "from_origin": {"t_seed": -10.0, "t_end": 20.0},
}
END_WINDOW = 4.0


def connecting_orbit(params: ProblemParams, dc: DerivedConstants,
                     direction: str,
                     eps: float | None = None,
                     t_seed: float | None = None,
                     t_end: float | None = None,
                     config: IntegratorConfig | None = None
                     ) -> ConnectingOrbit:
    """Seed the singular behavior at one end and integrate to the other.

    from_infinity seeds (lambda1 + eps, eps delta) at t_seed in the
    alpha1 frame and integrates down to t_end; from_origin does the
    mirror run in the alpha2 frame.  Both ends are classified on
    END_WINDOW-wide windows hugging the respective end.  eps defaults to
    1e-4 lambda and must stay within 1e-3 lambda (eps = 0 runs on the
    equilibrium and records the numerical drift).
    """
    flags = classify_regime(params, dc)
    wanted = {"from_infinity": "singular_at_infinity",
              "from_origin": "singular_at_origin"}
    if direction not in wanted:
        raise ValueError(f"direction must be one of {sorted(wanted)}, "
                         f"got {direction!r}")
    if flags.theorem3_case != wanted[direction]:
        raise ValueError(
            f"{direction} needs regime {wanted[direction]}, but these "
            f"parameters give {flags.theorem3_case!r}")
    end = "infinity" if direction == "from_infinity" else "origin"
    lam = dc.lambda1 if end == "infinity" else dc.lambda2
    if eps is None:
        eps = 1e-4 * lam
    if abs(eps) > 1e-3 * lam:
        raise ValueError(f"|eps| = {abs(eps)} exceeds 1e-3 lambda = "
                         f"{1e-3 * lam}")
    defaults = CONNECT_DEFAULTS[direction]
    if t_seed is None:
        t_seed = defaults["t_seed"]
    if t_end is None:
        t_end = defaults["t_end"]
    if eps == 0.0:
        start = State(t_seed, lam, 0.0)
    else:
        start = singular_seed_start(end, eps, t_seed, params, dc)
    frame = seed_frame(end, dc)
    traj = integrate(start, frame, t_end, params, config)

    lo, hi = min(t_seed, t_end), max(t_seed, t_end)
    win_seed = (t_seed - END_WINDOW, t_seed) if t_seed == hi \
        else (t_seed, t_seed + END_WINDOW)
    win_far = (t_end, t_end + END_WINDOW) if t_end == lo \
        else (t_end - END_WINDOW, t_end)
    rep_seed = classify_end(traj, dc, end, window=win_seed)
    far_end = "origin" if end == "infinity" else "infinity"
    rep_far = classify_end(traj, dc, far_end, window=win_far)
    if end == "infinity":
        return ConnectingOrbit(direction, traj, rep_seed, rep_far)
    return ConnectingOrbit(direction, traj, rep_far, rep_seed)


@dataclass(frozen=True)
class DifferenceProbe:
    """Decay fit of the pointwise gap between two infinity-seeded runs."""

    rate: float | None
    saturated: bool
    identical: bool
    max_abs_diff: float
    window: tuple
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rate": self.rate,
            "saturated": self.saturated,
            "identical": self.identical,
            "max_abs_diff": self.max_abs_diff,
            "window": list(self.window),
            "diagnostics": dict(self.diagnostics),
        }


def difference_decay_probe(params: ProblemParams, dc: DerivedConstants,
                           eps1: float, eps2: float,
                           t_seed: float = 14.0, span: float = 8.0,
                           config: IntegratorConfig | None = None
                           ) -> DifferenceProbe:
    """Fit the envelope decay rate of |v1 - v2| near the seeded end.

    The two runs share one sampling grid; equal eps values reproduce
    bit-identical trajectories (determinism), reported as identical with
    no rate.  The forced response cancels in the difference, so the rate
    measured here is the homogeneous one (-c1coef/2 toward the end).
    """
    if config is None:
        config = IntegratorConfig()
    t_end = t_seed - span
    trajs = []
    for eps in (eps1, eps2):
        start = singular_seed_start("infinity", eps, t_seed, params, dc)
        trajs.append(integrate(start, Frame(dc.alpha1), t_end, params,
                               config))
    n = min(trajs[0].t.size, trajs[1].t.size)
    if not np.array_equal(trajs[0].t[:n], trajs[1].t[:n]):
        raise RuntimeError("probe runs disagree on the sampling grid")
    t = trajs[0].t[:n]
    diff = trajs[0].v[:n] - trajs[1].v[:n]
    window = (float(t.min()), float(t.max()))
    if np.array_equal(trajs[0].v[:n], trajs[1].v[:n]):
        return DifferenceProbe(None, False, True, 0.0, window)
    adiff = np.abs(diff)
    floor = 100.0 * config.atol
    if float(adiff.max()) < floor:
        return DifferenceProbe(None, True, False, float(adiff.max()), window)
    order = np.argsort(t)
    ts, ds = t[order], adiff[order]
    pt, pv, pk = quadratic_extrema(ts, ds)
    keep = (pv > floor) & (pk > 0)
    diag = {"n_peaks": int(keep.sum())}
    if int(keep.sum()) >= 2:
        rate = float(np.polyfit(pt[keep], np.log(pv[keep]), 1)[0])
        diag["fit"] = "envelope_peaks"
    else:
        mask = ds > floor
        rate = float(np.polyfit(ts[mask], np.log(ds[mask]), 1)[0])
        diag["fit"] = "raw_samples"
    return DifferenceProbe(rate, False, False, float(adiff.max()), window,
                           diag)
