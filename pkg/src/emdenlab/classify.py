"""End-behavior classification of log-frame trajectories.

Near either end a positive solution does one of: cross zero, oscillate
persistently around the singular amplitude (critical exponents), settle
on the amplitude (slow decay, i.e. the singular behavior), or follow the
regular power law (r^{-(n-2)} at infinity, a constant at the origin).
The decision procedure reads windowed statistics of v in the end's own
frame: sign changes of vdot, relative amplitude, envelope contraction,
least-squares drift, and a fixed-exponent power-law fit of u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .energy import potential_b, potential_b1
from .integrate import TerminationKind, Trajectory
from .params import DerivedConstants, classify_regime


class Kind(str, Enum):
    CROSSES_ZERO = "crosses_zero"
    OSCILLATORY = "oscillatory"
    SLOW_DECAY_SINGULAR = "slow_decay_singular"
    FAST_DECAY_REGULAR = "fast_decay_regular"
    REGULAR_AT_ORIGIN = "regular_at_origin"
    UNDETERMINED = "undetermined"


class SaturationError(RuntimeError):
    """The deviation from the limit sits at the integrator noise floor."""


def _end_alpha(dc: DerivedConstants, end: str) -> float:
    if end == "infinity":
        return dc.alpha1
    if end == "origin":
        return dc.alpha2
    raise ValueError(f"end must be 'origin' or 'infinity', got {end!r}")


def _end_lambda(dc: DerivedConstants, end: str):
    return dc.lambda1 if end == "infinity" else dc.lambda2


def default_window(traj: Trajectory, end: str) -> tuple:
    """Last quarter of the sampled span on the side facing the end."""
    t_lo, t_hi = float(np.min(traj.t)), float(np.max(traj.t))
    span = t_hi - t_lo
    if end == "infinity":
        return (t_hi - 0.25 * span, t_hi)
    return (t_lo, t_lo + 0.25 * span)


def _window_arrays(traj: Trajectory, alpha_end: float, window: tuple):
    """(t, v, vdot) re-expressed in the alpha_end frame, ascending in t."""
    order = np.argsort(traj.t)
    t = traj.t[order]
    mask = (t >= window[0] - 1e-12) & (t <= window[1] + 1e-12)
    if int(mask.sum()) < 10:
        raise ValueError(
            f"window {window} holds {int(mask.sum())} samples; need >= 10")
    t = t[mask]
    v = traj.v[order][mask]
    vd = traj.vdot[order][mask]
    d = alpha_end - traj.frame.alpha
    if d != 0.0:
        fac = np.exp(d * t)
        v, vd = fac * v, fac * (vd + d * v)
    return t, v, vd


def quadratic_extrema(t: np.ndarray, y: np.ndarray):
    """Interior extrema refined by a local parabola.

    Returns (times, values, kinds) with kinds +1 for maxima, -1 for
    minima; consecutive extrema of a sampled sequence alternate.
    """
    times, values, kinds = [], [], []
    for i in range(1, t.size - 1):
        d0 = y[i] - y[i - 1]
        d1 = y[i + 1] - y[i]
        if d0 * d1 < 0.0 or (d0 != 0.0 and d1 == 0.0 and i + 1 == t.size - 1):
            denom = y[i - 1] - 2.0 * y[i] + y[i + 1]
            off = 0.0 if denom == 0.0 else 0.5 * (y[i - 1] - y[i + 1]) / denom
            h = 0.5 * (t[i + 1] - t[i - 1])
            times.append(t[i] + off * h)
            values.append(y[i] - 0.25 * (y[i - 1] - y[i + 1]) * off)
            kinds.append(1 if d0 > 0.0 else -1)
    return np.array(times), np.array(values), np.array(kinds)


@dataclass(frozen=True)
class ClassificationReport:
    end: str
    kind: Kind
    window: tuple
    fitted_constant: float | None
    residual: float | None
    rate: float | None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "end": self.end,
            "kind": self.kind.value,
            "window": list(self.window),
            "fitted_constant": self.fitted_constant,
            "residual": self.residual,
            "rate": self.rate,
            "diagnostics": {k: (v.value if isinstance(v, Enum) else v)
                            for k, v in self.diagnostics.items()},
        }


def fit_power_tail(traj: Trajectory, exponent_hypothesis: float,
                   window: tuple) -> tuple:
    """Fit u ~ C r^{-s} with the slope FIXED to the hypothesis s.

    Only the intercept is free: ln C = mean(ln u + s t); the returned
    residual is the RMS of ln u + s t around it.  u must be positive on
    the window.
    """
    order = np.argsort(traj.t)
    t = traj.t[order]
    mask = (t >= window[0] - 1e-12) & (t <= window[1] + 1e-12)
    if int(mask.sum()) < 2:
        raise ValueError(f"window {window} holds fewer than 2 samples")
    t = t[mask]
    u = traj.u[order][mask]
    if np.any(u <= 0.0):
        raise ValueError("power-law fit needs u > 0 on the window")
    shifted = np.log(u) + exponent_hypothesis * t
    intercept = float(np.mean(shifted))
    resid = float(np.sqrt(np.mean((shifted - intercept) ** 2)))
    return math.exp(intercept), resid


def fit_exponential_rate(traj: Trajectory, lambda_target: float,
                         window: tuple) -> float:
    """ln|v - lambda| slope over the window (the approach rate).

    When v - lambda changes sign inside the window the fit runs on the
    envelope peaks instead of the raw samples.  Raises SaturationError
    when the deviation never rises above 100 atol (nothing to fit).
    """
    t, v, _ = _window_arrays(traj, traj.frame.alpha, window)
    w = v - lambda_target
    atol = traj.config.atol if traj.config is not None else 1e-12
    floor = 100.0 * atol
    if float(np.max(np.abs(w))) < floor:
        raise SaturationError(
            f"max |v - lambda| = {np.max(np.abs(w)):.3e} is below "
            f"100 atol = {floor:.3e}")
    signs = np.sign(w)
    flips = int(np.sum(signs[:-1] * signs[1:] < 0))
    if flips > 0:
        # envelope of an oscillatory approach: peaks of |w| only (the
        # near-zero cusps are not quadratic and would skew the fit)
        pt, pv, pk = quadratic_extrema(t, np.abs(w))
        keep = (pv > floor) & (pk > 0)
        if int(keep.sum()) >= 2:
            slope = np.polyfit(pt[keep], np.log(pv[keep]), 1)[0]
            return float(slope)
    mask = np.abs(w) > floor
    if int(mask.sum()) < 2:
        raise SaturationError("fewer than 2 samples above the noise floor")
    slope = np.polyfit(t[mask], np.log(np.abs(w[mask])), 1)[0]
    return float(slope)


def classify_end(traj: Trajectory, dc: DerivedConstants, end: str,
                 tol_class: float = 0.02, window: tuple | None = None,
                 osc_relamp: float = 0.05, slope_tol: float = 1e-3,
                 power_resid_tol: float = 0.05,
                 spiral_contraction: float = 1.5) -> ClassificationReport:
    """Classify the behavior of a trajectory toward one end.

    Decision order: (1) an event termination decides immediately
    (positivity lost => CROSSES_ZERO); (2) with >= 3 sign changes of
    vdot, a contracting envelope (first/last deviation > spiral_contraction)
    centered on lambda is SLOW_DECAY_SINGULAR, a fat envelope
    (relative amplitude > osc_relamp) is OSCILLATORY; (3) a flat window
    (|drift| < slope_tol) with mean within tol_class of lambda is
    SLOW_DECAY_SINGULAR; (4) a fixed-exponent power fit of u with RMS
    ln-residual < power_resid_tol gives the regular kind for the end;
    (5) otherwise UNDETERMINED, with all statistics in diagnostics.
    """
    alpha_end = _end_alpha(dc, end)
    term = traj.effective_termination()
    # event terminations decide only the side where integration stopped;
    # the seed side of a crossing shot still has analyzable data
    terminal_end = "infinity" if traj.t[-1] >= traj.t[0] else "origin"
    if end == terminal_end:
        if term.kind == TerminationKind.POSITIVITY_LOST:
            return ClassificationReport(
                end, Kind.CROSSES_ZERO, (term.t, term.t), None, None, None,
                {"t_cross": term.t, "termination": term.kind})
        if term.kind in (TerminationKind.AMPLITUDE_CAP,
                         TerminationKind.STEP_UNDERFLOW):
            return ClassificationReport(
                end, Kind.UNDETERMINED, (term.t, term.t), None, None, None,
                {"termination": term.kind,
                 "reason": "integration did not reach the requested end"})

    if window is None:
        window = default_window(traj, end)
    t, v, vd = _window_arrays(traj, alpha_end, window)
    lam = _end_lambda(dc, end)

    mean = float(np.mean(v))
    vmax, vmin = float(np.max(v)), float(np.min(v))
    relamp = (vmax - vmin) / abs(mean) if mean != 0.0 else math.inf
    signs = np.sign(vd)
    signs = signs[signs != 0.0]
    nsc = int(np.sum(signs[:-1] * signs[1:] < 0)) if signs.size > 1 else 0
    ext_t, ext_v, _ = quadratic_extrema(t, v)
    contraction = None
    if ext_v.size >= 2:
        first_dev = abs(ext_v[0] - mean)
        last_dev = abs(ext_v[-1] - mean)
        contraction = math.inf if last_dev == 0.0 else first_dev / last_dev
    slope = float(np.polyfit(t, v, 1)[0])
    diag = {"mean": mean, "lambda": lam, "relamp": relamp, "nsc": nsc,
            "slope": slope, "contraction": contraction,
            "n_extrema": int(ext_v.size)}

    def _rate():
        if lam is None:
            return None
        try:
            return fit_exponential_rate(traj, lam, window)
        except (SaturationError, ValueError):
            return None

    lam_ok = lam is not None and abs(mean - lam) <= tol_class * lam
    if nsc >= 3:
        if contraction is not None and contraction > spiral_contraction:
            # contracting spiral onto the equilibrium: slope gate waived
            if lam_ok:
                return ClassificationReport(
                    end, Kind.SLOW_DECAY_SINGULAR, window, mean,
                    abs(mean - lam) / lam, _rate(), diag)
            diag["reason"] = "contracting spiral away from lambda"
            return ClassificationReport(end, Kind.UNDETERMINED, window,
                                        None, None, None, diag)
        if relamp > osc_relamp:
            return ClassificationReport(
                end, Kind.OSCILLATORY, window, mean, None, None, diag)

    if abs(slope) < slope_tol and lam_ok:
        return ClassificationReport(
            end, Kind.SLOW_DECAY_SINGULAR, window, mean,
            abs(mean - lam) / lam, _rate(), diag)

    hypothesis = float(dc.params.n - 2) if end == "infinity" else 0.0
    try:
        coef, resid = fit_power_tail(traj, hypothesis, window)
    except ValueError:
        coef, resid = None, None
    diag["power_residual"] = resid
    if resid is not None and resid < power_resid_tol:
        kind = (Kind.FAST_DECAY_REGULAR if end == "infinity"
                else Kind.REGULAR_AT_ORIGIN)
        return ClassificationReport(end, kind, window, coef, resid, None,
                                    diag)
    diag["reason"] = "no decision rule matched"
    return ClassificationReport(end, Kind.UNDETERMINED, window, None, None,
                                None, diag)


@dataclass(frozen=True)
class OscillationEnvelope:
    """Extrema bookkeeping for persistently oscillating trajectories.

    mu1/mu2 are the means of the 3 minima/maxima nearest the requested
    end; at a critical exponent both envelope branches must carry the
    same potential value (b or b1), tracked by b_match_rel.
    """

    end: str
    times_min: np.ndarray
    values_min: np.ndarray
    times_max: np.ndarray
    values_max: np.ndarray
    mu1: float
    mu2: float
    spread_min: float
    spread_max: float
    potential: str
    b_mu1: float
    b_mu2: float
    b_match_rel: float

    @property
    def n_extrema(self) -> int:
        return int(self.values_min.size + self.values_max.size)

    def to_dict(self) -> dict:
        return {
            "end": self.end,
            "times_min": [float(x) for x in self.times_min],
            "values_min": [float(x) for x in self.values_min],
            "times_max": [float(x) for x in self.times_max],
            "values_max": [float(x) for x in self.values_max],
            "mu1": self.mu1,
            "mu2": self.mu2,
            "spread_min": self.spread_min,
            "spread_max": self.spread_max,
            "potential": self.potential,
            "b_mu1": self.b_mu1,
            "b_mu2": self.b_mu2,
            "b_match_rel": self.b_match_rel,
            "n_extrema": self.n_extrema,
        }


def oscillation_envelope(traj: Trajectory, dc: DerivedConstants,
                         end: str) -> OscillationEnvelope:
    """Envelope statistics of v in the end frame over the whole span.

    Needs at least 3 minima and 3 maxima; extrema must interleave.  The
    potential used for the b-match is potential_b at critical q (or at
    the origin end off criticality) and potential_b1 at critical p (or
    at the infinity end).
    """
    alpha_end = _end_alpha(dc, end)
    window = (float(np.min(traj.t)), float(np.max(traj.t)))
    t, v, _ = _window_arrays(traj, alpha_end, window)
    ext_t, ext_v, ext_k = quadratic_extrema(t, v)
    if np.any(ext_k[1:] == ext_k[:-1]):
        raise ValueError("extrema do not interleave")
    mins = ext_k < 0
    maxs = ext_k > 0
    if int(mins.sum()) < 3 or int(maxs.sum()) < 3:
        raise ValueError(
            f"need >= 3 extrema of each kind, got {int(mins.sum())} minima "
            f"and {int(maxs.sum())} maxima")
    # orient so index -1 is nearest the requested end
    if end == "origin":
        ext_t, ext_v, ext_k = ext_t[::-1], ext_v[::-1], ext_k[::-1]
        mins, maxs = mins[::-1], maxs[::-1]
    tmin, vmin = ext_t[mins], ext_v[mins]
    tmax, vmax = ext_t[maxs], ext_v[maxs]
    mu1 = float(np.mean(vmin[-3:]))
    mu2 = float(np.mean(vmax[-3:]))
    npair = min(vmin.size, vmax.size)
    if not np.all(vmin[-npair:] < vmax[-npair:]):
        raise ValueError("envelope branches are not separated")

    flags = classify_regime(dc.params, dc)
    if flags.theorem2_case == "critical_q":
        pot, fn = "b", potential_b
    elif flags.theorem2_case == "critical_p":
        pot, fn = "b1", potential_b1
    elif end == "origin":
        pot, fn = "b", potential_b
    else:
        pot, fn = "b1", potential_b1
    b1v, b2v = float(fn(mu1, dc)), float(fn(mu2, dc))
    scale = max(abs(b1v), 1e-300)
    return OscillationEnvelope(
        end=end,
        times_min=tmin, values_min=vmin,
        times_max=tmax, values_max=vmax,
        mu1=mu1, mu2=mu2,
        spread_min=float(np.max(vmin[-3:]) - np.min(vmin[-3:])),
        spread_max=float(np.max(vmax[-3:]) - np.min(vmax[-3:])),
        potential=pot, b_mu1=b1v, b_mu2=b2v,
        b_match_rel=abs(b1v - b2v) / scale,
    )
