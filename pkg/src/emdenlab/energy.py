"""Energy identities and a-priori bounds in the singular frames.

In the alpha1 frame the autonomous part of the system has the Lyapunov
energy E = vdot^2/2 - lambda1^{p-1} v^2/2 + v^{p+1}/(p+1); the damping
term c1 vdot and the non-autonomous q-term inject the two work integrals
tracked here, and E(t) - forcing_work(t) - damping_work(t) is constant
along trajectories (the discrete residual of that identity is the main
correctness probe for the integrator).  The alpha2 frame swaps the roles
of the two power terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from .integrate import TerminationKind, Trajectory
from .params import DerivedConstants
from .serialize import fmt_float

_FRAME_TOL = 1e-9


def potential_b(v, dc: DerivedConstants):
    """b(v) = v^{q+1}/(q+1) - lambda2^{q-1} v^2/2 (alpha2-frame well)."""
    if dc.lambda2 is None:
        raise ValueError("potential_b needs a defined lambda2")
    q = dc.params.q
    v = np.asarray(v, dtype=float)
    out = np.where(v > 0.0, np.abs(v) ** (q + 1.0), 0.0) / (q + 1.0) \
        - dc.lambda2 ** (q - 1.0) * v ** 2 / 2.0
    return float(out) if out.ndim == 0 else out


def potential_b1(v, dc: DerivedConstants):
    """b1(v) = v^{p+1}/(p+1) - lambda1^{p-1} v^2/2 (alpha1-frame well)."""
    if dc.lambda1 is None:
        raise ValueError("potential_b1 needs a defined lambda1")
    p = dc.params.p
    v = np.asarray(v, dtype=float)
    out = np.where(v > 0.0, np.abs(v) ** (p + 1.0), 0.0) / (p + 1.0) \
        - dc.lambda1 ** (p - 1.0) * v ** 2 / 2.0
    return float(out) if out.ndim == 0 else out


def potential_shape(dc: DerivedConstants, which: str = "b"):
    """(critical point, second positive zero, value at the critical point).

    The well v^{k+1}/(k+1) - lambda^{k-1} v^2/2 has its unique positive
    critical point at v = lambda and its second zero at
    lambda ((k+1)/2)^{1/(k-1)}.
    """
    if which == "b":
        lam, k, fn = dc.lambda2, dc.params.q, potential_b
    elif which == "b1":
        lam, k, fn = dc.lambda1, dc.params.p, potential_b1
    else:
        raise ValueError(f"which must be 'b' or 'b1', got {which!r}")
    if lam is None:
        raise ValueError(f"potential {which} undefined: no singular amplitude")
    zero = lam * ((k + 1.0) / 2.0) ** (1.0 / (k - 1.0))
    return lam, zero, fn(lam, dc)


def _frame_role(traj: Trajectory, dc: DerivedConstants):
    """(autonomous exponent, its toggle, damping c, forcing exponent,
    forcing weight-exponent, forcing toggle) for the trajectory's frame."""
    a = traj.frame.alpha
    p, q = dc.params.p, dc.params.q
    if abs(a - dc.alpha1) <= _FRAME_TOL:
        return p, dc.params.k1, dc.c1coef, q, dc.delta, dc.params.k2
    if abs(a - dc.alpha2) <= _FRAME_TOL:
        return q, dc.params.k2, dc.c2coef, p, dc.delta2, dc.params.k1
    raise ValueError(
        f"energy accounting is defined in the alpha1 ({dc.alpha1}) or "
        f"alpha2 ({dc.alpha2}) frame, not alpha={a}")


@dataclass
class EnergyTrace:
    """Pointwise energy and cumulative work along a trajectory.

    Samples are stored ascending in t regardless of integration
    direction.  Work integrals are signed so that
    energy - forcing_work - damping_work is constant.
    """

    t: np.ndarray
    energy: np.ndarray
    forcing_work: np.ndarray
    damping_work: np.ndarray

    def residual(self) -> np.ndarray:
        return (self.energy - self.forcing_work - self.damping_work
                - self.energy[0])

    def balance_residual(self) -> float:
        """Worst energy-balance mismatch over any sub-interval, relative
        to the energy scale."""
        res = self.residual()
        scale = float(np.max(np.abs(self.energy)))
        if scale == 0.0:
            scale = 1.0
        return float((res.max() - res.min()) / scale)


def energy_trace(traj: Trajectory, dc: DerivedConstants) -> EnergyTrace:
    """Energy and work integrals for a singular-frame trajectory.

    Requires the trajectory frame to be alpha1 or alpha2 (the only
    frames with an autonomous well).  Quadrature is cumulative Simpson
    on the sample grid; the dense stride controls the residual floor.
    """
    k_auto, tog_auto, c, k_force, e_force, tog_force = _frame_role(traj, dc)
    order = np.argsort(traj.t)
    t = traj.t[order]
    v = traj.v[order]
    vd = traj.vdot[order]
    a = traj.frame.alpha
    lin = a * (dc.params.n - 2.0 - a)
    vp = np.maximum(v, 0.0)
    energy = (0.5 * vd ** 2 - 0.5 * lin * v ** 2
              + tog_auto * vp ** (k_auto + 1.0) / (k_auto + 1.0))
    if t.size < 2:
        zero = np.zeros_like(t)
        return EnergyTrace(t, energy, zero, zero.copy())
    f_rate = -tog_force * np.exp(e_force * t) * vp ** k_force * vd
    d_rate = -c * vd ** 2
    forcing = cumulative_simpson(f_rate, x=t, initial=0.0)
    damping = cumulative_simpson(d_rate, x=t, initial=0.0)
    return EnergyTrace(t, energy, forcing, damping)


ENERGY_CSV_HEADER = "t,E,forcing_work,damping_work"


def write_energy_csv(trace: EnergyTrace, path) -> None:
    lines = [ENERGY_CSV_HEADER]
    for i in range(trace.t.size):
        lines.append(",".join(fmt_float(x) for x in
                              (trace.t[i], trace.energy[i],
                               trace.forcing_work[i], trace.damping_work[i])))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass(frozen=True)
class BoundReport:
    """Quantitative a-priori bound check over one t-window."""

    window: tuple
    applicable: bool
    reason: str
    sup_v: float
    sup_abs_vdot: float
    integral_vdot_sq: float
    mass_monotone_ok: bool
    flux_monotone_ok: bool
    margins: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "window": list(self.window),
            "applicable": self.applicable,
            "reason": self.reason,
            "sup_v": self.sup_v,
            "sup_abs_vdot": self.sup_abs_vdot,
            "integral_vdot_sq": self.integral_vdot_sq,
            "mass_monotone_ok": self.mass_monotone_ok,
            "flux_monotone_ok": self.flux_monotone_ok,
            "margins": dict(self.margins),
        }


def apriori_bound_report(traj: Trajectory, dc: DerivedConstants,
                         window: tuple | None = None,
                         step_tol: float = 1e-10) -> BoundReport:
    """Tail-bound observables over a window of a positive trajectory.

    sup v and sup |vdot| are read in the trajectory's own frame;
    r^{n-2} u nondecreasing and r^{n-1} u' nonincreasing are the two
    monotone quantities of the radial operator, checked per sample step
    with relative slack step_tol.  Trajectories that lost positivity are
    flagged non-applicable (the bounds concern positive solutions).
    """
    t_lo_all, t_hi_all = float(np.min(traj.t)), float(np.max(traj.t))
    if window is None:
        span = t_hi_all - t_lo_all
        window = (t_hi_all - 0.25 * span, t_hi_all)
    t_lo, t_hi = float(window[0]), float(window[1])
    if not (t_lo_all - 1e-12 <= t_lo < t_hi <= t_hi_all + 1e-12):
        raise ValueError(f"window {window} is not inside the sampled span "
                         f"[{t_lo_all}, {t_hi_all}]")
    order = np.argsort(traj.t)
    t = traj.t[order]
    mask = (t >= t_lo) & (t <= t_hi)
    if int(mask.sum()) < 4:
        raise ValueError("window contains fewer than 4 samples")
    t = t[mask]
    v = traj.v[order][mask]
    vd = traj.vdot[order][mask]
    n = dc.params.n
    a = traj.frame.alpha
    u = v * np.exp(-a * t)
    dudr = (vd - a * v) * np.exp(-(a + 1.0) * t)
    mass = np.exp((n - 2.0) * t) * u
    flux = np.exp((n - 1.0) * t) * dudr

    mass_scale = float(np.max(np.abs(mass))) or 1.0
    flux_scale = float(np.max(np.abs(flux))) or 1.0
    mass_steps = np.diff(mass) / mass_scale
    flux_steps = np.diff(flux) / flux_scale
    mass_ok = bool(np.all(mass_steps >= -step_tol))
    flux_ok = bool(np.all(flux_steps <= step_tol))

    term = traj.effective_termination()
    applicable = term.kind != TerminationKind.POSITIVITY_LOST
    reason = "" if applicable else (
        f"positivity lost at t={term.t}; bounds concern positive solutions")

    return BoundReport(
        window=(t_lo, t_hi),
        applicable=applicable,
        reason=reason,
        sup_v=float(np.max(v)),
        sup_abs_vdot=float(np.max(np.abs(vd))),
        integral_vdot_sq=float(np.trapezoid(vd ** 2, t)),
        mass_monotone_ok=mass_ok,
        flux_monotone_ok=flux_ok,
        margins={
            "min_mass_step_rel": float(np.min(mass_steps)),
            "max_flux_step_rel": float(np.max(flux_steps)),
        },
    )
