"""Focusing-constant extraction and asymptotic comparisons.

The inner interface of a focusing flow behaves like ``c* (-t)^(1/alpha*)``
just before the focusing time, and the profile along rays ``t = eta x`` tends
to the Graveleau wave ``g_{c*}``.  This module fits ``c*`` from interface
traces and tabulates how fast closed-form or simulated profiles approach the
wave.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from . import exact
from .errors import AnalysisError, InsufficientSamplesError, NotFocusedError, PreconditionError
from .solver import InterfaceTrace, Snapshot

MIN_FIT_SAMPLES = 10


@dataclass(frozen=True)
class FitWindow:
    """Pre-focus window ``t in [-lo_frac |tau|, -hi_frac |tau|]``."""

    lo_frac: float = 0.1
    hi_frac: float = 0.005

    def __post_init__(self):
        if not (0 < self.hi_frac < self.lo_frac < 1):
            raise PreconditionError(
                f"fit window needs 0 < hi_frac < lo_frac < 1, got ({self.lo_frac}, {self.hi_frac})")

    def bounds(self, tau: float):
        scale = abs(tau)
        return -self.lo_frac * scale, -self.hi_frac * scale


@dataclass(frozen=True)
class CStarEstimate:
    c_hat: float
    stderr: float
    window: FitWindow
    n_samples: int
    residual_norm: float


def normalize_time(trace: InterfaceTrace) -> InterfaceTrace:
    """Shift all sample times so that focusing happens at ``t = 0``."""
    if trace.focus_time is None:
        raise NotFocusedError("trace has no focus time")
    shift = trace.focus_time
    return InterfaceTrace([t - shift for t in trace.t], list(trace.a), list(trace.b), 0.0)


def fit_through_origin(x, y):
    """Least-squares slope of ``y = c x``; returns ``(c, stderr, residual_norm)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sxx = float(x @ x)
    c = float(x @ y) / sxx
    resid = y - c * x
    rss = float(resid @ resid)
    dof = max(x.size - 1, 1)
    return c, float(np.sqrt(rss / dof / sxx)), float(np.sqrt(rss))


def estimate_c_star(trace: InterfaceTrace, window: FitWindow = FitWindow(), tau: float = -1.0,
                    alpha_star: float = exact.ALPHA_STAR_1D) -> CStarEstimate:
    """Fit ``a = c (-t)^(1/alpha_star)`` on a normalized trace inside ``window``."""
    if trace.focus_time is None:
        raise NotFocusedError("trace has no focus time")
    if trace.focus_time != 0.0:
        raise PreconditionError("trace must be normalized (focus_time == 0) before fitting")
    t, a, _ = trace.arrays()
    lo, hi = window.bounds(tau)
    sel = (t >= lo) & (t <= hi) & (a > 0)
    n = int(np.count_nonzero(sel))
    if n < MIN_FIT_SAMPLES:
        raise InsufficientSamplesError(
            f"{n} samples in fit window [{lo:g}, {hi:g}], need {MIN_FIT_SAMPLES}")
    c, stderr, rnorm = fit_through_origin((-t[sel]) ** (1.0 / alpha_star), a[sel])
    if not c > 0:
        raise AnalysisError(f"non-positive slope {c:g}: trace is not focusing")
    return CStarEstimate(c, stderr, window, n, rnorm)


@dataclass
class ErrorTable:
    """Relative errors indexed by ``(eta, x)``."""

    etas: np.ndarray
    xs: np.ndarray
    errors: np.ndarray

    def ratios(self) -> np.ndarray:
        """``err(x_{k+1}) / err(x_k)`` along each row."""
        return self.errors[:, 1:] / self.errors[:, :-1]

    def rows(self):
        for i, eta in enumerate(self.etas):
            for j, x in enumerate(self.xs):
                yield float(eta), float(x), float(self.errors[i, j])


def profile_convergence(evaluator: Callable, c: float, eta_list: Sequence[float],
                        x_list: Sequence[float]) -> ErrorTable:
    """``|V(x, eta x) / g_c(x, eta x) - 1|`` for each ``eta`` and ``x``."""
    if not c > 0:
        raise PreconditionError("c must be positive")
    etas = np.asarray(eta_list, dtype=float)
    xs = np.asarray(x_list, dtype=float)
    if np.any(etas >= 0):
        raise PreconditionError("eta must be negative")
    if np.any(1.0 + c * etas <= 0):
        raise PreconditionError("need 1 + c eta > 0: comparison point on or past the interface")
    if np.any(xs <= 0) or np.any(np.diff(xs) >= 0):
        raise PreconditionError("x_list must be positive and decreasing")
    err = np.empty((etas.size, xs.size))
    for i, eta in enumerate(etas):
        t = eta * xs
        V = np.asarray(evaluator(xs, t), dtype=float)
        g = np.asarray(exact.graveleau_pressure(xs, t, c))
        err[i] = np.abs(V / g - 1.0)
    return ErrorTable(etas, xs, err)


def taylor_remainder_scan(m: float, PiStar_list: Sequence[float], Pi2_list: Sequence[float],
                          pde_consistent: bool = False) -> np.ndarray:
    """``|Phi(PiStar Pi2, Pi2)/Pi2 - limit|``, rows over ``PiStar``, columns over ``Pi2``."""
    ps = np.asarray(PiStar_list, dtype=float)[:, None]
    p2 = np.asarray(Pi2_list, dtype=float)[None, :]
    if np.any(ps < 0):
        raise PreconditionError("PiStar must be non-negative")
    if np.any(ps * p2 >= 1):
        raise PreconditionError("need Pi1 = PiStar * Pi2 < 1")
    phi = exact.dimensionless_phi(ps * p2, p2, m, pde_consistent)
    return np.abs(phi / p2 - exact.phi_asymptote(ps, m, pde_consistent))


class SnapshotEvaluator:
    """Pressure at arbitrary ``(x, t)`` from stored profiles.

    Linear in ``x`` inside a snapshot, linear in ``t`` between the two
    snapshots bracketing ``t``.  ``time_shift`` is subtracted from the stored
    times, e.g. the numerical focusing time.
    """

    def __init__(self, snapshots: Sequence[Snapshot], time_shift: float = 0.0):
        if len(snapshots) < 2:
            raise PreconditionError("need at least two snapshots")
        order = np.argsort([s.t for s in snapshots])
        self.snapshots = [snapshots[k] for k in order]
        self.times = np.array([s.t for s in self.snapshots]) - time_shift

    def _at(self, k: int, x):
        s = self.snapshots[k]
        return np.interp(x, s.r, s.v)

    def __call__(self, x, t):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        t = np.broadcast_to(np.asarray(t, dtype=float), x.shape)
        out = np.empty_like(x)
        for i, (xi, ti) in enumerate(zip(x, t)):
            if not self.times[0] <= ti <= self.times[-1]:
                raise PreconditionError(f"t = {ti:g} outside the snapshot range")
            k = int(np.searchsorted(self.times, ti, side="right")) - 1
            k = min(k, len(self.times) - 2)
            w = (ti - self.times[k]) / (self.times[k + 1] - self.times[k])
            out[i] = (1 - w) * self._at(k, xi) + w * self._at(k + 1, xi)
        return out


def observed_orders(h: Sequence[float], err: Sequence[float]) -> np.ndarray:
    """Pairwise convergence orders ``log(e_k/e_{k+1}) / log(h_k/h_{k+1})``."""
    h = np.asarray(h, dtype=float)
    err = np.asarray(err, dtype=float)
    return np.log(err[:-1] / err[1:]) / np.log(h[:-1] / h[1:])


def compare_with_exact(estimate: CStarEstimate, xi: float, tau: float, m: float,
                       pde_consistent: bool = False) -> Dict[str, float]:
    c_exact, p = exact.c_star_symmetric(xi, tau, m, pde_consistent)
    return {"c_hat": estimate.c_hat, "stderr": estimate.stderr, "c_star_exact": c_exact,
            "p": p, "rel_err": abs(estimate.c_hat - c_exact) / c_exact}


def synthetic_trace(a_of_t: Callable, times: Sequence[float], focus_time: Optional[float] = 0.0,
                    b_of_t: Optional[Callable] = None) -> InterfaceTrace:
    """Trace built from an interface law, for checks of the fitting code."""
    tr = InterfaceTrace(focus_time=focus_time)
    for t in times:
        tr.append(t, a_of_t(t), b_of_t(t) if b_of_t is not None else 2.0)
    return tr
