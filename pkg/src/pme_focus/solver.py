r"""
Conservative explicit finite-volume solver for the radial porous medium equation

.. math::

    \partial_t U = r^{1-d} \partial_r \left( r^{d-1} \partial_r U^m \right), \qquad 0 < r < r_{max},

with zero flux at both ends.  The density is marched; the pressure is only a
derived view used for interface location.  Time steps obey

.. math::

    \Delta t \le \mathrm{cfl}\, \frac{\Delta r^2}{m\, U_{max}^{m-1}},

which keeps the two-point flux scheme monotone (and therefore positive and
order preserving) for ``cfl <= 1/2``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import exact
from ._backend import kernel
from .errors import (
    CFLError, DomainTooSmallError, NoInterfaceError, PositivityError, PreconditionError)
from .exact import GasParams

logger = logging.getLogger(__name__)

MIN_CELLS = 16
_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class SolverConfig:
    params: GasParams
    rmax: float
    n: int
    cfl: float = 0.4
    eps_iface: Optional[float] = None
    eps_focus: Optional[float] = None
    t_start: float = 0.0
    t_end: float = 1.0

    def __post_init__(self):
        if not self.rmax > 0:
            raise PreconditionError(f"rmax = {self.rmax!r} must be positive")
        if int(self.n) != self.n or self.n < MIN_CELLS:
            raise PreconditionError(f"n = {self.n!r}: need an integer cell count >= {MIN_CELLS}")
        if not 0 < self.cfl < 1:
            raise PreconditionError(f"cfl = {self.cfl!r} must lie in (0, 1)")
        for name in ("eps_iface", "eps_focus"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise PreconditionError(f"{name} = {value!r} must be positive")
        if not self.t_end > self.t_start:
            raise PreconditionError("t_end must exceed t_start")

    @property
    def dx(self) -> float:
        return self.rmax / self.n

    @cached_property
    def grid(self) -> "Grid":
        return Grid(self.rmax, int(self.n), int(self.params.d))


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform cells on ``[0, rmax]`` with radial volume and face weights."""

    rmax: float
    n: int
    d: int = 1

    @property
    def dx(self) -> float:
        return self.rmax / self.n

    @cached_property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) * self.dx

    @cached_property
    def volumes(self) -> np.ndarray:
        return self.centers ** (self.d - 1) * self.dx

    @cached_property
    def step_scale(self) -> np.ndarray:
        return 1.0 / self.volumes

    @cached_property
    def face_weights(self) -> np.ndarray:
        """``r_face^(d-1) / dx``; zero on both walls."""
        faces = np.arange(self.n + 1) * self.dx
        w = faces ** (self.d - 1) / self.dx
        w[0] = 0.0
        w[-1] = 0.0
        return w

    @cached_property
    def stability_factor(self) -> float:
        """Largest ``k <= 1`` with ``k dx^2 (w_i + w_{i+1}) / vol_i <= 2`` for every cell.

        Equal to 1 for ``d = 1``; smaller near the origin when ``d > 1``.
        """
        w = self.face_weights
        spread = (w[:-1] + w[1:]) * self.step_scale * self.dx ** 2
        return float(min(1.0, 2.0 / spread.max()))


@dataclass(frozen=True, eq=False)
class SimState:
    """Cell-averaged densities at ``time``.

    ``v_ref`` is the maximum initial pressure; default thresholds scale with it.
    """

    time: float
    u: np.ndarray
    grid: Grid
    params: GasParams
    v_ref: float

    @property
    def r(self) -> np.ndarray:
        return self.grid.centers

    @property
    def pressure(self) -> np.ndarray:
        m = self.params.m
        return m / (m - 1.0) * self.u ** (m - 1.0)

    def with_u(self, u, time) -> "SimState":
        return replace(self, u=u, time=time)


@dataclass
class InterfaceTrace:
    """Time series of inner/outer interface estimates."""

    t: List[float] = field(default_factory=list)
    a: List[float] = field(default_factory=list)
    b: List[float] = field(default_factory=list)
    focus_time: Optional[float] = None

    def append(self, t, a, b):
        self.t.append(float(t))
        self.a.append(float(a))
        self.b.append(float(b))

    def __len__(self):
        return len(self.t)

    def arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.asarray(self.t), np.asarray(self.a), np.asarray(self.b)

    def monotonicity_onset(self, run: int = 10) -> Optional[int]:
        """First sample index after which ``run`` consecutive increments have
        ``da <= 0`` and ``db >= 0``; ``None`` if that never happens."""
        _, a, b = self.arrays()
        good = (np.diff(a) <= 0) & (np.diff(b) >= 0)
        streak = 0
        for k, ok in enumerate(good):
            streak = streak + 1 if ok else 0
            if streak == run:
                return k - run + 1
        return None

    def monotonicity_violations(self, onset: int) -> int:
        """Number of increments after ``onset`` breaking monotonicity."""
        _, a, b = self.arrays()
        da = np.diff(a[onset:])
        db = np.diff(b[onset:])
        return int(np.count_nonzero((da > 0) | (db < 0)))


@dataclass
class Snapshot:
    t: float
    r: np.ndarray
    u: np.ndarray
    v: np.ndarray


@dataclass
class RunResult:
    state: SimState
    trace: InterfaceTrace
    snapshots: List[Snapshot]
    steps: int
    max_mass_drift: float
    min_density: float


# {{{ initial data

def _cell_average(func, grid: Grid, breakpoints: Sequence[float]) -> np.ndarray:
    """Radially weighted cell averages by 8-point Gauss rules, split at ``breakpoints``."""
    dx = grid.dx
    lo = np.arange(grid.n) * dx
    out = np.zeros(grid.n)
    edges = [np.array([x0, x0 + dx]) for x0 in lo]
    for p in breakpoints:
        k = int(np.floor(p / dx))
        if 0 <= k < grid.n and lo[k] < p < lo[k] + dx:
            edges[k] = np.sort(np.append(edges[k], p))
    # group cells by number of pieces to keep evaluation vectorized
    for npieces in {len(e) - 1 for e in edges}:
        idx = [i for i, e in enumerate(edges) if len(e) - 1 == npieces]
        e = np.array([edges[i] for i in idx])
        left, right = e[:, :-1], e[:, 1:]
        half = 0.5 * (right - left)
        mid = 0.5 * (right + left)
        x = mid[..., None] + half[..., None] * _GAUSS_NODES
        vals = np.asarray(func(x)) * x ** (grid.d - 1)
        integral = (half[..., None] * _GAUSS_WEIGHTS * vals).sum(axis=(-1, -2))
        out[idx] = integral / grid.volumes[idx]
    return out


def init_annulus(config: SolverConfig, V0: Callable, breakpoints: Sequence[float] = ()) -> SimState:
    """Density cell averages for an initial pressure ``V0`` supported in ``(a, b)``.

    ``V0`` must be vectorized.  Kinks of ``V0`` (support edges) should be passed
    as ``breakpoints`` so that the quadrature does not straddle them.
    """
    grid = config.grid
    m = config.params.m
    dx = grid.dx

    probe = np.concatenate([[0.0], dx * (0.5 + 0.5 * _GAUSS_NODES),
                            [grid.rmax], grid.rmax - dx * (0.5 + 0.5 * _GAUSS_NODES)])
    if np.any(np.asarray(V0(probe)) > 0):
        raise PreconditionError(
            "initial pressure must vanish near r = 0 and near r = rmax (hole condition)")
    fine = np.linspace(0.0, grid.rmax, 8 * grid.n + 1)
    v_fine = np.asarray(V0(fine), dtype=float)
    if np.any(v_fine < 0):
        raise PreconditionError("initial pressure must be non-negative")

    def density(x):
        return ((m - 1.0) / m * np.maximum(np.asarray(V0(x), dtype=float), 0.0)) ** (1.0 / (m - 1.0))

    u = _cell_average(density, grid, breakpoints)
    u[u < 0] = 0.0
    v_ref = float(max(v_fine.max(), (m / (m - 1.0) * u ** (m - 1.0)).max()))
    return SimState(float(config.t_start), u, grid, config.params, v_ref)


def barenblatt_initial_state(config: SolverConfig, field: exact.BarenblattField,
                             t0: Optional[float] = None) -> SimState:
    """Start on the exact point-mass solution at ``t0`` (default ``tau + 0.01 |tau|``).

    ``config.t_start`` is replaced by ``t0``.
    """
    if t0 is None:
        t0 = field.tau + 0.01 * (-field.tau)
    if config.t_start != t0:
        config = replace(config, t_start=t0)
    lo, hi = exact.support_interval(t0, field)
    return init_annulus(config, lambda x: exact.barenblatt_pressure(x, t0, field), (lo, hi))


def sampled_state(config: SolverConfig, V, time: float, v_ref: Optional[float] = None) -> SimState:
    """Wrap pointwise pressure samples at the cell centers as a state."""
    m = config.params.m
    V = np.asarray(V, dtype=float)
    u = exact.density_from_pressure(V, m)
    return SimState(float(time), np.array(u, dtype=float), config.grid, config.params,
                    float(v_ref if v_ref is not None else V.max()))

# }}}


# {{{ stepping

def stable_dt(state: SimState, config: SolverConfig) -> float:
    """CFL time step for the current state (``inf`` at rest)."""
    m = config.params.m
    umax = float(state.u.max())
    if umax <= 0:
        return np.inf
    return config.cfl * config.grid.stability_factor * config.dx ** 2 / (m * umax ** (m - 1.0))


def _advance(u, config, t, t_stop, max_steps, focus_u):
    grid = config.grid
    dt_coef = config.cfl * grid.stability_factor * grid.dx ** 2
    return kernel.advance(u, grid.step_scale, grid.face_weights, float(config.params.m),
                          dt_coef, float(t), float(t_stop), int(max_steps), float(focus_u))


def step(state: SimState, config: SolverConfig, dt: Optional[float] = None) -> SimState:
    """One conservative explicit step; ``dt`` defaults to the CFL step."""
    limit = stable_dt(state, config)
    if dt is None:
        if not np.isfinite(limit):
            return state.with_u(state.u.copy(), state.time)
        dt = limit
    elif dt > limit * (1 + 1e-14):
        raise CFLError(f"dt = {dt:g} exceeds the stability limit {limit:g}")
    if not np.isfinite(limit):
        return state.with_u(state.u.copy(), state.time + dt)

    u = state.u.copy()
    t, _, status, _ = _advance(u, config, state.time, state.time + dt, 1, np.inf)
    if status == kernel.NEGATIVE:
        raise PositivityError(f"negative density after step at t = {t:g}")
    return state.with_u(u, t)


def total_mass(state: SimState) -> float:
    """``sum U_i r_i^(d-1) dx`` (no angular factor)."""
    return float(np.dot(state.u, state.grid.volumes))

# }}}


# {{{ interfaces and focusing

def _thresholds(state: SimState, config: SolverConfig) -> Tuple[float, float]:
    eps_iface = config.eps_iface if config.eps_iface is not None else 1e-8 * state.v_ref
    eps_focus = config.eps_focus if config.eps_focus is not None else 1e-6 * state.v_ref
    return eps_iface, eps_focus


def locate_interfaces(state: SimState, config: SolverConfig) -> Tuple[float, float]:
    """Inner and outer interface positions ``(a, b)``.

    The first (last) cell whose pressure exceeds ``eps_iface`` is found and the
    pressure is extrapolated linearly to zero through it and its inward
    neighbour.  A single supra-threshold cell yields its two faces.
    """
    eps, _ = _thresholds(state, config)
    V = state.pressure
    r = state.grid.centers
    dx = state.grid.dx
    above = np.flatnonzero(V > eps)
    if above.size == 0:
        raise NoInterfaceError("no cell exceeds the interface threshold")
    i, j = int(above[0]), int(above[-1])
    if i == j:
        return r[i] - 0.5 * dx, r[i] + 0.5 * dx

    if V[i + 1] > V[i]:
        a = r[i] - V[i] * dx / (V[i + 1] - V[i])
        a = max(a, r[i] - dx)
    else:
        a = r[i] - 0.5 * dx
    if V[j - 1] > V[j]:
        b = r[j] + V[j] * dx / (V[j - 1] - V[j])
        b = min(b, r[j] + dx)
    else:
        b = r[j] + 0.5 * dx
    return float(max(a, 0.0)), float(min(b, state.grid.rmax))


def _extrapolate_zero(trace: InterfaceTrace, dx: float) -> Optional[float]:
    """Zero crossing of a line fitted to the latest samples with ``3 dx < a < 30 dx``."""
    t, a, _ = trace.arrays()
    sel = (a > 3 * dx) & (a < 30 * dx)
    if np.count_nonzero(sel) < 3:
        sel = np.zeros_like(a, dtype=bool)
        sel[-10:] = True
        sel &= a > 0
    if np.count_nonzero(sel) < 2:
        return None
    slope, intercept = np.polyfit(t[sel], a[sel], 1)
    if slope >= 0:
        return None
    return float(-intercept / slope)


def detect_focus(state: SimState, config: SolverConfig,
                 trace: Optional[InterfaceTrace] = None) -> Optional[float]:
    """Focusing time estimate, or ``None`` while the first cell is below ``eps_focus``.

    With a trace the time is refined by extrapolating the recent inner
    interface samples linearly to ``a = 0``.
    """
    _, eps_focus = _thresholds(state, config)
    if not state.pressure[0] > eps_focus:
        return None
    if trace is not None and len(trace) >= 2:
        refined = _extrapolate_zero(trace, state.grid.dx)
        if refined is not None:
            return refined
    return float(state.time)


def run(state: SimState, config: SolverConfig, sample_every: int = 100,
        snapshot_times: Sequence[float] = (), check_domain: bool = True,
        max_steps: Optional[int] = None) -> RunResult:
    """March from ``state`` to ``config.t_end`` or until focusing.

    Interfaces are sampled every ``sample_every`` steps (and at the end); the
    density is copied at each of ``snapshot_times`` that is reached.
    """
    if not config.t_end > state.time:
        raise PreconditionError("t_end must exceed the state time")
    if sample_every < 1:
        raise PreconditionError("sample_every must be >= 1")
    m = config.params.m
    grid = state.grid
    dx = grid.dx
    eps_iface, eps_focus = _thresholds(state, config)
    focus_u = ((m - 1.0) / m * eps_focus) ** (1.0 / (m - 1.0))

    u = state.u.copy()
    t = state.time
    mass0 = float(np.dot(u, grid.volumes))
    trace = InterfaceTrace()
    snapshots: List[Snapshot] = []
    pending = sorted(s for s in snapshot_times if state.time <= s <= config.t_end)
    steps = 0
    drift = 0.0
    budget = np.inf if max_steps is None else max_steps

    def current():
        return state.with_u(u, t)

    def sample():
        nonlocal drift
        cur = current()
        try:
            a, b = locate_interfaces(cur, config)
        except NoInterfaceError:
            return
        if check_domain and b > grid.rmax - dx:
            raise DomainTooSmallError(
                f"outer interface b = {b:.6g} reached rmax - dx = {grid.rmax - dx:.6g} at t = {t:.6g}")
        trace.append(t, a, b)
        if mass0 > 0:
            drift = max(drift, abs(float(np.dot(u, grid.volumes)) - mass0) / mass0)

    while pending and pending[0] <= t:
        snapshots.append(Snapshot(t, grid.centers.copy(), u.copy(), current().pressure))
        pending.pop(0)
    sample()
    since_sample = 0
    status = kernel.MAX_STEPS
    while t < config.t_end and steps < budget:
        t_stop = pending[0] if pending else config.t_end
        chunk = int(min(sample_every - since_sample, budget - steps))
        t, taken, status, _ = _advance(u, config, t, t_stop, chunk, focus_u)
        steps += taken
        since_sample += taken
        if status == kernel.NEGATIVE:
            raise PositivityError(f"negative density at t = {t:.6g}")
        if status == kernel.AT_REST:
            t = config.t_end
            break
        while pending and pending[0] <= t:
            snapshots.append(Snapshot(t, grid.centers.copy(), u.copy(), current().pressure))
            pending.pop(0)
        if since_sample >= sample_every or status == kernel.FOCUSED:
            sample()
            since_sample = 0
        if status == kernel.FOCUSED:
            break
    if since_sample:
        sample()

    final = current()
    if status == kernel.FOCUSED:
        trace.focus_time = detect_focus(final, config, trace)
        logger.info("focus detected at t = %.6g (refined %.6g)", t, trace.focus_time)
    drift = max(drift, abs(float(np.dot(u, grid.volumes)) - mass0) / mass0 if mass0 > 0 else 0.0)
    return RunResult(final, trace, snapshots, steps, drift, float(u.min()))

# }}}
