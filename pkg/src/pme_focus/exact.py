r"""
Closed-form solutions of the porous medium equation in pressure form

.. math::

    \partial_t V = (m-1) V (\partial_{rr} + \tfrac{d-1}{r}\partial_r) V + (\partial_r V)^2,
    \qquad V = \frac{m}{m-1} U^{m-1}.

Contents: the Barenblatt point-mass solution, the one-dimensional Graveleau
focusing waves, the focusing pair obtained by releasing two symmetric point
masses so that they touch at the origin at ``t = 0``, and the dimensionless
reduction of that pair whose small-``x`` expansion yields the focusing
constant ``c* = p * beta``.

All evaluators accept scalars or numpy arrays and broadcast; scalar inputs give
Python floats back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import integrate

from .errors import PreconditionError

# one-dimensional Graveleau exponents, independent of m
ALPHA_STAR_1D = 1.0
GAMMA_1D = -1.0


def _out(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def _check_m(m: float) -> None:
    if not m > 1.0:
        raise PreconditionError(
            f"m = {m!r}: slow diffusion requires m > 1 (m <= 1 is fast/critical diffusion)"
        )


def _positive_part(bracket):
    # rounding can leave values like -1e-16 where the exact bracket is 0
    return np.maximum(bracket, 0.0)


# {{{ constants

def _beta(m: float, pde_consistent: bool) -> float:
    return 1.0 / (m + 1.0) if pde_consistent else 1.0 / (m - 1.0)


def derived_constants(m: float, pde_consistent: bool = False) -> Tuple[float, float]:
    """Return ``(beta, B)`` with ``beta = 1/(m-1)`` and ``B = (m-1)/(2m(m+1))``.

    ``pde_consistent=True`` switches ``beta`` to ``1/(m+1)``, the exponent for
    which the point-source formula below actually satisfies the pressure
    equation and conserves mass.  ``B`` is the same in both cases.
    """
    _check_m(m)
    return _beta(m, pde_consistent), (m - 1.0) / (2.0 * m * (m + 1.0))


@dataclass(frozen=True)
class GasParams:
    """Medium exponent ``m``, space dimension ``d`` and the choice of ``beta``.

    See :func:`derived_constants` for ``pde_consistent``.
    """

    m: float
    d: int = 1
    pde_consistent: bool = False

    def __post_init__(self):
        _check_m(self.m)
        if int(self.d) != self.d or self.d < 1:
            raise PreconditionError(f"d = {self.d!r}: dimension must be an integer >= 1")

    @property
    def beta(self) -> float:
        return _beta(self.m, self.pde_consistent)

    @property
    def bigB(self) -> float:
        return (self.m - 1.0) / (2.0 * self.m * (self.m + 1.0))


def pressure_from_density(U, m: float):
    """Scaled pressure ``V = m/(m-1) U^(m-1)``."""
    _check_m(m)
    U = np.asarray(U, dtype=float)
    if np.any(U < 0):
        raise PreconditionError("density must be non-negative")
    return _out(m / (m - 1.0) * U ** (m - 1.0))


def density_from_pressure(V, m: float):
    """Inverse of :func:`pressure_from_density`."""
    _check_m(m)
    V = np.asarray(V, dtype=float)
    if np.any(V < 0):
        raise PreconditionError("pressure must be non-negative")
    return _out(((m - 1.0) / m * V) ** (1.0 / (m - 1.0)))

# }}}


# {{{ Barenblatt point-mass solution

def cos_power_integral(m: float) -> float:
    """``int_0^{pi/2} cos(theta)^((m+1)/(m-1)) dtheta`` by adaptive quadrature."""
    _check_m(m)
    k = (m + 1.0) / (m - 1.0)
    value, abserr = integrate.quad(
        lambda th: math.cos(th) ** k, 0.0, 0.5 * math.pi,
        epsabs=1e-14, epsrel=1e-14, limit=200)
    if abserr > 1e-12:
        raise ArithmeticError(f"quadrature error estimate {abserr:g} above 1e-12")
    return value


def barenblatt_mass(A: float, m: float) -> float:
    """Mass carried by the Barenblatt solution of amplitude ``A``."""
    _check_m(m)
    if not A > 0:
        raise PreconditionError(f"A = {A!r}: amplitude must be positive")
    _, B = derived_constants(m)
    return A ** ((m + 1.0) / (2.0 * (m - 1.0))) / math.sqrt(B) * cos_power_integral(m)


def _check_release(t, tau):
    if np.any(np.asarray(t) <= tau):
        raise PreconditionError(f"t must exceed the release time tau = {tau!r}")


@dataclass(frozen=True)
class BarenblattField:
    """Point mass released at position ``xi`` and time ``tau`` (one dimension).

    ``A`` is the amplitude constant; the mass follows from it through
    :func:`barenblatt_mass`.
    """

    params: GasParams
    xi: float
    tau: float
    A: float

    def __post_init__(self):
        if self.params.d != 1:
            raise PreconditionError("the Barenblatt oracle is implemented for d = 1 only")
        if not self.A > 0:
            raise PreconditionError(f"A = {self.A!r}: amplitude must be positive")

    @classmethod
    def focusing(cls, xi: float, tau: float, m: float,
                 pde_consistent: bool = False) -> "BarenblattField":
        """The field whose left support edge reaches ``x = 0`` exactly at ``t = 0``."""
        return cls(GasParams(m, 1, pde_consistent), xi, tau,
                   focusing_amplitude(xi, tau, m, pde_consistent))

    @property
    def M(self) -> float:
        return barenblatt_mass(self.A, self.params.m)

    def radius(self, s):
        """Half-width ``R(s) = sqrt(A/B) s^beta`` after elapsed time ``s``."""
        s = np.asarray(s, dtype=float)
        return _out(np.sqrt(self.A / self.params.bigB) * s ** self.params.beta)

    def pressure(self, x, t):
        return barenblatt_pressure(x, t, self)

    def density(self, x, t):
        return density_from_pressure(barenblatt_pressure(x, t, self), self.params.m)

    def support(self, t):
        return support_interval(t, self)


def barenblatt_pressure(x, t, field: BarenblattField):
    _check_release(t, field.tau)
    beta = field.params.beta
    s = np.asarray(t, dtype=float) - field.tau
    R = np.asarray(field.radius(s))
    x = np.asarray(x, dtype=float)
    bracket = 1.0 - (x - field.xi) ** 2 / R ** 2
    return _out(beta * R ** 2 / (2.0 * s) * _positive_part(bracket))


def support_interval(t, field: BarenblattField):
    """Open interval ``(xi - R, xi + R)`` on which the pressure is positive."""
    _check_release(t, field.tau)
    R = field.radius(np.asarray(t, dtype=float) - field.tau)
    return _out(field.xi - R), _out(field.xi + R)


def barenblatt_derivatives(x, t, field: BarenblattField):
    """Closed-form ``(V, V_t, V_x, V_xx)`` valid inside the support.

    Inside the support ``V = beta R^2/(2s) - beta (x-xi)^2/(2s)`` with
    ``R^2 = (A/B) s^(2 beta)``, which is differentiated by hand here.
    """
    _check_release(t, field.tau)
    beta = field.params.beta
    k = field.A / field.params.bigB
    x = np.asarray(x, dtype=float)
    s = np.asarray(t, dtype=float) - field.tau
    y = x - field.xi
    V = 0.5 * beta * k * s ** (2 * beta - 1) - 0.5 * beta * y ** 2 / s
    Vt = 0.5 * beta * k * (2 * beta - 1) * s ** (2 * beta - 2) + 0.5 * beta * y ** 2 / s ** 2
    Vx = -beta * y / s
    Vxx = -beta / s * np.ones_like(y)
    return V, Vt, Vx, Vxx


def pressure_residual(V, Vt, Vx, Vxx, m: float, d: int = 1, r=None):
    """Pointwise residual of the pressure equation given exact derivatives."""
    lap = Vxx if d == 1 else Vxx + (d - 1) / r * Vx
    return _out(Vt - (m - 1.0) * V * lap - Vx ** 2)

# }}}


# {{{ focusing pair

def focusing_amplitude(xi: float, tau: float, m: float, pde_consistent: bool = False) -> float:
    """Amplitude ``A = B xi^2 / (-tau)^(2 beta)`` of a mass that reaches 0 at ``t = 0``."""
    beta, B = derived_constants(m, pde_consistent)
    if not xi > 0:
        raise PreconditionError(f"xi = {xi!r}: release position must be positive")
    if not tau < 0:
        raise PreconditionError(f"tau = {tau!r}: release must precede focusing at t = 0")
    return B * xi ** 2 / (-tau) ** (2.0 * beta)


def focusing_pair_pressure(x, t, xi: float, tau: float, m: float, pde_consistent: bool = False):
    """Pressure of the symmetric pair on ``x > 0``, rewritten in ``t/tau`` and ``x/xi``."""
    beta, _ = derived_constants(m, pde_consistent)
    if not xi > 0 or not tau < 0:
        raise PreconditionError("need xi > 0 and tau < 0")
    t = np.asarray(t, dtype=float)
    if np.any(t <= tau) or np.any(t > 0):
        raise PreconditionError(f"t must lie in (tau, 0] = ({tau!r}, 0]")
    x = np.asarray(x, dtype=float)
    q = 1.0 - t / tau
    bracket = 1.0 - (1.0 - x / xi) ** 2 / q ** (2.0 * beta)
    return _out(xi ** 2 * beta / (2.0 * -tau) * q ** (2.0 * beta - 1.0) * _positive_part(bracket))


def c_star_symmetric(xi: float, tau: float, m: float,
                     pde_consistent: bool = False) -> Tuple[float, float]:
    """Return ``(c*, p)`` with ``p = xi/(-tau)`` and ``c* = p beta``."""
    beta, _ = derived_constants(m, pde_consistent)
    if not xi > 0 or not tau < 0:
        raise PreconditionError("need xi > 0 and tau < 0")
    p = xi / -tau
    return p * beta, p

# }}}


# {{{ Graveleau waves (d = 1)

def graveleau_pressure(x, t, c: float):
    """Pair of converging plane waves ``c max(0, |x| + c t)``."""
    if not c > 0:
        raise PreconditionError(f"c = {c!r}: wave parameter must be positive")
    x = np.asarray(x, dtype=float)
    return _out(c * _positive_part(np.abs(x) + c * np.asarray(t, dtype=float)))


def graveleau_profile(zeta):
    """``-zeta (1 + zeta)`` on ``(-1, 0)``, zero for ``zeta <= -1``.

    For ``zeta > 0`` the polynomial is returned unclamped; that range corresponds
    to ``t > 0`` and is not part of the focusing solution.
    """
    zeta = np.asarray(zeta, dtype=float)
    return _out(np.where(zeta <= GAMMA_1D, 0.0, -zeta * (1.0 + zeta)))


def graveleau_interface(t, c: float):
    """Inner interface ``rho_c(t) = (c t / gamma)^(1/alpha*) = c (-t)``."""
    if not c > 0:
        raise PreconditionError(f"c = {c!r}: wave parameter must be positive")
    t = np.asarray(t, dtype=float)
    if np.any(t > 0):
        raise PreconditionError("the Graveleau interface is defined for t <= 0 only")
    return _out((c * t / GAMMA_1D) ** (1.0 / ALPHA_STAR_1D))


def graveleau_derivatives(x, t, c: float):
    """``(V, V_t, V_x, V_xx)`` of the plane wave inside its support."""
    x = np.asarray(x, dtype=float)
    V = np.asarray(graveleau_pressure(x, t, c))
    one = np.ones_like(V)
    return V, c * c * one, c * np.sign(x) * one, 0.0 * one


@dataclass(frozen=True)
class GraveleauWave:
    """One member ``g_c`` of the one-dimensional Graveleau family."""

    c: float
    params: GasParams = GasParams(2.0)
    alpha_star: float = ALPHA_STAR_1D
    gamma: float = GAMMA_1D

    def __post_init__(self):
        if not self.c > 0:
            raise PreconditionError(f"c = {self.c!r}: wave parameter must be positive")
        if self.params.d != 1:
            raise PreconditionError("Graveleau profiles are only available for d = 1")

    def pressure(self, x, t):
        return graveleau_pressure(x, t, self.c)

    def interface(self, t):
        return graveleau_interface(t, self.c)

    def similarity_form(self, x, t):
        """``x^2/(-t) phi(c t/|x|)``; equal to :meth:`pressure` for ``t < 0``, ``x != 0``."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        eta = t / np.abs(x) ** self.alpha_star
        return _out(x ** 2 / -t * np.asarray(graveleau_profile(self.c * eta)))

# }}}


# {{{ dimensionless reduction

def dimensionless_phi(Pi1, Pi2, m: float, pde_consistent: bool = False):
    """Scaled pressure ``Phi(Pi1, Pi2)`` of the focusing pair."""
    beta, _ = derived_constants(m, pde_consistent)
    Pi1 = np.asarray(Pi1, dtype=float)
    Pi2 = np.asarray(Pi2, dtype=float)
    if np.any(Pi1 < 0) or np.any(Pi1 >= 1):
        raise PreconditionError("Pi1 = t/tau must lie in [0, 1)")
    if np.any(Pi2 <= 0) or np.any(Pi2 > 1):
        raise PreconditionError("Pi2 = x/xi must lie in (0, 1]")
    q = 1.0 - Pi1
    bracket = 1.0 - (1.0 - Pi2) ** 2 / q ** (2.0 * beta)
    return _out(0.5 * q ** (2.0 * beta - 1.0) * _positive_part(bracket))


def phi_asymptote(PiStar, m: float, pde_consistent: bool = False):
    """Limit of ``Phi/Pi2`` as ``Pi2 -> 0`` along ``Pi1 = PiStar * Pi2``.

    Equals ``1 - beta PiStar`` while the ray stays inside the support and 0
    once ``beta PiStar >= 1`` (the ray then runs through the empty hole).
    """
    beta, _ = derived_constants(m, pde_consistent)
    return _out(_positive_part(1.0 - beta * np.asarray(PiStar, dtype=float)))


@dataclass(frozen=True)
class DimensionlessFrame:
    """Scalings ``Pi = (-tau) V/(beta xi^2)``, ``Pi1 = t/tau``, ``Pi2 = x/xi``."""

    xi: float
    tau: float
    m: float
    pde_consistent: bool = False

    def __post_init__(self):
        _check_m(self.m)
        if not self.xi > 0 or not self.tau < 0:
            raise PreconditionError("need xi > 0 and tau < 0")

    @property
    def beta(self) -> float:
        return _beta(self.m, self.pde_consistent)

    @property
    def p(self) -> float:
        return self.xi / -self.tau

    @property
    def c_star(self) -> float:
        return self.p * self.beta

    def Pi(self, V):
        return _out(-self.tau * np.asarray(V, dtype=float) / (self.beta * self.xi ** 2))

    def Pi1(self, t):
        return _out(np.asarray(t, dtype=float) / self.tau)

    def Pi2(self, x):
        return _out(np.asarray(x, dtype=float) / self.xi)

    def PiStar(self, x, t):
        return _out(np.asarray(self.Pi1(t)) / np.asarray(self.Pi2(x)))

    def PiStar_from_eta(self, eta):
        return _out(-self.p * np.asarray(eta, dtype=float))

    def pressure(self, x, t):
        """Dimensional pressure recovered from ``Phi``."""
        Phi = dimensionless_phi(self.Pi1(t), self.Pi2(x), self.m, self.pde_consistent)
        return _out(self.beta * self.xi ** 2 / -self.tau * np.asarray(Phi))

# }}}
