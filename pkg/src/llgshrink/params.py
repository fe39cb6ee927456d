"""Parameter records, the accumulated-phase primitive, and Gaussian tails.

Everything downstream is driven by the pair ``(c, alpha)`` with derived
``beta = sqrt(1 - alpha^2)``:

* ``phi``            -- the accumulated phase ``Phi_alpha(x) = int_0^x e^{alpha s^2/4} ds``
* ``phi_asymptotic`` -- its three-term large-``x`` expansion
* ``gauss_tail``     -- exact tails ``int_x^inf s^n e^{-gamma s^2} ds`` for n in {0,1,2,3}
* ``tail_bound``     -- the elementary closed-form upper bounds for the same tails
* ``truncation_point`` -- the abscissa beyond which the limit-constant tail
  integrals are provably below a tolerance
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate, special

from .errors import ParameterError

__all__ = [
    "TWO_PI",
    "X_CAP",
    "Params",
    "PhaseValue",
    "TruncationPoint",
    "make_params",
    "phi",
    "phase_value",
    "phi_asymptotic",
    "gauss_tail",
    "tail_bound",
    "truncation_point",
]

TWO_PI = 2.0 * math.pi

#: Hard cap on |x| for full-accuracy phase evaluation and trace construction.
#: Beyond this the local oscillation frequency c*e^{alpha x^2/4} makes double
#: precision step counts infeasible for alpha near 1.
X_CAP = 12.0

# exp(u) overflows double precision just above u = 709.78
_EXP_OVERFLOW = 709.0

# floor/cap of the truncation-point search window
_TRUNC_FLOOR = 4.0


@dataclass(frozen=True)
class Params:
    """Validated parameter record.

    Attributes
    ----------
    c : float
        Curvature amplitude, ``c > 0``.
    alpha : float
        Damping parameter in ``(0, 1]``.
    beta : float
        Precession strength ``sqrt(1 - alpha^2)``, derived.
    """

    c: float
    alpha: float
    beta: float


@dataclass(frozen=True)
class PhaseValue:
    """Phase at one abscissa: raw ``phi`` and ``psi = c*phi mod 2*pi``."""

    x: float
    phi: float
    psi: float


@dataclass(frozen=True)
class TruncationPoint:
    """Result of the tail-driven truncation search.

    Attributes
    ----------
    x : float
        Chosen truncation abscissa in ``[4, 12]``.
    tail : float
        The analytic tail bound achieved at ``x``.
    degraded : bool
        True when the requested tolerance was unreachable within the cap.
    """

    x: float
    tail: float
    degraded: bool


def _check_alpha(alpha: float) -> None:
    if not (isinstance(alpha, (int, float)) and math.isfinite(alpha)):
        raise ParameterError(f"alpha must be a finite real, got {alpha!r}")
    if not 0.0 < alpha <= 1.0:
        raise ParameterError(f"alpha must be in (0, 1], got {alpha}")


def make_params(c: float, alpha: float) -> Params:
    """Validate ``(c, alpha)`` and derive ``beta``.

    Raises
    ------
    ParameterError
        If ``c <= 0``, ``alpha`` is outside ``(0, 1]``, or either input is
        non-finite.
    """
    if not (isinstance(c, (int, float)) and math.isfinite(c)):
        raise ParameterError(f"c must be a finite real, got {c!r}")
    if c <= 0.0:
        raise ParameterError(f"c must be positive, got {c}")
    _check_alpha(alpha)
    # (1-alpha)(1+alpha) avoids cancellation for alpha near 1 and yields an
    # exact zero at alpha = 1.
    beta = math.sqrt((1.0 - alpha) * (1.0 + alpha))
    return Params(c=float(c), alpha=float(alpha), beta=beta)


def phi(alpha: float, x: float) -> float:
    """Accumulated phase ``int_0^x e^{alpha s^2/4} ds``.

    Evaluated by adaptive Gauss-Kronrod quadrature; relative accuracy 1e-12
    for ``|x| <= X_CAP``.  For larger finite ``|x|`` the value is returned on
    a best-effort basis, degrading to ``+/-inf`` once the integrand would
    overflow double precision.
    """
    _check_alpha(alpha)
    x = float(x)
    if not math.isfinite(x):
        raise ParameterError(f"x must be finite, got {x!r}")
    if x == 0.0:
        return 0.0
    if x < 0.0:
        return -phi(alpha, -x)
    if alpha * x * x / 4.0 > _EXP_OVERFLOW:
        return math.inf
    val, _err = integrate.quad(
        lambda s: math.exp(alpha * s * s / 4.0),
        0.0,
        x,
        epsabs=0.0,
        epsrel=1e-13,
        limit=200,
    )
    return val


def phase_value(params: Params, x: float) -> PhaseValue:
    """Phase record at ``x``; ``psi`` is ``c*phi`` reduced into ``[0, 2*pi)``.

    The reduction here is a direct ``fmod`` of the quadrature value, so its
    absolute accuracy degrades like ``1e-16 * c * phi(x)``; for large ``x``
    prefer the co-integrated reduced phase stored in a trace.
    """
    p = phi(params.alpha, x)
    psi = math.fmod(params.c * p, TWO_PI)
    if psi < 0.0:
        psi += TWO_PI
    return PhaseValue(x=float(x), phi=p, psi=psi)


def phi_asymptotic(alpha: float, x: float) -> float:
    """Three-term large-``x`` expansion of the accumulated phase.

    ``(2 e^{alpha x^2/4} / (alpha x)) (1 + 2/(alpha x^2) + 12/(alpha x^2)^2)``,
    valid in the regime ``x >= 3/sqrt(alpha)``.
    """
    _check_alpha(alpha)
    x = float(x)
    if x < 3.0 / math.sqrt(alpha):
        raise ParameterError(
            f"x={x} is below the asymptotic regime threshold 3/sqrt(alpha)="
            f"{3.0 / math.sqrt(alpha):.6g}"
        )
    u = alpha * x * x
    if u / 4.0 > _EXP_OVERFLOW:
        return math.inf
    return (2.0 * math.exp(u / 4.0) / (alpha * x)) * (1.0 + 2.0 / u + 12.0 / (u * u))


def gauss_tail(gamma: float, n: int, x: float) -> float:
    """Exact tail ``int_x^inf s^n e^{-gamma s^2} ds`` for ``n`` in {0,1,2,3}.

    Relative accuracy 1e-12.  ``n`` odd uses elementary closed forms; ``n``
    even uses the scaled complementary error function, in the ``erfcx`` form
    that preserves relative accuracy for large ``x``.
    """
    if not (isinstance(gamma, (int, float)) and math.isfinite(gamma) and gamma > 0.0):
        raise ParameterError(f"gamma must be positive and finite, got {gamma!r}")
    if n not in (0, 1, 2, 3):
        raise ParameterError(f"n must be one of 0,1,2,3, got {n!r}")
    x = float(x)
    g = float(gamma)
    e = math.exp(-g * x * x) if g * x * x < _EXP_OVERFLOW else 0.0
    if n == 1:
        return e / (2.0 * g)
    if n == 3:
        return (1.0 + g * x * x) * e / (2.0 * g * g)
    # even n: build on the n=0 tail
    z = math.sqrt(g) * x
    if z >= 0.0:
        tail0 = 0.5 * math.sqrt(math.pi / g) * float(special.erfcx(z)) * e
    else:
        tail0 = 0.5 * math.sqrt(math.pi / g) * float(special.erfc(z))
    if n == 0:
        return tail0
    # n == 2, by parts: x e^{-g x^2}/(2g) + tail0/(2g)
    return x * e / (2.0 * g) + tail0 / (2.0 * g)


def tail_bound(gamma: float, n: int, x: float) -> float:
    """Closed-form upper bound for ``int_x^inf s^n e^{-gamma s^2} ds``.

    Requires ``0 < gamma <= 1``; ``x > 0`` for ``n`` in {0,1} and ``x >= 1``
    for ``n`` in {2,3}.  The bounds are::

        n=0: e^{-gamma x^2} / (2 gamma x)
        n=1: e^{-gamma x^2} / (2 gamma)          (exact)
        n=2: (x / gamma^2)  e^{-gamma x^2}
        n=3: (x^2/ gamma^2) e^{-gamma x^2}
    """
    if not (isinstance(gamma, (int, float)) and 0.0 < gamma <= 1.0):
        raise ParameterError(f"gamma must be in (0, 1], got {gamma!r}")
    if n not in (0, 1, 2, 3):
        raise ParameterError(f"n must be one of 0,1,2,3, got {n!r}")
    x = float(x)
    if n in (0, 1) and not x > 0.0:
        raise ParameterError(f"x must be positive for n={n}, got {x}")
    if n in (2, 3) and not x >= 1.0:
        raise ParameterError(f"x must be >= 1 for n={n}, got {x}")
    g = float(gamma)
    e = math.exp(-g * x * x) if g * x * x < _EXP_OVERFLOW else 0.0
    if n == 0:
        return e / (2.0 * g * x)
    if n == 1:
        return e / (2.0 * g)
    if n == 2:
        return (x / (g * g)) * e
    return (x * x / (g * g)) * e


def _w_tail(params: Params, x: float) -> float:
    """Tail bound ``(beta/2c)(2/(alpha X) + 16 X/alpha^2) e^{-alpha X^2/4}``.

    This dominates the truncated parts of both limit-constant integrals; it
    is the quantity the truncation search drives below the tolerance.
    """
    a, b, c = params.alpha, params.beta, params.c
    return (b / (2.0 * c)) * (2.0 / (a * x) + 16.0 * x / (a * a)) * math.exp(-a * x * x / 4.0)


def truncation_point(params: Params, tol: float) -> TruncationPoint:
    """Smallest ``X`` in ``[4, 12]`` whose analytic tail bound is ``<= tol``.

    Returns the cap with ``degraded=True`` when the tolerance is unreachable
    within the cap.  ``beta = 0`` makes the tail identically zero, so the
    floor ``4`` is returned.
    """
    if not (isinstance(tol, (int, float)) and tol > 0.0):
        raise ParameterError(f"tol must be positive, got {tol!r}")
    if params.beta == 0.0:
        return TruncationPoint(x=_TRUNC_FLOOR, tail=0.0, degraded=False)
    if _w_tail(params, _TRUNC_FLOOR) <= tol:
        return TruncationPoint(x=_TRUNC_FLOOR, tail=_w_tail(params, _TRUNC_FLOOR), degraded=False)
    # scan for the first grid point inside the tolerance, then bisect for the
    # crossing (the bound need not be monotone for very small alpha)
    n_grid = 8001
    step = (X_CAP - _TRUNC_FLOOR) / (n_grid - 1)
    lo = None
    hi = None
    for i in range(1, n_grid):
        xg = _TRUNC_FLOOR + i * step
        if _w_tail(params, xg) <= tol:
            lo, hi = xg - step, xg
            break
    if lo is None:
        return TruncationPoint(x=X_CAP, tail=_w_tail(params, X_CAP), degraded=True)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _w_tail(params, mid) <= tol:
            hi = mid
        else:
            lo = mid
    return TruncationPoint(x=hi, tail=_w_tail(params, hi), degraded=False)
