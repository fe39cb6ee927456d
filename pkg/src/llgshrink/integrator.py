"""Integration of the augmented Serret-Frenet frame system.

The profile ``m`` of a self-similar shrinker is recovered from the frame ODE

.. math::

    m' = k n, \\qquad n' = -k m - \\tfrac{\\beta x}{2} b, \\qquad
    b' = \\tfrac{\\beta x}{2} n,

with curvature ``k(x) = c e^{alpha x^2 / 4}`` and initial frame equal to the
standard basis.  Alongside the frame this module co-integrates

* the reduced phase ``psi(x) = c Phi_alpha(x) mod 2 pi``,
* the accumulator ``iB(x) = int_0^x (1 - alpha s^2/2) e^{-alpha s^2/4} m ds``,
* the accumulator ``iW(x) = int_0^x e^{i psi} e^{-alpha s^2/4}
  [(beta s^2/2) n_j + (1 - alpha s^2/2) b_j] ds``,

which feed the limit-constant extraction.  The integration itself happens in
the just-in-time-compiled kernels of :mod:`._stepper`; this module provides
the user-facing types, budgeting, dense output by re-integration, parity
reflection, residual checks, and trace export.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from ._stepper import (
    NDIM_FRAME,
    STATUS_BUDGET,
    STATUS_BUFFER_FULL,
    STATUS_DEFECT,
    STATUS_OK,
    STATUS_SINGULAR,
    STATUS_STEP_UNDERFLOW,
    frame_kernel,
    gj_kernel,
)
from .errors import (
    BudgetExceededError,
    DefectError,
    IntegrationError,
    ParameterError,
    RangeError,
)
from .params import TWO_PI, X_CAP, Params, phi

__all__ = [
    "GUARD_COEF",
    "DEFAULT_BUDGET",
    "DEFAULT_STORE_DPSI",
    "DEFAULT_STORE_DX",
    "DEFECT_ABORT",
    "TOL_MIN",
    "TOL_MAX",
    "TRACE_CSV_HEADER",
    "Frame",
    "AugmentedState",
    "TraceStats",
    "Trace",
    "initial_state_vector",
    "initial_state",
    "state_from_vector",
    "state_to_vector",
    "integrate",
    "integrate_segment",
    "projected_evals",
    "max_feasible_x",
    "frame_at",
    "frames_at",
    "reflect",
    "explicit_alpha1",
    "explicit_c0",
    "profile_residual",
    "gradient_magnitude_check",
    "gj_residual",
    "gj_relative_residual",
    "gj_accumulator",
    "write_trace_csv",
    "write_trace_binary",
]

GUARD_COEF = 0.2
DEFAULT_BUDGET = 500_000_000
DEFAULT_STORE_DPSI = 0.7
DEFAULT_STORE_DX = 0.02
DEFECT_ABORT = 1e-6
TOL_MIN = 1e-13
TOL_MAX = 1e-6

TRACE_CSV_HEADER = "x,m1,m2,m3,n1,n2,n3,b1,b2,b3,psi"

# generous budget for short re-integrations between stored samples
_REINT_BUDGET = 50_000_000

_EMPTY_F = np.empty(0, dtype=np.float64)
_EMPTY_ROWS = np.empty((0, NDIM_FRAME), dtype=np.float64)
_EMPTY_I = np.empty(0, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class Frame:
    """Orthonormal frame (m, n, b) at abscissa ``x``."""

    x: float
    m: np.ndarray
    n: np.ndarray
    b: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        """Rows are m, n, b."""
        return np.vstack([self.m, self.n, self.b])


@dataclass(frozen=True, eq=False)
class AugmentedState:
    """Frame plus reduced phase and limit-constant accumulators."""

    frame: Frame
    psi: float
    iB: np.ndarray
    iW: np.ndarray  # complex, shape (3,)

    @property
    def x(self) -> float:
        return self.frame.x

    @property
    def m(self) -> np.ndarray:
        return self.frame.m

    @property
    def n(self) -> np.ndarray:
        return self.frame.n

    @property
    def b(self) -> np.ndarray:
        return self.frame.b


@dataclass(frozen=True)
class TraceStats:
    """Work and quality counters accumulated during integration."""

    steps: int
    rejected: int
    evals: int
    max_defect: float


@dataclass(frozen=True, eq=False)
class Trace:
    """Stored samples of one forward integration from 0 to ``x_max``.

    ``ys`` has one row per sample with layout
    ``[m(3), n(3), b(3), psi, iB(3), iW re/im interleaved (6)]``;
    ``winding`` counts full turns of the unreduced phase at each sample.
    """

    params: Params
    tol: float
    x_max: float
    xs: np.ndarray
    ys: np.ndarray
    winding: np.ndarray
    stats: TraceStats
    store_dpsi: float
    store_dx: float

    @property
    def n_samples(self) -> int:
        return int(self.xs.size)


def initial_state_vector() -> np.ndarray:
    """State vector at x = 0: identity frame, zero phase and accumulators."""
    y = np.zeros(NDIM_FRAME)
    y[0] = 1.0
    y[4] = 1.0
    y[8] = 1.0
    return y


def state_from_vector(x: float, y: np.ndarray) -> AugmentedState:
    y = np.asarray(y, dtype=float)
    frame = Frame(x=float(x), m=y[0:3].copy(), n=y[3:6].copy(), b=y[6:9].copy())
    iW = y[13:19:2] + 1j * y[14:19:2]
    return AugmentedState(frame=frame, psi=float(y[9]), iB=y[10:13].copy(), iW=iW)


def state_to_vector(state: AugmentedState) -> np.ndarray:
    y = np.empty(NDIM_FRAME)
    y[0:3] = state.m
    y[3:6] = state.n
    y[6:9] = state.b
    y[9] = state.psi
    y[10:13] = state.iB
    y[13:19:2] = state.iW.real
    y[14:19:2] = state.iW.imag
    return y


def initial_state() -> AugmentedState:
    return state_from_vector(0.0, initial_state_vector())


def _initial_vector(initial) -> np.ndarray:
    if initial is None:
        return initial_state_vector()
    if isinstance(initial, AugmentedState):
        return state_to_vector(initial)
    y = np.ascontiguousarray(initial, dtype=float)
    if y.shape != (NDIM_FRAME,):
        raise ParameterError(f"initial state must have shape ({NDIM_FRAME},), got {y.shape}")
    return y.copy()


def _check_tol(tol: float) -> float:
    tol = float(tol)
    if not (TOL_MIN <= tol <= TOL_MAX):
        raise ParameterError(f"tol must lie in [{TOL_MIN:g}, {TOL_MAX:g}], got {tol:g}")
    return tol


def projected_evals(params: Params, x_max: float, tol: float) -> float:
    """Model estimate of right-hand-side evaluations needed to reach ``x_max``.

    Two step regimes add up: the frequency guard caps the step at
    ``0.2/(1 + k + beta x/2)``, which integrates to about
    ``5 (x + beta x^2/4 + total phase)`` steps, and below roughly 1e-12 the
    error controller takes over at about ``(4e7 tol)^{1/6}`` radians of phase
    per step (measured).  Each attempted step costs 12 evaluations.
    """
    rad = params.c * phi(params.alpha, x_max)
    if not math.isfinite(rad):
        return math.inf
    per_rad = max(1.04 / GUARD_COEF, (4e7 * tol) ** (-1.0 / 6.0))
    steps = 1.04 * (x_max + 0.25 * params.beta * x_max * x_max) / GUARD_COEF + rad * per_rad
    return 12.0 * 1.02 * steps + 100.0


def max_feasible_x(
    params: Params, tol: float, budget: int = DEFAULT_BUDGET, x_cap: float = X_CAP
) -> float:
    """Largest ``x_max <= x_cap`` whose projected cost fits the budget."""
    if projected_evals(params, x_cap, tol) <= budget:
        return float(x_cap)
    lo, hi = 0.0, float(x_cap)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if projected_evals(params, mid, tol) <= budget:
            lo = mid
        else:
            hi = mid
    return lo


def _raise_for_status(status, params, x_reached, x_goal, evals, budget, max_defect, tol):
    if status == STATUS_BUDGET:
        feasible = max_feasible_x(params, tol, budget)
        raise BudgetExceededError(
            f"evaluation budget exhausted at x = {x_reached:.6g} of {x_goal:.6g} "
            f"({evals} of {budget} evaluations); increase the budget or reduce "
            f"x_max (roughly {feasible:.3g} is feasible at this tolerance)"
        )
    if status == STATUS_DEFECT:
        raise DefectError(
            f"frame orthonormality defect {max_defect:.3e} exceeded the abort "
            f"threshold at x = {x_reached:.6g}; the trajectory is not trustworthy "
            f"(try a tighter tolerance)"
        )
    if status == STATUS_STEP_UNDERFLOW:
        raise IntegrationError(f"step size underflow at x = {x_reached:.6g}")


def integrate(
    params: Params,
    x_max: float,
    tol: float,
    *,
    budget: int = DEFAULT_BUDGET,
    store_dpsi: float = DEFAULT_STORE_DPSI,
    store_dx: float = DEFAULT_STORE_DX,
    gs_every: int = 0,
    initial=None,
    defect_abort: float = DEFECT_ABORT,
    preflight: bool = True,
) -> Trace:
    """Integrate the augmented system on ``[0, x_max]`` and store samples.

    Samples are stored whenever the phase advanced by ``store_dpsi`` or the
    abscissa by ``store_dx`` since the last stored sample, plus the endpoint.
    ``gs_every > 0`` re-orthonormalizes the frame every that many accepted
    steps (off by default; the defect monitor makes drift visible instead).

    Raises
    ------
    BudgetExceededError
        If the projected or actual evaluation count exceeds ``budget``.
    DefectError
        If the frame orthonormality defect exceeds ``defect_abort``.
    """
    x_max = float(x_max)
    if not (0.0 < x_max <= X_CAP):
        raise ParameterError(f"x_max must lie in (0, {X_CAP:g}], got {x_max:g}")
    tol = _check_tol(tol)
    budget = int(budget)
    if budget <= 0:
        raise ParameterError("budget must be positive")
    if store_dpsi <= 0.0 or store_dx <= 0.0:
        raise ParameterError("storage thresholds must be positive")
    if preflight:
        projected = projected_evals(params, x_max, tol)
        if projected > budget:
            feasible = max_feasible_x(params, tol, budget)
            raise BudgetExceededError(
                f"projected cost {projected:.3g} evaluations exceeds the budget "
                f"{budget:g} for x_max = {x_max:g}; roughly {feasible:.3g} is "
                f"feasible at this tolerance"
            )

    y = _initial_vector(initial)
    n_est = int(params.c * phi(params.alpha, x_max) / store_dpsi + x_max / store_dx) + 64
    n_alloc = max(1024, min(int(1.3 * n_est), 8_000_000))

    chunks = []
    x_cur = 0.0
    h_next = 0.0
    winding = 0
    err_prev = 1e-4
    evals = 0
    steps = 0
    rejected = 0
    max_defect = 0.0
    include_first = True
    while True:
        xs_buf = np.empty(n_alloc)
        ys_buf = np.empty((n_alloc, NDIM_FRAME))
        wind_buf = np.empty(n_alloc, dtype=np.int64)
        (status, n_stored, _n_tgt, st, rj, evals, md, winding, x_cur, h_next,
         err_prev) = frame_kernel(
            params.c, params.alpha, params.beta,
            x_cur, y, x_max,
            tol, tol, GUARD_COEF,
            budget, defect_abort,
            True, store_dpsi, store_dx, include_first,
            xs_buf, ys_buf, wind_buf,
            _EMPTY_F, _EMPTY_ROWS,
            int(gs_every), h_next, winding, err_prev, evals,
        )
        steps += st
        rejected += rj
        max_defect = max(max_defect, md)
        chunks.append((xs_buf[:n_stored], ys_buf[:n_stored], wind_buf[:n_stored]))
        if status == STATUS_BUFFER_FULL:
            n_alloc = min(2 * n_alloc, 16_000_000)
            include_first = True
            continue
        break

    _raise_for_status(status, params, x_cur, x_max, evals, budget, max_defect, tol)
    if abs(x_cur - x_max) > 1e-12 * max(1.0, x_max):
        raise IntegrationError(
            f"integration stopped at x = {x_cur:.6g} instead of {x_max:.6g}"
        )

    if len(chunks) == 1:
        xs, ys, winds = (a.copy() for a in chunks[0])
    else:
        xs = np.concatenate([c[0] for c in chunks])
        ys = np.concatenate([c[1] for c in chunks])
        winds = np.concatenate([c[2] for c in chunks])
    stats = TraceStats(steps=steps, rejected=rejected, evals=evals, max_defect=max_defect)
    return Trace(
        params=params,
        tol=tol,
        x_max=float(xs[-1]),
        xs=xs,
        ys=ys,
        winding=winds,
        stats=stats,
        store_dpsi=store_dpsi,
        store_dx=store_dx,
    )


def integrate_segment(
    params: Params,
    x_from: float,
    x_to: float,
    tol: float,
    *,
    initial=None,
    targets=None,
    budget: int = 100_000_000,
    defect_abort: float = DEFECT_ABORT,
):
    """Integrate between two abscissae, recording states at ``targets``.

    Supports backward integration (``x_to < x_from``); targets are visited in
    integration order and the returned list follows that order.  The main use
    is validating the parity map against a direct backward run; production
    code should prefer :func:`integrate` plus :func:`reflect`.

    Returns ``(final_state, target_states)``.
    """
    tol = _check_tol(tol)
    x_from = float(x_from)
    x_to = float(x_to)
    if max(abs(x_from), abs(x_to)) > X_CAP:
        raise ParameterError(f"|x| must not exceed {X_CAP:g}")
    y = _initial_vector(initial)
    if targets is None:
        tgts = _EMPTY_F
    else:
        tgts = np.sort(np.asarray(targets, dtype=float))
        if x_to < x_from:
            tgts = tgts[::-1]
        lo, hi = min(x_from, x_to), max(x_from, x_to)
        if tgts.size and (tgts.min() < lo - 1e-12 or tgts.max() > hi + 1e-12):
            raise ParameterError("targets must lie between x_from and x_to")
        tgts = np.ascontiguousarray(tgts)
    tgt_buf = np.empty((tgts.size, NDIM_FRAME))
    (status, _n_stored, n_tgt, _st, _rj, evals, md, _winding, x_cur, _h,
     _ep) = frame_kernel(
        params.c, params.alpha, params.beta,
        x_from, y, x_to,
        tol, tol, GUARD_COEF,
        int(budget), defect_abort,
        False, 1e300, 1e300, False,
        _EMPTY_F, _EMPTY_ROWS, _EMPTY_I,
        tgts, tgt_buf,
        0, 0.0, 0, 1e-4, 0,
    )
    _raise_for_status(status, params, x_cur, x_to, evals, budget, md, tol)
    if n_tgt != tgts.size:
        raise IntegrationError("not all target abscissae were reached")
    states = [state_from_vector(t, row) for t, row in zip(tgts, tgt_buf)]
    return state_from_vector(x_cur, y), states


def _run_targets(trace: Trace, node: int, qs: np.ndarray) -> np.ndarray:
    """Re-integrate from stored sample ``node`` and record states at ``qs``.

    ``qs`` must be ascending and lie in ``[xs[node], x_max]``.  All stencil
    points share one trajectory, so their errors are strongly correlated and
    cancel in finite differences.
    """
    p = trace.params
    y = trace.ys[node].copy()
    qs = np.ascontiguousarray(qs, dtype=np.float64)
    tgt_buf = np.empty((qs.size, NDIM_FRAME))
    (status, _n_stored, n_tgt, _st, _rj, evals, md, _w, x_cur, _h,
     _ep) = frame_kernel(
        p.c, p.alpha, p.beta,
        float(trace.xs[node]), y, float(qs[-1]),
        trace.tol, trace.tol, GUARD_COEF,
        _REINT_BUDGET, DEFECT_ABORT,
        False, 1e300, 1e300, False,
        _EMPTY_F, _EMPTY_ROWS, _EMPTY_I,
        qs, tgt_buf,
        0, 0.0, 0, 1e-4, 0,
    )
    _raise_for_status(status, p, x_cur, float(qs[-1]), evals, _REINT_BUDGET, md, trace.tol)
    if n_tgt != qs.size:
        raise IntegrationError("dense output failed to reach all query points")
    return tgt_buf


def _frames_array(trace: Trace, xs, common_node: bool = False) -> np.ndarray:
    """States at arbitrary abscissae, rows in the order of ``xs``.

    With ``common_node=True`` every query is re-integrated from the single
    stored sample below the smallest query (one shared trajectory, needed by
    finite-difference stencils); otherwise each query starts from its own
    nearest stored sample.
    """
    q = np.atleast_1d(np.asarray(xs, dtype=float))
    if q.ndim != 1:
        raise ParameterError("query abscissae must be one-dimensional")
    if q.size == 0:
        return np.empty((0, NDIM_FRAME))
    eps = 1e-12 * max(1.0, float(trace.x_max))
    if q.min() < -eps or q.max() > trace.x_max + eps:
        raise RangeError(
            f"query x outside the computed range [0, {trace.x_max:g}]",
            required_x_max=float(q.max()),
        )
    q = np.clip(q, 0.0, trace.x_max)
    order = np.argsort(q, kind="stable")
    qs = q[order]
    out = np.empty((q.size, NDIM_FRAME))
    if common_node:
        node = int(np.searchsorted(trace.xs, qs[0], side="right")) - 1
        node = max(node, 0)
        out[order] = _run_targets(trace, node, qs)
        return out
    node_idx = np.searchsorted(trace.xs, qs, side="right") - 1
    node_idx = np.maximum(node_idx, 0)
    i = 0
    while i < qs.size:
        ni = int(node_idx[i])
        j = i
        while j < qs.size and node_idx[j] == ni:
            j += 1
        out[order[i:j]] = _run_targets(trace, ni, qs[i:j])
        i = j
    return out


def frames_at(trace: Trace, xs) -> list:
    """Augmented states at arbitrary abscissae in ``[0, x_max]``.

    Queries that coincide with stored samples return the stored state
    exactly; others are recovered by re-integrating from the nearest stored
    sample below the query.
    """
    q = np.atleast_1d(np.asarray(xs, dtype=float))
    rows = _frames_array(trace, q)
    return [state_from_vector(x, row) for x, row in zip(q, rows)]


def frame_at(trace: Trace, x: float) -> AugmentedState:
    """Augmented state at a single abscissa in ``[0, x_max]``."""
    return frames_at(trace, [float(x)])[0]


def reflect(state: AugmentedState) -> AugmentedState:
    """State at ``-x`` from the state at ``x`` via the parity symmetry.

    The profile extends to an even map: componentwise,
    ``m(-x) = (m1, -m2, -m3)(x)``; the normal and binormal pick up the
    complementary signs, the reduced phase flips to ``2 pi - psi``, and the
    accumulators transform accordingly.
    """
    m = state.m * np.array([1.0, -1.0, -1.0])
    n = state.n * np.array([-1.0, 1.0, 1.0])
    b = state.b * np.array([-1.0, 1.0, 1.0])
    psi = TWO_PI - state.psi
    if psi >= TWO_PI:
        psi -= TWO_PI
    iB = state.iB * np.array([-1.0, 1.0, 1.0])
    iW = np.conj(state.iW) * np.array([1.0, -1.0, -1.0])
    frame = Frame(x=-state.x, m=m, n=n, b=b)
    return AugmentedState(frame=frame, psi=psi, iB=iB, iW=iW)


def explicit_alpha1(c: float, x: float) -> Frame:
    """Closed-form frame for alpha = 1 (beta = 0): a planar circle profile.

    The phase ``theta = c Phi_1(x)`` drives a rotation in the horizontal
    plane while the binormal stays fixed.  Accurate while ``theta`` is small
    enough for ``cos``/``sin`` to retain precision (say below 1e9 radians).
    """
    theta = c * phi(1.0, x)
    ct, st = math.cos(theta), math.sin(theta)
    return Frame(
        x=float(x),
        m=np.array([ct, st, 0.0]),
        n=np.array([-st, ct, 0.0]),
        b=np.array([0.0, 0.0, 1.0]),
    )


def explicit_c0(alpha: float, x: float) -> Frame:
    """Closed-form frame in the zero-curvature limit c -> 0.

    The profile freezes at ``(1, 0, 0)`` while the normal/binormal pair
    rotates by the torsion angle ``beta x^2 / 4``.
    """
    if not (0.0 < alpha <= 1.0):
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha:g}")
    beta = math.sqrt((1.0 - alpha) * (1.0 + alpha))
    ang = 0.25 * beta * x * x
    ca, sa = math.cos(ang), math.sin(ang)
    return Frame(
        x=float(x),
        m=np.array([1.0, 0.0, 0.0]),
        n=np.array([0.0, ca, -sa]),
        b=np.array([0.0, sa, ca]),
    )


def profile_residual(trace: Trace, x: float, h: float = 1e-4) -> np.ndarray:
    """Central-difference residual of the profile equation at ``x``.

    Evaluates ``alpha m'' + alpha |m'|^2 m + beta (m x m')' - (x/2) m'``
    from a five-point stencil re-integrated along one shared trajectory.
    The exact profile satisfies this identically, so the result measures
    integration plus finite-difference error.
    """
    x = float(x)
    h = float(h)
    if not (0.0 < h <= 1e-3):
        raise ParameterError(f"h must lie in (0, 1e-3], got {h:g}")
    if x - 2.0 * h < 0.0 or x + 2.0 * h > trace.x_max:
        raise RangeError(
            f"stencil [x-2h, x+2h] must lie inside [0, {trace.x_max:g}]",
            required_x_max=x + 2.0 * h,
        )
    pts = x + h * np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    rows = _frames_array(trace, pts, common_node=True)
    M = rows[:, 0:3]
    mprime = (M[3] - M[1]) / (2.0 * h)
    msecond = (M[3] - 2.0 * M[2] + M[1]) / (h * h)
    mp_minus = (M[2] - M[0]) / (2.0 * h)
    mp_plus = (M[4] - M[2]) / (2.0 * h)
    vprime = (np.cross(M[3], mp_plus) - np.cross(M[1], mp_minus)) / (2.0 * h)
    a = trace.params.alpha
    return (
        a * msecond
        + a * float(mprime @ mprime) * M[2]
        + trace.params.beta * vprime
        - 0.5 * x * mprime
    )


def gradient_magnitude_check(trace: Trace, x: float) -> float:
    """Defect of the curvature identity ``|m'(x)| = k(x)``.

    Returns ``(|n(x)| - 1) k(x)``, the signed difference between the measured
    gradient magnitude ``|m'| = |n| k`` and the prescribed ``k``.
    """
    st = frame_at(trace, float(x))
    k = trace.params.c * math.exp(0.25 * trace.params.alpha * x * x)
    return (float(np.linalg.norm(st.n)) - 1.0) * k


def _gj_stencil(trace: Trace, j: int, x: float, h: float):
    """Integrate the frame plus ``int k eta_j`` and return the FD pieces."""
    if j not in (1, 2, 3):
        raise ParameterError(f"component index j must be 1, 2 or 3, got {j}")
    x = float(x)
    h = float(h)
    if not (0.0 < h <= 1e-3):
        raise ParameterError(f"h must lie in (0, 1e-3], got {h:g}")
    if not (2.0 * h <= x <= 6.0):
        raise ParameterError(f"x must lie in [2h, 6], got {x:g}")
    p = trace.params
    tol = min(trace.tol, 1e-11)
    targets = np.array([x - h, x, x + h])
    tgt_buf = np.empty((3, 11))
    (status, n_tgt, _st, _rj, evals, min_denom, x_cur) = gj_kernel(
        p.c, p.alpha, p.beta, j - 1, x + h,
        tol, tol, GUARD_COEF, 200_000_000, 0.05,
        targets, tgt_buf,
    )
    if status == STATUS_SINGULAR:
        raise DefectError(
            f"1 + m_{j} dropped to {min_denom:.3g} before x = {x_cur:.4g}; "
            f"the logarithmic accumulator is singular there"
        )
    _raise_for_status(status, p, x_cur, x + h, evals, 200_000_000, 0.0, tol)
    if status != STATUS_OK or n_tgt != 3:
        raise IntegrationError("accumulator integration failed to reach the stencil")
    acc = tgt_buf[:, 9] + 1j * tgt_buf[:, 10]
    g = np.exp(0.5 * acc)
    d1 = (g[2] - g[0]) / (2.0 * h)
    d2 = (g[2] - 2.0 * g[1] + g[0]) / (h * h)
    lam = 0.5 * x * (p.alpha + 1j * p.beta)
    pot = 0.25 * p.c * p.c * math.exp(0.5 * p.alpha * x * x)
    residual = d2 - lam * d1 + pot * g[1]
    scale = max(abs(d2), abs(lam * d1), abs(pot * g[1]))
    return residual, scale, acc[1]


def gj_residual(trace: Trace, j: int, x: float, h: float = 1e-4) -> complex:
    """Residual of ``g'' - (x/2)(alpha + i beta) g' + (c^2/4) e^{alpha x^2/2} g``.

    Here ``g_j = exp((1/2) int_0^x k eta_j ds)`` with
    ``eta_j = (n_j + i b_j)/(1 + m_j)``; derivatives are central differences
    with step ``h`` along one shared trajectory.  Precondition: ``1 + m_j``
    stays above 0.05 on ``[0, x]`` (checked) and ``x <= 6``.
    """
    residual, _scale, _acc = _gj_stencil(trace, j, x, h)
    return residual


def gj_relative_residual(trace: Trace, j: int, x: float, h: float = 1e-4) -> float:
    """``|gj_residual|`` divided by the largest of the three term magnitudes."""
    residual, scale, _acc = _gj_stencil(trace, j, x, h)
    return abs(residual) / scale


def gj_accumulator(trace: Trace, j: int, x: float) -> complex:
    """The accumulator ``int_0^x k eta_j ds`` itself (for cross-checks)."""
    _residual, _scale, acc = _gj_stencil(trace, j, max(x, 2e-4), 1e-4)
    return complex(acc)


def _trace_rows(trace: Trace, dx=None) -> np.ndarray:
    """Rows ``[x, m, n, b, psi]`` at stored samples or a uniform grid."""
    if dx is None:
        return np.column_stack([trace.xs, trace.ys[:, :10]])
    dx = float(dx)
    if dx <= 0.0:
        raise ParameterError(f"sample spacing must be positive, got {dx:g}")
    grid = np.arange(0.0, trace.x_max + 1e-12, dx)
    if grid.size == 0 or grid[-1] < trace.x_max - 1e-9 * max(1.0, trace.x_max):
        grid = np.append(grid, trace.x_max)
    grid = np.minimum(grid, trace.x_max)
    rows = _frames_array(trace, grid)
    return np.column_stack([grid, rows[:, :10]])


def _atomic_write(path: str, write_fn, binary: bool = False) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "wb" if binary else "w") as fh:
            write_fn(fh)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_trace_csv(trace: Trace, path: str, dx=None) -> None:
    """Write ``x,m1,m2,m3,n1,n2,n3,b1,b2,b3,psi`` rows as CSV (atomic)."""
    rows = _trace_rows(trace, dx)
    _atomic_write(
        path,
        lambda fh: np.savetxt(
            fh, rows, delimiter=",", header=TRACE_CSV_HEADER, comments="", fmt="%.17g"
        ),
    )


def write_trace_binary(trace: Trace, path: str, dx=None) -> None:
    """Write the same rows as packed little-endian float64 (11 per row)."""
    rows = _trace_rows(trace, dx)
    payload = np.ascontiguousarray(rows, dtype="<f8").tobytes()
    _atomic_write(path, lambda fh: fh.write(payload), binary=True)
