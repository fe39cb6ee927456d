"""Adaptive DOP853 stepping kernels for the augmented frame systems.

Three specialized just-in-time-compiled integrators share the same embedded
Runge-Kutta tableau (``_dop853_coeffs``) and step-size controller:

* ``frame_kernel`` -- the 19-dimensional augmented Serret-Frenet system:
  frame (m, n, b), reduced phase psi, and the nine limit-constant
  accumulator components;
* ``gj_kernel``    -- frame plus the complex accumulator ``int k*eta_j`` used
  by the second-order-equation residual check;
* ``osc_kernel``   -- oscillatory tail integrals ``int s^n e^{i sigma Phi - gamma s^2}``
  with a co-integrated reduced phase.

Shared design points:

* the local step is capped by the frequency guard
  ``guard_coef / (1 + k(x) + beta |x| / 2)`` with ``k = c e^{alpha x^2/4}``,
  so the oscillation stays resolved no matter what the error controller asks;
* the reduced phase is renormalized into ``[0, 2 pi)`` after every accepted
  step using a two-term representation of ``2 pi`` (double-double accurate),
  with the winding number kept as an integer diagnostic;
* error control is the combined 5th/3rd-order estimate of the 8(5,3) pair
  with a proportional-integral update (exponents -0.7/8 and +0.4/8,
  safety 0.9, factors clipped to [0.2, 10]).

The kernels integrate forward or backward depending on the sign of
``x_end - x0`` and can record the exact state at a sorted list of target
abscissae (used for dense output by re-integration and for finite-difference
stencils that need correlated errors along one trajectory).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ._dop853_coeffs import A, B, C, E3, E5

__all__ = [
    "STATUS_OK",
    "STATUS_BUDGET",
    "STATUS_DEFECT",
    "STATUS_BUFFER_FULL",
    "STATUS_STEP_UNDERFLOW",
    "STATUS_SINGULAR",
    "NDIM_FRAME",
    "frame_kernel",
    "gj_kernel",
    "osc_kernel",
]

STATUS_OK = 0
STATUS_BUDGET = 1
STATUS_DEFECT = 2
STATUS_BUFFER_FULL = 3
STATUS_STEP_UNDERFLOW = 4
STATUS_SINGULAR = 5

NDIM_FRAME = 19

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
_EXPO_ACC = 0.7 / 8.0  # error exponent on acceptance (PI controller)
_EXPO_MEM = 0.4 / 8.0  # memory exponent on the previous error
_EXPO_REJ = 1.0 / 8.0  # plain shrink exponent on rejection

# 2*pi = TWO_PI_HI + TWO_PI_LO to double-double accuracy
TWO_PI_HI = 6.283185307179586
TWO_PI_LO = 2.4492935982947064e-16

# evaluations consumed per attempted step: 11 fresh stages + the error stage
_EVALS_PER_STEP = 12


@njit(cache=True)
def _frame_rhs(x, y, c, alpha, beta, out):
    """Right-hand side of the augmented Serret-Frenet system.

    State layout: [m(3), n(3), b(3), psi, iB(3), iW re/im interleaved (6)].
    """
    k = c * math.exp(0.25 * alpha * x * x)
    t = 0.5 * beta * x  # = -tau; binormal equation is b' = +(beta x/2) n
    m1 = y[0]
    m2 = y[1]
    m3 = y[2]
    n1 = y[3]
    n2 = y[4]
    n3 = y[5]
    b1 = y[6]
    b2 = y[7]
    b3 = y[8]
    out[0] = k * n1
    out[1] = k * n2
    out[2] = k * n3
    out[3] = -k * m1 - t * b1
    out[4] = -k * m2 - t * b2
    out[5] = -k * m3 - t * b3
    out[6] = t * n1
    out[7] = t * n2
    out[8] = t * n3
    out[9] = k
    g = math.exp(-0.25 * alpha * x * x)
    a2 = (1.0 - 0.5 * alpha * x * x) * g
    w2 = 0.5 * beta * x * x * g
    out[10] = a2 * m1
    out[11] = a2 * m2
    out[12] = a2 * m3
    cp = math.cos(y[9])
    sp = math.sin(y[9])
    q1 = w2 * n1 + a2 * b1
    q2 = w2 * n2 + a2 * b2
    q3 = w2 * n3 + a2 * b3
    out[13] = q1 * cp
    out[14] = q1 * sp
    out[15] = q2 * cp
    out[16] = q2 * sp
    out[17] = q3 * cp
    out[18] = q3 * sp


@njit(cache=True)
def _gram_defect(y):
    """Frobenius deviation of the (m, n, b) Gram matrix from the identity."""
    mm = y[0] * y[0] + y[1] * y[1] + y[2] * y[2]
    nn = y[3] * y[3] + y[4] * y[4] + y[5] * y[5]
    bb = y[6] * y[6] + y[7] * y[7] + y[8] * y[8]
    mn = y[0] * y[3] + y[1] * y[4] + y[2] * y[5]
    mb = y[0] * y[6] + y[1] * y[7] + y[2] * y[8]
    nb = y[3] * y[6] + y[4] * y[7] + y[5] * y[8]
    return math.sqrt(
        (mm - 1.0) ** 2
        + (nn - 1.0) ** 2
        + (bb - 1.0) ** 2
        + 2.0 * (mn * mn + mb * mb + nb * nb)
    )


@njit(cache=True)
def _gram_schmidt(y):
    """Project (m, n, b) back onto an exactly orthonormal right-handed triple."""
    nm = math.sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2])
    for i in range(3):
        y[i] /= nm
    d = y[0] * y[3] + y[1] * y[4] + y[2] * y[5]
    for i in range(3):
        y[3 + i] -= d * y[i]
    nn = math.sqrt(y[3] * y[3] + y[4] * y[4] + y[5] * y[5])
    for i in range(3):
        y[3 + i] /= nn
    y[6] = y[1] * y[5] - y[2] * y[4]
    y[7] = y[2] * y[3] - y[0] * y[5]
    y[8] = y[0] * y[4] - y[1] * y[3]


@njit(cache=True)
def _reduce_psi(psi, winding):
    while psi >= TWO_PI_HI:
        psi = (psi - TWO_PI_HI) - TWO_PI_LO
        winding += 1
    while psi < 0.0:
        psi = (psi + TWO_PI_HI) + TWO_PI_LO
        winding -= 1
    return psi, winding


@njit(cache=True)
def frame_kernel(
    c,
    alpha,
    beta,
    x0,
    y,
    x_end,
    rtol,
    atol,
    guard_coef,
    max_evals,
    abort_defect,
    do_store,
    store_dpsi,
    store_dx,
    include_first,
    xs_buf,
    ys_buf,
    wind_buf,
    targets,
    tgt_buf,
    gs_every,
    h0,
    winding0,
    err_prev0,
    evals0,
):
    """Drive the augmented frame system from ``x0`` to ``x_end``.

    ``y`` (length 19) is advanced in place and holds the current state on
    return, so a caller can resume after ``STATUS_BUFFER_FULL`` or
    ``STATUS_BUDGET`` without losing progress.

    Returns ``(status, n_stored, n_targets_done, steps, rejected, evals,
    max_defect, winding, x_reached, h_next, err_prev)``.
    """
    ndim = NDIM_FRAME
    sign = 1.0 if x_end >= x0 else -1.0
    x = x0
    winding = winding0
    err_prev = err_prev0
    evals = evals0
    n_stored = 0
    n_tgt = 0
    steps = 0
    rejected = 0
    max_defect = 0.0
    psi_acc = 0.0
    dx_acc = 0.0
    was_rejected = False

    K = np.empty((13, ndim))
    ytmp = np.empty(ndim)
    y_new = np.empty(ndim)

    # record targets coinciding with the start point
    while n_tgt < targets.shape[0] and sign * (targets[n_tgt] - x) <= 1e-15 * max(1.0, abs(x)):
        for i in range(ndim):
            tgt_buf[n_tgt, i] = y[i]
        n_tgt += 1

    if do_store and include_first:
        if xs_buf.shape[0] < 1:
            return (STATUS_BUFFER_FULL, n_stored, n_tgt, steps, rejected, evals,
                    max_defect, winding, x, 0.0, err_prev)
        xs_buf[0] = x
        for i in range(ndim):
            ys_buf[0, i] = y[i]
        wind_buf[0] = winding
        n_stored = 1

    _frame_rhs(x, y, c, alpha, beta, K[0])
    evals += 1

    kfreq = c * math.exp(0.25 * alpha * x * x)
    guard = guard_coef / (1.0 + kfreq + 0.5 * beta * abs(x))
    h_abs = h0 if h0 > 0.0 else 0.01 * guard

    while sign * (x_end - x) > 0.0:
        if evals + _EVALS_PER_STEP > max_evals:
            return (STATUS_BUDGET, n_stored, n_tgt, steps, rejected, evals,
                    max_defect, winding, x, h_abs, err_prev)
        kfreq = c * math.exp(0.25 * alpha * x * x)
        guard = guard_coef / (1.0 + kfreq + 0.5 * beta * abs(x))
        if h_abs > guard:
            h_abs = guard
        remaining = sign * (x_end - x)
        hit_end = False
        if h_abs >= remaining:
            h_abs = remaining
            hit_end = True
        hit_target = False
        if n_tgt < targets.shape[0]:
            dist_t = sign * (targets[n_tgt] - x)
            if h_abs >= dist_t:
                h_abs = dist_t
                hit_target = True
                hit_end = hit_end and (dist_t >= remaining)

        h = sign * h_abs
        for s in range(1, 12):
            for i in range(ndim):
                acc = 0.0
                for j in range(s):
                    aij = A[s, j]
                    if aij != 0.0:
                        acc += aij * K[j, i]
                ytmp[i] = y[i] + h * acc
            _frame_rhs(x + C[s] * h, ytmp, c, alpha, beta, K[s])
        for i in range(ndim):
            acc = 0.0
            for j in range(12):
                bj = B[j]
                if bj != 0.0:
                    acc += bj * K[j, i]
            y_new[i] = y[i] + h * acc
        if hit_target:
            x_new = targets[n_tgt]
        elif hit_end:
            x_new = x_end
        else:
            x_new = x + h
        _frame_rhs(x_new, y_new, c, alpha, beta, K[12])
        evals += _EVALS_PER_STEP

        err5n2 = 0.0
        err3n2 = 0.0
        for i in range(ndim):
            e5 = 0.0
            e3 = 0.0
            for j in range(13):
                e5 += E5[j] * K[j, i]
                e3 += E3[j] * K[j, i]
            sc = atol + rtol * max(abs(y[i]), abs(y_new[i]))
            e5 /= sc
            e3 /= sc
            err5n2 += e5 * e5
            err3n2 += e3 * e3
        denom = err5n2 + 0.01 * err3n2
        if denom > 0.0:
            err_norm = h_abs * err5n2 / math.sqrt(denom * ndim)
        else:
            err_norm = 0.0

        if err_norm < 1.0:
            steps += 1
            dpsi = abs(y_new[9] - y[9])
            x = x_new
            for i in range(ndim):
                y[i] = y_new[i]
                K[0, i] = K[12, i]
            y[9], winding = _reduce_psi(y[9], winding)
            d = _gram_defect(y)
            if d > max_defect:
                max_defect = d
            if d > abort_defect:
                return (STATUS_DEFECT, n_stored, n_tgt, steps, rejected, evals,
                        max_defect, winding, x, h_abs, err_prev)
            if gs_every > 0 and steps % gs_every == 0:
                _gram_schmidt(y)
                _frame_rhs(x, y, c, alpha, beta, K[0])
                evals += 1
            if hit_target:
                for i in range(ndim):
                    tgt_buf[n_tgt, i] = y[i]
                n_tgt += 1
                while (
                    n_tgt < targets.shape[0]
                    and sign * (targets[n_tgt] - x) <= 1e-15 * max(1.0, abs(x))
                ):
                    for i in range(ndim):
                        tgt_buf[n_tgt, i] = y[i]
                    n_tgt += 1
            if do_store:
                psi_acc += dpsi
                dx_acc += h_abs
                at_end = not (sign * (x_end - x) > 0.0)
                if psi_acc >= store_dpsi or dx_acc >= store_dx or at_end:
                    if n_stored >= xs_buf.shape[0]:
                        return (STATUS_BUFFER_FULL, n_stored, n_tgt, steps, rejected,
                                evals, max_defect, winding, x, h_abs, err_prev)
                    xs_buf[n_stored] = x
                    for i in range(ndim):
                        ys_buf[n_stored, i] = y[i]
                    wind_buf[n_stored] = winding
                    n_stored += 1
                    psi_acc = 0.0
                    dx_acc = 0.0
            if err_norm == 0.0:
                fac = MAX_FACTOR
            else:
                fac = SAFETY * err_norm ** (-_EXPO_ACC) * err_prev ** _EXPO_MEM
                if fac > MAX_FACTOR:
                    fac = MAX_FACTOR
                elif fac < MIN_FACTOR:
                    fac = MIN_FACTOR
            if was_rejected and fac > 1.0:
                fac = 1.0
            was_rejected = False
            err_prev = err_norm if err_norm > 1e-4 else 1e-4
            h_abs = h_abs * fac
        else:
            rejected += 1
            was_rejected = True
            fac = SAFETY * err_norm ** (-_EXPO_REJ)
            if fac < MIN_FACTOR:
                fac = MIN_FACTOR
            h_abs = h_abs * fac
            if h_abs < 1e-14 * max(1.0, abs(x)):
                return (STATUS_STEP_UNDERFLOW, n_stored, n_tgt, steps, rejected,
                        evals, max_defect, winding, x, h_abs, err_prev)

    return (STATUS_OK, n_stored, n_tgt, steps, rejected, evals,
            max_defect, winding, x, h_abs, err_prev)


@njit(cache=True)
def _gj_rhs(x, y, c, alpha, beta, j, out):
    """Frame system plus the complex accumulator ``int_0^x k eta_j ds``.

    State layout: [m(3), n(3), b(3), Re I, Im I] with
    ``eta_j = (n_j + i b_j) / (1 + m_j)``.
    """
    k = c * math.exp(0.25 * alpha * x * x)
    t = 0.5 * beta * x
    for i in range(3):
        out[i] = k * y[3 + i]
        out[3 + i] = -k * y[i] - t * y[6 + i]
        out[6 + i] = t * y[3 + i]
    denom = 1.0 + y[j]
    out[9] = k * y[3 + j] / denom
    out[10] = k * y[6 + j] / denom


@njit(cache=True)
def gj_kernel(
    c,
    alpha,
    beta,
    j,
    x_end,
    rtol,
    atol,
    guard_coef,
    max_evals,
    min_denom_floor,
    targets,
    tgt_buf,
):
    """Integrate the frame plus ``int k eta_j`` from 0, recording targets.

    Returns ``(status, n_targets_done, steps, rejected, evals, min_denom, x_reached)``.
    """
    ndim = 11
    y = np.zeros(ndim)
    y[0] = 1.0
    y[4] = 1.0
    y[8] = 1.0
    x = 0.0
    sign = 1.0 if x_end >= 0.0 else -1.0
    evals = 0
    steps = 0
    rejected = 0
    n_tgt = 0
    min_denom = 2.0
    err_prev = 1e-4
    was_rejected = False

    K = np.empty((13, ndim))
    ytmp = np.empty(ndim)
    y_new = np.empty(ndim)

    while n_tgt < targets.shape[0] and sign * (targets[n_tgt] - x) <= 1e-15 * max(1.0, abs(x)):
        for i in range(ndim):
            tgt_buf[n_tgt, i] = y[i]
        n_tgt += 1

    _gj_rhs(x, y, c, alpha, beta, j, K[0])
    evals += 1
    kfreq = c
    guard = guard_coef / (1.0 + kfreq)
    h_abs = 0.01 * guard

    while sign * (x_end - x) > 0.0:
        if evals + _EVALS_PER_STEP > max_evals:
            return (STATUS_BUDGET, n_tgt, steps, rejected, evals, min_denom, x)
        kfreq = c * math.exp(0.25 * alpha * x * x)
        guard = guard_coef / (1.0 + kfreq + 0.5 * beta * abs(x))
        if h_abs > guard:
            h_abs = guard
        remaining = sign * (x_end - x)
        hit_end = False
        if h_abs >= remaining:
            h_abs = remaining
            hit_end = True
        hit_target = False
        if n_tgt < targets.shape[0]:
            dist_t = sign * (targets[n_tgt] - x)
            if h_abs >= dist_t:
                h_abs = dist_t
                hit_target = True
                hit_end = hit_end and (dist_t >= remaining)

        h = sign * h_abs
        for s in range(1, 12):
            for i in range(ndim):
                acc = 0.0
                for j2 in range(s):
                    aij = A[s, j2]
                    if aij != 0.0:
                        acc += aij * K[j2, i]
                ytmp[i] = y[i] + h * acc
            _gj_rhs(x + C[s] * h, ytmp, c, alpha, beta, j, K[s])
        for i in range(ndim):
            acc = 0.0
            for j2 in range(12):
                bj = B[j2]
                if bj != 0.0:
                    acc += bj * K[j2, i]
            y_new[i] = y[i] + h * acc
        if hit_target:
            x_new = targets[n_tgt]
        elif hit_end:
            x_new = x_end
        else:
            x_new = x + h
        _gj_rhs(x_new, y_new, c, alpha, beta, j, K[12])
        evals += _EVALS_PER_STEP

        err5n2 = 0.0
        err3n2 = 0.0
        for i in range(ndim):
            e5 = 0.0
            e3 = 0.0
            for j2 in range(13):
                e5 += E5[j2] * K[j2, i]
                e3 += E3[j2] * K[j2, i]
            sc = atol + rtol * max(abs(y[i]), abs(y_new[i]))
            e5 /= sc
            e3 /= sc
            err5n2 += e5 * e5
            err3n2 += e3 * e3
        denom = err5n2 + 0.01 * err3n2
        if denom > 0.0:
            err_norm = h_abs * err5n2 / math.sqrt(denom * ndim)
        else:
            err_norm = 0.0

        if err_norm < 1.0:
            steps += 1
            x = x_new
            for i in range(ndim):
                y[i] = y_new[i]
                K[0, i] = K[12, i]
            d = 1.0 + y[j]
            if d < min_denom:
                min_denom = d
            if d < min_denom_floor:
                return (STATUS_SINGULAR, n_tgt, steps, rejected, evals, min_denom, x)
            if hit_target:
                for i in range(ndim):
                    tgt_buf[n_tgt, i] = y[i]
                n_tgt += 1
                while (
                    n_tgt < targets.shape[0]
                    and sign * (targets[n_tgt] - x) <= 1e-15 * max(1.0, abs(x))
                ):
                    for i in range(ndim):
                        tgt_buf[n_tgt, i] = y[i]
                    n_tgt += 1
            if err_norm == 0.0:
                fac = MAX_FACTOR
            else:
                fac = SAFETY * err_norm ** (-_EXPO_ACC) * err_prev ** _EXPO_MEM
                if fac > MAX_FACTOR:
                    fac = MAX_FACTOR
                elif fac < MIN_FACTOR:
                    fac = MIN_FACTOR
            if was_rejected and fac > 1.0:
                fac = 1.0
            was_rejected = False
            err_prev = err_norm if err_norm > 1e-4 else 1e-4
            h_abs = h_abs * fac
        else:
            rejected += 1
            was_rejected = True
            fac = SAFETY * err_norm ** (-_EXPO_REJ)
            if fac < MIN_FACTOR:
                fac = MIN_FACTOR
            h_abs = h_abs * fac
            if h_abs < 1e-14 * max(1.0, abs(x)):
                return (STATUS_STEP_UNDERFLOW, n_tgt, steps, rejected, evals, min_denom, x)

    return (STATUS_OK, n_tgt, steps, rejected, evals, min_denom, x)


@njit(cache=True)
def _osc_rhs(x, y, sigma, alpha, gamma, n, out):
    """Phase theta' = sigma e^{alpha x^2/4} and weighted cos/sin integrands."""
    out[0] = sigma * math.exp(0.25 * alpha * x * x)
    w = math.exp(-gamma * x * x)
    for _ in range(n):
        w *= x
    out[1] = w * math.cos(y[0])
    out[2] = w * math.sin(y[0])


@njit(cache=True)
def osc_kernel(sigma, alpha, gamma, n, x0, theta0, x_end, rtol, atol, guard_coef, max_evals):
    """Integrate ``int_{x0}^{x_end} s^n e^{i theta(s) - gamma s^2} ds``.

    ``theta`` solves ``theta' = sigma e^{alpha s^2/4}`` from ``theta0`` and is
    reduced mod 2 pi after every accepted step.

    Returns ``(status, re, im, theta_end, steps, rejected, evals)``.
    """
    ndim = 3
    y = np.zeros(ndim)
    y[0] = theta0
    x = x0
    sign = 1.0 if x_end >= x0 else -1.0
    evals = 0
    steps = 0
    rejected = 0
    winding = 0
    err_prev = 1e-4
    was_rejected = False

    K = np.empty((13, ndim))
    ytmp = np.empty(ndim)
    y_new = np.empty(ndim)

    _osc_rhs(x, y, sigma, alpha, gamma, n, K[0])
    evals += 1
    guard = guard_coef / (1.0 + abs(sigma) * math.exp(0.25 * alpha * x * x) + gamma * abs(x))
    h_abs = 0.01 * guard

    while sign * (x_end - x) > 0.0:
        if evals + _EVALS_PER_STEP > max_evals:
            return (STATUS_BUDGET, y[1], y[2], y[0], steps, rejected, evals)
        guard = guard_coef / (1.0 + abs(sigma) * math.exp(0.25 * alpha * x * x) + gamma * abs(x))
        if h_abs > guard:
            h_abs = guard
        remaining = sign * (x_end - x)
        hit_end = False
        if h_abs >= remaining:
            h_abs = remaining
            hit_end = True

        h = sign * h_abs
        for s in range(1, 12):
            for i in range(ndim):
                acc = 0.0
                for j in range(s):
                    aij = A[s, j]
                    if aij != 0.0:
                        acc += aij * K[j, i]
                ytmp[i] = y[i] + h * acc
            _osc_rhs(x + C[s] * h, ytmp, sigma, alpha, gamma, n, K[s])
        for i in range(ndim):
            acc = 0.0
            for j in range(12):
                bj = B[j]
                if bj != 0.0:
                    acc += bj * K[j, i]
            y_new[i] = y[i] + h * acc
        x_new = x_end if hit_end else x + h
        _osc_rhs(x_new, y_new, sigma, alpha, gamma, n, K[12])
        evals += _EVALS_PER_STEP

        err5n2 = 0.0
        err3n2 = 0.0
        for i in range(ndim):
            e5 = 0.0
            e3 = 0.0
            for j in range(13):
                e5 += E5[j] * K[j, i]
                e3 += E3[j] * K[j, i]
            sc = atol + rtol * max(abs(y[i]), abs(y_new[i]))
            e5 /= sc
            e3 /= sc
            err5n2 += e5 * e5
            err3n2 += e3 * e3
        denom = err5n2 + 0.01 * err3n2
        if denom > 0.0:
            err_norm = h_abs * err5n2 / math.sqrt(denom * ndim)
        else:
            err_norm = 0.0

        if err_norm < 1.0:
            steps += 1
            x = x_new
            for i in range(ndim):
                y[i] = y_new[i]
                K[0, i] = K[12, i]
            y[0], winding = _reduce_psi(y[0], winding)
            if err_norm == 0.0:
                fac = MAX_FACTOR
            else:
                fac = SAFETY * err_norm ** (-_EXPO_ACC) * err_prev ** _EXPO_MEM
                if fac > MAX_FACTOR:
                    fac = MAX_FACTOR
                elif fac < MIN_FACTOR:
                    fac = MIN_FACTOR
            if was_rejected and fac > 1.0:
                fac = 1.0
            was_rejected = False
            err_prev = err_norm if err_norm > 1e-4 else 1e-4
            h_abs = h_abs * fac
        else:
            rejected += 1
            was_rejected = True
            fac = SAFETY * err_norm ** (-_EXPO_REJ)
            if fac < MIN_FACTOR:
                fac = MIN_FACTOR
            h_abs = h_abs * fac
            if h_abs < 1e-14 * max(1.0, abs(x)):
                return (STATUS_STEP_UNDERFLOW, y[1], y[2], y[0], steps, rejected, evals)

    return (STATUS_OK, y[1], y[2], y[0], steps, rejected, evals)
