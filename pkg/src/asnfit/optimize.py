"""Derivative-free minimisation and finite-difference derivatives.

Objectives are plain callables of a length-3 vector. Estimators minimise in
the unconstrained coordinates (mu, s, alpha) with s = log(sigma), or an
affine rescaling of them, so no box constraints are needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .distribution import AsnParams
from .errors import DomainError

__all__ = ["OptimResult", "minimize", "nelder_mead", "numeric_gradient", "numeric_hessian"]

ObjectiveFn = Callable[[np.ndarray], float]

XATOL = 1e-8
FATOL = 1e-10
MAX_ITER = 5000

# reflection, expansion, contraction, shrink
_RHO, _CHI, _GAMMA, _SIGMA = 1.0, 2.0, 0.5, 0.5


@dataclass(frozen=True)
class OptimResult:
    """Outcome of :func:`minimize`.

    ``x`` is the minimiser in the objective's own coordinates. When those are
    (mu, log sigma, alpha), :attr:`params` gives the corresponding
    :class:`AsnParams`.
    """

    x: tuple[float, float, float]
    value: float
    iterations: int
    converged: bool
    restarts: int
    evaluations: int = 0

    @property
    def argmin(self) -> tuple[float, float, float]:
        mu, s, alpha = self.x
        return (mu, math.exp(s), alpha)

    @property
    def params(self) -> AsnParams:
        return AsnParams(*self.argmin)


def _safe(fun: ObjectiveFn) -> ObjectiveFn:
    def wrapped(x):
        try:
            v = float(fun(x))
        except (FloatingPointError, OverflowError, ZeroDivisionError, DomainError):
            return math.inf
        return v if math.isfinite(v) else math.inf

    return wrapped


def nelder_mead(fun: ObjectiveFn, x0, step=0.1, max_iter: int = MAX_ITER,
                xatol: float = XATOL, fatol: float = FATOL):
    """Plain Nelder-Mead run.

    Returns ``(x, fx, iterations, converged, evaluations)``. ``step`` is the
    edge length of the axis-aligned starting simplex (scalar or per-axis).
    Convergence requires every vertex within ``xatol`` (max-norm) of the best
    one and every value within ``fatol`` of the best value.
    """
    x0 = np.asarray(x0, dtype=float)
    dim = x0.size
    steps = np.broadcast_to(np.asarray(step, dtype=float), (dim,))
    sim = np.empty((dim + 1, dim))
    sim[0] = x0
    for i in range(dim):
        sim[i + 1] = x0
        sim[i + 1, i] += steps[i]
    fsim = np.array([fun(v) for v in sim])
    nfev = dim + 1

    it = 0
    converged = False
    while True:
        order = np.argsort(fsim, kind="stable")
        sim, fsim = sim[order], fsim[order]
        if (np.max(np.abs(sim[1:] - sim[0])) <= xatol
                and np.max(np.abs(fsim[1:] - fsim[0])) <= fatol):
            converged = True
            break
        if it >= max_iter:
            break
        it += 1

        centroid = sim[:-1].mean(axis=0)
        xr = centroid + _RHO * (centroid - sim[-1])
        fr = fun(xr)
        nfev += 1
        shrink = False
        if fr < fsim[0]:
            xe = centroid + _RHO * _CHI * (centroid - sim[-1])
            fe = fun(xe)
            nfev += 1
            if fe < fr:
                sim[-1], fsim[-1] = xe, fe
            else:
                sim[-1], fsim[-1] = xr, fr
        elif fr < fsim[-2]:
            sim[-1], fsim[-1] = xr, fr
        elif fr < fsim[-1]:
            xc = centroid + _GAMMA * (xr - centroid)
            fc = fun(xc)
            nfev += 1
            if fc <= fr:
                sim[-1], fsim[-1] = xc, fc
            else:
                shrink = True
        else:
            xcc = centroid + _GAMMA * (sim[-1] - centroid)
            fcc = fun(xcc)
            nfev += 1
            if fcc < fsim[-1]:
                sim[-1], fsim[-1] = xcc, fcc
            else:
                shrink = True
        if shrink:
            for j in range(1, dim + 1):
                sim[j] = sim[0] + _SIGMA * (sim[j] - sim[0])
                fsim[j] = fun(sim[j])
            nfev += dim

    return sim[0].copy(), float(fsim[0]), it, converged, nfev


def minimize(obj: ObjectiveFn, start: Sequence[float], step=0.1) -> OptimResult:
    """Nelder-Mead from ``start``, then one restart from the incumbent.

    Non-finite objective values are treated as +inf, so they are never
    accepted into the simplex. The reported convergence flag is that of the
    restart, which begins with a fresh simplex of the same size and therefore
    re-checks that the first run did not stall on a degenerate simplex.
    """
    start = np.asarray(start, dtype=float)
    if start.shape != (3,) or not np.all(np.isfinite(start)):
        raise DomainError("start must be a finite 3-vector")
    fun = _safe(obj)
    x, fx, it1, _, nfev1 = nelder_mead(fun, start, step)
    x, fx, it2, converged, nfev2 = nelder_mead(fun, x, step)
    return OptimResult(
        x=tuple(float(v) for v in x),
        value=fx,
        iterations=it1 + it2,
        converged=converged,
        restarts=1,
        evaluations=nfev1 + nfev2,
    )


def _steps(x):
    return 1e-5 * np.maximum(1.0, np.abs(x))


def _eval(obj, x, coord):
    v = float(obj(x))
    if not math.isfinite(v):
        raise DomainError(f"objective is not finite in the stencil along coordinate {coord}")
    return v


def numeric_gradient(obj: ObjectiveFn, at) -> np.ndarray:
    """Central-difference gradient with step 1e-5 * max(1, |x_i|)."""
    at = np.asarray(at, dtype=float)
    h = _steps(at)
    grad = np.empty(at.size)
    for i in range(at.size):
        e = np.zeros(at.size)
        e[i] = h[i]
        grad[i] = (_eval(obj, at + e, i) - _eval(obj, at - e, i)) / (2.0 * h[i])
    return grad


def numeric_hessian(obj: ObjectiveFn, at) -> np.ndarray:
    """Central-difference Hessian, symmetrised as (H + H^T) / 2."""
    at = np.asarray(at, dtype=float)
    m = at.size
    h = _steps(at)
    f0 = _eval(obj, at, 0)
    hess = np.empty((m, m))
    for i in range(m):
        ei = np.zeros(m)
        ei[i] = h[i]
        hess[i, i] = (_eval(obj, at + ei, i) - 2.0 * f0 + _eval(obj, at - ei, i)) / h[i] ** 2
        for j in range(i + 1, m):
            ej = np.zeros(m)
            ej[j] = h[j]
            fpp = _eval(obj, at + ei + ej, i)
            fpm = _eval(obj, at + ei - ej, i)
            fmp = _eval(obj, at - ei + ej, j)
            fmm = _eval(obj, at - ei - ej, j)
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j])
    return 0.5 * (hess + hess.T)
