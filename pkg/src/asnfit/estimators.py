"""Seven estimators for ASN(mu, sigma, alpha) and the shared fit pipeline.

Every method is expressed as an objective to be *minimised* over an ordered
sample:

=====  ==========================================================
MLE    negative log-likelihood
LSQ    sum (F(t_(i)) - i/(n+1))^2
WLQ    LSQ with weights (n+1)^2 (n+2) / (i (n-i+1))
MPS    -(1/(n+1)) sum log D_i  (D_i = spacings of F)
CME    1/(12n) + sum (F(t_(i)) - (2i-1)/(2n))^2
ADE    -n - (1/n) sum (2i-1) [log F(t_(i)) + log S(t_(n+1-i))]
RADE   n/2 - 2 sum F(t_(i)) - (1/n) sum (2i-1) log S(t_(n+1-i))
=====  ==========================================================

The fit pipeline is ``initialize -> minimize -> re-evaluate``; the same
simplex kernel serves all seven methods.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special

from . import distribution as dist
from .distribution import LOG_SQRT_2PI, AsnParams
from .errors import DegenerateDataError, DomainError
from .optimize import minimize, numeric_hessian

__all__ = [
    "Method",
    "OrderedSample",
    "FitResult",
    "neg_log_likelihood",
    "score",
    "lsq_objective",
    "wlq_objective",
    "mps_objective",
    "cme_objective",
    "ade_objective",
    "rade_objective",
    "ade_from_cdf",
    "rade_from_cdf",
    "mps_spacings",
    "objective",
    "objective_gradient",
    "initialize",
    "moment_start",
    "standard_moments",
    "fit",
    "ALPHA_GRID",
]

LOG_FLOOR = 1e-300
MIN_FIT_SIZE = 4
ALPHA_GRID = np.linspace(-10.0, 10.0, 41)
# Beyond this |alpha| the fit is following the ridge toward the limiting law
# alpha -> +/-inf (density z^2 phi(z) / sigma) and has no finite optimum.
ALPHA_DIVERGENCE = 1e6
# Starting simplex edges in the standardised coordinates used by `fit`.
SIMPLEX_STEP = (0.1, 0.1, 0.5)


class Method(str, enum.Enum):
    MLE = "MLE"
    LSQ = "LSQ"
    WLQ = "WLQ"
    MPS = "MPS"
    CME = "CME"
    ADE = "ADE"
    RADE = "RADE"

    @classmethod
    def parse(cls, name) -> "Method":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().upper())
        except ValueError:
            raise DomainError(
                f"unknown method {name!r}; expected one of {', '.join(m.value for m in cls)}"
            ) from None

    def __str__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class OrderedSample:
    """Ascending, finite observations plus the runs of exactly equal values.

    Build one with :meth:`from_values` unless the data are already sorted.
    """

    values: np.ndarray
    tie_runs: tuple = field(init=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size == 0:
            raise DomainError("sample is empty")
        if not np.all(np.isfinite(v)):
            raise DomainError("sample contains non-finite values")
        if np.any(np.diff(v) < 0):
            raise DomainError("values are not in ascending order")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "tie_runs", _tie_runs(v))

    @classmethod
    def from_values(cls, values) -> "OrderedSample":
        return cls(np.sort(np.asarray(values, dtype=float).ravel()))

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def tie_mask(self) -> np.ndarray:
        """Boolean, length n - 1: entry k is True when t_(k+2) == t_(k+1)."""
        return self.values[1:] == self.values[:-1]

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, OrderedSample):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())


def _tie_runs(v: np.ndarray) -> tuple:
    runs = []
    start = 0
    for i in range(1, v.size + 1):
        if i == v.size or v[i] != v[start]:
            if i - start > 1:
                runs.append((start, i - start))
            start = i
    return tuple(runs)


# --- raw kernels -------------------------------------------------------------
# Operate on plain floats so the optimiser loop never re-validates AsnParams.

def _cdf_sf(t, mu, sigma, a):
    z = (t - mu) / sigma
    skew = a * (2.0 - a * z) / (2.0 + a * a) * dist.std_normal_pdf(z)
    F = np.clip(special.ndtr(z) + skew, 0.0, 1.0)
    S = np.clip(special.ndtr(-z) - skew, 0.0, 1.0)
    return z, F, S


def _floor_log(x):
    clamped = bool(np.any(x < LOG_FLOOR))
    return np.log(np.maximum(x, LOG_FLOOR)), clamped


def _nll(s: OrderedSample, mu, sigma, a):
    t = s.values
    n = t.size
    z = (t - mu) / sigma
    val = (
        -np.sum(np.log((1.0 - a * z) ** 2 + 1.0))
        + n * math.log(2.0 + a * a)
        + n * math.log(sigma)
        + np.sum(0.5 * z * z)
        + n * LOG_SQRT_2PI
    )
    return float(val), False


def _lsq(s, mu, sigma, a):
    n = s.n
    _, F, _ = _cdf_sf(s.values, mu, sigma, a)
    r = F - np.arange(1, n + 1) / (n + 1.0)
    return float(np.sum(r * r)), False


def _wlq_weights(n):
    i = np.arange(1, n + 1, dtype=float)
    return (n + 1.0) ** 2 * (n + 2.0) / (i * (n - i + 1.0))


def _wlq(s, mu, sigma, a):
    n = s.n
    _, F, _ = _cdf_sf(s.values, mu, sigma, a)
    r = F - np.arange(1, n + 1) / (n + 1.0)
    return float(np.sum(_wlq_weights(n) * r * r)), False


def _spacings(s, mu, sigma, a):
    t = s.values
    z, F, S = _cdf_sf(t, mu, sigma, a)
    # Differences of S are used where the lower point is above the median,
    # avoiding cancellation of F values close to 1.
    inner = np.where(z[:-1] > 0.0, S[:-1] - S[1:], F[1:] - F[:-1])
    ties = s.tie_mask
    if ties.any():
        inner = np.where(ties, dist.pdf(AsnParams(mu, sigma, a), t[1:]), inner)
    return np.concatenate(([F[0]], inner, [S[-1]]))


def _mps(s, mu, sigma, a):
    logs, clamped = _floor_log(_spacings(s, mu, sigma, a))
    return float(-np.mean(logs)), clamped


def _cme(s, mu, sigma, a):
    n = s.n
    _, F, _ = _cdf_sf(s.values, mu, sigma, a)
    r = F - (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)
    return float(1.0 / (12.0 * n) + np.sum(r * r)), False


def ade_from_cdf(F, S):
    """Anderson-Darling objective from CDF and survival values at t_(1..n)."""
    F = np.asarray(F, dtype=float)
    S = np.asarray(S, dtype=float)
    n = F.size
    logF, c1 = _floor_log(F)
    logS, c2 = _floor_log(S[::-1])
    w = 2.0 * np.arange(1, n + 1) - 1.0
    return float(-n - np.sum(w * (logF + logS)) / n), c1 or c2


def rade_from_cdf(F, S):
    """Right-tail Anderson-Darling objective from CDF and survival values."""
    F = np.asarray(F, dtype=float)
    S = np.asarray(S, dtype=float)
    n = F.size
    logS, clamped = _floor_log(S[::-1])
    w = 2.0 * np.arange(1, n + 1) - 1.0
    return float(0.5 * n - 2.0 * np.sum(F) - np.sum(w * logS) / n), clamped


def _ade(s, mu, sigma, a):
    _, F, S = _cdf_sf(s.values, mu, sigma, a)
    return ade_from_cdf(F, S)


def _rade(s, mu, sigma, a):
    _, F, S = _cdf_sf(s.values, mu, sigma, a)
    return rade_from_cdf(F, S)


_KERNELS = {
    Method.MLE: _nll,
    Method.LSQ: _lsq,
    Method.WLQ: _wlq,
    Method.MPS: _mps,
    Method.CME: _cme,
    Method.ADE: _ade,
    Method.RADE: _rade,
}


# --- public objectives --------------------------------------------------------

def objective(method, sample: OrderedSample, params: AsnParams, with_flag: bool = False):
    """Evaluate the minimised objective of ``method``.

    With ``with_flag`` the return value is ``(value, clamped)`` where
    ``clamped`` reports whether any F, S or spacing was floored at 1e-300
    before taking its logarithm.
    """
    value, clamped = _KERNELS[Method.parse(method)](sample, *params.as_tuple())
    return (value, clamped) if with_flag else value


def neg_log_likelihood(sample: OrderedSample, params: AsnParams) -> float:
    return _nll(sample, *params.as_tuple())[0]


def lsq_objective(sample: OrderedSample, params: AsnParams) -> float:
    return _lsq(sample, *params.as_tuple())[0]


def wlq_objective(sample: OrderedSample, params: AsnParams) -> float:
    return _wlq(sample, *params.as_tuple())[0]


def mps_objective(sample: OrderedSample, params: AsnParams) -> float:
    """Negated mean log spacing, -H.

    Where consecutive order statistics are tied, the zero spacing is replaced
    by the density at the tied value.
    """
    return _mps(sample, *params.as_tuple())[0]


def mps_spacings(sample: OrderedSample, params: AsnParams) -> np.ndarray:
    """The n + 1 spacings D_i (tie-substituted), before flooring."""
    return _spacings(sample, *params.as_tuple())


def cme_objective(sample: OrderedSample, params: AsnParams) -> float:
    return _cme(sample, *params.as_tuple())[0]


def ade_objective(sample: OrderedSample, params: AsnParams) -> float:
    return _ade(sample, *params.as_tuple())[0]


def rade_objective(sample: OrderedSample, params: AsnParams) -> float:
    return _rade(sample, *params.as_tuple())[0]


# --- derivatives ---------------------------------------------------------------

def _obs_score(t, params: AsnParams) -> np.ndarray:
    """Per-observation gradient of log f, shape (3, n)."""
    mu, sigma, a = params.as_tuple()
    z = (np.asarray(t, dtype=float) - mu) / sigma
    u = 1.0 - a * z
    q = u * u + 1.0
    d_mu = (2.0 * a * u / q + z) / sigma
    d_sigma = (2.0 * a * z * u / q - 1.0 + z * z) / sigma
    d_alpha = -2.0 * z * u / q - 2.0 * a / (2.0 + a * a)
    return np.vstack([d_mu, d_sigma, d_alpha])


def score(sample: OrderedSample, params: AsnParams) -> np.ndarray:
    """Gradient of the log-likelihood with respect to (mu, sigma, alpha).

    d/dsigma carries the -n/sigma term from the Jacobian of the scale, and
    d/dalpha the -2n alpha / (2 + alpha^2) term from the normalising constant.
    """
    return _obs_score(sample.values, params).sum(axis=1)


def _deltas(t, params):
    return np.vstack([dist.delta1(params, t), dist.delta2(params, t), dist.delta3(params, t)])


def objective_gradient(method, sample: OrderedSample, params: AsnParams) -> np.ndarray:
    """Analytic gradient of the minimised objective in (mu, sigma, alpha).

    Built from the CDF partial derivatives (delta1..delta3) for the
    distance-based methods; used for diagnostics and verification only.
    """
    method = Method.parse(method)
    t = sample.values
    n = sample.n
    i = np.arange(1, n + 1, dtype=float)
    if method is Method.MLE:
        return -score(sample, params)
    _, F, S = _cdf_sf(t, *params.as_tuple())
    D = _deltas(t, params)
    if method is Method.LSQ:
        return 2.0 * D @ (F - i / (n + 1.0))
    if method is Method.WLQ:
        return 2.0 * D @ (_wlq_weights(n) * (F - i / (n + 1.0)))
    if method is Method.CME:
        return 2.0 * D @ (F - (2.0 * i - 1.0) / (2.0 * n))
    w = 2.0 * i - 1.0
    if method is Method.ADE:
        return -(D / F) @ w / n + (D[:, ::-1] / S[::-1]) @ w / n
    if method is Method.RADE:
        return -2.0 * D.sum(axis=1) + (D[:, ::-1] / S[::-1]) @ w / n
    # MPS: spacing derivatives are differences of deltas, with zero at both ends.
    padded = np.hstack([np.zeros((3, 1)), D, np.zeros((3, 1))])
    dD = padded[:, 1:] - padded[:, :-1]
    spac = _spacings(sample, *params.as_tuple())
    terms = dD / spac
    ties = np.flatnonzero(sample.tie_mask) + 1
    if ties.size:
        terms[:, ties] = _obs_score(t[ties], params)
    return -terms.sum(axis=1) / (n + 1.0)


# --- fitting --------------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    """Estimated parameters with the objective value and optimiser diagnostics."""

    params: AsnParams
    method: Method
    objective: float
    converged: bool
    iterations: int
    init: AsnParams
    n: int
    stderr: Optional[tuple] = None
    clamped: bool = False
    diverged: bool = False

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "n": self.n,
            "mu": self.params.mu,
            "sigma": self.params.sigma,
            "alpha": self.params.alpha,
            "objective": self.objective,
            "converged": self.converged,
            "iterations": self.iterations,
            "stderr": None if self.stderr is None else dict(zip(("mu", "sigma", "alpha"), self.stderr)),
            "init": self.init.to_dict(),
            "clamped": self.clamped,
            "diverged": self.diverged,
        }


def moment_start(sample: OrderedSample) -> tuple[float, float]:
    """Sample mean and divide-by-n standard deviation."""
    if sample.n < MIN_FIT_SIZE:
        raise DegenerateDataError(f"need at least {MIN_FIT_SIZE} observations, got {sample.n}")
    t = sample.values
    mu0 = float(np.mean(t))
    sd0 = float(np.sqrt(np.mean((t - mu0) ** 2)))
    if not sd0 > 0.0:
        raise DegenerateDataError("sample has zero variance")
    return mu0, sd0


def standard_moments(alpha: float) -> tuple[float, float]:
    """Mean and standard deviation of the standard ASN(0, 1, alpha) law."""
    a2 = alpha * alpha
    m1 = -2.0 * alpha / (2.0 + a2)
    m2 = (2.0 + 3.0 * a2) / (2.0 + a2)
    return m1, math.sqrt(m2 - m1 * m1)


def initialize(sample: OrderedSample, method, matched: bool = True) -> AsnParams:
    """Starting point from sample moments and a grid search over alpha.

    Each alpha on the grid -10, -9.5, ..., 10 is scored by the method's
    objective and the best one wins, ties going to the smaller ``|alpha|``.
    With ``matched`` (the default) the candidate for a given alpha uses the
    location and scale whose ASN mean and variance equal the sample's;
    otherwise every candidate shares (mean, sd) of the sample. At alpha = 0
    both choices coincide.

    The unmatched variant tends to select alpha = 0 for strongly skewed or
    bimodal data because a wide ASN with large alpha is penalised at the
    normal-fitted scale, and the simplex can then stall in a spurious local
    optimum near alpha = 0.
    """
    method = Method.parse(method)
    mean, sd = moment_start(sample)
    kernel = _KERNELS[method]
    order = np.argsort(np.abs(ALPHA_GRID), kind="stable")
    best, best_v = AsnParams(mean, sd, 0.0), math.inf
    for a in ALPHA_GRID[order]:
        a = float(a)
        if matched:
            m1, s1 = standard_moments(a)
            sigma = sd / s1
            mu = mean - sigma * m1
        else:
            mu, sigma = mean, sd
        v = kernel(sample, mu, sigma, a)[0]
        if v < best_v:
            best, best_v = AsnParams(mu, sigma, a), v
    return best


def _loglik_scale(method: Method, n: int) -> float:
    # Factor turning the minimised objective into a negative log-likelihood
    # analogue, so its Hessian is an observed information.
    return 1.0 if method is Method.MLE else n + 1.0


def fit(sample: OrderedSample, method, init: Optional[AsnParams] = None) -> FitResult:
    """Estimate ASN parameters from ``sample`` with ``method``.

    The simplex works in coordinates standardised by the starting values,
    u = (mu - mu0) / sigma0, v = log(sigma / sigma0), alpha, which makes the
    optimiser path equivariant under affine changes of the data. Passing
    ``init`` overrides the data-driven starting point.

    A fit whose alpha runs beyond ``ALPHA_DIVERGENCE`` is reported with
    ``diverged=True`` and ``converged=False``: the objective keeps improving
    as alpha -> +/-inf, so no finite estimate exists for that sample.

    For MLE and MPS, standard errors come from the inverse of the numerical
    Hessian of the (log-likelihood scaled) objective and are reported only
    when that Hessian is positive definite.
    """
    method = Method.parse(method)
    if init is None:
        init = initialize(sample, method)
    else:
        moment_start(sample)
    kernel = _KERNELS[method]
    mu0, sd0 = init.mu, init.sigma

    def to_params(x):
        return mu0 + sd0 * x[0], sd0 * math.exp(x[1]), x[2]

    def obj(x):
        if abs(x[1]) > 700.0:
            return math.inf
        return kernel(sample, *to_params(x))[0]

    res = minimize(obj, (0.0, 0.0, init.alpha), step=SIMPLEX_STEP)
    params = AsnParams(*to_params(res.x))
    value, clamped = kernel(sample, *params.as_tuple())
    diverged = abs(params.alpha) > ALPHA_DIVERGENCE
    converged = res.converged and not diverged

    stderr = None
    if method in (Method.MLE, Method.MPS) and converged:
        stderr = _stderr(obj, res.x, params, sd0, _loglik_scale(method, sample.n))

    return FitResult(
        params=params,
        method=method,
        objective=value,
        converged=converged,
        iterations=res.iterations,
        init=init,
        n=sample.n,
        stderr=stderr,
        clamped=clamped,
        diverged=diverged,
    )


def _stderr(obj, x, params: AsnParams, sd0: float, scale: float):
    try:
        hess = scale * numeric_hessian(obj, x)
    except DomainError:
        return None
    try:
        np.linalg.cholesky(hess)
    except np.linalg.LinAlgError:
        return None
    cov = np.linalg.inv(hess)
    jac = np.diag([sd0, params.sigma, 1.0])
    var = np.diag(jac @ cov @ jac.T)
    if not np.all(np.isfinite(var)) or np.any(var < 0):
        return None
    return tuple(float(v) for v in np.sqrt(var))
