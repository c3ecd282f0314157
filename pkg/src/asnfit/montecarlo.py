"""Monte Carlo comparison of the estimators: bias and MSE versus sample size.

For every sample size ``n`` and replication ``k`` one sample is drawn from the
true ASN law with its own random stream, and every requested method is fitted
to that same sample. Per method and ``n``,

    bias_j = mean_k(theta_hat_j^(k) - theta_j)
    mse_j  = mean_k((theta_hat_j^(k) - theta_j)^2)

over the replications whose fit converged; the others are counted as failures.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import distribution as dist
from .distribution import AsnParams
from .errors import AsnError, DomainError
from .estimators import Method, OrderedSample, fit

__all__ = [
    "SimConfig",
    "CellSummary",
    "SimulationReport",
    "run_study",
    "bias_mse",
    "replication_stream",
    "PARAMETERS",
    "CSV_COLUMNS",
]

log = logging.getLogger(__name__)

PARAMETERS = ("mu", "sigma", "alpha")
CSV_COLUMNS = ("method", "n", "parameter", "bias", "mse", "failures")

Sampler = Callable[[AsnParams, int, np.random.Generator], np.ndarray]


@dataclass(frozen=True)
class SimConfig:
    truth: AsnParams
    n_grid: tuple
    replications: int
    methods: tuple = tuple(Method)
    master_seed: int = 0
    init: str = "data"

    def __post_init__(self):
        n_grid = tuple(int(n) for n in self.n_grid)
        if not n_grid:
            raise DomainError("n_grid is empty")
        if any(n < 10 for n in n_grid):
            raise DomainError("every sample size in n_grid must be >= 10")
        if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
            raise DomainError("n_grid must be strictly increasing")
        if int(self.replications) < 1:
            raise DomainError("replications must be >= 1")
        methods = tuple(Method.parse(m) for m in self.methods)
        if not methods:
            raise DomainError("no methods requested")
        if self.init not in ("data", "truth"):
            raise DomainError(f"init must be 'data' or 'truth', got {self.init!r}")
        object.__setattr__(self, "n_grid", n_grid)
        object.__setattr__(self, "replications", int(self.replications))
        object.__setattr__(self, "methods", methods)
        object.__setattr__(self, "master_seed", int(self.master_seed))


@dataclass(frozen=True)
class CellSummary:
    method: Method
    n: int
    bias: tuple
    mse: tuple
    failures: int
    successes: int


@dataclass
class SimulationReport:
    config: SimConfig
    cells: dict = field(default_factory=dict)

    def cell(self, method, n: int) -> CellSummary:
        return self.cells[(Method.parse(method), int(n))]

    def rows(self) -> list[dict]:
        """Flat records, one per (method, n, parameter)."""
        out = []
        for method in self.config.methods:
            for n in self.config.n_grid:
                c = self.cells[(method, n)]
                for j, name in enumerate(PARAMETERS):
                    out.append({
                        "method": method.value,
                        "n": n,
                        "parameter": name,
                        "bias": c.bias[j],
                        "mse": c.mse[j],
                        "failures": c.failures,
                    })
        return out

    def to_csv(self, fh=None) -> str:
        """Write the flat table as CSV to ``fh`` (if given) and return it."""
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows():
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


def bias_mse(estimates: Sequence[AsnParams], truth: AsnParams):
    """Return ``(bias, mse)`` triples for (mu, sigma, alpha)."""
    est = np.array([e.as_tuple() for e in estimates], dtype=float).reshape(-1, 3)
    if est.shape[0] == 0:
        raise DomainError("no estimates to summarise")
    err = est - np.array(truth.as_tuple())
    return tuple(float(v) for v in err.mean(axis=0)), tuple(float(v) for v in (err * err).mean(axis=0))


def replication_stream(master_seed: int, n: int, k: int) -> np.random.Generator:
    """Independent stream for replication ``k`` at sample size ``n``.

    Philox is counter based and the key comes from hashing the triple, so any
    replication can be regenerated without replaying the others.
    """
    seq = np.random.SeedSequence([int(master_seed), int(n), int(k)])
    return np.random.Generator(np.random.Philox(seq))


def _replicate(config: SimConfig, n: int, k: int, sampler: Optional[Sampler]):
    rng = replication_stream(config.master_seed, n, k)
    draw = sampler or dist.sample
    data = OrderedSample.from_values(draw(config.truth, n, rng))
    init = config.truth if config.init == "truth" else None
    out = []
    for method in config.methods:
        try:
            res = fit(data, method, init=init)
        except AsnError as exc:
            log.debug("replication n=%d k=%d %s failed: %s", n, k, method, exc)
            out.append(None)
            continue
        out.append(res.params.as_tuple() if res.converged else None)
    return out


def _replicate_task(args):
    return _replicate(*args)


def run_study(config: SimConfig, sampler: Optional[Sampler] = None, workers: int = 1,
              progress: Optional[Callable[[int, int], None]] = None) -> SimulationReport:
    """Run the replicated sampling-and-fitting study described by ``config``.

    ``sampler(truth, n, rng)`` replaces inverse-transform sampling when given
    (it must be picklable for ``workers > 1``). Results are assembled by
    replication index, so the report does not depend on execution order.
    """
    N = config.replications
    tasks = [(config, n, k, sampler) for n in config.n_grid for k in range(N)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_replicate_task, tasks, chunksize=max(1, len(tasks) // (8 * workers))))
    else:
        results = []
        for i, task in enumerate(tasks):
            results.append(_replicate_task(task))
            if progress is not None:
                progress(i + 1, len(tasks))

    report = SimulationReport(config)
    for ni, n in enumerate(config.n_grid):
        block = results[ni * N:(ni + 1) * N]
        for mi, method in enumerate(config.methods):
            ok = [rep[mi] for rep in block if rep[mi] is not None]
            failures = N - len(ok)
            if ok:
                bias, mse = bias_mse([AsnParams(*p) for p in ok], config.truth)
            else:
                bias = mse = (float("nan"),) * 3
            report.cells[(method, n)] = CellSummary(method, n, bias, mse, failures, len(ok))
    return report

