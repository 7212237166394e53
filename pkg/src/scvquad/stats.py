"""Replication driver and the statistics layer.

Runs replication ensembles under derived per-replication seeds, reduces
them to empirical confidence-level errors, rate fits, histograms and tail
fractions, and provides Monte Carlo verifiers for the two concentration
inequalities that underpin the error analysis (a p-norm Hoeffding bound
and a Marcinkiewicz-Zygmund moment bound).

Replications may be distributed over worker threads; every reduction is
indexed by replication number, so results are independent of the worker
count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .estimators import EstimatorConfig, run
from .testbed import Integrand

__all__ = [
    "derive_seed",
    "ErrorSample",
    "replicate",
    "prob_error",
    "RateFit",
    "fit_rate",
    "histogram",
    "tail_fraction",
    "UniformBounded",
    "Rademacher",
    "Constant",
    "hoeffding_bound",
    "HoeffdingReport",
    "verify_hoeffding_p",
    "MZReport",
    "mz_constant",
    "verify_mz",
    "hoeffding_default_suite",
    "mz_default_suite",
]

# rows drawn per chunk inside the verifier loops; fixed so that results do
# not depend on available memory
_CHUNK_ELEMENTS = 1 << 22


def derive_seed(master_seed: int, *indices: int) -> int:
    """Stable 64-bit seed for one branch of a seeded campaign.

    Distinct index tuples give statistically independent streams; the same
    tuple always reproduces the same seed.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(i) for i in indices))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ErrorSample:
    """Signed errors of R independent replications of one configuration."""

    errors: np.ndarray
    config: EstimatorConfig
    R: int
    master_seed: int

    def __post_init__(self):
        errors = np.asarray(self.errors, dtype=float)
        if errors.shape != (self.R,):
            raise ValueError(f"expected {self.R} errors, got shape {errors.shape}")
        object.__setattr__(self, "errors", errors)


def replicate(
    f: Integrand,
    cfg: EstimatorConfig,
    R: int,
    master_seed: int,
    workers: int = 1,
) -> ErrorSample:
    """R independent runs with per-replication seeds derived from the master.

    Requires the integrand's exact integral.  Errors are returned in
    replication-index order, so the result is bit-identical for any number
    of workers.
    """
    if f.exact_integral is None:
        raise ValueError(f"integrand {f.label!r} has no exact integral to compare against")
    if R < 1:
        raise ValueError(f"need R >= 1, got R={R}")
    exact = f.exact_integral

    def one(i: int) -> float:
        rep_cfg = replace(cfg, seed=derive_seed(master_seed, i))
        return run(f, rep_cfg).value - exact

    if workers <= 1:
        errors = [one(i) for i in range(R)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            errors = list(pool.map(one, range(R)))
    return ErrorSample(errors=np.array(errors), config=cfg, R=R, master_seed=master_seed)


def prob_error(sample: ErrorSample, delta: float) -> float:
    """Empirical confidence-level error at uncertainty delta.

    The ceil((1-delta)*R)-th order statistic of the absolute errors: the
    smallest observed threshold whose exceedance fraction is at most delta.
    The rank is computed in exact rational arithmetic to avoid roundoff at
    integer boundaries.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"need delta in (0,1), got {delta}")
    rank = math.ceil(Fraction(sample.R) * (1 - Fraction(delta)))
    return float(np.sort(np.abs(sample.errors))[rank - 1])


@dataclass(frozen=True)
class RateFit:
    """Least-squares power-law fit of error against budget, in log space."""

    points: tuple[tuple[float, float], ...]
    slope: float
    intercept: float
    residual: float


def fit_rate(pairs) -> RateFit:
    """Ordinary least squares for ``log e = slope*log n + intercept``.

    `residual` is the RMS misfit in log space.  Two points give the exact
    degenerate fit; all values must be positive.
    """
    points = tuple((float(n), float(e)) for n, e in pairs)
    if len(points) < 2:
        raise ValueError("need at least two (n, e) pairs")
    arr = np.asarray(points, dtype=float)
    if np.any(arr <= 0.0):
        raise ValueError("rate fits need strictly positive budgets and errors")
    x = np.log(arr[:, 0])
    y = np.log(arr[:, 1])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return RateFit(points=points, slope=float(slope), intercept=float(intercept), residual=residual)


def histogram(sample: ErrorSample, bins: int) -> list[tuple[float, float, int]]:
    """Equal-width bins spanning [min, max] of the signed errors.

    Returns (left, right, count) triples whose counts sum to R.  When all
    errors coincide the single populated degenerate bin is returned.
    """
    if bins < 1:
        raise ValueError(f"need bins >= 1, got {bins}")
    errors = sample.errors
    lo, hi = float(errors.min()), float(errors.max())
    if lo == hi:
        return [(lo, hi, sample.R)]
    counts, edges = np.histogram(errors, bins=bins, range=(lo, hi))
    return [
        (float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(bins)
    ]


def tail_fraction(sample: ErrorSample, threshold: float) -> float:
    """Fraction of replications with absolute error strictly above the threshold."""
    if threshold < 0.0:
        raise ValueError(f"need threshold >= 0, got {threshold}")
    return float(np.mean(np.abs(sample.errors) > threshold))


# ---------------------------------------------------------------------------
# bounded distributions for the inequality verifiers


@dataclass(frozen=True)
class UniformBounded:
    """Uniform on [low, high]."""

    low: float
    high: float

    def __post_init__(self):
        if not self.low <= self.high:
            raise ValueError(f"need low <= high, got [{self.low}, {self.high}]")

    @property
    def mean(self) -> float:
        return 0.5 * (self.low + self.high)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.low, self.high, size)


@dataclass(frozen=True)
class Rademacher:
    """Symmetric two-point distribution on {-scale, +scale}."""

    scale: float

    @property
    def mean(self) -> float:
        return 0.0

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.scale * (2.0 * rng.integers(0, 2, size) - 1.0)


@dataclass(frozen=True)
class Constant:
    """Degenerate point mass."""

    value: float

    @property
    def mean(self) -> float:
        return self.value

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, self.value)


# ---------------------------------------------------------------------------
# p-norm Hoeffding verifier


def hoeffding_bound(p: float, b, delta: float) -> float:
    """Deviation bound ``3/n * (2 log(2/delta))^(1-1/p) * ||b||_p``.

    Valid for the mean of n independent variables with |Z_i| <= b_i and
    1 < p < 2; the mean then stays within this bound of its expectation
    with probability at least 1 - delta.
    """
    if not 1.0 < p < 2.0:
        raise ValueError(f"need 1 < p < 2, got p={p}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"need delta in (0,1), got {delta}")
    b = np.asarray(b, dtype=float)
    if b.ndim != 1 or b.size < 1:
        raise ValueError("b must be a nonempty vector")
    if np.any(b < 0.0):
        raise ValueError("bounds b must be nonnegative")
    norm_p = float(np.sum(b**p) ** (1.0 / p))
    return 3.0 / b.size * (2.0 * math.log(2.0 / delta)) ** (1.0 - 1.0 / p) * norm_p


@dataclass(frozen=True)
class HoeffdingReport:
    """Monte Carlo check of the p-norm Hoeffding bound for one configuration."""

    p: float
    delta: float
    bound: float
    empirical_fail_rate: float
    trials: int
    n: int
    family: str
    label: str = ""

    @property
    def holds(self) -> bool:
        return self.empirical_fail_rate <= self.delta


def verify_hoeffding_p(
    p: float,
    b,
    delta: float,
    trials: int = 100_000,
    seed: int = 0,
    family: str = "uniform",
    label: str = "",
) -> HoeffdingReport:
    """Empirically check the p-norm Hoeffding bound.

    Draws `trials` independent vectors Z with |Z_i| <= b_i -- centered
    uniform by default, Rademacher (+-b_i, the variance-maximizing choice
    at fixed bounds) as the adversarial alternative -- and reports the
    fraction of trials whose mean deviates beyond the bound.  The bound
    guarantees a fail rate of at most delta.
    """
    if family not in ("uniform", "rademacher"):
        raise ValueError(f"unknown family {family!r}")
    if trials < 1:
        raise ValueError(f"need trials >= 1, got {trials}")
    bound = hoeffding_bound(p, b, delta)
    b = np.asarray(b, dtype=float)
    n = b.size
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    rows_per_chunk = max(1, _CHUNK_ELEMENTS // n)
    fails = 0
    done = 0
    while done < trials:
        rows = min(rows_per_chunk, trials - done)
        if family == "uniform":
            z = rng.uniform(-1.0, 1.0, (rows, n)) * b
        else:
            z = (2.0 * rng.integers(0, 2, (rows, n)) - 1.0) * b
        fails += int(np.count_nonzero(np.abs(z.mean(axis=1)) > bound))
        done += rows
    return HoeffdingReport(
        p=p,
        delta=delta,
        bound=bound,
        empirical_fail_rate=fails / trials,
        trials=trials,
        n=n,
        family=family,
        label=label,
    )


# ---------------------------------------------------------------------------
# Marcinkiewicz-Zygmund verifier


def mz_constant(q: float) -> float:
    """Usable (not optimal) constant: ``2^(1+1/q)`` for q <= 2, ``2(q-1)`` above."""
    if q < 1.0:
        raise ValueError(f"need q >= 1, got q={q}")
    return 2.0 ** (1.0 + 1.0 / q) if q < 2.0 else 2.0 * (q - 1.0)


@dataclass(frozen=True)
class MZReport:
    """Monte Carlo check of the moment bound for the mean of independent variables.

    `lhs` estimates the L_q norm of the mean's deviation; `rhs` is the
    bound ``c_q/n * (sum_i ||Z_i||_q^q')^(1/q')`` with q' = min(2, q) and
    the individual norms estimated from the same sample.  The stderr
    fields carry delta-method estimates of the Monte Carlo noise.
    """

    q: float
    lhs: float
    rhs: float
    lhs_stderr: float
    rhs_stderr: float
    trials: int
    n: int
    label: str = ""

    def satisfied(self, sigmas: float = 3.0) -> bool:
        return self.lhs <= self.rhs + sigmas * (self.lhs_stderr + self.rhs_stderr)


def _power_mean_with_stderr(values: np.ndarray, q: float) -> tuple[float, float]:
    """(mean(values^q))^(1/q) and its delta-method standard error."""
    w = values**q
    mw = float(w.mean())
    if mw <= 0.0:
        return 0.0, 0.0
    se_mw = float(w.std(ddof=1)) / math.sqrt(w.size)
    return mw ** (1.0 / q), se_mw * mw ** (1.0 / q - 1.0) / q


def verify_mz(q: float, dists, trials: int = 100_000, seed: int = 0, label: str = "") -> MZReport:
    """Empirically check the moment bound for the mean of independent draws.

    `dists` is a list of bounded distributions (one per summand) providing
    ``sample(rng, size)`` and an exact ``mean``.
    """
    if q < 1.0:
        raise ValueError(f"need q >= 1, got q={q}")
    dists = list(dists)
    if not dists:
        raise ValueError("need at least one distribution")
    if trials < 2:
        raise ValueError(f"need trials >= 2, got {trials}")
    n = len(dists)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    z = np.column_stack([dist.sample(rng, trials) for dist in dists])
    a = math.fsum(dist.mean for dist in dists) / n

    deviation = np.abs(z.mean(axis=1) - a)
    lhs, lhs_se = _power_mean_with_stderr(deviation, q)

    qp = min(2.0, q)
    norms = np.empty(n)
    norm_ses = np.empty(n)
    for i in range(n):
        norms[i], norm_ses[i] = _power_mean_with_stderr(np.abs(z[:, i]), q)
    total = float(np.sum(norms**qp))
    c = mz_constant(q)
    if total <= 0.0:
        rhs, rhs_se = 0.0, 0.0
    else:
        rhs = c / n * total ** (1.0 / qp)
        grads = c / n * total ** (1.0 / qp - 1.0) * norms ** (qp - 1.0)
        rhs_se = float(np.sqrt(np.sum((grads * norm_ses) ** 2)))
    return MZReport(
        q=q,
        lhs=lhs,
        rhs=rhs,
        lhs_stderr=lhs_se,
        rhs_stderr=rhs_se,
        trials=trials,
        n=n,
        label=label,
    )


# ---------------------------------------------------------------------------
# default verification suites


def hoeffding_default_suite(trials: int = 100_000, master_seed: int = 0) -> list[HoeffdingReport]:
    """Twenty p-norm Hoeffding checks spanning p, delta, size and bound shapes."""
    ps = (1.1, 1.3, 1.5, 1.7, 1.9)
    deltas = (0.2, 0.05, 0.01, 0.002)
    sizes = (1, 2, 4, 8, 16, 32, 64)
    reports = []
    for i, p in enumerate(ps):
        for j, delta in enumerate(deltas):
            idx = i * len(deltas) + j
            n = sizes[idx % len(sizes)]
            shape = idx % 4
            if shape == 0:
                b = np.ones(n)
            elif shape == 1:
                b = 0.7 ** np.arange(n)
            elif shape == 2:
                b = np.zeros(n)
                b[0] = 1.0
            else:
                b = np.random.default_rng(derive_seed(master_seed, 7, idx)).uniform(0.1, 2.0, n)
            family = "uniform" if idx % 2 == 0 else "rademacher"
            reports.append(
                verify_hoeffding_p(
                    p,
                    b,
                    delta,
                    trials=trials,
                    seed=derive_seed(master_seed, 1, idx),
                    family=family,
                    label=f"hoeffding[{idx}] p={p} delta={delta} n={n} {family}",
                )
            )
    return reports


def mz_default_suite(trials: int = 100_000, master_seed: int = 0) -> list[MZReport]:
    """Twenty moment-bound checks over q in {1, 1.5, 2, 3, 4} and four mixtures."""
    qs = (1.0, 1.5, 2.0, 3.0, 4.0)
    mixtures = {
        "iid_uniform": [UniformBounded(-1.0, 1.0) for _ in range(8)],
        "mixed": [
            UniformBounded(0.0, 1.0),
            UniformBounded(0.0, 1.0),
            Rademacher(2.0),
            Rademacher(2.0),
            Constant(0.5),
        ],
        "single_rademacher": [Rademacher(1.0)],
        "asymmetric": [UniformBounded(-0.5, 1.5) for _ in range(16)],
    }
    reports = []
    idx = 0
    for q in qs:
        for name, dists in mixtures.items():
            reports.append(
                verify_mz(
                    q,
                    dists,
                    trials=trials,
                    seed=derive_seed(master_seed, 2, idx),
                    label=f"mz[{idx}] q={q} {name}",
                )
            )
            idx += 1
    return reports
