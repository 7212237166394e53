"""The five quadrature methods.

Stratified control variates (SCV) interpolates the integrand on every
subcube of the m-grid, integrates those patches exactly, and corrects each
patch mean with a handful of uniform residual samples drawn inside the
same subcube.  Classical control variates (CV) uses the identical
piecewise interpolant but samples the residual iid over the whole cube;
CV+MoM replaces the residual mean by a median of group means; plain
stratified sampling and crude Monte Carlo complete the line-up.

Reproducibility contract: each invocation consumes a single counter-based
stream derived from its 64-bit seed.  The draw order is fixed (shift
first, then one batched sample block), subcubes are traversed in
lexicographic index order, and the outer accumulation over the m^d cells
uses exact compensated summation, so identical (config, seed) pairs give
bit-identical values regardless of how many worker threads run other
invocations concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .grid import poly_dim, regular_nodes, shifted_nodes, subcube_indices
from .interp import LocalInterpolator
from .testbed import Integrand

__all__ = [
    "Method",
    "DETERMINISTIC",
    "SHIFTED",
    "BudgetError",
    "EstimatorConfig",
    "EstimateRun",
    "scv",
    "classical_cv",
    "cv_mom",
    "stratified",
    "crude_mc",
    "run",
    "subdivisions_for_budget",
]

DETERMINISTIC = "deterministic"
SHIFTED = "shifted"
_MODES = (DETERMINISTIC, SHIFTED)

_MAX_SEED = 2**64


class Method(str, Enum):
    SCV = "scv"
    CV = "cv"
    CV_MOM = "cv_mom"
    STRAT = "strat"
    CRUDE = "crude"


class BudgetError(ValueError):
    """Configuration cannot meet its sampling budget."""


@dataclass(frozen=True)
class EstimatorConfig:
    """Parameters of one estimator invocation.

    `samples_per_cube` defaults to n0(s, d), which splits the evaluation
    budget evenly between interpolation and residual sampling.  `k` is the
    number of median-of-means groups and only matters for CV_MOM.  The
    dimension is not stored here; it comes from the integrand.
    """

    method: Method
    s: int
    m: int
    k: int = 11
    samples_per_cube: int | None = None
    interpolation_mode: str = DETERMINISTIC
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.s < 1:
            raise ValueError(f"need s >= 1, got s={self.s}")
        if self.m < 1:
            raise ValueError(f"need m >= 1, got m={self.m}")
        if self.k < 1:
            raise ValueError(f"need k >= 1, got k={self.k}")
        if self.samples_per_cube is not None and self.samples_per_cube < 1:
            raise ValueError(f"need samples_per_cube >= 1, got {self.samples_per_cube}")
        if self.interpolation_mode not in _MODES:
            raise ValueError(
                f"interpolation_mode must be one of {_MODES}, got {self.interpolation_mode!r}"
            )
        if not 0 <= self.seed < _MAX_SEED:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def resolved_samples_per_cube(self, d: int) -> int:
        if self.samples_per_cube is not None:
            return self.samples_per_cube
        return poly_dim(self.s, d)

    def budget(self, d: int) -> int:
        """Exact number of integrand evaluations the method will spend.

        SCV and CV: n0*m^d node evaluations plus samples_per_cube*m^d
        residual samples (2*n0*m^d at the default).  CV_MOM: node
        evaluations plus k*floor(samples_per_cube*m^d / k) residual
        samples.  STRAT: m^d.  CRUDE: samples_per_cube*m^d.
        """
        md = self.m**d
        n0 = poly_dim(self.s, d)
        spc = self.resolved_samples_per_cube(d)
        if self.method in (Method.SCV, Method.CV):
            return n0 * md + spc * md
        if self.method is Method.CV_MOM:
            n1 = (spc * md) // self.k
            if n1 < 1:
                raise BudgetError(
                    f"median-of-means needs samples_per_cube*m^d >= k, "
                    f"got {spc}*{md} < {self.k}"
                )
            return n0 * md + self.k * n1
        if self.method is Method.STRAT:
            return md
        return spc * md  # CRUDE


@dataclass(frozen=True)
class EstimateRun:
    """One realization of an estimator: its value and what it cost."""

    value: float
    evals: int
    config: EstimatorConfig
    seed: int


def _stream(seed: int) -> np.random.Generator:
    """Counter-based generator for one invocation; seeds index independent streams."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


class _Plan:
    """Shared geometry for one (s, d, m): nodes, solver, cell offsets."""

    def __init__(self, s: int, d: int, m: int):
        self.s, self.d, self.m = s, d, m
        self.base = LocalInterpolator(regular_nodes(s, d))
        self.offsets = subcube_indices(m, d).astype(float)
        self.n_cubes = self.offsets.shape[0]
        # lexicographic ravel strides for locating a sample's cell
        self.strides = m ** np.arange(d - 1, -1, -1, dtype=np.int64)


@lru_cache(maxsize=128)
def _plan(s: int, d: int, m: int) -> _Plan:
    return _Plan(s, d, m)


def _require(cfg: EstimatorConfig, method: Method) -> None:
    if cfg.method is not method:
        raise ValueError(f"config method is {cfg.method.value!r}, expected {method.value!r}")


def _local_solver(plan: _Plan, cfg: EstimatorConfig, rng: np.random.Generator) -> LocalInterpolator:
    """Interpolation solver for this run; draws the shared shift first in shifted mode."""
    if cfg.interpolation_mode == SHIFTED:
        shift = rng.random(plan.d)
        return LocalInterpolator(shifted_nodes(plan.base.nodes, shift))
    return plan.base


def _piecewise_fit(f: Integrand, plan: _Plan, solver: LocalInterpolator):
    """Interpolate f on every subcube at once.

    Evaluates f at the mapped nodes of all cells (lexicographic cell order,
    node order within each cell) and solves the shared collocation system
    against all value columns.  Returns (coeffs, cell_means) with coeffs of
    shape (n0, m^d).
    """
    pts = (solver.nodes.points[None, :, :] + plan.offsets[:, None, :]) / plan.m
    vals = f(pts.reshape(-1, plan.d)).reshape(plan.n_cubes, -1)
    coeffs = solver.solve(vals.T)
    means = solver.moments @ coeffs
    return coeffs, means


def _whole_cube_residuals(
    f: Integrand,
    plan: _Plan,
    solver: LocalInterpolator,
    coeffs: np.ndarray,
    rng: np.random.Generator,
    n_samples: int,
):
    """Residual f - g at iid uniform points of the whole cube, in draw order."""
    x = rng.random((n_samples, plan.d))
    cells = np.minimum((x * plan.m).astype(np.int64), plan.m - 1)
    cols = cells @ plan.strides
    local = x * plan.m - cells
    gx = np.einsum("ij,ji->i", solver.design_matrix(local), coeffs[:, cols])
    fx = f(x)
    return fx - gx


def scv(f: Integrand, cfg: EstimatorConfig) -> EstimateRun:
    """Stratified control variates.

    ``m^-d * sum_i (a_i + mean_j [f - g_i](X_i^(j)))`` with the X_i^(j)
    uniform on cell i.  Exact on polynomials of total degree < s, linear
    and unbiased.  In shifted mode one shift is drawn first and shared by
    all cells.
    """
    _require(cfg, Method.SCV)
    plan = _plan(cfg.s, f.dim, cfg.m)
    evals = cfg.budget(f.dim)
    rng = _stream(cfg.seed)
    solver = _local_solver(plan, cfg, rng)
    coeffs, means = _piecewise_fit(f, plan, solver)

    spc = cfg.resolved_samples_per_cube(f.dim)
    u = rng.random((plan.n_cubes, spc, plan.d))
    x = (u + plan.offsets[:, None, :]) / plan.m
    fx = f(x.reshape(-1, plan.d)).reshape(plan.n_cubes, spc)
    design = solver.design_matrix(u.reshape(-1, plan.d)).reshape(plan.n_cubes, spc, -1)
    gx = np.einsum("cjn,nc->cj", design, coeffs)
    per_cell = means + (fx - gx).mean(axis=1)
    value = math.fsum(per_cell.tolist()) / plan.n_cubes
    return EstimateRun(value=value, evals=evals, config=cfg, seed=cfg.seed)


def classical_cv(f: Integrand, cfg: EstimatorConfig) -> EstimateRun:
    """Classical control variates with the same piecewise interpolant as SCV.

    The interpolant's integral is computed exactly as the mean of the cell
    means; the residual is averaged over iid uniform samples on the whole
    cube.  Unbiased, exact on polynomials of total degree < s.
    """
    _require(cfg, Method.CV)
    plan = _plan(cfg.s, f.dim, cfg.m)
    evals = cfg.budget(f.dim)
    rng = _stream(cfg.seed)
    solver = _local_solver(plan, cfg, rng)
    coeffs, means = _piecewise_fit(f, plan, solver)
    int_g = math.fsum(means.tolist()) / plan.n_cubes

    n_res = cfg.resolved_samples_per_cube(f.dim) * plan.n_cubes
    residuals = _whole_cube_residuals(f, plan, solver, coeffs, rng, n_res)
    value = int_g + math.fsum(residuals.tolist()) / n_res
    return EstimateRun(value=value, evals=evals, config=cfg, seed=cfg.seed)


def cv_mom(f: Integrand, cfg: EstimatorConfig) -> EstimateRun:
    """Control variates with a median-of-means residual estimate.

    The residual samples are split into k consecutive groups of size
    ``n1 = floor(samples_per_cube * m^d / k)`` and the median of the group
    means is added to the interpolant's integral.  Non-linear and biased;
    requires ``samples_per_cube * m^d >= k``.  An even k takes the mean of
    the two central order statistics.
    """
    _require(cfg, Method.CV_MOM)
    plan = _plan(cfg.s, f.dim, cfg.m)
    evals = cfg.budget(f.dim)  # raises BudgetError when k cannot be served
    rng = _stream(cfg.seed)
    solver = _local_solver(plan, cfg, rng)
    coeffs, means = _piecewise_fit(f, plan, solver)
    int_g = math.fsum(means.tolist()) / plan.n_cubes

    n1 = (cfg.resolved_samples_per_cube(f.dim) * plan.n_cubes) // cfg.k
    residuals = _whole_cube_residuals(f, plan, solver, coeffs, rng, cfg.k * n1)
    group_means = residuals.reshape(cfg.k, n1).mean(axis=1)
    value = int_g + float(np.median(group_means))
    return EstimateRun(value=value, evals=evals, config=cfg, seed=cfg.seed)


def stratified(f: Integrand, cfg: EstimatorConfig) -> EstimateRun:
    """Plain stratified sampling: one uniform sample per cell, averaged."""
    _require(cfg, Method.STRAT)
    plan = _plan(cfg.s, f.dim, cfg.m)
    rng = _stream(cfg.seed)
    u = rng.random((plan.n_cubes, plan.d))
    fx = f((u + plan.offsets) / plan.m)
    value = math.fsum(fx.tolist()) / plan.n_cubes
    return EstimateRun(value=value, evals=cfg.budget(f.dim), config=cfg, seed=cfg.seed)


def crude_mc(f: Integrand, n: int, seed: int = 0) -> EstimateRun:
    """Crude Monte Carlo: mean of n iid uniform evaluations."""
    if n < 1:
        raise ValueError(f"need n >= 1, got n={n}")
    cfg = EstimatorConfig(method=Method.CRUDE, s=1, m=1, samples_per_cube=n, seed=seed)
    rng = _stream(seed)
    fx = f(rng.random((n, f.dim)))
    value = math.fsum(np.atleast_1d(fx).tolist()) / n
    return EstimateRun(value=value, evals=cfg.budget(f.dim), config=cfg, seed=seed)


_DISPATCH = {
    Method.SCV: scv,
    Method.CV: classical_cv,
    Method.CV_MOM: cv_mom,
    Method.STRAT: stratified,
}


def run(f: Integrand, cfg: EstimatorConfig) -> EstimateRun:
    """Dispatch to the estimator named by ``cfg.method``."""
    if cfg.method is Method.CRUDE:
        n = cfg.resolved_samples_per_cube(f.dim) * cfg.m**f.dim
        return crude_mc(f, n, cfg.seed)
    return _DISPATCH[cfg.method](f, cfg)


def subdivisions_for_budget(n: int, s: int, d: int) -> int:
    """Largest grid parameter m with ``2*n0(s,d)*m^d <= n``.

    The standard way to turn a target evaluation budget into a grid;
    requires ``n >= 2*n0``.
    """
    n0 = poly_dim(s, d)
    if n < 2 * n0:
        raise BudgetError(f"budget n={n} is below the minimum 2*n0 = {2 * n0}")
    m = max(1, int((n / (2.0 * n0)) ** (1.0 / d)))
    while 2 * n0 * (m + 1) ** d <= n:
        m += 1
    while m > 1 and 2 * n0 * m**d > n:
        m -= 1
    return m
