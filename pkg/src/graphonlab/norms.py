"""L1 distance and cut norm, the two convergence gauges.

Cut norm of a step function, exactly
-----------------------------------
The cut norm takes a supremum of |integral over U x V| over *measurable*
subsets U, V of [0,1]. For an n-block step function the integrand is constant
on blocks, so the integral only depends on the fraction of each block covered
by U and V: the problem becomes maximizing |s^T M t| / n^2 over s, t in
[0,1]^n with M the block-value matrix. That objective is bilinear, hence its
maximum over the product of cubes is attained at a vertex (fix t: the
objective is linear in s, so push each s_i to 0 or 1; then symmetrically for
t). Vertices are unions of whole blocks, which makes the following finite
search exact: for every row subset S, the optimal column subset is read off
the signs of the column sums r_j = sum_{i in S} M_ij, giving
max(sum of positive r_j, -sum of negative r_j) / n^2.

Enumeration over S costs O(2^n * n) and is capped at n = 24; larger inputs
must use the seeded alternating-maximization heuristic, which returns a
certified lower bound (its witness is a feasible pair). For kernels that are
not step functions no exact algorithm is available; use
:func:`cut_distance_upper_via_discretization`, which brackets the value using
the fact that the cut norm is 1-Lipschitz with respect to the L1 norm
(||W||_cut <= ||W||_1 applied to W minus its discretization).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from . import _kernels, rng
from .algebra import (
    LCM_GRID_CAP,
    QuadratureSpec,
    as_kernel,
    discretize,
    grain_of,
    integrate2d,
)
from .core import StepGraphon
from .errors import EnumerationBudgetError, ValidationError

ENUMERATION_CAP = 24
_TAG_RESTARTS = 3


@dataclass(frozen=True)
class CutNormResult:
    """Cut-norm value with the block-subset witness (S, T) attaining it."""

    value: float
    n: int
    witness_s: tuple
    witness_t: tuple
    exact: bool

    def witness_value(self, values: np.ndarray) -> float:
        """Re-evaluate |sum over S x T| / n^2 from the witness."""
        return witness_sum(values, self.witness_s, self.witness_t)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "n": self.n,
            "witness_s": list(self.witness_s),
            "witness_t": list(self.witness_t),
            "exact": self.exact,
        }


def witness_sum(values: np.ndarray, s_blocks, t_blocks) -> float:
    n = values.shape[0]
    if not len(s_blocks) or not len(t_blocks):
        return 0.0
    sub = values[np.ix_(list(s_blocks), list(t_blocks))]
    return abs(float(sub.sum())) / (n * n)


def _value_and_t(values: np.ndarray, rows):
    """Optimal T and achieved value for a fixed row subset S (exact pass)."""
    n = values.shape[0]
    rows = sorted(int(i) for i in rows)
    if rows:
        r = values[rows].sum(axis=0)
    else:
        r = np.zeros(n)
    pos = float(r[r > 0.0].sum())
    neg = float(-r[r < 0.0].sum())
    if pos >= neg:
        t = tuple(int(j) for j in np.nonzero(r > 0.0)[0])
        val = pos
    else:
        t = tuple(int(j) for j in np.nonzero(r < 0.0)[0])
        val = neg
    return val / (n * n), tuple(rows), t


def cut_norm_exact(s: StepGraphon) -> CutNormResult:
    """Exact cut norm by subset enumeration (n <= 24)."""
    if s.n > ENUMERATION_CAP:
        raise EnumerationBudgetError(
            f"exact enumeration capped at n={ENUMERATION_CAP}, got n={s.n}; "
            "use cut_norm_lower_bound"
        )
    mask = _kernels.enum_best_mask(s.values)
    rows = [i for i in range(s.n) if (mask >> i) & 1]
    value, ws, wt = _value_and_t(s.values, rows)
    return CutNormResult(value=value, n=s.n, witness_s=ws, witness_t=wt, exact=True)


def cut_norm_lower_bound(s: StepGraphon, restarts: int = 50, seed: int = 0) -> CutNormResult:
    """Alternating maximization from seeded restarts; always <= the true value."""
    if restarts < 1:
        raise ValidationError("restarts must be >= 1")
    key = rng.derive_key(seed, _TAG_RESTARTS)
    rows = np.nonzero(_kernels.altmax_best_rows(s.values, restarts, key))[0]
    value, ws, wt = _value_and_t(s.values, rows)
    return CutNormResult(value=value, n=s.n, witness_s=ws, witness_t=wt, exact=False)


def cut_norm_auto(s: StepGraphon, restarts: int = 50, seed: int = 0) -> CutNormResult:
    """Exact within the enumeration budget, heuristic beyond it."""
    if s.n <= ENUMERATION_CAP:
        return cut_norm_exact(s)
    return cut_norm_lower_bound(s, restarts=restarts, seed=seed)


# ---------------------------------------------------------------------------
# L1 distance
# ---------------------------------------------------------------------------


class _AbsDiff:
    def __init__(self, ka, kb):
        self.ka = ka
        self.kb = kb

    def step_form(self):
        return None

    def eval_grid(self, xs, ys, gz):
        return np.abs(self.ka.eval_grid(xs, ys, gz) - self.kb.eval_grid(xs, ys, gz))


def l1_distance(a, b, q: QuadratureSpec = QuadratureSpec()) -> float:
    """Integral of |a - b|: exact on a common step grid, quadrature otherwise."""
    ka, kb = as_kernel(a), as_kernel(b)
    sa, sb = ka.step_form(), kb.step_form()
    if sa is not None and sb is not None:
        m = math.lcm(sa.n, sb.n)
        if m <= LCM_GRID_CAP:
            av = sa.refine(m // sa.n).values
            bv = sb.refine(m // sb.n).values
            return float(np.abs(av - bv).mean())
    align = math.lcm(max(1, grain_of(ka)), max(1, grain_of(kb)))
    if align > LCM_GRID_CAP:
        align = 1
    return integrate2d(_AbsDiff(ka, kb), q, align=align).value


@dataclass(frozen=True)
class CutNormInterval:
    """Bracket [low, high] for the cut norm of a general kernel."""

    low: float
    high: float
    discretized: CutNormResult
    l1_gap: float
    m: int


def cut_distance_upper_via_discretization(
    a,
    m: int,
    q: QuadratureSpec = QuadratureSpec(),
    restarts: int = 50,
    seed: int = 0,
) -> CutNormInterval:
    """Bracket the cut norm of `a` through its m-block discretization.

    Valid because discretization moves the cut norm by at most the L1
    distance between the kernel and its cell-average step function.
    """
    d = discretize(a, m, q)
    cut = cut_norm_auto(d, restarts=restarts, seed=seed)
    ka = as_kernel(a)
    if ka.step_form() is not None and m % ka.step_form().n == 0:
        gap = 0.0
    else:
        gap = l1_distance(ka, d, q)
    return CutNormInterval(
        low=cut.value - gap, high=cut.value + gap, discretized=cut, l1_gap=gap, m=m
    )
