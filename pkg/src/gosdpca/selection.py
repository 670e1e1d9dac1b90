"""Greedy group screening for h-step-ahead forecasting.

A lagged group design pairs each predictor with a block of its own recent
lags. The group orthogonal greedy algorithm repeatedly picks the group whose
span best explains the current residual, re-projecting the response onto the
growing joint span. A high-dimensional AIC decides where to cut the greedy
path, and a peeling loop reruns the whole selection against the original
response with previously chosen groups removed from candidacy, harvesting
correlated predictors that a single greedy pass would shadow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InputError
from .linalg import extend_orthonormal_basis, orthonormal_basis
from .series import SeriesMatrix

#: Residual second moments below this fraction of the response variance end
#: the greedy path; criterion comparisons beyond it are numerically empty.
RESIDUAL_FLOOR = 1e-12


@dataclass
class GroupDesign:
    """Lagged group design: one lag block per predictor plus the aligned
    response.

    ``groups[j]`` has shape (rows, q1); its row t holds predictor j's values
    at times t+q1-1, t+q1-2, ..., t (newest lag first). ``response`` holds the
    target shifted h steps ahead of the newest lag. ``bases`` caches a
    zero-padded orthonormal basis per group (rank in ``ranks``) so repeated
    greedy scans avoid refactorizing.
    """

    groups: np.ndarray
    response: np.ndarray
    q1: int
    h: int
    n: int
    bases: np.ndarray = field(repr=False)
    ranks: np.ndarray = field(repr=False)

    @property
    def n_groups(self) -> int:
        return self.groups.shape[0]

    @property
    def n_rows(self) -> int:
        return self.groups.shape[1]

    def group(self, j: int) -> np.ndarray:
        return self.groups[j]

    def group_basis(self, j: int) -> np.ndarray:
        return self.bases[j][:, : self.ranks[j]]

    @classmethod
    def from_group_list(cls, groups, response, h: int = 1) -> "GroupDesign":
        """Assemble a design from explicit group matrices (mainly for tests).

        All groups must share the same shape (rows, q1).
        """
        stacked = np.stack([np.asarray(g, dtype=float) for g in groups])
        if stacked.ndim != 3:
            raise InputError("groups must be a list of equally shaped 2-D matrices")
        response = np.asarray(response, dtype=float).ravel()
        if stacked.shape[1] != response.shape[0]:
            raise InputError("group rows do not match response length")
        q1 = stacked.shape[2]
        n = stacked.shape[1] + q1 + h - 1
        bases, ranks = _group_bases(stacked)
        return cls(stacked, response, q1, h, n, bases, ranks)


def _group_bases(groups: np.ndarray):
    """Per-group orthonormal bases, zero-padded to a common width."""
    p, m, q1 = groups.shape
    bases = np.zeros((p, m, q1))
    ranks = np.zeros(p, dtype=int)
    for j in range(p):
        q = orthonormal_basis(groups[j])
        ranks[j] = q.shape[1]
        bases[j, :, : q.shape[1]] = q
    return bases, ranks


@dataclass(frozen=True)
class SelectionResult:
    """One greedy run: the visited path, its residual second-moment and
    criterion traces, and the cut decided by the criterion.

    ``selected`` is the first ``chosen_k`` path entries. ``chosen_k`` is 0
    only when the run was asked to compare against the empty model and the
    empty model won (or no group could be used at all).
    """

    path: tuple[int, ...]
    sigma2_path: tuple[float, ...]
    hdaic_path: tuple[float, ...]
    chosen_k: int
    selected: frozenset[int]


@dataclass(frozen=True)
class PeelResult:
    """Outcome of repeated selection rounds with shrinking candidate sets."""

    rounds: tuple[SelectionResult, ...]
    union_set: frozenset[int]


def build_group_design(
    series: SeriesMatrix, target, q1: int, h: int
) -> GroupDesign:
    """Build the lagged group design for predicting the target h steps ahead.

    Every non-target column becomes one group of q1 own lags; the response is
    the target aligned so its row t sits h steps after the newest lag in row t
    of each group. Usable rows: n - h - q1 + 1.
    """
    if q1 < 1:
        raise InputError("q1 must be at least 1")
    if h < 1:
        raise InputError("h must be at least 1")
    y, x, _ = series.target_and_predictors(target)
    n = y.shape[0]
    if n <= q1 + h:
        raise InputError(
            f"insufficient usable rows: n={n} with q1={q1}, h={h}"
        )
    m = n - h - q1 + 1
    # window i of column j = (x[i], ..., x[i+q1-1]); reverse to newest-first
    windows = sliding_window_view(x, q1, axis=0)[:m]
    groups = np.ascontiguousarray(windows[:, :, ::-1].transpose(1, 0, 2))
    response = y[q1 + h - 1 :].copy()
    bases, ranks = _group_bases(groups)
    return GroupDesign(groups, response, q1, h, n, bases, ranks)


def _gains(design: GroupDesign, u: np.ndarray) -> np.ndarray:
    """Squared projection norm of u onto every group's span, length p."""
    g = np.einsum("pmk,m->pk", design.bases, u)
    return np.einsum("pk,pk->p", g, g)


def goga_step(residual, design: GroupDesign, candidates) -> int:
    """Index of the candidate group whose span best explains the residual.

    Minimizes the post-projection residual sum of squares, i.e. maximizes
    the squared norm of the residual's projection onto the group span
    (rank-safe). Ties break to the lowest group index.
    """
    cand = np.asarray(sorted(set(int(c) for c in candidates)), dtype=int)
    if cand.size == 0:
        raise InputError("candidate set is empty")
    if cand[0] < 0 or cand[-1] >= design.n_groups:
        raise InputError("candidate index out of range")
    u = np.asarray(residual, dtype=float).ravel()
    if u.shape[0] != design.n_rows:
        raise InputError(
            f"residual length {u.shape[0]} does not match design rows {design.n_rows}"
        )
    g = np.einsum("jmk,m->jk", design.bases[cand], u)
    scores = np.einsum("jk,jk->j", g, g)
    return int(cand[int(np.argmax(scores))])


def hdaic(sigma2: float, k: int, p_total: int, n_eff: int, C: float) -> float:
    """Residual second moment inflated by the high-dimensional AIC factor
    (1 + C * k * ln(p_total) / n_eff). Natural logarithm.
    """
    if sigma2 < 0:
        raise InputError("sigma2 must be nonnegative")
    if k < 1:
        raise InputError("k must be at least 1")
    if p_total < 2:
        raise InputError("p_total must be at least 2")
    if n_eff < 1:
        raise InputError("n_eff must be at least 1")
    if C <= 0:
        raise InputError("C must be positive")
    return (1.0 + C * k * math.log(p_total) / n_eff) * sigma2


def default_max_steps(n_eff: int, p_total: int, q1: int) -> int:
    """Greedy path cap: ceil(5 * sqrt(n_eff / ln p_total)), at most
    floor(n_eff / (2 q1)), at least 1.
    """
    if n_eff < 1 or p_total < 2 or q1 < 1:
        raise InputError("need n_eff >= 1, p_total >= 2, q1 >= 1")
    kn = math.ceil(5.0 * math.sqrt(n_eff / math.log(p_total)))
    cap = n_eff // (2 * q1)
    return max(1, min(kn, cap))


def _mean_square(u: np.ndarray) -> float:
    # compensated sum: the criterion compares nearly equal values along the path
    return math.fsum((u * u).tolist()) / u.shape[0]


def goga_hdaic(
    design: GroupDesign,
    candidates=None,
    K_n: int | None = None,
    C: float = 2.0,
    null_guard: bool = False,
) -> SelectionResult:
    """Run the greedy path and cut it where the criterion is smallest.

    Each step scans the candidate groups for the best explainer of the
    current residual, extends a shared orthonormal basis with that group's
    columns, and re-projects the response. Groups contributing no new basis
    direction are skipped for the rest of the run (next-best taken). The path
    ends after min(K_n, number of candidates) steps, when the residual second
    moment falls below RESIDUAL_FLOOR times the response variance, or when no
    usable group remains.

    With ``null_guard`` the best criterion value must also beat the empty
    model's (the response second moment); otherwise nothing is selected and
    ``chosen_k`` is 0.
    """
    p = design.n_groups
    if candidates is None:
        cand = np.arange(p)
    else:
        cand = np.asarray(sorted(set(int(c) for c in candidates)), dtype=int)
        if cand.size == 0:
            raise InputError("candidate set is empty")
        if cand[0] < 0 or cand[-1] >= p:
            raise InputError("candidate index out of range")
    if K_n is None:
        K_n = default_max_steps(design.n_rows, max(p, 2), design.q1)
    if K_n < 1:
        raise InputError("K_n must be at least 1")

    y = design.response
    m = y.shape[0]
    sigma2_null = _mean_square(y)
    floor = RESIDUAL_FLOOR * float(np.var(y))

    alive = np.zeros(p, dtype=bool)
    alive[cand] = True
    u = y.copy()
    basis = np.zeros((m, 0))
    path: list[int] = []
    sigma2_path: list[float] = []
    hdaic_path: list[float] = []

    max_steps = min(int(K_n), cand.size)
    for k in range(1, max_steps + 1):
        scores = _gains(design, u)
        scores[~alive] = -1.0
        order = np.argsort(-scores, kind="stable")
        picked = -1
        for j in order:
            if not alive[j]:
                continue
            added = extend_orthonormal_basis(basis, design.group_basis(int(j)))
            if added.shape[1] == 0:
                alive[j] = False
                continue
            picked = int(j)
            break
        if picked < 0:
            break
        alive[picked] = False
        basis = np.hstack([basis, added])
        u = u - added @ (added.T @ u)
        s2 = _mean_square(u)
        if sigma2_path:
            s2 = min(s2, sigma2_path[-1])
        path.append(picked)
        sigma2_path.append(s2)
        hdaic_path.append(hdaic(s2, k, max(p, 2), m, C))
        if s2 < floor:
            break

    if not path:
        return SelectionResult((), (), (), 0, frozenset())
    best = int(np.argmin(hdaic_path))
    if null_guard and hdaic_path[best] >= sigma2_null:
        return SelectionResult(
            tuple(path), tuple(sigma2_path), tuple(hdaic_path), 0, frozenset()
        )
    chosen_k = best + 1
    return SelectionResult(
        tuple(path),
        tuple(sigma2_path),
        tuple(hdaic_path),
        chosen_k,
        frozenset(path[:chosen_k]),
    )


def peel(
    design: GroupDesign,
    M: int,
    K_n: int | None = None,
    C: float = 2.0,
    null_guard: bool = False,
) -> PeelResult:
    """Run up to M selection rounds, each against the original response with
    all previously selected groups removed from candidacy.

    Stops early when candidates run out or a round selects nothing. Rounds
    are pairwise disjoint by construction.
    """
    if M < 1:
        raise InputError("M must be at least 1")
    remaining = set(range(design.n_groups))
    rounds: list[SelectionResult] = []
    union: set[int] = set()
    for _ in range(M):
        if not remaining:
            break
        res = goga_hdaic(design, remaining, K_n=K_n, C=C, null_guard=null_guard)
        if not res.selected:
            break
        rounds.append(res)
        union |= res.selected
        remaining -= res.selected
    return PeelResult(tuple(rounds), frozenset(union))
