"""Q-matrix estimation from joint success rates.

The estimators never look at raw response rows: everything is driven by the
vector of joint success rates over item combinations (see
``simulator.compute_alpha``). A candidate Q-matrix is scored by how closely
some distribution over attribute profiles reproduces those rates through the
candidate's slip-guess design; the fitted Q-matrix is the score minimizer
over canonical candidates.

When capable success rates are unknown they are recovered per candidate
before scoring: a moment estimator handles every item whose attributes are
jointly covered by other items, and a bounded derivative-free profile search
fills in the rest.

``check_identifiability`` probes the model in population: a complete
Q-matrix should leave every non-equivalent candidate at a strictly positive
fit distance no matter how that candidate tunes its capable rates.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from .core import (
    DEFAULT_BUDGET,
    ProfileDistribution,
    QMatrix,
    canonicalize,
    enumerate_candidates,
    equivalent,
    is_complete,
)
from .simulator import AlphaVector, ResponseData, compute_alpha, population_alpha
from .solver import simplex_lsq
from .tmatrix import (
    ComboOrder,
    DinaParams,
    DMatrix,
    build_d,
    build_t_slip_guess,
    guess_vector,
    moment_rows,
)

DEFAULT_TIE_TOL = 1e-7
DEGENERATE_TOL = 1e-12
IDENTIFIABILITY_TOL = 1e-6

# deterministic multi-start levels for the bounded profile search
_SLIP_STARTS = (0.5, 0.85, 0.25)


class DegenerateSampleError(RuntimeError):
    """A moment denominator vanished: the sample cannot pin the slip rate."""


class AlignmentError(RuntimeError):
    """Split estimates cannot be stitched into a unique column arrangement."""


def _require_saturated(alpha: AlphaVector) -> None:
    if not alpha.order.is_saturated:
        raise ValueError("this operation requires success rates on a saturated order")


def _design(q: QMatrix, params: DinaParams, order: ComboOrder) -> np.ndarray:
    # leading column is the zero profile's contribution (guess products);
    # with g = 0 it is identically zero and the variable is pure slack, which
    # turns the sum-to-one constraint into "at most mass one on the nonzero
    # profiles" for the noiseless score
    t = build_t_slip_guess(q, params, order)
    return np.column_stack([guess_vector(params.g, order), t.values])


def score(q: QMatrix, alpha: AlphaVector, params: DinaParams) -> float:
    """Fit distance of a candidate Q-matrix to observed success rates.

    The minimum euclidean distance between ``alpha`` and the success rates
    the candidate can produce with *some* profile distribution at the given
    per-item rates. Zero means the candidate explains the rates exactly.
    Invariant under column permutation of ``q`` (up to solver tolerance),
    and computable on any combination order, saturated or not.
    """
    if params.m != q.m:
        raise ValueError(f"params cover {params.m} items, Q-matrix has {q.m}")
    if alpha.order.m != q.m:
        raise ValueError(f"rates cover {alpha.order.m} items, Q-matrix has {q.m}")
    return simplex_lsq(_design(q, params, alpha.order), alpha.rates).residual


def estimate_p(q: QMatrix, alpha: AlphaVector, params: DinaParams) -> ProfileDistribution:
    """Fitted profile distribution behind the score of ``q``.

    The full simplex minimizer: zero-profile mass first, nonzero profiles in
    the canonical column order of ``q``'s attribute arrangement. When the
    design has full column rank (complete q, separated rates) the minimizer
    is unique; otherwise it is the solver's deterministic representative.
    """
    if params.m != q.m:
        raise ValueError(f"params cover {params.m} items, Q-matrix has {q.m}")
    sol = simplex_lsq(_design(q, params, alpha.order), alpha.rates)
    return ProfileDistribution(q.k, sol.x)


@dataclass(frozen=True, eq=False)
class EstimationResult:
    """Outcome of a Q-matrix search.

    ``ties`` lists every canonical candidate scoring within the tie tolerance
    of the winner, winner included; more than one entry means the data do not
    single out a class and downstream consumers should treat the result as
    ambiguous. ``c_hat`` is populated only by the unknown-slip search.
    """

    q_hat: QMatrix
    score: float
    ties: tuple[QMatrix, ...]
    p_tilde: ProfileDistribution
    n_candidates: int
    c_hat: np.ndarray | None = None
    diagnostics: dict | None = None


# ---------------------------------------------------------------------------
# worker plumbing: scoring is a pure function of (candidate, rates, params),
# so parallel runs chunk the candidate list and reduce in enumeration order,
# making output independent of worker count

_POOL_STATE: dict = {}


def _pool_init(payload: dict) -> None:
    order = ComboOrder(payload["m"], payload["combos"])
    _POOL_STATE.clear()
    _POOL_STATE["alpha"] = AlphaVector(order, np.array(payload["rates"]), payload["n"])
    if payload["mode"] == "known":
        _POOL_STATE["params"] = DinaParams(np.array(payload["c"]), np.array(payload["g"]))
    else:
        g = np.array(payload["g"])
        _POOL_STATE["g"] = g
        _POOL_STATE["d"] = build_d(g, order)


def _pool_score_known(rows: tuple[str, ...]) -> float:
    return score(QMatrix.from_rows(rows), _POOL_STATE["alpha"], _POOL_STATE["params"])


def _pool_fit_unknown(rows: tuple[str, ...]):
    s, c_hat, note = _fit_candidate(
        QMatrix.from_rows(rows), _POOL_STATE["alpha"], _POOL_STATE["g"], _POOL_STATE["d"]
    )
    return s, None if c_hat is None else list(c_hat), note


def _parallel_map(fn, candidates: list[QMatrix], payload: dict, workers: int) -> list:
    jobs = [tuple(c.row_strings()) for c in candidates]
    chunk = max(1, len(jobs) // (4 * workers))
    with ProcessPoolExecutor(
        max_workers=workers, initializer=_pool_init, initargs=(payload,)
    ) as pool:
        return list(pool.map(fn, jobs, chunksize=chunk))


def _alpha_payload(alpha: AlphaVector) -> dict:
    return {
        "m": alpha.order.m,
        "combos": alpha.order.combos,
        "rates": alpha.rates.tolist(),
        "n": alpha.n_subjects,
    }


def estimate_q(
    alpha: AlphaVector,
    params: DinaParams,
    k: int,
    *,
    budget: int = DEFAULT_BUDGET,
    tie_tol: float = DEFAULT_TIE_TOL,
    workers: int | None = None,
    keep_scores: bool = False,
) -> EstimationResult:
    """Exhaustive Q-matrix search with known per-item rates.

    Scores one canonical representative per equivalence class of zero-row
    free m x k matrices against saturated success rates and returns the
    minimizer (first in enumeration order on exact ties), the tie set at
    ``tie_tol``, and the fitted profile distribution of the winner.

    Raises BudgetExceededError when the candidate space exceeds ``budget``.
    With ``keep_scores`` the per-candidate score table lands in diagnostics.
    """
    _require_saturated(alpha)
    m = alpha.order.m
    if params.m != m:
        raise ValueError(f"params cover {params.m} items, rates cover {m}")
    candidates = list(enumerate_candidates(m, k, budget))
    if workers is not None and workers > 1:
        payload = _alpha_payload(alpha) | {
            "mode": "known",
            "c": params.c.tolist(),
            "g": params.g.tolist(),
        }
        scores = _parallel_map(_pool_score_known, candidates, payload, workers)
    else:
        scores = [score(qc, alpha, params) for qc in candidates]
    scores = np.asarray(scores)
    best = int(np.argmin(scores))
    winner = candidates[best]
    ties = tuple(
        qc for qc, s in zip(candidates, scores) if s <= scores[best] + tie_tol
    )
    diagnostics = None
    if keep_scores:
        diagnostics = {"scores": {qc: float(s) for qc, s in zip(candidates, scores)}}
    return EstimationResult(
        q_hat=winner,
        score=float(scores[best]),
        ties=ties,
        p_tilde=estimate_p(winner, alpha, params),
        n_candidates=len(candidates),
        diagnostics=diagnostics,
    )


def find_cover_combo(q: QMatrix, item: int) -> int | None:
    """Smallest set of other items whose attributes jointly dominate the
    target item's requirement; returns its bitmask, or None when no set of
    other items suffices. Ties at equal size break lexicographically by the
    sorted item tuple.
    """
    if not 0 <= item < q.m:
        raise ValueError(f"item index {item} out of range for m={q.m}")
    target = q.row_masks[item]
    others = [i for i in range(q.m) if i != item]
    for size in range(1, len(others) + 1):
        for idx in itertools.combinations(others, size):
            union = 0
            for i in idx:
                union |= q.row_masks[i]
            if union & target == target:
                mask = 0
                for i in idx:
                    mask |= 1 << i
                return mask
    return None


def moment_slip(
    q: QMatrix,
    g,
    alpha: AlphaVector,
    item: int,
    cover: int,
    *,
    d: DMatrix | None = None,
) -> float:
    """Moment estimate of the capable success rate of one item.

    Contrasts the cover combination's de-contaminated success rate with the
    same rate after adjoining the item: their ratio estimates c_item - g_item
    when the cover's attributes dominate the item's. The estimate is clamped
    to [0, 1].

    Raises DegenerateSampleError when the denominator is below 1e-12 (no
    subjects effectively clear the cover). Pass a prebuilt difference
    operator ``d`` to amortize work across items and candidates.
    """
    _require_saturated(alpha)
    g = np.asarray_chkfinite(g, dtype=np.float64).ravel()
    if g.shape != (q.m,):
        raise ValueError(f"g must have length {q.m}")
    if not 0 <= item < q.m:
        raise ValueError(f"item index {item} out of range for m={q.m}")
    union = 0
    for i in range(q.m):
        if (cover >> i) & 1:
            union |= q.row_masks[i]
    if union & q.row_masks[item] != q.row_masks[item]:
        raise ValueError("cover attributes must dominate the item's requirement")
    if d is None:
        d = build_d(g, alpha.order)
    a_cover, a_joined = moment_rows(d, item, cover)
    v = alpha.with_total()
    den = float(a_cover @ v)
    if abs(den) < DEGENERATE_TOL:
        raise DegenerateSampleError(
            f"cover combination {cover:b} has vanishing de-contaminated rate; "
            "sample cannot identify the slip rate"
        )
    num = float(a_joined @ v)
    return float(np.clip(g[item] + num / den, 0.0, 1.0))


def profile_slip(
    q: QMatrix,
    g,
    alpha: AlphaVector,
    fixed: Mapping[int, float] | None = None,
) -> np.ndarray:
    """Capable success rates by direct score minimization.

    Keeps the ``fixed`` coordinates (e.g. moment estimates) and minimizes the
    fit distance over the remaining ones with bounded derivative-free local
    search (Powell) from several deterministic starts. Every coordinate of
    the result lies in [0, 1]; the best point found is always returned.
    """
    g = np.asarray_chkfinite(g, dtype=np.float64).ravel()
    if g.shape != (q.m,):
        raise ValueError(f"g must have length {q.m}")
    fixed = dict(fixed or {})
    for i, v in fixed.items():
        if not 0 <= int(i) < q.m:
            raise ValueError(f"fixed item index {i} out of range")
        if not 0.0 <= float(v) <= 1.0:
            raise ValueError(f"fixed rate {v} outside [0, 1]")
    c = np.zeros(q.m)
    for i, v in fixed.items():
        c[int(i)] = float(v)
    free = [i for i in range(q.m) if i not in fixed]
    if not free:
        return c

    def objective(v: np.ndarray) -> float:
        trial = c.copy()
        trial[free] = np.clip(v, 0.0, 1.0)
        return score(q, alpha, DinaParams(trial, g))

    best_f, best_x = np.inf, None
    for level in _SLIP_STARTS:
        res = minimize(
            objective,
            np.full(len(free), level),
            method="Powell",
            bounds=[(0.0, 1.0)] * len(free),
            options={"xtol": 1e-5, "ftol": 1e-10, "maxfev": 4000},
        )
        if res.fun < best_f:
            best_f, best_x = float(res.fun), np.asarray(res.x)
    c[free] = np.clip(best_x, 0.0, 1.0)
    return c


def _fit_candidate(
    q: QMatrix, alpha: AlphaVector, g: np.ndarray, d: DMatrix
) -> tuple[float, np.ndarray | None, str | None]:
    # moment-estimate every covered item; profile-search the rest; score
    fixed: dict[int, float] = {}
    for i in range(q.m):
        cover = find_cover_combo(q, i)
        if cover is None:
            continue
        try:
            fixed[i] = moment_slip(q, g, alpha, i, cover, d=d)
        except DegenerateSampleError:
            return np.inf, None, "degenerate moment denominator"
    if len(fixed) == q.m:
        c = np.zeros(q.m)
        for i, v in fixed.items():
            c[i] = v
    else:
        c = profile_slip(q, g, alpha, fixed)
    return score(q, alpha, DinaParams(c, g)), c, None


def estimate_q_unknown_c(
    alpha: AlphaVector,
    g,
    k: int,
    *,
    budget: int = DEFAULT_BUDGET,
    tie_tol: float = DEFAULT_TIE_TOL,
    workers: int | None = None,
    keep_scores: bool = False,
) -> EstimationResult:
    """Q-matrix search when capable success rates are unknown.

    Per candidate: moment-estimate the rate of every item covered by its
    peers, recover uncovered coordinates by bounded profile search, then
    score at the assembled rates. Candidates with degenerate moment
    denominators score +inf and are listed in diagnostics["degenerate"].

    Returns the winner with its recovered ``c_hat``; ties are judged on the
    final scores exactly as in ``estimate_q``.
    """
    _require_saturated(alpha)
    m = alpha.order.m
    g = np.asarray_chkfinite(g, dtype=np.float64).ravel()
    if g.shape != (m,):
        raise ValueError(f"g must have length {m}")
    candidates = list(enumerate_candidates(m, k, budget))
    if workers is not None and workers > 1:
        payload = _alpha_payload(alpha) | {"mode": "unknown", "g": g.tolist()}
        fits = _parallel_map(_pool_fit_unknown, candidates, payload, workers)
        fits = [
            (s, None if c is None else np.array(c), note) for s, c, note in fits
        ]
    else:
        d = build_d(g, alpha.order)
        fits = [_fit_candidate(qc, alpha, g, d) for qc in candidates]
    scores = np.array([f[0] for f in fits])
    if not np.isfinite(scores).any():
        raise DegenerateSampleError("every candidate has a degenerate moment system")
    best = int(np.argmin(scores))
    winner = candidates[best]
    c_hat = fits[best][1]
    ties = tuple(
        qc for qc, s in zip(candidates, scores) if s <= scores[best] + tie_tol
    )
    degenerate = tuple(qc for qc, f in zip(candidates, fits) if f[2] is not None)
    diagnostics: dict = {}
    if degenerate:
        diagnostics["degenerate"] = degenerate
    if keep_scores:
        diagnostics["scores"] = {qc: float(s) for qc, s in zip(candidates, scores)}
    return EstimationResult(
        q_hat=winner,
        score=float(scores[best]),
        ties=ties,
        p_tilde=estimate_p(winner, alpha, DinaParams(c_hat, g)),
        n_candidates=len(candidates),
        c_hat=c_hat,
        diagnostics=diagnostics or None,
    )


def _align_columns(
    base_rows: np.ndarray,
    base_known: np.ndarray,
    sub_items: list[int],
    sub_entries: np.ndarray,
) -> np.ndarray:
    """Column permutation of ``sub_entries`` matching the stitched rows on
    shared items. Raises AlignmentError when no arrangement is consistent or
    several genuinely different ones are."""
    k = sub_entries.shape[1]
    overlap_pos = [t for t, it in enumerate(sub_items) if base_known[it]]
    base_sig = [
        tuple(int(base_rows[sub_items[t], j]) for t in overlap_pos) for j in range(k)
    ]
    sub_sig = [tuple(int(sub_entries[t, j]) for t in overlap_pos) for j in range(k)]
    if sorted(base_sig) != sorted(sub_sig):
        raise AlignmentError(
            "overlap rows disagree between groups: no column arrangement is consistent"
        )
    perm: list[int | None] = [None] * k
    for sig in set(base_sig):
        base_slots = [j for j in range(k) if base_sig[j] == sig]
        sub_cols = [j for j in range(k) if sub_sig[j] == sig]
        if len(base_slots) > 1:
            full_cols = {tuple(int(v) for v in sub_entries[:, j]) for j in sub_cols}
            if len(full_cols) > 1:
                raise AlignmentError(
                    "overlap rows do not pin a unique column matching "
                    f"(signature {sig} is shared by {len(base_slots)} columns)"
                )
        for slot, col in zip(base_slots, sub_cols):
            perm[slot] = col
    return sub_entries[:, [int(p) for p in perm]]


def split_estimate(
    responses: ResponseData,
    groups: Sequence[Iterable[int]],
    k: int,
    *,
    params: DinaParams | None = None,
    g=None,
    budget: int = DEFAULT_BUDGET,
    tie_tol: float = DEFAULT_TIE_TOL,
    workers: int | None = None,
) -> QMatrix:
    """Estimate a large Q-matrix by splitting items into overlapping groups.

    Each group is estimated on its own restricted responses (saturated rates
    over group items only), then the per-group matrices are stitched: shared
    items force the column matching between a group and the rows already
    merged. Groups must cover every item; with k > 1 each group after the
    first needs enough overlap to pin the matching or AlignmentError is
    raised ("ambiguous" when several matchings work, "disagree" when none
    does).

    Exactly one of ``params`` (known per-item rates, sliced per group) or
    ``g`` (guessing rates only; slip rates recovered per group) must be
    given. Returns the canonical stitched matrix.
    """
    if (params is None) == (g is None):
        raise ValueError("pass exactly one of params or g")
    m = responses.m
    group_lists = [[int(i) for i in grp] for grp in groups]
    if not group_lists:
        raise ValueError("need at least one group")
    covered: set[int] = set()
    for grp in group_lists:
        if not grp:
            raise ValueError("groups must be nonempty")
        for i in grp:
            if not 0 <= i < m:
                raise ValueError(f"item index {i} out of range for m={m}")
        if len(set(grp)) != len(grp):
            raise ValueError("duplicate item inside a group")
        covered.update(grp)
    if covered != set(range(m)):
        raise ValueError("groups must cover every item")
    if params is not None and params.m != m:
        raise ValueError(f"params cover {params.m} items, responses have {m}")
    if g is not None:
        g = np.asarray_chkfinite(g, dtype=np.float64).ravel()
        if g.shape != (m,):
            raise ValueError(f"g must have length {m}")

    rows = np.zeros((m, k), dtype=np.uint8)
    known = np.zeros(m, dtype=bool)
    for grp in group_lists:
        sub = responses.restrict(grp)
        sub_alpha = compute_alpha(sub, ComboOrder.saturated(len(grp)))
        if params is not None:
            res = estimate_q(
                sub_alpha, params.subset(grp), k,
                budget=budget, tie_tol=tie_tol, workers=workers,
            )
        else:
            res = estimate_q_unknown_c(
                sub_alpha, g[grp], k, budget=budget, tie_tol=tie_tol, workers=workers
            )
        if known.any():
            aligned = _align_columns(rows, known, grp, res.q_hat.entries)
        else:
            # first group fixes the global column frame
            aligned = res.q_hat.entries
        for t, item in enumerate(grp):
            rows[item] = aligned[t]
            known[item] = True
    return canonicalize(QMatrix(rows))


@dataclass(frozen=True, eq=False)
class IdentifiabilityReport:
    """Outcome of the numerical identifiability probe.

    ``deltas`` pairs each non-equivalent canonical candidate with its
    smallest achievable fit distance to the population rates (over capable
    rates); ``flagged`` collects candidates at or below ``threshold``. An
    incomplete Q-matrix short-circuits: ``complete`` is False and no
    candidates are evaluated.
    """

    q: QMatrix
    complete: bool
    threshold: float
    deltas: tuple[tuple[QMatrix, float], ...]
    flagged: tuple[QMatrix, ...]
    min_delta: float | None
    notes: tuple[str, ...]

    @property
    def identifiable(self) -> bool:
        return self.complete and not self.flagged


def _min_fit_over_c(
    cand: QMatrix,
    alpha: AlphaVector,
    g: np.ndarray,
    grid: np.ndarray,
    refine: bool,
) -> float:
    best_val, best_point = np.inf, None
    for point in itertools.product(grid, repeat=cand.m):
        c = np.array(point)
        val = score(cand, alpha, DinaParams(c, g))
        if val < best_val:
            best_val, best_point = val, c
    if refine and best_val > 0.0:
        res = minimize(
            lambda v: score(cand, alpha, DinaParams(np.clip(v, 0.0, 1.0), g)),
            best_point,
            method="Powell",
            bounds=[(0.0, 1.0)] * cand.m,
            options={"xtol": 1e-6, "ftol": 1e-12, "maxfev": 4000},
        )
        best_val = min(best_val, float(res.fun))
    return float(best_val)


def check_identifiability(
    q: QMatrix,
    params: DinaParams,
    p_star: ProfileDistribution,
    *,
    budget: int = DEFAULT_BUDGET,
    grid_step: float = 0.1,
    threshold: float = IDENTIFIABILITY_TOL,
    refine: bool = True,
) -> IdentifiabilityReport:
    """Probe whether any non-equivalent candidate mimics the population rates.

    Builds the analytic success rates of (q, params, p_star), then for every
    non-equivalent canonical candidate minimizes the fit distance over the
    candidate's capable rates (grid of pitch ``grid_step`` plus bounded local
    refinement, guessing rates held at the truth). A delta at or below
    ``threshold`` flags the candidate as indistinguishable in population,
    i.e. the configuration is not identifiable.

    Distributions with zero-mass profiles are allowed but noted: they are the
    classic source of non-identifiability. An incomplete ``q`` skips the
    probe entirely and reports complete=False.
    """
    if params.m != q.m:
        raise ValueError(f"params cover {params.m} items, Q-matrix has {q.m}")
    notes: list[str] = []
    if not is_complete(q):
        return IdentifiabilityReport(
            q=q,
            complete=False,
            threshold=threshold,
            deltas=(),
            flagged=(),
            min_delta=None,
            notes=(
                "Q-matrix is incomplete (some attribute has no single-attribute item); "
                "identifiability probe skipped",
            ),
        )
    if (p_star.probs == 0.0).any():
        notes.append(
            "profile distribution has zero-mass profiles; identifiability may degenerate"
        )
    order = ComboOrder.saturated(q.m)
    alpha = population_alpha(q, params, p_star, order)
    steps = int(round(1.0 / grid_step))
    grid = np.linspace(0.0, 1.0, steps + 1)
    deltas: list[tuple[QMatrix, float]] = []
    for cand in enumerate_candidates(q.m, q.k, budget):
        if equivalent(cand, q):
            continue
        deltas.append((cand, _min_fit_over_c(cand, alpha, params.g, grid, refine)))
    flagged = tuple(c for c, dlt in deltas if dlt <= threshold)
    min_delta = min((dlt for _, dlt in deltas), default=None)
    return IdentifiabilityReport(
        q=q,
        complete=True,
        threshold=threshold,
        deltas=tuple(deltas),
        flagged=flagged,
        min_delta=min_delta,
        notes=tuple(notes),
    )
