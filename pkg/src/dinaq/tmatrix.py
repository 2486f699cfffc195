"""Response-rate moment matrices for the conjunctive (DINA) response model.

The central objects are design matrices indexed by item combinations (rows)
and nonzero attribute profiles (columns). Entry (S, A) is the probability
that a subject with profile A answers every item in combination S correctly:

* binary variant: the deterministic 0/1 ideal-response indicator,
* slip variant: capable subjects succeed per item with probability c_i,
* slip-guess variant: incapable subjects also succeed with probability g_i.

Each row is the elementwise product of its single-item rows, which is what
makes joint success rates over item combinations linear in the profile
distribution and drives every estimator in the package.

The augmented variant prepends the guess-product column (the contribution of
the all-zero profile) and appends an all-ones row (total mass); the
difference operator ``build_d`` inverts the guessing contamination: applied
to the augmented matrix it leaves scaled ideal-response columns behind.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .core import QMatrix, bit_label, profile_order, subsets_card_lex

# Saturated row sets grow as 2^m - 1; past this the matrices stop being
# practical to materialize.
MAX_SATURATED_ITEMS = 14


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


def _mask_items(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if (mask >> i) & 1)


@dataclass(frozen=True, eq=False)
class ComboOrder:
    """An ordered list of item combinations (nonempty bitmasks over m items).

    The order fixes row indexing for every matrix built on top of it; two
    matrices are comparable only on a shared order.
    """

    m: int
    combos: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("m must be positive")
        combos = tuple(int(s) for s in self.combos)
        if not combos:
            raise ValueError("order must contain at least one combination")
        seen = set()
        for s in combos:
            if not 1 <= s < (1 << self.m):
                raise ValueError(f"combination mask {s} out of range for m={self.m}")
            if s in seen:
                raise ValueError(f"duplicate combination mask {s}")
            seen.add(s)
        object.__setattr__(self, "combos", combos)

    def __len__(self) -> int:
        return len(self.combos)

    @cached_property
    def _index(self) -> dict[int, int]:
        return {s: i for i, s in enumerate(self.combos)}

    def index(self, combo: int) -> int:
        """Row position of a combination mask; KeyError when absent."""
        return self._index[combo]

    @property
    def is_saturated(self) -> bool:
        """True when every nonempty combination of the m items is present."""
        return len(self.combos) == (1 << self.m) - 1

    def label(self, combo: int) -> str:
        """Human-facing label: comma-joined 1-based item indices, e.g. "1,3"."""
        return ",".join(str(i + 1) for i in _mask_items(combo))

    def labels(self) -> list[str]:
        return [self.label(s) for s in self.combos]

    @classmethod
    def singles(cls, m: int) -> "ComboOrder":
        """Just the m single-item combinations, in item order."""
        return cls(m, tuple(1 << i for i in range(m)))

    @classmethod
    def saturated(cls, m: int) -> "ComboOrder":
        """All 2^m - 1 combinations, cardinality ascending then lexicographic."""
        if m > MAX_SATURATED_ITEMS:
            raise ValueError(
                f"saturated order capped at m <= {MAX_SATURATED_ITEMS}, got {m}"
            )
        return cls(m, tuple(subsets_card_lex(m)))

    @classmethod
    def block(cls, m: int, lead: int) -> "ComboOrder":
        """Saturated order with every combination drawn from the first ``lead``
        items listed before any combination touching a later item.

        With a complete Q-matrix arranged so its first ``lead`` rows are the
        unit rows, the leading (2^lead - 1)-row block of the binary design is
        square upper block-triangular with identity diagonal blocks; this is
        the arrangement the completeness rank check relies on.
        """
        if not 1 <= lead <= m:
            raise ValueError("lead must be in 1..m")
        if m > MAX_SATURATED_ITEMS:
            raise ValueError(
                f"saturated order capped at m <= {MAX_SATURATED_ITEMS}, got {m}"
            )
        head = subsets_card_lex(lead)
        tail = [s for s in subsets_card_lex(m) if s >= (1 << lead)]
        return cls(m, tuple(head + tail))

    @classmethod
    def from_item_sets(cls, m: int, sets: Iterable[Iterable[int]]) -> "ComboOrder":
        """Build from explicit 0-based item index sets."""
        combos = []
        for items in sets:
            mask = 0
            for i in items:
                if not 0 <= int(i) < m:
                    raise ValueError(f"item index {i} out of range for m={m}")
                mask |= 1 << int(i)
            combos.append(mask)
        return cls(m, tuple(combos))


@dataclass(frozen=True, eq=False)
class DinaParams:
    """Per-item success probabilities: c for capable subjects, g for guessers.

    c_i is one minus the slipping probability; g_i is the guessing
    probability. Both live in [0, 1]. The c_i != g_i separation needed by the
    identifiability theory is validated at the call sites that require it,
    not here.
    """

    c: np.ndarray
    g: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray_chkfinite(self.c, dtype=np.float64).ravel()
        g = np.asarray_chkfinite(self.g, dtype=np.float64).ravel()
        if c.shape != g.shape or c.size == 0:
            raise ValueError("c and g must be nonempty vectors of equal length")
        for name, v in (("c", c), ("g", g)):
            if v.min() < 0.0 or v.max() > 1.0:
                raise ValueError(f"{name} entries must lie in [0, 1]")
        c.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "g", g)

    @property
    def m(self) -> int:
        return self.c.size

    @classmethod
    def noiseless(cls, m: int) -> "DinaParams":
        """c = 1, g = 0: the deterministic ideal-response model."""
        return cls(np.ones(m), np.zeros(m))

    def subset(self, items: Sequence[int]) -> "DinaParams":
        idx = list(items)
        return DinaParams(self.c[idx], self.g[idx])


@dataclass(frozen=True, eq=False)
class TMatrix:
    """A response-rate design matrix with its row and column bookkeeping.

    ``variant`` is one of "binary", "slip", "slip_guess", "augmented". For
    the augmented variant ``values`` has one extra leading column (guess
    products) and one extra trailing all-ones row.
    """

    order: ComboOrder
    k: int
    values: np.ndarray
    variant: str

    def __post_init__(self) -> None:
        v = np.asarray(self.values)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def profiles(self) -> list[int]:
        return profile_order(self.k)

    def row_labels(self) -> list[str]:
        labels = self.order.labels()
        if self.variant == "augmented":
            labels = labels + ["ONES"]
        return labels

    def column_labels(self) -> list[str]:
        labels = [bit_label(mask, self.k) for mask in self.profiles]
        if self.variant == "augmented":
            labels = ["GUESS"] + labels
        return labels

    def to_tsv(self) -> str:
        """Tab-separated dump: profile-label header, combo-label row prefix."""
        lines = ["combo\t" + "\t".join(self.column_labels())]
        for lab, row in zip(self.row_labels(), np.asarray(self.values)):
            lines.append(lab + "\t" + "\t".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"


def _single_item_indicators(q: QMatrix, profiles: Sequence[int]) -> np.ndarray:
    """(m, P) boolean: does each profile dominate each item's requirement."""
    reach = np.array(q.row_masks, dtype=np.int64)[:, None]
    pm = np.array(profiles, dtype=np.int64)[None, :]
    return (pm & reach) == reach


def _check_order(q: QMatrix, order: ComboOrder) -> None:
    if order.m != q.m:
        raise ValueError(f"order is over {order.m} items but Q-matrix has {q.m}")


def build_t(q: QMatrix, order: ComboOrder) -> TMatrix:
    """Binary design: entry (S, A) = 1 iff profile A dominates every item in S.

    Row S is the elementwise product of its single-item rows, equivalently
    the indicator of dominating the union of the rows of S.
    """
    _check_order(q, order)
    profiles = profile_order(q.k)
    singles = _single_item_indicators(q, profiles)
    values = np.empty((len(order), len(profiles)), dtype=np.uint8)
    for r, s in enumerate(order.combos):
        values[r] = np.logical_and.reduce(singles[list(_mask_items(s))], axis=0)
    return TMatrix(order, q.k, values, "binary")


def _product_rows(q: QMatrix, c: np.ndarray, g: np.ndarray, order: ComboOrder) -> np.ndarray:
    # per-item factor rows: c_i where capable, g_i where not; combo rows are
    # exact left-to-right products in ascending item order, so entries are
    # bit-identical to the corresponding monomials in c and g
    profiles = profile_order(q.k)
    singles = _single_item_indicators(q, profiles)
    factors = np.where(singles, c[:, None], g[:, None])
    values = np.empty((len(order), len(profiles)), dtype=np.float64)
    for r, s in enumerate(order.combos):
        values[r] = np.multiply.reduce(factors[list(_mask_items(s))], axis=0)
    return values


def build_t_slip(q: QMatrix, c: Iterable[float], order: ComboOrder) -> TMatrix:
    """Slip-only design: capable subjects succeed with probability c_i,
    incapable subjects never succeed.

    Equals the binary design with row S scaled by the product of c over S;
    at c = 1 it reproduces the binary design exactly.
    """
    _check_order(q, order)
    c = np.asarray_chkfinite(c, dtype=np.float64).ravel()
    if c.shape != (q.m,):
        raise ValueError(f"c must have length {q.m}")
    values = _product_rows(q, c, np.zeros(q.m), order)
    return TMatrix(order, q.k, values, "slip")


def build_t_slip_guess(q: QMatrix, params: DinaParams, order: ComboOrder) -> TMatrix:
    """Full slip-and-guess design.

    Entry (S, A) is the product over items i in S of (c_i if A dominates
    item i else g_i). Setting g = 0 recovers the slip-only design exactly,
    and c = 1, g = 0 recovers the binary design.
    """
    _check_order(q, order)
    if params.m != q.m:
        raise ValueError(f"params are for {params.m} items but Q-matrix has {q.m}")
    values = _product_rows(q, params.c, params.g, order)
    return TMatrix(order, q.k, values, "slip_guess")


def guess_vector(g: Iterable[float], order: ComboOrder) -> np.ndarray:
    """Per-combination guessing products: entry S = product of g_i over S.

    This is the success-rate column contributed by the all-zero profile.
    """
    g = np.asarray_chkfinite(g, dtype=np.float64).ravel()
    if g.shape != (order.m,):
        raise ValueError(f"g must have length {order.m}")
    return np.array(
        [np.multiply.reduce(g[list(_mask_items(s))]) for s in order.combos]
    )


def build_t_augmented(q: QMatrix, params: DinaParams, order: ComboOrder) -> TMatrix:
    """Slip-guess design bordered by the guess column and an all-ones row.

    Multiplying the augmented matrix by the full profile-probability vector
    (zero profile first) yields every combination success rate plus a final
    total-mass entry of 1.
    """
    core = build_t_slip_guess(q, params, order)
    gcol = np.concatenate([guess_vector(params.g, order), [1.0]])
    body = np.vstack([core.values, np.ones(core.values.shape[1])])
    values = np.column_stack([gcol, body])
    return TMatrix(order, q.k, values, "augmented")


@dataclass(frozen=True, eq=False)
class DMatrix:
    """Difference operator that strips guessing contamination.

    Shape (n, n + 1) over a saturated order of n = 2^m - 1 combinations; the
    trailing column pairs with the all-ones row of the augmented design.
    Applied to the augmented design it yields a zero leading column followed
    by the slip-only design at rates c - g; in particular it depends on g
    alone, never on c.
    """

    order: ComboOrder
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def row(self, combo: int) -> np.ndarray:
        return self.values[self.order.index(combo)]


def build_d(g: Iterable[float], order: ComboOrder) -> DMatrix:
    """Build the difference operator for guessing rates ``g``.

    Row S carries, at each subset column U of S, the coefficient
    (-1)^(|S| - |U|) times the product of g over S minus U; the empty subset
    lands in the trailing ones-row column. All other entries are zero.
    The defining property, checked property-wise in the test suite, is

        D @ augmented(q, (c, g)) == [0 | slip_design(q, c - g)]

    for every Q-matrix q and every c, which is what turns contaminated
    success rates back into pure capability rates.
    """
    if not order.is_saturated:
        raise ValueError("difference operator requires a saturated order")
    g = np.asarray_chkfinite(g, dtype=np.float64).ravel()
    if g.shape != (order.m,):
        raise ValueError(f"g must have length {order.m}")
    n = len(order)
    values = np.zeros((n, n + 1))
    for r, s in enumerate(order.combos):
        sub = s
        while True:
            rest = s & ~sub
            coef = 1.0
            for i in _mask_items(rest):
                coef *= g[i]
            if _popcount(rest) % 2:
                coef = -coef
            if sub == 0:
                values[r, n] = coef
                break
            values[r, order.index(sub)] = coef
            sub = (sub - 1) & s
    return DMatrix(order, values)


def completeness_block(q: QMatrix) -> np.ndarray:
    """Square leading block of the binary design under the identity-items-
    first arrangement.

    Picks one single-attribute item per attribute (the first in item order),
    forms all 2^k - 1 combinations of those items in card-then-lex order, and
    returns the binary design restricted to these rows. With columns in the
    canonical profile order the block is upper block-triangular with identity
    diagonal blocks, hence nonsingular, for every complete Q-matrix.

    Raises ValueError when ``q`` is not complete.
    """
    unit_item: list[int] = []
    masks = q.row_masks
    for j in range(q.k):
        hits = [i for i in range(q.m) if masks[i] == (1 << j)]
        if not hits:
            raise ValueError(f"Q-matrix is not complete: no single-attribute item for attribute {j}")
        unit_item.append(hits[0])
    combos = []
    for attr_set in subsets_card_lex(q.k):
        mask = 0
        for j in _mask_items(attr_set):
            mask |= 1 << unit_item[j]
        combos.append(mask)
    block = build_t(q, ComboOrder(q.m, tuple(combos)))
    return np.asarray(block.values, dtype=np.float64)


def moment_rows(d: DMatrix, item: int, cover: int) -> tuple[np.ndarray, np.ndarray]:
    """The two difference-operator rows behind the moment slip estimator.

    Returns (row for the cover combination, row for cover plus ``item``).
    ``item`` must not belong to ``cover``. Dotted with the saturated success
    rates extended by a trailing 1, the second-to-first ratio estimates
    c_item - g_item whenever the cover's attributes dominate the item's.
    """
    if not 0 <= item < d.order.m:
        raise ValueError(f"item index {item} out of range for m={d.order.m}")
    if cover & (1 << item):
        raise ValueError("cover must not contain the target item")
    if cover == 0:
        raise ValueError("cover must be a nonempty combination")
    return d.row(cover), d.row(cover | (1 << item))
