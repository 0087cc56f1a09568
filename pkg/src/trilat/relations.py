"""Integer-relation search and rational-rank certification.

A tuple of reals w_1..w_k is rationally dependent when some nonzero integer
vector c has sum(c_i * w_i) = 0.  Working in floats, "zero" must be a
tolerance test, and the search must be bounded: the brute search scans a
coefficient box exhaustively, the reduced search builds the classic lattice
whose rows are the identity extended by one column of scaled values and runs
LLL on it.

The brute scan is exact and canonical but exponential; above a direct
enumeration budget it switches to a meet-in-the-middle pass (half-sum
sorting) that preserves the hit predicate, and above that budget it raises
:class:`SearchBudgetExceeded`, signalling the caller to use the reduced
method.

Float precision limits what any of this can certify.  An exact relation
evaluated in float64 cancels to ~1e-15 relative; with many values and large
coefficient bounds, accidental near-cancellations approach the same scale,
so the reduced search targets relations that are exact at working precision
and leaves a safety margin between its acceptance cut and the magnitudes
produced by generic inputs.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RankVerdict",
    "ReductionFailure",
    "RelationCertificate",
    "SearchBudgetExceeded",
    "exact_integer_det",
    "find_integer_relation_brute",
    "find_integer_relation_reduced",
    "rational_rank_at_least",
]

# Largest coefficient box enumerated (and canonically ordered) in memory.
_NAIVE_LIMIT = 2_000_000
# Largest half-box for the meet-in-the-middle pass (~900 MiB of float64).
_MIM_HALF_LIMIT = 170_000_000


def _precision_cap(k: int) -> int:
    """Largest coefficient magnitude certifiable for k values in float64.

    A pigeonhole estimate: among the nonzero integer vectors with entries
    in [-C, C]^k, the expected number whose dot product with a random tuple
    cancels to working precision is about (2C+1)^k * O(k * eps).  Keeping
    that expectation around 1e-4 requires (2C+1)^k <= ~5e8.  Vectors beyond
    this cap cannot be told apart from accidental near-cancellations, so
    the reduced search never reports them.
    """
    return max(1, int(((5e8) ** (1.0 / k) - 1.0) / 2.0))


class SearchBudgetExceeded(RuntimeError):
    """The requested brute-force box is too large; use the reduced method."""


class ReductionFailure(RuntimeError):
    """Lattice reduction failed numerically (overflow or no convergence)."""


@dataclass(frozen=True)
class RelationCertificate:
    """Outcome of a relation search.

    kind is 'relation' (coefficients present, not all zero, first nonzero
    positive) or 'independent' (no relation within the searched bound).
    ``bound_used`` records the coefficient/norm bound the verdict refers to;
    ``residual`` is |sum c_i w_i| for relations.
    """

    kind: str
    coefficients: tuple[int, ...] | None
    bound_used: float
    residual: float | None = None

    def __post_init__(self):
        if self.kind not in ("relation", "independent"):
            raise ValueError(f"bad certificate kind {self.kind!r}")
        if (self.kind == "relation") != (self.coefficients is not None):
            raise ValueError("coefficients present iff kind == 'relation'")


@dataclass(frozen=True)
class RankVerdict:
    """Whether some r-subset of the input is certifiably independent."""

    at_least: bool
    subset: tuple[int, ...] | None
    certificate: RelationCertificate | None


def _canonical_sign(c) -> tuple[int, ...]:
    c = [int(x) for x in c]
    for x in c:
        if x > 0:
            return tuple(c)
        if x < 0:
            return tuple(-y for y in c)
    raise ValueError("zero vector has no canonical sign")


@functools.lru_cache(maxsize=6)
def _canonical_box(k: int, bound: int) -> np.ndarray:
    """All sign-canonical nonzero vectors in [-bound, bound]^k, ordered by
    (max |entry|, entries) ascending.  Shape (M, k), int64."""
    rng = np.arange(-bound, bound + 1, dtype=np.int64)
    grids = np.meshgrid(*([rng] * k), indexing="ij")
    box = np.stack([g.ravel() for g in grids], axis=1)
    nonzero = box != 0
    lead = box[np.arange(box.shape[0]), np.argmax(nonzero, axis=1)]
    box = box[nonzero.any(axis=1) & (lead > 0)]
    shell = np.abs(box).max(axis=1)
    order = np.lexsort(tuple(box[:, col] for col in range(k - 1, -1, -1)) + (shell,))
    out = box[order]
    out.setflags(write=False)
    return out


def _scan_box(w: np.ndarray, bound: int, tau: float):
    """First canonically-ordered box vector with |c . w| < tau, or None."""
    box = _canonical_box(len(w), bound)
    hits = np.abs(box @ w) < tau
    if not hits.any():
        return None
    return tuple(int(x) for x in box[int(np.argmax(hits))])


def _outer_sums(w_part: np.ndarray, rng: np.ndarray) -> np.ndarray:
    """Flat array of sum(c_i * w_part_i) over the full sub-box, C-ordered."""
    s = rng * w_part[0]
    for wi in w_part[1:]:
        s = np.add.outer(s, rng * wi).ravel()
    return s


def _decode(idx: int, width: int, digits: int, bound: int) -> tuple[int, ...]:
    """Inverse of the C-order enumeration used by :func:`_outer_sums`."""
    out = []
    for _ in range(digits):
        idx, rem = divmod(idx, width)
        out.append(int(rem) - bound)
    out.reverse()
    return tuple(out)


def _mim_scan(w: np.ndarray, bound: int, tau: float, hit_cap: int = 4096):
    """Meet-in-the-middle scan of the full box for |c . w| < tau.

    Both half-boxes are materialized as flat sum arrays and sorted in
    place; the window intersection then runs between two sorted sides, so
    the binary searches walk near-identical paths and stay cache-resident
    even for hundred-million-element halves (random probes into an array
    that size are latency-bound and an order of magnitude slower).  Hits
    are recovered by value re-scan, so no index permutation is ever
    materialized.  Returns the minimal hit under the (max |entry|,
    entries) order among all hits found, or None.
    """
    k = len(w)
    k_left = k // 2
    k_right = k - k_left
    width = 2 * bound + 1
    rng = np.arange(-bound, bound + 1, dtype=float)
    left_sorted = _outer_sums(w[:k_left], rng)
    left_sorted.sort()
    right_sorted = _outer_sums(w[k_left:], rng)
    right_sorted.sort()

    hits: list[tuple[tuple[int, ...], float]] = []
    step = 1 << 23
    for start in range(0, right_sorted.shape[0], step):
        q = right_sorted[start : start + step]
        lo = np.searchsorted(left_sorted, -q - tau, side="left")
        hi = np.searchsorted(left_sorted, -q + tau, side="right")
        for j in np.nonzero(hi > lo)[0]:
            rights = [
                _decode(right_idx, width, k_right, bound)
                for right_idx in _find_value_indices(w[k_left:], rng, float(q[j]))
            ]
            for target in left_sorted[lo[j] : hi[j]]:
                # identical float values may occur at several half indices
                for left_idx in _find_value_indices(w[:k_left], rng, float(target)):
                    cl = _decode(left_idx, width, k_left, bound)
                    for right in rights:
                        c = cl + right
                        if not any(c):
                            continue
                        resid = abs(float(np.dot(c, w)))
                        if resid < tau:
                            hits.append((_canonical_sign(c), resid))
                        if len(hits) >= hit_cap:
                            break
                    if len(hits) >= hit_cap:
                        break
                if len(hits) >= hit_cap:
                    break
            if len(hits) >= hit_cap:
                break
        if len(hits) >= hit_cap:
            break
    if not hits:
        return None
    return min(hits, key=lambda h: (max(abs(x) for x in h[0]), h[0]))


def _find_value_indices(w_part: np.ndarray, rng: np.ndarray, value: float):
    """Flat indices whose half-sum equals ``value`` bit-for-bit (chunked)."""
    if len(w_part) == 1:
        return [int(i) for i in np.nonzero(rng * w_part[0] == value)[0]]
    tail = _outer_sums(w_part[1:], rng)
    width = tail.shape[0]
    out = []
    for lead_pos, lead in enumerate(rng):
        match = np.nonzero(lead * w_part[0] + tail == value)[0]
        out.extend(int(lead_pos) * width + int(i) for i in match)
    return out


def find_integer_relation_brute(
    w, coeff_bound: int, tol: float = 1e-9
) -> RelationCertificate:
    """Exhaustive search for |sum c_i w_i| < tol * coeff_bound * max|w|.

    Scans all nonzero integer vectors with entries in [-coeff_bound,
    coeff_bound], up to overall sign, and returns the first hit in the
    canonical (max |entry|, entries) order — or an 'independent' verdict for
    the given bound.  Boxes beyond the direct-enumeration budget are handled
    by a meet-in-the-middle pass; when even that is infeasible,
    :class:`SearchBudgetExceeded` is raised (the reduced method applies).
    """
    w = np.asarray(w, dtype=float).reshape(-1)
    k = w.shape[0]
    if k < 1:
        raise ValueError("need at least one value")
    if coeff_bound < 1:
        raise ValueError("coefficient bound must be >= 1")
    maxw = float(np.abs(w).max())
    if maxw == 0.0:
        # every vector annihilates the zero tuple; first canonical one
        c = (0,) * (k - 1) + (1,)
        return RelationCertificate("relation", c, float(coeff_bound), 0.0)
    tau = tol * coeff_bound * maxw
    width = 2 * coeff_bound + 1

    if width**k <= _NAIVE_LIMIT:
        c = _scan_box(w, coeff_bound, tau)
        if c is not None:
            return RelationCertificate(
                "relation", c, float(coeff_bound), abs(float(np.dot(c, w)))
            )
        return RelationCertificate("independent", None, float(coeff_bound))

    # Phase 1: exact canonical scan of the largest affordable sub-box.  Any
    # hit here dominates every vector with a larger max-entry, so it is the
    # global canonical first hit.
    sub = coeff_bound
    while width**k > _NAIVE_LIMIT:
        sub -= 1
        width = 2 * sub + 1
    if sub >= 1:
        c = _scan_box(w, sub, tau)
        if c is not None:
            return RelationCertificate(
                "relation", c, float(coeff_bound), abs(float(np.dot(c, w)))
            )

    if (2 * coeff_bound + 1) ** math.ceil(k / 2) > _MIM_HALF_LIMIT:
        raise SearchBudgetExceeded(
            f"box (2*{coeff_bound}+1)^{k} exceeds the brute-force budget; "
            "use find_integer_relation_reduced"
        )

    hit = _mim_scan(w, coeff_bound, tau)
    if hit is not None:
        return RelationCertificate("relation", hit[0], float(coeff_bound), hit[1])
    return RelationCertificate("independent", None, float(coeff_bound))


def _lll_reduce(rows: list[list[int]], delta: float = 0.99) -> list[list[int]]:
    """Deterministic LLL over integer rows with float Gram-Schmidt."""
    b = [[int(x) for x in row] for row in rows]
    m = len(b)

    def gso():
        arr = np.array(b, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ReductionFailure("basis entries exceeded float range")
        bstar = np.zeros_like(arr)
        mu = np.zeros((m, m))
        norm2 = np.zeros(m)
        for i in range(m):
            v = arr[i].copy()
            for j in range(i):
                if norm2[j] <= 0.0:
                    raise ReductionFailure("degenerate Gram-Schmidt norm")
                mu[i, j] = (arr[i] @ bstar[j]) / norm2[j]
                v -= mu[i, j] * bstar[j]
            bstar[i] = v
            norm2[i] = float(v @ v)
            mu[i, i] = 1.0
        return mu, norm2

    mu, norm2 = gso()
    i, iters = 1, 0
    while i < m:
        iters += 1
        if iters > 20000 * m:
            raise ReductionFailure("LLL iteration budget exceeded")
        for j in range(i - 1, -1, -1):
            q = round(mu[i, j])
            if q:
                b[i] = [x - q * y for x, y in zip(b[i], b[j])]
                # size reduction leaves the GS vectors untouched; only the
                # projections of row i onto earlier rows shift
                mu[i, : j + 1] -= q * mu[j, : j + 1]
        if norm2[i] >= (delta - mu[i, i - 1] ** 2) * norm2[i - 1]:
            i += 1
        else:
            b[i - 1], b[i] = b[i], b[i - 1]
            mu, norm2 = gso()
            i = max(i - 1, 1)
    return b


def find_integer_relation_reduced(
    w, norm_bound: float, tol: float = 1e-9
) -> RelationCertificate:
    """Lattice-reduction search for an integer relation of bounded norm.

    Reduces the lattice spanned by rows [e_i | round(w_i / (tol*max|w|))]
    and scans the reduced basis for a row whose coefficient part c satisfies
    ||c||_2 <= 2^(k/2) * norm_bound and whose residual |sum c_i w_i|
    cancels at working precision (never looser than the documented
    tol * ||c||_2 * max|w| bound).  If a relation that is exact at working
    precision exists with norm <= norm_bound and coefficients below the
    float64 ceiling of :func:`_precision_cap`, the reduced basis exposes it
    and it is returned; otherwise the verdict is 'independent'.
    """
    w = np.asarray(w, dtype=float).reshape(-1)
    k = w.shape[0]
    if k < 2:
        raise ValueError("need at least two values")
    if norm_bound < 1:
        raise ValueError("norm bound must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    maxw = float(np.abs(w).max())
    if maxw == 0.0:
        c = (0,) * (k - 1) + (1,)
        return RelationCertificate("relation", c, float(norm_bound), 0.0)

    # The larger the scale, the more a true relation (whose last coordinate
    # nearly vanishes) stands out from generic short vectors; cancellation
    # at working precision supports scales up to ~1/(k*eps) regardless of
    # how loose tol is.
    eps = float(np.finfo(float).eps)
    # Amplify the residual column enough that rounding noise (~|c|_1 / 2) is
    # negligible next to generic residuals, but keep the entries far from the
    # float64 integer ceiling so Gram-Schmidt stays accurate.
    scale = min(max(1.0 / tol, 1.0 / (1024.0 * k * eps)), 1.0 / (64.0 * eps)) / maxw
    rows = [
        [1 if i == j else 0 for j in range(k)] + [int(round(w[i] * scale))]
        for i in range(k)
    ]
    reduced = _lll_reduce(rows)

    norm_cap = 2.0 ** (k / 2.0) * float(norm_bound)
    entry_cap = _precision_cap(k)
    for row in reduced:
        c = row[:k]
        if not any(c):
            continue
        normc = math.sqrt(sum(x * x for x in c))
        if normc > norm_cap or max(abs(x) for x in c) > entry_cap:
            continue
        resid = abs(float(np.dot(c, w)))
        # accept only cancellation at working precision, never looser than
        # the documented tol * ||c|| * max|w| bound
        cut = min(
            64.0 * k * eps * sum(abs(x) for x in c) * maxw,
            tol * normc * maxw,
        )
        if resid < cut:
            return RelationCertificate(
                "relation", _canonical_sign(c), float(norm_bound), resid
            )
    return RelationCertificate("independent", None, float(norm_bound))


def rational_rank_at_least(
    w,
    r: int,
    b: int,
    strategy: str = "brute",
    tol: float = 1e-9,
    assume_restricted: bool = False,
) -> RankVerdict:
    """Certify that the rational rank of the value tuple is at least r.

    True when some r-subset of the values admits no integer relation with
    coefficients bounded by b**(r-1) — the bound that any dependence among
    values of b-bounded functionals must respect.  Subsets are scanned in
    ascending index order; the verdict carries the first independent subset
    (or, when none exists, the relation found on the first subset).

    strategy 'distinct' (alias 'distinct-values') replaces the search with a
    pairwise-distinctness check.  That only certifies rank under an extra
    assumption on how the values were generated (no repeated functionals and
    no degenerate combinations beyond value collisions), so the caller must
    acknowledge it by passing ``assume_restricted=True``.
    """
    w = np.asarray(w, dtype=float).reshape(-1)
    k = w.shape[0]
    if not 1 <= r <= k:
        raise ValueError(f"target rank {r} out of range for {k} values")
    if b < 1:
        raise ValueError("multiplicity bound must be >= 1")
    if strategy in ("distinct", "distinct-values"):
        if not assume_restricted:
            raise ValueError(
                "the distinct-values strategy is only sound under a restricted-"
                "ensemble assumption; pass assume_restricted=True to assert it"
            )
        maxw = float(np.abs(w).max())
        diffs = np.abs(w[:, None] - w[None, :])
        distinct = bool(
            np.all(diffs[np.triu_indices(k, 1)] > tol * max(maxw, 1e-300))
        )
        return RankVerdict(distinct, None, None)
    if strategy not in ("brute", "reduced"):
        raise ValueError(f"unknown strategy {strategy!r}")

    if r == 1:
        maxw = float(np.abs(w).max())
        for i in range(k):
            if abs(w[i]) > tol * maxw:
                return RankVerdict(True, (i,), None)
        return RankVerdict(False, None, None)

    bound = b ** (r - 1)
    first_relation: tuple[tuple[int, ...], RelationCertificate] | None = None
    for subset in itertools.combinations(range(k), r):
        ws = w[list(subset)]
        if strategy == "brute":
            cert = find_integer_relation_brute(ws, bound, tol)
        else:
            cert = find_integer_relation_reduced(ws, float(bound), tol)
        if cert.kind == "independent":
            return RankVerdict(True, subset, cert)
        if first_relation is None:
            first_relation = (subset, cert)
    assert first_relation is not None
    return RankVerdict(False, first_relation[0], first_relation[1])


def exact_integer_det(matrix) -> int:
    """Exact determinant of an integer matrix (fraction-free Bareiss)."""
    a = [[int(x) for x in row] for row in np.asarray(matrix)]
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("matrix must be square")
    sign, prev = 1, 1
    for col in range(n - 1):
        pivot_row = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot_row is None:
            return 0
        if pivot_row != col:
            a[col], a[pivot_row] = a[pivot_row], a[col]
            sign = -sign
        for r in range(col + 1, n):
            for c in range(col + 1, n):
                a[r][c] = (a[r][c] * a[col][col] - a[r][col] * a[col][c]) // prev
            a[r][col] = 0
        prev = a[col][col]
    return sign * a[n - 1][n - 1]
