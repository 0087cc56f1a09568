"""Membership and niceness predicates for measured value tuples.

A loop-mode data tuple w is explained by a complete graph on d+2 points
when N^-1 w (N the appropriate canonical matrix) is a vector of positive
lengths whose squares pass the flat-dimension test — Cayley-Menger residual
~ 0 plus positive-semidefiniteness of the associated Gram matrix.  Path
mode is the same with N the identity.

For the plane there is an additional *niceness* test that guards against
numerically-consistent but combinatorially fake explanations: the recovered
length vector must avoid the singular locus of the 4-point length variety
(60 explicit strata: collinearity sign patterns, edge collapses, and
triangle collapses), and the first three data values must already be
rationally independent at the multiplicity bound.  Together these certify
full rational rank 6 without a 6-fold brute search.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geometry import EdgeIndexing, _cm_matrix, cm_residual, edge_count
from .measurement import CanonicalMatrix
from .relations import rational_rank_at_least

__all__ = [
    "MembershipVerdict",
    "SingularityVerdict",
    "is_singular_L24",
    "membership_L",
    "rank6_shortcut",
    "recovered_lengths",
]


@dataclass(frozen=True)
class MembershipVerdict:
    """Result of the variety-membership test.

    ``recovered_lengths`` holds N^-1 w (the candidate edge lengths); it is
    reported for diagnostics whether or not the test passed, and is
    guaranteed entrywise positive when ``member`` is True.  ``cm_residual``
    is the scale-free Cayley-Menger residual of the squared lengths.
    """

    member: bool
    recovered_lengths: np.ndarray
    cm_residual: float


@dataclass(frozen=True)
class SingularityVerdict:
    """Whether a 6-length vector lies on the singular locus, and where.

    ``stratum_type`` is 'I' (collinearity sign pattern), 'II' (collapsed
    edge), or 'III' (collapsed triangle); ``witness`` identifies the first
    matching stratum in the fixed enumeration order: the sign tuple, the
    (edge, signs) pair, or the triangle.
    """

    singular: bool
    stratum_type: str | None = None
    witness: tuple | None = None


@functools.lru_cache(maxsize=None)
def _rational_inverse(matrix: CanonicalMatrix) -> tuple[tuple[Fraction, ...], ...]:
    """Exact inverse of an integer canonical matrix via Fraction elimination."""
    n = matrix.size
    a = [[Fraction(int(x)) for x in row] for row in matrix.entries]
    inv = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise ValueError("canonical matrix is singular")
        a[col], a[pivot] = a[pivot], a[col]
        inv[col], inv[pivot] = inv[pivot], inv[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        inv[col] = [x / p for x in inv[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
    return tuple(tuple(row) for row in inv)


@functools.lru_cache(maxsize=None)
def _float_inverse(matrix: CanonicalMatrix) -> np.ndarray:
    """The exact rational inverse rounded to float64, for cheap prescreens."""
    arr = np.array([[float(x) for x in row] for row in _rational_inverse(matrix)])
    arr.setflags(write=False)
    return arr


def recovered_lengths(w: np.ndarray, matrix: CanonicalMatrix | None) -> np.ndarray:
    """N^-1 w computed exactly (Fraction arithmetic), rounded once at the end.

    With ``matrix=None`` the transform is the identity and w is returned
    as-is (path mode: the values are already candidate edge lengths).
    """
    w = np.asarray(w, dtype=float).reshape(-1)
    if matrix is None:
        return w.copy()
    if w.shape[0] != matrix.size:
        raise ValueError(
            f"expected {matrix.size} values for the {matrix.kind} matrix, "
            f"got {w.shape[0]}"
        )
    inv = _rational_inverse(matrix)
    exact = [Fraction(float(x)) for x in w]
    return np.array(
        [float(sum(c * x for c, x in zip(row, exact))) for row in inv]
    )


def _realizable(sq: np.ndarray, d: int, tol: float) -> bool:
    """Gram PSD with rank <= d, within a scale-relative tolerance."""
    gram = _cm_matrix(sq, d) / 2.0
    scale = float(np.mean(np.abs(sq)))
    if scale == 0.0:
        return True
    eps = 4.0 * tol * scale
    ev = np.linalg.eigvalsh(gram)
    return bool(-eps <= ev[0] <= eps)


def membership_L(
    w,
    matrix: CanonicalMatrix | None,
    d: int,
    tol: float = 1e-9,
) -> MembershipVerdict:
    """Does the value tuple describe d+2 points in R^d?

    Checks, on u = N^-1 w: entrywise positivity (relative to max|w|),
    vanishing of the normalized Cayley-Menger residual of u^2, and PSD
    realizability of the Gram matrix with rank at most d.  All three are
    required for membership; the residual is reported regardless.
    """
    w = np.asarray(w, dtype=float).reshape(-1)
    need = edge_count(d + 2)
    if w.shape[0] != need:
        raise ValueError(f"expected {need} values for d={d}, got {w.shape[0]}")
    if matrix is not None and matrix.d != d:
        raise ValueError(f"matrix is for d={matrix.d}, asked about d={d}")
    maxw = float(np.abs(w).max())
    if matrix is not None:
        # Settle decisive rejections with a float matvec before paying for
        # the exact rational solve; the 1e-12 margin dwarfs the ~1e-15
        # relative error of the float path, so only borderline tuples (and
        # the rare accepts) reach the Fraction arithmetic.
        uf = _float_inverse(matrix) @ w
        slack = 1e-12 * max(maxw, 1e-300)
        if np.any(uf <= tol * maxw - slack):
            return MembershipVerdict(False, uf, cm_residual(uf * uf, d))
        residual_f = cm_residual(uf * uf, d)
        if residual_f > tol + 1e-12:
            return MembershipVerdict(False, uf, residual_f)
    u = recovered_lengths(w, matrix)
    positive = bool(np.all(u > tol * maxw))
    sq = u * u
    residual = cm_residual(sq, d)
    member = positive and residual < tol and _realizable(sq, d, tol)
    return MembershipVerdict(member, u, residual)


# --- singular locus of the 4-point planar length variety -------------------


@functools.lru_cache(maxsize=1)
def _singular_strata() -> tuple[tuple[tuple[str, tuple], ...], np.ndarray]:
    """The 60 strata as (label, witness) descriptors plus a (60, 3, 6)
    coefficient tensor; a length vector lies on stratum s when all three
    linear forms tensor[s] vanish on it."""
    idx = EdgeIndexing(4)
    descriptors: list[tuple[str, tuple]] = []
    eqs: list[np.ndarray] = []

    # Type I: collinear configurations.  Signs attach to the edges
    # (0,2), (1,2), (0,3), (1,3), (2,3) in that order.
    for signs in itertools.product((1, -1), repeat=5):
        s02, s12, s03, s13, s23 = signs
        m = np.zeros((3, 6))
        m[0, idx.index_of(0, 1)] = 1
        m[0, idx.index_of(0, 2)] = -s02
        m[0, idx.index_of(1, 2)] = s12
        m[1, idx.index_of(0, 1)] = 1
        m[1, idx.index_of(0, 3)] = -s03
        m[1, idx.index_of(1, 3)] = s13
        m[2, idx.index_of(0, 2)] = s02
        m[2, idx.index_of(0, 3)] = -s03
        m[2, idx.index_of(2, 3)] = s23
        descriptors.append(("I", signs))
        eqs.append(m)

    # Type II: one edge collapsed; each remaining vertex equidistant from
    # the collapsed pair up to a sign.
    for i, j in idx.pairs():
        others = tuple(v for v in range(4) if v not in (i, j))
        for signs in itertools.product((1, -1), repeat=2):
            m = np.zeros((3, 6))
            m[0, idx.index_of(i, j)] = 1
            for row, (k, s) in enumerate(zip(others, signs), start=1):
                m[row, idx.index_of(i, k)] = 1
                m[row, idx.index_of(j, k)] = -s
            descriptors.append(("II", ((i, j), signs)))
            eqs.append(m)

    # Type III: a whole triangle collapsed to a point.
    for tri in itertools.combinations(range(4), 3):
        m = np.zeros((3, 6))
        for row, (a, b) in enumerate(itertools.combinations(tri, 2)):
            m[row, idx.index_of(a, b)] = 1
        descriptors.append(("III", tri))
        eqs.append(m)

    tensor = np.stack(eqs)
    tensor.setflags(write=False)
    return tuple(descriptors), tensor


def is_singular_L24(l, tol: float = 1e-9) -> SingularityVerdict:
    """Classify a 6-vector of candidate lengths against the singular locus.

    All 60 strata are tested; a stratum matches when its three linear forms
    all vanish within tol * max|l|.  The verdict reports the first match in
    the fixed order Type I (32 sign patterns), Type II (24 edge collapses),
    Type III (4 triangle collapses).
    """
    l = np.asarray(l, dtype=float).reshape(-1)
    if l.shape[0] != 6:
        raise ValueError(f"expected 6 lengths, got {l.shape[0]}")
    descriptors, tensor = _singular_strata()
    scale = float(np.abs(l).max())
    if scale == 0.0:
        label, witness = descriptors[0]
        return SingularityVerdict(True, label, witness)
    resid = np.abs(tensor @ l).max(axis=1)
    hits = resid <= tol * scale
    if not hits.any():
        return SingularityVerdict(False)
    label, witness = descriptors[int(np.argmax(hits))]
    return SingularityVerdict(True, label, witness)


def rank6_shortcut(
    w,
    matrix: CanonicalMatrix | None,
    b: int,
    tol: float = 1e-9,
) -> bool:
    """Planar niceness certificate: full rational rank 6 without a 6-search.

    Requires d=2 and a tuple that already passed membership.  Certifies
    rank 6 from cheap facts: the data values are pairwise distinct at the
    working precision (a coincident pair is already a bounded integer
    relation, as in glued-quadruple data), the recovered length vector
    avoids the singular locus, and the first three data values are
    rationally independent with coefficients up to b^2 (brute search).
    Any failure returns False.
    """
    if matrix is not None and matrix.d != 2:
        raise ValueError("the rank-6 shortcut applies to d=2 only")
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape[0] != 6:
        raise ValueError(f"expected 6 values, got {w.shape[0]}")
    # Threshold for "coincident" matches what a brute scan at the full
    # rank-6 bound b^5 would accept for the relation w_i - w_j = 0.
    gap_tol = tol * (b**5) * max(float(np.abs(w).max()), 1e-300)
    sw = np.sort(w)
    if float(np.diff(sw).min()) <= gap_tol:
        return False
    u = recovered_lengths(w, matrix)
    if is_singular_L24(u, tol).singular:
        return False
    return rational_rank_at_least(w[:3], 3, b, "brute", tol).at_least
