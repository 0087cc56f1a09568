"""Euclidean primitives: configurations, edge indexing, squared-distance
vectors, Cayley-Menger tests, simplex embedding, and congruence checks.

Conventions used throughout the package:

* vertices are 0-based integers;
* the flat edge order on n vertices groups edges by their larger endpoint,
  ascending, and by the smaller endpoint within a group:
  (0,1), (0,2), (1,2), (0,3), (1,3), (2,3), ...
* a squared-distance vector or length vector is a plain 1-D ``numpy``
  array in that flat order.

Tolerances are relative: a determinant counts as zero when it is small
compared to the (d+1)-th power of the mean input magnitude, lengths are
compared relative to the largest length in sight, and so on.  The default
``tol=1e-9`` leaves several orders of magnitude of headroom above float64
noise for well-conditioned inputs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AnchorsDegenerate",
    "Configuration",
    "Degenerate",
    "EdgeIndexing",
    "NotRealizable",
    "align_onto",
    "are_congruent",
    "are_similar_ordered",
    "cayley_menger_det",
    "cm_residual",
    "edge_count",
    "embed_simplex",
    "measure_all_lengths",
    "squared_distance",
    "squared_distances",
]


class Degenerate(ValueError):
    """Input spans an affine subspace of lower dimension than required."""


class NotRealizable(ValueError):
    """Squared distances admit no Euclidean realization in the target dimension."""


class AnchorsDegenerate(ValueError):
    """Anchor points do not affinely span the ambient space."""


def edge_count(n: int) -> int:
    """Number of unordered vertex pairs on ``n`` vertices."""
    return n * (n - 1) // 2


class EdgeIndexing:
    """Bijection between unordered vertex pairs and flat edge positions.

    Edges are grouped by the larger endpoint: position 0 is (0,1), then
    (0,2), (1,2), then (0,3), (1,3), (2,3), and so on.  For a pair (i, j)
    with i < j the flat position is C(j, 2) + i.
    """

    def __init__(self, n: int):
        if n < 2:
            raise ValueError(f"need at least 2 vertices, got n={n}")
        self.n = n
        self.size = edge_count(n)

    def index_of(self, i: int, j: int) -> int:
        if i == j:
            raise ValueError(f"({i},{j}) is not an edge")
        if i > j:
            i, j = j, i
        if not 0 <= i < j < self.n:
            raise ValueError(f"edge ({i},{j}) out of range for n={self.n}")
        return j * (j - 1) // 2 + i

    def pair_of(self, k: int) -> tuple[int, int]:
        if not 0 <= k < self.size:
            raise ValueError(f"edge index {k} out of range")
        # invert k = C(j,2) + i by solving the triangular-number inequality
        j = int((1 + math.isqrt(8 * k + 1)) // 2)
        while j * (j - 1) // 2 > k:
            j -= 1
        return k - j * (j - 1) // 2, j

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for j in range(1, self.n) for i in range(j)]


@dataclass(frozen=True)
class Configuration:
    """An ordered tuple of n points in R^dim.

    ``points`` is an (n, dim) float array; the instance owns a read-only
    copy, so configurations can be shared safely.
    """

    dim: int
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise ValueError(
                f"points must have shape (n, {self.dim}), got {pts.shape}"
            )
        if self.dim < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def subset(self, indices) -> "Configuration":
        return Configuration(self.dim, self.points[list(indices)])

    def scaled(self, s: float) -> "Configuration":
        return Configuration(self.dim, self.points * float(s))

    def diameter(self) -> float:
        if self.n < 2:
            return 0.0
        return float(np.sqrt(squared_distances(self).max()))


def squared_distance(cfg: Configuration, i: int, j: int) -> float:
    """Squared Euclidean distance between points i and j of ``cfg``."""
    diff = cfg.points[i] - cfg.points[j]
    return float(diff @ diff)


def squared_distances(cfg: Configuration) -> np.ndarray:
    """All C(n,2) squared distances of ``cfg`` in flat edge order."""
    pts = cfg.points
    idx = EdgeIndexing(cfg.n)
    out = np.empty(idx.size)
    for k, (i, j) in enumerate(idx.pairs()):
        d = pts[i] - pts[j]
        out[k] = d @ d
    return out


def measure_all_lengths(cfg: Configuration) -> np.ndarray:
    """All C(n,2) distances of ``cfg`` in flat edge order."""
    return np.sqrt(squared_distances(cfg))


def _cm_matrix(sq: np.ndarray, d: int) -> np.ndarray:
    """Assemble the (d+1)x(d+1) doubled-Gram matrix of a (d+2)-point tuple.

    Entry (a, b) is m(0,a+1) + m(0,b+1) - m(a+1,b+1) for a != b and
    2*m(0,a+1) on the diagonal, where m are the squared distances of the
    d+2 labeled vertices.  This equals twice the Gram matrix of the
    difference vectors p_{a+1} - p_0 whenever the tuple is realizable, so
    its determinant vanishes exactly when the points fit in dimension d.
    """
    sq = np.asarray(sq, dtype=float)
    need = edge_count(d + 2)
    if sq.shape != (need,):
        raise ValueError(
            f"expected {need} squared distances for d={d}, got shape {sq.shape}"
        )
    idx = EdgeIndexing(d + 2)
    m = np.zeros((d + 2, d + 2))
    for k, (i, j) in enumerate(idx.pairs()):
        m[i, j] = m[j, i] = sq[k]
    a = np.arange(1, d + 2)
    g = m[0, a][:, None] + m[0, a][None, :] - m[np.ix_(a, a)]
    return g


def cayley_menger_det(sq: np.ndarray, d: int) -> float:
    """Determinant of the doubled-Gram test matrix for d+2 points.

    Vanishes iff the squared-distance tuple is consistent with the points
    spanning at most d dimensions (for realizable inputs).  The raw,
    unnormalized determinant is returned; see :func:`cm_residual` for the
    scale-free version used in tolerance checks.
    """
    return float(np.linalg.det(_cm_matrix(sq, d)))


def cm_residual(sq: np.ndarray, d: int) -> float:
    """|Cayley-Menger determinant| normalized by mean(|sq|)^(d+1).

    Dimensionless; invariant under rescaling all squared distances by a
    common factor, which makes a single tolerance meaningful across scales.
    """
    sq = np.asarray(sq, dtype=float)
    scale = float(np.mean(np.abs(sq)))
    if scale == 0.0:
        return 0.0
    return abs(cayley_menger_det(sq, d)) / scale ** (d + 1)


def _gram_factor(sq: np.ndarray, d: int, tol: float) -> tuple[np.ndarray, str]:
    """Try to factor the doubled-Gram matrix as 2 L L^T with L of width d.

    Returns ``(L, reason)`` where ``L`` holds the d+1 non-origin points of
    the canonical-frame embedding (rows) and ``reason`` is '' on success,
    'degenerate' when the leading points span fewer than d dimensions, or
    'not-realizable' when the tuple is not PSD of rank <= d within tol.

    Shared between :func:`embed_simplex` and the membership predicate so
    the two can never disagree.
    """
    gram = _cm_matrix(sq, d) / 2.0
    k = d + 1
    scale = float(np.mean(np.abs(sq)))
    if scale == 0.0:
        return np.zeros((k, d)), "degenerate"
    L = np.zeros((k, d))
    for col in range(d):
        pivot = gram[col, col] - L[col, :col] @ L[col, :col]
        if pivot <= tol * scale:
            # includes slightly-negative pivots: span collapsed early
            return L, "degenerate"
        L[col, col] = math.sqrt(pivot)
        rest = np.arange(col + 1, k)
        L[rest, col] = (gram[rest, col] - L[rest, :col] @ L[col, :col]) / L[col, col]
    resid = np.abs(gram - L @ L.T).max()
    if resid > 4.0 * tol * scale:
        return L, "not-realizable"
    return L, ""


def embed_simplex(sq: np.ndarray, d: int, tol: float = 1e-9) -> Configuration:
    """Realize d+2 points in R^d from their squared distances.

    The frame is deterministic: point 0 at the origin, point 1 on the
    positive first axis, point 2 in the open upper half of the first two
    coordinates, and each later point choosing the positive sign on any new
    axis it spans.  Raises :class:`Degenerate` when the first d+1 points
    span fewer than d dimensions and :class:`NotRealizable` when the input
    is not (within tol) the squared-distance vector of any d+2 points in
    R^d.
    """
    L, reason = _gram_factor(sq, d, tol)
    if reason == "degenerate":
        raise Degenerate(f"points span fewer than {d} dimensions")
    if reason:
        raise NotRealizable(f"no Euclidean realization in dimension {d}")
    return Configuration(d, np.vstack([np.zeros(d), L]))


def are_congruent(a: Configuration, b: Configuration, tol: float = 1e-9) -> bool:
    """Whether two equally-sized configurations have equal length vectors.

    Congruence here means equality of all pairwise distances (allowing
    reflections), compared relative to the largest distance present.
    """
    if a.dim != b.dim or a.n != b.n:
        return False
    la, lb = measure_all_lengths(a), measure_all_lengths(b)
    scale = max(la.max(initial=0.0), lb.max(initial=0.0))
    if scale == 0.0:
        return True
    return bool(np.abs(la - lb).max() <= tol * scale)


def are_similar_ordered(
    a: Configuration, b: Configuration, tol: float = 1e-9
) -> float | None:
    """Positive factor s with dist_b = s * dist_a under the identity labeling.

    Returns None when the configurations differ in size or are not
    (within tol) positively-scaled copies of each other.  The factor is the
    least-squares ratio of the two length vectors, which for true scaled
    copies agrees with every individual ratio.
    """
    if a.dim != b.dim or a.n != b.n:
        return None
    la, lb = measure_all_lengths(a), measure_all_lengths(b)
    na, nb = float(la @ la), float(lb @ lb)
    if na == 0.0 and nb == 0.0:
        return 1.0
    if na == 0.0 or nb == 0.0:
        return None
    s = float(la @ lb) / na
    if s <= 0.0:
        return None
    scale = max(lb.max(), s * la.max())
    if np.abs(lb - s * la).max() > tol * scale:
        return None
    return s


def align_onto(
    anchor_src: np.ndarray,
    anchor_dst: np.ndarray,
    extra: np.ndarray,
    tol: float = 1e-9,
) -> np.ndarray:
    """Map ``extra`` by the isometry sending ``anchor_src`` to ``anchor_dst``.

    Both anchor arrays are (d+1, d): d+1 points that must affinely span
    R^d (else :class:`AnchorsDegenerate`) and must be congruent within tol
    (else ValueError).  The unique isometry — orthogonal map plus
    translation, reflections allowed — matching them in order is computed
    by the standard SVD alignment and applied to the single point ``extra``.
    """
    src = np.asarray(anchor_src, dtype=float)
    dst = np.asarray(anchor_dst, dtype=float)
    extra = np.asarray(extra, dtype=float)
    if src.shape != dst.shape or src.ndim != 2:
        raise ValueError("anchor arrays must have identical (d+1, d) shapes")
    d = src.shape[1]
    if src.shape[0] != d + 1:
        raise ValueError(f"need exactly {d + 1} anchors in dimension {d}")
    cs, cd = src.mean(axis=0), dst.mean(axis=0)
    A, B = src - cs, dst - cd
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= tol * max(sv[0], 1e-300):
        raise AnchorsDegenerate("anchor points do not span the ambient space")
    u, _, vt = np.linalg.svd(A.T @ B)
    omega = u @ vt
    scale = max(float(np.abs(A).max()), float(np.abs(B).max()))
    if np.abs(A @ omega - B).max() > 8.0 * tol * max(scale, 1e-300):
        raise ValueError("anchor point sets are not congruent")
    return cd + (extra - cs) @ omega


def min_pairwise_distance(points: np.ndarray) -> float:
    """Smallest pairwise distance among the rows of ``points``."""
    pts = np.asarray(points, dtype=float)
    best = math.inf
    for i, j in itertools.combinations(range(pts.shape[0]), 2):
        best = min(best, float(np.linalg.norm(pts[i] - pts[j])))
    return best
