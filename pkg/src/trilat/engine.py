"""Reconstruction by exhaustive trilateration.

Candidate bases are complete graphs on d+2 points recognized directly in
the unlabeled value list; each base is grown greedily by trilateration
steps (one new point per step, located from d+1 data values against d+1
already-placed anchors) until no step succeeds.  When distinct grown
results compete, selection prefers the one whose configuration explains
the most data values as walk functionals within the hop budget, then the
smallest total edge length (an s-scaled or phantom-extended reading of
the same data covers no more values but is strictly longer), then the
earliest base in enumeration order.

The enumerators never materialize all ordered D-tuples.  Fixing all but
one value of a candidate tuple pins the remaining one down to finitely
many mirror alternatives, so the last slot is resolved by a window lookup
in the sorted value list; the window is a wide multiple of the membership
tolerance, so no tuple able to pass the exact membership test is skipped.
Dimensions 2 and 3 get vectorized grid enumerators; every dimension is
also served by a scalar reference recursion with identical candidate
semantics (the fast paths are cross-checked against it in the tests).

Relabelings of the hidden complete graph map valid tuples to valid tuples
without changing the recovered geometry, so each enumerator emits one
canonical representative per orbit: ping slots take value positions in
ascending order (loop mode), while in path mode the (0,1) slot holds the
tuple's minimum, (0,2) the minimum over edges leaving {0,1}, and the
remaining hub edges ascend.  Candidates whose canonical labeling is flat
(solve anchors collinear within a tiny relative floor, far below any
useful tolerance) are dropped; they could not be embedded in the
canonical frame anyway.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    AnchorsDegenerate,
    Configuration,
    Degenerate,
    EdgeIndexing,
    NotRealizable,
    align_onto,
    edge_count,
    embed_simplex,
    measure_all_lengths,
    min_pairwise_distance,
)
from .measurement import (
    CanonicalMatrix,
    DataSet,
    Path,
    apply_functional,
    canonical_matrix,
    functional_from_path,
)
from .membership import membership_L, rank6_shortcut
from .relations import rational_rank_at_least

__all__ = [
    "CandidateBase",
    "NoBaseFound",
    "PartialReconstruction",
    "ReconstructionResult",
    "TrilaterationStep",
    "VerificationVerdict",
    "find_candidate_bases",
    "grow",
    "reconstruct",
    "trilaterate_step",
    "verify",
]

# Lookup windows and slack thresholds are this multiple of the membership
# tolerance.  Values further than window*tol*scale from a geometric target
# cannot pass the exact membership test, so the window prunes losslessly;
# the same slack bounds the certificate residual asserted after growth.
_WINDOW = 1e3

# Relative floor (squared) below which a solve frame counts as flat.  This
# must stay far below any plausible tolerance window: the canonical
# labeling can force three nearly collinear points into the frame role
# even when the configuration as a whole is fine, and pruning such a
# labeling silently discards the entire candidate orbit.  Heights above
# 1e-7 of the data scale keep every derived lookup target accurate to
# ~1e-8 of scale (double precision, one sqrt and one division), safely
# inside the lookup window; genuinely collinear frames still fall below
# the floor and could not be embedded anyway.
_FLAT2 = 1e-14


class NoBaseFound(RuntimeError):
    """No D-tuple of the data passed base recognition."""


@dataclass(frozen=True)
class CandidateBase:
    """A recognized complete-graph start: D data values and their geometry.

    ``value_indices`` lists the data positions in canonical slot order;
    ``mode_matrix`` is the canonical matrix the tuple was tested under
    (None in path mode, where values are edge lengths directly).
    """

    value_indices: tuple[int, ...]
    embedded: Configuration
    mode_matrix: CanonicalMatrix | None


@dataclass(frozen=True)
class TrilaterationStep:
    """One growth event: which anchors, which values, where the point went."""

    anchors: tuple[int, ...]
    new_point: np.ndarray
    value_indices: tuple[int, ...]


@dataclass(frozen=True)
class PartialReconstruction:
    """A growing configuration with per-value consumption accounting.

    ``consumed`` maps data indices to use counts (always 1: every ensemble
    element produced one value, so a value explains at most one functional
    per reconstruction).  No two points are coincident within the working
    tolerance, relative to the configuration diameter.
    """

    points: Configuration
    consumed: dict[int, int]
    history: tuple[TrilaterationStep, ...]


@dataclass(frozen=True)
class ReconstructionResult:
    """A maximal grown reconstruction plus its selection key and labeling.

    ``labeling`` maps each consumed data index to the recovered walk over
    the result's vertex numbering; re-measuring the configuration along
    those walks reproduces the consumed values (asserted at build time).
    ``relative_scale_rank`` is the total edge-length sum used to prefer
    the smallest-scale interpretation among equally-sized results.
    """

    configuration: Configuration
    explained_count: int
    relative_scale_rank: float
    labeling: dict[int, Path]


@dataclass(frozen=True)
class VerificationVerdict:
    """Outcome of matching a reconstruction against ground truth."""

    matched: bool
    relabeling: tuple[int, ...] | None
    scale: int | None
    max_residual: float


# --- sorted-value view ------------------------------------------------------


@dataclass(frozen=True)
class _View:
    """Ascending available values with their original data indices."""

    av: np.ndarray
    orig: np.ndarray
    win: float  # absolute window for length-valued lookups
    win2: float  # absolute slack for squared-length mask tests
    flat2: float  # squared-height floor for solve frames

    @property
    def size(self) -> int:
        return int(self.av.size)


def _make_view(values: np.ndarray, exclude, tol: float) -> _View:
    order = np.argsort(values, kind="stable")
    if exclude:
        keep = np.ones(values.size, dtype=bool)
        keep[list(exclude)] = False
        order = order[keep[order]]
    av = values[order]
    scale = float(values.max()) if values.size else 1.0
    return _View(
        av,
        order,
        _WINDOW * tol * scale,
        _WINDOW * tol * scale * scale,
        _FLAT2 * scale * scale,
    )


def _interval_positions(view: _View, lo_val: float, hi_val: float) -> np.ndarray:
    """Positions whose value lies in [lo_val - win, hi_val + win]."""
    lo = int(np.searchsorted(view.av, lo_val - view.win, side="left"))
    hi = int(np.searchsorted(view.av, hi_val + view.win, side="right"))
    return np.arange(lo, hi)


class _SquaredHitmap:
    """Constant-time prefilter: could this squared length match any value?

    Buckets the interval [min(av)-win, max(av)+win] of squared lengths;
    buckets overlapping some value's window are marked, padded by a slack
    absorbing single-precision rounding of the caller's squared-distance
    arithmetic (sound as long as intermediate magnitudes stay below
    ``1.5 * hi2``; callers with larger trilateration coordinates must
    query in double precision).  ``mask`` answers per cell with one fused
    multiply-add and one gather; two always-False sentinel buckets absorb
    out-of-range queries.  False positives are cheap - callers re-check
    hits exactly - while misses are impossible because each padded window
    is covered by whole buckets.
    """

    _BUCKETS = 1 << 17

    def __init__(self, view: _View):
        av, win = view.av, view.win
        raw_lo2 = max(float(av[0]) - win, 0.0) ** 2
        raw_hi2 = (float(av[-1]) + win) ** 2
        self.pad = 96.0 * float(np.finfo(np.float32).eps) * raw_hi2
        self.lo2 = max(raw_lo2 - self.pad, 0.0)
        self.hi2 = raw_hi2 + self.pad
        nb = self._BUCKETS
        self.scale = nb / max(self.hi2 - self.lo2, 1e-300)
        bits = np.zeros(nb + 2, dtype=bool)
        lo_i = np.floor(
            (np.maximum(av - win, 0.0) ** 2 - self.pad - self.lo2) * self.scale
        )
        hi_i = np.floor(((av + win) ** 2 + self.pad - self.lo2) * self.scale)
        for a, b in zip(
            np.clip(lo_i, 0, nb - 1).astype(int), np.clip(hi_i, 0, nb - 1).astype(int)
        ):
            bits[a + 1 : b + 2] = True
        self.bits = bits
        self._off = 1.0 - self.lo2 * self.scale

    def mask(self, t2: np.ndarray) -> np.ndarray:
        idx = (t2 * self.scale + self._off).astype(np.int64)
        return np.take(self.bits, idx, mode="clip")


# --- rank certification and base validation ---------------------------------


def _rank_certified(w: np.ndarray, matrix, d: int, b: int, tol: float, strategy: str) -> bool:
    """Full rational rank of a base/step tuple, by the requested route."""
    if strategy == "reduced" and d == 2:
        return rank6_shortcut(w, matrix, b, tol)
    if strategy == "distinct":
        return rational_rank_at_least(
            w, w.size, b, "distinct", tol, assume_restricted=True
        ).at_least
    method = "brute" if strategy == "brute" else "reduced"
    return rational_rank_at_least(w, w.size, b, method, tol).at_least


def _finish_base(view, pos, matrix, d, b, tol, strategy, seen, out) -> None:
    idxs = tuple(int(view.orig[p]) for p in pos)
    if idxs in seen:
        return
    seen.add(idxs)
    w = view.av[list(pos)]
    verdict = membership_L(w, matrix, d, tol)
    if not verdict.member:
        return
    if not _rank_certified(w, matrix, d, b, tol, strategy):
        return
    u = verdict.recovered_lengths
    try:
        emb = embed_simplex(u * u, d, tol)
    except (Degenerate, NotRealizable):
        return
    lengths = measure_all_lengths(emb)
    scale = float(lengths.max())
    if np.abs(lengths - u).max() > _WINDOW * tol * scale:
        return
    if min_pairwise_distance(emb.points) <= tol * scale:
        return
    out.append(CandidateBase(idxs, emb, matrix))


# --- vectorized base enumerators, d = 2 --------------------------------------


def _bases_loop_d2(view: _View, tol: float):
    """Canonical slot order [P1, P2, T12, P3, T13, T23]; T23 by lookup."""
    av, win, win2 = view.av, view.win, view.win2
    m = view.size
    for i1, i2 in itertools.combinations(range(m), 2):
        r0, r1 = av[i1] / 2.0, av[i2] / 2.0
        lo = 2.0 * max(r0, r1)
        for p12 in _interval_positions(view, lo, 2.0 * (r0 + r1)):
            if p12 == i1 or p12 == i2:
                continue
            u12 = av[p12] - r0 - r1
            x2 = (r0 * r0 + r1 * r1 - u12 * u12) / (2.0 * r0)
            y2sq = r1 * r1 - x2 * x2
            if y2sq <= view.flat2:
                continue
            y2 = math.sqrt(y2sq)
            i3s = np.arange(i2 + 1, m)
            if not i3s.size:
                continue
            r2 = av[i3s] / 2.0
            u13 = av[None, :] - (r0 + r2)[:, None]
            x3 = (r0 * r0 + (r2 * r2)[:, None] - u13 * u13) / (2.0 * r0)
            y3sq = (r2 * r2)[:, None] - x3 * x3
            valid = (u13 > 0.0) & (y3sq > -win2)
            y3 = np.sqrt(np.maximum(y3sq, 0.0))
            dx2 = (x3 - x2) ** 2
            base = (r1 + r2)[:, None]
            for sgn in (1.0, -1.0):
                tgt = base + np.sqrt(dx2 + (y3 - sgn * y2) ** 2)
                lo_h = np.searchsorted(av, tgt - win, side="left")
                hi_h = np.searchsorted(av, tgt + win, side="right")
                for a, bcol in zip(*np.nonzero(valid & (lo_h < hi_h))):
                    i3, p13 = int(i3s[a]), int(bcol)
                    for h in range(lo_h[a, bcol], hi_h[a, bcol]):
                        pos = (i1, i2, p12, i3, p13, int(h))
                        if len(set(pos)) == 6:
                            yield pos


def _bases_path_d2(view: _View, tol: float):
    """Flat slot order [(0,1),(0,2),(1,2),(0,3),(1,3),(2,3)]; (2,3) by lookup."""
    av, win, win2 = view.av, view.win, view.win2
    m = view.size
    for i1 in range(m - 5):
        u01 = av[i1]
        for i2 in range(i1 + 1, m):
            u02 = av[i2]
            for p12 in _interval_positions(view, abs(u01 - u02), u01 + u02):
                if p12 <= i2:
                    continue
                u12 = av[p12]
                x2 = (u01 * u01 + u02 * u02 - u12 * u12) / (2.0 * u01)
                y2sq = u02 * u02 - x2 * x2
                if y2sq <= view.flat2:
                    continue
                y2 = math.sqrt(y2sq)
                rest = np.arange(i2 + 1, m)
                if rest.size < 2:
                    continue
                u03 = av[rest]
                u13 = av[rest]
                x3 = (u01 * u01 + (u03 * u03)[:, None] - (u13 * u13)[None, :]) / (2.0 * u01)
                y3sq = (u03 * u03)[:, None] - x3 * x3
                valid = y3sq > -win2
                y3 = np.sqrt(np.maximum(y3sq, 0.0))
                dx2 = (x3 - x2) ** 2
                for sgn in (1.0, -1.0):
                    tgt = np.sqrt(dx2 + (y3 - sgn * y2) ** 2)
                    lo_h = np.maximum(
                        np.searchsorted(av, tgt - win, side="left"), i1 + 1
                    )
                    hi_h = np.searchsorted(av, tgt + win, side="right")
                    for a, bcol in zip(*np.nonzero(valid & (lo_h < hi_h))):
                        a3, b3 = int(rest[a]), int(rest[bcol])
                        for h in range(lo_h[a, bcol], hi_h[a, bcol]):
                            pos = (i1, i2, p12, a3, b3, int(h))
                            if len(set(pos)) == 6:
                                yield pos


# --- vectorized base enumerators, d = 3 --------------------------------------


def _triangle_interval(view: _View, ua: float, ub: float) -> np.ndarray:
    """Positions of loop triangle values compatible with hub lengths ua, ub."""
    return _interval_positions(view, ua + ub + abs(ua - ub), 2.0 * (ua + ub))


def _bases_loop_d3(view: _View, tol: float):
    """Slots [P1,P2,T12,P3,T13,T23,P4,T14,T24,T34]; T34 by lookup."""
    av, win, win2 = view.av, view.win, view.win2
    m = view.size
    if m < 10:
        return
    hitmap = _SquaredHitmap(view)
    # triangle-candidate position range for every ping pair, precomputed so
    # hopeless ping 4-combos are skipped without building any arrays
    spans = {}
    for i, j in itertools.combinations(range(m), 2):
        ra, rb = av[i] / 2.0, av[j] / 2.0
        lo = int(np.searchsorted(av, ra + rb + abs(ra - rb) - win, side="left"))
        hi = int(np.searchsorted(av, 2.0 * (ra + rb) + win, side="right"))
        spans[i, j] = (lo, hi)

    def _candidates(i, j, pset):
        lo, hi = spans[i, j]
        arr = np.arange(lo, hi)
        keep = np.ones(arr.shape, dtype=bool)
        for p in pset:
            keep &= arr != p
        return arr[keep]

    for pings in itertools.combinations(range(m), 4):
        i1, i2, i3, i4 = pings
        if any(spans[a, b][0] >= spans[a, b][1]
               for a, b in ((i1, i2), (i1, i3), (i2, i3), (i1, i4), (i2, i4))):
            continue
        r0, r1, r2, r3 = av[i1] / 2.0, av[i2] / 2.0, av[i3] / 2.0, av[i4] / 2.0
        pset = set(pings)
        c13 = _candidates(i1, i3, pset)
        c23 = _candidates(i2, i3, pset)
        c14 = _candidates(i1, i4, pset)
        c24 = _candidates(i2, i4, pset)
        if not (c13.size and c23.size and c14.size and c24.size):
            continue
        c12 = _candidates(i1, i2, pset)
        u12 = av[c12] - r0 - r1
        x2 = (r0 * r0 + r1 * r1 - u12 * u12) / (2.0 * r0)
        y2sq = r1 * r1 - x2 * x2
        keep = y2sq > view.flat2
        if not keep.any():
            continue
        c12k, x2v = c12[keep], x2[keep]
        y2v = np.sqrt(y2sq[keep])
        u13 = av[c13] - r0 - r2
        u23 = av[c23] - r1 - r2
        u14 = av[c14] - r0 - r3
        u24 = av[c24] - r1 - r3

        def _sheet(rj, ua, ub, ca, cb):
            # hub edges to p0 are exact (half the pings); solve the new
            # vertex against p0, p1, p2 for every surviving T12 candidate
            # at once (leading axis)
            x = (r0 * r0 + rj * rj - ua * ua) / (2.0 * r0)
            y = (
                r1 * r1
                + rj * rj
                - 2.0 * np.multiply.outer(x2v, x)[:, :, None]
                - (ub * ub)[None, None, :]
            ) / (2.0 * y2v[:, None, None])
            zsq = rj * rj - (x * x)[None, :, None] - y * y
            ok = zsq > -win2
            if not ok.any():
                return None
            pp, aa, bb = np.nonzero(ok)
            return (
                pp,
                x[aa],
                y[pp, aa, bb],
                np.sqrt(np.maximum(zsq[pp, aa, bb], 0.0)),
                ca[aa],
                cb[bb],
            )

        s3 = _sheet(r2, u13, u23, c13, c23)
        if s3 is None:
            continue
        s4 = _sheet(r3, u14, u24, c14, c24)
        if s4 is None:
            continue
        p3, x3, y3, z3, a13, a23 = s3
        p4, x4, y4, z4, a14, a24 = s4
        # survivors arrive grouped by T12 candidate (row-major nonzero);
        # vertices 3 and 4 must agree on it, so cross-match group by group
        nv = c12k.size
        b3 = np.searchsorted(p3, np.arange(nv + 1))
        b4 = np.searchsorted(p4, np.arange(nv + 1))
        rr34 = r2 + r3
        for gp in range(nv):
            r3lo, r3hi = int(b3[gp]), int(b3[gp + 1])
            c4lo, c4hi = int(b4[gp]), int(b4[gp + 1])
            if r3lo == r3hi or c4lo == c4hi:
                continue
            X3, Y3, Z3 = x3[r3lo:r3hi], y3[r3lo:r3hi], z3[r3lo:r3hi]
            X4, Y4, Z4 = x4[c4lo:c4hi], y4[c4lo:c4hi], z4[c4lo:c4hi]
            base = (
                (X3[:, None] - X4[None, :]) ** 2
                + (Y3[:, None] - Y4[None, :]) ** 2
                + (Z3 * Z3)[:, None]
                + (Z4 * Z4)[None, :]
            )
            zz = 2.0 * np.multiply.outer(Z3, Z4)
            tp = rr34 + np.sqrt(np.maximum(base - zz, 0.0))
            tm = rr34 + np.sqrt(np.maximum(base + zz, 0.0))
            hm = hitmap.mask(tp * tp)
            np.logical_or(hm, hitmap.mask(tm * tm), out=hm)
            rr, cc = np.nonzero(hm)
            if rr.size == 0:
                continue
            for tg in (tp[rr, cc], tm[rr, cc]):
                lo_h = np.searchsorted(av, tg - win, side="left")
                hi_h = np.searchsorted(av, tg + win, side="right")
                for k in np.flatnonzero(lo_h < hi_h):
                    a = r3lo + int(rr[k])
                    bcol = c4lo + int(cc[k])
                    for h in range(int(lo_h[k]), int(hi_h[k])):
                        pos = (
                            i1,
                            i2,
                            int(c12k[gp]),
                            i3,
                            int(a13[a]),
                            int(a23[a]),
                            i4,
                            int(a14[bcol]),
                            int(a24[bcol]),
                            int(h),
                        )
                        if len(set(pos)) == 10:
                            yield pos


def _bases_path_d3(view: _View, tol: float):
    """Flat K5 slots; (3,4) by lookup, canonical (0,3) before (0,4)."""
    av, win, win2 = view.av, view.win, view.win2
    m = view.size
    if m < 10:
        return
    hitmap = _SquaredHitmap(view)
    for i1 in range(m - 9):
        u01 = av[i1]
        for i2 in range(i1 + 1, m):
            u02 = av[i2]
            cross = np.arange(i2 + 1, m)
            if cross.size < 5:
                break
            other = np.arange(i1 + 1, m)
            for p12 in _interval_positions(view, abs(u01 - u02), u01 + u02):
                if p12 <= i2:
                    continue
                u12 = av[p12]
                x2 = (u01 * u01 + u02 * u02 - u12 * u12) / (2.0 * u01)
                y2sq = u02 * u02 - x2 * x2
                if y2sq <= view.flat2:
                    continue
                y2 = math.sqrt(y2sq)

                def _sheet(ca, cb, cc):
                    # new vertex against p0, p1, p2 from direct edge values
                    ua, ub, uc = av[ca], av[cb], av[cc]
                    x = (u01 * u01 + (ua * ua)[:, None] - (ub * ub)[None, :]) / (
                        2.0 * u01
                    )
                    y = (
                        u02 * u02
                        - 2.0 * x[:, :, None] * x2
                        + (ua * ua)[:, None, None]
                        - (uc * uc)[None, None, :]
                    ) / (2.0 * y2)
                    zsq = (ua * ua)[:, None, None] - x[:, :, None] ** 2 - y * y
                    ok = zsq > -win2
                    if not ok.any():
                        return None
                    aa, bb, cc_ = np.nonzero(ok)
                    return (
                        x[aa, bb],
                        y[aa, bb, cc_],
                        np.sqrt(np.maximum(zsq[aa, bb, cc_], 0.0)),
                        ca[aa],
                        cb[bb],
                        cc[cc_],
                    )

                s3 = _sheet(cross, cross, other)
                if s3 is None:
                    continue
                x3, y3, z3, a3, b3, c3 = s3
                z3sq = z3 * z3
                big = max(
                    float(np.abs(x3).max()),
                    float(np.abs(y3).max()),
                    float(z3.max()),
                )
                # float32 halves the memory traffic of the pair sweep and
                # its rounding stays inside the hitmap's mark padding -
                # except on sheets with oversized trilateration coordinates
                # (tiny base edges), which fall back to double precision.
                dt = np.float32 if big * big <= 1.5 * hitmap.hi2 else np.float64
                xs, ys, zs = x3.astype(dt), y3.astype(dt), z3.astype(dt)
                zs2 = z3sq.astype(dt)
                # Vertices 3 and 4 draw from identical slot ranges; the
                # canonical hub order pos(0,3) < pos(0,4) lets each block
                # of rows sharing a hub slot pair only with the column
                # tail of strictly larger hub slots (a3 ascends by
                # construction, row-major over the sheet grid).
                bounds = [0, *(np.flatnonzero(np.diff(a3)) + 1), a3.size]
                for g in range(len(bounds) - 1):
                    r0, r1 = bounds[g], bounds[g + 1]
                    c0 = int(np.searchsorted(a3, a3[r0], side="right"))
                    if c0 >= a3.size:
                        break
                    base = (
                        (xs[r0:r1, None] - xs[None, c0:]) ** 2
                        + (ys[r0:r1, None] - ys[None, c0:]) ** 2
                        + zs2[r0:r1, None]
                        + zs2[None, c0:]
                    )
                    dz2 = 2.0 * zs[r0:r1, None] * zs[None, c0:]
                    hm = hitmap.mask(base - dz2)
                    np.logical_or(hm, hitmap.mask(base + dz2), out=hm)
                    rr, cc = np.nonzero(hm)
                    if rr.size == 0:
                        continue
                    ia = rr + r0
                    ib = cc + c0
                    # exact double-precision windows on the surviving cells
                    ex = (
                        (x3[ia] - x3[ib]) ** 2
                        + (y3[ia] - y3[ib]) ** 2
                        + z3sq[ia]
                        + z3sq[ib]
                    )
                    exz = 2.0 * z3[ia] * z3[ib]
                    for tg2 in (ex - exz, ex + exz):
                        tg = np.sqrt(np.maximum(tg2, 0.0))
                        lo_h = np.maximum(
                            np.searchsorted(av, tg - win, side="left"), i1 + 1
                        )
                        hi_h = np.searchsorted(av, tg + win, side="right")
                        for k in np.flatnonzero(lo_h < hi_h):
                            pa, pb = int(ia[k]), int(ib[k])
                            for h in range(int(lo_h[k]), int(hi_h[k])):
                                pos = (
                                    i1,
                                    i2,
                                    int(p12),
                                    int(a3[pa]),
                                    int(b3[pa]),
                                    int(c3[pa]),
                                    int(a3[pb]),
                                    int(b3[pb]),
                                    int(c3[pb]),
                                    int(h),
                                )
                                if len(set(pos)) == 10:
                                    yield pos


# --- scalar reference enumerator (any d >= 2) --------------------------------


def _bases_scalar(view: _View, d: int, mode: str, tol: float):
    """Depth-first slot assignment; the yardstick the fast paths must match.

    Places base vertices one at a time in the canonical frame (triangular
    solves), prunes on positivity and realizability as soon as a vertex's
    slots are chosen, and resolves the final slot by window lookup exactly
    like the vectorized enumerators.  Raw position streams may differ from
    the fast paths on degenerate tuples (which nothing can embed anyway);
    the recognized base lists agree.
    """
    av, win, win2 = view.av, view.win, view.win2
    m = view.size
    if m < edge_count(d + 2):
        return
    coords = np.zeros((d + 2, d))
    hub = np.zeros(d + 2)  # loop mode: lengths from vertex 0

    def place(dists: list[float]):
        """Partial coordinates from distances to vertices 0..len(dists)-1.

        Solves the triangular system against the already-placed vertices
        1..k-1 and returns the squared height left over for the next axis.
        """
        x = np.zeros(d)
        k = len(dists) - 1
        for j in range(1, k + 1):
            pj = coords[j]
            g = (dists[0] ** 2 + float(pj @ pj) - dists[j] ** 2) / 2.0
            x[j - 1] = (g - float(pj[: j - 1] @ x[: j - 1])) / pj[j - 1]
        hsq = dists[0] ** 2 - float(x[:k] @ x[:k])
        return x, hsq

    def lookup(x, hsq, extra, lo_floor, used, pos):
        """Mirror pair of window lookups for the final slot of a vertex."""
        if hsq < -win2:
            return
        hh = math.sqrt(max(hsq, 0.0))
        for sgn in (1.0, -1.0):
            x[d - 1] = sgn * hh
            tgt = extra + float(np.linalg.norm(x - coords[d]))
            lo = max(int(np.searchsorted(av, tgt - win, side="left")), lo_floor)
            hi = int(np.searchsorted(av, tgt + win, side="right"))
            for h in range(lo, hi):
                if h not in used:
                    yield tuple(pos + [h])
            if hh == 0.0:
                break

    if mode == "loop":

        def vertex(mv, prev_ping, used, pos):
            for p in range(prev_ping + 1, m):  # ping positions ascend
                if p in used:
                    continue
                yield from tris(mv, p, av[p] / 2.0, [av[p] / 2.0], 1, used | {p}, pos + [p])

        def tris(mv, ping_pos, u0, dists, j, used, pos):
            stop = mv if mv <= d else d
            if j < stop:
                for t in range(m):
                    if t in used:
                        continue
                    ujm = av[t] - hub[j] - u0
                    if ujm <= 0.0:
                        continue
                    yield from tris(
                        mv, ping_pos, u0, dists + [ujm], j + 1, used | {t}, pos + [t]
                    )
                return
            x, hsq = place(dists)
            if mv <= d:
                if hsq <= view.flat2:
                    return
                x[mv - 1] = math.sqrt(hsq)
                coords[mv] = x
                hub[mv] = u0
                yield from vertex(mv + 1, ping_pos, used, pos)
            else:
                yield from lookup(x, hsq, hub[d] + u0, 0, used, pos)

        yield from vertex(1, -1, frozenset(), [])
        return

    # path mode: i1 = slot (0,1) carries the tuple minimum, i2 = slot (0,2)
    # the minimum over edges leaving {0,1}; cross slots stay above i2 and
    # the hub-0 slots of vertices 3.. ascend.
    for i1 in range(m):
        if av[i1] * av[i1] <= view.flat2:
            continue
        coords[1] = 0.0
        coords[1][0] = av[i1]

        def vertex(mv, prev_a, used, pos):
            for a in range(prev_a + 1, m):  # slot (0, mv), ascending over mv
                if a in used:
                    continue
                yield from edges(mv, a, [av[a]], 1, used | {a}, pos + [a])

        def edges(mv, a_pos, dists, j, used, pos):
            stop = mv if mv <= d else d
            if j < stop:
                floor = i2 if j == 1 else i1  # cross slots sit above i2
                for t in range(floor + 1, m):
                    if t in used:
                        continue
                    yield from edges(mv, a_pos, dists + [av[t]], j + 1, used | {t}, pos + [t])
                return
            x, hsq = place(dists)
            if mv <= d:
                if hsq <= view.flat2:
                    return
                x[mv - 1] = math.sqrt(hsq)
                coords[mv] = x
                yield from vertex(mv + 1, a_pos, used, pos)
            else:
                yield from lookup(x, hsq, 0.0, i1 + 1, used, pos)

        for i2 in range(i1 + 1, m):
            yield from edges(2, i2, [av[i2]], 1, frozenset({i1, i2}), [i1, i2])


# --- base discovery -----------------------------------------------------------


def find_candidate_bases(
    data: DataSet,
    d: int | None = None,
    tol: float = 1e-9,
    *,
    mode: str | None = None,
    b: int | None = None,
    strategy: str = "reduced",
) -> list[CandidateBase]:
    """All canonical D-tuples of the data recognized as K_{d+2} geometries.

    Tuples are tested under the base canonical matrix (loop mode) or as
    direct edge lengths (path mode): membership, full rational rank at the
    multiplicity bound, and non-coincidence of the embedded points.  The
    returned list is sorted by value-index tuple, which is the enumeration
    order every caller relies on for tie-breaking.
    """
    d = data.dim if d is None else int(d)
    if d < 2:
        raise ValueError(f"reconstruction requires dimension d >= 2, got d={d}")
    mode = data.mode if mode is None else mode
    if mode not in ("path", "loop"):
        raise ValueError(f"mode must be 'path' or 'loop', got {mode!r}")
    b = data.bound if b is None else int(b)
    if data.size < edge_count(d + 2):
        return []
    view = _make_view(data.values, (), tol)
    if mode == "loop":
        enum = {2: _bases_loop_d2, 3: _bases_loop_d3}.get(d)
    else:
        enum = {2: _bases_path_d2, 3: _bases_path_d3}.get(d)
    gen = enum(view, tol) if enum is not None else _bases_scalar(view, d, mode, tol)
    matrix = canonical_matrix("base", d) if mode == "loop" else None
    seen: set[tuple[int, ...]] = set()
    out: list[CandidateBase] = []
    for pos in gen:
        _finish_base(view, pos, matrix, d, b, tol, strategy, seen, out)
    out.sort(key=lambda cb: cb.value_indices)
    return out


# --- step enumerators ---------------------------------------------------------


def _anchor_frame(A0, A1, A2, flat2):
    """Orthonormal in-plane frame spanned by three anchors, or None."""
    u = A1 - A0
    L1 = float(np.linalg.norm(u))
    if L1 * L1 <= flat2:
        return None
    e1 = u / L1
    r = A2 - A0
    p = float(r @ e1)
    w = r - p * e1
    q = float(np.linalg.norm(w))
    if q * q <= flat2:
        return None
    return L1, e1, p, q, w / q


def _steps_d2(view: _View, pts: np.ndarray, mode: str, tol: float):
    av, win, win2 = view.av, view.win, view.win2
    m, npts = view.size, pts.shape[0]
    if m < 3:
        return
    loop = mode == "loop"
    others = range(npts)
    anchor_sets = (
        (
            (a0,) + rest
            for a0 in others
            for rest in itertools.combinations([x for x in others if x != a0], 2)
        )
        if loop
        else itertools.combinations(others, 3)
    )
    for anchors in anchor_sets:
        A0, A1, A2 = (pts[a] for a in anchors)
        frame = _anchor_frame(A0, A1, A2, view.flat2)
        if frame is None:
            continue
        L1, e1, s1, s2, _ = frame
        L2 = float(np.linalg.norm(A2 - A0))
        for q0 in range(m):
            rho0 = av[q0] / 2.0 if loop else av[q0]
            rho1 = av - (L1 + rho0) if loop else av
            alpha = (L1 * L1 + rho0 * rho0 - rho1 * rho1) / (2.0 * L1)
            bsq = rho0 * rho0 - alpha * alpha
            valid = bsq > -win2
            if loop:
                valid &= rho1 > 0.0
            beta = np.sqrt(np.maximum(bsq, 0.0))
            da2 = (alpha - s1) ** 2
            for sgn in (1.0, -1.0):
                dist = np.sqrt(da2 + (sgn * beta - s2) ** 2)
                tgt = L2 + rho0 + dist if loop else dist
                lo_h = np.searchsorted(av, tgt - win, side="left")
                hi_h = np.searchsorted(av, tgt + win, side="right")
                for (q1,) in zip(*np.nonzero(valid & (lo_h < hi_h))):
                    for h in range(lo_h[q1], hi_h[q1]):
                        slots = (q0, int(q1), int(h))
                        if len(set(slots)) == 3:
                            yield anchors, slots


def _steps_d3(view: _View, pts: np.ndarray, mode: str, tol: float):
    av, win, win2 = view.av, view.win, view.win2
    m, npts = view.size, pts.shape[0]
    if m < 4:
        return
    loop = mode == "loop"
    others = range(npts)
    anchor_sets = (
        (
            (a0,) + rest
            for a0 in others
            for rest in itertools.combinations([x for x in others if x != a0], 3)
        )
        if loop
        else itertools.combinations(others, 4)
    )
    for anchors in anchor_sets:
        A = pts[list(anchors)]
        frame = _anchor_frame(A[0], A[1], A[2], view.flat2)
        if frame is None:
            continue
        L1, e1, p2, q2, e2 = frame
        e3 = np.cross(e1, e2)
        r3 = A[3] - A[0]
        s1, s2, s3 = float(r3 @ e1), float(r3 @ e2), float(r3 @ e3)
        L2 = float(np.linalg.norm(A[2] - A[0]))
        L3 = float(np.linalg.norm(r3))
        for q0 in range(m):
            rho0 = av[q0] / 2.0 if loop else av[q0]
            rho1 = av - (L1 + rho0) if loop else av
            rho2 = av - (L2 + rho0) if loop else av
            alpha = (L1 * L1 + rho0 * rho0 - rho1 * rho1) / (2.0 * L1)
            ok1 = rho1 > 0.0 if loop else np.ones(m, dtype=bool)
            ok2 = rho2 > 0.0 if loop else np.ones(m, dtype=bool)
            beta = (
                rho0 * rho0
                - (rho2 * rho2)[None, :]
                + p2 * p2
                + q2 * q2
                - 2.0 * alpha[:, None] * p2
            ) / (2.0 * q2)
            gsq = rho0 * rho0 - alpha[:, None] ** 2 - beta * beta
            valid = ok1[:, None] & ok2[None, :] & (gsq > -win2)
            gamma = np.sqrt(np.maximum(gsq, 0.0))
            da2 = (alpha[:, None] - s1) ** 2 + (beta - s2) ** 2
            for sgn in (1.0, -1.0):
                dist = np.sqrt(da2 + (sgn * gamma - s3) ** 2)
                tgt = L3 + rho0 + dist if loop else dist
                lo_h = np.searchsorted(av, tgt - win, side="left")
                hi_h = np.searchsorted(av, tgt + win, side="right")
                for q1, q2p in zip(*np.nonzero(valid & (lo_h < hi_h))):
                    for h in range(lo_h[q1, q2p], hi_h[q1, q2p]):
                        slots = (q0, int(q1), int(q2p), int(h))
                        if len(set(slots)) == 4:
                            yield anchors, slots


def _steps_scalar(view: _View, pts: np.ndarray, d: int, mode: str, tol: float):
    """Reference step search for any d: scalar recursion over value slots."""
    av, win, win2 = view.av, view.win, view.win2
    m, npts = view.size, pts.shape[0]
    if m < d + 1:
        return
    loop = mode == "loop"
    others = range(npts)
    anchor_sets = (
        (
            (a0,) + rest
            for a0 in others
            for rest in itertools.combinations([x for x in others if x != a0], d)
        )
        if loop
        else itertools.combinations(others, d + 1)
    )
    for anchors in anchor_sets:
        A = pts[list(anchors)]
        rel = A[1:] - A[0]
        # orthonormalize the first d-1 differences; they define the solve
        basis = []
        for j in range(d - 1):
            v = rel[j].astype(float).copy()
            for e in basis:
                v -= float(v @ e) * e
            nv = float(np.linalg.norm(v))
            if nv * nv <= view.flat2:
                basis = None
                break
            basis.append(v / nv)
        if basis is None:
            continue
        E = np.array(basis)  # (d-1, d)
        nu = rel[d - 1] - E.T @ (E @ rel[d - 1])
        nnu = float(np.linalg.norm(nu))
        # coordinates of solve anchors and the lookup anchor in the E-frame
        C = rel[: d - 1] @ E.T  # lower-triangular (d-1, d-1)
        t_par = rel[d - 1] @ E.T
        t_perp = math.copysign(nnu, 1.0)
        L0 = np.linalg.norm(rel, axis=1)

        def rec(j, dists, used, slots):
            if j == d:
                c = np.zeros(d - 1)
                rho0 = dists[0]
                for k in range(1, d):
                    g = (rho0 * rho0 + float(L0[k - 1] ** 2) - dists[k] ** 2) / 2.0
                    c[k - 1] = (g - float(C[k - 1, : k - 1] @ c[: k - 1])) / C[
                        k - 1, k - 1
                    ]
                gsq = rho0 * rho0 - float(c @ c)
                if gsq < -win2:
                    return
                gm = math.sqrt(max(gsq, 0.0))
                base2 = float(((c - t_par) @ (c - t_par)))
                for sgn in (1.0, -1.0):
                    dist = math.sqrt(base2 + (sgn * gm - t_perp) ** 2)
                    tgt = (
                        float(L0[d - 1]) + rho0 + dist if loop else dist
                    )
                    lo = int(np.searchsorted(av, tgt - win, side="left"))
                    hi = int(np.searchsorted(av, tgt + win, side="right"))
                    for h in range(lo, hi):
                        if h not in used:
                            yield anchors, tuple(slots + [h])
                    if gm == 0.0:
                        break
                return
            for q in range(m):
                if q in used:
                    continue
                if j == 0:
                    rho = av[q] / 2.0 if loop else av[q]
                else:
                    rho = av[q] - float(L0[j - 1]) - dists[0] if loop else av[q]
                    if loop and rho <= 0.0:
                        continue
                yield from rec(j + 1, dists + [rho], used | {q}, slots + [q])

        yield from rec(0, [], frozenset(), [])


# --- trilateration growth -----------------------------------------------------


def _finish_step(
    partial: PartialReconstruction,
    view: _View,
    anchors: tuple[int, ...],
    slots: tuple[int, ...],
    d: int,
    mode: str,
    b: int,
    tol: float,
    strategy: str,
) -> PartialReconstruction | None:
    pts = partial.points.points
    idx = EdgeIndexing(d + 1)
    anchor_vals = [
        float(np.linalg.norm(pts[anchors[i]] - pts[anchors[j]])) for i, j in idx.pairs()
    ]
    w = np.array(anchor_vals + [float(view.av[q]) for q in slots])
    matrix = canonical_matrix("trilat", d) if mode == "loop" else None
    verdict = membership_L(w, matrix, d, tol)
    if not verdict.member:
        return None
    if not _rank_certified(w, matrix, d, b, tol, strategy):
        return None
    u = verdict.recovered_lengths
    try:
        local = embed_simplex(u * u, d, tol)
        new_pt = align_onto(
            local.points[: d + 1], pts[list(anchors)], local.points[d + 1], tol
        )
    except (Degenerate, NotRealizable, AnchorsDegenerate, ValueError):
        return None
    all_pts = np.vstack([pts, new_pt])
    gaps = np.linalg.norm(pts - new_pt, axis=1)
    diam = max(float(measure_all_lengths(partial.points).max()), float(gaps.max()))
    if float(gaps.min()) <= tol * diam:
        return None
    consumed = dict(partial.consumed)
    value_indices = tuple(int(view.orig[q]) for q in slots)
    for i in value_indices:
        consumed[i] = 1
    step = TrilaterationStep(tuple(anchors), new_pt, value_indices)
    return PartialReconstruction(
        Configuration(d, all_pts), consumed, partial.history + (step,)
    )


def trilaterate_step(
    partial: PartialReconstruction,
    data: DataSet,
    d: int | None = None,
    mode: str | None = None,
    b: int | None = None,
    tol: float = 1e-9,
    *,
    strategy: str = "reduced",
) -> PartialReconstruction | None:
    """First valid one-point extension of the partial, or None.

    Anchor subsets and value slots are searched in a fixed order (anchors
    ascending, hub first in loop mode; values ascending); for each
    candidate the full D-tuple of synthesized anchor lengths plus data
    values must pass membership and rank certification before the new
    point is aligned in and checked against the coincidence threshold.
    """
    d = partial.points.dim if d is None else int(d)
    if d < 2:
        raise ValueError(f"reconstruction requires dimension d >= 2, got d={d}")
    mode = data.mode if mode is None else mode
    b = data.bound if b is None else int(b)
    view = _make_view(data.values, set(partial.consumed), tol)
    if view.size < d + 1 or partial.points.n < d + 1:
        return None
    pts = partial.points.points
    if d == 2:
        gen = _steps_d2(view, pts, mode, tol)
    elif d == 3:
        gen = _steps_d3(view, pts, mode, tol)
    else:
        gen = _steps_scalar(view, pts, d, mode, tol)
    for anchors, slots in gen:
        ext = _finish_step(partial, view, anchors, slots, d, mode, b, tol, strategy)
        if ext is not None:
            return ext
    return None


def _walks_for_step(anchors: tuple[int, ...], new_vertex: int, d: int, mode: str):
    if mode == "loop":
        paths = [Path.ping(anchors[0], new_vertex)]
        paths.extend(Path.triangle(anchors[0], anchors[j], new_vertex) for j in range(1, d + 1))
        return paths
    return [Path((anchors[j], new_vertex)) for j in range(d + 1)]


def _base_walks(d: int, mode: str) -> list[Path]:
    if mode == "loop":
        return list(canonical_matrix("base", d).row_paths)
    return [Path(pair) for pair in EdgeIndexing(d + 2).pairs()]


def grow(
    base: CandidateBase,
    data: DataSet,
    d: int | None = None,
    mode: str | None = None,
    b: int | None = None,
    tol: float = 1e-9,
    *,
    strategy: str = "reduced",
) -> ReconstructionResult:
    """Extend a base until no trilateration step succeeds.

    The result carries the recovered labeling (one walk per consumed
    value); its certificate is checked before returning — every labeled
    walk must reproduce its data value within the lookup slack, otherwise
    the engine's bookkeeping is broken and a RuntimeError is raised.
    """
    d = base.embedded.dim if d is None else int(d)
    mode = data.mode if mode is None else mode
    b = data.bound if b is None else int(b)
    partial = PartialReconstruction(
        base.embedded, {i: 1 for i in base.value_indices}, ()
    )
    while True:
        ext = trilaterate_step(partial, data, d, mode, b, tol, strategy=strategy)
        if ext is None:
            break
        partial = ext
    labeling: dict[int, Path] = dict(zip(base.value_indices, _base_walks(d, mode)))
    for k, step in enumerate(partial.history):
        walks = _walks_for_step(step.anchors, d + 2 + k, d, mode)
        labeling.update(zip(step.value_indices, walks))
    cfg = partial.points
    slack = _WINDOW * tol * float(data.values.max())
    for i, walk in labeling.items():
        got = apply_functional(functional_from_path(walk, cfg.n), cfg)
        if abs(got - float(data.values[i])) > slack:
            raise RuntimeError(
                f"certificate violation: value {i} off by {abs(got - data.values[i]):.3e}"
            )
    return ReconstructionResult(
        cfg, len(partial.consumed), float(measure_all_lengths(cfg).sum()), labeling
    )


def _walk_sums(points: np.ndarray, mode: str, max_hops: int, bound: float) -> np.ndarray:
    """Sorted values of every walk functional of the points, up to a budget.

    Path mode enumerates open walks of 1..max_hops hops (any endpoints),
    loop mode closed walks of 2..max_hops hops.  Edge lengths are positive,
    so partial sums already above ``bound`` are pruned — they can never
    come back down — which keeps the frontier small when the budget is
    generous.  Closed walks are enumerated once per cyclic class by
    anchoring each at its minimal vertex; walks ending at the anchor are
    collected but stay on the frontier, since a walk may pass through its
    anchor and close later.
    """
    n = len(points)
    diff = points[:, None, :] - points[None, :, :]
    dmat = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    out: list[np.ndarray] = []
    if mode == "path":
        frontier = [np.delete(dmat[:, j], j) for j in range(n)]
        out.extend(frontier)
        for _ in range(max_hops - 1):
            new = []
            for j in range(n):
                v = np.concatenate([frontier[k] + dmat[k, j] for k in range(n) if k != j])
                new.append(v[v <= bound])
            frontier = new
            out.extend(new)
            if not any(v.size for v in frontier):
                break
    else:
        for s in range(n - 1):
            frontier = {j: dmat[s, j : j + 1] for j in range(s + 1, n)}
            for _ in range(max_hops - 1):
                new = {}
                for j in range(s, n):
                    parts = [v + dmat[k, j] for k, v in frontier.items() if k != j]
                    if not parts:
                        continue
                    v = np.concatenate(parts)
                    v = v[v <= bound]
                    if v.size:
                        new[j] = v
                if s in new:
                    out.append(new[s])
                frontier = new
                if not frontier:
                    break
    if not out:
        return np.empty(0)
    return np.sort(np.concatenate(out))


def _coverage_count(res: ReconstructionResult, data: DataSet, mode: str,
                    max_hops: int, slack: float) -> int:
    """How many data values the result explains as walks of its points.

    Values consumed during growth count unconditionally (their walks are
    certified already); the rest are matched against the full walk-sum
    table within the lookup slack.
    """
    vals = data.values
    sums = _walk_sums(res.configuration.points, mode, max_hops, float(vals.max()) + slack)
    if sums.size:
        hit = np.searchsorted(sums, vals + slack, side="right") > np.searchsorted(
            sums, vals - slack
        )
    else:
        hit = np.zeros(data.size, dtype=bool)
    hit[list(res.labeling)] = True
    return int(hit.sum())


# Walk tables grow like n^max_hops; beyond this many entries the coverage
# ranking falls back to consumed-value counts.
_COVERAGE_CAP = 5e7


def reconstruct(
    data: DataSet,
    d: int | None = None,
    mode: str | None = None,
    b: int | None = None,
    strategy: str = "reduced",
    tol: float = 1e-9,
    max_hops: int = 6,
) -> ReconstructionResult:
    """Best reconstruction over all candidate bases.

    Every base is grown.  Grown results that agree in consumed-value count
    and total edge length (relative margin 1e-9) describe the same
    configuration up to congruence and form one class; when several
    classes compete, each class representative is scored by how many data
    values its configuration explains as walk functionals of at most
    ``max_hops`` hops, and the highest coverage wins.  Ties fall to the
    smallest total edge length — an s-scaled reading of the data, or one
    carrying an accidental phantom point, covers no more values but is
    strictly longer — then to base enumeration order.  Raises NoBaseFound
    when nothing passes base recognition.
    """
    d = data.dim if d is None else int(d)
    if d < 2:
        raise ValueError(f"reconstruction requires dimension d >= 2, got d={d}")
    if max_hops < 1:
        raise ValueError(f"max_hops must be positive, got {max_hops}")
    mode = data.mode if mode is None else mode
    b = data.bound if b is None else int(b)
    bases = find_candidate_bases(data, d, tol, mode=mode, b=b, strategy=strategy)
    if not bases:
        raise NoBaseFound(
            f"no {edge_count(d + 2)}-tuple of the {data.size} values "
            f"describes {d + 2} points in dimension {d}"
        )
    classes: list[ReconstructionResult] = []
    for base in bases:
        res = grow(base, data, d, mode, b, tol, strategy=strategy)
        for rep in classes:
            margin = 1e-9 * max(res.relative_scale_rank, rep.relative_scale_rank)
            if (
                res.explained_count == rep.explained_count
                and abs(res.relative_scale_rank - rep.relative_scale_rank) <= margin
            ):
                break
        else:
            classes.append(res)
    if len(classes) == 1:
        return classes[0]
    n_max = max(rep.configuration.n for rep in classes)
    if n_max * (n_max - 1) ** (max_hops - 1) > _COVERAGE_CAP:
        return max(
            classes,
            key=lambda r: (r.explained_count, -r.relative_scale_rank),
        )
    slack = _WINDOW * tol * float(data.values.max())
    scored = [
        (_coverage_count(rep, data, mode, max_hops, slack), -rep.relative_scale_rank, rep)
        for rep in classes
    ]
    best = max(scored, key=lambda t: (t[0], t[1]))
    return best[2]


# --- verification --------------------------------------------------------------


def _distance_matrix(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def _match_exhaustive(LT, LR, eps, b):
    nt, mr = LT.shape[0], LR.shape[0]
    sigma: list[int] = []
    used = [False] * nt

    def bt(i: int, s: int | None):
        if i == mr:
            return s
        for c in range(nt):
            if used[c]:
                continue
            s_here = s
            ok = True
            for j in range(i):
                lt = LT[c, sigma[j]]
                if s_here is None:
                    if lt <= eps:
                        ok = False
                        break
                    ratio = LR[i, j] / lt
                    cand = int(round(ratio))
                    if cand < 1 or (b is not None and cand > b):
                        ok = False
                        break
                    s_here = cand
                if abs(LR[i, j] - s_here * lt) > eps:
                    ok = False
                    break
            if not ok:
                continue
            used[c] = True
            sigma.append(c)
            got = bt(i + 1, s_here)
            if got is not None:
                return got
            sigma.pop()
            used[c] = False
        return None

    s = bt(0, None)
    if s is None:
        return None
    return tuple(sigma), s


def _match_greedy(LT, LR, eps, b):
    """Profile-guided matching for large configurations; approximate."""
    nt, mr = LT.shape[0], LR.shape[0]
    prof_t = np.sort(LT, axis=1)
    prof_r = np.sort(LR, axis=1)
    pos_r = prof_r[:, 1:]  # drop the self-distance zero
    pos_t = prof_t[:, 1:]
    med = float(np.median(pos_r)) / max(float(np.median(pos_t)), 1e-300)
    cands = {max(1, int(round(med)) + k) for k in (-1, 0, 1)}
    for s in sorted(cands):
        if b is not None and s > b:
            continue
        sigma = []
        used = set()
        for i in range(mr):
            best_c, best_gap = None, math.inf
            for c in range(nt):
                if c in used:
                    continue
                a, bb = pos_r[i], s * pos_t[c]
                # greedy two-pointer gap between profiles of unequal length
                gap, k = 0.0, 0
                for x in a:
                    while k + 1 < bb.size and abs(bb[k + 1] - x) <= abs(bb[k] - x):
                        k += 1
                    gap = max(gap, abs(bb[k] - x))
                if gap < best_gap:
                    best_c, best_gap = c, gap
            sigma.append(best_c)
            used.add(best_c)
        resid = max(
            abs(LR[i, j] - s * LT[sigma[i], sigma[j]])
            for i in range(mr)
            for j in range(i)
        )
        if resid <= eps:
            return tuple(sigma), s
    return None


def verify(
    truth: Configuration,
    result,
    tol: float = 1e-9,
    b: int | None = None,
) -> VerificationVerdict:
    """Does the result match a subset of the truth at some integer scale?

    Searches injective vertex matchings (exhaustively for truths of at
    most 9 points, by distance profiles beyond that) and the integer scale
    implied by each tentative pairing; ``b``, when given, caps the scale.
    The reported residual is relative to the result's largest distance.
    """
    cfg: Configuration = getattr(result, "configuration", result)
    no = VerificationVerdict(False, None, None, math.inf)
    if truth.dim != cfg.dim or cfg.n < 2 or cfg.n > truth.n:
        return no
    LT = _distance_matrix(truth.points)
    LR = _distance_matrix(cfg.points)
    eps = _WINDOW * tol * float(LR.max())
    match = (
        _match_exhaustive(LT, LR, eps, b)
        if truth.n <= 9
        else _match_greedy(LT, LR, eps, b)
    )
    if match is None:
        return no
    sigma, s = match
    sub = LT[np.ix_(sigma, sigma)]
    resid = float(np.abs(LR - s * sub).max()) / max(float(LR.max()), 1e-300)
    return VerificationVerdict(True, sigma, int(s), resid)
