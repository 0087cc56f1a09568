"""Length functionals, measurement ensembles, and canonical matrices.

A measurement walks a path through the configuration and reports the sum of
the lengths of the edges it traverses.  Only the edge-traversal counts
matter, so a measurement is represented by a *length functional*: a vector
of nonnegative integer multiplicities over the flat edge order, applied to
the length vector by a dot product.

Two canonical square matrices organize the loop-mode measurements of small
complete graphs.  The ``base`` matrix stacks, per vertex m = 1..d+1, the
ping through m and the triangles through (j, m) for j < m; the ``trilat``
matrix replaces the rows supported on the first d+1 vertices by the
identity (those lengths are synthesized from already-located points during
reconstruction) and keeps the ping/triangle rows of the final vertex.
Both are integer and invertible, which is what lets a loop data tuple be
converted back into candidate edge lengths.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .geometry import Configuration, EdgeIndexing, edge_count, measure_all_lengths

__all__ = [
    "CanonicalMatrix",
    "DataSet",
    "LengthFunctional",
    "MeasurementEnsemble",
    "Path",
    "apply_functional",
    "build_trilateration_ensemble",
    "canonical_matrix",
    "functional_from_path",
    "measure",
]


@dataclass(frozen=True)
class Path:
    """A walk i_0, i_1, ..., i_z with z >= 1 edges and no immediate repeats.

    Vertices are 0-based.  A path whose first and last vertices agree is a
    loop; pings [i, j, i] and triangles [i, j, k, i] are the loops used by
    the canonical matrices.
    """

    vertices: tuple[int, ...]

    def __post_init__(self):
        v = tuple(int(x) for x in self.vertices)
        if len(v) < 2:
            raise ValueError("a path needs at least two vertices")
        if any(x < 0 for x in v):
            raise ValueError("vertex ids must be nonnegative")
        if any(a == b for a, b in zip(v, v[1:])):
            raise ValueError("consecutive path vertices must differ")
        object.__setattr__(self, "vertices", v)

    @property
    def is_loop(self) -> bool:
        return self.vertices[0] == self.vertices[-1]

    @property
    def num_edges(self) -> int:
        return len(self.vertices) - 1

    @staticmethod
    def ping(i: int, j: int) -> "Path":
        return Path((i, j, i))

    @staticmethod
    def triangle(i: int, j: int, k: int) -> "Path":
        return Path((i, j, k, i))

    def repeated(self, s: int) -> "Path":
        """The path that traverses every edge of this one ``s`` times.

        Loops are concatenated s times; open paths zigzag back and forth,
        which multiplies every traversal count by s as well.
        """
        if s < 1:
            raise ValueError("repeat count must be >= 1")
        if s == 1:
            return self
        v = self.vertices
        if self.is_loop:
            out = list(v)
            for _ in range(s - 1):
                out.extend(v[1:])
            return Path(tuple(out))
        out = list(v)
        forward = False
        for _ in range(s - 1):
            step = v[1:] if forward else v[-2::-1]
            out.extend(step)
            forward = not forward
        return Path(tuple(out))


@dataclass(frozen=True)
class LengthFunctional:
    """Nonnegative integer edge multiplicities over C(n,2) flat edge slots."""

    n: int
    multiplicities: tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(x) for x in self.multiplicities)
        if len(m) != edge_count(self.n):
            raise ValueError(
                f"expected {edge_count(self.n)} multiplicities for n={self.n}, "
                f"got {len(m)}"
            )
        if any(x < 0 for x in m):
            raise ValueError("multiplicities must be nonnegative")
        if not any(m):
            raise ValueError("functional must touch at least one edge")
        object.__setattr__(self, "multiplicities", m)

    @property
    def max_multiplicity(self) -> int:
        return max(self.multiplicities)

    def scaled(self, s: int) -> "LengthFunctional":
        if s < 1:
            raise ValueError("scale must be a positive integer")
        return LengthFunctional(self.n, tuple(s * x for x in self.multiplicities))


def functional_from_path(path: Path, n: int) -> LengthFunctional:
    """Edge-traversal counts of ``path`` on n vertices."""
    if max(path.vertices) >= n:
        raise ValueError(f"path visits vertex {max(path.vertices)} but n={n}")
    idx = EdgeIndexing(n)
    mult = [0] * idx.size
    for a, b in zip(path.vertices, path.vertices[1:]):
        mult[idx.index_of(a, b)] += 1
    return LengthFunctional(n, tuple(mult))


def apply_functional(f: LengthFunctional, cfg: Configuration) -> float:
    """Value of the functional on a configuration: sum of traversed lengths."""
    if f.n != cfg.n:
        raise ValueError(f"functional is over n={f.n} vertices, config has {cfg.n}")
    return float(np.dot(f.multiplicities, measure_all_lengths(cfg)))


@dataclass(frozen=True, eq=False)
class CanonicalMatrix:
    """One of the two loop-measurement matrices for d+2 vertices.

    ``entries`` is the integer D x D matrix (D = C(d+2,2)); row k applies
    to the flat edge order of the complete graph on vertices 0..d+1, and
    ``row_paths[k]`` is a walk realizing that row (single edges for the
    identity rows of the trilat kind).
    """

    kind: str
    d: int
    entries: np.ndarray
    row_paths: tuple[Path, ...]

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@functools.lru_cache(maxsize=None)
def canonical_matrix(kind: str, d: int) -> CanonicalMatrix:
    """The 'base' or 'trilat' canonical matrix in dimension d >= 2.

    base:   for each vertex m = 1..d+1 (grouped ascending) the ping
            [0, m, 0], then the triangles [0, j, m, 0] for j = 1..m-1.
    trilat: identity rows on the C(d+1,2) edges among vertices 0..d in
            flat edge order, then the ping and triangles of vertex d+1.
    """
    if kind not in ("base", "trilat"):
        raise ValueError(f"unknown canonical matrix kind {kind!r}")
    if d < 2:
        raise ValueError(f"canonical matrices require d >= 2, got d={d}")
    n = d + 2
    paths: list[Path] = []
    if kind == "base":
        for m in range(1, n):
            paths.append(Path.ping(0, m))
            paths.extend(Path.triangle(0, j, m) for j in range(1, m))
    else:
        idx = EdgeIndexing(d + 1)
        paths.extend(Path((i, j)) for i, j in idx.pairs())
        paths.append(Path.ping(0, d + 1))
        paths.extend(Path.triangle(0, j, d + 1) for j in range(1, d + 1))
    rows = [functional_from_path(p, n).multiplicities for p in paths]
    entries = np.array(rows, dtype=int)
    entries.setflags(write=False)
    return CanonicalMatrix(kind, d, entries, tuple(paths))


@dataclass(frozen=True)
class MeasurementEnsemble:
    """An ordered collection of functionals, optionally with their walks."""

    mode: str
    functionals: tuple[LengthFunctional, ...]
    provenance: tuple[Path, ...] | None = None

    def __post_init__(self):
        if self.mode not in ("path", "loop"):
            raise ValueError(f"mode must be 'path' or 'loop', got {self.mode!r}")
        if not self.functionals:
            raise ValueError("ensemble must contain at least one functional")
        n = self.functionals[0].n
        if any(f.n != n for f in self.functionals):
            raise ValueError("all functionals must share the same vertex count")
        if self.provenance is not None:
            if len(self.provenance) != len(self.functionals):
                raise ValueError("provenance must align with functionals")
            if self.mode == "loop" and not all(p.is_loop for p in self.provenance):
                raise ValueError("loop-mode provenance must consist of loops")

    @property
    def n(self) -> int:
        return self.functionals[0].n

    @property
    def bound(self) -> int:
        return max(f.max_multiplicity for f in self.functionals)

    def scaled(self, s: int) -> "MeasurementEnsemble":
        """Every functional multiplied by the positive integer s."""
        funcs = tuple(f.scaled(s) for f in self.functionals)
        prov = None
        if self.provenance is not None:
            prov = tuple(p.repeated(s) for p in self.provenance)
        return MeasurementEnsemble(self.mode, funcs, prov)


@dataclass(frozen=True)
class DataSet:
    """What the reconstruction engine sees: unlabeled measurement values.

    ``bound`` is the maximum edge multiplicity realized by the generating
    ensemble; the rank certificates depend on it.
    """

    dim: int
    bound: int
    mode: str
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim}")
        if self.bound < 1:
            raise ValueError(f"multiplicity bound must be >= 1, got {self.bound}")
        if self.mode not in ("path", "loop"):
            raise ValueError(f"mode must be 'path' or 'loop', got {self.mode!r}")
        v = np.array(self.values, dtype=float, copy=True).reshape(-1)
        if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
            raise ValueError("measurement values must be finite and positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return self.values.shape[0]


def _random_loop(rng: np.random.Generator, n: int, max_hops: int) -> Path:
    """A uniform-ish random loop through vertex 0 with 3..max_hops edges."""
    hops = int(rng.integers(3, max(max_hops, 3) + 1))
    verts = [0]
    for t in range(1, hops):
        banned = {verts[-1]} | ({0} if t == hops - 1 else set())
        choices = [v for v in range(n) if v not in banned]
        verts.append(int(rng.choice(choices)))
    verts.append(0)
    return Path(tuple(verts))


def _random_walk(rng: np.random.Generator, n: int, max_hops: int) -> Path:
    """A random open walk with 1..max_hops edges, any start vertex."""
    hops = int(rng.integers(1, max(max_hops, 1) + 1))
    verts = [int(rng.integers(0, n))]
    for _ in range(hops):
        choices = [v for v in range(n) if v != verts[-1]]
        verts.append(int(rng.choice(choices)))
    return Path(tuple(verts))


def build_trilateration_ensemble(
    n: int,
    d: int,
    mode: str,
    extra: int = 0,
    max_hops: int = 6,
    rng=None,
) -> MeasurementEnsemble:
    """A trilaterating ensemble over n vertices plus ``extra`` distractors.

    The first D = C(d+2,2) functionals describe the complete graph on
    vertices 0..d+1: its edges in flat order (path mode) or the rows of the
    base canonical matrix (loop mode).  Every later vertex j gets one
    trilateration group over d+1 randomly chosen earlier vertices — its d+1
    edges in path mode, or a ping plus d triangles through vertex 0 in loop
    mode.  Distractor walks (loops through vertex 0 in loop mode) are
    appended last and resampled until distinct from every other functional.

    Total size: C(d+2,2) + (n-d-2)*(d+1) + extra.
    """
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got d={d}")
    if n < d + 2:
        raise ValueError(f"need n >= d+2 = {d + 2} vertices, got n={n}")
    if mode not in ("path", "loop"):
        raise ValueError(f"mode must be 'path' or 'loop', got {mode!r}")
    if extra < 0:
        raise ValueError("extra must be nonnegative")
    if max_hops < 1:
        raise ValueError("max_hops must be >= 1")
    rng = np.random.default_rng(rng)

    paths: list[Path] = []
    if mode == "loop":
        paths.extend(canonical_matrix("base", d).row_paths)
    else:
        paths.extend(Path((i, j)) for i, j in EdgeIndexing(d + 2).pairs())

    for j in range(d + 2, n):
        if mode == "loop":
            others = sorted(int(v) for v in rng.choice(np.arange(1, j), size=d, replace=False))
            paths.append(Path.ping(0, j))
            paths.extend(Path.triangle(0, a, j) for a in others)
        else:
            anchors = sorted(int(v) for v in rng.choice(j, size=d + 1, replace=False))
            paths.extend(Path((a, j)) for a in anchors)

    seen = {functional_from_path(p, n) for p in paths}
    for _ in range(extra):
        for _attempt in range(1000):
            p = _random_loop(rng, n, max_hops) if mode == "loop" else _random_walk(rng, n, max_hops)
            f = functional_from_path(p, n)
            if f not in seen:
                seen.add(f)
                paths.append(p)
                break
        else:  # pragma: no cover - would need a pathologically tiny graph
            raise RuntimeError("could not sample a fresh distractor functional")

    funcs = tuple(functional_from_path(p, n) for p in paths)
    return MeasurementEnsemble(mode, funcs, tuple(paths))


def measure(
    ensemble: MeasurementEnsemble,
    cfg: Configuration,
    shuffle_seed=None,
) -> tuple[DataSet, MeasurementEnsemble]:
    """Evaluate an ensemble on a configuration and shuffle the value order.

    Returns the dataset together with the ensemble reordered by the same
    permutation — the hidden ground-truth labeling (value k of the dataset
    was produced by functional k of the returned ensemble).  Rejects
    configurations with coincident points, whose measurements would not be
    positive.
    """
    if ensemble.n != cfg.n:
        raise ValueError(
            f"ensemble is over n={ensemble.n} vertices, configuration has {cfg.n}"
        )
    lengths = measure_all_lengths(cfg)
    if lengths.size and lengths.min() <= 0.0:
        raise ValueError("configuration has coincident points")
    values = np.array(
        [np.dot(f.multiplicities, lengths) for f in ensemble.functionals]
    )
    perm = np.random.default_rng(shuffle_seed).permutation(values.size)
    data = DataSet(cfg.dim, ensemble.bound, ensemble.mode, values[perm])
    funcs = tuple(ensemble.functionals[i] for i in perm)
    prov = None
    if ensemble.provenance is not None:
        prov = tuple(ensemble.provenance[i] for i in perm)
    return data, MeasurementEnsemble(ensemble.mode, funcs, prov)
