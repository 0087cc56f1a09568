"""File formats and experiment plumbing.

Three tiny JSON schemas, field names fixed:

* dataset — ``{"dim": int, "bound": int, "mode": "path"|"loop",
  "values": [floats]}``
* configuration — ``{"dim": int, "points": [[floats]]}``
* walk list (ground-truth ensembles and recovered labelings) — a JSON
  array of ``{"path": [ints]}`` entries, optionally carrying a
  ``"value_index"`` when the entry explains a specific dataset value.

Floats are written with 17 significant digits so parsing reproduces the
exact double; the writers are hand-rolled because the stdlib encoder
offers no control over float formatting, and byte-identical output for
identical inputs is part of the pipeline's determinism contract.
Reading goes through ``json.loads`` followed by schema checks that raise
:class:`MalformedInput`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .geometry import Configuration, min_pairwise_distance
from .measurement import DataSet, MeasurementEnsemble, Path

__all__ = [
    "ExperimentSpec",
    "InvalidSpec",
    "MalformedInput",
    "dumps_configuration",
    "dumps_dataset",
    "dumps_walks",
    "loads_configuration",
    "loads_dataset",
    "loads_walks",
    "random_configuration",
    "read_configuration",
    "read_dataset",
    "write_text",
]

_STRATEGIES = ("brute", "reduced", "distinct")


class MalformedInput(ValueError):
    """An input file failed to parse or violates its schema."""


class InvalidSpec(ValueError):
    """Experiment parameters outside the supported ranges."""


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything that determines a generated experiment, seeds included.

    No ambient randomness: the truth configuration, the ensemble's random
    choices, and the value shuffle each have an explicit seed, so a spec
    determines its output files byte for byte.
    """

    n: int
    d: int
    mode: str
    extra: int = 0
    max_hops: int = 6
    seed_config: int = 0
    seed_ensemble: int = 0
    seed_shuffle: int = 0
    tol: float = 1e-9
    rank_strategy: str = "reduced"

    def __post_init__(self):
        if self.d < 2:
            raise InvalidSpec(
                f"dimension must be >= 2, got d={self.d} (one-dimensional "
                "reconstruction is ambiguous and unsupported)"
            )
        if self.n < self.d + 2:
            raise InvalidSpec(f"need n >= d+2 = {self.d + 2} points, got n={self.n}")
        if self.mode not in ("path", "loop"):
            raise InvalidSpec(f"mode must be 'path' or 'loop', got {self.mode!r}")
        if self.extra < 0:
            raise InvalidSpec("extra distractor count must be nonnegative")
        if self.max_hops < 1:
            raise InvalidSpec("max_hops must be >= 1")
        if not (isinstance(self.tol, (int, float)) and 0.0 < self.tol < 1.0):
            raise InvalidSpec(f"tolerance must lie in (0, 1), got {self.tol}")
        if self.rank_strategy not in _STRATEGIES:
            raise InvalidSpec(
                f"rank strategy must be one of {_STRATEGIES}, got {self.rank_strategy!r}"
            )


def random_configuration(n: int, d: int, rng) -> Configuration:
    """n points drawn uniformly from the unit box, rejecting near-collisions.

    Plain uniform sampling is generic with overwhelming probability; the
    rejection only guards against freak coincidences that would make
    measurement values non-positive.
    """
    rng = np.random.default_rng(rng)
    while True:
        pts = rng.uniform(0.0, 1.0, size=(n, d))
        if n < 2 or min_pairwise_distance(pts) > 1e-4:
            return Configuration(d, pts)


# --- writers ------------------------------------------------------------------


def _fmt(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    return format(float(x), ".17g")


def dumps_dataset(data: DataSet) -> str:
    vals = ", ".join(_fmt(v) for v in data.values)
    return (
        f'{{"dim": {data.dim}, "bound": {data.bound}, '
        f'"mode": "{data.mode}", "values": [{vals}]}}\n'
    )


def dumps_configuration(cfg: Configuration) -> str:
    rows = ", ".join(
        "[" + ", ".join(_fmt(c) for c in p) + "]" for p in np.asarray(cfg.points)
    )
    return f'{{"dim": {cfg.dim}, "points": [{rows}]}}\n'


def dumps_walks(entries) -> str:
    """Serialize walks; entries are Paths or (value_index, Path) pairs."""
    rows = []
    for e in entries:
        if isinstance(e, Path):
            rows.append('{"path": [%s]}' % ", ".join(str(v) for v in e.vertices))
        else:
            i, p = e
            rows.append(
                '{"value_index": %d, "path": [%s]}'
                % (int(i), ", ".join(str(v) for v in p.vertices))
            )
    return "[" + ", ".join(rows) + "]\n"


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)


# --- readers ------------------------------------------------------------------


def _parse(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"not valid JSON: {exc}") from exc


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise MalformedInput(msg)


def _as_int(obj, key: str) -> int:
    v = obj.get(key)
    _require(isinstance(v, int) and not isinstance(v, bool), f'"{key}" must be an integer')
    return v


def loads_dataset(text: str) -> DataSet:
    obj = _parse(text)
    _require(isinstance(obj, dict), "dataset must be a JSON object")
    _require(
        set(obj) == {"dim", "bound", "mode", "values"},
        'dataset needs exactly the fields "dim", "bound", "mode", "values"',
    )
    mode = obj["mode"]
    _require(mode in ("path", "loop"), '"mode" must be "path" or "loop"')
    values = obj["values"]
    _require(isinstance(values, list), '"values" must be an array')
    _require(
        all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values),
        '"values" must contain numbers only',
    )
    try:
        return DataSet(_as_int(obj, "dim"), _as_int(obj, "bound"), mode, np.array(values, dtype=float))
    except ValueError as exc:
        raise MalformedInput(f"bad dataset: {exc}") from exc


def loads_configuration(text: str) -> Configuration:
    obj = _parse(text)
    _require(isinstance(obj, dict), "configuration must be a JSON object")
    _require(
        set(obj) == {"dim", "points"},
        'configuration needs exactly the fields "dim", "points"',
    )
    d = _as_int(obj, "dim")
    points = obj["points"]
    _require(isinstance(points, list) and points, '"points" must be a nonempty array')
    for p in points:
        _require(
            isinstance(p, list)
            and len(p) == d
            and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in p),
            f'each point must be an array of {d} numbers',
        )
    arr = np.array(points, dtype=float)
    _require(bool(np.all(np.isfinite(arr))), "coordinates must be finite")
    try:
        return Configuration(d, arr)
    except ValueError as exc:
        raise MalformedInput(f"bad configuration: {exc}") from exc


def loads_walks(text: str) -> list[tuple[int | None, Path]]:
    obj = _parse(text)
    _require(isinstance(obj, list), "walk file must be a JSON array")
    out: list[tuple[int | None, Path]] = []
    for e in obj:
        _require(isinstance(e, dict) and "path" in e, 'each entry needs a "path" field')
        verts = e["path"]
        _require(
            isinstance(verts, list)
            and all(isinstance(v, int) and not isinstance(v, bool) for v in verts),
            '"path" must be an array of integers',
        )
        idx = e.get("value_index")
        if idx is not None:
            _require(isinstance(idx, int) and not isinstance(idx, bool), '"value_index" must be an integer')
        try:
            out.append((idx, Path(tuple(verts))))
        except ValueError as exc:
            raise MalformedInput(f"bad walk {verts}: {exc}") from exc
    return out


def read_dataset(path) -> DataSet:
    return loads_dataset(_read_text(path))


def read_configuration(path) -> Configuration:
    return loads_configuration(_read_text(path))


def _read_text(path) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc}") from exc
