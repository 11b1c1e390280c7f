"""Finite metric spaces, Hausdorff distance and the example generators.

Distances are float64.  Generators build coordinates from exact integer
formulas and only convert at the end, so that geometric ties (a point
equidistant from two approximation points, a square diagonal sitting exactly
on a ``2 * eps`` threshold) survive as ties up to ``TOL_TIE``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError, StructuralError, ValidationError

TOL_METRIC = 1e-9
TOL_TIE = 1e-9

_MAX_REPORTED = 50


def below(value: float, threshold: float, tol: float = TOL_TIE, strict: bool = True) -> bool:
    """Compare against a threshold with tie handling.

    Values within ``tol`` of the threshold count as ties.  A tie satisfies the
    non-strict comparison and fails the strict one.
    """
    if strict:
        return value < threshold - tol
    return value <= threshold + tol


def is_tie(value: float, threshold: float, tol: float = TOL_TIE) -> bool:
    return abs(value - threshold) <= tol


@dataclass
class ValidationReport:
    ok: bool
    ultrametric: bool
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def validate_metric(matrix, tol_metric: float = TOL_METRIC) -> ValidationReport:
    """Check the metric axioms on a square matrix.

    Violations are reported as ``(kind, indices, excess)`` tuples, capped at a
    few dozen entries.  ``ultrametric`` is set when the strong triangle
    inequality also holds.
    """
    D = np.asarray(matrix, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise StructuralError(f"distance matrix must be square, got shape {D.shape}")
    n = D.shape[0]
    violations = []

    def report(kind, idx, excess):
        if len(violations) < _MAX_REPORTED:
            violations.append((kind, tuple(int(i) for i in idx), float(excess)))

    if not np.all(np.isfinite(D)):
        for i, j in zip(*np.nonzero(~np.isfinite(D))):
            report("non-finite", (i, j), math.inf)
        return ValidationReport(False, False, violations)

    for i in np.nonzero(np.abs(np.diag(D)) > tol_metric)[0]:
        report("diagonal", (i, i), abs(D[i, i]))
    asym = np.abs(D - D.T)
    for i, j in zip(*np.nonzero(np.triu(asym > tol_metric))):
        report("symmetry", (i, j), asym[i, j])
    off = ~np.eye(n, dtype=bool)
    for i, j in zip(*np.nonzero(np.triu(off & (D <= tol_metric)))):
        report("positivity", (i, j), -D[i, j])

    ultra = True
    for z in range(n):
        # d(i, j) <= d(i, z) + d(z, j) for every pair, one pivot z at a time
        via = D[:, z][:, None] + D[z, :][None, :]
        excess = D - via
        if np.any(excess > tol_metric):
            for i, j in zip(*np.nonzero(excess > tol_metric)):
                report("triangle", (i, z, j), excess[i, j])
        if ultra:
            strong = np.maximum(D[:, z][:, None], D[z, :][None, :])
            if np.any(D - strong > tol_metric):
                ultra = False
    ok = not violations
    return ValidationReport(ok, ok and ultra, violations)


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """Labelled finite metric space; ``dist`` is read-only after construction."""

    point_ids: tuple
    dist: np.ndarray
    coords: np.ndarray | None = None
    ultrametric: bool = False
    name: str | None = None

    def __post_init__(self):
        D = np.array(self.dist, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise StructuralError(f"distance matrix must be square, got shape {D.shape}")
        if len(self.point_ids) != D.shape[0]:
            raise StructuralError("point_ids and distance matrix disagree in size")
        if len(set(self.point_ids)) != len(self.point_ids):
            raise StructuralError("point_ids must be unique")
        if D.shape[0] == 0:
            raise StructuralError("a metric space needs at least one point")
        D.setflags(write=False)
        object.__setattr__(self, "point_ids", tuple(self.point_ids))
        object.__setattr__(self, "dist", D)
        if self.coords is not None:
            C = np.array(self.coords, dtype=float)
            C.setflags(write=False)
            object.__setattr__(self, "coords", C)

    @classmethod
    def from_distance_matrix(cls, matrix, point_ids=None, tol_metric=TOL_METRIC, name=None):
        report = validate_metric(matrix, tol_metric)
        if not report.ok:
            raise ValidationError(f"not a metric: {report.violations[:5]}")
        D = np.asarray(matrix, dtype=float)
        ids = tuple(range(D.shape[0])) if point_ids is None else tuple(point_ids)
        return cls(ids, D, None, report.ultrametric, name)

    @classmethod
    def from_points(cls, points, point_ids=None, name=None):
        """Euclidean metric on the rows of ``points``."""
        P = np.atleast_2d(np.asarray(points, dtype=float))
        if P.size == 0:
            raise StructuralError("no points given")
        diff = P[:, None, :] - P[None, :, :]
        D = np.sqrt(np.sum(diff * diff, axis=-1))
        ids = tuple(range(len(P))) if point_ids is None else tuple(point_ids)
        space = cls(ids, D, P, False, name)
        off = ~np.eye(len(P), dtype=bool)
        if np.any(D[off] <= 0):
            raise ValidationError("duplicate points in point cloud")
        return space

    def __len__(self):
        return len(self.point_ids)

    @cached_property
    def index(self) -> dict:
        return {pid: i for i, pid in enumerate(self.point_ids)}

    @cached_property
    def diameter(self) -> float:
        return float(self.dist.max())

    @cached_property
    def min_positive_distance(self) -> float:
        n = len(self)
        if n < 2:
            return math.inf
        return float(self.dist[~np.eye(n, dtype=bool)].min())

    def subset(self, members: Iterable[int]) -> "SubsetOfSpace":
        return SubsetOfSpace(self, members)

    def subset_by_ids(self, ids: Iterable) -> "SubsetOfSpace":
        try:
            return SubsetOfSpace(self, [self.index[i] for i in ids])
        except KeyError as exc:
            raise StructuralError(f"unknown point id {exc.args[0]!r}") from None

    def everything(self) -> "SubsetOfSpace":
        return SubsetOfSpace(self, range(len(self)))


@dataclass(frozen=True)
class SubsetOfSpace:
    space: FiniteMetricSpace
    members: tuple

    def __init__(self, space: FiniteMetricSpace, members: Iterable[int]):
        m = tuple(sorted({int(i) for i in members}))
        if not m:
            raise StructuralError("subsets must be non-empty")
        if m[0] < 0 or m[-1] >= len(space):
            raise StructuralError(f"point index out of range for a space of {len(space)} points")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "members", m)

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, i):
        return i in self.members

    @property
    def diameter(self) -> float:
        return diameter(self.space, self.members)

    def ids(self) -> tuple:
        return tuple(self.space.point_ids[i] for i in self.members)


def diameter(space: FiniteMetricSpace, members: Sequence[int]) -> float:
    idx = list(members)
    if len(idx) < 2:
        return 0.0
    return float(space.dist[np.ix_(idx, idx)].max())


def distance_to_set(space: FiniteMetricSpace, x: int, members: Sequence[int]) -> float:
    return float(space.dist[x, list(members)].min())


def hausdorff_distance(C: SubsetOfSpace, D: SubsetOfSpace) -> float:
    if C.space is not D.space:
        raise StructuralError("subsets live in different spaces")
    block = C.space.dist[np.ix_(C.members, D.members)]
    return float(max(block.min(axis=1).max(), block.min(axis=0).max()))


# --------------------------------------------------------------------------
# generators


def _fraction_label(q: Fraction) -> str:
    return str(q)


def triadic_points(level: int) -> list[Fraction]:
    if level < 1:
        raise ValueError("level must be a positive integer")
    if level == 1:
        return [Fraction(0)]
    N = 3 ** (2 * level - 3)
    return [Fraction(k, N) for k in range(N + 1)]


def sample_triadic_interval(level: int, include_half: bool = False) -> FiniteMetricSpace:
    """Grid ``{k / 3**(2n-3)}`` of the unit interval; ``{0}`` for level 1.

    ``include_half`` adds the point 1/2, which is never a grid point.
    """
    pts = triadic_points(level)
    if include_half:
        pts = sorted(set(pts) | {Fraction(1, 2)})
    denom = math.lcm(*(q.denominator for q in pts))
    num = np.array([int(q * denom) for q in pts], dtype=np.int64)
    D = np.abs(num[:, None] - num[None, :]) / denom
    return FiniteMetricSpace(
        tuple(_fraction_label(q) for q in pts), D, np.array([[float(q)] for q in pts]),
        name=f"triadic:{level}",
    )


def _warsaw_segments(side: Fraction):
    """Segments of the computational Warsaw circle that can meet a grid of
    the given side away from x = 0 (the x = 0 edge is one of the outer three)."""
    half, one = Fraction(1, 2), Fraction(1)
    segs = [
        ((Fraction(0), one), (Fraction(0), Fraction(0))),
        ((Fraction(0), Fraction(0)), (one, Fraction(0))),
        ((one, Fraction(0)), (one, one)),
    ]
    k = 1
    while Fraction(1, 2 ** (2 * k - 2)) >= side:
        hi, lo = Fraction(1, 2 ** (2 * k - 2)), Fraction(1, 2 ** (2 * k - 1))
        segs.append(((hi, one), (lo, one)))                       # a_k
        if k >= 2:
            segs.append(((hi, half), (hi, one)))                  # b_k1
        segs.append(((lo, one), (lo, half)))                      # b_k2
        segs.append(((lo, half), (Fraction(1, 2 ** (2 * k)), half)))  # c_k
        k += 1
    return segs


def _grid_points_on_segment(seg, side: Fraction):
    (x0, y0), (x1, y1) = seg
    out = []
    if x0 == x1:
        if (x0 / side).denominator != 1:
            return out
        lo, hi = sorted((y0, y1))
        m = math.ceil(lo / side)
        while m * side <= hi:
            out.append((x0, m * side))
            m += 1
    else:
        if (y0 / side).denominator != 1:
            return out
        lo, hi = sorted((x0, x1))
        m = math.ceil(lo / side)
        while m * side <= hi:
            out.append((m * side, y0))
            m += 1
    return out


def warsaw_points(grid_level: int) -> list[tuple[Fraction, Fraction]]:
    """Exact coordinates of the approximation ``A_n`` of the Warsaw circle:
    grid points of side ``2**-(3n-4)`` on the curve plus the column of
    ``2**(3n-5)`` square centres next to x = 0."""
    if grid_level < 1:
        raise ValueError("grid_level must be a positive integer")
    if grid_level == 1:
        return [(Fraction(0), Fraction(0))]
    side = Fraction(1, 2 ** (3 * grid_level - 4))
    pts = set()
    for seg in _warsaw_segments(side):
        pts.update(_grid_points_on_segment(seg, side))
    c = Fraction(1, 2 ** (3 * grid_level - 3))
    for k in range(1, 2 ** (3 * grid_level - 5) + 1):
        pts.add((c, 1 - (2 * k - 1) * c))
    return sorted(pts)


def sample_warsaw(grid_level: int) -> FiniteMetricSpace:
    if grid_level < 1:
        raise ValueError("grid_level must be >= 1 (1 gives the single point (0,0))")
    pts = warsaw_points(grid_level)
    denom = 2 ** max(3 * grid_level - 3, 0)
    P = np.array([(int(x * denom), int(y * denom)) for x, y in pts], dtype=np.int64)
    diff = P[:, None, :] - P[None, :, :]
    D = np.sqrt(np.sum(diff * diff, axis=-1).astype(float)) / denom
    ids = tuple(f"{x},{y}" for x, y in pts)
    coords = np.array([(float(x), float(y)) for x, y in pts])
    return FiniteMetricSpace(ids, D, coords, name=f"warsaw:{grid_level}")


def sample_ultrametric_cantor(depth: int) -> FiniteMetricSpace:
    """Leaves of a complete binary tree of the given depth,
    ``d(x, y) = 2**-(depth of the deepest common ancestor)``."""
    if depth < 1:
        raise ValueError("depth must be a positive integer")
    leaves = [format(i, f"0{depth}b") for i in range(2 ** depth)]
    n = len(leaves)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            common = (i ^ j).bit_length()
            D[i, j] = D[j, i] = 2.0 ** -(depth - common)
    report = validate_metric(D)
    return FiniteMetricSpace(tuple(leaves), D, None, report.ultrametric, name=f"cantor:{depth}")


GENERATORS = {
    "warsaw": sample_warsaw,
    "triadic": sample_triadic_interval,
    "cantor": sample_ultrametric_cantor,
}


def parse_generator(spec: str) -> tuple[str, int]:
    try:
        name, arg = spec.split(":", 1)
        value = int(arg)
    except ValueError:
        raise InputError(f"generator must look like name:<int>, got {spec!r}") from None
    if name not in GENERATORS:
        raise InputError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}")
    return name, value


def generate_space(spec: str) -> FiniteMetricSpace:
    name, value = parse_generator(spec)
    try:
        return GENERATORS[name](value)
    except ValueError as exc:
        raise InputError(str(exc)) from None


# --------------------------------------------------------------------------
# file input


def _looks_like_distance_matrix(rows: np.ndarray) -> bool:
    return (
        rows.shape[0] == rows.shape[1]
        and rows.shape[0] > 1
        and np.allclose(np.diag(rows), 0.0)
        and np.allclose(rows, rows.T)
    )


def _read_csv_rows(path: Path) -> list[list[float]]:
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh)):
            cells = [c.strip() for c in row if c.strip() != ""]
            if not cells:
                continue
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                if lineno == 0 and not rows:
                    continue  # header
                raise InputError(f"{path}:{lineno + 1}: non-numeric cell") from None
    return rows


def load_space(path, kind: str = "auto") -> FiniteMetricSpace:
    """Read a point cloud or a distance matrix from CSV or JSON.

    ``kind`` is ``"points"``, ``"matrix"`` or ``"auto"``.  In auto mode a JSON
    file decides by its key and a square, symmetric, zero-diagonal CSV is read
    as a distance matrix.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    if not text.strip():
        raise InputError(f"{path} is empty")
    name = path.stem
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: malformed JSON ({exc})") from None
        if not isinstance(data, dict):
            raise InputError(f"{path}: expected an object with 'points' or 'distance_matrix'")
        ids = data.get("point_ids")
        if "distance_matrix" in data and kind != "points":
            arr = _as_float_array(data["distance_matrix"], path)
            return FiniteMetricSpace.from_distance_matrix(arr, ids, name=name)
        if "points" in data:
            arr = _as_float_array(data["points"], path)
            return FiniteMetricSpace.from_points(arr, ids, name=name)
        raise InputError(f"{path}: expected key 'points' or 'distance_matrix'")
    rows = _read_csv_rows(path)
    if not rows:
        raise InputError(f"{path} has no numeric rows")
    if len({len(r) for r in rows}) != 1:
        raise InputError(f"{path}: rows have different lengths")
    arr = np.array(rows)
    as_matrix = kind == "matrix" or (kind == "auto" and _looks_like_distance_matrix(arr))
    if as_matrix:
        return FiniteMetricSpace.from_distance_matrix(arr, name=name)
    return FiniteMetricSpace.from_points(arr, name=name)


def _as_float_array(value, path) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"{path}: entries must be numbers") from None
    if arr.ndim != 2 or arr.size == 0:
        raise InputError(f"{path}: expected a non-empty array of arrays")
    return arr
