"""Persistence modules, rank functions, barcodes and the bottleneck distance.

An inverse module comes from a FAS: ``H_k(K_n) <- H_k(K_{n+1}) <- ... <- H_k(K_m)``
where ``K_l`` is the order complex of ``U_{2 eps_l}(A_l)``.  A forward module
comes from a Vietoris-Rips filtration.  Both are decomposed through their rank
function by inclusion-exclusion.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import InternalConsistencyError, PreconditionError
from .fas import FasSequence, build_fas
from .finite_spaces import (
    SimplicialComplex,
    SimplicialMap,
    _rips_family,
    induced_poset_map,
    induced_simplicial_map,
    level_poset,
    max_simplices,
    order_complex,
)
from .homology import (
    chain_complex,
    homology_basis,
    induced_homology_map,
    rank_mod_p,
)
from .metric import TOL_TIE, FiniteMetricSpace


@dataclass
class PersistenceModule:
    """``levels[i]`` labels the i-th space.  For an inverse module ``maps[i]``
    goes from ``levels[i+1]`` to ``levels[i]``; for a forward module from
    ``levels[i]`` to ``levels[i+1]``."""

    direction: str
    levels: list
    dims: list
    maps: list
    dimension: int
    field_char: int = 2
    scale: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.direction not in ("inverse", "forward"):
            raise PreconditionError(f"unknown direction {self.direction!r}")
        if len(self.dims) != len(self.levels) or len(self.maps) != max(len(self.dims) - 1, 0):
            raise PreconditionError("module shape mismatch")
        for i, f in enumerate(self.maps):
            src, tgt = (i + 1, i) if self.direction == "inverse" else (i, i + 1)
            if f.matrix.shape != (self.dims[tgt], self.dims[src]):
                raise PreconditionError(f"map {i} has shape {f.matrix.shape}, "
                                        f"expected {(self.dims[tgt], self.dims[src])}")

    def __len__(self):
        return len(self.dims)

    def forward(self):
        """Levels, dims and maps reindexed so that arrows run 1 -> 2 -> ... -> L."""
        if self.direction == "forward":
            return list(self.levels), list(self.dims), list(self.maps)
        return self.levels[::-1], self.dims[::-1], self.maps[::-1]


@dataclass
class RankFunction:
    """``rank(i, j)`` is the rank of the composite from forward index i to j
    (1-based, ``i <= j``)."""

    ranks: np.ndarray
    levels: list

    def rank(self, i: int, j: int) -> int:
        L = len(self.levels)
        if i < 1 or j > L or i > j:
            return 0
        return int(self.ranks[i - 1, j - 1])

    def __len__(self):
        return len(self.levels)


def rank_function(M: PersistenceModule) -> RankFunction:
    levels, dims, maps = M.forward()
    L = len(dims)
    R = np.zeros((L, L), dtype=np.int64)
    p = M.field_char
    for i in range(L):
        R[i, i] = dims[i]
        comp = np.eye(dims[i], dtype=np.int64)
        for j in range(i + 1, L):
            comp = (maps[j - 1].matrix @ comp) % p
            R[i, j] = rank_mod_p(comp, p) if comp.size else 0
    return RankFunction(R, levels)


@dataclass(frozen=True, order=True)
class Bar:
    birth: int
    death: int
    multiplicity: int = 1


@dataclass
class Barcode:
    """Intervals ``[birth, death]`` with ``birth <= death`` in the module's own
    level labels.  For inverse barcodes a bar ``[n, m]`` is a class present at
    every level from n to m: it appears at level m and survives the transition
    maps down to level n."""

    direction: str
    dimension: int
    field_char: int
    bars: list
    scale: dict = field(default_factory=dict)

    def __post_init__(self):
        self.bars = sorted(self.bars)

    def multiset(self) -> dict:
        out = {}
        for b in self.bars:
            out[(b.birth, b.death)] = out.get((b.birth, b.death), 0) + b.multiplicity
        return out

    def total(self) -> int:
        return sum(b.multiplicity for b in self.bars)

    def to_dict(self) -> dict:
        d = {
            "direction": self.direction,
            "dimension": self.dimension,
            "field": self.field_char,
            "bars": [{"birth": b.birth, "death": b.death, "multiplicity": b.multiplicity} for b in self.bars],
        }
        if self.scale:
            d["scale"] = {str(k): v for k, v in sorted(self.scale.items())}
        return d

    def to_json(self, **extra) -> str:
        d = self.to_dict()
        d.update(extra)
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Barcode":
        try:
            bars = [Bar(int(b["birth"]), int(b["death"]), int(b.get("multiplicity", 1))) for b in d["bars"]]
            scale = {int(k): float(v) for k, v in d.get("scale", {}).items()}
            bc = cls(d["direction"], int(d["dimension"]), int(d["field"]), bars, scale)
        except (KeyError, TypeError, ValueError) as exc:
            raise PreconditionError(f"malformed barcode: {exc}") from None
        if bc.direction not in ("inverse", "forward"):
            raise PreconditionError(f"malformed barcode: direction {bc.direction!r}")
        if any(b.birth > b.death or b.multiplicity < 1 for b in bc.bars):
            raise PreconditionError("malformed barcode: need birth <= death and multiplicity >= 1")
        return bc

    def real_intervals(self, mapping: str = "scale") -> list:
        """Bars as real ``(lo, hi)`` pairs, one per unit of multiplicity.

        ``"index"`` uses the half-open ``[b, d + 1)``.  ``"scale"`` uses the
        stored scale: forward bars ``[t_b, t_{d+1})`` (infinite past the last
        index), inverse bars ``[eps_d, eps_b]``.
        """
        out = []
        for b in self.bars:
            if mapping == "index" or not self.scale:
                lo, hi = float(b.birth), float(b.death + 1)
            elif self.direction == "forward":
                lo, hi = self.scale[b.birth], self.scale.get(b.death + 1, math.inf)
            else:
                lo, hi = sorted((self.scale[b.birth], self.scale[b.death]))
            out.extend([(lo, hi)] * b.multiplicity)
        return out

    def to_svg(self, width: int = 640, lane: int = 14) -> str:
        """Horizontal bars over the index axis, one lane per unit of multiplicity."""
        lanes = [(b.birth, b.death) for b in self.bars for _ in range(b.multiplicity)]
        if not lanes:
            lo, hi = 0, 1
        else:
            lo = min(b for b, _ in lanes)
            hi = max(d for _, d in lanes) + 1
        margin = 40
        span = max(hi - lo, 1)
        unit = (width - 2 * margin) / span
        height = margin * 2 + lane * max(len(lanes), 1)

        def x(v):
            return margin + (v - lo) * unit

        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">',
            f'<text x="{margin}" y="20" font-size="12" font-family="monospace">'
            f'{self.direction} barcode, H_{self.dimension}, F_{self.field_char}</text>',
        ]
        for i, (b, d) in enumerate(lanes):
            y = margin + i * lane + lane / 2
            parts.append(f'<line x1="{x(b):.2f}" y1="{y:.2f}" x2="{x(d + 1) - unit / 2:.2f}" '
                         f'y2="{y:.2f}" stroke="#1f4fbf" stroke-width="3"/>')
        axis_y = height - margin / 2
        parts.append(f'<line x1="{x(lo):.2f}" y1="{axis_y:.2f}" x2="{x(hi):.2f}" y2="{axis_y:.2f}" '
                     f'stroke="black" stroke-width="1"/>')
        for v in range(lo, hi):
            parts.append(f'<text x="{x(v):.2f}" y="{axis_y + 14:.2f}" font-size="10" '
                         f'font-family="monospace">{v}</text>')
        parts.append("</svg>")
        return "\n".join(parts) + "\n"


def interval_decomposition(M: PersistenceModule, rf: RankFunction | None = None) -> Barcode:
    """Multiplicity of the forward interval [i, j] is
    ``r(i,j) - r(i-1,j) - r(i,j+1) + r(i-1,j+1)`` with out-of-range ranks zero."""
    rf = rank_function(M) if rf is None else rf
    r = rf.rank
    L = len(rf)
    bars = []
    for i in range(1, L + 1):
        for j in range(i, L + 1):
            mu = r(i, j) - r(i - 1, j) - r(i, j + 1) + r(i - 1, j + 1)
            if mu < 0:
                raise InternalConsistencyError(f"negative multiplicity {mu} on [{i}, {j}]")
            if mu:
                a, b = rf.levels[i - 1], rf.levels[j - 1]
                bars.append(Bar(min(a, b), max(a, b), mu))
    bc = Barcode(M.direction, M.dimension, M.field_char, bars, dict(M.scale))
    verify_barcode(bc, M, rf)
    return bc


def verify_barcode(bc: Barcode, M: PersistenceModule, rf: RankFunction | None = None):
    """Rank and dimension reconstruction: bars covering [i, j] add up to r(i, j)."""
    rf = rank_function(M) if rf is None else rf
    pos = {lv: t for t, lv in enumerate(rf.levels, start=1)}
    spans = []
    for b in bc.bars:
        t0, t1 = sorted((pos[b.birth], pos[b.death]))
        spans.append((t0, t1, b.multiplicity))
    L = len(rf)
    for i in range(1, L + 1):
        for j in range(i, L + 1):
            covered = sum(m for a, c, m in spans if a <= i and j <= c)
            if covered != rf.rank(i, j):
                raise InternalConsistencyError(f"bars cover [{i},{j}] {covered} times, rank is {rf.rank(i, j)}")
    return True


# --------------------------------------------------------------------------
# pipelines


@dataclass
class LevelData:
    poset: object
    complex: SimplicialComplex
    basis: object


def inverse_module(fas: FasSequence, k: int, p: int = 2, level_range: tuple | None = None,
                   size_cap: int | None = None) -> PersistenceModule:
    """``H_k`` of the order complexes over levels n..m with the maps induced by
    the FAS transitions."""
    n, m = (1, len(fas)) if level_range is None else level_range
    if not 1 <= n <= m <= len(fas):
        raise PreconditionError(f"level range [{n}, {m}] outside the built levels 1..{len(fas)}")
    data = {}
    for lv in range(n, m + 1):
        P = level_poset(fas, lv, size_cap)
        K = order_complex(P)
        data[lv] = LevelData(P, K, homology_basis(chain_complex(K, p), k))
    maps = []
    for lv in range(n, m):
        pm = induced_poset_map(fas, lv, data[lv + 1].poset, data[lv].poset, size_cap)
        sm = induced_simplicial_map(pm, data[lv + 1].complex, data[lv].complex)
        maps.append(induced_homology_map(sm, k, p, data[lv + 1].basis, data[lv].basis))
    levels = list(range(n, m + 1))
    return PersistenceModule(
        "inverse", levels, [data[lv].basis.betti for lv in levels], maps, k, p,
        {lv: fas.level(lv).epsilon for lv in levels},
    )


def inverse_barcode(source, k: int, p: int = 2, level_range: tuple | None = None,
                    size_cap: int | None = None, **build_kwargs) -> Barcode:
    """Build a FAS (unless one is given), its inverse module and its barcode."""
    fas = source if isinstance(source, FasSequence) else build_fas(source, **build_kwargs)
    return interval_decomposition(inverse_module(fas, k, p, level_range, size_cap))


def critical_values(space: FiniteMetricSpace, tol: float = TOL_TIE) -> list:
    vals = np.unique(space.dist[np.triu_indices(len(space), 1)])
    out = [0.0]
    for v in vals:
        if v - out[-1] > tol:
            out.append(float(v))
    return out


def vr_module(space: FiniteMetricSpace, k: int, p: int = 2, thresholds: Sequence[float] | None = None,
              tol: float = TOL_TIE) -> PersistenceModule:
    """Forward module of the Rips filtration; index i holds the simplices of
    diameter at most ``thresholds[i-1]`` (the complex ``V_eps`` for ``eps`` just
    above that value)."""
    ts = critical_values(space, tol) if thresholds is None else sorted(float(t) for t in thresholds)
    top = ts[-1]
    # everything up to the top threshold, ties included
    faces, _ = _rips_family(space, range(len(space)), top + 2 * tol, k + 2, max_simplices(), 0.0)
    diam = {}
    for f in faces:
        diam[f] = 0.0 if len(f) == 1 else float(space.dist[np.ix_(f, f)].max())
    vertices = tuple(range(len(space)))
    complexes = []
    for t in ts:
        members = [f for f, d in diam.items() if d <= t + tol]
        complexes.append(SimplicialComplex.from_simplices(members, vertices=vertices, close=False))
    bases = [homology_basis(chain_complex(K, p), k) for K in complexes]
    maps = []
    ident = {v: v for v in vertices}
    for i in range(len(ts) - 1):
        f = SimplicialMap(complexes[i], complexes[i + 1], ident)
        maps.append(induced_homology_map(f, k, p, bases[i], bases[i + 1]))
    levels = list(range(1, len(ts) + 1))
    return PersistenceModule("forward", levels, [b.betti for b in bases], maps, k, p,
                             {i: t for i, t in zip(levels, ts)})


def vr_filtration_persistence(space: FiniteMetricSpace, k: int, p: int = 2,
                              thresholds: Sequence[float] | None = None) -> Barcode:
    return interval_decomposition(vr_module(space, k, p, thresholds))


# --------------------------------------------------------------------------
# bottleneck distance


def _linf(a, b) -> float:
    if math.isinf(a[1]) or math.isinf(b[1]):
        if math.isinf(a[1]) and math.isinf(b[1]):
            return abs(a[0] - b[0])
        return math.inf
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def _half(a) -> float:
    return (a[1] - a[0]) / 2


def _matching_at(P, Q, delta):
    """Perfect matching of the augmented bipartite graph at threshold delta,
    or None.  Left: P then diagonal copies of Q; right: Q then diagonal copies of P."""
    n1, n2 = len(P), len(Q)
    size = n1 + n2
    rows, cols = [], []
    for i, a in enumerate(P):
        for j, b in enumerate(Q):
            if _linf(a, b) <= delta:
                rows.append(i)
                cols.append(j)
        if _half(a) <= delta:
            rows.append(i)
            cols.append(n2 + i)
    for j, b in enumerate(Q):
        if _half(b) <= delta:
            rows.append(n1 + j)
            cols.append(j)
        for i in range(n1):
            rows.append(n1 + j)
            cols.append(n2 + i)
    if size == 0:
        return []
    G = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(size, size))
    match = maximum_bipartite_matching(G, perm_type="column")
    if np.any(match < 0):
        return None
    pairs = []
    for i in range(n1):
        j = int(match[i])
        pairs.append((i, j if j < n2 else None))
    for j in range(n2):
        if int(match[n1 + j]) == j:
            pairs.append((None, j))
    return pairs


def bottleneck_distance(B1, B2, mapping: str = "scale", with_matching: bool = False):
    """Bottleneck distance between two barcodes (or lists of ``(lo, hi)`` pairs).

    Unmatched bars pay half their length.  Exact: the optimum is one of the
    candidate costs, found by binary search with a bipartite-matching test.
    """
    P = B1.real_intervals(mapping) if isinstance(B1, Barcode) else [tuple(map(float, x)) for x in B1]
    Q = B2.real_intervals(mapping) if isinstance(B2, Barcode) else [tuple(map(float, x)) for x in B2]
    Pinf = sorted(a[0] for a in P if math.isinf(a[1]))
    Qinf = sorted(b[0] for b in Q if math.isinf(b[1]))
    if len(Pinf) != len(Qinf):
        return (math.inf, []) if with_matching else math.inf
    inf_cost = max((abs(a - b) for a, b in zip(Pinf, Qinf)), default=0.0)
    Pf = [a for a in P if not math.isinf(a[1])]
    Qf = [b for b in Q if not math.isinf(b[1])]
    cands = {0.0}
    cands.update(_half(a) for a in Pf)
    cands.update(_half(b) for b in Qf)
    cands.update(_linf(a, b) for a in Pf for b in Qf)
    cands = sorted(c for c in cands if c >= inf_cost) or [inf_cost]
    if cands[0] > inf_cost:
        cands.insert(0, inf_cost)
    lo, hi = 0, len(cands) - 1
    best = _matching_at(Pf, Qf, cands[hi])
    while lo < hi:
        mid = (lo + hi) // 2
        m = _matching_at(Pf, Qf, cands[mid])
        if m is None:
            lo = mid + 1
        else:
            hi, best = mid, m
    value = cands[lo]
    if not with_matching:
        return value
    matching = [(Pf[i] if i is not None else None, Qf[j] if j is not None else None) for i, j in best]
    matching += [((a, math.inf), (b, math.inf)) for a, b in zip(Pinf, Qinf)]
    return value, matching
