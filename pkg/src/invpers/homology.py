"""Simplicial homology over a prime field.

Chains are sparse vectors indexed by simplex position within a dimension.
Over F_2 a chain is a Python int used as a bit set; over F_p it is a dict
``{position: coefficient}``.  Reductions are the usual column eliminations on
the lowest nonzero entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InternalConsistencyError, PreconditionError
from .finite_spaces import SimplicialComplex, SimplicialMap


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, int(p ** 0.5) + 1))


class _F2:
    p = 2
    zero = 0

    @staticmethod
    def basis(i):
        return 1 << i

    @staticmethod
    def from_items(items):
        v = 0
        for i, c in items:
            if c % 2:
                v ^= 1 << i
        return v

    @staticmethod
    def low(v):
        return v.bit_length() - 1

    @staticmethod
    def coef(v, i):
        return (v >> i) & 1

    @staticmethod
    def axpy(v, a, w):
        return v ^ w if a % 2 else v

    @staticmethod
    def items(v):
        i = 0
        while v:
            if v & 1:
                yield i, 1
            v >>= 1
            i += 1

    @staticmethod
    def inv(a):
        return 1


class _Fp:
    zero = None

    def __init__(self, p):
        self.p = p

    def basis(self, i):
        return {i: 1}

    def from_items(self, items):
        v = {}
        for i, c in items:
            c = (v.get(i, 0) + c) % self.p
            if c:
                v[i] = c
            else:
                v.pop(i, None)
        return v

    @staticmethod
    def low(v):
        return max(v) if v else -1

    @staticmethod
    def coef(v, i):
        return v.get(i, 0)

    def axpy(self, v, a, w):
        """``v + a * w``"""
        a %= self.p
        if not a:
            return v
        out = dict(v)
        for i, c in w.items():
            c = (out.get(i, 0) + a * c) % self.p
            if c:
                out[i] = c
            else:
                out.pop(i, None)
        return out

    @staticmethod
    def items(v):
        return sorted(v.items())

    def inv(self, a):
        return pow(a, self.p - 2, self.p)


def field_ops(p: int):
    if not is_prime(p):
        raise PreconditionError(f"field characteristic must be prime, got {p}")
    return _F2 if p == 2 else _Fp(p)


def _nonzero(v) -> bool:
    return bool(v)


@dataclass(eq=False)
class ChainComplex:
    complex: SimplicialComplex
    field_char: int
    boundaries: dict = field(default_factory=dict)

    @cached_property
    def ops(self):
        return field_ops(self.field_char)

    def basis(self, k: int) -> tuple:
        return self.complex.simplices_of(k)

    @cached_property
    def _positions(self) -> dict:
        return {k: {s: i for i, s in enumerate(v)} for k, v in self.complex.simplices.items()}

    def position(self, simplex: tuple) -> int:
        return self._positions[len(simplex) - 1][simplex]

    def boundary_matrix(self, k: int) -> np.ndarray:
        """Dense ``d_k`` with rows indexed by (k-1)-simplices."""
        rows = len(self.basis(k - 1))
        cols = self.boundaries.get(k, [])
        M = np.zeros((rows, len(cols)), dtype=np.int64)
        for j, col in enumerate(cols):
            for i, c in self.ops.items(col):
                M[i, j] = c
        return M

    def check_dd(self) -> bool:
        """``d_{k} d_{k+1} = 0`` for every k."""
        ops = self.ops
        for k in self.boundaries:
            if k - 1 not in self.boundaries:
                continue
            lower = self.boundaries[k - 1]
            for col in self.boundaries[k]:
                acc = ops.zero if ops.zero is not None else {}
                for i, c in ops.items(col):
                    acc = ops.axpy(acc, c, lower[i])
                if _nonzero(acc):
                    return False
        return True


def chain_complex(K: SimplicialComplex, p: int = 2) -> ChainComplex:
    """Boundary operators with the alternating-sign convention on sorted vertex order."""
    ops = field_ops(p)
    C = ChainComplex(K, p)
    pos = C._positions
    for k in range(1, K.dimension + 1):
        lower = pos[k - 1]
        cols = []
        for s in K.simplices_of(k):
            faces = ((lower[s[:i] + s[i + 1:]], (-1) ** i) for i in range(len(s)))
            cols.append(ops.from_items(faces))
        C.boundaries[k] = cols
    return C


def _reduce(v, table, ops):
    """Reduce ``v`` against a pivot table ``{low: (vector, tag)}``; returns the
    remainder and the coefficients used per tag."""
    used = {}
    while _nonzero(v):
        low = ops.low(v)
        entry = table.get(low)
        if entry is None:
            break
        w, tag = entry
        a = (ops.coef(v, low) * ops.inv(ops.coef(w, low))) % ops.p
        v = ops.axpy(v, -a, w)
        if tag is not None:
            used[tag] = (used.get(tag, 0) + a) % ops.p
    return v, used


@dataclass(eq=False)
class HomologyBasis:
    """Cycle representatives of ``H_k`` and a pivot table that writes any
    ``k``-cycle as a boundary plus a combination of the representatives."""

    chains: ChainComplex
    dimension: int
    betti: int
    cycle_reps: list
    rank_cycles: int
    rank_boundaries: int
    _table: dict = field(repr=False, default_factory=dict)

    def coordinates(self, cycle) -> list:
        """Coordinates of a ``k``-cycle (sparse vector) in the representative basis."""
        ops = self.chains.ops
        rest, used = _reduce(cycle, self._table, ops)
        if _nonzero(rest):
            raise PreconditionError("chain is not a cycle of this complex")
        return [used.get(t, 0) for t in range(self.betti)]

    def rep_chains(self) -> list:
        """Representatives as ``{simplex: coefficient}`` dicts."""
        basis = self.chains.basis(self.dimension)
        ops = self.chains.ops
        return [{basis[i]: c for i, c in ops.items(v)} for v in self.cycle_reps]


def _boundary_pivots(C: ChainComplex, k: int) -> dict:
    ops = C.ops
    table = {}
    for col in C.boundaries.get(k + 1, []):
        v, _ = _reduce(col, table, ops)
        if _nonzero(v):
            table[ops.low(v)] = (v, None)
    return table


def _cycle_basis(C: ChainComplex, k: int) -> list:
    ops = C.ops
    n = len(C.basis(k))
    if k == 0 or k not in C.boundaries:
        return [ops.basis(i) for i in range(n)]
    cycles = []
    pivots = {}  # low -> (reduced boundary, tracked combination)
    for j, col in enumerate(C.boundaries[k]):
        v, t = col, ops.basis(j)
        while _nonzero(v):
            low = ops.low(v)
            entry = pivots.get(low)
            if entry is None:
                break
            w, tw = entry
            a = (ops.coef(v, low) * ops.inv(ops.coef(w, low))) % ops.p
            v = ops.axpy(v, -a, w)
            t = ops.axpy(t, -a, tw)
        if _nonzero(v):
            pivots[ops.low(v)] = (v, t)
        else:
            cycles.append(t)
    return cycles


def homology_basis(C: ChainComplex, k: int) -> HomologyBasis:
    if k < 0:
        raise PreconditionError("homology dimension must be non-negative")
    ops = C.ops
    table = _boundary_pivots(C, k)
    rank_b = len(table)
    cycles = _cycle_basis(C, k)
    reps = []
    for z in cycles:
        v, _ = _reduce(z, table, ops)
        if _nonzero(v):
            table[ops.low(v)] = (v, len(reps))
            reps.append(v)
    betti = len(reps)
    if betti != len(cycles) - rank_b:
        raise InternalConsistencyError("rank bookkeeping failed: betti != rank Z - rank B")
    return HomologyBasis(C, k, betti, reps, len(cycles), rank_b, table)


def betti_numbers(K: SimplicialComplex, p: int = 2, max_dim: int | None = None) -> list:
    C = chain_complex(K, p)
    top = K.dimension if max_dim is None else min(max_dim, K.dimension)
    return [homology_basis(C, k).betti for k in range(top + 1)]


# --------------------------------------------------------------------------
# maps


def rank_mod_p(M, p: int) -> int:
    A = np.array(M, dtype=np.int64) % p
    if A.size == 0:
        return 0
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if A[i, c]), None)
        if piv is None:
            continue
        A[[r, piv]] = A[[piv, r]]
        A[r] = (A[r] * pow(int(A[r, c]), p - 2, p)) % p
        for i in range(rows):
            if i != r and A[i, c]:
                A[i] = (A[i] - A[i, c] * A[r]) % p
        r += 1
        if r == rows:
            break
    return r


@dataclass(eq=False)
class LinearMapOverField:
    """Matrix of a linear map; column j is the image of source generator j in
    target coordinates."""

    matrix: np.ndarray
    field_char: int
    source: HomologyBasis | None = None
    target: HomologyBasis | None = None

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    def rank(self) -> int:
        return rank_mod_p(self.matrix, self.field_char)

    def __matmul__(self, other: "LinearMapOverField") -> "LinearMapOverField":
        if self.field_char != other.field_char or self.cols != other.rows:
            raise PreconditionError("incompatible maps")
        M = (self.matrix @ other.matrix) % self.field_char
        return LinearMapOverField(M, self.field_char, other.source, self.target)

    @classmethod
    def identity(cls, n: int, p: int):
        return cls(np.eye(n, dtype=np.int64), p)


def _permutation_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def chain_map(f: SimplicialMap, chain, k: int, source: ChainComplex, target: ChainComplex):
    """Push a ``k``-chain forward; degenerate images vanish."""
    ops = target.ops
    src_basis = source.basis(k)
    tpos = target._positions.get(k, {})
    pm = f.position_map
    items = []
    for i, c in source.ops.items(chain):
        image = [pm[v] for v in src_basis[i]]
        if len(set(image)) < len(image):
            continue
        s = tuple(sorted(image))
        if s not in tpos:
            raise PreconditionError(f"image {s} of a {k}-simplex is not a target simplex")
        sign = 1 if ops.p == 2 else _permutation_sign(image)
        items.append((tpos[s], sign * c))
    return ops.from_items(items)


def induced_homology_map(f: SimplicialMap, k: int, p: int = 2,
                         source: HomologyBasis | None = None,
                         target: HomologyBasis | None = None, check: bool = True) -> LinearMapOverField:
    """Matrix of ``f_*: H_k(source) -> H_k(target)`` in the representative bases.
    ``check`` first verifies that ``f`` is simplicial."""
    if check:
        f.check()
    if source is None:
        source = homology_basis(chain_complex(f.source, p), k)
    if target is None:
        target = homology_basis(chain_complex(f.target, p), k)
    if source.chains.field_char != p or target.chains.field_char != p:
        raise PreconditionError("homology bases computed over a different field")
    M = np.zeros((target.betti, source.betti), dtype=np.int64)
    for j, rep in enumerate(source.cycle_reps):
        image = chain_map(f, rep, k, source.chains, target.chains)
        M[:, j] = target.coordinates(image)
    return LinearMapOverField(M, p, source, target)
