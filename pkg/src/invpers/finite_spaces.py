"""Finite T0 spaces as posets, order complexes and face posets.

``U_{2eps}(A)`` (subsets of ``A`` with diameter below ``2 eps``, ordered by
inclusion) is the face poset of the Vietoris-Rips complex ``V_{2eps}(A)``, so it
is enumerated from maximal cliques of the ``d < 2 eps`` graph.  Its order
complex (chains of subsets) is the barycentric subdivision of that complex.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import CapViolationError, PreconditionError, ResourceLimitError
from .metric import TOL_TIE, FiniteMetricSpace, SubsetOfSpace

DEFAULT_MAX_SIMPLICES = 5_000_000
MAX_SIMPLICES_ENV = "INVPERS_MAX_SIMPLICES"


def max_simplices() -> int:
    value = os.environ.get(MAX_SIMPLICES_ENV)
    return int(value) if value else DEFAULT_MAX_SIMPLICES


def _guard(count: int, limit: int, what: str):
    if count > limit:
        raise ResourceLimitError(
            f"{what} exceeds the ceiling of {limit} simplices "
            f"(raise {MAX_SIMPLICES_ENV} or pass a size cap)"
        )


# --------------------------------------------------------------------------
# posets


@dataclass(eq=False)
class FinitePoset:
    """A finite partial order.  ``up[i]`` holds the positions of the elements
    strictly above ``elements[i]``."""

    elements: tuple
    up: tuple
    level_epsilon: float | None = None
    boundary_ties: int = 0

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, e):
        return e in self.index

    @cached_property
    def index(self) -> dict:
        return {e: i for i, e in enumerate(self.elements)}

    def leq(self, a, b) -> bool:
        i, j = self.index[a], self.index[b]
        return i == j or j in self.up[i]

    def relation(self) -> set:
        """All strict pairs ``(a, b)`` with ``a < b``."""
        return {(self.elements[i], self.elements[j]) for i, ups in enumerate(self.up) for j in ups}

    @classmethod
    def from_relation(cls, elements: Iterable[Hashable], pairs: Iterable[tuple]) -> "FinitePoset":
        """Poset generated by ``a <= b`` pairs (reflexive-transitive closure)."""
        elements = tuple(elements)
        idx = {e: i for i, e in enumerate(elements)}
        direct = [set() for _ in elements]
        for a, b in pairs:
            if a != b:
                direct[idx[a]].add(idx[b])
        up = []
        for i in range(len(elements)):
            seen, stack = set(), list(direct[i])
            while stack:
                j = stack.pop()
                if j not in seen:
                    seen.add(j)
                    stack.extend(direct[j])
            if i in seen:
                raise PreconditionError(f"relation has a cycle through {elements[i]!r}")
            up.append(frozenset(seen))
        return cls(elements, tuple(up))

    @classmethod
    def of_subsets(cls, family: Iterable[Sequence], level_epsilon=None, boundary_ties=0) -> "FinitePoset":
        """Inclusion order on a family of sets (given as sorted tuples).

        Families closed under taking non-empty subsets use the fast path
        through codimension-one faces."""
        elements = tuple(sorted({tuple(sorted(s)) for s in family}, key=lambda s: (len(s), s)))
        idx = {e: i for i, e in enumerate(elements)}
        closed = all(
            len(s) == 1 or all(s[:k] + s[k + 1:] in idx for k in range(len(s))) for s in elements
        )
        if closed:
            covers = [[] for _ in elements]
            for s in elements:
                if len(s) > 1:
                    for k in range(len(s)):
                        covers[idx[s[:k] + s[k + 1:]]].append(idx[s])
            up = [frozenset()] * len(elements)
            for i in range(len(elements) - 1, -1, -1):
                acc = set()
                for j in covers[i]:
                    acc.add(j)
                    acc |= up[j]
                up[i] = frozenset(acc)
        else:
            sets = [frozenset(s) for s in elements]
            up = [frozenset(j for j, t in enumerate(sets) if s < t) for s in sets]
        return cls(elements, tuple(up), level_epsilon, boundary_ties)

    def is_downward_closed(self) -> bool:
        idx = self.index
        for s in self.elements:
            for r in range(1, len(s)):
                for sub in itertools.combinations(s, r):
                    if sub not in idx:
                        return False
        return True


@dataclass(eq=False)
class PosetMap:
    source: FinitePoset
    target: FinitePoset
    assignment: Mapping

    def __call__(self, e):
        return self.assignment[e]

    def is_order_preserving(self) -> bool:
        src, tgt, f = self.source, self.target, self.assignment
        for i, ups in enumerate(src.up):
            fi = f[src.elements[i]]
            for j in ups:
                if not tgt.leq(fi, f[src.elements[j]]):
                    return False
        return True

    def check(self):
        missing = [e for e in self.source.elements if e not in self.assignment]
        if missing:
            raise PreconditionError(f"assignment is not total (missing {missing[:3]})")
        bad = [self.assignment[e] for e in self.source.elements if self.assignment[e] not in self.target]
        if bad:
            raise PreconditionError(f"assignment leaves the target poset (e.g. {bad[0]!r})")
        if not self.is_order_preserving():
            raise PreconditionError("map is not order preserving")
        return self


# --------------------------------------------------------------------------
# simplicial complexes


def _sort_key(v):
    return (type(v).__name__, v)


@dataclass(eq=False)
class SimplicialComplex:
    """Simplices are stored per dimension as sorted tuples of vertex positions.

    Vertex positions follow the order of ``vertices``; orientation of a simplex
    is the increasing order of its positions."""

    vertices: tuple
    simplices: dict

    @classmethod
    def from_simplices(cls, simplices: Iterable[Iterable], vertices: Sequence | None = None,
                       close: bool = True, limit: int | None = None) -> "SimplicialComplex":
        maximal = [tuple(set(s)) for s in simplices]
        if vertices is None:
            vs = {v for s in maximal for v in s}
            try:
                vertices = tuple(sorted(vs))
            except TypeError:
                vertices = tuple(sorted(vs, key=_sort_key))
        vertices = tuple(vertices)
        pos = {v: i for i, v in enumerate(vertices)}
        limit = max_simplices() if limit is None else limit
        faces = set()
        for s in maximal:
            if not s:
                continue
            t = tuple(sorted(pos[v] for v in s))
            if close:
                for r in range(1, len(t) + 1):
                    faces.update(itertools.combinations(t, r))
                    _guard(len(faces), limit, "simplicial complex")
            else:
                faces.add(t)
        faces.update((i,) for i in range(len(vertices)))
        by_dim: dict[int, list] = {}
        for f in faces:
            by_dim.setdefault(len(f) - 1, []).append(f)
        return cls(vertices, {k: tuple(sorted(v)) for k, v in sorted(by_dim.items())})

    @property
    def dimension(self) -> int:
        return max(self.simplices) if self.simplices else -1

    def __len__(self):
        return sum(len(v) for v in self.simplices.values())

    def counts(self) -> list:
        return [len(self.simplices.get(k, ())) for k in range(self.dimension + 1)]

    def simplices_of(self, k: int) -> tuple:
        return self.simplices.get(k, ())

    def all_simplices(self):
        for k in sorted(self.simplices):
            yield from self.simplices[k]

    @cached_property
    def position(self) -> dict:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def simplex_set(self) -> frozenset:
        return frozenset(self.all_simplices())

    def as_vertex_sets(self) -> set:
        return {frozenset(self.vertices[i] for i in s) for s in self.all_simplices()}

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * len(v) for k, v in self.simplices.items())

    def is_downward_closed(self) -> bool:
        S = self.simplex_set
        return all(s[:k] + s[k + 1:] in S for s in S if len(s) > 1 for k in range(len(s)))

    def dump(self, fh):
        """One simplex per line, sorted vertex ids separated by spaces."""
        for s in self.all_simplices():
            fh.write(" ".join(str(self.vertices[i]) for i in s) + "\n")


@dataclass(eq=False)
class SimplicialMap:
    source: SimplicialComplex
    target: SimplicialComplex
    vertex_map: Mapping

    @cached_property
    def position_map(self) -> tuple:
        tp = self.target.position
        return tuple(tp[self.vertex_map[v]] for v in self.source.vertices)

    def image(self, simplex: Sequence[int]) -> tuple:
        """Image of a source simplex (vertex positions) as a target simplex,
        repeated vertices collapsed."""
        pm = self.position_map
        return tuple(sorted({pm[i] for i in simplex}))

    def check(self):
        missing = [v for v in self.source.vertices if v not in self.vertex_map]
        if missing:
            raise PreconditionError(f"vertex map is not total (missing {missing[:3]})")
        if any(self.vertex_map[v] not in self.target.position for v in self.source.vertices):
            raise PreconditionError("vertex map leaves the target complex")
        S = self.target.simplex_set
        for s in self.source.all_simplices():
            if self.image(s) not in S:
                raise PreconditionError(f"image of simplex {s} is not a simplex of the target")
        return self


# --------------------------------------------------------------------------
# constructions


def bron_kerbosch(adjacency: Sequence[set]):
    """Maximal cliques of an undirected graph (Bron-Kerbosch with pivoting)."""
    n = len(adjacency)
    stack = [(set(), set(range(n)), set())]
    while stack:
        R, P, X = stack.pop()
        if not P and not X:
            yield tuple(sorted(R))
            continue
        if not P:
            continue
        pivot = max(P | X, key=lambda u: len(adjacency[u] & P))
        for v in list(P - adjacency[pivot]):
            stack.append((R | {v}, P & adjacency[v], X & adjacency[v]))
            P = P - {v}
            X = X | {v}


def _rips_family(space: FiniteMetricSpace, members: Sequence[int], threshold: float,
                 size_cap: int | None, limit: int, tol: float):
    """Non-empty subsets of ``members`` with diameter strictly below ``threshold``."""
    members = list(members)
    block = space.dist[np.ix_(members, members)]
    close = block < threshold - tol  # strict, ties excluded (same rule as ``below``)
    ties = int(np.sum(np.triu(np.abs(block - threshold) <= tol, 1)))
    np.fill_diagonal(close, False)
    adjacency = [set(np.nonzero(row)[0].tolist()) for row in close]
    faces = set()
    for clique in bron_kerbosch(adjacency):
        top = len(clique) if size_cap is None else min(size_cap, len(clique))
        for r in range(1, top + 1):
            for sub in itertools.combinations(clique, r):
                faces.add(tuple(members[i] for i in sub))
            _guard(len(faces), limit, "Vietoris-Rips family")
    return faces, ties


def u_space(space: FiniteMetricSpace, A, two_epsilon: float, size_cap: int | None = None,
            limit: int | None = None, tol: float = TOL_TIE) -> FinitePoset:
    """The finite space ``U_{2eps}(A)``: subsets of ``A`` with diameter below
    ``two_epsilon``, ordered by inclusion.  Pairs whose distance ties with the
    threshold are excluded and counted in ``boundary_ties``."""
    if not two_epsilon > 0:
        raise PreconditionError("two_epsilon must be positive")
    members = A.members if isinstance(A, SubsetOfSpace) else tuple(sorted(set(A)))
    if not members:
        raise PreconditionError("A must be non-empty")
    limit = max_simplices() if limit is None else limit
    faces, ties = _rips_family(space, members, two_epsilon, size_cap, limit, tol)
    return FinitePoset.of_subsets(faces, level_epsilon=two_epsilon, boundary_ties=ties)


def vr_complex(space: FiniteMetricSpace, A, epsilon: float, dim_cap: int | None = None,
               limit: int | None = None, tol: float = TOL_TIE) -> SimplicialComplex:
    """Vietoris-Rips complex: simplices are subsets with diameter < epsilon.
    Vertex ids are point indices of ``space``."""
    if not epsilon > 0:
        raise PreconditionError("epsilon must be positive")
    members = A.members if isinstance(A, SubsetOfSpace) else tuple(sorted(set(A)))
    limit = max_simplices() if limit is None else limit
    size_cap = None if dim_cap is None else dim_cap + 1
    faces, _ = _rips_family(space, members, epsilon, size_cap, limit, tol)
    return SimplicialComplex.from_simplices(faces, vertices=members, close=False)


def chains(P: FinitePoset, limit: int | None = None):
    """All non-empty chains of ``P`` as increasing tuples of element positions."""
    limit = max_simplices() if limit is None else limit
    up = P.up
    out = []
    stack = [(i,) for i in range(len(P) - 1, -1, -1)]
    while stack:
        ch = stack.pop()
        out.append(ch)
        if len(out) > limit:
            _guard(len(out), limit, "order complex")
        for j in sorted(up[ch[-1]], reverse=True):
            stack.append(ch + (j,))
    return out


def order_complex(P: FinitePoset, limit: int | None = None) -> SimplicialComplex:
    """``K(P)``: vertices are the elements of ``P``, simplices its chains."""
    by_dim: dict[int, list] = {}
    for ch in chains(P, limit):
        by_dim.setdefault(len(ch) - 1, []).append(tuple(sorted(ch)))
    return SimplicialComplex(P.elements, {k: tuple(sorted(v)) for k, v in sorted(by_dim.items())})


def face_poset(K: SimplicialComplex) -> FinitePoset:
    """``X(K)``: simplices of ``K`` (as sorted vertex-id tuples) under inclusion."""
    fam = [tuple(K.vertices[i] for i in s) for s in K.all_simplices()]
    return FinitePoset.of_subsets(fam)


def barycentric_subdivision(K: SimplicialComplex) -> SimplicialComplex:
    return order_complex(face_poset(K))


def level_poset(fas, n: int, size_cap: int | None = None, limit: int | None = None) -> FinitePoset:
    lv = fas.level(n)
    return u_space(fas.space, lv.approx, 2 * lv.epsilon, size_cap, limit, fas.tol_tie)


def induced_poset_map(fas, n: int, source: FinitePoset | None = None, target: FinitePoset | None = None,
                      size_cap: int | None = None) -> PosetMap:
    """``p_{n,n+1}: U_{2eps_{n+1}}(A_{n+1}) -> U_{2eps_n}(A_n)``."""
    from .fas import transition_image

    source = level_poset(fas, n + 1, size_cap) if source is None else source
    target = level_poset(fas, n, size_cap) if target is None else target
    table = fas.nearest_sets[n]
    assignment = {}
    for C in source.elements:
        img = set()
        for c in C:
            img.update(table[c])
        img = tuple(sorted(img))
        if img not in target:
            # recompute through the checked path to surface a real precondition failure
            transition_image(fas, n, C)
            raise CapViolationError(
                f"image {img} of {C} is missing from U_{{2eps_{n}}}(A_{n}); the size cap truncates it",
                required_cap=len(img),
            )
        assignment[C] = img
    return PosetMap(source, target, assignment)


def induced_simplicial_map(f: PosetMap, source: SimplicialComplex | None = None,
                           target: SimplicialComplex | None = None, check: bool = True) -> SimplicialMap:
    """``K(f)`` between order complexes; chains go to (possibly degenerate) chains."""
    if check and not f.is_order_preserving():
        raise PreconditionError("poset map is not order preserving")
    source = order_complex(f.source) if source is None else source
    target = order_complex(f.target) if target is None else target
    return SimplicialMap(source, target, dict(f.assignment))


def identity_poset_map(P: FinitePoset) -> PosetMap:
    return PosetMap(P, P, {e: e for e in P.elements})
