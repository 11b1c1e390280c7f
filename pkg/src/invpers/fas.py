"""Finite approximative sequences (FAS) of a finite metric space.

A FAS is a decreasing list of scales ``eps_n`` with finite
``eps_n``-approximations ``A_n`` such that every next scale is adjusted to the
previous approximation, ``eps_{n+1} < (eps_n - gamma_n) / 2``.  Transition
maps send a subset of ``A_{n+1}`` to the union of the nearest points in
``A_n`` of its members.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import InternalConsistencyError, PreconditionError, ValidationError
from .metric import (
    TOL_TIE,
    FiniteMetricSpace,
    SubsetOfSpace,
    below,
    diameter,
    hausdorff_distance,
    sample_triadic_interval,
    sample_warsaw,
    triadic_points,
    validate_metric,
    warsaw_points,
)

DEFAULT_SHRINK = 0.9
DEFAULT_MAX_LEVELS = 20


@dataclass(frozen=True)
class ApproximationLevel:
    index: int
    epsilon: float
    approx: SubsetOfSpace
    gamma: float
    gamma_override: float | None = None

    @property
    def effective_gamma(self) -> float:
        return self.gamma if self.gamma_override is None else self.gamma_override

    @property
    def eps_upper(self) -> float:
        return (self.epsilon + self.effective_gamma) / 2

    @property
    def eps_lower(self) -> float:
        return (self.epsilon - self.effective_gamma) / 2

    @property
    def members(self) -> tuple:
        return self.approx.members


@dataclass
class FasSequence:
    space: FiniteMetricSpace
    levels: list
    nearest_sets: dict = field(default_factory=dict)
    stabilized_at: int | None = None
    tol_tie: float = TOL_TIE

    def __len__(self):
        return len(self.levels)

    def level(self, n: int) -> ApproximationLevel:
        if not 1 <= n <= len(self.levels):
            raise PreconditionError(f"level {n} not built (have 1..{len(self.levels)})")
        return self.levels[n - 1]

    @property
    def epsilons(self) -> list:
        return [lv.epsilon for lv in self.levels]

    def nearest(self, n: int, a: int) -> tuple:
        """Nearest points in ``A_n`` of a point ``a`` of ``A_{n+1}``."""
        try:
            return self.nearest_sets[n][a]
        except KeyError:
            raise PreconditionError(f"point {a} is not in A_{n + 1}") from None


# --------------------------------------------------------------------------
# single-level operations


def _as_indices(S) -> tuple:
    if isinstance(S, SubsetOfSpace):
        return S.members
    return tuple(sorted({int(i) for i in S}))


def epsilon_approximation(space, epsilon, strategy="greedy", subset=None, seed=0, tol=TOL_TIE):
    """Return a subset ``A`` with ``d(x, A) < epsilon`` for every point.

    Strategies: ``"greedy"`` (farthest-point insertion from a seeded start),
    ``"all"`` (the whole space), ``"given"`` (validate ``subset``) and
    ``"ultrametric"`` (disjoint balls, see :func:`ultrametric_approximation`).
    """
    if not epsilon > 0:
        raise PreconditionError("epsilon must be positive")
    if strategy == "all":
        return space.everything()
    if strategy == "ultrametric":
        return ultrametric_approximation(space, epsilon, tol=tol)
    if strategy == "given":
        if subset is None:
            raise PreconditionError("strategy 'given' needs a subset")
        A = subset if isinstance(subset, SubsetOfSpace) else SubsetOfSpace(space, subset)
        d = space.dist[:, list(A.members)].min(axis=1)
        uncovered = [i for i in range(len(space)) if not below(d[i], epsilon, tol)]
        if uncovered:
            names = [space.point_ids[i] for i in uncovered[:20]]
            raise ValidationError(f"not an {epsilon}-approximation; uncovered points: {names}")
        return A
    if strategy != "greedy":
        raise PreconditionError(f"unknown approximation strategy {strategy!r}")
    rng = np.random.default_rng(seed)
    start = int(rng.integers(len(space)))
    chosen = [start]
    d = space.dist[start].copy()
    while not below(d.max(), epsilon, tol):
        j = int(np.argmax(d))
        chosen.append(j)
        d = np.minimum(d, space.dist[j])
    return SubsetOfSpace(space, chosen)


def gamma_of(space, A) -> float:
    idx = list(_as_indices(A))
    return float(space.dist[:, idx].min(axis=1).max())


def adjusted_bound(epsilon: float, gamma: float) -> float:
    if not gamma < epsilon:
        raise PreconditionError(f"gamma={gamma} must be smaller than epsilon={epsilon}")
    return (epsilon - gamma) / 2


def nearby_set(space, A, x: int, tol: float = TOL_TIE) -> SubsetOfSpace:
    idx = np.array(_as_indices(A))
    d = space.dist[x, idx]
    return SubsetOfSpace(space, idx[d <= d.min() + tol])


def _nearest_table(space, source: Sequence[int], target: Sequence[int], tol) -> dict:
    tgt = np.array(target)
    block = space.dist[np.ix_(list(source), tgt)]
    mins = block.min(axis=1, keepdims=True)
    hits = block <= mins + tol
    return {a: tuple(int(t) for t in tgt[row]) for a, row in zip(source, hits)}


def ultrametric_approximation(space, epsilon, tol: float = TOL_TIE) -> SubsetOfSpace:
    """Sweep the points in order, keeping a point unless it lies within
    ``epsilon`` of one already kept.  In an ultrametric space the kept
    ``epsilon``-balls are pairwise disjoint."""
    if not space.ultrametric and not validate_metric(space.dist).ultrametric:
        raise PreconditionError("space is not ultrametric")
    chosen = []
    for i in range(len(space)):
        if not any(below(space.dist[i, j], epsilon, tol) for j in chosen):
            chosen.append(i)
    return SubsetOfSpace(space, chosen)


# --------------------------------------------------------------------------
# sequences


def transition_image(fas: FasSequence, n: int, C) -> SubsetOfSpace:
    """``p_{n,n+1}(C)``: union of the nearest points in ``A_n`` of members of ``C``."""
    members = _as_indices(C)
    upper = fas.level(n + 1)
    lower = fas.level(n)
    if not below(diameter(fas.space, members), 2 * upper.epsilon, fas.tol_tie):
        raise PreconditionError(f"diam(C) must be < 2*eps_{n + 1} = {2 * upper.epsilon}")
    table = fas.nearest_sets[n]
    image = set()
    for c in members:
        try:
            image.update(table[c])
        except KeyError:
            raise PreconditionError(f"point {c} is not in A_{n + 1}") from None
    image = tuple(sorted(image))
    if not below(diameter(fas.space, image), 2 * lower.epsilon, fas.tol_tie):
        raise InternalConsistencyError(
            f"transition image at level {n} has diameter >= 2*eps_{n}; the schedule is broken"
        )
    return SubsetOfSpace(fas.space, image)


def composite_image(fas: FasSequence, n: int, m: int, C) -> SubsetOfSpace:
    """``p_{n,m}(C)`` for ``C`` inside ``A_m``."""
    if m < n:
        raise PreconditionError("need n <= m")
    S = C if isinstance(C, SubsetOfSpace) else SubsetOfSpace(fas.space, C)
    for k in range(m - 1, n - 1, -1):
        S = transition_image(fas, k, S)
    return S


def _parse_overrides(gamma_override) -> dict:
    if not gamma_override:
        return {}
    return {int(k): float(v) for k, v in dict(gamma_override).items()}


def build_fas(
    space: FiniteMetricSpace,
    epsilons: Sequence[float] | None = None,
    *,
    shrink: float = DEFAULT_SHRINK,
    strategy: str = "greedy",
    subsets: Sequence | None = None,
    max_levels: int = DEFAULT_MAX_LEVELS,
    gamma_override: Mapping[int, float] | None = None,
    seed: int = 0,
    tol_tie: float = TOL_TIE,
) -> FasSequence:
    """Build a FAS from an explicit list of scales or automatically.

    With ``epsilons=None`` the first scale is twice the diameter and every next
    one is ``shrink * (eps_n - gamma_n) / 2``; construction stops at
    ``max_levels`` or once the space has stabilized (scale below half the
    minimum pairwise distance, which forces ``A_n`` to be the whole space).
    Explicit schedules are validated level by level.
    """
    overrides = _parse_overrides(gamma_override)
    explicit = epsilons is not None
    if explicit:
        epsilons = [float(e) for e in epsilons]
        if not epsilons:
            raise ValidationError("explicit schedule is empty")
        if len(epsilons) > max_levels:
            epsilons = epsilons[:max_levels]
    elif not 0 < shrink < 1:
        raise PreconditionError("shrink factor must lie in (0, 1)")
    if strategy == "given":
        if subsets is None:
            raise PreconditionError("strategy 'given' needs one subset per level")
        limit = len(subsets) if not explicit else min(len(subsets), len(epsilons))
        if explicit and len(subsets) < len(epsilons):
            raise PreconditionError("fewer subsets than levels")
        max_levels = min(max_levels, limit)

    half_gap = space.min_positive_distance / 2
    levels: list[ApproximationLevel] = []
    nearest: dict = {}
    stabilized_at = None
    eps = epsilons[0] if explicit else (2 * space.diameter if space.diameter > 0 else 1.0)
    n = 1
    while True:
        subset = subsets[n - 1] if strategy == "given" else None
        try:
            A = epsilon_approximation(space, eps, strategy, subset, seed, tol_tie)
        except ValidationError as exc:
            raise ValidationError(f"level {n}: {exc}") from None
        gamma = gamma_of(space, A)
        level = ApproximationLevel(n, eps, A, gamma, overrides.get(n))
        if not level.effective_gamma < eps:
            raise ValidationError(f"level {n}: gamma={level.effective_gamma} is not below eps={eps}")
        if levels:
            prev = levels[-1]
            bound = adjusted_bound(prev.epsilon, prev.effective_gamma)
            if not below(eps, bound, tol_tie):
                raise ValidationError(
                    f"level {n}: eps_{n}={eps} is not adjusted to A_{n - 1} "
                    f"(need < (eps_{n - 1} - gamma_{n - 1})/2 = {bound})"
                )
            nearest[n - 1] = _nearest_table(space, A.members, prev.members, tol_tie)
        levels.append(level)
        if stabilized_at is None and eps < half_gap and len(A) == len(space):
            stabilized_at = n
        if explicit:
            if n == len(epsilons):
                break
            eps = epsilons[n]
        else:
            if stabilized_at is not None or n >= max_levels:
                break
            eps = shrink * adjusted_bound(eps, level.effective_gamma)
        n += 1
    return FasSequence(space, levels, nearest, stabilized_at, tol_tie)


# --------------------------------------------------------------------------
# the two worked examples


def warsaw_fas(levels: int, continuum_gamma: bool = False, tol_tie: float = TOL_TIE,
               gamma_override: Mapping[int, float] | None = None) -> FasSequence:
    """FAS of the computational Warsaw circle sampled at its finest level.

    ``eps_1 = 2*sqrt(2)`` with ``A_1 = {(0,0)}`` and ``eps_n = sqrt(2)/2**(3n-3)``
    with the grid-plus-centres approximations ``A_n``.  ``continuum_gamma`` uses
    the continuum values ``gamma_1 = sqrt(2)``, ``gamma_n = 2**-(3n-3)``
    instead of the sample maxima.
    """
    if levels < 1:
        raise PreconditionError("need at least one level")
    space = sample_warsaw(levels)
    eps = [2 * math.sqrt(2)] + [math.sqrt(2) / 2 ** (3 * n - 3) for n in range(2, levels + 1)]
    subsets = [space.subset_by_ids(f"{x},{y}" for x, y in warsaw_points(n)) for n in range(1, levels + 1)]
    overrides = None
    if continuum_gamma:
        overrides = {1: math.sqrt(2), **{n: 2.0 ** -(3 * n - 3) for n in range(2, levels + 1)}}
    if gamma_override:
        overrides = {**(overrides or {}), **_parse_overrides(gamma_override)}
    return build_fas(space, eps, strategy="given", subsets=subsets, gamma_override=overrides,
                     max_levels=levels, tol_tie=tol_tie)


def triadic_fas(levels: int, include_half: bool = False, continuum_gamma: bool = False,
                tol_tie: float = TOL_TIE, gamma_override: Mapping[int, float] | None = None) -> FasSequence:
    """FAS of the unit interval: ``eps_1 = 2, A_1 = {0}`` then
    ``eps_n = 3**-(2n-3)`` with ``A_n = {k / 3**(2n-3)}``."""
    if levels < 1:
        raise PreconditionError("need at least one level")
    space = sample_triadic_interval(levels, include_half=include_half)
    eps = [2.0] + [3.0 ** -(2 * n - 3) for n in range(2, levels + 1)]
    subsets = [space.subset_by_ids(str(q) for q in triadic_points(n)) for n in range(1, levels + 1)]
    overrides = None
    if continuum_gamma:
        overrides = {1: 1.0, **{n: 1 / (2 * 3 ** (2 * n - 3)) for n in range(2, levels + 1)}}
    if gamma_override:
        overrides = {**(overrides or {}), **_parse_overrides(gamma_override)}
    return build_fas(space, eps, strategy="given", subsets=subsets, gamma_override=overrides,
                     max_levels=levels, tol_tie=tol_tie)


PRESETS = {"warsaw": warsaw_fas, "triadic": triadic_fas}


# --------------------------------------------------------------------------
# finite-depth traces


@dataclass
class TraceLevel:
    index: int
    ball: tuple          # B(x, eps_n) intersected with A_n
    star: tuple          # nested intersection of p_{n,m}(ball_m), n < m <= depth
    stabilized: bool
    hausdorff: float     # d_H({x}, star)


def trace_point(fas: FasSequence, x: int, depth: int | None = None) -> list[TraceLevel]:
    """Truncated maximal element of the inverse limit over the point ``x``.

    A level counts as stabilized when the FAS itself has stabilized by
    ``depth``, or when the last extension step ``depth - 1 -> depth`` no
    longer changes the intersection.  At stabilized levels the bound
    ``d_H({x}, X*_n) < eps_n`` is asserted.
    """
    depth = len(fas) if depth is None else depth
    if not 1 <= depth <= len(fas):
        raise PreconditionError(f"depth {depth} exceeds the {len(fas)} built levels")
    space = fas.space
    balls = {}
    for n in range(1, depth + 1):
        lv = fas.level(n)
        balls[n] = tuple(a for a in lv.members if below(space.dist[x, a], lv.epsilon, fas.tol_tie))
        if not balls[n]:
            raise InternalConsistencyError(f"empty ball at level {n}: A_{n} does not cover x")
    fas_stable = fas.stabilized_at is not None and depth >= fas.stabilized_at
    out = []
    point = SubsetOfSpace(space, [x])
    for n in range(1, depth + 1):
        if n == depth:
            star = set(balls[n])
            stable = fas_stable
        else:
            star = None
            prev_image = None
            for m in range(n + 1, depth + 1):
                image = set(composite_image(fas, n, m, balls[m]).members)
                if prev_image is not None and not image <= prev_image:
                    raise InternalConsistencyError(
                        f"images over x={x} are not nested at level {n} (m={m})"
                    )
                star = image if star is None else star & image
                last_changed = prev_image is not None and image != prev_image
                prev_image = image
            stable = fas_stable or (depth - n >= 2 and not last_changed)
        star = tuple(sorted(star))
        dh = hausdorff_distance(point, SubsetOfSpace(space, star))
        if stable and not below(dh, fas.level(n).epsilon, fas.tol_tie):
            raise InternalConsistencyError(
                f"d_H(x, X*_{n}) = {dh} is not below eps_{n} = {fas.level(n).epsilon}"
            )
        out.append(TraceLevel(n, balls[n], star, stable, dh))
    return out


# --------------------------------------------------------------------------
# diagnostics used by the tests and the CLI report


def schedule_invariants(fas: FasSequence) -> dict:
    """Check adjustedness, geometric decay and the partial-sum bound on the
    stored values.  Returns a mapping of invariant name to bool."""
    lv = fas.levels
    eps1 = lv[0].epsilon
    adjusted = all(lv[i + 1].epsilon < lv[i].eps_lower for i in range(len(lv) - 1))
    decay = all(lv[n - 1].epsilon < eps1 / 2 ** (n - 1) for n in range(2, len(lv) + 1))
    partial = True
    for n in range(len(lv)):
        total = lv[n].effective_gamma
        for m in range(n + 1, len(lv)):
            total += lv[m].effective_gamma
            if not total < lv[n].eps_upper:
                partial = False
    return {"adjusted": adjusted, "decay": decay, "partial_sums": partial}


def fas_report(fas: FasSequence) -> dict:
    levels = []
    for i, lv in enumerate(fas.levels):
        entry = {
            "level": lv.index,
            "epsilon": lv.epsilon,
            "gamma": lv.gamma,
            "gamma_effective": lv.effective_gamma,
            "size": len(lv.approx),
            "eps_upper": lv.eps_upper,
            "eps_lower": lv.eps_lower,
            "adjusted_bound": lv.eps_lower,
        }
        if i + 1 < len(fas.levels):
            entry["next_epsilon_ok"] = fas.levels[i + 1].epsilon < lv.eps_lower
        levels.append(entry)
    return {
        "space": {"name": fas.space.name, "points": len(fas.space), "diameter": fas.space.diameter},
        "levels": levels,
        "stabilized_at": fas.stabilized_at,
        "invariants": schedule_invariants(fas),
    }
