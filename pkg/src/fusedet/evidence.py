"""Dempster-Shafer evidence machinery for confidence fusion.

A ``Frame`` holds up to 16 mutually exclusive hypotheses; subsets of the
frame are encoded as bitmasks over the label positions so the whole power
set stays enumerable. A ``MassFunction`` is a basic probability assignment:
nonnegative masses over subsets, zero on the empty set, summing to one.

Two combination routes are provided:

* ``dempster_combine`` — Dempster's rule over general power-set masses,
  implemented by pairwise folding of intersection products and
  renormalization by the non-conflicting mass.
* ``fuse_weighted`` — the conflict-mitigating variant: each evidence is
  first discounted per hypothesis by a compatibility-derived weight (moving
  the removed mass onto the full frame), then combined with Dempster's rule.

Mass functions are immutable values and all operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Frame",
    "MassFunction",
    "WeightedMassSet",
    "FrameMismatchError",
    "TotalConflictError",
    "mass_from_confidence",
    "compatibility",
    "weight_masses",
    "dempster_combine",
    "fuse_weighted",
    "belief",
    "plausibility",
]

MAX_HYPOTHESES = 16

# Subsets carrying less than this after a combination step are dropped and
# the rest renormalized, so float dust cannot accumulate over repeated folds.
_PRUNE_EPS = 1e-15

_MASS_SUM_TOL = 1e-9


class FrameMismatchError(ValueError):
    """Raised when mass functions over different frames are mixed."""


class TotalConflictError(ArithmeticError):
    """Raised when combined evidence is fully conflicting (K = 0)."""


@dataclass(frozen=True)
class Frame:
    """An ordered frame of discernment; subsets are bitmasks over label positions."""

    labels: tuple[str, ...]

    def __init__(self, labels: Iterable[str]) -> None:
        labels = tuple(labels)
        if not 1 <= len(labels) <= MAX_HYPOTHESES:
            raise ValueError(f"frame needs 1..{MAX_HYPOTHESES} hypotheses, got {len(labels)}")
        if len(set(labels)) != len(labels) or any(not lab for lab in labels):
            raise ValueError("hypothesis labels must be unique and non-empty")
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def theta(self) -> int:
        """Bitmask of the full frame (total ignorance)."""
        return (1 << len(self.labels)) - 1

    def singleton(self, k: int) -> int:
        """Bitmask of the k-th hypothesis."""
        if not 0 <= k < len(self.labels):
            raise IndexError(f"hypothesis index {k} out of range")
        return 1 << k

    def mask_of(self, labels: Iterable[str]) -> int:
        mask = 0
        for lab in labels:
            mask |= 1 << self.labels.index(lab)
        return mask

    def labels_of(self, mask: int) -> tuple[str, ...]:
        return tuple(lab for k, lab in enumerate(self.labels) if mask >> k & 1)


@dataclass(frozen=True)
class MassFunction:
    """A basic probability assignment over the power set of a frame.

    ``masses`` maps subset bitmasks to mass; zero-mass subsets may be
    omitted. Construction enforces m(empty) = 0, nonnegativity, and unit sum.
    """

    frame: Frame
    masses: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean: dict[int, float] = {}
        total = 0.0
        for mask, value in self.masses.items():
            if not 0 <= mask <= self.frame.theta:
                raise ValueError(f"subset mask {mask:#x} outside the frame's power set")
            if value < 0:
                raise ValueError(f"negative mass {value} on subset {mask:#x}")
            if mask == 0 and value != 0:
                raise ValueError("the empty set must carry zero mass")
            if mask != 0 and value != 0:
                clean[mask] = clean.get(mask, 0.0) + value
                total += value
        if abs(total - 1.0) > _MASS_SUM_TOL:
            raise ValueError(f"masses must sum to 1, got {total!r}")
        object.__setattr__(self, "masses", clean)

    def __getitem__(self, mask: int) -> float:
        return self.masses.get(mask, 0.0)

    @classmethod
    def vacuous(cls, frame: Frame) -> "MassFunction":
        """Total ignorance: all mass on the full frame."""
        return cls(frame, {frame.theta: 1.0})

    def focal_sets(self) -> dict[int, float]:
        return dict(self.masses)


@dataclass(frozen=True)
class WeightedMassSet:
    """Result of compatibility weighting: originals, weights, discounted masses.

    ``weights[i][k]`` is the credibility of evidence i on hypothesis k; the
    discounted mass functions carry the removed mass as residual ignorance on
    the full frame.
    """

    original: tuple[MassFunction, ...]
    weights: tuple[tuple[float, ...], ...]
    discounted: tuple[MassFunction, ...]


def _require_common_frame(evidence: Sequence[MassFunction]) -> Frame:
    frame = evidence[0].frame
    for m in evidence[1:]:
        if m.frame != frame:
            raise FrameMismatchError("mass functions must share a frame")
    return frame


def mass_from_confidence(frame: Frame, score: float) -> MassFunction:
    """Turn a detector confidence into a mass function on a binary frame.

    The frame's first label is the positive hypothesis (target present);
    the confidence goes there and the remainder onto the second label.
    No mass is reserved for ignorance.
    """
    if frame.size != 2:
        raise FrameMismatchError(f"confidence masses need a binary frame, got {frame.size} hypotheses")
    if not 0.0 <= score <= 1.0:
        raise ValueError(f"confidence must lie in [0, 1], got {score!r}")
    return MassFunction(frame, {frame.singleton(0): score, frame.singleton(1): 1.0 - score})


def _agreement(a: float, b: float) -> float:
    # 2ab / (a^2 + b^2), evaluated as 2t / (1 + t^2) with t = min/max so tiny
    # masses cannot underflow the denominator; equal masses (including 0/0,
    # where both sources assign the hypothesis nothing) agree perfectly.
    if a == b:
        return 1.0
    t = a / b if a < b else b / a
    return min(1.0, 2.0 * t / (1.0 + t * t))


def compatibility(mi: MassFunction, mj: MassFunction, k: int) -> float:
    """Agreement of two evidences on singleton hypothesis k: 2ab / (a^2 + b^2).

    Equals 1 exactly when the two masses agree (including the 0/0 case), and
    is bounded by 1 via the AM-GM inequality.
    """
    if mi.frame != mj.frame:
        raise FrameMismatchError("compatibility requires a common frame")
    mask = mi.frame.singleton(k)
    return _agreement(mi[mask], mj[mask])


def _singleton_table(evidence: Sequence[MassFunction]) -> list[list[float]]:
    """Per-evidence singleton masses, rejecting mass on other proper subsets."""
    frame = evidence[0].frame
    table = []
    for m in evidence:
        for mask in m.masses:
            if mask != frame.theta and bin(mask).count("1") != 1:
                raise ValueError(
                    "weighting needs simple-support evidence (singletons plus the "
                    f"full frame); found mass on subset {frame.labels_of(mask)!r}"
                )
        table.append([m[frame.singleton(k)] for k in range(frame.size)])
    return table


def weight_masses(evidence: Sequence[MassFunction]) -> WeightedMassSet:
    """Discount each evidence per hypothesis by its compatibility with the others.

    For every evidence i and singleton hypothesis k the pairwise agreements
    R_ij(k) are summed over all j (the self term is 1), reduced by 1 and
    normalized by N-1 to give a weight in [0, 1]. Each singleton mass is
    scaled by its weight; the removed mass becomes residual ignorance on the
    full frame. Fully agreeing inputs pass through unchanged.
    """
    if len(evidence) < 2:
        raise ValueError(f"weighting needs at least two evidences, got {len(evidence)}")
    frame = _require_common_frame(evidence)
    table = _singleton_table(evidence)
    n = len(evidence)

    weights: list[tuple[float, ...]] = []
    discounted: list[MassFunction] = []
    for i in range(n):
        row: list[float] = []
        for k in range(frame.size):
            agreement = sum(_agreement(table[i][k], table[j][k]) for j in range(n))
            row.append((agreement - 1.0) / (n - 1))
        weights.append(tuple(row))

        masses = {frame.singleton(k): row[k] * table[i][k] for k in range(frame.size)}
        residual = 1.0 - sum(masses.values())
        masses[frame.theta] = masses.get(frame.theta, 0.0) + max(residual, 0.0)
        discounted.append(MassFunction(frame, masses))

    return WeightedMassSet(tuple(evidence), tuple(weights), tuple(discounted))


def _combine_pair(m1: MassFunction, m2: MassFunction) -> MassFunction:
    acc: dict[int, float] = {}
    conflict = 0.0
    for s1, v1 in m1.masses.items():
        for s2, v2 in m2.masses.items():
            inter = s1 & s2
            product = v1 * v2
            if inter:
                acc[inter] = acc.get(inter, 0.0) + product
            else:
                conflict += product
    k = 1.0 - conflict
    if k <= 1e-12:
        raise TotalConflictError("evidence is in total conflict; Dempster's rule is undefined")
    kept = {mask: value / k for mask, value in acc.items() if value / k > _PRUNE_EPS}
    total = sum(kept.values())
    return MassFunction(m1.frame, {mask: value / total for mask, value in kept.items()})


def dempster_combine(evidence: Sequence[MassFunction]) -> MassFunction:
    """Combine evidences with Dempster's rule (associative pairwise folding).

    Product masses are accumulated onto subset intersections, the mass
    landing on the empty set is discarded and the rest renormalized. A
    single evidence is returned unchanged; total conflict raises rather
    than producing NaNs.
    """
    if not evidence:
        raise ValueError("need at least one mass function")
    _require_common_frame(evidence)
    combined = evidence[0]
    for m in evidence[1:]:
        combined = _combine_pair(combined, m)
    return combined


def fuse_weighted(evidence: Sequence[MassFunction]) -> MassFunction:
    """Compatibility-weighted fusion: discount first, then Dempster-combine."""
    return dempster_combine(weight_masses(evidence).discounted)


def belief(m: MassFunction, subset: int) -> float:
    """Total mass committed to subsets of ``subset``."""
    return sum(value for mask, value in m.masses.items() if mask & ~subset == 0)


def plausibility(m: MassFunction, subset: int) -> float:
    """Total mass not committed against ``subset`` (intersecting focal sets)."""
    return sum(value for mask, value in m.masses.items() if mask & subset)
