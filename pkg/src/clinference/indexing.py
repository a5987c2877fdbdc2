"""Index sets for composite likelihood components.

A composite likelihood on ``d`` coordinates is assembled from marginal
factors, one per nonempty subset of ``{1, ..., d}``, and conditional
factors, one per *division*: an ordered pair of disjoint nonempty subsets
``(left, right)`` giving the density of ``x_left`` given ``x_right``.
Indices are 1-based throughout to match the usual mathematical notation;
:attr:`SubsetIndex.columns` converts to 0-based array columns.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import InvalidWeightsError

MAX_SUBSET_DIM = 16
MAX_DIVISION_DIM = 10


@dataclass(frozen=True, order=True)
class SubsetIndex:
    """Nonempty, strictly increasing tuple of 1-based coordinate labels."""

    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(int(m) for m in self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise ValueError("subset index must be nonempty")
        if any(m < 1 for m in members):
            raise ValueError(f"subset members must be >= 1, got {members}")
        if any(a >= b for a, b in zip(members, members[1:])):
            raise ValueError(f"subset members must be strictly increasing, got {members}")

    @classmethod
    def of(cls, members: Iterable[int]) -> "SubsetIndex":
        """Build from any iterable of labels, sorting them first."""
        ms = sorted(int(m) for m in members)
        if len(set(ms)) != len(ms):
            raise ValueError(f"duplicate subset members in {ms}")
        return cls(tuple(ms))

    @property
    def columns(self) -> list[int]:
        return [m - 1 for m in self.members]

    def __len__(self) -> int:
        return len(self.members)

    def valid_for(self, d: int) -> bool:
        return self.members[-1] <= d

    def _key(self):
        return (len(self.members), self.members)

    def __repr__(self) -> str:
        return "{" + ",".join(map(str, self.members)) + "}"


@dataclass(frozen=True)
class DivisionIndex:
    """Ordered pair ``(left, right)`` of disjoint nonempty subsets.

    Indexes the conditional density of ``x_left`` given ``x_right``. The union
    need not cover every coordinate.
    """

    left: SubsetIndex
    right: SubsetIndex

    def __post_init__(self):
        if not isinstance(self.left, SubsetIndex):
            object.__setattr__(self, "left", SubsetIndex.of(self.left))
        if not isinstance(self.right, SubsetIndex):
            object.__setattr__(self, "right", SubsetIndex.of(self.right))
        if set(self.left.members) & set(self.right.members):
            raise ValueError(f"division sides overlap: {self.left} | {self.right}")

    def valid_for(self, d: int) -> bool:
        return self.left.valid_for(d) and self.right.valid_for(d)

    def _key(self):
        return (self.left._key(), self.right._key())

    def __repr__(self) -> str:
        return f"({self.left!r}|{self.right!r})"


def _check_dim(d: int, cap: int) -> int:
    if isinstance(d, bool) or int(d) != d or not 1 <= d <= cap:
        raise ValueError(f"dimension must be an integer in [1, {cap}], got {d!r}")
    return int(d)


def enumerate_subsets(d: int) -> list[SubsetIndex]:
    """All nonempty subsets of ``{1..d}``, ordered by size then lexicographically.

    >>> enumerate_subsets(2)
    [{1}, {2}, {1,2}]
    """
    d = _check_dim(d, MAX_SUBSET_DIM)
    out = []
    for size in range(1, d + 1):
        out.extend(SubsetIndex(c) for c in itertools.combinations(range(1, d + 1), size))
    return out


def enumerate_divisions(d: int) -> list[DivisionIndex]:
    """All ordered pairs of disjoint nonempty subsets of ``{1..d}``.

    There are ``3**d - 2**(d+1) + 1`` of them. Ordered by the left subset in
    :func:`enumerate_subsets` order, then by the right subset likewise.
    """
    d = _check_dim(d, MAX_DIVISION_DIM)
    subsets = enumerate_subsets(d)
    out = []
    for left in subsets:
        taken = set(left.members)
        for right in subsets:
            if taken.isdisjoint(right.members):
                out.append(DivisionIndex(left, right))
    return out


def _as_subset(key) -> SubsetIndex:
    return key if isinstance(key, SubsetIndex) else SubsetIndex.of(key)


def _as_division(key) -> DivisionIndex:
    if isinstance(key, DivisionIndex):
        return key
    left, right = key
    return DivisionIndex(_as_subset(left), _as_subset(right))


@dataclass(frozen=True)
class WeightScheme:
    """Non-negative weights on marginal (``sigma``) and conditional (``tau``) factors.

    Keys may be given as index objects or as plain tuples, e.g.
    ``sigma={(1, 2): 1.0}`` or ``tau={((1,), (2,)): 0.5}``. Absent keys have
    weight zero.
    """

    d: int
    sigma: Mapping[SubsetIndex, float] = field(default_factory=dict)
    tau: Mapping[DivisionIndex, float] = field(default_factory=dict)

    def __post_init__(self):
        d = _check_dim(self.d, MAX_SUBSET_DIM)
        object.__setattr__(self, "d", d)
        sigma = {_as_subset(k): float(v) for k, v in dict(self.sigma).items()}
        tau = {_as_division(k): float(v) for k, v in dict(self.tau).items()}
        for key, w in itertools.chain(sigma.items(), tau.items()):
            if not key.valid_for(d):
                raise InvalidWeightsError(f"index {key!r} is out of range for d={d}")
            if not math.isfinite(w) or w < 0:
                raise InvalidWeightsError(f"weight for {key!r} must be finite and >= 0, got {w}")
        object.__setattr__(self, "sigma", dict(sorted(sigma.items(), key=lambda kv: kv[0]._key())))
        object.__setattr__(self, "tau", dict(sorted(tau.items(), key=lambda kv: kv[0]._key())))

    def __hash__(self):
        return hash((self.d, tuple(self.sigma.items()), tuple(self.tau.items())))

    def scaled(self, factor: float) -> "WeightScheme":
        return WeightScheme(
            self.d,
            {k: factor * v for k, v in self.sigma.items()},
            {k: factor * v for k, v in self.tau.items()},
        )

    def to_json(self) -> str:
        payload = {
            "d": self.d,
            "sigma": [{"set": list(k.members), "w": v} for k, v in self.sigma.items()],
            "tau": [
                {"left": list(k.left.members), "right": list(k.right.members), "w": v}
                for k, v in self.tau.items()
            ],
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "WeightScheme":
        obj = json.loads(text)
        try:
            sigma = {tuple(e["set"]): e["w"] for e in obj.get("sigma", [])}
            tau = {(tuple(e["left"]), tuple(e["right"])): e["w"] for e in obj.get("tau", [])}
            return cls(obj["d"], sigma, tau)
        except (KeyError, TypeError) as exc:
            raise InvalidWeightsError(f"malformed weight scheme JSON: {exc}") from exc


def total_weight(w: WeightScheme) -> float:
    """Sum of all marginal and conditional weights; must be strictly positive."""
    total = math.fsum(w.sigma.values()) + math.fsum(w.tau.values())
    if not total > 0:
        raise InvalidWeightsError("weight scheme has zero total weight")
    return total


def full_conditional_scheme(d: int) -> WeightScheme:
    """Equal weights ``1/d`` on each full conditional ``x_j | x_{-j}``.

    For ``d = 2`` this is the pairwise conditional scheme
    ``[p(x1|x2) p(x2|x1)]^(1/2)``.
    """
    d = _check_dim(d, MAX_DIVISION_DIM)
    if d < 2:
        raise ValueError("full conditionals need d >= 2")
    everything = set(range(1, d + 1))
    tau = {((j,), tuple(sorted(everything - {j}))): 1.0 / d for j in range(1, d + 1)}
    return WeightScheme(d, {}, tau)


def joint_scheme(d: int) -> WeightScheme:
    """Unit weight on the full joint density, which recovers ordinary likelihood."""
    return WeightScheme(d, {tuple(range(1, d + 1)): 1.0}, {})
