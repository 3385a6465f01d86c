"""Finite T0-spaces stored as explicit open-set families.

The specialization preorder, smallest open sets, and locally closed subsets
are all derived from the open-set family; the family itself is the primary
datum so the built-in spaces can be entered extensionally.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple


def carrier_name(points: Iterable[str]) -> str:
    """Canonical display name for a subset: '123'-style when labels are short."""
    pts = sorted(points)
    if all(len(p) == 1 for p in pts):
        return "".join(pts) if pts else "{}"
    return ",".join(pts) if pts else "{}"


@dataclass(frozen=True)
class LocallyClosedSet:
    """A difference U fslash V of opens, with the witnessing pair."""

    carrier: FrozenSet[str]
    witness: Tuple[FrozenSet[str], FrozenSet[str]]
    connected: bool

    @property
    def name(self) -> str:
        return carrier_name(self.carrier)


class FiniteSpace:
    """A finite T0 topological space."""

    def __init__(self, points: Sequence[str], opens: Iterable[Iterable[str]]):
        self.points: Tuple[str, ...] = tuple(points)
        if len(set(self.points)) != len(self.points):
            raise ValueError("duplicate point labels")
        pts = frozenset(self.points)
        fam = {frozenset(o) for o in opens}
        for o in fam:
            if not o <= pts:
                raise ValueError(f"open set {sorted(o)} contains unknown points")
        if frozenset() not in fam or pts not in fam:
            raise ValueError("opens must contain the empty set and the full space")
        for a in fam:
            for b in fam:
                if a | b not in fam:
                    raise ValueError(f"opens not closed under union: {sorted(a)} | {sorted(b)}")
                if a & b not in fam:
                    raise ValueError(f"opens not closed under intersection: {sorted(a)} & {sorted(b)}")
        self.opens: FrozenSet[FrozenSet[str]] = frozenset(fam)
        self._closure: Dict[str, FrozenSet[str]] = {
            x: frozenset(p for p in self.points if all(x in o for o in fam if p in o))
            for x in self.points
        }
        closures = set(self._closure.values())
        if len(closures) != len(self.points):
            raise ValueError("space is not T0: two points share a closure")
        self._min_open: Dict[str, FrozenSet[str]] = {}
        for x in self.points:
            m = pts
            for o in fam:
                if x in o and len(o) < len(m):
                    m = o
            self._min_open[x] = m

    # -- constructors and serialization ------------------------------------

    @staticmethod
    def from_json(text: str) -> "FiniteSpace":
        doc = json.loads(text)
        return FiniteSpace(doc["points"], doc["opens"])

    def to_json(self) -> str:
        return json.dumps(
            {
                "points": sorted(self.points),
                "opens": sorted([sorted(o) for o in self.opens], key=lambda o: (len(o), o)),
            },
            sort_keys=True,
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FiniteSpace)
            and set(self.points) == set(other.points)
            and self.opens == other.opens
        )

    def __hash__(self) -> int:
        return hash((frozenset(self.points), self.opens))

    # -- basic structure ----------------------------------------------------

    def closure(self, x: str) -> FrozenSet[str]:
        self._require_point(x)
        return self._closure[x]

    def smallest_open(self, x: str) -> FrozenSet[str]:
        self._require_point(x)
        return self._min_open[x]

    def boundary(self, x: str) -> FrozenSet[str]:
        """The smallest open around x minus x itself (always open)."""
        return self.smallest_open(x) - {x}

    def is_open(self, subset: Iterable[str]) -> bool:
        return frozenset(subset) in self.opens

    def specialization_arrows(self, x: str) -> List[str]:
        """Points y with an immediate arrow y -> x: cl(x) inside cl(y), nothing between."""
        self._require_point(x)
        cx = self._closure[x]
        bigger = [y for y in self.points if y != x and cx < self._closure[y]]
        out = []
        for y in bigger:
            cy = self._closure[y]
            if not any(cx < self._closure[z] < cy for z in bigger if z != y):
                out.append(y)
        return sorted(out)

    def arrow_graph(self) -> Dict[str, List[str]]:
        """x -> list of sources y of immediate arrows y -> x."""
        return {x: self.specialization_arrows(x) for x in self.points}

    def all_arrows(self) -> List[Tuple[str, str]]:
        """All immediate arrows (y, x) meaning y -> x."""
        out = []
        for x in self.points:
            for y in self.specialization_arrows(x):
                out.append((y, x))
        return sorted(out)

    def comparable(self, a: str, b: str) -> bool:
        return a in self._closure[b] or b in self._closure[a]

    def is_connected_subset(self, subset: Iterable[str]) -> bool:
        sub = list(dict.fromkeys(subset))
        if not sub:
            return False
        seen = {sub[0]}
        frontier = [sub[0]]
        members = set(sub)
        while frontier:
            cur = frontier.pop()
            for other in members - seen:
                if self.comparable(cur, other):
                    seen.add(other)
                    frontier.append(other)
        return seen == members

    def is_connected(self) -> bool:
        return self.is_connected_subset(self.points)

    # -- locally closed sets --------------------------------------------------

    def locally_closed_witness(self, subset: Iterable[str]) -> Optional[Tuple[FrozenSet[str], FrozenSet[str]]]:
        """An (U, V) open pair with subset = U fslash V, or None."""
        s = frozenset(subset)
        # the minimal admissible U is the union of smallest opens of members
        u = frozenset().union(*[self._min_open[x] for x in s]) if s else frozenset()
        v = u - s
        if u in self.opens and v in self.opens and v <= u:
            return (u, v)
        return None

    def is_locally_closed(self, subset: Iterable[str]) -> bool:
        return self.locally_closed_witness(subset) is not None

    def locally_closed_connected(self) -> List[LocallyClosedSet]:
        """Complete duplicate-free enumeration of connected nonempty locally closed sets."""
        found: Dict[FrozenSet[str], LocallyClosedSet] = {}
        for u in self.opens:
            for v in self.opens:
                if v < u:
                    s = u - v
                    if s and s not in found and self.is_connected_subset(s):
                        found[s] = LocallyClosedSet(carrier=s, witness=(u, v), connected=True)
        return sorted(found.values(), key=lambda lc: (len(lc.carrier), lc.name))

    def locally_closed_all(self) -> List[FrozenSet[str]]:
        """All nonempty locally closed subsets, connected or not."""
        out: Set[FrozenSet[str]] = set()
        for u in self.opens:
            for v in self.opens:
                if v < u:
                    out.add(u - v)
        out.discard(frozenset())
        return sorted(out, key=lambda s: (len(s), carrier_name(s)))

    def components(self, subset: Iterable[str]) -> List[FrozenSet[str]]:
        """Connected components of a subset, sorted by name."""
        remaining = set(subset)
        comps: List[FrozenSet[str]] = []
        while remaining:
            seed = next(iter(remaining))
            comp = {seed}
            frontier = [seed]
            while frontier:
                cur = frontier.pop()
                for other in list(remaining - comp):
                    if self.comparable(cur, other):
                        comp.add(other)
                        frontier.append(other)
            comps.append(frozenset(comp))
            remaining -= comp
        return sorted(comps, key=carrier_name)

    def relative_opens(self, subset: Iterable[str]) -> List[FrozenSet[str]]:
        s = frozenset(subset)
        return sorted({o & s for o in self.opens}, key=lambda o: (len(o), carrier_name(o)))

    def is_relatively_open(self, part: Iterable[str], whole: Iterable[str]) -> bool:
        p, w = frozenset(part), frozenset(whole)
        return p <= w and any(o & w == p for o in self.opens)

    # -- accordion test and paths ----------------------------------------------

    def is_accordion(self) -> bool:
        """True iff the symmetrized immediate-arrow graph is a simple path."""
        if not self.is_connected():
            raise ValueError("accordion test requires a connected space")
        if len(self.points) == 1:
            return True
        degree = {x: 0 for x in self.points}
        edges = set()
        for (y, x) in self.all_arrows():
            edges.add(frozenset((y, x)))
        for e in edges:
            for x in e:
                degree[x] += 1
        if len(edges) != len(self.points) - 1:
            return False
        ends = [x for x in self.points if degree[x] == 1]
        return all(d <= 2 for d in degree.values()) and len(ends) == 2

    def paths_to(self, x: str) -> List[Tuple[str, ...]]:
        """All directed paths (as point sequences) of length >= 1 ending at x."""
        self._require_point(x)
        out: List[Tuple[str, ...]] = []

        def extend(path: Tuple[str, ...]) -> None:
            head = path[0]
            for y in self.specialization_arrows(head):
                longer = (y,) + path
                out.append(longer)
                extend(longer)

        extend((x,))
        return sorted(out)

    def distinct_path_pairs(self, x: str) -> List[Tuple[Tuple[str, ...], Tuple[str, ...]]]:
        """Unordered pairs of distinct directed paths into x with a common source."""
        paths = self.paths_to(x)
        pairs = []
        for i in range(len(paths)):
            for j in range(i + 1, len(paths)):
                if paths[i][0] == paths[j][0]:
                    pairs.append((paths[i], paths[j]))
        return pairs

    def _require_point(self, x: str) -> None:
        if x not in self._closure:
            raise KeyError(f"unknown point {x!r}")


def builtin_space(name: str) -> FiniteSpace:
    """The two featured four-point spaces, by their conventional names."""
    if name == "CSP":
        return FiniteSpace(
            ["1", "2", "3", "4"],
            [[], ["4"], ["2", "4"], ["3", "4"], ["2", "3", "4"], ["1", "2", "3", "4"]],
        )
    if name == "S21":
        return FiniteSpace(
            ["1", "2", "3", "4"],
            [[], ["3"], ["4"], ["3", "4"], ["1", "3", "4"], ["2", "3", "4"], ["1", "2", "3", "4"]],
        )
    raise KeyError(f"unknown built-in space {name!r}")


def point_space() -> FiniteSpace:
    return FiniteSpace(["1"], [[], ["1"]])


def space_from_spec(spec: str) -> FiniteSpace:
    """Resolve a `--space` argument: a built-in name or a JSON file payload."""
    try:
        return builtin_space(spec)
    except KeyError:
        return FiniteSpace.from_json(spec)
