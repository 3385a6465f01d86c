"""K-theory of Cuntz-Krieger algebras with a prescribed ideal lattice.

A block matrix assigns each point of a finite T0-space a block of vertices,
with edges allowed exactly along the specialization order.  For a locally
closed subset Y the subquotient K-theory is computed from B_Y = I - A_Y^t:
K0 is its cokernel, K1 its kernel.  The i, r, and connecting maps come from
coordinate inclusion, coordinate projection, and lifting a quotient kernel
vector through B.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .diagram import (
    Arrow,
    DiagramModule,
    DiagramShape,
    SixTermContext,
    assemble_vertex,
)
from .fgab import GroupHom, PresentedGroup, direct_sum
from .finspace import FiniteSpace, carrier_name
from .intlin import IntMatrix, Solution, kernel_basis, solve_linear


@dataclass(frozen=True)
class BlockMatrix:
    """A nonnegative integer matrix in blocks indexed by the points of a space.

    ``order`` fixes the coordinate layout (a linear extension of reachability:
    whenever the block of p can reach the block of q, q comes first), so the
    full matrix is block lower triangular.
    """

    space: FiniteSpace
    order: Tuple[str, ...]
    sizes: Dict[str, int]
    entries: IntMatrix

    def __post_init__(self):
        if set(self.order) != set(self.space.points):
            raise ValueError("block order must list every point exactly once")
        total = sum(self.sizes[p] for p in self.order)
        if self.entries.rows != total or self.entries.cols != total:
            raise ValueError(f"entries must be {total}x{total}")
        if any(x < 0 for row in self.entries.data for x in row):
            raise ValueError("entries must be nonnegative")
        offs = self.offsets()
        for p in self.order:
            for q in self.order:
                block_nonzero = any(
                    self.entries.data[i][j] != 0
                    for i in offs[p]
                    for j in offs[q]
                )
                allowed = q in self.space.smallest_open(p)
                if block_nonzero and not allowed:
                    raise ValueError(
                        f"block ({p},{q}) is nonzero but {q} is outside the smallest open of {p}"
                    )

    def offsets(self) -> Dict[str, range]:
        out = {}
        at = 0
        for p in self.order:
            out[p] = range(at, at + self.sizes[p])
            at += self.sizes[p]
        return out

    def coords(self, subset: Iterable[str]) -> List[int]:
        offs = self.offsets()
        out: List[int] = []
        for p in self.order:
            if p in set(subset):
                out.extend(offs[p])
        return out

    def total_size(self) -> int:
        return self.entries.rows

    # -- serialization ------------------------------------------------------

    def to_doc(self) -> dict:
        return {
            "space": {"points": sorted(self.space.points),
                      "opens": sorted([sorted(o) for o in self.space.opens],
                                      key=lambda o: (len(o), o))},
            "blocks": {
                "order": list(self.order),
                "sizes": {p: self.sizes[p] for p in self.order},
            },
            "entries": self.entries.to_lists(),
        }

    @staticmethod
    def from_doc(doc: dict, space: Optional[FiniteSpace] = None) -> "BlockMatrix":
        if space is None:
            space = FiniteSpace(doc["space"]["points"], doc["space"]["opens"])
        rows = doc["entries"]
        entries = IntMatrix(len(rows), len(rows[0]) if rows else 0, rows)
        return BlockMatrix(
            space=space,
            order=tuple(doc["blocks"]["order"]),
            sizes={p: int(n) for p, n in doc["blocks"]["sizes"].items()},
            entries=entries,
        )


def _b_matrix(a: BlockMatrix, coords: Sequence[int]) -> IntMatrix:
    """I - A_Y^t restricted to the given coordinates."""
    n = len(coords)
    data = [[(1 if coords[i] == coords[j] else 0) - a.entries.data[coords[j]][coords[i]]
             for j in range(n)] for i in range(n)]
    return IntMatrix(n, n, data)


def _kernel_matrix(b: IntMatrix) -> IntMatrix:
    basis = kernel_basis(b)
    if not basis:
        return IntMatrix.zeros(b.cols, 0)
    return IntMatrix(b.cols, len(basis), [[v[i] for v in basis] for i in range(b.cols)])


def subquotient_groups(a: BlockMatrix, subset: Iterable[str]) -> Tuple[PresentedGroup, PresentedGroup]:
    """(K0, K1) of the subquotient on a locally closed subset."""
    s = frozenset(subset)
    if not a.space.is_locally_closed(s):
        raise ValueError(f"{carrier_name(s)} is not locally closed")
    coords = a.coords(s)
    b = _b_matrix(a, coords)
    k0 = PresentedGroup(len(coords), b)
    ker = _kernel_matrix(b)
    k1 = PresentedGroup.free(ker.cols)
    return k0, k1


class _Calculator:
    """Coordinate bookkeeping shared by filtered_k and the context oracle."""

    def __init__(self, a: BlockMatrix):
        self.a = a
        self._cache: Dict[FrozenSet[str], Tuple[List[int], IntMatrix, IntMatrix]] = {}

    def data(self, subset: FrozenSet[str]) -> Tuple[List[int], IntMatrix, IntMatrix]:
        """(coordinates, B, kernel basis matrix) for a locally closed subset."""
        if subset not in self._cache:
            coords = self.a.coords(subset)
            b = _b_matrix(self.a, coords)
            self._cache[subset] = (coords, b, _kernel_matrix(b))
        return self._cache[subset]

    def k0(self, subset: FrozenSet[str]) -> PresentedGroup:
        _, b, _ = self.data(subset)
        return PresentedGroup(b.rows, b)

    def k1(self, subset: FrozenSet[str]) -> PresentedGroup:
        return PresentedGroup.free(self.data(subset)[2].cols)

    # the three coordinate-level map constructions ---------------------------

    def inclusion_k0(self, small: FrozenSet[str], big: FrozenSet[str]) -> IntMatrix:
        sc, _, _ = self.data(small)
        bc, _, _ = self.data(big)
        pos = {c: i for i, c in enumerate(bc)}
        out = [[0] * len(sc) for _ in range(len(bc))]
        for j, c in enumerate(sc):
            out[pos[c]][j] = 1
        return IntMatrix(len(bc), len(sc), out)

    def restriction_k0(self, big: FrozenSet[str], small: FrozenSet[str]) -> IntMatrix:
        bc, _, _ = self.data(big)
        sc, _, _ = self.data(small)
        pos = {c: i for i, c in enumerate(bc)}
        out = [[0] * len(bc) for _ in range(len(sc))]
        for i, c in enumerate(sc):
            out[i][pos[c]] = 1
        return IntMatrix(len(sc), len(bc), out)

    def inclusion_k1(self, small: FrozenSet[str], big: FrozenSet[str]) -> IntMatrix:
        sc, _, sker = self.data(small)
        bc, _, bker = self.data(big)
        padded = self.inclusion_k0(small, big) @ sker
        return _in_basis(bker, padded)

    def restriction_k1(self, big: FrozenSet[str], small: FrozenSet[str]) -> IntMatrix:
        bc, _, bker = self.data(big)
        sc, _, sker = self.data(small)
        restricted = self.restriction_k0(big, small) @ bker
        return _in_basis(sker, restricted)

    def connecting(self, quotient: FrozenSet[str], ideal: FrozenSet[str]) -> IntMatrix:
        """K1(quotient) -> K0(ideal) for the extension (ideal in ideal|quotient).

        Lift a kernel vector of B_quotient by zero, apply B of the union, and
        read off the ideal coordinates.
        """
        qc, _, qker = self.data(quotient)
        ic, _, _ = self.data(ideal)
        cols = []
        for j in range(qker.cols):
            w = {c: qker.data[i][j] for i, c in enumerate(qc)}
            col = []
            for c in ic:
                # row c of I - A^t applied to the zero-extended lift: the
                # identity part vanishes off the quotient, leaving -A[d][c]
                col.append(-sum(self.a.entries.data[d][c] * w[d] for d in qc))
            cols.append(col)
        return IntMatrix(len(ic), qker.cols,
                         [[cols[j][i] for j in range(qker.cols)] for i in range(len(ic))])


def _in_basis(basis: IntMatrix, vectors: IntMatrix) -> IntMatrix:
    """Coordinates of lattice vectors in a kernel basis (always integral here)."""
    if basis.cols == 0:
        if not vectors.is_zero():
            raise ValueError("vector outside the zero lattice")
        return IntMatrix.zeros(0, vectors.cols)
    res = solve_linear(basis, vectors)
    if not isinstance(res, Solution):
        raise ValueError("vector is not in the span of the kernel basis")
    return res.particular


def filtered_k(a: BlockMatrix, shape: DiagramShape) -> DiagramModule:
    """The diagram module of subquotient K-groups over a shape of a.space."""
    if shape.space != a.space:
        raise ValueError("shape and block matrix live over different spaces")
    calc = _Calculator(a)
    groups: Dict[Tuple[str, int], PresentedGroup] = {}
    maps: Dict[Tuple[str, int], IntMatrix] = {}
    for name, subset in shape.carriers.items():
        groups[(name, 0)] = calc.k0(subset)
        groups[(name, 1)] = calc.k1(subset)
    for arrow in shape.arrows:
        s = shape.carriers[arrow.src]
        t = shape.carriers[arrow.dst]
        if arrow.kind == "i":
            maps[(arrow.key, 0)] = calc.inclusion_k0(s, t)
            maps[(arrow.key, 1)] = calc.inclusion_k1(s, t)
        elif arrow.kind == "r":
            maps[(arrow.key, 0)] = calc.restriction_k0(s, t)
            maps[(arrow.key, 1)] = calc.restriction_k1(s, t)
        else:
            # odd-to-even connecting map; the even-to-odd one vanishes
            maps[(arrow.key, 1)] = calc.connecting(s, t)
            maps[(arrow.key, 0)] = IntMatrix.zeros(groups[(arrow.dst, 1)].generators,
                                                   groups[(arrow.src, 0)].generators)
    return DiagramModule(shape, groups, maps, side="left", name=f"K({shape.name or 'shape'})")


def context_maps_from_coordinates(a: BlockMatrix, module: DiagramModule,
                                  ctx: SixTermContext) -> Dict[str, GroupHom]:
    """The six context maps computed directly from coordinates.

    This bypasses the shape's declared path data entirely, so it serves as the
    convention oracle for transcribed shapes: the path-assembled maps must
    agree with these.
    """
    calc = _Calculator(a)
    out: Dict[str, GroupHom] = {}
    asm = {(which, j): assemble_vertex(module, part, j)
           for which, part in (("U", ctx.ideal), ("Y", ctx.total), ("Q", ctx.quotient))
           for j in (0, 1)}

    def comp_sets(which: str):
        return [frozenset(module.shape.carriers[name]) for name in asm[(which, 0)].parts]

    def dims(subset, j):
        return (calc.k0(subset) if j == 0 else calc.k1(subset)).generators

    def grid(src_which, dst_which, src_j, dst_j, builder):
        rows = []
        for tset in comp_sets(dst_which):
            row = []
            for sset in comp_sets(src_which):
                mat = builder(sset, tset)
                row.append(mat if mat is not None
                           else IntMatrix.zeros(dims(tset, dst_j), dims(sset, src_j)))
            rows.append(row)
        return IntMatrix.block(rows)

    for j in (0, 1):
        inc = (calc.inclusion_k0, calc.inclusion_k1)[j]
        res = (calc.restriction_k0, calc.restriction_k1)[j]
        out[f"i{j}"] = GroupHom(
            asm[("U", j)].group, asm[("Y", j)].group,
            grid("U", "Y", j, j, lambda s, t: inc(s, t) if s <= t else None))
        out[f"r{j}"] = GroupHom(
            asm[("Y", j)].group, asm[("Q", j)].group,
            grid("Y", "Q", j, j, lambda s, t: res(s, t) if t <= s else None))
        out[f"d{j}"] = GroupHom(
            asm[("Q", j)].group, asm[("U", 1 - j)].group,
            grid("Q", "U", j, 1 - j,
                 lambda s, t: calc.connecting(s, t) if j == 1 else None))
    return out


def realize_space_random(space: FiniteSpace, max_block: int = 3,
                         seed: int = 0, max_entry: int = 3) -> BlockMatrix:
    """A random block matrix realizing the space as its ideal lattice.

    Every diagonal block is strictly positive with diagonal at least 2, so
    each component is irreducible and supports at least two cycles; every
    admissible off-diagonal block carries at least one positive entry, so
    component reachability matches the specialization order exactly.
    """
    if max_block < 1:
        raise ValueError("block size bound must be at least 1")
    rng = random.Random(seed)
    order = sorted(space.points, key=lambda p: (len(space.smallest_open(p)), p))
    sizes = {p: rng.randint(1, max_block) for p in order}
    total = sum(sizes.values())
    entries = [[0] * total for _ in range(total)]
    offs: Dict[str, range] = {}
    at = 0
    for p in order:
        offs[p] = range(at, at + sizes[p])
        at += sizes[p]
    for p in order:
        for i in offs[p]:
            for j in offs[p]:
                entries[i][j] = rng.randint(1, max_entry) + (1 if i == j else 0)
        for q in space.smallest_open(p):
            if q == p:
                continue
            block = [(i, j) for i in offs[p] for j in offs[q]]
            for (i, j) in block:
                entries[i][j] = rng.randint(0, max_entry)
            i, j = block[rng.randrange(len(block))]
            entries[i][j] = max(entries[i][j], 1)
    return BlockMatrix(space=space, order=tuple(order), sizes=sizes,
                       entries=IntMatrix(total, total, entries))
