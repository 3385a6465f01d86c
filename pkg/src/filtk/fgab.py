"""Finitely generated abelian groups presented by relation matrices.

A group is Z^g modulo the column span of its relation matrix.  Groups stay in
their raw presentation: arrow matrices elsewhere in the library are stated
against chosen generators, and canonicalizing everything eagerly would destroy
those choices.  Canonical data appears only through :func:`invariant_factors`
and the explicit :func:`canonical_form`.

Equality of homomorphisms always means equality modulo the codomain
relations, decided by exact lattice membership.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .intlin import (
    IntMatrix,
    Infeasible,
    Solution,
    hermite_normal_form,
    kernel_basis,
    smith_normal_form,
    solve_linear,
)


@dataclass(frozen=True)
class PresentedGroup:
    """Z^generators modulo the column span of ``relations``."""

    generators: int
    relations: IntMatrix

    def __post_init__(self):
        if self.relations.rows != self.generators:
            raise ValueError(
                f"relation matrix has {self.relations.rows} rows for {self.generators} generators"
            )

    # -- constructors ------------------------------------------------------

    @staticmethod
    def free(rank: int) -> "PresentedGroup":
        return PresentedGroup(rank, IntMatrix.zeros(rank, 0))

    @staticmethod
    def cyclic(order: int) -> "PresentedGroup":
        return PresentedGroup(1, IntMatrix.from_rows([[order]]))

    @staticmethod
    def trivial() -> "PresentedGroup":
        return PresentedGroup(0, IntMatrix.zeros(0, 0))

    @staticmethod
    def from_invariants(free_rank: int, torsion: Sequence[int]) -> "PresentedGroup":
        """Canonical presentation: torsion generators first, then free ones."""
        n = len(torsion) + free_rank
        rel = IntMatrix.zeros(n, len(torsion))
        cells = rel.to_lists()
        for i, t in enumerate(torsion):
            cells[i][i] = t
        return PresentedGroup(n, IntMatrix(n, len(torsion), cells))

    # -- invariants ----------------------------------------------------------

    def invariant_factors(self) -> Tuple[int, Tuple[int, ...]]:
        """(free_rank, torsion) with torsion a divisibility chain of ints >= 2."""
        dec = smith_normal_form(self.relations)
        nonzero = dec.invariant_factors()
        free_rank = self.generators - len(nonzero)
        torsion = tuple(d for d in nonzero if d != 1)
        return free_rank, torsion

    def is_trivial(self) -> bool:
        free, torsion = self.invariant_factors()
        return free == 0 and not torsion

    def order(self) -> Optional[int]:
        """Group order, or None when infinite."""
        free, torsion = self.invariant_factors()
        if free:
            return None
        n = 1
        for t in torsion:
            n *= t
        return n

    def is_free(self) -> bool:
        return not self.invariant_factors()[1]

    def isomorphic(self, other: "PresentedGroup") -> bool:
        return self.invariant_factors() == other.invariant_factors()

    def describe(self) -> str:
        free, torsion = self.invariant_factors()
        parts = [f"Z_{t}" for t in torsion]
        if free == 1:
            parts.append("Z")
        elif free > 1:
            parts.append(f"Z^{free}")
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class GroupHom:
    """A homomorphism given by a cod.generators x dom.generators matrix."""

    dom: PresentedGroup
    cod: PresentedGroup
    matrix: IntMatrix

    def __post_init__(self):
        if self.matrix.rows != self.cod.generators or self.matrix.cols != self.dom.generators:
            raise ValueError(
                f"hom matrix is {self.matrix.rows}x{self.matrix.cols}, expected "
                f"{self.cod.generators}x{self.dom.generators}"
            )

    @staticmethod
    def identity(g: PresentedGroup) -> "GroupHom":
        return GroupHom(g, g, IntMatrix.identity(g.generators))

    @staticmethod
    def zero(dom: PresentedGroup, cod: PresentedGroup) -> "GroupHom":
        return GroupHom(dom, cod, IntMatrix.zeros(cod.generators, dom.generators))

    def compose(self, first: "GroupHom") -> "GroupHom":
        """self o first (apply ``first``, then ``self``)."""
        if first.cod.generators != self.dom.generators:
            raise ValueError("homs are not composable")
        return GroupHom(first.dom, self.cod, self.matrix @ first.matrix)

    def is_zero(self) -> bool:
        return in_relation_span(self.cod, self.matrix)


@dataclass(frozen=True)
class WellDefined:
    ok: bool
    # when ok: the solving matrix (coefficients writing M @ dom.relations in
    # terms of cod.relations); when not: the failing relation column
    certificate: Union[IntMatrix, int, None]


def in_relation_span(g: PresentedGroup, cols: IntMatrix) -> bool:
    """True iff every column of ``cols`` is zero in the group g."""
    if cols.rows != g.generators:
        raise ValueError("ambient rank mismatch")
    if cols.is_zero():
        return True
    return isinstance(solve_linear(g.relations, cols), Solution)


def is_well_defined(h: GroupHom) -> WellDefined:
    """Check that h.matrix maps the domain relation lattice into the codomain's."""
    image_of_relations = h.matrix @ h.dom.relations
    res = solve_linear(h.cod.relations, image_of_relations)
    if isinstance(res, Solution):
        return WellDefined(ok=True, certificate=res.particular)
    return WellDefined(ok=False, certificate=res.column)


def homs_equal(a: GroupHom, b: GroupHom) -> bool:
    """Equality modulo codomain relations."""
    if a.dom.generators != b.dom.generators or a.cod.generators != b.cod.generators:
        return False
    return in_relation_span(a.cod, a.matrix - b.matrix)


def _preimage_lattice(h: GroupHom) -> IntMatrix:
    """Basis (as columns) of {x in Z^dom : h.matrix @ x in colspan(cod.relations)}."""
    stacked = h.matrix.hstack(-h.cod.relations)
    basis = kernel_basis(stacked)
    proj = [v[: h.dom.generators] for v in basis]
    if not proj:
        return IntMatrix.zeros(h.dom.generators, 0)
    raw = IntMatrix(h.dom.generators, len(proj), [[v[i] for v in proj] for i in range(h.dom.generators)])
    h_form = hermite_normal_form(raw)
    keep = [j for j in range(h_form.cols) if any(h_form.data[i][j] != 0 for i in range(h_form.rows))]
    return h_form.submatrix(range(h_form.rows), keep)


def kernel(h: GroupHom) -> Tuple[PresentedGroup, GroupHom]:
    """Kernel of the induced map, with its inclusion into the domain."""
    _require_well_defined(h)
    lat = _preimage_lattice(h)
    # domain relations lie inside the preimage lattice; express them there
    if lat.cols == 0:
        ker = PresentedGroup.trivial()
        return ker, GroupHom(ker, h.dom, IntMatrix.zeros(h.dom.generators, 0))
    res = solve_linear(lat, h.dom.relations)
    if not isinstance(res, Solution):  # pragma: no cover - structural guarantee
        raise RuntimeError("domain relations escaped the kernel lattice")
    ker = PresentedGroup(lat.cols, res.particular)
    return ker, GroupHom(ker, h.dom, lat)


def image(h: GroupHom) -> Tuple[PresentedGroup, GroupHom, GroupHom]:
    """Image subgroup with (image -> cod) inclusion and (dom -> image) projection."""
    _require_well_defined(h)
    lat = _preimage_lattice(h)
    img = PresentedGroup(h.dom.generators, lat)
    incl = GroupHom(img, h.cod, h.matrix)
    proj = GroupHom(h.dom, img, IntMatrix.identity(h.dom.generators))
    return img, incl, proj


def cokernel(h: GroupHom) -> Tuple[PresentedGroup, GroupHom]:
    """Cokernel cod/im(h) with the canonical projection."""
    _require_well_defined(h)
    coker = PresentedGroup(h.cod.generators, h.cod.relations.hstack(h.matrix))
    return coker, GroupHom(h.cod, coker, IntMatrix.identity(h.cod.generators))


def is_injective(h: GroupHom) -> bool:
    return kernel(h)[0].is_trivial()


def is_surjective(h: GroupHom) -> bool:
    return cokernel(h)[0].is_trivial()


def is_isomorphism(h: GroupHom) -> bool:
    wd = is_well_defined(h)
    return wd.ok and is_injective(h) and is_surjective(h)


def is_exact_at(f: GroupHom, g: GroupHom) -> bool:
    """Exactness of A --f--> B --g--> C at B: g o f = 0 and ker g <= im f."""
    if f.cod.generators != g.dom.generators:
        raise ValueError("cod(f) and dom(g) do not match")
    if not in_relation_span(g.cod, g.matrix @ f.matrix):
        return False
    ker_lattice = _preimage_lattice(g)
    image_lattice = f.matrix.hstack(f.cod.relations)
    return isinstance(solve_linear(image_lattice, ker_lattice), Solution)


def _require_well_defined(h: GroupHom) -> None:
    wd = is_well_defined(h)
    if not wd.ok:
        raise ValueError(f"homomorphism is not well defined, failing relation column {wd.certificate}")


# -- direct sums -----------------------------------------------------------


@dataclass(frozen=True)
class DirectSum:
    group: PresentedGroup
    injections: Tuple[GroupHom, ...]
    projections: Tuple[GroupHom, ...]


def direct_sum(summands: Sequence[PresentedGroup]) -> DirectSum:
    gens = sum(g.generators for g in summands)
    rel = IntMatrix.block_diagonal([g.relations for g in summands])
    if not summands:
        rel = IntMatrix.zeros(0, 0)
    total = PresentedGroup(gens, rel)
    injections = []
    projections = []
    offset = 0
    for g in summands:
        inj = IntMatrix.zeros(gens, g.generators).to_lists()
        proj = IntMatrix.zeros(g.generators, gens).to_lists()
        for i in range(g.generators):
            inj[offset + i][i] = 1
            proj[i][offset + i] = 1
        injections.append(GroupHom(g, total, IntMatrix(gens, g.generators, inj)))
        projections.append(GroupHom(total, g, IntMatrix(g.generators, gens, proj)))
        offset += g.generators
    return DirectSum(total, tuple(injections), tuple(projections))


def hom_direct_sum(homs: Sequence[GroupHom]) -> GroupHom:
    """Block-diagonal sum of homomorphisms."""
    dom = direct_sum([h.dom for h in homs]).group
    cod = direct_sum([h.cod for h in homs]).group
    return GroupHom(dom, cod, IntMatrix.block_diagonal([h.matrix for h in homs]))


def hom_block(grid: Sequence[Sequence[GroupHom]], doms: Sequence[PresentedGroup],
              cods: Sequence[PresentedGroup]) -> GroupHom:
    """General block homomorphism grid[i][j] : doms[j] -> cods[i]."""
    dom = direct_sum(doms).group
    cod = direct_sum(cods).group
    blocks = [[grid[i][j].matrix for j in range(len(doms))] for i in range(len(cods))]
    return GroupHom(dom, cod, IntMatrix.block(blocks))


# -- canonicalization -------------------------------------------------------


@dataclass(frozen=True)
class CanonicalForm:
    """Isomorphism onto the invariant-factor presentation of a group."""

    group: PresentedGroup            # canonical presentation
    to_canonical: GroupHom           # original -> canonical
    from_canonical: GroupHom         # canonical -> original


def canonical_form(g: PresentedGroup) -> CanonicalForm:
    dec = smith_normal_form(g.relations)
    diag = dec.diagonal()
    torsion_idx = [i for i, d in enumerate(diag) if d not in (0, 1)]
    free_idx = [i for i in range(g.generators) if i >= len(diag) or diag[i] == 0]
    keep = torsion_idx + free_idx
    torsion = [diag[i] for i in torsion_idx]
    canon = PresentedGroup.from_invariants(len(free_idx), torsion)
    u = dec.U
    to_mat = u.submatrix(keep, range(g.generators))
    u_inv = _unimodular_inverse(u)
    from_mat = u_inv.submatrix(range(g.generators), keep)
    return CanonicalForm(
        group=canon,
        to_canonical=GroupHom(g, canon, to_mat),
        from_canonical=GroupHom(canon, g, from_mat),
    )


def _unimodular_inverse(u: IntMatrix) -> IntMatrix:
    res = solve_linear(u, IntMatrix.identity(u.rows))
    if not isinstance(res, Solution):  # pragma: no cover - u is unimodular
        raise RuntimeError("matrix is not invertible over Z")
    return res.particular


def transport_hom(h: GroupHom, dom_form: CanonicalForm, cod_form: CanonicalForm) -> GroupHom:
    """Rewrite h against canonical generators on both sides."""
    mat = cod_form.to_canonical.matrix @ h.matrix @ dom_form.from_canonical.matrix
    return GroupHom(dom_form.group, cod_form.group, mat)


# -- simultaneous linear solving over unknown homomorphisms ------------------


@dataclass(frozen=True)
class MatrixVar:
    name: str
    rows: int
    cols: int


@dataclass(frozen=True)
class MatTerm:
    """left @ X_var @ right, with identity for omitted sides."""

    var: str
    left: Optional[IntMatrix] = None
    right: Optional[IntMatrix] = None


@dataclass(frozen=True)
class MatEquation:
    """sum of terms == rhs, modulo the column span of ``modulus`` (if given)."""

    terms: Tuple[MatTerm, ...]
    rhs: IntMatrix
    modulus: Optional[IntMatrix] = None
    label: str = ""


@dataclass(frozen=True)
class HomSolution:
    assignment: Dict[str, IntMatrix]
    homogeneous: Tuple[Dict[str, IntMatrix], ...]


@dataclass(frozen=True)
class HomInfeasible:
    equation: int
    label: str
    certificate: Infeasible
    narrowed_column: Optional[int] = None

    def describe(self) -> str:
        loc = f"equation {self.equation}" + (f" ({self.label})" if self.label else "")
        col = "" if self.narrowed_column is None else f", target column {self.narrowed_column}"
        return f"{loc}{col}: {self.certificate.describe()}"


def _kron(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    out = [[0] * (a.cols * b.cols) for _ in range(a.rows * b.rows)]
    for i in range(a.rows):
        for j in range(a.cols):
            aij = a.data[i][j]
            if aij == 0:
                continue
            for k in range(b.rows):
                for l in range(b.cols):
                    out[i * b.rows + k][j * b.cols + l] = aij * b.data[k][l]
    return IntMatrix(a.rows * b.rows, a.cols * b.cols, out)


def _vec(m: IntMatrix) -> List[int]:
    """Column-stacking vectorization."""
    return [m.data[i][j] for j in range(m.cols) for i in range(m.rows)]


def _unvec(v: Sequence[int], rows: int, cols: int) -> IntMatrix:
    return IntMatrix(rows, cols, [[v[j * rows + i] for j in range(cols)] for i in range(rows)])


def _build_system(variables: Sequence[MatrixVar],
                  equations: Sequence[MatEquation]) -> Tuple[IntMatrix, IntMatrix, Dict[str, int], int]:
    """Stack all equations into one solve_linear instance over vec(X) unknowns."""
    var_shapes = {v.name: (v.rows, v.cols) for v in variables}
    offsets: Dict[str, int] = {}
    width = 0
    for v in variables:
        offsets[v.name] = width
        width += v.rows * v.cols
    var_width = width
    slack_offsets: List[Tuple[int, int]] = []  # (offset, count) per equation
    for eq in equations:
        if eq.modulus is not None and eq.modulus.cols > 0:
            slack_offsets.append((width, eq.modulus.cols * eq.rhs.cols))
            width += eq.modulus.cols * eq.rhs.cols
        else:
            slack_offsets.append((width, 0))

    rows_blocks: List[List[int]] = []
    rhs_entries: List[int] = []
    for eq_index, eq in enumerate(equations):
        n_eq_rows = eq.rhs.rows * eq.rhs.cols
        block = [[0] * width for _ in range(n_eq_rows)]
        for term in eq.terms:
            if term.var not in var_shapes:
                raise ValueError(f"unknown variable {term.var!r} in equation {eq_index}")
            vr, vc = var_shapes[term.var]
            left = term.left if term.left is not None else IntMatrix.identity(eq.rhs.rows)
            right = term.right if term.right is not None else IntMatrix.identity(eq.rhs.cols)
            if left.cols != vr or right.rows != vc:
                raise ValueError(f"term shapes are inconsistent in equation {eq_index}")
            if left.rows != eq.rhs.rows or right.cols != eq.rhs.cols:
                raise ValueError(f"equation {eq_index} has mismatched result shape")
            coeff = _kron(right.transpose(), left)
            off = offsets[term.var]
            for i in range(n_eq_rows):
                ci = coeff.data[i]
                bi = block[i]
                for j in range(vr * vc):
                    bi[off + j] += ci[j]
        s_off, s_cnt = slack_offsets[eq_index]
        if s_cnt:
            coeff = _kron(IntMatrix.identity(eq.rhs.cols), eq.modulus)
            for i in range(n_eq_rows):
                ci = coeff.data[i]
                bi = block[i]
                for j in range(s_cnt):
                    bi[s_off + j] += ci[j]
        rows_blocks.extend(block)
        rhs_entries.extend(_vec(eq.rhs))

    system = IntMatrix(len(rows_blocks), width, rows_blocks)
    target = IntMatrix.column(rhs_entries)
    return system, target, offsets, var_width


def hom_solve(variables: Sequence[MatrixVar],
              equations: Sequence[MatEquation]) -> Union[HomSolution, HomInfeasible]:
    """Solve a simultaneous system of matrix equations over integer unknowns.

    Each equation sum_t L_t @ X_t @ R_t == rhs is read modulo the column span
    of its modulus.  Everything reduces to one stacked solve_linear instance
    over the vectorized unknown entries; congruences contribute fresh slack
    unknowns that are dropped from the reported solution.
    """
    system, target, offsets, _ = _build_system(variables, equations)
    res = solve_linear(system, target)
    if isinstance(res, Infeasible):
        return _narrow_infeasibility(variables, equations, res)
    sol = [res.particular.data[i][0] for i in range(res.particular.rows)]

    def extract(vector: Sequence[int]) -> Dict[str, IntMatrix]:
        out = {}
        for v in variables:
            off = offsets[v.name]
            out[v.name] = _unvec(vector[off:off + v.rows * v.cols], v.rows, v.cols)
        return out

    homogeneous = tuple(extract(h) for h in res.kernel_basis)
    return HomSolution(assignment=extract(sol), homogeneous=homogeneous)


def _restrict_to_column(eq: MatEquation, col: int) -> MatEquation:
    terms = []
    for t in eq.terms:
        right = t.right if t.right is not None else IntMatrix.identity(eq.rhs.cols)
        terms.append(MatTerm(var=t.var, left=t.left,
                             right=right.submatrix(range(right.rows), [col])))
    return MatEquation(terms=tuple(terms),
                       rhs=eq.rhs.submatrix(range(eq.rhs.rows), [col]),
                       modulus=eq.modulus, label=eq.label)


def _narrow_infeasibility(variables: Sequence[MatrixVar],
                          equations: Sequence[MatEquation],
                          fallback: Infeasible) -> HomInfeasible:
    """Find a small witness: a single equation (and rhs column) already infeasible."""
    for idx, eq in enumerate(equations):
        system, target, _, _ = _build_system(variables, [eq])
        res = solve_linear(system, target)
        if isinstance(res, Infeasible):
            for col in range(eq.rhs.cols):
                eq_col = _restrict_to_column(eq, col)
                sys_col, tgt_col, _, _ = _build_system(variables, [eq_col])
                res_col = solve_linear(sys_col, tgt_col)
                if isinstance(res_col, Infeasible):
                    return HomInfeasible(equation=idx, label=eq.label,
                                         certificate=res_col, narrowed_column=col)
            return HomInfeasible(equation=idx, label=eq.label, certificate=res)
    return HomInfeasible(equation=-1, label="(joint system)", certificate=fallback)
