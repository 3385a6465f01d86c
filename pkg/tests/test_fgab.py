"""Tests for presented abelian groups and their homomorphisms.

is_exact_at is cross-checked against a brute-force oracle that enumerates the
elements of small finite groups and compares kernel and image pointwise.
"""

import itertools
import random

import pytest

from filtk.fgab import (
    GroupHom,
    HomInfeasible,
    HomSolution,
    MatEquation,
    MatTerm,
    MatrixVar,
    PresentedGroup,
    canonical_form,
    cokernel,
    direct_sum,
    hom_direct_sum,
    hom_solve,
    homs_equal,
    image,
    is_exact_at,
    is_injective,
    is_isomorphism,
    is_surjective,
    is_well_defined,
    kernel,
    transport_hom,
)
from filtk.intlin import IntMatrix


# -- brute-force oracle -------------------------------------------------------


def enumerate_elements(g: PresentedGroup):
    """All elements of a finite group, as canonical tuples over invariant factors."""
    form = canonical_form(g)
    free, torsion = g.invariant_factors()
    assert free == 0, "oracle needs a finite group"
    return form, list(itertools.product(*[range(t) for t in torsion]))


def canonical_apply(h: GroupHom, dom_form, cod_form, x):
    """Apply h to a canonical element tuple, reducing modulo invariant factors."""
    mat = cod_form.to_canonical.matrix @ h.matrix @ dom_form.from_canonical.matrix
    _, torsion = h.cod.invariant_factors()
    raw = mat.apply(list(x))
    return tuple(v % t for v, t in zip(raw, torsion))


def brute_force_exact(f: GroupHom, g: GroupHom) -> bool:
    dom_f, elems_a = enumerate_elements(f.dom)
    mid, elems_b = enumerate_elements(f.cod)
    cod_g, elems_c = enumerate_elements(g.cod)
    zero_c = tuple(0 for _ in elems_c[0]) if elems_c else ()
    img = {canonical_apply(f, dom_f, mid, a) for a in elems_a}
    ker = {b for b in elems_b if canonical_apply(g, mid, cod_g, b) == zero_c}
    return img == ker


def random_finite_group(rng, max_gens=3):
    g = rng.randint(1, max_gens)
    while True:
        cols = g + rng.randint(0, 1)
        rel = IntMatrix(g, cols, [[rng.randint(-6, 6) for _ in range(cols)] for _ in range(g)])
        grp = PresentedGroup(g, rel)
        order = grp.order()
        if order is not None and order <= 200:
            return grp


def random_hom(rng, dom, cod, bound=3):
    """A random well-defined hom dom -> cod (built from a random matrix fix-up)."""
    # a hom is well-defined iff the matrix maps relation columns into the
    # codomain lattice; multiply columns through the canonical projection to
    # force this
    dform = canonical_form(dom)
    cform = canonical_form(cod)
    _, dt = dom.invariant_factors()
    _, ct = cod.invariant_factors()
    rows, cols = len(ct), len(dt)
    mat = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        for j in range(cols):
            # entry must satisfy ct[i] | entry * dt[j]
            step = ct[i] // __import__("math").gcd(ct[i], dt[j])
            mat[i][j] = step * rng.randint(-bound, bound)
    canon_hom = GroupHom(dform.group, cform.group, IntMatrix(rows, cols, mat))
    lifted = cform.from_canonical.compose(canon_hom).compose(dform.to_canonical)
    return GroupHom(dom, cod, lifted.matrix)


# -- pinned examples ----------------------------------------------------------


class TestInvariantFactors:
    def test_rank_one_quotient(self):
        g = PresentedGroup(2, IntMatrix.from_rows([[-1, -1], [-1, -1]]))
        assert g.invariant_factors() == (1, ())
        assert g.describe() == "Z"

    def test_z2(self):
        g = PresentedGroup(1, IntMatrix.from_rows([[-2]]))
        assert g.invariant_factors() == (0, (2,))

    def test_free_rank_three(self):
        g = PresentedGroup(3, IntMatrix.zeros(3, 0))
        assert g.invariant_factors() == (3, ())

    def test_invariance_under_unimodular_changes(self):
        rng = random.Random(5)
        for _ in range(60):
            g = rng.randint(1, 3)
            cols = rng.randint(0, 3)
            rel = IntMatrix(g, cols, [[rng.randint(-6, 6) for _ in range(cols)] for _ in range(g)])
            grp = PresentedGroup(g, rel)
            base = grp.invariant_factors()
            u = _random_unimodular(rng, g)
            v = _random_unimodular(rng, cols)
            changed = PresentedGroup(g, u @ rel @ v)
            assert changed.invariant_factors() == base


def _random_unimodular(rng, n):
    m = IntMatrix.identity(n).to_lists()
    for _ in range(3 * n):
        i, j = rng.randrange(n) if n else 0, rng.randrange(n) if n else 0
        if n < 2 or i == j:
            continue
        k = rng.randint(-2, 2)
        for c in range(n):
            m[i][c] += k * m[j][c]
    return IntMatrix(n, n, m)


class TestWellDefined:
    def test_identity(self):
        g = PresentedGroup.cyclic(4)
        assert is_well_defined(GroupHom.identity(g)).ok

    def test_z2_to_z_generator_map_fails(self):
        h = GroupHom(PresentedGroup.cyclic(2), PresentedGroup.free(1), IntMatrix.from_rows([[1]]))
        wd = is_well_defined(h)
        assert not wd.ok
        assert wd.certificate == 0  # the single relation column fails

    def test_zero_map_on_torsion(self):
        h = GroupHom(PresentedGroup.free(1), PresentedGroup.cyclic(2), IntMatrix.from_rows([[0]]))
        assert is_well_defined(h).ok


class TestKernelImageCokernel:
    def test_cokernel_of_times_minus_two(self):
        h = GroupHom(PresentedGroup.free(1), PresentedGroup.free(1), IntMatrix.from_rows([[-2]]))
        coker, proj = cokernel(h)
        assert coker.invariant_factors() == (0, (2,))
        assert is_surjective(proj)

    def test_kernel_of_rank_one_square(self):
        free2 = PresentedGroup.free(2)
        h = GroupHom(free2, free2, IntMatrix.from_rows([[-1, -1], [-1, -1]]))
        ker, incl = kernel(h)
        assert ker.invariant_factors() == (1, ())
        # inclusion composed with h is zero
        assert h.compose(incl).is_zero()

    def test_image_of_zero(self):
        h = GroupHom.zero(PresentedGroup.free(2), PresentedGroup.cyclic(6))
        img, incl, proj = image(h)
        assert img.is_trivial()

    def test_kernel_into_torsion(self):
        # x4 : Z4 -> Z8 kills exactly the even classes, so the kernel is Z2
        h = GroupHom(PresentedGroup.cyclic(4), PresentedGroup.cyclic(8), IntMatrix.from_rows([[4]]))
        assert is_well_defined(h).ok
        ker, incl = kernel(h)
        assert ker.invariant_factors() == (0, (2,))
        # and x2 is injective
        h2 = GroupHom(PresentedGroup.cyclic(4), PresentedGroup.cyclic(8), IntMatrix.from_rows([[2]]))
        assert kernel(h2)[0].is_trivial()

    def test_cokernel_of_surjection_is_trivial(self):
        h = GroupHom(PresentedGroup.free(1), PresentedGroup.cyclic(5), IntMatrix.from_rows([[1]]))
        coker, _ = cokernel(h)
        assert coker.is_trivial()

    def test_kernel_of_injection_is_trivial(self):
        h = GroupHom(PresentedGroup.free(1), PresentedGroup.free(2), IntMatrix.from_rows([[1], [3]]))
        assert kernel(h)[0].is_trivial()
        assert is_injective(h)


class TestExactness:
    def test_zero_into_iso(self):
        z = PresentedGroup.free(1)
        f = GroupHom.zero(PresentedGroup.trivial(), z)
        g = GroupHom.identity(z)
        assert is_exact_at(f, g)

    def test_multiplication_then_quotient(self):
        z = PresentedGroup.free(1)
        z2 = PresentedGroup.cyclic(2)
        f = GroupHom(z, z, IntMatrix.from_rows([[2]]))
        g = GroupHom(z, z2, IntMatrix.from_rows([[1]]))
        assert is_exact_at(f, g)
        # and inexact when the middle map is the identity
        assert not is_exact_at(GroupHom.identity(z), g)

    def test_composability_mismatch(self):
        f = GroupHom.identity(PresentedGroup.free(1))
        g = GroupHom.identity(PresentedGroup.free(2))
        with pytest.raises(ValueError):
            is_exact_at(f, g)

    def test_against_brute_force_oracle(self):
        rng = random.Random(20240812)
        checked = 0
        while checked < 60:
            a = random_finite_group(rng)
            b = random_finite_group(rng)
            c = random_finite_group(rng)
            f = random_hom(rng, a, b)
            g = random_hom(rng, b, c)
            assert is_exact_at(f, g) == brute_force_exact(f, g)
            checked += 1


class TestDirectSum:
    def test_invariants_merge(self):
        z = PresentedGroup.free(1)
        z2 = PresentedGroup.cyclic(2)
        s = direct_sum([z, z2])
        assert s.group.invariant_factors() == (1, (2,))

    def test_three_free_summands(self):
        z2f = PresentedGroup.free(2)
        z = PresentedGroup.free(1)
        s = direct_sum([z2f, z])
        assert s.group.invariant_factors() == (3, ())

    def test_sum_with_trivial(self):
        g = PresentedGroup.cyclic(6)
        s = direct_sum([g, PresentedGroup.trivial()])
        assert s.group.isomorphic(g)

    def test_biproduct_laws(self):
        a = PresentedGroup.cyclic(4)
        b = PresentedGroup.free(1)
        s = direct_sum([a, b])
        for inj, proj, g in zip(s.injections, s.projections, (a, b)):
            assert homs_equal(proj.compose(inj), GroupHom.identity(g))
        cross = s.projections[0].compose(s.injections[1])
        assert cross.is_zero()

    def test_hom_direct_sum(self):
        h1 = GroupHom(PresentedGroup.free(1), PresentedGroup.free(1), IntMatrix.from_rows([[3]]))
        h2 = GroupHom.identity(PresentedGroup.cyclic(2))
        h = hom_direct_sum([h1, h2])
        assert h.matrix == IntMatrix.from_rows([[3, 0], [0, 1]])


class TestHomSolve:
    def test_identity_constraint(self):
        x = MatrixVar("X", 2, 2)
        eq = MatEquation(terms=(MatTerm(var="X"),), rhs=IntMatrix.identity(2))
        res = hom_solve([x], [eq])
        assert isinstance(res, HomSolution)
        assert res.assignment["X"] == IntMatrix.identity(2)

    def test_scalar_two_x_equals_four(self):
        x = MatrixVar("x", 1, 1)
        eq = MatEquation(terms=(MatTerm(var="x", left=IntMatrix.from_rows([[2]])),),
                         rhs=IntMatrix.from_rows([[4]]))
        res = hom_solve([x], [eq])
        assert isinstance(res, HomSolution)
        assert res.assignment["x"] == IntMatrix.from_rows([[2]])

    def test_counterexample_square_is_infeasible(self):
        # unknown 3x3 B with B @ [[1,0],[0,2],[0,0]] == [[1,1],[0,2],[0,0]]
        # modulo the relation column (0,0,2): column 2 forces 2*B12 == 1
        b = MatrixVar("B", 3, 3)
        j = IntMatrix.from_rows([[1, 0], [0, 2], [0, 0]])
        rhs = IntMatrix.from_rows([[1, 1], [0, 2], [0, 0]])
        modulus = IntMatrix.from_rows([[0], [0], [2]])
        eq = MatEquation(terms=(MatTerm(var="B", right=j),), rhs=rhs, modulus=modulus,
                         label="corner square")
        res = hom_solve([b], [eq])
        assert isinstance(res, HomInfeasible)
        assert res.narrowed_column == 1
        assert res.certificate.divisor == 2
        assert "corner square" in res.describe()

    def test_identity_family_is_feasible(self):
        b = MatrixVar("B", 3, 3)
        j = IntMatrix.from_rows([[1, 0], [0, 2], [0, 0]])
        modulus = IntMatrix.from_rows([[0], [0], [2]])
        eq = MatEquation(terms=(MatTerm(var="B", right=j),), rhs=j, modulus=modulus)
        res = hom_solve([b], [eq])
        assert isinstance(res, HomSolution)
        got = res.assignment["B"] @ j
        diff = got - j
        # equality modulo the relation lattice, columnwise
        coker = PresentedGroup(3, modulus)
        assert all(
            (diff.data[0][c] == 0 and diff.data[1][c] == 0 and diff.data[2][c] % 2 == 0)
            for c in range(2)
        ), f"residual {diff}"

    def test_two_sided_term(self):
        # L @ X @ R = rhs with a unique solution
        x = MatrixVar("X", 1, 1)
        eq = MatEquation(
            terms=(MatTerm(var="X", left=IntMatrix.from_rows([[1], [2]]),
                           right=IntMatrix.from_rows([[3, 1]])),),
            rhs=IntMatrix.from_rows([[3, 1], [6, 2]]),
        )
        res = hom_solve([x], [eq])
        assert isinstance(res, HomSolution)
        assert res.assignment["X"] == IntMatrix.from_rows([[1]])


class TestCanonicalForm:
    def test_round_trip(self):
        rng = random.Random(3)
        for _ in range(40):
            gens = rng.randint(1, 3)
            cols = rng.randint(0, 3)
            g = PresentedGroup(gens, IntMatrix(gens, cols,
                                               [[rng.randint(-5, 5) for _ in range(cols)] for _ in range(gens)]))
            form = canonical_form(g)
            assert form.group.isomorphic(g)
            round_trip = form.to_canonical.compose(form.from_canonical)
            assert homs_equal(round_trip, GroupHom.identity(form.group))
            back = form.from_canonical.compose(form.to_canonical)
            assert homs_equal(back, GroupHom.identity(g))

    def test_transport_identity(self):
        g = PresentedGroup(2, IntMatrix.from_rows([[2, 0], [0, 3]]))
        form = canonical_form(g)
        moved = transport_hom(GroupHom.identity(g), form, form)
        assert homs_equal(moved, GroupHom.identity(form.group))

    def test_isomorphism_check(self):
        g = PresentedGroup(2, IntMatrix.from_rows([[2, 1], [0, 2]]))
        form = canonical_form(g)
        assert is_isomorphism(form.to_canonical)
