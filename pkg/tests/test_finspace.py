"""Tests for finite T0-spaces and their derived combinatorics."""

import pytest

from filtk.finspace import (
    FiniteSpace,
    builtin_space,
    carrier_name,
    point_space,
)


CSP = builtin_space("CSP")
S21 = builtin_space("S21")


class TestConstruction:
    def test_builtin_families_are_valid(self):
        for space in (CSP, S21):
            assert space.is_connected()
            assert len(space.points) == 4

    def test_rejects_non_t0(self):
        with pytest.raises(ValueError, match="T0"):
            FiniteSpace(["a", "b"], [[], ["a", "b"]])

    def test_rejects_union_gap(self):
        with pytest.raises(ValueError, match="union"):
            FiniteSpace(["a", "b", "c"], [[], ["a"], ["b"], ["a", "b", "c"]])

    def test_duality_count(self):
        # complements of opens are the closed sets; the counts agree trivially,
        # and the closed family is distinct from the open family for CSP
        for space in (CSP, S21):
            closed = {frozenset(space.points) - o for o in space.opens}
            assert len(closed) == len(space.opens)

    def test_json_round_trip(self):
        text = CSP.to_json()
        assert FiniteSpace.from_json(text) == CSP


class TestSpecialization:
    def test_csp_arrows(self):
        assert CSP.specialization_arrows("1") == ["2", "3"]
        assert CSP.specialization_arrows("2") == ["4"]
        assert CSP.specialization_arrows("3") == ["4"]
        assert CSP.specialization_arrows("4") == []

    def test_s21_arrows(self):
        assert S21.specialization_arrows("1") == ["3", "4"]
        assert S21.specialization_arrows("2") == ["3", "4"]
        assert S21.specialization_arrows("3") == []
        assert S21.specialization_arrows("4") == []

    def test_one_point_space(self):
        assert point_space().specialization_arrows("1") == []

    def test_unknown_point(self):
        with pytest.raises(KeyError):
            CSP.specialization_arrows("9")


class TestSmallestOpen:
    def test_csp_values(self):
        assert CSP.smallest_open("4") == frozenset("4")
        assert CSP.boundary("4") == frozenset()
        assert CSP.smallest_open("1") == frozenset("1234")
        assert CSP.boundary("1") == frozenset("234")
        assert CSP.smallest_open("2") == frozenset("24")

    def test_s21_values(self):
        assert S21.smallest_open("1") == frozenset("134")
        assert S21.boundary("1") == frozenset("34")
        assert S21.smallest_open("3") == frozenset("3")

    def test_boundary_is_open_and_point_locally_closed(self):
        for space in (CSP, S21):
            for x in space.points:
                assert space.is_open(space.smallest_open(x))
                assert space.is_open(space.boundary(x))
                assert space.is_locally_closed({x})


class TestLocallyClosed:
    def test_csp_connected_carriers(self):
        names = [lc.name for lc in CSP.locally_closed_connected()]
        assert names == sorted(
            ["1", "2", "3", "4", "12", "13", "24", "34", "123", "234", "1234"],
            key=lambda n: (len(n), n),
        )
        assert len(names) == 11

    def test_s21_connected_carriers(self):
        names = [lc.name for lc in S21.locally_closed_connected()]
        expected = ["1", "2", "3", "4", "13", "14", "23", "24", "123", "124", "134", "234", "1234"]
        assert names == sorted(expected, key=lambda n: (len(n), n))
        assert len(names) == 13

    def test_witnesses_are_valid(self):
        for space in (CSP, S21):
            for lc in space.locally_closed_connected():
                u, v = lc.witness
                assert space.is_open(u) and space.is_open(v) and v <= u
                assert u - v == lc.carrier

    def test_one_point_space(self):
        assert len(point_space().locally_closed_connected()) == 1

    def test_disconnected_sets_detected(self):
        assert not CSP.is_connected_subset({"2", "3"})
        assert not S21.is_connected_subset({"3", "4"})
        assert S21.is_connected_subset({"2", "3"})

    def test_csp_has_no_14_like_carrier(self):
        assert not CSP.is_locally_closed({"1", "4"})
        assert not CSP.is_locally_closed({"1", "2", "4"})
        assert CSP.is_locally_closed({"1", "2"})


class TestAccordion:
    def test_featured_spaces_are_not_accordion(self):
        assert not CSP.is_accordion()
        assert not S21.is_accordion()

    def test_linear_three_point_space(self):
        chain = FiniteSpace(["a", "b", "c"], [[], ["a"], ["a", "b"], ["a", "b", "c"]])
        assert chain.is_accordion()

    def test_requires_connected(self):
        disc = FiniteSpace(["a", "b"], [[], ["a"], ["b"], ["a", "b"]])
        with pytest.raises(ValueError):
            disc.is_accordion()

    def test_point(self):
        assert point_space().is_accordion()


class TestPaths:
    def test_csp_distinct_pair(self):
        pairs = CSP.distinct_path_pairs("1")
        assert pairs == [(("4", "2", "1"), ("4", "3", "1"))]

    def test_no_incoming(self):
        assert CSP.distinct_path_pairs("4") == []

    def test_s21_no_pairs(self):
        for x in S21.points:
            assert S21.distinct_path_pairs(x) == []

    def test_components(self):
        assert S21.components({"3", "4"}) == [frozenset("3"), frozenset("4")]
        assert S21.components({"1", "3", "4"}) == [frozenset("134")]

    def test_relative_opens(self):
        rel = CSP.relative_opens({"1", "2", "3"})
        assert frozenset("23") in rel and frozenset("123") in rel
        assert frozenset("12") not in rel


def test_carrier_name():
    assert carrier_name({"2", "1"}) == "12"
    assert carrier_name(set()) == "{}"
    assert carrier_name({"p1", "p2"}) == "p1,p2"
