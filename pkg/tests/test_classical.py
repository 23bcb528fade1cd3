import itertools
import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrframes.classical import (
    ClassicalState,
    ProbabilisticClassicalState,
    change_frame_classical,
    disagreeing_slots,
    discrepancy_check,
    external_state,
    infer_average_state,
    irreversible_change_classical,
    random_external_state,
    relative_state,
    truncate_classical,
)
from qrframes.errors import FrameError, GroupSpecError
from qrframes.groups import TranslationLine, build_group

D3 = build_group("D:3")
D4 = build_group("D:4")
Z8 = build_group("Z:8")
Z12c = build_group("Z:12,cells=3")


def el(G, name):
    return G.index(name)


class TestRelativeAndChange:
    def test_relative_z8(self):
        s = relative_state(external_state(Z8, [2, 5, 7]), 0)
        assert s.frame == 0 and s.configs == (0, 3, 5)

    def test_relative_self_slot(self):
        s = relative_state(external_state(Z8, [2, 5, 7]), 2)
        assert s.configs[2] == 0

    def test_relative_d3(self):
        s = relative_state(external_state(D3, [el(D3, "e"), el(D3, "r"), el(D3, "s")]), 1)
        r_inv = D3.inverse(el(D3, "r"))
        assert s.configs == (r_inv, D3.identity, D3.compose(el(D3, "s"), r_inv))

    def test_change_z8(self):
        s = ClassicalState(0, Z8, ("G",) * 3, (0, 3, 5))
        assert change_frame_classical(s, 1).configs == (5, 0, 2)

    def test_change_to_self(self):
        s = ClassicalState(0, Z8, ("G",) * 3, (0, 3, 5))
        assert change_frame_classical(s, 0) == s

    def test_round_trip_exhaustive_d4(self):
        for x, y in itertools.product(range(8), repeat=2):
            s = ClassicalState(0, D4, ("G",) * 3, (0, x, y))
            for j in range(3):
                assert change_frame_classical(change_frame_classical(s, j), 0) == s

    def test_group_law_exhaustive_d4(self):
        for x, y in itertools.product(range(8), repeat=2):
            s = ClassicalState(0, D4, ("G",) * 3, (0, x, y))
            for j, k in itertools.product(range(3), repeat=2):
                assert change_frame_classical(change_frame_classical(s, j), k) == change_frame_classical(s, k)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(0, 7), min_size=2, max_size=5), st.data())
    def test_relative_then_change_is_relative(self, configs, data):
        s = external_state(D4, configs)
        i = data.draw(st.integers(0, len(configs) - 1))
        j = data.draw(st.integers(0, len(configs) - 1))
        assert change_frame_classical(relative_state(s, i), j) == relative_state(s, j)

    def test_errors(self):
        ext = external_state(Z8, [1, 2])
        with pytest.raises(FrameError):
            change_frame_classical(ext, 1)
        with pytest.raises(IndexError):
            relative_state(ext, 2)
        with pytest.raises(FrameError):
            relative_state(relative_state(ext, 0), 1)
        with pytest.raises(FrameError):
            ClassicalState(0, Z8, ("G", "G"), (1, 2))

    def test_n_entries_must_lie_in_n(self):
        with pytest.raises(FrameError):
            external_state(Z12c, [0, 4], "GN")
        with pytest.raises(GroupSpecError):
            external_state(Z8, [0, 4], "GN")

    def test_json_roundtrip(self):
        s = relative_state(external_state(Z12c, [1, 5, 6], "GGN"), 0)
        data = json.loads(json.dumps(s.to_dict()))
        assert ClassicalState.from_dict(data, Z12c) == s
        line = TranslationLine(1)
        t = relative_state(external_state(line, [Fraction(1, 3), 2], "GN"), 0)
        assert ClassicalState.from_dict(json.loads(json.dumps(t.to_dict())), line) == t


class TestTruncation:
    def test_cells(self):
        assert truncate_classical(external_state(Z12c, [7, 3, 5])).configs == (6, 3, 3)

    def test_already_in_n(self):
        s = external_state(Z12c, [0, 3, 9], "GNN")
        assert truncate_classical(s) == s

    def test_translation_line(self):
        line = TranslationLine(1)
        n = (2, 5, 3, -1)
        s = external_state(line, [n[0] + Fraction(1, 2), n[1] + Fraction(1, 4), n[2], n[3]], "GGNN")
        assert truncate_classical(s).configs == n

    def test_requires_decomposition(self):
        with pytest.raises(GroupSpecError):
            truncate_classical(external_state(Z8, [1, 2]))

    def test_irreversible_two_step(self):
        s = ClassicalState(0, Z12c, ("G", "G", "N"), (0, 7, 6))
        out = irreversible_change_classical(s, 2)
        assert out.frame == 2 and out.configs == (6, 0, 0)

    def test_irreversible_equals_reversible_on_n(self):
        s = ClassicalState(0, Z12c, ("G", "G", "N"), (0, 3, 9))
        assert irreversible_change_classical(s, 2) == change_frame_classical(s, 2)

    def test_irreversible_target_must_be_n(self):
        s = ClassicalState(0, Z12c, ("G", "G", "N"), (0, 7, 6))
        with pytest.raises(FrameError):
            irreversible_change_classical(s, 1)

    def test_irreversible_forgets_p_parts(self):
        images = {
            irreversible_change_classical(ClassicalState(0, Z12c, ("G", "G", "N"), (0, b, 6)), 2)
            for b in (6, 7, 8)
        }
        assert len(images) == 1

    def test_translation_line_worked_instance(self):
        line = TranslationLine(1)
        n = (2, 5, 3, -1)
        s = external_state(line, [n[0] + Fraction(1, 2), n[1] + Fraction(1, 4), n[2], n[3]], "GGNN")
        via_relative = irreversible_change_classical(relative_state(s, 0), 2)
        assert via_relative.configs[1] == n[1] - n[2] - 1
        assert via_relative.configs == (n[0] - n[2], n[1] - n[2] - 1, 0, n[3] - n[2])


class TestDiscrepancy:
    def test_translation_line_off_by_one(self):
        line = TranslationLine(1)
        n = (2, 5, 3, -1)
        s = external_state(line, [n[0] + Fraction(1, 2), n[1] + Fraction(1, 4), n[2], n[3]], "GGNN")
        rep = discrepancy_check(s, 2)
        assert rep.passed
        assert disagreeing_slots(rep) == [1]
        slot = rep["slot 1"].detail
        assert Fraction(slot["relative_then_truncate"]) == n[1] - n[2] - 1
        assert Fraction(slot["truncate_then_relative"]) == n[1] - n[2]

    def test_translation_line_agreement_when_ordered(self):
        line = TranslationLine(Fraction(1, 2))
        s = external_state(line, [Fraction(1, 8), Fraction(7, 4), 1, Fraction(-3, 2)], "GGNN")
        assert disagreeing_slots(discrepancy_check(s, 2)) == []

    def test_direct_product_agrees(self):
        G = build_group("prod:Z:3xZ:5")
        rng = random.Random(3)
        for _ in range(300):
            s = random_external_state(G, "GGNN", rng)
            rep = discrepancy_check(s, 3)
            assert rep.passed and disagreeing_slots(rep) == []

    def test_d4_brute_force(self):
        found = 0
        normal = D4.decomposition.normal
        for a, b, c in itertools.product(range(8), range(8), normal):
            rep = discrepancy_check(external_state(D4, [a, b, c], "GGN"), 2)
            assert rep.passed
            found += bool(disagreeing_slots(rep))
        assert found > 0

    def test_d4_reflection_instance(self):
        # g0 = r, g1 = s, g2 = e: s·r⁻¹ = r·s keeps n-part r, then the shift gives r²
        s = external_state(D4, [el(D4, "r"), el(D4, "s"), el(D4, "e")], "GGN")
        rep = discrepancy_check(s, 2)
        assert disagreeing_slots(rep) == [1]
        assert rep["slot 1"].detail["relative_then_truncate"] == el(D4, "r^2")
        assert rep["slot 1"].detail["truncate_then_relative"] == D4.identity

    def test_requires_external_and_n_target(self):
        s = external_state(D4, [0, 1, 2], "GGN")
        with pytest.raises(FrameError):
            discrepancy_check(s, 1)
        with pytest.raises(FrameError):
            discrepancy_check(relative_state(s, 0), 2)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.tuples(st.integers(-5, 5), st.fractions(0, 1).filter(lambda x: x < 1)), min_size=2, max_size=4),
           st.lists(st.integers(-5, 5), min_size=1, max_size=3))
    def test_n_slots_always_agree_on_the_line(self, gs, ns):
        line = TranslationLine(1)
        configs = [n + x for n, x in gs] + ns
        kinds = "G" * len(gs) + "N" * len(ns)
        rep = discrepancy_check(external_state(line, configs, kinds), len(gs))
        assert rep.passed


class TestAveraging:
    def test_d4_positions(self):
        s = ClassicalState(0, D4, ("N",) * 3, (0, el(D4, "r"), el(D4, "r^2")))
        avg = infer_average_state(s, 1)
        half = Fraction(1, 2)
        r, r3 = el(D4, "r"), el(D4, "r^3")
        assert avg.frame == 1
        assert avg.measures[0] == {r3: half, r: half}
        assert avg.measures[2] == {r: half, r3: half}
        assert avg.measures[1] == {D4.identity: 1}
        assert avg.orbits[0] == (r, r3)

    def test_target_is_frame(self):
        s = ClassicalState(0, D4, ("N",) * 3, (0, el(D4, "r"), el(D4, "r^2")))
        avg = infer_average_state(s, 0)
        assert [dict(m) for m in avg.measures] == [{c: 1} for c in s.configs]

    def test_trivial_stabilizer(self):
        G = build_group("prod:Z:4xZ:1")
        s = ClassicalState(0, G, ("N",) * 3, (0, 1, 3))
        avg = infer_average_state(s, 2)
        assert [dict(m) for m in avg.measures] == [{c: 1} for c in change_frame_classical(s, 2).configs]

    def test_transversal_only_rejected(self):
        s = ClassicalState(0, Z12c, ("N",) * 2, (0, 3))
        with pytest.raises(GroupSpecError):
            infer_average_state(s, 1)

    def test_g_systems_rejected(self):
        s = ClassicalState(0, D4, ("N", "G"), (0, 1))
        with pytest.raises(FrameError):
            infer_average_state(s, 1)

    def test_measures_normalized(self):
        for x, y in itertools.product(D4.decomposition.normal, repeat=2):
            s = ClassicalState(0, D4, ("N",) * 3, (0, x, y))
            for t in range(3):
                avg = infer_average_state(s, t)
                assert all(sum(m.values()) == 1 and min(m.values()) > 0 for m in avg.measures)
        json.dumps(avg.to_dict())

    def test_bad_measure(self):
        with pytest.raises(ValueError):
            ProbabilisticClassicalState(0, D4, ({0: Fraction(1, 2)},))
