import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrframes.classical import ClassicalState, change_frame_classical
from qrframes.errors import DimensionError, ModelError
from qrframes.groups import build_group
from qrframes.hilbert import (
    QuantumState,
    Regular,
    amplitude_distance,
    basis_state,
    encode_group_element,
    half_angle_encoding,
    normalize,
    product_state,
    schmidt_rank,
    superpose,
    to_dense,
)
from qrframes.reversible import (
    ObservableMatrix,
    build_dense_operator,
    change_frame,
    change_frame_mixed,
    change_frame_quantum,
    local_observable,
    parity_swap,
    regular_action,
    shift_operator,
    transform_observable,
    translation_equivalence_check,
    verify_lemmas,
)

Z2, Z3, Z4, Z12 = (build_group(f"Z:{n}") for n in (2, 3, 4, 12))
D3 = build_group("D:3")
H = 1 / math.sqrt(2)


def all_frame_basis_states(models, frame):
    dims = [m.dim for m in models]
    for labels in itertools.product(*(range(d) for d in dims)):
        if labels[frame] == 0:
            yield basis_state(models, frame, labels)


def random_state(rng, models, frame=0):
    dims = [m.dim for m in models]
    shape = [1 if k == frame else d for k, d in enumerate(dims)]
    vec = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    out = {}
    for lab in itertools.product(*(range(s) for s in shape)):
        out[lab] = vec[lab]
    return normalize(QuantumState(frame, models, out))


class TestRegularAction:
    def test_right_z4(self):
        act = regular_action(Z4, "right", 1)
        assert act.permutation == (3, 0, 1, 2)

    def test_left_identity(self):
        assert regular_action(D3, "left", D3.identity).permutation == tuple(range(6))

    def test_d3_right_reflection(self):
        act = regular_action(D3, "right", D3.index("s"))
        perm = act.permutation
        assert all(perm[h] != h for h in range(6))
        assert all(perm[perm[h]] == h for h in range(6))

    def test_matrix_and_bad_side(self):
        m = regular_action(Z4, "left", 1).matrix()
        assert np.array_equal(m @ np.eye(4)[:, 0], np.eye(4)[:, 1])
        with pytest.raises(ValueError):
            regular_action(Z4, "up", 1)


class TestCoherentChange:
    def test_z2_entangling_example(self):
        M = (Regular(Z2),) * 3
        psi = superpose([H, H], [basis_state(M, 0, (0, 0, 1)), basis_state(M, 0, (0, 1, 1))])
        out = change_frame_quantum(psi, 1)
        assert out.frame == 1
        assert dict(out.terms) == pytest.approx({(0, 0, 1): H, (1, 0, 0): H}, abs=1e-15)
        assert schmidt_rank(out, [0]) == 2

    def test_u1_discretized(self):
        M = (Regular(Z12),) * 3
        a, b = math.sqrt(1 / 3), math.sqrt(2 / 3)
        psi = superpose([a, b], [basis_state(M, 0, (0, 1, 3)), basis_state(M, 0, (0, 2, 3))])
        out = change_frame_quantum(psi, 1)
        expected = {((-1) % 12, 0, 3 - 1): a, ((-2) % 12, 0, 3 - 2): b}
        assert set(out.terms) == set(expected)
        assert max(abs(out.terms[k] - v) for k, v in expected.items()) < 1e-12

    def test_single_system(self):
        psi = basis_state((Regular(D3),), 0, (0,))
        assert change_frame_quantum(psi, 0).terms == psi.terms

    def test_rejects_encoded(self):
        enc = half_angle_encoding(4)
        psi = product_state((Regular(Z4), Regular(Z4), enc), 0, [0, 1, encode_group_element(enc, 1)])
        with pytest.raises(ModelError):
            change_frame_quantum(psi, 1)
        with pytest.raises(ModelError):
            change_frame_mixed(psi, 2)

    def test_group_mismatch(self):
        psi = basis_state((Regular(Z2), Regular(Z3)), 0, (0, 1))
        with pytest.raises(ModelError):
            change_frame_quantum(psi, 1)

    def test_mixed_encoded_qubit(self):
        enc = half_angle_encoding(4)
        M = (Regular(Z4), Regular(Z4), enc)
        psi = product_state(M, 0, [0, 2, encode_group_element(enc, 1)])
        out = change_frame_mixed(psi, 1)
        assert out.frame == 1
        assert dict(out.terms) == pytest.approx({(2, 0, 0): H, (2, 0, 1): -H}, abs=1e-15)

    def test_mixed_identity_target(self):
        enc = half_angle_encoding(4)
        M = (Regular(Z4), Regular(Z4), enc)
        psi = product_state(M, 0, [0, 0, encode_group_element(enc, 0)])
        assert amplitude_distance(change_frame_mixed(psi, 1), QuantumState(1, M, psi.terms)) < 1e-15

    def test_mixed_superposition_entangles(self):
        enc = half_angle_encoding(4)
        M = (Regular(Z4), Regular(Z4), enc)
        v = encode_group_element(enc, 0)
        psi = superpose([H, H], [product_state(M, 0, [0, 0, v]), product_state(M, 0, [0, 1, v])])
        out = change_frame_mixed(psi, 1)
        dense = build_dense_operator(M, 0, 1).apply(psi, 1)
        assert amplitude_distance(out, dense) < 1e-12
        assert schmidt_rank(out, [0]) == 2


MODEL_SETS = [
    (Regular(Z2),) * 3,
    (Regular(Z3),) * 3,
    (Regular(D3),) * 3,
    (Regular(build_group("S:3")), Regular(build_group("S:3"))),
    (Regular(Z4), Regular(Z4), half_angle_encoding(4)),
    (Regular(Z4), half_angle_encoding(4), Regular(Z4), half_angle_encoding(4)),
    (Regular(build_group("Z:3")), Regular(build_group("Z:3")), half_angle_encoding(3)),
]


class TestDenseOracle:
    @pytest.mark.parametrize("models", MODEL_SETS, ids=range(len(MODEL_SETS)))
    def test_sparse_equals_dense_on_basis(self, models):
        regular = [k for k, m in enumerate(models) if isinstance(m, Regular)]
        for src, tgt in itertools.permutations(regular, 2):
            U = build_dense_operator(models, src, tgt)
            for psi in all_frame_basis_states(models, src):
                assert amplitude_distance(change_frame(psi, tgt), U.apply(psi, tgt)) < 1e-12

    def test_z2_matrix_is_permutation(self):
        U = build_dense_operator((Regular(Z2),) * 3, 0, 1).matrix
        assert U.shape == (8, 8)
        assert set(np.unique(U)) <= {0.0, 1.0}
        assert np.array_equal(U.sum(axis=0), np.ones(8))

    def test_z3_unitary(self):
        U = build_dense_operator((Regular(Z3),) * 3, 0, 2).matrix
        assert U.shape == (27, 27)
        assert np.max(np.abs(U.conj().T @ U - np.eye(27))) < 1e-12

    def test_source_equals_target(self):
        M = (Regular(Z3),) * 3
        assert np.array_equal(build_dense_operator(M, 1, 1).matrix, np.eye(27))
        psi = basis_state(M, 1, (2, 0, 1))
        assert change_frame(psi, 1).terms == psi.terms

    def test_cap(self):
        with pytest.raises(DimensionError):
            build_dense_operator((Regular(build_group("Z:17")),) * 3, 0, 1)

    def test_mixed_unitary(self):
        M = (Regular(Z4), Regular(Z4), half_angle_encoding(4))
        U = build_dense_operator(M, 0, 1).matrix
        assert np.max(np.abs(U.conj().T @ U - np.eye(32))) < 1e-12


class TestObservables:
    def test_identity(self):
        M = (Regular(Z3),) * 3
        Z = ObservableMatrix(np.eye(27), M)
        assert np.max(np.abs(transform_observable(Z, 0, 1).matrix - np.eye(27))) < 1e-12

    def test_projector_relabels(self):
        M = (Regular(Z2),) * 3
        proj = np.diag([1.0, 0.0])
        Zb = local_observable(M, 1, proj)  # "B is up" relative to A
        Zt = transform_observable(Zb, 0, 1).matrix
        Za = local_observable(M, 0, proj).matrix  # "A is up" relative to B
        frame_b = local_observable(M, 1, proj).matrix  # projector onto frame-consistent states
        assert np.max(np.abs(Zt @ frame_b - Za @ frame_b)) < 1e-12

    def test_spectrum_preserved(self):
        rng = np.random.default_rng(11)
        M = (Regular(Z3),) * 3
        A = rng.normal(size=(27, 27)) + 1j * rng.normal(size=(27, 27))
        Z = ObservableMatrix(A + A.conj().T, M)
        Zt = transform_observable(Z, 0, 2)
        assert np.max(np.abs(np.linalg.eigvalsh(Z.matrix) - np.linalg.eigvalsh(Zt.matrix))) < 1e-9

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            ObservableMatrix(np.array([[0, 1], [0, 0]]), (Regular(Z2),))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.sampled_from([(0, 1), (0, 2), (1, 2), (2, 0)]))
    def test_expectation_invariance(self, seed, pair):
        rng = np.random.default_rng(seed)
        src, tgt = pair
        M = (Regular(Z3),) * 3
        A = rng.normal(size=(27, 27)) + 1j * rng.normal(size=(27, 27))
        Z = ObservableMatrix(A + A.conj().T, M)
        psi = random_state(rng, M, src)
        moved = change_frame(psi, tgt)
        assert abs(Z.expectation(psi) - transform_observable(Z, src, tgt).expectation(moved)) < 1e-9


class TestLemmas:
    @pytest.mark.parametrize("spec,n", [("Z:2", 3), ("Z:6", 2), ("D:4", 2), ("D:3", 3), ("Z:5", 3)])
    def test_residuals(self, spec, n):
        rep = verify_lemmas(build_group(spec), n)
        assert rep.passed
        for name in ("unitarity", "adjoint_inverse", "transitivity"):
            assert rep[name].residual < 1e-12

    def test_cap(self):
        with pytest.raises(DimensionError):
            verify_lemmas(build_group("Z:17"), 3)

    def test_needs_two_systems(self):
        with pytest.raises(ValueError):
            verify_lemmas(Z2, 1)


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(0, 5), min_size=2, max_size=4), st.data())
    def test_classical_embedding(self, configs, data):
        configs[0] = 0
        n = len(configs)
        j = data.draw(st.integers(0, n - 1))
        psi = basis_state((Regular(D3),) * n, 0, configs)
        out = change_frame_quantum(psi, j)
        classical = change_frame_classical(ClassicalState(0, D3, ("G",) * n, tuple(configs)), j)
        assert list(out.terms) == [classical.configs]

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(1, 2))
    def test_linearity(self, seed, target):
        rng = np.random.default_rng(seed)
        M = (Regular(D3),) * 3
        a, b = random_state(rng, M), random_state(rng, M)
        x, y = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        lhs = change_frame_quantum(superpose([x, y], [a, b]), target)
        rhs = superpose([x, y], [change_frame_quantum(a, target), change_frame_quantum(b, target)])
        assert amplitude_distance(lhs, rhs) < 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(0, 2), st.integers(0, 2))
    def test_frame_slot_convention_and_norm(self, seed, j, k):
        rng = np.random.default_rng(seed)
        M = (Regular(D3),) * 3
        psi = random_state(rng, M, 0)
        out = change_frame_quantum(change_frame_quantum(psi, j), k)
        assert all(lab[k] == D3.identity for lab in out.terms)
        assert abs(out.norm - 1) < 1e-10
        assert amplitude_distance(out, change_frame_quantum(psi, k)) < 1e-12


class TestEquivalence:
    @pytest.mark.parametrize("d", [2, 3, 5, 8, 12])
    def test_agreement(self, d):
        rep = translation_equivalence_check(d)
        assert rep.passed and rep["max_deviation"].residual < 1e-12

    def test_spot_state_reported(self):
        assert "spot_state" in translation_equivalence_check(12)

    def test_range(self):
        with pytest.raises(ValueError):
            translation_equivalence_check(17)

    def test_shift_operator_translates(self):
        d = 7
        for x in range(d):
            S = shift_operator(d, x)
            for y in range(d):
                assert np.allclose(S @ np.eye(d)[:, y], np.eye(d)[:, (y - x) % d], atol=1e-12)

    def test_parity_swap(self):
        P = parity_swap(3)
        v = np.zeros(9)
        v[1 * 3 + 2] = 1  # |1⟩|2⟩
        assert np.argmax(P @ v) == ((-2) % 3) * 3 + 1
