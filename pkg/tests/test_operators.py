import numpy as np
import pytest

from ddkit.errors import PreconditionError
from ddkit.linalg import spectral_norm
from ddkit.operators import (
    Moos,
    Operator,
    build_moos,
    lie_closure,
    mlevel_diagonal_moos,
    mlevel_full_moos,
    moos_from_json,
    moos_to_json,
    pauli,
    qubit_dephasing_moos,
    qubit_full_moos,
    sigma_x_level,
    sigma_z_level,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def test_pauli_single_qubit():
    assert np.array_equal(pauli("x", 1, 1).matrix, SX)
    assert np.array_equal(pauli("z", 1, 1).matrix, SZ)


def test_pauli_embedding_ordering():
    # qubit 1 is the leftmost factor, so Z on qubit 2 of 2 is I (x) sigma_z
    assert np.array_equal(pauli("z", 2, 2).matrix, np.diag([1, -1, 1, -1]).astype(complex))
    assert np.array_equal(pauli("z", 1, 2).matrix, np.diag([1, 1, -1, -1]).astype(complex))


def test_pauli_xy_anticommute():
    x, y = pauli("x", 1, 1).matrix, pauli("y", 1, 1).matrix
    assert spectral_norm(x @ y + y @ x) == 0.0


def test_pauli_range_checks():
    with pytest.raises(PreconditionError):
        pauli("w", 1, 1)
    with pytest.raises(PreconditionError):
        pauli("x", 3, 2)


def test_sigma_z_level_values():
    assert np.array_equal(np.diag(sigma_z_level(1, 3).matrix).real, [1, -1, 1])
    assert np.array_equal(np.diag(sigma_z_level(2, 4).matrix).real, [1, 1, -1, -1])
    assert np.array_equal(sigma_z_level(1, 2).matrix, SZ)


def test_sigma_x_level_swaps():
    m = sigma_x_level(1, 4).matrix
    for a, b in [(0, 1), (2, 3)]:
        assert m[a, b] == 1 and m[b, a] == 1
    assert np.count_nonzero(m) == 4


def test_sigma_x_level_divisibility():
    with pytest.raises(PreconditionError):
        sigma_x_level(1, 3)


def test_level_operators_anticommute():
    x1 = sigma_x_level(1, 4).matrix
    z1 = sigma_z_level(1, 4).matrix
    assert spectral_norm(x1 @ z1 + z1 @ x1) == 0.0


def test_level_operators_reduce_to_paulis():
    # for M = 2^L the level operators coincide with the qubit Paulis, with
    # the level index counting from the fast (rightmost) factor
    assert np.array_equal(sigma_z_level(1, 4).matrix, pauli("z", 2, 2).matrix)
    assert np.array_equal(sigma_z_level(2, 4).matrix, pauli("z", 1, 2).matrix)
    assert np.array_equal(sigma_x_level(1, 4).matrix, pauli("x", 2, 2).matrix)


def test_qubit_full_moos_signature():
    moos = qubit_full_moos(2)
    assert moos.labels == ("Z1", "X1", "Z2", "X2")
    sig = moos.signature
    by = {lab: i for i, lab in enumerate(moos.labels)}
    assert sig[by["Z1"], by["X1"]] == -1
    assert sig[by["Z2"], by["X2"]] == -1
    for a in ("Z1", "X1"):
        for b in ("Z2", "X2"):
            assert sig[by[a], by[b]] == 1


def test_qubit_dephasing_moos_commuting():
    moos = qubit_dephasing_moos(3)
    assert len(moos) == 3
    assert np.all(moos.signature == 1)


def test_mlevel_diagonal_count():
    assert len(mlevel_diagonal_moos(5)) == 3  # ceil(log2 5)
    assert np.all(mlevel_diagonal_moos(5).signature == 1)


def test_mlevel_full_divisibility_gating():
    labels = mlevel_full_moos(6).labels
    assert "Sx1" in labels and "Sx2" not in labels  # 6 mod 4 != 0
    labels8 = mlevel_full_moos(8).labels
    assert {"Sx1", "Sx2", "Sx3"} <= set(labels8)


def test_build_moos_dispatch():
    assert len(build_moos("qubit_full:2")) == 4
    with pytest.raises(PreconditionError):
        build_moos("nosuch:3")
    with pytest.raises(PreconditionError):
        build_moos("qubit_full")


def test_moos_rejects_skew_pair():
    skew = Operator("D", (SX + SY) / np.sqrt(2), 2)
    with pytest.raises(PreconditionError) as err:
        Moos((pauli("x", 1, 1), skew))
    assert "neither commutes nor anticommutes" in str(err.value)


def test_moos_rejects_non_unitary_hermitian():
    with pytest.raises(PreconditionError):
        Moos((Operator("H", np.array([[1.0, 1.0], [1.0, 0.0]]), 2),))


def test_moos_anticommuting_members_traceless():
    for moos in (qubit_full_moos(2), mlevel_full_moos(4), mlevel_full_moos(6)):
        n = len(moos)
        for i in range(n):
            for j in range(i + 1, n):
                if moos.signature[i, j] == -1:
                    for op in (moos.elements[i], moos.elements[j]):
                        assert abs(np.trace(op.matrix)) <= 1e-12


def test_lie_closure_dimensions():
    assert len(lie_closure(Moos((pauli("z", 1, 1),)))) == 1
    assert len(lie_closure(Moos((pauli("x", 1, 1), pauli("y", 1, 1))))) == 3
    assert len(lie_closure(qubit_full_moos(1))) == 3
    assert len(lie_closure(qubit_full_moos(2))) == 15


def test_lie_closure_orthonormal():
    basis = lie_closure(qubit_full_moos(1))
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            inner = np.trace(a.matrix.conj().T @ b.matrix) / 2
            assert inner == pytest.approx(1.0 if i == j else 0.0, abs=1e-9)


def test_lie_closure_generator_order_invariant():
    a = len(lie_closure(Moos((pauli("z", 1, 1), pauli("x", 1, 1)))))
    b = len(lie_closure(Moos((pauli("x", 1, 1), pauli("z", 1, 1)))))
    assert a == b == 3


def test_lie_closure_max_dim_cap():
    with pytest.raises(PreconditionError):
        lie_closure(qubit_full_moos(2), max_dim=5)


def test_moos_json_round_trip():
    moos = qubit_full_moos(2)
    again = moos_from_json(moos_to_json(moos))
    assert again.labels == moos.labels
    for a, b in zip(moos.elements, again.elements):
        assert np.array_equal(a.matrix, b.matrix)
    assert np.array_equal(again.signature, moos.signature)
