import numpy as np
import pytest

import helpers as H
from nmchain.linalg import (
    DensityMatrix,
    PureState,
    basis_state,
    computational_basis,
    dagger,
    eig_hermitian,
    partial_trace,
    partial_trace_array,
    partial_transpose,
    pure_density,
    tensor,
    trace_norm_distance,
    von_neumann_entropy,
)


def test_dagger_and_tensor():
    a = np.array([[1.0, 2.0 + 1j], [0.0, 3j]])
    assert np.array_equal(dagger(a), a.conj().T)
    b = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert np.allclose(tensor(a, b), np.kron(a, b))
    # first factor is the most significant slot
    z = np.diag([1.0, -1.0])
    t = tensor(z, np.eye(2))
    assert np.allclose(t, np.diag([1.0, 1.0, -1.0, -1.0]))


def test_pure_state_validation():
    s = PureState(np.array([1.0, 1.0]) / np.sqrt(2))
    assert s.dim == 2
    assert np.allclose(s.density(), 0.5 * np.ones((2, 2)))
    with pytest.raises(ValueError):
        PureState(np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        PureState(np.array([np.nan, 0.0]))


def test_basis_helpers():
    v = basis_state((1, 0))
    assert v.amplitudes[2] == 1.0 and abs(v.amplitudes).sum() == 1.0
    bas = computational_basis(4)
    assert np.allclose(np.stack([b.amplitudes for b in bas]), np.eye(4))


def test_density_matrix_validation():
    DensityMatrix(np.diag([0.5, 0.5]), slots=("sys",))
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.7, 0.7]), slots=("sys",))   # trace
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 1.0], [0.0, 0.5]]), slots=("sys",))  # hermiticity
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.5, 0.5]), slots=("a", "b"))  # slot/dim mismatch
    neg = DensityMatrix(np.diag([1.5, -0.5]), slots=("sys",))
    with pytest.raises(ValueError):
        neg.validate_positive()


def test_pure_density_roundtrip():
    rng = np.random.default_rng(7)
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    v /= np.linalg.norm(v)
    dm = pure_density(PureState(v), slots=("a", "b"))
    assert np.allclose(dm.matrix, np.outer(v, v.conj()))
    assert dm.slots == ("a", "b")


@pytest.mark.parametrize("n,keep", [(2, (0,)), (2, (1,)), (3, (0, 2)), (3, (1,)), (4, (1, 3))])
def test_partial_trace_against_einsum(n, keep):
    rng = np.random.default_rng(n * 10 + keep[0])
    r = H.rand_rho(rng, 2 ** n)
    got = partial_trace_array(r, n, keep)
    want = H.ptrace_general(r, n, list(keep))
    assert np.allclose(got, want, atol=1e-14)


def test_partial_trace_slot_names():
    rng = np.random.default_rng(3)
    r = H.rand_rho(rng, 8)
    dm = DensityMatrix(r, slots=("mol", "mem", "sys"))
    sub = partial_trace(dm, keep=("mem", "sys"))
    assert sub.slots == ("mem", "sys")
    assert np.allclose(sub.matrix, H.ptrace_general(r, 3, [1, 2]), atol=1e-14)
    # order of `keep` does not reorder the register
    same = partial_trace(dm, keep=("sys", "mem"))
    assert np.allclose(sub.matrix, same.matrix)


def test_partial_transpose_is_transpose_on_factor():
    rng = np.random.default_rng(11)
    a, b = H.rand_rho(rng, 2), H.rand_rho(rng, 2)
    prod = DensityMatrix(np.kron(a, b), slots=("mem", "sys"))
    assert np.allclose(partial_transpose(prod, "mem"), np.kron(a.T, b))
    assert np.allclose(partial_transpose(prod, "sys"), np.kron(a, b.T))
    r = DensityMatrix(H.rand_rho(rng, 4), slots=("mem", "sys"))
    twice = partial_transpose(DensityMatrix(partial_transpose(r, "mem"), r.slots), "mem")
    assert np.allclose(twice, r.matrix)
    with pytest.raises(ValueError):
        partial_transpose(r, "nope")


def test_partial_transpose_flags_entanglement():
    v = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2)
    bell = DensityMatrix(np.outer(v, v), slots=("mem", "sys"))
    w = np.linalg.eigvalsh(partial_transpose(bell, "mem"))
    assert w.min() < -0.49


@pytest.mark.parametrize("dim", [2, 3, 4, 6, 8, 16, 32, 64])
def test_eig_hermitian_matches_lapack(dim):
    rng = np.random.default_rng(dim)
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    a = g + g.conj().T
    w, v = eig_hermitian(a)
    ref = np.sort(np.linalg.eigvalsh(a))[::-1]
    assert np.allclose(w, ref, atol=1e-11)
    assert np.all(np.diff(w) <= 1e-12)  # descending
    assert np.allclose(v @ np.diag(w) @ dagger(v), a, atol=1e-11)
    assert np.allclose(dagger(v) @ v, np.eye(dim), atol=1e-12)


def test_eig_hermitian_near_degenerate():
    # tiny off-diagonal couplings must not stall the sweep
    a = np.diag([1.0, 1.0 + 1e-12, 2.0]).astype(complex)
    a[0, 1] = 1e-9
    a[1, 0] = 1e-9
    w, _ = eig_hermitian(a)
    assert np.allclose(w, np.sort(np.linalg.eigvalsh(a))[::-1], atol=1e-13)


def test_eig_hermitian_rejects_non_hermitian():
    with pytest.raises(ValueError):
        eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_entropy_golden_and_edge_cases():
    assert von_neumann_entropy(np.diag([0.25, 0.75])) == pytest.approx(
        0.8112781244591328, abs=1e-14)
    assert von_neumann_entropy(np.diag([1.0, 0.0])) == 0.0
    assert von_neumann_entropy(np.eye(4) / 4) == pytest.approx(2.0, abs=1e-12)
    rng = np.random.default_rng(5)
    r = H.rand_rho(rng, 4)
    assert von_neumann_entropy(r) == pytest.approx(H.entropy_oracle(r), abs=1e-11)


def test_trace_norm_distance():
    a = np.diag([1.0, 0.0]).astype(complex)
    b = np.diag([0.0, 1.0]).astype(complex)
    assert trace_norm_distance(a, b) == pytest.approx(1.0, abs=1e-12)
    rng = np.random.default_rng(9)
    x, y = H.rand_rho(rng, 4), H.rand_rho(rng, 4)
    assert trace_norm_distance(x, y) == pytest.approx(H.tdist(x, y), abs=1e-11)
    assert trace_norm_distance(x, x) <= 1e-13
