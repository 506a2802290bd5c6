import numpy as np
import pytest

import helpers as H
from nmchain.chains import build_embedding, repeated_xor, sqrt_xor
from nmchain.channels import (
    ChoiMatrix,
    KrausSet,
    LinearMap,
    apply_kraus,
    apply_map,
    apply_selective,
    choi,
    compose,
    divisibility_scan,
    divisibility_step,
    identity_map,
    is_cp,
    is_trace_preserving,
    kraus_from_collision,
    map_from_kraus,
    map_tomography,
    min_choi_eigenvalue,
    singular_values,
    unvec,
    vec,
)
from nmchain.gates import molecule_state
from nmchain.linalg import DensityMatrix, computational_basis


def _dephase_kraus(p):
    z = np.diag([1.0, -1.0]).astype(complex)
    return KrausSet((np.sqrt(1 - p) * np.eye(2, dtype=complex), np.sqrt(p) * z), (0, 1))


def test_kraus_set_validation():
    _dephase_kraus(0.3)
    with pytest.raises(ValueError):
        KrausSet((np.eye(2), np.eye(2)), (0, 1))  # sums to 2*I
    with pytest.raises(ValueError):
        KrausSet((np.eye(2),), (0, 1))
    with pytest.raises(ValueError):
        KrausSet((), ())


@pytest.mark.parametrize("kind", ["double", "split"])
@pytest.mark.parametrize("phi", [0.3, np.pi / 6, 1.1])
def test_kraus_from_collision_matches_block_oracle(kind, phi):
    model = repeated_xor(phi) if kind == "double" else sqrt_xor(phi)
    step, kraus = build_embedding(model)
    want0, want1 = H.kraus_pair(phi, kind)
    assert np.abs(kraus.operators[0] - want0).max() < 1e-14
    assert np.abs(kraus.operators[1] - want1).max() < 1e-14
    # and through the public constructor directly
    direct = kraus_from_collision(step, molecule_state(phi), computational_basis(2))
    for a, b in zip(direct.operators, kraus.operators):
        assert np.abs(a - b).max() == 0.0


def test_kraus_from_collision_rejects_bad_basis():
    model = repeated_xor(0.4)
    step, _ = build_embedding(model)
    bad = [molecule_state(0.0), molecule_state(0.2)]  # not orthogonal
    with pytest.raises(ValueError):
        kraus_from_collision(step, molecule_state(0.4), bad)


def test_apply_kraus_and_selective():
    ks = _dephase_kraus(0.25)
    r = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    out = apply_kraus(ks, r)
    assert np.allclose(out, [[0.5, 0.25], [0.25, 0.5]])
    dm = DensityMatrix(r, slots=("sys",))
    out_dm = apply_kraus(ks, dm)
    assert isinstance(out_dm, DensityMatrix) and out_dm.slots == ("sys",)
    st, p = apply_selective(ks, r, 1)
    assert p == pytest.approx(0.25, abs=1e-15)
    assert np.allclose(st, [[0.5, -0.5], [-0.5, 0.5]])
    probs = [apply_selective(ks, r, l)[1] for l in ks.labels]
    assert sum(probs) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValueError):
        apply_selective(ks, r, 7)


def test_apply_selective_rejects_zero_probability_branch():
    ks = _dephase_kraus(0.0)
    with pytest.raises(ValueError):
        apply_selective(ks, np.diag([1.0, 0.0]).astype(complex), 1)


def test_vec_unvec_column_stacking():
    m = np.array([[1, 2], [3, 4]], dtype=complex)
    assert np.array_equal(vec(m), [1, 3, 2, 4])
    assert np.array_equal(unvec(vec(m)), m)


def test_map_from_kraus_agrees_with_direct_application():
    rng = np.random.default_rng(2)
    ks = _dephase_kraus(0.3)
    lm = map_from_kraus(ks)
    assert is_trace_preserving(lm)
    for _ in range(5):
        r = H.rand_rho(rng, 2)
        assert np.allclose(apply_map(lm, r), apply_kraus(ks, r), atol=1e-14)


def test_identity_and_compose():
    ident = identity_map(2)
    rng = np.random.default_rng(3)
    r = H.rand_rho(rng, 2)
    assert np.allclose(apply_map(ident, r), r)
    a = map_from_kraus(_dephase_kraus(0.2))
    b = map_from_kraus(_dephase_kraus(0.4))
    both = compose(a, b)
    assert np.allclose(apply_map(both, r), apply_map(a, apply_map(b, r)), atol=1e-14)
    with pytest.raises(ValueError):
        compose(a, identity_map(4))


def test_choi_of_known_channels():
    ident = choi(identity_map(2))
    v = np.array([1.0, 0.0, 0.0, 1.0])
    assert np.allclose(ident.matrix, np.outer(v, v))
    assert min_choi_eigenvalue(ident) == pytest.approx(0.0, abs=1e-13)
    assert is_cp(ident)
    dephase = choi(map_from_kraus(_dephase_kraus(0.3)))
    assert is_cp(dephase)
    # transpose map is the canonical non-CP positive map
    swap = np.zeros((4, 4), complex)
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2), complex)
            e[i, j] = 1.0
            swap[:, j * 2 + i] = vec(e.T)
    assert min_choi_eigenvalue(choi(LinearMap(swap))) == pytest.approx(-1.0, abs=1e-12)
    assert not is_cp(choi(LinearMap(swap)))


def test_choi_matches_oracle_for_collision_maps():
    for kind, model in [("double", repeated_xor(0.35)), ("split", sqrt_xor(0.35))]:
        mem = np.diag([1.0, 0.0]).astype(complex)
        s = H.sys_map_oracle(0.35, kind, mem, 3)
        got = choi(LinearMap(s)).matrix
        assert np.abs(got - H.choi_oracle(s)).max() < 1e-13


def test_map_tomography_reconstructs_kraus_map():
    ks = _dephase_kraus(0.45)
    lm = map_from_kraus(ks)
    rebuilt = map_tomography(lambda r: apply_kraus(ks, r), 2)
    assert np.abs(rebuilt.matrix - lm.matrix).max() < 1e-13


def test_map_tomography_four_dimensional():
    rng = np.random.default_rng(5)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    u, _ = np.linalg.qr(g)
    ks = KrausSet((u,), (0,))
    rebuilt = map_tomography(lambda r: u @ r @ u.conj().T, 4)
    assert np.abs(rebuilt.matrix - map_from_kraus(ks).matrix).max() < 1e-12


def test_singular_values_match_lapack():
    rng = np.random.default_rng(8)
    for n in (2, 3, 4):
        m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        got = singular_values(m)
        want = np.linalg.svd(m, compute_uv=False)
        assert np.allclose(got, want, atol=1e-11)


def test_divisibility_step_recovers_intermediate():
    a = map_from_kraus(_dephase_kraus(0.2))
    b = map_from_kraus(_dephase_kraus(0.35))
    total = compose(b, a)
    step = divisibility_step(total, a)
    assert step.exists is True
    assert step.min_choi_eig >= -1e-12
    assert np.abs(step.intermediate.matrix - b.matrix).max() < 1e-12


def test_divisibility_step_indeterminate_on_singular_previous():
    # a completely depolarizing-style rank-deficient map
    sink = np.zeros((4, 4), complex)
    sink[:, 0] = vec(np.diag([1.0, 0.0]))
    sink[:, 3] = vec(np.diag([1.0, 0.0]))
    prev = LinearMap(sink)
    step = divisibility_step(identity_map(2), prev)
    assert step.exists is None
    assert step.intermediate is None and step.min_choi_eig is None
    assert step.smallest_singular < 1e-10


def test_divisibility_scan_shapes():
    maps = [map_from_kraus(_dephase_kraus(0.1 * (t + 1))) for t in range(4)]
    scan = divisibility_scan(maps)
    assert len(scan) == 4
    assert all(s.exists is True for s in scan)
    assert divisibility_scan([]) == []


def test_choi_matrix_validation():
    with pytest.raises(ValueError):
        ChoiMatrix(np.eye(3), 2)
    with pytest.raises(ValueError):
        min_choi_eigenvalue(np.array([[0.0, 1.0], [0.0, 0.0]]))
