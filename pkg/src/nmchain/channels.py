"""Quantum channels: Kraus sets, superoperator matrices, Choi tests,
process tomography and one-step divisibility checks.

Superoperators use the column-stacking convention: vec(|i><j|) is the unit
vector at index j*d + i, so vec(M rho M^dagger) = (conj(M) kron M) vec(rho).
Choi matrices are unnormalized (trace d for a trace-preserving map) with
the reference copy on the most significant index.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .linalg import DensityMatrix, PureState, dagger, eig_hermitian

COMPLETENESS_TOL = 1e-12
CP_TOL_DEFAULT = 1e-9
SINGULAR_CUTOFF = 1e-10


@dataclass(frozen=True, eq=False)
class KrausSet:
    """Kraus operators of a channel, indexed by measurement outcome labels."""

    operators: tuple[np.ndarray, ...]
    labels: tuple[int, ...]

    def __post_init__(self):
        ops = tuple(np.ascontiguousarray(np.asarray(m, dtype=complex)) for m in self.operators)
        labels = tuple(self.labels)
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "labels", labels)
        if not ops:
            raise ValueError("KrausSet needs at least one operator")
        if len(labels) != len(ops):
            raise ValueError("one label per operator required")
        d = ops[0].shape[0]
        for m in ops:
            if m.shape != (d, d):
                raise ValueError("all Kraus operators must share one square shape")
        total = sum(dagger(m) @ m for m in ops)
        dev = np.abs(total - np.eye(d)).max()
        if dev > COMPLETENESS_TOL:
            raise ValueError(f"Kraus completeness violated (residual {dev:.3e})")

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]


def kraus_from_collision(
    u, molecule: PureState, readout_basis: Sequence[PureState]
) -> KrausSet:
    """Kraus operators of one collision followed by a molecule readout.

    The molecule occupies the FIRST (most significant) slot of the unitary;
    operator number l is <readout_l| u |molecule>, acting on the remaining
    slots. The readout basis must be a complete orthonormal basis of the
    molecule space.
    """
    matrix = u.matrix if hasattr(u, "matrix") else np.asarray(u, dtype=complex)
    d_mol = molecule.dim
    if len(readout_basis) != d_mol:
        raise ValueError(f"readout basis must have {d_mol} states, got {len(readout_basis)}")
    for i, a in enumerate(readout_basis):
        if a.dim != d_mol:
            raise ValueError("readout states must match the molecule dimension")
        for j, b in enumerate(readout_basis):
            olap = np.vdot(a.amplitudes, b.amplitudes)
            if abs(olap - (1.0 if i == j else 0.0)) > 1e-12:
                raise ValueError("readout basis is not orthonormal")
    total = matrix.shape[0]
    if total % d_mol != 0:
        raise ValueError("unitary dimension does not factor over the molecule slot")
    d_rest = total // d_mol
    blocks = matrix.reshape(d_mol, d_rest, d_mol, d_rest)
    ops = []
    for lam in readout_basis:
        ops.append(np.einsum("a,arbc,b->rc", lam.amplitudes.conj(), blocks, molecule.amplitudes))
    return KrausSet(tuple(ops), tuple(range(len(ops))))


def _as_array(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def apply_kraus(kraus: KrausSet, rho):
    """Non-selective application; preserves the input type."""
    m = _as_array(rho)
    out = np.zeros_like(m)
    for op in kraus.operators:
        out += op @ m @ dagger(op)
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(out, rho.slots)
    return out


def apply_selective(kraus: KrausSet, rho, label: int):
    """One measurement branch: returns (normalized state, probability)."""
    try:
        k = kraus.labels.index(label)
    except ValueError:
        raise ValueError(f"no outcome labelled {label!r}") from None
    m = _as_array(rho)
    op = kraus.operators[k]
    raw = op @ m @ dagger(op)
    p = float(np.trace(raw).real)
    if p <= 1e-15:
        raise ValueError(f"outcome {label!r} has probability {p:.3e}; branch state undefined")
    out = raw / p
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(out, rho.slots), p
    return out, p


@dataclass(frozen=True, eq=False)
class LinearMap:
    """Superoperator as a d^2 x d^2 matrix in column-stacking convention."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.ascontiguousarray(np.asarray(self.matrix, dtype=complex))
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"superoperator must be square, got {m.shape}")
        d = int(round(np.sqrt(m.shape[0])))
        if d * d != m.shape[0]:
            raise ValueError(f"superoperator side {m.shape[0]} is not a perfect square")

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))


def vec(m: np.ndarray) -> np.ndarray:
    return np.asarray(m, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(v.shape[0])))
    return v.reshape((d, d), order="F")


def identity_map(dim: int) -> LinearMap:
    return LinearMap(np.eye(dim * dim, dtype=complex))


def map_from_kraus(kraus: KrausSet) -> LinearMap:
    d = kraus.dim
    s = np.zeros((d * d, d * d), dtype=complex)
    for op in kraus.operators:
        s += np.kron(op.conj(), op)
    return LinearMap(s)


def apply_map(m: LinearMap, rho):
    out = unvec(m.matrix @ vec(_as_array(rho)))
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(out, rho.slots)
    return out


def compose(outer: LinearMap, inner: LinearMap) -> LinearMap:
    """Map applying inner first, then outer."""
    if outer.dim != inner.dim:
        raise ValueError("cannot compose maps of different dimension")
    return LinearMap(outer.matrix @ inner.matrix)


def is_trace_preserving(m: LinearMap, tol: float = 1e-12) -> bool:
    d = m.dim
    ident = np.eye(d, dtype=complex)
    # trace of the output of every basis element must equal the input trace
    resid = vec(ident).conj() @ m.matrix - vec(ident).conj()
    return bool(np.abs(resid).max() <= tol)


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    matrix: np.ndarray
    dim: int

    def __post_init__(self):
        m = np.ascontiguousarray(np.asarray(self.matrix, dtype=complex))
        object.__setattr__(self, "matrix", m)
        if m.shape != (self.dim ** 2, self.dim ** 2):
            raise ValueError(f"Choi shape {m.shape} does not fit dimension {self.dim}")


def choi(m: LinearMap) -> ChoiMatrix:
    d = m.dim
    c = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            c[i * d:(i + 1) * d, j * d:(j + 1) * d] = apply_map(m, e)
    return ChoiMatrix(c, d)


def min_choi_eigenvalue(c: Union[ChoiMatrix, np.ndarray]) -> float:
    m = c.matrix if isinstance(c, ChoiMatrix) else np.asarray(c, dtype=complex)
    skew = np.abs(m - dagger(m)).max()
    if skew > 1e-8:
        raise ValueError(f"Choi matrix is far from Hermitian (residual {skew:.3e})")
    w, _ = eig_hermitian((m + dagger(m)) / 2.0)
    return float(w[-1])


def is_cp(c: Union[ChoiMatrix, np.ndarray], tol: float = CP_TOL_DEFAULT) -> bool:
    return min_choi_eigenvalue(c) >= -tol


def map_tomography(evolve: Callable[[np.ndarray], np.ndarray], dim: int) -> LinearMap:
    """Reconstruct a linear map from its action on physical probe states.

    Probes are the basis projectors plus the +x and +y style superpositions
    for every index pair; the action on |i><j| follows by linearity, so
    evolve() is only ever handed genuine density matrices.
    """
    def proj(v):
        v = np.asarray(v, dtype=complex)
        return np.outer(v, v.conj()) / np.vdot(v, v).real

    basis_out = {}
    diag_out = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        diag_out.append(np.asarray(evolve(proj(e)), dtype=complex))
        basis_out[(i, i)] = diag_out[i]
    for i in range(dim):
        for j in range(i + 1, dim):
            ei = np.zeros(dim)
            ei[i] = 1.0
            ej = np.zeros(dim)
            ej[j] = 1.0
            plus = np.asarray(evolve(proj(ei + ej)), dtype=complex)
            circ = np.asarray(evolve(proj(ei + 1j * ej)), dtype=complex)
            cross = plus + 1j * circ - (1 + 1j) / 2.0 * (diag_out[i] + diag_out[j])
            basis_out[(i, j)] = cross
            basis_out[(j, i)] = dagger(cross)
    s = np.zeros((dim * dim, dim * dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            s[:, j * dim + i] = vec(basis_out[(i, j)])
    return LinearMap(s)


def singular_values(m: np.ndarray) -> np.ndarray:
    """Singular values (descending) via the Hermitian eigensolver on m^dagger m."""
    a = np.asarray(m, dtype=complex)
    w, _ = eig_hermitian(dagger(a) @ a)
    return np.sqrt(np.clip(w, 0.0, None))


@dataclass(frozen=True)
class DivisibilityStep:
    """Outcome of one intermediate-map CP check.

    exists is True/False when the previous map is invertible, None when it
    is too singular for the check to decide anything.
    """

    exists: Optional[bool]
    intermediate: Optional[LinearMap]
    min_choi_eig: Optional[float]
    smallest_singular: float


def divisibility_step(
    m_t: LinearMap,
    m_prev: LinearMap,
    *,
    sv_cutoff: float = SINGULAR_CUTOFF,
    cp_tol: float = CP_TOL_DEFAULT,
) -> DivisibilityStep:
    """CP test of the map connecting two accumulated evolutions.

    Solves L m_prev = m_t for the intermediate L and checks its Choi
    spectrum. When m_prev has a singular value below sv_cutoff the step is
    reported as indeterminate rather than guessed.
    """
    if m_t.dim != m_prev.dim:
        raise ValueError("maps act on different dimensions")
    sv = singular_values(m_prev.matrix)
    smallest = float(sv[-1])
    if smallest < sv_cutoff:
        return DivisibilityStep(None, None, None, smallest)
    inter = LinearMap(np.linalg.solve(m_prev.matrix.T, m_t.matrix.T).T)
    mn = min_choi_eigenvalue(choi(inter))
    return DivisibilityStep(mn >= -cp_tol, inter, mn, smallest)


def divisibility_scan(
    maps: Sequence[LinearMap],
    *,
    sv_cutoff: float = SINGULAR_CUTOFF,
    cp_tol: float = CP_TOL_DEFAULT,
) -> list[DivisibilityStep]:
    """Stepwise CP checks for a whole trajectory of accumulated maps.

    maps[t] is the evolution up to step t+1; the first entry is checked
    against the identity, later ones against their predecessor.
    """
    if not maps:
        return []
    out = [divisibility_step(maps[0], identity_map(maps[0].dim), sv_cutoff=sv_cutoff, cp_tol=cp_tol)]
    for prev, cur in zip(maps, maps[1:]):
        out.append(divisibility_step(cur, prev, sv_cutoff=sv_cutoff, cp_tol=cp_tol))
    return out
