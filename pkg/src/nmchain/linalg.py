"""Dense complex linear algebra for small qubit registers.

Conventions used by the whole package:

* a register is a tuple of named qubit slots; the FIRST slot owns the most
  significant bit of the matrix index, so a state on ("a", "b", "c") is
  indexed like |abc>,
* density matrices are complex128 arrays validated on construction,
* entropies are in bits (log base 2),
* the Hermitian eigensolver is a cyclic Jacobi iteration; matrices here
  never exceed dimension 64, so robustness is preferred over speed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10
NORM_TOL = 1e-12
ENTROPY_EIG_FLOOR = 1e-15

_JACOBI_OFFDIAG_TOL = 1e-13
_JACOBI_MAX_DIM = 64
_JACOBI_MAX_SWEEPS = 60


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def tensor(*ops) -> np.ndarray:
    """Kronecker product; the first factor takes the most significant indices."""
    if not ops:
        raise ValueError("tensor() needs at least one operand")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector of one or more qubits."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        object.__setattr__(self, "amplitudes", amp)
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state vector norm {norm!r} differs from 1")
        if not np.isfinite(amp).all():
            raise ValueError("state vector has non-finite amplitudes")

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


def basis_state(bits: Union[str, Sequence[int]]) -> PureState:
    """Computational basis vector, e.g. basis_state("01") = |01>."""
    bits = [int(b) for b in bits]
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be 0 or 1")
    index = 0
    for b in bits:
        index = (index << 1) | b
    amp = np.zeros(2 ** len(bits), dtype=complex)
    amp[index] = 1.0
    return PureState(amp)


def computational_basis(dim: int) -> list[PureState]:
    out = []
    for k in range(dim):
        amp = np.zeros(dim, dtype=complex)
        amp[k] = 1.0
        out.append(PureState(amp))
    return out


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian unit-trace matrix over named qubit slots.

    Hermiticity, trace and finiteness are enforced on construction.
    Positivity is checked on demand (validate_positive) because engine
    loops construct many intermediate states where the eigendecomposition
    would dominate the runtime.
    """

    matrix: np.ndarray
    slots: tuple[str, ...]

    def __post_init__(self):
        m = np.ascontiguousarray(np.asarray(self.matrix, dtype=complex))
        slots = tuple(self.slots)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "slots", slots)
        if len(set(slots)) != len(slots):
            raise ValueError(f"duplicate slot names in {slots}")
        d = 2 ** len(slots)
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not fit {len(slots)} qubit slots")
        if not np.isfinite(m).all():
            raise ValueError("density matrix has non-finite entries")
        herm = np.abs(m - dagger(m)).max()
        if herm > HERMITICITY_TOL:
            raise ValueError(f"density matrix not Hermitian (residual {herm:.3e})")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr!r} differs from 1")

    @property
    def n_qubits(self) -> int:
        return len(self.slots)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def slot_index(self, name: str) -> int:
        try:
            return self.slots.index(name)
        except ValueError:
            raise ValueError(f"no slot {name!r} in register {self.slots}") from None

    def min_eigenvalue(self) -> float:
        w, _ = eig_hermitian(self.matrix)
        return float(w[-1])

    def validate_positive(self, tol: float = POSITIVITY_TOL) -> "DensityMatrix":
        w = self.min_eigenvalue()
        if w < -tol:
            raise ValueError(f"density matrix has negative eigenvalue {w:.3e}")
        return self


def pure_density(state: PureState, slots: tuple[str, ...]) -> DensityMatrix:
    return DensityMatrix(state.density(), slots)


def _as_array(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def partial_trace_array(a: np.ndarray, n_qubits: int, keep: Sequence[int]) -> np.ndarray:
    """Partial trace of a 2^n x 2^n array; keep lists slot indices (0 = most significant)."""
    keep = sorted(keep)
    t = a.reshape((2,) * (2 * n_qubits))
    remaining = n_qubits
    for q in sorted(set(range(n_qubits)) - set(keep), reverse=True):
        t = np.trace(t, axis1=q, axis2=q + remaining)
        remaining -= 1
    d = 2 ** len(keep)
    return np.ascontiguousarray(t.reshape(d, d))


def partial_trace(rho: DensityMatrix, keep: Union[str, Iterable[str]]) -> DensityMatrix:
    """Reduced state over the kept slots, in their original register order."""
    if isinstance(keep, str):
        keep = (keep,)
    keep = tuple(keep)
    if not keep:
        raise ValueError("keep must name at least one slot")
    if len(set(keep)) != len(keep):
        raise ValueError(f"repeated slot names in keep={keep}")
    positions = sorted(rho.slot_index(k) for k in keep)
    reduced = partial_trace_array(rho.matrix, rho.n_qubits, positions)
    return DensityMatrix(reduced, tuple(rho.slots[q] for q in positions))


def partial_transpose(rho: DensityMatrix, slot: str) -> np.ndarray:
    """Transpose one slot; the result is Hermitian but in general not a state."""
    q = rho.slot_index(slot)
    n = rho.n_qubits
    t = rho.matrix.reshape((2,) * (2 * n))
    t = np.swapaxes(t, q, q + n)
    return t.reshape(rho.matrix.shape)


def eig_hermitian(h: np.ndarray, offdiag_tol: float = _JACOBI_OFFDIAG_TOL):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns (w, v): eigenvalues sorted descending, eigenvectors as the
    columns of the unitary v, with h = v @ diag(w) @ v^dagger.
    """
    a = np.array(h, dtype=complex)
    n = a.shape[0]
    if a.ndim != 2 or a.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if n > _JACOBI_MAX_DIM:
        raise ValueError(f"dimension {n} exceeds the supported maximum {_JACOBI_MAX_DIM}")
    herm = np.abs(a - dagger(a)).max()
    if herm > 1e-10:
        raise ValueError(f"matrix not Hermitian (residual {herm:.3e})")
    a = (a + dagger(a)) / 2.0
    v = np.eye(n, dtype=complex)
    skip_below = offdiag_tol / max(n, 1)

    def offdiag_norm() -> float:
        # summed directly over off-diagonal entries: subtracting the diagonal
        # from the total Frobenius norm cancels catastrophically near convergence
        off = a.copy()
        np.fill_diagonal(off, 0.0)
        return float(np.linalg.norm(off))

    converged = offdiag_norm() < offdiag_tol
    for _ in range(_JACOBI_MAX_SWEEPS):
        if converged:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                mag = abs(a[p, q])
                if mag <= skip_below:
                    continue
                phase = a[p, q] / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                if tau >= 0:
                    t = 1.0 / (tau + np.hypot(1.0, tau))
                else:
                    t = -1.0 / (-tau + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                # a <- J^dagger a J with the rotation in the (p, q) plane
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * np.conj(phase) * col_q
                a[:, q] = s * phase * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * phase * row_q
                a[q, :] = s * np.conj(phase) * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * np.conj(phase) * vq
                v[:, q] = s * phase * vp + c * vq
        converged = offdiag_norm() < offdiag_tol
    if not converged:
        raise np.linalg.LinAlgError("Jacobi iteration did not converge")
    w = np.diagonal(a).real.copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def von_neumann_entropy(rho) -> float:
    """Entropy in bits; eigenvalues below the round-off floor contribute zero."""
    m = _as_array(rho)
    w, _ = eig_hermitian(m)
    total = 0.0
    for x in w:
        if x > ENTROPY_EIG_FLOOR:
            total -= x * np.log2(x)
    return float(total)


def trace_norm_distance(a, b) -> float:
    """Half the sum of absolute eigenvalues of (a - b)."""
    ma, mb = _as_array(a), _as_array(b)
    if ma.shape != mb.shape:
        raise ValueError(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    w, _ = eig_hermitian(ma - mb)
    return float(0.5 * np.abs(w).sum())
