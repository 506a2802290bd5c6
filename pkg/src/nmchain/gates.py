"""Collision gates and register embedding.

A gate carries its matrix together with a tuple of slot roles written in
the same ordering convention as the rest of the package (first role = most
significant bit). embed() places a gate into a larger named register so
callers never do index bookkeeping by hand.

The controlled gates here use the system qubit as control and the fresh
molecule as target; the two constructors expose whichever slot ordering
makes their matrix most readable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import PureState, tensor

UNITARITY_TOL = 1e-12

# branch of sqrt(i/2): squares to i/2, which makes sqrt_xor_gate()^2 the plain xor
SQRT_HALF_I = (1.0 + 1.0j) / 2.0


@dataclass(frozen=True, eq=False)
class UnitaryGate:
    matrix: np.ndarray
    slot_roles: tuple[str, ...]
    label: str = ""

    def __post_init__(self):
        m = np.ascontiguousarray(np.asarray(self.matrix, dtype=complex))
        roles = tuple(self.slot_roles)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "slot_roles", roles)
        if len(set(roles)) != len(roles):
            raise ValueError(f"duplicate slot roles {roles}")
        d = 2 ** len(roles)
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not fit {len(roles)} slots")
        dev = np.abs(m @ m.conj().T - np.eye(d)).max()
        if dev > UNITARITY_TOL:
            raise ValueError(f"matrix is not unitary (residual {dev:.3e})")

    @property
    def arity(self) -> int:
        return len(self.slot_roles)


def molecule_state(phi: float) -> PureState:
    """Fresh molecule qubit: cos(phi)|0> + sin(phi)|1>."""
    return PureState(np.array([np.cos(phi), np.sin(phi)], dtype=complex))


def prepare_gate(phi: float) -> UnitaryGate:
    """Real rotation taking |0> to the fresh molecule state."""
    c, s = np.cos(phi), np.sin(phi)
    m = np.array([[c, -s], [s, c]], dtype=complex)
    return UnitaryGate(m, ("mol",), label="prepare")


def xor_gate() -> UnitaryGate:
    """Molecule flips when the system is set; written in |mol, sys> ordering."""
    m = np.array(
        [
            [1, 0, 0, 0],
            [0, 0, 0, 1],
            [0, 0, 1, 0],
            [0, 1, 0, 0],
        ],
        dtype=complex,
    )
    return UnitaryGate(m, ("mol", "sys"), label="xor")


def swap_gate() -> UnitaryGate:
    m = np.array(
        [
            [1, 0, 0, 0],
            [0, 0, 1, 0],
            [0, 1, 0, 0],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    )
    return UnitaryGate(m, ("a", "b"), label="swap")


def sqrt_xor_gate() -> UnitaryGate:
    """Square root of the controlled flip; written in |sys, mol> ordering.

    The lower block is sqrt(i/2) * (I - i sigma_x); squaring the full gate
    reproduces xor_gate() exactly.
    """
    b = SQRT_HALF_I
    m = np.array(
        [
            [1, 0, 0, 0],
            [0, 1, 0, 0],
            [0, 0, b, -1j * b],
            [0, 0, -1j * b, b],
        ],
        dtype=complex,
    )
    return UnitaryGate(m, ("sys", "mol"), label="sqrt-xor")


def embed(gate: UnitaryGate, register_slots: Sequence[str], acting_on: Sequence[str]) -> UnitaryGate:
    """Expand a gate to a named register.

    acting_on lists the register slots receiving the gate's roles, in role
    order, so embed(g, ("a", "b", "c"), ("c", "a")) puts g's first role on
    slot "c" and its second on slot "a".
    """
    register = tuple(register_slots)
    acting = tuple(acting_on)
    if len(set(register)) != len(register):
        raise ValueError(f"duplicate register slots {register}")
    if len(acting) != gate.arity:
        raise ValueError(f"gate has {gate.arity} slots but acting_on names {len(acting)}")
    if len(set(acting)) != len(acting):
        raise ValueError(f"repeated slots in acting_on={acting}")
    try:
        positions = [register.index(s) for s in acting]
    except ValueError:
        missing = [s for s in acting if s not in register]
        raise ValueError(f"slots {missing} not in register {register}") from None

    n = len(register)
    k = gate.arity
    front = positions + [q for q in range(n) if q not in positions]
    big = tensor(gate.matrix, np.eye(2 ** (n - k))) if n > k else gate.matrix
    # fidx[i] = index of register basis state i in the front-ordered basis
    fidx = np.zeros(2 ** n, dtype=np.intp)
    for i in range(2 ** n):
        f = 0
        for j, q in enumerate(front):
            f |= ((i >> (n - 1 - q)) & 1) << (n - 1 - j)
        fidx[i] = f
    return UnitaryGate(big[np.ix_(fidx, fidx)], register, label=gate.label)
