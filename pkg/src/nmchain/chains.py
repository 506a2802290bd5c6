"""Collision chains.

Three built-in models share one picture: a stream of identically prepared
molecule qubits hits the system one collision at a time.

* markov-xor: every molecule collides once, so the reduced dynamics is a
  Markov chain of identical channels,
* repeated-xor: each molecule collides twice (consecutive steps), giving
  the chain a one-molecule memory; the collision is the plain xor,
* sqrt-xor: same two-collision layout, but each collision applies the
  square root of the xor so one full xor is spread over two steps.

The two-collision models admit an exact satellite picture: one extra
memory qubit that swaps with the fresh molecule each step. States on that
compound live on slots ("mem", "sys"). Arbitrary collision layouts run in
a sliding-window engine that keeps only the currently open molecules.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .channels import KrausSet, apply_kraus, compose, kraus_from_collision, map_from_kraus, map_tomography, LinearMap
from .gates import UnitaryGate, embed, molecule_state, sqrt_xor_gate, swap_gate, xor_gate
from .linalg import (
    DensityMatrix,
    PureState,
    computational_basis,
    dagger,
    partial_trace,
    partial_trace_array,
    tensor,
    trace_norm_distance,
)

MARKOV_XOR = "markov-xor"
REPEATED_XOR = "repeated-xor"
SQRT_XOR = "sqrt-xor"
CUSTOM = "custom"
MODEL_KINDS = (MARKOV_XOR, REPEATED_XOR, SQRT_XOR, CUSTOM)

SYSTEM_SLOT = "sys"
MEMORY_SLOT = "mem"
WINDOW_QUBIT_CAP = 6

_GATE_NAMES = {"xor": xor_gate, "sqrt-xor": sqrt_xor_gate}


def _mol_slot(molecule: int) -> str:
    return f"mol{molecule}"


@dataclass(frozen=True)
class CollisionEvent:
    """One collision: molecule `molecule` hits the system at step `step`.

    gate overrides the model's collision gate by name ("xor", "sqrt-xor");
    None means the model default.
    """

    step: int
    molecule: int
    gate: Optional[str] = None

    def __post_init__(self):
        if self.step < 0:
            raise ValueError(f"negative step {self.step}")
        if self.molecule < 0:
            raise ValueError(f"negative molecule id {self.molecule}")
        if self.gate is not None and self.gate not in _GATE_NAMES:
            raise ValueError(f"unknown gate {self.gate!r}; choose from {sorted(_GATE_NAMES)}")


@dataclass(frozen=True, eq=False)
class CollisionSchedule:
    """Events sorted by step; within a step the listed order is execution order."""

    events: tuple[CollisionEvent, ...]
    horizon: int

    def __post_init__(self):
        events = tuple(self.events)
        if self.horizon < 1:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        seen = {}
        for ev in events:
            if ev.step >= self.horizon:
                raise ValueError(f"event at step {ev.step} outside horizon {self.horizon}")
            key = (ev.molecule, ev.step)
            if key in seen:
                raise ValueError(f"molecule {ev.molecule} listed twice at step {ev.step}")
            seen[key] = True
        order = sorted(range(len(events)), key=lambda i: events[i].step)
        object.__setattr__(self, "events", tuple(events[i] for i in order))

    def molecules(self) -> tuple[int, ...]:
        return tuple(sorted({ev.molecule for ev in self.events}))

    def first_event(self, molecule: int) -> int:
        steps = [ev.step for ev in self.events if ev.molecule == molecule]
        if not steps:
            raise ValueError(f"molecule {molecule} has no events")
        return min(steps)

    def last_event(self, molecule: int) -> int:
        steps = [ev.step for ev in self.events if ev.molecule == molecule]
        if not steps:
            raise ValueError(f"molecule {molecule} has no events")
        return max(steps)

    def events_at(self, step: int) -> tuple[CollisionEvent, ...]:
        return tuple(ev for ev in self.events if ev.step == step)

    def to_records(self) -> list[dict]:
        out = []
        for ev in self.events:
            rec = {"t": ev.step, "mol": ev.molecule}
            if ev.gate is not None:
                rec["gate"] = ev.gate
            out.append(rec)
        return out


def schedule_from_records(records: Sequence[dict], horizon: Optional[int] = None) -> CollisionSchedule:
    """Build a schedule from parsed JSON records [{"t": int, "mol": int, "gate"?: str}]."""
    events = []
    for i, rec in enumerate(records):
        if not isinstance(rec, dict) or "t" not in rec or "mol" not in rec:
            raise ValueError(f"record {i} must be an object with keys 't' and 'mol'")
        extra = set(rec) - {"t", "mol", "gate"}
        if extra:
            raise ValueError(f"record {i} has unknown keys {sorted(extra)}")
        t, mol = rec["t"], rec["mol"]
        if not isinstance(t, int) or isinstance(t, bool) or not isinstance(mol, int) or isinstance(mol, bool):
            raise ValueError(f"record {i}: 't' and 'mol' must be integers")
        events.append(CollisionEvent(t, mol, rec.get("gate")))
    if not events:
        raise ValueError("schedule has no events")
    if horizon is None:
        horizon = max(ev.step for ev in events) + 1
    return CollisionSchedule(tuple(events), horizon)


def chain_schedule(horizon: int) -> CollisionSchedule:
    """Every molecule collides exactly once: molecule t at step t."""
    return CollisionSchedule(tuple(CollisionEvent(t, t) for t in range(horizon)), horizon)


def single_molecule_schedule(horizon: int) -> CollisionSchedule:
    """One molecule colliding at every step."""
    return CollisionSchedule(tuple(CollisionEvent(t, 0) for t in range(horizon)), horizon)


def _double_collision_schedule(horizon: int, gap: int) -> CollisionSchedule:
    # Fresh molecules first within each step, then the one finishing its
    # second (or only) collision. Molecules near the start of the chain
    # collide once so every molecule's activity fits the horizon.
    events = []
    for t in range(horizon):
        if t + gap <= horizon - 1:
            events.append(CollisionEvent(t, t + gap))
        events.append(CollisionEvent(t, t))
    return CollisionSchedule(tuple(events), horizon)


def overlap_schedule(horizon: int) -> CollisionSchedule:
    """Each molecule collides twice on consecutive steps (periods overlap by one)."""
    return _double_collision_schedule(horizon, 1)


def advanced_overlap_schedule(horizon: int) -> CollisionSchedule:
    """Two collisions per molecule with a one-step pause between them."""
    return _double_collision_schedule(horizon, 2)


def window_width(schedule: CollisionSchedule) -> int:
    """Largest register (molecules + system) the window engine will hold."""
    open_ids: set = set()
    width = 1
    for t in range(schedule.horizon):
        for ev in schedule.events_at(t):
            open_ids.add(ev.molecule)
            width = max(width, len(open_ids) + 1)
        open_ids -= {m for m in open_ids if schedule.last_event(m) <= t}
    return width


def satellite_count(schedule: CollisionSchedule) -> int:
    """Largest number of molecules that straddle any single step boundary.

    A molecule straddles the boundary after step t when its first collision
    is at or before t and its last is after t. This is the number of memory
    qubits a Markov embedding of the schedule needs.
    """
    best = 0
    spans = [(schedule.first_event(m), schedule.last_event(m)) for m in schedule.molecules()]
    for t in range(schedule.horizon - 1):
        best = max(best, sum(1 for lo, hi in spans if lo <= t < hi))
    return best


@dataclass(frozen=True, eq=False)
class ChainModel:
    """A collision model: kind, preparation angle, and (for custom) payload."""

    kind: str
    phi: float
    gate: Optional[UnitaryGate] = None
    schedule: Optional[CollisionSchedule] = None
    molecule: Optional[PureState] = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; choose from {MODEL_KINDS}")
        phi = float(self.phi)
        object.__setattr__(self, "phi", phi)
        if not np.isfinite(phi):
            raise ValueError("phi must be finite")
        if self.kind == CUSTOM:
            if self.gate is None or self.schedule is None:
                raise ValueError("custom models need both a gate and a schedule")
            if set(self.gate.slot_roles) != {"mol", SYSTEM_SLOT}:
                raise ValueError(f"custom gate roles must be mol and sys, got {self.gate.slot_roles}")
        else:
            if self.gate is not None or self.schedule is not None or self.molecule is not None:
                raise ValueError(f"{self.kind} takes no custom gate, schedule or molecule")
        if self.molecule is not None and self.molecule.dim != 2:
            raise ValueError("molecule override must be a single qubit")

    def collision_gate(self) -> UnitaryGate:
        if self.kind == SQRT_XOR:
            return sqrt_xor_gate()
        if self.kind == CUSTOM:
            return self.gate
        return xor_gate()

    def molecule_pure(self) -> PureState:
        if self.molecule is not None:
            return self.molecule
        return molecule_state(self.phi)

    def window_schedule(self, horizon: Optional[int] = None) -> CollisionSchedule:
        if self.kind == CUSTOM:
            if horizon is not None and horizon != self.schedule.horizon:
                raise ValueError("custom models carry a fixed schedule; do not pass a horizon")
            return self.schedule
        if horizon is None:
            raise ValueError("built-in models need a horizon")
        if self.kind == MARKOV_XOR:
            return chain_schedule(horizon)
        return overlap_schedule(horizon)


def markov_xor(phi: float) -> ChainModel:
    return ChainModel(MARKOV_XOR, phi)


def repeated_xor(phi: float) -> ChainModel:
    return ChainModel(REPEATED_XOR, phi)


def sqrt_xor(phi: float) -> ChainModel:
    return ChainModel(SQRT_XOR, phi)


def custom_chain(
    gate: UnitaryGate,
    schedule: CollisionSchedule,
    phi: float = 0.0,
    molecule: Optional[PureState] = None,
) -> ChainModel:
    return ChainModel(CUSTOM, phi, gate=gate, schedule=schedule, molecule=molecule)


def _system_state(rho0) -> DensityMatrix:
    if isinstance(rho0, DensityMatrix):
        if rho0.n_qubits != 1:
            raise ValueError("system state must be a single qubit")
        if rho0.slots == (SYSTEM_SLOT,):
            return rho0
        return DensityMatrix(rho0.matrix, (SYSTEM_SLOT,))
    return DensityMatrix(np.asarray(rho0, dtype=complex), (SYSTEM_SLOT,))


def _memory_array(mem0) -> np.ndarray:
    if mem0 is None:
        return np.diag([1.0, 0.0]).astype(complex)
    m = mem0.matrix if isinstance(mem0, DensityMatrix) else np.asarray(mem0, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError("memory state must be a single qubit")
    return m


# --- single-collision model, closed form ---------------------------------

def markov_xor_step(rho, phi: float):
    """One collision of the single-collision chain.

    Populations are untouched; the coherence shrinks by sin(2 phi).
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError("markov_xor_step acts on a single qubit")
    k = np.sin(2.0 * phi)
    out = np.array([[m[0, 0], k * m[0, 1]], [k * m[1, 0], m[1, 1]]], dtype=complex)
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(out, rho.slots)
    return out


def markov_xor_kraus(phi: float) -> KrausSet:
    """The same channel as two Kraus operators from the molecule readout."""
    return kraus_from_collision(xor_gate(), molecule_state(phi), computational_basis(2))


def markov_xor_fixed_point(rho0, phi: float) -> DensityMatrix:
    """Limit of repeated collisions: the dephased input.

    Raises when |sin 2 phi| = 1, where the coherence does not decay.
    """
    if abs(abs(np.sin(2.0 * phi)) - 1.0) < 1e-12:
        raise ValueError("coherence is not contracting at this angle; no unique fixed point")
    rho0 = _system_state(rho0)
    out = np.diag(np.diagonal(rho0.matrix)).astype(complex)
    return DensityMatrix(out, rho0.slots)


# --- satellite-memory embedding -------------------------------------------

_EMBED_CACHE: dict = {}


def build_embedding(model: ChainModel) -> tuple[UnitaryGate, KrausSet]:
    """Three-qubit step unitary and the compound Kraus pair of a two-collision model.

    The unitary lives on ("mol", "mem", "sys") and implements: collide the
    fresh molecule with the system, swap it into the memory slot, collide
    again. Reading the outgoing molecule in the computational basis gives
    two Kraus operators on the ("mem", "sys") compound.
    """
    if model.kind not in (REPEATED_XOR, SQRT_XOR):
        raise ValueError(f"no satellite embedding for model kind {model.kind!r}")
    key = (model.kind, model.phi)
    if key in _EMBED_CACHE:
        return _EMBED_CACHE[key]
    register = ("mol", MEMORY_SLOT, SYSTEM_SLOT)
    g = model.collision_gate()
    acting = tuple("mol" if role == "mol" else SYSTEM_SLOT for role in g.slot_roles)
    u_collide = embed(g, register, acting).matrix
    u_swap = embed(swap_gate(), register, ("mol", MEMORY_SLOT)).matrix
    step = UnitaryGate(u_collide @ u_swap @ u_collide, register, label=f"{g.label}-step")
    kraus = kraus_from_collision(step, model.molecule_pure(), computational_basis(2))
    _EMBED_CACHE[key] = (step, kraus)
    return step, kraus


def delta(rho_tilde) -> complex:
    """The single decaying coherence combination of the split-collision compound."""
    m = rho_tilde.matrix if isinstance(rho_tilde, DensityMatrix) else np.asarray(rho_tilde, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError("delta takes a two-qubit compound state")
    return complex(-1j * (m[0, 1] + m[2, 3]) + (m[0, 3] + m[2, 1]))


def _recursion_repeated(m: np.ndarray, phi: float) -> np.ndarray:
    c, s = np.cos(phi), np.sin(phi)
    a = m[0, 0] + m[2, 2]
    b = m[1, 1] + m[3, 3]
    f = m[0, 3] + m[2, 1]
    g = m[3, 0] + m[1, 2]
    return np.array(
        [
            [c * c * a, c * s * f, c * s * a, c * c * f],
            [c * s * g, s * s * b, s * s * g, c * s * b],
            [c * s * a, s * s * f, s * s * a, c * s * f],
            [c * c * g, c * s * b, c * s * g, c * c * b],
        ],
        dtype=complex,
    )


def _recursion_sqrt(m: np.ndarray, phi: float) -> np.ndarray:
    c, s = np.cos(phi), np.sin(phi)
    beta = np.exp(1j * phi) / 2.0
    bb = np.conj(beta)
    a = m[0, 0] + m[2, 2]
    b = m[1, 1] + m[3, 3]
    d = delta(m)
    dd = np.conj(d)
    return np.array(
        [
            [c * c * a, c * beta * d, c * s * a, 1j * c * bb * d],
            [c * bb * dd, b / 2.0, s * bb * dd, 2j * bb * bb * b],
            [c * s * a, s * beta * d, s * s * a, 1j * s * bb * d],
            [-1j * c * beta * dd, -2j * beta * beta * b, -1j * s * beta * dd, b / 2.0],
        ],
        dtype=complex,
    )


def embedded_step(model: ChainModel, rho_tilde, method: str = "kraus"):
    """One step of the compound ("mem", "sys") state.

    method "kraus" applies the embedding Kraus pair; method "recursion"
    uses the model's closed-form update. The two agree to round-off and the
    tests pin that.
    """
    m = rho_tilde.matrix if isinstance(rho_tilde, DensityMatrix) else np.asarray(rho_tilde, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError("compound state must be two qubits")
    if method == "kraus":
        out = apply_kraus(build_embedding(model)[1], m)
    elif method == "recursion":
        if model.kind == REPEATED_XOR:
            out = _recursion_repeated(m, model.phi)
        elif model.kind == SQRT_XOR:
            out = _recursion_sqrt(m, model.phi)
        else:
            raise ValueError(f"no closed-form recursion for {model.kind!r}")
    else:
        raise ValueError(f"unknown method {method!r}")
    if isinstance(rho_tilde, DensityMatrix):
        return DensityMatrix(out, rho_tilde.slots)
    return out


def simulate_embedding(model: ChainModel, rho0, steps: int, mem0=None) -> list[DensityMatrix]:
    """Compound trajectory [t=0 .. steps] from memory (x) system product start."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    sys0 = _system_state(rho0)
    mem = _memory_array(mem0)
    state = DensityMatrix(tensor(mem, sys0.matrix), (MEMORY_SLOT, SYSTEM_SLOT))
    out = [state]
    for _ in range(steps):
        state = embedded_step(model, state)
        out.append(state)
    return out


def stationary_memory_vector(model: ChainModel) -> np.ndarray:
    """Memory state left behind when the system holds |1>."""
    c, s = np.cos(model.phi), np.sin(model.phi)
    if model.kind == REPEATED_XOR:
        return np.array([s, c], dtype=complex)
    if model.kind == SQRT_XOR:
        return np.array([1.0, -1j * np.exp(2j * model.phi)], dtype=complex) / np.sqrt(2.0)
    raise ValueError(f"no satellite stationary state for {model.kind!r}")


def stationary_state(model: ChainModel, rho0, mem0=None) -> DensityMatrix:
    """Long-time compound state for a memory start without transverse polarization.

    The populations of rho0 survive; each pairs with its own pure memory
    state. Requires <sigma_x> of the initial memory to vanish (otherwise a
    non-decaying coherence survives; use relax_to_stationary to inspect
    that case numerically).
    """
    sys0 = _system_state(rho0)
    mem = _memory_array(mem0)
    transverse = abs(mem[0, 1] + mem[1, 0])
    if transverse > 1e-12:
        raise ValueError(
            f"initial memory has transverse polarization {transverse:.3e}; "
            "the closed form does not apply, iterate relax_to_stationary instead"
        )
    if model.kind == SQRT_XOR and abs(abs(np.sin(2.0 * model.phi)) - 1.0) < 1e-12:
        if abs(sys0.matrix[0, 1]) > 1e-12:
            raise ValueError("coherence does not decay at this angle; no stationary limit")
    psi = molecule_state(model.phi).amplitudes
    psi_p = stationary_memory_vector(model)
    p00 = sys0.matrix[0, 0].real
    p11 = sys0.matrix[1, 1].real
    ket0 = np.array([1.0, 0.0], dtype=complex)
    ket1 = np.array([0.0, 1.0], dtype=complex)
    out = p00 * tensor(np.outer(psi, psi.conj()), np.outer(ket0, ket0)) + p11 * tensor(
        np.outer(psi_p, psi_p.conj()), np.outer(ket1, ket1)
    )
    return DensityMatrix(out, (MEMORY_SLOT, SYSTEM_SLOT))


def relax_to_stationary(model: ChainModel, rho_tilde0, tol: float = 1e-13, max_steps: int = 10000) -> DensityMatrix:
    """Iterate the embedding until the compound stops moving."""
    state = rho_tilde0 if isinstance(rho_tilde0, DensityMatrix) else DensityMatrix(
        np.asarray(rho_tilde0, dtype=complex), (MEMORY_SLOT, SYSTEM_SLOT)
    )
    for _ in range(max_steps):
        nxt = embedded_step(model, state)
        if trace_norm_distance(nxt, state) < tol:
            return nxt
        state = nxt
    raise ValueError(f"no convergence within {max_steps} steps at tolerance {tol}")


def stationary_overlap(model: ChainModel) -> float:
    """|<fresh molecule | stationary memory>| for the system-up branch."""
    psi = molecule_state(model.phi).amplitudes
    return float(abs(np.vdot(psi, stationary_memory_vector(model))))


# --- sliding-window engine -------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChainState:
    """Joint state of the open molecules plus the system at time t.

    Slots are ordered newest molecule first, system last.
    """

    joint: DensityMatrix
    open_molecules: tuple[int, ...]
    t: int


def initial_window_state(rho0) -> ChainState:
    return ChainState(_system_state(rho0), (), 0)


def window_collide(
    joint: np.ndarray,
    slots: list,
    open_ids: list,
    model: ChainModel,
    schedule: CollisionSchedule,
    t: int,
    qubit_cap: int = WINDOW_QUBIT_CAP,
) -> tuple[np.ndarray, list, list]:
    """Attach fresh molecules and run the collisions of step t, in listed order.

    Mutates nothing; returns the new (joint, slots, open_ids). Closing the
    finished molecules is up to the caller, who may trace them out or read
    them out selectively.
    """
    if t >= schedule.horizon:
        raise ValueError(f"schedule horizon {schedule.horizon} exhausted at t={t}")
    slots = list(slots)
    open_ids = list(open_ids)
    xi = model.molecule_pure().density()
    for ev in schedule.events_at(t):
        name = _mol_slot(ev.molecule)
        if ev.molecule not in open_ids:
            if len(slots) + 1 > qubit_cap:
                raise ValueError(
                    f"window would need {len(slots) + 1} qubits at step {t}, cap is {qubit_cap}"
                )
            joint = tensor(xi, joint)
            slots.insert(0, name)
            open_ids.insert(0, ev.molecule)
        g = _GATE_NAMES[ev.gate]() if ev.gate is not None else model.collision_gate()
        acting = tuple(name if role == "mol" else SYSTEM_SLOT for role in g.slot_roles)
        u = embed(g, tuple(slots), acting).matrix
        joint = u @ joint @ dagger(u)
    return joint, slots, open_ids


def closing_molecules(schedule: CollisionSchedule, open_ids, t: int) -> list:
    """Molecules whose last event is step t, in ascending id order."""
    return sorted(m for m in open_ids if schedule.last_event(m) <= t)


def sliding_window_step(
    state: ChainState,
    model: ChainModel,
    schedule: CollisionSchedule,
    qubit_cap: int = WINDOW_QUBIT_CAP,
) -> ChainState:
    """Advance the window by one step of the schedule.

    Molecules are attached on their first event, all collisions of the step
    run in listed order, and molecules past their last event are traced out.
    """
    t = state.t
    joint, slots, open_ids = window_collide(
        state.joint.matrix, list(state.joint.slots), list(state.open_molecules),
        model, schedule, t, qubit_cap,
    )
    closing = set(closing_molecules(schedule, open_ids, t))
    dm = DensityMatrix(joint, tuple(slots))
    if closing:
        keep = [s for s in slots if s == SYSTEM_SLOT or s not in {_mol_slot(m) for m in closing}]
        dm = partial_trace(dm, keep)
    remaining = tuple(m for m in open_ids if m not in closing)
    return ChainState(dm, remaining, t + 1)


def run_window(
    model: ChainModel,
    rho0,
    steps: Optional[int] = None,
    qubit_cap: int = WINDOW_QUBIT_CAP,
) -> list[DensityMatrix]:
    """System marginals [t=0 .. steps] under the windowed schedule."""
    if model.kind == CUSTOM:
        horizon = model.schedule.horizon
        schedule = model.schedule
        if steps is None:
            steps = horizon
        if steps > horizon:
            raise ValueError(f"steps {steps} exceed the schedule horizon {horizon}")
    else:
        if steps is None:
            raise ValueError("built-in models need an explicit number of steps")
        schedule = model.window_schedule(steps)
    state = initial_window_state(rho0)
    out = [state.joint]
    for _ in range(steps):
        state = sliding_window_step(state, model, schedule, qubit_cap=qubit_cap)
        out.append(partial_trace(state.joint, SYSTEM_SLOT) if state.joint.n_qubits > 1 else state.joint)
    return out


# --- accumulated system maps for divisibility ------------------------------

def system_maps(model: ChainModel, t_max: int, mem0=None, qubit_cap: int = WINDOW_QUBIT_CAP) -> list[LinearMap]:
    """Accumulated reduced maps of the system, entries t = 1 .. t_max.

    For the two-collision models the memory starts in mem0 (default |0><0|)
    and each map is reconstructed by process tomography of the embedded
    evolution. The single-collision model composes its one channel; custom
    models run through the window engine.
    """
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    if model.kind == MARKOV_XOR:
        one = map_from_kraus(markov_xor_kraus(model.phi))
        maps = [one]
        for _ in range(t_max - 1):
            maps.append(compose(one, maps[-1]))
        return maps
    if model.kind in (REPEATED_XOR, SQRT_XOR):
        mem = _memory_array(mem0)
        kraus = build_embedding(model)[1]

        def evolve_for(t):
            def evolve(rho_sys):
                r = tensor(mem, rho_sys)
                for _ in range(t):
                    r = apply_kraus(kraus, r)
                return partial_trace_array(r, 2, [1])
            return evolve

        return [map_tomography(evolve_for(t), 2) for t in range(1, t_max + 1)]
    # custom: window marginals define the reduced evolution
    if model.schedule.horizon < t_max:
        raise ValueError(f"schedule horizon {model.schedule.horizon} shorter than t_max {t_max}")

    def evolve_custom(t):
        def evolve(rho_sys):
            dm = DensityMatrix(rho_sys, (SYSTEM_SLOT,))
            return run_window(model, dm, steps=t, qubit_cap=qubit_cap)[-1].matrix
        return evolve

    return [map_tomography(evolve_custom(t), 2) for t in range(1, t_max + 1)]
