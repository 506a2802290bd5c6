"""Independent oracles for the test suite.

Everything in here is built from first principles: operators assembled by
index arithmetic, partial traces by einsum, eigenvalues by LAPACK
(np.linalg.eigh), optimization by a dense grid plus Powell polish. None of
it shares code paths with the package, so agreement is evidence, not
tautology.
"""
import numpy as np
from scipy import optimize

B_ROOT = np.exp(1j * np.pi / 4) / np.sqrt(2)   # principal sqrt(i/2)


def dag(a):
    return a.conj().T


def rand_rho(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    r = g @ dag(g)
    return r / np.trace(r).real


def prep(phi):
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


def molecule_density(phi):
    v = prep(phi) @ np.array([1.0, 0.0])
    return np.outer(v, v.conj()).astype(complex)


def tdist(a, b):
    w = np.linalg.eigvalsh(a - b)
    return 0.5 * np.abs(w).sum()


# ---- three-qubit step operators in |mol, mem, sys>, built by index math ----

def op3_xor():
    u = np.zeros((8, 8))
    for m in range(2):
        for e in range(2):
            for s in range(2):
                u[((m ^ s) * 4 + e * 2 + s), (m * 4 + e * 2 + s)] = 1.0
    return u


def op3_swap_mol_mem():
    u = np.zeros((8, 8))
    for m in range(2):
        for e in range(2):
            for s in range(2):
                u[(e * 4 + m * 2 + s), (m * 4 + e * 2 + s)] = 1.0
    return u


def sqrt_block(b=B_ROOT):
    return np.array([[b, -1j * b], [-1j * b, b]])


def op3_sqrt_xor(b=B_ROOT):
    blk = sqrt_block(b)
    u = np.zeros((8, 8), complex)
    for m in range(2):
        for e in range(2):
            u[m * 4 + e * 2, m * 4 + e * 2] = 1.0
            for mp in range(2):
                u[mp * 4 + e * 2 + 1, m * 4 + e * 2 + 1] = blk[mp, m]
    return u


def step_unitary(phi, kind, with_prep=True):
    """Collision-swap-collision sandwich; kind 'double' uses the plain flip,
    'split' the square-root flip."""
    sw = op3_swap_mol_mem()
    g = op3_xor() if kind == "double" else op3_sqrt_xor()
    u = g @ sw @ g
    if with_prep:
        u = u @ np.kron(prep(phi), np.eye(4))
    return u


def kraus_pair(phi, kind):
    v = step_unitary(phi, kind)
    return v[0:4, 0:4].copy(), v[4:8, 0:4].copy()


def channel_apply(phi, kind, r):
    m0, m1 = kraus_pair(phi, kind)
    return m0 @ r @ dag(m0) + m1 @ r @ dag(m1)


# ---- closed-form stationary states ----

def stat_double(phi, p00, p11):
    c, s = np.cos(phi), np.sin(phi)
    psi = np.array([c, s])
    psip = np.array([s, c])
    return (p00 * np.kron(np.outer(psi, psi.conj()), np.diag([1.0, 0.0]))
            + p11 * np.kron(np.outer(psip, psip.conj()), np.diag([0.0, 1.0]))).astype(complex)


def stat_split(phi, p00, p11):
    c, s = np.cos(phi), np.sin(phi)
    psi = np.array([c, s], complex)
    psip = np.array([1.0, -1j * np.exp(2j * phi)]) / np.sqrt(2)
    return (p00 * np.kron(np.outer(psi, psi.conj()), np.diag([1.0, 0.0]))
            + p11 * np.kron(np.outer(psip, psip.conj()), np.diag([0.0, 1.0]))).astype(complex)


def delta_of(r):
    return -1j * (r[0, 1] + r[2, 3]) + (r[0, 3] + r[2, 1])


# ---- generic register tools (einsum / bit shuffle route) ----

_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def ptrace_general(r, n, keep):
    t = r.reshape((2,) * (2 * n))
    li = 0
    ket, bra = {}, {}
    for q in range(n):
        if q in keep:
            ket[q] = _LETTERS[li]; li += 1
            bra[q] = _LETTERS[li]; li += 1
        else:
            ket[q] = bra[q] = _LETTERS[li]; li += 1
    sub = "".join(ket[q] for q in range(n)) + "".join(bra[q] for q in range(n))
    out = "".join(ket[q] for q in sorted(keep)) + "".join(bra[q] for q in sorted(keep))
    res = np.einsum(f"{sub}->{out}", t)
    k = len(keep)
    return res.reshape(2 ** k, 2 ** k)


def embed_front(g, n_gate, n_total, positions):
    rest = [q for q in range(n_total) if q not in positions]
    front = list(positions) + rest
    u_front = np.kron(g, np.eye(2 ** (n_total - n_gate)))
    fidx = np.zeros(2 ** n_total, dtype=int)
    for i in range(2 ** n_total):
        f = 0
        for j, q in enumerate(front):
            f |= ((i >> (n_total - 1 - q)) & 1) << (n_total - 1 - j)
        fidx[i] = f
    return u_front[np.ix_(fidx, fidx)]


XOR_MOL_SYS = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], complex)


def sqrt_xor_mol_sys(b=B_ROOT):
    blk = sqrt_block(b)
    u = np.eye(4, dtype=complex)
    u[1, 1] = blk[0, 0]; u[1, 3] = blk[0, 1]
    u[3, 1] = blk[1, 0]; u[3, 3] = blk[1, 1]
    return u


# ---- schedules as {molecule: [steps]} dicts ----

def overlap_events(h):
    ev = {0: [0]}
    for m in range(1, h):
        ev[m] = [m - 1, m]
    return ev


def advanced_overlap_events(h):
    ev = {0: [0], 1: [1]}
    for m in range(2, h):
        ev[m] = [m - 2, m]
    return ev


def window_run_oracle(events, h, gate_ms, phi, rho0):
    """System marginals t = 0..h with an independently coded window engine."""
    xi = molecule_density(phi)
    slots = ["sys"]
    joint = rho0.astype(complex)
    out = [rho0.copy()]
    first = {m: min(ts) for m, ts in events.items()}
    last = {m: max(ts) for m, ts in events.items()}
    for t in range(h):
        todo = [m for m, ts in events.items() if t in ts]
        todo.sort(key=lambda m: (0 if first[m] == t else 1, m))
        for m in todo:
            name = f"mol{m}"
            if name not in slots:
                joint = np.kron(xi, joint)
                slots.insert(0, name)
            u = embed_front(gate_ms, 2, len(slots), [slots.index(name), slots.index("sys")])
            joint = u @ joint @ dag(u)
        for m in sorted(events):
            name = f"mol{m}"
            if name in slots and last[m] <= t:
                keep = [q for q in range(len(slots)) if slots[q] != name]
                joint = ptrace_general(joint, len(slots), keep)
                slots = [sl for sl in slots if sl != name]
        out.append(ptrace_general(joint, len(slots), [slots.index("sys")]) if len(slots) > 1 else joint.copy())
    return out


def brute_force_final(events, h, gate_ms, phi, rho0, n_mol):
    """Final system marginal with ALL molecules held in one big register."""
    xi = molecule_density(phi)
    joint = rho0.astype(complex)
    for _ in range(n_mol):
        joint = np.kron(xi, joint)
    slots = [f"mol{n_mol - 1 - i}" for i in range(n_mol)] + ["sys"]
    n = len(slots)
    for t in range(h):
        todo = [m for m, ts in events.items() if t in ts]
        todo.sort(key=lambda m: (0 if min(events[m]) == t else 1, m))
        for m in todo:
            u = embed_front(gate_ms, 2, n, [slots.index(f"mol{m}"), slots.index("sys")])
            joint = u @ joint @ dag(u)
    return ptrace_general(joint, n, [slots.index("sys")])


# ---- reduced-map and Choi oracles ----

def sys_map_oracle(phi, kind, mem, t):
    """Accumulated system map after t steps, by probing matrix units directly."""
    s = np.zeros((4, 4), complex)
    for j in range(2):
        for i in range(2):
            e = np.zeros((2, 2), complex)
            e[i, j] = 1.0
            r = np.kron(mem, e)
            for _ in range(t):
                r = channel_apply(phi, kind, r)
            rs = r[0:2, 0:2] + r[2:4, 2:4]
            s[:, j * 2 + i] = rs.reshape(-1, order="F")
    return s


def choi_oracle(s):
    c = np.zeros((4, 4), complex)
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2), complex)
            e[i, j] = 1.0
            out = (s @ e.reshape(-1, order="F")).reshape(2, 2, order="F")
            c[i * 2:i * 2 + 2, j * 2:j * 2 + 2] = out
    return c


# ---- entropy / correlation oracles (LAPACK + dense grid + Powell) ----

def entropy_oracle(r):
    w = np.linalg.eigvalsh(r)
    w = w[w > 1e-15]
    return float(-(w * np.log2(w)).sum())


def _ptrace_sys_side(r):
    return r[0:2, 0:2] + r[2:4, 2:4]


def _ptrace_mem_side(r):
    return np.array([[r[0, 0] + r[1, 1], r[0, 2] + r[1, 3]],
                     [r[2, 0] + r[3, 1], r[2, 2] + r[3, 3]]])


def mutual_info_oracle(r):
    return entropy_oracle(_ptrace_sys_side(r)) + entropy_oracle(_ptrace_mem_side(r)) - entropy_oracle(r)


def _batch_entropy(mats):
    """Entropies of normalized 2x2 states, batched through LAPACK."""
    w = np.linalg.eigvalsh(mats)
    w = np.clip(w, 1e-18, 1.0)
    return -(w * np.log2(w)).sum(axis=-1)


def cond_entropy_grid_oracle(r, thetas, alphas, chunk=65536):
    """Average conditional entropy on the full (theta, alpha) grid.

    Measurement is on the most significant qubit; batched independently of
    the package (projector sandwich + eigvalsh)."""
    tt, aa = np.meshgrid(thetas, alphas, indexing="ij")
    tt, aa = tt.reshape(-1), aa.reshape(-1)
    st = np.sin(tt)
    nx, ny, nz = st * np.cos(aa), st * np.sin(aa), np.cos(tt)
    out = np.empty(tt.shape[0])
    eye2 = np.eye(2)
    for lo in range(0, tt.shape[0], chunk):
        hi = min(lo + chunk, tt.shape[0])
        g = hi - lo
        p0 = 0.5 * np.stack([
            np.stack([1 + nz[lo:hi], nx[lo:hi] - 1j * ny[lo:hi]], axis=-1),
            np.stack([nx[lo:hi] + 1j * ny[lo:hi], 1 - nz[lo:hi]], axis=-1),
        ], axis=-2)
        total = np.zeros(g)
        for proj in (p0, np.eye(2)[None] - p0):
            full = np.einsum("gij,kl->gikjl", proj, eye2).reshape(g, 4, 4)
            sub = full @ r @ full
            cond = sub[:, 0:2, 0:2] + sub[:, 2:4, 2:4]
            p = np.trace(cond, axis1=-2, axis2=-1).real
            safe = np.clip(p, 1e-18, None)
            ent = _batch_entropy(cond / safe[:, None, None])
            total += np.where(p > 1e-14, p * ent, 0.0)
        out[lo:hi] = total
    return tt, aa, out


def cond_entropy_point_oracle(r, theta, alpha):
    _, _, v = cond_entropy_grid_oracle(r, np.array([theta]), np.array([alpha]))
    return float(v[0])


def discord_oracle(r, n_theta=640, n_alpha=1280):
    """Reference discord: 10x finer grid than the package plus Powell polish."""
    thetas = (np.arange(n_theta) + 0.5) * np.pi / n_theta
    alphas = np.arange(n_alpha) * 2.0 * np.pi / n_alpha
    tt, aa, vals = cond_entropy_grid_oracle(r, thetas, alphas)
    order = np.argsort(vals, kind="stable")
    h_min = float(vals[order[0]])
    for idx in order[:3]:
        res = optimize.minimize(
            lambda x: cond_entropy_point_oracle(r, x[0], x[1]),
            [tt[idx], aa[idx]],
            method="Powell",
            options={"xtol": 1e-10, "ftol": 1e-13},
        )
        h_min = min(h_min, float(res.fun))
    j = entropy_oracle(_ptrace_sys_side(r)) - h_min
    return mutual_info_oracle(r) - j, j
