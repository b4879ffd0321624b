"""Weighted qudit graphs and graph-state verification.

A graph on n qudits of dimension d is a symmetric adjacency matrix over Z_d;
the graph state applies CZ^{A_ij} to a uniform-superposition product state.
Verification checks the stabilizer fixed-point condition S_v|psi> = |psi>
with S_v = X_v prod_w Z_w^{A_vw}; measurement byproducts are undone by a
deterministic local-correction search.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from . import statevec as sv

STABILIZER_ATOL = 1e-10


@dataclass(frozen=True)
class GraphSpec:
    """n-vertex, dimension-d weighted graph over Z_d."""

    n: int
    d: int
    adjacency: tuple

    def __post_init__(self):
        a = self.matrix()
        if a.shape != (self.n, self.n):
            raise ValueError(f"adjacency must be {self.n}x{self.n}")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(a) != 0):
            raise ValueError("adjacency must have zero diagonal")
        if np.any((a < 0) | (a >= self.d)):
            raise ValueError(f"weights must lie in [0, {self.d})")

    @classmethod
    def from_matrix(cls, d, matrix):
        m = np.asarray(matrix, dtype=int)
        return cls(m.shape[0], int(d), tuple(int(x) for x in m.reshape(-1)))

    def matrix(self):
        return np.array(self.adjacency, dtype=int).reshape(self.n, self.n)

    def edges(self):
        m = self.matrix()
        return [(i, j, int(m[i, j]))
                for i in range(self.n) for j in range(i + 1, self.n)
                if m[i, j] != 0]

    def to_dict(self):
        return {"n": self.n, "d": self.d, "adjacency": list(self.adjacency)}

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, obj):
        return cls(int(obj["n"]), int(obj["d"]),
                   tuple(int(x) for x in obj["adjacency"]))

    @classmethod
    def from_json(cls, s):
        return cls.from_dict(json.loads(s))


def make_linear(n, d, w=1):
    """Path graph 0-1-...-(n-1), all edges weight w."""
    if n < 2:
        raise ValueError("a linear graph needs n >= 2")
    _check_weight(w, d)
    m = np.zeros((n, n), dtype=int)
    for i in range(n - 1):
        m[i, i + 1] = m[i + 1, i] = w
    return GraphSpec.from_matrix(d, m)


def make_ring(n, d, w=1):
    """Cycle graph, each vertex of degree two."""
    if n < 3:
        raise ValueError("a ring needs n >= 3")
    _check_weight(w, d)
    m = np.zeros((n, n), dtype=int)
    for i in range(n):
        j = (i + 1) % n
        m[i, j] = m[j, i] = w
    return GraphSpec.from_matrix(d, m)


def make_ladder(rows, cols, d, w=1):
    """Grid graph; vertex (r, c) has index r*cols + c.

    A 2x3 ladder has two rails of two edges each plus three rungs.
    """
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ValueError(f"bad ladder shape {rows}x{cols}")
    _check_weight(w, d)
    n = rows * cols
    m = np.zeros((n, n), dtype=int)
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                m[v, v + 1] = m[v + 1, v] = w
            if r + 1 < rows:
                m[v, v + cols] = m[v + cols, v] = w
    return GraphSpec.from_matrix(d, m)


def _check_weight(w, d):
    if not 1 <= w < d:
        raise ValueError(f"edge weight {w} outside [1, {d})")


# -- construction ---------------------------------------------------------


def build_graph_state(g, cap=sv.DEFAULT_AMPLITUDE_CAP):
    """Apply F_d to every |0> then CZ powers per the adjacency."""
    reg = sv.init_register((g.d,) * g.n, (0,) * g.n,
                           labels=(sv.ROLE_PHOTON,) * g.n, cap=cap)
    for v in range(g.n):
        reg = sv.apply_fourier(reg, v)
    for i, j, w in g.edges():
        reg = sv.apply_cz_power(reg, i, j, w)
    return reg


# -- stabilizer checks ----------------------------------------------------


def _require_vertex_register(reg, g):
    if reg.radices != (g.d,) * g.n:
        raise ValueError(
            f"register radices {reg.radices} do not match the {g.n}-vertex, "
            f"d={g.d} graph")


def stabilizer_apply(reg, g, v):
    """S_v |psi> with S_v = X_v prod_w Z_w^{A_vw}."""
    _require_vertex_register(reg, g)
    m = g.matrix()
    out = sv.apply_pauli_power(reg, v, "X", 1)
    for w in range(g.n):
        if m[v, w]:
            out = sv.apply_pauli_power(out, w, "Z", int(m[v, w]))
    return out


def stabilizer_expectations(reg, g):
    """<psi|S_v|psi> for every vertex; unit modulus iff graph-basis state."""
    return [sv.overlap(reg, stabilizer_apply(reg, g, v)) for v in range(g.n)]


@dataclass(frozen=True)
class StabilizerReport:
    deviations: tuple
    atol: float

    @property
    def max_deviation(self):
        return max(self.deviations)

    @property
    def passed(self):
        return self.max_deviation <= self.atol

    def failing_vertices(self):
        return [v for v, dev in enumerate(self.deviations) if dev > self.atol]

    def to_dict(self):
        return {
            "deviations": [float(x) for x in self.deviations],
            "max_deviation": float(self.max_deviation),
            "passed": bool(self.passed),
            "atol": self.atol,
        }


def stabilizer_verify(reg, g, atol=STABILIZER_ATOL):
    """Per-vertex deviation ||S_v psi - psi||_2; reported, never thrown."""
    _require_vertex_register(reg, g)
    devs = []
    for v in range(g.n):
        diff = stabilizer_apply(reg, g, v).amps - reg.amps
        devs.append(float(np.linalg.norm(diff)))
    return StabilizerReport(tuple(devs), atol)


# -- local corrections ----------------------------------------------------


@dataclass(frozen=True)
class CorrectionSet:
    """Per-vertex byproduct inverses.

    The correction operator on vertex v is X^{x_v} Z^{z_v} F^{f_v}, applied
    in that right-to-left order (Fourier conjugation first).  Depth-1
    searches leave every f_v at zero.
    """

    x_powers: tuple
    z_powers: tuple
    fourier_powers: tuple = None
    global_phase: complex | None = None

    def __post_init__(self):
        if self.fourier_powers is None:
            object.__setattr__(self, "fourier_powers",
                               (0,) * len(self.x_powers))
        if not (len(self.x_powers) == len(self.z_powers)
                == len(self.fourier_powers)):
            raise ValueError("per-vertex power tuples must share a length")

    @property
    def n(self):
        return len(self.x_powers)

    def is_identity(self):
        return (not any(self.x_powers) and not any(self.z_powers)
                and not any(self.fourier_powers))

    def to_dict(self):
        out = {"x_powers": list(self.x_powers),
               "z_powers": list(self.z_powers),
               "fourier_powers": list(self.fourier_powers)}
        if self.global_phase is not None:
            out["global_phase"] = [self.global_phase.real,
                                   self.global_phase.imag]
        return out


def identity_correction(n):
    return CorrectionSet((0,) * n, (0,) * n)


def apply_correction(reg, corr):
    out = reg
    for v in range(corr.n):
        f = corr.fourier_powers[v] % 4
        for _ in range(f):
            out = sv.apply_fourier(out, v)
        if corr.x_powers[v]:
            out = sv.apply_pauli_power(out, v, "X", corr.x_powers[v])
        if corr.z_powers[v]:
            out = sv.apply_pauli_power(out, v, "Z", corr.z_powers[v])
    return out


def _phase_fix(reg, g, atol):
    """Z-only correction derived from stabilizer eigenphases.

    If |psi> lies in the graph basis then <S_v> = omega^{theta_v} with unit
    modulus; applying Z_v^{theta_v} everywhere returns the canonical |G>.
    Any X-type byproduct is equivalent to Z's modulo the stabilizer group, so
    this single pass covers every Pauli byproduct.
    """
    d = g.d
    mus = stabilizer_expectations(reg, g)
    z = []
    for mu in mus:
        if abs(abs(mu) - 1.0) > 1e-6:
            return None
        theta = np.angle(mu) * d / (2 * np.pi)
        k = int(round(theta)) % d
        if abs(theta - round(theta)) > 1e-6:
            return None
        z.append(k)
    corr = CorrectionSet((0,) * g.n, tuple(z))
    if stabilizer_verify(apply_correction(reg, corr), g, atol).passed:
        return corr
    return None


def _fourier_vectors(n):
    """F-power assignments ordered sparse-first, then lexicographically."""
    vecs = sorted(itertools.product(range(4), repeat=n),
                  key=lambda v: (sum(1 for x in v if x), v))
    return vecs


def local_correction_search(reg, g, search_depth=1, atol=STABILIZER_ATOL):
    """Deterministic search for a correction making ``reg`` verify against g.

    Depth 1 covers products of per-vertex X^a Z^b (found in closed form from
    the stabilizer eigenphases).  Depth 2 additionally conjugates chosen
    vertices by Fourier powers, enumerated sparse-first then lexicographic;
    the first success wins.  Returns None when nothing is found.
    """
    _require_vertex_register(reg, g)
    if search_depth not in (1, 2):
        raise ValueError("search_depth must be 1 or 2")
    corr = _phase_fix(reg, g, atol)
    if corr is not None:
        return corr
    if search_depth == 1:
        return None
    for fvec in _fourier_vectors(g.n):
        if not any(fvec):
            continue  # depth-1 case already tried
        trial = reg
        for v, f in enumerate(fvec):
            for _ in range(f):
                trial = sv.apply_fourier(trial, v)
        corr = _phase_fix(trial, g, atol)
        if corr is not None:
            return CorrectionSet(corr.x_powers, corr.z_powers, tuple(fvec))
    return None


# -- block encoding --------------------------------------------------------


def block_encoding_map(index, d):
    """Big-endian binary expansion of a level index; d must be a power of two.

    An 8-dimensional photon carries three qubits, so a 24-qubit resource
    state fits in eight photonic qudits.
    """
    m = _log2_exact(d)
    if not 0 <= index < d:
        raise IndexError(f"index {index} out of range for d={d}")
    return format(index, f"0{m}b")


def block_encoding_index(bits, d):
    m = _log2_exact(d)
    if len(bits) != m or set(bits) - {"0", "1"}:
        raise ValueError(f"expected {m} binary digits, got {bits!r}")
    return int(bits, 2)


def _log2_exact(d):
    m = int(round(math.log2(d)))
    if 2**m != d:
        raise ValueError(f"d={d} is not a power of two")
    return m
