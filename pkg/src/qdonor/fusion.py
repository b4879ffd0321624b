"""Type-II qudit fusion at the probability and projective level.

The linear-optics internals of the fusion gate are out of scope; what is
modeled is (a) the analytic success probability per attempt and (b) the
graph transformation of a successful fusion, realized as a projection of the
two fused photons onto a generalized Bell state.  Projecting the ends of a
linear chain creates the missing edge between their neighbours: an
eight-qudit chain becomes a six-ring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import budget as bg
from . import graphs as gm
from . import protocols as pr
from . import statevec as sv

# Frame of the Bell family used for the success projector.  The search over
# both natural frames (see bell_state) shows only the one-sided Fourier
# frame turns chain ends into the ring edge, so it is frozen as the default.
DEFAULT_FRAME = "fourier"
FRAMES = ("fourier", "computational")


@dataclass(frozen=True)
class FusionSpec:
    """Port bookkeeping for a d-dimensional type-II fusion."""

    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("fusion needs d >= 2")

    @property
    def ports(self):
        return 2

    @property
    def ancilla_modes(self):
        return self.d * (self.d - 2)

    def to_dict(self):
        return {"d": self.d, "ports": self.ports,
                "ancilla_modes": self.ancilla_modes}


def success_probability(d):
    """2/(d(d+1)) for odd d, 2/d^2 for even d; 1/2 at d=2.

    The even-d figure is quoted as approximate; it is treated as exact here
    and flagged approximate in reports.
    """
    if d < 2:
        raise ValueError("fusion needs d >= 2")
    if d % 2:
        return 2.0 / (d * (d + 1))
    return 2.0 / d**2


@dataclass(frozen=True)
class AttemptStats:
    """Geometric repeat-until-success statistics."""

    p: float

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise ValueError("probability must lie in (0, 1]")

    @property
    def mean(self):
        return 1.0 / self.p

    def tail(self, k):
        """P(attempts > k)."""
        if k < 0:
            raise ValueError("k must be non-negative")
        return (1.0 - self.p) ** k


def expected_attempts(p):
    return AttemptStats(p)


def sample_attempts(p, trials, master_seed):
    """Seeded geometric sampling; used to cross-check the closed form."""
    stats = AttemptStats(p)
    rng = np.random.default_rng(master_seed)
    draws = rng.geometric(p, size=int(trials))
    mean = float(draws.mean())
    se = math.sqrt((1 - p) / p**2 / trials)
    return {
        "p": p,
        "trials": int(trials),
        "empirical_mean": mean,
        "expected_mean": stats.mean,
        "std_error_of_mean": se,
        "within_3_sigma": bool(abs(mean - stats.mean) <= 3 * se),
    }


# -- projective fusion -------------------------------------------------------


def bell_state(d, a, b, frame=DEFAULT_FRAME):
    """Generalized Bell vector of label (a, b) as a d x d amplitude table.

    frame="computational": (I x X^a Z^b) sum_k |kk>/sqrt(d).
    frame="fourier":       (I x F X^a Z^b) sum_k |kk>/sqrt(d); the Fourier
    on the second port is what converts a shared bond into a CZ edge.
    """
    if frame not in FRAMES:
        raise ValueError(f"unknown frame {frame!r}")
    base = np.zeros((d, d), dtype=np.complex128)
    omega = np.exp(2j * np.pi / d)
    for k in range(d):
        base[k, (k + a) % d] = omega ** ((b * k) % d) / math.sqrt(d)
    if frame == "fourier":
        base = base @ sv.fourier_matrix(d).T
    return base


def project_pair(reg, i, j, a, b, frame=DEFAULT_FRAME, atol=1e-14):
    """Project subsystems i, j onto Bell (a, b); both qudits are consumed.

    Returns (probability, collapsed register without i and j); errors on a
    zero-probability projection.
    """
    if i == j:
        raise ValueError("fusion needs two distinct qudits")
    d = reg.radices[i]
    if reg.radices[j] != d:
        raise ValueError("fused qudits must share a dimension")
    bell = bell_state(d, a, b, frame)
    amps = np.tensordot(np.conj(bell), reg.amps, axes=([0, 1], [i, j]))
    prob = float(np.sum(np.abs(amps) ** 2))
    if prob <= atol:
        raise ValueError(f"zero-probability projection onto Bell ({a},{b})")
    radices = tuple(r for ax, r in enumerate(reg.radices) if ax not in (i, j))
    labels = tuple(l for ax, l in enumerate(reg.labels) if ax not in (i, j))
    out = sv.Register(radices, amps / math.sqrt(prob), labels, reg.cap)
    return prob, out


def enumerate_fusion_outcomes(reg, i, j, frame=DEFAULT_FRAME):
    """All d^2 Bell outcomes with probabilities and collapsed registers."""
    d = reg.radices[i]
    out = []
    for a in range(d):
        for b in range(d):
            try:
                prob, collapsed = project_pair(reg, i, j, a, b, frame)
            except ValueError:
                out.append((a, b, 0.0, None))
                continue
            out.append((a, b, prob, collapsed))
    return out


def fused_chain_graph(n, d):
    """Target after fusing the ends of an n-chain: the middle n-2 vertices
    with one extra unit of weight joining the old ends' neighbours."""
    if n < 4:
        raise ValueError("need a chain of at least 4 to fuse the ends")
    m = np.zeros((n - 2, n - 2), dtype=int)
    for k in range(n - 3):
        m[k, k + 1] = m[k + 1, k] = 1
    m[0, n - 3] = (m[0, n - 3] + 1) % d
    m[n - 3, 0] = m[0, n - 3]
    return gm.GraphSpec.from_matrix(d, m)


@dataclass(frozen=True)
class FusionOutcome:
    success: bool
    outcome: tuple                      # Bell label (a, b)
    probability: float
    register: sv.Register | None       # corrected post-fusion state
    correction: gm.CorrectionSet | None
    max_deviation: float
    attempts: int | None = None        # stochastic mode only

    def to_dict(self):
        return {
            "success": self.success,
            "outcome": list(self.outcome),
            "probability": self.probability,
            "correction": None if self.correction is None
            else self.correction.to_dict(),
            "max_deviation": self.max_deviation,
            "attempts": self.attempts,
        }


def fuse_chain_ends(reg, i=None, j=None, frame=DEFAULT_FRAME, outcome=(0, 0),
                    depth=2, seed=None, atol=gm.STABILIZER_ATOL):
    """Fuse the end photons of a verified linear chain.

    The register must hold a canonical n-chain graph state (this is checked;
    byproduct-carrying states should be corrected first).  The chosen Bell
    outcome is projected out, both fused qudits are removed, and the result
    is verified against the contracted chain graph after a local-correction
    search.  With a seed, the attempt count of the non-deterministic physical
    gate is sampled from the geometric law as bookkeeping.
    """
    n = reg.n_subsystems
    d = reg.radices[0]
    if i is None:
        i = 0
    if j is None:
        j = n - 1
    if {i, j} != {0, n - 1}:
        raise ValueError("chain-end fusion consumes the first and last qudits")
    chain = gm.make_linear(n, d)
    if not gm.stabilizer_verify(reg, chain, atol).passed:
        raise ValueError("register does not verify against the linear chain")
    prob, collapsed = project_pair(reg, i, j, outcome[0], outcome[1], frame)
    target = fused_chain_graph(n, d)
    attempts = None
    if seed is not None:
        rng = np.random.default_rng(seed)
        attempts = int(rng.geometric(success_probability(d)))
    corr = gm.local_correction_search(collapsed, target, depth, atol)
    if corr is None:
        return FusionOutcome(False, tuple(outcome), prob, None, None,
                             float("inf"), attempts)
    fixed = gm.apply_correction(collapsed, corr)
    rep = gm.stabilizer_verify(fixed, target, atol)
    return FusionOutcome(rep.passed, tuple(outcome), prob, fixed, corr,
                         rep.max_deviation, attempts)


def survey_frames(n, d, depth=2):
    """Which Bell outcomes in which frame yield the contracted-chain graph.

    Builds the canonical n-chain, tries every outcome in both frames, and
    reports the verifying labels; used to pin the frozen DEFAULT_FRAME.
    """
    reg = gm.build_graph_state(gm.make_linear(n, d))
    result = {}
    for frame in FRAMES:
        good = []
        for a in range(d):
            for b in range(d):
                out = fuse_chain_ends(reg, frame=frame, outcome=(a, b),
                                      depth=depth)
                if out.success:
                    good.append((a, b))
        result[frame] = good
    return result


# -- scheme comparison -------------------------------------------------------

_TARGETS = {
    "ring6": ("six-ring", 1),
    "ladder23": ("ladder", 2),
}


def compare_schemes(d, target="ring6", table_single=None, table_double=None,
                    cavity=None, frequency_matched=True):
    """Fusion-built versus directly-coupled resource-state costs.

    Scheme A grows one linear chain per pass and fuses; a failed fusion
    destroys the two measured photons and the pass restarts, so the expected
    pass count is p^-k for k required fusions.  Scheme B compiles the
    coupled-emitter protocol once, deterministically.  Ancilla modes
    (d(d-2) per fusion attempt) are reported, not simulated.
    """
    if target not in _TARGETS:
        raise ValueError(f"unsupported target {target!r}; "
                         f"choose from {sorted(_TARGETS)}")
    protocol, n_fusions = _TARGETS[target]
    cavity = cavity or bg.CavityParams()
    table_single = table_single or bg.single_donor_table()
    table_double = table_double or bg.sb2_table()
    graph, _ = pr.target_graph(protocol, d)
    p = success_probability(d)
    passes = expected_attempts(p**n_fusions)

    chain_n = graph.n + 2 * n_fusions
    chain_budget = bg.timing_fidelity_budget(
        pr.compile_linear(d, chain_n), table_single, cavity)
    if protocol == "six-ring":
        program_b = pr.compile_six_ring(d)
    else:
        program_b = pr.compile_ladder(d)
    direct_budget = bg.timing_fidelity_budget(program_b, table_double, cavity)

    scheme_a = {
        "deterministic": p**n_fusions >= 1.0,
        "fusions_required": n_fusions,
        "p_success": p,
        "p_success_note": "even-d formula 2/d^2 is quoted approximate"
        if d % 2 == 0 else "odd-d formula 2/(d(d+1))",
        "expected_attempts": passes.mean,
        "photons_per_attempt": chain_n,
        "photons_destroyed_mean": 2 * n_fusions * passes.mean,
        "expected_photons": chain_n * passes.mean,
        "ancilla_modes_per_fusion": FusionSpec(d).ancilla_modes,
        "fusion_permitted": bool(frequency_matched),
        "time_mean_us": chain_budget.duration_us[1] * passes.mean,
        "chain_budget": chain_budget.to_dict(),
    }
    scheme_b = {
        "deterministic": True,
        "fusions_required": 0,
        "expected_attempts": 1.0,
        "photons_per_attempt": graph.n,
        "photons_destroyed_mean": 0.0,
        "expected_photons": float(graph.n),
        "time_mean_us": direct_budget.duration_us[1],
        "cz_gates": program_b.count("cz"),
        "budget": direct_budget.to_dict(),
    }
    return {
        "d": d,
        "target": target,
        "graph": graph.to_dict(),
        "schemeA": scheme_a,
        "schemeB": scheme_b,
    }
