"""Cavity loss arithmetic and protocol time/fidelity budgets.

Photon extraction competes with internal cavity loss: with rates
kappa = omega_c / Q the effective bath and port rates are harmonic-style
combinations with the spin-photon coupling, and the loss/success split is
their ratio.  Protocol budgets walk an instruction list against a measured
operation table, summing durations and multiplying fidelities; decoherence
enters only as a duration-to-coherence ratio flag.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import protocols as pr


@dataclass(frozen=True)
class CavityParams:
    """Defaults follow the worked microwave-cavity example."""

    omega_c_ghz: float = 28.41
    g_s_mhz: float = 3.0
    q_i: float = 1e6
    q_c: float = 1e4

    def __post_init__(self):
        for name in ("omega_c_ghz", "g_s_mhz", "q_i", "q_c"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def to_dict(self):
        return {"omega_c_ghz": self.omega_c_ghz, "g_s_mhz": self.g_s_mhz,
                "q_i": self.q_i, "q_c": self.q_c}

    @classmethod
    def from_dict(cls, obj):
        return cls(**obj)


@dataclass(frozen=True)
class LossReport:
    kappa_i_mhz: float
    kappa_c_mhz: float
    gamma_bath_mhz: float
    gamma_port_mhz: float
    loss: float
    success: float
    success_db: float          # signed 10*log10(success), negative
    success_db_magnitude: float  # the table prints the magnitude

    def to_dict(self):
        return {k: getattr(self, k) for k in (
            "kappa_i_mhz", "kappa_c_mhz", "gamma_bath_mhz", "gamma_port_mhz",
            "loss", "success", "success_db", "success_db_magnitude")}


def loss_success(c: CavityParams) -> LossReport:
    """kappa = omega_c/Q; gamma = g kappa/(g + kappa); loss/success ratios.

    The published table prints |dB| for a success below one; the signed
    value is kept alongside to avoid flipping a physical sign silently.
    """
    omega_mhz = c.omega_c_ghz * 1e3
    kappa_i = omega_mhz / c.q_i
    kappa_c = omega_mhz / c.q_c
    g = c.g_s_mhz
    gamma_bath = g * kappa_i / (g + kappa_i)
    gamma_port = g * kappa_c / (g + kappa_c)
    assert gamma_bath < min(g, kappa_i) and gamma_port < min(g, kappa_c)
    total = gamma_bath + gamma_port
    loss = gamma_bath / total
    success = 1.0 - loss  # keeps loss + success = 1 to the last bit
    db = 10.0 * math.log10(success)
    return LossReport(kappa_i, kappa_c, gamma_bath, gamma_port,
                      loss, success, db, abs(db))


@dataclass(frozen=True)
class EmissionTime:
    """1/g_s, both raw and in the angular-frequency reading of g_s."""

    raw_us: float
    angular_us: float


def emission_time(g_s_mhz: float) -> EmissionTime:
    if g_s_mhz <= 0:
        raise ValueError("coupling must be positive")
    raw = 1.0 / g_s_mhz
    return EmissionTime(raw, raw / (2 * math.pi))


# -- operation tables -------------------------------------------------------


@dataclass(frozen=True)
class OperationRow:
    fidelity: float | None            # None = not yet benchmarked
    duration_us: tuple                # (min, max); point values repeat

    def __post_init__(self):
        lo, hi = self.duration_us
        if lo < 0 or hi < lo:
            raise ValueError(f"bad duration interval {self.duration_us}")
        if self.fidelity is not None and not 0 < self.fidelity <= 1:
            raise ValueError(f"fidelity {self.fidelity} outside (0, 1]")

    @property
    def mid_us(self):
        return 0.5 * (self.duration_us[0] + self.duration_us[1])


@dataclass(frozen=True)
class OperationTable:
    """Measured per-operation fidelities/durations plus coherence entries."""

    name: str
    rows: dict
    coherence_us: dict
    notes: tuple = ()

    def row(self, key):
        if key not in self.rows:
            raise KeyError(f"operation table {self.name!r} has no row {key!r}")
        return self.rows[key]

    def to_dict(self):
        return {
            "name": self.name,
            "operations": {
                k: {"fidelity": r.fidelity,
                    "duration_us": list(r.duration_us)}
                for k, r in self.rows.items()},
            "coherence_us": dict(self.coherence_us),
            "notes": list(self.notes),
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, obj):
        rows = {}
        for k, r in obj["operations"].items():
            dur = r["duration_us"]
            if isinstance(dur, (int, float)):
                dur = (float(dur), float(dur))
            else:
                dur = tuple(float(x) for x in dur)
                if len(dur) == 1:
                    dur = (dur[0], dur[0])
            rows[k] = OperationRow(r.get("fidelity"), dur)
        return cls(obj.get("name", "custom"), rows,
                   {k: (None if v is None else float(v))
                    for k, v in obj.get("coherence_us", {}).items()},
                   tuple(obj.get("notes", ())))

    @classmethod
    def from_json(cls, s):
        return cls.from_dict(json.loads(s))


def single_donor_table() -> OperationTable:
    """Measured single-donor operations.

    The qudit Hadamard has no measured fidelity of its own; it is charged at
    NMR-pulse grade over its quoted worst-case duration.  The text and table
    disagree on the electron T2*; the table values are stored and the
    conflict noted, with Hahn-echo figures used for echo-compatible
    sequences.
    """
    rows = {
        "init": OperationRow(0.995, (20000.0, 40000.0)),
        "nmr": OperationRow(0.998, (50.0, 50.0)),
        "esr": OperationRow(0.995, (1.0, 1.0)),
        "edsr": OperationRow(0.995, (8.5, 8.5)),
        "fourier": OperationRow(0.998, (100.0, 100.0)),
        "permutation_largest": OperationRow(0.915, (500.0, 500.0)),
        "measure": OperationRow(0.99, (10000.0, 100000.0)),
    }
    coherence = {
        "electron_T1": 2.44e6,
        "electron_T2_star": 11.06,
        "electron_T2_hahn": 510.0,
        "nuclear_T2_hahn": 247.0,
    }
    notes = (
        "electron T2* quoted as 510 us in the text but 11.06 us in the "
        "table; table values stored, Hahn-echo figure used for "
        "echo-compatible sequences",
        "measurement fidelity quoted as >99%, floored at 0.99",
        "qudit Hadamard charged at NMR-pulse fidelity over its quoted "
        "100 us upper bound",
    )
    return OperationTable("single-donor", rows, coherence, notes)


def sb2_table() -> OperationTable:
    """Two-donor molecule: pulse rows carry over, readout and coherence drop.

    The inter-donor CZ has no benchmarked fidelity; it is carried as None
    and treated as lossless in products, flagged in the notes.
    """
    base = single_donor_table()
    rows = dict(base.rows)
    rows["cz"] = OperationRow(None, (3.0, 3.0))
    rows["measure"] = OperationRow(0.90, (1000.0, 1000.0))
    coherence = {
        "electron_T2": 6.3,
        "nuclear_T2": 2.0,
        "electron_T1": None,
        "electron_T2_star": None,
        "electron_T2_hahn": None,
        "nuclear_T2_hahn": None,
    }
    notes = base.notes + (
        "CZ gate not yet benchmarked: fidelity treated as 1 in products",
        "molecule readout fidelity 90% charged once per donor measurement",
    )
    return OperationTable("sb2-molecule", rows, coherence, notes)


# -- program budgets --------------------------------------------------------


@dataclass(frozen=True)
class BudgetStep:
    kind: str
    row: str | None
    fidelity: float
    duration_us: tuple


@dataclass(frozen=True)
class TimingReport:
    table_name: str
    duration_us: tuple            # (min, mid, max)
    fidelity: float
    coherence_ratios: dict
    flags: tuple
    steps: tuple
    notes: tuple = ()

    def to_dict(self):
        return {
            "table": self.table_name,
            "duration_us": {"min": self.duration_us[0],
                            "mid": self.duration_us[1],
                            "max": self.duration_us[2]},
            "fidelity": self.fidelity,
            "coherence_ratios": dict(self.coherence_ratios),
            "flags": list(self.flags),
            "n_steps": len(self.steps),
            "notes": list(self.notes),
        }


def _instruction_steps(ins, table, cavity):
    """Map one instruction to table rows; unmapped kinds raise KeyError."""
    if ins.op == "fourier":
        row = table.row("fourier")
        return [BudgetStep("fourier", "fourier", _fid(row), row.duration_us)]
    if ins.op == "permute":
        row = table.row("nmr")
        hops = abs(ins.a - ins.b)
        return [BudgetStep("permute", "nmr", _fid(row), row.duration_us)
                ] * hops
    if ins.op == "edsr":
        row = table.row("edsr")
        return [BudgetStep("edsr", "edsr", _fid(row), row.duration_us)]
    if ins.op == "emit":
        t_e = emission_time(cavity.g_s_mhz).raw_us
        return [BudgetStep("emit", None, 1.0, (t_e, t_e))]
    if ins.op == "cz":
        row = table.row("cz")
        return [BudgetStep("cz", "cz", _fid(row), row.duration_us)]
    if ins.op == "measure":
        row = table.row("measure")
        return [BudgetStep("measure", "measure", _fid(row), row.duration_us)]
    if ins.op == "idle":
        dur = float(ins.duration or 0.0)
        return [BudgetStep("idle", None, 1.0, (dur, dur))]
    raise KeyError(f"no budget mapping for instruction kind {ins.op!r}")


def _fid(row):
    return 1.0 if row.fidelity is None else row.fidelity


def timing_fidelity_budget(program, table, cavity=None) -> TimingReport:
    """Sum durations, multiply fidelities, flag coherence overruns.

    ``program`` may be a compiled Program, an iterable of Instructions, or an
    iterable of plain row names (e.g. ["esr"]).  Durations carry the table's
    (min, max) intervals plus a midpoint; the coherence ratio uses the
    midpoint against each available T2-like entry.
    """
    cavity = cavity or CavityParams()
    if isinstance(program, pr.Program):
        instructions = program.instructions
    else:
        instructions = tuple(program)
    steps = []
    for ins in instructions:
        if isinstance(ins, str):
            row = table.row(ins)
            steps.append(BudgetStep(ins, ins, _fid(row), row.duration_us))
        else:
            steps.extend(_instruction_steps(ins, table, cavity))
    lo = sum(s.duration_us[0] for s in steps)
    hi = sum(s.duration_us[1] for s in steps)
    fid = 1.0
    for s in steps:
        fid *= s.fidelity
    mid = 0.5 * (lo + hi)
    ratios = {}
    flags = []
    for key, t2 in table.coherence_us.items():
        if t2 is None or "T1" in key:
            continue
        ratios[key] = mid / t2
        if mid / t2 > 1.0:
            flags.append(f"duration exceeds {key} ({mid:.1f} us vs {t2} us)")
    return TimingReport(table.name, (lo, mid, hi), fid, ratios,
                        tuple(flags), tuple(steps), table.notes)


# -- Monte Carlo photon loss -------------------------------------------------


def monte_carlo_mode_loss(photons, p_loss, trials, master_seed,
                          per_mode=False, d=None):
    """Empirical all-photons-survive rate under per-photon loss.

    In the one-hot time-bin model each photon occupies exactly one of its d
    modes, so loss is charged once per photon by default; ``per_mode=True``
    switches to the d-modes-physically reading with survival (1-p)^d.
    """
    if not 0.0 <= p_loss <= 1.0:
        raise ValueError("p_loss must lie in [0, 1]")
    if trials < 1:
        raise ValueError("need at least one trial")
    if per_mode:
        if d is None:
            raise ValueError("per_mode=True needs the photon dimension d")
        q = (1.0 - p_loss) ** d
    else:
        q = 1.0 - p_loss
    expected = q ** photons
    rng = np.random.default_rng(master_seed)
    if q in (0.0, 1.0):
        rate = float(q ** photons)
    else:
        draws = rng.random((int(trials), int(photons))) < q
        rate = float(np.all(draws, axis=1).mean())
    se = math.sqrt(max(expected * (1 - expected), 1e-300) / trials)
    return {
        "photons": int(photons),
        "p_loss": float(p_loss),
        "per_mode": bool(per_mode),
        "trials": int(trials),
        "survival_rate": rate,
        "expected_rate": float(expected),
        "std_error": se,
        "within_3_sigma": bool(abs(rate - expected) <= 3 * se + 1e-12),
    }
