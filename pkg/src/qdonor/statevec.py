"""Dense mixed-radix state-vector engine.

A :class:`Register` holds the joint state of a donor nucleus (treated as a
d-level qudit), the bound electron, and any photonic time-bin qudits emitted
so far.  Amplitudes are stored as a complex ndarray with one axis per
subsystem, so gates reduce to axis-wise tensor contractions and slicing.

Conventions
-----------
* Donor levels count down from the topmost projection: level 0 is |7/2>,
  level 1 is |5/2>, and so on.
* Electron level 0 is spin-down, level 1 is spin-up.
* A finished photon is a d-level subsystem whose level k means "the single
  photon sits in time-bin k".  While a photon is still being emitted it
  carries one extra level (index d) representing the vacuum; call
  :func:`finalize_photon` after the last bin to contract it away.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_AMPLITUDE_CAP = 2**25
NORM_ATOL = 1e-10

ROLE_DONOR = "donor-nucleus"
ROLE_ELECTRON = "electron"
ROLE_PHOTON = "photon"

ELECTRON_DOWN = 0
ELECTRON_UP = 1


class CapacityError(RuntimeError):
    """Raised when an operation would exceed the amplitude cap."""


@dataclass(frozen=True)
class LevelSubset:
    """An ordered choice of levels within one subsystem.

    ``levels[j]`` is the physical level playing the role of qudit level j,
    e.g. nuclear states 7/2, 5/2, 3/2 encoded as (0, 1, 2).
    """

    subsystem: int
    levels: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.levels)) != len(self.levels):
            raise ValueError(f"levels must be distinct, got {self.levels}")
        if len(self.levels) < 2:
            raise ValueError("a level subset needs at least two levels")


@dataclass(frozen=True)
class MeasurementRecord:
    subsystem: int
    outcome: int
    probability: float


class Register:
    """Mixed-radix state vector over an ordered list of subsystems."""

    def __init__(self, radices, amps, labels=None, cap=DEFAULT_AMPLITUDE_CAP):
        self.radices = tuple(int(r) for r in radices)
        if any(r < 2 for r in self.radices):
            raise ValueError(f"every radix must be >= 2, got {self.radices}")
        size = math.prod(self.radices)
        if size > cap:
            raise CapacityError(
                f"register of {size} amplitudes exceeds cap {cap}")
        self.cap = cap
        self.amps = np.asarray(amps, dtype=np.complex128).reshape(self.radices)
        if labels is None:
            labels = (ROLE_DONOR,) * len(self.radices)
        self.labels = tuple(labels)
        if len(self.labels) != len(self.radices):
            raise ValueError("labels and radices must have equal length")

    @property
    def n_subsystems(self):
        return len(self.radices)

    @property
    def size(self):
        return int(self.amps.size)

    def norm(self):
        return float(np.linalg.norm(self.amps))

    def copy(self):
        return Register(self.radices, self.amps.copy(), self.labels, self.cap)

    def check_norm(self, atol=NORM_ATOL):
        n = self.norm()
        if abs(n - 1.0) > atol:
            raise ValueError(f"state norm drifted to {n}")
        return self

    def subsystems_with_role(self, role):
        return [i for i, lab in enumerate(self.labels) if lab == role]

    def electron_index(self):
        idx = self.subsystems_with_role(ROLE_ELECTRON)
        if len(idx) != 1:
            raise ValueError(f"expected exactly one electron, found {idx}")
        return idx[0]

    # -- serialization --------------------------------------------------

    def to_dict(self):
        flat = self.amps.reshape(-1)
        return {
            "radices": list(self.radices),
            "labels": list(self.labels),
            "amplitudes": [[float(a.real), float(a.imag)] for a in flat],
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d, cap=DEFAULT_AMPLITUDE_CAP):
        amps = np.array([complex(re, im) for re, im in d["amplitudes"]])
        return cls(d["radices"], amps, tuple(d["labels"]), cap)

    @classmethod
    def from_json(cls, s, cap=DEFAULT_AMPLITUDE_CAP):
        return cls.from_dict(json.loads(s), cap)

    def __repr__(self):
        return f"Register(radices={self.radices}, labels={self.labels})"


def init_register(radices, basis_index, labels=None, cap=DEFAULT_AMPLITUDE_CAP):
    """Unit amplitude on one product basis state."""
    radices = tuple(int(r) for r in radices)
    basis_index = tuple(int(k) for k in basis_index)
    if len(basis_index) != len(radices):
        raise ValueError("basis_index length must match radices")
    for k, r in zip(basis_index, radices):
        if not 0 <= k < r:
            raise IndexError(f"basis index {k} out of range for radix {r}")
    size = math.prod(radices)
    if size > cap:
        raise CapacityError(f"register of {size} amplitudes exceeds cap {cap}")
    amps = np.zeros(radices, dtype=np.complex128)
    amps[basis_index] = 1.0
    return Register(radices, amps, labels, cap)


# -- single-subsystem unitaries -----------------------------------------


def _apply_matrix(reg, subsystem, matrix):
    """Contract a (radix x radix) matrix into one axis of the state."""
    r = reg.radices[subsystem]
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.shape != (r, r):
        raise ValueError(f"matrix shape {matrix.shape} does not fit radix {r}")
    new = np.tensordot(matrix, reg.amps, axes=([1], [subsystem]))
    new = np.moveaxis(new, 0, subsystem)
    return Register(reg.radices, new, reg.labels, reg.cap)


def fourier_matrix(d):
    """F_d with entries omega^{jk} / sqrt(d)."""
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return np.exp(2j * np.pi * j * k / d) / np.sqrt(d)


def subset_matrix(radix, levels, block):
    """Embed a len(levels) x len(levels) block into an identity of size radix."""
    m = np.eye(radix, dtype=np.complex128)
    idx = np.array(levels)
    m[np.ix_(idx, idx)] = block
    return m


def apply_fourier(reg, subset):
    """Qudit Fourier gate F_d on the chosen levels, identity elsewhere.

    ``subset`` is a :class:`LevelSubset`; pass an int to mean "every level of
    that subsystem".
    """
    if isinstance(subset, int):
        sub = subset
        levels = tuple(range(reg.radices[sub]))
    else:
        sub, levels = subset.subsystem, subset.levels
    for lv in levels:
        if not 0 <= lv < reg.radices[sub]:
            raise IndexError(f"level {lv} out of range")
    block = fourier_matrix(len(levels))
    return _apply_matrix(reg, sub, subset_matrix(reg.radices[sub], levels, block))


def pauli_x_matrix(d, power=1):
    """X^p with X|k> = |k+1 mod d>."""
    m = np.zeros((d, d), dtype=np.complex128)
    for k in range(d):
        m[(k + power) % d, k] = 1.0
    return m


def pauli_z_matrix(d, power=1):
    """Z^p with Z|k> = omega^k |k>."""
    omega = cmath.exp(2j * cmath.pi / d)
    return np.diag([omega ** ((power * k) % d) for k in range(d)]).astype(
        np.complex128)


def apply_pauli_power(reg, subsystem, kind, power):
    """Generalized Pauli X^p or Z^p on one subsystem."""
    d = reg.radices[subsystem]
    power = int(power) % d
    if kind == "X":
        if power == 0:
            return reg.copy()
        rolled = np.roll(reg.amps, power, axis=subsystem)
        return Register(reg.radices, rolled, reg.labels, reg.cap)
    if kind == "Z":
        phases = np.exp(2j * np.pi * power * np.arange(d) / d)
        shape = [1] * reg.n_subsystems
        shape[subsystem] = d
        new = reg.amps * phases.reshape(shape)
        return Register(reg.radices, new, reg.labels, reg.cap)
    raise ValueError(f"unknown Pauli kind {kind!r} (expected 'X' or 'Z')")


def apply_permutation(reg, subsystem, a, b):
    """Swap the amplitudes of levels a and b (NMR pi-pulse idealization)."""
    r = reg.radices[subsystem]
    if not (0 <= a < r and 0 <= b < r):
        raise IndexError(f"levels ({a},{b}) out of range for radix {r}")
    if a == b:
        return reg.copy()
    new = reg.amps.copy()
    sl_a = [slice(None)] * reg.n_subsystems
    sl_b = [slice(None)] * reg.n_subsystems
    sl_a[subsystem] = a
    sl_b[subsystem] = b
    new[tuple(sl_a)], new[tuple(sl_b)] = (reg.amps[tuple(sl_b)],
                                          reg.amps[tuple(sl_a)])
    return Register(reg.radices, new, reg.labels, reg.cap)


def apply_conditional_flip(reg, control, target):
    """Flip the electron exactly on the control level's branch.

    ``control`` is a (subsystem, level) pair; ``target`` must have radix 2.
    This is the ESR/EDSR pulse idealization: the paired nuclear change of a
    physical EDSR pulse is composed from this flip plus a permutation.
    """
    csub, clevel = control
    if csub == target:
        raise ValueError("control subsystem equals target")
    if reg.radices[target] != 2:
        raise ValueError("flip target must have radix 2")
    if not 0 <= clevel < reg.radices[csub]:
        raise IndexError(f"control level {clevel} out of range")
    new = reg.amps.copy()
    sel = [slice(None)] * reg.n_subsystems
    sel[csub] = clevel
    sel_dn = list(sel)
    sel_up = list(sel)
    sel_dn[target] = ELECTRON_DOWN
    sel_up[target] = ELECTRON_UP
    new[tuple(sel_dn)], new[tuple(sel_up)] = (reg.amps[tuple(sel_up)],
                                              reg.amps[tuple(sel_dn)])
    return Register(reg.radices, new, reg.labels, reg.cap)


# -- photon emission ------------------------------------------------------


def add_photon(reg, d):
    """Append a photon subsystem with d bins plus a vacuum level (index d)."""
    size = reg.size * (d + 1)
    if size > reg.cap:
        raise CapacityError(f"adding a photon needs {size} amplitudes, "
                            f"cap is {reg.cap}")
    new_shape = reg.radices + (d + 1,)
    new = np.zeros(new_shape, dtype=np.complex128)
    new[..., d] = reg.amps
    return Register(new_shape, new, reg.labels + (ROLE_PHOTON,), reg.cap), \
        reg.n_subsystems


def photon_vacuum_level(reg, photon):
    """Vacuum is the last level while the photon is under construction."""
    return reg.radices[photon] - 1


def apply_emission(reg, photon, bin, electron=None, atol=NORM_ATOL):
    """Cavity exchange: |up, vac> -> |down, photon in bin>, spin-down idle.

    Models the resonant spin-cavity energy swap as an instantaneous map; the
    emission duration is charged in the timing budget instead.
    """
    if electron is None:
        electron = reg.electron_index()
    vac = photon_vacuum_level(reg, photon)
    if not 0 <= bin < vac:
        raise IndexError(f"bin {bin} out of range (photon has {vac} bins)")
    sel_up = [slice(None)] * reg.n_subsystems
    sel_up[electron] = ELECTRON_UP
    up_branch = reg.amps[tuple(sel_up)]
    # occupancy check: the emitting branch must hold no earlier photon
    occupied = np.delete(up_branch, vac, axis=photon if photon < electron
                         else photon - 1)
    if np.linalg.norm(occupied) > atol:
        raise ValueError(
            f"photon {photon} already populated on a branch where emission "
            "triggers")
    new = reg.amps.copy()
    src = [slice(None)] * reg.n_subsystems
    src[electron] = ELECTRON_UP
    src[photon] = vac
    dst = [slice(None)] * reg.n_subsystems
    dst[electron] = ELECTRON_DOWN
    dst[photon] = bin
    new[tuple(dst)] += reg.amps[tuple(src)]
    new[tuple(src)] = 0.0
    return Register(reg.radices, new, reg.labels, reg.cap)


def emit_photon_cycle(reg, emitter, emission_level, photon, bin, electron=None):
    """One EDSR excitation plus cavity exchange.

    Net effect on the emission-level branch: |level>|down>|vac> ->
    |level>|down>|bin>, identity on every other branch.  The electron must be
    spin-down on all branches beforehand.
    """
    if electron is None:
        electron = reg.electron_index()
    sel_up = [slice(None)] * reg.n_subsystems
    sel_up[electron] = ELECTRON_UP
    if np.linalg.norm(reg.amps[tuple(sel_up)]) > NORM_ATOL:
        raise ValueError("electron must start spin-down on all branches")
    out = apply_conditional_flip(reg, (emitter, emission_level), electron)
    return apply_emission(out, photon, bin, electron)


def finalize_photon(reg, photon, atol=NORM_ATOL):
    """Contract a photon's vacuum level away once every bin has been visited."""
    vac = photon_vacuum_level(reg, photon)
    sel = [slice(None)] * reg.n_subsystems
    sel[photon] = vac
    leftover = np.linalg.norm(reg.amps[tuple(sel)])
    if leftover > atol:
        raise ValueError(
            f"photon {photon} still has vacuum amplitude {leftover:.3e}")
    keep = [slice(None)] * reg.n_subsystems
    keep[photon] = slice(0, vac)
    new = reg.amps[tuple(keep)].copy()
    radices = list(reg.radices)
    radices[photon] = vac
    return Register(radices, new, reg.labels, reg.cap)


# -- two-subsystem gates --------------------------------------------------


def apply_cz_power(reg, i, j, weight):
    """Diagonal gate omega^{w k l} between equal-dimension subsystems."""
    if i == j:
        raise ValueError("CZ needs two distinct subsystems")
    d = reg.radices[i]
    if reg.radices[j] != d:
        raise ValueError(
            f"CZ dimension mismatch: {reg.radices[i]} vs {reg.radices[j]}")
    weight = int(weight) % d
    if weight == 0:
        return reg.copy()
    k = np.arange(d)
    phase = np.exp(2j * np.pi * weight * np.outer(k, k) / d)
    # broadcast the (symmetric) d x d phase table onto axes (i, j)
    a, b = sorted((i, j))
    view_shape = [1] * reg.n_subsystems
    view_shape[a] = d
    view_shape[b] = d
    full = phase.reshape(view_shape)
    return Register(reg.radices, reg.amps * full, reg.labels, reg.cap)


# -- measurement ----------------------------------------------------------


def outcome_probabilities(reg, subsystem):
    axes = tuple(ax for ax in range(reg.n_subsystems) if ax != subsystem)
    p = np.sum(np.abs(reg.amps) ** 2, axis=axes)
    return np.real(p)


def collapse(reg, subsystem, outcome, atol=1e-14):
    """Project onto one outcome and renormalize; errors on zero probability."""
    probs = outcome_probabilities(reg, subsystem)
    p = float(probs[outcome])
    if p <= atol:
        raise ValueError(
            f"collapse onto zero-probability outcome {outcome} requested")
    new = np.zeros_like(reg.amps)
    sel = [slice(None)] * reg.n_subsystems
    sel[subsystem] = outcome
    new[tuple(sel)] = reg.amps[tuple(sel)] / math.sqrt(p)
    rec = MeasurementRecord(subsystem, int(outcome), p)
    return rec, Register(reg.radices, new, reg.labels, reg.cap)


def measure(reg, subsystem, rng):
    """Born-rule sample with a seeded generator; returns (record, collapsed)."""
    probs = outcome_probabilities(reg, subsystem)
    probs = probs / probs.sum()
    outcome = int(rng.choice(len(probs), p=probs))
    return collapse(reg, subsystem, outcome)


def enumerate_outcomes(reg, subsystem, atol=1e-14):
    """Deterministic, exhaustive list of (outcome, probability, collapsed).

    Outcomes with probability below ``atol`` are reported with probability 0
    and no collapsed register.
    """
    probs = outcome_probabilities(reg, subsystem)
    out = []
    for level, p in enumerate(probs):
        if p <= atol:
            out.append((level, 0.0, None))
        else:
            _, collapsed = collapse(reg, subsystem, level)
            out.append((level, float(p), collapsed))
    return out


def remove_subsystem(reg, subsystem, atol=NORM_ATOL):
    """Drop a subsystem that sits in a definite basis level on every branch."""
    probs = outcome_probabilities(reg, subsystem)
    level = int(np.argmax(probs))
    if abs(probs[level] - 1.0) > atol:
        raise ValueError(
            f"subsystem {subsystem} is not in a definite level "
            f"(probabilities {probs})")
    sel = [slice(None)] * reg.n_subsystems
    sel[subsystem] = level
    new = reg.amps[tuple(sel)].copy()
    radices = tuple(r for ax, r in enumerate(reg.radices) if ax != subsystem)
    labels = tuple(l for ax, l in enumerate(reg.labels) if ax != subsystem)
    return Register(radices, new, labels, reg.cap)


def reorder_subsystems(reg, order):
    """Permute subsystem axes: new axis i holds old axis order[i]."""
    order = tuple(order)
    if sorted(order) != list(range(reg.n_subsystems)):
        raise ValueError(f"not a permutation: {order}")
    new = np.transpose(reg.amps, order)
    return Register(tuple(reg.radices[i] for i in order), new,
                    tuple(reg.labels[i] for i in order), reg.cap)


def overlap(reg_a, reg_b):
    if reg_a.radices != reg_b.radices:
        raise ValueError("registers have different shapes")
    return complex(np.vdot(reg_a.amps, reg_b.amps))


def fidelity(reg_a, reg_b):
    return abs(overlap(reg_a, reg_b)) ** 2


# -- time-bin one-hot strings ---------------------------------------------


def bin_string(k, d):
    """One-hot occupation string for a photon in bin k of d.

    Note the appendix-style qubit labeling runs the other way: there the
    two-bin strings are read as logical values with "10" = 1 and "01" = 0,
    i.e. bin 0 carries logical 1.  This helper sticks to plain one-hot
    encoding; callers wanting the logical value use ``d - 1 - k`` style maps
    explicitly.
    """
    if not 0 <= k < d:
        raise IndexError(f"bin {k} out of range for {d} bins")
    return "".join("1" if i == k else "0" for i in range(d))


def bin_index(s):
    """Inverse of :func:`bin_string`; rejects strings that are not one-hot."""
    if s.count("1") != 1 or set(s) - {"0", "1"}:
        raise ValueError(f"not a one-hot string: {s!r}")
    return s.index("1")
