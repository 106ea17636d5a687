"""Mode-level linear optics: beam splitters, phase shifters, networks.

Convention, used everywhere in the package: a mode unitary L acts on the
column vector of annihilation operators, b = L a.  Creation operators on
states therefore transform with L^T; the Fock lift in the conditioning
module is written against that rule.

A network composes as L_total = L_last ... L_first: the first element in
the list is applied to the modes first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .permanent import _haar_unitary

TAU = 2.0 * math.pi


def _wrap_phase(angle: float) -> float:
    return math.remainder(float(angle), TAU)


@dataclass(frozen=True)
class BeamSplitterParams:
    """Two-mode element with T = cos(theta) e^{i phase_t} and
    R = sin(theta) e^{i phase_r}.

    Any real theta is accepted and canonicalized into [0, pi/2] by folding
    signs of cos/sin into the two phases, so BS(-theta) is the same element
    as BS(theta) with the reflection phase advanced by pi.  Mode order is
    significant: the block sits at rows and columns (mode_a, mode_b).
    """

    mode_a: int
    mode_b: int
    theta: float
    phase_t: float = 0.0
    phase_r: float = 0.0

    def __post_init__(self):
        if self.mode_a == self.mode_b:
            raise ValueError("beam splitter needs two distinct modes")
        if self.mode_a < 0 or self.mode_b < 0:
            raise ValueError("mode indices must be non-negative")
        th = math.remainder(float(self.theta), TAU)
        pt = float(self.phase_t)
        pr = float(self.phase_r)
        if th < 0.0:
            th = -th
            pr += math.pi
        if th > math.pi / 2.0:
            th = math.pi - th
            pt += math.pi
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "phase_t", _wrap_phase(pt))
        object.__setattr__(self, "phase_r", _wrap_phase(pr))

    @property
    def transmission(self) -> complex:
        return math.cos(self.theta) * complex(math.cos(self.phase_t), math.sin(self.phase_t))

    @property
    def reflection(self) -> complex:
        return math.sin(self.theta) * complex(math.cos(self.phase_r), math.sin(self.phase_r))

    def inverse(self) -> "BeamSplitterParams":
        """Element whose matrix is the conjugate transpose of this one."""
        return BeamSplitterParams(
            self.mode_a, self.mode_b, self.theta, -self.phase_t, self.phase_r + math.pi
        )


@dataclass(frozen=True)
class PhaseShifterParams:
    mode: int
    angle: float

    def __post_init__(self):
        if self.mode < 0:
            raise ValueError("mode index must be non-negative")


@dataclass(frozen=True)
class NetworkDescription:
    mode_count: int
    elements: tuple

    def __post_init__(self):
        if self.mode_count < 1:
            raise ValueError("need at least one mode")
        elems = tuple(self.elements)
        for e in elems:
            if isinstance(e, BeamSplitterParams):
                top = max(e.mode_a, e.mode_b)
            elif isinstance(e, PhaseShifterParams):
                top = e.mode
            else:
                raise TypeError(f"unknown network element {e!r}")
            if top >= self.mode_count:
                raise IndexError(f"element {e} addresses mode {top} of {self.mode_count}")
        object.__setattr__(self, "elements", elems)


@dataclass(frozen=True)
class ModeUnitary:
    """N x N unitary on the modes (the paper-level Lambda, not a Fock
    operator).  Construction accepts matrices unitary to 1e-10; everything
    this module builds itself is tight to 1e-12."""

    dimension: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.dimension, self.dimension):
            raise ValueError(f"matrix shape {m.shape} does not match dimension {self.dimension}")
        if not np.all(np.isfinite(m.view(float))):
            raise ValueError("non-finite entry")
        dev = float(np.max(np.abs(m @ m.conj().T - np.eye(self.dimension))))
        if dev > 1e-10:
            raise ValueError(f"matrix is not unitary (deviation {dev:.3e})")
        object.__setattr__(self, "matrix", m)

    def dagger(self) -> "ModeUnitary":
        return ModeUnitary(self.dimension, self.matrix.conj().T)


def bs_matrix(params: BeamSplitterParams, total_modes: int) -> ModeUnitary:
    """Identity except the block [[T, R], [-R*, T*]] on (mode_a, mode_b)."""
    if max(params.mode_a, params.mode_b) >= total_modes:
        raise IndexError("beam splitter modes exceed total_modes")
    t = params.transmission
    r = params.reflection
    m = np.eye(total_modes, dtype=complex)
    a, b = params.mode_a, params.mode_b
    m[a, a] = t
    m[a, b] = r
    m[b, a] = -np.conjugate(r)
    m[b, b] = np.conjugate(t)
    return ModeUnitary(total_modes, m)


def phase_matrix(params: PhaseShifterParams, total_modes: int) -> ModeUnitary:
    if params.mode >= total_modes:
        raise IndexError("phase shifter mode exceeds total_modes")
    m = np.eye(total_modes, dtype=complex)
    m[params.mode, params.mode] = complex(math.cos(params.angle), math.sin(params.angle))
    return ModeUnitary(total_modes, m)


def element_matrix(element, total_modes: int) -> ModeUnitary:
    if isinstance(element, BeamSplitterParams):
        return bs_matrix(element, total_modes)
    if isinstance(element, PhaseShifterParams):
        return phase_matrix(element, total_modes)
    raise TypeError(f"unknown network element {element!r}")


def compose(network: NetworkDescription) -> ModeUnitary:
    """Total mode unitary, first listed element applied first."""
    total = np.eye(network.mode_count, dtype=complex)
    for e in network.elements:
        total = element_matrix(e, network.mode_count).matrix @ total
    return ModeUnitary(network.mode_count, total)


def random_unitary(dimension: int, seed: int) -> ModeUnitary:
    """Haar-distributed unitary, deterministic per seed."""
    if dimension < 1:
        raise ValueError("dimension must be at least one")
    rng = np.random.default_rng(seed)
    return ModeUnitary(dimension, _haar_unitary(dimension, rng))


def reck_decompose(u) -> NetworkDescription:
    """Triangular-mesh factorization of a mode unitary.

    Sub-diagonal entries are eliminated column by column (left to right),
    within a column bottom to top, each by a two-mode rotation on adjacent
    modes applied from the left.  What remains is a diagonal of pure
    phases.  The returned network lists that phase layer first and then
    the inverted rotations in reverse elimination order, so compose()
    reproduces the input within 1e-9.

    Near-zero pivots (|entry| < 1e-14) become zero-angle elements so the
    element count is the same for every input of a given size.
    """
    if isinstance(u, ModeUnitary):
        w = u.matrix.copy()
    else:
        w = np.asarray(u, dtype=complex).copy()
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("need a square matrix")
    n = w.shape[0]
    if float(np.max(np.abs(w @ w.conj().T - np.eye(n)))) > 1e-10:
        raise ValueError("input is not unitary to 1e-10")
    rotations = []
    for col in range(n - 1):
        for row in range(n - 1, col, -1):
            a = w[row - 1, col]
            b = w[row, col]
            if abs(b) < 1e-14:
                rotations.append(BeamSplitterParams(row - 1, row, 0.0))
                continue
            theta = math.atan2(abs(b), abs(a))
            phase_t = math.atan2(b.imag, b.real)
            phase_r = math.atan2(a.imag, a.real) if abs(a) > 0 else 0.0
            params = BeamSplitterParams(row - 1, row, theta, phase_t, phase_r)
            rotations.append(params)
            blk = bs_matrix(params, n).matrix
            w = blk @ w
    elements: list = []
    for mode in range(n):
        delta = math.atan2(w[mode, mode].imag, w[mode, mode].real)
        if abs(delta) > 1e-14:
            elements.append(PhaseShifterParams(mode, delta))
    for params in reversed(rotations):
        elements.append(params.inverse())
    return NetworkDescription(n, tuple(elements))
