"""Conditional operators from post-selected linear networks.

A passive network with mode matrix L sends a_j^dag to sum_l L_lj a_l^dag.
Injecting fixed Fock states on auxiliary modes and projecting them on
detector outcomes leaves a non-unitary operator Y on the signal modes:

    Y[out, in] = <out, det| U(L) |in, aux>

computed exactly in each photon-number sector through permanents with
repeated indices.  An independent oracle expands the same amplitudes as
multivariate polynomials in creation operators and never touches the
permanent code; the two paths cross-check each other in the tests.

Y is stored exactly as projected, sub-normalized.  Success probabilities
then compose across interferometer arms by plain multiplication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import (
    FockBasis,
    FockOperator,
    PolicyMismatchError,
    PureState,
    TotalPhotonCutoff,
)
from .interferometer import ModeUnitary
from .permanent import _per_flat

MAX_ORACLE_PHOTONS = 10


@dataclass(frozen=True)
class AncillaSpec:
    """Photon count injected into each auxiliary mode."""

    counts: tuple

    def __post_init__(self):
        c = tuple(int(n) for n in self.counts)
        if any(n < 0 for n in c):
            raise ValueError("ancilla counts must be non-negative")
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class DetectionSpec:
    """Photon count required on each auxiliary-mode detector."""

    counts: tuple

    def __post_init__(self):
        c = tuple(int(n) for n in self.counts)
        if any(n < 0 for n in c):
            raise ValueError("detection counts must be non-negative")
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return sum(self.counts)


def _as_matrix(u) -> np.ndarray:
    if isinstance(u, ModeUnitary):
        return u.matrix
    m = np.asarray(u, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("need a square mode matrix")
    return m


def fock_lift_amplitude(u, input_occ, output_occ) -> complex:
    """<output| U |input> for the Fock lift of a mode matrix.

    Equals per(L with row i repeated output[i] times and column j repeated
    input[j] times) / sqrt(prod(input!) prod(output!)).  Exactly zero when
    the photon totals differ: the lift is block diagonal in total photon
    number.
    """
    m = _as_matrix(u)
    n_in = tuple(int(x) for x in input_occ)
    n_out = tuple(int(x) for x in output_occ)
    if len(n_in) != m.shape[0] or len(n_out) != m.shape[0]:
        raise ValueError("occupation length does not match matrix dimension")
    if any(x < 0 for x in n_in + n_out):
        raise ValueError("occupations must be non-negative")
    if sum(n_in) != sum(n_out):
        return 0j
    rows = [i for i, c in enumerate(n_out) for _ in range(c)]
    cols = [j for j, c in enumerate(n_in) for _ in range(c)]
    k = len(rows)
    flat = [m[i, j] for i in rows for j in cols]
    norm = math.sqrt(
        math.prod(math.factorial(x) for x in n_in)
        * math.prod(math.factorial(x) for x in n_out)
    )
    return complex(_per_flat(flat, k)) / norm


def fock_lift_oracle(u, input_occ) -> PureState:
    """Output state of the lift by direct polynomial expansion.

    Expands prod_j (sum_l L_lj a_l^dag)^{n_j} acting on vacuum as a
    multivariate polynomial, coefficients accumulated in a hash of
    occupation tuples, then converts monomials to Fock amplitudes with
    the sqrt(m!) factors.  No permanent is evaluated anywhere on this
    path; it exists to check the permanent path independently.
    """
    m = _as_matrix(u)
    dim = m.shape[0]
    occ = tuple(int(x) for x in input_occ)
    if len(occ) != dim:
        raise ValueError("occupation length does not match matrix dimension")
    if any(x < 0 for x in occ):
        raise ValueError("occupations must be non-negative")
    total = sum(occ)
    if total > MAX_ORACLE_PHOTONS:
        raise ValueError(f"oracle expansion capped at {MAX_ORACLE_PHOTONS} photons")
    poly: dict[tuple, complex] = {(0,) * dim: 1.0 + 0j}
    for j in range(dim):
        for _ in range(occ[j]):
            nxt: dict[tuple, complex] = {}
            for mono, coeff in poly.items():
                for l in range(dim):
                    w = m[l, j]
                    if w == 0:
                        continue
                    lifted = list(mono)
                    lifted[l] += 1
                    key = tuple(lifted)
                    nxt[key] = nxt.get(key, 0j) + coeff * w
            poly = nxt
    basis = FockBasis(dim, TotalPhotonCutoff(total))
    amps = np.zeros(basis.dimension, dtype=complex)
    in_norm = math.sqrt(math.prod(math.factorial(x) for x in occ))
    for mono, coeff in poly.items():
        amps[basis.index_of(mono)] = coeff * math.sqrt(
            math.prod(math.factorial(x) for x in mono)
        ) / in_norm
    return PureState(basis, amps, unchecked=True)


def lift_unitary(u, basis: FockBasis) -> FockOperator:
    """Full Fock-space matrix of a lifted mode unitary.

    Exact on a total-photon basis: the lift is block diagonal in total
    photon number and such a basis holds every state of each sector it
    admits.  A per-mode cutoff would chop sectors open (|2,1> evolves
    partly into |3,0>) and the result would not be unitary, so those
    bases are rejected instead of silently truncated.
    """
    m = _as_matrix(u)
    if basis.mode_count != m.shape[0]:
        raise ValueError(
            f"basis has {basis.mode_count} modes, matrix has {m.shape[0]}"
        )
    if not isinstance(basis.policy, TotalPhotonCutoff):
        raise PolicyMismatchError(
            "unitary lift needs a total-photon basis; per-mode cutoffs "
            "truncate photon-number sectors"
        )
    occs = basis.occupations
    totals = [sum(o) for o in occs]
    out = np.zeros((basis.dimension, basis.dimension), dtype=complex)
    for col, occ_in in enumerate(occs):
        for row, occ_out in enumerate(occs):
            if totals[row] != totals[col]:
                continue
            out[row, col] = fock_lift_amplitude(m, occ_in, occ_out)
    return FockOperator(basis, out)


class ConditionalExtractor:
    """Precomputed gather tables for one (network shape, ancilla, detection,
    cutoff) combination.

    Building the tables costs a basis walk; each subsequent extraction per
    candidate mode matrix is just entry gathering plus small permanents,
    which is what makes optimizer loops over thousands of candidate
    networks affordable.
    """

    def __init__(self, mode_count: int, signal_modes, aux: AncillaSpec, det: DetectionSpec, signal_cutoff: int):
        signal = tuple(int(s) for s in signal_modes)
        if len(set(signal)) != len(signal):
            raise ValueError("signal modes repeat")
        if any(not 0 <= s < mode_count for s in signal):
            raise IndexError("signal mode out of range")
        aux_modes = tuple(m for m in range(mode_count) if m not in signal)
        if len(aux.counts) != len(aux_modes) or len(det.counts) != len(aux_modes):
            raise ValueError(
                f"ancilla/detection specs must cover the {len(aux_modes)} non-signal modes"
            )
        if signal_cutoff < 0:
            raise ValueError("signal cutoff must be non-negative")
        self.mode_count = mode_count
        self.signal_modes = signal
        self.aux_modes = aux_modes
        self.aux = aux
        self.det = det
        self.signal_cutoff = signal_cutoff
        self.signal_basis = FockBasis(len(signal), TotalPhotonCutoff(signal_cutoff))
        imbalance = aux.total - det.total
        self.faithful_input_levels = signal_cutoff - max(imbalance, 0)
        if self.faithful_input_levels < 0:
            raise ValueError(
                f"signal cutoff {signal_cutoff} cannot hold the {imbalance} photons "
                "added by the ancilla/detection imbalance"
            )
        dim = self.signal_basis.dimension
        occs = self.signal_basis.occupations
        # one gather table per matrix entry in the conserving sector
        self._entries = []
        for col, occ_in in enumerate(occs):
            in_total = sum(occ_in) + aux.total
            full_in = self._scatter(occ_in, aux.counts)
            cols = [j for j, c in enumerate(full_in) for _ in range(c)]
            for row, occ_out in enumerate(occs):
                if sum(occ_out) + det.total != in_total:
                    continue
                full_out = self._scatter(occ_out, det.counts)
                rows = [i for i, c in enumerate(full_out) for _ in range(c)]
                norm = math.sqrt(
                    math.prod(math.factorial(x) for x in full_in)
                    * math.prod(math.factorial(x) for x in full_out)
                )
                gather = [i * mode_count + j for i in rows for j in cols]
                self._entries.append((row, col, gather, len(rows), norm))
        self._dim = dim

    def _scatter(self, signal_occ, aux_occ):
        full = [0] * self.mode_count
        for s, n in zip(self.signal_modes, signal_occ):
            full[s] = n
        for a, n in zip(self.aux_modes, aux_occ):
            full[a] = n
        return tuple(full)

    def extract_matrix(self, mode_matrix) -> np.ndarray:
        m = _as_matrix(mode_matrix)
        if m.shape[0] != self.mode_count:
            raise ValueError("mode matrix dimension mismatch")
        flat = m.ravel()
        out = np.zeros((self._dim, self._dim), dtype=complex)
        for row, col, gather, k, norm in self._entries:
            vals = flat[gather].tolist()
            out[row, col] = _per_flat(vals, k) / norm
        return out


@dataclass
class ConditionalOperator:
    """Signal-space operator left after ancilla injection and detection.

    operator is sub-normalized exactly as projected.  When the imbalance
    between injected and detected photons is positive, input layers above
    faithful_input_levels map partly outside the stored cutoff and those
    columns are truncated; everything at or below is exact.
    """

    operator: FockOperator
    mode_unitary: np.ndarray
    signal_modes: tuple
    aux: object
    det: DetectionSpec
    faithful_input_levels: int

    def __post_init__(self):
        top = float(np.linalg.norm(self.operator.matrix, 2))
        if top > 1.0 + 1e-9:
            raise ValueError(
                f"conditional operator norm {top} exceeds one; "
                "the network is not unitary or the detection is not a projector"
            )


def extract_conditional_operator(u, signal_modes, aux: AncillaSpec, det: DetectionSpec, signal_cutoff: int) -> ConditionalOperator:
    """Project the lifted network on the detection outcome.

    Matrix entries are <out, det| U |in, aux> over signal occupations up
    to signal_cutoff, exact in each conserving sector.
    """
    m = _as_matrix(u)
    ex = ConditionalExtractor(m.shape[0], signal_modes, aux, det, signal_cutoff)
    mat = ex.extract_matrix(m)
    return ConditionalOperator(
        operator=FockOperator(ex.signal_basis, mat),
        mode_unitary=m,
        signal_modes=ex.signal_modes,
        aux=aux,
        det=det,
        faithful_input_levels=ex.faithful_input_levels,
    )


def extract_with_ancilla_state(u, signal_modes, ancilla: PureState, det: DetectionSpec, signal_cutoff: int) -> ConditionalOperator:
    """Conditional operator for a superposed (non-Fock) ancilla input.

    Y is linear in the ancilla ket, so this is the amplitude-weighted sum
    of Fock-ancilla extractions.  Components whose photon surplus cannot
    fit under the cutoff are rejected rather than silently dropped; crop
    the ancilla state first if a truncated tail is acceptable.
    """
    m = _as_matrix(u)
    mode_count = m.shape[0]
    n_aux = mode_count - len(tuple(signal_modes))
    if ancilla.basis.mode_count != n_aux:
        raise ValueError(f"ancilla state has {ancilla.basis.mode_count} modes, need {n_aux}")
    total = None
    mat = None
    faithful = None
    for i, occ in enumerate(ancilla.basis.occupations):
        amp = ancilla.amplitudes[i]
        if amp == 0:
            continue
        part = extract_conditional_operator(
            u, signal_modes, AncillaSpec(occ), det, signal_cutoff
        )
        if mat is None:
            mat = amp * part.operator.matrix
            basis = part.operator.basis
            faithful = part.faithful_input_levels
            sm = part.signal_modes
        else:
            mat = mat + amp * part.operator.matrix
            faithful = min(faithful, part.faithful_input_levels)
    if mat is None:
        raise ValueError("ancilla state is identically zero")
    return ConditionalOperator(
        operator=FockOperator(basis, mat),
        mode_unitary=m,
        signal_modes=sm,
        aux=ancilla,
        det=det,
        faithful_input_levels=faithful,
    )


def success_probability(y: ConditionalOperator, state: PureState) -> float:
    """||Y|psi>||^2 for a normalized input."""
    if state.basis != y.operator.basis:
        raise ValueError("input state lives on a different basis than the operator")
    nrm = state.norm()
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError(f"input must be normalized, got norm {nrm}")
    return float(np.linalg.norm(y.operator.matrix @ state.amplitudes) ** 2)


@dataclass(frozen=True)
class PropositionReport:
    proposition: int
    n_aux: int
    requested_seed: int
    used_seed: int
    reseed_count: int
    cutoff: int
    deviation: float
    leading_coefficient_deviation: float | None = None


def _haar_from_seed(dim: int, seed: int) -> np.ndarray:
    from .permanent import _haar_unitary

    return _haar_unitary(dim, np.random.default_rng(seed))


def verify_proposition(which: int, n_aux: int, seed: int, cutoff: int = 6) -> PropositionReport:
    """Check one of the three closed forms on a seeded random network.

    1: ancilla all |1>, detect all |0>  ->  (prod_j L_1j) (a^dag)^N L_11^n
    2: ancilla all |0>, detect all |1>  ->  (prod_i L_i1) L_11^n a^N
    3: ancilla = detect = all |1>       ->  degree-N polynomial in n times
       L_11^n, leading coefficient (prod_j L_1j)(prod_i L_i1) / L_11^N

    Seeds whose |L_11| is below 1e-2 are nearly degenerate (the closed
    forms divide by powers of L_11) and are re-seeded deterministically;
    the report records how many steps that took.
    """
    if which not in (1, 2, 3):
        raise ValueError("proposition must be 1, 2 or 3")
    if not 1 <= n_aux <= 4:
        raise ValueError("n_aux must be between 1 and 4")
    if cutoff < n_aux + 1:
        raise ValueError("cutoff too small to see the polynomial degree")
    dim = n_aux + 1
    used = seed
    reseeds = 0
    while True:
        lam = _haar_from_seed(dim, used)
        if abs(lam[0, 0]) >= 1e-2:
            break
        used += 1
        reseeds += 1
        if reseeds > 100:
            raise RuntimeError("could not find a non-degenerate seed nearby")
    n_levels = np.arange(cutoff + 1)
    l11 = lam[0, 0]
    if which == 1:
        aux = AncillaSpec((1,) * n_aux)
        det = DetectionSpec((0,) * n_aux)
        y = extract_conditional_operator(lam, (0,), aux, det, cutoff)
        pref = math.prod(lam[0, j] for j in range(1, dim))
        target = np.zeros_like(y.operator.matrix)
        for n in range(cutoff - n_aux + 1):
            target[n + n_aux, n] = pref * l11**n * math.sqrt(
                math.factorial(n + n_aux) / math.factorial(n)
            )
        cols = cutoff - n_aux + 1
        dev = float(np.max(np.abs(y.operator.matrix[:, :cols] - target[:, :cols])))
        return PropositionReport(1, n_aux, seed, used, reseeds, cutoff, dev)
    if which == 2:
        aux = AncillaSpec((0,) * n_aux)
        det = DetectionSpec((1,) * n_aux)
        y = extract_conditional_operator(lam, (0,), aux, det, cutoff)
        pref = math.prod(lam[i, 0] for i in range(1, dim))
        target = np.zeros_like(y.operator.matrix)
        for n in range(n_aux, cutoff + 1):
            target[n - n_aux, n] = pref * l11 ** (n - n_aux) * math.sqrt(
                math.factorial(n) / math.factorial(n - n_aux)
            )
        dev = float(np.max(np.abs(y.operator.matrix - target)))
        return PropositionReport(2, n_aux, seed, used, reseeds, cutoff, dev)
    aux = AncillaSpec((1,) * n_aux)
    det = DetectionSpec((1,) * n_aux)
    y = extract_conditional_operator(lam, (0,), aux, det, cutoff)
    mat = y.operator.matrix
    off = mat - np.diag(np.diag(mat))
    off_dev = float(np.max(np.abs(off)))
    q = np.diag(mat) / l11**n_levels
    vander = np.vander(n_levels.astype(float), n_aux + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(vander, q, rcond=None)
    fit_dev = float(np.max(np.abs(vander @ coef - q)))
    pref = math.prod(lam[0, j] for j in range(1, dim)) * math.prod(
        lam[i, 0] for i in range(1, dim)
    )
    lead_dev = float(abs(coef[n_aux] - pref / l11**n_aux))
    return PropositionReport(
        3, n_aux, seed, used, reseeds, cutoff, max(off_dev, fit_dev), lead_dev
    )
