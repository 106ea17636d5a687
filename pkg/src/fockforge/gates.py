"""Conditional-gate recipes on the truncated Fock simulator.

Each public function returns an executable description (network, ancilla
pattern, detection pattern) together with a report comparing the
extracted conditional operator against the ideal target.  Construction
strategies vary by gate: some are closed-form (swap, the vacuum-detector
controlled-phase, KILL), some run the seeded network search (nonlinear
sign shift, SU(3) phase synthesis, Pauli X/Y), and the CNOT entry is a
deliberate failure report - numerical evidence that no beam-splitter
sandwich of product number operators reproduces it.

Success probabilities are amplitude-squared scales of the extracted
operator and multiply across independent interferometer arms.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .conditioning import (
    AncillaSpec,
    ConditionalOperator,
    DetectionSpec,
    extract_conditional_operator,
    extract_with_ancilla_state,
    fock_lift_amplitude,
    lift_unitary,
)
from .fock import (
    CutoffTooSmallError,
    FockBasis,
    FockOperator,
    PerModeCutoff,
    PureState,
    TotalPhotonCutoff,
    coherent_state,
    displacement_operator_for,
    number_polynomial,
)
from .interferometer import (
    BeamSplitterParams,
    NetworkDescription,
    PhaseShifterParams,
    bs_matrix,
    compose,
)
from .optimizer import Objective, optimize_gate
from .permanent import subpermanent

FOUR_PHOTON = "four-photon"
VACUUM_DETECTOR = "vacuum-detector"


# ---------------------------------------------------------------------------
# report plumbing


def phase_aligned_residual(achieved, target):
    """Max-entry distance between two matrices after removing one global
    phase, the phase taken in closed form from tr(target^dag achieved).

    Returns (residual, phase) with achieved ~ phase * target at optimum.
    """
    a = np.asarray(achieved, dtype=complex)
    b = np.asarray(target, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    ip = complex(np.sum(b.conj() * a))
    z = ip / abs(ip) if abs(ip) > 0 else 1.0 + 0j
    return float(np.max(np.abs(a - z * b))), z


@dataclass(frozen=True)
class GateRecipe:
    """Executable circuit description.

    aux and det are None for deterministic gates (nothing injected,
    nothing detected); aux holds a PureState when the ancilla is a
    superposition rather than a Fock pattern.  Mode bookkeeping:
    signal_modes plus the ancilla modes partition range(network.mode_count).
    """

    network: NetworkDescription
    signal_modes: tuple
    aux: object
    det: object
    target: str


@dataclass
class GateReport:
    """Comparison of the realized operator block against the ideal.

    achieved is stored magnitude-normalized (Frobenius norm matched to
    the target) so the residual isolates shape errors; the raw scale is
    the square root of success_probability.  residual is the max-entry
    deviation after one global phase is removed in closed form.
    """

    achieved: np.ndarray
    target: np.ndarray
    residual: float
    success_probability: float
    extras: dict = field(default_factory=dict)


def _make_report(achieved, target, success, **extras) -> GateReport:
    a = np.asarray(achieved, dtype=complex)
    t = np.asarray(target, dtype=complex)
    na = float(np.linalg.norm(a))
    nt = float(np.linalg.norm(t))
    if na > 0:
        a = a * (nt / na)
        residual, phase = phase_aligned_residual(a, t)
    else:
        residual, phase = float(np.max(np.abs(t))), 1.0 + 0j
    extras.setdefault("global_phase", phase)
    return GateReport(a, t, residual, float(success), extras)


def _embed_network(network: NetworkDescription, mapping: dict, mode_count: int):
    """Re-address a small network's elements inside a larger circuit."""
    out = []
    for e in network.elements:
        if isinstance(e, BeamSplitterParams):
            out.append(
                BeamSplitterParams(
                    mapping[e.mode_a], mapping[e.mode_b], e.theta, e.phase_t, e.phase_r
                )
            )
        elif isinstance(e, PhaseShifterParams):
            out.append(PhaseShifterParams(mapping[e.mode], e.angle))
        else:
            raise TypeError(f"unknown network element {e!r}")
    for e in out:
        top = max(e.mode_a, e.mode_b) if isinstance(e, BeamSplitterParams) else e.mode
        if top >= mode_count:
            raise IndexError("mapping leaves the target circuit")
    return out


# ---------------------------------------------------------------------------
# SU(3) phase synthesis and the nonlinear sign shift

_SU3_CACHE: dict = {}
_NSS_CACHE: dict = {}


def _su3_solve(phi1: float, phi2: float, seed: int, restarts: int):
    """Search a 3-mode network for the two-photon-ancilla phase gate
    |n> -> e^{i phi_n}|n| on layers 0..2.  Cached per argument tuple so
    the two arms of a controlled-phase circuit share one solve."""
    key = (round(float(phi1), 12), round(float(phi2), 12), int(seed), int(restarts))
    hit = _SU3_CACHE.get(key)
    if hit is not None:
        return hit
    e = np.eye(3)
    objective = Objective(
        mode_count=3,
        signal_modes=(0,),
        ancilla=AncillaSpec((1, 1)),
        detection=DetectionSpec((1, 1)),
        signal_cutoff=2,
        constraints=(
            (e[0], e[0], False),
            (e[1], cmath.exp(1j * phi1) * e[1], False),
            (e[2], cmath.exp(1j * phi2) * e[2], False),
        ),
    )
    result = optimize_gate(objective, 3, seed=seed, restarts=restarts)
    lam = compose(result.network(3))
    _SU3_CACHE[key] = (result, lam)
    return result, lam


def phase_condition_residual(lam, phi1: float, phi2: float) -> float:
    """Deviation from the SU(3) solvability condition
    per L(1|1) [e^{i phi2} + L11^2 - 2 L11 e^{i phi1}] = 2 L12 L21 L13 L31."""
    m = np.asarray(lam.matrix if hasattr(lam, "matrix") else lam, dtype=complex)
    per11 = subpermanent(m, [0], [0])
    lhs = per11 * (cmath.exp(1j * phi2) + m[0, 0] ** 2 - 2.0 * m[0, 0] * cmath.exp(1j * phi1))
    rhs = 2.0 * m[0, 1] * m[1, 0] * m[0, 2] * m[2, 0]
    return float(abs(lhs - rhs))


def su3_phase_gate(phi1: float, phi2: float, seed: int = 0, restarts: int = 40):
    """Layer-phase gate diag(1, e^{i phi1}, e^{i phi2}) from one 3-mode
    network with single photons in both auxiliary modes and single-photon
    detection on both.

    The returned report's success probability is |per L(1|1)|^2, the
    squared vacuum-layer amplitude; because the three layer amplitudes
    are constrained to a common magnitude, it is the success on any
    normalized input of the qutrit layer.
    """
    result, lam = _su3_solve(phi1, phi2, seed, restarts)
    aux = AncillaSpec((1, 1))
    det = DetectionSpec((1, 1))
    cond = extract_conditional_operator(lam, (0,), aux, det, 2)
    mat = cond.operator.matrix
    per11 = subpermanent(lam.matrix, [0], [0])
    success = abs(per11) ** 2
    target = np.diag([1.0, cmath.exp(1j * phi1), cmath.exp(1j * phi2)])
    report = _make_report(
        mat,
        target,
        success,
        lambda11=complex(lam.matrix[0, 0]),
        phase_condition_residual=phase_condition_residual(lam, phi1, phi2),
        optimizer_residual=result.residual,
        restart_index=result.restart_index,
    )
    recipe = GateRecipe(
        result.network(3),
        (0,),
        aux,
        det,
        f"diag(1, exp(i*{phi1:g}), exp(i*{phi2:g})) on photon layers 0..2",
    )
    return recipe, report


def _nss_solve(seed: int, restarts: int):
    key = (int(seed), int(restarts))
    hit = _NSS_CACHE.get(key)
    if hit is not None:
        return hit
    e = np.eye(3)
    objective = Objective(
        mode_count=3,
        signal_modes=(0,),
        ancilla=AncillaSpec((1, 0)),
        detection=DetectionSpec((1, 0)),
        signal_cutoff=2,
        constraints=(
            (e[0], e[0], False),
            (e[1], e[1], False),
            (e[2], -e[2], False),
        ),
    )
    result = optimize_gate(objective, 3, seed=seed, restarts=restarts)
    lam = compose(result.network(3))
    _NSS_CACHE[key] = (result, lam)
    return result, lam


def nss_gate_klm(seed: int = 7, restarts: int = 24):
    """Nonlinear sign shift c0|0> + c1|1> + c2|2> -> c0|0> + c1|1> - c2|2>.

    One photon and one vacuum ancilla, three beam splitters, detection of
    the same |1,0> pattern.  The search lands on the known optimum: the
    signal-signal matrix element comes out at 1 - sqrt(2) and the success
    probability at 1/4.
    """
    result, lam = _nss_solve(seed, restarts)
    aux = AncillaSpec((1, 0))
    det = DetectionSpec((1, 0))
    cond = extract_conditional_operator(lam, (0,), aux, det, 2)
    mat = cond.operator.matrix
    success = result.probability
    target = np.diag([1.0, 1.0, -1.0])
    report = _make_report(
        mat,
        target,
        success,
        lambda11=complex(lam.matrix[0, 0]),
        optimizer_residual=result.residual,
        restart_index=result.restart_index,
    )
    recipe = GateRecipe(
        result.network(3),
        (0,),
        aux,
        det,
        "sign flip on the two-photon layer",
    )
    return recipe, report


@dataclass(frozen=True)
class RalphCzReport:
    """Outcome of the constrained controlled-z arm analysis."""

    lambda11_analytic: complex
    lambda11_optimized: complex
    quadratic_roots: tuple
    max_success: float
    constraint_residuals: tuple


def ralph_cz_check(seed: int = 7, restarts: int = 24) -> RalphCzReport:
    """Confirms the constrained arm of the dual-rail controlled-z.

    The two layer constraints per L(3|3) = L22 and
    2 L12 L21 L11 + L22 L11^2 = -L22 eliminate to the quadratic
    x^2 - 2x - 1 = 0 in x = L11, whose only sub-unit-modulus root is
    1 - sqrt(2); the optimizer (shared with the sign-shift search, which
    imposes the identical constraint family) must land there and reach
    |L22|^2 = 1/4.
    """
    roots = (1.0 + math.sqrt(2.0), 1.0 - math.sqrt(2.0))
    analytic = complex(roots[1])
    result, lam = _nss_solve(seed, restarts)
    m = lam.matrix
    # Y(n) coefficients of the aux |1,0>, detect |1,0> arm
    y0 = m[1, 1]
    y1 = subpermanent(m, [2], [2])
    y2 = m[0, 0] ** 2 * m[1, 1] + 2.0 * m[0, 0] * m[0, 1] * m[1, 0]
    residuals = (abs(y1 - y0), abs(y2 + y0))
    return RalphCzReport(
        lambda11_analytic=analytic,
        lambda11_optimized=complex(m[0, 0]),
        quadratic_roots=roots,
        max_success=float(abs(y0) ** 2),
        constraint_residuals=(float(residuals[0]), float(residuals[1])),
    )


# ---------------------------------------------------------------------------
# controlled-phase networks


def _qubit_slab_target(basis: FockBasis, phi: float) -> tuple:
    """(column indices, 6x4 target slab) for the two-rail phase gate on a
    2-mode total-photon-2 basis."""
    qubit = ((0, 0), (0, 1), (1, 0), (1, 1))
    cols = [basis.index_of(o) for o in qubit]
    target = np.zeros((basis.dimension, len(cols)), dtype=complex)
    for j, occ in enumerate(qubit):
        amp = cmath.exp(1j * phi) if occ == (1, 1) else 1.0
        target[basis.index_of(occ), j] = amp
    return cols, target


def cphase_gate(phi: float, variant: str = FOUR_PHOTON, seed: int = 11, restarts: int = 24):
    """Controlled-phase 1 - (1 - e^{i phi}) n1 n2 on the two-qubit subspace.

    Both variants are Mach-Zehnder sandwiches: a balanced splitter, one
    conditional layer-phase element per arm, and the inverse splitter.
    "four-photon" realizes the arm operator diag(1, 1, e^{i phi}) through
    the searched SU(3) element with two single-photon ancillas per arm
    (any phi).  "vacuum-detector" replaces it with two fixed beam
    splitters per arm - a single-photon catalysis stage and a
    vacuum-heralded stage - plus a pi phase plate; real transmissions
    make only phi = 0 and phi = pi reachable, which is the point of that
    construction (it is a controlled sign flip, not a general phase).

    The report's achieved matrix is the 6 x 4 slab of the extracted
    two-mode operator over the qubit columns; rows outside the qubit
    subspace are leakage and belong to the residual.
    """
    phi = float(phi)
    if variant == FOUR_PHOTON:
        return _cphase_four_photon(phi, seed, restarts)
    if variant == VACUUM_DETECTOR:
        return _cphase_vacuum_detector(phi)
    raise ValueError(f"unknown variant {variant!r}; use {FOUR_PHOTON!r} or {VACUUM_DETECTOR!r}")


def _cphase_four_photon(phi: float, seed: int, restarts: int):
    result, lam3 = _su3_solve(0.0, phi, seed, restarts)
    arm_net = result.network(3)
    elements = [BeamSplitterParams(0, 1, math.pi / 4.0, 0.0, 0.0)]
    elements += _embed_network(arm_net, {0: 0, 1: 2, 2: 3}, 6)
    elements += _embed_network(arm_net, {0: 1, 1: 4, 2: 5}, 6)
    elements.append(BeamSplitterParams(0, 1, math.pi / 4.0, 0.0, math.pi))
    network = NetworkDescription(6, tuple(elements))
    aux = AncillaSpec((1, 1, 1, 1))
    det = DetectionSpec((1, 1, 1, 1))
    cond = extract_conditional_operator(compose(network), (0, 1), aux, det, 2)
    basis = cond.operator.basis
    cols, target = _qubit_slab_target(basis, phi)
    slab = cond.operator.matrix[:, cols]

    # second route: lift the splitter pair exactly and tensor the two
    # independently extracted arm operators between them
    arm = extract_conditional_operator(
        lam3, (0,), AncillaSpec((1, 1)), DetectionSpec((1, 1)), 2
    ).operator.matrix
    mid = np.zeros((basis.dimension, basis.dimension), dtype=complex)
    occs = basis.occupations
    for i, (m1, m2) in enumerate(occs):
        for j, (n1, n2) in enumerate(occs):
            mid[i, j] = arm[m1, n1] * arm[m2, n2]
    two = FockBasis(2, TotalPhotonCutoff(2))
    split = lift_unitary(
        bs_matrix(BeamSplitterParams(0, 1, math.pi / 4.0, 0.0, 0.0), 2), two
    ).matrix
    recomb = lift_unitary(
        bs_matrix(BeamSplitterParams(0, 1, math.pi / 4.0, 0.0, math.pi), 2), two
    ).matrix
    route2 = recomb @ mid @ split
    route_deviation = float(np.max(np.abs(cond.operator.matrix - route2)))

    arm_probability = result.probability
    success = arm_probability**2
    report = _make_report(
        slab,
        target,
        success,
        arm_probability=arm_probability,
        route_deviation=route_deviation,
        optimizer_residual=result.residual,
        basis=basis,
    )
    recipe = GateRecipe(
        network,
        (0, 1),
        aux,
        det,
        f"two-qubit phase exp(i*{phi:g}) on the |1,1> component",
    )
    return recipe, report


def vacuum_detector_transmissions() -> tuple:
    """(|T| of the catalysis stage, |T| of the vacuum stage) for the
    sign-flip arm: the physical root of 7 t^4 - 6 t^2 + 1 = 0 and the
    matching vacuum transmission t0 = t1/(1 - 2 t1^2)."""
    t1_sq = (3.0 - math.sqrt(2.0)) / 7.0
    t1 = math.sqrt(t1_sq)
    t0 = t1 / (1.0 - 2.0 * t1_sq)
    return t1, t0


def _cphase_vacuum_detector(phi: float):
    reduced = math.remainder(phi, 2.0 * math.pi)
    if abs(reduced) < 1e-12:
        t1, t0 = 1.0, 1.0
        plates = False
    elif abs(abs(reduced) - math.pi) < 1e-12:
        t1, t0 = vacuum_detector_transmissions()
        plates = True
    else:
        raise ValueError(
            "the vacuum-detector variant reaches only phi = 0 and phi = pi: "
            "its arm amplitudes t1^{n-1}(t1^2 - n r1^2) t0^n are real, so "
            f"layer phases other than a sign are unreachable (got phi = {phi:g}); "
            "use the four-photon variant for general phases"
        )
    th1 = math.acos(min(1.0, t1))
    th0 = math.acos(min(1.0, t0))
    elements = [
        BeamSplitterParams(0, 1, math.pi / 4.0, 0.0, 0.0),
        BeamSplitterParams(0, 2, th1, 0.0, 0.0),
        BeamSplitterParams(0, 3, th0, 0.0, 0.0),
        BeamSplitterParams(1, 4, th1, 0.0, 0.0),
        BeamSplitterParams(1, 5, th0, 0.0, 0.0),
    ]
    if plates:
        elements.append(PhaseShifterParams(0, math.pi))
        elements.append(PhaseShifterParams(1, math.pi))
    elements.append(BeamSplitterParams(0, 1, math.pi / 4.0, 0.0, math.pi))
    network = NetworkDescription(6, tuple(elements))
    aux = AncillaSpec((1, 0, 1, 0))
    det = DetectionSpec((1, 0, 1, 0))
    cond = extract_conditional_operator(compose(network), (0, 1), aux, det, 2)
    basis = cond.operator.basis
    cols, target = _qubit_slab_target(basis, math.pi if plates else 0.0)
    slab = cond.operator.matrix[:, cols]
    per_arm = t1 * t1
    success = per_arm**2
    report = _make_report(
        slab,
        target,
        success,
        t1=t1,
        t0=t0,
        per_arm_success=per_arm,
        quartic_residual=abs(7.0 * t1**4 - 6.0 * t1**2 + 1.0) if plates else 0.0,
        basis=basis,
    )
    recipe = GateRecipe(
        network,
        (0, 1),
        aux,
        det,
        "two-qubit sign flip with one photon and one vacuum detector per arm",
    )
    return recipe, report


# ---------------------------------------------------------------------------
# deterministic elements


def swap_gate():
    """Mode swap from two balanced beam splitters around a pi plate.

    The composed mode matrix is the exact permutation [[0,1],[1,0]], so
    the lift is a permutation of occupation vectors on the whole
    two-mode space and the gate needs no ancillas: success is 1.
    """
    network = NetworkDescription(
        2,
        (
            BeamSplitterParams(0, 1, math.pi / 4.0, 0.0, 0.0),
            PhaseShifterParams(1, math.pi),
            BeamSplitterParams(0, 1, math.pi / 4.0, 0.0, math.pi),
        ),
    )
    u = compose(network)
    basis = FockBasis(2, TotalPhotonCutoff(2))
    lift = lift_unitary(u, basis)
    target = np.zeros((basis.dimension, basis.dimension), dtype=complex)
    for j, (a, b) in enumerate(basis.occupations):
        target[basis.index_of((b, a)), j] = 1.0
    mode_dev = float(np.max(np.abs(u.matrix - np.array([[0.0, 1.0], [1.0, 0.0]]))))
    report = _make_report(
        lift.matrix, target, 1.0, mode_matrix_deviation=mode_dev, basis=basis
    )
    recipe = GateRecipe(network, (0, 1), None, None, "|a,b> -> |b,a|")
    return recipe, report


def kill_operator(cutoff: int) -> FockOperator:
    """Diagonal 1 - n(n-1)/2: identity on layers 0 and 1, zero on layer 2.

    Not a conditional-network output (its layer-3 weight is -2, beyond
    any contraction); it is the idealized cleanup element that discards
    the two-photon component a preceding stage parked there.
    """
    if cutoff < 2:
        raise ValueError("cutoff must be at least 2 to show the kill at layer 2")
    basis = FockBasis(1, TotalPhotonCutoff(cutoff))
    return number_polynomial((1.0, 0.5, -0.5), 0, basis)


# ---------------------------------------------------------------------------
# state engineering by photon additions and displacements


@dataclass(frozen=True)
class EngineeringReport:
    roots: tuple
    condition_number: float
    condition_warning: bool
    single_photon_additions: int
    coherent_sources: int
    element_count: int
    working_cutoff: int
    tail_mass: float


def _addition_pipeline(alphas, top: int, work: int) -> np.ndarray:
    """Amplitudes of D(a_N) prod_j [a^dag shifted by a_j] |0> simulated on
    levels <= work.  alphas are the conjugated polynomial roots; the
    telescoped displacement after factor j is D(a_j - a_{j+1}) with
    a_{N+1} = 0, and the initial preparation is the coherent state |-a_1>.
    """
    amps = coherent_state(-alphas[0], work).amplitudes.copy()
    n = len(alphas)
    sqrt_n = np.sqrt(np.arange(1, work + 1))
    for j in range(n):
        shifted = np.zeros_like(amps)
        shifted[1:] = sqrt_n * amps[:-1]
        amps = shifted
        delta = alphas[j] - (alphas[j + 1] if j + 1 < n else 0.0)
        if abs(delta) > 1e-14:
            d = displacement_operator_for(delta, work, 4).matrix
            amps = d[: work + 1, : work + 1] @ amps
    return amps


def engineer_state(coeffs):
    """Build sum_k d_k (a^dag)^k |0> by single-photon additions and
    coherent displacements.

    The polynomial is factored over its roots (companion-matrix
    eigenvalues), each linear factor a^dag - r becomes a displaced
    photon addition, and the interleaved displacements telescope so the
    element count stays linear in the degree.  The simulation runs at a
    guarded cutoff and is accepted only when a re-run 8 levels higher
    reproduces the kept block to 1e-10; the returned state is cropped to
    the exact degree-n support and normalized (global phase fixed by
    making the top-level amplitude real positive).
    """
    d = np.asarray(coeffs, dtype=complex).ravel()
    if d.size < 1:
        raise ValueError("need at least one coefficient")
    if d.size > 7:
        raise ValueError("degree above 6 is out of scope")
    if abs(d[-1]) <= 1e-12:
        raise ValueError("leading coefficient is (numerically) zero")
    degree = d.size - 1

    if degree == 0:
        basis = FockBasis(1, PerModeCutoff(0))
        state = PureState(basis, np.array([1.0 + 0j]))
        report = EngineeringReport((), 1.0, False, 0, 0, 0, 0, 0.0)
        return state, report

    monic = d / d[-1]
    comp = np.polynomial.polynomial.polycompanion(monic)
    evals, evecs = np.linalg.eig(comp)
    cond = float(np.linalg.cond(evecs))
    warn = cond > 1e8
    if warn:
        warnings.warn(
            f"root finding is ill-conditioned (condition number {cond:.3e}); "
            "the engineered state may be inaccurate",
            stacklevel=2,
        )
    order = np.lexsort((evals.imag, evals.real))
    roots = evals[order]
    alphas = [complex(r).conjugate() for r in roots]

    # intermediate displaced states hold coherent cores around |alpha|^2,
    # so the working band must scale with the largest root, not the degree
    m = max(abs(a) for a in alphas)
    work = degree + 16 + int(math.ceil(m * (m + 6.0)))
    prev = None
    final = None
    for _ in range(5):
        try:
            amps = _addition_pipeline(alphas, degree, work)
        except CutoffTooSmallError:
            work += 8
            continue
        low = amps[: degree + 1]
        nrm = float(np.linalg.norm(low))
        if nrm < 1e-280:
            raise ArithmeticError("engineered state collapsed to numerical zero")
        low = low / nrm
        if prev is not None:
            ip = complex(np.vdot(prev, low))
            ph = ip / abs(ip) if abs(ip) > 0 else 1.0
            if float(np.max(np.abs(low - ph * prev))) < 1e-10:
                final = (amps, low, work)
                break
        prev = low
        work += 8
    if final is None:
        raise CutoffTooSmallError(
            f"addition pipeline did not converge by working cutoff {work}"
        )
    amps, low, used = final
    tail = float(np.linalg.norm(amps[degree + 1 :]) / np.linalg.norm(amps))
    # genuine support above the degree (wrong roots) shows up at O(1);
    # truncation noise from the displacement products sits below 1e-7
    if tail > 1e-6:
        raise CutoffTooSmallError(
            f"unexpected support above the polynomial degree (tail {tail:.3e})"
        )
    top_phase = low[degree] / abs(low[degree]) if abs(low[degree]) > 0 else 1.0
    low = low / top_phase
    basis = FockBasis(1, PerModeCutoff(degree))
    state = PureState(basis, low)

    deltas = [alphas[j] - (alphas[j + 1] if j + 1 < degree else 0.0) for j in range(degree)]
    shifts = sum(1 for x in deltas if abs(x) > 1e-14)
    prep = 1 if abs(alphas[0]) > 1e-14 else 0
    report = EngineeringReport(
        roots=tuple(complex(r) for r in roots),
        condition_number=cond,
        condition_warning=warn,
        single_photon_additions=degree,
        coherent_sources=shifts + prep,
        element_count=degree + shifts,
        working_cutoff=used,
        tail_mass=tail,
    )
    return state, report


def creation_polynomial_operator(
    coeffs,
    signal_cutoff: int,
    theta: float = math.pi / 4.0,
    phase_t: float = 0.0,
    phase_r: float = 0.0,
):
    """Conditional operator sum_k (d_k/N) R^k (a^dag)^k T^{n}, N^2 = sum |d_k|^2 k!.

    The engineered state for the coefficients enters one port of a beam
    splitter with transmission T = cos(theta) e^{i phase_t} and
    reflection R = sin(theta) e^{i phase_r}; heralding vacuum on that
    port leaves the polynomial acting on the signal, rescaled order by
    order.  Returns (ConditionalOperator, rescale dict); the caller
    divides d_k by R^k and pre-compensates T^{n} to hit a bare target
    polynomial.
    """
    d = np.asarray(coeffs, dtype=complex).ravel()
    state, eng = engineer_state(d)
    # the pipeline fixes the global phase by its own convention; restore
    # the phase the coefficient list implies for the leading term
    lead = d[-1] / abs(d[-1])
    anc = PureState(state.basis, state.amplitudes * lead)
    params = BeamSplitterParams(0, 1, theta, phase_t, phase_r)
    cond = extract_with_ancilla_state(
        bs_matrix(params, 2), (0,), anc, DetectionSpec((0,)), signal_cutoff
    )
    norm = math.sqrt(
        sum(abs(d[k]) ** 2 * math.factorial(k) for k in range(d.size))
    )
    rescale = {
        "transmission": params.transmission,
        "reflection": params.reflection,
        "normalization": norm,
        "engineering": eng,
    }
    return cond, rescale


def apply_creation_polynomial(coeffs, signal: PureState, theta: float = math.pi / 4.0):
    """Act with the rescaled creation polynomial on a one-mode state.

    The output lives on a basis widened by the polynomial degree and is
    sub-normalized by the heralding amplitude; the rescale dict in the
    returned pair records the order-by-order factors.
    """
    if signal.basis.mode_count != 1:
        raise ValueError("signal must be a one-mode state")
    d = np.asarray(coeffs, dtype=complex).ravel()
    degree = d.size - 1
    if isinstance(signal.basis.policy, TotalPhotonCutoff):
        top_in = signal.basis.policy.max_total
    else:
        top_in = signal.basis.policy.max_per_mode
    cutoff = top_in + degree
    cond, rescale = creation_polynomial_operator(d, cutoff, theta)
    basis = cond.operator.basis
    padded = np.zeros(basis.dimension, dtype=complex)
    padded[: signal.amplitudes.size] = signal.amplitudes
    out = cond.operator.matrix @ padded
    p = float(np.vdot(out, out).real)
    if p < 1e-12:
        raise ArithmeticError(
            f"vacuum-heralding probability {p:.3e} is below 1e-12; "
            "rescale the coefficients or open the beam splitter"
        )
    return PureState(basis, out, unchecked=True), rescale


# ---------------------------------------------------------------------------
# two-mode squeezing, filtering, and the Pauli pipeline


@dataclass(frozen=True)
class BellLadderState:
    """(|0,0> + lam|1,1>)/sqrt(1+|lam|^2) with the state vector attached."""

    lam: complex
    state: PureState

    def __post_init__(self):
        if abs(self.state.norm() - 1.0) > 1e-10:
            raise ValueError("ladder state must be normalized")

    @staticmethod
    def ideal(lam: complex, cutoff: int = 1) -> "BellLadderState":
        basis = FockBasis(2, PerModeCutoff(cutoff))
        amps = np.zeros(basis.dimension, dtype=complex)
        amps[basis.index_of((0, 0))] = 1.0
        amps[basis.index_of((1, 1))] = lam
        amps = amps / np.linalg.norm(amps)
        return BellLadderState(complex(lam), PureState(basis, amps))


def tmsv_state(q: float, cutoff: int) -> PureState:
    """Two-mode squeezed vacuum sqrt(1-q^2) sum q^n |n,n>, truncated."""
    q = float(q)
    if not 0.0 <= q < 1.0:
        raise ValueError("q must lie in [0, 1)")
    if q > 0 and q ** (cutoff + 1) >= 1e-12:
        raise ValueError(
            f"q^(cutoff+1) = {q ** (cutoff + 1):.3e} violates the 1e-12 tail bound; "
            "raise the cutoff"
        )
    basis = FockBasis(2, PerModeCutoff(cutoff))
    amps = np.zeros(basis.dimension, dtype=complex)
    scale = math.sqrt(1.0 - q * q)
    for n in range(cutoff + 1):
        amps[basis.index_of((n, n))] = scale * q**n
    return PureState(basis, amps)


@dataclass(frozen=True)
class ProcrusteanReport:
    ladder: BellLadderState
    filtered: PureState
    achieved_lambda: complex
    theta: float
    phase_t: float
    success_probability: float
    trace_norm_distance: float


def procrustean_filter(tmsv: PureState, lambda_target: complex, q: float) -> ProcrusteanReport:
    """Distill the two-layer ladder from squeezed vacuum by catalysis.

    One arm of the pair meets a single ancilla photon at a beam splitter
    and the same detector pattern is heralded back; the diagonal layer
    amplitudes Y(n) = L11^{n-1}(L11 L22 + n L12 L21) then reweight the
    q^n ladder.  The splitter angle is solved so the 0- and 1-layer
    ratio equals lambda exactly: with c = cos(theta),
    lambda = q (2c^2 - 1) e^{i phase_t} / c, which always has a root -
    above 1/sqrt(2) when |lambda| <= q, below otherwise with the
    transmission phase advanced by pi.  Layers n >= 2 survive at O(q^2)
    relative weight, which is the reported trace-norm distance.
    """
    lam_t = complex(lambda_target)
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    mag = abs(lam_t)
    root = math.sqrt(mag * mag + 8.0 * q * q)
    c_pos = (mag + root) / (4.0 * q)
    if c_pos <= 1.0 + 1e-12:
        c = min(c_pos, 1.0)
        phase_t = cmath.phase(lam_t) if mag > 0 else 0.0
    else:
        c = (-mag + root) / (4.0 * q)
        phase_t = cmath.phase(lam_t) + math.pi
    theta = math.acos(c)
    params = BeamSplitterParams(0, 1, theta, phase_t, 0.0)

    cutoff = tmsv.basis.policy.max_per_mode
    cond = extract_conditional_operator(
        bs_matrix(params, 2), (0,), AncillaSpec((1,)), DetectionSpec((1,)), cutoff
    )
    y = np.diag(cond.operator.matrix).copy()
    amps = tmsv.amplitudes.copy()
    for i, (n, m) in enumerate(tmsv.basis.occupations):
        amps[i] *= y[n]
    success = float(np.vdot(amps, amps).real)
    filtered = PureState(tmsv.basis, amps / math.sqrt(success))

    a0 = filtered.amplitudes[tmsv.basis.index_of((0, 0))]
    a1 = filtered.amplitudes[tmsv.basis.index_of((1, 1))]
    achieved = a1 / a0 if abs(a0) > 0 else complex("nan")
    ladder = BellLadderState.ideal(lam_t, cutoff)
    overlap = abs(complex(np.vdot(ladder.state.amplitudes, filtered.amplitudes)))
    distance = 2.0 * math.sqrt(max(0.0, 1.0 - overlap * overlap))
    return ProcrusteanReport(
        ladder=ladder,
        filtered=filtered,
        achieved_lambda=complex(achieved),
        theta=theta,
        phase_t=phase_t,
        success_probability=success,
        trace_norm_distance=distance,
    )


def _crop_pair_state(state: PureState, top: int) -> PureState:
    basis = FockBasis(2, PerModeCutoff(top))
    amps = np.zeros(basis.dimension, dtype=complex)
    for i, occ in enumerate(state.basis.occupations):
        if occ in basis:
            amps[basis.index_of(occ)] = state.amplitudes[i]
    return PureState(basis, amps / np.linalg.norm(amps))


_PAULI_CACHE: dict = {}


def pauli_xy_gate(which: str, q: float = 0.01, seed: int = 3, restarts: int = 6):
    """Pauli X or Y on the 0/1 photon-number qubit of a single mode.

    The ancilla is the filtered lambda = 1 ladder held in two auxiliary
    modes; detecting |1,0> behind a searched 3-mode network routes the
    qubit through the off-diagonal amplitudes L21 and lam per L(3|1),
    whose magnitudes the search equalizes with the sigma-x or sigma-y
    phase relation.  The kill element then erases the two-photon layer
    the ladder's top rung parks on the signal.  Residuals are limited by
    the q-dependent filter quality, not the search.
    """
    if which not in ("x", "y"):
        raise ValueError("which must be 'x' or 'y'")
    q = float(q)
    if not 0.0 < q <= 0.1:
        raise ValueError("q must lie in (0, 0.1]")
    cutoff = 3
    while q ** (cutoff + 1) >= 1e-12:
        cutoff += 1
    filt = procrustean_filter(tmsv_state(q, cutoff), 1.0, q)

    anc_search = _crop_pair_state(filt.filtered, 2)
    e = np.eye(5)
    mask = np.array([1.0, 1.0, 0.0, 1.0, 1.0])
    if which == "x":
        cons = ((e[0], e[1], False), (e[1], e[0], False, mask))
        target = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    else:
        cons = ((e[0], 1j * e[1], False), (e[1], -1j * e[0], False, mask))
        target = np.array([[0.0, -1.0j], [1.0j, 0.0]])
    key = (which, round(q, 12), int(seed), int(restarts))
    hit = _PAULI_CACHE.get(key)
    if hit is None:
        objective = Objective(
            mode_count=3,
            signal_modes=(0,),
            ancilla=anc_search,
            detection=DetectionSpec((1, 0)),
            signal_cutoff=4,
            constraints=cons,
        )
        result = optimize_gate(objective, 3, seed=seed, restarts=restarts)
        hit = _PAULI_CACHE[key] = (result, compose(result.network(3)))
    result, lam = hit

    anc_full = _crop_pair_state(filt.filtered, min(3, cutoff))
    cond = extract_with_ancilla_state(lam, (0,), anc_full, DetectionSpec((1, 0)), 6)
    kill = kill_operator(6)
    ky = kill.matrix @ cond.operator.matrix
    slab = ky[:, :2]
    full_target = np.zeros((slab.shape[0], 2), dtype=complex)
    full_target[:2, :] = target
    success = float(np.linalg.norm(slab) ** 2 / np.linalg.norm(full_target) ** 2)

    m = lam.matrix
    per31 = m[0, 1] * m[1, 2] + m[0, 2] * m[1, 1]
    report = _make_report(
        slab,
        full_target,
        success,
        lambda21=complex(m[1, 0]),
        ladder_weighted_per31=complex(per31),
        magnitude_relation_residual=abs(abs(m[1, 0]) - abs(per31)),
        filter_distance=filt.trace_norm_distance,
        optimizer_residual=result.residual,
        restart_index=result.restart_index,
    )
    recipe = GateRecipe(
        result.network(3),
        (0,),
        anc_full,
        DetectionSpec((1, 0)),
        f"sigma_{which} on the 0/1 photon-number qubit",
    )
    return recipe, report


# ---------------------------------------------------------------------------
# Hadamard from controlled-z plus one creation polynomial


def hadamard_gate(seed: int = 0):
    """Hadamard on a photon-number qubit, output on the former ancilla.

    Stages: engineer (|0> + |1>)/sqrt(2); ideal controlled-z between
    signal and ancilla; the heralded operator 1 + T a^dag (a first-order
    creation polynomial) on the signal; projection of the signal onto
    |1>.  Since <1|(1 + T a^dag) T^{n}|0> = <1|(1 + T a^dag) T^{n}|1> = T,
    the projection transfers the Hadamard image onto the ancilla with
    amplitude T/N for every input, so the comparison against H is exact
    up to the engineering tolerance.  The controlled-z here is the bare
    diagonal 1 - 2 n1 n2, valid on the reachable at-most-one-photon-per-
    mode inputs; realizing it conditionally is the cphase recipes' job.
    """
    stage = "ancilla engineering"
    try:
        inv = 1.0 / math.sqrt(2.0)
        anc, eng = engineer_state((inv, inv))

        stage = "creation polynomial"
        cond, rescale = creation_polynomial_operator((1.0, 1.0), 2)
        e_mat = cond.operator.matrix

        stage = "controlled-z sandwich"
        joint = FockBasis(2, TotalPhotonCutoff(3))
        cz_diag = np.array(
            [1.0 - 2.0 * n1 * n2 for (n1, n2) in joint.occupations], dtype=complex
        )
        achieved = np.zeros((2, 2), dtype=complex)
        stage_norms = {}
        for col, qubit in enumerate((np.array([1.0, 0.0]), np.array([0.0, 1.0]))):
            amps = np.zeros(joint.dimension, dtype=complex)
            for n1 in range(2):
                for n2 in range(2):
                    amps[joint.index_of((n1, n2))] = qubit[n1] * anc.amplitudes[n2]
            amps = cz_diag * amps
            out = np.zeros(joint.dimension, dtype=complex)
            for j, (n1, n2) in enumerate(joint.occupations):
                if amps[j] == 0:
                    continue
                for m1 in range(3):
                    if e_mat[m1, n1] != 0 and (m1, n2) in joint:
                        out[joint.index_of((m1, n2))] += e_mat[m1, n1] * amps[j]
            projected = np.array(
                [out[joint.index_of((1, 0))], out[joint.index_of((1, 1))]]
            )
            achieved[:, col] = projected
            stage_norms[f"projection_probability_col{col}"] = float(
                np.vdot(projected, projected).real
            )
    except Exception as exc:
        raise RuntimeError(f"hadamard {stage} stage failed: {exc}") from exc

    target = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
    success = float(np.linalg.norm(achieved) ** 2 / np.linalg.norm(target) ** 2)
    report = _make_report(
        achieved,
        target,
        success,
        cz_success=1.0,
        rescale=rescale,
        engineering=eng,
        **stage_norms,
    )
    bs = BeamSplitterParams(0, 1, math.pi / 4.0, 0.0, 0.0)
    recipe = GateRecipe(
        NetworkDescription(2, (bs,)),
        (0,),
        anc,
        DetectionSpec((0,)),
        "Hadamard on the 0/1 photon-number qubit, output on the ancilla mode",
    )
    return recipe, report


# ---------------------------------------------------------------------------
# the CNOT obstruction


_CNOT_BASIS = ((0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2))


def cnot_basis_matrix(transmission: complex, reflection: complex) -> np.ndarray:
    """Beam splitter on the six-dimensional two-qubit-plus-leakage basis
    ((0,0),(1,0),(0,1),(1,1),(2,0),(0,2)), written out explicitly."""
    t, r = complex(transmission), complex(reflection)
    tc, rc = t.conjugate(), r.conjugate()
    s2 = math.sqrt(2.0)
    out = np.zeros((6, 6), dtype=complex)
    out[0, 0] = 1.0
    out[1, 1], out[1, 2] = t, r
    out[2, 1], out[2, 2] = -rc, tc
    out[3, 3] = abs(t) ** 2 - abs(r) ** 2
    out[3, 4], out[3, 5] = -s2 * rc * t, s2 * r * tc
    out[4, 3], out[4, 4], out[4, 5] = s2 * r * t, t * t, r * r
    out[5, 3], out[5, 4], out[5, 5] = -s2 * rc * tc, rc * rc, tc * tc
    return out


def cnot_basis_lift(transmission: complex, reflection: complex) -> np.ndarray:
    """Same matrix through the permanent lift, as a cross-check."""
    u = np.array(
        [
            [transmission, reflection],
            [-np.conj(reflection), np.conj(transmission)],
        ],
        dtype=complex,
    )
    out = np.zeros((6, 6), dtype=complex)
    for j, occ_in in enumerate(_CNOT_BASIS):
        for i, occ_out in enumerate(_CNOT_BASIS):
            out[i, j] = fock_lift_amplitude(u, occ_in, occ_out)
    return out


@dataclass(frozen=True)
class CnotSearchReport:
    min_residual: float
    best_angles: tuple
    best_n1: tuple
    best_n2: tuple
    control_residual: float
    lift_deviation: float
    contradiction_found: bool
    evaluations: int


def _product_slab_residual(phi, phi_prime, target, rng, als_iters=40, inits=3, warm=None):
    """Best scale-invariant residual of U(phi') (N1 x N2) U(phi) on the
    qubit columns against the target slab, N1 and N2 free diagonal
    single-mode operators, optimized by alternating least squares."""
    left = cnot_basis_matrix(math.cos(phi_prime), math.sin(phi_prime))
    right = cnot_basis_matrix(math.cos(phi), math.sin(phi))
    # rank-one slabs: the middle operator weights basis element k by
    # n1[a_k] * n2[b_k], so the slab is sum_k n1[a] n2[b] outer(L[:,k], R[k,:4])
    slabs = [np.outer(left[:, k], right[k, :4]) for k in range(6)]
    tnorm2 = float(np.linalg.norm(target) ** 2)

    def cosine(n1, n2):
        a = np.zeros((6, 4), dtype=complex)
        for k, (ak, bk) in enumerate(_CNOT_BASIS):
            a += n1[ak] * n2[bk] * slabs[k]
        na2 = float(np.linalg.norm(a) ** 2)
        if na2 < 1e-24:
            return 0.0, a
        ip = complex(np.sum(target.conj() * a))
        return abs(ip) ** 2 / na2, a

    def solve_factor(fixed_other, axis):
        # residual is linear in this factor; maximize |c.x|^2 / x*G x
        qs = []
        for level in range(3):
            qa = np.zeros((6, 4), dtype=complex)
            for k, (ak, bk) in enumerate(_CNOT_BASIS):
                idx = ak if axis == 0 else bk
                other = bk if axis == 0 else ak
                if idx == level:
                    qa += fixed_other[other] * slabs[k]
            qs.append(qa)
        c = np.array([complex(np.sum(target.conj() * qa)) for qa in qs])
        g = np.array(
            [[complex(np.sum(qa.conj() * qb)) for qb in qs] for qa in qs]
        )
        x = np.linalg.pinv(g, rcond=1e-12) @ c.conj()
        nx = np.linalg.norm(x)
        return x / nx if nx > 0 else np.array([1.0, 1.0, 1.0], dtype=complex)

    best = (0.0, None, None)
    starts = []
    if warm is not None:
        starts.append(warm)
    for _ in range(inits):
        starts.append(
            (
                rng.normal(size=3) + 1j * rng.normal(size=3),
                rng.normal(size=3) + 1j * rng.normal(size=3),
            )
        )
    for n1, n2 in starts:
        n1 = np.asarray(n1, dtype=complex)
        n2 = np.asarray(n2, dtype=complex)
        rho_prev = -1.0
        for _ in range(als_iters):
            n1 = solve_factor(n2, 0)
            n2 = solve_factor(n1, 1)
            rho, _ = cosine(n1, n2)
            if rho - rho_prev < 1e-14:
                break
            rho_prev = rho
        rho, _ = cosine(n1, n2)
        if rho > best[0]:
            best = (rho, n1, n2)
    rho, n1, n2 = best
    residual = math.sqrt(max(0.0, 1.0 - rho / tnorm2))
    return residual, n1, n2


def _slab_search(target, grid_size, restarts, seed, polish=True):
    rng = np.random.default_rng(seed)
    count = [0]

    def evaluate(angles, warm=None, inits=3):
        count[0] += 1
        return _product_slab_residual(angles[0], angles[1], target, rng, warm=warm, inits=inits)

    best = (math.inf, (0.0, 0.0), None, None)
    axis = np.linspace(0.0, math.pi, grid_size)
    for p in axis:
        for pp in axis:
            res, n1, n2 = evaluate((p, pp))
            if res < best[0]:
                best = (res, (p, pp), n1, n2)
    for _ in range(restarts):
        angles = rng.uniform(0.0, math.pi, 2)
        res, n1, n2 = evaluate(angles)
        if res < best[0]:
            best = (res, tuple(angles), n1, n2)
    if polish:
        from scipy.optimize import minimize

        warm = (best[2], best[3])

        def fun(x):
            res, _, _ = evaluate(x, warm=warm, inits=1)
            return res

        nm = minimize(
            fun, np.array(best[1]), method="Nelder-Mead",
            options={"maxfev": 80, "xatol": 1e-10, "fatol": 1e-14},
        )
        res, n1, n2 = evaluate(nm.x, warm=warm, inits=1)
        if res < best[0]:
            best = (res, tuple(float(v) for v in nm.x), n1, n2)
    return best, count[0]


def cnot_obstruction_search(grid_size: int = 13, restarts: int = 200, seed: int = 0) -> CnotSearchReport:
    """Numerical evidence that no beam-splitter sandwich of product
    diagonal operators is a CNOT.

    The search space is the sandwich U(phi') (N1 x N2) U(phi) on the
    six-dimensional basis ((0,0),(1,0),(0,1),(1,1),(2,0),(0,2)) with
    real splitter angles on [0, pi] and free complex diagonal N's (the
    splitters' internal phases decompose into product-diagonal factors
    the N's absorb).  For each angle pair the N's are solved by
    alternating least squares, which is exact per factor; the angle grid
    plus seeded restarts plus a simplex polish then bound the landscape.
    The residual is scale-invariant, so the controlled-z target - which
    the same sandwich family does reach - must come out at machine zero,
    and it does, while the CNOT floor stays above 1e-2.  A CNOT residual
    below 1e-6 would contradict the obstruction and is flagged.
    """
    dev = 0.0
    rng = np.random.default_rng([seed, 991])
    for _ in range(10):
        th = rng.uniform(0.0, math.pi / 2.0)
        pt, pr = rng.uniform(0.0, 2.0 * math.pi, 2)
        t = math.cos(th) * cmath.exp(1j * pt)
        r = math.sin(th) * cmath.exp(1j * pr)
        dev = max(
            dev,
            float(np.max(np.abs(cnot_basis_matrix(t, r) - cnot_basis_lift(t, r)))),
        )

    cnot = np.zeros((6, 4), dtype=complex)
    for j, i in enumerate((0, 1, 3, 2)):
        cnot[i, j] = 1.0
    (res, angles, n1, n2), evals = _slab_search(cnot, grid_size, restarts, seed)

    cz = np.zeros((6, 4), dtype=complex)
    for j, s in enumerate((1.0, 1.0, 1.0, -1.0)):
        cz[j, j] = s
    (res_cz, _, _, _), evals_cz = _slab_search(cz, grid_size, 20, seed + 1)

    return CnotSearchReport(
        min_residual=float(res),
        best_angles=tuple(float(a) for a in angles),
        best_n1=tuple(complex(v) for v in n1),
        best_n2=tuple(complex(v) for v in n2),
        control_residual=float(res_cz),
        lift_deviation=float(dev),
        contradiction_found=bool(res < 1e-6),
        evaluations=evals + evals_cz,
    )
