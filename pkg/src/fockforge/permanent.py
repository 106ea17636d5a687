"""Matrix permanents and the bounds they obey on unitary blocks.

Every conditional amplitude in this package reduces to a permanent of a
submatrix of the mode transformation, with rows and columns repeated
according to the output and input occupations.  Two independent code
paths are kept on purpose: a Gray-code Ryser evaluator used everywhere,
and a brute-force expansion over permutations that serves as the oracle
in the test suite.  Do not merge them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

MAX_DIMENSION = 30
MAX_NAIVE_DIMENSION = 9
_COMPENSATED_FROM = 20


class PermanentSizeError(ValueError):
    """Matrix dimension outside the supported range."""


def _as_square(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise PermanentSizeError(f"expected a square matrix, got shape {a.shape}")
    return a


def _per_flat(a: list[complex], n: int) -> complex:
    """Permanent of an n x n matrix stored row-major in a flat list.

    Hardcoded expansions up to n = 4 keep the conditioning hot loop off
    the generic subset iteration; n >= 5 falls through to Gray-code
    Ryser with optional compensated accumulation.
    """
    if n == 0:
        return 1.0 + 0.0j
    if n == 1:
        return a[0]
    if n == 2:
        return a[0] * a[3] + a[1] * a[2]
    if n == 3:
        return (
            a[0] * (a[4] * a[8] + a[5] * a[7])
            + a[1] * (a[3] * a[8] + a[5] * a[6])
            + a[2] * (a[3] * a[7] + a[4] * a[6])
        )
    if n == 4:
        p0 = a[5] * (a[10] * a[15] + a[11] * a[14]) + a[6] * (a[9] * a[15] + a[11] * a[13]) + a[7] * (a[9] * a[14] + a[10] * a[13])
        p1 = a[4] * (a[10] * a[15] + a[11] * a[14]) + a[6] * (a[8] * a[15] + a[11] * a[12]) + a[7] * (a[8] * a[14] + a[10] * a[12])
        p2 = a[4] * (a[9] * a[15] + a[11] * a[13]) + a[5] * (a[8] * a[15] + a[11] * a[12]) + a[7] * (a[8] * a[13] + a[9] * a[12])
        p3 = a[4] * (a[9] * a[14] + a[10] * a[13]) + a[5] * (a[8] * a[14] + a[10] * a[12]) + a[6] * (a[8] * a[13] + a[9] * a[12])
        return a[0] * p0 + a[1] * p1 + a[2] * p2 + a[3] * p3
    return _ryser_gray(a, n)


def _ryser_gray(a: list[complex], n: int) -> complex:
    # per(A) = (-1)^n sum_{S != 0} (-1)^|S| prod_i sum_{j in S} a_ij
    row_sums = [0.0 + 0.0j] * n
    compensate = n >= _COMPENSATED_FROM
    total = 0.0 + 0.0j
    c_re = 0.0
    c_im = 0.0
    size = 0
    for k in range(1, 1 << n):
        bit = k & -k
        j = bit.bit_length() - 1
        if (k ^ (k >> 1)) & bit:
            size += 1
            for i in range(n):
                row_sums[i] += a[i * n + j]
        else:
            size -= 1
            for i in range(n):
                row_sums[i] -= a[i * n + j]
        prod = 1.0 + 0.0j
        for i in range(n):
            prod *= row_sums[i]
        term = -prod if (size & 1) else prod
        if compensate:
            t = total + term
            if abs(total.real) >= abs(term.real):
                c_re += (total.real - t.real) + term.real
            else:
                c_re += (term.real - t.real) + total.real
            if abs(total.imag) >= abs(term.imag):
                c_im += (total.imag - t.imag) + term.imag
            else:
                c_im += (term.imag - t.imag) + total.imag
            total = t
        else:
            total += term
    if compensate:
        total += complex(c_re, c_im)
    return -total if (n & 1) else total


def permanent_ryser(m) -> complex:
    """Permanent by Ryser's formula with Gray-code subset iteration.

    Compensated (Neumaier) accumulation is switched on for dimension
    >= 20 where cancellation between the 2^n - 1 subset terms starts to
    matter.  Dimensions above 30 are rejected.
    """
    a = _as_square(m)
    n = a.shape[0]
    if n > MAX_DIMENSION:
        raise PermanentSizeError(f"dimension {n} exceeds the supported maximum {MAX_DIMENSION}")
    return _per_flat(list(a.ravel()), n)


def permanent_naive(m) -> complex:
    """Permanent by explicit expansion over all permutations.

    Oracle path, O(n * n!).  Refuses dimensions above 9.
    """
    a = _as_square(m)
    n = a.shape[0]
    if n > MAX_NAIVE_DIMENSION:
        raise PermanentSizeError(f"naive expansion limited to dimension {MAX_NAIVE_DIMENSION}, got {n}")
    if n == 0:
        return 1.0 + 0.0j
    total = 0.0 + 0.0j
    rows = range(n)
    for perm in itertools.permutations(range(n)):
        prod = 1.0 + 0.0j
        for i in rows:
            prod *= a[i, perm[i]]
        total += prod
    return total


def subpermanent(m, drop_rows, drop_cols) -> complex:
    """Permanent of the matrix with the given rows and columns deleted.

    ``per L(i|j)`` in the conditional-operator formulas is
    ``subpermanent(L, [i], [j])`` with zero-based indices.
    """
    a = _as_square(m)
    n = a.shape[0]
    drop_rows = sorted(set(int(i) for i in drop_rows))
    drop_cols = sorted(set(int(j) for j in drop_cols))
    for i in drop_rows:
        if not 0 <= i < n:
            raise IndexError(f"row {i} out of range for dimension {n}")
    for j in drop_cols:
        if not 0 <= j < n:
            raise IndexError(f"column {j} out of range for dimension {n}")
    if len(drop_rows) != len(drop_cols):
        raise ValueError("must delete as many rows as columns")
    keep_r = [i for i in range(n) if i not in drop_rows]
    keep_c = [j for j in range(n) if j not in drop_cols]
    sub = a[np.ix_(keep_r, keep_c)]
    return permanent_ryser(sub)


def repeated_index_permanent(m, row_mult, col_mult) -> complex:
    """Permanent of the matrix with row i repeated row_mult[i] times and
    column j repeated col_mult[j] times.

    This is the combinatorial core of the Fock lift: row multiplicities
    are output occupations, column multiplicities input occupations.
    Raises if the multiplicity totals disagree (photon-number mismatch)
    or the expanded matrix would exceed dimension 30.
    """
    a = _as_square(m)
    n = a.shape[0]
    row_mult = [int(x) for x in row_mult]
    col_mult = [int(x) for x in col_mult]
    if len(row_mult) != n or len(col_mult) != n:
        raise ValueError("multiplicity vectors must match the matrix dimension")
    if any(x < 0 for x in row_mult) or any(x < 0 for x in col_mult):
        raise ValueError("multiplicities must be non-negative")
    total = sum(row_mult)
    if total != sum(col_mult):
        raise ValueError(
            f"photon-number mismatch: row multiplicities sum to {total}, "
            f"column multiplicities to {sum(col_mult)}"
        )
    if total > MAX_DIMENSION:
        raise PermanentSizeError(f"expanded dimension {total} exceeds the supported maximum {MAX_DIMENSION}")
    if total == 0:
        return 1.0 + 0.0j
    rows = [i for i in range(n) for _ in range(row_mult[i])]
    cols = [j for j in range(n) for _ in range(col_mult[j])]
    flat = [complex(a[i, j]) for i in rows for j in cols]
    return _per_flat(flat, total)


def _haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    # QR of a complex Ginibre matrix with the phase convention fixed so
    # the distribution is Haar, not merely unitary.
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


@dataclass(frozen=True)
class PermanentBoundsReport:
    """Worst margins observed while sampling the appendix inequalities."""

    dimension: int
    samples: int
    max_abs_permanent: float
    max_abs_subpermanent: float
    max_marcus_newman_ratio: float
    max_su3_phase_ratio: float
    unitary_bound_violations: int
    marcus_newman_violations: int
    su3_bound_violations: int
    min_su3_subpermanent: float
    max_su3_subpermanent: float


def check_appendix_bounds(dimension: int, samples: int, seed: int) -> PermanentBoundsReport:
    """Sample Haar unitaries and random factor pairs against the known bounds.

    Checks, per sample:

    * |per U| <= 1 for Haar U of the requested dimension,
    * |per U(1|1)| <= 1 for the principal subpermanent,
    * |per AB|^2 <= per(AA*) per(B*B) for Gaussian A (m x n), B (n x m),
    * |2 L12 L21 L13 L31| <= 8 / (27 |L11|^2) on 3 x 3 Haar unitaries.

    Returns worst ratios and violation counts; the dense-coverage fields
    record the spread of |per U(1|1)| over the 3 x 3 samples.
    """
    if not 1 <= dimension <= 7:
        raise ValueError("bounds check supports dimensions 1..7")
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    tol = 1e-10
    max_per = 0.0
    max_sub = 0.0
    max_mn = 0.0
    max_su3 = 0.0
    viol_unitary = 0
    viol_mn = 0
    viol_su3 = 0
    min_cover = math.inf
    max_cover = 0.0
    for _ in range(samples):
        u = _haar_unitary(dimension, rng)
        p = abs(permanent_ryser(u))
        max_per = max(max_per, p)
        if p > 1.0 + tol:
            viol_unitary += 1
        if dimension >= 2:
            s = abs(subpermanent(u, [0], [0]))
            max_sub = max(max_sub, s)
            if s > 1.0 + tol:
                viol_unitary += 1

        m = int(rng.integers(1, dimension + 1))
        n = int(rng.integers(1, dimension + 1))
        a = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / math.sqrt(2.0)
        b = (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / math.sqrt(2.0)
        lhs = abs(permanent_ryser(a @ b)) ** 2
        # Gram matrices on the m-side for both factors; the n x n form
        # B B* fails the inequality whenever m < n
        rhs = permanent_ryser(a @ a.conj().T).real * permanent_ryser(b.conj().T @ b).real
        ratio = lhs / rhs if rhs > 0 else math.inf
        max_mn = max(max_mn, ratio)
        if lhs > rhs * (1.0 + 1e-9) + 1e-12:
            viol_mn += 1

        v = _haar_unitary(3, rng)
        lam11 = abs(v[0, 0])
        cover = abs(v[1, 1] * v[2, 2] + v[1, 2] * v[2, 1])
        min_cover = min(min_cover, cover)
        max_cover = max(max_cover, cover)
        if lam11 > 1e-6:
            lhs3 = abs(2.0 * v[0, 1] * v[1, 0] * v[0, 2] * v[2, 0])
            bound3 = 8.0 / (27.0 * lam11 ** 2)
            ratio3 = lhs3 / bound3
            max_su3 = max(max_su3, ratio3)
            if lhs3 > bound3 + 1e-10:
                viol_su3 += 1
    return PermanentBoundsReport(
        dimension=dimension,
        samples=samples,
        max_abs_permanent=max_per,
        max_abs_subpermanent=max_sub,
        max_marcus_newman_ratio=max_mn,
        max_su3_phase_ratio=max_su3,
        unitary_bound_violations=viol_unitary,
        marcus_newman_violations=viol_mn,
        su3_bound_violations=viol_su3,
        min_su3_subpermanent=min_cover,
        max_su3_subpermanent=max_cover,
    )
