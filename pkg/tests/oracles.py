"""Independent reference routes used to cross-check the package.

Nothing here touches the permanent code: the lift oracle expands
creation-operator polynomials monomial by monomial, which is slow but
follows the definition directly.
"""

import math

import numpy as np

from fockforge.fock import FockBasis


def lift_oracle(mode_matrix, basis: FockBasis) -> np.ndarray:
    """Fock-space lift of a mode unitary by polynomial expansion.

    Column |n> is built by applying prod_j (sum_i u_ij a_i^dag)^{n_j}
    to vacuum and normalizing by sqrt(prod n_j!), tracking monomial
    coefficients in a dict keyed by occupation tuple.  The sqrt(k+1)
    ladder factors accumulate the sqrt(m!) of the output kets, so the
    dict holds Fock amplitudes directly.
    """
    u = np.asarray(mode_matrix, dtype=complex)
    modes = basis.mode_count
    if u.shape != (modes, modes):
        raise ValueError("matrix dimension does not match the basis")
    dim = basis.dimension
    out = np.zeros((dim, dim), dtype=complex)
    for col, occ_in in enumerate(basis.occupations):
        poly = {tuple([0] * modes): 1.0 + 0.0j}
        for j, nj in enumerate(occ_in):
            for _ in range(nj):
                nxt: dict = {}
                for occ, coef in poly.items():
                    for i in range(modes):
                        if u[i, j] == 0:
                            continue
                        stepped = list(occ)
                        stepped[i] += 1
                        key = tuple(stepped)
                        nxt[key] = nxt.get(key, 0.0 + 0.0j) + coef * u[i, j] * math.sqrt(
                            stepped[i]
                        )
                poly = nxt
        norm = math.sqrt(math.prod(math.factorial(n) for n in occ_in))
        for occ, coef in poly.items():
            if occ in basis:
                out[basis.index_of(occ), col] = coef / norm
    return out


def permanent_expansion(m) -> complex:
    """Permanent via the lift-at-single-occupation route: per(U) is the
    all-ones-to-all-ones transition amplitude of the n-mode lift."""
    a = np.asarray(m, dtype=complex)
    n = a.shape[0]
    from fockforge.fock import TotalPhotonCutoff

    basis = FockBasis(n, TotalPhotonCutoff(n))
    ones = tuple([1] * n)
    col = lift_oracle(a, basis)
    return complex(col[basis.index_of(ones), basis.index_of(ones)])
