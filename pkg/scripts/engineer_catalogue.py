#!/usr/bin/env python3
"""Engineer a few single-mode target states from creation-polynomial
coefficients and report the resource count for each.

Every target sum_k d_k (a^dag)^k |0> factors into displaced single
photon additions; the rows list the roots, how many additions and
coherent sources the factored pipeline needs, and the achieved
amplitudes.  Pass --coeffs to engineer your own polynomial (comma
separated, complex literals like 0.3+0.2j are fine).

Example:
    python3 scripts/engineer_catalogue.py
    python3 scripts/engineer_catalogue.py --coeffs 1,0,0.5
"""

import argparse
import sys

from fockforge.gates import engineer_state

CATALOGUE = [
    ("one_photon", (0.0, 1.0)),
    ("zero_two_mix", (1.0, 0.0, 0.5)),
    ("skewed_cubic", (1.0, -0.4 + 0.3j, 0.8, 0.25j)),
    ("flat_quartic", (1.0, 1.0, 1.0, 1.0, 1.0)),
]


def fmt_c(z: complex) -> str:
    return f"{z.real:.6g}{z.imag:+.6g}j"


def report_row(label: str, coeffs) -> str:
    state, rep = engineer_state(coeffs)
    amps = ";".join(fmt_c(a) for a in state.amplitudes)
    roots = ";".join(fmt_c(r) for r in rep.roots)
    cells = [
        label,
        str(len(coeffs) - 1),
        roots if roots else "-",
        str(rep.single_photon_additions),
        str(rep.coherent_sources),
        str(rep.element_count),
        str(rep.working_cutoff),
        f"{rep.tail_mass:.3e}",
        amps,
    ]
    return "\t".join(cells)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--coeffs", type=str, default=None)
    args = ap.parse_args(argv)

    cols = (
        "label degree roots additions coherent_sources elements "
        "working_cutoff tail_mass amplitudes"
    ).split()
    sys.stdout.write("\t".join(cols) + "\n")

    if args.coeffs is not None:
        coeffs = tuple(complex(tok) for tok in args.coeffs.split(","))
        sys.stdout.write(report_row("custom", coeffs) + "\n")
        return 0

    for label, coeffs in CATALOGUE:
        sys.stdout.write(report_row(label, coeffs) + "\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
