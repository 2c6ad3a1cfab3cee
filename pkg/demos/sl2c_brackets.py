"""Poisson brackets of the matrix entries on SL(2,C) = SU(2) SB(2,C).

Run: python3 demos/sl2c_brackets.py
"""
import numpy as np

from liedouble.catalog import bracket_table, inversion_symmetry, load_catalog, perturbation_probe
from liedouble.poisson import CoordinateFunction, poisson_bracket


def main():
    entry = load_catalog("sl2c")
    ctx = entry.context
    a = entry.points(np.random.default_rng(1), 1)[0]
    z1, z2, z3, z4 = (CoordinateFunction(i, j) for i in range(2) for j in range(2))
    print("at a =\n", np.round(a, 3))
    print("{z1,z4} =", np.round(poisson_bracket(ctx, "plus", z1, z4, a), 12))
    print("{z2,z3} =", np.round(poisson_bracket(ctx, "plus", z2, z3, a), 12),
          " i z1 z4 =", np.round(1j * a[0, 0] * a[1, 1], 12))

    # full table over seeded samples, then two sanity probes
    rep = bracket_table(entry, samples=50)
    print(rep.line())
    for row in rep.details["rows"]:
        print(f"  {row['row']:<20} {row['residual']:.1e}")
    print(inversion_symmetry(entry, samples=20).line())
    print(perturbation_probe(entry, samples=10).line())


if __name__ == "__main__":
    main()
