"""Solutions of the 1-mYBE on T*h3 from a derivation (Gauss
decomposition) and from an orthogonal automorphism (Cayley transform).

Run: python3 demos/rmatrices_from_automorphisms.py
"""
from fractions import Fraction

import numpy as np

from liedouble.algebra_core import LieAlgebra
from liedouble.bialgebra import check_ybe, weight_decomposition
from liedouble.constructions import (cayley, cotangent_double, cotangent_derivation, decomposition_from_derivation,
                                     grading_automorphism, r_from_gauss)


def main():
    h3 = LieAlgebra.from_brackets(3, [(0, 1, 2, 1)], labels=["X1", "X2", "X3"])
    M, _ = cotangent_double(h3)

    # grading derivation of h3 lifted to the cotangent double
    D = cotangent_derivation(np.diag([Fraction(1), Fraction(1), Fraction(2)]).astype(object))
    dec = decomposition_from_derivation(M, D)
    print("block dims (plus, zero, minus):", [b.shape[0] for b in (dec.plus, dec.zero, dec.minus)])
    R = r_from_gauss(dec)
    print(check_ybe(M, R, "1-mYBE").line())
    print("weights:", [complex(w) for w in weight_decomposition(R).weights])

    # exponentiate the grading to an automorphism and take its Cayley transform
    A = grading_automorphism([1, 1, 2, -1, -1, -2], 2)
    Rc = cayley(A)
    print(check_ybe(M.to_float(), Rc, "1-mYBE").line())


if __name__ == "__main__":
    main()
