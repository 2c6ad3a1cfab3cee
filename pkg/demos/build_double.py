"""Build the double of su(2) with its standard cobracket and solve the
modified Yang-Baxter equation on it.

Run: python3 demos/build_double.py
"""
from liedouble.bialgebra import check_bialgebra, check_ybe, rmatrix_condition_suite
from liedouble.catalog import su2_bialgebra
from liedouble.constructions import diagonal_graph_witness, manin_double, r_from_manin


def main():
    B = su2_bialgebra()
    print(check_bialgebra(B).line())

    # g + g* with the pairing as metric; g and g* are the two isotropic halves
    M, dec = manin_double(B)
    print(f"double has dimension {M.dim}")

    # R = pr_+ - pr_- solves the 1-mYBE and is ad-invariant up to the identity term
    R = r_from_manin(dec)
    for mode in ("1-mYBE", "YBE"):
        print(check_ybe(M, R, mode).line())
    print(rmatrix_condition_suite(M, R).line())
    print(diagonal_graph_witness(M, R).line())


if __name__ == "__main__":
    main()
