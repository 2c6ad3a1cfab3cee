from fractions import Fraction

import numpy as np
import pytest

from liedouble.algebra_core import LieAlgebra, MetricalLieAlgebra
from liedouble.bialgebra import Bialgebra
from liedouble.catalog import load_catalog, su2_bialgebra, axb_bialgebra
from liedouble.constructions import manin_double
from liedouble.exterior import CochainMap, Multivector


@pytest.fixture(scope="session")
def sl2c():
    return load_catalog("sl2c_su2_sb2")


@pytest.fixture(scope="session")
def axb():
    return load_catalog("gl2r_axb")


@pytest.fixture(scope="session")
def cotangent():
    return load_catalog("cotangent")


@pytest.fixture(scope="session")
def su2():
    """``[e1,e2]=e3`` and cyclic, exact."""
    return LieAlgebra.from_brackets(3, [(0, 1, 2, 1), (1, 2, 0, 1), (2, 0, 1, 1)], labels=["e1", "e2", "e3"])


@pytest.fixture(scope="session")
def su2_double():
    return manin_double(su2_bialgebra())


@pytest.fixture(scope="session")
def axb_double():
    """Double of ``b'(X2) = X1 ^ X2`` (basis X1, X2, Y1, Y2)."""
    return manin_double(axb_bialgebra(1))


@pytest.fixture(scope="session")
def axb_algebra():
    return LieAlgebra.from_brackets(2, [(0, 1, 1, 1)], labels=["X1", "X2"])


@pytest.fixture(scope="session")
def heisenberg():
    return LieAlgebra.from_brackets(3, [(0, 1, 2, 1)], labels=["X1", "X2", "X3"])


def zero_cobracket(n: int) -> CochainMap:
    return CochainMap([Multivector.zero(n, 2) for _ in range(n)], 2)


def killing_su2(su2_alg) -> MetricalLieAlgebra:
    G = np.empty((3, 3), dtype=object)
    for i in range(3):
        for j in range(3):
            G[i, j] = Fraction(-2 if i == j else 0)
    return MetricalLieAlgebra(su2_alg, G)


def fr(M):
    """Exact object array from nested ints / strings."""
    return np.array([[Fraction(v) for v in row] for row in M], dtype=object)


@pytest.fixture(scope="session")
def tstar_h3():
    """``T*h3`` with an exact orthogonal automorphism without fixed points."""
    import json
    from pathlib import Path
    from liedouble.algebra_core import algebra_from_json
    d = json.loads((Path(__file__).resolve().parents[1] / "data" / "tstar_h3.json").read_text())
    return algebra_from_json(d), fr(d["automorphism"])
