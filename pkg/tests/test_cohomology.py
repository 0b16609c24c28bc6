import random
from fractions import Fraction

import pytest

from confmodels import catalog
from confmodels.cohomology import (
    Poly,
    betti,
    cohomology_basis,
    column_acyclicity,
    euler_conserved,
    induced_map,
    induced_rank,
    is_quasi_iso,
)
from confmodels.model import ChainMap, build_model, psi

s, t = Poly.st(0, 1, 1), Poly.t()


def test_sphere_j3_betti():
    assert betti(build_model("j", catalog.sphere(1), 3)).nonzero() == {(0, 0): 1, (3, 1): 1}


def test_zero_differential_betti_equals_chain_dims():
    M = build_model("punctured", catalog.cp(1), 4)
    b = betti(M)
    assert b.betti == b.chain_dims


def test_torus_j3():
    P = betti(build_model("j", catalog.torus(), 3)).poly()
    assert P.format() == "1+6t+(12+2s)t^2+(10+4s)t^3+(3+2s)t^4"
    assert P.at_s(1).format() == "1+6t+14t^2+14t^3+5t^4"


def test_genus2_j3_formula():
    g = 2
    expected = (1 + 6 * g * t + 12 * g * g * t ** 2 + (8 * g ** 3 + (2 * g * g + g + 1) * s) * t ** 3
                + (2 * g * g + g + 2 * g * s) * t ** 4)
    assert betti(build_model("j", catalog.genus(2), 3)).poly() == expected


def test_punctured_cp2_three_points():
    P = betti(build_model("punctured", catalog.cp(2), 3)).poly()
    assert P == (1 + 3 * t ** 2) + s * t ** 5 * (5 + t ** 2) + 2 * s * s * t ** 8


def test_empty_table_is_zero():
    assert Poly().format() == "0"
    assert Poly({(1, 0): 0}) == Poly()


@pytest.mark.parametrize("poly, text", [
    (1 + s * t ** 3, "1+st^3"),
    (Poly({(2, 0): 12, (2, 1): 2}), "(12+2s)t^2"),
    (-t + s * s * t, "(-1+s^2)t"),
    (Poly.const(-1), "-1"),
])
def test_poly_format(poly, text):
    assert poly.format() == text


def test_poly_division():
    q, r = ((1 + t * t) * (1 + 2 * t)).divmod_t(1 + t * t)
    assert q == 1 + 2 * t and r == Poly()
    q, r = (1 + t ** 3).divmod_t(1 + t)
    assert q == 1 - t + t * t and r == Poly()
    assert (1 + t ** 4).divmod_t(1 + t ** 2)[1] == Poly.const(2)


def test_poly_json_round_trip():
    p = 1 + 5 * s * t ** 5 + 2 * s * s * t ** 8
    assert Poly.from_json(p.to_json()) == p


def test_betti_is_invariant_under_basis_permutation():
    """Reordering basis elements within blocks leaves the ranks alone."""
    M = build_model("j", catalog.genus(2), 3)
    ref = betti(M).betti

    class Shuffled:
        def __init__(self, model, seed):
            self.m = model
            rng = random.Random(seed)
            self.blocks = {bd: rng.sample(idx, len(idx)) for bd, idx in model.bidegree_blocks().items()}

        def bidegree_blocks(self):
            return self.blocks

        def block(self, p, q):
            return self.blocks.get((p, q), [])

        def d(self, i):
            return self.m.d(i)

    for seed in range(3):
        assert betti(Shuffled(M, seed)).betti == ref


@pytest.mark.parametrize("spec", [("sphere", 1), ("torus",), ("cp", 2), ("genus", 2)])
def test_euler_conservation(spec):
    for kind in ("kriz", "j", "punctured"):
        assert euler_conserved(build_model(kind, catalog.get(*spec), 3))


@pytest.mark.parametrize("spec", [("sphere", 1), ("torus",)])
def test_psi_is_quasi_iso(spec):
    f = psi(catalog.get(*spec), 3)
    assert is_quasi_iso(f)


def test_zero_map_is_not_quasi_iso():
    M = build_model("j", catalog.sphere(1), 3)
    zero = ChainMap(M, M, lambda i: {})
    assert not is_quasi_iso(zero)
    assert induced_rank(zero, 0, 0) == 0


def test_identity_induces_identity():
    M = build_model("j", catalog.torus(), 3)
    ident = ChainMap(M, M, lambda i: {i: Fraction(1)})
    for bd, b in betti(M).nonzero().items():
        rows = induced_map(ident, *bd)
        assert rows == [{k: 1} for k in range(b)]


def test_cohomology_basis_size():
    M = build_model("kriz", catalog.cp(2), 3)
    for bd, b in betti(M).betti.items():
        assert len(cohomology_basis(M, *bd).reps) == b


@pytest.mark.parametrize("spec, n", [(("sphere", 1), 2), (("sphere", 1), 3), (("cp", 2), 4), (("torus",), 3)])
def test_column_acyclicity(spec, n):
    H = catalog.get(*spec)
    rep = column_acyclicity(H, n)
    assert rep.ok, rep.violations
    assert not rep.higher


@pytest.mark.parametrize("spec", [("sphere", 1), ("cp", 2), ("genus", 2)])
def test_column_acyclicity_two_points(spec):
    H = catalog.get(*spec)
    rep = column_acyclicity(H, 2)
    assert sum(got for got, _ in rep.h0.values()) == H.dim * (H.dim - 1)
