import copy
from fractions import Fraction
from itertools import product

import pytest

from confmodels import catalog
from confmodels.algebra import (
    DegeneratePairing,
    DimensionMismatch,
    NonUnital,
    NotAssociative,
    NotGradedCommutative,
    OddFormalDimension,
    ParseError,
    TopDegreeNotOneDimensional,
    ValidationError,
    algebra_poincare_poly,
    algebra_to_json,
    connected_sum,
    diagonal_class,
    euler_characteristic,
    is_algebra_map,
    puncture,
    validate_algebra,
)
from confmodels.tensor import TensorElement, flip, insert, multiply

GENUS2 = {
    "name": "Sigma2",
    "formal_dimension": 2,
    "basis": [{"label": l, "degree": d} for l, d in
              [("1", 0), ("a1", 1), ("a2", 1), ("b1", 1), ("b2", 1), ("w", 2)]],
    "orientation": "w",
    "products": [
        {"left": "a1", "right": "b1", "value": [["w", "1"]]},
        {"left": "a2", "right": "b2", "value": [["w", "1"]]},
    ],
}


def labelled(H, terms):
    """Diagonal terms as ``{(label, label): coefficient}``."""
    L = H.algebra.labels
    return {(L[a], L[b]): c for (a, b), c in terms.items()}


def test_sphere_dual_basis():
    H = catalog.sphere(1)
    assert H.dim == 2
    one, w = H.algebra.index("1"), H.algebra.index("w")
    assert H.dual[one] == {w: 1}
    assert H.dual[w] == {one: 1}


def test_genus2_validates_and_reflects_products():
    H = validate_algebra(GENUS2)
    alg = H.algebra
    assert alg.mul_basis(alg.index("b1"), alg.index("a1")) == {alg.index("w"): -1}


def test_missing_pairing_is_degenerate():
    spec = copy.deepcopy(GENUS2)
    del spec["products"][0]
    with pytest.raises(ValidationError) as info:
        validate_algebra(spec)
    assert any(isinstance(v, DegeneratePairing) and v.degree == 1 for v in info.value.violations)


@pytest.mark.parametrize("mutate, error", [
    (lambda s: s.__setitem__("formal_dimension", 3), OddFormalDimension),
    (lambda s: s["basis"].append({"label": "w2", "degree": 2}), TopDegreeNotOneDimensional),
    (lambda s: s["basis"].append({"label": "e", "degree": 0}), NonUnital),
    (lambda s: s["products"].append({"left": "b1", "right": "a1", "value": [["w", "1"]]}),
     NotGradedCommutative),
    (lambda s: s["products"].append({"left": "a1", "right": "a1", "value": [["w", "1"]]}),
     NotGradedCommutative),
])
def test_axiom_violations_are_reported(mutate, error):
    spec = copy.deepcopy(GENUS2)
    mutate(spec)
    with pytest.raises(ValidationError) as info:
        validate_algebra(spec)
    assert any(isinstance(v, error) for v in info.value.violations)


def test_non_associative_table_is_reported():
    # (ef)e = ue = g but e(fe) = -e u = -g
    spec = {
        "name": "bad", "formal_dimension": 4, "orientation": "w",
        "basis": [{"label": l, "degree": d} for l, d in
                  [("1", 0), ("e", 1), ("f", 1), ("u", 2), ("g", 3), ("h", 3), ("w", 4)]],
        "products": [
            {"left": "e", "right": "f", "value": [["u", "1"]]},
            {"left": "e", "right": "u", "value": [["g", "1"]]},
        ],
    }
    with pytest.raises(ValidationError) as info:
        validate_algebra(spec)
    assert any(isinstance(v, NotAssociative) for v in info.value.violations)


@pytest.mark.parametrize("path, spec", [
    ("orientation", {k: v for k, v in GENUS2.items() if k != "orientation"}),
    ("basis[0].degree", {**GENUS2, "basis": [{"label": "1"}]}),
    ("products[0].value[0]", {**GENUS2, "products": [{"left": "a1", "right": "b1", "value": [["w", "x/y"]]}]}),
])
def test_parse_errors_carry_a_path(path, spec):
    with pytest.raises(ParseError) as info:
        validate_algebra(spec)
    assert info.value.path == path


def test_json_round_trip(standard):
    for H in standard.values():
        again = validate_algebra(algebra_to_json(H))
        assert again.algebra.labels == H.algebra.labels
        assert dict(again.algebra.table) == {k: v for k, v in H.algebra.table.items() if v}


def test_diagonal_of_sphere():
    H = catalog.sphere(1)
    assert labelled(H, diagonal_class(H).terms) == {("1", "w"): 1, ("w", "1"): 1}


def test_diagonal_of_cp2():
    H = catalog.cp(2)
    assert labelled(H, diagonal_class(H).terms) == {("1", "w"): 1, ("x", "x"): 1, ("w", "1"): 1}


def test_diagonal_of_genus2():
    H = catalog.genus(2)
    expected = {("1", "w"): 1, ("w", "1"): 1}
    for i in (1, 2):
        expected[(f"a{i}", f"b{i}")] = -1
        expected[(f"b{i}", f"a{i}")] = 1
    assert labelled(H, diagonal_class(H).terms) == expected


def brute_force_diagonal_axioms(H, delta):
    """Eqs. (1)-(2) checked directly on the tensor square."""
    alg = H.algebra
    if flip(delta) != delta:
        return False
    for a in range(alg.dim):
        x = TensorElement((alg,), {(a,): 1})
        if multiply(insert(x, (1,), 2), delta) != multiply(insert(x, (2,), 2), delta):
            return False
    return True


def test_diagonal_axioms_for_every_catalog_algebra(standard):
    for H in standard.values():
        assert brute_force_diagonal_axioms(H, diagonal_class(H))


def test_dual_basis_is_dual(standard):
    for H in standard.values():
        for a, b in product(range(H.dim), repeat=2):
            value = sum(c * H.pairing({a: 1}, {g: 1}) for g, c in H.dual[b].items())
            assert value == (1 if a == b else 0)


def test_diagonal_contraction_recovers_identity(standard):
    """Contracting the first factor of the diagonal against ``x`` gives back ``x``."""
    for H in standard.values():
        delta = diagonal_class(H)
        alg = H.algebra
        for x in range(alg.dim):
            out = {}
            for (a, b), c in delta.terms.items():
                p = H.pairing({x: 1}, {a: 1})
                if p:
                    out[b] = out.get(b, 0) + c * p
            assert {k: v for k, v in out.items() if v} == {x: 1}


def test_puncture_cp1_is_ground_field():
    P, dbar = puncture(catalog.cp(1))
    assert P.algebra.labels == ("1",)
    assert dbar.terms == {}


def test_puncture_cp2():
    P, dbar = puncture(catalog.cp(2))
    assert P.algebra.labels == ("1", "x")
    x = P.algebra.index("x")
    assert dbar.terms == {(x, x): 1}
    assert P.algebra.mul_basis(x, x) == {}


def test_puncture_genus2():
    H = catalog.genus(2)
    P, dbar = puncture(H)
    expected = {k: v for k, v in labelled(H, diagonal_class(H).terms).items() if "w" not in k}
    L = P.algebra.labels
    assert {(L[a], L[b]): c for (a, b), c in dbar.terms.items()} == expected


def test_punctured_diagonal_is_killed_by_augmentation(standard):
    for H in standard.values():
        P, dbar = puncture(H)
        unit = P.algebra.unit
        assert not any(a == unit or b == unit for a, b in dbar.terms)


def test_puncture_dimensions(standard):
    for H in standard.values():
        P, _ = puncture(H)
        dims = P.algebra.degree_dims()
        for d, k in H.algebra.degree_dims().items():
            assert dims.get(d, 0) == (k if d < H.formal_dimension else 0)


def test_connected_sum_cp2():
    S, pi_h, pi_k = connected_sum(catalog.cp(2), catalog.cp(2))
    alg = S.algebra
    assert alg.labels == ("1", "x_1", "x_2", "w")
    x1, x2, w = 1, 2, 3
    assert alg.mul_basis(x1, x1) == {w: 1} and alg.mul_basis(x2, x2) == {w: 1}
    assert alg.mul_basis(x1, x2) == {}
    Ph, _ = puncture(catalog.cp(2))
    assert is_algebra_map(alg, Ph.algebra, pi_h)
    assert is_algebra_map(alg, Ph.algebra, pi_k)


def test_connected_sum_spheres_is_a_sphere():
    S, _, _ = connected_sum(catalog.sphere(1), catalog.sphere(1))
    assert S.algebra.degrees == (0, 2)


def test_connected_sum_of_tori_is_genus2():
    S, _, _ = connected_sum(catalog.torus(), catalog.torus())
    G = catalog.genus(2)
    assert S.dim == 6
    # same structure constants once a_1, a_2, b_1, b_2 are matched up
    rename = {"1": "1", "a_1": "a1", "b_1": "b1", "a_2": "a2", "b_2": "b2", "w": "w"}
    ours = {(rename[a], rename[b]): {rename[k]: v for k, v in val.items()}
            for (a, b), val in S.algebra.structure_constants().items()}
    assert ours == G.algebra.structure_constants()


def test_connected_sum_needs_equal_dimension():
    with pytest.raises(DimensionMismatch):
        connected_sum(catalog.cp(2), catalog.torus())


@pytest.mark.parametrize("H, chi", [
    (catalog.sphere(1), 2), (catalog.genus(2), -2), (catalog.cp(2), 3), (catalog.torus(), 0),
])
def test_euler_characteristic(H, chi):
    assert euler_characteristic(H) == chi


@pytest.mark.parametrize("H, poly", [
    (catalog.torus(), {0: 1, 1: 2, 2: 1}),
    (catalog.sphere(1), {0: 1, 2: 1}),
    (catalog.cp(2), {0: 1, 2: 1, 4: 1}),
])
def test_algebra_poincare_poly(H, poly):
    assert algebra_poincare_poly(H) == poly


def test_rationals_are_exact():
    spec = copy.deepcopy(GENUS2)
    spec["products"][0]["value"] = [["w", "2/4"]]
    H = validate_algebra(spec)
    alg = H.algebra
    assert alg.mul_basis(alg.index("a1"), alg.index("b1")) == {alg.index("w"): Fraction(1, 2)}
    assert H.dual[alg.index("a1")] == {alg.index("b1"): 2}
