import random
from fractions import Fraction
from itertools import combinations, product

import pytest

from confmodels import catalog
from confmodels.algebra import diagonal_class, puncture
from confmodels.cohomology import betti
from confmodels.linalg import add_into, rank
from confmodels.model import (
    ModelError,
    arnold_algebra,
    build_model,
    count_I,
    count_J,
    predicted_dim,
    psi,
    random_normal_form,
    reduce_over_H,
    reduce_word,
    verify_chain_map,
)
from confmodels.tensor import insert, mul_basis_tensors, tensor_degree


def vec_of(M, pairs):
    """``{(coef, word): c}`` as a normal-form vector."""
    out = {}
    for (coef, word), c in pairs.items():
        add_into(out, M.normalize({(coef, word): Fraction(1)}), c)
    return out


# ------------------------------------------------------------ normal form

def test_arnold_rewrite_example():
    A = arnold_algebra(3, 1)
    u = A.units
    lhs = A.element(u, [(3, 2), (3, 1)])
    rhs = vec_of(A, {(u, ((2, 1), (3, 1))): 1, (u, ((2, 1), (3, 2))): -1})
    assert lhs == rhs


def test_square_of_generator_vanishes():
    A = arnold_algebra(2, 1)
    assert A.element(A.units, [(2, 1), (2, 1)]) == {}
    assert A.element(A.units, [(1, 2), (2, 1)]) == {}


def test_reduce_word_output_is_normal():
    for word in product([(2, 1), (3, 1), (3, 2), (4, 1), (4, 3)], repeat=3):
        for mono, _ in reduce_word(word):
            firsts = [i for i, _ in mono]
            assert firsts == sorted(set(firsts))


@pytest.mark.parametrize("word", [((3, 1),), ((2, 1), (3, 2))])
def test_push_to_first_slot(word):
    H = catalog.cp(2)
    M = build_model("kriz", H, 3)
    x = H.algebra.index("x")
    u = M.units
    coef3 = u[:2] + (x,)
    coef1 = (x,) + u[1:]
    assert M.element(coef3, list(word)) == M.element(coef1, list(word))
    assert len(M.element(coef3, list(word))) == 1


def test_push_of_odd_class_keeps_sign():
    H = catalog.torus()
    M = build_model("kriz", H, 3)
    a, b = H.algebra.index("a"), H.algebra.index("b")
    one = H.algebra.unit
    # (a x 1 x b) G31 = (a x 1 x 1)(1 x 1 x b) G31 = (a b x 1 x 1) G31
    assert M.element((a, one, b), [(3, 1)]) == M.element((H.orientation, one, one), [(3, 1)])
    assert M.element((b, one, a), [(3, 1)]) == M.element((H.orientation, one, one), [(3, 1)], c=-1)


def test_invalid_generators_rejected():
    J = build_model("j", catalog.sphere(1), 3)
    with pytest.raises(ModelError):
        J.element(J.units, [(2, 1)])


@pytest.mark.parametrize("name", ["sphere 1", "cp 2", "torus", "genus 2", "product(sphere 1,torus)"])
@pytest.mark.parametrize("kind", ["kriz", "j", "punctured"])
def test_normal_form_confluence(standard, name, kind):
    """Random rewrite orders reach the same normal form (100 cases)."""
    M = build_model(kind, standard[name], 4)
    rng = random.Random(hash((name, kind)) % 1000)
    lo = 3 if kind == "j" else 2
    for _ in range(100):
        coef = tuple(rng.randrange(a.dim) for a in M.algebras)
        word = []
        for _ in range(rng.randrange(1, 4)):
            i = rng.randrange(lo, M.n + 1)
            j = rng.randrange(M.min_j, i)
            word.append((i, j) if rng.random() < 0.5 else (j, i))
        assert random_normal_form(M, coef, word, rng) == M.normalize({(coef, tuple(word)): Fraction(1)})


# ------------------------------------------------------------ relation oracle

def exterior_sign(word):
    """Sign and sorted tuple of a product of odd generators (None on repeats)."""
    if len(set(word)) != len(word):
        return 0, None
    sign = 1
    for a in range(len(word)):
        for b in range(a + 1, len(word)):
            if word[a] > word[b]:
                sign = -sign
    return sign, tuple(sorted(word))


def relation_oracle(M, extra_ideal=()):
    """Present the model as a free module modulo its defining relations.

    Returns ``(free_dim, relation_rank, image_rank, kills)`` for the map
    sending a free basis element to its normal form.
    """
    n = M.n
    gens = [(i, j) for i in range(2, n + 1) for j in range(1, i) if M.allowed(i, j)]
    coefs = list(product(*[range(a.dim) for a in M.algebras]))
    monos = [m for k in range(len(gens) + 1) for m in combinations(gens, k)]
    free = {(t, m): k for k, (t, m) in enumerate(product(coefs, monos))}
    algs = M.algebras
    g = 2 * M.m - 1

    def element(t, word, c=1):
        s, w = exterior_sign(word)
        return {} if not s else {free[(t, w)]: Fraction(s * c)}

    def times(t, u):
        return mul_basis_tensors(algs, t, u)

    relations = []
    for t, m in product(coefs, monos):
        # Arnold: G_ij G_ik - G_jk G_ik + G_jk G_ij for i > j > k, times m on the right
        for i, j, k in combinations(range(n, 0, -1), 3):
            if not all(M.allowed(*p) for p in ((i, j), (i, k), (j, k))):
                continue
            rel = {}
            for c, w in ((1, ((i, j), (i, k))), (-1, ((j, k), (i, k))), (1, ((j, k), (i, j)))):
                add_into(rel, element(t, w + m, c))
            if rel:
                relations.append(rel)
        # i_i(x) G_ij = i_j(x) G_ij
        for (i, j) in gens:
            for x in range(algs[0].dim):
                ui = tuple(x if s == i - 1 else M.units[s] for s in range(n))
                uj = tuple(x if s == j - 1 else M.units[s] for s in range(n))
                rel = {}
                for u, c in ((ui, 1), (uj, -1)):
                    for tt, v in times(t, u).items():
                        add_into(rel, element(tt, ((i, j),) + m, c * v))
                if rel:
                    relations.append(rel)
        for ideal in extra_ideal:
            rel = {}
            for u, c in ideal.items():
                for tt, v in times(t, u).items():
                    add_into(rel, element(tt, m, c * v))
            if rel:
                relations.append(rel)
    images = {}
    for (t, m), k in free.items():
        images[k] = M.normalize({(t, m): Fraction(1)})

    def apply(v):
        out = {}
        for k, c in v.items():
            add_into(out, images[k], c)
        return out

    kills = all(not apply(r) for r in relations)
    return len(free), rank(relations), rank(images.values()), kills


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_arnold_algebra_against_relations(k):
    A = arnold_algebra(k, 1)
    free, rel, image, kills = relation_oracle(A)
    assert kills
    assert image == A.dim == free - rel
    # Poincare polynomial prod (1 + j t)
    by_q = {}
    for _, q in A.bidegrees:
        by_q[q] = by_q.get(q, 0) + 1
    assert by_q == {q: c for q, c in count_I(k).items() if c}


@pytest.mark.parametrize("spec", [("sphere", 1), ("torus",), ("cp", 2)])
@pytest.mark.parametrize("kind", ["kriz", "punctured", "j"])
def test_models_against_relations(spec, kind):
    H = catalog.get(*spec)
    M = build_model(kind, H, 3)
    extra = ()
    if kind == "j":
        D = diagonal_class(H)
        extra = [insert(D, (s, 1), M.algebras).terms for s in range(2, 4)]
    free, rel, image, kills = relation_oracle(M, extra)
    assert kills
    assert image == M.dim == free - rel


# ------------------------------------------------------------ dimensions and differential

@pytest.mark.parametrize("kind", ["kriz", "punctured", "j"])
def test_dimension_identities(standard, kind):
    for H in standard.values():
        for n in range(1, 5 if H.dim <= 6 else 4):
            assert build_model(kind, H, n).dim == predicted_dim(kind, H.dim, n)


def test_kriz_genus2_three_points():
    assert build_model("kriz", catalog.genus(2), 3).dim == 6 ** 3 + 3 * 6 ** 2 + 2 * 6 == 336


def test_index_set_counts():
    assert count_I(4) == {0: 1, 1: 6, 2: 11, 3: 6}
    assert count_J(4) == {0: 1, 1: 3, 2: 2}


@pytest.mark.parametrize("kind", ["kriz", "punctured", "j"])
def test_d_squared_and_bidegree(standard, kind):
    for H in standard.values():
        for n in range(1, 4 if H.dim <= 6 else 3):
            M = build_model(kind, H, n)
            assert M.check_d_squared() == []
            assert M.check_bidegree() == []


def test_j3_of_sphere_is_two_term():
    """J_3(S^2): H <-(-2w)- H G32."""
    H = catalog.sphere(1)
    J = build_model("j", H, 3)
    assert J.dim == 4
    one, w = H.algebra.unit, H.orientation
    g = J.index[(((3, 2),), (one, one, one))]
    assert J.d(g) == {J.index[((), (w, one, one))]: -2}


def test_j3_differential_matches_two_term_formula(standard):
    """``d(h1 h2 G32) = (-1)^(|h1|+|h2|) pi((h1 x h2 x 1) D32)``, and the simplified form agrees."""
    for H in standard.values():
        J = build_model("j", H, 3)
        D = diagonal_class(H)
        D32 = insert(D, (3, 2), J.algebras).terms
        D21 = insert(D, (2, 1), J.algebras).terms
        D31 = insert(D, (3, 1), J.algebras).terms
        alg = H.algebra
        one = alg.unit
        for idx, (mono, coef) in enumerate(J.basis):
            if mono != ((3, 2),):
                continue
            h, l = coef[0], coef[1]
            sign = -1 if (alg.degrees[h] + alg.degrees[l]) % 2 else 1
            terms = {}
            for u, c in D32.items():
                for t, v in mul_basis_tensors(J.algebras, coef, u).items():
                    terms[(t, ())] = terms.get((t, ()), 0) + sign * c * v
            assert J.d(idx) == J.normalize(terms)
            # (h x l x 1) D32 - (h x 1 x l) D21 - (-1)^|h||l| (1 x l x h) D31
            alt = dict(terms)
            s2 = -1 if alg.degrees[h] * alg.degrees[l] % 2 else 1
            for base, Dx, c0 in (((h, one, l), D21, -1), ((one, l, h), D31, -s2)):
                for u, c in Dx.items():
                    for t, v in mul_basis_tensors(J.algebras, base, u).items():
                        alt[(t, ())] = alt.get((t, ()), 0) + sign * c0 * c * v
            assert J.normalize(alt) == J.d(idx)


def test_punctured_three_point_differentials():
    """The signed formulas for the punctured 3-point model of a surface."""
    H = catalog.cp2_sum(2)
    E = build_model("punctured", H, 3)
    P = E.punctured.algebra
    dbar = puncture(H)[1]
    algs = E.algebras
    one = P.unit

    def Dbar(i, j):
        return insert(dbar, (i, j), algs).terms

    def expected(coef, factors):
        """``sum sign * (coef * Dbar) * rest`` from explicit (pair, rest, extra sign) data."""
        terms = {}
        s0 = -1 if tensor_degree(algs, coef) % 2 else 1
        for (i, j), rest, extra in factors:
            for u, c in Dbar(i, j).items():
                for t, v in mul_basis_tensors(algs, coef, u).items():
                    terms[(t, rest)] = terms.get((t, rest), 0) + s0 * extra * c * v
        return E.normalize(terms)

    for h in range(P.dim):
        for h2 in range(P.dim):
            for mono, coef in (((2, 1), (h, one, h2)), ((3, 1), (h, h2, one)), ((3, 2), (h, h2, one))):
                idx = E.index[((mono,), coef)]
                assert E.d(idx) == expected(coef, [(mono, (), 1)])
        for second in ((3, 1), (3, 2)):
            idx = E.index[(((2, 1), second), (h, one, one))]
            want = expected((h, one, one), [(second, ((2, 1),), -1), ((2, 1), (second,), 1)])
            assert E.d(idx) == want


# ------------------------------------------------------------ multiplication

@pytest.mark.parametrize("spec, kind", [(("torus",), "kriz"), (("cp", 2), "j"), (("genus", 2), "punctured"),
                                        (("product", ("sphere", 1), ("torus",)), "j")])
def test_multiplication_is_graded_commutative_and_associative(spec, kind):
    M = build_model(kind, catalog.get(*spec), 3)
    rng = random.Random(7)
    for _ in range(60):
        a, b, c = (rng.randrange(M.dim) for _ in range(3))
        pa, pb = M.bidegrees[a][0], M.bidegrees[b][0]
        ab = M.multiply_basis(a, b)
        ba = M.multiply_basis(b, a)
        assert ab == {k: (-1) ** (pa * pb) * v for k, v in ba.items()}
        left = M.multiply(ab, {c: 1})
        right = M.multiply({a: 1}, M.multiply_basis(b, c))
        assert left == right


def test_unit_is_a_unit():
    M = build_model("j", catalog.torus(), 3)
    u = M.unit_index()
    for i in range(M.dim):
        assert M.multiply_basis(u, i) == {i: 1}


@pytest.mark.parametrize("spec, kind", [(("torus",), "kriz"), (("cp", 2), "j")])
def test_leibniz_rule(spec, kind):
    M = build_model(kind, catalog.get(*spec), 3)
    rng = random.Random(3)
    for _ in range(60):
        a, b = rng.randrange(M.dim), rng.randrange(M.dim)
        pa = M.bidegrees[a][0]
        lhs = M.apply_d(M.multiply_basis(a, b))
        rhs = M.multiply(M.d(a), {b: 1})
        add_into(rhs, M.multiply({a: 1}, M.d(b)), (-1) ** pa)
        assert lhs == rhs


# ------------------------------------------------------------ Psi and the reduction

def test_psi_examples():
    H = catalog.torus()
    f = psi(H, 3)
    E, J = f.source, f.target
    assert f(E.index[(((2, 1),), E.units)]) == {}
    assert f(E.unit_index()) == {J.unit_index(): 1}
    D21 = insert(diagonal_class(H), (2, 1), E.algebras).terms
    for u in product(range(H.dim), repeat=3):
        x = E.normalize({(t, ()): c * v for t0, c in D21.items()
                         for t, v in mul_basis_tensors(E.algebras, t0, u).items()})
        assert f.apply(x) == {}


@pytest.mark.parametrize("spec", [("sphere", 1), ("torus",), ("cp", 2)])
def test_psi_is_a_surjective_chain_map(spec):
    f = psi(catalog.get(*spec), 3)
    verify_chain_map(f)
    assert f.homogeneity_violations() == []
    for bd, idx in f.source.bidegree_blocks().items():
        assert rank(f(i) for i in idx) == len(f.target.block(*bd))


@pytest.mark.parametrize("spec", [("sphere", 1), ("torus",), ("cp", 2), ("genus", 2)])
def test_reduction_n2_is_punctured_algebra(spec):
    H = catalog.get(*spec)
    R = reduce_over_H(H, 2)
    assert R.dim == H.dim - 1
    assert all(not R.d(k) for k in range(R.dim))


def test_reduction_sphere_three_points_has_punctured_betti():
    H = catalog.sphere(1)
    R = reduce_over_H(H, 3)
    assert betti(R).nonzero() == betti(build_model("punctured", H, 2)).nonzero()


def test_reduction_cp2_dims_per_bidegree():
    H = catalog.cp(2)
    R = reduce_over_H(H, 3)
    target = build_model("punctured", H, 2)
    assert {bd: len(v) for bd, v in R.bidegree_blocks().items()} == \
        {bd: len(v) for bd, v in target.bidegree_blocks().items()}
    assert R.report == {"bijection": True, "bidegree": True, "chain_map": True, "multiplicative": True}
