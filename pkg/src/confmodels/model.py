"""Bigraded differential algebra models in normal form.

A model is the free graded-commutative algebra over a tensor power of
coefficient algebras on exterior generators ``G_ij`` (degree ``2m-1``),
modulo the Arnold relations and ``i_i(x) G_ij = i_j(x) G_ij``.  Its basis is
the direct-sum decomposition by normal G-monomials: first indices strictly
increasing and distinct, each coefficient living in the slots not used as a
first index.

Three kinds share one rewriting engine:

* ``kriz``: coefficients ``H^(x)n``, ``dG_ij = D_ij``;
* ``punctured``: coefficients ``H°^(x)n``, ``dG_ij`` the reduced diagonal;
* ``j``: coefficients in the fat-diagonal quotient, generators only with
  ``i > j >= 2``, ``dG_ij = pi(D_ij)``.

``block`` models (several coefficient algebras side by side, generators only
inside a block) realise tensor products of models, as needed by the coaction
and the connected-sum map.

Basis elements are pairs ``(monomial, coefficient)`` where the coefficient is
a full-length basis tensor with units in the occupied slots, read as
``coefficient * G_{i1 j1} ... G_{ik jk}``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product as cartesian
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .algebra import GradedAlgebra, PDAlgebra, diagonal_class, puncture
from .linalg import add_into
from .tensor import (
    FatDiagonalQuotient,
    TensorElement,
    fat_diagonal_quotient,
    insert,
    mul_basis_tensors,
    place,
    tensor_degree,
)

Pair = Tuple[int, int]
Monomial = Tuple[Pair, ...]
Coef = Tuple[int, ...]
Key = Tuple[Monomial, Coef]
Vec = Dict[int, Fraction]

KINDS = ("kriz", "j", "punctured")


class ModelError(ValueError):
    pass


class ChainMapViolation(AssertionError):
    pass


class IsoViolation(AssertionError):
    pass


def sym(pair: Pair) -> Pair:
    """``G_ij = G_ji``: store with the larger index first."""
    i, j = pair
    if i == j:
        raise ModelError(f"G_{i}{j} is not a generator")
    return (i, j) if i > j else (j, i)


def _sort_word(word: Sequence[Pair]) -> Tuple[int, Optional[Tuple[Pair, ...]]]:
    """Sort odd generators; returns ``(sign, sorted)`` or ``(0, None)`` on a repeat."""
    w = list(word)
    sign = 1
    # insertion sort, counting transpositions
    for a in range(1, len(w)):
        x = w[a]
        b = a - 1
        while b >= 0 and w[b] > x:
            w[b + 1] = w[b]
            sign = -sign
            b -= 1
        w[b + 1] = x
    for a in range(len(w) - 1):
        if w[a] == w[a + 1]:
            return 0, None
    return sign, tuple(w)


@lru_cache(maxsize=None)
def reduce_word(word: Tuple[Pair, ...]) -> Tuple[Tuple[Monomial, int], ...]:
    """Normal form of a product of generators modulo the Arnold relations.

    Input pairs must already satisfy ``i > j``.  Output monomials have
    strictly increasing first indices.
    """
    sign, w = _sort_word(word)
    if not sign:
        return ()
    for a in range(len(w) - 1):
        (i1, j1), (i2, j2) = w[a], w[a + 1]
        if i1 == i2:
            # G_{i j1} G_{i j2} with j1 < j2 equals -G_{i j2} G_{i j1}, and by Arnold
            # G_{i j2} G_{i j1} = G_{j2 j1} G_{i j1} - G_{j2 j1} G_{i j2}.
            pre, post = w[:a], w[a + 2:]
            out: Dict[Monomial, int] = {}
            for coeff, mid in ((-1, ((j2, j1), (i1, j1))), (1, ((j2, j1), (i1, j2)))):
                for mono, c in reduce_word(pre + mid + post):
                    out[mono] = out.get(mono, 0) + sign * coeff * c
            return tuple((k, v) for k, v in out.items() if v)
    return ((w, sign),)


@dataclass(eq=False)
class Block:
    """Consecutive slots ``start..stop-1`` (0-based) sharing one coefficient algebra."""

    algebra: GradedAlgebra
    start: int
    stop: int
    nabla: Optional[TensorElement]
    name: str = ""

    @property
    def size(self) -> int:
        return self.stop - self.start


class Model:
    """A bigraded differential algebra presented on its normal-form basis."""

    def __init__(self, kind: str, blocks: Sequence[Block], m: int, name: str = "",
                 min_j: int = 1, pd: Optional[PDAlgebra] = None):
        self.kind = kind
        self.blocks = list(blocks)
        self.m = m
        self.name = name
        self.min_j = min_j
        self.pd = pd
        self.n = sum(b.size for b in blocks)
        self.algebras: Tuple[GradedAlgebra, ...] = tuple(
            b.algebra for b in self.blocks for _ in range(b.size))
        self._block_of = [k for k, b in enumerate(self.blocks) for _ in range(b.size)]
        self.units: Coef = tuple(a.unit for a in self.algebras)
        self._push_cache: Dict[Tuple[Coef, Monomial], Dict[Coef, Fraction]] = {}
        self._nabla_cache: Dict[Pair, Dict[Coef, Fraction]] = {}
        self._d_cache: Dict[int, Vec] = {}
        self._enumerate()

    # ------------------------------------------------------------------ basis
    def allowed(self, i: int, j: int) -> bool:
        """Is ``G_ij`` (``i > j``, 1-based) a generator of this model?"""
        return j >= self.min_j and self._block_of[i - 1] == self._block_of[j - 1]

    def monomials(self) -> List[Monomial]:
        options = []
        for i in range(1, self.n + 1):
            opts: List[Optional[Pair]] = [None]
            opts += [(i, j) for j in range(1, i) if self.allowed(i, j)]
            options.append(opts)
        monos = []
        for choice in cartesian(*options):
            monos.append(tuple(p for p in choice if p is not None))
        monos.sort(key=lambda mo: (len(mo), mo))
        return monos

    def coefficient_basis(self, mono: Monomial) -> List[Coef]:
        occupied = {i - 1 for i, _ in mono}
        free = [s for s in range(self.n) if s not in occupied]
        if self.kind == "j":
            q = self.quotient(len(free))
            out = []
            for t in q.section_basis():
                full = list(self.units)
                for s, b in zip(free, t):
                    full[s] = b
                out.append(tuple(full))
            return out
        ranges = [range(self.algebras[s].dim) if s in free else (self.units[s],) for s in range(self.n)]
        return [tuple(t) for t in cartesian(*ranges)]

    def quotient(self, l: int) -> FatDiagonalQuotient:
        return fat_diagonal_quotient(self.pd, l)

    def _enumerate(self) -> None:
        self.basis: List[Key] = []
        self.bidegrees: List[Tuple[int, int]] = []
        g = 2 * self.m - 1
        for mono in self.monomials():
            for coef in self.coefficient_basis(mono):
                self.basis.append((mono, coef))
                self.bidegrees.append((tensor_degree(self.algebras, coef) + g * len(mono), len(mono)))
        self.index: Dict[Key, int] = {k: i for i, k in enumerate(self.basis)}
        self._blocks: Dict[Tuple[int, int], List[int]] = {}
        for i, bd in enumerate(self.bidegrees):
            self._blocks.setdefault(bd, []).append(i)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def bidegree_blocks(self) -> Dict[Tuple[int, int], List[int]]:
        return self._blocks

    def block(self, p: int, q: int) -> List[int]:
        return self._blocks.get((p, q), [])

    def describe(self, idx: int) -> str:
        mono, coef = self.basis[idx]
        occupied = {i - 1 for i, _ in mono}
        word = "⊗".join(
            a.labels[b] for s, (a, b) in enumerate(zip(self.algebras, coef)) if s not in occupied)
        gs = "".join(f"G{i},{j}" for i, j in mono)
        return f"({word or '1'}){gs}"

    # ------------------------------------------------------------ rewriting
    def push(self, coef: Coef, mono: Monomial) -> Dict[Coef, Fraction]:
        """Move coefficient content out of occupied slots via ``i_i(x)G_ij = i_j(x)G_ij``.

        Pairs are handled by decreasing first index, so content flows down
        a strictly decreasing chain and ends in a free slot.
        """
        key = (coef, mono)
        hit = self._push_cache.get(key)
        if hit is not None:
            return hit
        current = {coef: Fraction(1)}
        units = self.units
        for i, j in sorted(mono, reverse=True):
            s_from, s_to = i - 1, j - 1
            nxt: Dict[Coef, Fraction] = {}
            for t, c in current.items():
                if t[s_from] == units[s_from]:
                    nxt[t] = nxt.get(t, 0) + c
                    continue
                factors = [(s_to if s == s_from else s, b) for s, b in enumerate(t) if b != units[s]]
                add_into(nxt, place(self.algebras, factors), c)
            current = nxt
        self._push_cache[key] = current
        return current

    def _to_basis(self, mono: Monomial, coef: Coef, c, out: Vec) -> None:
        if self.kind == "j":
            occupied = {i - 1 for i, _ in mono}
            free = [s for s in range(self.n) if s not in occupied]
            q = self.quotient(len(free))
            compressed = tuple(coef[s] for s in free)
            for t, v in q.project_basis(compressed).items():
                full = list(self.units)
                for s, b in zip(free, t):
                    full[s] = b
                idx = self.index[(mono, tuple(full))]
                new = out.get(idx, 0) + c * v
                if new:
                    out[idx] = new
                else:
                    out.pop(idx, None)
            return
        idx = self.index[(mono, coef)]
        new = out.get(idx, 0) + c
        if new:
            out[idx] = new
        else:
            out.pop(idx, None)

    def normalize(self, terms: Dict[Tuple[Coef, Tuple[Pair, ...]], Fraction]) -> Vec:
        """Normal form of ``sum c * coef * word`` as a vector on the basis.

        ``coef`` is any basis tensor (all slots); ``word`` any product of
        generators, in any order and with either index first.
        """
        out: Vec = {}
        for (coef, word), c in terms.items():
            if not c:
                continue
            word = tuple(sym(p) for p in word)
            for i, j in word:
                if not self.allowed(i, j):
                    raise ModelError(f"G_{i},{j} is not a generator of this model")
            for mono, s in reduce_word(word):
                for t, v in self.push(coef, mono).items():
                    self._to_basis(mono, t, c * s * v, out)
        return out

    # ------------------------------------------------------------ structure
    def nabla_at(self, i: int, j: int) -> Dict[Coef, Fraction]:
        """``nabla_ij`` placed in slots ``i`` and ``j`` of the full tensor power."""
        key = (i, j)
        hit = self._nabla_cache.get(key)
        if hit is None:
            blk = self.blocks[self._block_of[i - 1]]
            if blk.nabla is None:
                hit = {}
            else:
                hit = insert(blk.nabla, (i, j), self.algebras).terms
            self._nabla_cache[key] = hit
        return hit

    def d(self, idx: int) -> Vec:
        """Differential of a basis element (memoised)."""
        hit = self._d_cache.get(idx)
        if hit is not None:
            return hit
        mono, coef = self.basis[idx]
        sign0 = -1 if tensor_degree(self.algebras, coef) % 2 else 1
        terms: Dict[Tuple[Coef, Tuple[Pair, ...]], Fraction] = {}
        for s, (i, j) in enumerate(mono):
            nab = self.nabla_at(i, j)
            if not nab:
                continue
            rest = mono[:s] + mono[s + 1:]
            sign = sign0 * (-1 if s % 2 else 1)
            for u, c in nab.items():
                for t, v in mul_basis_tensors(self.algebras, coef, u).items():
                    key = (t, rest)
                    terms[key] = terms.get(key, 0) + sign * c * v
        out = self.normalize(terms)
        self._d_cache[idx] = out
        return out

    def apply_d(self, vec: Vec) -> Vec:
        out: Vec = {}
        for i, c in vec.items():
            add_into(out, self.d(i), c)
        return out

    def multiply_basis(self, a: int, b: int) -> Vec:
        m1, t1 = self.basis[a]
        m2, t2 = self.basis[b]
        sign = -1 if len(m1) % 2 and tensor_degree(self.algebras, t2) % 2 else 1
        terms = {}
        for t, v in mul_basis_tensors(self.algebras, t1, t2).items():
            key = (t, m1 + m2)
            terms[key] = terms.get(key, 0) + sign * v
        return self.normalize(terms)

    def multiply(self, x: Vec, y: Vec) -> Vec:
        out: Vec = {}
        for a, ca in x.items():
            for b, cb in y.items():
                add_into(out, self.multiply_basis(a, b), ca * cb)
        return out

    def unit_index(self) -> int:
        return self.index[((), self.units)]

    def element(self, coef: Sequence[int], word: Sequence[Pair] = (), c=1) -> Vec:
        """Normal form of a single ``coef * word`` (1-based pairs, any order)."""
        return self.normalize({(tuple(coef), tuple(word)): Fraction(c)})

    def label_tensor(self, labels: Sequence[str]) -> Coef:
        return tuple(a.index(l) for a, l in zip(self.algebras, labels))

    # ---------------------------------------------------------- invariants
    def check_d_squared(self) -> List[int]:
        """Basis elements with ``d(d(x)) != 0`` (empty when ``d^2 = 0``)."""
        return [i for i in range(self.dim) if self.apply_d(self.d(i))]

    def check_bidegree(self) -> List[int]:
        bad = []
        for i in range(self.dim):
            p, q = self.bidegrees[i]
            if any(self.bidegrees[k] != (p + 1, q - 1) for k in self.d(i)):
                bad.append(i)
        return bad

    def __repr__(self):
        return f"Model({self.kind}, {self.name}, n={self.n}, dim={self.dim})"


# -------------------------------------------------------------- builders

def build_generic(A: GradedAlgebra, nabla: Optional[TensorElement], n: int, m: int,
                  kind: str = "kriz", name: str = "", pd: Optional[PDAlgebra] = None) -> Model:
    """``E_n(A, nabla)`` for any coefficient algebra and diagonal-like class."""
    if n < 0:
        raise ModelError("n must be non-negative")
    blocks = [Block(A, 0, n, nabla, A.name)] if n else []
    return Model(kind, blocks, m, name or f"E{n}({A.name})", pd=pd)


_MODEL_CACHE: Dict[Tuple[str, int, int], Model] = {}


def build_model(kind: str, H: PDAlgebra, n: int) -> Model:
    """Build ``E_n(H)``, ``J_n(H)`` or ``E_n(H°)`` (memoised per algebra object)."""
    kind = kind.lower()
    if kind not in KINDS:
        raise ModelError(f"unknown model kind {kind!r}")
    if n < 0 or (n < 1 and kind == "j"):
        raise ModelError("n must be non-negative (at least 1 for the J-model)")
    key = (kind, id(H), n)
    hit = _MODEL_CACHE.get(key)
    if hit is not None and hit.pd is H:
        return hit
    if kind == "kriz":
        model = build_generic(H.algebra, diagonal_class(H), n, H.m, "kriz", f"E{n}({H.name})", pd=H)
    elif kind == "punctured":
        P, dbar = puncture(H)
        model = build_generic(P.algebra, dbar, n, H.m, "punctured", f"E{n}({H.name}°)", pd=H)
        model.punctured = P
    else:
        blocks = [Block(H.algebra, 0, n, diagonal_class(H), H.name)]
        model = Model("j", blocks, H.m, f"J{n}({H.name})", min_j=2, pd=H)
    _MODEL_CACHE[key] = model
    return model


def build_block_model(parts: Sequence[Tuple[GradedAlgebra, Optional[TensorElement], int]], m: int,
                      name: str = "") -> Model:
    """Tensor product of models ``E_{n_k}(A_k, nabla_k)``, one block each."""
    blocks = []
    start = 0
    for A, nabla, size in parts:
        if size == 0:
            continue
        blocks.append(Block(A, start, start + size, nabla, A.name))
        start += size
    return Model("block", blocks, m, name)


@lru_cache(maxsize=None)
def ground_algebra() -> GradedAlgebra:
    """The one-dimensional algebra Q, coefficients of the Arnold algebras."""
    return GradedAlgebra("Q", ("1",), (0,), 0, {(0, 0): {0: Fraction(1)}})


def arnold_algebra(k: int, m: int) -> Model:
    """Cohomology of ``F(R^2m, k)``: Arnold relations, trivial coefficients, zero differential."""
    return build_block_model([(ground_algebra(), None, k)], m, f"A{k}")


# ------------------------------------------------------------ dimensions

def count_I(n: int) -> Dict[int, int]:
    """``|I_k|``: monomials with distinct first indices ``i >= 2`` and any ``j < i``."""
    poly = [1]
    for i in range(2, n + 1):
        poly = [a + (i - 1) * b for a, b in zip(poly + [0], [0] + poly)]
    return {k: c for k, c in enumerate(poly)}


def count_J(n: int) -> Dict[int, int]:
    """``|J_k|``: first indices ``i >= 3``, second indices ``2 <= j < i``."""
    poly = [1]
    for i in range(3, n + 1):
        poly = [a + (i - 2) * b for a, b in zip(poly + [0], [0] + poly)]
    return {k: c for k, c in enumerate(poly)}


def predicted_dim(kind: str, dim_h: int, n: int) -> int:
    """Total dimension from the normal-form decompositions (closed form)."""
    if kind in ("kriz", "punctured"):
        a = dim_h if kind == "kriz" else dim_h - 1
        return sum(c * a ** (n - k) for k, c in count_I(n).items())
    return sum(c * dim_h * (dim_h - 1) ** (n - k - 1) for k, c in count_J(n).items())


# ------------------------------------------------------------ chain maps

class ChainMap:
    """A bidegree-preserving linear map between models, given on basis elements."""

    def __init__(self, source, target, image: Callable[[int], Vec], name: str = ""):
        self.source = source
        self.target = target
        self._image = image
        self._cache: Dict[int, Vec] = {}
        self.name = name

    def __call__(self, idx: int) -> Vec:
        hit = self._cache.get(idx)
        if hit is None:
            hit = self._image(idx)
            self._cache[idx] = hit
        return hit

    def apply(self, vec: Vec) -> Vec:
        out: Vec = {}
        for i, c in vec.items():
            add_into(out, self(i), c)
        return out

    def matrix_block(self, p: int, q: int) -> Dict[int, Vec]:
        return {i: self(i) for i in self.source.block(p, q)}

    def homogeneity_violations(self) -> List[int]:
        bad = []
        for i in range(self.source.dim):
            bd = self.source.bidegrees[i]
            if any(self.target.bidegrees[k] != bd for k in self(i)):
                bad.append(i)
        return bad

    def chain_violations(self, stop_at_first: bool = False) -> List[int]:
        """Basis elements where ``d f != f d``."""
        bad = []
        for i in range(self.source.dim):
            if self.target.apply_d(self(i)) != self.apply(self.source.d(i)):
                bad.append(i)
                if stop_at_first:
                    break
        return bad

    def is_chain_map(self) -> bool:
        return not self.chain_violations(stop_at_first=True)

    def multiplicativity_violations(self, pairs: Iterable[Tuple[int, int]]) -> List[Tuple[int, int]]:
        bad = []
        for a, b in pairs:
            lhs = self.apply(self.source.multiply_basis(a, b))
            rhs = self.target.multiply(self(a), self(b))
            if lhs != rhs:
                bad.append((a, b))
        return bad

    def compose(self, other: "ChainMap", name: str = "") -> "ChainMap":
        """``self o other``."""
        return ChainMap(other.source, self.target, lambda i: self.apply(other(i)), name)


SlotRule = Tuple[Optional[int], Optional[Sequence[Dict[int, Fraction]]]]


def generator_map(source: Model, target: Model, slot_rules: Sequence[SlotRule],
                  g_rule: Callable[[int, int], Optional[Pair]], name: str = "") -> ChainMap:
    """Multiplicative map determined by its values on generators.

    ``slot_rules[s] = (t, images)`` sends ``i_{s+1}(b)`` to ``i_{t+1}(images[b])``
    (``images=None`` means the identity of the slot algebra); ``t=None``
    sends it to the scalar ``augmentation(b)``.  ``g_rule(i, j)`` returns the
    image pair of ``G_ij`` or ``None`` for zero.  Basis elements are mapped
    through their ordered-product expression, so Koszul signs are automatic.
    """
    algs_t = target.algebras

    def image(idx: int) -> Vec:
        mono, coef = source.basis[idx]
        word = []
        for i, j in mono:
            img = g_rule(i, j)
            if img is None:
                return {}
            word.append(img)
        choices: List[List[Tuple[Optional[Tuple[int, int]], Fraction]]] = []
        for s, b in enumerate(coef):
            if b == source.units[s]:
                continue
            t, images = slot_rules[s]
            if t is None:
                # augmentation kills positive degrees
                return {}
            vec = {b: Fraction(1)} if images is None else images[b]
            if not vec:
                return {}
            choices.append([((t, k), c) for k, c in vec.items()])
        terms: Dict[Tuple[Coef, Tuple[Pair, ...]], Fraction] = {}
        w = tuple(word)
        for combo in cartesian(*choices):
            c = Fraction(1)
            factors = []
            for f, v in combo:
                c *= v
                factors.append(f)
            for t, v in place(algs_t, factors).items():
                key = (t, w)
                terms[key] = terms.get(key, 0) + c * v
        return target.normalize(terms)

    return ChainMap(source, target, image, name)


def identity_rules(n: int) -> List[SlotRule]:
    return [(s, None) for s in range(n)]


# ------------------------------------------------------------ psi and the reduction over H

def psi(H: PDAlgebra, n: int) -> ChainMap:
    """The projection ``E_n(H) -> J_n(H)``: coefficients mod the fat diagonal, ``G_j1 -> 0``."""
    E = build_model("kriz", H, n)
    J = build_model("j", H, n)
    f = generator_map(E, J, identity_rules(n), lambda i, j: None if j == 1 else (i, j), f"Psi{n}({H.name})")
    return f


def verify_chain_map(f: ChainMap) -> None:
    bad = f.chain_violations(stop_at_first=True)
    if bad:
        raise ChainMapViolation(f"{f.name}: d f != f d at {f.source.describe(bad[0])}")


@dataclass
class ReducedModel:
    """``Q (x)_H J_n(H)``: the J-model modulo ``H^+`` acting on slot 1.

    ``basis`` lists the J-model basis elements whose slot-1 coefficient is
    the unit; they form a basis of the quotient.  ``iso`` sends them to the
    punctured model on ``n - 1`` points.
    """

    J: Model
    target: Model
    basis: List[int]
    iso: Dict[int, int]
    report: Dict[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        self.local = {g: k for k, g in enumerate(self.basis)}
        self.bidegrees = [self.J.bidegrees[g] for g in self.basis]
        self._blocks: Dict[Tuple[int, int], List[int]] = {}
        for k, bd in enumerate(self.bidegrees):
            self._blocks.setdefault(bd, []).append(k)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def bidegree_blocks(self):
        return self._blocks

    def block(self, p, q):
        return self._blocks.get((p, q), [])

    def reduce(self, vec: Vec) -> Vec:
        return {self.local[g]: c for g, c in vec.items() if g in self.local}

    def d(self, k: int) -> Vec:
        return self.reduce(self.J.d(self.basis[k]))

    def apply_d(self, vec: Vec) -> Vec:
        out: Vec = {}
        for i, c in vec.items():
            add_into(out, self.d(i), c)
        return out

    def as_chain_map(self) -> ChainMap:
        return ChainMap(self, self.target, lambda k: {self.iso[k]: Fraction(1)}, "reduction-iso")


def reduce_over_H(H: PDAlgebra, n: int, multiplicative_pairs: Optional[int] = 400,
                  seed: int = 0) -> ReducedModel:
    """Build ``Q (x)_(H,0) J_n(H)`` and its relabelling isomorphism onto ``E_{n-1}(H°)``.

    Slot ``i`` goes to ``i - 1`` and ``G_ij`` to ``G_{i-1,j-1}``.  The map is
    checked to be a bijection of bases, bidegree preserving, a chain map and
    multiplicative (on all pairs, or ``multiplicative_pairs`` random pairs
    when there are more); any failure raises :class:`IsoViolation`.
    """
    if n < 2:
        raise ModelError("reduction needs n >= 2")
    J = build_model("j", H, n)
    E = build_model("punctured", H, n - 1)
    P = E.punctured
    unit = H.algebra.unit
    basis = [g for g, (mono, coef) in enumerate(J.basis) if coef[0] == unit]
    iso: Dict[int, int] = {}
    for k, g in enumerate(basis):
        mono, coef = J.basis[g]
        new_mono = tuple((i - 1, j - 1) for i, j in mono)
        new_coef = []
        for b in coef[1:]:
            pb = P.projection[b]
            if pb is None:
                raise IsoViolation(f"orientation class in a section slot of {J.describe(g)}")
            new_coef.append(pb)
        key = (new_mono, tuple(new_coef))
        if key not in E.index:
            raise IsoViolation(f"{J.describe(g)} has no counterpart")
        iso[k] = E.index[key]
    R = ReducedModel(J, E, basis, iso)
    if len(set(iso.values())) != len(iso) or len(iso) != E.dim:
        raise IsoViolation("relabelling is not a bijection of bases")
    R.report["bijection"] = True
    for k, t in iso.items():
        if R.bidegrees[k] != E.bidegrees[t]:
            raise IsoViolation(f"bidegree changes at {J.describe(basis[k])}")
    R.report["bidegree"] = True
    f = R.as_chain_map()
    bad = f.chain_violations(stop_at_first=True)
    if bad:
        raise IsoViolation(f"not a chain map at {J.describe(basis[bad[0]])}")
    R.report["chain_map"] = True
    pairs = [(a, b) for a in range(R.dim) for b in range(R.dim)]
    if multiplicative_pairs is not None and len(pairs) > multiplicative_pairs:
        rng = random.Random(seed)
        pairs = rng.sample(pairs, multiplicative_pairs)
    for a, b in pairs:
        lhs = R.reduce(J.multiply_basis(basis[a], basis[b]))
        lhs = {iso[k]: c for k, c in lhs.items()}
        if lhs != E.multiply_basis(iso[a], iso[b]):
            raise IsoViolation(f"not multiplicative at {J.describe(basis[a])} * {J.describe(basis[b])}")
    R.report["multiplicative"] = True
    return R


# ------------------------------------------------------------ confluence

def random_normal_form(model: Model, coef: Coef, word: Sequence[Pair], rng: random.Random,
                       max_steps: int = 100000) -> Vec:
    """Reduce ``coef * word`` applying rewrite rules in a random order.

    Rules, each picked at random among the applicable ones on a random term:
    an adjacent transposition of out-of-order generators (sign ``-1``, or zero
    on a repeat), the Arnold rule on an adjacent pair sharing its first
    index, and a push of slot content along any ``G_ij`` (``i > j``) from
    slot ``i`` to slot ``j``.  The result must agree with :meth:`Model.normalize`.
    """
    terms: Dict[Tuple[Coef, Tuple[Pair, ...]], Fraction] = {
        (tuple(coef), tuple(sym(p) for p in word)): Fraction(1)}
    units = model.units
    done: Vec = {}

    def moves(key):
        t, w = key
        out = []
        for a in range(len(w) - 1):
            if w[a] >= w[a + 1]:
                out.append(("swap", a))
            if w[a][0] == w[a + 1][0] and w[a] != w[a + 1]:
                out.append(("arnold", a))
        for i, j in w:
            if t[i - 1] != units[i - 1]:
                out.append(("push", (i, j)))
        return out

    def add(target, key, c):
        v = target.get(key, 0) + c
        if v:
            target[key] = v
        else:
            target.pop(key, None)

    for _ in range(max_steps):
        live = [(k, c) for k, c in terms.items() if c]
        if not live:
            break
        key, c = live[rng.randrange(len(live))]
        options = moves(key)
        t, w = key
        del terms[key]
        if not options:
            model._to_basis(w, t, c, done)
            continue
        kind, arg = options[rng.randrange(len(options))]
        if kind == "swap":
            a = arg
            if w[a] == w[a + 1]:
                continue
            add(terms, (t, w[:a] + (w[a + 1], w[a]) + w[a + 2:]), -c)
        elif kind == "arnold":
            a = arg
            (i, x), (_, y) = w[a], w[a + 1]
            pre, post = w[:a], w[a + 2:]
            # G_ix G_iy = G_xy G_iy - G_xy G_ix for x > y (and antisymmetry otherwise)
            s = 1
            if x < y:
                x, y, s = y, x, -1
            add(terms, (t, pre + ((x, y), (i, y)) + post), s * c)
            add(terms, (t, pre + ((x, y), (i, x)) + post), -s * c)
        else:
            i, j = arg
            factors = [((j - 1) if s_ == i - 1 else s_, b) for s_, b in enumerate(t) if b != units[s_]]
            for u, v in place(model.algebras, factors).items():
                add(terms, (u, w), c * v)
    else:
        raise RuntimeError("rewriting did not terminate")
    return done
