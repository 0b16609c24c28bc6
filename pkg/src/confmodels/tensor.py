"""Tensor powers of graded algebras.

A basis tensor is a tuple of basis indices, one per slot, read as the
ordered product ``i_1(b_1) i_2(b_2) ... i_n(b_n)`` of slot insertions.  All
Koszul signs in the package come from that single convention: moving a
factor of degree ``p`` past one of degree ``q`` costs ``(-1)^(p q)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as cartesian
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .linalg import add_into, rref

BasisTensor = Tuple[int, ...]
Terms = Dict[BasisTensor, Fraction]


class TensorError(ValueError):
    pass


class NonInjective(TensorError):
    pass


class ArityMismatch(TensorError):
    pass


class SectionNotBasis(AssertionError):
    """The section of the fat-diagonal quotient failed to be a basis."""


def tensor_degree(algebras: Sequence, t: BasisTensor) -> int:
    return sum(a.degrees[i] for a, i in zip(algebras, t))


def sort_sign(items: Sequence[Tuple[int, int]]) -> int:
    """Koszul sign of stably sorting ``(key, degree)`` pairs by key."""
    sign = 1
    n = len(items)
    for a in range(n):
        ka, da = items[a]
        if not da % 2:
            continue
        for b in range(a + 1, n):
            kb, db = items[b]
            if kb < ka and db % 2:
                sign = -sign
    return sign


def mul_basis_tensors(algebras: Sequence, u: BasisTensor, v: BasisTensor) -> Terms:
    """``u * v`` slotwise with sign ``(-1)^(sum_{i>j} |u_i||v_j|)``."""
    parity = 0
    odd_u_after = 0
    for i in range(len(u) - 1, -1, -1):
        if algebras[i].degrees[v[i]] % 2 and odd_u_after:
            parity ^= 1
        if algebras[i].degrees[u[i]] % 2:
            odd_u_after ^= 1
    sign = -1 if parity else 1
    factors = []
    for alg, a, b in zip(algebras, u, v):
        if a == alg.unit:
            factors.append(((b, 1),))
        elif b == alg.unit:
            factors.append(((a, 1),))
        else:
            prod = alg.mul_basis(a, b)
            if not prod:
                return {}
            factors.append(tuple(prod.items()))
    out: Terms = {}
    for combo in cartesian(*factors):
        c = sign
        t = []
        for k, coef in combo:
            c *= coef
            t.append(k)
        t = tuple(t)
        out[t] = out.get(t, 0) + c
    return {k: v for k, v in out.items() if v}


def right_mul_slot(algebras: Sequence, t: BasisTensor, slot: int, b: int) -> Terms:
    """``t * i_slot(b)`` for a 0-based ``slot``."""
    alg = algebras[slot]
    db = alg.degrees[b]
    sign = 1
    if db % 2:
        later = sum(algebras[i].degrees[t[i]] for i in range(slot + 1, len(t)))
        if later % 2:
            sign = -1
    if b == alg.unit:
        return {t: Fraction(sign)}
    prod = alg.mul_basis(t[slot], b)
    out = {}
    for k, c in prod.items():
        out[t[:slot] + (k,) + t[slot + 1:]] = sign * c
    return out


def place(algebras: Sequence, factors: Iterable[Tuple[int, int]]) -> Terms:
    """Ordered product of slot insertions ``i_{s}(b)`` for ``(s, b)`` in ``factors`` (0-based slots)."""
    current: Terms = {tuple(a.unit for a in algebras): Fraction(1)}
    for slot, b in factors:
        nxt: Terms = {}
        for t, c in current.items():
            add_into(nxt, right_mul_slot(algebras, t, slot, b), c)
        current = nxt
        if not current:
            break
    return current


@dataclass(frozen=True, eq=False)
class TensorElement:
    """Exact linear combination of basis tensors over fixed slot algebras."""

    algebras: Tuple
    terms: Terms

    def __post_init__(self):
        clean = {tuple(k): Fraction(v) for k, v in self.terms.items() if v}
        for k in clean:
            if len(k) != len(self.algebras):
                raise ArityMismatch(f"tensor {k} has wrong arity")
        object.__setattr__(self, "terms", clean)

    @property
    def arity(self) -> int:
        return len(self.algebras)

    def degrees(self) -> set:
        return {tensor_degree(self.algebras, t) for t in self.terms}

    def degree(self) -> Optional[int]:
        ds = self.degrees()
        if len(ds) > 1:
            raise TensorError("element is not homogeneous")
        return ds.pop() if ds else None

    def __eq__(self, other):
        if not isinstance(other, TensorElement):
            return NotImplemented
        return self.arity == other.arity and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "TensorElement") -> "TensorElement":
        _check_compatible(self, other)
        return TensorElement(self.algebras, add_into(dict(self.terms), other.terms))

    def __sub__(self, other: "TensorElement") -> "TensorElement":
        _check_compatible(self, other)
        return TensorElement(self.algebras, add_into(dict(self.terms), other.terms, -1))

    def __neg__(self):
        return TensorElement(self.algebras, {k: -v for k, v in self.terms.items()})

    def scale(self, c) -> "TensorElement":
        return TensorElement(self.algebras, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, TensorElement):
            return multiply(self, other)
        return self.scale(other)

    __rmul__ = scale

    def is_zero(self) -> bool:
        return not self.terms

    def pretty(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for t in sorted(self.terms):
            c = self.terms[t]
            word = "⊗".join(a.labels[i] for a, i in zip(self.algebras, t))
            parts.append(f"{c}*{word}" if c != 1 else word)
        return " + ".join(parts)

    __str__ = pretty


def _check_compatible(x: TensorElement, y: TensorElement) -> None:
    if x.arity != y.arity or any(a is not b for a, b in zip(x.algebras, y.algebras)):
        raise ArityMismatch("tensor elements live in different spaces")


def basis_tensor(algebras: Sequence, t: Sequence[int], coeff=1) -> TensorElement:
    return TensorElement(tuple(algebras), {tuple(t): Fraction(coeff)})


def unit_tensor(algebras: Sequence) -> TensorElement:
    return basis_tensor(algebras, [a.unit for a in algebras])


def multiply(u: TensorElement, v: TensorElement) -> TensorElement:
    """Product in the tensor power with the Koszul sign convention."""
    _check_compatible(u, v)
    out: Terms = {}
    for s, a in u.terms.items():
        for t, b in v.terms.items():
            add_into(out, mul_basis_tensors(u.algebras, s, t), a * b)
    return TensorElement(u.algebras, out)


def insert(x: TensorElement, phi: Sequence[int], target: Union[int, Sequence]) -> TensorElement:
    """Insertion along an injective map ``phi`` (1-based target slots).

    Factor ``s`` of ``x`` goes to slot ``phi[s]``; the rest of the slots carry
    units.  For a non-monotone ``phi`` this equals the slot-ordered insertion
    precomposed with the signed permutation of factors, which is the same as
    the ordered product ``i_phi(1)(x_1) ... i_phi(k)(x_k)``.
    """
    phi = tuple(phi)
    if len(phi) != x.arity:
        raise ArityMismatch(f"map of length {len(phi)} for arity {x.arity}")
    if len(set(phi)) != len(phi):
        raise NonInjective(f"{phi} is not injective")
    if isinstance(target, int):
        if len({id(a) for a in x.algebras}) > 1:
            raise ArityMismatch("give target algebras explicitly for mixed slots")
        algebras = tuple(x.algebras[0] for _ in range(target)) if x.arity else ()
    else:
        algebras = tuple(target)
    n = len(algebras)
    if any(not 1 <= p <= n for p in phi):
        raise ArityMismatch(f"{phi} does not land in {{1..{n}}}")
    for s, p in enumerate(phi):
        if algebras[p - 1] is not x.algebras[s]:
            raise ArityMismatch(f"slot {p} holds a different algebra")
    out: Terms = {}
    for t, c in x.terms.items():
        items = [(p - 1, t[s]) for s, p in enumerate(phi)]
        sign = sort_sign([(p, x.algebras[s].degrees[t[s]]) for s, (p, _) in enumerate(items)])
        full = [a.unit for a in algebras]
        for p, b in items:
            full[p] = b
        key = tuple(full)
        out[key] = out.get(key, 0) + sign * c
    return TensorElement(algebras, out)


def flip(x: TensorElement) -> TensorElement:
    """Graded flip ``a (x) b -> (-1)^|a||b| b (x) a``."""
    if x.arity != 2:
        raise ArityMismatch("flip needs arity 2")
    return insert(x, (2, 1), (x.algebras[1], x.algebras[0]))


class FatDiagonalQuotient:
    """``H^{(x)l}`` modulo the ideal generated by ``D_21, ..., D_l1``.

    The quotient is described through the section spanned by basis tensors
    whose slots ``2..l`` avoid the orientation class, i.e. the image of
    ``H (x) H°^{(x)(l-1)}``.  Per degree the ideal is row reduced with the
    non-section tensors preferred as pivots; the quotient is a complement
    exactly when the pivots are the non-section tensors, which is checked.
    Degrees are built lazily and memoised.
    """

    def __init__(self, H, l: int):
        from .algebra import diagonal_class

        if l < 1:
            raise ValueError("l must be positive")
        self.H = H
        self.l = l
        alg = H.algebra
        self.algebra = alg
        self.algebras = tuple(alg for _ in range(l))
        self.delta = diagonal_class(H)
        self._by_degree: Dict[int, List[BasisTensor]] = {}
        for t in cartesian(range(alg.dim), repeat=l):
            self._by_degree.setdefault(tensor_degree(self.algebras, t), []).append(t)
        self._reduced: Dict[int, Dict[BasisTensor, Terms]] = {}
        self._ideal_rank: Dict[int, int] = {}
        self._diagonals = [insert(self.delta, (s, 1), self.algebras) for s in range(2, l + 1)]

    def is_section(self, t: BasisTensor) -> bool:
        w = self.H.orientation
        return all(b != w for b in t[1:])

    def section_basis(self, degree: Optional[int] = None) -> List[BasisTensor]:
        if degree is None:
            return [t for d in sorted(self._by_degree) for t in self._by_degree[d] if self.is_section(t)]
        return [t for t in self._by_degree.get(degree, []) if self.is_section(t)]

    def degrees(self) -> List[int]:
        return sorted(self._by_degree)

    def ideal_generators(self, degree: int) -> List[Terms]:
        """``D_s1 * t`` for every basis tensor ``t`` with a unit in slot ``s``.

        Tensors with content in slot ``s`` add nothing: ``(a)_s D_s1 = (a)_1 D_s1``.
        """
        alg = self.algebra
        gens = []
        d0 = degree - self.H.formal_dimension
        for idx, diag in enumerate(self._diagonals):
            s = idx + 1
            for t in self._by_degree.get(d0, []):
                if t[s] != alg.unit:
                    continue
                out: Terms = {}
                for u, c in diag.terms.items():
                    add_into(out, mul_basis_tensors(self.algebras, u, t), c)
                if out:
                    gens.append(out)
        return gens

    def _build(self, degree: int) -> Dict[BasisTensor, Terms]:
        if degree in self._reduced:
            return self._reduced[degree]
        tensors = self._by_degree.get(degree, [])
        non_section = [t for t in tensors if not self.is_section(t)]
        section = [t for t in tensors if self.is_section(t)]
        order = {t: k for k, t in enumerate(non_section + section)}
        rows = rref(self.ideal_generators(degree), order)
        if set(rows) != set(non_section):
            raise SectionNotBasis(
                f"degree {degree}: ideal rank {len(rows)}, expected {len(non_section)} "
                f"(quotient must have the dimension of H (x) H°^(l-1))")
        reduced = {}
        for t, row in rows.items():
            reduced[t] = {k: -v for k, v in row.items() if k != t}
        self._reduced[degree] = reduced
        self._ideal_rank[degree] = len(rows)
        return reduced

    def quotient_dim(self, degree: int) -> int:
        self._build(degree)
        return len(self._by_degree.get(degree, [])) - self._ideal_rank[degree]

    def project_basis(self, t: BasisTensor) -> Terms:
        """Section coordinates of the class of a basis tensor."""
        if self.is_section(t):
            return {t: Fraction(1)}
        return self._build(tensor_degree(self.algebras, t))[t]

    def project(self, x: Union[TensorElement, Terms]) -> Terms:
        terms = x.terms if isinstance(x, TensorElement) else x
        out: Terms = {}
        for t, c in terms.items():
            add_into(out, self.project_basis(t), c)
        return out

    def section(self, coords: Terms) -> TensorElement:
        return TensorElement(self.algebras, dict(coords))


@lru_cache(maxsize=None)
def _quotient_cached(H, l):
    return FatDiagonalQuotient(H, l)


def fat_diagonal_quotient(H, l: int) -> FatDiagonalQuotient:
    """Memoised quotient ``H^{(x)l}/(D_21, ..., D_l1)``."""
    return _quotient_cached(H, l)


def project(q: FatDiagonalQuotient, x) -> Terms:
    return q.project(x)
