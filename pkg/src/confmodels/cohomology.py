"""Bigraded cohomology of models and the maps they induce.

Complexes are anything exposing ``bidegree_blocks()``, ``block(p, q)`` and
``d(i)`` with ``d`` of bidegree ``(+1, -1)``; the differential splits into
blocks and ranks are computed block by block with exact elimination.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .linalg import Coordinates, Echelon, add_into, kernel, rank, to_integer_row

Bidegree = Tuple[int, int]


def _restrict(vec: Dict[int, Fraction], cols: Dict[int, int]) -> Dict[int, Fraction]:
    return {cols[k]: v for k, v in vec.items() if k in cols}


@dataclass
class Cohomology:
    """Betti numbers of a bigraded complex, keyed by ``(p, q)``."""

    betti: Dict[Bidegree, int]
    chain_dims: Dict[Bidegree, int] = field(default_factory=dict)
    ranks: Dict[Bidegree, int] = field(default_factory=dict)

    def nonzero(self) -> Dict[Bidegree, int]:
        return {k: v for k, v in sorted(self.betti.items()) if v}

    def total(self) -> int:
        return sum(self.betti.values())

    def poly(self) -> "Poly":
        """Poincaré polynomial in ``t`` (total degree ``p``) and ``s`` (weight ``q``)."""
        return Poly({(p, q): b for (p, q), b in self.betti.items() if b})


def differential_rank(C, p: int, q: int) -> int:
    """Rank of ``d: C^{p,q} -> C^{p+1,q-1}``."""
    src = C.block(p, q)
    if not src or not C.block(p + 1, q - 1):
        return 0
    return rank(C.d(i) for i in src)


def betti(C, check: bool = True) -> Cohomology:
    blocks = C.bidegree_blocks()
    ranks = {bd: differential_rank(C, *bd) for bd in blocks}
    out = {}
    for (p, q), idx in blocks.items():
        incoming = ranks.get((p - 1, q + 1), 0)
        b = len(idx) - ranks[(p, q)] - incoming
        if check and b < 0:
            raise ArithmeticError(f"negative Betti number at {(p, q)}")
        out[(p, q)] = b
    return Cohomology(out, {bd: len(v) for bd, v in blocks.items()}, ranks)


@dataclass
class CohomologyBasis:
    """Cocycle representatives of a basis of ``H^{p,q}`` and coordinates on it."""

    reps: List[Dict[int, Fraction]]
    coords: Optional[Coordinates]

    def coordinates(self, cocycle: Dict[int, Fraction]) -> Dict[int, Fraction]:
        if self.coords is None:
            if cocycle:
                raise ValueError("non-zero cocycle in a zero cohomology group")
            return {}
        return self.coords.solve(cocycle)


def cohomology_basis(C, p: int, q: int) -> CohomologyBasis:
    """Cocycles spanning ``H^{p,q}``, with coordinates modulo coboundaries."""
    src = C.block(p, q)
    images = [C.d(i) for i in src]
    cycles = [{src[k]: c for k, c in rel.items()} for rel in kernel(images)]
    boundaries = [C.d(i) for i in C.block(p - 1, q + 1)]
    boundaries = [b for b in boundaries if b]
    ech = Echelon()
    for b in boundaries:
        ech.add(b)
    reps = []
    for z in cycles:
        if ech.add(z):
            reps.append(z)
    if not reps:
        return CohomologyBasis([], None)
    return CohomologyBasis(reps, Coordinates(reps, boundaries))


def induced_map(f, p: int, q: int) -> List[Dict[int, Fraction]]:
    """Matrix of ``H^{p,q}(f)``: row ``k`` gives the image of the ``k``-th source class."""
    hs = cohomology_basis(f.source, p, q)
    ht = cohomology_basis(f.target, p, q)
    return [ht.coordinates(f.apply(z)) for z in hs.reps]


def induced_rank(f, p: int, q: int) -> int:
    return rank(induced_map(f, p, q))


def is_quasi_iso(f) -> bool:
    """Does ``f`` induce isomorphisms in every bidegree?"""
    bs = betti(f.source).betti
    bt = betti(f.target).betti
    for bd in set(bs) | set(bt):
        if bs.get(bd, 0) != bt.get(bd, 0):
            return False
        if bs.get(bd, 0) and induced_rank(f, *bd) != bs[bd]:
            return False
    return True


def euler_by_antidiagonal(C, weight: str = "chain") -> Dict[int, int]:
    """Euler characteristics of the subcomplexes of constant ``p + q``.

    The differential maps ``(p, q)`` to ``(p+1, q-1)``, so each ``r = p + q``
    is a subcomplex; its Euler characteristic in ``p`` is preserved by
    passing to cohomology.  Returns ``{r: sum (-1)^p dim}``.
    """
    out: Dict[int, int] = {}
    if weight == "chain":
        items = ((bd, len(v)) for bd, v in C.bidegree_blocks().items())
    else:
        items = betti(C).betti.items()
    for (p, q), dim in items:
        r = p + q
        out[r] = out.get(r, 0) + (-1 if p % 2 else 1) * dim
    return {k: v for k, v in sorted(out.items()) if v}


def euler_conserved(C) -> bool:
    return euler_by_antidiagonal(C, "chain") == euler_by_antidiagonal(C, "betti")


# ------------------------------------------------------------ polynomials

class Poly:
    """Integer polynomial in ``t`` and ``s`` stored as ``{(t_exp, s_exp): coeff}``."""

    __slots__ = ("c",)

    def __init__(self, coeffs=None):
        self.c: Dict[Tuple[int, int], int] = {}
        for k, v in (coeffs or {}).items():
            if v:
                self.c[k] = self.c.get(k, 0) + v
        self.c = {k: v for k, v in self.c.items() if v}

    @classmethod
    def const(cls, a: int) -> "Poly":
        return cls({(0, 0): a})

    @classmethod
    def t(cls, k: int = 1, coeff: int = 1) -> "Poly":
        return cls({(k, 0): coeff})

    @classmethod
    def st(cls, k: int = 1, coeff: int = 1, s: int = 1) -> "Poly":
        return cls({(k, s): coeff})

    def __add__(self, other):
        other = other if isinstance(other, Poly) else Poly.const(other)
        out = dict(self.c)
        for k, v in other.c.items():
            out[k] = out.get(k, 0) + v
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({k: -v for k, v in self.c.items()})

    def __sub__(self, other):
        return self + (-(other if isinstance(other, Poly) else Poly.const(other)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = other if isinstance(other, Poly) else Poly.const(other)
        out: Dict[Tuple[int, int], int] = {}
        for (a, b), x in self.c.items():
            for (c, d), y in other.c.items():
                k = (a + c, b + d)
                out[k] = out.get(k, 0) + x * y
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = Poly.const(1)
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, int):
            other = Poly.const(other)
        return isinstance(other, Poly) and self.c == other.c

    def __hash__(self):
        return hash(tuple(sorted(self.c.items())))

    def at_s(self, s: int) -> "Poly":
        """Specialise ``s`` (``s = 1`` gives the ordinary Poincaré polynomial)."""
        out: Dict[Tuple[int, int], int] = {}
        for (a, b), v in self.c.items():
            out[(a, 0)] = out.get((a, 0), 0) + v * s ** b
        return Poly(out)

    def t_coeffs(self) -> Dict[int, int]:
        """Univariate coefficients (requires no ``s``)."""
        if any(b for (_, b) in self.c):
            raise ValueError("polynomial depends on s")
        return {a: v for (a, _), v in sorted(self.c.items())}

    def divmod_t(self, other: "Poly") -> Tuple["Poly", "Poly"]:
        """Long division in ``Q[t]`` for polynomials without ``s``; exact integers required."""
        num = dict(self.t_coeffs())
        den = other.t_coeffs()
        if not den:
            raise ZeroDivisionError("division by zero polynomial")
        dd = max(den)
        lead = den[dd]
        quo: Dict[Tuple[int, int], int] = {}
        while num and max(num) >= dd:
            top = max(num)
            c = Fraction(num[top], lead)
            if c.denominator != 1:
                raise ArithmeticError("non-integral quotient")
            shift = top - dd
            quo[(shift, 0)] = int(c)
            for e, v in den.items():
                num[e + shift] = num.get(e + shift, 0) - int(c) * v
                if not num[e + shift]:
                    del num[e + shift]
        return Poly(quo), Poly({(e, 0): v for e, v in num.items()})

    def format(self) -> str:
        """Compact text like ``1+6t+(12+2s)t^2``, grouped by powers of ``t``."""
        if not self.c:
            return "0"
        by_t: Dict[int, Dict[int, int]] = {}
        for (a, b), v in self.c.items():
            by_t.setdefault(a, {})[b] = v
        parts = []
        for a in sorted(by_t):
            inner = by_t[a]
            monos = []
            for b in sorted(inner):
                v = inner[b]
                s_part = "" if b == 0 else ("s" if b == 1 else f"s^{b}")
                if s_part and abs(v) == 1:
                    mono = ("-" if v < 0 else "") + s_part
                else:
                    mono = f"{v}{s_part}"
                monos.append(mono)
            t_part = "" if a == 0 else ("t" if a == 1 else f"t^{a}")
            if len(monos) == 1:
                m = monos[0]
                if t_part and m in ("1", "-1"):
                    term = ("-" if m == "-1" else "") + t_part
                else:
                    term = m + t_part
            else:
                body = monos[0]
                for m in monos[1:]:
                    body += m if m.startswith("-") else "+" + m
                term = f"({body}){t_part}"
            parts.append(term)
        text = parts[0]
        for p in parts[1:]:
            text += p if p.startswith("-") else "+" + p
        return text

    def __repr__(self):
        return f"Poly({self.format()})"

    def to_json(self) -> List[List[int]]:
        return [[a, b, v] for (a, b), v in sorted(self.c.items())]

    @classmethod
    def from_json(cls, data) -> "Poly":
        return cls({(a, b): v for a, b, v in data})

    def to_sympy(self):
        import sympy

        t, s = sympy.symbols("t s")
        return sum((v * t ** a * s ** b for (a, b), v in self.c.items()), sympy.Integer(0))


def poincare_polynomial(C) -> Poly:
    return betti(C).poly()


def from_betti(b: Dict[Bidegree, int]) -> Poly:
    return Poly({bd: v for bd, v in b.items() if v})


# ------------------------------------------------------------ column splitting

@dataclass
class ColumnReport:
    """Outcome of the column-acyclicity check on a Kriz model.

    ``h0`` maps ``(column, degree)`` to ``(computed, expected)`` dimensions of
    the bottom cohomology; ``violations`` lists human-readable findings.
    """

    algebra: str
    n: int
    h0: Dict[Tuple[int, int], Tuple[int, int]]
    higher: Dict[Tuple[int, int, int], int]
    violations: List[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def column_acyclicity(H, n: int) -> ColumnReport:
    """Split ``d = d1 + d2`` on ``E_n(H)`` by the number of ``G_{.1}`` factors and check the columns.

    Column ``c`` holds basis elements with ``c`` generators ``G_ij``, ``j >= 2``;
    ``d1`` removes a ``G_{i1}``.  Each column must be acyclic above the
    bottom row, and the bottom cohomology must match the J-model summand
    ``J_c (x) H^(x)(n-c)/(fat diagonal)`` degree by degree.
    """
    from .model import build_model, count_J
    from .tensor import fat_diagonal_quotient

    E = build_model("kriz", H, n)
    g = 2 * H.m - 1
    weight = []
    for mono, _ in E.basis:
        q1 = sum(1 for _, j in mono if j == 1)
        weight.append((len(mono) - q1, q1))
    blocks: Dict[Tuple[int, int, int], List[int]] = {}
    for idx, (c, q1) in enumerate(weight):
        blocks.setdefault((c, q1, E.bidegrees[idx][0]), []).append(idx)

    def d1(idx: int):
        c, q1 = weight[idx]
        return {k: v for k, v in E.d(idx).items() if weight[k] == (c, q1 - 1)}

    ranks = {key: rank(d1(i) for i in idx) for key, idx in blocks.items()}
    homology = {}
    for (c, q1, deg), idx in blocks.items():
        homology[(c, q1, deg)] = len(idx) - ranks[(c, q1, deg)] - ranks.get((c, q1 + 1, deg - 1), 0)
    violations = []
    higher = {k: v for k, v in homology.items() if k[1] > 0 and v}
    for (c, q1, deg), v in sorted(higher.items()):
        violations.append(f"column {c}, row {q1}, degree {deg}: cohomology of dimension {v}")
    counts = count_J(n)
    h0: Dict[Tuple[int, int], Tuple[int, int]] = {}
    columns = {c for c, _ in weight}
    for c in sorted(columns):
        q = fat_diagonal_quotient(H, n - c)
        degrees = {deg for (cc, q1, deg) in homology if cc == c and q1 == 0}
        degrees |= {d + c * g for d in q.degrees()}
        for deg in sorted(degrees):
            got = homology.get((c, 0, deg), 0)
            want = counts.get(c, 0) * (q.quotient_dim(deg - c * g) if deg - c * g in q.degrees() else 0)
            h0[(c, deg)] = (got, want)
            if got != want:
                violations.append(f"column {c}, degree {deg}: H0 has dimension {got}, expected {want}")
    return ColumnReport(H.name, n, h0, higher, violations)
