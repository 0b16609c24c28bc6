"""Exact sparse linear algebra over the rationals.

Vectors are dicts ``{column: value}`` with ``int`` or ``Fraction`` values and
no stored zeros.  Elimination is fraction-free: every row is scaled to a
primitive integer vector and rows are combined as ``a*r - b*p`` followed by
division by the content, so intermediate numbers stay small and no rational
arithmetic happens inside the hot loop.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple


def add_into(target: dict, source: dict, scale=1) -> dict:
    """``target += scale * source`` in place, dropping zeros."""
    for key, value in source.items():
        new = target.get(key, 0) + scale * value
        if new:
            target[key] = new
        else:
            target.pop(key, None)
    return target


def to_integer_row(vec: dict) -> Tuple[Dict[Hashable, int], Fraction]:
    """Return ``(row, factor)`` with ``vec == factor * row`` and ``row`` primitive."""
    den = reduce(lcm, (Fraction(v).denominator for v in vec.values()), 1)
    row = {k: int(Fraction(v) * den) for k, v in vec.items()}
    g = reduce(gcd, row.values(), 0)
    if g > 1:
        row = {k: v // g for k, v in row.items()}
    return row, Fraction(g, den)


def _content(row: dict, tag: Optional[dict]) -> int:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return 1
    if tag:
        for v in tag.values():
            g = gcd(g, v)
            if g == 1:
                return 1
    return g


class Echelon:
    """Incremental fraction-free row echelon form.

    Each stored row is keyed by its leading column (the smallest key under
    ``order``).  Rows may carry an integer tag recording them as a
    combination of the inserted generators; ``reduce`` updates tags alongside
    rows, which is how kernels and coordinates are extracted.
    """

    def __init__(self, order: Optional[Dict[Hashable, int]] = None):
        self.order = order
        self.pivots: Dict[Hashable, Tuple[dict, Optional[dict]]] = {}

    def _lead(self, row: dict):
        if self.order is None:
            return min(row)
        return min(row, key=self.order.__getitem__)

    def __len__(self) -> int:
        return len(self.pivots)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row: dict, tag: Optional[dict] = None) -> Tuple[dict, Optional[dict]]:
        """Reduce an integer row until no entry sits in a pivot column."""
        row = dict(row)
        tag = dict(tag) if tag is not None else None
        pivots = self.pivots
        while True:
            cols = [c for c in row if c in pivots]
            if not cols:
                return row, tag
            if self.order is None:
                c = min(cols)
            else:
                c = min(cols, key=self.order.__getitem__)
            prow, ptag = pivots[c]
            a = prow[c]
            b = row[c]
            g = gcd(a, b)
            a //= g
            b //= g
            if a != 1:
                for k in row:
                    row[k] *= a
            add_into(row, prow, -b)
            if tag is not None:
                if a != 1:
                    for k in tag:
                        tag[k] *= a
                if ptag:
                    add_into(tag, ptag, -b)
            cg = _content(row, tag)
            if cg > 1:
                row = {k: v // cg for k, v in row.items()}
                if tag is not None:
                    tag = {k: v // cg for k, v in tag.items()}

    def insert(self, row: Dict[Hashable, int], tag: Optional[dict] = None) -> Tuple[bool, Optional[dict]]:
        """Reduce an integer row and store it if it is independent."""
        row, tag = self.reduce(row, tag)
        if not row:
            return False, tag
        self.pivots[self._lead(row)] = (row, tag)
        return True, tag

    def add(self, vec: dict) -> bool:
        if not vec:
            return False
        row, _ = to_integer_row(vec)
        return self.insert(row)[0]

    def contains(self, vec: dict) -> bool:
        if not vec:
            return True
        row, _ = to_integer_row(vec)
        row, _ = self.reduce(row)
        return not row


def rank(vectors: Iterable[dict]) -> int:
    ech = Echelon()
    for v in vectors:
        ech.add(v)
    return ech.rank


def _primitive(vec: Dict[Hashable, Fraction]) -> Dict[Hashable, Fraction]:
    row, _ = to_integer_row(vec)
    return {k: Fraction(v) for k, v in row.items()}


def kernel(images: Sequence[dict]) -> List[Dict[int, Fraction]]:
    """Basis of ``{x : sum_i x_i images[i] = 0}`` as dicts over ``range(len(images))``."""
    ech = Echelon()
    factors = []
    out = []
    for i, v in enumerate(images):
        if not v:
            factors.append(Fraction(1))
            out.append({i: Fraction(1)})
            continue
        row, factor = to_integer_row(v)
        factors.append(factor)
        independent, tag = ech.insert(row, {i: 1})
        if not independent:
            out.append(tag)
    # tags relate the primitive rows images[i] / factors[i]
    result = []
    for rel in out:
        vec = {i: Fraction(c) / factors[i] for i, c in rel.items() if c}
        result.append(_primitive(vec))
    return result


def rref(vectors: Iterable[dict], order: Optional[Dict[Hashable, int]] = None) -> Dict[Hashable, Dict[Hashable, Fraction]]:
    """Reduced row echelon form as ``{pivot_column: row}`` with unit pivots.

    ``order`` ranks columns; a lower rank is preferred as pivot.
    """
    ech = Echelon(order=order)
    for v in vectors:
        ech.add(v)
    key = (lambda c: c) if order is None else order.__getitem__
    pivcols = sorted(ech.pivots, key=key, reverse=True)
    rows = {c: dict(ech.pivots[c][0]) for c in pivcols}
    for idx, c in enumerate(pivcols):
        prow = rows[c]
        for c2 in pivcols[idx + 1:]:
            r2 = rows[c2]
            b = r2.get(c)
            if not b:
                continue
            a = prow[c]
            g = gcd(a, b)
            a //= g
            b //= g
            if a != 1:
                for k in r2:
                    r2[k] *= a
            add_into(r2, prow, -b)
            cg = _content(r2, None)
            if cg > 1:
                rows[c2] = {k: v // cg for k, v in r2.items()}
    return {c: {k: Fraction(v, row[c]) for k, v in row.items()} for c, row in rows.items()}


class Coordinates:
    """Express vectors in a fixed basis modulo a fixed subspace.

    ``modulo`` spans the subspace (e.g. boundaries); ``basis`` must be
    independent modulo it.  ``solve(v)`` returns the coefficients of ``v`` on
    ``basis`` and raises ``ValueError`` when ``v`` is outside the span.
    """

    def __init__(self, basis: Sequence[dict], modulo: Sequence[dict] = ()):
        self.ech = Echelon()
        for v in modulo:
            if v:
                self.ech.insert(to_integer_row(v)[0], {})
        self.size = len(basis)
        self._factors: Dict[int, Fraction] = {}
        for i, v in enumerate(basis):
            if not v:
                raise ValueError("zero vector in basis")
            row, factor = to_integer_row(v)
            if not self.ech.insert(row, {i: 1})[0]:
                raise ValueError("basis vectors are dependent modulo the subspace")
            self._factors[i] = factor

    def solve(self, vec: dict) -> Dict[int, Fraction]:
        if not vec:
            return {}
        row, factor = to_integer_row(vec)
        row, tag = self.ech.reduce(row, {-1: 1})
        if row:
            raise ValueError("vector is not in the span")
        s = tag.pop(-1)
        # s*vec/factor + sum_i tag_i * basis_i/factor_i == 0 modulo the subspace
        return {i: -Fraction(t) * factor / (s * self._factors[i]) for i, t in tag.items() if t}
