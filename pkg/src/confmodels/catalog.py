"""Built-in Poincaré duality algebras and the Künneth product."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Tuple

from .algebra import GradedAlgebra, PDAlgebra, connected_sum, make_pd_algebra


class UnknownKey(KeyError):
    pass


class BadParams(ValueError):
    pass


def _build(name, labels, degrees, products, top) -> PDAlgebra:
    """``products`` maps label pairs (both orders not required) to ``{label: coeff}``."""
    idx = {l: i for i, l in enumerate(labels)}
    table: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
    for i in range(len(labels)):
        table[(0, i)] = {i: Fraction(1)}
        table[(i, 0)] = {i: Fraction(1)}
    for (a, b), val in products.items():
        i, j = idx[a], idx[b]
        vec = {idx[k]: Fraction(c) for k, c in val.items() if c}
        table[(i, j)] = vec
        if (b, a) not in products:
            s = -1 if degrees[i] * degrees[j] % 2 else 1
            table[(j, i)] = {k: s * c for k, c in vec.items()}
    alg = GradedAlgebra(name, tuple(labels), tuple(degrees), 0, table)
    return make_pd_algebra(alg, top, len(labels) - 1)


def sphere(m: int = 1) -> PDAlgebra:
    if m < 1:
        raise BadParams("sphere needs m >= 1")
    return _build(f"S{2 * m}", ["1", "w"], [0, 2 * m], {}, 2 * m)


def cp(m: int = 2) -> PDAlgebra:
    """Truncated polynomial algebra ``Q[x]/x^(m+1)``; the top power is labelled ``w``."""
    if not 1 <= m <= 3:
        raise BadParams("cp needs 1 <= m <= 3")
    labels = ["1"] + [("x" if k == 1 else f"x{k}") for k in range(1, m)] + ["w"]
    products = {}
    for a in range(1, m + 1):
        for b in range(a, m + 1):
            if a + b <= m:
                products[(labels[a], labels[b])] = {labels[a + b]: 1}
    return _build(f"CP{m}", labels, [2 * k for k in range(m + 1)], products, 2 * m)


def genus(g: int = 2) -> PDAlgebra:
    """Surface of genus ``g`` in the symplectic basis ``a_i b_i = w``."""
    if g < 1:
        raise BadParams("genus needs g >= 1")
    if g == 1:
        a, b = ["a"], ["b"]
    else:
        a = [f"a{i}" for i in range(1, g + 1)]
        b = [f"b{i}" for i in range(1, g + 1)]
    labels = ["1"] + a + b + ["w"]
    products = {(a[i], b[i]): {"w": 1} for i in range(g)}
    name = "T" if g == 1 else f"Sigma{g}"
    return _build(name, labels, [0] + [1] * (2 * g) + [2], products, 2)


def torus() -> PDAlgebra:
    return genus(1)


def cp2_sum(r: int = 1) -> PDAlgebra:
    """``r``-fold connected sum of CP2: ``x_i x_j = delta_ij w``."""
    if r < 1:
        raise BadParams("cp2_sum needs r >= 1")
    if r == 1:
        return cp(2)
    labels = ["1"] + [f"x{i}" for i in range(1, r + 1)] + ["w"]
    out = cp(2)
    for _ in range(r - 1):
        out, _, _ = connected_sum(out, cp(2))
    # relabel the iterated sum to x1..xr
    alg = out.algebra
    relabelled = GradedAlgebra(f"#{r}CP2", tuple(labels), alg.degrees, alg.unit, alg.table)
    return make_pd_algebra(relabelled, out.formal_dimension, out.orientation)


def kunneth(H: PDAlgebra, K: PDAlgebra) -> PDAlgebra:
    """Tensor product algebra with ``(a x b)(c x d) = (-1)^|b||c| ac x bd``."""
    A, B = H.algebra, K.algebra
    pairs = [(i, j) for i in range(A.dim) for j in range(B.dim)]
    pairs.sort(key=lambda p: (A.degrees[p[0]] + B.degrees[p[1]], p))
    clash = set(A.labels) & set(B.labels)

    def lab(alg, i, suffix):
        l = alg.labels[i]
        return l + suffix if l in clash else l

    labels = []
    for i, j in pairs:
        if i == A.unit and j == B.unit:
            labels.append("1")
        elif j == B.unit:
            labels.append(lab(A, i, "_1"))
        elif i == A.unit:
            labels.append(lab(B, j, "_2"))
        else:
            labels.append(f"{lab(A, i, '_1')}.{lab(B, j, '_2')}")
    pos = {p: k for k, p in enumerate(pairs)}
    degrees = [A.degrees[i] + B.degrees[j] for i, j in pairs]
    table = {}
    for (i, j) in pairs:
        for (k, l) in pairs:
            left = A.mul_basis(i, k)
            right = B.mul_basis(j, l)
            if not left or not right:
                continue
            s = -1 if B.degrees[j] * A.degrees[k] % 2 else 1
            vec = {}
            for a, ca in left.items():
                for b, cb in right.items():
                    vec[pos[(a, b)]] = s * ca * cb
            table[(pos[(i, j)], pos[(k, l)])] = vec
    alg = GradedAlgebra(f"{H.name}x{K.name}", tuple(labels), tuple(degrees), pos[(A.unit, B.unit)], table)
    return make_pd_algebra(alg, H.formal_dimension + K.formal_dimension, pos[(H.orientation, K.orientation)])


@dataclass(frozen=True)
class CatalogEntry:
    key: str
    params: Tuple[str, ...]
    constructor: Callable[..., PDAlgebra]
    provenance: str


ENTRIES: Dict[str, CatalogEntry] = {
    e.key: e
    for e in [
        CatalogEntry("sphere", ("m",), sphere, "S^2m; S^2 gives the classical F(S^2,n)"),
        CatalogEntry("cp", ("m",), cp, "CP^m, m<=3; punctured CP^1 is the plane"),
        CatalogEntry("torus", (), torus, "two-torus"),
        CatalogEntry("genus", ("g",), genus, "genus-g surface in symplectic basis"),
        CatalogEntry("cp2_sum", ("r",), cp2_sum, "r-fold CP2 connected sum, diagonal form x_i^2 = w"),
        CatalogEntry("product", ("key", "key"), None, "Kunneth product, e.g. S2xS2 as an r=2 cross-check"),
    ]
}


@lru_cache(maxsize=None)
def get(key: str, *params) -> PDAlgebra:
    """Catalog lookup; ``get("product", ("sphere", 1), ("torus",))`` builds products."""
    if key not in ENTRIES:
        raise UnknownKey(key)
    if key == "product":
        if len(params) != 2:
            raise BadParams("product needs two algebra specs")
        return kunneth(get(*params[0]), get(*params[1]))
    entry = ENTRIES[key]
    if len(params) > len(entry.params):
        raise BadParams(f"{key} takes parameters {entry.params}")
    try:
        return entry.constructor(*[int(p) for p in params])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, BadParams):
            raise
        raise BadParams(str(exc)) from None


def parse_catalog_spec(text: str) -> Tuple:
    """``"cp2_sum 3"`` -> ``("cp2_sum", 3)``.

    Products are written ``"product sphere:1 torus"`` or, as printed by
    :func:`spec_name`, ``"product(sphere 1,torus)"``.
    """
    text = text.strip()
    if text.startswith("product(") and text.endswith(")"):
        inner, depth = text[len("product("):-1], 0
        for i, ch in enumerate(inner):
            depth += {"(": 1, ")": -1}.get(ch, 0)
            if ch == "," and depth == 0:
                return ("product", parse_catalog_spec(inner[:i]), parse_catalog_spec(inner[i + 1:]))
        raise BadParams(f"product needs two factors in {text!r}")
    parts = text.replace(",", " ").split()
    if not parts:
        raise BadParams("empty catalog spec")
    key = parts[0]
    if key == "product":
        if len(parts) != 3:
            raise BadParams("product needs two factors, e.g. 'product sphere:1 torus'")
        factors = []
        for p in parts[1:]:
            bits = p.split(":")
            factors.append((bits[0],) + tuple(int(b) for b in bits[1:]))
        return ("product", factors[0], factors[1])
    try:
        return (key,) + tuple(int(p) for p in parts[1:])
    except ValueError:
        raise BadParams(f"bad parameters in {text!r}") from None


# The instances the verification suites sweep over when asked for "every
# catalog algebra".
STANDARD: List[Tuple] = [
    ("sphere", 1),
    ("sphere", 2),
    ("cp", 1),
    ("cp", 2),
    ("cp", 3),
    ("torus",),
    ("genus", 2),
    ("genus", 3),
    ("cp2_sum", 2),
    ("cp2_sum", 3),
    ("product", ("sphere", 1), ("sphere", 1)),
    ("product", ("sphere", 1), ("torus",)),
]


def standard_algebras() -> List[Tuple[Tuple, PDAlgebra]]:
    return [(spec, get(*spec)) for spec in STANDARD]


def spec_name(spec: Tuple) -> str:
    if spec[0] == "product":
        return f"product({spec_name(spec[1])},{spec_name(spec[2])})"
    return " ".join(str(s) for s in spec)
