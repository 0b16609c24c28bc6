"""Graded-commutative algebras over Q, Poincaré duality validation and the
constructions derived from a Poincaré duality algebra: dual basis, diagonal
class, puncturing and connected sum.

Algebras are given by a homogeneous basis and a table of structure
constants.  Elements are sparse dicts ``{basis_index: Fraction}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .linalg import add_into, rank
from .tensor import TensorElement, flip, multiply, insert

Element = Dict[int, Fraction]


class AlgebraError(ValueError):
    """Base class for violated algebra axioms."""


class NonUnital(AlgebraError):
    pass


class NotGradedCommutative(AlgebraError):
    def __init__(self, pair):
        super().__init__(f"NotGradedCommutative{tuple(pair)}")
        self.pair = tuple(pair)


class NotAssociative(AlgebraError):
    def __init__(self, triple):
        super().__init__(f"NotAssociative{tuple(triple)}")
        self.triple = tuple(triple)


class DegreeMismatch(AlgebraError):
    def __init__(self, pair):
        super().__init__(f"DegreeMismatch{tuple(pair)}")
        self.pair = tuple(pair)


class DegeneratePairing(AlgebraError):
    def __init__(self, degree):
        super().__init__(f"DegeneratePairing({degree})")
        self.degree = degree


class TopDegreeNotOneDimensional(AlgebraError):
    pass


class OddFormalDimension(AlgebraError):
    pass


class DimensionMismatch(AlgebraError):
    pass


class ParseError(ValueError):
    """Malformed algebra description; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class ValidationError(ValueError):
    """Raised by :func:`validate_algebra` with every violated axiom attached."""

    def __init__(self, violations: Sequence[AlgebraError]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


def parse_rational(text) -> Fraction:
    if isinstance(text, bool):
        raise ValueError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"not a rational: {text!r}")
    return Fraction(text.strip())


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True, eq=False)
class GradedAlgebra:
    """Finite-dimensional graded algebra with a homogeneous basis.

    ``table[(i, j)]`` is the product ``b_i * b_j``; missing pairs are zero.
    """

    name: str
    labels: Tuple[str, ...]
    degrees: Tuple[int, ...]
    unit: int
    table: Mapping[Tuple[int, int], Element] = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def mul_basis(self, i: int, j: int) -> Element:
        return self.table.get((i, j), {})

    def mul(self, x: Element, y: Element) -> Element:
        out: Element = {}
        for i, a in x.items():
            for j, b in y.items():
                prod = self.table.get((i, j))
                if prod:
                    add_into(out, prod, a * b)
        return out

    def augmentation(self, x: Element) -> Fraction:
        return x.get(self.unit, Fraction(0))

    def degree_dims(self) -> Dict[int, int]:
        dims: Dict[int, int] = {}
        for d in self.degrees:
            dims[d] = dims.get(d, 0) + 1
        return dims

    def basis_of_degree(self, d: int) -> List[int]:
        return [i for i, e in enumerate(self.degrees) if e == d]

    def structure_constants(self) -> Dict[Tuple[str, str], Dict[str, Fraction]]:
        """Label-keyed table, convenient for comparing algebras."""
        return {
            (self.labels[i], self.labels[j]): {self.labels[k]: c for k, c in v.items()}
            for (i, j), v in self.table.items()
            if v
        }


@dataclass(frozen=True, eq=False)
class PDAlgebra:
    """A validated oriented Poincaré duality algebra of formal dimension ``2m``."""

    algebra: GradedAlgebra
    formal_dimension: int
    orientation: int
    dual: Tuple[Element, ...] = field(repr=False)

    @property
    def m(self) -> int:
        return self.formal_dimension // 2

    @property
    def name(self) -> str:
        return self.algebra.name

    @property
    def dim(self) -> int:
        return self.algebra.dim

    def pairing(self, x: Element, y: Element) -> Fraction:
        return self.algebra.mul(x, y).get(self.orientation, Fraction(0))


@dataclass(frozen=True, eq=False)
class PuncturedAlgebra:
    """``H/Q.omega`` together with the projection from ``H``.

    ``projection[i]`` is the index in ``algebra`` of the image of ``b_i``, or
    ``None`` for the orientation class.
    """

    algebra: GradedAlgebra
    origin: PDAlgebra
    projection: Tuple[Optional[int], ...]

    def project(self, x: Element) -> Element:
        out: Element = {}
        for i, c in x.items():
            j = self.projection[i]
            if j is not None:
                out[j] = out.get(j, 0) + c
        return {k: v for k, v in out.items() if v}


def _check_graded_algebra(alg: GradedAlgebra) -> List[AlgebraError]:
    errors: List[AlgebraError] = []
    deg = alg.degrees
    zero = [i for i, d in enumerate(deg) if d == 0]
    if zero != [alg.unit]:
        errors.append(NonUnital("degree 0 must be spanned by the unit alone"))
    n = alg.dim
    for i in range(n):
        left = alg.mul_basis(alg.unit, i)
        right = alg.mul_basis(i, alg.unit)
        if left != {i: 1} or right != {i: 1}:
            errors.append(NonUnital(f"unit does not act as identity on {alg.labels[i]}"))
            break
    for (i, j), v in alg.table.items():
        for k in v:
            if deg[k] != deg[i] + deg[j]:
                errors.append(DegreeMismatch((alg.labels[i], alg.labels[j])))
                break
    for i in range(n):
        for j in range(i + 1, n):
            s = -1 if deg[i] * deg[j] % 2 else 1
            a = alg.mul_basis(i, j)
            b = alg.mul_basis(j, i)
            if a != {k: s * c for k, c in b.items()}:
                errors.append(NotGradedCommutative((alg.labels[i], alg.labels[j])))
        if deg[i] % 2 and alg.mul_basis(i, i):
            errors.append(NotGradedCommutative((alg.labels[i], alg.labels[i])))
    for i, j, k in product(range(n), repeat=3):
        if 0 in (deg[i], deg[j], deg[k]):
            continue
        lhs = alg.mul(alg.mul_basis(i, j), {k: Fraction(1)})
        rhs = alg.mul({i: Fraction(1)}, alg.mul_basis(j, k))
        if lhs != rhs:
            errors.append(NotAssociative((alg.labels[i], alg.labels[j], alg.labels[k])))
    return errors


def _invert(matrix: List[List[Fraction]]) -> Optional[List[List[Fraction]]]:
    n = len(matrix)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(matrix)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col]), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _pd_checks(alg: GradedAlgebra, formal_dimension: int, orientation: int):
    errors: List[AlgebraError] = []
    if formal_dimension <= 0 or formal_dimension % 2:
        errors.append(OddFormalDimension(f"formal dimension {formal_dimension} is not a positive even integer"))
        return errors, None
    top = alg.basis_of_degree(formal_dimension)
    if top != [orientation]:
        errors.append(TopDegreeNotOneDimensional(
            f"degree {formal_dimension} must be spanned by the orientation class alone"))
        return errors, None
    dual: Dict[int, Element] = {}
    for d in sorted(set(alg.degrees)):
        if d > formal_dimension:
            errors.append(DegeneratePairing(d))
            continue
        rows = alg.basis_of_degree(d)
        cols = alg.basis_of_degree(formal_dimension - d)
        if len(rows) != len(cols):
            errors.append(DegeneratePairing(min(d, formal_dimension - d)))
            continue
        M = [[alg.mul_basis(a, g).get(orientation, Fraction(0)) for g in cols] for a in rows]
        inv = _invert(M)
        if inv is None:
            errors.append(DegeneratePairing(min(d, formal_dimension - d)))
            continue
        # dual of rows[b] = sum_g inv[g][b] * cols[g]
        for b, beta in enumerate(rows):
            dual[beta] = {cols[g]: inv[g][b] for g in range(len(cols)) if inv[g][b]}
    # dedupe: a degree pair failing twice is one violation
    seen, unique = set(), []
    for e in errors:
        if str(e) not in seen:
            seen.add(str(e))
            unique.append(e)
    if unique:
        return unique, None
    return [], tuple(dual[i] for i in range(alg.dim))


def make_pd_algebra(alg: GradedAlgebra, formal_dimension: int, orientation: int) -> PDAlgebra:
    """Validate an already-built :class:`GradedAlgebra` as a Poincaré duality algebra."""
    errors = _check_graded_algebra(alg)
    pd_errors, dual = _pd_checks(alg, formal_dimension, orientation)
    errors += pd_errors
    if errors:
        raise ValidationError(errors)
    return PDAlgebra(alg, formal_dimension, orientation, dual)


def _require(obj, key, kind, path):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{path}.{key}" if path else key, "missing")
    val = obj[key]
    if kind is int and (isinstance(val, bool) or not isinstance(val, int)):
        raise ParseError(f"{path}.{key}" if path else key, "expected an integer")
    if kind is not int and not isinstance(val, kind):
        raise ParseError(f"{path}.{key}" if path else key, f"expected {kind.__name__}")
    return val


def parse_algebra(spec: dict) -> Tuple[GradedAlgebra, int, int]:
    """Turn the JSON description into a :class:`GradedAlgebra` (no PD checks).

    Only products of positive-degree pairs are read; unit products are
    implied and the reflected product is filled in by graded commutativity.
    Contradictory entries for both orders are reported as
    ``NotGradedCommutative`` by :func:`validate_algebra`.
    """
    if not isinstance(spec, dict):
        raise ParseError("$", "expected an object")
    name = _require(spec, "name", str, "")
    fdim = _require(spec, "formal_dimension", int, "")
    basis = _require(spec, "basis", list, "")
    labels, degrees = [], []
    for k, entry in enumerate(basis):
        label = _require(entry, "label", str, f"basis[{k}]")
        degree = _require(entry, "degree", int, f"basis[{k}]")
        if degree < 0:
            raise ParseError(f"basis[{k}].degree", "negative degree")
        if label in labels:
            raise ParseError(f"basis[{k}].label", f"duplicate label {label!r}")
        labels.append(label)
        degrees.append(degree)
    orient = _require(spec, "orientation", str, "")
    if orient not in labels:
        raise ParseError("orientation", f"unknown label {orient!r}")
    units = [i for i, d in enumerate(degrees) if d == 0]
    if not units:
        raise ParseError("basis", "no degree-0 element")
    unit = units[0]
    given: Dict[Tuple[int, int], Element] = {}
    for k, entry in enumerate(spec.get("products", [])):
        path = f"products[{k}]"
        left = _require(entry, "left", str, path)
        right = _require(entry, "right", str, path)
        value = _require(entry, "value", list, path)
        for side, lab in (("left", left), ("right", right)):
            if lab not in labels:
                raise ParseError(f"{path}.{side}", f"unknown label {lab!r}")
        vec: Element = {}
        for t, term in enumerate(value):
            if not (isinstance(term, list) and len(term) == 2 and term[0] in labels):
                raise ParseError(f"{path}.value[{t}]", "expected [label, rational]")
            try:
                c = parse_rational(term[1])
            except (ValueError, ZeroDivisionError) as exc:
                raise ParseError(f"{path}.value[{t}]", str(exc)) from None
            idx = labels.index(term[0])
            vec[idx] = vec.get(idx, 0) + c
        key = (labels.index(left), labels.index(right))
        if key in given and given[key] != {a: b for a, b in vec.items() if b}:
            raise ParseError(path, f"product {left}*{right} listed twice with different values")
        given[key] = {a: b for a, b in vec.items() if b}
    table: Dict[Tuple[int, int], Element] = {}
    n = len(labels)
    for i in range(n):
        table[(unit, i)] = {i: Fraction(1)}
        table[(i, unit)] = {i: Fraction(1)}
    for (i, j), vec in given.items():
        if unit in (i, j) and len(units) == 1:
            # explicit unit products must agree with the unit law; checked later
            table[(i, j)] = vec
            continue
        table[(i, j)] = vec
        if (j, i) not in given:
            s = -1 if degrees[i] * degrees[j] % 2 else 1
            table[(j, i)] = {k: s * c for k, c in vec.items()}
    table = {k: v for k, v in table.items() if v}
    alg = GradedAlgebra(name, tuple(labels), tuple(degrees), unit, table)
    return alg, fdim, labels.index(orient)


def validate_algebra(spec: dict) -> PDAlgebra:
    """Parse and validate an algebra description.

    Raises :class:`ParseError` for malformed input and
    :class:`ValidationError` listing every violated axiom otherwise.
    """
    alg, fdim, orient = parse_algebra(spec)
    return make_pd_algebra(alg, fdim, orient)


def algebra_to_json(H: PDAlgebra) -> dict:
    alg = H.algebra
    products = []
    for i in range(alg.dim):
        for j in range(i, alg.dim):
            if alg.degrees[i] == 0 or alg.degrees[j] == 0:
                continue
            v = alg.mul_basis(i, j)
            if v:
                products.append({
                    "left": alg.labels[i],
                    "right": alg.labels[j],
                    "value": [[alg.labels[k], format_rational(c)] for k, c in sorted(v.items())],
                })
    return {
        "name": alg.name,
        "formal_dimension": H.formal_dimension,
        "basis": [{"label": l, "degree": d} for l, d in zip(alg.labels, alg.degrees)],
        "orientation": alg.labels[H.orientation],
        "products": products,
    }


def diagonal_class(H: PDAlgebra) -> TensorElement:
    """The diagonal ``sum_a (-1)^|h_a| h_a (x) h_a^*``, checked for symmetry and diagonality."""
    alg = H.algebra
    terms: Dict[Tuple[int, int], Fraction] = {}
    for a in range(alg.dim):
        sign = -1 if alg.degrees[a] % 2 else 1
        for g, c in H.dual[a].items():
            terms[(a, g)] = terms.get((a, g), 0) + sign * c
    delta = TensorElement((alg, alg), terms)
    check_diagonal_axioms(alg, delta)
    return delta


def check_diagonal_axioms(alg: GradedAlgebra, delta: TensorElement) -> None:
    """Assert ``T(D) = D`` and ``(a x 1) D = (1 x a) D`` for every basis element ``a``."""
    if flip(delta) != delta:
        raise AssertionError(f"diagonal of {alg.name} is not graded symmetric")
    for a in range(alg.dim):
        x = TensorElement((alg,), {(a,): Fraction(1)})
        left = multiply(insert(x, (1,), (alg, alg)), delta)
        right = multiply(insert(x, (2,), (alg, alg)), delta)
        if left != right:
            raise AssertionError(f"diagonal of {alg.name} fails (a x 1)D = (1 x a)D at {alg.labels[a]}")


@lru_cache(maxsize=None)
def puncture(H: PDAlgebra) -> Tuple[PuncturedAlgebra, TensorElement]:
    """``H/Q.omega`` and the image of the diagonal in its tensor square.

    Memoised per algebra object, so every caller shares the same ``H°``.
    """
    alg = H.algebra
    keep = [i for i in range(alg.dim) if i != H.orientation]
    new_index = {old: new for new, old in enumerate(keep)}
    table: Dict[Tuple[int, int], Element] = {}
    for (i, j), v in alg.table.items():
        if i in new_index and j in new_index:
            w = {new_index[k]: c for k, c in v.items() if k in new_index}
            if w:
                table[(new_index[i], new_index[j])] = w
    hbar = GradedAlgebra(
        alg.name + "°",
        tuple(alg.labels[i] for i in keep),
        tuple(alg.degrees[i] for i in keep),
        new_index[alg.unit],
        table,
    )
    proj = tuple(new_index.get(i) for i in range(alg.dim))
    P = PuncturedAlgebra(hbar, H, proj)
    delta = diagonal_class(H)
    terms = {}
    for (a, b), c in delta.terms.items():
        if proj[a] is not None and proj[b] is not None:
            terms[(proj[a], proj[b])] = c
    dbar = TensorElement((hbar, hbar), terms)
    check_diagonal_axioms(hbar, dbar)
    return P, dbar


def euler_characteristic(H) -> int:
    alg = H.algebra if isinstance(H, PDAlgebra) else H
    return sum(-1 if d % 2 else 1 for d in alg.degrees)


def algebra_poincare_poly(H) -> Dict[int, int]:
    """``{d: dim H^d}``, the Poincaré polynomial as a coefficient map."""
    alg = H.algebra if isinstance(H, (PDAlgebra, PuncturedAlgebra)) else H
    return dict(sorted(alg.degree_dims().items()))


AlgebraMap = Tuple[Element, ...]


def connected_sum(H: PDAlgebra, K: PDAlgebra, name: Optional[str] = None) -> Tuple[PDAlgebra, AlgebraMap, AlgebraMap]:
    """Connected sum ``H # K`` with its projections onto ``H°`` and ``K°``.

    The basis is ``1``, the positive non-top basis of ``H``, that of ``K``,
    then the new orientation.  Clashing labels get ``_1``/``_2`` suffixes.
    The projections are returned as tuples of images of basis elements,
    expressed in the bases of :func:`puncture` of each summand.
    """
    if H.formal_dimension != K.formal_dimension:
        raise DimensionMismatch(f"formal dimensions {H.formal_dimension} and {K.formal_dimension} differ")
    A, B = H.algebra, K.algebra
    mid_h = [i for i in range(A.dim) if i not in (A.unit, H.orientation)]
    mid_k = [i for i in range(B.dim) if i not in (B.unit, K.orientation)]
    lab_h = [A.labels[i] for i in mid_h]
    lab_k = [B.labels[i] for i in mid_k]
    clash = set(lab_h) & set(lab_k)
    lab_h = [l + "_1" if l in clash else l for l in lab_h]
    lab_k = [l + "_2" if l in clash else l for l in lab_k]
    unit_label = A.labels[A.unit]
    top_label = A.labels[H.orientation]
    labels = [unit_label] + lab_h + lab_k + [top_label]
    if len(set(labels)) != len(labels):
        labels = ["1"] + lab_h + lab_k + ["w"]
    degrees = [0] + [A.degrees[i] for i in mid_h] + [B.degrees[i] for i in mid_k] + [H.formal_dimension]
    top = len(labels) - 1
    pos_h = {old: 1 + k for k, old in enumerate(mid_h)}
    pos_h[A.unit] = 0
    pos_h[H.orientation] = top
    pos_k = {old: 1 + len(mid_h) + k for k, old in enumerate(mid_k)}
    pos_k[B.unit] = 0
    pos_k[K.orientation] = top
    table: Dict[Tuple[int, int], Element] = {}
    for src, pos in ((A, pos_h), (B, pos_k)):
        for (i, j), v in src.table.items():
            key = (pos[i], pos[j])
            table[key] = {pos[k]: c for k, c in v.items()}
    alg = GradedAlgebra(name or f"{H.name}#{K.name}", tuple(labels), tuple(degrees), 0, table)
    S = make_pd_algebra(alg, H.formal_dimension, top)
    Ph, _ = puncture(H)
    Pk, _ = puncture(K)
    inv_h = {v: k for k, v in pos_h.items()}
    inv_k = {v: k for k, v in pos_k.items()}
    pi_h, pi_k = [], []
    for idx in range(alg.dim):
        if idx in (0, top):
            pi_h.append({Ph.projection[A.unit]: Fraction(1)} if idx == 0 else {})
            pi_k.append({Pk.projection[B.unit]: Fraction(1)} if idx == 0 else {})
            continue
        pi_h.append({Ph.projection[inv_h[idx]]: Fraction(1)} if idx in inv_h else {})
        pi_k.append({Pk.projection[inv_k[idx]]: Fraction(1)} if idx in inv_k else {})
    return S, tuple(pi_h), tuple(pi_k)


def is_algebra_map(source: GradedAlgebra, target: GradedAlgebra, images: AlgebraMap) -> bool:
    """Check ``f(b_i b_j) = f(b_i) f(b_j)`` on all basis pairs."""

    def apply(x: Element) -> Element:
        out: Element = {}
        for i, c in x.items():
            add_into(out, images[i], c)
        return out

    for i in range(source.dim):
        for j in range(source.dim):
            if apply(source.mul_basis(i, j)) != target.mul(images[i], images[j]):
                return False
    return True


def pairing_matrix_rank(H: PDAlgebra, d: int) -> int:
    alg = H.algebra
    rows = alg.basis_of_degree(d)
    cols = alg.basis_of_degree(H.formal_dimension - d)
    vecs = [{g: alg.mul_basis(a, g).get(H.orientation, 0) for g in cols if alg.mul_basis(a, g).get(H.orientation)} for a in rows]
    return rank(vecs)
