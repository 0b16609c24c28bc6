"""Symmetric-group action, simplicial structure, coaction and connected-sum maps.

Every map here is a :func:`~confmodels.model.generator_map`, i.e. defined on
slot insertions and on the generators ``G_ij`` and extended
multiplicatively, so only the chain-map property and the identities between
maps need checking.  Checks return :class:`Finding` records that serialise
to ``{check, instance, status, witness}``.
"""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass
from fractions import Fraction
from itertools import permutations, product
from typing import Dict, List, Optional, Sequence, Tuple

from .algebra import PDAlgebra, connected_sum, euler_characteristic, puncture
from .model import (
    ChainMap,
    Model,
    ModelError,
    arnold_algebra,
    build_block_model,
    build_model,
    ground_algebra,
    generator_map,
)


class IndexOutOfRange(ModelError):
    pass


class InvalidPartition(ModelError):
    pass


@dataclass
class Finding:
    check: str
    instance: str
    status: str
    witness: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status in ("pass", "expected-failure")

    def to_json(self) -> dict:
        return asdict(self)


def _model(H: PDAlgebra, n: int, closed: bool) -> Model:
    if closed:
        return build_model("kriz", H, n)
    return build_model("punctured", H, n)


# ------------------------------------------------------------ checks

def first_difference(f: ChainMap, g: ChainMap) -> Optional[int]:
    """First source basis element where two maps with equal ends disagree."""
    for i in range(f.source.dim):
        if f(i) != g(i):
            return i
    return None


def check_chain(f: ChainMap, instance: str) -> Finding:
    bad = f.chain_violations(stop_at_first=True)
    if bad:
        return Finding(f"chain-map {f.name}", instance, "fail", f.source.describe(bad[0]))
    return Finding(f"chain-map {f.name}", instance, "pass")


def check_homogeneous(f: ChainMap, instance: str) -> Finding:
    bad = f.homogeneity_violations()
    if bad:
        return Finding(f"bidegree {f.name}", instance, "fail", f.source.describe(bad[0]))
    return Finding(f"bidegree {f.name}", instance, "pass")


def check_multiplicative(f: ChainMap, instance: str, samples: int = 200, seed: int = 0) -> Finding:
    S = f.source
    pairs = [(a, b) for a in range(S.dim) for b in range(S.dim)]
    if len(pairs) > samples:
        pairs = random.Random(seed).sample(pairs, samples)
    bad = f.multiplicativity_violations(pairs)
    if bad:
        a, b = bad[0]
        return Finding(f"multiplicative {f.name}", instance, "fail", f"{S.describe(a)} * {S.describe(b)}")
    return Finding(f"multiplicative {f.name}", instance, "pass")


def check_equal(name: str, f: ChainMap, g: ChainMap, instance: str) -> Finding:
    i = first_difference(f, g)
    if i is not None:
        return Finding(name, instance, "fail", f.source.describe(i))
    return Finding(name, instance, "pass")


# ------------------------------------------------------------ Sigma_n

def sigma_action(sigma: Sequence[int], model: Model) -> ChainMap:
    """Left action of a permutation (``sigma[i-1] = sigma(i)``, 1-based) on a model.

    Sends slot ``s`` to slot ``sigma(s)`` with Koszul signs and ``G_ij`` to
    ``G_{sigma(i) sigma(j)}``.  On a J-model only permutations fixing 1 act.
    """
    sigma = tuple(sigma)
    n = model.n
    if sorted(sigma) != list(range(1, n + 1)):
        raise ModelError(f"{sigma} is not a permutation of 1..{n}")
    if model.kind == "j" and sigma[0] != 1:
        raise ModelError("only permutations fixing 1 act on a J-model")
    rules = [(sigma[s] - 1, None) for s in range(n)]
    return generator_map(model, model, rules, lambda i, j: (sigma[i - 1], sigma[j - 1]),
                         f"sigma{sigma}")


def compose_perm(sigma: Sequence[int], tau: Sequence[int]) -> Tuple[int, ...]:
    """``sigma o tau``."""
    return tuple(sigma[t - 1] for t in tau)


def puncture_map(H: PDAlgebra, n: int) -> ChainMap:
    """The projection ``E_n(H) -> E_n(H°)``."""
    E = build_model("kriz", H, n)
    P = build_model("punctured", H, n)
    proj = P.punctured.projection
    images = [({proj[b]: Fraction(1)} if proj[b] is not None else {}) for b in range(H.dim)]
    return generator_map(E, P, [(s, images) for s in range(n)], lambda i, j: (i, j), f"proj{n}")


# ------------------------------------------------------------ simplicial maps

def empty_model(H: PDAlgebra, closed: bool = False) -> Model:
    """``E_0 = Q``."""
    return _model(H, 0, closed)


def degeneracy(k: int, n: int, H: PDAlgebra, closed: bool = False) -> ChainMap:
    """``S_k: E_n -> E_{n+1}``, inserting along the map skipping ``k + 1``."""
    if not 0 <= k <= n:
        raise IndexOutOfRange(f"S_{k} needs 0 <= k <= {n}")
    src, tgt = _model(H, n, closed), _model(H, n + 1, closed)

    def phi(i: int) -> int:
        return i if i <= k else i + 1

    rules = [(phi(s + 1) - 1, None) for s in range(n)]
    return generator_map(src, tgt, rules, lambda i, j: (phi(i), phi(j)), f"S{k}[{n}]")


def face(k: int, n: int, H: PDAlgebra, closed: bool = False) -> ChainMap:
    """``D_k: E_{n+1} -> E_n`` for ``0 <= k <= n + 1``.

    Outer faces apply the augmentation to the first or last slot and kill
    the generators touching it; inner faces multiply slots ``k`` and
    ``k + 1`` and send ``G_{k+1,k}`` to zero.
    """
    if not 0 <= k <= n + 1:
        raise IndexOutOfRange(f"D_{k} needs 0 <= k <= {n + 1}")
    src, tgt = _model(H, n + 1, closed), _model(H, n, closed)
    if k == 0:
        rules = [(None, None)] + [(s - 1, None) for s in range(1, n + 1)]

        def g(i, j):
            return None if j == 1 else (i - 1, j - 1)
    elif k == n + 1:
        rules = [(s, None) for s in range(n)] + [(None, None)]

        def g(i, j):
            return None if i == n + 1 else (i, j)
    else:
        def theta(t: int) -> int:
            return t if t <= k else t - 1

        rules = [(theta(s + 1) - 1, None) for s in range(n + 1)]

        def g(i, j):
            a, b = theta(i), theta(j)
            return None if a == b else (a, b)
    return generator_map(src, tgt, rules, g, f"D{k}[{n + 1}]")


def simplicial_identities(H: PDAlgebra, n_max: int, closed: bool = False) -> List[Finding]:
    """All simplicial identities among faces and degeneracies up to ``E_{n_max}``."""
    inst = f"{H.name}{'' if not closed else ' closed'}"
    out: List[Finding] = []
    # d_i d_j = d_{j-1} d_i for i < j, as maps E_{n+2} -> E_n
    for n in range(0, n_max - 1):
        for j in range(n + 3):
            for i in range(j):
                lhs = face(i, n, H, closed).compose(face(j, n + 1, H, closed))
                rhs = face(j - 1, n, H, closed).compose(face(i, n + 1, H, closed))
                out.append(check_equal(f"D{i}D{j}=D{j - 1}D{i}", lhs, rhs, f"{inst} n={n + 2}"))
    # s_i s_j = s_{j+1} s_i for i <= j, as maps E_n -> E_{n+2}
    for n in range(0, n_max - 1):
        for j in range(n + 1):
            for i in range(j + 1):
                lhs = degeneracy(i, n + 1, H, closed).compose(degeneracy(j, n, H, closed))
                rhs = degeneracy(j + 1, n + 1, H, closed).compose(degeneracy(i, n, H, closed))
                out.append(check_equal(f"S{i}S{j}=S{j + 1}S{i}", lhs, rhs, f"{inst} n={n}"))
    # mixed identities on E_n -> E_n via E_{n+1}
    for n in range(0, n_max):
        for j in range(n + 1):
            for i in range(n + 2):
                lhs = face(i, n, H, closed).compose(degeneracy(j, n, H, closed))
                name = f"D{i}S{j}"
                if i < j:
                    rhs = degeneracy(j - 1, n - 1, H, closed).compose(face(i, n - 1, H, closed))
                    name += f"=S{j - 1}D{i}"
                elif i in (j, j + 1):
                    i_d = next((x for x in range(lhs.source.dim) if lhs(x) != {x: 1}), None)
                    out.append(Finding(name + "=id", f"{inst} n={n}",
                                       "pass" if i_d is None else "fail",
                                       None if i_d is None else lhs.source.describe(i_d)))
                    continue
                else:
                    rhs = degeneracy(j, n - 1, H, closed).compose(face(i - 1, n - 1, H, closed))
                    name += f"=S{j}D{i - 1}"
                out.append(check_equal(name, lhs, rhs, f"{inst} n={n}"))
    return out


def simplicial_suite(H: PDAlgebra, n_max: int, multiplicative_samples: int = 100) -> List[Finding]:
    """Chain-map, bidegree and multiplicativity of every face and degeneracy, plus the identities."""
    out: List[Finding] = []
    for n in range(0, n_max):
        maps = [face(k, n, H) for k in range(n + 2)] + [degeneracy(k, n, H) for k in range(n + 1)]
        for f in maps:
            inst = f"{H.name}°"
            out.append(check_chain(f, inst))
            out.append(check_homogeneous(f, inst))
            out.append(check_multiplicative(f, inst, multiplicative_samples))
    out.extend(simplicial_identities(H, n_max))
    return out


def closed_face_defect(H: PDAlgebra, n: int, k: int) -> Dict[int, Fraction]:
    """``(D_k d - d D_k)(G_{n+1,n})`` on the closed model ``E_{n+1}(H)``."""
    f = face(k, n, H, closed=True)
    E = f.source
    x = E.element(E.units, [(n + 1, n)])
    lhs = f.apply(E.apply_d(x))
    rhs = f.target.apply_d(f.apply(x))
    out = dict(lhs)
    for key, c in rhs.items():
        v = out.get(key, 0) - c
        if v:
            out[key] = v
        else:
            out.pop(key, None)
    return out


def closed_negative_controls(H: PDAlgebra, n: int) -> List[Finding]:
    """Outer/inner faces on closed models fail to commute with ``d`` exactly as predicted.

    ``(D_{n+1} d - d D_{n+1})(G_{n+1,n}) = i_n(w)`` and
    ``(D_n d - d D_n)(G_{n+1,n}) = e(H) i_n(w)``.
    """
    if n < 1:
        raise IndexOutOfRange("negative controls need n >= 1")
    E = build_model("kriz", H, n)
    omega_n = list(E.units)
    omega_n[n - 1] = H.orientation
    expected_last = E.element(omega_n)
    expected_inner = E.element(omega_n, c=euler_characteristic(H))
    out = []
    inst = f"{H.name} closed n={n + 1}"
    witness = f"G{n + 1},{n}"
    for k, expected, label in ((n + 1, expected_last, "i_n(w)"), (n, expected_inner, "e(H) i_n(w)")):
        defect = closed_face_defect(H, n, k)
        if defect != expected:
            out.append(Finding(f"closed D{k} defect = {label}", inst, "fail", witness))
        elif defect:
            out.append(Finding(f"closed D{k} defect = {label}", inst, "expected-failure", witness))
        else:
            # e(H) = 0: the inner face happens to commute on this witness
            out.append(Finding(f"closed D{k} defect = {label}", inst, "pass", witness))
    return out


# ------------------------------------------------------------ coaction

@dataclass(frozen=True)
class OrderedPartition:
    """Blocks ``T_0, ..., T_r`` covering ``1..n``; ``T_0`` may be empty."""

    blocks: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(sorted(b)) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        seen = [i for b in blocks for i in b]
        if len(set(seen)) != len(seen) or sorted(seen) != list(range(1, len(seen) + 1)):
            raise InvalidPartition(f"{self.blocks} is not a partition of 1..{len(seen)}")
        if len(blocks) < 1 or any(not b for b in blocks[1:]):
            raise InvalidPartition("blocks after T_0 must be non-empty")

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    def position(self, i: int) -> Tuple[int, int]:
        """``(block, phi^{-1}(i))`` with 1-based position inside the block."""
        for k, b in enumerate(self.blocks):
            if i in b:
                return k, b.index(i) + 1
        raise InvalidPartition(f"{i} not covered")


def coaction_target(H: PDAlgebra, part: OrderedPartition) -> Model:
    P, dbar = puncture(H)
    parts = [(P.algebra, dbar, len(part.blocks[0]))]
    parts += [(ground_algebra(), None, len(b)) for b in part.blocks[1:]]
    return build_block_model(parts, H.m, "x".join([f"E{len(part.blocks[0])}({H.name}°)"] +
                                                  [f"A{len(b)}" for b in part.blocks[1:]]))


def coaction(part: OrderedPartition, H: PDAlgebra, target: Optional[Model] = None) -> ChainMap:
    """``q_T: E_n(H°) -> E_{n_0}(H°) (x) A_{n_1} (x) ... (x) A_{n_r}``."""
    src = build_model("punctured", H, part.n)
    tgt = target or coaction_target(H, part)
    offsets, acc = [], 0
    for b in part.blocks:
        offsets.append(acc)
        acc += len(b)
    rules = []
    for s in range(1, part.n + 1):
        k, pos = part.position(s)
        rules.append((offsets[0] + pos - 1, None) if k == 0 else (None, None))

    def g(i, j):
        (ki, pi), (kj, pj) = part.position(i), part.position(j)
        if ki != kj:
            return None
        return offsets[ki] + pi, offsets[kj] + pj

    return generator_map(src, tgt, rules, g, f"q{part.blocks}")


def coaction_matches_last_face(H: PDAlgebra, n: int) -> Finding:
    """``q_T`` for ``T_0 = {1..n}``, ``T_1 = {n+1}`` is ``D_{n+1}``."""
    part = OrderedPartition((tuple(range(1, n + 1)), (n + 1,)))
    q = coaction(part, H)
    D = face(n + 1, n, H)
    inst = f"{H.name}° n={n + 1}"
    # identify E_n(H°) (x) A_1 with E_n(H°): drop the trailing unit slot
    tgt = q.target
    relabel = {}
    for idx, (mono, coef) in enumerate(tgt.basis):
        relabel[idx] = D.target.index[(mono, coef[:n])]
    for i in range(q.source.dim):
        img = {relabel[k]: c for k, c in q(i).items()}
        if img != D(i):
            return Finding("q_T = D_{n+1}", inst, "fail", q.source.describe(i))
    return Finding("q_T = D_{n+1}", inst, "pass")


def all_partitions(n: int, max_blocks: int = 3) -> List[OrderedPartition]:
    """Ordered partitions of ``1..n``: ``T_0`` (possibly empty) then up to ``max_blocks - 1`` blocks."""
    out = []
    for labels in product(range(max_blocks), repeat=n):
        used = sorted(set(labels) - {0})
        if used != list(range(1, len(used) + 1)):
            continue
        blocks = [tuple(i + 1 for i in range(n) if labels[i] == k) for k in range(len(used) + 1)]
        out.append(OrderedPartition(tuple(blocks)))
    return out


# ------------------------------------------------------------ connected sum

def connected_sum_map(H: PDAlgebra, K: PDAlgebra, r: int, s: int) -> ChainMap:
    """``chi: E_{r+s}(H#K) -> E_r(H°) (x) E_s(K°)``; cross generators go to zero."""
    S, pi_h, pi_k = connected_sum(H, K)
    src = build_model("kriz", S, r + s)
    Ph, dh = puncture(H)
    Pk, dk = puncture(K)
    tgt = build_block_model([(Ph.algebra, dh, r), (Pk.algebra, dk, s)], H.m,
                            f"E{r}({H.name}°)xE{s}({K.name}°)")
    rules = [(t, pi_h) for t in range(r)] + [(t, pi_k) for t in range(r, r + s)]

    def g(i, j):
        if (i <= r) == (j <= r):
            return i, j
        return None

    return generator_map(src, tgt, rules, g, f"chi[{r},{s}]")


def sigma_suite(model: Model, instance: str, limit: int = 24) -> List[Finding]:
    """Chain-map property and group law for the permutations acting on ``model``."""
    n = model.n
    perms = [p for p in permutations(range(1, n + 1)) if model.kind != "j" or p[0] == 1][:limit]
    out = []
    maps = {p: sigma_action(p, model) for p in perms}
    for p, f in maps.items():
        out.append(check_chain(f, instance))
    for p in perms[:6]:
        for q in perms[:6]:
            lhs = maps[p].compose(maps[q])
            pq = compose_perm(p, q)
            rhs = maps.get(pq) or sigma_action(pq, model)
            out.append(check_equal(f"group law {p}{q}", lhs, rhs, instance))
    return out


def report(findings: Sequence[Finding]) -> dict:
    """JSON report: overall verdict, counts by status, and every finding with its witness."""
    counts: Dict[str, int] = {}
    for f in findings:
        counts[f.status] = counts.get(f.status, 0) + 1
    return {"ok": all(f.ok for f in findings), "counts": counts,
            "findings": [f.to_json() for f in findings]}
