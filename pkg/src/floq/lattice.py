"""
Two-dimensional periodic potentials on a full-rank sublattice of ``Z^2``.

A lattice is brought to Hermite normal form ``(a, 0), (b, c)`` with
``0 <= b < a``; its ``N = a*c`` sites are the points ``(x, y)`` with
``0 <= x < a`` and ``0 <= y < c``. The Floquet matrix carries one Laurent
variable per Hermite basis vector: ``z1`` for ``(a, 0)`` and ``z2`` for
``(b, c)``.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

try:
    from sympy.core.intfunc import igcdex
except ImportError:  # pragma: no cover  sympy < 1.13
    from sympy.core.numbers import igcdex

from floq.errors import CeilingExceededError, LatticeError, LeadingTermError
from floq.floquet import LAMBDA, InvariantSystem, SymbolicMatrix, Variant, char_poly, invariants_from_char_poly, \
    potential_names
from floq.grobner import groebner_generators
from floq.polycore import Domain, GaussianRational, MultiPoly, VariableTable
from floq.solver import DEFAULT_CEILING, solve_variety
from floq.symmetry import GroupKind


__all__ = [
    "UNIT_STEPS",
    "LatticeBasis",
    "RigidityVerdict",
    "hermite_and_cosets",
    "build_floquet_lattice",
    "lattice_invariants",
    "generic_samples",
    "rigidity_check",
    "enumerate_hnf",
    "parse_generators",
]


log = logging.getLogger(__name__)

UNIT_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))

Point = Tuple[int, int]


@dataclass(frozen=True)
class LatticeBasis:
    """
    Sublattice of ``Z^2`` in Hermite normal form.

    :ivar gens: Generator rows as given.
    :type gens: tuple[tuple[int, int], tuple[int, int]]
    :ivar a: First Hermite vector is ``(a, 0)``.
    :type a: int
    :ivar b: Second Hermite vector is ``(b, c)``, ``0 <= b < a``.
    :type b: int
    :ivar c: See ``b``.
    :type c: int
    :ivar representatives: Coset representatives, one per site.
    :type representatives: tuple[tuple[int, int], ...]
    """
    gens: Tuple[Point, Point]
    a: int
    b: int
    c: int
    representatives: Tuple[Point, ...]

    @property
    def index(self) -> int:
        return self.a * self.c

    @property
    def hnf(self) -> Tuple[Point, Point]:
        return (self.a, 0), (self.b, self.c)

    def reduce(self, point: Point) -> Tuple[Point, Tuple[int, int]]:
        """
        Write ``point = (x, y) + m1*(a, 0) + m2*(b, c)`` with ``(x, y)`` in the
        standard box and return ``((x, y), (m1, m2))``.
        """
        px, py = point
        m2, y = divmod(py, self.c)
        m1, x = divmod(px - m2 * self.b, self.a)
        return (x, y), (m1, m2)

    def to_dict(self) -> Dict[str, Any]:
        return {"gens": [list(g) for g in self.gens], "hnf": {"a": self.a, "b": self.b, "c": self.c},
                "index": self.index}


def hermite_and_cosets(gens: Sequence[Sequence[int]]) -> LatticeBasis:
    """
    Hermite normal form and standard coset representatives of the lattice spanned by the rows of ``gens``.

    :raises LatticeError: if ``gens`` is not a 2x2 integer matrix of nonzero determinant.
    """
    try:
        (x1, y1), (x2, y2) = [(int(u), int(v)) for u, v in gens]
    except (TypeError, ValueError) as e:
        raise LatticeError(f"lattice generators must be two integer pairs, got {gens!r}") from e
    det = x1 * y2 - x2 * y1
    if det == 0:
        raise LatticeError(f"lattice generators ({x1},{y1}), ({x2},{y2}) are linearly dependent")
    s, t, c = (int(v) for v in igcdex(y1, y2))
    if c < 0:
        s, t, c = -s, -t, -c
    a = abs(det) // c
    b = (s * x1 + t * x2) % a
    reps = tuple((x, y) for y in range(c) for x in range(a))
    log.debug(f"Lattice ({x1},{y1}), ({x2},{y2}) has Hermite form a={a} b={b} c={c}")
    return LatticeBasis(((x1, y1), (x2, y2)), a, b, c, reps)


def parse_generators(text: str) -> Tuple[Point, Point]:
    """
    Parse ``"a b; c d"`` into two generator rows.

    :raises LatticeError: on malformed text.
    """
    rows = [r.split() for r in text.split(";")]
    try:
        (x1, y1), (x2, y2) = [(int(u), int(v)) for u, v in rows]
    except ValueError as e:
        raise LatticeError(f"expected lattice generators as 'a b; c d', got {text!r}") from e
    return (x1, y1), (x2, y2)


def lattice_table(L: LatticeBasis) -> VariableTable:
    return VariableTable(potential_names(L.index) + [LAMBDA, "z1", "z2"], laurent=["z1", "z2"])


def build_floquet_lattice(L: LatticeBasis, representatives: Optional[Sequence[Point]] = None,
                          domain: Domain = Domain.BIG_RATIONAL) -> SymbolicMatrix:
    """
    Floquet matrix of the ``L``-periodic potential ``v1..vN``.

    Entry ``(s, s')`` sums ``z1^m1 * z2^m2`` over the unit steps taking site
    ``s`` to a translate ``rep(s') + m1*(a, 0) + m2*(b, c)``. The sites are
    ``L.representatives`` unless other representatives of the same cosets
    are given.

    :raises LatticeError: if ``representatives`` is not a complete set of coset representatives.
    """
    reps = tuple(representatives) if representatives is not None else L.representatives
    lookup: Dict[Point, Tuple[int, Tuple[int, int]]] = {}
    for k, rep in enumerate(reps):
        residue, shift = L.reduce(rep)
        if residue in lookup:
            raise LatticeError(f"representatives {reps[lookup[residue][0]]} and {rep} lie in the same coset")
        lookup[residue] = (k, shift)
    if len(lookup) != L.index:
        raise LatticeError(f"{len(lookup)} representatives given for a lattice of index {L.index}")

    table = lattice_table(L)
    n = L.index
    exps: List[List[Dict[Tuple[int, int], int]]] = [[{} for _ in range(n)] for _ in range(n)]
    for s, (px, py) in enumerate(reps):
        for dx, dy in UNIT_STEPS:
            residue, (m1, m2) = L.reduce((px + dx, py + dy))
            target, (r1, r2) = lookup[residue]
            key = (m1 - r1, m2 - r2)
            exps[s][target][key] = exps[s][target].get(key, 0) + 1

    z1, z2 = table.index("z1"), table.index("z2")
    rows = []
    for s in range(n):
        row = []
        for t in range(n):
            terms = {}
            for (m1, m2), count in exps[s][t].items():
                e = [0] * len(table)
                e[z1], e[z2] = m1, m2
                terms[tuple(e)] = count
            entry = MultiPoly(table, terms, domain)
            if s == t:
                entry = entry + MultiPoly.variable(table, f"v{s + 1}", domain)
            row.append(entry)
        rows.append(row)
    return SymbolicMatrix.from_rows(rows)


def _system_at(L: LatticeBasis, M: SymbolicMatrix, sample: Tuple[Any, Any]) -> InvariantSystem:
    names = potential_names(L.index)
    domain = Domain.widest([M.domain, Domain.of(sample[0]), Domain.of(sample[1])])
    table = VariableTable(names + [LAMBDA])
    specialized = M.substitute({"z1": sample[0], "z2": sample[1]}, table, domain)
    generators = invariants_from_char_poly(char_poly(specialized), L.index, names, VariableTable(names))
    return InvariantSystem(L.index, Variant.FULL, tuple(generators), tuple(names), sample=tuple(sample))


def lattice_invariants(L: LatticeBasis, samples: Sequence[Tuple[Any, Any]],
                       representatives: Optional[Sequence[Point]] = None, threads: Optional[int] = None,
                       check_first: bool = True, tol: float = 1e-9) -> List[InvariantSystem]:
    """
    One invariant system per torus sample ``(z1, z2)``.

    The generators of each system are the signed ``lam`` coefficients of the
    potential-dependent part of ``det(L_V(z) - lam*I)``.

    :raises LeadingTermError: if ``check_first`` and the first system lacks
        elementary symmetric leading forms.
    """
    M = build_floquet_lattice(L, representatives)
    workers = max(1, threads or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        systems = list(pool.map(lambda z: _system_at(L, M, z), samples))
    if check_first and systems:
        defects = systems[0].leading_form_defects(tol)
        if defects:
            raise LeadingTermError(defects[0], f"invariant at sample {samples[0]} has no elementary leading form")
    return systems


def _circle_point(t: Fraction) -> GaussianRational:
    # rational point (1 - t^2, 2t) / (1 + t^2) of the unit circle
    d = 1 + t * t
    return GaussianRational((1 - t * t) / d, 2 * t / d)


def generic_samples(L: LatticeBasis, seed: int = 0, count: int = 4, bound: int = 64) -> List[Tuple[GaussianRational, GaussianRational]]:
    """
    Seeded exact points of the unit torus.

    Angles are drawn uniformly and snapped to rational points of the circle
    with parameter denominators up to ``bound``. No such point other than
    ``±1`` and ``±i`` is a root of unity, and those are never returned.
    """
    rng = np.random.default_rng(seed)
    out: List[Tuple[GaussianRational, GaussianRational]] = []
    seen = set()
    while len(out) < count:
        pair = []
        for angle in rng.uniform(0.0, 2 * math.pi, size=2):
            t = Fraction(math.tan(angle / 2)).limit_denominator(bound)
            pair.append(t)
        if any(t in (0, 1, -1) or abs(t) > bound for t in pair) or tuple(pair) in seen:
            continue
        seen.add(tuple(pair))
        out.append((_circle_point(pair[0]), _circle_point(pair[1])))
    log.debug(f"Torus samples for index {L.index}: {[(str(a), str(b)) for a, b in out]}")
    return out


@dataclass(frozen=True)
class RigidityVerdict:
    """
    Outcome of a rigidity check.

    :ivar verdict: ``"rigid"``, ``"counterexample"`` or ``"undetermined"``.
    :type verdict: str
    :ivar survivors: Nonzero candidates within tolerance at every extra sample.
    :type survivors: list[tuple[complex, ...]]
    :ivar candidates: Nonzero points of the variety at the base sample.
    :type candidates: int
    :ivar origin_multiplicity: Multiplicity of the origin at the base sample.
    :type origin_multiplicity: int
    """
    lattice: LatticeBasis
    verdict: str
    survivors: List[Tuple[complex, ...]] = field(default_factory=list)
    candidates: int = 0
    origin_multiplicity: int = 0
    samples: List[Tuple[Any, Any]] = field(default_factory=list)
    reason: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lattice": [list(g) for g in self.lattice.gens],
            "hnf": {"a": self.lattice.a, "b": self.lattice.b, "c": self.lattice.c},
            "index": self.lattice.index,
            "verdict": self.verdict,
            "survivors": [[[z.real, z.imag] for z in point] for point in self.survivors],
            "candidates": self.candidates,
            "origin_multiplicity": self.origin_multiplicity,
            "samples": [[str(a), str(b)] for a, b in self.samples],
            "reason": self.reason,
        }


def _residual(system: InvariantSystem, point: Sequence[complex]) -> float:
    assignment = system.assignment(point)
    return max(abs(g.evaluate(assignment, Domain.COMPLEX_DOUBLE)) for g in system.generators)


def rigidity_check(L: LatticeBasis, seed: int = 0, tol: float = 1e-6, extra_samples: int = 3,
                   ceiling: int = DEFAULT_CEILING, threads: Optional[int] = None, attempts: int = 3) -> RigidityVerdict:
    """
    Decide numerically whether ``0`` is the only potential Floquet isospectral to ``0``.

    The variety at one generic torus sample is solved in full; its nonzero
    points are kept only while every invariant stays within ``tol`` at each
    of ``extra_samples`` further samples.

    :raises CeilingExceededError: if ``N!`` exceeds ``ceiling``.
    """
    if math.factorial(L.index) > ceiling:
        raise CeilingExceededError(
            f"lattice of index {L.index} needs a quotient of size {math.factorial(L.index)}, above {ceiling}")
    samples = generic_samples(L, seed, attempts + extra_samples)
    base = None
    for k in range(attempts):
        try:
            system, = lattice_invariants(L, [samples[k]], threads=threads)
            base = groebner_generators(system)
            break
        except LeadingTermError as e:
            log.warning(f"Sample {k} of lattice {L.hnf} rejected: {e}")
    if base is None:
        return RigidityVerdict(L, "undetermined", samples=samples[:attempts], reason="no sample gave a closed-form basis")
    used = samples[k]
    extra = samples[attempts:]

    S = solve_variety(base, seed=seed, group=GroupKind.NONE, threads=threads, ceiling=ceiling)
    zero = sum(p.multiplicity for p in S.points if p.is_zero)
    survivors = [p.coords for p in S.nonzero()]
    candidates = len(survivors)
    for system in lattice_invariants(L, extra, threads=threads, check_first=False):
        survivors = [c for c in survivors if _residual(system, c) <= tol]
        log.debug(f"Lattice {L.hnf}: {len(survivors)} of {candidates} candidates left after sample {system.sample}")

    verdict = "counterexample" if survivors else "rigid"
    log.info(f"Lattice {L.hnf} index {L.index}: {verdict} ({candidates} candidates, {len(survivors)} survivors)")
    return RigidityVerdict(L, verdict, survivors, candidates, zero, [used] + list(extra))


def enumerate_hnf(max_index: int, gcd_bound: int) -> List[LatticeBasis]:
    """Every Hermite form with ``a*c <= max_index``, ``gcd(a, b) <= gcd_bound`` and ``c <= gcd_bound``."""
    out = []
    for c in range(1, gcd_bound + 1):
        for a in range(1, max_index // c + 1):
            for b in range(a):
                if math.gcd(a, b) <= gcd_bound:
                    out.append(hermite_and_cosets(((a, 0), (b, c))))
    return out
