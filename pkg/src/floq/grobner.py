"""
Closed-form Gröbner bases of ideals generated by perturbed elementary symmetric polynomials.

For generators ``p_1..p_n`` whose top-degree parts are ``e_1..e_n`` the
polynomials ``g_k = -sum_j H(k, k-j) (-1)^j p_j`` form a grevlex Gröbner basis
with ``LT(g_k) = v_k^k``. No Buchberger step is run: the basis is built from
the formula and then checked.
"""
import heapq
import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement, product
from math import factorial
from typing import Any, Dict, List, Optional, Sequence, Tuple

from floq.errors import LeadingTermError
from floq.floquet import InvariantSystem, Variant, elementary
from floq.polycore import MAX, Domain, ExponentVector, MultiPoly, VariableTable, grevlex_key


__all__ = [
    "GroebnerSystem",
    "complete_homogeneous",
    "symmetric_bases",
    "groebner_generators",
    "normal_form",
    "standard_monomials",
    "hilbert_function",
    "hilbert_polynomial",
    "expected_basis_size",
]


log = logging.getLogger(__name__)


def complete_homogeneous(table: VariableTable, names: Sequence[str], a: int, b: int, squared: bool = False,
                         domain: Domain = Domain.BIG_RATIONAL) -> MultiPoly:
    """
    ``H(a, b)``: every degree-``b`` monomial in ``names[a-1:]``, each with coefficient 1.

    With ``squared`` the monomials are taken in the squares of the variables.

    :raises ValueError: if ``a`` is outside ``1..len(names)`` or ``b < 0``.
    """
    if not 1 <= a <= len(names) or b < 0:
        raise ValueError(f"H({a}, {b}) is out of range for {len(names)} variables")
    power = 2 if squared else 1
    positions = [table.index(n) for n in names[a - 1:]]
    terms = {}
    for combo in combinations_with_replacement(positions, b):
        exps = [0] * len(table)
        for i in combo:
            exps[i] += power
        terms[tuple(exps)] = 1
    return MultiPoly(table, terms, domain)


def symmetric_bases(kind: str, table: VariableTable, names: Sequence[str], *args: int, squared: bool = False,
                    domain: Domain = Domain.BIG_RATIONAL) -> MultiPoly:
    """
    Build ``e_k`` (``kind="elementary"``, ``args=(k,)``) or ``H(a, b)``
    (``kind="complete_from"``, ``args=(a, b)``); ``squared`` gives ``e'_k`` and ``H'(a, b)``.

    :raises ValueError: on an unknown kind or out-of-range indices.
    """
    if kind == "elementary":
        k, = args
        if not 0 <= k <= len(names):
            raise ValueError(f"e_{k} is out of range for {len(names)} variables")
        return elementary(table, names, k, squared, domain)
    if kind == "complete_from":
        a, b = args
        return complete_homogeneous(table, names, a, b, squared, domain)
    raise ValueError(f"unknown symmetric basis kind {kind!r}")


@dataclass(frozen=True)
class GroebnerSystem:
    """
    Verified closed-form basis together with its quotient data.

    :ivar source: Invariant system the basis was built from.
    :type source: InvariantSystem
    :ivar generators: ``g_1..g_N``.
    :type generators: tuple[MultiPoly, ...]
    :ivar leading: ``(position, power)`` of each pure-power leading monomial.
    :type leading: tuple[tuple[int, int], ...]
    :ivar basis: Standard monomials, grevlex ascending.
    :type basis: tuple[tuple[int, ...], ...]
    :ivar sign_convention: ``"signed"`` or ``"unsigned"`` combination of the invariants.
    :type sign_convention: str
    """
    source: InvariantSystem
    generators: Tuple[MultiPoly, ...]
    leading: Tuple[Tuple[int, int], ...]
    basis: Tuple[ExponentVector, ...]
    sign_convention: str

    @property
    def variant(self) -> Variant:
        return self.source.variant

    @property
    def n(self) -> int:
        return self.source.n

    @property
    def table(self) -> VariableTable:
        return self.source.table

    @property
    def domain(self) -> Domain:
        return self.source.domain

    @property
    def variables(self) -> Tuple[str, ...]:
        return self.source.variables

    @property
    def leading_exponents(self) -> List[ExponentVector]:
        out = []
        for position, power in self.leading:
            exps = [0] * len(self.table)
            exps[position] = power
            out.append(tuple(exps))
        return out

    @property
    def lt_list(self) -> List[str]:
        return [f"{self.table.names[p]}^{e}" for p, e in self.leading]

    def divisor_index(self, exps: Sequence[int]) -> Optional[int]:
        """Smallest ``k`` (zero-based) whose leading monomial divides ``exps``."""
        for k, (position, power) in enumerate(self.leading):
            if exps[position] >= power:
                return k
        return None

    def tail(self, k: int) -> List[Tuple[ExponentVector, Any]]:
        """Terms of ``g_{k+1}`` below the leading one, divided by the leading coefficient."""
        exps = self.leading_exponents[k]
        g = self.generators[k]
        lc = g.terms[exps]
        return [(e, _divide(c, lc, self.domain)) for e, c in g.terms.items() if e != exps]


def _divide(c, lc, domain: Domain):
    if lc == 1:
        return c
    if domain is Domain.BIG_RATIONAL:
        return domain.convert(Fraction(c) / Fraction(lc))
    return c / lc


def _combine(system: InvariantSystem, signed: bool) -> List[MultiPoly]:
    names = system.unknowns
    squared = system.variant is Variant.SPECIALIZED
    generators = []
    for k in range(1, len(names) + 1):
        g = MultiPoly.zero(system.table, system.domain)
        for j in range(1, k + 1):
            term = complete_homogeneous(system.table, names, k, k - j, squared, system.domain) * system.generators[j - 1]
            g = g + (term if not signed or j % 2 else -term)
        generators.append(g)
    return generators


def _check(system: InvariantSystem, generators: List[MultiPoly], tol: float) -> Tuple[Optional[int], str]:
    names = system.unknowns
    squared = system.variant is Variant.SPECIALIZED
    power_of = 2 if squared else 1
    for k, g in enumerate(generators, start=1):
        if g.is_zero():
            return k, "generator vanishes"
        exps, lc = g.leading_term()
        position = system.table.index(names[k - 1])
        expected = [0] * len(system.table)
        expected[position] = power_of * k
        if exps != tuple(expected):
            found = "*".join(f"{n}^{e}" for n, e in zip(system.table.names, exps) if e) or "1"
            return k, f"leading monomial is {found}, expected {names[k - 1]}^{power_of * k}"
        if abs(complex(lc) - 1) > tol:
            return k, f"leading coefficient is {lc}, expected 1"
        if system.variant is Variant.EXTENDED:
            continue
        diff = g.homogeneous_part(MAX, names) - complete_homogeneous(system.table, names, k, k, squared, system.domain)
        if any(abs(complex(c)) > tol for c in diff.terms.values()):
            return k, "top-degree part differs from H(k, k)"
    return None, ""


def standard_monomials(G: GroebnerSystem) -> List[ExponentVector]:
    """The standard monomial basis of ``G``, grevlex ascending."""
    return list(G.basis)


def _standard_monomials(system: InvariantSystem) -> Tuple[ExponentVector, ...]:
    table = system.table
    positions = [table.index(n) for n in system.unknowns]
    scale = 2 if system.variant is Variant.SPECIALIZED else 1
    ranges = [range(scale * ell) for ell in range(1, len(positions) + 1)]
    basis = []
    for exps in product(*ranges):
        full = [0] * len(table)
        for position, e in zip(positions, exps):
            full[position] = e
        basis.append(tuple(full))
    basis.sort(key=lambda e: grevlex_key(e, table))
    return tuple(basis)


def groebner_generators(system: InvariantSystem, tol: float = 1e-9) -> GroebnerSystem:
    """
    Build and verify the closed-form basis of ``system``.

    The specialized system is first combined without the alternating sign;
    if that fails the leading-term check the signed combination is used.
    The convention in use is recorded on the result.

    :raises LeadingTermError: if the final combination fails its check.
    """
    defects = system.leading_form_defects(tol)
    if defects:
        raise LeadingTermError(defects[0], "invariant does not have an elementary symmetric leading form")
    conventions = ["unsigned", "signed"] if system.variant is Variant.SPECIALIZED else ["signed"]
    failure: Tuple[Optional[int], str] = (None, "")
    for convention in conventions:
        generators = _combine(system, convention == "signed")
        failure = _check(system, generators, tol)
        if failure[0] is None:
            log.debug(f"Closed-form basis for {system.variant.value} n={system.n} uses the {convention} combination")
            names = system.unknowns
            power_of = 2 if system.variant is Variant.SPECIALIZED else 1
            leading = tuple((system.table.index(names[k]), power_of * (k + 1)) for k in range(len(names)))
            return GroebnerSystem(system, tuple(generators), leading, _standard_monomials(system), convention)
        log.debug(f"The {convention} combination fails at g_{failure[0]}: {failure[1]}")
    raise LeadingTermError(failure[0], failure[1])


def _heap_key(exps: Sequence[int]) -> tuple:
    return -sum(exps), tuple(reversed(exps))


def normal_form(f: MultiPoly, G: GroebnerSystem) -> MultiPoly:
    """
    Remainder of ``f`` on division by ``G``.

    The grevlex-greatest term is treated first and reduced by the generator of
    smallest index whose leading monomial divides it.
    """
    f = f.project(G.table)
    if f.domain is not G.domain:
        f = f.to_domain(Domain.widest([f.domain, G.domain]))
    tails = [G.tail(k) for k in range(len(G.generators))]
    powers = G.leading_exponents
    poly: Dict[ExponentVector, Any] = dict(f.terms)
    heap = [(_heap_key(e), e) for e in poly]
    heapq.heapify(heap)
    remainder: Dict[ExponentVector, Any] = {}
    while heap:
        _, exps = heapq.heappop(heap)
        c = poly.pop(exps, None)
        if c is None:
            continue
        k = G.divisor_index(exps)
        if k is None:
            remainder[exps] = c
            continue
        quotient = tuple(x - y for x, y in zip(exps, powers[k]))
        for te, tc in tails[k]:
            ne = tuple(x + y for x, y in zip(quotient, te))
            value = poly.get(ne, 0) - c * tc
            if value == 0:
                poly.pop(ne, None)
                continue
            if ne not in poly:
                heapq.heappush(heap, (_heap_key(ne), ne))
            poly[ne] = value
    return MultiPoly._raw(G.table, remainder, f.domain)


def _basis_degree(G: GroebnerSystem, exps: ExponentVector) -> int:
    return sum(exps[G.table.index(n)] for n in G.source.unknowns)


def hilbert_function(G: GroebnerSystem, s: int) -> int:
    """
    Number of standard monomials of total degree at most ``s``.

    For the extended system every ``b * t^j`` counts, so each ``b`` contributes
    ``s - deg(b) + 1`` monomials once ``s >= deg(b)``.
    """
    if s < 0:
        raise ValueError(f"s must be non-negative, got {s}")
    degrees = [_basis_degree(G, b) for b in G.basis]
    if G.variant is Variant.EXTENDED:
        return sum(max(0, s - d + 1) for d in degrees)
    return sum(1 for d in degrees if d <= s)


def hilbert_polynomial(G: GroebnerSystem) -> Tuple[int, int]:
    """``(slope, constant)`` of the eventual Hilbert polynomial ``slope*s + constant``."""
    size = len(G.basis)
    if G.variant is Variant.EXTENDED:
        return size, size - sum(_basis_degree(G, b) for b in G.basis)
    return 0, size


def expected_basis_size(variant: Variant, n: int) -> int:
    if variant is Variant.SPECIALIZED:
        m = n // 2
        return 2 ** m * factorial(m)
    return factorial(n)
