"""
Floquet matrices of the one-dimensional periodic operator and their spectral invariants.

``D_V(lam) = det(L_V - lam*I)`` is kept in Leibniz form (leading coefficient
``(-1)^n``). The invariants are the signed ``lam`` coefficients of the part of
``D_V`` that depends on the potential, so ``D_0`` never has to be subtracted.
"""
import json
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from floq.errors import (DimensionError, DomainMismatchError, GenericityError, LeadingTermError, PotentialFileError,
                         UnsupportedPeriodError, VariableTableError)
from floq.polycore import MAX, Domain, GaussianRational, MultiPoly, VariableTable, format_rational, parse_rational


__all__ = [
    "LAMBDA",
    "ZMode",
    "Variant",
    "VerifyMode",
    "SymbolicMatrix",
    "InvariantSystem",
    "IsospectralReport",
    "potential_names",
    "specialized_names",
    "elementary",
    "build_floquet_1d",
    "char_poly",
    "leibniz_det",
    "invariants_from_char_poly",
    "spectral_invariants",
    "specialized_invariants",
    "odd_coefficients_vanish",
    "extended_invariants",
    "verify_isospectral",
    "explicit_potential",
    "load_potential",
    "dump_potential",
]


log = logging.getLogger(__name__)

LAMBDA = "lam"


class ZMode(Enum):
    ONE = "one"
    SYMBOLIC = "symbolic"


class Variant(Enum):
    FULL = "full"
    SPECIALIZED = "specialized"
    EXTENDED = "extended"


class VerifyMode(Enum):
    EXACT = "exact"
    NUMERIC = "numeric"


def potential_names(n: int, prefix: str = "v") -> List[str]:
    return [f"{prefix}{j}" for j in range(1, n + 1)]


def specialized_names(n: int) -> List[str]:
    return potential_names(n // 2, "u")


def elementary(table: VariableTable, names: Sequence[str], k: int, squared: bool = False,
               domain: Domain = Domain.BIG_RATIONAL) -> MultiPoly:
    """``e_k`` of ``names`` (of their squares when ``squared``) over ``table``."""
    power = 2 if squared else 1
    positions = [table.index(n) for n in names]
    terms = {}
    for subset in combinations(positions, k):
        exps = [0] * len(table)
        for i in subset:
            exps[i] = power
        terms[tuple(exps)] = 1
    return MultiPoly(table, terms, domain)


@dataclass(frozen=True)
class SymbolicMatrix:
    """
    Square matrix of polynomials sharing one variable table.

    :ivar rows: Entries, row by row.
    :type rows: tuple[tuple[MultiPoly, ...], ...]
    """
    rows: Tuple[Tuple[MultiPoly, ...], ...]

    def __post_init__(self):
        size = len(self.rows)
        if size == 0 or any(len(r) != size for r in self.rows):
            raise DimensionError(f"matrix is not square: row lengths {[len(r) for r in self.rows]}")
        table, domain = self.rows[0][0].table, self.rows[0][0].domain
        for row in self.rows:
            for entry in row:
                if entry.table != table:
                    raise VariableTableError("matrix entries use different variable tables")
                if entry.domain is not domain:
                    raise DomainMismatchError("matrix entries use different coefficient domains")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[MultiPoly]]) -> "SymbolicMatrix":
        return cls(tuple(tuple(r) for r in rows))

    @property
    def size(self) -> int:
        return len(self.rows)

    @property
    def table(self) -> VariableTable:
        return self.rows[0][0].table

    @property
    def domain(self) -> Domain:
        return self.rows[0][0].domain

    def __getitem__(self, ij: Tuple[int, int]) -> MultiPoly:
        i, j = ij
        return self.rows[i][j]

    def map(self, fn: Callable[[MultiPoly], MultiPoly]) -> "SymbolicMatrix":
        return SymbolicMatrix(tuple(tuple(fn(e) for e in row) for row in self.rows))

    def substitute(self, images: Mapping[str, Any], table: Optional[VariableTable] = None,
                   domain: Optional[Domain] = None) -> "SymbolicMatrix":
        return self.map(lambda e: e.substitute(images, table, domain))

    def minus_lambda(self) -> "SymbolicMatrix":
        if LAMBDA not in self.table:
            raise VariableTableError(f"matrix table {self.table} has no {LAMBDA!r} variable")
        lam = MultiPoly.variable(self.table, LAMBDA, self.domain)
        return SymbolicMatrix(tuple(
            tuple(e - lam if i == j else e for j, e in enumerate(row)) for i, row in enumerate(self.rows)))

    def is_periodic_tridiagonal(self) -> bool:
        n = self.size
        if n < 3:
            return False
        for i, row in enumerate(self.rows):
            for j, entry in enumerate(row):
                if entry.is_zero() or abs(i - j) <= 1 or {i, j} == {0, n - 1}:
                    continue
                return False
        return True

    def to_text(self) -> str:
        return "\n".join("[" + ", ".join(e.to_text() for e in row) + "]" for row in self.rows)


def build_floquet_1d(n: int, z: ZMode = ZMode.ONE, domain: Domain = Domain.BIG_RATIONAL) -> SymbolicMatrix:
    """
    Floquet matrix of the period-``n`` potential.

    Diagonal ``v1..vn``, off-diagonals 1, corner ``z^-1`` at the top right and
    ``z`` at the bottom left (both 1 when ``z`` is :attr:`ZMode.ONE`).
    """
    if n < 3:
        raise UnsupportedPeriodError(f"period n={n} is not supported (n >= 3 required)")
    names = potential_names(n) + [LAMBDA]
    table = VariableTable(names + ["z"], laurent=["z"]) if z is ZMode.SYMBOLIC else VariableTable(names)
    zero = MultiPoly.zero(table, domain)
    one = MultiPoly.constant(table, 1, domain)
    rows = [[zero] * n for _ in range(n)]
    for j in range(n):
        rows[j][j] = MultiPoly.variable(table, f"v{j + 1}", domain)
    for j in range(n - 1):
        rows[j][j + 1] = one
        rows[j + 1][j] = one
    if z is ZMode.SYMBOLIC:
        rows[0][n - 1] = MultiPoly.variable(table, "z", domain, power=-1)
        rows[n - 1][0] = MultiPoly.variable(table, "z", domain)
    else:
        rows[0][n - 1] = one
        rows[n - 1][0] = one
    return SymbolicMatrix.from_rows(rows)


def _continuant(a: List[MultiPoly], cd: List[MultiPoly], i: int, j: int, one: MultiPoly) -> MultiPoly:
    # det of the tridiagonal block i..j
    prev, cur = one, one
    for k in range(i, j + 1):
        nxt = a[k] * cur if k == i else a[k] * cur - cd[k - 1] * prev
        prev, cur = cur, nxt
    return cur


def _periodic_det(A: SymbolicMatrix) -> MultiPoly:
    n = A.size
    one = MultiPoly.constant(A.table, 1, A.domain)
    a = [A[j, j] for j in range(n)]
    c = [A[j, j + 1] for j in range(n - 1)]
    d = [A[j + 1, j] for j in range(n - 1)]
    cd = [c[j] * d[j] for j in range(n - 1)]
    alpha, beta = A[0, n - 1], A[n - 1, 0]
    prod_c, prod_d = one, one
    for j in range(n - 1):
        prod_c, prod_d = prod_c * c[j], prod_d * d[j]
    cycles = alpha * prod_d + beta * prod_c
    if n % 2 == 0:
        cycles = -cycles
    return _continuant(a, cd, 0, n - 1, one) - alpha * beta * _continuant(a, cd, 1, n - 2, one) + cycles


def _laplace_det(A: SymbolicMatrix) -> MultiPoly:
    n = A.size
    one = MultiPoly.constant(A.table, 1, A.domain)
    memo: Dict[int, MultiPoly] = {}

    def minor(row: int, used: int) -> MultiPoly:
        if row == n:
            return one
        if used in memo:
            return memo[used]
        total = MultiPoly.zero(A.table, A.domain)
        position = 0
        for col in range(n):
            if used >> col & 1:
                continue
            entry = A[row, col]
            if not entry.is_zero():
                term = entry * minor(row + 1, used | 1 << col)
                total = total - term if position % 2 else total + term
            position += 1
        memo[used] = total
        return total

    return minor(0, 0)


def leibniz_det(A: SymbolicMatrix) -> MultiPoly:
    """Determinant as the plain signed sum over all permutations."""
    n = A.size
    total = MultiPoly.zero(A.table, A.domain)
    for perm in permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = MultiPoly.constant(A.table, 1, A.domain)
        for i, j in enumerate(perm):
            term = term * A[i, j]
            if term.is_zero():
                break
        total = total - term if inversions % 2 else total + term
    return total


def char_poly(M: SymbolicMatrix) -> MultiPoly:
    """``det(M - lam*I)``, exact in the matrix domain."""
    A = M.minus_lambda()
    if A.is_periodic_tridiagonal():
        return _periodic_det(A)
    return _laplace_det(A)


def invariants_from_char_poly(D: MultiPoly, size: int, names: Sequence[str],
                              table: VariableTable) -> List[MultiPoly]:
    """
    ``(-1)^(size-k) [lam^(size-k)] zeta`` for ``k = 1..size``.

    ``zeta`` is the part of ``D`` depending on ``names``; the result is
    projected onto ``table``.
    """
    _, zeta = D.split_by(names)
    generators = []
    for k in range(1, size + 1):
        coeff = zeta.coeff_extract(LAMBDA, size - k)
        if (size - k) % 2:
            coeff = -coeff
        generators.append(coeff.project(table))
    return generators


@dataclass(frozen=True)
class InvariantSystem:
    """
    Generators whose common zeros are the potentials isospectral to zero.

    :ivar n: Period.
    :type n: int
    :ivar variant: Which system the generators form.
    :type variant: Variant
    :ivar generators: ``p_k``, ``p'_k`` or ``h_k`` in order.
    :type generators: tuple[MultiPoly, ...]
    :ivar variables: Ordered unknowns of the system (``t`` last for the extended one).
    :type variables: tuple[str, ...]
    :ivar vprime: Reference point of the extended system.
    :type vprime: Optional[tuple]
    :ivar sample: Torus point the generators were taken at (lattice systems).
    :type sample: Optional[tuple[complex, complex]]
    """
    n: int
    variant: Variant
    generators: Tuple[MultiPoly, ...]
    variables: Tuple[str, ...]
    vprime: Optional[Tuple[Any, ...]] = None
    sample: Optional[Tuple[Any, ...]] = None

    @property
    def m(self) -> int:
        return self.n // 2

    @property
    def table(self) -> VariableTable:
        return self.generators[0].table

    @property
    def domain(self) -> Domain:
        return self.generators[0].domain

    @property
    def unknowns(self) -> Tuple[str, ...]:
        """Variables the leading forms are symmetric in (``t`` excluded)."""
        if self.variant is Variant.EXTENDED:
            return self.variables[:-1]
        return self.variables

    def expected_leading_form(self, k: int) -> MultiPoly:
        return elementary(self.table, self.unknowns, k, squared=self.variant is Variant.SPECIALIZED,
                          domain=self.domain)

    def leading_form_defects(self, tol: float = 0.0) -> List[int]:
        """Indices ``k`` whose top-degree part differs from the expected elementary form."""
        bad = []
        for k, g in enumerate(self.generators, start=1):
            top = g.homogeneous_part(MAX, self.unknowns)
            diff = top - self.expected_leading_form(k)
            if self.domain.is_exact:
                if not diff.is_zero():
                    bad.append(k)
            elif any(abs(c) > tol for c in diff.terms.values()):
                bad.append(k)
        return bad

    def potential(self, point: Sequence[Any]) -> List[Any]:
        """Map a solution point of the system to potential coordinates ``v1..vn``."""
        if self.variant is Variant.SPECIALIZED:
            u = list(point)
            middle = [0 * u[0]] if self.n % 2 else []
            return u + middle + [-x for x in reversed(u)]
        return list(point[:self.n])

    def assignment(self, point: Sequence[Any]) -> Dict[str, Any]:
        if len(point) != len(self.variables):
            raise DimensionError(f"point has {len(point)} coordinates, system has {len(self.variables)} unknowns")
        return dict(zip(self.variables, point))


@lru_cache(maxsize=None)
def spectral_invariants(n: int, z: ZMode = ZMode.ONE) -> InvariantSystem:
    """
    The full system ``p_1..p_n`` over ``v1..vn``.

    With a symbolic ``z`` the corner terms only enter ``D_0``, so the
    generators come out identical and free of ``z``.
    """
    M = build_floquet_1d(n, z)
    D = char_poly(M)
    names = potential_names(n)
    table = VariableTable(names)
    generators = invariants_from_char_poly(D, n, names, table)
    system = InvariantSystem(n, Variant.FULL, tuple(generators), tuple(names))
    defects = system.leading_form_defects()
    if defects:
        raise LeadingTermError(defects[0], "top-degree part of p_k is not the elementary symmetric polynomial")
    log.debug(f"Spectral invariants for n={n}: {[len(g.terms) for g in generators]} terms")
    return system


def _specialized_zeta(n: int) -> Tuple[MultiPoly, VariableTable]:
    if n < 4:
        raise UnsupportedPeriodError(f"the specialized system needs n >= 4, got n={n}")
    u = specialized_names(n)
    m = len(u)
    table = VariableTable(u + [LAMBDA])
    images: Dict[str, Any] = {}
    for j in range(m):
        images[f"v{j + 1}"] = MultiPoly.variable(table, u[j])
        images[f"v{n - j}"] = -MultiPoly.variable(table, u[j])
    if n % 2:
        images[f"v{m + 1}"] = 0
    M = build_floquet_1d(n).substitute(images, table, Domain.BIG_RATIONAL)
    _, zeta = char_poly(M).split_by(u)
    return zeta, table


def odd_coefficients_vanish(n: int) -> bool:
    """True when every ``[lam^(n-2k-1)] zeta_U`` is identically zero."""
    zeta, _ = _specialized_zeta(n)
    return all(zeta.coeff_extract(LAMBDA, p).is_zero() for p in range(n + 1) if (n - p) % 2)


@lru_cache(maxsize=None)
def specialized_invariants(n: int) -> InvariantSystem:
    """The halved system ``p'_k = (-1)^(n+k) [lam^(n-2k)] zeta_U`` over ``u1..um``."""
    zeta, table = _specialized_zeta(n)
    u = specialized_names(n)
    gen_table = VariableTable(u)
    generators = []
    for k in range(1, len(u) + 1):
        coeff = zeta.coeff_extract(LAMBDA, n - 2 * k)
        if (n + k) % 2:
            coeff = -coeff
        generators.append(coeff.project(gen_table))
    system = InvariantSystem(n, Variant.SPECIALIZED, tuple(generators), tuple(u))
    defects = system.leading_form_defects()
    if defects:
        raise LeadingTermError(defects[0], "top-degree part of p'_k is not elementary in the squares")
    return system


def extended_invariants(n: int, vprime: Sequence[Any]) -> InvariantSystem:
    """
    ``h_k(v, t) = p_k(v) - p_k(t*V')`` over ``v1..vn, t``.

    :raises GenericityError: if ``vprime`` repeats a coordinate.
    :raises DimensionError: if ``vprime`` does not have ``n`` coordinates.
    """
    if len(vprime) != n:
        raise DimensionError(f"V' has {len(vprime)} coordinates, expected {n}")
    domain = Domain.widest(Domain.of(x) for x in vprime)
    if not domain.is_exact:
        raise DomainMismatchError("V' must be an exact point")
    vprime = tuple(domain.convert(x) for x in vprime)
    if len(set(vprime)) != n:
        raise GenericityError(f"V' coordinates are not pairwise distinct: {[domain.format(x) for x in vprime]}")
    names = potential_names(n)
    table = VariableTable(names + ["t"])
    t = MultiPoly.variable(table, "t", domain)
    images = {name: t.scale(x) for name, x in zip(names, vprime)}
    generators = []
    for p in spectral_invariants(n).generators:
        lifted = p.project(table).to_domain(domain)
        generators.append(lifted - lifted.substitute(images, table, domain))
    return InvariantSystem(n, Variant.EXTENDED, tuple(generators), tuple(names + ["t"]), vprime=vprime)


@dataclass(frozen=True)
class IsospectralReport:
    """
    Outcome of evaluating the invariants at a potential.

    :ivar isospectral: Whether every invariant vanishes (exactly, or within ``tol``).
    :type isospectral: bool
    :ivar residuals: ``p_k(V)`` (exact mode) or ``|p_k(V)|`` (numeric mode).
    :type residuals: list
    :ivar max_residual: Largest absolute residual.
    :type max_residual: float
    :ivar mode: Evaluation mode.
    :type mode: VerifyMode
    """
    isospectral: bool
    residuals: List[Any]
    max_residual: float
    mode: VerifyMode
    tol: float = 0.0


def verify_isospectral(n: int, V: Sequence[Any], mode: VerifyMode = VerifyMode.EXACT,
                       tol: float = 1e-8) -> IsospectralReport:
    """
    Decide whether the period-``n`` potential ``V`` is Floquet isospectral to zero.

    :raises DimensionError: if ``V`` does not have ``n`` coordinates.
    :raises DomainMismatchError: in exact mode, if a coordinate is not a Gaussian rational.
    """
    if len(V) != n:
        raise DimensionError(f"potential has {len(V)} coordinates, expected {n}")
    system = spectral_invariants(n)
    if mode is VerifyMode.EXACT:
        point = [Domain.GAUSSIAN_RATIONAL.convert(x) for x in V]
        values = [g.evaluate(system.assignment(point), Domain.GAUSSIAN_RATIONAL) for g in system.generators]
        max_residual = max(abs(complex(x)) for x in values)
        return IsospectralReport(all(x == 0 for x in values), values, max_residual, mode)
    point = [Domain.COMPLEX_DOUBLE.convert(x) for x in V]
    values = [abs(g.evaluate(system.assignment(point), Domain.COMPLEX_DOUBLE)) for g in system.generators]
    max_residual = max(values)
    return IsospectralReport(max_residual <= tol, values, max_residual, mode, tol)


def explicit_potential(n: int) -> List[GaussianRational]:
    """
    The even-period potential with ``V(1)=1+i, V(2)=1-i, V(m+1)=-1+i, V(m+2)=-1-i``.

    :raises UnsupportedPeriodError: for odd ``n`` or ``n < 4``.
    """
    if n < 4 or n % 2:
        raise UnsupportedPeriodError(f"the explicit potential needs an even n >= 4, got n={n}")
    m = n // 2
    V = [GaussianRational(0, 0) for _ in range(n)]
    V[0] = GaussianRational(1, 1)
    V[1] = GaussianRational(1, -1)
    V[m] = GaussianRational(-1, 1)
    V[m + 1] = GaussianRational(-1, -1)
    return V


def _parse_part(raw: Any) -> Union[Fraction, float]:
    if isinstance(raw, bool):
        raise PotentialFileError(f"invalid coordinate part {raw!r}")
    if isinstance(raw, float):
        return raw
    try:
        return parse_rational(raw)
    except DomainMismatchError as e:
        raise PotentialFileError(str(e)) from e


def load_potential(path: Union[str, Path]) -> Tuple[int, List[Any]]:
    """
    Read a potential file ``{"n": int, "values": [{"re": ..., "im": ...}, ...]}``.

    Exact parts (``"p/q"`` strings or integers) give Gaussian rationals; a
    floating part turns that coordinate into a complex double.

    :raises PotentialFileError: on malformed content.
    """
    try:
        data = json.loads(Path(path).read_text())
        n = data["n"]
        raw_values = data["values"]
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise PotentialFileError(f"cannot read potential file {path}: {e}") from e
    if not isinstance(n, int) or not isinstance(raw_values, list) or len(raw_values) != n:
        raise PotentialFileError(f"potential file {path}: 'values' must list exactly n={n} coordinates")
    values = []
    for entry in raw_values:
        if not isinstance(entry, dict) or "re" not in entry:
            raise PotentialFileError(f"potential file {path}: bad coordinate {entry!r}")
        re, im = _parse_part(entry["re"]), _parse_part(entry.get("im", 0))
        if isinstance(re, float) or isinstance(im, float):
            values.append(complex(float(re), float(im)))
        else:
            values.append(GaussianRational(re, im))
    return n, values


def dump_potential(V: Sequence[Any]) -> Dict[str, Any]:
    """Inverse of :func:`load_potential` as a JSON-ready dictionary."""
    values = []
    for x in V:
        if isinstance(x, GaussianRational) or isinstance(x, (int, Fraction)):
            x = GaussianRational.coerce(x)
            values.append({"re": format_rational(x.re), "im": format_rational(x.im)})
        else:
            x = complex(x)
            values.append({"re": x.real, "im": x.imag})
    return {"n": len(values), "values": values}
