"""
Sparse multivariate polynomials with Laurent-capable variables.

A :class:`MultiPoly` stores its terms in a dictionary keyed by exponent tuples.
Exponent positions follow a :class:`VariableTable`; variables declared as
Laurent may carry negative exponents and never take part in the monomial
order. Coefficients live in one of three domains: exact rationals, exact
Gaussian rationals and complex doubles.
"""
import numbers
from enum import Enum, IntEnum
from fractions import Fraction
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from floq.errors import DomainMismatchError, MissingVariableError, VariableTableError


__all__ = [
    "MAX",
    "ExponentVector",
    "GaussianRational",
    "Domain",
    "Ordering",
    "VariableTable",
    "MultiPoly",
    "grevlex_key",
    "grevlex_compare",
    "format_rational",
    "parse_rational",
]


ExponentVector = Tuple[int, ...]
MAX = "max"


def format_rational(value: Union[int, Fraction]) -> str:
    """Render an exact rational as ``"p"`` or ``"p/q"``."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    """
    Parse ``"p/q"``, an integer or a finite decimal string into an exact fraction.

    :raises DomainMismatchError: if the text is not a rational literal.
    """
    if isinstance(text, (int, Fraction)) and not isinstance(text, bool):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise DomainMismatchError(f"not a rational literal: {text!r}") from e


class GaussianRational:
    """
    Exact complex number ``re + im*i`` with rational parts.

    :ivar re: Real part.
    :type re: Fraction
    :ivar im: Imaginary part.
    :type im: Fraction
    """
    __slots__ = ("re", "im")

    def __init__(self, re: Union[int, Fraction, str] = 0, im: Union[int, Fraction, str] = 0):
        self.re = parse_rational(re)
        self.im = parse_rational(im)

    @classmethod
    def coerce(cls, value: Any) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, numbers.Rational):
            return cls(Fraction(value), 0)
        raise DomainMismatchError(f"{value!r} is not a Gaussian rational")

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __add__(self, other):
        if isinstance(other, complex):
            return complex(self) + other
        try:
            o = GaussianRational.coerce(other)
        except DomainMismatchError:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, complex):
            return complex(self) * other
        try:
            o = GaussianRational.coerce(other)
        except DomainMismatchError:
            return NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def inverse(self) -> "GaussianRational":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        if isinstance(other, complex):
            return complex(self) / other
        try:
            o = GaussianRational.coerce(other)
        except DomainMismatchError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) * self.inverse()

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        base = self if e >= 0 else self.inverse()
        result = GaussianRational(1)
        for _ in range(abs(e)):
            result = result * base
        return result

    def __eq__(self, other):
        if isinstance(other, complex):
            return complex(self) == other
        try:
            o = GaussianRational.coerce(other)
        except DomainMismatchError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({format_rational(self.re)!r}, {format_rational(self.im)!r})"

    def __str__(self):
        sign = "+" if self.im >= 0 else "-"
        return f"{format_rational(self.re)}{sign}{format_rational(abs(self.im))}*i"


class Domain(Enum):
    """Coefficient domains, ordered from narrowest to widest."""
    BIG_RATIONAL = "big_rational"
    GAUSSIAN_RATIONAL = "gaussian_rational"
    COMPLEX_DOUBLE = "complex_double"

    @property
    def rank(self) -> int:
        return list(Domain).index(self)

    @property
    def is_exact(self) -> bool:
        return self is not Domain.COMPLEX_DOUBLE

    @classmethod
    def of(cls, value: Any) -> "Domain":
        """Narrowest domain able to hold ``value``."""
        if isinstance(value, bool):
            raise DomainMismatchError(f"booleans are not coefficients: {value!r}")
        if isinstance(value, numbers.Rational):
            return cls.BIG_RATIONAL
        if isinstance(value, GaussianRational):
            return cls.GAUSSIAN_RATIONAL
        if isinstance(value, numbers.Complex):
            return cls.COMPLEX_DOUBLE
        raise DomainMismatchError(f"unsupported coefficient type {type(value).__name__}")

    @classmethod
    def widest(cls, domains: Iterable["Domain"]) -> "Domain":
        return max(domains, key=lambda d: d.rank, default=cls.BIG_RATIONAL)

    def convert(self, value: Any):
        """
        Represent ``value`` in this domain.

        Integers stay Python ints in the rational domain; fractions with unit
        denominator are normalised to ints so equal polynomials compare equal.

        :raises DomainMismatchError: if the value does not fit the domain.
        """
        if isinstance(value, bool):
            raise DomainMismatchError(f"booleans are not coefficients: {value!r}")
        if self is Domain.BIG_RATIONAL:
            if isinstance(value, GaussianRational):
                if value.im != 0:
                    raise DomainMismatchError(f"{value} has an imaginary part")
                value = value.re
            if isinstance(value, numbers.Integral):
                return int(value)
            if isinstance(value, numbers.Rational):
                value = Fraction(value)
                return value.numerator if value.denominator == 1 else value
            raise DomainMismatchError(f"{value!r} is not an exact rational")
        if self is Domain.GAUSSIAN_RATIONAL:
            if isinstance(value, GaussianRational):
                return value
            if isinstance(value, numbers.Rational):
                return GaussianRational(Fraction(value), 0)
            raise DomainMismatchError(f"{value!r} is not an exact Gaussian rational")
        if isinstance(value, GaussianRational):
            return complex(value)
        if isinstance(value, numbers.Rational):
            return complex(float(Fraction(value)))
        if isinstance(value, numbers.Complex):
            return complex(value)
        raise DomainMismatchError(f"{value!r} is not a complex number")

    def format(self, value) -> str:
        if self is Domain.BIG_RATIONAL:
            return format_rational(value)
        if self is Domain.GAUSSIAN_RATIONAL:
            return str(value)
        return f"({value.real!r}{value.imag:+}j)"


class Ordering(IntEnum):
    LT = -1
    EQ = 0
    GT = 1


class VariableTable:
    """
    Ordered, immutable list of variable names.

    Position defines the tie-break order of grevlex (earlier is greater).
    Names listed in ``laurent`` may carry negative exponents and are skipped
    by the monomial order.
    """
    __slots__ = ("names", "laurent", "ordinary", "_index")

    def __init__(self, names: Iterable[str], laurent: Iterable[str] = ()):
        names = tuple(names)
        laurent = frozenset(laurent)
        if len(set(names)) != len(names):
            raise VariableTableError(f"duplicate variable names in {names}")
        unknown = laurent.difference(names)
        if unknown:
            raise VariableTableError(f"Laurent variables {sorted(unknown)} are not declared")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "laurent", laurent)
        object.__setattr__(self, "ordinary", tuple(i for i, name in enumerate(names) if name not in laurent))
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(names)})

    def __setattr__(self, key, value):
        raise AttributeError("VariableTable is immutable")

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise VariableTableError(f"unknown variable {name!r}; table is {self.names}") from None

    def is_laurent(self, position: int) -> bool:
        return self.names[position] in self.laurent

    def extend(self, names: Iterable[str], laurent: Iterable[str] = ()) -> "VariableTable":
        return VariableTable(self.names + tuple(names), self.laurent | frozenset(laurent))

    def without(self, names: Iterable[str]) -> "VariableTable":
        drop = set(names)
        return VariableTable([n for n in self.names if n not in drop], self.laurent - drop)

    def __contains__(self, name) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VariableTable):
            return NotImplemented
        return self.names == other.names and self.laurent == other.laurent

    def __hash__(self):
        return hash((self.names, self.laurent))

    def __repr__(self):
        extra = f", laurent={sorted(self.laurent)}" if self.laurent else ""
        return f"VariableTable({list(self.names)}{extra})"


def grevlex_key(a: Sequence[int], table: Optional[VariableTable] = None) -> tuple:
    """
    Sort key realising grevlex: a larger key is a greater monomial.

    Total degree decides first; ties go to the monomial whose rightmost nonzero
    entry of the difference is negative. Laurent positions of ``table`` are
    ignored.
    """
    if table is not None and table.laurent:
        a = [a[i] for i in table.ordinary]
    return sum(a), tuple(-x for x in reversed(a))


def grevlex_compare(a: Sequence[int], b: Sequence[int], table: Optional[VariableTable] = None) -> Ordering:
    """
    Compare two exponent vectors in graded reverse lexicographic order.

    :raises VariableTableError: if the vectors have different lengths.
    """
    if len(a) != len(b) or (table is not None and len(a) != len(table)):
        raise VariableTableError(f"exponent vectors {tuple(a)} and {tuple(b)} are over different tables")
    ka, kb = grevlex_key(a, table), grevlex_key(b, table)
    if ka > kb:
        return Ordering.GT
    if ka < kb:
        return Ordering.LT
    return Ordering.EQ


Scalar = Union[int, Fraction, GaussianRational, complex]


class MultiPoly:
    """
    Sparse polynomial over a :class:`VariableTable` and a :class:`Domain`.

    Instances are immutable; every operation returns a new polynomial whose
    term map never stores a zero coefficient.

    :ivar table: Variables the exponent vectors refer to.
    :type table: VariableTable
    :ivar domain: Coefficient domain.
    :type domain: Domain
    :ivar terms: Map from exponent vector to nonzero coefficient.
    :type terms: dict[tuple[int, ...], Any]
    """
    __slots__ = ("table", "domain", "terms")

    def __init__(self, table: VariableTable, terms: Optional[Mapping[Sequence[int], Any]] = None,
                 domain: Domain = Domain.BIG_RATIONAL):
        clean: Dict[ExponentVector, Any] = {}
        size = len(table)
        for exps, coeff in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != size:
                raise VariableTableError(f"exponent vector {exps} does not match {table}")
            for i in table.ordinary:
                if exps[i] < 0:
                    raise VariableTableError(f"negative exponent on ordinary variable {table.names[i]!r}")
            coeff = domain.convert(coeff)
            if coeff != 0:
                clean[exps] = clean.get(exps, 0) + coeff
                if clean[exps] == 0:
                    del clean[exps]
        self.table = table
        self.domain = domain
        self.terms = clean

    @classmethod
    def _raw(cls, table: VariableTable, terms: Dict[ExponentVector, Any], domain: Domain) -> "MultiPoly":
        poly = cls.__new__(cls)
        poly.table = table
        poly.domain = domain
        poly.terms = terms
        return poly

    # construction helpers

    @classmethod
    def zero(cls, table: VariableTable, domain: Domain = Domain.BIG_RATIONAL) -> "MultiPoly":
        return cls._raw(table, {}, domain)

    @classmethod
    def constant(cls, table: VariableTable, value: Scalar, domain: Domain = Domain.BIG_RATIONAL) -> "MultiPoly":
        return cls(table, {(0,) * len(table): value}, domain)

    @classmethod
    def variable(cls, table: VariableTable, name: str, domain: Domain = Domain.BIG_RATIONAL,
                 power: int = 1) -> "MultiPoly":
        exps = [0] * len(table)
        exps[table.index(name)] = power
        return cls(table, {tuple(exps): 1}, domain)

    @classmethod
    def monomial(cls, table: VariableTable, exps: Sequence[int], coeff: Scalar = 1,
                 domain: Domain = Domain.BIG_RATIONAL) -> "MultiPoly":
        return cls(table, {tuple(exps): coeff}, domain)

    # basic queries

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_term(self):
        return self.terms.get((0,) * len(self.table), self.domain.convert(0))

    def term_degree(self, exps: Sequence[int], positions: Optional[Sequence[int]] = None) -> int:
        positions = self.table.ordinary if positions is None else positions
        return sum(exps[i] for i in positions)

    def _positions(self, variables: Optional[Iterable[str]]) -> Tuple[int, ...]:
        if variables is None:
            return self.table.ordinary
        return tuple(self.table.index(name) for name in variables)

    def degree(self, variables: Optional[Iterable[str]] = None) -> int:
        """Total degree over ordinary variables (or ``variables``); ``-1`` for zero."""
        positions = self._positions(variables)
        return max((self.term_degree(e, positions) for e in self.terms), default=-1)

    def variables_used(self) -> List[str]:
        used = set()
        for exps in self.terms:
            used.update(i for i, e in enumerate(exps) if e)
        return [self.table.names[i] for i in sorted(used)]

    def sorted_terms(self) -> List[Tuple[ExponentVector, Any]]:
        """Terms in descending grevlex order."""
        return sorted(self.terms.items(), key=lambda t: grevlex_key(t[0], self.table), reverse=True)

    def leading_term(self) -> Tuple[ExponentVector, Any]:
        if not self.terms:
            raise ValueError("the zero polynomial has no leading term")
        exps = max(self.terms, key=lambda e: grevlex_key(e, self.table))
        return exps, self.terms[exps]

    # arithmetic

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.table != self.table:
                raise VariableTableError(f"variable tables differ: {self.table} vs {other.table}")
            if other.domain is not self.domain:
                raise DomainMismatchError(f"domains differ: {self.domain.value} vs {other.domain.value}")
            return other
        return MultiPoly.constant(self.table, self.domain.convert(other), self.domain)

    def __add__(self, other) -> "MultiPoly":
        other = self._coerce(other)
        terms = dict(self.terms)
        for exps, c in other.terms.items():
            s = terms.get(exps, 0) + c
            if s == 0:
                terms.pop(exps, None)
            else:
                terms[exps] = s
        return MultiPoly._raw(self.table, terms, self.domain)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly._raw(self.table, {e: -c for e, c in self.terms.items()}, self.domain)

    def __sub__(self, other) -> "MultiPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "MultiPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        other = self._coerce(other)
        terms: Dict[ExponentVector, Any] = {}
        get = terms.get
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                terms[e] = get(e, 0) + ca * cb
        return MultiPoly._raw(self.table, {e: c for e, c in terms.items() if c != 0}, self.domain)

    def __rmul__(self, other) -> "MultiPoly":
        return self.scale(other)

    def __pow__(self, e: int) -> "MultiPoly":
        if not isinstance(e, int) or e < 0:
            raise ValueError(f"polynomial powers need a non-negative integer exponent, got {e!r}")
        result = MultiPoly.constant(self.table, 1, self.domain)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def scale(self, c: Scalar) -> "MultiPoly":
        c = self.domain.convert(c)
        if c == 0:
            return MultiPoly.zero(self.table, self.domain)
        return MultiPoly._raw(self.table, {e: v * c for e, v in self.terms.items()}, self.domain)

    def shift(self, exps: Sequence[int], c: Scalar = 1) -> "MultiPoly":
        """Multiply by the monomial ``c * x^exps``."""
        c = self.domain.convert(c)
        if c == 0:
            return MultiPoly.zero(self.table, self.domain)
        return MultiPoly._raw(
            self.table, {tuple(x + y for x, y in zip(e, exps)): v * c for e, v in self.terms.items()}, self.domain)

    def __eq__(self, other) -> bool:
        if isinstance(other, MultiPoly):
            return self.table == other.table and self.domain is other.domain and self.terms == other.terms
        try:
            return self.terms == MultiPoly.constant(self.table, other, self.domain).terms
        except (DomainMismatchError, TypeError):
            return NotImplemented

    __hash__ = None

    # structural operations

    def coeff_extract(self, name: str, k: int) -> "MultiPoly":
        """``[name^k] f`` as a polynomial over the same table (``name`` no longer occurs)."""
        i = self.table.index(name)
        terms = {}
        for exps, c in self.terms.items():
            if exps[i] == k:
                terms[exps[:i] + (0,) + exps[i + 1:]] = c
        return MultiPoly._raw(self.table, terms, self.domain)

    def powers_of(self, name: str) -> List[int]:
        i = self.table.index(name)
        return sorted({exps[i] for exps in self.terms})

    def homogeneous_part(self, d: Union[int, str], variables: Optional[Iterable[str]] = None) -> "MultiPoly":
        """``T_d(f)``, the terms of total degree ``d``; ``MAX`` selects the top degree."""
        positions = self._positions(variables)
        if d == MAX:
            d = self.degree(variables)
        return MultiPoly._raw(
            self.table, {e: c for e, c in self.terms.items() if self.term_degree(e, positions) == d}, self.domain)

    def split_by(self, names: Iterable[str]) -> Tuple["MultiPoly", "MultiPoly"]:
        """Split into the part free of ``names`` and the part that depends on them."""
        positions = [self.table.index(n) for n in names]
        free, dependent = {}, {}
        for exps, c in self.terms.items():
            (dependent if any(exps[i] for i in positions) else free)[exps] = c
        return MultiPoly._raw(self.table, free, self.domain), MultiPoly._raw(self.table, dependent, self.domain)

    def derivative(self, name: str) -> "MultiPoly":
        i = self.table.index(name)
        terms = {}
        for exps, c in self.terms.items():
            if exps[i]:
                terms[exps[:i] + (exps[i] - 1,) + exps[i + 1:]] = c * exps[i]
        return MultiPoly._raw(self.table, terms, self.domain)

    def to_domain(self, domain: Domain) -> "MultiPoly":
        if domain is self.domain:
            return self
        return MultiPoly(self.table, {e: domain.convert(c) for e, c in self.terms.items()}, domain)

    def conjugate(self) -> "MultiPoly":
        if self.domain is Domain.BIG_RATIONAL:
            return self
        return MultiPoly._raw(self.table, {e: c.conjugate() for e, c in self.terms.items()}, self.domain)

    def project(self, table: VariableTable) -> "MultiPoly":
        """
        Re-index over another table that shares variable names.

        :raises VariableTableError: if a variable in use is missing from ``table``.
        """
        if table == self.table:
            return self
        targets = []
        for i, name in enumerate(self.table.names):
            targets.append(table.index(name) if name in table else None)
        terms = {}
        for exps, c in self.terms.items():
            new = [0] * len(table)
            for i, e in enumerate(exps):
                if e:
                    if targets[i] is None:
                        raise VariableTableError(f"variable {self.table.names[i]!r} is not in {table}")
                    new[targets[i]] = e
            terms[tuple(new)] = c
        return MultiPoly(table, terms, self.domain)

    def permute(self, mapping: Mapping[str, str]) -> "MultiPoly":
        """Rename variables by a bijection of names within the same table."""
        perm = list(range(len(self.table)))
        for src, dst in mapping.items():
            perm[self.table.index(src)] = self.table.index(dst)
        terms = {}
        for exps, c in self.terms.items():
            new = [0] * len(exps)
            for i, e in enumerate(exps):
                new[perm[i]] = e
            terms[tuple(new)] = c
        return MultiPoly._raw(self.table, terms, self.domain)

    def substitute(self, images: Mapping[str, Any], table: Optional[VariableTable] = None,
                   domain: Optional[Domain] = None) -> "MultiPoly":
        """
        Replace variables by polynomials or scalars.

        Variables without an image are carried to the same-named variable of
        the target ``table``. Negative powers are allowed for scalar images and
        for images that are a single monomial in Laurent variables.
        """
        table = table or self.table
        domain = domain or Domain.widest(
            [self.domain] + [v.domain if isinstance(v, MultiPoly) else Domain.of(v) for v in images.values()])
        one = MultiPoly.constant(table, 1, domain)
        per_var: List[MultiPoly] = []
        for name in self.table.names:
            image = images.get(name, None)
            if image is None:
                image = MultiPoly.variable(table, name, domain) if name in table else None
            elif isinstance(image, MultiPoly):
                image = image.project(table).to_domain(domain)
            else:
                image = MultiPoly.constant(table, image, domain)
            per_var.append(image)

        cache: Dict[Tuple[int, int], MultiPoly] = {}

        def power(i: int, e: int) -> MultiPoly:
            if (i, e) in cache:
                return cache[(i, e)]
            image = per_var[i]
            if image is None:
                raise VariableTableError(f"variable {self.table.names[i]!r} has no image in {table}")
            if e >= 0:
                result = image ** e
            else:
                result = _invert_monomial(image) ** (-e)
            cache[(i, e)] = result
            return result

        result: Dict[ExponentVector, Any] = {}
        for exps, c in self.terms.items():
            term = one.scale(domain.convert(c))
            for i, e in enumerate(exps):
                if e:
                    term = term * power(i, e)
            for te, tc in term.terms.items():
                s = result.get(te, 0) + tc
                if s == 0:
                    result.pop(te, None)
                else:
                    result[te] = s
        return MultiPoly._raw(table, result, domain)

    def evaluate(self, assignment: Mapping[str, Any], domain: Optional[Domain] = None):
        """
        Evaluate at a point given as ``name -> value``.

        The arithmetic runs in the widest domain among the coefficients and
        the values, so exact inputs give exact results.

        :raises MissingVariableError: if a variable in use has no value.
        """
        used = self.variables_used()
        missing = [n for n in used if n not in assignment]
        if missing:
            raise MissingVariableError(f"no value for {missing}")
        values = {n: assignment[n] for n in used}
        domain = domain or Domain.widest([self.domain] + [Domain.of(v) for v in values.values()])
        if domain is Domain.BIG_RATIONAL:
            converted = {n: Fraction(domain.convert(v)) for n, v in values.items()}
        else:
            converted = {n: domain.convert(v) for n, v in values.items()}
        point = [converted.get(name) for name in self.table.names]
        total = domain.convert(0)
        for exps, c in self.terms.items():
            term = domain.convert(c)
            for i, e in enumerate(exps):
                if e:
                    term = term * point[i] ** e
            total = total + term
        return domain.convert(total)

    def to_arrays(self, variables: Sequence[str]) -> Tuple[np.ndarray, np.ndarray]:
        """
        Exponent matrix (terms x variables) and complex coefficient vector.

        :raises VariableTableError: if a variable in use is not in ``variables``.
        """
        positions = [self.table.index(n) for n in variables]
        extra = set(self.variables_used()).difference(variables)
        if extra:
            raise VariableTableError(f"variables {sorted(extra)} are not in {list(variables)}")
        exps = np.array([[e[i] for i in positions] for e in self.terms], dtype=np.int64).reshape(-1, len(positions))
        coeffs = np.array([complex(Domain.COMPLEX_DOUBLE.convert(c)) for c in self.terms.values()], dtype=complex)
        return exps, coeffs

    # text form

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps, c in self.sorted_terms():
            factors = []
            for name, e in zip(self.table.names, exps):
                if e == 1:
                    factors.append(name)
                elif e:
                    factors.append(f"{name}^{e}")
            parts.append("*".join([self.domain.format(c)] + factors))
        return " + ".join(parts)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"MultiPoly({self.to_text()!r}, vars={list(self.table.names)}, domain={self.domain.value})"


def _invert_monomial(image: MultiPoly) -> MultiPoly:
    if len(image.terms) != 1:
        raise VariableTableError(f"cannot invert non-monomial image {image}")
    (exps, c), = image.terms.items()
    for i, e in enumerate(exps):
        if e and not image.table.is_laurent(i):
            raise VariableTableError(f"cannot invert {image}: {image.table.names[i]!r} is not a Laurent variable")
    inverse = 1 / (Fraction(c) if isinstance(c, int) else c)
    return MultiPoly(image.table, {tuple(-e for e in exps): inverse}, image.domain)
