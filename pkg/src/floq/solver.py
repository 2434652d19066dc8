"""
Quotient-ring eigenvalue solver for the zero-dimensional invariant systems.

Pipeline:

1. normal forms of the border monomials ``v_i * b`` are computed modulo a
   few word-sized primes and lifted to exact integers (mixed radix), giving
   the multiplication matrices ``M_i`` of the quotient ring;
2. the origin's multiplicity is the generalized kernel dimension of an
   integer combination of the ``M_i`` modulo a prime;
3. a complex Schur form of the same combination yields per-eigenvalue
   coordinate estimates, which are Newton-refined and clustered.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from sympy import prevprime
from sympy.ntheory import sqrt_mod

from floq.errors import CeilingExceededError, SolverError
from floq.floquet import InvariantSystem, Variant
from floq.grobner import GroebnerSystem
from floq.polycore import Domain, ExponentVector, GaussianRational, MultiPoly
from floq.symmetry import ConjectureForm, GroupKind, conjecture_form_check, group_elements, orbit_labels


__all__ = [
    "DEFAULT_CEILING",
    "QuotientRep",
    "SolutionPoint",
    "SolutionSet",
    "SolutionSummary",
    "CompiledSystem",
    "multiplication_matrices",
    "origin_multiplicity",
    "newton_refine",
    "solve_variety",
    "summarize",
    "figure_rows",
    "solution_to_dict",
]


log = logging.getLogger(__name__)

DEFAULT_CEILING = 6000
PRIME_START = 2 ** 24
MAX_PRIMES = 16
COMMUTATOR_TOL = 1e-8
SINGULAR_CONDITIONING = 1e-6


@dataclass(frozen=True)
class QuotientRep:
    """
    Multiplication operators of the quotient ring on its standard monomial basis.

    Column ``j`` of ``matrices[i]`` holds the coordinates of the normal form
    of ``variables[i] * basis[j]``.

    :ivar basis: Standard monomials.
    :type basis: tuple
    :ivar variables: Unknowns, in the order of ``matrices``.
    :type variables: tuple[str, ...]
    :ivar matrices: Complex matrices ``M_i``.
    :type matrices: tuple[numpy.ndarray, ...]
    :ivar provenance: How the normal-form table was obtained.
    :type provenance: dict
    :ivar modular: ``(prime, integer matrices mod prime)`` when the table is exact.
    :type modular: Optional[tuple[int, tuple[numpy.ndarray, ...]]]
    :ivar max_commutator: Largest relative commutator norm among the ``M_i``.
    :type max_commutator: float
    """
    basis: Tuple[ExponentVector, ...]
    variables: Tuple[str, ...]
    matrices: Tuple[np.ndarray, ...]
    provenance: Dict[str, Any]
    modular: Optional[Tuple[int, Tuple[np.ndarray, ...]]]
    max_commutator: float

    @property
    def size(self) -> int:
        return len(self.basis)


# ----------------------------------------------------------------------------------------------------------------------
# NORMAL-FORM TABLE
# ----------------------------------------------------------------------------------------------------------------------


class _Reducer:
    """Border monomials of ``G`` and the one-step reduction rule for any monomial."""

    def __init__(self, G: GroebnerSystem):
        self.G = G
        self.basis = G.basis
        self.index = {b: j for j, b in enumerate(G.basis)}
        self.positions = [G.table.index(v) for v in G.source.unknowns]
        self.leading = G.leading_exponents
        self.tails = [G.tail(k) for k in range(len(G.generators))]

    def products(self) -> List[List[ExponentVector]]:
        """``products[i][j]`` is the exponent vector of ``x_i * b_j``."""
        out = []
        for position in self.positions:
            row = []
            for b in self.basis:
                e = list(b)
                e[position] += 1
                row.append(tuple(e))
            out.append(row)
        return out

    def step(self, mono: ExponentVector) -> Tuple[int, ExponentVector]:
        k = self.G.divisor_index(mono)
        return k, tuple(x - y for x, y in zip(mono, self.leading[k]))


def _integral(G: GroebnerSystem) -> bool:
    if G.domain is not Domain.BIG_RATIONAL:
        return False
    return all(isinstance(c, int) for g in G.generators for c in g.terms.values())


def _table(reducer: _Reducer, targets: Iterable[ExponentVector], coeff, dtype, modulus: Optional[int]):
    size = len(reducer.basis)
    index = reducer.index
    tails = [[(te, coeff(tc)) for te, tc in tail] for tail in reducer.tails]
    memo: Dict[ExponentVector, np.ndarray] = {}
    deps: Dict[ExponentVector, List[Tuple[ExponentVector, Any]]] = {}

    def rule(mono):
        if mono not in deps:
            k, quotient = reducer.step(mono)
            deps[mono] = [(tuple(x + y for x, y in zip(quotient, te)), c) for te, c in tails[k]]
        return deps[mono]

    for target in targets:
        if target in memo or target in index:
            continue
        stack = [target]
        while stack:
            mono = stack[-1]
            if mono in memo:
                stack.pop()
                continue
            terms = rule(mono)
            missing = [d for d, _ in terms if d not in memo and d not in index]
            if missing:
                stack.extend(missing)
                continue
            vec = np.zeros(size, dtype=dtype)
            rows, weights = [], []
            for d, c in terms:
                j = index.get(d)
                if j is None:
                    rows.append(memo[d])
                    weights.append(c)
                else:
                    vec[j] -= c
            if rows:
                vec -= np.asarray(weights, dtype=dtype) @ np.stack(rows)
            if modulus is not None:
                vec %= modulus
            memo[mono] = vec
            del deps[mono]
            stack.pop()
    return memo


def _assemble(reducer: _Reducer, memo: Dict[ExponentVector, np.ndarray], dtype) -> Tuple[np.ndarray, ...]:
    size = len(reducer.basis)
    matrices = []
    for row in reducer.products():
        M = np.zeros((size, size), dtype=dtype)
        for j, mono in enumerate(row):
            i = reducer.index.get(mono)
            if i is None:
                M[:, j] = memo[mono]
            else:
                M[i, j] = 1
        matrices.append(M)
    return tuple(matrices)


def _residue(c, prime: int, root: Optional[int]) -> int:
    if isinstance(c, GaussianRational):
        re, im = _residue(c.re, prime, None), _residue(c.im, prime, None)
        return (re + root * im) % prime
    c = Fraction(c)
    return c.numerator % prime * pow(c.denominator % prime, -1, prime) % prime


def _modular_matrices(reducer: _Reducer, targets: List[ExponentVector], prime: int,
                      root: Optional[int] = None) -> Tuple[np.ndarray, ...]:
    memo = _table(reducer, targets, lambda c: _residue(c, prime, root), np.int64, prime)
    return _assemble(reducer, memo, np.int64)


def _primes(count: int, below: int = PRIME_START) -> List[int]:
    out = []
    p = below
    for _ in range(count):
        p = prevprime(p)
        out.append(p)
    return out


def _gaussian_prime(below: int = PRIME_START) -> Tuple[int, int]:
    """Largest prime ``p = 1 mod 4`` below ``below`` and a square root of ``-1`` modulo ``p``."""
    p = prevprime(below)
    while p % 4 != 1:
        p = prevprime(p)
    return p, int(sqrt_mod(-1, p))


def _lift(residues: List[Tuple[np.ndarray, ...]], primes: List[int]) -> Tuple[List[Tuple[np.ndarray, ...]], bool]:
    """Symmetric mixed-radix digits of the integers with the given residues; flag when the top digit vanishes."""
    digits: List[Tuple[np.ndarray, ...]] = []
    for idx, (res, p) in enumerate(zip(residues, primes)):
        radix = [math.prod(primes[:l]) % p for l in range(idx)]
        inv = pow(math.prod(primes[:idx]) % p, -1, p)
        current = []
        for m, r in enumerate(res):
            acc = np.zeros_like(r)
            for l in range(idx):
                acc = (acc + (digits[l][m] % p) * radix[l]) % p
            a = (r - acc) % p * inv % p
            current.append(np.where(a > p // 2, a - p, a))
        digits.append(tuple(current))
    done = len(digits) > 1 and all(not d.any() for d in digits[-1])
    return digits, done


def _to_complex(digits: List[Tuple[np.ndarray, ...]], primes: List[int]) -> Tuple[np.ndarray, ...]:
    out = []
    for m in range(len(digits[0])):
        total = np.zeros(digits[0][m].shape, dtype=float)
        for l in reversed(range(len(digits))):
            total += digits[l][m].astype(float) * float(math.prod(primes[:l]))
        out.append(total.astype(complex))
    return tuple(out)


def _commutator(matrices: Sequence[np.ndarray]) -> float:
    worst = 0.0
    for i in range(len(matrices)):
        for j in range(i + 1, len(matrices)):
            a, b = matrices[i], matrices[j]
            scale = np.linalg.norm(a) * np.linalg.norm(b)
            if scale:
                worst = max(worst, float(np.linalg.norm(a @ b - b @ a) / scale))
    if worst > COMMUTATOR_TOL:
        log.warning(f"Multiplication matrices commute only to {worst:.3g} (relative), above {COMMUTATOR_TOL:g}")
    return worst


def multiplication_matrices(G: GroebnerSystem, ceiling: int = DEFAULT_CEILING,
                            threads: Optional[int] = None) -> QuotientRep:
    """
    Multiplication matrices of the quotient by ``G``.

    Integer systems are reduced modulo successive primes until the lifted
    integers stabilise; other systems are reduced directly in complex
    floating point.

    :raises CeilingExceededError: if the basis has more than ``ceiling`` elements.
    """
    size = len(G.basis)
    if size > ceiling:
        raise CeilingExceededError(
            f"quotient basis has {size} elements, above the ceiling of {ceiling}; "
            f"use the specialized variant or raise the ceiling")
    reducer = _Reducer(G)
    targets = [mono for row in reducer.products() for mono in row if mono not in reducer.index]
    log.debug(f"Normal-form table: basis {size}, {len(targets)} border monomials")

    if not _integral(G):
        memo = _table(reducer, targets, lambda c: complex(Domain.COMPLEX_DOUBLE.convert(c)), complex, None)
        matrices = _assemble(reducer, memo, complex)
        modular = None
        if G.domain.is_exact:
            # one residue table, taken with i mapped to a root of -1 mod p
            p, root = _gaussian_prime()
            modular = (p, _modular_matrices(reducer, targets, p, root))
        return QuotientRep(G.basis, G.source.unknowns, matrices, {"method": "floating"}, modular,
                           _commutator(matrices))

    workers = max(1, min(threads or 1, 4))
    primes: List[int] = []
    residues: List[Tuple[np.ndarray, ...]] = []
    done = False
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while not done and len(primes) < MAX_PRIMES:
            batch = _primes(max(2 - len(primes), workers), primes[-1] if primes else PRIME_START)
            residues.extend(pool.map(lambda p: _modular_matrices(reducer, targets, p), batch))
            primes.extend(batch)
            digits, done = _lift(residues, primes)
    if not done:
        log.warning(f"Normal-form integers did not stabilise within {len(primes)} primes")
    used = len(digits) - 1 if done else len(digits)
    matrices = _to_complex(digits[:used], primes[:used])
    log.debug(f"Normal-form table lifted from {used} primes")
    return QuotientRep(G.basis, G.source.unknowns, matrices, {"method": "multimodular", "primes": primes[:used]},
                       (primes[0], residues[0]), _commutator(matrices))


# ----------------------------------------------------------------------------------------------------------------------
# EXACT ORIGIN MULTIPLICITY
# ----------------------------------------------------------------------------------------------------------------------


def _rank_mod(A: np.ndarray, p: int) -> int:
    A = A.copy() % p
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        pivot = r + nz[0]
        if pivot != r:
            A[[r, pivot]] = A[[pivot, r]]
        A[r] = A[r] * pow(int(A[r, c]), -1, p) % p
        below = np.nonzero(A[r + 1:, c])[0] + r + 1
        if below.size:
            A[below] = (A[below] - np.outer(A[below, c], A[r]) % p) % p
        r += 1
    return r


def origin_multiplicity(modular: Tuple[int, Tuple[np.ndarray, ...]], weights: Sequence[int]) -> int:
    """Dimension of the generalized kernel of ``sum w_i M_i`` modulo the table's prime."""
    p, mats = modular
    A = np.zeros_like(mats[0])
    for w, M in zip(weights, mats):
        A = (A + (int(w) % p) * M) % p
    size = A.shape[0]
    power = A
    for _ in range(max(1, math.ceil(math.log2(max(size, 2))))):
        power = (power @ power) % p
    return size - _rank_mod(power, p)


# ----------------------------------------------------------------------------------------------------------------------
# NEWTON REFINEMENT
# ----------------------------------------------------------------------------------------------------------------------


class CompiledSystem:
    """
    Square polynomial system evaluated on batches of points with numpy.

    All monomials of the generators and their partial derivatives are
    gathered once, so each evaluation is one product table and two matrix
    products.
    """

    def __init__(self, polys: Sequence[MultiPoly], variables: Sequence[str]):
        self.variables = tuple(variables)
        nv = len(variables)
        derivs = [[p.derivative(v) for v in variables] for p in polys]
        monos: Dict[Tuple[int, ...], int] = {}
        flat = list(polys) + [d for row in derivs for d in row]
        arrays = [p.to_arrays(variables) for p in flat]
        for exps, _ in arrays:
            for e in map(tuple, exps):
                monos.setdefault(e, len(monos))
        self.exponents = np.array(list(monos), dtype=np.int64).reshape(-1, nv)
        coeffs = np.zeros((len(monos), len(flat)), dtype=complex)
        for col, (exps, cs) in enumerate(arrays):
            for e, c in zip(map(tuple, exps), cs):
                coeffs[monos[e], col] += c
        self.f_coeffs = coeffs[:, :len(polys)]
        self.j_coeffs = coeffs[:, len(polys):]
        self.size = len(polys)
        self.max_power = int(self.exponents.max(initial=0))

    def _monomials(self, X: np.ndarray) -> np.ndarray:
        powers = X[:, :, None] ** np.arange(self.max_power + 1)[None, None, :]
        cols = np.arange(len(self.variables))[None, :]
        return np.prod(powers[:, cols, self.exponents], axis=2)

    def values(self, X: np.ndarray) -> np.ndarray:
        return self._monomials(np.atleast_2d(X)) @ self.f_coeffs

    def scaled_residuals(self, X: np.ndarray) -> np.ndarray:
        """Largest |p_k(x)| per point, each divided by 1 + sum of its terms' absolute values at x."""
        mono = self._monomials(np.atleast_2d(X))
        if mono.shape[0] == 0:
            return np.zeros(0)
        scale = 1 + np.abs(mono) @ np.abs(self.f_coeffs)
        return (np.abs(mono @ self.f_coeffs) / scale).max(axis=1)

    def evaluate(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        mono = self._monomials(np.atleast_2d(X))
        F = mono @ self.f_coeffs
        J = (mono @ self.j_coeffs).reshape(-1, self.size, len(self.variables))
        return F, J


def newton_refine(system: CompiledSystem, X: np.ndarray, max_iter: int = 100,
                  step_tol: float = 1e-14) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Batched Gauss-Newton with pseudo-inverse steps.

    :return: refined points, per-point convergence flags, per-point relative
        smallest singular value of the Jacobian at the refined point.
    """
    X = np.array(X, dtype=complex, copy=True)
    if len(X) == 0:
        return X, np.zeros(0, dtype=bool), np.zeros(0)
    active = np.ones(len(X), dtype=bool)
    converged = np.zeros(len(X), dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        F, J = system.evaluate(X[idx])
        step = (np.linalg.pinv(J, rcond=1e-13) @ F[:, :, None])[:, :, 0]
        X[idx] -= step
        size = np.abs(step).max(axis=1)
        finished = size <= step_tol * (1 + np.abs(X[idx]).max(axis=1))
        converged[idx[finished]] = True
        active[idx[finished]] = False
    _, J = system.evaluate(X)
    sv = np.linalg.svd(J, compute_uv=False)
    conditioning = sv[:, -1] / np.maximum(sv[:, 0], np.finfo(float).tiny)
    return X, converged, conditioning


# ----------------------------------------------------------------------------------------------------------------------
# SOLUTION SETS
# ----------------------------------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class SolutionPoint:
    """
    One distinct point of the variety.

    :ivar coords: Coordinates in the system's unknowns.
    :type coords: tuple[complex, ...]
    :ivar multiplicity: Size of the eigenvalue cluster.
    :type multiplicity: int
    :ivar residual: ``max_k |f_k(coords)|`` over the system's generators.
    :type residual: float
    :ivar is_zero: Whether this is the origin.
    :type is_zero: bool
    :ivar singular: Whether the Jacobian is rank deficient here.
    :type singular: bool
    :ivar refined: Whether Newton refinement converged for the cluster.
    :type refined: bool
    :ivar orbit_id: Symmetry orbit label (``-1`` when no group applies).
    :type orbit_id: int
    """
    coords: Tuple[complex, ...]
    multiplicity: int
    residual: float
    is_zero: bool
    singular: bool
    refined: bool
    orbit_id: int = -1


@dataclass(frozen=True)
class SolutionSet:
    """
    Distinct points of ``V(I)`` with multiplicities summing to the basis size.

    :ivar system: The invariant system that was solved.
    :type system: InvariantSystem
    :ivar points: Distinct points, origin first.
    :type points: tuple[SolutionPoint, ...]
    :ivar seed: Seed of the random combination.
    :type seed: int
    :ivar basis_size: Quotient dimension.
    :type basis_size: int
    :ivar origin_exact: Whether the origin multiplicity came from exact arithmetic.
    :type origin_exact: bool
    :ivar stable: Whether a rerun with another seed agreed (``None`` if not checked).
    :type stable: Optional[bool]
    """
    system: InvariantSystem
    points: Tuple[SolutionPoint, ...]
    seed: int
    basis_size: int
    cluster_tol: float
    residual_tol: float
    merge_tol: float
    origin_exact: bool
    group: GroupKind
    stable: Optional[bool] = None

    @property
    def n(self) -> int:
        return self.system.n

    @property
    def variant(self) -> Variant:
        return self.system.variant

    def profile(self) -> Dict[int, int]:
        counts: Dict[int, int] = {}
        for p in self.points:
            counts[p.multiplicity] = counts.get(p.multiplicity, 0) + 1
        return dict(sorted(counts.items()))

    def nonzero(self) -> List[SolutionPoint]:
        return [p for p in self.points if not p.is_zero]


def _default_group(system: InvariantSystem) -> GroupKind:
    if system.sample is not None:
        return GroupKind.NONE
    if system.variant is Variant.SPECIALIZED:
        return GroupKind.SPECIALIZED
    return GroupKind.FULL


def _components(count: int, pairs: np.ndarray) -> np.ndarray:
    if count == 0:
        return np.zeros(0, dtype=int)
    pairs = pairs.reshape(-1, 2)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(count, count))
    _, labels = connected_components(graph, directed=False)
    return labels


def _close_pairs(X: np.ndarray, radius: float) -> np.ndarray:
    if len(X) < 2:
        return np.zeros((0, 2), dtype=int)
    tree = cKDTree(np.hstack([X.real, X.imag]))
    return tree.query_pairs(radius, p=np.inf, output_type="ndarray")


def _sort_key(point: SolutionPoint) -> tuple:
    rounded = tuple((round(c.real, 8), round(c.imag, 8)) for c in point.coords)
    return (not point.is_zero, rounded)


def solve_variety(G: GroebnerSystem, seed: int = 0, cluster_tol: float = 1e-6, residual_tol: float = 1e-8,
                  merge_tol: float = 1e-2, quotient: Optional[QuotientRep] = None, check_stability: bool = False,
                  group: Optional[GroupKind] = None, threads: Optional[int] = None,
                  ceiling: int = DEFAULT_CEILING) -> SolutionSet:
    """
    All points of the variety of ``G`` with their multiplicities.

    An estimate is regular when Newton refinement converges to a point with a
    well-conditioned Jacobian and a scaled residual within ``residual_tol``;
    regular points are identified within ``cluster_tol``. Eigenvalues of a
    singular point scatter more widely and are grouped within ``merge_tol``,
    their coordinates being the cluster mean of the Schur estimates. A lone
    estimate that is not regular joins the nearest multiple point, so every
    reported simple point meets the residual bound.

    :raises SolverError: if the Schur decomposition fails.
    """
    Q = quotient or multiplication_matrices(G, ceiling, threads)
    system = G.source
    variables = Q.variables
    nv = len(variables)
    size = Q.size
    rng = np.random.default_rng(seed)
    weights = rng.integers(1, 2 ** 20, size=nv)
    A = sum(float(w) / 2 ** 20 * M for w, M in zip(weights, Q.matrices))
    try:
        T, Z = scipy.linalg.schur(A, output="complex")
    except (np.linalg.LinAlgError, ValueError) as e:
        raise SolverError(f"Schur decomposition of the {size}x{size} combination failed: {e}") from e
    eigenvalues = np.diag(T)
    estimates = np.stack([np.sum(Z.conj() * (M @ Z), axis=0) for M in Q.matrices], axis=1)

    compiled = CompiledSystem(system.generators, variables)
    origin = np.zeros(size, dtype=bool)
    if Q.modular is not None:
        d0 = origin_multiplicity(Q.modular, weights)
        origin[np.argsort(np.abs(eigenvalues), kind="stable")[:d0]] = True
        log.debug(f"Origin multiplicity (exact): {d0}")

    rest = np.nonzero(~origin)[0]
    refined, converged, conditioning = newton_refine(compiled, estimates[rest])
    scaled = compiled.scaled_residuals(refined)
    regular = converged & (scaled <= residual_tol) & (conditioning >= SINGULAR_CONDITIONING)

    # regular points are grouped after refinement, the rest on their Schur estimates
    clusters: List[np.ndarray] = []
    for mask, coords, radius in ((regular, refined, cluster_tol), (~regular, estimates[rest], merge_tol)):
        local = np.nonzero(mask)[0]
        if local.size == 0:
            continue
        comp = _components(local.size, _close_pairs(coords[local], radius))
        clusters.extend(local[comp == c] for c in range(int(comp.max()) + 1))

    zero_tol = math.sqrt(cluster_tol)
    zero_count = int(origin.sum())
    found: List[Dict[str, Any]] = []
    for local in clusters:
        if regular[local[0]]:
            coords = refined[local].mean(axis=0)
        else:
            coords = estimates[rest[local]].mean(axis=0)
        if np.abs(coords).max() <= zero_tol:
            zero_count += local.size
            continue
        found.append({"coords": coords, "count": int(local.size), "regular": bool(regular[local[0]]),
                      "refined": bool(converged[local].all()), "estimates": estimates[rest[local]],
                      "scaled": float(compiled.scaled_residuals(coords)[0])})
    if Q.modular is not None and zero_count != int(origin.sum()):
        log.warning(f"{zero_count - int(origin.sum())} refined points collapsed onto the origin")

    # a lone estimate off the regular path is a stray eigenvalue of a multiple point
    anchors = [entry for entry in found if entry["count"] > 1]
    strays = [entry for entry in found if entry["count"] == 1 and not entry["regular"]]
    found = [entry for entry in found if entry["count"] > 1 or entry["regular"]]
    for entry in strays:
        distances = [float(np.linalg.norm(a["coords"] - entry["coords"])) for a in anchors]
        if zero_count:
            distances.append(float(np.linalg.norm(entry["coords"])))
        if not distances:
            if entry["scaled"] <= residual_tol:
                found.append(entry)
            else:
                log.warning(f"Dropped an unconverged point with residual {entry['scaled']:.3g} and no cluster "
                            f"to join")
            continue
        nearest = int(np.argmin(distances))
        if nearest == len(anchors):
            zero_count += 1
        else:
            anchor = anchors[nearest]
            anchor["count"] += 1
            anchor["refined"] = False
            if not anchor["regular"]:
                anchor["estimates"] = np.vstack([anchor["estimates"], entry["estimates"]])
                anchor["coords"] = anchor["estimates"].mean(axis=0)
                anchor["scaled"] = float(compiled.scaled_residuals(anchor["coords"])[0])
        log.debug(f"Folded a point with residual {entry['scaled']:.3g} into the cluster at distance "
                  f"{distances[nearest]:.3g}")
    for entry in anchors:
        if entry["scaled"] > residual_tol:
            log.warning(f"Cluster of {entry['count']} estimates has residual {entry['scaled']:.3g} at its mean")

    points: List[SolutionPoint] = [SolutionPoint(
        coords=tuple(complex(c) for c in entry["coords"]),
        multiplicity=entry["count"],
        residual=float(np.abs(compiled.values(entry["coords"])).max()),
        is_zero=False,
        singular=not entry["regular"] or entry["count"] > 1,
        refined=entry["refined"],
    ) for entry in found]
    if zero_count:
        points.append(SolutionPoint(
            coords=tuple(0j for _ in range(nv)),
            multiplicity=zero_count,
            residual=0.0,
            is_zero=True,
            singular=zero_count > 1,
            refined=True,
        ))
    points.sort(key=_sort_key)

    group = _default_group(system) if group is None else group
    if group is not GroupKind.NONE:
        ids = orbit_labels([p.coords for p in points], group_elements(nv if group is GroupKind.SPECIALIZED else system.n,
                                                                       group), merge_tol * 1e-2)
        points = [replace(p, orbit_id=i) for p, i in zip(points, ids)]
    else:
        points = [replace(p, orbit_id=i) for i, p in enumerate(points)]

    result = SolutionSet(system, tuple(points), seed, size, cluster_tol, residual_tol, merge_tol,
                         Q.modular is not None, group)
    log.info(f"Solved {system.variant.value} n={system.n}: {len(points)} distinct points, profile {result.profile()}")
    if check_stability:
        other = solve_variety(G, seed + 1, cluster_tol, residual_tol, merge_tol, Q, False, group, threads, ceiling)
        stable = other.profile() == result.profile()
        if not stable:
            log.warning(f"Cluster instability: seed {seed} gives {result.profile()}, seed {seed + 1} gives "
                        f"{other.profile()}")
        result = replace(result, stable=stable)
    return result


# ----------------------------------------------------------------------------------------------------------------------
# SUMMARY AND EMISSION
# ----------------------------------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class SolutionSummary:
    """
    One table row describing a solution set.

    ``unique_mod_all`` counts symmetry orbits of the nonzero points for the
    full system (1 when the origin is the only point) and orbits including
    the origin for the specialized system; ``orbits_with_origin`` always
    includes the origin.
    """
    n: int
    variant: str
    mult_at_zero: int
    mult_nonzero: int
    unique: int
    unique_mod_dihedral: Optional[int]
    unique_mod_all: int
    orbits_with_origin: int
    singular_mod_dihedral: Optional[int]
    singular_mod_all: int
    mult_counts: Dict[int, int]
    conjecture2_count: Optional[int]
    pattern_matches: Optional[bool]
    stable: Optional[bool] = None

    def to_dict(self) -> Dict[str, Any]:
        data = dict(self.__dict__)
        data["mult_counts"] = {str(k): v for k, v in self.mult_counts.items()}
        return data


def _orbit_count(coords: List[Tuple[complex, ...]], n: int, kind: GroupKind, tol: float) -> int:
    if not coords:
        return 0
    return len(set(orbit_labels(coords, group_elements(n, kind), tol)))


def _specialized_pattern(S: SolutionSet) -> bool:
    n = S.n
    zero = sum(p.multiplicity for p in S.points if p.is_zero)
    if zero != 2 ** (n // 2):
        return False
    singular = [p for p in S.nonzero() if p.multiplicity > 1]
    if n % 2 or n <= 6:
        return not singular
    m = len(S.system.variables)
    orbits = _orbit_count([p.coords for p in singular], m, GroupKind.SPECIALIZED, S.merge_tol * 1e-2)
    return orbits == 1 and all(p.multiplicity == 2 ** (n // 2 - 2) for p in singular)


def summarize(S: SolutionSet, tol: Optional[float] = None) -> SolutionSummary:
    """Counts, symmetry-reduced counts and multiplicity profile of ``S``."""
    tol = S.merge_tol * 1e-2 if tol is None else tol
    zero = [p for p in S.points if p.is_zero]
    nonzero = S.nonzero()
    singular = [p.coords for p in S.points if p.multiplicity > 1]
    mult_at_zero = sum(p.multiplicity for p in zero)
    common = dict(
        n=S.n,
        variant=S.variant.value,
        mult_at_zero=mult_at_zero,
        mult_nonzero=sum(p.multiplicity for p in nonzero),
        unique=len(S.points),
        mult_counts=S.profile(),
        stable=S.stable,
    )
    if S.variant is Variant.SPECIALIZED:
        m = len(S.system.variables)
        orbits = _orbit_count([p.coords for p in S.points], m, GroupKind.SPECIALIZED, tol)
        return SolutionSummary(
            unique_mod_dihedral=None,
            unique_mod_all=orbits,
            orbits_with_origin=orbits,
            singular_mod_dihedral=None,
            singular_mod_all=_orbit_count(singular, m, GroupKind.SPECIALIZED, tol),
            conjecture2_count=None,
            pattern_matches=_specialized_pattern(S),
            **common,
        )
    n = S.n
    nonzero_coords = [p.coords for p in nonzero]
    nonzero_orbits = _orbit_count(nonzero_coords, n, GroupKind.FULL, tol)
    return SolutionSummary(
        unique_mod_dihedral=_orbit_count([p.coords for p in S.points], n, GroupKind.DIHEDRAL, tol),
        unique_mod_all=nonzero_orbits if nonzero_orbits else 1,
        orbits_with_origin=nonzero_orbits + (1 if zero else 0),
        singular_mod_dihedral=_orbit_count(singular, n, GroupKind.DIHEDRAL, tol),
        singular_mod_all=_orbit_count(singular, n, GroupKind.FULL, tol),
        conjecture2_count=sum(
            1 for c in nonzero_coords if conjecture_form_check(c, ConjectureForm.C2_CONJPALINDROMIC, tol)),
        pattern_matches=None,
        **common,
    )


def figure_rows(S: SolutionSet) -> List[Dict[str, Any]]:
    """One row per nonzero coordinate value of every nonzero point (scatter-plot data)."""
    rows = []
    for point_id, p in enumerate(S.points):
        if p.is_zero:
            continue
        for k, c in enumerate(S.system.potential(p.coords), start=1):
            if abs(c) > S.cluster_tol:
                rows.append({"point_id": point_id, "coordinate": k, "re": c.real, "im": c.imag,
                             "multiplicity": p.multiplicity})
    return rows


def solution_to_dict(S: SolutionSet, summary: Optional[SolutionSummary] = None) -> Dict[str, Any]:
    """The documented solution-set JSON object."""
    return {
        "n": S.n,
        "variant": S.variant.value,
        "seed": S.seed,
        "tolerances": {"cluster": S.cluster_tol, "residual": S.residual_tol, "merge": S.merge_tol},
        "basis_size": S.basis_size,
        "stable": S.stable,
        "points": [
            {
                "coords": [[c.real, c.imag] for c in p.coords],
                "multiplicity": p.multiplicity,
                "residual": p.residual,
                "orbit_id": p.orbit_id,
                "is_zero": p.is_zero,
                "singular": p.singular,
            }
            for p in S.points
        ],
        "summary": (summary or summarize(S)).to_dict(),
    }
