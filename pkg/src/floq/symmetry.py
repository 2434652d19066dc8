"""
Symmetries of periodic potentials: the dihedral group of the ``n``-cycle
together with negation and complex conjugation.

Every element maps a potential ``V`` to an isospectral one, so orbits are
the natural unit for counting solutions.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from floq.errors import DimensionError, UnsupportedPeriodError
from floq.polycore import GaussianRational


__all__ = [
    "GroupKind",
    "ConjectureForm",
    "SymmetryElement",
    "identity",
    "apply",
    "compose",
    "group_elements",
    "orbit_elements",
    "orbit",
    "canonicalize",
    "orbit_labels",
    "conjecture_form_check",
    "conjecture_rotation",
]


log = logging.getLogger(__name__)


class GroupKind(Enum):
    NONE = "none"
    DIHEDRAL = "dihedral"
    FULL = "full"
    SPECIALIZED = "specialized"


class ConjectureForm(Enum):
    C1_ANTIPALINDROMIC = "c1_antipalindromic"
    C2_CONJPALINDROMIC = "c2_conjpalindromic"


@dataclass(frozen=True)
class SymmetryElement:
    """
    One group element: optional reflection, then rotation, then the sign and conjugation flips.

    Rotation by ``r`` sends ``V`` to ``W`` with ``W_j = V_(j-r)``; the
    reflection is ``W_j = V_(n-1-j)`` (indices zero-based and taken mod ``n``).

    :ivar rotation: Rotation offset in ``0..n-1``.
    :type rotation: int
    :ivar reflect: Whether the coordinates are reversed before rotating.
    :type reflect: bool
    :ivar negate: Whether every coordinate changes sign.
    :type negate: bool
    :ivar conjugate: Whether every coordinate is conjugated.
    :type conjugate: bool
    """
    rotation: int = 0
    reflect: bool = False
    negate: bool = False
    conjugate: bool = False

    def source(self, n: int) -> List[int]:
        """``source(n)[j]`` is the index of ``V`` that lands on position ``j``."""
        if self.reflect:
            return [(n - 1 + self.rotation - j) % n for j in range(n)]
        return [(j - self.rotation) % n for j in range(n)]

    def describe(self) -> str:
        parts = [f"rot{self.rotation}"]
        if self.reflect:
            parts.insert(0, "ref")
        if self.negate:
            parts.append("neg")
        if self.conjugate:
            parts.append("conj")
        return "+".join(parts)


def identity() -> SymmetryElement:
    return SymmetryElement()


def _conj(x: Any) -> Any:
    return x.conjugate()


def apply(g: SymmetryElement, V: Sequence[Any]) -> Tuple[Any, ...]:
    """Image of the point ``V`` under ``g``; exact coordinates stay exact."""
    n = len(V)
    if n == 0:
        raise DimensionError("cannot act on an empty potential")
    out = [V[i] for i in g.source(n)]
    if g.negate:
        out = [-x for x in out]
    if g.conjugate:
        out = [_conj(x) for x in out]
    return tuple(out)


def _affine(g: SymmetryElement, n: int) -> Tuple[int, int]:
    # source index of position j is s*j + t (mod n)
    if g.reflect:
        return -1, n - 1 + g.rotation
    return 1, -g.rotation


def compose(g: SymmetryElement, h: SymmetryElement, n: int) -> SymmetryElement:
    """The element ``g∘h``, i.e. ``apply(compose(g, h), V) == apply(g, apply(h, V))``."""
    s_g, t_g = _affine(g, n)
    s_h, t_h = _affine(h, n)
    s, t = s_h * s_g, s_h * t_g + t_h
    rotation = (-t) % n if s == 1 else (t - (n - 1)) % n
    return SymmetryElement(rotation, s == -1, g.negate != h.negate, g.conjugate != h.conjugate)


def group_elements(n: int, kind: GroupKind) -> List[SymmetryElement]:
    """
    Every element of the requested group acting on length-``n`` points.

    The full group is enumerated as all ``8n`` combinations even where two of
    them act identically on a given point; the specialized group has the 4
    sign and conjugation flips only.
    """
    if kind is GroupKind.NONE:
        return [identity()]
    flips = [(False, False)]
    if kind in (GroupKind.FULL, GroupKind.SPECIALIZED):
        flips = [(neg, conj) for neg in (False, True) for conj in (False, True)]
    if kind is GroupKind.SPECIALIZED:
        return [SymmetryElement(0, False, neg, conj) for neg, conj in flips]
    return [SymmetryElement(r, reflect, neg, conj)
            for reflect in (False, True) for r in range(n) for neg, conj in flips]


def _exact(V: Sequence[Any]) -> bool:
    return all(isinstance(x, (int, Fraction, GaussianRational)) for x in V)


def _close(a: Sequence[Any], b: Sequence[Any], tol: float) -> bool:
    return max(abs(complex(x) - complex(y)) for x, y in zip(a, b)) <= tol


def orbit_elements(V: Sequence[Any], kind: GroupKind = GroupKind.FULL,
                   tol: Optional[float] = None) -> List[SymmetryElement]:
    """
    One group element per distinct image of ``V``: the first, in group
    enumeration order, that produces it.

    Exact points are deduplicated by equality when ``tol`` is ``None``;
    otherwise two images are the same when their max-norm distance is at most ``tol``.
    """
    elements = group_elements(len(V), kind)
    images = [apply(g, V) for g in elements]
    out: List[SymmetryElement] = []
    if tol is None and _exact(V):
        seen: Set[Tuple[Any, ...]] = set()
        for g, image in zip(elements, images):
            key = tuple(GaussianRational.coerce(x) for x in image)
            if key not in seen:
                seen.add(key)
                out.append(g)
        return out
    tol = 0.0 if tol is None else tol
    kept: List[Tuple[Any, ...]] = []
    for g, image in zip(elements, images):
        if not any(_close(image, other, tol) for other in kept):
            kept.append(image)
            out.append(g)
    return out


def orbit(V: Sequence[Any], kind: GroupKind = GroupKind.FULL, tol: Optional[float] = None) -> List[Tuple[Any, ...]]:
    """Distinct images of ``V``, in group enumeration order."""
    return [apply(g, V) for g in orbit_elements(V, kind, tol)]


def _order_key(V: Sequence[Any], tol: Optional[float]) -> Tuple:
    key = []
    for x in V:
        if isinstance(x, (int, Fraction, GaussianRational)):
            x = GaussianRational.coerce(x)
            re, im = x.re, x.im
        else:
            x = complex(x)
            re, im = x.real, x.imag
            if tol:
                re, im = round(re / tol), round(im / tol)
        key.append((re, im))
    return tuple(key)


def canonicalize(V: Sequence[Any], kind: GroupKind = GroupKind.FULL, tol: Optional[float] = None) -> Tuple[Any, ...]:
    """
    The orbit element that is smallest coordinatewise, comparing real then imaginary parts.

    Inexact coordinates are compared on the grid of spacing ``tol``.
    """
    return min(orbit(V, kind, tol), key=lambda image: _order_key(image, tol))


def orbit_labels(points: Sequence[Sequence[Any]], elements: Sequence[SymmetryElement], tol: float) -> List[int]:
    """
    Label each point by its orbit under ``elements``.

    Labels are ``0, 1, ...`` in order of first appearance. Images are matched
    to points within ``tol`` in the max norm.
    """
    if not points:
        return []
    X = np.array([[complex(x) for x in p] for p in points], dtype=complex)
    count, n = X.shape
    tree = cKDTree(np.hstack([X.real, X.imag]))
    rows, cols = [], []
    for g in elements:
        Y = X[:, g.source(n)]
        if g.negate:
            Y = -Y
        if g.conjugate:
            Y = Y.conj()
        dist, idx = tree.query(np.hstack([Y.real, Y.imag]), k=1, p=np.inf, distance_upper_bound=tol)
        hit = np.isfinite(dist)
        rows.extend(np.nonzero(hit)[0].tolist())
        cols.extend(idx[hit].tolist())
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(count, count))
    _, components = connected_components(graph, directed=False)
    relabel: dict = {}
    return [relabel.setdefault(int(c), len(relabel)) for c in components]


def conjecture_form_check(V: Sequence[Any], form: ConjectureForm, tol: Optional[float] = None) -> bool:
    """
    Whether ``v_j = -v_(n+1-j)`` (antipalindromic) or ``v_j = conj(v_(n+1-j))``
    (conjugate palindromic) holds for every ``j``.

    Exact coordinates are compared exactly unless ``tol`` is given. The
    antipalindromic form forces a zero middle coordinate for odd ``n``.
    """
    n = len(V)
    exact = tol is None and _exact(V)
    for j in range(n):
        a, b = V[j], V[n - 1 - j]
        target = -b if form is ConjectureForm.C1_ANTIPALINDROMIC else _conj(b)
        if exact:
            if GaussianRational.coerce(a) != GaussianRational.coerce(target):
                return False
        elif abs(complex(a) - complex(target)) > (tol or 0.0):
            return False
    return True


def conjecture_rotation(n: int, form: ConjectureForm) -> int:
    """
    Rotation that brings :func:`floq.floquet.explicit_potential` into ``form``.

    :raises UnsupportedPeriodError: for odd ``n``, or for the antipalindromic
        form when ``n`` is not a multiple of 4.
    """
    if n < 4 or n % 2:
        raise UnsupportedPeriodError(f"the explicit potential needs an even n >= 4, got n={n}")
    m = n // 2
    if form is ConjectureForm.C2_CONJPALINDROMIC:
        return m - 1
    if m % 2:
        raise UnsupportedPeriodError(f"no rotation gives the antipalindromic form for n={n} (needs 4 | n)")
    return m // 2 - 1
