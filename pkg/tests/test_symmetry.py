import itertools
import random
from fractions import Fraction

import pytest

from floq.errors import DimensionError, UnsupportedPeriodError
from floq.floquet import explicit_potential, verify_isospectral
from floq.polycore import GaussianRational
from floq.symmetry import ConjectureForm, GroupKind, SymmetryElement, apply, canonicalize, compose, \
    conjecture_form_check, conjecture_rotation, group_elements, identity, orbit, orbit_elements, orbit_labels


# ----------------------------------------------------------------------------------------------------------------------
# Tests for apply()
# ----------------------------------------------------------------------------------------------------------------------


def test_rotation_and_reflection():
    """
    Rotation by 1 moves ``V_(j-1)`` onto position ``j``; the reflection reverses the order.
    """
    V = (1, 2, 3, 4, 5)
    assert apply(SymmetryElement(rotation=1), V) == (5, 1, 2, 3, 4)
    assert apply(SymmetryElement(reflect=True), V) == (5, 4, 3, 2, 1)
    assert apply(SymmetryElement(rotation=2, reflect=True), V) == (2, 1, 5, 4, 3)
    assert apply(identity(), V) == V


def test_negation_and_conjugation_stay_exact():
    V = (GaussianRational(1, 2), GaussianRational(Fraction(1, 3), -1))
    image = apply(SymmetryElement(negate=True, conjugate=True), V)
    assert image == (GaussianRational(-1, 2), GaussianRational(Fraction(-1, 3), -1))
    assert all(isinstance(x, GaussianRational) for x in image)


def test_apply_rejects_empty_potentials():
    with pytest.raises(DimensionError):
        apply(identity(), ())


def test_describe():
    assert SymmetryElement(3, True, True, False).describe() == "ref+rot3+neg"
    assert identity().describe() == "rot0"


# ----------------------------------------------------------------------------------------------------------------------
# Tests for compose() and group_elements()
# ----------------------------------------------------------------------------------------------------------------------


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_compose_matches_successive_application(n):
    """
    ``apply(compose(g, h), V) == apply(g, apply(h, V))`` for every pair of the full group.
    """
    V = tuple(GaussianRational(j, j * j - 1) for j in range(n))
    elements = group_elements(n, GroupKind.FULL)
    for g, h in itertools.product(elements, repeat=2):
        assert apply(compose(g, h, n), V) == apply(g, apply(h, V))


@pytest.mark.parametrize("n, kind, size", [
    (5, GroupKind.FULL, 40),
    (5, GroupKind.DIHEDRAL, 10),
    (5, GroupKind.SPECIALIZED, 4),
    (5, GroupKind.NONE, 1),
])
def test_group_sizes(n, kind, size):
    elements = group_elements(n, kind)
    assert len(elements) == size
    assert len(set(elements)) == size
    assert elements[0] == identity()


@pytest.mark.parametrize("n", [4, 5])
def test_group_is_closed(n):
    elements = set(group_elements(n, GroupKind.FULL))
    for g, h in itertools.product(elements, repeat=2):
        assert compose(g, h, n) in elements


# ----------------------------------------------------------------------------------------------------------------------
# Tests for orbit() and canonicalize()
# ----------------------------------------------------------------------------------------------------------------------


def test_orbit_of_the_explicit_potential():
    """
    The orbit of ``(1+i, 1-i, -1+i, -1-i)`` has 8 elements, all isospectral to 0.
    """
    images = orbit(explicit_potential(4))
    assert len(images) == 8
    assert len(orbit(explicit_potential(4), GroupKind.DIHEDRAL)) == 8
    for image in images:
        assert verify_isospectral(4, image).isospectral


def test_orbit_with_a_tolerance():
    """
    Floating images within the tolerance collapse to one entry.
    """
    V = (1 + 1e-12, 1.0, 1.0)
    assert len(orbit(V, GroupKind.DIHEDRAL, tol=1e-9)) == 1
    assert len(orbit(V, GroupKind.DIHEDRAL, tol=0.0)) == 3


def test_orbit_elements_name_the_first_producer():
    """
    ``orbit_elements`` returns, for each distinct image, the first group element
    producing it; applying them reproduces ``orbit`` in the same order.
    """
    V = (1, 1, 2, 2)
    elements = orbit_elements(V, GroupKind.DIHEDRAL)
    assert [g.describe() for g in elements] == ["rot0", "rot1", "rot2", "rot3"]
    assert [apply(g, V) for g in elements] == orbit(V, GroupKind.DIHEDRAL)
    floating = tuple(complex(x) for x in explicit_potential(4))
    assert [apply(g, floating) for g in orbit_elements(floating, tol=1e-9)] == orbit(floating, tol=1e-9)


def test_canonicalize_is_an_orbit_invariant():
    """
    Every element of an orbit canonicalizes to the same representative.
    """
    rng = random.Random(5)
    for n in (4, 5):
        V = tuple(GaussianRational(rng.randint(-3, 3), rng.randint(-3, 3)) for _ in range(n))
        canonical = canonicalize(V)
        assert canonical in orbit(V)
        for image in orbit(V):
            assert canonicalize(image) == canonical


def test_canonicalize_floating_points():
    V = (1j, -1j, 2.0, 0.5)
    images = orbit(V, GroupKind.FULL, tol=1e-9)
    representatives = {tuple(canonicalize(image, GroupKind.FULL, tol=1e-9)) for image in images}
    assert len(representatives) == 1


# ----------------------------------------------------------------------------------------------------------------------
# Tests for orbit_labels()
# ----------------------------------------------------------------------------------------------------------------------


def test_orbit_labels_group_images_together():
    """
    Points of one orbit share a label; labels appear in first-appearance order.
    """
    explicit = [complex(x) for x in explicit_potential(4)]
    other = (1.0, 2.0, 3.0, 4.0)
    points = [other] + [apply(g, explicit) for g in group_elements(4, GroupKind.DIHEDRAL)]
    points.append(apply(SymmetryElement(rotation=1), other))
    labels = orbit_labels(points, group_elements(4, GroupKind.FULL), 1e-9)
    assert labels[0] == 0
    assert set(labels[1:-1]) == {1}
    assert labels[-1] == 0


def test_orbit_labels_without_a_group():
    points = [(1.0, 2.0, 3.0), (3.0, 2.0, 1.0)]
    assert orbit_labels(points, group_elements(3, GroupKind.NONE), 1e-9) == [0, 1]
    assert orbit_labels(points, group_elements(3, GroupKind.DIHEDRAL), 1e-9) == [0, 0]
    assert orbit_labels([], group_elements(3, GroupKind.FULL), 1e-9) == []


# ----------------------------------------------------------------------------------------------------------------------
# Tests for conjecture_form_check() and conjecture_rotation()
# ----------------------------------------------------------------------------------------------------------------------


def test_conjecture_forms_on_small_examples():
    i = GaussianRational(0, 1)
    assert conjecture_form_check((1 + i, 2, -2, -1 - i), ConjectureForm.C1_ANTIPALINDROMIC)
    assert not conjecture_form_check((1 + i, 2, 0, -2, -1 - i + i), ConjectureForm.C1_ANTIPALINDROMIC)
    assert conjecture_form_check((1 + i, 2, 7, 2, 1 - i), ConjectureForm.C2_CONJPALINDROMIC)
    assert not conjecture_form_check((1 + i, 2, 2, 1 + i), ConjectureForm.C2_CONJPALINDROMIC)
    assert conjecture_form_check((1 + 1j, 1 - 1j + 1e-9), ConjectureForm.C2_CONJPALINDROMIC, tol=1e-6)


def test_antipalindromic_form_forces_a_zero_middle():
    assert conjecture_form_check((1, 0, -1), ConjectureForm.C1_ANTIPALINDROMIC)
    assert not conjecture_form_check((1, 3, -1), ConjectureForm.C1_ANTIPALINDROMIC)


@pytest.mark.parametrize("n", [4, 6, 8, 10, 12])
def test_explicit_potential_rotates_into_the_conjugate_palindromic_form(n):
    r = conjecture_rotation(n, ConjectureForm.C2_CONJPALINDROMIC)
    image = apply(SymmetryElement(rotation=r), explicit_potential(n))
    assert conjecture_form_check(image, ConjectureForm.C2_CONJPALINDROMIC)


@pytest.mark.parametrize("n", [4, 8, 12, 16])
def test_explicit_potential_rotates_into_the_antipalindromic_form(n):
    r = conjecture_rotation(n, ConjectureForm.C1_ANTIPALINDROMIC)
    image = apply(SymmetryElement(rotation=r), explicit_potential(n))
    assert conjecture_form_check(image, ConjectureForm.C1_ANTIPALINDROMIC)


def test_raw_period_4_potential_is_antipalindromic_but_not_conjugate_palindromic():
    V = explicit_potential(4)
    assert conjecture_form_check(V, ConjectureForm.C1_ANTIPALINDROMIC)
    assert not conjecture_form_check(V, ConjectureForm.C2_CONJPALINDROMIC)


@pytest.mark.parametrize("n, form", [
    (5, ConjectureForm.C2_CONJPALINDROMIC),
    (2, ConjectureForm.C2_CONJPALINDROMIC),
    (6, ConjectureForm.C1_ANTIPALINDROMIC),
    (10, ConjectureForm.C1_ANTIPALINDROMIC),
])
def test_conjecture_rotation_rejects_unsupported_periods(n, form):
    with pytest.raises(UnsupportedPeriodError):
        conjecture_rotation(n, form)
