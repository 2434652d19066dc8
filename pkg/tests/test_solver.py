import logging

import numpy as np
import pytest

from floq.errors import CeilingExceededError
from floq.floquet import VerifyMode, explicit_potential, specialized_invariants, spectral_invariants, \
    verify_isospectral
from floq.grobner import groebner_generators, normal_form
from floq.polycore import MultiPoly
from floq.solver import CompiledSystem, _commutator, multiplication_matrices, newton_refine, origin_multiplicity, \
    solution_to_dict, solve_variety, summarize, figure_rows
from floq.symmetry import GroupKind, apply, group_elements


# ----------------------------------------------------------------------------------------------------------------------
# Helper utilities
# ----------------------------------------------------------------------------------------------------------------------


_SOLVED = {}


def solved(n: int, variant: str = "full", seed: int = 0):
    """
    Solve the requested system once per test session.

    :param n: Period.
    :param variant: ``full`` or ``specialized``.
    :param seed: Seed of the random combination.
    :return: The solution set.
    """
    key = (n, variant, seed)
    if key not in _SOLVED:
        system = specialized_invariants(n) if variant == "specialized" else spectral_invariants(n)
        _SOLVED[key] = solve_variety(groebner_generators(system), seed=seed)
    return _SOLVED[key]


def nearest(point, points) -> float:
    """
    Max-norm distance from ``point`` to the closest of ``points``.

    :param point: Complex coordinates.
    :param points: Candidate coordinate tuples.
    :return: The smallest distance.
    """
    target = np.array(point, dtype=complex)
    return min(float(np.abs(np.array(p, dtype=complex) - target).max()) for p in points)


# ----------------------------------------------------------------------------------------------------------------------
# Tests for multiplication_matrices()
# ----------------------------------------------------------------------------------------------------------------------


def test_period_3_operators_are_nilpotent():
    """
    For ``n = 3`` the quotient is 6-dimensional and supported at the origin
    only: every operator is nilpotent and the exact origin multiplicity is 6.
    """
    G = groebner_generators(spectral_invariants(3))
    Q = multiplication_matrices(G)
    assert Q.size == 6
    assert Q.provenance["method"] == "multimodular"
    for M in Q.matrices:
        assert M.shape == (6, 6)
        assert np.allclose(np.linalg.matrix_power(M, 6), 0, atol=1e-9)
    assert origin_multiplicity(Q.modular, [1, 2, 3]) == 6


def test_columns_are_normal_forms():
    """
    Column ``j`` of ``M_i`` holds the coordinates of ``normal_form(v_i * b_j)``.
    """
    G = groebner_generators(spectral_invariants(4))
    Q = multiplication_matrices(G)
    index = {b: j for j, b in enumerate(G.basis)}
    for i, name in enumerate(Q.variables):
        v = MultiPoly.variable(G.table, name)
        for j, b in enumerate(G.basis):
            expected = np.zeros(len(G.basis), dtype=complex)
            for exps, c in normal_form(v * MultiPoly.monomial(G.table, b), G).terms.items():
                expected[index[exps]] = complex(c)
            assert np.allclose(Q.matrices[i][:, j], expected)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_traces_sum_to_zero(n):
    """
    ``p_1 = e_1`` lies in the ideal, so the root coordinates sum to 0 over all
    roots counted with multiplicity.
    """
    Q = multiplication_matrices(groebner_generators(spectral_invariants(n)))
    assert abs(sum(np.trace(M) for M in Q.matrices)) < 1e-6


@pytest.mark.parametrize("n", [3, 4, 5])
def test_operators_commute(n):
    Q = multiplication_matrices(groebner_generators(spectral_invariants(n)))
    assert Q.max_commutator <= 1e-8


def test_specialized_operators_commute():
    Q = multiplication_matrices(groebner_generators(specialized_invariants(8)))
    assert Q.size == 384
    assert Q.max_commutator <= 1e-8


def test_commutator_defect_is_logged(caplog):
    """
    Matrices that fail to commute beyond the relative bound of ``1e-8`` are
    reported with a warning; commuting ones stay silent.
    """
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    b = np.array([[0.0, 0.0], [1.0, 0.0]])
    with caplog.at_level(logging.WARNING, logger="floq.solver"):
        assert _commutator([a, a @ a + a]) == 0.0
        assert not caplog.records
        assert _commutator([a, b]) == pytest.approx(np.linalg.norm(a @ b - b @ a))
    assert any("commute only to" in r.getMessage() for r in caplog.records)


def test_ceiling_is_enforced():
    G = groebner_generators(spectral_invariants(4))
    with pytest.raises(CeilingExceededError):
        multiplication_matrices(G, ceiling=10)


# ----------------------------------------------------------------------------------------------------------------------
# Tests for newton_refine()
# ----------------------------------------------------------------------------------------------------------------------


def test_newton_refine_converges_to_the_explicit_potential():
    """
    A perturbed explicit potential is pulled back onto the variety.
    """
    system = spectral_invariants(4)
    compiled = CompiledSystem(system.generators, system.variables)
    exact = np.array([complex(x) for x in explicit_potential(4)])
    X, converged, conditioning = newton_refine(compiled, exact[None, :] + 1e-4)
    assert converged[0]
    assert np.abs(X[0] - exact).max() < 1e-10
    assert np.abs(compiled.values(X[0])).max() < 1e-10
    assert conditioning[0] > 1e-6


def test_newton_refine_accepts_no_points():
    system = spectral_invariants(3)
    compiled = CompiledSystem(system.generators, system.variables)
    X, converged, conditioning = newton_refine(compiled, np.zeros((0, 3), dtype=complex))
    assert X.shape == (0, 3)
    assert converged.size == 0 and conditioning.size == 0


def test_scaled_residuals_are_relative_to_the_terms():
    """
    Each generator value is divided by one plus the absolute sizes of its
    terms, so the scaled residual is below the absolute one; the origin gives 0.
    """
    system = spectral_invariants(3)
    compiled = CompiledSystem(system.generators, system.variables)
    assert compiled.scaled_residuals(np.zeros((2, 3), dtype=complex)).tolist() == [0.0, 0.0]
    point = np.array([1.0, 2.0, 3.0], dtype=complex)
    absolute = np.abs(compiled.values(point)).max()
    scaled = compiled.scaled_residuals(point)[0]
    assert 0 < scaled < absolute
    assert compiled.scaled_residuals(np.zeros((0, 3), dtype=complex)).size == 0


@pytest.mark.parametrize("n, variant", [(4, "full"), (5, "full"), (4, "specialized"), (5, "specialized"),
                                        (6, "specialized"), (7, "specialized")])
def test_simple_points_meet_the_residual_bound(n, variant):
    """
    Every point reported with multiplicity 1 is a regular Newton limit whose
    scaled residual is within ``residual_tol``; multiplicities add up to the
    quotient dimension.
    """
    S = solved(n, variant)
    compiled = CompiledSystem(S.system.generators, S.system.unknowns)
    for p in S.nonzero():
        if p.multiplicity == 1:
            assert p.refined and not p.singular
            assert compiled.scaled_residuals(np.array(p.coords))[0] <= S.residual_tol
    assert sum(p.multiplicity for p in S.points) == S.basis_size


# ----------------------------------------------------------------------------------------------------------------------
# Tests for solve_variety() and summarize()
# ----------------------------------------------------------------------------------------------------------------------


def test_period_3_has_only_the_origin():
    S = solved(3)
    assert len(S.points) == 1
    assert S.points[0].is_zero
    assert S.points[0].multiplicity == 6
    summary = summarize(S)
    assert summary.unique == 1
    assert summary.mult_nonzero == 0
    assert summary.unique_mod_dihedral == 1
    assert summary.unique_mod_all == 1
    assert summary.conjecture2_count == 0


def test_period_4_full():
    """
    Nine points: the origin with multiplicity 16 and eight simple points
    forming one symmetry orbit, four of them conjugate palindromic.
    """
    S = solved(4)
    assert S.profile() == {1: 8, 16: 1}
    assert S.origin_exact
    summary = summarize(S)
    assert summary.mult_at_zero == 16
    assert summary.mult_nonzero == 8
    assert summary.unique == 9
    assert summary.unique_mod_dihedral == 2
    assert summary.unique_mod_all == 1
    assert summary.orbits_with_origin == 2
    assert summary.singular_mod_dihedral == 1
    assert summary.conjecture2_count == 4
    assert summary.mult_counts == {1: 8, 16: 1}


def test_period_4_points_are_isospectral():
    """
    Every nonzero point has a tiny residual, passes the numeric check and lies
    in the orbit of the explicit potential.
    """
    S = solved(4)
    explicit = [complex(x) for x in explicit_potential(4)]
    orbit = [apply(g, explicit) for g in group_elements(4, GroupKind.FULL)]
    for p in S.nonzero():
        assert p.residual <= 1e-8
        assert not p.singular
        assert verify_isospectral(4, p.coords, VerifyMode.NUMERIC, 1e-8).isospectral
        assert nearest(p.coords, orbit) < 1e-8


def test_period_4_is_closed_under_symmetries():
    S = solved(4)
    coords = [p.coords for p in S.nonzero()]
    for p in coords:
        for g in group_elements(4, GroupKind.FULL):
            assert nearest(apply(g, p), coords) < 1e-6


def test_period_5_full():
    """
    Sixty simple points and the origin with multiplicity 60.
    """
    S = solved(5)
    summary = summarize(S)
    assert summary.unique == 61
    assert summary.mult_at_zero == 60
    assert summary.mult_counts == {1: 60, 60: 1}
    assert summary.unique_mod_dihedral == 7
    assert summary.conjecture2_count == 4
    assert summary.unique_mod_all == 3
    assert sum(p.multiplicity for p in S.points) == 120


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_profiles_do_not_depend_on_the_seed(seed):
    assert solved(4, seed=seed).profile() == solved(4).profile()
    assert solved(5, seed=seed).profile() == solved(5).profile()


def test_stability_check_is_recorded():
    S = solve_variety(groebner_generators(spectral_invariants(4)), seed=7, check_stability=True)
    assert S.stable is True
    assert summarize(S).stable is True


def test_period_4_specialized():
    """
    Five points: the origin with multiplicity 4 and ``(±(1+i), ±(1-i))`` with
    their conjugates.
    """
    S = solved(4, "specialized")
    assert S.profile() == {1: 4, 4: 1}
    expected = [(1 + 1j, 1 - 1j), (1 - 1j, 1 + 1j), (-1 - 1j, -1 + 1j), (-1 + 1j, -1 - 1j)]
    for p in S.nonzero():
        assert nearest(p.coords, expected) < 1e-8
    summary = summarize(S)
    assert summary.unique == 5
    assert summary.unique_mod_all == 2
    assert summary.singular_mod_all == 1
    assert summary.pattern_matches is True


def test_period_5_specialized():
    S = solved(5, "specialized")
    assert S.profile() == {1: 4, 4: 1}
    for p in S.nonzero():
        assert p.residual <= 1e-8


@pytest.mark.parametrize("n", [6, 7])
def test_periods_6_and_7_specialized(n):
    """
    Forty simple points and the origin with multiplicity 8, in 11 orbits of
    the sign and conjugation flips.
    """
    S = solved(n, "specialized")
    summary = summarize(S)
    assert summary.mult_counts == {1: 40, 8: 1}
    assert summary.unique == 41
    assert summary.unique_mod_all == 11
    assert summary.pattern_matches is True


@pytest.mark.slow
def test_period_6_full():
    """
    The origin has multiplicity 120 and 504 simple points lie beside twelve
    double and twelve sixfold points; modulo every symmetry the nonzero points
    form 19 orbits, 20 once the origin is counted.
    """
    S = solved(6)
    summary = summarize(S)
    assert summary.mult_counts == {1: 504, 2: 12, 6: 12, 120: 1}
    assert summary.unique == 529
    assert summary.unique_mod_dihedral == 45
    assert summary.unique_mod_all == 19
    assert summary.orbits_with_origin == 20
    assert summary.conjecture2_count == 32


@pytest.mark.slow
@pytest.mark.parametrize("n, profile, unique, mod_all", [
    (8, {1: 352, 4: 4, 16: 1}, 357, 90),
    (9, {1: 368, 16: 1}, 369, 93),
])
def test_larger_specialized_periods(n, profile, unique, mod_all):
    """
    The specialized systems of periods 8 and 9: the origin has multiplicity 16,
    period 8 adds one orbit of four singular points of multiplicity 4, and
    every simple point meets the residual bound.
    """
    S = solved(n, "specialized")
    summary = summarize(S)
    assert summary.mult_counts == profile
    assert summary.unique == unique
    assert summary.unique_mod_all == mod_all
    assert summary.pattern_matches is True
    compiled = CompiledSystem(S.system.generators, S.system.unknowns)
    for p in S.nonzero():
        if p.multiplicity == 1:
            assert not p.singular
            assert compiled.scaled_residuals(np.array(p.coords))[0] <= S.residual_tol


@pytest.mark.slow
@pytest.mark.parametrize("seed", [1, 2])
def test_specialized_period_8_does_not_depend_on_the_seed(seed):
    """
    Scattered eigenvalues of the fourfold points are regrouped for every seed,
    so the profile and the orbit count stay the same.
    """
    S = solved(8, "specialized", seed=seed)
    assert S.profile() == solved(8, "specialized").profile() == {1: 352, 4: 4, 16: 1}
    assert summarize(S).unique_mod_all == 90


@pytest.mark.parametrize("n", [3, 4, 5])
def test_origin_lower_bound(n):
    """
    The origin always carries multiplicity at least ``2n``.
    """
    assert summarize(solved(n)).mult_at_zero >= 2 * n


# ----------------------------------------------------------------------------------------------------------------------
# Tests for emission helpers
# ----------------------------------------------------------------------------------------------------------------------


def test_solution_dict_layout():
    S = solved(4)
    data = solution_to_dict(S)
    assert data["n"] == 4 and data["variant"] == "full" and data["seed"] == 0
    assert sum(p["multiplicity"] for p in data["points"]) == 24
    assert all(len(p["coords"]) == 4 and len(p["coords"][0]) == 2 for p in data["points"])
    assert data["summary"]["mult_counts"] == {"1": 8, "16": 1}


def test_figure_rows_cover_every_nonzero_coordinate():
    S = solved(4)
    rows = figure_rows(S)
    assert len(rows) == 32
    assert {r["coordinate"] for r in rows} == {1, 2, 3, 4}
    assert all(abs(abs(complex(r["re"], r["im"])) - 2 ** 0.5) < 1e-8 for r in rows)


def test_specialized_figure_rows_use_potential_coordinates():
    S = solved(5, "specialized")
    rows = figure_rows(S)
    # the middle coordinate of an odd period is fixed to 0 and never emitted
    assert {r["coordinate"] for r in rows} == {1, 2, 4, 5}
