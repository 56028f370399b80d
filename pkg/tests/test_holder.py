import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import convex_table, linear_table
from evenpowers.errors import CoverageError
from evenpowers.holder import (
    ExponentSet,
    HolderAssignment,
    ford_weights,
    mixed_phi,
    optimize_weights,
    phi,
    reciprocal_sum,
)
from evenpowers.tables import LambdaTable, NuTable


def test_reciprocal_sums():
    assert reciprocal_sum(ExponentSet([2])) == Fraction(1, 2)
    assert reciprocal_sum(ExponentSet([2, 3])) == Fraction(5, 6)


def test_reciprocal_sum_full_set_is_harmonic_half():
    K = ExponentSet.even(2, 266)
    H = sum(Fraction(1, j) for j in range(1, 134))
    assert reciprocal_sum(K) == H / 2
    assert float(reciprocal_sum(K)) == pytest.approx(2.7356597403102, abs=1e-12)


@pytest.mark.parametrize("members", [[], [2, 2], [4, 2], [1, 2]])
def test_exponent_set_rejects(members):
    with pytest.raises(ValueError):
        ExponentSet(members)


def test_exponent_set_of_sorts_and_union():
    assert ExponentSet.of([6, 2, 4]).members == (2, 4, 6)
    assert (ExponentSet([2, 4]) | ExponentSet([8])).members == (2, 4, 8)


def test_ford_weights_pair():
    w = ford_weights(ExponentSet([4, 6]))
    assert w[4] == Fraction(5, 3) and w[6] == Fraction(5, 2)
    assert w.reciprocal_total == 1


def test_ford_weights_singleton_rejected():
    with pytest.raises(ValueError):
        ford_weights(ExponentSet([8]))


@given(st.sets(st.integers(1, 60).map(lambda j: 2 * j), min_size=2, max_size=20))
def test_ford_weights_exact_constraint(ks):
    w = ford_weights(ExponentSet(sorted(ks)))
    assert sum(1 / Fraction(a) for a in w.weights.values()) == 1


def test_holder_assignment_checks():
    with pytest.raises(ValueError):
        HolderAssignment({4: 1.0, 6: 2.0})
    with pytest.raises(ValueError):
        HolderAssignment({4: 2.0, 6: 3.0})
    HolderAssignment({4: 2.0, 6: 2.0})


def test_phi_single_term():
    t = LambdaTable({(4, 2): 8.0})
    res = phi(ExponentSet([4]), _pinned({4: 2}), t)
    assert res.phi == pytest.approx(0.5, abs=1e-15)


def _pinned(weights):
    # a one-exponent block cannot satisfy sum 1/a = 1 with a > 1, so build
    # the assignment without validation to exercise the phi formula alone
    obj = object.__new__(HolderAssignment)
    object.__setattr__(obj, "weights", dict(weights))
    return obj


def test_phi_worked_pair(tiny_table):
    K = ExponentSet([4, 6])
    res = phi(K, ford_weights(K), tiny_table)
    assert res.phi == pytest.approx(-5 / 12, abs=1e-12)
    assert res.per_k_terms[4] == pytest.approx(0.25, abs=1e-15)
    assert res.reciprocal_part == pytest.approx(5 / 6, abs=1e-15)


def test_phi_coverage_propagates():
    K = ExponentSet([4, 6])
    with pytest.raises(CoverageError):
        phi(K, ford_weights(K), LambdaTable({(4, 1): 1.0}))


def test_phi_permutation_invariant():
    t = convex_table(range(4, 21, 2), 40)
    a = ExponentSet([4, 10, 16])
    b = ExponentSet.of([16, 4, 10])
    assert phi(a, ford_weights(a), t).phi == phi(b, ford_weights(b), t).phi


@settings(max_examples=40)
@given(st.floats(0.001, 5.0))
def test_phi_increases_with_lambda(bump):
    ks = range(4, 13, 2)
    base = convex_table(ks, 30)
    raised = LambdaTable({key: v + bump for key, v in base.entries.items()})
    K = ExponentSet([4, 8, 12])
    w = ford_weights(K)
    assert phi(K, w, raised).phi > phi(K, w, base).phi


def test_optimize_budget_zero_returns_seed():
    t = convex_table([4, 6], 20)
    K = ExponentSet([4, 6])
    seed = ford_weights(K)
    w, res = optimize_weights(K, t, budget=0)
    assert w is not None and dict(w.weights) == dict(seed.weights)
    assert res.phi == phi(K, seed, t).phi


def test_optimize_flat_landscape_keeps_seed():
    t = linear_table([4, 6], 20, slope=3.0)
    K = ExponentSet([4, 6])
    w, res = optimize_weights(K, t, budget=20)
    assert dict(w.weights) == dict(ford_weights(K).weights)


def _grid_oracle(K, table, step=1e-3):
    """Brute-force min of phi over u_4 on the line u_4 + u_6 = 1."""
    best = math.inf
    smax = max(s for _, s in table.entries)
    for u in np.arange(step, 1, step):
        a = {K.members[0]: 1 / u, K.members[1]: 1 / (1 - u)}
        if any(v > smax or v < 1 for v in a.values()):
            continue
        try:
            best = min(best, phi(K, HolderAssignment(a), table).phi)
        except (CoverageError, ValueError):
            continue
    return best


def test_optimize_matches_grid_oracle_on_convex_table():
    t = convex_table([4, 6], 20)
    K = ExponentSet([4, 6])
    seed_phi = phi(K, ford_weights(K), t).phi
    w, res = optimize_weights(K, t, budget=50)
    oracle = _grid_oracle(K, t)
    assert res.phi <= seed_phi + 1e-12
    assert res.phi <= oracle + 1e-6
    assert abs(sum(1 / a for a in w.weights.values()) - 1) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(2, 15).map(lambda j: 2 * j), min_size=2, max_size=5, unique=True))
def test_optimize_never_worse_than_seed(ks):
    K = ExponentSet(sorted(ks))
    t = convex_table(K.members, 40)
    seed_phi = phi(K, ford_weights(K), t).phi
    _, res = optimize_weights(K, t, budget=5)
    assert res.phi <= seed_phi + 1e-12


def test_optimize_with_powers_uses_generalised_phi():
    t = linear_table([4, 6], 40, slope=2.0)
    K = ExponentSet([4, 6])
    powers = {4: 3, 6: 4}
    w = ford_weights(K, powers)
    assert sum(1 / Fraction(a) for a in w.weights.values()) == 1
    res = phi(K, w, t, powers)
    # lambda(k, p a) = 2 p a, so each term is 2 p / k and phi = 0
    assert res.phi == pytest.approx(0.0, abs=1e-12)


def test_mixed_phi_singleton():
    nu = NuTable({(2, 8): ((0.5, 1.0, 2.0), (3.0, 5.0, 9.0))})
    res = mixed_phi(2, ExponentSet([8]), nu)
    assert res.weights == (1.0,)
    assert res.phi == pytest.approx(5.0 / 8)


def test_mixed_phi_constant_nu_picks_cheaper_endpoint():
    grid = (tuple(np.linspace(1.0, 1000.0, 200)), tuple([2.0] * 200))
    nu = NuTable({(2, 8): grid, (2, 10): grid})
    res = mixed_phi(2, ExponentSet([8, 10]), nu)
    assert res.phi == pytest.approx(min(2.0 / 8, 2.0 / 10), abs=1e-9)
    assert res.weights[1] == pytest.approx(1.0, abs=1e-9)


def test_mixed_phi_matches_simplex_oracle():
    xs = tuple(np.linspace(1.0, 50.0, 99))
    nu = NuTable({
        (2, 8): (xs, tuple(4 + 0.3 * x for x in xs)),
        (2, 12): (xs, tuple(6 + 0.5 * x for x in xs)),
    })
    S = ExponentSet([8, 12])
    res = mixed_phi(2, S, nu)
    best = math.inf
    for x in np.linspace(0.02, 0.98, 4801):
        v = x / 8 * (4 + 0.3 / x) + (1 - x) / 12 * (6 + 0.5 / (1 - x))
        best = min(best, v)
    assert res.phi <= best + 1e-9


def test_mixed_phi_bad_resolution():
    nu = NuTable({(2, 8): ((1.0,), (1.0,))})
    with pytest.raises(ValueError, match="grid"):
        mixed_phi(2, ExponentSet([8]), nu, resolution=2.0)


def test_mixed_phi_no_coverage():
    nu = NuTable({(2, 8): ((1.0,), (1.0,))})
    with pytest.raises(CoverageError):
        mixed_phi(4, ExponentSet([8]), nu)
