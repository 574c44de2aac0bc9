import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scorekit.curves import identity, power, scaled_power, xlogx
from scorekit.errors import ConfigError, DomainError
from scorekit.rules import (
    NEG_INF,
    baseline,
    bregman_rule,
    brier_rule,
    entropy,
    entropy_rule,
    equivalence_fit,
    eval_expected,
    grad_p,
    log_rule,
    power_rule,
    rebase,
)
from scorekit.simplex import tangent_basis, uniform

from oracles import builtin_rules, fd_tangent_gradient, interior, rel_err

RULES = builtin_rules()


def test_log_rule_examples():
    rule = log_rule()
    assert rule.score([0.5, 0.5], [1, 0]) == pytest.approx(-0.693147, abs=1e-6)
    assert rule.score([0.5, 0.5], [0.5, 0.5]) == pytest.approx(-math.log(2))
    assert rule.score([0.0, 1.0], [1, 0]) == NEG_INF
    # a zero forecast on an unobserved outcome is fine
    assert rule.score([0.0, 1.0], [0, 1]) == 0.0


def test_bregman_and_power_examples():
    half_square = bregman_rule(scaled_power(2, 2))
    assert half_square.score([0.5, 0.5], [1, 0]) == pytest.approx(0.25)
    assert power_rule(2).score([0.5, 0.5], [1, 0]) == pytest.approx(0.25)
    r = np.array([0.2, 0.3, 0.5])
    assert half_square.score(r, r) == pytest.approx(np.sum(r**2 / 2))


@pytest.mark.parametrize("beta", [1, 0.5, -2])
def test_power_rule_needs_beta_above_one(beta):
    with pytest.raises(ConfigError):
        power_rule(beta)
    power_rule(1.5)


def test_bregman_rejects_non_convex_generator():
    with pytest.raises(ConfigError):
        bregman_rule(identity())
    with pytest.raises(ConfigError):
        bregman_rule(power(0.5))


def test_expected_and_entropy_examples():
    assert eval_expected(log_rule(), uniform(2)) == pytest.approx(-math.log(2))
    for m in (2, 3, 5):
        assert eval_expected(power_rule(2), uniform(m)) == pytest.approx(1 / (2 * m))
    assert entropy(log_rule(), uniform(2)) == pytest.approx(math.log(2))
    assert entropy(log_rule(), [1.0, 0.0]) == 0.0
    assert entropy(power_rule(2), uniform(2)) == pytest.approx(-0.25)


def test_expected_rejects_points_off_the_cone():
    with pytest.raises(DomainError):
        eval_expected(log_rule(), [-0.5, 1.5])
    with pytest.raises(DomainError):
        eval_expected(brier_rule(), [0.0, 0.0])


def test_grad_p_examples():
    np.testing.assert_allclose(grad_p(log_rule(), [0.5, 0.5], [1, 0]), [1, -1])
    with pytest.raises(DomainError):
        grad_p(log_rule(), [1.0, 0.0], [1, 0])


@pytest.mark.parametrize("name", sorted(RULES))
@pytest.mark.parametrize("m", [2, 3, 5])
def test_rule_invariants(name, m, rng):
    rule = RULES[name]
    basis = tangent_basis(m)
    for _ in range(20):
        p, r1, r2 = interior(rng, m, 3)
        a = rng.uniform()
        mix = a * rule.score(p, r1) + (1 - a) * rule.score(p, r2)
        assert rule.score(p, a * r1 + (1 - a) * r2) == pytest.approx(mix, abs=1e-10)
        assert rule.score(3.7 * p, r1) == pytest.approx(rule.score(p, r1), abs=1e-10)
        g = rule.grad_p(p, r1)
        assert abs(g.sum()) < 1e-10
        np.testing.assert_allclose(rule.grad_p(r1, r1), 0, atol=1e-8)
        fd = fd_tangent_gradient(lambda x: rule.score(x, r1), p, basis)
        assert rel_err(basis.T @ g, fd) <= 1e-6


@pytest.mark.parametrize("name", sorted(RULES))
def test_expected_gradient_is_score_vector(name, rng):
    rule = RULES[name]
    for _ in range(5):
        p = interior(rng, 4)
        fd = np.array([
            (rule.expected(p + h) - rule.expected(p - h)) / 2e-6 for h in np.eye(4) * 1e-6
        ])
        assert rel_err(rule.grad_expected(p), fd) <= 1e-6


def test_boundary_handling_per_rule():
    p, r = np.array([0.0, 0.4, 0.6]), np.array([0.0, 0.5, 0.5])
    for name in ("power2", "power3", "brier"):
        assert math.isfinite(RULES[name].score(p, r))
    # unobserved zero outcome is harmless, an observed one is fatal
    assert math.isfinite(RULES["log"].score(p, r))
    assert RULES["log"].score(p, [0.1, 0.4, 0.5]) == NEG_INF


def test_scores_vector_uses_sentinel():
    s = log_rule().scores([0.0, 1.0])
    assert s[0] == NEG_INF and s[1] == 0.0


@pytest.mark.parametrize("m", [2, 3, 5])
@pytest.mark.parametrize("name", ["log", "power1.5", "power2", "power3", "brier"])
def test_baseline_is_uniform(name, m):
    np.testing.assert_allclose(baseline(RULES[name], m).weights, np.full(m, 1 / m), atol=1e-8)


def grid_argmin(S, lo, hi, step):
    best, arg = math.inf, None
    for a in np.arange(lo[0], hi[0], step):
        for b in np.arange(lo[1], hi[1], step):
            if a <= 0 or b <= 0 or a + b >= 1:
                continue
            value = S([a, b, 1 - a - b])
            if value < best:
                best, arg = value, np.array([a, b])
    return arg


def test_power_baseline_matches_grid_search():
    S = power_rule(3).expected
    coarse = grid_argmin(S, (0.01, 0.01), (1, 1), 0.01)
    step = 1e-3
    arg = grid_argmin(S, coarse - 0.02, coarse + 0.02, step)
    np.testing.assert_allclose(arg, [1 / 3, 1 / 3], atol=step)
    np.testing.assert_allclose(baseline(power_rule(3), 3).weights[:2], arg, atol=step)


def test_rebase_examples(rng):
    q = [0.2, 0.8]
    np.testing.assert_allclose(baseline(rebase(power_rule(2), q)).weights, q, atol=1e-6)
    np.testing.assert_allclose(baseline(rebase(log_rule(), [0.3, 0.7])).weights, [0.3, 0.7], atol=1e-6)
    rb = rebase(log_rule(), [0.2, 0.3, 0.5])
    for r in interior(rng, 3, 5):
        assert rb.score([0.2, 0.3, 0.5], r) == pytest.approx(0, abs=1e-14)
    with pytest.raises(DomainError):
        rebase(log_rule(), [1.0, 0.0])


def test_baseline_needs_outcome_count():
    with pytest.raises(DomainError):
        baseline(log_rule())


def test_baseline_on_boundary_raises():
    # adding -<c, r> keeps the rule proper; with c = e_1 the entropy peaks at a vertex
    base = power_rule(2)

    class Tilted(type(base)):
        def score_vector(self, p):
            return super().score_vector(p) - np.eye(p.size)[0]

    with pytest.raises(DomainError):
        baseline(Tilted(base.gt), 3)


def test_equivalence_examples(rng):
    w = equivalence_fit(log_rule(), log_rule(), 3)
    assert w.a == pytest.approx(1) and np.allclose(w.b, 0, atol=1e-10)
    w = equivalence_fit(brier_rule(), power_rule(2), 3)
    assert w.a == pytest.approx(2, abs=1e-10)
    np.testing.assert_allclose(w.b, -0.5, atol=1e-10)
    assert w.residual <= 1e-10
    assert equivalence_fit(log_rule(), power_rule(2), 3) is None
    w = equivalence_fit(log_rule(), entropy_rule(), 3)
    assert w.a == pytest.approx(1, abs=1e-10) and w.residual <= 1e-10
    np.testing.assert_allclose(w.b, w.b[0], atol=1e-10)


def test_rebase_witness_is_per_outcome_offset(rng):
    q = interior(rng, 3)
    rule = power_rule(3)
    w = equivalence_fit(rebase(rule, q), rule, 3)
    assert w.a == pytest.approx(1, abs=1e-10)
    np.testing.assert_allclose(w.b, -rule.scores(q), atol=1e-10)


def test_rule_specs_round_trip():
    from scorekit.specs import rule_from_spec

    for rule in list(RULES.values()) + [rebase(log_rule(), [0.3, 0.7])]:
        again = rule_from_spec(rule.to_spec())
        p = np.array([0.3, 0.7]) if rule.m is None else np.array([0.4, 0.6])
        assert again.score(p, [1, 0]) == rule.score(p, [1, 0])


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from(sorted(RULES)),
    st.integers(2, 5),
    st.integers(0, 2**32 - 1),
)
def test_propriety_property(name, m, seed):
    rule = RULES[name]
    p, r = interior(np.random.default_rng(seed), m, 2)
    gap = rule.score(r, r) - rule.score(p, r)
    assert gap >= -1e-12
    if np.max(np.abs(p - r)) > 1e-3:
        assert gap > 1e-10
