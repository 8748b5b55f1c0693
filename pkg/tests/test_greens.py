"""Two-branch kernel, companion kernel, singular quadrature weights, G*."""

import numpy as np
import pytest

from fracbvp import (
    DomainError,
    Grid,
    ProblemParams,
    SingularityError,
    companion_eval,
    companion_row_weights,
    companion_weight_matrix,
    gamma,
    green_eval,
    green_row_weights,
    green_weight_matrix,
    gstar,
    gstar_coarse_bound,
)
from fracbvp.greens import green_branch_value

# frozen from a sign-change-exact evaluation at n = 2049, m = 513, cross
# checked against a 400000-point midpoint rule (agreement 5.4e-10)
EXAMPLE_GSTAR = 0.5527021926126314


def _random_params(rng):
    return ProblemParams(
        float(rng.uniform(1.05, 2.0)),
        float(rng.uniform(0.05, 0.95)),
        float(rng.uniform(0.05, 0.95)),
    )


def test_params_validation():
    for alpha, beta, xi in (
        (1.0, 0.5, 0.5),
        (2.1, 0.5, 0.5),
        (1.5, 0.0, 0.5),
        (1.5, 1.0, 0.5),
        (1.5, 0.5, 0.0),
        (1.5, 0.5, 1.0),
    ):
        with pytest.raises(DomainError):
            ProblemParams(alpha, beta, xi)
    ProblemParams(2.0, 0.99, 0.01)  # boundary alpha = 2 is allowed


def test_branches_agree_on_the_diagonal(example_params):
    rng = np.random.default_rng(11)
    for _ in range(50):
        p = _random_params(rng)
        t = float(rng.uniform(0.0, 1.0))
        a = green_branch_value(p, t, t, left=True)
        b = green_branch_value(p, t, t, left=False)
        assert abs(a - b) <= 1e-12


def test_green_spot_values(example_params):
    p = example_params
    # closed forms for alpha=3/2, beta=xi=1/2
    want_10 = 2.0 / gamma(1.5) - 2.0 * gamma(1.5)
    assert abs(green_eval(p, 1.0, 0.0) - want_10) <= 1e-12
    assert abs(green_eval(p, 1.0, 0.0) - 0.484302) <= 1e-5
    want_00 = 1.0 / gamma(1.5) - gamma(1.5)
    assert abs(green_eval(p, 0.0, 0.0) - want_00) <= 1e-12
    assert abs(green_eval(p, 0.0, 0.0) - 0.242152) <= 1e-5
    # limit toward s = 1 at t = 0; the tail exponent vanishes here
    assert abs(green_eval(p, 0.0, 1.0 - 1e-14) + gamma(1.5)) <= 1e-6


def test_green_singularity_and_domain():
    smooth = ProblemParams(1.5, 0.5, 0.5)  # alpha - beta = 1: bounded at s = 1
    green_eval(smooth, 0.3, 1.0)
    singular = ProblemParams(1.6, 0.7, 0.5)  # alpha - beta < 1
    with pytest.raises(SingularityError):
        green_eval(singular, 0.3, 1.0)
    with pytest.raises(DomainError):
        green_eval(smooth, -0.1, 0.5)
    with pytest.raises(DomainError):
        green_eval(smooth, 0.5, 1.2)


def test_kernel_ratio_identity():
    # G(0, s) = xi G(1, s) pointwise; this is what makes u(0) = xi u(1)
    # hold for every forcing
    rng = np.random.default_rng(23)
    for _ in range(20):
        p = _random_params(rng)
        s = float(rng.uniform(0.0, 0.999))
        lhs = green_eval(p, 0.0, s)
        rhs = p.xi * green_eval(p, 1.0, s)
        assert abs(lhs - rhs) <= 1e-12 * (1.0 + abs(rhs))


def test_companion_vanishes_at_origin():
    rng = np.random.default_rng(31)
    for _ in range(20):
        p = _random_params(rng)
        if p.alpha == 2.0:
            continue
        s = float(rng.uniform(0.0, 1.0))
        assert companion_eval(p, 0.0, s) == 0.0


def test_companion_spot_values(example_params):
    # theta identity makes H(1, s) vanish when alpha - beta = 1
    for s in (0.0, 0.25, 0.5, 0.9):
        assert abs(companion_eval(example_params, 1.0, s)) <= 1e-12
    p2 = ProblemParams(2.0, 0.5, 0.5)
    assert abs(companion_eval(p2, 0.3, 0.6) + np.sqrt(0.4)) <= 1e-12


def test_row_weights_match_midpoint_rule(example_params):
    # independent check of the product-integration weights on one row:
    # a dense midpoint rule applied to kernel times hat interpolant
    rng = np.random.default_rng(41)
    g = Grid(65)
    y = rng.uniform(-1.0, 1.0, size=65)
    i = 40
    t = g.nodes[i]
    ns = 1024 * 1024  # multiple of 64 so cells never straddle grid nodes
    s = (np.arange(ns) + 0.5) / ns
    yy = np.interp(s, g.nodes, y)
    kern = np.where(
        s <= t,
        green_branch_value(example_params, t, s, left=True),
        green_branch_value(example_params, t, s, left=False),
    )
    brute = float(np.sum(kern * yy) / ns)
    quad = green_row_weights(example_params, g, i).apply(y)
    assert abs(quad - brute) <= 1e-8

    comp = np.where(s <= t, 1.0, 0.0) - t**0.5 * np.ones(ns)
    brute_h = float(np.sum(comp * yy) / ns)
    quad_h = companion_row_weights(example_params, g, i).apply(y)
    assert abs(quad_h - brute_h) <= 1e-10


def test_weight_matrices_match_rows(example_params):
    g = Grid(129)
    gm = green_weight_matrix(example_params, g)
    hm = companion_weight_matrix(example_params, g)
    for i in (0, 1, 64, 128):
        np.testing.assert_allclose(gm[i], green_row_weights(example_params, g, i).weights, atol=1e-15)
        np.testing.assert_allclose(hm[i], companion_row_weights(example_params, g, i).weights, atol=1e-15)


def test_constant_forcing_closed_form(example_params):
    # u(t) = t^{3/2}/Gamma(5/2) + 1/Gamma(5/2) - Gamma(3/2)(t+1), v(t) = t - sqrt(t)
    g = Grid(513)
    ones = np.ones(513)
    u = green_weight_matrix(example_params, g) @ ones
    v = companion_weight_matrix(example_params, g) @ ones
    want_u = g.nodes**1.5 / gamma(2.5) + 1.0 / gamma(2.5) - gamma(1.5) * (g.nodes + 1.0)
    assert np.max(np.abs(u - want_u)) <= 1e-12
    assert np.max(np.abs(v - (g.nodes - np.sqrt(g.nodes)))) <= 1e-12
    assert abs(u[0] - 0.5 * u[-1]) <= 1e-15
    assert v[0] == 0.0


def test_gstar_example_value(example_params):
    got = gstar(example_params, n=2049, m=513)
    assert abs(got - EXAMPLE_GSTAR) <= 1e-9


def test_gstar_stable_under_refinement(example_params):
    a = gstar(example_params, n=1025, m=129)
    b = gstar(example_params, n=2049, m=129)
    assert abs(a - b) <= 1e-9


def test_gstar_matches_midpoint_scan():
    # same t scan, integral by midpoint rule instead of exact pieces
    def brute(p, m, ns):
        s = (np.arange(ns) + 0.5) / ns
        best = 0.0
        for t in np.linspace(0.0, 1.0, m):
            vals = np.where(
                s <= t,
                green_branch_value(p, float(t), s, left=True),
                green_branch_value(p, float(t), s, left=False),
            )
            best = max(best, float(np.abs(vals).sum() / ns))
        return best

    for p in (ProblemParams(1.5, 0.5, 0.5), ProblemParams(2.0, 0.5, 0.5)):
        got = gstar(p, n=2049, m=17)
        ref = brute(p, 17, 100_000)
        assert abs(got - ref) <= 1e-6


def test_gstar_domain_checks(example_params):
    with pytest.raises(DomainError):
        gstar(example_params, n=1, m=17)
    with pytest.raises(DomainError):
        gstar(example_params, n=65, m=1)


def test_gstar_thread_pool_agrees(example_params, monkeypatch):
    serial = gstar(example_params, n=257, m=17)
    monkeypatch.setenv("FRACBVP_THREADS", "2")
    pooled = gstar(example_params, n=257, m=17)
    assert pooled == serial
    monkeypatch.setenv("FRACBVP_THREADS", "0")  # auto
    assert gstar(example_params, n=257, m=17) == serial
    monkeypatch.setenv("FRACBVP_THREADS", "many")
    with pytest.raises(DomainError):
        gstar(example_params, n=257, m=17)
    monkeypatch.setenv("FRACBVP_THREADS", "-1")
    with pytest.raises(DomainError):
        gstar(example_params, n=257, m=17)


def test_coarse_bound_value(example_params):
    # [1/Gamma(a+1) + Gamma(2-b)/Gamma(a-b+1)] / (1-xi) at the example
    want = (1.0 / gamma(2.5) + gamma(1.5) / gamma(2.0)) / 0.5
    got = gstar_coarse_bound(example_params)
    assert abs(got - want) <= 1e-12
    assert abs(got - 3.2769594070328654) <= 1e-12


def test_coarse_bound_dominates_computed_value(example_params):
    assert gstar_coarse_bound(example_params) >= EXAMPLE_GSTAR
    rng = np.random.default_rng(59)
    for _ in range(5):
        p = _random_params(rng)
        assert gstar_coarse_bound(p) >= gstar(p, n=513, m=33) - 1e-9
