import numpy as np
import pytest

from conftest import random_polyhedral_problem, vertex_candidate
from robustmolp.efficiency import certify_weak_efficiency
from robustmolp.model import (NormBall, Polytope, Singleton, UncertainMOLP,
                              reduce_constraints, validate_problem)
from robustmolp.oracle import (refute_robust_weak_efficiency, scenario_grid,
                               verify_certificate)

V1 = Polytope(((-2, -1, -2, -6), (-1, -2, -2, -6)))
V2 = Polytope(((-1, 0, 0, -3), (0, -1, 0, -3), (0, 0, -1, -3)))
C2 = np.array([[-3.0, -1, -2], [0.0, -1, -2]])
XBAR = np.array([1.0, 1.0, 1.5])


def original_instance():
    """Rank-1 factor with a negative component: rejected by validation but
    analysable in oracle mode."""
    return UncertainMOLP(2, 3, C2, [-1.0, 1.0], [0.0, -3.0, 0.0], (V1, V2))


# ---------------------------------------------------------------------------
# scenario_grid
# ---------------------------------------------------------------------------

def test_grid_endpoints_only():
    p = original_instance()
    g = scenario_grid(p, 2)
    assert len(g) == 2
    assert np.array_equal(g[0], C2)
    assert np.array_equal(g[1], C2 + np.outer([-1.0, 1.0], [0.0, -3.0, 0.0]))


def test_grid_midpoint_matches_displayed_matrix():
    g = scenario_grid(original_instance(), 3)
    assert np.array_equal(g[1], np.array([[-3.0, 0.5, -2.0], [0.0, -2.5, -2.0]]))


def test_grid_constant_when_u_zero():
    p = UncertainMOLP(2, 3, C2, [0.0, 0.0], [0.0, -3.0, 0.0], (V1, V2))
    for C in scenario_grid(p, 5):
        assert np.array_equal(C, C2)
    with pytest.raises(ValueError):
        scenario_grid(p, 1)


# ---------------------------------------------------------------------------
# refutation search
# ---------------------------------------------------------------------------

def test_refutes_sign_violating_instance_at_midpoint():
    v = refute_robust_weak_efficiency(original_instance(), XBAR, k=3)
    assert v.outcome == "refuted"
    w = v.witness
    assert w.rho == pytest.approx(0.5)
    assert np.all(w.gap > 1e-9)
    # replay: the witness really dominates in every component
    C = C2 + 0.5 * np.outer([-1.0, 1.0], [0.0, -3.0, 0.0])
    assert np.all(C @ w.x < C @ XBAR - 1e-9)
    X = reduce_constraints(validate_problem(
        UncertainMOLP(2, 3, C2, [1.0, 0.0], [0.0, -3.0, 0.0], (V1, V2))))
    assert all(r.slack(w.x) >= -1e-9 for r in X.rows)


def test_confirms_derived_instance():
    p = UncertainMOLP(2, 3, C2, [1.0, 0.0], [0.0, -3.0, 0.0], (V1, V2))
    assert refute_robust_weak_efficiency(p, XBAR, k=5).outcome == "confirmed"


def test_confirms_zero_objective():
    p = UncertainMOLP(1, 1, [[0.0]], [0.0], [0.0], (Singleton([1.0], 0.0),))
    assert refute_robust_weak_efficiency(p, [0.5], k=2).outcome == "confirmed"


def test_inconclusive_with_concave_rows_when_no_witness():
    # strictly interior X boundary far away; certified instance stays
    # inconclusive for the oracle because sampling was needed
    p = UncertainMOLP(1, 1, [[1.0]], [0.0], [0.0],
                      (NormBall([1.0], [[1.0]], 0.5, 2, 0.0, 0.0),))
    v = refute_robust_weak_efficiency(p, [0.0], k=3)
    assert v.outcome == "inconclusive"


def test_no_false_refutations_property(rng):
    refs = 0
    for _ in range(40):
        prob = random_polyhedral_problem(rng)
        x = vertex_candidate(rng, prob)
        v = refute_robust_weak_efficiency(prob, x, k=5)
        if v.outcome != "refuted":
            continue
        refs += 1
        w = v.witness
        C = prob.C_bar + w.rho * np.outer(prob.u, prob.v)
        assert np.all(C @ w.x < C @ x - 1e-9)
        X = reduce_constraints(validate_problem(prob))
        assert all(r.slack(w.x) >= -1e-9 for r in X.rows)
    assert refs > 0


def test_grid_monotonicity(rng):
    for _ in range(25):
        prob = random_polyhedral_problem(rng)
        x = vertex_candidate(rng, prob)
        small = refute_robust_weak_efficiency(prob, x, k=3)
        big = refute_robust_weak_efficiency(prob, x, k=7)
        if small.outcome == "refuted":
            assert big.outcome == "refuted"


def test_oracle_certifier_agreement(rng):
    for _ in range(40):
        prob = random_polyhedral_problem(rng)
        vp = validate_problem(prob)
        x = vertex_candidate(rng, prob)
        out = certify_weak_efficiency(vp, x)
        v = refute_robust_weak_efficiency(prob, x, k=2)
        assert (out.status == "certified") == (v.outcome == "confirmed")


# ---------------------------------------------------------------------------
# certificate replay
# ---------------------------------------------------------------------------

def _derived_certificate():
    vp = validate_problem(
        UncertainMOLP(2, 3, C2, [1.0, 0.0], [0.0, -3.0, 0.0], (V1, V2)))
    out = certify_weak_efficiency(vp, XBAR)
    return vp, out.certificate


def test_verify_certificate_accepts_valid():
    vp, cert = _derived_certificate()
    rep = verify_certificate(vp, XBAR, cert, 1e-7)
    assert rep.ok and rep.first_failing is None


def test_verify_certificate_rejects_perturbed_lambda():
    from dataclasses import replace
    vp, cert = _derived_certificate()
    bad = replace(cert, lambda_nominal=np.array([0.7, 0.3]))
    rep = verify_certificate(vp, XBAR, bad, 1e-7)
    assert not rep.ok
    assert rep.first_failing == "endpoint_equality_nominal"
    resid = {c.name: c.residual for c in rep.checks}
    # residual is the gap between C^T(0.7, 0.3) and the multiplier sum
    assert resid["endpoint_equality_nominal"] == pytest.approx(
        np.linalg.norm(np.array([-2.1, -1.0, -2.0]) - np.array([-2.0, -1.0, -2.0])),
        abs=1e-12)


def test_verify_certificate_zero_mu_opposing_rows():
    from robustmolp.efficiency import (ConstraintMultiplier,
                                       EfficiencyCertificate)
    p = UncertainMOLP(2, 1, [[1.0], [-1.0]], [0.0, 0.0], [0.0],
                      (Singleton([1.0], -5.0),))
    vp = validate_problem(p)
    rec = ConstraintMultiplier(0.0, np.array([1.0]), -5.0, None, 0.0, 0.0)
    cert = EfficiencyCertificate(np.array([0.5, 0.5]), np.array([0.5, 0.5]),
                                 (rec,), (rec,), (), None, None, {})
    assert verify_certificate(vp, np.array([0.0]), cert, 1e-7).ok


def test_verify_certificate_rejects_scenario_outside_class():
    from dataclasses import replace
    vp, cert = _derived_certificate()
    bad_rec = replace(cert.nominal[0], scenario_a=np.array([-9.0, 0.0, 0.0]))
    bad = replace(cert, nominal=(bad_rec,) + cert.nominal[1:])
    rep = verify_certificate(vp, XBAR, bad, 1e-7)
    assert not rep.ok
    assert rep.first_failing == "scenario_membership"
