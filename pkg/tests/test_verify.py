import numpy as np
import pytest

from napverify.lp import GE, LinearConstraint
from napverify.model import Layer, Network
from napverify.nap import Nap, follows
from napverify.verify import (
    ACTIVE,
    INACTIVE,
    Bounds,
    PhaseAssignment,
    Region,
    SearchConfig,
    VariableLayout,
    branch,
    encode_phase_constraints,
    propagate_bounds,
    verify_query,
)
from oracles import enumeration_status, random_network, random_query


def attack(i, j):
    return [LinearConstraint({j: 1.0, i: -1.0}, GE, 0.0)]


class TestRegion:
    def test_clipping_records_requested_bounds(self):
        r = Region.box_around([0.06, 0.06], 0.9)
        assert np.allclose(r.lower, [0.0, 0.0]) and np.allclose(r.upper, [0.96, 0.96])
        assert r.pre_clip is not None

    def test_no_clip_no_record(self):
        r = Region.box_around([0.5, 0.5], 0.1)
        assert r.pre_clip is None

    def test_empty_region(self):
        r = Region(np.array([0.5]), np.array([0.4]))
        assert r.is_empty

    def test_negative_epsilon_rejected(self):
        with pytest.raises(ValueError):
            Region.box_around([0.5], -0.1)


class TestPhaseEncoding:
    def test_fixed_active(self, xnet):
        layout = VariableLayout(xnet)
        asg = PhaseAssignment.all_free(xnet).with_phase(1, ACTIVE)
        rows = encode_phase_constraints(xnet, asg, layout)
        v1, r1 = layout.pre_var(1), layout.post_var(1)
        assert len(rows) == 2
        assert rows[0].coeffs == {r1: 1.0, v1: -1.0} and rows[0].relation == "==" and rows[0].rhs == 0.0
        assert rows[1].coeffs == {v1: 1.0} and rows[1].relation == ">=" and rows[1].rhs == 0.0

    def test_fixed_inactive(self, xnet):
        layout = VariableLayout(xnet)
        asg = PhaseAssignment.all_free(xnet).with_phase(2, INACTIVE)
        rows = encode_phase_constraints(xnet, asg, layout)
        v2, r2 = layout.pre_var(2), layout.post_var(2)
        assert rows[0].coeffs == {r2: 1.0} and rows[0].relation == "==" and rows[0].rhs == 0.0
        assert rows[1].coeffs == {v2: 1.0} and rows[1].relation == "<="

    def test_all_free_is_empty(self, xnet):
        assert encode_phase_constraints(xnet, PhaseAssignment.all_free(xnet)) == []


class TestPropagateBounds:
    def test_xnet_small_box(self, xnet):
        region = Region(np.array([0.02, 0.02]), np.array([0.1, 0.1]))
        bounds = propagate_bounds(xnet, region, PhaseAssignment.all_free(xnet))
        assert bounds is not None
        assert bounds.pre[1] == pytest.approx([-0.342, 0.354], abs=1e-12)
        assert bounds.pre[0] == pytest.approx([-0.058, -0.002], abs=1e-12)
        assert bounds.pre[2] == pytest.approx([-0.336, 0.336], abs=1e-12)

    def test_phase_contradiction_is_infeasible(self, xnet):
        region = Region(np.array([0.02, 0.02]), np.array([0.1, 0.1]))
        # v0 < 0 on the whole box, so fixing it active contradicts
        asg = PhaseAssignment.all_free(xnet).with_phase(0, ACTIVE)
        assert propagate_bounds(xnet, region, asg) is None
        # v2 > 0 on this box, so fixing it inactive contradicts
        region2 = Region(np.array([0.5, 0.1]), np.array([0.6, 0.2]))
        asg2 = PhaseAssignment.all_free(xnet).with_phase(2, INACTIVE)
        assert propagate_bounds(xnet, region2, asg2) is None

    def test_point_box_gives_point_intervals(self, xnet):
        x = np.array([0.31, 0.77])
        region = Region(x, x)
        bounds = propagate_bounds(xnet, region, PhaseAssignment.all_free(xnet))
        pres = xnet.pre_activations(x)
        assert np.allclose(bounds.pre[:, 0], pres, atol=1e-9)
        assert np.allclose(bounds.pre[:, 1], pres, atol=1e-9)
        y = xnet.forward(x)
        assert np.allclose(bounds.outputs[:, 0], y, atol=1e-9)

    def test_soundness_by_sampling(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            net = random_network(rng)
            lo = rng.uniform(0, 0.5, 2)
            hi = lo + rng.uniform(0.05, 0.5, 2)
            region = Region(lo, np.minimum(hi, 1.0))
            bounds = propagate_bounds(net, region, PhaseAssignment.all_free(net))
            for _ in range(50):
                x = rng.uniform(region.lower, region.upper)
                pres = net.pre_activations(x)
                assert np.all(pres >= bounds.pre[:, 0] - 1e-9)
                assert np.all(pres <= bounds.pre[:, 1] + 1e-9)
                y = net.forward(x)
                assert np.all(y >= bounds.outputs[:, 0] - 1e-9)
                assert np.all(y <= bounds.outputs[:, 1] + 1e-9)

    def test_inconsistent_assignment_rejected(self, xnet):
        region = Region.full_domain(2, Nap(frozenset({0}), frozenset()))
        with pytest.raises(ValueError):
            propagate_bounds(xnet, region, PhaseAssignment.all_free(xnet))


class TestBranch:
    def _bounds(self, pre):
        pre = np.array(pre, dtype=float)
        return Bounds(pre=pre, post=np.maximum(pre, 0), outputs=np.zeros((2, 2)))

    def test_picks_widest_two_sided_margin(self):
        asg = PhaseAssignment(np.zeros(3, dtype=np.int8))
        k, child_a, child_i = branch(asg, self._bounds([[-1, 2], [-3, 3], [5, 6]]))
        assert k == 1
        assert child_a.phases[1] == ACTIVE and child_i.phases[1] == INACTIVE

    def test_single_straddler(self):
        asg = PhaseAssignment(np.zeros(2, dtype=np.int8))
        k, _, _ = branch(asg, self._bounds([[1, 2], [-0.5, 0.1]]))
        assert k == 1

    def test_sign_determined_not_branched(self):
        asg = PhaseAssignment(np.zeros(1, dtype=np.int8))
        with pytest.raises(ValueError):
            branch(asg, self._bounds([[-2.0, 0.0]]))


class TestVerifyQuery:
    def test_small_ball_verified(self, xnet):
        region = Region.box_around([0.06, 0.06], 0.04)
        outcome = verify_query(xnet, region, attack(0, 1))
        assert outcome.status == "verified" and not outcome.boundary

    def test_large_ball_falsified_with_valid_witness(self, xnet):
        region = Region.box_around([0.06, 0.06], 0.9)
        outcome = verify_query(xnet, region, attack(0, 1))
        assert outcome.status == "falsified"
        w = outcome.witness
        assert region.contains(w, tol=0)
        y = xnet.forward(w)
        assert y[1] - y[0] >= 0.0

    def test_empty_region_vacuously_verified(self, xnet):
        region = Region(np.array([0.5, 0.5]), np.array([0.4, 0.6]))
        outcome = verify_query(xnet, region, attack(0, 1))
        assert outcome.status == "verified"
        assert outcome.stats.lp_calls == 0

    def test_pattern_region_falsified_respects_strict_follows(self, xnet):
        nap = Nap(frozenset({1}), frozenset({0, 2}))
        region = Region.full_domain(2, nap)
        outcome = verify_query(xnet, region, attack(1, 0))
        assert outcome.status == "falsified"
        assert follows(xnet, outcome.witness, nap)
        y = xnet.forward(outcome.witness)
        assert y[0] - y[1] >= 0.0

    def test_unsafe_must_reference_outputs(self, xnet):
        region = Region.box_around([0.5, 0.5], 0.1)
        with pytest.raises(ValueError):
            verify_query(xnet, region, [LinearConstraint({5: 1.0}, GE, 0.0)])

    def test_deterministic_with_one_worker(self, xnet):
        region = Region.box_around([0.06, 0.06], 0.9)
        a = verify_query(xnet, region, attack(0, 1), SearchConfig(seed=3))
        b = verify_query(xnet, region, attack(0, 1), SearchConfig(seed=3))
        assert a.status == b.status
        assert a.stats.branches == b.stats.branches
        assert a.stats.lp_calls == b.stats.lp_calls
        assert np.array_equal(a.witness, b.witness)

    def test_record_schema(self, xnet):
        region = Region.box_around([0.06, 0.06], 0.9)
        record = verify_query(xnet, region, attack(0, 1)).to_record()
        assert set(record) == {"outcome", "witness", "boundary", "stats"}
        assert {"branches", "lp_calls", "time_ms"} <= set(record["stats"])
        assert "pre_clip" in record["stats"]  # the requested ball left the domain

    def test_timeout_reports_unknown(self, xnet):
        region = Region.box_around([0.5, 0.5], 0.5)
        outcome = verify_query(xnet, region, attack(0, 1), SearchConfig(timeout_s=0.0))
        assert outcome.status == "unknown" and outcome.reason == "timeout"

    def test_zero_hidden_network_verified(self):
        net = Network("lin", 1, (Layer([[1.0], [-1.0]], [0.0, 0.0], "linear"),))
        region = Region(np.array([0.2]), np.array([0.8]))
        # y1 - y0 = -2x, negative on the whole box
        outcome = verify_query(net, region, attack(0, 1))
        assert outcome.status == "verified"

    def test_zero_hidden_network_falsified(self):
        net = Network("lin", 1, (Layer([[1.0], [-1.0]], [0.0, 0.0], "linear"),))
        region = Region(np.array([-0.5]), np.array([0.5]))
        outcome = verify_query(net, region, attack(0, 1))
        assert outcome.status == "falsified" and outcome.witness[0] <= 0.0

    def test_lp_instability_reports_unknown(self, xnet, monkeypatch):
        import napverify.verify as verify_mod
        from napverify.lp import LpInstabilityError

        def unstable(lp, tol=None, **kwargs):
            raise LpInstabilityError("forced by test")

        monkeypatch.setattr(verify_mod, "solve_feasibility", unstable)
        region = Region.box_around([0.06, 0.06], 0.9)
        outcome = verify_query(xnet, region, attack(0, 1))
        assert outcome.status == "unknown" and outcome.reason == "lp-instability"


class TestOracleEquivalence:
    def test_random_queries_match_enumeration(self):
        rng = np.random.default_rng(314)
        statuses = {"verified": 0, "falsified": 0}
        for _ in range(12):
            net = random_network(rng, min_hidden=6, max_hidden=9)
            region, unsafe, oracle_unsafe = random_query(rng, net)
            outcome = verify_query(net, region, unsafe)
            want = enumeration_status(net, region.lower, region.upper, region.nap, oracle_unsafe)
            if outcome.status == "falsified":
                assert want == "feasible"
                ok = region.contains(outcome.witness)
                y = net.forward(outcome.witness)
                c = unsafe[0]
                lhs = sum(a * y[j] for j, a in c.coeffs.items())
                assert ok and lhs >= c.rhs
                if region.nap is not None:
                    assert follows(net, outcome.witness, region.nap)
            elif outcome.status == "verified" and not outcome.boundary:
                assert want == "infeasible"
            statuses[outcome.status] += 1
        assert statuses["verified"] > 0 and statuses["falsified"] > 0

    def test_monotone_in_region(self, xnet):
        # shrinking a verified region keeps it verified
        rng = np.random.default_rng(8)
        for _ in range(10):
            c = rng.uniform(0.2, 0.8, 2)
            big = Region.box_around(c, 0.15)
            small = Region.box_around(c, 0.05)
            big_out = verify_query(xnet, big, attack(xnet.predict(c), 1 - xnet.predict(c)))
            if big_out.status == "verified":
                small_out = verify_query(
                    xnet, small, attack(xnet.predict(c), 1 - xnet.predict(c))
                )
                assert small_out.status == "verified"


class TestParallelMode:
    def test_matches_single_worker_status(self):
        rng = np.random.default_rng(2718)
        for _ in range(6):
            net = random_network(rng, min_hidden=6, max_hidden=8)
            region, unsafe, _ = random_query(rng, net)
            a = verify_query(net, region, unsafe, SearchConfig(workers=1))
            b = verify_query(net, region, unsafe, SearchConfig(workers=4))
            assert a.status == b.status
            if b.status == "falsified":
                assert region.contains(b.witness)
