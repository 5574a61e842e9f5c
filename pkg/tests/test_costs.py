import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sarnet import CostTable, EpidemicState, ValidationError, cost_curve, simulate
from sarnet.costs import default_cost_table, default_cost_text, dump_cost_table, load_cost_table
from sarnet.dynamics import SarParameters, Trajectory

S, A, R = EpidemicState


def traj_from(values, times=None):
    values = np.asarray(values, dtype=float)
    m = values.shape[2]
    times = np.arange(values.shape[0], dtype=float) if times is None else times
    p = SarParameters(lam=np.zeros((m, m)), rho=np.zeros((m, m)), b=np.zeros(m), c=np.zeros(m),
                      beta=np.zeros(m), gamma=np.zeros(m), eta=np.zeros(m), population=1.0)
    return Trajectory(times, values, p, 1.0)


class TestTable:
    @pytest.mark.parametrize(
        "network, i, st_, value",
        [("Facebook", 1, "Susceptible", 5), ("Public safety", 2, "Attacked", 255), ("Skype", 4, "Attacked", 0)],
    )
    def test_default_lookups(self, network, i, st_, value):
        assert default_cost_table().lookup(network, i, st_) == value

    def test_round_trip_is_byte_exact(self):
        assert dump_cost_table(default_cost_table()) == default_cost_text()

    def test_missing_triple(self):
        text = default_cost_text().replace(", Removed: 70}", "}", 1)
        with pytest.raises(ValidationError, match=r"Public safety, set 1, Removed"):
            load_cost_table(text)

    def test_missing_set(self):
        doc = "networks:\n  X:\n    1: {Susceptible: 1, Attacked: 1, Removed: 1}\n  Y:\n    2: {Susceptible: 1, Attacked: 1, Removed: 1}\n"
        with pytest.raises(ValidationError, match="missing costs"):
            load_cost_table(doc)

    def test_negative(self):
        with pytest.raises(ValidationError, match="non-negative"):
            load_cost_table("networks:\n  X:\n    1: {Susceptible: -1, Attacked: 1, Removed: 1}\n")

    def test_unknown_state(self):
        with pytest.raises(ValidationError, match="unknown states"):
            load_cost_table("networks:\n  X:\n    1: {Susceptible: 1, Attacked: 1, Removed: 1, Dead: 2}\n")

    def test_floats_round_trip(self):
        table = CostTable(("A net",), np.array([[[1.5, 2.0, 0.25]]]))
        assert load_cost_table(dump_cost_table(table)) == table


class TestCurve:
    def test_zero_trajectory(self):
        curve = cost_curve(traj_from(np.zeros((5, 3, 4))), default_cost_table(), S)
        assert all(np.all(v == 0) for v in curve.value.values())

    def test_single_set_constant(self):
        table = CostTable(("Public safety",), np.array([[[110.0, 210.0, 70.0]]]))
        values = np.zeros((6, 3, 1))
        values[:, 0, 0] = 40.0
        curve = cost_curve(traj_from(values), table, "Susceptible")
        np.testing.assert_allclose(curve.value["Public safety"], 110.0)

    def test_set_mismatch(self):
        with pytest.raises(ValidationError, match="4 sets"):
            cost_curve(traj_from(np.ones((2, 3, 2))), default_cost_table(), S)

    def test_weighted_sum(self):
        values = np.zeros((1, 3, 4))
        values[0, 1] = [1, 2, 3, 4]
        values[0, 0, 0] = 10
        curve = cost_curve(traj_from(values), default_cost_table(), A)
        assert curve.value["Facebook"][0] == pytest.approx((55 + 2 * 65 + 3 * 40 + 0) / 20)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from(list(EpidemicState)))
    def test_dominance(self, seed, which):
        rng = np.random.default_rng(seed)
        low = rng.uniform(0, 100, (4, 3))
        high = low + rng.uniform(0, 50, (4, 3))
        table = CostTable(("low", "high"), np.stack([low, high]))
        traj = traj_from(rng.uniform(0, 50, (20, 3, 4)))
        curve = cost_curve(traj, table, which)
        assert np.all(curve.value["high"] >= curve.value["low"])

    def test_tail_bound(self, baseline):
        traj = simulate(baseline.params, baseline.initial, 0.01, 500)
        table = default_cost_table()
        total = traj.totals[0]
        for which in (S, A):
            curve = cost_curve(traj, table, which)
            bound = table.cost.max() * traj.values[-1, int(which)].sum() / total
            for v in curve.value.values():
                assert v[-1] <= bound + 1e-12

    def test_removed_curves_non_decreasing(self, baseline):
        traj = simulate(baseline.params, baseline.initial, 0.01, 500)
        curve = cost_curve(traj, default_cost_table(), R)
        for v in curve.value.values():
            assert np.all(np.diff(v) >= -1e-12)
            assert v[-1] > 0
