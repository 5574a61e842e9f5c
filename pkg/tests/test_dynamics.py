import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import one_set_params, state
from sarnet import (
    NegativeCompartmentWarning,
    SarParameters,
    ValidationError,
    attack_rate,
    convergence_time,
    derivatives,
    euler_step,
    simulate,
)
from sarnet.dynamics import max_stable_step, parse_selector


def loop_rhs(p, st_):
    """Term-by-term evaluation of the combined model, no vectorisation."""
    m = p.m
    ds, da, dr = np.zeros(m), np.zeros(m), np.zeros(m)
    for i in range(m):
        a_i = p.beta[i] * p.gamma[i] * p.eta[i] * st_.a[i] / p.population
        inflow_s = sum(p.lam[j, i] * st_.s[j] for j in range(m) if j != i)
        outflow_s = sum(p.lam[i, j] for j in range(m) if j != i) * st_.s[i]
        inflow_a = sum(p.rho[j, i] * st_.a[j] for j in range(m) if j != i)
        outflow_a = sum(p.rho[i, j] for j in range(m) if j != i) * st_.a[i]
        ds[i] = -a_i * st_.s[i] + inflow_s - outflow_s - p.b[i] * st_.s[i]
        da[i] = a_i * st_.s[i] + inflow_a - outflow_a - p.c[i] * st_.a[i]
        dr[i] = p.b[i] * st_.s[i] + p.c[i] * st_.a[i]
    return ds, da, dr


@st.composite
def models(draw, max_m=6):
    m = draw(st.integers(1, max_m))
    rate = st.floats(0, 0.2)
    mat = lambda: draw(arrays(float, (m, m), elements=rate)) * (1 - np.eye(m))  # noqa: E731
    vec = lambda hi=1.0: draw(arrays(float, m, elements=st.floats(0, hi)))  # noqa: E731
    s, a, r = vec(100), vec(100), vec(100)
    total = s.sum() + a.sum() + r.sum()
    params = SarParameters(
        lam=mat(), rho=mat(), b=vec(0.2), c=vec(0.2), beta=vec(), gamma=vec(), eta=vec(),
        population=max(total, 1.0),
    )
    return params, state(s, a, r)


class TestAttackRate:
    def test_unit(self):
        p = one_set_params()
        assert attack_rate(p, state(10, 5, 0), 1) == pytest.approx(1 / 3, rel=1e-15)

    def test_no_attacked(self):
        assert attack_rate(one_set_params(), state(10, 0, 0), 1) == 0.0

    def test_bundled_set1(self, baseline):
        value = attack_rate(baseline.params, baseline.initial, 1)
        assert value == pytest.approx(0.11 * 0.4 * 0.4 * 10 / 193, rel=1e-14)
        assert value == pytest.approx(9.1192e-4, abs=5e-9)

    @pytest.mark.parametrize("i", [0, 5, 1.0])
    def test_index_range(self, baseline, i):
        with pytest.raises(ValidationError):
            attack_rate(baseline.params, baseline.initial, i)


class TestDerivatives:
    def test_single_set_example(self):
        p = one_set_params(c=[0.1])
        ds, da, dr = derivatives(p, state(10, 5, 0))
        assert ds[0] == pytest.approx(-10 / 3, rel=1e-14)
        assert da[0] == pytest.approx(10 / 3 - 0.5, rel=1e-14)
        assert dr[0] == pytest.approx(0.5, rel=1e-14)

    def test_zero_rates(self):
        p = one_set_params(beta=[0.0])
        for d in derivatives(p, state(10, 5, 3)):
            assert np.all(d == 0)

    def test_bundled_sums_to_zero(self, baseline):
        ds, da, dr = derivatives(baseline.params, baseline.initial)
        assert abs(ds.sum() + da.sum() + dr.sum()) < 1e-14

    def test_dimension_mismatch(self, baseline):
        with pytest.raises(ValidationError, match="sets"):
            derivatives(baseline.params, state([1, 2], [0, 0], [0, 0]))

    @settings(max_examples=200, deadline=None)
    @given(models())
    def test_matches_loop_oracle(self, model):
        p, s0 = model
        for got, want in zip(derivatives(p, s0), loop_rhs(p, s0)):
            np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)


class TestEulerStep:
    def test_single_set_example(self):
        nxt = euler_step(one_set_params(c=[0.1]), state(10, 5, 0), 0.1)
        assert nxt.s[0] == pytest.approx(9.66667, abs=1e-5)
        assert nxt.a[0] == pytest.approx(5.28333, abs=1e-5)
        assert nxt.r[0] == pytest.approx(0.05, abs=1e-5)
        assert nxt.time == pytest.approx(0.1)

    def test_zero_rates(self):
        start = state([1, 2], [3, 4], [5, 6], t=2.0)
        p = SarParameters(
            lam=np.zeros((2, 2)), rho=np.zeros((2, 2)), b=[0, 0], c=[0, 0],
            beta=[0, 0], gamma=[1, 1], eta=[1, 1], population=21,
        )
        nxt = euler_step(p, start, 7.5)
        assert np.array_equal(nxt.as_array(), start.as_array())
        assert nxt.time == 9.5

    @pytest.mark.parametrize("h", [0, -0.1])
    def test_bad_step(self, h):
        with pytest.raises(ValidationError):
            euler_step(one_set_params(), state(1, 1, 1), h)

    @settings(max_examples=200, deadline=None)
    @given(models(), st.floats(1e-4, 1.0))
    def test_conserves_total(self, model, h):
        p, s0 = model
        nxt = euler_step(p, s0, h)
        assert nxt.total == pytest.approx(s0.total, rel=1e-12, abs=1e-9)


class TestSimulate:
    def test_shapes_and_grid(self, baseline):
        traj = simulate(baseline.params, baseline.initial, 0.5, 10.0)
        assert len(traj) == 21
        assert traj.values.shape == (21, 3, 4)
        np.testing.assert_allclose(np.diff(traj.times), 0.5)
        assert traj.state(0) == baseline.initial

    def test_step_count_floors(self, baseline):
        assert len(simulate(baseline.params, baseline.initial, 0.3, 1.0)) == 4
        assert len(simulate(baseline.params, baseline.initial, 0.01, 1.0)) == 101

    def test_matches_repeated_euler(self, baseline):
        traj = simulate(baseline.params, baseline.initial, 0.25, 5.0)
        st_ = baseline.initial
        for k in range(1, len(traj)):
            st_ = euler_step(baseline.params, st_, 0.25)
            np.testing.assert_array_equal(traj.values[k], np.stack([st_.s, st_.a, st_.r]))

    def test_zero_rates_constant(self):
        p = one_set_params(beta=[0.0])
        traj = simulate(p, state(10, 5, 0), 0.1, 3.0)
        assert np.all(traj.values == traj.values[0])

    def test_horizon_shorter_than_step(self, baseline):
        with pytest.raises(ValidationError, match="horizon"):
            simulate(baseline.params, baseline.initial, 1.0, 0.5)

    def test_large_step_warns(self, baseline):
        with pytest.warns(NegativeCompartmentWarning, match="reduce the step"):
            simulate(baseline.params, baseline.initial, 30.0, 300.0)

    def test_overflow_warns(self, baseline):
        p = baseline.params.replace(eta=baseline.params.eta * 300)
        with pytest.warns(NegativeCompartmentWarning, match="overflowed"):
            simulate(p, baseline.initial, 30.0, 3000.0)

    def test_deterministic(self, baseline):
        a = simulate(baseline.params, baseline.initial, 0.01, 50.0)
        b = simulate(baseline.params, baseline.initial, 0.01, 50.0)
        assert a.values.tobytes() == b.values.tobytes()

    @settings(max_examples=40, deadline=None)
    @given(models(max_m=4), st.floats(0.01, 0.5))
    def test_conservation_along_trajectory(self, model, h):
        p, s0 = model
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NegativeCompartmentWarning)
            traj = simulate(p, s0, h, 100 * h)
        np.testing.assert_allclose(traj.totals, s0.total, rtol=1e-9, atol=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(models(max_m=4))
    def test_step_size_contract_keeps_nonnegative(self, model):
        p, s0 = model
        h = min(max_stable_step(p, s0), 1.0)
        with warnings.catch_warnings():
            warnings.simplefilter("error", NegativeCompartmentWarning)
            traj = simulate(p, s0, h, 200 * h)
        assert traj.values.min() >= -1e-9

    def test_bundled_contract(self, baseline):
        h = max_stable_step(baseline.params, baseline.initial)
        assert h >= 0.01
        traj = simulate(baseline.params, baseline.initial, 0.01, 500)
        assert traj.values.min() >= -1e-9
        assert np.all(np.diff(traj.r, axis=0) >= 0)


class TestConvergence:
    def test_zero_compartment(self):
        traj = simulate(one_set_params(), state(10, 0, 0), 0.1, 1.0)
        assert convergence_time(traj, "A1", 0.5) == 0.0

    def test_never(self):
        traj = simulate(one_set_params(beta=[0.0]), state(10, 5, 0), 0.1, 1.0)
        assert convergence_time(traj, "S1", 0.5) is None

    def test_first_crossing(self):
        # pure decay S' = -S: first sample at or below 0.5 from S0 = 1 with h=0.1 is (0.9)^k <= 0.5
        traj = simulate(one_set_params(b=[1.0], beta=[0.0]), state(1, 0, 0), 0.1, 2.0)
        k = int(np.ceil(np.log(0.5) / np.log(0.9)))
        assert convergence_time(traj, ("S", 1), 0.5) == pytest.approx(0.1 * k)

    @pytest.mark.parametrize("sel", ["X1", "S0", "S9", "S", ("S",), 3])
    def test_bad_selector(self, baseline, sel):
        traj = simulate(baseline.params, baseline.initial, 1.0, 2.0)
        with pytest.raises(ValidationError):
            convergence_time(traj, sel, 0.5)

    def test_selector_forms(self):
        assert parse_selector("a4", 4) == (1, 3)
        assert parse_selector("R_2", 4) == (2, 1)
        assert parse_selector(("s", 1), 4) == (0, 0)


class TestParameters:
    def test_negative_rejected(self):
        with pytest.raises(ValidationError, match="c_1"):
            one_set_params(c=[-0.1])

    def test_diagonal_rejected(self):
        with pytest.raises(ValidationError, match="lambda_11"):
            one_set_params(lam=[[0.1]])

    def test_caps(self):
        with pytest.raises(ValidationError, match="eta_1 .* eta_bar"):
            one_set_params(eta=[2.0], eta_bar=1.0)
        with pytest.raises(ValidationError, match="lambda_12"):
            SarParameters(
                lam=[[0, 0.5], [0, 0]], rho=np.zeros((2, 2)), b=[0, 0], c=[0, 0],
                beta=[1, 1], gamma=[1, 1], eta=[1, 1], population=1, lambda_bar=0.1,
            )

    def test_immutable(self, baseline):
        with pytest.raises(ValueError):
            baseline.params.b[0] = 1.0

    def test_equality(self, baseline):
        assert baseline.params == baseline.params.replace()
        assert baseline.params != baseline.params.replace(population=200)
