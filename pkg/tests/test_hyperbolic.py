import numpy as np
import pytest

from blowup1d import (
    NodalField,
    build_initial_grid,
    cfl_max_dt,
    compute_slopes,
    hopf_lax_oracle,
    hopf_lax_step,
    regrid,
)
from blowup1d.testing import random_cfl_dt, random_field


def hat_field(s0=1.0, n=1, peak=1.0):
    g = build_initial_grid(s0, n)
    return NodalField(g, peak * np.maximum(0.0, 1.0 - np.abs(g.nodes()) / s0))


class TestComputeSlopes:
    def test_zero_field(self):
        g = build_initial_grid(1.0, 3)
        v = compute_slopes(NodalField(g, np.zeros(g.num_nodes)))
        assert not v.slopes.any()
        assert v.sup_norm() == 0.0 and v.l1_norm() == 0.0

    def test_hat_end_slopes(self):
        v = compute_slopes(hat_field())
        assert v.slopes.tolist() == [1.0, -1.0]

    def test_ramp_difference_quotients(self):
        g = build_initial_grid(2.0, 2)  # h=1, nodes -1, 0, 1
        f = NodalField(g, [0.5, 1.0, 0.5])
        v = compute_slopes(f)
        assert v.slopes.tolist() == [0.5, 0.5, -0.5, -0.5]

    def test_end_slopes_use_end_widths(self):
        g = regrid(1.8, 1.25, 0.5)  # h_minus=0.8, h_plus=0.75
        assert g.h_minus == pytest.approx(0.8) and g.h_plus == pytest.approx(0.75)
        f = NodalField(g, [2.0, 1.0, 3.0, 1.5])
        v = compute_slopes(f)
        assert v.slopes[0] == pytest.approx(2.0 / 0.8)
        assert v.slopes[-1] == pytest.approx(-1.5 / 0.75)


class TestCflMaxDt:
    def test_unit_case(self):
        v = compute_slopes(hat_field())
        assert cfl_max_dt(v, 1.0) == 0.5

    def test_zero_slopes_give_infinity(self):
        g = build_initial_grid(1.0, 3)
        v = compute_slopes(NodalField(g, np.zeros(g.num_nodes)))
        assert cfl_max_dt(v, 1.0) == np.inf

    def test_scaled_case(self):
        g = build_initial_grid(1.0, 2)  # h = 0.5
        f = NodalField(g, [2.0, 2.0, 2.0])  # end slopes +-4
        v = compute_slopes(f)
        assert v.sup_norm() == 4.0
        assert cfl_max_dt(v, 2.0) == 0.125

    def test_rejects_nonpositive_m(self):
        v = compute_slopes(hat_field())
        with pytest.raises(ValueError):
            cfl_max_dt(v, 0.0)


class TestHopfLaxStep:
    def test_zero_field_is_fixed_point(self):
        g = build_initial_grid(1.0, 4)
        f = NodalField(g, np.zeros(g.num_nodes))
        r = hopf_lax_step(f, 0.3, 1.0)
        assert not r.field_half.values.any()
        assert r.s_minus_new == g.s_minus and r.s_plus_new == g.s_plus
        assert not (r.new_node_left or r.new_node_right)

    def test_hat_frozen_example(self):
        f = hat_field()
        r = hopf_lax_step(f, 0.5, 1.0)
        assert r.field_half.values.tolist() == [1.0]
        assert r.s_plus_new == 1.5 and r.s_minus_new == 1.5
        assert not (r.new_node_left or r.new_node_right)
        assert r.field_half.grid.n_plus == 1
        assert r.field_half.grid.h_plus == pytest.approx(1.5)

    def test_new_node_value_formula(self):
        # h_plus near 2h so a small front move inserts a node
        g = regrid(1.0, 1.9, 1.0)
        f = NodalField(g, [1.0])
        v = compute_slopes(f)
        assert v.slopes[-1] == pytest.approx(-1.0 / 1.9)
        dt = 0.4  # front moves 0.4/1.9 > 0.1, crossing x=2? s_plus: 1.9+0.21=2.11
        r = hopf_lax_step(f, dt, 1.0)
        assert r.new_node_right
        expected = (1.0 - 1.0 / 1.9) * 1.0 + dt * (1.0 / 1.9) ** 2
        assert r.field_half.values[-1] == pytest.approx(expected, rel=1e-14)
        # and it equals the variational value at the new node
        xk = r.field_half.grid.nodes()[-1]
        assert r.field_half.values[-1] == pytest.approx(
            hopf_lax_oracle(f, dt, 1.0, xk), abs=1e-12)

    def test_rejects_cfl_violation(self):
        f = hat_field()
        with pytest.raises(ValueError):
            hopf_lax_step(f, 0.51, 1.0)

    def test_rejects_bad_dt(self):
        f = hat_field()
        with pytest.raises(ValueError):
            hopf_lax_step(f, 0.0, 1.0)
        with pytest.raises(ValueError):
            hopf_lax_step(f, np.inf, 1.0)

    def test_matches_oracle_on_random_fields(self, rng):
        worst = 0.0
        for _ in range(60):
            f = random_field(rng, 5, 60)
            m = float(rng.uniform(0.5, 3.0))
            dt = random_cfl_dt(rng, f, m)
            r = hopf_lax_step(f, dt, m)
            nodes = r.field_half.grid.nodes()
            worst = max(worst, float(np.abs(
                r.field_half.values - hopf_lax_oracle(f, dt, m, nodes)).max()))
        assert worst < 1e-6

    def test_support_and_norm_invariants(self, rng):
        for _ in range(100):
            f = random_field(rng, 5, 60)
            m = float(rng.uniform(0.5, 3.0))
            v = compute_slopes(f)
            dt = random_cfl_dt(rng, f, m)
            r = hopf_lax_step(f, dt, m)
            assert r.s_minus_new >= f.grid.s_minus
            assert r.s_plus_new >= f.grid.s_plus
            assert np.all(r.field_half.values >= 0.0)
            # sup bound and slope contraction, up to rounding
            assert r.field_half.sup_norm() <= f.sup_norm() * (1 + 1e-12)
            v2 = compute_slopes(r.field_half)
            assert v2.sup_norm() <= v.sup_norm() * (1 + 1e-12)
            assert v2.l1_norm() <= v.l1_norm() * (1 + 1e-12)

    def test_at_most_one_node_per_side(self, rng):
        for _ in range(100):
            f = random_field(rng, 5, 40)
            m = float(rng.uniform(0.5, 3.0))
            dt = random_cfl_dt(rng, f, m, lo=0.9, hi=1.0)
            r = hopf_lax_step(f, dt, m)
            assert r.field_half.grid.n_plus - f.grid.n_plus in (0, 1)
            assert r.field_half.grid.n_minus - f.grid.n_minus in (0, 1)


class TestOracle:
    def test_zero_field(self):
        g = build_initial_grid(1.0, 4)
        f = NodalField(g, np.zeros(g.num_nodes))
        xs = np.linspace(-3, 3, 21)
        assert np.array_equal(hopf_lax_oracle(f, 0.2, 1.0, xs), np.zeros(21))

    def test_front_position(self):
        # hat: right end slope -1, front speed |v|/m
        f = hat_field()
        m, dt = 1.0, 0.5
        front = 1.0 + dt * 1.0 / m
        assert hopf_lax_oracle(f, dt, m, front + 1e-6) == 0.0
        assert hopf_lax_oracle(f, dt, m, front - 1e-3) > 0.0

    def test_scalar_and_array_forms(self):
        f = hat_field()
        val = hopf_lax_oracle(f, 0.5, 1.0, 0.0)
        assert isinstance(val, float) and val == 1.0
        arr = hopf_lax_oracle(f, 0.5, 1.0, np.array([0.0, 2.0]))
        assert arr.shape == (2,) and arr[0] == 1.0 and arr[1] == 0.0

    def test_valley_fills_at_variational_rate(self):
        # V-shape: both adjacent slopes feed the node
        g = build_initial_grid(2.0, 2)
        f = NodalField(g, [1.0, 0.0, 1.0])
        r = hopf_lax_step(f, 0.25, 1.0)
        # max(0, -v_1, v_2) = max(0, 1, 1) = 1 at the middle node
        mid = r.field_half.values[list(r.field_half.grid.nodes()).index(0.0)]
        assert mid == pytest.approx(0.0 + 0.25 * 1.0**2)
        assert mid == pytest.approx(hopf_lax_oracle(f, 0.25, 1.0, 0.0), abs=1e-12)
