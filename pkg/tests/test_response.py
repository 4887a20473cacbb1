import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochfiber.response import (
    InsufficientDataError,
    damping_history,
    ensemble_stats,
    equilibrium_offset,
    find_peaks,
    log_decrement,
    loop_area,
    vibration_period,
    write_columns,
)


def decaying(xi, f=5.0, T=4.0, dt=1e-3, amp=1e-3, offset=0.0):
    t = np.arange(0.0, T, dt)
    w = 2 * np.pi * f
    wd = w * math.sqrt(1 - xi**2)
    return t, offset + amp * np.exp(-xi * w * t) * np.cos(wd * t)


class TestPeaks:
    def test_recovers_viscous_ratio(self):
        t, u = decaying(0.05, T=2.0)
        pk = find_peaks(t, u, offset=0.0)
        xi = log_decrement(pk, 0, 5)
        # log decrement gives 2 pi xi / sqrt(1 - xi^2)
        assert xi * math.sqrt(1 - 0.05**2) == pytest.approx(0.05, rel=1e-2)

    def test_period(self):
        t, u = decaying(0.0, f=4.0)
        assert vibration_period(find_peaks(t, u, offset=0.0)) == pytest.approx(0.25, rel=1e-6)

    def test_offset_is_removed(self):
        t, u = decaying(0.02, offset=-3e-3)
        a = find_peaks(t, u, offset=-3e-3)
        b = find_peaks(t, u - (-3e-3), offset=0.0)
        np.testing.assert_allclose(a.amplitude, b.amplitude, rtol=1e-12)

    def test_negative_side(self):
        t, u = decaying(0.0)
        pk = find_peaks(t, u, sign=-1, offset=0.0)
        np.testing.assert_allclose(pk.amplitude, 1e-3, rtol=1e-4)
        assert pk.sign == -1

    def test_default_offset_is_tail_mean(self):
        u = np.r_[np.zeros(80), np.ones(20)]
        assert equilibrium_offset(u) == 1.0

    def test_too_few_peaks(self):
        t = np.linspace(0, 1, 100)
        with pytest.raises(InsufficientDataError):
            find_peaks(t, np.sin(np.pi * t), offset=0.0)
        with pytest.raises(InsufficientDataError):
            find_peaks(t[:2], t[:2])

    def test_bad_sign(self):
        with pytest.raises(ValueError):
            find_peaks(np.arange(5.0), np.zeros(5), sign=0)


class TestLogDecrement:
    def test_halving_example(self):
        from stochfiber.response import PeakSequence
        pk = PeakSequence(np.arange(6.0), np.array([2.0, 1.8, 1.6, 1.4, 1.2, 1.0]), 1, 0.0)
        assert log_decrement(pk, 0, 5) == pytest.approx(math.log(2) / (10 * math.pi))
        assert log_decrement(pk, 0, 5) == pytest.approx(0.022064, abs=1e-6)

    def test_window_composition(self):
        t, u = decaying(0.03, T=6.0)
        pk = find_peaks(t, u, offset=0.0)
        ten = log_decrement(pk, 0, 10)
        two = 0.5 * (log_decrement(pk, 0, 5) + log_decrement(pk, 5, 5))
        assert ten == pytest.approx(two, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(scale=st.floats(1e-6, 1e6))
    def test_scale_invariant(self, scale):
        t, u = decaying(0.02, T=2.0)
        a = damping_history(find_peaks(t, u, offset=0.0))[1]
        b = damping_history(find_peaks(t, scale * u, offset=0.0))[1]
        np.testing.assert_allclose(a, b, rtol=1e-9)

    def test_history_length(self):
        t, u = decaying(0.01, f=5.0, T=3.0)
        pk = find_peaks(t, u, offset=0.0)
        tt, xi = damping_history(pk, n_c=5)
        assert tt.size == len(pk) - 5 == xi.size
        np.testing.assert_allclose(xi, xi[0], rtol=1e-3)

    def test_errors(self):
        t, u = decaying(0.01, T=0.5)
        pk = find_peaks(t, u, offset=0.0)
        with pytest.raises(InsufficientDataError):
            log_decrement(pk, 0, len(pk))
        with pytest.raises(ValueError):
            log_decrement(pk, 0, 0)
        with pytest.raises(InsufficientDataError):
            damping_history(pk, n_c=len(pk))


class TestLoopArea:
    def test_rectangle(self):
        s0, e0 = 2.0, 3.0
        E = np.array([-e0, e0, e0, -e0, -e0])
        S = np.array([-s0, -s0, s0, s0, -s0])
        assert loop_area(E, S) == pytest.approx(4 * s0 * e0)

    def test_orientation_independent(self):
        E = np.array([0.0, 1.0, 1.0, 0.0])
        S = np.array([0.0, 0.0, 1.0, 0.0])
        assert loop_area(E, S) == loop_area(E[::-1], S[::-1]) == pytest.approx(0.5)

    def test_open_cycle(self):
        with pytest.raises(ValueError):
            loop_area([0.0, 1.0], [0.0, 1.0])


class TestEnsemble:
    def test_two_curves(self):
        g = np.linspace(0, 1, 4)
        ens = ensemble_stats(g, [np.ones(4), -np.ones(4)])
        np.testing.assert_array_equal(ens.mean, 0.0)
        np.testing.assert_allclose(ens.std, math.sqrt(2))
        assert ens.count == 2

    def test_grid_mismatch(self):
        with pytest.raises(ValueError):
            ensemble_stats([np.arange(3.0), np.arange(3.0) + 1], [np.zeros(3), np.zeros(3)])
        with pytest.raises(ValueError):
            ensemble_stats(np.arange(3.0), [np.zeros(3)])

    def test_write_columns(self, tmp_path):
        p = tmp_path / "c.dat"
        write_columns(p, [[1.0, 2.0], [1 / 3, 2 / 3]], header="x y")
        lines = p.read_text().splitlines()
        assert lines[0] == "# x y"
        assert lines[1] == "1.00000000e+00 3.33333333e-01"
