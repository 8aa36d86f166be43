"""Gradient growth in the cellular flow: characteristic map, transport models and the fit."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from voigtmhd import growth as gr
from voigtmhd.errors import ConfigurationError, ResolutionExhausted

labels = st.floats(-3.1, 3.1)
times = st.floats(0.0, 6.0)


@pytest.fixture(scope="module")
def reduced_run():
    cfg = gr.GrowthConfig(model="reduced1d", n=512, t_max=5.0, dt=2.5e-3)
    return gr.run(cfg, snapshot_times=(2.0, 3.0))


@pytest.fixture(scope="module")
def cellular_run():
    cfg = gr.GrowthConfig(model="cellular2d", n=512, t_max=2.0, dt=5e-3, sample_interval=0.05)
    return gr.run(cfg, snapshot_times=(1.0, 2.0))


class TestCharacteristicMap:
    def test_known_value(self):
        assert gr.characteristic_map(1.0, 2.0) == pytest.approx(0.14760, abs=5e-6)

    @pytest.mark.parametrize("a,t", [(1.0, 2.0), (-2.5, 0.7), (3.0, 4.0), (0.1, 1.0)])
    def test_matches_ode(self, a, t):
        assert gr.characteristic_map(a, t) == pytest.approx(oracles.reduced_characteristic(a, t), abs=1e-10)

    def test_identity_at_zero_time(self):
        a = np.linspace(-3, 3, 13)
        np.testing.assert_allclose(gr.characteristic_map(a, 0.0), a, atol=1e-15)

    @given(a=labels, s=st.floats(0, 3), t=st.floats(0, 3))
    @settings(max_examples=100, deadline=None)
    def test_group_property(self, a, s, t):
        composed = gr.characteristic_map(gr.characteristic_map(a, s), t)
        assert composed == pytest.approx(gr.characteristic_map(a, s + t), abs=1e-12)

    @given(a=labels, t=times)
    @settings(max_examples=100, deadline=None)
    def test_inverse(self, a, t):
        back = gr.inverse_characteristic_map(gr.characteristic_map(a, t), t)
        assert back == pytest.approx(a, abs=1e-9 * math.exp(t))

    @pytest.mark.parametrize("a", [math.pi, -math.pi, 4.0])
    def test_rejects_fixed_repeller(self, a):
        with pytest.raises(ValueError):
            gr.characteristic_map(a, 1.0)

    @given(a=labels, t=times)
    @settings(max_examples=50, deadline=None)
    def test_moves_toward_origin(self, a, t):
        assert abs(gr.characteristic_map(a, t)) <= abs(a) + 1e-15


class TestProfile:
    def test_linear_core(self):
        y = np.linspace(-math.pi / 2, math.pi / 2, 101)
        np.testing.assert_allclose(gr.initial_profile(y), y, atol=1e-15)

    def test_odd_and_periodic(self):
        y = np.linspace(-7, 7, 301)
        np.testing.assert_allclose(gr.initial_profile(-y), -gr.initial_profile(y), atol=1e-14)
        np.testing.assert_allclose(gr.initial_profile(y + 2 * math.pi), gr.initial_profile(y), atol=1e-13)

    def test_reflected_near_repeller(self):
        assert gr.initial_profile(math.pi) == pytest.approx(0.0, abs=1e-15)
        y = math.pi - 1e-3
        assert gr.initial_profile(y) == pytest.approx(math.pi - y, abs=1e-12)

    def test_bounded(self):
        assert math.pi / 2 < gr.profile_max() < math.pi


class TestConfig:
    def test_defaults(self):
        cfg = gr.GrowthConfig()
        assert cfg.fit_window == (1.0, 4.0)

    def test_short_horizon_window(self):
        assert gr.GrowthConfig(t_max=0.8).fit_window == (0.2, 0.8)

    @pytest.mark.parametrize("kwargs", [
        {"model": "spiral"}, {"n": 63}, {"n": 32}, {"t_max": 0.0}, {"dt": -1.0},
        {"sample_interval": 1e-4}, {"fit_window": (2.0, 1.0)}, {"fit_window": (1.0, 9.0)},
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(ConfigurationError):
            gr.GrowthConfig(**kwargs)


class TestFit:
    def _series(self, t, g, aliased=None):
        aliased = np.zeros_like(t, dtype=bool) if aliased is None else aliased
        return gr.GrowthSeries(t=t, axis_gradient=g, global_gradient=g, aliased=aliased)

    def test_synthetic_exponential(self):
        t = np.linspace(0, 3, 31)
        rate, pre, r2 = gr.fit_growth_rate(self._series(t, 5 * np.exp(2 * t)), (1, 3))
        assert rate == pytest.approx(2.0, abs=1e-12)
        assert pre == pytest.approx(5.0, rel=1e-12)
        assert r2 == pytest.approx(1.0, abs=1e-12)

    def test_refuses_aliased_samples(self):
        t = np.linspace(0, 3, 31)
        flags = t > 2.5
        with pytest.raises(ResolutionExhausted):
            gr.fit_growth_rate(self._series(t, np.exp(t), flags), (1, 3))

    def test_aliasing_outside_window_ignored(self):
        t = np.linspace(0, 3, 31)
        rate, _, _ = gr.fit_growth_rate(self._series(t, np.exp(t), t > 2.5), (0, 2))
        assert rate == pytest.approx(1.0, abs=1e-12)

    def test_too_few_samples(self):
        t = np.linspace(0, 3, 7)
        with pytest.raises(ValueError):
            gr.fit_growth_rate(self._series(t, np.exp(t)), (0, 3))


class TestReduced:
    def test_initial_slope(self, reduced_run):
        assert reduced_run.t[0] == 0.0
        assert reduced_run.axis_gradient[0] == pytest.approx(1.0, abs=1e-12)

    def test_axis_gradient_exponential(self, reduced_run):
        i = int(np.argmin(np.abs(reduced_run.t - 3.0)))
        assert reduced_run.axis_gradient[i] == pytest.approx(math.exp(3.0), abs=1e-4)

    def test_lower_bound(self, reduced_run):
        sel = reduced_run.t <= 4.0
        assert np.all(reduced_run.axis_gradient[sel] >= 0.99 * np.exp(reduced_run.t[sel]))

    def test_pullback_at_two(self, reduced_run):
        y = 2 * math.pi * np.arange(512) / 512
        err = np.max(np.abs(reduced_run.snapshots[2.0] - gr.exact_reduced_solution(y, 2.0)))
        assert err <= 1e-6

    def test_range_preserved(self, reduced_run):
        assert np.max(reduced_run.max_abs[reduced_run.t <= 2.0]) <= gr.profile_max() + 1e-8

    def test_fit(self, reduced_run):
        assert 0.97 <= reduced_run.rate <= 1.03
        assert 0.95 <= reduced_run.prefactor <= 1.05

    def test_rows_layout(self, reduced_run):
        row = next(iter(reduced_run.rows()))
        assert len(row) == 4 and row[3] in (0, 1)

    def test_wrong_model_rejected(self):
        with pytest.raises(ConfigurationError):
            gr.run_reduced_1d(gr.GrowthConfig(model="cellular2d"))


class TestCellularFlow:
    def test_steady_euler(self):
        n = 64
        ux, uy, psi = gr.cellular_velocity(n)
        k = np.fft.fftfreq(n, 1.0 / n)

        def d(f, axis):
            kk = k[:, None] if axis == 0 else k[None, :]
            return np.real(np.fft.ifft2(1j * kk * np.fft.fft2(f)))

        div_hat = k[:, None] * np.fft.fft2(ux, norm="forward") + k[None, :] * np.fft.fft2(uy, norm="forward")
        assert np.max(np.abs(div_hat)) <= 1e-14
        np.testing.assert_allclose(ux, d(psi, 1), atol=1e-14)
        np.testing.assert_allclose(uy, -d(psi, 0), atol=1e-14)
        x = 2 * np.pi * np.arange(n) / n
        X, Y = np.meshgrid(x, x, indexing="ij")
        phi = -(np.cos(2 * X) + np.cos(2 * Y)) / 4
        adv_x = ux * d(ux, 0) + uy * d(ux, 1)
        adv_y = ux * d(uy, 0) + uy * d(uy, 1)
        assert np.max(np.abs(adv_x - d(phi, 0))) <= 1e-13
        assert np.max(np.abs(adv_y - d(phi, 1))) <= 1e-13

    def test_l2_conserved_coarse(self):
        s = gr.run(gr.GrowthConfig(model="cellular2d", n=128, t_max=1.0, dt=1e-2, sample_interval=0.1))
        assert np.max(np.abs(s.l2_norm / s.l2_norm[0] - 1)) <= 1e-10


@pytest.mark.slow
class TestCellular:
    def test_l2_conserved(self, cellular_run):
        assert np.max(np.abs(cellular_run.l2_norm / cellular_run.l2_norm[0] - 1)) <= 1e-10

    def test_range_preserved_early(self, cellular_run):
        early = cellular_run.t <= 1.0
        assert np.max(cellular_run.max_abs[early]) <= gr.profile_max() + 1e-8

    def test_matches_backtraced_labels(self, cellular_run):
        rng = np.random.default_rng(0)
        v = cellular_run.snapshots[1.0]
        for i, j in rng.integers(0, 512, size=(40, 2)):
            x, y = 2 * np.pi * i / 512, 2 * np.pi * j / 512
            assert v[i, j] == pytest.approx(gr.initial_profile(oracles.backtrace_label(x, y, 1.0)), abs=1e-6)

    def test_axis_matches_backtrace_late(self, cellular_run):
        v = cellular_run.snapshots[2.0]
        for j in (0, 3, 40, 200, 300, 480):
            y = 2 * np.pi * j / 512
            assert v[0, j] == pytest.approx(gr.initial_profile(oracles.backtrace_label(0.0, y, 2.0)), abs=1e-6)

    def test_axis_matches_reduced(self, cellular_run, reduced_run):
        t2 = int(np.argmin(np.abs(cellular_run.t - 2.0)))
        t1 = int(np.argmin(np.abs(reduced_run.t - 2.0)))
        assert cellular_run.axis_gradient[t2] == pytest.approx(reduced_run.axis_gradient[t1], abs=1e-5)
        np.testing.assert_allclose(cellular_run.snapshots[2.0][0], reduced_run.snapshots[2.0], atol=1e-5)
